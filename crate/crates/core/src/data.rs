//! Datasets: CSV/edge-list loading, synthetic homophilic SBM graphs and
//! seeded train/validation/test splits.
//!
//! Node file: CSV with a header. One column holds the node id, one the
//! sensitive attribute (`0` → s = −1, `1` → s = +1) and one the label (`0`,
//! `1`, or `-1`/empty for unknown). Every other column is a numeric feature,
//! kept in file order.
//!
//! Edge file: one pair of node ids per line, separated by whitespace or a
//! comma. Blank lines and lines starting with `#` are skipped. Both
//! orientations of a pair and repeated pairs collapse into one undirected
//! edge; self-loops are dropped.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::graph::Graph;
use crate::matrix::DenseMatrix;
use crate::spectral::GraphSignal;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub graph: Graph,
    pub features: DenseMatrix,
    /// ±1 per node.
    pub sensitive: Vec<i8>,
    /// 0/1 per node; meaningless where `label_known` is false.
    pub labels: Vec<u8>,
    pub label_known: Vec<bool>,
    /// Original node ids, index-aligned with the graph.
    pub node_ids: Vec<String>,
}

impl Dataset {
    pub fn new(
        graph: Graph,
        features: DenseMatrix,
        sensitive: Vec<i8>,
        labels: Vec<u8>,
        label_known: Vec<bool>,
    ) -> Result<Self> {
        let n = graph.num_nodes();
        check_len(n, features.rows())?;
        check_len(n, sensitive.len())?;
        check_len(n, labels.len())?;
        check_len(n, label_known.len())?;
        if let Some(index) = sensitive.iter().position(|&v| v != 1 && v != -1) {
            return Err(Error::NotBinarySensitive {
                index,
                value: f64::from(sensitive[index]),
            });
        }
        if let Some(index) = labels.iter().position(|&v| v > 1) {
            return Err(Error::NotBinaryLabel {
                index,
                value: labels[index],
            });
        }
        let node_ids = (0..n).map(|i| i.to_string()).collect();
        Ok(Dataset {
            graph,
            features,
            sensitive,
            labels,
            label_known,
            node_ids,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.graph.num_nodes()
    }

    pub fn num_features(&self) -> usize {
        self.features.cols()
    }

    pub fn sensitive_signal(&self) -> GraphSignal {
        GraphSignal::new(self.sensitive.iter().map(|&v| f64::from(v)).collect()).expect("finite")
    }

    /// Labels as a ±1 signal (0 → −1, 1 → +1), with 0 at unknown nodes.
    pub fn label_signal(&self) -> GraphSignal {
        let values = self
            .labels
            .iter()
            .zip(&self.label_known)
            .map(|(&y, &known)| match (known, y) {
                (false, _) => 0.0,
                (true, 0) => -1.0,
                (true, _) => 1.0,
            })
            .collect();
        GraphSignal::new(values).expect("finite")
    }

    pub fn known_nodes(&self) -> Vec<usize> {
        (0..self.num_nodes())
            .filter(|&i| self.label_known[i])
            .collect()
    }

    /// Drops nodes with no incident edge, reindexing the rest in order.
    pub fn prune_isolated(&self) -> Result<Dataset> {
        let keep: Vec<usize> = (0..self.num_nodes())
            .filter(|&i| self.graph.degree()[i] > 0)
            .collect();
        if keep.len() == self.num_nodes() {
            return Ok(self.clone());
        }
        let mut new_index = vec![usize::MAX; self.num_nodes()];
        for (new, &old) in keep.iter().enumerate() {
            new_index[old] = new;
        }
        let edges: Vec<(usize, usize)> = self
            .graph
            .edges()
            .iter()
            .map(|&(a, b)| (new_index[a], new_index[b]))
            .collect();
        let graph = Graph::new(keep.len(), &edges)?;
        let f = self.num_features();
        let features = DenseMatrix::from_fn(keep.len(), f, |i, j| self.features.get(keep[i], j));
        Ok(Dataset {
            graph,
            features,
            sensitive: keep.iter().map(|&i| self.sensitive[i]).collect(),
            labels: keep.iter().map(|&i| self.labels[i]).collect(),
            label_known: keep.iter().map(|&i| self.label_known[i]).collect(),
            node_ids: keep.iter().map(|&i| self.node_ids[i].clone()).collect(),
        })
    }

    /// Shifts and scales every feature column to zero mean and unit
    /// (population) variance; constant columns are only centered.
    pub fn standardize_features(&mut self) {
        let (n, f) = (self.features.rows(), self.features.cols());
        for j in 0..f {
            let col = self.features.col(j);
            let mean = col.iter().sum::<f64>() / n as f64;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
            let scale = if var > 0.0 { 1.0 / var.sqrt() } else { 1.0 };
            for (i, v) in col.iter().enumerate() {
                self.features.set(i, j, (v - mean) * scale);
            }
        }
    }
}

/// Column names in the node file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NodeSchema {
    pub id: String,
    pub sensitive: String,
    pub label: String,
}

impl Default for NodeSchema {
    fn default() -> Self {
        NodeSchema {
            id: "id".into(),
            sensitive: "sensitive".into(),
            label: "label".into(),
        }
    }
}

fn parse_err(file: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        file: file.display().to_string(),
        line,
        message: message.into(),
    }
}

pub fn load_dataset(node_file: &Path, edge_file: &Path, schema: &NodeSchema) -> Result<Dataset> {
    let reader = File::open(node_file).map_err(|e| Error::io(node_file, e))?;
    let mut csv = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_owned()))
    };
    let id_col = find(&schema.id)?;
    let sens_col = find(&schema.sensitive)?;
    let label_col = find(&schema.label)?;
    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|c| ![id_col, sens_col, label_col].contains(c))
        .collect();

    let mut node_ids = Vec::new();
    let mut index_of = HashMap::new();
    let mut data = Vec::new();
    let mut sensitive = Vec::new();
    let mut labels = Vec::new();
    let mut label_known = Vec::new();
    for (row, record) in csv.records().enumerate() {
        let record = record?;
        // header is line 1
        let line = row + 2;
        let field = |c: usize| record.get(c).unwrap_or("");
        let id = field(id_col).to_owned();
        if index_of.insert(id.clone(), node_ids.len()).is_some() {
            return Err(parse_err(
                node_file,
                line,
                format!("duplicate node id `{id}`"),
            ));
        }
        node_ids.push(id);
        for &c in &feature_cols {
            let v: f64 = field(c).parse().map_err(|_| {
                parse_err(
                    node_file,
                    line,
                    format!("feature `{}` is not a number: `{}`", &headers[c], field(c)),
                )
            })?;
            if !v.is_finite() {
                return Err(parse_err(
                    node_file,
                    line,
                    format!("feature `{}` is not finite", &headers[c]),
                ));
            }
            data.push(v);
        }
        let raw = field(sens_col);
        sensitive.push(match raw.parse::<f64>() {
            Ok(0.0) => -1,
            Ok(1.0) => 1,
            _ => {
                return Err(Error::NonBinarySensitive {
                    line,
                    value: raw.to_owned(),
                })
            }
        });
        let raw = field(label_col);
        let (label, known) = if raw.is_empty() {
            (0, false)
        } else {
            match raw.parse::<f64>() {
                Ok(-1.0) => (0, false),
                Ok(0.0) => (0, true),
                Ok(1.0) => (1, true),
                _ => {
                    return Err(parse_err(
                        node_file,
                        line,
                        format!("label `{raw}` is not 0, 1, -1 or empty"),
                    ))
                }
            }
        };
        labels.push(label);
        label_known.push(known);
    }
    let n = node_ids.len();
    if n == 0 {
        return Err(Error::NoNodes);
    }
    let features = DenseMatrix::from_vec(n, feature_cols.len(), data)?;

    let edges = read_edges(edge_file, &index_of)?;
    let graph = Graph::new(n, &edges)?;
    Ok(Dataset {
        graph,
        features,
        sensitive,
        labels,
        label_known,
        node_ids,
    })
}

fn read_edges(path: &Path, index_of: &HashMap<String, usize>) -> Result<Vec<(usize, usize)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    for (row, line) in BufReader::new(file).lines().enumerate() {
        let line_no = row + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let ids: Vec<&str> = trimmed
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .collect();
        let [a, b] = ids[..] else {
            return Err(parse_err(path, line_no, "expected exactly two node ids"));
        };
        let lookup = |id: &str| {
            index_of
                .get(id)
                .copied()
                .ok_or_else(|| Error::UnknownNodeId {
                    line: line_no,
                    id: id.to_owned(),
                })
        };
        let (a, b) = (lookup(a)?, lookup(b)?);
        if a == b {
            continue;
        }
        let key = (a.min(b), a.max(b));
        if seen.insert(key) {
            edges.push(key);
        }
    }
    Ok(edges)
}

/// Writes the dataset in the loader's format, with header
/// `id,f0,…,f{F-1},sensitive,label`. Unknown labels are written as `-1`.
pub fn write_dataset(d: &Dataset, node_file: &Path, edge_file: &Path) -> Result<()> {
    let file = File::create(node_file).map_err(|e| Error::io(node_file, e))?;
    let mut w = csv::Writer::from_writer(file);
    let mut header = vec!["id".to_owned()];
    header.extend((0..d.num_features()).map(|j| format!("f{j}")));
    header.push("sensitive".into());
    header.push("label".into());
    w.write_record(&header)?;
    for i in 0..d.num_nodes() {
        let mut rec = vec![d.node_ids[i].clone()];
        rec.extend(d.features.row(i).iter().map(|v| v.to_string()));
        rec.push(if d.sensitive[i] > 0 { "1" } else { "0" }.into());
        rec.push(if d.label_known[i] {
            d.labels[i].to_string()
        } else {
            "-1".into()
        });
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(node_file, e))?;

    let mut out = Vec::new();
    for &(a, b) in d.graph.edges() {
        writeln!(out, "{} {}", d.node_ids[a], d.node_ids[b]).expect("write to Vec");
    }
    std::fs::write(edge_file, out).map_err(|e| Error::io(edge_file, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetStats {
    /// |S₋₁|
    pub group_negative: usize,
    /// |S₊₁|
    pub group_positive: usize,
    pub inter_edges: usize,
    pub intra_edges: usize,
    pub num_features: usize,
}

pub fn dataset_stats(d: &Dataset) -> DatasetStats {
    let group_positive = d.sensitive.iter().filter(|&&s| s > 0).count();
    let inter_edges = d
        .graph
        .edges()
        .iter()
        .filter(|&&(a, b)| d.sensitive[a] != d.sensitive[b])
        .count();
    DatasetStats {
        group_negative: d.num_nodes() - group_positive,
        group_positive,
        inter_edges,
        intra_edges: d.graph.num_edges() - inter_edges,
        num_features: d.num_features(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SbmConfig {
    /// (|S₋₁|, |S₊₁|); nodes of group −1 come first.
    pub group_sizes: (usize, usize),
    pub p_intra: f64,
    pub p_inter: f64,
    /// Probability that a node's label differs from its group-aligned label.
    pub label_flip: f64,
    pub feature_dim: usize,
    pub feature_noise: f64,
    pub seed: u64,
}

impl Default for SbmConfig {
    fn default() -> Self {
        SbmConfig {
            group_sizes: (100, 100),
            p_intra: 0.1,
            p_inter: 0.005,
            label_flip: 0.15,
            feature_dim: 8,
            feature_noise: 0.5,
            seed: 0,
        }
    }
}

impl SbmConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_owned()));
        let (a, b) = self.group_sizes;
        if a == 0 || b == 0 {
            return bad("both sensitive groups need at least one node");
        }
        if !(0.0..=1.0).contains(&self.p_intra) || !(0.0..=1.0).contains(&self.p_inter) {
            return bad("edge probabilities must lie in [0, 1]");
        }
        if self.p_inter > self.p_intra {
            return bad("p_inter must not exceed p_intra");
        }
        if !(0.0..0.5).contains(&self.label_flip) {
            return bad("label_flip must lie in [0, 0.5)");
        }
        if self.feature_dim < 4 {
            return bad("feature_dim must be at least 4 (label and group indicators)");
        }
        if !(self.feature_noise >= 0.0 && self.feature_noise.is_finite()) {
            return bad("feature_noise must be a non-negative number");
        }
        Ok(())
    }
}

/// Samples a two-group stochastic block model with labels and features.
///
/// Group −1 occupies nodes `0..n₋₁`. Every node pair gets an edge with
/// probability `p_intra` (same group) or `p_inter`. Any node left isolated
/// is then joined to one uniformly chosen other node. The latent label is 1
/// for group +1 and 0 for group −1; each observed label flips with
/// probability `label_flip`. Features are one-hot(label) followed by
/// one-hot(group), zero-padded to `feature_dim`, plus N(0, feature_noise²)
/// noise on every entry. All labels are known.
pub fn generate_sbm(cfg: &SbmConfig) -> Result<Dataset> {
    cfg.validate()?;
    let (n_neg, n_pos) = cfg.group_sizes;
    let n = n_neg + n_pos;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let sensitive: Vec<i8> = (0..n).map(|i| if i < n_neg { -1 } else { 1 }).collect();

    let mut edges = Vec::new();
    let mut degree = vec![0usize; n];
    for i in 0..n {
        for j in i + 1..n {
            let p = if sensitive[i] == sensitive[j] {
                cfg.p_intra
            } else {
                cfg.p_inter
            };
            if rng.random::<f64>() < p {
                edges.push((i, j));
                degree[i] += 1;
                degree[j] += 1;
            }
        }
    }
    for i in 0..n {
        if degree[i] == 0 {
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            edges.push((i, j));
            degree[i] += 1;
            degree[j] += 1;
        }
    }
    let graph = Graph::new(n, &edges)?;

    let labels: Vec<u8> = sensitive
        .iter()
        .map(|&s| {
            let latent = u8::from(s > 0);
            if rng.random::<f64>() < cfg.label_flip {
                1 - latent
            } else {
                latent
            }
        })
        .collect();

    let noise =
        Normal::new(0.0, cfg.feature_noise).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let mut data = Vec::with_capacity(n * cfg.feature_dim);
    for i in 0..n {
        for j in 0..cfg.feature_dim {
            let base = match j {
                0 => f64::from(labels[i] == 0),
                1 => f64::from(labels[i] == 1),
                2 => f64::from(sensitive[i] < 0),
                3 => f64::from(sensitive[i] > 0),
                _ => 0.0,
            };
            let eps = if cfg.feature_noise > 0.0 {
                noise.sample(&mut rng)
            } else {
                0.0
            };
            data.push(base + eps);
        }
    }
    let features = DenseMatrix::from_vec(n, cfg.feature_dim, data)?;
    Dataset::new(graph, features, sensitive, labels, vec![true; n])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitMasks {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded shuffle of the label-known nodes followed by contiguous cuts of
/// `floor(n·f_train)` and `floor(n·f_val)`; the remainder is the test set.
pub fn split_nodes(
    label_known: &[bool],
    fractions: (f64, f64, f64),
    seed: u64,
) -> Result<SplitMasks> {
    let (ft, fv, fs) = fractions;
    if [ft, fv, fs].iter().any(|f| !(0.0..=1.0).contains(f)) || (ft + fv + fs - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidConfig(format!(
            "split fractions {fractions:?} must be in [0, 1] and sum to 1"
        )));
    }
    let mut known: Vec<usize> = (0..label_known.len()).filter(|&i| label_known[i]).collect();
    known.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n = known.len() as f64;
    let n_train = (n * ft).floor() as usize;
    let n_val = (n * fv).floor() as usize;
    let test = known.split_off(n_train + n_val);
    let val = known.split_off(n_train);
    let train = known;
    for (name, set) in [("train", &train), ("validation", &val), ("test", &test)] {
        if set.is_empty() {
            return Err(Error::TooFewNodes(name));
        }
    }
    Ok(SplitMasks { train, val, test })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_sizes_and_determinism() {
        let known = vec![true; 10];
        let s = split_nodes(&known, (0.4, 0.3, 0.3), 1).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (4, 3, 3));
        assert_eq!(s, split_nodes(&known, (0.4, 0.3, 0.3), 1).unwrap());
        assert_ne!(s, split_nodes(&known, (0.4, 0.3, 0.3), 2).unwrap());

        let mut known = vec![true; 23];
        known[5] = false;
        known[17] = false;
        let s = split_nodes(&known, (0.4, 0.3, 0.3), 9).unwrap();
        let mut all: Vec<usize> = s
            .train
            .iter()
            .chain(&s.val)
            .chain(&s.test)
            .copied()
            .collect();
        all.sort();
        let expected: Vec<usize> = (0..23).filter(|&i| known[i]).collect();
        assert_eq!(all, expected);
        // 21 known: floor(8.4) = 8, floor(6.3) = 6, remainder 7
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (8, 6, 7));
    }

    #[test]
    fn split_errors() {
        assert!(matches!(
            split_nodes(&[true; 10], (0.5, 0.3, 0.3), 0),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            split_nodes(&[true; 2], (0.4, 0.3, 0.3), 0),
            Err(Error::TooFewNodes(_))
        ));
    }

    #[test]
    fn stats_on_path() {
        let g = Graph::new(2, &[(0, 1)]).unwrap();
        let d = Dataset::new(
            g,
            DenseMatrix::zeros(2, 1),
            vec![1, -1],
            vec![0, 1],
            vec![true; 2],
        )
        .unwrap();
        let st = dataset_stats(&d);
        assert_eq!((st.inter_edges, st.intra_edges), (1, 0));
        assert_eq!((st.group_negative, st.group_positive), (1, 1));
    }

    #[test]
    fn sbm_is_deterministic_and_valid() {
        let cfg = SbmConfig {
            group_sizes: (50, 50),
            p_intra: 0.2,
            p_inter: 0.02,
            seed: 17,
            ..SbmConfig::default()
        };
        let a = generate_sbm(&cfg).unwrap();
        assert_eq!(a, generate_sbm(&cfg).unwrap());
        assert!(a.graph.degree().iter().all(|&d| d > 0));
        assert_eq!(a.sensitive.iter().filter(|&&s| s < 0).count(), 50);

        let st = dataset_stats(&a);
        // brute-force recount from the adjacency matrix
        let adj = a.graph.adjacency();
        let (mut inter, mut intra) = (0, 0);
        for i in 0..100 {
            for j in i + 1..100 {
                if adj.get(i, j) == 1.0 {
                    if a.sensitive[i] == a.sensitive[j] {
                        intra += 1
                    } else {
                        inter += 1
                    }
                }
            }
        }
        assert_eq!((st.inter_edges, st.intra_edges), (inter, intra));
        assert_eq!(st.num_features, cfg.feature_dim);
    }

    #[test]
    fn sbm_rejects_bad_configs() {
        let base = SbmConfig::default();
        for cfg in [
            SbmConfig {
                p_inter: 0.2,
                p_intra: 0.1,
                ..base.clone()
            },
            SbmConfig {
                label_flip: 0.5,
                ..base.clone()
            },
            SbmConfig {
                feature_dim: 3,
                ..base.clone()
            },
            SbmConfig {
                group_sizes: (0, 10),
                ..base.clone()
            },
            SbmConfig {
                feature_noise: -1.0,
                ..base.clone()
            },
        ] {
            assert!(
                matches!(generate_sbm(&cfg), Err(Error::InvalidConfig(_))),
                "{cfg:?}"
            );
        }
    }

    #[test]
    fn noiseless_features_encode_label_and_group() {
        let cfg = SbmConfig {
            group_sizes: (20, 30),
            feature_noise: 0.0,
            label_flip: 0.2,
            feature_dim: 6,
            seed: 3,
            ..SbmConfig::default()
        };
        let d = generate_sbm(&cfg).unwrap();
        for i in 0..d.num_nodes() {
            let row = d.features.row(i);
            assert_eq!(row[1], f64::from(d.labels[i]));
            assert_eq!(row[0], 1.0 - f64::from(d.labels[i]));
            assert_eq!(row[3], f64::from(d.sensitive[i] > 0));
            assert_eq!(&row[4..], &[0.0, 0.0]);
        }
    }

    #[test]
    fn prune_and_standardize() {
        let g = Graph::new(4, &[(0, 2)]).unwrap();
        let x = DenseMatrix::from_rows(&[
            vec![1.0, 5.0],
            vec![2.0, 5.0],
            vec![3.0, 5.0],
            vec![4.0, 5.0],
        ])
        .unwrap();
        let d = Dataset::new(g, x, vec![1, -1, -1, 1], vec![1, 0, 1, 0], vec![true; 4]).unwrap();
        let mut p = d.prune_isolated().unwrap();
        assert_eq!(p.num_nodes(), 2);
        assert_eq!(p.graph.edges(), &[(0, 1)]);
        assert_eq!(p.node_ids, vec!["0", "2"]);
        assert_eq!(p.sensitive, vec![1, -1]);
        p.standardize_features();
        assert_eq!(p.features.col(0), vec![-1.0, 1.0]);
        assert_eq!(p.features.col(1), vec![0.0, 0.0]);
    }
}
