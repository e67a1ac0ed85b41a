//! Two-layer graph convolutional classifier for binary node labels.
//!
//! logits = Â · relu(Â · X · W0) · W1, no bias terms, softmax over two
//! classes. Training is full-batch gradient descent on masked cross-entropy
//! with L2 weight decay, keeping the weights with the best validation accuracy
//! (ties broken by validation loss).

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::matrix::DenseMatrix;
use crate::metrics;

pub const NUM_CLASSES: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub weight_decay: f64,
    pub seed: u64,
    pub early_stop_patience: usize,
    pub hidden_dim: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.05,
            epochs: 300,
            weight_decay: 5e-4,
            seed: 0,
            early_stop_patience: 30,
            hidden_dim: 16,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_owned()));
        if !(self.learning_rate >= 0.0 && self.learning_rate < 10.0) {
            return bad("learning_rate must lie in [0, 10)");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return bad("weight_decay must be a non-negative number");
        }
        if self.early_stop_patience == 0 {
            return bad("early_stop_patience must be at least 1");
        }
        if self.hidden_dim == 0 {
            return bad("hidden_dim must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel")]
pub struct GcnModel {
    w0: DenseMatrix,
    w1: DenseMatrix,
}

#[derive(Deserialize)]
struct RawModel {
    w0: DenseMatrix,
    w1: DenseMatrix,
}

impl TryFrom<RawModel> for GcnModel {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        GcnModel::from_weights(raw.w0, raw.w1)
    }
}

impl GcnModel {
    /// Glorot-uniform initialization, deterministic in `seed`.
    pub fn init(num_features: usize, hidden_dim: usize, seed: u64) -> Result<Self> {
        if num_features == 0 || hidden_dim == 0 {
            return Err(Error::InvalidConfig(
                "feature and hidden dimensions must be positive".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w0 = glorot(num_features, hidden_dim, &mut rng);
        let w1 = glorot(hidden_dim, NUM_CLASSES, &mut rng);
        Ok(GcnModel { w0, w1 })
    }

    pub fn from_weights(w0: DenseMatrix, w1: DenseMatrix) -> Result<Self> {
        check_len(w0.cols(), w1.rows())?;
        check_len(NUM_CLASSES, w1.cols())?;
        Ok(GcnModel { w0, w1 })
    }

    pub fn w0(&self) -> &DenseMatrix {
        &self.w0
    }

    pub fn w1(&self) -> &DenseMatrix {
        &self.w1
    }

    pub fn num_features(&self) -> usize {
        self.w0.rows()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w0.cols()
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Half-width of the Glorot-uniform interval for a layer.
pub fn glorot_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

fn glorot(fan_in: usize, fan_out: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let b = glorot_bound(fan_in, fan_out);
    DenseMatrix::from_fn(fan_in, fan_out, |_, _| rng.random_range(-b..=b))
}

/// Intermediate activations kept for backpropagation.
struct Activations {
    /// Â X W0
    pre: DenseMatrix,
    /// Â relu(Â X W0)
    agg: DenseMatrix,
    logits: DenseMatrix,
}

fn check_chain(a_hat: &DenseMatrix, x: &DenseMatrix, model: &GcnModel) -> Result<()> {
    check_len(a_hat.rows(), a_hat.cols())?;
    check_len(a_hat.cols(), x.rows())?;
    check_len(model.num_features(), x.cols())
}

fn relu(m: &DenseMatrix) -> DenseMatrix {
    let mut out = m.clone();
    out.as_mut_slice().iter_mut().for_each(|v| *v = v.max(0.0));
    out
}

fn activations(a_hat: &DenseMatrix, ax: &DenseMatrix, model: &GcnModel) -> Result<Activations> {
    let pre = ax.matmul(&model.w0)?;
    let agg = a_hat.matmul(&relu(&pre))?;
    let logits = agg.matmul(&model.w1)?;
    Ok(Activations { pre, agg, logits })
}

/// N×2 logits Â · relu(Â X W0) · W1.
pub fn forward(a_hat: &DenseMatrix, x: &DenseMatrix, model: &GcnModel) -> Result<DenseMatrix> {
    check_chain(a_hat, x, model)?;
    let ax = a_hat.matmul(x)?;
    Ok(activations(a_hat, &ax, model)?.logits)
}

fn log_softmax_pair(a: f64, b: f64) -> (f64, f64) {
    let m = a.max(b);
    let lse = m + ((a - m).exp() + (b - m).exp()).ln();
    (a - lse, b - lse)
}

fn check_targets(logits: &DenseMatrix, y: &[u8], mask: &[usize]) -> Result<()> {
    check_len(NUM_CLASSES, logits.cols())?;
    check_len(logits.rows(), y.len())?;
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    for &i in mask {
        if i >= y.len() {
            return Err(Error::MaskOutOfRange {
                index: i,
                len: y.len(),
            });
        }
        if y[i] > 1 {
            return Err(Error::NotBinaryLabel {
                index: i,
                value: y[i],
            });
        }
    }
    Ok(())
}

/// Mean masked softmax cross-entropy, without regularization.
pub fn cross_entropy(logits: &DenseMatrix, y: &[u8], mask: &[usize]) -> Result<f64> {
    check_targets(logits, y, mask)?;
    let total: f64 = mask
        .iter()
        .map(|&i| {
            let (l0, l1) = log_softmax_pair(logits.get(i, 0), logits.get(i, 1));
            -if y[i] == 0 { l0 } else { l1 }
        })
        .sum();
    Ok(total / mask.len() as f64)
}

/// Cross-entropy plus `weight_decay / 2 · (‖W0‖² + ‖W1‖²)`.
pub fn loss(
    model: &GcnModel,
    logits: &DenseMatrix,
    y: &[u8],
    mask: &[usize],
    weight_decay: f64,
) -> Result<f64> {
    Ok(cross_entropy(logits, y, mask)?
        + 0.5 * weight_decay * (model.w0.frobenius_sq() + model.w1.frobenius_sq()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub loss: f64,
    pub w0: DenseMatrix,
    pub w1: DenseMatrix,
}

/// Loss and its exact gradients with respect to W0 and W1.
pub fn gradients(
    a_hat: &DenseMatrix,
    x: &DenseMatrix,
    y: &[u8],
    mask: &[usize],
    model: &GcnModel,
    weight_decay: f64,
) -> Result<Gradients> {
    check_chain(a_hat, x, model)?;
    let ax = a_hat.matmul(x)?;
    let act = activations(a_hat, &ax, model)?;
    backward(a_hat, &ax, &act, y, mask, model, weight_decay)
}

fn backward(
    a_hat: &DenseMatrix,
    ax: &DenseMatrix,
    act: &Activations,
    y: &[u8],
    mask: &[usize],
    model: &GcnModel,
    weight_decay: f64,
) -> Result<Gradients> {
    let loss = loss(model, &act.logits, y, mask, weight_decay)?;
    let n = act.logits.rows();
    let scale = 1.0 / mask.len() as f64;
    let mut d_logits = DenseMatrix::zeros(n, NUM_CLASSES);
    for &i in mask {
        let (l0, l1) = log_softmax_pair(act.logits.get(i, 0), act.logits.get(i, 1));
        let (t0, t1) = if y[i] == 0 { (1.0, 0.0) } else { (0.0, 1.0) };
        // mask may repeat a node; contributions add up like the loss terms
        d_logits.set(i, 0, d_logits.get(i, 0) + scale * (l0.exp() - t0));
        d_logits.set(i, 1, d_logits.get(i, 1) + scale * (l1.exp() - t1));
    }

    let mut g_w1 = act.agg.t_matmul(&d_logits)?;
    g_w1.scale_add(weight_decay, &model.w1);

    let d_agg = d_logits.matmul(&model.w1.transpose())?;
    let mut d_pre = a_hat.t_matmul(&d_agg)?;
    for (d, &p) in d_pre.as_mut_slice().iter_mut().zip(act.pre.as_slice()) {
        if p <= 0.0 {
            *d = 0.0;
        }
    }
    let mut g_w0 = ax.t_matmul(&d_pre)?;
    g_w0.scale_add(weight_decay, &model.w0);

    Ok(Gradients {
        loss,
        w0: g_w0,
        w1: g_w1,
    })
}

/// Argmax over the two logits; ties go to class 0.
pub fn predict_from_logits(logits: &DenseMatrix) -> Vec<u8> {
    (0..logits.rows())
        .map(|i| u8::from(logits.get(i, 1) > logits.get(i, 0)))
        .collect()
}

pub fn predict(model: &GcnModel, a_hat: &DenseMatrix, x: &DenseMatrix) -> Result<Vec<u8>> {
    Ok(predict_from_logits(&forward(a_hat, x, model)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub train_accuracy: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: GcnModel,
    /// Epoch whose weights were kept.
    pub best_epoch: usize,
    pub history: Vec<EpochStats>,
}

/// Full-batch gradient descent from `GcnModel::init(F, cfg.hidden_dim, cfg.seed)`.
///
/// Each epoch records the loss and accuracies of the current weights, then
/// takes one step. Training stops after `early_stop_patience` epochs without
/// a better validation score, or after `epochs` steps.
pub fn train(
    a_hat: &DenseMatrix,
    x: &DenseMatrix,
    y: &[u8],
    train_mask: &[usize],
    val_mask: &[usize],
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let model = GcnModel::init(x.cols(), cfg.hidden_dim, cfg.seed)?;
    train_from(a_hat, x, y, train_mask, val_mask, cfg, model)
}

/// Like [`train`] but starting from the given weights.
pub fn train_from(
    a_hat: &DenseMatrix,
    x: &DenseMatrix,
    y: &[u8],
    train_mask: &[usize],
    val_mask: &[usize],
    cfg: &TrainConfig,
    mut model: GcnModel,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    check_chain(a_hat, x, &model)?;
    if val_mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    if train_mask.iter().any(|i| val_mask.contains(i)) {
        return Err(Error::InvalidConfig(
            "train and validation masks overlap".into(),
        ));
    }
    let ax = a_hat.matmul(x)?;

    let mut history = Vec::with_capacity(cfg.epochs + 1);
    let mut best = (model.clone(), 0usize, f64::NEG_INFINITY, f64::INFINITY);
    let mut stale = 0usize;
    for epoch in 0..=cfg.epochs {
        let act = activations(a_hat, &ax, &model)?;
        let grads = backward(a_hat, &ax, &act, y, train_mask, &model, cfg.weight_decay)?;
        let y_hat = predict_from_logits(&act.logits);
        let stats = EpochStats {
            epoch,
            train_loss: grads.loss,
            val_loss: cross_entropy(&act.logits, y, val_mask)?,
            train_accuracy: metrics::accuracy(&y_hat, y, train_mask)?,
            val_accuracy: metrics::accuracy(&y_hat, y, val_mask)?,
        };
        history.push(stats);
        if !stats.train_loss.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "training diverged at epoch {epoch}; lower the learning rate"
            )));
        }

        let improved = stats.val_accuracy > best.2
            || (stats.val_accuracy == best.2 && stats.val_loss < best.3);
        if improved {
            best = (model.clone(), epoch, stats.val_accuracy, stats.val_loss);
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.early_stop_patience {
                break;
            }
        }
        if epoch == cfg.epochs {
            break;
        }
        model.w0.scale_add(-cfg.learning_rate, &grads.w0);
        model.w1.scale_add(-cfg.learning_rate, &grads.w1);
    }
    Ok(TrainOutcome {
        model: best.0,
        best_epoch: best.1,
        history,
    })
}
