#![allow(dead_code)]

use fairgraph::{DenseMatrix, Graph, GraphSignal};
use rand::Rng;

/// A random spanning tree plus extra edges with probability `p`.
pub fn random_connected_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for i in 1..n {
        edges.push((rng.random_range(0..i), i));
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p && !edges.contains(&(i, j)) {
                edges.push((i, j));
            }
        }
    }
    Graph::new(n, &edges).unwrap()
}

/// A ±1 signal with both values present.
pub fn random_signs<R: Rng>(rng: &mut R, n: usize) -> GraphSignal {
    let mut v: Vec<f64> = (0..n)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect();
    v[0] = 1.0;
    v[n - 1] = -1.0;
    GraphSignal::new(v).unwrap()
}

pub fn random_signal<R: Rng>(rng: &mut R, n: usize) -> GraphSignal {
    GraphSignal::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DenseMatrix {
    let data = (0..rows * cols)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    DenseMatrix::from_vec(rows, cols, data).unwrap()
}

pub fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
