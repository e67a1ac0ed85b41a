//! Undirected, unweighted graphs and their symmetric normalized operators.
//!
//! `normalized_adjacency` gives Â = D^{-1/2} A D^{-1/2} and
//! `normalized_laplacian` gives L = I − Â. Both are built entry by entry from
//! the same expression for (i, j) and (j, i), so they are exactly symmetric.
//! Nodes of degree zero are rejected: D^{-1/2} has no value there.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    num_nodes: usize,
    /// Canonical `(min, max)` pairs, sorted.
    edges: Vec<(usize, usize)>,
    degree: Vec<usize>,
}

impl Graph {
    /// Validates an undirected edge list. The result does not depend on edge
    /// order or on the orientation of each pair.
    pub fn new(num_nodes: usize, edge_list: &[(usize, usize)]) -> Result<Self> {
        if num_nodes == 0 {
            return Err(Error::NoNodes);
        }
        let mut seen = HashSet::with_capacity(edge_list.len());
        let mut degree = vec![0usize; num_nodes];
        let mut edges = Vec::with_capacity(edge_list.len());
        for &(a, b) in edge_list {
            for index in [a, b] {
                if index >= num_nodes {
                    return Err(Error::IndexOutOfRange { index, num_nodes });
                }
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            let key = (a.min(b), a.max(b));
            if !seen.insert(key) {
                return Err(Error::DuplicateEdge(key.0, key.1));
            }
            degree[a] += 1;
            degree[b] += 1;
            edges.push(key);
        }
        edges.sort_unstable();
        Ok(Graph {
            num_nodes,
            edges,
            degree,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degree(&self) -> &[usize] {
        &self.degree
    }

    pub fn isolated_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.degree
            .iter()
            .enumerate()
            .filter_map(|(i, &d)| (d == 0).then_some(i))
    }

    /// Binary adjacency A as a dense matrix.
    pub fn adjacency(&self) -> DenseMatrix {
        let n = self.num_nodes;
        let mut a = DenseMatrix::zeros(n, n);
        for &(i, j) in &self.edges {
            a.set(i, j, 1.0);
            a.set(j, i, 1.0);
        }
        a
    }

    fn inv_sqrt_degree(&self) -> Result<Vec<f64>> {
        if let Some(i) = self.isolated_nodes().next() {
            return Err(Error::IsolatedNode(i));
        }
        Ok(self
            .degree
            .iter()
            .map(|&d| 1.0 / (d as f64).sqrt())
            .collect())
    }

    /// Â with Â_ij = A_ij / √(d_i d_j).
    pub fn normalized_adjacency(&self) -> Result<DenseMatrix> {
        let inv = self.inv_sqrt_degree()?;
        let n = self.num_nodes;
        let mut a = DenseMatrix::zeros(n, n);
        for &(i, j) in &self.edges {
            let w = inv[i] * inv[j];
            a.set(i, j, w);
            a.set(j, i, w);
        }
        Ok(a)
    }

    /// L = I − Â, positive semi-definite with spectrum in [0, 2].
    pub fn normalized_laplacian(&self) -> Result<DenseMatrix> {
        let mut l = self.normalized_adjacency()?;
        for v in l.as_mut_slice().iter_mut() {
            *v = -*v;
        }
        for i in 0..self.num_nodes {
            l.set(i, i, 1.0);
        }
        Ok(l)
    }
}
