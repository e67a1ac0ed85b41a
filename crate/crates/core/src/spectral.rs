//! Graph Fourier transform over the eigenbasis of the normalized Laplacian.
//!
//! A [`Spectrum`] stores the eigenvalues of L in ascending order together with
//! the matching orthonormal eigenvectors as the columns of V. The GFT of a
//! signal z is Vᵀz, the inverse is V z̃, and filtering with a frequency
//! response h̃ is V diag(h̃) Vᵀ z.
//!
//! Eigenvector signs are not determined by the decomposition, so every column
//! is flipped until its first entry with magnitude above `SIGN_EPS` is
//! positive. Columns sharing an eigenvalue (within `DEGENERACY_EPS`) are then
//! ordered lexicographically. Quantities such as |z̃_i| are basis dependent
//! inside a repeated eigenspace; only their aggregate over the eigenspace is
//! meaningful there.

use std::cmp::Ordering;
use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::graph::Graph;
use crate::matrix::DenseMatrix;

const SIGN_EPS: f64 = 1e-12;
const DEGENERACY_EPS: f64 = 1e-10;
const EIGEN_MAX_ITER: usize = 10_000;

/// A real value per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSignal(Vec<f64>);

impl GraphSignal {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i, 0));
        }
        Ok(GraphSignal(values))
    }

    pub fn zeros(n: usize) -> Self {
        GraphSignal(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Per-frequency gains h̃, index-aligned with [`Spectrum::eigenvalues`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterResponse(Vec<f64>);

impl FilterResponse {
    pub fn new(gains: Vec<f64>) -> Result<Self> {
        if let Some(i) = gains.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i, 0));
        }
        Ok(FilterResponse(gains))
    }

    /// All-pass filter h̃ = 𝟙.
    pub fn identity(n: usize) -> Self {
        FilterResponse(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn gains(&self) -> &[f64] {
        &self.0
    }

    pub fn l1_norm(&self) -> f64 {
        self.0.iter().map(|g| g.abs()).sum()
    }

    pub fn mean(&self) -> f64 {
        if self.0.is_empty() {
            0.0
        } else {
            self.0.iter().sum::<f64>() / self.0.len() as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: DenseMatrix,
}

/// One point of a spectrum profile: a graph frequency and |z̃_i| there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub lambda: f64,
    pub magnitude: f64,
}

impl Spectrum {
    /// Full eigendecomposition of a symmetric matrix (normally L).
    pub fn decompose(l: &DenseMatrix) -> Result<Self> {
        let n = l.rows();
        if l.cols() != n {
            return Err(Error::NotSquare(n, l.cols()));
        }
        if let Some((i, j)) = l.first_asymmetry() {
            return Err(Error::NotSymmetric(i, j));
        }
        let m = DMatrix::from_row_slice(n, n, l.as_slice());
        let eig =
            SymmetricEigen::try_new(m, f64::EPSILON, EIGEN_MAX_ITER).ok_or(Error::EigenFailure)?;

        let mut columns: Vec<(f64, Vec<f64>)> = (0..n)
            .map(|c| {
                let mut v: Vec<f64> = eig.eigenvectors.column(c).iter().copied().collect();
                fix_sign(&mut v);
                (eig.eigenvalues[c], v)
            })
            .collect();
        if columns
            .iter()
            .any(|(l, v)| !l.is_finite() || v.iter().any(|x| !x.is_finite()))
        {
            return Err(Error::EigenFailure);
        }
        columns.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| lex_cmp(&a.1, &b.1)));

        // Within a cluster of (numerically) equal eigenvalues order the
        // columns lexicographically; eigenvalues stay ascending.
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && columns[end].0 - columns[end - 1].0 <= DEGENERACY_EPS {
                end += 1;
            }
            if end - start > 1 {
                let mut values: Vec<f64> = columns[start..end].iter().map(|c| c.0).collect();
                values.sort_by(f64::total_cmp);
                columns[start..end].sort_by(|a, b| lex_cmp(&a.1, &b.1));
                for (c, v) in columns[start..end].iter_mut().zip(values) {
                    c.0 = v;
                }
            }
            start = end;
        }

        let eigenvalues = columns.iter().map(|c| c.0).collect();
        let eigenvectors = DenseMatrix::from_fn(n, n, |i, j| columns[j].1[i]);
        Ok(Spectrum {
            eigenvalues,
            eigenvectors,
        })
    }

    /// Spectrum of the normalized Laplacian of `g`.
    pub fn of_graph(g: &Graph) -> Result<Self> {
        Self::decompose(&g.normalized_laplacian()?)
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// V, with column `i` paired with `eigenvalues()[i]`.
    pub fn eigenvectors(&self) -> &DenseMatrix {
        &self.eigenvectors
    }

    /// V diag(λ) Vᵀ.
    pub fn reconstruct(&self) -> DenseMatrix {
        self.operator(&self.eigenvalues)
    }

    /// max |VᵀV − I|.
    pub fn orthonormality_error(&self) -> f64 {
        let v = &self.eigenvectors;
        let gram = v.t_matmul(v).expect("square eigenvector matrix");
        gram.max_abs_diff(&DenseMatrix::identity(self.len()))
            .expect("same shape")
    }

    /// z̃ = Vᵀ z.
    pub fn gft(&self, z: &GraphSignal) -> Result<GraphSignal> {
        check_len(self.len(), z.len())?;
        Ok(GraphSignal(self.eigenvectors.t_matvec(z.as_slice())?))
    }

    /// z = V z̃.
    pub fn igft(&self, z_tilde: &GraphSignal) -> Result<GraphSignal> {
        check_len(self.len(), z_tilde.len())?;
        Ok(GraphSignal(self.eigenvectors.matvec(z_tilde.as_slice())?))
    }

    /// z_out = V diag(h̃) Vᵀ z_in.
    pub fn apply_filter(&self, h: &FilterResponse, z_in: &GraphSignal) -> Result<GraphSignal> {
        check_len(self.len(), h.len())?;
        let mut coeffs = self.gft(z_in)?.0;
        for (c, g) in coeffs.iter_mut().zip(h.gains()) {
            *c *= g;
        }
        self.igft(&GraphSignal(coeffs))
    }

    /// Applies the filter to every column of `x` (N×F): V diag(h̃) Vᵀ X.
    pub fn apply_filter_columns(&self, h: &FilterResponse, x: &DenseMatrix) -> Result<DenseMatrix> {
        check_len(self.len(), h.len())?;
        check_len(self.len(), x.rows())?;
        let mut coeffs = self.eigenvectors.t_matmul(x)?;
        let f = coeffs.cols();
        for (i, &g) in h.gains().iter().enumerate() {
            for v in &mut coeffs.as_mut_slice()[i * f..(i + 1) * f] {
                *v *= g;
            }
        }
        self.eigenvectors.matmul(&coeffs)
    }

    /// Dense V diag(d) Vᵀ for per-frequency weights `d`.
    pub fn operator(&self, d: &[f64]) -> DenseMatrix {
        assert_eq!(d.len(), self.len(), "one weight per frequency");
        let v = &self.eigenvectors;
        let n = self.len();
        let mut scaled = v.clone();
        for i in 0..n {
            for (j, &w) in d.iter().enumerate() {
                scaled.set(i, j, v.get(i, j) * w);
            }
        }
        // (V diag(d)) Vᵀ, written out so the result is exactly symmetric.
        let mut out = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let val: f64 = scaled.row(i).iter().zip(v.row(j)).map(|(a, b)| a * b).sum();
                out.set(i, j, val);
                out.set(j, i, val);
            }
        }
        out
    }

    /// Pairs (λ_i, |z̃_i|) in ascending-λ order.
    pub fn profile(&self, z: &GraphSignal) -> Result<Vec<ProfilePoint>> {
        let z_tilde = self.gft(z)?;
        Ok(self
            .eigenvalues
            .iter()
            .zip(z_tilde.as_slice())
            .map(|(&lambda, c)| ProfilePoint {
                lambda,
                magnitude: c.abs(),
            })
            .collect())
    }
}

/// Share of Σ|z̃_i|² carried by the lowest `ceil(fraction · N)` frequencies.
pub fn low_frequency_energy_fraction(profile: &[ProfilePoint], fraction: f64) -> f64 {
    let total: f64 = profile.iter().map(|p| p.magnitude * p.magnitude).sum();
    if total == 0.0 {
        return 0.0;
    }
    let count = ((fraction * profile.len() as f64).ceil() as usize).min(profile.len());
    let low: f64 = profile[..count]
        .iter()
        .map(|p| p.magnitude * p.magnitude)
        .sum();
    low / total
}

/// Writes a profile as CSV with header `lambda,magnitude`.
pub fn write_profile_csv<W: Write>(profile: &[ProfilePoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda", "magnitude"])?;
    for p in profile {
        w.write_record([p.lambda.to_string(), p.magnitude.to_string()])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

fn fix_sign(v: &mut [f64]) {
    if let Some(&first) = v.iter().find(|x| x.abs() > SIGN_EPS) {
        if first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}
