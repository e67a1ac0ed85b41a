//! Accuracy and group-fairness gaps over a node mask.
//!
//! Probabilities are plain empirical frequencies over the masked nodes.
//! Sensitive values are ±1, labels and predictions are 0/1.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Tallies for one sensitive group.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupCounts {
    pub nodes: usize,
    pub predicted_positive: usize,
    pub actual_positive: usize,
    pub true_positive: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub masked: usize,
    pub correct: usize,
    /// Group s = −1.
    pub negative_group: GroupCounts,
    /// Group s = +1.
    pub positive_group: GroupCounts,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub accuracy: f64,
    pub delta_sp: f64,
    pub delta_eo: f64,
    pub counts: Counts,
}

fn check_binary(v: &[u8]) -> Result<()> {
    match v.iter().position(|&x| x > 1) {
        Some(index) => Err(Error::NotBinaryLabel {
            index,
            value: v[index],
        }),
        None => Ok(()),
    }
}

fn check_mask(mask: &[usize], len: usize) -> Result<()> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    match mask.iter().find(|&&i| i >= len) {
        Some(&index) => Err(Error::MaskOutOfRange { index, len }),
        None => Ok(()),
    }
}

fn check_sensitive(s: &[i8]) -> Result<()> {
    match s.iter().position(|&v| v != 1 && v != -1) {
        Some(index) => Err(Error::NotBinarySensitive {
            index,
            value: f64::from(s[index]),
        }),
        None => Ok(()),
    }
}

/// Tallies every count needed by the three metrics in one pass.
pub fn tally(y_hat: &[u8], y: &[u8], s: &[i8], mask: &[usize]) -> Result<Counts> {
    check_len(y.len(), y_hat.len())?;
    check_len(y.len(), s.len())?;
    check_binary(y_hat)?;
    check_binary(y)?;
    check_sensitive(s)?;
    check_mask(mask, y.len())?;
    let mut c = Counts::default();
    for &i in mask {
        c.masked += 1;
        c.correct += usize::from(y_hat[i] == y[i]);
        let g = if s[i] < 0 {
            &mut c.negative_group
        } else {
            &mut c.positive_group
        };
        g.nodes += 1;
        g.predicted_positive += usize::from(y_hat[i] == 1);
        g.actual_positive += usize::from(y[i] == 1);
        g.true_positive += usize::from(y[i] == 1 && y_hat[i] == 1);
    }
    Ok(c)
}

impl Counts {
    pub fn accuracy(&self) -> f64 {
        self.correct as f64 / self.masked as f64
    }

    pub fn statistical_parity(&self) -> Result<f64> {
        let (neg, pos) = (self.negative_group, self.positive_group);
        if neg.nodes == 0 {
            return Err(Error::EmptyGroup(-1));
        }
        if pos.nodes == 0 {
            return Err(Error::EmptyGroup(1));
        }
        let rate = |g: GroupCounts| g.predicted_positive as f64 / g.nodes as f64;
        Ok((rate(neg) - rate(pos)).abs())
    }

    pub fn equal_opportunity(&self) -> Result<f64> {
        let (neg, pos) = (self.negative_group, self.positive_group);
        if neg.actual_positive == 0 {
            return Err(Error::EmptyPositiveGroup(-1));
        }
        if pos.actual_positive == 0 {
            return Err(Error::EmptyPositiveGroup(1));
        }
        let tpr = |g: GroupCounts| g.true_positive as f64 / g.actual_positive as f64;
        Ok((tpr(neg) - tpr(pos)).abs())
    }
}

/// Fraction of masked nodes with `y_hat == y`.
pub fn accuracy(y_hat: &[u8], y: &[u8], mask: &[usize]) -> Result<f64> {
    check_len(y.len(), y_hat.len())?;
    check_binary(y_hat)?;
    check_binary(y)?;
    check_mask(mask, y.len())?;
    let correct = mask.iter().filter(|&&i| y_hat[i] == y[i]).count();
    Ok(correct as f64 / mask.len() as f64)
}

/// Δ_SP = |P(ŷ=1 | s=−1) − P(ŷ=1 | s=1)|.
pub fn statistical_parity(y_hat: &[u8], s: &[i8], mask: &[usize]) -> Result<f64> {
    check_len(s.len(), y_hat.len())?;
    check_binary(y_hat)?;
    check_sensitive(s)?;
    check_mask(mask, s.len())?;
    let mut c = Counts::default();
    for &i in mask {
        let g = if s[i] < 0 {
            &mut c.negative_group
        } else {
            &mut c.positive_group
        };
        g.nodes += 1;
        g.predicted_positive += usize::from(y_hat[i] == 1);
    }
    c.statistical_parity()
}

/// Δ_EO = |P(ŷ=1 | y=1, s=−1) − P(ŷ=1 | y=1, s=1)|.
pub fn equal_opportunity(y_hat: &[u8], y: &[u8], s: &[i8], mask: &[usize]) -> Result<f64> {
    tally(y_hat, y, s, mask)?.equal_opportunity()
}

pub fn evaluate(y_hat: &[u8], y: &[u8], s: &[i8], mask: &[usize]) -> Result<FairnessReport> {
    let counts = tally(y_hat, y, s, mask)?;
    Ok(FairnessReport {
        accuracy: counts.accuracy(),
        delta_sp: counts.statistical_parity()?,
        delta_eo: counts.equal_opportunity()?,
        counts,
    })
}
