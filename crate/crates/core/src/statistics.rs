//! Observed test statistics and p-value inputs.

use rayon::prelude::*;

use crate::data::DataMatrix;
use crate::error::{DfdrError, Result};

/// Observed statistics for m tests plus m*B null statistics from resampling.
///
/// Nulls are stored permutation-major: `null[b * m + i]` is test `i` under
/// resample `b`, so the test that generated a null value is `index % m`.
#[derive(Debug, Clone, PartialEq)]
pub struct StatisticSet {
    observed: Vec<f64>,
    null: Vec<f64>,
    resamples: usize,
}

impl StatisticSet {
    pub fn new(observed: Vec<f64>, null: Vec<f64>) -> Result<Self> {
        let m = observed.len();
        if m == 0 {
            return Err(DfdrError::invalid("no observed statistics"));
        }
        if null.is_empty() || !null.len().is_multiple_of(m) {
            return Err(DfdrError::invalid(format!(
                "null statistic count {} is not a positive multiple of m = {m}",
                null.len()
            )));
        }
        if let Some(bad) = observed.iter().chain(&null).find(|t| !is_valid_stat(**t)) {
            return Err(DfdrError::invalid(format!("invalid statistic {bad}")));
        }
        let resamples = null.len() / m;
        Ok(Self {
            observed,
            null,
            resamples,
        })
    }

    pub fn observed(&self) -> &[f64] {
        &self.observed
    }

    pub fn null(&self) -> &[f64] {
        &self.null
    }

    /// Number of tests, m.
    pub fn m(&self) -> usize {
        self.observed.len()
    }

    /// Number of resamples, B.
    pub fn resamples(&self) -> usize {
        self.resamples
    }

    /// Total null statistic count, M = m * B.
    pub fn null_len(&self) -> usize {
        self.null.len()
    }

    /// Index of the test that generated null statistic `j`.
    pub fn null_source(&self, j: usize) -> usize {
        j % self.m()
    }
}

/// Statistics are finite or `+inf`; NaN and `-inf` never occur.
fn is_valid_stat(t: f64) -> bool {
    !t.is_nan() && t != f64::NEG_INFINITY
}

/// p-values for m tests, each in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct PValueSet(Vec<f64>);

impl PValueSet {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn validate_pvalues(raw: Vec<f64>) -> Result<PValueSet> {
    if let Some((index, &value)) = raw
        .iter()
        .enumerate()
        .find(|(_, p)| !(0.0..=1.0).contains(*p))
    {
        return Err(DfdrError::PValueOutOfRange { index, value });
    }
    Ok(PValueSet(raw))
}

/// Absolute Welch two-sample t-statistic for one feature.
///
/// Uses (n - 1) sample variances. A zero standard error yields 0 when the
/// means agree and `+inf` otherwise.
pub fn welch_abs_t(row: &[f64], group_a: &[usize], group_b: &[usize]) -> f64 {
    let (mean_a, var_a) = mean_var(row, group_a);
    let (mean_b, var_b) = mean_var(row, group_b);
    let diff = (mean_a - mean_b).abs();
    let se2 = var_a / group_a.len() as f64 + var_b / group_b.len() as f64;
    if se2 > 0.0 {
        diff / se2.sqrt()
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

fn mean_var(row: &[f64], idx: &[usize]) -> (f64, f64) {
    let k = idx.len() as f64;
    let mean = idx.iter().map(|&j| row[j]).sum::<f64>() / k;
    let ss: f64 = idx.iter().map(|&j| (row[j] - mean).powi(2)).sum();
    (mean, ss / (k - 1.0))
}

/// Resolves a pair of group tags to column index lists, checking both have
/// at least two members.
pub fn group_pair(
    matrix: &DataMatrix,
    group_a: &str,
    group_b: &str,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if group_a == group_b {
        return Err(DfdrError::invalid(format!(
            "groups must differ (both are '{group_a}')"
        )));
    }
    let a = matrix.group_indices(group_a)?;
    let b = matrix.group_indices(group_b)?;
    for (g, idx) in [(group_a, &a), (group_b, &b)] {
        if idx.len() < 2 {
            return Err(DfdrError::GroupTooSmall {
                group: g.to_string(),
                size: idx.len(),
            });
        }
    }
    Ok((a, b))
}

/// `|t|` for every feature, comparing `group_a` against `group_b`.
pub fn two_sample_abs_t(matrix: &DataMatrix, group_a: &str, group_b: &str) -> Result<Vec<f64>> {
    let (a, b) = group_pair(matrix, group_a, group_b)?;
    let features: Vec<usize> = (0..matrix.n_features()).collect();
    Ok(abs_t_rows(matrix, &features, &a, &b))
}

/// `|t|` for the listed features given explicit column index sets.
pub fn abs_t_rows(
    matrix: &DataMatrix,
    features: &[usize],
    group_a: &[usize],
    group_b: &[usize],
) -> Vec<f64> {
    features
        .par_iter()
        .map(|&i| welch_abs_t(matrix.row(i), group_a, group_b))
        .collect()
}
