//! Column-permutation null distributions.
//!
//! Whole subject columns are relabelled, so the correlation between features
//! is kept intact in every resample.
//!
//! Randomness: permutation `k` of a plan with seed `s` is drawn from a ChaCha8
//! generator seeded with `s` (via `seed_from_u64`) on stream `k`, using a
//! Fisher-Yates shuffle whose index draws are `u64` ranges. The sequence is
//! therefore identical on every platform and independent of evaluation order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::DataMatrix;
use crate::error::{DfdrError, Result};
use crate::statistics::{group_pair, welch_abs_t};

/// B random label permutations drawn from a seeded generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PermutationPlan {
    permutations: usize,
    seed: u64,
}

impl PermutationPlan {
    pub fn new(permutations: usize, seed: u64) -> Result<Self> {
        if permutations == 0 {
            return Err(DfdrError::invalid("permutation count must be at least 1"));
        }
        Ok(Self { permutations, seed })
    }

    pub fn permutations(&self) -> usize {
        self.permutations
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The `k`-th permutation of `0..n`.
    pub fn permutation(&self, k: usize, n: usize) -> Vec<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(k as u64);
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i as u64) as usize;
            perm.swap(i, j);
        }
        perm
    }

    /// A plan with the same B and a seed derived from this one and `key`.
    pub fn derive(&self, key: u64) -> Self {
        Self {
            permutations: self.permutations,
            seed: splitmix64(self.seed ^ splitmix64(key.wrapping_add(0x5851_f42d_4c95_7f2d))),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-feature statistic computed from a data row and two column index sets.
pub trait TwoSampleStatistic: Sync {
    fn compute(&self, row: &[f64], group_a: &[usize], group_b: &[usize]) -> f64;
}

impl<F> TwoSampleStatistic for F
where
    F: Fn(&[f64], &[usize], &[usize]) -> f64 + Sync,
{
    fn compute(&self, row: &[f64], group_a: &[usize], group_b: &[usize]) -> f64 {
        self(row, group_a, group_b)
    }
}

/// The absolute Welch t-statistic.
pub struct AbsWelchT;

impl TwoSampleStatistic for AbsWelchT {
    fn compute(&self, row: &[f64], group_a: &[usize], group_b: &[usize]) -> f64 {
        welch_abs_t(row, group_a, group_b)
    }
}

/// Null statistics for every feature under `plan.permutations()` random
/// relabellings of the subjects in `group_a` and `group_b`. Returns m*B
/// values ordered by permutation, then feature.
pub fn permutation_null(
    matrix: &DataMatrix,
    group_a: &str,
    group_b: &str,
    plan: &PermutationPlan,
    stat: &dyn TwoSampleStatistic,
) -> Result<Vec<f64>> {
    let (a, b) = group_pair(matrix, group_a, group_b)?;
    let features: Vec<usize> = (0..matrix.n_features()).collect();
    Ok(permutation_null_rows(matrix, &features, &a, &b, plan, stat))
}

/// [`permutation_null`] restricted to `features`, with explicit column sets.
pub fn permutation_null_rows(
    matrix: &DataMatrix,
    features: &[usize],
    group_a: &[usize],
    group_b: &[usize],
    plan: &PermutationPlan,
    stat: &dyn TwoSampleStatistic,
) -> Vec<f64> {
    let pool_len = group_a.len() + group_b.len();
    let perms: Vec<Vec<usize>> = (0..plan.permutations)
        .map(|k| plan.permutation(k, pool_len))
        .collect();
    null_from_permutations(matrix, features, group_a, group_b, &perms, stat)
}

/// Null statistics for caller-supplied permutations of the pooled columns.
///
/// The pool is `group_a` followed by `group_b`; under permutation `p`, pool
/// position `p[k]` is assigned to group A for `k < group_a.len()` and to
/// group B otherwise. The identity permutation reproduces the observed
/// statistics.
pub fn null_from_permutations(
    matrix: &DataMatrix,
    features: &[usize],
    group_a: &[usize],
    group_b: &[usize],
    perms: &[Vec<usize>],
    stat: &dyn TwoSampleStatistic,
) -> Vec<f64> {
    let pool: Vec<usize> = group_a.iter().chain(group_b).copied().collect();
    let na = group_a.len();
    let blocks: Vec<Vec<f64>> = perms
        .par_iter()
        .map(|perm| {
            assert_eq!(perm.len(), pool.len(), "permutation length mismatch");
            let cols: Vec<usize> = perm.iter().map(|&k| pool[k]).collect();
            let (pa, pb) = cols.split_at(na);
            features
                .iter()
                .map(|&i| stat.compute(matrix.row(i), pa, pb))
                .collect()
        })
        .collect();
    blocks.concat()
}
