//! Threshold selection: desirability maximization, dFDR control, per-subset
//! optimization with heterogeneous costs and benefits, and the weighted
//! common-threshold optimizer.
//!
//! Candidate thresholds are the distinct observed statistics. Rejecting
//! nothing is an implicit extra candidate above all others with desirability
//! 0; it is reported as `tau = None`. Ties in desirability go to the larger
//! threshold.

use rayon::prelude::*;

use crate::data::DataMatrix;
use crate::error::{DfdrError, Result};
use crate::estimators::{
    choose_lambda_weighted, desirability, dfdr_ratio, estimate_pi0_auto, estimate_pi0_pvalues,
    estimate_pi0_weighted, net_per_benefit, CostBenefit, Pi0Estimate, SortedStatistics,
};
use crate::resampling::{permutation_null_rows, AbsWelchT, PermutationPlan};
use crate::statistics::{abs_t_rows, group_pair, PValueSet, StatisticSet};

/// One evaluated candidate threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub tau: f64,
    pub dfdr: f64,
    pub desirability: f64,
    pub discoveries: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionResult {
    /// Chosen threshold, or `None` when nothing is rejected.
    pub tau: Option<f64>,
    /// Indices of rejected tests, ascending.
    pub rejected: Vec<usize>,
    pub dfdr: f64,
    pub desirability: f64,
    pub pi0: Pi0Estimate,
    /// Every evaluated candidate, sorted by threshold.
    pub curve: Vec<CurvePoint>,
}

impl DecisionResult {
    pub fn discoveries(&self) -> usize {
        self.rejected.len()
    }
}

/// How pi0 is obtained for a decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pi0Choice {
    Estimate,
    One,
    Value(f64),
}

impl Pi0Choice {
    pub fn resolve(&self, stats: &StatisticSet) -> Result<Pi0Estimate> {
        match *self {
            Pi0Choice::Estimate => estimate_pi0_auto(stats),
            Pi0Choice::One => Ok(Pi0Estimate::one()),
            Pi0Choice::Value(v) => Pi0Estimate::user(v),
        }
    }

    pub fn resolve_pvalues(&self, pvals: &PValueSet) -> Result<Pi0Estimate> {
        match *self {
            Pi0Choice::Estimate => Ok(estimate_pi0_pvalues(pvals)),
            Pi0Choice::One => Ok(Pi0Estimate::one()),
            Pi0Choice::Value(v) => Pi0Estimate::user(v),
        }
    }
}

fn curve(sorted: &SortedStatistics, pi0: &Pi0Estimate, cb: &CostBenefit) -> Vec<CurvePoint> {
    sorted
        .candidates()
        .par_iter()
        .map(|&tau| {
            let e = sorted.dfdr(pi0.value, tau);
            CurvePoint {
                tau,
                dfdr: e.value,
                desirability: desirability(cb, e.value, e.discoveries),
                discoveries: e.discoveries,
            }
        })
        .collect()
}

/// Index into an ascending curve maximizing `key`, preferring the larger
/// threshold on ties; `None` if no point beats the empty region (key 0).
fn argmax_by(curve: &[CurvePoint], key: impl Fn(&CurvePoint) -> f64) -> Option<usize> {
    let mut best: Option<usize> = None;
    let mut best_value = 0.0;
    for (k, pt) in curve.iter().enumerate().rev() {
        let v = key(pt);
        if v > best_value {
            best = Some(k);
            best_value = v;
        }
    }
    best
}

/// Argmax of the desirability measured in units of the benefit, so that
/// rescaling `(b, c)` cannot change the choice.
fn argmax_desirability(curve: &[CurvePoint], cb: &CostBenefit) -> Option<usize> {
    argmax_by(curve, |pt| net_per_benefit(cb, pt.dfdr, pt.discoveries))
}

/// Smallest threshold whose dFDR is at most `alpha`.
fn first_controlled(curve: &[CurvePoint], alpha: f64) -> Option<usize> {
    curve.iter().position(|pt| pt.dfdr <= alpha)
}

fn result_from(
    observed: &[f64],
    pick: Option<usize>,
    curve: Vec<CurvePoint>,
    pi0: Pi0Estimate,
) -> DecisionResult {
    match pick {
        Some(k) => {
            let pt = curve[k];
            DecisionResult {
                tau: Some(pt.tau),
                rejected: (0..observed.len()).filter(|&i| observed[i] >= pt.tau).collect(),
                dfdr: pt.dfdr,
                desirability: pt.desirability,
                pi0,
                curve,
            }
        }
        None => DecisionResult {
            tau: None,
            rejected: Vec::new(),
            dfdr: 0.0,
            desirability: 0.0,
            pi0,
            curve,
        },
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(DfdrError::invalid(format!("alpha must be in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// Chooses the threshold among the observed statistics that maximizes the
/// estimated desirability.
pub fn maximize_desirability(
    stats: &StatisticSet,
    pi0: &Pi0Estimate,
    cb: &CostBenefit,
) -> DecisionResult {
    let sorted = SortedStatistics::new(stats);
    let curve = curve(&sorted, pi0, cb);
    let pick = argmax_desirability(&curve, cb);
    result_from(stats.observed(), pick, curve, *pi0)
}

/// Rejects as many tests as possible subject to an estimated dFDR of at most
/// `alpha`. `cb` only fills in the reported desirability values.
pub fn control_dfdr(
    stats: &StatisticSet,
    pi0: &Pi0Estimate,
    alpha: f64,
    cb: &CostBenefit,
) -> Result<DecisionResult> {
    check_alpha(alpha)?;
    let sorted = SortedStatistics::new(stats);
    let curve = curve(&sorted, pi0, cb);
    let pick = first_controlled(&curve, alpha);
    Ok(result_from(stats.observed(), pick, curve, *pi0))
}

/// p-value curve: candidates are the distinct p-values; `tau` holds the
/// p-value threshold and the rejection rule is `P <= tau`. Points are sorted
/// by decreasing threshold so that the "larger tau on ties" convention of the
/// statistic scale maps to "fewer rejections".
fn pvalue_curve(pvals: &PValueSet, pi0: &Pi0Estimate, cb: &CostBenefit) -> Vec<CurvePoint> {
    let mut sorted = pvals.values().to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let mut cands = sorted.clone();
    cands.dedup();
    let m = sorted.len() as f64;
    cands
        .iter()
        .rev()
        .map(|&thr| {
            let discoveries = sorted.partition_point(|p| *p <= thr);
            let dfdr = if discoveries == 0 {
                0.0
            } else {
                pi0.value * thr / (discoveries as f64 / m)
            };
            CurvePoint {
                tau: thr,
                dfdr,
                desirability: desirability(cb, dfdr, discoveries),
                discoveries,
            }
        })
        .collect()
}

fn pvalue_result(
    pvals: &PValueSet,
    pick: Option<usize>,
    mut curve: Vec<CurvePoint>,
    pi0: Pi0Estimate,
) -> DecisionResult {
    let mut res = result_from(&[], pick, curve.clone(), pi0);
    if let Some(thr) = res.tau {
        res.rejected = (0..pvals.len()).filter(|&i| pvals.values()[i] <= thr).collect();
    }
    curve.reverse();
    res.curve = curve;
    res
}

/// [`maximize_desirability`] on p-values with a uniform null.
pub fn maximize_desirability_pvalues(
    pvals: &PValueSet,
    pi0: &Pi0Estimate,
    cb: &CostBenefit,
) -> DecisionResult {
    let curve = pvalue_curve(pvals, pi0, cb);
    let pick = argmax_desirability(&curve, cb);
    pvalue_result(pvals, pick, curve, *pi0)
}

/// [`control_dfdr`] on p-values with a uniform null.
pub fn control_dfdr_pvalues(
    pvals: &PValueSet,
    pi0: &Pi0Estimate,
    alpha: f64,
    cb: &CostBenefit,
) -> Result<DecisionResult> {
    check_alpha(alpha)?;
    let curve = pvalue_curve(pvals, pi0, cb);
    let pick = first_controlled(&curve, alpha);
    Ok(pvalue_result(pvals, pick, curve, *pi0))
}

/// Default minimum number of tests per subset.
pub const DEFAULT_MIN_SUBSET_SIZE: usize = 50;

/// A block of tests sharing one comparison and one cost/benefit pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Subset {
    pub name: String,
    /// Row indices into the data matrix.
    pub features: Vec<usize>,
    pub group_a: String,
    pub group_b: String,
    pub cost_benefit: CostBenefit,
}

/// Disjoint subsets of (feature, comparison) tests.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetPartition {
    subsets: Vec<Subset>,
}

impl SubsetPartition {
    pub fn new(subsets: Vec<Subset>, min_size: usize) -> Result<Self> {
        if subsets.is_empty() {
            return Err(DfdrError::invalid("partition has no subsets"));
        }
        let mut seen = std::collections::HashSet::new();
        for s in &subsets {
            if s.features.len() < min_size.max(1) {
                return Err(DfdrError::SubsetTooSmall {
                    name: s.name.clone(),
                    size: s.features.len(),
                    min: min_size.max(1),
                });
            }
            let pair = if s.group_a <= s.group_b {
                (s.group_a.as_str(), s.group_b.as_str())
            } else {
                (s.group_b.as_str(), s.group_a.as_str())
            };
            for &f in &s.features {
                if !seen.insert((f, pair)) {
                    return Err(DfdrError::Validation(format!(
                        "subset '{}' overlaps another subset at feature {f}",
                        s.name
                    )));
                }
            }
        }
        Ok(Self { subsets })
    }

    pub fn subsets(&self) -> &[Subset] {
        &self.subsets
    }

    /// Total number of tests across subsets.
    pub fn len(&self) -> usize {
        self.subsets.iter().map(|s| s.features.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Observed and permutation-null statistics for one subset. Every subset
/// uses the plan's seed, so subsets with identical data get identical nulls.
pub fn subset_statistics(
    subset: &Subset,
    matrix: &DataMatrix,
    plan: &PermutationPlan,
) -> Result<StatisticSet> {
    let (a, b) = group_pair(matrix, &subset.group_a, &subset.group_b)?;
    if let Some(&f) = subset.features.iter().find(|&&f| f >= matrix.n_features()) {
        return Err(DfdrError::invalid(format!(
            "subset '{}' references feature {f} beyond the matrix",
            subset.name
        )));
    }
    let observed = abs_t_rows(matrix, &subset.features, &a, &b);
    let null = permutation_null_rows(matrix, &subset.features, &a, &b, plan, &AbsWelchT);
    StatisticSet::new(observed, null)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsetDecision {
    pub name: String,
    /// Row indices of the subset's tests; `result.rejected` indexes this.
    pub features: Vec<usize>,
    pub stats: StatisticSet,
    pub result: DecisionResult,
}

impl SubsetDecision {
    pub fn rejected_features(&self) -> Vec<usize> {
        self.result.rejected.iter().map(|&k| self.features[k]).collect()
    }
}

/// Optimizes each subset independently with its own null, pi0 and costs.
pub fn per_subset_optimize(
    partition: &SubsetPartition,
    matrix: &DataMatrix,
    plan: &PermutationPlan,
    pi0: Pi0Choice,
) -> Result<Vec<SubsetDecision>> {
    partition
        .subsets
        .iter()
        .map(|s| {
            let stats = subset_statistics(s, matrix, plan)?;
            let p = pi0.resolve(&stats)?;
            let result = maximize_desirability(&stats, &p, &s.cost_benefit);
            Ok(SubsetDecision {
                name: s.name.clone(),
                features: s.features.clone(),
                stats,
                result,
            })
        })
        .collect()
}

/// All subsets' tests pooled into one statistic set (subset order, then
/// feature order), with per-test weights `b + c` and benefits `b`.
pub struct PooledTests {
    pub stats: StatisticSet,
    pub weights: Vec<f64>,
    pub benefits: Vec<f64>,
}

pub fn pool_subsets(
    partition: &SubsetPartition,
    matrix: &DataMatrix,
    plan: &PermutationPlan,
) -> Result<PooledTests> {
    let per: Vec<StatisticSet> = partition
        .subsets
        .iter()
        .map(|s| subset_statistics(s, matrix, plan))
        .collect::<Result<_>>()?;
    pool_statistic_sets(
        &per,
        &partition
            .subsets
            .iter()
            .map(|s| s.cost_benefit)
            .collect::<Vec<_>>(),
    )
}

/// Concatenates statistic sets that share B, interleaving nulls so the
/// pooled set stays permutation-major.
pub fn pool_statistic_sets(sets: &[StatisticSet], costs: &[CostBenefit]) -> Result<PooledTests> {
    let b = sets[0].resamples();
    if sets.iter().any(|s| s.resamples() != b) {
        return Err(DfdrError::invalid("pooled sets must share the resample count"));
    }
    let mut observed = Vec::new();
    let mut weights = Vec::new();
    let mut benefits = Vec::new();
    for (s, cb) in sets.iter().zip(costs) {
        observed.extend_from_slice(s.observed());
        weights.extend(std::iter::repeat_n(cb.benefit() + cb.cost(), s.m()));
        benefits.extend(std::iter::repeat_n(cb.benefit(), s.m()));
    }
    let mut null = Vec::with_capacity(observed.len() * b);
    for k in 0..b {
        for s in sets {
            null.extend_from_slice(&s.null()[k * s.m()..(k + 1) * s.m()]);
        }
    }
    Ok(PooledTests {
        stats: StatisticSet::new(observed, null)?,
        weights,
        benefits,
    })
}

/// Weighted pi0 with its lambda chosen on the weighted null.
pub fn estimate_pi0_common(stats: &StatisticSet, weights: &[f64]) -> Result<Pi0Estimate> {
    let lambda = choose_lambda_weighted(stats, weights)?;
    estimate_pi0_weighted(stats, weights, lambda)
}

/// One threshold for all tests maximizing the weighted desirability
/// `sum b_i R_i - dfdr_w(tau) * sum w_i R_i`, where `w_i = b_i + c_i` and
/// `dfdr_w` is the weighted dFDR estimate.
pub fn common_threshold_weighted(
    stats: &StatisticSet,
    weights: &[f64],
    benefits: &[f64],
    pi0: &Pi0Estimate,
) -> Result<DecisionResult> {
    let m = stats.m();
    if weights.len() != m || benefits.len() != m {
        return Err(DfdrError::invalid("weights and benefits must have one entry per test"));
    }
    if weights.iter().chain(benefits).any(|w| !(*w >= 0.0 && w.is_finite())) {
        return Err(DfdrError::invalid("weights and benefits must be nonnegative"));
    }
    if weights.iter().all(|w| *w == 0.0) {
        return Err(DfdrError::invalid("all weights are zero"));
    }

    // Ascending statistics with suffix sums of weight and benefit.
    let mut obs: Vec<(f64, f64, f64)> = (0..m)
        .map(|i| (stats.observed()[i], weights[i], benefits[i]))
        .collect();
    obs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let mut obs_w = vec![0.0; m + 1];
    let mut obs_b = vec![0.0; m + 1];
    for k in (0..m).rev() {
        obs_w[k] = obs_w[k + 1] + obs[k].1;
        obs_b[k] = obs_b[k + 1] + obs[k].2;
    }
    let mut null: Vec<(f64, f64)> = stats
        .null()
        .iter()
        .enumerate()
        .map(|(j, &t)| (t, weights[stats.null_source(j)]))
        .collect();
    null.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let mut null_w = vec![0.0; null.len() + 1];
    for k in (0..null.len()).rev() {
        null_w[k] = null_w[k + 1] + null[k].1;
    }

    let mut cands: Vec<f64> = obs.iter().map(|o| o.0).collect();
    cands.dedup();
    let curve: Vec<CurvePoint> = cands
        .iter()
        .map(|&tau| {
            let ko = obs.partition_point(|o| o.0 < tau);
            let kn = null.partition_point(|n| n.0 < tau);
            let dfdr = dfdr_ratio(
                pi0.value,
                null_w[kn],
                stats.null_len() as f64,
                obs_w[ko],
                m as f64,
            );
            CurvePoint {
                tau,
                dfdr,
                desirability: obs_b[ko] - dfdr * obs_w[ko],
                discoveries: m - ko,
            }
        })
        .collect();
    let pick = argmax_by(&curve, |pt| pt.desirability);
    Ok(result_from(stats.observed(), pick, curve, *pi0))
}
