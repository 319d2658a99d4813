//! Estimators of the null proportion, the decisive false discovery rate and
//! the expected net desirability of a rejection region `[tau, inf)`.
//!
//! All threshold comparisons are inclusive: a statistic is rejected when
//! `T >= tau`, a p-value when `P <= threshold`. A `+inf` statistic is
//! rejected by every threshold.

use crate::error::{DfdrError, Result};
use crate::statistics::{PValueSet, StatisticSet};

/// Target fraction of null statistics below lambda: the standard normal mass
/// of (-1/2, 1/2), truncated to six places.
pub const LAMBDA_TARGET: f64 = 0.382925;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pi0Mode {
    Estimated,
    FixedOne,
    UserSupplied,
}

impl Pi0Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Pi0Mode::Estimated => "estimated",
            Pi0Mode::FixedOne => "fixed-one",
            Pi0Mode::UserSupplied => "user-supplied",
        }
    }
}

/// An estimate of the proportion of true null hypotheses, clamped to [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pi0Estimate {
    pub value: f64,
    /// Tuning threshold used by the estimate; `None` unless estimated.
    pub lambda: Option<f64>,
    pub mode: Pi0Mode,
}

impl Pi0Estimate {
    /// The conservative choice pi0 = 1.
    pub fn one() -> Self {
        Self {
            value: 1.0,
            lambda: None,
            mode: Pi0Mode::FixedOne,
        }
    }

    pub fn user(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(DfdrError::invalid(format!("pi0 = {value} is outside [0, 1]")));
        }
        Ok(Self {
            value,
            lambda: None,
            mode: Pi0Mode::UserSupplied,
        })
    }

    fn estimated(raw: f64, lambda: f64) -> Self {
        Self {
            value: raw.clamp(0.0, 1.0),
            lambda: Some(lambda),
            mode: Pi0Mode::Estimated,
        }
    }
}

/// Equal benefit per true discovery and cost per false discovery for every
/// test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBenefit {
    benefit: f64,
    cost: f64,
    ratio: f64,
}

impl CostBenefit {
    pub fn new(benefit: f64, cost: f64) -> Result<Self> {
        if !(benefit > 0.0 && benefit.is_finite()) {
            return Err(DfdrError::invalid(format!("benefit must be positive, got {benefit}")));
        }
        if !(cost >= 0.0 && cost.is_finite()) {
            return Err(DfdrError::invalid(format!("cost must be nonnegative, got {cost}")));
        }
        Ok(Self {
            benefit,
            cost,
            ratio: cost / benefit,
        })
    }

    /// Unit benefit with cost `ratio`.
    pub fn from_ratio(ratio: f64) -> Result<Self> {
        Self::new(1.0, ratio)
    }

    /// Unit benefit with the cost that bounds the false-rejection
    /// probability at `p`.
    pub fn from_p_threshold(p: f64) -> Result<Self> {
        Self::from_ratio(p_to_cost_ratio(p)?)
    }

    pub fn benefit(&self) -> f64 {
        self.benefit
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    /// c / b.
    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    /// Probability threshold `1 / (1 + c/b)`.
    pub fn p(&self) -> f64 {
        1.0 / (1.0 + self.ratio())
    }

    /// Both benefit and cost multiplied by `k`; the ratio is kept exactly.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        let s = Self::new(self.benefit * k, self.cost * k)?;
        Ok(Self { ratio: self.ratio, ..s })
    }
}

/// Converts a probability threshold to the cost-to-benefit ratio `1/p - 1`.
pub fn p_to_cost_ratio(p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(DfdrError::invalid(format!("p-threshold must be in (0, 1], got {p}")));
    }
    Ok(1.0 / p - 1.0)
}

/// dFDR estimate at one threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DfdrEstimate {
    pub tau: f64,
    pub value: f64,
    /// Number of observed statistics in the rejection region.
    pub discoveries: usize,
    /// Number of null statistics in the rejection region.
    pub null_exceedances: usize,
}

/// Picks lambda among the null values and `+inf` so that the fraction of null
/// statistics strictly below it is closest to [`LAMBDA_TARGET`]. Ties go to
/// the smaller lambda.
pub fn choose_lambda(null_stats: &[f64]) -> f64 {
    let mut sorted = null_stats.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let total = sorted.len() as f64;
    let mut best = (f64::INFINITY, f64::INFINITY);
    let mut k = 0;
    while k < sorted.len() {
        let v = sorted[k];
        let dist = (k as f64 / total - LAMBDA_TARGET).abs();
        if dist < best.1 {
            best = (v, dist);
        }
        while k < sorted.len() && sorted[k] == v {
            k += 1;
        }
    }
    let finite = sorted.iter().filter(|t| **t < f64::INFINITY).count();
    let dist = (finite as f64 / total - LAMBDA_TARGET).abs();
    if dist < best.1 {
        best = (f64::INFINITY, dist);
    }
    best.0
}

/// `(#{T_i < lambda} / m) / (#{T0_j < lambda} / M)`, clamped to [0, 1].
pub fn estimate_pi0(observed: &[f64], null_stats: &[f64], lambda: f64) -> Result<Pi0Estimate> {
    let obs_below = observed.iter().filter(|t| **t < lambda).count();
    let null_below = null_stats.iter().filter(|t| **t < lambda).count();
    if null_below == 0 {
        return Err(DfdrError::UndefinedPi0 { lambda });
    }
    let raw = (obs_below as f64 / observed.len() as f64)
        / (null_below as f64 / null_stats.len() as f64);
    Ok(Pi0Estimate::estimated(raw, lambda))
}

/// Chooses lambda by [`choose_lambda`] and estimates pi0 with it.
pub fn estimate_pi0_auto(stats: &StatisticSet) -> Result<Pi0Estimate> {
    let lambda = choose_lambda(stats.null());
    estimate_pi0(stats.observed(), stats.null(), lambda)
}

/// pi0 from p-values, using the uniform null distribution in place of
/// resampled nulls: the counterpart of lambda is the p-value cut `x` with
/// `1 - x` equal to [`LAMBDA_TARGET`], and the estimate is
/// `(#{P_i > x} / m) / (1 - x)`.
pub fn estimate_pi0_pvalues(pvals: &PValueSet) -> Pi0Estimate {
    let cut = 1.0 - LAMBDA_TARGET;
    let above = pvals.values().iter().filter(|p| **p > cut).count();
    let raw = (above as f64 / pvals.len() as f64) / LAMBDA_TARGET;
    Pi0Estimate::estimated(raw, cut)
}

/// Shared dFDR ratio; zero when nothing is rejected.
pub(crate) fn dfdr_ratio(pi0: f64, null_ge: f64, null_total: f64, obs_ge: f64, m: f64) -> f64 {
    if obs_ge == 0.0 {
        0.0
    } else {
        pi0 * (null_ge / null_total) / (obs_ge / m)
    }
}

/// Permutation-null dFDR estimate for the region `[tau, inf)`.
pub fn estimate_dfdr_at_tau(stats: &StatisticSet, pi0: &Pi0Estimate, tau: f64) -> DfdrEstimate {
    let discoveries = stats.observed().iter().filter(|t| **t >= tau).count();
    let null_exceedances = stats.null().iter().filter(|t| **t >= tau).count();
    DfdrEstimate {
        tau,
        value: dfdr_ratio(
            pi0.value,
            null_exceedances as f64,
            stats.null_len() as f64,
            discoveries as f64,
            stats.m() as f64,
        ),
        discoveries,
        null_exceedances,
    }
}

/// dFDR estimate for rejecting p-values `<= threshold`, using the uniform
/// null. `null_exceedances` is left at zero since no null sample exists.
pub fn estimate_dfdr_at_pvalue(
    pvals: &PValueSet,
    pi0: &Pi0Estimate,
    threshold: f64,
) -> Result<DfdrEstimate> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(DfdrError::invalid(format!(
            "p-value threshold {threshold} is outside [0, 1]"
        )));
    }
    let discoveries = pvals.values().iter().filter(|p| **p <= threshold).count();
    let value = if discoveries == 0 {
        0.0
    } else {
        pi0.value * threshold / (discoveries as f64 / pvals.len() as f64)
    };
    Ok(DfdrEstimate {
        tau: threshold,
        value,
        discoveries,
        null_exceedances: 0,
    })
}

/// `b (1 - (1 + c/b) dfdr) R`.
pub(crate) fn desirability(cb: &CostBenefit, dfdr: f64, discoveries: usize) -> f64 {
    cb.benefit * net_per_benefit(cb, dfdr, discoveries)
}

/// Desirability in units of the benefit, `(1 - (1 + c/b) dfdr) R`.
pub(crate) fn net_per_benefit(cb: &CostBenefit, dfdr: f64, discoveries: usize) -> f64 {
    (1.0 - (1.0 + cb.ratio) * dfdr) * discoveries as f64
}

/// Estimated expected net desirability of rejecting `[tau, inf)`.
pub fn estimate_desirability(
    stats: &StatisticSet,
    pi0: &Pi0Estimate,
    cb: &CostBenefit,
    tau: f64,
) -> f64 {
    let est = estimate_dfdr_at_tau(stats, pi0, tau);
    desirability(cb, est.value, est.discoveries)
}

fn check_weights(weights: &[f64], m: usize) -> Result<()> {
    if weights.len() != m {
        return Err(DfdrError::invalid(format!(
            "expected {m} weights, got {}",
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
        return Err(DfdrError::invalid(format!("weights must be nonnegative, got {w}")));
    }
    if weights.iter().all(|w| *w == 0.0) {
        return Err(DfdrError::invalid("all weights are zero"));
    }
    Ok(())
}

/// Weighted dFDR estimate: indicator counts are replaced by weight sums, and
/// each null statistic carries the weight of the test that generated it.
pub fn estimate_weighted_dfdr(
    stats: &StatisticSet,
    pi0: &Pi0Estimate,
    weights: &[f64],
    tau: f64,
) -> Result<f64> {
    check_weights(weights, stats.m())?;
    let obs_w: f64 = stats
        .observed()
        .iter()
        .zip(weights)
        .filter(|(t, _)| **t >= tau)
        .map(|(_, w)| w)
        .sum();
    let null_w: f64 = stats
        .null()
        .iter()
        .enumerate()
        .filter(|(_, t)| **t >= tau)
        .map(|(j, _)| weights[stats.null_source(j)])
        .sum();
    Ok(dfdr_ratio(
        pi0.value,
        null_w,
        stats.null_len() as f64,
        obs_w,
        stats.m() as f64,
    ))
}

/// Weighted counterpart of [`choose_lambda`]: the null fraction below lambda
/// is measured in inherited weight.
pub fn choose_lambda_weighted(stats: &StatisticSet, weights: &[f64]) -> Result<f64> {
    check_weights(weights, stats.m())?;
    let mut pairs: Vec<(f64, f64)> = stats
        .null()
        .iter()
        .enumerate()
        .map(|(j, &t)| (t, weights[stats.null_source(j)]))
        .collect();
    pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let mut best = (f64::INFINITY, f64::INFINITY);
    let mut below = 0.0;
    let mut k = 0;
    while k < pairs.len() {
        let v = pairs[k].0;
        let mut group = 0.0;
        while k < pairs.len() && pairs[k].0 == v {
            group += pairs[k].1;
            k += 1;
        }
        // zero-weight nulls do not move the weighted proportion
        if group > 0.0 {
            let dist = (below / total - LAMBDA_TARGET).abs();
            if dist < best.1 {
                best = (v, dist);
            }
        }
        if v < f64::INFINITY {
            below += group;
        }
    }
    let dist = (below / total - LAMBDA_TARGET).abs();
    if dist < best.1 {
        best = (f64::INFINITY, dist);
    }
    Ok(best.0)
}

/// Weighted pi0: `(sum w_i I(T_i < lambda) / m) / (sum w_j I(T0_j < lambda) / M)`.
pub fn estimate_pi0_weighted(
    stats: &StatisticSet,
    weights: &[f64],
    lambda: f64,
) -> Result<Pi0Estimate> {
    check_weights(weights, stats.m())?;
    let obs_w: f64 = stats
        .observed()
        .iter()
        .zip(weights)
        .filter(|(t, _)| **t < lambda)
        .map(|(_, w)| w)
        .sum();
    let null_w: f64 = stats
        .null()
        .iter()
        .enumerate()
        .filter(|(_, t)| **t < lambda)
        .map(|(j, _)| weights[stats.null_source(j)])
        .sum();
    if null_w == 0.0 {
        return Err(DfdrError::UndefinedPi0 { lambda });
    }
    let raw = (obs_w / stats.m() as f64) / (null_w / stats.null_len() as f64);
    Ok(Pi0Estimate::estimated(raw, lambda))
}

/// Sorted copies of the observed and null statistics for fast repeated
/// threshold evaluation.
#[derive(Debug, Clone)]
pub struct SortedStatistics {
    observed: Vec<f64>,
    null: Vec<f64>,
}

impl SortedStatistics {
    pub fn new(stats: &StatisticSet) -> Self {
        let mut observed = stats.observed().to_vec();
        let mut null = stats.null().to_vec();
        observed.sort_unstable_by(f64::total_cmp);
        null.sort_unstable_by(f64::total_cmp);
        Self { observed, null }
    }

    fn count_ge(sorted: &[f64], tau: f64) -> usize {
        sorted.len() - sorted.partition_point(|t| *t < tau)
    }

    /// Distinct observed statistics, ascending.
    pub fn candidates(&self) -> Vec<f64> {
        let mut c = self.observed.clone();
        c.dedup();
        c
    }

    pub fn dfdr(&self, pi0: f64, tau: f64) -> DfdrEstimate {
        let discoveries = Self::count_ge(&self.observed, tau);
        let null_exceedances = Self::count_ge(&self.null, tau);
        DfdrEstimate {
            tau,
            value: dfdr_ratio(
                pi0,
                null_exceedances as f64,
                self.null.len() as f64,
                discoveries as f64,
                self.observed.len() as f64,
            ),
            discoveries,
            null_exceedances,
        }
    }
}

/// Closed-form dFDR of a weighted mixture of component distributions.
///
/// Both functions take each component's null and marginal CDF evaluated at
/// the threshold. They are two algebraic routes to the same quantity and
/// exist so each can check the other.
pub mod analytic {
    /// dFDR of the mixture `F = sum w_j F_j / sum w_j`:
    /// `pi0 (1 - F0(tau)) / (1 - F(tau))`, zero if `F(tau) = 1`.
    pub fn mixture_dfdr(pi0: f64, weights: &[f64], null_cdf: &[f64], cdf: &[f64]) -> f64 {
        let total: f64 = weights.iter().sum();
        let f0: f64 = weights.iter().zip(null_cdf).map(|(w, f)| w * f).sum::<f64>() / total;
        let f: f64 = weights.iter().zip(cdf).map(|(w, f)| w * f).sum::<f64>() / total;
        if f >= 1.0 {
            0.0
        } else {
            pi0 * (1.0 - f0) / (1.0 - f)
        }
    }

    /// Weighted dFDR of the components:
    /// `pi0 sum w_j (1 - F0_j(tau)) / sum w_j (1 - F_j(tau))`.
    pub fn weighted_component_dfdr(pi0: f64, weights: &[f64], null_cdf: &[f64], cdf: &[f64]) -> f64 {
        let num: f64 = weights.iter().zip(null_cdf).map(|(w, f)| w * (1.0 - f)).sum();
        let den: f64 = weights.iter().zip(cdf).map(|(w, f)| w * (1.0 - f)).sum();
        if den <= 0.0 {
            0.0
        } else {
            pi0 * num / den
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statistics::validate_pvalues;
    use proptest::prelude::*;

    fn toy() -> StatisticSet {
        StatisticSet::new(vec![3.0, 2.0, 1.0, 0.5], vec![0.5, 0.4, 0.3, 0.2]).unwrap()
    }

    /// Exhaustive scan over candidates, as a check on `choose_lambda`.
    fn lambda_oracle(null: &[f64]) -> f64 {
        let mut cands: Vec<f64> = null.to_vec();
        cands.push(f64::INFINITY);
        cands.sort_by(f64::total_cmp);
        cands.dedup();
        let dist = |l: f64| {
            (null.iter().filter(|t| **t < l).count() as f64 / null.len() as f64 - LAMBDA_TARGET).abs()
        };
        let mut best = cands[0];
        for &c in &cands[1..] {
            if dist(c) < dist(best) {
                best = c;
            }
        }
        best
    }

    #[test]
    fn lambda_examples() {
        let null: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
        assert_eq!(choose_lambda(&null), 0.5);
        assert_eq!(choose_lambda(&[1.0]), 1.0);
        assert_eq!(LAMBDA_TARGET, 0.382925);
    }

    #[test]
    fn lambda_target_matches_normal_mass() {
        use statrs::distribution::{ContinuousCDF, Normal};
        let n = Normal::new(0.0, 1.0).unwrap();
        assert!((n.cdf(0.5) - n.cdf(-0.5) - LAMBDA_TARGET).abs() < 1e-6);
    }

    #[test]
    fn pi0_examples() {
        let est = estimate_pi0(&[0.1, 0.2, 3.0, 4.0], &[0.1, 0.2, 0.3, 0.4], 0.5).unwrap();
        assert_eq!(est.value, 0.5);
        assert_eq!(est.lambda, Some(0.5));
        let same = [0.3, 1.2, 0.7, 2.2, 0.1];
        let est = estimate_pi0(&same, &same, choose_lambda(&same)).unwrap();
        assert_eq!(est.value, 1.0);
    }

    #[test]
    fn pi0_is_clamped_and_can_be_undefined() {
        let est = estimate_pi0(&[0.1, 0.1], &[0.1, 5.0], 1.0).unwrap();
        assert_eq!(est.value, 1.0);
        assert!(matches!(
            estimate_pi0(&[0.1], &[2.0, 3.0], 1.0),
            Err(DfdrError::UndefinedPi0 { .. })
        ));
        assert!(Pi0Estimate::user(1.2).is_err());
    }

    #[test]
    fn dfdr_at_tau_examples() {
        let s = toy();
        let one = Pi0Estimate::one();
        let e = estimate_dfdr_at_tau(&s, &one, 0.4);
        assert_eq!((e.value, e.discoveries, e.null_exceedances), (0.5, 4, 2));
        assert_eq!(estimate_dfdr_at_tau(&s, &one, 1.0).value, 0.0);
        let above = estimate_dfdr_at_tau(&s, &one, 3.5);
        assert_eq!((above.value, above.discoveries), (0.0, 0));
    }

    #[test]
    fn dfdr_at_pvalue_examples() {
        let p = validate_pvalues(vec![0.01, 0.04, 0.2, 0.9]).unwrap();
        let one = Pi0Estimate::one();
        let e = estimate_dfdr_at_pvalue(&p, &one, 0.05).unwrap();
        assert!((e.value - 0.1).abs() < 1e-15);
        assert_eq!(e.discoveries, 2);
        assert_eq!(estimate_dfdr_at_pvalue(&p, &one, 0.001).unwrap().value, 0.0);
        let z = validate_pvalues(vec![0.0, 0.3]).unwrap();
        assert_eq!(estimate_dfdr_at_pvalue(&z, &one, 0.0).unwrap().value, 0.0);
        assert!(estimate_dfdr_at_pvalue(&p, &one, 1.5).is_err());
    }

    #[test]
    fn pvalue_pi0_uses_uniform_tail() {
        let p = validate_pvalues(vec![0.7, 0.9, 0.01, 0.02]).unwrap();
        let est = estimate_pi0_pvalues(&p);
        assert!((est.value - (0.5 / LAMBDA_TARGET).min(1.0)).abs() < 1e-15);
        let p = validate_pvalues(vec![0.7, 0.01, 0.02, 0.03, 0.04]).unwrap();
        assert!((estimate_pi0_pvalues(&p).value - 0.2 / LAMBDA_TARGET).abs() < 1e-15);
    }

    #[test]
    fn desirability_examples() {
        let cb = CostBenefit::new(1.0, 19.0).unwrap();
        assert_eq!(desirability(&cb, 0.0, 3), 3.0);
        assert!(desirability(&cb, 0.05, 17).abs() < 1e-12);
        let s = toy();
        assert_eq!(estimate_desirability(&s, &Pi0Estimate::one(), &cb, 1.0), 3.0);
        assert_eq!(estimate_desirability(&s, &Pi0Estimate::one(), &cb, 10.0), 0.0);
        assert!(CostBenefit::new(0.0, 1.0).is_err());
        assert!(CostBenefit::new(1.0, -1.0).is_err());
    }

    #[test]
    fn p_threshold_conversion() {
        assert!((p_to_cost_ratio(0.05).unwrap() - 19.0).abs() < 1e-12);
        assert_eq!(p_to_cost_ratio(0.5).unwrap(), 1.0);
        assert_eq!(p_to_cost_ratio(1.0).unwrap(), 0.0);
        assert!(p_to_cost_ratio(0.0).is_err());
        assert!(p_to_cost_ratio(1.01).is_err());
        let cb = CostBenefit::from_p_threshold(0.05).unwrap();
        assert!((cb.p() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn weighted_dfdr_examples() {
        let s = toy();
        let one = Pi0Estimate::one();
        // m = 4, B = 1: null j comes from test j. At tau = 0.4 the rejected
        // observed tests are all four (weight 5) and the exceeding nulls are
        // from tests 0 and 1 (weights 2 and 1).
        let w = estimate_weighted_dfdr(&s, &one, &[2.0, 1.0, 1.0, 1.0], 0.4).unwrap();
        assert!((w - (3.0 / 4.0) / (5.0 / 4.0)).abs() < 1e-15);
        let u = estimate_weighted_dfdr(&s, &one, &[3.0; 4], 0.4).unwrap();
        assert!((u - estimate_dfdr_at_tau(&s, &one, 0.4).value).abs() < 1e-15);
        // nothing rejected carries weight
        let z = estimate_weighted_dfdr(&s, &one, &[0.0, 0.0, 0.0, 1.0], 0.9).unwrap();
        assert_eq!(z, 0.0);
        assert!(estimate_weighted_dfdr(&s, &one, &[1.0, -1.0, 1.0, 1.0], 0.4).is_err());
        assert!(estimate_weighted_dfdr(&s, &one, &[0.0; 4], 0.4).is_err());
    }

    #[test]
    fn weighted_pi0_matches_unweighted_for_constant_weights() {
        let s = StatisticSet::new(
            vec![0.1, 0.2, 3.0, 4.0, 0.05, 0.7],
            vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 0.9, 1.1, 0.05, 0.15, 0.25],
        )
        .unwrap();
        let lw = choose_lambda_weighted(&s, &[7.0; 6]).unwrap();
        assert_eq!(lw, choose_lambda(s.null()));
        let a = estimate_pi0_weighted(&s, &[7.0; 6], lw).unwrap();
        let b = estimate_pi0(s.observed(), s.null(), lw).unwrap();
        assert!((a.value - b.value).abs() < 1e-15);
    }

    #[test]
    fn infinite_statistics_always_rejected() {
        let s = StatisticSet::new(vec![f64::INFINITY, 1.0], vec![0.5, f64::INFINITY]).unwrap();
        let e = estimate_dfdr_at_tau(&s, &Pi0Estimate::one(), 1e300);
        assert_eq!((e.discoveries, e.null_exceedances), (1, 1));
        assert_eq!(choose_lambda(&[0.5, f64::INFINITY]), f64::INFINITY);
        assert_eq!(choose_lambda(&[0.5, 0.6, f64::INFINITY]), 0.6);
    }

    #[test]
    fn mixture_routes_agree() {
        let w = [1.0, 3.0];
        let f0 = [0.8, 0.9];
        let f = [0.5, 0.7];
        let a = analytic::mixture_dfdr(0.6, &w, &f0, &f);
        let b = analytic::weighted_component_dfdr(0.6, &w, &f0, &f);
        assert!((a - b).abs() < 1e-12);
        assert!((a - 0.6 * (0.2 + 0.3) / (0.5 + 0.9)).abs() < 1e-12);
    }

    fn stat_set() -> impl Strategy<Value = StatisticSet> {
        (1usize..20, 1usize..5).prop_flat_map(|(m, b)| {
            (
                prop::collection::vec(0.0f64..5.0, m),
                prop::collection::vec(0.0f64..5.0, m * b),
            )
                .prop_map(|(o, n)| StatisticSet::new(o, n).unwrap())
        })
    }

    proptest! {
        #[test]
        fn lambda_matches_exhaustive_scan(null in prop::collection::vec(0u8..20, 1..40)) {
            // small integer grid forces ties
            let null: Vec<f64> = null.into_iter().map(|v| v as f64 / 4.0).collect();
            prop_assert_eq!(choose_lambda(&null), lambda_oracle(&null));
        }

        #[test]
        fn dfdr_properties(s in stat_set(), tau in 0.0f64..5.5, pi0 in 0.0f64..1.0, k in 1.0f64..50.0) {
            let p = Pi0Estimate::user(pi0).unwrap();
            let e = estimate_dfdr_at_tau(&s, &p, tau);
            prop_assert!(e.value >= 0.0);
            if e.discoveries == 0 || e.null_exceedances == 0 {
                prop_assert_eq!(e.value, 0.0);
            }
            let one = estimate_dfdr_at_tau(&s, &Pi0Estimate::one(), tau);
            prop_assert!((e.value - pi0 * one.value).abs() <= 1e-12 * one.value.max(1.0));
            let later = estimate_dfdr_at_tau(&s, &p, tau + 0.3);
            prop_assert!(later.discoveries <= e.discoveries);
            let w = estimate_weighted_dfdr(&s, &p, &vec![k; s.m()], tau).unwrap();
            prop_assert!((w - e.value).abs() <= 1e-12);
            let sorted = SortedStatistics::new(&s);
            prop_assert_eq!(sorted.dfdr(pi0, tau), e);
            let cb = CostBenefit::new(1.0, 19.0).unwrap();
            if e.discoveries == 0 {
                prop_assert_eq!(estimate_desirability(&s, &p, &cb, tau), 0.0);
            }
        }
    }
}
