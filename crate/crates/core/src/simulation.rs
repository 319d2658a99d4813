//! Monte Carlo harness: synthetic two-group experiments with known truth,
//! run through the full statistic / permutation / estimation / decision
//! pipeline, and the realized error rates of each decision rule.
//!
//! Null features are standard normal in both groups; alternative features
//! are shifted by `delta` in group A. Each replicate draws from its own
//! ChaCha8 stream (`seed`, stream = replicate index), and its permutation
//! plan seed is derived from the same pair, so results do not depend on the
//! order or parallelism of evaluation.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, Continuous, ContinuousCDF, Normal, StudentsT};

use crate::data::DataMatrix;
use crate::decision::{control_dfdr, maximize_desirability, Pi0Choice};
use crate::error::{DfdrError, Result};
use crate::estimators::{estimate_dfdr_at_tau, CostBenefit};
use crate::resampling::{permutation_null_rows, AbsWelchT, PermutationPlan};
use crate::statistics::{abs_t_rows, StatisticSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruthMode {
    /// Exactly `floor(pi0 * m)` true nulls at random positions.
    Fixed,
    /// Each test is an alternative independently with probability `1 - pi0`.
    Random,
}

/// Equicorrelated blocks of consecutive features.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockDependence {
    pub block_size: usize,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub m: usize,
    pub pi0: f64,
    pub replicates: usize,
    pub n_a: usize,
    pub n_b: usize,
    pub delta: f64,
    pub permutations: usize,
    pub seed: u64,
    pub truth: TruthMode,
    pub dependence: Option<BlockDependence>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            m: 2000,
            pi0: 0.8,
            replicates: 200,
            n_a: 10,
            n_b: 10,
            delta: 2.0,
            permutations: 20,
            seed: 1,
            truth: TruthMode::Fixed,
            dependence: None,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(DfdrError::invalid("m must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.pi0) {
            return Err(DfdrError::invalid(format!("pi0 = {} is outside [0, 1]", self.pi0)));
        }
        if self.replicates == 0 {
            return Err(DfdrError::invalid("replicates must be at least 1"));
        }
        if self.n_a < 2 || self.n_b < 2 {
            return Err(DfdrError::invalid("each group needs at least 2 subjects"));
        }
        if !self.delta.is_finite() {
            return Err(DfdrError::invalid("delta must be finite"));
        }
        if self.permutations == 0 {
            return Err(DfdrError::invalid("permutations must be at least 1"));
        }
        if let Some(d) = self.dependence {
            if d.block_size == 0 || !(0.0..1.0).contains(&d.rho) {
                return Err(DfdrError::invalid("block size must be >= 1 and rho in [0, 1)"));
            }
        }
        Ok(())
    }

    /// Number of true nulls in fixed-truth mode.
    pub fn true_nulls(&self) -> usize {
        (self.pi0 * self.m as f64).floor() as usize
    }

    fn replicate_rng(&self, replicate: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(replicate as u64);
        rng
    }

    fn replicate_plan(&self, replicate: usize) -> PermutationPlan {
        PermutationPlan::new(self.permutations, self.seed)
            .expect("validated")
            .derive(replicate as u64)
    }
}

/// One synthetic data set. `truth[i]` is true when test `i` is an
/// alternative (its null hypothesis is false).
pub fn generate_instance(config: &SimulationConfig, replicate: usize) -> (DataMatrix, Vec<bool>) {
    let mut rng = config.replicate_rng(replicate);
    let m = config.m;
    let truth: Vec<bool> = match config.truth {
        TruthMode::Fixed => {
            let nulls = config.true_nulls();
            let mut t: Vec<bool> = (0..m).map(|i| i >= nulls).collect();
            t.shuffle(&mut rng);
            t
        }
        TruthMode::Random => (0..m).map(|_| rng.random::<f64>() >= config.pi0).collect(),
    };
    let n = config.n_a + config.n_b;
    let mut values = Vec::with_capacity(m * n);
    let mut shared = vec![0.0; n];
    for (i, &alt) in truth.iter().enumerate() {
        if let Some(dep) = config.dependence {
            if i % dep.block_size == 0 {
                for s in shared.iter_mut() {
                    *s = rng.sample(StandardNormal);
                }
            }
        }
        for (j, s) in shared.iter().enumerate() {
            let e: f64 = rng.sample(StandardNormal);
            let noise = match config.dependence {
                Some(dep) => dep.rho.sqrt() * s + (1.0 - dep.rho).sqrt() * e,
                None => e,
            };
            let shift = if alt && j < config.n_a { config.delta } else { 0.0 };
            values.push(noise + shift);
        }
    }
    let labels = (0..n)
        .map(|j| if j < config.n_a { "A" } else { "B" }.to_string())
        .collect();
    let matrix = DataMatrix::new(
        values,
        (0..m).map(|i| format!("f{i}")).collect(),
        (0..n).map(|j| format!("s{j}")).collect(),
        labels,
    )
    .expect("generated matrix is well-formed");
    (matrix, truth)
}

/// A decision rule applied to each replicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecisionRule {
    Maximize { cost_benefit: CostBenefit, pi0: Pi0Choice },
    Control { alpha: f64, cost_benefit: CostBenefit, pi0: Pi0Choice },
    /// Reject `T >= tau` for a fixed tau; records the estimate there.
    Fixed { tau: f64, pi0: Pi0Choice },
    RejectNothing,
    RejectAll,
}

impl DecisionRule {
    fn needs_null(&self) -> bool {
        !matches!(self, DecisionRule::RejectNothing | DecisionRule::RejectAll)
    }
}

/// Outcome of one rule on one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleOutcome {
    /// Threshold used; `None` when nothing was rejected by an optimizer.
    pub tau: Option<f64>,
    pub rejected: Vec<bool>,
    /// Realized false rejections and rejections.
    pub false_rejections: usize,
    pub rejections: usize,
    /// Estimates at `tau` (zero when nothing is rejected or not applicable).
    pub dfdr_estimate: f64,
    pub pi0_estimate: Option<f64>,
}

/// Statistics, truth and per-rule outcomes for one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateRun {
    pub observed: Vec<f64>,
    pub truth: Vec<bool>,
    pub outcomes: Vec<RuleOutcome>,
}

fn apply_rule(rule: &DecisionRule, stats: Option<&StatisticSet>, observed: &[f64], truth: &[bool]) -> Result<RuleOutcome> {
    let m = observed.len();
    let (tau, rejected, dfdr_estimate, pi0_estimate) = match *rule {
        DecisionRule::RejectNothing => (None, vec![false; m], 0.0, None),
        DecisionRule::RejectAll => (Some(f64::NEG_INFINITY), vec![true; m], 0.0, None),
        DecisionRule::Maximize { cost_benefit, pi0 } => {
            let stats = stats.expect("null computed");
            let p = pi0.resolve(stats)?;
            let r = maximize_desirability(stats, &p, &cost_benefit);
            (r.tau, mask(m, &r.rejected), r.dfdr, Some(p.value))
        }
        DecisionRule::Control { alpha, cost_benefit, pi0 } => {
            let stats = stats.expect("null computed");
            let p = pi0.resolve(stats)?;
            let r = control_dfdr(stats, &p, alpha, &cost_benefit)?;
            (r.tau, mask(m, &r.rejected), r.dfdr, Some(p.value))
        }
        DecisionRule::Fixed { tau, pi0 } => {
            let stats = stats.expect("null computed");
            let p = pi0.resolve(stats)?;
            let e = estimate_dfdr_at_tau(stats, &p, tau);
            let rej = observed.iter().map(|t| *t >= tau).collect();
            (Some(tau), rej, e.value, Some(p.value))
        }
    };
    let rejections = rejected.iter().filter(|r| **r).count();
    let false_rejections = rejected
        .iter()
        .zip(truth)
        .filter(|(r, alt)| **r && !**alt)
        .count();
    Ok(RuleOutcome {
        tau,
        rejected,
        false_rejections,
        rejections,
        dfdr_estimate,
        pi0_estimate,
    })
}

fn mask(m: usize, idx: &[usize]) -> Vec<bool> {
    let mut v = vec![false; m];
    for &i in idx {
        v[i] = true;
    }
    v
}

/// Runs one replicate through the pipeline and every rule.
pub fn run_replicate(config: &SimulationConfig, replicate: usize, rules: &[DecisionRule]) -> Result<ReplicateRun> {
    let (matrix, truth) = generate_instance(config, replicate);
    let a: Vec<usize> = (0..config.n_a).collect();
    let b: Vec<usize> = (config.n_a..config.n_a + config.n_b).collect();
    let features: Vec<usize> = (0..config.m).collect();
    let observed = abs_t_rows(&matrix, &features, &a, &b);
    let stats = if rules.iter().any(DecisionRule::needs_null) {
        let plan = config.replicate_plan(replicate);
        let null = permutation_null_rows(&matrix, &features, &a, &b, &plan, &AbsWelchT);
        Some(StatisticSet::new(observed.clone(), null)?)
    } else {
        None
    };
    let outcomes = rules
        .iter()
        .map(|r| apply_rule(r, stats.as_ref(), &observed, &truth))
        .collect::<Result<_>>()?;
    Ok(ReplicateRun {
        observed,
        truth,
        outcomes,
    })
}

/// All replicates of `config`, in replicate order.
pub fn run_replicates(config: &SimulationConfig, rules: &[DecisionRule]) -> Result<Vec<ReplicateRun>> {
    config.validate()?;
    (0..config.replicates)
        .into_par_iter()
        .map(|r| run_replicate(config, r, rules))
        .collect()
}

/// Realized error rates of one rule pooled over replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRateReport {
    pub replicates: usize,
    pub total_false_rejections: usize,
    pub total_rejections: usize,
    /// Mean of V/R with 0 for R = 0.
    pub fdr: f64,
    pub fdr_se: f64,
    /// Mean of V/R over replicates with R > 0; `None` if there are none.
    pub pfdr: Option<f64>,
    pub pfdr_se: Option<f64>,
    /// sum V / sum R; `None` when nothing was ever rejected.
    pub pfp: Option<f64>,
    /// sum V / sum R, or 0 when nothing was ever rejected.
    pub dfdr: f64,
    /// Ratio-estimator standard error of `dfdr` across replicates.
    pub dfdr_se: f64,
    /// Realized fraction of rejected hypotheses that are true nulls (equal
    /// to `dfdr`), with its binomial standard error over pooled rejections.
    pub conditional_prob: f64,
    pub binomial_se: f64,
    pub fraction_rejecting: f64,
    /// Mean and standard error of the per-replicate dFDR estimate.
    pub mean_dfdr_estimate: f64,
    pub mean_dfdr_estimate_se: f64,
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Binomial standard error `sqrt(p (1 - p) / n)`; zero for `n = 0`.
pub fn binomial_se(p: f64, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        (p * (1.0 - p) / n as f64).sqrt()
    }
}

impl ErrorRateReport {
    pub fn from_runs(runs: &[ReplicateRun], rule: usize) -> Self {
        let outs: Vec<&RuleOutcome> = runs.iter().map(|r| &r.outcomes[rule]).collect();
        let n = outs.len();
        let total_v: usize = outs.iter().map(|o| o.false_rejections).sum();
        let total_r: usize = outs.iter().map(|o| o.rejections).sum();
        let fractions: Vec<f64> = outs
            .iter()
            .map(|o| {
                if o.rejections == 0 {
                    0.0
                } else {
                    o.false_rejections as f64 / o.rejections as f64
                }
            })
            .collect();
        let (fdr, fdr_se) = mean_se(&fractions);
        let positive: Vec<f64> = outs
            .iter()
            .zip(&fractions)
            .filter(|(o, _)| o.rejections > 0)
            .map(|(_, f)| *f)
            .collect();
        let (pfdr, pfdr_se) = if positive.is_empty() {
            (None, None)
        } else {
            let (m, s) = mean_se(&positive);
            (Some(m), Some(s))
        };
        let pfp = (total_r > 0).then(|| total_v as f64 / total_r as f64);
        let dfdr = pfp.unwrap_or(0.0);
        let dfdr_se = if total_r > 0 && n > 1 {
            let mean_r = total_r as f64 / n as f64;
            let ss: f64 = outs
                .iter()
                .map(|o| (o.false_rejections as f64 - dfdr * o.rejections as f64).powi(2))
                .sum();
            (ss / (n as f64 * (n as f64 - 1.0))).sqrt() / mean_r
        } else {
            0.0
        };
        let estimates: Vec<f64> = outs.iter().map(|o| o.dfdr_estimate).collect();
        let (mean_dfdr_estimate, mean_dfdr_estimate_se) = mean_se(&estimates);
        Self {
            replicates: n,
            total_false_rejections: total_v,
            total_rejections: total_r,
            fdr,
            fdr_se,
            pfdr,
            pfdr_se,
            pfp,
            dfdr,
            dfdr_se,
            conditional_prob: dfdr,
            binomial_se: binomial_se(dfdr, total_r),
            fraction_rejecting: outs.iter().filter(|o| o.rejections > 0).count() as f64 / n as f64,
            mean_dfdr_estimate,
            mean_dfdr_estimate_se,
        }
    }

    /// Text records, one `metric<TAB>value` line each.
    pub fn to_records(&self, rule: &str) -> String {
        let opt = |v: Option<f64>| v.map_or("undefined".to_string(), |x| format!("{x}"));
        let rows = [
            ("replicates", self.replicates.to_string()),
            ("total_false_rejections", self.total_false_rejections.to_string()),
            ("total_rejections", self.total_rejections.to_string()),
            ("fdr", format!("{}", self.fdr)),
            ("fdr_se", format!("{}", self.fdr_se)),
            ("pfdr", opt(self.pfdr)),
            ("pfdr_se", opt(self.pfdr_se)),
            ("pfp", opt(self.pfp)),
            ("dfdr", format!("{}", self.dfdr)),
            ("dfdr_se", format!("{}", self.dfdr_se)),
            ("conditional_prob", format!("{}", self.conditional_prob)),
            ("binomial_se", format!("{}", self.binomial_se)),
            ("fraction_rejecting", format!("{}", self.fraction_rejecting)),
            ("mean_dfdr_estimate", format!("{}", self.mean_dfdr_estimate)),
            ("mean_dfdr_estimate_se", format!("{}", self.mean_dfdr_estimate_se)),
        ];
        rows.iter()
            .map(|(k, v)| format!("{rule}\t{k}\t{v}\n"))
            .collect()
    }
}

/// Runs the pipeline for every replicate and reports the realized rates.
pub fn measure_error_rates(config: &SimulationConfig, rule: &DecisionRule) -> Result<ErrorRateReport> {
    let runs = run_replicates(config, std::slice::from_ref(rule))?;
    Ok(ErrorRateReport::from_runs(&runs, 0))
}

/// Partition of each replicate's rejection region into bins.
#[derive(Debug, Clone, PartialEq)]
pub enum LocalBins {
    /// Ascending edges as offsets from the replicate's threshold:
    /// bin k is `[tau + e_k, tau + e_{k+1})`.
    Offsets(Vec<f64>),
    /// Ascending edges in [0, 1] over the rank of the rejected statistics:
    /// bin k holds the rejected tests whose ascending rank r satisfies
    /// `ceil(f_k R) <= r < ceil(f_{k+1} R)`.
    RejectionFractions(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalRate {
    pub lower: f64,
    pub upper: f64,
    pub false_rejections: usize,
    pub rejections: usize,
    /// false_rejections / rejections, or 0 for an empty bin.
    pub rate: f64,
}

/// Realized false-rejection fraction per bin, pooled over replicates.
pub fn measure_local_dfdr(runs: &[ReplicateRun], rule: usize, bins: &LocalBins) -> Result<Vec<LocalRate>> {
    let edges = match bins {
        LocalBins::Offsets(e) | LocalBins::RejectionFractions(e) => e,
    };
    if edges.len() < 2 || edges.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        return Err(DfdrError::invalid("bin edges must be strictly ascending, at least two"));
    }
    if edges[0] < 0.0 {
        return Err(DfdrError::invalid("bins must lie inside the rejection region"));
    }
    let nbins = edges.len() - 1;
    let mut v = vec![0usize; nbins];
    let mut r = vec![0usize; nbins];
    for run in runs {
        let out = &run.outcomes[rule];
        let Some(tau) = out.tau else { continue };
        let mut rejected: Vec<(f64, bool)> = run
            .observed
            .iter()
            .zip(&run.truth)
            .zip(&out.rejected)
            .filter(|(_, rej)| **rej)
            .map(|((t, alt), _)| (*t, *alt))
            .collect();
        rejected.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total = rejected.len();
        for (rank, (t, alt)) in rejected.iter().enumerate() {
            let bin = match bins {
                LocalBins::Offsets(_) => {
                    let off = t - tau;
                    (0..nbins).find(|&k| off >= edges[k] && off < edges[k + 1])
                }
                LocalBins::RejectionFractions(_) => (0..nbins).find(|&k| {
                    let lo = (edges[k] * total as f64).ceil() as usize;
                    let hi = (edges[k + 1] * total as f64).ceil() as usize;
                    rank >= lo && rank < hi
                }),
            };
            if let Some(k) = bin {
                r[k] += 1;
                if !alt {
                    v[k] += 1;
                }
            }
        }
    }
    Ok((0..nbins)
        .map(|k| LocalRate {
            lower: edges[k],
            upper: edges[k + 1],
            false_rejections: v[k],
            rejections: r[k],
            rate: if r[k] == 0 { 0.0 } else { v[k] as f64 / r[k] as f64 },
        })
        .collect())
}

/// `rate <= bound + k * sqrt(bound (1 - bound) / n)`.
pub fn within_bound(rate: f64, n: usize, bound: f64, k_se: f64) -> bool {
    rate <= bound + k_se * binomial_se(bound, n)
}

/// Closed-form distributions of `|T|` for the balanced design, where the
/// Welch statistic coincides with the pooled t-statistic on
/// `n_a + n_b - 2` degrees of freedom.
pub mod analytic {
    use super::*;

    fn check_balanced(config: &SimulationConfig) -> Result<()> {
        if config.n_a != config.n_b {
            return Err(DfdrError::invalid(
                "closed-form |T| distributions need equal group sizes",
            ));
        }
        Ok(())
    }

    fn dof(config: &SimulationConfig) -> f64 {
        (config.n_a + config.n_b - 2) as f64
    }

    /// Noncentrality of the alternative t-statistic.
    pub fn noncentrality(config: &SimulationConfig) -> f64 {
        config.delta / (1.0 / config.n_a as f64 + 1.0 / config.n_b as f64).sqrt()
    }

    /// `P(|T| >= tau)` for a central t on `dof` degrees of freedom.
    pub fn null_survival(dof: f64, tau: f64) -> f64 {
        let t = StudentsT::new(0.0, 1.0, dof).expect("positive dof");
        2.0 * t.sf(tau)
    }

    /// CDF of the noncentral t with `dof` degrees of freedom and
    /// noncentrality `ncp`: `E[Phi(x sqrt(V / dof) - ncp)]` for
    /// `V ~ chi^2(dof)`, integrated by composite Simpson's rule.
    pub fn noncentral_t_cdf(x: f64, dof: f64, ncp: f64) -> f64 {
        let chi = ChiSquared::new(dof).expect("positive dof");
        let normal = Normal::new(0.0, 1.0).expect("unit normal");
        let upper = dof + 60.0 * (2.0 * dof).sqrt() + 60.0;
        let n = 20_000;
        let h = upper / n as f64;
        let f = |v: f64| {
            if v <= 0.0 {
                return if dof > 2.0 { 0.0 } else { chi.pdf(1e-300) * normal.cdf(-ncp) };
            }
            chi.pdf(v) * normal.cdf(x * (v / dof).sqrt() - ncp)
        };
        let mut sum = f(0.0) + f(upper);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * f(k as f64 * h);
        }
        (sum * h / 3.0).clamp(0.0, 1.0)
    }

    /// `P(|T| >= tau)` for an alternative feature.
    pub fn alternative_survival(dof: f64, ncp: f64, tau: f64) -> f64 {
        1.0 - noncentral_t_cdf(tau, dof, ncp) + noncentral_t_cdf(-tau, dof, ncp)
    }

    /// Proportion of true nulls implied by the truth mode.
    pub fn null_fraction(config: &SimulationConfig) -> f64 {
        match config.truth {
            TruthMode::Fixed => config.true_nulls() as f64 / config.m as f64,
            TruthMode::Random => config.pi0,
        }
    }

    /// `pi0 (1 - F0(tau)) / (1 - F(tau))` for the generative mixture: the
    /// probability that a test rejected at `tau` is a true null.
    pub fn dfdr(config: &SimulationConfig, tau: f64) -> Result<f64> {
        check_balanced(config)?;
        let pi0 = null_fraction(config);
        let s0 = null_survival(dof(config), tau);
        let s1 = alternative_survival(dof(config), noncentrality(config), tau);
        let s = pi0 * s0 + (1.0 - pi0) * s1;
        Ok(if s == 0.0 { 0.0 } else { pi0 * s0 / s })
    }

    /// Expected number of rejections at `tau`.
    pub fn expected_rejections(config: &SimulationConfig, tau: f64) -> Result<f64> {
        check_balanced(config)?;
        let pi0 = null_fraction(config);
        let s0 = null_survival(dof(config), tau);
        let s1 = alternative_survival(dof(config), noncentrality(config), tau);
        Ok(config.m as f64 * (pi0 * s0 + (1.0 - pi0) * s1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SimulationConfig {
        SimulationConfig {
            m: 200,
            pi0: 0.8,
            replicates: 8,
            n_a: 5,
            n_b: 5,
            delta: 3.0,
            permutations: 5,
            seed: 7,
            truth: TruthMode::Fixed,
            dependence: None,
        }
    }

    fn cb19() -> CostBenefit {
        CostBenefit::new(1.0, 19.0).unwrap()
    }

    #[test]
    fn degenerate_mixtures() {
        let mut c = small();
        c.pi0 = 1.0;
        assert!(generate_instance(&c, 0).1.iter().all(|a| !a));
        c.pi0 = 0.0;
        assert!(generate_instance(&c, 0).1.iter().all(|a| *a));
        let report = measure_error_rates(
            &c,
            &DecisionRule::Maximize { cost_benefit: cb19(), pi0: Pi0Choice::One },
        )
        .unwrap();
        assert_eq!(report.total_false_rejections, 0);
        assert_eq!(report.dfdr, 0.0);
    }

    #[test]
    fn fixed_mode_exact_null_count() {
        let c = SimulationConfig { m: 10, ..small() };
        for r in 0..5 {
            assert_eq!(generate_instance(&c, r).1.iter().filter(|a| !**a).count(), 8);
        }
    }

    #[test]
    fn deterministic_per_replicate() {
        let c = small();
        assert_eq!(generate_instance(&c, 3), generate_instance(&c, 3));
        assert_ne!(generate_instance(&c, 3).0, generate_instance(&c, 4).0);
        let runs_a = run_replicates(&c, &[DecisionRule::Maximize { cost_benefit: cb19(), pi0: Pi0Choice::Estimate }]).unwrap();
        let runs_b = run_replicates(&c, &[DecisionRule::Maximize { cost_benefit: cb19(), pi0: Pi0Choice::Estimate }]).unwrap();
        assert_eq!(runs_a, runs_b);
        assert_eq!(runs_a[2], run_replicate(&c, 2, &[DecisionRule::Maximize { cost_benefit: cb19(), pi0: Pi0Choice::Estimate }]).unwrap());
    }

    #[test]
    fn reject_nothing_and_everything() {
        let c = small();
        let none = measure_error_rates(&c, &DecisionRule::RejectNothing).unwrap();
        assert_eq!((none.fdr, none.dfdr, none.pfp, none.pfdr), (0.0, 0.0, None, None));
        let mut null_only = small();
        null_only.pi0 = 1.0;
        let all = measure_error_rates(&null_only, &DecisionRule::RejectAll).unwrap();
        assert_eq!(all.dfdr, 1.0);
        assert_eq!(all.pfp, Some(1.0));
        assert!(!null_only.to_owned().validate().is_err());
        assert!(all.to_records("all").contains("all\tdfdr\t1\n"));
    }

    #[test]
    fn per_replicate_invariants() {
        let c = small();
        let rules = [
            DecisionRule::Maximize { cost_benefit: cb19(), pi0: Pi0Choice::Estimate },
            DecisionRule::Control { alpha: 0.05, cost_benefit: cb19(), pi0: Pi0Choice::Estimate },
        ];
        let runs = run_replicates(&c, &rules).unwrap();
        let nulls = c.true_nulls();
        for run in &runs {
            for o in &run.outcomes {
                assert!(o.false_rejections <= o.rejections);
                assert!(o.false_rejections <= nulls);
            }
        }
        let rep = ErrorRateReport::from_runs(&runs, 0);
        if rep.total_rejections > 0 {
            assert_eq!(rep.pfp, Some(rep.dfdr));
        }
    }

    #[test]
    fn local_bins() {
        let c = small();
        let runs = run_replicates(&c, &[DecisionRule::Maximize { cost_benefit: cb19(), pi0: Pi0Choice::One }]).unwrap();
        let whole = measure_local_dfdr(&runs, 0, &LocalBins::Offsets(vec![0.0, f64::INFINITY])).unwrap();
        let report = ErrorRateReport::from_runs(&runs, 0);
        assert_eq!(whole[0].rejections, report.total_rejections);
        assert_eq!(whole[0].rate, report.dfdr);
        let frac = measure_local_dfdr(&runs, 0, &LocalBins::RejectionFractions(vec![0.0, 0.5, 1.0])).unwrap();
        assert_eq!(frac[0].rejections + frac[1].rejections, report.total_rejections);
        let empty = measure_local_dfdr(&runs, 0, &LocalBins::Offsets(vec![1e6, 1e7])).unwrap();
        assert_eq!((empty[0].rejections, empty[0].rate), (0, 0.0));
        assert!(measure_local_dfdr(&runs, 0, &LocalBins::Offsets(vec![1.0, 0.5])).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SimulationConfig { replicates: 0, ..small() }.validate().is_err());
        assert!(SimulationConfig { pi0: 1.5, ..small() }.validate().is_err());
        assert!(SimulationConfig { n_a: 1, ..small() }.validate().is_err());
        assert!(run_replicates(&SimulationConfig { replicates: 0, ..small() }, &[]).is_err());
    }

    #[test]
    fn noncentral_cdf_reduces_to_central() {
        let t = StudentsT::new(0.0, 1.0, 18.0).unwrap();
        for x in [-2.0, -0.3, 0.0, 1.1, 3.5] {
            assert!((analytic::noncentral_t_cdf(x, 18.0, 0.0) - t.cdf(x)).abs() < 1e-9);
        }
    }

    #[test]
    fn noncentral_cdf_matches_monte_carlo() {
        // Direct simulation of (Z + ncp) / sqrt(V / dof).
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let (dof, ncp, x) = (18.0, 4.47, 3.5);
        let chi = rand_distr::ChiSquared::new(dof).unwrap();
        let n = 200_000;
        let below = (0..n)
            .filter(|_| {
                let z: f64 = rng.sample(StandardNormal);
                let v: f64 = rng.sample(chi);
                (z + ncp) / (v / dof).sqrt() <= x
            })
            .count() as f64
            / n as f64;
        let exact = analytic::noncentral_t_cdf(x, dof, ncp);
        let se = (exact * (1.0 - exact) / n as f64).sqrt();
        assert!((below - exact).abs() < 4.0 * se, "mc {below} vs {exact}");
    }

    #[test]
    fn analytic_dfdr_bounds() {
        let c = SimulationConfig { n_a: 10, n_b: 10, delta: 2.0, pi0: 0.8, m: 2000, ..small() };
        let d0 = analytic::dfdr(&c, 0.0).unwrap();
        assert!((d0 - 0.8).abs() < 1e-9);
        let hi = analytic::dfdr(&c, 5.0).unwrap();
        assert!(hi < 0.01);
        assert!(analytic::dfdr(&SimulationConfig { n_b: 6, ..c }, 1.0).is_err());
    }

    #[test]
    fn bound_check() {
        assert!(within_bound(0.05, 100, 0.05, 0.0));
        assert!(within_bound(0.09, 100, 0.05, 3.0));
        assert!(!within_bound(0.12, 100, 0.05, 3.0));
    }
}
