//! Decisive false discovery rate (dFDR) estimation and decision-theoretic
//! threshold selection for large families of two-sample tests.
//!
//! The usual flow is: load a [`DataMatrix`], compute observed statistics and a
//! column-permutation null, wrap them in a [`StatisticSet`], estimate the null
//! proportion, then either maximize the estimated desirability or control the
//! dFDR at a chosen level.

pub mod cli;
pub mod data;
pub mod decision;
pub mod error;
pub mod estimators;
pub mod resampling;
pub mod simulation;
pub mod statistics;

pub use data::{load_matrix, preprocess, signed_log, DataMatrix, LabelSource};
pub use decision::{
    control_dfdr, maximize_desirability, per_subset_optimize, CurvePoint, DecisionResult,
    Pi0Choice, Subset, SubsetPartition,
};
pub use error::{DfdrError, Result};
pub use estimators::{
    choose_lambda, estimate_desirability, estimate_dfdr_at_tau, estimate_pi0, estimate_pi0_auto,
    p_to_cost_ratio, CostBenefit, DfdrEstimate, Pi0Estimate, Pi0Mode,
};
pub use resampling::{permutation_null, AbsWelchT, PermutationPlan, TwoSampleStatistic};
pub use statistics::{two_sample_abs_t, welch_abs_t, StatisticSet};
