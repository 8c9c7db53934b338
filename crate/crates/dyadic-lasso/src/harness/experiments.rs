//! Monte Carlo risk estimation and the theorem-ratio experiments.
//!
//! Every replication draws from its own derived stream, and sample
//! statistics are aggregated by pairwise summation over the
//! index-ordered outcomes, so no report depends on scheduling.

use std::sync::Arc;

use rayon::prelude::*;

use crate::dictionaries::{dyadic_levels, truncate, Dictionary};
use crate::error::{Error, Result};
use crate::geometry::{gamma_emp, sample_regression, sample_sequence_model, SampleVector};
use crate::harness::sequence::{seq_deterministic_lasso, seq_selected_lasso, seq_squared_error};
use crate::rng::{derive_seed, RandomStream};
use crate::selection::{lambda_p, pen_p, selected_lasso};
use crate::solver::{lasso_cd, soft_threshold_fit, DEFAULT_MAX_ITER};
use crate::spaces::{hypercube_target, u_param, TargetSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    /// Penalized fit at a fixed truncation level.
    Lasso { p: usize },
    /// Level selection over the dyadic grid up to p_max.
    Selected { p_max: usize },
    /// Closed-form half-threshold (sequence model only).
    SoftThreshold { p: usize },
}

#[derive(Debug, Clone)]
pub enum Model {
    /// Orthonormal sequence model: y_j = theta*_j + eps xi_j in
    /// coefficient space.
    Sequence,
    /// Regression on a design: y = f + eps sqrt(n) xi, solved through
    /// the generic machinery.
    Design {
        dictionary: Arc<Dictionary>,
        f_on_design: SampleVector,
        /// Replaces the lambda_p schedule when set (fixed-level fits only).
        lambda_override: Option<f64>,
    },
}

/// Sum in a fixed tree order; deterministic and more accurate than a
/// running sum.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => pairwise_sum(&values[..n / 2]) + pairwise_sum(&values[n / 2..]),
    }
}

fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone)]
struct RepOutcome {
    sq_err: f64,
    l1: f64,
    support: usize,
    p_hat: Option<usize>,
    /// lambda ||theta||_1 (+ pen(p_hat) under level selection).
    penalty_part: f64,
}

#[derive(Debug, Clone)]
pub struct RiskSummary {
    pub n_rep: usize,
    /// E ||f - f_hat||^2.
    pub mean_risk: f64,
    pub stderr_risk: f64,
    /// E [||f - f_hat||^2 + lambda ||theta_hat||_1 (+ pen(p_hat))]:
    /// the full theorem functional.
    pub mean_numerator: f64,
    pub stderr_numerator: f64,
    pub mean_l1: f64,
    pub mean_support: f64,
    /// Selected level per replication (empty for fixed-level estimators).
    pub p_hats: Vec<usize>,
    /// Per-replication squared errors in replication order.
    pub risks: Vec<f64>,
}

impl RiskSummary {
    pub fn p_hat_median(&self) -> Option<f64> {
        if self.p_hats.is_empty() {
            return None;
        }
        let mut sorted = self.p_hats.clone();
        sorted.sort_unstable();
        let n = sorted.len();
        Some(if n % 2 == 1 {
            sorted[n / 2] as f64
        } else {
            (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0
        })
    }
}

fn replicate_sequence(
    estimator: Estimator,
    theta_star: &[f64],
    eps: f64,
    rng: &mut RandomStream,
) -> Result<RepOutcome> {
    match estimator {
        Estimator::Lasso { p } | Estimator::SoftThreshold { p } => {
            let y = sample_sequence_model(theta_star, eps, p, rng);
            let lambda = lambda_p(p, eps)?;
            let theta = soft_threshold_fit(&y, lambda);
            let l1: f64 = theta.iter().map(|t| t.abs()).sum();
            Ok(RepOutcome {
                sq_err: seq_squared_error(theta_star, &theta),
                l1,
                support: theta.iter().filter(|t| **t != 0.0).count(),
                p_hat: None,
                penalty_part: lambda * l1,
            })
        }
        Estimator::Selected { p_max } => {
            let y = sample_sequence_model(theta_star, eps, p_max, rng);
            let sel = seq_selected_lasso(&y, eps)?;
            let chosen = sel.chosen().clone();
            Ok(RepOutcome {
                sq_err: seq_squared_error(theta_star, &sel.theta),
                l1: chosen.l1_norm,
                support: sel.theta.iter().filter(|t| **t != 0.0).count(),
                p_hat: Some(sel.p_hat),
                penalty_part: chosen.lambda_p * chosen.l1_norm + chosen.pen_p,
            })
        }
    }
}

fn replicate_design(
    estimator: Estimator,
    dictionary: &Dictionary,
    f_on_design: &SampleVector,
    lambda_override: Option<f64>,
    eps: f64,
    tol: f64,
    rng: &mut RandomStream,
) -> Result<RepOutcome> {
    let design = dictionary.design();
    let sigma = eps * (design.n() as f64).sqrt();
    let y = sample_regression(f_on_design, sigma, design, rng)?;
    match estimator {
        Estimator::Lasso { p } => {
            let sub = truncate(dictionary, p)?;
            let lambda = match lambda_override {
                Some(l) => l,
                None => lambda_p(p, eps)?,
            };
            let fit = lasso_cd(&sub, &y, lambda, tol, DEFAULT_MAX_ITER)?;
            Ok(RepOutcome {
                sq_err: gamma_emp(f_on_design, &fit.fitted, design)?,
                l1: fit.l1_norm(),
                support: fit.support_size(),
                p_hat: None,
                penalty_part: lambda * fit.l1_norm(),
            })
        }
        Estimator::Selected { p_max } => {
            let trace = selected_lasso(dictionary, &y, eps, p_max, tol)?;
            let chosen = trace.chosen();
            Ok(RepOutcome {
                sq_err: gamma_emp(f_on_design, &chosen.fit.fitted, design)?,
                l1: chosen.fit.l1_norm(),
                support: chosen.fit.support_size(),
                p_hat: Some(trace.p_hat),
                penalty_part: chosen.lambda_p * chosen.fit.l1_norm() + chosen.pen_p,
            })
        }
        Estimator::SoftThreshold { .. } => Err(Error::Parameter(
            "soft_threshold estimator requires the sequence model".into(),
        )),
    }
}

/// Monte Carlo risk of an estimator over `n_rep` independent
/// replications with derived streams.
pub fn mc_risk(
    estimator: Estimator,
    model: &Model,
    target: &TargetSpec,
    eps: f64,
    n_rep: usize,
    seed: u64,
    tol: f64,
) -> Result<RiskSummary> {
    if n_rep < 2 {
        return Err(Error::Parameter(format!("n_rep must be >= 2, got {n_rep}")));
    }
    let outcomes: Vec<Result<RepOutcome>> = (0..n_rep)
        .into_par_iter()
        .map(|i| {
            let mut rng = RandomStream::derive(seed, i as u64);
            match model {
                Model::Sequence => {
                    replicate_sequence(estimator, &target.coefficients, eps, &mut rng)
                }
                Model::Design {
                    dictionary,
                    f_on_design,
                    lambda_override,
                } => replicate_design(
                    estimator,
                    dictionary,
                    f_on_design,
                    *lambda_override,
                    eps,
                    tol,
                    &mut rng,
                ),
            }
        })
        .collect();

    let mut reps = Vec::with_capacity(n_rep);
    for (index, outcome) in outcomes.into_iter().enumerate() {
        reps.push(outcome.map_err(|e| Error::Replication {
            index,
            source: Box::new(e),
        })?);
    }

    let risks: Vec<f64> = reps.iter().map(|r| r.sq_err).collect();
    let numerators: Vec<f64> = reps.iter().map(|r| r.sq_err + r.penalty_part).collect();
    let l1s: Vec<f64> = reps.iter().map(|r| r.l1).collect();
    let supports: Vec<f64> = reps.iter().map(|r| r.support as f64).collect();
    let (mean_risk, stderr_risk) = mean_stderr(&risks);
    let (mean_numerator, stderr_numerator) = mean_stderr(&numerators);
    Ok(RiskSummary {
        n_rep,
        mean_risk,
        stderr_risk,
        mean_numerator,
        stderr_numerator,
        mean_l1: mean_stderr(&l1s).0,
        mean_support: mean_stderr(&supports).0,
        p_hats: reps.iter().filter_map(|r| r.p_hat).collect(),
        risks,
    })
}

#[derive(Debug, Clone)]
pub struct RatioRow {
    pub p: usize,
    pub eps: f64,
    pub numerator: f64,
    pub numerator_stderr: f64,
    pub denominator: f64,
    pub ratio: f64,
    pub ratio_stderr: f64,
}

fn deterministic_level_value(
    model: &Model,
    target: &TargetSpec,
    p: usize,
    lambda: f64,
    tol: f64,
) -> Result<f64> {
    match model {
        Model::Sequence => seq_deterministic_lasso(&target.coefficients, p, lambda),
        Model::Design {
            dictionary,
            f_on_design,
            ..
        } => {
            let sub = truncate(dictionary, p)?;
            Ok(crate::spaces::deterministic_lasso(&sub, f_on_design, lambda, tol)?.0)
        }
    }
}

/// Fixed-level ratio: MC estimate of the penalized risk over the
/// deterministic oracle value plus `lambda eps`.
pub fn oracle_ratio_experiment(
    model: &Model,
    target: &TargetSpec,
    p: usize,
    eps: f64,
    n_rep: usize,
    seed: u64,
    tol: f64,
) -> Result<RatioRow> {
    let lambda = match model {
        Model::Design {
            lambda_override: Some(l),
            ..
        } => *l,
        _ => lambda_p(p, eps)?,
    };
    let summary = mc_risk(Estimator::Lasso { p }, model, target, eps, n_rep, seed, tol)?;
    let denominator = deterministic_level_value(model, target, p, lambda, tol)? + lambda * eps;
    Ok(RatioRow {
        p,
        eps,
        numerator: summary.mean_numerator,
        numerator_stderr: summary.stderr_numerator,
        denominator,
        ratio: summary.mean_numerator / denominator,
        ratio_stderr: summary.stderr_numerator / denominator,
    })
}

#[derive(Debug, Clone)]
pub struct LevelOracleRow {
    pub p: usize,
    pub det_lasso: f64,
    pub pen: f64,
}

#[derive(Debug, Clone)]
pub struct SelectedOracleReport {
    pub levels: Vec<LevelOracleRow>,
    pub numerator: f64,
    pub numerator_stderr: f64,
    pub denominator: f64,
    pub ratio: f64,
    pub ratio_stderr: f64,
    pub p_hat_median: f64,
    /// (level, how many replications selected it)
    pub p_hat_counts: Vec<(usize, usize)>,
    pub summary: RiskSummary,
}

/// Level-selection ratio: the selected-Lasso functional over
/// `min_p (det_lasso(p) + pen(p)) + eps^2`.
pub fn selected_oracle_experiment(
    model: &Model,
    target: &TargetSpec,
    p_max: usize,
    eps: f64,
    n_rep: usize,
    seed: u64,
    tol: f64,
) -> Result<SelectedOracleReport> {
    let summary = mc_risk(
        Estimator::Selected { p_max },
        model,
        target,
        eps,
        n_rep,
        seed,
        tol,
    )?;
    let mut levels = Vec::new();
    let mut best = f64::INFINITY;
    for &p in dyadic_levels(p_max)?.levels() {
        let lambda = lambda_p(p, eps)?;
        let det = deterministic_level_value(model, target, p, lambda, tol)?;
        let pen = pen_p(p, eps)?;
        best = best.min(det + pen);
        levels.push(LevelOracleRow {
            p,
            det_lasso: det,
            pen,
        });
    }
    let denominator = best + eps * eps;

    let mut counts: std::collections::BTreeMap<usize, usize> = std::collections::BTreeMap::new();
    for &p in &summary.p_hats {
        *counts.entry(p).or_insert(0) += 1;
    }
    Ok(SelectedOracleReport {
        levels,
        numerator: summary.mean_numerator,
        numerator_stderr: summary.stderr_numerator,
        denominator,
        ratio: summary.mean_numerator / denominator,
        ratio_stderr: summary.stderr_numerator / denominator,
        p_hat_median: summary.p_hat_median().unwrap_or(f64::NAN),
        p_hat_counts: counts.into_iter().collect(),
        summary,
    })
}

#[derive(Debug, Clone)]
pub struct RateRow {
    pub eps: f64,
    pub risk_mean: f64,
    pub risk_stderr: f64,
    pub p_hat_median: f64,
}

#[derive(Debug, Clone)]
pub struct RatesReport {
    pub rows: Vec<RateRow>,
    pub slope: f64,
    pub slope_stderr: f64,
    pub intercept: f64,
}

/// Unweighted least squares of y on x; the slope standard error
/// propagates the per-point variances by the delta method.
fn loglog_slope(x: &[f64], y: &[f64], y_var: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let x_bar = pairwise_sum(x) / n;
    let y_bar = pairwise_sum(y) / n;
    let sxx: f64 = x.iter().map(|xi| (xi - x_bar) * (xi - x_bar)).sum();
    let sxy: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| (xi - x_bar) * (yi - y_bar))
        .sum();
    let slope = sxy / sxx;
    let var: f64 = x
        .iter()
        .zip(y_var)
        .map(|(xi, vi)| {
            let w = (xi - x_bar) / sxx;
            w * w * vi
        })
        .sum();
    (slope, var.sqrt(), y_bar - slope * x_bar)
}

/// Selected-Lasso risk along a decreasing noise grid on a power-law
/// target, with the fitted log-log slope against `log(eps sqrt(ln(R/eps)))`.
pub fn rates_experiment(
    target: &TargetSpec,
    eps_grid: &[f64],
    n_rep: usize,
    seed: u64,
) -> Result<RatesReport> {
    if eps_grid.len() < 2 {
        return Err(Error::Parameter("eps grid needs at least 2 points".into()));
    }
    for w in eps_grid.windows(2) {
        if w[1] >= w[0] {
            return Err(Error::Parameter(
                "eps grid must be strictly decreasing".into(),
            ));
        }
    }
    let radius = target.radius;
    let floor = std::f64::consts::E.max(target.q / (4.0 * target.r));
    for &eps in eps_grid {
        if !(eps > 0.0) || radius / eps < floor {
            return Err(Error::Regime(format!(
                "eps = {eps} violates R/eps >= max(e, q/(4r)) = {floor:.6} for R = {radius}"
            )));
        }
    }

    let p_max = target.coefficients.len();
    let mut rows = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut y_vars = Vec::new();
    for (i, &eps) in eps_grid.iter().enumerate() {
        let summary = mc_risk(
            Estimator::Selected { p_max },
            &Model::Sequence,
            target,
            eps,
            n_rep,
            derive_seed(seed, i as u64),
            crate::solver::DEFAULT_TOL,
        )?;
        xs.push((eps * (radius / eps).ln().sqrt()).ln());
        ys.push(summary.mean_risk.ln());
        // delta method: var(log m) ~ (stderr/m)^2
        y_vars.push((summary.stderr_risk / summary.mean_risk).powi(2));
        rows.push(RateRow {
            eps,
            risk_mean: summary.mean_risk,
            risk_stderr: summary.stderr_risk,
            p_hat_median: summary.p_hat_median().unwrap_or(f64::NAN),
        });
    }
    let (slope, slope_stderr, intercept) = loglog_slope(&xs, &ys, &y_vars);
    Ok(RatesReport {
        rows,
        slope,
        slope_stderr,
        intercept,
    })
}

#[derive(Debug, Clone)]
pub struct HypercubeRow {
    pub target_index: usize,
    pub p: usize,
    pub d: usize,
    pub m_value: f64,
    pub risk_mean: f64,
    pub risk_stderr: f64,
}

#[derive(Debug, Clone)]
pub struct MinimaxReport {
    pub rows: Vec<HypercubeRow>,
    pub mean_risk: f64,
    pub rate_bound: f64,
    pub ratio: f64,
    pub ratio_stderr: f64,
}

/// Selected-Lasso risk averaged over random least-favorable hypercube
/// targets, as a ratio to `u^{1-q/2} R^q (eps sqrt(ln(R/eps)))^{2-q}`
/// (constant factor unknown).
pub fn minimax_hypercube_experiment(
    q: f64,
    r: f64,
    radius: f64,
    eps: f64,
    n_targets: usize,
    n_rep: usize,
    seed: u64,
) -> Result<MinimaxReport> {
    if n_targets == 0 {
        return Err(Error::Parameter("need at least one target".into()));
    }
    let mut rows = Vec::new();
    let mut per_target_risks = Vec::new();
    let mut per_target_vars = Vec::new();
    for i in 0..n_targets {
        let mut target_rng = RandomStream::derive(seed, (1_000_000 + i) as u64);
        let target = hypercube_target(q, r, radius, eps, &mut target_rng)?;
        let hc = target.hypercube.unwrap();
        let summary = mc_risk(
            Estimator::Selected { p_max: hc.p },
            &Model::Sequence,
            &target,
            eps,
            n_rep,
            derive_seed(seed, i as u64),
            crate::solver::DEFAULT_TOL,
        )?;
        per_target_risks.push(summary.mean_risk);
        per_target_vars.push(summary.stderr_risk * summary.stderr_risk);
        rows.push(HypercubeRow {
            target_index: i,
            p: hc.p,
            d: hc.d,
            m_value: hc.m_value,
            risk_mean: summary.mean_risk,
            risk_stderr: summary.stderr_risk,
        });
    }
    let u = u_param(q, r);
    let rate_bound =
        u.powf(1.0 - q / 2.0) * radius.powf(q) * (eps * (radius / eps).ln().sqrt()).powf(2.0 - q);
    let mean_risk = pairwise_sum(&per_target_risks) / n_targets as f64;
    let mean_var = pairwise_sum(&per_target_vars) / (n_targets * n_targets) as f64;
    Ok(MinimaxReport {
        rows,
        mean_risk,
        rate_bound,
        ratio: mean_risk / rate_bound,
        ratio_stderr: mean_var.sqrt() / rate_bound,
    })
}
