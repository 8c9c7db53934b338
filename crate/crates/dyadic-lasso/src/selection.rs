//! Regularization schedules and the selected Lasso: one fit per dyadic
//! truncation level, then the level minimizing the combined criterion
//! `gamma(fit) + lambda_p ||theta||_1 + pen(p)`.

use crate::dictionaries::{dyadic_levels, truncate, Dictionary, DyadicLevels};
use crate::error::{Error, Result};
use crate::geometry::{gamma_emp, SampleVector};
use crate::solver::{lasso_cd_warm, LassoFit};

/// `lambda_p = 4 eps (sqrt(ln p) + 1)`.
pub fn lambda_p(p: usize, eps: f64) -> Result<f64> {
    if p == 0 {
        return Err(Error::Parameter("p must be >= 1".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::Parameter(format!("eps must be > 0, got {eps}")));
    }
    Ok(4.0 * eps * ((p as f64).ln().sqrt() + 1.0))
}

/// `pen(p) = 5 eps^2 ln p`.
pub fn pen_p(p: usize, eps: f64) -> Result<f64> {
    if p == 0 {
        return Err(Error::Parameter("p must be >= 1".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::Parameter(format!("eps must be > 0, got {eps}")));
    }
    Ok(5.0 * eps * eps * (p as f64).ln())
}

/// Schedule value `(28 sigma / sqrt(n)) (sqrt((d+1) ln(n+1)) + 4)` for the
/// enumerated Heaviside dictionary.
pub fn lambda_nn(n: usize, d: usize, sigma: f64) -> Result<f64> {
    if n == 0 || d == 0 {
        return Err(Error::Parameter("need n >= 1 and d >= 1".into()));
    }
    if !(sigma > 0.0) {
        return Err(Error::Parameter(format!("sigma must be > 0, got {sigma}")));
    }
    let log_card = ((d + 1) as f64) * ((n + 1) as f64).ln();
    Ok(28.0 * sigma / (n as f64).sqrt() * (log_card.sqrt() + 4.0))
}

#[derive(Debug, Clone)]
pub struct LevelRecord {
    pub p: usize,
    pub lambda_p: f64,
    pub pen_p: f64,
    pub fit: LassoFit,
    pub criterion: f64,
}

#[derive(Debug, Clone)]
pub struct SelectionTrace {
    pub levels: DyadicLevels,
    pub per_level: Vec<LevelRecord>,
    pub p_hat: usize,
}

impl SelectionTrace {
    pub fn chosen(&self) -> &LevelRecord {
        self.per_level
            .iter()
            .find(|rec| rec.p == self.p_hat)
            .expect("p_hat always matches a level")
    }

    pub fn chosen_fit(&self) -> &LassoFit {
        &self.chosen().fit
    }
}

/// Fit a Lasso at every dyadic truncation level (warm-started from the
/// previous level) and select the criterion-minimizing level. Ties break
/// toward the smallest p.
pub fn selected_lasso(
    dictionary: &Dictionary,
    y: &SampleVector,
    eps: f64,
    p_max: usize,
    tol: f64,
) -> Result<SelectionTrace> {
    selected_lasso_impl(dictionary, y, eps, p_max, tol, true)
}

/// Same procedure with cold starts at every level; agrees with the
/// warm-started run to solver tolerance.
pub fn selected_lasso_cold(
    dictionary: &Dictionary,
    y: &SampleVector,
    eps: f64,
    p_max: usize,
    tol: f64,
) -> Result<SelectionTrace> {
    selected_lasso_impl(dictionary, y, eps, p_max, tol, false)
}

fn selected_lasso_impl(
    dictionary: &Dictionary,
    y: &SampleVector,
    eps: f64,
    p_max: usize,
    tol: f64,
    warm_start: bool,
) -> Result<SelectionTrace> {
    if !dictionary.is_normalized() {
        return Err(Error::Parameter(
            "selected_lasso requires a normalized dictionary".into(),
        ));
    }
    if p_max > dictionary.len() {
        return Err(Error::Parameter(format!(
            "p_max={p_max} exceeds dictionary size {}",
            dictionary.len()
        )));
    }
    let levels = dyadic_levels(p_max)?;
    let mut per_level = Vec::with_capacity(levels.levels().len());
    let mut previous_theta: Vec<f64> = Vec::new();

    for &p in levels.levels() {
        let lambda = lambda_p(p, eps)?;
        let pen = pen_p(p, eps)?;
        let sub = truncate(dictionary, p)?;
        let warm: &[f64] = if warm_start { &previous_theta } else { &[] };
        let fit = lasso_cd_warm(&sub, y, lambda, tol, crate::solver::DEFAULT_MAX_ITER, warm)
            .map_err(|e| Error::SolverAtLevel {
                p,
                source: Box::new(e),
            })?;
        let criterion =
            gamma_emp(y, &fit.fitted, dictionary.design())? + lambda * fit.l1_norm() + pen;
        previous_theta = fit.theta.clone();
        per_level.push(LevelRecord {
            p,
            lambda_p: lambda,
            pen_p: pen,
            fit,
            criterion,
        });
    }

    let p_hat = per_level
        .iter()
        .min_by(|a, b| {
            a.criterion
                .partial_cmp(&b.criterion)
                .unwrap()
                .then(a.p.cmp(&b.p))
        })
        .expect("at least one level")
        .p;

    Ok(SelectionTrace {
        levels,
        per_level,
        p_hat,
    })
}
