//! Coefficient-space fast path for the orthonormal sequence model.
//!
//! With an orthonormal dictionary the penalized fit at level p is the
//! coordinatewise half-threshold of the first p observations, so level
//! selection runs in O(p_max) per level without a design matrix. The
//! equivalence with the generic solver is a tested invariant.

use crate::error::{Error, Result};
use crate::selection::{lambda_p, pen_p};
use crate::solver::soft_threshold_fit;

#[derive(Debug, Clone)]
pub struct SeqLevelRecord {
    pub p: usize,
    pub lambda_p: f64,
    pub pen_p: f64,
    pub l1_norm: f64,
    pub criterion: f64,
}

#[derive(Debug, Clone)]
pub struct SeqSelection {
    pub per_level: Vec<SeqLevelRecord>,
    pub p_hat: usize,
    pub theta: Vec<f64>,
}

/// Selected Lasso on sequence-model observations `y[0..p_max]`.
///
/// Each level's criterion keeps the observed residual tail
/// `sum_{p < j <= p_max} y_j^2`; the unobserved tail beyond p_max is a
/// shift common to all levels and does not move the argmin.
pub fn seq_selected_lasso(y: &[f64], eps: f64) -> Result<SeqSelection> {
    let p_max = y.len();
    let levels = crate::dictionaries::dyadic_levels(p_max)?;

    // suffix sums of y_j^2 for O(1) tail lookups
    let mut tail_sq = vec![0.0; p_max + 1];
    for j in (0..p_max).rev() {
        tail_sq[j] = tail_sq[j + 1] + y[j] * y[j];
    }

    let mut per_level = Vec::with_capacity(levels.levels().len());
    for &p in levels.levels() {
        let lambda = lambda_p(p, eps)?;
        let pen = pen_p(p, eps)?;
        let theta = soft_threshold_fit(&y[..p], lambda);
        let mut gamma = tail_sq[p];
        let mut l1 = 0.0;
        for j in 0..p {
            gamma += (y[j] - theta[j]) * (y[j] - theta[j]);
            l1 += theta[j].abs();
        }
        per_level.push(SeqLevelRecord {
            p,
            lambda_p: lambda,
            pen_p: pen,
            l1_norm: l1,
            criterion: gamma + lambda * l1 + pen,
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
    let chosen = per_level.iter().find(|r| r.p == p_hat).unwrap();
    let theta = soft_threshold_fit(&y[..p_hat], chosen.lambda_p);
    Ok(SeqSelection {
        per_level,
        p_hat,
        theta,
    })
}

impl SeqSelection {
    pub fn chosen(&self) -> &SeqLevelRecord {
        self.per_level
            .iter()
            .find(|r| r.p == self.p_hat)
            .expect("p_hat always matches a level")
    }
}

/// `sum_{j <= p}(theta*_j - theta_j)^2 + sum_{j > p} theta*_j^2` against
/// the full target.
pub fn seq_squared_error(theta_star: &[f64], theta: &[f64]) -> f64 {
    let mut err = 0.0;
    for j in 0..theta_star.len().max(theta.len()) {
        let star = theta_star.get(j).copied().unwrap_or(0.0);
        let hat = theta.get(j).copied().unwrap_or(0.0);
        err += (star - hat) * (star - hat);
    }
    err
}

/// Deterministic-Lasso value at level `p` against the full target:
/// half-threshold bias plus the unapproximated tail.
pub fn seq_deterministic_lasso(theta_star: &[f64], p: usize, lambda: f64) -> Result<f64> {
    if p == 0 {
        return Err(Error::Parameter("level p must be >= 1".into()));
    }
    Ok(crate::spaces::deterministic_lasso_orthonormal(theta_star, p, lambda).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionaries::make_orthonormal_sequence;
    use crate::geometry::sample_sequence_model;
    use crate::rng::RandomStream;
    use crate::selection::selected_lasso;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fast_path_matches_generic_selected_lasso() {
        let mut rng = RandomStream::from_seed(31);
        for p_max in [8usize, 16, 27] {
            let dict = make_orthonormal_sequence(p_max).unwrap();
            let y = sample_sequence_model(&[1.5, -0.8, 0.4], 0.2, p_max, &mut rng);
            let generic =
                selected_lasso(&dict, &dict.combine(&y).unwrap(), 0.2, p_max, 1e-12).unwrap();
            let fast = seq_selected_lasso(&y, 0.2).unwrap();
            assert_eq!(fast.p_hat, generic.p_hat);
            for (a, b) in fast.per_level.iter().zip(&generic.per_level) {
                assert_eq!(a.p, b.p);
                assert_abs_diff_eq!(a.criterion, b.criterion, epsilon = 1e-8);
            }
            let chosen = generic.chosen_fit();
            for j in 0..fast.p_hat {
                assert_abs_diff_eq!(fast.theta[j], chosen.theta[j], epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn zero_observations_select_level_one() {
        let sel = seq_selected_lasso(&[0.0; 32], 0.5).unwrap();
        assert_eq!(sel.p_hat, 1);
        assert!(sel.theta.iter().all(|&t| t == 0.0));
        // criterion reduces to pen(p), monotone in p
        for w in sel.per_level.windows(2) {
            assert!(w[1].criterion > w[0].criterion);
        }
    }

    #[test]
    fn squared_error_examples() {
        assert_eq!(seq_squared_error(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(seq_squared_error(&[1.0, 2.0], &[1.0]), 4.0);
        assert_eq!(seq_squared_error(&[1.0], &[0.0, 3.0]), 10.0);
    }
}
