//! Minimization of `||y - Phi theta||^2 + lambda ||theta||_1` under the
//! empirical norm, with a KKT certificate.
//!
//! The objective keeps the 1/n factor of the empirical norm, so the KKT
//! condition compares `2 <phi_j, r>` against `lambda` directly and the
//! `lambda_p = 4 eps (sqrt(ln p) + 1)` schedule plugs in unchanged.

use crate::dictionaries::Dictionary;
use crate::error::{Error, Result};
use crate::geometry::SampleVector;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// One penalized fit: coefficients, objective value and the optimality
/// certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub theta: Vec<f64>,
    pub lambda: f64,
    pub objective: f64,
    pub kkt_violation: f64,
    pub iterations: usize,
    pub fitted: SampleVector,
}

impl LassoFit {
    pub fn l1_norm(&self) -> f64 {
        self.theta.iter().map(|t| t.abs()).sum()
    }

    pub fn support_size(&self) -> usize {
        self.theta.iter().filter(|t| **t != 0.0).count()
    }
}

fn soft(x: f64, thresh: f64) -> f64 {
    if x > thresh {
        x - thresh
    } else if x < -thresh {
        x + thresh
    } else {
        0.0
    }
}

struct Problem<'a> {
    cols: Vec<&'a [f64]>,
    col_sq: Vec<f64>, // empirical squared norms
    n: f64,
}

impl<'a> Problem<'a> {
    fn new(dictionary: &'a Dictionary, y: &'a SampleVector) -> Result<Self> {
        if !dictionary.is_normalized() {
            return Err(Error::Parameter(
                "lasso_cd requires a normalized dictionary".into(),
            ));
        }
        if y.len() != dictionary.design().n() {
            return Err(Error::DimensionMismatch {
                expected: dictionary.design().n(),
                got: y.len(),
            });
        }
        let n = dictionary.design().n() as f64;
        let cols: Vec<&[f64]> = dictionary.columns().iter().map(|c| c.values()).collect();
        let col_sq = cols
            .iter()
            .map(|c| c.iter().map(|v| v * v).sum::<f64>() / n)
            .collect();
        Ok(Self { cols, col_sq, n })
    }

    fn inner_with_residual(&self, j: usize, residual: &[f64]) -> f64 {
        self.cols[j]
            .iter()
            .zip(residual)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / self.n
    }

    /// Max subgradient violation at `theta` given its residual.
    fn kkt_violation(&self, theta: &[f64], residual: &[f64], lambda: f64) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.cols.len() {
            let corr = 2.0 * self.inner_with_residual(j, residual);
            let v = if theta[j] != 0.0 {
                (corr - lambda * theta[j].signum()).abs()
            } else {
                (corr.abs() - lambda).max(0.0)
            };
            worst = worst.max(v);
        }
        worst
    }

    fn objective(&self, theta: &[f64], residual: &[f64], lambda: f64) -> f64 {
        let gamma = residual.iter().map(|r| r * r).sum::<f64>() / self.n;
        gamma + lambda * theta.iter().map(|t| t.abs()).sum::<f64>()
    }

    /// One coordinate-descent pass over `indices`; returns the largest
    /// coordinate change.
    fn pass(&self, indices: &[usize], theta: &mut [f64], residual: &mut [f64], lambda: f64) -> f64 {
        let mut max_delta = 0.0f64;
        for &j in indices {
            let old = theta[j];
            let g = self.inner_with_residual(j, residual) + old * self.col_sq[j];
            let new = soft(g, lambda / 2.0) / self.col_sq[j];
            if new != old {
                let delta = new - old;
                for (r, &c) in residual.iter_mut().zip(self.cols[j]) {
                    *r -= delta * c;
                }
                theta[j] = new;
                max_delta = max_delta.max(delta.abs());
            }
        }
        max_delta
    }
}

fn lasso_cd_impl(
    dictionary: &Dictionary,
    y: &SampleVector,
    lambda: f64,
    tol: f64,
    max_iter: usize,
    warm: Option<&[f64]>,
    mut objective_trace: Option<&mut Vec<f64>>,
) -> Result<LassoFit> {
    if lambda < 0.0 {
        return Err(Error::Parameter(format!(
            "lambda must be >= 0, got {lambda}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tol must be > 0, got {tol}")));
    }
    let problem = Problem::new(dictionary, y)?;
    let p = problem.cols.len();

    let mut theta = vec![0.0; p];
    if let Some(w) = warm {
        theta[..w.len().min(p)].copy_from_slice(&w[..w.len().min(p)]);
    }
    let mut residual: Vec<f64> = y.values().to_vec();
    for j in 0..p {
        if theta[j] != 0.0 {
            for (r, &c) in residual.iter_mut().zip(problem.cols[j]) {
                *r -= theta[j] * c;
            }
        }
    }

    let all: Vec<usize> = (0..p).collect();
    let mut iterations = 0usize;
    let mut kkt = f64::INFINITY;
    if let Some(trace) = objective_trace.as_deref_mut() {
        trace.push(problem.objective(&theta, &residual, lambda));
    }

    while iterations < max_iter {
        problem.pass(&all, &mut theta, &mut residual, lambda);
        iterations += 1;
        if let Some(trace) = objective_trace.as_deref_mut() {
            trace.push(problem.objective(&theta, &residual, lambda));
        }

        // Sweep the current active set until it stabilizes before paying
        // for another full pass.
        let active: Vec<usize> = (0..p).filter(|&j| theta[j] != 0.0).collect();
        if !active.is_empty() {
            while iterations < max_iter {
                let delta = problem.pass(&active, &mut theta, &mut residual, lambda);
                iterations += 1;
                if let Some(trace) = objective_trace.as_deref_mut() {
                    trace.push(problem.objective(&theta, &residual, lambda));
                }
                if delta <= tol / 4.0 {
                    break;
                }
            }
        }

        kkt = problem.kkt_violation(&theta, &residual, lambda);
        if kkt <= tol {
            break;
        }
    }

    let objective = problem.objective(&theta, &residual, lambda);
    let fitted = SampleVector::new(
        y.values()
            .iter()
            .zip(&residual)
            .map(|(yi, ri)| yi - ri)
            .collect(),
    );
    let fit = LassoFit {
        theta,
        lambda,
        objective,
        kkt_violation: kkt,
        iterations,
        fitted,
    };
    if kkt <= tol {
        Ok(fit)
    } else {
        Err(Error::NonConvergence {
            kkt_violation: kkt,
            iterations,
            best: Box::new(fit),
        })
    }
}

/// Cyclic coordinate descent with active-set sweeps. Deterministic given
/// its inputs; returns a fit whose `kkt_violation` is at most `tol`.
pub fn lasso_cd(
    dictionary: &Dictionary,
    y: &SampleVector,
    lambda: f64,
    tol: f64,
    max_iter: usize,
) -> Result<LassoFit> {
    lasso_cd_impl(dictionary, y, lambda, tol, max_iter, None, None)
}

/// Same solver started from a previous coefficient vector (padded with
/// zeros); nested truncations make this valid across dyadic levels.
pub fn lasso_cd_warm(
    dictionary: &Dictionary,
    y: &SampleVector,
    lambda: f64,
    tol: f64,
    max_iter: usize,
    warm: &[f64],
) -> Result<LassoFit> {
    lasso_cd_impl(dictionary, y, lambda, tol, max_iter, Some(warm), None)
}

/// Recompute the optimality certificate of a fit from scratch; 0 at an
/// exact optimum.
pub fn kkt_residual(dictionary: &Dictionary, y: &SampleVector, fit: &LassoFit) -> Result<f64> {
    let problem = Problem::new(dictionary, y)?;
    if fit.theta.len() != problem.cols.len() {
        return Err(Error::DimensionMismatch {
            expected: problem.cols.len(),
            got: fit.theta.len(),
        });
    }
    let mut residual: Vec<f64> = y.values().to_vec();
    for j in 0..problem.cols.len() {
        if fit.theta[j] != 0.0 {
            for (r, &c) in residual.iter_mut().zip(problem.cols[j]) {
                *r -= fit.theta[j] * c;
            }
        }
    }
    Ok(problem.kkt_violation(&fit.theta, &residual, fit.lambda))
}

/// Closed-form minimizer in the orthonormal representation:
/// `theta_j = sign(y_j) max(|y_j| - lambda/2, 0)`.
pub fn soft_threshold_fit(y_coeffs: &[f64], lambda: f64) -> Vec<f64> {
    y_coeffs.iter().map(|&y| soft(y, lambda / 2.0)).collect()
}

/// `K(f, delta) = inf_theta (||f - theta||_2 + delta ||theta||_1)` in the
/// orthonormal representation, together with an attaining minimizer.
///
/// Every minimizer has soft-threshold form `theta = st(f, t)` with
/// `t = delta * ||f - theta||`, so the infimum is found exactly by
/// scanning the finitely many active-set segments of the threshold `t`
/// and solving the interior stationarity condition in closed form per
/// segment. `tol` is accepted for interface parity; the search is exact
/// to rounding.
pub fn k_functional_orthonormal(f_coeffs: &[f64], delta: f64, _tol: f64) -> (f64, Vec<f64>) {
    assert!(delta >= 0.0, "delta must be >= 0");
    let objective = |t: f64| -> f64 {
        let mut rho_sq = 0.0;
        let mut l1 = 0.0;
        for &f in f_coeffs {
            let m = f.abs();
            let clipped = m.min(t);
            rho_sq += clipped * clipped;
            l1 += (m - t).max(0.0);
        }
        rho_sq.sqrt() + delta * l1
    };

    let mut mags: Vec<f64> = f_coeffs.iter().map(|f| f.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());

    // Boundaries 0 = b_0 < b_1 < ... < b_s = max|f_j|.
    let mut boundaries = vec![0.0];
    for &m in mags.iter().rev() {
        if m > *boundaries.last().unwrap() {
            boundaries.push(m);
        }
    }

    let mut best_t = 0.0;
    let mut best_val = objective(0.0);
    let mut consider = |t: f64, val: f64| {
        if val < best_val {
            best_val = val;
            best_t = t;
        }
    };
    for &b in &boundaries[1..] {
        consider(b, objective(b));
    }
    // Interior stationary point per segment: with `a` active coordinates
    // and inactive mass B, rho^2 = B + a t^2 and t = delta * rho gives
    // t = delta * sqrt(B / (1 - delta^2 a)).
    for w in boundaries.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mid = 0.5 * (lo + hi);
        let a = mags.iter().filter(|&&m| m > mid).count() as f64;
        let b_mass: f64 = mags.iter().filter(|&&m| m <= mid).map(|m| m * m).sum();
        let denom = 1.0 - delta * delta * a;
        if denom > 0.0 {
            let t = delta * (b_mass / denom).sqrt();
            if t > lo && t < hi {
                consider(t, objective(t));
            }
        }
    }

    let theta = f_coeffs
        .iter()
        .map(|&f| f.signum() * (f.abs() - best_t).max(0.0))
        .collect();
    (best_val, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionaries::{
        make_gaussian_design, make_orthonormal_sequence, normalize, Dictionary,
    };
    use crate::geometry::{empirical_inner, Design};
    use crate::rng::RandomStream;
    use crate::selection::lambda_p;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_data_gives_zero_fit() {
        let dict = make_orthonormal_sequence(4).unwrap();
        let fit = lasso_cd(&dict, &SampleVector::zeros(4), 0.7, 1e-10, 1000).unwrap();
        assert_eq!(fit.theta, vec![0.0; 4]);
        assert_eq!(fit.objective, 0.0);
    }

    #[test]
    fn unpenalized_orthonormal_recovers_least_squares() {
        let dict = make_orthonormal_sequence(6).unwrap();
        let mut rng = RandomStream::from_seed(1);
        let y = SampleVector::new(rng.normal_vec(6));
        let fit = lasso_cd(&dict, &y, 0.0, 1e-12, 1000).unwrap();
        for j in 0..6 {
            let proj = empirical_inner(dict.column(j), &y, dict.design()).unwrap();
            assert_abs_diff_eq!(fit.theta[j], proj, epsilon = 1e-12);
        }
    }

    /// Brute-force oracle: minimize F over a fine theta grid on [-2, 2]^2.
    fn grid_oracle(dict: &Dictionary, y: &SampleVector, lambda: f64) -> f64 {
        let n = dict.design().n() as f64;
        let steps = 801;
        let mut best = f64::INFINITY;
        for i in 0..steps {
            let t0 = -2.0 + 4.0 * i as f64 / (steps - 1) as f64;
            for j in 0..steps {
                let t1 = -2.0 + 4.0 * j as f64 / (steps - 1) as f64;
                let mut ss = 0.0;
                for k in 0..dict.design().n() {
                    let fitted = t0 * dict.column(0).values()[k] + t1 * dict.column(1).values()[k];
                    let r = y.values()[k] - fitted;
                    ss += r * r;
                }
                let obj = ss / n + lambda * (t0.abs() + t1.abs());
                best = best.min(obj);
            }
        }
        best
    }

    #[test]
    fn matches_grid_oracle_on_spec_instance() {
        let design = Design::new(vec![vec![0.0], vec![1.0]]).unwrap();
        let half = 0.5f64.sqrt();
        let dict = normalize(
            Dictionary::new(
                vec![
                    SampleVector::new(vec![1.0, 0.0]),
                    SampleVector::new(vec![half, half]),
                ],
                design,
                "test",
            )
            .unwrap(),
        )
        .unwrap();
        let y = SampleVector::new(vec![1.0, 0.0]);
        let fit = lasso_cd(&dict, &y, 0.4, 1e-10, 10_000).unwrap();
        let oracle = grid_oracle(&dict, &y, 0.4);
        assert!(
            (fit.objective - oracle).abs() <= 1e-4,
            "{} vs {}",
            fit.objective,
            oracle
        );
        assert!(fit.objective <= oracle + 1e-12);
    }

    #[test]
    fn kkt_residual_examples() {
        let mut rng = RandomStream::from_seed(5);
        let dict = make_gaussian_design(30, 10, &mut rng).unwrap();
        let y = SampleVector::new(rng.normal_vec(30));
        let lambda = lambda_p(10, 0.2).unwrap();
        let fit = lasso_cd(&dict, &y, lambda, 1e-10, 100_000).unwrap();
        assert!(kkt_residual(&dict, &y, &fit).unwrap() <= 1e-10);

        // theta = 0 is optimal once lambda dominates all correlations
        let max_corr = (0..10)
            .map(|j| {
                2.0 * empirical_inner(dict.column(j), &y, dict.design())
                    .unwrap()
                    .abs()
            })
            .fold(0.0f64, f64::max);
        let zero_fit = LassoFit {
            theta: vec![0.0; 10],
            lambda: max_corr + 0.1,
            objective: 0.0,
            kkt_violation: 0.0,
            iterations: 0,
            fitted: SampleVector::zeros(30),
        };
        assert_eq!(kkt_residual(&dict, &y, &zero_fit).unwrap(), 0.0);

        // certificate is sensitive to perturbing one coordinate
        let mut perturbed = fit.clone();
        perturbed.theta[0] += 0.1;
        assert!(
            kkt_residual(&dict, &y, &perturbed).unwrap() > kkt_residual(&dict, &y, &fit).unwrap()
        );
    }

    #[test]
    fn large_lambda_returns_zero() {
        let mut rng = RandomStream::from_seed(6);
        let dict = make_gaussian_design(25, 8, &mut rng).unwrap();
        let y = SampleVector::new(rng.normal_vec(25));
        let max_corr = (0..8)
            .map(|j| {
                2.0 * empirical_inner(dict.column(j), &y, dict.design())
                    .unwrap()
                    .abs()
            })
            .fold(0.0f64, f64::max);
        let fit = lasso_cd(&dict, &y, max_corr * 1.0001, 1e-10, 1000).unwrap();
        assert_eq!(fit.theta, vec![0.0; 8]);
    }

    #[test]
    fn objective_is_monotone_across_passes() {
        let mut rng = RandomStream::from_seed(7);
        let dict = make_gaussian_design(40, 20, &mut rng).unwrap();
        let y = SampleVector::new(rng.normal_vec(40));
        let mut trace = Vec::new();
        lasso_cd_impl(&dict, &y, 0.3, 1e-10, 10_000, None, Some(&mut trace)).unwrap();
        for w in trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "objective increased: {w:?}");
        }
    }

    #[test]
    fn solution_is_homogeneous() {
        let mut rng = RandomStream::from_seed(8);
        let dict = make_gaussian_design(30, 12, &mut rng).unwrap();
        let y = SampleVector::new(rng.normal_vec(30));
        let c = 3.5;
        let yc = SampleVector::new(y.values().iter().map(|v| c * v).collect());
        let fit = lasso_cd(&dict, &y, 0.4, 1e-12, 100_000).unwrap();
        let fit_c = lasso_cd(&dict, &yc, c * 0.4, 1e-12, 100_000).unwrap();
        for j in 0..12 {
            assert_abs_diff_eq!(fit_c.theta[j], c * fit.theta[j], epsilon = 1e-8);
        }
    }

    #[test]
    fn warm_start_agrees_with_cold_start() {
        let mut rng = RandomStream::from_seed(9);
        let dict = make_gaussian_design(30, 12, &mut rng).unwrap();
        let y = SampleVector::new(rng.normal_vec(30));
        let cold = lasso_cd(&dict, &y, 0.3, 1e-12, 100_000).unwrap();
        let warm = lasso_cd_warm(&dict, &y, 0.3, 1e-12, 100_000, &cold.theta[..8]).unwrap();
        for j in 0..12 {
            assert_abs_diff_eq!(cold.theta[j], warm.theta[j], epsilon = 1e-9);
        }
    }

    #[test]
    fn nonconvergence_carries_best_iterate() {
        let mut rng = RandomStream::from_seed(10);
        let dict = make_gaussian_design(20, 10, &mut rng).unwrap();
        let y = SampleVector::new(rng.normal_vec(20));
        match lasso_cd(&dict, &y, 0.01, 1e-14, 1) {
            Err(Error::NonConvergence { best, .. }) => {
                assert_eq!(best.theta.len(), 10);
            }
            other => panic!("expected NonConvergence, got {other:?}"),
        }
    }

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold_fit(&[3.0], 2.0), vec![2.0]);
        assert_eq!(soft_threshold_fit(&[0.4], 1.0), vec![0.0]);
        assert_eq!(soft_threshold_fit(&[-3.0], 2.0), vec![-2.0]);
    }

    #[test]
    fn lasso_matches_soft_threshold_on_orthonormal() {
        let mut rng = RandomStream::from_seed(11);
        for trial in 0..10 {
            let p = 16;
            let dict = make_orthonormal_sequence(p).unwrap();
            let coeffs = rng.normal_vec(p);
            let lambda = 0.2 + 0.3 * trial as f64 / 10.0;
            // on-design observations with those coefficients
            let y = dict.combine(&coeffs).unwrap();
            let fit = lasso_cd(&dict, &y, lambda, 1e-12, 100_000).unwrap();
            let closed = soft_threshold_fit(&coeffs, lambda);
            for j in 0..p {
                assert_abs_diff_eq!(fit.theta[j], closed[j], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn k_functional_examples() {
        let (k, theta) = k_functional_orthonormal(&[1.0, -0.5], 0.0, 1e-12);
        assert_eq!(k, 0.0);
        assert_eq!(theta, vec![1.0, -0.5]);

        let (k, theta) = k_functional_orthonormal(&[1.0], 0.5, 1e-12);
        assert_abs_diff_eq!(k, 0.5, epsilon = 1e-12);
        assert_eq!(theta, vec![1.0]);

        let (k, theta) = k_functional_orthonormal(&[1.0], 2.0, 1e-12);
        assert_abs_diff_eq!(k, 1.0, epsilon = 1e-12);
        assert_eq!(theta, vec![0.0]);
    }

    #[test]
    fn k_functional_matches_grid_search() {
        let mut rng = RandomStream::from_seed(12);
        let mut f = rng.normal_vec(3);
        let max = f.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
        for v in &mut f {
            *v *= 1.5 / max; // keep the minimizer inside the grid box
        }
        for &delta in &[0.1, 0.4, 0.9, 1.5] {
            let (k, theta) = k_functional_orthonormal(&f, delta, 1e-12);
            // value attained by the returned minimizer
            let rho: f64 = f
                .iter()
                .zip(&theta)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let attained = rho + delta * theta.iter().map(|t| t.abs()).sum::<f64>();
            assert_abs_diff_eq!(k, attained, epsilon = 1e-12);

            // dense grid over theta in [-2, 2]^3
            let mut grid_best = f64::INFINITY;
            let steps = 81;
            for i in 0..steps {
                for j in 0..steps {
                    for l in 0..steps {
                        let th = [
                            -2.0 + 4.0 * i as f64 / (steps - 1) as f64,
                            -2.0 + 4.0 * j as f64 / (steps - 1) as f64,
                            -2.0 + 4.0 * l as f64 / (steps - 1) as f64,
                        ];
                        let rho: f64 = f
                            .iter()
                            .zip(&th)
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum::<f64>()
                            .sqrt();
                        let val = rho + delta * th.iter().map(|t| t.abs()).sum::<f64>();
                        grid_best = grid_best.min(val);
                    }
                }
            }
            assert!(k <= grid_best + 1e-9, "k={k} grid={grid_best}");
            assert!(grid_best <= k + 0.1); // grid resolution slack
        }
    }

    #[test]
    fn k_functional_monotone_and_bounded() {
        let mut rng = RandomStream::from_seed(13);
        let f = rng.normal_vec(10);
        let norm2: f64 = f.iter().map(|v| v * v).sum::<f64>().sqrt();
        let norm1: f64 = f.iter().map(|v| v.abs()).sum();
        let mut prev = 0.0;
        for i in 0..20 {
            let delta = i as f64 * 0.1;
            let (k, _) = k_functional_orthonormal(&f, delta, 1e-12);
            assert!(k + 1e-12 >= prev, "not monotone at delta={delta}");
            assert!(k <= norm2.min(delta * norm1) + 1e-12);
            prev = k;
        }
    }
}
