//! Deterministic-Lasso oracles, the K-functional sandwich, coefficient
//! space membership diagnostics and synthetic-target constructors.

use crate::dictionaries::Dictionary;
use crate::error::{Error, Result};
use crate::geometry::SampleVector;
use crate::rng::RandomStream;
use crate::solver::{k_functional_orthonormal, lasso_cd, soft_threshold_fit, LassoFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetKind {
    PowerLaw,
    Sparse,
    Hypercube,
    Custom,
}

/// Norm certificates recomputed on materialized coefficients.
#[derive(Debug, Clone, Copy)]
pub struct Certificates {
    pub weak_lq: f64,
    pub strong_lq: f64,
    pub besov: f64,
}

/// A synthetic target with known membership certificates.
#[derive(Debug, Clone)]
pub struct TargetSpec {
    pub kind: TargetKind,
    pub q: f64,
    pub r: f64,
    pub radius: f64,
    pub coefficients: Vec<f64>,
    pub certificates: Certificates,
    /// False when r >= 1/q - 1/2 (outside the minimax regime).
    pub minimax_regime: bool,
    pub hypercube: Option<HypercubeParams>,
}

#[derive(Debug, Clone, Copy)]
pub struct HypercubeParams {
    pub p: usize,
    pub d: usize,
    pub m_value: f64,
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 1.0 && q < 2.0) {
        return Err(Error::Parameter(format!("q must lie in (1, 2), got {q}")));
    }
    Ok(())
}

/// `sqrt(sup_J J^{2r} sum_{j >= J} theta_j^2)` with 1-based J.
pub fn besov_norm(theta: &[f64], r: f64) -> f64 {
    let mut tail = 0.0;
    let mut sup: f64 = 0.0;
    for j in (1..=theta.len()).rev() {
        tail += theta[j - 1] * theta[j - 1];
        sup = sup.max((j as f64).powf(2.0 * r) * tail);
    }
    sup.sqrt()
}

/// `(sum_j |theta_j|^q)^{1/q}`.
pub fn strong_lq_norm(theta: &[f64], q: f64) -> f64 {
    assert!(q > 0.0, "q must be > 0");
    theta
        .iter()
        .map(|t| t.abs().powf(q))
        .sum::<f64>()
        .powf(1.0 / q)
}

/// Exact discrete form `max_k k^{1/q} |theta|_(k)` with magnitudes sorted
/// decreasingly.
pub fn weak_lq_norm(theta: &[f64], q: f64) -> f64 {
    assert!(q > 0.0, "q must be > 0");
    let mut mags: Vec<f64> = theta.iter().map(|t| t.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    mags.iter()
        .enumerate()
        .map(|(k, m)| ((k + 1) as f64).powf(1.0 / q) * m)
        .fold(0.0, f64::max)
}

/// `u = 1/r - q (1 + 1/(2r))`; positive exactly when r < 1/q - 1/2.
pub fn u_param(q: f64, r: f64) -> f64 {
    assert!(r > 0.0 && q > 0.0, "need q > 0 and r > 0");
    1.0 / r - q * (1.0 + 1.0 / (2.0 * r))
}

fn certificates(theta: &[f64], q: f64, r: f64) -> Certificates {
    Certificates {
        weak_lq: weak_lq_norm(theta, q),
        strong_lq: strong_lq_norm(theta, q),
        besov: besov_norm(theta, r),
    }
}

/// Power-law coefficients `theta_j = c j^{-1/q}` with c chosen so the
/// larger of the weak-lq and Besov certificates equals `radius`.
pub fn make_power_law_target(q: f64, r: f64, radius: f64, length: usize) -> Result<TargetSpec> {
    check_q(q)?;
    if !(r > 0.0) || !(radius > 0.0) || length == 0 {
        return Err(Error::Parameter(
            "need r > 0, R > 0 and a positive length".into(),
        ));
    }
    let base: Vec<f64> = (1..=length).map(|j| (j as f64).powf(-1.0 / q)).collect();
    let scale = radius / weak_lq_norm(&base, q).max(besov_norm(&base, r));
    let coefficients: Vec<f64> = base.iter().map(|b| scale * b).collect();
    let certs = certificates(&coefficients, q, r);
    Ok(TargetSpec {
        kind: TargetKind::PowerLaw,
        q,
        r,
        radius,
        minimax_regime: r < 1.0 / q - 0.5,
        certificates: certs,
        coefficients,
        hypercube: None,
    })
}

/// `k` leading coefficients equal to `value`, the rest zero.
pub fn make_sparse_target(
    q: f64,
    r: f64,
    k: usize,
    value: f64,
    length: usize,
) -> Result<TargetSpec> {
    check_q(q)?;
    if k > length || length == 0 {
        return Err(Error::Parameter(format!(
            "sparse target needs k <= length, got k={k}, length={length}"
        )));
    }
    let mut coefficients = vec![0.0; length];
    coefficients[..k].fill(value);
    let certs = certificates(&coefficients, q, r);
    Ok(TargetSpec {
        kind: TargetKind::Sparse,
        q,
        r,
        radius: certs.weak_lq.max(certs.besov),
        minimax_regime: r < 1.0 / q - 0.5,
        certificates: certs,
        coefficients,
        hypercube: None,
    })
}

/// Wrap explicit coefficients.
pub fn make_custom_target(q: f64, r: f64, coefficients: Vec<f64>) -> Result<TargetSpec> {
    check_q(q)?;
    let certs = certificates(&coefficients, q, r);
    Ok(TargetSpec {
        kind: TargetKind::Custom,
        q,
        r,
        radius: certs.weak_lq.max(certs.besov),
        minimax_regime: r < 1.0 / q - 0.5,
        certificates: certs,
        coefficients,
        hypercube: None,
    })
}

/// Least-favorable hypercube vertex: `d` coordinates of magnitude
/// `M = eps sqrt(u ln(R/eps))` on a uniformly random support among the
/// first `p = 2^J` coordinates, with `J` and `K = log2 d` floored from
/// `log2(R/M)`.
pub fn hypercube_target(
    q: f64,
    r: f64,
    radius: f64,
    eps: f64,
    rng: &mut RandomStream,
) -> Result<TargetSpec> {
    check_q(q)?;
    if !(r > 0.0) || !(radius > 0.0) || !(eps > 0.0) {
        return Err(Error::Parameter("need r > 0, R > 0 and eps > 0".into()));
    }
    let u = u_param(q, r);
    if u <= 0.0 {
        return Err(Error::Regime(format!(
            "u = 1/r - q(1 + 1/(2r)) = {u:.6} must be > 0 (requires r < 1/q - 1/2)"
        )));
    }
    let snr = radius / eps;
    let floor = (std::f64::consts::E * std::f64::consts::E).max(u * u);
    if snr < floor {
        return Err(Error::Regime(format!(
            "signal-to-noise ratio R/eps = {snr:.6} violates R/eps >= max(e^2, u^2) = {floor:.6}"
        )));
    }
    let m_value = eps * (u * snr.ln()).sqrt();
    let log_ratio = (radius / m_value).log2();
    let j_exp = ((2.0 - q) / (2.0 * r) * log_ratio).floor();
    let k_exp = (q * log_ratio).floor().max(0.0);
    if j_exp > 30.0 {
        return Err(Error::Regime(format!(
            "hypercube dimension 2^{j_exp} too large to materialize at desk scale"
        )));
    }
    let p = 1usize << (j_exp.max(0.0) as u32);
    let d = (1usize << (k_exp as u32)).min(p);
    debug_assert!(d <= p);

    let mut coefficients = vec![0.0; p];
    for idx in rng.sample_indices(p, d) {
        coefficients[idx] = m_value;
    }
    let certs = certificates(&coefficients, q, r);
    debug_assert!(certs.strong_lq <= radius * (1.0 + 1e-10));
    debug_assert!(certs.besov <= radius * (1.0 + 1e-10));
    Ok(TargetSpec {
        kind: TargetKind::Hypercube,
        q,
        r,
        radius,
        minimax_regime: true,
        certificates: certs,
        coefficients,
        hypercube: Some(HypercubeParams { p, d, m_value }),
    })
}

/// `L = inf_h (||f - h||^2 + lambda ||h||_1)` over the dictionary span,
/// via the certified solver on the noiseless target.
pub fn deterministic_lasso(
    dictionary: &Dictionary,
    f_on_design: &SampleVector,
    lambda: f64,
    tol: f64,
) -> Result<(f64, LassoFit)> {
    let fit = lasso_cd(
        dictionary,
        f_on_design,
        lambda,
        tol,
        crate::solver::DEFAULT_MAX_ITER,
    )?;
    Ok((fit.objective, fit))
}

/// Closed-form deterministic Lasso in the orthonormal representation,
/// truncated at level `p`: the minimizer is the half-threshold
/// `theta_j = sign(theta*_j) max(|theta*_j| - lambda/2, 0)` and the tail
/// beyond `p` is unapproximated.
pub fn deterministic_lasso_orthonormal(
    theta_star: &[f64],
    p: usize,
    lambda: f64,
) -> (f64, Vec<f64>) {
    let p = p.min(theta_star.len());
    let theta = soft_threshold_fit(&theta_star[..p], lambda);
    let mut value = lambda * theta.iter().map(|t| t.abs()).sum::<f64>();
    for (j, &star) in theta_star.iter().enumerate() {
        let fit = if j < p { theta[j] } else { 0.0 };
        value += (star - fit) * (star - fit);
    }
    (value, theta)
}

#[derive(Debug, Clone, Copy)]
pub struct SandwichCheck {
    pub lower: f64,
    pub l_value: f64,
    pub upper: f64,
}

impl SandwichCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.lower <= self.l_value + tol && self.l_value <= self.upper + tol
    }
}

/// Verify `1/2 inf_d (K^2 + lambda^2/(2 d^2)) <= L <= inf_d (K^2 + lambda^2/(4 d^2))`
/// in the orthonormal representation, evaluating both infima on a
/// geometric delta grid widened until the minimizer is interior (or the
/// boundary value drops below `tol`).
pub fn k_sandwich_check(
    f_coeffs: &[f64],
    lambda: f64,
    delta_grid: &[f64],
    tol: f64,
) -> Result<SandwichCheck> {
    if delta_grid.is_empty() || delta_grid.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::Parameter(
            "delta grid must be positive and nonempty".into(),
        ));
    }
    let (l_value, _) = deterministic_lasso_orthonormal(f_coeffs, f_coeffs.len(), lambda);

    let grid_inf = |obj: &dyn Fn(f64) -> f64| -> Result<f64> {
        let ratio = 2.0f64.powf(0.25);
        let mut lo = delta_grid.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut hi = delta_grid.iter().cloned().fold(0.0f64, f64::max);
        loop {
            let mut best = f64::INFINITY;
            let mut best_d = lo;
            let mut d = lo;
            while d <= hi * (1.0 + 1e-12) {
                let v = obj(d);
                if v < best {
                    best = v;
                    best_d = d;
                }
                d *= ratio;
            }
            let at_lo = best_d <= lo * (1.0 + 1e-9);
            let at_hi = best_d >= hi / (1.0 + 1e-9);
            if !(at_lo || at_hi) || best <= tol {
                return Ok(best);
            }
            if at_lo {
                lo /= ratio.powi(8);
            }
            if at_hi {
                hi *= ratio.powi(8);
            }
            if hi / lo > 2.0f64.powi(400) {
                return Err(Error::GridWidening { lo, hi });
            }
        }
    };

    let k_sq = |d: f64| {
        let (k, _) = k_functional_orthonormal(f_coeffs, d, tol);
        k * k
    };
    let lower = 0.5 * grid_inf(&|d| k_sq(d) + lambda * lambda / (2.0 * d * d))?;
    let upper = grid_inf(&|d| k_sq(d) + lambda * lambda / (4.0 * d * d))?;
    Ok(SandwichCheck {
        lower,
        l_value,
        upper,
    })
}

/// Reference curve `max(R^q lambda^{2-q}, (R p^{-r})^{2q/(2-q)} lambda^{4(1-q)/(2-q)})`
/// without its unknown constant factor.
pub fn interp_rate_bound(p: usize, lambda: f64, radius: f64, q: f64, r: f64) -> Result<f64> {
    check_q(q)?;
    if p == 0 || !(r > 0.0) {
        return Err(Error::Parameter("need p >= 1 and r > 0".into()));
    }
    let term1 = radius.powf(q) * lambda.powf(2.0 - q);
    let term2 = (radius * (p as f64).powf(-r)).powf(2.0 * q / (2.0 - q))
        * lambda.powf(4.0 * (1.0 - q) / (2.0 - q));
    Ok(term1.max(term2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionaries::make_orthonormal_sequence;
    use approx::assert_abs_diff_eq;

    #[test]
    fn besov_norm_examples() {
        let mut theta = vec![0.0; 10];
        theta[0] = 1.0;
        assert_eq!(besov_norm(&theta, 0.7), 1.0);
        assert_eq!(besov_norm(&[0.0; 5], 0.3), 0.0);

        // quadratic-time oracle
        let theta: Vec<f64> = (1..=100).map(|j| 1.0 / j as f64).collect();
        let r = 0.25;
        let mut oracle: f64 = 0.0;
        for j_start in 1..=100usize {
            let tail: f64 = (j_start..=100).map(|j| theta[j - 1] * theta[j - 1]).sum();
            oracle = oracle.max((j_start as f64).powf(2.0 * r) * tail);
        }
        assert_abs_diff_eq!(besov_norm(&theta, r), oracle.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn lq_norm_examples() {
        for &q in &[1.2, 1.5, 1.8] {
            assert_eq!(strong_lq_norm(&[1.0], q), 1.0);
            assert_eq!(weak_lq_norm(&[1.0], q), 1.0);
        }
        let mut rng = crate::rng::RandomStream::from_seed(1);
        for _ in 0..100 {
            let theta = rng.normal_vec(20);
            for &q in &[1.2, 1.5, 1.8] {
                assert!(weak_lq_norm(&theta, q) <= strong_lq_norm(&theta, q) * (1.0 + 1e-12));
            }
        }
        // order-statistics identity: theta_j = j^{-1/q} has weak norm 1
        for &q in &[1.2, 1.5, 1.8] {
            let theta: Vec<f64> = (1..=50).map(|j| (j as f64).powf(-1.0 / q)).collect();
            assert_abs_diff_eq!(weak_lq_norm(&theta, q), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn u_param_examples() {
        assert_abs_diff_eq!(u_param(1.0, 0.25), 1.0, epsilon = 1e-12);
        // u < 0 here because r = 0.2 exceeds 1/q - 1/2
        assert_abs_diff_eq!(u_param(1.5, 0.2), -0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(u_param(1e-9, 0.25), 4.0, epsilon = 1e-6);
    }

    #[test]
    fn power_law_target_certificates() {
        let spec = make_power_law_target(1.5, 0.1, 1.0, 256).unwrap();
        assert!(spec.certificates.weak_lq <= 1.0 + 1e-10);
        assert!(spec.certificates.besov <= 1.0 + 1e-10);
        let active = spec.certificates.weak_lq.max(spec.certificates.besov);
        assert!(active >= 0.99, "no certificate is active: {active}");
        assert!(spec.minimax_regime);

        let doubled = make_power_law_target(1.5, 0.1, 2.0, 256).unwrap();
        for (a, b) in spec.coefficients.iter().zip(&doubled.coefficients) {
            assert_abs_diff_eq!(2.0 * a, *b, epsilon = 1e-12);
        }
    }

    #[test]
    fn hypercube_target_examples() {
        let mut rng = crate::rng::RandomStream::from_seed(3);
        let spec = hypercube_target(1.5, 0.1, 1.0, 0.01, &mut rng).unwrap();
        let hc = spec.hypercube.unwrap();
        assert!(hc.d <= hc.p);
        let nonzeros: Vec<f64> = spec
            .coefficients
            .iter()
            .cloned()
            .filter(|&v| v != 0.0)
            .collect();
        assert_eq!(nonzeros.len(), hc.d);
        assert!(nonzeros.iter().all(|&v| v == hc.m_value));
        // strong-lq membership: d M^q <= R^q
        let strong_q = hc.d as f64 * hc.m_value.powf(1.5);
        assert!(strong_q <= 1.0 + 1e-12);
        assert!(spec.certificates.strong_lq <= 1.0 + 1e-10);
        assert!(spec.certificates.besov <= 1.0 + 1e-10);
    }

    #[test]
    fn hypercube_regime_errors_name_the_inequality() {
        let mut rng = crate::rng::RandomStream::from_seed(4);
        match hypercube_target(1.5, 0.2, 1.0, 0.01, &mut rng) {
            Err(Error::Regime(msg)) => assert!(msg.contains("u")),
            other => panic!("expected regime error, got {other:?}"),
        }
        match hypercube_target(1.5, 0.1, 1.0, 0.9, &mut rng) {
            Err(Error::Regime(msg)) => assert!(msg.contains("R/eps")),
            other => panic!("expected regime error, got {other:?}"),
        }
    }

    #[test]
    fn deterministic_lasso_orthonormal_closed_form() {
        let (l, theta) = deterministic_lasso_orthonormal(&[1.0, 0.2], 2, 1.0);
        assert_eq!(theta, vec![0.5, 0.0]);
        assert_abs_diff_eq!(l, 0.79, epsilon = 1e-12);
    }

    #[test]
    fn deterministic_lasso_solver_matches_closed_form() {
        let dict = make_orthonormal_sequence(2).unwrap();
        let f = dict.combine(&[1.0, 0.2]).unwrap();
        let (l, fit) = deterministic_lasso(&dict, &f, 1.0, 1e-12).unwrap();
        assert_abs_diff_eq!(l, 0.79, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.theta[0], 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.theta[1], 0.0, epsilon = 1e-10);
    }

    #[test]
    fn deterministic_lasso_zero_when_target_in_span() {
        let dict = make_orthonormal_sequence(3).unwrap();
        let f = dict.combine(&[0.3, -0.7, 0.1]).unwrap();
        let (l, _) = deterministic_lasso(&dict, &f, 0.0, 1e-12).unwrap();
        assert!(l <= 1e-12);
    }

    #[test]
    fn oracle_curve_is_concave_nondecreasing_in_lambda() {
        let theta = [1.0, -0.6, 0.3, 0.1, -0.05];
        let grid: Vec<f64> = (0..30).map(|i| 0.05 * i as f64).collect();
        let values: Vec<f64> = grid
            .iter()
            .map(|&l| deterministic_lasso_orthonormal(&theta, 5, l).0)
            .collect();
        for w in values.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
        for w in values.windows(3) {
            // midpoint concavity as a pointwise inf of affine functions
            assert!(w[1] >= 0.5 * (w[0] + w[2]) - 1e-10);
        }
    }

    #[test]
    fn sandwich_examples() {
        let check = k_sandwich_check(&[0.0; 4], 0.7, &[1.0], 1e-6).unwrap();
        assert!(check.holds(1e-4));
        assert!(check.l_value.abs() <= 1e-12);
        assert!(check.upper <= 1e-4);

        let grid: Vec<f64> = (-10..=10).map(|k| 2.0f64.powi(k)).collect();
        let check = k_sandwich_check(&[1.0], 0.5, &grid, 1e-8).unwrap();
        assert!(check.holds(1e-4), "{check:?}");

        let mut rng = crate::rng::RandomStream::from_seed(5);
        for _ in 0..5 {
            let f = rng.normal_vec(10);
            let lambda = rng.uniform() * 2.0 + 0.01;
            let check = k_sandwich_check(&f, lambda, &grid, 1e-8).unwrap();
            assert!(check.holds(1e-4), "{check:?}");
        }
    }

    #[test]
    fn interp_rate_bound_examples() {
        let (q, r, radius, p) = (1.5, 0.2, 1.0, 64usize);
        // crossover lambda: R = lambda p^{2r/q}
        let lambda = radius / (p as f64).powf(2.0 * r / q);
        let term1 = radius.powf(q) * lambda.powf(2.0 - q);
        let term2 = (radius * (p as f64).powf(-r)).powf(2.0 * q / (2.0 - q))
            * lambda.powf(4.0 * (1.0 - q) / (2.0 - q));
        assert_abs_diff_eq!(term1, term2, epsilon = 1e-10);
        assert_abs_diff_eq!(
            interp_rate_bound(p, lambda, radius, q, r).unwrap(),
            term1,
            epsilon = 1e-10
        );

        // large p: the first term dominates and scales as lambda^{2-q}
        let big = interp_rate_bound(1 << 20, 0.1, radius, q, r).unwrap();
        assert_abs_diff_eq!(big, radius.powf(q) * 0.1f64.powf(0.5), epsilon = 1e-12);

        assert!(interp_rate_bound(16, 0.3, 0.0, q, r).unwrap() == 0.0);
    }
}
