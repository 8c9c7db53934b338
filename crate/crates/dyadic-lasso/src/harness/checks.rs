//! Direct numerical checks of proof-level facts: the Delta_m supremum
//! bound, two truncation identities, and the Heaviside covering bound.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::dictionaries::{heaviside_patterns, Dictionary};
use crate::error::{Error, Result};
use crate::geometry::Design;
use crate::harness::experiments::pairwise_sum;
use crate::rng::RandomStream;

#[derive(Debug, Clone, Copy)]
pub struct DeltaMCheck {
    pub mc_estimate: f64,
    pub stderr: f64,
    pub bound: f64,
    pub pass: bool,
}

/// MC estimate of `E[sup_{S_m} W] = m eps E[max_j |W(phi_j)|]` against
/// the bound `m eps sqrt(2 ln(2p))`.
///
/// `(W(phi_j))_j` is centered Gaussian with the dictionary's Gram matrix
/// as covariance; draws use a symmetric matrix square root with
/// eigenvalues clipped at 0 (the Gram is PSD up to rounding).
pub fn delta_m_check(
    dictionary: &Dictionary,
    m: usize,
    eps: f64,
    n_rep: usize,
    seed: u64,
) -> Result<DeltaMCheck> {
    if !dictionary.is_normalized() {
        return Err(Error::Parameter(
            "delta_m_check requires a normalized dictionary".into(),
        ));
    }
    if m == 0 || !(eps > 0.0) || n_rep < 2 {
        return Err(Error::Parameter("need m >= 1, eps > 0, n_rep >= 2".into()));
    }
    let p = dictionary.len();
    let gram = dictionary.gram();
    let g = DMatrix::from_fn(p, p, |i, j| gram[i][j]);
    let eig = nalgebra::SymmetricEigen::new(g);
    let sqrt_vals = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let root =
        &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals) * eig.eigenvectors.transpose();

    let scale = m as f64 * eps;
    let sups: Vec<f64> = (0..n_rep)
        .into_par_iter()
        .map(|i| {
            let mut rng = RandomStream::derive(seed, i as u64);
            let z = rng.normal_vec(p);
            let mut max_abs = 0.0f64;
            for row in 0..p {
                let mut w = 0.0;
                for col in 0..p {
                    w += root[(row, col)] * z[col];
                }
                max_abs = max_abs.max(w.abs());
            }
            scale * max_abs
        })
        .collect();

    let n = n_rep as f64;
    let mc_estimate = pairwise_sum(&sups) / n;
    let sq: Vec<f64> = sups
        .iter()
        .map(|s| (s - mc_estimate) * (s - mc_estimate))
        .collect();
    let stderr = (pairwise_sum(&sq) / (n - 1.0) / n).sqrt();
    let bound = scale * (2.0 * (2.0 * p as f64).ln()).sqrt();
    Ok(DeltaMCheck {
        mc_estimate,
        stderr,
        bound,
        pass: mc_estimate - 3.0 * stderr <= bound,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct LemmaChecks {
    pub lemma82_lhs: f64,
    pub lemma82_rhs: f64,
    pub lemma83_lhs: f64,
    pub lemma83_rhs: f64,
}

impl LemmaChecks {
    pub fn pass(&self, tol: f64) -> bool {
        self.lemma82_lhs <= self.lemma82_rhs + tol
            && (self.lemma83_lhs - self.lemma83_rhs).abs() <= tol
    }
}

/// Truncation identities with the integrals in closed form:
/// `int_0^g t 1{|a|>t} dt = min(|a|,g)^2/2` and
/// `int_g^inf 1{|a|>t} dt = max(|a|-g,0)`.
pub fn lemma_identity_checks(a: &[f64], gamma: f64) -> Result<LemmaChecks> {
    if !(gamma > 0.0) {
        return Err(Error::Parameter(format!("gamma must be > 0, got {gamma}")));
    }
    let mut l82_lhs = 0.0;
    let mut l82_rhs = 0.0;
    let mut l83_lhs = 0.0;
    let mut l83_count = 0.0;
    let mut l83_excess = 0.0;
    for &ai in a {
        let m = ai.abs();
        if m <= gamma {
            l82_lhs += m * m;
        }
        let clipped = m.min(gamma);
        l82_rhs += clipped * clipped; // 2 * min^2/2
        if m > gamma {
            l83_lhs += m;
            l83_count += 1.0;
        }
        l83_excess += (m - gamma).max(0.0);
    }
    Ok(LemmaChecks {
        lemma82_lhs: l82_lhs,
        lemma82_rhs: l82_rhs,
        lemma83_lhs: l83_lhs,
        lemma83_rhs: gamma * l83_count + l83_excess,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct PackingRow {
    pub t: f64,
    pub greedy_count: usize,
    pub bound: f64,
    pub pass: bool,
}

/// Greedy t-separated subset of the pre-normalization Heaviside 0/1
/// columns under the empirical norm; its size lower-bounds the covering
/// number, which the bound `(n+1)^{d+1} (4+t)/t` must dominate.
pub fn packing_check(design: &Design, t_grid: &[f64]) -> Result<Vec<PackingRow>> {
    if t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::Parameter("all t must be > 0".into()));
    }
    let patterns = heaviside_patterns(design)?;
    let n = design.n() as f64;
    let d = design.dim();

    let mut rows = Vec::new();
    for &t in t_grid {
        let mut kept: Vec<&Vec<f64>> = Vec::new();
        for pattern in &patterns {
            let separated = kept.iter().all(|k| {
                let dist_sq: f64 = k
                    .iter()
                    .zip(pattern)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    / n;
                dist_sq.sqrt() > t
            });
            if separated {
                kept.push(pattern);
            }
        }
        let bound = (n + 1.0).powi(d as i32 + 1) * (4.0 + t) / t;
        rows.push(PackingRow {
            t,
            greedy_count: kept.len(),
            bound,
            pass: kept.len() as f64 <= bound,
        });
    }
    Ok(rows)
}
