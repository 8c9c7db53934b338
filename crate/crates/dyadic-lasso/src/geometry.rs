//! Empirical Hilbert-space primitives over a fixed design.
//!
//! All norms and inner products carry the 1/n factor of the empirical
//! scalar product `<u,v> = sum_i u_i v_i / n`. The least-squares
//! criterion is stored as `gamma_emp(y, h) = ||y - h||^2`; the additive
//! `-||y||^2` constant of the textbook form is dropped, which leaves
//! every argmin and every criterion difference unchanged.

use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// Fixed design points defining the empirical inner product.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    points: Vec<Vec<f64>>,
    dim: usize,
}

impl Design {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Parameter("design needs at least one point".into()));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::Parameter(
                "design points must have dimension >= 1".into(),
            ));
        }
        if let Some(bad) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.len(),
            });
        }
        Ok(Self { points, dim })
    }

    /// Regular 1-d grid x_i = (i - 1/2)/n on (0, 1).
    pub fn grid_1d(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("grid size must be >= 1".into()));
        }
        Self::new((0..n).map(|i| vec![(i as f64 + 0.5) / n as f64]).collect())
    }

    /// n i.i.d. uniform points on (0, 1)^d.
    pub fn uniform_random(n: usize, d: usize, rng: &mut RandomStream) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::Parameter("need n >= 1 and d >= 1".into()));
        }
        Self::new(
            (0..n)
                .map(|_| (0..d).map(|_| rng.uniform()).collect())
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }
}

/// A function evaluated on the design (or a vector of observations).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleVector {
    values: Vec<f64>,
}

impl SampleVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl From<Vec<f64>> for SampleVector {
    fn from(values: Vec<f64>) -> Self {
        Self::new(values)
    }
}

/// Noise level epsilon of the general framework; sigma/sqrt(n) in
/// regression mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseLevel(f64);

impl NoiseLevel {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::Parameter(format!(
                "noise level must be > 0, got {eps}"
            )));
        }
        Ok(Self(eps))
    }

    pub fn from_regression(sigma: f64, design: &Design) -> Result<Self> {
        Self::new(sigma / (design.n() as f64).sqrt())
    }

    pub fn eps(&self) -> f64 {
        self.0
    }
}

fn check_len(v: &SampleVector, design: &Design) -> Result<()> {
    if v.len() != design.n() {
        return Err(Error::DimensionMismatch {
            expected: design.n(),
            got: v.len(),
        });
    }
    Ok(())
}

/// `<u,v> = sum_i u_i v_i / n`.
pub fn empirical_inner(u: &SampleVector, v: &SampleVector, design: &Design) -> Result<f64> {
    check_len(u, design)?;
    check_len(v, design)?;
    let dot: f64 = u.values().iter().zip(v.values()).map(|(a, b)| a * b).sum();
    Ok(dot / design.n() as f64)
}

/// `||u|| = sqrt(sum_i u_i^2 / n)`.
pub fn empirical_norm(u: &SampleVector, design: &Design) -> Result<f64> {
    Ok(empirical_inner(u, u, design)?.sqrt())
}

/// Least-squares criterion `||y - h||^2` (shifted by `||y||^2` relative
/// to the `-2Y(h) + ||h||^2` form; differences between criteria are
/// unaffected).
pub fn gamma_emp(y: &SampleVector, h: &SampleVector, design: &Design) -> Result<f64> {
    check_len(y, design)?;
    check_len(h, design)?;
    let ss: f64 = y
        .values()
        .iter()
        .zip(h.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(ss / design.n() as f64)
}

/// Draw `y_i = f(x_i) + sigma * xi_i` with independent standard Gaussians.
pub fn sample_regression(
    f_on_design: &SampleVector,
    sigma: f64,
    design: &Design,
    rng: &mut RandomStream,
) -> Result<SampleVector> {
    check_len(f_on_design, design)?;
    if sigma < 0.0 {
        return Err(Error::Parameter(format!("sigma must be >= 0, got {sigma}")));
    }
    Ok(SampleVector::new(
        f_on_design
            .values()
            .iter()
            .map(|&f| f + sigma * rng.standard_normal())
            .collect(),
    ))
}

/// First `p` noisy coefficients `y_j = theta*_j + eps * xi_j` of the
/// Gaussian sequence model; coordinates beyond the available target are
/// treated as zero. `eps = 0` is allowed (noiseless copy).
pub fn sample_sequence_model(
    theta_star: &[f64],
    eps: f64,
    p: usize,
    rng: &mut RandomStream,
) -> Vec<f64> {
    (0..p)
        .map(|j| theta_star.get(j).copied().unwrap_or(0.0) + eps * rng.standard_normal())
        .collect()
}
