//! Candidate-function dictionaries evaluated on the design.
//!
//! Columns are kept in a fixed, documented order because the dyadic
//! truncation makes the estimator order-dependent:
//! - `orthonormal_sequence`: coordinate vectors in index order;
//! - `haar_grid`: constant first, then wavelets coarse-to-fine,
//!   left-to-right within a level;
//! - `fourier_grid`: constant, then cos/sin pairs by increasing frequency;
//! - `gaussian_design`: i.i.d. standard normal columns in draw order;
//! - `heaviside`: distinct indicator patterns in enumeration order
//!   (right-open rays first for d = 1).

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{empirical_inner, empirical_norm, Design, SampleVector};
use crate::rng::RandomStream;

#[derive(Debug, Clone)]
pub struct Dictionary {
    columns: Vec<SampleVector>,
    design: Arc<Design>,
    family_tag: String,
    normalized: bool,
}

impl Dictionary {
    pub fn new(columns: Vec<SampleVector>, design: Design, family_tag: &str) -> Result<Self> {
        for col in &columns {
            if col.len() != design.n() {
                return Err(Error::DimensionMismatch {
                    expected: design.n(),
                    got: col.len(),
                });
            }
        }
        Ok(Self {
            columns,
            design: Arc::new(design),
            family_tag: family_tag.to_string(),
            normalized: false,
        })
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    pub fn column(&self, j: usize) -> &SampleVector {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[SampleVector] {
        &self.columns
    }

    pub fn family_tag(&self) -> &str {
        &self.family_tag
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Gram matrix of empirical inner products, row-major.
    pub fn gram(&self) -> Vec<Vec<f64>> {
        let p = self.len();
        let mut g = vec![vec![0.0; p]; p];
        for i in 0..p {
            for j in i..p {
                let v = empirical_inner(&self.columns[i], &self.columns[j], &self.design)
                    .expect("columns match design by construction");
                g[i][j] = v;
                g[j][i] = v;
            }
        }
        g
    }

    /// Linear combination `sum_j theta_j phi_j` on the design.
    pub fn combine(&self, theta: &[f64]) -> Result<SampleVector> {
        if theta.len() > self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: theta.len(),
            });
        }
        let mut out = vec![0.0; self.design.n()];
        for (j, &t) in theta.iter().enumerate() {
            if t != 0.0 {
                for (o, &c) in out.iter_mut().zip(self.columns[j].values()) {
                    *o += t * c;
                }
            }
        }
        Ok(SampleVector::new(out))
    }
}

/// Rescale every column to empirical norm 1.
pub fn normalize(dictionary: Dictionary) -> Result<Dictionary> {
    let Dictionary {
        columns,
        design,
        family_tag,
        ..
    } = dictionary;
    let mut out = Vec::with_capacity(columns.len());
    for (index, col) in columns.into_iter().enumerate() {
        let norm = empirical_norm(&col, &design)?;
        if norm == 0.0 {
            return Err(Error::DegenerateColumn { index });
        }
        out.push(SampleVector::new(
            col.values().iter().map(|v| v / norm).collect(),
        ));
    }
    Ok(Dictionary {
        columns: out,
        design,
        family_tag,
        normalized: true,
    })
}

/// First `p` columns, order preserved.
pub fn truncate(dictionary: &Dictionary, p: usize) -> Result<Dictionary> {
    if p == 0 || p > dictionary.len() {
        return Err(Error::Parameter(format!(
            "truncation level p={p} out of range 1..={}",
            dictionary.len()
        )));
    }
    Ok(Dictionary {
        columns: dictionary.columns[..p].to_vec(),
        design: Arc::clone(&dictionary.design),
        family_tag: dictionary.family_tag.clone(),
        normalized: dictionary.normalized,
    })
}

/// Dyadic truncation levels {1, 2, 4, ...} capped at `p_max`, with
/// `p_max` appended when it is not itself a power of two so the full
/// dictionary stays reachable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyadicLevels {
    levels: Vec<usize>,
}

impl DyadicLevels {
    pub fn levels(&self) -> &[usize] {
        &self.levels
    }
}

pub fn dyadic_levels(p_max: usize) -> Result<DyadicLevels> {
    if p_max == 0 {
        return Err(Error::Parameter("p_max must be >= 1".into()));
    }
    let mut levels = Vec::new();
    let mut p = 1usize;
    while p <= p_max {
        levels.push(p);
        match p.checked_mul(2) {
            Some(next) => p = next,
            None => break,
        }
    }
    if *levels.last().unwrap() != p_max {
        levels.push(p_max);
    }
    Ok(DyadicLevels { levels })
}

/// Orthonormal coordinate basis realized on the identity design with
/// n = p points: column j takes value sqrt(n) at point j and 0 elsewhere.
pub fn make_orthonormal_sequence(p: usize) -> Result<Dictionary> {
    if p == 0 {
        return Err(Error::Parameter("p must be >= 1".into()));
    }
    let design = Design::new((0..p).map(|i| vec![i as f64]).collect())?;
    let scale = (p as f64).sqrt();
    let columns = (0..p)
        .map(|j| {
            let mut v = vec![0.0; p];
            v[j] = scale;
            SampleVector::new(v)
        })
        .collect();
    let mut dict = Dictionary::new(columns, design, "orthonormal")?;
    dict.normalized = true;
    Ok(dict)
}

/// Haar system on the regular grid of n = 2^J points: exactly
/// orthonormal under the empirical inner product.
pub fn make_haar_grid(n: usize) -> Result<Dictionary> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::Parameter(format!(
            "Haar grid needs a power-of-two sample size, got {n}"
        )));
    }
    let design = Design::grid_1d(n)?;
    let mut columns = vec![SampleVector::new(vec![1.0; n])];
    let mut block = n; // points per wavelet support
    while block >= 2 {
        let scale = ((n / block) as f64).sqrt();
        for start in (0..n).step_by(block) {
            let mut v = vec![0.0; n];
            for (i, slot) in v.iter_mut().enumerate().skip(start).take(block) {
                *slot = if i < start + block / 2 { scale } else { -scale };
            }
            columns.push(SampleVector::new(v));
        }
        block /= 2;
    }
    let mut dict = Dictionary::new(columns, design, "haar")?;
    dict.normalized = true;
    Ok(dict)
}

/// Trigonometric system on the regular grid: constant, then cos/sin by
/// frequency, empirically normalized. Requires p <= 2n - 1 so that no
/// column vanishes on the grid.
pub fn make_fourier_grid(n: usize, p: usize) -> Result<Dictionary> {
    if n == 0 || p == 0 {
        return Err(Error::Parameter("need n >= 1 and p >= 1".into()));
    }
    if p > 2 * n - 1 {
        return Err(Error::Parameter(format!(
            "Fourier dictionary on {n} points supports at most {} columns, got {p}",
            2 * n - 1
        )));
    }
    let design = Design::grid_1d(n)?;
    let xs: Vec<f64> = design.points().iter().map(|pt| pt[0]).collect();
    let mut columns = vec![SampleVector::new(vec![1.0; n])];
    let mut freq = 1usize;
    while columns.len() < p {
        let w = 2.0 * std::f64::consts::PI * freq as f64;
        columns.push(SampleVector::new(
            xs.iter().map(|&x| (w * x).cos()).collect(),
        ));
        if columns.len() < p {
            columns.push(SampleVector::new(
                xs.iter().map(|&x| (w * x).sin()).collect(),
            ));
        }
        freq += 1;
    }
    normalize(Dictionary::new(columns, design, "fourier")?)
}

/// i.i.d. standard normal columns on an abstract n-point design, then
/// empirically normalized.
pub fn make_gaussian_design(n: usize, p: usize, rng: &mut RandomStream) -> Result<Dictionary> {
    if n == 0 || p == 0 {
        return Err(Error::Parameter("need n >= 1 and p >= 1".into()));
    }
    let design = Design::grid_1d(n)?;
    let columns = (0..p)
        .map(|_| SampleVector::new(rng.normal_vec(n)))
        .collect();
    normalize(Dictionary::new(columns, design, "gaussian")?)
}

/// All distinct 0/1 columns realizable as x -> 1{<a,x> + b > 0} on the
/// design, before normalization and with the zero pattern removed.
pub fn heaviside_patterns(design: &Design) -> Result<Vec<Vec<f64>>> {
    match design.dim() {
        1 => Ok(heaviside_patterns_1d(design)),
        2 => Ok(heaviside_patterns_2d(design)),
        d => Err(Error::UnsupportedDimension { dim: d }),
    }
}

fn dedup_patterns(raw: Vec<Vec<bool>>) -> Vec<Vec<f64>> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for pat in raw {
        if pat.iter().all(|&b| !b) {
            continue;
        }
        if seen.insert(pat.clone()) {
            out.push(pat.into_iter().map(|b| if b { 1.0 } else { 0.0 }).collect());
        }
    }
    out
}

fn halfline_patterns(coords: &[f64]) -> Vec<Vec<bool>> {
    // Thresholds strictly between consecutive distinct values, plus one
    // beyond each end; both orientations of the ray.
    let mut sorted: Vec<f64> = coords.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted.dedup();
    let span = (sorted.last().unwrap() - sorted.first().unwrap()).max(1.0);
    let mut thresholds = vec![sorted[0] - span];
    for w in sorted.windows(2) {
        thresholds.push(0.5 * (w[0] + w[1]));
    }
    thresholds.push(sorted.last().unwrap() + span);

    let mut raw = Vec::new();
    for &t in &thresholds {
        raw.push(coords.iter().map(|&x| x > t).collect());
        raw.push(coords.iter().map(|&x| x < t).collect());
    }
    raw
}

fn heaviside_patterns_1d(design: &Design) -> Vec<Vec<f64>> {
    let coords: Vec<f64> = design.points().iter().map(|p| p[0]).collect();
    dedup_patterns(halfline_patterns(&coords))
}

fn heaviside_patterns_2d(design: &Design) -> Vec<Vec<f64>> {
    let pts = design.points();
    let n = pts.len();
    // Directions normal to lines through point pairs, slightly rotated to
    // either side so patterns that split the pair are reached too, plus
    // the axis directions.
    let mut dirs: Vec<(f64, f64)> = vec![(1.0, 0.0), (0.0, 1.0)];
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = pts[j][0] - pts[i][0];
            let dy = pts[j][1] - pts[i][1];
            let len = (dx * dx + dy * dy).sqrt();
            if len == 0.0 {
                continue;
            }
            let (ux, uy) = (-dy / len, dx / len);
            for angle in [-1e-7f64, 0.0, 1e-7] {
                let (s, c) = angle.sin_cos();
                dirs.push((ux * c - uy * s, ux * s + uy * c));
            }
        }
    }
    let mut raw = Vec::new();
    for (ax, ay) in dirs {
        let proj: Vec<f64> = pts.iter().map(|p| ax * p[0] + ay * p[1]).collect();
        raw.extend(halfline_patterns(&proj));
    }
    dedup_patterns(raw)
}

/// Enumerated Heaviside ridge dictionary: distinct indicator patterns on
/// the design, deduplicated, zero pattern removed, then normalized.
/// The column count is at most (n+1)^(d+1).
pub fn enumerate_heaviside(design: &Design) -> Result<Dictionary> {
    let patterns = heaviside_patterns(design)?;
    let columns = patterns.into_iter().map(SampleVector::new).collect();
    normalize(Dictionary::new(columns, design.clone(), "heaviside")?)
}
