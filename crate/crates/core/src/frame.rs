//! Gram and cross-Gram assembly, finite-section frame bounds, and empirical
//! checks of the localization and smoothness-decay conditions.

use std::f64::consts::PI;
use std::io::Write;

use faer::{c64, MatRef};
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::kernels::{atom_inner_product, sinc, Atom};
use crate::numerics::{HermitianMatrix, RectMatrix, DEFAULT_REL_TOL};
use crate::patterns::{fmt17, grid_points, Node2, PatternKind, PatternParams, SamplingPattern};

/// Centered `n1 × n2` integer grid of admissible-basis frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexGrid {
    pub n1: usize,
    pub n2: usize,
}

impl IndexGrid {
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(FrameError::InvalidParameter("index grid must be at least 1x1".into()));
        }
        Ok(Self { n1, n2 })
    }

    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major grid points, first coordinate outer.
    pub fn points(&self) -> Vec<[i64; 2]> {
        grid_points(self.n1, self.n2)
    }

    pub fn coordinates(&self) -> Vec<[f64; 2]> {
        self.points().iter().map(|p| [p[0] as f64, p[1] as f64]).collect()
    }
}

/// Sampling Gram `Ψ[j, l] = ⟨ψ_l, ψ_j⟩` over the given nodes.
pub fn assemble_gram_for_nodes(nodes: &[Node2]) -> Result<HermitianMatrix> {
    if nodes.is_empty() {
        return Err(FrameError::InvalidParameter("cannot assemble a Gram matrix for zero nodes".into()));
    }
    HermitianMatrix::from_fn(nodes.len(), |j, l| atom_inner_product(Atom::new(nodes[l]), Atom::new(nodes[j])))
}

pub fn assemble_sampling_gram(pattern: &SamplingPattern) -> Result<HermitianMatrix> {
    assemble_gram_for_nodes(pattern.nodes())
}

/// Cross-Gram `Ω[j, l] = ⟨φ_l / 2, ψ_j⟩ = 2 sinc(λ_j1 - l1) sinc(λ_j2 - l2)`,
/// mapping coefficients on the orthonormal basis `φ_l / 2` to frame data.
pub fn assemble_cross_gram_for_nodes(nodes: &[Node2], grid: IndexGrid) -> Result<RectMatrix> {
    if nodes.is_empty() {
        return Err(FrameError::InvalidParameter("cannot assemble a cross-Gram for zero nodes".into()));
    }
    let pts = grid.points();
    RectMatrix::from_fn(nodes.len(), pts.len(), |j, l| {
        let n = nodes[j];
        c64::new(2.0 * sinc(n.lambda1 - pts[l][0] as f64) * sinc(n.lambda2 - pts[l][1] as f64), 0.0)
    })
}

pub fn assemble_cross_gram(pattern: &SamplingPattern, grid: IndexGrid) -> Result<RectMatrix> {
    assemble_cross_gram_for_nodes(pattern.nodes(), grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundsMethod {
    FiniteSection,
    KadecAnalytic,
}

/// Frame bounds `A ≤ B` of a finite family restricted to a probe span.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub a: f64,
    pub b: f64,
    pub method: BoundsMethod,
    /// `A` is numerically zero relative to `B`.
    pub ill_posed: bool,
    /// 1D Kadec-type Riesz bounds `((1-L)², (1+L)²)`, `L = 1 - cos πδ + sin πδ`,
    /// relative to unit-norm atoms. Reported for jittered patterns only.
    pub kadec_1d: Option<(f64, f64)>,
}

/// 1D Kadec bound pair for jitter magnitude `delta`.
pub fn kadec_bounds_1d(delta: f64) -> (f64, f64) {
    let l = 1.0 - (PI * delta).cos() + (PI * delta).sin();
    ((1.0 - l).max(0.0).powi(2), (1.0 + l).powi(2))
}

/// Exact frame bounds of `{ψ_j}` restricted to the span of the probe atoms:
/// the extreme eigenvalues of `F^H F` with `F[j, l] = ⟨φ_l / 2, ψ_j⟩`.
pub fn estimate_frame_bounds(pattern: &SamplingPattern, probe: IndexGrid) -> Result<FrameBounds> {
    if pattern.is_empty() {
        return Err(FrameError::InvalidParameter("pattern has no nodes".into()));
    }
    let (lo1, hi1, lo2, hi2) = pattern.nodes().iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), n| (a.min(n.lambda1), b.max(n.lambda1), c.min(n.lambda2), d.max(n.lambda2)),
    );
    let pts = probe.points();
    let (p1_lo, p1_hi) = (pts[0][0] as f64, pts[pts.len() - 1][0] as f64);
    let (p2_lo, p2_hi) = (pts[0][1] as f64, pts[pts.len() - 1][1] as f64);
    if p1_lo < lo1 - 0.5 || p1_hi > hi1 + 0.5 || p2_lo < lo2 - 0.5 || p2_hi > hi2 + 0.5 {
        return Err(FrameError::InvalidParameter(format!(
            "probe grid {}x{} extends beyond the pattern's frequency coverage",
            probe.n1, probe.n2
        )));
    }
    let f = assemble_cross_gram(pattern, probe)?;
    let ev = f.normal()?.eigenvalues()?;
    let a = ev[0];
    let b = ev[ev.len() - 1];
    let kadec_1d = match pattern.params() {
        PatternParams::Jittered(p) if p.bound <= 0.25 => Some(kadec_bounds_1d(p.bound)),
        _ => None,
    };
    Ok(FrameBounds {
        a,
        b,
        method: BoundsMethod::FiniteSection,
        ill_posed: !(a > DEFAULT_REL_TOL * b),
        kadec_1d,
    })
}

/// Result of an empirical localization check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Localization {
    /// `max |G[j, l]| (1 + ‖j - l‖)^exponent`.
    pub gamma_hat: f64,
    /// Decay exponent fitted over distance shells; `+∞` when there is no
    /// off-diagonal mass.
    pub s_hat: f64,
    pub satisfied: bool,
}

// Shell envelopes below this fraction of the largest entry are treated as zero.
const ZERO_MASS: f64 = 1e-13;

/// Least-squares slope of `ys` against `xs`.
fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Fits the tail `envelope(k) ~ C k^{-s}` and returns `s`. Shell 1 is
/// dominated by near-coincident nodes and shells beyond `k_max / √2` only hold
/// diagonal pairs, so both are excluded.
fn fit_shell_decay(shells: &[f64], scale: f64) -> f64 {
    let last = ((shells.len().saturating_sub(1)) as f64 / std::f64::consts::SQRT_2).floor() as usize;
    let (xs, ys): (Vec<f64>, Vec<f64>) = shells
        .iter()
        .enumerate()
        .take(last + 1)
        .skip(2)
        .filter(|(_, &v)| v > ZERO_MASS * scale)
        .map(|(k, &v)| ((k as f64).ln(), v.ln()))
        .unzip();
    if xs.len() < 2 {
        return f64::INFINITY;
    }
    -fit_slope(&xs, &ys)
}

/// Checks `|G[j, l]| ≤ γ (1 + ‖j - l‖₂)^{-exponent}` on a finite section.
pub fn verify_localization(gram: &HermitianMatrix, index_map: &[[f64; 2]], exponent: f64) -> Result<Localization> {
    if !(exponent > 0.0) {
        return Err(FrameError::InvalidParameter(format!("exponent must be > 0, got {exponent}")));
    }
    let n = gram.dim();
    if index_map.len() != n {
        return Err(FrameError::DimensionMismatch { expected: n, actual: index_map.len() });
    }
    let mut gamma_hat = 0.0_f64;
    let mut shells: Vec<f64> = Vec::new();
    let mut scale = 0.0_f64;
    for j in 0..n {
        for l in 0..n {
            let g = gram.get(j, l).norm();
            let d = (index_map[j][0] - index_map[l][0]).hypot(index_map[j][1] - index_map[l][1]);
            gamma_hat = gamma_hat.max(g * (1.0 + d).powf(exponent));
            scale = scale.max(g);
            let k = d.round() as usize;
            if k >= shells.len() {
                shells.resize(k + 1, 0.0);
            }
            shells[k] = shells[k].max(g);
        }
    }
    let s_hat = fit_shell_decay(&shells, scale);
    Ok(Localization { gamma_hat, s_hat, satisfied: gamma_hat.is_finite() })
}

/// Checks the product-form cross condition
/// `|Ω[j, l]| ≤ γ₁ (1 + |j1 - l1|)^{-s} (1 + |j2 - l2|)^{-s}`.
pub fn verify_cross_localization(
    cross: &RectMatrix,
    row_index: &[[f64; 2]],
    col_index: &[[f64; 2]],
    exponent: f64,
) -> Result<Localization> {
    if !(exponent > 0.0) {
        return Err(FrameError::InvalidParameter(format!("exponent must be > 0, got {exponent}")));
    }
    if row_index.len() != cross.rows() {
        return Err(FrameError::DimensionMismatch { expected: cross.rows(), actual: row_index.len() });
    }
    if col_index.len() != cross.cols() {
        return Err(FrameError::DimensionMismatch { expected: cross.cols(), actual: col_index.len() });
    }
    let mut gamma_hat = 0.0_f64;
    let mut scale = 0.0_f64;
    // shells over the product weight (1 + |d1|)(1 + |d2|), indexed by its rounded value minus one
    let mut shells: Vec<f64> = Vec::new();
    for (j, rj) in row_index.iter().enumerate() {
        for (l, cl) in col_index.iter().enumerate() {
            let g = cross.get(j, l).norm();
            let w = (1.0 + (rj[0] - cl[0]).abs()) * (1.0 + (rj[1] - cl[1]).abs());
            gamma_hat = gamma_hat.max(g * w.powf(exponent));
            scale = scale.max(g);
            let k = (w.round() as usize).saturating_sub(1);
            if k >= shells.len() {
                shells.resize(k + 1, 0.0);
            }
            shells[k] = shells[k].max(g);
        }
    }
    let s_hat = fit_shell_decay(&shells, scale);
    Ok(Localization { gamma_hat, s_hat, satisfied: gamma_hat.is_finite() })
}

/// `c0_hat = max |coeff_j| ‖j‖₂^s` over nonzero indices.
pub fn verify_smoothness_decay(coeffs: &[c64], index_map: &[[f64; 2]], s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(FrameError::InvalidParameter(format!("s must be > 0, got {s}")));
    }
    if coeffs.len() != index_map.len() {
        return Err(FrameError::DimensionMismatch { expected: index_map.len(), actual: coeffs.len() });
    }
    Ok(coeffs
        .iter()
        .zip(index_map)
        .map(|(c, j)| (c.norm(), j[0].hypot(j[1])))
        .filter(|&(_, r)| r > 0.0)
        .fold(0.0_f64, |m, (c, r)| m.max(c * r.powf(s))))
}

/// Localization constants of the sampling frame, the admissible frame and
/// the cross condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizationParams {
    pub gamma: f64,
    pub s: f64,
    pub gamma0: f64,
    pub t: f64,
    /// Set when `t` was measured and satisfies `t > 2`.
    pub admissible_verified: bool,
    pub gamma1: f64,
    pub s_cross: f64,
}

/// A sampling frame paired with an admissible integer grid.
#[derive(Debug, Clone)]
pub struct FrameSpec {
    pub sampling: SamplingPattern,
    pub admissible_grid: IndexGrid,
    pub localization: LocalizationParams,
}

impl FrameSpec {
    /// Measures every localization constant on the current finite section.
    /// Decay exponents are fitted first and the `γ`s evaluated at them.
    pub fn fitted(sampling: SamplingPattern, admissible_grid: IndexGrid) -> Result<Self> {
        let idx = sampling.index_coordinates();
        let gram = assemble_sampling_gram(&sampling)?;
        let probe = verify_localization(&gram, &idx, 1.0)?;
        let s = probe.s_hat;
        let gamma = if s.is_finite() { verify_localization(&gram, &idx, s)?.gamma_hat } else { gram.get(0, 0).re };

        let grid_idx = admissible_grid.coordinates();
        let phi = admissible_gram(admissible_grid)?;
        let t = verify_localization(&phi, &grid_idx, 1.0)?.s_hat;
        let gamma0 = if t.is_finite() { verify_localization(&phi, &grid_idx, t)?.gamma_hat } else { 1.0 };

        let cross = assemble_cross_gram(&sampling, admissible_grid)?;
        let cprobe = verify_cross_localization(&cross, &idx, &grid_idx, 1.0)?;
        let s_cross = cprobe.s_hat;
        let gamma1 = if s_cross.is_finite() {
            verify_cross_localization(&cross, &idx, &grid_idx, s_cross)?.gamma_hat
        } else {
            cprobe.gamma_hat
        };
        Ok(Self {
            sampling,
            admissible_grid,
            localization: LocalizationParams {
                gamma,
                s,
                gamma0,
                t,
                admissible_verified: t > 2.0,
                gamma1,
                s_cross,
            },
        })
    }
}

/// Gram matrix of the orthonormal admissible basis `φ_l / 2` (the identity up to rounding).
pub fn admissible_gram(grid: IndexGrid) -> Result<HermitianMatrix> {
    let pts = grid.points();
    HermitianMatrix::from_fn(pts.len(), |j, l| {
        let a = Atom::integer(pts[j][0], pts[j][1]);
        let b = Atom::integer(pts[l][0], pts[l][1]);
        atom_inner_product(b, a) * 0.25
    })
}

/// Writes a complex matrix as CSV, one row per matrix row, with real and
/// imaginary parts interleaved.
pub fn write_matrix_csv<W: Write>(m: MatRef<'_, c64>, mut out: W) -> Result<()> {
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .flat_map(|j| [fmt17(m[(i, j)].re), fmt17(m[(i, j)].im)])
            .collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Whether `kind` is expected to be a frame with respect to the integer basis.
pub fn is_admissible_kind(kind: PatternKind) -> bool {
    matches!(kind, PatternKind::Jittered | PatternKind::IntegerGrid)
}
