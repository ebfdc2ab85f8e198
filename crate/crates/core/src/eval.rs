//! Evaluation of reconstructions, error measures and the table harness.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use faer::{c64, Mat};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::frame::IndexGrid;
use crate::kernels::{frame_coefficients, TestFunction};
use crate::numerics::{ensure_sequential, pairwise_sum, DEFAULT_REL_TOL};
use crate::operators::{af_reconstruct, cc_reconstruct, MRule, TruncationConstants, TruncationPlan};
use crate::patterns::{fmt17, preset, Node2, PatternKind, SamplingPattern};

/// Uniform tensor grid on `[-1, 1]²` including both endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalGrid {
    pub n1: usize,
    pub n2: usize,
}

impl Default for EvalGrid {
    fn default() -> Self {
        Self { n1: 128, n2: 128 }
    }
}

impl EvalGrid {
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        if n1 < 2 || n2 < 2 {
            return Err(FrameError::InvalidParameter(format!("evaluation grid needs >= 2 points per axis, got {n1}x{n2}")));
        }
        Ok(Self { n1, n2 })
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn axis(count: usize) -> Vec<f64> {
        (0..count).map(|i| -1.0 + 2.0 * i as f64 / (count - 1) as f64).collect()
    }

    pub fn x1(&self) -> Vec<f64> {
        Self::axis(self.n1)
    }

    pub fn x2(&self) -> Vec<f64> {
        Self::axis(self.n2)
    }

    /// Samples `f` row-major (first coordinate outer).
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let x2 = self.x2();
        self.x1().iter().flat_map(|&a| x2.iter().map(move |&b| (a, b))).map(|(a, b)| f(a, b)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Af,
    Cc,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Af, Method::Cc];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Af => "af",
            Method::Cc => "cc",
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Method::Af => "A-F",
            Method::Cc => "C-C",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = FrameError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "af" | "a-f" => Ok(Method::Af),
            "cc" | "c-c" => Ok(Method::Cc),
            other => Err(FrameError::Parse(format!("unknown method {other:?}"))),
        }
    }
}

/// Atoms that a coefficient vector refers to.
#[derive(Debug, Clone, PartialEq)]
pub enum Basis {
    /// `ψ_λ` at the listed nodes.
    Psi(Vec<Node2>),
    /// `φ_l / 2` over the centered integer grid.
    Phi(IndexGrid),
}

impl Basis {
    pub fn len(&self) -> usize {
        match self {
            Basis::Psi(nodes) => nodes.len(),
            Basis::Phi(grid) => grid.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Basis::Psi(_) => "psi",
            Basis::Phi(_) => "phi",
        }
    }

    fn frequencies(&self) -> (Vec<Node2>, f64) {
        match self {
            Basis::Psi(nodes) => (nodes.clone(), 1.0),
            Basis::Phi(grid) => (grid.points().iter().map(|p| Node2::new(p[0] as f64, p[1] as f64)).collect(), 0.5),
        }
    }
}

/// `Σ_l c_l atom_l(x)` on every grid point, row-major.
///
/// Atoms factor over the axes, so the field is `E1 · diag(c) · E2ᵀ`.
pub fn evaluate(coeffs: &[c64], basis: &Basis, grid: EvalGrid) -> Result<Vec<c64>> {
    if coeffs.len() != basis.len() {
        return Err(FrameError::DimensionMismatch { expected: basis.len(), actual: coeffs.len() });
    }
    ensure_sequential();
    let (freqs, scale) = basis.frequencies();
    let (x1, x2) = (grid.x1(), grid.x2());
    let e1 = Mat::<c64>::from_fn(x1.len(), freqs.len(), |i, l| {
        coeffs[l] * scale * c64::cis(-PI * freqs[l].lambda1 * x1[i])
    });
    let e2 = Mat::<c64>::from_fn(freqs.len(), x2.len(), |l, k| c64::cis(-PI * freqs[l].lambda2 * x2[k]));
    let field = e1 * e2;
    Ok((0..x1.len()).flat_map(|i| (0..x2.len()).map(move |k| (i, k))).map(|(i, k)| field[(i, k)]).collect())
}

/// Mean over the grid of `|recon - f|²`, measuring the full complex deviation.
pub fn mse(recon: &[c64], truth: TestFunction, grid: EvalGrid) -> Result<f64> {
    if recon.len() != grid.len() {
        return Err(FrameError::DimensionMismatch { expected: grid.len(), actual: recon.len() });
    }
    let t = grid.sample(|a, b| truth.eval(a, b));
    let sq: Vec<f64> = recon.iter().zip(&t).map(|(r, &f)| (r - c64::new(f, 0.0)).norm_sqr()).collect();
    Ok(pairwise_sum(&sq) / sq.len() as f64)
}

/// Coordinate held fixed by a cross-section.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X1,
    X2,
}

impl FromStr for Axis {
    type Err = FrameError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x1" | "1" => Ok(Axis::X1),
            "x2" | "2" => Ok(Axis::X2),
            other => Err(FrameError::Parse(format!("unknown axis {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionRow {
    /// Position along the free coordinate.
    pub coordinate: f64,
    pub recon: c64,
    pub truth: f64,
}

/// The grid line nearest `fixed = value`, ordered along the free coordinate.
pub fn cross_section(
    recon: &[c64],
    truth: TestFunction,
    grid: EvalGrid,
    fixed: Axis,
    value: f64,
) -> Result<Vec<SectionRow>> {
    if !(-1.0..=1.0).contains(&value) {
        return Err(FrameError::InvalidParameter(format!("section value {value} outside [-1, 1]")));
    }
    if recon.len() != grid.len() {
        return Err(FrameError::DimensionMismatch { expected: grid.len(), actual: recon.len() });
    }
    let nearest = |count: usize| (((value + 1.0) / 2.0) * (count - 1) as f64).round() as usize;
    let (x1, x2) = (grid.x1(), grid.x2());
    Ok(match fixed {
        Axis::X1 => {
            let i = nearest(grid.n1);
            x2.iter()
                .enumerate()
                .map(|(k, &b)| SectionRow { coordinate: b, recon: recon[i * grid.n2 + k], truth: truth.eval(x1[i], b) })
                .collect()
        }
        Axis::X2 => {
            let k = nearest(grid.n2);
            x1.iter()
                .enumerate()
                .map(|(i, &a)| SectionRow { coordinate: a, recon: recon[i * grid.n2 + k], truth: truth.eval(a, x2[k]) })
                .collect()
        }
    })
}

pub fn write_section_csv<W: Write>(rows: &[SectionRow], mut out: W) -> Result<()> {
    writeln!(out, "coordinate,recon_re,recon_im,truth")?;
    for r in rows {
        writeln!(out, "{},{},{},{}", fmt17(r.coordinate), fmt17(r.recon.re), fmt17(r.recon.im), fmt17(r.truth))?;
    }
    Ok(())
}

/// Per-reconstruction diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub n: (usize, usize),
    pub m: (usize, usize),
    pub data: (usize, usize),
    /// Retained rank of the final solve.
    pub rank: usize,
    pub dim: usize,
    pub condition: f64,
    /// `λ_min(Ψ_n)` for C-C, `σ_min(Ω)²` for A-F.
    pub lambda_min: f64,
    /// C-C operator lost rank; `mse` is NaN.
    pub singular: bool,
    pub rank_deficient: bool,
    #[serde(skip)]
    pub wall_time_s: f64,
}

#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub method: Method,
    pub basis: Basis,
    pub coefficients: Vec<c64>,
    pub grid: EvalGrid,
    /// Empty when `diagnostics.singular`.
    pub grid_values: Vec<c64>,
    pub mse: f64,
    pub diagnostics: Diagnostics,
}

/// Runs one method on frame data of `truth` and evaluates the error.
/// A singular C-C operator yields `mse = NaN` with the singular flag, not an error.
pub fn reconstruct(
    truth: TestFunction,
    method: Method,
    pattern: &SamplingPattern,
    plan: &TruncationPlan,
    rel_tol: f64,
    grid: EvalGrid,
) -> Result<ReconstructionResult> {
    let start = Instant::now();
    let data = frame_coefficients(truth, pattern);
    let (basis, coefficients, mut diagnostics) = match method {
        Method::Af => {
            let sol = af_reconstruct(&data, pattern, plan.n, rel_tol)?;
            let diag = Diagnostics {
                n: plan.n,
                m: plan.m,
                data: plan.data,
                rank: sol.rank,
                dim: sol.grid.len(),
                condition: sol.condition,
                lambda_min: sol.sigma_min * sol.sigma_min,
                singular: false,
                rank_deficient: sol.rank_deficient(),
                wall_time_s: 0.0,
            };
            (Basis::Phi(sol.grid), sol.coefficients, diag)
        }
        Method::Cc => match cc_reconstruct(&data, pattern, plan.n, plan.data, rel_tol) {
            Ok(sol) => {
                let dim = sol.coefficients.len();
                let diag = Diagnostics {
                    n: plan.n,
                    m: plan.m,
                    data: plan.data,
                    rank: dim,
                    dim,
                    condition: sol.v_condition,
                    lambda_min: sol.psi_n_lambda_min,
                    singular: false,
                    rank_deficient: false,
                    wall_time_s: 0.0,
                };
                (Basis::Psi(sol.basis), sol.coefficients, diag)
            }
            Err(FrameError::SingularOperator { rank, dim }) => {
                let diag = Diagnostics {
                    n: plan.n,
                    m: plan.m,
                    data: plan.data,
                    rank,
                    dim,
                    condition: f64::INFINITY,
                    lambda_min: f64::NAN,
                    singular: true,
                    rank_deficient: true,
                    wall_time_s: start.elapsed().as_secs_f64(),
                };
                return Ok(ReconstructionResult {
                    method,
                    basis: Basis::Psi(Vec::new()),
                    coefficients: Vec::new(),
                    grid,
                    grid_values: Vec::new(),
                    mse: f64::NAN,
                    diagnostics: diag,
                });
            }
            Err(e) => return Err(e),
        },
    };
    let grid_values = evaluate(&coefficients, &basis, grid)?;
    let err = mse(&grid_values, truth, grid)?;
    diagnostics.wall_time_s = start.elapsed().as_secs_f64();
    Ok(ReconstructionResult { method, basis, coefficients, grid, grid_values, mse: err, diagnostics })
}

/// Source of the constants used to choose `n` from the data size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstantsMode {
    #[default]
    Preset,
    Fitted,
}

impl FromStr for ConstantsMode {
    type Err = FrameError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "preset" => Ok(ConstantsMode::Preset),
            "fitted" => Ok(ConstantsMode::Fitted),
            other => Err(FrameError::Parse(format!("unknown constants mode {other:?}"))),
        }
    }
}

/// Chooses `n` for an `m_side × m_side` data set.
pub fn plan_for(pattern: &SamplingPattern, m_side: usize, mode: ConstantsMode, rule: MRule) -> Result<TruncationPlan> {
    match mode {
        ConstantsMode::Preset => TruncationPlan::for_data_side(m_side, TruncationConstants::table_preset(), rule, None),
        ConstantsMode::Fitted => {
            let (c, bounds) = TruncationConstants::fitted(pattern, (m_side / 2).max(1))?;
            TruncationPlan::for_data_side(m_side, c, rule, Some(bounds))
        }
    }
}

#[derive(Debug, Clone)]
pub struct TableConfig {
    pub example: TestFunction,
    pub methods: Vec<Method>,
    pub patterns: Vec<PatternKind>,
    /// Data sides `m`; each cell uses `M = m²` nodes.
    pub sizes: Vec<usize>,
    pub seed: u64,
    pub rel_tol: f64,
    pub constants: ConstantsMode,
    pub rule: MRule,
    pub grid: EvalGrid,
}

impl TableConfig {
    pub fn new(example: TestFunction, seed: u64) -> Self {
        Self {
            example,
            methods: Method::ALL.to_vec(),
            patterns: PatternKind::TABLE_KINDS.to_vec(),
            sizes: vec![8, 16, 32, 64],
            seed,
            rel_tol: DEFAULT_REL_TOL,
            constants: ConstantsMode::Preset,
            rule: MRule::Consistent,
            grid: EvalGrid::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellStatus {
    Ok,
    RankDeficient,
    Singular,
    Failed,
}

impl CellStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::RankDeficient => "rank-deficient",
            CellStatus::Singular => "singular",
            CellStatus::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TableCell {
    pub pattern: PatternKind,
    pub m_side: usize,
    pub method: Method,
    /// Reconstruction side `n`; 0 if planning failed.
    pub n: usize,
    pub mse: f64,
    pub status: CellStatus,
    pub detail: Option<String>,
    pub wall_time_s: f64,
}

fn run_job(cfg: &TableConfig, kind: PatternKind, m_side: usize) -> Vec<TableCell> {
    let failed = |method: Method, n: usize, e: FrameError| TableCell {
        pattern: kind,
        m_side,
        method,
        n,
        mse: f64::NAN,
        status: CellStatus::Failed,
        detail: Some(e.to_string()),
        wall_time_s: 0.0,
    };
    let planned = preset(kind, m_side, cfg.seed).and_then(|p| {
        let plan = plan_for(&p, m_side, cfg.constants, cfg.rule)?;
        Ok((p, plan))
    });
    let (pattern, plan) = match planned {
        Ok(v) => v,
        Err(e) => return cfg.methods.iter().map(|&m| failed(m, 0, e.clone())).collect(),
    };
    cfg.methods
        .iter()
        .map(|&method| match reconstruct(cfg.example, method, &pattern, &plan, cfg.rel_tol, cfg.grid) {
            Ok(r) => TableCell {
                pattern: kind,
                m_side,
                method,
                n: plan.n.0,
                mse: r.mse,
                status: if r.diagnostics.singular {
                    CellStatus::Singular
                } else if r.diagnostics.rank_deficient {
                    CellStatus::RankDeficient
                } else {
                    CellStatus::Ok
                },
                detail: None,
                wall_time_s: r.diagnostics.wall_time_s,
            },
            Err(e) => failed(method, plan.n.0, e),
        })
        .collect()
}

/// Every (pattern, size, method) cell, sorted by pattern, size, then method.
/// Cells are independent and run on the current rayon pool.
pub fn run_table(cfg: &TableConfig) -> Vec<TableCell> {
    let jobs: Vec<(PatternKind, usize)> =
        cfg.patterns.iter().flat_map(|&k| cfg.sizes.iter().map(move |&m| (k, m))).collect();
    let mut cells: Vec<TableCell> = jobs.par_iter().flat_map_iter(|&(k, m)| run_job(cfg, k, m)).collect();
    let order = |k: PatternKind| cfg.patterns.iter().position(|&p| p == k).unwrap_or(usize::MAX);
    cells.sort_by_key(|c| (order(c.pattern), c.m_side, c.method));
    cells
}

/// CSV with one row per cell; wall times are omitted so reruns are byte-identical.
pub fn table_csv(example: TestFunction, cells: &[TableCell]) -> String {
    let mut out = String::from("example,pattern,M,m,n,N,method,mse,status\n");
    for c in cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            example.as_str(),
            c.pattern.as_str(),
            c.m_side * c.m_side,
            c.m_side,
            c.n,
            c.n * c.n,
            c.method.as_str(),
            fmt17(c.mse),
            c.status.as_str()
        ));
    }
    out
}

/// Human-readable grid: one row per data size, one column per (pattern, method).
pub fn table_text(cells: &[TableCell]) -> String {
    let mut cols: Vec<(PatternKind, Method)> = Vec::new();
    let mut sizes: Vec<usize> = Vec::new();
    for c in cells {
        if !cols.contains(&(c.pattern, c.method)) {
            cols.push((c.pattern, c.method));
        }
        if !sizes.contains(&c.m_side) {
            sizes.push(c.m_side);
        }
    }
    sizes.sort_unstable();
    let mut out = format!("{:>8}", "M");
    for (k, m) in &cols {
        out.push_str(&format!(" {:>20}", format!("{} {}", k.as_str(), m.label())));
    }
    out.push('\n');
    for s in sizes {
        out.push_str(&format!("{:>8}", format!("{s}^2")));
        for &(k, m) in &cols {
            let cell = cells.iter().find(|c| c.pattern == k && c.method == m && c.m_side == s);
            let text = match cell {
                Some(c) if c.mse.is_nan() => "NaN".to_string(),
                Some(c) => format!("{:.1E}", c.mse),
                None => "-".to_string(),
            };
            out.push_str(&format!(" {text:>20}"));
        }
        out.push('\n');
    }
    out
}

fn check_image(values: &[f64], width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 || values.len() != width * height {
        return Err(FrameError::DimensionMismatch { expected: width * height, actual: values.len() });
    }
    Ok(())
}

/// Linear map of the finite range of `values` onto `0..=255`; non-finite values map to 0.
fn to_levels(values: &[f64]) -> Vec<u8> {
    let (lo, hi) = values
        .iter()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    values
        .iter()
        .map(|&v| {
            if !v.is_finite() || !(hi > lo) {
                0
            } else {
                (255.0 * (v - lo) / (hi - lo)).round() as u8
            }
        })
        .collect()
}

/// Binary 8-bit PGM, one image row per entry of the first grid axis.
pub fn write_pgm<W: Write>(values: &[f64], width: usize, height: usize, mut out: W) -> Result<()> {
    check_image(values, width, height)?;
    write!(out, "P5\n{width} {height}\n255\n")?;
    out.write_all(&to_levels(values))?;
    Ok(())
}

/// Binary PPM through a black-red-yellow-white ramp.
pub fn write_ppm<W: Write>(values: &[f64], width: usize, height: usize, mut out: W) -> Result<()> {
    check_image(values, width, height)?;
    write!(out, "P6\n{width} {height}\n255\n")?;
    let rgb: Vec<u8> = to_levels(values)
        .into_iter()
        .flat_map(|l| {
            let x = l as u16 * 3;
            [x.min(255) as u8, x.saturating_sub(255).min(255) as u8, x.saturating_sub(510) as u8]
        })
        .collect();
    out.write_all(&rgb)?;
    Ok(())
}

/// `log10 |recon - truth|` per grid point, floored at 1e-20.
pub fn log_error_field(recon: &[c64], truth: TestFunction, grid: EvalGrid) -> Vec<f64> {
    let t = grid.sample(|a, b| truth.eval(a, b));
    recon.iter().zip(&t).map(|(r, &f)| (r - c64::new(f, 0.0)).norm().max(1e-20).log10()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fine() -> EvalGrid {
        EvalGrid::new(129, 129).unwrap()
    }

    #[test]
    fn grid_includes_endpoints() {
        let x = EvalGrid::axis(5);
        assert_eq!(x, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!(EvalGrid::new(1, 5).is_err());
    }

    #[test]
    fn constant_atom_evaluates_to_half() {
        let v = evaluate(&[c64::new(1.0, 0.0)], &Basis::Phi(IndexGrid::square(1).unwrap()), EvalGrid::new(7, 5).unwrap())
            .unwrap();
        assert!(v.iter().all(|z| (z - c64::new(0.5, 0.0)).norm() < 1e-15));
        let z = evaluate(&[c64::new(0.0, 0.0); 9], &Basis::Phi(IndexGrid::square(3).unwrap()), fine()).unwrap();
        assert!(z.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn f1_phi_expansion_matches_pointwise() {
        // sin(4πx1) sin(2πx2) = -(1/4) Σ ± e^{iπ(±4 x1 ± 2 x2)}; on φ/2 the coefficients are ∓1/2
        let grid = IndexGrid::square(9).unwrap();
        let coeffs: Vec<c64> = grid
            .points()
            .iter()
            .map(|p| match (p[0], p[1]) {
                (4, 2) | (-4, -2) => c64::new(-0.5, 0.0),
                (4, -2) | (-4, 2) => c64::new(0.5, 0.0),
                _ => c64::new(0.0, 0.0),
            })
            .collect();
        let v = evaluate(&coeffs, &Basis::Phi(grid), fine()).unwrap();
        let t = fine().sample(|a, b| TestFunction::F1.eval(a, b));
        assert!(v.iter().zip(&t).all(|(r, &f)| (r - c64::new(f, 0.0)).norm() < 1e-12));
        assert!(mse(&v, TestFunction::F1, fine()).unwrap() < 1e-26);
    }

    #[test]
    fn psi_basis_is_unscaled() {
        let b = Basis::Psi(vec![Node2::new(0.5, -1.5)]);
        let g = EvalGrid::new(3, 3).unwrap();
        let v = evaluate(&[c64::new(2.0, 0.0)], &b, g).unwrap();
        // x = (1, -1): 2 e^{-iπ(0.5 + 1.5)} = 2
        assert!((v[2 * 3] - c64::new(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn mse_examples() {
        let g = fine();
        let t: Vec<c64> = g.sample(|a, b| TestFunction::F2.eval(a, b)).into_iter().map(|f| c64::new(f, 0.0)).collect();
        assert_eq!(mse(&t, TestFunction::F2, g).unwrap(), 0.0);
        let shifted: Vec<c64> = t.iter().map(|z| z + 0.1).collect();
        assert!((mse(&shifted, TestFunction::F2, g).unwrap() - 0.01).abs() < 1e-15);
        assert!(mse(&t[1..], TestFunction::F2, g).is_err());
    }

    #[test]
    fn cross_section_on_zero_line() {
        let g = fine();
        let t: Vec<c64> = g.sample(|a, b| TestFunction::F1.eval(a, b)).into_iter().map(|f| c64::new(f, 0.0)).collect();
        for axis in [Axis::X1, Axis::X2] {
            let rows = cross_section(&t, TestFunction::F1, g, axis, 0.0).unwrap();
            assert_eq!(rows.len(), 129);
            assert!(rows.iter().all(|r| r.truth.abs() <= 1e-15 && r.recon.re == r.truth));
        }
        assert!(cross_section(&t, TestFunction::F1, g, Axis::X1, 1.5).is_err());
    }

    #[test]
    fn exact_recovery_on_integer_grid() {
        let p = preset(PatternKind::IntegerGrid, 16, 0).unwrap();
        let plan = TruncationPlan::for_data_side(16, TruncationConstants::table_preset(), MRule::Consistent, None).unwrap();
        let full = TruncationPlan { n: (16, 16), ..plan };
        for method in Method::ALL {
            let r = reconstruct(TestFunction::F1, method, &p, &full, DEFAULT_REL_TOL, EvalGrid::default()).unwrap();
            assert!(r.mse <= 1e-14, "{method}: {}", r.mse);
        }
    }

    #[test]
    fn table_layout_is_sorted() {
        let mut cfg = TableConfig::new(TestFunction::F1, 7);
        cfg.sizes = vec![16, 8];
        cfg.grid = EvalGrid::new(32, 32).unwrap();
        let cells = run_table(&cfg);
        assert_eq!(cells.len(), 16);
        let csv = table_csv(TestFunction::F1, &cells);
        assert_eq!(csv.lines().count(), 17);
        assert!(csv.lines().nth(1).unwrap().starts_with("f1,jittered,64,8,4,16,af,"));
        assert!(table_text(&cells).contains("NaN"));
    }

    #[test]
    fn images_have_headers() {
        let mut buf = Vec::new();
        write_pgm(&[0.0, 1.0, 2.0, 3.0], 2, 2, &mut buf).unwrap();
        assert_eq!(&buf[..11], b"P5\n2 2\n255\n");
        assert_eq!(&buf[11..], &[0, 85, 170, 255]);
        let mut buf = Vec::new();
        write_ppm(&[5.0, 5.0], 2, 1, &mut buf).unwrap();
        assert_eq!(buf.len(), 11 + 6);
        assert!(write_pgm(&[0.0; 3], 2, 2, Vec::new()).is_err());
    }
}
