//! The two inverse-frame-operator approximations and their truncation rules.
//!
//! Coefficient-space conventions:
//!
//! * C-C works on ψ-coefficients of `H_n = span{ψ_l : l in the n-block}`.
//!   `Ψ_{m,n}[k, l] = ⟨ψ_l, ψ_k⟩` maps `a ∈ ℂ^N` to the data of `Σ a_l ψ_l` on
//!   the m-block, `Ψ_{n,m} = Ψ_{m,n}^H` accumulates `S_m g` against the n-block
//!   atoms, and a thresholded solve with the n-block Gram `Ψ_n` realizes `P_n`.
//!   Hence `V = Ψ_n⁺ Ψ_{n,m} Ψ_{m,n}` and the reconstruction is
//!   `d = V⁻¹ Ψ_n⁺ Ψ_{n,m} b`, the least-squares fit of `b` by the first `N`
//!   sampling atoms.
//! * A-F works on coefficients of the orthonormal basis `φ_l / 2` over the
//!   centered `n1 × n2` integer grid. `Ω[k, l] = ⟨φ_l / 2, ψ_k⟩`, the frame
//!   operator restricted to `G_n` is `W = Ω^H Ω`, and `c = Ω† b`.
//!
//! The "first m" block of a pattern is the centered index box for grid-like
//! kinds and the `m1·m2` nodes of smallest norm otherwise.

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::frame::{assemble_cross_gram_for_nodes, assemble_gram_for_nodes, estimate_frame_bounds, FrameBounds, FrameSpec, IndexGrid};
use crate::kernels::{atom_inner_product, Atom};
use crate::numerics::{min_eigenvalue, HermitianMatrix, RectMatrix};
use crate::patterns::{centered_range, Node2, SamplingPattern};

fn check_pair(name: &str, p: (usize, usize)) -> Result<()> {
    if p.0 == 0 || p.1 == 0 {
        return Err(FrameError::InvalidParameter(format!("{name} must be >= 1 in both components, got {p:?}")));
    }
    Ok(())
}

fn check_gaps(n: (usize, usize), m: (usize, usize)) -> Result<(f64, f64)> {
    check_pair("n", n)?;
    if m.0 <= n.0 || m.1 <= n.1 {
        return Err(FrameError::DivisionByZero { n, m });
    }
    Ok(((m.0 - n.0) as f64, (m.1 - n.1) as f64))
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(FrameError::InvalidParameter(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

fn check_lambda(lambda_min: f64) -> Result<()> {
    if !(lambda_min > 0.0) {
        return Err(FrameError::SingularGram { lambda_min });
    }
    Ok(())
}

/// C-C truncation constant
/// `2sγ² n1 n2 / ((s-1)² λ) · [(m1-n1)^{-(s-1)} + (m2-n2)^{-(s-1)}]`.
pub fn constant_a_mn(n: (usize, usize), m: (usize, usize), gamma: f64, s: f64, lambda_min: f64) -> Result<f64> {
    if !(s > 2.0) {
        return Err(FrameError::InvalidParameter(format!("s must exceed 2, got {s}")));
    }
    check_positive("gamma", gamma)?;
    let (g1, g2) = check_gaps(n, m)?;
    check_lambda(lambda_min)?;
    let nn = (n.0 * n.1) as f64;
    Ok(2.0 * s * gamma * gamma / ((s - 1.0).powi(2) * lambda_min) * nn * (g1.powf(1.0 - s) + g2.powf(1.0 - s)))
}

/// Smallest `m` (by the closed-form increment, rounded up) with `A_{m,n} ≤ A/2`.
pub fn choose_m_cc(n: (usize, usize), gamma: f64, s: f64, a: f64, lambda_min: f64) -> Result<(usize, usize)> {
    if !(s > 2.0) {
        return Err(FrameError::InvalidParameter(format!("s must exceed 2, got {s}")));
    }
    check_pair("n", n)?;
    check_positive("gamma", gamma)?;
    check_positive("A", a)?;
    check_lambda(lambda_min)?;
    let inc = 8.0 * s * gamma * gamma * (n.0 * n.1) as f64 / (a * (s - 1.0).powi(2) * lambda_min);
    let step = ceil_increment(inc)?;
    Ok((n.0 + step, n.1 + step))
}

/// A-F truncation constant
/// `4sγ₁² n1 n2 / ((2s-1)² λ) · [(m1-n1)^{-(2s-1)} + (m2-n2)^{-(2s-1)}]`.
pub fn constant_b_mn(n: (usize, usize), m: (usize, usize), gamma1: f64, s: f64, lambda_min_phi: f64) -> Result<f64> {
    if !(s > 0.5) {
        return Err(FrameError::InvalidParameter(format!("s must exceed 1/2, got {s}")));
    }
    check_positive("gamma1", gamma1)?;
    let (g1, g2) = check_gaps(n, m)?;
    check_lambda(lambda_min_phi)?;
    let e = 2.0 * s - 1.0;
    let nn = (n.0 * n.1) as f64;
    Ok(4.0 * s * gamma1 * gamma1 / (e * e * lambda_min_phi) * nn * (g1.powf(-e) + g2.powf(-e)))
}

/// `m_j = n_j + ⌈(8sγ² n1 n2 / (A(2s-1)² λ))^{1/(2s-1)} n_j^{(t-1)/(2(2s-1))}⌉`.
pub fn choose_m_af(n: (usize, usize), t: f64, s: f64, gamma1: f64, a: f64, lambda_min: f64) -> Result<(usize, usize)> {
    if !(s > 0.5) {
        return Err(FrameError::InvalidParameter(format!("s must exceed 1/2, got {s}")));
    }
    if !(t > 2.0) {
        return Err(FrameError::InvalidParameter(format!("t must exceed 2, got {t}")));
    }
    check_pair("n", n)?;
    check_positive("gamma1", gamma1)?;
    check_positive("A", a)?;
    check_lambda(lambda_min)?;
    let e = 2.0 * s - 1.0;
    let base = (8.0 * s * gamma1 * gamma1 * (n.0 * n.1) as f64 / (a * e * e * lambda_min)).powf(1.0 / e);
    let p = (t - 1.0) / (2.0 * e);
    let inc = |nj: usize| ceil_increment(base * (nj as f64).powf(p));
    Ok((n.0 + inc(n.0)?, n.1 + inc(n.1)?))
}

/// `B_{m,n}` target reached by [`choose_m_af`]: `(A/2)(n1^{-(t-1)/2} + n2^{-(t-1)/2})`.
pub fn af_target(n: (usize, usize), t: f64, a: f64) -> f64 {
    let p = -(t - 1.0) / 2.0;
    0.5 * a * ((n.0 as f64).powf(p) + (n.1 as f64).powf(p))
}

// At least one extra row/column: m > n is required downstream.
fn ceil_increment(x: f64) -> Result<usize> {
    if !x.is_finite() || x > 1e15 {
        return Err(FrameError::InvalidParameter(format!("truncation increment {x} is not representable")));
    }
    Ok((x.ceil() as usize).max(1))
}

/// Which `(γ, λ_min)` pair feeds the A-F m-choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MRule {
    /// `(γ₁, λ_min(Φ_n))`, matching the definition of `B_{m,n}`.
    #[default]
    Consistent,
    /// `(γ, λ_min(Ψ_n))` as the formula is usually printed.
    Verbatim,
}

impl std::str::FromStr for MRule {
    type Err = FrameError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "consistent" => Ok(MRule::Consistent),
            "verbatim" => Ok(MRule::Verbatim),
            other => Err(FrameError::Parse(format!("unknown m-rule {other:?}"))),
        }
    }
}

/// Constants entering the m-choice formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationConstants {
    pub gamma: f64,
    pub gamma1: f64,
    pub s: f64,
    pub t: f64,
    pub a: f64,
    pub lambda_min: f64,
    pub lambda_min_phi: f64,
}

/// Admissible decay assumed when the measured one is unbounded (orthonormal basis).
pub const FALLBACK_T: f64 = 3.0;

impl TruncationConstants {
    /// Fixed constants used for the tables: the tight-frame values of the
    /// integer grid with cross decay `s = 2` and admissible decay `t = 3`.
    /// The A-F increment is then `(4/9)^{1/3} n ≈ 0.763 n` per axis.
    pub fn table_preset() -> Self {
        Self { gamma: 1.0, gamma1: 1.0, s: 2.0, t: 3.0, a: 4.0, lambda_min: 1.0, lambda_min_phi: 1.0 }
    }

    /// Constants measured on the pattern with a `probe × probe` section.
    /// Sinc-type kernels decay like `s ≈ 1`, which makes the increments
    /// grow quadratically in `n`.
    pub fn fitted(pattern: &SamplingPattern, probe: usize) -> Result<(Self, FrameBounds)> {
        let grid = IndexGrid::square(probe)?;
        let bounds = estimate_frame_bounds(pattern, grid)?;
        if bounds.ill_posed {
            return Err(FrameError::SingularGram { lambda_min: bounds.a });
        }
        let block = select_block(pattern, (probe, probe))?;
        let sub: Vec<Node2> = block.iter().map(|&i| pattern.nodes()[i]).collect();
        let lambda_min = min_eigenvalue(&assemble_gram_for_nodes(&sub)?)?;
        let spec = FrameSpec::fitted(pattern.clone(), grid)?;
        let loc = spec.localization;
        let t = if loc.t.is_finite() && loc.t > 2.0 { loc.t } else { FALLBACK_T };
        let c = Self {
            gamma: loc.gamma,
            gamma1: loc.gamma1,
            s: loc.s_cross,
            t,
            a: bounds.a,
            lambda_min,
            lambda_min_phi: 1.0,
        };
        Ok((c, bounds))
    }

    fn af_pair(&self, rule: MRule) -> (f64, f64) {
        match rule {
            MRule::Consistent => (self.gamma1, self.lambda_min_phi),
            MRule::Verbatim => (self.gamma, self.lambda_min),
        }
    }

    pub fn choose_m_af(&self, n: (usize, usize), rule: MRule) -> Result<(usize, usize)> {
        let (g, l) = self.af_pair(rule);
        choose_m_af(n, self.t, self.s, g, self.a, l)
    }

    pub fn b_mn(&self, n: (usize, usize), m: (usize, usize)) -> Result<f64> {
        constant_b_mn(n, m, self.gamma1, self.s, self.lambda_min_phi)
    }
}

/// Largest square `n` whose A-F m-choice fits in `m_side` per axis
/// (bisection; the forward map is nondecreasing in `n`).
pub fn n_for_data_side(m_side: usize, constants: &TruncationConstants, rule: MRule) -> Result<usize> {
    let fits = |n: usize| -> Result<bool> { Ok(constants.choose_m_af((n, n), rule)?.0 <= m_side) };
    if m_side < 2 || !fits(1)? {
        return Err(FrameError::InvalidParameter(format!(
            "no reconstruction size fits {m_side}x{m_side} data under the given constants"
        )));
    }
    let (mut lo, mut hi) = (1usize, m_side);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if fits(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Index bounds chosen for one reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPlan {
    pub n: (usize, usize),
    /// A-F m-choice for `n`, never larger than `data`.
    pub m: (usize, usize),
    /// Data block actually used (the whole pattern).
    pub data: (usize, usize),
    pub b_mn: f64,
    /// Defined only for `s > 2`.
    pub a_mn: Option<f64>,
    pub lambda_min_used: f64,
    pub constants: TruncationConstants,
    pub bounds_used: Option<FrameBounds>,
}

impl TruncationPlan {
    pub fn for_data_side(
        m_side: usize,
        constants: TruncationConstants,
        rule: MRule,
        bounds_used: Option<FrameBounds>,
    ) -> Result<Self> {
        let n = n_for_data_side(m_side, &constants, rule)?;
        let n = (n, n);
        let m = constants.choose_m_af(n, rule)?;
        let data = (m_side, m_side);
        let a_mn = if constants.s > 2.0 {
            Some(constant_a_mn(n, data, constants.gamma, constants.s, constants.lambda_min)?)
        } else {
            None
        };
        Ok(Self {
            n,
            m,
            data,
            b_mn: constants.b_mn(n, m)?,
            a_mn,
            lambda_min_used: constants.af_pair(rule).1,
            constants,
            bounds_used,
        })
    }
}

/// Indices (in pattern order) of the "first `k1·k2`" nodes. For curve
/// patterns `(len, 1)` selects every node.
pub fn select_block(pattern: &SamplingPattern, k: (usize, usize)) -> Result<Vec<usize>> {
    check_pair("block", k)?;
    if let (Some((m1, m2)), Some(idx)) = (pattern.grid_shape(), pattern.grid_indices()) {
        if k.0 > m1 || k.1 > m2 {
            return Err(FrameError::InvalidParameter(format!("block {k:?} exceeds the {m1}x{m2} pattern")));
        }
        let (r1, r2) = (centered_range(k.0), centered_range(k.1));
        return Ok(idx
            .iter()
            .enumerate()
            .filter(|(_, j)| r1.contains(&j[0]) && r2.contains(&j[1]))
            .map(|(i, _)| i)
            .collect());
    }
    let count = k.0 * k.1;
    if count > pattern.len() {
        return Err(FrameError::InvalidParameter(format!(
            "block of {count} nodes exceeds the {} available",
            pattern.len()
        )));
    }
    let nodes = pattern.nodes();
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by(|&a, &b| nodes[a].norm().total_cmp(&nodes[b].norm()));
    order.truncate(count);
    Ok(order)
}

fn gather<T: Copy>(values: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| values[i]).collect()
}

/// `Ψ_{m,n}[k, l] = ⟨ψ_l, ψ_k⟩` for `k` over `rows`, `l` over `cols`.
fn sampling_cross(rows: &[Node2], cols: &[Node2]) -> Result<RectMatrix> {
    RectMatrix::from_fn(rows.len(), cols.len(), |k, l| atom_inner_product(Atom::new(cols[l]), Atom::new(rows[k])))
}

/// Coefficient representation of `V_{n,m}` together with the map `Ψ_n⁺ Ψ_{n,m}`.
#[derive(Debug, Clone)]
pub struct CcOperator {
    pub n_block: Vec<usize>,
    pub m_block: Vec<usize>,
    v: Mat<c64>,
    projector: Mat<c64>,
    pub psi_n_rank: usize,
    pub psi_n_condition: f64,
    pub psi_n_lambda_min: f64,
}

impl CcOperator {
    pub fn v(&self) -> faer::MatRef<'_, c64> {
        self.v.as_ref()
    }

    /// Atoms spanning the reconstruction space, in coefficient order.
    pub fn basis_nodes(&self, pattern: &SamplingPattern) -> Vec<Node2> {
        gather(pattern.nodes(), &self.n_block)
    }

    /// `Ψ_n` was rank deficient and only its pseudo-inverse was applied.
    pub fn psi_n_singular(&self) -> bool {
        self.psi_n_rank < self.n_block.len()
    }
}

pub fn build_cc_operator(
    pattern: &SamplingPattern,
    n: (usize, usize),
    m: (usize, usize),
    rel_tol: f64,
) -> Result<CcOperator> {
    let n_block = select_block(pattern, n)?;
    let m_block = select_block(pattern, m)?;
    if m_block.len() < n_block.len() {
        return Err(FrameError::InvalidParameter(format!("data block {m:?} is smaller than n {n:?}")));
    }
    let nodes_n = gather(pattern.nodes(), &n_block);
    let nodes_m = gather(pattern.nodes(), &m_block);
    let psi_mn = sampling_cross(&nodes_m, &nodes_n)?;
    let eig = assemble_gram_for_nodes(&nodes_n)?.eigen()?;
    let gram_nm = psi_mn.normal()?;
    let v = eig.solve_mat(gram_nm.as_mat(), rel_tol)?;
    let projector = eig.solve_mat(psi_mn.as_mat().adjoint().to_owned().as_ref(), rel_tol)?;
    Ok(CcOperator {
        n_block,
        m_block,
        v: v.x,
        projector: projector.x,
        psi_n_rank: v.rank,
        psi_n_condition: v.condition,
        psi_n_lambda_min: eig.min(),
    })
}

/// C-C solution on the ψ-basis of the n-block.
#[derive(Debug, Clone)]
pub struct CcSolution {
    pub coefficients: Vec<c64>,
    pub basis: Vec<Node2>,
    pub v_condition: f64,
    pub psi_n_condition: f64,
    pub psi_n_lambda_min: f64,
}

/// `d = V⁻¹ Ψ_n⁺ Ψ_{n,m} b`. Fails with `SingularOperator` when `V` loses rank.
pub fn cc_reconstruct(
    data: &[c64],
    pattern: &SamplingPattern,
    n: (usize, usize),
    m: (usize, usize),
    rel_tol: f64,
) -> Result<CcSolution> {
    if data.len() != pattern.len() {
        return Err(FrameError::DimensionMismatch { expected: pattern.len(), actual: data.len() });
    }
    let op = build_cc_operator(pattern, n, m, rel_tol)?;
    cc_apply(&op, data, pattern, rel_tol)
}

pub fn cc_apply(op: &CcOperator, data: &[c64], pattern: &SamplingPattern, rel_tol: f64) -> Result<CcSolution> {
    let b = gather(data, &op.m_block);
    let a = RectMatrix::new(op.projector.clone())?.mul_vec(&b)?;
    let svd = RectMatrix::new(op.v.clone())?.svd()?;
    let sol = svd.pinv_apply(&a, rel_tol)?;
    if sol.was_singular() {
        return Err(FrameError::SingularOperator { rank: sol.rank, dim: sol.dim });
    }
    Ok(CcSolution {
        coefficients: sol.x,
        basis: op.basis_nodes(pattern),
        v_condition: sol.condition,
        psi_n_condition: op.psi_n_condition,
        psi_n_lambda_min: op.psi_n_lambda_min,
    })
}

/// Cross-Gram over the m-block and the frame operator `W = Ω^H Ω` on `G_n`.
#[derive(Debug, Clone)]
pub struct AfOperator {
    pub m_block: Vec<usize>,
    pub omega: RectMatrix,
    pub w: HermitianMatrix,
}

pub fn build_af_operator(pattern: &SamplingPattern, n: (usize, usize), m: (usize, usize)) -> Result<AfOperator> {
    let grid = IndexGrid::new(n.0, n.1)?;
    let m_block = select_block(pattern, m)?;
    let omega = assemble_cross_gram_for_nodes(&gather(pattern.nodes(), &m_block), grid)?;
    let w = omega.normal()?;
    Ok(AfOperator { m_block, omega, w })
}

/// A-F solution on the orthonormal `φ_l / 2` basis of the centered n-grid.
#[derive(Debug, Clone)]
pub struct AfSolution {
    pub coefficients: Vec<c64>,
    pub grid: IndexGrid,
    pub rank: usize,
    pub condition: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

impl AfSolution {
    pub fn rank_deficient(&self) -> bool {
        self.rank < self.grid.len()
    }
}

/// `c = Ω† b` over every node of the pattern.
pub fn af_reconstruct(data: &[c64], pattern: &SamplingPattern, n: (usize, usize), rel_tol: f64) -> Result<AfSolution> {
    if data.len() != pattern.len() {
        return Err(FrameError::DimensionMismatch { expected: pattern.len(), actual: data.len() });
    }
    let grid = IndexGrid::new(n.0, n.1)?;
    let svd = assemble_cross_gram_for_nodes(pattern.nodes(), grid)?.svd()?;
    let sol = svd.pinv_apply(data, rel_tol)?;
    let sv = svd.singular_values();
    Ok(AfSolution {
        coefficients: sol.x,
        grid,
        rank: sol.rank,
        condition: sol.condition,
        sigma_min: sv.iter().copied().fold(f64::INFINITY, f64::min),
        sigma_max: sv.iter().copied().fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::linalg::solvers::Solve;

    use crate::kernels::{frame_coefficients, TestFunction};
    use crate::numerics::DEFAULT_REL_TOL;
    use crate::patterns::{generate_integer_grid, generate_jittered, preset, JitterParams, PatternKind};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn a_mn_examples() {
        assert!(close(constant_a_mn((1, 1), (2, 2), 1.0, 3.0, 1.0).unwrap(), 3.0, 1e-15));
        let one = constant_a_mn((4, 4), (8, 8), 1.0, 3.0, 0.5).unwrap();
        let two = constant_a_mn((4, 4), (8, 8), 2.0, 3.0, 0.5).unwrap();
        assert!(close(two, 4.0 * one, 1e-15));
        // 2·3·4/(4·0.5) · 16 · 2·4^{-2}
        assert!(close(two, 12.0 * 16.0 * 2.0 / 16.0, 1e-14));
    }

    #[test]
    fn a_mn_errors() {
        assert_eq!(
            constant_a_mn((4, 4), (4, 8), 1.0, 3.0, 1.0),
            Err(FrameError::DivisionByZero { n: (4, 4), m: (4, 8) })
        );
        assert!(matches!(constant_a_mn((1, 1), (2, 2), 1.0, 3.0, 0.0), Err(FrameError::SingularGram { .. })));
        assert!(constant_a_mn((1, 1), (2, 2), 1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn choose_m_cc_examples() {
        assert_eq!(choose_m_cc((1, 1), 1.0, 3.0, 8.0, 1.0).unwrap(), (2, 2));
        // increment 8·3·16/(1·4) = 96 halves to 48 when A doubles
        assert_eq!(choose_m_cc((4, 4), 1.0, 3.0, 1.0, 1.0).unwrap(), (100, 100));
        assert_eq!(choose_m_cc((4, 4), 1.0, 3.0, 2.0, 1.0).unwrap(), (52, 52));
    }

    #[test]
    fn b_mn_examples() {
        assert!(close(constant_b_mn((1, 1), (2, 2), 1.0, 1.0, 1.0).unwrap(), 8.0, 1e-15));
        assert!(close(constant_b_mn((1, 1), (3, 3), 1.0, 1.0, 1.0).unwrap(), 4.0, 1e-15));
        // 4·1·4/1 · 64 · 2/8
        assert!(close(constant_b_mn((8, 8), (16, 16), 2.0, 1.0, 1.0).unwrap(), 256.0, 1e-14));
    }

    #[test]
    fn choose_m_af_examples() {
        assert_eq!(choose_m_af((1, 1), 3.0, 1.0, 1.0, 8.0, 1.0).unwrap(), (2, 2));
        let small = choose_m_af((2, 2), 3.0, 1.5, 1.0, 4.0, 1.0).unwrap();
        let large = choose_m_af((4, 4), 3.0, 1.5, 1.0, 4.0, 1.0).unwrap();
        assert!(large.0 - 4 >= small.0 - 2);
        assert!(choose_m_af((1, 1), 2.0, 1.0, 1.0, 8.0, 1.0).is_err());
    }

    #[test]
    fn preset_ladder() {
        let c = TruncationConstants::table_preset();
        let ns: Vec<usize> =
            [8, 16, 32, 64].iter().map(|&m| n_for_data_side(m, &c, MRule::Consistent).unwrap()).collect();
        assert_eq!(ns, vec![4, 9, 18, 36]);
        for &m in &[8usize, 16, 32, 64] {
            let n = n_for_data_side(m, &c, MRule::Consistent).unwrap();
            assert!(c.choose_m_af((n, n), MRule::Consistent).unwrap().0 <= m);
            assert!(c.choose_m_af((n + 1, n + 1), MRule::Consistent).unwrap().0 > m);
        }
    }

    #[test]
    fn plan_respects_truncation_invariant() {
        let plan = TruncationPlan::for_data_side(16, TruncationConstants::table_preset(), MRule::Consistent, None).unwrap();
        assert!(plan.m.0 > plan.n.0 && plan.m.0 <= plan.data.0);
        assert!(plan.b_mn <= af_target(plan.n, 3.0, 4.0) * (1.0 + 1e-12));
        assert!(plan.a_mn.is_none());
    }

    #[test]
    fn block_selection() {
        let g = generate_integer_grid(4, 4).unwrap();
        let b = select_block(&g, (2, 2)).unwrap();
        let pts: Vec<_> = b.iter().map(|&i| g.nodes()[i]).collect();
        assert_eq!(pts, vec![Node2::new(-1.0, -1.0), Node2::new(-1.0, 0.0), Node2::new(0.0, -1.0), Node2::new(0.0, 0.0)]);
        let s = preset(PatternKind::Spiral, 8, 0).unwrap();
        let b = select_block(&s, (3, 3)).unwrap();
        assert_eq!(b.len(), 9);
        let worst = b.iter().map(|&i| s.nodes()[i].norm()).fold(0.0, f64::max);
        let rest = (0..s.len()).filter(|i| !b.contains(i)).map(|i| s.nodes()[i].norm()).fold(f64::INFINITY, f64::min);
        assert!(worst <= rest);
        assert!(select_block(&g, (5, 4)).is_err());
    }

    #[test]
    fn cc_operator_on_grid_is_4i() {
        let g = generate_integer_grid(6, 6).unwrap();
        for n in [(6, 6), (3, 4)] {
            let op = build_cc_operator(&g, n, (6, 6), DEFAULT_REL_TOL).unwrap();
            let v = op.v();
            for i in 0..v.nrows() {
                for j in 0..v.ncols() {
                    let expect = if i == j { 4.0 } else { 0.0 };
                    assert!((v[(i, j)] - c64::new(expect, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn af_on_grid_halves_data() {
        let g = generate_integer_grid(5, 5).unwrap();
        let data: Vec<c64> = (0..25).map(|k| c64::new(k as f64, -(k as f64) * 0.5)).collect();
        let sol = af_reconstruct(&data, &g, (5, 5), DEFAULT_REL_TOL).unwrap();
        for (c, d) in sol.coefficients.iter().zip(&data) {
            assert!((c - d * 0.5).norm() < 1e-13);
        }
        assert!(!sol.rank_deficient());
    }

    #[test]
    fn af_operator_on_grid_is_4i_and_hermitian() {
        let g = generate_integer_grid(4, 4).unwrap();
        let op = build_af_operator(&g, (4, 4), (4, 4)).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let expect = if i == j { 4.0 } else { 0.0 };
                assert!((op.w.get(i, j).re - expect).abs() < 1e-13);
            }
        }
        let p = generate_jittered(JitterParams { m1: 8, m2: 8, bound: 0.25 }, 1).unwrap();
        let op = build_af_operator(&p, (4, 4), (7, 7)).unwrap();
        let w = op.w.as_mat();
        for i in 0..16 {
            for j in 0..16 {
                assert!((w[(i, j)] - w[(j, i)].conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn cc_self_consistency() {
        // data of a single n-block atom reconstructs as the unit vector on it
        let p = generate_jittered(JitterParams { m1: 8, m2: 8, bound: 0.25 }, 3).unwrap();
        let n = (4, 4);
        let op = build_cc_operator(&p, n, (8, 8), DEFAULT_REL_TOL).unwrap();
        let target = op.n_block[5];
        let atom = Atom::new(p.nodes()[target]);
        let data: Vec<c64> = p.nodes().iter().map(|&k| atom_inner_product(atom, Atom::new(k))).collect();
        let sol = cc_apply(&op, &data, &p, DEFAULT_REL_TOL).unwrap();
        for (i, c) in sol.coefficients.iter().enumerate() {
            let expect = if i == 5 { 1.0 } else { 0.0 };
            assert!((c - c64::new(expect, 0.0)).norm() < 1e-8, "{i}: {c:?}");
        }
    }

    #[test]
    fn cc_operator_matches_direct_composition() {
        let p = generate_jittered(JitterParams { m1: 8, m2: 8, bound: 0.25 }, 6).unwrap();
        let op = build_cc_operator(&p, (4, 4), (8, 8), DEFAULT_REL_TOL).unwrap();
        // oracle: V = Ψ_n⁻¹ (Ψ_{m,n}^H Ψ_{m,n}) with an explicit inverse
        let nodes_n = op.basis_nodes(&p);
        let psi_n = assemble_gram_for_nodes(&nodes_n).unwrap().into_mat();
        let rows: Vec<Node2> = op.m_block.iter().map(|&i| p.nodes()[i]).collect();
        let psi_mn = sampling_cross(&rows, &nodes_n).unwrap();
        let g = psi_mn.as_mat().adjoint() * psi_mn.as_mat();
        let v = psi_n.partial_piv_lu().solve(&g);
        let diff = (&v - op.v()).norm_max();
        assert!(diff < 1e-9, "{diff}");
    }

    #[test]
    fn polar_cc_is_singular() {
        let p = preset(PatternKind::Polar, 8, 0).unwrap();
        let data = frame_coefficients(TestFunction::F1, &p);
        let n = n_for_data_side(8, &TruncationConstants::table_preset(), MRule::Consistent).unwrap();
        assert!(matches!(
            cc_reconstruct(&data, &p, (n, n), (8, 8), DEFAULT_REL_TOL),
            Err(FrameError::SingularOperator { .. })
        ));
    }
}
