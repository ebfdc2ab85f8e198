//! Closed-form inner products of exponential atoms on `[-1, 1]²`, the two
//! test functions with their exact frame coefficients, and a tensor
//! Gauss-Legendre quadrature used as an independent oracle.
//!
//! Conventions: the atom with frequency `λ` is `ψ(x) = exp(-iπ λ·x)` and
//! `⟨f, g⟩ = ∫ f conj(g) dx`, so `⟨f, ψ⟩ = ∫ f(x) exp(+iπ λ·x) dx` and
//! `‖ψ‖² = 4`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::numerics::pairwise_sum;
use crate::patterns::{Node2, SamplingPattern};

const SINC_SERIES_CUTOFF: f64 = 1e-8;

/// `sin(πu) / (πu)`, with the removable singularity handled by its series.
pub fn sinc(u: f64) -> f64 {
    if u.abs() < SINC_SERIES_CUTOFF {
        let z2 = (PI * u) * (PI * u);
        1.0 - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        let z = PI * u;
        z.sin() / z
    }
}

/// An exponential atom `x ↦ exp(-iπ λ·x)` on `[-1, 1]²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub node: Node2,
}

impl Atom {
    pub const fn new(node: Node2) -> Self {
        Self { node }
    }

    pub fn integer(l1: i64, l2: i64) -> Self {
        Self::new(Node2::new(l1 as f64, l2 as f64))
    }

    pub fn value_at(&self, x1: f64, x2: f64) -> c64 {
        c64::cis(-PI * (self.node.lambda1 * x1 + self.node.lambda2 * x2))
    }
}

/// `⟨ψ_a, ψ_b⟩ = 4 sinc(λ_a1 - λ_b1) sinc(λ_a2 - λ_b2)`.
pub fn atom_inner_product(a: Atom, b: Atom) -> c64 {
    c64::new(
        4.0 * sinc(a.node.lambda1 - b.node.lambda1) * sinc(a.node.lambda2 - b.node.lambda2),
        0.0,
    )
}

/// The two smooth test functions on `[-1, 1]²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestFunction {
    /// `sin(4π x1) sin(2π x2)`
    F1,
    /// `sin(4π x1) (x2² - 1)²`
    F2,
}

impl TestFunction {
    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        match self {
            TestFunction::F1 => (4.0 * PI * x1).sin() * (2.0 * PI * x2).sin(),
            TestFunction::F2 => {
                let q = x2 * x2 - 1.0;
                (4.0 * PI * x1).sin() * q * q
            }
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            TestFunction::F1 => "f1",
            TestFunction::F2 => "f2",
        }
    }

    /// `⟨f, ψ⟩` for the atom at `node`, in closed form.
    pub fn frame_coefficient(&self, node: Node2) -> c64 {
        let x1 = sine_factor(4.0, node.lambda1);
        match self {
            TestFunction::F1 => x1 * sine_factor(2.0, node.lambda2),
            TestFunction::F2 => x1 * bump_factor(node.lambda2),
        }
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TestFunction {
    type Err = FrameError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "f1" => Ok(TestFunction::F1),
            "f2" => Ok(TestFunction::F2),
            other => Err(FrameError::Parse(format!("unknown test function `{other}`"))),
        }
    }
}

/// `∫_{-1}^{1} sin(kπx) exp(iπλx) dx = i [sinc(λ - k) - sinc(λ + k)]`.
fn sine_factor(k: f64, lambda: f64) -> c64 {
    c64::new(0.0, sinc(lambda - k) - sinc(lambda + k))
}

// Below this |πλ| the closed form of the bump integral loses digits to
// cancellation (error ~ eps/ω⁴), so the even Taylor series is used instead.
const BUMP_SERIES_CUTOFF: f64 = 2.0;
const BUMP_SERIES_TERMS: usize = 24;

/// `∫_{-1}^{1} (x² - 1)² exp(iπλx) dx`, which is real because the weight is even.
fn bump_factor(lambda: f64) -> c64 {
    let w = PI * lambda;
    let value = if w.abs() < BUMP_SERIES_CUTOFF {
        // Σ_k (-1)^k ω^{2k}/(2k)! · ∫ (1 - x²)² x^{2k} dx
        let w2 = w * w;
        let mut term_scale = 1.0; // (-1)^k ω^{2k} / (2k)!
        let mut terms = [0.0; BUMP_SERIES_TERMS];
        for (k, t) in terms.iter_mut().enumerate() {
            let kf = k as f64;
            let moment = 2.0 / (2.0 * kf + 1.0) - 4.0 / (2.0 * kf + 3.0) + 2.0 / (2.0 * kf + 5.0);
            *t = term_scale * moment;
            term_scale *= -w2 / ((2.0 * kf + 1.0) * (2.0 * kf + 2.0));
        }
        // smallest terms first
        terms.iter().rev().sum()
    } else {
        let (s, c) = w.sin_cos();
        16.0 * ((3.0 - w * w) * s - 3.0 * w * c) / w.powi(5)
    };
    c64::new(value, 0.0)
}

/// Frame data `⟨f, ψ_j⟩` for every node of `pattern`, in pattern order.
pub fn frame_coefficients(f: TestFunction, pattern: &SamplingPattern) -> Vec<c64> {
    pattern.nodes().iter().map(|&n| f.frame_coefficient(n)).collect()
}

/// Gauss-Legendre rule on `[-1, 1]`, applied as a tensor product in 2D.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Nodes are the roots of `P_order`, found by Newton iteration on the
    /// three-term recurrence.
    pub fn gauss_legendre(order: usize) -> Result<Self> {
        if order < 2 {
            return Err(FrameError::InvalidParameter(format!("quadrature order must be >= 2, got {order}")));
        }
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Ok(Self { order, nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫∫ g(x1, x2) dx` over `[-1, 1]²`.
    pub fn integrate_2d(&self, g: impl Fn(f64, f64) -> c64) -> c64 {
        let mut terms = Vec::with_capacity(self.order * self.order);
        for (x1, w1) in self.nodes.iter().zip(&self.weights) {
            for (x2, w2) in self.nodes.iter().zip(&self.weights) {
                terms.push(g(*x1, *x2) * (w1 * w2));
            }
        }
        pairwise_sum(&terms)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Quadrature approximation of `⟨g, ψ_a⟩ = ∫ g(x) exp(+iπ λ_a·x) dx`.
pub fn quadrature_inner_product(g: impl Fn(f64, f64) -> c64, a: Atom, rule: &QuadratureRule) -> c64 {
    rule.integrate_2d(|x1, x2| g(x1, x2) * a.value_at(x1, x2).conj())
}
