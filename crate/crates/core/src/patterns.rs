//! Deterministic generators for the non-uniform frequency-node families:
//! jittered integer grids, rosettes, Archimedean spirals and polar grids.
//!
//! Frequencies are in units of half-cycles over `[-1, 1]`, i.e. the node
//! `λ` belongs to the atom `x ↦ exp(-iπ λ·x)` on the square `[-1, 1]²`.

use std::f64::consts::PI;
use std::fmt;
use std::io::{BufRead, Write};
use std::ops::Range;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};

/// A 2D frequency node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node2 {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl Node2 {
    pub const fn new(lambda1: f64, lambda2: f64) -> Self {
        Self { lambda1, lambda2 }
    }

    pub fn norm(&self) -> f64 {
        self.lambda1.hypot(self.lambda2)
    }

    pub fn is_finite(&self) -> bool {
        self.lambda1.is_finite() && self.lambda2.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatternKind {
    Jittered,
    Rosette,
    Spiral,
    Polar,
    IntegerGrid,
    /// Nodes supplied directly (CSV import or hand-built families).
    Custom,
}

impl PatternKind {
    /// The four families compared in the error tables.
    pub const TABLE_KINDS: [PatternKind; 4] =
        [PatternKind::Jittered, PatternKind::Rosette, PatternKind::Spiral, PatternKind::Polar];

    pub fn as_str(&self) -> &'static str {
        match self {
            PatternKind::Jittered => "jittered",
            PatternKind::Rosette => "rosette",
            PatternKind::Spiral => "spiral",
            PatternKind::Polar => "polar",
            PatternKind::IntegerGrid => "integer-grid",
            PatternKind::Custom => "custom",
        }
    }

    /// Kinds whose nodes carry an integer grid index.
    pub fn is_grid_like(&self) -> bool {
        matches!(self, PatternKind::Jittered | PatternKind::IntegerGrid)
    }
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PatternKind {
    type Err = FrameError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "jittered" => PatternKind::Jittered,
            "rosette" => PatternKind::Rosette,
            "spiral" => PatternKind::Spiral,
            "polar" => PatternKind::Polar,
            "integer-grid" | "grid" => PatternKind::IntegerGrid,
            "custom" => PatternKind::Custom,
            other => return Err(FrameError::Parse(format!("unknown pattern kind `{other}`"))),
        })
    }
}

/// Jittered-grid parameters; `bound` is the per-coordinate jitter magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JitterParams {
    pub m1: usize,
    pub m2: usize,
    pub bound: f64,
}

/// Largest jitter for which the perturbed grid is guaranteed to be a frame.
pub const KADEC_BOUND: f64 = 0.25;

/// A one-dimensional parameter sweep (rosette `t_j`, spiral `θ_j`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SampleSweep {
    /// `start + (stop - start) * (j + offset) / count` for `j in 0..count`.
    Uniform { start: f64, stop: f64, count: usize, offset: f64 },
    Explicit(Vec<f64>),
}

impl SampleSweep {
    pub fn values(&self) -> Vec<f64> {
        match self {
            SampleSweep::Uniform { start, stop, count, offset } => {
                let step = (stop - start) / *count as f64;
                (0..*count).map(|j| start + step * (j as f64 + offset)).collect()
            }
            SampleSweep::Explicit(v) => v.clone(),
        }
    }

    pub fn encode(&self) -> String {
        match self {
            SampleSweep::Uniform { start, stop, count, offset } => {
                format!("uniform:{}:{}:{count}:{}", fmt17(*start), fmt17(*stop), fmt17(*offset))
            }
            SampleSweep::Explicit(v) => {
                let parts: Vec<String> = v.iter().map(|x| fmt17(*x)).collect();
                format!("list:{}", parts.join(";"))
            }
        }
    }

    pub fn decode(s: &str) -> Result<Self> {
        let bad = || FrameError::Parse(format!("malformed sweep `{s}`"));
        if let Some(rest) = s.strip_prefix("uniform:") {
            let f: Vec<&str> = rest.split(':').collect();
            if f.len() != 4 {
                return Err(bad());
            }
            Ok(SampleSweep::Uniform {
                start: parse_f64(f[0])?,
                stop: parse_f64(f[1])?,
                count: f[2].parse().map_err(|_| bad())?,
                offset: parse_f64(f[3])?,
            })
        } else if let Some(rest) = s.strip_prefix("list:") {
            let v = if rest.is_empty() {
                Vec::new()
            } else {
                rest.split(';').map(parse_f64).collect::<Result<Vec<_>>>()?
            };
            Ok(SampleSweep::Explicit(v))
        } else {
            Err(bad())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PatternParams {
    Jittered(JitterParams),
    Rosette { k_max: f64, w1: f64, w2: f64, t: SampleSweep },
    Spiral { c: f64, theta: SampleSweep },
    Polar { c: f64, r: usize, t: usize },
    IntegerGrid { m1: usize, m2: usize },
    Custom,
}

impl PatternParams {
    pub fn kind(&self) -> PatternKind {
        match self {
            PatternParams::Jittered(_) => PatternKind::Jittered,
            PatternParams::Rosette { .. } => PatternKind::Rosette,
            PatternParams::Spiral { .. } => PatternKind::Spiral,
            PatternParams::Polar { .. } => PatternKind::Polar,
            PatternParams::IntegerGrid { .. } => PatternKind::IntegerGrid,
            PatternParams::Custom => PatternKind::Custom,
        }
    }
}

/// An ordered set of frequency nodes plus the record needed to regenerate it.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPattern {
    nodes: Vec<Node2>,
    params: PatternParams,
    seed: Option<u64>,
    warnings: Vec<String>,
}

impl SamplingPattern {
    /// Wraps a hand-built node list.
    pub fn custom(nodes: Vec<Node2>) -> Result<Self> {
        if let Some(bad) = nodes.iter().find(|n| !n.is_finite()) {
            return Err(FrameError::InvalidParameter(format!("non-finite node {bad:?}")));
        }
        Ok(Self { nodes, params: PatternParams::Custom, seed: None, warnings: Vec::new() })
    }

    pub fn kind(&self) -> PatternKind {
        self.params.kind()
    }

    pub fn nodes(&self) -> &[Node2] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn params(&self) -> &PatternParams {
        &self.params
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Per-axis node counts for grid-like kinds.
    pub fn grid_shape(&self) -> Option<(usize, usize)> {
        match &self.params {
            PatternParams::Jittered(p) => Some((p.m1, p.m2)),
            PatternParams::IntegerGrid { m1, m2 } => Some((*m1, *m2)),
            _ => None,
        }
    }

    /// Integer grid index of every node (row-major), for grid-like kinds.
    pub fn grid_indices(&self) -> Option<Vec<[i64; 2]>> {
        let (m1, m2) = self.grid_shape()?;
        Some(grid_points(m1, m2))
    }

    /// Coordinates used as `j` in localization diagnostics: grid indices for
    /// grid-like kinds, the raw frequencies otherwise.
    pub fn index_coordinates(&self) -> Vec<[f64; 2]> {
        match self.grid_indices() {
            Some(idx) => idx.iter().map(|j| [j[0] as f64, j[1] as f64]).collect(),
            None => self.nodes.iter().map(|n| [n.lambda1, n.lambda2]).collect(),
        }
    }

    /// Regenerates the pattern from its stored (kind, params, seed) record.
    pub fn regenerate(&self) -> Result<SamplingPattern> {
        match &self.params {
            PatternParams::Jittered(p) => generate_jittered(*p, self.seed.unwrap_or(0)),
            PatternParams::Rosette { k_max, w1, w2, t } => generate_rosette_sweep(*k_max, *w1, *w2, t.clone()),
            PatternParams::Spiral { c, theta } => generate_spiral_sweep(*c, theta.clone()),
            PatternParams::Polar { c, r, t } => generate_polar(*c, *r, *t),
            PatternParams::IntegerGrid { m1, m2 } => generate_integer_grid(*m1, *m2),
            PatternParams::Custom => Ok(self.clone()),
        }
    }

    /// The same pattern with every node listed twice (`[n0, n0, n1, n1, ...]`).
    pub fn doubled(&self) -> SamplingPattern {
        let nodes = self.nodes.iter().flat_map(|n| [*n, *n]).collect();
        SamplingPattern { nodes, params: PatternParams::Custom, seed: None, warnings: Vec::new() }
    }
}

/// Centered index range covering `[-n/2, n/2)`: `-⌊n/2⌋ .. n - ⌊n/2⌋`.
pub fn centered_range(n: usize) -> Range<i64> {
    let half = (n / 2) as i64;
    -half..(n as i64 - half)
}

/// Row-major list of centered grid points (first coordinate outer).
pub fn grid_points(n1: usize, n2: usize) -> Vec<[i64; 2]> {
    let mut out = Vec::with_capacity(n1 * n2);
    for j1 in centered_range(n1) {
        for j2 in centered_range(n2) {
            out.push([j1, j2]);
        }
    }
    out
}

fn node_stream(j1: i64, j2: i64) -> u64 {
    ((j1 as i32 as u32 as u64) << 32) | (j2 as i32 as u32 as u64)
}

fn unit_interval(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Jitter offset of grid node `(j1, j2)`: ChaCha8 seeded by `seed`, stream
/// selected by the node index, two draws mapped to `[-bound, bound)`.
pub fn jitter_offset(seed: u64, j1: i64, j2: i64, bound: f64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(node_stream(j1, j2));
    let e1 = bound * (2.0 * unit_interval(rng.next_u64()) - 1.0);
    let e2 = bound * (2.0 * unit_interval(rng.next_u64()) - 1.0);
    (e1, e2)
}

pub fn generate_jittered(params: JitterParams, seed: u64) -> Result<SamplingPattern> {
    if params.m1 == 0 || params.m2 == 0 {
        return Err(FrameError::InvalidParameter("jittered grid counts must be >= 1".into()));
    }
    if !(params.bound >= 0.0) || !params.bound.is_finite() {
        return Err(FrameError::InvalidParameter(format!("jitter bound must be finite and >= 0, got {}", params.bound)));
    }
    let mut warnings = Vec::new();
    if params.bound > KADEC_BOUND {
        warnings.push(format!(
            "jitter bound {} exceeds 1/4; the perturbed grid is no longer guaranteed to be a frame",
            params.bound
        ));
    }
    let nodes = grid_points(params.m1, params.m2)
        .into_iter()
        .map(|[j1, j2]| {
            let (e1, e2) = jitter_offset(seed, j1, j2, params.bound);
            Node2::new(j1 as f64 + e1, j2 as f64 + e2)
        })
        .collect();
    Ok(SamplingPattern { nodes, params: PatternParams::Jittered(params), seed: Some(seed), warnings })
}

pub fn generate_integer_grid(m1: usize, m2: usize) -> Result<SamplingPattern> {
    if m1 == 0 || m2 == 0 {
        return Err(FrameError::InvalidParameter("grid counts must be >= 1".into()));
    }
    let nodes = grid_points(m1, m2).into_iter().map(|[a, b]| Node2::new(a as f64, b as f64)).collect();
    Ok(SamplingPattern { nodes, params: PatternParams::IntegerGrid { m1, m2 }, seed: None, warnings: Vec::new() })
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(FrameError::InvalidParameter(format!("{name} must be finite and > 0, got {v}")))
    }
}

/// `λ_j = k_max (cos(w1 t_j) cos(w2 t_j), cos(w1 t_j) sin(w2 t_j))`.
pub fn generate_rosette(k_max: f64, w1: f64, w2: f64, t_values: &[f64]) -> Result<SamplingPattern> {
    generate_rosette_sweep(k_max, w1, w2, SampleSweep::Explicit(t_values.to_vec()))
}

pub fn generate_rosette_sweep(k_max: f64, w1: f64, w2: f64, t: SampleSweep) -> Result<SamplingPattern> {
    check_positive("k_max", k_max)?;
    check_positive("w1", w1)?;
    check_positive("w2", w2)?;
    let values = t.values();
    if values.is_empty() {
        return Err(FrameError::InvalidParameter("rosette needs at least one t value".into()));
    }
    if let Some(bad) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(FrameError::InvalidParameter(format!("rosette t values must be finite and >= 0, got {bad}")));
    }
    let nodes = values
        .iter()
        .map(|&tj| {
            let r = k_max * (w1 * tj).cos();
            Node2::new(r * (w2 * tj).cos(), r * (w2 * tj).sin())
        })
        .collect();
    Ok(SamplingPattern { nodes, params: PatternParams::Rosette { k_max, w1, w2, t }, seed: None, warnings: Vec::new() })
}

/// `λ_j = (c θ_j cos(2π θ_j), c θ_j sin(2π θ_j))`.
pub fn generate_spiral(c: f64, theta_values: &[f64]) -> Result<SamplingPattern> {
    generate_spiral_sweep(c, SampleSweep::Explicit(theta_values.to_vec()))
}

pub fn generate_spiral_sweep(c: f64, theta: SampleSweep) -> Result<SamplingPattern> {
    check_positive("c", c)?;
    let values = theta.values();
    if values.is_empty() {
        return Err(FrameError::InvalidParameter("spiral needs at least one theta value".into()));
    }
    if let Some(bad) = values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(FrameError::InvalidParameter(format!("spiral theta values must be finite and > 0, got {bad}")));
    }
    let nodes = values
        .iter()
        .map(|&th| {
            let r = c * th;
            let a = 2.0 * PI * th;
            Node2::new(r * a.cos(), r * a.sin())
        })
        .collect();
    Ok(SamplingPattern { nodes, params: PatternParams::Spiral { c, theta }, seed: None, warnings: Vec::new() })
}

/// Polar grid `(c r cos θ, c r sin θ)` with `r = j1/R ∈ [-1/2, 1/2)` and
/// `θ = π j2 / T ∈ [-π/2, π/2)`. Node order: angle outer, radius inner.
///
/// The second coordinate uses `sin`; a literal `cos` in both slots would put
/// every node on the diagonal.
pub fn generate_polar(c: f64, r_count: usize, t_count: usize) -> Result<SamplingPattern> {
    check_positive("c", c)?;
    if r_count == 0 || t_count == 0 {
        return Err(FrameError::InvalidParameter("polar R and T must be >= 1".into()));
    }
    let mut nodes = Vec::with_capacity(r_count * t_count);
    for j2 in centered_range(t_count) {
        let theta = PI * j2 as f64 / t_count as f64;
        let (s, co) = theta.sin_cos();
        for j1 in centered_range(r_count) {
            let r = c * j1 as f64 / r_count as f64;
            nodes.push(Node2::new(r * co, r * s));
        }
    }
    Ok(SamplingPattern {
        nodes,
        params: PatternParams::Polar { c, r: r_count, t: t_count },
        seed: None,
        warnings: Vec::new(),
    })
}

/// Desk-scale presets with `M = m_side²` nodes covering the frequency box of
/// the `m_side × m_side` integer grid (outer radius `m_side / 2`).
pub fn preset(kind: PatternKind, m_side: usize, seed: u64) -> Result<SamplingPattern> {
    if m_side == 0 {
        return Err(FrameError::InvalidParameter("preset side must be >= 1".into()));
    }
    let m = m_side as f64;
    let count = m_side * m_side;
    match kind {
        PatternKind::Jittered => generate_jittered(JitterParams { m1: m_side, m2: m_side, bound: KADEC_BOUND }, seed),
        PatternKind::IntegerGrid => generate_integer_grid(m_side, m_side),
        // One diameter pass of m nodes per half-period of w1 t; w2 = 1/2 sweeps
        // the pass direction through [0, π) over t ∈ [0, 2π). The half-step
        // offset keeps passes from all hitting the origin.
        PatternKind::Rosette => generate_rosette_sweep(
            m / 2.0,
            m / 2.0,
            0.5,
            SampleSweep::Uniform { start: 0.0, stop: 2.0 * PI, count, offset: 0.5 },
        ),
        // Turn spacing 3/2 out to radius m/2: radially sparse, densely sampled along each turn.
        PatternKind::Spiral => {
            generate_spiral_sweep(1.5, SampleSweep::Uniform { start: 0.0, stop: m / 3.0, count, offset: 1.0 })
        }
        PatternKind::Polar => generate_polar(m, m_side, m_side),
        PatternKind::Custom => Err(FrameError::InvalidParameter("custom patterns have no preset".into())),
    }
}

/// Formats with 17 significant digits, which round-trips every `f64`.
pub fn fmt17(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| FrameError::Parse(format!("bad number `{s}`")))
}

fn header_fields(p: &SamplingPattern) -> Vec<String> {
    let mut f = vec![p.kind().as_str().to_string()];
    match &p.params {
        PatternParams::Jittered(j) => {
            f.push(format!("m1={}", j.m1));
            f.push(format!("m2={}", j.m2));
            f.push(format!("bound={}", fmt17(j.bound)));
            f.push(format!("seed={}", p.seed.unwrap_or(0)));
        }
        PatternParams::Rosette { k_max, w1, w2, t } => {
            f.push(format!("k_max={}", fmt17(*k_max)));
            f.push(format!("w1={}", fmt17(*w1)));
            f.push(format!("w2={}", fmt17(*w2)));
            f.push(format!("t={}", t.encode()));
        }
        PatternParams::Spiral { c, theta } => {
            f.push(format!("c={}", fmt17(*c)));
            f.push(format!("theta={}", theta.encode()));
        }
        PatternParams::Polar { c, r, t } => {
            f.push(format!("c={}", fmt17(*c)));
            f.push(format!("R={r}"));
            f.push(format!("T={t}"));
        }
        PatternParams::IntegerGrid { m1, m2 } => {
            f.push(format!("m1={m1}"));
            f.push(format!("m2={m2}"));
        }
        PatternParams::Custom => {}
    }
    f
}

/// Writes the pattern as CSV: one `kind,key=value,...` header line followed
/// by one `lambda1,lambda2` row per node.
pub fn write_csv<W: Write>(pattern: &SamplingPattern, mut out: W) -> Result<()> {
    writeln!(out, "{}", header_fields(pattern).join(","))?;
    for n in &pattern.nodes {
        writeln!(out, "{},{}", fmt17(n.lambda1), fmt17(n.lambda2))?;
    }
    Ok(())
}

/// Reads a pattern written by [`write_csv`]. Node values are taken from the
/// rows verbatim; the header restores the generation record.
pub fn read_csv<R: BufRead>(input: R) -> Result<SamplingPattern> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| FrameError::Parse("empty pattern file".into()))??;
    let mut fields = header.split(',');
    let kind: PatternKind = fields.next().unwrap_or("").trim().parse()?;
    let mut kv = std::collections::HashMap::new();
    for f in fields {
        let (k, v) = f.split_once('=').ok_or_else(|| FrameError::Parse(format!("bad header field `{f}`")))?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    let get = |k: &str| kv.get(k).cloned().ok_or_else(|| FrameError::Parse(format!("missing header field `{k}`")));
    let get_usize = |k: &str| -> Result<usize> {
        get(k)?.parse().map_err(|_| FrameError::Parse(format!("bad integer for `{k}`")))
    };
    let mut seed = None;
    let params = match kind {
        PatternKind::Jittered => {
            seed = Some(get("seed")?.parse().map_err(|_| FrameError::Parse("bad seed".into()))?);
            PatternParams::Jittered(JitterParams { m1: get_usize("m1")?, m2: get_usize("m2")?, bound: parse_f64(&get("bound")?)? })
        }
        PatternKind::Rosette => PatternParams::Rosette {
            k_max: parse_f64(&get("k_max")?)?,
            w1: parse_f64(&get("w1")?)?,
            w2: parse_f64(&get("w2")?)?,
            t: SampleSweep::decode(&get("t")?)?,
        },
        PatternKind::Spiral => {
            PatternParams::Spiral { c: parse_f64(&get("c")?)?, theta: SampleSweep::decode(&get("theta")?)? }
        }
        PatternKind::Polar => PatternParams::Polar { c: parse_f64(&get("c")?)?, r: get_usize("R")?, t: get_usize("T")? },
        PatternKind::IntegerGrid => PatternParams::IntegerGrid { m1: get_usize("m1")?, m2: get_usize("m2")? },
        PatternKind::Custom => PatternParams::Custom,
    };
    let mut nodes = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (a, b) = line.split_once(',').ok_or_else(|| FrameError::Parse(format!("bad node row `{line}`")))?;
        nodes.push(Node2::new(parse_f64(a)?, parse_f64(b)?));
    }
    Ok(SamplingPattern { nodes, params, seed, warnings: Vec::new() })
}
