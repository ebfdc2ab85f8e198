//! Command-line front end.
//!
//! Exit codes: 0 on success (NaN table cells included), 1 on I/O failure,
//! 2 on usage or parameter errors, 3 on numerical failure.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::error::{FrameError, Result};
use crate::eval::{
    cross_section, log_error_field, plan_for, reconstruct, run_table, table_csv, table_text, write_pgm, write_ppm,
    write_section_csv, Axis, Basis, ConstantsMode, EvalGrid, Method, TableConfig,
};
use crate::frame::{assemble_gram_for_nodes, assemble_sampling_gram, estimate_frame_bounds, verify_localization, FrameSpec, IndexGrid};
use crate::kernels::TestFunction;
use crate::numerics::{min_eigenvalue, DEFAULT_REL_TOL};
use crate::operators::{select_block, MRule, TruncationPlan};
use crate::patterns::{
    fmt17, generate_integer_grid, generate_jittered, generate_polar, generate_rosette_sweep, generate_spiral_sweep,
    preset, read_csv, write_csv, JitterParams, PatternKind, SampleSweep, SamplingPattern, KADEC_BOUND,
};

pub const THREADS_ENV: &str = "FRAME_RECON_THREADS";

#[derive(Debug, Parser)]
#[command(name = "frame-recon", version, about = "Reconstruct 2D functions from non-uniform Fourier frame data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a sampling pattern and write its node CSV.
    Pattern(PatternCmd),
    /// Reconstruct a test function and write coefficients, images and diagnostics.
    Reconstruct(ReconstructCmd),
    /// Reproduce an error table over patterns, sizes and methods.
    Table(TableCmd),
    /// Report frame bounds and localization estimates for a pattern.
    Diagnose(DiagnoseCmd),
}

#[derive(Debug, Args)]
struct PatternArgs {
    /// jittered, rosette, spiral, polar or integer-grid.
    kind: PatternKind,
    /// Grid counts `m1 m2` (jittered, integer-grid).
    #[arg(long, num_args = 2, value_names = ["M1", "M2"])]
    m: Option<Vec<usize>>,
    /// Jitter bound (jittered).
    #[arg(long)]
    bound: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Scale (spiral, polar).
    #[arg(long)]
    c: Option<f64>,
    /// Radial count (polar).
    #[arg(long = "R")]
    r: Option<usize>,
    /// Angular count (polar).
    #[arg(long = "T")]
    t: Option<usize>,
    #[arg(long)]
    k_max: Option<f64>,
    #[arg(long)]
    w1: Option<f64>,
    #[arg(long)]
    w2: Option<f64>,
    /// Parameter samples for rosette (t) or spiral (θ): `uniform:start:stop:count:offset` or `list:a;b;...`.
    #[arg(long)]
    sweep: Option<String>,
    /// Desk-scale preset with `side²` nodes; fills in any parameter not given.
    #[arg(long)]
    side: Option<usize>,
}

impl PatternArgs {
    fn build(&self) -> Result<SamplingPattern> {
        let sweep = self.sweep.as_deref().map(SampleSweep::decode).transpose()?;
        let missing = |what: &str| FrameError::InvalidParameter(format!("{} needs {what} (or --side)", self.kind));
        match self.kind {
            PatternKind::Jittered => {
                let (m1, m2) = self.pair().or_else(|| self.side.map(|s| (s, s))).ok_or_else(|| missing("--m"))?;
                let bound = self.bound.unwrap_or(KADEC_BOUND);
                let seed = match (self.seed, bound) {
                    (Some(s), _) => s,
                    (None, 0.0) => 0,
                    _ => return Err(FrameError::InvalidParameter("jittered patterns need --seed".into())),
                };
                generate_jittered(JitterParams { m1, m2, bound }, seed)
            }
            PatternKind::IntegerGrid => {
                let (m1, m2) = self.pair().or_else(|| self.side.map(|s| (s, s))).ok_or_else(|| missing("--m"))?;
                generate_integer_grid(m1, m2)
            }
            PatternKind::Polar => match (self.c, self.r, self.t) {
                (Some(c), Some(r), Some(t)) => generate_polar(c, r, t),
                _ => match self.side {
                    Some(s) => generate_polar(self.c.unwrap_or(s as f64), self.r.unwrap_or(s), self.t.unwrap_or(s)),
                    None => Err(missing("--c, --R and --T")),
                },
            },
            PatternKind::Rosette => match (self.k_max, self.w1, self.w2, sweep) {
                (Some(k), Some(w1), Some(w2), Some(t)) => generate_rosette_sweep(k, w1, w2, t),
                _ => self.side.ok_or_else(|| missing("--k-max, --w1, --w2 and --sweep")).and_then(|s| preset(self.kind, s, 0)),
            },
            PatternKind::Spiral => match (self.c, sweep) {
                (Some(c), Some(theta)) => generate_spiral_sweep(c, theta),
                _ => self.side.ok_or_else(|| missing("--c and --sweep")).and_then(|s| preset(self.kind, s, 0)),
            },
            PatternKind::Custom => Err(FrameError::InvalidParameter("custom patterns are read with --pattern-file".into())),
        }
    }

    fn pair(&self) -> Option<(usize, usize)> {
        self.m.as_ref().map(|v| (v[0], v[1]))
    }
}

#[derive(Debug, Args)]
struct PatternCmd {
    #[command(flatten)]
    pattern: PatternArgs,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReconstructCmd {
    /// Test function: f1 or f2.
    #[arg(long = "f")]
    function: TestFunction,
    /// af or cc.
    #[arg(long)]
    method: Method,
    /// Preset pattern kind; ignored with --pattern-file.
    #[arg(long, required_unless_present = "pattern_file")]
    pattern: Option<PatternKind>,
    /// Node CSV written by the `pattern` command.
    #[arg(long)]
    pattern_file: Option<PathBuf>,
    /// Data size; must be a perfect square for presets.
    #[arg(long = "M")]
    data_size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Jitter bound override for the jittered preset.
    #[arg(long)]
    bound: Option<f64>,
    /// Reconstruction side `n`; chosen from the data size when omitted.
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    numerics: NumericArgs,
    #[arg(long, default_value = "x1")]
    section_axis: Axis,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    section_value: f64,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct NumericArgs {
    /// preset or fitted constants for the choice of n.
    #[arg(long, default_value = "preset")]
    constants: ConstantsMode,
    /// consistent or verbatim (γ, λ_min) pairing in the m-choice.
    #[arg(long, default_value = "consistent")]
    m_rule: MRule,
    #[arg(long, default_value_t = DEFAULT_REL_TOL)]
    rel_tol: f64,
    /// Evaluation points per axis.
    #[arg(long, default_value_t = 128)]
    grid: usize,
}

#[derive(Debug, Args)]
struct TableCmd {
    /// f1 or f2.
    #[arg(long)]
    example: TestFunction,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Data sides, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [8, 16, 32, 64])]
    sizes: Vec<usize>,
    /// Pattern kinds, comma separated.
    #[arg(long, value_delimiter = ',')]
    patterns: Option<Vec<PatternKind>>,
    /// Methods, comma separated.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    /// Worker threads; falls back to FRAME_RECON_THREADS, then all cores.
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    numerics: NumericArgs,
    /// Output directory for `table_<example>.csv` and `.txt`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DiagnoseCmd {
    #[command(flatten)]
    pattern: PatternArgs,
    /// Decay exponent used for gamma_hat.
    #[arg(long, default_value_t = 1.0)]
    exponent: f64,
    /// Probe grid side; defaults to the pattern's grid side.
    #[arg(long)]
    probe: Option<usize>,
}

fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("NaN")
    } else if x > 0.0 {
        json!("Infinity")
    } else {
        json!("-Infinity")
    }
}

fn exit_code(e: &FrameError) -> i32 {
    match e {
        FrameError::Io(_) => 1,
        FrameError::NumericalFailure { .. } | FrameError::SingularGram { .. } | FrameError::SingularOperator { .. } => 3,
        _ => 2,
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = match cli.command {
        Command::Pattern(c) => cmd_pattern(&c),
        Command::Reconstruct(c) => cmd_reconstruct(&c),
        Command::Table(c) => cmd_table(&c),
        Command::Diagnose(c) => cmd_diagnose(&c),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn pretty(value: &Value) -> Result<String> {
    serde_json::to_string_pretty(value).map(|s| s + "\n").map_err(|e| FrameError::Io(e.to_string()))
}

// A closed stdout (e.g. `| head`) is an I/O error, not a panic.
fn emit(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(pretty(value)?.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn cmd_pattern(cmd: &PatternCmd) -> Result<()> {
    let p = cmd.pattern.build()?;
    for w in p.warnings() {
        eprintln!("warning: {w}");
    }
    match &cmd.out {
        Some(path) => {
            let mut w = create(path)?;
            write_csv(&p, &mut w)?;
            w.flush()?;
        }
        None => write_csv(&p, io::stdout().lock())?,
    }
    Ok(())
}

fn perfect_square(m: usize) -> Option<usize> {
    let r = (m as f64).sqrt().round() as usize;
    (r * r == m).then_some(r)
}

fn cmd_reconstruct(cmd: &ReconstructCmd) -> Result<()> {
    let nums = &cmd.numerics;
    let grid = EvalGrid::new(nums.grid, nums.grid)?;
    let (pattern, m_side) = match (&cmd.pattern_file, cmd.pattern) {
        (Some(path), _) => {
            let p = read_csv(BufReader::new(File::open(path)?))?;
            let side = perfect_square(p.len());
            (p, side)
        }
        (None, Some(kind)) => {
            let m = cmd.data_size.ok_or_else(|| FrameError::InvalidParameter("--M is required with --pattern".into()))?;
            let side = perfect_square(m)
                .ok_or_else(|| FrameError::InvalidParameter(format!("--M {m} is not a perfect square")))?;
            let p = match kind {
                PatternKind::Jittered => {
                    let bound = cmd.bound.unwrap_or(KADEC_BOUND);
                    let seed = match cmd.seed {
                        Some(s) => s,
                        None if bound == 0.0 => 0,
                        None => return Err(FrameError::InvalidParameter("jittered patterns need --seed".into())),
                    };
                    generate_jittered(JitterParams { m1: side, m2: side, bound }, seed)?
                }
                other => preset(other, side, cmd.seed.unwrap_or(0))?,
            };
            (p, Some(side))
        }
        (None, None) => return Err(FrameError::InvalidParameter("--pattern or --pattern-file is required".into())),
    };
    let plan = match (cmd.n, m_side) {
        (Some(n), Some(side)) if n <= side => {
            let base = plan_for(&pattern, side, nums.constants, nums.m_rule)?;
            TruncationPlan { n: (n, n), ..base }
        }
        (Some(n), _) => {
            let base = TruncationPlan::for_data_side(
                2,
                crate::operators::TruncationConstants::table_preset(),
                nums.m_rule,
                None,
            )?;
            let len = pattern.len();
            let data = perfect_square(len).map_or((len, 1), |s| (s, s));
            TruncationPlan { n: (n, n), m: data, data, b_mn: f64::NAN, a_mn: None, ..base }
        }
        (None, Some(side)) => plan_for(&pattern, side, nums.constants, nums.m_rule)?,
        (None, None) => {
            return Err(FrameError::InvalidParameter("--n is required for non-square custom patterns".into()));
        }
    };
    let r = reconstruct(cmd.function, cmd.method, &pattern, &plan, nums.rel_tol, grid)?;
    eprintln!("wall time: {:.3} s", r.diagnostics.wall_time_s);
    let d = &r.diagnostics;
    let summary = json!({
        "function": cmd.function.as_str(),
        "method": cmd.method.as_str(),
        "pattern": pattern.kind().as_str(),
        "nodes": pattern.len(),
        "seed": pattern.seed(),
        "n": [d.n.0, d.n.1],
        "m": [d.m.0, d.m.1],
        "data": [d.data.0, d.data.1],
        "basis": r.basis.tag(),
        "rank": d.rank,
        "dim": d.dim,
        "condition": num(d.condition),
        "lambda_min": num(d.lambda_min),
        "b_mn": num(plan.b_mn),
        "singular": d.singular,
        "rank_deficient": d.rank_deficient,
        "constants": {
            "gamma": num(plan.constants.gamma),
            "gamma1": num(plan.constants.gamma1),
            "s": num(plan.constants.s),
            "t": num(plan.constants.t),
            "A": num(plan.constants.a),
        },
        "grid": [grid.n1, grid.n2],
        "mse": num(r.mse),
    });
    emit(&pretty(&summary)?)?;
    let Some(dir) = &cmd.out else { return Ok(()) };
    fs::create_dir_all(dir)?;
    write_json(&dir.join("diagnostics.json"), &summary)?;
    let mut w = create(&dir.join("coefficients.csv"))?;
    writeln!(w, "basis,lambda1,lambda2,re,im")?;
    let freqs: Vec<[f64; 2]> = match &r.basis {
        Basis::Psi(nodes) => nodes.iter().map(|n| [n.lambda1, n.lambda2]).collect(),
        Basis::Phi(g) => g.coordinates(),
    };
    for (f, c) in freqs.iter().zip(&r.coefficients) {
        writeln!(w, "{},{},{},{},{}", r.basis.tag(), fmt17(f[0]), fmt17(f[1]), fmt17(c.re), fmt17(c.im))?;
    }
    w.flush()?;
    if !r.grid_values.is_empty() {
        let magnitude: Vec<f64> = r.grid_values.iter().map(|z| z.norm()).collect();
        let mut w = create(&dir.join("recon.pgm"))?;
        write_pgm(&magnitude, grid.n2, grid.n1, &mut w)?;
        w.flush()?;
        let mut w = create(&dir.join("error.ppm"))?;
        write_ppm(&log_error_field(&r.grid_values, cmd.function, grid), grid.n2, grid.n1, &mut w)?;
        w.flush()?;
        let rows = cross_section(&r.grid_values, cmd.function, grid, cmd.section_axis, cmd.section_value)?;
        let mut w = create(&dir.join("section.csv"))?;
        write_section_csv(&rows, &mut w)?;
        w.flush()?;
    }
    Ok(())
}

/// `--threads`, else the environment variable, else rayon's default.
fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    if let Some(k) = flag {
        return Ok(Some(k));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| FrameError::InvalidParameter(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        Err(_) => Ok(None),
    }
}

fn cmd_table(cmd: &TableCmd) -> Result<()> {
    let nums = &cmd.numerics;
    let mut cfg = TableConfig::new(cmd.example, cmd.seed);
    cfg.sizes = cmd.sizes.clone();
    if let Some(p) = &cmd.patterns {
        cfg.patterns = p.clone();
    }
    if let Some(m) = &cmd.methods {
        cfg.methods = m.clone();
    }
    cfg.rel_tol = nums.rel_tol;
    cfg.constants = nums.constants;
    cfg.rule = nums.m_rule;
    cfg.grid = EvalGrid::new(nums.grid, nums.grid)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = thread_count(cmd.threads)? {
        if k == 0 {
            return Err(FrameError::InvalidParameter("--threads must be >= 1".into()));
        }
        builder = builder.num_threads(k);
    }
    let pool = builder.build().map_err(|e| FrameError::InvalidParameter(e.to_string()))?;
    let cells = pool.install(|| run_table(&cfg));
    for c in cells.iter().filter(|c| c.detail.is_some()) {
        eprintln!("{} {}^2 {}: {}", c.pattern, c.m_side, c.method.label(), c.detail.as_deref().unwrap_or(""));
    }
    let csv = table_csv(cmd.example, &cells);
    let text = table_text(&cells);
    emit(&text)?;
    if let Some(dir) = &cmd.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(format!("table_{}.csv", cmd.example.as_str())), csv)?;
        fs::write(dir.join(format!("table_{}.txt", cmd.example.as_str())), text)?;
    }
    Ok(())
}

fn cmd_diagnose(cmd: &DiagnoseCmd) -> Result<()> {
    let p = cmd.pattern.build()?;
    let side = p
        .grid_shape()
        .map(|(a, b)| a.min(b))
        .or_else(|| perfect_square(p.len()))
        .unwrap_or_else(|| ((p.len() as f64).sqrt() as usize).max(1));
    let probe = IndexGrid::square(cmd.probe.unwrap_or(side))?;
    let bounds = estimate_frame_bounds(&p, probe)?;
    let gram = assemble_sampling_gram(&p)?;
    let loc = verify_localization(&gram, &p.index_coordinates(), cmd.exponent)?;
    let spec = FrameSpec::fitted(p.clone(), probe)?;
    let block = select_block(&p, (probe.n1, probe.n2))?;
    let sub: Vec<_> = block.iter().map(|&i| p.nodes()[i]).collect();
    let lambda_min = min_eigenvalue(&assemble_gram_for_nodes(&sub)?)?;
    let l = spec.localization;
    let out = json!({
        "pattern": p.kind().as_str(),
        "nodes": p.len(),
        "probe": [probe.n1, probe.n2],
        "exponent": cmd.exponent,
        "gamma_hat": num(loc.gamma_hat),
        "s_hat": num(loc.s_hat),
        "t_hat": num(l.t),
        "gamma1_hat": num(l.gamma1),
        "s_cross_hat": num(l.s_cross),
        "frame_bounds": {
            "A": num(bounds.a),
            "B": num(bounds.b),
            "method": "finite-section",
            "ill_posed": bounds.ill_posed,
            "kadec_1d": bounds.kadec_1d.map(|(a, b)| json!([num(a), num(b)])),
        },
        "ill_posed": bounds.ill_posed,
        "lambda_min_psi_n": num(lambda_min),
        "warnings": p.warnings(),
    });
    emit(&pretty(&out)?)?;
    Ok(())
}
