//! Acceptance suite. Each test prints one `PASS`/`FAIL` line before asserting,
//! so `cargo test --test acceptance -- --nocapture` gives a readable report.

use std::collections::HashMap;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use frame_recon::eval::*;
use frame_recon::frame::*;
use frame_recon::kernels::*;
use frame_recon::numerics::DEFAULT_REL_TOL;
use frame_recon::operators::*;
use frame_recon::patterns::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SIZES: [usize; 4] = [8, 16, 32, 64];

fn report(label: &str, pass: bool, detail: &str) {
    println!("{} {label}: {detail}", if pass { "PASS" } else { "FAIL" });
}

type Cells = HashMap<(PatternKind, usize, Method), f64>;

struct Run {
    cells: Cells,
    elapsed: Duration,
}

fn table(example: TestFunction, seed: u64, patterns: &[PatternKind], sizes: &[usize]) -> Run {
    let mut cfg = TableConfig::new(example, seed);
    cfg.patterns = patterns.to_vec();
    cfg.sizes = sizes.to_vec();
    let start = Instant::now();
    let cells = run_table(&cfg);
    let elapsed = start.elapsed();
    for c in &cells {
        assert!(c.detail.is_none(), "{} {} {}: {:?}", c.pattern, c.m_side, c.method, c.detail);
    }
    Run { cells: cells.iter().map(|c| ((c.pattern, c.m_side, c.method), c.mse)).collect(), elapsed }
}

// Shared between the jittered checks; computed once per test binary.
fn jittered(example: TestFunction) -> &'static Run {
    static F1: OnceLock<Run> = OnceLock::new();
    static F2: OnceLock<Run> = OnceLock::new();
    let cell = match example {
        TestFunction::F1 => &F1,
        TestFunction::F2 => &F2,
    };
    cell.get_or_init(|| table(example, 42, &[PatternKind::Jittered], &SIZES))
}

fn get(run: &Run, kind: PatternKind, m: usize, method: Method) -> f64 {
    run.cells[&(kind, m, method)]
}

#[test]
fn exact_recovery_on_integer_grid() {
    let start = Instant::now();
    let p = generate_jittered(JitterParams { m1: 16, m2: 16, bound: 0.0 }, 0).unwrap();
    let plan = TruncationPlan {
        n: (16, 16),
        m: (16, 16),
        data: (16, 16),
        ..plan_for(&p, 16, ConstantsMode::Preset, MRule::Consistent).unwrap()
    };
    let r = reconstruct(TestFunction::F1, Method::Af, &p, &plan, DEFAULT_REL_TOL, EvalGrid::default()).unwrap();
    let elapsed = start.elapsed();
    let pass = r.mse <= 1e-14 && elapsed < Duration::from_secs(5);
    report("exact recovery, zero jitter, F1, 16x16, A-F", pass, &format!("mse {:.3e}, {:.2?}", r.mse, elapsed));
    assert!(r.mse <= 1e-14);
    assert!(elapsed < Duration::from_secs(5));
}

#[test]
fn jittered_f1_bands() {
    let mut pass = true;
    let mut detail = Vec::new();
    let start = Instant::now();
    for seed in [42u64, 7] {
        let fresh;
        let run = if seed == 42 {
            jittered(TestFunction::F1)
        } else {
            fresh = table(TestFunction::F1, seed, &[PatternKind::Jittered], &[16, 32]);
            &fresh
        };
        let af16 = get(run, PatternKind::Jittered, 16, Method::Af);
        let af32 = get(run, PatternKind::Jittered, 32, Method::Af);
        let cc16 = get(run, PatternKind::Jittered, 16, Method::Cc);
        let cc32 = get(run, PatternKind::Jittered, 32, Method::Cc);
        let band = |x: f64| (1e-5..=1e-1).contains(&x);
        pass &= af16 <= 1e-10 && af32 <= 1e-11 && band(cc16) && band(cc32);
        detail.push(format!("seed {seed}: A-F {af16:.2e}/{af32:.2e}, C-C {cc16:.2e}/{cc32:.2e}"));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(120);
    report("jittered F1 at 16x16 and 32x32", pass, &format!("{} ({:.2?})", detail.join("; "), elapsed));
    assert!(pass);
}

#[test]
fn spiral_f1_af_accurate_and_cc_singular() {
    let run = table(TestFunction::F1, 42, &[PatternKind::Spiral], &SIZES);
    let af32 = get(&run, PatternKind::Spiral, 32, Method::Af);
    let cc: Vec<f64> = SIZES.iter().map(|&m| get(&run, PatternKind::Spiral, m, Method::Cc)).collect();
    let pass = af32 <= 1e-3 && cc.iter().all(|x| x.is_nan()) && run.elapsed < Duration::from_secs(180);
    report(
        "spiral F1: A-F at 32x32, C-C singular at every size",
        pass,
        &format!("A-F {af32:.2e}, C-C {cc:?} ({:.2?})", run.elapsed),
    );
    assert!(af32 <= 1e-3);
    assert!(cc.iter().all(|x| x.is_nan()), "C-C cells {cc:?}");
    assert!(run.elapsed < Duration::from_secs(180));
}

#[test]
fn f2_table_af_beats_cc() {
    let run = table(TestFunction::F2, 42, &PatternKind::TABLE_KINDS, &SIZES);
    let af16 = get(&run, PatternKind::Jittered, 16, Method::Af);
    let af64 = get(&run, PatternKind::Jittered, 64, Method::Af);
    let cc64 = get(&run, PatternKind::Jittered, 64, Method::Cc);
    let gap = cc64 / af64;
    let pass = af16 <= 1e-3 && af64 <= 1e-5 && gap >= 100.0 && run.elapsed < Duration::from_secs(600);
    report(
        "F2 jittered: A-F bands and A-F/C-C gap at 64x64",
        pass,
        &format!("A-F {af16:.2e}/{af64:.2e}, C-C {cc64:.2e}, ratio {gap:.1e} (full table {:.2?})", run.elapsed),
    );
    assert!(af16 <= 1e-3 && af64 <= 1e-5);
    assert!(gap >= 100.0);
    assert!(run.elapsed < Duration::from_secs(600));
}

#[test]
fn closed_form_inner_products_match_quadrature() {
    let rule = QuadratureRule::gauss_legendre(64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for kind in [
        PatternKind::Jittered,
        PatternKind::Rosette,
        PatternKind::Spiral,
        PatternKind::Polar,
        PatternKind::IntegerGrid,
    ] {
        let p = preset(kind, 16, 42).unwrap();
        for _ in 0..200 {
            let node = p.nodes()[rng.random_range(0..p.len())];
            let l = Atom::integer(rng.random_range(-8..=8), rng.random_range(-8..=8));
            let a = Atom::new(node);
            let closed = atom_inner_product(a, l);
            let quad = quadrature_inner_product(|x1, x2| a.value_at(x1, x2), l, &rule);
            worst = worst.max((closed - quad).norm());
        }
    }
    let pass = worst <= 1e-10;
    report("closed form vs 64-point Gauss-Legendre, 200 pairs per kind", pass, &format!("max error {worst:.2e}"));
    assert!(pass);
}

#[test]
fn af_normal_matrix_spectrum_within_bounds() {
    let n = (8, 8);
    let constants = TruncationConstants::table_preset();
    let m = constants.choose_m_af(n, MRule::Consistent).unwrap();
    let b_mn = constants.b_mn(n, m).unwrap();
    let mut pass = true;
    let mut detail = Vec::new();
    for seed in [0u64, 1, 7, 42] {
        let p = preset(PatternKind::Jittered, 16, seed).unwrap();
        let bounds = estimate_frame_bounds(&p, IndexGrid::square(8).unwrap()).unwrap();
        let eig = build_af_operator(&p, n, m).unwrap().w.eigenvalues().unwrap();
        let (lo, hi) = (eig[0], eig[eig.len() - 1]);
        let applies = b_mn < bounds.a;
        let ok = applies && lo >= bounds.a - b_mn - 1e-9 && hi <= bounds.b + 1e-9;
        pass &= ok;
        detail.push(format!(
            "seed {seed}: [{lo:.3}, {hi:.3}] in [{:.3}, {:.3}]",
            bounds.a - b_mn,
            bounds.b
        ));
    }
    report(&format!("spectrum of W, n = 8x8, m = {m:?}, B_mn = {b_mn:.4}"), pass, &detail.join("; "));
    assert!(pass);
}

#[test]
fn m_choice_plugs_back() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst_cc = 0.0f64;
    let mut worst_af = 0.0f64;
    for _ in 0..20 {
        let n = (rng.random_range(1..=12usize), rng.random_range(1..=12usize));
        let gamma = rng.random_range(0.5..1.5);
        let a = rng.random_range(1.0..8.0);
        let lambda = rng.random_range(0.25..1.0);

        let s_cc = rng.random_range(2.1..4.0);
        let m = choose_m_cc(n, gamma, s_cc, a, lambda).unwrap();
        let a_mn = constant_a_mn(n, m, gamma, s_cc, lambda).unwrap();
        worst_cc = worst_cc.max(a_mn / (a / 2.0));

        let s_af = rng.random_range(1.0..3.0);
        let t = rng.random_range(2.5..4.0);
        let m = choose_m_af(n, t, s_af, gamma, a, lambda).unwrap();
        let b_mn = constant_b_mn(n, m, gamma, s_af, lambda).unwrap();
        worst_af = worst_af.max(b_mn / af_target(n, t, a));
    }
    // Ceilings only enlarge the gaps, so both ratios stay at or below 1.
    let slack = 1.0 + 1e-12;
    let pass = worst_cc <= slack && worst_af <= slack;
    report(
        "m-choice plug-back over 20 parameter draws",
        pass,
        &format!("max A_mn/(A/2) {worst_cc:.3}, max B_mn/target {worst_af:.3}"),
    );
    assert!(pass);
}

// Log-log least-squares slope over the finite points.
fn slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.1.is_finite() && p.1 > 0.0).map(|p| (p.0.ln(), p.1.ln())).collect();
    let k = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / k, pts.iter().map(|p| p.1).sum::<f64>() / k);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn errors_decrease_with_data_size() {
    // Below this MSE (RMS error 1e-12) the A-F sequence is rounding noise.
    const NOISE_FLOOR: f64 = 1e-24;
    let ladder: Vec<usize> = SIZES
        .iter()
        .map(|&m| n_for_data_side(m, &TruncationConstants::table_preset(), MRule::Consistent).unwrap())
        .collect();
    let mut pass = true;
    let mut detail = Vec::new();
    for example in [TestFunction::F1, TestFunction::F2] {
        let run = jittered(example);
        let af: Vec<f64> = SIZES.iter().map(|&m| get(run, PatternKind::Jittered, m, Method::Af)).collect();
        let monotone = af.windows(2).all(|w| w[1] <= w[0].max(NOISE_FLOOR));
        let cc: Vec<(f64, f64)> = SIZES
            .iter()
            .zip(&ladder)
            .map(|(&m, &n)| (n as f64, get(run, PatternKind::Jittered, m, Method::Cc)))
            .collect();
        let s = slope(&cc);
        pass &= monotone && s < 0.0;
        let af: Vec<String> = af.iter().map(|x| format!("{x:.1e}")).collect();
        detail.push(format!("{example}: A-F [{}], C-C slope {s:.2}", af.join(", ")));
    }
    report("A-F non-increasing and C-C decreasing on jittered data", pass, &detail.join("; "));
    assert!(pass);
}

#[test]
fn table_csv_is_thread_count_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("t{threads}"));
        let status = Command::new(env!("CARGO_BIN_EXE_frame-recon"))
            .args(["table", "--example", "f1", "--sizes", "8,16,32", "--threads", threads, "--out"])
            .arg(&out)
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        outputs.push(std::fs::read(out.join("table_f1.csv")).unwrap());
    }
    let pass = outputs[0] == outputs[1] && !outputs[0].is_empty();
    report("table CSV identical for 1 and 3 threads", pass, &format!("{} bytes", outputs[0].len()));
    assert!(pass);
}
