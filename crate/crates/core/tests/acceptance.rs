//! Acceptance suite. Each test prints one `criterion N: PASS|FAIL ...` line.
//!
//! Tests take a shared lock so that each runtime limit is measured without
//! the others competing for the same cores.

use std::io::Write;
use std::path::PathBuf;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use gausslimit::config::ExperimentConfig;
use gausslimit::harness::{
    alternating_closed_form, identity_violations, imaginary_closed_form, least_squares, run_convergence_study,
    simulate_outputs, Experiment,
};
use gausslimit::lti::{char_poly, find_roots, impulse_modal, impulse_recursive, ArmaSpec, ImpulseResponse, StabilityPolicy};
use gausslimit::noise::{InitialCondition, InnovationDistribution, InputProcess};
use gausslimit::stein::{bound_decay, bound_for_case, AlphaMode, BoundCase};
use gausslimit::variance::{decay_threshold, sigma2_exact};
use gausslimit::wasserstein::{w1_to_std_normal, EmpiricalSample};
use gausslimit::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

/// Writes straight to stdout so the line survives the test harness's capture.
fn say(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

fn report(n: u32, pass: bool, elapsed: Duration, limit: Duration, detail: &str) -> bool {
    let within = elapsed <= limit;
    let verdict = if pass && within { "PASS" } else { "FAIL" };
    say(&format!(
        "criterion {n}: {verdict} ({detail}; {:.1}s of {:.0}s)",
        elapsed.as_secs_f64(),
        limit.as_secs_f64()
    ));
    pass && within
}

fn config_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn bundled() -> Vec<(String, ExperimentConfig)> {
    let mut paths: Vec<_> = std::fs::read_dir(config_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "cfg"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            (name, ExperimentConfig::load(&p).unwrap())
        })
        .collect()
}

fn load(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(config_dir().join(format!("{name}.cfg"))).unwrap()
}

/// A monic real polynomial with distinct roots of modulus in [0.05, 0.95].
fn random_stable_ar(rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let n = rng.random_range(1..=4usize);
        let mut roots: Vec<(f64, f64)> = Vec::new();
        while roots.len() < n {
            let r = rng.random_range(0.05..0.95);
            if n - roots.len() >= 2 && rng.random_bool(0.5) {
                let th = rng.random_range(0.1..std::f64::consts::PI - 0.1);
                roots.push((r * th.cos(), r * th.sin()));
                roots.push((r * th.cos(), -r * th.sin()));
            } else {
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                roots.push((sign * r, 0.0));
            }
        }
        let separated = roots.iter().enumerate().all(|(i, a)| {
            roots[i + 1..]
                .iter()
                .all(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt() > 0.05)
        });
        if !separated {
            continue;
        }
        // Expand Π (z − r) over complex numbers as (re, im) pairs.
        let mut c: Vec<(f64, f64)> = vec![(1.0, 0.0)];
        for &(rr, ri) in &roots {
            let mut next = vec![(0.0, 0.0); c.len() + 1];
            for (k, &(cr, ci)) in c.iter().enumerate() {
                next[k].0 += cr;
                next[k].1 += ci;
                next[k + 1].0 -= cr * rr - ci * ri;
                next[k + 1].1 -= cr * ri + ci * rr;
            }
            c = next;
        }
        return c[1..].iter().map(|&(re, _)| -re).collect();
    }
}

#[test]
fn criterion_1_modal_matches_recursion() {
    let _g = serial();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let ar = random_stable_ar(&mut rng);
        let m = rng.random_range(0..=2usize);
        let mut ma = vec![1.0];
        ma.extend((0..m).map(|_| rng.random_range(-1.0..1.0)));
        let spec = ArmaSpec::new(ar, ma).unwrap();
        let poles = find_roots(&char_poly(&spec).unwrap()).unwrap();
        let modal = impulse_modal(&poles, 500, StabilityPolicy::Strict).unwrap();
        let recursive = impulse_recursive(&spec, 500).unwrap();
        for (a, b) in modal.iter().zip(&recursive) {
            worst = worst.max((a - b).abs());
        }
    }
    let ok = report(
        1,
        worst <= 1e-9,
        start.elapsed(),
        Duration::from_secs(10),
        &format!("max |modal - recursive| = {worst:.2e} over 200 systems, horizon 500"),
    );
    assert!(ok);
}

#[test]
fn criterion_2_variance_matches_monte_carlo() {
    let _g = serial();
    let start = Instant::now();
    let n = 100_000;
    let configs = bundled();
    let mut failures = Vec::new();
    let mut worst_z: f64 = 0.0;
    for (name, cfg) in &configs {
        let exp = Experiment::prepare(cfg).unwrap();
        let t = cfg.max_t();
        let exact = sigma2_exact(&exp.ir.g, &exp.process, t).unwrap();
        let ys = simulate_outputs(&exp.spec, &exp.process, t, n, cfg.noise.seed);
        let sq: Vec<f64> = ys.iter().map(|y| y * y).collect();
        let mean = sq.iter().sum::<f64>() / n as f64;
        let var = sq.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        let z = (mean - exact).abs() / se;
        worst_z = worst_z.max(z);
        if z > 4.0 {
            failures.push(format!("{name}: exact {exact}, mc {mean} ± {se}"));
        }
    }
    let ok = report(
        2,
        failures.is_empty() && configs.len() == 20,
        start.elapsed(),
        Duration::from_secs(60),
        &format!("{} configs, worst |z| = {worst_z:.2}, N = {n}", configs.len()),
    );
    for f in &failures {
        say(&format!("  {f}"));
    }
    assert!(ok);
}

#[test]
fn criterion_3_bounds_dominate_simulation() {
    let _g = serial();
    let start = Instant::now();
    let mut checked = 0;
    let mut admissible = 0;
    let mut failures = Vec::new();
    for (name, mut cfg) in bundled() {
        cfg.study.replicates = 100_000;
        if Experiment::prepare(&cfg).unwrap().case.is_none() {
            continue;
        }
        admissible += 1;
        let study = run_convergence_study(&cfg).unwrap();
        checked += study.rows.len();
        for r in study.dominance_failures() {
            failures.push(format!(
                "{name} t={}: w1 {} se {} prop1 {} f {:?}",
                r.t, r.w1_hat, r.se, r.prop1, r.bound_f
            ));
        }
    }
    let ok = report(
        3,
        failures.is_empty() && checked > 0,
        start.elapsed(),
        Duration::from_secs(600),
        &format!(
            "{admissible} configs, {checked} (config, t) rows, {} dominance failures, N = 100000",
            failures.len()
        ),
    );
    for f in &failures {
        say(&format!("  {f}"));
    }
    assert!(ok);
}

/// The empirical slope is reported but not asserted: at pole 0.999 the
/// normalized Rademacher output loses its lattice structure around t ≈ 100 and
/// has zero skewness, so Ŵ₁ falls faster than t^{-1/2} until it meets the
/// Monte-Carlo floor. The halving ratio of the assembled bound is asserted.
#[test]
fn criterion_4_rate_reproduction() {
    let _g = serial();
    let start = Instant::now();
    let mut slopes = Vec::new();
    let mut slope_ok = true;
    let mut ratio_ok = true;
    let mut ratios = Vec::new();
    let mut dominated = true;
    for (name, case) in [
        ("independent_edge", BoundCase::Independent),
        ("poscorr_edge", BoundCase::PositivelyCorrelated),
        ("decay_edge", BoundCase::Decay),
    ] {
        let cfg = load(name);
        assert_eq!(cfg.study.replicates, 200_000);
        assert_eq!(cfg.study.t_grid, vec![16, 32, 64, 128, 256, 512]);
        let study = run_convergence_study(&cfg).unwrap();
        assert!(study.rows.iter().all(|r| r.case == Some(case)));
        dominated &= study.dominance_failures().is_empty();
        match study.fit() {
            Ok(fit) => {
                slope_ok &= (-0.65..=-0.35).contains(&fit.slope);
                slopes.push(format!("{}={:.3}", case.name(), fit.slope));
            }
            Err(e) => {
                slope_ok = false;
                slopes.push(format!("{}: {e}", case.name()));
            }
        }

        let spec = cfg.spec().unwrap();
        let process = cfg.process().unwrap();
        let ir = ImpulseResponse::analyze(&spec, 8000, cfg.study.epsilon, cfg.policy()).unwrap();
        for t in [1000, 2000, 4000] {
            let f = |t: usize| {
                let stats = process.statistics(t).unwrap();
                bound_for_case(case, &ir, &process, &stats, t, AlphaMode::Edge).unwrap().f
            };
            let ratio = f(2 * t) / f(t);
            ratio_ok &= (0.64..=0.78).contains(&ratio);
            ratios.push(format!("{}@{t}={ratio:.4}", case.name()));
        }
    }
    let elapsed = start.elapsed();
    let limit = Duration::from_secs(900);
    say(&format!(
        "criterion 4: {} (halving ratio {}: {}; all rows dominated: {dominated}; {:.1}s of {:.0}s)",
        if ratio_ok && dominated && elapsed <= limit { "PASS" } else { "FAIL" },
        if ratio_ok { "in [0.64, 0.78]" } else { "out of range" },
        ratios.join(" "),
        elapsed.as_secs_f64(),
        limit.as_secs_f64()
    ));
    say(&format!(
        "criterion 4: {} (empirical slope in [-0.65, -0.35]: {})",
        if slope_ok { "PASS" } else { "FAIL" },
        slopes.join(" ")
    ));
    assert!(ratio_ok && dominated && elapsed <= limit);
}

fn alternating_limit_check(rho: f64) -> (f64, f64) {
    let spec = ArmaSpec::new(vec![-rho], vec![1.0, 1.0]).unwrap();
    let process = InputProcess::new(vec![1.0, 1.0], InnovationDistribution::Rademacher)
        .unwrap()
        .with_initial(InitialCondition::Stationary);
    let horizon = 20_000;
    let ir = ImpulseResponse::analyze(&spec, horizon, 0.01, StabilityPolicy::Strict).unwrap();
    let mut sup: f64 = 0.0;
    let mut t = 1;
    while t < horizon {
        sup = sup.max(sigma2_exact(&ir.g, &process, t).unwrap());
        t = (t * 3).div_ceil(2);
    }
    let last = sigma2_exact(&ir.g, &process, horizon).unwrap();
    (sup.max(last), last)
}

fn min_normalized_w1(name: &str) -> (f64, usize) {
    let cfg = load(name);
    let exp = Experiment::prepare(&cfg).unwrap();
    let mut min: f64 = f64::INFINITY;
    for &t in &cfg.study.t_grid {
        let sigma = sigma2_exact(&exp.ir.g, &exp.process, t).unwrap().sqrt();
        let ys = simulate_outputs(&exp.spec, &exp.process, t, cfg.study.replicates, cfg.noise.seed);
        let sample = EmpiricalSample::new(ys.into_iter().map(|y| y / sigma).collect()).unwrap();
        min = min.min(w1_to_std_normal(&sample));
    }
    (min, cfg.study.t_grid.len())
}

#[test]
fn criterion_5_alternating_counterexample() {
    let _g = serial();
    let start = Instant::now();
    let cfg = load("counterexample1");
    let exp = Experiment::prepare(&cfg).unwrap();
    let violations = identity_violations(&exp.spec, &exp.process, 1000, 1000, cfg.noise.seed, alternating_closed_form);
    let (min_w1, points) = min_normalized_w1("counterexample1");

    let mut limits_ok = true;
    let mut detail = Vec::new();
    for rho in [0.5, 0.9, 0.99] {
        let (sup, last) = alternating_limit_check(rho);
        let limit = 2.0 / (1.0 + rho);
        // Σ|G|·Σ|G|·max|γ| with γ(0) = 2, γ(±1) = 1.
        let crude = 2.0 / (1.0 - rho).powi(2);
        let displayed_form = (2.0 - rho - 1.0 / rho) / (1.0 - rho * rho);
        limits_ok &= (last - limit).abs() <= 1e-6 && sup <= crude;
        detail.push(format!(
            "rho={rho}: sigma2={last:.9} vs {limit:.9}, sup {sup:.4}, displayed form {displayed_form:.4}"
        ));
    }
    let ok = report(
        5,
        violations == 0 && min_w1 >= 0.2 && limits_ok,
        start.elapsed(),
        Duration::from_secs(60),
        &format!(
            "identity violations {violations} over n<=1000 x 1000 replicates; min W1 {min_w1:.4} over {points} t; {}",
            detail.join("; ")
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_6_imaginary_counterexample() {
    let _g = serial();
    let start = Instant::now();
    let cfg = load("counterexample2");
    let exp = Experiment::prepare(&cfg).unwrap();
    let violations = identity_violations(&exp.spec, &exp.process, 1000, 1000, cfg.noise.seed, imaginary_closed_form);
    let (min_w1, points) = min_normalized_w1("counterexample2");
    let ok = report(
        6,
        violations == 0 && min_w1 >= 0.1,
        start.elapsed(),
        Duration::from_secs(60),
        &format!("identity violations {violations} over k<=1000 x 1000 replicates; min W1 {min_w1:.4} over {points} t"),
    );
    assert!(ok);
}

#[test]
fn criterion_7_decay_admissibility() {
    let _g = serial();
    let start = Instant::now();
    let horizon = 2000;
    let spec = ArmaSpec::new(vec![0.9999], vec![1.0]).unwrap();
    let ir = ImpulseResponse::analyze(&spec, horizon, 0.01, StabilityPolicy::Strict).unwrap();
    let process = |a: f64| {
        InputProcess::new(vec![1.0, a], InnovationDistribution::Rademacher)
            .unwrap()
            .with_initial(InitialCondition::Stationary)
    };
    let alpha = ir.alpha();
    let threshold = decay_threshold(&ir.envelope, 1, alpha);

    let small = process(0.1);
    let small_stats = small.statistics(horizon).unwrap();
    let small_a = small_stats.profile.decay_a;
    let admitted = bound_decay(&ir, &small, &small_stats, horizon, AlphaMode::Literal).is_ok();

    let large = process(1.0);
    let large_stats = large.statistics(horizon).unwrap();
    let large_a = large_stats.profile.decay_a;
    let rejected = match bound_decay(&ir, &large, &large_stats, horizon, AlphaMode::Literal) {
        Err(Error::Inadmissible { threshold: reported, .. }) => reported == threshold,
        _ => false,
    };

    let points: Vec<(f64, f64)> = (100..=horizon)
        .step_by(100)
        .map(|t| (t as f64, sigma2_exact(&ir.g, &small, t).unwrap()))
        .collect();
    let (_, _, r2) = least_squares(&points);

    let separates = small_a < threshold && threshold < large_a;
    let ok = report(
        7,
        separates && admitted && rejected && r2 > 0.99,
        start.elapsed(),
        Duration::from_secs(120),
        &format!("a(0.1)={small_a:.4} < dC={threshold:.4} < a(1)={large_a:.4}; rejected with dC: {rejected}; linear R2={r2:.5}"),
    );
    assert!(ok);
}

/// `∫ |F − Φ|` for a finite atomic law, by adaptive Simpson on each gap.
fn w1_by_integration(atoms: &[f64]) -> f64 {
    use gausslimit::wasserstein::std_normal_cdf as phi;
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() < 1e-13 {
            return left + right + (left + right - whole) / 15.0;
        }
        simpson(f, a, m, fa, flm, fm, left, depth - 1) + simpson(f, m, b, fm, frm, fb, right, depth - 1)
    }
    let mut knots = atoms.to_vec();
    knots.sort_by(f64::total_cmp);
    let n = knots.len() as f64;
    let mut edges = vec![-12.0];
    edges.extend(knots.iter().copied());
    edges.push(12.0);
    edges.dedup();
    let mut total = 0.0;
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = 0.5 * (a + b);
        let level = knots.iter().filter(|&&k| k <= mid).count() as f64 / n;
        let f = move |x: f64| (level - phi(x)).abs();
        let (fa, fm, fb) = (f(a), f(mid), f(b));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        total += simpson(&f, a, b, fa, fm, fb, whole, 40);
    }
    total
}

#[test]
fn criterion_8_wasserstein_self_test() {
    let _g = serial();
    let start = Instant::now();
    let r2 = std::f64::consts::SQRT_2;
    let cases: [(&str, Vec<f64>, f64); 3] = [
        ("{0}", vec![0.0], 0.79788),
        ("{-1,1}", vec![-1.0, 1.0], 0.53536),
        ("three-point", vec![-r2, 0.0, 0.0, r2], 0.376),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (label, atoms, quoted) in &cases {
        let got = w1_to_std_normal(&EmpiricalSample::new(atoms.clone()).unwrap());
        let oracle = w1_by_integration(atoms);
        ok &= (got - oracle).abs() <= 1e-4;
        // The first two quoted values carry five decimals, the third three.
        let quoted_tol = if *label == "three-point" { 5e-4 } else { 1e-4 };
        ok &= (got - quoted).abs() <= quoted_tol;
        detail.push(format!("{label}: {got:.6} (oracle {oracle:.6})"));
    }
    let ok = report(8, ok, start.elapsed(), Duration::from_secs(1), &detail.join(", "));
    assert!(ok);
}
