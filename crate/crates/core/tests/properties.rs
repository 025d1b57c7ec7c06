use gausslimit::harness::simulate_outputs;
use gausslimit::lti::{char_poly, find_roots, impulse_modal, impulse_recursive, ArmaSpec, ImpulseResponse, StabilityPolicy};
use gausslimit::noise::{InitialCondition, InnovationDistribution, InputProcess};
use gausslimit::stein::{bound_independent, prop1_bound, AlphaMode};
use gausslimit::variance::{sigma2_exact, sigma2_lower_decay, sigma2_lower_poscorr};
use gausslimit::wasserstein::{std_normal_cdf, std_normal_quantile, w1_to_std_normal, w1_two_sample, EmpiricalSample};
use proptest::prelude::*;

/// AR coefficients of `Π (z − r_k)` for real roots.
fn ar_from_real_roots(roots: &[f64]) -> Vec<f64> {
    let mut c = vec![1.0];
    for &r in roots {
        let mut next = vec![0.0; c.len() + 1];
        for (k, &v) in c.iter().enumerate() {
            next[k] += v;
            next[k + 1] -= v * r;
        }
        c = next;
    }
    c[1..].iter().map(|v| -v).collect()
}

fn separated(roots: &[f64], gap: f64) -> bool {
    roots
        .iter()
        .enumerate()
        .all(|(i, a)| roots[i + 1..].iter().all(|b| (a - b).abs() > gap))
}

/// Up to four distinct real poles in (−0.95, 0.95).
fn real_poles() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.95f64..0.95, 1..=4).prop_filter("poles too close", |r| separated(r, 0.05))
}

/// A dominant positive pole plus smaller poles.
fn positive_dominant() -> impl Strategy<Value = Vec<f64>> {
    (0.5f64..0.97, prop::collection::vec(-0.4f64..0.4, 0..=2))
        .prop_map(|(p, rest)| std::iter::once(p).chain(rest).collect::<Vec<_>>())
        .prop_filter("poles too close", |r| separated(r, 0.05))
}

fn rademacher(b: Vec<f64>) -> InputProcess {
    InputProcess::new(b, InnovationDistribution::Rademacher)
        .unwrap()
        .with_initial(InitialCondition::Stationary)
}

/// `∫ |F_n − Φ|` by composite Simpson between consecutive atoms.
fn w1_by_integration(values: &[f64]) -> f64 {
    let mut xs = values.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut edges = vec![xs[0].min(0.0) - 10.0];
    edges.extend(&xs);
    edges.push(xs[xs.len() - 1].max(0.0) + 10.0);
    let mut total = 0.0;
    for (k, w) in edges.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let level = k as f64 / n;
        let level = level.min(1.0);
        // Split at the kink where Φ crosses the step.
        let kink = if level > 0.0 && level < 1.0 { std_normal_quantile(level) } else { a };
        if kink > a && kink < b {
            total += simpson(a, kink, level) + simpson(kink, b, level);
        } else {
            total += simpson(a, b, level);
        }
    }
    total
}

fn simpson(a: f64, b: f64, level: f64) -> f64 {
    let panels = 2000;
    let h = (b - a) / panels as f64;
    let f = |x: f64| (level - std_normal_cdf(x)).abs();
    let mut s = f(a) + f(b);
    for j in 1..panels {
        s += f(a + j as f64 * h) * if j % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn modal_matches_recursion(roots in real_poles()) {
        let spec = ArmaSpec::new(ar_from_real_roots(&roots), vec![1.0]).unwrap();
        let poles = find_roots(&char_poly(&spec).unwrap()).unwrap();
        let modal = impulse_modal(&poles, 300, StabilityPolicy::Strict).unwrap();
        let rec = impulse_recursive(&spec, 300).unwrap();
        for (a, b) in modal.iter().zip(&rec) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn roots_reconstruct_polynomial(roots in real_poles()) {
        let spec = ArmaSpec::new(ar_from_real_roots(&roots), vec![1.0]).unwrap();
        let poly = char_poly(&spec).unwrap();
        let back = find_roots(&poly).unwrap().expand();
        prop_assert_eq!(back.len(), poly.len());
        for (a, b) in back.iter().zip(&poly) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn envelope_sandwiches_impulse_response(roots in real_poles()) {
        let spec = ArmaSpec::new(ar_from_real_roots(&roots), vec![1.0]).unwrap();
        let ir = ImpulseResponse::analyze(&spec, 400, 0.01, StabilityPolicy::Strict);
        // Poles of equal modulus and opposite sign have no strictly dominant mode.
        prop_assume!(ir.is_ok());
        let ir = ir.unwrap();
        let env = &ir.envelope;
        prop_assume!(!env.reached_horizon);
        for i in env.t_eps..=400 {
            let g = ir.g[i].abs();
            if g < 1e-250 {
                break;
            }
            prop_assert!(g >= env.lower(i) * (1.0 - 1e-9), "i={} g={} lower={}", i, g, env.lower(i));
            prop_assert!(g <= env.upper(i) * (1.0 + 1e-9), "i={} g={} upper={}", i, g, env.upper(i));
        }
    }

    #[test]
    fn simulation_is_deterministic(pole in -0.9f64..0.9, seed in any::<u64>()) {
        let spec = ArmaSpec::new(vec![pole], vec![1.0, 0.5]).unwrap();
        let process = rademacher(vec![1.0, 0.5]);
        let a = simulate_outputs(&spec, &process, 20, 200, seed);
        let b = simulate_outputs(&spec, &process, 20, 200, seed);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn w1_matches_numerical_integral(values in prop::collection::vec(-4.0f64..4.0, 1..=100)) {
        let exact = w1_to_std_normal(&EmpiricalSample::new(values.clone()).unwrap());
        let numeric = w1_by_integration(&values);
        prop_assert!((exact - numeric).abs() < 1e-6, "exact {} numeric {}", exact, numeric);
    }

    #[test]
    fn two_sample_w1_is_a_metric(
        a in prop::collection::vec(-5.0f64..5.0, 30),
        b in prop::collection::vec(-5.0f64..5.0, 30),
        c in prop::collection::vec(-5.0f64..5.0, 30),
    ) {
        let (a, b, c) = (
            EmpiricalSample::new(a).unwrap(),
            EmpiricalSample::new(b).unwrap(),
            EmpiricalSample::new(c).unwrap(),
        );
        let ab = w1_two_sample(&a, &b).unwrap();
        let bc = w1_two_sample(&b, &c).unwrap();
        let ac = w1_two_sample(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert!((ab - w1_two_sample(&b, &a).unwrap()).abs() < 1e-15);
        prop_assert_eq!(w1_two_sample(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn poscorr_lower_bound_is_below_exact(roots in positive_dominant(), b1 in 0.3f64..1.0, t in 1usize..300) {
        let spec = ArmaSpec::new(ar_from_real_roots(&roots), vec![1.0, b1]).unwrap();
        let ir = ImpulseResponse::analyze(&spec, 300, 0.01, StabilityPolicy::Strict).unwrap();
        let process = rademacher(vec![1.0, b1]);
        let stats = process.statistics(t).unwrap();
        let exact = sigma2_exact(&ir.g, &process, t).unwrap();
        let lower = sigma2_lower_poscorr(&ir, &process, &stats.profile, t, ir.alpha()).unwrap();
        prop_assert!(lower <= exact * (1.0 + 1e-12), "lower {} exact {}", lower, exact);
    }

    #[test]
    fn decay_lower_bound_is_below_exact(roots in positive_dominant(), b1 in -0.3f64..0.3, t in 1usize..300) {
        let spec = ArmaSpec::new(ar_from_real_roots(&roots), vec![1.0, b1]).unwrap();
        let ir = ImpulseResponse::analyze(&spec, 300, 0.01, StabilityPolicy::Strict).unwrap();
        let process = rademacher(vec![1.0, b1]);
        let stats = process.statistics(t).unwrap();
        let exact = sigma2_exact(&ir.g, &process, t).unwrap();
        let lower = sigma2_lower_decay(&ir, &process, &stats.profile, t, ir.alpha()).unwrap();
        prop_assume!(lower.admissible);
        prop_assert!(lower.bound <= exact * (1.0 + 1e-12), "lower {} exact {}", lower.bound, exact);
    }

    #[test]
    fn assembled_bound_relaxes_stein_bound(roots in real_poles(), t in 1usize..300) {
        let spec = ArmaSpec::new(ar_from_real_roots(&roots), vec![1.0]).unwrap();
        let ir = ImpulseResponse::analyze(&spec, 300, 0.01, StabilityPolicy::Strict);
        prop_assume!(ir.is_ok());
        let ir = ir.unwrap();
        let process = rademacher(vec![1.0]);
        let stats = process.statistics(t).unwrap();
        let sigma2 = sigma2_exact(&ir.g, &process, t).unwrap();
        let prop1 = prop1_bound(&ir.g, &stats, 1, t, sigma2).unwrap();
        // Edge mode substitutes α = 0 into the denominator's tail too, so it is
        // only a relaxation in the literal mode.
        let f = bound_independent(&ir, &stats, t, AlphaMode::Literal).unwrap().f;
        prop_assert!(f >= prop1 * (1.0 - 1e-12), "f {} prop1 {}", f, prop1);
    }
}
