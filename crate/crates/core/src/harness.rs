//! Monte-Carlo experiments: simulated populations of `y_t/σ_t`, convergence
//! studies against the bounds, log-log rate fits, and the two counterexamples.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::lti::{ArmaSpec, ImpulseResponse};
use crate::noise::InputProcess;
use crate::rng::{derive, purpose, stream, StreamRng};
use crate::stein::{evaluate, BoundCase};
use crate::variance::sigma2_exact;
use crate::wasserstein::{bootstrap_se, w1_to_std_normal, EmpiricalSample};

/// A validated configuration with its impulse response analysed up to the
/// largest `t` of the grid.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub spec: ArmaSpec,
    pub process: InputProcess,
    pub ir: ImpulseResponse,
    pub case: Option<BoundCase>,
    pub hash: String,
}

impl Experiment {
    pub fn prepare(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let spec = config.spec()?;
        let process = config.process()?;
        let horizon = config.max_t();
        let ir = ImpulseResponse::analyze(&spec, horizon, config.study.epsilon, config.policy())?;
        let case = config.study.case.resolve(&process, horizon)?;
        Ok(Experiment {
            config: config.clone(),
            spec,
            process,
            ir,
            case,
            hash: config.hash(),
        })
    }

    pub fn seed(&self) -> u64 {
        self.config.noise.seed
    }

    pub fn replicates(&self) -> usize {
        self.config.study.replicates
    }
}

/// One simulated trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    /// `w_k` for `k = first..=t`, at position `k − first`.
    pub innovations: Vec<f64>,
    pub first: i64,
    /// `u_1..u_t`.
    pub u: Vec<f64>,
    /// `y_1..y_t`.
    pub y: Vec<f64>,
}

impl SamplePath {
    pub fn w(&self, k: i64) -> f64 {
        if k < self.first {
            0.0
        } else {
            self.innovations[(k - self.first) as usize]
        }
    }
}

/// Full trajectory with `y_s = Σ a_i y_{s−i} + u_s` and `y_s = 0` for `s ≤ 0`.
pub fn simulate_path<R: Rng + ?Sized>(spec: &ArmaSpec, process: &InputProcess, t: usize, rng: &mut R) -> SamplePath {
    let innovations = process.draw_innovations(rng, t);
    let u = process.filter(&innovations, t);
    let mut y = vec![0.0; t];
    for s in 0..t {
        let ar: f64 = spec
            .ar
            .iter()
            .enumerate()
            .take(s)
            .map(|(i, a)| a * y[s - 1 - i])
            .sum();
        y[s] = ar + u[s];
    }
    SamplePath {
        innovations,
        first: process.first_innovation(),
        u,
        y,
    }
}

/// `y_t` alone, with `O(n + m)` state; consumes the generator exactly like
/// [`simulate_path`].
pub fn simulate_endpoint<R: Rng + ?Sized>(spec: &ArmaSpec, process: &InputProcess, t: usize, rng: &mut R) -> f64 {
    let n = spec.ar.len();
    let m = process.order();
    let mut w_ring = vec![0.0; m + 1];
    let mut y_ring = vec![0.0; n.max(1)];
    let first = process.first_innovation();
    let scale = |k: i64| process.schedule.multiplier(k).sqrt();
    for k in first..=0 {
        w_ring[k.rem_euclid(m as i64 + 1) as usize] = process.distribution.sample(rng) * scale(k);
    }
    let mut last = 0.0;
    for s in 1..=t as i64 {
        w_ring[s.rem_euclid(m as i64 + 1) as usize] = process.distribution.sample(rng) * scale(s);
        let u: f64 = process
            .ma
            .iter()
            .enumerate()
            .filter(|(j, _)| s - *j as i64 >= first)
            .map(|(j, b)| b * w_ring[(s - j as i64).rem_euclid(m as i64 + 1) as usize])
            .sum();
        let ar: f64 = spec
            .ar
            .iter()
            .enumerate()
            .filter(|(i, _)| s - 1 - *i as i64 >= 1)
            .map(|(i, a)| a * y_ring[(s - 1 - i as i64).rem_euclid(n.max(1) as i64) as usize])
            .sum();
        last = ar + u;
        y_ring[s.rem_euclid(n.max(1) as i64) as usize] = last;
    }
    last
}

/// Generator of replicate `r` at horizon `t`.
pub fn replicate_rng(seed: u64, t: usize, r: usize) -> StreamRng {
    stream(derive(derive(seed, purpose::REPLICATE), t as u64), r as u64)
}

/// `replicates` independent draws of `y_t`, in replicate order.
pub fn simulate_outputs(spec: &ArmaSpec, process: &InputProcess, t: usize, replicates: usize, seed: u64) -> Vec<f64> {
    (0..replicates)
        .into_par_iter()
        .map(|r| simulate_endpoint(spec, process, t, &mut replicate_rng(seed, t, r)))
        .collect()
}

/// `N` replicates of `y_t/σ_t` with the exact `σ_t`.
pub fn simulate_normalized_outputs(exp: &Experiment, t: usize) -> Result<EmpiricalSample> {
    let sigma2 = sigma2_exact(&exp.ir.g, &exp.process, t)?;
    if !(sigma2 > 0.0) {
        return Err(Error::DegenerateOutput { sigma2 });
    }
    let sigma = sigma2.sqrt();
    let ys = simulate_outputs(&exp.spec, &exp.process, t, exp.replicates(), exp.seed());
    Ok(EmpiricalSample::new(ys.into_iter().map(|y| y / sigma).collect())?.with_lineage(exp.seed(), exp.hash.clone()))
}

/// One row of a convergence study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRow {
    pub t: usize,
    pub w1_hat: f64,
    pub se: f64,
    /// `f(α, t)`; absent when no case applies.
    pub bound_f: Option<f64>,
    /// Stein bound with exact moments and exact `σ_t`.
    pub prop1: f64,
    pub sigma2: f64,
    pub case: Option<BoundCase>,
}

impl StudyRow {
    pub fn case_name(&self) -> &'static str {
        self.case.map_or("none", BoundCase::name)
    }

    /// `Ŵ₁ ≤ prop1 + 3se` and, when present, `Ŵ₁ ≤ f + 3se`.
    pub fn dominated(&self) -> bool {
        let slack = 3.0 * self.se;
        self.w1_hat <= self.prop1 + slack && self.bound_f.is_none_or(|f| self.w1_hat <= f + slack)
    }
}

/// All rows of a study, in grid order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Study {
    pub config_hash: String,
    pub rows: Vec<StudyRow>,
}

impl Study {
    pub const CSV_HEADER: &'static str = "t,w1_hat,se,bound_f,sigma2,case";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let f = r.bound_f.map(|f| f.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{},{},{},{}\n", r.t, r.w1_hat, r.se, f, r.sigma2, r.case_name()));
        }
        out
    }

    /// Whitespace-separated `t w1_hat se bound_f prop1` for plotting tools.
    pub fn to_plot_data(&self) -> String {
        let mut out = String::from("# t w1_hat se bound_f prop1\n");
        for r in &self.rows {
            let f = r.bound_f.map_or("nan".to_string(), |f| f.to_string());
            out.push_str(&format!("{} {} {} {} {}\n", r.t, r.w1_hat, r.se, f, r.prop1));
        }
        out
    }

    pub fn dominance_failures(&self) -> Vec<&StudyRow> {
        self.rows.iter().filter(|r| !r.dominated()).collect()
    }

    pub fn fit(&self) -> Result<RateFit> {
        let points: Vec<_> = self.rows.iter().map(|r| (r.t, r.w1_hat, r.se)).collect();
        fit_rate(&points)
    }
}

/// One study row at horizon `t`.
pub fn study_row(exp: &Experiment, t: usize) -> Result<StudyRow> {
    let eval = evaluate(exp.case, &exp.ir, &exp.process, t, exp.config.study.alpha_mode)?;
    let sample = simulate_normalized_outputs(exp, t)?;
    let w1_hat = w1_to_std_normal(&sample);
    let se = bootstrap_se(&sample, exp.config.study.bootstrap, derive(exp.seed(), t as u64));
    Ok(StudyRow {
        t,
        w1_hat,
        se,
        bound_f: eval.bound.as_ref().map(|b| b.f),
        prop1: eval.prop1,
        sigma2: eval.sigma2,
        case: exp.case,
    })
}

pub fn run_convergence_study(config: &ExperimentConfig) -> Result<Study> {
    let exp = Experiment::prepare(config)?;
    let rows = config
        .study
        .t_grid
        .iter()
        .map(|&t| study_row(&exp, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(Study {
        config_hash: exp.hash,
        rows,
    })
}

/// Least-squares line through `(log t, log Ŵ₁)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

pub const MIN_FIT_POINTS: usize = 3;

/// Fits `(t, Ŵ₁, se)` rows, keeping only those with `Ŵ₁ > 3se`.
pub fn fit_rate(rows: &[(usize, f64, f64)]) -> Result<RateFit> {
    let usable: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(t, w, se)| *t > 0 && *w > 0.0 && *w > 3.0 * se)
        .map(|(t, w, _)| ((*t as f64).ln(), w.ln()))
        .collect();
    if usable.len() < MIN_FIT_POINTS {
        return Err(Error::NoiseFloor {
            usable: usable.len(),
            required: MIN_FIT_POINTS,
        });
    }
    let (slope, intercept, r_squared) = least_squares(&usable);
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        points: usable.len(),
    })
}

/// `(slope, intercept, r²)` of the ordinary least-squares line.
pub fn least_squares(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else if ss_res <= 1e-24 {
        1.0
    } else {
        0.0
    };
    (slope, intercept, r_squared)
}

/// `y_n = w_n + (−1)^{n+1} w_0` for `a = (−1)`, `b = (1, 1)`.
pub fn alternating_closed_form(path: &SamplePath, n: usize) -> f64 {
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    path.w(n as i64) + sign * path.w(0)
}

/// For `a = (0, −1)`, `b = (1, 0, 1)`: `y_k = w_k + (−1)^{k/2+1} w_0` for even
/// `k` and `y_k = w_k + (−1)^{(k−1)/2} w_{−1}` for odd `k`.
pub fn imaginary_closed_form(path: &SamplePath, k: usize) -> f64 {
    let kk = k as i64;
    if k.is_multiple_of(2) {
        let sign = if (k / 2 + 1).is_multiple_of(2) { 1.0 } else { -1.0 };
        path.w(kk) + sign * path.w(0)
    } else {
        let sign = if ((k - 1) / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
        path.w(kk) + sign * path.w(-1)
    }
}

/// Number of `(replicate, k)` pairs, `k ≤ horizon`, where the simulated `y_k`
/// differs from `closed_form` (exact floating-point comparison).
pub fn identity_violations(
    spec: &ArmaSpec,
    process: &InputProcess,
    horizon: usize,
    replicates: usize,
    seed: u64,
    closed_form: fn(&SamplePath, usize) -> f64,
) -> usize {
    (0..replicates)
        .into_par_iter()
        .map(|r| {
            let path = simulate_path(spec, process, horizon, &mut replicate_rng(seed, horizon, r));
            (1..=horizon).filter(|&k| path.y[k - 1] != closed_form(&path, k)).count()
        })
        .sum()
}
