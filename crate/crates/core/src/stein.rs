//! The local-dependence Stein bound on `d_W(y_t/σ_t, Z)` and its assembled,
//! case-specific relaxations `f(α, t)`.
//!
//! Every `f` has the same shape: a third-moment term over `σ³` plus a
//! fourth-moment term over `σ²`, where the `|G|^k` sums are split into an exact
//! head below `T_ε` and a tail bounded by the dominant envelope, and `σ²` is
//! replaced by a case-specific lower bound.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lti::ImpulseResponse;
use crate::noise::{CorrelationClass, InputProcess, InputStatistics};
use crate::variance::{sigma2_exact, sigma2_lower_decay, sigma2_lower_poscorr, tail_term};

/// Which `α` enters the tail sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaMode {
    /// The system's own `α = −ln|r₁|`.
    #[default]
    Literal,
    /// `α = 0` substituted into the assembled expressions (edge of stability).
    Edge,
}

impl AlphaMode {
    pub fn resolve(self, ir: &ImpulseResponse) -> f64 {
        match self {
            AlphaMode::Literal => ir.alpha(),
            AlphaMode::Edge => 0.0,
        }
    }
}

impl FromStr for AlphaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(AlphaMode::Literal),
            "edge" => Ok(AlphaMode::Edge),
            other => Err(Error::InvalidSpec(format!("unknown alpha mode '{other}' (literal|edge)"))),
        }
    }
}

/// The three cases with an assembled bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundCase {
    Independent,
    PositivelyCorrelated,
    Decay,
}

impl BoundCase {
    pub fn name(self) -> &'static str {
        match self {
            BoundCase::Independent => "independent",
            BoundCase::PositivelyCorrelated => "positively_correlated",
            BoundCase::Decay => "decay",
        }
    }

    /// The case matching a correlation class, if any.
    pub fn for_class(class: CorrelationClass) -> Option<Self> {
        match class {
            CorrelationClass::Independent => Some(BoundCase::Independent),
            CorrelationClass::PositivelyCorrelated => Some(BoundCase::PositivelyCorrelated),
            CorrelationClass::Decay { .. } => Some(BoundCase::Decay),
            CorrelationClass::Other => None,
        }
    }
}

impl fmt::Display for BoundCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "independent" => Ok(BoundCase::Independent),
            "poscorr" | "positively_correlated" => Ok(BoundCase::PositivelyCorrelated),
            "decay" => Ok(BoundCase::Decay),
            other => Err(Error::InvalidSpec(format!("unknown case '{other}'"))),
        }
    }
}

/// One evaluation of `f(α, t) = term1 + term2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub case: BoundCase,
    pub t: usize,
    /// `α` used in the tail sums.
    pub alpha: f64,
    pub d: usize,
    pub dependency: usize,
    pub radius: usize,
    pub term1: f64,
    pub term2: f64,
    pub f: f64,
    /// The variance (or its lower bound) in the denominators.
    pub sigma2_used: f64,
}

impl BoundReport {
    pub const CSV_HEADER: &'static str = "case,t,alpha,term1,term2,f,sigma2";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.case, self.t, self.alpha, self.term1, self.term2, self.f, self.sigma2_used
        )
    }
}

/// `D²/σ³ Σ|G_{t−i}|³ E|u_i|³ + 2D^{3/2}/(√π σ²) √(Σ G_{t−i}⁴ E[u_i⁴])`
/// with the exact per-index moments in `stats` (which must cover `1..=t`).
pub fn prop1_bound(g: &[f64], stats: &InputStatistics, dependency: usize, t: usize, sigma2: f64) -> Result<f64> {
    if !(sigma2 > 0.0) {
        return Err(Error::DegenerateOutput { sigma2 });
    }
    check_lengths(g, stats, t)?;
    let (mut third, mut fourth) = (0.0, 0.0);
    for i in 1..=t {
        let gi = g[t - i].abs();
        third += gi.powi(3) * stats.abs_third[i - 1];
        fourth += gi.powi(4) * stats.fourth[i - 1];
    }
    let d = dependency as f64;
    let term1 = d * d * third / sigma2.powf(1.5);
    let term2 = 2.0 * d.powf(1.5) * fourth.sqrt() / (PI.sqrt() * sigma2);
    Ok(term1 + term2)
}

fn check_lengths(g: &[f64], stats: &InputStatistics, t: usize) -> Result<()> {
    if t == 0 {
        return Err(Error::InvalidSpec("t must be at least 1".into()));
    }
    if g.len() < t {
        return Err(Error::HorizonTooShort {
            t,
            horizon: g.len().saturating_sub(1),
        });
    }
    if stats.len() < t {
        return Err(Error::InvalidSpec(format!(
            "input statistics cover {} indices, need {t}",
            stats.len()
        )));
    }
    Ok(())
}

/// `Σ_{n<T} |G_n|^k + c^k e^{kε} Σ_{n=T}^{t−1} n^{kd} e^{−kαn}`, an upper bound on `Σ_{n<t} |G_n|^k`.
fn upper_power_sum(ir: &ImpulseResponse, t: usize, k: i32, alpha: f64) -> f64 {
    let env = &ir.envelope;
    let cut = env.t_eps.min(t);
    let head: f64 = ir.g[..cut].iter().map(|g| g.abs().powi(k)).sum();
    let tail: f64 = (cut..t)
        .map(|n| tail_term(n, k as usize * env.d, 0, 0, k as f64, alpha))
        .sum();
    head + env.c_hi.powi(k) * (k as f64 * env.eps).exp() * tail
}

/// `Σ_{n<T} G_n² + c_lo² e^{−2ε} Σ_{n=T}^{t−1} n^{2d} e^{−2αn}`, a lower bound on `Σ_{n<t} G_n²`.
fn lower_square_sum(ir: &ImpulseResponse, t: usize, alpha: f64) -> f64 {
    let env = &ir.envelope;
    let cut = env.t_eps.min(t);
    let head: f64 = ir.g[..cut].iter().map(|g| g * g).sum();
    let tail: f64 = (cut..t).map(|n| tail_term(n, 2 * env.d, 0, 0, 2.0, alpha)).sum();
    head + env.c_lo.powi(2) * (-2.0 * env.eps).exp() * tail
}

fn assemble(
    case: BoundCase,
    ir: &ImpulseResponse,
    stats: &InputStatistics,
    t: usize,
    alpha: f64,
    dependency: usize,
    sigma2_lower: f64,
) -> Result<BoundReport> {
    if !(sigma2_lower > 0.0) {
        return Err(Error::VacuousLowerBound { value: sigma2_lower });
    }
    let p = &stats.profile;
    let d = dependency as f64;
    let term1 = d * d * p.s3 * upper_power_sum(ir, t, 3, alpha) / sigma2_lower.powf(1.5);
    let term2 = 2.0 * d.powf(1.5) * (p.s4 * upper_power_sum(ir, t, 4, alpha)).sqrt() / (PI.sqrt() * sigma2_lower);
    Ok(BoundReport {
        case,
        t,
        alpha,
        d: ir.envelope.d,
        dependency,
        radius: p.radius,
        term1,
        term2,
        f: term1 + term2,
        sigma2_used: sigma2_lower,
    })
}

/// `A + B` for an independent input: `D = 1` and `σ² ≥ s₂ Σ G²`.
pub fn bound_independent(
    ir: &ImpulseResponse,
    stats: &InputStatistics,
    t: usize,
    mode: AlphaMode,
) -> Result<BoundReport> {
    check_lengths(&ir.g, stats, t)?;
    let alpha = mode.resolve(ir);
    let sigma2 = stats.profile.s2 * lower_square_sum(ir, t, alpha);
    assemble(BoundCase::Independent, ir, stats, t, alpha, 1, sigma2)
}

/// `P + Q` for a positively correlated input with a real positive dominant pole.
pub fn bound_poscorr(
    ir: &ImpulseResponse,
    process: &InputProcess,
    stats: &InputStatistics,
    t: usize,
    mode: AlphaMode,
) -> Result<BoundReport> {
    check_lengths(&ir.g, stats, t)?;
    let alpha = mode.resolve(ir);
    let sigma2 = sigma2_lower_poscorr(ir, process, &stats.profile, t, alpha)?;
    assemble(
        BoundCase::PositivelyCorrelated,
        ir,
        stats,
        t,
        alpha,
        stats.profile.dependency,
        sigma2,
    )
}

/// The decay-case bound; rejects an inadmissible `a` with its threshold.
pub fn bound_decay(
    ir: &ImpulseResponse,
    process: &InputProcess,
    stats: &InputStatistics,
    t: usize,
    mode: AlphaMode,
) -> Result<BoundReport> {
    check_lengths(&ir.g, stats, t)?;
    let alpha = mode.resolve(ir);
    let lower = sigma2_lower_decay(ir, process, &stats.profile, t, alpha)?;
    if !lower.admissible {
        return Err(Error::Inadmissible {
            a: stats.profile.decay_a,
            threshold: lower.threshold,
        });
    }
    assemble(BoundCase::Decay, ir, stats, t, alpha, stats.profile.dependency, lower.bound)
}

/// Dispatches on `case`.
pub fn bound_for_case(
    case: BoundCase,
    ir: &ImpulseResponse,
    process: &InputProcess,
    stats: &InputStatistics,
    t: usize,
    mode: AlphaMode,
) -> Result<BoundReport> {
    match case {
        BoundCase::Independent => {
            if !stats.profile.independent {
                return Err(Error::PreconditionViolated {
                    case: "case (i)",
                    reason: "input is not independent".into(),
                });
            }
            bound_independent(ir, stats, t, mode)
        }
        BoundCase::PositivelyCorrelated => bound_poscorr(ir, process, stats, t, mode),
        BoundCase::Decay => bound_decay(ir, process, stats, t, mode),
    }
}

/// Everything the study and CLI report about one `(system, t)` pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub t: usize,
    pub sigma2: f64,
    pub prop1: f64,
    pub bound: Option<BoundReport>,
}

/// Exact `σ_t²`, the Stein bound with exact moments, and `f(α, t)` when a case applies.
pub fn evaluate(
    case: Option<BoundCase>,
    ir: &ImpulseResponse,
    process: &InputProcess,
    t: usize,
    mode: AlphaMode,
) -> Result<Evaluation> {
    let stats = process.statistics(t)?;
    let sigma2 = sigma2_exact(&ir.g, process, t)?;
    let prop1 = prop1_bound(&ir.g, &stats, stats.profile.dependency, t, sigma2)?;
    let bound = case
        .map(|c| bound_for_case(c, ir, process, &stats, t, mode))
        .transpose()?;
    Ok(Evaluation { t, sigma2, prop1, bound })
}
