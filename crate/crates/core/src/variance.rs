//! The output variance `σ_t² = Var(y_t)` with `y_t = Σ_{i=1}^t G_{t−i} u_i`,
//! and its case-specific lower bounds.
//!
//! Lags `n = t − i` run over `0..t`. The lower bounds split the double sum
//! `Σ G_n G_{n′} E[u_{t−n} u_{t−n′}]` into an exact head (pairs with
//! `min(n, n′) < T`) and an envelope-bounded tail.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lti::{DominantKind, Envelope, ImpulseResponse};
use crate::noise::{InputProcess, MomentProfile};

fn check_horizon(g: &[f64], t: usize) -> Result<()> {
    if t == 0 {
        return Err(Error::InvalidSpec("t must be at least 1".into()));
    }
    if g.len() < t {
        return Err(Error::HorizonTooShort {
            t,
            horizon: g.len().saturating_sub(1),
        });
    }
    Ok(())
}

/// Exact `σ_t²` through the composite kernel `H = G ∗ b`:
/// `y_t = Σ_k H_k w_k`, so `σ_t² = Σ_k H_k² Var(w_k)`.
pub fn sigma2_exact(g: &[f64], process: &InputProcess, t: usize) -> Result<f64> {
    check_horizon(g, t)?;
    let t = t as i64;
    let mut total = 0.0;
    for k in process.first_innovation()..=t {
        let weight: f64 = process
            .ma
            .iter()
            .enumerate()
            .filter_map(|(j, b)| {
                let i = k + j as i64;
                (1..=t).contains(&i).then(|| b * g[(t - i) as usize])
            })
            .sum();
        total += weight * weight * process.innovation_variance(k);
    }
    Ok(total)
}

/// `σ_t²` as `Σ_{i,j} G_{t−i} G_{t−j} E[u_i u_j]`; the cross-check for [`sigma2_exact`].
pub fn sigma2_double_sum(g: &[f64], process: &InputProcess, t: usize) -> Result<f64> {
    check_horizon(g, t)?;
    Ok(pair_sum(g, process, t, |_, _| true))
}

fn pair_sum(g: &[f64], process: &InputProcess, t: usize, keep: impl Fn(usize, usize) -> bool) -> f64 {
    let m = process.order();
    let mut total = 0.0;
    for n in 0..t {
        let lo = n.saturating_sub(m);
        let hi = (n + m).min(t - 1);
        for n2 in lo..=hi {
            if keep(n, n2) {
                let cov = process.covariance((t - n) as i64, (t - n2) as i64);
                total += g[n] * g[n2] * cov;
            }
        }
    }
    total
}

/// The exact part of `σ_t²` from pairs with `min(n, n′) < cut`.
pub fn head_sum(g: &[f64], process: &InputProcess, t: usize, cut: usize) -> f64 {
    pair_sum(g, process, t, |n, n2| n.min(n2) < cut)
}

fn envelope_for(ir: &ImpulseResponse, t: usize) -> Result<&Envelope> {
    check_horizon(&ir.g, t)?;
    Ok(&ir.envelope)
}

/// `i^p (i + q)^r e^{−kαi}` without overflow for large `i`.
pub(crate) fn tail_term(i: usize, p: usize, shift: i64, r: usize, k: f64, alpha: f64) -> f64 {
    let x = i as f64;
    let y = (i as i64 + shift).max(0) as f64;
    let mut v = x.powi(p as i32) * y.powi(r as i32);
    if alpha > 0.0 {
        v *= (-k * alpha * x).exp();
    }
    v
}

/// Lower bound for a positively correlated input with a real positive
/// dominant pole (also valid for `M = 0`, where it is the diagonal bound):
/// exact head over `T′_ε`, then
/// `s_c e^{−2ε−Mα} c_lo² Σ_{i=T′_ε}^{t−1} i^d (i − M)^d e^{−2αi}`.
///
/// `alpha` is the decay rate used in the tail sums: the system's own `α`, or
/// `0` for the edge-of-stability substitution.
pub fn sigma2_lower_poscorr(
    ir: &ImpulseResponse,
    process: &InputProcess,
    profile: &MomentProfile,
    t: usize,
    alpha: f64,
) -> Result<f64> {
    let env = envelope_for(ir, t)?;
    let m = profile.radius;
    if m > 0 {
        if !(profile.sc_lo > 0.0) {
            return Err(Error::PreconditionViolated {
                case: "case (ii)",
                reason: format!("input is not positively correlated (min neighbour covariance {})", profile.sc_lo),
            });
        }
        if !matches!(ir.kind, DominantKind::RealPositive | DominantKind::Memoryless) {
            return Err(Error::PreconditionViolated {
                case: "case (ii)",
                reason: format!("dominant pole must be real and positive, found {:?}", ir.kind),
            });
        }
    }
    let cut = env.t_eps_prime().min(t);
    let head = head_sum(&ir.g, process, t, cut);
    let sc = if m == 0 {
        profile.s2_lo
    } else {
        profile.sc_lo.min(profile.s2_lo)
    };
    let d = env.d;
    let tail_sum: f64 = (cut..t).map(|i| tail_term(i, d, -(m as i64), d, 2.0, alpha)).sum();
    let factor = sc * (-2.0 * env.eps - m as f64 * alpha).exp() * env.c_lo * env.c_lo;
    Ok(head + factor * tail_sum)
}

/// Result of the correlation-decay lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayLowerBound {
    pub bound: f64,
    /// `a < δC`.
    pub admissible: bool,
    /// `δC`; infinite when there are no neighbours or no tail.
    pub threshold: f64,
}

/// `δC` with `δ = min_{i>T_ε} i^d/(i+M)^d` and
/// `C = c_lo² e^{−2ε} / (c_hi² e^{2ε} 2M e^{αM})`.
pub fn decay_threshold(env: &Envelope, m: usize, alpha: f64) -> f64 {
    if m == 0 || env.c_hi == 0.0 {
        return f64::INFINITY;
    }
    let i = (env.t_eps + 1) as f64;
    let delta = (i / (i + m as f64)).powi(env.d as i32);
    let m = m as f64;
    let c = env.c_lo.powi(2) * (-2.0 * env.eps).exp()
        / (env.c_hi.powi(2) * (2.0 * env.eps).exp() * 2.0 * m * (alpha * m).exp());
    delta * c
}

/// Lower bound for an input with correlation decay coefficient `a`:
/// exact head over `T_ε`, then
/// `Σ_{i=T_ε}^{t−1} s̲₂ (c_lo² e^{−2ε} i^{2d} − c_hi² e^{2ε} a·2M e^{αM} i^d (i+M)^d) e^{−2αi}`.
pub fn sigma2_lower_decay(
    ir: &ImpulseResponse,
    process: &InputProcess,
    profile: &MomentProfile,
    t: usize,
    alpha: f64,
) -> Result<DecayLowerBound> {
    let env = envelope_for(ir, t)?;
    let m = profile.radius;
    let a = profile.decay_a;
    let cut = env.t_eps.min(t);
    let head = head_sum(&ir.g, process, t, cut);
    let d = env.d;
    let diag = env.c_lo.powi(2) * (-2.0 * env.eps).exp();
    let cross = env.c_hi.powi(2) * (2.0 * env.eps).exp() * a * 2.0 * m as f64 * (alpha * m as f64).exp();
    let tail: f64 = (cut..t)
        .map(|i| {
            let cross_term = if m == 0 || a == 0.0 {
                0.0
            } else {
                cross * tail_term(i, d, m as i64, d, 2.0, alpha)
            };
            profile.s2_lo * (diag * tail_term(i, 2 * d, 0, 0, 2.0, alpha) - cross_term)
        })
        .sum();
    let threshold = decay_threshold(env, m, alpha);
    Ok(DecayLowerBound {
        bound: head + tail,
        admissible: a < threshold,
        threshold,
    })
}

/// One row of the variance table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceReport {
    pub t: usize,
    pub sigma2_exact: f64,
    /// `None` when the positive-correlation preconditions fail.
    pub sigma2_lower_poscorr: Option<f64>,
    pub sigma2_lower_decay: Option<f64>,
    pub decay_admissible: bool,
}

impl VarianceReport {
    pub fn compute(ir: &ImpulseResponse, process: &InputProcess, t: usize) -> Result<Self> {
        let profile = process.statistics(t)?.profile;
        let alpha = ir.alpha();
        let exact = sigma2_exact(&ir.g, process, t)?;
        let poscorr = sigma2_lower_poscorr(ir, process, &profile, t, alpha).ok();
        let decay = sigma2_lower_decay(ir, process, &profile, t, alpha)?;
        Ok(VarianceReport {
            t,
            sigma2_exact: exact,
            sigma2_lower_poscorr: poscorr,
            sigma2_lower_decay: decay.admissible.then_some(decay.bound),
            decay_admissible: decay.admissible,
        })
    }

    pub const CSV_HEADER: &'static str = "t,sigma2_exact,sigma2_lower_poscorr,sigma2_lower_decay";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{}",
            self.t,
            self.sigma2_exact,
            opt(self.sigma2_lower_poscorr),
            opt(self.sigma2_lower_decay)
        )
    }
}
