use serde::Serialize;

use super::arma::{char_poly, ArmaSpec};
use super::impulse::{impulse_recursive, modal_form, ModalForm, StabilityPolicy};
use super::roots::{find_roots, PoleSet};
use crate::error::{Error, Result};

/// Nature of the dominant mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DominantKind {
    RealPositive,
    RealNegative,
    ConjugatePair,
    /// Every pole is zero; `G` is a unit impulse.
    Memoryless,
}

/// Dominant-pole sandwich for `|G_i|`: for `T_ε ≤ i ≤ T`,
/// `c_lo e^{−ε} i^d e^{−αi} ≤ |G_i| ≤ c_hi e^{ε} i^d e^{−αi}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Envelope {
    /// `−ln |r₁|`, clamped at zero on the unit circle.
    pub alpha: f64,
    /// Degree `d = d₁ − 1` of the dominant coefficient polynomial.
    pub d: usize,
    pub c_lo: f64,
    pub c_hi: f64,
    pub eps: f64,
    pub t_eps: usize,
    /// `T′`: from here on the dominant coefficient keeps its sign. Only set for
    /// a real positive dominant pole.
    pub sign_stable_from: Option<usize>,
    /// The remainder ratio never settled inside the band before the horizon.
    pub reached_horizon: bool,
}

impl Envelope {
    /// `T′_ε = max(T_ε, T′)`.
    pub fn t_eps_prime(&self) -> usize {
        self.t_eps.max(self.sign_stable_from.unwrap_or(0))
    }

    /// `i^d e^{−αi}` with `α` replaced by `alpha`.
    pub fn shape(&self, i: usize, alpha: f64) -> f64 {
        if self.c_hi == 0.0 {
            return 0.0;
        }
        let i = i as f64;
        (self.d as f64 * i.ln() - alpha * i).exp()
    }

    pub fn upper(&self, i: usize) -> f64 {
        self.c_hi * self.eps.exp() * self.shape(i, self.alpha)
    }

    pub fn lower(&self, i: usize) -> f64 {
        self.c_lo * (-self.eps).exp() * self.shape(i, self.alpha)
    }
}

const TIE_TOL: f64 = 1e-9;

/// Real coefficients (ascending in `i`) of a real mode's `c(i) = Σ_l A_l C(i + l − 1, l − 1)`.
fn coefficient_polynomial(weights: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; weights.len()];
    for (k, &a) in weights.iter().enumerate() {
        // C(i + k, k) = Π_{q=1}^{k} (i + q) / q
        let mut basis = vec![1.0];
        for q in 1..=k {
            let mut next = vec![0.0; basis.len() + 1];
            for (p, &c) in basis.iter().enumerate() {
                next[p] += c;
                next[p + 1] += c / q as f64;
            }
            basis = next;
        }
        for (p, c) in basis.iter().enumerate() {
            out[p] += a * c;
        }
    }
    out
}

fn eval_ascending(poly: &[f64], x: f64) -> f64 {
    poly.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Smallest `T′ ≥ 1` after which the polynomial keeps the sign of its leading coefficient.
fn sign_stabilization(poly: &[f64]) -> usize {
    let Some(deg) = poly.iter().rposition(|&c| c != 0.0) else {
        return 1;
    };
    let lead = poly[deg];
    let cauchy = 1.0 + poly[..deg].iter().map(|c| (c / lead).abs()).fold(0.0, f64::max);
    let top = cauchy.ceil() as usize + 1;
    (1..=top)
        .rev()
        .find(|&i| eval_ascending(&poly[..=deg], i as f64) * lead.signum() <= 0.0)
        .map_or(1, |i| i + 1)
}

/// Envelope parameters of the dominant mode of `modal`, sampled over `1..=horizon`.
pub fn dominant_envelope(modal: &ModalForm, horizon: usize, eps: f64) -> Result<Envelope> {
    if !(eps > 0.0) {
        return Err(Error::InvalidSpec(format!("envelope tolerance must be positive, got {eps}")));
    }
    let horizon = horizon.max(1);
    let Some(dominant) = modal.modes.first() else {
        return Ok(Envelope {
            alpha: f64::INFINITY,
            d: 0,
            c_lo: 0.0,
            c_hi: 0.0,
            eps,
            t_eps: 1,
            sign_stable_from: None,
            reached_horizon: false,
        });
    };
    let r1 = dominant.modulus();
    if let Some(second) = modal.modes.get(1) {
        if second.modulus() >= r1 * (1.0 - TIE_TOL) {
            return Err(Error::NoStrictlyDominantMode {
                r1,
                r2: second.modulus(),
            });
        }
    }
    let d = dominant.multiplicity - 1;
    let alpha = (-r1.ln()).max(0.0);

    // Everything is scaled by |r₁|^i so nothing underflows at long horizons.
    let c1: Vec<f64> = (0..=horizon).map(|i| dominant.scaled_value(i, r1)).collect();
    let ratio = |i: usize| -> f64 {
        let rest: f64 = modal.modes[1..].iter().map(|m| m.scaled_value(i, r1)).sum();
        if rest == 0.0 {
            1.0
        } else {
            1.0 + rest / c1[i]
        }
    };
    let (lo, hi) = ((-eps).exp(), eps.exp());
    let last_bad = (1..=horizon).rev().find(|&i| {
        let q = ratio(i);
        !(lo..=hi).contains(&q)
    });
    let (t_eps, reached_horizon) = match last_bad {
        Some(i) if i == horizon => {
            log::warn!("remainder ratio not inside [e^-{eps}, e^{eps}] by horizon {horizon}; using T_eps = horizon");
            (horizon, true)
        }
        Some(i) => (i + 1, false),
        None => (1, false),
    };

    let (mut c_lo, mut c_hi) = (f64::INFINITY, 0.0_f64);
    for i in t_eps..=horizon {
        let v = c1[i].abs() / (i as f64).powi(d as i32);
        c_lo = c_lo.min(v);
        c_hi = c_hi.max(v);
    }

    let sign_stable_from = (dominant.pole.im == 0.0 && dominant.pole.re > 0.0).then(|| {
        let weights: Vec<f64> = dominant.weights.iter().map(|w| w.re).collect();
        sign_stabilization(&coefficient_polynomial(&weights))
    });

    Ok(Envelope {
        alpha,
        d,
        c_lo,
        c_hi,
        eps,
        t_eps,
        sign_stable_from,
        reached_horizon,
    })
}

/// An impulse response `G_0..G_T` together with its pole structure and envelope.
#[derive(Debug, Clone)]
pub struct ImpulseResponse {
    /// Ground truth from the recursion.
    pub g: Vec<f64>,
    pub poles: PoleSet,
    pub modal: ModalForm,
    /// `|r₁|`.
    pub dominant_modulus: f64,
    /// Multiplicity `d₁` of the dominant pole.
    pub d1: usize,
    pub kind: DominantKind,
    pub envelope: Envelope,
}

impl ImpulseResponse {
    pub fn analyze(spec: &ArmaSpec, horizon: usize, eps: f64, policy: StabilityPolicy) -> Result<Self> {
        let poles = find_roots(&char_poly(spec)?)?;
        let modal = modal_form(&poles, policy)?;
        let envelope = dominant_envelope(&modal, horizon, eps)?;
        let g = impulse_recursive(spec, horizon)?;
        let (dominant_modulus, d1, kind) = match modal.modes.first() {
            None => (0.0, 1, DominantKind::Memoryless),
            Some(m) => {
                let kind = if m.pole.im != 0.0 {
                    DominantKind::ConjugatePair
                } else if m.pole.re > 0.0 {
                    DominantKind::RealPositive
                } else {
                    DominantKind::RealNegative
                };
                (m.modulus(), m.multiplicity, kind)
            }
        };
        Ok(Self {
            g,
            poles,
            modal,
            dominant_modulus,
            d1,
            kind,
            envelope,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.envelope.alpha
    }

    pub fn horizon(&self) -> usize {
        self.g.len() - 1
    }
}
