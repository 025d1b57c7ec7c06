use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::arma::ArmaSpec;
use super::roots::PoleSet;
use crate::error::{Error, Result};

/// Whether poles on the unit circle are accepted.
///
/// `AllowEdge` exists for edge-of-stability studies (`α = 0`); poles strictly
/// outside the unit circle are always rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityPolicy {
    #[default]
    Strict,
    AllowEdge,
}

const EDGE_TOL: f64 = 1e-9;

impl StabilityPolicy {
    pub fn check(self, modulus: f64) -> Result<()> {
        let ok = match self {
            StabilityPolicy::Strict => modulus < 1.0,
            StabilityPolicy::AllowEdge => modulus <= 1.0 + EDGE_TOL,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Unstable { modulus })
        }
    }
}

/// `G_0..G_T` from the recursion `G_j = Σ a_i G_{j−i}` driven by a unit impulse.
pub fn impulse_recursive(spec: &ArmaSpec, horizon: usize) -> Result<Vec<f64>> {
    if spec.ar.is_empty() {
        return Err(Error::NoCharacteristicPolynomial);
    }
    let mut g = vec![0.0; horizon + 1];
    g[0] = 1.0;
    for j in 1..=horizon {
        g[j] = spec
            .ar
            .iter()
            .take(j)
            .enumerate()
            .map(|(i, a)| a * g[j - 1 - i])
            .sum();
    }
    Ok(g)
}

/// One modal term `c(j) r^j` of the impulse response; a conjugate pair is
/// stored once (upper half plane) and contributes `2 Re(c(j) r^j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub pole: Complex64,
    pub multiplicity: usize,
    /// Partial-fraction weights `A_1..A_d` of `1 / (1 − r z⁻¹)^l`.
    pub weights: Vec<Complex64>,
    pub conjugate_pair: bool,
}

fn rising_binomial(j: usize, l: usize) -> f64 {
    // C(j + l − 1, l − 1)
    (1..l).fold(1.0, |acc, q| acc * (j + q) as f64 / q as f64)
}

impl Mode {
    pub fn modulus(&self) -> f64 {
        self.pole.norm()
    }

    /// `c(j) = Σ_l A_l C(j + l − 1, l − 1)`, a polynomial of degree `d − 1` in `j`.
    pub fn coefficient(&self, j: usize) -> Complex64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(k, a)| a * rising_binomial(j, k + 1))
            .sum()
    }

    /// The real contribution of this mode at index `j` divided by `scale^j`.
    pub fn scaled_value(&self, j: usize, scale: f64) -> f64 {
        let c = self.coefficient(j);
        if self.pole.im == 0.0 {
            let r = self.pole.re;
            let magnitude = (r.abs() / scale).powi(j as i32);
            let sign = if r < 0.0 && j % 2 == 1 { -1.0 } else { 1.0 };
            c.re * magnitude * sign
        } else {
            let magnitude = (self.modulus() / scale).powi(j as i32);
            let phase = Complex64::from_polar(1.0, j as f64 * self.pole.arg());
            2.0 * (c * phase).re * magnitude
        }
    }

    pub fn value(&self, j: usize) -> f64 {
        self.scaled_value(j, 1.0)
    }
}

/// `G_j = direct·[j = 0] + Σ_k c_k(j) r_k^j` over the nonzero poles.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalForm {
    /// Sorted by descending modulus, conjugate pairs merged.
    pub modes: Vec<Mode>,
    /// `1` when every pole is zero (memoryless system), else `0`.
    pub direct: f64,
}

impl ModalForm {
    pub fn value(&self, j: usize) -> f64 {
        let direct = if j == 0 { self.direct } else { 0.0 };
        direct + self.modes.iter().map(|m| m.value(j)).sum::<f64>()
    }

    pub fn sequence(&self, horizon: usize) -> Vec<f64> {
        (0..=horizon).map(|j| self.value(j)).collect()
    }
}

/// Truncated power series of `(β + γ s)^{−d}` up to `s^{order−1}`.
fn inverse_power_series(beta: Complex64, gamma: Complex64, d: usize, order: usize) -> Vec<Complex64> {
    let ratio = gamma / beta;
    let mut out = Vec::with_capacity(order);
    let mut term = beta.powi(-(d as i32));
    for n in 0..order {
        out.push(term);
        // binom(−d, n+1) / binom(−d, n) = −(d + n) / (n + 1)
        term *= ratio * (-((d + n) as f64) / (n + 1) as f64);
    }
    out
}

fn series_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len()];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate().take(a.len() - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// Partial-fraction expansion of `1 / Π (1 − r_k z⁻¹)^{d_k}` over the nonzero poles.
pub fn modal_form(poles: &PoleSet, policy: StabilityPolicy) -> Result<ModalForm> {
    for pole in poles.poles() {
        policy.check(pole.modulus())?;
    }
    let nonzero: Vec<_> = poles.poles().iter().filter(|p| p.modulus() > 0.0).collect();
    let mut modes = Vec::new();
    for (k, pole) in nonzero.iter().enumerate() {
        if pole.value.im < 0.0 {
            continue;
        }
        let d = pole.multiplicity;
        let rk = pole.value;
        let mut psi = vec![Complex64::new(0.0, 0.0); d];
        psi[0] = Complex64::new(1.0, 0.0);
        for (i, other) in nonzero.iter().enumerate() {
            if i == k {
                continue;
            }
            let beta = (rk - other.value) / rk;
            let gamma = other.value / rk;
            psi = series_mul(&psi, &inverse_power_series(beta, gamma, other.multiplicity, d));
        }
        let weights = (1..=d).map(|l| psi[d - l]).collect();
        modes.push(Mode {
            pole: rk,
            multiplicity: d,
            weights,
            conjugate_pair: rk.im > 0.0,
        });
    }
    let direct = if modes.is_empty() { 1.0 } else { 0.0 };
    Ok(ModalForm { modes, direct })
}

/// `G_0..G_T` from the modal expansion over `poles`.
pub fn impulse_modal(poles: &PoleSet, horizon: usize, policy: StabilityPolicy) -> Result<Vec<f64>> {
    Ok(modal_form(poles, policy)?.sequence(horizon))
}
