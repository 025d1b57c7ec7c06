use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// AR coefficients `a_1..a_n` and MA coefficients `b_0..b_m` of
/// `y_t = Σ a_i y_{t-i} + Σ b_j w_{t-j}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmaSpec {
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
}

impl ArmaSpec {
    pub fn new(ar: Vec<f64>, ma: Vec<f64>) -> Result<Self> {
        let spec = Self { ar, ma };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ma.is_empty() {
            return Err(Error::InvalidSpec("MA part needs at least b_0".into()));
        }
        if self.ma.iter().all(|&b| b == 0.0) {
            return Err(Error::InvalidSpec("at least one MA coefficient must be nonzero".into()));
        }
        if self.ar.iter().chain(&self.ma).any(|c| !c.is_finite()) {
            return Err(Error::InvalidSpec("coefficients must be finite".into()));
        }
        Ok(())
    }

    /// AR order `n`.
    pub fn ar_order(&self) -> usize {
        self.ar.len()
    }

    /// MA order `m` (so there are `m + 1` coefficients).
    pub fn ma_order(&self) -> usize {
        self.ma.len() - 1
    }
}

/// Coefficients (highest power first) of `zⁿ − a₁zⁿ⁻¹ − … − a_n`.
pub fn char_poly(spec: &ArmaSpec) -> Result<Vec<f64>> {
    if spec.ar.is_empty() {
        return Err(Error::NoCharacteristicPolynomial);
    }
    let mut poly = Vec::with_capacity(spec.ar.len() + 1);
    poly.push(1.0);
    poly.extend(spec.ar.iter().map(|a| -a));
    Ok(poly)
}
