//! One-dimensional Wasserstein-1 distances, `W₁(F, Φ) = ∫ |F(x) − Φ(x)| dx`,
//! evaluated exactly for empirical `F`.

use std::f64::consts::{PI, SQRT_2};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::rng::{derive, purpose, stream};

pub const BOOTSTRAP_RESAMPLES: usize = 200;

pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// `Φ⁻¹(p)`, polished with Newton steps against [`std_normal_cdf`].
pub fn std_normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let mut x = Normal::standard().inverse_cdf(p);
    for _ in 0..3 {
        let pdf = std_normal_pdf(x);
        if pdf < 1e-300 {
            break;
        }
        x -= (std_normal_cdf(x) - p) / pdf;
    }
    x
}

/// `Ψ(x) = ∫_{−∞}^x Φ = xΦ(x) + φ(x)`.
fn psi(x: f64) -> f64 {
    x * std_normal_cdf(x) + std_normal_pdf(x)
}

/// `∫_a^b Φ`.
fn cdf_integral(a: f64, b: f64) -> f64 {
    psi(b) - psi(a)
}

/// `∫_a^b (1 − Φ)`.
fn survival_integral(a: f64, b: f64) -> f64 {
    psi(-a) - psi(-b)
}

/// `∫_a^b |c − Φ(x)| dx` for `a ≤ b` and a constant level `c ∈ [0, 1]`.
fn segment(a: f64, b: f64, c: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    // ∫(c − Φ) over a stretch where Φ ≤ c, in whichever form cancels less
    let below = |lo: f64, hi: f64| {
        if hi <= lo {
            0.0
        } else if c <= 0.5 {
            c * (hi - lo) - cdf_integral(lo, hi)
        } else {
            survival_integral(lo, hi) - (1.0 - c) * (hi - lo)
        }
    };
    let above = |lo: f64, hi: f64| {
        if hi <= lo {
            0.0
        } else if c <= 0.5 {
            cdf_integral(lo, hi) - c * (hi - lo)
        } else {
            (1.0 - c) * (hi - lo) - survival_integral(lo, hi)
        }
    };
    let s = std_normal_quantile(c).clamp(a, b);
    (below(a, s) + above(s, b)).max(0.0)
}

/// Sorted values with optional provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalSample {
    values: Vec<f64>,
    pub seed: Option<u64>,
    pub config_hash: Option<String>,
}

impl EmpiricalSample {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidExperiment("sample contains a non-finite value".into()));
        }
        values.sort_by(f64::total_cmp);
        Ok(EmpiricalSample {
            values,
            seed: None,
            config_hash: None,
        })
    }

    pub fn with_lineage(mut self, seed: u64, config_hash: impl Into<String>) -> Self {
        self.seed = Some(seed);
        self.config_hash = Some(config_hash.into());
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let n = self.len() as f64;
        if self.len() < 2 {
            return 0.0;
        }
        self.values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)
    }
}

/// `∫|F − Φ|` for the distribution putting mass `weights[i]` (summing to one)
/// on the sorted `values[i]`.
pub fn w1_weighted(values: &[f64], weights: &[f64]) -> f64 {
    debug_assert_eq!(values.len(), weights.len());
    let n = values.len();
    let mut total = psi(values[0]).max(0.0);
    let mut level = 0.0;
    for i in 0..n - 1 {
        level += weights[i];
        total += segment(values[i], values[i + 1], level.min(1.0));
    }
    total + psi(-values[n - 1]).max(0.0)
}

/// Exact `W₁` between the empirical law of `sample` and `N(0, 1)`.
pub fn w1_to_std_normal(sample: &EmpiricalSample) -> f64 {
    let w = 1.0 / sample.len() as f64;
    w1_weighted(sample.values(), &vec![w; sample.len()])
}

/// `(1/N) Σ |a_(i) − b_(i)|` for equal-size samples.
pub fn w1_two_sample(a: &EmpiricalSample, b: &EmpiricalSample) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::SampleSizeMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let total: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).sum();
    Ok(total / a.len() as f64)
}

/// `Ŵ₁` with its nonparametric bootstrap standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct W1Estimate {
    pub n: usize,
    pub w1: f64,
    pub se: f64,
}

impl W1Estimate {
    pub const CSV_HEADER: &'static str = "N,w1,se";

    pub fn csv_row(&self) -> String {
        format!("{},{},{}", self.n, self.w1, self.se)
    }
}

/// Standard deviation of `W₁` over `resamples` multinomial resamples, each
/// on its own stream derived from `seed`.
pub fn bootstrap_se(sample: &EmpiricalSample, resamples: usize, seed: u64) -> f64 {
    let n = sample.len();
    if resamples < 2 {
        return 0.0;
    }
    let base = derive(seed, purpose::BOOTSTRAP);
    let estimates: Vec<f64> = (0..resamples)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(base, r as u64);
            let mut counts = vec![0u32; n];
            for _ in 0..n {
                counts[rng.random_range(0..n)] += 1;
            }
            let weights: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
            w1_weighted(sample.values(), &weights)
        })
        .collect();
    let mean = estimates.iter().sum::<f64>() / resamples as f64;
    let var = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (resamples as f64 - 1.0);
    var.sqrt()
}

pub fn estimate(sample: &EmpiricalSample, seed: u64) -> W1Estimate {
    W1Estimate {
        n: sample.len(),
        w1: w1_to_std_normal(sample),
        se: bootstrap_se(sample, BOOTSTRAP_RESAMPLES, seed),
    }
}
