//! Innovations `w_t`, the MA-filtered input `u_t = Σ_{j=0}^m b_j w_{t−j}`, and
//! the exact moment and correlation structure of `u`.
//!
//! Input indices start at `1`. Innovations are `w_k` for `k ≥ 1` under
//! [`InitialCondition::Zero`], or `k ≥ 1 − m` when the pre-sample innovations
//! are drawn ([`InitialCondition::Stationary`]).

mod distribution;
mod quadrature;

use std::collections::HashMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use distribution::InnovationDistribution;
pub use quadrature::{composite, gauss_legendre};

use crate::error::{Error, Result};
use crate::rng::{purpose, stream};

/// Per-index multipliers of the innovation variance, cycled by index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VarianceSchedule(Vec<f64>);

impl Default for VarianceSchedule {
    fn default() -> Self {
        VarianceSchedule(vec![1.0])
    }
}

impl VarianceSchedule {
    pub fn new(multipliers: Vec<f64>) -> Result<Self> {
        if multipliers.is_empty() || multipliers.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
            return Err(Error::InvalidDistribution(
                "variance schedule needs positive finite multipliers".into(),
            ));
        }
        Ok(VarianceSchedule(multipliers))
    }

    pub fn multipliers(&self) -> &[f64] {
        &self.0
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|m| *m == self.0[0])
    }

    /// Multiplier of `Var(w_k)`; defined for every integer `k`.
    pub fn multiplier(&self, k: i64) -> f64 {
        self.0[k.rem_euclid(self.0.len() as i64) as usize]
    }
}

/// How the innovations before the first input are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialCondition {
    /// `w_0 = … = w_{1−m} = 0`.
    #[default]
    Zero,
    /// `w_{1−m}, …, w_0` drawn like every other innovation.
    Stationary,
}

/// Correlation structure of `u`, in the order the bounds are tried.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum CorrelationClass {
    Independent,
    PositivelyCorrelated,
    Decay { a: f64 },
    Other,
}

impl CorrelationClass {
    pub fn name(&self) -> &'static str {
        match self {
            CorrelationClass::Independent => "independent",
            CorrelationClass::PositivelyCorrelated => "positively_correlated",
            CorrelationClass::Decay { .. } => "decay",
            CorrelationClass::Other => "other",
        }
    }
}

impl fmt::Display for CorrelationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorrelationClass::Decay { a } => write!(f, "decay(a={a})"),
            other => f.write_str(other.name()),
        }
    }
}

/// Moment envelopes of `u_1..u_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentProfile {
    /// Lower bound on `E[u_i²]` (equal to `s2_lo`).
    pub s2: f64,
    /// Upper bound on `E|u_i|³`.
    pub s3: f64,
    /// Upper bound on `E[u_i⁴]`.
    pub s4: f64,
    pub s2_lo: f64,
    pub s2_hi: f64,
    /// Min/max of `E[u_i u_{i+l}]` over `1 ≤ l ≤ M`, `1 ≤ i ≤ t`; zero when `M = 0`.
    pub sc_lo: f64,
    pub sc_hi: f64,
    /// Smallest `a` with `|E[u_i u_j]| ≤ a·s2_lo` for all `i ≠ j`.
    pub decay_a: f64,
    /// Dependency degree `D = 2m + 1`.
    pub dependency: usize,
    /// Neighbourhood radius `M = m`.
    pub radius: usize,
    /// Exactly one nonzero MA coefficient.
    pub independent: bool,
}

impl MomentProfile {
    /// Independent, then decay when `a < 1/(2M)`, then positively correlated,
    /// else other.
    pub fn classify(&self) -> CorrelationClass {
        if self.independent {
            CorrelationClass::Independent
        } else if self.radius > 0 && self.decay_a < 1.0 / (2.0 * self.radius as f64) {
            CorrelationClass::Decay { a: self.decay_a }
        } else if self.sc_lo > 0.0 {
            CorrelationClass::PositivelyCorrelated
        } else {
            CorrelationClass::Other
        }
    }
}

/// Exact per-index moments of `u_1..u_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputStatistics {
    /// `E[u_i²]` at position `i − 1`.
    pub second: Vec<f64>,
    pub abs_third: Vec<f64>,
    pub fourth: Vec<f64>,
    pub profile: MomentProfile,
}

impl InputStatistics {
    pub fn len(&self) -> usize {
        self.second.len()
    }

    pub fn is_empty(&self) -> bool {
        self.second.is_empty()
    }
}

/// The input process `u_t = Σ b_j w_{t−j}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputProcess {
    pub ma: Vec<f64>,
    pub distribution: InnovationDistribution,
    #[serde(default)]
    pub schedule: VarianceSchedule,
    #[serde(default)]
    pub initial: InitialCondition,
}

impl InputProcess {
    pub fn new(ma: Vec<f64>, distribution: InnovationDistribution) -> Result<Self> {
        let process = InputProcess {
            ma,
            distribution,
            schedule: VarianceSchedule::default(),
            initial: InitialCondition::Zero,
        };
        process.validate()?;
        Ok(process)
    }

    pub fn with_schedule(mut self, schedule: VarianceSchedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn with_initial(mut self, initial: InitialCondition) -> Self {
        self.initial = initial;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.ma.is_empty() || self.ma.iter().all(|b| *b == 0.0) {
            return Err(Error::InvalidSpec("MA part needs a nonzero coefficient".into()));
        }
        if self.ma.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidSpec("MA coefficients must be finite".into()));
        }
        self.distribution.validate()?;
        VarianceSchedule::new(self.schedule.0.clone())?;
        Ok(())
    }

    /// MA order `m`.
    pub fn order(&self) -> usize {
        self.ma.len() - 1
    }

    /// Index of the first innovation that is not identically zero.
    pub fn first_innovation(&self) -> i64 {
        match self.initial {
            InitialCondition::Zero => 1,
            InitialCondition::Stationary => 1 - self.order() as i64,
        }
    }

    pub fn innovation_variance(&self, k: i64) -> f64 {
        self.distribution.variance() * self.schedule.multiplier(k)
    }

    /// `(k, b_{i−k}·√mult_k)` for every live innovation feeding `u_i`.
    fn coefficients(&self, i: i64) -> Vec<(i64, f64)> {
        let first = self.first_innovation();
        self.ma
            .iter()
            .enumerate()
            .map(|(j, b)| (i - j as i64, *b))
            .filter(|(k, _)| *k >= first)
            .map(|(k, b)| (k, b * self.schedule.multiplier(k).sqrt()))
            .collect()
    }

    /// `E[u_i u_j]`.
    pub fn covariance(&self, i: i64, j: i64) -> f64 {
        let ci = self.coefficients(i);
        let cj = self.coefficients(j);
        let var = self.distribution.variance();
        ci.iter()
            .filter_map(|(k, x)| cj.iter().find(|(l, _)| l == k).map(|(_, y)| x * y * var))
            .sum()
    }

    pub fn second_moment(&self, i: i64) -> f64 {
        self.covariance(i, i)
    }

    pub fn fourth_moment(&self, i: i64) -> f64 {
        let c: Vec<f64> = self.coefficients(i).into_iter().map(|(_, c)| c).collect();
        fourth_moment(&self.distribution, &c)
    }

    pub fn abs_third_moment(&self, i: i64) -> f64 {
        let c: Vec<f64> = self.coefficients(i).into_iter().map(|(_, c)| c).collect();
        abs_third_moment(&self.distribution, &c)
    }

    /// Innovations `w_{first}..w_{length}`; index `k` lives at `k − first`.
    pub fn draw_innovations<R: Rng + ?Sized>(&self, rng: &mut R, length: usize) -> Vec<f64> {
        let first = self.first_innovation();
        (first..=length as i64)
            .map(|k| self.distribution.sample(rng) * self.schedule.multiplier(k).sqrt())
            .collect()
    }

    /// `u_1..u_length` from innovations laid out as by [`Self::draw_innovations`].
    pub fn filter(&self, innovations: &[f64], length: usize) -> Vec<f64> {
        let first = self.first_innovation();
        (1..=length as i64)
            .map(|i| {
                self.ma
                    .iter()
                    .enumerate()
                    .filter_map(|(j, b)| {
                        let k = i - j as i64;
                        (k >= first).then(|| b * innovations[(k - first) as usize])
                    })
                    .sum()
            })
            .collect()
    }

    /// `u_1..u_length`, a pure function of `seed`.
    pub fn sample_u(&self, length: usize, seed: u64) -> Vec<f64> {
        let mut rng = stream(seed, purpose::INPUT);
        let w = self.draw_innovations(&mut rng, length);
        self.filter(&w, length)
    }

    /// Exact moments of `u_1..u_t` and their envelopes.
    pub fn statistics(&self, t: usize) -> Result<InputStatistics> {
        self.validate()?;
        if t == 0 {
            return Err(Error::InvalidSpec("input horizon must be at least 1".into()));
        }
        let mut cache: HashMap<Vec<u64>, (f64, f64)> = HashMap::new();
        let mut second = Vec::with_capacity(t);
        let mut abs_third = Vec::with_capacity(t);
        let mut fourth = Vec::with_capacity(t);
        for i in 1..=t as i64 {
            let c: Vec<f64> = self.coefficients(i).into_iter().map(|(_, c)| c).collect();
            let key = c.iter().map(|x| x.to_bits()).collect();
            let (m3, m4) = *cache
                .entry(key)
                .or_insert_with(|| (abs_third_moment(&self.distribution, &c), fourth_moment(&self.distribution, &c)));
            second.push(c.iter().map(|x| x * x).sum::<f64>() * self.distribution.variance());
            abs_third.push(m3);
            fourth.push(m4);
        }
        let m = self.order();
        let (mut sc_lo, mut sc_hi, mut max_cross) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
        // every neighbour pair touching 1..t, so t = 1 still sees the correlation
        for i in 1..=t as i64 {
            for lag in 1..=m as i64 {
                let cov = self.covariance(i, i + lag);
                sc_lo = sc_lo.min(cov);
                sc_hi = sc_hi.max(cov);
                max_cross = max_cross.max(cov.abs());
            }
        }
        if !sc_lo.is_finite() {
            sc_lo = 0.0;
            sc_hi = 0.0;
        }
        let s2_lo = second.iter().copied().fold(f64::INFINITY, f64::min);
        let s2_hi = second.iter().copied().fold(0.0, f64::max);
        let s3 = abs_third.iter().copied().fold(0.0, f64::max);
        let s4 = fourth.iter().copied().fold(0.0, f64::max);
        if !s4.is_finite() {
            return Err(Error::MomentUnavailable(format!("fourth moment is {s4}")));
        }
        let decay_a = if max_cross == 0.0 {
            0.0
        } else if s2_lo > 0.0 {
            max_cross / s2_lo
        } else {
            f64::INFINITY
        };
        let profile = MomentProfile {
            s2: s2_lo,
            s3,
            s4,
            s2_lo,
            s2_hi,
            sc_lo,
            sc_hi,
            decay_a,
            dependency: 2 * m + 1,
            radius: m,
            independent: self.ma.iter().filter(|b| **b != 0.0).count() == 1,
        };
        Ok(InputStatistics {
            second,
            abs_third,
            fourth,
            profile,
        })
    }
}

/// `Σ_k b_k b_{k+|lag|} var_w`.
pub fn covariance_u(b: &[f64], var_w: f64, lag: i64) -> f64 {
    let lag = lag.unsigned_abs() as usize;
    if lag >= b.len() {
        return 0.0;
    }
    b.iter().zip(&b[lag..]).map(|(x, y)| x * y).sum::<f64>() * var_w
}

/// Profile of the stationary input with a constant variance schedule.
pub fn moment_profile(b: &[f64], distribution: &InnovationDistribution) -> Result<MomentProfile> {
    let process = InputProcess::new(b.to_vec(), distribution.clone())?.with_initial(InitialCondition::Stationary);
    Ok(process.statistics(b.len())?.profile)
}

/// `E[(Σ c_k w_k)⁴]` for independent `w_k` drawn from `dist`.
pub fn fourth_moment(dist: &InnovationDistribution, c: &[f64]) -> f64 {
    let var = dist.variance();
    let mu4 = dist.fourth();
    let squares: Vec<f64> = c.iter().map(|x| x * x).collect();
    let diagonal: f64 = squares.iter().map(|s| s * s).sum::<f64>() * mu4;
    let total: f64 = squares.iter().sum();
    let cross = 0.5 * (total * total - squares.iter().map(|s| s * s).sum::<f64>());
    diagonal + 6.0 * cross * var * var
}

const MAX_ENUMERATED: usize = 16;
const MAX_INTEGRATED: usize = 3;

/// `E|Σ c_k w_k|³`: exact for discrete laws (up to 16 terms) and by quadrature
/// for continuous laws (up to 3 terms); otherwise the smaller of the Minkowski
/// and Cauchy–Schwarz upper bounds.
pub fn abs_third_moment(dist: &InnovationDistribution, c: &[f64]) -> f64 {
    let c: Vec<f64> = c.iter().copied().filter(|x| *x != 0.0).collect();
    match c.len() {
        0 => return 0.0,
        1 => return c[0].abs().powi(3) * dist.abs_third(),
        _ => {}
    }
    if dist.is_discrete() && c.len() <= MAX_ENUMERATED {
        let atoms = dist.quadrature_nodes();
        let mut total = 0.0;
        for pattern in 0..(1usize << c.len()) {
            let mut value = 0.0;
            let mut prob = 1.0;
            for (bit, ck) in c.iter().enumerate() {
                let (x, p) = atoms[(pattern >> bit) & 1];
                value += ck * x;
                prob *= p;
            }
            total += prob * value.abs().powi(3);
        }
        return total;
    }
    if !dist.is_discrete() && c.len() <= MAX_INTEGRATED {
        let nodes = dist.quadrature_nodes();
        let last = c[c.len() - 1];
        return match c.len() {
            2 => nodes.iter().map(|(x, w)| w * dist.shifted_abs_cube(last, c[0] * x)).sum(),
            _ => nodes
                .iter()
                .map(|(x, wx)| {
                    wx * nodes
                        .iter()
                        .map(|(y, wy)| wy * dist.shifted_abs_cube(last, c[0] * x + c[1] * y))
                        .sum::<f64>()
                })
                .sum(),
        };
    }
    let minkowski = (c.iter().map(|x| x.abs()).sum::<f64>() * dist.abs_third().cbrt()).powi(3);
    let second = c.iter().map(|x| x * x).sum::<f64>() * dist.variance();
    let cauchy_schwarz = (second * fourth_moment(dist, &c)).sqrt();
    minkowski.min(cauchy_schwarz)
}
