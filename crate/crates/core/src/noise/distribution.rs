use std::f64::consts::E;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::quadrature::composite;
use crate::error::{Error, Result};

/// Zero-mean innovation law of `w_t`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "innovation", rename_all = "snake_case")]
pub enum InnovationDistribution {
    /// `±1` with probability `1/2` each.
    #[default]
    Rademacher,
    /// Uniform on `[−h, h]`.
    CenteredUniform { half_width: f64 },
    /// `X − 1/λ` with `X ~ Exp(λ)`.
    CenteredExponential { rate: f64 },
    /// Two atoms whose probability-weighted mean is zero.
    TwoPointMixture {
        values: [f64; 2],
        probabilities: [f64; 2],
    },
}

impl InnovationDistribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            InnovationDistribution::Rademacher => Ok(()),
            InnovationDistribution::CenteredUniform { half_width } => {
                if half_width.is_finite() && half_width > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidDistribution(format!("half_width must be positive, got {half_width}")))
                }
            }
            InnovationDistribution::CenteredExponential { rate } => {
                if rate.is_finite() && rate > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidDistribution(format!("rate must be positive, got {rate}")))
                }
            }
            InnovationDistribution::TwoPointMixture { values, probabilities } => {
                let [p, q] = probabilities;
                if !(p > 0.0 && q > 0.0 && ((p + q) - 1.0).abs() < 1e-12) {
                    return Err(Error::InvalidDistribution(
                        "probabilities must be positive and sum to one".into(),
                    ));
                }
                if values.iter().any(|v| v.is_nan()) || values[0] == values[1] {
                    return Err(Error::InvalidDistribution("values must be two distinct numbers".into()));
                }
                let mean = p * values[0] + q * values[1];
                let scale = values[0].abs().max(values[1].abs());
                if mean.abs() > 1e-12 * scale {
                    return Err(Error::InvalidDistribution(format!("mixture is not centred (mean {mean})")));
                }
                Ok(())
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            InnovationDistribution::Rademacher => "rademacher",
            InnovationDistribution::CenteredUniform { .. } => "centered_uniform",
            InnovationDistribution::CenteredExponential { .. } => "centered_exponential",
            InnovationDistribution::TwoPointMixture { .. } => "two_point_mixture",
        }
    }

    /// `E[w²]`.
    pub fn variance(&self) -> f64 {
        match *self {
            InnovationDistribution::Rademacher => 1.0,
            InnovationDistribution::CenteredUniform { half_width: h } => h * h / 3.0,
            InnovationDistribution::CenteredExponential { rate } => 1.0 / (rate * rate),
            InnovationDistribution::TwoPointMixture { values, probabilities } => {
                probabilities[0] * values[0].powi(2) + probabilities[1] * values[1].powi(2)
            }
        }
    }

    /// `E|w|³`.
    pub fn abs_third(&self) -> f64 {
        match *self {
            InnovationDistribution::Rademacher => 1.0,
            InnovationDistribution::CenteredUniform { half_width: h } => h.powi(3) / 4.0,
            InnovationDistribution::CenteredExponential { rate } => (12.0 / E - 2.0) / rate.powi(3),
            InnovationDistribution::TwoPointMixture { values, probabilities } => {
                probabilities[0] * values[0].abs().powi(3) + probabilities[1] * values[1].abs().powi(3)
            }
        }
    }

    /// `E[w⁴]`.
    pub fn fourth(&self) -> f64 {
        match *self {
            InnovationDistribution::Rademacher => 1.0,
            InnovationDistribution::CenteredUniform { half_width: h } => h.powi(4) / 5.0,
            InnovationDistribution::CenteredExponential { rate } => 9.0 / rate.powi(4),
            InnovationDistribution::TwoPointMixture { values, probabilities } => {
                probabilities[0] * values[0].powi(4) + probabilities[1] * values[1].powi(4)
            }
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(
            self,
            InnovationDistribution::Rademacher | InnovationDistribution::TwoPointMixture { .. }
        )
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            InnovationDistribution::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            InnovationDistribution::CenteredUniform { half_width } => {
                half_width * (2.0 * rng.random::<f64>() - 1.0)
            }
            InnovationDistribution::CenteredExponential { rate } => {
                let u: f64 = rng.random();
                -(1.0 - u).ln() / rate - 1.0 / rate
            }
            InnovationDistribution::TwoPointMixture { values, probabilities } => {
                if rng.random::<f64>() < probabilities[0] {
                    values[0]
                } else {
                    values[1]
                }
            }
        }
    }

    /// `E|c·w + s|³` in closed form.
    pub fn shifted_abs_cube(&self, c: f64, s: f64) -> f64 {
        if c == 0.0 {
            return s.abs().powi(3);
        }
        match *self {
            InnovationDistribution::Rademacher => 0.5 * ((s + c).abs().powi(3) + (s - c).abs().powi(3)),
            InnovationDistribution::TwoPointMixture { values, probabilities } => {
                probabilities[0] * (c * values[0] + s).abs().powi(3)
                    + probabilities[1] * (c * values[1] + s).abs().powi(3)
            }
            InnovationDistribution::CenteredUniform { half_width } => {
                let a = c.abs() * half_width;
                let antiderivative = |y: f64| y.powi(3) * y.abs() / 4.0;
                (antiderivative(s + a) - antiderivative(s - a)) / (2.0 * a)
            }
            InnovationDistribution::CenteredExponential { rate } => {
                // c·w + s = sign(c)·(|c|X + q) with X ~ Exp(rate)
                let nu = rate / c.abs();
                let q = c.signum() * s - c.abs() / rate;
                shifted_exponential_abs_cube(nu, q)
            }
        }
    }

    /// Atoms, or a composite Gauss–Legendre rule against the density, as
    /// `(value, probability weight)` pairs.
    pub fn quadrature_nodes(&self) -> Vec<(f64, f64)> {
        match *self {
            InnovationDistribution::Rademacher => vec![(-1.0, 0.5), (1.0, 0.5)],
            InnovationDistribution::TwoPointMixture { values, probabilities } => {
                vec![(values[0], probabilities[0]), (values[1], probabilities[1])]
            }
            InnovationDistribution::CenteredUniform { half_width: h } => composite(-h, h, 64, 8)
                .into_iter()
                .map(|(x, w)| (x, w / (2.0 * h)))
                .collect(),
            InnovationDistribution::CenteredExponential { rate } => composite(0.0, 40.0 / rate, 160, 8)
                .into_iter()
                .map(|(x, w)| (x - 1.0 / rate, w * rate * (-rate * x).exp()))
                .collect(),
        }
    }
}

/// `E|Y + q|³` for `Y ~ Exp(ν)`.
fn shifted_exponential_abs_cube(nu: f64, q: f64) -> f64 {
    let signed = 6.0 / nu.powi(3) + 6.0 * q / nu.powi(2) + 3.0 * q * q / nu + q.powi(3);
    if q >= 0.0 {
        return signed;
    }
    // |x|³ = x³ + 2(−x)³·1{x<0}; the correction is ∫_0^L (L−y)³ ν e^{−νy} dy with L = −q.
    let l = -q;
    let mut i_k = (1.0 - (-nu * l).exp()) / nu;
    for k in 1..=2 {
        i_k = l.powi(k) / nu - k as f64 / nu * i_k;
    }
    let negative_part = l.powi(3) - 3.0 * i_k;
    signed + 2.0 * negative_part
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn all() -> Vec<InnovationDistribution> {
        vec![
            InnovationDistribution::Rademacher,
            InnovationDistribution::CenteredUniform { half_width: 1.5 },
            InnovationDistribution::CenteredExponential { rate: 2.0 },
            InnovationDistribution::TwoPointMixture {
                values: [-1.0, 3.0],
                probabilities: [0.75, 0.25],
            },
        ]
    }

    #[test]
    fn quadrature_reproduces_closed_form_moments() {
        for dist in all() {
            let nodes = dist.quadrature_nodes();
            let mass: f64 = nodes.iter().map(|(_, w)| w).sum();
            let mean: f64 = nodes.iter().map(|(x, w)| w * x).sum();
            let m2: f64 = nodes.iter().map(|(x, w)| w * x * x).sum();
            let m3: f64 = nodes.iter().map(|(x, w)| w * x.abs().powi(3)).sum();
            let m4: f64 = nodes.iter().map(|(x, w)| w * x.powi(4)).sum();
            assert!((mass - 1.0).abs() < 1e-12, "{dist:?}");
            assert!(mean.abs() < 1e-12, "{dist:?}");
            assert!((m2 - dist.variance()).abs() < 1e-10, "{dist:?}");
            assert!((m3 - dist.abs_third()).abs() < 1e-10, "{dist:?}");
            assert!((m4 - dist.fourth()).abs() < 1e-10, "{dist:?}");
        }
    }

    #[test]
    fn shifted_cube_against_quadrature() {
        for dist in all() {
            let nodes = dist.quadrature_nodes();
            for &(c, s) in &[(1.0, 0.0), (0.7, 0.3), (-1.3, 0.4), (2.0, -1.7), (0.2, 5.0)] {
                let direct: f64 = nodes.iter().map(|(x, w)| w * (c * x + s).abs().powi(3)).sum();
                let closed = dist.shifted_abs_cube(c, s);
                assert!((direct - closed).abs() < 1e-8 * closed.max(1.0), "{dist:?} c={c} s={s}: {direct} vs {closed}");
            }
        }
    }

    #[test]
    fn centred_exponential_third_moment() {
        let d = InnovationDistribution::CenteredExponential { rate: 1.0 };
        assert!((d.shifted_abs_cube(1.0, 0.0) - (12.0 / E - 2.0)).abs() < 1e-14);
    }

    #[test]
    fn sample_moments() {
        let mut rng = stream(11, 0);
        for dist in all() {
            let n = 200_000;
            let xs: Vec<f64> = (0..n).map(|_| dist.sample(&mut rng)).collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let m2 = xs.iter().map(|x| x * x).sum::<f64>() / n as f64;
            let sd = dist.variance().sqrt();
            assert!(mean.abs() < 5.0 * sd / (n as f64).sqrt(), "{dist:?}");
            let se2 = ((dist.fourth() - dist.variance().powi(2)) / n as f64).sqrt();
            assert!((m2 - dist.variance()).abs() <= 5.0 * se2, "{dist:?}");
        }
    }

    #[test]
    fn validation() {
        assert!(InnovationDistribution::CenteredUniform { half_width: 0.0 }.validate().is_err());
        assert!(InnovationDistribution::CenteredExponential { rate: -1.0 }.validate().is_err());
        let skewed = InnovationDistribution::TwoPointMixture {
            values: [-1.0, 1.0],
            probabilities: [0.3, 0.7],
        };
        assert!(skewed.validate().is_err());
        for dist in all() {
            dist.validate().unwrap();
        }
    }
}
