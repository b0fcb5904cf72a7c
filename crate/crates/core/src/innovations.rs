//! Seeded innovation streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::model::{Family, InnovationLaw, ModelSpec};

/// Scale making a GED variable with shape `shape` unit-variance.
pub fn ged_kappa(shape: f64) -> f64 {
    let l = -2.0 / shape * std::f64::consts::LN_2 + ln_gamma(1.0 / shape) - ln_gamma(3.0 / shape);
    (0.5 * l).exp()
}

#[derive(Debug, Clone)]
pub(crate) struct GedLaw {
    inv_shape: f64,
    kappa: f64,
    gamma: Gamma<f64>,
}

impl GedLaw {
    pub(crate) fn new(shape: f64) -> Result<Self> {
        if !(shape.is_finite() && shape > 0.0) {
            return Err(Error::InvalidArgument(format!("GED shape must be > 0, got {shape}")));
        }
        let inv_shape = 1.0 / shape;
        Ok(Self {
            inv_shape,
            kappa: ged_kappa(shape),
            gamma: Gamma::new(inv_shape, 1.0).map_err(|e| Error::InvalidArgument(e.to_string()))?,
        })
    }

    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let g: f64 = self.gamma.sample(rng);
        let mag = self.kappa * (2.0 * g).powf(self.inv_shape);
        if rng.random::<bool>() {
            mag
        } else {
            -mag
        }
    }
}

/// Zero-mean, unit-variance generalized error distribution draws.
#[derive(Debug, Clone)]
pub struct GedSampler {
    rng: ChaCha8Rng,
    law: GedLaw,
}

impl Iterator for GedSampler {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(self.law.draw(&mut self.rng))
    }
}

pub fn sample_ged(shape: f64, seed: u64) -> Result<GedSampler> {
    Ok(GedSampler {
        rng: ChaCha8Rng::seed_from_u64(seed),
        law: GedLaw::new(shape)?,
    })
}

/// Gamma draws with mean one and variance `sigma_sq`.
#[derive(Debug, Clone)]
pub struct GammaUnitMeanSampler {
    rng: ChaCha8Rng,
    gamma: Gamma<f64>,
}

impl Iterator for GammaUnitMeanSampler {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(self.gamma.sample(&mut self.rng))
    }
}

fn unit_mean_gamma(sigma_sq: f64) -> Result<Gamma<f64>> {
    if !(sigma_sq.is_finite() && sigma_sq > 0.0) {
        return Err(Error::InvalidArgument(format!("sigma^2 must be > 0, got {sigma_sq}")));
    }
    let shape = 1.0 / sigma_sq;
    Gamma::new(shape, 1.0 / shape).map_err(|e| Error::InvalidArgument(e.to_string()))
}

pub fn sample_gamma_unit_mean(sigma_sq: f64, seed: u64) -> Result<GammaUnitMeanSampler> {
    Ok(GammaUnitMeanSampler {
        rng: ChaCha8Rng::seed_from_u64(seed),
        gamma: unit_mean_gamma(sigma_sq)?,
    })
}

enum Law {
    Ged(GedLaw),
    Normal,
    Exponential,
    Seasonal(Vec<Gamma<f64>>),
}

/// Innovation source for a model: `draw(t)` returns the innovation at time `t`.
pub(crate) struct ModelInnovations {
    rng: ChaCha8Rng,
    law: Law,
}

impl ModelInnovations {
    pub(crate) fn new(spec: &ModelSpec) -> Result<Self> {
        let inn = spec.innovation();
        let law = match inn.law {
            InnovationLaw::Ged { shape } => Law::Ged(GedLaw::new(shape)?),
            InnovationLaw::StdNormal => Law::Normal,
            InnovationLaw::UnitExponential => Law::Exponential,
            InnovationLaw::GammaUnitMean => Law::Seasonal(
                spec.param(Family::SigmaSq)
                    .values()
                    .iter()
                    .map(|&s| unit_mean_gamma(s))
                    .collect::<Result<_>>()?,
            ),
        };
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(inn.seed),
            law,
        })
    }

    pub(crate) fn draw(&mut self, t: usize) -> f64 {
        match &self.law {
            Law::Ged(s) => s.draw(&mut self.rng),
            Law::Normal => self.rng.sample(StandardNormal),
            Law::Exponential => self.rng.sample(Exp1),
            Law::Seasonal(g) => g[t % g.len()].sample(&mut self.rng),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, Exp, Normal};

    fn ks<F: Fn(f64) -> f64>(mut xs: Vec<f64>, cdf: F) -> f64 {
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let c = cdf(x);
                (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn kappa_two_is_one() {
        assert!((ged_kappa(2.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ged_two_is_standard_normal() {
        let xs: Vec<f64> = sample_ged(2.0, 3).unwrap().take(100_000).collect();
        let n = Normal::new(0.0, 1.0).unwrap();
        assert!(ks(xs, |x| n.cdf(x)) < 0.01);
    }

    #[test]
    fn ged_moments() {
        let xs: Vec<f64> = sample_ged(1.8, 11).unwrap().take(1_000_000).collect();
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
        let sk = xs.iter().map(|x| (x - m).powi(3)).sum::<f64>() / n / v.powf(1.5);
        assert!(m.abs() < 0.01, "mean {m}");
        assert!((v - 1.0).abs() < 0.02, "var {v}");
        assert!(sk.abs() < 0.02, "skew {sk}");
    }

    #[test]
    fn gamma_sigma_one_is_exponential() {
        let xs: Vec<f64> = sample_gamma_unit_mean(1.0, 5).unwrap().take(100_000).collect();
        let e = Exp::new(1.0).unwrap();
        assert!(ks(xs, |x| e.cdf(x)) < 0.01);
    }

    #[test]
    fn gamma_moments_and_support() {
        let xs: Vec<f64> = sample_gamma_unit_mean(0.4, 9).unwrap().take(1_000_000).collect();
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
        assert!((m - 1.0).abs() < 0.005);
        assert!((v - 0.4).abs() < 0.01);
        assert!(xs.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn streams_are_reproducible() {
        let a: Vec<f64> = sample_ged(1.3, 77).unwrap().take(50).collect();
        let b: Vec<f64> = sample_ged(1.3, 77).unwrap().take(50).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(sample_ged(0.0, 1).is_err());
        assert!(sample_gamma_unit_mean(-1.0, 1).is_err());
    }
}
