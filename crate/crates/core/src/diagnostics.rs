//! Adequacy and forecast-accuracy statistics, and a Monte-Carlo estimate of
//! the top Lyapunov exponent of the random coefficient matrices.

use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::innovations::ModelInnovations;
use crate::model::{ModelKind, ModelSpec};

/// Sample autocorrelations at lags `1..=max_lag`.
pub fn acf(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if max_lag == 0 || x.len() <= max_lag {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= max_lag < len(x); got max_lag = {max_lag}, len = {}",
            x.len()
        )));
    }
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let d: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let denom: f64 = d.iter().map(|v| v * v).sum();
    if !(denom > 0.0) {
        return Err(Error::DegenerateData("series has zero variance".into()));
    }
    Ok((1..=max_lag)
        .map(|k| d[..n - k].iter().zip(&d[k..]).map(|(a, b)| a * b).sum::<f64>() / denom)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LjungBox {
    pub q: f64,
    pub p_value: f64,
    pub lag: usize,
}

/// `Q = n(n+2) sum rho_k^2 / (n-k)` against chi-square with `lag` degrees of freedom.
pub fn ljung_box(x: &[f64], lag: usize) -> Result<LjungBox> {
    let rho = acf(x, lag)?;
    let n = x.len() as f64;
    let q = n * (n + 2.0) * rho.iter().enumerate().map(|(i, r)| r * r / (n - (i + 1) as f64)).sum::<f64>();
    let chi = ChiSquared::new(lag as f64).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(LjungBox {
        q,
        p_value: chi.sf(q).clamp(0.0, 1.0),
        lag,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForecastErrors {
    pub rmsfe: f64,
    pub mafe: f64,
}

pub fn forecast_errors(actual: &[f64], predicted: &[f64]) -> Result<ForecastErrors> {
    if actual.len() != predicted.len() || actual.is_empty() {
        return Err(Error::InvalidArgument("actual and predicted must be non-empty and equally long".into()));
    }
    let n = actual.len() as f64;
    let (sq, ab) = actual.iter().zip(predicted).fold((0.0, 0.0), |(s, a), (x, p)| {
        let e = x - p;
        (s + e * e, a + e.abs())
    });
    Ok(ForecastErrors {
        rmsfe: (sq / n).sqrt(),
        mafe: ab / n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescriptiveStats {
    pub n: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Sample standard deviation (divisor `n - 1`).
    pub sd: f64,
    /// Non-excess kurtosis; `None` when the series is constant.
    pub kurtosis: Option<f64>,
    pub skewness: Option<f64>,
}

pub fn descriptive_stats(x: &[f64]) -> Result<DescriptiveStats> {
    if x.is_empty() {
        return Err(Error::InvalidArgument("empty series".into()));
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let m2 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m3 = x.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
    let m4 = x.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    let sd = if x.len() > 1 {
        (m2 * n / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let (skewness, kurtosis) = if m2 > 0.0 {
        (Some(m3 / m2.powf(1.5)), Some(m4 / (m2 * m2)))
    } else {
        (None, None)
    };
    Ok(DescriptiveStats {
        n: x.len(),
        min: x.iter().copied().fold(f64::INFINITY, f64::min),
        max: x.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean,
        sd,
        kurtosis,
        skewness,
    })
}

/// Observations falling in `season` (`t mod nu == season`).
pub fn season_slice(x: &[f64], nu: usize, season: usize) -> Result<Vec<f64>> {
    if nu == 0 || season >= nu {
        return Err(Error::InvalidArgument(format!("season {season} out of range for nu = {nu}")));
    }
    Ok(x.iter().skip(season).step_by(nu).copied().collect())
}

fn spectral_norm(m: &[f64; 4]) -> f64 {
    let s = m.iter().map(|v| v * v).sum::<f64>();
    let det = m[0] * m[3] - m[1] * m[2];
    let disc = (s * s - 4.0 * det * det).max(0.0);
    (0.5 * (s + disc.sqrt())).sqrt()
}

fn matmul(a: &[f64; 4], b: &[f64; 4]) -> [f64; 4] {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

/// Per-cycle top Lyapunov exponent, averaged over `n_paths` simulated paths
/// of `n_steps` steps each.
pub fn lyapunov_estimate(spec: &ModelSpec, n_steps: usize, n_paths: usize, seed: u64) -> Result<f64> {
    check_lyapunov_args(spec, n_steps, n_paths)?;
    let per_path: Vec<f64> = (0..n_paths)
        .into_par_iter()
        .map(|p| {
            let inn = crate::model::InnovationSpec {
                seed: seed.wrapping_add((p as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
                ..*spec.innovation()
            };
            let s = spec.clone().with_innovation(inn)?;
            let mut src = ModelInnovations::new(&s)?;
            Ok(path_exponent(spec, n_steps, |t| src.draw(t)))
        })
        .collect::<Result<_>>()?;
    Ok(per_path.iter().sum::<f64>() / n_paths as f64)
}

/// As [`lyapunov_estimate`] with innovations supplied by `draw(path, t)`.
pub fn lyapunov_estimate_with<F>(spec: &ModelSpec, n_steps: usize, n_paths: usize, draw: F) -> Result<f64>
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    check_lyapunov_args(spec, n_steps, n_paths)?;
    let total: f64 = (0..n_paths)
        .into_par_iter()
        .map(|p| path_exponent(spec, n_steps, |t| draw(p, t)))
        .sum();
    Ok(total / n_paths as f64)
}

fn check_lyapunov_args(spec: &ModelSpec, n_steps: usize, n_paths: usize) -> Result<()> {
    if n_steps < 10 * spec.nu() {
        return Err(Error::InvalidArgument(format!(
            "n_steps must be at least 10 nu = {}",
            10 * spec.nu()
        )));
    }
    if n_paths == 0 {
        return Err(Error::InvalidArgument("n_paths must be >= 1".into()));
    }
    Ok(())
}

fn path_exponent<F: FnMut(usize) -> f64>(spec: &ModelSpec, n_steps: usize, mut draw: F) -> f64 {
    let nu = spec.nu();
    let [_, a, b] = spec.kind().recursion_families();
    let a = spec.param(a);
    let b = spec.param(b);
    let cycles = n_steps.div_ceil(nu);
    let mut prod = [1.0, 0.0, 0.0, 1.0];
    let mut log_norm = 0.0;
    for t in 0..cycles * nu {
        let e = draw(t);
        let w = match spec.kind() {
            ModelKind::Pgarch => e * e,
            ModelKind::Pacd => e,
        };
        let m = [a.at(t) * w, b.at(t) * w, a.at(t), b.at(t)];
        prod = matmul(&m, &prod);
        if (t + 1) % nu == 0 {
            let s = spectral_norm(&prod);
            if !(s > 0.0) {
                return f64::NEG_INFINITY;
            }
            log_norm += s.ln();
            for v in prod.iter_mut() {
                *v /= s;
            }
        }
    }
    log_norm / cycles as f64
}
