//! Periodic ACD(1,1): simulation, exponential QML estimation, innovation
//! variance and sandwich covariance, forecasting.
//!
//! ```text
//! u_t = psi_t xi_t,   psi_t = lambda_k + gamma_k u_{t-1} + delta_k psi_{t-1}
//! ```

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::innovations::ModelInnovations;
use crate::model::{self, Family, FitResult, InnovationSpec, ModelKind, ModelSpec, PeriodicVector};
use crate::optimize::FitOptions;
use crate::pgarch::family_blocks;
use crate::recursion;

pub use crate::innovations::{sample_gamma_unit_mean, GammaUnitMeanSampler};

#[derive(Debug, Clone, PartialEq)]
pub struct DurationPath {
    pub psi: Vec<f64>,
    pub u: Vec<f64>,
    /// `(u_{-1}, psi_{-1})` for the returned segment.
    pub start: (f64, f64),
}

fn require_pacd(spec: &ModelSpec) -> Result<()> {
    if spec.kind() != ModelKind::Pacd {
        return Err(Error::InvalidArgument(format!("expected a PACD model, got {}", spec.kind())));
    }
    Ok(())
}

pub fn simulate(spec: &ModelSpec, n_total: usize, burn_in: usize, start: (f64, f64)) -> Result<DurationPath> {
    require_pacd(spec)?;
    let mut src = ModelInnovations::new(spec)?;
    simulate_with(spec, n_total, burn_in, start, |t| src.draw(t))
}

/// As [`simulate`] with innovations supplied by `xi(t)`.
pub fn simulate_with<F>(
    spec: &ModelSpec,
    n_total: usize,
    burn_in: usize,
    start: (f64, f64),
    mut xi: F,
) -> Result<DurationPath>
where
    F: FnMut(usize) -> f64,
{
    require_pacd(spec)?;
    let nu = spec.nu();
    if n_total <= burn_in {
        return Err(Error::InvalidArgument(format!(
            "n_total ({n_total}) must exceed burn_in ({burn_in})"
        )));
    }
    if !burn_in.is_multiple_of(nu) {
        return Err(Error::InvalidArgument(format!(
            "burn_in ({burn_in}) must be a multiple of nu ({nu}) to keep the season phase"
        )));
    }
    if !(start.0.is_finite() && start.0 >= 0.0 && start.1.is_finite() && start.1 > 0.0) {
        return Err(Error::InvalidArgument("start values must be finite with psi_init > 0".into()));
    }
    let lambda = spec.param(Family::Lambda);
    let gamma = spec.param(Family::Gamma);
    let delta = spec.param(Family::Delta);

    let keep = n_total - burn_in;
    let mut psi = Vec::with_capacity(keep);
    let mut u = Vec::with_capacity(keep);
    let (mut u_prev, mut p_prev) = start;
    let mut seg_start = start;
    for t in 0..n_total {
        if t == burn_in {
            seg_start = (u_prev, p_prev);
        }
        let p = lambda.at(t) + gamma.at(t) * u_prev + delta.at(t) * p_prev;
        let ut = p * xi(t);
        if !(p.is_finite() && p > 0.0 && ut.is_finite()) {
            return Err(Error::Diverged { index: t });
        }
        if t >= burn_in {
            psi.push(p);
            u.push(ut);
        }
        u_prev = ut;
        p_prev = p;
    }
    Ok(DurationPath { psi, u, start: seg_start })
}

pub fn duration_path(eta: &[f64], u: &[f64], start: (f64, f64)) -> Result<Vec<f64>> {
    if u.is_empty() {
        return Err(Error::InvalidArgument("empty series".into()));
    }
    recursion::path(eta, u, start)
}

/// `dpsi_t / deta`, one row per observation.
pub fn duration_gradient(eta: &[f64], u: &[f64], start: (f64, f64)) -> Result<DMatrix<f64>> {
    Ok(recursion::path_jacobian(eta, u, start)?.1)
}

/// Mean of `log psi_t + u_t / psi_t`.
pub fn eqmle_objective(eta: &[f64], u: &[f64], start: (f64, f64)) -> Result<f64> {
    let psi = duration_path(eta, u, start)?;
    Ok(psi.iter().zip(u).map(|(p, u)| p.ln() + u / p).sum::<f64>() / u.len() as f64)
}

/// `(u_{nu-1}, u_{nu-1})`.
pub fn default_start(u: &[f64], nu: usize) -> Result<(f64, f64)> {
    if nu == 0 || u.len() < nu {
        return Err(Error::InvalidArgument("series shorter than one cycle".into()));
    }
    let v = u[nu - 1];
    if v > 0.0 {
        Ok((v, v))
    } else {
        let level = u.iter().sum::<f64>() / u.len() as f64;
        Ok((v, level.max(recursion::LOWER)))
    }
}

fn check_series(u: &[f64], nu: usize) -> Result<usize> {
    if nu == 0 {
        return Err(Error::InvalidArgument("nu must be positive".into()));
    }
    if u.is_empty() || !u.len().is_multiple_of(nu) {
        return Err(Error::InvalidArgument(format!(
            "series length {} is not a positive multiple of nu = {nu}",
            u.len()
        )));
    }
    if let Some(i) = u.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidArgument(format!("duration {i} is negative or not finite")));
    }
    Ok(u.len() / nu)
}

/// `sigma_k^2 = (1/N) sum_n ((u - psi) / psi)^2` per season.
pub fn estimate_sigma_sq(u: &[f64], psi_hat: &[f64], nu: usize) -> Result<Vec<f64>> {
    if u.len() != psi_hat.len() {
        return Err(Error::InvalidArgument("u and psi have different lengths".into()));
    }
    let n = check_season_len(u.len(), nu)?;
    let mut out = vec![0.0; nu];
    for (t, (u, p)) in u.iter().zip(psi_hat).enumerate() {
        out[t % nu] += ((u - p) / p).powi(2);
    }
    Ok(out.into_iter().map(|s| s / n as f64).collect())
}

/// `Lambda_k = (1/N) sum_n ((xi - 1)^2 - sigma_k^2)^2` per season.
pub fn estimate_lambda_diag(xi: &[f64], sigma_sq: &[f64], nu: usize) -> Result<Vec<f64>> {
    if sigma_sq.len() != nu {
        return Err(Error::InvalidArgument("one sigma^2 per season required".into()));
    }
    let n = check_season_len(xi.len(), nu)?;
    let mut out = vec![0.0; nu];
    for (t, x) in xi.iter().enumerate() {
        let k = t % nu;
        out[k] += ((x - 1.0).powi(2) - sigma_sq[k]).powi(2);
    }
    Ok(out.into_iter().map(|s| s / n as f64).collect())
}

fn check_season_len(len: usize, nu: usize) -> Result<usize> {
    if nu == 0 || len == 0 || !len.is_multiple_of(nu) {
        return Err(Error::InvalidArgument(format!(
            "length {len} is not a positive multiple of nu = {nu}"
        )));
    }
    Ok(len / nu)
}

#[derive(Debug, Clone)]
pub struct PacdCovariance {
    pub g_hat: DMatrix<f64>,
    pub k_hat: DMatrix<f64>,
    /// `G^-1 K G^-1` in interleaved order.
    pub xi: DMatrix<f64>,
    pub blocks: BTreeMap<Family, DMatrix<f64>>,
}

/// Sandwich covariance `G^-1 K G^-1` of the recursion parameters.
pub fn asymptotic_covariance(eta: &[f64], u: &[f64], start: (f64, f64), sigma_sq: &[f64]) -> Result<PacdCovariance> {
    let nu = recursion::check_theta(eta)?;
    let n_cycles = check_series(u, nu)?;
    if sigma_sq.len() != nu {
        return Err(Error::InvalidArgument("one sigma^2 per season required".into()));
    }
    let g_hat = recursion::weighted_information(eta, u, start, &vec![1.0; nu], n_cycles)?;
    let k_hat = recursion::weighted_information(eta, u, start, sigma_sq, n_cycles)?;
    let g_inv = recursion::invert_spd(&g_hat, "G")?;
    let mut xi = &g_inv * &k_hat * &g_inv;
    recursion::symmetrize(&mut xi);
    Ok(PacdCovariance {
        blocks: family_blocks(&xi, ModelKind::Pacd),
        g_hat,
        k_hat,
        xi,
    })
}

/// EQML fit; `SigmaSq` is estimated from the residuals afterwards and its
/// covariance block is `diag(Lambda_k)`.
pub fn fit(u: &[f64], nu: usize, options: &FitOptions) -> Result<FitResult> {
    let n_cycles = check_series(u, nu)?;
    if u.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateData("all durations are zero".into()));
    }
    let start = match options.start {
        Some(s) => s,
        None => default_start(u, nu)?,
    };
    let est = recursion::estimate(u, nu, start, options.x0.as_deref(), &options.optimizer, options.scoring)?;
    let psi = duration_path(&est.theta, u, start)?;
    let residuals: Vec<f64> = u.iter().zip(&psi).map(|(u, p)| u / p).collect();
    let sigma_sq = estimate_sigma_sq(u, &psi, nu)?;
    if let Some(k) = sigma_sq.iter().position(|&s| !(s > 0.0)) {
        return Err(Error::DegenerateData(format!("innovation variance of season {k} is zero")));
    }
    let lambda = estimate_lambda_diag(&residuals, &sigma_sq, nu)?;
    let cov = asymptotic_covariance(&est.theta, u, start, &sigma_sq)?;
    let mut blocks = cov.blocks;
    blocks.insert(Family::SigmaSq, DMatrix::from_diagonal(&nalgebra::DVector::from_vec(lambda)));
    let spec = model::unflatten(
        ModelKind::Pacd,
        &est.theta,
        Some(PeriodicVector::new(Family::SigmaSq, sigma_sq)?),
        InnovationSpec::gamma_unit_mean(0),
    )?;
    Ok(FitResult {
        spec,
        cov: blocks,
        objective: est.objective,
        residuals,
        fourth_moment: None,
        n_cycles,
        converged: est.converged,
        iterations: est.iterations,
    })
}

pub fn forecast(spec: &ModelSpec, last: (f64, f64), horizon: usize) -> Result<Vec<f64>> {
    forecast_from(spec, 0, last, horizon)
}

/// Forecasts `psi(1..=horizon)` where `psi(1)` falls in season `next_season`.
pub fn forecast_from(spec: &ModelSpec, next_season: usize, last: (f64, f64), horizon: usize) -> Result<Vec<f64>> {
    require_pacd(spec)?;
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be >= 1".into()));
    }
    if !(last.1.is_finite() && last.1 > 0.0) {
        return Err(Error::InvalidArgument("psi_last must be > 0".into()));
    }
    let l = spec.param(Family::Lambda);
    let g = spec.param(Family::Gamma);
    let d = spec.param(Family::Delta);
    let k = next_season;
    let mut p = l.at(k) + g.at(k) * last.0 + d.at(k) * last.1;
    let mut out = vec![p];
    for step in 1..horizon {
        let k = next_season + step;
        p = l.at(k) + (g.at(k) + d.at(k)) * p;
        out.push(p);
    }
    Ok(out)
}
