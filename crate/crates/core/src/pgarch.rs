//! Periodic GARCH(1,1): simulation, Gaussian QML estimation, asymptotic
//! covariance and forecasting.
//!
//! ```text
//! y_t = sqrt(h_t) eps_t,   h_t = omega_k + alpha_k y_{t-1}^2 + beta_k h_{t-1}
//! ```

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::innovations::ModelInnovations;
use crate::model::{self, Family, FitResult, InnovationSpec, ModelKind, ModelSpec};
use crate::optimize::FitOptions;
use crate::recursion;

pub use crate::innovations::{sample_ged, GedSampler};

#[derive(Debug, Clone, PartialEq)]
pub struct VariancePath {
    pub h: Vec<f64>,
    pub y: Vec<f64>,
    /// `(y_{-1}, h_{-1})` for the returned segment.
    pub start: (f64, f64),
}

fn check_simulation_args(nu: usize, n_total: usize, burn_in: usize, start: (f64, f64)) -> Result<()> {
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
    if !(start.0.is_finite() && start.1.is_finite() && start.1 > 0.0) {
        return Err(Error::InvalidArgument("start values must be finite with h_init > 0".into()));
    }
    Ok(())
}

fn require(spec: &ModelSpec, kind: ModelKind) -> Result<()> {
    if spec.kind() != kind {
        return Err(Error::InvalidArgument(format!("expected a {kind} model, got {}", spec.kind())));
    }
    Ok(())
}

/// Simulates `n_total` observations and drops the first `burn_in`.
pub fn simulate(spec: &ModelSpec, n_total: usize, burn_in: usize, start: (f64, f64)) -> Result<VariancePath> {
    require(spec, ModelKind::Pgarch)?;
    let mut src = ModelInnovations::new(spec)?;
    simulate_with(spec, n_total, burn_in, start, |t| src.draw(t))
}

/// As [`simulate`] with innovations supplied by `eps(t)`.
pub fn simulate_with<F>(
    spec: &ModelSpec,
    n_total: usize,
    burn_in: usize,
    start: (f64, f64),
    mut eps: F,
) -> Result<VariancePath>
where
    F: FnMut(usize) -> f64,
{
    require(spec, ModelKind::Pgarch)?;
    let nu = spec.nu();
    check_simulation_args(nu, n_total, burn_in, start)?;
    let omega = spec.param(Family::Omega);
    let alpha = spec.param(Family::Alpha);
    let beta = spec.param(Family::Beta);

    let keep = n_total - burn_in;
    let mut h = Vec::with_capacity(keep);
    let mut y = Vec::with_capacity(keep);
    let (mut y_prev, mut h_prev) = start;
    let mut seg_start = start;
    for t in 0..n_total {
        if t == burn_in {
            seg_start = (y_prev, h_prev);
        }
        let ht = omega.at(t) + alpha.at(t) * y_prev * y_prev + beta.at(t) * h_prev;
        if !(ht.is_finite() && ht > 0.0) {
            return Err(Error::Diverged { index: t });
        }
        let yt = ht.sqrt() * eps(t);
        if !yt.is_finite() {
            return Err(Error::Diverged { index: t });
        }
        if t >= burn_in {
            h.push(ht);
            y.push(yt);
        }
        y_prev = yt;
        h_prev = ht;
    }
    Ok(VariancePath { h, y, start: seg_start })
}

fn squares(y: &[f64]) -> Vec<f64> {
    y.iter().map(|v| v * v).collect()
}

fn start_z(start: (f64, f64)) -> (f64, f64) {
    (start.0 * start.0, start.1)
}

/// `h_t(theta)` for `t = 0 .. len(y) - 1`.
pub fn variance_path(theta: &[f64], y: &[f64], start: (f64, f64)) -> Result<Vec<f64>> {
    if y.is_empty() {
        return Err(Error::InvalidArgument("empty series".into()));
    }
    recursion::path(theta, &squares(y), start_z(start))
}

/// `dh_t / dtheta`, one row per observation.
pub fn variance_gradient(theta: &[f64], y: &[f64], start: (f64, f64)) -> Result<DMatrix<f64>> {
    Ok(recursion::path_jacobian(theta, &squares(y), start_z(start))?.1)
}

/// Mean of `log h_t + y_t^2 / h_t`.
pub fn qmle_objective(theta: &[f64], y: &[f64], start: (f64, f64)) -> Result<f64> {
    let h = variance_path(theta, y, start)?;
    Ok(h.iter().zip(y).map(|(h, y)| h.ln() + y * y / h).sum::<f64>() / y.len() as f64)
}

/// `(y_{nu-1}, y_{nu-1}^2)`.
pub fn default_start(y: &[f64], nu: usize) -> Result<(f64, f64)> {
    if nu == 0 || y.len() < nu {
        return Err(Error::InvalidArgument("series shorter than one cycle".into()));
    }
    let v = y[nu - 1];
    if v == 0.0 {
        let level = y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64;
        return Ok((v, level.max(recursion::LOWER)));
    }
    Ok((v, v * v))
}

fn check_series(y: &[f64], nu: usize) -> Result<usize> {
    if nu == 0 {
        return Err(Error::InvalidArgument("nu must be positive".into()));
    }
    if y.is_empty() || !y.len().is_multiple_of(nu) {
        return Err(Error::InvalidArgument(format!(
            "series length {} is not a positive multiple of nu = {nu}",
            y.len()
        )));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("observation {i} is not finite")));
    }
    Ok(y.len() / nu)
}

/// QML fit with covariance and standardized residuals.
pub fn fit(y: &[f64], nu: usize, options: &FitOptions) -> Result<FitResult> {
    let n_cycles = check_series(y, nu)?;
    if y.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateData("all returns are zero".into()));
    }
    let start = match options.start {
        Some(s) => s,
        None => default_start(y, nu)?,
    };
    let z = squares(y);
    let est = recursion::estimate(
        &z,
        nu,
        start_z(start),
        options.x0.as_deref(),
        &options.optimizer,
        options.scoring,
    )?;
    let cov = asymptotic_covariance(&est.theta, y, start)?;
    let h = variance_path(&est.theta, y, start)?;
    let residuals = y.iter().zip(&h).map(|(y, h)| y / h.sqrt()).collect();
    let spec = model::unflatten(ModelKind::Pgarch, &est.theta, None, InnovationSpec::std_normal(0))?;
    Ok(FitResult {
        spec,
        cov: cov.blocks,
        objective: est.objective,
        residuals,
        fourth_moment: Some(cov.fourth_moment),
        n_cycles,
        converged: est.converged,
        iterations: est.iterations,
    })
}

#[derive(Debug, Clone)]
pub struct PgarchCovariance {
    /// Full `3nu x 3nu` estimate in interleaved order.
    pub sigma: DMatrix<f64>,
    pub d_hat: DMatrix<f64>,
    pub blocks: BTreeMap<Family, DMatrix<f64>>,
    pub fourth_moment: f64,
}

/// `Sigma = (m4 - 1) D^-1` with `D = (1/N) sum grad h grad h' / h^2`.
pub fn asymptotic_covariance(theta: &[f64], y: &[f64], start: (f64, f64)) -> Result<PgarchCovariance> {
    let nu = recursion::check_theta(theta)?;
    let n_cycles = check_series(y, nu)?;
    let h = variance_path(theta, y, start)?;
    let m4 = y.iter().zip(&h).map(|(y, h)| (y * y / h).powi(2)).sum::<f64>() / y.len() as f64;
    let d_hat = recursion::weighted_information(theta, &squares(y), start_z(start), &vec![1.0; nu], n_cycles)?;
    let mut sigma = recursion::invert_spd(&d_hat, "D")? * (m4 - 1.0);
    recursion::symmetrize(&mut sigma);
    Ok(PgarchCovariance {
        blocks: family_blocks(&sigma, ModelKind::Pgarch),
        sigma,
        d_hat,
        fourth_moment: m4,
    })
}

/// Splits an interleaved `3nu x 3nu` matrix into per-family `nu x nu` blocks.
pub fn family_blocks(m: &DMatrix<f64>, kind: ModelKind) -> BTreeMap<Family, DMatrix<f64>> {
    kind.recursion_families()
        .iter()
        .enumerate()
        .map(|(j, &f)| (f, recursion::stride_block(m, j)))
        .collect()
}

/// Multi-step variance forecasts when the sample ends a full cycle.
pub fn forecast(spec: &ModelSpec, last: (f64, f64), horizon: usize) -> Result<Vec<f64>> {
    forecast_from(spec, 0, last, horizon)
}

/// Forecasts `h(1..=horizon)` where `h(1)` falls in season `next_season`.
pub fn forecast_from(spec: &ModelSpec, next_season: usize, last: (f64, f64), horizon: usize) -> Result<Vec<f64>> {
    require(spec, ModelKind::Pgarch)?;
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be >= 1".into()));
    }
    if !(last.1.is_finite() && last.1 > 0.0) {
        return Err(Error::InvalidArgument("h_last must be > 0".into()));
    }
    let w = spec.param(Family::Omega);
    let a = spec.param(Family::Alpha);
    let b = spec.param(Family::Beta);
    let mut out = Vec::with_capacity(horizon);
    let k = next_season;
    let mut h = w.at(k) + a.at(k) * last.0 * last.0 + b.at(k) * last.1;
    out.push(h);
    for l in 1..horizon {
        let k = next_season + l;
        h = w.at(k) + (a.at(k) + b.at(k)) * h;
        out.push(h);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::InnovationLaw;
    use std::f64::consts::PI;

    fn spec1(w: f64, a: f64, b: f64) -> ModelSpec {
        ModelSpec::pgarch(vec![w], vec![a], vec![b], InnovationSpec::std_normal(1)).unwrap()
    }

    #[test]
    fn constant_recursion() {
        let p = simulate(&spec1(0.7, 0.0, 0.0), 50, 0, (1.0, 1.0)).unwrap();
        assert!(p.h.iter().all(|&h| h == 0.7));
    }

    #[test]
    fn forced_unit_innovations_hit_fixed_point() {
        let p = simulate_with(&spec1(0.5, 0.2, 0.3), 20, 0, (1.0, 1.0), |_| 1.0).unwrap();
        assert!(p.h.iter().all(|&h| (h - 1.0).abs() < 1e-15));
        assert!(p.y.iter().all(|&y| (y - 1.0).abs() < 1e-15));
    }

    #[test]
    fn burn_in_must_respect_phase() {
        let s = ModelSpec::pgarch(vec![1.0; 3], vec![0.1; 3], vec![0.1; 3], InnovationSpec::std_normal(1)).unwrap();
        assert!(simulate(&s, 100, 4, (0.0, 1.0)).is_err());
        let p = simulate(&s, 100, 6, (0.0, 1.0)).unwrap();
        assert_eq!(p.h.len(), 94);
    }

    #[test]
    fn segment_start_is_last_burnt_point() {
        let s = spec1(0.5, 0.2, 0.3);
        let full = simulate(&s, 30, 0, (1.0, 1.0)).unwrap();
        let cut = simulate(&s, 30, 10, (1.0, 1.0)).unwrap();
        assert_eq!(cut.start, (full.y[9], full.h[9]));
        assert_eq!(&full.h[10..], &cut.h[..]);
    }

    #[test]
    fn explosive_parameters_diverge() {
        let s = spec1(1.0, 0.0, 1e3);
        assert!(matches!(simulate(&s, 500, 0, (1.0, 1.0)), Err(Error::Diverged { .. })));
    }

    #[test]
    fn sim41_season_variance_positive() {
        let s = |c: f64, a: f64| (0..7).map(|t| c + a * (2.0 * PI * t as f64 / 7.0).sin()).collect();
        let spec = ModelSpec::pgarch(
            s(0.7, 0.45),
            s(0.6, 0.15),
            s(0.35, 0.2),
            InnovationSpec::new(InnovationLaw::Ged { shape: 1.8 }, 5).unwrap(),
        )
        .unwrap();
        let p = simulate(&spec, 100_002, 0, (0.0, 1.0)).unwrap();
        for k in 0..7 {
            let hs: Vec<f64> = p.h.iter().skip(k).step_by(7).copied().collect();
            let m = hs.iter().sum::<f64>() / hs.len() as f64;
            let v = hs.iter().map(|h| (h - m).powi(2)).sum::<f64>() / hs.len() as f64;
            assert!(v.is_finite() && v > 0.0);
        }
    }

    #[test]
    fn variance_path_by_hand() {
        assert_eq!(variance_path(&[0.5, 0.0, 0.0], &[3.0, -2.0, 9.0], (4.0, 7.0)).unwrap(), vec![0.5; 3]);
        let h = variance_path(&[0.5, 0.2, 0.3], &[1.0, 2.0, 0.0], (1.0, 1.0)).unwrap();
        assert!((h[0] - 1.0).abs() < 1e-15 && (h[1] - 1.0).abs() < 1e-15);
        assert!((h[2] - 1.6).abs() < 1e-15);
    }

    #[test]
    fn objective_by_hand() {
        assert!((qmle_objective(&[1.0, 0.0, 0.0], &[1.0], (0.0, 1.0)).unwrap() - 1.0).abs() < 1e-15);
        let f = qmle_objective(&[0.5, 0.2, 0.3], &[1.0, 2.0], (1.0, 1.0)).unwrap();
        assert!((f - 2.5).abs() < 1e-14);
    }

    #[test]
    fn objective_is_invariant_to_season_relabeling() {
        let y = [0.3, -1.2, 0.8, 0.1, -0.5, 2.0, 0.7, -0.9];
        let theta = [0.2, 0.1, 0.5, 0.6, 0.3, 0.2];
        let f = qmle_objective(&theta, &y, (0.4, 1.0)).unwrap();
        // seasons swapped: the series now starts one step later in the cycle.
        let swapped = [0.6, 0.3, 0.2, 0.2, 0.1, 0.5];
        let h0 = variance_path(&theta, &y[..1], (0.4, 1.0)).unwrap()[0];
        let tail = &y[1..];
        let g = qmle_objective(&swapped, tail, (y[0], h0)).unwrap();
        let total = (f * 8.0 - (h0.ln() + y[0] * y[0] / h0)) / 7.0;
        assert!((g - total).abs() < 1e-14);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let theta = [0.4, 0.15, 0.6, 0.8, 0.05, 0.3, 0.2, 0.3, 0.5];
        let y: Vec<f64> = (0..50).map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0).collect();
        let g = variance_gradient(&theta, &y, (0.5, 1.0)).unwrap();
        for j in 0..9 {
            let e = 1e-6 * theta[j];
            let mut a = theta;
            let mut b = theta;
            a[j] += e;
            b[j] -= e;
            let ha = variance_path(&a, &y, (0.5, 1.0)).unwrap();
            let hb = variance_path(&b, &y, (0.5, 1.0)).unwrap();
            for t in 0..50 {
                let fd = (ha[t] - hb[t]) / (2.0 * e);
                let scale = g[(t, j)].abs().max(1e-8);
                assert!((fd - g[(t, j)]).abs() / scale < 1e-6 || (fd - g[(t, j)]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn block_extraction_pattern() {
        let m = DMatrix::from_fn(6, 6, |i, j| (10 * i + j) as f64);
        let b = family_blocks(&m, ModelKind::Pgarch);
        assert_eq!(b[&Family::Omega], DMatrix::from_row_slice(2, 2, &[0.0, 3.0, 30.0, 33.0]));
        assert_eq!(b[&Family::Alpha], DMatrix::from_row_slice(2, 2, &[11.0, 14.0, 41.0, 44.0]));
    }

    #[test]
    fn forecast_examples() {
        let f = forecast(&spec1(0.5, 0.2, 0.3), (1.0, 1.0), 3).unwrap();
        assert_eq!(f, vec![1.0, 1.0, 1.0]);
        let f = forecast(&spec1(0.5, 0.2, 0.3), (3.0, 2.0), 500).unwrap();
        assert!((f[499] - 1.0).abs() < 1e-8);
        let s = ModelSpec::pgarch(vec![1.0, 2.0], vec![0.0; 2], vec![0.0; 2], InnovationSpec::std_normal(0)).unwrap();
        assert_eq!(forecast(&s, (5.0, 5.0), 4).unwrap(), vec![1.0, 2.0, 1.0, 2.0]);
    }

    #[test]
    fn forecast_seasons_match_brute_force() {
        let s = ModelSpec::pgarch(vec![0.3, 0.9], vec![0.2, 0.1], vec![0.5, 0.3], InnovationSpec::std_normal(0)).unwrap();
        let theta = model::flatten(&s);
        let y = [0.5, -1.0, 0.7, 0.2];
        let h = variance_path(&theta, &y, (0.1, 1.0)).unwrap();
        let f = forecast(&s, (y[3], h[3]), 1).unwrap();
        let brute = variance_path(&theta, &[0.5, -1.0, 0.7, 0.2, 0.0], (0.1, 1.0)).unwrap();
        assert!((f[0] - brute[4]).abs() < 1e-15);
    }

    #[test]
    fn zero_series_is_degenerate() {
        assert!(matches!(fit(&[0.0; 20], 2, &FitOptions::default()), Err(Error::DegenerateData(_))));
    }

    #[test]
    fn fit_improves_on_start() {
        let s = spec1(0.5, 0.2, 0.3);
        let p = simulate(&s, 3000, 0, (0.0, 1.0)).unwrap();
        let x0 = vec![1.0, 0.05, 0.05];
        let f0 = qmle_objective(&x0, &p.y, default_start(&p.y, 1).unwrap()).unwrap();
        let fit = fit(
            &p.y,
            1,
            &FitOptions {
                x0: Some(x0),
                ..FitOptions::default()
            },
        )
        .unwrap();
        assert!(fit.objective <= f0);
        fit.validate().unwrap();
        assert_eq!(fit.residuals.len(), 3000);
        let th = model::flatten(&fit.spec);
        assert!((th[1] - 0.2).abs() < 0.1 && (th[2] - 0.3).abs() < 0.25, "{th:?}");
    }
}
