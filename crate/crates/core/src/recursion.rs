//! The first-order periodic recursion shared by PGARCH and PACD.
//!
//! Both models filter a positive series `z` (squared returns or durations)
//! through
//!
//! ```text
//! h_t = a_k + b_k * z_{t-1} + c_k * h_{t-1},   k = t mod nu
//! ```
//!
//! and both quasi-likelihoods average `log h_t + z_t / h_t`. The parameter
//! vector is interleaved as `(a_0, b_0, c_0, a_1, ...)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::optimize::{self, OptimizerConfig};

pub(crate) const LOWER: f64 = 1e-8;
pub(crate) const UPPER: f64 = 1e3;

pub(crate) fn check_theta(theta: &[f64]) -> Result<usize> {
    if theta.is_empty() || !theta.len().is_multiple_of(3) {
        return Err(Error::InvalidArgument(format!(
            "parameter vector length {} is not a positive multiple of 3",
            theta.len()
        )));
    }
    for (i, &v) in theta.iter().enumerate() {
        let ok = v.is_finite() && if i % 3 == 0 { v > 0.0 } else { v >= 0.0 };
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "parameter {i} = {v} is outside the admissible region"
            )));
        }
    }
    Ok(theta.len() / 3)
}

/// Filtered path `h_0 .. h_{T-1}` given `(z_{-1}, h_{-1})`.
pub(crate) fn path(theta: &[f64], z: &[f64], start: (f64, f64)) -> Result<Vec<f64>> {
    let nu = check_theta(theta)?;
    let (mut z_prev, mut h_prev) = start;
    let mut out = Vec::with_capacity(z.len());
    for (t, &zt) in z.iter().enumerate() {
        let k = 3 * (t % nu);
        let h = theta[k] + theta[k + 1] * z_prev + theta[k + 2] * h_prev;
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Diverged { index: t });
        }
        out.push(h);
        z_prev = zt;
        h_prev = h;
    }
    Ok(out)
}

/// Mean quasi-likelihood contribution; `+inf` outside the admissible region.
pub(crate) fn objective(theta: &[f64], z: &[f64], start: (f64, f64)) -> f64 {
    let nu = theta.len() / 3;
    if nu == 0 || !theta.len().is_multiple_of(3) || z.is_empty() {
        return f64::INFINITY;
    }
    for (i, &v) in theta.iter().enumerate() {
        if !(v.is_finite() && if i % 3 == 0 { v > 0.0 } else { v >= 0.0 }) {
            return f64::INFINITY;
        }
    }
    let (mut z_prev, mut h_prev) = start;
    let mut acc = 0.0;
    for (t, &zt) in z.iter().enumerate() {
        let k = 3 * (t % nu);
        let h = theta[k] + theta[k + 1] * z_prev + theta[k + 2] * h_prev;
        if !(h.is_finite() && h > 0.0) {
            return f64::INFINITY;
        }
        acc += h.ln() + zt / h;
        z_prev = zt;
        h_prev = h;
    }
    acc / z.len() as f64
}

/// Walks the path together with `dh_t / dtheta`, calling `visit(t, h_t, grad_t)`.
///
/// `dh_t = e_t + c_k * dh_{t-1}` where `e_t` places `(1, z_{t-1}, h_{t-1})`
/// into the slots of season `k`; `dh_{-1} = 0`.
pub(crate) fn walk_gradient<F>(theta: &[f64], z: &[f64], start: (f64, f64), mut visit: F) -> Result<()>
where
    F: FnMut(usize, f64, &[f64]),
{
    let nu = check_theta(theta)?;
    let p = theta.len();
    let (mut z_prev, mut h_prev) = start;
    let mut grad = vec![0.0; p];
    for (t, &zt) in z.iter().enumerate() {
        let k = 3 * (t % nu);
        let c = theta[k + 2];
        let h = theta[k] + theta[k + 1] * z_prev + c * h_prev;
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Diverged { index: t });
        }
        for g in grad.iter_mut() {
            *g *= c;
        }
        grad[k] += 1.0;
        grad[k + 1] += z_prev;
        grad[k + 2] += h_prev;
        visit(t, h, &grad);
        z_prev = zt;
        h_prev = h;
    }
    Ok(())
}

/// Full Jacobian of the path, one row per observation.
pub(crate) fn path_jacobian(theta: &[f64], z: &[f64], start: (f64, f64)) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let p = theta.len();
    let mut h = Vec::with_capacity(z.len());
    let mut jac = DMatrix::zeros(z.len(), p);
    walk_gradient(theta, z, start, |t, ht, g| {
        h.push(ht);
        for (j, &gj) in g.iter().enumerate() {
            jac[(t, j)] = gj;
        }
    })?;
    Ok((h, jac))
}

/// `(1/n_cycles) * sum_t w_{t mod nu} * grad_t grad_t' / h_t^2`.
pub(crate) fn weighted_information(
    theta: &[f64],
    z: &[f64],
    start: (f64, f64),
    season_weights: &[f64],
    n_cycles: usize,
) -> Result<DMatrix<f64>> {
    let p = theta.len();
    let nu = p / 3;
    if season_weights.len() != nu {
        return Err(Error::InvalidArgument("one weight per season required".into()));
    }
    let mut acc = DMatrix::<f64>::zeros(p, p);
    walk_gradient(theta, z, start, |t, h, g| {
        let w = season_weights[t % nu] / (h * h);
        for i in 0..p {
            let gi = w * g[i];
            if gi == 0.0 {
                continue;
            }
            for j in i..p {
                acc[(i, j)] += gi * g[j];
            }
        }
    })?;
    for i in 0..p {
        for j in 0..i {
            acc[(i, j)] = acc[(j, i)];
        }
    }
    Ok(acc / n_cycles as f64)
}

/// Objective, its gradient and the expected-Hessian approximation, all on the
/// per-observation scale.
fn score(theta: &[f64], z: &[f64], start: (f64, f64)) -> Result<(f64, DVector<f64>, DMatrix<f64>)> {
    let p = theta.len();
    let mut obj = 0.0;
    let mut grad = DVector::<f64>::zeros(p);
    let mut info = DMatrix::<f64>::zeros(p, p);
    walk_gradient(theta, z, start, |t, h, g| {
        obj += h.ln() + z[t] / h;
        let s = (1.0 - z[t] / h) / h;
        let w = 1.0 / (h * h);
        for i in 0..p {
            if g[i] == 0.0 {
                continue;
            }
            grad[i] += s * g[i];
            let gi = w * g[i];
            for j in i..p {
                info[(i, j)] += gi * g[j];
            }
        }
    })?;
    let n = z.len() as f64;
    for i in 0..p {
        for j in 0..i {
            info[(i, j)] = info[(j, i)];
        }
    }
    Ok((obj / n, grad / n, info / n))
}

pub(crate) fn default_bounds(p: usize) -> Vec<(f64, f64)> {
    vec![(LOWER, UPPER); p]
}

/// Starting point when nothing better is known: 10% ARCH, 80% persistence,
/// intercept matching the sample level.
pub(crate) fn heuristic_start(z: &[f64], nu: usize) -> Vec<f64> {
    let level = z.iter().sum::<f64>() / z.len() as f64;
    (0..nu).flat_map(|_| [0.1 * level.max(LOWER), 0.1, 0.8]).collect()
}

/// Box used by the global search.
pub(crate) fn search_box(z: &[f64], nu: usize) -> Vec<(f64, f64)> {
    let level = z.iter().sum::<f64>() / z.len() as f64;
    (0..nu)
        .flat_map(|_| [(LOWER, (2.0 * level).max(10.0 * LOWER)), (0.0, 1.0), (0.0, 1.0)])
        .collect()
}

#[derive(Debug, Clone)]
pub(crate) struct Estimate {
    pub theta: Vec<f64>,
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Maps intercept coordinates to log scale for the simplex search.
fn to_search(theta: &[f64]) -> Vec<f64> {
    theta
        .iter()
        .enumerate()
        .map(|(i, &v)| if i % 3 == 0 { v.ln() } else { v })
        .collect()
}

fn from_search(x: &[f64]) -> Vec<f64> {
    x.iter()
        .enumerate()
        .map(|(i, &v)| if i % 3 == 0 { v.exp() } else { v })
        .collect()
}

fn clamp_into(theta: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, &(lo, hi)) in theta.iter_mut().zip(bounds) {
        *v = v.clamp(lo, hi);
    }
}

/// Quasi-likelihood minimization: optional global warm start, Fisher scoring
/// with projected backtracking, then a simplex polish.
pub(crate) fn estimate(
    z: &[f64],
    nu: usize,
    start: (f64, f64),
    x0: Option<&[f64]>,
    cfg: &OptimizerConfig,
    scoring: bool,
) -> Result<Estimate> {
    let p = 3 * nu;
    let bounds = cfg.bounds.clone().unwrap_or_else(|| default_bounds(p));
    let cfg = OptimizerConfig {
        bounds: Some(bounds.clone()),
        ..cfg.clone()
    };
    cfg.validate(p)?;

    let mut theta = match x0 {
        Some(x) if x.len() != p => {
            return Err(Error::InvalidArgument(format!(
                "starting vector has length {}, expected {p}",
                x.len()
            )))
        }
        Some(x) => x.to_vec(),
        None => heuristic_start(z, nu),
    };
    clamp_into(&mut theta, &bounds);
    let mut f = objective(&theta, z, start);

    if cfg.global_init.enabled {
        let mut sbox = search_box(z, nu);
        for (s, b) in sbox.iter_mut().zip(&bounds) {
            s.0 = s.0.max(b.0);
            s.1 = s.1.min(b.1).max(s.0 + 1e-9);
        }
        let ga = optimize::global_search(|x| objective(x, z, start), &sbox, &cfg.global_init)?;
        if ga.f < f || !f.is_finite() {
            theta = ga.x;
            f = ga.f;
        }
    }
    if !f.is_finite() {
        return Err(Error::NonFiniteStart);
    }

    let mut iterations = 0;
    let mut converged = false;
    if scoring {
        let max_scoring = 200.min(cfg.max_iters.max(1));
        while iterations < max_scoring {
            iterations += 1;
            let (obj, grad, info) = score(&theta, z, start)?;
            f = obj;
            let scale = info.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
            let mut step = None;
            for ridge in [0.0, 1e-10, 1e-8, 1e-6, 1e-4] {
                let m = &info + DMatrix::<f64>::identity(p, p) * (ridge * scale);
                if let Some(ch) = m.cholesky() {
                    step = Some(-ch.solve(&grad));
                    break;
                }
            }
            let Some(dir) = step else { break };
            let mut s = 1.0;
            let mut accepted = None;
            for _ in 0..40 {
                let mut cand: Vec<f64> = theta.iter().zip(dir.iter()).map(|(t, d)| t + s * d).collect();
                clamp_into(&mut cand, &bounds);
                let fc = objective(&cand, z, start);
                if fc < f {
                    accepted = Some((cand, fc));
                    break;
                }
                s *= 0.5;
            }
            let Some((cand, fc)) = accepted else {
                converged = true;
                break;
            };
            let dx = cand.iter().zip(&theta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let df = f - fc;
            theta = cand;
            f = fc;
            if df <= cfg.tol_obj && dx <= cfg.tol_step.max(1e-6) {
                converged = true;
                break;
            }
        }
    }

    let search_bounds: Vec<(f64, f64)> = bounds
        .iter()
        .enumerate()
        .map(|(i, &(lo, hi))| if i % 3 == 0 { (lo.max(LOWER).ln(), hi.ln()) } else { (lo, hi) })
        .collect();
    let nm_cfg = OptimizerConfig {
        bounds: Some(search_bounds),
        max_iters: cfg.max_iters,
        ..cfg.clone()
    };
    let polished = optimize::minimize(|x| objective(&from_search(x), z, start), &to_search(&theta), &nm_cfg)?;
    iterations += polished.iterations;
    if polished.f < f {
        let mut cand = from_search(&polished.x);
        clamp_into(&mut cand, &bounds);
        let fc = objective(&cand, z, start);
        if fc <= f {
            theta = cand;
            f = fc;
        }
    }
    converged = converged || polished.converged;

    Ok(Estimate {
        theta,
        objective: f,
        converged,
        iterations,
    })
}

/// Stride-3 sub-block `offset, offset+3, ...` of a `3nu x 3nu` matrix.
pub(crate) fn stride_block(m: &DMatrix<f64>, offset: usize) -> DMatrix<f64> {
    let nu = m.nrows() / 3;
    DMatrix::from_fn(nu, nu, |i, j| m[(3 * i + offset, 3 * j + offset)])
}

pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

pub(crate) fn invert_spd(m: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let ch = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::CovarianceUnavailable(format!("{what} is singular or not positive definite")))?;
    let mut inv = ch.inverse();
    symmetrize(&mut inv);
    if inv.iter().any(|v| !v.is_finite()) {
        return Err(Error::CovarianceUnavailable(format!("{what} inverse is not finite")));
    }
    Ok(inv)
}
