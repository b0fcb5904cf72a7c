//! Derivative-free minimization for the quasi-likelihood objectives.
//!
//! [`minimize`] is a Nelder–Mead simplex search in which every trial point is
//! projected onto the box constraints. [`global_search`] is a small real-coded
//! genetic algorithm used to find starting values when no good guess exists.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GlobalInit {
    pub enabled: bool,
    pub population: usize,
    pub generations: usize,
    pub seed: u64,
}

impl Default for GlobalInit {
    fn default() -> Self {
        Self {
            enabled: false,
            population: 100,
            generations: 50,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub max_iters: usize,
    /// Absolute spread of objective values across the simplex.
    pub tol_obj: f64,
    /// Largest coordinate distance between simplex vertices.
    pub tol_step: f64,
    /// Per-coordinate `[lo, hi]`; `None` means unbounded.
    pub bounds: Option<Vec<(f64, f64)>>,
    pub global_init: GlobalInit,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            tol_obj: 1e-10,
            tol_step: 1e-8,
            bounds: None,
            global_init: GlobalInit::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.tol_obj > 0.0 && self.tol_step > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be > 0".into()));
        }
        if let Some(b) = &self.bounds {
            if b.len() != dim {
                return Err(Error::InvalidArgument(format!(
                    "{} bounds supplied for a {dim}-dimensional problem",
                    b.len()
                )));
            }
            if let Some(i) = b.iter().position(|(lo, hi)| !(lo < hi)) {
                return Err(Error::InvalidArgument(format!("bound {i} has lo >= hi")));
            }
        }
        Ok(())
    }
}

/// Options shared by the PGARCH and PACD fits.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    /// `(z_{-1}, h_{-1})`; defaults to the model's conventional start.
    pub start: Option<(f64, f64)>,
    /// Starting parameter vector; a heuristic point is used when absent.
    pub x0: Option<Vec<f64>>,
    pub optimizer: OptimizerConfig,
    /// Run Fisher-scoring steps before the simplex polish.
    pub scoring: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            start: None,
            x0: None,
            optimizer: OptimizerConfig::default(),
            scoring: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub converged: bool,
    pub iterations: usize,
    pub evaluations: usize,
}

fn project(x: &mut [f64], bounds: Option<&[(f64, f64)]>) {
    if let Some(b) = bounds {
        for (xi, &(lo, hi)) in x.iter_mut().zip(b) {
            *xi = xi.clamp(lo, hi);
        }
    }
}

struct Counted<'a, F> {
    f: &'a F,
    evals: usize,
}

impl<F: Fn(&[f64]) -> f64> Counted<'_, F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        let v = (self.f)(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    }
}

/// Minimize `objective` from `x0` with a bound-projected Nelder–Mead search.
///
/// The returned point never has a larger objective than `x0` (after projection).
pub fn minimize<F>(objective: F, x0: &[f64], cfg: &OptimizerConfig) -> Result<Minimum>
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty starting point".into()));
    }
    cfg.validate(n)?;
    let bounds = cfg.bounds.as_deref();
    let mut start = x0.to_vec();
    project(&mut start, bounds);

    let mut obj = Counted { f: &objective, evals: 0 };
    let f0 = (objective)(&start);
    obj.evals += 1;
    if !f0.is_finite() {
        return Err(Error::NonFiniteStart);
    }

    let (rho, chi, gamma, sigma) = if n > 2 {
        let nf = n as f64;
        (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };

    let mut best_x = start;
    let mut best_f = f0;
    let mut iterations = 0;
    let mut converged = false;
    // Restarting from a fresh simplex guards against premature collapse.
    for _restart in 0..4 {
        let mut simplex = initial_simplex(&best_x, bounds);
        let mut values: Vec<f64> = Vec::with_capacity(n + 1);
        values.push(best_f);
        for v in simplex.iter().skip(1) {
            values.push(obj.eval(v));
        }
        let mut run_converged = false;
        while iterations < cfg.max_iters {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            let spread = values[n] - values[0];
            let diameter = simplex[1..]
                .iter()
                .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if spread <= cfg.tol_obj && diameter <= cfg.tol_step {
                run_converged = true;
                break;
            }
            iterations += 1;

            let mut centroid = vec![0.0; n];
            for v in &simplex[..n] {
                for (c, x) in centroid.iter_mut().zip(v) {
                    *c += x / n as f64;
                }
            }
            let along = |t: f64| -> Vec<f64> {
                let mut p: Vec<f64> = centroid
                    .iter()
                    .zip(&simplex[n])
                    .map(|(c, w)| c + t * (c - w))
                    .collect();
                project(&mut p, bounds);
                p
            };

            let xr = along(rho);
            let fr = obj.eval(&xr);
            if fr < values[0] {
                let xe = along(rho * chi);
                let fe = obj.eval(&xe);
                if fe < fr {
                    simplex[n] = xe;
                    values[n] = fe;
                } else {
                    simplex[n] = xr;
                    values[n] = fr;
                }
                continue;
            }
            if fr < values[n - 1] {
                simplex[n] = xr;
                values[n] = fr;
                continue;
            }
            let (xc, fc, accept) = if fr < values[n] {
                let xc = along(rho * gamma);
                let fc = obj.eval(&xc);
                let ok = fc <= fr;
                (xc, fc, ok)
            } else {
                let xc = along(-gamma);
                let fc = obj.eval(&xc);
                let ok = fc < values[n];
                (xc, fc, ok)
            };
            if accept {
                simplex[n] = xc;
                values[n] = fc;
                continue;
            }
            let anchor = simplex[0].clone();
            for i in 1..=n {
                let mut p: Vec<f64> = anchor
                    .iter()
                    .zip(&simplex[i])
                    .map(|(a, x)| a + sigma * (x - a))
                    .collect();
                project(&mut p, bounds);
                values[i] = obj.eval(&p);
                simplex[i] = p;
            }
        }
        let (ib, fb) = values
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("simplex is non-empty");
        let improvement = best_f - fb;
        if fb < best_f {
            best_f = fb;
            best_x = simplex[ib].clone();
        }
        converged = run_converged;
        if !run_converged || improvement <= cfg.tol_obj {
            break;
        }
    }

    Ok(Minimum {
        x: best_x,
        f: best_f,
        converged,
        iterations,
        evaluations: obj.evals,
    })
}

fn initial_simplex(x0: &[f64], bounds: Option<&[(f64, f64)]>) -> Vec<Vec<f64>> {
    let n = x0.len();
    let mut simplex = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        let mut step = if x0[i] != 0.0 { 0.05 * x0[i].abs() } else { 0.00025 };
        if let Some(b) = bounds {
            let (lo, hi) = b[i];
            if x0[i] + step > hi {
                step = -step;
            }
            if x0[i] + step < lo {
                step = (hi - lo) * 0.05;
                if x0[i] + step > hi {
                    step = lo - x0[i];
                }
            }
        }
        v[i] += step;
        project(&mut v, bounds);
        simplex.push(v);
    }
    simplex
}

/// Outcome of [`global_search`].
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalSearchResult {
    pub x: Vec<f64>,
    pub f: f64,
    /// Best objective after initialization and after each generation.
    pub history: Vec<f64>,
}

/// Real-coded genetic algorithm over a box: tournament selection, blend
/// crossover and Gaussian mutation with one elite carried over per generation.
/// Evaluations within a generation run in parallel.
pub fn global_search<F>(objective: F, bounds: &[(f64, f64)], cfg: &GlobalInit) -> Result<GlobalSearchResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    const TOURNAMENT: usize = 3;
    const CROSSOVER_RATE: f64 = 0.8;
    const BLEND: f64 = 0.5;
    const MUTATION_SD: f64 = 0.05;

    if cfg.population < 4 {
        return Err(Error::InvalidArgument("population must be at least 4".into()));
    }
    if bounds.is_empty() {
        return Err(Error::InvalidArgument("empty search box".into()));
    }
    if let Some(i) = bounds.iter().position(|(lo, hi)| !(lo < hi && lo.is_finite() && hi.is_finite())) {
        return Err(Error::InvalidArgument(format!("bound {i} is not a finite interval")));
    }
    let dim = bounds.len();
    let mutation_rate = (1.0 / dim as f64).max(0.1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let eval = |pop: &[Vec<f64>]| -> Vec<f64> {
        pop.par_iter()
            .map(|x| {
                let v = objective(x);
                if v.is_finite() {
                    v
                } else {
                    f64::INFINITY
                }
            })
            .collect()
    };

    let mut pop: Vec<Vec<f64>> = (0..cfg.population)
        .map(|_| bounds.iter().map(|&(lo, hi)| rng.random_range(lo..hi)).collect())
        .collect();
    let mut fit = eval(&pop);
    let best_of = |fit: &[f64]| {
        fit.iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
            .expect("population is non-empty")
    };
    let mut history = vec![fit[best_of(&fit)]];

    for _ in 0..cfg.generations {
        let elite = best_of(&fit);
        let mut next = Vec::with_capacity(cfg.population);
        next.push(pop[elite].clone());
        while next.len() < cfg.population {
            let mut pick = || {
                (0..TOURNAMENT)
                    .map(|_| rng.random_range(0..cfg.population))
                    .min_by(|&a, &b| fit[a].total_cmp(&fit[b]))
                    .expect("tournament is non-empty")
            };
            let (pa, pb) = (pick(), pick());
            let mut child: Vec<f64> = if rng.random::<f64>() < CROSSOVER_RATE {
                pop[pa]
                    .iter()
                    .zip(&pop[pb])
                    .map(|(&a, &b)| {
                        let (lo, hi) = (a.min(b), a.max(b));
                        let d = hi - lo;
                        lo - BLEND * d + rng.random::<f64>() * (1.0 + 2.0 * BLEND) * d
                    })
                    .collect()
            } else {
                pop[pa].clone()
            };
            for (x, &(lo, hi)) in child.iter_mut().zip(bounds) {
                if rng.random::<f64>() < mutation_rate {
                    let normal = Normal::new(0.0, MUTATION_SD * (hi - lo)).expect("positive sd");
                    *x += normal.sample(&mut rng);
                }
                *x = x.clamp(lo, hi);
            }
            next.push(child);
        }
        let elite_f = fit[elite];
        pop = next;
        fit = std::iter::once(elite_f).chain(eval(&pop[1..])).collect();
        history.push(fit[best_of(&fit)]);
    }

    let best = best_of(&fit);
    Ok(GlobalSearchResult {
        x: pop[best].clone(),
        f: fit[best],
        history,
    })
}
