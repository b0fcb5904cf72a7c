//! Monte-Carlo replication of the four simulation designs: simulate, fit from
//! the true values, reduce, and compare holdout forecasts.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::diagnostics::forecast_errors;
use crate::error::{Error, Result};
use crate::model::{self, Family, FitResult, InnovationLaw, InnovationSpec, ModelKind, ModelSpec};
use crate::optimize::FitOptions;
use crate::significance::Reduction;
use crate::wavelet::{self, WaveletFamily};
use crate::{harmonic, pacd, pgarch};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Study {
    FourierPgarch,
    FourierPacd,
    WaveletPgarch,
    WaveletPacd,
}

impl Study {
    pub const ALL: [Study; 4] = [
        Study::FourierPgarch,
        Study::FourierPacd,
        Study::WaveletPgarch,
        Study::WaveletPacd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Study::FourierPgarch => "fourier-pgarch",
            Study::FourierPacd => "fourier-pacd",
            Study::WaveletPgarch => "wavelet-pgarch",
            Study::WaveletPacd => "wavelet-pacd",
        }
    }
}

impl fmt::Display for Study {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Study {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Study::ALL
            .into_iter()
            .find(|st| st.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown study `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionMethod {
    Fourier,
    Wavelet(WaveletFamily),
}

impl ReductionMethod {
    pub fn reduce(self, fit: &FitResult, alpha: f64) -> Result<Reduction> {
        match self {
            ReductionMethod::Fourier => harmonic::reduce_model(fit, alpha),
            ReductionMethod::Wavelet(w) => wavelet::reduce_model(fit, w, alpha),
        }
    }

    /// Coefficient vector of `x` in this representation.
    pub fn coefficients(self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            ReductionMethod::Fourier => harmonic::analyze(x),
            ReductionMethod::Wavelet(w) => {
                let m = wavelet::extended_length(x.len());
                let xe: Vec<f64> = (0..m).map(|i| x[i % x.len()]).collect();
                wavelet::dwt(&xe, w)
            }
        }
    }
}

impl fmt::Display for ReductionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReductionMethod::Fourier => f.write_str("fourier"),
            ReductionMethod::Wavelet(w) => write!(f, "wavelet:{w}"),
        }
    }
}

impl FromStr for ReductionMethod {
    type Err = Error;

    /// `fourier` or `wavelet:<family>`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("fourier") {
            return Ok(ReductionMethod::Fourier);
        }
        match t.split_once(':') {
            Some((w, fam)) if w.eq_ignore_ascii_case("wavelet") => Ok(ReductionMethod::Wavelet(fam.parse()?)),
            _ => Err(Error::InvalidArgument(format!(
                "unknown reduction `{s}`; expected `fourier` or `wavelet:<family>`"
            ))),
        }
    }
}

/// A complete simulation design.
#[derive(Debug, Clone)]
pub struct StudyDesign {
    pub study: Study,
    pub spec: ModelSpec,
    pub method: ReductionMethod,
    pub n_total: usize,
    pub burn_in: usize,
    pub n_cycles: usize,
    pub holdout: usize,
    pub alpha: f64,
    /// True transform coefficients per family.
    pub truth: BTreeMap<Family, Vec<f64>>,
}

fn harmonic_truth(nu: usize, level: f64, amp: f64, sine: bool) -> Vec<f64> {
    (0..nu)
        .map(|t| {
            let w = 2.0 * PI * t as f64 / nu as f64;
            level + amp * if sine { w.sin() } else { w.cos() }
        })
        .collect()
}

/// Drops round-off so structural zeros print as zeros.
fn snap(v: f64) -> f64 {
    let r = (v * 1e10).round() / 1e10;
    if (r - v).abs() < 1e-11 { r } else { v }
}

fn from_wavelet(w: WaveletFamily, lead: [f64; 2], m: usize) -> Result<Vec<f64>> {
    let mut c = vec![0.0; m];
    c[0] = lead[0];
    c[1] = lead[1];
    wavelet::idwt(&c, w)
}

impl StudyDesign {
    pub fn new(study: Study) -> Result<Self> {
        let (spec, method, n_total, burn_in, n_cycles) = match study {
            Study::FourierPgarch => {
                let spec = ModelSpec::pgarch(
                    harmonic_truth(7, 0.7, 0.45, true),
                    harmonic_truth(7, 0.6, 0.15, true),
                    harmonic_truth(7, 0.35, 0.2, true),
                    InnovationSpec::new(InnovationLaw::Ged { shape: 1.8 }, 0)?,
                )?;
                (spec, ReductionMethod::Fourier, 4396, 399, 570)
            }
            Study::FourierPacd => {
                let spec = ModelSpec::pacd(
                    harmonic_truth(7, 0.55, 0.45, false),
                    harmonic_truth(7, 0.65, 0.14, false),
                    harmonic_truth(7, 0.32, 0.18, false),
                    harmonic_truth(7, 0.4, 0.3, false),
                    InnovationSpec::gamma_unit_mean(0),
                )?;
                (spec, ReductionMethod::Fourier, 2191, 196, 284)
            }
            Study::WaveletPgarch => {
                let w = WaveletFamily::Daubechies(8);
                let spec = ModelSpec::pgarch(
                    from_wavelet(w, [2.0, 1.0], 8)?,
                    from_wavelet(w, [1.9, 0.5], 8)?,
                    from_wavelet(w, [0.85, 0.35], 8)?,
                    InnovationSpec::new(InnovationLaw::Ged { shape: 1.8 }, 0)?,
                )?;
                (spec, ReductionMethod::Wavelet(w), 4400, 400, 499)
            }
            Study::WaveletPacd => {
                let w = WaveletFamily::Daubechies(5);
                let spec = ModelSpec::pacd(
                    from_wavelet(w, [1.9, 1.2], 8)?,
                    from_wavelet(w, [2.0, 0.3], 8)?,
                    from_wavelet(w, [0.84, 0.40], 8)?,
                    from_wavelet(w, [1.20, 0.70], 8)?,
                    InnovationSpec::gamma_unit_mean(0),
                )?;
                (spec, ReductionMethod::Wavelet(w), 2200, 200, 249)
            }
        };
        let truth = spec
            .params()
            .map(|p| {
                let c = method.coefficients(p.values())?;
                Ok((p.family(), c.into_iter().map(snap).collect()))
            })
            .collect::<Result<_>>()?;
        let holdout = spec.nu();
        Ok(Self {
            study,
            spec,
            method,
            n_total,
            burn_in,
            n_cycles,
            holdout,
            alpha: 0.05,
            truth,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.spec.kind()
    }

    /// Same design with the fitted sample shortened to `n_cycles` cycles.
    pub fn with_cycles(mut self, n_cycles: usize) -> Self {
        let nu = self.spec.nu();
        self.n_total = self.burn_in + n_cycles * nu + self.holdout;
        self.n_cycles = n_cycles;
        self
    }
}

/// Seed of replication `r`.
pub fn replication_seed(seed: u64, r: usize) -> u64 {
    seed.wrapping_add((r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

#[derive(Debug, Clone)]
pub struct Replication {
    pub seed: u64,
    pub fit: FitResult,
    pub reduction: Reduction,
    pub full: crate::diagnostics::ForecastErrors,
    pub reduced: crate::diagnostics::ForecastErrors,
}

/// Observed series and the filtered conditional scale under `spec`.
fn filtered(kind: ModelKind, theta: &[f64], x: &[f64], start: (f64, f64)) -> Result<Vec<f64>> {
    match kind {
        ModelKind::Pgarch => pgarch::variance_path(theta, x, start),
        ModelKind::Pacd => pacd::duration_path(theta, x, start),
    }
}

/// Starting pair used by the fit when none is supplied.
pub fn default_start(kind: ModelKind, x: &[f64], nu: usize) -> Result<(f64, f64)> {
    match kind {
        ModelKind::Pgarch => pgarch::default_start(x, nu),
        ModelKind::Pacd => pacd::default_start(x, nu),
    }
}

/// Standardized residuals `y / sqrt(h)` or `u / psi` under `spec`.
pub fn residuals(spec: &ModelSpec, x: &[f64], start: (f64, f64)) -> Result<Vec<f64>> {
    let h = filtered(spec.kind(), &model::flatten(spec), x, start)?;
    Ok(match spec.kind() {
        ModelKind::Pgarch => x.iter().zip(&h).map(|(y, h)| y / h.sqrt()).collect(),
        ModelKind::Pacd => x.iter().zip(&h).map(|(u, p)| u / p).collect(),
    })
}

/// Holdout forecasts of `y^2` (PGARCH) or `u` (PACD) from the end of `x`.
pub fn holdout_forecast(spec: &ModelSpec, x: &[f64], start: (f64, f64), horizon: usize) -> Result<Vec<f64>> {
    let theta = model::flatten(spec);
    let h = filtered(spec.kind(), &theta, x, start)?;
    let last = (x[x.len() - 1], h[h.len() - 1]);
    let next = x.len() % spec.nu();
    match spec.kind() {
        ModelKind::Pgarch => pgarch::forecast_from(spec, next, last, horizon),
        ModelKind::Pacd => pacd::forecast_from(spec, next, last, horizon),
    }
}

/// Realized target matching [`holdout_forecast`].
pub fn forecast_target(kind: ModelKind, x: &[f64]) -> Vec<f64> {
    match kind {
        ModelKind::Pgarch => x.iter().map(|v| v * v).collect(),
        ModelKind::Pacd => x.to_vec(),
    }
}

pub fn run_replication(design: &StudyDesign, seed: u64) -> Result<Replication> {
    let spec = design
        .spec
        .clone()
        .with_innovation(InnovationSpec {
            seed,
            ..*design.spec.innovation()
        })?;
    let nu = spec.nu();
    let (x, start) = match spec.kind() {
        ModelKind::Pgarch => {
            let p = pgarch::simulate(&spec, design.n_total, design.burn_in, (0.0, 1.0))?;
            (p.y, p.start)
        }
        ModelKind::Pacd => {
            let p = pacd::simulate(&spec, design.n_total, design.burn_in, (1.0, 1.0))?;
            (p.u, p.start)
        }
    };
    let n_fit = design.n_cycles * nu;
    if x.len() < n_fit + design.holdout {
        return Err(Error::InvalidArgument("design leaves too few observations for the holdout".into()));
    }
    let (sample, rest) = x.split_at(n_fit);
    let holdout = &rest[..design.holdout];
    let options = FitOptions {
        start: Some(start),
        x0: Some(model::flatten(&spec)),
        ..FitOptions::default()
    };
    let fit = match spec.kind() {
        ModelKind::Pgarch => pgarch::fit(sample, nu, &options),
        ModelKind::Pacd => pacd::fit(sample, nu, &options),
    }
    .map_err(|e| e.in_stage("fit"))?;
    let reduction = design.method.reduce(&fit, design.alpha).map_err(|e| e.in_stage("reduce"))?;
    let target = forecast_target(spec.kind(), holdout);
    let full = forecast_errors(&target, &holdout_forecast(&fit.spec, sample, start, design.holdout)?)?;
    let reduced = forecast_errors(&target, &holdout_forecast(&reduction.spec, sample, start, design.holdout)?)?;
    Ok(Replication {
        seed,
        fit,
        reduction,
        full,
        reduced,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSummary {
    pub family: Family,
    pub index: usize,
    pub truth: f64,
    /// Mean of the retained (masked) estimates.
    pub mean: f64,
    pub rmse: f64,
    /// Fraction of replications retaining the coefficient.
    pub retention: f64,
}

#[derive(Debug, Clone)]
pub struct StudySummary {
    pub study: Study,
    pub replications: usize,
    pub failures: usize,
    pub coefficients: Vec<CoefficientSummary>,
    pub full_rmsfe: f64,
    pub reduced_rmsfe: f64,
    pub full_mafe: f64,
    pub reduced_mafe: f64,
    pub mean_parameters: f64,
}

impl StudySummary {
    /// Relative RMSFE improvement of the reduced over the full model.
    pub fn rmsfe_gain(&self) -> f64 {
        (self.full_rmsfe - self.reduced_rmsfe) / self.full_rmsfe
    }

    pub fn mafe_gain(&self) -> f64 {
        (self.full_mafe - self.reduced_mafe) / self.full_mafe
    }

    pub fn coefficient(&self, family: Family, index: usize) -> Option<&CoefficientSummary> {
        self.coefficients.iter().find(|c| c.family == family && c.index == index)
    }

    /// CSV table `family,index,true,mean,rmse,retention`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("family,index,true,mean,rmse,retention\n");
        for c in &self.coefficients {
            s.push_str(&format!(
                "{},{},{},{:.6},{:.6},{:.4}\n",
                c.family, c.index, c.truth, c.mean, c.rmse, c.retention
            ));
        }
        s
    }
}

/// Runs `replications` independent replications in parallel and summarizes
/// them. Failed replications are counted and skipped.
pub fn run_study(design: &StudyDesign, replications: usize, seed: u64) -> Result<StudySummary> {
    if replications == 0 {
        return Err(Error::InvalidArgument("replications must be >= 1".into()));
    }
    let results: Vec<Result<Replication>> = (0..replications)
        .into_par_iter()
        .map(|r| run_replication(design, replication_seed(seed, r)))
        .collect();
    let ok: Vec<Replication> = results.iter().filter_map(|r| r.as_ref().ok().cloned()).collect();
    if ok.is_empty() {
        return Err(results.into_iter().find_map(|r| r.err()).expect("at least one failure"));
    }
    summarize(design, &ok, replications - ok.len())
}

pub fn summarize(design: &StudyDesign, reps: &[Replication], failures: usize) -> Result<StudySummary> {
    let n = reps.len() as f64;
    let mut coefficients = Vec::new();
    for (&family, truth) in &design.truth {
        for (index, &t) in truth.iter().enumerate() {
            let mut sum = 0.0;
            let mut sq = 0.0;
            let mut kept = 0usize;
            for r in reps {
                let tc = &r.reduction.coefs[&family];
                let est = tc.masked()[index];
                sum += est;
                sq += (est - t).powi(2);
                kept += tc.mask[index] as usize;
            }
            coefficients.push(CoefficientSummary {
                family,
                index,
                truth: t,
                mean: sum / n,
                rmse: (sq / n).sqrt(),
                retention: kept as f64 / n,
            });
        }
    }
    let avg = |f: &dyn Fn(&Replication) -> f64| reps.iter().map(f).sum::<f64>() / n;
    Ok(StudySummary {
        study: design.study,
        replications: reps.len(),
        failures,
        coefficients,
        full_rmsfe: avg(&|r| r.full.rmsfe),
        reduced_rmsfe: avg(&|r| r.reduced.rmsfe),
        full_mafe: avg(&|r| r.full.mafe),
        reduced_mafe: avg(&|r| r.reduced.mafe),
        mean_parameters: avg(&|r| r.reduction.n_parameters() as f64),
    })
}
