//! CSV ingestion, run configuration and the end-to-end analysis pipeline
//! behind the `periscope` binary.

use std::fmt::Write as _;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{acf, forecast_errors, ljung_box, ForecastErrors};
use crate::error::{Error, Result};
use crate::model::{FitResult, ModelKind, ModelSpec};
use crate::optimize::{FitOptions, OptimizerConfig};
use crate::persist::save_model;
use crate::significance::Reduction;
use crate::study::{self, ReductionMethod, Study, StudySummary};
use crate::wavelet::WaveletFamily;
use crate::{pacd, pgarch};

/// A parsed numeric column plus any non-fatal findings.
#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub values: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Reads `column` from a headed CSV file. Warnings go to stderr.
pub fn ingest(path: impl AsRef<Path>, column: &str) -> Result<Vec<f64>> {
    let out = ingest_file(path, column)?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    Ok(out.values)
}

pub fn ingest_file(path: impl AsRef<Path>, column: &str) -> Result<Ingested> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_reader(file, column)
}

/// Parses `column` from CSV text with a header row. A `date` column that is
/// not non-decreasing produces a warning.
pub fn ingest_reader<R: Read>(reader: R, column: &str) -> Result<Ingested> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let names: Vec<String> = headers.iter().map(|h| h.trim().to_string()).collect();
    let idx = names
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| Error::MissingColumn {
            name: column.to_string(),
            available: names.clone(),
        })?;
    let date_idx = names.iter().position(|h| h.eq_ignore_ascii_case("date"));

    let mut values = Vec::new();
    let mut warnings = Vec::new();
    let mut last_date: Option<String> = None;
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        let cell = record.get(idx).unwrap_or("").trim();
        let v: f64 = cell.parse().map_err(|_| Error::Csv {
            line,
            message: format!("column `{column}`: `{cell}` is not a number"),
        })?;
        if !v.is_finite() {
            return Err(Error::Csv {
                line,
                message: format!("column `{column}`: `{cell}` is not finite"),
            });
        }
        values.push(v);
        if let Some(d) = date_idx.and_then(|i| record.get(i)) {
            let d = d.trim().to_string();
            if let Some(prev) = &last_date {
                if d < *prev {
                    warnings.push(format!("line {line}: date `{d}` precedes `{prev}`"));
                }
            }
            last_date = Some(d);
        }
    }
    if values.is_empty() {
        return Err(Error::DegenerateData(format!("no data rows for column `{column}`")));
    }
    Ok(Ingested { values, warnings })
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Csv {
        line,
        message: e.to_string(),
    }
}

/// Percentage log returns `100 (log p_t - log p_{t-1})`.
pub fn returns(prices: &[f64]) -> Result<Vec<f64>> {
    if prices.len() < 2 {
        return Err(Error::InvalidArgument("need at least two prices".into()));
    }
    if let Some(i) = prices.iter().position(|&p| !(p > 0.0 && p.is_finite())) {
        return Err(Error::InvalidArgument(format!("price at index {i} is not positive")));
    }
    Ok(prices.windows(2).map(|w| 100.0 * (w[1].ln() - w[0].ln())).collect())
}

/// `none`, `fourier` or `wavelet:<family>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ReductionChoice {
    #[default]
    None,
    Method(ReductionMethod),
}

impl FromStr for ReductionChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("none") {
            Ok(ReductionChoice::None)
        } else {
            Ok(ReductionChoice::Method(s.parse()?))
        }
    }
}

impl TryFrom<String> for ReductionChoice {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ReductionChoice> for String {
    fn from(r: ReductionChoice) -> String {
        match r {
            ReductionChoice::None => "none".into(),
            ReductionChoice::Method(m) => m.to_string(),
        }
    }
}

/// Settings shared by the CLI commands; loaded from TOML and overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub column: Option<String>,
    /// Convert the column from prices to percentage log returns.
    pub returns: bool,
    pub nu: usize,
    pub kind: ModelKind,
    pub reduction: ReductionChoice,
    pub alpha: f64,
    /// Holdout length; defaults to `nu`.
    pub holdout: Option<usize>,
    /// Search for starting values with the genetic algorithm.
    pub global_search: bool,
    pub optimizer: OptimizerConfig,
    /// Also run the reduction with every supported wavelet.
    pub compare_wavelets: bool,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            column: None,
            returns: false,
            nu: 7,
            kind: ModelKind::Pgarch,
            reduction: ReductionChoice::None,
            alpha: 0.05,
            holdout: None,
            global_search: false,
            optimizer: OptimizerConfig::default(),
            compare_wavelets: false,
            seed: 0,
            out_dir: PathBuf::from("periscope-out"),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn holdout_len(&self) -> usize {
        self.holdout.unwrap_or(self.nu)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.nu == 0 {
            return Err(Error::Config("nu must be >= 1".into()));
        }
        if self.holdout == Some(0) {
            return Err(Error::Config("holdout must be >= 1".into()));
        }
        Ok(())
    }

    pub fn fit_options(&self) -> FitOptions {
        let mut optimizer = self.optimizer.clone();
        if self.global_search {
            optimizer.global_init.enabled = true;
            optimizer.global_init.seed = self.seed;
        }
        FitOptions {
            optimizer,
            ..FitOptions::default()
        }
    }

    /// Reads the configured column, converting to returns if requested.
    pub fn load_series(&self) -> Result<Ingested> {
        let input = self
            .input
            .as_ref()
            .ok_or_else(|| Error::Config("no input file given".into()))?;
        let column = self
            .column
            .as_deref()
            .ok_or_else(|| Error::Config("no column given".into()))?;
        let mut data = ingest_file(input, column)?;
        if self.returns {
            data.values = returns(&data.values)?;
        }
        Ok(data)
    }
}

pub fn fit_model(kind: ModelKind, x: &[f64], nu: usize, options: &FitOptions) -> Result<FitResult> {
    match kind {
        ModelKind::Pgarch => pgarch::fit(x, nu, options),
        ModelKind::Pacd => pacd::fit(x, nu, options),
    }
}

/// Estimation sample and holdout: the last `holdout` points are held out and
/// the rest is truncated from the head to whole cycles.
pub fn split_sample(x: &[f64], nu: usize, holdout: usize) -> Result<(&[f64], &[f64])> {
    if x.len() < holdout + 2 * nu {
        return Err(Error::InvalidArgument(format!(
            "series of length {} is too short for holdout {holdout} and period {nu}",
            x.len()
        )));
    }
    let (est, hold) = x.split_at(x.len() - holdout);
    Ok((&est[est.len() % nu..], hold))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForecastRow {
    pub model: String,
    pub n_parameters: usize,
    pub rmsfe: f64,
    pub mafe: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LjungBoxRow {
    pub series: String,
    pub lag: usize,
    pub q: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveletComparison {
    pub wavelet: String,
    pub n_parameters: Option<usize>,
    pub rmsfe: Option<f64>,
    pub mafe: Option<f64>,
    pub error: Option<String>,
}

/// Summary of a pipeline run; every field is also written to `out_dir`.
#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub out_dir: PathBuf,
    pub n_estimation: usize,
    pub n_holdout: usize,
    pub fit: FitResult,
    pub reduction: Option<Reduction>,
    pub classical: Option<FitResult>,
    pub forecasts: Vec<ForecastRow>,
    pub ljung_box: Vec<LjungBoxRow>,
    pub wavelets: Vec<WaveletComparison>,
    pub artifacts: Vec<String>,
}

impl PipelineReport {
    /// The model used for diagnostics: the reduced one when present.
    pub fn final_spec(&self) -> &ModelSpec {
        self.reduction.as_ref().map_or(&self.fit.spec, |r| &r.spec)
    }
}

/// True when every family of `spec` is constant across seasons.
pub fn is_collapsed(spec: &ModelSpec) -> bool {
    spec.params().all(|p| {
        let v = p.values();
        v.iter().all(|x| (x - v[0]).abs() <= 1e-12 * v[0].abs().max(1.0))
    })
}

struct Writer {
    dir: PathBuf,
    written: Vec<String>,
}

impl Writer {
    fn put(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn model(&mut self, name: &str, spec: &ModelSpec, fit: Option<&FitResult>) -> Result<()> {
        save_model(spec, fit, self.dir.join(name))?;
        self.written.push(name.to_string());
        Ok(())
    }
}

/// Runs ingest, fit, reduce, classical fallback, forecast and diagnostics,
/// writing artifacts as each stage completes. A failing stage is reported
/// by name and leaves earlier artifacts plus a manifest in place.
pub fn run_pipeline(cfg: &RunConfig) -> Result<PipelineReport> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    let mut w = Writer {
        dir: cfg.out_dir.clone(),
        written: Vec::new(),
    };
    let result = pipeline_stages(cfg, &mut w);
    let error = result.as_ref().err().map(|e| e.to_string());
    let mut artifacts = w.written.clone();
    artifacts.push("manifest.json".into());
    let manifest = serde_json::json!({
        "tool": "periscope",
        "version": env!("CARGO_PKG_VERSION"),
        "seed": cfg.seed,
        "config": cfg,
        "status": if error.is_some() { "failed" } else { "ok" },
        "error": error,
        "artifacts": artifacts,
    });
    w.put("manifest.json", &serde_json::to_string_pretty(&manifest)?)?;
    result.map(|mut r| {
        r.artifacts = w.written;
        r
    })
}

fn pipeline_stages(cfg: &RunConfig, w: &mut Writer) -> Result<PipelineReport> {
    let nu = cfg.nu;
    let kind = cfg.kind;
    let data = cfg.load_series().map_err(|e| e.in_stage("ingest"))?;
    for warn in &data.warnings {
        eprintln!("warning: {warn}");
    }
    let (sample, holdout) = split_sample(&data.values, nu, cfg.holdout_len()).map_err(|e| e.in_stage("ingest"))?;
    w.put("series.svg", &line_svg("series", &data.values))?;

    let options = cfg.fit_options();
    let fit = fit_model(kind, sample, nu, &options).map_err(|e| e.in_stage("fit"))?;
    let start = study::default_start(kind, sample, nu).map_err(|e| e.in_stage("fit"))?;
    w.model("model_full.json", &fit.spec, Some(&fit))?;

    let reduction = match cfg.reduction {
        ReductionChoice::None => None,
        ReductionChoice::Method(m) => {
            let r = m.reduce(&fit, cfg.alpha).map_err(|e| e.in_stage("reduce"))?;
            w.model("model_reduced.json", &r.spec, None)?;
            w.put("coefficients.csv", &coefficient_table(&r))?;
            Some(r)
        }
    };

    let classical = match &reduction {
        Some(r) if is_collapsed(&r.spec) => {
            let c = fit_model(kind, sample, 1, &cfg.fit_options()).map_err(|e| e.in_stage("classical"))?;
            w.model("model_classical.json", &c.spec, Some(&c))?;
            Some(c)
        }
        _ => None,
    };

    let target = study::forecast_target(kind, holdout);
    let h = holdout.len();
    let mut forecasts = Vec::new();
    let mut paths: Vec<(String, Vec<f64>)> = Vec::new();
    let mut add = |name: &str, spec: &ModelSpec, n_par: usize, start: (f64, f64)| -> Result<()> {
        let f = study::holdout_forecast(spec, sample, start, h)?;
        let ForecastErrors { rmsfe, mafe } = forecast_errors(&target, &f)?;
        forecasts.push(ForecastRow {
            model: name.to_string(),
            n_parameters: n_par,
            rmsfe,
            mafe,
        });
        paths.push((name.to_string(), f));
        Ok(())
    };
    add("full", &fit.spec, fit.spec.n_parameters(), start).map_err(|e| e.in_stage("forecast"))?;
    if let Some(r) = &reduction {
        add("reduced", &r.spec, r.n_parameters(), start).map_err(|e| e.in_stage("forecast"))?;
    }
    if let Some(c) = &classical {
        let s1 = study::default_start(kind, sample, 1).map_err(|e| e.in_stage("forecast"))?;
        add("classical", &c.spec, c.spec.n_parameters(), s1).map_err(|e| e.in_stage("forecast"))?;
    }
    w.put("forecast_errors.csv", &forecast_table(&forecasts))?;
    w.put("forecasts.csv", &forecast_paths(&target, &paths))?;

    let final_spec = reduction.as_ref().map_or(&fit.spec, |r| &r.spec);
    let (acf_csv, lb, svgs) = residual_diagnostics(final_spec, sample, start).map_err(|e| e.in_stage("diagnose"))?;
    w.put("acf.csv", &acf_csv)?;
    w.put("ljung_box.csv", &ljung_box_table(&lb))?;
    for (name, svg) in svgs {
        w.put(&name, &svg)?;
    }

    let wavelets = if cfg.compare_wavelets {
        let rows = compare_wavelets(&fit, sample, holdout, start, cfg.alpha).map_err(|e| e.in_stage("compare"))?;
        w.put("wavelet_comparison.csv", &wavelet_table(&rows))?;
        rows
    } else {
        Vec::new()
    };

    Ok(PipelineReport {
        out_dir: cfg.out_dir.clone(),
        n_estimation: sample.len(),
        n_holdout: h,
        fit,
        reduction,
        classical,
        forecasts,
        ljung_box: lb,
        wavelets,
        artifacts: Vec::new(),
    })
}

type Diagnostics = (String, Vec<LjungBoxRow>, Vec<(String, String)>);

fn residual_diagnostics(spec: &ModelSpec, sample: &[f64], start: (f64, f64)) -> Result<Diagnostics> {
    let res = study::residuals(spec, sample, start)?;
    let sq: Vec<f64> = res.iter().map(|r| r * r).collect();
    let max_lag = 30.min(res.len() - 1);
    let a = acf(&res, max_lag)?;
    let a2 = acf(&sq, max_lag)?;
    let mut csv = String::from("lag,residual,squared_residual\n");
    for k in 0..max_lag {
        let _ = writeln!(csv, "{},{},{}", k + 1, a[k], a2[k]);
    }
    let mut lb = Vec::new();
    for (name, series) in [("residual", &res), ("squared_residual", &sq)] {
        for lag in [20, 30] {
            if lag < series.len() {
                let t = ljung_box(series, lag)?;
                lb.push(LjungBoxRow {
                    series: name.into(),
                    lag,
                    q: t.q,
                    p_value: t.p_value,
                });
            }
        }
    }
    let n = res.len();
    let svgs = vec![
        ("acf_residuals.svg".to_string(), acf_svg("ACF of residuals", &a, n)),
        ("acf_squared_residuals.svg".to_string(), acf_svg("ACF of squared residuals", &a2, n)),
    ];
    Ok((csv, lb, svgs))
}

/// Reduces `fit` with every supported wavelet and scores each reduced model
/// on the holdout. Inadmissible reductions are reported, not raised.
pub fn compare_wavelets(
    fit: &FitResult,
    sample: &[f64],
    holdout: &[f64],
    start: (f64, f64),
    alpha: f64,
) -> Result<Vec<WaveletComparison>> {
    let target = study::forecast_target(fit.spec.kind(), holdout);
    WaveletFamily::all()
        .into_iter()
        .map(|wf| {
            let attempt = ReductionMethod::Wavelet(wf).reduce(fit, alpha).and_then(|r| {
                let f = study::holdout_forecast(&r.spec, sample, start, holdout.len())?;
                Ok((r.n_parameters(), forecast_errors(&target, &f)?))
            });
            Ok(match attempt {
                Ok((n, e)) => WaveletComparison {
                    wavelet: wf.to_string(),
                    n_parameters: Some(n),
                    rmsfe: Some(e.rmsfe),
                    mafe: Some(e.mafe),
                    error: None,
                },
                Err(Error::Positivity { .. } | Error::CovarianceUnavailable(_)) => WaveletComparison {
                    wavelet: wf.to_string(),
                    n_parameters: None,
                    rmsfe: None,
                    mafe: None,
                    error: Some(attempt.unwrap_err().to_string()),
                },
                Err(e) => return Err(e),
            })
        })
        .collect()
}

/// `family,index,estimate,z,retained,threshold`.
pub fn coefficient_table(r: &Reduction) -> String {
    let mut s = String::from("family,index,estimate,z,retained,threshold\n");
    for tc in r.coefs.values() {
        for i in 0..tc.coefs.len() {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                tc.family, i, tc.coefs[i], tc.z[i], tc.mask[i], tc.threshold
            );
        }
    }
    s
}

fn forecast_table(rows: &[ForecastRow]) -> String {
    let mut s = String::from("model,n_parameters,rmsfe,mafe\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", r.model, r.n_parameters, r.rmsfe, r.mafe);
    }
    s
}

fn forecast_paths(target: &[f64], paths: &[(String, Vec<f64>)]) -> String {
    let mut s = String::from("step,actual");
    for (name, _) in paths {
        s.push(',');
        s.push_str(name);
    }
    s.push('\n');
    for (i, t) in target.iter().enumerate() {
        let _ = write!(s, "{},{}", i + 1, t);
        for (_, f) in paths {
            let _ = write!(s, ",{}", f[i]);
        }
        s.push('\n');
    }
    s
}

fn ljung_box_table(rows: &[LjungBoxRow]) -> String {
    let mut s = String::from("series,lag,q,p_value\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", r.series, r.lag, r.q, r.p_value);
    }
    s
}

fn wavelet_table(rows: &[WaveletComparison]) -> String {
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    let mut s = String::from("wavelet,n_parameters,rmsfe,mafe,error\n");
    for r in rows {
        let _ = writeln!(
            s,
            "\"{}\",{},{},{},\"{}\"",
            r.wavelet,
            r.n_parameters.map_or(String::new(), |n| n.to_string()),
            opt(r.rmsfe),
            opt(r.mafe),
            r.error.as_deref().unwrap_or("").replace('"', "\"\"")
        );
    }
    s
}

const W: f64 = 720.0;
const H: f64 = 320.0;
const PAD: f64 = 40.0;

fn svg_open(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
        W / 2.0,
        escape(title)
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line chart of a series.
pub fn line_svg(title: &str, x: &[f64]) -> String {
    let mut s = svg_open(title);
    let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let dx = (W - 2.0 * PAD) / (x.len().max(2) - 1) as f64;
    let pts: Vec<String> = x
        .iter()
        .enumerate()
        .map(|(i, v)| format!("{:.2},{:.2}", PAD + i as f64 * dx, H - PAD - (v - lo) / span * (H - 2.0 * PAD)))
        .collect();
    let _ = writeln!(
        s,
        "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1\" points=\"{}\"/>",
        pts.join(" ")
    );
    s.push_str("</svg>\n");
    s
}

/// ACF bars with a `±2/sqrt(n)` reference band.
pub fn acf_svg(title: &str, acf: &[f64], n: usize) -> String {
    let mut s = svg_open(title);
    let band = 2.0 / (n as f64).sqrt();
    let top = acf.iter().fold(band, |m, v| m.max(v.abs())).max(0.1) * 1.1;
    let mid = H / 2.0;
    let scale = (H / 2.0 - PAD) / top;
    let dx = (W - 2.0 * PAD) / acf.len().max(1) as f64;
    let _ = writeln!(
        s,
        "<line x1=\"{PAD}\" y1=\"{mid}\" x2=\"{}\" y2=\"{mid}\" stroke=\"black\"/>",
        W - PAD
    );
    for y in [mid - band * scale, mid + band * scale] {
        let _ = writeln!(
            s,
            "<line x1=\"{PAD}\" y1=\"{y:.2}\" x2=\"{}\" y2=\"{y:.2}\" stroke=\"red\" stroke-dasharray=\"4 3\"/>",
            W - PAD
        );
    }
    for (k, v) in acf.iter().enumerate() {
        let x = PAD + (k as f64 + 0.5) * dx;
        let _ = writeln!(
            s,
            "<line x1=\"{x:.2}\" y1=\"{mid}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"steelblue\" stroke-width=\"{:.2}\"/>",
            mid - v * scale,
            (dx * 0.5).max(1.0)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Runs a simulation study; see [`study::run_study`].
pub fn repro_sim(which: Study, replications: usize, seed: u64) -> Result<StudySummary> {
    let design = study::StudyDesign::new(which)?;
    study::run_study(&design, replications, seed)
}

/// One-line gain summary for a study.
pub fn study_report(s: &StudySummary) -> String {
    format!(
        "{}: {} replications ({} failed), mean parameters {:.2}, RMSFE full {:.6} reduced {:.6} gain {:.2}%, MAFE full {:.6} reduced {:.6} gain {:.2}%",
        s.study,
        s.replications,
        s.failures,
        s.mean_parameters,
        s.full_rmsfe,
        s.reduced_rmsfe,
        100.0 * s.rmsfe_gain(),
        s.full_mafe,
        s.reduced_mafe,
        100.0 * s.mafe_gain()
    )
}
