//! JSON model files.
//!
//! Layout (schema `periscope/1`):
//!
//! ```text
//! { "schema": "periscope/1", "kind": "PGARCH" | "PACD", "nu": 7,
//!   "params": { "Omega": [..], ... },
//!   "innovation": { "law": "GED", "shape": 1.8, "seed": 1 },
//!   "fit": { "cov": { "Omega": [[..], ..], ... }, "objective": 1.2,
//!            "fourth_moment": 3.1 | null, "n_cycles": 570,
//!            "residuals": [..], "converged": true, "iterations": 41 } | null }
//! ```
//!
//! Floats are written with 17 significant digits so a save/load cycle is
//! bit-exact.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::error::{Error, Result};
use crate::model::{Family, FitResult, InnovationSpec, ModelKind, ModelSpec, PeriodicVector};

pub const SCHEMA: &str = "periscope/1";

#[derive(Serialize, Deserialize)]
struct ModelFile {
    schema: String,
    kind: String,
    nu: usize,
    params: BTreeMap<String, Vec<f64>>,
    innovation: InnovationSpec,
    fit: Option<FitFile>,
}

#[derive(Serialize, Deserialize)]
struct FitFile {
    cov: BTreeMap<String, Vec<Vec<f64>>>,
    objective: f64,
    fourth_moment: Option<f64>,
    n_cycles: usize,
    #[serde(default)]
    residuals: Vec<f64>,
    #[serde(default = "default_true")]
    converged: bool,
    #[serde(default)]
    iterations: usize,
}

fn default_true() -> bool {
    true
}

/// Compact JSON with every float printed as `d.dddddddddddddddde±x`.
struct SignificantDigits;

impl Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

pub fn to_json_string(spec: &ModelSpec, fit: Option<&FitResult>) -> Result<String> {
    check_finite(spec, fit)?;
    let file = ModelFile {
        schema: SCHEMA.to_string(),
        kind: spec.kind().to_string(),
        nu: spec.nu(),
        params: spec
            .params()
            .map(|p| (p.family().to_string(), p.values().to_vec()))
            .collect(),
        innovation: *spec.innovation(),
        fit: fit.map(|f| FitFile {
            cov: f
                .cov
                .iter()
                .map(|(fam, m)| {
                    let rows = (0..m.nrows())
                        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
                        .collect();
                    (fam.to_string(), rows)
                })
                .collect(),
            objective: f.objective,
            fourth_moment: f.fourth_moment,
            n_cycles: f.n_cycles,
            residuals: f.residuals.clone(),
            converged: f.converged,
            iterations: f.iterations,
        }),
    };
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SignificantDigits);
    file.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

fn check_finite(spec: &ModelSpec, fit: Option<&FitResult>) -> Result<()> {
    if let InnovationSpec {
        law: crate::model::InnovationLaw::Ged { shape },
        ..
    } = spec.innovation()
    {
        if !shape.is_finite() {
            return Err(Error::invariant("innovation.shape", "not finite"));
        }
    }
    if let Some(f) = fit {
        let bad = |x: f64| !x.is_finite();
        if bad(f.objective) {
            return Err(Error::invariant("fit.objective", "not finite"));
        }
        if f.fourth_moment.is_some_and(bad) {
            return Err(Error::invariant("fit.fourth_moment", "not finite"));
        }
        for (fam, m) in &f.cov {
            if m.iter().copied().any(bad) {
                return Err(Error::invariant(format!("fit.cov.{fam}"), "contains non-finite entries"));
            }
        }
        if let Some(i) = f.residuals.iter().position(|&r| bad(r)) {
            return Err(Error::invariant(format!("fit.residuals[{i}]"), "not finite"));
        }
    }
    Ok(())
}

pub fn from_json_str(text: &str) -> Result<(ModelSpec, Option<FitResult>)> {
    let raw: serde_json::Value = serde_json::from_str(text)?;
    match raw.get("schema").and_then(|s| s.as_str()) {
        Some(SCHEMA) => {}
        Some(other) => {
            return Err(Error::Schema(format!(
                "unsupported schema version `{other}` (expected `{SCHEMA}`)"
            )))
        }
        None => return Err(Error::Schema("missing `schema` field".into())),
    }
    let file: ModelFile = serde_json::from_value(raw).map_err(|e| Error::Schema(e.to_string()))?;
    let kind: ModelKind = file.kind.parse()?;
    if file.nu == 0 {
        return Err(Error::invariant("nu", "must be positive"));
    }

    let mut vectors = Vec::with_capacity(file.params.len());
    for (name, values) in file.params {
        let family: Family = name.parse()?;
        if values.len() != file.nu {
            return Err(Error::invariant(
                format!("params.{family}"),
                format!("length {} differs from nu = {}", values.len(), file.nu),
            ));
        }
        vectors.push(PeriodicVector::new(family, values)?);
    }
    let spec = ModelSpec::new(kind, vectors, InnovationSpec::new(file.innovation.law, file.innovation.seed)?)?;

    let fit = match file.fit {
        None => None,
        Some(f) => {
            let mut cov = BTreeMap::new();
            for (name, rows) in f.cov {
                let family: Family = name.parse()?;
                let n = rows.len();
                if rows.iter().any(|r| r.len() != n) {
                    return Err(Error::invariant(format!("fit.cov.{family}"), "matrix is not square"));
                }
                let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
                cov.insert(family, m);
            }
            let fit = FitResult {
                spec: spec.clone(),
                cov,
                objective: f.objective,
                residuals: f.residuals,
                fourth_moment: f.fourth_moment,
                n_cycles: f.n_cycles,
                converged: f.converged,
                iterations: f.iterations,
            };
            fit.validate()?;
            Some(fit)
        }
    };
    Ok((spec, fit))
}

pub fn save_model(spec: &ModelSpec, fit: Option<&FitResult>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = to_json_string(spec, fit)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<(ModelSpec, Option<FitResult>)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json_str(&text)
}
