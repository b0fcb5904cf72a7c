//! Domain types shared by the estimators and the reduction transforms.
//!
//! A periodic model of period `nu` carries one [`PeriodicVector`] per
//! parameter family. Observation `t` is governed by season `t % nu`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A parameter family of a periodic model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    Omega,
    Alpha,
    Beta,
    Lambda,
    Gamma,
    Delta,
    SigmaSq,
}

impl Family {
    pub const PGARCH: [Family; 3] = [Family::Omega, Family::Alpha, Family::Beta];
    pub const PACD: [Family; 4] = [Family::Lambda, Family::Gamma, Family::Delta, Family::SigmaSq];

    pub fn name(self) -> &'static str {
        match self {
            Family::Omega => "Omega",
            Family::Alpha => "Alpha",
            Family::Beta => "Beta",
            Family::Lambda => "Lambda",
            Family::Gamma => "Gamma",
            Family::Delta => "Delta",
            Family::SigmaSq => "SigmaSq",
        }
    }

    /// Intercept-like families must be strictly positive; the rest only non-negative.
    pub fn strictly_positive(self) -> bool {
        matches!(self, Family::Omega | Family::Lambda | Family::SigmaSq)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "Omega" => Family::Omega,
            "Alpha" => Family::Alpha,
            "Beta" => Family::Beta,
            "Lambda" => Family::Lambda,
            "Gamma" => Family::Gamma,
            "Delta" => Family::Delta,
            "SigmaSq" => Family::SigmaSq,
            other => return Err(Error::Schema(format!("unknown parameter family `{other}`"))),
        })
    }
}

/// One parameter family over a full period.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicVector {
    family: Family,
    values: Vec<f64>,
}

impl PeriodicVector {
    pub fn new(family: Family, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invariant(
                format!("params.{family}"),
                "period must be at least 1",
            ));
        }
        for (i, &v) in values.iter().enumerate() {
            let ok = v.is_finite() && if family.strictly_positive() { v > 0.0 } else { v >= 0.0 };
            if !ok {
                let need = if family.strictly_positive() { "> 0" } else { ">= 0" };
                return Err(Error::invariant(
                    format!("params.{family}[{i}]"),
                    format!("value {v} must be finite and {need}"),
                ));
            }
        }
        Ok(Self { family, values })
    }

    pub fn constant(family: Family, nu: usize, value: f64) -> Result<Self> {
        Self::new(family, vec![value; nu])
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn nu(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value governing observation `t`.
    #[inline]
    pub fn at(&self, t: usize) -> f64 {
        self.values[t % self.values.len()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "PGARCH", alias = "pgarch")]
    Pgarch,
    #[serde(rename = "PACD", alias = "pacd")]
    Pacd,
}

impl ModelKind {
    pub fn families(self) -> &'static [Family] {
        match self {
            ModelKind::Pgarch => &Family::PGARCH,
            ModelKind::Pacd => &Family::PACD,
        }
    }

    /// The three families carried in the quasi-likelihood parameter vector.
    pub fn recursion_families(self) -> [Family; 3] {
        match self {
            ModelKind::Pgarch => Family::PGARCH,
            ModelKind::Pacd => [Family::Lambda, Family::Gamma, Family::Delta],
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Pgarch => "PGARCH",
            ModelKind::Pacd => "PACD",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "PGARCH" => Ok(ModelKind::Pgarch),
            "PACD" => Ok(ModelKind::Pacd),
            _ => Err(Error::Schema(format!("unknown model kind `{s}`"))),
        }
    }
}

/// Innovation law used when simulating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law")]
pub enum InnovationLaw {
    /// Zero-mean, unit-variance generalized error distribution.
    #[serde(rename = "GED")]
    Ged { shape: f64 },
    /// Gamma with mean one; its variance comes from the model's `SigmaSq` family.
    GammaUnitMean,
    StdNormal,
    UnitExponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnovationSpec {
    #[serde(flatten)]
    pub law: InnovationLaw,
    pub seed: u64,
}

impl InnovationSpec {
    pub fn new(law: InnovationLaw, seed: u64) -> Result<Self> {
        if let InnovationLaw::Ged { shape } = law {
            if !(shape.is_finite() && shape > 0.0) {
                return Err(Error::invariant("innovation.shape", "GED shape must be > 0"));
            }
        }
        Ok(Self { law, seed })
    }

    pub fn std_normal(seed: u64) -> Self {
        Self {
            law: InnovationLaw::StdNormal,
            seed,
        }
    }

    pub fn gamma_unit_mean(seed: u64) -> Self {
        Self {
            law: InnovationLaw::GammaUnitMean,
            seed,
        }
    }

    fn admissible_for(&self, kind: ModelKind) -> bool {
        match kind {
            ModelKind::Pgarch => matches!(self.law, InnovationLaw::Ged { .. } | InnovationLaw::StdNormal),
            ModelKind::Pacd => matches!(
                self.law,
                InnovationLaw::GammaUnitMean | InnovationLaw::UnitExponential
            ),
        }
    }
}

/// A fully specified PGARCH or PACD model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    kind: ModelKind,
    nu: usize,
    params: BTreeMap<Family, PeriodicVector>,
    innovation: InnovationSpec,
}

impl ModelSpec {
    pub fn new(
        kind: ModelKind,
        params: impl IntoIterator<Item = PeriodicVector>,
        innovation: InnovationSpec,
    ) -> Result<Self> {
        let params: BTreeMap<Family, PeriodicVector> =
            params.into_iter().map(|p| (p.family(), p)).collect();
        let wanted = kind.families();
        for f in wanted {
            if !params.contains_key(f) {
                return Err(Error::invariant(
                    format!("params.{f}"),
                    format!("{kind} model requires this family"),
                ));
            }
        }
        if let Some(extra) = params.keys().find(|f| !wanted.contains(f)) {
            return Err(Error::invariant(
                format!("params.{extra}"),
                format!("family is not part of a {kind} model"),
            ));
        }
        let nu = params[&wanted[0]].nu();
        for (f, p) in &params {
            if p.nu() != nu {
                return Err(Error::invariant(
                    format!("params.{f}"),
                    format!("length {} differs from period {nu}", p.nu()),
                ));
            }
        }
        if !innovation.admissible_for(kind) {
            return Err(Error::invariant(
                "innovation.law",
                format!("{:?} is not a valid innovation law for {kind}", innovation.law),
            ));
        }
        Ok(Self {
            kind,
            nu,
            params,
            innovation,
        })
    }

    pub fn pgarch(omega: Vec<f64>, alpha: Vec<f64>, beta: Vec<f64>, innovation: InnovationSpec) -> Result<Self> {
        Self::new(
            ModelKind::Pgarch,
            [
                PeriodicVector::new(Family::Omega, omega)?,
                PeriodicVector::new(Family::Alpha, alpha)?,
                PeriodicVector::new(Family::Beta, beta)?,
            ],
            innovation,
        )
    }

    pub fn pacd(
        lambda: Vec<f64>,
        gamma: Vec<f64>,
        delta: Vec<f64>,
        sigma_sq: Vec<f64>,
        innovation: InnovationSpec,
    ) -> Result<Self> {
        Self::new(
            ModelKind::Pacd,
            [
                PeriodicVector::new(Family::Lambda, lambda)?,
                PeriodicVector::new(Family::Gamma, gamma)?,
                PeriodicVector::new(Family::Delta, delta)?,
                PeriodicVector::new(Family::SigmaSq, sigma_sq)?,
            ],
            innovation,
        )
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn innovation(&self) -> &InnovationSpec {
        &self.innovation
    }

    pub fn param(&self, family: Family) -> &PeriodicVector {
        &self.params[&family]
    }

    pub fn params(&self) -> impl Iterator<Item = &PeriodicVector> {
        self.params.values()
    }

    pub fn with_innovation(mut self, innovation: InnovationSpec) -> Result<Self> {
        if !innovation.admissible_for(self.kind) {
            return Err(Error::InvalidArgument(format!(
                "{:?} is not a valid innovation law for {}",
                innovation.law, self.kind
            )));
        }
        self.innovation = innovation;
        Ok(self)
    }

    /// Replace one family, keeping the others.
    pub fn with_param(mut self, vector: PeriodicVector) -> Result<Self> {
        if !self.params.contains_key(&vector.family()) || vector.nu() != self.nu {
            return Err(Error::InvalidArgument(format!(
                "cannot place {} of length {} into a {} model with period {}",
                vector.family(),
                vector.nu(),
                self.kind,
                self.nu
            )));
        }
        self.params.insert(vector.family(), vector);
        Ok(self)
    }

    /// Advisory stationarity flag: the product of the persistence coefficients
    /// (`Beta` or `Delta`) over one period is below one.
    pub fn persistence_product_below_one(&self) -> bool {
        let fam = match self.kind {
            ModelKind::Pgarch => Family::Beta,
            ModelKind::Pacd => Family::Delta,
        };
        self.params[&fam].values().iter().product::<f64>() < 1.0
    }

    /// Number of free parameters of the unrestricted periodic model.
    pub fn n_parameters(&self) -> usize {
        self.params.len() * self.nu
    }
}

/// Interleaved quasi-likelihood parameter vector: `(w0, a0, b0, w1, a1, b1, ...)`
/// for PGARCH and `(l0, g0, d0, ...)` for PACD. `SigmaSq` is not part of it.
pub fn flatten(spec: &ModelSpec) -> Vec<f64> {
    let fams = spec.kind.recursion_families();
    let mut out = Vec::with_capacity(3 * spec.nu);
    for k in 0..spec.nu {
        for f in fams {
            out.push(spec.params[&f].values()[k]);
        }
    }
    out
}

/// Inverse of [`flatten`]. A PACD model needs its `SigmaSq` family supplied separately.
pub fn unflatten(
    kind: ModelKind,
    theta: &[f64],
    sigma_sq: Option<PeriodicVector>,
    innovation: InnovationSpec,
) -> Result<ModelSpec> {
    if theta.is_empty() || !theta.len().is_multiple_of(3) {
        return Err(Error::InvalidArgument(format!(
            "parameter vector length {} is not a positive multiple of 3",
            theta.len()
        )));
    }
    let fams = kind.recursion_families();
    let mut vectors = Vec::with_capacity(4);
    for (j, f) in fams.iter().enumerate() {
        let values = theta.iter().skip(j).step_by(3).copied().collect();
        vectors.push(PeriodicVector::new(*f, values)?);
    }
    match (kind, sigma_sq) {
        (ModelKind::Pacd, Some(s)) => vectors.push(s),
        (ModelKind::Pacd, None) => {
            return Err(Error::InvalidArgument(
                "PACD model requires a SigmaSq vector".into(),
            ))
        }
        (ModelKind::Pgarch, Some(_)) => {
            return Err(Error::InvalidArgument(
                "PGARCH model has no SigmaSq family".into(),
            ))
        }
        (ModelKind::Pgarch, None) => {}
    }
    ModelSpec::new(kind, vectors, innovation)
}

/// Output of a quasi-likelihood fit.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub spec: ModelSpec,
    /// Asymptotic covariance of `sqrt(N) * (estimate - truth)` per family.
    pub cov: BTreeMap<Family, DMatrix<f64>>,
    pub objective: f64,
    pub residuals: Vec<f64>,
    /// Moment estimate of `E(eps^4)`; PGARCH only.
    pub fourth_moment: Option<f64>,
    pub n_cycles: usize,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    /// Checks the structural invariants of a fit (symmetric blocks, residual count).
    pub fn validate(&self) -> Result<()> {
        let nu = self.spec.nu();
        if self.n_cycles == 0 {
            return Err(Error::invariant("fit.n_cycles", "must be positive"));
        }
        if !self.residuals.is_empty() && self.residuals.len() != self.n_cycles * nu {
            return Err(Error::invariant(
                "fit.residuals",
                format!(
                    "length {} differs from n_cycles * nu = {}",
                    self.residuals.len(),
                    self.n_cycles * nu
                ),
            ));
        }
        for (f, m) in &self.cov {
            if m.nrows() != nu || m.ncols() != nu {
                return Err(Error::invariant(
                    format!("fit.cov.{f}"),
                    format!("expected {nu}x{nu} block"),
                ));
            }
            for i in 0..nu {
                if !(m[(i, i)] >= 0.0) {
                    return Err(Error::invariant(
                        format!("fit.cov.{f}[{i}][{i}]"),
                        "diagonal entry must be >= 0",
                    ));
                }
                for j in 0..i {
                    let (a, b) = (m[(i, j)], m[(j, i)]);
                    if (a - b).abs() > 1e-9 * (1.0 + a.abs().max(b.abs())) {
                        return Err(Error::invariant(
                            format!("fit.cov.{f}[{i}][{j}]"),
                            "block is not symmetric",
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn normal() -> InnovationSpec {
        InnovationSpec::std_normal(0)
    }

    #[test]
    fn flatten_single_season() {
        let s = ModelSpec::pgarch(vec![0.5], vec![0.2], vec![0.3], normal()).unwrap();
        assert_eq!(flatten(&s), vec![0.5, 0.2, 0.3]);
    }

    #[test]
    fn flatten_interleaves_seasons() {
        let s = ModelSpec::pgarch(vec![1., 2.], vec![3., 4.], vec![5., 6.], normal()).unwrap();
        assert_eq!(flatten(&s), vec![1., 3., 5., 2., 4., 6.]);
    }

    #[test]
    fn pacd_flatten_excludes_sigma_sq() {
        let s = ModelSpec::pacd(
            vec![0.1, 0.2],
            vec![0.3, 0.4],
            vec![0.5, 0.6],
            vec![0.7, 0.8],
            InnovationSpec::gamma_unit_mean(1),
        )
        .unwrap();
        let eta = flatten(&s);
        assert_eq!(eta, vec![0.1, 0.3, 0.5, 0.2, 0.4, 0.6]);
        let back = unflatten(
            ModelKind::Pacd,
            &eta,
            Some(s.param(Family::SigmaSq).clone()),
            *s.innovation(),
        )
        .unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn negative_omega_names_the_field() {
        let err = ModelSpec::pgarch(vec![-1.0], vec![0.1], vec![0.1], normal()).unwrap_err();
        assert!(err.to_string().contains("params.Omega[0]"), "{err}");
    }

    #[test]
    fn zero_alpha_is_allowed_but_zero_omega_is_not() {
        assert!(PeriodicVector::new(Family::Alpha, vec![0.0]).is_ok());
        assert!(PeriodicVector::new(Family::Omega, vec![0.0]).is_err());
        assert!(PeriodicVector::new(Family::SigmaSq, vec![0.0]).is_err());
    }

    #[test]
    fn mismatched_periods_rejected() {
        assert!(ModelSpec::pgarch(vec![1.0, 1.0], vec![0.1], vec![0.1, 0.1], normal()).is_err());
    }

    #[test]
    fn wrong_innovation_law_rejected() {
        let err = ModelSpec::pgarch(vec![1.0], vec![0.1], vec![0.1], InnovationSpec::gamma_unit_mean(0));
        assert!(err.is_err());
    }

    #[test]
    fn persistence_flag() {
        let s = ModelSpec::pgarch(vec![1.; 2], vec![0.1; 2], vec![2.0, 0.4], normal()).unwrap();
        assert!(s.persistence_product_below_one());
        let s = ModelSpec::pgarch(vec![1.; 2], vec![0.1; 2], vec![2.0, 0.6], normal()).unwrap();
        assert!(!s.persistence_product_below_one());
    }

    proptest! {
        #[test]
        fn periodic_access(values in prop::collection::vec(0.01f64..10.0, 1..12), t in 0usize..200) {
            let nu = values.len();
            let t = t % (10 * nu);
            let v = PeriodicVector::new(Family::Omega, values.clone()).unwrap();
            prop_assert_eq!(v.at(t), values[t % nu]);
        }

        #[test]
        fn flatten_round_trip(raw in prop::collection::vec((0.01f64..5.0, 0.0f64..1.0, 0.0f64..1.0), 1..10)) {
            let omega = raw.iter().map(|r| r.0).collect();
            let alpha = raw.iter().map(|r| r.1).collect();
            let beta = raw.iter().map(|r| r.2).collect();
            let s = ModelSpec::pgarch(omega, alpha, beta, normal()).unwrap();
            let back = unflatten(ModelKind::Pgarch, &flatten(&s), None, *s.innovation()).unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
