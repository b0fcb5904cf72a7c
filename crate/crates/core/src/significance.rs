//! Bonferroni-corrected Z-tests on transform coefficients and the masked
//! reconstruction shared by the Fourier and wavelet reductions.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::model::{Family, FitResult, ModelSpec, PeriodicVector};

/// Two-sided Bonferroni critical value `Phi^-1(1 - alpha / (2 n_tests))`.
pub fn bonferroni_threshold(alpha: f64, n_tests: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if n_tests == 0 {
        return Ok(f64::INFINITY);
    }
    let n = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(n.inverse_cdf(1.0 - alpha / (2.0 * n_tests as f64)))
}

/// `Z_i = est_i / sqrt(R_ii / n)`; `NaN` where the variance is not positive.
pub fn z_scores(estimates: &[f64], cov: &DMatrix<f64>, n: usize) -> Result<Vec<f64>> {
    if cov.nrows() != estimates.len() || cov.ncols() != estimates.len() {
        return Err(Error::InvalidArgument("covariance does not match the coefficient count".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be >= 1".into()));
    }
    Ok(estimates
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let v = cov[(i, i)] / n as f64;
            if v > 0.0 && v.is_finite() {
                e / v.sqrt()
            } else {
                f64::NAN
            }
        })
        .collect())
}

/// Index 0 is always kept; untestable coefficients (`NaN` scores) are kept.
pub fn mask_from_scores(z: &[f64], threshold: f64) -> Vec<bool> {
    z.iter()
        .enumerate()
        .map(|(i, &v)| i == 0 || v.is_nan() || v.abs() > threshold)
        .collect()
}

/// Tests every coefficient but the first at family-wise level `alpha`.
pub fn significance_mask(estimates: &[f64], cov: &DMatrix<f64>, n: usize, alpha: f64) -> Result<Vec<bool>> {
    let threshold = bonferroni_threshold(alpha, estimates.len().saturating_sub(1))?;
    Ok(mask_from_scores(&z_scores(estimates, cov, n)?, threshold))
}

/// Transform coefficients of one parameter family together with their test.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformCoefs {
    pub family: Family,
    pub coefs: Vec<f64>,
    pub cov: DMatrix<f64>,
    pub z: Vec<f64>,
    pub mask: Vec<bool>,
    pub alpha_level: f64,
    pub threshold: f64,
    /// Period of the parameter vector before any extension.
    pub original_nu: usize,
}

impl TransformCoefs {
    pub fn retained(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Coefficients with the dropped entries set to zero.
    pub fn masked(&self) -> Vec<f64> {
        self.coefs
            .iter()
            .zip(&self.mask)
            .map(|(&c, &m)| if m { c } else { 0.0 })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Reduction {
    pub spec: ModelSpec,
    pub coefs: BTreeMap<Family, TransformCoefs>,
}

impl Reduction {
    pub fn n_parameters(&self) -> usize {
        self.coefs.values().map(TransformCoefs::retained).sum()
    }
}

pub(crate) trait Basis {
    /// Coefficients and their covariance for one family.
    fn forward(&self, x: &[f64], gamma: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)>;
    /// Reconstruction truncated to `nu` entries.
    fn inverse(&self, coefs: &[f64], nu: usize) -> Result<Vec<f64>>;
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    bonferroni_threshold(alpha, 1).map(|_| ())
}

pub(crate) fn test_family<B: Basis>(
    basis: &B,
    family: Family,
    x: &[f64],
    gamma: &DMatrix<f64>,
    n: usize,
    alpha: f64,
) -> Result<TransformCoefs> {
    let (coefs, cov) = basis.forward(x, gamma)?;
    let threshold = bonferroni_threshold(alpha, coefs.len().saturating_sub(1))?;
    let z = z_scores(&coefs, &cov, n)?;
    let mask = mask_from_scores(&z, threshold);
    Ok(TransformCoefs {
        family,
        coefs,
        cov,
        z,
        mask,
        alpha_level: alpha,
        threshold,
        original_nu: x.len(),
    })
}

pub(crate) fn reduce<B: Basis>(basis: &B, fit: &FitResult, alpha: f64) -> Result<Reduction> {
    check_alpha(alpha)?;
    let nu = fit.spec.nu();
    let mut spec = fit.spec.clone();
    let mut coefs = BTreeMap::new();
    for &family in fit.spec.kind().families() {
        let gamma = fit
            .cov
            .get(&family)
            .ok_or_else(|| Error::CovarianceUnavailable(format!("fit has no covariance block for {family}")))?;
        let x = fit.spec.param(family).values();
        let tc = test_family(basis, family, x, gamma, fit.n_cycles, alpha)?;
        let rebuilt = basis.inverse(&tc.masked(), nu)?;
        for (season, &value) in rebuilt.iter().enumerate() {
            let ok = value.is_finite() && if family.strictly_positive() { value > 0.0 } else { value >= -1e-12 };
            if !ok {
                return Err(Error::Positivity { family, season, value });
            }
        }
        let rebuilt = rebuilt.into_iter().map(|v| v.max(0.0)).collect();
        spec = spec.with_param(PeriodicVector::new(family, rebuilt)?)?;
        coefs.insert(family, tc);
    }
    Ok(Reduction { spec, coefs })
}
