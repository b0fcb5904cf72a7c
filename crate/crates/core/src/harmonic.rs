//! Fourier representation of periodic parameter vectors.
//!
//! Coefficients are ordered `(c_0, c_1, s_1, c_2, s_2, ...)` with a final
//! `c_{nu/2}` when `nu` is even, and satisfy
//!
//! ```text
//! X_t = c_0 + sum_r [ c_r cos(2 pi r t / nu) + s_r sin(2 pi r t / nu) ]
//! ```
//!
//! The map is `f = L Q X`, where `Q = P U` is real orthogonal and `L` is a
//! positive diagonal scaling.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{Family, FitResult, PeriodicVector};
use crate::significance::{self, Basis, Reduction, TransformCoefs};

pub use crate::significance::TransformCoefs as FourierCoefs;

#[derive(Debug, Clone, PartialEq)]
pub struct FourierTransform {
    nu: usize,
    /// Orthogonal core `P U`.
    q: DMatrix<f64>,
    /// Diagonal of `L`.
    scale: DVector<f64>,
    /// `L P U`.
    t: DMatrix<f64>,
}

impl FourierTransform {
    fn compute(nu: usize) -> Self {
        let n = nu as f64;
        let u = DMatrix::from_fn(nu, nu, |r, t| {
            Complex64::from_polar(n.powf(-0.5), -2.0 * PI * (r * t) as f64 / n)
        });
        let h = 0.5f64.sqrt();
        let mut p = DMatrix::<Complex64>::zeros(nu, nu);
        p[(0, 0)] = Complex64::new(1.0, 0.0);
        for r in 1..=(nu - 1) / 2 {
            p[(2 * r - 1, r)] = Complex64::new(h, 0.0);
            p[(2 * r - 1, nu - r)] = Complex64::new(h, 0.0);
            p[(2 * r, r)] = Complex64::new(0.0, h);
            p[(2 * r, nu - r)] = Complex64::new(0.0, -h);
        }
        if nu.is_multiple_of(2) {
            p[(nu - 1, nu / 2)] = Complex64::new(1.0, 0.0);
        }
        let pu = p * u;
        let max_imag = pu.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
        assert!(max_imag < 1e-10, "P U has imaginary residue {max_imag}");
        let q = pu.map(|z| z.re);

        let edge = n.powf(-0.5);
        let scale = DVector::from_fn(nu, |i, _| {
            if i == 0 || (nu.is_multiple_of(2) && i == nu - 1) {
                edge
            } else {
                (2.0 / n).sqrt()
            }
        });
        let t = DMatrix::from_diagonal(&scale) * &q;
        Self { nu, q, scale, t }
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    /// The orthogonal factor `P U`.
    pub fn orthogonal(&self) -> &DMatrix<f64> {
        &self.q
    }

    /// Diagonal of `L`.
    pub fn scale(&self) -> &DVector<f64> {
        &self.scale
    }

    /// The coefficient map `L P U`.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.t
    }
}

/// Transform for period `nu`, cached per `nu`.
pub fn build_transform(nu: usize) -> Result<Arc<FourierTransform>> {
    if nu == 0 {
        return Err(Error::InvalidArgument("nu must be >= 1".into()));
    }
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<FourierTransform>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.read().expect("transform cache poisoned").get(&nu) {
        return Ok(t.clone());
    }
    let t = Arc::new(FourierTransform::compute(nu));
    cache
        .write()
        .expect("transform cache poisoned")
        .entry(nu)
        .or_insert_with(|| t.clone());
    Ok(t)
}

pub fn analyze(x: &[f64]) -> Result<Vec<f64>> {
    let t = build_transform(x.len())?;
    Ok((t.matrix() * DVector::from_column_slice(x)).as_slice().to_vec())
}

pub fn analyze_vector(x: &PeriodicVector) -> Vec<f64> {
    analyze(x.values()).expect("periodic vectors are non-empty")
}

/// Evaluates the trigonometric sum for the coefficients `f`.
pub fn synthesize(f: &[f64]) -> Result<Vec<f64>> {
    let t = build_transform(f.len())?;
    let g = DVector::from_iterator(f.len(), f.iter().zip(t.scale().iter()).map(|(c, l)| c / l));
    Ok((t.orthogonal().transpose() * g).as_slice().to_vec())
}

/// `R = T Gamma T'`, the covariance of the coefficients.
pub fn propagate_covariance(gamma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if gamma.nrows() != gamma.ncols() {
        return Err(Error::InvalidArgument("covariance must be square".into()));
    }
    let t = build_transform(gamma.nrows())?;
    let mut r = t.matrix() * gamma * t.matrix().transpose();
    symmetrize(&mut r);
    Ok(r)
}

/// `Q Gamma Q'` with the orthogonal core; preserves the trace.
pub fn propagate_covariance_orthogonal(gamma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if gamma.nrows() != gamma.ncols() {
        return Err(Error::InvalidArgument("covariance must be square".into()));
    }
    let t = build_transform(gamma.nrows())?;
    let mut r = t.orthogonal() * gamma * t.orthogonal().transpose();
    symmetrize(&mut r);
    Ok(r)
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

pub fn significance_mask(f_hat: &[f64], r: &DMatrix<f64>, n: usize, alpha: f64) -> Result<Vec<bool>> {
    significance::significance_mask(f_hat, r, n, alpha)
}

/// Fourier coefficients, covariance and test result for one family.
pub fn test_family(family: Family, x: &[f64], gamma: &DMatrix<f64>, n: usize, alpha: f64) -> Result<TransformCoefs> {
    significance::test_family(&FourierBasis, family, x, gamma, n, alpha)
}

struct FourierBasis;

impl Basis for FourierBasis {
    fn forward(&self, x: &[f64], gamma: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
        if gamma.nrows() != x.len() {
            return Err(Error::InvalidArgument("covariance does not match the vector length".into()));
        }
        Ok((analyze(x)?, propagate_covariance(gamma)?))
    }

    fn inverse(&self, coefs: &[f64], _nu: usize) -> Result<Vec<f64>> {
        synthesize(coefs)
    }
}

/// Fourier-reduced model: every family keeps only its significant harmonics.
pub fn reduce_model(fit: &FitResult, alpha: f64) -> Result<Reduction> {
    significance::reduce(&FourierBasis, fit, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sine(c: f64, a: f64, nu: usize) -> Vec<f64> {
        (0..nu).map(|t| c + a * (2.0 * PI * t as f64 / nu as f64).sin()).collect()
    }

    #[test]
    fn orthogonal_core() {
        for nu in 1..=12 {
            let t = build_transform(nu).unwrap();
            let e = (t.orthogonal() * t.orthogonal().transpose() - DMatrix::identity(nu, nu)).abs().max();
            assert!(e < 1e-12, "nu {nu}: {e}");
        }
    }

    #[test]
    fn constant_is_dc_only() {
        for nu in 1..=9 {
            let f = analyze(&vec![2.5; nu]).unwrap();
            assert!((f[0] - 2.5).abs() < 1e-14);
            assert!(f[1..].iter().all(|v| v.abs() < 1e-14));
        }
    }

    #[test]
    fn design_vectors() {
        let f = analyze(&sine(0.7, 0.45, 7)).unwrap();
        let want = [0.7, 0.0, 0.45, 0.0, 0.0, 0.0, 0.0];
        for (a, b) in f.iter().zip(want) {
            assert!((a - b).abs() < 1e-14, "{f:?}");
        }
        let f = analyze(&sine(0.6, 0.15, 7)).unwrap();
        assert!((f[0] - 0.6).abs() < 1e-14 && (f[2] - 0.15).abs() < 1e-14);
    }

    #[test]
    fn two_point_case() {
        let f = analyze(&[3.0, 1.0]).unwrap();
        assert!((f[0] - 2.0).abs() < 1e-15 && (f[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn synthesize_matches_trig_sum() {
        let nu = 8;
        let f = [0.5, 0.1, -0.2, 0.3, 0.05, -0.4, 0.7, 0.25];
        let x = synthesize(&f).unwrap();
        for (t, xt) in x.iter().enumerate() {
            let w = 2.0 * PI * t as f64 / nu as f64;
            let mut v = f[0];
            for r in 1..=3 {
                v += f[2 * r - 1] * (r as f64 * w).cos() + f[2 * r] * (r as f64 * w).sin();
            }
            v += f[7] * (4.0 * w).cos();
            assert!((v - xt).abs() < 1e-13);
        }
    }

    #[test]
    fn dc_only_synthesis_is_constant() {
        let x = synthesize(&[1.3, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(x.iter().all(|v| (v - 1.3).abs() < 1e-14));
    }

    #[test]
    fn orthogonal_propagation_preserves_identity_and_trace() {
        let r = propagate_covariance_orthogonal(&DMatrix::identity(4, 4)).unwrap();
        assert!((r - DMatrix::identity(4, 4)).abs().max() < 1e-14);
        let g = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0, 5.0]));
        let r = propagate_covariance_orthogonal(&g).unwrap();
        assert!((r.trace() - 15.0).abs() < 1e-10);
    }

    #[test]
    fn rank_one_conjugation() {
        let v = DVector::from_vec(vec![0.3, -1.0, 0.5, 2.0, 0.1, 0.0, 1.1]);
        let r = propagate_covariance(&(&v * v.transpose())).unwrap();
        let tv = build_transform(7).unwrap().matrix() * &v;
        assert!((r - &tv * tv.transpose()).abs().max() < 1e-13);
    }

    #[test]
    fn zero_estimates_keep_only_level() {
        let r = DMatrix::identity(7, 7);
        let m = significance_mask(&[0.0; 7], &r, 100, 0.05).unwrap();
        assert_eq!(m, vec![true, false, false, false, false, false, false]);
    }

    #[test]
    fn noiseless_recovery() {
        let x = sine(0.7, 0.45, 7);
        let tc = test_family(Family::Omega, &x, &DMatrix::identity(7, 7), 1_000_000, 0.05).unwrap();
        assert_eq!(tc.mask, vec![true, false, true, false, false, false, false]);
    }

    proptest! {
        #[test]
        fn round_trip(x in prop::collection::vec(-5.0f64..5.0, 1..13)) {
            let back = synthesize(&analyze(&x).unwrap()).unwrap();
            for (a, b) in x.iter().zip(back) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn trace_preserved(d in prop::collection::vec(0.01f64..3.0, 2..13)) {
            let g = DMatrix::from_diagonal(&DVector::from_vec(d.clone()));
            let r = propagate_covariance_orthogonal(&g).unwrap();
            prop_assert!((r.trace() - d.iter().sum::<f64>()).abs() < 1e-10);
        }
    }
}
