mod common;

use common::*;
use periscope::harmonic;
use periscope::wavelet::{self, WaveletFamily};
use proptest::prelude::*;

#[test]
fn appendix_matrices_match_to_two_decimals() {
    let cases = [
        (WaveletFamily::HAAR, &HAAR8),
        (WaveletFamily::Daubechies(5), &D5_8),
        (WaveletFamily::Daubechies(8), &D8_8),
        (WaveletFamily::LeastAsymmetric(5), &LA5_8),
    ];
    for (w, golden) in cases {
        let m = wavelet::transform_matrix(w, 8).unwrap();
        let d = golden_distance(&m, golden);
        assert!(d <= 0.005 + 1e-9, "{w}: max deviation {d}");
    }
}

#[test]
fn every_family_is_orthogonal() {
    for w in WaveletFamily::all() {
        for m in [2usize, 4, 8, 16, 32] {
            let t = wavelet::transform_matrix(w, m).unwrap();
            let e = (&*t * t.transpose() - nalgebra::DMatrix::identity(m, m)).abs().max();
            assert!(e < 1e-10, "{w} M={m}: {e}");
        }
    }
}

#[test]
fn non_power_of_two_rejected() {
    assert!(wavelet::dwt(&[1.0; 6], WaveletFamily::HAAR).is_err());
    assert!("D(11)".parse::<WaveletFamily>().is_err());
    assert!("LA(3)".parse::<WaveletFamily>().is_err());
}

#[test]
fn fourier_and_wavelet_agree_on_the_level() {
    let x = [0.3, 0.9, 1.4, 0.2, 0.8, 1.1, 0.5, 0.6];
    let mean = x.iter().sum::<f64>() / 8.0;
    let f = harmonic::analyze(&x).unwrap();
    let w = wavelet::dwt(&x, WaveletFamily::Daubechies(4)).unwrap();
    assert!((f[0] - mean).abs() < 1e-14);
    assert!((w[0] - mean * 8f64.sqrt()).abs() < 1e-12);
}

proptest! {
    #[test]
    fn dwt_round_trip(x in prop::collection::vec(-10.0f64..10.0, 16), pick in 0usize..17) {
        let w = WaveletFamily::all()[pick];
        let back = wavelet::idwt(&wavelet::dwt(&x, w).unwrap(), w).unwrap();
        for (a, b) in x.iter().zip(back) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dwt_preserves_energy(x in prop::collection::vec(-10.0f64..10.0, 8), pick in 0usize..17) {
        let w = WaveletFamily::all()[pick];
        let c = wavelet::dwt(&x, w).unwrap();
        let e0: f64 = x.iter().map(|v| v * v).sum();
        let e1: f64 = c.iter().map(|v| v * v).sum();
        prop_assert!((e0 - e1).abs() < 1e-10 * e0.max(1.0));
    }

    #[test]
    fn fourier_is_linear(x in prop::collection::vec(-5.0f64..5.0, 7), y in prop::collection::vec(-5.0f64..5.0, 7), a in -3.0f64..3.0) {
        let z: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + v).collect();
        let fx = harmonic::analyze(&x).unwrap();
        let fy = harmonic::analyze(&y).unwrap();
        let fz = harmonic::analyze(&z).unwrap();
        for i in 0..7 {
            prop_assert!((fz[i] - (a * fx[i] + fy[i])).abs() < 1e-12);
        }
    }
}
