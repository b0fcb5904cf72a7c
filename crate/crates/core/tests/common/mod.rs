#![allow(dead_code)]

use nalgebra::DMatrix;

pub const HAAR8: [[f64; 8]; 8] = [
    [0.35, 0.35, 0.35, 0.35, 0.35, 0.35, 0.35, 0.35],
    [0.35, 0.35, 0.35, 0.35, -0.35, -0.35, -0.35, -0.35],
    [0.50, 0.50, -0.50, -0.50, 0.00, 0.00, 0.00, 0.00],
    [0.00, 0.00, 0.00, 0.00, 0.50, 0.50, -0.50, -0.50],
    [0.71, -0.71, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00],
    [0.00, 0.00, 0.71, -0.71, 0.00, 0.00, 0.00, 0.00],
    [0.00, 0.00, 0.00, 0.00, 0.71, -0.71, 0.00, 0.00],
    [0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.71, -0.71],
];

pub const D5_8: [[f64; 8]; 8] = [
    [0.35, 0.35, 0.35, 0.35, 0.35, 0.35, 0.35, 0.35],
    [-0.45, -0.45, -0.29, 0.11, 0.45, 0.45, 0.29, -0.11],
    [-0.52, 0.23, 0.63, 0.16, -0.11, 0.08, 0.00, -0.48],
    [-0.11, 0.08, 0.00, -0.48, -0.52, 0.23, 0.63, 0.16],
    [0.61, -0.15, -0.01, -0.08, -0.03, 0.24, 0.14, -0.72],
    [0.14, -0.72, 0.61, -0.15, -0.01, -0.08, -0.03, 0.24],
    [-0.03, 0.24, 0.14, -0.72, 0.61, -0.15, -0.01, -0.08],
    [-0.01, -0.08, -0.03, 0.24, 0.14, -0.72, 0.61, -0.15],
];

pub const D8_8: [[f64; 8]; 8] = [
    [0.35, 0.35, 0.35, 0.35, 0.35, 0.35, 0.35, 0.35],
    [0.33, -0.02, -0.36, -0.51, -0.33, 0.02, 0.36, 0.51],
    [-0.49, -0.62, 0.00, 0.28, 0.02, 0.10, 0.47, 0.25],
    [0.02, 0.10, 0.47, 0.25, -0.49, -0.62, 0.00, 0.28],
    [0.27, -0.04, 0.13, 0.00, -0.28, 0.02, 0.59, -0.69],
    [0.59, -0.69, 0.27, -0.04, 0.13, 0.00, -0.28, 0.02],
    [-0.28, 0.02, 0.59, -0.69, 0.27, -0.04, 0.13, 0.00],
    [0.13, 0.00, -0.28, 0.02, 0.59, -0.69, 0.27, -0.04],
];

pub const LA5_8: [[f64; 8]; 8] = [
    [0.35, 0.35, 0.35, 0.35, 0.35, 0.35, 0.35, 0.35],
    [-0.36, -0.49, -0.36, -0.07, 0.36, 0.49, 0.36, 0.07],
    [0.01, 0.18, -0.01, 0.11, 0.52, 0.28, -0.52, -0.58],
    [0.52, 0.28, -0.52, -0.58, 0.01, 0.18, -0.01, 0.11],
    [0.05, -0.01, -0.18, -0.02, 0.63, -0.72, 0.20, 0.04],
    [0.20, 0.04, 0.05, -0.01, -0.18, -0.02, 0.63, -0.72],
    [0.63, -0.72, 0.20, 0.04, 0.05, -0.01, -0.18, -0.02],
    [-0.18, -0.02, 0.63, -0.72, 0.20, 0.04, 0.05, -0.01],
];

/// Largest entry-wise distance between `m` and `golden`, allowing each row
/// to match up to sign.
pub fn golden_distance(m: &DMatrix<f64>, golden: &[[f64; 8]; 8]) -> f64 {
    (0..8)
        .map(|i| {
            let d = |s: f64| (0..8).map(|j| (s * m[(i, j)] - golden[i][j]).abs()).fold(0.0, f64::max);
            d(1.0).min(d(-1.0))
        })
        .fold(0.0, f64::max)
}

/// Brute-force Ljung-Box: direct sums and a chi-square tail from the
/// regularized incomplete gamma function evaluated by series/continued fraction.
pub fn ljung_box_reference(x: &[f64], lag: usize) -> (f64, f64) {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let mut c0 = 0.0;
    for v in x {
        c0 += (v - mean) * (v - mean);
    }
    let mut q = 0.0;
    for k in 1..=lag {
        let mut ck = 0.0;
        for t in k..n {
            ck += (x[t] - mean) * (x[t - k] - mean);
        }
        let r = ck / c0;
        q += r * r / (n - k) as f64;
    }
    q *= n as f64 * (n as f64 + 2.0);
    (q, upper_gamma_regularized(lag as f64 / 2.0, q / 2.0))
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos, g = 7, n = 9.
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + 7.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

fn upper_gamma_regularized(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let lead = (-x + a * x.ln() - ln_gamma(a)).exp();
    if x < a + 1.0 {
        let mut sum = 1.0 / a;
        let mut term = sum;
        let mut ap = a;
        for _ in 0..10_000 {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * 1e-16 {
                break;
            }
        }
        1.0 - sum * lead
    } else {
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        lead * h
    }
}
