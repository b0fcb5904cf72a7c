use periscope::diagnostics::lyapunov_estimate;
use periscope::persist::{from_json_str, load_model, save_model, to_json_string};
use periscope::{pacd, pgarch, FitOptions, InnovationLaw, InnovationSpec, ModelSpec};

fn seasonal_pgarch(seed: u64) -> ModelSpec {
    ModelSpec::pgarch(
        vec![0.4, 0.8, 0.6],
        vec![0.10, 0.25, 0.15],
        vec![0.60, 0.50, 0.70],
        InnovationSpec::new(InnovationLaw::Ged { shape: 1.8 }, seed).unwrap(),
    )
    .unwrap()
}

#[test]
fn pgarch_recovers_seasonal_parameters() {
    let spec = seasonal_pgarch(11);
    let p = pgarch::simulate(&spec, 3 * 3000 + 300, 300, (0.0, 1.0)).unwrap();
    let fit = pgarch::fit(
        &p.y,
        3,
        &FitOptions {
            start: Some(p.start),
            ..FitOptions::default()
        },
    )
    .unwrap();
    fit.validate().unwrap();
    assert!(fit.converged);
    for (est, truth) in fit.spec.params().zip(spec.params()) {
        for (a, b) in est.values().iter().zip(truth.values()) {
            assert!((a - b).abs() < 0.2, "{}: {a} vs {b}", est.family());
        }
    }
    for m in fit.cov.values() {
        assert!((m - m.transpose()).abs().max() < 1e-10);
        assert!(m.symmetric_eigenvalues().iter().all(|&e| e > 0.0));
    }
    assert!(fit.fourth_moment.unwrap() > 2.0);
}

#[test]
fn pacd_recovers_seasonal_parameters() {
    let spec = ModelSpec::pacd(
        vec![0.3, 0.6],
        vec![0.15, 0.25],
        vec![0.6, 0.5],
        vec![0.5, 0.8],
        InnovationSpec::gamma_unit_mean(4),
    )
    .unwrap();
    let p = pacd::simulate(&spec, 2 * 4000 + 200, 200, (1.0, 1.0)).unwrap();
    let fit = pacd::fit(
        &p.u,
        2,
        &FitOptions {
            start: Some(p.start),
            ..FitOptions::default()
        },
    )
    .unwrap();
    for (est, truth) in fit.spec.params().zip(spec.params()) {
        for (a, b) in est.values().iter().zip(truth.values()) {
            assert!((a - b).abs() < 0.2, "{}: {a} vs {b}", est.family());
        }
    }
}

#[test]
fn white_noise_is_a_degenerate_garch() {
    let spec = ModelSpec::pgarch(vec![1.0], vec![0.0], vec![0.0], InnovationSpec::std_normal(5)).unwrap();
    let p = pgarch::simulate(&spec, 5000, 0, (0.0, 1.0)).unwrap();
    let fit = pgarch::fit(&p.y, 1, &FitOptions::default()).unwrap();
    let var = p.y.iter().map(|v| v * v).sum::<f64>() / p.y.len() as f64;
    let a = fit.spec.param(periscope::Family::Alpha).values()[0];
    let b = fit.spec.param(periscope::Family::Beta).values()[0];
    let w = fit.spec.param(periscope::Family::Omega).values()[0];
    assert!(a < 0.05, "alpha {a}");
    assert!((0.0..=1.0).contains(&b));
    assert!((w / (1.0 - b) - var).abs() < 0.1 * var, "omega {w}, beta {b}, var {var}");
    assert!(fit.objective.is_finite());
}

#[test]
fn fit_survives_json_round_trip() {
    let spec = seasonal_pgarch(2);
    let p = pgarch::simulate(&spec, 3 * 600, 0, (0.0, 1.0)).unwrap();
    let fit = pgarch::fit(&p.y, 3, &FitOptions::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    save_model(&fit.spec, Some(&fit), &path).unwrap();
    let (spec2, fit2) = load_model(&path).unwrap();
    let fit2 = fit2.unwrap();
    assert_eq!(spec2, fit.spec);
    assert_eq!(fit2.cov, fit.cov);
    assert_eq!(fit2.residuals, fit.residuals);
    assert_eq!(to_json_string(&spec2, Some(&fit2)).unwrap(), to_json_string(&fit.spec, Some(&fit)).unwrap());
}

#[test]
fn corrupt_model_files_are_rejected() {
    assert!(from_json_str("{}").is_err());
    assert!(from_json_str("{\"schema\":\"periscope/1\",\"kind\":\"PGARCH\",\"nu\":1,\"params\":{},\"innovation\":{\"law\":\"StdNormal\",\"seed\":0},\"fit\":null}").is_err());
    assert!(load_model("/nonexistent/model.json").is_err());
}

#[test]
fn forecasts_converge_to_the_seasonal_fixed_point() {
    let spec = seasonal_pgarch(0);
    let f = pgarch::forecast(&spec, (0.0, 1.0), 3 * 400).unwrap();
    let tail = &f[f.len() - 6..];
    for s in 0..3 {
        assert!((tail[s] - tail[s + 3]).abs() < 1e-9);
    }
}

#[test]
fn stable_designs_have_negative_exponent() {
    let g = lyapunov_estimate(&seasonal_pgarch(0), 3 * 2000, 4, 1).unwrap();
    assert!(g < 0.0, "{g}");
}
