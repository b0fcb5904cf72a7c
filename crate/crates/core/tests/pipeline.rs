use std::fs;
use std::path::Path;
use std::process::Command;

use periscope::cli::{self, ReductionChoice, RunConfig};
use periscope::persist::load_model;
use periscope::study::{ReductionMethod, Study, StudyDesign};
use periscope::wavelet::WaveletFamily;
use periscope::{pgarch, Error, InnovationSpec, ModelKind, ModelSpec};

fn write_series(path: &Path, x: &[f64]) {
    let mut s = String::from("date,value\n");
    for (i, v) in x.iter().enumerate() {
        s.push_str(&format!("d{i:06},{v}\n"));
    }
    fs::write(path, s).unwrap();
}

fn fourier_fixture(dir: &Path, seed: u64) -> std::path::PathBuf {
    let spec = StudyDesign::new(Study::FourierPgarch).unwrap().spec;
    let spec = spec.clone().with_innovation(InnovationSpec { seed, ..*spec.innovation() }).unwrap();
    let p = pgarch::simulate(&spec, 399 + 7 * 400 + 7, 399, (0.0, 1.0)).unwrap();
    let path = dir.join("series.csv");
    write_series(&path, &p.y);
    path
}

fn config(input: &Path, out: &Path, reduction: ReductionChoice) -> RunConfig {
    RunConfig {
        input: Some(input.to_path_buf()),
        column: Some("value".into()),
        nu: 7,
        kind: ModelKind::Pgarch,
        reduction,
        out_dir: out.to_path_buf(),
        ..RunConfig::default()
    }
}

#[test]
fn pipeline_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let input = fourier_fixture(dir.path(), 1);
    let out = dir.path().join("run");
    let cfg = config(&input, &out, ReductionChoice::Method(ReductionMethod::Fourier));
    let report = cli::run_pipeline(&cfg).unwrap();
    assert_eq!(report.n_holdout, 7);
    assert_eq!(report.n_estimation % 7, 0);
    for name in [
        "manifest.json",
        "model_full.json",
        "model_reduced.json",
        "coefficients.csv",
        "forecast_errors.csv",
        "forecasts.csv",
        "acf.csv",
        "ljung_box.csv",
        "series.svg",
        "acf_residuals.svg",
        "acf_squared_residuals.svg",
    ] {
        assert!(out.join(name).exists(), "{name} missing");
    }
    for f in &report.forecasts {
        assert!(f.rmsfe >= f.mafe);
    }
    let lags: Vec<usize> = report.ljung_box.iter().map(|l| l.lag).collect();
    assert_eq!(lags, vec![20, 30, 20, 30]);

    let (reduced, _) = load_model(out.join("model_reduced.json")).unwrap();
    assert_eq!(&reduced, report.final_spec());
    let (_, fit) = load_model(out.join("model_full.json")).unwrap();
    assert!(fit.is_some());

    for name in ["coefficients.csv", "forecast_errors.csv", "acf.csv", "ljung_box.csv", "forecasts.csv"] {
        let mut rdr = csv::Reader::from_path(out.join(name)).unwrap();
        let width = rdr.headers().unwrap().len();
        for rec in rdr.records() {
            assert_eq!(rec.unwrap().len(), width, "{name}");
        }
    }
    let coefs = fs::read_to_string(out.join("coefficients.csv")).unwrap();
    assert_eq!(coefs.lines().count(), 1 + 21);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "ok");
}

#[test]
fn pipeline_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let input = fourier_fixture(dir.path(), 2);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let method = ReductionChoice::Method(ReductionMethod::Wavelet(WaveletFamily::Daubechies(4)));
    cli::run_pipeline(&config(&input, &a, method)).unwrap();
    cli::run_pipeline(&config(&input, &b, method)).unwrap();
    for name in ["model_full.json", "model_reduced.json", "coefficients.csv", "forecast_errors.csv", "acf.csv", "ljung_box.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn constant_parameters_collapse_to_a_classical_model() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ModelSpec::pgarch(vec![0.3; 7], vec![0.1; 7], vec![0.8; 7], InnovationSpec::std_normal(8)).unwrap();
    let p = pgarch::simulate(&spec, 7 * 500 + 7 + 700, 700, (0.0, 1.0)).unwrap();
    let input = dir.path().join("flat.csv");
    write_series(&input, &p.y);
    let out = dir.path().join("run");
    let cfg = config(
        &input,
        &out,
        ReductionChoice::Method(ReductionMethod::Wavelet(WaveletFamily::LeastAsymmetric(5))),
    );
    let report = cli::run_pipeline(&cfg).unwrap();
    let r = report.reduction.as_ref().unwrap();
    assert_eq!(r.n_parameters(), 3);
    assert!(cli::is_collapsed(&r.spec));
    let classical = report.classical.as_ref().expect("classical model fitted");
    assert_eq!(classical.spec.nu(), 1);
    assert!(out.join("model_classical.json").exists());
    let names: Vec<&str> = report.forecasts.iter().map(|f| f.model.as_str()).collect();
    assert_eq!(names, vec!["full", "reduced", "classical"]);
}

#[test]
fn stage_failure_keeps_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let input = fourier_fixture(dir.path(), 3);
    let out = dir.path().join("run");
    let mut cfg = config(&input, &out, ReductionChoice::None);
    cfg.column = Some("volume".into());
    let err = cli::run_pipeline(&cfg).unwrap_err();
    match &err {
        Error::Stage { stage, source } => {
            assert_eq!(*stage, "ingest");
            assert!(matches!(**source, Error::MissingColumn { .. }));
        }
        e => panic!("unexpected {e}"),
    }
    let manifest = fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"failed\"") && manifest.contains("volume"));
}

#[test]
fn wavelet_comparison_covers_all_families() {
    let dir = tempfile::tempdir().unwrap();
    let input = fourier_fixture(dir.path(), 4);
    let mut cfg = config(&input, &dir.path().join("run"), ReductionChoice::None);
    cfg.compare_wavelets = true;
    let report = cli::run_pipeline(&cfg).unwrap();
    assert_eq!(report.wavelets.len(), 17);
    for row in &report.wavelets {
        assert!(row.error.is_some() || row.rmsfe.unwrap() >= row.mafe.unwrap());
    }
}

fn periscope() -> Command {
    Command::new(env!("CARGO_BIN_EXE_periscope"))
}

#[test]
fn binary_runs_simulate_fit_reduce_forecast() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let run = |args: &[&str]| {
        let o = periscope().args(args).output().unwrap();
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        String::from_utf8(o.stdout).unwrap()
    };
    let od = out.to_str().unwrap();
    run(&["--seed", "5", "--out-dir", od, "simulate", "--study", "fourier-pacd", "--n", "1407", "--burn-in", "196"]);
    let data = out.join("simulated.csv");
    let ds = data.to_str().unwrap();
    run(&["--out-dir", od, "fit", "--input", ds, "--column", "value", "--nu", "7", "--kind", "pacd"]);
    let model = out.join("model_full.json");
    let ms = model.to_str().unwrap();
    let text = run(&["--out-dir", od, "reduce", "--model", ms, "--method", "fourier"]);
    assert!(text.contains("retained coefficients"));
    let text = run(&["--out-dir", od, "forecast", "--model", ms, "--input", ds, "--column", "value"]);
    assert_eq!(text.lines().filter(|l| l.starts_with(char::is_numeric)).count(), 7);
    run(&["--out-dir", od, "diagnose", "--input", ds, "--column", "value", "--nu", "7", "--model", ms]);
    assert!(out.join("ljung_box.csv").exists());
}

#[test]
fn binary_config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let input = fourier_fixture(dir.path(), 6);
    let cfg_path = dir.path().join("run.toml");
    fs::write(
        &cfg_path,
        format!(
            "input = {:?}\ncolumn = \"value\"\nnu = 7\nreduction = \"wavelet:D(4)\"\nalpha = 0.5\nout_dir = {:?}\n",
            input.to_str().unwrap(),
            dir.path().join("cfg").to_str().unwrap()
        ),
    )
    .unwrap();
    let flag_out = dir.path().join("flag");
    let o = periscope()
        .args(["--config", cfg_path.to_str().unwrap(), "--out-dir", flag_out.to_str().unwrap()])
        .args(["pipeline", "--alpha", "0.05"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(flag_out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["alpha"], 0.05);
    assert_eq!(manifest["config"]["reduction"], "wavelet:D(4)");
    assert!(!dir.path().join("cfg").exists());
}

#[test]
fn binary_reports_errors_with_nonzero_exit() {
    let o = periscope().args(["pipeline", "--input", "/nonexistent.csv", "--column", "x"]).output().unwrap();
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("ingest stage failed"), "{err}");
}

#[test]
fn repro_sim_single_replication_is_reproducible() {
    let a = cli::repro_sim(Study::WaveletPacd, 1, 17).unwrap();
    let b = cli::repro_sim(Study::WaveletPacd, 1, 17).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert!(cli::study_report(&a).starts_with("wavelet-pacd"));
}
