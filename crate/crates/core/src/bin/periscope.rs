use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use periscope::cli::{self, ReductionChoice, RunConfig};
use periscope::diagnostics::{acf, descriptive_stats, ljung_box, season_slice};
use periscope::persist::{load_model, save_model};
use periscope::study::{self, Study};
use periscope::{Error, InnovationSpec, ModelKind, ModelSpec, Result};

#[derive(Parser)]
#[command(name = "periscope", version, about = "Periodic GARCH / ACD fitting with Fourier and wavelet reduction")]
struct Cli {
    /// Seed for simulation and the global search.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// TOML run configuration; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct DataArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    column: Option<String>,
    /// Treat the column as prices and model percentage log returns.
    #[arg(long)]
    returns: bool,
    #[arg(long)]
    nu: Option<usize>,
    /// pgarch or pacd.
    #[arg(long)]
    kind: Option<ModelKind>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate from a model file or a built-in study design.
    Simulate {
        #[arg(long, conflicts_with = "study", required_unless_present = "study")]
        model: Option<PathBuf>,
        #[arg(long)]
        study: Option<Study>,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        burn_in: usize,
        #[arg(long, default_value = "simulated.csv")]
        output: String,
    },
    /// Fit the full periodic model to a CSV column.
    Fit {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        global_search: bool,
    },
    /// Reduce a fitted model file by Fourier or wavelet significance.
    Reduce {
        #[arg(long)]
        model: PathBuf,
        /// fourier or wavelet:<family>.
        #[arg(long)]
        method: Option<ReductionChoice>,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Forecast from the end of a series with a model file.
    Forecast {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Descriptive statistics, ACF and Ljung-Box tests for a series or a model's residuals.
    Diagnose {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Full fit, reduce, forecast and diagnose run.
    Pipeline {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        reduction: Option<ReductionChoice>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        holdout: Option<usize>,
        #[arg(long)]
        global_search: bool,
        #[arg(long)]
        compare_wavelets: bool,
    },
    /// Re-run one of the simulation studies.
    ReproSim {
        #[arg(long)]
        study: Study,
        #[arg(long, default_value_t = 100)]
        replications: usize,
    },
}

fn base_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(d) = &cli.out_dir {
        cfg.out_dir = d.clone();
    }
    Ok(cfg)
}

fn apply_data(cfg: &mut RunConfig, d: &DataArgs) {
    if let Some(v) = &d.input {
        cfg.input = Some(v.clone());
    }
    if let Some(v) = &d.column {
        cfg.column = Some(v.clone());
    }
    if d.returns {
        cfg.returns = true;
    }
    if let Some(v) = d.nu {
        cfg.nu = v;
    }
    if let Some(v) = d.kind {
        cfg.kind = v;
    }
}

fn out_path(cfg: &RunConfig, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(&cfg.out_dir).map_err(|e| io_err(&cfg.out_dir, e))?;
    Ok(cfg.out_dir.join(name))
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| io_err(path, e))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = base_config(&cli)?;
    match &cli.command {
        Command::Simulate {
            model,
            study: which,
            n,
            burn_in,
            output,
        } => {
            let spec: ModelSpec = match (model, which) {
                (Some(p), _) => load_model(p)?.0,
                (None, Some(s)) => study::StudyDesign::new(*s)?.spec,
                (None, None) => unreachable!("clap requires one source"),
            };
            let spec = spec.clone().with_innovation(InnovationSpec {
                seed: cfg.seed,
                ..*spec.innovation()
            })?;
            let (x, scale) = match spec.kind() {
                ModelKind::Pgarch => {
                    let p = periscope::pgarch::simulate(&spec, n + burn_in, *burn_in, (0.0, 1.0))?;
                    (p.y, p.h)
                }
                ModelKind::Pacd => {
                    let p = periscope::pacd::simulate(&spec, n + burn_in, *burn_in, (1.0, 1.0))?;
                    (p.u, p.psi)
                }
            };
            let mut csv = String::from("t,value,scale\n");
            for (t, (v, s)) in x.iter().zip(&scale).enumerate() {
                csv.push_str(&format!("{t},{v},{s}\n"));
            }
            write(&out_path(&cfg, output)?, &csv)
        }
        Command::Fit { data, global_search } => {
            apply_data(&mut cfg, data);
            cfg.global_search |= global_search;
            cfg.validate()?;
            let x = cfg.load_series()?.values;
            let n = x.len() - x.len() % cfg.nu;
            let sample = &x[x.len() - n..];
            let fit = cli::fit_model(cfg.kind, sample, cfg.nu, &cfg.fit_options())?;
            println!(
                "{} nu={} cycles={} objective={:.6} converged={}",
                cfg.kind, cfg.nu, fit.n_cycles, fit.objective, fit.converged
            );
            for p in fit.spec.params() {
                println!("{:>8}: {:?}", p.family().to_string(), p.values());
            }
            let path = out_path(&cfg, "model_full.json")?;
            save_model(&fit.spec, Some(&fit), &path)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Reduce { model, method, alpha } => {
            if let Some(m) = method {
                cfg.reduction = *m;
            }
            if let Some(a) = alpha {
                cfg.alpha = *a;
            }
            cfg.validate()?;
            let (_, fit) = load_model(model)?;
            let fit = fit.ok_or_else(|| Error::InvalidArgument("model file has no fit section".into()))?;
            let method = match cfg.reduction {
                ReductionChoice::Method(m) => m,
                ReductionChoice::None => return Err(Error::InvalidArgument("choose --method fourier or wavelet:<family>".into())),
            };
            let r = method.reduce(&fit, cfg.alpha)?;
            println!("{method}: {} retained coefficients", r.n_parameters());
            for p in r.spec.params() {
                println!("{:>8}: {:?}", p.family().to_string(), p.values());
            }
            write(&out_path(&cfg, "coefficients.csv")?, &cli::coefficient_table(&r))?;
            let path = out_path(&cfg, "model_reduced.json")?;
            save_model(&r.spec, None, &path)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Forecast { model, data, horizon } => {
            apply_data(&mut cfg, data);
            let (spec, _) = load_model(model)?;
            cfg.nu = spec.nu();
            let x = cfg.load_series()?.values;
            let n = x.len() - x.len() % spec.nu();
            let sample = &x[x.len() - n..];
            let start = study::default_start(spec.kind(), sample, spec.nu())?;
            let h = horizon.unwrap_or(spec.nu());
            let f = study::holdout_forecast(&spec, sample, start, h)?;
            let mut csv = String::from("step,forecast\n");
            for (i, v) in f.iter().enumerate() {
                csv.push_str(&format!("{},{v}\n", i + 1));
            }
            print!("{csv}");
            write(&out_path(&cfg, "forecast.csv")?, &csv)
        }
        Command::Diagnose { data, model } => {
            apply_data(&mut cfg, data);
            let mut x = cfg.load_series()?.values;
            let mut label = "series";
            if let Some(p) = model {
                let (spec, _) = load_model(p)?;
                cfg.nu = spec.nu();
                let n = x.len() - x.len() % spec.nu();
                let sample = x[x.len() - n..].to_vec();
                let start = study::default_start(spec.kind(), &sample, spec.nu())?;
                x = study::residuals(&spec, &sample, start)?;
                label = "residuals";
            }
            let mut out = String::from("scope,n,min,max,mean,sd,skewness,kurtosis\n");
            let mut row = |scope: String, v: &[f64]| -> Result<()> {
                let d = descriptive_stats(v)?;
                let o = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
                out.push_str(&format!(
                    "{scope},{},{},{},{},{},{},{}\n",
                    d.n,
                    d.min,
                    d.max,
                    d.mean,
                    d.sd,
                    o(d.skewness),
                    o(d.kurtosis)
                ));
                Ok(())
            };
            row("all".into(), &x)?;
            for s in 0..cfg.nu {
                row(format!("season{s}"), &season_slice(&x, cfg.nu, s)?)?;
            }
            print!("{out}");
            write(&out_path(&cfg, "descriptive.csv")?, &out)?;
            let sq: Vec<f64> = x.iter().map(|v| v * v).collect();
            let mut lb = String::from("series,lag,q,p_value\n");
            for (name, s) in [(label.to_string(), &x), (format!("squared_{label}"), &sq)] {
                for lag in [20, 30] {
                    if lag < s.len() {
                        let t = ljung_box(s, lag)?;
                        lb.push_str(&format!("{name},{lag},{},{}\n", t.q, t.p_value));
                    }
                }
            }
            print!("{lb}");
            write(&out_path(&cfg, "ljung_box.csv")?, &lb)?;
            let lags = 30.min(x.len() - 1);
            let a = acf(&x, lags)?;
            write(&out_path(&cfg, "acf.svg")?, &cli::acf_svg(&format!("ACF of {label}"), &a, x.len()))
        }
        Command::Pipeline {
            data,
            reduction,
            alpha,
            holdout,
            global_search,
            compare_wavelets,
        } => {
            apply_data(&mut cfg, data);
            if let Some(r) = reduction {
                cfg.reduction = *r;
            }
            if let Some(a) = alpha {
                cfg.alpha = *a;
            }
            if let Some(h) = holdout {
                cfg.holdout = Some(*h);
            }
            cfg.global_search |= global_search;
            cfg.compare_wavelets |= compare_wavelets;
            let report = cli::run_pipeline(&cfg)?;
            println!(
                "estimation points {}, holdout {}",
                report.n_estimation, report.n_holdout
            );
            for f in &report.forecasts {
                println!("{:>10}: {:>3} parameters, RMSFE {:.6}, MAFE {:.6}", f.model, f.n_parameters, f.rmsfe, f.mafe);
            }
            for l in &report.ljung_box {
                println!("Ljung-Box {} lag {}: Q = {:.4}, p = {:.4}", l.series, l.lag, l.q, l.p_value);
            }
            println!("artifacts in {}", report.out_dir.display());
            Ok(())
        }
        Command::ReproSim { study: which, replications } => {
            let s = cli::repro_sim(*which, *replications, cfg.seed)?;
            print!("{}", s.to_csv());
            println!("{}", cli::study_report(&s));
            write(&out_path(&cfg, &format!("{which}.csv"))?, &s.to_csv())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
