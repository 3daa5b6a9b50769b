//! `hyperkern` command-line interface.
//!
//! Exit codes: 0 success, 1 a check suite failed, 2 unreadable or invalid
//! input, 3 a point outside the ball or a bad curvature, 4 training diverged.

use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hyperkern::checks::{check_isometry, identity_sweeps, psd_sweep};
use hyperkern::io::{
    gram_from_features, read_features, write_gram, write_loss_trace, write_reports, CoefficientReport,
    ParamsSnapshot, ReportRecord,
};
use hyperkern::learning::{evaluate, train, Workspace};
use hyperkern::{Curvature, Error, KernelVariant, RunConfig};

#[derive(Parser)]
#[command(name = "hyperkern", version, about = "Hyperbolic de Branges-Rovnyak kernels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gram matrix of a feature CSV, written as CSV.
    Gram {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run verification suites and write JSON-lines reports.
    Check {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Report file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides every tolerance of the selected suites.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Train on the synthetic task and write a run directory.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate a parameter snapshot on the configured task.
    Eval {
        /// Defaults to the config stored in the snapshot.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Psd,
    Isometry,
    Identities,
    All,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gram {
            config,
            features,
            out,
            seed,
        } => cmd_gram(config.as_deref(), &features, &out, seed),
        Command::Check {
            suite,
            config,
            out,
            seed,
            tol,
        } => cmd_check(suite, config.as_deref(), out.as_deref(), seed, tol),
        Command::Train { config, out, seed } => cmd_train(&config, &out, seed),
        Command::Eval {
            config,
            params,
            out,
            seed,
        } => cmd_eval(config.as_deref(), &params, out.as_deref(), seed),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Geometry(_) | Error::InvalidCurvature(_) | Error::CurvatureMismatch(..) => 3,
        Error::Divergence { .. } => 4,
        _ => 2,
    }
}

fn read_text(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<RunConfig, Error> {
    let mut cfg = match path {
        Some(p) => RunConfig::from_json(&read_text(p)?)?,
        None => RunConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn create(path: &Path) -> Result<io::BufWriter<fs::File>, Error> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(io::BufWriter::new(fs::File::create(path)?))
}

fn cmd_gram(config: Option<&Path>, features: &Path, out: &Path, seed: Option<u64>) -> Result<bool, Error> {
    let cfg = load_config(config, seed)?;
    let file = fs::File::open(features)?;
    let table = read_features(BufReader::new(file))?;
    let g = gram_from_features(&cfg, &table.rows)?;
    let mut w = create(out)?;
    write_gram(&mut w, &g)?;
    w.flush()?;
    eprintln!("wrote {}x{} gram matrix ({}) to {}", g.size(), g.size(), g.fingerprint(), out.display());
    Ok(true)
}

fn cmd_check(
    suite: Suite,
    config: Option<&Path>,
    out: Option<&Path>,
    seed: Option<u64>,
    tol: Option<f64>,
) -> Result<bool, Error> {
    if let Some(t) = tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidConfig("--tol must be positive".into()));
        }
    }
    let cfg = load_config(config, seed)?;
    let checks = &cfg.checks;
    let mut records = Vec::new();
    if matches!(suite, Suite::Psd | Suite::All) {
        records.extend(psd_sweep(&checks.psd_spec(cfg.seed, tol))?.into_iter().map(ReportRecord::Psd));
    }
    if matches!(suite, Suite::Isometry | Suite::All) {
        let iso = &checks.isometry;
        let mut cell = 0u64;
        for &c in &iso.curvatures {
            for &n in &iso.dims {
                let report = check_isometry(
                    Curvature::new(c)?,
                    n,
                    iso.trials,
                    tol.unwrap_or(iso.tol),
                    cfg.seed.wrapping_add(cell),
                )?;
                records.push(ReportRecord::Sweep(report));
                cell += 1;
            }
        }
    }
    if matches!(suite, Suite::Identities | Suite::All) {
        for spec in checks.identity_specs(cfg.seed, tol) {
            records.extend(identity_sweeps(&spec)?.into_iter().map(ReportRecord::Sweep));
        }
    }

    let passed = records.iter().filter(|r| r.passed()).count();
    match out {
        Some(path) => {
            let mut w = create(path)?;
            write_reports(&mut w, &records)?;
            w.flush()?;
        }
        None => write_reports(io::stdout().lock(), &records)?,
    }
    for r in records.iter().filter(|r| !r.passed()) {
        eprintln!("FAIL {}", serde_json::to_string(r)?);
    }
    eprintln!("{passed}/{} checks passed", records.len());
    Ok(passed == records.len())
}

fn cmd_train(config: &Path, out: &Path, seed: Option<u64>) -> Result<bool, Error> {
    let cfg = load_config(Some(config), seed)?;
    let run = train(&cfg)?;
    fs::create_dir_all(out)?;

    let mut w = create(&out.join("loss_trace.csv"))?;
    write_loss_trace(&mut w, &run.loss_trace)?;
    w.flush()?;

    let snapshot = ParamsSnapshot::new(&cfg, &run.final_params)?;
    fs::write(out.join("params.json"), snapshot.to_json() + "\n")?;

    let mut records = vec![
        ReportRecord::Eval(run.initial_eval.clone()),
        ReportRecord::Eval(run.final_eval.clone()),
    ];
    records.extend(run.baselines.iter().cloned().map(ReportRecord::Eval));
    if cfg.kernel.variant == KernelVariant::AhRad {
        records.push(ReportRecord::Coefficients(CoefficientReport {
            variant: cfg.kernel.variant.name().to_string(),
            truncation: cfg.kernel.truncation(),
            alphas: snapshot.derived.alphas.clone(),
            raw: run.final_params.radial_raws.clone(),
        }));
    }
    let mut w = create(&out.join("report.jsonl"))?;
    write_reports(&mut w, &records)?;
    w.flush()?;

    let e0 = &run.initial_eval;
    let e1 = &run.final_eval;
    eprintln!(
        "{} steps; accuracy {:.4} -> {:.4} (+/- {:.4}); wrote {}",
        run.loss_trace.len(),
        e0.accuracy,
        e1.accuracy,
        e1.ci95,
        out.display()
    );
    Ok(true)
}

fn cmd_eval(config: Option<&Path>, params: &Path, out: Option<&Path>, seed: Option<u64>) -> Result<bool, Error> {
    let snapshot = ParamsSnapshot::from_json(&read_text(params)?)?;
    let mut cfg = match config {
        Some(_) => load_config(config, None)?,
        None => snapshot.config.clone(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let p = snapshot.params();
    cfg.check_params(p)?;
    let ws = Workspace::new(&cfg)?;
    let report = evaluate(p, &cfg, &ws.eval_set)?;
    let record = ReportRecord::Eval(report.clone());
    match out {
        Some(path) => {
            let mut w = create(path)?;
            write_reports(&mut w, std::slice::from_ref(&record))?;
            w.flush()?;
        }
        None => write_reports(io::stdout().lock(), std::slice::from_ref(&record))?,
    }
    eprintln!(
        "{} episodes: accuracy {:.4} +/- {:.4}",
        report.episodes, report.accuracy, report.ci95
    );
    Ok(true)
}
