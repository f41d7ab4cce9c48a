//! Command-line front end for block-minima spot volatility estimation:
//! synthetic market days, bias-map calibration, spot estimation, and the
//! Monte-Carlo study suite. All outputs are CSV files with headers.

use clap::{Parser, Subcommand};
use spotmin::blocks::{local_minima, partition_with};
use spotmin::csvio;
use spotmin::estimators::{volatility_curve, BiasCorrection, EstimatorConfig};
use spotmin::sim::{add_jumps, simulate_path, synthesize_observations};
use spotmin_cli::experiments::{
    self, load_psi_table, run_calibrate_psi, run_coverage, run_curve_demo, run_table1,
    run_table2, sidecar_path, Table1Report,
};
use spotmin_cli::specfile::{CorrectionSpec, ExperimentSpec};
use spotmin_cli::CliError;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "spotmin",
    about = "Spot volatility from block minima of noisy high-frequency prices",
    version
)]
struct Cli {
    /// Experiment spec file (TOML); defaults apply when omitted.
    #[arg(long, global = true)]
    spec: Option<PathBuf>,

    /// Master seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory override.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one market day and write observations.csv.
    Simulate,
    /// Estimate an intraday volatility curve from an observation CSV.
    Estimate {
        /// Input CSV with a 'y' column (optionally x, spot_var).
        #[arg(long)]
        input: PathBuf,
    },
    /// Build a bias table (psi_table.csv plus metadata sidecar).
    CalibratePsi,
    /// Bias slopes per block length (table1.csv).
    Table1,
    /// Fixed-path summary statistics per (nh, K) cell (table2.csv).
    Table2 {
        /// Slope artifact from a previous table1 run
        /// (default: <out>/table1.csv).
        #[arg(long)]
        slopes: Option<PathBuf>,
    },
    /// Monte-Carlo intraday curve with bands (curve.csv, bands.csv).
    Curve,
    /// Empirical confidence-interval coverage (coverage.csv).
    Coverage,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        // ignore the error when a pool is already installed (tests)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn load_spec(cli: &Cli) -> Result<ExperimentSpec, CliError> {
    let mut spec = match &cli.spec {
        Some(path) => ExperimentSpec::from_file(path)?,
        None => ExperimentSpec::default(),
    };
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    if let Some(out) = &cli.out {
        spec.out = out.clone();
    }
    Ok(spec)
}

fn out_file(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    let f = File::create(&path)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", path.display())))?;
    Ok(BufWriter::new(f))
}

fn maybe_psi_table(spec: &ExperimentSpec) -> Result<Option<spotmin::PsiTable>, CliError> {
    match &spec.estimator.correction {
        CorrectionSpec::PsiTable(path) => {
            let resolved = if path.is_relative() {
                spec.out.join(path)
            } else {
                path.clone()
            };
            Ok(Some(load_psi_table(&resolved)?))
        }
        _ => Ok(None),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let spec = load_spec(cli)?;
    match &cli.command {
        Command::Simulate => {
            let mut path = simulate_path(&spec.model, spec.n, spec.seed)?;
            if let Some(jumps) = &spec.jumps {
                path = add_jumps(&path, jumps, spec.seed)?;
            }
            let obs = synthesize_observations(&path, &spec.noise, spec.seed)?;
            let mut w = out_file(&spec.out, "observations.csv")?;
            csvio::write_observations(&mut w, &path, &obs)?;
            w.flush().map_err(|e| CliError::Runtime(e.to_string()))?;
            Ok(())
        }
        Command::Estimate { input } => {
            let nh = spec.estimator.nh_list[0];
            let k_n = spec.estimator.k_list[0];
            let file = File::open(input)
                .map_err(|e| CliError::Runtime(format!("cannot open {}: {e}", input.display())))?;
            let cols = csvio::read_observations(&mut BufReader::new(file), spec.noise)?;
            let n = cols.obs.n;
            if nh == 0 || n % nh != 0 || n / nh < 2 {
                return Err(CliError::Validation(format!(
                    "nh = {nh} must divide the observation count n = {n} into at least 2 blocks"
                )));
            }
            experiments::warn_rate_condition(n, nh);
            let part = partition_with(n, n / nh, experiments::EXPERIMENT_MEMBERSHIP)?;
            let lm = local_minima(&cols.obs, &part)?;
            let psi = maybe_psi_table(&spec)?;
            let correction = match (&spec.estimator.correction, &psi) {
                (CorrectionSpec::None, _) => BiasCorrection::None,
                (CorrectionSpec::Slope(s), _) => BiasCorrection::SlopeDivide(*s),
                (CorrectionSpec::PsiTable(_), Some(t)) => BiasCorrection::PsiInverse(t),
                (CorrectionSpec::PsiTable(_), None) => unreachable!("loaded above"),
            };
            let mut cfg = EstimatorConfig::new(k_n, spec.estimator.window);
            cfg.truncation_kappa = spec.estimator.truncation_kappa;
            let curve = volatility_curve(&lm, &cfg, &correction, spec.estimator.q)?;
            // per-block truth when the input carried spot_var
            let truth: Option<Vec<f64>> = cols.spot_var.as_ref().map(|sv| {
                (0..(n / nh))
                    .map(|k| sv[(k * nh + nh / 2).min(n)])
                    .collect()
            });
            let mut w = out_file(&spec.out, "curve.csv")?;
            csvio::write_curve(&mut w, &curve, truth.as_deref())?;
            w.flush().map_err(|e| CliError::Runtime(e.to_string()))?;
            let mut w = out_file(&spec.out, "minima.csv")?;
            csvio::write_local_minima(&mut w, &lm)?;
            w.flush().map_err(|e| CliError::Runtime(e.to_string()))?;
            let eta_hat = spotmin::estimate_noise_level(&cols.obs)?;
            println!("estimated noise level: {eta_hat}");
            Ok(())
        }
        Command::CalibratePsi => {
            let table = run_calibrate_psi(&spec)?;
            let mut w = out_file(&spec.out, "psi_table.csv")?;
            csvio::write_psi_table(&mut w, &table)?;
            w.flush().map_err(|e| CliError::Runtime(e.to_string()))?;
            let sidecar = sidecar_path(&spec.out.join("psi_table.csv"));
            let f = File::create(&sidecar)
                .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", sidecar.display())))?;
            let mut w = BufWriter::new(f);
            csvio::write_psi_meta(&mut w, &table)?;
            w.flush().map_err(|e| CliError::Runtime(e.to_string()))?;
            println!("fitted slope: {}", table.fitted_slope);
            Ok(())
        }
        Command::Table1 => {
            let report = run_table1(&spec)?;
            let mut w = out_file(&spec.out, "table1.csv")?;
            report.write_csv(&mut w)?;
            w.flush().map_err(|e| CliError::Runtime(e.to_string()))?;
            Ok(())
        }
        Command::Table2 { slopes } => {
            let slopes_path = slopes
                .clone()
                .unwrap_or_else(|| spec.out.join("table1.csv"));
            let file = File::open(&slopes_path).map_err(|_| {
                CliError::Runtime(format!(
                    "slope artifact {} not found; run the table1 command first",
                    slopes_path.display()
                ))
            })?;
            let report = Table1Report::read_csv(&mut BufReader::new(file))?;
            let table2 = run_table2(&spec, &report)?;
            let mut w = out_file(&spec.out, "table2.csv")?;
            table2.write_csv(&mut w)?;
            w.flush().map_err(|e| CliError::Runtime(e.to_string()))?;
            Ok(())
        }
        Command::Curve => {
            let psi = maybe_psi_table(&spec)?;
            let demo = run_curve_demo(&spec, psi.as_ref())?;
            let mut w = out_file(&spec.out, "curve.csv")?;
            experiments::write_curve_demo(&mut w, &demo)?;
            w.flush().map_err(|e| CliError::Runtime(e.to_string()))?;
            if demo.bands.is_some() {
                let mut w = out_file(&spec.out, "bands.csv")?;
                experiments::write_bands(&mut w, &demo)?;
                w.flush().map_err(|e| CliError::Runtime(e.to_string()))?;
            }
            Ok(())
        }
        Command::Coverage => {
            let psi = maybe_psi_table(&spec)?;
            let rows = run_coverage(&spec, psi.as_ref())?;
            let mut w = out_file(&spec.out, "coverage.csv")?;
            experiments::write_coverage(&mut w, &rows)?;
            w.flush().map_err(|e| CliError::Runtime(e.to_string()))?;
            Ok(())
        }
    }
}
