//! `sympl`: Williamson diagonalization, symplectic structure checks,
//! perturbation reports, and residual scaling scans over matrix files.
//!
//! Exit codes: 0 success, 1 failed check, 2 usage or parse error, 3 domain
//! error (e.g. not positive definite), 4 numeric failure, 5 insufficient data.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sympl_core::{
    align_orthosymplectic, default_predicate_tol, is_orthosymplectic, is_symplectic, logspace,
    perturbation_report, scaling_study, symplectic_correction, williamson_decompose,
    ClusterStructure, ScalingStudy, SquareMatrix, DEFAULT_CLUSTER_TOL, DEFAULT_DROP_BELOW,
    METRIC_NAMES,
};

use sympl_cli::io::{read_matrix, CliResult};
use sympl_cli::CliError;

#[derive(Parser)]
#[command(
    name = "sympl",
    version,
    about = "Williamson diagonalization and symplectic perturbation analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Diagonalize a positive definite matrix file in Williamson normal form.
    Williamson {
        /// Input matrix file ({"n": ..., "data": [[...]]}).
        #[arg(long)]
        input: PathBuf,
        /// Relative tolerance for clustering the symplectic eigenvalues.
        #[arg(long, default_value_t = DEFAULT_CLUSTER_TOL)]
        cluster_tol: f64,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Test a matrix file for symplecticity or orthosymplecticity.
    Check {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: CheckKind,
        /// Residual tolerance; defaults to 1e-8 times the matrix dimension.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Report block residuals, alignment, and correction for a perturbation.
    Perturb {
        /// Base matrix A (positive definite).
        #[arg(long)]
        a: PathBuf,
        /// Symmetric perturbation H with A + H positive definite.
        #[arg(long)]
        h: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep perturbation scales and fit residual scaling slopes.
    Scan {
        /// Comma-separated target symplectic eigenvalues, e.g. "1,1,2".
        #[arg(long)]
        spectrum: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        t_min: f64,
        #[arg(long)]
        t_max: f64,
        /// Number of log-spaced scales (at least 3).
        #[arg(long)]
        points: usize,
        #[arg(long, default_value_t = 4.0)]
        conditioning: f64,
        /// Write per-scale residual curves as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write the slope summary as JSON (stdout when neither output is given).
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum CheckKind {
    Symplectic,
    Orthosymplectic,
}

#[derive(Serialize)]
struct ClusterOut {
    mu: f64,
    alpha: Vec<usize>,
}

fn clusters_out(clusters: &ClusterStructure) -> Vec<ClusterOut> {
    clusters
        .mus()
        .iter()
        .zip(clusters.alphas())
        .map(|(&mu, alpha)| ClusterOut {
            mu,
            alpha: alpha.as_slice().to_vec(),
        })
        .collect()
}

#[derive(Serialize)]
struct WilliamsonOut {
    #[serde(rename = "D")]
    d: Vec<f64>,
    #[serde(rename = "S")]
    s: Vec<Vec<f64>>,
    residual_diag: f64,
    residual_sympl: f64,
    clusters: Vec<ClusterOut>,
}

#[derive(Serialize)]
struct CheckOut {
    pass: bool,
    kind: String,
    tol: f64,
    residuals: BTreeMap<String, f64>,
}

#[derive(Serialize)]
struct PerturbOut {
    h_norm: f64,
    h_norm_frobenius: f64,
    clusters: Vec<ClusterOut>,
    offdiag: BTreeMap<String, f64>,
    sym_defect: Vec<f64>,
    antisym_defect: Vec<f64>,
    ortho_defect: Vec<f64>,
    sympl_defect: Vec<f64>,
    align_residual: f64,
    correction_residuals: Vec<f64>,
}

#[derive(Serialize)]
struct SlopeOut {
    slope: f64,
    intercept: f64,
}

#[derive(Serialize)]
struct ScanConfigOut {
    spectrum: Vec<f64>,
    seed: u64,
    t_min: f64,
    t_max: f64,
    points: usize,
    conditioning: f64,
    drop_below: f64,
}

#[derive(Serialize)]
struct ScanSummary {
    config: ScanConfigOut,
    ts: Vec<f64>,
    dropped_ts: Vec<f64>,
    slopes: BTreeMap<String, Option<SlopeOut>>,
}

fn emit(out: Option<&Path>, payload: &impl Serialize) -> CliResult<()> {
    let text = serde_json::to_string_pretty(payload)
        .map_err(|e| CliError::usage(format!("serialization failed: {e}")))?;
    match out {
        Some(path) => std::fs::write(path, text + "\n")
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn matrix_rows(m: &SquareMatrix) -> Vec<Vec<f64>> {
    (0..m.dim())
        .map(|i| (0..m.dim()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn cmd_williamson(input: &Path, cluster_tol: f64, out: Option<&Path>) -> CliResult<()> {
    let a = read_matrix(input)?;
    let w = williamson_decompose(&a, cluster_tol)?;
    emit(
        out,
        &WilliamsonOut {
            d: w.d.clone(),
            s: matrix_rows(&w.s),
            residual_diag: w.residual_diag,
            residual_sympl: w.residual_sympl,
            clusters: clusters_out(&w.clusters),
        },
    )
}

fn cmd_check(input: &Path, kind: CheckKind, tol: Option<f64>) -> CliResult<bool> {
    let m = read_matrix(input)?;
    let tol = tol.unwrap_or_else(|| default_predicate_tol(m.dim()));
    let mut residuals = BTreeMap::new();
    let (pass, kind_name) = match kind {
        CheckKind::Symplectic => {
            let check = is_symplectic(&m, tol)?;
            residuals.insert("symplectic".to_string(), check.residual);
            (check.pass, "symplectic")
        }
        CheckKind::Orthosymplectic => {
            let check = is_orthosymplectic(&m, tol)?;
            residuals.insert("orthogonality".to_string(), check.ortho_residual);
            residuals.insert("symplectic".to_string(), check.sympl_residual);
            (check.pass, "orthosymplectic")
        }
    };
    emit(
        None,
        &CheckOut {
            pass,
            kind: kind_name.to_string(),
            tol,
            residuals,
        },
    )?;
    Ok(pass)
}

fn cmd_perturb(a_path: &Path, h_path: &Path, out: Option<&Path>) -> CliResult<()> {
    let a = read_matrix(a_path)?;
    let h = read_matrix(h_path)?;
    if a.dim() != h.dim() {
        return Err(CliError::usage(format!(
            "A is {0}x{0} but H is {1}x{1}",
            a.dim(),
            h.dim()
        )));
    }
    let base = williamson_decompose(&a, DEFAULT_CLUSTER_TOL)?;
    let perturbed_matrix =
        SquareMatrix::from_matrix(a.as_matrix() + h.as_matrix()).map_err(CliError::from)?;
    let perturbed = williamson_decompose(&perturbed_matrix, DEFAULT_CLUSTER_TOL)?;

    let report = perturbation_report(&a, &h, &base.s, &perturbed.s, &base.clusters)?;
    let alignment = align_orthosymplectic(&base.s, &perturbed.s, &base.clusters)?;
    let correction = symplectic_correction(&base.s, &perturbed.s, &base.clusters)?;

    let offdiag = report
        .offdiag
        .iter()
        .map(|(&(i, j), &v)| (format!("{i},{j}"), v))
        .collect();
    emit(
        out,
        &PerturbOut {
            h_norm: report.h_norm,
            h_norm_frobenius: report.h_norm_frobenius,
            clusters: clusters_out(&base.clusters),
            offdiag,
            sym_defect: report.sym_defect,
            antisym_defect: report.antisym_defect,
            ortho_defect: report.ortho_defect,
            sympl_defect: report.sympl_defect,
            align_residual: alignment.residual,
            correction_residuals: correction.residuals,
        },
    )
}

fn render_csv(study: &ScalingStudy) -> String {
    let mut text = String::from("t");
    for name in METRIC_NAMES {
        text.push(',');
        text.push_str(name);
    }
    text.push('\n');
    for (row, &t) in study.ts.iter().enumerate() {
        write!(text, "{t}").expect("string write");
        for name in METRIC_NAMES {
            write!(text, ",{}", study.curves[name][row]).expect("string write");
        }
        text.push('\n');
    }
    text
}

#[allow(clippy::too_many_arguments)]
fn cmd_scan(
    spectrum: &str,
    seed: u64,
    t_min: f64,
    t_max: f64,
    points: usize,
    conditioning: f64,
    csv: Option<&Path>,
    json: Option<&Path>,
) -> CliResult<()> {
    let spectrum: Vec<f64> = spectrum
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::usage(format!("cannot parse --spectrum: {e}")))?;
    if points < 3 {
        return Err(CliError::usage(format!(
            "--points must be at least 3, got {points}"
        )));
    }
    if !(t_min > 0.0 && t_max > t_min) {
        return Err(CliError::usage(format!(
            "need 0 < t-min < t-max, got [{t_min}, {t_max}]"
        )));
    }
    let ts = logspace(t_min, t_max, points)?;
    let study = scaling_study(&spectrum, seed, &ts, conditioning, DEFAULT_DROP_BELOW)?;

    if let Some(path) = csv {
        std::fs::write(path, render_csv(&study))
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))?;
    }
    let summary = ScanSummary {
        config: ScanConfigOut {
            spectrum: study.config.spectrum.clone(),
            seed,
            t_min,
            t_max,
            points,
            conditioning,
            drop_below: study.config.drop_below,
        },
        ts: study.ts.clone(),
        dropped_ts: study.dropped_ts.clone(),
        slopes: METRIC_NAMES
            .iter()
            .map(|&name| {
                let fit = study.slopes[name].map(|f| SlopeOut {
                    slope: f.slope,
                    intercept: f.intercept,
                });
                (name.to_string(), fit)
            })
            .collect(),
    };
    match json {
        Some(path) => emit(Some(path), &summary)?,
        None if csv.is_none() => emit(None, &summary)?,
        None => {}
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::Williamson {
            input,
            cluster_tol,
            out,
        } => {
            cmd_williamson(&input, cluster_tol, out.as_deref())?;
            Ok(0)
        }
        Command::Check { input, kind, tol } => {
            let pass = cmd_check(&input, kind, tol)?;
            Ok(if pass { 0 } else { 1 })
        }
        Command::Perturb { a, h, out } => {
            cmd_perturb(&a, &h, out.as_deref())?;
            Ok(0)
        }
        Command::Scan {
            spectrum,
            seed,
            t_min,
            t_max,
            points,
            conditioning,
            csv,
            json,
        } => {
            cmd_scan(
                &spectrum,
                seed,
                t_min,
                t_max,
                points,
                conditioning,
                csv.as_deref(),
                json.as_deref(),
            )?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    // optional THREADS variable caps the scan parallelism; default is all cores
    if let Ok(threads) = std::env::var("THREADS") {
        if let Ok(k) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
