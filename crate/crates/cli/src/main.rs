//! `cluster-reduce`: classify point clusters, compute covariants and reduce
//! clusters, binary forms, quadric pencils and ternary forms.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cluster_reduce::cluster::{classify, PointCluster, ScaledCluster, StabilityClass};
use cluster_reduce::covariant::{theta, Init, MinimizeOptions};
use cluster_reduce::error::Error;
use cluster_reduce::io::{cluster_from_json, theta_result_to_json};
use cluster_reduce::mp::DEFAULT_PREC;
use cluster_reduce::pipeline::{
    reduce_binary_form, reduce_cluster, reduce_quadric_pencil, reduce_ternary_form, PipelineOptions, ReductionReport,
    SCHEMA,
};
use cluster_reduce::poly::MultiPoly;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "cluster-reduce", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Working precision in bits (default depends on the command).
    #[arg(long, global = true)]
    prec: Option<u32>,
    /// Gradient-norm tolerance of the covariant minimizer.
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol: f64,
    /// LLL parameter.
    #[arg(long, global = true, default_value_t = 0.99)]
    delta: f64,
    /// Iteration cap of the covariant minimizer.
    #[arg(long, global = true, default_value_t = 5000)]
    max_iter: usize,
    /// Seed for the random shears of curve intersection.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print JSON.
    #[arg(long, global = true, conflicts_with = "text")]
    json: bool,
    /// Print plain text (default).
    #[arg(long, global = true)]
    text: bool,
    /// Also write the JSON result to this file.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Stability class of a cluster given as a JSON file.
    Classify { cluster: PathBuf },
    /// Covariant and theta of a cluster given as a JSON file.
    Covariant { cluster: PathBuf },
    /// LLL-reduce a real stable cluster given as a JSON file.
    ReduceCluster { cluster: PathBuf },
    /// Reduce a binary form (file or literal, e.g. "x^3 + y^3").
    ReduceBinary { form: String },
    /// Reduce a pencil spanned by two ternary quadrics (files or literals).
    ReducePencil { q1: String, q2: String },
    /// Reduce a ternary form via its inflection points (file or literal).
    ReduceTernary { form: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::NotStable(class) = &e {
                eprintln!("{}", class_text(class));
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn read_json(path: &Path) -> Result<Value, Error> {
    let s = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&s).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn read_cluster(path: &Path, prec: u32) -> Result<PointCluster, Error> {
    cluster_from_json(&read_json(path)?, prec)
}

/// A polynomial from a file (text or JSON) or from the argument itself.
fn read_poly(arg: &str, nvars: usize) -> Result<MultiPoly, Error> {
    let path = Path::new(arg);
    let src = if path.is_file() {
        fs::read_to_string(path).map_err(|e| Error::Parse(format!("{arg}: {e}")))?
    } else {
        arg.to_string()
    };
    let trimmed = src.trim();
    if trimmed.starts_with('{') {
        let v: Value = serde_json::from_str(trimmed).map_err(|e| Error::Parse(e.to_string()))?;
        let p = MultiPoly::from_json(&v)?;
        if p.nvars() != nvars {
            return Err(Error::DimensionMismatch {
                expected: nvars,
                found: p.nvars(),
            });
        }
        Ok(p)
    } else {
        MultiPoly::parse(trimmed, nvars)
    }
}

fn options(c: &Common) -> PipelineOptions {
    PipelineOptions {
        prec: c.prec,
        tol: c.tol,
        delta: c.delta,
        max_iter: c.max_iter,
        seed: c.seed,
    }
}

fn class_text(c: &StabilityClass) -> String {
    let mut s = format!(
        "stable: {}\nsemi-stable: {}\nsplit: {}\nmargin: {}\nphi: {:?}\n",
        c.is_stable, c.is_semi_stable, c.is_split, c.margin, c.phi
    );
    if let Some(w) = &c.witness {
        s.push_str(&format!(
            "witness: dimension {} subspace spanned by points {:?}, containing {:?}\n",
            w.k, w.spanning, w.contained
        ));
    }
    if let Some((a, b)) = &c.split_parts {
        s.push_str(&format!("split parts: {a:?} | {b:?}\n"));
    }
    s
}

fn emit(common: &Common, value: &Value, text: String) -> Result<(), Error> {
    if let Some(path) = &common.report {
        let body = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
        fs::write(path, body).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    }
    if common.json {
        println!("{}", serde_json::to_string_pretty(value).unwrap_or_default());
    } else {
        print!("{text}");
    }
    Ok(())
}

fn emit_report(common: &Common, r: &ReductionReport) -> Result<(), Error> {
    emit(common, &r.to_json(), r.to_text())
}

fn run(cli: &Cli) -> Result<u8, Error> {
    let c = &cli.common;
    let opts = options(c);
    let prec = c.prec.unwrap_or(DEFAULT_PREC);
    match &cli.command {
        Command::Classify { cluster } => {
            let z = read_cluster(cluster, prec)?;
            let class = classify(&z);
            let v = json!({ "schema": SCHEMA, "kind": "classify", "stability": class });
            emit(c, &v, class_text(&class))?;
            Ok(0)
        }
        Command::Covariant { cluster } => {
            let z = read_cluster(cluster, prec)?;
            let mo = MinimizeOptions {
                tol: c.tol,
                max_iter: c.max_iter,
                prec,
                init: Init::Simplex,
                check_stability: true,
                record_transcript: false,
            };
            let t = theta(&ScaledCluster::from_cluster(&z), &mo)?;
            let mut v = theta_result_to_json(&t);
            v["schema"] = json!(SCHEMA);
            v["kind"] = json!("covariant");
            let mut text = class_text(&t.class);
            text.push_str(&format!("theta: {:.15e}\n", t.theta.to_f64()));
            match &t.covariant {
                Some(r) => {
                    text.push_str(&format!(
                        "iterations: {}, gradient norm: {:.3e}\ncovariant:\n",
                        r.iterations,
                        r.final_gradient_norm.to_f64()
                    ));
                    let m = r.z.matrix();
                    for i in 0..m.rows() {
                        let cells: Vec<String> = (0..m.cols())
                            .map(|j| format!("{:.10e}{:+.10e}i", m[(i, j)].real().to_f64(), m[(i, j)].imag().to_f64()))
                            .collect();
                        text.push_str(&format!("  [{}]\n", cells.join(", ")));
                    }
                }
                None => text.push_str("no covariant: the cluster is not stable\n"),
            }
            emit(c, &v, text)?;
            Ok(if t.covariant.is_some() { 0 } else { 2 })
        }
        Command::ReduceCluster { cluster } => {
            let z = read_cluster(cluster, prec)?;
            emit_report(c, &reduce_cluster(&z, &opts)?)?;
            Ok(0)
        }
        Command::ReduceBinary { form } => {
            emit_report(c, &reduce_binary_form(&read_poly(form, 2)?, &opts)?)?;
            Ok(0)
        }
        Command::ReducePencil { q1, q2 } => {
            let r = reduce_quadric_pencil(&read_poly(q1, 3)?, &read_poly(q2, 3)?, &opts)?;
            emit_report(c, &r)?;
            Ok(0)
        }
        Command::ReduceTernary { form } => {
            emit_report(c, &reduce_ternary_form(&read_poly(form, 3)?, &opts)?)?;
            Ok(0)
        }
    }
}
