//! `mkdv5`: simulations, normal-form simulations and certification runs from the command line.

mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, Context};
use clap::{ArgAction, Parser, Subcommand};
use mkdv5::certify::{
    counterexample_ratio, registry, run_check, run_suite, CertificationReport, CertifyOptions, Suite, DEFAULT_G,
};
use mkdv5::solver::{run_simulation, Method, TrajectoryRecord, Variant};
use serde_json::json;

use config::{sidecar, RunConfig};

const EXIT_CERT_FAIL: u8 = 1;
const EXIT_DIVERGED: u8 = 2;
const EXIT_PICARD: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "mkdv5", version, about = "Fifth-order mKdV spectral laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// JSON run configuration (simulate, nf-simulate).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file: trajectory CSV, or the JSON report for certify.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the certification samplers.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Byte-stable output: step timings are written as 0.
    #[arg(long, global = true, default_value_t = true, action = ArgAction::Set)]
    deterministic: bool,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Integrate the equation directly and write the diagnostics CSV.
    Simulate {
        /// transported or gauged run the renormalized equation instead of the original one.
        #[arg(long, default_value = "original")]
        variant: String,
    },
    /// Integrate with the normal-form stepper; adds a picard_iters column.
    NfSimulate,
    /// Run certification suites (exact, bounds, counterexample, cancellation, pointwise, nf-identity, all).
    Certify {
        #[arg(default_value = "all")]
        suite: String,
        /// List the registered checks instead of running them.
        #[arg(long)]
        list: bool,
        /// Run a single check by id.
        #[arg(long)]
        check: Option<String>,
        /// Smaller sample sizes.
        #[arg(long)]
        quick: bool,
        /// Corrupt one table entry; the dependent checks must fail.
        #[arg(long, hide = true)]
        perturb: bool,
    },
    /// The counterexample families; with --n, print the ratio row at that parameter.
    Counterexample {
        #[arg(long = "N")]
        arity: Option<usize>,
        #[arg(long)]
        n: Option<i64>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<mkdv5::Error>() {
        Some(mkdv5::Error::StepDiverged { .. }) => EXIT_DIVERGED,
        Some(mkdv5::Error::PicardDiverged { .. }) => EXIT_PICARD,
        _ => EXIT_USAGE,
    }
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    }
    match &cli.cmd {
        Cmd::Simulate { variant } => {
            let v = match variant.as_str() {
                "original" => Variant::Original,
                "transported" => Variant::Transported,
                "gauged" => Variant::Gauged,
                other => return Err(anyhow!("unknown variant `{other}` (original, transported, gauged)")),
            };
            simulate(cli, Method::Direct(v), "simulate")
        }
        Cmd::NfSimulate => simulate(cli, Method::NormalForm, "nf-simulate"),
        Cmd::Certify { suite, list, check, quick, perturb } => {
            let suites = parse_suites(suite)?;
            if *list {
                for c in registry().into_iter().filter(|c| suites.contains(&c.suite)) {
                    println!("{}\t{}\t{}", c.id, c.suite, c.anchor);
                }
                return Ok(0);
            }
            let opts = options(cli, *quick, *perturb);
            let reports = match check {
                Some(id) => vec![run_check(id, &opts)?],
                None => run_suites(&suites, &opts)?,
            };
            report(cli, &opts, reports)
        }
        Cmd::Counterexample { arity, n } => {
            let arities = match arity {
                Some(a) => vec![*a],
                None => vec![4, 5],
            };
            if let Some(n) = n {
                let rows = arities.iter().map(|&a| counterexample_ratio(a, *n, DEFAULT_G)).collect::<mkdv5::Result<Vec<_>>>()?;
                write_out(cli.out.as_deref(), &(serde_json::to_string_pretty(&rows)? + "\n"))?;
                return Ok(0);
            }
            let opts = options(cli, false, false);
            let mut reports = Vec::new();
            for a in arities {
                let id = match a {
                    4 => "counterexample-quartic",
                    5 => "counterexample-quintic",
                    _ => return Err(anyhow!(mkdv5::Error::InvalidConfig(format!("no counterexample family for N = {a}")))),
                };
                reports.push(run_check(id, &opts)?);
            }
            report(cli, &opts, reports)
        }
    }
}

fn parse_suites(s: &str) -> anyhow::Result<Vec<Suite>> {
    if s == "all" {
        return Ok(Suite::ALL.to_vec());
    }
    Ok(vec![Suite::from_str(s)?])
}

fn options(cli: &Cli, quick: bool, perturb: bool) -> CertifyOptions {
    let mut o = CertifyOptions { quick, perturb, ..Default::default() };
    if let Some(s) = cli.seed {
        o.seed = s;
    }
    o
}

fn run_suites(suites: &[Suite], opts: &CertifyOptions) -> anyhow::Result<Vec<CertificationReport>> {
    let mut all = Vec::new();
    for &s in suites {
        all.extend(run_suite(s, opts)?);
    }
    Ok(all)
}

/// Prints one status line per report to stderr and the JSON document to `--out` or stdout.
fn report(cli: &Cli, opts: &CertifyOptions, reports: Vec<CertificationReport>) -> anyhow::Result<u8> {
    for r in &reports {
        let status = if r.pass { "PASS" } else { "FAIL" };
        eprintln!("{status} {} (examined {}, violations {})", r.check_id, r.examined, r.violation_count);
    }
    let pass = reports.iter().all(|r| r.pass);
    let doc = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "options": { "seed": opts.seed, "quick": opts.quick, "perturb": opts.perturb },
        "pass": pass,
        "reports": reports,
    });
    write_out(cli.out.as_deref(), &(serde_json::to_string_pretty(&doc)? + "\n"))?;
    Ok(if pass { 0 } else { EXIT_CERT_FAIL })
}

fn write_out(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => std::io::stdout().write_all(text.as_bytes()).context("writing to stdout"),
    }
}

fn simulate(cli: &Cli, method: Method, command: &str) -> anyhow::Result<u8> {
    let path = cli.config.as_deref().ok_or_else(|| anyhow!("--config is required"))?;
    let cfg = RunConfig::load(path)?.resolve()?;
    let rec = run_simulation(&cfg.solver, &cfg.initial_field(), &cfg.coefficients(), method, !cli.deterministic)?;
    let with_picard = method == Method::NormalForm;
    let csv = trajectory_csv(&rec, with_picard)?;
    let drift: Vec<f64> = (0..4).map(|j| rec.energy_drift(j)).collect();
    let meta = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "deterministic": cli.deterministic,
        "seed": cli.seed,
        "config": cfg,
        "samples": rec.samples.len(),
        "final_t": rec.samples.last().map(|s| s.t),
        "energy_drift": drift,
    });
    let meta = serde_json::to_string_pretty(&meta)? + "\n";
    match cli.out.clone().or_else(|| cfg.csv.clone()) {
        Some(p) => {
            write_out(Some(&p), &csv)?;
            write_out(Some(&sidecar(&p)), &meta)?;
        }
        None => {
            write_out(None, &csv)?;
            eprint!("{meta}");
        }
    }
    Ok(0)
}

fn trajectory_csv(rec: &TrajectoryRecord, with_picard: bool) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t", "E0", "E1", "E2", "E3", "L2", "Hs", "mass_drift", "step_ms"];
    if with_picard {
        header.push("picard_iters");
    }
    w.write_record(&header)?;
    for s in &rec.samples {
        let mut row: Vec<String> = [s.t, s.energies[0], s.energies[1], s.energies[2], s.energies[3], s.l2, s.hs, s.mass_drift, s.step_ms]
            .iter()
            .map(|v| v.to_string())
            .collect();
        if with_picard {
            row.push(s.picard_iters.unwrap_or(0).to_string());
        }
        w.write_record(&row)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| anyhow!("{e}"))?)?)
}
