use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use tsro_core::bench::gadgets::{gadget_repsel, gadget_selection};
use tsro_core::bench::milp::{emit_milp, MilpModel};
use tsro_core::bench::{gap_mean_csv, run_grid, time_median_csv, trials_csv, ExperimentConfig};
use tsro_core::cont_decomp::{solve_continuous_traced, TraceRow};
use tsro_core::disc_exact::{solve_discrete_exact_with, solve_equal_costs_gamma1, DiscreteOptions};
use tsro_core::num::format_rational;
use tsro_core::onestage::static_solve;
use tsro_core::oracle;
use tsro_core::report::Certificate;
use tsro_core::variant_budget::solve_variant;
use tsro_core::verify::{run_verify, VerifyConfig};
use tsro_core::{read_instance, write_instance, Instance, ItemSet, Method, Provenance, SolveReport, UncertaintyKind};

#[derive(Parser)]
#[command(name = "tsro", version, about = "Two-stage robust selection under budgeted uncertainty")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolveMethod {
    /// Pick by the instance's uncertainty kind.
    Auto,
    Continuous,
    Discrete,
    Variant,
    Equalcost,
    Oracle,
    Static,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    TwoStage,
    Static,
}

#[derive(Clone, Copy, ValueEnum)]
enum GadgetKind {
    Repsel,
    Selection,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance file (`-` for stdin) and print the report as JSON.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        method: SolveMethod,
        /// Write one CSV line per continuous subproblem to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Seconds allowed for the discrete enumeration.
        #[arg(long)]
        time_limit: Option<f64>,
    },
    /// Compare solvers with brute-force oracles on random instances.
    Verify {
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, default_value_t = 300)]
        cases: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = oracle::DEFAULT_CAP)]
        cap: usize,
    },
    /// Run the gap grid and write gap_mean.csv, time_median.csv and trials.csv.
    Experiment {
        /// JSON config; flags below override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Start from the 20-item, 50-trial grid instead of the reduced default.
        #[arg(long)]
        full: bool,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        gamma: Option<Vec<usize>>,
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long)]
        no_warm_start: bool,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Print a partition gadget instance as JSON.
    Gadget {
        #[arg(value_enum)]
        kind: GadgetKind,
        #[arg(long, value_delimiter = ',', required = true)]
        weights: Vec<u64>,
        /// Uniform cost shift (representative selection only).
        #[arg(long, default_value_t = 0)]
        shift: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the mixed-integer model of an instance in LP format.
    Export {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "two-stage")]
        model: ModelArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_instance(path: &Path) -> Result<Instance> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        s
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    };
    let instance = read_instance(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(instance.checked()?)
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn oracle_report(instance: &Instance) -> Result<SolveReport> {
    let start = std::time::Instant::now();
    let value = match instance.kind {
        UncertaintyKind::DiscreteBudget => oracle::brute_rob_discrete(instance)?,
        UncertaintyKind::ContinuousBudget => oracle::brute_rob_continuous(instance)?,
        UncertaintyKind::VariantBudget => oracle::brute_variant(instance)?,
    };
    Ok(SolveReport {
        value,
        witness_x: ItemSet::empty(),
        method: Method::Oracle,
        provenance: Provenance::Oracle,
        certificate: Certificate::Exact,
        elapsed: start.elapsed(),
    })
}

fn solve(path: &Path, method: SolveMethod, trace: Option<&Path>, time_limit: Option<f64>) -> Result<()> {
    let instance = load_instance(path)?;
    let method = match method {
        SolveMethod::Auto => match instance.kind {
            UncertaintyKind::ContinuousBudget => SolveMethod::Continuous,
            UncertaintyKind::DiscreteBudget => SolveMethod::Discrete,
            UncertaintyKind::VariantBudget => SolveMethod::Variant,
        },
        m => m,
    };
    if trace.is_some() && !matches!(method, SolveMethod::Continuous) {
        bail!("--trace applies to the continuous method only");
    }
    let report = match method {
        SolveMethod::Continuous => {
            let (report, rows) = solve_continuous_traced(&instance)?;
            if let Some(p) = trace {
                let mut text = String::from(TraceRow::HEADER);
                text.push('\n');
                for r in rows {
                    text.push_str(&r.to_csv());
                    text.push('\n');
                }
                emit(&text, Some(p))?;
            }
            report
        }
        SolveMethod::Discrete => {
            let opts = DiscreteOptions { incumbent: None, time_limit: time_limit.map(Duration::from_secs_f64) };
            solve_discrete_exact_with(&instance, &opts)?
        }
        SolveMethod::Variant => solve_variant(&instance)?,
        SolveMethod::Equalcost => solve_equal_costs_gamma1(&instance)?,
        SolveMethod::Static => static_solve(&instance)?,
        SolveMethod::Oracle => oracle_report(&instance)?,
        SolveMethod::Auto => unreachable!("resolved above"),
    };
    println!("{}", serde_json::to_string_pretty(&report.to_json())?);
    Ok(())
}

fn verify(cfg: VerifyConfig) -> Result<bool> {
    let report = run_verify(&cfg)?;
    for (suite, count) in &report.checked {
        let bad = report.mismatches.iter().filter(|m| m.suite == *suite).count();
        println!("{suite}: {count} cases, {bad} mismatches");
    }
    for m in &report.mismatches {
        let detail = json!({
            "suite": m.suite,
            "case": m.case,
            "solver": format_rational(&m.solver),
            "oracle": format_rational(&m.oracle),
            "instance": serde_json::from_str::<serde_json::Value>(&write_instance(&m.instance))?,
        });
        eprintln!("{detail}");
    }
    Ok(report.passed())
}

#[allow(clippy::too_many_arguments)]
fn experiment(
    config: Option<&Path>,
    full: bool,
    n: Option<usize>,
    trials: Option<usize>,
    seed: Option<u64>,
    p: Option<Vec<usize>>,
    gamma: Option<Vec<usize>>,
    time_limit: Option<f64>,
    no_warm_start: bool,
    out: &Path,
) -> Result<()> {
    let mut cfg = match config {
        Some(path) => {
            serde_json::from_str(&fs::read_to_string(path)?).with_context(|| format!("parsing {}", path.display()))?
        }
        None if full => ExperimentConfig::full(),
        None => ExperimentConfig::default(),
    };
    if let Some(n) = n {
        cfg.n = n;
        if p.is_none() {
            cfg.p_values = (1..=n).collect();
        }
        if gamma.is_none() {
            cfg.gamma_values = (1..=n).collect();
        }
    }
    cfg.trials = trials.unwrap_or(cfg.trials);
    cfg.seed = seed.unwrap_or(cfg.seed);
    cfg.p_values = p.unwrap_or(cfg.p_values);
    cfg.gamma_values = gamma.unwrap_or(cfg.gamma_values);
    if time_limit.is_some() {
        cfg.time_limit_secs = time_limit;
    }
    cfg.warm_start &= !no_warm_start;
    if let Err(e) = cfg.validate() {
        bail!("invalid experiment config: {e}");
    }

    let records = run_grid(&cfg)?;
    fs::create_dir_all(out)?;
    fs::write(out.join("gap_mean.csv"), gap_mean_csv(&cfg, &records))?;
    fs::write(out.join("time_median.csv"), time_median_csv(&cfg, &records))?;
    fs::write(out.join("trials.csv"), trials_csv(&records))?;
    let hits: usize = records.iter().map(|r| r.time_limit_hits()).sum();
    println!(
        "{} cells, {} trials each, {} time-limit hits; CSVs written to {}",
        records.len(),
        cfg.trials,
        hits,
        out.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Solve { instance, method, trace, time_limit } => {
            solve(&instance, method, trace.as_deref(), time_limit)?
        }
        Command::Verify { n, cases, seed, cap } => {
            return verify(VerifyConfig { n, cases, seed, cap, ..Default::default() })
        }
        Command::Experiment { config, full, n, trials, seed, p, gamma, time_limit, no_warm_start, out } => {
            experiment(config.as_deref(), full, n, trials, seed, p, gamma, time_limit, no_warm_start, &out)?
        }
        Command::Gadget { kind, weights, shift, out } => {
            if weights.contains(&0) {
                bail!("weights must be positive");
            }
            let instance = match kind {
                GadgetKind::Repsel => gadget_repsel(&weights, shift),
                GadgetKind::Selection if shift != 0 => bail!("--shift applies to repsel only"),
                GadgetKind::Selection => gadget_selection(&weights),
            };
            emit(&(write_instance(&instance) + "\n"), out.as_deref())?
        }
        Command::Export { instance, model, out } => {
            let instance = load_instance(&instance)?;
            let model = match model {
                ModelArg::TwoStage => MilpModel::TwoStage,
                ModelArg::Static => MilpModel::Static,
            };
            emit(&emit_milp(&instance, model)?, out.as_deref())?
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
