//! `budget-al` command-line driver.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use budget_al::al_loop::{compare_strategies, ComparisonReport, Experiment, RunState, Variant};
use budget_al::data_io::{
    self, generate_synthetic, pseudo_audit_rows, read_report_json, report_to_csv, scores_to_csv, write_report,
    ReportFormat, SyntheticSpec, PSEUDO_AUDIT_HEADER,
};
use budget_al::Error;
use clap::{Args, Parser, Subcommand};

use crate::config::{load_file_config, resolve, CliError, RunFlags};

#[derive(Debug, Parser)]
#[command(name = "budget-al", version, about = "Pool-based active learning with a budget annotator")]
struct Cli {
    #[command(flatten)]
    global: GlobalFlags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalFlags {
    /// JSON config file (run settings, dataset source, output directory)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Master RNG seed [default: 0]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Suppress progress output
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic embedding CSV and its digest file
    GenData(GenDataArgs),
    /// Run one active-learning experiment
    Run(RunArgs),
    /// Compare strategies over several seeds
    Compare(CompareArgs),
    /// Re-emit the CSV form of a JSON run report
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct GenDataArgs {
    /// Number of classes K
    #[arg(long, default_value_t = 10)]
    classes: usize,
    /// Feature dimension d
    #[arg(long, default_value_t = 32)]
    dim: usize,
    /// Instances per class
    #[arg(long, default_value_t = 600)]
    per_class: usize,
    /// Minimum pairwise distance between class means
    #[arg(long, default_value_t = 6.0)]
    separation: f64,
    /// Within-class standard deviation
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// File stem for the outputs
    #[arg(long, default_value = "synthetic")]
    name: String,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    flags: RunFlags,
    /// Resume from a run-state snapshot written by a previous run
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Write per-round score dumps (id,uncertainty,density,hybrid)
    #[arg(long)]
    dump_scores: bool,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    flags: RunFlags,
    /// Comma-separated strategies: random, uncertainty, hybrid, uncertainty_budget, hybrid_budget
    #[arg(long, value_delimiter = ',', required = true)]
    strategies: Vec<String>,
    /// Comma-separated seeds [default: the --seed value]
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    /// Run variant × seed jobs on worker threads (output is identical)
    #[arg(long)]
    parallel: bool,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// JSON report to read
    #[arg(long)]
    input: PathBuf,
    /// CSV destination [default: alongside the input]
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::GenData(args) => cmd_gen_data(&cli.global, args),
        Command::Run(args) => cmd_run(&cli.global, args),
        Command::Compare(args) => cmd_compare(&cli.global, args),
        Command::Report(args) => cmd_report(args),
    }
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Runtime(Error::Io { path: dir.to_path_buf(), source: e }))
}

fn write(path: &Path, body: &str) -> Result<(), CliError> {
    data_io::write_text(path, body).map_err(CliError::Runtime)
}

fn cmd_gen_data(global: &GlobalFlags, args: GenDataArgs) -> Result<(), CliError> {
    let out_dir = global
        .out_dir
        .clone()
        .ok_or_else(|| CliError::Usage("gen-data requires --out-dir\n\nUsage: budget-al gen-data --out-dir <DIR> [OPTIONS]".into()))?;
    let spec = SyntheticSpec {
        classes: args.classes,
        dim: args.dim,
        per_class: args.per_class,
        separation: args.separation,
        sigma: args.sigma,
        seed: global.seed.unwrap_or(0),
    };
    let ds = generate_synthetic(&spec).map_err(|e| match e {
        Error::InvalidConfig(_) => CliError::Config(e),
        other => CliError::Runtime(other),
    })?;
    ensure_dir(&out_dir)?;
    let csv = out_dir.join(format!("{}.csv", args.name));
    ds.write_csv(&csv).map_err(CliError::Runtime)?;
    write(&out_dir.join(format!("{}.digest", args.name)), &format!("{}\n", ds.digest()))?;
    println!("{}", ds.digest());
    Ok(())
}

fn cmd_run(global: &GlobalFlags, args: RunArgs) -> Result<(), CliError> {
    let file = load_file_config(global.config.as_deref())?;
    let resolved = resolve(&file, global.seed, global.out_dir.clone(), &args.flags)?;
    if !global.quiet {
        resolved.print_provenance();
    }
    let dataset = resolved.load_dataset()?;
    let out_dir = resolved.out_dir.clone();
    ensure_dir(&out_dir)?;

    let exp = match &args.resume {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(Error::Io { path: path.clone(), source: e }))?;
            let state: RunState = serde_json::from_str(&text).map_err(|e| CliError::Config(e.into()))?;
            Experiment::resume(&dataset, state).map_err(CliError::Config)?
        }
        None => Experiment::new(&dataset, resolved.run.clone()).map_err(CliError::from_core)?,
    };

    let audit_path = out_dir.join("pseudo_audit.csv");
    let mut audit = if args.resume.is_some() {
        fs::read_to_string(&audit_path).unwrap_or_else(|_| format!("{PSEUDO_AUDIT_HEADER}\n"))
    } else {
        format!("{PSEUDO_AUDIT_HEADER}\n")
    };
    let state_path = out_dir.join("state.json");
    let scores_dir = out_dir.join("scores");
    if args.dump_scores {
        ensure_dir(&scores_dir)?;
    }
    let quiet = global.quiet;
    let (report, head) = exp
        .run_to_end(|exp, outcome| {
            let r = &outcome.record;
            if !quiet {
                eprintln!(
                    "round {:>3}  acc {:.4}  loss {:.4}  spent {:>5}  pseudo {:>4}",
                    r.round, r.test_accuracy, r.train_loss, r.oracle_spent, r.pseudo_count
                );
            }
            audit.push_str(&pseudo_audit_rows(r.round, &outcome.pseudo));
            data_io::write_text(&audit_path, &audit)?;
            if let (true, Some(scored)) = (args.dump_scores, &outcome.scored) {
                data_io::write_text(&scores_dir.join(format!("round_{:04}.csv", r.round)), &scores_to_csv(scored))?;
            }
            let state = serde_json::to_string_pretty(&exp.snapshot())?;
            data_io::write_text(&state_path, &state)
        })
        .map_err(CliError::Runtime)?;
    if !audit_path.exists() {
        write(&audit_path, &audit)?;
    }

    write_report(&report, &out_dir.join("report.json"), ReportFormat::Json).map_err(CliError::Runtime)?;
    write_report(&report, &out_dir.join("report.csv"), ReportFormat::Csv).map_err(CliError::Runtime)?;
    let head_json = serde_json::to_string_pretty(&head.to_checkpoint()).map_err(|e| CliError::Runtime(e.into()))?;
    write(&out_dir.join("head.json"), &format!("{head_json}\n"))?;

    let summary = report.summary.as_ref().expect("finished report has a summary");
    println!(
        "final_accuracy={} oracle_spent={}",
        summary.final_accuracy, summary.oracle_spent
    );
    Ok(())
}

fn curve_csv(cmp: &ComparisonReport, name: &str) -> String {
    let mut out = String::from("round,runs,mean_accuracy,sd_accuracy,mean_oracle_spent\n");
    if let Some(v) = cmp.variant(name) {
        for c in &v.curve {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                c.round, c.runs, c.mean_accuracy, c.sd_accuracy, c.mean_oracle_spent
            ));
        }
    }
    out
}

fn summary_csv(cmp: &ComparisonReport) -> String {
    let mut out = String::from("variant,round,runs,mean_accuracy,sd_accuracy,mean_oracle_spent\n");
    for v in &cmp.variants {
        for c in &v.curve {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                v.name, c.round, c.runs, c.mean_accuracy, c.sd_accuracy, c.mean_oracle_spent
            ));
        }
    }
    out
}

fn paired_csv(cmp: &ComparisonReport) -> String {
    let mut out = String::from("variant,baseline,seed,difference\n");
    for p in &cmp.paired {
        out.push_str(&format!("{},{},{},{}\n", p.variant, p.baseline, p.seed, p.difference));
    }
    out
}

fn cmd_compare(global: &GlobalFlags, args: CompareArgs) -> Result<(), CliError> {
    let file = load_file_config(global.config.as_deref())?;
    let resolved = resolve(&file, global.seed, global.out_dir.clone(), &args.flags)?;
    if args.strategies.len() < 2 {
        return Err(CliError::Usage("compare needs at least two --strategies".into()));
    }
    let mut seen = std::collections::BTreeSet::new();
    for s in &args.strategies {
        if !seen.insert(s.as_str()) {
            return Err(CliError::Usage(format!("duplicate strategy `{s}`")));
        }
    }
    let variants = args
        .strategies
        .iter()
        .map(|name| Variant::preset(name, &resolved.run))
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::Config)?;
    let seeds = if args.seeds.is_empty() {
        vec![resolved.run.seed]
    } else {
        args.seeds.clone()
    };
    if !global.quiet {
        resolved.print_provenance();
        eprintln!("compare: {} variants × {} seeds", variants.len(), seeds.len());
    }
    let dataset = resolved.load_dataset()?;
    let cmp = compare_strategies(&dataset, &variants, &seeds, args.parallel).map_err(CliError::from_core)?;

    let out_dir = resolved.out_dir.clone();
    ensure_dir(&out_dir)?;
    for v in &cmp.variants {
        write(&out_dir.join(format!("curve_{}.csv", v.name)), &curve_csv(&cmp, &v.name))?;
    }
    write(&out_dir.join("summary.csv"), &summary_csv(&cmp))?;
    write(&out_dir.join("paired.csv"), &paired_csv(&cmp))?;
    let json = serde_json::to_string_pretty(&cmp).map_err(|e| CliError::Runtime(e.into()))?;
    write(&out_dir.join("comparison.json"), &format!("{json}\n"))?;

    for v in &cmp.variants {
        println!("{:<20} final {:.4} ± {:.4}", v.name, v.final_mean, v.final_sd);
    }
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<(), CliError> {
    let report = read_report_json(&args.input).map_err(|e| match e {
        Error::Io { .. } => CliError::Runtime(e),
        other => CliError::Config(other),
    })?;
    let output = args.output.unwrap_or_else(|| args.input.with_extension("csv"));
    write(&output, &report_to_csv(&report))?;
    Ok(())
}
