use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use minlp_conflict::harness::report::{self, render_table, to_json, write_file};
use minlp_conflict::harness::{run_suite, write_corpus, BenchConfig, Family, RunRow};
use minlp_conflict::model::io::parse_json;
use minlp_conflict::model::load_instance;
use minlp_conflict::nlpcert::{self, CertStatus};
use minlp_conflict::solver::{solve, ConflictMode, Settings, SolveResult, SolveStatus};

const EXIT_OK: u8 = 0;
const EXIT_LIMIT: u8 = 1;
const EXIT_ERROR: u8 = 2;

#[derive(Parser)]
#[command(name = "minlp-conflict", version, about = "Spatial branch-and-bound with conflict analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance file.
    Solve(SolveArgs),
    /// Run every setting on every instance of a directory.
    Bench(BenchArgs),
    /// Write a generated corpus.
    Gen(GenArgs),
    /// Convex infeasibility certificates.
    Nlpcert {
        #[command(subcommand)]
        command: NlpcertCommand,
    },
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    /// none, graph, dualray or dualray-loc.
    #[arg(long, default_value = "dualray-loc")]
    conflict: ConflictMode,
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    node_limit: Option<u64>,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the result as JSON.
    #[arg(long, value_name = "OUT")]
    json: Option<PathBuf>,
    /// Write the result as a one-row CSV.
    #[arg(long, value_name = "OUT")]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    dir: PathBuf,
    /// Comma-separated settings; the first one is the baseline.
    #[arg(long, value_delimiter = ',', default_value = "noconflict,confgraph,dualray,dualray-loc")]
    settings: Vec<ConflictMode>,
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    node_limit: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// CSV with one row per run.
    #[arg(long, default_value = "report.csv")]
    out: PathBuf,
    /// JSON report (default: the CSV path with a `.json` extension).
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Instances per family.
    #[arg(long, default_value_t = 20)]
    count: usize,
    /// Only this family (a, b or c).
    #[arg(long)]
    family: Option<Family>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum NlpcertCommand {
    /// Check multipliers against a convex subproblem.
    Verify {
        subproblem: PathBuf,
        multipliers: PathBuf,
        /// Also write the report to this file.
        #[arg(long, value_name = "OUT")]
        json: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Nlpcert { command: NlpcertCommand::Verify { subproblem, multipliers, json } } => {
            cmd_verify(&subproblem, &multipliers, json.as_deref())
        }
    };
    ExitCode::from(code.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        EXIT_ERROR
    }))
}

type CmdResult = Result<u8, Box<dyn std::error::Error>>;

fn finite(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

fn result_json(name: &str, mode: ConflictMode, r: &SolveResult) -> Value {
    json!({
        "instance": name,
        "setting": mode.as_str(),
        "status": r.status.as_str(),
        "objective": r.objective,
        "best_bound": finite(r.best_bound),
        "incumbent": r.incumbent,
        "nodes": r.nodes,
        "lp_iterations": r.lp_iterations,
        "time_s": r.time_s,
        "infeasible_lps": r.infeasible_lps,
        "propagation_prunes": r.propagation_prunes,
        "unresolved_nodes": r.unresolved_nodes,
        "max_depth": r.max_depth,
        "confs_glb": r.stats.confs_glb,
        "confs_loc": r.stats.confs_loc,
        "proofs_rejected": r.stats.proofs_rejected,
        "proofs_invalid": r.stats.proofs_invalid,
        "graph_conflicts": r.stats.graph_conflicts,
        "lift": {
            "root": r.stats.lift.root,
            "half": r.stats.lift.half,
            "partial": r.stats.lift.partial,
            "none": r.stats.lift.none,
        },
    })
}

fn cmd_solve(args: SolveArgs) -> CmdResult {
    let inst = load_instance(&args.file)?;
    let settings = Settings {
        time_limit: args.time_limit,
        node_limit: args.node_limit,
        tol: args.tol,
        seed: args.seed,
        ..Settings::with_conflict(args.conflict)
    };
    let r = solve(&inst, &settings)?;
    let objective = r.objective.map_or("-".to_string(), |v| format!("{v}"));
    println!("instance   {}", inst.name);
    println!("setting    {}", args.conflict);
    println!("status     {}", r.status);
    println!("objective  {objective}");
    println!("bound      {}", r.best_bound);
    println!("nodes      {}", r.nodes);
    println!("time       {:.3}s", r.time_s);
    println!(
        "conflicts  {} global, {} local, {} rejected, lift {}/{}/{}/{}",
        r.stats.confs_glb,
        r.stats.confs_loc,
        r.stats.proofs_rejected,
        r.stats.lift.root,
        r.stats.lift.half,
        r.stats.lift.partial,
        r.stats.lift.none
    );
    if let Some(path) = &args.json {
        let text = serde_json::to_string_pretty(&result_json(&inst.name, args.conflict, &r))?;
        write_file(path, &text)?;
    }
    if let Some(path) = &args.csv {
        let row = RunRow {
            instance: inst.name.clone(),
            setting: args.conflict.as_str().to_string(),
            status: r.status.as_str().to_string(),
            objective: r.objective,
            time_s: r.time_s,
            nodes: r.nodes,
            confs_glb: r.stats.confs_glb,
            confs_loc: r.stats.confs_loc,
            proofs_rejected: r.stats.proofs_rejected,
            lift_root: r.stats.lift.root,
            lift_half: r.stats.lift.half,
            lift_partial: r.stats.lift.partial,
            lift_none: r.stats.lift.none,
            lp_iterations: r.lp_iterations,
        };
        write_file(path, &report::csv_string(&[row]))?;
    }
    Ok(match r.status {
        SolveStatus::Optimal | SolveStatus::Infeasible => EXIT_OK,
        SolveStatus::Limit => EXIT_LIMIT,
    })
}

fn cmd_bench(args: BenchArgs) -> CmdResult {
    let config = BenchConfig {
        settings: args.settings,
        time_limit: args.time_limit,
        node_limit: args.node_limit,
        seed: args.seed,
        threads: args.threads,
        ..BenchConfig::default()
    };
    let report = run_suite(&args.dir, &config)?;
    write_file(&args.out, &report::csv_string(&report.rows))?;
    let json_path = args.json.unwrap_or_else(|| args.out.with_extension("json"));
    write_file(&json_path, &to_json(&report))?;
    // a closed pipe (e.g. `| head`) is not an error
    let mut out = std::io::stdout().lock();
    let _ = write!(out, "{}", render_table(&report));
    let _ = writeln!(out, "wrote {} and {}", args.out.display(), json_path.display());
    Ok(EXIT_OK)
}

fn cmd_gen(args: GenArgs) -> CmdResult {
    let paths = write_corpus(&args.out, args.seed, args.count, args.family)?;
    println!("wrote {} instances to {}", paths.len(), args.out.display());
    Ok(EXIT_OK)
}

fn read_json(path: &Path) -> Result<Value, Box<dyn std::error::Error>> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    Ok(parse_json(&text)?)
}

fn cmd_verify(subproblem: &Path, multipliers: &Path, out: Option<&Path>) -> CmdResult {
    let sub = nlpcert::subproblem_from_json(&read_json(subproblem)?)?;
    let (m, point) = nlpcert::multipliers_from_json(&read_json(multipliers)?)?;
    let rep = nlpcert::verify(&sub, &m, point.as_deref())?;
    let text = serde_json::to_string_pretty(&rep.to_json())?;
    println!("{text}");
    if let Some(path) = out {
        write_file(path, &text)?;
    }
    Ok(match rep.status {
        CertStatus::Certified => EXIT_OK,
        CertStatus::NotCertified => EXIT_LIMIT,
        CertStatus::InvalidMultipliers => EXIT_ERROR,
    })
}
