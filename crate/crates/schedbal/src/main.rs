//! Command-line front end. All real work lives in the library; this file
//! only parses arguments, moves files around, and picks exit codes:
//! 0 success, 1 invalid input, 2 benchmark runs failed.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use schedbal::bench::{
    parse_solver_specs, records_to_csv, run_benchmark, summary_to_json, BenchOptions,
};
use schedbal::solvers::{brute_force, hybrid_solve, sa_solve, SolveResult, SolverConfig};
use schedbal::{
    build_bqp_with, build_mip, build_qubo, decompose, derive_penalties, evaluate, export_lp,
    generate_instance, recursive_decompose, to_gantt, validate_schedule, ProblemInstance,
    Schedule, SlotMode,
};

#[derive(Parser)]
#[command(name = "schedbal", version, about = "Machine assignment and sequencing toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a random instance document
    Gen(GenArgs),
    /// Evaluate a schedule against an instance
    Eval(EvalArgs),
    /// Write the mixed-integer model as an LP file
    ExportLp(ExportLpArgs),
    /// Write the binary quadratic model as a QUBO file
    ExportQubo(ExportQuboArgs),
    /// Split an instance into solvable parts
    Decompose(DecomposeArgs),
    /// Solve an instance and write the result document
    Solve(SolveArgs),
    /// Run a solver comparison over an instance directory
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    jobs: usize,
    #[arg(long)]
    machines: usize,
    #[arg(long)]
    density: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    schedule: PathBuf,
    /// Also write a Gantt chart (.svg, or .json for the raw timeline)
    #[arg(long)]
    gantt: Option<PathBuf>,
}

#[derive(Args)]
struct ExportLpArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExportQuboArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Give every machine one slot per job instead of truncating to its
    /// eligible count
    #[arg(long)]
    full_slots: bool,
}

#[derive(Args)]
struct DecomposeArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = decompose::DEFAULT_MAX_VARS)]
    max_vars: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_parser = ["brute", "sa", "hybrid"])]
    solver: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Solve-time budget in seconds
    #[arg(long)]
    time_budget: Option<f64>,
    /// Decomposition budget for the hybrid solver
    #[arg(long, default_value_t = decompose::DEFAULT_MAX_VARS)]
    max_vars: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of instance documents (*.json)
    #[arg(long)]
    instances: PathBuf,
    /// JSON file with the solver list
    #[arg(long)]
    solvers: PathBuf,
    /// Comma-separated seed list
    #[arg(long)]
    seeds: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    summary: PathBuf,
    /// Worker threads (0 = all cores)
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Count model-build time in wall_s
    #[arg(long)]
    include_build: bool,
}

fn read_instance(path: &Path) -> Result<ProblemInstance, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("read {}: {e}", path.display()))?;
    ProblemInstance::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("write {}: {e}", path.display()))
}

fn trace_json(trace: &[(f64, i64)]) -> serde_json::Value {
    serde_json::Value::Array(
        trace.iter().map(|&(t, e)| serde_json::json!([t, e])).collect(),
    )
}

fn result_doc(result: &SolveResult) -> String {
    let sched: serde_json::Value =
        serde_json::from_str(&result.schedule.serialize()).expect("schedule doc");
    let doc = serde_json::json!({
        "solver": result.solver_name,
        "feasible": result.feasible,
        "objective": {
            "setup_total": result.breakdown.setup_total,
            "balance_sum_sq": result.breakdown.balance_sum_sq,
            "value_total": result.breakdown.value_total,
            "combined": result.breakdown.combined,
        },
        "wall_time": result.wall_time,
        "build_time": result.build_time,
        "trace": trace_json(&result.best_energy_trace),
        "schedule": sched,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("result doc");
    text.push('\n');
    text
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.cmd {
        Cmd::Gen(a) => {
            let inst = generate_instance(a.jobs, a.machines, a.density, a.seed)
                .map_err(|e| e.to_string())?;
            write_text(&a.out, &inst.serialize())?;
            println!("wrote {} ({} jobs, {} machines)", a.out.display(), a.jobs, a.machines);
        }
        Cmd::Eval(a) => {
            let inst = read_instance(&a.instance)?;
            let text = std::fs::read_to_string(&a.schedule)
                .map_err(|e| format!("read {}: {e}", a.schedule.display()))?;
            let sched = Schedule::parse(&text).map_err(|e| e.to_string())?;
            let violations = validate_schedule(&inst, &sched);
            if !violations.is_empty() {
                let mut msg = String::from("infeasible schedule:");
                for v in violations {
                    msg.push_str(&format!("\n  {v}"));
                }
                return Err(msg);
            }
            let b = evaluate(&inst, &sched).map_err(|e| e.to_string())?;
            println!("setup_total    {}", b.setup_total);
            println!("balance_sum_sq {}", b.balance_sum_sq);
            println!("value_total    {}", b.value_total);
            println!("combined       {}", b.combined);
            if let Some(path) = a.gantt {
                let timeline = to_gantt(&inst, &sched).map_err(|e| e.to_string())?;
                let body = if path.extension().is_some_and(|e| e == "json") {
                    timeline.to_json()
                } else {
                    timeline.to_svg()
                };
                write_text(&path, &body)?;
                println!("wrote {}", path.display());
            }
        }
        Cmd::ExportLp(a) => {
            let inst = read_instance(&a.instance)?;
            let model = build_mip(&inst).map_err(|e| e.to_string())?;
            write_text(&a.out, &export_lp(&model))?;
            println!("wrote {} ({} variables, {} rows)", a.out.display(), model.n_vars(), model.rows.len());
        }
        Cmd::ExportQubo(a) => {
            let inst = read_instance(&a.instance)?;
            let mode = if a.full_slots { SlotMode::Full } else { SlotMode::Truncated };
            let bqp = build_bqp_with(&inst, mode).map_err(|e| e.to_string())?;
            let pen = derive_penalties(&inst).map_err(|e| e.to_string())?;
            let qubo = build_qubo(&bqp, &pen).map_err(|e| e.to_string())?;
            write_text(&a.out, &qubo.export())?;
            println!("wrote {} ({} variables)", a.out.display(), qubo.n_vars);
        }
        Cmd::Decompose(a) => {
            let inst = read_instance(&a.instance)?;
            let parts = recursive_decompose(&inst, a.max_vars, a.seed)
                .map_err(|e| e.to_string())?;
            std::fs::create_dir_all(&a.out_dir)
                .map_err(|e| format!("create {}: {e}", a.out_dir.display()))?;
            let mut leaves = Vec::new();
            for (i, part) in parts.iter().enumerate() {
                let file = format!("leaf_{}.json", i + 1);
                write_text(&a.out_dir.join(&file), &part.instance.serialize())?;
                // Local id -> original id, 1-based on both sides like the
                // instance documents.
                let machines: BTreeMap<String, usize> = part
                    .machines
                    .iter()
                    .enumerate()
                    .map(|(local, &orig)| ((local + 1).to_string(), orig + 1))
                    .collect();
                let jobs: BTreeMap<String, usize> = part
                    .jobs
                    .iter()
                    .enumerate()
                    .map(|(local, &orig)| ((local + 1).to_string(), orig + 1))
                    .collect();
                leaves.push(serde_json::json!({
                    "id": i + 1,
                    "file": file,
                    "machines": machines,
                    "jobs": jobs,
                }));
            }
            let manifest = serde_json::json!({ "leaves": leaves });
            let mut text = serde_json::to_string_pretty(&manifest).expect("manifest");
            text.push('\n');
            write_text(&a.out_dir.join("manifest.json"), &text)?;
            println!("wrote {} parts to {}", parts.len(), a.out_dir.display());
        }
        Cmd::Solve(a) => {
            let inst = read_instance(&a.instance)?;
            let cfg = SolverConfig {
                seed: a.seed,
                time_budget: a.time_budget,
                ..SolverConfig::default()
            };
            let result = match a.solver.as_str() {
                "brute" => brute_force(&inst),
                "sa" => sa_solve(&inst, &cfg),
                "hybrid" => hybrid_solve(&inst, &cfg, a.max_vars),
                _ => unreachable!("clap restricts the solver list"),
            }
            .map_err(|e| e.to_string())?;
            write_text(&a.out, &result_doc(&result))?;
            println!(
                "{}: combined {} ({}) in {:.3}s",
                result.solver_name,
                result.breakdown.combined,
                if result.feasible { "feasible" } else { "infeasible" },
                result.wall_time
            );
        }
        Cmd::Bench(a) => {
            let mut seeds = Vec::new();
            for part in a.seeds.split(',') {
                let s = part.trim();
                if s.is_empty() {
                    continue;
                }
                seeds.push(s.parse::<u64>().map_err(|e| format!("seed `{s}`: {e}"))?);
            }
            if seeds.is_empty() {
                return Err("no seeds given".into());
            }
            let spec_text = std::fs::read_to_string(&a.solvers)
                .map_err(|e| format!("read {}: {e}", a.solvers.display()))?;
            let solvers = parse_solver_specs(&spec_text).map_err(|e| e.to_string())?;
            let mut paths: Vec<PathBuf> = std::fs::read_dir(&a.instances)
                .map_err(|e| format!("read {}: {e}", a.instances.display()))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e == "json"))
                .collect();
            paths.sort();
            let mut instances = Vec::new();
            for path in &paths {
                let name = path
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .ok_or_else(|| format!("bad file name {}", path.display()))?
                    .to_string();
                instances.push((name, read_instance(path)?));
            }
            let opts = BenchOptions { jobs: a.jobs, include_build: a.include_build };
            let out = run_benchmark(&instances, &solvers, &seeds, &opts)
                .map_err(|e| e.to_string())?;
            write_text(&a.out, &records_to_csv(&out.records))?;
            write_text(&a.summary, &summary_to_json(&out.summary))?;
            println!(
                "{} runs, {} failures, {} instances summarized",
                out.records.len(),
                out.failures.len(),
                out.summary.instances.len()
            );
            for f in &out.failures {
                eprintln!("failed: {} / {} / seed {}: {}", f.instance, f.solver, f.seed, f.message);
            }
            if !out.failures.is_empty() {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version land here too; only real usage errors are
            // invalid input.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
