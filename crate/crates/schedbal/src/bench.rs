//! Benchmark harness: runs a Cartesian product of instances, solvers, and
//! seeds, then reports per-instance solution quality as percentage deviation
//! from the best objective any run found, and an each-vs-each time-to-target
//! matrix (how long solver A needed to match solver B's final quality).
//!
//! Records collect in a deterministic order regardless of parallelism, so
//! reruns with the same seeds produce byte-identical CSV and JSON as long as
//! the solver configs use logical time (or no times at all are compared).

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::mip::count_mip_variables;
use crate::qubo::count_variables;
use crate::schedule::validate_schedule;
use crate::solvers::{brute_force_timed, hybrid_solve, sa_solve, MoveSet, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Brute,
    Sa,
    Hybrid,
}

/// A labeled solver configuration; the per-run seed comes from the benchmark
/// seed list, not from here.
#[derive(Debug, Clone)]
pub struct SolverSpec {
    pub label: String,
    pub kind: SolverKind,
    pub config: SolverConfig,
    /// Decomposition budget, hybrid only.
    pub max_vars: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecDoc {
    label: String,
    kind: String,
    #[serde(default)]
    time_budget: Option<f64>,
    #[serde(default)]
    sweeps: Option<usize>,
    #[serde(default)]
    restarts: Option<usize>,
    #[serde(default)]
    t_initial: Option<f64>,
    #[serde(default)]
    t_final: Option<f64>,
    #[serde(default)]
    moves: Option<String>,
    #[serde(default)]
    logical_time: Option<bool>,
    #[serde(default)]
    max_vars: Option<usize>,
}

/// Parses a JSON array of solver specs. Unset fields fall back to the solver
/// defaults; `moves` is "bitflip" or "bitflip+slotswap".
pub fn parse_solver_specs(text: &str) -> Result<Vec<SolverSpec>> {
    let docs: Vec<SpecDoc> = serde_json::from_str(text)?;
    let mut specs = Vec::with_capacity(docs.len());
    for doc in docs {
        let kind = match doc.kind.as_str() {
            "brute" => SolverKind::Brute,
            "sa" => SolverKind::Sa,
            "hybrid" => SolverKind::Hybrid,
            other => {
                return Err(Error::Parse(format!(
                    "unknown solver kind `{other}` (expected brute, sa, or hybrid)"
                )))
            }
        };
        let defaults = SolverConfig::default();
        let moves = match doc.moves.as_deref() {
            None => defaults.moves,
            Some("bitflip") => MoveSet::BitFlip,
            Some("bitflip+slotswap") => MoveSet::BitFlipSlotSwap,
            Some(other) => {
                return Err(Error::Parse(format!("unknown move set `{other}`")))
            }
        };
        specs.push(SolverSpec {
            label: doc.label,
            kind,
            config: SolverConfig {
                seed: 0,
                time_budget: doc.time_budget,
                sweeps: doc.sweeps.unwrap_or(defaults.sweeps),
                restarts: doc.restarts.unwrap_or(defaults.restarts),
                t_initial: doc.t_initial,
                t_final: doc.t_final.unwrap_or(defaults.t_final),
                moves,
                logical_time: doc.logical_time.unwrap_or(false),
            },
            max_vars: doc.max_vars.unwrap_or(crate::decompose::DEFAULT_MAX_VARS),
        });
    }
    Ok(specs)
}

#[derive(Debug, Clone)]
pub struct BenchRecord {
    pub instance: String,
    pub jobs: usize,
    pub machines: usize,
    pub vars_bqp: usize,
    pub vars_mip: usize,
    pub solver: String,
    pub seed: u64,
    pub budget_s: Option<f64>,
    pub objective: i64,
    pub wall_s: f64,
    pub feasible: bool,
    /// Kept for the time-to-target summary; not a CSV column.
    pub trace: Vec<(f64, i64)>,
}

#[derive(Debug, Clone)]
pub struct BenchFailure {
    pub instance: String,
    pub solver: String,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct SolverSummary {
    pub solver: String,
    pub best_objective: i64,
    /// None when the best-known reference is zero (the formula divides by it).
    pub deviation_pct: Option<f64>,
    /// Seconds this solver's best run needed to reach each solver's final
    /// quality; None when it never got there.
    pub time_to: BTreeMap<String, Option<f64>>,
}

#[derive(Debug, Clone)]
pub struct InstanceSummary {
    pub instance: String,
    pub best_known: i64,
    pub solvers: Vec<SolverSummary>,
}

#[derive(Debug, Clone, Default)]
pub struct Summary {
    pub instances: Vec<InstanceSummary>,
}

#[derive(Debug, Clone)]
pub struct BenchOutput {
    pub records: Vec<BenchRecord>,
    pub failures: Vec<BenchFailure>,
    pub summary: Summary,
}

#[derive(Debug, Clone, Default)]
pub struct BenchOptions {
    /// Worker threads; 0 uses the rayon default.
    pub jobs: usize,
    /// Add model-build time into wall_s (solve time only otherwise).
    pub include_build: bool,
}

/// `100 * (candidate - reference) / |reference|`: positive means worse than
/// the reference under minimization, whatever the signs.
pub fn deviation_pct(candidate: i64, reference: i64) -> Result<f64> {
    if reference == 0 {
        return Err(Error::InvalidArgument(
            "deviation reference objective is zero".into(),
        ));
    }
    Ok(100.0 * (candidate - reference) as f64 / (reference as f64).abs())
}

/// Earliest trace time whose energy is at or below the target; None if the
/// trace never gets there. The trace must be non-increasing in energy.
pub fn time_to_target(trace: &[(f64, i64)], target: i64) -> Result<Option<f64>> {
    for pair in trace.windows(2) {
        if pair[1].1 > pair[0].1 {
            return Err(Error::UnsortedTrace);
        }
    }
    Ok(trace.iter().find(|&&(_, e)| e <= target).map(|&(t, _)| t))
}

fn run_one(
    name: &str,
    inst: &ProblemInstance,
    spec: &SolverSpec,
    seed: u64,
    opts: &BenchOptions,
) -> Result<BenchRecord> {
    let cfg = SolverConfig { seed, ..spec.config.clone() };
    let result = match spec.kind {
        SolverKind::Brute => brute_force_timed(inst, cfg.logical_time)?,
        SolverKind::Sa => sa_solve(inst, &cfg)?,
        SolverKind::Hybrid => hybrid_solve(inst, &cfg, spec.max_vars)?,
    };
    let wall_s = result.wall_time + if opts.include_build { result.build_time } else { 0.0 };
    Ok(BenchRecord {
        instance: name.to_string(),
        jobs: inst.n_jobs,
        machines: inst.n_machines,
        vars_bqp: count_variables(inst),
        vars_mip: count_mip_variables(inst),
        solver: spec.label.clone(),
        seed,
        budget_s: cfg.time_budget,
        objective: result.breakdown.combined,
        wall_s,
        feasible: validate_schedule(inst, &result.schedule).is_empty(),
        trace: result.best_energy_trace,
    })
}

/// Runs every (instance, solver, seed) combination, in parallel when `jobs`
/// allows. A failed run becomes a failure entry, not a record, and the rest
/// continue.
pub fn run_benchmark(
    instances: &[(String, ProblemInstance)],
    solvers: &[SolverSpec],
    seeds: &[u64],
    opts: &BenchOptions,
) -> Result<BenchOutput> {
    let mut tasks = Vec::new();
    for (name, inst) in instances {
        for spec in solvers {
            for &seed in seeds {
                tasks.push((name, inst, spec, seed));
            }
        }
    }
    let run_all = || {
        tasks
            .par_iter()
            .map(|&(name, inst, spec, seed)| {
                run_one(name, inst, spec, seed, opts).map_err(|e| BenchFailure {
                    instance: name.clone(),
                    solver: spec.label.clone(),
                    seed,
                    message: e.to_string(),
                })
            })
            .collect::<Vec<_>>()
    };
    let outcomes = if opts.jobs == 0 {
        run_all()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
        pool.install(run_all)
    };
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(r) => records.push(r),
            Err(f) => failures.push(f),
        }
    }
    let summary = summarize(&records)?;
    Ok(BenchOutput { records, failures, summary })
}

/// Per instance: the best objective over all records, each solver's deviation
/// from it, and the full solver-vs-solver time-to-quality matrix. Each
/// solver is represented by its best run (lowest objective, ties to the
/// lowest seed).
pub fn summarize(records: &[BenchRecord]) -> Result<Summary> {
    let mut by_instance: BTreeMap<&str, Vec<&BenchRecord>> = BTreeMap::new();
    for r in records {
        by_instance.entry(&r.instance).or_default().push(r);
    }
    let mut instances = Vec::new();
    for (name, recs) in by_instance {
        let best_known = recs.iter().map(|r| r.objective).min().unwrap();
        let mut best_run: BTreeMap<&str, &BenchRecord> = BTreeMap::new();
        for r in &recs {
            let slot = best_run.entry(&r.solver).or_insert(r);
            if (r.objective, r.seed) < (slot.objective, slot.seed) {
                *slot = r;
            }
        }
        let mut solvers = Vec::new();
        for (&solver, &rep) in &best_run {
            let deviation = if best_known == 0 {
                None
            } else {
                Some(deviation_pct(rep.objective, best_known)?)
            };
            let mut time_to = BTreeMap::new();
            for (&other, &other_rep) in &best_run {
                time_to.insert(
                    other.to_string(),
                    time_to_target(&rep.trace, other_rep.objective)?,
                );
            }
            solvers.push(SolverSummary {
                solver: solver.to_string(),
                best_objective: rep.objective,
                deviation_pct: deviation,
                time_to,
            });
        }
        instances.push(InstanceSummary { instance: name.to_string(), best_known, solvers });
    }
    Ok(Summary { instances })
}

pub const CSV_HEADER: &str =
    "instance,jobs,machines,vars_bqp,vars_mip,solver,seed,budget_s,objective,wall_s,feasible";

/// One row per record; budget_s is empty for unbudgeted runs, wall_s has
/// microsecond precision.
pub fn records_to_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let budget = r.budget_s.map(|b| b.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{:.6},{}\n",
            r.instance,
            r.jobs,
            r.machines,
            r.vars_bqp,
            r.vars_mip,
            r.solver,
            r.seed,
            budget,
            r.objective,
            r.wall_s,
            r.feasible
        ));
    }
    out
}

/// Deterministic pretty JSON for the summary.
pub fn summary_to_json(summary: &Summary) -> String {
    let instances: Vec<serde_json::Value> = summary
        .instances
        .iter()
        .map(|inst| {
            let solvers: Vec<serde_json::Value> = inst
                .solvers
                .iter()
                .map(|s| {
                    serde_json::json!({
                        "solver": s.solver,
                        "best_objective": s.best_objective,
                        "deviation_pct": s.deviation_pct,
                        "time_to": s.time_to,
                    })
                })
                .collect();
            serde_json::json!({
                "instance": inst.instance,
                "best_known": inst.best_known,
                "solvers": solvers,
            })
        })
        .collect();
    let doc = serde_json::json!({ "instances": instances });
    let mut text = serde_json::to_string_pretty(&doc).expect("summary serialization");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::generate_instance;

    fn logical_spec(label: &str, kind: SolverKind) -> SolverSpec {
        SolverSpec {
            label: label.into(),
            kind,
            config: SolverConfig {
                sweeps: 60,
                restarts: 2,
                logical_time: true,
                ..SolverConfig::default()
            },
            max_vars: 100,
        }
    }

    #[test]
    fn deviation_formula_and_signs() {
        assert_eq!(deviation_pct(103, 100).unwrap(), 3.0);
        assert_eq!(deviation_pct(42, 42).unwrap(), 0.0);
        assert_eq!(deviation_pct(-97, -100).unwrap(), 3.0);
        assert_eq!(deviation_pct(-103, -100).unwrap(), -3.0);
        assert!(deviation_pct(5, 0).is_err());
    }

    #[test]
    fn time_to_target_scans_the_trace() {
        let trace = vec![(1.0, 50), (2.0, 40), (3.0, 30)];
        assert_eq!(time_to_target(&trace, 40).unwrap(), Some(2.0));
        assert_eq!(time_to_target(&trace, 29).unwrap(), None);
        assert_eq!(time_to_target(&trace, 99).unwrap(), Some(1.0));
        assert_eq!(time_to_target(&[], 0).unwrap(), None);
        let unsorted = vec![(1.0, 30), (2.0, 40)];
        assert!(matches!(time_to_target(&unsorted, 0), Err(Error::UnsortedTrace)));
    }

    #[test]
    fn benchmark_runs_the_cartesian_product() {
        let instances = vec![
            ("a".to_string(), generate_instance(4, 2, 0.9, 1).unwrap()),
            ("b".to_string(), generate_instance(5, 2, 0.8, 2).unwrap()),
        ];
        let solvers = vec![
            logical_spec("brute", SolverKind::Brute),
            logical_spec("sa", SolverKind::Sa),
        ];
        let out = run_benchmark(&instances, &solvers, &[1, 2], &BenchOptions::default()).unwrap();
        assert_eq!(out.records.len(), 8);
        assert!(out.failures.is_empty());
        assert_eq!(out.summary.instances.len(), 2);
        for inst in &out.summary.instances {
            let brute = inst.solvers.iter().find(|s| s.solver == "brute").unwrap();
            assert_eq!(brute.best_objective, inst.best_known);
            for s in &inst.solvers {
                if let Some(d) = s.deviation_pct {
                    assert!(d >= 0.0, "deviation below the best known");
                }
                // Every solver reaches its own final quality at some point.
                assert!(s.time_to[&s.solver].is_some());
            }
        }
    }

    #[test]
    fn reruns_are_byte_identical_under_logical_time() {
        let instances = vec![("x".to_string(), generate_instance(6, 2, 0.8, 3).unwrap())];
        let solvers = vec![
            logical_spec("sa", SolverKind::Sa),
            logical_spec("hybrid", SolverKind::Hybrid),
        ];
        let opts = BenchOptions { jobs: 2, ..BenchOptions::default() };
        let a = run_benchmark(&instances, &solvers, &[7, 8], &opts).unwrap();
        let b = run_benchmark(&instances, &solvers, &[7, 8], &opts).unwrap();
        assert_eq!(records_to_csv(&a.records), records_to_csv(&b.records));
        assert_eq!(summary_to_json(&a.summary), summary_to_json(&b.summary));
    }

    #[test]
    fn csv_shape_matches_the_contract() {
        let instances = vec![("inst1".to_string(), generate_instance(4, 2, 1.0, 4).unwrap())];
        let mut budgeted = logical_spec("sa", SolverKind::Sa);
        budgeted.config.time_budget = Some(0.5);
        let solvers = vec![logical_spec("brute", SolverKind::Brute), budgeted];
        let out = run_benchmark(&instances, &solvers, &[9], &BenchOptions::default()).unwrap();
        let csv = records_to_csv(&out.records);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 3);
        let brute_cols: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(brute_cols.len(), 11);
        assert_eq!(brute_cols[0], "inst1");
        assert_eq!(brute_cols[3], "32");
        assert_eq!(brute_cols[4], "50");
        assert_eq!(brute_cols[7], "", "brute has no budget");
        assert_eq!(brute_cols[10], "true");
        let sa_cols: Vec<&str> = lines[2].split(',').collect();
        assert_eq!(sa_cols[7], "0.5");
    }

    #[test]
    fn empty_solver_list_is_fine() {
        let instances = vec![("a".to_string(), generate_instance(3, 2, 1.0, 1).unwrap())];
        let out = run_benchmark(&instances, &[], &[1], &BenchOptions::default()).unwrap();
        assert!(out.records.is_empty());
        assert!(out.failures.is_empty());
        assert!(out.summary.instances.is_empty());
    }

    #[test]
    fn failures_are_recorded_and_the_rest_continue() {
        // Brute cannot handle this size; SA can.
        let instances =
            vec![("big".to_string(), generate_instance(30, 4, 1.0, 5).unwrap())];
        let solvers = vec![
            logical_spec("brute", SolverKind::Brute),
            logical_spec("sa", SolverKind::Sa),
        ];
        let out = run_benchmark(&instances, &solvers, &[1], &BenchOptions::default()).unwrap();
        assert_eq!(out.failures.len(), 1);
        assert_eq!(out.failures[0].solver, "brute");
        assert!(out.failures[0].message.contains("search space"));
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].solver, "sa");
    }

    #[test]
    fn solver_specs_parse_with_defaults() {
        let text = r#"[
            {"label": "fast", "kind": "sa", "sweeps": 10, "logical_time": true},
            {"label": "deep", "kind": "hybrid", "max_vars": 64, "moves": "bitflip+slotswap"},
            {"label": "exact", "kind": "brute"}
        ]"#;
        let specs = parse_solver_specs(text).unwrap();
        assert_eq!(specs.len(), 3);
        assert_eq!(specs[0].config.sweeps, 10);
        assert!(specs[0].config.logical_time);
        assert_eq!(specs[0].config.restarts, SolverConfig::default().restarts);
        assert_eq!(specs[1].max_vars, 64);
        assert_eq!(specs[1].config.moves, MoveSet::BitFlipSlotSwap);
        assert_eq!(specs[2].kind, SolverKind::Brute);
        assert!(parse_solver_specs(r#"[{"label": "x", "kind": "gurobi"}]"#).is_err());
        assert!(parse_solver_specs(r#"[{"label": "x", "kind": "sa", "bogus": 1}]"#).is_err());
    }
}
