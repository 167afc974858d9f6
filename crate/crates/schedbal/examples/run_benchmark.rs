//! Benchmark two solvers over a handful of generated instances and print the
//! CSV plus the quality summary the CLI would write to disk.

use schedbal::bench::{
    records_to_csv, run_benchmark, summarize, BenchOptions, SolverKind, SolverSpec,
};
use schedbal::generate_instance;
use schedbal::solvers::SolverConfig;

fn main() {
    let instances: Vec<_> = (0..3)
        .map(|i| {
            let name = format!("rand{}", i + 1);
            (name, generate_instance(6, 2, 0.9, 100 + i).unwrap())
        })
        .collect();

    // Logical time keeps reruns byte-identical; drop it to measure real wall
    // time instead.
    let base = SolverConfig { logical_time: true, ..SolverConfig::default() };
    let solvers = vec![
        SolverSpec {
            label: "exact".into(),
            kind: SolverKind::Brute,
            config: base.clone(),
            max_vars: 0,
        },
        SolverSpec {
            label: "sa".into(),
            kind: SolverKind::Sa,
            config: SolverConfig { sweeps: 200, restarts: 2, ..base },
            max_vars: 0,
        },
    ];

    let out = run_benchmark(&instances, &solvers, &[1, 2, 3], &BenchOptions::default()).unwrap();
    println!("{}", records_to_csv(&out.records));

    let summary = summarize(&out.records).unwrap();
    for inst in &summary.instances {
        println!("{}: best known {}", inst.instance, inst.best_known);
        for s in &inst.solvers {
            let dev = s
                .deviation_pct
                .map(|d| format!("{d:.2}%"))
                .unwrap_or_else(|| "n/a".into());
            let reached = s.time_to["exact"]
                .map(|t| format!("{t:.6}s"))
                .unwrap_or_else(|| "never".into());
            println!("  {:<6} deviation {dev:>8}, reached exact quality at {reached}", s.solver);
        }
    }
}
