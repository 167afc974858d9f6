//! Run all three solvers on the same instance and compare what they find.

use schedbal::solvers::{brute_force, hybrid_solve, sa_solve, SolverConfig};
use schedbal::generate_instance;

fn main() {
    let inst = generate_instance(7, 2, 0.9, 23).unwrap();
    let cfg = SolverConfig { seed: 1, ..SolverConfig::default() };

    let exact = brute_force(&inst).unwrap();
    let annealed = sa_solve(&inst, &cfg).unwrap();
    let hybrid = hybrid_solve(&inst, &cfg, 200).unwrap();

    for r in [&exact, &annealed, &hybrid] {
        println!(
            "{:<8} combined {:>6}  setup {:>4}  balance {:>6}  value {:>4}  {} trace points",
            r.solver_name,
            r.breakdown.combined,
            r.breakdown.setup_total,
            r.breakdown.balance_sum_sq,
            r.breakdown.value_total,
            r.best_energy_trace.len()
        );
        assert!(r.feasible);
    }
    // The heuristics can only sit at or above the exact optimum.
    assert!(annealed.breakdown.combined >= exact.breakdown.combined);
    assert!(hybrid.breakdown.combined >= exact.breakdown.combined);

    println!("\nannealer improvement trace (logical clock makes this reproducible):");
    let logical = SolverConfig { seed: 1, logical_time: true, ..SolverConfig::default() };
    let rerun = sa_solve(&inst, &logical).unwrap();
    for &(t, e) in &rerun.best_energy_trace {
        println!("  {t:>12.6}s  energy {e}");
    }
}
