//! Build the arc-flow mixed-integer model and write it as an LP file, then
//! round-trip a known schedule through the assignment checker.

use schedbal::mip::encode_schedule;
use schedbal::solvers::brute_force;
use schedbal::{build_mip, check_assignment, export_lp, generate_instance};

fn main() {
    let inst = generate_instance(5, 2, 0.9, 7).unwrap();
    let model = build_mip(&inst).unwrap();
    println!("{} variables, {} rows, big M = {}", model.n_vars(), model.rows.len(), model.big_m);

    let lp = export_lp(&model);
    let out = std::env::temp_dir().join("model.lp");
    std::fs::write(&out, &lp).unwrap();
    println!("wrote {} ({} lines)", out.display(), lp.lines().count());

    // Encode the known optimum as a variable assignment; the checker must
    // find no violated rows and reproduce the objective exactly.
    let best = brute_force(&inst).unwrap();
    let assignment = encode_schedule(&model, &best.schedule).unwrap();
    let report = check_assignment(&model, &assignment).unwrap();
    println!("violations: {}", report.violations.len());
    println!("checker objective: {}", report.objective);
    println!("evaluator combined: {}", best.breakdown.combined);
    assert!(report.violations.is_empty());
    assert_eq!(report.objective, best.breakdown.combined as f64);
}
