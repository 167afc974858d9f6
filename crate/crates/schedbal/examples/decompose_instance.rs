//! Split a larger instance along its machine-sharing graph, solve the parts
//! independently, and merge the pieces back into one schedule.

use schedbal::solvers::brute_force;
use schedbal::{
    build_machine_graph, count_variables, generate_instance, kernighan_lin_bisect,
    merge_solutions, recursive_decompose, validate_schedule,
};

fn main() {
    let inst = generate_instance(14, 6, 0.4, 19).unwrap();
    println!("{} QUBO variables whole", count_variables(&inst));

    // The machine graph weighs each pair by how many jobs they share.
    let graph = build_machine_graph(&inst);
    let cut = kernighan_lin_bisect(&graph, 0).unwrap();
    println!(
        "one bisection: {:?} | {:?}, cut weight {}",
        cut.side_a.iter().map(|m| m + 1).collect::<Vec<_>>(),
        cut.side_b.iter().map(|m| m + 1).collect::<Vec<_>>(),
        cut.cut_weight
    );

    let parts = recursive_decompose(&inst, 120, 0).unwrap();
    println!("{} parts under the 120-variable budget:", parts.len());
    for (i, part) in parts.iter().enumerate() {
        println!(
            "  part {}: machines {:?}, {} jobs, {} variables",
            i + 1,
            part.machines.iter().map(|m| m + 1).collect::<Vec<_>>(),
            part.instance.n_jobs,
            count_variables(&part.instance)
        );
    }

    let mut solved = Vec::new();
    for part in parts {
        let result = brute_force(&part.instance).unwrap();
        solved.push((part, result.schedule));
    }
    let merged = merge_solutions(&solved).unwrap();
    assert!(validate_schedule(&inst, &merged).is_empty());
    let b = schedbal::evaluate(&inst, &merged).unwrap();
    println!("merged schedule is feasible, combined {}", b.combined);
}
