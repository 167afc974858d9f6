//! Build the slot-encoded binary quadratic model, scan every bitstring of a
//! tiny instance, and show that the penalized minimum is a feasible schedule.

use schedbal::qubo::{bqp_objective, constraint_penalty};
use schedbal::{
    build_bqp, build_qubo, decode_bitstring, derive_penalties, evaluate, generate_instance,
    qubo_energy,
};

fn main() {
    let inst = generate_instance(3, 2, 0.8, 3).unwrap();
    let bqp = build_bqp(&inst).unwrap();
    let pen = derive_penalties(&inst).unwrap();
    println!(
        "{} variables, penalties l1={} l2={} l3={}",
        bqp.index.n_vars(),
        pen.lambda1,
        pen.lambda2,
        pen.lambda3
    );
    let qubo = build_qubo(&bqp, &pen).unwrap();
    println!(
        "offset {}, {} quadratic entries before balance expansion",
        qubo.offset,
        qubo.quadratic.len()
    );

    let n = qubo.n_vars;
    assert!(n <= 20, "exhaustive scan only works small");
    let mut best: Option<(i64, Vec<bool>)> = None;
    for mask in 0u64..(1 << n) {
        let bits: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        let e = qubo_energy(&qubo, &bits).unwrap();
        // The penalized energy is always objective + weighted violations.
        let split = bqp_objective(&bqp, &bits).unwrap() + constraint_penalty(&bqp, &pen, &bits).unwrap();
        assert_eq!(e, split);
        if best.as_ref().map_or(true, |&(b, _)| e < b) {
            best = Some((e, bits));
        }
    }
    let (energy, bits) = best.unwrap();
    println!("global minimum energy {energy}");

    let decoded = decode_bitstring(&bqp, &bits, false).unwrap();
    assert!(decoded.feasible, "minimum decodes without repair");
    let b = evaluate(&inst, &decoded.schedule).unwrap();
    println!("decoded combined {} (matches energy: {})", b.combined, b.combined == energy);
    for (m, seq) in decoded.schedule.sequences.iter().enumerate() {
        let jobs: Vec<String> = seq.iter().map(|&j| (j + 1).to_string()).collect();
        println!("  machine {}: [{}]", m + 1, jobs.join(", "));
    }
}
