//! Score a schedule by hand and render its Gantt chart.
//!
//! Two machines, four jobs, everything eligible everywhere. Setups depend on
//! which job ran before, loads count processing only, and each assignment
//! earns a value, so the combined objective trades all three against each
//! other.

use schedbal::{
    evaluate, to_gantt, validate_schedule, ObjectiveWeights, ProblemInstance, Schedule,
};

fn main() {
    let n_jobs = 4;
    let mut processing = Vec::new();
    let mut value = Vec::new();
    for j in 0..n_jobs as i64 {
        for m in 0..2 {
            processing.push(Some(3 + j));
            value.push(Some(10 * (j + 1) + m));
        }
    }
    let mut setup = vec![0; n_jobs * n_jobs];
    for i in 0..n_jobs {
        for j in 0..n_jobs {
            if i != j {
                setup[i * n_jobs + j] = (i as i64 - j as i64).abs() * 2;
            }
        }
    }
    let inst = ProblemInstance {
        n_machines: 2,
        n_jobs,
        weights: ObjectiveWeights::default(),
        eligible: vec![vec![0, 1]; n_jobs],
        processing,
        value,
        setup,
    };
    assert!(inst.validate().is_empty());

    let sched = Schedule { sequences: vec![vec![0, 2], vec![1, 3]] };
    assert!(validate_schedule(&inst, &sched).is_empty());

    let b = evaluate(&inst, &sched).unwrap();
    println!("setup_total    {}", b.setup_total);
    println!("balance_sum_sq {}", b.balance_sum_sq);
    println!("value_total    {}", b.value_total);
    println!("combined       {}", b.combined);

    let gantt = to_gantt(&inst, &sched).unwrap();
    for machine in &gantt.machines {
        print!("machine {}:", machine.machine + 1);
        for block in &machine.blocks {
            print!(" [{}..{} {:?}]", block.start, block.end, block.kind);
        }
        println!();
    }
    let out = std::env::temp_dir().join("schedule.svg");
    std::fs::write(&out, gantt.to_svg()).unwrap();
    println!("wrote {}", out.display());
}
