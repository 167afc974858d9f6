//! Toolkit for assigning jobs to machines and sequencing them when setup
//! times depend on the job order, machine loads are pushed toward balance by
//! a quadratic penalty, and each assignment earns a machine-dependent value.
//!
//! The combined objective, minimized, is
//! `w_setup * total_setup + w_balance * sum_m load_m^2 - w_value * total_value`
//! where a machine's load counts processing time only, never setups. All
//! costs, values, and weights are integers, so objective comparisons are
//! exact.
//!
//! What lives where:
//!
//! * [`instance`]: problem data, validation, JSON round-trip, and a seeded
//!   random generator.
//! * [`schedule`]: solutions, feasibility checks, exact evaluation, and Gantt
//!   timelines.
//! * [`mip`]: an arc-flow mixed-integer model with LP-file export and an
//!   assignment checker.
//! * [`qubo`]: a slot-based binary quadratic model, penalty derivation, and
//!   decoding with greedy repair.
//! * [`decompose`]: machine-graph bisection and recursive instance splitting
//!   for problems too large to solve whole.
//! * [`solvers`]: exhaustive search, simulated annealing on the QUBO, local
//!   search on schedules, and the combined hybrid pipeline.
//! * [`bench`]: the benchmark harness behind the CLI.
//!
//! ```
//! use schedbal::{generate_instance, solvers::{sa_solve, SolverConfig}};
//!
//! let inst = generate_instance(6, 2, 0.8, 42).unwrap();
//! let cfg = SolverConfig { seed: 7, ..SolverConfig::default() };
//! let result = sa_solve(&inst, &cfg).unwrap();
//! assert!(result.feasible);
//! assert_eq!(result.schedule.sequences.len(), 2);
//! ```

pub mod bench;
pub mod decompose;
pub mod error;
pub mod instance;
pub mod mip;
pub mod qubo;
pub mod schedule;
pub mod solvers;

pub use error::{Error, Result, Violation};
pub use instance::{generate_instance, ObjectiveWeights, ProblemInstance};
pub use schedule::{
    evaluate, to_gantt, validate_schedule, GanttTimeline, ObjectiveBreakdown, Schedule,
};

pub use decompose::{
    build_machine_graph, kernighan_lin_bisect, merge_solutions, recursive_decompose,
    split_instance, InstancePart, MachineGraph, Partition,
};
pub use mip::{
    build_mip, check_assignment, count_mip_variables, export_lp, CheckReport, MipModel,
};
pub use qubo::{
    build_bqp, build_bqp_with, build_qubo, count_variables, decode_bitstring, derive_penalties,
    qubo_energy, BqpModel, DecodeOutcome, PenaltyWeights, QuboModel, SlotMode,
};
pub use solvers::{
    brute_force, hybrid_solve, local_improve, sa_solve, simulated_annealing, MoveSet,
    SolveResult, SolverConfig,
};
