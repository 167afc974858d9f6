//! Steepest-descent local search in schedule space.
//!
//! Three move families: adjacent swap within a machine, relocation of one job
//! to any position on any eligible machine, and reversal of a within-machine
//! segment (2-opt). Every pass scores all moves, applies the single best
//! strictly improving one, and stops when none improves. The combined
//! objective strictly decreases each pass and is integer, so termination is
//! guaranteed. Ties between equally good moves are broken by a seeded
//! uniform pick, making the whole search deterministic per seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::schedule::{validate_schedule, Schedule};

#[derive(Debug, Clone, Copy)]
enum Move {
    AdjacentSwap { m: usize, pos: usize },
    Relocate { from_m: usize, pos: usize, to_m: usize, to_pos: usize },
    Reverse { m: usize, lo: usize, hi: usize },
}

/// Contribution of one machine to the combined objective.
fn machine_cost(inst: &ProblemInstance, m: usize, seq: &[usize]) -> i64 {
    let w = inst.weights;
    let mut load = 0i64;
    let mut value = 0i64;
    for &j in seq {
        load += inst.processing_time(j, m).unwrap();
        value += inst.job_value(j, m).unwrap();
    }
    let setup: i64 = seq.windows(2).map(|p| inst.setup_time(p[0], p[1])).sum();
    w.w_setup * setup + w.w_balance * load * load - w.w_value * value
}

fn setup_sum(inst: &ProblemInstance, seq: &[usize]) -> i64 {
    seq.windows(2).map(|p| inst.setup_time(p[0], p[1])).sum()
}

pub fn local_improve(inst: &ProblemInstance, sched: &Schedule, seed: u64) -> Result<Schedule> {
    Ok(local_improve_counted(inst, sched, seed)?.0)
}

/// Also reports how many candidate moves were scored, for time accounting.
pub(crate) fn local_improve_counted(
    inst: &ProblemInstance,
    sched: &Schedule,
    seed: u64,
) -> Result<(Schedule, u64)> {
    let violations = validate_schedule(inst, sched);
    if !violations.is_empty() {
        return Err(Error::InfeasibleSchedule(violations));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seqs = sched.sequences.clone();
    let mut evals = 0u64;
    let mut scratch: Vec<usize> = Vec::new();
    loop {
        let mut best_delta = 0i64;
        let mut best_move: Option<Move> = None;
        let mut ties = 0u32;
        let mut consider = |delta: i64, mv: Move, rng: &mut ChaCha8Rng| {
            if delta < best_delta {
                best_delta = delta;
                best_move = Some(mv);
                ties = 1;
            } else if delta == best_delta && best_move.is_some() {
                // Uniform choice among equal-best moves via streaming count.
                ties += 1;
                if rng.gen_range(0..ties) == 0 {
                    best_move = Some(mv);
                }
            }
        };

        for m in 0..inst.n_machines {
            let seq = &seqs[m];
            let before_setup = setup_sum(inst, seq);
            // Adjacent swaps and reversals only move setups; loads and values
            // stay put.
            for pos in 0..seq.len().saturating_sub(1) {
                scratch.clear();
                scratch.extend_from_slice(seq);
                scratch.swap(pos, pos + 1);
                evals += 1;
                let delta = inst.weights.w_setup * (setup_sum(inst, &scratch) - before_setup);
                consider(delta, Move::AdjacentSwap { m, pos }, &mut rng);
            }
            for lo in 0..seq.len() {
                for hi in lo + 2..seq.len() {
                    scratch.clear();
                    scratch.extend_from_slice(seq);
                    scratch[lo..=hi].reverse();
                    evals += 1;
                    let delta =
                        inst.weights.w_setup * (setup_sum(inst, &scratch) - before_setup);
                    consider(delta, Move::Reverse { m, lo, hi }, &mut rng);
                }
            }
        }
        for from_m in 0..inst.n_machines {
            for pos in 0..seqs[from_m].len() {
                let j = seqs[from_m][pos];
                let mut reduced = seqs[from_m].clone();
                reduced.remove(pos);
                let from_before = machine_cost(inst, from_m, &seqs[from_m]);
                let from_after = machine_cost(inst, from_m, &reduced);
                for &to_m in inst.eligible_machines(j) {
                    if to_m == from_m {
                        for to_pos in 0..=reduced.len() {
                            if to_pos == pos {
                                continue;
                            }
                            scratch.clear();
                            scratch.extend_from_slice(&reduced);
                            scratch.insert(to_pos, j);
                            evals += 1;
                            let delta = inst.weights.w_setup
                                * (setup_sum(inst, &scratch) - setup_sum(inst, &seqs[from_m]));
                            consider(
                                delta,
                                Move::Relocate { from_m, pos, to_m, to_pos },
                                &mut rng,
                            );
                        }
                    } else {
                        let to_before = machine_cost(inst, to_m, &seqs[to_m]);
                        for to_pos in 0..=seqs[to_m].len() {
                            scratch.clear();
                            scratch.extend_from_slice(&seqs[to_m]);
                            scratch.insert(to_pos, j);
                            evals += 1;
                            let delta = from_after + machine_cost(inst, to_m, &scratch)
                                - from_before
                                - to_before;
                            consider(
                                delta,
                                Move::Relocate { from_m, pos, to_m, to_pos },
                                &mut rng,
                            );
                        }
                    }
                }
            }
        }

        match best_move {
            Some(mv) if best_delta < 0 => apply(&mut seqs, mv),
            _ => break,
        }
    }
    Ok((Schedule { sequences: seqs }, evals))
}

fn apply(seqs: &mut [Vec<usize>], mv: Move) {
    match mv {
        Move::AdjacentSwap { m, pos } => seqs[m].swap(pos, pos + 1),
        Move::Relocate { from_m, pos, to_m, to_pos } => {
            let j = seqs[from_m].remove(pos);
            seqs[to_m].insert(to_pos, j);
        }
        Move::Reverse { m, lo, hi } => seqs[m][lo..=hi].reverse(),
    }
}
