//! Exact enumeration over machine assignments and sequence orders.
//!
//! Jobs are placed one at a time in id order; each job tries every eligible
//! machine and every insertion position in that machine's current sequence.
//! Each (assignment, per-machine order) combination is reached by exactly one
//! insertion path, so the search space is counted exactly beforehand by a
//! small dynamic program and oversized inputs are rejected instead of
//! running forever.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::schedule::{evaluate, Schedule};
use crate::solvers::{Clock, SolveResult, NODE_COST};

pub(crate) const SEARCH_LIMIT: u128 = 10_000_000;
const STATE_LIMIT: usize = 200_000;

/// Exact number of leaves the enumeration would visit: the sum over
/// assignments of the product of per-machine sequence counts. Placing a job
/// on a machine with k jobs multiplies the path count by k + 1 (its insertion
/// positions), which is how factorials accumulate. Saturates, and returns
/// u128::MAX if the state table itself would explode.
pub(crate) fn search_space(inst: &ProblemInstance) -> u128 {
    let mut states: HashMap<Vec<u16>, u128> = HashMap::new();
    states.insert(vec![0u16; inst.n_machines], 1);
    for j in 0..inst.n_jobs {
        let mut next: HashMap<Vec<u16>, u128> = HashMap::new();
        for (counts, ways) in &states {
            for &m in inst.eligible_machines(j) {
                let grown = ways.saturating_mul(counts[m] as u128 + 1);
                let mut counts = counts.clone();
                counts[m] += 1;
                let slot = next.entry(counts).or_insert(0);
                *slot = slot.saturating_add(grown);
            }
        }
        if next.len() > STATE_LIMIT {
            return u128::MAX;
        }
        states = next;
    }
    states.values().fold(0u128, |acc, &w| acc.saturating_add(w))
}

struct Search<'a> {
    inst: &'a ProblemInstance,
    sequences: Vec<Vec<usize>>,
    best: Option<(i64, Vec<Vec<usize>>)>,
    clock: &'a mut Clock,
    trace: Vec<(f64, i64)>,
}

impl Search<'_> {
    fn combined(&self) -> i64 {
        let w = self.inst.weights;
        let mut total = 0i64;
        for (m, seq) in self.sequences.iter().enumerate() {
            let mut load = 0;
            let mut value = 0;
            for &j in seq {
                load += self.inst.processing_time(j, m).unwrap();
                value += self.inst.job_value(j, m).unwrap();
            }
            let setup: i64 = seq
                .windows(2)
                .map(|pair| self.inst.setup_time(pair[0], pair[1]))
                .sum();
            total += w.w_setup * setup + w.w_balance * load * load - w.w_value * value;
        }
        total
    }

    fn descend(&mut self, j: usize) {
        if j == self.inst.n_jobs {
            self.clock.advance(NODE_COST);
            let combined = self.combined();
            let better = match &self.best {
                Some((e, s)) => combined < *e || (combined == *e && &self.sequences < s),
                None => true,
            };
            if better {
                if self.best.as_ref().map_or(true, |&(e, _)| combined < e) {
                    self.trace.push((self.clock.elapsed(), combined));
                }
                self.best = Some((combined, self.sequences.clone()));
            }
            return;
        }
        for mi in 0..self.inst.eligible_machines(j).len() {
            let m = self.inst.eligible_machines(j)[mi];
            for pos in 0..=self.sequences[m].len() {
                self.sequences[m].insert(pos, j);
                self.descend(j + 1);
                self.sequences[m].remove(pos);
            }
        }
    }
}

/// Exact minimum of the combined objective, ties broken by the
/// lexicographically smallest sequence encoding. Rejects search spaces past
/// 10^7 leaves.
pub fn brute_force(inst: &ProblemInstance) -> Result<SolveResult> {
    brute_force_timed(inst, false)
}

pub(crate) fn brute_force_timed(inst: &ProblemInstance, logical_time: bool) -> Result<SolveResult> {
    let violations = inst.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidInstance(violations));
    }
    let estimated = search_space(inst);
    if estimated > SEARCH_LIMIT {
        return Err(Error::SearchSpaceTooLarge { estimated, limit: SEARCH_LIMIT });
    }
    let mut clock = Clock::new(logical_time);
    let mut search = Search {
        inst,
        sequences: vec![Vec::new(); inst.n_machines],
        best: None,
        clock: &mut clock,
        trace: Vec::new(),
    };
    search.descend(0);
    let (_, sequences) = search.best.unwrap();
    let trace = search.trace;
    let schedule = Schedule { sequences };
    let breakdown = evaluate(inst, &schedule)?;
    Ok(SolveResult {
        schedule,
        breakdown,
        best_energy_trace: trace,
        wall_time: clock.elapsed(),
        build_time: 0.0,
        feasible: true,
        solver_name: "brute".into(),
    })
}
