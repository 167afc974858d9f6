//! Metropolis simulated annealing over a compiled QUBO.
//!
//! The model is compiled once into a symmetric CSR adjacency so the energy
//! change of a single bit flip costs one row scan; the factorized
//! squared-load groups contribute through cached per-group loads in O(1).
//! Temperatures decay geometrically across sweeps, restarts run independent
//! seed streams, and the best state across restarts wins, ties broken by
//! bitstring order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::qubo::QuboModel;
use crate::solvers::{validate_config, Clock, MoveSet, SolverConfig, FLIP_COST};

/// QUBO in flip-friendly form.
pub(crate) struct SaProblem {
    pub n: usize,
    pub offset: i64,
    linear: Vec<i64>,
    row_ptr: Vec<u32>,
    col: Vec<u32>,
    coeff: Vec<i64>,
    /// Balance-group membership: group id (or -1), processing weight, group
    /// weight per group.
    group_of: Vec<i32>,
    member_p: Vec<i64>,
    group_weight: Vec<i64>,
    /// Slot geometry per variable for the slot-exchange move: sibling of
    /// variable v at slot t' is v + (t' - t) * stride.
    stride: Vec<u32>,
    slot_count: Vec<u32>,
    slot_index: Vec<u32>,
    pub max_abs_coeff: i64,
}

impl SaProblem {
    pub(crate) fn compile(qubo: &QuboModel) -> Self {
        let n = qubo.n_vars;
        let mut degree = vec![0u32; n];
        for &(a, b, _) in &qubo.quadratic {
            degree[a as usize] += 1;
            degree[b as usize] += 1;
        }
        let mut row_ptr = vec![0u32; n + 1];
        for i in 0..n {
            row_ptr[i + 1] = row_ptr[i] + degree[i];
        }
        let nnz = row_ptr[n] as usize;
        let mut col = vec![0u32; nnz];
        let mut coeff = vec![0i64; nnz];
        let mut cursor: Vec<u32> = row_ptr[..n].to_vec();
        for &(a, b, c) in &qubo.quadratic {
            col[cursor[a as usize] as usize] = b;
            coeff[cursor[a as usize] as usize] = c;
            cursor[a as usize] += 1;
            col[cursor[b as usize] as usize] = a;
            coeff[cursor[b as usize] as usize] = c;
            cursor[b as usize] += 1;
        }

        let mut group_of = vec![-1i32; n];
        let mut member_p = vec![0i64; n];
        let mut group_weight = Vec::with_capacity(qubo.balance.len());
        for (g, group) in qubo.balance.iter().enumerate() {
            group_weight.push(group.weight);
            for &(v, p) in &group.members {
                group_of[v as usize] = g as i32;
                member_p[v as usize] = p;
            }
        }

        let mut stride = vec![0u32; n];
        let mut slot_count = vec![0u32; n];
        let mut slot_index = vec![0u32; n];
        for v in 0..n {
            let (m, t, _) = qubo.index.triple(v);
            stride[v] = qubo.index.eligible_jobs[m].len() as u32;
            slot_count[v] = qubo.index.slots[m] as u32;
            slot_index[v] = t as u32;
        }

        let mut max_abs = 0i64;
        for &c in &qubo.linear {
            max_abs = max_abs.max(c.abs());
        }
        for &(_, _, c) in &qubo.quadratic {
            max_abs = max_abs.max(c.abs());
        }
        for group in &qubo.balance {
            let mut top = [0i64; 2];
            for &(_, p) in &group.members {
                if p > top[0] {
                    top = [p, top[0]];
                } else if p > top[1] {
                    top[1] = p;
                }
            }
            max_abs = max_abs.max(group.weight * top[0] * top[0]);
            max_abs = max_abs.max(2 * group.weight * top[0] * top[1]);
        }

        SaProblem {
            n,
            offset: qubo.offset,
            linear: qubo.linear.clone(),
            row_ptr,
            col,
            coeff,
            group_of,
            member_p,
            group_weight,
            stride,
            slot_count,
            slot_index,
            max_abs_coeff: max_abs,
        }
    }
}

/// Mutable annealing state with O(row) flip deltas.
pub(crate) struct SaState<'a> {
    prob: &'a SaProblem,
    pub bits: Vec<bool>,
    pub energy: i64,
    loads: Vec<i64>,
}

impl<'a> SaState<'a> {
    pub(crate) fn from_bits(prob: &'a SaProblem, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), prob.n);
        let mut loads = vec![0i64; prob.group_weight.len()];
        let mut energy = prob.offset;
        for v in 0..prob.n {
            if !bits[v] {
                continue;
            }
            energy += prob.linear[v];
            for e in prob.row_ptr[v] as usize..prob.row_ptr[v + 1] as usize {
                let u = prob.col[e] as usize;
                // Count each lit pair once.
                if u > v && bits[u] {
                    energy += prob.coeff[e];
                }
            }
            if prob.group_of[v] >= 0 {
                loads[prob.group_of[v] as usize] += prob.member_p[v];
            }
        }
        for (g, &load) in loads.iter().enumerate() {
            energy += prob.group_weight[g] * load * load;
        }
        SaState { prob, bits, energy, loads }
    }

    pub(crate) fn random(prob: &'a SaProblem, rng: &mut ChaCha8Rng) -> Self {
        let bits = (0..prob.n).map(|_| rng.gen_bool(0.5)).collect();
        Self::from_bits(prob, bits)
    }

    /// Energy change of flipping bit v, in one row scan.
    pub(crate) fn delta(&self, v: usize) -> i64 {
        let p = self.prob;
        let sign = if self.bits[v] { -1 } else { 1 };
        let mut d = sign * p.linear[v];
        for e in p.row_ptr[v] as usize..p.row_ptr[v + 1] as usize {
            if self.bits[p.col[e] as usize] {
                d += sign * p.coeff[e];
            }
        }
        let g = p.group_of[v];
        if g >= 0 {
            let load = self.loads[g as usize];
            let new_load = load + sign * p.member_p[v];
            d += p.group_weight[g as usize] * (new_load * new_load - load * load);
        }
        d
    }

    pub(crate) fn apply(&mut self, v: usize, delta: i64) {
        let sign = if self.bits[v] { -1 } else { 1 };
        let g = self.prob.group_of[v];
        if g >= 0 {
            self.loads[g as usize] += sign * self.prob.member_p[v];
        }
        self.bits[v] = !self.bits[v];
        self.energy += delta;
    }

    /// The same-machine, same-job variable at another slot, if any other slot
    /// exists; picks among the other slots by `pick`.
    fn slot_sibling(&self, v: usize, pick: u32) -> Option<usize> {
        let p = self.prob;
        let count = p.slot_count[v];
        if count <= 1 {
            return None;
        }
        let t = p.slot_index[v];
        let mut other = pick % (count - 1);
        if other >= t {
            other += 1;
        }
        Some((v as i64 + (other as i64 - t as i64) * p.stride[v] as i64) as usize)
    }
}

pub(crate) struct RawSa {
    pub bits: Vec<bool>,
    pub energy: i64,
    pub trace: Vec<(f64, i64)>,
}

/// Annealing loop against a shared clock; the clock is advanced per sweep and
/// the time budget is checked at sweep boundaries only.
pub(crate) fn run_sa(prob: &SaProblem, cfg: &SolverConfig, clock: &mut Clock) -> Result<RawSa> {
    validate_config(cfg)?;
    let t_final = cfg.t_final;
    let t_initial = cfg
        .t_initial
        .unwrap_or(prob.max_abs_coeff as f64)
        .max(t_final);
    let ratio = t_final / t_initial;

    let mut best: Option<(i64, Vec<bool>)> = None;
    let mut trace: Vec<(f64, i64)> = Vec::new();
    let mut out_of_time = false;
    for restart in 0..cfg.restarts {
        if out_of_time {
            break;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ restart as u64);
        let mut state = SaState::random(prob, &mut rng);
        let improved = |energy: i64,
                            bits: &Vec<bool>,
                            best: &mut Option<(i64, Vec<bool>)>,
                            trace: &mut Vec<(f64, i64)>,
                            at: f64| {
            let better = match best {
                Some((e, b)) => energy < *e || (energy == *e && bits < b),
                None => true,
            };
            if better {
                if best.as_ref().map_or(true, |&(e, _)| energy < e) {
                    trace.push((at, energy));
                }
                *best = Some((energy, bits.clone()));
            }
        };
        improved(state.energy, &state.bits, &mut best, &mut trace, clock.elapsed());
        if prob.n == 0 {
            continue;
        }
        for sweep in 0..cfg.sweeps {
            if let Some(budget) = cfg.time_budget {
                if clock.elapsed() >= budget {
                    out_of_time = true;
                    break;
                }
            }
            let temp = if cfg.sweeps == 1 {
                t_initial
            } else {
                t_initial * ratio.powf(sweep as f64 / (cfg.sweeps - 1) as f64)
            };
            for step in 0..prob.n {
                let v = rng.gen_range(0..prob.n);
                let slot_swap = cfg.moves == MoveSet::BitFlipSlotSwap && step % 4 == 3;
                if slot_swap {
                    let pick = rng.gen::<u32>();
                    if let Some(u) = state.slot_sibling(v, pick) {
                        if state.bits[v] != state.bits[u] {
                            let d1 = state.delta(v);
                            state.apply(v, d1);
                            let d2 = state.delta(u);
                            let total = d1 + d2;
                            if total <= 0
                                || rng.gen::<f64>() < (-(total as f64) / temp).exp()
                            {
                                state.apply(u, d2);
                            } else {
                                let undo = state.delta(v);
                                state.apply(v, undo);
                            }
                            continue;
                        }
                    }
                }
                let d = state.delta(v);
                if d <= 0 || rng.gen::<f64>() < (-(d as f64) / temp).exp() {
                    state.apply(v, d);
                }
            }
            clock.advance(prob.n as f64 * FLIP_COST);
            improved(state.energy, &state.bits, &mut best, &mut trace, clock.elapsed());
        }
    }
    let (energy, bits) = best.unwrap();
    Ok(RawSa { bits, energy, trace })
}

#[derive(Debug, Clone)]
pub struct SaOutcome {
    pub bits: Vec<bool>,
    pub energy: i64,
    /// (elapsed seconds, energy), strictly improving.
    pub trace: Vec<(f64, i64)>,
}

/// Anneals a QUBO: Metropolis single-bit flips, geometric temperature decay,
/// best state across restarts. Deterministic per seed when no time budget
/// truncates the run (or under `logical_time`).
pub fn simulated_annealing(qubo: &QuboModel, cfg: &SolverConfig) -> Result<SaOutcome> {
    let prob = SaProblem::compile(qubo);
    let mut clock = Clock::new(cfg.logical_time);
    let raw = run_sa(&prob, cfg, &mut clock)?;
    Ok(SaOutcome { bits: raw.bits, energy: raw.energy, trace: raw.trace })
}
