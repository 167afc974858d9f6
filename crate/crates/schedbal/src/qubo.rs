//! Position-based binary quadratic program and its unconstrained QUBO form.
//!
//! Variable `x_{m,t,j}` means job `j` sits in slot `t` of machine `m`'s
//! sequence; variables exist only for eligible (m, j) pairs. The constrained
//! program ([`BqpModel`]) carries the weighted objective (setup terms between
//! consecutive slots, squared machine loads, job values) plus three symbolic
//! constraint families: each job appears exactly once, each slot holds at
//! most one job, and an occupied slot requires the previous slot occupied.
//! [`build_qubo`] folds the constraints into the objective with penalty
//! weights large enough that every violation costs more than it could gain.
//!
//! All coefficients are exact integers. The squared-load part of the
//! objective is kept factorized as one rank-one group per machine
//! ([`BalanceGroup`]) instead of its pairwise expansion; at dense scales the
//! expansion dwarfs the rest of the matrix combined. [`QuboModel::dense`]
//! expands on demand.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::schedule::{self, Schedule};

/// How many slots a machine's sequence may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SlotMode {
    /// As many slots as the machine has eligible jobs. Fewer variables, no
    /// loss of solutions.
    #[default]
    Truncated,
    /// One slot per job, on every machine.
    Full,
}

/// Bijection between (machine, slot, job) triples and contiguous variable
/// indices, ascending by (m, t, j).
#[derive(Debug, Clone)]
pub struct VarIndex {
    pub n_machines: usize,
    pub n_jobs: usize,
    pub slots: Vec<usize>,
    /// Eligible jobs per machine, ascending; slot groups repeat this order.
    pub eligible_jobs: Vec<Vec<usize>>,
    base: Vec<usize>,
    job_pos: Vec<Vec<Option<u32>>>,
    triples: Vec<(u32, u32, u32)>,
}

impl VarIndex {
    fn build(inst: &ProblemInstance, mode: SlotMode) -> Self {
        let eligible_jobs: Vec<Vec<usize>> =
            (0..inst.n_machines).map(|m| inst.jobs_eligible_on(m)).collect();
        let slots: Vec<usize> = eligible_jobs
            .iter()
            .map(|jobs| match mode {
                SlotMode::Truncated => jobs.len(),
                SlotMode::Full => {
                    if jobs.is_empty() {
                        0
                    } else {
                        inst.n_jobs
                    }
                }
            })
            .collect();
        let mut base = Vec::with_capacity(inst.n_machines);
        let mut triples = Vec::new();
        let mut acc = 0usize;
        for m in 0..inst.n_machines {
            base.push(acc);
            for t in 0..slots[m] {
                for &j in &eligible_jobs[m] {
                    triples.push((m as u32, t as u32, j as u32));
                }
            }
            acc += slots[m] * eligible_jobs[m].len();
        }
        let job_pos = (0..inst.n_machines)
            .map(|m| {
                let mut pos = vec![None; inst.n_jobs];
                for (p, &j) in eligible_jobs[m].iter().enumerate() {
                    pos[j] = Some(p as u32);
                }
                pos
            })
            .collect();
        VarIndex {
            n_machines: inst.n_machines,
            n_jobs: inst.n_jobs,
            slots,
            eligible_jobs,
            base,
            job_pos,
            triples,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.triples.len()
    }

    /// Index of `x_{m,t,j}`; None when `j` is not eligible on `m` or the slot
    /// is out of range.
    pub fn var(&self, m: usize, t: usize, j: usize) -> Option<usize> {
        if m >= self.n_machines || t >= self.slots[m] {
            return None;
        }
        let pos = self.job_pos[m].get(j).copied().flatten()?;
        Some(self.base[m] + t * self.eligible_jobs[m].len() + pos as usize)
    }

    /// The (machine, slot, job) triple behind a variable index.
    pub fn triple(&self, idx: usize) -> (usize, usize, usize) {
        let (m, t, j) = self.triples[idx];
        (m as usize, t as usize, j as usize)
    }
}

/// One factorized squared-load term: `weight * (sum p_i x_i)^2` over the
/// member variables of a single machine.
#[derive(Debug, Clone)]
pub struct BalanceGroup {
    pub weight: i64,
    pub members: Vec<(u32, i64)>,
}

/// The constrained binary quadratic program.
#[derive(Debug, Clone)]
pub struct BqpModel {
    pub instance: ProblemInstance,
    pub mode: SlotMode,
    pub index: VarIndex,
    /// Value terms: `-w_value * v_{j,m}` per variable.
    pub linear: Vec<i64>,
    /// Weighted setup terms between consecutive slots; strict upper
    /// triangular, sorted, keys unique by construction.
    pub quadratic: Vec<(u32, u32, i64)>,
    /// Squared-load terms, one group per machine with `w_balance > 0`.
    pub balance: Vec<BalanceGroup>,
    /// Per job: all its variables. The constraint is "exactly one lit".
    pub once_groups: Vec<Vec<u32>>,
    /// Per (machine, slot), machine-major: the slot's variables. The
    /// constraint is "at most one lit".
    pub slot_groups: Vec<Vec<u32>>,
    pub slot_keys: Vec<(usize, usize)>,
    /// (current, previous) indices into `slot_groups` for every slot t >= 1:
    /// current occupied requires previous occupied.
    pub order_pairs: Vec<(usize, usize)>,
}

pub fn build_bqp(inst: &ProblemInstance) -> Result<BqpModel> {
    build_bqp_with(inst, SlotMode::Truncated)
}

pub fn build_bqp_with(inst: &ProblemInstance, mode: SlotMode) -> Result<BqpModel> {
    let violations = inst.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidInstance(violations));
    }
    let w = inst.weights;
    let index = VarIndex::build(inst, mode);
    let n = index.n_vars();

    let mut linear = vec![0i64; n];
    for idx in 0..n {
        let (m, _, j) = index.triple(idx);
        linear[idx] = -w.w_value * inst.job_value(j, m).unwrap();
    }

    let mut quadratic = Vec::new();
    if w.w_setup != 0 {
        for m in 0..inst.n_machines {
            let jobs = &index.eligible_jobs[m];
            for t in 1..index.slots[m] {
                for &i in jobs {
                    for &j in jobs {
                        if i == j {
                            continue;
                        }
                        let s = inst.setup_time(i, j);
                        if s == 0 {
                            continue;
                        }
                        let a = index.var(m, t - 1, i).unwrap() as u32;
                        let b = index.var(m, t, j).unwrap() as u32;
                        quadratic.push((a, b, w.w_setup * s));
                    }
                }
            }
        }
    }
    quadratic.sort_unstable_by_key(|&(a, b, _)| (a, b));

    let mut balance = Vec::new();
    if w.w_balance > 0 {
        for m in 0..inst.n_machines {
            let mut members = Vec::new();
            for t in 0..index.slots[m] {
                for &j in &index.eligible_jobs[m] {
                    let v = index.var(m, t, j).unwrap() as u32;
                    members.push((v, inst.processing_time(j, m).unwrap()));
                }
            }
            if !members.is_empty() {
                balance.push(BalanceGroup { weight: w.w_balance, members });
            }
        }
    }

    let mut once_groups = vec![Vec::new(); inst.n_jobs];
    for idx in 0..n {
        let (_, _, j) = index.triple(idx);
        once_groups[j].push(idx as u32);
    }
    let mut slot_groups = Vec::new();
    let mut slot_keys = Vec::new();
    let mut order_pairs = Vec::new();
    for m in 0..inst.n_machines {
        for t in 0..index.slots[m] {
            let group: Vec<u32> = index.eligible_jobs[m]
                .iter()
                .map(|&j| index.var(m, t, j).unwrap() as u32)
                .collect();
            slot_groups.push(group);
            slot_keys.push((m, t));
            if t >= 1 {
                let curr = slot_groups.len() - 1;
                order_pairs.push((curr, curr - 1));
            }
        }
    }

    Ok(BqpModel {
        instance: inst.clone(),
        mode,
        index,
        linear,
        quadratic,
        balance,
        once_groups,
        slot_groups,
        slot_keys,
        order_pairs,
    })
}

/// Variable count of [`build_bqp`] without building the model: the truncated
/// slot rule gives the sum over machines of (eligible-job count)².
pub fn count_variables(inst: &ProblemInstance) -> usize {
    count_variables_with(inst, SlotMode::Truncated)
}

pub fn count_variables_with(inst: &ProblemInstance, mode: SlotMode) -> usize {
    let mut counts = vec![0usize; inst.n_machines];
    for j in 0..inst.n_jobs {
        for &m in inst.eligible_machines(j) {
            counts[m] += 1;
        }
    }
    counts
        .iter()
        .map(|&k| match mode {
            SlotMode::Truncated => k * k,
            SlotMode::Full => k * inst.n_jobs,
        })
        .sum()
}

/// The weighted objective of the constrained program at a bitstring,
/// violations ignored.
pub fn bqp_objective(bqp: &BqpModel, bits: &[bool]) -> Result<i64> {
    if bits.len() != bqp.index.n_vars() {
        return Err(Error::BitstringLength { got: bits.len(), expected: bqp.index.n_vars() });
    }
    let mut total: i64 = bits
        .iter()
        .zip(&bqp.linear)
        .filter(|&(&bit, _)| bit)
        .map(|(_, &c)| c)
        .sum();
    for &(a, b, c) in &bqp.quadratic {
        if bits[a as usize] && bits[b as usize] {
            total += c;
        }
    }
    for group in &bqp.balance {
        let load: i64 = group
            .members
            .iter()
            .filter(|&&(v, _)| bits[v as usize])
            .map(|&(_, p)| p)
            .sum();
        total += group.weight * load * load;
    }
    Ok(total)
}

/// The three penalty families evaluated from their unexpanded forms:
/// `lambda1 * sum_j (A_j - 1)^2 + lambda2 * sum_slots A(A-1)
///  + lambda3 * sum_{t>=1} A_t (A_t - A_{t-1})` with A the lit counts.
pub fn constraint_penalty(bqp: &BqpModel, pen: &PenaltyWeights, bits: &[bool]) -> Result<i64> {
    if bits.len() != bqp.index.n_vars() {
        return Err(Error::BitstringLength { got: bits.len(), expected: bqp.index.n_vars() });
    }
    let lit = |group: &[u32]| -> i64 {
        group.iter().filter(|&&v| bits[v as usize]).count() as i64
    };
    let mut total = 0i64;
    for group in &bqp.once_groups {
        let a = lit(group);
        total += pen.lambda1 * (a - 1) * (a - 1);
    }
    let slot_counts: Vec<i64> = bqp.slot_groups.iter().map(|g| lit(g)).collect();
    for &a in &slot_counts {
        total += pen.lambda2 * a * (a - 1);
    }
    for &(curr, prev) in &bqp.order_pairs {
        let a = slot_counts[curr];
        total += pen.lambda3 * a * (a - slot_counts[prev]);
    }
    Ok(total)
}

/// Penalty multipliers making constraint violations strictly dominated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PenaltyWeights {
    pub lambda1: i64,
    pub lambda2: i64,
    pub lambda3: i64,
}

/// Derived lower bounds, weight-scaled: skipping the worst setup can save at
/// most `w_setup * s_max`, dropping a job from a machine can lower the
/// balance term by at most `2 * w_balance * J * p_max^2`, and an extra job
/// can add at most `w_value * v_max`. One more than the max of those makes
/// any single violation a strict loss.
pub fn derive_penalties(inst: &ProblemInstance) -> Result<PenaltyWeights> {
    let violations = inst.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidInstance(violations));
    }
    let w = inst.weights;
    let overflow = || Error::Overflow("penalty weight exceeds 64-bit integer range".into());
    let s_star = w.w_setup.checked_mul(inst.max_setup()).ok_or_else(overflow)?;
    let p_k = inst.max_eligible_processing();
    let balance_gain = w
        .w_balance
        .checked_mul(2)
        .and_then(|x| x.checked_mul(inst.n_jobs as i64))
        .and_then(|x| x.checked_mul(p_k))
        .and_then(|x| x.checked_mul(p_k))
        .ok_or_else(overflow)?;
    let c_star = w
        .w_value
        .checked_mul(inst.max_eligible_value())
        .ok_or_else(overflow)?;
    let lambda3 = s_star.checked_add(1).ok_or_else(overflow)?;
    let lambda1 = s_star
        .max(balance_gain)
        .max(c_star)
        .checked_add(1)
        .ok_or_else(overflow)?;
    Ok(PenaltyWeights { lambda1, lambda2: lambda1, lambda3 })
}

/// The unconstrained form: `offset + sum linear + sum quadratic + sum groups`
/// over lit bits. `quadratic` is strict upper triangular, sorted, duplicate
/// keys merged, zero coefficients dropped; diagonal terms are folded into
/// `linear` via x² = x. The squared-load part stays factorized in `balance`.
#[derive(Debug, Clone)]
pub struct QuboModel {
    pub n_vars: usize,
    pub linear: Vec<i64>,
    pub quadratic: Vec<(u32, u32, i64)>,
    pub balance: Vec<BalanceGroup>,
    pub offset: i64,
    pub index: VarIndex,
    pub penalties: PenaltyWeights,
}

pub fn build_qubo(bqp: &BqpModel, pen: &PenaltyWeights) -> Result<QuboModel> {
    if pen.lambda1 <= 0 || pen.lambda2 <= 0 || pen.lambda3 <= 0 {
        return Err(Error::InvalidArgument(
            "penalty weights must be positive".into(),
        ));
    }
    let n = bqp.index.n_vars();
    let mut linear = bqp.linear.clone();
    let mut offset = 0i64;
    let pair_estimate = bqp.quadratic.len()
        + bqp.once_groups.iter().map(|g| g.len() * (g.len() - 1) / 2).sum::<usize>()
        + 2 * bqp.slot_groups.iter().map(|g| g.len() * g.len()).sum::<usize>();
    let mut entries = Vec::with_capacity(pair_estimate);
    entries.extend_from_slice(&bqp.quadratic);

    // lambda1 * (sum x - 1)^2 per job: +1 constant, -lambda1 per lit bit,
    // +2 lambda1 per pair.
    for group in &bqp.once_groups {
        offset += pen.lambda1;
        for (i, &a) in group.iter().enumerate() {
            linear[a as usize] -= pen.lambda1;
            for &b in &group[i + 1..] {
                entries.push((a, b, 2 * pen.lambda1));
            }
        }
    }
    // lambda2 * sum_{i != j} x_i x_j per slot: ordered pairs, so each
    // unordered pair carries 2 lambda2.
    for group in &bqp.slot_groups {
        for (i, &a) in group.iter().enumerate() {
            for &b in &group[i + 1..] {
                entries.push((a, b, 2 * pen.lambda2));
            }
        }
    }
    // lambda3 * A_t (A_t - A_{t-1}): A_t^2 gives +lambda3 linear and
    // +2 lambda3 pairs within slot t; the cross product gives -lambda3 on
    // every (t-1, t) pair.
    for &(curr, prev) in &bqp.order_pairs {
        let curr = &bqp.slot_groups[curr];
        let prev = &bqp.slot_groups[prev];
        for (i, &a) in curr.iter().enumerate() {
            linear[a as usize] += pen.lambda3;
            for &b in &curr[i + 1..] {
                entries.push((a, b, 2 * pen.lambda3));
            }
        }
        for &a in prev {
            for &b in curr {
                debug_assert!(a < b);
                entries.push((a, b, -pen.lambda3));
            }
        }
    }

    entries.sort_unstable_by_key(|&(a, b, _)| (a, b));
    let mut quadratic: Vec<(u32, u32, i64)> = Vec::with_capacity(entries.len());
    for (a, b, c) in entries {
        match quadratic.last_mut() {
            Some(last) if last.0 == a && last.1 == b => last.2 += c,
            _ => quadratic.push((a, b, c)),
        }
    }
    quadratic.retain(|&(_, _, c)| c != 0);

    Ok(QuboModel {
        n_vars: n,
        linear,
        quadratic,
        balance: bqp.balance.clone(),
        offset,
        index: bqp.index.clone(),
        penalties: *pen,
    })
}

impl QuboModel {
    /// Expands the factorized squared-load groups into explicit coefficients:
    /// `w (sum p x)^2 = w sum p_i^2 x_i + 2w sum_{i<j} p_i p_j x_i x_j`.
    /// Returns (linear, strict-upper quadratic). Quadratic in the group part
    /// per machine, so meant for desk-scale models.
    pub fn dense(&self) -> (Vec<i64>, Vec<(u32, u32, i64)>) {
        let mut linear = self.linear.clone();
        let mut entries = self.quadratic.clone();
        for group in &self.balance {
            for (i, &(a, pa)) in group.members.iter().enumerate() {
                linear[a as usize] += group.weight * pa * pa;
                for &(b, pb) in &group.members[i + 1..] {
                    let (a, b) = if a < b { (a, b) } else { (b, a) };
                    entries.push((a, b, 2 * group.weight * pa * pb));
                }
            }
        }
        entries.sort_unstable_by_key(|&(a, b, _)| (a, b));
        let mut quadratic: Vec<(u32, u32, i64)> = Vec::with_capacity(entries.len());
        for (a, b, c) in entries {
            match quadratic.last_mut() {
                Some(last) if last.0 == a && last.1 == b => last.2 += c,
                _ => quadratic.push((a, b, c)),
            }
        }
        quadratic.retain(|&(_, _, c)| c != 0);
        (linear, quadratic)
    }

    /// `# n_vars offset` header, then one `i j coeff` line per nonzero with
    /// i <= j, 0-based, linear terms on the diagonal. Byte-deterministic.
    pub fn export(&self) -> String {
        let (linear, quadratic) = self.dense();
        let mut out = String::new();
        out.push_str(&format!("# {} {}\n", self.n_vars, self.offset));
        let mut qi = 0usize;
        for (i, &c) in linear.iter().enumerate() {
            while qi < quadratic.len() && (quadratic[qi].0 as usize) < i {
                let (a, b, c) = quadratic[qi];
                out.push_str(&format!("{a} {b} {c}\n"));
                qi += 1;
            }
            if c != 0 {
                out.push_str(&format!("{i} {i} {c}\n"));
            }
        }
        while qi < quadratic.len() {
            let (a, b, c) = quadratic[qi];
            out.push_str(&format!("{a} {b} {c}\n"));
            qi += 1;
        }
        out
    }
}

pub fn qubo_energy(qubo: &QuboModel, bits: &[bool]) -> Result<i64> {
    if bits.len() != qubo.n_vars {
        return Err(Error::BitstringLength { got: bits.len(), expected: qubo.n_vars });
    }
    let mut total = qubo.offset;
    for (i, &c) in qubo.linear.iter().enumerate() {
        if bits[i] {
            total += c;
        }
    }
    for &(a, b, c) in &qubo.quadratic {
        if bits[a as usize] && bits[b as usize] {
            total += c;
        }
    }
    for group in &qubo.balance {
        let load: i64 = group
            .members
            .iter()
            .filter(|&&(v, _)| bits[v as usize])
            .map(|&(_, p)| p)
            .sum();
        total += group.weight * load * load;
    }
    Ok(total)
}

/// `bit(m,t,j) = 1` iff `j` is the t-th job on `m`. Exactly one bit per job.
pub fn encode_schedule(bqp: &BqpModel, sched: &Schedule) -> Result<Vec<bool>> {
    let violations = schedule::validate_schedule(&bqp.instance, sched);
    if !violations.is_empty() {
        return Err(Error::InfeasibleSchedule(violations));
    }
    let mut bits = vec![false; bqp.index.n_vars()];
    for (m, seq) in sched.sequences.iter().enumerate() {
        if seq.len() > bqp.index.slots[m] {
            return Err(Error::InvalidArgument(format!(
                "machine {} sequence length {} exceeds its {} slots",
                m + 1,
                seq.len(),
                bqp.index.slots[m]
            )));
        }
        for (t, &j) in seq.iter().enumerate() {
            bits[bqp.index.var(m, t, j).unwrap()] = true;
        }
    }
    Ok(bits)
}

#[derive(Debug, Clone)]
pub struct DecodeOutcome {
    pub schedule: Schedule,
    pub feasible: bool,
}

/// Reads a schedule back out of an arbitrary bitstring.
///
/// A clean encoding (one bit per job, one job per slot, no slot gaps) decodes
/// to its schedule with `feasible = true`. Anything else is repaired when
/// `repair` is set: per job only the lit bit with the highest value survives
/// (ties to the lowest machine, then earliest slot), gaps compact away
/// preserving slot order, and unlit jobs go to the end of whichever eligible
/// machine's sequence raises the combined objective least (ties to the lowest
/// machine). Without `repair`, the kept-and-compacted partial schedule comes
/// back with `feasible = false`.
pub fn decode_bitstring(bqp: &BqpModel, bits: &[bool], repair: bool) -> Result<DecodeOutcome> {
    let n = bqp.index.n_vars();
    if bits.len() != n {
        return Err(Error::BitstringLength { got: bits.len(), expected: n });
    }
    let inst = &bqp.instance;
    let mut job_hits: Vec<Vec<(usize, usize)>> = vec![Vec::new(); inst.n_jobs];
    let mut slot_load: HashMap<(usize, usize), usize> = HashMap::new();
    for idx in 0..n {
        if bits[idx] {
            let (m, t, j) = bqp.index.triple(idx);
            job_hits[j].push((m, t));
            *slot_load.entry((m, t)).or_insert(0) += 1;
        }
    }

    let clean = job_hits.iter().all(|hits| hits.len() == 1)
        && slot_load.values().all(|&c| c <= 1)
        && (0..inst.n_machines).all(|m| {
            let mut slots: Vec<usize> = (0..bqp.index.slots[m])
                .filter(|&t| slot_load.contains_key(&(m, t)))
                .collect();
            slots.sort_unstable();
            slots.iter().enumerate().all(|(i, &t)| i == t)
        });

    // Keep the best bit per job; with a clean encoding this keeps the only
    // one. Sorting kept (slot, job) pairs per machine both orders the
    // sequence and compacts gaps.
    let mut kept: Vec<Vec<(usize, usize)>> = vec![Vec::new(); inst.n_machines];
    let mut unassigned = Vec::new();
    for (j, hits) in job_hits.iter().enumerate() {
        if hits.is_empty() {
            unassigned.push(j);
            continue;
        }
        let &(m, t) = hits
            .iter()
            .max_by_key(|&&(m, t)| (inst.job_value(j, m).unwrap(), std::cmp::Reverse(m), std::cmp::Reverse(t)))
            .unwrap();
        kept[m].push((t, j));
    }
    let mut sequences: Vec<Vec<usize>> = kept
        .into_iter()
        .map(|mut v| {
            v.sort_unstable();
            v.into_iter().map(|(_, j)| j).collect()
        })
        .collect();

    if repair {
        let w = inst.weights;
        let mut loads: Vec<i64> = (0..inst.n_machines)
            .map(|m| sequences[m].iter().map(|&j| inst.processing_time(j, m).unwrap()).sum())
            .collect();
        for j in unassigned {
            let mut best: Option<(i64, usize)> = None;
            for &m in inst.eligible_machines(j) {
                let p = inst.processing_time(j, m).unwrap();
                let setup = match sequences[m].last() {
                    Some(&last) => inst.setup_time(last, j),
                    None => 0,
                };
                let delta = w.w_setup * setup
                    + w.w_balance * ((loads[m] + p) * (loads[m] + p) - loads[m] * loads[m])
                    - w.w_value * inst.job_value(j, m).unwrap();
                if best.map_or(true, |(d, bm)| (delta, m) < (d, bm)) {
                    best = Some((delta, m));
                }
            }
            let (_, m) = best.unwrap();
            loads[m] += inst.processing_time(j, m).unwrap();
            sequences[m].push(j);
        }
    }

    Ok(DecodeOutcome { schedule: Schedule { sequences }, feasible: clean || repair })
}

/// A uniformly random feasible schedule: each job picks a random eligible
/// machine, then each machine's sequence is shuffled. Deterministic per seed.
pub fn random_schedule(inst: &ProblemInstance, seed: u64) -> Schedule {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sequences = vec![Vec::new(); inst.n_machines];
    for j in 0..inst.n_jobs {
        let opts = inst.eligible_machines(j);
        sequences[opts[rng.gen_range(0..opts.len())]].push(j);
    }
    for seq in &mut sequences {
        seq.shuffle(&mut rng);
    }
    Schedule { sequences }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, ObjectiveWeights};
    use crate::schedule::evaluate;

    fn two_job_line() -> ProblemInstance {
        ProblemInstance {
            n_machines: 1,
            n_jobs: 2,
            weights: ObjectiveWeights::default(),
            eligible: vec![vec![0], vec![0]],
            processing: vec![Some(3), Some(4)],
            value: vec![Some(5), Some(6)],
            setup: vec![0, 2, 9, 0],
        }
    }

    fn skewed_three_jobs() -> ProblemInstance {
        // Job 3 (index 2) is eligible only on machine 1.
        ProblemInstance {
            n_machines: 2,
            n_jobs: 3,
            weights: ObjectiveWeights::default(),
            eligible: vec![vec![0, 1], vec![0, 1], vec![0]],
            processing: vec![Some(2), Some(3), Some(4), Some(5), Some(6), None],
            value: vec![Some(1), Some(2), Some(3), Some(4), Some(5), None],
            setup: vec![0, 1, 2, 3, 0, 4, 5, 6, 0],
        }
    }

    #[test]
    fn slot_rule_variable_counts() {
        let bqp = build_bqp(&two_job_line()).unwrap();
        assert_eq!(bqp.index.n_vars(), 4);
        assert_eq!(count_variables(&two_job_line()), 4);

        let bqp = build_bqp(&skewed_three_jobs()).unwrap();
        assert_eq!(bqp.index.slots, vec![3, 2]);
        assert_eq!(bqp.index.n_vars(), 13);
        assert_eq!(count_variables(&skewed_three_jobs()), 13);

        let full = build_bqp_with(&skewed_three_jobs(), SlotMode::Full).unwrap();
        assert_eq!(full.index.slots, vec![3, 3]);
        assert_eq!(full.index.n_vars(), 15);
        assert_eq!(count_variables_with(&skewed_three_jobs(), SlotMode::Full), 15);
    }

    #[test]
    fn full_eligibility_counts_hit_the_upper_bound() {
        let inst = generate_instance(27, 9, 1.0, 3).unwrap();
        assert_eq!(count_variables(&inst), 9 * 27 * 27);
        assert_eq!(count_variables(&inst), inst.n_machines * inst.n_jobs * inst.n_jobs);

        let sparse = generate_instance(27, 9, 0.4, 3).unwrap();
        assert!(count_variables(&sparse) < 9 * 27 * 27);
    }

    #[test]
    fn disjoint_eligibility_gives_sum_of_squares() {
        let inst = ProblemInstance {
            n_machines: 2,
            n_jobs: 5,
            weights: ObjectiveWeights::default(),
            eligible: vec![vec![0], vec![0], vec![0], vec![1], vec![1]],
            processing: vec![
                Some(1), None, Some(1), None, Some(1), None, None, Some(1), None, Some(1),
            ],
            value: vec![
                Some(1), None, Some(1), None, Some(1), None, None, Some(1), None, Some(1),
            ],
            setup: vec![0; 25],
        };
        assert_eq!(count_variables(&inst), 3 * 3 + 2 * 2);
    }

    #[test]
    fn index_round_trips_triples() {
        let bqp = build_bqp(&skewed_three_jobs()).unwrap();
        for idx in 0..bqp.index.n_vars() {
            let (m, t, j) = bqp.index.triple(idx);
            assert_eq!(bqp.index.var(m, t, j), Some(idx));
        }
        assert_eq!(bqp.index.var(1, 0, 2), None);
        assert_eq!(bqp.index.var(0, 3, 0), None);
    }

    #[test]
    fn zero_setups_leave_no_setup_terms() {
        let mut inst = two_job_line();
        inst.setup = vec![0, 0, 0, 0];
        inst.weights = ObjectiveWeights { w_setup: 1, w_balance: 0, w_value: 0 };
        let bqp = build_bqp(&inst).unwrap();
        assert!(bqp.quadratic.is_empty());
        assert!(bqp.balance.is_empty());
    }

    #[test]
    fn penalty_worked_example() {
        let inst = ProblemInstance {
            n_machines: 1,
            n_jobs: 3,
            weights: ObjectiveWeights { w_setup: 1, w_balance: 1, w_value: 1 },
            eligible: vec![vec![0], vec![0], vec![0]],
            processing: vec![Some(4), Some(3), Some(2)],
            value: vec![Some(10), Some(7), Some(1)],
            setup: vec![0, 5, 1, 2, 0, 3, 4, 1, 0],
        };
        let pen = derive_penalties(&inst).unwrap();
        assert_eq!(pen.lambda3, 6);
        assert_eq!(pen.lambda1, 97);
        assert_eq!(pen.lambda2, 97);
    }

    #[test]
    fn degenerate_data_gives_unit_penalties() {
        let inst = ProblemInstance {
            n_machines: 1,
            n_jobs: 2,
            weights: ObjectiveWeights::default(),
            eligible: vec![vec![0], vec![0]],
            processing: vec![Some(0), Some(0)],
            value: vec![Some(0), Some(0)],
            setup: vec![0, 0, 0, 0],
        };
        let pen = derive_penalties(&inst).unwrap();
        assert_eq!(pen, PenaltyWeights { lambda1: 1, lambda2: 1, lambda3: 1 });
    }

    #[test]
    fn doubling_setups_doubles_lambda3_minus_one() {
        let mut inst = two_job_line();
        let base = derive_penalties(&inst).unwrap().lambda3;
        for s in &mut inst.setup {
            *s *= 2;
        }
        let doubled = derive_penalties(&inst).unwrap().lambda3;
        assert_eq!(doubled - 1, 2 * (base - 1));
    }

    #[test]
    fn penalty_overflow_is_reported() {
        let mut inst = two_job_line();
        inst.weights = ObjectiveWeights { w_setup: 1, w_balance: i64::MAX / 4, w_value: 1 };
        assert!(matches!(derive_penalties(&inst), Err(Error::Overflow(_))));
    }

    #[test]
    fn all_zero_bits_cost_lambda1_per_job() {
        let inst = skewed_three_jobs();
        let bqp = build_bqp(&inst).unwrap();
        let pen = derive_penalties(&inst).unwrap();
        let qubo = build_qubo(&bqp, &pen).unwrap();
        let bits = vec![false; qubo.n_vars];
        assert_eq!(qubo_energy(&qubo, &bits).unwrap(), pen.lambda1 * 3);
        assert_eq!(qubo.offset, pen.lambda1 * 3);
    }

    #[test]
    fn feasible_encodings_cost_the_combined_objective() {
        for seed in [1, 2, 3] {
            let inst = generate_instance(5, 2, 0.8, seed).unwrap();
            let bqp = build_bqp(&inst).unwrap();
            let pen = derive_penalties(&inst).unwrap();
            let qubo = build_qubo(&bqp, &pen).unwrap();
            for salt in 0..5 {
                let sched = random_schedule(&inst, seed * 100 + salt);
                let bits = encode_schedule(&bqp, &sched).unwrap();
                let energy = qubo_energy(&qubo, &bits).unwrap();
                assert_eq!(energy, evaluate(&inst, &sched).unwrap().combined);
            }
        }
    }

    #[test]
    fn single_job_two_point_exhaustion() {
        let inst = ProblemInstance {
            n_machines: 1,
            n_jobs: 1,
            weights: ObjectiveWeights::default(),
            eligible: vec![vec![0]],
            processing: vec![Some(3)],
            value: vec![Some(5)],
            setup: vec![0],
        };
        let bqp = build_bqp(&inst).unwrap();
        let pen = derive_penalties(&inst).unwrap();
        let qubo = build_qubo(&bqp, &pen).unwrap();
        assert_eq!(qubo.n_vars, 1);
        let on = qubo_energy(&qubo, &[true]).unwrap();
        let off = qubo_energy(&qubo, &[false]).unwrap();
        assert_eq!(on, -5 + 9);
        assert_eq!(off, pen.lambda1);
        assert!(on < off);
    }

    #[test]
    fn encode_places_bits_by_slot() {
        let bqp = build_bqp(&two_job_line()).unwrap();
        let sched = Schedule { sequences: vec![vec![1, 0]] };
        // Variable order: (t0,j0), (t0,j1), (t1,j0), (t1,j1).
        assert_eq!(encode_schedule(&bqp, &sched).unwrap(), vec![false, true, true, false]);

        let empty = Schedule { sequences: vec![vec![]] };
        let inst = ProblemInstance { n_jobs: 0, eligible: vec![], processing: vec![], value: vec![], setup: vec![], ..two_job_line() };
        let bqp = build_bqp(&inst).unwrap();
        assert_eq!(encode_schedule(&bqp, &empty).unwrap(), Vec::<bool>::new());
    }

    #[test]
    fn decode_round_trips_random_schedules() {
        let mut checked = 0;
        for seed in 0..10 {
            let inst = generate_instance(8, 3, 0.6, seed + 40).unwrap();
            let bqp = build_bqp(&inst).unwrap();
            for salt in 0..20 {
                let sched = random_schedule(&inst, seed * 1000 + salt);
                let bits = encode_schedule(&bqp, &sched).unwrap();
                let out = decode_bitstring(&bqp, &bits, false).unwrap();
                assert!(out.feasible);
                assert_eq!(out.schedule, sched);
                checked += 1;
            }
        }
        assert_eq!(checked, 200);
    }

    #[test]
    fn double_lit_job_is_infeasible_without_repair() {
        let inst = skewed_three_jobs();
        let bqp = build_bqp(&inst).unwrap();
        let mut bits = encode_schedule(
            &bqp,
            &Schedule { sequences: vec![vec![2], vec![0, 1]] },
        )
        .unwrap();
        // Light job 1 a second time, on machine 1 slot 2.
        bits[bqp.index.var(0, 1, 0).unwrap()] = true;
        let out = decode_bitstring(&bqp, &bits, false).unwrap();
        assert!(!out.feasible);

        // Repair keeps job 1's higher-value bit: v(machine 2) = 3 > 1.
        let repaired = decode_bitstring(&bqp, &bits, true).unwrap();
        assert!(repaired.feasible);
        assert!(repaired.schedule.sequences[1].contains(&0));
        assert!(schedule::validate_schedule(&inst, &repaired.schedule).is_empty());
    }

    #[test]
    fn all_zero_bits_repair_to_a_feasible_schedule() {
        for seed in [7, 8, 9] {
            let inst = generate_instance(6, 3, 0.7, seed).unwrap();
            let bqp = build_bqp(&inst).unwrap();
            let bits = vec![false; bqp.index.n_vars()];
            let out = decode_bitstring(&bqp, &bits, true).unwrap();
            assert!(out.feasible);
            assert!(schedule::validate_schedule(&inst, &out.schedule).is_empty());
        }
    }

    #[test]
    fn gapped_bits_compact_in_slot_order() {
        let inst = two_job_line();
        let bqp = build_bqp(&inst).unwrap();
        let mut bits = vec![false; 4];
        // Only slot 2 occupied: infeasible raw, compacts to a one-job sequence.
        bits[bqp.index.var(0, 1, 1).unwrap()] = true;
        let out = decode_bitstring(&bqp, &bits, false).unwrap();
        assert!(!out.feasible);
        assert_eq!(out.schedule.sequences, vec![vec![1]]);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let bqp = build_bqp(&two_job_line()).unwrap();
        assert!(matches!(
            decode_bitstring(&bqp, &[true], false),
            Err(Error::BitstringLength { got: 1, expected: 4 })
        ));
        let pen = derive_penalties(&two_job_line()).unwrap();
        let qubo = build_qubo(&bqp, &pen).unwrap();
        assert!(qubo_energy(&qubo, &[true, false]).is_err());
    }

    #[test]
    fn single_bit_energy_matches_dense_linear() {
        let inst = skewed_three_jobs();
        let bqp = build_bqp(&inst).unwrap();
        let pen = derive_penalties(&inst).unwrap();
        let qubo = build_qubo(&bqp, &pen).unwrap();
        let (dense_linear, _) = qubo.dense();
        for i in 0..qubo.n_vars {
            let mut bits = vec![false; qubo.n_vars];
            bits[i] = true;
            assert_eq!(
                qubo_energy(&qubo, &bits).unwrap(),
                qubo.offset + dense_linear[i]
            );
        }
    }

    #[test]
    fn expanded_energy_matches_unexpanded_formulas() {
        let inst = skewed_three_jobs();
        let bqp = build_bqp(&inst).unwrap();
        let pen = derive_penalties(&inst).unwrap();
        let qubo = build_qubo(&bqp, &pen).unwrap();
        let n = qubo.n_vars;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..200 {
            let bits: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.4)).collect();
            let expected = bqp_objective(&bqp, &bits).unwrap()
                + constraint_penalty(&bqp, &pen, &bits).unwrap();
            assert_eq!(qubo_energy(&qubo, &bits).unwrap(), expected);
        }
    }

    #[test]
    fn dense_view_preserves_energies() {
        let inst = generate_instance(4, 2, 0.9, 21).unwrap();
        let bqp = build_bqp(&inst).unwrap();
        let pen = derive_penalties(&inst).unwrap();
        let qubo = build_qubo(&bqp, &pen).unwrap();
        let (linear, quadratic) = qubo.dense();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let bits: Vec<bool> = (0..qubo.n_vars).map(|_| rng.gen_bool(0.3)).collect();
            let mut dense_energy = qubo.offset;
            for (i, &c) in linear.iter().enumerate() {
                if bits[i] {
                    dense_energy += c;
                }
            }
            for &(a, b, c) in &quadratic {
                if bits[a as usize] && bits[b as usize] {
                    dense_energy += c;
                }
            }
            assert_eq!(dense_energy, qubo_energy(&qubo, &bits).unwrap());
        }
    }

    #[test]
    fn exhaustive_minimum_is_feasible_on_a_small_model() {
        let inst = ProblemInstance {
            n_machines: 2,
            n_jobs: 3,
            weights: ObjectiveWeights::default(),
            eligible: vec![vec![0], vec![0, 1], vec![1]],
            processing: vec![Some(2), None, Some(3), Some(4), None, Some(5)],
            value: vec![Some(6), None, Some(2), Some(3), None, Some(4)],
            setup: vec![0, 1, 2, 3, 0, 1, 2, 3, 0],
        };
        let bqp = build_bqp(&inst).unwrap();
        let pen = derive_penalties(&inst).unwrap();
        let qubo = build_qubo(&bqp, &pen).unwrap();
        let n = qubo.n_vars;
        assert!(n <= 12, "n = {n}");
        let mut best = (i64::MAX, Vec::new());
        for mask in 0u32..(1 << n) {
            let bits: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            let e = qubo_energy(&qubo, &bits).unwrap();
            if e < best.0 {
                best = (e, bits);
            }
        }
        let out = decode_bitstring(&bqp, &best.1, false).unwrap();
        assert!(out.feasible, "minimum energy {} at an infeasible bitstring", best.0);
        assert_eq!(best.0, evaluate(&inst, &out.schedule).unwrap().combined);
    }

    #[test]
    fn export_is_sorted_and_deterministic() {
        let inst = two_job_line();
        let bqp = build_bqp(&inst).unwrap();
        let pen = derive_penalties(&inst).unwrap();
        let qubo = build_qubo(&bqp, &pen).unwrap();
        let text = qubo.export();
        assert!(text.starts_with(&format!("# 4 {}\n", qubo.offset)));
        let mut keys = Vec::new();
        for line in text.lines().skip(1) {
            let parts: Vec<i64> = line
                .split_whitespace()
                .map(|p| p.parse().unwrap())
                .collect();
            assert_eq!(parts.len(), 3);
            assert!(parts[0] <= parts[1]);
            keys.push((parts[0], parts[1]));
        }
        let mut sorted = keys.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(keys, sorted);
        assert_eq!(text, qubo.export());
    }

    #[test]
    fn random_schedule_is_deterministic_and_feasible() {
        let inst = generate_instance(10, 4, 0.5, 77).unwrap();
        let a = random_schedule(&inst, 5);
        let b = random_schedule(&inst, 5);
        assert_eq!(a, b);
        assert!(schedule::validate_schedule(&inst, &a).is_empty());
        assert_ne!(a, random_schedule(&inst, 6));
    }

    #[test]
    fn balance_groups_follow_the_weight() {
        let mut inst = two_job_line();
        let bqp = build_bqp(&inst).unwrap();
        assert_eq!(bqp.balance.len(), 1);
        assert_eq!(bqp.balance[0].members.len(), 4);
        inst.weights = ObjectiveWeights { w_setup: 1, w_balance: 0, w_value: 1 };
        assert!(build_bqp(&inst).unwrap().balance.is_empty());
    }
}
