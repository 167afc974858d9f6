//! Machine-graph decomposition: bisect the instance into machine-disjoint
//! sub-instances small enough to solve separately, then merge the
//! sub-schedules back into one feasible schedule.
//!
//! Two machines are connected by an edge weighted with the number of jobs
//! eligible on both; a low-weight cut separates machines that compete for few
//! jobs, so little is lost by forcing each job to one side. Bisection is
//! Kernighan-Lin pair swapping, applied recursively until a sub-instance fits
//! a variable budget or has fewer than 4 machines.

use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::qubo::count_variables;
use crate::schedule::{validate_schedule, Schedule};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Shared-eligibility graph over machines, dense symmetric weights.
#[derive(Debug, Clone)]
pub struct MachineGraph {
    pub n: usize,
    weights: Vec<i64>,
}

impl MachineGraph {
    pub fn from_edges(n: usize, edges: &[(usize, usize, i64)]) -> Self {
        let mut g = MachineGraph { n, weights: vec![0; n * n] };
        for &(a, b, w) in edges {
            assert!(a != b && a < n && b < n);
            g.weights[a * n + b] = w;
            g.weights[b * n + a] = w;
        }
        g
    }

    pub fn weight(&self, a: usize, b: usize) -> i64 {
        self.weights[a * self.n + b]
    }

    /// Total weight of edges crossing the side marked true.
    fn cut(&self, in_a: &[bool]) -> i64 {
        let mut total = 0;
        for a in 0..self.n {
            for b in a + 1..self.n {
                if in_a[a] != in_a[b] {
                    total += self.weight(a, b);
                }
            }
        }
        total
    }
}

pub fn build_machine_graph(inst: &ProblemInstance) -> MachineGraph {
    let n = inst.n_machines;
    let mut g = MachineGraph { n, weights: vec![0; n * n] };
    for j in 0..inst.n_jobs {
        let elig = inst.eligible_machines(j);
        for (i, &a) in elig.iter().enumerate() {
            for &b in &elig[i + 1..] {
                g.weights[a * n + b] += 1;
                g.weights[b * n + a] += 1;
            }
        }
    }
    g
}

/// Balanced bisection; sides are ascending machine ids, sizes differ by at
/// most one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub side_a: Vec<usize>,
    pub side_b: Vec<usize>,
    pub cut_weight: i64,
}

/// Classic Kernighan-Lin: from a seed-determined balanced split, run passes
/// that greedily pick the best-gain unlocked swap pair, then apply the best
/// positive prefix of the pass. Stops when no prefix gains, which leaves the
/// result stable under any single swap. Deterministic per seed.
pub fn kernighan_lin_bisect(graph: &MachineGraph, seed: u64) -> Result<Partition> {
    let n = graph.n;
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "bisection needs at least 2 nodes, got {n}"
        )));
    }
    // Alternating initial split keeps sides balanced; random cross-swaps give
    // seeds distinct starting points.
    let mut in_a: Vec<bool> = (0..n).map(|v| v % 2 == 0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if in_a[a] != in_a[b] {
            in_a.swap(a, b);
        }
    }

    loop {
        // D_v = external minus internal edge weight; swapping (a, b) changes
        // the cut by -(D_a + D_b - 2 w(a,b)).
        let mut d = vec![0i64; n];
        for v in 0..n {
            for u in 0..n {
                if u == v {
                    continue;
                }
                let w = graph.weight(v, u);
                if in_a[v] == in_a[u] {
                    d[v] -= w;
                } else {
                    d[v] += w;
                }
            }
        }
        let mut locked = vec![false; n];
        let mut swaps: Vec<(usize, usize, i64)> = Vec::new();
        loop {
            let mut best: Option<(i64, usize, usize)> = None;
            for a in 0..n {
                if locked[a] || !in_a[a] {
                    continue;
                }
                for b in 0..n {
                    if locked[b] || in_a[b] {
                        continue;
                    }
                    let gain = d[a] + d[b] - 2 * graph.weight(a, b);
                    if best.map_or(true, |(g, _, _)| gain > g) {
                        best = Some((gain, a, b));
                    }
                }
            }
            let Some((gain, a, b)) = best else { break };
            locked[a] = true;
            locked[b] = true;
            swaps.push((a, b, gain));
            for v in 0..n {
                if locked[v] {
                    continue;
                }
                let (wa, wb) = (graph.weight(v, a), graph.weight(v, b));
                // After the hypothetical swap, a sits on v's side iff v is in
                // B, so the sign of each contribution flips accordingly.
                if in_a[v] {
                    d[v] += 2 * wa - 2 * wb;
                } else {
                    d[v] += 2 * wb - 2 * wa;
                }
            }
        }
        let mut best_k = 0;
        let mut best_gain = 0;
        let mut acc = 0;
        for (k, &(_, _, g)) in swaps.iter().enumerate() {
            acc += g;
            if acc > best_gain {
                best_gain = acc;
                best_k = k + 1;
            }
        }
        if best_gain <= 0 {
            break;
        }
        for &(a, b, _) in &swaps[..best_k] {
            in_a.swap(a, b);
        }
    }

    let side_a: Vec<usize> = (0..n).filter(|&v| in_a[v]).collect();
    let side_b: Vec<usize> = (0..n).filter(|&v| !in_a[v]).collect();
    let cut_weight = graph.cut(&in_a);
    Ok(Partition { side_a, side_b, cut_weight })
}

/// A sub-instance with its id maps back into the instance it was cut from:
/// local machine `m` is original `machines[m]`, local job `j` is original
/// `jobs[j]`. Both maps are ascending.
#[derive(Debug, Clone)]
pub struct InstancePart {
    pub instance: ProblemInstance,
    pub machines: Vec<usize>,
    pub jobs: Vec<usize>,
}

impl InstancePart {
    pub fn root(inst: &ProblemInstance) -> Self {
        InstancePart {
            instance: inst.clone(),
            machines: (0..inst.n_machines).collect(),
            jobs: (0..inst.n_jobs).collect(),
        }
    }
}

/// Every job goes to the side holding its highest-value eligible machine
/// (ties to the lowest machine id), keeping only that side's eligibility.
/// One side may end up with no jobs; that is still a valid sub-instance.
pub fn split_instance(
    inst: &ProblemInstance,
    part: &Partition,
) -> Result<(InstancePart, InstancePart)> {
    let mut seen = vec![false; inst.n_machines];
    for &m in part.side_a.iter().chain(&part.side_b) {
        if m >= inst.n_machines || seen[m] {
            return Err(Error::InvalidArgument(format!(
                "partition does not list each machine exactly once (machine {})",
                m + 1
            )));
        }
        seen[m] = true;
    }
    if !seen.iter().all(|&s| s) || part.side_a.is_empty() || part.side_b.is_empty() {
        return Err(Error::InvalidArgument(
            "partition must cover all machines with two nonempty sides".into(),
        ));
    }

    let mut in_a = vec![false; inst.n_machines];
    for &m in &part.side_a {
        in_a[m] = true;
    }
    let mut jobs_a = Vec::new();
    let mut jobs_b = Vec::new();
    for j in 0..inst.n_jobs {
        let mut best = inst.eligible_machines(j)[0];
        for &m in inst.eligible_machines(j) {
            if inst.job_value(j, m) > inst.job_value(j, best) {
                best = m;
            }
        }
        if in_a[best] {
            jobs_a.push(j);
        } else {
            jobs_b.push(j);
        }
    }

    let extract = |machines: &[usize], jobs: &[usize]| -> InstancePart {
        let mut machines = machines.to_vec();
        machines.sort_unstable();
        let mut machine_local = vec![None; inst.n_machines];
        for (local, &m) in machines.iter().enumerate() {
            machine_local[m] = Some(local);
        }
        let nm = machines.len();
        let nj = jobs.len();
        let mut eligible = Vec::with_capacity(nj);
        let mut processing = vec![None; nj * nm];
        let mut value = vec![None; nj * nm];
        for (lj, &j) in jobs.iter().enumerate() {
            let elig: Vec<usize> = inst
                .eligible_machines(j)
                .iter()
                .filter_map(|&m| machine_local[m])
                .collect();
            for &lm in &elig {
                let m = machines[lm];
                processing[lj * nm + lm] = inst.processing_time(j, m);
                value[lj * nm + lm] = inst.job_value(j, m);
            }
            eligible.push(elig);
        }
        let mut setup = vec![0i64; nj * nj];
        for (li, &i) in jobs.iter().enumerate() {
            for (lj, &j) in jobs.iter().enumerate() {
                if li != lj {
                    setup[li * nj + lj] = inst.setup_time(i, j);
                }
            }
        }
        InstancePart {
            instance: ProblemInstance {
                n_machines: nm,
                n_jobs: nj,
                weights: inst.weights,
                eligible,
                processing,
                value,
                setup,
            },
            machines,
            jobs: jobs.to_vec(),
        }
    };
    Ok((extract(&part.side_a, &jobs_a), extract(&part.side_b, &jobs_b)))
}

pub const DEFAULT_MAX_VARS: usize = 10_000;

/// Bisects until each leaf fits the variable budget or has fewer than 4
/// machines. Leaves come back in depth-first order with id maps into the
/// original instance; their machine sets and job sets partition it.
pub fn recursive_decompose(
    inst: &ProblemInstance,
    max_vars: usize,
    seed: u64,
) -> Result<Vec<InstancePart>> {
    if max_vars == 0 {
        return Err(Error::InvalidArgument("max_vars must be at least 1".into()));
    }
    let violations = inst.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidInstance(violations));
    }
    let mut leaves = Vec::new();
    descend(InstancePart::root(inst), max_vars, seed, &mut leaves)?;
    Ok(leaves)
}

fn descend(
    part: InstancePart,
    max_vars: usize,
    seed: u64,
    leaves: &mut Vec<InstancePart>,
) -> Result<()> {
    if count_variables(&part.instance) <= max_vars || part.instance.n_machines < 4 {
        leaves.push(part);
        return Ok(());
    }
    let graph = build_machine_graph(&part.instance);
    let cut = kernighan_lin_bisect(&graph, seed)?;
    let (a, b) = split_instance(&part.instance, &cut)?;
    let lift = |sub: InstancePart| InstancePart {
        instance: sub.instance,
        machines: sub.machines.iter().map(|&m| part.machines[m]).collect(),
        jobs: sub.jobs.iter().map(|&j| part.jobs[j]).collect(),
    };
    descend(lift(a), max_vars, seed.wrapping_mul(2).wrapping_add(1), leaves)?;
    descend(lift(b), max_vars, seed.wrapping_mul(2).wrapping_add(2), leaves)
}

/// Stitches per-part schedules back together in original ids. The parts'
/// machine sets must tile 0..M and their job sets 0..J exactly, and each
/// schedule must be feasible for its part.
pub fn merge_solutions(parts: &[(InstancePart, Schedule)]) -> Result<Schedule> {
    let n_machines: usize = parts.iter().map(|(p, _)| p.machines.len()).sum();
    let n_jobs: usize = parts.iter().map(|(p, _)| p.jobs.len()).sum();
    let mut machine_seen = vec![false; n_machines];
    let mut job_seen = vec![false; n_jobs];
    for (part, sched) in parts {
        for &m in &part.machines {
            if m >= n_machines || machine_seen[m] {
                return Err(Error::InvalidArgument(format!(
                    "parts overlap or skip machine {}",
                    m + 1
                )));
            }
            machine_seen[m] = true;
        }
        for &j in &part.jobs {
            if j >= n_jobs || job_seen[j] {
                return Err(Error::InvalidArgument(format!(
                    "parts overlap or skip job {}",
                    j + 1
                )));
            }
            job_seen[j] = true;
        }
        let violations = validate_schedule(&part.instance, sched);
        if !violations.is_empty() {
            return Err(Error::InfeasibleSchedule(violations));
        }
    }
    let mut sequences = vec![Vec::new(); n_machines];
    for (part, sched) in parts {
        for (local_m, seq) in sched.sequences.iter().enumerate() {
            sequences[part.machines[local_m]] = seq.iter().map(|&j| part.jobs[j]).collect();
        }
    }
    Ok(Schedule { sequences })
}
