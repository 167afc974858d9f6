//! Problem data: jobs, machines, eligibility, processing times, setup times,
//! job values, and objective weights.
//!
//! All quantities are exact integers in scaled units so that downstream model
//! coefficients and objective comparisons are bit-reproducible.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};

/// Weights of the combined objective
/// `w_setup * setup_total + w_balance * balance_sum_sq - w_value * value_total`.
///
/// Weights are nonnegative integers (scaled units); at least one must be
/// positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObjectiveWeights {
    pub w_setup: i64,
    pub w_balance: i64,
    pub w_value: i64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        ObjectiveWeights { w_setup: 1, w_balance: 1, w_value: 1 }
    }
}

/// One assignment-and-sequencing problem.
///
/// Jobs and machines are indexed 0-based internally; the JSON document format
/// uses 1-based ids. A job may only run on machines in its eligibility set,
/// and `processing` / `value` are defined exactly on eligible (job, machine)
/// pairs. Setup times are sequence-dependent, machine-independent, and may be
/// asymmetric; the diagonal is unused and kept at zero.
///
/// `n_jobs == 0` is allowed: decomposition can produce a side that received
/// no jobs, and such degenerate instances must still round-trip and evaluate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemInstance {
    pub n_machines: usize,
    pub n_jobs: usize,
    pub weights: ObjectiveWeights,
    /// Per job, the sorted list of machines it may run on.
    pub eligible: Vec<Vec<usize>>,
    /// Row-major `job * n_machines + machine`; `Some` exactly when eligible.
    pub processing: Vec<Option<i64>>,
    /// Same layout and definedness as `processing`.
    pub value: Vec<Option<i64>>,
    /// Row-major `from * n_jobs + to`; diagonal entries are kept at zero.
    pub setup: Vec<i64>,
}

impl ProblemInstance {
    pub fn processing_time(&self, job: usize, machine: usize) -> Option<i64> {
        self.processing[job * self.n_machines + machine]
    }

    pub fn job_value(&self, job: usize, machine: usize) -> Option<i64> {
        self.value[job * self.n_machines + machine]
    }

    /// Setup time when `to` directly follows `from` on a machine.
    pub fn setup_time(&self, from: usize, to: usize) -> i64 {
        self.setup[from * self.n_jobs + to]
    }

    pub fn is_eligible(&self, job: usize, machine: usize) -> bool {
        self.processing[job * self.n_machines + machine].is_some()
    }

    pub fn eligible_machines(&self, job: usize) -> &[usize] {
        &self.eligible[job]
    }

    /// Jobs that may run on `machine`, ascending.
    pub fn jobs_eligible_on(&self, machine: usize) -> Vec<usize> {
        (0..self.n_jobs).filter(|&j| self.is_eligible(j, machine)).collect()
    }

    /// True when every job has the same processing time on all of its
    /// eligible machines.
    pub fn machine_independent_processing(&self) -> bool {
        (0..self.n_jobs).all(|j| {
            let mut times = self.eligible[j].iter().map(|&m| self.processing_time(j, m).unwrap());
            match times.next() {
                Some(first) => times.all(|p| p == first),
                None => true,
            }
        })
    }

    /// Largest processing time over eligible pairs; 0 for an empty instance.
    pub fn max_eligible_processing(&self) -> i64 {
        self.processing.iter().flatten().copied().max().unwrap_or(0)
    }

    /// Largest job value over eligible pairs; 0 for an empty instance.
    pub fn max_eligible_value(&self) -> i64 {
        self.value.iter().flatten().copied().max().unwrap_or(0)
    }

    /// Largest off-diagonal setup time; 0 when there are fewer than two jobs.
    pub fn max_setup(&self) -> i64 {
        let mut best = 0;
        for from in 0..self.n_jobs {
            for to in 0..self.n_jobs {
                if from != to {
                    best = best.max(self.setup_time(from, to));
                }
            }
        }
        best
    }

    /// Checks every structural invariant and returns one entry per breach.
    /// An empty list means the instance is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let (jobs, machines) = (self.n_jobs, self.n_machines);
        if machines == 0 {
            out.push(Violation::new("n_machines", "must be at least 1"));
        }
        if self.eligible.len() != jobs {
            out.push(Violation::new(
                "eligible",
                format!("expected {} rows, found {}", jobs, self.eligible.len()),
            ));
        }
        if self.processing.len() != jobs * machines {
            out.push(Violation::new(
                "processing",
                format!("expected {} entries, found {}", jobs * machines, self.processing.len()),
            ));
        }
        if self.value.len() != jobs * machines {
            out.push(Violation::new(
                "value",
                format!("expected {} entries, found {}", jobs * machines, self.value.len()),
            ));
        }
        if self.setup.len() != jobs * jobs {
            out.push(Violation::new(
                "setup",
                format!("expected {} entries, found {}", jobs * jobs, self.setup.len()),
            ));
        }
        if !out.is_empty() {
            // Shape is broken; per-entry checks below would index out of bounds.
            return out;
        }

        for (j, elig) in self.eligible.iter().enumerate() {
            let field = format!("jobs[{j}].eligible");
            if elig.is_empty() {
                out.push(Violation::new(&field, "empty eligibility set"));
            }
            if elig.windows(2).any(|w| w[0] >= w[1]) {
                out.push(Violation::new(&field, "machines must be strictly ascending"));
            }
            for &m in elig {
                if m >= machines {
                    out.push(Violation::new(
                        &field,
                        format!("machine {} out of range (n_machines = {})", m + 1, machines),
                    ));
                }
            }
        }
        for j in 0..jobs {
            for m in 0..machines {
                let on_list = self.eligible[j].binary_search(&m).is_ok();
                let idx = j * machines + m;
                match (self.processing[idx], on_list) {
                    (Some(p), true) => {
                        if p < 0 {
                            out.push(Violation::new(
                                format!("jobs[{j}].processing"),
                                format!("machine {}: negative processing time {p}", m + 1),
                            ));
                        }
                    }
                    (Some(_), false) => out.push(Violation::new(
                        format!("jobs[{j}].processing"),
                        format!("machine {} is not eligible but has a processing time", m + 1),
                    )),
                    (None, true) => out.push(Violation::new(
                        format!("jobs[{j}].processing"),
                        format!("missing processing time for eligible machine {}", m + 1),
                    )),
                    (None, false) => {}
                }
                match (self.value[idx], on_list) {
                    (Some(v), true) => {
                        if v < 0 {
                            out.push(Violation::new(
                                format!("jobs[{j}].value"),
                                format!("machine {}: negative value {v}", m + 1),
                            ));
                        }
                    }
                    (Some(_), false) => out.push(Violation::new(
                        format!("jobs[{j}].value"),
                        format!("machine {} is not eligible but has a value", m + 1),
                    )),
                    (None, true) => out.push(Violation::new(
                        format!("jobs[{j}].value"),
                        format!("missing value for eligible machine {}", m + 1),
                    )),
                    (None, false) => {}
                }
            }
        }
        for from in 0..jobs {
            for to in 0..jobs {
                if from != to && self.setup_time(from, to) < 0 {
                    out.push(Violation::new(
                        format!("setup[{from}][{to}]"),
                        format!("negative setup time {}", self.setup_time(from, to)),
                    ));
                }
            }
        }
        let w = &self.weights;
        if w.w_setup < 0 || w.w_balance < 0 || w.w_value < 0 {
            out.push(Violation::new("weights", "weights must be nonnegative"));
        }
        if w.w_setup == 0 && w.w_balance == 0 && w.w_value == 0 {
            out.push(Violation::new("weights", "at least one weight must be positive"));
        }
        out
    }

    /// Parses the JSON document format. Ids in the document are 1-based.
    /// Malformed documents, id mismatches, and invariant breaches are all
    /// rejected with the offending field named.
    pub fn parse(text: &str) -> Result<Self> {
        let doc: InstanceDoc =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let (jobs, machines) = (doc.n_jobs, doc.n_machines);
        if machines == 0 {
            return Err(Error::Parse("n_machines: must be at least 1".into()));
        }
        if doc.jobs.len() != jobs {
            return Err(Error::Parse(format!(
                "jobs: expected {} entries, found {}",
                jobs,
                doc.jobs.len()
            )));
        }

        let mut by_id: Vec<Option<&JobDoc>> = vec![None; jobs];
        for (pos, job) in doc.jobs.iter().enumerate() {
            if job.id == 0 || job.id > jobs {
                return Err(Error::Parse(format!(
                    "jobs[{pos}].id: {} out of range (n_jobs = {jobs})",
                    job.id
                )));
            }
            if by_id[job.id - 1].is_some() {
                return Err(Error::Parse(format!("jobs[{pos}].id: duplicate id {}", job.id)));
            }
            by_id[job.id - 1] = Some(job);
        }

        let mut eligible = vec![Vec::new(); jobs];
        let mut processing = vec![None; jobs * machines];
        let mut value = vec![None; jobs * machines];
        for (j, slot) in by_id.iter().enumerate() {
            let job = slot.expect("every id slot filled after the duplicate check");
            let field = format!("jobs[{j}]");
            let mut elig = Vec::with_capacity(job.eligible.len());
            for &m in &job.eligible {
                if m == 0 || m > machines {
                    return Err(Error::Parse(format!(
                        "{field}.eligible: machine {m} out of range (n_machines = {machines})"
                    )));
                }
                elig.push(m - 1);
            }
            elig.sort_unstable();
            if elig.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Parse(format!("{field}.eligible: duplicate machine id")));
            }
            for (name, map, table) in [
                ("processing", &job.processing, &mut processing),
                ("value", &job.value, &mut value),
            ] {
                for (&m, &x) in map {
                    if m == 0 || m > machines {
                        return Err(Error::Parse(format!(
                            "{field}.{name}: machine {m} out of range (n_machines = {machines})"
                        )));
                    }
                    if !elig.contains(&(m - 1)) {
                        return Err(Error::Parse(format!(
                            "{field}.{name}: machine {m} is not in the eligibility set"
                        )));
                    }
                    table[j * machines + (m - 1)] = Some(x);
                }
                for &m in &elig {
                    if table[j * machines + m].is_none() {
                        return Err(Error::Parse(format!(
                            "{field}.{name}: missing entry for eligible machine {}",
                            m + 1
                        )));
                    }
                }
            }
            eligible[j] = elig;
        }

        if doc.setup.len() != jobs {
            return Err(Error::Parse(format!(
                "setup: expected {} rows, found {}",
                jobs,
                doc.setup.len()
            )));
        }
        let mut setup = vec![0i64; jobs * jobs];
        for (from, row) in doc.setup.iter().enumerate() {
            if row.len() != jobs {
                return Err(Error::Parse(format!(
                    "setup[{from}]: expected {} entries, found {}",
                    jobs,
                    row.len()
                )));
            }
            for (to, &s) in row.iter().enumerate() {
                // Self-setup carries no meaning; accepted and dropped.
                setup[from * jobs + to] = if from == to { 0 } else { s };
            }
        }

        let inst = ProblemInstance {
            n_machines: machines,
            n_jobs: jobs,
            weights: ObjectiveWeights {
                w_setup: doc.weights.w_setup,
                w_balance: doc.weights.w_balance,
                w_value: doc.weights.w_value,
            },
            eligible,
            processing,
            value,
            setup,
        };
        let violations = inst.validate();
        if violations.is_empty() {
            Ok(inst)
        } else {
            Err(Error::InvalidInstance(violations))
        }
    }

    /// Canonical serialization: fixed field order, jobs ascending by id,
    /// map keys in numeric order. Byte-identical across repeated calls, and
    /// `parse(serialize(x)) == x`.
    pub fn serialize(&self) -> String {
        let doc = InstanceDoc {
            n_machines: self.n_machines,
            n_jobs: self.n_jobs,
            weights: WeightsDoc {
                w_setup: self.weights.w_setup,
                w_balance: self.weights.w_balance,
                w_value: self.weights.w_value,
            },
            jobs: (0..self.n_jobs)
                .map(|j| JobDoc {
                    id: j + 1,
                    eligible: self.eligible[j].iter().map(|&m| m + 1).collect(),
                    processing: self.eligible[j]
                        .iter()
                        .map(|&m| (m + 1, self.processing_time(j, m).unwrap()))
                        .collect(),
                    value: self.eligible[j]
                        .iter()
                        .map(|&m| (m + 1, self.job_value(j, m).unwrap()))
                        .collect(),
                })
                .collect(),
            setup: (0..self.n_jobs)
                .map(|from| (0..self.n_jobs).map(|to| self.setup_time(from, to)).collect())
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&doc)
            .expect("document serialization cannot fail");
        text.push('\n');
        text
    }
}

/// Generator bounds, inclusive. Chosen so that penalty derivation stays well
/// inside `i64` for a few hundred jobs.
pub const GEN_PROCESSING_MAX: i64 = 100;
pub const GEN_SETUP_MAX: i64 = 50;
pub const GEN_VALUE_MAX: i64 = 100;

/// Draws a random instance. Deterministic per seed: a fixed ChaCha8 stream is
/// consumed in a fixed order (per job: one uniform draw per machine for
/// eligibility, a fallback machine draw if the row came up empty, then
/// processing times and values for the eligible machines in ascending machine
/// order; finally the setup matrix row-major, skipping the diagonal).
///
/// `density` is the eligibility probability per (job, machine) pair, in
/// `(0, 1]`; an empty row is patched with one uniformly chosen machine.
/// Processing times are drawn from `[1, 100]`, setups from `[0, 50]`, values
/// from `[1, 100]`, and the weights default to (1, 1, 1).
pub fn generate_instance(
    n_jobs: usize,
    n_machines: usize,
    density: f64,
    seed: u64,
) -> Result<ProblemInstance> {
    if n_jobs == 0 {
        return Err(Error::InvalidArgument("n_jobs must be at least 1".into()));
    }
    if n_machines == 0 {
        return Err(Error::InvalidArgument("n_machines must be at least 1".into()));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "density must be in (0, 1], got {density}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut eligible = Vec::with_capacity(n_jobs);
    let mut processing = vec![None; n_jobs * n_machines];
    let mut value = vec![None; n_jobs * n_machines];
    for j in 0..n_jobs {
        let mut elig: Vec<usize> =
            (0..n_machines).filter(|_| rng.gen::<f64>() < density).collect();
        if elig.is_empty() {
            elig.push(rng.gen_range(0..n_machines));
        }
        for &m in &elig {
            processing[j * n_machines + m] = Some(rng.gen_range(1..=GEN_PROCESSING_MAX));
        }
        for &m in &elig {
            value[j * n_machines + m] = Some(rng.gen_range(1..=GEN_VALUE_MAX));
        }
        eligible.push(elig);
    }
    let mut setup = vec![0i64; n_jobs * n_jobs];
    for from in 0..n_jobs {
        for to in 0..n_jobs {
            if from != to {
                setup[from * n_jobs + to] = rng.gen_range(0..=GEN_SETUP_MAX);
            }
        }
    }

    Ok(ProblemInstance {
        n_machines,
        n_jobs,
        weights: ObjectiveWeights::default(),
        eligible,
        processing,
        value,
        setup,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    n_machines: usize,
    n_jobs: usize,
    weights: WeightsDoc,
    jobs: Vec<JobDoc>,
    setup: Vec<Vec<i64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightsDoc {
    w_setup: i64,
    w_balance: i64,
    w_value: i64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JobDoc {
    id: usize,
    eligible: Vec<usize>,
    processing: BTreeMap<usize, i64>,
    value: BTreeMap<usize, i64>,
}
