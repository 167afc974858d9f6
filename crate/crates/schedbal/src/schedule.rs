//! Schedules: one ordered job sequence per machine, their feasibility rules,
//! the combined objective, and Gantt timelines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};
use crate::instance::ProblemInstance;

/// One job sequence per machine, `sequences[m]` in processing order.
/// Feasibility (each job placed exactly once, on an eligible machine) is not
/// enforced by the type; [`validate_schedule`] reports breaches.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Schedule {
    pub sequences: Vec<Vec<usize>>,
}

impl Schedule {
    pub fn empty(n_machines: usize) -> Self {
        Schedule { sequences: vec![Vec::new(); n_machines] }
    }

    /// Parses the JSON document `{"sequences": [[...], ...]}` with 1-based
    /// job ids. Structure only; use [`validate_schedule`] against an instance.
    pub fn parse(text: &str) -> Result<Self> {
        let doc: ScheduleDoc =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut sequences = Vec::with_capacity(doc.sequences.len());
        for (m, row) in doc.sequences.iter().enumerate() {
            let mut seq = Vec::with_capacity(row.len());
            for &id in row {
                if id == 0 {
                    return Err(Error::Parse(format!(
                        "sequences[{m}]: job ids are 1-based, found 0"
                    )));
                }
                seq.push(id - 1);
            }
            sequences.push(seq);
        }
        Ok(Schedule { sequences })
    }

    /// Canonical JSON with 1-based job ids.
    pub fn serialize(&self) -> String {
        let doc = ScheduleDoc {
            sequences: self
                .sequences
                .iter()
                .map(|seq| seq.iter().map(|&j| j + 1).collect())
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("plain arrays");
        text.push('\n');
        text
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleDoc {
    sequences: Vec<Vec<usize>>,
}

/// Objective pieces of one feasible schedule. `combined` is
/// `w_setup * setup_total + w_balance * balance_sum_sq - w_value * value_total`
/// and is minimized. `balance_sum_sq` sums the squared per-machine processing
/// loads; setup times do not contribute to loads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObjectiveBreakdown {
    pub setup_total: i64,
    pub balance_sum_sq: i64,
    pub value_total: i64,
    pub combined: i64,
}

/// Checks that `sched` is a feasible schedule for `inst`: machine count
/// matches, every job id is known, placed exactly once, and on an eligible
/// machine. Returns one entry per breach; empty means feasible.
pub fn validate_schedule(inst: &ProblemInstance, sched: &Schedule) -> Vec<Violation> {
    let mut out = Vec::new();
    if sched.sequences.len() != inst.n_machines {
        out.push(Violation::new(
            "sequences",
            format!(
                "expected {} machine rows, found {}",
                inst.n_machines,
                sched.sequences.len()
            ),
        ));
        return out;
    }
    let mut seen = vec![0usize; inst.n_jobs];
    for (m, seq) in sched.sequences.iter().enumerate() {
        for &j in seq {
            if j >= inst.n_jobs {
                out.push(Violation::new(
                    format!("sequences[{m}]"),
                    format!("unknown job {} (n_jobs = {})", j + 1, inst.n_jobs),
                ));
                continue;
            }
            seen[j] += 1;
            if !inst.is_eligible(j, m) {
                out.push(Violation::new(
                    format!("sequences[{m}]"),
                    format!("job {} is not eligible on machine {}", j + 1, m + 1),
                ));
            }
        }
    }
    for (j, &count) in seen.iter().enumerate() {
        match count {
            0 => out.push(Violation::new(
                format!("jobs[{j}]"),
                format!("job {} is missing from the schedule", j + 1),
            )),
            1 => {}
            n => out.push(Violation::new(
                format!("jobs[{j}]"),
                format!("job {} appears {} times", j + 1, n),
            )),
        }
    }
    out
}

/// Sum of processing times of `seq` on machine `m`. Setup times excluded.
pub(crate) fn machine_load(inst: &ProblemInstance, m: usize, seq: &[usize]) -> i64 {
    seq.iter().map(|&j| inst.processing_time(j, m).unwrap_or(0)).sum()
}

pub(crate) fn machine_setup_sum(inst: &ProblemInstance, seq: &[usize]) -> i64 {
    seq.windows(2).map(|w| inst.setup_time(w[0], w[1])).sum()
}

/// Evaluates a feasible schedule exactly. Errors with the violation list when
/// the schedule is infeasible for `inst`.
pub fn evaluate(inst: &ProblemInstance, sched: &Schedule) -> Result<ObjectiveBreakdown> {
    let violations = validate_schedule(inst, sched);
    if !violations.is_empty() {
        return Err(Error::InfeasibleSchedule(violations));
    }
    let mut setup_total = 0i64;
    let mut balance_sum_sq = 0i64;
    let mut value_total = 0i64;
    for (m, seq) in sched.sequences.iter().enumerate() {
        setup_total += machine_setup_sum(inst, seq);
        let load = machine_load(inst, m, seq);
        balance_sum_sq += load * load;
        value_total += seq.iter().map(|&j| inst.job_value(j, m).unwrap()).sum::<i64>();
    }
    let w = &inst.weights;
    let combined = w.w_setup * setup_total + w.w_balance * balance_sum_sq - w.w_value * value_total;
    Ok(ObjectiveBreakdown { setup_total, balance_sum_sq, value_total, combined })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    Setup,
    Processing,
}

/// One span on a machine timeline. For a setup block, `job` is the job being
/// set up for. Zero-length setups are omitted entirely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub kind: BlockKind,
    pub job: usize,
    pub start: i64,
    pub end: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineTimeline {
    pub machine: usize,
    pub blocks: Vec<Block>,
}

/// Gantt view of a feasible schedule: per machine, alternating setup and
/// processing blocks starting at time zero, contiguous and non-overlapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GanttTimeline {
    pub machines: Vec<MachineTimeline>,
}

pub fn to_gantt(inst: &ProblemInstance, sched: &Schedule) -> Result<GanttTimeline> {
    let violations = validate_schedule(inst, sched);
    if !violations.is_empty() {
        return Err(Error::InfeasibleSchedule(violations));
    }
    let mut machines = Vec::with_capacity(inst.n_machines);
    for (m, seq) in sched.sequences.iter().enumerate() {
        let mut blocks = Vec::new();
        let mut clock = 0i64;
        let mut prev: Option<usize> = None;
        for &j in seq {
            if let Some(p) = prev {
                let s = inst.setup_time(p, j);
                if s > 0 {
                    blocks.push(Block { kind: BlockKind::Setup, job: j, start: clock, end: clock + s });
                    clock += s;
                }
            }
            let p = inst.processing_time(j, m).unwrap();
            blocks.push(Block { kind: BlockKind::Processing, job: j, start: clock, end: clock + p });
            clock += p;
            prev = Some(j);
        }
        machines.push(MachineTimeline { machine: m, blocks });
    }
    Ok(GanttTimeline { machines })
}

impl GanttTimeline {
    /// JSON document with 1-based machine and job ids.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct BlockDoc<'a> {
            kind: &'a str,
            job: usize,
            start: i64,
            end: i64,
        }
        #[derive(Serialize)]
        struct RowDoc<'a> {
            machine: usize,
            blocks: Vec<BlockDoc<'a>>,
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            machines: Vec<RowDoc<'a>>,
        }
        let doc = Doc {
            machines: self
                .machines
                .iter()
                .map(|row| RowDoc {
                    machine: row.machine + 1,
                    blocks: row
                        .blocks
                        .iter()
                        .map(|b| BlockDoc {
                            kind: match b.kind {
                                BlockKind::Setup => "setup",
                                BlockKind::Processing => "processing",
                            },
                            job: b.job + 1,
                            start: b.start,
                            end: b.end,
                        })
                        .collect(),
                })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("plain document");
        text.push('\n');
        text
    }

    /// Static SVG rendering: one row per machine, 4 px per time unit.
    pub fn to_svg(&self) -> String {
        const PX_PER_UNIT: i64 = 4;
        const ROW_H: i64 = 28;
        const BAR_H: i64 = 20;
        const LEFT: i64 = 48;
        const TOP: i64 = 8;

        let horizon = self
            .machines
            .iter()
            .flat_map(|r| r.blocks.iter().map(|b| b.end))
            .max()
            .unwrap_or(0);
        let width = LEFT + horizon * PX_PER_UNIT + 8;
        let height = TOP + self.machines.len() as i64 * ROW_H + 8;
        let mut svg = String::new();
        svg.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
             viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\" font-size=\"11\">\n"
        ));
        for (row_idx, row) in self.machines.iter().enumerate() {
            let y = TOP + row_idx as i64 * ROW_H;
            svg.push_str(&format!(
                "  <text x=\"4\" y=\"{}\">m{}</text>\n",
                y + BAR_H - 5,
                row.machine + 1
            ));
            for b in &row.blocks {
                let x = LEFT + b.start * PX_PER_UNIT;
                let w = (b.end - b.start) * PX_PER_UNIT;
                let (fill, label) = match b.kind {
                    BlockKind::Setup => ("#d8a13a", String::new()),
                    BlockKind::Processing => ("#4a7fd0", format!("j{}", b.job + 1)),
                };
                svg.push_str(&format!(
                    "  <rect x=\"{x}\" y=\"{y}\" width=\"{w}\" height=\"{BAR_H}\" \
                     fill=\"{fill}\" stroke=\"#333\"/>\n"
                ));
                if !label.is_empty() && w >= 16 {
                    svg.push_str(&format!(
                        "  <text x=\"{}\" y=\"{}\" fill=\"#fff\">{}</text>\n",
                        x + 3,
                        y + BAR_H - 5,
                        label
                    ));
                }
            }
        }
        svg.push_str("</svg>\n");
        svg
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, ObjectiveWeights};

    /// 1 machine, 2 jobs: p = (3, 4), s12 = 2, s21 = 9, v = (5, 6).
    pub(crate) fn two_job_line() -> ProblemInstance {
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

    #[test]
    fn evaluates_single_machine_line() {
        let inst = two_job_line();
        let sched = Schedule { sequences: vec![vec![0, 1]] };
        let b = evaluate(&inst, &sched).unwrap();
        assert_eq!(b.setup_total, 2);
        assert_eq!(b.balance_sum_sq, 49);
        assert_eq!(b.value_total, 11);
        assert_eq!(b.combined, 2 + 49 - 11);
    }

    #[test]
    fn splitting_across_machines_lowers_balance() {
        // Same jobs, second machine opened up with identical times and values.
        let inst = ProblemInstance {
            n_machines: 2,
            n_jobs: 2,
            weights: ObjectiveWeights::default(),
            eligible: vec![vec![0, 1], vec![0, 1]],
            processing: vec![Some(3), Some(3), Some(4), Some(4)],
            value: vec![Some(5), Some(5), Some(6), Some(6)],
            setup: vec![0, 2, 9, 0],
        };
        let split = Schedule { sequences: vec![vec![0], vec![1]] };
        let b = evaluate(&inst, &split).unwrap();
        assert_eq!(b.balance_sum_sq, 9 + 16);
        assert_eq!(b.setup_total, 0);
        let together = Schedule { sequences: vec![vec![0, 1], vec![]] };
        assert_eq!(evaluate(&inst, &together).unwrap().balance_sum_sq, 49);
    }

    #[test]
    fn empty_machine_contributes_nothing() {
        let inst = two_job_line();
        let sched = Schedule { sequences: vec![vec![0, 1]] };
        let with_empty = evaluate(&inst, &sched).unwrap();
        assert_eq!(with_empty.combined, 40);
        let single = ProblemInstance {
            n_machines: 1,
            n_jobs: 1,
            weights: ObjectiveWeights::default(),
            eligible: vec![vec![0]],
            processing: vec![Some(3)],
            value: vec![Some(5)],
            setup: vec![0],
        };
        let b = evaluate(&single, &Schedule { sequences: vec![vec![0]] }).unwrap();
        assert_eq!(b.setup_total, 0);
        assert_eq!(b.balance_sum_sq, 9);
    }

    #[test]
    fn validate_reports_each_breach() {
        let inst = generate_instance(4, 2, 1.0, 9).unwrap();
        // Job 0 twice, job 3 missing.
        let sched = Schedule { sequences: vec![vec![0, 1], vec![0, 2]] };
        let v = validate_schedule(&inst, &sched);
        assert_eq!(v.len(), 2);
        assert!(v.iter().any(|x| x.message.contains("appears 2 times")));
        assert!(v.iter().any(|x| x.message.contains("missing")));

        let mut narrow = inst.clone();
        narrow.eligible[1] = vec![0];
        narrow.processing[1 * 2 + 1] = None;
        narrow.value[1 * 2 + 1] = None;
        let sched = Schedule { sequences: vec![vec![0, 2], vec![1, 3]] };
        let v = validate_schedule(&narrow, &sched);
        assert_eq!(v.len(), 1);
        assert!(v[0].message.contains("not eligible"));

        let sched = Schedule { sequences: vec![vec![0]] };
        assert!(!validate_schedule(&inst, &sched).is_empty());
    }

    #[test]
    fn evaluate_rejects_infeasible() {
        let inst = two_job_line();
        let sched = Schedule { sequences: vec![vec![0, 0]] };
        assert!(matches!(
            evaluate(&inst, &sched),
            Err(Error::InfeasibleSchedule(_))
        ));
    }

    #[test]
    fn gantt_blocks_alternate_and_stay_contiguous() {
        let inst = two_job_line();
        let sched = Schedule { sequences: vec![vec![0, 1]] };
        let gantt = to_gantt(&inst, &sched).unwrap();
        let blocks = &gantt.machines[0].blocks;
        assert_eq!(blocks.len(), 3);
        assert_eq!(
            blocks[0],
            Block { kind: BlockKind::Processing, job: 0, start: 0, end: 3 }
        );
        assert_eq!(blocks[1], Block { kind: BlockKind::Setup, job: 1, start: 3, end: 5 });
        assert_eq!(
            blocks[2],
            Block { kind: BlockKind::Processing, job: 1, start: 5, end: 9 }
        );
    }

    #[test]
    fn gantt_processing_lengths_sum_to_load() {
        let inst = generate_instance(8, 3, 0.7, 21).unwrap();
        let mut sched = Schedule::empty(3);
        for j in 0..8 {
            let m = inst.eligible_machines(j)[0];
            sched.sequences[m].push(j);
        }
        let gantt = to_gantt(&inst, &sched).unwrap();
        for (m, row) in gantt.machines.iter().enumerate() {
            let processed: i64 = row
                .blocks
                .iter()
                .filter(|b| b.kind == BlockKind::Processing)
                .map(|b| b.end - b.start)
                .sum();
            assert_eq!(processed, machine_load(&inst, m, &sched.sequences[m]));
            // Contiguity: each block starts where the previous one ended.
            let mut clock = 0;
            for b in &row.blocks {
                assert_eq!(b.start, clock);
                assert!(b.end > b.start);
                clock = b.end;
            }
        }
    }

    #[test]
    fn gantt_svg_and_json_are_deterministic() {
        let inst = two_job_line();
        let sched = Schedule { sequences: vec![vec![0, 1]] };
        let gantt = to_gantt(&inst, &sched).unwrap();
        assert_eq!(gantt.to_svg(), gantt.to_svg());
        assert_eq!(gantt.to_json(), gantt.to_json());
        assert!(gantt.to_svg().contains("rect"));
        assert!(gantt.to_json().contains("\"processing\""));
    }

    #[test]
    fn schedule_document_round_trips() {
        let sched = Schedule { sequences: vec![vec![0, 2], vec![1], vec![]] };
        let text = sched.serialize();
        assert!(text.contains("[\n      1,\n      3\n    ]") || text.contains("1,"));
        assert_eq!(Schedule::parse(&text).unwrap(), sched);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn greedy_schedule(inst: &ProblemInstance, salt: u64) -> Schedule {
            let mut sched = Schedule::empty(inst.n_machines);
            for j in 0..inst.n_jobs {
                let opts = inst.eligible_machines(j);
                let m = opts[(j as u64 ^ salt) as usize % opts.len()];
                sched.sequences[m].push(j);
            }
            sched
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]
            #[test]
            fn permutation_within_machine_only_moves_setup(
                seed in any::<u64>(),
                salt in any::<u64>(),
            ) {
                let inst = generate_instance(7, 3, 0.8, seed).unwrap();
                let sched = greedy_schedule(&inst, salt);
                let base = evaluate(&inst, &sched).unwrap();
                let mut rev = sched.clone();
                for seq in &mut rev.sequences {
                    seq.reverse();
                }
                let b = evaluate(&inst, &rev).unwrap();
                prop_assert_eq!(base.balance_sum_sq, b.balance_sum_sq);
                prop_assert_eq!(base.value_total, b.value_total);
            }
        }
    }
}
