//! Arc-based mixed-integer model of the assignment and sequencing problem.
//!
//! Each machine runs a tour that starts and ends at a dummy node 0: binary
//! `x_m_i_j` says job `j` directly follows `i` on machine `m`. Continuous
//! `u_m_j` is the cumulative processing time on `m` up to and including `j`
//! (setups excluded), pushed up along taken arcs by big-M rows, which also
//! rules out sub-tours. `t_m` dominates every `u_m_j` and carries the convex
//! quadratic balance term, so the objective is
//! `w_setup * setups + w_balance * sum t_m^2 - w_value * values`.
//!
//! The model is meant for export; there is no solver here. Feasible schedules
//! map onto assignments via [`encode_schedule`] and assignments are checked
//! row by row via [`check_assignment`].

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result, Violation};
use crate::instance::ProblemInstance;
use crate::schedule::{self, Schedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone)]
pub struct MipVar {
    pub name: String,
    pub kind: VarKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

/// One linear constraint row: `sum(coeff * var) sense rhs`.
#[derive(Debug, Clone)]
pub struct Row {
    pub name: String,
    pub terms: Vec<(usize, i64)>,
    pub sense: Sense,
    pub rhs: i64,
}

/// The assembled model. Variables are ordered deterministically: all arcs by
/// (machine, from-node, to-node) with node 0 the dummy and jobs 1-based, then
/// `u` by (machine, job), then `t` by machine. All coefficients are integers.
#[derive(Debug, Clone)]
pub struct MipModel {
    pub instance: ProblemInstance,
    pub vars: Vec<MipVar>,
    pub rows: Vec<Row>,
    /// Nonzero linear objective coefficients by variable index, ascending.
    pub objective_linear: Vec<(usize, i64)>,
    /// Diagonal quadratic terms `coeff * var^2`; one per machine when
    /// `w_balance > 0`, empty otherwise.
    pub objective_quadratic: Vec<(usize, i64)>,
    pub big_m: i64,
    name_index: HashMap<String, usize>,
    x_index: HashMap<(usize, usize, usize), usize>,
    u_index: HashMap<(usize, usize), usize>,
    t_index: Vec<usize>,
}

impl MipModel {
    pub fn n_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.name_index.get(name).copied()
    }

    pub fn var_names(&self) -> impl Iterator<Item = &str> {
        self.vars.iter().map(|v| v.name.as_str())
    }

    /// Index of `x_m_i_j`; nodes are 0 for the dummy, job id + 1 otherwise.
    pub fn arc_var(&self, machine: usize, from_node: usize, to_node: usize) -> Option<usize> {
        self.x_index.get(&(machine, from_node, to_node)).copied()
    }
}

/// Number of variables [`build_mip`] creates, without building the model.
pub fn count_mip_variables(inst: &ProblemInstance) -> usize {
    (0..inst.n_machines)
        .map(|m| {
            let f = inst.jobs_eligible_on(m).len();
            (f + 1) * f + f + 1
        })
        .sum()
}

/// Default big-M: the total processing time if every job took its slowest
/// eligible machine. Any cumulative time fits under it.
pub fn default_big_m(inst: &ProblemInstance) -> i64 {
    (0..inst.n_jobs)
        .map(|j| {
            inst.eligible_machines(j)
                .iter()
                .map(|&m| inst.processing_time(j, m).unwrap())
                .max()
                .unwrap_or(0)
        })
        .sum()
}

pub fn build_mip(inst: &ProblemInstance) -> Result<MipModel> {
    build_mip_with(inst, None)
}

/// `big_m` overrides the default; it must not be below [`default_big_m`],
/// otherwise feasible schedules would violate the sequencing rows.
pub fn build_mip_with(inst: &ProblemInstance, big_m: Option<i64>) -> Result<MipModel> {
    let violations = inst.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidInstance(violations));
    }
    let floor = default_big_m(inst);
    let big_m = match big_m {
        Some(m) if m < floor => {
            return Err(Error::InvalidArgument(format!(
                "big_m {m} is below the lower bound {floor}"
            )))
        }
        Some(m) => m,
        None => floor,
    };

    // Node sets per machine: dummy 0 plus the eligible jobs as id + 1.
    let nodes: Vec<Vec<usize>> = (0..inst.n_machines)
        .map(|m| {
            std::iter::once(0)
                .chain(inst.jobs_eligible_on(m).into_iter().map(|j| j + 1))
                .collect()
        })
        .collect();

    let mut vars = Vec::new();
    let mut name_index = HashMap::new();
    let mut x_index = HashMap::new();
    let mut u_index = HashMap::new();
    let mut t_index = Vec::with_capacity(inst.n_machines);
    let push = |vars: &mut Vec<MipVar>,
                    name_index: &mut HashMap<String, usize>,
                    name: String,
                    kind: VarKind| {
        let idx = vars.len();
        name_index.insert(name.clone(), idx);
        vars.push(MipVar { name, kind });
        idx
    };
    for (m, node_set) in nodes.iter().enumerate() {
        for &a in node_set {
            for &b in node_set {
                if a == b {
                    continue;
                }
                let idx = push(
                    &mut vars,
                    &mut name_index,
                    format!("x_{}_{}_{}", m + 1, a, b),
                    VarKind::Binary,
                );
                x_index.insert((m, a, b), idx);
            }
        }
    }
    for m in 0..inst.n_machines {
        for j in inst.jobs_eligible_on(m) {
            let idx = push(
                &mut vars,
                &mut name_index,
                format!("u_{}_{}", m + 1, j + 1),
                VarKind::Continuous,
            );
            u_index.insert((m, j), idx);
        }
    }
    for m in 0..inst.n_machines {
        t_index.push(push(
            &mut vars,
            &mut name_index,
            format!("t_{}", m + 1),
            VarKind::Continuous,
        ));
    }

    let mut rows = Vec::new();
    // Exactly one predecessor and one successor arc per job, over all machines.
    for j in 0..inst.n_jobs {
        let nj = j + 1;
        let mut pred = Vec::new();
        let mut succ = Vec::new();
        for m in 0..inst.n_machines {
            for &a in &nodes[m] {
                if a != nj {
                    if let Some(&idx) = x_index.get(&(m, a, nj)) {
                        pred.push((idx, 1));
                    }
                    if let Some(&idx) = x_index.get(&(m, nj, a)) {
                        succ.push((idx, 1));
                    }
                }
            }
        }
        rows.push(Row { name: format!("pred_{nj}"), terms: pred, sense: Sense::Eq, rhs: 1 });
        rows.push(Row { name: format!("succ_{nj}"), terms: succ, sense: Sense::Eq, rhs: 1 });
    }
    // Per machine and node, inbound and outbound arcs match.
    for (m, node_set) in nodes.iter().enumerate() {
        for &n in node_set {
            let mut terms = Vec::new();
            for &a in node_set {
                if a == n {
                    continue;
                }
                if let Some(&idx) = x_index.get(&(m, a, n)) {
                    terms.push((idx, 1));
                }
                if let Some(&idx) = x_index.get(&(m, n, a)) {
                    terms.push((idx, -1));
                }
            }
            if !terms.is_empty() {
                rows.push(Row {
                    name: format!("flow_{}_{}", m + 1, n),
                    terms,
                    sense: Sense::Eq,
                    rhs: 0,
                });
            }
        }
    }
    // At most one tour leaves the dummy on each machine.
    for (m, node_set) in nodes.iter().enumerate() {
        let terms: Vec<_> = node_set
            .iter()
            .filter(|&&b| b != 0)
            .filter_map(|&b| x_index.get(&(m, 0, b)).map(|&idx| (idx, 1)))
            .collect();
        if !terms.is_empty() {
            rows.push(Row {
                name: format!("start_{}", m + 1),
                terms,
                sense: Sense::Le,
                rhs: 1,
            });
        }
    }
    // Taken arc (a -> b) forces u_b >= u_a + p_b; the dummy contributes u = 0.
    // Doubles as sub-tour elimination: a cycle of job arcs sums to an
    // impossible chain of strict increases.
    for (m, node_set) in nodes.iter().enumerate() {
        for &a in node_set {
            for &b in node_set {
                if a == b || b == 0 {
                    continue;
                }
                let job_b = b - 1;
                let p_b = inst.processing_time(job_b, m).unwrap();
                let mut terms = Vec::new();
                if a != 0 {
                    terms.push((u_index[&(m, a - 1)], 1));
                }
                terms.push((u_index[&(m, job_b)], -1));
                terms.push((x_index[&(m, a, b)], big_m));
                rows.push(Row {
                    name: format!("mtz_{}_{}_{}", m + 1, a, b),
                    terms,
                    sense: Sense::Le,
                    rhs: big_m - p_b,
                });
            }
        }
    }
    // t_m dominates every cumulative time on its machine.
    for m in 0..inst.n_machines {
        for j in inst.jobs_eligible_on(m) {
            rows.push(Row {
                name: format!("load_{}_{}", m + 1, j + 1),
                terms: vec![(u_index[&(m, j)], 1), (t_index[m], -1)],
                sense: Sense::Le,
                rhs: 0,
            });
        }
    }
    // Aggregate load cut. Exact when processing times are machine-independent,
    // a lower bound otherwise.
    {
        let terms: Vec<_> = t_index.iter().map(|&idx| (idx, 1)).collect();
        let (sense, rhs) = if inst.machine_independent_processing() {
            let total: i64 = (0..inst.n_jobs)
                .map(|j| inst.processing_time(j, inst.eligible_machines(j)[0]).unwrap())
                .sum();
            (Sense::Eq, total)
        } else {
            let total: i64 = (0..inst.n_jobs)
                .map(|j| {
                    inst.eligible_machines(j)
                        .iter()
                        .map(|&m| inst.processing_time(j, m).unwrap())
                        .min()
                        .unwrap()
                })
                .sum();
            (Sense::Ge, total)
        };
        rows.push(Row { name: "total".into(), terms, sense, rhs });
    }

    let w = inst.weights;
    let mut linear = vec![0i64; vars.len()];
    for (&(m, a, b), &idx) in &x_index {
        if b == 0 {
            continue;
        }
        let job_b = b - 1;
        let mut c = -w.w_value * inst.job_value(job_b, m).unwrap();
        if a != 0 {
            c += w.w_setup * inst.setup_time(a - 1, job_b);
        }
        linear[idx] += c;
    }
    let objective_linear: Vec<_> = linear
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c != 0)
        .collect();
    let objective_quadratic: Vec<_> = if w.w_balance > 0 {
        t_index.iter().map(|&idx| (idx, w.w_balance)).collect()
    } else {
        Vec::new()
    };

    Ok(MipModel {
        instance: inst.clone(),
        vars,
        rows,
        objective_linear,
        objective_quadratic,
        big_m,
        name_index,
        x_index,
        u_index,
        t_index,
    })
}

/// Maps a feasible schedule to variable values: tour arcs set to 1, `u` to the
/// cumulative processing times, `t` to the machine load. Only nonzero values
/// are returned; absent variables are zero.
pub fn encode_schedule(model: &MipModel, sched: &Schedule) -> Result<BTreeMap<String, f64>> {
    let violations = schedule::validate_schedule(&model.instance, sched);
    if !violations.is_empty() {
        return Err(Error::InfeasibleSchedule(violations));
    }
    let inst = &model.instance;
    let mut out = BTreeMap::new();
    for (m, seq) in sched.sequences.iter().enumerate() {
        if seq.is_empty() {
            continue;
        }
        let mut prev_node = 0usize;
        let mut cumulative = 0i64;
        for &j in seq {
            let node = j + 1;
            out.insert(model.vars[model.x_index[&(m, prev_node, node)]].name.clone(), 1.0);
            cumulative += inst.processing_time(j, m).unwrap();
            out.insert(model.vars[model.u_index[&(m, j)]].name.clone(), cumulative as f64);
            prev_node = node;
        }
        out.insert(model.vars[model.x_index[&(m, prev_node, 0)]].name.clone(), 1.0);
        if cumulative != 0 {
            out.insert(model.vars[model.t_index[m]].name.clone(), cumulative as f64);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub violations: Vec<Violation>,
    pub objective: f64,
}

const CONTINUOUS_TOL: f64 = 1e-9;

/// Evaluates every row and the objective at the given point. Variables absent
/// from `assignment` are zero; names that are not in the model are an error.
/// Rows over binary variables must hold exactly; rows touching continuous
/// variables get a 1e-9 absolute tolerance.
pub fn check_assignment(
    model: &MipModel,
    assignment: &BTreeMap<String, f64>,
) -> Result<CheckReport> {
    let mut values = vec![0.0f64; model.vars.len()];
    for (name, &v) in assignment {
        match model.var_index(name) {
            Some(idx) => values[idx] = v,
            None => return Err(Error::UnknownVariable(name.clone())),
        }
    }
    let mut violations = Vec::new();
    for (idx, var) in model.vars.iter().enumerate() {
        let v = values[idx];
        match var.kind {
            VarKind::Binary => {
                if v != 0.0 && v != 1.0 {
                    violations.push(Violation::new(
                        format!("var {}", var.name),
                        format!("binary variable has value {v}"),
                    ));
                }
            }
            VarKind::Continuous => {
                if v < -CONTINUOUS_TOL {
                    violations.push(Violation::new(
                        format!("var {}", var.name),
                        format!("negative value {v}"),
                    ));
                }
            }
        }
    }
    for row in &model.rows {
        let lhs: f64 = row.terms.iter().map(|&(idx, c)| c as f64 * values[idx]).sum();
        let rhs = row.rhs as f64;
        let exact = row
            .terms
            .iter()
            .all(|&(idx, _)| model.vars[idx].kind == VarKind::Binary);
        let tol = if exact { 0.0 } else { CONTINUOUS_TOL };
        let ok = match row.sense {
            Sense::Le => lhs <= rhs + tol,
            Sense::Ge => lhs >= rhs - tol,
            Sense::Eq => (lhs - rhs).abs() <= tol,
        };
        if !ok {
            violations.push(Violation::new(
                format!("row {}", row.name),
                format!("lhs {} violates {} {}", lhs, row.sense.symbol(), rhs),
            ));
        }
    }
    let mut objective: f64 = model
        .objective_linear
        .iter()
        .map(|&(idx, c)| c as f64 * values[idx])
        .sum();
    objective += model
        .objective_quadratic
        .iter()
        .map(|&(idx, c)| c as f64 * values[idx] * values[idx])
        .sum::<f64>();
    Ok(CheckReport { violations, objective })
}

/// Parses the `name value` per-line assignment format. Blank lines are
/// skipped; duplicate names are rejected.
pub fn parse_assignment(text: &str) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let name = parts.next().unwrap();
        let value = parts
            .next()
            .ok_or_else(|| Error::Parse(format!("line {}: expected `name value`", lineno + 1)))?;
        if parts.next().is_some() {
            return Err(Error::Parse(format!("line {}: trailing tokens", lineno + 1)));
        }
        let value: f64 = value
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: bad number `{value}`", lineno + 1)))?;
        if out.insert(name.to_string(), value).is_some() {
            return Err(Error::Parse(format!("line {}: duplicate variable `{name}`", lineno + 1)));
        }
    }
    Ok(out)
}

/// Serializes an assignment in the `name value` per-line format.
pub fn serialize_assignment(assignment: &BTreeMap<String, f64>) -> String {
    let mut out = String::new();
    for (name, value) in assignment {
        out.push_str(&format!("{name} {value}\n"));
    }
    out
}

const LP_LINE_LIMIT: usize = 200;

struct LpWriter {
    out: String,
    line: String,
}

impl LpWriter {
    fn new() -> Self {
        LpWriter { out: String::new(), line: String::new() }
    }

    fn raw(&mut self, text: &str) {
        self.flush();
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn token(&mut self, tok: &str) {
        if self.line.len() + tok.len() + 1 > LP_LINE_LIMIT {
            self.out.push_str(&self.line);
            self.out.push('\n');
            self.line = "   ".to_string();
        }
        if !self.line.is_empty() && !self.line.ends_with(' ') {
            self.line.push(' ');
        }
        self.line.push_str(tok);
    }

    fn flush(&mut self) {
        if !self.line.is_empty() {
            self.out.push_str(&self.line);
            self.out.push('\n');
            self.line.clear();
        }
    }
}

fn push_linear_terms(w: &mut LpWriter, model: &MipModel, terms: &[(usize, i64)], mut first: bool) {
    for &(idx, c) in terms {
        let name = &model.vars[idx].name;
        if first {
            w.token(&format!("{c} {name}"));
            first = false;
        } else if c >= 0 {
            w.token(&format!("+ {c} {name}"));
        } else {
            w.token(&format!("- {} {name}", -c));
        }
    }
}

/// Writes the model in CPLEX LP format. The quadratic balance part is emitted
/// as an objective bracket `[ 2w t_m ^ 2 + ... ] / 2`; the bracket is absent
/// when `w_balance` is zero. Output is byte-deterministic.
pub fn export_lp(model: &MipModel) -> String {
    let mut w = LpWriter::new();
    w.raw("\\ machine assignment and sequencing model");
    w.raw("Minimize");
    w.token(" obj:");
    push_linear_terms(&mut w, model, &model.objective_linear, true);
    if !model.objective_quadratic.is_empty() {
        if model.objective_linear.is_empty() {
            w.token("[");
        } else {
            w.token("+ [");
        }
        let mut first = true;
        for &(idx, c) in &model.objective_quadratic {
            let name = &model.vars[idx].name;
            if first {
                w.token(&format!("{} {name} ^ 2", 2 * c));
                first = false;
            } else {
                w.token(&format!("+ {} {name} ^ 2", 2 * c));
            }
        }
        w.token("] / 2");
    }
    w.flush();
    w.raw("Subject To");
    for row in &model.rows {
        w.token(&format!(" {}:", row.name));
        push_linear_terms(&mut w, model, &row.terms, true);
        w.token(&format!("{} {}", row.sense.symbol(), row.rhs));
        w.flush();
    }
    w.raw("Bounds");
    for var in &model.vars {
        if var.kind == VarKind::Continuous {
            w.raw(&format!(" 0 <= {}", var.name));
        }
    }
    w.raw("Binary");
    for var in &model.vars {
        if var.kind == VarKind::Binary {
            w.token(&var.name);
        }
    }
    w.flush();
    w.raw("End");
    w.out
}
