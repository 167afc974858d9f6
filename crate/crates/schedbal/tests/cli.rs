//! Drives the installed binary end to end through temp directories, checking
//! stdout shapes and the 0/1/2 exit-code contract.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_schedbal"))
}

struct TempDir(PathBuf);

impl TempDir {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("schedbal-cli-{tag}-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        TempDir(dir)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "command failed: {}\n{}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn gen(dir: &TempDir, name: &str, jobs: usize, machines: usize, seed: u64) -> PathBuf {
    let path = dir.path(name);
    let out = bin()
        .args(["gen", "--jobs", &jobs.to_string(), "--machines", &machines.to_string()])
        .args(["--density", "0.9", "--seed", &seed.to_string()])
        .arg("--out")
        .arg(&path)
        .output()
        .unwrap();
    ok(&out);
    path
}

#[test]
fn gen_writes_a_parseable_instance() {
    let dir = TempDir::new("gen");
    let path = gen(&dir, "inst.json", 5, 2, 3);
    let text = std::fs::read_to_string(&path).unwrap();
    let inst = schedbal::ProblemInstance::parse(&text).unwrap();
    assert_eq!(inst.n_jobs, 5);
    assert_eq!(inst.n_machines, 2);
}

#[test]
fn solve_then_eval_agree_on_the_objective() {
    let dir = TempDir::new("solve-eval");
    let inst = gen(&dir, "inst.json", 6, 2, 4);
    let result = dir.path("result.json");
    let out = bin()
        .args(["solve", "--solver", "sa", "--seed", "5"])
        .arg("--instance")
        .arg(&inst)
        .arg("--out")
        .arg(&result)
        .output()
        .unwrap();
    let stdout = ok(&out);
    assert!(stdout.contains("feasible"), "solver line: {stdout}");
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&result).unwrap()).unwrap();
    let combined = doc["objective"]["combined"].as_i64().unwrap();
    assert_eq!(doc["solver"], "sa");

    let sched = dir.path("sched.json");
    std::fs::write(&sched, serde_json::to_string(&doc["schedule"]).unwrap()).unwrap();
    let svg = dir.path("chart.svg");
    let out = bin()
        .arg("eval")
        .arg("--instance")
        .arg(&inst)
        .arg("--schedule")
        .arg(&sched)
        .arg("--gantt")
        .arg(&svg)
        .output()
        .unwrap();
    let stdout = ok(&out);
    assert!(stdout.contains(&format!("combined       {combined}")), "eval output: {stdout}");
    let svg_text = std::fs::read_to_string(&svg).unwrap();
    assert!(svg_text.starts_with("<svg"));
}

#[test]
fn export_lp_and_qubo_have_their_headers() {
    let dir = TempDir::new("export");
    let inst = gen(&dir, "inst.json", 4, 2, 7);
    let lp = dir.path("model.lp");
    ok(&bin().arg("export-lp").arg("--instance").arg(&inst).arg("--out").arg(&lp).output().unwrap());
    let lp_text = std::fs::read_to_string(&lp).unwrap();
    assert!(lp_text.starts_with("\\ machine assignment and sequencing model\n"));
    assert!(lp_text.contains("Minimize"));
    assert!(lp_text.trim_end().ends_with("End"));

    let qubo = dir.path("model.qubo");
    ok(&bin()
        .arg("export-qubo")
        .arg("--instance")
        .arg(&inst)
        .arg("--out")
        .arg(&qubo)
        .output()
        .unwrap());
    let qubo_text = std::fs::read_to_string(&qubo).unwrap();
    let header = qubo_text.lines().next().unwrap();
    assert!(header.starts_with("# "), "header line: {header}");

    let full = dir.path("full.qubo");
    ok(&bin()
        .args(["export-qubo", "--full-slots"])
        .arg("--instance")
        .arg(&inst)
        .arg("--out")
        .arg(&full)
        .output()
        .unwrap());
    let full_vars: usize =
        std::fs::read_to_string(&full).unwrap().split_whitespace().nth(1).unwrap().parse().unwrap();
    let trunc_vars: usize = header.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!(full_vars >= trunc_vars);
}

#[test]
fn decompose_writes_leaves_and_a_manifest() {
    let dir = TempDir::new("decompose");
    let inst = gen(&dir, "inst.json", 8, 4, 9);
    let parts = dir.path("parts");
    ok(&bin()
        .args(["decompose", "--max-vars", "10", "--seed", "2"])
        .arg("--instance")
        .arg(&inst)
        .arg("--out-dir")
        .arg(&parts)
        .output()
        .unwrap());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(parts.join("manifest.json")).unwrap())
            .unwrap();
    let leaves = manifest["leaves"].as_array().unwrap();
    assert!(leaves.len() >= 2, "4 machines over budget should split");
    let mut seen_machines = Vec::new();
    for leaf in leaves {
        let file = leaf["file"].as_str().unwrap();
        let text = std::fs::read_to_string(parts.join(file)).unwrap();
        schedbal::ProblemInstance::parse(&text).unwrap();
        for (_, orig) in leaf["machines"].as_object().unwrap() {
            seen_machines.push(orig.as_u64().unwrap());
        }
    }
    seen_machines.sort();
    assert_eq!(seen_machines, vec![1, 2, 3, 4], "machine maps tile the original ids");
}

fn write_solvers(path: &Path, body: &str) {
    std::fs::write(path, body).unwrap();
}

#[test]
fn bench_writes_csv_and_summary() {
    let dir = TempDir::new("bench");
    let insts = dir.path("insts");
    std::fs::create_dir_all(&insts).unwrap();
    for (name, seed) in [("a.json", 21u64), ("b.json", 22)] {
        let out = bin()
            .args(["gen", "--jobs", "5", "--machines", "2", "--density", "1.0"])
            .args(["--seed", &seed.to_string()])
            .arg("--out")
            .arg(insts.join(name))
            .output()
            .unwrap();
        ok(&out);
    }
    let spec = dir.path("solvers.json");
    write_solvers(
        &spec,
        r#"[{"label": "brute", "kind": "brute", "logical_time": true},
            {"label": "sa", "kind": "sa", "sweeps": 50, "logical_time": true}]"#,
    );
    let csv = dir.path("results.csv");
    let summary = dir.path("summary.json");
    let run = || {
        bin()
            .args(["bench", "--seeds", "1,2", "--jobs", "2"])
            .arg("--instances")
            .arg(&insts)
            .arg("--solvers")
            .arg(&spec)
            .arg("--out")
            .arg(&csv)
            .arg("--summary")
            .arg(&summary)
            .output()
            .unwrap()
    };
    ok(&run());
    let csv_text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = csv_text.lines().collect();
    assert_eq!(
        lines[0],
        "instance,jobs,machines,vars_bqp,vars_mip,solver,seed,budget_s,objective,wall_s,feasible"
    );
    assert_eq!(lines.len(), 1 + 2 * 2 * 2, "2 instances, 2 solvers, 2 seeds");
    let summary_text = std::fs::read_to_string(&summary).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&summary_text).unwrap();
    assert_eq!(doc["instances"].as_array().unwrap().len(), 2);

    // Same invocation, byte-identical artifacts.
    ok(&run());
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), csv_text);
    assert_eq!(std::fs::read_to_string(&summary).unwrap(), summary_text);
}

#[test]
fn invalid_input_exits_one() {
    let dir = TempDir::new("badinput");
    // Unknown subcommand.
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    // Unreadable instance.
    let out = bin()
        .args(["export-lp", "--instance"])
        .arg(dir.path("missing.json"))
        .arg("--out")
        .arg(dir.path("x.lp"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
    // Malformed instance document.
    let bad = dir.path("bad.json");
    std::fs::write(&bad, "{\"n_machines\": 1}").unwrap();
    let out = bin()
        .args(["solve", "--solver", "brute"])
        .arg("--instance")
        .arg(&bad)
        .arg("--out")
        .arg(dir.path("r.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn failed_bench_run_exits_two() {
    let dir = TempDir::new("benchfail");
    let insts = dir.path("insts");
    std::fs::create_dir_all(&insts).unwrap();
    // Far past the brute-force search budget.
    let out = bin()
        .args(["gen", "--jobs", "30", "--machines", "4", "--density", "1.0", "--seed", "5"])
        .arg("--out")
        .arg(insts.join("big.json"))
        .output()
        .unwrap();
    ok(&out);
    let spec = dir.path("solvers.json");
    write_solvers(&spec, r#"[{"label": "brute", "kind": "brute"}]"#);
    let out = bin()
        .args(["bench", "--seeds", "1"])
        .arg("--instances")
        .arg(&insts)
        .arg("--solvers")
        .arg(&spec)
        .arg("--out")
        .arg(dir.path("results.csv"))
        .arg("--summary")
        .arg(dir.path("summary.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("failed"));
    // The CSV still exists, just without the failed row.
    let csv = std::fs::read_to_string(dir.path("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1, "header only");
}

#[test]
fn help_exits_zero() {
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in ["gen", "eval", "export-lp", "export-qubo", "decompose", "solve", "bench"] {
        assert!(text.contains(sub), "help lists {sub}");
    }
}
