//! End-to-end tests of the `stablecluster` binary: exit codes, atomic
//! output, and byte-level determinism.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stablecluster"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin()
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_code(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn solve_is_deterministic_and_matches_oracle_on_generated_instance() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_code(
        &run(
            &[
                "generate",
                "resilient",
                "--n",
                "9",
                "--k",
                "3",
                "--target",
                "3.0",
                "--seed",
                "5",
                "--out",
                "inst.json",
            ],
            d,
        ),
        0,
    );
    // generation itself is deterministic in the seed
    assert_code(
        &run(
            &[
                "generate",
                "resilient",
                "--n",
                "9",
                "--k",
                "3",
                "--target",
                "3.0",
                "--seed",
                "5",
                "--out",
                "inst2.json",
            ],
            d,
        ),
        0,
    );
    assert_eq!(
        std::fs::read(d.join("inst.json")).unwrap(),
        std::fs::read(d.join("inst2.json")).unwrap()
    );
    // all three methods agree on a well-separated instance
    let out = run(
        &[
            "compare",
            "--instance",
            "inst.json",
            "--objective",
            "kmedian",
            "--k",
            "3",
        ],
        d,
    );
    assert_code(&out, 0);
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().skip(1) {
        assert!(line.ends_with("true"), "unexpected compare row: {line}");
    }
    assert_code(
        &run(
            &[
                "solve",
                "--instance",
                "inst.json",
                "--objective",
                "kmedian",
                "--k",
                "3",
                "--out",
                "a.json",
                "--dump-tree",
                "tree.json",
            ],
            d,
        ),
        0,
    );
    assert_code(
        &run(
            &[
                "solve",
                "--instance",
                "inst.json",
                "--objective",
                "kmedian",
                "--k",
                "3",
                "--out",
                "b.json",
            ],
            d,
        ),
        0,
    );
    let a = std::fs::read(d.join("a.json")).unwrap();
    let b = std::fs::read(d.join("b.json")).unwrap();
    assert_eq!(a, b, "identical config must give byte-identical output");

    let tree: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("tree.json")).unwrap()).unwrap();
    assert_eq!(tree.as_array().unwrap().len(), 17); // 2n - 1 nodes

    assert_code(
        &run(
            &[
                "oracle",
                "--instance",
                "inst.json",
                "--objective",
                "kmedian",
                "--k",
                "3",
                "--out",
                "orc.json",
            ],
            d,
        ),
        0,
    );
    let solved: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("a.json")).unwrap()).unwrap();
    let oracle: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("orc.json")).unwrap()).unwrap();
    assert_eq!(solved["cost"], oracle["cost"]);
    assert_eq!(oracle["unique"], serde_json::Value::Bool(true));
}

#[test]
fn domain_errors_exit_3_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_code(&run(&["generate", "fig2", "--out", "f2.json"], d), 0);
    let out = run(
        &[
            "solve",
            "--instance",
            "f2.json",
            "--objective",
            "kmedian",
            "--k",
            "9",
            "--out",
            "never.json",
        ],
        d,
    );
    assert_code(&out, 3);
    assert!(
        !d.join("never.json").exists(),
        "no partial output on failure"
    );
}

#[test]
fn malformed_instance_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.json"), "{\"name\": \"x\"}").unwrap();
    let out = run(
        &[
            "solve",
            "--instance",
            "bad.json",
            "--objective",
            "kmedian",
            "--k",
            "1",
            "--out",
            "never.json",
        ],
        d,
    );
    assert_code(&out, 2);
    assert!(!d.join("never.json").exists());

    // a matrix that is no metric is rejected at load time
    std::fs::write(
        d.join("nonmetric.json"),
        r#"{"name":"t","matrix":[[0,1,5],[1,0,1],[5,1,0]],"center_policy":"data"}"#,
    )
    .unwrap();
    let out = run(
        &[
            "solve",
            "--instance",
            "nonmetric.json",
            "--objective",
            "kmedian",
            "--k",
            "2",
            "--out",
            "never.json",
        ],
        d,
    );
    assert_code(&out, 2);
    assert!(!d.join("never.json").exists());
}

#[test]
fn oracle_budget_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_code(
        &run(
            &[
                "generate",
                "fig3",
                "--size-big",
                "10",
                "--size-small",
                "2",
                "--eps",
                "0.1",
                "--out",
                "big.json",
            ],
            d,
        ),
        0,
    );
    // n = 32 is far beyond the default partition budget
    let out = run(
        &[
            "oracle",
            "--instance",
            "big.json",
            "--objective",
            "kmedian",
            "--k",
            "3",
        ],
        d,
    );
    assert_code(&out, 4);
    // compare without --no-oracle inherits the same failure
    let out = run(
        &[
            "compare",
            "--instance",
            "big.json",
            "--objective",
            "kmedian",
            "--k",
            "3",
        ],
        d,
    );
    assert_code(&out, 4);
    // and succeeds when the oracle is skipped
    let out = run(
        &[
            "compare",
            "--instance",
            "big.json",
            "--objective",
            "kmedian",
            "--k",
            "3",
            "--no-oracle",
        ],
        d,
    );
    assert_code(&out, 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("tree_dp"));
    assert!(text.contains("naive_single_linkage_at_k"));
}

#[test]
fn compare_reports_the_failure_instance() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_code(&run(&["generate", "fig2", "--out", "f2.json"], d), 0);
    let out = run(
        &[
            "compare",
            "--instance",
            "f2.json",
            "--objective",
            "kmedian",
            "--k",
            "2",
        ],
        d,
    );
    assert_code(&out, 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut tree_matches = None;
    let mut oracle_cost = None;
    let mut tree_cost = None;
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split('\t').collect();
        match cols[0] {
            "tree_dp" => {
                tree_cost = Some(cols[1].parse::<f64>().unwrap());
                tree_matches = Some(cols[2] == "true");
            }
            "oracle" => oracle_cost = Some(cols[1].parse::<f64>().unwrap()),
            _ => {}
        }
    }
    assert_eq!(tree_matches, Some(false));
    assert!(tree_cost.unwrap() > oracle_cost.unwrap());
}

#[test]
fn check_emits_a_full_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_code(
        &run(
            &[
                "generate",
                "resilient",
                "--n",
                "8",
                "--k",
                "2",
                "--target",
                "3.5",
                "--seed",
                "9",
                "--out",
                "inst.json",
                "--out-clustering",
                "intended.json",
            ],
            d,
        ),
        0,
    );
    let out = run(
        &[
            "check",
            "--instance",
            "inst.json",
            "--clustering",
            "intended.json",
            "--alpha",
            "3.0",
            "--trials",
            "25",
            "--seed",
            "3",
        ],
        d,
    );
    assert_code(&out, 0);
    let report: serde_json::Value =
        serde_json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!(report["proximity_factor"].as_f64().unwrap() >= 3.5);
    assert_eq!(report["min_stable"], serde_json::Value::Bool(true));
    assert_eq!(report["min_stability_method"], "exact");
    assert_eq!(
        report["corollary_ok_at_alpha"],
        serde_json::Value::Bool(true)
    );
    assert_eq!(report["probe"]["failures"], 0);
    assert_eq!(report["probe"]["trials"], 25);

    // a tiny subset budget pushes the checker onto the tree shortcut
    let out = run(
        &[
            "check",
            "--instance",
            "inst.json",
            "--clustering",
            "intended.json",
            "--exact-budget",
            "4",
        ],
        d,
    );
    assert_code(&out, 0);
    let report: serde_json::Value =
        serde_json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(report["min_stability_method"], "tree");
    assert_eq!(report["min_stable"], serde_json::Value::Bool(true));
}

#[test]
fn perturb_round_trips_and_env_budget_applies() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_code(&run(&["generate", "fig2", "--out", "f2.json"], d), 0);
    assert_code(
        &run(
            &[
                "perturb",
                "--instance",
                "f2.json",
                "--alpha",
                "2.0",
                "--mode",
                "uniform",
                "--seed",
                "7",
                "--out",
                "p.json",
            ],
            d,
        ),
        0,
    );
    // perturbed instances load fine (metric validation is waived for them)
    assert_code(
        &run(
            &[
                "solve",
                "--instance",
                "p.json",
                "--objective",
                "kmedian",
                "--k",
                "2",
                "--out",
                "ps.json",
            ],
            d,
        ),
        0,
    );
    // a tiny env budget forces exit 4 even on the 5-point instance
    let out = bin()
        .args([
            "oracle",
            "--instance",
            "f2.json",
            "--objective",
            "kmedian",
            "--k",
            "2",
        ])
        .env("STABLECLUSTER_BUDGET", "3")
        .current_dir(d)
        .output()
        .unwrap();
    assert_code(&out, 4);
}

#[test]
fn coverage_set_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("sets.txt"), "2 4\n0 1\n2 3\n").unwrap();
    assert_code(
        &run(
            &[
                "generate", "coverage", "--sets", "sets.txt", "--k", "2", "--out", "cov.json",
            ],
            d,
        ),
        0,
    );
    let out = run(
        &[
            "oracle",
            "--instance",
            "cov.json",
            "--objective",
            "kmedian",
            "--k",
            "2",
        ],
        d,
    );
    assert_code(&out, 0);
    let sol: serde_json::Value =
        serde_json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(sol["cost"], 4.0);
}

#[test]
fn solve_recovers_the_four_component_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_code(
        &run(
            &[
                "generate",
                "fig3",
                "--size-big",
                "3",
                "--size-small",
                "2",
                "--eps",
                "0.2",
                "--out",
                "f3.json",
            ],
            d,
        ),
        0,
    );
    let out = run(
        &[
            "compare",
            "--instance",
            "f3.json",
            "--objective",
            "kmedian",
            "--k",
            "3",
        ],
        d,
    );
    assert_code(&out, 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let row = |method: &str| -> Vec<String> {
        text.lines()
            .find(|l| l.starts_with(method))
            .unwrap_or_else(|| panic!("row {method} missing in {text}"))
            .split('\t')
            .map(str::to_string)
            .collect()
    };
    assert_eq!(row("tree_dp")[2], "true");
    assert_eq!(row("naive_single_linkage_at_k")[2], "false");

    // the solved labels realize the A+C / B / D partition
    assert_code(
        &run(
            &[
                "solve",
                "--instance",
                "f3.json",
                "--objective",
                "kmedian",
                "--k",
                "3",
                "--out",
                "sol.json",
            ],
            d,
        ),
        0,
    );
    let sol: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("sol.json")).unwrap()).unwrap();
    let labels: Vec<u64> = sol["labels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .collect();
    // components: A=0..3, B=3..6, C=6..8, D=8..11; expect {A+C}, {B}, {D}
    let ac: Vec<u64> = (0..3).chain(6..8).map(|i| labels[i]).collect();
    assert!(ac.iter().all(|&l| l == ac[0]));
    let b: Vec<u64> = (3..6).map(|i| labels[i]).collect();
    assert!(b.iter().all(|&l| l == b[0]));
    let d_labels: Vec<u64> = (8..11).map(|i| labels[i]).collect();
    assert!(d_labels.iter().all(|&l| l == d_labels[0]));
    assert_ne!(ac[0], b[0]);
    assert_ne!(ac[0], d_labels[0]);
    assert_ne!(b[0], d_labels[0]);
}

#[test]
fn bench_single_size_reports_without_fit() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = run(&["bench", "--sizes", "120", "--k", "4", "--reps", "1"], d);
    assert_code(&out, 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# fitted_exponent\t-"));
}
