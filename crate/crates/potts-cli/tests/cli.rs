//! End-to-end dispatch tests: flag wiring, artifact determinism, manifest
//! reproduction, and the external-solver answer loop.

use std::fs;
use std::path::{Path, PathBuf};

use potts_cli::{dispatch, RunManifest};
use potts_core::qubo::{import_qubo, write_answer, AnswerFile};
use potts_core::PottsModel;

fn run(args: &[&str]) -> i32 {
    dispatch(args.iter().map(|s| s.to_string()))
}

fn path_str(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

fn write_ferromagnet(dir: &Path, n: usize, q: usize) -> PathBuf {
    let path = dir.join("instance.json");
    PottsModel::ferromagnet(n, q, 1.0)
        .unwrap()
        .write_instance(&path)
        .unwrap();
    path
}

#[test]
fn unknown_flags_exit_with_usage_error() {
    assert_eq!(run(&["potts-anneal", "infq", "--no-such-flag", "1"]), 2);
    assert_eq!(run(&["potts-anneal", "not-a-command"]), 2);
}

#[test]
fn infq_single_point_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = path_str(dir.path(), "infq.csv");
    let code = run(&[
        "potts-anneal",
        "infq",
        "--J",
        "1",
        "--beta",
        "inf",
        "--gamma",
        "0.6",
        "--out",
        &out,
    ]);
    assert_eq!(code, 0);
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv, "gamma,m\n6.00000000000e-1,8.00000000000e-1\n");
}

#[test]
fn meanfield_half_hot_is_second_order() {
    let dir = tempfile::tempdir().unwrap();
    let out = path_str(dir.path(), "half.csv");
    let code = run(&[
        "potts-anneal",
        "meanfield",
        "--Q",
        "4",
        "--constraint",
        "half_hot",
        "--lambda",
        "1",
        "--J",
        "1",
        "--gamma-max",
        "2",
        "--gamma-step",
        "0.01",
        "--out",
        &out,
    ]);
    assert_eq!(code, 0);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(format!("{out}.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["classification"], "second_order");
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 202); // header + 201 points
    assert!(csv.starts_with("gamma,m_plus,m_minus,free_energy,eps_min\n"));
}

#[test]
fn meanfield_one_hot_is_first_order() {
    let dir = tempfile::tempdir().unwrap();
    let out = path_str(dir.path(), "one.csv");
    let code = run(&[
        "potts-anneal",
        "meanfield",
        "--Q",
        "4",
        "--constraint",
        "one_hot",
        "--lambda",
        "1",
        "--J",
        "1",
        "--gamma-max",
        "2",
        "--gamma-step",
        "0.02",
        "--out",
        &out,
    ]);
    assert_eq!(code, 0);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(format!("{out}.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["classification"], "first_order");
    assert!(summary["jump_m_minus"].as_f64().unwrap() >= 0.5);
}

#[test]
fn encode_writes_model_and_qubo() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_ferromagnet(dir.path(), 4, 2);
    let prefix = path_str(dir.path(), "ferro");
    let code = run(&[
        "potts-anneal",
        "encode",
        "--instance",
        instance.to_str().unwrap(),
        "--encoding",
        "half_hot",
        "--lambda",
        "1",
        "--out",
        &prefix,
    ]);
    assert_eq!(code, 0);
    let qubo = import_qubo(Path::new(&format!("{prefix}.qubo.json"))).unwrap();
    assert_eq!(qubo.num_variables(), 8);
    assert!(Path::new(&format!("{prefix}.qm.json")).exists());
    assert!(Path::new(&format!("{prefix}.manifest.json")).exists());
}

#[test]
fn anneal_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_ferromagnet(dir.path(), 4, 2);
    let prefix = path_str(dir.path(), "m");
    assert_eq!(
        run(&[
            "potts-anneal",
            "encode",
            "--instance",
            instance.to_str().unwrap(),
            "--encoding",
            "half_hot",
            "--out",
            &prefix,
        ]),
        0
    );
    let model = format!("{prefix}.qubo.json");
    let out_a = path_str(dir.path(), "a.json");
    let out_b = path_str(dir.path(), "b.json");
    for out in [&out_a, &out_b] {
        assert_eq!(
            run(&[
                "potts-anneal",
                "anneal",
                "--model",
                &model,
                "--seed",
                "7",
                "--sweeps",
                "500",
                "--out",
                out,
            ]),
            0
        );
    }
    let a = fs::read_to_string(&out_a).unwrap();
    let b = fs::read_to_string(&out_b).unwrap();
    assert_eq!(a, b);
    // the annealer reaches the known ground energy of this instance
    let body: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(body["best_energy"].as_f64().unwrap(), -4.0);
}

#[test]
fn manifest_reproduces_the_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = path_str(dir.path(), "grid.csv");
    assert_eq!(
        run(&[
            "potts-anneal",
            "infq",
            "--J",
            "1",
            "--beta",
            "2.5",
            "--gamma-max",
            "1",
            "--gamma-step",
            "0.25",
            "--out",
            &out,
        ]),
        0
    );
    let first = fs::read_to_string(&out).unwrap();
    let manifest: RunManifest =
        serde_json::from_str(&fs::read_to_string(format!("{out}.manifest.json")).unwrap()).unwrap();
    fs::remove_file(&out).unwrap();
    let argv = manifest.to_argv();
    assert_eq!(run(&argv.iter().map(String::as_str).collect::<Vec<_>>()), 0);
    assert_eq!(fs::read_to_string(&out).unwrap(), first);
}

#[test]
fn replica_scan_rows_are_sorted() {
    let dir = tempfile::tempdir().unwrap();
    let out = path_str(dir.path(), "scan.csv");
    let code = run(&[
        "potts-anneal",
        "replica",
        "--J",
        "1",
        "--J0",
        "0",
        "--betas",
        "2",
        "0.5",
        "--gammas",
        "0",
        "0.5",
        "--out",
        &out,
    ]);
    assert_eq!(code, 0);
    let csv = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "beta,gamma,J0,m,xi,eta,converged,iterations");
    assert_eq!(lines.len(), 5);
    // beta-major ascending order
    let betas: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').next().unwrap().parse::<f64>().unwrap())
        .collect();
    assert_eq!(betas, vec![0.5, 0.5, 2.0, 2.0]);
}

#[test]
fn iterate_with_injected_answers() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_ferromagnet(dir.path(), 4, 2);
    let prefix = path_str(dir.path(), "enc");
    assert_eq!(
        run(&[
            "potts-anneal",
            "encode",
            "--instance",
            instance.to_str().unwrap(),
            "--encoding",
            "half_hot",
            "--out",
            &prefix,
        ]),
        0
    );
    // solve the exported round-1 QUBO exhaustively, as an external
    // Ising machine would, and hand the answer back
    let qubo = import_qubo(Path::new(&format!("{prefix}.qubo.json"))).unwrap();
    let (best, _) = qubo.exhaustive_minimum();
    let answers = dir.path().join("answers");
    fs::create_dir(&answers).unwrap();
    write_answer(
        &answers.join("round_1.answer.json"),
        &AnswerFile::from_binary_config(&best),
    )
    .unwrap();
    let out_prefix = path_str(dir.path(), "iter");
    let dumps = path_str(dir.path(), "rounds");
    let code = run(&[
        "potts-anneal",
        "iterate",
        "--instance",
        instance.to_str().unwrap(),
        "--lambda",
        "1",
        "--answers",
        answers.to_str().unwrap(),
        "--dump-rounds",
        &dumps,
        "--out",
        &out_prefix,
    ]);
    assert_eq!(code, 0);
    let body: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(format!("{out_prefix}.json")).unwrap()).unwrap();
    assert_eq!(body["energy"].as_f64().unwrap(), -6.0);
    assert_eq!(body["rounds"].as_u64().unwrap(), 1);
    assert!(Path::new(&dumps).join("round_1.qubo.json").exists());
    let history: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(format!("{out_prefix}.history.json")).unwrap())
            .unwrap();
    assert_eq!(history.as_array().unwrap().len(), 2);
}

#[test]
fn failed_runs_leave_no_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_ferromagnet(dir.path(), 4, 2);
    let empty = dir.path().join("no-answers");
    fs::create_dir(&empty).unwrap();
    let out_prefix = path_str(dir.path(), "failing");
    let code = run(&[
        "potts-anneal",
        "iterate",
        "--instance",
        instance.to_str().unwrap(),
        "--answers",
        empty.to_str().unwrap(),
        "--out",
        &out_prefix,
    ]);
    assert_eq!(code, 1);
    assert!(!Path::new(&format!("{out_prefix}.json")).exists());
    assert!(!Path::new(&format!("{out_prefix}.history.json")).exists());
    assert!(!Path::new(&format!("{out_prefix}.manifest.json")).exists());
}
