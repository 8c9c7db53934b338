//! End-to-end tests of the batch front-end contract.

use std::path::Path;
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_dyadic-lasso")
}

fn run_ok(cfg: &str, out: &Path) {
    let tmp_cfg = out.with_extension("cfg");
    std::fs::write(&tmp_cfg, cfg).unwrap();
    let output = Command::new(bin())
        .args(["run", tmp_cfg.to_str().unwrap(), out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn rates_header_is_pinned() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    run_ok(
        "experiment.name = rates\n\
         experiment.eps_grid = 0.25, 0.125\n\
         experiment.n_rep = 10\n\
         experiment.seed = 1\n\
         target.length = 64\n",
        &out,
    );
    let csv = std::fs::read_to_string(out.join("rates.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "eps,risk_mean,risk_stderr,p_hat_median,slope,slope_stderr"
    );
}

#[test]
fn invalid_q_exits_with_code_2_naming_the_constraint() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    std::fs::write(
        &cfg,
        "experiment.name = rates\nexperiment.eps_grid = 0.25, 0.125\ntarget.q = 2.5\n",
    )
    .unwrap();
    let output = Command::new(bin())
        .args([
            "run",
            cfg.to_str().unwrap(),
            tmp.path().join("o").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("(1, 2)"), "stderr: {stderr}");
}

#[test]
fn unknown_experiment_exits_with_code_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    std::fs::write(&cfg, "experiment.name = frobnicate\n").unwrap();
    let output = Command::new(bin())
        .args([
            "run",
            cfg.to_str().unwrap(),
            tmp.path().join("o").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&output.stderr).contains("frobnicate"));
}

#[test]
fn missing_config_exits_with_code_1() {
    let tmp = tempfile::tempdir().unwrap();
    let output = Command::new(bin())
        .args([
            "run",
            tmp.path().join("absent.cfg").to_str().unwrap(),
            tmp.path().join("o").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn same_config_and_seed_gives_byte_identical_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "experiment.name = select\n\
               experiment.n_rep = 30\n\
               experiment.seed = 9\n\
               model.eps = 0.2\n\
               target.length = 64\n";
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    run_ok(cfg, &out_a);
    run_ok(cfg, &out_b);
    assert_eq!(
        std::fs::read(out_a.join("select.csv")).unwrap(),
        std::fs::read(out_b.join("select.csv")).unwrap()
    );
}

#[test]
fn seed_flag_overrides_config_and_lands_in_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = tmp.path().join("run.cfg");
    std::fs::write(
        &cfg_path,
        "experiment.name = fit\n\
         experiment.n_rep = 10\n\
         experiment.seed = 1\n\
         model.eps = 0.2\n\
         target.length = 32\n",
    )
    .unwrap();
    let out = tmp.path().join("o");
    let status = Command::new(bin())
        .args(["run", cfg_path.to_str().unwrap(), out.to_str().unwrap()])
        .args(["--seed", "77"])
        .status()
        .unwrap();
    assert!(status.success());
    let manifest = std::fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"seed\": 77"));
    assert!(manifest.contains("\"experiment.seed\": \"77\""));
}

#[test]
fn list_experiments_is_stable_and_names_theorems() {
    let a = Command::new(bin())
        .arg("list-experiments")
        .output()
        .unwrap();
    let b = Command::new(bin())
        .arg("list-experiments")
        .output()
        .unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    for name in [
        "fit",
        "select",
        "oracle-ratio",
        "selected-oracle",
        "rates",
        "delta-m",
        "lemma-checks",
        "packing",
        "minimax-hypercube",
    ] {
        assert!(text.contains(name), "missing {name}");
    }
    assert!(text.contains("rates") && text.contains("Proposition 5.6"));
    assert!(text.contains("selected-oracle") && text.contains("Theorem 4.1"));
}

#[test]
fn help_documents_exit_codes() {
    let output = Command::new(bin()).arg("--help").output().unwrap();
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("Exit codes"));
    for code in ["0", "1", "2", "3", "4"] {
        assert!(text.contains(code));
    }
}

#[test]
fn all_experiments_run_from_configs() {
    let tmp = tempfile::tempdir().unwrap();
    let configs: &[(&str, &str, &str)] = &[
        (
            "fit",
            "experiment.name = fit\nexperiment.n_rep = 10\nmodel.eps = 0.2\ntarget.length = 32\n",
            "fit.csv",
        ),
        (
            "oracle-ratio",
            "experiment.name = oracle-ratio\nexperiment.n_rep = 10\nmodel.eps = 0.2\ntarget.length = 32\n",
            "oracle-ratio.csv",
        ),
        (
            "delta-m",
            "experiment.name = delta-m\nexperiment.n_rep = 500\nmodel.eps = 1\ndictionary.p_max = 8\n",
            "delta-m.csv",
        ),
        (
            "lemma-checks",
            "experiment.name = lemma-checks\nexperiment.n_cases = 20\n",
            "lemma-checks.csv",
        ),
        (
            "packing",
            "experiment.name = packing\nmodel.n = 10\nexperiment.t_grid = 0.1, 0.5\n",
            "packing.csv",
        ),
        (
            "minimax-hypercube",
            "experiment.name = minimax-hypercube\nexperiment.n_rep = 20\nexperiment.n_targets = 2\nmodel.eps = 0.02\n",
            "minimax-hypercube.csv",
        ),
        (
            "regression-haar",
            "experiment.name = select\nexperiment.n_rep = 10\nmodel.kind = regression\nmodel.n = 32\nmodel.sigma = 0.5\ndictionary.family = haar\ntarget.length = 32\n",
            "select.csv",
        ),
        (
            "regression-heaviside-nn",
            "experiment.name = oracle-ratio\nexperiment.n_rep = 10\nmodel.kind = regression\nmodel.n = 10\nmodel.sigma = 0.5\ndictionary.family = heaviside\ntarget.kind = step\nsolver.lambda_rule = nn\n",
            "oracle-ratio.csv",
        ),
    ];
    for (label, cfg, file) in configs {
        let out = tmp.path().join(label);
        run_ok(cfg, &out);
        let text = std::fs::read_to_string(out.join(file)).unwrap();
        assert!(text.lines().count() >= 2, "{label}: empty report");
        assert!(out.join("manifest.json").exists());
    }
}
