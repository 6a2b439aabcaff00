use std::path::Path;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_rkhs-mc");

const HARDY: &str = r#"
experiment_id = "hardy-z"
seed = 11
trials = 200
ns = [25, 100]
deltas = [0.5, 1.0]
measure = "disk"
lambda = "preimage"
[kernel]
kind = "szego"
[target]
preset = "monomial_n"
n = 1
"#;

fn write_config(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn rkhs_mc(args: &[&str]) -> std::process::Output {
    Command::new(BIN).args(args).output().unwrap()
}

#[test]
fn identical_runs_give_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "h.toml", HARDY);
    let outs: Vec<Vec<u8>> = ["a.csv", "b.csv"]
        .iter()
        .map(|name| {
            let out = dir.path().join(name);
            let st = rkhs_mc(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
            assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
            std::fs::read(out).unwrap()
        })
        .collect();
    assert_eq!(outs[0], outs[1]);
    let text = String::from_utf8(outs[0].clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "experiment_id,n,delta,trials,freq_mc_exceed,freq_proj_exceed,bound_term_bias,\
         bound_term_variance,bound_total,mean_residual_sq,predicted_mean_residual_sq,binom_stderr,seed"
    );
    assert_eq!(lines.count(), 4);
}

#[test]
fn seed_flag_changes_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "h.toml", HARDY);
    let run = |seed: &str| {
        let st = rkhs_mc(&["run", "--config", cfg.to_str().unwrap(), "--seed", seed]);
        assert!(st.status.success());
        st.stdout
    };
    let (a, b) = (run("1"), run("2"));
    assert_ne!(a, b);
    assert!(String::from_utf8(a).unwrap().contains(",1\n"));
}

#[test]
fn json_report_parses() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "h.toml", HARDY);
    let st = rkhs_mc(&["run", "--config", cfg.to_str().unwrap(), "--format", "json"]);
    assert!(st.status.success());
    let rows: serde_json::Value = serde_json::from_slice(&st.stdout).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for r in rows {
        let n = r["n"].as_f64().unwrap();
        let d = r["delta"].as_f64().unwrap();
        let expect = (5.0 / (n * d * d)).min(1.0);
        assert!((r["bound_total"].as_f64().unwrap() - expect).abs() < 1e-12);
    }
}

#[test]
fn bound_subcommand_prints_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "h.toml", HARDY);
    let st = rkhs_mc(&["bound", "--config", cfg.to_str().unwrap()]);
    assert!(st.status.success());
    let text = String::from_utf8(st.stdout).unwrap();
    assert!(text.starts_with("term_bias,term_variance,total,uncapped,n,delta\n"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn project_reproduces_two_point_example() {
    let dir = tempfile::tempdir().unwrap();
    let text = HARDY.replace("lambda = \"preimage\"", "lambda = \"preimage\"\npoints = [[0.0, 0.0], [0.5, 0.0]]");
    let cfg = write_config(dir.path(), "p.toml", &text);
    let st = rkhs_mc(&["project", "--config", cfg.to_str().unwrap(), "--format", "json"]);
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let rows: serde_json::Value = serde_json::from_slice(&st.stdout).unwrap();
    let w: Vec<f64> = rows.as_array().unwrap().iter().map(|r| r["weight_re"].as_f64().unwrap()).collect();
    assert!((w[0] + 1.5).abs() < 1e-12 && (w[1] - 1.5).abs() < 1e-12);
    assert!((rows[0]["error_sq"].as_f64().unwrap() - 0.25).abs() < 1e-12);
}

#[test]
fn kp_table_at_origin() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "h.toml", HARDY);
    let st = rkhs_mc(&["kp-table", "--config", cfg.to_str().unwrap(), "--format", "json"]);
    assert!(st.status.success());
    let rows: serde_json::Value = serde_json::from_slice(&st.stdout).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 13 * 13);
    assert_eq!(rows[0]["kp_re"].as_f64().unwrap(), 0.5);
}

#[test]
fn prefix_section_writes_curves() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{HARDY}[prefix]\nmax_n = 20\nseeds = 3\n");
    let cfg = write_config(dir.path(), "h.toml", &text);
    let out = dir.path().join("r.csv");
    let st = rkhs_mc(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let curves: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("r.prefix.json")).unwrap()).unwrap();
    assert_eq!(curves["curves"].as_array().unwrap().len(), 3);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.toml", &HARDY.replace("deltas = [0.5, 1.0]", "deltas = [-1.0]"));
    assert_eq!(rkhs_mc(&["run", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    let unknown = write_config(dir.path(), "u.toml", &format!("bogus = 1\n{HARDY}"));
    assert_eq!(rkhs_mc(&["bound", "--config", unknown.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(rkhs_mc(&["run"]).status.code(), Some(2));
    let missing = dir.path().join("nope.toml");
    assert_eq!(rkhs_mc(&["run", "--config", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn combinator_kernels_project_but_have_no_bound() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
measure = "disk"
ns = [3]
deltas = [1.0]
lambda = "zero"
points = [[0.1, 0.0], [0.0, 0.4], [-0.3, -0.2]]
[kernel]
kind = "sum"
left = { kind = "szego" }
right = { kind = "normalize", inner = { kind = "szego" } }
[target]
preset = "section"
point = [0.0, 0.4]
"#;
    let cfg = write_config(dir.path(), "c.toml", text);
    let st = rkhs_mc(&["project", "--config", cfg.to_str().unwrap(), "--format", "json"]);
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let rows: serde_json::Value = serde_json::from_slice(&st.stdout).unwrap();
    assert!(rows[0]["error_sq"].as_f64().unwrap() < 1e-12);
    assert_eq!(rkhs_mc(&["run", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}
