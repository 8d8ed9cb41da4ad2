use std::fs;
use std::process::Command;

use scma_v2x::output::read_sweep_csv;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_scma-v2x"))
}

const CONFIG: &str = "\
[scenario]
num_cues = 30

[experiment]
sweep_variable = \"vues\"
sweep_values = [0, 4, 8]
drops_per_point = 6
master_seed = 11
";

#[test]
fn sweep_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, CONFIG).unwrap();
    let mut outputs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = dir.path().join(name);
        let status = bin()
            .args(["sweep", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let rows = read_sweep_csv(outputs[0].as_slice()).unwrap();
    assert_eq!(rows.iter().map(|r| r.sweep_value).collect::<Vec<_>>(), [0, 4, 8]);
    assert_eq!(rows[0].mean_vue_bps, 0.0);
}

#[test]
fn flags_override_config() {
    let out = bin()
        .args(["sweep", "--scheme", "ofdma", "--sweep", "cues", "--values", "120", "--drops", "3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let rows = read_sweep_csv(out.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].mean_admitted_cues, 100.0);
}

#[test]
fn bad_input_exits_nonzero_with_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[scenario]\nnum_cues = -3\n").unwrap();
    let cases: Vec<Vec<std::ffi::OsString>> = vec![
        vec!["sweep".into(), "--config".into(), cfg.clone().into()],
        vec!["sweep".into(), "--config".into(), dir.path().join("missing.toml").into()],
        vec!["sweep".into(), "--values".into(), "10,5".into()],
        vec!["sweep".into(), "--drops".into(), "0".into()],
    ];
    for args in cases {
        let out = bin().args(&args).output().unwrap();
        assert!(!out.status.success(), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.trim_end().lines().count(), 1, "{err}");
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn drop_writes_audit_and_graph() {
    let dir = tempfile::tempdir().unwrap();
    let audit = dir.path().join("audit.csv");
    let graph = dir.path().join("graph.txt");
    let status = bin()
        .args(["drop", "--cues", "8", "--vues", "5", "--seed", "42", "--out"])
        .arg(&audit)
        .arg("--graph-out")
        .arg(&graph)
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&audit).unwrap();
    assert_eq!(text.lines().count(), 1 + 8 + 5);
    let g = scma_v2x::clustering::InterferenceGraph::from_edge_list(&fs::read_to_string(&graph).unwrap())
        .unwrap();
    assert_eq!(g.num_nodes(), 5);
}

#[test]
fn oracle_subcommand_reports() {
    let out = bin().args(["oracle", "--instances", "50"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("50 instances"), "{text}");
}
