use apfsim::config::ScenarioConfig;
use apfsim::metrics::{COMPARISON_COLUMNS, METRICS_COLUMNS, THD_COLUMNS};
use apfsim::plant::TRACE_COLUMNS;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn apfsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apfsim")).args(args).output().unwrap()
}

fn header(path: &Path) -> Vec<String> {
    let text = fs::read_to_string(path).unwrap();
    text.lines().next().unwrap().split(',').map(String::from).collect()
}

fn short_config(dir: &Path) -> String {
    let path = dir.join("short.json");
    fs::write(&path, r#"{"duration": 0.12, "converter": {"apf_on_time": 0.04}}"#).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn dump_config_round_trips() {
    let out = apfsim(&["simulate", "--dump-config", "--seed", "7"]);
    assert!(out.status.success());
    let cfg = ScenarioConfig::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(cfg.seed, 7);
    assert_eq!(cfg.to_json(), ScenarioConfig { seed: 7, ..ScenarioConfig::default() }.to_json());
}

#[test]
fn bundled_scenario_is_the_default() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/default.json");
    let cfg = ScenarioConfig::from_path(Path::new(path)).unwrap();
    assert_eq!(cfg.to_json(), ScenarioConfig::default().to_json());
}

#[test]
fn malformed_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"duration": -1.0}"#).unwrap();
    let out = apfsim(&["simulate", "--config", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("duration"));

    fs::write(&bad, r#"{"converter": {"vdc": "high"}}"#).unwrap();
    let out = apfsim(&["compare", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("converter.vdc"));

    fs::write(&bad, r#"{"sourse": {}}"#).unwrap();
    assert_eq!(apfsim(&["simulate", "--config", bad.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn simulate_writes_outputs_with_stable_headers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path());
    let out_dir = dir.path().join("run");
    let out = apfsim(&["simulate", "--config", &cfg, "--out", out_dir.to_str().unwrap(), "--plots"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(header(&out_dir.join("trace.csv")), TRACE_COLUMNS);
    assert_eq!(header(&out_dir.join("metrics.csv")), METRICS_COLUMNS);
    assert_eq!(header(&out_dir.join("thd.csv")), THD_COLUMNS);
    assert!(out_dir.join("summary.txt").exists());
    assert!(out_dir.join("config.json").exists());
    let rows = fs::read_to_string(out_dir.join("trace.csv")).unwrap().lines().count();
    assert_eq!(rows, 1 + 6000);
    let svgs = fs::read_dir(&out_dir)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "svg"))
        .count();
    assert!(svgs >= 2);
}

#[test]
fn compare_writes_both_traces_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path());
    let out_dir = dir.path().join("cmp");
    let out = apfsim(&["compare", "--config", &cfg, "--out", out_dir.to_str().unwrap(), "--plots"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["emd_hybrid", "plain_modified_pq"] {
        assert_eq!(header(&out_dir.join(format!("trace_{name}.csv"))), TRACE_COLUMNS);
        assert!(out_dir.join(format!("metrics_{name}.csv")).exists());
        assert!(out_dir.join(format!("pq_{name}.svg")).exists());
    }
    assert_eq!(header(&out_dir.join("comparison.csv")), COMPARISON_COLUMNS);
    assert!(out_dir.join("pf.svg").exists());
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.contains("emd_hybrid") && table.contains("plain_modified_pq"));
}

#[test]
fn emd_on_two_tones() {
    let dir = tempfile::tempdir().unwrap();
    let input = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/two_tone.csv");
    let out = dir.path().join("imfs.csv");
    let res = apfsim(&["emd", "--input", input, "--sample-rate", "10000", "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let h = header(&out);
    assert!(h.len() >= 3);
    assert_eq!(h[0], "IMF1");
    assert_eq!(h.last().unwrap(), "residue");
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 1001);
}

#[test]
fn emd_on_constant_gives_residue_only() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("flat.csv");
    fs::write(&input, "2.5\n".repeat(200)).unwrap();
    let out = dir.path().join("imfs.csv");
    let res = apfsim(&["emd", "--input", input.to_str().unwrap(), "--sample-rate", "1000", "--out", out.to_str().unwrap()]);
    assert!(res.status.success());
    assert_eq!(header(&out), ["residue"]);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.lines().skip(1).all(|l| l.parse::<f64>().unwrap() == 2.5));
}

#[test]
fn emd_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("imfs.csv");
    let run = |input: &Path| {
        apfsim(&["emd", "--input", input.to_str().unwrap(), "--sample-rate", "1000", "--out", out.to_str().unwrap()])
    };
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    assert_eq!(run(&empty).status.code(), Some(1));

    let two = dir.path().join("two.csv");
    fs::write(&two, "a,b\n1,2\n").unwrap();
    assert_eq!(run(&two).status.code(), Some(1));

    let junk = dir.path().join("junk.csv");
    fs::write(&junk, "x\n1.0\nabc\n").unwrap();
    let res = run(&junk);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("line 3"));

    assert_eq!(run(&dir.path().join("missing.csv")).status.code(), Some(1));
}
