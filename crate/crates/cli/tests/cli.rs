use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn ranlat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ranlat"))
        .args(args)
        .env_remove("RANLAT_WORKERS")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn e1_with(dir: &Path, from: &str, to: &str) -> PathBuf {
    let text = std::fs::read_to_string(data("e1.yaml")).unwrap();
    assert!(text.contains(from));
    write(dir, "cfg.yaml", &text.replace(from, to))
}

#[test]
fn model_writes_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("summary.csv");
    let cfg = data("e1.yaml");
    let o = ranlat(&[
        "model",
        "--config",
        cfg.to_str().unwrap(),
        "--traffic",
        "constant:101@64x2000",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("packets  2000"));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("statistic,value\ncount,2000\n"), "{text}");
    // Same flags, same output.
    assert_eq!(stdout(&ranlat(&["model", "--config", cfg.to_str().unwrap(), "--traffic", "constant:101@64x2000"])), stdout(&o));
}

#[test]
fn model_modes_and_trace_input() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = data("e1.yaml");
    let trace = write(dir.path(), "t.csv", "arrival_ms,size_bytes\n0.3,64\n10.1,5000\n20.7,64\n");
    for mode in ["ul", "dl", "grant-free", "fdd"] {
        let o = ranlat(&["model", "--config", cfg.to_str().unwrap(), "--trace", trace.to_str().unwrap(), "--mode", mode]);
        assert_eq!(code(&o), 0, "{mode}: {}", stderr(&o));
        assert!(stdout(&o).contains("packets  3"), "{mode}");
    }
    let o = ranlat(&["model", "--config", cfg.to_str().unwrap(), "--mode", "mini-slot"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = e1_with(dir.path(), "pdcch_symbols: 1", "pdcch_symbols: 5");
    assert_eq!(code(&ranlat(&["model", "--config", cfg.to_str().unwrap()])), 2);
    let cfg = write(dir.path(), "junk.yaml", "system: [1, 2]\n");
    assert_eq!(code(&ranlat(&["model", "--config", cfg.to_str().unwrap()])), 2);
    let o = ranlat(&["model", "--config", "/nonexistent/cfg.yaml"]);
    assert_eq!(code(&o), 2);
    let o = ranlat(&["model", "--config", data("e1.yaml").to_str().unwrap(), "--trace", "/nonexistent.csv"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn unreachable_sr_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(data("e1.yaml"))
        .unwrap()
        .replace("total_slots: 5, dl_slots: 3", "total_slots: 2, dl_slots: 1")
        .replace("sr_period: 1", "sr_period: 2");
    let cfg = write(dir.path(), "cfg.yaml", &text);
    let o = ranlat(&["model", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("unreachable-SR"), "{}", stderr(&o));
}

#[test]
fn optimize_is_worker_invariant() {
    let space = data("small_space.yaml");
    let run = |w: &str| {
        ranlat(&[
            "optimize",
            "--space",
            space.to_str().unwrap(),
            "--workers",
            w,
            "--coarse-packets",
            "50",
            "--fine-packets",
            "500",
        ])
    };
    let a = run("1");
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert!(stdout(&a).contains("best slot_duration=0.5"), "{}", stdout(&a));
    assert_eq!(stdout(&a), stdout(&run("2")));
}

#[test]
fn find_all_table_and_empty_result() {
    let dir = tempfile::tempdir().unwrap();
    let space = data("small_space.yaml");
    let out = dir.path().join("matches.csv");
    let o = ranlat(&[
        "find-all",
        "--space",
        space.to_str().unwrap(),
        "--target",
        "100ms@99",
        "--packets",
        "200",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("slot_duration,dl_ul_tx_period,nof_dl_slots,k2,sr_period,sr_offset,pucch_st_sym,pucch_nof_sym,pdcch_nof_sym,in_advance_submission,achieved_ms")
    );
    assert!(lines.count() > 100);
    let o = ranlat(&["find-all", "--space", space.to_str().unwrap(), "--target", "0.1ms@99.99", "--packets", "200"]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).starts_with("0 of "));
    assert_eq!(code(&ranlat(&["find-all", "--target", "1ms@101"])), 2);
}

#[test]
fn fit_recovers_a_planted_ue_distribution() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = e1_with(
        dir.path(),
        "  link: {bandwidth_mhz: 20, mcs_index: 20}\n",
        "  link: {bandwidth_mhz: 20, mcs_index: 20}\nprofile:\n  l1: {kind: gaussian, mean: 1.5, std: 0.2}\n  l2: {kind: constant, value: 0.3}\n  l2_prime: {kind: constant, value: 0.3}\n  l3: {kind: constant, value: 0.3}\n  p1: {kind: constant, value: 0.1}\n  p2: {kind: constant, value: 0.1}\n  p3: {kind: constant, value: 0.01}\n  p4: {kind: lognormal, shape: 0.4, loc: 0.27, scale: 0.13}\n  p5: {kind: constant, value: 0.1}\n  r1: {kind: constant, value: 0.5}\n",
    );
    let samples = dir.path().join("samples.csv");
    let o = ranlat(&[
        "model",
        "--config",
        cfg.to_str().unwrap(),
        "--traffic",
        "constant:0.731@64x2000",
        "--seed",
        "77",
        "--format",
        "samples-table",
        "--out",
        samples.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let observed: String = std::fs::read_to_string(&samples)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| format!("{}\n", l.split(',').nth(1).unwrap()))
        .collect();
    let observed = write(dir.path(), "observed.txt", &observed);
    let o = ranlat(&[
        "fit",
        "--config",
        data("e1.yaml").to_str().unwrap(),
        "--observed",
        observed.to_str().unwrap(),
        "--grid",
        "1.0:2.0:0.1,0.1:0.4:0.05",
        "--traffic",
        "constant:0.731@64x2000",
        "--seed",
        "78",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    let get = |k: &str| -> f64 {
        text.lines().find_map(|l| l.strip_prefix(&format!("{k} "))).unwrap().parse().unwrap()
    };
    assert!((get("mean") - 1.5).abs() <= 0.1 + 1e-9, "{text}");
    assert!((get("std") - 0.2).abs() <= 0.05 + 1e-9, "{text}");
    assert!(get("wasserstein") < 0.01, "{text}");
    let o = ranlat(&["fit", "--config", data("e1.yaml").to_str().unwrap(), "--observed", "/nonexistent"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn oracle_check_passes() {
    let o = ranlat(&["oracle-check", "--configs", "1000", "--seed", "3"]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("0 mismatches"));
}
