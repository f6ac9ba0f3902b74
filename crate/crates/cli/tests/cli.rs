//! End-to-end runs of the `cc-bif` binary.

use std::path::Path;
use std::process::{Command, Output};

fn cc_bif(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cc-bif"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("CC_BIF_THREADS", t),
        None => cmd.env_remove("CC_BIF_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

#[test]
fn verify_built_in_points() {
    let o = cc_bif(
        &["verify", "--family", "two-squares", "--param", "0.2020"],
        None,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["pass"], true);
    assert_eq!(v["config"]["command"], "verify");

    let o = cc_bif(
        &["verify", "--family", "rosette", "--param", "1.0,1.0"],
        None,
    );
    assert_eq!(code(&o), 0);
    let m2 = stdout_json(&o)["points"][0]["m2"].as_f64().unwrap();
    assert!((m2 - 1.4703820236919394).abs() < 1e-12, "{m2}");
}

#[test]
fn verify_rejects_perturbed_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let info = cc_bif(
        &["family-info", "--family", "two-squares", "--param", "0.25"],
        None,
    );
    assert_eq!(code(&info), 0);
    let point = &stdout_json(&info)["points"][0];
    let mut q: Vec<f64> = serde_json::from_value(point["configuration"].clone()).unwrap();
    let m = point["masses"].clone();

    let good = dir.path().join("good.json");
    let body = serde_json::json!({"configuration": q, "masses": m});
    std::fs::write(&good, body.to_string()).unwrap();
    let o = cc_bif(&["verify", "--file", good.to_str().unwrap()], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    q[0] += 1e-3;
    let bad = dir.path().join("perturbed.json");
    let body = serde_json::json!({"configuration": q, "masses": m});
    std::fs::write(&bad, body.to_string()).unwrap();
    let o = cc_bif(&["verify", "--file", bad.to_str().unwrap()], None);
    assert_eq!(code(&o), 3);
    let v = stdout_json(&o);
    assert_eq!(v["pass"], false);
    assert!(v["points"][0]["residual"].as_f64().unwrap() > 1e-6);

    // spectrum refuses a non-critical input
    let o = cc_bif(&["spectrum", "--file", bad.to_str().unwrap()], None);
    assert_eq!(code(&o), 2);
}

#[test]
fn spectrum_reproduces_morse_indices() {
    for (param, morse) in [("sqrt2/7", 1), ("sqrt2/6", 3), ("sqrt2/5", 4)] {
        let o = cc_bif(
            &["spectrum", "--family", "two-squares", "--param", param],
            None,
        );
        assert_eq!(code(&o), 0);
        let p = &stdout_json(&o)["points"][0];
        assert_eq!(p["kernel_dim"], 1);
        assert_eq!(p["morse_index_full"], morse);
        let tau = p["full"]["zero_tolerance_used"].as_f64().unwrap();
        let below = p["full"]["eigenvalues"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|e| e.as_f64().unwrap().abs() < tau)
            .count();
        assert_eq!(below, 1);
    }
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["scan", "--family", "two-squares", "--range", "0.3:0.3"][..],
        &["scan", "--family", "two-squares", "--range", "0.2"][..],
        &["verify", "--family", "two-squares"][..],
        &["verify", "--family", "two-squares", "--param", "sqrt3"][..],
        &["verify", "--family", "two-squares", "--param", "0.5"][..],
        &["map", "--grid", "1x4"][..],
        &["map", "--range", "-1:2"][..],
        &["spectrum", "--family", "rosette", "--param", "1"][..],
        &["frobnicate"][..],
    ] {
        let o = cc_bif(args, None);
        assert_eq!(code(&o), 2, "{args:?}");
    }
    let o = cc_bif(
        &["verify", "--family", "two-squares", "--param", "0.2"],
        Some("zero"),
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn scan_two_squares_finds_local_and_global() {
    let o = cc_bif(
        &["scan", "--family", "two-squares", "--range", "0.20:0.29"],
        None,
    );
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    let events = v["events"].as_array().unwrap();
    let kinds: Vec<_> = events
        .iter()
        .map(|e| e["classification"].as_str().unwrap())
        .collect();
    assert_eq!(kinds, ["local", "global"]);
    assert_eq!(v["config"]["steps"], 512);
}

#[test]
fn rosette_slice_at_unit_m0_has_four_events() {
    let o = cc_bif(
        &[
            "scan", "--family", "rosette", "--param", "1", "--range", "0.1:10",
        ],
        None,
    );
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    let events = v["events"].as_array().unwrap();
    assert_eq!(events.len(), 4);
    let globals = events
        .iter()
        .filter(|e| e["classification"] == "global")
        .count();
    assert_eq!(globals, 1);
}

#[test]
fn strict_mode_exits_4_on_coarse_grid() {
    let args = [
        "scan", "--family", "rosette", "--param", "1", "--range", "0.1:10", "--steps", "2",
    ];
    let o = cc_bif(&args, None);
    assert_eq!(code(&o), 0);
    assert!(!stdout_json(&o)["warnings"].as_array().unwrap().is_empty());
    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(code(&cc_bif(&strict, None)), 4);
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

#[test]
fn outputs_are_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut runs = Vec::new();
    for threads in ["1", "4", "4"] {
        // identical configs, so identical paths
        let sub = dir.path().join("run");
        std::fs::create_dir_all(&sub).unwrap();
        let ev = sub.join("events.json");
        let dump = sub.join("family.csv");
        let map = sub.join("map.csv");
        let o = cc_bif(
            &[
                "scan",
                "--family",
                "two-squares",
                "--steps",
                "128",
                "--out",
                ev.to_str().unwrap(),
                "--dump",
                dump.to_str().unwrap(),
            ],
            Some(threads),
        );
        assert_eq!(code(&o), 0);
        let o = cc_bif(
            &["map", "--grid", "16x16", "--out", map.to_str().unwrap()],
            Some(threads),
        );
        assert_eq!(code(&o), 0);
        let files = [
            read(&ev),
            read(&dump),
            read(&sub.join("family.csv.spectra.csv")),
            read(&map),
            read(&sub.join("map.csv.regions.json")),
        ];
        std::fs::remove_dir_all(&sub).unwrap();
        runs.push(files);
    }
    assert!(runs[0] == runs[1] && runs[1] == runs[2]);
    let map_text = String::from_utf8(runs[0][3].clone()).unwrap();
    assert!(map_text.starts_with("# config: {\"command\":\"map\""));
    assert!(map_text
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("m0,m1,morse_index"));
}

#[test]
fn dumped_family_rescans_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("family.csv");
    let o = cc_bif(
        &[
            "scan",
            "--family",
            "two-squares",
            "--steps",
            "64",
            "--dump",
            dump.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(code(&o), 0);
    let o = cc_bif(
        &["scan", "--family", "csv", "--file", dump.to_str().unwrap()],
        None,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["events"].as_array().unwrap().len(), 2);
    let o = cc_bif(
        &[
            "verify",
            "--family",
            "csv",
            "--file",
            dump.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(code(&o), 0);
}

#[test]
fn map_json_summary_lists_index_set() {
    let o = cc_bif(&["map", "--grid", "24x24", "--format", "json"], None);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    let set: Vec<u64> = serde_json::from_value(v["index_set"].clone()).unwrap();
    assert_eq!(set, [0, 2, 3, 5]);
}

#[test]
fn family_info_two_squares_reports_r0() {
    let o = cc_bif(
        &[
            "family-info",
            "--family",
            "two-squares",
            "--param",
            "sqrt2/6",
        ],
        None,
    );
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert!((v["r0"].as_f64().unwrap() - 0.37602).abs() < 5e-5);
    let p = &v["points"][0];
    assert_eq!(p["configuration"].as_array().unwrap().len(), 16);
    assert!(p["lambda"].as_f64().unwrap() > 0.0);
}
