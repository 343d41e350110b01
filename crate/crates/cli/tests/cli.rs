use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ctxkernel"))
}

fn run(args: &[&str], cwd: &Path) -> Output {
    bin()
        .args(args)
        .current_dir(cwd)
        .env_remove("CTXKERNEL_OUT_ROOT")
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write_plan(dir: &Path, name: &str, plan: &Value) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(plan).unwrap()).unwrap();
    path.display().to_string()
}

fn small_a6_plan() -> Value {
    json!({
        "schema": "ctxkernel.plan/v1",
        "experiment": "A6",
        "lanes": 8,
        "shots": 200,
        "thetas": [0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI],
        "families": ["ACTIVE", "PASSIVE1", "PASSIVE2", "CTXONLY"],
        "seed": 11,
        "noise_table": {
            "profiles": { "ro": { "readout": [[[0.99, 0.01], [0.01, 0.99]]] } },
            "lane_profiles": ["ro"]
        },
        "analysis": { "n_shuffles": 200, "n_resamples": 200 }
    })
}

#[test]
fn runs_are_deterministic_and_reanalysis_reproduces_analysis() {
    let tmp = tempfile::tempdir().unwrap();
    let plan = write_plan(tmp.path(), "plan.json", &small_a6_plan());
    for out in ["r1", "r2"] {
        let o = run(&["run-a6", "--plan", &plan, "--out", out], tmp.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a1 = std::fs::read(tmp.path().join("r1/analysis.json")).unwrap();
    let a2 = std::fs::read(tmp.path().join("r2/analysis.json")).unwrap();
    assert_eq!(
        a1, a2,
        "same plan and seed must give byte-identical analysis"
    );
    assert_eq!(
        std::fs::read(
            tmp.path()
                .join("r1/counts/L03-R1-ACTIVE-XX-th1.570796.json")
        )
        .unwrap(),
        std::fs::read(
            tmp.path()
                .join("r2/counts/L03-R1-ACTIVE-XX-th1.570796.json")
        )
        .unwrap()
    );

    let o = run(&["analyze", "r1", "--out", "again"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        std::fs::read(tmp.path().join("again/analysis.json")).unwrap(),
        a1
    );

    let manifest = read_json(&tmp.path().join("r1/manifest.json"));
    assert_eq!(manifest["schema"], "ctxkernel.manifest/v1");
    assert_eq!(manifest["experiment"], "A6");
    assert_eq!(manifest["plan_hash"].as_str().unwrap().len(), 64);
    assert_eq!(
        manifest["circuits"].as_array().unwrap().len(),
        8 * 2 * (3 + 3)
    );
    for f in [
        "kernel_report.json",
        "witnesses.csv",
        "information.csv",
        "records_active_reference.csv",
        "delta_e.svg",
    ] {
        assert!(tmp.path().join("r1").join(f).is_file(), "missing {f}");
    }
    let kernel = read_json(&tmp.path().join("r1/kernel_report.json"));
    for key in [
        "gamma_loc",
        "gamma_proxy",
        "gamma_rel_by_class",
        "D",
        "fit",
        "dc_verdict",
        "screens",
    ] {
        assert!(kernel.get(key).is_some(), "kernel report lacks {key}");
    }
    assert_eq!(kernel["dc_verdict"]["holds"], true);
}

#[test]
fn tampered_plan_is_detected_by_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let mut plan = small_a6_plan();
    plan["families"] = json!(["PASSIVE1"]);
    plan["thetas"] = json!([]);
    let path = write_plan(tmp.path(), "plan.json", &plan);
    assert!(run(&["run-a6", "--plan", &path, "--out", "r"], tmp.path())
        .status
        .success());
    plan["seed"] = json!(12);
    write_plan(&tmp.path().join("r"), "plan.json", &plan);
    let o = run(&["analyze", "r"], tmp.path());
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("plan hash"));
}

#[test]
fn empty_directory_has_no_records() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::create_dir(tmp.path().join("empty")).unwrap();
    let o = run(&["analyze", "empty"], tmp.path());
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no records found"));
    let o = run(&["analyze", "does-not-exist"], tmp.path());
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn invalid_plans_exit_with_code_2() {
    let tmp = tempfile::tempdir().unwrap();
    let mut unknown = small_a6_plan();
    unknown["lanse"] = json!(8);
    let path = write_plan(tmp.path(), "unknown.json", &unknown);
    let o = run(&["run-a6", "--plan", &path], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("lanse") && err.contains("unknown.json:"),
        "{err}"
    );

    let bad = tmp.path().join("broken.json");
    std::fs::write(&bad, "{\n  \"experiment\": \"A6\",\n  \"lanes\": 8,,\n}").unwrap();
    let o = run(&["run-a6", "--plan", bad.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("broken.json:3:"));

    let mut zero = small_a6_plan();
    zero["lanes"] = json!(0);
    let path = write_plan(tmp.path(), "zero.json", &zero);
    assert_eq!(
        run(&["run-a6", "--plan", &path], tmp.path()).status.code(),
        Some(2)
    );

    // an A6 plan handed to the eraser command
    let path = write_plan(tmp.path(), "a6.json", &small_a6_plan());
    assert_eq!(
        run(&["run-a62", "--plan", &path], tmp.path()).status.code(),
        Some(2)
    );
    assert!(!tmp.path().join("runs").exists());
}

#[test]
fn exact_noiseless_half_pi_contrast_is_one() {
    let tmp = tempfile::tempdir().unwrap();
    let plan = json!({
        "experiment": "A6",
        "lanes": 8,
        "shots": 1,
        "thetas": [std::f64::consts::FRAC_PI_2],
        "families": ["ACTIVE", "PASSIVE1", "PASSIVE2"]
    });
    let path = write_plan(tmp.path(), "plan.json", &plan);
    let o = run(
        &["run-a6", "--plan", &path, "--exact", "--out", "x"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let a = read_json(&tmp.path().join("x/analysis.json"));
    assert_eq!(a["mode"], "exact");
    let active = a["witnesses"]
        .as_array()
        .unwrap()
        .iter()
        .find(|w| w["family"] == "ACTIVE")
        .unwrap();
    assert!((active["witness"]["delta_e"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    for w in a["witnesses"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|w| w["family"] != "ACTIVE")
    {
        assert_eq!(w["witness"]["delta_e"].as_f64().unwrap(), 0.0);
    }
}

/// Per-circuit counts reproducing a reference table of witness values at
/// N = 6144 on a single lane: E = 1 − (n_A1 + n_B1)/N.
fn flip_counts(flips: u64, context: &str, shots: u64) -> Value {
    let both = flips.saturating_sub(shots);
    let single = flips - 2 * both;
    let mut counts = serde_json::Map::new();
    let mut put = |ab: &str, n: u64| {
        if n > 0 {
            counts.insert(format!("{ab}{context}"), json!(n));
        }
    };
    put("00", shots - single - both);
    put("10", single);
    put("11", both);
    json!({ "bit_order": ["A", "B", "C0", "C1", "C2"], "counts": counts, "total_shots": shots })
}

#[test]
fn ingested_reference_table_fits_the_cosine_law() {
    use std::f64::consts::PI;
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("ingest");
    std::fs::create_dir_all(dir.join("counts")).unwrap();
    let shots = 6144u64;
    let thetas = [0.0, PI / 4.0, PI / 2.0, PI];
    let plan = json!({
        "experiment": "A6",
        "lanes": 1,
        "shots": shots,
        "thetas": thetas,
        "families": ["ACTIVE", "PASSIVE1", "PASSIVE2"],
        "analysis": { "n_shuffles": 100, "n_resamples": 100 }
    });
    write_plan(&dir, "plan.json", &plan);
    // (name suffix, even flips, odd flips)
    let rows = [
        ("ACTIVE-XX-th0.000000", 28, 28),
        ("ACTIVE-XX-th0.785398", 222, 1827),
        ("ACTIVE-XX-th1.570796", 354, 5946),
        ("ACTIVE-XX-th3.141593", 480, 11458),
        ("PASSIVE1-XX", 26, 17),
        ("PASSIVE2-XX", 20, 18),
    ];
    for (suffix, even, odd) in rows {
        for (rep, flips, ctx) in [("R0", even, "000"), ("R1", odd, "001")] {
            let path = dir.join(format!("counts/L00-{rep}-{suffix}.json"));
            std::fs::write(path, flip_counts(flips, ctx, shots).to_string()).unwrap();
        }
    }
    let o = run(&["analyze", "ingest"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let a = read_json(&dir.join("analysis.json"));
    let active: Vec<&Value> = a["witnesses"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|w| w["family"] == "ACTIVE")
        .collect();
    let delta = |i: usize| active[i]["witness"]["delta_e"].as_f64().unwrap();
    assert!(delta(0).abs() < 1e-12);
    assert!((delta(1) - 0.261230).abs() < 1e-6);
    assert!((delta(2) - 0.910156).abs() < 1e-6);
    assert!((delta(3) - 1.786784).abs() < 1e-6);
    let passive1 = a["witnesses"]
        .as_array()
        .unwrap()
        .iter()
        .find(|w| w["family"] == "PASSIVE1")
        .unwrap();
    assert!((passive1["witness"]["delta_e"].as_f64().unwrap() + 0.00146484).abs() < 1e-6);

    let kernel = read_json(&dir.join("kernel_report.json"));
    let r2 = kernel["fit"]["r2"].as_f64().unwrap();
    let slope = kernel["fit"]["a"].as_f64().unwrap();
    assert!(r2 >= 0.999, "R² = {r2}");
    assert!((0.85..=0.95).contains(&slope), "a = {slope}");
}

#[test]
fn eraser_sweep_writes_reports_and_figure() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["run-a62", "--out", "e"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&tmp.path().join("e/eraser_report.json"));
    assert_eq!(report["records"].as_array().unwrap().len(), 9);
    assert_eq!(report["all_bounds_ok"], true);
    let svg = std::fs::read_to_string(tmp.path().join("e/eraser.svg")).unwrap();
    assert_eq!(svg.matches("<rect x=").count(), 4, "four panels");
    assert!(tmp.path().join("e/eraser.csv").is_file());
    assert_eq!(
        std::fs::read(tmp.path().join("e/analysis.json")).unwrap(),
        std::fs::read(tmp.path().join("e/eraser_report.json")).unwrap()
    );
}

#[test]
fn default_output_root_comes_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let plan = json!({ "experiment": "A6", "lanes": 1, "shots": 20, "families": ["CTXONLY"] });
    let path = write_plan(tmp.path(), "plan.json", &plan);
    let o = bin()
        .args(["run-a6", "--plan", &path, "--seed", "5"])
        .current_dir(tmp.path())
        .env("CTXKERNEL_OUT_ROOT", tmp.path().join("elsewhere"))
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dirs: Vec<_> = std::fs::read_dir(tmp.path().join("elsewhere"))
        .unwrap()
        .collect();
    assert_eq!(dirs.len(), 1);
    let name = dirs[0].as_ref().unwrap().file_name().into_string().unwrap();
    assert!(name.starts_with("a6-seed5-sampled-"), "{name}");
}

#[test]
fn example_plans_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    for exp in ["a6", "a62"] {
        let o = run(&["example-plan", exp], tmp.path());
        assert!(o.status.success());
        let path = tmp.path().join(format!("{exp}.json"));
        std::fs::write(&path, &o.stdout).unwrap();
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["schema"], "ctxkernel.plan/v1");
    }
}
