use std::path::Path;
use std::process::{Command, Output};

use molcav::sweep::{CsvTable, SweepSpec};

fn molcav(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_molcav"))
        .args(args)
        .env_remove("MOLCAV_JOBS")
        .output()
        .expect("binary runs")
}

fn example_config() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/example.toml").display().to_string()
}

#[test]
fn example_config_parses() {
    let text = std::fs::read_to_string(example_config()).unwrap();
    let spec = SweepSpec::from_toml_str(&text).unwrap();
    assert_eq!(spec.axes.len(), 2);
    assert_eq!(spec.grid_size(), 21 * 17);
}

#[test]
fn run_writes_csv_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("small.csv");
    let o = molcav(&[
        "run",
        "--config",
        &example_config(),
        "--set",
        "axes.0.count=3",
        "--set",
        "axes.1.count=2",
        "--pairs",
        "a_b2,b1_b2",
        "--out",
        out.to_str().unwrap(),
        "--jobs",
        "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = CsvTable::read(&out).unwrap();
    assert_eq!(t.records.len(), 6);
    assert!(t.column("en_a_b2").is_some());
    assert!(t.column("en_b1_b2").is_some());
    assert!(t.column("en_a_b1").is_none());
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("max E_N[a_b2]"), "{stderr}");
}

#[test]
fn jobs_do_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for jobs in ["1", "3"] {
        let out = dir.path().join(format!("j{jobs}.csv"));
        let o = molcav(&[
            "run",
            "--preset",
            "fig4c",
            "--set",
            "axes.0.count=11",
            "--out",
            out.to_str().unwrap(),
            "--jobs",
            jobs,
        ]);
        assert!(o.status.success());
        files.push(std::fs::read(out).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn json_output_has_metadata() {
    let o = molcav(&["run", "--preset", "fig2", "--set", "axes=[]", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["metadata"]["name"], "fig2");
    assert!(v["metadata"]["timestamp"].as_u64().unwrap() > 0);
    assert_eq!(v["rows"].as_array().unwrap().len(), 1);
}

#[test]
fn config_errors_exit_with_code_two() {
    let cases: &[&[&str]] = &[
        &["run", "--preset", "fig9"],
        &["run", "--preset", "fig2", "--set", "axes.0.count=1"],
        &["run", "--preset", "fig2", "--set", "base.kappa=-1"],
        &["run", "--preset", "fig2", "--set", "base.unknown=1"],
        &["run"],
    ];
    for args in cases {
        let o = molcav(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    }
    let o = molcav(&["run", "--preset", "fig2", "--set", "axes.1.count=0"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("axes.1.count"));
}

#[test]
fn grid_corners_are_validated_before_running() {
    // M exceeds N only at the small end of the molecule axis.
    let o = molcav(&["run", "--preset", "fig3c", "--set", "base.m_split=200", "--set", "axes.1.count=5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("base.m_split"));
}

#[test]
fn show_config_round_trips() {
    let o = molcav(&["show-config", "--preset", "blue_detuned", "--set", "base.omega=0.5"]);
    assert!(o.status.success());
    let spec = SweepSpec::from_toml_str(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(spec.base.omega, 0.5);
    assert_eq!(spec.max_coupling, Some(0.006));
}

#[test]
fn presets_are_listed() {
    let o = molcav(&["presets"]);
    let text = String::from_utf8(o.stdout).unwrap();
    for name in molcav::sweep::PRESET_NAMES {
        assert!(text.contains(name));
    }
}

#[test]
fn compare_reports_effective_model() {
    let o = molcav(&[
        "compare",
        "--preset",
        "fig4a",
        "--set",
        "axes=[]",
        "--set",
        "base.delta=1.0",
        "--set",
        "base.kappa=1.5",
        "--set",
        "base.gamma1=0.003",
        "--set",
        "base.gamma2=0.003",
        "--set",
        "base.omega=1.0",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().clone();
    let row = r.records().next().unwrap().unwrap();
    let get = |k: &str| row[header.iter().position(|h| h == k).unwrap()].parse::<f64>().unwrap();
    assert!(get("eigen_deviation") < 0.05);
    assert!(get("coupling_abs") > 0.0);
}
