use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

struct Env {
    dir: TempDir,
}

impl Env {
    fn new() -> Self {
        Env { dir: tempfile::tempdir().unwrap() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, v: &Value) -> PathBuf {
        let p = self.path(name);
        std::fs::write(&p, serde_json::to_vec_pretty(v).unwrap()).unwrap();
        p
    }

    fn run(&self, cmd: &str, config: &Path, extra: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_uniqset"))
            .arg(cmd)
            .arg("--config")
            .arg(config)
            .args(extra)
            .env_remove("UNIQSET_WORKERS")
            .output()
            .unwrap()
    }
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}\n{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
    })
}

fn signal(parts: &[(&str, &str)]) -> Value {
    let comps: Vec<Value> = parts.iter().map(|(re, im)| json!({"re": re, "im": im})).collect();
    json!({"n": parts.len(), "components": comps})
}

fn same_signal(a: &Value, b: &Value) -> bool {
    let a: uniqset_core::Signal = serde_json::from_value(a.clone()).unwrap();
    let b: uniqset_core::Signal = serde_json::from_value(b.clone()).unwrap();
    a == b
}

fn read(p: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

#[test]
fn encode_examples() {
    let env = Env::new();
    let enc = json!({"nu": 2, "M": 2, "n": 4});

    env.write("zero.json", &signal(&[("0", "0"); 4]));
    let cfg = env.write("c0.json", &json!({"encoding": enc, "input": "zero.json"}));
    let o = env.run("encode", &cfg, &[]);
    assert_eq!(code(&o), 0);
    assert!(same_signal(&stdout_json(&o), &signal(&[("0", "0"); 4])));

    env.write("raw.json", &signal(&[("0", "0"), ("0.625", "0"), ("0", "0"), ("0.3", "0")]));
    let cfg = env.write("c1.json", &json!({"encoding": enc, "input": "raw.json", "output": "enc.json"}));
    assert_eq!(code(&env.run("encode", &cfg, &[])), 0);
    let worked = signal(&[("0", "0"), ("0.5625", "0"), ("0", "0"), ("0.265625", "0")]);
    assert!(same_signal(&read(&env.path("enc.json")), &worked));

    let cfg = env.write("c2.json", &json!({"encoding": enc, "input": "enc.json"}));
    let o = env.run("encode", &cfg, &["--out", env.path("again.json").to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(same_signal(&read(&env.path("again.json")), &worked));
}

#[test]
fn encode_rejects_bad_configs() {
    let env = Env::new();
    env.write("x.json", &signal(&[("0.5", "0")]));
    let cfg = env.write("c.json", &json!({"encoding": {"nu": 2, "M": 1, "n": 1}, "input": "x.json", "extra": 1}));
    assert_eq!(code(&env.run("encode", &cfg, &[])), 1);
    let cfg = env.write("d.json", &json!({"encoding": {"nu": 2, "M": 1, "n": 2}, "input": "x.json"}));
    assert_eq!(code(&env.run("encode", &cfg, &[])), 1);
    env.write("neg.json", &signal(&[("-0.5", "0")]));
    let cfg = env.write("e.json", &json!({"encoding": {"nu": 2, "M": 1, "n": 1}, "input": "neg.json"}));
    assert_eq!(code(&env.run("encode", &cfg, &[])), 1);
}

#[test]
fn sparse_round_trip() {
    let env = Env::new();
    let enc = json!({"nu": 2, "M": 2, "n": 4});
    let x = signal(&[("0", "0"), ("0.5625", "0"), ("0", "0"), ("0.265625", "0")]);
    env.write("x.json", &x);
    let obs_cfg = env.write(
        "obs.json",
        &json!({"input": "x.json", "trace": {"domain": "fourier", "points": [0, 1]}, "output": "y.json"}),
    );
    assert_eq!(code(&env.run("observe", &obs_cfg, &[])), 0);
    let y = read(&env.path("y.json"));
    assert_eq!(y["domain"], "fourier");
    let _: uniqset_core::spectral::SpectrumObservation = serde_json::from_value(y).unwrap();

    let cfg = env.write("rec.json", &json!({"mode": "sparse", "observation": "y.json", "encoding": enc, "sparsity": 2}));
    let o = env.run("recover", &cfg, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = stdout_json(&o);
    assert_eq!(r["command"], "recover");
    assert_eq!(r["payload"]["certificate"]["kind"], "exact-match");
    assert!(same_signal(&r["payload"]["signal"], &x));
}

#[test]
fn bruteforce_tiny_class() {
    let env = Env::new();
    let class = json!({"kind": "encodedY", "nu": 2, "M": 1, "n": 3, "bound": "1", "sparsity": 1});
    let x = signal(&[("0", "0"), ("0", "0"), ("0.5625", "0.0625")]);
    env.write("x.json", &x);
    let obs_cfg = env.write("obs.json", &json!({"input": "x.json", "trace": {"domain": "fourier", "points": [0]}}));
    let o = env.run("observe", &obs_cfg, &["--out", env.path("y.json").to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let cfg = env.write("rec.json", &json!({"mode": "bruteforce", "observation": "y.json", "class": class}));
    let o = env.run("recover", &cfg, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = stdout_json(&o);
    assert!(same_signal(&r["payload"]["signal"], &x));
    assert!(r["payload"]["candidates_examined"].as_u64().unwrap() > 1);
}

#[test]
fn bruteforce_ambiguous_trace_is_undecided() {
    let env = Env::new();
    let class = json!({"kind": "plainX", "nu": 2, "mu": 1, "n": 2, "bound": "1/2"});
    env.write("x.json", &signal(&[("0.5", "0"), ("0", "0.5")]));
    let obs_cfg = env.write("obs.json", &json!({"input": "x.json", "trace": {"domain": "time", "points": [0]}, "output": "y.json"}));
    assert_eq!(code(&env.run("observe", &obs_cfg, &[])), 0);
    let cfg = env.write("rec.json", &json!({"mode": "bruteforce", "observation": "y.json", "class": class}));
    let o = env.run("recover", &cfg, &[]);
    assert_eq!(code(&o), 2);
    let r = stdout_json(&o);
    assert_eq!(r["payload"]["certificate"]["kind"], "undecided");
    assert_eq!(r["payload"]["survivors"].as_array().unwrap().len(), 4);
}

#[test]
fn malformed_observation_fails() {
    let env = Env::new();
    std::fs::write(env.path("y.json"), b"{\"domain\": \"fourier\", \"n\": 4, \"points\": [0, 9]}").unwrap();
    let cfg = env.write(
        "rec.json",
        &json!({"mode": "sparse", "observation": "y.json", "encoding": {"nu": 2, "M": 1, "n": 4}, "sparsity": 2}),
    );
    let o = env.run("recover", &cfg, &[]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    let cfg = env.write("bad.json", &json!({"mode": "magic", "observation": "y.json"}));
    assert_eq!(code(&env.run("recover", &cfg, &[])), 1);
}

#[test]
fn verify_exit_codes() {
    let env = Env::new();
    let prime = env.write("p.json", &json!({"check": "minors", "n": 5, "m": 2}));
    let o = env.run("verify", &prime, &[]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["payload"]["all_nonzero"], true);

    let comp = env.write("c.json", &json!({"check": "minors", "n": 4, "m": 2}));
    assert_eq!(code(&env.run("verify", &comp, &[])), 1);
    let o = env.run("verify", &comp, &["--allow-composite"]);
    assert_eq!(code(&o), 3);
    let w = &stdout_json(&o)["payload"]["zero_witness"];
    assert_eq!(w["rows"].as_array().unwrap().len(), 2);
    assert_eq!(w["cols"].as_array().unwrap().len(), 2);

    let win = env.write("w.json", &json!({"check": "windows", "n": 8, "max_m": 3}));
    assert_eq!(code(&env.run("verify", &win, &[])), 0);

    let over = env.write("o.json", &json!({"check": "minors", "n": 13, "m": 3}));
    assert_eq!(code(&env.run("verify", &over, &["--limit", "10"])), 1);
}

#[test]
fn verify_modulated_class_is_unique() {
    let env = Env::new();
    let cfg = env.write(
        "u.json",
        &json!({
            "check": "uniqueness",
            "class": {"kind": "plainX", "nu": 2, "mu": 1, "n": 2, "bound": "1/2"},
            "modulation": {"d": 1, "nu1": 2, "mu1": 2, "n": 2, "side": "frequency-observed"},
            "trace": {"domain": "fourier", "points": [1]}
        }),
    );
    let o = env.run("verify", &cfg, &["--precision-cap", "4096"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let p = &stdout_json(&o)["payload"];
    assert_eq!(p["status"], "unique");
    assert!(p["undecided_pairs"].as_array().unwrap().is_empty());
}

#[test]
fn verify_collision_reports_witness() {
    let env = Env::new();
    let cfg = env.write(
        "u.json",
        &json!({
            "check": "uniqueness",
            "class": {"kind": "plainX", "nu": 2, "mu": 1, "n": 2, "bound": "1/2"},
            "trace": {"domain": "time", "points": [1]},
            "mode": "pairwise"
        }),
    );
    let o = env.run("verify", &cfg, &[]);
    assert_eq!(code(&o), 3);
    let p = &stdout_json(&o)["payload"];
    assert_eq!(p["status"], "collision");
    assert_eq!(p["witness"]["first"]["components"][1], p["witness"]["second"]["components"][1]);
}

#[test]
fn verify_payload_is_deterministic() {
    let env = Env::new();
    let cfg = env.write(
        "u.json",
        &json!({
            "check": "uniqueness",
            "class": {"kind": "plainX", "nu": 2, "mu": 1, "n": 3, "bound": "1/2"},
            "trace": {"domain": "ztransform", "points": ["1"]}
        }),
    );
    let runs: Vec<Value> = [&["--workers", "1"][..], &["--workers", "3"][..]]
        .iter()
        .map(|extra| {
            let o = env.run("verify", &cfg, extra);
            assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
            stdout_json(&o)
        })
        .collect();
    for key in ["command", "config_digest", "tool_version", "payload"] {
        assert_eq!(serde_json::to_string(&runs[0][key]).unwrap(), serde_json::to_string(&runs[1][key]).unwrap());
    }
    assert_eq!(runs[0]["config_digest"].as_str().unwrap().len(), 64);
    assert!(runs[0]["envelope"]["wall_clock_ms"].is_u64());
}

#[test]
fn workers_env_is_honoured() {
    let env = Env::new();
    let cfg = env.write("p.json", &json!({"check": "minors", "n": 7, "m": 2}));
    let o = Command::new(env!("CARGO_BIN_EXE_uniqset"))
        .args(["verify", "--config"])
        .arg(&cfg)
        .env("UNIQSET_WORKERS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let o = Command::new(env!("CARGO_BIN_EXE_uniqset"))
        .args(["verify", "--config"])
        .arg(&cfg)
        .env("UNIQSET_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn muscan_csv_and_report() {
    let env = Env::new();
    env.write("x.json", &signal(&[("0", "0"), ("0.5625", "0"), ("0", "0"), ("0.265625", "0")]));
    let cfg = env.write(
        "m.json",
        &json!({
            "input": "x.json",
            "encoding": {"nu": 2, "M": 2, "n": 4},
            "sparsity": 2,
            "delta": "1/4",
            "mus": [0, 1, 2, 3, 4, 5, 6, 7, 8]
        }),
    );
    let out = env.path("scan.json");
    let o = env.run("muscan", &cfg, &["--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let report = read(&out);
    let rows = report["payload"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 9);
    let report_back: uniqset_core::recovery::MuScanReport = serde_json::from_value(report["payload"].clone()).unwrap();
    assert_eq!(report_back.rows.len(), 9);

    let mut rdr = csv::Reader::from_path(env.path("scan.csv")).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["mu", "max_error_num", "max_error_den", "support_preserved", "recovered_exactly"]);
    let recs: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(recs.len(), 9);
    assert_eq!(&recs[0][0], "0");
    assert_eq!(&recs[0][4], "false");
    let stab = recs.iter().find(|r| &r[0] == "6").expect("row at M+N");
    assert_eq!(&stab[1], "0");
    assert_eq!(&stab[4], "true");
    for (r, j) in recs.iter().zip(rows) {
        assert_eq!(r[4] == *"true", j["recovered_exactly"].as_bool().unwrap());
        match j["max_error"].as_str() {
            Some(q) => {
                let parsed = uniqset_core::exactnum::parse_rational(q).unwrap();
                assert_eq!(parsed.numer().to_string(), r[1]);
                assert_eq!(parsed.denom().to_string(), r[2]);
            }
            None => assert!(r[1].is_empty() && r[2].is_empty()),
        }
    }
    assert_eq!(report["payload"]["stable_from"].as_u64().unwrap(), 6);
}

#[test]
fn muscan_empty_list_fails() {
    let env = Env::new();
    env.write("x.json", &signal(&[("0.5", "0")]));
    let cfg = env.write(
        "m.json",
        &json!({"input": "x.json", "encoding": {"nu": 2, "M": 1, "n": 1}, "sparsity": 1, "delta": "1/4", "mus": []}),
    );
    assert_eq!(code(&env.run("muscan", &cfg, &[])), 1);
}

#[test]
fn usage_errors_exit_one() {
    let o = Command::new(env!("CARGO_BIN_EXE_uniqset")).arg("verify").output().unwrap();
    assert_eq!(code(&o), 1);
    let o = Command::new(env!("CARGO_BIN_EXE_uniqset")).arg("frobnicate").output().unwrap();
    assert_eq!(code(&o), 1);
    let o = Command::new(env!("CARGO_BIN_EXE_uniqset")).arg("--help").output().unwrap();
    assert_eq!(code(&o), 0);
}
