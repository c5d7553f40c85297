use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_perispec"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    assert_eq!(o.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn scratch(name: &str) -> PathBuf {
    let d = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn disc_of_free_period_one() {
    let d = scratch("disc");
    let f = write(&d, "free.json", r#"{"p":1,"a":[1],"b":[0]}"#);
    let o = run(&["disc", "--in", &f]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "{\"coeffs\":[0,1]}\n");
}

#[test]
fn bands_csv() {
    let d = scratch("bands");
    let f = write(&d, "p2.json", r#"{"p":2,"a":[1,2],"b":[0,0]}"#);
    let o = run(&["bands", "--in", &f]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "band_lo,band_hi\n-3,-1\n1,3\n");
    let v = json(&run(&["--format", "json", "bands", "--in", &f]));
    assert_eq!(v["bands"].as_array().unwrap().len(), 2);
}

#[test]
fn sumrule_p2_rank_one() {
    let d = scratch("p2");
    let f = write(&d, "rank1.json", r#"{"l":1,"blocks":[{"A":[[1.0]],"B":[[0.5]]}],"tail":"free"}"#);
    let v = json(&run(&["sumrule", "p2", "--in", &f]));
    assert_eq!(v["rhs"].as_f64().unwrap(), 0.0625);
    assert!(v["residual"].as_f64().unwrap() < 1e-6);
    let fx = json(&run(&["sumrule", "p2", "--fixture", "scalar_b0.5"]));
    assert_eq!(fx["rhs"], v["rhs"]);
}

#[test]
fn usage_errors_exit_two() {
    let o = run(&["bands", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn input_and_domain_errors_exit_two_with_json() {
    let d = scratch("errors");
    let missing = d.join("nope.json");
    let o = run(&["disc", "--in", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let diag: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(diag["error"], "input");

    let bad = write(&d, "neg.json", r#"{"p":1,"a":[-1],"b":[0]}"#);
    assert_eq!(run(&["disc", "--in", &bad]).status.code(), Some(2));

    let j = write(&d, "j.json", r#"{"p":2,"a":[1,2],"b":[0.3,-0.2]}"#);
    let o = run(&["m", "--in", &j, "--re", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let diag: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(diag["error"], "domain");

    assert_eq!(run(&["toda", "--in", &j, "--dt=0"]).status.code(), Some(2));
    assert_eq!(run(&["sumrule", "c0"]).status.code(), Some(2));
}

#[test]
fn numeric_failure_exits_three() {
    let d = scratch("numeric");
    let j = write(&d, "j.json", r#"{"p":2,"a":[1,2],"b":[0.3,-0.2]}"#);
    let o = run(&["toda", "--in", &j, "--dt", "2", "--t-max", "10", "--samples", "2"]);
    assert_eq!(o.status.code(), Some(3));
    let diag: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(diag["error"], "numeric");
    assert!(o.stdout.is_empty());
}

#[test]
fn output_is_deterministic() {
    let d = scratch("determinism");
    let j = write(&d, "j.json", r#"{"p":3,"a":[1,1.5,0.7],"b":[0.2,-0.4,0.1]}"#);
    for args in [
        vec!["toda", "--in", j.as_str(), "--t-max", "3", "--samples", "4"],
        vec!["measure", "--in", j.as_str(), "--grid", "16"],
        vec!["--seed", "7", "bounds", "--n", "30"],
    ] {
        let first = run(&args);
        assert_eq!(first.status.code(), Some(0));
        assert_eq!(first.stdout, run(&args).stdout, "{args:?}");
    }
    let threads = bin().args(["--seed", "7", "bounds", "--n", "30"]).env("PERISPEC_THREADS", "1").output().unwrap();
    assert_eq!(threads.stdout, run(&["--seed", "7", "bounds", "--n", "30"]).stdout);
}

#[test]
fn floats_use_seventeen_digits() {
    let d = scratch("digits");
    let j = write(&d, "j.json", r#"{"p":2,"a":[1,2],"b":[0.3,-0.2]}"#);
    let text = stdout(&run(&["m", "--in", &j, "--re", "0.1"]));
    assert!(text.contains("0.10000000000000001"), "{text}");
}

#[test]
fn blocks_feed_sumrule_and_bounds() {
    let d = scratch("roundtrip");
    let j0 = write(&d, "j0.json", r#"{"p":2,"a":[1,1],"b":[0,0]}"#);
    let mut a = vec![1.0; 40];
    a[0] = 1.2;
    a[1] = 0.9;
    let seq = serde_json::json!({"offset": 1, "a": a, "b": vec![0.0; 40], "sides": "one"});
    let s = write(&d, "seq.json", &seq.to_string());
    let o = run(&["blocks", "--in", &s, "--j0", &j0]);
    let blocks = json(&o);
    assert_eq!(blocks["l"], 2);
    let bj = write(&d, "blocks.json", &stdout(&o));

    let p2 = json(&run(&["sumrule", "p2", "--in", &bj]));
    assert!(p2["residual"].as_f64().unwrap() < 1e-6, "{p2}");
    let c0 = json(&run(&["sumrule", "c0", "--in", &bj]));
    assert!(c0["residual"].as_f64().unwrap().abs() < 1e-6, "{c0}");
    let steps = json(&run(&["sumrule", "step", "--in", &bj]));
    assert_eq!(steps.as_array().unwrap().len(), 3);
    let b = json(&run(&["bounds", "--in", &bj, "--n", "40"]));
    assert_eq!(b["operator"], blocks);
    assert!(b["report"]["bound"]["lhs"].as_f64().unwrap() <= b["report"]["bound"]["rhs"].as_f64().unwrap());
}

#[test]
fn toda_points_feed_disc() {
    let d = scratch("toda");
    let j = write(&d, "j.json", r#"{"p":3,"a":[1,1.5,0.7],"b":[0.2,-0.4,0.1]}"#);
    let reference = json(&run(&["disc", "--in", &j]))["coeffs"].clone();
    let sample = json(&run(&["toda", "--in", &j, "--t-max", "2", "--samples", "3"]));
    for (k, pt) in sample["points"].as_array().unwrap().iter().enumerate() {
        let f = write(&d, &format!("pt{k}.json"), &pt.to_string());
        let c = json(&run(&["disc", "--in", &f]))["coeffs"].clone();
        for (x, y) in c.as_array().unwrap().iter().zip(reference.as_array().unwrap()) {
            assert!((x.as_f64().unwrap() - y.as_f64().unwrap()).abs() < 1e-8);
        }
    }
}

#[test]
fn opuc_discriminant_and_magic() {
    let d = scratch("opuc");
    let v0 = write(&d, "v0.json", r#"{"p":2,"alpha":[[0,0],[0.5,0]]}"#);
    let v = json(&run(&["disc", "--in", &v0]));
    assert_eq!(v["lo"], -1);
    let k = (4.0f64 / 3.0).sqrt();
    let c = v["coeffs"].as_array().unwrap();
    assert!((c[0][0].as_f64().unwrap() - k).abs() < 1e-12 && (c[2][0].as_f64().unwrap() - k).abs() < 1e-12);

    let alpha: Vec<[f64; 2]> = (0..32).map(|n| if n % 2 == 0 { [0.0, 0.0] } else { [0.5, 0.0] }).collect();
    let seq = write(&d, "seq.json", &serde_json::json!({"offset": -16, "alpha": alpha, "sides": "two"}).to_string());
    let r = json(&run(&["magic", "--in", &seq, "--j0", &v0]));
    assert!(r["sup"].as_f64().unwrap() < 1e-10, "{r}");
}

#[test]
fn report_911_beta_family() {
    let v = json(&run(&["report-911", "--beta", "0.6", "--blocks", "64"]));
    let partial = v["partial"].as_array().unwrap();
    assert_eq!(partial.len(), 6);
    assert!(partial.iter().all(|s| s.as_array().unwrap().len() == 64));
    assert_eq!(run(&["report-911", "--beta", "0"]).status.code(), Some(2));
}
