use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

const GROUP: [&str; 8] = ["--p", "5", "--h", "2", "--m", "4", "--alpha", "7"];

fn metalift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metalift")).args(args).output().expect("spawn")
}

fn with_group<'a>(rest: &[&'a str]) -> Vec<&'a str> {
    GROUP.iter().copied().chain(rest.iter().copied()).collect()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

#[test]
fn info_reports_a0() {
    let out = metalift(&with_group(&["info"]));
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["a0"], "1");
    assert_eq!(v["faithful"], true);
    assert_eq!(v["residue_field"]["zeta_m"][0], "2");
}

#[test]
fn decide_examples() {
    let cases = [
        ("0:25", 0),
        ("2:6", 1),
        ("1:2,3:2", 0),
        ("1:2,1:2", 1),
        ("0:21,1:23", 1),
    ];
    for (summands, code) in cases {
        let out = metalift(&with_group(&["--summands", summands, "decide"]));
        assert_eq!(out.status.code(), Some(code), "{summands}");
        let v = json(&out);
        assert_eq!(v["liftable"], code == 0, "{summands}");
        if code == 1 {
            assert!(v["certificate"]["reason"].is_string());
        }
    }
}

#[test]
fn decide_reads_job_file() {
    let path = tmp("job_decide.json");
    std::fs::write(
        &path,
        r#"{"group":{"p":"5","h":"2","m":"4","alpha":"7"},
            "decomposition":[{"epsilon":"1","kappa":"2"},{"epsilon":3,"kappa":2}]}"#,
    )
    .unwrap();
    let out = metalift(&["--in", path.to_str().unwrap(), "decide"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["plan"]["chains"].as_array().unwrap().len(), 1);
}

#[test]
fn lift_then_reduce() {
    let lift = tmp("lift.json");
    let out = metalift(&with_group(&["--summands", "1:2,3:2", "--N", "8", "--e", "2", "--out", lift.to_str().unwrap(), "lift"]));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&lift).unwrap()).unwrap();
    assert!(v["T"].is_array() && v["Gamma"].is_array());
    assert_eq!(v["T"].as_array().unwrap().len(), 4);

    let out = metalift(&["--in", lift.to_str().unwrap(), "reduce"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let got = json(&out);
    let pairs: Vec<(String, String)> = got
        .as_array()
        .unwrap()
        .iter()
        .map(|s| (s["epsilon"].as_str().unwrap().to_owned(), s["kappa"].as_str().unwrap().to_owned()))
        .collect();
    let mut pairs = pairs;
    pairs.sort();
    assert_eq!(pairs, vec![("1".into(), "2".into()), ("3".into(), "2".into())]);
}

#[test]
fn lift_refuses_non_liftable() {
    let out = metalift(&with_group(&["--summands", "1:2,1:2", "lift"]));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn decompose_module() {
    // V(1,2) over (5,2,4,7): tau = Id + E21, sigma = diag(2, 4)
    let path = tmp("job_module.json");
    std::fs::write(
        &path,
        r#"{"group":{"p":5,"h":2,"m":4,"alpha":7},
            "module":{"dimension":2,
                      "tau":[[["1"],["0"]],[["1"],["1"]]],
                      "sigma":[[["2"],["0"]],[["0"],["4"]]]}}"#,
    )
    .unwrap();
    let out = metalift(&["--in", path.to_str().unwrap(), "decompose"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v[0]["epsilon"], "1");
    assert_eq!(v[0]["kappa"], "2");
}

#[test]
fn selftest_passes_and_is_deterministic() {
    let a = metalift(&["--seed", "0", "--trials", "20", "selftest"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stdout));
    let b = metalift(&["--seed", "0", "--trials", "20", "selftest"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn output_is_byte_identical() {
    let args = with_group(&["--summands", "1:2,3:2", "--N", "4", "lift"]);
    assert_eq!(metalift(&args).stdout, metalift(&args).stdout);
}

#[test]
fn bad_input_exits_2() {
    for args in [
        vec!["--p", "6", "--h", "1", "--m", "1", "--alpha", "1", "info"],
        vec!["--p", "5", "--h", "2", "info"],
        with_group(&["--summands", "1:26", "decide"]),
        with_group(&["--summands", "nonsense", "decide"]),
        with_group(&["decide"]),
    ] {
        let out = metalift(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err: Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
        assert_eq!(err["error"]["kind"], "input");
    }
    let path = tmp("garbage.json");
    std::fs::write(&path, "{not json").unwrap();
    assert_eq!(metalift(&["--in", path.to_str().unwrap(), "decide"]).status.code(), Some(2));
}
