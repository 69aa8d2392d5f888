use std::path::Path;
use std::process::{Command, Output};

fn overconv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_overconv"))
        .args(args)
        .env_remove("OVERCONV_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn factorial_d2() {
    let o = overconv(&[
        "--p",
        "3",
        "--m",
        "1",
        "factorial",
        "-n",
        "2",
        "--format",
        "md",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "D_2 = x^4 - x^10 - x^12 + x^18\nvaluation: 4\n");

    let o = overconv(&["--p", "3", "--m", "1", "factorial", "-n", "2"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["valuation"], "4");
    let exps: Vec<_> = v["terms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["exponent"].as_str().unwrap())
        .collect();
    assert_eq!(exps, ["4", "10", "12", "18"]);
}

#[test]
fn verify_prop1() {
    let o = overconv(&["--p", "3", "--m", "1", "verify", "prop1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["q"], 3);
    let check = &v["checks"][0];
    assert_eq!(check["name"], "prop1");
    let first = &check["cases"][0];
    assert_eq!(first["inputs"]["n"], "1");
    assert_eq!(
        (first["measured"].as_str(), first["bound"].as_str()),
        (Some("3"), Some("3"))
    );
}

#[test]
fn usage_and_config_errors_exit_2() {
    for args in [
        &["--p", "7", "--m", "0", "verify", "prop1"][..],
        &["--p", "4", "verify", "prop1"],
        &["verify", "prop9"],
        &["report"],
        &["--prec", "0", "verify", "prop1"],
        &["radius", "--series", "polylog=0"],
    ] {
        let o = overconv(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn radius_ec() {
    let o = overconv(&["--p", "2", "--order", "10", "radius", "--series", "ec"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["last_slope"], "-1023/1024");
    assert_eq!(v["trend"], "non_increasing");
}

fn no_floats(v: &serde_json::Value) -> bool {
    match v {
        serde_json::Value::Number(n) => !n.is_f64(),
        serde_json::Value::Array(a) => a.iter().all(no_floats),
        serde_json::Value::Object(o) => o.values().all(no_floats),
        _ => true,
    }
}

fn report_to(dir: &Path, name: &str, extra: &[&str]) -> Vec<u8> {
    let out = dir.join(name);
    let out_s = out.to_str().unwrap();
    let mut args = vec![
        "--p", "2", "--order", "4", "--prec", "40", "--seed", "5", "--out", out_s,
    ];
    args.extend_from_slice(extra);
    args.extend_from_slice(&["report", "--all"]);
    let o = overconv(&args);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    std::fs::read(out).unwrap()
}

#[test]
fn report_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = report_to(dir.path(), "a.json", &["--jobs", "1"]);
    let b = report_to(dir.path(), "b.json", &["--jobs", "4"]);
    let c = report_to(dir.path(), "c.json", &["--jobs", "4"]);
    assert_eq!(a, b);
    assert_eq!(b, c);
    let text = String::from_utf8(a).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let names: Vec<_> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(
        names,
        [
            "exp-ode",
            "pochhammer",
            "polylog-ode",
            "prop1",
            "prop2",
            "prop3",
            "prop4"
        ]
    );
    assert!(no_floats(&v));
    for fmt in ["csv", "md"] {
        let x = report_to(
            dir.path(),
            &format!("x.{fmt}"),
            &["--format", fmt, "--jobs", "1"],
        );
        let y = report_to(
            dir.path(),
            &format!("y.{fmt}"),
            &["--format", fmt, "--jobs", "3"],
        );
        assert_eq!(x, y);
    }
}

#[test]
fn out_dir_override() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_overconv"))
        .args(["--out", "nested/d3.json", "factorial", "-n", "3"])
        .env("OVERCONV_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("nested/d3.json")).unwrap()).unwrap();
    assert_eq!(v["valuation"], "13");
}
