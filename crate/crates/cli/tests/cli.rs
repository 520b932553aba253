use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_neutrix-opt"))
}

fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("problems").join(name)
}

/// Write `src` to a scratch problem file named after the test.
fn scratch(name: &str, src: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("neutrix-opt-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(format!("{name}.toml"));
    std::fs::write(&path, src).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn lagrange_example_is_certified() {
    let o = bin().arg("lagrange").arg(example("circle-lagrange.toml")).args(["--format", "json"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("\"lambda\": 1.0"), "{out}");
    assert!(out.contains("\"residual_x\": \"oslash\""), "{out}");
    assert!(out.contains("\"residual_y\": \"oslash\""), "{out}");
    assert!(out.contains("\"outcome\": \"certified\""), "{out}");
}

#[test]
fn derivative_of_exp() {
    let p = scratch("exp", "command = \"derive\"\nobjective = \"exp(x)\"\npoint = [\"0\"]\nm = [\"oslash\"]\n");
    let o = bin().arg("derive").arg(&p).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("D_⊘F(0) = 1 + oslash"), "{out}");
    assert!(out.contains("1 agreed, 0 disagreed"), "{out}");
}

#[test]
fn quadratic_cluster() {
    let o = bin().arg("optimize").arg(example("quadratic-min.toml")).args(["--format", "json"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema"], "neutrix-opt/report/v1");
    assert_eq!(v["results"]["clusters"], serde_json::json!(["eps^(1/2)*pounds"]));
}

#[test]
fn text_and_json_carry_the_same_results() {
    let path = example("circle-lagrange.toml");
    let text = stdout(&bin().arg("lagrange").arg(&path).output().unwrap());
    let json = bin().arg("lagrange").arg(&path).args(["--format", "json"]).output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    for (k, val) in v["results"].as_object().unwrap() {
        let shown = match val {
            serde_json::Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        assert!(text.contains(&format!("{k} = {shown}")), "{k}: {text}");
    }
}

#[test]
fn timing_only_on_request() {
    let path = example("quadratic-min.toml");
    let plain = stdout(&bin().arg("optimize").arg(&path).args(["--format", "json"]).output().unwrap());
    assert!(!plain.contains("timing_ms"));
    let timed = stdout(&bin().arg("optimize").arg(&path).args(["--format", "json", "--timing"]).output().unwrap());
    assert!(timed.contains("timing_ms"));
}

#[test]
fn input_errors_exit_4() {
    let p = scratch("bad-expr", "objective = \"x^2 +\"\n");
    let o = bin().arg("eval").arg(&p).output().unwrap();
    assert_eq!(o.status.code(), Some(4));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 1, column 19"), "{err}");

    let o = bin().arg("solve").arg(&p).output().unwrap();
    assert_eq!(o.status.code(), Some(4));
    let o = bin().arg("limit").arg(example("quadratic-min.toml")).output().unwrap();
    assert_eq!(o.status.code(), Some(4));
    let o = bin().arg("eval").arg("/nonexistent/problem.toml").output().unwrap();
    assert_eq!(o.status.code(), Some(4));
}
