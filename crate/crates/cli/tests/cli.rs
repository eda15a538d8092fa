use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn infol(args: &[&str]) -> Output {
  Command::new(env!("CARGO_BIN_EXE_infol")).args(args).output().expect("binary runs")
}

fn golden_dir() -> PathBuf {
  Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Rebuild the command line from a report's `config` header.
fn args_from_config(config: &Value) -> Vec<String> {
  let obj = config.as_object().expect("config object");
  let mut args = vec![obj["command"].as_str().expect("command").to_string()];
  for (k, v) in obj {
    if k == "command" {
      continue;
    }
    args.push(format!("--{}", k.replace('_', "-")));
    args.push(match v {
      Value::String(s) => s.clone(),
      other => other.to_string(),
    });
  }
  args
}

#[test]
fn golden_files_regenerate_identically() {
  let mut seen = 0;
  for entry in std::fs::read_dir(golden_dir()).unwrap() {
    let path = entry.unwrap().path();
    let expected = std::fs::read_to_string(&path).unwrap();
    let report: Value = serde_json::from_str(&expected).unwrap();
    let args = args_from_config(&report["config"]);
    let out = infol(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), expected, "{}", path.display());
    let unsound = report.get("sound") == Some(&Value::Bool(false));
    assert_eq!(out.status.code(), Some(if unsound { 3 } else { 0 }), "{}", path.display());
    seen += 1;
  }
  assert!(seen >= 8);
}

#[test]
fn spec_examples() {
  let json = |args: &[&str]| -> Value { serde_json::from_slice(&infol(args).stdout).unwrap() };
  let r = json(&["infcoh", "--algebra", "Q[x]", "--levels", "2", "--prec", "8", "--deg", "6"]);
  assert_eq!(r["table"][0]["rank"], 1);
  assert_eq!(r["table"][1]["rank"], 0);
  assert_eq!(r["table"][1]["trusted"], true);
  let r = json(&["infcoh", "--algebra", "Fp[x]", "--p", "3", "--levels", "2", "--prec", "8", "--deg", "6"]);
  assert_eq!(r["table"][0]["rank"], 1);
  let r = json(&["derham", "--algebra", "Fp[x]", "--p", "3", "--deg", "10"]);
  assert_eq!(r["classes"]["1"], serde_json::json!(["x^2 dx", "x^5 dx", "x^8 dx"]));
  let r = json(&["compare", "--algebra", "Q[x,y]", "--levels", "2", "--prec", "6", "--deg", "4"]);
  assert_eq!(r["verdict"], "equivalent");
  assert_eq!(json(&["divided-power", "--over", "Z", "--trunc", "5"])["scalar"], "2");
  assert_eq!(json(&["divided-power", "--over", "F2", "--trunc", "5"])["scalar"], "0");
  assert_eq!(json(&["divided-power", "--over", "F5", "--trunc", "5"])["unit"], true);
  let r = json(&["integrate", "--demo", "pair-groupoid", "--algebra", "Q[x]", "--prec", "6"]);
  assert_eq!(r["round_trip"], "pass");
}

#[test]
fn exit_codes() {
  let code = |args: &[&str]| infol(args).status.code();
  assert_eq!(code(&["infcoh", "--algebra", "Q[x"]), Some(2));
  assert_eq!(code(&["infcoh", "--algebra", "Fp[x]"]), Some(2));
  assert_eq!(code(&["infcoh", "--algebra", "Fp[x]", "--p", "4"]), Some(2));
  assert_eq!(code(&["infcoh", "--algebra", "Q[x]", "--prec", "3", "--deg", "6"]), Some(3));
  assert_eq!(code(&["divided-power", "--over", "Z", "--trunc", "3"]), Some(3));
  assert_eq!(code(&["compare", "--algebra", "Fp[x]", "--p", "3"]), Some(4));
  assert_eq!(code(&["integrate", "--demo", "additive-group", "--algebra", "Q[x]"]), Some(2));
  let negative =
    infol(&["infcoh", "--algebra", "Fp[x]", "--p", "3", "--levels", "2", "--prec", "3", "--deg", "6"]);
  let r: Value = serde_json::from_slice(&negative.stdout).unwrap();
  assert!(r["degree0_kernel"].as_array().unwrap().iter().any(|c| c == "x^3"));
  assert!(r["table"].as_array().unwrap().iter().all(|row| row["trusted"] == false));
}

#[test]
fn csv_and_out_file() {
  let csv = infol(&["derham", "--algebra", "Q[x,y]", "--deg", "4", "--format", "csv"]);
  assert_eq!(
    String::from_utf8(csv.stdout).unwrap(),
    "degree,rank,torsion,trusted\n0,1,,true\n1,0,,true\n2,0,,true\n"
  );
  let z = infol(&["derham", "--algebra", "Z[x]", "--deg", "4", "--format", "csv"]);
  assert_eq!(String::from_utf8(z.stdout).unwrap(), "degree,rank,torsion,trusted\n0,1,,true\n1,0,2;12,true\n");
  let dir = std::env::temp_dir().join(format!("infol-cli-{}", std::process::id()));
  std::fs::create_dir_all(&dir).unwrap();
  let path = dir.join("report.json");
  let out = infol(&["infcoh", "--algebra", "Q[x]", "--out", path.to_str().unwrap()]);
  assert!(out.status.success() && out.stdout.is_empty());
  let again = infol(&["infcoh", "--algebra", "Q[x]"]);
  assert_eq!(std::fs::read(&path).unwrap(), again.stdout);
  std::fs::remove_dir_all(dir).unwrap();
}
