#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

pub const BIN: &str = env!("CARGO_BIN_EXE_clustvar");

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn data(name: &str) -> PathBuf {
    crate_dir().join("data").join(name)
}

pub fn clustvar(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Numeric CSV body as rows of cells (header skipped).
pub fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let header = rdr.headers().unwrap().iter().map(str::to_string).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn schema(name: &str) -> Value {
    read_json(&crate_dir().join("schemas").join(format!("{name}.schema.json")))
}

/// Validator for a shipped schema with the other shipped schemas registered.
pub fn validator(name: &str) -> jsonschema::Validator {
    let mut options = jsonschema::options();
    for other in ["hierarchy", "partition", "stability", "report", "column-types"] {
        let resource = jsonschema::Resource::from_contents(schema(other)).expect("schema has a known draft");
        options = options.with_resource(format!("urn:clustvar:schema:{other}"), resource);
    }
    options.build(&schema(name)).expect("schema compiles")
}

pub fn assert_valid(name: &str, instance: &Value) {
    let v = validator(name);
    let errors: Vec<String> = v.iter_errors(instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}");
}
