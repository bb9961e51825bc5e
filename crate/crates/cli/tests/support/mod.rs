#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use opcalc_cli::io::{write_matrix, MatrixFormat};
use opcalc_core::ComplexMatrix;

pub fn opcalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opcalc"))
        .args(args)
        .env_remove("OPCALC_THREADS")
        .output()
        .expect("binary runs")
}

pub fn opcalc_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opcalc")).args(args).env(key, value).output().expect("binary runs")
}

pub fn save(dir: &Path, name: &str, m: &ComplexMatrix) -> PathBuf {
    let path = dir.join(name);
    write_matrix(&path, m, MatrixFormat::for_path(&path)).unwrap();
    path
}

pub fn report(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("report is not JSON ({e}); stderr: {}", String::from_utf8_lossy(&out.stderr))
    })
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}
