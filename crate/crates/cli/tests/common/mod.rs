#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

pub fn qgradcam(args: &[&str]) -> Output {
    qgradcam_env(args, &[])
}

pub fn qgradcam_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qgradcam"));
    cmd.args(args).env_remove("QGCAM_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

pub fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// JSON lines on stdout.
pub fn events(o: &Output) -> Vec<serde_json::Value> {
    String::from_utf8_lossy(&o.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap_or_else(|e| panic!("{l:?}: {e}")))
        .collect()
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}
