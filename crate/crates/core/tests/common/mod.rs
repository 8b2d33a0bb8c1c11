#![allow(dead_code)]

pub mod gradcheck;
pub mod oracle;

use std::path::Path;
use std::process::{Command, Output};

pub fn cli(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tstransfer"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

pub fn cli_ok(args: &[&str], cwd: &Path) -> Output {
    let out = cli(args, cwd);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}
