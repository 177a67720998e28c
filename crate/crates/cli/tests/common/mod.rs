#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

pub fn litterscan<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_litterscan"))
        .args(args)
        .env_remove("LITTERSCAN_LOG")
        .output()
        .expect("spawn litterscan")
}

pub fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out.stdout.is_empty(), "unexpected stdout");
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}
