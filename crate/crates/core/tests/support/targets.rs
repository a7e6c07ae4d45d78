//! The shipped target descriptions.

use std::path::PathBuf;

use fplower::target::{load_target, TargetDesc};

pub fn targets_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../targets")
}

pub fn benchmarks_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../benchmarks")
}

pub fn target(name: &str) -> TargetDesc {
    let path = targets_dir().join(format!("{name}.tgt"));
    load_target(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}
