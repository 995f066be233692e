//! Word-ball cache under `NCHEAT_CACHE_DIR`, keyed by the sha256 of the
//! canonical group spec and the radius.

use std::path::PathBuf;

use anyhow::Result;
use ncheat::{Ball, Group, GroupSpec};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::output::sha256_hex;

pub const CACHE_ENV: &str = "NCHEAT_CACHE_DIR";

#[derive(Serialize, Deserialize)]
struct Stored {
    group: GroupSpec,
    radius: usize,
    sphere_sizes: Vec<usize>,
    elements: Vec<Value>,
}

pub fn key(spec: &GroupSpec, radius: usize) -> String {
    sha256_hex(format!("{}\n{radius}", spec.canonical()).as_bytes())
}

fn path(spec: &GroupSpec, radius: usize) -> Option<PathBuf> {
    let dir = std::env::var_os(CACHE_ENV).filter(|d| !d.is_empty())?;
    Some(PathBuf::from(dir).join(format!("ball-{}.json", key(spec, radius))))
}

fn load(file: &PathBuf, spec: &GroupSpec, group: &Group, radius: usize) -> Result<Ball> {
    let stored: Stored = serde_json::from_slice(&std::fs::read(file)?)?;
    anyhow::ensure!(stored.group == *spec && stored.radius == radius, "cache entry is for another ball");
    let elements = stored.elements.iter().map(|v| group.element_from_json(v)).collect::<ncheat::Result<Vec<_>>>()?;
    Ok(Ball::from_parts(group, radius, elements, &stored.sphere_sizes)?)
}

fn store(file: &PathBuf, spec: &GroupSpec, ball: &Ball) -> Result<()> {
    let stored = Stored {
        group: spec.clone(),
        radius: ball.radius(),
        sphere_sizes: ball.sphere_sizes(),
        elements: ball.elements().iter().map(|g| g.to_json()).collect(),
    };
    if let Some(dir) = file.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let tmp = file.with_extension(format!("tmp{}", std::process::id()));
    std::fs::write(&tmp, serde_json::to_vec(&stored)?)?;
    std::fs::rename(&tmp, file)?;
    Ok(())
}

/// The ball of `radius`, from the cache when one is configured. Unreadable
/// entries are rebuilt; a failed write only warns.
pub fn ball(spec: &GroupSpec, group: &Group, radius: usize) -> Result<Ball> {
    let Some(file) = path(spec, radius) else {
        return Ok(group.ball(radius)?);
    };
    if file.exists() {
        match load(&file, spec, group, radius) {
            Ok(b) => return Ok(b),
            Err(e) => eprintln!("ncheat: ignoring cache entry {}: {e:#}", file.display()),
        }
    }
    let b = group.ball(radius)?;
    if let Err(e) = store(&file, spec, &b) {
        eprintln!("ncheat: could not write cache entry {}: {e:#}", file.display());
    }
    Ok(b)
}
