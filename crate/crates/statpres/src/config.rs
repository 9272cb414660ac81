//! Flat JSON run configuration; command-line flags override file values.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// `50`, `[64, 32]` or `"64,32"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridValue {
    Square(usize),
    Pair([usize; 2]),
    Text(String),
}

impl GridValue {
    pub fn dims(&self) -> Result<(usize, usize)> {
        match self {
            GridValue::Square(n) => Ok((*n, *n)),
            GridValue::Pair([a, b]) => Ok((*a, *b)),
            GridValue::Text(s) => parse_grid(s),
        }
    }
}

pub fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Usage(format!("grid must be NX or NX,NY, got {s:?}"));
    let mut it = s.split(',').map(|t| t.trim().parse::<usize>().map_err(|_| bad()));
    let nx = it.next().ok_or_else(bad)??;
    let ny = match it.next() {
        Some(v) => v?,
        None => nx,
    };
    if it.next().is_some() {
        return Err(bad());
    }
    Ok((nx, ny))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scheme: Option<OneOrMany<String>>,
    pub a1: Option<f64>,
    pub a2: Option<f64>,
    pub a3: Option<f64>,
    pub a4: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub eps: Option<OneOrMany<f64>>,
    pub c: Option<f64>,
    pub grid: Option<GridValue>,
    pub dx: Option<f64>,
    pub dy: Option<f64>,
    pub cfl: Option<f64>,
    pub t_end: Option<f64>,
    pub k_samples: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub divergence: Option<String>,
    pub radius: Option<i32>,
    pub identity_only: Option<bool>,
    pub cfl_sweep: Option<bool>,
    pub init: Option<String>,
    pub probe_every: Option<usize>,
}

macro_rules! overlay {
    ($hi:ident, $lo:ident; $($f:ident),*) => {
        RunConfig { $($f: $hi.$f.or($lo.$f)),* }
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Usage(format!("config {}: {e}", path.display())))
    }

    /// Values set in `self` win over `base`.
    pub fn over(self, base: RunConfig) -> RunConfig {
        let hi = self;
        let lo = base;
        overlay!(hi, lo; scheme, a1, a2, a3, a4, c1, c2, eps, c, grid, dx, dy, cfl, t_end,
            k_samples, seed, out, jobs, divergence, radius, identity_only, cfl_sweep, init, probe_every)
    }
}
