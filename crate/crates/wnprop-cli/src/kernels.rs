//! `kernels`: chaos-vector operations on serialized kernels.

use crate::config::{c, C};
use crate::error::CliError;
use serde::Deserialize;
use std::path::Path;
use wnprop::fock::{donsker_kernels, project_perp, scale, shift, wick_product, wiener_product, BasisDoc, ChaosVector, VectorDoc, WeightedBasis};
use wnprop::Complex64;

/// Inline vector or a path relative to the config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Source {
    Path(String),
    Inline(VectorDoc),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum KernelOp {
    Scale { input: Source, z: C },
    Shift { input: Source, eta: Vec<C> },
    Project { input: Source, eta: Vec<C> },
    Donsker { basis: BasisDoc, eta: Vec<C>, a: C, n: usize },
    Wick { input: Source, other: Source },
    Wiener { input: Source, other: Source },
}

/// `kernels` config.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelsCfg {
    pub operation: KernelOp,
    /// Output file relative to the config; stdout when absent.
    pub output: Option<String>,
}

fn read(src: &Source, dir: &Path) -> Result<ChaosVector, CliError> {
    let doc = match src {
        Source::Inline(d) => d.clone(),
        Source::Path(p) => crate::config::load::<VectorDoc>(&dir.join(p))?,
    };
    Ok(ChaosVector::try_from(&doc)?)
}

fn vec_c(v: &[C]) -> Vec<Complex64> {
    v.iter().map(|&x| c(x)).collect()
}

/// Apply the operation; returns the serialized result.
pub fn apply(cfg: &KernelsCfg, dir: &Path) -> Result<VectorDoc, CliError> {
    let out = match &cfg.operation {
        KernelOp::Scale { input, z } => scale(&read(input, dir)?, c(*z)),
        KernelOp::Shift { input, eta } => shift(&read(input, dir)?, &vec_c(eta))?,
        KernelOp::Project { input, eta } => project_perp(&read(input, dir)?, &vec_c(eta))?,
        KernelOp::Donsker { basis, eta, a, n } => {
            if basis.weights.len() != basis.d {
                return Err(CliError::Config("basis D does not match weights".into()));
            }
            donsker_kernels(&WeightedBasis::new(basis.weights.clone())?, &vec_c(eta), c(*a), *n)?
        }
        KernelOp::Wick { input, other } => wick_product(&read(input, dir)?, &read(other, dir)?)?,
        KernelOp::Wiener { input, other } => wiener_product(&read(input, dir)?, &read(other, dir)?)?,
    };
    Ok(VectorDoc::from(&out))
}

/// Run the config at `path`.
pub fn run(path: &Path) -> Result<(), CliError> {
    let cfg: KernelsCfg = crate::config::load(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let doc = apply(&cfg, dir)?;
    let text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Config(e.to_string()))? + "\n";
    match &cfg.output {
        Some(p) => std::fs::write(dir.join(p), text)?,
        None => print!("{text}"),
    }
    Ok(())
}
