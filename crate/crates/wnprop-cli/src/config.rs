//! JSON experiment configs; every struct rejects unknown keys.

use crate::error::CliError;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use std::path::Path;
use wnprop::closedform::{GridFunction, PropagatorQuery};
use wnprop::dossmc::{AnalyticPotential, DossParams, Potential};
use wnprop::dyson::ahk::{FourierAtom, FourierMeasure};
use wnprop::dyson::ks::{Kick, SpaceTimeMeasure, SpatialAtom};
use wnprop::Complex64;

/// Read and parse a config file.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Complex number as `[re, im]`.
pub type C = [f64; 2];

pub fn c(v: C) -> Complex64 {
    Complex64::new(v[0], v[1])
}

/// `{d, x0, x, t0, t, k?}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryCfg {
    pub d: usize,
    pub x0: Vec<f64>,
    pub x: Vec<f64>,
    #[serde(default)]
    pub t0: f64,
    pub t: f64,
    pub k: Option<f64>,
}

impl QueryCfg {
    pub fn build(&self) -> Result<PropagatorQuery, CliError> {
        if self.x0.len() != self.d || self.x.len() != self.d {
            return Err(CliError::Config(format!("query: x0 and x must have d = {} entries", self.d)));
        }
        Ok(PropagatorQuery::new(self.x0.clone(), self.x.clone(), self.t0, self.t, self.k)?)
    }
}

/// Time-smeared spatial atom `{x, w, profile?}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomCfg {
    pub x: f64,
    pub w: C,
    #[serde(default)]
    pub profile: Vec<C>,
}

/// Atom in space and time `{x, t, w}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KickCfg {
    pub x: f64,
    pub t: f64,
    pub w: C,
}

/// Polynomial density Σc_k y^k on [lo, hi] discretised into `n` atoms.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityCfg {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub coeffs: Vec<C>,
}

/// Fourier atom `{alpha, w, kick?}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierAtomCfg {
    pub alpha: Vec<f64>,
    pub w: C,
    pub kick: Option<f64>,
}

/// `{atoms?, kicks?, density?, fourier_atoms?}`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureCfg {
    #[serde(default)]
    pub atoms: Vec<AtomCfg>,
    #[serde(default)]
    pub kicks: Vec<KickCfg>,
    pub density: Option<DensityCfg>,
    #[serde(default)]
    pub fourier_atoms: Vec<FourierAtomCfg>,
}

impl MeasureCfg {
    pub fn space_time(&self) -> Result<SpaceTimeMeasure, CliError> {
        if !self.fourier_atoms.is_empty() {
            return Err(CliError::Config("fourier_atoms belong to the ahk engine".into()));
        }
        let mut m = match &self.density {
            Some(d) => {
                let coeffs: Vec<Complex64> = d.coeffs.iter().map(|&v| c(v)).collect();
                SpaceTimeMeasure::from_density(|y| coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, k| acc * y + k), d.lo, d.hi, d.n)?
            }
            None => SpaceTimeMeasure::default(),
        };
        m.atoms.extend(self.atoms.iter().map(|a| SpatialAtom { x: a.x, weight: c(a.w), profile: a.profile.iter().map(|&v| c(v)).collect() }));
        m.kicks = self.kicks.iter().map(|k| Kick { x: k.x, t: k.t, weight: c(k.w) }).collect();
        Ok(m)
    }

    pub fn fourier(&self) -> Result<FourierMeasure, CliError> {
        if !self.atoms.is_empty() || !self.kicks.is_empty() || self.density.is_some() {
            return Err(CliError::Config("the ahk engine takes fourier_atoms only".into()));
        }
        let atoms = self.fourier_atoms.iter().map(|a| FourierAtom { alpha: a.alpha.clone(), weight: c(a.w), kick: a.kick }).collect();
        Ok(FourierMeasure::new(atoms)?)
    }
}

/// Test function on a uniform grid `{grid: [t0, t1], values, derivs}`; one entry per
/// space dimension.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XiCfg {
    pub grid: [f64; 2],
    pub values: Vec<C>,
    pub derivs: Vec<C>,
}

impl XiCfg {
    pub fn build(&self) -> Result<GridFunction, CliError> {
        Ok(GridFunction::new(self.grid[0], self.grid[1], self.values.iter().map(|&v| c(v)).collect(), self.derivs.iter().map(|&v| c(v)).collect())?)
    }
}

pub fn build_theta(xi: &[XiCfg]) -> Result<Vec<GridFunction>, CliError> {
    xi.iter().map(XiCfg::build).collect()
}

/// Built-in potentials for the Monte Carlo engine.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase", deny_unknown_fields)]
pub enum PotentialCfg {
    Zero,
    Harmonic { k: f64 },
    Cosine { g: f64, k: Vec<f64> },
    Polynomial { coeffs: Vec<f64> },
}

/// `{potential, domain, doss_params?, n_paths, n_steps, z?}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DossCfg {
    pub potential: PotentialCfg,
    pub domain: Vec<[f64; 2]>,
    pub doss_params: Option<DossParamsCfg>,
    #[serde(default = "default_paths")]
    pub n_paths: usize,
    #[serde(default = "default_steps")]
    pub n_steps: usize,
    pub z: Option<C>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DossParamsCfg {
    pub a: f64,
    pub b: f64,
}

fn default_paths() -> usize {
    100_000
}

fn default_steps() -> usize {
    wnprop::dossmc::DEFAULT_STEPS
}

impl DossCfg {
    pub fn potential(&self) -> Result<AnalyticPotential, CliError> {
        let domain: Vec<(f64, f64)> = self.domain.iter().map(|r| (r[0], r[1])).collect();
        let mut v = match &self.potential {
            PotentialCfg::Zero => AnalyticPotential::zero(domain)?,
            PotentialCfg::Harmonic { k } => AnalyticPotential::harmonic(*k, domain)?,
            PotentialCfg::Cosine { g, k } => AnalyticPotential::cosine(*g, k.clone(), domain)?,
            PotentialCfg::Polynomial { coeffs } => AnalyticPotential::new(Potential::Polynomial { coeffs: coeffs.clone() }, domain, None)?,
        };
        if let Some(p) = self.doss_params {
            v = AnalyticPotential::new(v.v, v.domain, Some(DossParams { a: p.a, b: p.b }))?;
        }
        Ok(v)
    }
}

/// Circle state `{coeffs: [[l, re, im], ...]}`; the angle is the query's x.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleCfg {
    pub coeffs: Vec<(i64, f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Free,
    Harmonic,
    Ks,
    KsHarmonic,
    Ahk,
    Doss,
    Circle,
}

/// `propagate` config.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagateCfg {
    pub engine: Engine,
    pub query: QueryCfg,
    /// Additional end points, one table row each; defaults to `query.x`.
    pub endpoints: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub measure: MeasureCfg,
    #[serde(default)]
    pub xi: Vec<XiCfg>,
    pub doss: Option<DossCfg>,
    pub circle: Option<CircleCfg>,
    pub tol: Option<f64>,
    pub order_cap: Option<usize>,
    pub seed: Option<u64>,
}
