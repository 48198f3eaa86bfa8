//! `verify`: invariant suites with a machine-readable pass/fail report.

use crate::config::{c, load, DossCfg, MeasureCfg, PotentialCfg, QueryCfg, XiCfg, C};
use crate::error::CliError;
use crate::output::{write_json, Table};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;
use wnprop::appell1d::{appell_p, biorthogonality, charlier_pairing, Density1D};
use wnprop::closedform::{donsker_series_s, free_kernel, harmonic_kernel, t_harmonic, GridFunction};
use wnprop::dossmc::{doss_propagator, DossOptions};
use wnprop::dyson::ahk::{ahk_propagator, ccr_check, ehrenfest_check, FourierMeasure};
use wnprop::dyson::SeriesOptions;
use wnprop::fock::factorial;
use wnprop::Complex64;

/// Registered suite names.
pub const SUITES: [&str; 6] = ["biorthogonality", "ccr", "ehrenfest", "schrodinger", "theta", "doss"];

/// One residual against its tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self { name: name.into(), residual, tolerance, passed: residual <= tolerance }
    }
}

/// Suite outcome.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum DensityKind {
    Gaussian { mean: f64, var: f64 },
    Quartic,
    Poisson { lambda: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct BiorthCfg {
    density: DensityKind,
    #[serde(default = "eight")]
    n_max: usize,
    tol: Option<f64>,
}

fn eight() -> usize {
    8
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct CcrCfg {
    query: QueryCfg,
    #[serde(default)]
    measure: MeasureCfg,
    s: f64,
    #[serde(default = "default_eps")]
    eps: Vec<f64>,
    #[serde(default)]
    k: usize,
    #[serde(default)]
    l: usize,
    #[serde(default = "ccr_tol")]
    tol: f64,
}

fn default_eps() -> Vec<f64> {
    vec![0.2, 0.1, 0.05]
}

fn ccr_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct EhrenfestCfg {
    query: QueryCfg,
    measure: MeasureCfg,
    s: f64,
    #[serde(default)]
    k: usize,
    #[serde(default = "ehrenfest_tol")]
    tol: f64,
}

fn ehrenfest_tol() -> f64 {
    1e-4
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Kernel {
    Free,
    Harmonic,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchrodingerCfg {
    kernel: Kernel,
    k: Option<f64>,
    x0: f64,
    #[serde(default)]
    t0: f64,
    /// (x, t) evaluation points.
    points: Vec<[f64; 2]>,
    xi: Option<XiCfg>,
    #[serde(default = "fd_step")]
    h: f64,
    #[serde(default = "ehrenfest_tol")]
    tol: f64,
}

fn fd_step() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ThetaCfg {
    eta: Vec<f64>,
    a: C,
    z: C,
    theta_pair: C,
    #[serde(default = "terms")]
    terms: i64,
    #[serde(default = "theta_tol")]
    tol: f64,
}

fn terms() -> i64 {
    200
}

fn theta_tol() -> f64 {
    1e-12
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Reference {
    Mehler,
    Ahk,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct DossVerifyCfg {
    query: QueryCfg,
    doss: DossCfg,
    reference: Reference,
    #[serde(default = "sigmas")]
    sigmas: f64,
    seed: Option<u64>,
}

fn sigmas() -> f64 {
    3.0
}

fn biorth(cfg: &BiorthCfg, out: Option<&Path>) -> Result<Vec<Check>, CliError> {
    let n_max = cfg.n_max;
    let mut table = Table::new(["n", "m", "value", "expected", "residual"].iter().map(|s| s.to_string()).collect());
    let mut checks = vec![];
    let (values, tol): (Box<dyn Fn(usize, usize) -> Result<(f64, f64), CliError>>, f64) = match &cfg.density {
        DensityKind::Poisson { lambda } => {
            let l = *lambda;
            (Box::new(move |n, m| Ok((charlier_pairing(n, m, l), if n == m { factorial(n) * l.powi(n as i32) } else { 0.0 }))), cfg.tol.unwrap_or(1e-10))
        }
        kind => {
            let mu = match kind {
                DensityKind::Gaussian { mean, var } => Density1D::gaussian(*mean, *var)?,
                _ => Density1D::quartic(),
            };
            let sys = appell_p(&mu, n_max)?;
            (Box::new(move |n, m| Ok((biorthogonality(&mu, &sys, n, m)?, if n == m { factorial(n) } else { 0.0 }))), cfg.tol.unwrap_or(1e-8))
        }
    };
    for n in 0..=n_max {
        for m in 0..=n_max {
            let (v, want) = values(n, m)?;
            let r = (v - want).abs();
            table.push(vec![n as f64, m as f64, v, want, r]);
            checks.push(Check::new(format!("Q{n}P{m}"), r, tol));
        }
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        table.write(&dir.join("biorthogonality.csv"))?;
    }
    Ok(checks)
}

fn ccr(cfg: &CcrCfg) -> Result<Vec<Check>, CliError> {
    let q = cfg.query.build()?;
    let m = cfg.measure.fourier()?;
    let r = ccr_check(&q, &m, cfg.s, &cfg.eps, cfg.k, cfg.l, &SeriesOptions::ahk())?;
    Ok(vec![Check::new("extrapolated_commutator", (r.extrapolated - r.expected).norm(), cfg.tol)])
}

fn ehrenfest(cfg: &EhrenfestCfg) -> Result<Vec<Check>, CliError> {
    let q = cfg.query.build()?;
    let m = cfg.measure.fourier()?;
    let r = ehrenfest_check(&q, &m, cfg.s, cfg.k, &SeriesOptions::ahk())?;
    let scale = r.propagator.norm();
    Ok(vec![
        Check::new("collapsed_relative_residual", r.residual.norm() / scale, cfg.tol),
        Check::new("difference_relative_residual", r.fd_residual.norm() / scale, cfg.tol),
    ])
}

fn schrodinger(cfg: &SchrodingerCfg) -> Result<Vec<Check>, CliError> {
    let xi: Option<GridFunction> = cfg.xi.as_ref().map(XiCfg::build).transpose()?;
    let k = match cfg.kernel {
        Kernel::Harmonic => Some(cfg.k.ok_or_else(|| CliError::Config("harmonic kernel needs k".into()))?),
        Kernel::Free => None,
    };
    let kern = |x: f64, t: f64| -> Result<Complex64, CliError> {
        Ok(match k {
            Some(k) => harmonic_kernel(k, cfg.x0, cfg.t0, x, t, xi.as_ref())?,
            None => free_kernel(cfg.x0, cfg.t0, x, t, xi.as_ref())?,
        })
    };
    let h = cfg.h;
    let mut checks = vec![];
    for &[x, t] in &cfg.points {
        let k0 = kern(x, t)?;
        let dt = (kern(x, t + h)? - kern(x, t - h)?) / (2.0 * h);
        let dxx = (kern(x + h, t)? - 2.0 * k0 + kern(x - h, t)?) / (h * h);
        let src = xi.as_ref().map_or(Complex64::new(0.0, 0.0), |g| g.deriv(t));
        let pot = k.map_or(0.0, |k| 0.5 * k * k * x * x);
        let res = Complex64::i() * dt + 0.5 * dxx - src * x * k0 - pot * k0;
        checks.push(Check::new(format!("residual(x={x},t={t})"), res.norm() / k0.norm(), cfg.tol));
    }
    Ok(checks)
}

fn theta(cfg: &ThetaCfg) -> Result<Vec<Check>, CliError> {
    let (a, z, tp) = (c(cfg.a), c(cfg.z), c(cfg.theta_pair));
    let s: f64 = cfg.eta.iter().map(|e| e * e).sum();
    let direct: Complex64 = (-cfg.terms..=cfg.terms)
        .map(|n| {
            let b = (a - n as f64) / z;
            (-(tp - b) * (tp - b) / (2.0 * s)).exp() * (2.0 * PI * s).powf(-0.5) / z
        })
        .sum();
    let series = donsker_series_s(&cfg.eta, a, z, tp)?;
    let shifted = donsker_series_s(&cfg.eta, a + 1.0, z, tp)?;
    let scale = direct.norm().max(1.0);
    Ok(vec![
        Check::new("theta_vs_direct_sum", (series - direct).norm() / scale, cfg.tol),
        Check::new("period_in_a", (series - shifted).norm() / scale, cfg.tol),
    ])
}

fn doss(cfg: &DossVerifyCfg, seed: Option<u64>) -> Result<Vec<Check>, CliError> {
    let q = cfg.query.build()?;
    let v = cfg.doss.potential()?;
    let mut opts = DossOptions::new(0);
    opts.seed = seed.or(cfg.seed);
    opts.n_paths = cfg.doss.n_paths;
    opts.n_steps = cfg.doss.n_steps;
    if let Some(z) = cfg.doss.z {
        opts.z = c(z);
    }
    let e = doss_propagator(&q, &v, &opts)?;
    let reference = match (cfg.reference, &cfg.doss.potential) {
        (Reference::Mehler, PotentialCfg::Harmonic { k }) => {
            let hq = wnprop::closedform::PropagatorQuery { k: Some(*k), ..q.clone() };
            t_harmonic(&hq, &[])?
        }
        (Reference::Ahk, PotentialCfg::Cosine { g, k }) => ahk_propagator(&q, &FourierMeasure::cosine(*g, k), &SeriesOptions::ahk())?.value,
        (Reference::Ahk, PotentialCfg::Zero) => ahk_propagator(&q, &FourierMeasure::default(), &SeriesOptions::ahk())?.value,
        _ => return Err(CliError::Config("reference does not match the potential (mehler: harmonic, ahk: cosine or zero)".into())),
    };
    let sd = e.stderr.max(f64::MIN_POSITIVE);
    Ok(vec![Check::new("mc_minus_reference_in_stderr", ((e.value - reference).norm() - e.bias).max(0.0) / sd, cfg.sigmas)])
}

/// Run `suite` on the config at `path`; unknown suites are config errors.
pub fn run(suite: &str, path: &Path, seed: Option<u64>, out: Option<&Path>) -> Result<SuiteReport, CliError> {
    let checks = match suite {
        "biorthogonality" => biorth(&load(path)?, out)?,
        "ccr" => ccr(&load(path)?)?,
        "ehrenfest" => ehrenfest(&load(path)?)?,
        "schrodinger" => schrodinger(&load(path)?)?,
        "theta" => theta(&load(path)?)?,
        "doss" => doss(&load(path)?, seed)?,
        other => return Err(CliError::Config(format!("unknown suite `{other}`; expected one of {}", SUITES.join(", ")))),
    };
    let report = SuiteReport { suite: suite.to_string(), passed: checks.iter().all(|c| c.passed), checks };
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        write_json(&dir.join(format!("verify_{suite}.json")), &report)?;
    }
    Ok(report)
}
