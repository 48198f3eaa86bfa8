//! `propagate`: propagator tables for one engine.

use crate::config::{build_theta, c, Engine, PropagateCfg};
use crate::error::CliError;
use crate::output::{write_json, Table};
use serde::Serialize;
use std::path::Path;
use wnprop::closedform::{circle_propagator, t_free, t_harmonic, PropagatorQuery};
use wnprop::dossmc::{doss_propagator, DossEstimate, DossOptions};
use wnprop::dyson::ahk::ahk_t_transform;
use wnprop::dyson::ks::{ks_harmonic_propagator, ks_propagator};
use wnprop::dyson::{SeriesOptions, SeriesReport};
use wnprop::Complex64;

/// Monte Carlo row of the JSON report.
#[derive(Debug, Serialize)]
pub struct DossRow {
    pub mean_re: f64,
    pub mean_im: f64,
    pub stderr: f64,
    pub k0_factor: Complex64,
    pub value: Complex64,
    pub bias: f64,
    pub n_paths: usize,
    pub n_steps: usize,
    pub verified: bool,
    pub warning: Option<String>,
}

impl From<&DossEstimate> for DossRow {
    fn from(e: &DossEstimate) -> Self {
        Self {
            mean_re: e.mean.re,
            mean_im: e.mean.im,
            stderr: e.stderr,
            k0_factor: e.k0_factor,
            value: e.value,
            bias: e.bias,
            n_paths: e.n_paths,
            n_steps: e.n_steps,
            verified: e.verified,
            warning: e.warning.clone(),
        }
    }
}

/// One row of the JSON report.
#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum RowReport {
    Closed { x: Vec<f64>, value: Complex64 },
    Series { x: Vec<f64>, report: SeriesReport },
    Doss { x: Vec<f64>, estimate: DossRow },
}

#[derive(Debug, Serialize)]
struct Report<'a> {
    engine: &'a str,
    t0: f64,
    t: f64,
    rows: Vec<RowReport>,
}

fn engine_name(e: Engine) -> &'static str {
    match e {
        Engine::Free => "free",
        Engine::Harmonic => "harmonic",
        Engine::Ks => "ks",
        Engine::KsHarmonic => "ks_harmonic",
        Engine::Ahk => "ahk",
        Engine::Doss => "doss",
        Engine::Circle => "circle",
    }
}

fn series_options(cfg: &PropagateCfg, base: SeriesOptions) -> SeriesOptions {
    SeriesOptions { tol: cfg.tol.unwrap_or(base.tol), order_cap: cfg.order_cap.unwrap_or(base.order_cap), ..base }
}

fn header(d: usize, extra: &[&str]) -> Vec<String> {
    let mut h: Vec<String> = if d == 1 { vec!["x".into()] } else { (1..=d).map(|k| format!("x{k}")).collect() };
    h.extend(["t", "re", "im", "err"].iter().map(|s| s.to_string()));
    h.extend(extra.iter().map(|s| s.to_string()));
    h
}

/// Evaluate every row; nothing is written unless all rows succeed.
pub fn run(cfg: &PropagateCfg, seed: Option<u64>, out: &Path) -> Result<(), CliError> {
    let base = cfg.query.build()?;
    let theta = build_theta(&cfg.xi)?;
    let ends = cfg.endpoints.clone().unwrap_or_else(|| vec![cfg.query.x.clone()]);
    let queries = ends
        .iter()
        .map(|x| {
            if x.len() != base.dim() {
                return Err(CliError::Config(format!("endpoint {x:?} does not have d = {} entries", base.dim())));
            }
            Ok(PropagatorQuery { x: x.clone(), ..base.clone() })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let d = base.dim();
    let seed = seed.or(cfg.seed);
    let (table, rows) = match cfg.engine {
        Engine::Free | Engine::Harmonic | Engine::Circle => {
            let mut table = Table::new(header(d, &[]));
            let mut rows = vec![];
            for q in &queries {
                let value = match cfg.engine {
                    Engine::Free => t_free(q, &theta)?,
                    Engine::Harmonic => t_harmonic(q, &theta)?,
                    _ => {
                        let circ = cfg.circle.as_ref().ok_or_else(|| CliError::Config("circle engine needs a `circle` section".into()))?;
                        if d != 1 || theta.len() > 1 {
                            return Err(CliError::Config("circle engine is one-dimensional".into()));
                        }
                        let coeffs: Vec<(i64, Complex64)> = circ.coeffs.iter().map(|&(l, re, im)| (l, Complex64::new(re, im))).collect();
                        circle_propagator(&coeffs, q.x[0], q.duration(), theta.first())?
                    }
                };
                table.push([q.x.clone(), vec![q.t, value.re, value.im, 0.0]].concat());
                rows.push(RowReport::Closed { x: q.x.clone(), value });
            }
            (table, rows)
        }
        Engine::Ks | Engine::KsHarmonic | Engine::Ahk => {
            let mut table = Table::new(header(d, &["tail_bound", "quad_error", "order"]));
            let mut rows = vec![];
            for q in &queries {
                let report = match cfg.engine {
                    Engine::Ks => {
                        if theta.len() > 1 {
                            return Err(CliError::Config("ks engine takes at most one xi component".into()));
                        }
                        ks_propagator(q, &cfg.measure.space_time()?, theta.first(), &series_options(cfg, SeriesOptions::ks()))?
                    }
                    Engine::KsHarmonic => {
                        if !theta.is_empty() {
                            return Err(CliError::Config("ks_harmonic engine takes no xi".into()));
                        }
                        ks_harmonic_propagator(q, &cfg.measure.space_time()?, &series_options(cfg, SeriesOptions::ks()))?
                    }
                    _ => ahk_t_transform(q, &cfg.measure.fourier()?, &theta, &series_options(cfg, SeriesOptions::ahk()))?,
                };
                let v = report.value;
                table.push([q.x.clone(), vec![q.t, v.re, v.im, report.error, report.tail_bound, report.quad_error, report.order() as f64]].concat());
                rows.push(RowReport::Series { x: q.x.clone(), report });
            }
            (table, rows)
        }
        Engine::Doss => {
            let dc = cfg.doss.as_ref().ok_or_else(|| CliError::Config("doss engine needs a `doss` section".into()))?;
            if !theta.is_empty() {
                return Err(CliError::Config("doss engine takes no xi".into()));
            }
            let v = dc.potential()?;
            let mut opts = DossOptions::new(0);
            opts.seed = seed;
            opts.n_paths = dc.n_paths;
            opts.n_steps = dc.n_steps;
            if let Some(z) = dc.z {
                opts.z = c(z);
            }
            let mut table = Table::new(header(d, &["bias", "mean_re", "mean_im", "k0_re", "k0_im"]));
            let mut rows = vec![];
            for q in &queries {
                let e = doss_propagator(q, &v, &opts)?;
                if let Some(w) = &e.warning {
                    eprintln!("warning: {w}");
                }
                table.push([q.x.clone(), vec![q.t, e.value.re, e.value.im, e.stderr, e.bias, e.mean.re, e.mean.im, e.k0_factor.re, e.k0_factor.im]].concat());
                rows.push(RowReport::Doss { x: q.x.clone(), estimate: DossRow::from(&e) });
            }
            (table, rows)
        }
    };
    std::fs::create_dir_all(out)?;
    table.write(&out.join("propagator.csv"))?;
    write_json(&out.join("report.json"), &Report { engine: engine_name(cfg.engine), t0: base.t0, t: base.t, rows })
}
