//! JSON document form of chaos vectors.

use super::{ChaosVector, SymKernel, WeightedBasis};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Basis section `{D, weights}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisDoc {
    #[serde(rename = "D")]
    pub d: usize,
    pub weights: Vec<f64>,
}

/// One coefficient `{multi_index, re, im}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryDoc {
    pub multi_index: Vec<u16>,
    pub re: f64,
    pub im: f64,
}

/// One kernel `{degree, entries}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelDoc {
    pub degree: usize,
    pub entries: Vec<EntryDoc>,
}

/// Whole vector `{basis, kernels}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorDoc {
    pub basis: BasisDoc,
    pub kernels: Vec<KernelDoc>,
}

impl From<&ChaosVector> for VectorDoc {
    fn from(v: &ChaosVector) -> Self {
        let kernels = v
            .kernels
            .iter()
            .map(|k| KernelDoc {
                degree: k.degree,
                entries: k
                    .coeffs
                    .iter()
                    .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
                    .map(|(m, c)| EntryDoc { multi_index: m.clone(), re: c.re, im: c.im })
                    .collect(),
            })
            .collect();
        VectorDoc {
            basis: BasisDoc { d: v.dim(), weights: v.basis.weights().to_vec() },
            kernels,
        }
    }
}

impl TryFrom<&VectorDoc> for ChaosVector {
    type Error = Error;

    fn try_from(doc: &VectorDoc) -> Result<Self> {
        if doc.basis.weights.len() != doc.basis.d {
            return Err(Error::invalid("basis D does not match weights"));
        }
        let basis = WeightedBasis::new(doc.basis.weights.clone())?;
        let n = doc.kernels.iter().map(|k| k.degree).max().unwrap_or(0);
        let mut v = ChaosVector::zero(&basis, n);
        for kd in &doc.kernels {
            let mut k = SymKernel::zero(basis.dim(), kd.degree);
            for e in &kd.entries {
                let deg: usize = e.multi_index.iter().map(|&x| x as usize).sum();
                if e.multi_index.len() != basis.dim() || deg != kd.degree {
                    return Err(Error::invalid(format!(
                        "multi-index {:?} does not match degree {}",
                        e.multi_index, kd.degree
                    )));
                }
                k.add_term(e.multi_index.clone(), Complex64::new(e.re, e.im));
            }
            v.kernels[kd.degree] = v.kernels[kd.degree].plus(&k);
        }
        Ok(v)
    }
}
