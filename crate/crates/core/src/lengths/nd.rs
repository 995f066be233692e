use std::collections::HashSet;

use serde::Serialize;

use super::Length;
use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::linalg::sym_eigen;

pub const MAX_SAMPLE: usize = 512;

#[derive(Clone, Debug, Serialize)]
pub struct NdReport {
    pub kind: String,
    pub sample_size: usize,
    pub lambda_max: f64,
    pub tol: f64,
    pub pass: bool,
    /// Eigenvector of the projected Gram matrix for `lambda_max`.
    pub witness: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SchoenbergRecord {
    pub t: f64,
    pub lambda_min: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SchoenbergReport {
    pub kind: String,
    pub sample_size: usize,
    pub tol: f64,
    pub records: Vec<SchoenbergRecord>,
}

impl SchoenbergReport {
    pub fn pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }
}

/// `D_ij = d(g_i^-1 g_j)`, after checking the sample and the symmetry of `d`
/// on it.
fn distance_matrix(d: &Length, sample: &[GroupElement]) -> Result<Vec<f64>> {
    let n = sample.len();
    if n == 0 {
        return Err(Error::InvalidSample("sample is empty".into()));
    }
    if n > MAX_SAMPLE {
        return Err(Error::InvalidSample(format!("{n} elements, at most {MAX_SAMPLE} allowed")));
    }
    let g = d.group();
    let mut seen = HashSet::new();
    for x in sample {
        g.check(x)?;
        if !seen.insert(x) {
            return Err(Error::InvalidSample(format!("{x} appears twice")));
        }
    }
    let inv: Vec<GroupElement> = sample.iter().map(|x| g.inv(x)).collect();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = d.eval_at(&g.mul(&inv[i], &sample[j]), None)?;
        }
    }
    for i in 0..n {
        for j in 0..i {
            let (a, b) = (m[i * n + j], m[j * n + i]);
            if a != b {
                let element = g.mul(&inv[i], &sample[j]).to_string();
                return Err(Error::AsymmetricLength { element, forward: a, backward: b });
            }
        }
    }
    Ok(m)
}

/// Finite-sample negative definiteness: `lambda_max(P D P) <= tol` where
/// `P` projects onto vectors with zero sum.
pub fn gram_nd_check(d: &Length, sample: &[GroupElement], tol: f64) -> Result<NdReport> {
    let dm = distance_matrix(d, sample)?;
    let n = sample.len();
    let row: Vec<f64> = (0..n).map(|i| dm[i * n..(i + 1) * n].iter().sum::<f64>() / n as f64).collect();
    let total = row.iter().sum::<f64>() / n as f64;
    // (PDP)_ij = D_ij - r_i - r_j + total, using symmetry of D
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            p[i * n + j] = dm[i * n + j] - row[i] - row[j] + total;
        }
    }
    let e = sym_eigen(&p, n);
    let lambda_max = e.max();
    Ok(NdReport {
        kind: d.spec().to_string(),
        sample_size: n,
        lambda_max,
        tol,
        pass: lambda_max <= tol,
        witness: e.vector(n - 1),
    })
}

/// Positive semidefiniteness of `[exp(-t d(g_i^-1 g_j))]` for each `t`.
pub fn schoenberg_psd_check(d: &Length, sample: &[GroupElement], t_grid: &[f64], tol: f64) -> Result<SchoenbergReport> {
    if let Some(t) = t_grid.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(Error::param(format!("Schoenberg times must be positive, got {t}")));
    }
    let dm = distance_matrix(d, sample)?;
    let n = sample.len();
    let records = t_grid
        .iter()
        .map(|&t| {
            let k: Vec<f64> = dm.iter().map(|v| (-t * v).exp()).collect();
            let lambda_min = sym_eigen(&k, n).min();
            SchoenbergRecord { t, lambda_min, pass: lambda_min >= -tol }
        })
        .collect();
    Ok(SchoenbergReport { kind: d.spec().to_string(), sample_size: n, tol, records })
}
