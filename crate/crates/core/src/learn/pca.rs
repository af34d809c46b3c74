//! Principal component projection of standardized features.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

use super::standardize::MIN_STD;

/// Eigenvalues (descending) and unit eigenvectors (`vectors[k]` pairs with
/// `values[k]`) of a symmetric matrix, by cyclic Jacobi rotations.
pub fn symmetric_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        let mut diag = 0.0;
        for i in 0..n {
            diag += m[i * n + i] * m[i * n + i];
            for j in i + 1..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                let (app, aqq) = (m[p * n + p], m[q * n + q]);
                // rounding-level couplings would only rotate within a degenerate space
                if apq.abs() <= 1e-13 * libm::sqrt(app.abs() * aqq.abs()) {
                    m[p * n + q] = 0.0;
                    m[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k * n + p], m[k * n + q]);
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p * n + k], m[q * n + k]);
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| m[b * n + b].total_cmp(&m[a * n + a]).then(a.cmp(&b)));
    let values = idx.iter().map(|&k| m[k * n + k]).collect();
    let vectors = idx
        .iter()
        .map(|&k| {
            let mut col: Vec<f64> = (0..n).map(|i| v[i * n + k]).collect();
            // fix the sign so the largest-magnitude entry is positive
            let big = col.iter().copied().fold(0.0_f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
            if big < 0.0 {
                col.iter_mut().for_each(|x| *x = -*x);
            }
            col
        })
        .collect();
    (values, vectors)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaResult {
    /// `rows x dims` projected coordinates.
    pub projection: Vec<Vec<f64>>,
    /// Variance along each kept component, non-increasing.
    pub explained_variance: Vec<f64>,
    /// Unit components over the full input width; constant inputs get 0.
    pub components: Vec<Vec<f64>>,
    /// Eigenvalues of all non-constant directions, descending.
    pub eigenvalues: Vec<f64>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl PcaResult {
    /// Mean squared distance between standardized rows and their
    /// reconstruction from the kept components.
    pub fn reconstruction_error(&self, rows: &[Vec<f64>]) -> f64 {
        let mut total = 0.0;
        for (r, p) in rows.iter().zip(&self.projection) {
            let z: Vec<f64> = r
                .iter()
                .enumerate()
                .map(|(j, v)| if self.std[j] > 0.0 { (v - self.mean[j]) / self.std[j] } else { 0.0 })
                .collect();
            for j in 0..z.len() {
                let rec: f64 = self.components.iter().zip(p).map(|(c, s)| c[j] * s).sum();
                total += (z[j] - rec) * (z[j] - rec);
            }
        }
        total / rows.len() as f64
    }
}

/// PCA of arbitrary rows of equal width. Constant columns are left out of
/// the covariance; `names` labels them in the error when too few remain.
pub fn pca(rows: &[Vec<f64>], dims: usize, names: &[String]) -> Result<PcaResult> {
    let n = rows.len();
    let width = rows.first().map_or(0, Vec::len);
    if dims == 0 || dims > width || n < dims {
        return Err(Error::InvalidParameter(alloc::format!(
            "PCA needs 1 <= dims <= width and rows >= dims (dims {dims}, width {width}, rows {n})"
        )));
    }
    if rows.iter().any(|r| r.len() != width || r.iter().any(|v| !v.is_finite())) {
        return Err(Error::NonFinite("PCA input"));
    }
    let mut mean = vec![0.0; width];
    for r in rows {
        for j in 0..width {
            mean[j] += r[j];
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut std = vec![0.0; width];
    for r in rows {
        for j in 0..width {
            std[j] += (r[j] - mean[j]) * (r[j] - mean[j]);
        }
    }
    std.iter_mut().for_each(|s| {
        *s = libm::sqrt(*s / n as f64);
        if *s < MIN_STD {
            *s = 0.0;
        }
    });
    let live: Vec<usize> = (0..width).filter(|&j| std[j] > 0.0).collect();
    if live.len() < dims {
        let constant = (0..width)
            .filter(|j| std[*j] == 0.0)
            .map(|j| names.get(j).cloned().unwrap_or_else(|| j.to_string()))
            .collect();
        return Err(Error::DegeneratePca { constant });
    }
    let m = live.len();
    let z: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| live.iter().map(|&j| (r[j] - mean[j]) / std[j]).collect())
        .collect();
    let mut cov = vec![0.0; m * m];
    for r in &z {
        for a in 0..m {
            let ra = r[a];
            for b in a..m {
                cov[a * m + b] += ra * r[b];
            }
        }
    }
    for a in 0..m {
        for b in a..m {
            let v = cov[a * m + b] / n as f64;
            cov[a * m + b] = v;
            cov[b * m + a] = v;
        }
    }
    let (eigenvalues, vectors) = symmetric_eigen(&cov, m);
    let components: Vec<Vec<f64>> = vectors[..dims]
        .iter()
        .map(|v| {
            let mut full = vec![0.0; width];
            for (k, &j) in live.iter().enumerate() {
                full[j] = v[k];
            }
            full
        })
        .collect();
    let projection = z
        .iter()
        .map(|r| vectors[..dims].iter().map(|v| v.iter().zip(r).map(|(a, b)| a * b).sum()).collect())
        .collect();
    Ok(PcaResult {
        projection,
        explained_variance: eigenvalues[..dims].iter().map(|v| v.max(0.0)).collect(),
        components,
        eigenvalues,
        mean,
        std,
    })
}

/// Project the dataset's standardized features onto the top `dims` components.
pub fn pca_project(ds: &Dataset, dims: usize) -> Result<PcaResult> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let rows: Vec<Vec<f64>> = ds.rows.iter().map(|r| r.values.clone()).collect();
    pca(&rows, dims, &ds.feature_names)
}
