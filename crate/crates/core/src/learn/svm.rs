//! One-vs-rest RBF soft-margin machines trained by SMO.
//!
//! The solver follows the usual decomposition scheme: each iteration picks
//! the maximal violating index `i` and the partner `j` with the largest
//! second-order gain, then solves the two-variable problem analytically.
//! Kernel rows are computed on demand and shared by all ten machines.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{argmax, describe, Design};
use crate::error::{Error, Result};
use crate::types::TerrainClass;

/// Curvature used when a pair has non-positive curvature.
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub c: f64,
    /// KKT violation tolerance.
    pub tol: f64,
    pub max_iter: usize,
    /// Fixed RBF width; `None` uses `1 / (d * Var(X))`.
    pub gamma: Option<f64>,
    /// Record the dual objective after every iteration.
    pub trace_objective: bool,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            tol: 1e-3,
            max_iter: 1_000_000,
            gamma: None,
            trace_objective: false,
        }
    }
}

impl SvmParams {
    pub fn describe(&self) -> BTreeMap<String, String> {
        describe([
            ("c", self.c.to_string()),
            ("kernel", "rbf".into()),
            ("gamma", self.gamma.map_or("scale".into(), |g| g.to_string())),
            ("decision", "one_vs_rest".into()),
            ("tol", self.tol.to_string()),
        ])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Machine {
    /// Positive class code.
    pub class: usize,
    /// `(support vector index, alpha * y)`.
    pub coef: Vec<(usize, f64)>,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub gamma: f64,
    pub d: usize,
    /// Row-major support vectors shared by the machines.
    pub support: Vec<f64>,
    pub machines: Vec<Machine>,
}

/// Diagnostics of one binary machine.
#[derive(Debug, Clone, PartialEq)]
pub struct MachineFit {
    pub class: usize,
    pub alpha: Vec<f64>,
    pub iterations: usize,
    /// Dual objective `sum(alpha) - alpha' Q alpha / 2`, if traced.
    pub objective: Vec<f64>,
}

/// `1 / (d * Var(X))` over every entry of the design.
pub fn scale_gamma(x: &Design) -> f64 {
    let n = x.x.len() as f64;
    let mean = x.x.iter().sum::<f64>() / n;
    let var = x.x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    if var > 0.0 {
        1.0 / (x.d as f64 * var)
    } else {
        1.0
    }
}

pub fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    libm::exp(-gamma * super::knn::sq_dist(a, b))
}

struct KernelCache<'a> {
    x: &'a Design,
    gamma: f64,
    rows: Vec<Option<Vec<f64>>>,
}

impl KernelCache<'_> {
    fn row(&mut self, i: usize) -> &[f64] {
        if self.rows[i].is_none() {
            let xi = self.x.row(i);
            let row = (0..self.x.n).map(|j| rbf(xi, self.x.row(j), self.gamma)).collect();
            self.rows[i] = Some(row);
        }
        self.rows[i].as_deref().unwrap()
    }
}

/// Solve one binary problem with labels `y` in {-1, +1}.
fn solve(
    cache: &mut KernelCache<'_>,
    y: &[f64],
    params: &SvmParams,
    class: usize,
) -> Result<(MachineFit, f64)> {
    let n = y.len();
    let c = params.c;
    let mut alpha = vec![0.0; n];
    // gradient of f(a) = a'Qa/2 - e'a
    let mut grad = vec![-1.0; n];
    let mut objective = Vec::new();
    let up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let low = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);
    let mut iter = 0;
    loop {
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            if up(alpha[t], y[t]) && -y[t] * grad[t] >= gmax {
                if -y[t] * grad[t] > gmax || i == usize::MAX {
                    gmax = -y[t] * grad[t];
                    i = t;
                }
            }
        }
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best_gain = f64::INFINITY;
        if i != usize::MAX {
            let ki = cache.row(i).to_vec();
            for t in 0..n {
                if !low(alpha[t], y[t]) {
                    continue;
                }
                gmax2 = gmax2.max(y[t] * grad[t]);
                let b = gmax + y[t] * grad[t];
                if b > 0.0 {
                    let mut a = ki[i] + 1.0 - 2.0 * ki[t];
                    if a <= 0.0 {
                        a = TAU;
                    }
                    let gain = -(b * b) / a;
                    if gain <= best_gain {
                        if gain < best_gain || j == usize::MAX {
                            best_gain = gain;
                            j = t;
                        }
                    }
                }
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax + gmax2 < params.tol {
            break;
        }
        if iter >= params.max_iter {
            return Err(Error::SvmNotConverged {
                class,
                iterations: iter,
                violation: gmax + gmax2,
            });
        }
        iter += 1;

        let ki = cache.row(i).to_vec();
        let kj = cache.row(j).to_vec();
        let (old_i, old_j) = (alpha[i], alpha[j]);
        // Q_ij = y_i y_j K_ij, and K_ii = 1 for the RBF kernel
        let qij = y[i] * y[j] * ki[j];
        if y[i] != y[j] {
            let mut quad = 2.0 + 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = 2.0 - 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * ki[t] * di + y[j] * kj[t] * dj);
        }
        if params.trace_objective {
            objective.push(-0.5 * alpha.iter().zip(&grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>());
        }
    }

    // bias from free vectors, or the middle of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / n_free as f64
    } else if ub.is_infinite() {
        lb
    } else if lb.is_infinite() {
        ub
    } else {
        (ub + lb) / 2.0
    };
    Ok((
        MachineFit {
            class,
            alpha,
            iterations: iter,
            objective,
        },
        rho,
    ))
}

/// Train all one-vs-rest machines. Returns the model and per-class diagnostics.
pub fn fit(train: &Design, params: &SvmParams) -> Result<(SvmModel, Vec<MachineFit>)> {
    if train.n == 0 {
        return Err(Error::EmptyDataset);
    }
    if train.classes_present() < 2 {
        return Err(Error::InvalidParameter("SVM needs at least two classes".into()));
    }
    if !(params.c > 0.0 && params.tol > 0.0) {
        return Err(Error::InvalidParameter("C and tol must be positive".into()));
    }
    let gamma = params.gamma.unwrap_or_else(|| scale_gamma(train));
    let mut cache = KernelCache {
        x: train,
        gamma,
        rows: vec![None; train.n],
    };
    let mut sv_index: BTreeMap<usize, usize> = BTreeMap::new();
    let mut machines = Vec::with_capacity(TerrainClass::COUNT);
    let mut fits = Vec::with_capacity(TerrainClass::COUNT);
    for class in 0..TerrainClass::COUNT {
        let y: Vec<f64> = train.y.iter().map(|&c| if c == class { 1.0 } else { -1.0 }).collect();
        let (fit, rho) = solve(&mut cache, &y, params, class)?;
        let mut coef = Vec::new();
        for (t, &a) in fit.alpha.iter().enumerate() {
            if a > 0.0 {
                let next = sv_index.len();
                let slot = *sv_index.entry(t).or_insert(next);
                coef.push((slot, a * y[t]));
            }
        }
        machines.push(Machine { class, coef, rho });
        fits.push(fit);
    }
    let mut rows: Vec<(usize, usize)> = sv_index.into_iter().map(|(row, slot)| (slot, row)).collect();
    rows.sort_unstable();
    let mut support = Vec::with_capacity(rows.len() * train.d);
    for (_, row) in rows {
        support.extend_from_slice(train.row(row));
    }
    Ok((
        SvmModel {
            gamma,
            d: train.d,
            support,
            machines,
        },
        fits,
    ))
}

impl SvmModel {
    pub fn decision_values(&self, x: &[f64]) -> Vec<f64> {
        let k: Vec<f64> = self.support.chunks(self.d).map(|sv| rbf(sv, x, self.gamma)).collect();
        self.machines
            .iter()
            .map(|m| m.coef.iter().map(|&(s, c)| c * k[s]).sum::<f64>() - m.rho)
            .collect()
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        self.machines[argmax(&self.decision_values(x))].class
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_toy_set() {
        let x = vec![-2.0, -2.0, -1.5, -2.5, 2.0, 2.0, 2.5, 1.5];
        let design = Design::new(x, vec![0, 0, 1, 1], 2);
        let params = SvmParams { trace_objective: true, ..Default::default() };
        let (m, fits) = fit(&design, &params).unwrap();
        for i in 0..4 {
            assert_eq!(m.predict(design.row(i)), design.y[i]);
        }
        for f in &fits {
            assert!(f.alpha.iter().all(|a| (0.0..=1.0).contains(a)));
            assert!(f.objective.windows(2).all(|w| w[1] >= w[0] - 1e-9));
        }
    }

    #[test]
    fn needs_two_classes() {
        let design = Design::new(vec![0.0, 1.0], vec![3, 3], 1);
        assert!(fit(&design, &SvmParams::default()).is_err());
    }
}
