//! k-nearest neighbours over a kd-tree.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{describe, majority, Design};
use crate::error::{Error, Result};
use crate::types::TerrainClass;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnParams {
    pub k: usize,
    pub leaf_size: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        Self { k: 10, leaf_size: 30 }
    }
}

impl KnnParams {
    pub fn describe(&self) -> BTreeMap<String, String> {
        describe([
            ("k", self.k.to_string()),
            ("leaf_size", self.leaf_size.to_string()),
            ("metric", "minkowski_p2".into()),
            ("weights", "uniform".into()),
        ])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum KdNode {
    /// Points `order[start..end]`.
    Leaf { start: usize, end: usize },
    /// Left subtree holds values `<= value` along `dim`, right holds `>=`.
    Split { dim: usize, value: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub d: usize,
    /// Row-major training points.
    pub points: Vec<f64>,
    pub labels: Vec<usize>,
    /// Point indices in tree order.
    pub order: Vec<usize>,
    /// Node 0 is the root.
    pub nodes: Vec<KdNode>,
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let t = x - y;
        s += t * t;
    }
    s
}

pub fn fit(train: &Design, params: &KnnParams) -> Result<KnnModel> {
    if train.n == 0 {
        return Err(Error::EmptyDataset);
    }
    if params.k == 0 || params.k > train.n {
        return Err(Error::InvalidParameter(alloc::format!(
            "k = {} must lie in 1..={} (training rows)",
            params.k,
            train.n
        )));
    }
    if params.leaf_size == 0 {
        return Err(Error::InvalidParameter("leaf_size must be at least 1".into()));
    }
    let mut model = KnnModel {
        k: params.k,
        d: train.d,
        points: train.x.clone(),
        labels: train.y.clone(),
        order: (0..train.n).collect(),
        nodes: Vec::new(),
    };
    model.build(0, train.n, params.leaf_size);
    Ok(model)
}

impl KnnModel {
    fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.d..(i + 1) * self.d]
    }

    fn build(&mut self, start: usize, end: usize, leaf_size: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(KdNode::Leaf { start, end });
        if end - start <= leaf_size {
            return id;
        }
        // split along the dimension of largest spread
        let mut dim = 0;
        let mut spread = -1.0;
        for j in 0..self.d {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &i in &self.order[start..end] {
                let v = self.points[i * self.d + j];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if hi - lo > spread {
                spread = hi - lo;
                dim = j;
            }
        }
        if spread <= 0.0 {
            return id;
        }
        let d = self.d;
        let points = &self.points;
        let key = |i: &usize| (points[i * d + dim], *i);
        let mid = start + (end - start) / 2;
        self.order[start..end].select_nth_unstable_by(mid - start, |a, b| {
            let (ka, kb) = (key(a), key(b));
            ka.0.total_cmp(&kb.0).then(ka.1.cmp(&kb.1))
        });
        let value = self.points[self.order[mid] * d + dim];
        let left = self.build(start, mid, leaf_size);
        let right = self.build(mid, end, leaf_size);
        self.nodes[id] = KdNode::Split { dim, value, left, right };
        id
    }

    /// The k nearest training points as `(squared distance, index)`, ordered
    /// by distance and then index.
    pub fn neighbors(&self, q: &[f64]) -> Vec<(f64, usize)> {
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(self.k + 1);
        self.search(0, q, &mut best);
        best
    }

    fn offer(&self, best: &mut Vec<(f64, usize)>, cand: (f64, usize)) {
        let less = |a: &(f64, usize), b: &(f64, usize)| a.0 < b.0 || (a.0 == b.0 && a.1 < b.1);
        if best.len() == self.k && !less(&cand, &best[self.k - 1]) {
            return;
        }
        let pos = best.iter().position(|b| less(&cand, b)).unwrap_or(best.len());
        best.insert(pos, cand);
        best.truncate(self.k);
    }

    fn search(&self, node: usize, q: &[f64], best: &mut Vec<(f64, usize)>) {
        match self.nodes[node] {
            KdNode::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    self.offer(best, (sq_dist(q, self.point(i)), i));
                }
            }
            KdNode::Split { dim, value, left, right } => {
                let diff = q[dim] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.search(near, q, best);
                // equal distances may still win on index, so prune only on strict excess
                if best.len() < self.k || diff * diff <= best[self.k - 1].0 {
                    self.search(far, q, best);
                }
            }
        }
    }

    pub fn predict(&self, q: &[f64]) -> usize {
        let mut votes = [0usize; TerrainClass::COUNT];
        for (_, i) in self.neighbors(q) {
            votes[self.labels[i]] += 1;
        }
        majority(&votes)
    }
}

/// Exhaustive k-nearest search with the same ordering as the tree.
pub fn brute_force_neighbors(points: &[f64], d: usize, k: usize, q: &[f64]) -> Vec<(f64, usize)> {
    let n = points.len() / d;
    let mut all: Vec<(f64, usize)> = (0..n).map(|i| (sq_dist(q, &points[i * d..(i + 1) * d]), i)).collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    all.truncate(k);
    all
}
