//! CART trees grown depth-first over presorted feature columns.
//!
//! Each feature keeps its node's rows in ascending value order; splitting a
//! node stably partitions those lists, so no node ever re-sorts.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::Design;
use crate::rng::SplitMix64;
use crate::types::TerrainClass;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    Gini,
    /// Squared error; leaves hold the weighted mean target.
    Mse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    /// Class code for classification trees, mean target for regression.
    Leaf(f64),
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf(v) => return v,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match t.nodes[i] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }
}

/// Gini impurity of weighted class counts.
pub fn gini(counts: &[f64]) -> f64 {
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|c| (c / total) * (c / total)).sum::<f64>()
}

/// Row indices of the design sorted by each feature (value, then row).
pub fn presort(x: &Design) -> Vec<Vec<u32>> {
    (0..x.d)
        .map(|j| {
            let mut idx: Vec<u32> = (0..x.n as u32).collect();
            idx.sort_by(|&a, &b| {
                x.x[a as usize * x.d + j]
                    .total_cmp(&x.x[b as usize * x.d + j])
                    .then(a.cmp(&b))
            });
            idx
        })
        .collect()
}

pub struct TreeSpec<'a> {
    pub criterion: Criterion,
    pub max_depth: Option<usize>,
    /// Features examined per split; `None` examines all.
    pub max_features: Option<usize>,
    /// Class codes (Gini) or targets (Mse) per design row.
    pub targets: &'a [f64],
    /// Row multiplicities; rows with weight 0 are left out.
    pub weights: &'a [f64],
}

struct Best {
    feature: usize,
    pos: usize,
    threshold: f64,
    score: f64,
}

struct Builder<'a> {
    x: &'a Design,
    spec: &'a TreeSpec<'a>,
    cols: Vec<Vec<u32>>,
    goes_left: Vec<bool>,
    scratch: Vec<u32>,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn value(&self, row: u32, j: usize) -> f64 {
        self.x.x[row as usize * self.x.d + j]
    }

    fn leaf_value(&self, lo: usize, hi: usize) -> (f64, bool) {
        let rows = &self.cols[0][lo..hi];
        match self.spec.criterion {
            Criterion::Gini => {
                let mut counts = [0.0; TerrainClass::COUNT];
                for &r in rows {
                    counts[self.spec.targets[r as usize] as usize] += self.spec.weights[r as usize];
                }
                let mut best = 0;
                for c in 1..counts.len() {
                    if counts[c] > counts[best] {
                        best = c;
                    }
                }
                let pure = counts.iter().filter(|c| **c > 0.0).count() <= 1;
                (best as f64, pure)
            }
            Criterion::Mse => {
                let (mut w, mut s) = (0.0, 0.0);
                let first = self.spec.targets[rows[0] as usize];
                let mut constant = true;
                for &r in rows {
                    let t = self.spec.targets[r as usize];
                    w += self.spec.weights[r as usize];
                    s += self.spec.weights[r as usize] * t;
                    constant &= t == first;
                }
                (s / w, constant)
            }
        }
    }

    /// Best split of `cols[j][lo..hi]` as (score, position, threshold), where
    /// a higher score means lower weighted child impurity.
    fn scan(&self, j: usize, lo: usize, hi: usize) -> Option<(f64, usize, f64)> {
        let rows = &self.cols[j][lo..hi];
        if self.value(rows[0], j) == self.value(rows[rows.len() - 1], j) {
            return None;
        }
        let w = self.spec.weights;
        let t = self.spec.targets;
        let mut best: Option<(f64, usize, f64)> = None;
        match self.spec.criterion {
            Criterion::Gini => {
                let mut right = [0.0; TerrainClass::COUNT];
                let mut wr = 0.0;
                for &r in rows {
                    right[t[r as usize] as usize] += w[r as usize];
                    wr += w[r as usize];
                }
                let mut left = [0.0; TerrainClass::COUNT];
                let mut sq_r: f64 = right.iter().map(|c| c * c).sum();
                let mut sq_l = 0.0;
                let mut wl = 0.0;
                for p in 0..rows.len() - 1 {
                    let r = rows[p] as usize;
                    let (c, wt) = (t[r] as usize, w[r]);
                    sq_l += (left[c] + wt) * (left[c] + wt) - left[c] * left[c];
                    sq_r += (right[c] - wt) * (right[c] - wt) - right[c] * right[c];
                    left[c] += wt;
                    right[c] -= wt;
                    wl += wt;
                    wr -= wt;
                    let (a, b) = (self.value(rows[p], j), self.value(rows[p + 1], j));
                    if a == b {
                        continue;
                    }
                    let score = sq_l / wl + sq_r / wr;
                    if best.map_or(true, |(s, _, _)| score > s) {
                        best = Some((score, p + 1, midpoint(a, b)));
                    }
                }
            }
            Criterion::Mse => {
                let (mut sr, mut wr) = (0.0, 0.0);
                for &r in rows {
                    sr += w[r as usize] * t[r as usize];
                    wr += w[r as usize];
                }
                let (mut sl, mut wl) = (0.0, 0.0);
                for p in 0..rows.len() - 1 {
                    let r = rows[p] as usize;
                    sl += w[r] * t[r];
                    sr -= w[r] * t[r];
                    wl += w[r];
                    wr -= w[r];
                    let (a, b) = (self.value(rows[p], j), self.value(rows[p + 1], j));
                    if a == b {
                        continue;
                    }
                    let score = sl * sl / wl + sr * sr / wr;
                    if best.map_or(true, |(s, _, _)| score > s) {
                        best = Some((score, p + 1, midpoint(a, b)));
                    }
                }
            }
        }
        best
    }

    fn find_split(&self, lo: usize, hi: usize, rng: &mut SplitMix64) -> Option<Best> {
        let d = self.x.d;
        let wanted = self.spec.max_features.unwrap_or(d).clamp(1, d);
        let mut order: Vec<usize> = (0..d).collect();
        let mut examined = 0;
        let mut best: Option<Best> = None;
        for i in 0..d {
            if wanted < d {
                // lazily draw the next feature of a random permutation
                let k = i + rng.below(d - i);
                order.swap(i, k);
            }
            let j = order[i];
            if let Some((score, pos, threshold)) = self.scan(j, lo, hi) {
                examined += 1;
                if best.as_ref().map_or(true, |b| score > b.score) {
                    best = Some(Best { feature: j, pos, threshold, score });
                }
            }
            // keep looking past `wanted` only while every feature seen was constant
            if examined >= wanted {
                break;
            }
        }
        best
    }

    fn partition(&mut self, lo: usize, hi: usize, best: &Best) {
        for &r in &self.cols[best.feature][lo..lo + best.pos] {
            self.goes_left[r as usize] = true;
        }
        for j in 0..self.x.d {
            if j == best.feature {
                continue;
            }
            self.scratch.clear();
            let col = &mut self.cols[j];
            let mut write = lo;
            for p in lo..hi {
                let r = col[p];
                if self.goes_left[r as usize] {
                    col[write] = r;
                    write += 1;
                } else {
                    self.scratch.push(r);
                }
            }
            col[write..hi].copy_from_slice(&self.scratch);
        }
        for &r in &self.cols[best.feature][lo..lo + best.pos] {
            self.goes_left[r as usize] = false;
        }
    }

    fn grow(&mut self, rng: &mut SplitMix64) {
        let n = self.cols[0].len();
        // (node id, lo, hi, depth)
        let mut stack = vec![(0usize, 0usize, n, 0usize)];
        self.nodes.push(Node::Leaf(0.0));
        while let Some((id, lo, hi, depth)) = stack.pop() {
            let (value, pure) = self.leaf_value(lo, hi);
            self.nodes[id] = Node::Leaf(value);
            if pure || hi - lo < 2 || self.spec.max_depth.is_some_and(|m| depth >= m) {
                continue;
            }
            let Some(best) = self.find_split(lo, hi, rng) else {
                continue;
            };
            self.partition(lo, hi, &best);
            let left = self.nodes.len();
            let right = left + 1;
            self.nodes.push(Node::Leaf(0.0));
            self.nodes.push(Node::Leaf(0.0));
            self.nodes[id] = Node::Split {
                feature: best.feature,
                threshold: best.threshold,
                left,
                right,
            };
            let mid = lo + best.pos;
            stack.push((right, mid, hi, depth + 1));
            stack.push((left, lo, mid, depth + 1));
        }
    }
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    // rounding can land the midpoint on `b`, which would send it left
    if m >= b {
        a
    } else {
        m
    }
}

/// Grow one tree. `sorted` comes from [`presort`] on the same design.
pub fn grow(x: &Design, sorted: &[Vec<u32>], spec: &TreeSpec<'_>, rng: &mut SplitMix64) -> Tree {
    let cols: Vec<Vec<u32>> = sorted
        .iter()
        .map(|col| col.iter().copied().filter(|&r| spec.weights[r as usize] > 0.0).collect())
        .collect();
    if cols.first().map_or(true, |c| c.is_empty()) {
        return Tree { nodes: vec![Node::Leaf(0.0)] };
    }
    let mut b = Builder {
        x,
        spec,
        cols,
        goes_left: vec![false; x.n],
        scratch: Vec::new(),
        nodes: Vec::new(),
    };
    b.grow(rng);
    Tree { nodes: b.nodes }
}
