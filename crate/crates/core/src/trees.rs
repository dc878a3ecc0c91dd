//! Galton-Watson plane trees, conditioned sampling, spatial embedding and ranges.

use rand::seq::SliceRandom;
use rand::Rng;
use rustc_hash::FxHashSet;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::laws::{OffspringLaw, StepLaw};
use crate::point::{BoundingBox, Point};

/// Budget of rejection attempts for conditioned sampling of generic laws.
pub const REJECTION_BUDGET: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TreeError {
    #[error("offspring sequence is not a valid depth-first encoding")]
    InvalidSequence,
    #[error("tree exceeded the node ceiling ({partial} nodes generated)")]
    CeilingExceeded { partial: usize },
    #[error("the law gives no tree with exactly {0} nodes")]
    InfeasibleSize(usize),
    #[error("no accepted sample after {0} attempts")]
    RejectionBudgetExhausted(usize),
    #[error("tree enumeration supports at most {max} nodes, got {n}")]
    TooLargeToEnumerate { n: usize, max: usize },
    #[error("parse error: {0}")]
    Parse(String),
}

const ROOT: u32 = u32::MAX;

/// A rooted ordered tree stored as its depth-first offspring sequence. Node 0 is the
/// root and nodes are numbered in depth-first (pre-)order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlaneTree {
    offspring: Vec<u32>,
    parent: Vec<u32>,
}

impl PlaneTree {
    /// Builds a tree from its depth-first offspring counts, checking that they encode
    /// exactly one tree.
    pub fn from_offspring(offspring: Vec<u32>) -> Result<PlaneTree, TreeError> {
        if offspring.is_empty() {
            return Err(TreeError::InvalidSequence);
        }
        let mut parent = Vec::with_capacity(offspring.len());
        // Stack of (node, children still to attach).
        let mut stack: Vec<(u32, u32)> = Vec::new();
        for (i, &k) in offspring.iter().enumerate() {
            if i > 0 {
                let top = stack.last_mut().ok_or(TreeError::InvalidSequence)?;
                parent.push(top.0);
                top.1 -= 1;
                if top.1 == 0 {
                    stack.pop();
                }
            } else {
                parent.push(ROOT);
            }
            if k > 0 {
                stack.push((i as u32, k));
            }
            if stack.is_empty() && i + 1 < offspring.len() {
                return Err(TreeError::InvalidSequence);
            }
        }
        if !stack.is_empty() {
            return Err(TreeError::InvalidSequence);
        }
        Ok(PlaneTree { offspring, parent })
    }

    pub fn len(&self) -> usize {
        self.offspring.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offspring.is_empty()
    }

    pub fn offspring(&self) -> &[u32] {
        &self.offspring
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        match self.parent[i] {
            ROOT => None,
            p => Some(p as usize),
        }
    }

    /// Depth of every node.
    pub fn depths(&self) -> Vec<u32> {
        let mut d = vec![0u32; self.len()];
        for i in 1..self.len() {
            d[i] = d[self.parent[i] as usize] + 1;
        }
        d
    }

    /// Number of nodes at each depth.
    pub fn generation_sizes(&self) -> Vec<usize> {
        let mut z = Vec::new();
        for d in self.depths() {
            let d = d as usize;
            if z.len() <= d {
                z.resize(d + 1, 0);
            }
            z[d] += 1;
        }
        z
    }

    /// `prod_u mu(k_u)`.
    pub fn probability(&self, mu: &OffspringLaw) -> f64 {
        self.offspring.iter().map(|&k| mu.pmf(k as usize)).product()
    }

    /// Text encoding: a header line `n` (or `n d` when positions follow), the
    /// offspring sequence on one line, then one line of coordinates per node.
    pub fn to_text(&self, positions: Option<(&[Point], usize)>) -> String {
        let mut s = match positions {
            Some((_, d)) => format!("{} {}\n", self.len(), d),
            None => format!("{}\n", self.len()),
        };
        s.push_str(&self.offspring.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(" "));
        s.push('\n');
        if let Some((pos, d)) = positions {
            for p in pos {
                s.push_str(&p.display(d));
                s.push('\n');
            }
        }
        s
    }

    /// Parses [`to_text`](Self::to_text) output. Lines starting with `#` are ignored.
    pub fn from_text(text: &str) -> Result<(PlaneTree, Option<(Vec<Point>, usize)>), TreeError> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let perr = |m: &str| TreeError::Parse(m.to_string());
        let header: Vec<usize> = lines
            .next()
            .ok_or_else(|| perr("missing header"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| perr("bad header")))
            .collect::<Result<_, _>>()?;
        let (n, dim) = match header.as_slice() {
            [n] => (*n, None),
            [n, d] => (*n, Some(*d)),
            _ => return Err(perr("header must be `n` or `n d`")),
        };
        let offspring: Vec<u32> = lines
            .next()
            .ok_or_else(|| perr("missing offspring line"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| perr("bad offspring count")))
            .collect::<Result<_, _>>()?;
        if offspring.len() != n {
            return Err(perr("offspring count does not match header"));
        }
        let tree = PlaneTree::from_offspring(offspring)?;
        let positions = match dim {
            None => None,
            Some(d) => {
                let pts: Vec<Point> = lines
                    .by_ref()
                    .take(n)
                    .map(|l| Point::parse(l).map_err(TreeError::Parse))
                    .collect::<Result<_, _>>()?;
                if pts.len() != n {
                    return Err(perr("missing positions"));
                }
                Some((pts, d))
            }
        };
        Ok((tree, positions))
    }
}

/// Unconditioned Galton-Watson tree, generated depth first. Fails once more than
/// `ceiling` nodes have been produced.
pub fn sample_gw<R: Rng + ?Sized>(mu: &OffspringLaw, rng: &mut R, ceiling: usize) -> Result<PlaneTree, TreeError> {
    let mut seq = Vec::new();
    let mut open: i64 = 1;
    while open > 0 {
        if seq.len() >= ceiling {
            return Err(TreeError::CeilingExceeded { partial: seq.len() });
        }
        let k = mu.sample(rng);
        seq.push(k);
        open += k as i64 - 1;
    }
    PlaneTree::from_offspring(seq)
}

/// Rotates a sequence with `sum (k_i - 1) = -1` to the unique rotation that encodes
/// a tree.
pub fn cycle_lemma_rotate(seq: &[u32]) -> Vec<u32> {
    let mut s = 0i64;
    let mut min = i64::MAX;
    let mut arg = 0;
    for (j, &k) in seq.iter().enumerate() {
        s += k as i64 - 1;
        if s < min {
            min = s;
            arg = j + 1;
        }
    }
    let arg = arg % seq.len().max(1);
    let mut out = seq[arg..].to_vec();
    out.extend_from_slice(&seq[..arg]);
    out
}

/// Whether `P(#T = n) > 0`: `n - 1` must be a sum of positive support points.
pub fn conditioned_size_feasible(mu: &OffspringLaw, n: usize) -> bool {
    if n == 0 {
        return false;
    }
    if mu.is_geometric() {
        return true;
    }
    let target = n - 1;
    if mu.pmf(0) == 0.0 {
        return false;
    }
    let parts: Vec<usize> = mu.support_up_to(target).into_iter().filter(|&k| k > 0).collect();
    let mut reach = vec![false; target + 1];
    reach[0] = true;
    for s in 1..=target {
        reach[s] = parts.iter().any(|&k| k <= s && reach[s - k]);
    }
    reach[target]
}

/// A Galton-Watson tree conditioned to have exactly `n` nodes.
///
/// The geometric law reduces to a uniform weak composition of `n - 1` into `n`
/// parts, and two-point laws `{0, k}` to a uniform arrangement; both are then rotated
/// by the cycle lemma. Other laws are sampled by rejection of `n` i.i.d. draws.
pub fn sample_gw_conditioned<R: Rng + ?Sized>(mu: &OffspringLaw, n: usize, rng: &mut R) -> Result<PlaneTree, TreeError> {
    if !conditioned_size_feasible(mu, n) {
        return Err(TreeError::InfeasibleSize(n));
    }
    let seq = if mu.is_geometric() {
        let mut marks = vec![false; 2 * n - 2];
        marks[..n - 1].iter_mut().for_each(|m| *m = true);
        marks.shuffle(rng);
        let mut seq = Vec::with_capacity(n);
        let mut run = 0u32;
        for bar in marks {
            if bar {
                seq.push(run);
                run = 0;
            } else {
                run += 1;
            }
        }
        seq.push(run);
        seq
    } else if let Some(k) = two_point_top(mu) {
        let big = (n - 1) / k;
        let mut seq = vec![0u32; n];
        seq[..big].iter_mut().for_each(|v| *v = k as u32);
        seq.shuffle(rng);
        seq
    } else {
        let mut found = None;
        for _ in 0..REJECTION_BUDGET {
            let seq: Vec<u32> = (0..n).map(|_| mu.sample(rng)).collect();
            if seq.iter().map(|&k| k as usize).sum::<usize>() == n - 1 {
                found = Some(seq);
                break;
            }
        }
        found.ok_or(TreeError::RejectionBudgetExhausted(REJECTION_BUDGET))?
    };
    PlaneTree::from_offspring(cycle_lemma_rotate(&seq))
}

/// `k` when the support of `mu` is exactly `{0, k}`.
fn two_point_top(mu: &OffspringLaw) -> Option<usize> {
    let m = mu.max_support()?;
    let support = mu.support_up_to(m);
    (support.len() == 2 && support[0] == 0).then_some(m)
}

/// All trees with `n` nodes and positive probability under `mu`, with their
/// probabilities.
pub fn enumerate_small_trees(mu: &OffspringLaw, n: usize) -> Result<Vec<(PlaneTree, f64)>, TreeError> {
    const MAX: usize = 9;
    if n > MAX {
        return Err(TreeError::TooLargeToEnumerate { n, max: MAX });
    }
    let mut out = Vec::new();
    let mut seq = Vec::with_capacity(n);
    forest_sequences(mu, n, 1, &mut seq, &mut |s| {
        let t = PlaneTree::from_offspring(s.to_vec()).expect("enumerated sequence is a tree");
        let p = t.probability(mu);
        out.push((t, p));
    });
    Ok(out)
}

/// Calls `f` on every offspring sequence of length `m` that encodes a forest of
/// `trees` trees and has positive probability.
pub fn forest_sequences(mu: &OffspringLaw, m: usize, trees: usize, seq: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
    // `open` counts nodes that are still to be generated, including future roots.
    fn rec(mu: &OffspringLaw, m: usize, open: usize, seq: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
        let left = m - seq.len();
        if left == 0 {
            if open == 0 {
                f(seq);
            }
            return;
        }
        if open == 0 || open > left {
            return;
        }
        for k in 0..=(left - open) {
            if mu.pmf(k) == 0.0 {
                continue;
            }
            seq.push(k as u32);
            rec(mu, m, open - 1 + k, seq, f);
            seq.pop();
        }
    }
    if trees == 0 {
        return;
    }
    rec(mu, m, trees, seq, f);
}

/// `P(a forest of n i.i.d. trees has m nodes in total) = (n/m) P(k_1 + ... + k_m = m - n)`.
pub fn kemperman_prob(mu: &OffspringLaw, n: usize, m: usize) -> f64 {
    if n == 0 || m < n {
        return 0.0;
    }
    (n as f64 / m as f64) * sum_of_iid_prob(mu, m, m - n)
}

/// `P(k_1 + ... + k_m = s)` for i.i.d. `k_i ~ mu`.
pub fn sum_of_iid_prob(mu: &OffspringLaw, m: usize, s: usize) -> f64 {
    if mu.is_geometric() {
        // Negative binomial: C(s + m - 1, s) 2^{-(s + m)}.
        let ln = ln_gamma((s + m) as f64) - ln_gamma((s + 1) as f64) - ln_gamma(m as f64)
            - (s + m) as f64 * std::f64::consts::LN_2;
        return ln.exp();
    }
    let pmf: Vec<f64> = (0..=s).map(|k| mu.pmf(k)).collect();
    let mut dist = vec![0.0; s + 1];
    dist[0] = 1.0;
    for _ in 0..m {
        let mut next = vec![0.0; s + 1];
        for (i, &a) in dist.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (k, &p) in pmf.iter().enumerate().take(s + 1 - i) {
                next[i + k] += a * p;
            }
        }
        dist = next;
    }
    dist[s]
}

/// A plane tree with a lattice position for every node. The root sits at the origin
/// and each edge carries an independent step.
#[derive(Clone, Debug)]
pub struct SpatialTree {
    pub tree: PlaneTree,
    pub positions: Vec<Point>,
    pub dim: usize,
}

impl SpatialTree {
    pub fn range(&self) -> RangeSet {
        RangeSet::from_points(self.dim, self.positions.iter().copied())
    }
}

pub fn embed<R: Rng + ?Sized>(tree: PlaneTree, theta: &StepLaw, rng: &mut R) -> SpatialTree {
    let mut positions = Vec::with_capacity(tree.len());
    positions.push(Point::ORIGIN);
    for i in 1..tree.len() {
        let p = positions[tree.parent[i] as usize] + theta.sample(rng);
        positions.push(p);
    }
    SpatialTree { tree, positions, dim: theta.dim() }
}

/// Embeds `tree` and returns the spatial tree with its range.
pub fn embed_and_range<R: Rng + ?Sized>(tree: PlaneTree, theta: &StepLaw, rng: &mut R) -> (SpatialTree, RangeSet) {
    let s = embed(tree, theta, rng);
    let r = s.range();
    (s, r)
}

/// A finite set of lattice points: distinct points in first-visit order plus a hash
/// index and bounding box for membership queries.
#[derive(Clone, Debug)]
pub struct RangeSet {
    dim: usize,
    points: Vec<Point>,
    index: FxHashSet<Point>,
    bbox: Option<BoundingBox>,
    visits: usize,
}

impl RangeSet {
    pub fn from_points(dim: usize, it: impl IntoIterator<Item = Point>) -> RangeSet {
        let mut points = Vec::new();
        let mut index = FxHashSet::default();
        let mut visits = 0;
        for p in it {
            visits += 1;
            if index.insert(p) {
                points.push(p);
            }
        }
        let bbox = BoundingBox::of(&points);
        RangeSet { dim, points, index, bbox, visits }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Number of distinct points.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of points fed in, counting repeats.
    pub fn visits(&self) -> usize {
        self.visits
    }

    pub fn bounding_box(&self) -> Option<BoundingBox> {
        self.bbox
    }

    #[inline]
    pub fn contains(&self, p: &Point) -> bool {
        match &self.bbox {
            Some(b) if b.contains(p) => self.index.contains(p),
            _ => false,
        }
    }

    pub fn translate(&self, v: Point) -> RangeSet {
        RangeSet::from_points(self.dim, self.points.iter().map(|&p| p + v))
    }

    /// One point per line, coordinates separated by spaces.
    pub fn to_text(&self) -> String {
        let mut s = format!("# {} points in dimension {}\n", self.len(), self.dim);
        for p in &self.points {
            s.push_str(&p.display(self.dim));
            s.push('\n');
        }
        s
    }

    /// Reads either a point list (one point per line) or a tree file with positions.
    pub fn from_text(text: &str) -> Result<RangeSet, TreeError> {
        let content: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).collect();
        let first = content.first().ok_or_else(|| TreeError::Parse("empty range file".into()))?;
        if first.split_whitespace().count() == 2 && content.len() >= 2 {
            if let Ok((_, Some((pts, d)))) = PlaneTree::from_text(text) {
                return Ok(RangeSet::from_points(d, pts));
            }
        }
        let pts: Vec<Point> = content.iter().map(|l| Point::parse(l).map_err(TreeError::Parse)).collect::<Result<_, _>>()?;
        let dim = content[0].split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).count();
        Ok(RangeSet::from_points(dim, pts))
    }
}
