//! The bi-infinite spine forest seen from its base point, with lattice positions.
//!
//! Spine node `i + 1` is the parent of spine node `i`; spine node 0 is the base
//! `v_0`, which carries an ordinary Galton-Watson subtree `T_0`. Spine node `i >= 1`
//! has `k+_i` subtrees after the spine child and `k-_i` before it, with
//! `P(k+ = a, k- = b) = mu(a + b + 1)`. Depth-first order of the whole forest gives the
//! indexing `v_i, i in Z`:
//!
//! * `v_1, v_2, ...` run through the rest of `T_0`, then the right subtrees of spine
//!   node 1, then those of spine node 2, and so on;
//! * `v_{-1}, v_{-2}, ...` run backwards through the left subtrees of spine node 1,
//!   then spine node 1 itself, then the left subtrees of spine node 2, and so on.
//!
//! Reversed depth-first order of a forest is post-order of its mirror image, and a
//! mirrored i.i.d. Galton-Watson forest has the same law, so the negative side is
//! generated directly in post-order. Both sides are materialized lazily.

use std::fmt::Write as _;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::laws::{OffspringLaw, StepLaw};
use crate::point::Point;
use crate::trees::{enumerate_small_trees, PlaneTree, RangeSet, TreeError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ForestError {
    #[error("index {index} is not materialized")]
    InsufficientMaterialization { index: i64 },
    #[error("forest exceeded the node ceiling ({materialized} nodes)")]
    CeilingExceeded { materialized: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Part {
    /// In `T_0`, the subtree of the base point.
    Base,
    /// A spine node.
    Spine,
    /// In a subtree after the spine child.
    Right,
    /// In a subtree before the spine child.
    Left,
}

/// Identifies a node by the spine node its subtree hangs from and its emission
/// order within that part.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct NodeId {
    pub spine: u32,
    pub part: Part,
    pub serial: u32,
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.part {
            Part::Base => write!(f, "B:{}", self.serial),
            Part::Spine => write!(f, "S{}", self.spine),
            Part::Right => write!(f, "R{}:{}", self.spine, self.serial),
            Part::Left => write!(f, "L{}:{}", self.spine, self.serial),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ForestNode {
    pub id: NodeId,
    pub pos: Point,
    /// Number of children; the degree is one more.
    pub offspring: u32,
}

impl ForestNode {
    pub fn degree(&self) -> u32 {
        self.offspring + 1
    }
}

#[derive(Clone, Copy, Debug)]
struct SpineLevel {
    right: u32,
    left: u32,
    pos: Point,
}

#[derive(Clone, Debug, Default)]
struct PreorderStream {
    stage: u32,
    started: bool,
    subtrees_left: u32,
    serial: u32,
    /// (children still to emit, position)
    stack: Vec<(u32, Point)>,
    /// Positive-side length when each stage finished.
    stage_end: Vec<usize>,
}

#[derive(Clone, Debug, Default)]
struct PostorderStream {
    stage: u32,
    subtrees_left: u32,
    spine_done: bool,
    serial: u32,
    /// (children still to generate, position, offspring)
    stack: Vec<(u32, Point, u32)>,
    stage_end: Vec<usize>,
}

/// Lazily materialized spine forest with positions.
#[derive(Clone, Debug)]
pub struct SpineForest {
    mu: OffspringLaw,
    theta: StepLaw,
    rng: ChaCha8Rng,
    ceiling: usize,
    spine: Vec<SpineLevel>,
    /// `v_0, v_1, ...`
    positive: Vec<ForestNode>,
    /// `v_{-1}, v_{-2}, ...`
    negative: Vec<ForestNode>,
    pre: PreorderStream,
    post: PostorderStream,
}

impl SpineForest {
    /// A forest with nothing materialized yet.
    pub fn new(mu: &OffspringLaw, theta: &StepLaw, rng: ChaCha8Rng, ceiling: usize) -> SpineForest {
        SpineForest {
            mu: mu.clone(),
            theta: theta.clone(),
            rng,
            ceiling,
            spine: vec![SpineLevel { right: 0, left: 0, pos: Point::ORIGIN }],
            positive: Vec::new(),
            negative: Vec::new(),
            pre: PreorderStream::default(),
            post: PostorderStream::default(),
        }
    }

    /// Materializes `v_{-left}, ..., v_{right}`.
    pub fn sample_window(
        mu: &OffspringLaw,
        theta: &StepLaw,
        left: usize,
        right: usize,
        rng: ChaCha8Rng,
        ceiling: usize,
    ) -> Result<SpineForest, ForestError> {
        let mut f = Self::new(mu, theta, rng, ceiling);
        f.extend(left, right)?;
        Ok(f)
    }

    /// Materializes `T_0` and every subtree hanging from spine nodes `1..=n`, together
    /// with those spine nodes.
    pub fn sample_spine(
        mu: &OffspringLaw,
        theta: &StepLaw,
        n: u32,
        rng: ChaCha8Rng,
        ceiling: usize,
    ) -> Result<SpineForest, ForestError> {
        let mut f = Self::new(mu, theta, rng, ceiling);
        f.complete_through(n)?;
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.theta.dim()
    }

    /// Ensures `v_{-left}` and `v_{right}` exist.
    pub fn extend(&mut self, left: usize, right: usize) -> Result<(), ForestError> {
        while self.positive.len() <= right {
            self.next_positive()?;
        }
        while self.negative.len() < left {
            self.next_negative()?;
        }
        Ok(())
    }

    /// Materializes whole subtrees of spine nodes `<= n` on both sides.
    pub fn complete_through(&mut self, n: u32) -> Result<(), ForestError> {
        while self.pre.stage_end.len() <= n as usize {
            self.next_positive()?;
        }
        while self.post.stage_end.len() < n as usize {
            self.next_negative()?;
        }
        Ok(())
    }

    /// Indices `(a, b)` such that `v_{-a}..=v_b` is exactly `T_0`, spine nodes
    /// `1..=n` and their subtrees, if materialized.
    pub fn spine_window(&self, n: u32) -> Option<(usize, usize)> {
        let b = *self.pre.stage_end.get(n as usize)?;
        let a = if n == 0 { 0 } else { *self.post.stage_end.get(n as usize - 1)? };
        Some((a, b - 1))
    }

    /// Number of materialized nodes on each side: `(left, right)` means indices
    /// `-left..=right` are available.
    pub fn materialized(&self) -> (usize, usize) {
        (self.negative.len(), self.positive.len().saturating_sub(1))
    }

    /// Number of spine nodes sampled so far, excluding the base.
    pub fn spine_len(&self) -> usize {
        self.spine.len() - 1
    }

    /// `(k+_i, k-_i)` of spine node `i >= 1`.
    pub fn spine_pair(&self, i: usize) -> Option<(u32, u32)> {
        (i >= 1).then(|| self.spine.get(i).map(|s| (s.right, s.left))).flatten()
    }

    pub fn node(&self, i: i64) -> Result<&ForestNode, ForestError> {
        let found = if i >= 0 { self.positive.get(i as usize) } else { self.negative.get((-i - 1) as usize) };
        found.ok_or(ForestError::InsufficientMaterialization { index: i })
    }

    pub fn position(&self, i: i64) -> Result<Point, ForestError> {
        Ok(self.node(i)?.pos)
    }

    /// `X_{-a}, ..., X_b`.
    pub fn window_positions(&self, a: usize, b: usize) -> Result<Vec<Point>, ForestError> {
        (-(a as i64)..=b as i64).map(|i| self.position(i)).collect()
    }

    /// `R[-a, b] = {X_{-a}, ..., X_b}`.
    pub fn window_range(&self, a: usize, b: usize) -> Result<RangeSet, ForestError> {
        Ok(RangeSet::from_points(self.dim(), self.window_positions(a, b)?))
    }

    /// Text dump of `v_{-a}..=v_b`: one line `index node-id coordinates...` per node.
    pub fn dump_window(&self, a: usize, b: usize) -> Result<String, ForestError> {
        let mut s = String::new();
        for i in -(a as i64)..=b as i64 {
            let n = self.node(i)?;
            writeln!(s, "{} {} {}", i, n.id, n.pos.display(self.dim())).unwrap();
        }
        Ok(s)
    }

    pub fn view(&self) -> ForestView<'_> {
        ForestView { forest: self, offset: 0, origin: Point::ORIGIN }
    }

    fn check_ceiling(&self) -> Result<(), ForestError> {
        let m = self.positive.len() + self.negative.len();
        if m >= self.ceiling {
            return Err(ForestError::CeilingExceeded { materialized: m });
        }
        Ok(())
    }

    fn ensure_spine(&mut self, i: u32) {
        while self.spine.len() <= i as usize {
            let (right, left) = self.mu.sample_spine_pair(&mut self.rng);
            let pos = self.spine.last().unwrap().pos + self.theta.sample(&mut self.rng);
            self.spine.push(SpineLevel { right, left, pos });
        }
    }

    fn next_positive(&mut self) -> Result<(), ForestError> {
        self.check_ceiling()?;
        let st = &mut self.pre;
        if !st.started {
            st.started = true;
            let k = self.mu.sample(&mut self.rng);
            st.stack.push((k, Point::ORIGIN));
            st.serial = 1;
            self.positive.push(ForestNode {
                id: NodeId { spine: 0, part: Part::Base, serial: 0 },
                pos: Point::ORIGIN,
                offspring: k,
            });
            return Ok(());
        }
        loop {
            let st = &mut self.pre;
            let parent_pos = match st.stack.last_mut() {
                Some(top) if top.0 > 0 => {
                    top.0 -= 1;
                    Some(top.1)
                }
                Some(_) => {
                    st.stack.pop();
                    continue;
                }
                None => None,
            };
            let parent_pos = match parent_pos {
                Some(p) => p,
                None if st.subtrees_left > 0 => {
                    st.subtrees_left -= 1;
                    self.spine[st.stage as usize].pos
                }
                None => {
                    if self.spine.len() + self.positive.len() + self.negative.len() >= self.ceiling {
                        return Err(ForestError::CeilingExceeded { materialized: self.positive.len() + self.negative.len() });
                    }
                    st.stage_end.push(self.positive.len());
                    st.stage += 1;
                    st.serial = 0;
                    let stage = st.stage;
                    self.ensure_spine(stage);
                    self.pre.subtrees_left = self.spine[stage as usize].right;
                    continue;
                }
            };
            let k = self.mu.sample(&mut self.rng);
            let pos = parent_pos + self.theta.sample(&mut self.rng);
            let st = &mut self.pre;
            st.stack.push((k, pos));
            let part = if st.stage == 0 { Part::Base } else { Part::Right };
            let id = NodeId { spine: st.stage, part, serial: st.serial };
            st.serial += 1;
            self.positive.push(ForestNode { id, pos, offspring: k });
            return Ok(());
        }
    }

    fn next_negative(&mut self) -> Result<(), ForestError> {
        self.check_ceiling()?;
        loop {
            let st = &mut self.post;
            if st.stage == 0 {
                st.stage = 1;
                self.ensure_spine(1);
                self.post.subtrees_left = self.spine[1].left;
                continue;
            }
            if let Some(top) = st.stack.last_mut() {
                if top.0 > 0 {
                    top.0 -= 1;
                    let parent_pos = top.1;
                    let k = self.mu.sample(&mut self.rng);
                    let pos = parent_pos + self.theta.sample(&mut self.rng);
                    self.post.stack.push((k, pos, k));
                    continue;
                }
                let (_, pos, k) = st.stack.pop().unwrap();
                let id = NodeId { spine: st.stage, part: Part::Left, serial: st.serial };
                st.serial += 1;
                self.negative.push(ForestNode { id, pos, offspring: k });
                return Ok(());
            }
            if st.subtrees_left > 0 {
                st.subtrees_left -= 1;
                let spine_pos = self.spine[st.stage as usize].pos;
                let k = self.mu.sample(&mut self.rng);
                let pos = spine_pos + self.theta.sample(&mut self.rng);
                self.post.stack.push((k, pos, k));
                continue;
            }
            if !st.spine_done {
                st.spine_done = true;
                let level = self.spine[st.stage as usize];
                let id = NodeId { spine: st.stage, part: Part::Spine, serial: 0 };
                self.negative.push(ForestNode { id, pos: level.pos, offspring: level.right + level.left + 1 });
                self.post.stage_end.push(self.negative.len());
                return Ok(());
            }
            st.stage += 1;
            st.spine_done = false;
            st.serial = 0;
            let stage = st.stage;
            self.ensure_spine(stage);
            self.post.subtrees_left = self.spine[stage as usize].left;
        }
    }

    /// The finite shape formed by `T_0`, spine nodes `1..=n` and their subtrees.
    pub fn prefix_shape(&self, n: u32) -> Option<ForestPrefix> {
        let (a, b) = self.spine_window(n)?;
        let positive: Vec<u32> = self.positive[..=b].iter().map(|v| v.offspring).collect();
        let negative: Vec<u32> = self.negative[..a].iter().map(|v| v.offspring).collect();
        let spine: Vec<(u32, u32)> = (1..=n as usize).map(|i| (self.spine[i].right, self.spine[i].left)).collect();
        Some(ForestPrefix { positive, negative, spine })
    }
}

/// A finite piece of a spine forest: the offspring counts of `T_0` and the right
/// subtrees of spine nodes `1..=n` in depth-first order, of the left subtrees and
/// spine nodes in emission order, and the spine pairs `(k+, k-)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ForestPrefix {
    pub positive: Vec<u32>,
    pub negative: Vec<u32>,
    pub spine: Vec<(u32, u32)>,
}

impl ForestPrefix {
    /// Assembles a prefix from explicit trees. `levels[i] = (left, right)` lists the
    /// subtrees of spine node `i + 1`.
    pub fn from_trees(base: &PlaneTree, levels: &[(Vec<PlaneTree>, Vec<PlaneTree>)]) -> ForestPrefix {
        let mut positive = base.offspring().to_vec();
        let mut negative = Vec::new();
        let mut spine = Vec::new();
        for (left, right) in levels {
            for t in right {
                positive.extend_from_slice(t.offspring());
            }
            // Emission order of a left subtree is post-order of its mirror image, which
            // reverses the depth-first order.
            for t in left.iter().rev() {
                negative.extend(t.offspring().iter().rev());
            }
            negative.push((left.len() + right.len() + 1) as u32);
            spine.push((right.len() as u32, left.len() as u32));
        }
        ForestPrefix { positive, negative, spine }
    }

    pub fn len(&self) -> usize {
        self.positive.len() + self.negative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Degrees of all nodes; each spine node contributes `k+ + k- + 2`.
    pub fn degrees(&self) -> Vec<u32> {
        self.positive.iter().chain(&self.negative).map(|k| k + 1).collect()
    }
}

/// `prod_u mu(deg(u) - 1)` over the nodes of the prefix.
pub fn cylinder_probability(shape: &ForestPrefix, mu: &OffspringLaw) -> f64 {
    shape.degrees().iter().map(|&d| mu.pmf(d as usize - 1)).product()
}

/// The forest re-indexed and re-centred at `v_offset`, without copying.
#[derive(Clone, Copy, Debug)]
pub struct ForestView<'a> {
    forest: &'a SpineForest,
    offset: i64,
    origin: Point,
}

impl<'a> ForestView<'a> {
    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn node(&self, i: i64) -> Result<ForestNode, ForestError> {
        let mut n = *self.forest.node(i + self.offset)?;
        n.pos = n.pos - self.origin;
        Ok(n)
    }

    pub fn position(&self, i: i64) -> Result<Point, ForestError> {
        Ok(self.node(i)?.pos)
    }

    /// Indices `(lo, hi)` available in this view.
    pub fn materialized(&self) -> (i64, i64) {
        let (l, r) = self.forest.materialized();
        (-(l as i64) - self.offset, r as i64 - self.offset)
    }
}

/// The shift `sigma`: index `i` of the result is index `i + 1` of the input, and
/// positions are re-centred so that the new base sits at the origin.
pub fn shift_sigma<'a>(view: &ForestView<'a>) -> Result<ForestView<'a>, ForestError> {
    let origin = view.forest.position(view.offset + 1)?;
    Ok(ForestView { forest: view.forest, offset: view.offset + 1, origin })
}

/// Every prefix with `levels` spine nodes and at most `max_nodes` nodes (spine nodes
/// included) that has positive probability under `mu`.
pub fn enumerate_prefixes(mu: &OffspringLaw, levels: usize, max_nodes: usize) -> Result<Vec<ForestPrefix>, TreeError> {
    if max_nodes < levels + 1 {
        return Ok(Vec::new());
    }
    let budget = max_nodes - levels;
    let mut by_size: Vec<Vec<PlaneTree>> = vec![Vec::new()];
    for s in 1..=budget {
        by_size.push(enumerate_small_trees(mu, s)?.into_iter().map(|(t, _)| t).collect());
    }
    // Ordered lists of trees with total size at most `budget`, grouped by total size.
    let mut lists: Vec<Vec<Vec<PlaneTree>>> = vec![vec![Vec::new()]];
    for total in 1..=budget {
        let mut here = Vec::new();
        for first in 1..=total {
            for t in &by_size[first] {
                for rest in &lists[total - first] {
                    let mut l = vec![t.clone()];
                    l.extend(rest.iter().cloned());
                    here.push(l);
                }
            }
        }
        lists.push(here);
    }
    fn rec(
        lists: &[Vec<Vec<PlaneTree>>],
        levels_left: usize,
        budget: usize,
        acc: &mut Vec<(Vec<PlaneTree>, Vec<PlaneTree>)>,
        out: &mut Vec<Vec<(Vec<PlaneTree>, Vec<PlaneTree>)>>,
    ) {
        if levels_left == 0 {
            out.push(acc.clone());
            return;
        }
        for a in 0..=budget {
            for b in 0..=budget - a {
                for left in &lists[a] {
                    for right in &lists[b] {
                        acc.push((left.clone(), right.clone()));
                        rec(lists, levels_left - 1, budget - a - b, acc, out);
                        acc.pop();
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    for s0 in 1..=budget {
        for base in &by_size[s0] {
            let mut level_sets = Vec::new();
            rec(&lists, levels, budget - s0, &mut Vec::new(), &mut level_sets);
            for lv in level_sets {
                let p = ForestPrefix::from_trees(base, &lv);
                if cylinder_probability(&p, mu) > 0.0 {
                    out.push(p);
                }
            }
        }
    }
    Ok(out)
}

/// Draws `(k+, k-)` pairs only, for checks of the spine law.
pub fn sample_spine_pairs<R: Rng + ?Sized>(mu: &OffspringLaw, n: usize, rng: &mut R) -> Vec<(u32, u32)> {
    (0..n).map(|_| mu.sample_spine_pair(rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn forest(seed: u64) -> SpineForest {
        let mu = OffspringLaw::geometric();
        let theta = StepLaw::simple(3).unwrap();
        SpineForest::sample_window(&mu, &theta, 40, 40, ChaCha8Rng::seed_from_u64(seed), 1 << 20).unwrap()
    }

    #[test]
    fn positions_follow_tree_edges() {
        let f = forest(1);
        assert_eq!(f.position(0).unwrap(), Point::ORIGIN);
        // Consecutive spine nodes are one step apart.
        for i in 1..f.spine_len() {
            let d = f.spine[i + 1].pos - f.spine[i].pos;
            assert_eq!(d.norm2(), 1);
        }
        assert!(matches!(f.node(41 + f.materialized().1 as i64), Err(ForestError::InsufficientMaterialization { .. })));
    }

    #[test]
    fn shift_is_exact_reindexing() {
        let f = forest(2);
        let v = f.view();
        let s = shift_sigma(&v).unwrap();
        let x1 = f.position(1).unwrap();
        let (lo, hi) = s.materialized();
        for i in lo..=hi {
            assert_eq!(s.position(i).unwrap(), f.position(i + 1).unwrap() - x1);
            assert_eq!(s.node(i).unwrap().id, f.node(i + 1).unwrap().id);
        }
        let s2 = shift_sigma(&s).unwrap();
        assert_eq!(s2.position(0).unwrap(), Point::ORIGIN);
        assert_eq!(s2.position(3).unwrap(), f.position(5).unwrap() - f.position(2).unwrap());
    }

    #[test]
    fn spine_window_contains_whole_subtrees() {
        let mu = OffspringLaw::geometric();
        let theta = StepLaw::simple(3).unwrap();
        let f = SpineForest::sample_spine(&mu, &theta, 3, ChaCha8Rng::seed_from_u64(9), 1 << 22).unwrap();
        let shape = f.prefix_shape(3).unwrap();
        let (a, b) = f.spine_window(3).unwrap();
        assert_eq!(shape.len(), a + b + 1);
        // The positive side is a forest of 1 + sum k+ trees in depth-first order.
        let roots = 1 + shape.spine.iter().map(|p| p.0 as i64).sum::<i64>();
        let excess: i64 = shape.positive.iter().map(|&k| k as i64 - 1).sum();
        assert_eq!(excess, -roots);
        // The negative side holds the left subtrees plus one spine node per level.
        let spine_nodes = (0..a).filter(|&j| f.negative[j].id.part == Part::Spine).count();
        assert_eq!(spine_nodes, 3);
        assert_eq!(f.negative[a - 1].id, NodeId { spine: 3, part: Part::Spine, serial: 0 });
    }

    #[test]
    fn base_move_preserves_cylinder_probability() {
        // t: base has one leaf child, spine node 1 has no extra subtrees.
        // t': the base moves to that leaf; the old base becomes spine node 1 with no
        // extra subtrees and the old spine node 1 becomes spine node 2.
        let mu = OffspringLaw::geometric();
        let t = ForestPrefix::from_trees(&PlaneTree::from_offspring(vec![1, 0]).unwrap(), &[(vec![], vec![])]);
        let leaf = PlaneTree::from_offspring(vec![0]).unwrap();
        let t2 = ForestPrefix::from_trees(&leaf, &[(vec![], vec![]), (vec![], vec![])]);
        assert_eq!(t.degrees().iter().sum::<u32>(), t2.degrees().iter().sum::<u32>());
        assert_eq!(cylinder_probability(&t, &mu), cylinder_probability(&t2, &mu));
        assert_eq!(cylinder_probability(&t, &mu), 0.25 * 0.5 * 0.25);
    }

    #[test]
    fn prefixes_are_distinct_and_sized() {
        let mu = OffspringLaw::geometric();
        let ps = enumerate_prefixes(&mu, 1, 4).unwrap();
        let mut sorted = ps.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), ps.len());
        assert!(ps.iter().all(|p| p.len() <= 4));
        // Smallest prefix: single-node base and a bare spine node.
        let min = ForestPrefix { positive: vec![0], negative: vec![1], spine: vec![(0, 0)] };
        assert!(ps.contains(&min));
        assert_eq!(cylinder_probability(&min, &mu), 0.5 * 0.25);
    }

    #[test]
    fn degenerate_law_gives_bare_spine() {
        let mu = OffspringLaw::from_pmf_any_mean(&[1.0]).unwrap();
        let theta = StepLaw::simple(3).unwrap();
        let f = SpineForest::sample_window(&mu, &theta, 10, 0, ChaCha8Rng::seed_from_u64(4), 1000).unwrap();
        for i in 1..=10 {
            assert_eq!(f.node(-i).unwrap().id.part, Part::Spine);
            assert_eq!(f.node(-i).unwrap().id.spine, i as u32);
        }
        // Everything after the base belongs to right subtrees, which never occur; the
        // positive side is just the base, so extending it must run into the ceiling.
        let mut g = SpineForest::new(&mu, &theta, ChaCha8Rng::seed_from_u64(4), 50);
        assert!(matches!(g.extend(0, 1), Err(ForestError::CeilingExceeded { .. })));
    }
}
