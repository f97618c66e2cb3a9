//! Exact oracles: subset DP over bitmasks for OPT, min/max/distinct costs over
//! all trees, brute-force sparsest and densest cuts, and exhaustive tree
//! enumeration.

use alloc::{vec, vec::Vec};
use rand::Rng;

use crate::{
    graph::{Cut, Mode, WeightedGraph},
    objective::CostFunction,
    rng,
    tree::{ClusterTree, Node, NodeId, TreeBuilder},
    Error, Result,
};

pub const DEFAULT_OPT_LIMIT: usize = 16;
pub const HARD_OPT_LIMIT: usize = 20;
pub const ENUMERATE_LIMIT: usize = 10;
pub const BRUTE_CUT_LIMIT: usize = 24;
/// Distinct totals kept per subset by [`enumerate_tree_costs`].
pub const DISTINCT_CAP: usize = 64;

const TIE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Min,
    Max,
}

impl Direction {
    /// Minimize cost for similarity graphs, maximize value for dissimilarity.
    pub fn for_mode(mode: Mode) -> Direction {
        match mode {
            Mode::Similarity => Direction::Min,
            Mode::Dissimilarity => Direction::Max,
        }
    }

    fn better(self, a: f64, b: f64) -> bool {
        match self {
            Direction::Min => a < b,
            Direction::Max => a > b,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptResult {
    pub value: f64,
    pub tree: ClusterTree,
    /// OPT of every vertex subset, indexed by bitmask, when requested.
    pub table: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TreeCostSummary {
    pub min: f64,
    pub max: f64,
    /// Number of distinct tree costs (relative tolerance 1e-9). A lower bound
    /// when `saturated` is set.
    pub distinct_count: usize,
    pub saturated: bool,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Lexicographic order of two vertex sets given as bitmasks (as sorted
/// sequences).
pub(crate) fn lex_less(a: u64, b: u64) -> bool {
    if a == b {
        return false;
    }
    let x = (a ^ b) & (a ^ b).wrapping_neg();
    let above = !((x << 1).wrapping_sub(1));
    if a & x != 0 {
        // a holds x; b is smaller only if it ends before x
        b & above != 0
    } else {
        a & above == 0
    }
}

fn inner_weights(g: &WeightedGraph) -> Vec<f64> {
    let n = g.n();
    let mut inner = vec![0.0; 1usize << n];
    for mask in 1usize..1 << n {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        let row = g.row(low);
        let mut s = inner[rest];
        let mut r = rest;
        while r != 0 {
            let v = r.trailing_zeros() as usize;
            s += row[v];
            r &= r - 1;
        }
        inner[mask] = s;
    }
    inner
}

/// Exact OPT over all binary trees, with the default guard n ≤ 16.
pub fn exact_opt(cf: &CostFunction, g: &WeightedGraph, dir: Direction) -> Result<OptResult> {
    exact_opt_with(cf, g, dir, DEFAULT_OPT_LIMIT, false)
}

/// Exact OPT with an explicit size limit (capped at 20) and optionally the
/// full subset table.
///
/// OPT(S) = opt over (A, S∖A) of w(A, S∖A)·g(|A|,|S∖A|) + OPT(A) + OPT(S∖A),
/// with A containing min(S). Ties go to the lexicographically smallest A.
pub fn exact_opt_with(cf: &CostFunction, g: &WeightedGraph, dir: Direction, limit: usize, keep_table: bool) -> Result<OptResult> {
    let n = g.n();
    let limit = limit.min(HARD_OPT_LIMIT);
    if n > limit {
        return Err(Error::ResourceGuard { what: "exact_opt", n, limit });
    }
    if n == 0 {
        return Err(Error::invalid("exact_opt on an empty graph"));
    }
    if n > cf.n_max() {
        return Err(Error::TableRange { n, n_max: cf.n_max() });
    }
    let inner = inner_weights(g);
    let full = (1usize << n) - 1;
    let mut opt = vec![0.0; 1 << n];
    let mut choice = vec![0u32; 1 << n];
    for mask in 1usize..=full {
        let size = mask.count_ones() as usize;
        if size == 1 {
            continue;
        }
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        let mut best = f64::NAN;
        let mut best_a = 0usize;
        // Submasks of `rest` except `rest` itself, so B is never empty.
        let mut s = rest & (rest - 1);
        loop {
            let a = low | s;
            let b = mask ^ a;
            let sa = a.count_ones() as usize;
            let cut = inner[mask] - inner[a] - inner[b];
            let val = cut * cf.g(sa, size - sa) + opt[a] + opt[b];
            let take = best.is_nan()
                || (!close(val, best) && dir.better(val, best))
                || (close(val, best) && lex_less(a as u64, best_a as u64));
            if take {
                best = val;
                best_a = a;
            }
            if s == 0 {
                break;
            }
            s = (s - 1) & rest;
        }
        opt[mask] = best;
        choice[mask] = best_a as u32;
    }
    let tree = build_from_choice(&choice, full);
    Ok(OptResult { value: opt[full], tree, table: keep_table.then_some(opt) })
}

fn build_from_choice(choice: &[u32], full: usize) -> ClusterTree {
    let mut b = TreeBuilder::with_capacity(full.count_ones() as usize);
    let mut out: Vec<NodeId> = Vec::new();
    let mut stack = vec![(full, false)];
    while let Some((mask, expanded)) = stack.pop() {
        if mask.count_ones() == 1 {
            out.push(b.leaf(mask.trailing_zeros() as usize));
        } else if !expanded {
            let a = choice[mask] as usize;
            stack.push((mask, true));
            stack.push((mask ^ a, false));
            stack.push((a, false));
        } else {
            let r = out.pop().expect("right subtree");
            let l = out.pop().expect("left subtree");
            out.push(b.join(l, r));
        }
    }
    b.finish(out[0]).expect("DP builds a valid tree")
}

/// Minimum and maximum cost over all trees, plus the number of distinct costs.
pub fn enumerate_tree_costs(cf: &CostFunction, g: &WeightedGraph) -> Result<TreeCostSummary> {
    let n = g.n();
    if n > ENUMERATE_LIMIT {
        return Err(Error::ResourceGuard { what: "enumerate_tree_costs", n, limit: ENUMERATE_LIMIT });
    }
    if n == 0 {
        return Err(Error::invalid("enumerate_tree_costs on an empty graph"));
    }
    let lo = exact_opt_with(cf, g, Direction::Min, ENUMERATE_LIMIT, false)?;
    let hi = exact_opt_with(cf, g, Direction::Max, ENUMERATE_LIMIT, false)?;

    let inner = inner_weights(g);
    let full = (1usize << n) - 1;
    let mut sets: Vec<Vec<f64>> = vec![Vec::new(); 1 << n];
    let mut saturated = false;
    for mask in 1usize..=full {
        let size = mask.count_ones() as usize;
        if size == 1 {
            sets[mask] = vec![0.0];
            continue;
        }
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        let mut vals = Vec::new();
        let mut s = rest & (rest - 1);
        loop {
            let a = low | s;
            let b = mask ^ a;
            let sa = a.count_ones() as usize;
            let c = (inner[mask] - inner[a] - inner[b]) * cf.g(sa, size - sa);
            for &x in &sets[a] {
                for &y in &sets[b] {
                    vals.push(c + x + y);
                }
            }
            if s == 0 {
                break;
            }
            s = (s - 1) & rest;
        }
        vals.sort_by(f64::total_cmp);
        let mut distinct: Vec<f64> = Vec::new();
        for v in vals {
            match distinct.last() {
                Some(&last) if (v - last).abs() <= 1e-9 * v.abs().max(last.abs()).max(1.0) => {}
                _ => distinct.push(v),
            }
        }
        if distinct.len() > DISTINCT_CAP {
            saturated = true;
            distinct.truncate(DISTINCT_CAP);
        }
        sets[mask] = distinct;
    }
    Ok(TreeCostSummary { min: lo.value, max: hi.value, distinct_count: sets[full].len(), saturated })
}

/// Sparsest cut of a graph: argmin w(A,B)/(|A||B|). Ties go to the
/// lexicographically smallest side containing vertex 0, which is `side_a`.
pub fn brute_sparsest_cut(g: &WeightedGraph) -> Result<(Cut, f64)> {
    brute_cut(g, Direction::Min)
}

/// Densest cut: argmax w(A,B)/(|A||B|), same tie rule.
pub fn brute_densest_cut(g: &WeightedGraph) -> Result<(Cut, f64)> {
    brute_cut(g, Direction::Max)
}

/// Enumerates the 2^(n−1) − 1 cuts in Gray-code order, updating w(A,B) in
/// O(n) per step.
pub fn brute_cut(g: &WeightedGraph, dir: Direction) -> Result<(Cut, f64)> {
    let n = g.n();
    if n < 2 {
        return Err(Error::invalid("a cut needs at least two vertices"));
    }
    if n > BRUTE_CUT_LIMIT {
        return Err(Error::ResourceGuard { what: "brute-force cut", n, limit: BRUTE_CUT_LIMIT });
    }
    let rowsum: Vec<f64> = (0..n).map(|u| g.row(u).iter().sum()).collect();
    // to_a[y] = w(y, A); A starts as {0}.
    let mut to_a: Vec<f64> = g.row(0).to_vec();
    let mut mask: u64 = 1;
    let mut cut = rowsum[0];
    let mut size_a = 1usize;
    let mut best_mask = mask;
    let mut best = cut / (n - 1) as f64;
    for i in 1u64..(1u64 << (n - 1)) {
        let x = i.trailing_zeros() as usize + 1;
        let row = g.row(x);
        if mask & (1 << x) == 0 {
            // B -> A: edges to A stop crossing, edges to the rest of B start
            cut += (rowsum[x] - to_a[x]) - to_a[x];
            mask |= 1 << x;
            size_a += 1;
            for (t, w) in to_a.iter_mut().zip(row) {
                *t += w;
            }
        } else {
            cut += to_a[x] - (rowsum[x] - to_a[x]);
            mask &= !(1 << x);
            size_a -= 1;
            for (t, w) in to_a.iter_mut().zip(row) {
                *t -= w;
            }
        }
        if size_a == n {
            continue;
        }
        let r = cut / (size_a * (n - size_a)) as f64;
        if (!close(r, best) && dir.better(r, best)) || (close(r, best) && lex_less(mask, best_mask)) {
            best = r;
            best_mask = mask;
        }
    }
    let inside: Vec<bool> = (0..n).map(|u| best_mask & (1 << u) != 0).collect();
    let c = Cut::from_mask(&inside);
    // Recompute exactly instead of reporting the running sum.
    let ratio = c.ratio(g);
    Ok((c, ratio))
}

/// Calls `f` on every binary tree with leaves `0..n`, (2n−3)!! trees in all.
pub fn for_each_tree(n: usize, mut f: impl FnMut(&ClusterTree)) -> Result<()> {
    if n > ENUMERATE_LIMIT {
        return Err(Error::ResourceGuard { what: "tree enumeration", n, limit: ENUMERATE_LIMIT });
    }
    if n == 0 {
        return Err(Error::invalid("tree enumeration over zero leaves"));
    }
    let mut e = Enumerator { nodes: vec![Node::Leaf(0)], parent: vec![None], root: 0 };
    e.insert(1, n, &mut f);
    Ok(())
}

struct Enumerator {
    nodes: Vec<Node>,
    parent: Vec<Option<NodeId>>,
    root: NodeId,
}

impl Enumerator {
    fn insert(&mut self, next: usize, n: usize, f: &mut impl FnMut(&ClusterTree)) {
        if next == n {
            let t = ClusterTree::from_nodes(self.nodes.clone(), self.root).expect("enumerated tree is valid");
            f(&t);
            return;
        }
        let existing = self.nodes.len();
        for p in 0..existing {
            // Put a new internal node above `p` with children (p, next).
            let leaf = self.nodes.len();
            self.nodes.push(Node::Leaf(next));
            self.parent.push(None);
            let x = self.nodes.len();
            self.nodes.push(Node::Internal(p, leaf));
            let old_parent = self.parent[p];
            self.parent.push(old_parent);
            self.parent[p] = Some(x);
            self.parent[leaf] = Some(x);
            let old_root = self.root;
            match old_parent {
                Some(q) => self.replace_child(q, p, x),
                None => self.root = x,
            }

            self.insert(next + 1, n, f);

            match old_parent {
                Some(q) => self.replace_child(q, x, p),
                None => self.root = old_root,
            }
            self.parent[p] = old_parent;
            self.nodes.truncate(leaf);
            self.parent.truncate(leaf);
        }
    }

    fn replace_child(&mut self, q: NodeId, from: NodeId, to: NodeId) {
        if let Node::Internal(l, r) = &mut self.nodes[q] {
            if *l == from {
                *l = to;
            } else if *r == from {
                *r = to;
            }
        }
    }
}

/// Random tree on `0..n` built by merging two random clusters at a time.
pub fn random_tree(n: usize, seed: u64) -> ClusterTree {
    assert!(n >= 1, "random tree needs a leaf");
    let mut r = rng::seeded(seed);
    let mut b = TreeBuilder::with_capacity(n);
    let mut roots: Vec<NodeId> = (0..n).map(|v| b.leaf(v)).collect();
    while roots.len() > 1 {
        let i = r.random_range(0..roots.len());
        let a = roots.swap_remove(i);
        let j = r.random_range(0..roots.len());
        let c = roots.swap_remove(j);
        let id = if r.random_bool(0.5) { b.join(a, c) } else { b.join(c, a) };
        roots.push(id);
    }
    b.finish(roots[0]).expect("random tree is valid")
}

/// Random graph with integer weights in `1..=max_weight`, each pair present
/// with probability `p`.
pub fn random_graph(n: usize, mode: Mode, seed: u64, p: f64, max_weight: u32) -> WeightedGraph {
    let mut r = rng::seeded(seed);
    WeightedGraph::from_fn(n, mode, |_, _| if r.random_bool(p) { r.random_range(1..=max_weight) as f64 } else { 0.0 })
        .expect("integer weights are valid")
}
