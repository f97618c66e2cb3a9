//! Dense symmetric weighted graphs and vertex cuts.

use alloc::{format, vec, vec::Vec};
use core::fmt;

use crate::{Error, Result};

/// Whether weights express similarity (cost, minimized) or dissimilarity
/// (value, maximized).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Similarity,
    Dissimilarity,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Similarity => "sim",
            Mode::Dissimilarity => "dis",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "sim" | "similarity" => Some(Mode::Similarity),
            "dis" | "dissimilarity" => Some(Mode::Dissimilarity),
            _ => None,
        }
    }

    pub fn flip(self) -> Mode {
        match self {
            Mode::Similarity => Mode::Dissimilarity,
            Mode::Dissimilarity => Mode::Similarity,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Symmetric nonnegative weights on `n` vertices, stored as a dense row-major
/// matrix with a zero diagonal. Weight zero means the edge is absent.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    w: Vec<f64>,
    mode: Mode,
}

fn check_weight(u: usize, v: usize, w: f64) -> Result<()> {
    if !w.is_finite() || w < 0.0 {
        return Err(Error::invalid(format!("weight of ({u}, {v}) must be finite and nonnegative, got {w}")));
    }
    Ok(())
}

impl WeightedGraph {
    /// Graph on `n` vertices without edges.
    pub fn new(n: usize, mode: Mode) -> Self {
        WeightedGraph { n, w: vec![0.0; n * n], mode }
    }

    pub fn from_edges(n: usize, mode: Mode, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut g = WeightedGraph::new(n, mode);
        for &(u, v, w) in edges {
            g.set_weight(u, v, w)?;
        }
        Ok(g)
    }

    /// Builds the graph from `f(u, v)` evaluated once for every `u < v`.
    pub fn from_fn(n: usize, mode: Mode, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut g = WeightedGraph::new(n, mode);
        for u in 0..n {
            for v in u + 1..n {
                g.set_weight(u, v, f(u, v))?;
            }
        }
        Ok(g)
    }

    /// Unit clique on `n` vertices.
    pub fn clique(n: usize, mode: Mode) -> Self {
        let mut g = WeightedGraph::new(n, mode);
        for u in 0..n {
            for v in 0..n {
                if u != v {
                    g.w[u * n + v] = 1.0;
                }
            }
        }
        g
    }

    pub fn set_weight(&mut self, u: usize, v: usize, w: f64) -> Result<()> {
        if u >= self.n || v >= self.n {
            return Err(Error::invalid(format!("edge ({u}, {v}) out of range for n = {}", self.n)));
        }
        if u == v {
            return Err(Error::invalid(format!("self-loop at {u}")));
        }
        check_weight(u, v, w)?;
        self.w[u * self.n + v] = w;
        self.w[v * self.n + u] = w;
        Ok(())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    /// # Panics
    /// If either vertex is out of range.
    #[inline]
    pub fn weight(&self, u: usize, v: usize) -> f64 {
        assert!(u < self.n && v < self.n, "vertex out of range");
        self.w[u * self.n + v]
    }

    #[inline]
    pub fn row(&self, u: usize) -> &[f64] {
        &self.w[u * self.n..(u + 1) * self.n]
    }

    /// Sum of all edge weights, each unordered pair once.
    pub fn total_weight(&self) -> f64 {
        let mut s = 0.0;
        for u in 0..self.n {
            for v in u + 1..self.n {
                s += self.w[u * self.n + v];
            }
        }
        s
    }

    /// Pairs `u < v` with positive weight.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                let w = self.w[u * self.n + v];
                if w > 0.0 {
                    out.push((u, v, w));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    /// Largest weight over all pairs, zero for graphs with fewer than two vertices.
    pub fn max_weight(&self) -> f64 {
        self.w.iter().copied().fold(0.0, f64::max)
    }

    /// Σ_{u∈a, v∈b} w(u, v). The sets must be disjoint.
    pub fn cut_weight(&self, a: &[usize], b: &[usize]) -> Result<f64> {
        let mut mark = vec![false; self.n];
        for &u in a {
            self.check_vertex(u)?;
            mark[u] = true;
        }
        for &v in b {
            self.check_vertex(v)?;
            if mark[v] {
                return Err(Error::Precondition(format!("vertex {v} is on both sides of the cut")));
            }
        }
        Ok(self.cross_sum(a, b))
    }

    /// Cross sum without the disjointness check.
    pub(crate) fn cross_sum(&self, a: &[usize], b: &[usize]) -> f64 {
        let mut s = 0.0;
        for &u in a {
            let row = self.row(u);
            for &v in b {
                s += row[v];
            }
        }
        s
    }

    /// Weight over unordered pairs inside `a`.
    ///
    /// # Panics
    /// If a vertex is out of range.
    pub fn inner_weight(&self, a: &[usize]) -> f64 {
        let mut s = 0.0;
        for (i, &u) in a.iter().enumerate() {
            let row = self.row(u);
            for &v in &a[i + 1..] {
                s += row[v];
            }
        }
        s
    }

    /// Subgraph on `s` together with the map from new to old indices
    /// (`map[new] = old`).
    pub fn induced_subgraph(&self, s: &[usize]) -> Result<(WeightedGraph, Vec<usize>)> {
        if s.is_empty() {
            return Err(Error::invalid("induced subgraph of an empty vertex set"));
        }
        let mut seen = vec![false; self.n];
        for &u in s {
            self.check_vertex(u)?;
            if seen[u] {
                return Err(Error::invalid(format!("vertex {u} repeated")));
            }
            seen[u] = true;
        }
        Ok((self.induced_unchecked(s), s.to_vec()))
    }

    pub(crate) fn induced_unchecked(&self, s: &[usize]) -> WeightedGraph {
        let m = s.len();
        let mut w = vec![0.0; m * m];
        for (i, &u) in s.iter().enumerate() {
            let row = self.row(u);
            for (j, &v) in s.iter().enumerate() {
                w[i * m + j] = row[v];
            }
        }
        WeightedGraph { n: m, w, mode: self.mode }
    }

    /// Every weight multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Result<WeightedGraph> {
        check_weight(0, 0, lambda)?;
        let w = self.w.iter().map(|x| x * lambda).collect();
        Ok(WeightedGraph { n: self.n, w, mode: self.mode })
    }

    /// Graph with vertex `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<WeightedGraph> {
        check_permutation(perm, self.n)?;
        let mut g = WeightedGraph::new(self.n, self.mode);
        for u in 0..self.n {
            for v in 0..self.n {
                g.w[perm[u] * self.n + perm[v]] = self.w[u * self.n + v];
            }
        }
        Ok(g)
    }

    fn check_vertex(&self, u: usize) -> Result<()> {
        if u >= self.n {
            return Err(Error::invalid(format!("vertex {u} out of range for n = {}", self.n)));
        }
        Ok(())
    }
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::invalid(format!("permutation has length {}, expected {n}", perm.len())));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::invalid("not a permutation"));
        }
        seen[p] = true;
    }
    Ok(())
}

/// A bipartition of the vertex set into two nonempty sides, each kept sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cut {
    pub side_a: Vec<usize>,
    pub side_b: Vec<usize>,
}

impl Cut {
    /// Validates that the sides are disjoint, nonempty and cover `0..n`.
    pub fn new(mut side_a: Vec<usize>, mut side_b: Vec<usize>, n: usize) -> Result<Cut> {
        if side_a.is_empty() || side_b.is_empty() {
            return Err(Error::invalid("both sides of a cut must be nonempty"));
        }
        side_a.sort_unstable();
        side_b.sort_unstable();
        let mut seen = vec![false; n];
        for &u in side_a.iter().chain(side_b.iter()) {
            if u >= n || seen[u] {
                return Err(Error::invalid(format!("vertex {u} out of range or repeated in cut")));
            }
            seen[u] = true;
        }
        if side_a.len() + side_b.len() != n {
            return Err(Error::invalid("cut sides do not cover the vertex set"));
        }
        Ok(Cut { side_a, side_b })
    }

    /// Cut with `side_a` given and the complement as `side_b`.
    pub fn from_side(side_a: &[usize], n: usize) -> Result<Cut> {
        let mut inside = vec![false; n];
        for &u in side_a {
            if u >= n {
                return Err(Error::invalid(format!("vertex {u} out of range for n = {n}")));
            }
            inside[u] = true;
        }
        let side_b = (0..n).filter(|&u| !inside[u]).collect();
        Cut::new(side_a.to_vec(), side_b, n)
    }

    pub(crate) fn from_mask(inside: &[bool]) -> Cut {
        let mut side_a = Vec::new();
        let mut side_b = Vec::new();
        for (u, &x) in inside.iter().enumerate() {
            if x {
                side_a.push(u);
            } else {
                side_b.push(u);
            }
        }
        Cut { side_a, side_b }
    }

    /// w(A, B) / (|A|·|B|): sparsity for similarity graphs, density for
    /// dissimilarity graphs.
    pub fn ratio(&self, g: &WeightedGraph) -> f64 {
        g.cross_sum(&self.side_a, &self.side_b) / (self.side_a.len() * self.side_b.len()) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn fix_2b() -> WeightedGraph {
        WeightedGraph::from_fn(4, Mode::Similarity, |u, v| if u / 2 == v / 2 { 3.0 } else { 1.0 }).unwrap()
    }

    fn fix_p4() -> WeightedGraph {
        WeightedGraph::from_edges(4, Mode::Similarity, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap()
    }

    #[test]
    fn cut_weight_examples() {
        assert_eq!(fix_2b().cut_weight(&[0, 1], &[2, 3]).unwrap(), 4.0);
        assert_eq!(fix_2b().cut_weight(&[2], &[]).unwrap(), 0.0);
        assert_eq!(fix_p4().cut_weight(&[0, 1], &[2, 3]).unwrap(), 1.0);
        assert!(matches!(fix_p4().cut_weight(&[0, 1], &[1, 2]), Err(Error::Precondition(_))));
    }

    #[test]
    fn inner_weight_examples() {
        assert_eq!(fix_2b().inner_weight(&[0, 1]), 3.0);
        assert_eq!(fix_2b().inner_weight(&[3]), 0.0);
        assert_eq!(fix_p4().inner_weight(&[0, 1, 2]), 2.0);
    }

    #[test]
    fn induced_examples() {
        let (h, map) = fix_2b().induced_subgraph(&[2, 3]).unwrap();
        assert_eq!((h.n(), h.weight(0, 1), map), (2, 3.0, vec![2, 3]));
        let (h, map) = fix_2b().induced_subgraph(&[0, 1, 2, 3]).unwrap();
        assert_eq!(h, fix_2b());
        assert_eq!(map, vec![0, 1, 2, 3]);
        let (h, _) = fix_p4().induced_subgraph(&[0, 2]).unwrap();
        assert_eq!(h.weight(0, 1), 0.0);
        assert!(fix_p4().induced_subgraph(&[]).is_err());
    }

    #[test]
    fn rejects_bad_weights() {
        let mut g = WeightedGraph::new(3, Mode::Similarity);
        assert!(g.set_weight(0, 0, 1.0).is_err());
        assert!(g.set_weight(0, 1, -1.0).is_err());
        assert!(g.set_weight(0, 1, f64::NAN).is_err());
        assert!(g.set_weight(0, 3, 1.0).is_err());
    }

    #[test]
    fn cut_ratio() {
        let c = Cut::from_side(&[0, 1], 4).unwrap();
        assert_eq!(c.side_b, vec![2, 3]);
        assert_eq!(c.ratio(&fix_p4()), 0.25);
        assert!(Cut::new(vec![0], vec![0, 1], 2).is_err());
        assert!(Cut::new(vec![], vec![0, 1], 2).is_err());
    }
}
