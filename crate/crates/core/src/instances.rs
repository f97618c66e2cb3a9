//! Worst-case families: the unit path, the spine of attached paths and the
//! heavy-edge star, with reference trees, adversarial tie-break schedules and
//! growth-curve experiments.

use alloc::{format, vec, vec::Vec};

use crate::{
    divisive::{self, ExactBrute},
    exact::{self, Direction},
    graph::{Mode, WeightedGraph},
    linkage::{self, LinkageKind, LinkagePolicy, TieBreak},
    objective::CostFunction,
    tree::{ClusterTree, NodeId, TreeBuilder},
    Error, Result,
};

/// Unit edges between consecutive vertices, similarity mode.
pub fn make_path(n: usize) -> Result<WeightedGraph> {
    if n < 2 {
        return Err(Error::invalid(format!("path needs n ≥ 2, got {n}")));
    }
    WeightedGraph::from_fn(n, Mode::Similarity, |u, v| if v == u + 1 { 1.0 } else { 0.0 })
}

/// Vertex of the spine family: spine vertex `i`.
pub fn spine_vertex(i: usize) -> usize {
    i
}

/// Vertex `l` of the `j`-th path hanging off spine vertex `i`; `l = k−1` is
/// the end attached to the spine.
pub fn spine_path_vertex(k: usize, i: usize, j: usize, l: usize) -> usize {
    k + (i * k + j) * k + l
}

/// A spine path of `k` vertices, each carrying `k` paths of `k` vertices
/// attached by one end. n = k³ + k, similarity mode.
pub fn make_spine(k: usize) -> Result<WeightedGraph> {
    if k < 2 {
        return Err(Error::invalid(format!("spine needs k ≥ 2, got {k}")));
    }
    let n = k * k * k + k;
    let mut g = WeightedGraph::new(n, Mode::Similarity);
    for i in 0..k {
        if i + 1 < k {
            g.set_weight(i, i + 1, 1.0)?;
        }
        for j in 0..k {
            for l in 0..k - 1 {
                g.set_weight(spine_path_vertex(k, i, j, l), spine_path_vertex(k, i, j, l + 1), 1.0)?;
            }
            g.set_weight(spine_path_vertex(k, i, j, k - 1), i, 1.0)?;
        }
    }
    Ok(g)
}

/// Label of the heavy endpoint v1; the other heavy endpoint u is `n − 1`.
pub fn star_v1(n: usize) -> usize {
    n - 2
}

pub fn star_u(n: usize) -> usize {
    n - 1
}

/// Dissimilarity graph with all pairs 1 except w(v1, u) = `heavy` ≥ n³.
pub fn make_star(n: usize, heavy: f64) -> Result<WeightedGraph> {
    if n < 3 {
        return Err(Error::invalid(format!("star needs n ≥ 3, got {n}")));
    }
    let cube = (n as f64) * (n as f64) * (n as f64);
    if !(heavy >= cube && heavy.is_finite()) {
        return Err(Error::invalid(format!("star needs W ≥ n³ = {cube}, got {heavy}")));
    }
    let mut g = WeightedGraph::from_fn(n, Mode::Dissimilarity, |_, _| 1.0)?;
    g.set_weight(star_v1(n), star_u(n), heavy)?;
    Ok(g)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    Path { n: usize },
    Spine { k: usize },
    Star { n: usize, heavy: f64 },
}

impl Family {
    /// Builds the family for a size parameter: n for paths and stars
    /// (W = n³), k for spines.
    pub fn sized(name: &str, size: usize) -> Result<Family> {
        match name {
            "path" => Ok(Family::Path { n: size }),
            "spine" => Ok(Family::Spine { k: size }),
            "star" => Ok(Family::Star { n: size, heavy: (size * size * size) as f64 }),
            _ => Err(Error::invalid(format!("unknown family {name:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Path { .. } => "path",
            Family::Spine { .. } => "spine",
            Family::Star { .. } => "star",
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            Family::Path { n } | Family::Star { n, .. } => n,
            Family::Spine { k } => k * k * k + k,
        }
    }

    pub fn graph(&self) -> Result<WeightedGraph> {
        match *self {
            Family::Path { n } => make_path(n),
            Family::Spine { k } => make_spine(k),
            Family::Star { n, heavy } => make_star(n, heavy),
        }
    }

    /// Closed-form reference: an upper bound on OPT for the similarity
    /// families (n·log₂n, 3n^{4/3}) and the lower bound n·W on the star's
    /// optimal value.
    pub fn expected_opt_bound(&self) -> f64 {
        let n = self.n() as f64;
        match *self {
            Family::Path { .. } => n * libm::log2(n),
            Family::Spine { .. } => 3.0 * libm::pow(n, 4.0 / 3.0),
            Family::Star { heavy, .. } => n * heavy,
        }
    }

    /// The tree certifying `expected_opt_bound`: recursive halving for the
    /// path, the three-level spine tree (binarized with balanced joins) and
    /// the tree splitting u off at the root for the star.
    pub fn reference_tree(&self) -> Result<ClusterTree> {
        match *self {
            Family::Path { n } => ClusterTree::balanced(&(0..n).collect::<Vec<_>>()),
            Family::Spine { k } => {
                let mut b = TreeBuilder::with_capacity(self.n());
                let mut groups = Vec::with_capacity(k);
                for i in 0..k {
                    let mut parts = vec![b.leaf(spine_vertex(i))];
                    for j in 0..k {
                        let path: Vec<usize> = (0..k).map(|l| spine_path_vertex(k, i, j, l)).collect();
                        parts.push(b.graft(&ClusterTree::balanced(&path)?));
                    }
                    groups.push(join_balanced(&mut b, &parts));
                }
                let root = join_balanced(&mut b, &groups);
                b.finish(root)
            }
            Family::Star { n, .. } => {
                let rest = ClusterTree::balanced(&(0..n - 1).collect::<Vec<_>>())?;
                ClusterTree::union(&ClusterTree::leaf(star_u(n)), &rest)
            }
        }
    }

    /// Linkage policy reproducing the lower-bound run for `kind`, or `None`
    /// when the family has no adversarial schedule for it. Paths: complete
    /// linkage grows a caterpillar. Spine: average linkage first collapses
    /// every attached path and the spine into separate clusters. Star: single
    /// linkage (minimizing) merges v1 with v2, then u, so the heavy edge is
    /// resolved at a 3-leaf node; complete linkage merges by maximum.
    pub fn adversarial_policy(&self, kind: LinkageKind) -> Result<Option<LinkagePolicy>> {
        Ok(match (*self, kind) {
            (Family::Path { n }, LinkageKind::Complete) => {
                let script = (1..n).map(|v| (0, v)).collect();
                Some(LinkagePolicy::new(kind, Mode::Similarity).with_ties(TieBreak::Script(script)))
            }
            (Family::Spine { k }, LinkageKind::Average) => {
                Some(LinkagePolicy::new(kind, Mode::Similarity).with_ties(TieBreak::Script(spine_average_script(k)?)))
            }
            (Family::Star { n, .. }, LinkageKind::Single) => {
                let script = vec![(star_v1(n), 0), (star_v1(n), star_u(n))];
                Some(LinkagePolicy::new(kind, Mode::Dissimilarity).with_ties(TieBreak::Script(script)))
            }
            (Family::Star { .. }, LinkageKind::Complete) => Some(LinkagePolicy::new(kind, Mode::Similarity)),
            _ => None,
        })
    }
}

fn join_balanced(b: &mut TreeBuilder, ids: &[NodeId]) -> NodeId {
    match ids {
        [one] => *one,
        _ => {
            let (l, r) = ids.split_at(ids.len() / 2);
            let l = join_balanced(b, l);
            let r = join_balanced(b, r);
            b.join(l, r)
        }
    }
}

/// Ranks path vertices before spine vertices, each path from its attached
/// end outwards, and records the resulting average-linkage merges.
fn spine_average_script(k: usize) -> Result<Vec<(usize, usize)>> {
    let g = make_spine(k)?;
    let mut ranks = vec![0; g.n()];
    let mut next = 0;
    for i in 0..k {
        for j in 0..k {
            for l in (0..k).rev() {
                ranks[spine_path_vertex(k, i, j, l)] = next;
                next += 1;
            }
        }
    }
    for i in 0..k {
        ranks[spine_vertex(i)] = next;
        next += 1;
    }
    let policy = LinkagePolicy::new(LinkageKind::Average, Mode::Similarity).with_ties(TieBreak::Priority(ranks));
    let (_, trace) = linkage::linkage(&g, &policy)?;
    Ok(trace.steps.iter().map(|s| (s.a[0], s.b[0])).collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExperimentAlgo {
    /// Linkage with the family's adversarial schedule, or seeded priority
    /// ties when `adversarial` is false.
    Linkage { kind: LinkageKind, adversarial: bool },
    BisectionTwoCenter,
    /// Recursive exact sparsest cut, compared against `exact_opt`.
    ExactSparsestCut,
}

impl ExperimentAlgo {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentAlgo::Linkage { kind, .. } => kind.as_str(),
            ExperimentAlgo::BisectionTwoCenter => "bisection",
            ExperimentAlgo::ExactSparsestCut => "sparsest-exact",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioRow {
    pub instance: &'static str,
    pub n: usize,
    pub seed: u64,
    pub algo: &'static str,
    pub objective: f64,
    pub reference: f64,
    pub ratio: f64,
}

/// One row per (size, seed): the algorithm's Dasgupta objective, the
/// reference (the closed-form bound, or `exact_opt` for the exact sparsest
/// cut) and their ratio. `sizes` are n for paths and stars, k for spines.
pub fn ratio_experiment(family: &str, algo: ExperimentAlgo, sizes: &[usize], seeds: &[u64]) -> Result<Vec<RatioRow>> {
    let cf = CostFunction::dasgupta();
    let mut rows = Vec::with_capacity(sizes.len() * seeds.len());
    for &size in sizes {
        let fam = Family::sized(family, size)?;
        let g = fam.graph()?;
        for &seed in seeds {
            let tree = match algo {
                ExperimentAlgo::Linkage { kind, adversarial: true } => {
                    let policy = fam
                        .adversarial_policy(kind)?
                        .ok_or_else(|| Error::invalid(format!("no adversarial schedule for {} on {}", kind.as_str(), fam.name())))?;
                    linkage::linkage(&g, &policy)?.0
                }
                ExperimentAlgo::Linkage { kind, adversarial: false } => {
                    let ranks = exact::random_tree(g.n(), seed).leaves();
                    let mut inv = vec![0; g.n()];
                    for (r, v) in ranks.into_iter().enumerate() {
                        inv[v] = r;
                    }
                    let mode = fam.adversarial_policy(kind)?.map_or(g.mode(), |p| p.mode);
                    linkage::linkage(&g, &LinkagePolicy::new(kind, mode).with_ties(TieBreak::Priority(inv)))?.0
                }
                ExperimentAlgo::BisectionTwoCenter => divisive::bisection_two_center(&g)?,
                ExperimentAlgo::ExactSparsestCut => divisive::recursive_cut_tree(&g, &mut ExactBrute::default())?.tree,
            };
            let objective = cf.evaluate(&g, &tree)?.total;
            let reference = match algo {
                ExperimentAlgo::ExactSparsestCut => exact::exact_opt(&cf, &g, Direction::for_mode(g.mode()))?.value,
                _ => fam.expected_opt_bound(),
            };
            rows.push(RatioRow { instance: fam.name(), n: g.n(), seed, algo: algo.name(), objective, reference, ratio: objective / reference });
        }
    }
    Ok(rows)
}
