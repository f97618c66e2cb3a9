//! Generating trees (dendrograms with monotone internal weights), the graphs
//! they realize, and δ-perturbations of those graphs.

use alloc::{format, string::String, vec, vec::Vec};
use rand::{seq::SliceRandom, Rng};

use crate::{
    graph::{Mode, WeightedGraph},
    linkage::{self, LinkageKind, LinkagePolicy},
    rng,
    tree::{ClusterTree, Node, NodeId, TreeBuilder},
    Error, Result,
};

/// A cluster tree with a weight W(N) on every internal node, monotone along
/// root-to-leaf paths: non-decreasing for similarity, non-increasing for
/// dissimilarity. Realizes the graph w(x,y) = W(lca(x,y)).
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratingTree {
    tree: ClusterTree,
    weights: Vec<Option<f64>>,
    mode: Mode,
    strict: bool,
}

/// Why a tree does not generate a graph.
#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    /// Two pairs split at `node` with different weights.
    NonUniform { node: NodeId, first: (usize, usize, f64), second: (usize, usize, f64) },
    /// The weight at `parent` and at its child `child` violate monotonicity.
    NotMonotone { parent: NodeId, child: NodeId, parent_weight: f64, child_weight: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Generating {
    Yes(GeneratingTree),
    No(Witness),
}

impl Generating {
    pub fn is_yes(&self) -> bool {
        matches!(self, Generating::Yes(_))
    }
}

fn monotone(mode: Mode, parent: f64, child: f64) -> bool {
    match mode {
        Mode::Similarity => parent <= child,
        Mode::Dissimilarity => parent >= child,
    }
}

impl GeneratingTree {
    /// `weights[id]` must hold W for every internal node id of `tree`.
    pub fn new(tree: ClusterTree, weights: Vec<Option<f64>>, mode: Mode) -> Result<Self> {
        if weights.len() != tree.nodes().len() {
            return Err(Error::invalid("one weight slot per tree node expected"));
        }
        for id in tree.internal_nodes() {
            match weights[id] {
                Some(w) if w.is_finite() && w >= 0.0 => {}
                Some(w) => return Err(Error::invalid(format!("node weight {w} must be finite and nonnegative"))),
                None => return Err(Error::invalid(format!("internal node {id} has no weight"))),
            }
        }
        let mut strict = true;
        for id in tree.internal_nodes() {
            let (l, r) = tree.children(id).expect("internal");
            for c in [l, r] {
                if let Some(cw) = tree.children(c).and(weights[c]) {
                    let pw = weights[id].expect("checked");
                    if !monotone(mode, pw, cw) {
                        return Err(Error::invalid(format!("weights not monotone between node {id} ({pw}) and child {c} ({cw})")));
                    }
                    if pw == cw {
                        strict = false;
                    }
                }
            }
        }
        let weights = tree.nodes().iter().zip(weights).map(|(nd, w)| matches!(nd, Node::Internal(..)).then_some(w).flatten()).collect();
        Ok(GeneratingTree { tree, weights, mode, strict })
    }

    pub fn tree(&self) -> &ClusterTree {
        &self.tree
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// True iff weights are strictly monotone along every root-to-leaf path.
    pub fn is_strict(&self) -> bool {
        self.strict
    }

    /// W(N) for internal nodes, `None` for leaves.
    pub fn weight(&self, id: NodeId) -> Option<f64> {
        self.weights[id]
    }

    pub fn weights(&self) -> &[Option<f64>] {
        &self.weights
    }

    /// Tree text with a `:W` annotation after every internal node.
    pub fn to_text(&self) -> String {
        self.tree.serialize_with(|id| self.weights[id])
    }

    /// Inverse of [`GeneratingTree::to_text`]; every internal node must be
    /// annotated.
    pub fn from_text(s: &str, mode: Mode) -> Result<Self> {
        let (tree, weights) = ClusterTree::parse_annotated(s)?;
        if let Some(id) = tree.internal_nodes().find(|&id| weights[id].is_none()) {
            return Err(Error::parse(0, format!("internal node {id} lacks a :W annotation")));
        }
        GeneratingTree::new(tree, weights, mode)
    }
}

/// Complete graph with w(u,v) = W(lca(u,v)). The tree must be over `0..n`.
pub fn realize(gt: &GeneratingTree) -> Result<WeightedGraph> {
    let t = gt.tree();
    let n = t.n_leaves();
    t.check_over(n)?;
    let mut g = WeightedGraph::new(n, gt.mode());
    let (order, range) = t.leaf_ranges();
    for id in t.internal_nodes() {
        let (l, r) = t.children(id).expect("internal");
        let w = gt.weight(id).expect("internal weight");
        for &u in &order[range[l].0..range[l].1] {
            for &v in &order[range[r].0..range[r].1] {
                g.set_weight(u, v, w)?;
            }
        }
    }
    Ok(g)
}

/// Decides whether `t` generates `g`: every cross pair at a node shares one
/// weight and these weights are monotone in the direction of `g.mode()`.
/// Weights are compared exactly.
pub fn is_generating(t: &ClusterTree, g: &WeightedGraph) -> Result<Generating> {
    t.check_over(g.n())?;
    let (order, range) = t.leaf_ranges();
    let mut weights = vec![None; t.nodes().len()];
    for id in t.postorder() {
        let Some((l, r)) = t.children(id) else { continue };
        let mut first: Option<(usize, usize, f64)> = None;
        for &u in &order[range[l].0..range[l].1] {
            let row = g.row(u);
            for &v in &order[range[r].0..range[r].1] {
                let w = row[v];
                match first {
                    None => first = Some((u, v, w)),
                    Some(f) if f.2 != w => {
                        let (a, b) = (f, (u, v, w));
                        return Ok(Generating::No(Witness::NonUniform { node: id, first: a, second: b }));
                    }
                    Some(_) => {}
                }
            }
        }
        let w = first.expect("both children are nonempty").2;
        weights[id] = Some(w);
        for c in [l, r] {
            if let Some(cw) = weights[c] {
                if !monotone(g.mode(), w, cw) {
                    return Ok(Generating::No(Witness::NotMonotone { parent: id, child: c, parent_weight: w, child_weight: cw }));
                }
            }
        }
    }
    Ok(Generating::Yes(GeneratingTree::new(t.clone(), weights, g.mode())?))
}

/// First triple (x < y, z) in lexicographic order violating the ultrametric
/// condition: for similarity w(x,y) ≥ min(w(x,z), w(y,z)), for dissimilarity
/// w(x,y) ≤ max(w(x,z), w(y,z)).
pub fn ultrametric_violation(g: &WeightedGraph) -> Option<(usize, usize, usize)> {
    let n = g.n();
    for x in 0..n {
        for y in x + 1..n {
            let wxy = g.weight(x, y);
            for z in 0..n {
                if z == x || z == y {
                    continue;
                }
                let (a, b) = (g.weight(x, z), g.weight(y, z));
                let bad = match g.mode() {
                    Mode::Similarity => wxy < a.min(b),
                    Mode::Dissimilarity => wxy > a.max(b),
                };
                if bad {
                    return Some((x, y, z));
                }
            }
        }
    }
    None
}

/// A generating tree realizing `g` exactly, from single linkage with merge
/// levels as weights.
pub fn minimal_representation(g: &WeightedGraph) -> Result<GeneratingTree> {
    if let Some((x, y, z)) = ultrametric_violation(g) {
        return Err(Error::NotUltrametric { x, y, z });
    }
    if g.n() == 0 {
        return Err(Error::invalid("empty graph"));
    }
    let policy = LinkagePolicy::new(LinkageKind::Single, g.mode());
    let (t, _) = linkage::linkage(g, &policy)?;
    match is_generating(&t, g)? {
        Generating::Yes(gt) => Ok(gt),
        Generating::No(w) => Err(Error::Internal(format!("single linkage missed a generating tree on an ultrametric input: {w:?}"))),
    }
}

/// Topology of [`random_generating_tree`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeShape {
    /// Split sizes uniform in 1..m.
    UniformSplit,
    Balanced,
    Caterpillar,
}

/// Internal weights are integer levels: the root is at level 1 and each
/// internal child adds a step drawn from `0..=max_step` (`1..=max_step` when
/// strict). Similarity weight = level; dissimilarity weight = top − level + 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WeightProfile {
    pub max_step: u32,
    pub strict: bool,
}

impl Default for WeightProfile {
    fn default() -> Self {
        WeightProfile { max_step: 2, strict: false }
    }
}

/// Random generating tree on leaves `0..n`, deterministic in `seed`.
pub fn random_generating_tree(n: usize, shape: TreeShape, profile: WeightProfile, mode: Mode, seed: u64) -> Result<GeneratingTree> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if profile.max_step == 0 {
        return Err(Error::invalid("max_step must be at least 1"));
    }
    let mut r = rng::seeded(seed);
    let mut labels: Vec<usize> = (0..n).collect();
    labels.shuffle(&mut r);

    // Explicit stack of (label range, parent level, expanded).
    let mut b = TreeBuilder::with_capacity(n);
    let mut levels: Vec<Option<u64>> = Vec::with_capacity(2 * n);
    let mut out: Vec<NodeId> = Vec::new();
    let mut stack = vec![(0usize, n, 0u64, None::<(usize, u64)>)];
    while let Some((lo, hi, parent_level, split)) = stack.pop() {
        if hi - lo == 1 {
            out.push(b.leaf(labels[lo]));
            levels.push(None);
            continue;
        }
        match split {
            None => {
                let step_lo = if profile.strict || parent_level == 0 { 1 } else { 0 };
                let level = parent_level + r.random_range(step_lo..=profile.max_step as u64);
                let m = hi - lo;
                let left = match shape {
                    TreeShape::UniformSplit => r.random_range(1..m),
                    TreeShape::Balanced => m / 2,
                    TreeShape::Caterpillar => {
                        if r.random_bool(0.5) {
                            1
                        } else {
                            m - 1
                        }
                    }
                };
                stack.push((lo, hi, parent_level, Some((lo + left, level))));
                stack.push((lo + left, hi, level, None));
                stack.push((lo, lo + left, level, None));
            }
            Some((_, level)) => {
                let rt = out.pop().expect("right subtree");
                let lt = out.pop().expect("left subtree");
                out.push(b.join(lt, rt));
                levels.push(Some(level));
            }
        }
    }
    let root = out[0];
    let top = levels.iter().flatten().copied().max().unwrap_or(1);
    let weights: Vec<Option<f64>> = levels
        .into_iter()
        .map(|l| {
            l.map(|l| match mode {
                Mode::Similarity => l as f64,
                Mode::Dissimilarity => (top - l + 1) as f64,
            })
        })
        .collect();
    let tree = b.finish(root)?;
    GeneratingTree::new(tree, weights, mode)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerturbationSpec {
    pub delta: f64,
    pub seed: u64,
}

/// Multiplies every pair weight by an independent uniform draw from [1, δ).
pub fn perturb(g: &WeightedGraph, spec: PerturbationSpec) -> Result<WeightedGraph> {
    if !(spec.delta.is_finite() && spec.delta >= 1.0) {
        return Err(Error::invalid(format!("delta must be at least 1, got {}", spec.delta)));
    }
    let mut r = rng::seeded(spec.seed);
    let d = spec.delta - 1.0;
    WeightedGraph::from_fn(g.n(), g.mode(), |u, v| {
        let m: f64 = r.random();
        let w = g.weight(u, v);
        if d == 0.0 {
            w
        } else {
            (w * (1.0 + d * m)).min(w * spec.delta)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{
        exact::{self, Direction},
        objective::CostFunction,
    };
    use proptest::prelude::*;

    fn fix_2b() -> WeightedGraph {
        WeightedGraph::from_fn(4, Mode::Similarity, |u, v| if u / 2 == v / 2 { 3.0 } else { 1.0 }).unwrap()
    }

    fn fix_p4() -> WeightedGraph {
        WeightedGraph::from_edges(4, Mode::Similarity, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap()
    }

    fn gt(s: &str, mode: Mode) -> GeneratingTree {
        GeneratingTree::from_text(s, mode).unwrap()
    }

    #[test]
    fn realize_examples() {
        assert_eq!(realize(&gt("((0,1):3,(2,3):3):1", Mode::Similarity)).unwrap(), fix_2b());
        let g = realize(&gt("(0,1):5", Mode::Similarity)).unwrap();
        assert_eq!((g.n(), g.weight(0, 1)), (2, 5.0));
        let g = realize(&gt("((0,1):2,2):1", Mode::Similarity)).unwrap();
        assert_eq!((g.weight(0, 1), g.weight(0, 2), g.weight(1, 2)), (2.0, 1.0, 1.0));
    }

    #[test]
    fn monotonicity_is_enforced() {
        assert!(GeneratingTree::from_text("((0,1):1,2):3", Mode::Similarity).is_err());
        assert!(GeneratingTree::from_text("((0,1):1,2):3", Mode::Dissimilarity).is_ok());
        assert!(GeneratingTree::from_text("((0,1),2):3", Mode::Similarity).is_err());
        assert!(gt("((0,1):3,2):1", Mode::Similarity).is_strict());
        assert!(!gt("((0,1):1,2):1", Mode::Similarity).is_strict());
    }

    #[test]
    fn is_generating_examples() {
        let t: ClusterTree = "((0,1),(2,3))".parse().unwrap();
        match is_generating(&t, &fix_2b()).unwrap() {
            Generating::Yes(g) => assert_eq!(g.to_text(), "((0,1):3,(2,3):3):1"),
            other => panic!("{other:?}"),
        }
        let t: ClusterTree = "((0,2),(1,3))".parse().unwrap();
        match is_generating(&t, &fix_2b()).unwrap() {
            Generating::No(Witness::NonUniform { node, first, second }) => {
                assert_eq!(node, t.root());
                let mut ws = [first.2, second.2];
                ws.sort_by(f64::total_cmp);
                assert_eq!(ws, [1.0, 3.0]);
            }
            other => panic!("{other:?}"),
        }
        let k4 = WeightedGraph::clique(4, Mode::Similarity);
        for s in ["((0,1),(2,3))", "(((0,1),2),3)", "((0,(1,3)),2)"] {
            match is_generating(&s.parse().unwrap(), &k4).unwrap() {
                Generating::Yes(g) => assert!(g.tree().internal_nodes().all(|id| g.weight(id) == Some(1.0))),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn non_monotone_witness() {
        // uniform cuts but the inner pair is less similar than the root cut
        let g = WeightedGraph::from_fn(3, Mode::Similarity, |u, v| if (u, v) == (0, 1) { 1.0 } else { 2.0 }).unwrap();
        let t: ClusterTree = "((0,1),2)".parse().unwrap();
        assert!(matches!(is_generating(&t, &g).unwrap(), Generating::No(Witness::NotMonotone { .. })));
    }

    #[test]
    fn minimal_representation_examples() {
        let m = minimal_representation(&fix_2b()).unwrap();
        assert_eq!(m.to_text(), "((0,1):3,(2,3):3):1");
        let k3 = WeightedGraph::clique(3, Mode::Similarity);
        let m = minimal_representation(&k3).unwrap();
        assert_eq!(realize(&m).unwrap(), k3);
        assert_eq!(minimal_representation(&fix_p4()), Err(Error::NotUltrametric { x: 0, y: 2, z: 1 }));
    }

    #[test]
    fn random_generating_examples() {
        let one = random_generating_tree(1, TreeShape::UniformSplit, WeightProfile::default(), Mode::Similarity, 3).unwrap();
        assert_eq!(one.tree().n_leaves(), 1);
        let strict = WeightProfile { max_step: 3, strict: true };
        let g4 = random_generating_tree(4, TreeShape::UniformSplit, strict, Mode::Similarity, 9).unwrap();
        assert!(g4.is_strict());
        assert!(is_generating(g4.tree(), &realize(&g4).unwrap()).unwrap().is_yes());
        let a = random_generating_tree(16, TreeShape::UniformSplit, WeightProfile::default(), Mode::Similarity, 5).unwrap();
        let b = random_generating_tree(16, TreeShape::UniformSplit, WeightProfile::default(), Mode::Similarity, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn perturb_examples() {
        let g = fix_2b();
        assert_eq!(perturb(&g, PerturbationSpec { delta: 1.0, seed: 1 }).unwrap(), g);
        let p = perturb(&g, PerturbationSpec { delta: 1.2, seed: 1 }).unwrap();
        for u in 0..4 {
            for v in 0..4 {
                assert!(g.weight(u, v) <= p.weight(u, v) && p.weight(u, v) <= 1.2 * g.weight(u, v));
            }
        }
        assert_eq!(p, perturb(&g, PerturbationSpec { delta: 1.2, seed: 1 }).unwrap());
        assert!(perturb(&g, PerturbationSpec { delta: 0.9, seed: 1 }).is_err());
    }

    fn arb_gt() -> impl Strategy<Value = GeneratingTree> {
        (1usize..=14, any::<u64>(), any::<bool>(), any::<bool>(), 0usize..3).prop_map(|(n, seed, strict, sim, shape)| {
            let shape = [TreeShape::UniformSplit, TreeShape::Balanced, TreeShape::Caterpillar][shape];
            let mode = if sim { Mode::Similarity } else { Mode::Dissimilarity };
            random_generating_tree(n, shape, WeightProfile { max_step: 2, strict }, mode, seed).unwrap()
        })
    }

    proptest! {
        #[test]
        fn round_trip_recovers_weights(gt in arb_gt()) {
            let g = realize(&gt).unwrap();
            match is_generating(gt.tree(), &g).unwrap() {
                Generating::Yes(rec) => {
                    for id in gt.tree().internal_nodes() {
                        prop_assert_eq!(rec.weight(id), gt.weight(id));
                    }
                }
                Generating::No(w) => prop_assert!(false, "{:?}", w),
            }
            prop_assert!(ultrametric_violation(&g).is_none());
            let m = minimal_representation(&g).unwrap();
            prop_assert_eq!(realize(&m).unwrap(), g);
        }

        #[test]
        fn text_round_trip(gt in arb_gt()) {
            let back = GeneratingTree::from_text(&gt.to_text(), gt.mode()).unwrap();
            prop_assert_eq!(realize(&back).unwrap(), realize(&gt).unwrap());
        }

        #[test]
        fn perturb_never_decreases(gt in arb_gt(), delta in 1.0f64..2.0, seed in any::<u64>()) {
            let g = realize(&gt).unwrap();
            let p = perturb(&g, PerturbationSpec { delta, seed }).unwrap();
            for u in 0..g.n() {
                for v in 0..g.n() {
                    prop_assert!(p.weight(u, v) >= g.weight(u, v) && p.weight(u, v) <= delta * g.weight(u, v));
                }
            }
        }

        #[test]
        fn generating_trees_are_optimal(gt in arb_gt()) {
            let g = realize(&gt).unwrap();
            prop_assume!(g.n() <= 10);
            let d = CostFunction::dasgupta();
            let opt = exact::exact_opt(&d, &g, Direction::for_mode(g.mode())).unwrap();
            prop_assert_eq!(d.evaluate(&g, gt.tree()).unwrap().total, opt.value);
            prop_assert!(is_generating(&opt.tree, &g).unwrap().is_yes());
        }
    }
}
