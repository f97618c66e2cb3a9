//! Top-down algorithms: recursive sparsest/densest cut, local-search densest
//! cut, bisection 2-center, and the two pivot algorithms for ground-truth and
//! perturbed inputs.
//!
//! All recursions run on an explicit work stack, so caterpillar-shaped
//! outputs of any depth are fine.

use alloc::{boxed::Box, format, vec, vec::Vec};
use rand::Rng;

use crate::{
    exact::{self, Direction},
    graph::{Cut, Mode, WeightedGraph},
    rng,
    tree::{ClusterTree, NodeId, TreeBuilder},
    Error, Result,
};

/// One level of a top-down recursion, in the subproblem's local indices.
/// The output folds the part trees left to right, starting from the pivot
/// leaf if there is one.
struct Division {
    pivot: Option<usize>,
    parts: Vec<Vec<usize>>,
}

enum Task {
    Solve(Vec<usize>),
    Fold { pivot: Option<usize>, parts: usize },
}

fn divide<F>(g: &WeightedGraph, mut split: F) -> Result<ClusterTree>
where
    F: FnMut(&WeightedGraph, &[usize]) -> Result<Division>,
{
    let n = g.n();
    if n == 0 {
        return Err(Error::invalid("empty graph"));
    }
    let mut b = TreeBuilder::with_capacity(n);
    let mut out: Vec<NodeId> = Vec::new();
    let mut tasks = vec![Task::Solve((0..n).collect())];
    while let Some(task) = tasks.pop() {
        match task {
            Task::Solve(set) if set.len() == 1 => out.push(b.leaf(set[0])),
            Task::Solve(set) => {
                let sub = g.induced_unchecked(&set);
                let div = split(&sub, &set)?;
                let mut seen = vec![false; set.len()];
                let mut count = 0;
                for &i in div.pivot.iter().chain(div.parts.iter().flatten()) {
                    if i >= set.len() || seen[i] {
                        return Err(Error::Internal(format!("division repeats or overflows vertex {i}")));
                    }
                    seen[i] = true;
                    count += 1;
                }
                let too_few = div.parts.len() + usize::from(div.pivot.is_some()) < 2;
                if count != set.len() || div.parts.iter().any(Vec::is_empty) || too_few {
                    return Err(Error::Internal("division is not a partition into at least two parts".into()));
                }
                tasks.push(Task::Fold { pivot: div.pivot.map(|p| set[p]), parts: div.parts.len() });
                for part in div.parts.into_iter().rev() {
                    let mut orig: Vec<usize> = part.into_iter().map(|i| set[i]).collect();
                    orig.sort_unstable();
                    tasks.push(Task::Solve(orig));
                }
            }
            Task::Fold { pivot, parts } => {
                let kids = out.split_off(out.len() - parts);
                let mut it = kids.into_iter();
                let mut acc = match pivot {
                    Some(p) => b.leaf(p),
                    None => it.next().expect("at least two parts"),
                };
                for t in it {
                    acc = b.join(acc, t);
                }
                out.push(acc);
            }
        }
    }
    b.finish(out[0])
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FinderStats {
    pub calls: usize,
    /// Local-search moves summed over all calls.
    pub iterations: usize,
    pub last_iterations: usize,
}

/// Finds one cut of a (sub)graph with at least two vertices. Similarity
/// graphs want sparse cuts, dissimilarity graphs dense ones.
pub trait CutFinder {
    fn find_cut(&mut self, g: &WeightedGraph) -> Result<Cut>;

    fn stats(&self) -> FinderStats {
        FinderStats::default()
    }
}

/// Exact sparsest (similarity) or densest (dissimilarity) cut by enumeration.
#[derive(Clone, Debug, Default)]
pub struct ExactBrute {
    stats: FinderStats,
}

impl CutFinder for ExactBrute {
    fn find_cut(&mut self, g: &WeightedGraph) -> Result<Cut> {
        self.stats.calls += 1;
        let dir = match g.mode() {
            Mode::Similarity => Direction::Min,
            Mode::Dissimilarity => Direction::Max,
        };
        Ok(exact::brute_cut(g, dir)?.0)
    }

    fn stats(&self) -> FinderStats {
        self.stats
    }
}

/// The linear-time cut that is exactly sparsest on ground-truth inputs.
#[derive(Clone, Debug, Default)]
pub struct GroundTruthFast {
    stats: FinderStats,
}

impl CutFinder for GroundTruthFast {
    fn find_cut(&mut self, g: &WeightedGraph) -> Result<Cut> {
        self.stats.calls += 1;
        ground_truth_sparsest_cut(g)
    }

    fn stats(&self) -> FinderStats {
        self.stats
    }
}

/// ε/n-locally-densest cuts. Subgraphs without positive weights split off
/// their first vertex.
#[derive(Clone, Debug)]
pub struct LocalSearch {
    pub epsilon: f64,
    stats: FinderStats,
}

impl LocalSearch {
    pub fn new(epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(LocalSearch { epsilon, stats: FinderStats::default() })
    }
}

impl CutFinder for LocalSearch {
    fn find_cut(&mut self, g: &WeightedGraph) -> Result<Cut> {
        self.stats.calls += 1;
        match local_search_densest_cut(g, self.epsilon) {
            Ok((cut, st)) => {
                self.stats.iterations += st.iterations;
                self.stats.last_iterations = st.iterations;
                Ok(cut)
            }
            Err(Error::DegenerateInput(_)) => {
                self.stats.last_iterations = 0;
                Cut::from_side(&[0], g.n())
            }
            Err(e) => Err(e),
        }
    }

    fn stats(&self) -> FinderStats {
        self.stats
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FinderKind {
    ExactBrute,
    GroundTruthFast,
    LocalSearch { epsilon: f64 },
}

impl FinderKind {
    pub fn build(self) -> Result<Box<dyn CutFinder>> {
        Ok(match self {
            FinderKind::ExactBrute => Box::new(ExactBrute::default()),
            FinderKind::GroundTruthFast => Box::new(GroundTruthFast::default()),
            FinderKind::LocalSearch { epsilon } => Box::new(LocalSearch::new(epsilon)?),
        })
    }
}

/// A cut taken during a recursion, in original vertex labels.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitRecord {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    /// Local-search moves spent on this cut.
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecursiveOutcome {
    pub tree: ClusterTree,
    pub splits: Vec<SplitRecord>,
}

/// Splits by `finder`'s cut, recurses on both sides and joins the results.
pub fn recursive_cut_tree(g: &WeightedGraph, finder: &mut dyn CutFinder) -> Result<RecursiveOutcome> {
    let mut splits = Vec::new();
    let tree = divide(g, |sub, labels| {
        let cut = finder.find_cut(sub)?;
        splits.push(SplitRecord {
            a: cut.side_a.iter().map(|&i| labels[i]).collect(),
            b: cut.side_b.iter().map(|&i| labels[i]).collect(),
            iterations: finder.stats().last_iterations,
        });
        Ok(Division { pivot: None, parts: vec![cut.side_a, cut.side_b] })
    })?;
    Ok(RecursiveOutcome { tree, splits })
}

/// Probe u = 0; A = {u} ∪ {x : w(u,x) > w_min} for similarity, where w_min is
/// the smallest weight at u, and A = {u} ∪ {x : w(u,x) < w_max} for
/// dissimilarity. O(n).
pub fn ground_truth_sparsest_cut(g: &WeightedGraph) -> Result<Cut> {
    let n = g.n();
    if n < 2 {
        return Err(Error::invalid("a cut needs at least two vertices"));
    }
    let row = g.row(0);
    let mut inside = vec![false; n];
    inside[0] = true;
    match g.mode() {
        Mode::Similarity => {
            let w_min = row[1..].iter().copied().fold(f64::INFINITY, f64::min);
            for x in 1..n {
                inside[x] = row[x] > w_min;
            }
        }
        Mode::Dissimilarity => {
            let w_max = row[1..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for x in 1..n {
                inside[x] = row[x] < w_max;
            }
        }
    }
    Ok(Cut::from_mask(&inside))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LocalSearchStats {
    pub iterations: usize,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    Ok(())
}

/// Upper bound on local-search moves: ceil(ln n / ln(1+ε/n)) + 1.
pub fn local_search_iteration_bound(n: usize, epsilon: f64) -> usize {
    let nf = n as f64;
    libm::ceil(libm::log(nf) / libm::log1p(epsilon / nf)) as usize + 1
}

/// Starts from A = {v} for the maximum-weight edge (u, v) (smallest pair on
/// ties) and applies the first single-vertex move, in index order, that
/// multiplies the density w(A,B)/(|A||B|) by more than 1 + ε/n, until none
/// exists.
pub fn local_search_densest_cut(g: &WeightedGraph, epsilon: f64) -> Result<(Cut, LocalSearchStats)> {
    check_epsilon(epsilon)?;
    let n = g.n();
    if n < 2 {
        return Err(Error::invalid("a cut needs at least two vertices"));
    }
    let mut best = (0.0, 0, 0);
    for u in 0..n {
        let row = g.row(u);
        for (v, &w) in row.iter().enumerate().skip(u + 1) {
            if w > best.0 {
                best = (w, u, v);
            }
        }
    }
    if best.0 <= 0.0 {
        return Err(Error::DegenerateInput("all weights are zero".into()));
    }
    let seed = best.2;
    let rowsum: Vec<f64> = (0..n).map(|u| g.row(u).iter().sum()).collect();
    let mut in_a = vec![false; n];
    in_a[seed] = true;
    let mut to_a: Vec<f64> = g.row(seed).to_vec();
    let mut size_a = 1usize;
    let mut cut = rowsum[seed];
    let factor = 1.0 + epsilon / n as f64;
    let mut iterations = 0;
    loop {
        let density = cut / (size_a * (n - size_a)) as f64;
        let mut moved = false;
        for x in 0..n {
            let (new_cut, new_a) = if in_a[x] {
                if size_a == 1 {
                    continue;
                }
                (cut - (rowsum[x] - to_a[x]) + to_a[x], size_a - 1)
            } else {
                if size_a == n - 1 {
                    continue;
                }
                (cut - to_a[x] + (rowsum[x] - to_a[x]), size_a + 1)
            };
            let new_density = new_cut / (new_a * (n - new_a)) as f64;
            if new_density > factor * density {
                let sign = if in_a[x] { -1.0 } else { 1.0 };
                in_a[x] = !in_a[x];
                for (t, w) in to_a.iter_mut().zip(g.row(x)) {
                    *t += sign * w;
                }
                size_a = new_a;
                cut = new_cut;
                iterations += 1;
                moved = true;
                break;
            }
        }
        if !moved {
            break;
        }
    }
    Ok((Cut::from_mask(&in_a), LocalSearchStats { iterations }))
}

/// Recursive locally-densest cuts on a dissimilarity graph.
pub fn recursive_densest_cut_tree(g: &WeightedGraph, epsilon: f64) -> Result<RecursiveOutcome> {
    if g.mode() != Mode::Dissimilarity {
        return Err(Error::Precondition("densest-cut recursion needs a dissimilarity graph".into()));
    }
    let mut finder = LocalSearch::new(epsilon)?;
    recursive_cut_tree(g, &mut finder)
}

/// Bisection by the best 2-center pair, recursively.
///
/// Similarity: the pair (u,v) maximizing min over other x of
/// max(w(x,u), w(x,v)); a point goes to u when w(x,u) ≥ w(x,v).
/// Dissimilarity: the pair minimizing max over x of min(w(x,u), w(x,v)); a
/// point goes to u when w(x,u) ≤ w(x,v). Ties pick the smallest pair.
pub fn bisection_two_center(g: &WeightedGraph) -> Result<ClusterTree> {
    divide(g, |sub, _| {
        let (u, v) = best_centers(sub);
        let mut a = Vec::new();
        let mut b = Vec::new();
        for x in 0..sub.n() {
            let to_u = x == u
                || (x != v
                    && match sub.mode() {
                        Mode::Similarity => sub.weight(x, u) >= sub.weight(x, v),
                        Mode::Dissimilarity => sub.weight(x, u) <= sub.weight(x, v),
                    });
            if to_u {
                a.push(x);
            } else {
                b.push(x);
            }
        }
        Ok(Division { pivot: None, parts: vec![a, b] })
    })
}

fn best_centers(g: &WeightedGraph) -> (usize, usize) {
    let n = g.n();
    let mut best: Option<(f64, usize, usize)> = None;
    for u in 0..n {
        for v in u + 1..n {
            let score = match g.mode() {
                // centers are infinitely similar to themselves
                Mode::Similarity => (0..n)
                    .filter(|&x| x != u && x != v)
                    .map(|x| g.weight(x, u).max(g.weight(x, v)))
                    .fold(f64::INFINITY, f64::min),
                Mode::Dissimilarity => (0..n).map(|x| g.weight(x, u).min(g.weight(x, v))).fold(0.0, f64::max),
            };
            let improves = match (best, g.mode()) {
                (None, _) => true,
                (Some((b, ..)), Mode::Similarity) => score > b,
                (Some((b, ..)), Mode::Dissimilarity) => score < b,
            };
            if improves {
                best = Some((score, u, v));
            }
        }
    }
    let (_, u, v) = best.expect("at least two vertices");
    (u, v)
}

/// Random pivot p, buckets of the other vertices by their weight to p (most
/// similar first; least dissimilar first for dissimilarity graphs), weights
/// within `tolerance` of a bucket's first weight sharing the bucket.
pub fn fast_pivot(g: &WeightedGraph, seed: u64) -> Result<ClusterTree> {
    fast_pivot_with_tolerance(g, seed, 0.0)
}

pub fn fast_pivot_with_tolerance(g: &WeightedGraph, seed: u64, tolerance: f64) -> Result<ClusterTree> {
    if tolerance.is_nan() || tolerance < 0.0 {
        return Err(Error::invalid("tolerance must be nonnegative"));
    }
    let mut r = rng::seeded(seed);
    divide(g, |sub, _| {
        let p = r.random_range(0..sub.n());
        let row = sub.row(p);
        let mut others: Vec<usize> = (0..sub.n()).filter(|&x| x != p).collect();
        match sub.mode() {
            Mode::Similarity => others.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b))),
            Mode::Dissimilarity => others.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b))),
        }
        let mut parts: Vec<Vec<usize>> = Vec::new();
        let mut head = f64::NAN;
        for x in others {
            if parts.is_empty() || (row[x] - head).abs() > tolerance {
                head = row[x];
                parts.push(Vec::new());
            }
            parts.last_mut().expect("bucket").push(x);
        }
        Ok(Division { pivot: Some(p), parts })
    })
}

/// Region-growing pivot algorithm for δ-perturbed similarity inputs.
///
/// From Ṽ = {p} (p = smallest vertex), repeatedly takes a maximum-weight edge
/// (p1, p2) across (Ṽ, V∖Ṽ), lexicographically smallest on ties; seeds
/// B = {u ∉ Ṽ : w(p1,u) = w(p1,p2)} and grows B by any outside vertex with an
/// edge of weight ≥ w(p1,p2) into Ṽ ∪ B. The parts are folded onto leaf p in
/// discovery order. δ is only validated.
pub fn robust_pivot(g: &WeightedGraph, delta: f64) -> Result<ClusterTree> {
    if !(delta.is_finite() && delta >= 1.0) {
        return Err(Error::invalid(format!("delta must be at least 1, got {delta}")));
    }
    divide(g, |sub, _| {
        let n = sub.n();
        let mut inside = vec![false; n];
        // best[u] / arg[u]: heaviest edge from outside u into Ṽ ∪ B and its
        // smallest endpoint
        let mut best = vec![f64::NEG_INFINITY; n];
        let mut arg = vec![usize::MAX; n];
        let add = |v: usize, inside: &mut [bool], best: &mut [f64], arg: &mut [usize]| {
            inside[v] = true;
            let row = sub.row(v);
            for u in 0..n {
                if !inside[u] && (row[u] > best[u] || (row[u] == best[u] && v < arg[u])) {
                    best[u] = row[u];
                    arg[u] = v;
                }
            }
        };
        add(0, &mut inside, &mut best, &mut arg);
        let mut parts: Vec<Vec<usize>> = Vec::new();
        let mut placed = 1;
        while placed < n {
            let mut pick: Option<(f64, usize, usize)> = None;
            for u in (0..n).filter(|&u| !inside[u]) {
                let better = match pick {
                    None => true,
                    Some((w, p1, p2)) => best[u] > w || (best[u] == w && (arg[u], u) < (p1, p2)),
                };
                if better {
                    pick = Some((best[u], arg[u], u));
                }
            }
            let (wi, p1, _) = pick.expect("an outside vertex");
            let mut part: Vec<usize> = (0..n).filter(|&u| !inside[u] && sub.weight(p1, u) == wi).collect();
            for &u in &part {
                add(u, &mut inside, &mut best, &mut arg);
            }
            loop {
                let grow: Vec<usize> = (0..n).filter(|&u| !inside[u] && best[u] >= wi).collect();
                if grow.is_empty() {
                    break;
                }
                for u in grow {
                    if !inside[u] {
                        part.push(u);
                        add(u, &mut inside, &mut best, &mut arg);
                    }
                }
            }
            placed += part.len();
            parts.push(part);
        }
        Ok(Division { pivot: Some(0), parts })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{
        exact::random_graph,
        ground_truth::{self, PerturbationSpec, TreeShape, WeightProfile},
        objective::CostFunction,
    };
    use alloc::string::ToString;
    use proptest::prelude::*;

    fn fix_2b() -> WeightedGraph {
        WeightedGraph::from_fn(4, Mode::Similarity, |u, v| if u / 2 == v / 2 { 3.0 } else { 1.0 }).unwrap()
    }

    fn fix_p4() -> WeightedGraph {
        WeightedGraph::from_edges(4, Mode::Similarity, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap()
    }

    fn fix_tri() -> WeightedGraph {
        WeightedGraph::from_edges(3, Mode::Dissimilarity, &[(0, 1, 1.0), (0, 2, 1.0), (1, 2, 3.0)]).unwrap()
    }

    fn two(mode: Mode) -> WeightedGraph {
        WeightedGraph::from_edges(2, mode, &[(0, 1, 5.0)]).unwrap()
    }

    fn cost(g: &WeightedGraph, t: &ClusterTree) -> f64 {
        CostFunction::dasgupta().evaluate(g, t).unwrap().total
    }

    #[test]
    fn recursive_exact_examples() {
        let r = recursive_cut_tree(&fix_p4(), &mut ExactBrute::default()).unwrap();
        assert_eq!((r.tree.to_string(), cost(&fix_p4(), &r.tree)), ("((0,1),(2,3))".to_string(), 8.0));
        let r = recursive_cut_tree(&fix_2b(), &mut ExactBrute::default()).unwrap();
        assert!(ground_truth::is_generating(&r.tree, &fix_2b()).unwrap().is_yes());
        assert_eq!(cost(&fix_2b(), &r.tree), 28.0);
        let r = recursive_cut_tree(&two(Mode::Similarity), &mut ExactBrute::default()).unwrap();
        assert_eq!(r.tree.to_string(), "(0,1)");
        let big = WeightedGraph::new(25, Mode::Similarity);
        assert!(matches!(recursive_cut_tree(&big, &mut ExactBrute::default()), Err(Error::ResourceGuard { n: 25, .. })));
    }

    #[test]
    fn ground_truth_cut_examples() {
        let c = ground_truth_sparsest_cut(&fix_2b()).unwrap();
        assert_eq!((c.side_a.clone(), c.ratio(&fix_2b())), (vec![0, 1], 1.0));
        let c = ground_truth_sparsest_cut(&WeightedGraph::clique(4, Mode::Similarity)).unwrap();
        assert_eq!((c.side_a.clone(), c.side_b.clone()), (vec![0], vec![1, 2, 3]));
        let g = WeightedGraph::from_edges(3, Mode::Similarity, &[(0, 1, 5.0), (0, 2, 1.0), (1, 2, 1.0)]).unwrap();
        let c = ground_truth_sparsest_cut(&g).unwrap();
        assert_eq!((c.side_a.clone(), c.ratio(&g)), (vec![0, 1], 1.0));
        assert_eq!(exact::brute_sparsest_cut(&g).unwrap().1, 1.0);
        assert!(ground_truth_sparsest_cut(&WeightedGraph::new(1, Mode::Similarity)).is_err());
    }

    #[test]
    fn local_search_examples() {
        let (c, st) = local_search_densest_cut(&two(Mode::Dissimilarity), 0.1).unwrap();
        assert_eq!((c.ratio(&two(Mode::Dissimilarity)), st.iterations), (5.0, 0));
        assert!(matches!(local_search_densest_cut(&WeightedGraph::new(3, Mode::Dissimilarity), 0.1), Err(Error::DegenerateInput(_))));
        assert!(local_search_densest_cut(&fix_tri(), 0.0).is_err());
    }

    #[test]
    fn local_search_on_heavy_star() {
        // v1 = 3, u = 4, heavy edge (3,4) of weight 125; A starts at {u}
        let g = WeightedGraph::from_fn(5, Mode::Dissimilarity, |a, b| if (a, b) == (3, 4) { 125.0 } else { 1.0 }).unwrap();
        let (c, _) = local_search_densest_cut(&g, 0.1).unwrap();
        assert!(c.ratio(&g) >= 125.0 / 4.0);
        let d = c.ratio(&g);
        for x in 0..5 {
            let mut side: Vec<usize> = c.side_a.clone();
            if let Some(i) = side.iter().position(|&y| y == x) {
                side.remove(i);
            } else {
                side.push(x);
            }
            if side.is_empty() || side.len() == 5 {
                continue;
            }
            assert!(Cut::from_side(&side, 5).unwrap().ratio(&g) <= (1.0 + 0.1 / 5.0) * d);
        }
    }

    #[test]
    fn densest_recursion_examples() {
        let r = recursive_densest_cut_tree(&fix_tri(), 0.1).unwrap();
        let v = cost(&fix_tri(), &r.tree);
        assert!(v >= 9.0 && (v == 12.0 || v == 14.0));
        let r = recursive_densest_cut_tree(&two(Mode::Dissimilarity), 0.1).unwrap();
        assert!(cost(&two(Mode::Dissimilarity), &r.tree) >= (4.0 / 3.0) * 0.9 * 5.0);
        assert!(matches!(recursive_densest_cut_tree(&fix_2b(), 0.1), Err(Error::Precondition(_))));
        // all-zero subgraphs still split
        let r = recursive_densest_cut_tree(&WeightedGraph::from_edges(4, Mode::Dissimilarity, &[(0, 1, 1.0)]).unwrap(), 0.1).unwrap();
        assert!(r.tree.is_over(4));
    }

    #[test]
    fn bisection_examples() {
        let t = bisection_two_center(&fix_2b()).unwrap();
        assert_eq!(t.to_string(), "((0,1),(2,3))");
        assert_eq!(cost(&fix_2b(), &t), 28.0);
        assert_eq!(bisection_two_center(&two(Mode::Similarity)).unwrap().to_string(), "(0,1)");
        let gt = ground_truth::random_generating_tree(10, TreeShape::UniformSplit, WeightProfile { max_step: 3, strict: true }, Mode::Similarity, 21).unwrap();
        let g = ground_truth::realize(&gt).unwrap();
        let opt = exact::exact_opt(&CostFunction::dasgupta(), &g, Direction::Min).unwrap().value;
        assert_eq!(cost(&g, &bisection_two_center(&g).unwrap()), opt);
    }

    #[test]
    fn fast_pivot_examples() {
        // a seed whose first pivot is 0 reproduces the worked example
        let t = fast_pivot(&fix_2b(), 0).unwrap();
        assert_eq!(t.to_string(), "((0,1),(2,3))");
        assert_eq!(fast_pivot(&WeightedGraph::new(1, Mode::Similarity), 3).unwrap().to_string(), "0");
        for seed in 0..8 {
            let k4 = WeightedGraph::clique(4, Mode::Similarity);
            let t = fast_pivot(&k4, seed).unwrap();
            assert_eq!(cost(&k4, &t), 20.0);
            let sizes = t.sizes();
            assert!(t.internal_nodes().all(|id| {
                let (l, r) = t.children(id).unwrap();
                sizes[l].min(sizes[r]) == 1
            }));
        }
    }

    #[test]
    fn robust_pivot_examples() {
        let t = robust_pivot(&fix_2b(), 1.0).unwrap();
        assert!(ground_truth::is_generating(&t, &fix_2b()).unwrap().is_yes());
        assert_eq!(cost(&fix_2b(), &t), 28.0);
        let p = ground_truth::perturb(&fix_2b(), PerturbationSpec { delta: 1.1, seed: 5 }).unwrap();
        let opt = exact::exact_opt(&CostFunction::dasgupta(), &p, Direction::Min).unwrap().value;
        assert!(cost(&p, &robust_pivot(&p, 1.1).unwrap()) <= 1.1 * opt + 1e-9);
        assert_eq!(robust_pivot(&WeightedGraph::new(1, Mode::Similarity), 1.0).unwrap().to_string(), "0");
        assert!(robust_pivot(&fix_2b(), 0.5).is_err());
    }

    #[test]
    fn deep_recursion_uses_the_work_stack() {
        // a path-like ultrametric makes every pivot split off one vertex
        let n = 500;
        let g = WeightedGraph::from_fn(n, Mode::Similarity, |u, v| (u.min(v) + 1) as f64).unwrap();
        let t = robust_pivot(&g, 1.0).unwrap();
        assert!(t.is_over(n));
    }

    fn arb_ground_truth(max_n: usize, strict: bool) -> impl Strategy<Value = WeightedGraph> {
        (2..=max_n, any::<u64>(), any::<bool>()).prop_map(move |(n, seed, sim)| {
            let mode = if sim { Mode::Similarity } else { Mode::Dissimilarity };
            let gt = ground_truth::random_generating_tree(n, TreeShape::UniformSplit, WeightProfile { max_step: 2, strict }, mode, seed).unwrap();
            ground_truth::realize(&gt).unwrap()
        })
    }

    proptest! {
        #[test]
        fn gt_fast_cut_is_sparsest(g in arb_ground_truth(14, false)) {
            let g = g.with_mode(Mode::Similarity);
            prop_assume!(ground_truth::ultrametric_violation(&g).is_none());
            let fast = ground_truth_sparsest_cut(&g).unwrap().ratio(&g);
            let (_, brute) = exact::brute_sparsest_cut(&g).unwrap();
            prop_assert!((fast - brute).abs() <= 1e-12 * brute.max(1.0));
        }

        #[test]
        fn local_search_terminates_locally_dense(n in 2usize..=30, seed in any::<u64>(), eps in 0.05f64..0.5) {
            let g = random_graph(n, Mode::Dissimilarity, seed, 0.6, 9);
            prop_assume!(g.total_weight() > 0.0);
            let (c, st) = local_search_densest_cut(&g, eps).unwrap();
            prop_assert!(st.iterations <= local_search_iteration_bound(n, eps));
            let d = c.ratio(&g);
            for x in 0..n {
                let mut side = c.side_a.clone();
                match side.iter().position(|&y| y == x) {
                    Some(i) => { side.remove(i); }
                    None => side.push(x),
                }
                if side.is_empty() || side.len() == n { continue; }
                prop_assert!(Cut::from_side(&side, n).unwrap().ratio(&g) <= (1.0 + eps / n as f64) * d * (1.0 + 1e-12));
            }
        }

        #[test]
        fn pivots_generate_on_ground_truth(g in arb_ground_truth(14, false), seed in any::<u64>()) {
            let t = fast_pivot(&g, seed).unwrap();
            prop_assert!(ground_truth::is_generating(&t, &g).unwrap().is_yes());
            if g.mode() == Mode::Similarity {
                let t = robust_pivot(&g, 1.0).unwrap();
                prop_assert!(ground_truth::is_generating(&t, &g).unwrap().is_yes());
            }
        }
    }
}
