//! Hierarchical stochastic block model: sampling, the expected graph with its
//! ground-truth tree, and tree recovery by spectral projection, geometric
//! single linkage and average linkage over the bottom clusters.

use alloc::{format, vec, vec::Vec};
use rand::Rng;

use crate::{
    ground_truth::GeneratingTree,
    graph::{Mode, WeightedGraph},
    linkage::{self, LinkageKind, LinkagePolicy},
    objective::CostFunction,
    rng,
    tree::{ClusterTree, Node, NodeId, TreeBuilder},
    Error, Result,
};

#[derive(Clone, Debug, PartialEq)]
pub struct HsbmParams {
    pub k: usize,
    /// Similarity generating tree on leaves `0..k` with weights in [0, 1).
    pub top_tree: GeneratingTree,
    /// Within-cluster probabilities p_i ∈ (0, 1].
    pub p: Vec<f64>,
    /// Class probabilities f_i > 0 summing to 1.
    pub f: Vec<f64>,
    pub alpha: f64,
    pub n: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HsbmSample {
    /// 0/1 similarity graph.
    pub graph: WeightedGraph,
    /// Hidden class of every vertex.
    pub labels: Vec<usize>,
    pub counts: Vec<usize>,
}

fn param(field: &'static str, msg: impl Into<alloc::string::String>) -> Error {
    Error::Parameter { field, msg: msg.into() }
}

impl HsbmParams {
    pub fn validate(&self) -> Result<()> {
        let k = self.k;
        if k == 0 {
            return Err(param("k", "must be at least 1"));
        }
        if self.n == 0 {
            return Err(param("n", "must be at least 1"));
        }
        let t = self.top_tree.tree();
        if !t.is_over(k) {
            return Err(param("top_tree", format!("leaves must be exactly 0..{k}")));
        }
        if self.top_tree.mode() != Mode::Similarity {
            return Err(param("top_tree", "must be a similarity tree"));
        }
        for id in t.internal_nodes() {
            let w = self.top_tree.weight(id).expect("internal weight");
            if !(0.0..1.0).contains(&w) {
                return Err(param("top_tree", format!("weight {w} outside [0, 1)")));
            }
        }
        if self.p.len() != k {
            return Err(param("p", format!("expected {k} values, got {}", self.p.len())));
        }
        if self.f.len() != k {
            return Err(param("f", format!("expected {k} values, got {}", self.f.len())));
        }
        let parents = t.parents();
        for (id, nd) in t.nodes().iter().enumerate() {
            if let Node::Leaf(i) = *nd {
                let pi = self.p[i];
                if !(pi > 0.0 && pi <= 1.0) {
                    return Err(param("p", format!("p[{i}] = {pi} outside (0, 1]")));
                }
                if let Some(par) = parents[id] {
                    let w = self.top_tree.weight(par).expect("internal weight");
                    if pi <= w {
                        return Err(param("p", format!("p[{i}] = {pi} must exceed its parent weight {w}")));
                    }
                }
            }
        }
        if self.f.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(param("f", "class probabilities must be positive"));
        }
        let s: f64 = self.f.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(param("f", format!("class probabilities sum to {s}, not 1")));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(param("alpha", format!("{} outside (0, 1]", self.alpha)));
        }
        let pmax = self.p.iter().copied().fold(0.0, f64::max);
        if self.alpha * pmax > 1.0 {
            return Err(param("alpha", "alpha·max(p) exceeds 1"));
        }
        Ok(())
    }

    /// Edge probability between classes i and j: α·p_i within a class and
    /// α·W̃(lca(i,j)) across.
    pub fn class_matrix(&self) -> Result<Vec<f64>> {
        let k = self.k;
        let mut m = vec![0.0; k * k];
        let t = self.top_tree.tree();
        let idx = crate::tree::LcaIndex::new(t);
        for i in 0..k {
            m[i * k + i] = self.alpha * self.p[i];
            for j in i + 1..k {
                let w = self.alpha * self.top_tree.weight(idx.lca(i, j)?).expect("internal weight");
                m[i * k + j] = w;
                m[j * k + i] = w;
            }
        }
        Ok(m)
    }

    /// Deterministic labels with class sizes n·f_i rounded by largest
    /// remainder, classes laid out contiguously.
    pub fn expected_labels(&self) -> Vec<usize> {
        let exact: Vec<f64> = self.f.iter().map(|f| f * self.n as f64).collect();
        let mut sizes: Vec<usize> = exact.iter().map(|x| libm::floor(*x) as usize).collect();
        let mut rest = self.n - sizes.iter().sum::<usize>();
        let mut order: Vec<usize> = (0..self.k).collect();
        let rem = |i: usize| libm::round((exact[i] - sizes[i] as f64) * 1e9);
        order.sort_by(|&a, &b| rem(b).total_cmp(&rem(a)).then(a.cmp(&b)));
        for &i in order.iter().cycle() {
            if rest == 0 {
                break;
            }
            sizes[i] += 1;
            rest -= 1;
        }
        sizes.iter().enumerate().flat_map(|(i, &s)| core::iter::repeat_n(i, s)).collect()
    }
}

/// Draws i.i.d. class labels (so class sizes are multinomial), then every
/// edge independently.
pub fn sample(params: &HsbmParams) -> Result<HsbmSample> {
    params.validate()?;
    let mut r = rng::seeded(params.seed);
    let labels: Vec<usize> = (0..params.n)
        .map(|_| {
            let x: f64 = r.random();
            let mut acc = 0.0;
            for (i, f) in params.f.iter().enumerate() {
                acc += f;
                if x < acc {
                    return i;
                }
            }
            params.k - 1
        })
        .collect();
    draw_edges(params, labels, &mut r)
}

/// Samples the edges for fixed labels.
pub fn sample_with_labels(params: &HsbmParams, labels: &[usize], seed: u64) -> Result<HsbmSample> {
    params.validate()?;
    check_labels(params, labels)?;
    let mut r = rng::seeded(seed);
    draw_edges(params, labels.to_vec(), &mut r)
}

fn check_labels(params: &HsbmParams, labels: &[usize]) -> Result<()> {
    if labels.len() != params.n {
        return Err(param("labels", format!("expected {} labels, got {}", params.n, labels.len())));
    }
    if let Some(&l) = labels.iter().find(|&&l| l >= params.k) {
        return Err(param("labels", format!("label {l} out of range")));
    }
    Ok(())
}

fn draw_edges(params: &HsbmParams, labels: Vec<usize>, r: &mut impl Rng) -> Result<HsbmSample> {
    let m = params.class_matrix()?;
    let k = params.k;
    let graph = WeightedGraph::from_fn(params.n, Mode::Similarity, |u, v| {
        let prob = m[labels[u] * k + labels[v]];
        let x: f64 = r.random();
        if x < prob {
            1.0
        } else {
            0.0
        }
    })?;
    let mut counts = vec![0; k];
    for &l in &labels {
        counts[l] += 1;
    }
    Ok(HsbmSample { graph, labels, counts })
}

/// Edge-probability graph for fixed labels and its ground-truth tree: the top
/// tree with each leaf i replaced by a balanced tree over class i (internal
/// weights α·p_i) and top weights scaled by α. Empty classes vanish.
pub fn expected_graph(params: &HsbmParams, labels: &[usize]) -> Result<(WeightedGraph, GeneratingTree)> {
    params.validate()?;
    check_labels(params, labels)?;
    let m = params.class_matrix()?;
    let k = params.k;
    let g = WeightedGraph::from_fn(params.n, Mode::Similarity, |u, v| m[labels[u] * k + labels[v]])?;

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (v, &l) in labels.iter().enumerate() {
        members[l].push(v);
    }
    let top = params.top_tree.tree();
    let mut b = TreeBuilder::with_capacity(params.n);
    let mut weights: Vec<Option<f64>> = Vec::new();
    let mut built: Vec<Option<NodeId>> = vec![None; top.nodes().len()];
    for id in top.postorder() {
        built[id] = match top.node(id) {
            Node::Leaf(i) if members[i].is_empty() => None,
            Node::Leaf(i) => {
                let sub = ClusterTree::balanced(&members[i])?;
                let root = b.graft(&sub);
                for nd in sub.nodes() {
                    weights.push(matches!(nd, Node::Internal(..)).then_some(params.alpha * params.p[i]));
                }
                Some(root)
            }
            Node::Internal(l, r) => match (built[l], built[r]) {
                (Some(a), Some(c)) => {
                    let j = b.join(a, c);
                    weights.push(Some(params.alpha * params.top_tree.weight(id).expect("internal weight")));
                    Some(j)
                }
                (one, None) | (None, one) => one,
            },
        };
    }
    let root = built[top.root()].ok_or_else(|| Error::Internal("no vertices".into()))?;
    let tree = b.finish(root)?;
    if tree.nodes().len() != weights.len() {
        return Err(Error::Internal("ground-truth tree arena out of sync".into()));
    }
    Ok((g, GeneratingTree::new(tree, weights, Mode::Similarity)?))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    /// Orthonormal basis of the top-k subspace, `basis[j]` is column j.
    /// Columns lost to rank deficiency are zero.
    pub basis: Vec<Vec<f64>>,
    /// Coordinates Qᵀ·a_v of every adjacency column.
    pub points: Vec<Vec<f64>>,
    pub rank: usize,
    pub rank_deficient: bool,
    pub iterations: usize,
}

const PROJECTION_TOL: f64 = 1e-8;
const PROJECTION_MAX_ITER: usize = 2000;

fn mat_mul(g: &WeightedGraph, q: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = g.n();
    q.iter()
        .map(|col| {
            (0..n)
                .map(|u| g.row(u).iter().zip(col).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Modified Gram-Schmidt in place; returns the number of nonzero columns.
fn orthonormalize(q: &mut [Vec<f64>], scale: f64) -> usize {
    let mut rank = 0;
    for j in 0..q.len() {
        for i in 0..j {
            let (head, tail) = q.split_at_mut(j);
            let d = dot(&head[i], &tail[0]);
            for (x, y) in tail[0].iter_mut().zip(&head[i]) {
                *x -= d * y;
            }
        }
        let norm = libm::sqrt(dot(&q[j], &q[j]));
        if norm <= 1e-10 * scale {
            q[j].iter_mut().for_each(|x| *x = 0.0);
        } else {
            q[j].iter_mut().for_each(|x| *x /= norm);
            rank += 1;
        }
    }
    rank
}

/// Projects every adjacency column onto the top-k singular subspace of the
/// (symmetric) adjacency matrix, computed by orthogonal iteration on A² from
/// a seeded start until the subspace moves less than 1e-8.
pub fn spectral_project(g: &WeightedGraph, k: usize, seed: u64) -> Result<Projection> {
    let n = g.n();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("need 1 ≤ k ≤ n, got k = {k}, n = {n}")));
    }
    let mut r = rng::seeded(seed);
    let mut q: Vec<Vec<f64>> = (0..k).map(|_| (0..n).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
    orthonormalize(&mut q, 1.0);
    let scale = g.max_weight().max(1.0) * n as f64;
    let mut rank = k;
    let mut iterations = 0;
    while iterations < PROJECTION_MAX_ITER {
        iterations += 1;
        let mut z = mat_mul(g, &mat_mul(g, &q));
        rank = orthonormalize(&mut z, scale * scale);
        // residual of the new basis outside the old subspace
        let mut res = 0.0;
        for col in &z {
            let mut rest = col.clone();
            for b in &q {
                let d = dot(b, col);
                for (x, y) in rest.iter_mut().zip(b) {
                    *x -= d * y;
                }
            }
            res += dot(&rest, &rest);
        }
        q = z;
        if libm::sqrt(res) <= PROJECTION_TOL {
            break;
        }
    }
    let points = (0..n).map(|v| q.iter().map(|b| dot(b, g.row(v))).collect()).collect();
    Ok(Projection { basis: q, points, rank, rank_deficient: rank < k, iterations })
}

/// Single linkage on points under Euclidean distance, stopping at `k`
/// clusters. Equal distances are ordered by random keys drawn from `seed`.
/// Clusters are returned sorted by their smallest vertex.
pub fn geometric_single_linkage(points: &[Vec<f64>], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("need 1 ≤ k ≤ n, got k = {k}, n = {n}")));
    }
    let mut r = rng::seeded(seed);
    let mut pairs: Vec<(f64, u64, u32, u32)> = Vec::with_capacity(n * (n - 1) / 2);
    for u in 0..n {
        for v in u + 1..n {
            let d: f64 = points[u].iter().zip(&points[v]).map(|(a, b)| (a - b) * (a - b)).sum();
            pairs.push((d, r.random(), u as u32, v as u32));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut comps = n;
    for &(_, _, u, v) in &pairs {
        if comps == k {
            break;
        }
        let (a, b) = (find(&mut parent, u as usize), find(&mut parent, v as usize));
        if a != b {
            parent[a.max(b)] = a.min(b);
            comps -= 1;
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for v in 0..n {
        let root = find(&mut parent, v);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(v);
    }
    Ok(groups)
}

pub fn default_repetitions(k: usize, n: usize) -> usize {
    (libm::ceil(2.0 * k as f64 * libm::log(n.max(2) as f64)) as usize).max(1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RepetitionStats {
    pub cluster_sizes: Vec<usize>,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Recovery {
    pub tree: ClusterTree,
    /// Bottom clusters of the chosen repetition.
    pub clusters: Vec<Vec<usize>>,
    pub repetitions: Vec<RepetitionStats>,
    pub best: usize,
    pub rank_deficient: bool,
}

/// Spectral projection, geometric single linkage down to `k` clusters,
/// balanced trees inside the clusters and average linkage (maximum average
/// similarity) above them. Repeated `repetitions` times (default
/// ceil(2k·ln n)); the cheapest tree wins, ties to the earliest repetition.
pub fn recover_tree(g: &WeightedGraph, k: usize, cf: &CostFunction, repetitions: Option<usize>, seed: u64) -> Result<Recovery> {
    let n = g.n();
    let reps = repetitions.unwrap_or_else(|| default_repetitions(k, n)).max(1);
    let proj = spectral_project(g, k, seed)?;
    let policy = LinkagePolicy::new(LinkageKind::Average, Mode::Similarity);
    let mut best: Option<(f64, usize, ClusterTree, Vec<Vec<usize>>)> = None;
    let mut stats = Vec::with_capacity(reps);
    for rep in 0..reps {
        let clusters = geometric_single_linkage(&proj.points, k, rng::derive(seed, rep as u64))?;
        let subtrees = clusters.iter().map(|c| ClusterTree::balanced(c)).collect::<Result<Vec<_>>>()?;
        let (tree, _) = linkage::linkage_from(g, &subtrees, &policy)?;
        let cost = cf.evaluate(g, &tree)?.total;
        stats.push(RepetitionStats { cluster_sizes: clusters.iter().map(Vec::len).collect(), cost });
        if best.as_ref().is_none_or(|b| cost < b.0) {
            best = Some((cost, rep, tree, clusters));
        }
    }
    let (_, best_rep, tree, clusters) = best.expect("at least one repetition");
    Ok(Recovery { tree, clusters, repetitions: stats, best: best_rep, rank_deficient: proj.rank_deficient })
}

/// True iff `clusters` is exactly the partition induced by `labels` over the
/// nonempty classes.
pub fn exact_recovery(clusters: &[Vec<usize>], labels: &[usize]) -> bool {
    let mut truth: Vec<Vec<usize>> = Vec::new();
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut by_class = vec![Vec::new(); k];
    for (v, &l) in labels.iter().enumerate() {
        by_class[l].push(v);
    }
    truth.extend(by_class.into_iter().filter(|c| !c.is_empty()));
    let mut got: Vec<Vec<usize>> = clusters
        .iter()
        .map(|c| {
            let mut c = c.clone();
            c.sort_unstable();
            c
        })
        .collect();
    got.sort();
    truth.sort();
    got == truth
}
