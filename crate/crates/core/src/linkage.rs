//! Agglomerative linkage: single, complete and average, with pluggable tie
//! breaking.
//!
//! Distances between clusters follow one table for both modes: single = the
//! minimum cross weight, complete = the maximum, average = the mean. The
//! policy's `mode` picks the merge direction: `Similarity` merges the pair of
//! maximum distance, `Dissimilarity` the pair of minimum distance. It is
//! independent of the graph's own mode.

use alloc::{format, vec, vec::Vec};

use crate::{
    graph::{Mode, WeightedGraph},
    objective::CostFunction,
    tree::{ClusterTree, NodeId, TreeBuilder},
    Error, Result,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinkageKind {
    Single,
    Complete,
    Average,
}

impl LinkageKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkageKind::Single => "single",
            LinkageKind::Complete => "complete",
            LinkageKind::Average => "average",
        }
    }
}

/// How to choose among pairs whose distance ties the best one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TieBreak {
    /// Smallest (min leaf, min leaf) pair, compared lexicographically.
    LowestIndex,
    /// `ranks[v]` orders vertices; a cluster is ranked by its best member and
    /// the pair with the lexicographically smallest rank pair wins.
    Priority(Vec<usize>),
    /// Step `s` merges the clusters holding `script[s].0` and `script[s].1`,
    /// which must be among the tied pairs. Falls back to `LowestIndex` once the
    /// script is exhausted.
    Script(Vec<(usize, usize)>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkagePolicy {
    pub kind: LinkageKind,
    pub mode: Mode,
    pub tie_break: TieBreak,
}

impl LinkagePolicy {
    pub fn new(kind: LinkageKind, mode: Mode) -> Self {
        LinkagePolicy { kind, mode, tie_break: TieBreak::LowestIndex }
    }

    pub fn with_ties(mut self, tie_break: TieBreak) -> Self {
        self.tie_break = tie_break;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MergeStep {
    /// Members of the cluster with the smaller minimum leaf, sorted.
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MergeTrace {
    pub steps: Vec<MergeStep>,
}

impl MergeTrace {
    /// Rebuilds the tree from singletons `0..n`.
    pub fn replay(&self, n: usize) -> Result<ClusterTree> {
        let leaves: Vec<ClusterTree> = (0..n).map(ClusterTree::leaf).collect();
        self.replay_from(&leaves)
    }

    /// Rebuilds the tree from the given initial clusters, checking that every
    /// step joins two current clusters exactly.
    pub fn replay_from(&self, initial: &[ClusterTree]) -> Result<ClusterTree> {
        let mut b = TreeBuilder::new();
        let mut clusters: Vec<Option<(Vec<usize>, NodeId)>> = initial
            .iter()
            .map(|t| {
                let mut m = t.leaves();
                m.sort_unstable();
                Some((m, b.graft(t)))
            })
            .collect();
        for (s, step) in self.steps.iter().enumerate() {
            let find = |set: &[usize], cl: &[Option<(Vec<usize>, NodeId)>]| cl.iter().position(|c| c.as_ref().is_some_and(|(m, _)| m == set));
            let (Some(i), Some(j)) = (find(&step.a, &clusters), find(&step.b, &clusters)) else {
                return Err(Error::invalid(format!("trace step {s} does not join two current clusters")));
            };
            let (ma, na) = clusters[i].take().expect("found");
            let (mb, nb) = clusters[j].take().expect("found");
            let mut m = ma;
            m.extend(mb);
            m.sort_unstable();
            clusters[i] = Some((m, b.join(na, nb)));
        }
        let mut left = clusters.into_iter().flatten();
        match (left.next(), left.next()) {
            (Some((_, root)), None) => b.finish(root),
            _ => Err(Error::invalid("trace does not end in a single cluster")),
        }
    }
}

struct Cluster {
    members: Vec<usize>,
    node: NodeId,
    id: usize,
    rank: usize,
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// Runs the linkage from singletons.
pub fn linkage(g: &WeightedGraph, policy: &LinkagePolicy) -> Result<(ClusterTree, MergeTrace)> {
    if g.n() == 0 {
        return Err(Error::invalid("linkage on an empty graph"));
    }
    let leaves: Vec<ClusterTree> = (0..g.n()).map(ClusterTree::leaf).collect();
    linkage_from(g, &leaves, policy)
}

/// Runs the linkage starting from a partition of the vertices into subtrees.
/// O(m³) for m initial clusters, with cluster statistics maintained in place.
pub fn linkage_from(g: &WeightedGraph, initial: &[ClusterTree], policy: &LinkagePolicy) -> Result<(ClusterTree, MergeTrace)> {
    let n = g.n();
    let m = initial.len();
    if m == 0 {
        return Err(Error::invalid("linkage needs at least one cluster"));
    }
    if let TieBreak::Priority(ranks) = &policy.tie_break {
        crate::graph::check_permutation(ranks, n)?;
    }
    let mut b = TreeBuilder::with_capacity(n);
    let mut slot_of = vec![usize::MAX; n];
    let mut clusters: Vec<Option<Cluster>> = Vec::with_capacity(m);
    for (i, t) in initial.iter().enumerate() {
        let mut members = t.leaves();
        members.sort_unstable();
        for &v in &members {
            if v >= n || slot_of[v] != usize::MAX {
                return Err(Error::invalid(format!("initial clusters do not partition the vertices (vertex {v})")));
            }
            slot_of[v] = i;
        }
        let rank = match &policy.tie_break {
            TieBreak::Priority(r) => members.iter().map(|&v| r[v]).min().expect("nonempty"),
            _ => 0,
        };
        let id = members[0];
        clusters.push(Some(Cluster { node: b.graft(t), members, id, rank }));
    }
    if slot_of.contains(&usize::MAX) {
        return Err(Error::invalid("initial clusters do not cover the vertices"));
    }

    let mut sum = vec![0.0; m * m];
    let mut lo = vec![f64::INFINITY; m * m];
    let mut hi = vec![f64::NEG_INFINITY; m * m];
    for u in 0..n {
        let row = g.row(u);
        for v in u + 1..n {
            let (i, j) = (slot_of[u], slot_of[v]);
            if i == j {
                continue;
            }
            let w = row[v];
            for (x, y) in [(i, j), (j, i)] {
                sum[x * m + y] += w;
                lo[x * m + y] = lo[x * m + y].min(w);
                hi[x * m + y] = hi[x * m + y].max(w);
            }
        }
    }

    let dist = |clusters: &[Option<Cluster>], sum: &[f64], lo: &[f64], hi: &[f64], i: usize, j: usize| -> f64 {
        match policy.kind {
            LinkageKind::Single => lo[i * m + j],
            LinkageKind::Complete => hi[i * m + j],
            LinkageKind::Average => {
                let si = clusters[i].as_ref().expect("active").members.len();
                let sj = clusters[j].as_ref().expect("active").members.len();
                sum[i * m + j] / (si * sj) as f64
            }
        }
    };
    let better = |a: f64, b: f64| match policy.mode {
        Mode::Similarity => a > b,
        Mode::Dissimilarity => a < b,
    };

    let mut trace = MergeTrace::default();
    let mut active: Vec<usize> = (0..m).collect();
    let mut ties: Vec<(usize, usize)> = Vec::new();
    for step in 0..m - 1 {
        let mut best = f64::NAN;
        for (x, &i) in active.iter().enumerate() {
            for &j in &active[x + 1..] {
                let d = dist(&clusters, &sum, &lo, &hi, i, j);
                if best.is_nan() || better(d, best) {
                    best = d;
                }
            }
        }
        ties.clear();
        for (x, &i) in active.iter().enumerate() {
            for &j in &active[x + 1..] {
                if close(dist(&clusters, &sum, &lo, &hi, i, j), best) {
                    ties.push((i, j));
                }
            }
        }
        let key = |i: usize, j: usize| -> (usize, usize) {
            let (ci, cj) = (clusters[i].as_ref().expect("active"), clusters[j].as_ref().expect("active"));
            let (a, b) = match policy.tie_break {
                TieBreak::Priority(_) => (ci.rank, cj.rank),
                _ => (ci.id, cj.id),
            };
            (a.min(b), a.max(b))
        };
        let scripted = match &policy.tie_break {
            TieBreak::Script(s) => s.get(step).copied(),
            _ => None,
        };
        let (i, j) = match scripted {
            Some((a, bv)) => {
                if a >= n || bv >= n {
                    return Err(Error::ScriptViolation { step, a, b: bv });
                }
                let (x, y) = (slot_of[a].min(slot_of[bv]), slot_of[a].max(slot_of[bv]));
                if x == y || !ties.contains(&(x, y)) {
                    return Err(Error::ScriptViolation { step, a, b: bv });
                }
                (x, y)
            }
            None => *ties.iter().min_by_key(|&&(i, j)| key(i, j)).expect("at least one pair"),
        };

        for &k in &active {
            if k == i || k == j {
                continue;
            }
            let (ik, jk) = (i * m + k, j * m + k);
            sum[ik] += sum[jk];
            lo[ik] = lo[ik].min(lo[jk]);
            hi[ik] = hi[ik].max(hi[jk]);
            let (ki, kj) = (k * m + i, k * m + j);
            sum[ki] += sum[kj];
            lo[ki] = lo[ki].min(lo[kj]);
            hi[ki] = hi[ki].max(hi[kj]);
        }
        let cj = clusters[j].take().expect("active");
        let ci = clusters[i].take().expect("active");
        let (first, second) = if ci.id < cj.id { (ci, cj) } else { (cj, ci) };
        trace.steps.push(MergeStep { a: first.members.clone(), b: second.members.clone(), value: best });
        for &v in &second.members {
            slot_of[v] = i;
        }
        for &v in &first.members {
            slot_of[v] = i;
        }
        let mut members = first.members;
        members.extend(second.members);
        members.sort_unstable();
        clusters[i] = Some(Cluster {
            node: b.join(first.node, second.node),
            members,
            id: first.id,
            rank: first.rank.min(second.rank),
        });
        active.retain(|&k| k != j);
    }
    let root = clusters[active[0]].as_ref().expect("last cluster").node;
    Ok((b.finish(root)?, trace))
}

#[derive(Clone, Debug, PartialEq)]
pub struct AvgBoundReport {
    pub val: f64,
    pub bound: f64,
    pub ok: bool,
    pub tree: ClusterTree,
}

/// Average linkage on a dissimilarity graph, its Dasgupta value and the
/// guarantee n·Σw/2.
pub fn average_linkage_value_bound_check(g: &WeightedGraph) -> Result<AvgBoundReport> {
    if g.mode() != Mode::Dissimilarity {
        return Err(Error::Precondition("average-linkage value bound needs a dissimilarity graph".into()));
    }
    let (tree, _) = linkage(g, &LinkagePolicy::new(LinkageKind::Average, Mode::Dissimilarity))?;
    let val = CostFunction::dasgupta_up_to(g.n().max(2)).evaluate(g, &tree)?.total;
    let bound = g.n() as f64 * g.total_weight() / 2.0;
    Ok(AvgBoundReport { val, bound, ok: val >= bound - 1e-9, tree })
}
