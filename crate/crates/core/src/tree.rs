//! Rooted binary cluster trees, stored as an arena of nodes.
//!
//! Text format: a leaf is its decimal label, an internal node is `(L,R)` and
//! may carry a weight annotation `(L,R):W`. The canonical form puts the child
//! holding the smaller minimum leaf on the left.

use alloc::{collections::BTreeSet, format, string::String, vec, vec::Vec};
use core::{fmt, str::FromStr};

use crate::{Error, Result};

pub type NodeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Leaf(usize),
    Internal(NodeId, NodeId),
}

/// A binary tree whose leaves carry distinct vertex labels.
///
/// Structural equality (`==`) compares arenas. Use [`ClusterTree::canonical`]
/// or [`ClusterTree::same_tree`] to compare trees as unordered hierarchies.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ClusterTree {
    nodes: Vec<Node>,
    root: NodeId,
}

/// Incremental arena construction used by the algorithms.
#[derive(Default, Debug)]
pub struct TreeBuilder {
    nodes: Vec<Node>,
}

impl TreeBuilder {
    pub fn new() -> Self {
        TreeBuilder::default()
    }

    pub fn with_capacity(n_leaves: usize) -> Self {
        TreeBuilder { nodes: Vec::with_capacity(2 * n_leaves) }
    }

    pub fn leaf(&mut self, v: usize) -> NodeId {
        self.nodes.push(Node::Leaf(v));
        self.nodes.len() - 1
    }

    pub fn join(&mut self, l: NodeId, r: NodeId) -> NodeId {
        self.nodes.push(Node::Internal(l, r));
        self.nodes.len() - 1
    }

    /// Copies `t` into the arena and returns the id of its root.
    pub fn graft(&mut self, t: &ClusterTree) -> NodeId {
        let off = self.nodes.len();
        self.nodes.extend(t.nodes.iter().map(|nd| match *nd {
            Node::Leaf(v) => Node::Leaf(v),
            Node::Internal(l, r) => Node::Internal(l + off, r + off),
        }));
        t.root + off
    }

    /// Validates the subtree under `root`; unreachable arena nodes are dropped.
    pub fn finish(self, root: NodeId) -> Result<ClusterTree> {
        ClusterTree::from_nodes(self.nodes, root)
    }
}

impl ClusterTree {
    pub fn leaf(v: usize) -> Self {
        ClusterTree { nodes: vec![Node::Leaf(v)], root: 0 }
    }

    /// Builds a tree from an arena. Nodes not reachable from `root` are
    /// discarded; reachable nodes must form a tree with distinct leaf labels.
    pub fn from_nodes(nodes: Vec<Node>, root: NodeId) -> Result<Self> {
        if root >= nodes.len() {
            return Err(Error::invalid("root out of range"));
        }
        let mut visited = vec![false; nodes.len()];
        let mut labels = BTreeSet::new();
        let mut stack = vec![root];
        let mut reached = 0usize;
        while let Some(id) = stack.pop() {
            if visited[id] {
                return Err(Error::invalid(format!("node {id} reachable twice (cycle or shared subtree)")));
            }
            visited[id] = true;
            reached += 1;
            match nodes[id] {
                Node::Leaf(v) => {
                    if !labels.insert(v) {
                        return Err(Error::invalid(format!("leaf label {v} appears twice")));
                    }
                }
                Node::Internal(l, r) => {
                    if l >= nodes.len() || r >= nodes.len() {
                        return Err(Error::invalid(format!("node {id} has a child out of range")));
                    }
                    stack.push(r);
                    stack.push(l);
                }
            }
        }
        let t = if reached == nodes.len() {
            ClusterTree { nodes, root }
        } else {
            compact(&nodes, root)
        };
        Ok(t)
    }

    /// Tree whose root has `t1` and `t2` as children.
    pub fn union(t1: &ClusterTree, t2: &ClusterTree) -> Result<Self> {
        let a: BTreeSet<usize> = t1.leaves().into_iter().collect();
        if let Some(v) = t2.leaves().into_iter().find(|v| a.contains(v)) {
            return Err(Error::invalid(format!("leaf {v} appears in both trees")));
        }
        let mut b = TreeBuilder::with_capacity(t1.n_leaves() + t2.n_leaves());
        let l = b.graft(t1);
        let r = b.graft(t2);
        let root = b.join(l, r);
        Ok(ClusterTree { nodes: b.nodes, root })
    }

    /// Balanced tree over `labels`: the first half (rounded down) goes left.
    pub fn balanced(labels: &[usize]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::invalid("tree over an empty label set"));
        }
        let mut b = TreeBuilder::with_capacity(labels.len());
        let root = build_balanced(&mut b, labels);
        b.finish(root)
    }

    /// Caterpillar `(((l0,l1),l2),...)`.
    pub fn caterpillar(labels: &[usize]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::invalid("tree over an empty label set"));
        }
        let mut b = TreeBuilder::with_capacity(labels.len());
        let mut acc = b.leaf(labels[0]);
        for &v in &labels[1..] {
            let l = b.leaf(v);
            acc = b.join(acc, l);
        }
        b.finish(acc)
    }

    #[inline]
    pub fn root(&self) -> NodeId {
        self.root
    }

    #[inline]
    pub fn node(&self, id: NodeId) -> Node {
        self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn children(&self, id: NodeId) -> Option<(NodeId, NodeId)> {
        match self.nodes[id] {
            Node::Internal(l, r) => Some((l, r)),
            Node::Leaf(_) => None,
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.len().div_ceil(2)
    }

    /// Leaf labels in left-to-right order.
    pub fn leaves(&self) -> Vec<usize> {
        self.postorder()
            .into_iter()
            .filter_map(|id| match self.nodes[id] {
                Node::Leaf(v) => Some(v),
                Node::Internal(..) => None,
            })
            .collect()
    }

    pub fn internal_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().enumerate().filter_map(|(i, nd)| matches!(nd, Node::Internal(..)).then_some(i))
    }

    /// True iff the leaf labels are exactly `0..n`.
    pub fn is_over(&self, n: usize) -> bool {
        let mut leaves = self.leaves();
        leaves.sort_unstable();
        leaves.len() == n && leaves.iter().enumerate().all(|(i, &v)| i == v)
    }

    pub(crate) fn check_over(&self, n: usize) -> Result<()> {
        if self.is_over(n) {
            Ok(())
        } else {
            Err(Error::Precondition(format!("tree leaves are not exactly the vertices 0..{n}")))
        }
    }

    /// Children before parents, left before right.
    pub fn postorder(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((id, expanded)) = stack.pop() {
            match self.nodes[id] {
                Node::Internal(l, r) if !expanded => {
                    stack.push((id, true));
                    stack.push((r, false));
                    stack.push((l, false));
                }
                _ => out.push(id),
            }
        }
        out
    }

    pub fn parents(&self) -> Vec<Option<NodeId>> {
        let mut p = vec![None; self.nodes.len()];
        for (id, nd) in self.nodes.iter().enumerate() {
            if let Node::Internal(l, r) = *nd {
                p[l] = Some(id);
                p[r] = Some(id);
            }
        }
        p
    }

    /// Number of leaves below every node.
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.nodes.len()];
        for id in self.postorder() {
            s[id] = match self.nodes[id] {
                Node::Leaf(_) => 1,
                Node::Internal(l, r) => s[l] + s[r],
            };
        }
        s
    }

    /// Smallest leaf label below every node.
    pub fn min_leaves(&self) -> Vec<usize> {
        let mut m = vec![0; self.nodes.len()];
        for id in self.postorder() {
            m[id] = match self.nodes[id] {
                Node::Leaf(v) => v,
                Node::Internal(l, r) => m[l].min(m[r]),
            };
        }
        m
    }

    /// Leaf labels below every node, V(N). Uses O(n·depth) memory.
    pub fn leaf_sets(&self) -> Vec<Vec<usize>> {
        let mut sets: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for id in self.postorder() {
            sets[id] = match self.nodes[id] {
                Node::Leaf(v) => vec![v],
                Node::Internal(l, r) => {
                    let mut s = Vec::with_capacity(sets[l].len() + sets[r].len());
                    s.extend_from_slice(&sets[l]);
                    s.extend_from_slice(&sets[r]);
                    s
                }
            };
        }
        sets
    }

    /// Leaf labels in postorder plus, for every node, the half-open range of
    /// that order holding V(N).
    pub fn leaf_ranges(&self) -> (Vec<usize>, Vec<(usize, usize)>) {
        let mut order = Vec::with_capacity(self.n_leaves());
        let mut range = vec![(0usize, 0usize); self.nodes.len()];
        for id in self.postorder() {
            match self.nodes[id] {
                Node::Leaf(v) => {
                    range[id] = (order.len(), order.len() + 1);
                    order.push(v);
                }
                Node::Internal(l, r) => range[id] = (range[l].0, range[r].1),
            }
        }
        (order, range)
    }

    /// Lowest common ancestor of two distinct leaves.
    pub fn lca(&self, u: usize, v: usize) -> Result<NodeId> {
        LcaIndex::new(self).lca(u, v)
    }

    /// Same hierarchy with children ordered by minimum leaf and the arena laid
    /// out in postorder.
    pub fn canonical(&self) -> ClusterTree {
        self.canonical_with_map().0
    }

    /// Canonical tree plus `map[old_id] = new_id`.
    pub fn canonical_with_map(&self) -> (ClusterTree, Vec<NodeId>) {
        let mins = self.min_leaves();
        let mut map = vec![0; self.nodes.len()];
        let mut nodes = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((id, expanded)) = stack.pop() {
            match self.nodes[id] {
                Node::Internal(l, r) if !expanded => {
                    let (a, b) = if mins[l] <= mins[r] { (l, r) } else { (r, l) };
                    stack.push((id, true));
                    stack.push((b, false));
                    stack.push((a, false));
                }
                Node::Internal(l, r) => {
                    let (a, b) = if mins[l] <= mins[r] { (map[l], map[r]) } else { (map[r], map[l]) };
                    nodes.push(Node::Internal(a, b));
                    map[id] = nodes.len() - 1;
                }
                Node::Leaf(v) => {
                    nodes.push(Node::Leaf(v));
                    map[id] = nodes.len() - 1;
                }
            }
        }
        let root = nodes.len() - 1;
        (ClusterTree { nodes, root }, map)
    }

    /// Equality as unordered hierarchies.
    pub fn same_tree(&self, other: &ClusterTree) -> bool {
        self.canonical() == other.canonical()
    }

    /// Tree with every leaf `v` renamed to `f(v)`.
    pub fn relabel(&self, mut f: impl FnMut(usize) -> usize) -> Result<ClusterTree> {
        let nodes = self
            .nodes
            .iter()
            .map(|nd| match *nd {
                Node::Leaf(v) => Node::Leaf(f(v)),
                other => other,
            })
            .collect();
        ClusterTree::from_nodes(nodes, self.root)
    }

    /// Canonical text, with `annotate(node)` appended as `:W` after internal
    /// nodes where it returns a value.
    pub fn serialize_with(&self, mut annotate: impl FnMut(NodeId) -> Option<f64>) -> String {
        enum Emit {
            Node(NodeId),
            Text(&'static str),
            Weight(NodeId),
        }
        let mins = self.min_leaves();
        let mut out = String::new();
        let mut stack = vec![Emit::Node(self.root)];
        while let Some(e) = stack.pop() {
            match e {
                Emit::Text(s) => out.push_str(s),
                Emit::Weight(id) => {
                    if let Some(w) = annotate(id) {
                        out.push_str(&format!(":{w}"));
                    }
                }
                Emit::Node(id) => match self.nodes[id] {
                    Node::Leaf(v) => out.push_str(&format!("{v}")),
                    Node::Internal(l, r) => {
                        let (a, b) = if mins[l] <= mins[r] { (l, r) } else { (r, l) };
                        stack.push(Emit::Weight(id));
                        stack.push(Emit::Text(")"));
                        stack.push(Emit::Node(b));
                        stack.push(Emit::Text(","));
                        stack.push(Emit::Node(a));
                        stack.push(Emit::Text("("));
                    }
                },
            }
        }
        out
    }

    pub fn serialize(&self) -> String {
        self.serialize_with(|_| None)
    }

    /// Parses the text format, rejecting weight annotations.
    pub fn parse(s: &str) -> Result<ClusterTree> {
        let (t, w) = ClusterTree::parse_annotated(s)?;
        if w.iter().any(Option::is_some) {
            return Err(Error::parse(s.find(':').unwrap_or(0), "unexpected weight annotation"));
        }
        Ok(t)
    }

    /// Parses the text format; the second vector holds the `:W` annotation of
    /// each node (indexed by node id), if present.
    pub fn parse_annotated(s: &str) -> Result<(ClusterTree, Vec<Option<f64>>)> {
        Parser { s: s.as_bytes(), pos: 0 }.run()
    }
}

impl fmt::Display for ClusterTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

impl FromStr for ClusterTree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClusterTree::parse(s)
    }
}

fn build_balanced(b: &mut TreeBuilder, labels: &[usize]) -> NodeId {
    // Explicit stack: (slice start, slice end, expanded)
    let mut out: Vec<NodeId> = Vec::new();
    let mut stack = vec![(0usize, labels.len(), false)];
    while let Some((lo, hi, expanded)) = stack.pop() {
        if hi - lo == 1 {
            out.push(b.leaf(labels[lo]));
        } else if !expanded {
            let mid = lo + (hi - lo) / 2;
            stack.push((lo, hi, true));
            stack.push((mid, hi, false));
            stack.push((lo, mid, false));
        } else {
            let r = out.pop().expect("right subtree");
            let l = out.pop().expect("left subtree");
            out.push(b.join(l, r));
        }
    }
    out[0]
}

fn compact(nodes: &[Node], root: NodeId) -> ClusterTree {
    let mut map = vec![usize::MAX; nodes.len()];
    let mut out = Vec::new();
    let mut stack = vec![(root, false)];
    while let Some((id, expanded)) = stack.pop() {
        match nodes[id] {
            Node::Internal(l, r) if !expanded => {
                stack.push((id, true));
                stack.push((r, false));
                stack.push((l, false));
            }
            Node::Internal(l, r) => {
                out.push(Node::Internal(map[l], map[r]));
                map[id] = out.len() - 1;
            }
            Node::Leaf(v) => {
                out.push(Node::Leaf(v));
                map[id] = out.len() - 1;
            }
        }
    }
    let root = out.len() - 1;
    ClusterTree { nodes: out, root }
}

/// Parent/depth tables for repeated LCA queries.
#[derive(Clone, Debug)]
pub struct LcaIndex {
    parent: Vec<Option<NodeId>>,
    depth: Vec<usize>,
    leaf_of: Vec<(usize, NodeId)>,
}

impl LcaIndex {
    pub fn new(t: &ClusterTree) -> Self {
        let parent = t.parents();
        let mut depth = vec![0; t.nodes.len()];
        let mut order = t.postorder();
        order.reverse();
        for id in order {
            if let Some(p) = parent[id] {
                depth[id] = depth[p] + 1;
            }
        }
        let mut leaf_of: Vec<(usize, NodeId)> = t
            .nodes
            .iter()
            .enumerate()
            .filter_map(|(i, nd)| match *nd {
                Node::Leaf(v) => Some((v, i)),
                Node::Internal(..) => None,
            })
            .collect();
        leaf_of.sort_unstable();
        LcaIndex { parent, depth, leaf_of }
    }

    pub fn leaf_node(&self, v: usize) -> Option<NodeId> {
        self.leaf_of.binary_search_by_key(&v, |&(l, _)| l).ok().map(|i| self.leaf_of[i].1)
    }

    pub fn depth(&self, id: NodeId) -> usize {
        self.depth[id]
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.parent[id]
    }

    pub fn lca(&self, u: usize, v: usize) -> Result<NodeId> {
        if u == v {
            return Err(Error::invalid(format!("lca of a leaf with itself ({u})")));
        }
        let mut a = self.leaf_node(u).ok_or_else(|| Error::invalid(format!("{u} is not a leaf")))?;
        let mut b = self.leaf_node(v).ok_or_else(|| Error::invalid(format!("{v} is not a leaf")))?;
        Ok(self.lca_nodes(&mut a, &mut b))
    }

    fn lca_nodes(&self, a: &mut NodeId, b: &mut NodeId) -> NodeId {
        while self.depth[*a] > self.depth[*b] {
            *a = self.parent[*a].expect("non-root has a parent");
        }
        while self.depth[*b] > self.depth[*a] {
            *b = self.parent[*b].expect("non-root has a parent");
        }
        while a != b {
            *a = self.parent[*a].expect("non-root has a parent");
            *b = self.parent[*b].expect("non-root has a parent");
        }
        *a
    }
}

#[derive(PartialEq)]
enum Expect {
    Item,
    AfterItem,
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

struct Frame {
    open: usize,
    items: Vec<NodeId>,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn run(mut self) -> Result<(ClusterTree, Vec<Option<f64>>)> {
        let mut nodes: Vec<Node> = Vec::new();
        let mut weights: Vec<Option<f64>> = Vec::new();
        let mut stack: Vec<Frame> = Vec::new();
        let mut root: Option<NodeId> = None;
        let mut expect = Expect::Item;
        loop {
            self.skip_ws();
            let at = self.pos;
            let Some(&c) = self.s.get(at) else { break };
            match (&expect, c) {
                (Expect::Item, b'(') => {
                    stack.push(Frame { open: at, items: Vec::new() });
                    self.pos += 1;
                }
                (Expect::Item, b'0'..=b'9') => {
                    while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                    let text = core::str::from_utf8(&self.s[at..self.pos]).expect("ascii digits");
                    let v: usize = text.parse().map_err(|_| Error::parse(at, "leaf label out of range"))?;
                    nodes.push(Node::Leaf(v));
                    weights.push(None);
                    attach(&mut stack, &mut root, nodes.len() - 1, at)?;
                    expect = Expect::AfterItem;
                }
                (Expect::Item, _) => return Err(Error::parse(at, "expected '(' or a leaf label")),
                (Expect::AfterItem, b',') => {
                    match stack.last() {
                        Some(f) if f.items.len() == 1 => {}
                        Some(_) => return Err(Error::parse(at, "more than two children")),
                        None => return Err(Error::parse(at, "',' outside parentheses")),
                    }
                    self.pos += 1;
                    expect = Expect::Item;
                }
                (Expect::AfterItem, b')') => {
                    let f = stack.pop().ok_or_else(|| Error::parse(at, "unbalanced ')'"))?;
                    if f.items.len() != 2 {
                        return Err(Error::parse(at, "internal node needs exactly two children"));
                    }
                    self.pos += 1;
                    nodes.push(Node::Internal(f.items[0], f.items[1]));
                    weights.push(self.weight()?);
                    attach(&mut stack, &mut root, nodes.len() - 1, f.open)?;
                }
                (Expect::AfterItem, b':') => return Err(Error::parse(at, "weight annotation on a leaf")),
                (Expect::AfterItem, _) => return Err(Error::parse(at, "expected ',' or ')'")),
            }
        }
        if let Some(f) = stack.last() {
            return Err(Error::parse(f.open, "unclosed '('"));
        }
        let root = root.ok_or_else(|| Error::parse(self.pos, "empty tree"))?;
        let t = ClusterTree::from_nodes(nodes, root).map_err(|e| match e {
            Error::InvalidArgument(m) => Error::parse(0, m),
            other => other,
        })?;
        Ok((t, weights))
    }

    fn weight(&mut self) -> Result<Option<f64>> {
        self.skip_ws();
        if self.s.get(self.pos) != Some(&b':') {
            return Ok(None);
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && !matches!(self.s[self.pos], b',' | b')' | b'(') && !self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let text = core::str::from_utf8(&self.s[start..self.pos]).map_err(|_| Error::parse(start, "invalid weight"))?;
        let w: f64 = text.parse().map_err(|_| Error::parse(start, format!("invalid weight {text:?}")))?;
        if !w.is_finite() || w < 0.0 {
            return Err(Error::parse(start, "weight must be finite and nonnegative"));
        }
        Ok(Some(w))
    }
}

fn attach(stack: &mut [Frame], root: &mut Option<NodeId>, id: NodeId, at: usize) -> Result<()> {
    match stack.last_mut() {
        Some(f) => {
            if f.items.len() == 2 {
                return Err(Error::parse(at, "more than two children"));
            }
            f.items.push(id);
        }
        None => {
            if root.is_some() {
                return Err(Error::parse(at, "trailing input after the tree"));
            }
            *root = Some(id);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use proptest::prelude::*;

    fn t(s: &str) -> ClusterTree {
        s.parse().unwrap()
    }

    #[test]
    fn union_examples() {
        let u = ClusterTree::union(&ClusterTree::leaf(0), &ClusterTree::leaf(1)).unwrap();
        assert_eq!(u.to_string(), "(0,1)");
        let u2 = ClusterTree::union(&u, &ClusterTree::leaf(2)).unwrap();
        assert_eq!(u2.to_string(), "((0,1),2)");
        let u3 = ClusterTree::union(&u, &t("(2,3)")).unwrap();
        assert_eq!(u3.to_string(), "((0,1),(2,3))");
        assert_eq!(u3.internal_nodes().count(), 3);
        assert!(ClusterTree::union(&u, &t("(1,3)")).is_err());
    }

    #[test]
    fn canonical_serialization() {
        assert_eq!(t("((2,3),(0,1))").to_string(), "((0,1),(2,3))");
        let c = t("((0,1),2)");
        assert_eq!(c.n_leaves(), 3);
        assert_eq!(c.children(c.root()).map(|(l, r)| (c.node(l), c.node(r))).unwrap().1, Node::Leaf(2));
    }

    #[test]
    fn lca_examples() {
        let g = t("((0,1),(2,3))");
        let n01 = g.lca(0, 1).unwrap();
        assert_eq!(g.leaf_sets()[n01], vec![0, 1]);
        assert_eq!(g.lca(0, 2).unwrap(), g.root());
        let c = t("(((0,1),2),3)");
        assert_eq!(c.lca(1, 3).unwrap(), c.root());
        assert!(matches!(c.lca(2, 2), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn parse_errors_carry_offsets() {
        let cases = [
            ("(0,1", 0),
            ("(0,1))", 5),
            ("(0,,1)", 3),
            ("(0,1,2)", 4),
            ("(0)", 2),
            ("(0,x)", 3),
            ("", 0),
            ("(0,1)2", 5),
            ("(0:1,2)", 2),
        ];
        for (s, off) in cases {
            match ClusterTree::parse(s) {
                Err(Error::Parse { offset, .. }) => assert_eq!(offset, off, "{s}"),
                other => panic!("{s}: {other:?}"),
            }
        }
        assert!(matches!(ClusterTree::parse("(0,0)"), Err(Error::Parse { .. })));
        assert!(matches!(ClusterTree::parse("(0,1):2"), Err(Error::Parse { offset: 5, .. })));
    }

    #[test]
    fn annotations_round_trip() {
        let (tr, w) = ClusterTree::parse_annotated("((0,1):3,(2,3):3):1").unwrap();
        assert_eq!(tr.serialize_with(|id| w[id]), "((0,1):3,(2,3):3):1");
        let (_, w) = ClusterTree::parse_annotated("((0,1):0.25,2):1e-3").unwrap();
        assert_eq!(w.iter().flatten().copied().collect::<Vec<_>>(), vec![0.25, 0.001]);
    }

    #[test]
    fn deep_caterpillar_does_not_overflow() {
        let labels: Vec<usize> = (0..200_000).collect();
        let c = ClusterTree::caterpillar(&labels).unwrap();
        let s = c.to_string();
        let back = ClusterTree::parse(&s).unwrap();
        assert!(back.same_tree(&c));
        assert_eq!(LcaIndex::new(&c).depth(LcaIndex::new(&c).leaf_node(0).unwrap()), 199_999);
    }

    #[test]
    fn from_nodes_rejects_shared_subtrees() {
        let nodes = vec![Node::Leaf(0), Node::Internal(0, 0)];
        assert!(ClusterTree::from_nodes(nodes, 1).is_err());
        let nodes = vec![Node::Leaf(0), Node::Leaf(0), Node::Internal(0, 1)];
        assert!(ClusterTree::from_nodes(nodes, 2).is_err());
    }

    pub(crate) fn arb_tree(max_n: usize) -> impl Strategy<Value = ClusterTree> {
        (1..=max_n, any::<u64>()).prop_map(|(n, seed)| crate::exact::random_tree(n, seed))
    }

    proptest! {
        #[test]
        fn parse_serialize_round_trip(tr in arb_tree(40)) {
            let back = ClusterTree::parse(&tr.serialize()).unwrap();
            prop_assert_eq!(back, tr.canonical());
        }

        #[test]
        fn lca_cut_is_unique_separator(tr in arb_tree(12)) {
            let n = tr.n_leaves();
            let sets = tr.leaf_sets();
            let idx = LcaIndex::new(&tr);
            for u in 0..n {
                for v in u + 1..n {
                    let separating: Vec<NodeId> = tr.internal_nodes().filter(|&id| {
                        let (l, r) = tr.children(id).unwrap();
                        (sets[l].contains(&u) && sets[r].contains(&v)) || (sets[l].contains(&v) && sets[r].contains(&u))
                    }).collect();
                    prop_assert_eq!(separating, vec![idx.lca(u, v).unwrap()]);
                }
            }
        }
    }
}
