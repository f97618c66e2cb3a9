//! Admissible cost functions Γ(T) = Σ_N w(V(N₁), V(N₂))·g(|V(N₁)|, |V(N₂)|).
//!
//! Every cost function here is derived from a base sequence g(i,1) through
//! κ(n) = Σ_{i<n} i·g(i,1) and g(n₁,n₂) = (κ(n₁+n₂) − κ(n₁) − κ(n₂))/(n₁n₂),
//! which makes every tree on a unit clique cost exactly κ(n).

use alloc::{collections::BTreeMap, format, string::String, vec, vec::Vec};

use crate::{
    exact::{self, Direction},
    graph::{Mode, WeightedGraph},
    tree::{ClusterTree, LcaIndex, Node, NodeId},
    Error, Result,
};

pub const DEFAULT_N_MAX: usize = 4096;
/// Explicit tables are dense, so they are kept small.
pub const TABLE_N_MAX: usize = 512;
/// Largest clique the admissibility checker enumerates.
pub const ADMISSIBILITY_N_MAX: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct CostFunction {
    name: String,
    n_max: usize,
    kappa: Vec<f64>,
    base: Vec<f64>,
    table: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObjectiveReport {
    pub total: f64,
    /// Contribution γ(N) of every internal node.
    pub per_node: BTreeMap<NodeId, f64>,
}

impl CostFunction {
    /// g(a,b) = a + b, κ(n) = (n−1)n(n+1)/3.
    pub fn dasgupta() -> Self {
        CostFunction::dasgupta_up_to(DEFAULT_N_MAX)
    }

    pub fn dasgupta_up_to(n_max: usize) -> Self {
        let base: Vec<f64> = (1..n_max.max(2)).map(|i| (i + 1) as f64).collect();
        let mut cf = CostFunction::derive(base, n_max);
        cf.name = "dasgupta".into();
        cf
    }

    /// Cost function from g(i,1) = `base[i-1]`, valid for trees of up to
    /// `n_max` leaves. Requires `base.len() >= n_max - 1`.
    pub fn from_base_sequence(base: &[f64], n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::invalid("n_max must be at least 1"));
        }
        if base.len() + 1 < n_max {
            return Err(Error::invalid(format!("base has {} values, n_max = {n_max} needs {}", base.len(), n_max - 1)));
        }
        let base = &base[..n_max.saturating_sub(1)];
        for (k, &b) in base.iter().enumerate() {
            let i = k + 1;
            if !(b.is_finite() && b > 0.0) {
                return Err(Error::AdmissibilityPrecondition { i, reason: "base value must be positive and finite" });
            }
            if k > 0 {
                let prev = base[k - 1] / i as f64;
                let cur = b / (i + 1) as f64;
                if cur < prev * (1.0 - 1e-12) {
                    return Err(Error::AdmissibilityPrecondition { i, reason: "g(i,1)/(i+1) decreases" });
                }
            }
        }
        let cf = CostFunction::derive(base.to_vec(), n_max);
        for n1 in 1..n_max {
            for n2 in 1..n_max - n1 {
                if cf.g(n1 + 1, n2) <= cf.g(n1, n2) {
                    return Err(Error::Construction { n1, n2 });
                }
            }
        }
        Ok(cf)
    }

    /// Cost function with an explicit, unchecked table `g(a,b) = f(a,b)` for
    /// `a + b <= n_max`. Meant for probing broken tables with
    /// [`check_admissibility`].
    pub fn from_table(name: &str, n_max: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        if n_max > TABLE_N_MAX {
            return Err(Error::ResourceGuard { what: "explicit g table", n: n_max, limit: TABLE_N_MAX });
        }
        let w = n_max + 1;
        let mut table = vec![f64::NAN; w * w];
        for a in 1..=n_max {
            for b in 1..=n_max - a {
                table[a * w + b] = f(a, b);
            }
        }
        let base: Vec<f64> = (1..n_max).map(|i| table[i * w + 1]).collect();
        let mut cf = CostFunction::derive(base, n_max);
        cf.name = name.into();
        cf.table = Some(table);
        Ok(cf)
    }

    fn derive(base: Vec<f64>, n_max: usize) -> Self {
        let mut kappa = vec![0.0; n_max + 1];
        for n in 2..=n_max {
            let i = n - 1;
            kappa[n] = kappa[n - 1] + i as f64 * base[i - 1];
        }
        CostFunction { name: String::from("custom"), n_max, kappa, base, table: None }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.into();
        self
    }

    /// Largest tree size the function is defined for.
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// g(i,1) for i = 1..n_max-1.
    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn kappa(&self, n: usize) -> f64 {
        self.kappa[n]
    }

    /// # Panics
    /// If `a` or `b` is zero or `a + b > n_max`.
    #[inline]
    pub fn g(&self, a: usize, b: usize) -> f64 {
        assert!(a >= 1 && b >= 1 && a + b <= self.n_max, "g({a}, {b}) outside the table");
        match &self.table {
            Some(t) => t[a * (self.n_max + 1) + b],
            None => (self.kappa[a + b] - self.kappa[a] - self.kappa[b]) / (a * b) as f64,
        }
    }

    /// max g(n₁,n₂) over n₁ + n₂ = n.
    pub fn g_max(&self, n: usize) -> f64 {
        (1..n).map(|a| self.g(a, n - a)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// g_max(n)·n²/κ(n).
    pub fn smoothness_ratio(&self, n: usize) -> f64 {
        self.g_max(n) * (n * n) as f64 / self.kappa(n)
    }

    fn check_size(&self, n: usize) -> Result<()> {
        if n > self.n_max {
            return Err(Error::TableRange { n, n_max: self.n_max });
        }
        Ok(())
    }

    /// Γ(T) with the contribution of every internal node. The left child's
    /// size is the first argument of g.
    pub fn evaluate(&self, g: &WeightedGraph, t: &ClusterTree) -> Result<ObjectiveReport> {
        let n = g.n();
        self.check_size(n)?;
        t.check_over(n)?;
        let (order, range) = t.leaf_ranges();
        let mut total = 0.0;
        let mut per_node = BTreeMap::new();
        for id in t.postorder() {
            if let Node::Internal(l, r) = t.node(id) {
                let (a0, a1) = range[l];
                let (b0, b1) = range[r];
                let cross = g.cross_sum(&order[a0..a1], &order[b0..b1]);
                let c = cross * self.g(a1 - a0, b1 - b0);
                total += c;
                per_node.insert(id, c);
            }
        }
        Ok(ObjectiveReport { total, per_node })
    }

    /// Γ(T) computed edge by edge at the LCA of each pair; a cross-check of
    /// [`CostFunction::evaluate`].
    pub fn evaluate_via_lca(&self, g: &WeightedGraph, t: &ClusterTree) -> Result<f64> {
        let n = g.n();
        self.check_size(n)?;
        t.check_over(n)?;
        let idx = LcaIndex::new(t);
        let sizes = t.sizes();
        let mut total = 0.0;
        for (u, v, w) in g.edges() {
            let a = idx.lca(u, v)?;
            let (l, r) = t.children(a).ok_or_else(|| Error::Internal("lca is a leaf".into()))?;
            total += w * self.g(sizes[l], sizes[r]);
        }
        Ok(total)
    }
}

/// n·Σw, an upper bound on OPT for dissimilarity graphs and on the Dasgupta
/// cost of every tree for similarity graphs.
pub fn trivial_upper_bound(g: &WeightedGraph) -> f64 {
    g.n() as f64 * g.total_weight()
}

#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    /// Two trees on the unit clique K_n with different costs.
    CliqueCost { n: usize, cheap: ClusterTree, cheap_cost: f64, dear: ClusterTree, dear_cost: f64 },
    Asymmetric { n1: usize, n2: usize, g12: f64, g21: f64 },
    /// g(n1+1, n2) ≤ g(n1, n2) or g(n1, n2+1) ≤ g(n1, n2).
    NotIncreasing { n1: usize, n2: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Condition {
    Pass,
    Fail(Witness),
}

impl Condition {
    pub fn passed(&self) -> bool {
        matches!(self, Condition::Pass)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityReport {
    pub clique_invariant: Condition,
    pub symmetric: Condition,
    pub increasing: Condition,
}

impl AdmissibilityReport {
    pub fn all_passed(&self) -> bool {
        self.clique_invariant.passed() && self.symmetric.passed() && self.increasing.passed()
    }
}

/// Checks clique invariance (exhaustively, through the exact min/max DPs),
/// symmetry and strict monotonicity of g for trees of up to `n_max` leaves.
pub fn check_admissibility(cf: &CostFunction, n_max: usize) -> Result<AdmissibilityReport> {
    if n_max > ADMISSIBILITY_N_MAX {
        return Err(Error::ResourceGuard { what: "admissibility check", n: n_max, limit: ADMISSIBILITY_N_MAX });
    }
    cf.check_size(n_max)?;
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0);

    let mut clique_invariant = Condition::Pass;
    for n in 2..=n_max {
        let k = WeightedGraph::clique(n, Mode::Similarity);
        let lo = exact::exact_opt(cf, &k, Direction::Min)?;
        let hi = exact::exact_opt(cf, &k, Direction::Max)?;
        if !close(lo.value, hi.value) {
            clique_invariant = Condition::Fail(Witness::CliqueCost {
                n,
                cheap: lo.tree,
                cheap_cost: lo.value,
                dear: hi.tree,
                dear_cost: hi.value,
            });
            break;
        }
    }

    let mut symmetric = Condition::Pass;
    'sym: for n1 in 1..n_max {
        for n2 in n1 + 1..=n_max - n1 {
            let (a, b) = (cf.g(n1, n2), cf.g(n2, n1));
            if !close(a, b) {
                symmetric = Condition::Fail(Witness::Asymmetric { n1, n2, g12: a, g21: b });
                break 'sym;
            }
        }
    }

    let mut increasing = Condition::Pass;
    'inc: for n1 in 1..n_max {
        for n2 in 1..n_max - n1 {
            let x = cf.g(n1, n2);
            if cf.g(n1 + 1, n2) <= x || cf.g(n2, n1 + 1) <= cf.g(n2, n1) {
                increasing = Condition::Fail(Witness::NotIncreasing { n1, n2 });
                break 'inc;
            }
        }
    }
    Ok(AdmissibilityReport { clique_invariant, symmetric, increasing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Mode;
    use proptest::prelude::*;

    fn fix_2b() -> WeightedGraph {
        WeightedGraph::from_fn(4, Mode::Similarity, |u, v| if u / 2 == v / 2 { 3.0 } else { 1.0 }).unwrap()
    }

    fn fix_p4() -> WeightedGraph {
        WeightedGraph::from_edges(4, Mode::Similarity, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap()
    }

    fn t(s: &str) -> ClusterTree {
        s.parse().unwrap()
    }

    #[test]
    fn dasgupta_values() {
        let d = CostFunction::dasgupta();
        assert_eq!(d.g(2, 2), 4.0);
        assert_eq!(d.kappa(3), 8.0);
        assert_eq!(d.kappa(4), 20.0);
        for a in 1..60 {
            for b in 1..60 {
                assert_eq!(d.g(a, b), (a + b) as f64);
            }
        }
        for n in 0..200usize {
            let closed = if n == 0 { 0.0 } else { ((n - 1) * n * (n + 1)) as f64 / 3.0 };
            assert_eq!(d.kappa(n), closed);
        }
    }

    #[test]
    fn base_sequence_examples() {
        let lin: Vec<f64> = (1..64).map(|i| (i + 1) as f64).collect();
        let cf = CostFunction::from_base_sequence(&lin, 64).unwrap();
        assert_eq!(cf.kappa(2), 2.0);
        assert_eq!(cf.kappa(4), 20.0);
        assert_eq!(cf.g(2, 2), 4.0);

        let dbl: Vec<f64> = (1..64).map(|i| 2.0 * (i + 1) as f64).collect();
        let cf2 = CostFunction::from_base_sequence(&dbl, 64).unwrap();
        for a in 1..32 {
            for b in 1..32 {
                assert_eq!(cf2.g(a, b), 2.0 * cf.g(a, b));
            }
        }

        let sq: Vec<f64> = (1..64).map(|i| ((i + 1) * (i + 1)) as f64).collect();
        let cf3 = CostFunction::from_base_sequence(&sq, 64).unwrap();
        assert_eq!(cf3.kappa(2), 4.0);
        assert_eq!(cf3.g(1, 1), 4.0);
    }

    #[test]
    fn base_sequence_errors() {
        // ratio g(i,1)/(i+1) drops at i = 3
        let bad = [2.0, 3.0, 3.0, 5.0];
        assert_eq!(
            CostFunction::from_base_sequence(&bad, 5),
            Err(Error::AdmissibilityPrecondition { i: 3, reason: "g(i,1)/(i+1) decreases" })
        );
        assert!(matches!(CostFunction::from_base_sequence(&[2.0, -1.0], 3), Err(Error::AdmissibilityPrecondition { i: 2, .. })));
        assert!(CostFunction::from_base_sequence(&[2.0], 5).is_err());
    }

    #[test]
    fn evaluate_examples() {
        let d = CostFunction::dasgupta();
        let r = d.evaluate(&fix_2b(), &t("((0,1),(2,3))")).unwrap();
        assert_eq!(r.total, 28.0);
        let mut parts: Vec<f64> = r.per_node.values().copied().collect();
        parts.sort_by(f64::total_cmp);
        assert_eq!(parts, vec![6.0, 6.0, 16.0]);
        assert_eq!(d.evaluate(&fix_2b(), &t("((0,2),(1,3))")).unwrap().total, 36.0);
        let two = WeightedGraph::from_edges(2, Mode::Similarity, &[(0, 1, 5.0)]).unwrap();
        assert_eq!(d.evaluate(&two, &t("(0,1)")).unwrap().total, 10.0);
    }

    #[test]
    fn evaluate_via_lca_examples() {
        let d = CostFunction::dasgupta();
        assert_eq!(d.evaluate_via_lca(&fix_2b(), &t("((0,1),(2,3))")).unwrap(), 28.0);
        assert_eq!(d.evaluate_via_lca(&fix_p4(), &t("((0,1),(2,3))")).unwrap(), 8.0);
        let empty = WeightedGraph::new(5, Mode::Similarity);
        assert_eq!(d.evaluate_via_lca(&empty, &t("(((0,1),2),(3,4))")).unwrap(), 0.0);
    }

    #[test]
    fn evaluate_errors() {
        let small = CostFunction::dasgupta_up_to(3);
        assert_eq!(small.evaluate(&fix_2b(), &t("((0,1),(2,3))")), Err(Error::TableRange { n: 4, n_max: 3 }));
        let d = CostFunction::dasgupta();
        assert!(matches!(d.evaluate(&fix_2b(), &t("((0,1),2)")), Err(Error::Precondition(_))));
    }

    #[test]
    fn trivial_bound_examples() {
        let tri = WeightedGraph::from_edges(3, Mode::Dissimilarity, &[(0, 1, 1.0), (0, 2, 1.0), (1, 2, 3.0)]).unwrap();
        assert_eq!(trivial_upper_bound(&tri), 15.0);
        let two = WeightedGraph::from_edges(2, Mode::Similarity, &[(0, 1, 5.0)]).unwrap();
        assert_eq!(trivial_upper_bound(&two), 10.0);
        assert_eq!(trivial_upper_bound(&fix_p4()), 12.0);
    }

    #[test]
    fn admissibility_examples() {
        let d = CostFunction::dasgupta();
        let rep = check_admissibility(&d, 6).unwrap();
        assert!(rep.all_passed());
        let kappas: Vec<f64> = (2..=6).map(|n| d.kappa(n)).collect();
        assert_eq!(kappas, vec![2.0, 8.0, 20.0, 40.0, 70.0]);

        let broken = CostFunction::from_table("broken", 6, |a, b| if (a, b) == (2, 1) { 1.5 } else { (a + b) as f64 }).unwrap();
        let rep = check_admissibility(&broken, 6).unwrap();
        match rep.clique_invariant {
            Condition::Fail(Witness::CliqueCost { n, cheap_cost, dear_cost, .. }) => {
                assert_eq!(n, 3);
                assert!(cheap_cost < dear_cost);
            }
            other => panic!("{other:?}"),
        }
        assert!(!rep.symmetric.passed());
        assert!(!rep.increasing.passed());

        assert!(check_admissibility(&d, 2).unwrap().all_passed());
        assert!(matches!(check_admissibility(&d, 11), Err(Error::ResourceGuard { .. })));
    }

    #[test]
    fn dasgupta_smoothness_closed_form() {
        // g_max(n)·n²/κ(n) = 3n²/(n²−1): at most 4 (n = 2), decreasing to 3.
        let d = CostFunction::dasgupta();
        let mut prev = f64::INFINITY;
        for n in 2..=DEFAULT_N_MAX {
            let r = d.smoothness_ratio(n);
            let nf = n as f64;
            assert!((r - 3.0 * nf * nf / (nf * nf - 1.0)).abs() < 1e-9);
            assert!(r <= 4.0 && r > 3.0 && r < prev);
            prev = r;
        }
        assert!(prev - 3.0 < 1e-6);
    }

    fn arb_graph(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
        (2..=max_n, any::<u64>()).prop_map(|(n, seed)| crate::exact::random_graph(n, Mode::Similarity, seed, 0.6, 9))
    }

    proptest! {
        #[test]
        fn kappa_identity(exp in 1.0f64..3.0, scale in 0.5f64..4.0) {
            // base (i+1)^exp·scale has a non-decreasing ratio for exp >= 1
            let base: Vec<f64> = (1..48).map(|i| scale * libm::pow((i + 1) as f64, exp)).collect();
            let cf = CostFunction::from_base_sequence(&base, 48).unwrap();
            for n1 in 1..48 {
                for n2 in 1..48 - n1 {
                    let lhs = cf.g(n1, n2) * (n1 * n2) as f64 + cf.kappa(n1) + cf.kappa(n2);
                    let rhs = cf.kappa(n1 + n2);
                    prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs());
                }
            }
        }

        #[test]
        fn evaluators_agree(g in arb_graph(40), seed in any::<u64>()) {
            let tr = crate::exact::random_tree(g.n(), seed);
            let d = CostFunction::dasgupta();
            let a = d.evaluate(&g, &tr).unwrap();
            let b = d.evaluate_via_lca(&g, &tr).unwrap();
            prop_assert!((a.total - b).abs() <= 1e-9 * a.total.abs().max(1.0));
            let s: f64 = a.per_node.values().sum();
            prop_assert!((a.total - s).abs() <= 1e-9 * a.total.abs().max(1.0));
        }

        #[test]
        fn scaling_is_linear(g in arb_graph(20), seed in any::<u64>(), lambda in 0.1f64..10.0) {
            let tr = crate::exact::random_tree(g.n(), seed);
            let d = CostFunction::dasgupta();
            let a = d.evaluate(&g, &tr).unwrap().total;
            let b = d.evaluate(&g.scaled(lambda).unwrap(), &tr).unwrap().total;
            prop_assert!((b - lambda * a).abs() <= 1e-9 * b.abs().max(1.0));
        }
    }
}
