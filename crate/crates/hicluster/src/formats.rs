//! Text formats: graphs, generating trees, cost sequences, tie scripts,
//! hidden labels and HSBM configs.

use hicluster_core::{
    ground_truth::GeneratingTree,
    hsbm::HsbmParams,
    CostFunction, Error, Mode, Result, WeightedGraph,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const GRAPH_MAGIC: &str = "hicluster-graph";
pub const GENTREE_MAGIC: &str = "hicluster-gentree";
pub const G_MAGIC: &str = "hicluster-g";
pub const TIES_MAGIC: &str = "hicluster-ties";
pub const LABELS_MAGIC: &str = "hicluster-labels";

/// Hex SHA-256 of `bytes`.
pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Non-comment lines with their byte offsets. `#` starts a comment.
fn lines(s: &str) -> impl Iterator<Item = (usize, &str)> {
    let base = s.as_ptr() as usize;
    s.lines().filter_map(move |l| {
        let body = l.split('#').next().unwrap_or("").trim();
        (!body.is_empty()).then(|| (body.as_ptr() as usize - base, body))
    })
}

fn err(offset: usize, msg: impl Into<String>) -> Error {
    Error::Parse { offset, msg: msg.into() }
}

fn num<T: std::str::FromStr>(tok: &str, offset: usize, what: &str) -> Result<T> {
    tok.parse().map_err(|_| err(offset, format!("bad {what} {tok:?}")))
}

fn header<'a>(it: &mut impl Iterator<Item = (usize, &'a str)>, magic: &str) -> Result<(usize, Vec<&'a str>)> {
    let (off, line) = it.next().ok_or_else(|| err(0, format!("missing `{magic}` header")))?;
    let toks: Vec<&str> = line.split_whitespace().collect();
    if toks.first() != Some(&magic) {
        return Err(err(off, format!("expected `{magic}` header")));
    }
    if toks.get(1) != Some(&"1") {
        return Err(err(off, "unsupported format version"));
    }
    Ok((off, toks[2..].to_vec()))
}

fn parse_mode(tok: Option<&&str>, off: usize) -> Result<Mode> {
    tok.and_then(|t| Mode::parse(t)).ok_or_else(|| err(off, "mode must be `sim` or `dis`"))
}

/// `hicluster-graph 1 <n> <m> <sim|dis>` then `u v w` per positive edge.
pub fn write_graph(g: &WeightedGraph) -> String {
    let edges = g.edges();
    let mut out = format!("{GRAPH_MAGIC} 1 {} {} {}\n", g.n(), edges.len(), g.mode().as_str());
    for (u, v, w) in edges {
        out.push_str(&format!("{u} {v} {w}\n"));
    }
    out
}

pub fn read_graph(s: &str) -> Result<WeightedGraph> {
    let mut it = lines(s);
    let (off, h) = header(&mut it, GRAPH_MAGIC)?;
    if h.len() != 3 {
        return Err(err(off, "header needs <n> <m> <sim|dis>"));
    }
    let n: usize = num(h[0], off, "vertex count")?;
    let m: usize = num(h[1], off, "edge count")?;
    let mode = parse_mode(h.get(2), off)?;
    let mut g = WeightedGraph::new(n, mode);
    let mut seen = 0;
    for (off, line) in it {
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 3 {
            return Err(err(off, "edge line needs `u v w`"));
        }
        let (u, v): (usize, usize) = (num(t[0], off, "vertex")?, num(t[1], off, "vertex")?);
        let w: f64 = num(t[2], off, "weight")?;
        if !(u < v && v < n) {
            return Err(err(off, format!("edge ({u}, {v}) needs u < v < {n}")));
        }
        if !(w >= 0.0 && w.is_finite()) {
            return Err(err(off, format!("weight {w} must be a finite value ≥ 0")));
        }
        if g.weight(u, v) != 0.0 {
            return Err(err(off, format!("edge ({u}, {v}) listed twice")));
        }
        g.set_weight(u, v, w)?;
        seen += 1;
    }
    if seen != m {
        return Err(err(s.len(), format!("header announces {m} edges, found {seen}")));
    }
    Ok(g)
}

/// `hicluster-gentree 1 <sim|dis>` then the annotated tree on one line.
pub fn write_gentree(gt: &GeneratingTree) -> String {
    format!("{GENTREE_MAGIC} 1 {}\n{}\n", gt.mode().as_str(), gt.to_text())
}

pub fn read_gentree(s: &str) -> Result<GeneratingTree> {
    let mut it = lines(s);
    let (off, h) = header(&mut it, GENTREE_MAGIC)?;
    let mode = parse_mode(h.first(), off)?;
    let (off, body) = it.next().ok_or_else(|| err(s.len(), "missing tree line"))?;
    GeneratingTree::from_text(body, mode).map_err(|e| shift(e, off))
}

fn shift(e: Error, by: usize) -> Error {
    match e {
        Error::Parse { offset, msg } => Error::Parse { offset: offset + by, msg },
        e => e,
    }
}

/// `hicluster-g 1 <n_max>` then g(i,1) for i = 1..n_max−1, one per line.
pub fn write_cost_function(cf: &CostFunction) -> String {
    let mut out = format!("{G_MAGIC} 1 {}\n", cf.n_max());
    for b in &cf.base()[..cf.n_max().saturating_sub(1)] {
        out.push_str(&format!("{b}\n"));
    }
    out
}

pub fn read_cost_function(s: &str, name: &str) -> Result<CostFunction> {
    let mut it = lines(s);
    let (off, h) = header(&mut it, G_MAGIC)?;
    let n_max: usize = num(h.first().copied().unwrap_or(""), off, "n_max")?;
    let base = it.map(|(off, l)| num::<f64>(l, off, "base value")).collect::<Result<Vec<_>>>()?;
    Ok(CostFunction::from_base_sequence(&base, n_max)?.with_name(name))
}

/// `hicluster-ties 1` then one scripted merge `a b` per line: merge the
/// clusters currently holding vertices a and b.
pub fn write_ties(script: &[(usize, usize)]) -> String {
    let mut out = format!("{TIES_MAGIC} 1\n");
    for (a, b) in script {
        out.push_str(&format!("{a} {b}\n"));
    }
    out
}

pub fn read_ties(s: &str) -> Result<Vec<(usize, usize)>> {
    let mut it = lines(s);
    header(&mut it, TIES_MAGIC)?;
    it.map(|(off, l)| {
        let t: Vec<&str> = l.split_whitespace().collect();
        if t.len() != 2 {
            return Err(err(off, "tie line needs `a b`"));
        }
        Ok((num(t[0], off, "vertex")?, num(t[1], off, "vertex")?))
    })
    .collect()
}

/// `hicluster-labels 1 <n> <k>` then the class of each vertex.
pub fn write_labels(labels: &[usize], k: usize) -> String {
    let mut out = format!("{LABELS_MAGIC} 1 {} {k}\n", labels.len());
    for l in labels {
        out.push_str(&format!("{l}\n"));
    }
    out
}

pub fn read_labels(s: &str) -> Result<(Vec<usize>, usize)> {
    let mut it = lines(s);
    let (off, h) = header(&mut it, LABELS_MAGIC)?;
    if h.len() != 2 {
        return Err(err(off, "header needs <n> <k>"));
    }
    let n: usize = num(h[0], off, "vertex count")?;
    let k: usize = num(h[1], off, "class count")?;
    let labels = it
        .map(|(off, l)| {
            let c: usize = num(l, off, "label")?;
            if c >= k {
                return Err(err(off, format!("label {c} ≥ k = {k}")));
            }
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    if labels.len() != n {
        return Err(err(s.len(), format!("expected {n} labels, found {}", labels.len())));
    }
    Ok((labels, k))
}

/// HSBM parameters as TOML. `top_tree` is an annotated similarity tree on
/// leaves `0..k` (a single leaf `0` when k = 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HsbmConfig {
    pub k: usize,
    pub n: usize,
    pub alpha: f64,
    pub f: Vec<f64>,
    pub p: Vec<f64>,
    pub top_tree: String,
}

impl HsbmConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| err(e.span().map_or(0, |r| r.start), e.message().to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("plain config serializes")
    }

    pub fn params(&self, seed: u64) -> Result<HsbmParams> {
        let top_tree = GeneratingTree::from_text(&self.top_tree, Mode::Similarity)?;
        let params = HsbmParams { k: self.k, top_tree, p: self.p.clone(), f: self.f.clone(), alpha: self.alpha, n: self.n, seed };
        params.validate()?;
        Ok(params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hicluster_core::{ground_truth, objective, ClusterTree};

    const FIX_P4: &str = "hicluster-graph 1 4 3 sim\n0 1 1\n1 2 1\n2 3 1\n";

    #[test]
    fn graph_round_trip() {
        let g = read_graph(FIX_P4).unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.weight(1, 2), 1.0);
        assert_eq!(write_graph(&g), FIX_P4);
        let odd = WeightedGraph::from_edges(3, Mode::Dissimilarity, &[(0, 2, 0.1 + 0.2)]).unwrap();
        assert_eq!(read_graph(&write_graph(&odd)).unwrap(), odd);
    }

    #[test]
    fn graph_errors_carry_offsets() {
        let bad = "hicluster-graph 1 4 1 sim\n0 5 1\n";
        assert_eq!(read_graph(bad).unwrap_err(), Error::Parse { offset: 26, msg: "edge (0, 5) needs u < v < 4".into() });
        assert!(matches!(read_graph("hicluster-graph 1 2 2 sim\n0 1 1\n"), Err(Error::Parse { .. })));
        assert!(matches!(read_graph("hicluster-graph 1 2 1 sim\n0 1 -1\n"), Err(Error::Parse { .. })));
        assert!(matches!(read_graph("hicluster-graph 1 2 1 foo\n0 1 1\n"), Err(Error::Parse { offset: 0, .. })));
        assert!(matches!(read_graph("graph 1 2 0 sim\n"), Err(Error::Parse { offset: 0, .. })));
    }

    #[test]
    fn gentree_round_trip() {
        let gt = GeneratingTree::from_text("((0,1):3,(2,3):3):1", Mode::Similarity).unwrap();
        let text = write_gentree(&gt);
        assert_eq!(text, "hicluster-gentree 1 sim\n((0,1):3,(2,3):3):1\n");
        assert_eq!(read_gentree(&text).unwrap(), gt);
        assert_eq!(ground_truth::realize(&read_gentree(&text).unwrap()).unwrap().weight(0, 2), 1.0);
        let e = read_gentree("hicluster-gentree 1 sim\n((0,1),2):1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { .. }));
    }

    #[test]
    fn cost_function_round_trip() {
        let cf = objective::CostFunction::dasgupta_up_to(6);
        let text = write_cost_function(&cf);
        assert_eq!(text, "hicluster-g 1 6\n2\n3\n4\n5\n6\n");
        let back = read_cost_function(&text, "file").unwrap();
        let t = ClusterTree::parse("((0,1),(2,3))").unwrap();
        let g = read_graph(FIX_P4).unwrap();
        assert_eq!(back.evaluate(&g, &t).unwrap().total, cf.evaluate(&g, &t).unwrap().total);
    }

    #[test]
    fn ties_and_labels() {
        let s = write_ties(&[(0, 1), (0, 2)]);
        assert_eq!(read_ties(&s).unwrap(), vec![(0, 1), (0, 2)]);
        assert_eq!(read_ties("hicluster-ties 1\n# comment\n3 4 # trailing\n").unwrap(), vec![(3, 4)]);
        let l = write_labels(&[0, 1, 1], 2);
        assert_eq!(read_labels(&l).unwrap(), (vec![0, 1, 1], 2));
        assert!(read_labels("hicluster-labels 1 1 2\n2\n").is_err());
    }

    #[test]
    fn hsbm_config() {
        let text = "k = 2\nn = 300\nalpha = 1.0\nf = [0.5, 0.5]\np = [0.9, 0.9]\ntop_tree = \"(0,1):0.1\"\n";
        let c = HsbmConfig::from_toml(text).unwrap();
        assert_eq!(HsbmConfig::from_toml(&c.to_toml()).unwrap(), c);
        let p = c.params(4).unwrap();
        assert_eq!((p.k, p.n, p.seed), (2, 300, 4));
        assert!(HsbmConfig::from_toml("k = 2\nbogus = 1\n").is_err());
        let bad = HsbmConfig { p: vec![0.05, 0.9], ..c };
        assert!(matches!(bad.params(0), Err(Error::Parameter { field: "p", .. })));
        assert_eq!(content_hash(b"abc").len(), 64);
    }
}
