//! Dispatch over every clustering algorithm.

use std::{fmt, str::FromStr};

use hicluster_core::{
    divisive::{self, CutFinder, ExactBrute, GroundTruthFast, LocalSearch},
    linkage::{self, LinkageKind, LinkagePolicy, MergeTrace, TieBreak},
    ClusterTree, Error, Mode, Result, WeightedGraph,
};

use crate::plugin::PluginFinder;

#[derive(Clone, Debug, PartialEq)]
pub enum FinderSpec {
    Brute,
    GtFast,
    Plugin(String),
}

impl FromStr for FinderSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "brute" => Ok(FinderSpec::Brute),
            "gt-fast" => Ok(FinderSpec::GtFast),
            _ => match s.strip_prefix("plugin:") {
                Some(cmd) if !cmd.is_empty() => Ok(FinderSpec::Plugin(cmd.into())),
                _ => Err(format!("unknown cut finder {s:?} (brute, gt-fast, plugin:<cmd>)")),
            },
        }
    }
}

impl FinderSpec {
    fn build(&self) -> Box<dyn CutFinder> {
        match self {
            FinderSpec::Brute => Box::new(ExactBrute::default()),
            FinderSpec::GtFast => Box::new(GroundTruthFast::default()),
            FinderSpec::Plugin(cmd) => Box::new(PluginFinder::new(cmd.clone())),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Algo {
    /// `merge` overrides the merge direction, which defaults to the graph's
    /// mode (maximum for similarity, minimum for dissimilarity).
    Linkage { kind: LinkageKind, merge: Option<Mode>, ties: TieBreak },
    Sparsest { finder: FinderSpec },
    DensestLs { epsilon: f64 },
    Bisect2c,
    Pivot { seed: u64 },
    Robust { delta: f64 },
}

impl Algo {
    pub fn name(&self) -> &'static str {
        match self {
            Algo::Linkage { kind, .. } => kind.as_str(),
            Algo::Sparsest { .. } => "sparsest",
            Algo::DensestLs { .. } => "densest-ls",
            Algo::Bisect2c => "bisect2c",
            Algo::Pivot { .. } => "pivot",
            Algo::Robust { .. } => "robust",
        }
    }

    /// Parses an algorithm name with defaults for its knobs.
    pub fn named(name: &str) -> std::result::Result<Algo, String> {
        Ok(match name {
            "single" => Algo::Linkage { kind: LinkageKind::Single, merge: None, ties: TieBreak::LowestIndex },
            "complete" => Algo::Linkage { kind: LinkageKind::Complete, merge: None, ties: TieBreak::LowestIndex },
            "average" => Algo::Linkage { kind: LinkageKind::Average, merge: None, ties: TieBreak::LowestIndex },
            "sparsest" => Algo::Sparsest { finder: FinderSpec::Brute },
            "densest-ls" => Algo::DensestLs { epsilon: 0.1 },
            "bisect2c" => Algo::Bisect2c,
            "pivot" => Algo::Pivot { seed: 0 },
            "robust" => Algo::Robust { delta: 1.0 },
            _ => return Err(format!("unknown algorithm {name:?}")),
        })
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Run {
    pub tree: ClusterTree,
    /// Local-search moves, summed over all cuts.
    pub iterations: usize,
    pub trace: Option<MergeTrace>,
}

pub fn run(g: &WeightedGraph, algo: &Algo) -> Result<Run> {
    let plain = |tree| Run { tree, iterations: 0, trace: None };
    Ok(match algo {
        Algo::Linkage { kind, merge, ties } => {
            let policy = LinkagePolicy::new(*kind, merge.unwrap_or(g.mode())).with_ties(ties.clone());
            let (tree, trace) = linkage::linkage(g, &policy)?;
            Run { tree, iterations: 0, trace: Some(trace) }
        }
        // dissimilarity graphs get the densest cut from the same finders
        Algo::Sparsest { finder } => plain(divisive::recursive_cut_tree(g, finder.build().as_mut())?.tree),
        Algo::DensestLs { epsilon } => {
            if g.mode() != Mode::Dissimilarity {
                return Err(Error::Precondition("densest-cut local search needs a dissimilarity graph".into()));
            }
            let mut f = LocalSearch::new(*epsilon)?;
            let out = divisive::recursive_cut_tree(g, &mut f)?;
            Run { tree: out.tree, iterations: f.stats().iterations, trace: None }
        }
        Algo::Bisect2c => plain(divisive::bisection_two_center(g)?),
        Algo::Pivot { seed } => plain(divisive::fast_pivot(g, *seed)?),
        Algo::Robust { delta } => plain(divisive::robust_pivot(g, *delta)?),
    })
}
