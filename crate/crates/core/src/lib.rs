//! Hierarchical clustering on dense weighted graphs.
//!
//! The crate is `no_std` and only needs an allocator. It holds the graph and
//! tree types, the admissible cost functions, ground-truth generators, an exact
//! subset-DP oracle, the agglomerative and divisive algorithms, the
//! hierarchical stochastic block model and a few worst-case instance families.
//!
//! ```
//! use hicluster_core::{graph::{Mode, WeightedGraph}, linkage, objective::CostFunction};
//!
//! let g = WeightedGraph::from_edges(3, Mode::Dissimilarity, &[(0, 1, 1.0), (0, 2, 1.0), (1, 2, 3.0)]).unwrap();
//! let policy = linkage::LinkagePolicy::new(linkage::LinkageKind::Average, Mode::Dissimilarity);
//! let (tree, _) = linkage::linkage(&g, &policy).unwrap();
//! assert_eq!(tree.to_string(), "((0,1),2)");
//! let val = CostFunction::dasgupta().evaluate(&g, &tree).unwrap().total;
//! assert_eq!(val, 14.0);
//! ```
#![no_std]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod divisive;
pub mod error;
pub mod exact;
pub mod graph;
pub mod ground_truth;
pub mod hsbm;
pub mod instances;
pub mod linkage;
pub mod objective;
pub mod tree;

mod rng;

pub use error::{Error, Result};
pub use graph::{Cut, Mode, WeightedGraph};
pub use objective::CostFunction;
pub use tree::ClusterTree;
