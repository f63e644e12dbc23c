//! Frontier-aware graph partitioning for parallel breadth-first search.
//!
//! Parallel level-synchronous BFS on a partitioned graph pays for every
//! frontier notification that crosses a block boundary, and most of that
//! cost lands in the single peak iteration. On skewed-degree graphs the
//! degree mix of each frontier is far from the global degree distribution,
//! so a plain edge-cut objective is a biased proxy for the real message
//! cost. This crate predicts the per-iteration degree usage of BFS
//! frontiers from cheap graph statistics, converts the prediction into
//! per-edge expected message weights, feeds the weighted graph to a
//! multilevel k-way partitioner, and measures the resulting reduction in
//! cross-partition messages against an unweighted baseline.
//!
//! Modules:
//! - [`graph`]: compressed adjacency storage, edge-list ingestion and
//!   synthetic generators ([`generate`]).
//! - [`stats`]: degree distribution, capped joint degree matrix and
//!   assortativity.
//! - [`frontier`]: the continuous-time frontier model (coverage functions,
//!   per-iteration usage probabilities, edge message weights, expected cut).
//! - [`partition`] / [`multilevel`]: weighted k-way partitioning plus
//!   baseline partitioners and partition file IO.
//! - [`bfs`]: sequentially simulated parallel BFS with per-iteration
//!   message accounting.
//! - [`strategies`]: construction of the competing weighted graphs
//!   (empirical, smoothed, model-based).
//! - [`bench`]: the experiment driver and report writer.

pub mod bench;
pub mod bfs;
pub mod error;
pub mod frontier;
pub mod generate;
pub mod graph;
pub mod multilevel;
pub mod partition;
pub mod stats;
pub mod strategies;

pub use error::{Error, Result};
pub use graph::{load_edge_list, load_edge_list_labeled, write_edge_list, Components, Graph};
pub use stats::{capped, degree_stats, ClassMatrix, DegreeStats};
