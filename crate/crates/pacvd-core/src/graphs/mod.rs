//! Program graphs: per-function CFGs with guarded edges, a depth-annotated
//! call graph, intra-procedural def-use chains and acyclic path enumeration.
//!
//! All builders are pure functions of immutable inputs; the outputs are
//! freely shareable across threads.

pub mod callgraph;
pub mod cfg;
pub mod defuse;
pub mod paths;

pub use callgraph::{build_call_graph, function_index, CallGraph, GraphError};
pub use cfg::{build_cfg, BasicBlock, BlockId, CallSite, Cfg, Edge, Guard, Polarity};
pub use defuse::{build_def_use, DefUse};
pub use paths::{enumerate_acyclic_paths, marked_blocks_cover_all_paths, PathSet};
