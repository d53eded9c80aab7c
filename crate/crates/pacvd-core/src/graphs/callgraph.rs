//! Program-wide call graph, expanded breadth-first from a root function up
//! to a depth limit. The root sits at depth 0 and its direct callees at
//! depth 1; functions beyond the limit are excluded entirely. Callees with
//! no definition in the given units stay as leaf nodes flagged external.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::frontend::ast::{FunctionAst, SourceUnit};
use crate::frontend::extract_calls;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("function `{0}` not found in the given units")]
    RootNotFound(String),
    #[error("function `{0}` has multiple definitions across units")]
    AmbiguousRoot(String),
}

#[derive(Debug, Clone)]
pub struct CallGraph {
    pub root: String,
    pub nodes: BTreeSet<String>,
    /// `(caller, callee, call-site id)` with both ends inside the depth limit.
    pub edges: BTreeSet<(String, String, usize)>,
    /// Minimum call distance from the root.
    pub depth: BTreeMap<String, usize>,
    /// Nodes without a definition in the units.
    pub externals: BTreeSet<String>,
}

impl CallGraph {
    pub fn callees_of<'a>(&'a self, f: &'a str) -> impl Iterator<Item = &'a str> {
        self.edges
            .iter()
            .filter(move |(caller, _, _)| caller == f)
            .map(|(_, callee, _)| callee.as_str())
    }

    /// Defined functions reachable from `from` (inclusive) along graph edges.
    pub fn closure_of(&self, from: &str) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![from.to_string()];
        while let Some(cur) = stack.pop() {
            if !seen.insert(cur.clone()) {
                continue;
            }
            for callee in self.callees_of(&cur) {
                if !seen.contains(callee) {
                    stack.push(callee.to_string());
                }
            }
        }
        seen
    }

    /// Line-oriented debug dump mirroring the CFG export format.
    pub fn to_debug_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("callgraph {}\n", self.root));
        for n in &self.nodes {
            let ext = if self.externals.contains(n) {
                " external"
            } else {
                ""
            };
            out.push_str(&format!("node {} depth {}{}\n", n, self.depth[n], ext));
        }
        for (caller, callee, site) in &self.edges {
            out.push_str(&format!("edge {caller} {callee} site {site}\n"));
        }
        out
    }
}

/// Index of function definitions across units; the first definition of a
/// name wins, in unit order, except for the root which must be unique.
pub fn function_index(units: &[SourceUnit]) -> BTreeMap<&str, &FunctionAst> {
    let mut index: BTreeMap<&str, &FunctionAst> = BTreeMap::new();
    for unit in units {
        for f in &unit.functions {
            index.entry(f.name.as_str()).or_insert(f);
        }
    }
    index
}

pub fn build_call_graph(
    units: &[SourceUnit],
    root: &str,
    depth_limit: usize,
) -> Result<CallGraph, GraphError> {
    let defs: usize = units
        .iter()
        .map(|u| u.functions.iter().filter(|f| f.name == root).count())
        .sum();
    if defs == 0 {
        return Err(GraphError::RootNotFound(root.to_string()));
    }
    if defs > 1 {
        return Err(GraphError::AmbiguousRoot(root.to_string()));
    }
    let index = function_index(units);

    let mut graph = CallGraph {
        root: root.to_string(),
        nodes: BTreeSet::new(),
        edges: BTreeSet::new(),
        depth: BTreeMap::new(),
        externals: BTreeSet::new(),
    };
    let mut queue: VecDeque<String> = VecDeque::new();
    graph.nodes.insert(root.to_string());
    graph.depth.insert(root.to_string(), 0);
    queue.push_back(root.to_string());

    while let Some(caller) = queue.pop_front() {
        let caller_depth = graph.depth[&caller];
        let fn_ast = match index.get(caller.as_str()) {
            Some(f) => *f,
            None => continue, // external leaf
        };
        for call in extract_calls(fn_ast) {
            let callee = call.callee;
            let callee_depth = caller_depth + 1;
            if let Some(&existing) = graph.depth.get(&callee) {
                // already placed (possibly a cycle edge); record the edge only
                let _ = existing;
                graph.edges.insert((caller.clone(), callee, call.site));
                continue;
            }
            if callee_depth > depth_limit {
                continue; // beyond scope: no node, no edge
            }
            graph.nodes.insert(callee.clone());
            graph.depth.insert(callee.clone(), callee_depth);
            if index.contains_key(callee.as_str()) {
                queue.push_back(callee.clone());
            } else {
                graph.externals.insert(callee.clone());
            }
            graph.edges.insert((caller.clone(), callee, call.site));
        }
    }
    Ok(graph)
}
