//! Acyclic entry-to-exit path enumeration over a CFG.
//!
//! A path may use each CFG edge at most once, which gives every loop
//! exactly its zero-iteration and one-iteration shapes (a second iteration
//! would reuse the header-to-body edge). On loop-free graphs this is plain
//! simple-path enumeration. Traversal is depth-first in edge insertion
//! order and truncates at a caller-supplied cap.

use super::cfg::{BlockId, Cfg};

#[derive(Debug, Clone)]
pub struct PathSet {
    pub paths: Vec<Vec<BlockId>>,
    /// True when the cap was hit; callers fall back to the edge-coverage
    /// approximation in that case.
    pub overflowed: bool,
}

pub fn enumerate_acyclic_paths(cfg: &Cfg, cap: usize) -> PathSet {
    let n = cfg.blocks.len();
    let mut succs: Vec<Vec<(usize, BlockId)>> = vec![Vec::new(); n];
    for (idx, e) in cfg.edges.iter().enumerate() {
        succs[e.from.0].push((idx, e.to));
    }
    let mut paths = Vec::new();
    let mut overflowed = false;
    let mut used_edge = vec![false; cfg.edges.len()];
    let mut path: Vec<BlockId> = Vec::new();
    // iterative DFS; the stack holds (block, next successor index, edge used
    // to get here)
    let mut stack: Vec<(BlockId, usize, Option<usize>)> = vec![(cfg.entry, 0, None)];
    path.push(cfg.entry);
    while let Some((block, idx, via)) = stack.last_mut() {
        if *block == cfg.exit {
            if paths.len() == cap {
                overflowed = true;
                break;
            }
            paths.push(path.clone());
            if let Some(e) = via {
                used_edge[*e] = false;
            }
            path.pop();
            stack.pop();
            continue;
        }
        let next = succs[block.0].get(*idx).copied();
        *idx += 1;
        match next {
            Some((edge, to)) if !used_edge[edge] => {
                used_edge[edge] = true;
                path.push(to);
                stack.push((to, 0, Some(edge)));
            }
            Some(_) => {} // edge already on the path: skip
            None => {
                if let Some(e) = via {
                    used_edge[*e] = false;
                }
                path.pop();
                stack.pop();
            }
        }
    }
    PathSet { paths, overflowed }
}

/// Would every entry-to-exit path hit at least one marked block? Decided by
/// reachability with the marked blocks removed, which is what the
/// path-cap fallback uses.
pub fn marked_blocks_cover_all_paths(cfg: &Cfg, marked: &[bool]) -> bool {
    if marked.get(cfg.entry.0).copied().unwrap_or(false) {
        return true;
    }
    let n = cfg.blocks.len();
    let mut seen = vec![false; n];
    let mut stack = vec![cfg.entry];
    seen[cfg.entry.0] = true;
    while let Some(cur) = stack.pop() {
        if cur == cfg.exit {
            return false; // exit reachable while avoiding every marked block
        }
        for e in cfg.successors(cur) {
            let t = e.to.0;
            if !seen[t] && !marked.get(t).copied().unwrap_or(false) {
                seen[t] = true;
                stack.push(e.to);
            }
        }
    }
    true
}
