//! Inter-procedural analysis behind the abstraction reports: call contexts
//! with syntactic guard stacks, transitive API reachability, branch
//! classification, chain collection, call counting and key-variable
//! back-mapping.

use std::collections::{BTreeMap, BTreeSet};

use crate::catalog::{match_call, ApiCatalog};
use crate::frontend::ast::{CaseLabel, Expr, FunctionAst, SourceUnit, Stmt};
use crate::frontend::print::{render_expr, render_negated};
use crate::graphs::{
    build_call_graph, build_cfg, build_def_use, enumerate_acyclic_paths, function_index,
    marked_blocks_cover_all_paths, CallGraph, Cfg, DefUse, GraphError,
};

use super::{ConcreteCondition, FuzzyClass};

/// A call expression with the syntactic guard stack controlling it inside
/// its own function frame, outermost first.
#[derive(Debug, Clone)]
pub struct SiteCtx {
    pub site: usize,
    pub callee: String,
    pub args: Vec<Expr>,
    pub guards: Vec<String>,
}

/// One primitive-API call site reached from an analyzed callee, together
/// with the call chain that leads to it.
#[derive(Debug, Clone)]
pub struct ApiHit {
    /// Canonical (family) API name.
    pub api: String,
    /// Function names from the analyzed callee down to the API call's frame.
    pub chain: Vec<String>,
    /// `(caller, call site)` per chain edge; empty for direct hits.
    pub hops: Vec<(String, SiteCtx)>,
    /// Guards controlling the API call within its own frame.
    pub guards: Vec<String>,
    /// First argument expressions of the API call.
    pub args: Vec<Expr>,
    /// `(frame, site ordinal)` identifying the static call site.
    pub site_key: (String, usize),
}

/// Everything derived from one (units, root, depth limit, catalog) tuple.
pub struct ProgramAnalysis<'u> {
    pub graph: CallGraph,
    pub cfgs: BTreeMap<String, Cfg>,
    pub catalog: &'u ApiCatalog,
    contexts: BTreeMap<String, Vec<SiteCtx>>,
    defuse: BTreeMap<String, DefUse>,
    index: BTreeMap<&'u str, &'u FunctionAst>,
    /// Function -> canonical APIs reachable from it (itself included).
    reach: BTreeMap<String, BTreeSet<String>>,
}

impl<'u> ProgramAnalysis<'u> {
    pub fn new(
        units: &'u [SourceUnit],
        root: &str,
        depth_limit: usize,
        catalog: &'u ApiCatalog,
    ) -> Result<Self, GraphError> {
        let graph = build_call_graph(units, root, depth_limit)?;
        let index = function_index(units);
        let mut cfgs = BTreeMap::new();
        let mut contexts = BTreeMap::new();
        let mut defuse = BTreeMap::new();
        for name in &graph.nodes {
            if let Some(f) = index.get(name.as_str()) {
                cfgs.insert(name.clone(), build_cfg(f));
                contexts.insert(name.clone(), collect_contexts(f));
                defuse.insert(name.clone(), build_def_use(f));
            }
        }
        let reach = compute_reach(&graph, &contexts, catalog);
        Ok(ProgramAnalysis {
            graph,
            cfgs,
            catalog,
            contexts,
            defuse,
            index,
            reach,
        })
    }

    pub fn root(&self) -> &str {
        &self.graph.root
    }

    pub fn contexts_of(&self, f: &str) -> &[SiteCtx] {
        self.contexts.get(f).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Direct callees of the root that have definitions, in first-call
    /// source order.
    pub fn analyzed_callees(&self) -> Vec<String> {
        let mut out = Vec::new();
        for site in self.contexts_of(&self.graph.root) {
            let c = &site.callee;
            if c != &self.graph.root
                && self.index.contains_key(c.as_str())
                && self.graph.nodes.contains(c)
                && !out.contains(c)
            {
                out.push(c.clone());
            }
        }
        out
    }

    /// Does a call to `callee_name` lead to `api`, directly or through
    /// in-depth transitive expansion?
    fn call_reaches(&self, callee_name: &str, api: &str) -> bool {
        if let Some(entry) = match_call(self.catalog, callee_name) {
            if entry.family() == api {
                return true;
            }
        }
        self.graph.nodes.contains(callee_name)
            && self
                .reach
                .get(callee_name)
                .is_some_and(|apis| apis.contains(api))
    }

    /// All primitive-API call sites reachable from `callee`, one entry per
    /// (chain, site), in deterministic DFS order.
    pub fn collect_hits(&self, callee: &str) -> Vec<ApiHit> {
        let mut out = Vec::new();
        let mut chain = vec![callee.to_string()];
        let mut hops: Vec<(String, SiteCtx)> = Vec::new();
        self.visit_hits(callee, &mut chain, &mut hops, &mut out);
        out
    }

    fn visit_hits(
        &self,
        frame: &str,
        chain: &mut Vec<String>,
        hops: &mut Vec<(String, SiteCtx)>,
        out: &mut Vec<ApiHit>,
    ) {
        for site in self.contexts_of(frame) {
            if let Some(entry) = match_call(self.catalog, &site.callee) {
                out.push(ApiHit {
                    api: entry.family().to_string(),
                    chain: chain.clone(),
                    hops: hops.clone(),
                    guards: site.guards.clone(),
                    args: site.args.clone(),
                    site_key: (frame.to_string(), site.site),
                });
            }
            let next = &site.callee;
            if self.index.contains_key(next.as_str())
                && self.graph.nodes.contains(next)
                && !chain.iter().any(|c| c == next)
            {
                chain.push(next.clone());
                hops.push((frame.to_string(), site.clone()));
                self.visit_hits(next, chain, hops, out);
                hops.pop();
                chain.pop();
            }
        }
    }

    /// APIs present for `callee`, in first-hit order, from a hit list.
    pub fn present_apis(hits: &[ApiHit]) -> Vec<String> {
        let mut out = Vec::new();
        for h in hits {
            if !out.contains(&h.api) {
                out.push(h.api.clone());
            }
        }
        out
    }

    /// Number of distinct static call sites per API reachable from `callee`.
    pub fn count_calls(&self, hits: &[ApiHit]) -> BTreeMap<String, usize> {
        let mut seen: BTreeMap<&str, BTreeSet<&(String, usize)>> = BTreeMap::new();
        for h in hits {
            seen.entry(&h.api).or_default().insert(&h.site_key);
        }
        seen.into_iter()
            .map(|(api, sites)| (api.to_string(), sites.len()))
            .collect()
    }

    /// Concrete conditions per API, deduplicated by (chain, guards), in hit
    /// order.
    pub fn collect_conditions(&self, hits: &[ApiHit]) -> Vec<ConcreteCondition> {
        let mut out: Vec<ConcreteCondition> = Vec::new();
        for h in hits {
            let cond = ConcreteCondition {
                api: h.api.clone(),
                guards: h.guards.clone(),
                chain: h.chain.clone(),
            };
            if !out.contains(&cond) {
                out.push(cond);
            }
        }
        out
    }

    /// Classify whether `api` is hit on all, some, or none of the acyclic
    /// paths through `callee`. The second component reports whether the
    /// path-cap fallback was used.
    pub fn classify_fuzzy(&self, callee: &str, api: &str, path_cap: usize) -> (FuzzyClass, bool) {
        let cfg = match self.cfgs.get(callee) {
            Some(c) => c,
            None => return (FuzzyClass::NoBranch, false),
        };
        let mut marked = vec![false; cfg.blocks.len()];
        let mut any = false;
        for block in &cfg.blocks {
            if block
                .call_sites
                .iter()
                .any(|s| self.call_reaches(&s.callee, api))
            {
                marked[block.id.0] = true;
                any = true;
            }
        }
        if !any {
            return (FuzzyClass::NoBranch, false);
        }
        let ps = enumerate_acyclic_paths(cfg, path_cap);
        if ps.overflowed || ps.paths.is_empty() {
            let all = marked_blocks_cover_all_paths(cfg, &marked);
            let class = if all {
                FuzzyClass::AllBranches
            } else {
                FuzzyClass::SomeBranches
            };
            return (class, true);
        }
        let hit_count = ps
            .paths
            .iter()
            .filter(|p| p.iter().any(|b| marked[b.0]))
            .count();
        let class = if hit_count == ps.paths.len() {
            FuzzyClass::AllBranches
        } else if hit_count > 0 {
            FuzzyClass::SomeBranches
        } else {
            // sites exist but sit off every enumerated path
            FuzzyClass::SomeBranches
        };
        (class, false)
    }

    /// Key variables per API: the first argument of each API call site,
    /// resolved through copy edges and mapped back along the chain to the
    /// expression visible where the analysis started (the root's call into
    /// the analyzed callee).
    pub fn extract_key_variables(&self, hits: &[ApiHit]) -> BTreeMap<String, Vec<String>> {
        let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for h in hits {
            if let Some(text) = self.back_map(h) {
                let vars = out.entry(h.api.clone()).or_default();
                if !vars.contains(&text) {
                    vars.push(text);
                }
            }
        }
        out
    }

    fn back_map(&self, hit: &ApiHit) -> Option<String> {
        let analyzed = hit.chain.first()?.as_str();
        let mut frame: &str = hit.chain.last()?.as_str();
        let mut arg: Expr = hit.args.first()?.clone();
        let mut hop_idx = hit.hops.len();
        loop {
            let root = match arg.root_ident() {
                Some(r) => r.to_string(),
                // no variable root (e.g. `free(make())`): report verbatim
                None => return Some(render_expr(&arg)),
            };
            let resolved = self
                .defuse
                .get(frame)
                .map(|du| du.resolve_copy(&root))
                .unwrap_or(root);
            let param = self
                .index
                .get(frame)
                .and_then(|f| f.param_index(&resolved));
            if frame == analyzed {
                if let Some(pi) = param {
                    // final hop: the root's actual argument expression
                    let call_in_root = self
                        .contexts_of(&self.graph.root)
                        .iter()
                        .find(|s| s.callee == analyzed);
                    if let Some(site) = call_in_root {
                        if let Some(actual) = site.args.get(pi) {
                            return Some(self.report_root_arg(actual));
                        }
                    }
                }
                return Some(resolved);
            }
            match (param, hop_idx.checked_sub(1)) {
                (Some(pi), Some(h)) => {
                    let (caller, site) = &hit.hops[h];
                    match site.args.get(pi) {
                        Some(actual) => {
                            arg = actual.clone();
                            frame = caller;
                            hop_idx = h;
                        }
                        None => return Some(resolved),
                    }
                }
                // not a parameter (or chain bookkeeping exhausted): the
                // variable lives in this frame, report it as seen here
                _ => return Some(resolved),
            }
        }
    }

    fn report_root_arg(&self, e: &Expr) -> String {
        match e {
            Expr::Ident(x) => self
                .defuse
                .get(&self.graph.root)
                .map(|du| du.resolve_copy(x))
                .unwrap_or_else(|| x.clone()),
            other => render_expr(other),
        }
    }
}

fn compute_reach(
    graph: &CallGraph,
    contexts: &BTreeMap<String, Vec<SiteCtx>>,
    catalog: &ApiCatalog,
) -> BTreeMap<String, BTreeSet<String>> {
    let mut reach: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (name, sites) in contexts {
        let direct: BTreeSet<String> = sites
            .iter()
            .filter_map(|s| match_call(catalog, &s.callee))
            .map(|e| e.family().to_string())
            .collect();
        reach.insert(name.clone(), direct);
    }
    // fixpoint over the (small, depth-limited) graph
    loop {
        let mut changed = false;
        for (caller, callee, _) in &graph.edges {
            if !reach.contains_key(callee) {
                continue; // external leaf
            }
            let add: Vec<String> = {
                let callee_apis = &reach[callee];
                let caller_apis = reach.get(caller).cloned().unwrap_or_default();
                callee_apis
                    .iter()
                    .filter(|a| !caller_apis.contains(*a))
                    .cloned()
                    .collect()
            };
            if !add.is_empty() {
                if let Some(set) = reach.get_mut(caller) {
                    for a in add {
                        set.insert(a);
                    }
                    changed = true;
                }
            }
        }
        if !changed {
            return reach;
        }
    }
}

/// Walk a function body collecting every call with its syntactic guard
/// stack. Guards controlling a condition's own calls are the enclosing
/// ones only; loop steps are guarded by the loop condition. Fallthrough
/// between switch arms is modeled in the CFG, not in these stacks.
pub fn collect_contexts(f: &FunctionAst) -> Vec<SiteCtx> {
    let mut out = Vec::new();
    let mut guards = Vec::new();
    walk_stmt(&f.body, &mut guards, &mut out);
    out.sort_by_key(|s| s.site);
    out
}

fn walk_stmt(s: &Stmt, guards: &mut Vec<String>, out: &mut Vec<SiteCtx>) {
    match s {
        Stmt::Block(stmts) => {
            for st in stmts {
                walk_stmt(st, guards, out);
            }
        }
        Stmt::If {
            cond,
            then_branch,
            else_branch,
        } => {
            walk_expr(cond, guards, out);
            guards.push(render_expr(cond));
            walk_stmt(then_branch, guards, out);
            guards.pop();
            if let Some(e) = else_branch {
                guards.push(render_negated(cond));
                walk_stmt(e, guards, out);
                guards.pop();
            }
        }
        Stmt::While { cond, body } => {
            walk_expr(cond, guards, out);
            guards.push(render_expr(cond));
            walk_stmt(body, guards, out);
            guards.pop();
        }
        Stmt::For {
            init,
            cond,
            step,
            body,
        } => {
            if let Some(st) = init {
                walk_stmt(st, guards, out);
            }
            if let Some(e) = cond {
                walk_expr(e, guards, out);
            }
            let guard_text = cond
                .as_ref()
                .map(render_expr)
                .unwrap_or_else(|| "1".to_string());
            guards.push(guard_text);
            if let Some(e) = step {
                walk_expr(e, guards, out);
            }
            walk_stmt(body, guards, out);
            guards.pop();
        }
        Stmt::Switch { scrutinee, cases } => {
            walk_expr(scrutinee, guards, out);
            let scrutinee_text = render_expr(scrutinee);
            let all_tests: Vec<String> = cases
                .iter()
                .flat_map(|c| c.labels.iter())
                .filter_map(|l| match l {
                    CaseLabel::Value(e) => {
                        Some(format!("{} == {}", scrutinee_text, render_expr(e)))
                    }
                    CaseLabel::Default => None,
                })
                .collect();
            for case in cases {
                let mut tests: Vec<String> = Vec::new();
                let mut is_default = false;
                for label in &case.labels {
                    match label {
                        CaseLabel::Value(e) => {
                            tests.push(format!("{} == {}", scrutinee_text, render_expr(e)))
                        }
                        CaseLabel::Default => is_default = true,
                    }
                }
                let guard_text = if is_default {
                    if all_tests.is_empty() {
                        "1".to_string()
                    } else {
                        format!("!({})", all_tests.join(" || "))
                    }
                } else {
                    tests.join(" || ")
                };
                guards.push(guard_text);
                for st in &case.body {
                    walk_stmt(st, guards, out);
                }
                guards.pop();
            }
        }
        Stmt::Return(Some(e)) => walk_expr(e, guards, out),
        Stmt::Return(None) | Stmt::Break | Stmt::Continue => {}
        Stmt::ExprStmt(e) => walk_expr(e, guards, out),
        Stmt::Decl { init, .. } => {
            if let Some(e) = init {
                walk_expr(e, guards, out);
            }
        }
    }
}

fn walk_expr(e: &Expr, guards: &[String], out: &mut Vec<SiteCtx>) {
    match e {
        Expr::Ident(_) | Expr::Literal(_) => {}
        Expr::Member { base, .. } => walk_expr(base, guards, out),
        Expr::Call { callee, args, site } => {
            for a in args {
                walk_expr(a, guards, out);
            }
            out.push(SiteCtx {
                site: *site,
                callee: callee.clone(),
                args: args.clone(),
                guards: guards.to_vec(),
            });
        }
        Expr::Unary { operand, .. } => walk_expr(operand, guards, out),
        Expr::Binary { lhs, rhs, .. } => {
            walk_expr(lhs, guards, out);
            walk_expr(rhs, guards, out);
        }
        Expr::Assign { lhs, rhs, .. } => {
            walk_expr(lhs, guards, out);
            walk_expr(rhs, guards, out);
        }
    }
}
