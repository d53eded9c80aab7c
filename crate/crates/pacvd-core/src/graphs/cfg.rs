//! Per-function control-flow graphs with guarded edges.
//!
//! Structured statements lower to the standard patterns: `if` to a diamond,
//! loops to a guarded header with a back edge, `switch` to a fan-out with
//! per-case guards and fallthrough edges. Straight-line code coalesces into
//! maximal blocks; control structure lives entirely on the edges.

use crate::frontend::ast::*;
use crate::frontend::print::{render_expr, render_negated};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockId(pub usize);

impl std::fmt::Display for BlockId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "b{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Taken,
    NotTaken,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Guard {
    pub expr: Expr,
    pub polarity: Polarity,
    /// Source-faithful condition text; negated spelling when not taken.
    pub rendered: String,
}

impl Guard {
    fn taken(expr: &Expr) -> Self {
        Guard {
            expr: expr.clone(),
            polarity: Polarity::Taken,
            rendered: render_expr(expr),
        }
    }

    fn not_taken(expr: &Expr) -> Self {
        Guard {
            expr: expr.clone(),
            polarity: Polarity::NotTaken,
            rendered: render_negated(expr),
        }
    }
}

/// A call expression pinned to the basic block that evaluates it.
#[derive(Debug, Clone, PartialEq)]
pub struct CallSite {
    pub callee: String,
    pub args: Vec<Expr>,
    /// Per-function source ordinal, shared with `extract_calls`.
    pub site: usize,
}

#[derive(Debug, Clone)]
pub struct BasicBlock {
    pub id: BlockId,
    /// Straight-line statements only; branching statements never appear here.
    pub stmts: Vec<Stmt>,
    pub call_sites: Vec<CallSite>,
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub from: BlockId,
    pub to: BlockId,
    pub guard: Option<Guard>,
}

#[derive(Debug, Clone)]
pub struct Cfg {
    pub function: String,
    pub entry: BlockId,
    pub exit: BlockId,
    pub blocks: Vec<BasicBlock>,
    pub edges: Vec<Edge>,
}

impl Cfg {
    pub fn block(&self, id: BlockId) -> &BasicBlock {
        &self.blocks[id.0]
    }

    pub fn successors(&self, id: BlockId) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.from == id)
    }

    pub fn predecessors(&self, id: BlockId) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.to == id)
    }

    /// Interior blocks: everything except the dedicated entry and exit.
    pub fn interior_count(&self) -> usize {
        self.blocks.len() - 2
    }

    /// All call sites in the function, in source order.
    pub fn call_sites(&self) -> Vec<&CallSite> {
        let mut sites: Vec<&CallSite> = self
            .blocks
            .iter()
            .flat_map(|b| b.call_sites.iter())
            .collect();
        sites.sort_by_key(|s| s.site);
        sites
    }

    /// Line-oriented debug dump: `node <id>` and `edge <from> <to> [guard]`.
    pub fn to_debug_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("cfg {}\n", self.function));
        for b in &self.blocks {
            let role = if b.id == self.entry {
                " entry"
            } else if b.id == self.exit {
                " exit"
            } else {
                ""
            };
            out.push_str(&format!("node {}{}\n", b.id, role));
        }
        for e in &self.edges {
            match &e.guard {
                Some(g) => out.push_str(&format!("edge {} {} {}\n", e.from, e.to, g.rendered)),
                None => out.push_str(&format!("edge {} {}\n", e.from, e.to)),
            }
        }
        out
    }
}

struct Builder {
    blocks: Vec<BasicBlock>,
    edges: Vec<Edge>,
    /// Block currently collecting statements; `None` after a jump.
    current: Option<usize>,
    exit: usize,
    /// `(continue target, break target)` per enclosing loop/switch.
    break_stack: Vec<usize>,
    continue_stack: Vec<usize>,
}

impl Builder {
    fn new_block(&mut self) -> usize {
        let id = self.blocks.len();
        self.blocks.push(BasicBlock {
            id: BlockId(id),
            stmts: Vec::new(),
            call_sites: Vec::new(),
        });
        id
    }

    fn edge(&mut self, from: usize, to: usize, guard: Option<Guard>) {
        self.edges.push(Edge {
            from: BlockId(from),
            to: BlockId(to),
            guard,
        });
    }

    fn ensure_current(&mut self) -> usize {
        match self.current {
            Some(id) => id,
            None => {
                // unreachable region (after return/break); collected blocks
                // with no predecessors are pruned later
                let id = self.new_block();
                self.current = Some(id);
                id
            }
        }
    }

    fn add_calls_from_expr(&mut self, block: usize, e: &Expr) {
        collect_calls(e, &mut self.blocks[block].call_sites);
    }

    fn lower_stmt(&mut self, s: &Stmt) {
        match s {
            Stmt::Block(stmts) => {
                for st in stmts {
                    self.lower_stmt(st);
                }
            }
            Stmt::ExprStmt(e) => {
                let b = self.ensure_current();
                self.blocks[b].stmts.push(s.clone());
                self.add_calls_from_expr(b, e);
            }
            Stmt::Decl { init, .. } => {
                let b = self.ensure_current();
                self.blocks[b].stmts.push(s.clone());
                if let Some(e) = init {
                    self.add_calls_from_expr(b, e);
                }
            }
            Stmt::Return(value) => {
                let b = self.ensure_current();
                self.blocks[b].stmts.push(s.clone());
                if let Some(e) = value {
                    self.add_calls_from_expr(b, e);
                }
                self.edge(b, self.exit, None);
                self.current = None;
            }
            Stmt::Break => {
                let b = self.ensure_current();
                self.blocks[b].stmts.push(s.clone());
                if let Some(&target) = self.break_stack.last() {
                    self.edge(b, target, None);
                }
                self.current = None;
            }
            Stmt::Continue => {
                let b = self.ensure_current();
                self.blocks[b].stmts.push(s.clone());
                if let Some(&target) = self.continue_stack.last() {
                    self.edge(b, target, None);
                }
                self.current = None;
            }
            Stmt::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let c = self.ensure_current();
                self.add_calls_from_expr(c, cond);
                let join = self.new_block();
                let then_start = self.new_block();
                self.edge(c, then_start, Some(Guard::taken(cond)));
                self.current = Some(then_start);
                self.lower_stmt(then_branch);
                if let Some(end) = self.current {
                    self.edge(end, join, None);
                }
                match else_branch {
                    Some(else_stmt) => {
                        let else_start = self.new_block();
                        self.edge(c, else_start, Some(Guard::not_taken(cond)));
                        self.current = Some(else_start);
                        self.lower_stmt(else_stmt);
                        if let Some(end) = self.current {
                            self.edge(end, join, None);
                        }
                    }
                    None => {
                        self.edge(c, join, Some(Guard::not_taken(cond)));
                    }
                }
                self.current = Some(join);
            }
            Stmt::While { cond, body } => {
                let before = self.ensure_current();
                let header = self.new_block();
                self.edge(before, header, None);
                self.add_calls_from_expr(header, cond);
                let body_start = self.new_block();
                let after = self.new_block();
                self.edge(header, body_start, Some(Guard::taken(cond)));
                self.edge(header, after, Some(Guard::not_taken(cond)));
                self.break_stack.push(after);
                self.continue_stack.push(header);
                self.current = Some(body_start);
                self.lower_stmt(body);
                if let Some(end) = self.current {
                    self.edge(end, header, None); // back edge
                }
                self.break_stack.pop();
                self.continue_stack.pop();
                self.current = Some(after);
            }
            Stmt::For {
                init,
                cond,
                step,
                body,
            } => {
                if let Some(st) = init {
                    self.lower_stmt(st);
                }
                let before = self.ensure_current();
                let header = self.new_block();
                self.edge(before, header, None);
                let always = Expr::Literal("1".to_string());
                let cond_expr = cond.clone().unwrap_or(always);
                self.add_calls_from_expr(header, &cond_expr);
                let body_start = self.new_block();
                let after = self.new_block();
                let step_block = self.new_block();
                self.edge(header, body_start, Some(Guard::taken(&cond_expr)));
                self.edge(header, after, Some(Guard::not_taken(&cond_expr)));
                self.break_stack.push(after);
                self.continue_stack.push(step_block);
                self.current = Some(body_start);
                self.lower_stmt(body);
                if let Some(end) = self.current {
                    self.edge(end, step_block, None);
                }
                if let Some(e) = step {
                    self.blocks[step_block]
                        .stmts
                        .push(Stmt::ExprStmt(e.clone()));
                    self.add_calls_from_expr(step_block, e);
                }
                self.edge(step_block, header, None); // back edge
                self.break_stack.pop();
                self.continue_stack.pop();
                self.current = Some(after);
            }
            Stmt::Switch { scrutinee, cases } => {
                let s_block = self.ensure_current();
                self.add_calls_from_expr(s_block, scrutinee);
                let after = self.new_block();
                self.break_stack.push(after);
                // all value tests, for the default/implicit edge rendering
                let mut tests: Vec<Expr> = Vec::new();
                for case in cases {
                    for label in &case.labels {
                        if let CaseLabel::Value(e) = label {
                            tests.push(Expr::Binary {
                                op: BinaryOp::Eq,
                                lhs: Box::new(scrutinee.clone()),
                                rhs: Box::new(e.clone()),
                            });
                        }
                    }
                }
                let not_any = |tests: &[Expr]| -> Guard {
                    let expr = tests
                        .iter()
                        .cloned()
                        .reduce(|a, b| Expr::Binary {
                            op: BinaryOp::LogOr,
                            lhs: Box::new(a),
                            rhs: Box::new(b),
                        })
                        .unwrap_or_else(|| Expr::Literal("0".to_string()));
                    Guard::not_taken(&expr)
                };
                let mut case_starts = Vec::with_capacity(cases.len());
                for _ in cases {
                    case_starts.push(self.new_block());
                }
                let mut has_default = false;
                for (i, case) in cases.iter().enumerate() {
                    for label in &case.labels {
                        match label {
                            CaseLabel::Value(e) => {
                                let test = Expr::Binary {
                                    op: BinaryOp::Eq,
                                    lhs: Box::new(scrutinee.clone()),
                                    rhs: Box::new(e.clone()),
                                };
                                self.edge(s_block, case_starts[i], Some(Guard::taken(&test)));
                            }
                            CaseLabel::Default => {
                                has_default = true;
                                self.edge(s_block, case_starts[i], Some(not_any(&tests)));
                            }
                        }
                    }
                }
                if !has_default {
                    // implicit not-taken edge straight past the switch
                    self.edge(s_block, after, Some(not_any(&tests)));
                }
                for (i, case) in cases.iter().enumerate() {
                    self.current = Some(case_starts[i]);
                    for st in &case.body {
                        self.lower_stmt(st);
                    }
                    if let Some(end) = self.current {
                        // fallthrough into the next case, or out of the switch
                        let target = case_starts.get(i + 1).copied().unwrap_or(after);
                        self.edge(end, target, None);
                    }
                }
                self.break_stack.pop();
                self.current = Some(after);
            }
        }
    }
}

fn collect_calls(e: &Expr, out: &mut Vec<CallSite>) {
    match e {
        Expr::Ident(_) | Expr::Literal(_) => {}
        Expr::Member { base, .. } => collect_calls(base, out),
        Expr::Call { callee, args, site } => {
            for a in args {
                collect_calls(a, out);
            }
            out.push(CallSite {
                callee: callee.clone(),
                args: args.clone(),
                site: *site,
            });
        }
        Expr::Unary { operand, .. } => collect_calls(operand, out),
        Expr::Binary { lhs, rhs, .. } => {
            collect_calls(lhs, out);
            collect_calls(rhs, out);
        }
        Expr::Assign { lhs, rhs, .. } => {
            collect_calls(lhs, out);
            collect_calls(rhs, out);
        }
    }
}

/// Lower a function body to its control-flow graph. Deterministic: the same
/// input yields the same block numbering.
pub fn build_cfg(fn_ast: &FunctionAst) -> Cfg {
    let mut b = Builder {
        blocks: Vec::new(),
        edges: Vec::new(),
        current: None,
        exit: 0,
        break_stack: Vec::new(),
        continue_stack: Vec::new(),
    };
    let entry = b.new_block();
    let exit = b.new_block();
    b.exit = exit;

    let first = b.new_block();
    b.edge(entry, first, None);
    b.current = Some(first);
    b.lower_stmt(&fn_ast.body);
    if let Some(end) = b.current {
        b.edge(end, exit, None);
    }

    prune_and_renumber(fn_ast, b, entry, exit)
}

fn prune_and_renumber(fn_ast: &FunctionAst, b: Builder, entry: usize, exit: usize) -> Cfg {
    // reachability from entry
    let n = b.blocks.len();
    let mut reach = vec![false; n];
    let mut stack = vec![entry];
    reach[entry] = true;
    while let Some(cur) = stack.pop() {
        for e in &b.edges {
            if e.from.0 == cur && !reach[e.to.0] {
                reach[e.to.0] = true;
                stack.push(e.to.0);
            }
        }
    }
    reach[exit] = true; // exit always survives, even if no path reaches it
    let pruned = reach.iter().filter(|r| !**r).count();
    if pruned > 0 {
        log::debug!(
            "cfg {}: pruned {pruned} unreachable block(s)",
            fn_ast.name
        );
    }
    let mut remap = vec![usize::MAX; n];
    let mut blocks = Vec::new();
    for (i, block) in b.blocks.into_iter().enumerate() {
        if reach[i] {
            remap[i] = blocks.len();
            blocks.push(BasicBlock {
                id: BlockId(blocks.len()),
                stmts: block.stmts,
                call_sites: block.call_sites,
            });
        }
    }
    let edges = b
        .edges
        .into_iter()
        .filter(|e| reach[e.from.0] && reach[e.to.0])
        .map(|e| Edge {
            from: BlockId(remap[e.from.0]),
            to: BlockId(remap[e.to.0]),
            guard: e.guard,
        })
        .collect();
    Cfg {
        function: fn_ast.name.clone(),
        entry: BlockId(remap[entry]),
        exit: BlockId(remap[exit]),
        blocks,
        edges,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_unit;

    fn cfg_of(src: &str) -> Cfg {
        let unit = parse_unit("t.c", src.as_bytes()).unwrap();
        build_cfg(&unit.functions[0])
    }

    #[test]
    fn straight_line_single_interior_block() {
        let cfg = cfg_of("void f(int a) { int x = a; x = x + 1; use(x); }");
        assert_eq!(cfg.interior_count(), 1);
        let interior: Vec<&BasicBlock> = cfg
            .blocks
            .iter()
            .filter(|b| b.id != cfg.entry && b.id != cfg.exit)
            .collect();
        assert_eq!(interior[0].stmts.len(), 3);
    }

    #[test]
    fn if_else_is_a_diamond() {
        let cfg = cfg_of("void f(int c) { if (c) a(); else b(); }");
        // cond, then, else, join
        assert_eq!(cfg.interior_count(), 4);
        let branchy: Vec<&BasicBlock> = cfg
            .blocks
            .iter()
            .filter(|b| cfg.successors(b.id).count() == 2)
            .collect();
        assert_eq!(branchy.len(), 1);
        let guards: Vec<(Polarity, String)> = cfg
            .successors(branchy[0].id)
            .map(|e| {
                let g = e.guard.as_ref().expect("guarded");
                (g.polarity, g.rendered.clone())
            })
            .collect();
        assert!(guards.contains(&(Polarity::Taken, "c".to_string())));
        assert!(guards.contains(&(Polarity::NotTaken, "!(c)".to_string())));
    }

    #[test]
    fn while_loop_has_back_edge_and_guarded_body() {
        let cfg = cfg_of("void f(int c, int *p) { while (c) { free(p); } }");
        let header = cfg
            .blocks
            .iter()
            .find(|b| cfg.successors(b.id).count() == 2)
            .expect("loop header");
        let taken: Vec<&Edge> = cfg
            .successors(header.id)
            .filter(|e| matches!(&e.guard, Some(g) if g.polarity == Polarity::Taken))
            .collect();
        assert_eq!(taken.len(), 1);
        let body = taken[0].to;
        assert_eq!(cfg.block(body).call_sites.len(), 1);
        assert_eq!(cfg.block(body).call_sites[0].callee, "free");
        // back edge from the loop body to the header
        assert!(cfg.edges.iter().any(|e| e.from == body && e.to == header.id));
    }

    #[test]
    fn branching_blocks_guard_every_edge() {
        let cfg = cfg_of(
            "void f(int c, int d) { if (c) { a(); } if (d) b(); else e(); while (c) g(); }",
        );
        for b in &cfg.blocks {
            let succs: Vec<&Edge> = cfg.successors(b.id).collect();
            if succs.len() > 1 {
                assert!(succs.iter().all(|e| e.guard.is_some()));
            }
        }
    }

    #[test]
    fn return_stops_flow_and_unreachable_is_pruned() {
        let cfg = cfg_of("int f(int c) { return 1; use(c); }");
        // the trailing use(c) block has no predecessor and must be gone
        assert!(cfg
            .blocks
            .iter()
            .all(|b| !b.stmts.iter().any(
                |s| matches!(s, Stmt::ExprStmt(Expr::Call { callee, .. }) if callee == "use")
            )));
        // entry has no preds; exit no succs
        assert_eq!(cfg.predecessors(cfg.entry).count(), 0);
        assert_eq!(cfg.successors(cfg.exit).count(), 0);
    }

    #[test]
    fn switch_fans_out_with_fallthrough() {
        let cfg = cfg_of(
            "void f(int x) { switch (x) { case 1: a(); case 2: b(); break; default: c(); } }",
        );
        let scrutinee = cfg
            .blocks
            .iter()
            .find(|b| cfg.successors(b.id).count() == 3)
            .expect("switch head");
        for e in cfg.successors(scrutinee.id) {
            assert!(e.guard.is_some());
        }
        // case 1 falls through into case 2's block
        let case1 = cfg
            .successors(scrutinee.id)
            .find(|e| matches!(&e.guard, Some(g) if g.rendered == "x == 1"))
            .unwrap()
            .to;
        let case2 = cfg
            .successors(scrutinee.id)
            .find(|e| matches!(&e.guard, Some(g) if g.rendered == "x == 2"))
            .unwrap()
            .to;
        assert!(cfg
            .edges
            .iter()
            .any(|e| e.from == case1 && e.to == case2 && e.guard.is_none()));
    }

    #[test]
    fn switch_without_default_gets_implicit_not_taken_edge() {
        let cfg = cfg_of("void f(int x) { switch (x) { case 1: a(); break; } done(); }");
        let head = cfg
            .blocks
            .iter()
            .find(|b| cfg.successors(b.id).count() == 2)
            .expect("switch head");
        let nt: Vec<&Edge> = cfg
            .successors(head.id)
            .filter(|e| matches!(&e.guard, Some(g) if g.polarity == Polarity::NotTaken))
            .collect();
        assert_eq!(nt.len(), 1);
        assert_eq!(nt[0].guard.as_ref().unwrap().rendered, "!(x == 1)");
    }

    #[test]
    fn deterministic_numbering() {
        let src = "void f(int c) { if (c) a(); else b(); while (c) g(); }";
        let a = cfg_of(src);
        let b = cfg_of(src);
        assert_eq!(a.to_debug_text(), b.to_debug_text());
    }

    #[test]
    fn condition_calls_live_in_branching_block() {
        let cfg = cfg_of("void f(int *p) { if (check(p)) use(p); }");
        let head = cfg
            .blocks
            .iter()
            .find(|b| cfg.successors(b.id).count() == 2)
            .unwrap();
        assert_eq!(head.call_sites.len(), 1);
        assert_eq!(head.call_sites[0].callee, "check");
    }
}
