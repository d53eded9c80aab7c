//! Intra-procedural def-use chains and copy edges.
//!
//! Definition sites are declaration initializers and assignment targets;
//! uses are every occurrence of an identifier or member-chain root. Copy
//! edges connect `a = b;` style statements whose both sides are plain
//! identifiers or member chains rooted at identifiers, restricted to
//! declared variables (parameters included).

use std::collections::{BTreeMap, BTreeSet};

use crate::frontend::ast::*;

#[derive(Debug, Clone, Default)]
pub struct DefUse {
    /// Variable root -> ordinals of definition sites, in source order.
    pub defs: BTreeMap<String, Vec<usize>>,
    /// Variable root -> ordinals of use sites, in source order.
    pub uses: BTreeMap<String, Vec<usize>>,
    /// `(source, destination)` root pairs from simple copies.
    pub copies: BTreeSet<(String, String)>,
    declared: BTreeSet<String>,
}

impl DefUse {
    /// Follow copy edges backwards from `root` while the source is unique,
    /// guarding against cycles. `q` with only `q = p` resolves to `p`.
    pub fn resolve_copy(&self, root: &str) -> String {
        let mut cur = root.to_string();
        let mut seen = BTreeSet::new();
        loop {
            if !seen.insert(cur.clone()) {
                return cur;
            }
            let sources: Vec<&str> = self
                .copies
                .iter()
                .filter(|(_, dst)| *dst == cur)
                .map(|(src, _)| src.as_str())
                .collect();
            match sources.as_slice() {
                [only] => cur = (*only).to_string(),
                _ => return cur, // none or ambiguous: stop here
            }
        }
    }

    pub fn is_declared(&self, name: &str) -> bool {
        self.declared.contains(name)
    }
}

struct Walker {
    du: DefUse,
    site: usize,
}

impl Walker {
    fn next_site(&mut self) -> usize {
        let s = self.site;
        self.site += 1;
        s
    }

    fn record_use(&mut self, name: &str) {
        let site = self.next_site();
        self.du.uses.entry(name.to_string()).or_default().push(site);
    }

    fn record_def(&mut self, name: &str) {
        let site = self.next_site();
        self.du.defs.entry(name.to_string()).or_default().push(site);
    }

    fn uses_in_expr(&mut self, e: &Expr) {
        match e {
            Expr::Ident(name) => self.record_use(name),
            Expr::Member { .. } => {
                if let Some(root) = e.root_ident() {
                    let root = root.to_string();
                    self.record_use(&root);
                }
                // nested calls/indices inside the chain still count
                if let Expr::Member { base, .. } = e {
                    if !base.is_var_chain() {
                        self.uses_in_expr(base);
                    }
                }
            }
            Expr::Call { args, .. } => {
                for a in args {
                    self.uses_in_expr(a);
                }
            }
            Expr::Unary { operand, .. } => self.uses_in_expr(operand),
            Expr::Binary { lhs, rhs, .. } => {
                self.uses_in_expr(lhs);
                self.uses_in_expr(rhs);
            }
            Expr::Assign { lhs, rhs, .. } => {
                self.assign(lhs, rhs, /* plain= */ false);
            }
            Expr::Literal(_) => {}
        }
    }

    fn assign(&mut self, lhs: &Expr, rhs: &Expr, plain: bool) {
        if let Some(root) = lhs.root_ident() {
            let root = root.to_string();
            self.record_def(&root);
            // writing through a member chain also reads the root pointer
            if !matches!(lhs, Expr::Ident(_)) {
                self.record_use(&root);
            }
            if plain {
                self.copy_edge(rhs, lhs);
            }
        } else {
            self.uses_in_expr(lhs);
        }
        self.uses_in_expr(rhs);
    }

    fn copy_edge(&mut self, rhs: &Expr, lhs: &Expr) {
        if !lhs.is_var_chain() || !rhs.is_var_chain() {
            return;
        }
        let (src, dst) = match (rhs.root_ident(), lhs.root_ident()) {
            (Some(s), Some(d)) => (s.to_string(), d.to_string()),
            _ => return,
        };
        if src != dst && self.du.declared.contains(&src) && self.du.declared.contains(&dst) {
            self.du.copies.insert((src, dst));
        }
    }

    fn walk_stmt(&mut self, s: &Stmt) {
        match s {
            Stmt::Block(stmts) => {
                for st in stmts {
                    self.walk_stmt(st);
                }
            }
            Stmt::If {
                cond,
                then_branch,
                else_branch,
            } => {
                self.uses_in_expr(cond);
                self.walk_stmt(then_branch);
                if let Some(e) = else_branch {
                    self.walk_stmt(e);
                }
            }
            Stmt::While { cond, body } => {
                self.uses_in_expr(cond);
                self.walk_stmt(body);
            }
            Stmt::For {
                init,
                cond,
                step,
                body,
            } => {
                if let Some(st) = init {
                    self.walk_stmt(st);
                }
                if let Some(e) = cond {
                    self.uses_in_expr(e);
                }
                if let Some(e) = step {
                    self.uses_in_expr(e);
                }
                self.walk_stmt(body);
            }
            Stmt::Switch { scrutinee, cases } => {
                self.uses_in_expr(scrutinee);
                for case in cases {
                    for label in &case.labels {
                        if let CaseLabel::Value(e) = label {
                            self.uses_in_expr(e);
                        }
                    }
                    for st in &case.body {
                        self.walk_stmt(st);
                    }
                }
            }
            Stmt::Return(Some(e)) => self.uses_in_expr(e),
            Stmt::Return(None) | Stmt::Break | Stmt::Continue => {}
            Stmt::ExprStmt(e) => match e {
                Expr::Assign { lhs, rhs, op } => {
                    self.assign(lhs, rhs, *op == AssignOp::Assign);
                }
                other => self.uses_in_expr(other),
            },
            Stmt::Decl { name, init, .. } => {
                self.du.declared.insert(name.clone());
                if let Some(e) = init {
                    self.record_def(name);
                    if let (true, Some(src)) = (e.is_var_chain(), e.root_ident()) {
                        let src = src.to_string();
                        if src != *name && self.du.declared.contains(&src) {
                            self.du.copies.insert((src, name.clone()));
                        }
                    }
                    self.uses_in_expr(e);
                }
            }
        }
    }
}

pub fn build_def_use(fn_ast: &FunctionAst) -> DefUse {
    let mut w = Walker {
        du: DefUse::default(),
        site: 0,
    };
    for p in &fn_ast.params {
        if !p.name.is_empty() {
            w.du.declared.insert(p.name.clone());
        }
    }
    // declarations can be referenced before the walker reaches them only in
    // malformed code; pre-registering keeps copy edges complete
    collect_declared(&fn_ast.body, &mut w.du.declared);
    w.walk_stmt(&fn_ast.body);
    w.du
}

fn collect_declared(s: &Stmt, out: &mut BTreeSet<String>) {
    match s {
        Stmt::Block(stmts) => stmts.iter().for_each(|st| collect_declared(st, out)),
        Stmt::If {
            then_branch,
            else_branch,
            ..
        } => {
            collect_declared(then_branch, out);
            if let Some(e) = else_branch {
                collect_declared(e, out);
            }
        }
        Stmt::While { body, .. } => collect_declared(body, out),
        Stmt::For { init, body, .. } => {
            if let Some(st) = init {
                collect_declared(st, out);
            }
            collect_declared(body, out);
        }
        Stmt::Switch { cases, .. } => {
            for case in cases {
                case.body.iter().for_each(|st| collect_declared(st, out));
            }
        }
        Stmt::Decl { name, .. } => {
            out.insert(name.clone());
        }
        _ => {}
    }
}
