//! C-subset frontend: lexing, parsing, pretty-printing and call extraction.

pub mod ast;
pub mod print;
mod token;

mod parser;

use thiserror::Error;

pub use ast::{
    AssignOp, BinaryOp, CaseLabel, Expr, FunctionAst, Param, SourceUnit, Stmt, StmtTag, SwitchCase,
    UnaryOp,
};

#[derive(Debug, Error)]
pub enum FrontendError {
    #[error("parse error at {line}:{col}: {message}")]
    Parse { line: u32, col: u32, message: String },
    #[error("invalid UTF-8 in `{path}` at byte {offset}")]
    Encoding { path: String, offset: usize },
}

/// Parse raw source bytes (interpreted as UTF-8) into a unit of function
/// definitions. Declarations without bodies are skipped.
pub fn parse_unit(path: &str, bytes: &[u8]) -> Result<SourceUnit, FrontendError> {
    let text = std::str::from_utf8(bytes).map_err(|e| FrontendError::Encoding {
        path: path.to_string(),
        offset: e.valid_up_to(),
    })?;
    parser::Parser::new(text).parse_unit(path)
}

/// Convenience wrapper over [`parse_unit`] for `&str` input.
pub fn parse_unit_str(path: &str, text: &str) -> Result<SourceUnit, FrontendError> {
    parser::Parser::new(text).parse_unit(path)
}

/// One call expression found inside a function body, in source order
/// (arguments complete before the call that contains them).
#[derive(Debug, Clone, PartialEq)]
pub struct CallRecord {
    pub callee: String,
    pub args: Vec<Expr>,
    /// Statement nesting from the body root down to the enclosing statement.
    pub path: Vec<StmtTag>,
    /// Per-function ordinal, stable across reparses.
    pub site: usize,
}

/// Every call expression in `fn_ast`, with its syntactic nesting path.
pub fn extract_calls(fn_ast: &FunctionAst) -> Vec<CallRecord> {
    let mut out = Vec::new();
    let mut path = Vec::new();
    walk_stmt(&fn_ast.body, &mut path, &mut out);
    out.sort_by_key(|r| r.site);
    out
}

fn walk_stmt(s: &Stmt, path: &mut Vec<StmtTag>, out: &mut Vec<CallRecord>) {
    path.push(s.tag());
    match s {
        Stmt::Block(stmts) => {
            for st in stmts {
                walk_stmt(st, path, out);
            }
        }
        Stmt::If {
            cond,
            then_branch,
            else_branch,
        } => {
            walk_expr(cond, path, out);
            walk_stmt(then_branch, path, out);
            if let Some(e) = else_branch {
                walk_stmt(e, path, out);
            }
        }
        Stmt::While { cond, body } => {
            walk_expr(cond, path, out);
            walk_stmt(body, path, out);
        }
        Stmt::For {
            init,
            cond,
            step,
            body,
        } => {
            if let Some(st) = init {
                walk_stmt(st, path, out);
            }
            if let Some(e) = cond {
                walk_expr(e, path, out);
            }
            if let Some(e) = step {
                walk_expr(e, path, out);
            }
            walk_stmt(body, path, out);
        }
        Stmt::Switch { scrutinee, cases } => {
            walk_expr(scrutinee, path, out);
            for case in cases {
                for label in &case.labels {
                    if let CaseLabel::Value(e) = label {
                        walk_expr(e, path, out);
                    }
                }
                for st in &case.body {
                    walk_stmt(st, path, out);
                }
            }
        }
        Stmt::Return(Some(e)) => walk_expr(e, path, out),
        Stmt::Return(None) | Stmt::Break | Stmt::Continue => {}
        Stmt::ExprStmt(e) => walk_expr(e, path, out),
        Stmt::Decl { init, .. } => {
            if let Some(e) = init {
                walk_expr(e, path, out);
            }
        }
    }
    path.pop();
}

fn walk_expr(e: &Expr, path: &[StmtTag], out: &mut Vec<CallRecord>) {
    match e {
        Expr::Ident(_) | Expr::Literal(_) => {}
        Expr::Member { base, .. } => walk_expr(base, path, out),
        Expr::Call { callee, args, site } => {
            for a in args {
                walk_expr(a, path, out);
            }
            out.push(CallRecord {
                callee: callee.clone(),
                args: args.clone(),
                path: path.to_vec(),
                site: *site,
            });
        }
        Expr::Unary { operand, .. } => walk_expr(operand, path, out),
        Expr::Binary { lhs, rhs, .. } => {
            walk_expr(lhs, path, out);
            walk_expr(rhs, path, out);
        }
        Expr::Assign { lhs, rhs, .. } => {
            walk_expr(lhs, path, out);
            walk_expr(rhs, path, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_function() {
        let unit = parse_unit("t.c", b"int f(void) { return 0; }").unwrap();
        assert_eq!(unit.functions.len(), 1);
        let f = &unit.functions[0];
        assert_eq!(f.name, "f");
        assert!(f.params.is_empty());
        match &f.body {
            Stmt::Block(stmts) => {
                assert_eq!(stmts.len(), 1);
                assert_eq!(stmts[0], Stmt::Return(Some(Expr::Literal("0".into()))));
            }
            other => panic!("expected block, got {other:?}"),
        }
    }

    #[test]
    fn skips_prototypes_and_globals() {
        let src = b"int g(int x);\nstatic int counter = 0;\nstruct q { int a; };\nint f() { return counter; }";
        let unit = parse_unit("t.c", src).unwrap();
        let names: Vec<&str> = unit.functions.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(names, vec!["f"]);
    }

    #[test]
    fn parse_error_on_unterminated_condition() {
        let err = parse_unit("t.c", b"int f() { if (x").unwrap_err();
        match err {
            FrontendError::Parse { message, .. } => {
                assert!(message.contains("expected"), "{message}")
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn encoding_error_on_invalid_utf8() {
        let err = parse_unit("t.c", b"int f() { \xff }").unwrap_err();
        assert!(matches!(err, FrontendError::Encoding { .. }));
    }

    #[test]
    fn extracts_single_call_with_path() {
        let unit = parse_unit("t.c", b"void f(int *p) { free(p); }").unwrap();
        let calls = extract_calls(&unit.functions[0]);
        assert_eq!(calls.len(), 1);
        assert_eq!(calls[0].callee, "free");
        assert_eq!(calls[0].args, vec![Expr::Ident("p".into())]);
        assert_eq!(calls[0].path, vec![StmtTag::Block, StmtTag::ExprStmt]);
    }

    #[test]
    fn call_under_if_includes_if_in_path() {
        let unit =
            parse_unit("t.c", b"void f(struct r *srp) { if (srp->rq) { free(srp->rq); } }")
                .unwrap();
        let calls = extract_calls(&unit.functions[0]);
        assert_eq!(calls.len(), 1);
        assert!(calls[0].path.contains(&StmtTag::If));
    }

    #[test]
    fn nested_calls_inner_first() {
        let unit = parse_unit("t.c", b"void f(int x) { g(h(x)); }").unwrap();
        let calls = extract_calls(&unit.functions[0]);
        let names: Vec<&str> = calls.iter().map(|c| c.callee.as_str()).collect();
        assert_eq!(names, vec!["h", "g"]);
    }

    #[test]
    fn unknown_constructs_degrade_to_opaque() {
        let unit = parse_unit(
            "t.c",
            b"void f(void) { __asm__ volatile(\"nop\"); free(0); }",
        )
        .unwrap();
        let f = &unit.functions[0];
        match &f.body {
            Stmt::Block(stmts) => {
                assert_eq!(stmts.len(), 2);
                assert!(matches!(&stmts[0], Stmt::ExprStmt(Expr::Literal(_))));
            }
            _ => panic!("expected block"),
        }
        assert_eq!(extract_calls(f).len(), 1);
    }

    #[test]
    fn member_chains_preserve_spelling() {
        let unit = parse_unit(
            "t.c",
            b"void f(struct r *srp) { if (srp->rq->cmd != srp->rq->__cmd) free(srp->rq->cmd); }",
        )
        .unwrap();
        let f = &unit.functions[0];
        match &f.body {
            Stmt::Block(stmts) => match &stmts[0] {
                Stmt::If { cond, .. } => {
                    assert_eq!(print::render_expr(cond), "srp->rq->cmd != srp->rq->__cmd");
                }
                _ => panic!("expected if"),
            },
            _ => panic!("expected block"),
        }
    }

    #[test]
    fn round_trip_is_structurally_stable() {
        let src = br#"
static int sg_common_write(Sg_fd *sfp, Sg_request *srp)
{
    int k;
    unsigned long iflags = 0;
    k = sg_start_req(srp);
    if (k) {
        blk_end_request_all(srp->rq, k);
        sg_finish_rem_req(srp);
        return k;
    }
    for (k = 0; k < 3; k++)
        poke(k, iflags);
    while (srp->next)
        srp = srp->next;
    switch (k) {
    case 1:
        free(srp);
        break;
    default:
        break;
    }
    return srp->rq ? 0 : -1;
}
"#;
        let unit = parse_unit("t.c", src).unwrap();
        let printed = print::render_unit(&unit);
        let reparsed = parse_unit_str("t.c", &printed).unwrap();
        assert_eq!(unit.functions.len(), reparsed.functions.len());
        for (a, b) in unit.functions.iter().zip(reparsed.functions.iter()) {
            assert_eq!(a.name, b.name);
            assert_eq!(a.params, b.params);
            assert_eq!(a.body, b.body, "bodies differ after round trip");
        }
    }

    #[test]
    fn duplicate_definitions_rejected() {
        let err = parse_unit("t.c", b"int f() { return 0; } int f() { return 1; }").unwrap_err();
        assert!(matches!(err, FrontendError::Parse { .. }));
    }

    #[test]
    fn casts_and_sizeof_survive() {
        let unit = parse_unit(
            "t.c",
            b"void f(int n) { char *p = (char *)malloc(n * sizeof(int)); free(p); }",
        )
        .unwrap();
        let calls = extract_calls(&unit.functions[0]);
        let names: Vec<&str> = calls.iter().map(|c| c.callee.as_str()).collect();
        assert_eq!(names, vec!["sizeof", "malloc", "free"]);
    }
}
