//! Pretty-printer for the C-subset AST.
//!
//! Output reparses to a structurally identical tree, and expression
//! rendering reproduces source operator spelling, which the guard texts in
//! branch-condition reports rely on.

use super::ast::*;

const PREC_PRIMARY: u8 = 14;
const PREC_UNARY: u8 = 13;

fn binary_prec(op: BinaryOp) -> u8 {
    match op {
        BinaryOp::Comma => 0,
        BinaryOp::Question | BinaryOp::Colon => 2,
        BinaryOp::LogOr => 3,
        BinaryOp::LogAnd => 4,
        BinaryOp::BitOr => 5,
        BinaryOp::BitXor => 6,
        BinaryOp::BitAnd => 7,
        BinaryOp::Eq | BinaryOp::Ne => 8,
        BinaryOp::Lt | BinaryOp::Gt | BinaryOp::Le | BinaryOp::Ge => 9,
        BinaryOp::Shl | BinaryOp::Shr => 10,
        BinaryOp::Add | BinaryOp::Sub => 11,
        BinaryOp::Mul | BinaryOp::Div | BinaryOp::Rem => 12,
        BinaryOp::Index => PREC_PRIMARY,
    }
}

pub fn render_expr(e: &Expr) -> String {
    render_prec(e, 0)
}

fn render_prec(e: &Expr, parent: u8) -> String {
    let (text, prec) = match e {
        Expr::Ident(name) => (name.clone(), PREC_PRIMARY),
        Expr::Literal(text) => (text.clone(), PREC_PRIMARY),
        Expr::Member { base, field, arrow } => (
            format!(
                "{}{}{}",
                render_prec(base, PREC_PRIMARY),
                if *arrow { "->" } else { "." },
                field
            ),
            PREC_PRIMARY,
        ),
        Expr::Call { callee, args, .. } => {
            let args: Vec<String> = args.iter().map(|a| render_prec(a, 1)).collect();
            (format!("{}({})", callee, args.join(", ")), PREC_PRIMARY)
        }
        Expr::Unary { op, operand } => match op {
            UnaryOp::PostInc => (
                format!("{}++", render_prec(operand, PREC_PRIMARY)),
                PREC_PRIMARY,
            ),
            UnaryOp::PostDec => (
                format!("{}--", render_prec(operand, PREC_PRIMARY)),
                PREC_PRIMARY,
            ),
            UnaryOp::Cast(ty) => (
                format!("({}){}", ty, render_prec(operand, PREC_UNARY)),
                PREC_UNARY,
            ),
            _ => {
                let sym = match op {
                    UnaryOp::Deref => "*",
                    UnaryOp::AddrOf => "&",
                    UnaryOp::Not => "!",
                    UnaryOp::Neg => "-",
                    UnaryOp::Plus => "+",
                    UnaryOp::BitNot => "~",
                    UnaryOp::PreInc => "++",
                    UnaryOp::PreDec => "--",
                    UnaryOp::PostInc | UnaryOp::PostDec | UnaryOp::Cast(_) => unreachable!(),
                };
                (
                    format!("{}{}", sym, render_prec(operand, PREC_UNARY)),
                    PREC_UNARY,
                )
            }
        },
        Expr::Binary { op, lhs, rhs } => match op {
            BinaryOp::Index => (
                format!(
                    "{}[{}]",
                    render_prec(lhs, PREC_PRIMARY),
                    render_prec(rhs, 0)
                ),
                PREC_PRIMARY,
            ),
            BinaryOp::Question => {
                let (mid, tail) = match rhs.as_ref() {
                    Expr::Binary {
                        op: BinaryOp::Colon,
                        lhs: m,
                        rhs: t,
                    } => (render_prec(m, 1), render_prec(t, 2)),
                    other => (render_prec(other, 1), String::from("0")),
                };
                (
                    format!("{} ? {} : {}", render_prec(lhs, 3), mid, tail),
                    2,
                )
            }
            BinaryOp::Colon => (
                format!("{} : {}", render_prec(lhs, 1), render_prec(rhs, 2)),
                2,
            ),
            BinaryOp::Comma => (
                format!("{}, {}", render_prec(lhs, 0), render_prec(rhs, 1)),
                0,
            ),
            _ => {
                let p = binary_prec(*op);
                (
                    format!(
                        "{} {} {}",
                        render_prec(lhs, p),
                        op.symbol(),
                        render_prec(rhs, p + 1)
                    ),
                    p,
                )
            }
        },
        Expr::Assign { op, lhs, rhs } => (
            format!(
                "{} {} {}",
                render_prec(lhs, 2),
                op.symbol(),
                render_prec(rhs, 1)
            ),
            1,
        ),
    };
    if prec < parent {
        format!("({text})")
    } else {
        text
    }
}

/// Render a condition negated, reproducing source spelling inside.
pub fn render_negated(e: &Expr) -> String {
    if let Expr::Unary {
        op: UnaryOp::Not,
        operand,
    } = e
    {
        return render_expr(operand);
    }
    format!("!({})", render_expr(e))
}

pub fn render_stmt(s: &Stmt, indent: usize) -> String {
    let mut out = String::new();
    write_stmt(s, indent, &mut out);
    out
}

fn pad(indent: usize, out: &mut String) {
    for _ in 0..indent {
        out.push_str("    ");
    }
}

fn write_stmt(s: &Stmt, indent: usize, out: &mut String) {
    match s {
        Stmt::Block(stmts) => {
            pad(indent, out);
            out.push_str("{\n");
            for st in stmts {
                write_stmt(st, indent + 1, out);
            }
            pad(indent, out);
            out.push_str("}\n");
        }
        Stmt::If {
            cond,
            then_branch,
            else_branch,
        } => {
            pad(indent, out);
            out.push_str(&format!("if ({})\n", render_expr(cond)));
            write_branch(then_branch, indent, out);
            if let Some(e) = else_branch {
                pad(indent, out);
                out.push_str("else\n");
                write_branch(e, indent, out);
            }
        }
        Stmt::While { cond, body } => {
            pad(indent, out);
            out.push_str(&format!("while ({})\n", render_expr(cond)));
            write_branch(body, indent, out);
        }
        Stmt::For {
            init,
            cond,
            step,
            body,
        } => {
            pad(indent, out);
            let init_txt = match init {
                None => String::new(),
                Some(st) => render_for_init(st),
            };
            let cond_txt = cond.as_ref().map(render_expr).unwrap_or_default();
            let step_txt = step.as_ref().map(render_expr).unwrap_or_default();
            out.push_str(&format!("for ({init_txt}; {cond_txt}; {step_txt})\n"));
            write_branch(body, indent, out);
        }
        Stmt::Switch { scrutinee, cases } => {
            pad(indent, out);
            out.push_str(&format!("switch ({}) {{\n", render_expr(scrutinee)));
            for case in cases {
                for label in &case.labels {
                    pad(indent, out);
                    match label {
                        CaseLabel::Value(e) => out.push_str(&format!("case {}:\n", render_expr(e))),
                        CaseLabel::Default => out.push_str("default:\n"),
                    }
                }
                for st in &case.body {
                    write_stmt(st, indent + 1, out);
                }
            }
            pad(indent, out);
            out.push_str("}\n");
        }
        Stmt::Return(value) => {
            pad(indent, out);
            match value {
                Some(e) => out.push_str(&format!("return {};\n", render_expr(e))),
                None => out.push_str("return;\n"),
            }
        }
        Stmt::ExprStmt(e) => {
            pad(indent, out);
            out.push_str(&format!("{};\n", render_expr(e)));
        }
        Stmt::Decl {
            name,
            ty,
            array,
            init,
        } => {
            pad(indent, out);
            out.push_str(&render_decl(name, ty, array.as_deref(), init.as_ref()));
            out.push_str(";\n");
        }
        Stmt::Break => {
            pad(indent, out);
            out.push_str("break;\n");
        }
        Stmt::Continue => {
            pad(indent, out);
            out.push_str("continue;\n");
        }
    }
}

fn write_branch(s: &Stmt, indent: usize, out: &mut String) {
    if matches!(s, Stmt::Block(_)) {
        write_stmt(s, indent, out);
    } else {
        write_stmt(s, indent + 1, out);
    }
}

fn render_decl(name: &str, ty: &str, array: Option<&str>, init: Option<&Expr>) -> String {
    let mut s = if ty.is_empty() {
        name.to_string()
    } else if ty.ends_with('*') {
        format!("{ty}{name}")
    } else {
        format!("{ty} {name}")
    };
    if let Some(a) = array {
        s.push_str(a);
    }
    if let Some(e) = init {
        s.push_str(" = ");
        s.push_str(&render_expr(e));
    }
    s
}

fn render_for_init(s: &Stmt) -> String {
    match s {
        Stmt::ExprStmt(e) => render_expr(e),
        Stmt::Decl {
            name,
            ty,
            array,
            init,
        } => render_decl(name, ty, array.as_deref(), init.as_ref()),
        Stmt::Block(decls) => {
            // multi-declarator init: shared base type, per-declarator stars
            let mut parts: Vec<String> = Vec::new();
            for (i, d) in decls.iter().enumerate() {
                if let Stmt::Decl {
                    name,
                    ty,
                    array,
                    init,
                } = d
                {
                    if i == 0 {
                        parts.push(render_decl(name, ty, array.as_deref(), init.as_ref()));
                    } else {
                        let stars = ty.chars().rev().take_while(|c| *c == '*').count();
                        let mut item = format!("{}{}", "*".repeat(stars), name);
                        if let Some(a) = array {
                            item.push_str(a);
                        }
                        if let Some(e) = init {
                            item.push_str(" = ");
                            item.push_str(&render_expr(e));
                        }
                        parts.push(item);
                    }
                }
            }
            parts.join(", ")
        }
        _ => String::new(),
    }
}

pub fn render_function(f: &FunctionAst) -> String {
    let params: Vec<String> = f
        .params
        .iter()
        .map(|p| {
            if p.name.is_empty() {
                p.ty.clone()
            } else if p.ty.ends_with('*') {
                format!("{}{}", p.ty, p.name)
            } else if p.ty.is_empty() {
                p.name.clone()
            } else {
                format!("{} {}", p.ty, p.name)
            }
        })
        .collect();
    let params = if params.is_empty() {
        "void".to_string()
    } else {
        params.join(", ")
    };
    let head = if f.ret_ty.is_empty() {
        f.name.clone()
    } else if f.ret_ty.ends_with('*') {
        format!("{}{}", f.ret_ty, f.name)
    } else {
        format!("{} {}", f.ret_ty, f.name)
    };
    format!("{head}({params})\n{}", render_stmt(&f.body, 0))
}

pub fn render_unit(unit: &SourceUnit) -> String {
    let mut out = String::new();
    for f in &unit.functions {
        out.push_str(&render_function(f));
        out.push('\n');
    }
    out
}
