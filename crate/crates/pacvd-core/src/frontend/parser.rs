//! Recursive-descent parser for the C subset.
//!
//! Top-level items other than function definitions (prototypes, globals,
//! struct/typedef definitions) are skipped. Inside function bodies,
//! statements that start with a control keyword commit to that parse and
//! report errors; anything else that fails to parse degrades to an opaque
//! expression statement holding the raw source text, so real-world snippets
//! with inline asm or other exotica survive.

use super::ast::*;
use super::token::{lex, TokKind, Token};
use super::FrontendError;

const TYPE_KEYWORDS: [&str; 14] = [
    "void", "char", "short", "int", "long", "float", "double", "signed", "unsigned", "const",
    "volatile", "static", "register", "inline",
];

const TAG_KEYWORDS: [&str; 3] = ["struct", "union", "enum"];

const STMT_KEYWORDS: [&str; 10] = [
    "if", "else", "while", "for", "switch", "case", "default", "return", "break", "continue",
];

fn is_type_kw(t: &Token) -> bool {
    t.kind == TokKind::Ident
        && (TYPE_KEYWORDS.contains(&t.text.as_str()) || TAG_KEYWORDS.contains(&t.text.as_str()))
}

fn is_stmt_kw(t: &Token) -> bool {
    t.kind == TokKind::Ident && STMT_KEYWORDS.contains(&t.text.as_str())
}

pub struct Parser<'a> {
    toks: Vec<Token>,
    text: &'a str,
    pos: usize,
    call_counter: usize,
}

type PResult<T> = Result<T, FrontendError>;

impl<'a> Parser<'a> {
    pub fn new(text: &'a str) -> Self {
        Parser {
            toks: lex(text),
            text,
            pos: 0,
            call_counter: 0,
        }
    }

    fn cur(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek(&self, n: usize) -> &Token {
        let idx = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[idx]
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at_eof(&self) -> bool {
        self.cur().kind == TokKind::Eof
    }

    fn err(&self, expected: &str) -> FrontendError {
        let t = self.cur();
        let found = match t.kind {
            TokKind::Eof => "end of input".to_string(),
            _ => format!("`{}`", t.text),
        };
        FrontendError::Parse {
            line: t.line,
            col: t.col,
            message: format!("expected {expected}, found {found}"),
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<Token> {
        if self.cur().is_punct(p) {
            Ok(self.advance())
        } else {
            Err(self.err(&format!("`{p}`")))
        }
    }

    // ---- translation unit ----------------------------------------------

    pub fn parse_unit(mut self, path: &str) -> PResult<SourceUnit> {
        let mut functions: Vec<FunctionAst> = Vec::new();
        while !self.at_eof() {
            if self.cur().is_punct(";") {
                self.advance();
                continue;
            }
            if self.cur().is_ident("typedef") {
                self.skip_item()?;
                continue;
            }
            if let Some(f) = self.parse_item()? {
                if functions.iter().any(|g| g.name == f.name) {
                    return Err(FrontendError::Parse {
                        line: self.cur().line,
                        col: self.cur().col,
                        message: format!("duplicate definition of function `{}`", f.name),
                    });
                }
                functions.push(f);
            }
        }
        Ok(SourceUnit {
            path: path.to_string(),
            text: self.text.to_string(),
            functions,
        })
    }

    /// Parse one top-level item; `Some` for a function definition, `None`
    /// for anything skipped.
    fn parse_item(&mut self) -> PResult<Option<FunctionAst>> {
        let start_tok = self.pos;
        let start_offset = self.cur().offset;
        // Collect the leading type/name run: identifiers, tag keywords, stars.
        let mut last_ident: Option<usize> = None;
        loop {
            let t = self.cur();
            if t.kind == TokKind::Ident && !is_stmt_kw(t) {
                last_ident = Some(self.pos);
                self.advance();
            } else if t.is_punct("*") {
                self.advance();
            } else {
                break;
            }
        }
        let t = self.cur().clone();
        if t.is_punct("(") {
            if let Some(name_pos) = last_ident {
                let name = self.toks[name_pos].text.clone();
                let ret_ty = join_type_text(
                    self.toks[start_tok..name_pos]
                        .iter()
                        .map(|t| t.text.as_str()),
                );
                self.advance(); // (
                let params = self.parse_params()?;
                self.expect_punct(")")?;
                if self.cur().is_punct(";") {
                    self.advance(); // prototype, skipped
                    return Ok(None);
                }
                if self.cur().is_punct("{") {
                    self.call_counter = 0;
                    let body = self.parse_block()?;
                    let end_offset = self.toks[self.pos.saturating_sub(1)].offset
                        + self.toks[self.pos.saturating_sub(1)].text.len();
                    return Ok(Some(FunctionAst {
                        name,
                        ret_ty,
                        params,
                        body,
                        span: (start_offset, end_offset),
                    }));
                }
                // K&R declarations, attributes, etc.: skip to `;` or a
                // brace-balanced body we cannot interpret.
                self.skip_item()?;
                return Ok(None);
            }
            // `(` with no preceding identifier: not an item we understand.
            self.skip_item()?;
            return Ok(None);
        }
        if self.pos == start_tok {
            // No progress possible on this token (stray literal, punct...).
            if t.kind == TokKind::Eof {
                return Ok(None);
            }
            self.skip_item()?;
            return Ok(None);
        }
        // Global variable, struct definition, enum, ...
        self.skip_item()?;
        Ok(None)
    }

    /// Skip a top-level item: consume through the next `;` at depth zero,
    /// balancing braces/parens/brackets on the way.
    fn skip_item(&mut self) -> PResult<()> {
        let mut depth = 0i32;
        loop {
            let t = self.cur().clone();
            match t.kind {
                TokKind::Eof => {
                    if depth > 0 {
                        return Err(self.err("`}`"));
                    }
                    return Ok(());
                }
                TokKind::Punct => match t.text.as_str() {
                    "{" | "(" | "[" => {
                        depth += 1;
                        self.advance();
                    }
                    "}" | ")" | "]" => {
                        depth -= 1;
                        self.advance();
                        if depth == 0 && self.cur().is_punct(";") {
                            self.advance();
                            return Ok(());
                        }
                        if depth <= 0 && !self.cur().is_punct(";") && t.text == "}" {
                            // struct definitions may omit the trailing `;`
                            // only in broken input; accept either way.
                            return Ok(());
                        }
                    }
                    ";" if depth <= 0 => {
                        self.advance();
                        return Ok(());
                    }
                    _ => {
                        self.advance();
                    }
                },
                _ => {
                    self.advance();
                }
            }
        }
    }

    fn parse_params(&mut self) -> PResult<Vec<Param>> {
        let mut params = Vec::new();
        if self.cur().is_punct(")") {
            return Ok(params);
        }
        loop {
            // one parameter: run of idents/kws/stars; last ident is the name
            let mut tokens: Vec<Token> = Vec::new();
            loop {
                let t = self.cur();
                if (t.kind == TokKind::Ident && !is_stmt_kw(t)) || t.is_punct("*") {
                    tokens.push(self.advance());
                } else if t.is_punct("...") {
                    self.advance(); // varargs, dropped
                } else if t.is_punct("[") {
                    // array parameter suffix, fold into the type text
                    tokens.push(self.advance());
                    while !self.cur().is_punct("]") && !self.at_eof() {
                        tokens.push(self.advance());
                    }
                    if self.cur().is_punct("]") {
                        tokens.push(self.advance());
                    }
                } else {
                    break;
                }
            }
            if !tokens.is_empty() {
                // `void` alone means no parameters
                let only_void = tokens.len() == 1 && tokens[0].text == "void";
                if !only_void {
                    let name_idx = tokens
                        .iter()
                        .rposition(|t| t.kind == TokKind::Ident && !is_type_kw(t));
                    match name_idx {
                        Some(idx) => {
                            let name = tokens[idx].text.clone();
                            let ty = join_type_text(
                                tokens
                                    .iter()
                                    .enumerate()
                                    .filter(|(i, _)| *i != idx)
                                    .map(|(_, t)| t.text.as_str()),
                            );
                            params.push(Param { name, ty });
                        }
                        None => {
                            // abstract declarator (prototype style), unnamed
                            let ty = join_type_text(tokens.iter().map(|t| t.text.as_str()));
                            params.push(Param {
                                name: String::new(),
                                ty,
                            });
                        }
                    }
                }
            }
            if self.cur().is_punct(",") {
                self.advance();
                continue;
            }
            return Ok(params);
        }
    }

    // ---- statements ------------------------------------------------------

    fn parse_block(&mut self) -> PResult<Stmt> {
        self.expect_punct("{")?;
        let mut stmts = Vec::new();
        loop {
            if self.cur().is_punct("}") {
                self.advance();
                return Ok(Stmt::Block(stmts));
            }
            if self.at_eof() {
                return Err(self.err("`}`"));
            }
            self.parse_stmt_into(&mut stmts)?;
        }
    }

    fn parse_stmt_into(&mut self, out: &mut Vec<Stmt>) -> PResult<()> {
        let t = self.cur().clone();
        if t.is_punct(";") {
            self.advance();
            return Ok(());
        }
        if t.is_punct("{") {
            let b = self.parse_block()?;
            out.push(b);
            return Ok(());
        }
        if t.kind == TokKind::Ident {
            match t.text.as_str() {
                "if" => {
                    out.push(self.parse_if()?);
                    return Ok(());
                }
                "while" => {
                    out.push(self.parse_while()?);
                    return Ok(());
                }
                "for" => {
                    out.push(self.parse_for()?);
                    return Ok(());
                }
                "switch" => {
                    out.push(self.parse_switch()?);
                    return Ok(());
                }
                "return" => {
                    self.advance();
                    let value = if self.cur().is_punct(";") {
                        None
                    } else {
                        Some(self.parse_expr(PREC_COMMA)?)
                    };
                    self.expect_punct(";")?;
                    out.push(Stmt::Return(value));
                    return Ok(());
                }
                "break" => {
                    self.advance();
                    self.expect_punct(";")?;
                    out.push(Stmt::Break);
                    return Ok(());
                }
                "continue" => {
                    self.advance();
                    self.expect_punct(";")?;
                    out.push(Stmt::Continue);
                    return Ok(());
                }
                _ => {}
            }
            // label: `ident :` (error-path labels are common; goto itself
            // degrades to an opaque statement)
            if self.peek(1).is_punct(":") && !self.peek(2).is_punct(":") {
                self.advance();
                self.advance();
                return Ok(());
            }
        }
        // declaration or expression statement; failures degrade to opaque
        let start = self.pos;
        let result = if self.looks_like_decl() {
            let mut tmp = Vec::new();
            self.parse_decls_into(&mut tmp).map(|()| out.extend(tmp))
        } else {
            match self.parse_expr(PREC_COMMA) {
                Ok(e) => match self.expect_punct(";") {
                    Ok(_) => {
                        out.push(Stmt::ExprStmt(e));
                        Ok(())
                    }
                    Err(e) => Err(e),
                },
                Err(e) => Err(e),
            }
        };
        match result {
            Ok(()) => Ok(()),
            Err(orig) => {
                // rewind and swallow the statement as opaque text
                self.pos = start;
                self.recover_opaque(out, orig)
            }
        }
    }

    /// Consume tokens up to the next `;` at depth zero (or a closing `}`)
    /// and record them as an opaque expression statement.
    fn recover_opaque(&mut self, out: &mut Vec<Stmt>, orig: FrontendError) -> PResult<()> {
        let start_offset = self.cur().offset;
        let mut depth = 0i32;
        let mut end_offset = start_offset;
        let mut consumed = false;
        loop {
            let t = self.cur();
            match t.kind {
                TokKind::Eof => return Err(orig),
                TokKind::Punct => match t.text.as_str() {
                    "{" | "(" | "[" => {
                        depth += 1;
                        end_offset = t.offset + t.text.len();
                        self.advance();
                        consumed = true;
                    }
                    "}" if depth == 0 => {
                        if !consumed {
                            return Err(orig);
                        }
                        break;
                    }
                    "}" | ")" | "]" => {
                        depth -= 1;
                        end_offset = t.offset + t.text.len();
                        self.advance();
                        consumed = true;
                    }
                    ";" if depth == 0 => {
                        self.advance();
                        break;
                    }
                    _ => {
                        end_offset = t.offset + t.text.len();
                        self.advance();
                        consumed = true;
                    }
                },
                _ => {
                    end_offset = t.offset + t.text.len();
                    self.advance();
                    consumed = true;
                }
            }
        }
        let raw = self.text[start_offset..end_offset].trim().to_string();
        if raw.is_empty() {
            return Err(orig);
        }
        out.push(Stmt::ExprStmt(Expr::Literal(raw)));
        Ok(())
    }

    fn parse_if(&mut self) -> PResult<Stmt> {
        self.advance(); // if
        self.expect_punct("(")?;
        let cond = self.parse_expr(PREC_COMMA)?;
        self.expect_punct(")")?;
        let then_branch = Box::new(self.parse_substmt()?);
        let else_branch = if self.cur().is_ident("else") {
            self.advance();
            Some(Box::new(self.parse_substmt()?))
        } else {
            None
        };
        Ok(Stmt::If {
            cond,
            then_branch,
            else_branch,
        })
    }

    fn parse_while(&mut self) -> PResult<Stmt> {
        self.advance(); // while
        self.expect_punct("(")?;
        let cond = self.parse_expr(PREC_COMMA)?;
        self.expect_punct(")")?;
        let body = Box::new(self.parse_substmt()?);
        Ok(Stmt::While { cond, body })
    }

    fn parse_for(&mut self) -> PResult<Stmt> {
        self.advance(); // for
        self.expect_punct("(")?;
        let init = if self.cur().is_punct(";") {
            self.advance();
            None
        } else {
            let mut tmp = Vec::new();
            if self.looks_like_decl() {
                self.parse_decls_into(&mut tmp)?;
            } else {
                let e = self.parse_expr(PREC_COMMA)?;
                self.expect_punct(";")?;
                tmp.push(Stmt::ExprStmt(e));
            }
            // multi-declarator inits fold into a block so `init` stays single
            match tmp.len() {
                0 => None,
                1 => Some(Box::new(tmp.remove(0))),
                _ => Some(Box::new(Stmt::Block(tmp))),
            }
        };
        let cond = if self.cur().is_punct(";") {
            None
        } else {
            Some(self.parse_expr(PREC_COMMA)?)
        };
        self.expect_punct(";")?;
        let step = if self.cur().is_punct(")") {
            None
        } else {
            Some(self.parse_expr(PREC_COMMA)?)
        };
        self.expect_punct(")")?;
        let body = Box::new(self.parse_substmt()?);
        Ok(Stmt::For {
            init,
            cond,
            step,
            body,
        })
    }

    fn parse_switch(&mut self) -> PResult<Stmt> {
        self.advance(); // switch
        self.expect_punct("(")?;
        let scrutinee = self.parse_expr(PREC_COMMA)?;
        self.expect_punct(")")?;
        self.expect_punct("{")?;
        let mut cases: Vec<SwitchCase> = Vec::new();
        let mut seen_default = false;
        let mut seen_labels: Vec<String> = Vec::new();
        while !self.cur().is_punct("}") {
            if self.at_eof() {
                return Err(self.err("`}`"));
            }
            let mut labels = Vec::new();
            loop {
                if self.cur().is_ident("case") {
                    self.advance();
                    let e = self.parse_expr(PREC_TERNARY)?;
                    self.expect_punct(":")?;
                    let text = super::print::render_expr(&e);
                    if seen_labels.contains(&text) {
                        return Err(FrontendError::Parse {
                            line: self.cur().line,
                            col: self.cur().col,
                            message: format!("duplicate case label `{text}`"),
                        });
                    }
                    seen_labels.push(text);
                    labels.push(CaseLabel::Value(e));
                } else if self.cur().is_ident("default") {
                    self.advance();
                    self.expect_punct(":")?;
                    if seen_default {
                        return Err(FrontendError::Parse {
                            line: self.cur().line,
                            col: self.cur().col,
                            message: "duplicate default label".to_string(),
                        });
                    }
                    seen_default = true;
                    labels.push(CaseLabel::Default);
                } else {
                    break;
                }
            }
            if labels.is_empty() {
                return Err(self.err("`case` or `default`"));
            }
            let mut body = Vec::new();
            while !self.cur().is_punct("}")
                && !self.cur().is_ident("case")
                && !self.cur().is_ident("default")
            {
                if self.at_eof() {
                    return Err(self.err("`}`"));
                }
                self.parse_stmt_into(&mut body)?;
            }
            cases.push(SwitchCase { labels, body });
        }
        self.advance(); // }
        Ok(Stmt::Switch { scrutinee, cases })
    }

    /// A single statement in branch position; wraps non-blocks so branch
    /// bodies are uniform.
    fn parse_substmt(&mut self) -> PResult<Stmt> {
        if self.cur().is_punct("{") {
            return self.parse_block();
        }
        let mut tmp = Vec::new();
        self.parse_stmt_into(&mut tmp)?;
        Ok(match tmp.len() {
            0 => Stmt::Block(Vec::new()),
            1 => tmp.remove(0),
            _ => Stmt::Block(tmp),
        })
    }

    // ---- declarations ----------------------------------------------------

    /// Lookahead: `type-kw ... ident [;=,[(]` or `ident (ident|*)* ident [;=,[]`.
    fn looks_like_decl(&self) -> bool {
        let mut i = 0usize;
        let mut idents = 0usize;
        let mut saw_kw = false;
        let mut last_was_ident = false;
        loop {
            let t = self.peek(i);
            if t.kind == TokKind::Ident && !is_stmt_kw(t) {
                if is_type_kw(t) {
                    saw_kw = true;
                    last_was_ident = false;
                } else {
                    idents += 1;
                    last_was_ident = true;
                }
                i += 1;
            } else if t.is_punct("*") {
                last_was_ident = false;
                i += 1;
            } else {
                break;
            }
            if i > 16 {
                return false;
            }
        }
        if i == 0 || !last_was_ident {
            return false;
        }
        let next = self.peek(i);
        let terminator =
            next.is_punct(";") || next.is_punct("=") || next.is_punct(",") || next.is_punct("[");
        terminator && (saw_kw || idents >= 2)
    }

    /// Parse `type declarator (, declarator)* ;` pushing one Decl per
    /// declarator.
    fn parse_decls_into(&mut self, out: &mut Vec<Stmt>) -> PResult<()> {
        // Base type: everything up to (but not including) the declarator name.
        let mut type_toks: Vec<String> = Vec::new();
        loop {
            let t = self.cur();
            let next = self.peek(1);
            if t.kind == TokKind::Ident && !is_stmt_kw(t) {
                let next_ends_decl = next.is_punct(";")
                    || next.is_punct("=")
                    || next.is_punct(",")
                    || next.is_punct("[");
                if !is_type_kw(t) && next_ends_decl {
                    break; // this ident is the declarator name
                }
                type_toks.push(self.advance().text);
            } else {
                break;
            }
        }
        let base_ty = join_type_text(type_toks.iter().map(|s| s.as_str()));
        loop {
            let mut stars = 0usize;
            while self.cur().is_punct("*") {
                stars += 1;
                self.advance();
            }
            let name_tok = self.cur().clone();
            if name_tok.kind != TokKind::Ident || is_stmt_kw(&name_tok) {
                return Err(self.err("declarator name"));
            }
            self.advance();
            let name = name_tok.text;
            let array = if self.cur().is_punct("[") {
                let start = self.cur().offset;
                let mut end = start + 1;
                self.advance();
                let mut depth = 1;
                while depth > 0 {
                    let t = self.cur();
                    if t.kind == TokKind::Eof {
                        return Err(self.err("`]`"));
                    }
                    if t.is_punct("[") {
                        depth += 1;
                    }
                    if t.is_punct("]") {
                        depth -= 1;
                    }
                    end = t.offset + t.text.len();
                    self.advance();
                }
                Some(self.text[start..end].to_string())
            } else {
                None
            };
            let init = if self.cur().is_punct("=") {
                self.advance();
                Some(self.parse_expr(PREC_ASSIGN)?)
            } else {
                None
            };
            let mut ty = base_ty.clone();
            if stars > 0 {
                if !ty.is_empty() {
                    ty.push(' ');
                }
                ty.push_str(&"*".repeat(stars));
            }
            out.push(Stmt::Decl {
                name,
                ty,
                array,
                init,
            });
            if self.cur().is_punct(",") {
                self.advance();
                continue;
            }
            self.expect_punct(";")?;
            return Ok(());
        }
    }

    // ---- expressions -----------------------------------------------------

    fn parse_expr(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.parse_unary()?;
        loop {
            let t = self.cur().clone();
            if t.kind != TokKind::Punct {
                break;
            }
            if let Some(op) = assign_op(&t.text) {
                if PREC_ASSIGN < min_prec {
                    break;
                }
                self.advance();
                let rhs = self.parse_expr(PREC_ASSIGN)?; // right-assoc
                lhs = Expr::Assign {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                };
                continue;
            }
            if t.text == "?" {
                if PREC_TERNARY < min_prec {
                    break;
                }
                self.advance();
                let mid = self.parse_expr(PREC_ASSIGN)?;
                self.expect_punct(":")?;
                let rhs = self.parse_expr(PREC_TERNARY)?;
                lhs = Expr::Binary {
                    op: BinaryOp::Question,
                    lhs: Box::new(lhs),
                    rhs: Box::new(Expr::Binary {
                        op: BinaryOp::Colon,
                        lhs: Box::new(mid),
                        rhs: Box::new(rhs),
                    }),
                };
                continue;
            }
            if t.text == "," {
                if PREC_COMMA < min_prec {
                    break;
                }
                self.advance();
                let rhs = self.parse_expr(PREC_ASSIGN)?;
                lhs = Expr::Binary {
                    op: BinaryOp::Comma,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                };
                continue;
            }
            let (op, prec) = match binary_op(&t.text) {
                Some(v) => v,
                None => break,
            };
            if prec < min_prec {
                break;
            }
            self.advance();
            let rhs = self.parse_expr(prec + 1)?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> PResult<Expr> {
        let t = self.cur().clone();
        if t.kind == TokKind::Punct {
            let op = match t.text.as_str() {
                "*" => Some(UnaryOp::Deref),
                "&" => Some(UnaryOp::AddrOf),
                "!" => Some(UnaryOp::Not),
                "-" => Some(UnaryOp::Neg),
                "+" => Some(UnaryOp::Plus),
                "~" => Some(UnaryOp::BitNot),
                "++" => Some(UnaryOp::PreInc),
                "--" => Some(UnaryOp::PreDec),
                _ => None,
            };
            if let Some(op) = op {
                self.advance();
                let operand = self.parse_unary()?;
                return Ok(Expr::Unary {
                    op,
                    operand: Box::new(operand),
                });
            }
            if t.text == "(" {
                if let Some(ty_text) = self.cast_lookahead() {
                    // consume `( type )`
                    while !self.cur().is_punct(")") {
                        self.advance();
                    }
                    self.advance();
                    let operand = self.parse_unary()?;
                    return Ok(Expr::Unary {
                        op: UnaryOp::Cast(ty_text),
                        operand: Box::new(operand),
                    });
                }
            }
        }
        self.parse_postfix()
    }

    /// If the parser sits on `(` opening a cast, return the type text.
    fn cast_lookahead(&self) -> Option<String> {
        let mut i = 1usize;
        let mut idents = 0usize;
        let mut saw_kw = false;
        let mut stars = 0usize;
        let mut parts: Vec<String> = Vec::new();
        loop {
            let t = self.peek(i);
            if t.kind == TokKind::Ident && !is_stmt_kw(t) {
                if is_type_kw(t) {
                    saw_kw = true;
                } else {
                    idents += 1;
                }
                parts.push(t.text.clone());
                i += 1;
            } else if t.is_punct("*") {
                stars += 1;
                parts.push("*".to_string());
                i += 1;
            } else {
                break;
            }
            if i > 12 {
                return None;
            }
        }
        if parts.is_empty() || !self.peek(i).is_punct(")") {
            return None;
        }
        if idents > 1 && !saw_kw {
            return None;
        }
        let after = self.peek(i + 1);
        let starts_operand = matches!(
            after.kind,
            TokKind::Ident | TokKind::Number | TokKind::Str | TokKind::Char
        ) && !after.is_ident("else")
            || after.is_punct("(")
            || after.is_punct("*")
            || after.is_punct("&")
            || after.is_punct("!")
            || after.is_punct("~");
        if !starts_operand {
            return None;
        }
        // `(x) y` style with a bare identifier is only a cast when something
        // type-ish backs it up or no binary reading exists; the operand test
        // above already rules the binary reading out for `( ident ) ident`.
        if !saw_kw && stars == 0 && !matches!(after.kind, TokKind::Ident | TokKind::Number) {
            return None;
        }
        Some(join_type_text(parts.iter().map(|s| s.as_str())))
    }

    fn parse_postfix(&mut self) -> PResult<Expr> {
        let mut e = self.parse_primary()?;
        loop {
            let t = self.cur().clone();
            if t.is_punct(".") || t.is_punct("->") {
                let arrow = t.text == "->";
                self.advance();
                let field = self.cur().clone();
                if field.kind != TokKind::Ident {
                    return Err(self.err("field name"));
                }
                self.advance();
                e = Expr::Member {
                    base: Box::new(e),
                    field: field.text,
                    arrow,
                };
                continue;
            }
            if t.is_punct("[") {
                self.advance();
                let idx = self.parse_expr(PREC_COMMA)?;
                self.expect_punct("]")?;
                e = Expr::Binary {
                    op: BinaryOp::Index,
                    lhs: Box::new(e),
                    rhs: Box::new(idx),
                };
                continue;
            }
            if t.is_punct("++") {
                self.advance();
                e = Expr::Unary {
                    op: UnaryOp::PostInc,
                    operand: Box::new(e),
                };
                continue;
            }
            if t.is_punct("--") {
                self.advance();
                e = Expr::Unary {
                    op: UnaryOp::PostDec,
                    operand: Box::new(e),
                };
                continue;
            }
            break;
        }
        Ok(e)
    }

    fn parse_primary(&mut self) -> PResult<Expr> {
        let t = self.cur().clone();
        match t.kind {
            TokKind::Number | TokKind::Str | TokKind::Char => {
                self.advance();
                Ok(Expr::Literal(t.text))
            }
            TokKind::Ident => {
                if is_stmt_kw(&t) {
                    return Err(self.err("expression"));
                }
                self.advance();
                if self.cur().is_punct("(") {
                    self.advance();
                    let mut args = Vec::new();
                    if !self.cur().is_punct(")") {
                        loop {
                            args.push(self.parse_expr(PREC_ASSIGN)?);
                            if self.cur().is_punct(",") {
                                self.advance();
                                continue;
                            }
                            break;
                        }
                    }
                    self.expect_punct(")")?;
                    let site = self.call_counter;
                    self.call_counter += 1;
                    return Ok(Expr::Call {
                        callee: t.text,
                        args,
                        site,
                    });
                }
                Ok(Expr::Ident(t.text))
            }
            TokKind::Punct if t.text == "(" => {
                self.advance();
                let e = self.parse_expr(PREC_COMMA)?;
                self.expect_punct(")")?;
                Ok(e)
            }
            _ => Err(self.err("expression")),
        }
    }
}

pub(super) const PREC_COMMA: u8 = 0;
pub(super) const PREC_ASSIGN: u8 = 1;
pub(super) const PREC_TERNARY: u8 = 2;

fn assign_op(s: &str) -> Option<AssignOp> {
    Some(match s {
        "=" => AssignOp::Assign,
        "+=" => AssignOp::Add,
        "-=" => AssignOp::Sub,
        "*=" => AssignOp::Mul,
        "/=" => AssignOp::Div,
        "%=" => AssignOp::Rem,
        "<<=" => AssignOp::Shl,
        ">>=" => AssignOp::Shr,
        "&=" => AssignOp::And,
        "^=" => AssignOp::Xor,
        "|=" => AssignOp::Or,
        _ => return None,
    })
}

/// Binary operator and its precedence (higher binds tighter).
fn binary_op(s: &str) -> Option<(BinaryOp, u8)> {
    Some(match s {
        "||" => (BinaryOp::LogOr, 3),
        "&&" => (BinaryOp::LogAnd, 4),
        "|" => (BinaryOp::BitOr, 5),
        "^" => (BinaryOp::BitXor, 6),
        "&" => (BinaryOp::BitAnd, 7),
        "==" => (BinaryOp::Eq, 8),
        "!=" => (BinaryOp::Ne, 8),
        "<" => (BinaryOp::Lt, 9),
        ">" => (BinaryOp::Gt, 9),
        "<=" => (BinaryOp::Le, 9),
        ">=" => (BinaryOp::Ge, 9),
        "<<" => (BinaryOp::Shl, 10),
        ">>" => (BinaryOp::Shr, 10),
        "+" => (BinaryOp::Add, 11),
        "-" => (BinaryOp::Sub, 11),
        "*" => (BinaryOp::Mul, 12),
        "/" => (BinaryOp::Div, 12),
        "%" => (BinaryOp::Rem, 12),
        _ => return None,
    })
}

fn join_type_text<'x>(parts: impl Iterator<Item = &'x str>) -> String {
    let mut out = String::new();
    for p in parts {
        if p == "*" {
            if out.ends_with('*') {
                out.push('*');
            } else {
                if !out.is_empty() {
                    out.push(' ');
                }
                out.push('*');
            }
        } else {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(p);
        }
    }
    out
}
