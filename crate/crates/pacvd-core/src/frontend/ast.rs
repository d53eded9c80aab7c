//! AST for the C subset the frontend accepts.
//!
//! The tree is deliberately small: function definitions with structured
//! statements and expressions rich enough to carry kernel-style guard and
//! call patterns. Constructs outside the subset degrade to opaque
//! expression statements instead of failing the whole unit.

/// One parsed translation unit.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceUnit {
    pub path: String,
    pub text: String,
    pub functions: Vec<FunctionAst>,
}

impl SourceUnit {
    pub fn function(&self, name: &str) -> Option<&FunctionAst> {
        self.functions.iter().find(|f| f.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    /// Declared type as written, normalized to single spaces (`struct request *`).
    pub ty: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionAst {
    pub name: String,
    /// Return type and storage qualifiers as written (`static void`).
    pub ret_ty: String,
    pub params: Vec<Param>,
    /// Always a `Stmt::Block`.
    pub body: Stmt,
    /// Byte span of the whole definition within the unit text.
    pub span: (usize, usize),
}

impl FunctionAst {
    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Block(Vec<Stmt>),
    If {
        cond: Expr,
        then_branch: Box<Stmt>,
        else_branch: Option<Box<Stmt>>,
    },
    While {
        cond: Expr,
        body: Box<Stmt>,
    },
    For {
        init: Option<Box<Stmt>>,
        cond: Option<Expr>,
        step: Option<Expr>,
        body: Box<Stmt>,
    },
    Switch {
        scrutinee: Expr,
        cases: Vec<SwitchCase>,
    },
    Return(Option<Expr>),
    ExprStmt(Expr),
    Decl {
        name: String,
        ty: String,
        /// Bracketed array suffix as written, e.g. `[10]`.
        array: Option<String>,
        init: Option<Expr>,
    },
    Break,
    Continue,
}

/// Coarse statement classification used for call-site paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StmtTag {
    Block,
    If,
    While,
    For,
    Switch,
    Return,
    ExprStmt,
    Decl,
    Break,
    Continue,
}

impl Stmt {
    pub fn tag(&self) -> StmtTag {
        match self {
            Stmt::Block(_) => StmtTag::Block,
            Stmt::If { .. } => StmtTag::If,
            Stmt::While { .. } => StmtTag::While,
            Stmt::For { .. } => StmtTag::For,
            Stmt::Switch { .. } => StmtTag::Switch,
            Stmt::Return(_) => StmtTag::Return,
            Stmt::ExprStmt(_) => StmtTag::ExprStmt,
            Stmt::Decl { .. } => StmtTag::Decl,
            Stmt::Break => StmtTag::Break,
            Stmt::Continue => StmtTag::Continue,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchCase {
    pub labels: Vec<CaseLabel>,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CaseLabel {
    Value(Expr),
    Default,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Ident(String),
    Member {
        base: Box<Expr>,
        field: String,
        /// `->` when true, `.` otherwise.
        arrow: bool,
    },
    Call {
        callee: String,
        args: Vec<Expr>,
        /// Per-function call ordinal in source (post-)order: arguments of a
        /// call complete before the call itself, so `g(h(x))` numbers `h`
        /// before `g`.
        site: usize,
    },
    Unary {
        op: UnaryOp,
        operand: Box<Expr>,
    },
    Binary {
        op: BinaryOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    /// Integer, float, string or char literal, stored verbatim. Also houses
    /// the raw text of opaque statements the parser recovered over.
    Literal(String),
    Assign {
        op: AssignOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
}

impl Expr {
    /// Root identifier of an lvalue-ish expression: `srp->rq->cmd` -> `srp`,
    /// `*p` -> `p`, `a[i].f` -> `a`.
    pub fn root_ident(&self) -> Option<&str> {
        match self {
            Expr::Ident(name) => Some(name),
            Expr::Member { base, .. } => base.root_ident(),
            Expr::Unary {
                op: UnaryOp::Deref | UnaryOp::AddrOf | UnaryOp::Cast(_),
                operand,
            } => operand.root_ident(),
            Expr::Binary {
                op: BinaryOp::Index,
                lhs,
                ..
            } => lhs.root_ident(),
            _ => None,
        }
    }

    /// True for plain identifiers and member chains rooted at an identifier.
    pub fn is_var_chain(&self) -> bool {
        match self {
            Expr::Ident(_) => true,
            Expr::Member { base, .. } => base.is_var_chain(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum UnaryOp {
    Deref,
    AddrOf,
    Not,
    Neg,
    Plus,
    BitNot,
    PreInc,
    PreDec,
    PostInc,
    PostDec,
    /// C-style cast; the string is the type text inside the parens.
    Cast(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Mul,
    Div,
    Rem,
    Add,
    Sub,
    Shl,
    Shr,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
    BitAnd,
    BitXor,
    BitOr,
    LogAnd,
    LogOr,
    /// Array indexing `a[i]`.
    Index,
    /// `cond ? x : y` is stored as `Question(cond, Colon(x, y))`.
    Question,
    Colon,
    Comma,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Rem => "%",
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Shl => "<<",
            BinaryOp::Shr => ">>",
            BinaryOp::Lt => "<",
            BinaryOp::Gt => ">",
            BinaryOp::Le => "<=",
            BinaryOp::Ge => ">=",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::BitAnd => "&",
            BinaryOp::BitXor => "^",
            BinaryOp::BitOr => "|",
            BinaryOp::LogAnd => "&&",
            BinaryOp::LogOr => "||",
            BinaryOp::Index => "[]",
            BinaryOp::Question => "?",
            BinaryOp::Colon => ":",
            BinaryOp::Comma => ",",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssignOp {
    Assign,
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Shl,
    Shr,
    And,
    Xor,
    Or,
}

impl AssignOp {
    pub fn symbol(self) -> &'static str {
        match self {
            AssignOp::Assign => "=",
            AssignOp::Add => "+=",
            AssignOp::Sub => "-=",
            AssignOp::Mul => "*=",
            AssignOp::Div => "/=",
            AssignOp::Rem => "%=",
            AssignOp::Shl => "<<=",
            AssignOp::Shr => ">>=",
            AssignOp::And => "&=",
            AssignOp::Xor => "^=",
            AssignOp::Or => "|=",
        }
    }
}
