//! Mixed real/float expression IR.
//!
//! One tree type, [`Expr`], carries both real-number nodes (the semantics a
//! program denotes) and floating-point operator nodes (what a target can
//! execute). Parsed FPCore programs start out in *surface* form, where real
//! function symbols stand in for operators not yet chosen; [`resolve`] maps
//! them onto a target's operators.

mod format;
pub mod parse;
mod resolve;
pub mod sexpr;

use std::fmt;
use std::sync::Arc;

use rug::Rational;
use thiserror::Error;

pub use format::{format_fpcore, format_literal, format_numeral};
pub use parse::{parse_expr_with_holes, parse_numeral, parse_program, parse_real_expr, Template};
pub use resolve::{desugar, resolve, typecheck, TypeEnv};
pub use sexpr::Pos;

/// Interned-ish identifier shared between expressions, e-graphs and targets.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(s: &str) -> Self {
        Symbol(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

impl From<String> for Symbol {
    fn from(s: String) -> Self {
        Symbol(Arc::from(s))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeTag {
    Real,
    B64,
    B32,
    Bool,
}

impl TypeTag {
    pub const FLOATS: [TypeTag; 2] = [TypeTag::B64, TypeTag::B32];

    /// Significand bits, including the implicit leading bit.
    pub fn precision(self) -> Result<u32, IrError> {
        match self {
            TypeTag::B64 => Ok(53),
            TypeTag::B32 => Ok(24),
            other => Err(IrError::NoPrecision(other)),
        }
    }

    pub fn is_float(self) -> bool {
        matches!(self, TypeTag::B64 | TypeTag::B32)
    }

    pub fn name(self) -> &'static str {
        match self {
            TypeTag::Real => "real",
            TypeTag::B64 => "binary64",
            TypeTag::B32 => "binary32",
            TypeTag::Bool => "bool",
        }
    }

    pub fn from_name(s: &str) -> Option<TypeTag> {
        match s {
            "real" => Some(TypeTag::Real),
            "binary64" => Some(TypeTag::B64),
            "binary32" => Some(TypeTag::B32),
            "bool" => Some(TypeTag::Bool),
            _ => None,
        }
    }
}

impl fmt::Display for TypeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The fixed set of real functions the IR and the oracle understand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RealFn {
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Sqrt,
    Fabs,
    Exp,
    Expm1,
    Log,
    Log1p,
    Pow,
    Sin,
    Cos,
    Tan,
    Fma,
    Hypot,
}

impl RealFn {
    pub const ALL: [RealFn; 17] = [
        RealFn::Add,
        RealFn::Sub,
        RealFn::Mul,
        RealFn::Div,
        RealFn::Neg,
        RealFn::Sqrt,
        RealFn::Fabs,
        RealFn::Exp,
        RealFn::Expm1,
        RealFn::Log,
        RealFn::Log1p,
        RealFn::Pow,
        RealFn::Sin,
        RealFn::Cos,
        RealFn::Tan,
        RealFn::Fma,
        RealFn::Hypot,
    ];

    /// Canonical name. Negation prints as unary `-` in FPCore but is named
    /// `neg` everywhere else.
    pub fn name(self) -> &'static str {
        match self {
            RealFn::Add => "+",
            RealFn::Sub => "-",
            RealFn::Mul => "*",
            RealFn::Div => "/",
            RealFn::Neg => "neg",
            RealFn::Sqrt => "sqrt",
            RealFn::Fabs => "fabs",
            RealFn::Exp => "exp",
            RealFn::Expm1 => "expm1",
            RealFn::Log => "log",
            RealFn::Log1p => "log1p",
            RealFn::Pow => "pow",
            RealFn::Sin => "sin",
            RealFn::Cos => "cos",
            RealFn::Tan => "tan",
            RealFn::Fma => "fma",
            RealFn::Hypot => "hypot",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            RealFn::Add | RealFn::Sub | RealFn::Mul | RealFn::Div | RealFn::Pow | RealFn::Hypot => 2,
            RealFn::Fma => 3,
            _ => 1,
        }
    }

    /// Looks a surface name up, using the argument count to tell unary minus
    /// from subtraction.
    pub fn from_surface(name: &str, nargs: usize) -> Option<RealFn> {
        if name == "-" && nargs == 1 {
            return Some(RealFn::Neg);
        }
        RealFn::ALL.iter().copied().find(|f| f.name() == name)
    }
}

impl fmt::Display for RealFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn name(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }

    pub fn from_name(s: &str) -> Option<CmpOp> {
        Some(match s {
            "<" => CmpOp::Lt,
            "<=" => CmpOp::Le,
            "==" => CmpOp::Eq,
            "!=" => CmpOp::Ne,
            ">=" => CmpOp::Ge,
            ">" => CmpOp::Gt,
            _ => return None,
        })
    }

    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CmpOp::Lt => ord == Less,
            CmpOp::Le => ord != Greater,
            CmpOp::Eq => ord == Equal,
            CmpOp::Ne => ord != Equal,
            CmpOp::Ge => ord != Less,
            CmpOp::Gt => ord == Greater,
        }
    }
}

/// An exact rational literal. `ty` is `Real` for symbolic constants and a
/// float type for literals that were rounded into that format.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub value: Rational,
    pub ty: TypeTag,
}

impl Literal {
    pub fn real(value: Rational) -> Self {
        Literal {
            value,
            ty: TypeTag::Real,
        }
    }
}

/// Surface-only annotations produced by the FPCore `!` form. [`resolve`]
/// removes them.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Annotation {
    /// `(! :precision binary32 e)`: surface operators and numerals in `e` use
    /// this format.
    Precision(TypeTag),
    /// `(! :operator NAME body)`: `body` is the operator's desugaring with the
    /// arguments substituted in.
    Operator(Symbol),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Var(Symbol),
    Lit(Literal),
    Real(RealFn, Vec<Expr>),
    Op(Symbol, Vec<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    Annot(Annotation, Box<Expr>),
}

/// Child-index path from a root to a subexpression.
pub type Path = Vec<usize>;

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(Symbol::new(name))
    }

    pub fn real_lit(n: i64) -> Expr {
        Expr::Lit(Literal::real(Rational::from(n)))
    }

    pub fn op(name: &str, args: Vec<Expr>) -> Expr {
        Expr::Op(Symbol::new(name), args)
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Var(_) | Expr::Lit(_) => vec![],
            Expr::Real(_, args) | Expr::Op(_, args) => args.iter().collect(),
            Expr::If(c, t, e) => vec![c, t, e],
            Expr::Cmp(_, a, b) => vec![a, b],
            Expr::Annot(_, e) => vec![e],
        }
    }

    fn children_mut(&mut self) -> Vec<&mut Expr> {
        match self {
            Expr::Var(_) | Expr::Lit(_) => vec![],
            Expr::Real(_, args) | Expr::Op(_, args) => args.iter_mut().collect(),
            Expr::If(c, t, e) => vec![c, t, e],
            Expr::Cmp(_, a, b) => vec![a, b],
            Expr::Annot(_, e) => vec![e],
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Expr::size).sum::<usize>()
    }

    pub fn get(&self, path: &[usize]) -> Option<&Expr> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.children().get(i).and_then(|c| c.get(rest)),
        }
    }

    /// Returns a copy with the subtree at `path` replaced.
    pub fn replace_at(&self, path: &[usize], new: Expr) -> Expr {
        let mut out = self.clone();
        let mut slot = &mut out;
        for &i in path {
            slot = slot
                .children_mut()
                .into_iter()
                .nth(i)
                .expect("path does not address a node");
        }
        *slot = new;
        out
    }

    /// Pre-order list of `(path, node)` pairs.
    pub fn nodes(&self) -> Vec<(Path, &Expr)> {
        fn walk<'a>(e: &'a Expr, path: &mut Path, out: &mut Vec<(Path, &'a Expr)>) {
            out.push((path.clone(), e));
            for (i, c) in e.children().into_iter().enumerate() {
                path.push(i);
                walk(c, path, out);
                path.pop();
            }
        }
        let mut out = Vec::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    /// Free variables in first-occurrence order.
    pub fn free_vars(&self) -> Vec<Symbol> {
        let mut out: Vec<Symbol> = Vec::new();
        for (_, n) in self.nodes() {
            if let Expr::Var(v) = n {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
        }
        out
    }

    pub fn contains_real_op(&self) -> bool {
        self.nodes().iter().any(|(_, n)| matches!(n, Expr::Real(..)))
    }

    pub fn contains_branch(&self) -> bool {
        self.nodes()
            .iter()
            .any(|(_, n)| matches!(n, Expr::If(..) | Expr::Cmp(..)))
    }

    /// Simultaneous substitution of variables.
    pub fn substitute(&self, binds: &[(Symbol, Expr)]) -> Expr {
        match self {
            Expr::Var(v) => binds
                .iter()
                .find(|(n, _)| n == v)
                .map(|(_, e)| e.clone())
                .unwrap_or_else(|| self.clone()),
            Expr::Lit(_) => self.clone(),
            Expr::Real(f, args) => Expr::Real(*f, args.iter().map(|a| a.substitute(binds)).collect()),
            Expr::Op(o, args) => Expr::Op(o.clone(), args.iter().map(|a| a.substitute(binds)).collect()),
            Expr::If(c, t, e) => Expr::If(
                Box::new(c.substitute(binds)),
                Box::new(t.substitute(binds)),
                Box::new(e.substitute(binds)),
            ),
            Expr::Cmp(op, a, b) => Expr::Cmp(*op, Box::new(a.substitute(binds)), Box::new(b.substitute(binds))),
            Expr::Annot(a, e) => Expr::Annot(a.clone(), Box::new(e.substitute(binds))),
        }
    }
}

/// A real expression printed as an s-expression, for diagnostics and keys.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Lit(l) => {
                if l.ty == TypeTag::Real {
                    f.write_str(&format_numeral(&l.value))
                } else {
                    write!(f, "{}:{}", format_numeral(&l.value), l.ty)
                }
            }
            Expr::Real(op, args) => {
                write!(f, "({op}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
            Expr::Op(op, args) => {
                write!(f, "({op}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
            Expr::If(c, t, e) => write!(f, "(if {c} {t} {e})"),
            Expr::Cmp(op, a, b) => write!(f, "({} {a} {b})", op.name()),
            Expr::Annot(Annotation::Precision(t), e) => write!(f, "(! :precision {t} {e})"),
            Expr::Annot(Annotation::Operator(o), e) => write!(f, "(! :operator {o} {e})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Program {
    pub params: Vec<(Symbol, TypeTag)>,
    pub body: Expr,
    pub output: TypeTag,
}

impl Program {
    pub fn type_env(&self) -> TypeEnv {
        self.params.iter().cloned().collect()
    }

    pub fn with_body(&self, body: Expr) -> Program {
        Program {
            params: self.params.clone(),
            body,
            output: self.output,
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum IrError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("unknown operator `{0}`")]
    UnknownOperator(String),
    #[error("`{op}` expects {expected} argument(s), found {found}")]
    Arity { op: String, expected: usize, found: usize },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("no operator implements `{surface}` at {ty}")]
    NoSuchOperator { surface: String, ty: TypeTag },
    #[error("operators {candidates:?} all implement `{surface}` at {ty}")]
    AmbiguousOperator {
        surface: String,
        ty: TypeTag,
        candidates: Vec<String>,
    },
    #[error("type mismatch in `{node}`: expected {expected}, found {found}")]
    TypeMismatch {
        node: String,
        expected: TypeTag,
        found: TypeTag,
    },
    #[error("`{0}` has no precision")]
    NoPrecision(TypeTag),
    #[error("annotated body does not match the desugaring of `{0}`")]
    AnnotationMismatch(String),
    #[error("unresolved surface node `{0}`")]
    Unresolved(String),
}
