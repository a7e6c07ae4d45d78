use rug::{Integer, Rational};

use super::sexpr::{read_all, Sexp};
use super::{Annotation, CmpOp, Expr, IrError, Literal, Program, RealFn, Symbol, TypeTag};
use crate::oracle::round::round_rational;

fn syntax(s: &Sexp, msg: impl Into<String>) -> IrError {
    IrError::Syntax {
        pos: s.pos(),
        msg: msg.into(),
    }
}

/// Parses a decimal (`-1.5e3`) or rational (`3/4`) numeral exactly.
pub fn parse_numeral(text: &str) -> Option<Rational> {
    let first = text.chars().next()?;
    if !(first.is_ascii_digit() || first == '-' || first == '+' || first == '.') {
        return None;
    }
    if let Some((num, den)) = text.split_once('/') {
        let n: Integer = num.parse().ok()?;
        let d: Integer = den.parse().ok()?;
        if d == 0 || den.starts_with(['-', '+']) {
            return None;
        }
        return Some(Rational::from((n, d)));
    }
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (neg, digits) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut n: Integer = if all.is_empty() {
        Integer::new()
    } else {
        all.parse().ok()?
    };
    if neg {
        n = -n;
    }
    let scale = exp - frac_part.len() as i32;
    if scale.unsigned_abs() > 100_000 {
        return None;
    }
    let pow10 = Integer::from(Integer::u_pow_u(10, scale.unsigned_abs()));
    let v = if scale >= 0 {
        Rational::from(n * pow10)
    } else {
        Rational::from((n, pow10))
    };
    Some(v)
}

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    /// Numerals are rounded into the context precision.
    Rounded,
    /// Numerals stay exact real literals (inside `:operator` annotations).
    Exact,
}

struct Ctx<'a> {
    precision: TypeTag,
    mode: Mode,
    params: &'a [(Symbol, TypeTag)],
}

fn surface_expr(s: &Sexp, ctx: &Ctx) -> Result<Expr, IrError> {
    match s {
        Sexp::Str(..) => Err(syntax(s, "unexpected string")),
        Sexp::Atom(a, _) => {
            if let Some(v) = parse_numeral(a) {
                return Ok(match ctx.mode {
                    Mode::Exact => Expr::Lit(Literal::real(v)),
                    Mode::Rounded => Expr::Lit(Literal {
                        value: round_rational(&v, ctx.precision)
                            .ok_or_else(|| syntax(s, format!("numeral out of range for {}", ctx.precision)))?,
                        ty: ctx.precision,
                    }),
                });
            }
            if ctx.params.iter().any(|(p, _)| p.as_str() == a) {
                Ok(Expr::Var(Symbol::new(a)))
            } else {
                Err(IrError::UnboundVariable(a.clone()))
            }
        }
        Sexp::List(items, _) => {
            let Some((head, args)) = items.split_first() else {
                return Err(syntax(s, "empty expression"));
            };
            let Some(name) = head.as_atom() else {
                return Err(syntax(head, "operator position must be a symbol"));
            };
            match name {
                "if" => {
                    if args.len() != 3 {
                        return Err(IrError::Arity {
                            op: "if".into(),
                            expected: 3,
                            found: args.len(),
                        });
                    }
                    Ok(Expr::If(
                        Box::new(surface_expr(&args[0], ctx)?),
                        Box::new(surface_expr(&args[1], ctx)?),
                        Box::new(surface_expr(&args[2], ctx)?),
                    ))
                }
                "!" => annotation(s, args, ctx),
                _ => {
                    if let Some(op) = CmpOp::from_name(name) {
                        if args.len() != 2 {
                            return Err(IrError::Arity {
                                op: name.into(),
                                expected: 2,
                                found: args.len(),
                            });
                        }
                        return Ok(Expr::Cmp(
                            op,
                            Box::new(surface_expr(&args[0], ctx)?),
                            Box::new(surface_expr(&args[1], ctx)?),
                        ));
                    }
                    let f =
                        RealFn::from_surface(name, args.len()).ok_or_else(|| IrError::UnknownOperator(name.into()))?;
                    if f.arity() != args.len() {
                        return Err(IrError::Arity {
                            op: name.into(),
                            expected: f.arity(),
                            found: args.len(),
                        });
                    }
                    let args = args.iter().map(|a| surface_expr(a, ctx)).collect::<Result<_, _>>()?;
                    Ok(Expr::Real(f, args))
                }
            }
        }
    }
}

fn annotation(whole: &Sexp, args: &[Sexp], ctx: &Ctx) -> Result<Expr, IrError> {
    let mut i = 0;
    let mut annot: Option<Annotation> = None;
    while i + 1 < args.len() && args[i].is_keyword() {
        let key = args[i].as_atom().unwrap_or_default();
        let val = &args[i + 1];
        match key {
            ":precision" => {
                let t = val
                    .as_atom()
                    .and_then(TypeTag::from_name)
                    .filter(|t| t.is_float())
                    .ok_or_else(|| syntax(val, "expected binary64 or binary32"))?;
                annot = Some(Annotation::Precision(t));
            }
            ":operator" => {
                let n = val.as_atom().ok_or_else(|| syntax(val, "expected an operator name"))?;
                annot = Some(Annotation::Operator(Symbol::new(n)));
            }
            // Other FPCore properties carry no meaning here.
            _ => {}
        }
        i += 2;
    }
    if args.len() != i + 1 {
        return Err(syntax(whole, "`!` takes properties followed by one expression"));
    }
    let body = &args[i];
    match annot {
        None => surface_expr(body, ctx),
        Some(Annotation::Precision(t)) => {
            // A precision annotation always rounds its numerals, which is how
            // operator arguments escape the exact mode of `:operator` bodies.
            let inner = Ctx {
                precision: t,
                mode: Mode::Rounded,
                params: ctx.params,
            };
            Ok(Expr::Annot(
                Annotation::Precision(t),
                Box::new(surface_expr(body, &inner)?),
            ))
        }
        Some(a @ Annotation::Operator(_)) => {
            let inner = Ctx {
                precision: ctx.precision,
                mode: Mode::Exact,
                params: ctx.params,
            };
            Ok(Expr::Annot(a, Box::new(surface_expr(body, &inner)?)))
        }
    }
}

/// Parses `(FPCore (params...) :precision binary64|binary32 body)`. A
/// `:name "..."` property is accepted and dropped.
///
/// The body stays in surface form: real function nodes stand for operators
/// the target will later supply, and numerals are rounded to the program
/// precision.
pub fn parse_program(text: &str) -> Result<Program, IrError> {
    let forms = read_all(text).map_err(|e| IrError::Syntax { pos: e.pos, msg: e.msg })?;
    let [form] = forms.as_slice() else {
        return Err(IrError::Syntax {
            pos: forms.get(1).map(Sexp::pos).unwrap_or_default(),
            msg: format!("expected exactly one FPCore form, found {}", forms.len()),
        });
    };
    let items = form.as_list().ok_or_else(|| syntax(form, "expected `(FPCore ...)`"))?;
    if items.first().and_then(Sexp::as_atom) != Some("FPCore") {
        return Err(syntax(form, "expected `(FPCore ...)`"));
    }
    let params_sexp = items
        .get(1)
        .and_then(Sexp::as_list)
        .ok_or_else(|| syntax(form, "expected a parameter list"))?;
    let mut names: Vec<Symbol> = Vec::new();
    for p in params_sexp {
        let n = p.as_atom().ok_or_else(|| syntax(p, "parameter must be a symbol"))?;
        if parse_numeral(n).is_some() || n.starts_with(':') {
            return Err(syntax(p, "invalid parameter name"));
        }
        let sym = Symbol::new(n);
        if names.contains(&sym) {
            return Err(syntax(p, format!("duplicate parameter `{n}`")));
        }
        names.push(sym);
    }
    let rest = &items[2..];
    let mut precision = None;
    let mut i = 0;
    while i + 1 < rest.len() && rest[i].is_keyword() {
        if rest[i].as_atom() == Some(":precision") {
            let t = rest[i + 1]
                .as_atom()
                .and_then(TypeTag::from_name)
                .filter(|t| t.is_float())
                .ok_or_else(|| syntax(&rest[i + 1], "expected binary64 or binary32"))?;
            precision = Some(t);
        } else if rest[i].as_atom() == Some(":name") {
            if !matches!(rest[i + 1], Sexp::Str(..)) {
                return Err(syntax(&rest[i + 1], "expected a string"));
            }
        } else {
            return Err(syntax(&rest[i], "unsupported property"));
        }
        i += 2;
    }
    let precision = precision.ok_or_else(|| syntax(form, "missing `:precision`"))?;
    if rest.len() != i + 1 {
        return Err(syntax(form, "expected exactly one body expression"));
    }
    let params: Vec<(Symbol, TypeTag)> = names.into_iter().map(|n| (n, precision)).collect();
    let ctx = Ctx {
        precision,
        mode: Mode::Rounded,
        params: &params,
    };
    let body = surface_expr(&rest[i], &ctx)?;
    Ok(Program {
        params,
        body,
        output: precision,
    })
}

/// Converts a real-number expression over `formals` (an operator desugaring).
/// Numerals stay exact; only real functions are allowed.
pub fn parse_real_expr(s: &Sexp, formals: &[Symbol]) -> Result<Expr, IrError> {
    match s {
        Sexp::Str(..) => Err(syntax(s, "unexpected string")),
        Sexp::Atom(a, _) => {
            if let Some(v) = parse_numeral(a) {
                Ok(Expr::Lit(Literal::real(v)))
            } else if formals.iter().any(|f| f.as_str() == a) {
                Ok(Expr::Var(Symbol::new(a)))
            } else {
                Err(IrError::UnboundVariable(a.clone()))
            }
        }
        Sexp::List(items, _) => {
            let Some((head, args)) = items.split_first() else {
                return Err(syntax(s, "empty expression"));
            };
            let name = head
                .as_atom()
                .ok_or_else(|| syntax(head, "operator position must be a symbol"))?;
            let f = RealFn::from_surface(name, args.len()).ok_or_else(|| IrError::UnknownOperator(name.into()))?;
            if f.arity() != args.len() {
                return Err(IrError::Arity {
                    op: name.into(),
                    expected: f.arity(),
                    found: args.len(),
                });
            }
            let args = args
                .iter()
                .map(|a| parse_real_expr(a, formals))
                .collect::<Result<_, _>>()?;
            Ok(Expr::Real(f, args))
        }
    }
}

/// A pattern-language term: like a real expression, but any symbol may head
/// a node (operator names), `?x` atoms are holes and bare atoms that are not
/// holes are variables.
#[derive(Clone, Debug, PartialEq)]
pub enum Template {
    Hole(Symbol),
    Var(Symbol),
    Lit(Literal),
    Real(RealFn, Vec<Template>),
    Op(Symbol, Vec<Template>),
}

/// Reads a pattern term. Numerals are real literals unless wrapped in
/// `(! :precision T n)`.
pub fn parse_expr_with_holes(s: &Sexp) -> Result<Template, IrError> {
    fn go(s: &Sexp, lit_ty: TypeTag) -> Result<Template, IrError> {
        match s {
            Sexp::Str(..) => Err(syntax(s, "unexpected string")),
            Sexp::Atom(a, _) => {
                if let Some(v) = parse_numeral(a) {
                    let value = if lit_ty == TypeTag::Real {
                        v
                    } else {
                        round_rational(&v, lit_ty)
                            .ok_or_else(|| syntax(s, format!("numeral out of range for {lit_ty}")))?
                    };
                    Ok(Template::Lit(Literal { value, ty: lit_ty }))
                } else if let Some(h) = a.strip_prefix('?') {
                    Ok(Template::Hole(Symbol::new(h)))
                } else {
                    Ok(Template::Var(Symbol::new(a)))
                }
            }
            Sexp::List(items, _) => {
                let Some((head, args)) = items.split_first() else {
                    return Err(syntax(s, "empty expression"));
                };
                let name = head
                    .as_atom()
                    .ok_or_else(|| syntax(head, "operator position must be a symbol"))?;
                if name == "!" {
                    if args.len() == 3 && args[0].as_atom() == Some(":precision") {
                        let t = args[1]
                            .as_atom()
                            .and_then(TypeTag::from_name)
                            .ok_or_else(|| syntax(&args[1], "unknown type"))?;
                        return go(&args[2], t);
                    }
                    return Err(syntax(s, "only `(! :precision T e)` is allowed in patterns"));
                }
                let kids = args.iter().map(|a| go(a, lit_ty)).collect::<Result<Vec<_>, _>>()?;
                match RealFn::from_surface(name, args.len()) {
                    Some(f) if f.arity() == args.len() => Ok(Template::Real(f, kids)),
                    Some(f) => Err(IrError::Arity {
                        op: name.into(),
                        expected: f.arity(),
                        found: args.len(),
                    }),
                    None => Ok(Template::Op(Symbol::new(name), kids)),
                }
            }
        }
    }
    go(s, TypeTag::Real)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn numerals() {
        assert_eq!(parse_numeral("1"), Some(q(1, 1)));
        assert_eq!(parse_numeral("-2.5"), Some(q(-5, 2)));
        assert_eq!(parse_numeral("1e-3"), Some(q(1, 1000)));
        assert_eq!(parse_numeral(".5"), Some(q(1, 2)));
        assert_eq!(parse_numeral("3/4"), Some(q(3, 4)));
        assert_eq!(parse_numeral("-3/4"), Some(q(-3, 4)));
        assert_eq!(parse_numeral("1/0"), None);
        assert_eq!(parse_numeral("x"), None);
        assert_eq!(parse_numeral("-"), None);
        assert_eq!(parse_numeral("1.2.3"), None);
    }

    #[test]
    fn reciprocal_program() {
        let p = parse_program("(FPCore (x) :precision binary64 (/ 1 x))").unwrap();
        assert_eq!(p.params, vec![(Symbol::new("x"), TypeTag::B64)]);
        assert_eq!(p.output, TypeTag::B64);
        let one = Expr::Lit(Literal {
            value: q(1, 1),
            ty: TypeTag::B64,
        });
        assert_eq!(p.body, Expr::Real(RealFn::Div, vec![one, Expr::var("x")]));
    }

    #[test]
    fn identity_program() {
        let p = parse_program("(FPCore (x) :precision binary64 x)").unwrap();
        assert_eq!(p.body, Expr::var("x"));
    }

    #[test]
    fn literal_rounded_to_binary32() {
        let p = parse_program("(FPCore (x) :precision binary32 0.1)").unwrap();
        let Expr::Lit(l) = p.body else { panic!() };
        assert_eq!(l.ty, TypeTag::B32);
        assert_eq!(l.value, q(13421773, 134217728));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_program("(FPCore (x) :precision binary64 (atan2 x x))"),
            Err(IrError::UnknownOperator(_))
        ));
        assert!(matches!(
            parse_program("(FPCore (x) :precision binary64 (sqrt x x))"),
            Err(IrError::Arity { .. })
        ));
        assert!(matches!(
            parse_program("(FPCore (x) :precision binary64 (+ x y))"),
            Err(IrError::UnboundVariable(_))
        ));
        assert!(matches!(
            parse_program("(FPCore (x) :precision binary64 (+ x 1)"),
            Err(IrError::Syntax { .. })
        ));
        assert!(matches!(parse_program("(FPCore (x) x)"), Err(IrError::Syntax { .. })));
    }

    #[test]
    fn comments_and_comparisons() {
        let p = parse_program("; leading comment\n(FPCore (a b) :precision binary32 (if (< a b) a (- b)))").unwrap();
        assert!(matches!(p.body, Expr::If(..)));
    }

    #[test]
    fn operator_annotation_keeps_numerals_exact() {
        let p = parse_program("(FPCore (x) :precision binary32 (! :operator rcp.f32 (/ 1 x)))").unwrap();
        let Expr::Annot(Annotation::Operator(o), body) = p.body else {
            panic!()
        };
        assert_eq!(o.as_str(), "rcp.f32");
        assert_eq!(*body, Expr::Real(RealFn::Div, vec![Expr::real_lit(1), Expr::var("x")]));
    }
}
