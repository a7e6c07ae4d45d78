use std::collections::BTreeMap;

use rug::Rational;

use super::{Annotation, Expr, Literal, Program, RealFn, Symbol, TypeTag};
use crate::target::TargetDesc;

/// Exact text for a rational: `3`, `-1/3`.
pub fn format_numeral(v: &Rational) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

/// Shortest decimal that reads back as the same float, in plain notation
/// for moderate magnitudes and exponent notation otherwise.
fn shortest(sci: String, plain: impl FnOnce() -> String) -> String {
    let exp: i32 = sci.rsplit_once('e').and_then(|(_, e)| e.parse().ok()).unwrap_or(0);
    if (-5..17).contains(&exp) {
        plain()
    } else {
        sci
    }
}

/// Text for a literal: floats print as their shortest round-tripping
/// decimal, real literals exactly.
pub fn format_literal(l: &Literal) -> String {
    match l.ty {
        TypeTag::B64 => {
            let x = l.value.to_f64();
            shortest(format!("{x:e}"), || format!("{x}"))
        }
        TypeTag::B32 => {
            let x = l.value.to_f64() as f32;
            shortest(format!("{x:e}"), || format!("{x}"))
        }
        _ => format_numeral(&l.value),
    }
}

fn surface_name(f: RealFn) -> &'static str {
    if f == RealFn::Neg {
        "-"
    } else {
        f.name()
    }
}

struct Printer<'a> {
    target: &'a TargetDesc,
    env: BTreeMap<Symbol, TypeTag>,
}

impl Printer<'_> {
    /// Type of a resolved node, used to decide where precision annotations
    /// are needed.
    fn ty(&self, e: &Expr) -> Option<TypeTag> {
        match e {
            Expr::Var(v) => self.env.get(v).copied(),
            Expr::Lit(l) => Some(l.ty),
            Expr::Op(o, _) => self.target.op(o).map(|op| op.ret),
            Expr::If(_, t, _) => self.ty(t),
            Expr::Cmp(..) => Some(TypeTag::Bool),
            Expr::Real(..) => Some(TypeTag::Real),
            Expr::Annot(_, e) => self.ty(e),
        }
    }

    /// Prints `e` where the reader rounds numerals and resolves surface
    /// functions at `prec`.
    fn expr(&self, e: &Expr, prec: TypeTag, out: &mut String) {
        match e {
            Expr::Var(v) => out.push_str(v.as_str()),
            Expr::Lit(l) => {
                if l.ty.is_float() && l.ty != prec {
                    out.push_str(&format!("(! :precision {} {})", l.ty, format_literal(l)));
                } else {
                    out.push_str(&format_literal(l));
                }
            }
            Expr::Real(f, args) => {
                out.push('(');
                out.push_str(surface_name(*f));
                for a in args {
                    out.push(' ');
                    self.expr(a, prec, out);
                }
                out.push(')');
            }
            Expr::Op(o, args) => {
                let Some(op) = self.target.op(o) else {
                    // Not part of the target; print it as a call so that the
                    // problem is visible.
                    out.push('(');
                    out.push_str(o.as_str());
                    for a in args {
                        out.push(' ');
                        self.expr(a, prec, out);
                    }
                    out.push(')');
                    return;
                };
                match self.target.surface_of(op) {
                    Some(f) => {
                        let wrap = op.ret != prec;
                        if wrap {
                            out.push_str(&format!("(! :precision {} ", op.ret));
                        }
                        out.push('(');
                        out.push_str(surface_name(f));
                        for a in args {
                            out.push(' ');
                            self.expr(a, op.ret, out);
                        }
                        out.push(')');
                        if wrap {
                            out.push(')');
                        }
                    }
                    None => {
                        let mut binds = BTreeMap::new();
                        for (a, (formal, t)) in args.iter().zip(&op.params) {
                            let mut s = String::new();
                            if matches!(a, Expr::Var(_)) {
                                self.expr(a, *t, &mut s);
                            } else {
                                s.push_str(&format!("(! :precision {t} "));
                                self.expr(a, *t, &mut s);
                                s.push(')');
                            }
                            binds.insert(formal.clone(), s);
                        }
                        out.push_str(&format!("(! :operator {} ", op.name));
                        template(&op.approx, &binds, out);
                        out.push(')');
                    }
                }
            }
            Expr::If(c, t, f) => {
                out.push_str("(if ");
                self.expr(c, prec, out);
                out.push(' ');
                self.expr(t, prec, out);
                out.push(' ');
                self.expr(f, prec, out);
                out.push(')');
            }
            Expr::Cmp(op, a, b) => {
                // Operands share a type; print them in it so literals on
                // both sides round alike.
                let t = self.ty(a).filter(|t| t.is_float()).unwrap_or(prec);
                let wrap = t != prec;
                if wrap {
                    out.push_str(&format!("(! :precision {t} "));
                }
                out.push_str(&format!("({} ", op.name()));
                self.expr(a, t, out);
                out.push(' ');
                self.expr(b, t, out);
                out.push(')');
                if wrap {
                    out.push(')');
                }
            }
            Expr::Annot(Annotation::Precision(t), inner) => {
                out.push_str(&format!("(! :precision {t} "));
                self.expr(inner, *t, out);
                out.push(')');
            }
            Expr::Annot(Annotation::Operator(o), inner) => {
                out.push_str(&format!("(! :operator {o} "));
                self.expr(inner, prec, out);
                out.push(')');
            }
        }
    }
}

fn template(e: &Expr, binds: &BTreeMap<Symbol, String>, out: &mut String) {
    match e {
        Expr::Var(v) => match binds.get(v) {
            Some(s) => out.push_str(s),
            None => out.push_str(v.as_str()),
        },
        Expr::Lit(l) => out.push_str(&format_numeral(&l.value)),
        Expr::Real(f, args) => {
            out.push('(');
            out.push_str(surface_name(*f));
            for a in args {
                out.push(' ');
                template(a, binds, out);
            }
            out.push(')');
        }
        other => out.push_str(&other.to_string()),
    }
}

/// Prints a program as FPCore. Operators print as the surface function they
/// implement when that is how they would be resolved again; other operators
/// print as an `(! :operator NAME ...)` annotation around their desugaring,
/// so the text keeps its real-number meaning for any FPCore reader.
pub fn format_fpcore(p: &Program, target: &TargetDesc) -> String {
    let printer = Printer {
        target,
        env: p.type_env(),
    };
    let mut out = String::from("(FPCore (");
    let names: Vec<&str> = p.params.iter().map(|(n, _)| n.as_str()).collect();
    out.push_str(&names.join(" "));
    out.push_str(&format!(") :precision {} ", p.output));
    printer.expr(&p.body, p.output, &mut out);
    out.push(')');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{parse_program, resolve};
    use crate::target::load_target_str;

    const T: &str = r#"
        (define-operator (rcp.f32 [x binary32]) binary32 #:approx (/ 1 x) #:cost 4)
        (define-operator (/f32 [x binary32] [y binary32]) binary32 #:approx (/ x y))
        (define-operator (*f64 [x binary64] [y binary64]) binary64 #:approx (* x y))
        (define-operator (+f64 [x binary64] [y binary64]) binary64 #:approx (+ x y))
        (define-operator (f32->f64 [x binary32]) binary64 #:approx x)
        (define-operator (log1pmd [x binary64]) binary64
          #:approx (- (log (+ 1 x)) (log (- 1 x))))
        (define-target t #:operators (rcp.f32 /f32 *f64 +f64 f32->f64 log1pmd))
    "#;

    fn round_trip(src: &str) -> (String, Program) {
        let t = load_target_str(T, None).unwrap();
        let p = resolve(&parse_program(src).unwrap(), &t).unwrap();
        let text = format_fpcore(&p, &t);
        let back = resolve(&parse_program(&text).unwrap(), &t).unwrap();
        assert_eq!(back, p, "{text}");
        (text, p)
    }

    #[test]
    fn identity() {
        let (text, _) = round_trip("(FPCore (x) :precision binary64 x)");
        assert_eq!(text, "(FPCore (x) :precision binary64 x)");
    }

    #[test]
    fn binary32_division() {
        let (text, _) = round_trip("(FPCore (x) :precision binary32 (/ 1 x))");
        assert_eq!(text, "(FPCore (x) :precision binary32 (/ 1 x))");
    }

    #[test]
    fn target_only_operator() {
        let (text, _) = round_trip(
            "(FPCore (x) :precision binary64 (* 0.5 (! :operator log1pmd (- (log (+ 1 (! :precision binary64 (+ x 1)))) (log (- 1 (! :precision binary64 (+ x 1))))))))",
        );
        assert!(text.contains("(! :operator log1pmd"), "{text}");
        assert!(text.starts_with("(FPCore (x) :precision binary64 (* 0.5 "));
    }

    #[test]
    fn mixed_precision() {
        let (text, _) = round_trip(
            "(FPCore (x) :precision binary64 (+ x (! :operator f32->f64 (! :precision binary32 (/ 0.1 0.3)))))",
        );
        assert!(text.contains(":precision binary32"), "{text}");
    }

    #[test]
    fn literal_text() {
        let lit = |v: f64, ty| Literal {
            value: Rational::from_f64(v).unwrap(),
            ty,
        };
        assert_eq!(format_literal(&lit(0.5, TypeTag::B64)), "0.5");
        assert_eq!(format_literal(&lit(1e-300, TypeTag::B64)), "1e-300");
        assert_eq!(format_literal(&lit(0.1f32 as f64, TypeTag::B32)), "0.1");
        assert_eq!(format_literal(&lit(-2.0, TypeTag::B64)), "-2");
        assert_eq!(format_numeral(&Rational::from((-1, 3))), "-1/3");
    }
}
