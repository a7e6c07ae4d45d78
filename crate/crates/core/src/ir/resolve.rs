use std::collections::BTreeMap;

use super::{Annotation, Expr, IrError, Literal, Program, Symbol, TypeTag};
use crate::target::TargetDesc;

/// Types of free variables.
pub type TypeEnv = BTreeMap<Symbol, TypeTag>;

fn mismatch(node: &Expr, expected: TypeTag, found: TypeTag) -> IrError {
    IrError::TypeMismatch {
        node: node.to_string(),
        expected,
        found,
    }
}

/// Computes the type of `e`. Operator arguments must match the operator's
/// signature exactly and real functions take real arguments.
pub fn typecheck(e: &Expr, env: &TypeEnv, target: &TargetDesc) -> Result<TypeTag, IrError> {
    match e {
        Expr::Var(v) => env
            .get(v)
            .copied()
            .ok_or_else(|| IrError::UnboundVariable(v.to_string())),
        Expr::Lit(l) => Ok(l.ty),
        Expr::Real(f, args) => {
            if args.len() != f.arity() {
                return Err(IrError::Arity {
                    op: f.name().into(),
                    expected: f.arity(),
                    found: args.len(),
                });
            }
            for a in args {
                let t = typecheck(a, env, target)?;
                if t != TypeTag::Real {
                    return Err(mismatch(e, TypeTag::Real, t));
                }
            }
            Ok(TypeTag::Real)
        }
        Expr::Op(o, args) => {
            let op = target.op(o).ok_or_else(|| IrError::UnknownOperator(o.to_string()))?;
            if args.len() != op.params.len() {
                return Err(IrError::Arity {
                    op: o.to_string(),
                    expected: op.params.len(),
                    found: args.len(),
                });
            }
            for (a, (_, want)) in args.iter().zip(&op.params) {
                let t = typecheck(a, env, target)?;
                if t != *want {
                    return Err(mismatch(e, *want, t));
                }
            }
            Ok(op.ret)
        }
        Expr::If(c, t, f) => {
            let ct = typecheck(c, env, target)?;
            if ct != TypeTag::Bool {
                return Err(mismatch(e, TypeTag::Bool, ct));
            }
            let tt = typecheck(t, env, target)?;
            let ft = typecheck(f, env, target)?;
            if tt != ft {
                return Err(mismatch(e, tt, ft));
            }
            Ok(tt)
        }
        Expr::Cmp(_, a, b) => {
            let at = typecheck(a, env, target)?;
            let bt = typecheck(b, env, target)?;
            if at != bt {
                return Err(mismatch(e, at, bt));
            }
            if at == TypeTag::Bool {
                return Err(mismatch(e, TypeTag::Real, at));
            }
            Ok(TypeTag::Bool)
        }
        Expr::Annot(..) => Err(IrError::Unresolved(e.to_string())),
    }
}

/// Matches an operator desugaring (over `formals`) against an expression,
/// binding each formal to the subexpression in its place.
fn match_template(tmpl: &Expr, e: &Expr, formals: &[Symbol], binds: &mut BTreeMap<Symbol, Expr>) -> bool {
    match tmpl {
        Expr::Var(v) if formals.contains(v) => match binds.get(v) {
            Some(b) => b == e,
            None => {
                binds.insert(v.clone(), e.clone());
                true
            }
        },
        Expr::Real(f, targs) => match e {
            Expr::Real(g, eargs) if f == g && targs.len() == eargs.len() => targs
                .iter()
                .zip(eargs)
                .all(|(t, a)| match_template(t, a, formals, binds)),
            _ => false,
        },
        other => other == e,
    }
}

fn resolve_expr(e: &Expr, ty: TypeTag, target: &TargetDesc) -> Result<Expr, IrError> {
    match e {
        Expr::Var(_) => Ok(e.clone()),
        Expr::Lit(l) if l.ty.is_float() => Ok(e.clone()),
        Expr::Lit(_) => Err(IrError::Unresolved(e.to_string())),
        Expr::Real(f, args) => {
            let op = target.resolve_surface(*f, ty)?;
            if op.params.len() != args.len() {
                return Err(IrError::Arity {
                    op: op.name.to_string(),
                    expected: op.params.len(),
                    found: args.len(),
                });
            }
            let args = args
                .iter()
                .zip(&op.params)
                .map(|(a, (_, t))| resolve_expr(a, *t, target))
                .collect::<Result<_, _>>()?;
            Ok(Expr::Op(op.name.clone(), args))
        }
        Expr::Op(o, args) => {
            let op = target.op(o).ok_or_else(|| IrError::UnknownOperator(o.to_string()))?;
            if op.params.len() != args.len() {
                return Err(IrError::Arity {
                    op: o.to_string(),
                    expected: op.params.len(),
                    found: args.len(),
                });
            }
            let args = args
                .iter()
                .zip(&op.params)
                .map(|(a, (_, t))| resolve_expr(a, *t, target))
                .collect::<Result<_, _>>()?;
            Ok(Expr::Op(o.clone(), args))
        }
        Expr::If(c, t, f) => Ok(Expr::If(
            Box::new(resolve_expr(c, ty, target)?),
            Box::new(resolve_expr(t, ty, target)?),
            Box::new(resolve_expr(f, ty, target)?),
        )),
        Expr::Cmp(op, a, b) => Ok(Expr::Cmp(
            *op,
            Box::new(resolve_expr(a, ty, target)?),
            Box::new(resolve_expr(b, ty, target)?),
        )),
        Expr::Annot(Annotation::Precision(t), inner) => resolve_expr(inner, *t, target),
        Expr::Annot(Annotation::Operator(name), body) => {
            let op = target
                .op(name)
                .ok_or_else(|| IrError::UnknownOperator(name.to_string()))?;
            let formals = op.formals();
            let mut binds = BTreeMap::new();
            if !match_template(&op.approx, body, &formals, &mut binds) {
                return Err(IrError::AnnotationMismatch(name.to_string()));
            }
            let args = op
                .params
                .iter()
                .map(|(f, t)| resolve_expr(&binds[f], *t, target))
                .collect::<Result<_, _>>()?;
            Ok(Expr::Op(name.clone(), args))
        }
    }
}

/// Maps surface functions onto the target's operators at the precision in
/// effect, removes annotations and type-checks the result.
pub fn resolve(p: &Program, target: &TargetDesc) -> Result<Program, IrError> {
    let body = resolve_expr(&p.body, p.output, target)?;
    let out = p.with_body(body);
    let t = typecheck(&out.body, &out.type_env(), target)?;
    if t != out.output {
        return Err(mismatch(&out.body, out.output, t));
    }
    Ok(out)
}

/// The real expression a program denotes: every operator is replaced by its
/// desugaring and typed literals become real literals of the same value.
pub fn desugar(e: &Expr, target: &TargetDesc) -> Expr {
    match e {
        Expr::Var(_) => e.clone(),
        Expr::Lit(l) => Expr::Lit(Literal::real(l.value.clone())),
        Expr::Real(f, args) => Expr::Real(*f, args.iter().map(|a| desugar(a, target)).collect()),
        Expr::Op(o, args) => {
            let args: Vec<Expr> = args.iter().map(|a| desugar(a, target)).collect();
            match target.op(o) {
                Some(op) => {
                    let binds: Vec<(Symbol, Expr)> = op.formals().into_iter().zip(args).collect();
                    op.approx.substitute(&binds)
                }
                None => Expr::Op(o.clone(), args),
            }
        }
        Expr::If(c, t, f) => Expr::If(
            Box::new(desugar(c, target)),
            Box::new(desugar(t, target)),
            Box::new(desugar(f, target)),
        ),
        Expr::Cmp(op, a, b) => Expr::Cmp(*op, Box::new(desugar(a, target)), Box::new(desugar(b, target))),
        Expr::Annot(_, inner) => desugar(inner, target),
    }
}
