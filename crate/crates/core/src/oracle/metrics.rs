use std::collections::BTreeMap;

use super::{eval_float, eval_op, eval_real, round, Env, Rounding, Sample};
use crate::ir::{desugar, typecheck, Expr, Path, Program, Symbol, TypeTag};
use crate::par;
use crate::target::TargetDesc;

/// `log2(1 + d)` where `d` is the number of `ty` values between `got` and
/// `want`, clamped to `[0, p]`. A NaN on one side only costs the full `p`.
pub fn bits_of_error(got: f64, want: f64, ty: TypeTag) -> f64 {
    let p = ty.precision().expect("float type") as f64;
    match (got.is_nan(), want.is_nan()) {
        (true, true) => 0.0,
        (true, false) | (false, true) => p,
        _ => {
            let d = round::ordinal(got, ty).abs_diff(round::ordinal(want, ty));
            (d as f64 + 1.0).log2().clamp(0.0, p)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub bits: Vec<f64>,
    pub mean: f64,
    /// Output precision minus mean bits of error.
    pub accuracy: f64,
}

impl ErrorReport {
    fn new(bits: Vec<f64>, ty: TypeTag) -> Self {
        let mean = if bits.is_empty() {
            0.0
        } else {
            bits.iter().sum::<f64>() / bits.len() as f64
        };
        ErrorReport {
            accuracy: ty.precision().expect("float type") as f64 - mean,
            bits,
            mean,
        }
    }
}

/// Error of a resolved program against the sampled exact values.
pub fn error_against(p: &Program, s: &Sample, target: &TargetDesc) -> ErrorReport {
    let idx: Vec<usize> = (0..s.len()).collect();
    let bits = par::map(&idx, |&i| {
        let got = eval_float(&p.body, &s.env(i), target);
        bits_of_error(got, s.truth[i], p.output)
    });
    ErrorReport::new(bits, p.output)
}

/// Error of a resolved program against its own desugaring.
pub fn accuracy(p: &Program, points: &[Vec<f64>], target: &TargetDesc) -> ErrorReport {
    let names: Vec<Symbol> = p.params.iter().map(|(n, _)| n.clone()).collect();
    let real = desugar(&p.body, target);
    let bits = par::map(points, |pt| {
        let env = Env::new(&names, pt);
        let want = eval_real(&real, &env, Rounding::Nearest(p.output)).unwrap_or(f64::NAN);
        bits_of_error(eval_float(&p.body, &env, target), want, p.output)
    });
    ErrorReport::new(bits, p.output)
}

/// Mean error each operator adds on its own: the operator is applied to the
/// correctly rounded values of its arguments and compared with the correctly
/// rounded value of the whole node. Every node is listed; only operator
/// nodes can be nonzero.
pub fn local_error(p: &Program, points: &[Vec<f64>], target: &TargetDesc) -> BTreeMap<Path, f64> {
    let names: Vec<Symbol> = p.params.iter().map(|(n, _)| n.clone()).collect();
    let env_types = p.type_env();
    let nodes = p.body.nodes();
    // Exact value of every float-typed node, rounded to its own type.
    let exact: Vec<Option<(Expr, TypeTag)>> = nodes
        .iter()
        .map(|(_, n)| match typecheck(n, &env_types, target) {
            Ok(t) if t.is_float() => Some((desugar(n, target), t)),
            _ => None,
        })
        .collect();
    let index: BTreeMap<&Path, usize> = nodes.iter().enumerate().map(|(i, (path, _))| (path, i)).collect();

    let per_point: Vec<Vec<f64>> = par::map(points, |pt| {
        let env = Env::new(&names, pt);
        let vals: Vec<f64> = exact
            .iter()
            .map(|x| match x {
                Some((real, t)) => eval_real(real, &env, Rounding::Nearest(*t)).unwrap_or(f64::NAN),
                None => f64::NAN,
            })
            .collect();
        nodes
            .iter()
            .enumerate()
            .map(|(i, (path, n))| {
                let Expr::Op(o, args) = n else { return 0.0 };
                let Some(op) = target.op(o) else { return 0.0 };
                let arg_vals: Vec<f64> = (0..args.len())
                    .map(|k| {
                        let mut child = path.clone();
                        child.push(k);
                        vals[index[&child]]
                    })
                    .collect();
                bits_of_error(eval_op(op, &arg_vals), vals[i], op.ret)
            })
            .collect()
    });

    let n = points.len().max(1) as f64;
    nodes
        .iter()
        .enumerate()
        .map(|(i, (path, _))| {
            let total: f64 = per_point.iter().map(|row| row[i]).sum();
            (path.clone(), total / n)
        })
        .collect()
}
