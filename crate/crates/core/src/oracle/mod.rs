//! Correctly rounded evaluation of real expressions, emulation of float
//! programs on a target, input sampling and error metrics.

mod interval;
mod metrics;
pub mod round;
mod sample;

use rug::Float;
use thiserror::Error;

use crate::ir::{CmpOp, Expr, RealFn, Symbol, TypeTag};
use crate::target::{Impl, OperatorDef, TargetDesc};
use interval::Fail;

pub use metrics::{accuracy, bits_of_error, error_against, local_error, ErrorReport};
pub use sample::{sample, split, Sample, MAX_DRAWS};

/// Working precisions tried in order until the enclosure rounds to a single
/// float.
pub const PRECISION_LADDER: [u32; 8] = [80, 160, 320, 640, 1280, 2560, 5120, 10240];

#[derive(Debug, Clone, Error, PartialEq)]
pub enum OracleError {
    #[error("sampling exhausted: only {accepted} of {draws} sampled inputs lie in the domain of the program")]
    SamplingExhausted { accepted: usize, draws: usize },
    #[error(transparent)]
    Ir(#[from] crate::ir::IrError),
}

/// Values of the free variables at one point. Binary32 values are stored
/// exactly in `f64`.
#[derive(Clone, Copy, Debug)]
pub struct Env<'a> {
    pub names: &'a [Symbol],
    pub values: &'a [f64],
}

impl<'a> Env<'a> {
    pub fn new(names: &'a [Symbol], values: &'a [f64]) -> Self {
        debug_assert_eq!(names.len(), values.len());
        Env { names, values }
    }

    pub fn get(&self, v: &Symbol) -> Option<f64> {
        self.names.iter().position(|n| n == v).map(|i| self.values[i])
    }
}

/// How the exact value is rounded into the output.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rounding {
    /// Nearest value of the type.
    Nearest(TypeTag),
    /// Nearest value with `bits` significand bits and unbounded exponent,
    /// then nearest value of the type.
    At { bits: u32, ty: TypeTag },
}

impl Rounding {
    pub fn of(imp: Impl, ty: TypeTag) -> Rounding {
        match imp {
            Impl::CorrectlyRounded => Rounding::Nearest(ty),
            Impl::RoundedAt(bits) => Rounding::At { bits, ty },
        }
    }

    fn apply(self, x: &Float) -> f64 {
        match self {
            Rounding::Nearest(ty) => round::round_to_type(x, ty),
            Rounding::At { bits, ty } => round::round_to_type(&round::round_to_bits(x, bits), ty),
        }
    }
}

fn same(a: f64, b: f64) -> bool {
    a == b || (a.is_nan() && b.is_nan())
}

/// The value of a real expression rounded as requested, or `None` when it is
/// undefined (outside the domain, at a pole) or could not be pinned down
/// within [`PRECISION_LADDER`].
pub fn eval_real(e: &Expr, env: &Env, rounding: Rounding) -> Option<f64> {
    eval_real_capped(e, env, rounding, *PRECISION_LADDER.last().expect("nonempty"))
}

/// [`eval_real`] with the ladder cut off at `cap` bits.
pub fn eval_real_capped(e: &Expr, env: &Env, rounding: Rounding, cap: u32) -> Option<f64> {
    for &p in PRECISION_LADDER.iter().take_while(|p| **p <= cap) {
        match interval::eval(e, env, p) {
            Ok(iv) => {
                let lo = rounding.apply(&iv.lo);
                let hi = rounding.apply(&iv.hi);
                if same(lo, hi) && !lo.is_nan() {
                    // Signed zeros compare equal; report +0 unless the whole
                    // enclosure is negative.
                    if lo == 0.0 {
                        return Some(if lo.is_sign_negative() && hi.is_sign_negative() {
                            -0.0
                        } else {
                            0.0
                        });
                    }
                    return Some(lo);
                }
            }
            Err(Fail::Invalid) => return None,
            Err(Fail::Unsure) => {}
        }
    }
    None
}

/// The value of a real expression rounded to nearest with `bits`
/// significand bits and unbounded exponent.
pub fn eval_real_bits(e: &Expr, env: &Env, bits: u32) -> Option<Float> {
    for &p in PRECISION_LADDER.iter().filter(|p| **p > bits) {
        match interval::eval(e, env, p) {
            Ok(iv) => {
                let lo = round::round_to_bits(&iv.lo, bits);
                let hi = round::round_to_bits(&iv.hi, bits);
                if lo == hi {
                    return Some(lo);
                }
            }
            Err(Fail::Invalid) => return None,
            Err(Fail::Unsure) => {}
        }
    }
    None
}

/// Hardware arithmetic for the operators whose correctly rounded result the
/// host computes natively. Same values as the general path, much faster.
fn native(op: &OperatorDef, args: &[f64]) -> Option<f64> {
    if op.imp != Impl::CorrectlyRounded {
        return None;
    }
    if op.is_cast() {
        return Some(round::round_f64(args[0], op.ret));
    }
    let f = op.direct_fn()?;
    macro_rules! kernel {
        ($t:ty) => {{
            let a: Vec<$t> = args.iter().map(|x| *x as $t).collect();
            let r: $t = match (f, a.as_slice()) {
                (RealFn::Add, [x, y]) => x + y,
                (RealFn::Sub, [x, y]) => x - y,
                (RealFn::Mul, [x, y]) => x * y,
                (RealFn::Div, [_, y]) if *y == 0.0 => <$t>::NAN,
                (RealFn::Div, [x, y]) => x / y,
                (RealFn::Neg, [x]) => -x,
                (RealFn::Fabs, [x]) => x.abs(),
                (RealFn::Sqrt, [x]) => x.sqrt(),
                (RealFn::Fma, [x, y, z]) => x.mul_add(*y, *z),
                _ => return None,
            };
            Some(r as f64)
        }};
    }
    match op.ret {
        TypeTag::B64 => kernel!(f64),
        TypeTag::B32 => kernel!(f32),
        _ => None,
    }
}

/// Result of one operator on float arguments. Errors, and any non-finite
/// argument, give NaN.
pub fn eval_op(op: &OperatorDef, args: &[f64]) -> f64 {
    if args.iter().any(|a| !a.is_finite()) {
        return f64::NAN;
    }
    if let Some(r) = native(op, args) {
        return r;
    }
    let formals = op.formals();
    let env = Env::new(&formals, args);
    eval_real(&op.approx, &env, Rounding::of(op.imp, op.ret)).unwrap_or(f64::NAN)
}

/// Runs a resolved program on a target, operator by operator.
pub fn eval_float(e: &Expr, env: &Env, target: &TargetDesc) -> f64 {
    match e {
        Expr::Var(v) => env.get(v).unwrap_or(f64::NAN),
        Expr::Lit(l) => l.value.to_f64(),
        Expr::Op(o, args) => {
            let Some(op) = target.op(o) else {
                return f64::NAN;
            };
            let vals: Vec<f64> = args.iter().map(|a| eval_float(a, env, target)).collect();
            eval_op(op, &vals)
        }
        Expr::If(c, t, f) => {
            if eval_cmp(c, env, target) {
                eval_float(t, env, target)
            } else {
                eval_float(f, env, target)
            }
        }
        Expr::Annot(_, inner) => eval_float(inner, env, target),
        Expr::Real(..) | Expr::Cmp(..) => f64::NAN,
    }
}

/// IEEE comparison: every relation with a NaN operand is false except `!=`.
fn eval_cmp(e: &Expr, env: &Env, target: &TargetDesc) -> bool {
    let Expr::Cmp(op, a, b) = e else {
        return false;
    };
    let a = eval_float(a, env, target);
    let b = eval_float(b, env, target);
    match a.partial_cmp(&b) {
        Some(ord) => op.holds(ord),
        None => *op == CmpOp::Ne,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse_real_expr;
    use crate::ir::sexpr::read_all;
    use crate::target::load_target_str;

    fn real(src: &str) -> Expr {
        let s = read_all(src).unwrap();
        parse_real_expr(&s[0], &[Symbol::new("x"), Symbol::new("y")]).unwrap()
    }

    fn at(x: f64) -> [f64; 2] {
        [x, 0.0]
    }

    fn names() -> [Symbol; 2] {
        [Symbol::new("x"), Symbol::new("y")]
    }

    fn ev(src: &str, x: f64, ty: TypeTag) -> Option<f64> {
        let n = names();
        let v = at(x);
        eval_real(&real(src), &Env::new(&n, &v), Rounding::Nearest(ty))
    }

    #[test]
    fn identity_and_poles() {
        assert_eq!(ev("x", 1.5, TypeTag::B64), Some(1.5));
        assert_eq!(ev("(/ 1 x)", 0.0, TypeTag::B64), None);
        assert_eq!(ev("(log x)", -1.0, TypeTag::B64), None);
        assert_eq!(ev("(sqrt x)", -1.0, TypeTag::B64), None);
        assert_eq!(ev("(/ 1 3)", 0.0, TypeTag::B64), Some(1.0 / 3.0));
        assert_eq!(ev("(/ 1 3)", 0.0, TypeTag::B32), Some((1.0f32 / 3.0) as f64));
    }

    #[test]
    fn cancellation_is_resolved() {
        // (1 + x) - 1 with x tiny is exactly x in the reals.
        let x = 2f64.powi(-80);
        assert_eq!(ev("(- (+ 1 x) 1)", x, TypeTag::B64), Some(x));
        assert_eq!(ev("(- x x)", 0.3, TypeTag::B64), Some(0.0));
    }

    #[test]
    fn overflow_rounds_to_infinity() {
        assert_eq!(ev("(* x x)", 1e200, TypeTag::B64), Some(f64::INFINITY));
        assert_eq!(ev("(exp x)", 100.0, TypeTag::B32), Some(f64::INFINITY));
    }

    #[test]
    fn trig_near_multiples_of_pi() {
        let pi = std::f64::consts::PI;
        // sin of the double nearest pi is about 1.2246e-16.
        assert_eq!(ev("(sin x)", pi, TypeTag::B64), Some(1.2246467991473532e-16));
        assert_eq!(ev("(cos x)", 0.0, TypeTag::B64), Some(1.0));
        assert_eq!(ev("(sin (* 2 x))", 1e22, TypeTag::B64).map(f64::is_finite), Some(true));
    }

    #[test]
    fn powers() {
        assert_eq!(ev("(pow x 2)", -3.0, TypeTag::B64), Some(9.0));
        assert_eq!(ev("(pow x 3)", -2.0, TypeTag::B64), Some(-8.0));
        assert_eq!(ev("(pow x 1/2)", -2.0, TypeTag::B64), None);
        assert_eq!(ev("(pow x 0)", 0.0, TypeTag::B64), Some(1.0));
        assert_eq!(ev("(pow x -1)", 0.0, TypeTag::B64), None);
    }

    #[test]
    fn two_stage_rounding() {
        let n = names();
        let v = at(3.0);
        let got = eval_real(
            &real("(/ 1 x)"),
            &Env::new(&n, &v),
            Rounding::At {
                bits: 12,
                ty: TypeTag::B32,
            },
        )
        .unwrap();
        // 1/3 lies in [1/4, 1/2), so 12 bits means a quantum of 2^-13.
        assert_eq!(got, 2731.0 / 8192.0);
    }

    const T: &str = r#"
        (define-operator (+f64 [x binary64] [y binary64]) binary64 #:approx (+ x y))
        (define-operator (sqrtf64 [x binary64]) binary64 #:approx (sqrt x))
        (define-operator (/f32 [x binary32] [y binary32]) binary32 #:approx (/ x y))
        (define-operator (rcp.f32 [x binary32]) binary32 #:approx (/ 1 x)
          #:impl (rounded-at 12))
        (define-operator (expf64 [x binary64]) binary64 #:approx (exp x))
        (define-target t #:operators (+f64 sqrtf64 /f32 rcp.f32 expf64))
    "#;

    #[test]
    fn operators() {
        let t = load_target_str(T, None).unwrap();
        let op = |n: &str| t.op(&Symbol::new(n)).unwrap().clone();
        assert_eq!(eval_op(&op("+f64"), &[1.0, 2.0]), 3.0);
        assert!(eval_op(&op("sqrtf64"), &[-1.0]).is_nan());
        assert!(eval_op(&op("/f32"), &[1.0, 0.0]).is_nan());
        assert_eq!(eval_op(&op("/f32"), &[1.0, 3.0]), (1.0f32 / 3.0) as f64);
        assert_eq!(eval_op(&op("rcp.f32"), &[3.0]), 2731.0 / 8192.0);
        assert_eq!(eval_op(&op("expf64"), &[1.0]), std::f64::consts::E);
        assert!(eval_op(&op("+f64"), &[f64::INFINITY, 1.0]).is_nan());
    }

    #[test]
    fn native_kernels_agree_with_the_general_path() {
        let t = load_target_str(T, None).unwrap();
        let pts = [
            (0.1, 0.2),
            (1e308, 1e308),
            (3.0, 7.0),
            (-2.5e-310, 1e-300),
            (16777217.0, 1.0),
        ];
        for name in ["+f64", "/f32", "sqrtf64"] {
            let op = t.op(&Symbol::new(name)).unwrap();
            for (a, b) in pts {
                let args: Vec<f64> = op
                    .params
                    .iter()
                    .zip([a, b])
                    .map(|((_, ty), v)| round::round_f64(v, *ty))
                    .collect();
                let formals = op.formals();
                let general =
                    eval_real(&op.approx, &Env::new(&formals, &args), Rounding::Nearest(op.ret)).unwrap_or(f64::NAN);
                let fast = eval_op(op, &args);
                assert!(same(fast, general), "{name}({args:?}): {fast} vs {general}");
            }
        }
    }
}
