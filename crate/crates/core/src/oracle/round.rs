//! Rounding into the supported float formats and the ordinal encoding of
//! floats used by the error metric and the sampler.

use std::cmp::Ordering;

use rug::float::Round;
use rug::{Float, Rational};

use crate::ir::TypeTag;

/// MPFR-convention exponent limits of a format: values are `m * 2^e` with
/// `m` in `[0.5, 1)`.
#[derive(Clone, Copy, Debug)]
struct Format {
    prec: u32,
    normal_exp_min: i32,
    emax: i32,
}

fn format(ty: TypeTag) -> Format {
    match ty {
        TypeTag::B64 => Format {
            prec: 53,
            normal_exp_min: -1021,
            emax: 1024,
        },
        TypeTag::B32 => Format {
            prec: 24,
            normal_exp_min: -125,
            emax: 128,
        },
        other => panic!("{other} is not a float type"),
    }
}

/// Rounds a value already rounded to the format's precision (`ord` says how
/// it compares with the exact value) into the subnormal range.
fn gradual_underflow(mut y: Float, ord: Ordering, fmt: Format) -> Float {
    let sub_exp_min = fmt.normal_exp_min - (fmt.prec as i32 - 1);
    match y.get_exp() {
        // Below half the smallest subnormal, or exactly half: zero (ties to
        // even). Just above half: the smallest subnormal.
        Some(e) if e < sub_exp_min => {
            let neg = y.is_sign_negative();
            let up = e == sub_exp_min - 1 && {
                let half = Float::with_val(fmt.prec, Float::i_exp(1, e - 1));
                let beyond = if neg { Ordering::Greater } else { Ordering::Less };
                *y.as_abs() != half || ord == beyond
            };
            let mut out = if up {
                Float::with_val(fmt.prec, Float::i_exp(1, sub_exp_min - 1))
            } else {
                Float::new(fmt.prec)
            };
            if neg {
                out = -out;
            }
            out
        }
        _ => {
            y.subnormalize_round(fmt.normal_exp_min, ord, Round::Nearest);
            y
        }
    }
}

/// Rounds `x` to the nearest `ty` value (ties to even), with gradual
/// underflow and overflow to infinity. The result is returned as an `f64`,
/// which holds every binary32 value exactly.
pub fn round_to_type(x: &Float, ty: TypeTag) -> f64 {
    let fmt = format(ty);
    let (y, ord) = Float::with_val_round(fmt.prec, x, Round::Nearest);
    let y = gradual_underflow(y, ord, fmt);
    match y.get_exp() {
        Some(e) if e > fmt.emax => {
            if y.is_sign_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        }
        _ => y.to_f64(),
    }
}

/// Rounds `x` to `q` significand bits with an unbounded exponent.
pub fn round_to_bits(x: &Float, q: u32) -> Float {
    Float::with_val_round(q, x, Round::Nearest).0
}

/// Rounds an exact rational into `ty`. `None` when `ty` is not a float type
/// or the value overflows.
pub fn round_rational(v: &Rational, ty: TypeTag) -> Option<Rational> {
    if !ty.is_float() {
        return None;
    }
    let fmt = format(ty);
    let (y, ord) = Float::with_val_round(fmt.prec, v, Round::Nearest);
    let y = gradual_underflow(y, ord, fmt);
    if matches!(y.get_exp(), Some(e) if e > fmt.emax) {
        return None;
    }
    y.to_rational()
}

/// Whether `v` is exactly representable in `ty`.
pub fn representable(v: &Rational, ty: TypeTag) -> bool {
    round_rational(v, ty).as_ref() == Some(v)
}

/// Rounds an `f64` holding any value into `ty`.
pub fn round_f64(x: f64, ty: TypeTag) -> f64 {
    match ty {
        TypeTag::B32 => x as f32 as f64,
        _ => x,
    }
}

/// Monotone map from floats of `ty` to integers: `+0` and `-0` share ordinal
/// 0 and adjacent floats differ by one. Infinities sit just past the largest
/// finite values.
pub fn ordinal(x: f64, ty: TypeTag) -> i64 {
    match ty {
        TypeTag::B32 => {
            let b = (x as f32).to_bits();
            let mag = (b & 0x7fff_ffff) as i64;
            if b >> 31 == 1 {
                -mag
            } else {
                mag
            }
        }
        _ => {
            let b = x.to_bits();
            let mag = (b & 0x7fff_ffff_ffff_ffff) as i64;
            if b >> 63 == 1 {
                -mag
            } else {
                mag
            }
        }
    }
}

/// Inverse of [`ordinal`].
pub fn from_ordinal(o: i64, ty: TypeTag) -> f64 {
    let neg = o < 0;
    let mag = o.unsigned_abs();
    match ty {
        TypeTag::B32 => {
            let b = mag as u32 | if neg { 1 << 31 } else { 0 };
            f32::from_bits(b) as f64
        }
        _ => f64::from_bits(mag | if neg { 1 << 63 } else { 0 }),
    }
}

/// Ordinal of the largest finite value of `ty`.
pub fn max_finite_ordinal(ty: TypeTag) -> i64 {
    match ty {
        TypeTag::B32 => ordinal(f32::MAX as f64, ty),
        _ => ordinal(f64::MAX, ty),
    }
}

/// Exact rational image of a finite float.
pub fn to_rational(x: f64) -> Option<Rational> {
    Rational::from_f64(x)
}
