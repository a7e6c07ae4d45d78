//! Bits of error computed from the hardware bit patterns.

use fplower::ir::TypeTag;

/// Position on a line where adjacent values of the type are one apart and
/// both zeros sit at 0.
fn line(x: f64, ty: TypeTag) -> i64 {
    let (mag, neg) = match ty {
        TypeTag::B32 => {
            let f = x as f32;
            ((f.to_bits() & 0x7fff_ffff) as i64, f.is_sign_negative())
        }
        _ => ((x.to_bits() & 0x7fff_ffff_ffff_ffff) as i64, x.is_sign_negative()),
    };
    if neg {
        -mag
    } else {
        mag
    }
}

pub fn ulps(a: f64, b: f64, ty: TypeTag) -> u64 {
    line(a, ty).abs_diff(line(b, ty))
}

pub fn precision(ty: TypeTag) -> f64 {
    match ty {
        TypeTag::B32 => 24.0,
        _ => 53.0,
    }
}

pub fn bits(got: f64, want: f64, ty: TypeTag) -> f64 {
    let p = precision(ty);
    match (got.is_nan(), want.is_nan()) {
        (true, true) => 0.0,
        (false, false) => ((ulps(got, want, ty) as f64) + 1.0).log2().min(p),
        _ => p,
    }
}

/// `1/y` rounded to `q` significand bits and then to binary32, from a
/// binary64 quotient. The quotient is correctly rounded and 53 >= 2q + 2, so
/// rounding it again to `q` bits gives the same result as rounding the exact
/// value.
pub fn emulated_reciprocal(y: f32, q: u32) -> f32 {
    let r = 1.0 / f64::from(y);
    if !r.is_finite() || r == 0.0 {
        return r as f32;
    }
    let drop = 52 - (q - 1);
    let b = r.to_bits();
    let low = b & ((1u64 << drop) - 1);
    let half = 1u64 << (drop - 1);
    let mut kept = b >> drop;
    if low > half || (low == half && kept & 1 == 1) {
        kept += 1;
    }
    f64::from_bits(kept << drop) as f32
}
