//! Fixed-precision evaluate-then-round reference for single real functions.
//!
//! Evaluates with astro-float at 4096 bits and rounds the result to the
//! output type with integer arithmetic, so neither step goes through MPFR.

use astro_float::{BigFloat, Consts, Error, RoundingMode, Sign};
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use fplower::ir::{RealFn, TypeTag};

pub const BITS: usize = 4096;
const RM: RoundingMode = RoundingMode::ToEven;

struct Format {
    prec: u64,
    /// Exponent of the smallest subnormal.
    quantum: i64,
    /// Exponent of the largest finite value's leading bit.
    emax: i64,
    emin: i64,
}

fn format(ty: TypeTag) -> Format {
    match ty {
        TypeTag::B32 => Format {
            prec: 24,
            quantum: -149,
            emax: 127,
            emin: -126,
        },
        _ => Format {
            prec: 53,
            quantum: -1074,
            emax: 1023,
            emin: -1022,
        },
    }
}

/// Nearest-even rounding of `m * 2^k` (with sign) into `ty`, gradual
/// underflow and overflow to infinity included.
pub fn round_scaled(negative: bool, m: &BigUint, k: i64, ty: TypeTag) -> f64 {
    let signed = |x: f64| if negative { -x } else { x };
    if m.is_zero() {
        return signed(0.0);
    }
    let f = format(ty);
    let lead = k + m.bits() as i64 - 1;
    let q = (lead - (f.prec as i64 - 1)).max(f.quantum);
    let mut units = if q <= k {
        m << ((k - q) as usize)
    } else {
        let shift = (q - k) as usize;
        let quot = m >> shift;
        let rem = m - (&quot << shift);
        let half = BigUint::one() << (shift - 1);
        if rem > half || (rem == half && quot.bit(0)) {
            quot + 1u32
        } else {
            quot
        }
    };
    let mut q = q;
    if units.bits() > f.prec {
        units >>= 1;
        q += 1;
    }
    if units.is_zero() {
        return signed(0.0);
    }
    let lead = q + units.bits() as i64 - 1;
    if lead > f.emax {
        return signed(f64::INFINITY);
    }
    let u = units.to_u64().expect("at most 53 bits");
    let bits = |frac_bits: u64, bias: i64| -> u64 {
        if lead < f.emin {
            // Subnormal: q is the quantum and the biased exponent is zero.
            u
        } else {
            let mant = u << (f.prec - units.bits());
            (((lead + bias) as u64) << frac_bits) | (mant & ((1u64 << frac_bits) - 1))
        }
    };
    let v = match ty {
        TypeTag::B32 => f32::from_bits(bits(23, 127) as u32) as f64,
        _ => f64::from_bits(bits(52, 1023)),
    };
    signed(v)
}

/// Rounds an astro-float value into `ty`. `None` for NaN.
pub fn round_big(x: &BigFloat, ty: TypeTag) -> Option<f64> {
    if x.is_nan() {
        return match x.err() {
            Some(Error::ExponentOverflow(s)) => Some(if s == Sign::Neg {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }),
            _ => None,
        };
    }
    if x.is_inf() {
        return Some(if x.is_inf_neg() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        });
    }
    if x.is_zero() {
        return Some(if x.is_negative() { -0.0 } else { 0.0 });
    }
    let (words, _, sign, e, _) = x.as_raw_parts()?;
    let mut m = BigUint::zero();
    for w in words.iter().rev() {
        m = (m << 64usize) + BigUint::from(*w);
    }
    // The significand is read as a fraction in [1/2, 1).
    let k = e as i64 - 64 * words.len() as i64;
    Some(round_scaled(sign == Sign::Neg, &m, k, ty))
}

pub struct Reference {
    cc: Consts,
}

impl Default for Reference {
    fn default() -> Self {
        Reference {
            cc: Consts::new().expect("constant cache"),
        }
    }
}

/// Exact conversion. `from_f64` misreads subnormals, so they are scaled
/// into the normal range first and scaled back by an exact division.
fn big(x: f64) -> BigFloat {
    if x != 0.0 && x.abs() < f64::MIN_POSITIVE {
        let two64 = BigFloat::from_f64(2f64.powi(64), BITS);
        return BigFloat::from_f64(x * 2f64.powi(64), BITS).div(&two64, BITS, RM);
    }
    BigFloat::from_f64(x, BITS)
}

fn is_integer(x: f64) -> bool {
    x.fract() == 0.0
}

impl Reference {
    /// `f` at finite `args`, correctly rounded into `ty`, or `None` where it
    /// is undefined. `pow(x, 0)` is 1 and negative bases need an integer
    /// exponent.
    pub fn eval(&mut self, f: RealFn, args: &[f64], ty: TypeTag) -> Option<f64> {
        let p = BITS;
        let cc = &mut self.cc;
        let a = big(args[0]);
        let v = match f {
            RealFn::Add => a.add(&big(args[1]), p, RM),
            RealFn::Sub => a.sub(&big(args[1]), p, RM),
            RealFn::Mul => a.mul(&big(args[1]), p, RM),
            RealFn::Div => {
                if args[1] == 0.0 {
                    return None;
                }
                a.div(&big(args[1]), p, RM)
            }
            RealFn::Neg => a.neg(),
            RealFn::Fabs => a.abs(),
            RealFn::Sqrt => {
                if args[0] < 0.0 {
                    return None;
                }
                a.sqrt(p, RM)
            }
            RealFn::Exp => a.exp(p, RM, cc),
            RealFn::Expm1 => a.exp(p, RM, cc).sub(&BigFloat::from_f64(1.0, p), p, RM),
            RealFn::Log => {
                if args[0] <= 0.0 {
                    return None;
                }
                a.ln(p, RM, cc)
            }
            RealFn::Log1p => {
                if args[0] <= -1.0 {
                    return None;
                }
                a.add(&BigFloat::from_f64(1.0, p), p, RM).ln(p, RM, cc)
            }
            RealFn::Pow => {
                let (x, y) = (args[0], args[1]);
                if y == 0.0 {
                    return Some(1.0);
                }
                if x == 0.0 {
                    return if y > 0.0 { Some(0.0) } else { None };
                }
                if x < 0.0 {
                    if !is_integer(y) {
                        return None;
                    }
                    let odd = y.abs() < 2f64.powi(53) && (y as i64) % 2 != 0;
                    let m = big(-x).pow(&big(y), p, RM, cc);
                    if odd {
                        m.neg()
                    } else {
                        m
                    }
                } else {
                    a.pow(&big(y), p, RM, cc)
                }
            }
            RealFn::Sin => a.sin(p, RM, cc),
            RealFn::Cos => a.cos(p, RM, cc),
            RealFn::Tan => a.tan(p, RM, cc),
            RealFn::Fma => a.mul(&big(args[1]), 2 * p, RM).add(&big(args[2]), p, RM),
            RealFn::Hypot => {
                let (x, y) = (big(args[0]), big(args[1]));
                x.mul(&x, p, RM).add(&y.mul(&y, p, RM), p, RM).sqrt(p, RM)
            }
        };
        round_big(&v, ty)
    }
}

/// Uniform over the bit patterns of finite values of `ty`.
pub fn draw_finite(rng: &mut impl rand::Rng, ty: TypeTag) -> f64 {
    loop {
        let v = match ty {
            TypeTag::B32 => f32::from_bits(rng.gen()) as f64,
            _ => f64::from_bits(rng.gen()),
        };
        if v.is_finite() {
            return v;
        }
    }
}

pub struct Comparison {
    pub defined: usize,
    pub disagreements: Vec<(Vec<f64>, Option<f64>, Option<f64>)>,
}

/// Compares the oracle with the reference on `n` seeded points of `f`.
pub fn compare(f: RealFn, n: usize, seed: u64, ty: TypeTag) -> Comparison {
    use fplower::ir::{Expr, Symbol};
    use fplower::oracle::{eval_real, Env, Rounding};
    use rand::SeedableRng;

    let names: Vec<Symbol> = ["a", "b", "c"][..f.arity()].iter().map(|s| Symbol::new(s)).collect();
    let e = Expr::Real(f, names.iter().map(|s| Expr::Var(s.clone())).collect());
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
    let mut reference = Reference::default();
    let mut bad = Vec::new();
    let mut defined = 0;
    for _ in 0..n {
        let pt: Vec<f64> = (0..f.arity()).map(|_| draw_finite(&mut rng, ty)).collect();
        let got = eval_real(&e, &Env::new(&names, &pt), Rounding::Nearest(ty));
        let want = reference.eval(f, &pt, ty);
        defined += usize::from(want.is_some());
        let agree = match (got, want) {
            (Some(a), Some(b)) => a == b,
            (None, None) => true,
            _ => false,
        };
        if !agree {
            bad.push((pt, got, want));
        }
    }
    Comparison {
        defined,
        disagreements: bad,
    }
}
