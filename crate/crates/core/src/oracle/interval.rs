//! Outward-rounded interval evaluation of real expressions at a fixed
//! working precision.

use std::cmp::Ordering;

use rug::float::{Constant, Round};
use rug::ops::{AssignRound, Pow};
use rug::Float;

use super::Env;
use crate::ir::{Expr, RealFn};

#[derive(Clone, Debug)]
pub(crate) struct Iv {
    pub lo: Float,
    pub hi: Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Fail {
    /// The value is certainly undefined: out of domain or an exact pole.
    Invalid,
    /// The enclosure is too wide to decide; more precision may help.
    Unsure,
}

type R = Result<Iv, Fail>;

fn rnd<T>(prec: u32, v: T, r: Round) -> Float
where
    Float: AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(prec, v, r).0
}

fn checked(iv: Iv) -> R {
    if iv.lo.is_nan() || iv.hi.is_nan() || iv.lo > iv.hi {
        Err(Fail::Unsure)
    } else {
        Ok(iv)
    }
}

impl Iv {
    fn point(x: Float) -> Iv {
        Iv { lo: x.clone(), hi: x }
    }

    fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    fn contains_zero(&self) -> bool {
        self.lo <= 0 && self.hi >= 0
    }
}

/// Applies a non-decreasing function endpoint-wise.
fn increasing(a: &Iv, f: impl Fn(&Float, Round) -> Float) -> R {
    checked(Iv {
        lo: f(&a.lo, Round::Down),
        hi: f(&a.hi, Round::Up),
    })
}

/// Hull of a function monotone in each argument separately, from the four
/// corners of the box.
fn corners(a: &Iv, b: &Iv, f: impl Fn(&Float, &Float, Round) -> Float) -> R {
    let pts = [(&a.lo, &b.lo), (&a.lo, &b.hi), (&a.hi, &b.lo), (&a.hi, &b.hi)];
    let mut lo: Option<Float> = None;
    let mut hi: Option<Float> = None;
    for (x, y) in pts {
        let d = f(x, y, Round::Down);
        let u = f(x, y, Round::Up);
        if d.is_nan() || u.is_nan() {
            return Err(Fail::Unsure);
        }
        if lo.as_ref().is_none_or(|l| d < *l) {
            lo = Some(d);
        }
        if hi.as_ref().is_none_or(|h| u > *h) {
            hi = Some(u);
        }
    }
    checked(Iv {
        lo: lo.expect("four corners"),
        hi: hi.expect("four corners"),
    })
}

fn neg(a: &Iv) -> Iv {
    Iv {
        lo: Float::with_val(a.hi.prec(), -&a.hi),
        hi: Float::with_val(a.lo.prec(), -&a.lo),
    }
}

fn fabs(a: &Iv) -> Iv {
    if a.lo >= 0 {
        a.clone()
    } else if a.hi <= 0 {
        neg(a)
    } else {
        let m = if Float::with_val(a.lo.prec(), -&a.lo) > a.hi {
            Float::with_val(a.lo.prec(), -&a.lo)
        } else {
            a.hi.clone()
        };
        Iv {
            lo: Float::with_val(m.prec(), 0),
            hi: m,
        }
    }
}

fn div(a: &Iv, b: &Iv, p: u32) -> R {
    if b.contains_zero() {
        return Err(if b.lo == 0 && b.hi == 0 {
            Fail::Invalid
        } else {
            Fail::Unsure
        });
    }
    corners(a, b, |x, y, r| rnd(p, x / y, r))
}

/// Integers `k` with `s + k*pi` possibly inside `a`, as `(first, count)`;
/// `None` when there are too many to list.
fn multiples(a: &Iv, p: u32, half_pi_offset: bool) -> Option<(rug::Integer, u32)> {
    let wp = p + 32;
    let pi = Iv {
        lo: rnd(wp, Constant::Pi, Round::Down),
        hi: rnd(wp, Constant::Pi, Round::Up),
    };
    let shifted = if half_pi_offset {
        let half = Iv {
            lo: Float::with_val(wp, &pi.lo / 2u32),
            hi: Float::with_val(wp, &pi.hi / 2u32),
        };
        corners(a, &half, |x, y, r| rnd(wp, x - y, r)).ok()?
    } else {
        a.clone()
    };
    let t = div(&shifted, &pi, wp).ok()?;
    let first = rnd(wp, t.lo.ceil_ref(), Round::Down).to_integer()?;
    let last = rnd(wp, t.hi.floor_ref(), Round::Up).to_integer()?;
    if last < first {
        return Some((first, 0));
    }
    let count = rug::Integer::from(&last - &first) + 1u32;
    let count = count.to_u32().filter(|c| *c <= 2)?;
    Some((first, count))
}

/// `sin` or `cos`, whose extrema are `(-1)^k` at `offset + k*pi`.
fn periodic(a: &Iv, p: u32, is_sin: bool) -> R {
    let f = |x: &Float, r: Round| {
        if is_sin {
            rnd(p, x.sin_ref(), r)
        } else {
            rnd(p, x.cos_ref(), r)
        }
    };
    if a.is_point() {
        return checked(Iv {
            lo: f(&a.lo, Round::Down),
            hi: f(&a.lo, Round::Up),
        });
    }
    let one = Float::with_val(p, 1);
    let minus_one = Float::with_val(p, -1);
    let Some((first, count)) = multiples(a, p, is_sin) else {
        return Ok(Iv { lo: minus_one, hi: one });
    };
    let (l1, l2) = (f(&a.lo, Round::Down), f(&a.hi, Round::Down));
    let (u1, u2) = (f(&a.lo, Round::Up), f(&a.hi, Round::Up));
    let mut lo = if l1 < l2 { l1 } else { l2 };
    let mut hi = if u1 > u2 { u1 } else { u2 };
    for i in 0..count {
        let k = rug::Integer::from(&first + i);
        if k.is_odd() {
            lo = minus_one.clone();
        } else {
            hi = one.clone();
        }
    }
    checked(Iv { lo, hi })
}

fn tan(a: &Iv, p: u32) -> R {
    if !a.is_point() {
        match multiples(a, p, true) {
            Some((_, 0)) => {}
            _ => return Err(Fail::Unsure),
        }
    }
    increasing(a, |x, r| rnd(p, x.tan_ref(), r))
}

fn pow(a: &Iv, b: &Iv, p: u32) -> R {
    if b.is_point() && b.lo == 0 {
        return Ok(Iv::point(Float::with_val(p, 1)));
    }
    let powf = |x: &Float, y: &Float, r: Round| rnd(p, x.pow(y), r);
    if a.lo > 0 {
        return corners(a, b, powf);
    }
    if a.is_point() && a.lo == 0 {
        return if b.lo > 0 {
            Ok(Iv::point(Float::with_val(p, 0)))
        } else if b.hi < 0 {
            Err(Fail::Invalid)
        } else {
            Err(Fail::Unsure)
        };
    }
    if a.hi < 0 {
        if !b.is_point() {
            return Err(Fail::Unsure);
        }
        if !b.lo.is_integer() {
            return Err(Fail::Invalid);
        }
        let odd = b.lo.to_integer().is_some_and(|n| n.is_odd());
        let m = corners(&neg(a), b, powf)?;
        return Ok(if odd { neg(&m) } else { m });
    }
    Err(Fail::Unsure)
}

pub(crate) fn eval(e: &Expr, env: &Env, p: u32) -> R {
    match e {
        Expr::Var(v) => {
            let x = env.get(v).ok_or(Fail::Invalid)?;
            if !x.is_finite() {
                return Err(Fail::Invalid);
            }
            Ok(Iv::point(Float::with_val(p.max(53), x)))
        }
        Expr::Lit(l) => Ok(Iv {
            lo: rnd(p, &l.value, Round::Down),
            hi: rnd(p, &l.value, Round::Up),
        }),
        Expr::Real(f, args) => {
            let a = eval(&args[0], env, p)?;
            match f {
                RealFn::Add => {
                    let b = eval(&args[1], env, p)?;
                    checked(Iv {
                        lo: rnd(p, &a.lo + &b.lo, Round::Down),
                        hi: rnd(p, &a.hi + &b.hi, Round::Up),
                    })
                }
                RealFn::Sub => {
                    let b = eval(&args[1], env, p)?;
                    checked(Iv {
                        lo: rnd(p, &a.lo - &b.hi, Round::Down),
                        hi: rnd(p, &a.hi - &b.lo, Round::Up),
                    })
                }
                RealFn::Mul => {
                    let b = eval(&args[1], env, p)?;
                    corners(&a, &b, |x, y, r| rnd(p, x * y, r))
                }
                RealFn::Div => {
                    let b = eval(&args[1], env, p)?;
                    div(&a, &b, p)
                }
                RealFn::Neg => Ok(neg(&a)),
                RealFn::Fabs => Ok(fabs(&a)),
                RealFn::Sqrt => {
                    if a.hi < 0 {
                        Err(Fail::Invalid)
                    } else if a.lo < 0 {
                        Err(Fail::Unsure)
                    } else {
                        increasing(&a, |x, r| rnd(p, x.sqrt_ref(), r))
                    }
                }
                RealFn::Exp => increasing(&a, |x, r| rnd(p, x.exp_ref(), r)),
                RealFn::Expm1 => increasing(&a, |x, r| rnd(p, x.exp_m1_ref(), r)),
                RealFn::Log => {
                    if a.hi <= 0 {
                        Err(Fail::Invalid)
                    } else if a.lo <= 0 {
                        Err(Fail::Unsure)
                    } else {
                        increasing(&a, |x, r| rnd(p, x.ln_ref(), r))
                    }
                }
                RealFn::Log1p => {
                    if a.hi <= -1 {
                        Err(Fail::Invalid)
                    } else if a.lo <= -1 {
                        Err(Fail::Unsure)
                    } else {
                        increasing(&a, |x, r| rnd(p, x.ln_1p_ref(), r))
                    }
                }
                RealFn::Pow => {
                    let b = eval(&args[1], env, p)?;
                    pow(&a, &b, p)
                }
                RealFn::Sin => periodic(&a, p, true),
                RealFn::Cos => periodic(&a, p, false),
                RealFn::Tan => tan(&a, p),
                RealFn::Fma => {
                    let b = eval(&args[1], env, p)?;
                    let c = eval(&args[2], env, p)?;
                    // The product is exact at twice the precision, so only
                    // the sum rounds.
                    let m = corners(&a, &b, |x, y, r| rnd(2 * p + 64, x * y, r))?;
                    checked(Iv {
                        lo: rnd(p, &m.lo + &c.lo, Round::Down),
                        hi: rnd(p, &m.hi + &c.hi, Round::Up),
                    })
                }
                RealFn::Hypot => {
                    let b = eval(&args[1], env, p)?;
                    let (a, b) = (fabs(&a), fabs(&b));
                    checked(Iv {
                        lo: rnd(p, a.lo.hypot_ref(&b.lo), Round::Down),
                        hi: rnd(p, a.hi.hypot_ref(&b.hi), Round::Up),
                    })
                }
            }
        }
        Expr::If(c, t, f) => {
            if eval_bool(c, env, p)? {
                eval(t, env, p)
            } else {
                eval(f, env, p)
            }
        }
        Expr::Annot(_, inner) => eval(inner, env, p),
        Expr::Op(..) | Expr::Cmp(..) => Err(Fail::Invalid),
    }
}

pub(crate) fn eval_bool(e: &Expr, env: &Env, p: u32) -> Result<bool, Fail> {
    let Expr::Cmp(op, a, b) = e else {
        return Err(Fail::Invalid);
    };
    let a = eval(a, env, p)?;
    let b = eval(b, env, p)?;
    let ord = if a.hi < b.lo {
        Ordering::Less
    } else if a.lo > b.hi {
        Ordering::Greater
    } else if a.is_point() && b.is_point() && a.lo == b.lo {
        Ordering::Equal
    } else {
        return Err(Fail::Unsure);
    };
    Ok(op.holds(ord))
}
