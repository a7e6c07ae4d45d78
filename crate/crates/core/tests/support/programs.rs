//! Random well-typed float programs over a target's operators.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rug::Rational;

use fplower::ir::{Expr, Literal, Program, Symbol, TypeTag};
use fplower::target::TargetDesc;

fn leaf(rng: &mut impl Rng, params: &[(Symbol, TypeTag)], ty: TypeTag) -> Expr {
    let vars: Vec<&Symbol> = params.iter().filter(|(_, t)| *t == ty).map(|(n, _)| n).collect();
    if !vars.is_empty() && rng.gen_bool(0.8) {
        return Expr::Var((*vars.choose(rng).unwrap()).clone());
    }
    let value = [Rational::from(1), Rational::from(2), Rational::from((1, 2))]
        .choose(rng)
        .unwrap()
        .clone();
    Expr::Lit(Literal { value, ty })
}

/// A random expression of type `ty` with at most `depth` levels of
/// operators.
pub fn random_expr(
    rng: &mut impl Rng,
    target: &TargetDesc,
    params: &[(Symbol, TypeTag)],
    ty: TypeTag,
    depth: usize,
) -> Expr {
    let ops: Vec<_> = target.operators.values().filter(|o| o.ret == ty).collect();
    if depth == 0 || ops.is_empty() || rng.gen_bool(0.25) {
        return leaf(rng, params, ty);
    }
    let op = ops.choose(rng).unwrap();
    let args = op
        .params
        .iter()
        .map(|(_, t)| random_expr(rng, target, params, *t, depth - 1))
        .collect();
    Expr::Op(op.name.clone(), args)
}

/// A random program of `ty` over `x` and `y` of the same type.
pub fn random_program(seed: u64, target: &TargetDesc, ty: TypeTag, depth: usize) -> Program {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let params = vec![(Symbol::new("x"), ty), (Symbol::new("y"), ty)];
    let body = random_expr(&mut rng, target, &params, ty, depth);
    Program {
        params,
        body,
        output: ty,
    }
}
