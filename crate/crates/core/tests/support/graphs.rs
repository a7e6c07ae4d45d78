//! Random mixed real/float e-graphs and a brute-force cheapest program.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rug::Rational;

use fplower::egraph::{EGraph, ENode, Head, Id};
use fplower::ir::{Literal, RealFn, Symbol, TypeEnv, TypeTag};
use fplower::target::{load_target_str, TargetDesc};

/// Costs are dyadic so that sums compare exactly.
pub const GRAPH_TARGET: &str = r#"
    (define-operator (add64 [x binary64] [y binary64]) binary64 #:approx (+ x y) #:cost 1)
    (define-operator (mul64 [x binary64] [y binary64]) binary64 #:approx (* x y) #:cost 2)
    (define-operator (sqrt64 [x binary64]) binary64 #:approx (sqrt x) #:cost 3)
    (define-operator (add32 [x binary32] [y binary32]) binary32 #:approx (+ x y) #:cost 0.5)
    (define-operator (neg32 [x binary32]) binary32 #:approx (neg x) #:cost 0.25)
    (define-operator (widen [x binary32]) binary64 #:approx x #:cost 0.75)
    (define-operator (narrow [x binary64]) binary32 #:approx x #:cost 1.5)
    (define-target graphs
      #:literals ([binary64 0.125] [binary32 0.375])
      #:var-cost 0.0625
      #:operators (add64 mul64 sqrt64 add32 neg32 widen narrow))
"#;

pub fn graph_target() -> TargetDesc {
    load_target_str(GRAPH_TARGET, None).unwrap()
}

pub fn graph_env() -> TypeEnv {
    [(Symbol::new("x"), TypeTag::B64), (Symbol::new("y"), TypeTag::B32)]
        .into_iter()
        .collect()
}

fn lit(n: i64, ty: TypeTag) -> Head {
    Head::Lit(Literal {
        value: Rational::from(n),
        ty,
    })
}

/// A rebuilt graph of at most `max_nodes` e-nodes mixing real and float
/// operators, with a few random unions. Children are drawn without regard
/// to type, so some nodes have no well-typed program. Returns the graph and
/// the class of the last node added.
pub fn random_graph(seed: u64, max_nodes: usize) -> (EGraph, Id) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut g = EGraph::new();
    let leaves = [
        Head::Var(Symbol::new("x"), TypeTag::B64),
        Head::Var(Symbol::new("y"), TypeTag::B32),
        lit(1, TypeTag::B64),
        lit(2, TypeTag::B32),
        lit(3, TypeTag::Real),
    ];
    let mut ids: Vec<Id> = leaves
        .iter()
        .map(|h| g.add_node(ENode::leaf(h.clone())).unwrap())
        .collect();
    // (head, parameter types, result type); `Real` stands for a real node.
    let f64s = TypeTag::B64;
    let f32s = TypeTag::B32;
    let real = TypeTag::Real;
    let op = |n: &str| Head::Op(Symbol::new(n));
    let heads: Vec<(Head, Vec<TypeTag>, TypeTag)> = vec![
        (op("add64"), vec![f64s, f64s], f64s),
        (op("mul64"), vec![f64s, f64s], f64s),
        (op("sqrt64"), vec![f64s], f64s),
        (op("add32"), vec![f32s, f32s], f32s),
        (op("neg32"), vec![f32s], f32s),
        (op("widen"), vec![f32s], f64s),
        (op("narrow"), vec![f64s], f32s),
        (Head::Real(RealFn::Add), vec![real, real], real),
        (Head::Real(RealFn::Mul), vec![real, real], real),
        (Head::Real(RealFn::Sqrt), vec![real], real),
    ];
    let mut kinds: Vec<TypeTag> = vec![f64s, f32s, f64s, f32s, real];
    let target_nodes = rng.gen_range(leaves.len() + 1..=max_nodes);
    let mut root = ids[0];
    while g.node_count() < target_nodes {
        let (head, params, ret) = heads.choose(&mut rng).unwrap().clone();
        // Mostly children of the expected kind, sometimes anything.
        let children = params
            .iter()
            .map(|want| {
                let fitting: Vec<usize> = (0..ids.len()).filter(|i| kinds[*i] == *want || *want == real).collect();
                if !fitting.is_empty() && rng.gen_bool(0.75) {
                    ids[*fitting.choose(&mut rng).unwrap()]
                } else {
                    *ids.choose(&mut rng).unwrap()
                }
            })
            .collect();
        let id = g.add_node(ENode { head, children }).unwrap();
        if !ids.contains(&id) {
            ids.push(id);
            kinds.push(ret);
        }
        root = id;
    }
    for _ in 0..rng.gen_range(0..=4) {
        let (a, b) = (*ids.choose(&mut rng).unwrap(), *ids.choose(&mut rng).unwrap());
        g.union(a, b);
    }
    g.rebuild();
    let root = g.find(root);
    (g, root)
}

/// The cheapest well-typed all-float program of type `ty` in `id`, by
/// exhaustive search over derivations that never revisit a class at the
/// same type.
pub fn brute_min(g: &EGraph, target: &TargetDesc, id: Id, ty: TypeTag) -> Option<f64> {
    let index: HashMap<Id, u32> = g.class_ids().enumerate().map(|(i, c)| (c, i as u32)).collect();
    assert!(index.len() <= 64, "too many classes for the visit mask");
    let mut memo = HashMap::new();
    go(g, target, &index, g.find(id), ty, 0, &mut memo)
}

fn go(
    g: &EGraph,
    target: &TargetDesc,
    index: &HashMap<Id, u32>,
    id: Id,
    ty: TypeTag,
    visiting: u128,
    memo: &mut HashMap<(Id, TypeTag, u128), Option<f64>>,
) -> Option<f64> {
    let bit = 1u128 << (2 * index[&id] + u32::from(ty == TypeTag::B32));
    if visiting & bit != 0 {
        return None;
    }
    if let Some(v) = memo.get(&(id, ty, visiting)) {
        return *v;
    }
    let inner = visiting | bit;
    let mut best: Option<f64> = None;
    for n in &g.class(id).nodes {
        let cost = match &n.head {
            Head::Var(_, t) if *t == ty => Some(target.var_cost()),
            Head::Lit(l) if l.ty == ty => Some(target.literal_cost(ty)),
            Head::Op(o) => {
                let op = target.op(o).unwrap();
                if op.ret != ty {
                    None
                } else {
                    n.children.iter().zip(&op.params).try_fold(op.cost, |acc, (c, (_, t))| {
                        Some(acc + go(g, target, index, g.find(*c), *t, inner, memo)?)
                    })
                }
            }
            _ => None,
        };
        if let Some(c) = cost {
            best = Some(best.map_or(c, |b: f64| b.min(c)));
        }
    }
    memo.insert((id, ty, visiting), best);
    best
}
