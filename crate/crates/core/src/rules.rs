//! The library of real-number identities, and the non-growing subset used by
//! cost-opportunity analysis.

use thiserror::Error;

use crate::egraph::{PatHead, Pattern};
use crate::ir::sexpr::{read_all, Sexp};
use crate::ir::{parse_expr_with_holes, IrError, RealFn, Symbol, Template};
use crate::target::{RewriteRule, RuleKind};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum RuleError {
    #[error("rule syntax: {0}")]
    Syntax(String),
    #[error(transparent)]
    Ir(#[from] IrError),
    #[error("{0}")]
    Invalid(String),
}

/// Rules that replace an expression with something that is not larger, but
/// that we still want applied in the simplifying pass because they expose
/// cheaper operators.
const SIMPLIFYING_EXCEPTIONS: &[&str] = &["div-to-mul-recip"];

const MATH_RULES: &str = r#"
; commutativity and associativity
(rule add-comm (+ ?a ?b) (+ ?b ?a))
(rule mul-comm (* ?a ?b) (* ?b ?a))
(rule add-assoc-l (+ ?a (+ ?b ?c)) (+ (+ ?a ?b) ?c))
(rule add-assoc-r (+ (+ ?a ?b) ?c) (+ ?a (+ ?b ?c)))
(rule mul-assoc-l (* ?a (* ?b ?c)) (* (* ?a ?b) ?c))
(rule mul-assoc-r (* (* ?a ?b) ?c) (* ?a (* ?b ?c)))
(rule sub-to-add-neg (- ?a ?b) (+ ?a (neg ?b)))
(rule add-neg-to-sub (+ ?a (neg ?b)) (- ?a ?b))
(rule sub-add-assoc (- (+ ?a ?b) ?c) (+ ?a (- ?b ?c)))
(rule add-sub-assoc (+ ?a (- ?b ?c)) (- (+ ?a ?b) ?c))

; distributivity
(rule distribute-add (* ?a (+ ?b ?c)) (+ (* ?a ?b) (* ?a ?c)))
(rule factor-add (+ (* ?a ?b) (* ?a ?c)) (* ?a (+ ?b ?c)))
(rule distribute-sub (* ?a (- ?b ?c)) (- (* ?a ?b) (* ?a ?c)))
(rule factor-sub (- (* ?a ?b) (* ?a ?c)) (* ?a (- ?b ?c)))

; identity and annihilator elements
(rule add-zero (+ ?a 0) ?a)
(rule sub-zero (- ?a 0) ?a)
(rule mul-one (* ?a 1) ?a)
(rule div-one (/ ?a 1) ?a)
(rule mul-zero (* ?a 0) 0)
(rule sub-self (- ?a ?a) 0)
(rule div-self (/ ?a ?a) 1 #:nonzero ?a)
(rule add-self (+ ?a ?a) (* 2 ?a))
(rule double-to-add (* 2 ?a) (+ ?a ?a))

; negation
(rule zero-sub (- 0 ?a) (neg ?a))
(rule neg-to-zero-sub (neg ?a) (- 0 ?a))
(rule mul-minus-one (* -1 ?a) (neg ?a))
(rule neg-neg (neg (neg ?a)) ?a)
(rule neg-mul-in (neg (* ?a ?b)) (* (neg ?a) ?b))
(rule neg-mul-out (* (neg ?a) ?b) (neg (* ?a ?b)))
(rule neg-sub (neg (- ?a ?b)) (- ?b ?a))
(rule sub-neg (- ?a (neg ?b)) (+ ?a ?b))
(rule neg-div (neg (/ ?a ?b)) (/ (neg ?a) ?b))

; fractions
(rule div-to-mul-recip (/ ?a ?b) (* ?a (/ 1 ?b)))
(rule mul-recip-to-div (* ?a (/ 1 ?b)) (/ ?a ?b))
(rule div-div (/ (/ ?a ?b) ?c) (/ ?a (* ?b ?c)))
(rule div-mul (* (/ ?a ?b) ?c) (/ (* ?a ?c) ?b))
(rule mul-div (/ (* ?a ?b) ?c) (* ?a (/ ?b ?c)))
(rule div-add-same (+ (/ ?a ?c) (/ ?b ?c)) (/ (+ ?a ?b) ?c))
(rule div-split-add (/ (+ ?a ?b) ?c) (+ (/ ?a ?c) (/ ?b ?c)))
(rule div-split-sub (/ (- ?a ?b) ?c) (- (/ ?a ?c) (/ ?b ?c)))
(rule recip-recip (/ 1 (/ 1 ?a)) ?a #:nonzero ?a)
(rule recip-div (/ 1 (/ ?a ?b)) (/ ?b ?a))
(rule div-cancel (/ (* ?a ?b) ?a) ?b #:nonzero ?a)
(rule mul-div-cancel (* (/ ?a ?b) ?b) ?a #:nonzero ?b)

; squares
(rule flip-sub (- ?a ?b) (/ (- (* ?a ?a) (* ?b ?b)) (+ ?a ?b)))
(rule flip-add (+ ?a ?b) (/ (- (* ?a ?a) (* ?b ?b)) (- ?a ?b)))
(rule diff-of-squares (- (* ?a ?a) (* ?b ?b)) (* (+ ?a ?b) (- ?a ?b)))
(rule squares-of-diff (* (+ ?a ?b) (- ?a ?b)) (- (* ?a ?a) (* ?b ?b)))
(rule pow2-to-mul (pow ?a 2) (* ?a ?a))
(rule mul-to-pow2 (* ?a ?a) (pow ?a 2))

; roots, powers and absolute values
(rule sqrt-of-square (sqrt (* ?a ?a)) (fabs ?a))
(rule square-of-sqrt (* (sqrt ?a) (sqrt ?a)) ?a)
(rule sqrt-mul-join (* (sqrt ?a) (sqrt ?b)) (sqrt (* ?a ?b)))
(rule sqrt-div-join (/ (sqrt ?a) (sqrt ?b)) (sqrt (/ ?a ?b)))
(rule sqrt-to-pow (sqrt ?a) (pow ?a 1/2))
(rule pow-to-sqrt (pow ?a 1/2) (sqrt ?a))
(rule pow-one (pow ?a 1) ?a)
(rule pow-succ (* (pow ?a ?b) ?a) (pow ?a (+ ?b 1)))
(rule fabs-fabs (fabs (fabs ?a)) (fabs ?a))
(rule fabs-neg (fabs (neg ?a)) (fabs ?a))
(rule fabs-square (fabs (* ?a ?a)) (* ?a ?a))
(rule hypot-def (sqrt (+ (* ?a ?a) (* ?b ?b))) (hypot ?a ?b))
(rule hypot-undef (hypot ?a ?b) (sqrt (+ (* ?a ?a) (* ?b ?b))))

; exponentials and logarithms
(rule exp-sum (exp (+ ?a ?b)) (* (exp ?a) (exp ?b)))
(rule exp-prod (* (exp ?a) (exp ?b)) (exp (+ ?a ?b)))
(rule exp-neg (exp (neg ?a)) (/ 1 (exp ?a)))
(rule exp-zero (exp 0) 1)
(rule log-exp (log (exp ?a)) ?a)
(rule exp-log (exp (log ?a)) ?a)
(rule log-prod (log (* ?a ?b)) (+ (log ?a) (log ?b)))
(rule sum-log (+ (log ?a) (log ?b)) (log (* ?a ?b)))
(rule log-div (log (/ ?a ?b)) (- (log ?a) (log ?b)))
(rule diff-log (- (log ?a) (log ?b)) (log (/ ?a ?b)))
(rule log-pow (log (pow ?a ?b)) (* ?b (log ?a)))
(rule log1p-def (log (+ 1 ?a)) (log1p ?a))
(rule log1p-undef (log1p ?a) (log (+ 1 ?a)))
(rule log1p-neg-def (log (- 1 ?a)) (log1p (neg ?a)))
(rule log1p-neg-undef (log1p (neg ?a)) (log (- 1 ?a)))
(rule expm1-def (- (exp ?a) 1) (expm1 ?a))
(rule expm1-undef (expm1 ?a) (- (exp ?a) 1))

; fused multiply-add
(rule fma-def (+ (* ?a ?b) ?c) (fma ?a ?b ?c))
(rule fma-def-sub (- (* ?a ?b) ?c) (fma ?a ?b (neg ?c)))
(rule fma-def-neg (- ?c (* ?a ?b)) (fma (neg ?a) ?b ?c))
(rule fma-undef (fma ?a ?b ?c) (+ (* ?a ?b) ?c))

; trigonometry
(rule pythagoras (+ (* (sin ?a) (sin ?a)) (* (cos ?a) (cos ?a))) 1)
(rule one-sub-cos2 (- 1 (* (cos ?a) (cos ?a))) (* (sin ?a) (sin ?a)))
(rule one-sub-sin2 (- 1 (* (sin ?a) (sin ?a))) (* (cos ?a) (cos ?a)))
(rule tan-quot (tan ?a) (/ (sin ?a) (cos ?a)))
(rule quot-tan (/ (sin ?a) (cos ?a)) (tan ?a))
(rule sin-neg (sin (neg ?a)) (neg (sin ?a)))
(rule cos-neg (cos (neg ?a)) (cos ?a))
(rule sin-double (* 2 (* (sin ?a) (cos ?a))) (sin (* 2 ?a)))
"#;

/// Real functions folded exactly on literal arguments.
const FOLDED: [RealFn; 6] = [
    RealFn::Add,
    RealFn::Sub,
    RealFn::Mul,
    RealFn::Div,
    RealFn::Neg,
    RealFn::Fabs,
];

fn to_pattern(t: &Template) -> Result<Pattern, RuleError> {
    Ok(match t {
        Template::Hole(h) => Pattern::Hole(h.clone()),
        Template::Var(v) => {
            return Err(RuleError::Invalid(format!(
                "`{v}` is neither a metavariable nor a literal"
            )))
        }
        Template::Lit(l) => Pattern::Lit(l.clone()),
        Template::Real(f, kids) => Pattern::Node(
            PatHead::Real(*f),
            kids.iter().map(to_pattern).collect::<Result<_, _>>()?,
        ),
        Template::Op(o, kids) => Pattern::Node(
            PatHead::Op(o.clone()),
            kids.iter().map(to_pattern).collect::<Result<_, _>>()?,
        ),
    })
}

/// Reads `#:nonzero ?a ...` after a rule's right side.
fn guards(name: &str, rest: &[Sexp], bound: &[Symbol]) -> Result<Vec<Symbol>, RuleError> {
    let Some((key, holes)) = rest.split_first() else {
        return Ok(Vec::new());
    };
    if key.as_atom() != Some("#:nonzero") || holes.is_empty() {
        return Err(RuleError::Syntax(format!(
            "rule {name}: expected #:nonzero ?VAR... at {}",
            key.pos()
        )));
    }
    holes
        .iter()
        .map(|h| {
            let sym = h
                .as_atom()
                .and_then(|a| a.strip_prefix('?'))
                .map(Symbol::new)
                .filter(|s| bound.contains(s));
            sym.ok_or_else(|| RuleError::Invalid(format!("rule {name}: {h} is not a bound metavariable")))
        })
        .collect()
}

/// Reads `(rule NAME LHS RHS)` forms, optionally followed by
/// `#:nonzero ?a ...`. `;` starts a comment. Rules over real
/// functions only are identities; a rule whose right side introduces a float
/// operator is a lowering, the reverse a lifting.
pub fn parse_rules(text: &str) -> Result<Vec<RewriteRule>, RuleError> {
    let forms = read_all(text).map_err(|e| RuleError::Syntax(format!("{} at {}", e.msg, e.pos)))?;
    let mut out = Vec::new();
    for f in &forms {
        let items = match f {
            Sexp::List(items, _) if items.len() >= 4 && items[0].as_atom() == Some("rule") => items,
            other => {
                return Err(RuleError::Syntax(format!(
                    "expected (rule NAME LHS RHS) at {}",
                    other.pos()
                )))
            }
        };
        let name = items[1]
            .as_atom()
            .ok_or_else(|| RuleError::Syntax(format!("rule name at {}", items[1].pos())))?;
        let lhs = to_pattern(&parse_expr_with_holes(&items[2])?)?;
        let rhs = to_pattern(&parse_expr_with_holes(&items[3])?)?;
        let kind = match (lhs.has_float_op(), rhs.has_float_op()) {
            (false, true) => RuleKind::Lowering,
            (true, false) => RuleKind::Lifting,
            _ => RuleKind::MathIdentity,
        };
        if out.iter().any(|r: &RewriteRule| r.name == name) {
            return Err(RuleError::Invalid(format!("duplicate rule `{name}`")));
        }
        let mut rule = RewriteRule::new(name, lhs, rhs, kind).map_err(RuleError::Invalid)?;
        rule.nonzero = guards(name, &items[4..], &rule.lhs.holes())?;
        out.push(rule);
    }
    Ok(out)
}

/// The identity library plus constant folding.
pub fn math_rules() -> Vec<RewriteRule> {
    let mut rules = parse_rules(MATH_RULES).expect("built-in rules parse");
    rules.extend(FOLDED.iter().map(|f| RewriteRule::fold(*f)));
    rules
}

/// Rules whose right side is no larger than the left, counting a
/// metavariable as one node, plus constant folding and the listed
/// exceptions.
pub fn simplifying_rules() -> Vec<RewriteRule> {
    math_rules()
        .into_iter()
        .filter(|r| r.rhs_size() <= r.lhs.size() || SIMPLIFYING_EXCEPTIONS.contains(&r.name.as_str()))
        .collect()
}
