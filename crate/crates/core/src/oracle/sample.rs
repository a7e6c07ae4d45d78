use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::{eval_real, round, Env, OracleError, Rounding};
use crate::ir::{desugar, Program, Symbol, TypeTag};
use crate::par;
use crate::target::TargetDesc;

/// Draws after which a low acceptance rate counts as exhausted.
pub const MAX_DRAWS: usize = 1_000_000;
const HARD_CAP: usize = 10 * MAX_DRAWS;

/// Input points with the correctly rounded value of the program at each.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub names: Vec<Symbol>,
    pub points: Vec<Vec<f64>>,
    pub truth: Vec<f64>,
    pub output: TypeTag,
}

impl Sample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn env(&self, i: usize) -> Env<'_> {
        Env::new(&self.names, &self.points[i])
    }

    fn slice(&self, r: std::ops::Range<usize>) -> Sample {
        Sample {
            names: self.names.clone(),
            points: self.points[r.clone()].to_vec(),
            truth: self.truth[r].to_vec(),
            output: self.output,
        }
    }
}

/// Training half (the first `ceil(n/2)` points) and test half.
pub fn split(s: &Sample) -> (Sample, Sample) {
    let k = s.len().div_ceil(2);
    (s.slice(0..k), s.slice(k..s.len()))
}

fn draw(rng: &mut ChaCha20Rng, tys: &[TypeTag]) -> Vec<f64> {
    tys.iter()
        .map(|t| {
            let m = round::max_finite_ordinal(*t);
            round::from_ordinal(rng.gen_range(-m..=m), *t)
        })
        .collect()
}

/// Draws `n` points uniformly over the ordinals of the finite floats of each
/// parameter type, keeping those where the program has a value.
pub fn sample(p: &Program, target: &TargetDesc, n: usize, seed: u64) -> Result<Sample, OracleError> {
    let real = desugar(&p.body, target);
    let names: Vec<Symbol> = p.params.iter().map(|(n, _)| n.clone()).collect();
    let tys: Vec<TypeTag> = p.params.iter().map(|(_, t)| *t).collect();
    let rounding = Rounding::Nearest(p.output);
    let truth_at = |pt: &Vec<f64>| eval_real(&real, &Env::new(&names, pt), rounding);

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    let mut truth = Vec::with_capacity(n);
    let mut draws = 0usize;

    if names.is_empty() {
        // Every draw is the same point.
        let pt = Vec::new();
        return match truth_at(&pt) {
            Some(v) => Ok(Sample {
                names,
                points: vec![pt; n],
                truth: vec![v; n],
                output: p.output,
            }),
            None => Err(OracleError::SamplingExhausted { accepted: 0, draws: 1 }),
        };
    }

    while points.len() < n {
        let missing = n - points.len();
        let rate = if draws == 0 {
            1.0
        } else {
            (points.len().max(1) as f64) / draws as f64
        };
        let batch = ((missing as f64 / rate) as usize + 16).clamp(64, 1 << 16);
        let cands: Vec<Vec<f64>> = (0..batch).map(|_| draw(&mut rng, &tys)).collect();
        let vals = par::map(&cands, truth_at);
        for (pt, v) in cands.into_iter().zip(vals) {
            if points.len() == n {
                break;
            }
            draws += 1;
            if let Some(v) = v {
                points.push(pt);
                truth.push(v);
            }
        }
        let thin = draws >= MAX_DRAWS && points.len() * 1000 < draws;
        if points.len() < n && (thin || draws >= HARD_CAP) {
            return Err(OracleError::SamplingExhausted {
                accepted: points.len(),
                draws,
            });
        }
    }
    Ok(Sample {
        names,
        points,
        truth,
        output: p.output,
    })
}
