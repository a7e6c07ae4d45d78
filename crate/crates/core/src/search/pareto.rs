use std::cmp::Ordering;

use super::Candidate;

/// The candidates no other candidate beats on both cost and error. Equal
/// programs collapse to one; of candidates with identical scores the one with
/// the lexicographically smaller text is kept. Sorted by cost ascending.
pub fn pareto_filter(mut cands: Vec<Candidate>) -> Vec<Candidate> {
    cands.sort_by(|a, b| {
        a.cost
            .partial_cmp(&b.cost)
            .unwrap_or(Ordering::Equal)
            .then(a.error().partial_cmp(&b.error()).unwrap_or(Ordering::Equal))
            .then_with(|| a.text.cmp(&b.text))
    });
    let mut out: Vec<Candidate> = Vec::new();
    for c in cands {
        // Sorted by cost, so `c` survives only by being strictly more
        // accurate than everything cheaper or equally cheap.
        if out.last().is_none_or(|best| c.error() < best.error()) {
            out.push(c);
        }
    }
    out
}
