//! Exhaustive pair scans over a point domain.
//!
//! The scores used here are nondecreasing in the ℓ¹ gap, so a pair whose
//! best possible score (at the gap upper bound) is strictly below the
//! running maximum can be skipped without computing its gap. Skipped pairs
//! can never tie the maximum, which keeps the reported witness independent
//! of thread scheduling: ties always resolve to the lexicographically
//! smallest pair in domain order.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::metric_space::FiniteMetricSpace;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Hit {
    pub x: usize,
    pub y: usize,
    pub dist: f64,
    pub gap: f64,
    pub score: f64,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct ScanResult {
    /// First pair with the largest score; `None` when every score is 0.
    pub best: Option<Hit>,
    /// Pair with the largest positive violation excess, if any.
    pub violation: Option<Hit>,
}

impl ScanResult {
    pub fn max_score(&self) -> f64 {
        self.best.map_or(0.0, |h| h.score)
    }
}

fn better(a: Option<Hit>, b: Option<Hit>) -> Option<Hit> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(p), Some(q)) => Some(if q.score > p.score { q } else { p }),
    }
}

/// Scans all unordered pairs of `domain` (in domain order).
///
/// * `score(gap, d)` is maximized; it must be nondecreasing in `gap`, and
///   nonnegative.
/// * `excess(gap, d)`, when given, flags a violation when positive; it must
///   be nondecreasing in `gap` as well.
/// * `ub` bounds every gap.
/// * `within(d)` restricts the scan to pairs passing the distance filter.
pub(crate) fn pair_scan<G, S, E, W>(
    space: &FiniteMetricSpace,
    domain: &[usize],
    ub: f64,
    within: W,
    score: S,
    excess: Option<E>,
    gap: G,
) -> ScanResult
where
    G: Fn(usize, usize) -> f64 + Sync,
    S: Fn(f64, f64) -> f64 + Sync,
    E: Fn(f64, f64) -> f64 + Sync,
    W: Fn(f64) -> bool + Sync,
{
    let running = AtomicU64::new(0f64.to_bits());
    let rows: Vec<ScanResult> = (0..domain.len())
        .into_par_iter()
        .map(|i| {
            let x = domain[i];
            let mut row = ScanResult::default();
            for &y in &domain[i + 1..] {
                let d = space.dist(x, y);
                if !within(d) {
                    continue;
                }
                let cur = f64::from_bits(running.load(Ordering::Relaxed));
                let su = score(ub, d);
                let need_score = su > cur || (su == cur && cur > 0.0);
                let need_viol = excess.as_ref().is_some_and(|e| e(ub, d) > 0.0);
                if !need_score && !need_viol {
                    continue;
                }
                let g = gap(x, y);
                let s = score(g, d);
                let hit = Hit { x, y, dist: d, gap: g, score: s };
                if s > 0.0 && row.best.map_or(true, |b| s > b.score) {
                    row.best = Some(hit);
                    running.fetch_max(s.max(0.0).to_bits(), Ordering::Relaxed);
                }
                if let Some(e) = excess.as_ref() {
                    let ex = e(g, d);
                    if ex > 0.0 && row.violation.map_or(true, |v| ex > v.score) {
                        row.violation = Some(Hit { score: ex, ..hit });
                    }
                }
            }
            row
        })
        .collect();
    rows.into_iter().fold(ScanResult::default(), |acc, r| ScanResult {
        best: better(acc.best, r.best),
        violation: better(acc.violation, r.violation),
    })
}
