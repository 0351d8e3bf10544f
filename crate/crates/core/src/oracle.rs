//! Slow reference implementations used by the test suites and `selftest`.
//!
//! Nothing here shares code paths with the fast implementations beyond the
//! public evaluation primitives (`discriminant`, `stats_from_evals`, the
//! Fisher formulas), so agreement is evidence that enumeration, pruning,
//! threshold fitting and table construction are right.

use std::cmp::Ordering;

use crate::classifier::{
    decide, discriminant, fisher_b, fisher_z, stats_from_evals, ClassStats, Kind, PairClassifier,
    QuantileNeuron, SpectralRange,
};
use crate::spectra::{Sign, Spectrum};

/// k-th smallest by fully sorting a copy.
pub fn quantile_by_sort(values: &[f64], k: usize) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v[k - 1]
}

/// `one_hot(k) . sort_ascending(values)`, computed as an explicit dot product.
pub fn one_hot_dot_sorted(values: &[f64], k: usize) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.iter()
        .enumerate()
        .map(|(i, x)| if i + 1 == k { *x } else { 0.0 * *x })
        .fold(0.0, |acc, t| acc + t)
}

/// Two-pass population mean/variance per class.
pub fn two_pass_stats(evals: &[(f64, Sign)]) -> Option<ClassStats> {
    let class = |want: Sign| -> Option<(f64, f64)> {
        let xs: Vec<f64> = evals.iter().filter(|e| e.1 == want).map(|e| e.0).collect();
        if xs.is_empty() {
            return None;
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        Some((mean, var))
    };
    let (mu1, var1) = class(Sign::Pos)?;
    let (mu2, var2) = class(Sign::Neg)?;
    Some(ClassStats { mu1, mu2, var1, var2 })
}

pub fn count_errors(evals: &[(f64, Sign)], theta: f64) -> usize {
    evals.iter().filter(|(f, s)| decide(*f, theta) != *s).count()
}

/// Every threshold worth trying: below the minimum, each value, and each
/// midpoint between sorted neighbours.
pub fn candidate_thresholds(evals: &[(f64, Sign)]) -> Vec<f64> {
    let mut v: Vec<f64> = evals.iter().map(|e| e.0).collect();
    v.sort_by(f64::total_cmp);
    let mut out = vec![v[0] - 1.0];
    for i in 0..v.len() {
        out.push(v[i]);
        if i + 1 < v.len() {
            out.push(v[i] + (v[i + 1] - v[i]) / 2.0);
        }
    }
    out
}

/// Minimum error count over all thresholds, by exhaustive O(n^2) scan.
pub fn best_threshold_errors(evals: &[(f64, Sign)]) -> usize {
    candidate_thresholds(evals)
        .into_iter()
        .map(|t| count_errors(evals, t))
        .min()
        .unwrap_or(0)
}

/// Objective of one classifier under the search ranking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scored {
    pub errors: usize,
    pub score: f64,
    pub pos: QuantileNeuron,
    pub neg: QuantileNeuron,
}

fn ahead(a: &Scored, b: &Scored) -> bool {
    match a.errors.cmp(&b.errors) {
        Ordering::Less => return true,
        Ordering::Greater => return false,
        Ordering::Equal => {}
    }
    match a.score.total_cmp(&b.score) {
        Ordering::Greater => return true,
        Ordering::Less => return false,
        Ordering::Equal => {}
    }
    let ka = (a.pos.key(), a.neg.key());
    let kb = (b.pos.key(), b.neg.key());
    ka < kb
}

/// Naive quadruple loop over all range pairs and order indices. Returns the
/// best classifier for each maximum width `1..=max_width`.
pub fn brute_force_search(
    train: &[(&Spectrum, Sign)],
    n_points: usize,
    max_width: usize,
    kind: Kind,
) -> Vec<Scored> {
    let mut neurons = Vec::new();
    for i in 1..=n_points {
        for j in i..=n_points {
            if j - i + 1 > max_width {
                continue;
            }
            let r = SpectralRange::new(i, j).unwrap();
            for k in 1..=r.width() {
                neurons.push(QuantileNeuron::new(r, k).unwrap());
            }
        }
    }
    let mut best_exact: Vec<Option<Scored>> = vec![None; max_width + 1];
    for p in &neurons {
        for q in &neurons {
            let c = PairClassifier::z(*p, *q);
            let evals: Vec<(f64, Sign)> = train
                .iter()
                .map(|(s, sign)| (discriminant(&c, s).unwrap(), *sign))
                .collect();
            let stats = stats_from_evals(&evals).unwrap();
            let (errors, score) = match kind {
                Kind::Z => (count_errors(&evals, 0.0), fisher_z(&stats)),
                Kind::B => (best_threshold_errors(&evals), fisher_b(&stats)),
            };
            let cand = Scored {
                errors,
                score,
                pos: *p,
                neg: *q,
            };
            let w = p.width().max(q.width());
            let slot = &mut best_exact[w];
            if slot.is_none_or(|cur| ahead(&cand, &cur)) {
                *slot = Some(cand);
            }
        }
    }
    let mut out = Vec::with_capacity(max_width);
    let mut running: Option<Scored> = None;
    for slot in best_exact.into_iter().skip(1) {
        running = match (running, slot) {
            (Some(a), Some(b)) => Some(if ahead(&b, &a) { b } else { a }),
            (a, None) => a,
            (None, b) => b,
        };
        out.push(running.expect("width 1 always has candidates"));
    }
    out
}

/// Power spectrum `|X_i|^2`, `i = 0..n_out`, by the defining O(n^2) sum.
pub fn naive_dft_power(frame: &[f64], n_out: usize) -> Vec<f64> {
    let n = frame.len() as f64;
    (0..n_out)
        .map(|i| {
            let (mut re, mut im) = (0.0f64, 0.0f64);
            for (t, x) in frame.iter().enumerate() {
                let phase = -2.0 * std::f64::consts::PI * (i as f64) * (t as f64) / n;
                re += x * phase.cos();
                im += x * phase.sin();
            }
            re * re + im * im
        })
        .collect()
}
