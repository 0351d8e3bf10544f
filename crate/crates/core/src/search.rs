//! Exhaustive search over quantile-pair classifiers.
//!
//! Every neuron `(start, end, k)` with range width at most `L` is tabulated
//! once per training sample. For each width `w = 1..=L` the search visits the
//! pairs whose wider range has width exactly `w` and merges them with the
//! winner for `w - 1`, so `per_width[w]` is optimal over all pairs with both
//! widths `<= w`.
//!
//! Ranking is lexicographic: training errors ascending, Fisher score (F_Z for
//! Z, F_B for B) descending, then `(pos.start, pos.end, pos.k, neg.start,
//! neg.end, neg.k)` ascending. Candidates are pruned only when their error
//! count provably exceeds an error count already achieved, so pruning never
//! changes the winner and the result does not depend on thread scheduling.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{
    self, fisher_b, fisher_z, fit_threshold_sorted, stats_masked, ClassStats, ClassifierRecord, Kind,
    PairClassifier, QuantileNeuron, SpectralRange,
};
use crate::error::{Error, Result};
use crate::spectra::{select_pair, Dataset, PairTask, Sign, Spectrum, Split};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    max_width: usize,
    n_points: usize,
    kind: Kind,
}

impl SearchConfig {
    pub fn new(max_width: usize, n_points: usize, kind: Kind) -> Result<Self> {
        if max_width == 0 || max_width > n_points {
            return Err(Error::Config(format!(
                "max width {max_width} must lie in 1..={n_points}"
            )));
        }
        Ok(SearchConfig {
            max_width,
            n_points,
            kind,
        })
    }

    pub fn max_width(&self) -> usize {
        self.max_width
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }
}

/// `sum_{w=1..L} (N - w + 1) * w`.
pub fn neuron_count(n_points: usize, max_width: usize) -> usize {
    (1..=max_width.min(n_points))
        .map(|w| (n_points - w + 1) * w)
        .sum()
}

/// All neurons with width `<= max_width`, in `(start, end, k)` order.
pub fn enumerate_neurons(
    n_points: usize,
    max_width: usize,
) -> impl Iterator<Item = QuantileNeuron> {
    (1..=n_points).flat_map(move |start| {
        let last = (start + max_width - 1).min(n_points);
        (start..=last).flat_map(move |end| {
            let range = SpectralRange::new(start, end).expect("start <= end");
            (1..=range.width())
                .map(move |k| QuantileNeuron::new(range, k).expect("k within width"))
        })
    })
}

/// Winner for one maximum width.
#[derive(Debug, Clone, PartialEq)]
pub struct WidthResult {
    pub width: usize,
    pub best: PairClassifier,
    pub train_errors: usize,
    pub train_error: f64,
    pub test_error: f64,
    pub fisher_train: f64,
    pub fisher_test: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchReport {
    pub kind: Kind,
    pub per_width: Vec<WidthResult>,
    pub candidates_evaluated: u64,
}

impl SearchReport {
    pub fn at_width(&self, w: usize) -> Option<&WidthResult> {
        self.per_width.get(w.checked_sub(1)?)
    }

    pub fn last(&self) -> &WidthResult {
        self.per_width.last().expect("report has at least one width")
    }
}

/// Neuron responses, one contiguous row of training-sample values per neuron.
struct ResponseTable {
    neurons: Vec<QuantileNeuron>,
    by_width: Vec<Vec<u32>>,
    n_samples: usize,
    data: Vec<f64>,
}

impl ResponseTable {
    fn build(train: &[(&Spectrum, Sign)], cfg: &SearchConfig) -> Self {
        let neurons: Vec<QuantileNeuron> =
            enumerate_neurons(cfg.n_points, cfg.max_width).collect();
        let mut by_width = vec![Vec::new(); cfg.max_width + 1];
        for (i, n) in neurons.iter().enumerate() {
            by_width[n.width()].push(i as u32);
        }
        let n_samples = train.len();
        let mut data = vec![0.0f64; neurons.len() * n_samples];
        let mut window: Vec<f64> = Vec::with_capacity(cfg.max_width);
        for (j, (s, _)) in train.iter().enumerate() {
            let mut idx = 0usize;
            for start in 0..cfg.n_points {
                window.clear();
                let last = (start + cfg.max_width).min(cfg.n_points);
                for end in start..last {
                    let v = s.values[end];
                    let at = window.partition_point(|x| x.total_cmp(&v) == Ordering::Less);
                    window.insert(at, v);
                    for &q in &window {
                        data[idx * n_samples + j] = q;
                        idx += 1;
                    }
                }
            }
            debug_assert_eq!(idx, neurons.len());
        }
        ResponseTable {
            neurons,
            by_width,
            n_samples,
            data,
        }
    }

    fn row(&self, i: u32) -> &[f64] {
        let i = i as usize;
        &self.data[i * self.n_samples..(i + 1) * self.n_samples]
    }

}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    errors: usize,
    score: f64,
    theta: f64,
    pos: u32,
    neg: u32,
}

/// `Less` means `a` ranks ahead of `b`.
fn rank(a: &Candidate, b: &Candidate) -> Ordering {
    a.errors
        .cmp(&b.errors)
        .then_with(|| b.score.total_cmp(&a.score))
        .then_with(|| (a.pos, a.neg).cmp(&(b.pos, b.neg)))
}

fn better(a: Option<Candidate>, b: Option<Candidate>) -> Option<Candidate> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if rank(&x, &y) == Ordering::Greater { y } else { x }),
        (x, None) => x,
        (None, y) => y,
    }
}

const BLOCK: usize = 32;
const BINS: usize = 128;
const CHECK_EVERY: usize = 64;

/// Partition of the real line into `BINS` cells: equal cells over
/// `[lo, lo + span)`, with the outer cells extended to infinity.
struct Bins {
    lo: f64,
    inv_width: f64,
}

impl Bins {
    fn fitted(values: &[f64]) -> Self {
        let (lo, hi) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let span = hi - lo;
        let span = if span > 0.0 && span.is_finite() { span } else { 1.0 };
        Bins {
            lo,
            inv_width: BINS as f64 / span,
        }
    }

    #[inline]
    fn index(&self, f: f64) -> usize {
        // NaN-free input; `as` saturates, so only the top needs clamping
        let t = ((f - self.lo) * self.inv_width) as usize;
        t.min(BINS - 1)
    }
}

/// For any threshold inside cell `b`, positives in lower cells and negatives
/// in higher cells are misclassified. The minimum over `b` bounds the best
/// error. `counts[2 b]` holds negatives of cell `b`, `counts[2 b + 1]`
/// positives.
fn bin_lower_bound(counts: &[u32; 2 * BINS]) -> usize {
    let mut neg_above: u32 = counts.iter().step_by(2).sum();
    let mut pos_below = 0u32;
    let mut best = u32::MAX;
    for cell in counts.chunks_exact(2) {
        neg_above -= cell[0];
        best = best.min(pos_below + neg_above);
        pos_below += cell[1];
    }
    best as usize
}

struct Scratch {
    evals: Vec<f64>,
    pairs: Vec<(f64, bool)>,
}

struct Context<'a> {
    table: &'a ResponseTable,
    is_pos: &'a [bool],
    /// Smaller class count among the first `CHECK_EVERY * (c + 1)` samples.
    min_seen: Vec<usize>,
    kind: Kind,
}

impl Context<'_> {
    fn evaluate(&self, pos: u32, neg: u32, bound: usize, scratch: &mut Scratch) -> Option<Candidate> {
        match self.kind {
            Kind::Z => self.evaluate_z(pos, neg, bound, scratch),
            Kind::B => self.evaluate_b(pos, neg, bound, scratch),
        }
    }

    fn evaluate_z(&self, pos: u32, neg: u32, bound: usize, scratch: &mut Scratch) -> Option<Candidate> {
        let a = self.table.row(pos);
        let b = self.table.row(neg);
        let mut errors = 0usize;
        for ((ca, cb), cp) in a
            .chunks(BLOCK)
            .zip(b.chunks(BLOCK))
            .zip(self.is_pos.chunks(BLOCK))
        {
            for ((x, y), p) in ca.iter().zip(cb).zip(cp) {
                errors += ((x - y > 0.0) != *p) as usize;
            }
            if errors > bound {
                return None;
            }
        }
        scratch.evals.clear();
        scratch.evals.extend(a.iter().zip(b).map(|(x, y)| x - y));
        let stats = stats_masked(&scratch.evals, self.is_pos)?;
        Some(Candidate {
            errors,
            score: fisher_z(&stats),
            theta: 0.0,
            pos,
            neg,
        })
    }

    fn evaluate_b(&self, pos: u32, neg: u32, bound: usize, scratch: &mut Scratch) -> Option<Candidate> {
        let a = self.table.row(pos);
        let b = self.table.row(neg);
        let mut counts = [0u32; 2 * BINS];
        let mut bins: Option<Bins> = None;
        scratch.evals.clear();
        for (chunk, ((ca, cb), cp)) in a
            .chunks(CHECK_EVERY)
            .zip(b.chunks(CHECK_EVERY))
            .zip(self.is_pos.chunks(CHECK_EVERY))
            .enumerate()
        {
            let start = scratch.evals.len();
            scratch.evals.extend(ca.iter().zip(cb).map(|(x, y)| x - y));
            // cells fitted to the first block; any partition gives a valid bound
            let bins = bins.get_or_insert_with(|| Bins::fitted(&scratch.evals));
            for (f, p) in scratch.evals[start..].iter().zip(cp) {
                counts[2 * bins.index(*f) + *p as usize] += 1;
            }
            // the bound never exceeds the smaller class count seen so far
            if self.min_seen[chunk] > bound && bin_lower_bound(&counts) > bound {
                return None;
            }
        }
        scratch.pairs.clear();
        scratch
            .pairs
            .extend(scratch.evals.iter().copied().zip(self.is_pos.iter().copied()));
        let fit = fit_threshold_sorted(&mut scratch.pairs);
        if fit.errors > bound {
            return None;
        }
        let stats = stats_masked(&scratch.evals, self.is_pos)?;
        Some(Candidate {
            errors: fit.errors,
            score: fisher_b(&stats),
            theta: fit.theta,
            pos,
            neg,
        })
    }

    /// Best candidate among pairs whose wider range has width exactly `w`.
    fn width_pass(&self, w: usize, incumbent: Option<Candidate>) -> Option<Candidate> {
        let bound = AtomicUsize::new(incumbent.map_or(usize::MAX, |c| c.errors));
        let exact = &self.table.by_width[w];
        let all_up_to: Vec<u32> = self.table.by_width[1..=w].iter().flatten().copied().collect();

        let mut jobs: Vec<(u32, &[u32])> = Vec::with_capacity(all_up_to.len());
        for &p in &all_up_to {
            let negs: &[u32] = if self.table.neurons[p as usize].width() == w {
                &all_up_to
            } else {
                exact
            };
            jobs.push((p, negs));
        }

        jobs.par_iter()
            .map_init(
                || Scratch {
                    evals: Vec::with_capacity(self.table.n_samples),
                    pairs: Vec::with_capacity(self.table.n_samples),
                },
                |scratch, &(p, negs)| {
                    let mut local: Option<Candidate> = None;
                    for &q in negs {
                        let limit = bound
                            .load(AtomicOrdering::Relaxed)
                            .min(local.map_or(usize::MAX, |c| c.errors));
                        if let Some(c) = self.evaluate(p, q, limit, scratch) {
                            bound.fetch_min(c.errors, AtomicOrdering::Relaxed);
                            local = better(local, Some(c));
                        }
                    }
                    local
                },
            )
            .reduce(|| None, better)
    }
}

fn clamp_fisher(kind: Kind, stats: Option<ClassStats>) -> f64 {
    match stats {
        Some(st) => match kind {
            Kind::Z => fisher_z(&st),
            Kind::B => fisher_b(&st),
        },
        None => f64::NAN,
    }
}

/// Stable merge of the two classes so that every prefix holds them in
/// roughly their overall proportion. Early pruning relies on this.
fn interleave<'a>(train: &[(&'a Spectrum, Sign)]) -> Vec<(&'a Spectrum, Sign)> {
    let (pos, neg): (Vec<_>, Vec<_>) = train.iter().copied().partition(|p| p.1.is_pos());
    let mut out = Vec::with_capacity(train.len());
    let (mut i, mut j) = (0, 0);
    while i < pos.len() || j < neg.len() {
        // compare (i + 1) / |pos| with (j + 1) / |neg|
        let take_pos = j == neg.len()
            || (i < pos.len() && (i + 1) * neg.len() <= (j + 1) * pos.len());
        if take_pos {
            out.push(pos[i]);
            i += 1;
        } else {
            out.push(neg[j]);
            j += 1;
        }
    }
    out
}

/// Exhaustive search for the best classifier at each maximum width `1..=L`.
/// Test samples are only used to score the winners.
pub fn search_best(
    train: &[(&Spectrum, Sign)],
    test: &[(&Spectrum, Sign)],
    cfg: &SearchConfig,
) -> Result<SearchReport> {
    if !train.iter().any(|p| p.1.is_pos()) || !train.iter().any(|p| !p.1.is_pos()) {
        return Err(Error::Empty("search needs training samples of both classes"));
    }
    if test.is_empty() {
        return Err(Error::Empty("search needs at least one test sample"));
    }
    for (s, _) in train.iter().chain(test) {
        if s.len() != cfg.n_points {
            return Err(Error::Config(format!(
                "sample {:?} has {} points, search expects {}",
                s.sample_id,
                s.len(),
                cfg.n_points
            )));
        }
    }

    let train = interleave(train);
    let table = ResponseTable::build(&train, cfg);
    let is_pos: Vec<bool> = train.iter().map(|p| p.1.is_pos()).collect();
    let min_seen = is_pos
        .chunks(CHECK_EVERY)
        .scan((0usize, 0usize), |(p, n), chunk| {
            let k = chunk.iter().filter(|x| **x).count();
            *p += k;
            *n += chunk.len() - k;
            Some((*p).min(*n))
        })
        .collect();
    let ctx = Context {
        table: &table,
        is_pos: &is_pos,
        min_seen,
        kind: cfg.kind,
    };

    let mut per_width = Vec::with_capacity(cfg.max_width);
    let mut incumbent: Option<Candidate> = None;
    for w in 1..=cfg.max_width {
        incumbent = better(incumbent, ctx.width_pass(w, incumbent));
        let winner = incumbent.expect("width-1 pass always yields a candidate");
        per_width.push(finish(&ctx, winner, w, train.len(), test)?);
    }
    let n = table.neurons.len() as u64;
    Ok(SearchReport {
        kind: cfg.kind,
        per_width,
        candidates_evaluated: n * n,
    })
}

fn finish(
    ctx: &Context<'_>,
    c: Candidate,
    width: usize,
    n_train: usize,
    test: &[(&Spectrum, Sign)],
) -> Result<WidthResult> {
    let pos = ctx.table.neurons[c.pos as usize];
    let neg = ctx.table.neurons[c.neg as usize];
    let best = PairClassifier::new(pos, neg, c.theta, ctx.kind)?;
    let evals = classifier::evaluations(&best, test)?;
    let test_stats = classifier::stats_from_evals(&evals).ok();
    Ok(WidthResult {
        width,
        best,
        train_errors: c.errors,
        train_error: c.errors as f64 / n_train as f64,
        test_error: classifier::error_rate(&best, test)?,
        fisher_train: c.score,
        fisher_test: clamp_fisher(ctx.kind, test_stats),
    })
}

/// Searches every unordered class pair, named alphabetically (first = positive).
pub fn pairwise_sweep(
    d: &Dataset,
    kind: Kind,
    max_width: usize,
) -> Result<BTreeMap<PairTask, SearchReport>> {
    let labels = d.labels();
    if labels.len() < 2 {
        return Err(Error::Config("pairwise sweep needs at least two classes".into()));
    }
    let cfg = SearchConfig::new(max_width, d.n_points(), kind)?;
    let mut out = BTreeMap::new();
    for (i, a) in labels.iter().enumerate() {
        for b in &labels[i + 1..] {
            let task = PairTask::new(*a, *b)?;
            let train = select_pair(d, &task, Split::Train)?;
            let test = select_pair(d, &task, Split::Test)?;
            let report = search_best(&train, &test, &cfg)?;
            out.insert(task, report);
        }
    }
    Ok(out)
}

pub const REPORT_HEADER: [&str; 14] = [
    "pair",
    "kind",
    "width",
    "pos_start",
    "pos_end",
    "pos_k",
    "neg_start",
    "neg_end",
    "neg_k",
    "theta",
    "train_err",
    "test_err",
    "fisher_train",
    "fisher_test",
];

/// One TSV row per (pair, width).
pub fn write_report_tsv<'a, W: Write>(
    mut out: W,
    reports: impl IntoIterator<Item = (&'a PairTask, &'a SearchReport)>,
) -> std::io::Result<()> {
    writeln!(out, "{}", REPORT_HEADER.join("\t"))?;
    for (task, report) in reports {
        for r in &report.per_width {
            let (p, n) = (r.best.pos_neuron(), r.best.neg_neuron());
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                task.name(),
                report.kind,
                r.width,
                p.range().start(),
                p.range().end(),
                p.order_index(),
                n.range().start(),
                n.range().end(),
                n.order_index(),
                r.best.theta(),
                r.train_error,
                r.test_error,
                r.fisher_train,
                r.fisher_test,
            )?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinnerRecord {
    pub width: usize,
    pub train_errors: usize,
    pub classifier: ClassifierRecord,
}

pub fn winner_records(task: &PairTask, report: &SearchReport) -> Vec<WinnerRecord> {
    report
        .per_width
        .iter()
        .map(|r| WinnerRecord {
            width: r.width,
            train_errors: r.train_errors,
            classifier: r.best.to_record(task),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neuron_counts() {
        assert_eq!(enumerate_neurons(3, 1).count(), 3);
        assert_eq!(enumerate_neurons(3, 2).count(), 7);
        assert_eq!(neuron_count(3, 2), 7);
        let mut brute = 0;
        for start in 1..=256usize {
            for end in start..=256 {
                if end - start < 12 {
                    brute += end - start + 1;
                }
            }
        }
        assert_eq!(neuron_count(256, 12), brute);
        assert_eq!(enumerate_neurons(256, 12).count(), brute);
    }

    #[test]
    fn enumeration_is_lexicographic_and_unique() {
        let all: Vec<_> = enumerate_neurons(9, 4).map(|n| n.key()).collect();
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert!(all.iter().all(|&(s, e, k)| e - s < 4 && k >= 1 && k <= e - s + 1));
    }

    #[test]
    fn config_bounds() {
        assert!(SearchConfig::new(0, 5, Kind::Z).is_err());
        assert!(SearchConfig::new(6, 5, Kind::Z).is_err());
        assert!(SearchConfig::new(5, 5, Kind::B).is_ok());
    }

    fn cells(pos: &[(usize, u32)], neg: &[(usize, u32)]) -> [u32; 2 * BINS] {
        let mut c = [0u32; 2 * BINS];
        for &(b, n) in neg {
            c[2 * b] = n;
        }
        for &(b, n) in pos {
            c[2 * b + 1] = n;
        }
        c
    }

    #[test]
    fn lower_bound_matches_simple_cases() {
        assert_eq!(bin_lower_bound(&cells(&[(10, 4)], &[(3, 5)])), 0);
        // pos 2 @1, neg 5 @3, pos 4 @10, neg 3 @20: best cut misses 2 + 3
        assert_eq!(bin_lower_bound(&cells(&[(1, 2), (10, 4)], &[(3, 5), (20, 3)])), 5);
        // shared cell: both placements inside it are possible
        assert_eq!(bin_lower_bound(&cells(&[(7, 3)], &[(7, 3)])), 0);
    }

    #[test]
    fn bin_index_clamps() {
        let b = Bins::fitted(&[0.0, 1.0]);
        assert_eq!(b.index(-5.0), 0);
        assert_eq!(b.index(0.0), 0);
        assert_eq!(b.index(0.5), BINS / 2);
        assert_eq!(b.index(1.0), BINS - 1);
        assert_eq!(b.index(1e300), BINS - 1);
        let flat = Bins::fitted(&[2.0, 2.0]);
        assert_eq!(flat.index(2.0), 0);
    }
}
