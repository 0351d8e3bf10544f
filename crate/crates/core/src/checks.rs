//! Randomized equivalence and invariant suites shared by `selftest` and the
//! acceptance tests. Each suite draws from a seeded ChaCha stream and counts
//! mismatches against a reference computation.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classifier::{
    classify, discriminant, fit_threshold, to_netlist, Kind, PairClassifier, QuantileNeuron,
    SpectralRange,
};
use crate::oracle;
use crate::search::{search_best, SearchConfig};
use crate::spectra::{shift_loudness, Sign, Spectrum, Split};

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub trials: usize,
    pub mismatches: usize,
    /// First mismatch, if any.
    pub detail: Option<String>,
}

impl SuiteOutcome {
    fn new(name: &'static str) -> Self {
        SuiteOutcome {
            name,
            trials: 0,
            mismatches: 0,
            detail: None,
        }
    }

    fn record(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.trials += 1;
        if !ok {
            self.mismatches += 1;
            if self.detail.is_none() {
                self.detail = Some(detail());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.mismatches == 0 && self.trials > 0
    }
}

/// Values on a coarse grid half the time so that ties are common.
fn random_values(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let coarse = rng.random_bool(0.5);
    (0..n)
        .map(|_| {
            let v: f64 = rng.random_range(-3.0..3.0);
            if coarse {
                (v * 2.0).round() / 2.0
            } else {
                v
            }
        })
        .collect()
}

pub fn random_neuron(rng: &mut ChaCha8Rng, n_points: usize, max_width: usize) -> QuantileNeuron {
    let width = rng.random_range(1..=max_width.min(n_points));
    let start = rng.random_range(1..=n_points - width + 1);
    let k = rng.random_range(1..=width);
    QuantileNeuron::span(start, start + width - 1, k).expect("drawn in bounds")
}

pub fn random_classifier(rng: &mut ChaCha8Rng, n_points: usize, max_width: usize) -> PairClassifier {
    let pos = random_neuron(rng, n_points, max_width);
    let neg = random_neuron(rng, n_points, max_width);
    if rng.random_bool(0.5) {
        PairClassifier::z(pos, neg)
    } else {
        PairClassifier::b(pos, neg, rng.random_range(-2.0..2.0)).expect("finite theta")
    }
}

fn labeled(rng: &mut ChaCha8Rng, n_points: usize, n: usize, split: Split) -> Vec<(Spectrum, Sign)> {
    let mut out: Vec<(Spectrum, Sign)> = (0..n)
        .map(|i| {
            let sign = if i % 2 == 0 { Sign::Pos } else { Sign::Neg };
            let mut values = random_values(rng, n_points);
            // a weak class signal so winners are not pure noise
            if sign.is_pos() {
                let bump = rng.random_range(0..n_points);
                values[bump] += 1.0;
            }
            (Spectrum::new(values, "x", split), sign)
        })
        .collect();
    out.shuffle(rng);
    out
}

/// Exhaustive search against the naive quadruple loop, per width.
pub fn search_equivalence(instances: usize, seed: u64) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("search_best vs brute force");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for inst in 0..instances {
        let n_points = rng.random_range(2..=16);
        let max_width = rng.random_range(1..=4.min(n_points));
        let n_train = rng.random_range(4..=30);
        let kind = if inst % 2 == 0 { Kind::Z } else { Kind::B };
        let train = labeled(&mut rng, n_points, n_train, Split::Train);
        let test = labeled(&mut rng, n_points, 6, Split::Test);
        let train_ref: Vec<(&Spectrum, Sign)> = train.iter().map(|(s, g)| (s, *g)).collect();
        let test_ref: Vec<(&Spectrum, Sign)> = test.iter().map(|(s, g)| (s, *g)).collect();

        let cfg = SearchConfig::new(max_width, n_points, kind).expect("valid config");
        let fast = search_best(&train_ref, &test_ref, &cfg).expect("search runs");
        let slow = oracle::brute_force_search(&train_ref, n_points, max_width, kind);
        for (w, (f, s)) in fast.per_width.iter().zip(&slow).enumerate() {
            let same_score = f.fisher_train == s.score
                || (f.fisher_train - s.score).abs() <= 1e-12 * s.score.abs().max(1.0);
            out.record(f.train_errors == s.errors && same_score, || {
                format!(
                    "instance {inst} ({kind}, N={n_points}, L={max_width}) width {}: \
                     fast ({} errors, {}) vs brute force ({} errors, {})",
                    w + 1,
                    f.train_errors,
                    f.fisher_train,
                    s.errors,
                    s.score
                )
            });
        }
    }
    out
}

/// `fit_threshold` against the exhaustive threshold scan.
pub fn threshold_equivalence(sets: usize, seed: u64) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("fit_threshold vs exhaustive scan");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for set in 0..sets {
        let n = rng.random_range(2..=200);
        let mut evals: Vec<(f64, Sign)> = random_values(&mut rng, n)
            .into_iter()
            .map(|v| (v, if rng.random_bool(0.5) { Sign::Pos } else { Sign::Neg }))
            .collect();
        evals[0].1 = Sign::Pos;
        evals[1].1 = Sign::Neg;
        let fit = fit_threshold(&evals).expect("both classes present");
        let best = oracle::best_threshold_errors(&evals);
        let realized = oracle::count_errors(&evals, fit.theta);
        out.record(fit.errors == best && realized == best, || {
            format!(
                "set {set} (n={n}): fit reports {} errors, realizes {realized}, scan finds {best}",
                fit.errors
            )
        });
    }
    out
}

/// `f(s + d) == f(s)` within `1e-9`.
pub fn loudness_invariance(trials: usize, seed: u64) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("loudness shift invariance");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in 0..trials {
        let n = rng.random_range(1..=64);
        let c = random_classifier(&mut rng, n, 16);
        let s = Spectrum::new(random_values(&mut rng, n), "x", Split::Test);
        let d = rng.random_range(-100.0..100.0);
        let a = discriminant(&c, &s).expect("in range");
        let b = discriminant(&c, &shift_loudness(&s, d)).expect("in range");
        out.record((a - b).abs() <= 1e-9, || {
            format!("trial {t}: f(s) = {a}, f(s + {d}) = {b}")
        });
    }
    out
}

/// Shuffles each maximal segment that lies wholly inside or outside each of
/// the two ranges, which permutes both ranges at once even when they overlap.
fn shuffle_within(rng: &mut ChaCha8Rng, values: &mut [f64], r1: SpectralRange, r2: SpectralRange) {
    let mut cuts = vec![r1.start() - 1, r1.end(), r2.start() - 1, r2.end()];
    cuts.sort_unstable();
    cuts.dedup();
    for w in cuts.windows(2) {
        values[w[0]..w[1]].shuffle(rng);
    }
}

/// Permuting values inside both ranges leaves `f` bit-identical.
pub fn permutation_invariance(trials: usize, seed: u64) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("in-range permutation invariance");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in 0..trials {
        let n = rng.random_range(1..=64);
        let c = random_classifier(&mut rng, n, 16);
        let s = Spectrum::new(random_values(&mut rng, n), "x", Split::Test);
        let mut p = s.clone();
        shuffle_within(&mut rng, &mut p.values, c.pos_neuron().range(), c.neg_neuron().range());
        let a = discriminant(&c, &s).expect("in range");
        let b = discriminant(&c, &p).expect("in range");
        out.record(a.to_bits() == b.to_bits(), || format!("trial {t}: {a} vs {b}"));
    }
    out
}

/// A quantile neuron equals the one-hot dot product with the sorted range.
pub fn one_hot_equivalence(trials: usize, seed: u64) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("one-hot sort equivalence");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in 0..trials {
        let n = rng.random_range(1..=64);
        let q = random_neuron(&mut rng, n, 16);
        let values = random_values(&mut rng, n);
        let a = q.respond(&values).expect("in range");
        let slice = q.range().slice(&values).expect("in range");
        let b = oracle::one_hot_dot_sorted(slice, q.order_index());
        let c = oracle::quantile_by_sort(slice, q.order_index());
        out.record(a == b && a == c, || {
            format!("trial {t}: neuron {a}, one-hot {b}, sorted {c}")
        });
    }
    out
}

/// Netlist simulation agrees with direct classification.
pub fn netlist_equivalence(spectra: usize, seed: u64) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("netlist simulation vs classify");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in 0..spectra {
        let n = rng.random_range(1..=32);
        let mut c = random_classifier(&mut rng, n, 12);
        let s = Spectrum::new(random_values(&mut rng, n), "x", Split::Test);
        // put theta exactly on f now and then to exercise the tie rule
        if t % 10 == 0 {
            let f = discriminant(&c, &s).expect("in range");
            c = PairClassifier::b(c.pos_neuron(), c.neg_neuron(), f).expect("finite");
        }
        let net = to_netlist(&c);
        let direct = classify(&c, &s).expect("in range");
        let simulated = net.validate().and_then(|_| net.simulate(&s.values));
        out.record(simulated.as_ref().ok() == Some(&direct), || {
            format!("spectrum {t}: classify {direct:?}, netlist {simulated:?}")
        });
    }
    out
}

/// The suites run by `selftest`, at the acceptance sizes.
pub fn all_suites(seed: u64) -> Vec<SuiteOutcome> {
    vec![
        search_equivalence(50, seed),
        threshold_equivalence(200, seed + 1),
        loudness_invariance(1000, seed + 2),
        permutation_invariance(1000, seed + 3),
        one_hot_equivalence(1000, seed + 4),
        netlist_equivalence(500, seed + 5),
    ]
}
