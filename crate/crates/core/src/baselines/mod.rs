//! Linear relaxations of quantile classifiers on a fixed pair of ranges.
//!
//! A quantile neuron is `b . sort(r)` with a one-hot `b`. Relaxing `b` gives
//! monotone OWA (non-negative, non-decreasing, sums to one), OWA
//! (non-negative, sums to one) and ordered LDA (unconstrained), all over
//! sorted range values. Plain and balanced LDA use the raw values, balanced
//! LDA with all coefficients of the linear form summing to zero.
//!
//! Scores are `w1 . phi(r1) - w2 . phi(r2)`, i.e. `w . x` with features
//! `x = [phi(r1), -phi(r2)]`, where `phi` sorts ascending for ordered classes.

pub mod lda;
pub mod simplex;

use std::fmt;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::classifier::{
    decide, fisher_b, fit_threshold, stats_from_evals, PairClassifier, QuantileNeuron,
    SpectralRange,
};
use crate::error::{Error, Result};
use crate::spectra::{select_pair, Dataset, PairTask, Sign, Spectrum, Split};

pub use lda::{lda_closed_form, lda_constrained};

const FEASIBILITY_TOL: f64 = 1e-9;
const RESTARTS: u64 = 10;
const RESTART_NOISE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintClass {
    MonotoneOWA,
    OWA,
    OrderedLDA,
    LDA,
    BalancedLDA,
}

impl ConstraintClass {
    /// Whether the class works on ascending-sorted range values.
    pub fn sorted(self) -> bool {
        matches!(
            self,
            ConstraintClass::MonotoneOWA | ConstraintClass::OWA | ConstraintClass::OrderedLDA
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            ConstraintClass::MonotoneOWA => "monotone OWA",
            ConstraintClass::OWA => "OWA",
            ConstraintClass::OrderedLDA => "ordered LDA",
            ConstraintClass::LDA => "LDA",
            ConstraintClass::BalancedLDA => "balanced LDA",
        }
    }

    /// Checks `w1`, `w2` against the class constraints.
    pub fn check(self, w1: &[f64], w2: &[f64]) -> std::result::Result<(), String> {
        let tol = FEASIBILITY_TOL;
        let simplex = |w: &[f64], which: &str| -> std::result::Result<(), String> {
            if let Some(v) = w.iter().find(|v| **v < -tol) {
                return Err(format!("{which} has negative weight {v}"));
            }
            let sum: f64 = w.iter().sum();
            if (sum - 1.0).abs() > tol {
                return Err(format!("{which} sums to {sum}, not 1"));
            }
            Ok(())
        };
        let monotone = |w: &[f64], which: &str| -> std::result::Result<(), String> {
            match w.windows(2).position(|p| p[1] < p[0] - tol) {
                Some(i) => Err(format!("{which} decreases at position {}", i + 1)),
                None => Ok(()),
            }
        };
        if w1.iter().chain(w2).any(|v| !v.is_finite()) {
            return Err("non-finite weight".into());
        }
        match self {
            ConstraintClass::MonotoneOWA => {
                simplex(w1, "w1")?;
                simplex(w2, "w2")?;
                monotone(w1, "w1")?;
                monotone(w2, "w2")
            }
            ConstraintClass::OWA => {
                simplex(w1, "w1")?;
                simplex(w2, "w2")
            }
            ConstraintClass::BalancedLDA => {
                let gap = w1.iter().sum::<f64>() - w2.iter().sum::<f64>();
                if gap.abs() > tol {
                    Err(format!("sum(w1) - sum(w2) = {gap}, not 0"))
                } else {
                    Ok(())
                }
            }
            ConstraintClass::OrderedLDA | ConstraintClass::LDA => Ok(()),
        }
    }
}

impl fmt::Display for ConstraintClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearOrderedModel {
    pub range1: SpectralRange,
    pub range2: SpectralRange,
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
    pub sorted: bool,
    pub theta: f64,
}

impl LinearOrderedModel {
    pub fn weights(&self) -> Vec<f64> {
        self.w1.iter().chain(&self.w2).copied().collect()
    }

    pub fn score(&self, s: &Spectrum) -> Result<f64> {
        let x = feature_vector(s, self)?;
        Ok(dot(&self.weights(), &x))
    }

    pub fn classify(&self, s: &Spectrum) -> Result<Sign> {
        Ok(decide(self.score(s)?, self.theta))
    }

    /// The quantile classifier `q_k1(r1) - q_k2(r2)` as one-hot sorted weights.
    pub fn one_hot(c: &PairClassifier) -> Self {
        let hot = |n: QuantileNeuron| {
            let mut w = vec![0.0; n.width()];
            w[n.order_index() - 1] = 1.0;
            w
        };
        LinearOrderedModel {
            range1: c.pos_neuron().range(),
            range2: c.neg_neuron().range(),
            w1: hot(c.pos_neuron()),
            w2: hot(c.neg_neuron()),
            sorted: true,
            theta: c.theta(),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn features(
    values: &[f64],
    range1: SpectralRange,
    range2: SpectralRange,
    sorted: bool,
) -> Result<Vec<f64>> {
    let mut a = range1.slice(values)?.to_vec();
    let mut b = range2.slice(values)?.to_vec();
    if sorted {
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
    }
    a.extend(b.into_iter().map(|v| -v));
    Ok(a)
}

/// `[phi(range1 values), -phi(range2 values)]`.
pub fn feature_vector(s: &Spectrum, m: &LinearOrderedModel) -> Result<Vec<f64>> {
    features(&s.values, m.range1, m.range2, m.sorted)
}

/// Feature rows for a labeled sample set.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    pub x: DMatrix<f64>,
    pub signs: Vec<Sign>,
    pub range1: SpectralRange,
    pub range2: SpectralRange,
    pub sorted: bool,
}

impl FeatureMatrix {
    pub fn build(
        pairs: &[(&Spectrum, Sign)],
        range1: SpectralRange,
        range2: SpectralRange,
        sorted: bool,
    ) -> Result<Self> {
        let d = range1.width() + range2.width();
        let mut data = Vec::with_capacity(pairs.len() * d);
        for (s, _) in pairs {
            data.extend(features(&s.values, range1, range2, sorted)?);
        }
        Ok(FeatureMatrix {
            x: DMatrix::from_row_slice(pairs.len(), d, &data),
            signs: pairs.iter().map(|p| p.1).collect(),
            range1,
            range2,
            sorted,
        })
    }

    pub fn dim1(&self) -> usize {
        self.range1.width()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn scores(&self, w: &[f64]) -> Vec<f64> {
        let w = DVector::from_column_slice(w);
        (&self.x * w).iter().copied().collect()
    }

    pub fn evals(&self, w: &[f64]) -> Vec<(f64, Sign)> {
        self.scores(w).into_iter().zip(self.signs.iter().copied()).collect()
    }

    /// F_B of the scores `x . w`.
    pub fn fisher(&self, w: &[f64]) -> f64 {
        match stats_from_evals(&self.evals(w)) {
            Ok(st) => fisher_b(&st),
            Err(_) => f64::NAN,
        }
    }

    /// Shift direction: adding `d` to every spectral value moves `x` by `d * c`.
    pub fn loudness_direction(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.dim(),
            (0..self.dim()).map(|i| if i < self.dim1() { 1.0 } else { -1.0 }),
        )
    }
}

enum Block {
    Fixed,
    Simplex(usize),
    Monotone(usize),
}

impl Block {
    fn n_params(&self) -> usize {
        match self {
            Block::Fixed => 0,
            Block::Simplex(d) | Block::Monotone(d) => *d,
        }
    }

    fn weights(&self, p: &[f64], out: &mut Vec<f64>) {
        match self {
            Block::Fixed => out.push(1.0),
            Block::Simplex(d) => {
                let sq: Vec<f64> = p.iter().map(|u| u * u).collect();
                push_normalized(&sq, *d, out);
            }
            Block::Monotone(d) => {
                let mut acc = 0.0;
                let cum: Vec<f64> = p
                    .iter()
                    .map(|u| {
                        acc += u * u;
                        acc
                    })
                    .collect();
                push_normalized(&cum, *d, out);
            }
        }
    }

    fn params(&self, w: &[f64], out: &mut Vec<f64>) {
        match self {
            Block::Fixed => {}
            Block::Simplex(_) => out.extend(w.iter().map(|v| v.max(0.0).sqrt())),
            Block::Monotone(_) => {
                let mut prev = 0.0;
                for &v in w {
                    out.push((v - prev).max(0.0).sqrt());
                    prev = v;
                }
            }
        }
    }
}

fn push_normalized(v: &[f64], d: usize, out: &mut Vec<f64>) {
    let total: f64 = v.iter().sum();
    if total > 0.0 && total.is_finite() {
        out.extend(v.iter().map(|x| x / total));
    } else {
        out.extend(std::iter::repeat_n(1.0 / d as f64, d));
    }
}

/// Reparameterization of a two-block OWA-type weight vector.
struct Param {
    blocks: [Block; 2],
}

impl Param {
    fn new(class: ConstraintClass, d1: usize, d2: usize) -> Self {
        let block = |d: usize| match (class, d) {
            (_, 1) => Block::Fixed,
            (ConstraintClass::MonotoneOWA, d) => Block::Monotone(d),
            (_, d) => Block::Simplex(d),
        };
        Param {
            blocks: [block(d1), block(d2)],
        }
    }

    fn n_params(&self) -> usize {
        self.blocks.iter().map(Block::n_params).sum()
    }

    fn weights(&self, p: &[f64]) -> Vec<f64> {
        let split = self.blocks[0].n_params();
        let mut out = Vec::new();
        self.blocks[0].weights(&p[..split], &mut out);
        self.blocks[1].weights(&p[split..], &mut out);
        out
    }

    fn params(&self, w: &[f64], d1: usize) -> Vec<f64> {
        let mut out = Vec::new();
        self.blocks[0].params(&w[..d1], &mut out);
        self.blocks[1].params(&w[d1..], &mut out);
        out
    }
}

fn simplex_ascent(x: &FeatureMatrix, class: ConstraintClass, init: &[f64]) -> Vec<f64> {
    let d1 = x.dim1();
    let param = Param::new(class, d1, x.dim() - d1);
    let p0 = param.params(init, d1);
    let dim = param.n_params();
    let opts = simplex::SimplexOptions::for_dim(dim);
    let objective = |p: &[f64]| -x.fisher(&param.weights(p));

    let runs: Vec<(f64, u64, Vec<f64>)> = (0..RESTARTS)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let noise = Normal::new(0.0, RESTART_NOISE).expect("valid normal");
            let start: Vec<f64> = p0.iter().map(|v| v + noise.sample(&mut rng)).collect();
            let r = simplex::minimize(objective, &start, &opts);
            let w = param.weights(&r.x);
            (x.fisher(&w), seed, w)
        })
        .collect();

    let mut best = (x.fisher(init), init.to_vec());
    for (f, _, w) in runs {
        if f > best.0 {
            best = (f, w);
        }
    }
    best.1
}

/// Maximizes F_B over the feasible set of `class`, starting from `init`.
/// The returned weights never score below `init`; theta is refit on `x`.
pub fn optimize_constrained(
    x: &FeatureMatrix,
    class: ConstraintClass,
    init: &[f64],
) -> Result<LinearOrderedModel> {
    if x.sorted != class.sorted() {
        return Err(Error::Config(format!(
            "{class} expects {} features",
            if class.sorted() { "sorted" } else { "raw" }
        )));
    }
    if init.len() != x.dim() {
        return Err(Error::Config(format!(
            "init has {} weights, features have {}",
            init.len(),
            x.dim()
        )));
    }
    let d1 = x.dim1();
    class
        .check(&init[..d1], &init[d1..])
        .map_err(|reason| Error::Infeasible {
            class: class.to_string(),
            reason,
        })?;

    let closed = |w: DVector<f64>| -> Vec<f64> {
        let w: Vec<f64> = w.iter().copied().collect();
        if x.fisher(&w) >= x.fisher(init) {
            w
        } else {
            init.to_vec()
        }
    };
    let w = match class {
        ConstraintClass::OrderedLDA | ConstraintClass::LDA => {
            closed(lda_closed_form(&x.x, &x.signs)?)
        }
        ConstraintClass::BalancedLDA => {
            closed(lda_constrained(&x.x, &x.signs, &x.loudness_direction())?)
        }
        ConstraintClass::MonotoneOWA | ConstraintClass::OWA => simplex_ascent(x, class, init),
    };
    let fit = fit_threshold(&x.evals(&w))?;
    Ok(LinearOrderedModel {
        range1: x.range1,
        range2: x.range2,
        w1: w[..d1].to_vec(),
        w2: w[d1..].to_vec(),
        sorted: x.sorted,
        theta: fit.theta,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table2Row {
    pub method: String,
    pub train_err: f64,
    pub test_err: f64,
    pub fisher_train: f64,
    pub fisher_test: f64,
    pub model: LinearOrderedModel,
}

fn evaluate_row(
    method: &str,
    model: LinearOrderedModel,
    train: &[(&Spectrum, Sign)],
    test: &[(&Spectrum, Sign)],
) -> Result<Table2Row> {
    let side = |pairs: &[(&Spectrum, Sign)]| -> Result<(f64, f64)> {
        let mut evals = Vec::with_capacity(pairs.len());
        for (s, sign) in pairs {
            evals.push((model.score(s)?, *sign));
        }
        let wrong = evals
            .iter()
            .filter(|(f, s)| decide(*f, model.theta) != *s)
            .count();
        let fisher = stats_from_evals(&evals).map_or(f64::NAN, |st| fisher_b(&st));
        Ok((wrong as f64 / pairs.len() as f64, fisher))
    };
    let (train_err, fisher_train) = side(train)?;
    let (test_err, fisher_test) = side(test)?;
    Ok(Table2Row {
        method: method.to_string(),
        train_err,
        test_err,
        fisher_train,
        fisher_test,
        model,
    })
}

/// Quantiles, monotone OWA, OWA, ordered LDA, balanced LDA and LDA on one
/// pair of ranges. `range1` feeds the positive side (its maximum is the
/// quantile row's first neuron), `range2` the negative side (its minimum).
/// The three ordered relaxations are warm-started in a chain.
pub fn compare_methods(
    train: &[(&Spectrum, Sign)],
    test: &[(&Spectrum, Sign)],
    range1: SpectralRange,
    range2: SpectralRange,
) -> Result<Vec<Table2Row>> {
    if test.is_empty() {
        return Err(Error::Empty("comparison needs test samples"));
    }
    let sorted = FeatureMatrix::build(train, range1, range2, true)?;
    let raw = FeatureMatrix::build(train, range1, range2, false)?;

    let quantile = PairClassifier::z(QuantileNeuron::max_of(range1), QuantileNeuron::min_of(range2));
    let mut q_model = LinearOrderedModel::one_hot(&quantile);
    q_model.theta = fit_threshold(&sorted.evals(&q_model.weights()))?.theta;

    let monotone = optimize_constrained(&sorted, ConstraintClass::MonotoneOWA, &q_model.weights())?;
    let owa = optimize_constrained(&sorted, ConstraintClass::OWA, &monotone.weights())?;
    let ordered = optimize_constrained(&sorted, ConstraintClass::OrderedLDA, &owa.weights())?;

    let d1 = range1.width();
    let d2 = range2.width();
    let mut uniform = vec![1.0 / d1 as f64; d1];
    uniform.extend(vec![1.0 / d2 as f64; d2]);
    let balanced = optimize_constrained(&raw, ConstraintClass::BalancedLDA, &uniform)?;
    let lda = optimize_constrained(&raw, ConstraintClass::LDA, &uniform)?;

    [
        ("quantiles", q_model),
        (ConstraintClass::MonotoneOWA.name(), monotone),
        (ConstraintClass::OWA.name(), owa),
        (ConstraintClass::OrderedLDA.name(), ordered),
        (ConstraintClass::BalancedLDA.name(), balanced),
        (ConstraintClass::LDA.name(), lda),
    ]
    .into_iter()
    .map(|(name, model)| evaluate_row(name, model, train, test))
    .collect()
}

/// Threshold of the published dcl-iy example classifier.
pub const EXAMPLE_THETA: f64 = 4.03279;

/// One evaluation of a fixed dcl-iy quantile classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct ExampleRow {
    pub label: String,
    pub classifier: PairClassifier,
    pub train_err: f64,
    pub test_err: f64,
    pub fisher_train: f64,
    pub fisher_test: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table2Report {
    pub task: PairTask,
    pub rows: Vec<Table2Row>,
    pub examples: Vec<ExampleRow>,
}

/// The iy-vs-dcl task: `max(s_62..) - s_1 > theta` means iy.
pub fn dcl_iy_task() -> PairTask {
    PairTask::new("iy", "dcl").expect("distinct labels")
}

pub fn example_classifier(end: usize, theta: f64) -> Result<PairClassifier> {
    PairClassifier::b(
        QuantileNeuron::max_of(SpectralRange::new(62, end)?),
        QuantileNeuron::min_of(SpectralRange::new(1, 1)?),
        theta,
    )
}

fn example_row(
    label: &str,
    c: PairClassifier,
    train: &[(&Spectrum, Sign)],
    test: &[(&Spectrum, Sign)],
) -> Result<ExampleRow> {
    let fisher = |pairs: &[(&Spectrum, Sign)]| -> Result<f64> {
        Ok(fisher_b(&crate::classifier::class_stats(&c, pairs)?))
    };
    Ok(ExampleRow {
        label: label.to_string(),
        classifier: c,
        train_err: crate::classifier::error_rate(&c, train)?,
        test_err: crate::classifier::error_rate(&c, test)?,
        fisher_train: fisher(train)?,
        fisher_test: fisher(test)?,
    })
}

/// Six-method comparison on dcl-iy with ranges `{62..72}` and `{1..1}`,
/// plus the example classifier on both `{62..74}` and `{62..72}`.
pub fn table2_run(d: &Dataset) -> Result<Table2Report> {
    let task = dcl_iy_task();
    let train = select_pair(d, &task, Split::Train)?;
    let test = select_pair(d, &task, Split::Test)?;
    let rows = compare_methods(
        &train,
        &test,
        SpectralRange::new(62, 72)?,
        SpectralRange::new(1, 1)?,
    )?;

    let mut examples = Vec::new();
    for end in [74, 72] {
        let fixed = example_classifier(end, EXAMPLE_THETA)?;
        examples.push(example_row(&format!("62..{end} theta={EXAMPLE_THETA}"), fixed, &train, &test)?);
        let evals = crate::classifier::evaluations(&fixed, &train)?;
        let fitted = fixed.with_theta(fit_threshold(&evals)?.theta)?;
        examples.push(example_row(&format!("62..{end} fitted"), fitted, &train, &test)?);
    }
    Ok(Table2Report {
        task,
        rows,
        examples,
    })
}

pub fn write_table2_tsv<W: Write>(mut out: W, rows: &[Table2Row]) -> std::io::Result<()> {
    writeln!(out, "method\ttrain_err\ttest_err\tfisher_train\tfisher_test")?;
    for r in rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            r.method, r.train_err, r.test_err, r.fisher_train, r.fisher_test
        )?;
    }
    Ok(())
}

pub fn write_examples_tsv<W: Write>(mut out: W, rows: &[ExampleRow]) -> std::io::Result<()> {
    writeln!(out, "classifier\ttheta\ttrain_err\ttest_err\tfisher_train\tfisher_test")?;
    for r in rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            r.label,
            r.classifier.theta(),
            r.train_err,
            r.test_err,
            r.fisher_train,
            r.fisher_test
        )?;
    }
    Ok(())
}
