//! Quantile-pair discriminants `f(s) = q1(r1) - q2(r2)` and their evaluation.
//!
//! Order statistics use the ascending convention throughout: inside a range
//! of width `w`, `k = 1` is the minimum and `k = w` the maximum.

mod fisher;
pub mod netlist;
mod threshold;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::{PairTask, Sign, Spectrum};

pub use fisher::{class_stats, fisher_b, fisher_z, stats_from_evals, ClassStats};
pub use netlist::{to_netlist, Netlist, Node, Op};
pub use threshold::{fit_threshold, ThresholdFit};
pub(crate) use fisher::stats_masked;
pub(crate) use threshold::fit_threshold_sorted;

/// Contiguous run of spectral points `s_start ..= s_end`, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpectralRange {
    start: usize,
    end: usize,
}

impl SpectralRange {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if start == 0 || end < start {
            return Err(Error::InvalidRange { start, end });
        }
        Ok(SpectralRange { start, end })
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.end
    }

    pub fn width(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn fits(&self, n_points: usize) -> bool {
        self.end <= n_points
    }

    /// The values `s_start ..= s_end` of a spectrum.
    pub fn slice<'a>(&self, values: &'a [f64]) -> Result<&'a [f64]> {
        if !self.fits(values.len()) {
            return Err(Error::RangeOutOfBounds {
                start: self.start,
                end: self.end,
                len: values.len(),
            });
        }
        Ok(&values[self.start - 1..self.end])
    }
}

impl fmt::Display for SpectralRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

/// k-th smallest element of `values` (1-based `k`).
pub fn quantile(values: &[f64], k: usize) -> Result<f64> {
    if k == 0 || k > values.len() {
        return Err(Error::OrderIndex {
            k,
            width: values.len(),
        });
    }
    let mut buf = values.to_vec();
    let (_, kth, _) = buf.select_nth_unstable_by(k - 1, f64::total_cmp);
    Ok(*kth)
}

/// A neuron responding with the `k`-th order statistic of its range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuantileNeuron {
    range: SpectralRange,
    k: usize,
}

impl QuantileNeuron {
    pub fn new(range: SpectralRange, k: usize) -> Result<Self> {
        if k == 0 || k > range.width() {
            return Err(Error::OrderIndex {
                k,
                width: range.width(),
            });
        }
        Ok(QuantileNeuron { range, k })
    }

    /// Shorthand for `new(SpectralRange::new(start, end)?, k)`.
    pub fn span(start: usize, end: usize, k: usize) -> Result<Self> {
        QuantileNeuron::new(SpectralRange::new(start, end)?, k)
    }

    pub fn max_of(range: SpectralRange) -> Self {
        QuantileNeuron {
            range,
            k: range.width(),
        }
    }

    pub fn min_of(range: SpectralRange) -> Self {
        QuantileNeuron { range, k: 1 }
    }

    pub fn range(&self) -> SpectralRange {
        self.range
    }

    pub fn order_index(&self) -> usize {
        self.k
    }

    pub fn width(&self) -> usize {
        self.range.width()
    }

    /// Lexicographic key `(start, end, k)`.
    pub fn key(&self) -> (usize, usize, usize) {
        (self.range.start, self.range.end, self.k)
    }

    pub fn respond(&self, values: &[f64]) -> Result<f64> {
        quantile(self.range.slice(values)?, self.k)
    }
}

impl fmt::Display for QuantileNeuron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}[{}]", self.k, self.range)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    Z,
    B,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Z => "Z",
            Kind::B => "B",
        })
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Z" | "z" => Ok(Kind::Z),
            "B" | "b" => Ok(Kind::B),
            other => Err(Error::Config(format!("kind must be Z or B, got {other:?}"))),
        }
    }
}

/// Two quantile neurons feeding a comparator: `+1` iff `f(s) > theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairClassifier {
    pos: QuantileNeuron,
    neg: QuantileNeuron,
    theta: f64,
    kind: Kind,
}

impl PairClassifier {
    pub fn z(pos: QuantileNeuron, neg: QuantileNeuron) -> Self {
        PairClassifier {
            pos,
            neg,
            theta: 0.0,
            kind: Kind::Z,
        }
    }

    pub fn b(pos: QuantileNeuron, neg: QuantileNeuron, theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::InvalidClassifier(format!("threshold {theta} is not finite")));
        }
        Ok(PairClassifier {
            pos,
            neg,
            theta,
            kind: Kind::B,
        })
    }

    pub fn new(pos: QuantileNeuron, neg: QuantileNeuron, theta: f64, kind: Kind) -> Result<Self> {
        match kind {
            Kind::Z if theta != 0.0 => Err(Error::InvalidClassifier(format!(
                "Z-classifier requires theta = 0, got {theta}"
            ))),
            Kind::Z => Ok(PairClassifier::z(pos, neg)),
            Kind::B => PairClassifier::b(pos, neg, theta),
        }
    }

    pub fn pos_neuron(&self) -> QuantileNeuron {
        self.pos
    }

    pub fn neg_neuron(&self) -> QuantileNeuron {
        self.neg
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    /// Largest spectral index the classifier reads.
    pub fn max_index(&self) -> usize {
        self.pos.range.end.max(self.neg.range.end)
    }

    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        PairClassifier::b(self.pos, self.neg, theta)
    }

    pub fn to_record(&self, task: &PairTask) -> ClassifierRecord {
        ClassifierRecord {
            pos: self.pos.into(),
            neg: self.neg.into(),
            theta: self.theta,
            kind: self.kind,
            pair: [task.pos().to_string(), task.neg().to_string()],
        }
    }
}

/// `q_pos(r_pos) - q_neg(r_neg)` on `values`.
pub fn discriminant_values(c: &PairClassifier, values: &[f64]) -> Result<f64> {
    Ok(c.pos.respond(values)? - c.neg.respond(values)?)
}

pub fn discriminant(c: &PairClassifier, s: &Spectrum) -> Result<f64> {
    discriminant_values(c, &s.values)
}

/// Decision for a discriminant value; `f == theta` goes to `Neg`.
pub fn decide(f: f64, theta: f64) -> Sign {
    if f > theta {
        Sign::Pos
    } else {
        Sign::Neg
    }
}

pub fn classify(c: &PairClassifier, s: &Spectrum) -> Result<Sign> {
    Ok(decide(discriminant(c, s)?, c.theta))
}

/// Fraction of misclassified samples.
pub fn error_rate(c: &PairClassifier, pairs: &[(&Spectrum, Sign)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Empty("error_rate needs at least one sample"));
    }
    let mut wrong = 0usize;
    for (s, sign) in pairs {
        if classify(c, s)? != *sign {
            wrong += 1;
        }
    }
    Ok(wrong as f64 / pairs.len() as f64)
}

/// Discriminant evaluations paired with their labels.
pub fn evaluations(c: &PairClassifier, pairs: &[(&Spectrum, Sign)]) -> Result<Vec<(f64, Sign)>> {
    pairs
        .iter()
        .map(|(s, sign)| Ok((discriminant(c, s)?, *sign)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeuronRecord {
    pub start: usize,
    pub end: usize,
    pub k: usize,
}

impl From<QuantileNeuron> for NeuronRecord {
    fn from(n: QuantileNeuron) -> Self {
        NeuronRecord {
            start: n.range.start,
            end: n.range.end,
            k: n.k,
        }
    }
}

impl TryFrom<NeuronRecord> for QuantileNeuron {
    type Error = Error;

    fn try_from(r: NeuronRecord) -> Result<Self> {
        QuantileNeuron::span(r.start, r.end, r.k)
    }
}

/// JSON form of a trained classifier (1-based indices).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierRecord {
    pub pos: NeuronRecord,
    pub neg: NeuronRecord,
    pub theta: f64,
    pub kind: Kind,
    pub pair: [String; 2],
}

impl ClassifierRecord {
    pub fn classifier(&self) -> Result<PairClassifier> {
        PairClassifier::new(self.pos.try_into()?, self.neg.try_into()?, self.theta, self.kind)
    }

    pub fn task(&self) -> Result<PairTask> {
        PairTask::new(self.pair[0].clone(), self.pair[1].clone())
    }
}
