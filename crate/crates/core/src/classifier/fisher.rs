use crate::error::{Error, Result};
use crate::spectra::{Sign, Spectrum};

use super::{discriminant, PairClassifier};

/// Per-class mean and population variance of discriminant evaluations.
/// Index 1 is the positive class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassStats {
    pub mu1: f64,
    pub mu2: f64,
    pub var1: f64,
    pub var2: f64,
}

#[derive(Default, Clone, Copy)]
struct Running {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Running {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn variance(&self) -> f64 {
        (self.m2 / self.n as f64).max(0.0)
    }
}

pub(crate) fn stats_masked(values: &[f64], is_pos: &[bool]) -> Option<ClassStats> {
    let mut pos = Running::default();
    let mut neg = Running::default();
    for (&x, &p) in values.iter().zip(is_pos) {
        if p {
            pos.push(x);
        } else {
            neg.push(x);
        }
    }
    if pos.n == 0 || neg.n == 0 {
        return None;
    }
    Some(ClassStats {
        mu1: pos.mean,
        mu2: neg.mean,
        var1: pos.variance(),
        var2: neg.variance(),
    })
}

pub fn stats_from_evals(evals: &[(f64, Sign)]) -> Result<ClassStats> {
    let values: Vec<f64> = evals.iter().map(|e| e.0).collect();
    let is_pos: Vec<bool> = evals.iter().map(|e| e.1.is_pos()).collect();
    stats_masked(&values, &is_pos).ok_or(Error::Empty("class_stats needs samples of both classes"))
}

pub fn class_stats(c: &PairClassifier, pairs: &[(&Spectrum, Sign)]) -> Result<ClassStats> {
    let mut values = Vec::with_capacity(pairs.len());
    let mut is_pos = Vec::with_capacity(pairs.len());
    for (s, sign) in pairs {
        values.push(discriminant(c, s)?);
        is_pos.push(sign.is_pos());
    }
    stats_masked(&values, &is_pos).ok_or(Error::Empty("class_stats needs samples of both classes"))
}

/// `(mu1 - mu2)^2 / (var1 + var2)`; `+inf` for zero spread with distinct
/// means, `0` when both numerator and denominator vanish.
pub fn fisher_b(st: &ClassStats) -> f64 {
    let num = (st.mu1 - st.mu2).powi(2);
    let den = st.var1 + st.var2;
    if den > 0.0 {
        num / den
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// `min(mu1^2/var1, mu2^2/var2)` when the class means straddle zero, else 0.
pub fn fisher_z(st: &ClassStats) -> f64 {
    if st.mu1 == 0.0 || st.mu2 == 0.0 || (st.mu1 > 0.0) == (st.mu2 > 0.0) {
        return 0.0;
    }
    let ratio = |mu: f64, var: f64| {
        if var > 0.0 {
            mu * mu / var
        } else {
            f64::INFINITY
        }
    };
    ratio(st.mu1, st.var1).min(ratio(st.mu2, st.var2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(mu1: f64, var1: f64, mu2: f64, var2: f64) -> ClassStats {
        ClassStats { mu1, mu2, var1, var2 }
    }

    #[test]
    fn two_point_stats() {
        let evals = [(1.0, Sign::Pos), (-2.0, Sign::Neg), (3.0, Sign::Pos), (-2.0, Sign::Neg)];
        let s = stats_from_evals(&evals).unwrap();
        assert_eq!(s, st(2.0, 1.0, -2.0, 0.0));
        let single = stats_from_evals(&[(4.0, Sign::Pos), (7.0, Sign::Neg)]).unwrap();
        assert_eq!((single.var1, single.var2), (0.0, 0.0));
        assert!(stats_from_evals(&[(1.0, Sign::Pos)]).is_err());
    }

    #[test]
    fn fisher_b_examples() {
        assert_eq!(fisher_b(&st(2.0, 1.0, 0.0, 1.0)), 2.0);
        assert_eq!(fisher_b(&st(1.5, 1.0, 1.5, 3.0)), 0.0);
        assert_eq!(fisher_b(&st(1.0, 0.0, 0.0, 0.0)), f64::INFINITY);
        assert_eq!(fisher_b(&st(1.0, 0.0, 1.0, 0.0)), 0.0);
    }

    #[test]
    fn fisher_z_examples() {
        assert_eq!(fisher_z(&st(3.0, 1.0, -2.0, 4.0)), 1.0);
        assert_eq!(fisher_z(&st(3.0, 1.0, 2.0, 4.0)), 0.0);
        assert_eq!(fisher_z(&st(1.0, 0.0, -1.0, 1.0)), 1.0);
        assert_eq!(fisher_z(&st(0.0, 1.0, -1.0, 1.0)), 0.0);
        assert_eq!(fisher_z(&st(1.0, 0.0, -1.0, 0.0)), f64::INFINITY);
    }
}
