//! Error-minimizing threshold for a one-dimensional score.
//!
//! Candidate thresholds sit in the gaps between consecutive distinct sorted
//! scores, plus the two unbounded ends. Among error-minimizing gaps the widest
//! bounded one wins (lowest on ties) and `theta` is its midpoint. The lower
//! end (`theta = min - 1`) and then the upper end (`theta = max`) are used
//! only when no bounded gap reaches the minimum.

use crate::error::{Error, Result};
use crate::spectra::Sign;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdFit {
    pub theta: f64,
    pub errors: usize,
}

pub fn fit_threshold(evals: &[(f64, Sign)]) -> Result<ThresholdFit> {
    if !evals.iter().any(|e| e.1.is_pos()) || !evals.iter().any(|e| !e.1.is_pos()) {
        return Err(Error::Empty("fit_threshold needs samples of both classes"));
    }
    let mut buf: Vec<(f64, bool)> = evals.iter().map(|&(f, s)| (f, s.is_pos())).collect();
    Ok(fit_threshold_sorted(&mut buf))
}

/// Sorts `buf` by score and fits. `buf` must be non-empty.
pub(crate) fn fit_threshold_sorted(buf: &mut [(f64, bool)]) -> ThresholdFit {
    buf.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let n_neg = buf.iter().filter(|e| !e.1).count();

    // theta below everything: every sample is called positive.
    let mut errors = n_neg;
    let lower_errors = errors;
    let mut best_bounded: Option<(usize, f64, f64)> = None; // (errors, width, theta)
    let mut i = 0;
    while i < buf.len() {
        let v = buf[i].0;
        while i < buf.len() && buf[i].0 == v {
            if buf[i].1 {
                errors += 1;
            } else {
                errors -= 1;
            }
            i += 1;
        }
        if i == buf.len() {
            break;
        }
        let next = buf[i].0;
        let width = next - v;
        let better = match best_bounded {
            None => true,
            Some((e, w, _)) => errors < e || (errors == e && width > w),
        };
        if better {
            let mut mid = v + width / 2.0;
            if !(mid >= v && mid < next) {
                mid = v;
            }
            best_bounded = Some((errors, width, mid));
        }
    }
    let upper_errors = errors;
    let min_end = lower_errors.min(upper_errors);

    match best_bounded {
        Some((e, _, theta)) if e <= min_end => ThresholdFit { theta, errors: e },
        _ if lower_errors <= upper_errors => ThresholdFit {
            theta: buf[0].0 - 1.0,
            errors: lower_errors,
        },
        _ => ThresholdFit {
            theta: buf[buf.len() - 1].0,
            errors: upper_errors,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::decide;

    fn count(evals: &[(f64, Sign)], theta: f64) -> usize {
        evals.iter().filter(|(f, s)| decide(*f, theta) != *s).count()
    }

    #[test]
    fn separating_gap_midpoint() {
        let evals = [(1.0, Sign::Neg), (2.0, Sign::Neg), (4.0, Sign::Pos), (5.0, Sign::Pos)];
        let fit = fit_threshold(&evals).unwrap();
        assert_eq!(fit, ThresholdFit { theta: 3.0, errors: 0 });
    }

    #[test]
    fn reversed_orientation_costs_one_error() {
        let evals = [(1.0, Sign::Pos), (2.0, Sign::Neg)];
        let fit = fit_threshold(&evals).unwrap();
        assert_eq!(fit.errors, 1);
        assert_eq!(count(&evals, fit.theta), 1);
    }

    #[test]
    fn widest_of_equal_gaps() {
        // zero-error gaps: (2,6) width 4 only; errors elsewhere.
        let evals = [
            (0.0, Sign::Neg),
            (2.0, Sign::Neg),
            (6.0, Sign::Pos),
            (7.0, Sign::Pos),
        ];
        assert_eq!(fit_threshold(&evals).unwrap().theta, 4.0);
        // two one-error gaps of widths 1 and 3: pick the wider one.
        let evals = [
            (0.0, Sign::Neg),
            (1.0, Sign::Pos),
            (2.0, Sign::Neg),
            (5.0, Sign::Pos),
        ];
        let fit = fit_threshold(&evals).unwrap();
        assert_eq!(fit, ThresholdFit { theta: 3.5, errors: 1 });
    }

    #[test]
    fn all_equal_scores() {
        let evals = [(1.0, Sign::Pos), (1.0, Sign::Neg), (1.0, Sign::Neg)];
        let fit = fit_threshold(&evals).unwrap();
        assert_eq!(fit.errors, 1);
        assert_eq!(count(&evals, fit.theta), 1);
    }

    #[test]
    fn adjacent_floats_keep_theta_inside_gap() {
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let evals = [(a, Sign::Neg), (b, Sign::Pos)];
        let fit = fit_threshold(&evals).unwrap();
        assert_eq!(fit.errors, 0);
        assert_eq!(count(&evals, fit.theta), 0);
    }

    #[test]
    fn one_class_is_an_error() {
        assert!(fit_threshold(&[(1.0, Sign::Pos)]).is_err());
        assert!(fit_threshold(&[]).is_err());
    }
}
