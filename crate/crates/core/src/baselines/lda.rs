//! Two-class Fisher directions.
//!
//! The within-class scatter is `S1 + S2` with population covariances, which
//! makes `S^-1 (m+ - m-)` the maximizer of `(mu1 - mu2)^2 / (var1 + var2)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::spectra::Sign;

const RIDGE: f64 = 1e-8;

struct Moments {
    diff: DVector<f64>,
    scatter: DMatrix<f64>,
}

fn moments(x: &DMatrix<f64>, signs: &[Sign]) -> Result<Moments> {
    let d = x.ncols();
    if x.nrows() != signs.len() {
        return Err(Error::Config(format!(
            "{} feature rows but {} labels",
            x.nrows(),
            signs.len()
        )));
    }
    let class = |want: Sign| -> Result<(DVector<f64>, DMatrix<f64>)> {
        let rows: Vec<usize> = (0..signs.len()).filter(|&i| signs[i] == want).collect();
        if rows.len() < 2 {
            return Err(Error::Empty("LDA needs at least two samples per class"));
        }
        let n = rows.len() as f64;
        let mut mean = DVector::zeros(d);
        for &i in &rows {
            mean += x.row(i).transpose();
        }
        mean /= n;
        let mut cov = DMatrix::zeros(d, d);
        for &i in &rows {
            let c = x.row(i).transpose() - &mean;
            cov += &c * c.transpose();
        }
        cov /= n;
        Ok((mean, cov))
    };
    let (m_pos, s_pos) = class(Sign::Pos)?;
    let (m_neg, s_neg) = class(Sign::Neg)?;
    let mut scatter = s_pos + s_neg;
    let ridge = RIDGE * scatter.trace() / d as f64;
    for i in 0..d {
        scatter[(i, i)] += ridge;
    }
    Ok(Moments {
        diff: m_pos - m_neg,
        scatter,
    })
}

fn orient(mut w: DVector<f64>, diff: &DVector<f64>) -> DVector<f64> {
    let norm = w.norm();
    if norm > 0.0 {
        w /= norm;
    }
    if w.dot(diff) < 0.0 {
        w = -w;
    }
    w
}

fn solve(scatter: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let chol = scatter.clone().cholesky().ok_or(Error::SingularScatter)?;
    let w = chol.solve(rhs);
    if w.iter().all(|v| v.is_finite()) {
        Ok(w)
    } else {
        Err(Error::SingularScatter)
    }
}

/// Unit-norm Fisher direction, oriented so positives score higher.
pub fn lda_closed_form(x: &DMatrix<f64>, signs: &[Sign]) -> Result<DVector<f64>> {
    let m = moments(x, signs)?;
    let w = solve(&m.scatter, &m.diff)?;
    Ok(orient(w, &m.diff))
}

/// Fisher direction restricted to `c . w = 0`: `w ∝ S^-1 (m - lambda c)` with
/// `lambda = c'S^-1 m / c'S^-1 c`.
pub fn lda_constrained(x: &DMatrix<f64>, signs: &[Sign], c: &DVector<f64>) -> Result<DVector<f64>> {
    let m = moments(x, signs)?;
    let s_inv_m = solve(&m.scatter, &m.diff)?;
    let s_inv_c = solve(&m.scatter, c)?;
    let denom = c.dot(&s_inv_c);
    if denom <= 0.0 {
        return Err(Error::SingularScatter);
    }
    let lambda = c.dot(&s_inv_m) / denom;
    let mut w = s_inv_m - s_inv_c * lambda;
    // Remove the residual constraint violation left by round-off.
    w -= c * (c.dot(&w) / c.dot(c));
    Ok(orient(w, &m.diff))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn signs(n_pos: usize, n_neg: usize) -> Vec<Sign> {
        let mut s = vec![Sign::Pos; n_pos];
        s.extend(vec![Sign::Neg; n_neg]);
        s
    }

    #[test]
    fn axis_aligned_clouds() {
        // class means (1,0) and (0,0), identical symmetric scatter.
        let pts = [(-0.5, -0.5), (-0.5, 0.5), (0.5, -0.5), (0.5, 0.5)];
        let mut rows = Vec::new();
        for (dx, dy) in pts {
            rows.extend([1.0 + dx, dy]);
        }
        for (dx, dy) in pts {
            rows.extend([dx, dy]);
        }
        let x = DMatrix::from_row_slice(8, 2, &rows);
        let w = lda_closed_form(&x, &signs(4, 4)).unwrap();
        assert!((w[0] - 1.0).abs() < 1e-12 && w[1].abs() < 1e-12, "{w}");
    }

    #[test]
    fn one_dimensional_sign() {
        let x = DMatrix::from_row_slice(4, 1, &[-1.0, -2.0, 3.0, 4.0]);
        let w = lda_closed_form(&x, &signs(2, 2)).unwrap();
        assert_eq!(w[0], -1.0);
        let x = DMatrix::from_row_slice(4, 1, &[3.0, 4.0, -1.0, -2.0]);
        assert_eq!(lda_closed_form(&x, &signs(2, 2)).unwrap()[0], 1.0);
    }

    #[test]
    fn needs_two_per_class() {
        let x = DMatrix::from_row_slice(3, 1, &[1.0, 2.0, 3.0]);
        assert!(lda_closed_form(&x, &signs(2, 1)).is_err());
    }

    #[test]
    fn constrained_direction_is_orthogonal_to_constraint() {
        let rows = [
            1.0, 2.0, 0.5, 1.5, 2.5, 0.1, 0.8, 1.9, 0.7, 1.2, 2.2, 0.3, //
            0.1, 0.3, 0.9, 0.2, 0.2, 1.1, 0.4, 0.1, 0.8, 0.0, 0.5, 1.3,
        ];
        let x = DMatrix::from_row_slice(8, 3, &rows);
        let c = DVector::from_vec(vec![1.0, 1.0, -1.0]);
        let w = lda_constrained(&x, &signs(4, 4), &c).unwrap();
        assert!(c.dot(&w).abs() < 1e-12);
        assert!((w.norm() - 1.0).abs() < 1e-12);
    }
}
