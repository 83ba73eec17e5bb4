//! Central finite-difference gradient checking.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    pub worst_parameter_index: usize,
    pub passed: bool,
}

/// Compares `analytic_grad` against `(f(p + h e_i) - f(p - h e_i)) / 2h` for
/// every coordinate of `params`.
///
/// The relative error per coordinate uses `max(|analytic|, |numeric|, 1e-8)`
/// as denominator.
pub fn check_gradient<F>(
    mut f: F,
    params: &Matrix,
    analytic_grad: &Matrix,
    step: f64,
    tol: f64,
) -> Result<GradCheckReport>
where
    F: FnMut(&[f64]) -> f64,
{
    if !(step > 0.0) {
        return Err(Error::Config(format!(
            "finite-difference step must be > 0, got {step}"
        )));
    }
    if params.shape() != analytic_grad.shape() {
        return Err(Error::Dimension(format!(
            "gradient shape {:?} differs from parameter shape {:?}",
            analytic_grad.shape(),
            params.shape()
        )));
    }

    let mut probe = params.as_slice().to_vec();
    let mut worst = 0.0_f64;
    let mut worst_index = 0;
    for i in 0..probe.len() {
        let original = probe[i];
        probe[i] = original + step;
        let plus = f(&probe);
        probe[i] = original - step;
        let minus = f(&probe);
        probe[i] = original;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::Numeric(format!(
                "objective not finite while perturbing parameter {i}"
            )));
        }
        let numeric = (plus - minus) / (2.0 * step);
        let analytic = analytic_grad.as_slice()[i];
        let denom = analytic.abs().max(numeric.abs()).max(1e-8);
        let rel = (analytic - numeric).abs() / denom;
        if rel > worst {
            worst = rel;
            worst_index = i;
        }
    }

    Ok(GradCheckReport {
        max_relative_error: worst,
        worst_parameter_index: worst_index,
        passed: worst <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic() {
        let p = Matrix::column(vec![3.0]);
        let g = Matrix::column(vec![6.0]);
        let report = check_gradient(|x| x[0] * x[0], &p, &g, 1e-5, 1e-6).unwrap();
        assert!(report.max_relative_error < 1e-8);
        assert!(report.passed);
    }

    #[test]
    fn constant_function() {
        let p = Matrix::column(vec![0.3, -0.2]);
        let g = Matrix::column(vec![0.0, 0.0]);
        let report = check_gradient(|_| 4.2, &p, &g, 1e-5, 1e-6).unwrap();
        assert_eq!(report.max_relative_error, 0.0);
        assert!(report.passed);
    }

    #[test]
    fn wrong_gradient_fails_and_names_worst_index() {
        let p = Matrix::column(vec![1.0, 2.0, 3.0]);
        let g = Matrix::column(vec![2.0, 4.0, 7.0]);
        let report = check_gradient(|x| x.iter().map(|v| v * v).sum(), &p, &g, 1e-5, 1e-6).unwrap();
        assert!(!report.passed);
        assert_eq!(report.worst_parameter_index, 2);
    }

    #[test]
    fn non_finite_objective_is_an_error() {
        let p = Matrix::column(vec![0.0]);
        let g = Matrix::column(vec![0.0]);
        let err = check_gradient(|x| 1.0 / (x[0] - 1e-5), &p, &g, 1e-5, 1e-6).unwrap_err();
        assert!(matches!(err, Error::Numeric(_)));
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = Matrix::column(vec![0.0]);
        assert!(check_gradient(|_| 0.0, &p, &p, 0.0, 1e-6).is_err());
        assert!(check_gradient(|_| 0.0, &p, &Matrix::column(vec![0.0, 1.0]), 1e-5, 1e-6).is_err());
    }
}
