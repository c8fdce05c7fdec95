//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

pub fn frobenius_sq(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|x| x * x).sum()
}

/// Spectral radius via the complex eigenvalues of the real Schur form.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Solves `a x = b`, falling back to the SVD pseudo-inverse when `a` is
/// singular.
pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    if let Some(x) = a.clone().lu().solve(b) {
        if x.iter().all(|v| v.is_finite()) {
            return x;
        }
    }
    a.clone()
        .svd(true, true)
        .solve(b, 1e-12)
        .expect("SVD computed with both factors")
}

pub fn clip_nonnegative(m: &mut DMatrix<f64>) {
    m.iter_mut().for_each(|x| {
        if *x < 0.0 {
            *x = 0.0
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_of_rotation_and_diagonal() {
        let r = DMatrix::from_row_slice(2, 2, &[0.0, -2.0, 2.0, 0.0]);
        assert!((spectral_radius(&r) - 2.0).abs() < 1e-12);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![0.3, -0.9, 0.5]));
        assert!((spectral_radius(&d) - 0.9).abs() < 1e-12);
    }

    #[test]
    fn singular_solve_uses_pseudo_inverse() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let x = solve(&a, &DVector::from_vec(vec![2.0, 2.0]));
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }
}
