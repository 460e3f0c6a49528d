//! Dense propagators `exp(-i H t)`.
//!
//! Both routes use nalgebra's scaling-and-squaring exponential. Its
//! symmetric eigensolver loses accuracy on the near-degenerate doublets of
//! weakly tunnelling sectors, which the exponential does not.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// `exp(-i H t)` for a real symmetric `H`.
pub fn real_symmetric_propagator(h: DMatrix<f64>, t: f64) -> DMatrix<Complex64> {
    h.map(|x| Complex64::new(0.0, -x * t)).exp()
}

/// `exp(-i H t)` for a complex Hermitian `H`.
pub fn hermitian_propagator(h: DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    (h * Complex64::new(0.0, -t)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_x_rotation() {
        let h = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let t = 0.3;
        let u = real_symmetric_propagator(h, t);
        assert!((u[(0, 0)] - Complex64::new(t.cos(), 0.0)).norm() < 1e-14);
        assert!((u[(0, 1)] - Complex64::new(0.0, -t.sin())).norm() < 1e-14);
    }

    #[test]
    fn near_degenerate_doublet_is_unitary() {
        // weak tunnelling between two equal self-collision energies
        let h = DMatrix::from_row_slice(3, 3, &[0.886, 0.053, 0.0, 0.053, 0.0, 0.053, 0.0, 0.053, 0.886]);
        let u = real_symmetric_propagator(h, 3.29);
        let id = DMatrix::<Complex64>::identity(3, 3);
        assert!((u.adjoint() * &u - id).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn hermitian_matches_real_route() {
        let h = DMatrix::from_row_slice(3, 3, &[1.0, 0.5, 0.0, 0.5, -0.2, 0.7, 0.0, 0.7, 2.0]);
        let a = real_symmetric_propagator(h.clone(), 1.7);
        let b = hermitian_propagator(h.map(|x| Complex64::new(x, 0.0)), 1.7);
        assert!((a - b).iter().all(|z| z.norm() < 1e-12));
    }
}
