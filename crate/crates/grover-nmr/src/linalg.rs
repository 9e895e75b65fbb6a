//! Small dense complex linear algebra helpers.
//!
//! Everything here works on `ndarray` arrays of [`Complex64`]. Matrices in
//! this crate are tiny (at most 32x32), so all routines are straightforward
//! dense implementations.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

/// Dense complex matrix.
pub type CMat = Array2<Complex64>;
/// Dense complex vector.
pub type CVec = Array1<Complex64>;

/// `e^{i phi}` as a unit complex number.
pub fn expi(phi: f64) -> Complex64 {
    Complex64::new(phi.cos(), phi.sin())
}

/// Complex identity matrix of the given dimension.
pub fn identity(dim: usize) -> CMat {
    Array2::eye(dim)
}

/// Conjugate transpose.
pub fn dagger(m: &CMat) -> CMat {
    m.t().mapv(|z| z.conj())
}

/// Largest entrywise absolute difference between two matrices.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.dim(), b.dim(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest entrywise absolute value.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max-norm deviation of `m` from unitarity, `max |m†m - I|`.
pub fn unitarity_error(m: &CMat) -> f64 {
    let product = dagger(m).dot(m);
    max_abs_diff(&product, &identity(m.nrows()))
}

/// Trace of a complex matrix.
pub fn trace(m: &CMat) -> Complex64 {
    m.diag().sum()
}

/// Least-squares real scale `c` minimizing `‖a - c·b‖_F`,
/// `Re tr(b†a) / tr(b†b)`. Returns 0 when `b` vanishes.
pub fn fit_scale(a: &CMat, b: &CMat) -> f64 {
    let denom: f64 = b.iter().map(|z| z.norm_sqr()).sum();
    if denom == 0.0 {
        return 0.0;
    }
    let numer: f64 = a.iter().zip(b.iter()).map(|(x, y)| (y.conj() * x).re).sum();
    numer / denom
}

/// Eigenvalues of a Hermitian matrix, ascending.
///
/// Cyclic Jacobi sweeps with complex plane rotations; converges quadratically
/// for the well-conditioned 4x4 matrices this crate produces. The input is
/// assumed Hermitian (only the upper triangle drives the rotations).
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let n = m.nrows();
    assert_eq!(
        n,
        m.ncols(),
        "hermitian_eigenvalues requires a square matrix"
    );
    let mut a = m.clone();

    let off = |a: &CMat| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += a[(p, q)].norm_sqr();
            }
        }
        s.sqrt()
    };

    let scale = max_abs(&a).max(1.0);
    for _sweep in 0..64 {
        if off(&a) <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.norm() <= 1e-300 {
                    continue;
                }
                // Zero a[p][q] with G† a G, G a rotation in the (p,q) plane.
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let r = apq.norm();
                let phase = apq / r;
                let theta = 0.5 * (2.0 * r).atan2(aqq - app);
                let (s, c) = theta.sin_cos();
                let gs = phase * s;

                // columns p, q: a[:, p] -> c*a[:,p] - conj(gs)*a[:,q], etc.
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = c * aip - gs.conj() * aiq;
                    a[(i, q)] = gs * aip + c * aiq;
                }
                // rows p, q with the conjugated coefficients
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = c * apj - gs * aqj;
                    a[(q, j)] = gs.conj() * apj + c * aqj;
                }
            }
        }
    }

    let mut eigs: Vec<f64> = a.diag().iter().map(|z| z.re).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
    eigs
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    const ZERO: Complex64 = Complex64::new(0.0, 0.0);
    const ONE: Complex64 = Complex64::new(1.0, 0.0);

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn dagger_conjugates_and_transposes() {
        let m = array![[c(1.0, 2.0), c(3.0, -1.0)], [c(0.0, 5.0), c(-2.0, 0.0)]];
        let d = dagger(&m);
        assert_eq!(d[(0, 1)], c(0.0, -5.0));
        assert_eq!(d[(1, 0)], c(3.0, 1.0));
    }

    #[test]
    fn unitarity_error_flags_non_unitary() {
        assert!(unitarity_error(&identity(4)) < 1e-15);
        let m = array![[ONE, ONE], [ZERO, ONE]];
        assert!(unitarity_error(&m) > 0.5);
    }

    #[test]
    fn eigenvalues_of_diagonal_matrix() {
        let m = array![[c(0.75, 0.0), ZERO], [ZERO, c(-0.25, 0.0)],];
        let eigs = hermitian_eigenvalues(&m);
        assert!((eigs[0] + 0.25).abs() < 1e-14);
        assert!((eigs[1] - 0.75).abs() < 1e-14);
    }

    #[test]
    fn eigenvalues_of_coupled_hermitian_block() {
        // [[0.25, 0.5], [0.5, 0.25]] block inside a 4x4: eigenvalues 0.75, -0.25.
        let m = array![
            [c(0.25, 0.0), ZERO, ZERO, c(0.5, 0.0)],
            [ZERO, c(-0.25, 0.0), ZERO, ZERO],
            [ZERO, ZERO, c(-0.25, 0.0), ZERO],
            [c(0.5, 0.0), ZERO, ZERO, c(0.25, 0.0)],
        ];
        let eigs = hermitian_eigenvalues(&m);
        let expected = [-0.25, -0.25, -0.25, 0.75];
        for (got, want) in eigs.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "got {got}, want {want}");
        }
    }

    #[test]
    fn eigenvalues_of_complex_hermitian() {
        // Pauli-y scaled: eigenvalues +-1.
        let m = array![[ZERO, c(0.0, -1.0)], [c(0.0, 1.0), ZERO]];
        let eigs = hermitian_eigenvalues(&m);
        assert!((eigs[0] + 1.0).abs() < 1e-13);
        assert!((eigs[1] - 1.0).abs() < 1e-13);
    }
}
