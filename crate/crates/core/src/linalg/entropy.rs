use nalgebra::SymmetricEigen;

use super::matrix::CMat;
use crate::error::{domain, Result};

/// Negative probabilities down to `-PROB_CLAMP` are treated as zero.
pub const PROB_CLAMP: f64 = 1e-12;
/// Hermiticity / trace tolerance and negative-eigenvalue clamp window.
pub const EIGEN_CLAMP: f64 = 1e-10;

/// Base-3 logarithm.
#[inline]
pub fn log3(x: f64) -> f64 {
    x.ln() / 3f64.ln()
}

/// `−x log₃|x|`, with `0 log 0 = 0`.
///
/// For `x ∈ [0, 1]` this is the usual entropy contribution. Outside that
/// range it is the real part of `−x log₃ x` taken on the principal branch.
#[inline]
pub fn entropy_term3(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        -x * log3(x.abs())
    }
}

/// `H₃(p) = −Σ pᵢ log₃ pᵢ`. The input is not renormalized.
pub fn shannon_entropy3(p: &[f64]) -> Result<f64> {
    let mut h = 0.0;
    for &x in p {
        if x < -PROB_CLAMP || !x.is_finite() {
            return domain(format!("probability {x} is negative or not finite"));
        }
        if x > 0.0 {
            h += entropy_term3(x);
        }
    }
    Ok(h)
}

/// Eigenvalues of `(M + M†)/2` in ascending order.
pub fn hermitian_eigenvalues(m: &CMat) -> Result<Vec<f64>> {
    if !m.is_square() {
        return domain(format!("{}x{} matrix is not square", m.rows(), m.cols()));
    }
    let h = m.hermitized().to_nalgebra();
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    Ok(ev)
}

/// `S(ρ) = −Σ λᵢ log₃ λᵢ` for a density matrix.
pub fn von_neumann_entropy3(rho: &CMat) -> Result<f64> {
    if !rho.is_square() {
        return domain("density matrix must be square");
    }
    let defect = rho.hermiticity_defect();
    if defect > EIGEN_CLAMP {
        return domain(format!("matrix is not Hermitian (defect {defect:.3e})"));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > EIGEN_CLAMP || tr.im.abs() > EIGEN_CLAMP {
        return domain(format!("trace {tr} is not 1"));
    }
    let mut h = 0.0;
    for lambda in hermitian_eigenvalues(rho)? {
        if lambda < -EIGEN_CLAMP {
            return domain(format!("negative eigenvalue {lambda:.3e}"));
        }
        if lambda > 0.0 {
            h += entropy_term3(lambda);
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CVec, C64};

    #[test]
    fn uniform_distribution_has_one_trit() {
        let h = shannon_entropy3(&[1.0 / 3.0; 3]).unwrap();
        assert!((h - 1.0).abs() < 1e-15);
        assert_eq!(shannon_entropy3(&[1.0, 0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn skewed_distribution_matches_reference() {
        // -(0.8 ln 0.8 + 2·0.1 ln 0.1)/ln 3, evaluated with mpmath at 30 digits
        let h = shannon_entropy3(&[0.8, 0.1, 0.1]).unwrap();
        assert!((h - 0.581_671_865_717_886_8).abs() < 1e-14, "{h}");
    }

    #[test]
    fn tiny_negative_probability_is_clamped() {
        assert_eq!(shannon_entropy3(&[1.0, -1e-13]).unwrap(), 0.0);
        assert!(shannon_entropy3(&[1.0, -1e-6]).is_err());
    }

    #[test]
    fn maximally_mixed_and_pure_states() {
        let mixed = CMat::identity(3).scale_real(1.0 / 3.0);
        assert!((von_neumann_entropy3(&mixed).unwrap() - 1.0).abs() < 1e-12);
        let pure = CVec::ket(3, 0).projector();
        assert!(von_neumann_entropy3(&pure).unwrap().abs() < 1e-12);
    }

    #[test]
    fn diagonal_state_matches_shannon() {
        let p = [0.5, 0.3, 0.2];
        let s = von_neumann_entropy3(&CMat::diag_real(&p)).unwrap();
        assert!((s - shannon_entropy3(&p).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian_and_bad_trace() {
        let mut m = CMat::identity(3).scale_real(1.0 / 3.0);
        m.set(0, 1, C64::new(0.1, 0.0));
        assert!(von_neumann_entropy3(&m).is_err());
        assert!(von_neumann_entropy3(&CMat::identity(3)).is_err());
    }

    #[test]
    fn entropy_term_uses_magnitude_outside_unit_interval() {
        assert_eq!(entropy_term3(0.0), 0.0);
        assert!((entropy_term3(1.0)).abs() < 1e-15);
        assert!((entropy_term3(-1.0 / 3.0) - (-1.0 / 3.0)).abs() < 1e-15);
        assert!(entropy_term3(1.5) < 0.0);
    }
}
