//! Single-mode ladder operators, coherent states and displacements.

use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use super::expm::expm_dense;
use super::operator::{Operator, Storage};
use super::space::HilbertSpace;
use super::sparse::CsrMatrix;
use super::state::Ket;
use crate::error::{Error, Result};

/// Largest tolerated norm deficit of a truncated coherent state.
pub const TRUNCATION_LIMIT: f64 = 1e-6;

/// Default factor label for single-mode constructors.
pub const MODE: &str = "mode";

fn mode_space(cutoff: usize) -> Result<Arc<HilbertSpace>> {
    Ok(Arc::new(HilbertSpace::single(MODE, cutoff)?))
}

/// Sparse annihilation matrix with `<n-1|a|n> = sqrt(n)`.
pub fn annihilation_matrix(cutoff: usize) -> Result<CsrMatrix> {
    if cutoff < 2 {
        return Err(Error::InvalidDimension(format!("annihilation needs cutoff >= 2, got {cutoff}")));
    }
    let trip = (1..cutoff).map(|n| (n - 1, n, C64::new((n as f64).sqrt(), 0.0))).collect();
    Ok(CsrMatrix::from_triplets(cutoff, cutoff, trip))
}

pub fn annihilation(cutoff: usize) -> Result<Operator> {
    Operator::from_sparse(mode_space(cutoff)?, annihilation_matrix(cutoff)?)
}

pub fn number(cutoff: usize) -> Result<Operator> {
    let trip = (0..cutoff).map(|n| (n, n, C64::new(n as f64, 0.0))).collect();
    Operator::from_sparse(mode_space(cutoff)?, CsrMatrix::from_triplets(cutoff, cutoff, trip))
}

/// Photon-number parity `exp(i pi a†a)`.
pub fn parity(cutoff: usize) -> Result<Operator> {
    let trip = (0..cutoff).map(|n| (n, n, C64::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0))).collect();
    Operator::from_sparse(mode_space(cutoff)?, CsrMatrix::from_triplets(cutoff, cutoff, trip))
}

/// Lifts a single-factor operator to `space`, acting as identity elsewhere.
pub fn embed(op: &Operator, label: &str, space: &Arc<HilbertSpace>) -> Result<Operator> {
    let pos = space.position(label)?;
    let cutoff = space.factors()[pos].cutoff;
    if op.dim() != cutoff {
        return Err(Error::InvalidDimension(format!(
            "operator dimension {} does not match cutoff {} of `{label}`",
            op.dim(),
            cutoff
        )));
    }
    let (outer, inner) = space.outer_inner(pos);
    let m = CsrMatrix::identity(outer).kron(&op.to_sparse()).kron(&CsrMatrix::identity(inner));
    Operator::from_sparse(space.clone(), m)
}

/// Unnormalized truncated coherent amplitudes and the norm deficit.
fn coherent_amplitudes(alpha: C64, cutoff: usize) -> (Vec<C64>, f64) {
    let mut amps = Vec::with_capacity(cutoff);
    let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..cutoff {
        if n > 0 {
            c = c * alpha / (n as f64).sqrt();
        }
        amps.push(c);
    }
    let norm2: f64 = amps.iter().map(|v| v.norm_sqr()).sum();
    (amps, (1.0 - norm2).max(0.0))
}

/// Coherent state |α⟩ truncated to `cutoff` levels and renormalized.
pub fn coherent_state(alpha: C64, cutoff: usize) -> Result<Ket> {
    if cutoff == 0 {
        return Err(Error::InvalidDimension("cutoff must be positive".into()));
    }
    let (amps, deficit) = coherent_amplitudes(alpha, cutoff);
    if deficit > TRUNCATION_LIMIT {
        return Err(Error::TruncationLoss { deficit, limit: TRUNCATION_LIMIT, cutoff });
    }
    log::debug!("coherent state alpha={alpha} cutoff={cutoff}: norm deficit {deficit:.3e}");
    Ket::new(mode_space(cutoff)?, DVector::from_vec(amps))?.normalized()
}

/// Default Fock cutoff for a KPO with amplitude `alpha`: ceil(|α|² + 5|α| + 4).
pub fn default_kpo_cutoff(alpha: f64) -> usize {
    (alpha * alpha + 5.0 * alpha.abs() + 4.0).ceil() as usize
}

/// Displacement `exp(α a† − α* a)` computed in the truncated space.
pub fn displacement(alpha: C64, cutoff: usize) -> Result<Operator> {
    let a = annihilation_matrix(cutoff)?.to_dense();
    let gen = a.adjoint() * alpha - &a * alpha.conj();
    let d = expm_dense(&gen)?;
    Operator::with_storage(mode_space(cutoff)?, Storage::Dense(d))
}

/// `D(α)|v⟩` evaluated at a padded cutoff and truncated back to `cutoff`.
/// Returns the amplitudes and the norm deficit of the truncation.
pub(crate) fn displaced_fock(alpha: C64, v: usize, cutoff: usize) -> Result<(Vec<C64>, f64)> {
    let pad = cutoff + 24 + 2 * v;
    let d = displacement(alpha, pad)?;
    let col: Vec<C64> = (0..cutoff).map(|n| d.get(n, v)).collect();
    let norm2: f64 = col.iter().map(|c| c.norm_sqr()).sum();
    Ok((col, (1.0 - norm2).max(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::state::expectation;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn two_level_ladder() {
        let a = annihilation(2).unwrap().to_dense();
        assert_eq!(a[(0, 1)], c(1.0));
        assert_eq!(a[(0, 0)] + a[(1, 0)] + a[(1, 1)], c(0.0));
    }

    #[test]
    fn ladder_rule_entry() {
        let a = annihilation(4).unwrap();
        assert!((a.get(2, 3) - c(3f64.sqrt())).norm() < 1e-15);
    }

    #[test]
    fn rejects_small_cutoff() {
        assert!(matches!(annihilation(1), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn number_operator_is_diagonal() {
        let a = annihilation(5).unwrap();
        let n = a.adjoint().matmul(&a).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let expect = if i == j { c(i as f64) } else { c(0.0) };
                assert!((n.get(i, j) - expect).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn commutator_is_identity_below_top_level() {
        let cut = 9;
        let a = annihilation(cut).unwrap();
        let comm = a.commutator(&a.adjoint()).unwrap().to_dense();
        for i in 0..cut - 1 {
            for j in 0..cut - 1 {
                let expect = if i == j { 1.0 } else { 0.0 };
                // sqrt(n)^2 is not exact in binary floating point
                assert!((comm[(i, j)] - c(expect)).norm() <= 8.0 * f64::EPSILON * cut as f64);
            }
        }
    }

    #[test]
    fn embedded_identity_is_identity() {
        let space = Arc::new(HilbertSpace::new([("k1", 3), ("k2", 2)]).unwrap());
        let id = Operator::identity(mode_space(2).unwrap());
        let e = embed(&id, "k2", &space).unwrap();
        assert_eq!(e.max_abs_diff(&Operator::identity(space)).unwrap(), 0.0);
    }

    #[test]
    fn embedded_ops_on_different_factors_commute() {
        let space = Arc::new(HilbertSpace::new([("k1", 4), ("k2", 3)]).unwrap());
        let a1 = embed(&annihilation(4).unwrap(), "k1", &space).unwrap();
        let a2 = embed(&annihilation(3).unwrap(), "k2", &space).unwrap();
        assert_eq!(a1.commutator(&a2).unwrap().max_abs(), 0.0);
        assert_eq!(a1.commutator(&a2.adjoint()).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn embed_kronecker_spectrum() {
        let space = Arc::new(HilbertSpace::new([("k1", 3), ("k2", 2)]).unwrap());
        let n = embed(&number(3).unwrap(), "k1", &space).unwrap();
        let ev = n.hermitian_eigenvalues();
        let expect = [0.0, 0.0, 1.0, 1.0, 2.0, 2.0];
        for (a, b) in ev.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn embed_errors() {
        let space = Arc::new(HilbertSpace::new([("k1", 3)]).unwrap());
        let a = annihilation(4).unwrap();
        assert!(matches!(embed(&a, "k1", &space), Err(Error::InvalidDimension(_))));
        assert!(matches!(embed(&a, "zz", &space), Err(Error::UnknownFactor(_))));
    }

    #[test]
    fn coherent_vacuum() {
        let k = coherent_state(c(0.0), 6).unwrap();
        assert_eq!(k.amplitudes()[0], c(1.0));
        assert!(k.amplitudes().iter().skip(1).all(|v| v.norm() == 0.0));
    }

    #[test]
    fn coherent_mean_photon_number() {
        let k = coherent_state(c(2.0), 20).unwrap();
        let n = expectation(&number(20).unwrap(), &k).unwrap();
        assert!((n.re - 4.0).abs() < 1e-6);
    }

    #[test]
    fn coherent_overlap_is_gaussian() {
        let p = coherent_state(c(2.0), 25).unwrap();
        let m = coherent_state(c(-2.0), 25).unwrap();
        let ov = p.inner(&m).unwrap();
        assert!((ov.re - (-8.0f64).exp()).abs() < 1e-8);
        assert!(ov.im.abs() < 1e-15);
    }

    #[test]
    fn coherent_truncation_error() {
        let err = coherent_state(c(3.0), 10).unwrap_err();
        assert!(matches!(err, Error::TruncationLoss { cutoff: 10, .. }));
    }

    #[test]
    fn displacement_of_zero_is_identity() {
        let d = displacement(c(0.0), 7).unwrap();
        assert!(d.max_abs_diff(&Operator::identity(d.space().clone())).unwrap() < 1e-15);
    }

    #[test]
    fn displacement_creates_coherent_state() {
        let d = displacement(c(1.0), 20).unwrap();
        let col: Vec<C64> = (0..20).map(|n| d.get(n, 0)).collect();
        let k = coherent_state(c(1.0), 20).unwrap();
        for (a, b) in col.iter().zip(k.as_slice()) {
            assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn displacement_unitary_on_low_levels() {
        let cut = 30;
        let d = displacement(c(2.0), cut).unwrap().to_dense();
        let prod = &d * d.adjoint();
        let keep = (cut as f64 * 0.6) as usize;
        for i in 0..keep {
            for j in 0..keep {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - c(expect)).norm() <= 1e-6, "({i},{j})");
            }
        }
    }

    #[test]
    fn default_cutoff_rule() {
        assert_eq!(default_kpo_cutoff(2.0), 18);
    }
}
