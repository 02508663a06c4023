//! Truncated Fock-space linear algebra: spaces, operators, states and
//! matrix functions.

mod expm;
mod ladder;
mod operator;
mod space;
pub mod sparse;
mod state;

pub use expm::{expm, expm_dense};
pub use ladder::{
    annihilation, annihilation_matrix, coherent_state, default_kpo_cutoff, displacement, embed, number, parity,
    MODE, TRUNCATION_LIMIT,
};
pub(crate) use ladder::displaced_fock;
pub use operator::{Operator, Storage, SPARSE_THRESHOLD};
pub use space::{Factor, HilbertSpace};
pub use sparse::CsrMatrix;
pub use state::{expectation, DensityOperator, Ket, StateRef};

pub type C64 = num_complex::Complex64;

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::sync::Arc;

    proptest! {
        #[test]
        fn dense_and_sparse_constructors_agree(cut in 2usize..12, re in -2.0f64..2.0, im in -2.0f64..2.0) {
            let a = annihilation(cut).unwrap();
            let ops = [a.clone(), a.adjoint(), number(cut).unwrap(), parity(cut).unwrap(), displacement(C64::new(re, im), cut).unwrap()];
            for op in ops {
                let other = op.toggled();
                prop_assert!(op.to_dense().iter().zip(other.to_dense().iter()).all(|(x, y)| (x - y).norm() <= 1e-14));
            }
        }

        #[test]
        fn embed_preserves_spectrum(c1 in 2usize..5, c2 in 2usize..4) {
            let space = Arc::new(HilbertSpace::new([("x", c1), ("y", c2)]).unwrap());
            let n = number(c2).unwrap();
            let e = embed(&n, "y", &space).unwrap();
            let ev = e.hermitian_eigenvalues();
            for level in 0..c2 {
                let count = ev.iter().filter(|v| (**v - level as f64).abs() < 1e-10).count();
                prop_assert_eq!(count, c1);
            }
        }
    }
}

/// Largest elementwise modulus of a dense complex matrix.
pub fn max_abs(m: &nalgebra::DMatrix<C64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}
