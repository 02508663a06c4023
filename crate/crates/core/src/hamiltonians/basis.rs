//! Single-KPO representation: plain Fock levels, or the highest Kerr
//! eigenstates for a reduced master-equation dimension.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{annihilation_matrix, max_abs};

use super::params::SystemParams;

/// Dense `−K a†²a² + Ω_p (a² + a†²)` on `cutoff` Fock levels.
pub fn kerr_matrix(kerr: f64, omega_p: f64, cutoff: usize) -> Result<DMatrix<C64>> {
    let a = annihilation_matrix(cutoff)?.to_dense();
    let ad = a.adjoint();
    let a2 = &a * &a;
    let ad2 = &ad * &ad;
    Ok(&ad2 * &a2 * C64::new(-kerr, 0.0) + (&a2 + &ad2) * C64::new(omega_p, 0.0))
}

/// Matrices of one KPO in the chosen representation.
#[derive(Clone, Debug)]
pub struct ModeBasis {
    pub fock_cutoff: usize,
    /// H_Kerr in this basis.
    pub kerr: DMatrix<C64>,
    /// Annihilation operator in this basis.
    pub annihilation: DMatrix<C64>,
    /// Columns are the basis vectors in Fock space; `None` for the Fock basis.
    pub to_fock: Option<DMatrix<C64>>,
    /// Kerr eigenvalues of the retained levels (eigenbasis only).
    pub energies: Vec<f64>,
}

impl ModeBasis {
    pub fn fock(params: &SystemParams) -> Result<Self> {
        let n = params.cutoffs.kpo;
        Ok(ModeBasis {
            fock_cutoff: n,
            kerr: kerr_matrix(params.kerr, params.omega_p, n)?,
            annihilation: annihilation_matrix(n)?.to_dense(),
            to_fock: None,
            energies: Vec::new(),
        })
    }

    /// The `levels` highest eigenstates of H_Kerr computed at the Fock cutoff.
    /// Even and odd parity blocks are diagonalized separately so the exactly
    /// degenerate cat doublet is never mixed.
    pub fn kerr_eigen(params: &SystemParams, levels: usize) -> Result<Self> {
        let n = params.cutoffs.kpo;
        if levels < 2 || levels > n {
            return Err(Error::InvalidDimension(format!("kerr levels {levels} must lie in [2, {n}]")));
        }
        let h = kerr_matrix(params.kerr, params.omega_p, n)?;
        let mut states: Vec<(f64, DVector<C64>)> = Vec::with_capacity(n);
        for parity in 0..2 {
            let idx: Vec<usize> = (parity..n).step_by(2).collect();
            let block = DMatrix::from_fn(idx.len(), idx.len(), |r, c| h[(idx[r], idx[c])]);
            let eig = block.symmetric_eigen();
            for (k, &e) in eig.eigenvalues.iter().enumerate() {
                let mut v = DVector::zeros(n);
                for (r, &i) in idx.iter().enumerate() {
                    v[i] = eig.eigenvectors[(r, k)];
                }
                // deterministic phase: largest component real positive
                let big = v.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
                v *= big.conj() / big.norm();
                states.push((e, v));
            }
        }
        // descending energy, even parity first within exact ties
        states.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal));
        let kept = &states[..levels];
        let v = DMatrix::from_columns(&kept.iter().map(|s| s.1.clone()).collect::<Vec<_>>());
        let energies: Vec<f64> = kept.iter().map(|s| s.0).collect();
        let a = annihilation_matrix(n)?.to_dense();
        let a_proj = v.adjoint() * a * &v;
        let kerr = DMatrix::from_diagonal(&DVector::from_iterator(levels, energies.iter().map(|&e| C64::new(e, 0.0))));
        Ok(ModeBasis { fock_cutoff: n, kerr, annihilation: chop(a_proj), to_fock: Some(v), energies })
    }

    pub fn for_params(params: &SystemParams) -> Result<Self> {
        match params.cutoffs.kerr_levels {
            None => Self::fock(params),
            Some(m) => Self::kerr_eigen(params, m),
        }
    }

    pub fn dim(&self) -> usize {
        self.kerr.nrows()
    }

    /// Maps a Fock-space single-mode vector into this basis. Returns the
    /// vector and the norm lost by the projection.
    pub fn from_fock(&self, v: &DVector<C64>) -> Result<(DVector<C64>, f64)> {
        if v.len() != self.fock_cutoff {
            return Err(Error::InvalidDimension(format!("vector has {} levels, basis needs {}", v.len(), self.fock_cutoff)));
        }
        match &self.to_fock {
            None => Ok((v.clone(), 0.0)),
            Some(w) => {
                let p = w.adjoint() * v;
                let lost = (v.norm_squared() - p.norm_squared()).max(0.0);
                Ok((p, lost))
            }
        }
    }

    /// Maps a Fock-space single-mode operator into this basis.
    pub fn op_from_fock(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        match &self.to_fock {
            None => m.clone(),
            Some(w) => chop(w.adjoint() * m * w),
        }
    }
}

/// Zeros entries below 1e-14 of the largest so parity selection rules give
/// a clean sparsity pattern.
fn chop(mut m: DMatrix<C64>) -> DMatrix<C64> {
    let cut = 1e-14 * max_abs(&m);
    m.iter_mut().for_each(|v| {
        if v.norm() < cut {
            *v = C64::new(0.0, 0.0);
        }
    });
    m
}
