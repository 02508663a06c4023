use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::operator::Operator;
use super::space::HilbertSpace;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    space: Arc<HilbertSpace>,
    amplitudes: DVector<C64>,
}

impl Ket {
    pub fn new(space: Arc<HilbertSpace>, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != space.total_dim() {
            return Err(Error::InvalidDimension(format!(
                "ket has {} amplitudes, space {} needs {}",
                amplitudes.len(),
                space,
                space.total_dim()
            )));
        }
        Ok(Ket { space, amplitudes })
    }

    pub fn from_vec(space: Arc<HilbertSpace>, v: Vec<C64>) -> Result<Self> {
        Self::new(space, DVector::from_vec(v))
    }

    /// Fock basis state with the given level per factor.
    pub fn basis(space: Arc<HilbertSpace>, levels: &[usize]) -> Result<Self> {
        let idx = space.index_of(levels)?;
        let mut v = DVector::zeros(space.total_dim());
        v[idx] = C64::new(1.0, 0.0);
        Ok(Ket { space, amplitudes: v })
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn as_slice(&self) -> &[C64] {
        self.amplitudes.as_slice()
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn normalized(&self) -> Result<Ket> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::DegenerateState("cannot normalize a zero or non-finite ket".into()));
        }
        Ok(Ket { space: self.space.clone(), amplitudes: &self.amplitudes / C64::new(n, 0.0) })
    }

    fn check(&self, other_space: &HilbertSpace) -> Result<()> {
        if *self.space != *other_space {
            return Err(Error::SpaceMismatch(format!("{} vs {}", self.space, other_space)));
        }
        Ok(())
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Ket) -> Result<C64> {
        self.check(&other.space)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn scale(&self, s: C64) -> Ket {
        Ket { space: self.space.clone(), amplitudes: &self.amplitudes * s }
    }

    pub fn add(&self, other: &Ket) -> Result<Ket> {
        self.check(&other.space)?;
        Ok(Ket { space: self.space.clone(), amplitudes: &self.amplitudes + &other.amplitudes })
    }

    pub fn apply(&self, op: &Operator) -> Result<Ket> {
        self.check(op.space())?;
        Ket::from_vec(self.space.clone(), op.apply(self.as_slice()))
    }

    /// Tensor product, factors concatenated in order.
    pub fn tensor(&self, other: &Ket) -> Result<Ket> {
        let factors = self
            .space
            .factors()
            .iter()
            .chain(other.space.factors())
            .map(|f| (f.label.clone(), f.cutoff));
        let space = Arc::new(HilbertSpace::new(factors)?);
        let amps = self.amplitudes.kronecker(&other.amplitudes);
        Ket::new(space, amps)
    }

    pub fn projector(&self) -> DensityOperator {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityOperator { space: self.space.clone(), matrix: m }
    }
}

/// Density operator; stored dense.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    space: Arc<HilbertSpace>,
    matrix: DMatrix<C64>,
}

impl DensityOperator {
    pub fn new(space: Arc<HilbertSpace>, matrix: DMatrix<C64>) -> Result<Self> {
        let n = space.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::InvalidDimension(format!(
                "density matrix is {}x{}, space needs {n}x{n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(DensityOperator { space, matrix })
    }

    /// Convex mixture of pure states with the given weights.
    pub fn mixture(states: &[(f64, &Ket)]) -> Result<Self> {
        let first = states.first().ok_or_else(|| Error::DegenerateState("empty mixture".into()))?;
        let space = first.1.space.clone();
        let n = space.total_dim();
        let mut m = DMatrix::zeros(n, n);
        for (w, k) in states {
            k.check(&space)?;
            m += k.projector().matrix * C64::new(*w, 0.0);
        }
        Ok(DensityOperator { space, matrix: m })
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of the Hermitian part. The spectrum is shifted by
    /// one before diagonalizing: the symmetric eigensolver can return −∞ on
    /// exactly rank-one inputs.
    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.dim();
        let h = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0) + DMatrix::<C64>::identity(n, n);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min) - 1.0
    }

    /// ⟨ψ|ρ|ψ⟩.
    pub fn overlap(&self, psi: &Ket) -> Result<f64> {
        psi.check(&self.space)?;
        let v = psi.amplitudes();
        Ok(v.dotc(&(&self.matrix * v)).re)
    }
}

/// State argument for [`expectation`].
pub enum StateRef<'a> {
    Ket(&'a Ket),
    Density(&'a DensityOperator),
}

impl<'a> From<&'a Ket> for StateRef<'a> {
    fn from(k: &'a Ket) -> Self {
        StateRef::Ket(k)
    }
}

impl<'a> From<&'a DensityOperator> for StateRef<'a> {
    fn from(r: &'a DensityOperator) -> Self {
        StateRef::Density(r)
    }
}

/// ⟨ψ|O|ψ⟩ for kets, Tr(Oρ) for density operators.
pub fn expectation<'a>(op: &Operator, state: impl Into<StateRef<'a>>) -> Result<C64> {
    match state.into() {
        StateRef::Ket(k) => {
            k.check(op.space())?;
            let ok = op.apply(k.as_slice());
            Ok(k.as_slice().iter().zip(&ok).map(|(a, b)| a.conj() * b).sum())
        }
        StateRef::Density(rho) => {
            if **op.space() != *rho.space {
                return Err(Error::SpaceMismatch(format!("{} vs {}", op.space(), rho.space)));
            }
            let n = rho.dim();
            let mut tr = C64::new(0.0, 0.0);
            match op.storage() {
                super::operator::Storage::Sparse(m) => {
                    for (r, c, v) in m.iter() {
                        tr += v * rho.matrix[(c, r)];
                    }
                }
                super::operator::Storage::Dense(m) => {
                    for r in 0..n {
                        for c in 0..n {
                            tr += m[(r, c)] * rho.matrix[(c, r)];
                        }
                    }
                }
            }
            Ok(tr)
        }
    }
}
