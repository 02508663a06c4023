use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::sparse::CsrMatrix;
use super::space::HilbertSpace;
use crate::error::{Error, Result};

/// Total dimension above which constructors pick sparse storage.
pub const SPARSE_THRESHOLD: usize = 512;

#[derive(Clone, Debug, PartialEq)]
pub enum Storage {
    Dense(DMatrix<C64>),
    Sparse(CsrMatrix),
}

/// Square operator on a [`HilbertSpace`]. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    space: Arc<HilbertSpace>,
    storage: Storage,
}

impl Operator {
    /// Wraps a dense matrix, converting to sparse storage for large spaces.
    pub fn from_dense(space: Arc<HilbertSpace>, m: DMatrix<C64>) -> Result<Self> {
        check_square(&space, m.nrows(), m.ncols())?;
        let storage = if space.total_dim() > SPARSE_THRESHOLD {
            Storage::Sparse(CsrMatrix::from_dense(&m))
        } else {
            Storage::Dense(m)
        };
        Ok(Operator { space, storage })
    }

    /// Wraps a sparse matrix, converting to dense storage for small spaces.
    pub fn from_sparse(space: Arc<HilbertSpace>, m: CsrMatrix) -> Result<Self> {
        check_square(&space, m.nrows(), m.ncols())?;
        let storage = if space.total_dim() > SPARSE_THRESHOLD {
            Storage::Sparse(m)
        } else {
            Storage::Dense(m.to_dense())
        };
        Ok(Operator { space, storage })
    }

    pub fn with_storage(space: Arc<HilbertSpace>, storage: Storage) -> Result<Self> {
        let (r, c) = match &storage {
            Storage::Dense(m) => (m.nrows(), m.ncols()),
            Storage::Sparse(m) => (m.nrows(), m.ncols()),
        };
        check_square(&space, r, c)?;
        Ok(Operator { space, storage })
    }

    pub fn identity(space: Arc<HilbertSpace>) -> Self {
        let n = space.total_dim();
        Operator::from_sparse(space, CsrMatrix::identity(n)).expect("identity is square")
    }

    pub fn zeros(space: Arc<HilbertSpace>) -> Self {
        let n = space.total_dim();
        Operator::from_sparse(space, CsrMatrix::zeros(n, n)).expect("zeros is square")
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.total_dim()
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Sparse(m) => m.to_dense(),
        }
    }

    pub fn to_sparse(&self) -> CsrMatrix {
        match &self.storage {
            Storage::Dense(m) => CsrMatrix::from_dense(m),
            Storage::Sparse(m) => m.clone(),
        }
    }

    /// Same operator with the other storage mode.
    pub fn toggled(&self) -> Self {
        let storage = match &self.storage {
            Storage::Dense(m) => Storage::Sparse(CsrMatrix::from_dense(m)),
            Storage::Sparse(m) => Storage::Dense(m.to_dense()),
        };
        Operator { space: self.space.clone(), storage }
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        match &self.storage {
            Storage::Dense(m) => m[(r, c)],
            Storage::Sparse(m) => m.get(r, c),
        }
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim()];
        match &self.storage {
            Storage::Dense(m) => {
                for (r, out) in y.iter_mut().enumerate() {
                    *out = m.row(r).iter().zip(x).map(|(a, b)| a * b).sum();
                }
            }
            Storage::Sparse(m) => m.matvec(x, &mut y),
        }
        y
    }

    fn same_space(&self, other: &Operator) -> Result<()> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch(format!("{} vs {}", self.space, other.space)));
        }
        Ok(())
    }

    fn combine(&self, other: &Operator, dense: impl Fn(&DMatrix<C64>, &DMatrix<C64>) -> DMatrix<C64>, sparse: impl Fn(&CsrMatrix, &CsrMatrix) -> CsrMatrix) -> Result<Operator> {
        self.same_space(other)?;
        let storage = match (&self.storage, &other.storage) {
            (Storage::Dense(a), Storage::Dense(b)) => Storage::Dense(dense(a, b)),
            (Storage::Sparse(a), Storage::Sparse(b)) => Storage::Sparse(sparse(a, b)),
            (Storage::Dense(a), Storage::Sparse(b)) => Storage::Dense(dense(a, &b.to_dense())),
            (Storage::Sparse(a), Storage::Dense(b)) => Storage::Dense(dense(&a.to_dense(), b)),
        };
        Ok(Operator { space: self.space.clone(), storage })
    }

    pub fn matmul(&self, other: &Operator) -> Result<Operator> {
        self.combine(other, |a, b| a * b, |a, b| a.matmul(b))
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.combine(other, |a, b| a + b, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Operator {
        let storage = match &self.storage {
            Storage::Dense(m) => Storage::Dense(m * s),
            Storage::Sparse(m) => Storage::Sparse(m.scale(s)),
        };
        Operator { space: self.space.clone(), storage }
    }

    pub fn scale_re(&self, s: f64) -> Operator {
        self.scale(C64::new(s, 0.0))
    }

    pub fn adjoint(&self) -> Operator {
        let storage = match &self.storage {
            Storage::Dense(m) => Storage::Dense(m.adjoint()),
            Storage::Sparse(m) => Storage::Sparse(m.adjoint()),
        };
        Operator { space: self.space.clone(), storage }
    }

    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// Largest elementwise modulus.
    pub fn max_abs(&self) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m.iter().map(|v| v.norm()).fold(0.0, f64::max),
            Storage::Sparse(m) => m.data().iter().map(|v| v.norm()).fold(0.0, f64::max),
        }
    }

    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// Max elementwise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        match &self.storage {
            Storage::Dense(m) => (m - m.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max),
            Storage::Sparse(m) => m.max_abs_diff(&m.adjoint()),
        }
    }

    /// Eigenvalues of a Hermitian operator, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.to_dense().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }
}

fn check_square(space: &HilbertSpace, r: usize, c: usize) -> Result<()> {
    let n = space.total_dim();
    if r != n || c != n {
        return Err(Error::InvalidDimension(format!("matrix is {r}x{c}, space {space} needs {n}x{n}")));
    }
    Ok(())
}
