//! Time-dependent operators `Σ_j c_j(t) O_j` and their assembly into a single
//! CSR matrix with a fixed sparsity pattern.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{CsrMatrix, HilbertSpace, Operator};

/// Scalar coefficient of one term.
#[derive(Clone)]
pub enum Coefficient {
    Constant(C64),
    /// `Σ_j amps_j e^{i freqs_j t}`.
    Tones { amps: Vec<C64>, freqs: Vec<f64> },
    Custom(Arc<dyn Fn(f64) -> C64 + Send + Sync>),
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(c) => write!(f, "Constant({c})"),
            Coefficient::Tones { amps, freqs } => write!(f, "Tones({amps:?}, {freqs:?})"),
            Coefficient::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl Coefficient {
    pub fn one() -> Self {
        Coefficient::Constant(C64::new(1.0, 0.0))
    }

    pub fn eval(&self, t: f64) -> C64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Tones { amps, freqs } => {
                amps.iter().zip(freqs).map(|(a, w)| a * C64::new(0.0, w * t).exp()).sum()
            }
            Coefficient::Custom(f) => f(t),
        }
    }

    pub fn conj(&self) -> Coefficient {
        match self {
            Coefficient::Constant(c) => Coefficient::Constant(c.conj()),
            Coefficient::Tones { amps, freqs } => Coefficient::Tones {
                amps: amps.iter().map(|a| a.conj()).collect(),
                freqs: freqs.iter().map(|w| -w).collect(),
            },
            Coefficient::Custom(f) => {
                let f = f.clone();
                Coefficient::Custom(Arc::new(move |t| f(t).conj()))
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Coefficient::Constant(_))
    }
}

#[derive(Clone, Debug)]
pub struct Term {
    pub op: Operator,
    pub coeff: Coefficient,
}

/// `H(t) = Σ_j c_j(t) O_j`.
#[derive(Clone, Debug)]
pub struct TimeDependentOperator {
    space: Arc<HilbertSpace>,
    terms: Vec<Term>,
    hermitian_closure: bool,
}

impl TimeDependentOperator {
    pub fn new(space: Arc<HilbertSpace>) -> Self {
        TimeDependentOperator { space, terms: Vec::new(), hermitian_closure: true }
    }

    pub fn from_static(op: Operator) -> Self {
        let mut h = Self::new(op.space().clone());
        h.terms.push(Term { op, coeff: Coefficient::one() });
        h.hermitian_closure = false;
        h
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// True when every term was added together with its conjugate partner or
    /// as a Hermitian term with a real constant coefficient.
    pub fn hermitian_closure(&self) -> bool {
        self.hermitian_closure
    }

    fn check(&self, op: &Operator) -> Result<()> {
        if **op.space() != *self.space {
            return Err(Error::SpaceMismatch(format!("{} vs {}", op.space(), self.space)));
        }
        Ok(())
    }

    /// Adds a term whose Hermiticity the caller vouches for.
    pub fn push_hermitian(&mut self, op: Operator, coeff: f64) -> Result<()> {
        self.check(&op)?;
        self.terms.push(Term { op, coeff: Coefficient::Constant(C64::new(coeff, 0.0)) });
        Ok(())
    }

    /// Adds `c(t) O + c(t)* O†`.
    pub fn push_with_conjugate(&mut self, op: Operator, coeff: Coefficient) -> Result<()> {
        self.check(&op)?;
        let adj = op.adjoint();
        let cc = coeff.conj();
        self.terms.push(Term { op, coeff });
        self.terms.push(Term { op: adj, coeff: cc });
        Ok(())
    }

    /// Adds a Hermitian `op` whose coefficient is real for every t.
    pub fn push_real(&mut self, op: Operator, coeff: Coefficient) -> Result<()> {
        self.check(&op)?;
        self.terms.push(Term { op, coeff });
        Ok(())
    }

    /// Adds an arbitrary term; clears the closure flag.
    pub fn push(&mut self, op: Operator, coeff: Coefficient) -> Result<()> {
        self.check(&op)?;
        self.terms.push(Term { op, coeff });
        self.hermitian_closure = false;
        Ok(())
    }

    pub fn coefficients(&self, t: f64) -> Vec<C64> {
        self.terms.iter().map(|term| term.coeff.eval(t)).collect()
    }

    pub fn is_static(&self) -> bool {
        self.terms.iter().all(|t| t.coeff.is_constant())
    }

    /// `H(t)` as an operator.
    pub fn at(&self, t: f64) -> Result<Operator> {
        let mut a = self.assemble();
        a.update(t);
        Operator::from_sparse(self.space.clone(), a.matrix().clone())
    }

    pub fn assemble(&self) -> AssembledOperator {
        AssembledOperator::new(self)
    }
}

/// Union-pattern CSR of a [`TimeDependentOperator`]; `update(t)` refills the
/// values in place without reallocating.
#[derive(Clone, Debug)]
pub struct AssembledOperator {
    matrix: CsrMatrix,
    constant: Vec<C64>,
    /// For each time-dependent term: (coefficient, positions into data, values).
    varying: Vec<(Coefficient, Vec<usize>, Vec<C64>)>,
}

impl AssembledOperator {
    fn new(h: &TimeDependentOperator) -> Self {
        let n = h.space.total_dim();
        let sparse: Vec<CsrMatrix> = h.terms.iter().map(|t| t.op.to_sparse()).collect();
        // the diagonal is always stored so that shift_diagonal reaches every row
        let trip = sparse
            .iter()
            .flat_map(|m| m.iter().map(|(r, c, _)| (r, c, C64::new(0.0, 0.0))))
            .chain((0..n).map(|r| (r, r, C64::new(0.0, 0.0))))
            .collect();
        let pattern = CsrMatrix::from_triplets(n, n, trip);
        let locate = |r: usize, c: usize| {
            let (idx, _) = pattern.row(r);
            pattern.indptr()[r] + idx.binary_search(&c).expect("entry in union pattern")
        };
        let mut constant = vec![C64::new(0.0, 0.0); pattern.nnz()];
        let mut varying = Vec::new();
        for (term, m) in h.terms.iter().zip(&sparse) {
            if let Coefficient::Constant(c) = term.coeff {
                for (r, col, v) in m.iter() {
                    constant[locate(r, col)] += c * v;
                }
            } else {
                let pos = m.iter().map(|(r, col, _)| locate(r, col)).collect();
                varying.push((term.coeff.clone(), pos, m.data().to_vec()));
            }
        }
        let mut matrix = pattern;
        matrix.data_mut().copy_from_slice(&constant);
        AssembledOperator { matrix, constant, varying }
    }

    pub fn is_static(&self) -> bool {
        self.varying.is_empty()
    }

    pub fn update(&mut self, t: f64) {
        if self.varying.is_empty() {
            return;
        }
        let data = self.matrix.data_mut();
        data.copy_from_slice(&self.constant);
        for (coeff, pos, vals) in &self.varying {
            let c = coeff.eval(t);
            for (&p, v) in pos.iter().zip(vals) {
                data[p] += c * v;
            }
        }
    }

    /// Adds `s` to every diagonal entry of the constant part.
    pub fn shift_diagonal(&mut self, s: C64) {
        let n = self.matrix.nrows();
        for r in 0..n {
            let (idx, _) = self.matrix.row(r);
            let k = idx.binary_search(&r).expect("diagonal in pattern");
            let p = self.matrix.indptr()[r] + k;
            self.constant[p] += s;
        }
        self.matrix.data_mut().copy_from_slice(&self.constant);
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// Gershgorin bounds of the Hermitian operator valid for all t, using
    /// the coefficient magnitude bound Σ|amps| for tone coefficients.
    pub fn spectral_bounds(&self) -> Option<(f64, f64)> {
        let mut m = self.matrix.clone();
        m.data_mut().copy_from_slice(&self.constant);
        let (mut lo, mut hi) = m.gershgorin_bounds();
        let n = m.nrows();
        let mut extra = vec![0.0; n];
        for (coeff, pos, vals) in &self.varying {
            let bound = match coeff {
                Coefficient::Tones { amps, .. } => amps.iter().map(|a| a.norm()).sum::<f64>(),
                _ => return None,
            };
            for (&p, v) in pos.iter().zip(vals) {
                let r = m.indptr().partition_point(|&s| s <= p) - 1;
                extra[r] += bound * v.norm();
            }
        }
        let e = extra.iter().copied().fold(0.0, f64::max);
        lo -= e;
        hi += e;
        Some((lo, hi))
    }
}
