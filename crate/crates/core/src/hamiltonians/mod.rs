//! Hamiltonians of two KPOs coupled to a bus cavity: the full lab-frame model,
//! the effective cat-subspace MS models, and the circuit-parameter mapping.

mod basis;
mod circuit;
mod params;
mod tdo;

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub use basis::{kerr_matrix, ModeBasis};
pub use circuit::{circuit_to_model, CircuitParams, CircuitRates};
pub use params::{angular, drive_map, drive_map_inverse, Cutoffs, NoiseRates, SystemParams};
pub use tdo::{AssembledOperator, Coefficient, Term, TimeDependentOperator};

use crate::cat::{cat_state, qubit, Parity};
use crate::error::{Error, Result};
use crate::fock::{annihilation, embed, CsrMatrix, HilbertSpace, Ket, Operator, Storage};

pub const K1: &str = "k1";
pub const K2: &str = "k2";
pub const CAV: &str = "cav";

/// Which KPO.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kpo {
    One,
    Two,
}

impl Kpo {
    pub fn label(self) -> &'static str {
        match self {
            Kpo::One => K1,
            Kpo::Two => K2,
        }
    }
}

fn single_op(label: &str, m: DMatrix<C64>) -> Result<Operator> {
    let space = Arc::new(HilbertSpace::single(label, m.nrows())?);
    Operator::with_storage(space, Storage::Sparse(CsrMatrix::from_dense(&m)))
}

/// Operators of the full model on `k1 ⊗ k2 ⊗ cav`.
#[derive(Clone, Debug)]
pub struct KpoSystem {
    pub space: Arc<HilbertSpace>,
    pub basis: ModeBasis,
    /// a_1, a_2.
    pub a: [Operator; 2],
    pub a0: Operator,
    /// H_Kerr on each KPO.
    pub kerr: [Operator; 2],
}

impl KpoSystem {
    pub fn new(params: &SystemParams) -> Result<Self> {
        params.validate()?;
        let basis = ModeBasis::for_params(params)?;
        let m = basis.dim();
        let space = Arc::new(HilbertSpace::new([(K1, m), (K2, m), (CAV, params.cutoffs.cavity)])?);
        let mut a = Vec::new();
        let mut kerr = Vec::new();
        for label in [K1, K2] {
            a.push(embed(&single_op(label, basis.annihilation.clone())?, label, &space)?);
            kerr.push(embed(&single_op(label, basis.kerr.clone())?, label, &space)?);
        }
        let a0 = embed(&annihilation(params.cutoffs.cavity)?, CAV, &space)?;
        let [a1, a2]: [Operator; 2] = a.try_into().unwrap();
        let [k1, k2]: [Operator; 2] = kerr.try_into().unwrap();
        Ok(KpoSystem { space, basis, a: [a1, a2], a0, kerr: [k1, k2] })
    }

    /// `|C_{p1}⟩|C_{p2}⟩|0⟩` with Fock-space cats mapped into the KPO basis.
    pub fn cat_product(&self, params: &SystemParams, p1: Parity, p2: Parity) -> Result<Ket> {
        let c1 = self.kpo_cat(params, p1)?;
        let c2 = self.kpo_cat(params, p2)?;
        let mut vac = nalgebra::DVector::zeros(params.cutoffs.cavity);
        vac[0] = C64::new(1.0, 0.0);
        Ket::new(self.space.clone(), c1.kronecker(&c2).kronecker(&vac))
    }

    fn kpo_cat(&self, params: &SystemParams, p: Parity) -> Result<nalgebra::DVector<C64>> {
        let c = cat_state(params.alpha, p, self.basis.fock_cutoff)?;
        let (v, lost) = self.basis.from_fock(c.amplitudes())?;
        if lost > 1e-6 {
            return Err(Error::TruncationLoss { deficit: lost, limit: 1e-6, cutoff: self.basis.dim() });
        }
        log::debug!("cat {} projected into KPO basis: norm loss {lost:.3e}", p.symbol());
        let n = v.norm();
        Ok(v / C64::new(n, 0.0))
    }

    /// Full Hamiltonian `Σ_k H_k^Kerr + Σ_k [J Σ_n r_n e^{i(nζ + Δ − Δ_drive)t} a_k a₀† + H.c.]`.
    pub fn hamiltonian(&self, params: &SystemParams) -> Result<TimeDependentOperator> {
        let mut h = TimeDependentOperator::new(self.space.clone());
        h.push_hermitian(self.kerr[0].add(&self.kerr[1])?, 1.0)?;
        let a0d = self.a0.adjoint();
        let hop = self.a[0].add(&self.a[1])?.matmul(&a0d)?;
        let (weights, freqs) = params.drive_tones();
        let amps = weights.iter().map(|r| C64::new(params.coupling * r, 0.0)).collect();
        h.push_with_conjugate(hop, Coefficient::Tones { amps, freqs })?;
        Ok(h)
    }
}

/// H_Kerr of one KPO embedded in the full model space.
pub fn kerr_hamiltonian(params: &SystemParams, which: Kpo) -> Result<Operator> {
    let sys = KpoSystem::new(params)?;
    Ok(match which {
        Kpo::One => sys.kerr[0].clone(),
        Kpo::Two => sys.kerr[1].clone(),
    })
}

pub fn full_hamiltonian(params: &SystemParams) -> Result<TimeDependentOperator> {
    KpoSystem::new(params)?.hamiltonian(params)
}

/// Space of two cat qubits and the cavity.
pub fn cat_qubit_space(cavity: usize) -> Result<Arc<HilbertSpace>> {
    Ok(Arc::new(HilbertSpace::new([(K1, 2), (K2, 2), (CAV, cavity)])?))
}

/// Collective `S_x = ½(σx₁ + σx₂)` on the cat-qubit space.
pub fn collective_sx(space: &Arc<HilbertSpace>) -> Result<Operator> {
    let sx = qubit::sigma_x();
    let x1 = embed(&relabel(&sx, K1)?, K1, space)?;
    let x2 = embed(&relabel(&sx, K2)?, K2, space)?;
    Ok(x1.add(&x2)?.scale_re(0.5))
}

pub(crate) fn relabel(op: &Operator, label: &str) -> Result<Operator> {
    let space = Arc::new(HilbertSpace::single(label, op.dim())?);
    Operator::with_storage(space, op.storage().clone())
}

/// Cavity quadratures `x = (a₀ + a₀†)/√2`, `p = i(a₀† − a₀)/√2` on `space`.
pub fn quadratures(space: &Arc<HilbertSpace>) -> Result<(Operator, Operator)> {
    let a0 = embed(&annihilation(space.cutoff(CAV)?)?, CAV, space)?;
    let a0d = a0.adjoint();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let x = a0.add(&a0d)?.scale_re(s);
    let p = a0d.sub(&a0)?.scale(C64::new(0.0, s));
    Ok((x, p))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EffectiveForm {
    Ladder,
    Quadrature,
}

/// Cat-subspace MS Hamiltonian on `cat ⊗ cat ⊗ cav`:
/// `2Jα S_x Σ_n r_n (a₀ e^{−iθ_n(t)} + a₀† e^{iθ_n(t)})`, `θ_n = (nζ + Δ − Δ_drive)t`,
/// or equivalently `f(t) S_x x + g(t) S_x p` with `f = 2√2Jα Σ r_n cos θ_n`,
/// `g = 2√2Jα Σ r_n sin θ_n`.
pub fn effective_ms_hamiltonian(params: &SystemParams, form: EffectiveForm) -> Result<TimeDependentOperator> {
    params.validate()?;
    let space = cat_qubit_space(params.cutoffs.cavity)?;
    let sx = collective_sx(&space)?;
    let (weights, freqs) = params.drive_tones();
    let scale = 2.0 * params.coupling * params.alpha;
    let mut h = TimeDependentOperator::new(space.clone());
    match form {
        EffectiveForm::Ladder => {
            let a0 = embed(&annihilation(params.cutoffs.cavity)?, CAV, &space)?;
            let op = sx.matmul(&a0.adjoint())?;
            let amps = weights.iter().map(|r| C64::new(scale * r, 0.0)).collect();
            h.push_with_conjugate(op, Coefficient::Tones { amps, freqs })?;
        }
        EffectiveForm::Quadrature => {
            let (x, p) = quadratures(&space)?;
            let c = std::f64::consts::SQRT_2 * scale;
            let both = |f: &Vec<f64>| f.iter().copied().chain(f.iter().map(|w| -w)).collect::<Vec<_>>();
            // cos θ = (e^{iθ} + e^{−iθ})/2, sin θ = (e^{iθ} − e^{−iθ})/2i
            let cos_amps = weights.iter().map(|r| C64::new(c * r / 2.0, 0.0));
            let cos_amps = cos_amps.clone().chain(cos_amps).collect();
            let sin_amps = weights.iter().map(|r| C64::new(0.0, -c * r / 2.0));
            let sin_amps = sin_amps.clone().chain(sin_amps.map(|a| -a)).collect();
            h.push_real(sx.matmul(&x)?, Coefficient::Tones { amps: cos_amps, freqs: both(&freqs) })?;
            h.push_real(sx.matmul(&p)?, Coefficient::Tones { amps: sin_amps, freqs: both(&freqs) })?;
        }
    }
    Ok(h)
}
