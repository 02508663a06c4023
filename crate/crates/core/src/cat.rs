//! Cat-state bases of a single KPO, the cat-subspace projector, cat-level
//! Pauli operators and the effective single-photon-loss jump operator.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{coherent_state, displaced_fock, embed, HilbertSpace, Ket, Operator, Storage, MODE, TRUNCATION_LIMIT};

/// Label of a cat state. `Even` is |C₊⟩ (support on even Fock levels),
/// `Odd` is |C₋⟩. For excited cats the same enum selects the ± branch of
/// `[D(α) ∓ D(−α)]|v⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub fn flipped(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    /// Qubit index in the cat basis: |C₊⟩ = 0, |C₋⟩ = 1.
    pub fn index(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Parity::Even => "+",
            Parity::Odd => "-",
        }
    }
}

/// Analytic normalization `N± = [2(1 ± e^{−2α²})]^{−1/2}`.
pub fn cat_norm(alpha: f64, parity: Parity) -> f64 {
    (2.0 * (1.0 + parity.sign() * (-2.0 * alpha * alpha).exp())).powf(-0.5)
}

/// `N±(|α⟩ ± |−α⟩)`, normalized in the truncated space.
pub fn cat_state(alpha: f64, parity: Parity, cutoff: usize) -> Result<Ket> {
    if alpha < 0.0 || !alpha.is_finite() {
        return Err(Error::param("alpha", format!("must be finite and non-negative, got {alpha}")));
    }
    if parity == Parity::Odd && alpha == 0.0 {
        return Err(Error::DegenerateState("odd cat with alpha = 0 is the zero vector".into()));
    }
    let plus = coherent_state(C64::new(alpha, 0.0), cutoff)?;
    let minus = coherent_state(C64::new(-alpha, 0.0), cutoff)?;
    plus.add(&minus.scale(C64::new(parity.sign(), 0.0)))?.normalized()
}

fn check_excited_cutoff(alpha: f64, v: usize, cutoff: usize) -> Result<()> {
    let need = alpha * alpha + 5.0 * alpha.abs() + v as f64 + 4.0;
    if (cutoff as f64) < need {
        return Err(Error::InvalidDimension(format!(
            "excited cat v={v} at alpha={alpha} needs cutoff >= {}, got {cutoff}",
            need.ceil()
        )));
    }
    Ok(())
}

/// Raw excited cat `N^e [D(α) ∓ D(−α)]|v⟩` with its norm factor N^e.
/// Not orthogonal to the cat states at finite α; see [`excited_cat`].
pub fn raw_excited_cat(alpha: f64, parity: Parity, v: usize, cutoff: usize) -> Result<(Ket, f64)> {
    if v < 1 {
        return Err(Error::param("v", "excitation level must be at least 1"));
    }
    check_excited_cutoff(alpha, v, cutoff)?;
    let (dp, def_p) = displaced_fock(C64::new(alpha, 0.0), v, cutoff)?;
    let (dm, def_m) = displaced_fock(C64::new(-alpha, 0.0), v, cutoff)?;
    let deficit = def_p.max(def_m);
    if deficit > TRUNCATION_LIMIT {
        return Err(Error::TruncationLoss { deficit, limit: TRUNCATION_LIMIT, cutoff });
    }
    // upper sign (Even / "+") takes the difference
    let s = -parity.sign();
    let amps: Vec<C64> = dp.iter().zip(&dm).map(|(a, b)| a + b * s).collect();
    let raw = Ket::from_vec(Arc::new(HilbertSpace::single(MODE, cutoff)?), amps)?;
    let nrm = raw.norm();
    if nrm < 1e-12 {
        return Err(Error::DegenerateState(format!("excited cat v={v} vanishes at alpha={alpha}")));
    }
    Ok((raw.normalized()?, 1.0 / nrm))
}

/// Excited cat orthonormalized against |C±⟩ and all lower excited cats.
pub fn excited_cat(alpha: f64, parity: Parity, v: usize, cutoff: usize) -> Result<Ket> {
    if v < 1 {
        return Err(Error::param("v", "excitation level must be at least 1"));
    }
    check_excited_cutoff(alpha, v, cutoff)?;
    let basis = CatBasis::new(alpha, cutoff, v)?;
    let (_, _, k, _) = basis.excited.into_iter().find(|(p, lv, _, _)| *p == parity && *lv == v).unwrap();
    Ok(k)
}

/// Orthonormal cat basis of one KPO: |C₊⟩, |C₋⟩ and Gram–Schmidt-orthonormalized
/// excited cats for v = 1..=v_max (order: v=1 +, v=1 −, v=2 +, ...).
#[derive(Clone, Debug)]
pub struct CatBasis {
    pub alpha: f64,
    pub cutoff: usize,
    pub plus: Ket,
    pub minus: Ket,
    /// Analytic N₊, N₋.
    pub norms: (f64, f64),
    /// (parity, v, orthonormalized ket, raw N^e) for each excited state.
    pub excited: Vec<(Parity, usize, Ket, f64)>,
}

impl CatBasis {
    pub fn new(alpha: f64, cutoff: usize, v_max: usize) -> Result<Self> {
        if alpha <= 0.0 {
            return Err(Error::param("alpha", "cat basis needs alpha > 0"));
        }
        let plus = cat_state(alpha, Parity::Even, cutoff)?;
        let minus = cat_state(alpha, Parity::Odd, cutoff)?;
        let mut basis: Vec<DVector<C64>> = vec![plus.amplitudes().clone(), minus.amplitudes().clone()];
        let mut excited = Vec::new();
        for v in 1..=v_max {
            for parity in [Parity::Even, Parity::Odd] {
                let (k, ne) = raw_excited_cat(alpha, parity, v, cutoff)?;
                let mut x = k.amplitudes().clone();
                // two passes of modified Gram-Schmidt
                for _ in 0..2 {
                    for b in &basis {
                        let proj = b.dotc(&x);
                        x -= b * proj;
                    }
                }
                let n = x.norm();
                if n < 1e-8 {
                    return Err(Error::DegenerateState(format!("excited cat v={v} is linearly dependent")));
                }
                x /= C64::new(n, 0.0);
                basis.push(x.clone());
                excited.push((parity, v, Ket::new(plus.space().clone(), x)?, ne));
            }
        }
        Ok(CatBasis { alpha, cutoff, norms: (cat_norm(alpha, Parity::Even), cat_norm(alpha, Parity::Odd)), plus, minus, excited })
    }

    pub fn cat(&self, parity: Parity) -> &Ket {
        match parity {
            Parity::Even => &self.plus,
            Parity::Odd => &self.minus,
        }
    }

    /// Columns: the orthonormal basis vectors in order.
    pub fn isometry(&self) -> DMatrix<C64> {
        let mut cols = vec![self.plus.amplitudes().clone(), self.minus.amplitudes().clone()];
        cols.extend(self.excited.iter().map(|(_, _, k, _)| k.amplitudes().clone()));
        DMatrix::from_columns(&cols)
    }

    pub fn projector(&self) -> Result<Operator> {
        let w = self.isometry();
        Operator::from_dense(self.plus.space().clone(), &w * w.adjoint())
    }

    /// Cat-level Pauli operators on the single-KPO Fock space.
    pub fn paulis(&self) -> Result<CatPauliSet> {
        let p = self.plus.amplitudes();
        let m = self.minus.amplitudes();
        let space = self.plus.space().clone();
        let outer = |a: &DVector<C64>, b: &DVector<C64>| a * b.adjoint();
        let sigma_plus = outer(m, p);
        let sigma_minus = outer(p, m);
        let sx = &sigma_plus + &sigma_minus;
        let sy = (&sigma_plus - &sigma_minus) * C64::new(0.0, 1.0);
        let sz = outer(p, p) - outer(m, m);
        let op = |mat: DMatrix<C64>| Operator::with_storage(space.clone(), Storage::Dense(mat));
        Ok(CatPauliSet {
            sigma_x: op(sx)?,
            sigma_y: op(sy)?,
            sigma_z: op(sz)?,
            sigma_plus: op(sigma_plus)?,
            sigma_minus: op(sigma_minus)?,
        })
    }
}

/// P = Σ|C±⟩⟨C±| + Σ_{v≤v_max} |ψ^{e,v}_±⟩⟨ψ^{e,v}_±| on one KPO.
pub fn cat_projector(alpha: f64, v_max: usize, cutoff: usize) -> Result<Operator> {
    CatBasis::new(alpha, cutoff, v_max)?.projector()
}

/// Cat-level Pauli operators. σ⁺ = |C₋⟩⟨C₊|, σ⁻ = |C₊⟩⟨C₋|,
/// σy = i(σ⁺ − σ⁻) so that [σx, σy] = 2iσz with σz = |C₊⟩⟨C₊| − |C₋⟩⟨C₋|.
#[derive(Clone, Debug)]
pub struct CatPauliSet {
    pub sigma_x: Operator,
    pub sigma_y: Operator,
    pub sigma_z: Operator,
    pub sigma_plus: Operator,
    pub sigma_minus: Operator,
}

impl CatPauliSet {
    /// `S_x = ½ Σ_k σx_k` on a space whose KPO factors are `labels`.
    pub fn collective_sx(&self, space: &Arc<HilbertSpace>, labels: &[&str]) -> Result<Operator> {
        let mut sx = Operator::zeros(space.clone());
        for l in labels {
            sx = sx.add(&embed(&self.sigma_x, l, space)?)?;
        }
        Ok(sx.scale_re(0.5))
    }
}

/// 2×2 operators on the cat-qubit level, basis (|C₊⟩, |C₋⟩).
pub mod qubit {
    use super::*;

    pub const LABEL: &str = "cat";

    fn mat(entries: [[C64; 2]; 2]) -> Operator {
        let m = DMatrix::from_fn(2, 2, |r, c| entries[r][c]);
        Operator::with_storage(Arc::new(HilbertSpace::single(LABEL, 2).unwrap()), Storage::Dense(m)).unwrap()
    }

    const O: C64 = C64 { re: 0.0, im: 0.0 };
    const I1: C64 = C64 { re: 1.0, im: 0.0 };
    const II: C64 = C64 { re: 0.0, im: 1.0 };

    pub fn sigma_x() -> Operator {
        mat([[O, I1], [I1, O]])
    }

    pub fn sigma_y() -> Operator {
        mat([[O, -II], [II, O]])
    }

    pub fn sigma_z() -> Operator {
        mat([[I1, O], [O, -I1]])
    }

    /// |C₋⟩⟨C₊|
    pub fn sigma_plus() -> Operator {
        mat([[O, O], [I1, O]])
    }

    /// |C₊⟩⟨C₋|
    pub fn sigma_minus() -> Operator {
        mat([[O, I1], [O, O]])
    }

    pub fn identity() -> Operator {
        mat([[I1, O], [O, I1]])
    }
}

/// Cat-level jump operator whose dissipator reproduces single-photon loss
/// restricted to the cat subspace:
/// `α (1 − e^{−4α²})^{−1/4} (σx + i e^{−2α²} σy)` with σy = i(σ⁺ − σ⁻).
///
/// The exact projected operator is `P a P = α(√tanh α² σ⁺ + √coth α² σ⁻)`, i.e.
/// the same direction with amplitude prefactor `α (1 − e^{−4α²})^{−1/2}`; the two
/// generators differ by O(α² e^{−4α²}).
pub fn effective_loss_jump(alpha: f64) -> Result<Operator> {
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(Error::param("alpha", "effective loss needs alpha > 0"));
    }
    let x2 = alpha * alpha;
    let pref = alpha / (1.0 - (-4.0 * x2).exp()).powf(0.25);
    let eps = (-2.0 * x2).exp();
    let jump = qubit::sigma_x().add(&qubit::sigma_y().scale(C64::new(0.0, eps)))?;
    Ok(jump.scale_re(pref))
}

/// Energy gap between the cat manifold and the first excited states, 4Kα².
pub fn energy_gap(kerr: f64, alpha: f64) -> f64 {
    4.0 * kerr * alpha * alpha
}
