//! Closed-form propagators of the effective MS Hamiltonians. The commutator of
//! the Hamiltonian with itself at two times is proportional to S_x², so the
//! Magnus series stops at second order.

use std::f64::consts::{FRAC_PI_2, SQRT_2};
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{annihilation, embed, expm_dense, HilbertSpace, Operator, C64};
use crate::hamiltonians::{cat_qubit_space, collective_sx, quadratures, SystemParams, CAV, K1, K2};

/// Single-tone displacement and phase for `H = c S_x (a₀ e^{−iωt} + a₀† e^{iωt})`:
/// `χ(t) = (ic/ω)(1 − e^{iωt})`, `β(t) = (c/ω)²(sin ωt − ωt)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MagnusCoefficients {
    /// Drive amplitude `c = 2Jα r₁`.
    pub amplitude: f64,
    /// Tone frequency in the cavity frame.
    pub omega: f64,
}

impl MagnusCoefficients {
    pub fn new(amplitude: f64, omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega != 0.0) {
            return Err(Error::param("omega", "single-tone frequency must be finite and non-zero"));
        }
        Ok(MagnusCoefficients { amplitude, omega })
    }

    pub fn from_params(params: &SystemParams) -> Result<Self> {
        if params.n_tones() != 1 {
            return Err(Error::param("weights", format!("single-tone model needs one tone, got {}", params.n_tones())));
        }
        let (w, f) = params.drive_tones();
        Self::new(2.0 * params.coupling * params.alpha * w[0], f[0])
    }

    pub fn chi(&self, t: f64) -> C64 {
        let phase = C64::new(0.0, self.omega * t).exp();
        C64::new(0.0, self.amplitude / self.omega) * (C64::new(1.0, 0.0) - phase)
    }

    pub fn beta(&self, t: f64) -> f64 {
        let r = self.amplitude / self.omega;
        let x = self.omega * t;
        r * r * (x.sin() - x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MagnusModel {
    SingleTone,
    Composite,
}

/// `sin(wt)/w`, continuous at w = 0.
fn sinc_t(w: f64, t: f64) -> f64 {
    if (w * t).abs() < 1e-8 {
        t * (1.0 - (w * t).powi(2) / 6.0)
    } else {
        (w * t).sin() / w
    }
}

/// `(F, G, A)` for `H = f S_x x + g S_x p` with `f = c Σ r cos ω_n t`,
/// `g = c Σ r sin ω_n t`, `c = 2√2Jα`: `F = ∫f`, `G = ∫g`, `A = −∫F g`.
pub fn composite_phases(params: &SystemParams, t: f64) -> Result<(f64, f64, f64)> {
    let (w, om) = params.drive_tones();
    if om.iter().any(|&o| o == 0.0 || !o.is_finite()) {
        return Err(Error::param("delta", "a drive tone sits on the cavity resonance"));
    }
    let c = 2.0 * SQRT_2 * params.coupling * params.alpha;
    let f: f64 = w.iter().zip(&om).map(|(r, o)| r * (o * t).sin() / o).sum::<f64>() * c;
    let g: f64 = w.iter().zip(&om).map(|(r, o)| r * 2.0 * (0.5 * o * t).sin().powi(2) / o).sum::<f64>() * c;
    let mut a = 0.0;
    for (rn, on) in w.iter().zip(&om) {
        for (rm, omm) in w.iter().zip(&om) {
            // ∫₀ᵗ sin(ω_n s) sin(ω_m s) ds
            let overlap = 0.5 * (sinc_t(on - omm, t) - sinc_t(on + omm, t));
            a -= rn * rm / on * overlap;
        }
    }
    Ok((f, g, a * c * c))
}

/// Propagator of the effective MS Hamiltonian on `cat ⊗ cat ⊗ cavity`:
/// `exp{−i[(χa₀† + χ*a₀)S_x + βS_x²]}` for one tone, or the ordered product
/// `e^{−iF S_x x} e^{−iG S_x p} e^{−iA S_x²}` for a composite drive.
pub fn magnus_propagator(params: &SystemParams, t: f64, model: MagnusModel) -> Result<Operator> {
    params.validate()?;
    let space = cat_qubit_space(params.cutoffs.cavity)?;
    let sx = collective_sx(&space)?.to_dense();
    let sx2 = &sx * &sx;
    let mi = C64::new(0.0, -1.0);
    let u = match model {
        MagnusModel::SingleTone => {
            let m = MagnusCoefficients::from_params(params)?;
            let a0 = embed(&annihilation(params.cutoffs.cavity)?, CAV, &space)?.to_dense();
            let chi = m.chi(t);
            let disp = a0.adjoint() * chi + &a0 * chi.conj();
            let gen = &disp * &sx + &sx2 * C64::new(m.beta(t), 0.0);
            expm_dense(&(gen * mi))?
        }
        MagnusModel::Composite => {
            let (f, g, a) = composite_phases(params, t)?;
            let (x, p) = quadratures(&space)?;
            let ux = expm_dense(&(&sx * x.to_dense() * (mi * f)))?;
            let up = expm_dense(&(&sx * p.to_dense() * (mi * g)))?;
            let ua = expm_dense(&(&sx2 * (mi * a)))?;
            ux * up * ua
        }
    };
    Operator::from_dense(space, u)
}

/// `exp(iπ S_x²/2)` on two cat qubits, basis order (|C₊⟩, |C₋⟩) per qubit.
pub fn ms_gate_ideal() -> Operator {
    let space = Arc::new(HilbertSpace::new([(K1, 2), (K2, 2)]).expect("two-qubit space"));
    let x = DMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    let id = DMatrix::<C64>::identity(2, 2);
    let sx = (x.kronecker(&id) + id.kronecker(&x)) * C64::new(0.5, 0.0);
    let u = expm_dense(&(&sx * &sx * C64::new(0.0, FRAC_PI_2))).expect("finite generator");
    Operator::from_dense(space, u).expect("matching dimension")
}
