//! Circuit constants to model rates. Natural units with ħ = 1: energies are
//! angular frequencies, and `charge` is the elementary charge expressed in the
//! same unit system as the capacitances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitParams {
    /// Charging energy E_C of the KPO.
    pub e_c: f64,
    /// Josephson energy E_J of the junction array.
    pub e_j: f64,
    /// Flux-modulation depth δE_J.
    pub delta_e_j: f64,
    /// Number of SQUIDs K₀.
    pub squids: f64,
    pub c_g: f64,
    pub c_s: f64,
    pub c_r: f64,
    pub l_r: f64,
    pub charge: f64,
}

/// Model rates produced by [`circuit_to_model`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitRates {
    pub kerr: f64,
    pub omega_p: f64,
    pub coupling: f64,
    pub delta: f64,
}

impl CircuitParams {
    fn check(&self) -> Result<()> {
        let fields = [
            ("e_c", self.e_c),
            ("e_j", self.e_j),
            ("squids", self.squids),
            ("c_g", self.c_g),
            ("c_s", self.c_s),
            ("c_r", self.c_r),
            ("l_r", self.l_r),
            ("charge", self.charge),
        ];
        for (field, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(field, format!("must be positive, got {v}")));
            }
        }
        if !(self.delta_e_j >= 0.0 && self.delta_e_j.is_finite()) {
            return Err(Error::param("delta_e_j", format!("must be non-negative, got {}", self.delta_e_j)));
        }
        Ok(())
    }

    /// KPO frequency ω_k = 8√(E_C E_J / K₀), as printed.
    pub fn omega_k(&self) -> f64 {
        8.0 * (self.e_c * self.e_j / self.squids).sqrt()
    }

    /// Cavity frequency ω₀ = 1/√(L_r C_r).
    pub fn omega_0(&self) -> f64 {
        1.0 / (self.l_r * self.c_r).sqrt()
    }

    /// Two-photon pump frequency 2ω_k.
    pub fn omega_pump(&self) -> f64 {
        2.0 * self.omega_k()
    }

    /// RMS voltage V_o = √(ω₀ / 2C_r).
    pub fn v_rms(&self) -> f64 {
        (self.omega_0() / (2.0 * self.c_r)).sqrt()
    }

    /// Zero-point fluctuation n₀ = (E_J / (32 K₀ E_C))^{1/4}.
    pub fn n_zpf(&self) -> f64 {
        (self.e_j / (32.0 * self.squids * self.e_c)).powf(0.25)
    }
}

/// `K = 2E_C/K₀²`, `Ω_p = δE_J ω_k/(8E_J)`, `J = 2C_g e V_o n₀/(C_g + C_s)`
/// (magnitude; the −i prefactor is a phase convention), `Δ = ω₀ − ω_k`.
pub fn circuit_to_model(c: &CircuitParams) -> Result<CircuitRates> {
    c.check()?;
    Ok(CircuitRates {
        kerr: 2.0 * c.e_c / (c.squids * c.squids),
        omega_p: c.delta_e_j * c.omega_k() / (8.0 * c.e_j),
        coupling: 2.0 * c.c_g * c.charge * c.v_rms() * c.n_zpf() / (c.c_g + c.c_s),
        delta: c.omega_0() - c.omega_k(),
    })
}
