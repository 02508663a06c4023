//! Physical parameters. Times are in μs and angular frequencies in rad/μs,
//! so a rate of `2π · 1` is 1 MHz.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::default_kpo_cutoff;
use crate::pulses::shapira_weights;

/// `2π · f_MHz` in rad/μs.
pub fn angular(f_mhz: f64) -> f64 {
    2.0 * PI * f_mhz
}

/// Lindblad rates in rad/μs: single-photon loss κ and pure dephasing γ on the
/// KPOs, κ₀ and γ₀ on the cavity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseRates {
    pub kappa: f64,
    pub kappa0: f64,
    pub gamma: f64,
    pub gamma0: f64,
}

impl NoiseRates {
    /// Cavity rates equal to the KPO rates.
    pub fn uniform(kappa: f64, gamma: f64) -> Self {
        NoiseRates { kappa, kappa0: kappa, gamma, gamma0: gamma }
    }

    pub fn is_zero(&self) -> bool {
        self.kappa == 0.0 && self.kappa0 == 0.0 && self.gamma == 0.0 && self.gamma0 == 0.0
    }
}

/// Fock cutoffs. With `kerr_levels = Some(M)` each KPO is represented by the
/// M highest eigenstates of its Kerr Hamiltonian, computed at Fock cutoff `kpo`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cutoffs {
    pub kpo: usize,
    pub cavity: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kerr_levels: Option<usize>,
}

impl Cutoffs {
    pub fn fock(kpo: usize, cavity: usize) -> Self {
        Cutoffs { kpo, cavity, kerr_levels: None }
    }

    /// Every retained dimension raised by `extra`.
    pub fn raised(&self, extra: usize) -> Self {
        Cutoffs {
            kpo: self.kpo + extra,
            cavity: self.cavity + extra,
            kerr_levels: self.kerr_levels.map(|m| m + extra),
        }
    }

    pub fn kpo_dim(&self) -> usize {
        self.kerr_levels.unwrap_or(self.kpo)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    /// Kerr nonlinearity K.
    pub kerr: f64,
    /// Two-photon drive amplitude Ω_p (real, positive).
    pub omega_p: f64,
    /// KPO–cavity coupling J.
    pub coupling: f64,
    /// Physical detuning Δ = ω₀ − ω_k.
    pub delta: f64,
    /// Detuning the composite drive was synthesized for. Equal to `delta`
    /// unless a detuning error is being modeled.
    pub drive_delta: f64,
    pub alpha: f64,
    /// Tone spacing ζ.
    pub zeta: f64,
    pub weights: Vec<f64>,
    pub gate_time: f64,
    #[serde(default)]
    pub noise: NoiseRates,
    pub cutoffs: Cutoffs,
}

impl SystemParams {
    /// α = 2, K/2π = 20 MHz, J/2π = 1 MHz, Ω_p = Kα², Δ = ζ = 4Jα, single tone.
    pub fn paper() -> Self {
        let alpha = 2.0;
        let kerr = angular(20.0);
        let coupling = angular(1.0);
        let delta = 4.0 * coupling * alpha;
        SystemParams {
            kerr,
            omega_p: kerr * alpha * alpha,
            coupling,
            delta,
            drive_delta: delta,
            alpha,
            zeta: delta,
            weights: vec![1.0],
            gate_time: 2.0 * PI / delta,
            noise: NoiseRates::default(),
            cutoffs: Cutoffs::fock(default_kpo_cutoff(alpha), 8),
        }
    }

    /// Replaces the weights with the N-tone composite family.
    pub fn with_tones(mut self, n: usize) -> Result<Self> {
        self.weights = shapira_weights(n)?;
        Ok(self)
    }

    pub fn with_noise(mut self, noise: NoiseRates) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_cutoffs(mut self, cutoffs: Cutoffs) -> Self {
        self.cutoffs = cutoffs;
        self
    }

    pub fn n_tones(&self) -> usize {
        self.weights.len()
    }

    /// Complex amplitudes and angular frequencies of the coupling drive:
    /// `J Σ_n r_n e^{i(nζ + Δ − Δ_drive)t}`.
    pub fn drive_tones(&self) -> (Vec<f64>, Vec<f64>) {
        let offset = self.delta - self.drive_delta;
        let freqs = (1..=self.weights.len()).map(|n| n as f64 * self.zeta + offset).collect();
        (self.weights.clone(), freqs)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("kerr", self.kerr),
            ("omega_p", self.omega_p),
            ("coupling", self.coupling),
            ("delta", self.delta),
            ("drive_delta", self.drive_delta),
            ("alpha", self.alpha),
            ("zeta", self.zeta),
            ("gate_time", self.gate_time),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(field, format!("must be positive and finite, got {v}")));
            }
        }
        let a2k = self.alpha * self.alpha * self.kerr;
        if ((a2k - self.omega_p) / self.omega_p).abs() > 1e-9 {
            return Err(Error::param("omega_p", format!("alpha^2 K = {a2k} but omega_p = {}", self.omega_p)));
        }
        let period = 2.0 * PI / self.zeta;
        if ((self.gate_time - period) / period).abs() > 1e-12 {
            return Err(Error::param("gate_time", format!("expected 2π/zeta = {period}, got {}", self.gate_time)));
        }
        if self.weights.is_empty() {
            return Err(Error::param("weights", "at least one tone is required"));
        }
        if self.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::param("weights", "non-finite weight"));
        }
        let n = self.noise;
        for (field, v) in [("kappa", n.kappa), ("kappa0", n.kappa0), ("gamma", n.gamma), ("gamma0", n.gamma0)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(field, format!("rates must be non-negative, got {v}")));
            }
        }
        let c = self.cutoffs;
        if c.kpo < 2 || c.cavity < 2 {
            return Err(Error::param("cutoffs", "every cutoff must be at least 2"));
        }
        if let Some(m) = c.kerr_levels {
            if m < 2 || m > c.kpo {
                return Err(Error::param("cutoffs", format!("kerr_levels must lie in [2, kpo], got {m}")));
            }
        }
        Ok(())
    }
}

/// Literal large-detuning map `r_n = 4Ω_n (1/Δ + 1/δ_n)`.
///
/// The result carries frequency dimensions; the simulation path drives the
/// composite weights directly and does not use it.
pub fn drive_map(omegas: &[f64], detunings: &[f64], delta: f64) -> Result<Vec<f64>> {
    inverse_eps(detunings, delta, omegas.len()).map(|inv| omegas.iter().zip(inv).map(|(o, e)| 4.0 * o * e).collect())
}

/// Tone amplitudes Ω_n that produce the target weights under [`drive_map`].
pub fn drive_map_inverse(weights: &[f64], detunings: &[f64], delta: f64) -> Result<Vec<f64>> {
    inverse_eps(detunings, delta, weights.len()).map(|inv| weights.iter().zip(inv).map(|(r, e)| r / (4.0 * e)).collect())
}

fn inverse_eps(detunings: &[f64], delta: f64, len: usize) -> Result<Vec<f64>> {
    if detunings.len() != len {
        return Err(Error::param("detunings", format!("expected {len} entries, got {}", detunings.len())));
    }
    if delta == 0.0 {
        return Err(Error::param("delta", "must be non-zero"));
    }
    detunings
        .iter()
        .map(|&d| {
            if d == 0.0 {
                Err(Error::param("detunings", "tone detuning must be non-zero"))
            } else if d == -delta {
                Err(Error::param("detunings", "tone detuning is resonant (δ_n = −Δ)"))
            } else {
                Ok(1.0 / delta + 1.0 / d)
            }
        })
        .collect()
}
