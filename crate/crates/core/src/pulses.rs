//! Composite multi-tone drive weights and the cavity phase-space trajectory
//! `(F, G)` with its accumulated spin phase `A`.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Absolute tolerance of the phase quadrature.
pub const PHASE_TOL: f64 = 1e-10;

/// Composite drive: weights r_1..r_N on tones spaced by `zeta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSet {
    pub weights: Vec<f64>,
    pub zeta: f64,
}

impl PulseSet {
    pub fn new(n: usize, zeta: f64) -> Result<Self> {
        if !(zeta > 0.0 && zeta.is_finite()) {
            return Err(Error::param("zeta", format!("must be positive, got {zeta}")));
        }
        Ok(PulseSet { weights: shapira_weights(n)?, zeta })
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn tau(&self) -> f64 {
        2.0 * PI / self.zeta
    }
}

/// Weights of the binomial composite family,
/// `r_n = (−1)^{N−n} N!/2^N · √(2√π / ((N−1)! Γ(N+½))) · C(N−1, n−1)`,
/// normalized so that Σ r_n²/n = 1 for every N. N = 1 uses r_1 = 1.
pub fn shapira_weights(n: usize) -> Result<Vec<f64>> {
    if n < 1 {
        return Err(Error::param("N", "tone count must be at least 1"));
    }
    if n == 1 {
        return Ok(vec![1.0]);
    }
    let nf = n as f64;
    let ln_fact = |k: usize| ln_gamma(k as f64 + 1.0);
    // ln[N!/2^N] + ½ ln[2√π / ((N−1)! Γ(N+½))]
    let ln_pref = ln_fact(n) - nf * 2f64.ln() + 0.5 * ((2.0 * PI.sqrt()).ln() - ln_fact(n - 1) - ln_gamma(nf + 0.5));
    Ok((1..=n)
        .map(|k| {
            let ln_binom = ln_fact(n - 1) - ln_fact(n - k) - ln_fact(k - 1);
            let sign = if (n - k) % 2 == 0 { 1.0 } else { -1.0 };
            sign * (ln_pref + ln_binom).exp()
        })
        .collect())
}

/// Σ r_n²/n.
pub fn weight_norm(weights: &[f64]) -> f64 {
    weights.iter().enumerate().map(|(k, r)| r * r / (k + 1) as f64).sum()
}

/// Trajectory sample at time t.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub f: f64,
    pub g: f64,
    pub a: f64,
}

/// Drive amplitude `2√2 J α`.
pub fn drive_scale(coupling: f64, alpha: f64) -> f64 {
    2.0 * SQRT_2 * coupling * alpha
}

/// Phase-space quadratures of the composite drive. `f(t) = c Σ r_n cos(nζt)`,
/// `g(t) = −c Σ r_n sin(nζt)` with `c = 2√2Jα`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub scale: f64,
    pub zeta: f64,
    pub weights: Vec<f64>,
}

impl Trajectory {
    pub fn new(coupling: f64, alpha: f64, zeta: f64, weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::param("weights", "empty"));
        }
        if !(zeta > 0.0) {
            return Err(Error::param("zeta", "must be positive"));
        }
        Ok(Trajectory { scale: drive_scale(coupling, alpha), zeta, weights: weights.to_vec() })
    }

    pub fn tau(&self) -> f64 {
        2.0 * PI / self.zeta
    }

    fn tones(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.weights.iter().enumerate().map(|(k, &r)| ((k + 1) as f64, r))
    }

    pub fn f_rate(&self, t: f64) -> f64 {
        self.scale * self.tones().map(|(n, r)| r * (n * self.zeta * t).cos()).sum::<f64>()
    }

    pub fn g_rate(&self, t: f64) -> f64 {
        -self.scale * self.tones().map(|(n, r)| r * (n * self.zeta * t).sin()).sum::<f64>()
    }

    /// `F(t) = ∫₀ᵗ f`.
    pub fn big_f(&self, t: f64) -> f64 {
        self.scale / self.zeta * self.tones().map(|(n, r)| r / n * (n * self.zeta * t).sin()).sum::<f64>()
    }

    /// `G(t) = ∫₀ᵗ g`.
    pub fn big_g(&self, t: f64) -> f64 {
        self.scale / self.zeta * self.tones().map(|(n, r)| r / n * ((n * self.zeta * t).cos() - 1.0)).sum::<f64>()
    }

    /// `A(t) = −∫₀ᵗ F g` by quadrature. The interval is split into pieces of a
    /// fraction of the fastest tone period so every panel sees a smooth integrand.
    pub fn phase(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        let fastest = 2.0 * PI / (self.weights.len() as f64 * self.zeta);
        let pieces = ((t.abs() / fastest).ceil() as usize * 2).max(1);
        let h = t / pieces as f64;
        let tol = PHASE_TOL / pieces as f64;
        (0..pieces)
            .map(|k| {
                let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
                crate::quad::integrate(|s| -self.big_f(s) * self.g_rate(s), a, b, tol).0
            })
            .sum()
    }

    pub fn point(&self, t: f64) -> TrajectoryPoint {
        TrajectoryPoint { t, f: self.big_f(t), g: self.big_g(t), a: self.phase(t) }
    }

    /// Distance of `(F(t), G(t))` from the origin.
    pub fn closure_error(&self, t: f64) -> f64 {
        self.big_f(t).hypot(self.big_g(t))
    }

    /// `A(τ)` by quadrature.
    pub fn gate_phase(&self) -> f64 {
        self.phase(self.tau())
    }

    /// Closed form `8πJ²α²/ζ² · Σ r_n²/n`.
    pub fn gate_phase_analytic(&self) -> f64 {
        self.scale * self.scale * PI / (self.zeta * self.zeta) * weight_norm(&self.weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const J: f64 = 2.0 * PI;
    const ALPHA: f64 = 2.0;

    fn paper(n: usize) -> Trajectory {
        let zeta = 4.0 * J * ALPHA;
        Trajectory::new(J, ALPHA, zeta, &shapira_weights(n).unwrap()).unwrap()
    }

    /// Γ(N + ½) = (2N)! √π / (4^N N!), evaluated in plain products.
    fn gamma_half(n: usize) -> f64 {
        let mut v = PI.sqrt();
        for k in 0..n {
            v *= k as f64 + 0.5;
        }
        v
    }

    fn weights_reference(n: usize) -> Vec<f64> {
        let fact = |k: usize| (1..=k).map(|x| x as f64).product::<f64>();
        let pref = fact(n) / 2f64.powi(n as i32) * (2.0 * PI.sqrt() / (fact(n - 1) * gamma_half(n))).sqrt();
        (1..=n)
            .map(|k| {
                let s = if (n - k) % 2 == 0 { 1.0 } else { -1.0 };
                s * pref * fact(n - 1) / (fact(n - k) * fact(k - 1))
            })
            .collect()
    }

    #[test]
    fn single_tone_convention() {
        assert_eq!(shapira_weights(1).unwrap(), vec![1.0]);
        assert!(shapira_weights(0).is_err());
    }

    #[test]
    fn closed_form_values() {
        let w2 = shapira_weights(2).unwrap();
        let s = (2.0f64 / 3.0).sqrt();
        assert!((w2[0] + s).abs() < 1e-13 && (w2[1] - s).abs() < 1e-13);
        let w3 = shapira_weights(3).unwrap();
        let c = (0.3f64).sqrt();
        assert!((w3[0] - c).abs() < 1e-13 && (w3[1] + 2.0 * c).abs() < 1e-13 && (w3[2] - c).abs() < 1e-13);
    }

    #[test]
    fn log_gamma_matches_products() {
        for n in 2..=12 {
            let w = shapira_weights(n).unwrap();
            let r = weights_reference(n);
            for (a, b) in w.iter().zip(&r) {
                assert!(((a - b) / b).abs() < 1e-13, "N={n}");
            }
        }
    }

    #[test]
    fn normalization_and_sign_alternation() {
        for n in 1..=10 {
            let w = shapira_weights(n).unwrap();
            assert!((weight_norm(&w) - 1.0).abs() < 1e-12, "N={n}");
            for (k, r) in w.iter().enumerate() {
                let expect = if (n - k - 1) % 2 == 0 { 1.0 } else { -1.0 };
                assert_eq!(r.signum(), expect);
            }
        }
    }

    #[test]
    fn starts_at_origin() {
        let tr = paper(4);
        let p = tr.point(0.0);
        assert_eq!((p.f, p.g, p.a), (0.0, 0.0, 0.0));
    }

    #[test]
    fn closes_after_whole_periods() {
        for n in [1, 2, 4, 8] {
            let tr = paper(n);
            for k in 1..=3 {
                assert!(tr.closure_error(k as f64 * tr.tau()) <= 1e-12, "N={n} k={k}");
            }
        }
    }

    #[test]
    fn gate_phase_is_half_pi() {
        for n in [1, 2, 4, 8] {
            let a = paper(n).gate_phase();
            assert!((a - PI / 2.0).abs() <= 1e-9, "N={n}: {a}");
        }
    }

    #[test]
    fn gate_phase_scales_inverse_square() {
        let tr = paper(2);
        let mut wide = tr.clone();
        wide.zeta *= 2.0;
        assert!((wide.gate_phase() - tr.gate_phase() / 4.0).abs() < 1e-9);
    }

    /// Closed form of A(t) from ∫ sin(nζs) sin(mζs) ds.
    fn phase_reference(tr: &Trajectory, t: f64) -> f64 {
        let z = tr.zeta;
        let mut acc = 0.0;
        for (i, &rn) in tr.weights.iter().enumerate() {
            for (j, &rm) in tr.weights.iter().enumerate() {
                let (n, m) = ((i + 1) as f64, (j + 1) as f64);
                let diff = if i == j { t } else { ((n - m) * z * t).sin() / ((n - m) * z) };
                let sum = ((n + m) * z * t).sin() / ((n + m) * z);
                acc += rn / n * rm * 0.5 * (diff - sum);
            }
        }
        tr.scale * tr.scale / z * acc
    }

    #[test]
    fn quadrature_matches_closed_form() {
        for n in 1..=8 {
            let tr = paper(n);
            for frac in [0.13, 0.5, 0.77, 1.0, 1.1] {
                let t = frac * tr.tau();
                let q = tr.phase(t);
                let r = phase_reference(&tr, t);
                assert!((q - r).abs() <= 1e-9, "N={n} t/tau={frac}: {q} vs {r}");
            }
            assert!((tr.gate_phase() - tr.gate_phase_analytic()).abs() <= 1e-9);
        }
    }

    #[test]
    fn single_tone_is_a_circle() {
        let tr = paper(1);
        let r = tr.scale / tr.zeta;
        for k in 0..50 {
            let t = k as f64 * 0.021 * tr.tau();
            let (f, g) = (tr.big_f(t), tr.big_g(t));
            assert!((f * f + (g + r) * (g + r) - r * r).abs() < 1e-12);
        }
        // open endpoint after a 10% overrun: chord 2R sin(0.1π)
        let ce = tr.closure_error(1.1 * tr.tau());
        assert!((ce - 2.0 * r * (0.1 * PI).sin()).abs() < 1e-10);
    }

    #[test]
    fn robustness_improves_with_tone_count() {
        let worst = |n: usize| {
            let tr = paper(n);
            (0..=40).map(|k| tr.closure_error((0.9 + 0.005 * k as f64) * tr.tau())).fold(0.0, f64::max)
        };
        let e: Vec<f64> = [1, 2, 4, 8].iter().map(|&n| worst(n)).collect();
        assert!(e.windows(2).all(|w| w[1] < w[0]), "{e:?}");
        let end: Vec<f64> = [1, 2, 4, 8].iter().map(|&n| paper(n).closure_error(1.1 * paper(n).tau())).collect();
        assert!(end.windows(2).all(|w| w[1] < w[0]), "{end:?}");
    }
}
