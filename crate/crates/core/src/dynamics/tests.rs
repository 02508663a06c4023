use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::fock::{annihilation, expm_dense, max_abs, number, HilbertSpace};
use crate::hamiltonians::{effective_ms_hamiltonian, EffectiveForm, SystemParams};

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<C64> {
    let m = DMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    (&m + m.adjoint()) * C64::new(0.5, 0.0)
}

fn random_ket(rng: &mut ChaCha8Rng, space: Arc<HilbertSpace>) -> Ket {
    let n = space.total_dim();
    let v = DVector::from_fn(n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    Ket::new(space, v).unwrap().normalized().unwrap()
}

fn ket_of(res: &EvolutionResult) -> &Ket {
    match &res.final_state {
        FinalState::Ket(k) => k,
        _ => panic!("expected a ket"),
    }
}

fn rho_of(res: &EvolutionResult) -> &DensityOperator {
    match &res.final_state {
        FinalState::Density(r) => r,
        _ => panic!("expected a density operator"),
    }
}

#[test]
fn zero_hamiltonian_is_identity() {
    let space = Arc::new(HilbertSpace::single("q", 5).unwrap());
    let h = TimeDependentOperator::from_static(Operator::zeros(space.clone()));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let psi = random_ket(&mut rng, space);
    let res = evolve_state(&h, &psi, &uniform_grid(3.0, 7), 1e-10, &[]).unwrap();
    let out = ket_of(&res);
    assert!((out.amplitudes() - psi.amplitudes()).norm() < 1e-14);
}

#[test]
fn static_hamiltonian_matches_expm() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let space = Arc::new(HilbertSpace::single("q", 16).unwrap());
    let hm = random_hermitian(&mut rng, 16) * C64::new(3.0, 0.0);
    let h = TimeDependentOperator::from_static(Operator::from_dense(space.clone(), hm.clone()).unwrap());
    let psi = random_ket(&mut rng, space);
    let t = 1.7;
    let res = evolve_state(&h, &psi, &[0.0, t], 1e-11, &[]).unwrap();
    let exact = expm_dense(&(hm * C64::new(0.0, -t))).unwrap() * psi.amplitudes();
    let d = (ket_of(&res).amplitudes() - exact).norm();
    assert!(d < 1e-8, "{d}");
    assert!(res.violations().is_empty(), "{:?}", res.violations());
}

#[test]
fn fixed_step_order_is_five() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let space = Arc::new(HilbertSpace::single("q", 6).unwrap());
    let hm = random_hermitian(&mut rng, 6);
    let h = TimeDependentOperator::from_static(Operator::from_dense(space.clone(), hm.clone()).unwrap());
    let psi = random_ket(&mut rng, space);
    let t = 2.0;
    let exact = expm_dense(&(hm * C64::new(0.0, -t))).unwrap() * psi.amplitudes();
    let err = |h_step: f64| {
        let opts = IntegratorOptions { fixed_step: Some(h_step), ..IntegratorOptions::with_tol(1e-9) };
        let res = evolve_state_with(&h, &psi, &[0.0, t], &opts, &[]).unwrap();
        (ket_of(&res).amplitudes() - &exact).norm()
    };
    let (e1, e2) = (err(0.1), err(0.05));
    let order = (e1 / e2).log2();
    assert!((order - 5.0).abs() < 0.5, "observed order {order}");
}

#[test]
fn rejects_tolerance_out_of_range() {
    let space = Arc::new(HilbertSpace::single("q", 2).unwrap());
    let h = TimeDependentOperator::from_static(Operator::zeros(space.clone()));
    let psi = Ket::basis(space, &[0]).unwrap();
    assert!(evolve_state(&h, &psi, &[0.0, 1.0], 1e-3, &[]).is_err());
    assert!(evolve_state(&h, &psi, &[0.0, 1.0], 1e-13, &[]).is_err());
}

#[test]
fn damped_cavity_decays_exponentially() {
    let cut = 12;
    let a = annihilation(cut).unwrap();
    let space = a.space().clone();
    let h = TimeDependentOperator::from_static(Operator::zeros(space.clone()));
    let mut noise = NoiseSpec::new();
    let kappa = 0.7;
    noise.push("a", a.clone(), kappa).unwrap();
    let psi = crate::fock::coherent_state(C64::new(1.2, 0.3), cut).unwrap();
    let rho0 = psi.projector();
    let n0 = crate::fock::expectation(&number(cut).unwrap(), &rho0).unwrap().re;
    let times = uniform_grid(2.0, 21);
    let probes = [Probe::expectation("n", number(cut).unwrap())];
    let res = evolve_master(&h, &noise, &rho0, &times, 1e-10, &probes).unwrap();
    let n = res.record("n").unwrap();
    for (t, v) in times.iter().zip(n) {
        assert!((v - n0 * (-kappa * t).exp()).abs() < 1e-6, "t={t}: {v}");
    }
    assert!(res.violations().is_empty(), "{:?}", res.violations());
}

#[test]
fn negative_rate_rejected() {
    let mut noise = NoiseSpec::new();
    assert!(noise.push("a", annihilation(3).unwrap(), -0.1).is_err());
}

#[test]
fn open_run_without_noise_matches_closed_run() {
    let p = SystemParams::paper().with_tones(2).unwrap();
    let h = effective_ms_hamiltonian(&p, EffectiveForm::Ladder).unwrap();
    let space = h.space().clone();
    let psi = Ket::basis(space.clone(), &[0, 0, 0]).unwrap();
    let target = Ket::basis(space.clone(), &[1, 1, 0]).unwrap();
    let times = uniform_grid(p.gate_time, 11);
    let probes = [Probe::population("flip", target)];
    let closed = evolve_state(&h, &psi, &times, 1e-10, &probes).unwrap();
    let mut noise = NoiseSpec::new();
    noise.push("a", Operator::zeros(space), 0.0).unwrap();
    let open = evolve_master(&h, &noise, &psi.projector(), &times, 1e-10, &probes).unwrap();
    for (a, b) in closed.record("flip").unwrap().iter().zip(open.record("flip").unwrap()) {
        assert!((a - b).abs() <= 1e-6);
    }
    let rho = rho_of(&open);
    let f = rho.overlap(ket_of(&closed)).unwrap();
    assert!((1.0 - f).abs() <= 1e-6, "{f}");
}

#[test]
fn master_equation_preserves_trace_and_hermiticity() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let space = Arc::new(HilbertSpace::new([("a", 3), ("b", 3)]).unwrap());
    let hm = random_hermitian(&mut rng, 9);
    let mut h = TimeDependentOperator::new(space.clone());
    h.push_hermitian(Operator::from_dense(space.clone(), hm).unwrap(), 1.0).unwrap();
    let drive = Operator::from_dense(space.clone(), random_hermitian(&mut rng, 9)).unwrap();
    h.push_real(drive, Coefficient::Tones { amps: vec![C64::new(0.5, 0.0); 2], freqs: vec![2.0, -2.0] }).unwrap();
    let mut noise = NoiseSpec::new();
    for k in 0..2 {
        let l = DMatrix::from_fn(9, 9, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        noise.push(format!("l{k}"), Operator::from_dense(space.clone(), l).unwrap(), 0.3).unwrap();
    }
    let psi = random_ket(&mut rng, space);
    let res = evolve_master(&h, &noise, &psi.projector(), &uniform_grid(3.0, 31), 1e-10, &[]).unwrap();
    assert!(res.violations().is_empty(), "{:?}", res.violations());
    let rho = rho_of(&res);
    assert!((rho.trace().re - 1.0).abs() < 1e-8);
    assert!(rho.min_eigenvalue() > -1e-8);
}

#[test]
fn csv_has_time_and_record_columns() {
    let space = Arc::new(HilbertSpace::single("q", 2).unwrap());
    let h = TimeDependentOperator::from_static(Operator::zeros(space.clone()));
    let psi = Ket::basis(space.clone(), &[0]).unwrap();
    let probes = [Probe::population("p0", psi.clone()), Probe::population("p1", Ket::basis(space, &[1]).unwrap())];
    let res = evolve_state(&h, &psi, &uniform_grid(1.0, 4), 1e-9, &probes).unwrap();
    let mut buf = Vec::new();
    res.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,p0,p1");
    assert_eq!(lines.len(), 5);
}

#[test]
fn magnus_coefficients_vanish_at_period() {
    let p = SystemParams::paper();
    let m = MagnusCoefficients::from_params(&p).unwrap();
    assert_eq!(m.chi(0.0), C64::new(0.0, 0.0));
    assert_eq!(m.beta(0.0), 0.0);
    let period = 2.0 * PI / p.delta;
    assert!(m.chi(period).norm() <= 1e-14);
    assert!((m.beta(period) + PI / 2.0).abs() <= 1e-12);
}

fn gate_on_cavity(cavity: usize) -> DMatrix<C64> {
    ms_gate_ideal().to_dense().kronecker(&DMatrix::<C64>::identity(cavity, cavity))
}

#[test]
fn propagator_at_gate_time_is_ms_gate() {
    for model in [MagnusModel::SingleTone, MagnusModel::Composite] {
        let p = SystemParams::paper();
        let u = magnus_propagator(&p, p.gate_time, model).unwrap().to_dense();
        let d = max_abs(&(u - gate_on_cavity(p.cutoffs.cavity)));
        assert!(d <= 1e-12, "{model:?}: {d}");
    }
    for n in [2, 4, 8] {
        let p = SystemParams::paper().with_tones(n).unwrap();
        let u = magnus_propagator(&p, p.gate_time, MagnusModel::Composite).unwrap().to_dense();
        let d = max_abs(&(u - gate_on_cavity(p.cutoffs.cavity)));
        assert!(d <= 1e-12, "N={n}: {d}");
    }
}

#[test]
fn single_tone_rejects_composite_drive() {
    let p = SystemParams::paper().with_tones(2).unwrap();
    assert!(magnus_propagator(&p, 0.01, MagnusModel::SingleTone).is_err());
}

#[test]
fn composite_phases_agree_with_trajectory() {
    use crate::pulses::Trajectory;
    let p = SystemParams::paper().with_tones(4).unwrap();
    let tr = Trajectory::new(p.coupling, p.alpha, p.zeta, &p.weights).unwrap();
    for t in [0.013, 0.05, 0.11, p.gate_time] {
        let (f, g, a) = composite_phases(&p, t).unwrap();
        // the trajectory uses the opposite sign for the p quadrature
        assert!((f - tr.big_f(t)).abs() < 1e-12);
        assert!((g + tr.big_g(t)).abs() < 1e-12);
        assert!((a + tr.phase(t)).abs() < 1e-9);
    }
}

/// Columns of the numerically integrated propagator for cavity inputs up to
/// `levels`, compared with the Magnus propagator.
fn column_distance(p: &SystemParams, t: f64, model: MagnusModel, form: EffectiveForm, levels: usize, tol: f64) -> f64 {
    let h = effective_ms_hamiltonian(p, form).unwrap();
    let space = h.space().clone();
    let u = magnus_propagator(p, t, model).unwrap().to_dense();
    let mut worst = 0.0f64;
    for q1 in 0..2 {
        for q2 in 0..2 {
            for c in 0..levels {
                let psi = Ket::basis(space.clone(), &[q1, q2, c]).unwrap();
                let res = evolve_state(&h, &psi, &[0.0, t], tol, &[]).unwrap();
                let col = u.column(space.index_of(&[q1, q2, c]).unwrap()).into_owned();
                worst = worst.max((ket_of(&res).amplitudes() - col).norm());
            }
        }
    }
    worst
}

#[test]
fn magnus_matches_integration_single_tone() {
    let mut p = SystemParams::paper();
    p.cutoffs.cavity = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..3 {
        let t = rng.gen_range(0.0..p.gate_time);
        let d = column_distance(&p, t, MagnusModel::SingleTone, EffectiveForm::Ladder, 2, 1e-10);
        assert!(d <= 1e-7, "t={t}: {d}");
    }
}

#[test]
fn magnus_matches_integration_composite() {
    let mut p = SystemParams::paper().with_tones(4).unwrap();
    p.cutoffs.cavity = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..3 {
        let t = rng.gen_range(0.0..p.gate_time);
        let d = column_distance(&p, t, MagnusModel::Composite, EffectiveForm::Quadrature, 2, 1e-10);
        assert!(d <= 1e-7, "t={t}: {d}");
    }
}

#[test]
fn ideal_gate_is_unitary_and_swap_symmetric() {
    let u = ms_gate_ideal().to_dense();
    let id = DMatrix::<C64>::identity(4, 4);
    assert!(max_abs(&(u.adjoint() * &u - &id)) < 1e-14);
    let mut swap = DMatrix::<C64>::zeros(4, 4);
    for (a, b) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        swap[(a, b)] = C64::new(1.0, 0.0);
    }
    assert!(max_abs(&(&swap * &u * &swap - &u)) < 1e-14);
}

#[test]
fn ideal_gate_maps_even_even_to_bell_state() {
    let u = ms_gate_ideal().to_dense();
    let out = u.column(0).into_owned();
    // e^{iπ/4}(|++⟩ + i|−−⟩)/√2
    let g = C64::new(0.0, PI / 4.0).exp() / 2f64.sqrt();
    assert!((out[0] - g).norm() < 1e-14);
    assert!((out[3] - g * C64::new(0.0, 1.0)).norm() < 1e-14);
    assert!(out[1].norm() < 1e-14 && out[2].norm() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn closed_runs_conserve_norm(seed in 0u64..10_000, dim in 2usize..8, t in 0.1f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = Arc::new(HilbertSpace::single("q", dim).unwrap());
        let hm = random_hermitian(&mut rng, dim) * C64::new(4.0, 0.0);
        let h = TimeDependentOperator::from_static(Operator::from_dense(space.clone(), hm).unwrap());
        let psi = random_ket(&mut rng, space);
        let res = evolve_state(&h, &psi, &uniform_grid(t, 9), 1e-9, &[]).unwrap();
        prop_assert!(res.hygiene.norm_drift.unwrap() <= 1e-8);
    }

    #[test]
    fn open_runs_keep_unit_trace(seed in 0u64..10_000, rate in 0.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = Arc::new(HilbertSpace::single("q", 4).unwrap());
        let h = TimeDependentOperator::from_static(Operator::from_dense(space.clone(), random_hermitian(&mut rng, 4)).unwrap());
        let l = DMatrix::from_fn(4, 4, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let mut noise = NoiseSpec::new();
        noise.push("l", Operator::from_dense(space.clone(), l).unwrap(), rate).unwrap();
        let psi = random_ket(&mut rng, space);
        let res = evolve_master(&h, &noise, &psi.projector(), &uniform_grid(1.0, 5), 1e-9, &[]).unwrap();
        prop_assert!(res.violations().is_empty(), "{:?}", res.violations());
    }
}
