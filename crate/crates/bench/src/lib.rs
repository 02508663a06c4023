//! Shared fixtures for the criterion benchmarks under `benches/`.

use katsim_core::experiments::{closed_cutoffs, open_cutoffs, CatPair, FullModel};
use katsim_core::fock::{DensityOperator, Ket};
use katsim_core::hamiltonians::{Cutoffs, SystemParams};

/// Full model at the paper point with the given truncation.
pub fn full_model(cutoffs: Cutoffs, n: usize) -> FullModel {
    let p = SystemParams::paper().with_tones(n).unwrap().with_cutoffs(cutoffs);
    FullModel::new(&p).unwrap()
}

/// Fock-basis model (no Kerr eigenbasis reduction): 18-level KPOs, 8-level cavity.
pub fn fock_model() -> FullModel {
    full_model(Cutoffs::fock(18, 8), 1)
}

pub fn closed_model() -> FullModel {
    full_model(closed_cutoffs(2.0), 1)
}

pub fn open_model() -> FullModel {
    full_model(open_cutoffs(2.0), 1)
}

pub fn input(m: &FullModel) -> Ket {
    m.cat_pair(CatPair::ALL[0]).unwrap()
}

pub fn input_density(m: &FullModel) -> DensityOperator {
    input(m).projector()
}
