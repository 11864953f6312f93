//! Fixtures shared by the benchmarks.

use optpred_core::{estimate_k0, CoupledOscillators, KernelTable, Model, ResolvedPoint};

pub const DT: f64 = 0.01;

pub fn model() -> CoupledOscillators {
    CoupledOscillators::new(1.0).expect("T = 1 is valid")
}

/// The initial data of the standard comparison, `(x1, x2) = (1, 0)`.
pub fn figure_point(m: &CoupledOscillators) -> ResolvedPoint {
    ResolvedPoint::new(vec![1.0, 0.0], m.params()).expect("two resolved coordinates")
}

/// A cheap kernel covering `max_lag` steps of [`DT`].
pub fn small_kernel(m: &CoupledOscillators, max_lag: usize) -> KernelTable {
    estimate_k0(m, 1, 64, DT, 2 * max_lag, max_lag, 1).expect("kernel estimation")
}
