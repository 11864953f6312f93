//! Memoryless reduced models of the resolved variables.

use crate::error::{contract, Result};
use crate::integrator::{integrate, Trajectory};
use crate::model::{Model, ResolvedPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReducedKind {
    /// Unresolved variables set to zero in the resolved equations.
    Galerkin,
    /// `dŷ/dt = E[R̂ | ŷ]`.
    FirstOrderOp,
}

#[derive(Debug, Clone, Copy)]
pub struct ReducedSystem<'a, M> {
    pub kind: ReducedKind,
    pub model: &'a M,
}

impl<'a, M: Model> ReducedSystem<'a, M> {
    pub fn new(kind: ReducedKind, model: &'a M) -> Self {
        Self { kind, model }
    }

    pub fn rhs_into(&self, y: &[f64], out: &mut [f64]) {
        match self.kind {
            ReducedKind::Galerkin => self.model.galerkin_into(y, out),
            ReducedKind::FirstOrderOp => self.model.closure_into(y, out),
        }
    }

    pub fn reduced_rhs(&self, y: &ResolvedPoint) -> Result<Vec<f64>> {
        let m = self.model.resolved_count();
        if y.coords().len() != m {
            return Err(contract(format!(
                "reduced state has {} entries, expected {m}",
                y.coords().len()
            )));
        }
        let mut out = vec![0.0; m];
        self.rhs_into(y.coords(), &mut out);
        Ok(out)
    }

    pub fn solve(&self, y0: &ResolvedPoint, dt: f64, n_steps: usize) -> Result<Trajectory> {
        if y0.coords().len() != self.model.resolved_count() {
            return Err(contract("initial reduced state has the wrong dimension"));
        }
        integrate(
            &|y: &[f64], out: &mut [f64]| self.rhs_into(y, out),
            y0.coords(),
            0.0,
            dt,
            n_steps,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CoupledOscillators;
    use approx::assert_abs_diff_eq;

    fn rp(m: &CoupledOscillators, c: [f64; 2]) -> ResolvedPoint {
        ResolvedPoint::new(c.to_vec(), m.params()).unwrap()
    }

    #[test]
    fn rhs_examples() {
        let m = CoupledOscillators::new(1.0).unwrap();
        let gal = ReducedSystem::new(ReducedKind::Galerkin, &m);
        let op = ReducedSystem::new(ReducedKind::FirstOrderOp, &m);
        assert_eq!(
            gal.reduced_rhs(&rp(&m, [1.0, 0.0])).unwrap(),
            vec![0.0, 1.0]
        );
        assert_eq!(
            op.reduced_rhs(&rp(&m, [0.0, 1.0])).unwrap(),
            vec![-1.5, 0.0]
        );
        assert_eq!(
            op.reduced_rhs(&rp(&m, [-0.8, 0.0])).unwrap(),
            vec![0.0, -0.8]
        );
    }

    #[test]
    fn galerkin_is_a_rotation() {
        let m = CoupledOscillators::new(1.0).unwrap();
        let traj = ReducedSystem::new(ReducedKind::Galerkin, &m)
            .solve(&rp(&m, [1.0, 0.0]), 0.01, 1000)
            .unwrap();
        for (k, y) in traj.states().enumerate() {
            let t = traj.time(k);
            assert_abs_diff_eq!(y[0], t.cos(), epsilon = 1e-8);
            assert_abs_diff_eq!(y[1], t.sin(), epsilon = 1e-8);
        }
    }

    #[test]
    fn first_order_op_conserves_reduced_energy() {
        let m = CoupledOscillators::new(1.0).unwrap();
        let y0 = rp(&m, [1.0, 0.0]);
        let traj = ReducedSystem::new(ReducedKind::FirstOrderOp, &m)
            .solve(&y0, 0.01, 2000)
            .unwrap();
        let h0 = m.reduced_hamiltonian(y0.coords());
        for y in traj.states() {
            assert!((m.reduced_hamiltonian(y) - h0).abs() <= 1e-8);
        }
    }

    #[test]
    fn origin_is_a_fixed_point() {
        let m = CoupledOscillators::new(1.0).unwrap();
        let traj = ReducedSystem::new(ReducedKind::FirstOrderOp, &m)
            .solve(&rp(&m, [0.0, 0.0]), 0.01, 100)
            .unwrap();
        assert!(traj.states().all(|y| y == [0.0, 0.0]));
    }
}
