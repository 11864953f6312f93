//! Conditional ensemble mean of the resolved variables ("truth").

use rayon::prelude::*;

use crate::error::{contract, Error, Result};
use crate::integrator::integrate_observed;
use crate::model::{Model, ResolvedPoint};
use crate::sampler::RngState;
use crate::stats::RunningMoments;

/// Members per accumulation block. Fixed so the reduction tree, and hence
/// every rounding, is the same for any thread count.
pub(crate) const BLOCK: usize = 64;

/// Per-node mean and standard error of the resolved components.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub t0: f64,
    pub dt: f64,
    pub mean: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
    pub n_members: usize,
}

impl EnsembleStats {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn mean_component(&self, j: usize) -> Vec<f64> {
        self.mean.iter().map(|m| m[j]).collect()
    }

    pub fn stderr_component(&self, j: usize) -> Vec<f64> {
        self.stderr.iter().map(|s| s[j]).collect()
    }
}

/// Averages the resolved components of `n_members` full-system solutions whose
/// unresolved initial data are drawn conditionally on `r`.
///
/// Member `i` draws from stream `i` of `seed`. Members run in fixed-size
/// blocks whose moments are merged in block order.
pub fn ensemble_truth<M: Model>(
    model: &M,
    r: &ResolvedPoint,
    n_members: usize,
    dt: f64,
    n_steps: usize,
    seed: u64,
) -> Result<EnsembleStats> {
    if n_members == 0 {
        return Err(contract("ensemble needs at least one member"));
    }
    let m = model.resolved_count();
    let n = model.dimension();
    if r.coords().len() != m {
        return Err(contract("resolved point has the wrong dimension"));
    }
    let nodes = n_steps + 1;
    let field = |x: &[f64], out: &mut [f64]| model.rhs(x, out);

    let blocks: Vec<Result<RunningMoments>> = (0..n_members.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut acc = RunningMoments::new(nodes * m);
            let mut row = vec![0.0; nodes * m];
            let mut x0 = vec![0.0; n];
            for member in b * BLOCK..((b + 1) * BLOCK).min(n_members) {
                x0[..m].copy_from_slice(r.coords());
                let (xhat, rest) = x0.split_at_mut(m);
                model.draw_unresolved(
                    xhat,
                    &mut RngState::new(seed, member as u64).generator(),
                    rest,
                );
                integrate_observed(&field, &x0, 0.0, dt, n_steps, |k, y| {
                    row[k * m..(k + 1) * m].copy_from_slice(&y[..m]);
                })
                .map_err(|e| match e {
                    Error::StepFailed { t, .. } => Error::MemberFailed { member, t },
                    other => other,
                })?;
                acc.push(&row);
            }
            Ok(acc)
        })
        .collect();

    let mut total = RunningMoments::new(nodes * m);
    for block in blocks {
        total.merge(&block?);
    }
    let stderr = total.stderr();
    Ok(EnsembleStats {
        t0: 0.0,
        dt,
        mean: total.mean().chunks_exact(m).map(<[f64]>::to_vec).collect(),
        stderr: stderr.chunks_exact(m).map(<[f64]>::to_vec).collect(),
        n_members,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::integrate;
    use crate::model::CoupledOscillators;
    use crate::sampler::sample_conditional;

    fn setup() -> (CoupledOscillators, ResolvedPoint) {
        let m = CoupledOscillators::new(1.0).unwrap();
        let r = ResolvedPoint::new(vec![1.0, 0.0], m.params()).unwrap();
        (m, r)
    }

    #[test]
    fn single_member_is_its_trajectory() {
        let (m, r) = setup();
        let stats = ensemble_truth(&m, &r, 1, 0.01, 200, 7).unwrap();
        let x0 = sample_conditional(RngState::new(7, 0), &r, &m).unwrap();
        let traj = integrate(
            &|x: &[f64], o: &mut [f64]| m.rhs(x, o),
            x0.coords(),
            0.0,
            0.01,
            200,
        )
        .unwrap();
        for k in 0..=200 {
            assert_eq!(stats.mean[k], traj.state(k)[..2].to_vec());
            assert_eq!(stats.stderr[k], vec![0.0, 0.0]);
        }
    }

    #[test]
    fn node_zero_is_the_conditioning_point() {
        let (m, r) = setup();
        let stats = ensemble_truth(&m, &r, 300, 0.01, 10, 1).unwrap();
        assert_eq!(stats.mean[0], vec![1.0, 0.0]);
        assert_eq!(stats.stderr[0], vec![0.0, 0.0]);
        assert_eq!(stats.len(), 11);
        assert!(stats.stderr.iter().flatten().all(|s| *s >= 0.0));
    }

    #[test]
    fn independent_of_thread_count() {
        let (m, r) = setup();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| ensemble_truth(&m, &r, 500, 0.02, 100, 42).unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn zero_members_rejected() {
        let (m, r) = setup();
        assert!(matches!(
            ensemble_truth(&m, &r, 0, 0.01, 5, 0),
            Err(Error::Contract(_))
        ));
    }
}
