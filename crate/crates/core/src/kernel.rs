//! Equilibrium autocorrelation of a resolved force component and the
//! frozen-mean memory kernel built from it.
//!
//! `K⁰(τ) = E[R_j(φ(x, t + τ)) R_j(φ(x, t))]` with `x` drawn from the
//! canonical measure. Trajectories started at equilibrium stay at
//! equilibrium, so each member contributes a time average over all node pairs
//! `τ` apart; the error bars come from the spread of the per-member averages.

use rayon::prelude::*;

use crate::ensemble::BLOCK;
use crate::error::{contract, Error, Result};
use crate::integrator::integrate_observed;
use crate::model::Model;
use crate::sampler::RngState;
use crate::stats::RunningMoments;

/// Provenance recorded alongside a kernel table.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMeta {
    pub seed: u64,
    pub n_members: usize,
    pub temperature: f64,
    /// Length of each member trajectory, `n_steps · dt`.
    pub horizon: f64,
}

/// `K⁰` sampled at lags `k·dt`, `k = 0..=L`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    /// 1-based index of the resolved component.
    pub component: usize,
    pub dt: f64,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_products: Vec<u64>,
    pub meta: KernelMeta,
}

impl KernelTable {
    pub fn new(
        component: usize,
        dt: f64,
        values: Vec<f64>,
        stderr: Vec<f64>,
        n_products: Vec<u64>,
        meta: KernelMeta,
    ) -> Result<Self> {
        let table = Self {
            component,
            dt,
            values,
            stderr,
            n_products,
            meta,
        };
        table.validate()?;
        Ok(table)
    }

    /// A table with the given values and no statistical error, for
    /// manufactured problems.
    pub fn exact(component: usize, dt: f64, values: Vec<f64>, temperature: f64) -> Result<Self> {
        let len = values.len();
        Self::new(
            component,
            dt,
            values,
            vec![0.0; len],
            vec![1; len],
            KernelMeta {
                seed: 0,
                n_members: 0,
                temperature,
                horizon: (len.max(1) - 1) as f64 * dt,
            },
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(contract(format!(
                "kernel lag spacing must be positive, got {}",
                self.dt
            )));
        }
        if self.component == 0 {
            return Err(contract("kernel component index is 1-based"));
        }
        if self.values.is_empty()
            || self.values.len() != self.stderr.len()
            || self.values.len() != self.n_products.len()
        {
            return Err(contract(
                "kernel columns must be nonempty and of equal length",
            ));
        }
        if self.n_products.contains(&0) {
            return Err(contract("every kernel lag needs at least one product"));
        }
        if self.stderr.iter().any(|s| s.is_nan() || *s < 0.0)
            || self.values.iter().any(|v| !v.is_finite())
        {
            return Err(contract(
                "kernel values must be finite and standard errors nonnegative",
            ));
        }
        Ok(())
    }

    /// Largest lag index `L`.
    pub fn max_lag_steps(&self) -> usize {
        self.values.len() - 1
    }

    /// Largest tabulated lag `L·dt`.
    pub fn max_lag(&self) -> f64 {
        self.max_lag_steps() as f64 * self.dt
    }

    /// Value at lag node `k`.
    pub fn node(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// `K⁰(τ)` by linear interpolation; exact at the nodes. Never extrapolates.
    pub fn lookup(&self, tau: f64) -> Result<f64> {
        let x = tau / self.dt;
        let last = self.max_lag_steps();
        let nearest = x.round();
        // Lags computed as k·dt land within rounding of a node.
        if (x - nearest).abs() <= 1e-9 * nearest.max(1.0)
            && nearest >= 0.0
            && nearest <= last as f64
        {
            return Ok(self.values[nearest as usize]);
        }
        if !(x >= 0.0 && x <= last as f64) {
            return Err(Error::Range {
                tau,
                max: self.max_lag(),
            });
        }
        let k = x.floor() as usize;
        let frac = x - k as f64;
        Ok(self.values[k] + frac * (self.values[k + 1] - self.values[k]))
    }
}

/// `K(t, s) = K⁰(t − s) − w(t) w(s)` for `0 ≤ s ≤ t`.
pub fn frozen_kernel<W: Fn(f64) -> f64>(table: &KernelTable, w: W, t: f64, s: f64) -> Result<f64> {
    if !(s >= 0.0 && s <= t) {
        return Err(contract(format!(
            "frozen kernel needs 0 <= s <= t, got s = {s}, t = {t}"
        )));
    }
    Ok(table.lookup(t - s)? - w(t) * w(s))
}

fn lag_dot(later: &[f64], earlier: &[f64]) -> f64 {
    let mut acc = [0.0f64; 8];
    let mut a = later.chunks_exact(8);
    let mut b = earlier.chunks_exact(8);
    for (x, y) in (&mut a).zip(&mut b) {
        for i in 0..8 {
            acc[i] += x[i] * y[i];
        }
    }
    let tail: f64 = a
        .remainder()
        .iter()
        .zip(b.remainder())
        .map(|(x, y)| x * y)
        .sum();
    acc.iter().sum::<f64>() + tail
}

/// Time-averaged lagged products of one series: entry `k` is the mean of
/// `r[t + k] · r[t]` over all admissible `t`.
pub fn autocorrelation(r: &[f64], max_lag: usize) -> Vec<f64> {
    let n = r.len();
    (0..=max_lag)
        .map(|k| lag_dot(&r[k..], &r[..n - k]) / (n - k) as f64)
        .collect()
}

/// Monte-Carlo estimate of `K⁰` for resolved component `j` (1-based).
///
/// Each of `n_members` trajectories starts from an equilibrium draw on stream
/// `member` of `seed` and runs `n_steps` RK4 steps of size `dt`.
pub fn estimate_k0<M: Model>(
    model: &M,
    j: usize,
    n_members: usize,
    dt: f64,
    n_steps: usize,
    max_lag_steps: usize,
    seed: u64,
) -> Result<KernelTable> {
    if j == 0 || j > model.resolved_count() {
        return Err(contract(format!(
            "component {j} is not a resolved index in 1..={}",
            model.resolved_count()
        )));
    }
    if max_lag_steps > n_steps {
        return Err(contract(format!(
            "max lag ({max_lag_steps} steps) exceeds trajectory length ({n_steps} steps)"
        )));
    }
    if n_members == 0 {
        return Err(contract("kernel estimation needs at least one member"));
    }
    let n = model.dimension();
    let field = |x: &[f64], out: &mut [f64]| model.rhs(x, out);

    let blocks: Vec<Result<RunningMoments>> = (0..n_members.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut acc = RunningMoments::new(max_lag_steps + 1);
            let mut series = vec![0.0; n_steps + 1];
            let mut force = vec![0.0; n];
            for member in b * BLOCK..((b + 1) * BLOCK).min(n_members) {
                let x0 =
                    model.draw_equilibrium(&mut RngState::new(seed, member as u64).generator())?;
                integrate_observed(&field, &x0, 0.0, dt, n_steps, |k, y| {
                    model.rhs(y, &mut force);
                    series[k] = force[j - 1];
                })
                .map_err(|e| match e {
                    Error::StepFailed { t, .. } => Error::MemberFailed { member, t },
                    other => other,
                })?;
                acc.push(&autocorrelation(&series, max_lag_steps));
            }
            Ok(acc)
        })
        .collect();

    let mut total = RunningMoments::new(max_lag_steps + 1);
    for block in blocks {
        total.merge(&block?);
    }
    let n_products = (0..=max_lag_steps)
        .map(|k| (n_members * (n_steps + 1 - k)) as u64)
        .collect();
    KernelTable::new(
        j,
        dt,
        total.mean().to_vec(),
        total.stderr(),
        n_products,
        KernelMeta {
            seed,
            n_members,
            temperature: model.temperature(),
            horizon: n_steps as f64 * dt,
        },
    )
}
