//! Fixed-step classical Runge-Kutta integration on a uniform grid.

use crate::error::{contract, Error, Result};

/// States sampled at `t0 + k·dt`, `k = 0..len()`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t0: f64,
    pub dt: f64,
    dim: usize,
    data: Vec<f64>,
}

impl Trajectory {
    pub fn new(t0: f64, dt: f64, y0: &[f64]) -> Result<Self> {
        if !dt.is_finite() || dt <= 0.0 {
            return Err(contract(format!("step must be positive, got {dt}")));
        }
        if y0.is_empty() {
            return Err(contract("empty state vector"));
        }
        Ok(Self {
            t0,
            dt,
            dim: y0.len(),
            data: y0.to_vec(),
        })
    }

    /// Builds a trajectory from already-computed rows.
    pub fn from_rows(t0: f64, dt: f64, rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| contract("trajectory needs at least one state"))?;
        let mut traj = Self::new(t0, dt, first)?;
        for row in &rows[1..] {
            traj.push(row)?;
        }
        Ok(traj)
    }

    pub fn push(&mut self, y: &[f64]) -> Result<()> {
        if y.len() != self.dim {
            return Err(contract(format!(
                "state of length {} pushed onto trajectory of dimension {}",
                y.len(),
                self.dim
            )));
        }
        self.data.extend_from_slice(y);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of nodes (steps + 1).
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn last(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn component(&self, j: usize) -> Vec<f64> {
        self.states().map(|s| s[j]).collect()
    }
}

/// Reusable RK4 stage buffers for one state dimension.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        Self {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }

    /// Advances `y` by one step of size `dt` in place.
    pub fn step<F>(&mut self, f: &F, y: &mut [f64], t: f64, dt: f64) -> Result<()>
    where
        F: Fn(&[f64], &mut [f64]) + ?Sized,
    {
        let h2 = 0.5 * dt;
        f(y, &mut self.k1);
        axpy(&mut self.tmp, y, h2, &self.k1);
        f(&self.tmp, &mut self.k2);
        axpy(&mut self.tmp, y, h2, &self.k2);
        f(&self.tmp, &mut self.k3);
        axpy(&mut self.tmp, y, dt, &self.k3);
        f(&self.tmp, &mut self.k4);
        let h6 = dt / 6.0;
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += h6 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
        if y.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::BlowUp { t: t + dt })
        }
    }
}

fn axpy(out: &mut [f64], y: &[f64], a: f64, k: &[f64]) {
    for ((o, yi), ki) in out.iter_mut().zip(y).zip(k) {
        *o = yi + a * ki;
    }
}

fn check_step(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(contract(format!(
            "step must be positive and finite, got {dt}"
        )))
    }
}

/// One classical RK4 step of the autonomous field `f` from `y` at time `t`.
pub fn rk4_step<F>(f: &F, y: &[f64], t: f64, dt: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64], &mut [f64]) + ?Sized,
{
    check_step(dt)?;
    let mut out = y.to_vec();
    Rk4::new(y.len()).step(f, &mut out, t, dt)?;
    Ok(out)
}

/// Integrates `n_steps` RK4 steps, handing every node (including node 0) to
/// `observe` instead of storing it.
pub fn integrate_observed<F, O>(
    f: &F,
    y0: &[f64],
    t0: f64,
    dt: f64,
    n_steps: usize,
    mut observe: O,
) -> Result<()>
where
    F: Fn(&[f64], &mut [f64]) + ?Sized,
    O: FnMut(usize, &[f64]),
{
    check_step(dt)?;
    let mut y = y0.to_vec();
    let mut rk = Rk4::new(y.len());
    observe(0, &y);
    for k in 0..n_steps {
        let t = t0 + k as f64 * dt;
        rk.step(f, &mut y, t, dt).map_err(|_| Error::StepFailed {
            step: k + 1,
            t: t + dt,
        })?;
        observe(k + 1, &y);
    }
    Ok(())
}

pub fn integrate<F>(f: &F, y0: &[f64], t0: f64, dt: f64, n_steps: usize) -> Result<Trajectory>
where
    F: Fn(&[f64], &mut [f64]) + ?Sized,
{
    let mut traj = Trajectory::new(t0, dt, y0)?;
    traj.data.reserve(n_steps * y0.len());
    integrate_observed(f, y0, t0, dt, n_steps, |k, y| {
        if k > 0 {
            traj.data.extend_from_slice(y);
        }
    })?;
    Ok(traj)
}

/// Second-order Heun (explicit trapezoid) integration; the memoryless
/// counterpart of the memory-equation stepper.
pub fn integrate_heun<F>(f: &F, y0: &[f64], t0: f64, dt: f64, n_steps: usize) -> Result<Trajectory>
where
    F: Fn(&[f64], &mut [f64]) + ?Sized,
{
    let mut traj = Trajectory::new(t0, dt, y0)?;
    let dim = y0.len();
    let (mut y, mut k1, mut k2, mut pred) =
        (y0.to_vec(), vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    for k in 0..n_steps {
        f(&y, &mut k1);
        axpy(&mut pred, &y, dt, &k1);
        f(&pred, &mut k2);
        for i in 0..dim {
            y[i] += 0.5 * dt * (k1[i] + k2[i]);
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::StepFailed {
                step: k + 1,
                t: t0 + (k + 1) as f64 * dt,
            });
        }
        traj.push(&y)?;
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn rotation(y: &[f64], out: &mut [f64]) {
        out[0] = -y[1];
        out[1] = y[0];
    }

    #[test]
    fn zero_field_is_identity() {
        let y = rk4_step(
            &|_: &[f64], out: &mut [f64]| out.fill(0.0),
            &[1.0, 2.0],
            0.0,
            0.1,
        )
        .unwrap();
        assert_eq!(y, vec![1.0, 2.0]);
    }

    #[test]
    fn rotation_single_step() {
        let y = rk4_step(&rotation, &[1.0, 0.0], 0.0, 0.1).unwrap();
        assert_abs_diff_eq!(y[0], 0.1f64.cos(), epsilon = 1e-7);
        assert_abs_diff_eq!(y[1], 0.1f64.sin(), epsilon = 1e-7);
    }

    #[test]
    fn local_error_is_fifth_order() {
        let err = |h: f64| {
            let y = rk4_step(&rotation, &[1.0, 0.0], 0.0, h).unwrap();
            ((y[0] - h.cos()).powi(2) + (y[1] - h.sin()).powi(2)).sqrt()
        };
        // One-step error is O(h^5).
        let ratio = err(0.2) / err(0.1);
        assert!((28.0..36.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn halving_step_reduces_global_error_sixteenfold() {
        let err = |h: f64| {
            let n = (1.0 / h).round() as usize;
            let traj = integrate(&rotation, &[1.0, 0.0], 0.0, h, n).unwrap();
            let y = traj.last();
            ((y[0] - 1f64.cos()).powi(2) + (y[1] - 1f64.sin()).powi(2)).sqrt()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((14.0..=18.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn zero_steps_returns_initial_node() {
        let traj = integrate(&rotation, &[0.3, 0.4], 2.0, 0.1, 0).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj.state(0), &[0.3, 0.4]);
        assert_eq!(traj.time(0), 2.0);
    }

    #[test]
    fn harmonic_oscillator_over_ten_units() {
        let traj = integrate(&rotation, &[1.0, 0.0], 0.0, 0.01, 1000).unwrap();
        assert_eq!(traj.len(), 1001);
        let y = traj.last();
        assert_abs_diff_eq!(y[0], 10f64.cos(), epsilon = 1e-8);
        assert_abs_diff_eq!(y[1], 10f64.sin(), epsilon = 1e-8);
    }

    #[test]
    fn blow_up_reports_step() {
        let f = |y: &[f64], out: &mut [f64]| out[0] = y[0] * y[0];
        let err = integrate(&f, &[1.0], 0.0, 0.1, 100).unwrap_err();
        match err {
            Error::StepFailed { step, t } => {
                assert!(step > 5 && step < 100);
                assert_abs_diff_eq!(t, step as f64 * 0.1, epsilon = 1e-12);
            }
            other => panic!("unexpected {other}"),
        }
        assert!(matches!(
            rk4_step(
                &|_: &[f64], o: &mut [f64]| o[0] = f64::NAN,
                &[1.0],
                0.5,
                0.1
            ),
            Err(Error::BlowUp { .. })
        ));
    }

    #[test]
    fn rejects_nonpositive_step() {
        assert!(integrate(&rotation, &[1.0, 0.0], 0.0, 0.0, 3).is_err());
        assert!(rk4_step(&rotation, &[1.0, 0.0], 0.0, -0.1).is_err());
    }

    #[test]
    fn heun_is_second_order() {
        let err = |h: f64| {
            let n = (2.0 / h).round() as usize;
            let y = integrate_heun(&rotation, &[1.0, 0.0], 0.0, h, n)
                .unwrap()
                .last()
                .to_vec();
            ((y[0] - 2f64.cos()).powi(2) + (y[1] - 2f64.sin()).powi(2)).sqrt()
        };
        let ratio = err(0.02) / err(0.01);
        assert!((3.6..4.4).contains(&ratio), "ratio {ratio}");
    }
}
