//! The non-Markovian prediction equation.
//!
//! For the memory-carrying component `j`:
//!
//! ```text
//! dy_j/dt = w_j(t) − (1/E[x_j²]) ∫₀ᵗ (K⁰(t − s) − w_j(t) w_j(s)) y_j(s) ds
//! ```
//!
//! where `w(t)` is the closure evaluated on the solution itself. All other
//! resolved components follow the closure. Time stepping is Heun's
//! predictor-corrector with a trapezoidal history sum, so every kernel lookup
//! falls on a table node.

use crate::error::{contract, Error, Result};
use crate::integrator::Trajectory;
use crate::kernel::KernelTable;
use crate::model::{Model, ResolvedPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignConvention {
    /// Non-memory components follow the closure, `dy₂/dt = +y₁`.
    #[default]
    ConsistentWithFullSystem,
    /// Non-memory components are negated, `dy₂/dt = −y₁`, as printed in the
    /// two-variable instance of the equation. Unstable for the built-in model.
    PaperExample2,
}

/// What plays the role of `w` in the memory equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Forcing {
    /// `w` is the closure evaluated on the current solution.
    #[default]
    Closure,
    /// `w ≡ 0` for the memory component, in both the drift and the kernel.
    Zero,
}

#[derive(Debug, Clone)]
pub struct MemoryModel<'a, M> {
    pub table: KernelTable,
    pub model: &'a M,
    pub sign_convention: SignConvention,
    pub forcing: Forcing,
    /// Include the `−w(t) w(s)` correction in the kernel.
    pub mean_product: bool,
}

/// Grid values of the memory component and of `w` at nodes `0..=n`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HistoryBuffer {
    pub y: Vec<f64>,
    pub w: Vec<f64>,
}

impl HistoryBuffer {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn push(&mut self, y: f64, w: f64) {
        self.y.push(y);
        self.w.push(w);
    }

    fn set_last(&mut self, y: f64, w: f64) {
        *self.y.last_mut().expect("history is never empty here") = y;
        *self.w.last_mut().expect("history is never empty here") = w;
    }
}

impl<'a, M: Model> MemoryModel<'a, M> {
    pub fn new(table: KernelTable, model: &'a M) -> Result<Self> {
        table.validate()?;
        if table.component > model.resolved_count() {
            return Err(contract(format!(
                "kernel component {} is not resolved (m = {})",
                table.component,
                model.resolved_count()
            )));
        }
        Ok(Self {
            table,
            model,
            sign_convention: SignConvention::default(),
            forcing: Forcing::default(),
            mean_product: true,
        })
    }

    pub fn with_sign_convention(mut self, sign: SignConvention) -> Self {
        self.sign_convention = sign;
        self
    }

    pub fn with_forcing(mut self, forcing: Forcing) -> Self {
        self.forcing = forcing;
        self
    }

    pub fn with_mean_product(mut self, on: bool) -> Self {
        self.mean_product = on;
        self
    }

    fn memory_index(&self) -> usize {
        self.table.component - 1
    }

    /// Markov drift written into `out`; returns `w_j` at `y`.
    fn drift(&self, y: &[f64], out: &mut [f64]) -> f64 {
        let j = self.memory_index();
        self.model.closure_into(y, out);
        if self.sign_convention == SignConvention::PaperExample2 {
            for (i, v) in out.iter_mut().enumerate() {
                if i != j {
                    *v = -*v;
                }
            }
        }
        if self.forcing == Forcing::Zero {
            out[j] = 0.0;
        }
        out[j]
    }

    /// Right-hand side at node `t_index`, where `hist` holds nodes
    /// `0..=t_index` and its last entry belongs to `y`.
    pub fn memory_rhs(&self, t_index: usize, y: &[f64], hist: &HistoryBuffer) -> Result<Vec<f64>> {
        if hist.len() != t_index + 1 {
            return Err(contract(format!(
                "history holds {} nodes, expected {}",
                hist.len(),
                t_index + 1
            )));
        }
        if t_index > self.table.max_lag_steps() {
            return Err(Error::Horizon {
                needed: t_index as f64 * self.table.dt,
                available: self.table.max_lag(),
            });
        }
        let mut out = vec![0.0; self.model.resolved_count()];
        let w_now = self.drift(y, &mut out);
        let j = self.memory_index();
        out[j] -=
            self.history_integral(t_index, w_now, hist) / self.model.resolved_second_moment(j);
        Ok(out)
    }

    // Trapezoidal sum of (K⁰((n − k)·dt) − w_n w_k) y_k over k = 0..=n.
    fn history_integral(&self, n: usize, w_now: f64, hist: &HistoryBuffer) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let product = if self.mean_product { w_now } else { 0.0 };
        let term = |k: usize| (self.table.node(n - k) - product * hist.w[k]) * hist.y[k];
        let interior: f64 = (1..n).map(term).sum();
        self.table.dt * (0.5 * (term(0) + term(n)) + interior)
    }

    /// Solves from `y0` for `n_steps` steps of the table's lag spacing.
    pub fn solve_memory(&self, y0: &ResolvedPoint, dt: f64, n_steps: usize) -> Result<Trajectory> {
        let m = self.model.resolved_count();
        if y0.coords().len() != m {
            return Err(contract("initial state has the wrong dimension"));
        }
        if dt != self.table.dt {
            return Err(contract(format!(
                "solver step {dt} differs from kernel lag spacing {}; kernel interpolation is disabled",
                self.table.dt
            )));
        }
        if n_steps > self.table.max_lag_steps() {
            return Err(Error::Horizon {
                needed: n_steps as f64 * dt,
                available: self.table.max_lag(),
            });
        }
        let j = self.memory_index();
        let mut scratch = vec![0.0; m];
        let mut y = y0.coords().to_vec();
        let mut hist = HistoryBuffer::default();
        hist.push(y[j], self.drift(&y, &mut scratch));
        let mut traj = Trajectory::new(0.0, dt, &y)?;
        let mut pred = vec![0.0; m];

        for n in 0..n_steps {
            let f0 = self.memory_rhs(n, &y, &hist)?;
            for i in 0..m {
                pred[i] = y[i] + dt * f0[i];
            }
            hist.push(pred[j], self.drift(&pred, &mut scratch));
            let f1 = self.memory_rhs(n + 1, &pred, &hist)?;
            for i in 0..m {
                y[i] += 0.5 * dt * (f0[i] + f1[i]);
            }
            if !y.iter().all(|v| v.is_finite()) {
                return Err(Error::StepFailed {
                    step: n + 1,
                    t: (n + 1) as f64 * dt,
                });
            }
            let w = self.drift(&y, &mut scratch);
            hist.set_last(y[j], w);
            traj.push(&y)?;
        }
        Ok(traj)
    }
}
