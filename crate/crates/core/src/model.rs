//! Model systems and the built-in four-dimensional Hamiltonian example.
//!
//! The built-in system couples two oscillators through the energy
//!
//! ```text
//! H(x) = ½ (x₁² + x₂² + x₃² + x₄² + x₂² x₄²)
//! ```
//!
//! and moves along
//!
//! ```text
//! R(x) = (−x₂ − x₂ x₄², x₁, −x₄ − x₄ x₂², x₃),
//! ```
//!
//! which conserves `H` and is divergence free, so the canonical density
//! `Z⁻¹ exp(−H/T)` is invariant. The first two coordinates are resolved.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{contract, Error, Result};
use crate::quadrature;

/// Temperature and dimensions of a model system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Variance scale of the canonical measure.
    pub temperature: f64,
    /// Full dimension `n`.
    pub dimension: usize,
    /// Number of resolved components `m`, always the leading ones.
    pub resolved_count: usize,
}

impl ModelParams {
    pub fn new(temperature: f64, dimension: usize, resolved_count: usize) -> Result<Self> {
        let params = Self {
            temperature,
            dimension,
            resolved_count,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(contract(format!(
                "temperature must be positive and finite, got {}",
                self.temperature
            )));
        }
        if self.resolved_count == 0 || self.resolved_count >= self.dimension {
            return Err(contract(format!(
                "need 0 < resolved_count < dimension, got m = {}, n = {}",
                self.resolved_count, self.dimension
            )));
        }
        Ok(())
    }
}

fn check_coords(coords: &[f64], expected: usize, what: &str) -> Result<()> {
    if coords.len() != expected {
        return Err(contract(format!(
            "{what} has {} entries, expected {expected}",
            coords.len()
        )));
    }
    if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
        return Err(contract(format!("{what} has non-finite entry {bad}")));
    }
    Ok(())
}

/// A full phase-space point `x` (or `φ(x, t)`).
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint(Vec<f64>);

impl PhasePoint {
    pub fn new(coords: Vec<f64>, params: &ModelParams) -> Result<Self> {
        check_coords(&coords, params.dimension, "phase point")?;
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// The leading `m` coordinates.
    pub fn resolved(&self, params: &ModelParams) -> ResolvedPoint {
        ResolvedPoint(self.0[..params.resolved_count].to_vec())
    }
}

/// The resolved coordinates `x̂` (or `ŷ`).
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedPoint(Vec<f64>);

impl ResolvedPoint {
    pub fn new(coords: Vec<f64>, params: &ModelParams) -> Result<Self> {
        check_coords(&coords, params.resolved_count, "resolved point")?;
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

/// A system with an invariant canonical measure and a known closure.
///
/// The unchecked `*_into` methods are the hot path used by the integrators;
/// the checked wrappers validate dimensions first.
pub trait Model: Sync {
    fn params(&self) -> &ModelParams;

    /// `R(x)` written into `out`.
    fn rhs(&self, x: &[f64], out: &mut [f64]);

    fn energy(&self, x: &[f64]) -> f64;

    /// `E[R̂ | x̂]` under the canonical measure, written into `out`.
    fn closure_into(&self, xhat: &[f64], out: &mut [f64]);

    /// `E[x_j²]` under the canonical measure (0-based `j`, resolved only).
    fn resolved_second_moment(&self, j: usize) -> f64;

    /// An exact draw from the canonical measure.
    fn draw_equilibrium<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>>;

    /// Unresolved coordinates drawn from the canonical measure conditioned on
    /// `xhat`, written into `out` (length `n - m`).
    fn draw_unresolved<R: Rng + ?Sized>(&self, xhat: &[f64], rng: &mut R, out: &mut [f64]);

    fn dimension(&self) -> usize {
        self.params().dimension
    }

    fn resolved_count(&self) -> usize {
        self.params().resolved_count
    }

    fn temperature(&self) -> f64 {
        self.params().temperature
    }

    fn vector_field(&self, p: &PhasePoint) -> Result<Vec<f64>> {
        check_coords(p.coords(), self.dimension(), "phase point")?;
        let mut out = vec![0.0; self.dimension()];
        self.rhs(p.coords(), &mut out);
        Ok(out)
    }

    fn hamiltonian(&self, p: &PhasePoint) -> Result<f64> {
        check_coords(p.coords(), self.dimension(), "phase point")?;
        Ok(self.energy(p.coords()))
    }

    fn closure(&self, r: &ResolvedPoint) -> Result<Vec<f64>> {
        check_coords(r.coords(), self.resolved_count(), "resolved point")?;
        let mut out = vec![0.0; self.resolved_count()];
        self.closure_into(r.coords(), &mut out);
        Ok(out)
    }

    /// Resolved components of `R` with every unresolved coordinate set to zero.
    fn galerkin_into(&self, xhat: &[f64], out: &mut [f64]) {
        let mut full = vec![0.0; self.dimension()];
        full[..xhat.len()].copy_from_slice(xhat);
        let mut r = vec![0.0; self.dimension()];
        self.rhs(&full, &mut r);
        out.copy_from_slice(&r[..xhat.len()]);
    }
}

/// Cap on rejected proposals before the sampler reports failure.
pub const MAX_REJECTIONS: usize = 1_000_000;

/// The built-in two-oscillator system (n = 4, m = 2).
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledOscillators {
    params: ModelParams,
}

impl CoupledOscillators {
    pub const DIMENSION: usize = 4;
    pub const RESOLVED: usize = 2;

    pub fn new(temperature: f64) -> Result<Self> {
        Self::from_params(ModelParams::new(
            temperature,
            Self::DIMENSION,
            Self::RESOLVED,
        )?)
    }

    pub fn from_params(params: ModelParams) -> Result<Self> {
        params.validate()?;
        if params.dimension != Self::DIMENSION || params.resolved_count != Self::RESOLVED {
            return Err(contract(format!(
                "the built-in model has n = 4, m = 2 (got n = {}, m = {})",
                params.dimension, params.resolved_count
            )));
        }
        Ok(Self { params })
    }

    /// Acceptance probability for an `x₂` proposal drawn from N(0, T).
    ///
    /// Integrating `x₄` out of the canonical density leaves the marginal
    /// `exp(−x₂²/2T) (1 + x₂²)^(−1/2)`.
    pub fn marginal_acceptance(x2: f64) -> f64 {
        (1.0 + x2 * x2).sqrt().recip()
    }

    /// Energy of the first-order optimal prediction system,
    /// `½y₁² + ½y₂² + (T/2) ln(1 + y₂²)`.
    pub fn reduced_hamiltonian(&self, y: &[f64]) -> f64 {
        let t = self.params.temperature;
        0.5 * (y[0] * y[0] + y[1] * y[1]) + 0.5 * t * (y[1] * y[1]).ln_1p()
    }

    /// Gradient of `H`; used to check that the flow is Hamiltonian.
    pub fn energy_gradient(&self, x: &[f64]) -> [f64; 4] {
        [
            x[0],
            x[1] * (1.0 + x[3] * x[3]),
            x[2],
            x[3] * (1.0 + x[1] * x[1]),
        ]
    }

    /// Evaluates the conditional expectation of the resolved components of
    /// `R` given `x̂` by numerically integrating against `exp(−H/T)`.
    ///
    /// The density factorises in `x₃`, so only the `x₄` integral remains; it
    /// is truncated to `[−c√T, c√T]` with `c` chosen so the neglected Gaussian
    /// tail stays below `abs_tol / 10`. Independent of [`Model::closure`].
    pub fn closure_quadrature(&self, r: &ResolvedPoint, abs_tol: f64) -> Result<Vec<f64>> {
        check_coords(r.coords(), Self::RESOLVED, "resolved point")?;
        if abs_tol.is_nan() || abs_tol <= 0.0 {
            return Err(contract(format!("abs_tol must be positive, got {abs_tol}")));
        }
        let t = self.params.temperature;
        let xhat = r.coords();
        let point = |x4: f64| [xhat[0], xhat[1], 0.0, x4];
        let e0 = self.energy(&point(0.0));
        let weight = |x4: f64| (-(self.energy(&point(x4)) - e0) / t).exp();

        // Tail of a unit Gaussian second moment beyond c, scaled by the
        // largest prefactor the numerator can carry.
        let scale = (1.0 + xhat[1].abs()) * (1.0 + xhat[0].abs()) * t.max(1.0);
        let phi = |c: f64| (-0.5 * c * c).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut c = 2.0;
        while 2.0 * phi(c) * (c + 1.0 / c) * scale >= abs_tol / 10.0 {
            c += 0.5;
        }
        let half = c * t.sqrt();

        const MAX_SEGMENTS: usize = 4000;
        let rough = quadrature::integrate(weight, -half, half, 1e-6 * half, MAX_SEGMENTS)?;
        let tol = 0.05 * abs_tol * rough.value;
        let den = quadrature::integrate(weight, -half, half, tol, MAX_SEGMENTS)?;

        let mut out = Vec::with_capacity(Self::RESOLVED);
        for j in 0..Self::RESOLVED {
            let integrand = |x4: f64| {
                let mut rv = [0.0; 4];
                self.rhs(&point(x4), &mut rv);
                rv[j] * weight(x4)
            };
            let num = quadrature::integrate(integrand, -half, half, tol, MAX_SEGMENTS)?;
            let ratio = num.value / den.value;
            let bound = (num.error + ratio.abs() * den.error) / den.value;
            if bound > abs_tol {
                return Err(Error::Quadrature {
                    achieved: bound,
                    requested: abs_tol,
                });
            }
            out.push(ratio);
        }
        Ok(out)
    }
}

impl Model for CoupledOscillators {
    fn params(&self) -> &ModelParams {
        &self.params
    }

    fn rhs(&self, x: &[f64], out: &mut [f64]) {
        out[0] = -x[1] * (1.0 + x[3] * x[3]);
        out[1] = x[0];
        out[2] = -x[3] * (1.0 + x[1] * x[1]);
        out[3] = x[2];
    }

    fn energy(&self, x: &[f64]) -> f64 {
        0.5 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3] * (1.0 + x[1] * x[1]))
    }

    // Given x̂, x₄ is N(0, T / (1 + x₂²)), so E[x₂ x₄² | x̂] = T x₂ / (1 + x₂²).
    fn closure_into(&self, xhat: &[f64], out: &mut [f64]) {
        let t = self.params.temperature;
        let x2 = xhat[1];
        out[0] = -x2 - t * x2 / (1.0 + x2 * x2);
        out[1] = xhat[0];
    }

    fn resolved_second_moment(&self, j: usize) -> f64 {
        match j {
            0 => self.params.temperature,
            // E[x₂²] has no elementary closed form; the memory equation only
            // ever normalises by the x₁ moment.
            _ => panic!("second moment only tabulated for x1"),
        }
    }

    fn draw_equilibrium<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        let sd = self.params.temperature.sqrt();
        let mut x2 = None;
        for _ in 0..MAX_REJECTIONS {
            let proposal: f64 = sd * rng.sample::<f64, _>(StandardNormal);
            let u: f64 = rng.random();
            if u < Self::marginal_acceptance(proposal) {
                x2 = Some(proposal);
                break;
            }
        }
        let x2 = x2.ok_or(Error::Sampler(MAX_REJECTIONS))?;
        let x1 = sd * rng.sample::<f64, _>(StandardNormal);
        let mut x = vec![x1, x2, 0.0, 0.0];
        let (xhat, rest) = x.split_at_mut(Self::RESOLVED);
        self.draw_unresolved(xhat, rng, rest);
        Ok(x)
    }

    fn draw_unresolved<R: Rng + ?Sized>(&self, xhat: &[f64], rng: &mut R, out: &mut [f64]) {
        let t = self.params.temperature;
        let x2 = xhat[1];
        out[0] = t.sqrt() * rng.sample::<f64, _>(StandardNormal);
        out[1] = (t / (1.0 + x2 * x2)).sqrt() * rng.sample::<f64, _>(StandardNormal);
    }
}
