//! Exact sampling from the canonical measure.
//!
//! Every draw is keyed by an [`RngState`]: a seed plus a stream id. Ensemble
//! member `i` always uses stream `i`, so results never depend on how members
//! are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::model::{Model, PhasePoint, ResolvedPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngState {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngState {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// A fresh generator positioned at the start of this substream.
    pub fn generator(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

pub fn sample_equilibrium<M: Model>(rng: RngState, model: &M) -> Result<PhasePoint> {
    let coords = model.draw_equilibrium(&mut rng.generator())?;
    PhasePoint::new(coords, model.params())
}

/// Resolved coordinates copied from `r`; the rest drawn conditionally on them.
pub fn sample_conditional<M: Model>(
    rng: RngState,
    r: &ResolvedPoint,
    model: &M,
) -> Result<PhasePoint> {
    let m = model.resolved_count();
    let mut coords = vec![0.0; model.dimension()];
    coords[..m].copy_from_slice(r.coords());
    let (xhat, rest) = coords.split_at_mut(m);
    model.draw_unresolved(xhat, &mut rng.generator(), rest);
    PhasePoint::new(coords, model.params())
}

/// `count` equilibrium draws, draw `i` on stream `i`.
pub fn sample_many<M: Model>(model: &M, count: usize, seed: u64) -> Result<Vec<PhasePoint>> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| sample_equilibrium(RngState::new(seed, i), model))
        .collect()
}
