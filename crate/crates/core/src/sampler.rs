//! Exact i.i.d. sampling of the GHZ Q density by rejection.
//!
//! Proposal: pick the "up" or "down" branch with probability ½, then draw each
//! qubit independently with `cos θ` density `(1 ± u)/2` and uniform azimuth.
//! The mixture density is `½·kernel^m·(U + D)`, and because
//! `2C ≤ U + D` the Q density never exceeds twice the mixture. Accepting with
//! probability `Q / (kernel^m·(U + D))` gives exact draws at an acceptance
//! rate of ½ for every `m` and `φ`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::model::{BlochSample, GhzSpec, PhasePoint};
use crate::qfunction::branch_products;
use crate::rng::{domain, StreamKey};
use crate::stats::Merge;
use crate::{Error, Result};

/// Proposals allowed per sample before the envelope is declared broken.
pub const REJECTION_CAP: u32 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Up,
    Down,
}

/// Inverse CDF of the per-qubit `cos θ` proposal: `2√r − 1` for the up branch
/// (density `(1+u)/2`), `1 − 2√r` for the down branch.
#[inline]
pub fn inverse_cdf(branch: Branch, r: f64) -> f64 {
    match branch {
        Branch::Up => 2.0 * r.sqrt() - 1.0,
        Branch::Down => 1.0 - 2.0 * r.sqrt(),
    }
}

/// A contiguous range of global sample indices under one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleStreamSpec {
    pub seed: u64,
    pub first_index: u64,
    pub count: u64,
}

impl SampleStreamSpec {
    pub fn new(seed: u64, count: u64) -> Self {
        Self {
            seed,
            first_index: 0,
            count,
        }
    }

    pub fn indices(&self) -> std::ops::Range<u64> {
        self.first_index..self.first_index + self.count
    }
}

/// Proposal and acceptance counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SamplingStats {
    pub accepted: u64,
    pub proposed: u64,
}

impl SamplingStats {
    pub fn acceptance_rate(&self) -> f64 {
        self.accepted as f64 / self.proposed as f64
    }
}

impl Merge for SamplingStats {
    fn merge(&mut self, other: Self) {
        self.accepted += other.accepted;
        self.proposed += other.proposed;
    }
}

/// Draws one point from the two-branch proposal mixture into `out`.
pub fn propose_point<R: Rng + ?Sized>(spec: &GhzSpec, rng: &mut R, out: &mut PhasePoint) -> Branch {
    let branch = if rng.gen::<bool>() { Branch::Up } else { Branch::Down };
    let buf = out.buffer_mut();
    buf.clear();
    for _ in 0..spec.m() {
        let u = inverse_cdf(branch, rng.gen::<f64>());
        let azimuth = 2.0 * PI * rng.gen::<f64>();
        buf.push(BlochSample::from_polar(u, azimuth));
    }
    branch
}

/// `Q / envelope` at `point`, in `[0, 1]`.
#[inline]
pub fn acceptance_probability(phi_phase: Complex64, point: &[BlochSample]) -> f64 {
    let (up, down, cross) = branch_products(point);
    let env = up + down;
    if env <= 0.0 {
        return 0.0;
    }
    ((env + 2.0 * (phi_phase * cross).re) / (2.0 * env)).clamp(0.0, 1.0)
}

/// Counter-based rejection sampler for one GHZ state.
#[derive(Debug, Clone)]
pub struct GhzSampler {
    spec: GhzSpec,
    phi_phase: Complex64,
    key: StreamKey,
}

impl GhzSampler {
    pub fn new(spec: GhzSpec, seed: u64) -> Self {
        Self {
            spec,
            phi_phase: Complex64::from_polar(1.0, spec.phi()),
            key: StreamKey::new(seed, domain::SAMPLER, spec.m() as u64),
        }
    }

    pub fn spec(&self) -> &GhzSpec {
        &self.spec
    }

    /// Draws the sample with global index `index` into `out`; returns the
    /// number of proposals used.
    pub fn draw_into(&self, index: u64, out: &mut PhasePoint) -> Result<u32> {
        let mut rng = self.key.stream(index);
        for proposals in 1..=REJECTION_CAP {
            propose_point(&self.spec, &mut rng, out);
            let accept = acceptance_probability(self.phi_phase, out);
            if rng.gen::<f64>() < accept {
                return Ok(proposals);
            }
        }
        Err(Error::EnvelopeExhausted {
            index,
            cap: REJECTION_CAP,
        })
    }

    pub fn draw(&self, index: u64) -> Result<PhasePoint> {
        let mut p = PhasePoint::with_capacity(self.spec.m());
        self.draw_into(index, &mut p)?;
        Ok(p)
    }
}

/// Materialises the points of `stream`.
pub fn sample_batch(spec: &GhzSpec, stream: SampleStreamSpec) -> Result<Vec<PhasePoint>> {
    let sampler = GhzSampler::new(*spec, stream.seed);
    stream.indices().map(|k| sampler.draw(k)).collect()
}
