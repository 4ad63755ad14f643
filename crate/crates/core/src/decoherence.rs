//! Collective dephasing from delta-correlated field noise.
//!
//! The interaction `H = ΔE(t)/2 · Σ_j σz_j` rotates the GHZ coherence by the
//! collective angle `m·ΔE`. In the Heisenberg picture this multiplies each
//! sample's Bell weight by `exp(i·ε·m·ζ_t)` after every step, with `ζ_t` an
//! independent standard Gaussian per sample and step. The ensemble mean decays
//! as `exp(−ε²m²τ/2)`, quadratically faster in `m`.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use crate::engine::Engine;
use crate::estimators::operator_weight;
use crate::model::{BellConvention, GhzSpec};
use crate::rng::{domain, StreamKey};
use crate::sampler::SampleStreamSpec;
use crate::stats::{fit_line, LineFit, MomentAccumulator};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    epsilon: f64,
    steps: u32,
    seed: u64,
}

impl NoiseSpec {
    pub fn new(epsilon: f64, steps: u32, seed: u64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                reason: format!("{epsilon} must be finite and nonnegative"),
            });
        }
        Ok(Self { epsilon, steps, seed })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn steps(&self) -> u32 {
        self.steps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Expected `F(τ)/F(0)` under the noise model.
pub fn analytic_decay(epsilon: f64, m: usize, tau: u32) -> f64 {
    let a = epsilon * m as f64;
    (-0.5 * a * a * f64::from(tau)).exp()
}

/// Source of the per-step phase increments `ε·m·ζ_t` for each sample.
#[derive(Debug, Clone)]
pub struct NoiseSource {
    noise: NoiseSpec,
    scale: f64,
    key: StreamKey,
}

impl NoiseSource {
    pub fn new(noise: NoiseSpec, m: usize) -> Self {
        Self {
            noise,
            scale: noise.epsilon * m as f64,
            key: StreamKey::new(noise.seed, domain::NOISE, m as u64),
        }
    }

    /// Increments for steps `1..=steps` of sample `index`.
    pub fn increments(&self, index: u64) -> impl Iterator<Item = f64> {
        let mut rng = self.key.stream(index);
        let scale = self.scale;
        (0..self.noise.steps).map(move |_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            scale * z
        })
    }
}

/// Multiplies `weight` by `∏_{t=1}^{steps} exp(i·ε·m·ζ_t)`.
pub fn apply_dephasing(weight: Complex64, m: usize, noise: &NoiseSpec, sample_index: u64) -> Complex64 {
    if noise.steps == 0 || noise.epsilon == 0.0 {
        return weight;
    }
    let angle: f64 = NoiseSource::new(*noise, m).increments(sample_index).sum();
    weight * Complex64::from_polar(1.0, angle)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRow {
    pub tau: u32,
    pub f_value: f64,
    pub f_ratio: f64,
    pub stderr: f64,
    pub analytic_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayCurve {
    pub m: usize,
    pub rows: Vec<DecayRow>,
}

impl DecayCurve {
    /// Weighted fit of `ln(F(τ)/F(0)) = −rate·τ` through the origin, using
    /// points resolved at better than `min_snr` standard errors.
    pub fn fit_rate(&self, min_snr: f64) -> Option<(f64, f64)> {
        let mut swt2 = 0.0;
        let mut swty = 0.0;
        for r in self.rows.iter().filter(|r| r.tau > 0) {
            if !(r.f_ratio > min_snr * r.stderr && r.stderr > 0.0) {
                continue;
            }
            let sigma_log = r.stderr / r.f_ratio;
            let w = 1.0 / (sigma_log * sigma_log);
            let t = f64::from(r.tau);
            swt2 += w * t * t;
            swty += w * t * r.f_ratio.ln();
        }
        (swt2 > 0.0).then(|| (-swty / swt2, swt2.sqrt().recip()))
    }
}

/// Samples the Q density, applies the noise model and tracks `F(τ)/F(0)` for
/// `τ = 0..=steps`. The sampler and the noise share `noise.seed` under
/// separate stream domains.
pub fn decay_curve(
    engine: &Engine,
    spec: &GhzSpec,
    conv: &BellConvention,
    noise: &NoiseSpec,
    samples: u64,
) -> Result<DecayCurve> {
    if samples == 0 {
        return Err(Error::EmptySamples);
    }
    if conv.m() != spec.m() {
        return Err(Error::Dimension {
            expected: spec.m(),
            got: conv.m(),
        });
    }
    let extraction = conv.extraction();
    if extraction.linear_component(Complex64::new(0.0, 0.0)).is_none() {
        return Err(Error::Unsupported(
            "decay curves need a linear extraction rule".into(),
        ));
    }
    let m = spec.m();
    let source = NoiseSource::new(*noise, m);
    let len = noise.steps as usize + 1;
    let component = |z: Complex64| extraction.linear_component(z).unwrap_or(f64::NAN);

    // entry τ holds (x_τ, x_0) as x_τ + i·x_0
    let (accs, _) = engine.reduce(
        spec,
        SampleStreamSpec::new(noise.seed, samples),
        || vec![MomentAccumulator::new(); len],
        |accs, index, point| {
            let w = operator_weight(conv.f_operator(), point);
            let x0 = component(w);
            accs[0].push(Complex64::new(x0, x0));
            let mut angle = 0.0;
            for (tau, inc) in source.increments(index).enumerate() {
                angle += inc;
                let x = component(w * Complex64::from_polar(1.0, angle));
                accs[tau + 1].push(Complex64::new(x, x0));
            }
        },
    )?;

    let n = samples as f64;
    let f0 = accs[0].mean().re;
    let rows = accs
        .iter()
        .enumerate()
        .map(|(tau, acc)| {
            let f = acc.mean().re;
            let r = f / f0;
            let var = acc.var_re() - 2.0 * r * acc.cov_re_im() + r * r * acc.var_im();
            DecayRow {
                tau: tau as u32,
                f_value: f,
                f_ratio: r,
                stderr: (var.max(0.0) / (n * f0 * f0)).sqrt(),
                analytic_ratio: analytic_decay(noise.epsilon, m, tau as u32),
            }
        })
        .collect();
    Ok(DecayCurve { m, rows })
}

/// Log-log slope of decay rate against qubit count.
pub fn decoherence_exponent(ms: &[usize], rates: &[f64]) -> Option<LineFit> {
    let xs: Vec<f64> = ms.iter().map(|&m| (m as f64).ln()).collect();
    let ys: Vec<f64> = rates.iter().map(|r| r.ln()).collect();
    fit_line(&xs, &ys, &vec![1.0; xs.len()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::mermin_convention;

    #[test]
    fn identity_cases() {
        let w = Complex64::new(1.5, -2.0);
        let none = NoiseSpec::new(0.3, 0, 1).unwrap();
        assert_eq!(apply_dephasing(w, 4, &none, 9), w);
        let silent = NoiseSpec::new(0.0, 25, 1).unwrap();
        assert_eq!(apply_dephasing(w, 4, &silent, 9), w);
    }

    #[test]
    fn rejects_bad_epsilon() {
        assert!(NoiseSpec::new(-0.1, 3, 0).is_err());
        assert!(NoiseSpec::new(f64::NAN, 3, 0).is_err());
    }

    #[test]
    fn phase_only() {
        let noise = NoiseSpec::new(0.1, 10, 3).unwrap();
        for i in 0..1000 {
            let w = Complex64::new(0.3 * i as f64, -1.0);
            let out = apply_dephasing(w, 6, &noise, i);
            assert!((out.norm() - w.norm()).abs() <= 1e-12 * w.norm());
        }
    }

    #[test]
    fn deterministic() {
        let noise = NoiseSpec::new(0.1, 10, 3).unwrap();
        let w = Complex64::new(1.0, 0.0);
        assert_eq!(apply_dephasing(w, 6, &noise, 17), apply_dephasing(w, 6, &noise, 17));
        assert_ne!(apply_dephasing(w, 6, &noise, 17), apply_dephasing(w, 6, &noise, 18));
    }

    #[test]
    fn characteristic_function() {
        // E[e^{iaζ}] = e^{−a²/2}; a² = ε²m²·steps = 3.6
        let noise = NoiseSpec::new(0.1, 10, 5).unwrap();
        let mut acc = MomentAccumulator::new();
        let n = 1_000_000u64;
        for i in 0..n {
            acc.push(apply_dephasing(Complex64::new(1.0, 0.0), 6, &noise, i));
        }
        let want = (-1.8f64).exp();
        assert!((acc.mean().re - want).abs() < 3.0 * acc.stderr_re(), "{}", acc.mean());
        assert!(acc.mean().im.abs() < 3.0 * acc.stderr_im());
    }

    #[test]
    fn unsupported_extraction_and_empty() {
        let engine = Engine::new(1).unwrap();
        let (spec, _) = mermin_convention(3).unwrap();
        let conv = BellConvention::custom(vec![1; 3], vec![0.0; 3], crate::Extraction::Modulus).unwrap();
        let noise = NoiseSpec::new(0.1, 2, 0).unwrap();
        assert!(matches!(
            decay_curve(&engine, &spec, &conv, &noise, 100),
            Err(Error::Unsupported(_))
        ));
        let (_, conv) = mermin_convention(3).unwrap();
        assert!(matches!(
            decay_curve(&engine, &spec, &conv, &noise, 0),
            Err(Error::EmptySamples)
        ));
    }

    #[test]
    fn analytic_values() {
        assert!((analytic_decay(0.1, 2, 10) - (-0.2f64).exp()).abs() < 1e-15);
        assert_eq!(analytic_decay(0.1, 6, 0), 1.0);
    }
}
