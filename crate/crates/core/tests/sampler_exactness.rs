use std::f64::consts::{FRAC_PI_2, PI};

use ghzq_core::engine::Engine;
use ghzq_core::estimators::{bell_weight, spin_up_total};
use ghzq_core::model::{mermin_convention, BlochSample, GhzSpec};
use ghzq_core::qfunction::q_density;
use ghzq_core::sampler::{sample_batch, SampleStreamSpec};
use ghzq_core::stats::MomentAccumulator;
use ghzq_core::Complex64;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Bin index of a qubit on a `bins_u × bins_phi` grid in (cos θ, azimuth).
fn cell(q: &BlochSample, bins_u: usize, bins_phi: usize) -> usize {
    let u = ((q.nz() + 1.0) / 2.0 * bins_u as f64).floor() as usize;
    let az = q.azimuth().rem_euclid(2.0 * PI);
    let p = (az / (2.0 * PI) * bins_phi as f64).floor() as usize;
    u.min(bins_u - 1) * bins_phi + p.min(bins_phi - 1)
}

/// Probability of every joint cell by a fine midpoint rule inside each cell.
fn cell_probabilities(spec: &GhzSpec, bins_u: usize, bins_phi: usize, sub: usize) -> Vec<f64> {
    let m = spec.m();
    let per_qubit = bins_u * bins_phi;
    let cells = per_qubit.pow(m as u32);
    let du = 2.0 / (bins_u * sub) as f64;
    let dphi = 2.0 * PI / (bins_phi * sub) as f64;
    // fine nodes of each single-qubit cell
    let nodes: Vec<Vec<BlochSample>> = (0..per_qubit)
        .map(|c| {
            let (iu, ip) = (c / bins_phi, c % bins_phi);
            let mut v = Vec::with_capacity(sub * sub);
            for a in 0..sub {
                let u = -1.0 + ((iu * sub + a) as f64 + 0.5) * du;
                for b in 0..sub {
                    let phi = ((ip * sub + b) as f64 + 0.5) * dphi;
                    v.push(BlochSample::from_polar(u, phi));
                }
            }
            v
        })
        .collect();
    let w = (du * dphi).powi(m as i32);
    (0..cells)
        .map(|joint| {
            let c0 = joint / per_qubit.pow(m as u32 - 1);
            match m {
                1 => nodes[c0].iter().map(|q| q_density(spec, &[*q]).unwrap()).sum::<f64>() * w,
                2 => {
                    let c1 = joint % per_qubit;
                    let mut s = 0.0;
                    for a in &nodes[c0] {
                        for b in &nodes[c1] {
                            s += q_density(spec, &[*a, *b]).unwrap();
                        }
                    }
                    s * w
                }
                _ => unreachable!(),
            }
        })
        .collect()
}

fn chi_square_p(spec: &GhzSpec, bins_u: usize, bins_phi: usize, sub: usize, n: u64, seed: u64) -> f64 {
    let probs = cell_probabilities(spec, bins_u, bins_phi, sub);
    let total: f64 = probs.iter().sum();
    assert!((total - 1.0).abs() < 1e-3, "bin mass {total}");
    let per_qubit = bins_u * bins_phi;
    let engine = Engine::new(0).unwrap();
    let (counts, _) = engine
        .reduce(
            spec,
            SampleStreamSpec::new(seed, n),
            || Counts(vec![0u64; probs.len()]),
            |c, _, p| {
                let idx = p.iter().fold(0, |acc, q| acc * per_qubit + cell(q, bins_u, bins_phi));
                c.0[idx] += 1;
            },
        )
        .unwrap();
    let stat: f64 = counts
        .0
        .iter()
        .zip(&probs)
        .map(|(&o, &p)| {
            let e = p / total * n as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let dof = (probs.len() - 1) as f64;
    1.0 - ChiSquared::new(dof).unwrap().cdf(stat)
}

struct Counts(Vec<u64>);

impl ghzq_core::stats::Merge for Counts {
    fn merge(&mut self, other: Self) {
        self.0.iter_mut().zip(other.0).for_each(|(a, b)| *a += b);
    }
}

#[test]
fn chi_square_single_qubit() {
    let spec = GhzSpec::new(1, 0.0).unwrap();
    let p = chi_square_p(&spec, 10, 12, 16, 1_000_000, 1);
    assert!(p > 0.001, "p = {p}");
}

#[test]
fn chi_square_two_qubits() {
    let spec = GhzSpec::new(2, PI).unwrap();
    let p = chi_square_p(&spec, 4, 4, 8, 1_000_000, 2);
    assert!(p > 0.001, "p = {p}");
}

#[test]
fn chi_square_detects_wrong_phase() {
    // samples from φ = π tested against the φ = 0 density must fail
    let truth = GhzSpec::new(2, PI).unwrap();
    let wrong = GhzSpec::new(2, 0.0).unwrap();
    let probs = cell_probabilities(&wrong, 4, 4, 8);
    let samples = sample_batch(&truth, SampleStreamSpec::new(3, 100_000)).unwrap();
    let mut counts = vec![0u64; probs.len()];
    for p in &samples {
        let idx = p.iter().fold(0, |acc, q| acc * 16 + cell(q, 4, 4));
        counts[idx] += 1;
    }
    let stat: f64 = counts
        .iter()
        .zip(&probs)
        .map(|(&o, &p)| (o as f64 - p * 1e5).powi(2) / (p * 1e5))
        .sum();
    let p = 1.0 - ChiSquared::new(255.0).unwrap().cdf(stat);
    assert!(p < 1e-6, "p = {p}");
}

#[test]
fn acceptance_rate_is_one_half() {
    let engine = Engine::new(0).unwrap();
    for m in [2usize, 10, 40] {
        let spec = GhzSpec::new(m, 0.37 * m as f64).unwrap();
        let (_, stats) = engine
            .reduce(&spec, SampleStreamSpec::new(4, 200_000), MomentAccumulator::new, |_, _, _| {})
            .unwrap();
        let rate = stats.acceptance_rate();
        assert!((rate - 0.5).abs() < 0.01, "m={m} rate={rate}");
    }
}

#[test]
fn ghz_has_zero_z_moment() {
    let spec = GhzSpec::new(2, 0.0).unwrap();
    let samples = sample_batch(&spec, SampleStreamSpec::new(5, 200_000)).unwrap();
    let mut acc = MomentAccumulator::new();
    for p in &samples {
        acc.push(Complex64::new(3.0 * p[0].nz(), 0.0));
    }
    assert!(acc.mean().re.abs() < 3.0 * acc.stderr_re(), "{}", acc.mean());

    let (mean, stderr) = spin_up_total(&spec, &samples).unwrap();
    assert!((mean - 1.0).abs() < 3.0 * stderr);
}

#[test]
fn mermin_three_qubit_moment() {
    let (spec, conv) = mermin_convention(3).unwrap();
    assert_eq!(spec.phi(), -FRAC_PI_2);
    let samples = sample_batch(&spec, SampleStreamSpec::new(6, 1_000_000)).unwrap();
    let mut acc = MomentAccumulator::new();
    for p in &samples {
        acc.push(bell_weight(&conv, p).unwrap());
    }
    let mean = acc.mean();
    assert!(mean.re.abs() < 3.0 * acc.stderr_re(), "{mean}");
    assert!((mean.im + 4.0).abs() < 3.0 * acc.stderr_im(), "{mean}");
}

#[test]
fn sampled_values_leave_eigenvalue_range() {
    let spec = GhzSpec::new(2, PI).unwrap();
    let samples = sample_batch(&spec, SampleStreamSpec::new(7, 10_000)).unwrap();
    let max = samples
        .iter()
        .flat_map(|p| p.iter().map(|q| (3.0 * q.nx()).abs()))
        .fold(0.0, f64::max);
    assert!(max > 1.5, "{max}");
}

#[test]
fn partition_invariance_of_points() {
    let spec = GhzSpec::new(5, 0.9).unwrap();
    let whole = sample_batch(&spec, SampleStreamSpec::new(8, 300)).unwrap();
    let mut pieces = Vec::new();
    for (first, count) in [(0u64, 7u64), (7, 150), (157, 143)] {
        pieces.extend(sample_batch(&spec, SampleStreamSpec { seed: 8, first_index: first, count }).unwrap());
    }
    assert_eq!(whole, pieces);
}
