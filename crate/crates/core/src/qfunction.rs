//! SU(2) Q function of the GHZ state.
//!
//! With the spin coherent state `|n⟩ = cos(θ/2)|↑⟩ + e^{iϕ} sin(θ/2)|↓⟩` the
//! overlap with the GHZ state is
//!
//! ```text
//! ⟨n₁…n_m|Φ⟩ = (∏ cos(θ_j/2) + e^{iφ} ∏ e^{−iϕ_j} sin(θ_j/2)) / √2
//! ```
//!
//! and the density, normalised over the product of unit spheres with the
//! per-qubit kernel `2/(4π)`, is
//!
//! ```text
//! Q = ½·kernel^m·[U + D + 2·C·cos(φ − Σϕ_j)]
//! ```
//!
//! with `U = ∏cos²(θ_j/2)`, `D = ∏sin²(θ_j/2)`, `C = ∏cos(θ_j/2)sin(θ_j/2)`.
//! Since `C e^{−iϕ} = (nx − i·ny)/2` the interference term needs no
//! trigonometric calls.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::model::{BlochSample, GhzSpec};
use crate::{Error, Result};

/// Per-qubit normalisation `(2j+1)/(4π)` for spin one half.
pub const KERNEL: f64 = 1.0 / (2.0 * PI);

/// Largest `m` accepted by the sphere-product quadrature.
pub const QUADRATURE_MAX_QUBITS: usize = 3;
pub const QUADRATURE_MIN_RESOLUTION: usize = 8;

/// The factors entering the GHZ Q density at one phase-space point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QDensityParts {
    pub up_product: f64,
    pub down_product: f64,
    pub cross_product: f64,
    pub phase_sum: f64,
}

impl QDensityParts {
    pub fn of(point: &[BlochSample]) -> Self {
        let mut up = 1.0;
        let mut down = 1.0;
        let mut cross = 1.0;
        let mut phase_sum = 0.0;
        for q in point {
            up *= 0.5 * (1.0 + q.nz());
            down *= 0.5 * (1.0 - q.nz());
            cross *= 0.5 * q.nx().hypot(q.ny());
            phase_sum += q.azimuth();
        }
        Self {
            up_product: up,
            down_product: down,
            cross_product: cross,
            phase_sum,
        }
    }

    /// `|⟨coherent|GHZ⟩|²` assembled from the parts.
    pub fn overlap_sq(&self, phi: f64) -> f64 {
        0.5 * (self.up_product + self.down_product + 2.0 * self.cross_product * (phi - self.phase_sum).cos())
    }
}

/// Branch products `U`, `D` and the complex cross amplitude `∏(nx − i·ny)/2`.
#[inline]
pub(crate) fn branch_products(point: &[BlochSample]) -> (f64, f64, Complex64) {
    let mut up = 1.0;
    let mut down = 1.0;
    let mut cross = Complex64::new(1.0, 0.0);
    for q in point {
        up *= 0.5 * (1.0 + q.nz());
        down *= 0.5 * (1.0 - q.nz());
        cross *= Complex64::new(0.5 * q.nx(), -0.5 * q.ny());
    }
    (up, down, cross)
}

#[inline]
pub(crate) fn overlap_sq_fast(phi_phase: Complex64, point: &[BlochSample]) -> f64 {
    let (up, down, cross) = branch_products(point);
    let interference = 2.0 * (phi_phase * cross).re;
    // rounding can push exact zeros slightly negative
    (0.5 * (up + down + interference)).max(0.0)
}

fn check_dimension(spec: &GhzSpec, point: &[BlochSample]) -> Result<()> {
    if point.len() != spec.m() {
        return Err(Error::Dimension {
            expected: spec.m(),
            got: point.len(),
        });
    }
    Ok(())
}

/// Normalised Q density of the GHZ state at `point`.
pub fn q_density(spec: &GhzSpec, point: &[BlochSample]) -> Result<f64> {
    check_dimension(spec, point)?;
    let phase = Complex64::from_polar(1.0, spec.phi());
    Ok(KERNEL.powi(spec.m() as i32) * overlap_sq_fast(phase, point))
}

/// Rejection envelope `kernel^m·(U + D)`; twice the proposal mixture density,
/// total mass 2, and pointwise `≥ q_density`.
pub fn envelope_density(spec: &GhzSpec, point: &[BlochSample]) -> Result<f64> {
    check_dimension(spec, point)?;
    let (up, down, _) = branch_products(point);
    Ok(KERNEL.powi(spec.m() as i32) * (up + down))
}

/// Midpoint-rule integral of `f` over the product of `m` unit spheres using
/// `resolution` nodes in `cos θ` and `resolution` in azimuth per qubit.
pub fn integrate_spheres<F>(m: usize, resolution: usize, f: F) -> Result<Complex64>
where
    F: Fn(&[BlochSample]) -> Complex64 + Sync,
{
    if m == 0 || m > QUADRATURE_MAX_QUBITS {
        return Err(Error::QuadratureSize {
            m,
            max: QUADRATURE_MAX_QUBITS,
        });
    }
    if resolution < QUADRATURE_MIN_RESOLUTION {
        return Err(Error::Resolution {
            got: resolution,
            min: QUADRATURE_MIN_RESOLUTION,
        });
    }
    let du = 2.0 / resolution as f64;
    let dphi = 2.0 * PI / resolution as f64;
    let nodes: Vec<BlochSample> = (0..resolution)
        .flat_map(|i| {
            let u = -1.0 + (i as f64 + 0.5) * du;
            (0..resolution).map(move |k| BlochSample::from_polar(u, (k as f64 + 0.5) * dphi))
        })
        .collect();
    let weight = (du * dphi).powi(m as i32);

    let total: Complex64 = nodes
        .par_iter()
        .map(|&first| {
            let mut point = vec![first; m];
            let mut idx = vec![0usize; m];
            for j in 1..m {
                point[j] = nodes[0];
            }
            let mut sum = Complex64::new(0.0, 0.0);
            loop {
                sum += f(&point);
                // odometer over qubits 1..m
                let mut j = m;
                loop {
                    j -= 1;
                    if j == 0 {
                        return sum;
                    }
                    idx[j] += 1;
                    if idx[j] < nodes.len() {
                        point[j] = nodes[idx[j]];
                        break;
                    }
                    idx[j] = 0;
                    point[j] = nodes[0];
                }
            }
        })
        .sum();
    Ok(total * weight)
}

/// Total mass of [`q_density`] by quadrature; 1 up to `O(resolution⁻²)`.
pub fn q_density_quadrature_check(spec: &GhzSpec, resolution: usize) -> Result<f64> {
    let phase = Complex64::from_polar(1.0, spec.phi());
    let norm = KERNEL.powi(spec.m() as i32);
    let mass = integrate_spheres(spec.m(), resolution, |p| {
        Complex64::new(norm * overlap_sq_fast(phase, p), 0.0)
    })?;
    Ok(mass.re)
}
