//! Dense state-vector reference for small qubit counts.
//!
//! Basis states are indexed by the binary string of spin values with qubit 1
//! as the most significant bit and `0 = ↑` (σz = +1). The all-up state is
//! index 0 and the all-down state is index `2^m − 1`.

use num_complex::Complex64;

use crate::estimators::operator_weight;
use crate::model::{BellConvention, BlochSample, GhzSpec, ProductOperator};
use crate::qfunction::{integrate_spheres, q_density, KERNEL};
use crate::{Error, Result};

/// Largest qubit count handled by the dense oracle.
pub const ORACLE_CAP: usize = 12;

type Op2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliAxis {
    Identity,
    X,
    Y,
    Z,
}

impl PauliAxis {
    fn matrix(self) -> Op2 {
        match self {
            PauliAxis::Identity => [[ONE, ZERO], [ZERO, ONE]],
            PauliAxis::X => [[ZERO, ONE], [ONE, ZERO]],
            PauliAxis::Y => [[ZERO, -I], [I, ZERO]],
            PauliAxis::Z => [[ONE, ZERO], [ZERO, -ONE]],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    m: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    fn apply(&mut self, qubit: usize, op: &Op2) {
        let bit = 1usize << (self.m - 1 - qubit);
        for i in 0..self.amplitudes.len() {
            if i & bit == 0 {
                let a0 = self.amplitudes[i];
                let a1 = self.amplitudes[i | bit];
                self.amplitudes[i] = op[0][0] * a0 + op[0][1] * a1;
                self.amplitudes[i | bit] = op[1][0] * a0 + op[1][1] * a1;
            }
        }
    }

    /// `⟨ψ| ⊗_j op_j |ψ⟩`.
    fn expectation(&self, ops: &[Op2]) -> Complex64 {
        let mut image = self.clone();
        for (j, op) in ops.iter().enumerate() {
            image.apply(j, op);
        }
        self.inner(&image)
    }
}

fn check_cap(m: usize) -> Result<()> {
    if m > ORACLE_CAP {
        return Err(Error::OracleCap { m, cap: ORACLE_CAP });
    }
    Ok(())
}

pub fn build_ghz(spec: &GhzSpec) -> Result<StateVector> {
    let m = spec.m();
    check_cap(m)?;
    let mut amplitudes = vec![ZERO; 1 << m];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    amplitudes[0] = Complex64::new(h, 0.0);
    amplitudes[(1 << m) - 1] = Complex64::from_polar(h, spec.phi());
    Ok(StateVector { m, amplitudes })
}

fn factor_matrix(sign: i8, theta: f64) -> Op2 {
    let s = f64::from(sign);
    let phase = Complex64::from_polar(1.0, -s * theta);
    // σx + i·s·σy = [[0, 1 + s], [1 − s, 0]]
    [
        [ZERO, phase * (1.0 + s)],
        [phase * (1.0 - s), ZERO],
    ]
}

/// Exact `⟨∏_j (σx + i s_j σy) e^{−i s_j θ_j}⟩`.
pub fn operator_expectation(state: &StateVector, op: &ProductOperator) -> Result<Complex64> {
    check_cap(state.m)?;
    if op.len() != state.m {
        return Err(Error::Dimension {
            expected: state.m,
            got: op.len(),
        });
    }
    let mats: Vec<Op2> = op
        .signs()
        .iter()
        .zip(op.phases())
        .map(|(&s, &t)| factor_matrix(s, t))
        .collect();
    Ok(state.expectation(&mats))
}

/// Exact Bell values for a convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleBell {
    /// `⟨Â⟩` for the literal `(s, θ)` operator.
    pub operator_mean: Complex64,
    /// Expectation of the operator F is extracted from.
    pub f_operator_mean: Complex64,
    pub f: f64,
}

pub fn oracle_bell_value(spec: &GhzSpec, conv: &BellConvention) -> Result<OracleBell> {
    let state = build_ghz(spec)?;
    let operator_mean = operator_expectation(&state, conv.operator())?;
    let f_operator_mean = operator_expectation(&state, conv.f_operator())?;
    Ok(OracleBell {
        operator_mean,
        f_operator_mean,
        f: conv.extraction().apply(f_operator_mean),
    })
}

/// Exact `⟨∏_j σ_{axis_j}⟩`.
pub fn oracle_pauli_correlator(state: &StateVector, axes: &[PauliAxis]) -> Result<f64> {
    check_cap(state.m)?;
    if axes.len() != state.m {
        return Err(Error::Dimension {
            expected: state.m,
            got: axes.len(),
        });
    }
    let mats: Vec<Op2> = axes.iter().map(|a| a.matrix()).collect();
    Ok(state.expectation(&mats).re)
}

/// Exact `N = Σ_j (⟨σz_j⟩ + 1)/2`.
pub fn oracle_spin_up_number(state: &StateVector) -> Result<f64> {
    let mut total = 0.0;
    for j in 0..state.m {
        let mut axes = vec![PauliAxis::Identity; state.m];
        axes[j] = PauliAxis::Z;
        total += 0.5 * (oracle_pauli_correlator(state, &axes)? + 1.0);
    }
    Ok(total)
}

/// `⟨n₁…n_m|ψ⟩` from the explicit coherent-state amplitudes
/// `cos(θ/2)` (↑) and `e^{iϕ} sin(θ/2)` (↓).
pub fn coherent_overlap(state: &StateVector, point: &[BlochSample]) -> Result<Complex64> {
    if point.len() != state.m {
        return Err(Error::Dimension {
            expected: state.m,
            got: point.len(),
        });
    }
    let amps: Vec<[Complex64; 2]> = point
        .iter()
        .map(|q| {
            let theta = q.nz().clamp(-1.0, 1.0).acos();
            let azimuth = q.ny().atan2(q.nx());
            [
                Complex64::new((theta / 2.0).cos(), 0.0),
                Complex64::from_polar((theta / 2.0).sin(), azimuth),
            ]
        })
        .collect();
    let m = state.m;
    let mut total = ZERO;
    for (idx, a) in state.amplitudes.iter().enumerate() {
        if *a == ZERO {
            continue;
        }
        let mut bra = ONE;
        for (j, c) in amps.iter().enumerate() {
            let bit = (idx >> (m - 1 - j)) & 1;
            bra *= c[bit].conj();
        }
        total += bra * a;
    }
    Ok(total)
}

/// Q density recomputed from [`coherent_overlap`].
pub fn oracle_q_density(state: &StateVector, point: &[BlochSample]) -> Result<f64> {
    Ok(KERNEL.powi(state.m as i32) * coherent_overlap(state, point)?.norm_sqr())
}

/// Quadrature of the sample weight of `op` against the Q density; equals the
/// exact `⟨op⟩` up to quadrature error when the weight correspondence holds.
pub fn oracle_q_moment_check(spec: &GhzSpec, op: &ProductOperator, resolution: usize) -> Result<Complex64> {
    if op.len() != spec.m() {
        return Err(Error::Dimension {
            expected: spec.m(),
            got: op.len(),
        });
    }
    integrate_spheres(spec.m(), resolution, |p| {
        operator_weight(op, p) * q_density(spec, p).unwrap_or(0.0)
    })
}
