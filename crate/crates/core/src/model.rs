//! State, convention and phase-space types shared by every other module.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};
use std::ops::Deref;

use num_complex::Complex64;

use crate::{Error, Result};

/// Largest supported qubit count.
pub const MAX_QUBITS: usize = 64;

/// Ratio F/F_QM above which a violation is genuinely M-partite
/// (hybrid local/nonlocal bound).
pub const GENUINE_MULTIPARTITE_RATIO: f64 = FRAC_1_SQRT_2;

const NORM_TOLERANCE: f64 = 1e-12;

/// Reduces an angle to `[-π, π)`.
pub fn reduce_phase(phi: f64) -> f64 {
    let r = (phi + PI).rem_euclid(2.0 * PI) - PI;
    // rem_euclid may round up to exactly 2π
    if r >= PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// GHZ state `(|↑…↑⟩ + e^{iφ}|↓…↓⟩)/√2` on `m` qubits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhzSpec {
    m: usize,
    phi: f64,
}

impl GhzSpec {
    pub fn new(m: usize, phi: f64) -> Result<Self> {
        if m == 0 || m > MAX_QUBITS {
            return Err(Error::QubitCount { m, max: MAX_QUBITS });
        }
        if !phi.is_finite() {
            return Err(Error::InvalidParameter {
                name: "phi",
                reason: format!("{phi} is not finite"),
            });
        }
        Ok(Self {
            m,
            phi: reduce_phase(phi),
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Superposition phase, reduced to `[-π, π)`.
    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// How the real Bell quantity F is read off a complex expectation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Extraction {
    NegReal,
    NegImag,
    Modulus,
}

impl Extraction {
    pub fn apply(self, z: Complex64) -> f64 {
        match self {
            Extraction::NegReal => -z.re,
            Extraction::NegImag => -z.im,
            Extraction::Modulus => z.norm(),
        }
    }

    /// Per-sample real component for the linear rules; `None` for `Modulus`.
    pub fn linear_component(self, z: Complex64) -> Option<f64> {
        match self {
            Extraction::NegReal => Some(-z.re),
            Extraction::NegImag => Some(-z.im),
            Extraction::Modulus => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Extraction::NegReal => "neg_real",
            Extraction::NegImag => "neg_imag",
            Extraction::Modulus => "modulus",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConventionLabel {
    Mermin,
    Ardehali,
    Custom,
}

impl ConventionLabel {
    pub fn name(self) -> &'static str {
        match self {
            ConventionLabel::Mermin => "mermin",
            ConventionLabel::Ardehali => "ardehali",
            ConventionLabel::Custom => "custom",
        }
    }
}

/// Product operator `∏_j (σx + i·s_j·σy)·e^{-i·s_j·θ_j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductOperator {
    signs: Vec<i8>,
    phases: Vec<f64>,
}

impl ProductOperator {
    pub fn new(signs: Vec<i8>, phases: Vec<f64>) -> Result<Self> {
        if signs.len() != phases.len() {
            return Err(Error::Convention(format!(
                "{} signs but {} phases",
                signs.len(),
                phases.len()
            )));
        }
        if signs.is_empty() || signs.len() > MAX_QUBITS {
            return Err(Error::QubitCount {
                m: signs.len(),
                max: MAX_QUBITS,
            });
        }
        if let Some(s) = signs.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::Convention(format!("sign {s} is not ±1")));
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::Convention("non-finite phase".into()));
        }
        Ok(Self { signs, phases })
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// Global phase `e^{-i Σ s_j θ_j}` carried by the operator.
    pub fn global_phase(&self) -> Complex64 {
        let total: f64 = self
            .signs
            .iter()
            .zip(&self.phases)
            .map(|(&s, &t)| f64::from(s) * t)
            .sum();
        Complex64::from_polar(1.0, -total)
    }

    /// True when all signs agree, i.e. the operator maps one GHZ branch onto
    /// the other and can have a nonzero GHZ expectation.
    pub fn is_sign_aligned(&self) -> bool {
        self.signs.windows(2).all(|w| w[0] == w[1])
    }
}

/// Bell operator settings plus the rule producing the real quantity F.
///
/// `operator` is the product operator exactly as parameterised by `(s, θ)`.
/// `f_operator` is the operator whose extracted expectation is F. The two
/// coincide for Mermin and custom conventions. For Ardehali the literal
/// operator has mixed signs and vanishing GHZ expectation, so F is taken from
/// the sign-aligned product `∏(σx − iσy)`, whose negated real part is
/// `−⟨σx¹σx²⟩ + ⟨σy¹σy²⟩` at `m = 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct BellConvention {
    label: ConventionLabel,
    operator: ProductOperator,
    f_operator: ProductOperator,
    extraction: Extraction,
}

impl BellConvention {
    pub fn custom(signs: Vec<i8>, phases: Vec<f64>, extraction: Extraction) -> Result<Self> {
        let operator = ProductOperator::new(signs, phases)?;
        Ok(Self {
            label: ConventionLabel::Custom,
            f_operator: operator.clone(),
            operator,
            extraction,
        })
    }

    pub fn label(&self) -> ConventionLabel {
        self.label
    }

    pub fn m(&self) -> usize {
        self.operator.len()
    }

    pub fn signs(&self) -> &[i8] {
        self.operator.signs()
    }

    pub fn phases(&self) -> &[f64] {
        self.operator.phases()
    }

    pub fn operator(&self) -> &ProductOperator {
        &self.operator
    }

    pub fn f_operator(&self) -> &ProductOperator {
        &self.f_operator
    }

    pub fn extraction(&self) -> Extraction {
        self.extraction
    }

    /// Human-readable statement of how F is computed, for output metadata.
    pub fn extraction_rule(&self) -> String {
        match self.label {
            ConventionLabel::Mermin => "F = -Im<prod_j (sx_j + i sy_j)>".to_string(),
            ConventionLabel::Ardehali => "F = -Re<prod_j (sx_j - i sy_j)>; literal operator \
                 (s_j=-1 j<M, s_M=+1, theta_M=-pi/4) has zero GHZ expectation"
                .to_string(),
            ConventionLabel::Custom => format!(
                "F = {}<prod_j (sx_j + i s_j sy_j) exp(-i s_j theta_j)>",
                self.extraction.name()
            ),
        }
    }

    /// Applies a permutation to the qubit order: entry `k` of the result is
    /// entry `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let m = self.m();
        check_permutation(perm, m)?;
        let pick = |op: &ProductOperator| ProductOperator {
            signs: perm.iter().map(|&i| op.signs[i]).collect(),
            phases: perm.iter().map(|&i| op.phases[i]).collect(),
        };
        Ok(Self {
            label: self.label,
            operator: pick(&self.operator),
            f_operator: pick(&self.f_operator),
            extraction: self.extraction,
        })
    }
}

fn check_permutation(perm: &[usize], m: usize) -> Result<()> {
    if perm.len() != m {
        return Err(Error::Dimension {
            expected: m,
            got: perm.len(),
        });
    }
    let mut seen = vec![false; m];
    for &i in perm {
        if i >= m || std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidParameter {
                name: "permutation",
                reason: format!("{perm:?} is not a permutation of 0..{m}"),
            });
        }
    }
    Ok(())
}

/// Mermin settings for odd `m`: `φ = −π/2`, `s_j = 1`, `θ_j = 0`, `F = −Im⟨Â⟩`.
pub fn mermin_convention(m: usize) -> Result<(GhzSpec, BellConvention)> {
    if m % 2 == 0 {
        return Err(Error::Parity {
            convention: "mermin",
            parity: "odd",
            m,
        });
    }
    let spec = GhzSpec::new(m, -FRAC_PI_2)?;
    let operator = ProductOperator::new(vec![1; m], vec![0.0; m])?;
    Ok((
        spec,
        BellConvention {
            label: ConventionLabel::Mermin,
            f_operator: operator.clone(),
            operator,
            extraction: Extraction::NegImag,
        },
    ))
}

/// Ardehali settings for even `m`: `φ = π`, `s_j = −1, θ_j = 0` for `j < m`,
/// `s_m = 1`, `θ_m = −π/4`.
pub fn ardehali_convention(m: usize) -> Result<(GhzSpec, BellConvention)> {
    if m % 2 == 1 {
        return Err(Error::Parity {
            convention: "ardehali",
            parity: "even",
            m,
        });
    }
    let spec = GhzSpec::new(m, PI)?;
    let mut signs = vec![-1; m];
    let mut phases = vec![0.0; m];
    signs[m - 1] = 1;
    phases[m - 1] = -FRAC_PI_4;
    Ok((
        spec,
        BellConvention {
            label: ConventionLabel::Ardehali,
            operator: ProductOperator::new(signs, phases)?,
            f_operator: ProductOperator::new(vec![-1; m], vec![0.0; m])?,
            extraction: Extraction::NegReal,
        },
    ))
}

fn paired_phase(label: ConventionLabel) -> Option<f64> {
    match label {
        ConventionLabel::Mermin => Some(-FRAC_PI_2),
        ConventionLabel::Ardehali => Some(reduce_phase(PI)),
        ConventionLabel::Custom => None,
    }
}

/// Quantum-mechanical F for the labelled conventions: `2^{m−1}` in both cases.
pub fn f_qm_closed_form(spec: &GhzSpec, conv: &BellConvention) -> Result<f64> {
    let Some(phi) = paired_phase(conv.label()) else {
        return Err(Error::Unsupported(
            "no closed form for custom conventions; use the oracle".into(),
        ));
    };
    if conv.m() != spec.m() {
        return Err(Error::Dimension {
            expected: spec.m(),
            got: conv.m(),
        });
    }
    if (spec.phi() - phi).abs() > 1e-12 {
        return Err(Error::Unsupported(format!(
            "{} closed form assumes phi = {phi}, got {}",
            conv.label().name(),
            spec.phi()
        )));
    }
    Ok(2f64.powi(spec.m() as i32 - 1))
}

/// LHV bound divided by F_QM, `2^{−(m−1)/2}`, for the labelled conventions.
pub fn lhv_bound_ratio(m: usize, conv: &BellConvention) -> Option<f64> {
    match conv.label() {
        ConventionLabel::Mermin | ConventionLabel::Ardehali => {
            Some(2f64.powf(-(m as f64 - 1.0) / 2.0))
        }
        ConventionLabel::Custom => None,
    }
}

/// A unit Bloch vector: the phase-space coordinate of one qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochSample {
    nx: f64,
    ny: f64,
    nz: f64,
}

impl BlochSample {
    pub const NORTH: Self = Self {
        nx: 0.0,
        ny: 0.0,
        nz: 1.0,
    };
    pub const SOUTH: Self = Self {
        nx: 0.0,
        ny: 0.0,
        nz: -1.0,
    };
    pub const PLUS_X: Self = Self {
        nx: 1.0,
        ny: 0.0,
        nz: 0.0,
    };

    pub fn new(nx: f64, ny: f64, nz: f64) -> Result<Self> {
        let norm2 = nx * nx + ny * ny + nz * nz;
        if !((norm2 - 1.0).abs() <= NORM_TOLERANCE) {
            return Err(Error::InvalidParameter {
                name: "bloch vector",
                reason: format!("|n|^2 = {norm2}"),
            });
        }
        Ok(Self { nx, ny, nz })
    }

    /// From `cos θ` and azimuth.
    #[inline]
    pub fn from_polar(cos_theta: f64, azimuth: f64) -> Self {
        let rho = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
        let (s, c) = azimuth.sin_cos();
        Self {
            nx: rho * c,
            ny: rho * s,
            nz: cos_theta,
        }
    }

    #[inline]
    pub fn nx(&self) -> f64 {
        self.nx
    }

    #[inline]
    pub fn ny(&self) -> f64 {
        self.ny
    }

    #[inline]
    pub fn nz(&self) -> f64 {
        self.nz
    }

    pub fn azimuth(&self) -> f64 {
        self.ny.atan2(self.nx)
    }
}

/// One draw from the Q distribution: one Bloch vector per qubit.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PhasePoint {
    qubits: Vec<BlochSample>,
}

impl PhasePoint {
    pub fn new(qubits: Vec<BlochSample>) -> Self {
        Self { qubits }
    }

    pub fn with_capacity(m: usize) -> Self {
        Self {
            qubits: Vec::with_capacity(m),
        }
    }

    pub fn qubits(&self) -> &[BlochSample] {
        &self.qubits
    }

    pub(crate) fn buffer_mut(&mut self) -> &mut Vec<BlochSample> {
        &mut self.qubits
    }

    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.qubits.len())?;
        Ok(Self {
            qubits: perm.iter().map(|&i| self.qubits[i]).collect(),
        })
    }
}

impl Deref for PhasePoint {
    type Target = [BlochSample];

    fn deref(&self) -> &[BlochSample] {
        &self.qubits
    }
}

impl From<Vec<BlochSample>> for PhasePoint {
    fn from(qubits: Vec<BlochSample>) -> Self {
        Self { qubits }
    }
}
