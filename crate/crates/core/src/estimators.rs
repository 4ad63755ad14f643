//! Observables evaluated on Q-function samples.
//!
//! Under the spin-½ Q function `⟨σ_a⟩ = 3·E[n_a]`, and products over distinct
//! qubits carry over factor by factor, so the sample average of
//! `∏_j 3(nx_j + i s_j ny_j) e^{−i s_j θ_j}` is an unbiased estimate of the
//! product operator's expectation. Individual weights range over `[−3, 3]` per
//! factor, well outside the ±1 eigenvalues.

use num_complex::Complex64;

use crate::model::{f_qm_closed_form, BellConvention, ConventionLabel, GhzSpec, PhasePoint, ProductOperator};
use crate::oracle::{oracle_bell_value, ORACLE_CAP};
use crate::stats::{Merge, MomentAccumulator, ScalarMoments};
use crate::{BlochSample, Error, Result};

/// Per-qubit moment weight mapping `E[n]` onto `⟨σ⟩` for spin ½.
pub const MOMENT_WEIGHT: f64 = 3.0;

/// Sample weight of a product operator; no dimension check.
#[inline]
pub fn operator_weight(op: &ProductOperator, point: &[BlochSample]) -> Complex64 {
    let mut w = op.global_phase();
    for (q, &s) in point.iter().zip(op.signs()) {
        w *= Complex64::new(MOMENT_WEIGHT * q.nx(), MOMENT_WEIGHT * f64::from(s) * q.ny());
    }
    w
}

fn check_dimension(m: usize, point: &[BlochSample]) -> Result<()> {
    if point.len() != m {
        return Err(Error::Dimension {
            expected: m,
            got: point.len(),
        });
    }
    Ok(())
}

/// `∏_j 3(nx_j + i·s_j·ny_j)·e^{−i·s_j·θ_j}` for the convention's literal operator.
pub fn bell_weight(conv: &BellConvention, point: &[BlochSample]) -> Result<Complex64> {
    check_dimension(conv.m(), point)?;
    Ok(operator_weight(conv.operator(), point))
}

/// Sample weight of the operator F is extracted from.
pub fn f_weight(conv: &BellConvention, point: &[BlochSample]) -> Result<Complex64> {
    check_dimension(conv.m(), point)?;
    Ok(operator_weight(conv.f_operator(), point))
}

/// Streaming accumulator behind [`BellEstimate`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BellTally {
    pub f: MomentAccumulator,
    /// Literal-operator weights when they differ from the F operator.
    pub operator: Option<MomentAccumulator>,
}

impl BellTally {
    pub fn new(conv: &BellConvention) -> Self {
        Self {
            f: MomentAccumulator::new(),
            operator: (conv.operator() != conv.f_operator()).then(MomentAccumulator::new),
        }
    }

    #[inline]
    pub fn observe(&mut self, conv: &BellConvention, point: &[BlochSample]) {
        self.f.push(operator_weight(conv.f_operator(), point));
        if let Some(acc) = self.operator.as_mut() {
            acc.push(operator_weight(conv.operator(), point));
        }
    }

    /// Accumulator of the literal operator's weights.
    pub fn operator_acc(&self) -> &MomentAccumulator {
        self.operator.as_ref().unwrap_or(&self.f)
    }
}

impl Merge for BellTally {
    fn merge(&mut self, other: Self) {
        self.f.merge(other.f);
        match (self.operator.as_mut(), other.operator) {
            (Some(a), Some(b)) => a.merge(b),
            (None, None) => {}
            _ => panic!("merging tallies of different conventions"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellEstimate {
    /// Sample mean of the F-operator weight.
    pub complex_mean: Complex64,
    pub f_value: f64,
    pub f_stderr: f64,
    pub n_samples: u64,
    pub f_qm: f64,
    pub ratio: f64,
    pub ratio_stderr: f64,
    /// Sample mean of the literal operator weight, `⟨Â⟩`.
    pub operator_mean: Complex64,
    /// Standard errors of the real and imaginary parts of `operator_mean`.
    pub operator_stderr: (f64, f64),
}

/// Reference F: the closed form for labelled conventions, the oracle otherwise.
pub fn reference_f(spec: &GhzSpec, conv: &BellConvention) -> Result<f64> {
    match conv.label() {
        ConventionLabel::Mermin | ConventionLabel::Ardehali => f_qm_closed_form(spec, conv),
        ConventionLabel::Custom if spec.m() <= ORACLE_CAP => Ok(oracle_bell_value(spec, conv)?.f),
        ConventionLabel::Custom => Err(Error::Unsupported(format!(
            "no reference F for a custom convention at m = {} > {ORACLE_CAP}",
            spec.m()
        ))),
    }
}

impl BellEstimate {
    pub fn from_tally(spec: &GhzSpec, conv: &BellConvention, tally: &BellTally) -> Result<Self> {
        if tally.f.count() == 0 {
            return Err(Error::EmptySamples);
        }
        let f_qm = reference_f(spec, conv)?;
        let complex_mean = tally.f.mean();
        let f_value = conv.extraction().apply(complex_mean);
        let f_stderr = tally.f.extracted_stderr(conv.extraction());
        let op = tally.operator_acc();
        Ok(Self {
            complex_mean,
            f_value,
            f_stderr,
            n_samples: tally.f.count(),
            f_qm,
            ratio: f_value / f_qm,
            ratio_stderr: f_stderr / f_qm.abs(),
            operator_mean: op.mean(),
            operator_stderr: (op.stderr_re(), op.stderr_im()),
        })
    }
}

pub fn estimate_bell(spec: &GhzSpec, conv: &BellConvention, samples: &[PhasePoint]) -> Result<BellEstimate> {
    if conv.m() != spec.m() {
        return Err(Error::Dimension {
            expected: spec.m(),
            got: conv.m(),
        });
    }
    let mut tally = BellTally::new(conv);
    for p in samples {
        check_dimension(spec.m(), p)?;
        tally.observe(conv, p);
    }
    BellEstimate::from_tally(spec, conv, &tally)
}

/// Per-sample total spin-up number `Σ_j (3·nz_j + 1)/2`.
#[inline]
pub fn spin_up_value(point: &[BlochSample]) -> f64 {
    point.iter().map(|q| 0.5 * (MOMENT_WEIGHT * q.nz() + 1.0)).sum()
}

/// Mean and standard error of the spin-up number.
pub fn spin_up_total(spec: &GhzSpec, samples: &[PhasePoint]) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut acc = ScalarMoments::new();
    for p in samples {
        check_dimension(spec.m(), p)?;
        acc.push(spin_up_value(p));
    }
    Ok((acc.mean(), acc.stderr()))
}

/// One scatter record: real parts of two F-operator factors and the two
/// two-qubit terms `−σx^aσx^b` and `+σy^aσy^b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterRow {
    pub index: u64,
    pub re_a: f64,
    pub re_b: f64,
    pub term_xx: f64,
    pub term_yy: f64,
}

fn check_pair(m: usize, a: usize, b: usize) -> Result<()> {
    if a >= m || b >= m || a == b {
        return Err(Error::InvalidParameter {
            name: "qubit pair",
            reason: format!("({a}, {b}) must be distinct indices below {m}"),
        });
    }
    Ok(())
}

pub fn scatter_row(
    conv: &BellConvention,
    point: &[BlochSample],
    index: u64,
    a: usize,
    b: usize,
) -> Result<ScatterRow> {
    check_dimension(conv.m(), point)?;
    check_pair(conv.m(), a, b)?;
    Ok(scatter_row_unchecked(conv, point, index, a, b))
}

#[inline]
pub(crate) fn scatter_row_unchecked(
    conv: &BellConvention,
    point: &[BlochSample],
    index: u64,
    a: usize,
    b: usize,
) -> ScatterRow {
    let op = conv.f_operator();
    let factor = |j: usize| {
        let s = f64::from(op.signs()[j]);
        let q = point[j];
        Complex64::new(MOMENT_WEIGHT * q.nx(), MOMENT_WEIGHT * s * q.ny())
            * Complex64::from_polar(1.0, -s * op.phases()[j])
    };
    let (qa, qb) = (point[a], point[b]);
    let w2 = MOMENT_WEIGHT * MOMENT_WEIGHT;
    ScatterRow {
        index,
        re_a: factor(a).re,
        re_b: factor(b).re,
        term_xx: -w2 * qa.nx() * qb.nx(),
        term_yy: w2 * qa.ny() * qb.ny(),
    }
}

/// Scatter records for the first `max_rows` samples.
pub fn scatter_data(
    conv: &BellConvention,
    samples: &[PhasePoint],
    a: usize,
    b: usize,
    max_rows: usize,
) -> Result<Vec<ScatterRow>> {
    check_pair(conv.m(), a, b)?;
    samples
        .iter()
        .take(max_rows)
        .enumerate()
        .map(|(i, p)| scatter_row(conv, p, i as u64, a, b))
        .collect()
}

/// Moments over all scatter records: factors as `re_a + i·re_b`, terms as
/// `term_xx + i·term_yy`, so each accumulator carries the pair's correlation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScatterSummary {
    pub factors: MomentAccumulator,
    pub terms: MomentAccumulator,
}

impl ScatterSummary {
    pub fn observe(&mut self, row: &ScatterRow) {
        self.factors.push(Complex64::new(row.re_a, row.re_b));
        self.terms.push(Complex64::new(row.term_xx, row.term_yy));
    }
}

impl Merge for ScatterSummary {
    fn merge(&mut self, other: Self) {
        self.factors.merge(other.factors);
        self.terms.merge(other.terms);
    }
}
