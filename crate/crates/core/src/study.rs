//! Sweeps over qubit counts: Bell violation, error scaling and scatter export.

use crate::engine::Engine;
use crate::estimators::{scatter_row_unchecked, spin_up_value, BellEstimate, BellTally, ScatterRow, ScatterSummary};
use crate::model::{
    ardehali_convention, lhv_bound_ratio, mermin_convention, BellConvention, GhzSpec, GENUINE_MULTIPARTITE_RATIO,
};
use crate::rng::mix64;
use crate::sampler::SampleStreamSpec;
use crate::stats::{fit_line, LineFit, Merge, ScalarMoments};
use crate::{Error, Result};

/// Which labelled convention to use for each `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConventionFamily {
    Mermin,
    Ardehali,
    /// Mermin for odd `m`, Ardehali for even `m`.
    Auto,
}

impl ConventionFamily {
    pub fn for_m(self, m: usize) -> Result<(GhzSpec, BellConvention)> {
        match self {
            ConventionFamily::Mermin => mermin_convention(m),
            ConventionFamily::Ardehali => ardehali_convention(m),
            ConventionFamily::Auto if m % 2 == 1 => mermin_convention(m),
            ConventionFamily::Auto => ardehali_convention(m),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ConventionFamily::Mermin => "mermin",
            ConventionFamily::Ardehali => "ardehali",
            ConventionFamily::Auto => "auto",
        }
    }
}

fn check_samples(samples: u64) -> Result<()> {
    if samples == 0 {
        return Err(Error::EmptySamples);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub m: usize,
    pub convention: BellConvention,
    pub estimate: BellEstimate,
    pub lhv_ratio: f64,
    pub genuine_threshold: f64,
    pub acceptance_rate: f64,
}

impl SweepRow {
    /// Ratio exceeds the LHV line by at least `k` standard errors.
    pub fn violates_lhv(&self, k: f64) -> bool {
        self.estimate.ratio - self.lhv_ratio >= k * self.estimate.ratio_stderr
    }
}

/// Bell estimate at one `m`.
pub fn bell_point(
    engine: &Engine,
    spec: &GhzSpec,
    conv: &BellConvention,
    samples: u64,
    seed: u64,
) -> Result<(BellEstimate, f64)> {
    check_samples(samples)?;
    let (tally, stats) = engine.reduce(
        spec,
        SampleStreamSpec::new(seed, samples),
        || BellTally::new(conv),
        |t, _, p| t.observe(conv, p),
    )?;
    Ok((BellEstimate::from_tally(spec, conv, &tally)?, stats.acceptance_rate()))
}

pub fn bell_sweep(
    engine: &Engine,
    ms: &[usize],
    family: ConventionFamily,
    samples: u64,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    check_samples(samples)?;
    // validate every m before sampling anything
    let plans = ms.iter().map(|&m| family.for_m(m)).collect::<Result<Vec<_>>>()?;
    plans
        .into_iter()
        .map(|(spec, conv)| {
            let (estimate, acceptance_rate) = bell_point(engine, &spec, &conv, samples, seed)?;
            let m = spec.m();
            Ok(SweepRow {
                m,
                lhv_ratio: lhv_bound_ratio(m, &conv).unwrap_or(f64::NAN),
                genuine_threshold: GENUINE_MULTIPARTITE_RATIO,
                convention: conv,
                estimate,
                acceptance_rate,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    pub m: usize,
    /// `f_stderr / F_QM`.
    pub rel_err_f: f64,
    /// Standard error of the spin-up number over its exact value `m/2`.
    pub rel_err_n: f64,
    /// Uncertainty of `rel_err_n` itself.
    pub rel_err_n_sigma: f64,
    pub samples: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingStudy {
    pub rows: Vec<ScalingRow>,
    /// Fit of `log2(rel_err_f)` against `m`.
    pub fit: Option<LineFit>,
}

impl ScalingStudy {
    /// Consecutive `rel_err_n` never rise by more than `k` combined sigmas.
    pub fn rel_err_n_non_increasing(&self, k: f64) -> bool {
        self.rows.windows(2).all(|w| {
            let sigma = w[0].rel_err_n_sigma.hypot(w[1].rel_err_n_sigma);
            w[1].rel_err_n <= w[0].rel_err_n + k * sigma
        })
    }
}

pub fn scaling_study(
    engine: &Engine,
    ms: &[usize],
    family: ConventionFamily,
    samples: u64,
    seed: u64,
) -> Result<ScalingStudy> {
    check_samples(samples)?;
    let plans = ms.iter().map(|&m| family.for_m(m)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(plans.len());
    for (spec, conv) in plans {
        let ((tally, n_acc), _) = engine.reduce(
            &spec,
            SampleStreamSpec::new(seed, samples),
            || (BellTally::new(&conv), ScalarMoments::new()),
            |(t, n), _, p| {
                t.observe(&conv, p);
                n.push(spin_up_value(p));
            },
        )?;
        let est = BellEstimate::from_tally(&spec, &conv, &tally)?;
        let n_true = spec.m() as f64 / 2.0;
        rows.push(ScalingRow {
            m: spec.m(),
            rel_err_f: est.f_stderr / est.f_qm,
            rel_err_n: n_acc.stderr() / n_true,
            rel_err_n_sigma: n_acc.stderr_uncertainty() / n_true,
            samples,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.m as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.rel_err_f.log2()).collect();
    let fit = fit_line(&xs, &ys, &vec![1.0; xs.len()]);
    Ok(ScalingStudy { rows, fit })
}

/// Exact large-`N` relative error of F for the labelled conventions:
/// `sqrt((6^m/2 − 4^{m−1})/N) / 2^{m−1}`.
pub fn predicted_rel_err_f(m: usize, samples: u64) -> f64 {
    let m = m as i32;
    let var = 6f64.powi(m) / 2.0 - 4f64.powi(m - 1);
    (var / samples as f64).sqrt() / 2f64.powi(m - 1)
}

/// Scatter records thinned to at most `max_rows` by keyed priority, plus
/// moments over every sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterRun {
    pub rows: Vec<ScatterRow>,
    pub summary: ScatterSummary,
}

struct Thinned {
    limit: usize,
    seed: u64,
    rows: Vec<(u64, ScatterRow)>,
    summary: ScatterSummary,
}

impl Thinned {
    fn prune(&mut self) {
        self.rows.sort_unstable_by_key(|(k, r)| (*k, r.index));
        self.rows.truncate(self.limit);
    }

    fn key(&self, index: u64) -> u64 {
        mix64(self.seed ^ mix64(index))
    }
}

impl Merge for Thinned {
    fn merge(&mut self, other: Self) {
        self.rows.extend(other.rows);
        self.prune();
        self.summary.merge(other.summary);
    }
}

pub fn scatter_run(
    engine: &Engine,
    spec: &GhzSpec,
    conv: &BellConvention,
    pair: (usize, usize),
    samples: u64,
    seed: u64,
    max_rows: usize,
) -> Result<ScatterRun> {
    check_samples(samples)?;
    let m = spec.m();
    if conv.m() != m {
        return Err(Error::Dimension { expected: m, got: conv.m() });
    }
    let (a, b) = pair;
    if a >= m || b >= m || a == b {
        return Err(Error::InvalidParameter {
            name: "qubit pair",
            reason: format!("({a}, {b}) must be distinct indices below {m}"),
        });
    }
    let thin_seed = mix64(seed ^ crate::rng::domain::THINNING);
    let (thinned, _) = engine.reduce(
        spec,
        SampleStreamSpec::new(seed, samples),
        || Thinned {
            limit: max_rows,
            seed: thin_seed,
            rows: Vec::new(),
            summary: ScatterSummary::default(),
        },
        |t, index, p| {
            let row = scatter_row_unchecked(conv, p, index, a, b);
            t.summary.observe(&row);
            if t.limit > 0 {
                let key = t.key(index);
                t.rows.push((key, row));
                if t.rows.len() >= 2 * t.limit.max(64) {
                    t.prune();
                }
            }
        },
    )?;
    let mut thinned = thinned;
    thinned.prune();
    let mut rows: Vec<ScatterRow> = thinned.rows.into_iter().map(|(_, r)| r).collect();
    rows.sort_unstable_by_key(|r| r.index);
    Ok(ScatterRun {
        rows,
        summary: thinned.summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_parity() {
        assert!(ConventionFamily::Mermin.for_m(4).is_err());
        assert!(ConventionFamily::Ardehali.for_m(3).is_err());
        assert_eq!(ConventionFamily::Auto.for_m(3).unwrap().1.label(), crate::ConventionLabel::Mermin);
        assert_eq!(ConventionFamily::Auto.for_m(4).unwrap().1.label(), crate::ConventionLabel::Ardehali);
    }

    #[test]
    fn sweep_validates_before_running() {
        let engine = Engine::new(1).unwrap();
        assert!(matches!(
            bell_sweep(&engine, &[3, 4], ConventionFamily::Mermin, 10, 0),
            Err(Error::Parity { .. })
        ));
        assert!(matches!(
            bell_sweep(&engine, &[3], ConventionFamily::Mermin, 0, 0),
            Err(Error::EmptySamples)
        ));
    }

    #[test]
    fn scatter_thinning_caps_rows() {
        let engine = Engine::new(2).unwrap();
        let (spec, conv) = ardehali_convention(2).unwrap();
        let run = scatter_run(&engine, &spec, &conv, (0, 1), 5000, 3, 100).unwrap();
        assert_eq!(run.rows.len(), 100);
        assert_eq!(run.summary.factors.count(), 5000);
        assert!(run.rows.windows(2).all(|w| w[0].index < w[1].index));
        let none = scatter_run(&engine, &spec, &conv, (0, 1), 50, 3, 0).unwrap();
        assert!(none.rows.is_empty());
        assert!(scatter_run(&engine, &spec, &conv, (0, 2), 50, 3, 10).is_err());
    }

    #[test]
    fn predicted_error_formula() {
        // m = 1: Var(Im w) = 3 − 1 = 2
        assert!((predicted_rel_err_f(1, 2) - 1.0).abs() < 1e-15);
    }
}
