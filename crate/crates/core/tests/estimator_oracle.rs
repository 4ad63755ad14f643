use std::f64::consts::PI;

use ghzq_core::engine::Engine;
use ghzq_core::estimators::{estimate_bell, f_weight, scatter_data, BellEstimate, BellTally};
use ghzq_core::model::{ardehali_convention, f_qm_closed_form, mermin_convention, BlochSample, GhzSpec};
use ghzq_core::oracle::{
    build_ghz, oracle_bell_value, oracle_q_density, oracle_q_moment_check, operator_expectation, ORACLE_CAP,
};
use ghzq_core::qfunction::q_density;
use ghzq_core::sampler::{sample_batch, SampleStreamSpec};
use ghzq_core::stats::{Merge, MomentAccumulator};
use ghzq_core::study::{bell_point, ConventionFamily};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn closed_forms_match_oracle() {
    for m in 1..=ORACLE_CAP {
        let (spec, conv) = ConventionFamily::Auto.for_m(m).unwrap();
        let exact = oracle_bell_value(&spec, &conv).unwrap().f;
        let closed = f_qm_closed_form(&spec, &conv).unwrap();
        assert!((exact - closed).abs() <= 1e-9 * closed, "m={m}: {exact} vs {closed}");
    }
}

#[test]
fn q_density_matches_direct_overlap() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for m in 1..=4 {
        let spec = GhzSpec::new(m, rng.gen_range(-PI..PI)).unwrap();
        let state = build_ghz(&spec).unwrap();
        let scale = (2.0 * PI).powi(m as i32);
        for _ in 0..2_500 {
            let p: Vec<BlochSample> = (0..m)
                .map(|_| BlochSample::from_polar(rng.gen_range(-1.0..1.0), rng.gen_range(0.0..2.0 * PI)))
                .collect();
            // compare |overlap|² (dimensionless)
            let fast = q_density(&spec, &p).unwrap() * scale;
            let direct = oracle_q_density(&state, &p).unwrap() * scale;
            assert!((fast - direct).abs() < 1e-12, "m={m}: {fast} vs {direct}");
        }
    }
}

#[test]
fn weight_quadrature_matches_oracle() {
    let cases = [
        (mermin_convention(1).unwrap(), 32),
        (ardehali_convention(2).unwrap(), 24),
        (mermin_convention(3).unwrap(), 12),
    ];
    for ((spec, conv), res) in cases {
        let state = build_ghz(&spec).unwrap();
        for op in [conv.operator(), conv.f_operator()] {
            let quad = oracle_q_moment_check(&spec, op, res).unwrap();
            let exact = operator_expectation(&state, op).unwrap();
            assert!((quad - exact).norm() < 0.05, "m={}: {quad} vs {exact}", spec.m());
        }
    }
    // ⟨σx + iσy⟩ = 1 on the φ = 0 single-qubit state
    let spec = GhzSpec::new(1, 0.0).unwrap();
    let (_, conv) = mermin_convention(1).unwrap();
    let got = oracle_q_moment_check(&spec, conv.operator(), 32).unwrap();
    assert!((got.re - 1.0).abs() < 0.01 && got.im.abs() < 0.01, "{got}");
}

#[test]
fn sampled_moments_are_unbiased() {
    let engine = Engine::new(0).unwrap();
    for m in 1..=10 {
        let (spec, conv) = ConventionFamily::Auto.for_m(m).unwrap();
        let exact = oracle_bell_value(&spec, &conv).unwrap();
        let (est, _) = bell_point(&engine, &spec, &conv, 200_000, 100 + m as u64).unwrap();
        let (se_re, se_im) = est.operator_stderr;
        let d = est.operator_mean - exact.operator_mean;
        assert!(d.re.abs() < 4.0 * se_re && d.im.abs() < 4.0 * se_im, "m={m}: {d}");
        let df = est.f_value - exact.f;
        assert!(df.abs() < 4.0 * est.f_stderr, "m={m}: F off by {df}");
    }
}

#[test]
fn weight_second_moment_grows_six_fold() {
    let mut prev = None;
    for m in 3..=9 {
        let (spec, conv) = ConventionFamily::Auto.for_m(m).unwrap();
        let samples = sample_batch(&spec, SampleStreamSpec::new(20, 100_000)).unwrap();
        let second = samples.iter().map(|p| f_weight(&conv, p).unwrap().norm_sqr()).sum::<f64>() / 1e5;
        if let Some(last) = prev {
            let r = second / last;
            assert!((5.0..=7.0).contains(&r), "m={m}: ratio {r}");
        }
        prev = Some(second);
    }
}

#[test]
fn merged_partials_equal_whole_run() {
    let (spec, conv) = mermin_convention(5).unwrap();
    let samples = sample_batch(&spec, SampleStreamSpec::new(30, 50_000)).unwrap();
    let whole = estimate_bell(&spec, &conv, &samples).unwrap();
    let mut merged = BellTally::new(&conv);
    for chunk in samples.chunks(7_919) {
        let mut t = BellTally::new(&conv);
        chunk.iter().for_each(|p| t.observe(&conv, p));
        merged.merge(t);
    }
    let parts = BellEstimate::from_tally(&spec, &conv, &merged).unwrap();
    assert_eq!(parts.n_samples, whole.n_samples);
    assert!((parts.f_value - whole.f_value).abs() <= 1e-12 * whole.f_value.abs());
    assert!((parts.ratio - whole.ratio).abs() <= 1e-12 * whole.ratio.abs());
    assert!((parts.f_stderr - whole.f_stderr).abs() <= 1e-9 * whole.f_stderr);
}

#[test]
fn ratio_invariant_under_qubit_permutation() {
    let (spec, conv) = ardehali_convention(4).unwrap();
    let samples = sample_batch(&spec, SampleStreamSpec::new(31, 20_000)).unwrap();
    let perm = [2, 0, 3, 1];
    let conv_p = conv.permuted(&perm).unwrap();
    let samples_p: Vec<_> = samples.iter().map(|p| p.permuted(&perm).unwrap()).collect();
    let a = estimate_bell(&spec, &conv, &samples).unwrap();
    let b = estimate_bell(&spec, &conv_p, &samples_p).unwrap();
    assert!((a.ratio - b.ratio).abs() <= 1e-10 * a.ratio.abs().max(1.0));
}

#[test]
fn estimate_invariants() {
    let (spec, conv) = mermin_convention(3).unwrap();
    let samples = sample_batch(&spec, SampleStreamSpec::new(32, 100_000)).unwrap();
    let est = estimate_bell(&spec, &conv, &samples).unwrap();
    assert_eq!(est.f_qm, 4.0);
    assert!((est.ratio * est.f_qm - est.f_value).abs() <= 1e-12 * est.f_value.abs());
    assert!(est.f_stderr >= 0.0);
    assert!((est.f_value - 4.0).abs() < 3.0 * est.f_stderr);
}

#[test]
fn ardehali_two_qubit_ratio() {
    let engine = Engine::new(0).unwrap();
    let (spec, conv) = ardehali_convention(2).unwrap();
    let (est, _) = bell_point(&engine, &spec, &conv, 1_000_000, 40).unwrap();
    assert_eq!(est.f_qm, 2.0);
    assert!((est.ratio - 1.0).abs() < 3.0 * est.ratio_stderr, "{est:?}");
}

#[test]
fn scatter_terms_anticorrelate() {
    let (spec, conv) = ardehali_convention(2).unwrap();
    let samples = sample_batch(&spec, SampleStreamSpec::new(41, 100_000)).unwrap();
    let rows = scatter_data(&conv, &samples, 0, 1, usize::MAX).unwrap();
    let mut terms = MomentAccumulator::new();
    for r in &rows {
        terms.push(ghzq_core::Complex64::new(r.term_xx, r.term_yy));
    }
    // −⟨σxσx⟩ + ⟨σyσy⟩ = 2 and corr(−xx, yy) = −1/8
    assert!((terms.mean().re + terms.mean().im - 2.0).abs() < 4.0 * terms.stderr());
    let corr = terms.correlation();
    assert!(corr < 0.0 && (corr + 0.125).abs() < 0.02, "{corr}");
    let max = rows.iter().map(|r| r.re_a.abs()).fold(0.0, f64::max);
    assert!(max > 1.5);
}
