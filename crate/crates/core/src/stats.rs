//! Mergeable streaming statistics and small regression helpers.

use num_complex::Complex64;

use crate::model::Extraction;

/// Types whose partial results combine into the result of the union.
pub trait Merge {
    fn merge(&mut self, other: Self);
}

/// Streaming mean and 2×2 covariance of a complex-valued estimator.
///
/// The real and imaginary parts are tracked jointly, so the accumulator also
/// serves as a bivariate accumulator for a pair of real series `(a, b)` fed as
/// `a + i·b`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MomentAccumulator {
    count: u64,
    mean: Complex64,
    m2_rr: f64,
    m2_ii: f64,
    m2_ri: f64,
}

impl MomentAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, z: Complex64) {
        self.count += 1;
        let n = self.count as f64;
        let d = z - self.mean;
        self.mean += d / n;
        let d2 = z - self.mean;
        self.m2_rr += d.re * d2.re;
        self.m2_ii += d.im * d2.im;
        self.m2_ri += d.re * d2.im;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> Complex64 {
        self.mean
    }

    fn denom(&self) -> f64 {
        if self.count > 1 {
            (self.count - 1) as f64
        } else {
            f64::NAN
        }
    }

    pub fn var_re(&self) -> f64 {
        (self.m2_rr / self.denom()).max(0.0)
    }

    pub fn var_im(&self) -> f64 {
        (self.m2_ii / self.denom()).max(0.0)
    }

    pub fn cov_re_im(&self) -> f64 {
        self.m2_ri / self.denom()
    }

    /// Sample variance of `|z − mean|²`.
    pub fn variance(&self) -> f64 {
        self.var_re() + self.var_im()
    }

    /// Standard error of the complex mean, `sqrt(variance / count)`.
    pub fn stderr(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }

    pub fn stderr_re(&self) -> f64 {
        (self.var_re() / self.count as f64).sqrt()
    }

    pub fn stderr_im(&self) -> f64 {
        (self.var_im() / self.count as f64).sqrt()
    }

    /// Standard error of `extraction(mean)`; delta method for the modulus.
    pub fn extracted_stderr(&self, extraction: Extraction) -> f64 {
        match extraction {
            Extraction::NegReal => self.stderr_re(),
            Extraction::NegImag => self.stderr_im(),
            Extraction::Modulus => {
                let r = self.mean.norm();
                if r == 0.0 {
                    return self.stderr();
                }
                let (c, s) = (self.mean.re / r, self.mean.im / r);
                let var = c * c * self.var_re() + s * s * self.var_im() + 2.0 * c * s * self.cov_re_im();
                (var.max(0.0) / self.count as f64).sqrt()
            }
        }
    }

    /// Sample correlation between the real and imaginary series.
    pub fn correlation(&self) -> f64 {
        self.m2_ri / (self.m2_rr * self.m2_ii).sqrt()
    }
}

impl Merge for MomentAccumulator {
    fn merge(&mut self, other: Self) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other;
            return;
        }
        let na = self.count as f64;
        let nb = other.count as f64;
        let n = na + nb;
        let d = other.mean - self.mean;
        let w = na * nb / n;
        self.mean += d * (nb / n);
        self.m2_rr += other.m2_rr + d.re * d.re * w;
        self.m2_ii += other.m2_ii + d.im * d.im * w;
        self.m2_ri += other.m2_ri + d.re * d.im * w;
        self.count += other.count;
    }
}

/// Streaming central moments up to fourth order for a real series.
///
/// Used where the uncertainty of a standard error is itself needed.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScalarMoments {
    count: u64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl ScalarMoments {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        let n1 = self.count as f64;
        self.count += 1;
        let n = self.count as f64;
        let delta = x - self.mean;
        let dn = delta / n;
        let dn2 = dn * dn;
        let term1 = delta * dn * n1;
        self.mean += dn;
        self.m4 += term1 * dn2 * (n * n - 3.0 * n + 3.0) + 6.0 * dn2 * self.m2 - 4.0 * dn * self.m3;
        self.m3 += term1 * dn * (n - 2.0) - 3.0 * dn * self.m2;
        self.m2 += term1;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        self.m2 / (self.count - 1) as f64
    }

    pub fn stderr(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }

    /// Approximate standard error of [`Self::stderr`] from the fourth moment.
    pub fn stderr_uncertainty(&self) -> f64 {
        let n = self.count as f64;
        let var = self.m2 / n;
        let mu4 = self.m4 / n;
        // Var(s²) ≈ (μ4 − σ⁴)/n, Var(s) ≈ Var(s²)/(4σ²)
        let var_s = ((mu4 - var * var) / n).max(0.0) / (4.0 * var);
        var_s.sqrt() / n.sqrt()
    }
}

impl Merge for ScalarMoments {
    fn merge(&mut self, other: Self) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other;
            return;
        }
        let na = self.count as f64;
        let nb = other.count as f64;
        let n = na + nb;
        let d = other.mean - self.mean;
        let d2 = d * d;
        let d3 = d2 * d;
        let d4 = d2 * d2;
        let m2 = self.m2 + other.m2 + d2 * na * nb / n;
        let m3 = self.m3
            + other.m3
            + d3 * na * nb * (na - nb) / (n * n)
            + 3.0 * d * (na * other.m2 - nb * self.m2) / n;
        let m4 = self.m4
            + other.m4
            + d4 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * d * (na * other.m3 - nb * self.m3) / n;
        self.mean += d * nb / n;
        self.m2 = m2;
        self.m3 = m3;
        self.m4 = m4;
        self.count += other.count;
    }
}

/// Least-squares line `y = intercept + slope·x` with the slope's standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

impl LineFit {
    /// Two-sided interval `slope ± z·stderr`.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        (self.slope - z * self.slope_stderr, self.slope + z * self.slope_stderr)
    }
}

/// Weighted least squares; pass unit weights for ordinary least squares.
/// The slope error is scaled by the residual variance. Returns `None` for
/// fewer than two distinct abscissae.
pub fn fit_line(xs: &[f64], ys: &[f64], weights: &[f64]) -> Option<LineFit> {
    assert_eq!(xs.len(), ys.len());
    assert_eq!(xs.len(), weights.len());
    let sw: f64 = weights.iter().sum();
    if xs.len() < 2 || sw <= 0.0 {
        return None;
    }
    let xm = xs.iter().zip(weights).map(|(x, w)| x * w).sum::<f64>() / sw;
    let ym = ys.iter().zip(weights).map(|(y, w)| y * w).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for ((x, y), w) in xs.iter().zip(ys).zip(weights) {
        sxx += w * (x - xm) * (x - xm);
        sxy += w * (x - xm) * (y - ym);
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let dof = xs.len() as f64 - 2.0;
    let slope_stderr = if dof > 0.0 {
        let rss: f64 = xs
            .iter()
            .zip(ys)
            .zip(weights)
            .map(|((x, y), w)| w * (y - intercept - slope * x).powi(2))
            .sum();
        (rss / dof / sxx).sqrt()
    } else {
        0.0
    };
    Some(LineFit {
        slope,
        intercept,
        slope_stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn known_moments() {
        let mut acc = MomentAccumulator::new();
        for z in [(1.0, 2.0), (3.0, -2.0), (5.0, 0.0)] {
            acc.push(Complex64::new(z.0, z.1));
        }
        assert_eq!(acc.count(), 3);
        assert!((acc.mean() - Complex64::new(3.0, 0.0)).norm() < 1e-15);
        assert!((acc.var_re() - 4.0).abs() < 1e-12);
        assert!((acc.var_im() - 4.0).abs() < 1e-12);
        assert!((acc.cov_re_im() + 2.0).abs() < 1e-12);
        assert!((acc.stderr() - (8.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn modulus_stderr_along_mean() {
        let mut acc = MomentAccumulator::new();
        for x in [1.0, 2.0, 3.0, 4.0] {
            acc.push(Complex64::new(x, 0.0));
        }
        assert!((acc.extracted_stderr(Extraction::Modulus) - acc.stderr_re()).abs() < 1e-15);
    }

    #[test]
    fn scalar_moments_match_two_pass() {
        let xs: Vec<f64> = (0..200).map(|i| ((i * 37) % 101) as f64 * 0.1 - 3.0).collect();
        let mut m = ScalarMoments::new();
        for &x in &xs {
            m.push(x);
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let c2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
        let c4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>();
        assert!(close(m.mean(), mean, 1e-12));
        assert!(close(m.m2, c2, 1e-12));
        assert!(close(m.m4, c4, 1e-11));

        let mut a = ScalarMoments::new();
        let mut b = ScalarMoments::new();
        xs[..77].iter().for_each(|&x| a.push(x));
        xs[77..].iter().for_each(|&x| b.push(x));
        a.merge(b);
        assert!(close(a.m2, c2, 1e-12));
        assert!(close(a.m3, m.m3, 1e-9) || (a.m3 - m.m3).abs() < 1e-9);
        assert!(close(a.m4, c4, 1e-11));
    }

    #[test]
    fn line_fit_exact() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 0.5 * x - 1.0).collect();
        let fit = fit_line(&xs, &ys, &[1.0; 4]).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-12);
        assert!((fit.intercept + 1.0).abs() < 1e-12);
        assert!(fit.slope_stderr < 1e-12);
        assert!(fit_line(&[1.0, 1.0], &[0.0, 1.0], &[1.0, 1.0]).is_none());
    }

    proptest! {
        #[test]
        fn merge_matches_sequential(
            values in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 2..200),
            cuts in prop::collection::vec(0usize..200, 0..6),
        ) {
            let zs: Vec<Complex64> = values.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
            let mut whole = MomentAccumulator::new();
            zs.iter().for_each(|&z| whole.push(z));

            let mut bounds: Vec<usize> = cuts.into_iter().map(|c| c % zs.len()).collect();
            bounds.push(0);
            bounds.push(zs.len());
            bounds.sort_unstable();
            let parts: Vec<MomentAccumulator> = bounds
                .windows(2)
                .map(|w| {
                    let mut a = MomentAccumulator::new();
                    zs[w[0]..w[1]].iter().for_each(|&z| a.push(z));
                    a
                })
                .collect();

            // forward and reverse merge orders
            let mut fwd = MomentAccumulator::new();
            parts.iter().for_each(|p| fwd.merge(*p));
            let mut rev = MomentAccumulator::new();
            parts.iter().rev().for_each(|p| rev.merge(*p));

            for acc in [fwd, rev] {
                prop_assert_eq!(acc.count(), whole.count());
                let scale = whole.mean().norm().max(1.0);
                prop_assert!((acc.mean() - whole.mean()).norm() <= 1e-12 * scale);
                let vs = whole.variance().max(1.0);
                prop_assert!((acc.variance() - whole.variance()).abs() <= 1e-9 * vs);
                prop_assert!(acc.variance() >= 0.0 || whole.count() < 2);
            }
        }
    }
}
