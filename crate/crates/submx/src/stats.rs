//! Empirical-distribution utilities: ECDF, KS statistic, Wasserstein
//! distance to the standard normal, moments and QQ data.

use crate::asymptotics::normal_tail;
use crate::error::{Error, Result};

/// Sorted sample with optional non-negative weights (absent = uniform).
#[derive(Debug, Clone)]
pub struct EmpiricalDistribution {
    sorted_values: Vec<f64>,
    weights: Option<Vec<f64>>,
    /// Cumulative weight after each value; last entry is the total.
    prefix: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        values.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in samples"));
        let prefix = (1..=values.len()).map(|i| i as f64).collect();
        Ok(EmpiricalDistribution { sorted_values: values, weights: None, prefix })
    }

    pub fn new_weighted(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if values.len() != weights.len() {
            return Err(Error::InvalidArgument("values/weights length mismatch".into()));
        }
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidArgument("weights must be finite and non-negative".into()));
        }
        if weights.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidArgument("weights must not all be zero".into()));
        }
        let mut pairs: Vec<(f64, f64)> = values.into_iter().zip(weights).collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("no NaN in samples"));
        let mut prefix = Vec::with_capacity(pairs.len());
        let mut acc = 0.0;
        let (values, weights): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        for &w in &weights {
            acc += w;
            prefix.push(acc);
        }
        Ok(EmpiricalDistribution { sorted_values: values, weights: Some(weights), prefix })
    }

    pub fn len(&self) -> usize {
        self.sorted_values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty samples
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted_values
    }

    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    fn total_weight(&self) -> f64 {
        *self.prefix.last().expect("non-empty")
    }

    /// Right-continuous (weighted) ECDF at x.
    pub fn cdf_at(&self, x: f64) -> f64 {
        let idx = self.sorted_values.partition_point(|&v| v <= x);
        if idx == 0 {
            0.0
        } else {
            self.prefix[idx - 1] / self.total_weight()
        }
    }

    /// sup over sample points of max(|F-hat(x) - F(x)|, |F-hat(x-) - F(x)|).
    pub fn ks_statistic<F: Fn(f64) -> f64>(&self, reference_cdf: F) -> f64 {
        let total = self.total_weight();
        let mut d = 0.0f64;
        let m = self.len();
        let mut i = 0;
        while i < m {
            // Group duplicates: the ECDF jumps once per distinct value.
            let x = self.sorted_values[i];
            let before = if i == 0 { 0.0 } else { self.prefix[i - 1] / total };
            let mut j = i;
            while j + 1 < m && self.sorted_values[j + 1] == x {
                j += 1;
            }
            let after = self.prefix[j] / total;
            let f = reference_cdf(x);
            d = d.max((after - f).abs()).max((before - f).abs());
            i = j + 1;
        }
        d
    }

    /// Quantile-coupling estimate of the Wasserstein-1 distance to
    /// N(0, 1): mean |x_(i) - Phi^{-1}((i - 0.5)/m)|. Unweighted only.
    pub fn wasserstein_to_standard_normal(&self) -> Result<f64> {
        if self.is_weighted() {
            return Err(Error::WeightedSample(
                "quantile coupling is undefined for weighted samples".into(),
            ));
        }
        let m = self.len();
        if m < 2 {
            return Err(Error::InvalidArgument("need at least 2 points".into()));
        }
        let sum: f64 = self
            .sorted_values
            .iter()
            .enumerate()
            .map(|(i, &x)| (x - normal_quantile((i as f64 + 0.5) / m as f64)).abs())
            .sum();
        Ok(sum / m as f64)
    }

    /// Weighted or unweighted moments; the unbiased divisor is used in
    /// the unweighted case.
    pub fn summarize(&self) -> Summary {
        let total = self.total_weight();
        let m = self.len();
        let mean = match &self.weights {
            None => self.sorted_values.iter().sum::<f64>() / m as f64,
            Some(w) => {
                self.sorted_values.iter().zip(w).map(|(x, w)| x * w).sum::<f64>() / total
            }
        };
        let variance = match &self.weights {
            None if m >= 2 => {
                let ss: f64 = self.sorted_values.iter().map(|x| (x - mean).powi(2)).sum();
                Some(ss / (m as f64 - 1.0))
            }
            Some(w) if m >= 2 => {
                let ss: f64 = self
                    .sorted_values
                    .iter()
                    .zip(w)
                    .map(|(x, w)| w * (x - mean).powi(2))
                    .sum();
                Some(ss / total)
            }
            _ => None,
        };
        let stderr_of_mean = variance.map(|v| (v / m as f64).sqrt());
        Summary { mean, variance, stderr_of_mean, count: m }
    }

    /// (reference quantile, order statistic) pairs at plotting positions
    /// (i - 0.5)/m. Unweighted only.
    pub fn qq_points<Q: Fn(f64) -> f64>(&self, reference_quantile: Q) -> Result<Vec<(f64, f64)>> {
        if self.is_weighted() {
            return Err(Error::WeightedSample("QQ positions are undefined for weighted samples".into()));
        }
        let m = self.len();
        Ok(self
            .sorted_values
            .iter()
            .enumerate()
            .map(|(i, &x)| (reference_quantile((i as f64 + 0.5) / m as f64), x))
            .collect())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Summary {
    pub mean: f64,
    /// None when the sample has fewer than two points.
    pub variance: Option<f64>,
    pub stderr_of_mean: Option<f64>,
    pub count: usize,
}

/// sup_x |F_a(x) - F_b(x)| between two (possibly weighted) ECDFs. The
/// supremum over step functions is attained at jump points of either
/// sample, approached from both sides.
pub fn two_sample_ks(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> f64 {
    let mut points: Vec<f64> = a.values().iter().chain(b.values()).copied().collect();
    points.sort_by(|x, y| x.partial_cmp(y).expect("no NaN in samples"));
    points.dedup();
    let mut d = 0.0f64;
    let (mut fa_prev, mut fb_prev) = (0.0f64, 0.0f64);
    for &x in &points {
        d = d.max((fa_prev - fb_prev).abs());
        let fa = a.cdf_at(x);
        let fb = b.cdf_at(x);
        d = d.max((fa - fb).abs());
        fa_prev = fa;
        fb_prev = fb;
    }
    d
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    1.0 - normal_tail(x)
}

/// Standard normal quantile: Acklam's rational approximation refined by
/// one Newton step against the erfc-based CDF.
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "p = {p} outside (0, 1)");
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    // One Newton step against the high-accuracy CDF.
    let phi = (-(x * x) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    x - (normal_cdf(x) - p) / phi
}

/// Least-squares slope of (x, y) pairs through their means.
pub fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let mut num = 0.0;
    let mut den = 0.0;
    for &(x, y) in points {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    #[test]
    fn ks_at_exact_quantiles() {
        let m = 100;
        let values: Vec<f64> = (0..m).map(|i| normal_quantile((i as f64 + 0.5) / m as f64)).collect();
        let s = EmpiricalDistribution::new(values).unwrap();
        let ks = s.ks_statistic(normal_cdf);
        assert!((ks - 0.005).abs() < 1e-9, "ks = {ks}");
    }

    #[test]
    fn ks_single_point_at_median() {
        let s = EmpiricalDistribution::new(vec![0.0]).unwrap();
        assert!((s.ks_statistic(normal_cdf) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ks_of_large_normal_sample() {
        let mut stream = Stream::new(2024);
        let values: Vec<f64> = (0..100_000).map(|_| stream.normal()).collect();
        let s = EmpiricalDistribution::new(values).unwrap();
        assert!(s.ks_statistic(normal_cdf) <= 0.006);
    }

    #[test]
    fn ks_invariant_under_increasing_transform() {
        let mut stream = Stream::new(8);
        let values: Vec<f64> = (0..500).map(|_| stream.normal()).collect();
        let s = EmpiricalDistribution::new(values.clone()).unwrap();
        let ks = s.ks_statistic(normal_cdf);
        let transformed = EmpiricalDistribution::new(values.iter().map(|x| x.powi(3)).collect()).unwrap();
        let ks_t = transformed.ks_statistic(|y: f64| normal_cdf(y.cbrt()));
        assert!((ks - ks_t).abs() < 1e-12);
    }

    #[test]
    fn wasserstein_examples() {
        let m = 1000;
        let q: Vec<f64> = (0..m).map(|i| normal_quantile((i as f64 + 0.5) / m as f64)).collect();
        let s = EmpiricalDistribution::new(q.clone()).unwrap();
        assert!(s.wasserstein_to_standard_normal().unwrap() < 1e-12);

        let shifted = EmpiricalDistribution::new(q.iter().map(|x| x + 0.7).collect()).unwrap();
        assert!((shifted.wasserstein_to_standard_normal().unwrap() - 0.7).abs() < 1e-12);

        let mut stream = Stream::new(12);
        let values: Vec<f64> = (0..10_000).map(|_| stream.normal()).collect();
        let s = EmpiricalDistribution::new(values).unwrap();
        assert!(s.wasserstein_to_standard_normal().unwrap() <= 0.03);
    }

    #[test]
    fn wasserstein_rejects_weighted() {
        let s = EmpiricalDistribution::new_weighted(vec![0.0, 1.0], vec![1.0, 2.0]).unwrap();
        assert!(s.wasserstein_to_standard_normal().is_err());
    }

    #[test]
    fn summarize_examples() {
        let s = EmpiricalDistribution::new(vec![1.0, 2.0, 3.0]).unwrap();
        let sum = s.summarize();
        assert_eq!(sum.mean, 2.0);
        assert_eq!(sum.variance, Some(1.0));

        let c = EmpiricalDistribution::new(vec![4.0; 5]).unwrap();
        assert_eq!(c.summarize().variance, Some(0.0));

        let w = EmpiricalDistribution::new_weighted(vec![0.0, 0.0, 3.0], vec![1.0, 1.0, 2.0]).unwrap();
        assert_eq!(w.summarize().mean, 1.5);

        let single = EmpiricalDistribution::new(vec![1.0]).unwrap();
        assert!(single.summarize().variance.is_none());
    }

    #[test]
    fn summarize_on_duplicated_sample_keeps_mean() {
        let mut stream = Stream::new(3);
        let values: Vec<f64> = (0..100).map(|_| stream.normal()).collect();
        let mean = EmpiricalDistribution::new(values.clone()).unwrap().summarize().mean;
        let doubled: Vec<f64> = values.iter().chain(&values).copied().collect();
        let mean2 = EmpiricalDistribution::new(doubled).unwrap().summarize().mean;
        assert!((mean - mean2).abs() < 1e-12);
    }

    #[test]
    fn qq_examples() {
        let m = 50;
        let q: Vec<f64> = (0..m).map(|i| normal_quantile((i as f64 + 0.5) / m as f64)).collect();
        let s = EmpiricalDistribution::new(q).unwrap();
        for (t, e) in s.qq_points(normal_quantile).unwrap() {
            assert!((t - e).abs() < 1e-12);
        }
        let one = EmpiricalDistribution::new(vec![1.5]).unwrap();
        let pts = one.qq_points(normal_quantile).unwrap();
        assert_eq!(pts.len(), 1);
        assert!((pts[0].0 - normal_quantile(0.5)).abs() < 1e-9);
    }

    #[test]
    fn qq_slope_near_one_for_standardized_gaussian() {
        let mut stream = Stream::new(21);
        let raw: Vec<f64> = (0..1000).map(|_| stream.normal()).collect();
        let mean = raw.iter().sum::<f64>() / raw.len() as f64;
        let sd = (raw.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (raw.len() as f64 - 1.0)).sqrt();
        let std: Vec<f64> = raw.iter().map(|x| (x - mean) / sd).collect();
        let s = EmpiricalDistribution::new(std).unwrap();
        let slope = least_squares_slope(&s.qq_points(normal_quantile).unwrap());
        assert!((slope - 1.0).abs() < 0.05, "slope = {slope}");
    }

    #[test]
    fn two_sample_ks_examples() {
        let a = EmpiricalDistribution::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(two_sample_ks(&a, &a), 0.0);

        let b = EmpiricalDistribution::new(vec![4.0, 5.0]).unwrap();
        assert!((two_sample_ks(&a, &b) - 1.0).abs() < 1e-12);

        // Doubling each point's multiplicity via weights changes nothing.
        let w = EmpiricalDistribution::new_weighted(vec![1.0, 2.0, 3.0], vec![2.0, 2.0, 2.0]).unwrap();
        assert_eq!(two_sample_ks(&a, &w), 0.0);

        // Two large samples from the same law are close.
        let mut s = Stream::new(5);
        let x: Vec<f64> = (0..20_000).map(|_| s.normal()).collect();
        let y: Vec<f64> = (0..20_000).map(|_| s.normal()).collect();
        let dx = EmpiricalDistribution::new(x).unwrap();
        let dy = EmpiricalDistribution::new(y).unwrap();
        assert!(two_sample_ks(&dx, &dy) < 0.025);
    }

    #[test]
    fn quantile_round_trip() {
        for i in 1..200 {
            let p = i as f64 / 200.0;
            let x = normal_quantile(p);
            assert!((normal_cdf(x) - p).abs() < 1e-9, "p = {p}");
        }
    }

    #[test]
    fn empty_sample_rejected() {
        assert!(EmpiricalDistribution::new(vec![]).is_err());
    }
}
