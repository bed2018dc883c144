//! Scaling constants, special functions, the threshold-size solver,
//! limit-law samplers and the Gaussian comparison bound.
//!
//! Products of binomials and Gaussian tails are evaluated in log space
//! throughout: the quantities pair huge combinatorial factors with tiny
//! tail probabilities.

use crate::error::{Error, Result};
use crate::rng::Stream;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_78;

/// Scaling and centering constants for the maximum of N independent
/// standard normals.
#[derive(Debug, Clone, Copy)]
pub struct ScalingConstants {
    pub big_n: f64,
    pub a: f64,
    pub b: f64,
}

/// a_N = sqrt(2 log N), b_N = a_N - log(4 pi log N) / (2 a_N).
pub fn scaling_constants(big_n: f64) -> Result<ScalingConstants> {
    if !(big_n >= 2.0) {
        return Err(Error::Domain(format!("N = {big_n} must be >= 2")));
    }
    let log_n = big_n.ln();
    let a = (2.0 * log_n).sqrt();
    let b = a - (4.0 * std::f64::consts::PI * log_n).ln() / (2.0 * a);
    Ok(ScalingConstants { big_n, a, b })
}

/// Upper tail of the standard normal, via erfc (no cancellation for
/// large arguments).
pub fn normal_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// log of `normal_tail`, finite for arguments far beyond erfc underflow.
pub fn log_normal_tail(x: f64) -> f64 {
    if x < 35.0 {
        return normal_tail(x).ln();
    }
    // Asymptotic series phi(x)/x * (1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8).
    let inv2 = 1.0 / (x * x);
    let series = 1.0 + inv2 * (-1.0 + inv2 * (3.0 + inv2 * (-15.0 + inv2 * 105.0)));
    -0.5 * x * x - x.ln() - LN_SQRT_2PI + series.ln()
}

/// log Gamma, exact enough at integers and accurate to ~1e-15 relative.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// log of the real-argument binomial n! / (Gamma(x+1) Gamma(n-x+1)).
pub fn log_binomial_real(n: usize, x: f64) -> Result<f64> {
    let nf = n as f64;
    if !(0.0..=nf).contains(&x) {
        return Err(Error::Domain(format!("x = {x} outside [0, {n}]")));
    }
    Ok(ln_gamma(nf + 1.0) - ln_gamma(x + 1.0) - ln_gamma(nf - x + 1.0))
}

/// Real solution of (n choose x)^2 Phi-bar(x tau) = 1 and its nearest
/// integer.
#[derive(Debug, Clone, Copy)]
pub struct ThresholdSizeSolution {
    pub k_tilde: f64,
    pub k_star: usize,
}

/// Bisection for the unique crossing of log f_n(x) =
/// 2 log(n choose x) + log Phi-bar(x tau) on [1, n/2]. log f_n can rise
/// before falling (the binomial grows faster than the tail decays near
/// x = 1 at desk scale), so uniqueness is checked as a single sign
/// change on a grid, not assumed from monotonicity.
pub fn solve_k_tilde(n: usize, tau: f64) -> Result<ThresholdSizeSolution> {
    if n < 2 {
        return Err(Error::Domain("n must be at least 2".into()));
    }
    if tau <= 0.0 {
        return Err(Error::Domain("tau must be positive".into()));
    }
    let log_f = |x: f64| -> Result<f64> {
        Ok(2.0 * log_binomial_real(n, x)? + log_normal_tail(x * tau))
    };
    let mut lo = 1.0;
    let mut hi = n as f64 / 2.0;
    let f_lo = log_f(lo)?;
    let f_hi = log_f(hi)?;
    if f_lo <= 0.0 || f_hi >= 0.0 {
        return Err(Error::NoSolution(format!(
            "log f_n has no sign change on [1, {hi}]: log f_n(1) = {f_lo:.6}, log f_n({hi}) = {f_hi:.6}"
        )));
    }
    // Uniqueness check: exactly one sign change on a coarse grid.
    let grid = 64;
    let mut gone_negative = false;
    for i in 1..=grid {
        let x = lo + (hi - lo) * i as f64 / grid as f64;
        let f = log_f(x)?;
        if f <= 0.0 {
            gone_negative = true;
        } else if gone_negative {
            return Err(Error::InvariantViolated(format!(
                "log f_n crosses zero more than once near x = {x}"
            )));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if log_f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let k_tilde = 0.5 * (lo + hi);
    let residual = log_f(k_tilde)?;
    if residual.abs() > 1e-10 {
        return Err(Error::NoSolution(format!(
            "bisection stalled: |log f_n| = {:.3e}",
            residual.abs()
        )));
    }
    Ok(ThresholdSizeSolution { k_tilde, k_star: k_tilde.round() as usize })
}

/// First-order terms of the closed-form expansion of k-tilde; used as a
/// cross-check only.
pub fn k_tilde_asymptotic(n: usize, tau: f64) -> f64 {
    let nf = n as f64;
    let t2 = tau * tau;
    (4.0 / t2) * (std::f64::consts::E * t2 * nf / (4.0 * nf.ln())).ln()
        + (4.0 / t2 - 1.0) * nf.ln().ln() / nf.ln()
}

/// Small-x coefficient k^{k+1/2} / (k! (2 pi)^{(k-1)/2}) of the
/// mean-minus-minimum CDF, evaluated in log space.
pub fn alpha_k(k: usize) -> f64 {
    let kf = k as f64;
    ((kf + 0.5) * kf.ln() - ln_gamma(kf + 1.0) - (kf - 1.0) * LN_SQRT_2PI).exp()
}

/// Monte Carlo estimate of the local-optimality constant theta_k, with
/// its standard error. Exact (0.5, 0) at k = 1.
pub fn theta_k_estimate(k: usize, samples: usize, seed: u64) -> Result<(f64, f64)> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples".into()));
    }
    let kf = k as f64;
    let log_prefactor = (2.0 * kf + 0.5) * kf.ln()
        - (2.0 * kf - 1.0) * std::f64::consts::LN_2
        - (kf - 1.0) / 2.0 * std::f64::consts::PI.ln()
        - 2.0 * ln_gamma(kf + 1.0);
    let prefactor = log_prefactor.exp();

    let mut stream = Stream::new(seed);
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..samples {
        let g = stream.gamma_int(k as u32, 2.0);
        let y = stream.exp1();
        let y2 = stream.exp1();
        let h = ((1.0 + y / g).ln() * (1.0 + y2 / g).ln()).powi(k as i32 - 1);
        sum += h;
        sumsq += h * h;
    }
    let m = samples as f64;
    let mean = sum / m;
    let var = (sumsq / m - mean * mean).max(0.0) * m / (m - 1.0);
    Ok((prefactor * mean, prefactor * (var / m).sqrt()))
}

/// Draws of (V_1, ..., V_l) with V_i = -log(T_1 + ... + T_i), the joint
/// limit of the top order statistics of normal maxima. V_1 is standard
/// Gumbel.
pub fn sample_extreme_limit(l: usize, samples: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if l == 0 {
        return Err(Error::InvalidArgument("l must be positive".into()));
    }
    let mut stream = Stream::new(seed);
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut partial = 0.0;
        let mut draw = Vec::with_capacity(l);
        for _ in 0..l {
            partial += stream.exp1();
            draw.push(-partial.ln());
        }
        out.push(draw);
    }
    Ok(out)
}

/// Importance sample over value tuples. Self-normalized statistics are
/// invariant under positive rescaling of the weights.
#[derive(Debug, Clone)]
pub struct WeightedSample {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl WeightedSample {
    /// Self-normalized weighted mean of f over the points.
    pub fn weighted_mean<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (p, &w) in self.points.iter().zip(&self.weights) {
            num += w * f(p);
            den += w;
        }
        num / den
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Importance sample targeting the (G, T, T') limit density
/// f(g,t,t') proportional to (log(1+t/g) log(1+t'/g))^{k-1} g^{k-1}
/// e^{-t-t'-2g}. Proposal: g ~ Gamma(k, 2) and t, t' ~ Exp(1); the
/// weight is exactly the dropped log-product factor, finite almost
/// surely, which plain rejection cannot offer here.
pub fn sample_gtt(k: usize, samples: usize, seed: u64) -> Result<WeightedSample> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    let mut stream = Stream::new(seed);
    let mut points = Vec::with_capacity(samples);
    let mut weights = Vec::with_capacity(samples);
    for _ in 0..samples {
        let g = stream.gamma_int(k as u32, 2.0);
        let t = stream.exp1();
        let t2 = stream.exp1();
        let w = ((1.0 + t / g).ln() * (1.0 + t2 / g).ln()).powi(k as i32 - 1);
        points.push(vec![g, t, t2]);
        weights.push(w);
    }
    Ok(WeightedSample { points, weights })
}

/// Uniform draws on the k-simplex via normalized Exp(1) coordinates.
pub fn sample_dirichlet_ones(k: usize, samples: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    let mut stream = Stream::new(seed);
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut draw: Vec<f64> = (0..k).map(|_| stream.exp1()).collect();
        let total: f64 = draw.iter().sum();
        for x in draw.iter_mut() {
            *x /= total;
        }
        out.push(draw);
    }
    Ok(out)
}

/// Finite-n Gaussian comparison sum for the k x k submatrix family at
/// threshold u, split by row/column overlap (s, t).
#[derive(Debug, Clone)]
pub struct ComparisonBoundReport {
    pub n: usize,
    pub k: usize,
    pub u: f64,
    pub total: f64,
    pub per_overlap_terms: Vec<((usize, usize), f64)>,
}

/// N^2 Phi-bar(u)^2 times the overlap sum over 1 <= s,t <= k with
/// st != k^2, each term carrying C(k,s) C(k,t) C(n-k,k-s) C(n-k,k-t)
/// / C(n,k)^2 * sqrt((k^2+st)/(k^2-st)) * exp(st u^2 / (k^2+st)),
/// with N = (n choose k)^2. Everything is accumulated in log space.
pub fn comparison_bound(n: usize, k: usize, u: f64) -> Result<ComparisonBoundReport> {
    if u < 1.0 {
        return Err(Error::Domain(format!("u = {u} < 1; the bound is not claimed there")));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} outside [1, {n}]")));
    }
    let log_choose = |a: usize, b: usize| -> f64 {
        ln_gamma(a as f64 + 1.0) - ln_gamma(b as f64 + 1.0) - ln_gamma((a - b) as f64 + 1.0)
    };
    let log_n_choose_k = log_choose(n, k);
    let log_big_n = 2.0 * log_n_choose_k;
    let log_tail = log_normal_tail(u);
    let k2 = (k * k) as f64;

    let mut per_overlap_terms = Vec::new();
    let mut total = 0.0;
    for s in 1..=k {
        for t in 1..=k {
            if s * t == k * k {
                continue;
            }
            if k - s > n - k || k - t > n - k {
                continue; // C(n-k, k-s) = 0
            }
            let st = (s * t) as f64;
            let log_term = 2.0 * log_big_n
                + 2.0 * log_tail
                + log_choose(k, s)
                + log_choose(k, t)
                + log_choose(n - k, k - s)
                + log_choose(n - k, k - t)
                - 2.0 * log_n_choose_k
                + 0.5 * ((k2 + st) / (k2 - st)).ln()
                + st * u * u / (k2 + st);
            let term = log_term.exp();
            per_overlap_terms.push(((s, t), term));
            total += term;
        }
    }
    Ok(ComparisonBoundReport { n, k, u, total, per_overlap_terms })
}

/// Sandwich for P(rho Z + sqrt(1-rho^2) Z' > x | Z > x):
/// Phi-bar(theta x) <= p <= (1+rho) Phi-bar(theta x) with
/// theta = sqrt((1-rho)/(1+rho)).
pub fn bivariate_tail_bounds(rho: f64, x: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::Domain(format!("rho = {rho} outside [0, 1]")));
    }
    if x <= 0.0 {
        return Err(Error::Domain("x must be positive".into()));
    }
    let theta = ((1.0 - rho) / (1.0 + rho)).sqrt();
    let tail = normal_tail(theta * x);
    Ok((tail, (1.0 + rho) * tail))
}

/// Exact (n)_k / n^k, in log space.
pub fn falling_factorial_ratio(n: usize, k: usize) -> Result<f64> {
    if k > n {
        return Err(Error::InvalidArgument(format!("k = {k} > n = {n}")));
    }
    let nf = n as f64;
    let log_ratio: f64 = (0..k).map(|i| (1.0 - i as f64 / nf).ln()).sum();
    Ok(log_ratio.exp())
}
