//! The seven experiment runners.
//!
//! Each replicate owns its matrix and RNG stream; every summary
//! statistic is recomputable from the emitted per-replicate rows.

use super::{
    histogram, map_replicates, Check, CheckOp, ExperimentConfig, ExperimentReport, SummaryStat,
};
use crate::asymptotics::{
    comparison_bound, sample_gtt, scaling_constants, solve_k_tilde, theta_k_estimate,
};
use crate::error::{Error, Result};
use crate::matrix::{anova_decompose, extract_submatrix, GaussianMatrix};
use crate::rng::{derive_seed, Stream};
use crate::search::{
    binomial, count_local_optima_above, enumerate_local_optima, global_optimum_exhaustive,
    largest_threshold_submatrix_size, las_search,
};
use crate::stats::{normal_cdf, normal_quantile, two_sample_ks, EmpiricalDistribution};

const HIST_BINS: usize = 40;

/// Standard Gumbel CDF exp(-e^{-x}).
fn gumbel_cdf(x: f64) -> f64 {
    (-(-x).exp()).exp()
}

/// Standard Gumbel quantile.
fn gumbel_quantile(p: f64) -> f64 {
    -(-p.ln()).ln()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// (mean, standard error of the mean); sample must have >= 2 points.
fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0);
    (m, (var / xs.len() as f64).sqrt())
}

/// QQ pairs of a sample against the standard normal after in-place
/// standardization; diagnostic output for experiments without a
/// closed-form reference quantile.
fn standardized_normal_qq(sample: &[f64]) -> Vec<(f64, f64)> {
    let (m, _) = mean_stderr(sample);
    let sd = (sample.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (sample.len() as f64 - 1.0)).sqrt();
    let std: Vec<f64> = sample.iter().map(|x| (x - m) / sd).collect();
    let dist = EmpiricalDistribution::new(std).expect("non-empty sample");
    dist.qq_points(normal_quantile).expect("unweighted")
}

/// Gumbel limit of the scaled global maximum: per replicate,
/// a_N(k M_n(k) - b_N) with N = (n choose k)^2, KS-tested against
/// exp(-e^{-x}).
pub fn run_e1(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let (n, k) = (config.n, config.k);
    let budget = config.budget();
    let big_n = binomial(n, k).powi(2);
    let sc = scaling_constants(big_n)?;
    let diag_bound = comparison_bound(n, k, sc.b)?.total;

    let rows = map_replicates(config, config.replicates, |r| {
        let seed = derive_seed(config.master_seed, config.experiment_id.ordinal(), r as u64);
        let w = GaussianMatrix::sample(n, seed)?;
        let (_, m) = global_optimum_exhaustive(&w, k, &budget)?;
        let scaled = sc.a * (k as f64 * m - sc.b);
        Ok(vec![r as f64, m, scaled, diag_bound])
    })?;

    let scaled: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    let dist = EmpiricalDistribution::new(scaled.clone())?;
    let ks = dist.ks_statistic(gumbel_cdf);
    let (m, se) = mean_stderr(&scaled);

    let mut checks = Vec::new();
    if k == 1 {
        checks.push(Check::new(
            "gumbel_ks",
            ks,
            CheckOp::LessEq,
            0.10,
            "Monte Carlo calibration against the brute-force i.i.d. maximum at equal N; \
             extreme-value convergence is logarithmically slow",
        ));
    }

    Ok(ExperimentReport {
        config: config.clone(),
        summary: vec![
            SummaryStat::new("gumbel_ks", ks),
            SummaryStat::with_stderr("scaled_mean", m, se),
            SummaryStat::new("comparison_bound_at_bN", diag_bound),
        ],
        checks,
        replicate_fields: vec![
            "replicate".into(),
            "max_average".into(),
            "scaled_value".into(),
            "comparison_bound_at_bN".into(),
        ],
        replicate_rows: rows,
        hist: histogram(&scaled, HIST_BINS),
        qq: dist.qq_points(gumbel_quantile)?,
    })
}

/// Centered global-optimum structure: pools the centered submatrix
/// entries across replicates and tests the (1,1) marginal against
/// N(0, 1 - 1/k^2), plus the (1,1)-(k,k) covariance against a Monte
/// Carlo oracle on the limit law.
pub fn run_e2(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let (n, k) = (config.n, config.k);
    let budget = config.budget();

    let rows = map_replicates(config, config.replicates, |r| {
        let seed = derive_seed(config.master_seed, config.experiment_id.ordinal(), r as u64);
        let w = GaussianMatrix::sample(n, seed)?;
        let (idx, avg) = global_optimum_exhaustive(&w, k, &budget)?;
        let sub = extract_submatrix(&w, &idx)?;
        let mut row = vec![r as f64];
        for i in 0..k {
            for j in 0..k {
                row.push(sub[i][j] - avg);
            }
        }
        Ok(row)
    })?;

    let e11: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let mut summary = Vec::new();
    let mut checks = Vec::new();
    let mut hist = histogram(&e11, HIST_BINS);
    let mut qq = Vec::new();

    if k == 1 {
        // Centered 1x1 submatrix is identically zero.
        let max_abs = e11.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        checks.push(Check::new(
            "degenerate_all_zero",
            max_abs,
            CheckOp::LessEq,
            1e-12,
            "centering a 1x1 matrix by its own average yields exactly zero",
        ));
        summary.push(SummaryStat::new("pooled_entry_max_abs", max_abs));
        hist = vec![(0.0, e11.len() as f64)];
    } else {
        let sigma = (1.0 - 1.0 / (k * k) as f64).sqrt();
        let dist = EmpiricalDistribution::new(e11.clone())?;
        let ks = dist.ks_statistic(|x| normal_cdf(x / sigma));
        checks.push(Check::new(
            "pooled_entry_ks",
            ks,
            CheckOp::LessEq,
            0.05,
            "marginal of the centered k x k Gaussian limit is N(0, 1 - 1/k^2) by direct expansion",
        ));
        summary.push(SummaryStat::new("pooled_entry_ks", ks));

        // Covariance between centered entries (1,1) and (k,k), against a
        // 1e6-draw i.i.d. centered-Gaussian oracle on the limit law.
        let e_kk: Vec<f64> = rows.iter().map(|r| r[k * k]).collect();
        let (cov, cov_se) = sample_covariance(&e11, &e_kk);
        let oracle_seed = derive_seed(config.master_seed, config.experiment_id.ordinal(), u64::MAX);
        let (oracle, oracle_se) = centered_entry_cov_oracle(k, 1_000_000, oracle_seed);
        let combined = (cov_se * cov_se + oracle_se * oracle_se).sqrt();
        checks.push(Check::new(
            "cov_11_kk_within_4_stderr",
            (cov - oracle).abs(),
            CheckOp::LessEq,
            4.0 * combined,
            "Monte Carlo oracle on the centered i.i.d. Gaussian limit matrix",
        ));
        summary.push(SummaryStat::with_stderr("cov_11_kk", cov, cov_se));
        summary.push(SummaryStat::with_stderr("cov_11_kk_oracle", oracle, oracle_se));
        qq = dist.qq_points(|p| sigma * normal_quantile(p))?;
    }

    let mut fields = vec!["replicate".to_string()];
    for i in 1..=k {
        for j in 1..=k {
            fields.push(format!("centered_{i}_{j}"));
        }
    }
    Ok(ExperimentReport {
        config: config.clone(),
        summary,
        checks,
        replicate_fields: fields,
        replicate_rows: rows,
        hist,
        qq,
    })
}

/// cov(x, y) with the standard error of the mean of the centered
/// products.
fn sample_covariance(x: &[f64], y: &[f64]) -> (f64, f64) {
    let mx = mean(x);
    let my = mean(y);
    let prods: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).collect();
    mean_stderr(&prods)
}

/// Monte Carlo covariance of entries (1,1) and (k,k) of W - avg(W) 11'
/// for a k x k i.i.d. standard Gaussian W.
fn centered_entry_cov_oracle(k: usize, draws: usize, seed: u64) -> (f64, f64) {
    let mut stream = Stream::new(seed);
    let k2 = (k * k) as f64;
    let mut prods = Vec::with_capacity(draws);
    for _ in 0..draws {
        let entries: Vec<f64> = (0..k * k).map(|_| stream.normal()).collect();
        let avg = entries.iter().sum::<f64>() / k2;
        prods.push((entries[0] - avg) * (entries[k * k - 1] - avg));
    }
    mean_stderr(&prods)
}

/// Two-point localization of the largest threshold-reaching submatrix
/// size: K_n(tau) should land in {k* - 1, k*}.
pub fn run_e3(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let n = config.n;
    let tau = config
        .tau
        .ok_or_else(|| Error::InvalidArgument("E3 requires --tau".into()))?;
    let solution = solve_k_tilde(n, tau)?;
    let k_star = solution.k_star;
    let horizon = (k_star + 2).min(n);
    // The per-replicate oracle scans (n choose k)^2 up to the horizon;
    // the default budget is raised here because the localization design
    // sizes (n = 20, horizon 5) sit just above the generic default.
    let mut budget = config.budget();
    if config.exhaustive_budget.is_none() {
        budget.exhaustive_sq = 1e9;
    }

    let rows = map_replicates(config, config.replicates, |r| {
        let seed = derive_seed(config.master_seed, config.experiment_id.ordinal(), r as u64);
        let w = GaussianMatrix::sample(n, seed)?;
        let loc = largest_threshold_submatrix_size(&w, tau, horizon, &budget)?;
        let mut row = vec![r as f64, loc.k_observed as f64];
        row.extend(loc.per_k_max_average.iter().map(|&(_, m)| m));
        Ok(row)
    })?;

    let k_values: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let hits = k_values
        .iter()
        .filter(|&&k| k as usize + 1 == k_star || k as usize == k_star)
        .count();
    let frequency = hits as f64 / k_values.len() as f64;

    let mut k_counts = vec![0.0; horizon + 1];
    for &k in &k_values {
        k_counts[k as usize] += 1.0;
    }
    let hist: Vec<(f64, f64)> = k_counts.into_iter().enumerate().map(|(k, c)| (k as f64, c)).collect();

    let mut fields = vec!["replicate".to_string(), "k_observed".to_string()];
    fields.extend((1..=horizon).map(|k| format!("max_average_k{k}")));

    Ok(ExperimentReport {
        config: config.clone(),
        summary: vec![
            SummaryStat::new("k_tilde", solution.k_tilde),
            SummaryStat::new("k_star", k_star as f64),
            SummaryStat::new("frequency_in_two_point_set", frequency),
        ],
        checks: vec![Check::new(
            "two_point_frequency",
            frequency,
            CheckOp::GreaterEq,
            0.80,
            "soft desk-scale threshold; the localization statement is asymptotic",
        )],
        replicate_fields: fields,
        replicate_rows: rows,
        hist,
        qq: standardized_normal_qq(&k_values),
    })
}

/// Structure of local optima: pooled conditional scores
/// x = a_n(sqrt(k) avg - b_n) against the -log G limit, scaled ANOVA
/// effects, and concentration of the average around sqrt(2 log n / k).
pub fn run_e4(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let (n, k) = (config.n, config.k);
    let budget = config.budget();
    let sc = scaling_constants(n as f64)?;
    let sqrt_k = (k as f64).sqrt();
    let target = (2.0 * (n as f64).ln() / k as f64).sqrt();

    let per_replicate = map_replicates(config, config.replicates, |r| {
        let seed = derive_seed(config.master_seed, config.experiment_id.ordinal(), r as u64);
        let w = GaussianMatrix::sample(n, seed)?;
        let census = enumerate_local_optima(&w, k, &budget)?;
        let mut rows = Vec::with_capacity(census.count());
        for (idx, avg) in &census.optima {
            let x = sc.a * (sqrt_k * avg - sc.b);
            let anova = anova_decompose(&extract_submatrix(&w, idx)?)?;
            let mut row = vec![r as f64, *avg, x];
            row.extend(anova.row_effects.iter().map(|e| sqrt_k * sc.a * e));
            row.extend(anova.col_effects.iter().map(|e| sqrt_k * sc.a * e));
            rows.push(row);
        }
        Ok(rows)
    })?;

    let counts: Vec<f64> = per_replicate.iter().map(|rows| rows.len() as f64).collect();
    let rows: Vec<Vec<f64>> = per_replicate.into_iter().flatten().collect();
    if rows.is_empty() {
        return Err(Error::EmptySample);
    }
    let x_sample: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    let avg_ratio: Vec<f64> = rows.iter().map(|r| r[1] / target).collect();

    let mut summary = Vec::new();
    let mut checks = Vec::new();

    // (i) conditional score against the -log G limit.
    let x_dist = EmpiricalDistribution::new(x_sample.clone())?;
    let qq;
    if k == 1 {
        // G ~ Exp(2) exactly: P(-log G <= x) = exp(-2 e^{-x}).
        let ks = x_dist.ks_statistic(|x| (-2.0 * (-x).exp()).exp());
        checks.push(Check::new(
            "score_ks_vs_neg_log_exp2",
            ks,
            CheckOp::LessEq,
            0.05,
            "closed-form limit marginal at k = 1",
        ));
        summary.push(SummaryStat::new("score_ks", ks));
        qq = x_dist.qq_points(|p| -(-p.ln() / 2.0).ln())?;
    } else {
        let gtt_seed = derive_seed(config.master_seed, config.experiment_id.ordinal(), u64::MAX);
        let gtt = sample_gtt(k, 100_000, gtt_seed)?;
        let neg_log_g: Vec<f64> = gtt.points.iter().map(|p| -p[0].ln()).collect();
        let reference = EmpiricalDistribution::new_weighted(neg_log_g, gtt.weights.clone())?;
        let ks = two_sample_ks(&x_dist, &reference);
        summary.push(SummaryStat::new("score_ks_vs_weighted_neg_log_g", ks));

        // (ii) normalized first row effect against (2U - 1) log(1 + T/G).
        let row_eff: Vec<f64> = rows.iter().map(|r| r[3]).collect();
        let mut u_stream = Stream::new(derive_seed(
            config.master_seed,
            config.experiment_id.ordinal(),
            u64::MAX - 1,
        ));
        let ref_vals: Vec<f64> = gtt
            .points
            .iter()
            .map(|p| (2.0 * u_stream.uniform() - 1.0) * (1.0 + p[1] / p[0]).ln())
            .collect();
        let eff_ref = EmpiricalDistribution::new_weighted(ref_vals, gtt.weights.clone())?;
        let eff_dist = EmpiricalDistribution::new(row_eff)?;
        summary.push(SummaryStat::new(
            "row_effect_ks_vs_limit",
            two_sample_ks(&eff_dist, &eff_ref),
        ));
        qq = standardized_normal_qq(&x_sample);
    }

    // (iii) concentration of the average around sqrt(2 log n / k).
    let (ratio_mean, _) = mean_stderr(&avg_ratio);
    checks.push(Check::new(
        "avg_concentration_ratio_dev",
        (ratio_mean - 1.0).abs(),
        CheckOp::LessEq,
        0.15,
        "slow-convergence band calibrated from the b_n / (sqrt(k) sqrt(2 log n / k)) ratio at desk sizes",
    ));
    summary.push(SummaryStat::new("avg_over_sqrt_2logn_k", ratio_mean));

    // Census mean against the exact k = 1 local-optimality probability.
    let (count_mean, count_se) = mean_stderr(&counts);
    summary.push(SummaryStat::with_stderr("census_count_mean", count_mean, count_se));
    if k == 1 {
        let exact = (n * n) as f64 / (2 * n - 1) as f64;
        checks.push(Check::new(
            "census_mean_vs_exact",
            (count_mean - exact).abs(),
            CheckOp::LessEq,
            4.0 * count_se,
            "each entry is locally optimal with probability 1/(2n-1) exactly",
        ));
    }

    let mut fields = vec!["replicate".to_string(), "average".to_string(), "score".to_string()];
    fields.extend((1..=k).map(|i| format!("scaled_row_effect_{i}")));
    fields.extend((1..=k).map(|j| format!("scaled_col_effect_{j}")));

    Ok(ExperimentReport {
        config: config.clone(),
        summary,
        checks,
        replicate_fields: fields,
        replicate_rows: rows,
        hist: histogram(&x_sample, HIST_BINS),
        qq,
    })
}

/// Mean/variance scaling of the local-optima count: exact k = 1
/// formulas, and for k >= 2 the ratio to theta_k (n choose k) /
/// (log n)^{(k-1)/2} over an n-grid.
pub fn run_e5(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let (n, k) = (config.n, config.k);
    let budget = config.budget();
    let ordinal = config.experiment_id.ordinal();
    let grid: Vec<usize> = if k == 1 {
        vec![n]
    } else {
        let mut g = vec![n.div_ceil(4), n.div_ceil(2), n];
        g.dedup();
        g
    };

    let reps = config.replicates;
    let rows = map_replicates(config, grid.len() * reps, |task| {
        let (gi, r) = (task / reps, task % reps);
        let ni = grid[gi];
        let seed = derive_seed(config.master_seed, ordinal, task as u64);
        let w = GaussianMatrix::sample(ni, seed)?;
        let census = enumerate_local_optima(&w, k, &budget)?;
        Ok(vec![r as f64, ni as f64, census.count() as f64])
    })?;

    let mut summary = Vec::new();
    let mut checks = Vec::new();

    if k == 1 {
        let l: Vec<f64> = rows.iter().map(|r| r[2]).collect();
        let (m, se) = mean_stderr(&l);
        let var = l.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (l.len() as f64 - 1.0);
        let nf = n as f64;
        let exact_mean = nf * nf / (2.0 * nf - 1.0);
        let exact_var = nf * nf * (nf - 3.0) / (2.0 * (2.0 * nf - 1.0).powi(2));
        // The quoted closed form n^2(n-3)/(2(2n-1)^2) drops a factor in
        // the v(0,0) term: n^2 p(1-p) = n^2(2n-2)/(2n-1)^2, under which
        // the diagonal and same-row/column terms cancel exactly and the
        // variance is n^2(n-1)/(2(2n-1)^2). Monte Carlo at n = 10 and
        // n = 20 confirms the corrected value; the check is kept against
        // the quoted form and the corrected one reported alongside.
        let corrected_var = nf * nf * (nf - 1.0) / (2.0 * (2.0 * nf - 1.0).powi(2));
        summary.push(SummaryStat::with_stderr("mean_count", m, se));
        summary.push(SummaryStat::new("var_count", var));
        summary.push(SummaryStat::new("exact_mean", exact_mean));
        summary.push(SummaryStat::new("exact_var", exact_var));
        summary.push(SummaryStat::new("corrected_exact_var", corrected_var));
        checks.push(Check::new(
            "mean_within_4_stderr_of_exact",
            (m - exact_mean).abs(),
            CheckOp::LessEq,
            4.0 * se,
            "exact finite-n mean n^2/(2n-1)",
        ));
        checks.push(Check::new(
            "var_within_5pct_of_exact",
            (var / exact_var - 1.0).abs(),
            CheckOp::LessEq,
            0.05,
            "exact finite-n variance n^2(n-3)/(2(2n-1)^2)",
        ));
    } else {
        let theta_seed = derive_seed(config.master_seed, ordinal, u64::MAX);
        let (theta, theta_se) = theta_k_estimate(k, 1_000_000, theta_seed)?;
        summary.push(SummaryStat::with_stderr("theta_k_estimate", theta, theta_se));
        let mut ratios = Vec::with_capacity(grid.len());
        for (gi, &ni) in grid.iter().enumerate() {
            let l: Vec<f64> = rows
                .iter()
                .skip(gi * reps)
                .take(reps)
                .map(|r| r[2])
                .collect();
            let (m, se) = mean_stderr(&l);
            let predicted = theta * binomial(ni, k) / (ni as f64).ln().powf((k as f64 - 1.0) / 2.0);
            let ratio = m / predicted;
            summary.push(SummaryStat::with_stderr(
                &format!("mean_ratio_n{ni}"),
                ratio,
                se / predicted,
            ));
            ratios.push(ratio);
        }
        if grid.len() >= 2 {
            let first = (ratios[0] - 1.0).abs();
            let last = (ratios[ratios.len() - 1] - 1.0).abs();
            checks.push(Check::new(
                "ratio_trend_toward_one",
                last,
                CheckOp::LessEq,
                first + 0.05,
                "Monte Carlo trend check; the scaling statement is asymptotic",
            ));
        }
    }

    let l_largest: Vec<f64> = rows
        .iter()
        .filter(|r| r[1] as usize == *grid.last().expect("non-empty grid"))
        .map(|r| r[2])
        .collect();
    Ok(ExperimentReport {
        config: config.clone(),
        summary,
        checks,
        replicate_fields: vec!["replicate".into(), "n".into(), "count".into()],
        replicate_rows: rows,
        hist: histogram(&l_largest, HIST_BINS),
        qq: standardized_normal_qq(&l_largest),
    })
}

/// CLT for the local-optima count: standardized L against N(0,1) via
/// KS, Wasserstein-1 and the QQ slope, with plot data emitted.
pub fn run_e6(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let (n, k) = (config.n, config.k);
    let budget = config.budget();

    let rows = map_replicates(config, config.replicates, |r| {
        let seed = derive_seed(config.master_seed, config.experiment_id.ordinal(), r as u64);
        let w = GaussianMatrix::sample(n, seed)?;
        let census = enumerate_local_optima(&w, k, &budget)?;
        Ok(vec![r as f64, census.count() as f64])
    })?;

    let l: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let (m, _) = mean_stderr(&l);
    let sd = (l.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (l.len() as f64 - 1.0)).sqrt();
    let std: Vec<f64> = l.iter().map(|x| (x - m) / sd).collect();
    let dist = EmpiricalDistribution::new(std.clone())?;

    let ks = dist.ks_statistic(normal_cdf);
    let w1 = dist.wasserstein_to_standard_normal()?;
    let qq = dist.qq_points(normal_quantile)?;
    let slope = crate::stats::least_squares_slope(&qq);
    let std_summary = dist.summarize();
    let std_dev = std_summary
        .mean
        .abs()
        .max((std_summary.variance.expect("replicates >= 2") - 1.0).abs());

    Ok(ExperimentReport {
        config: config.clone(),
        summary: vec![
            SummaryStat::new("mean_count", m),
            SummaryStat::new("sd_count", sd),
            SummaryStat::new("standardized_ks", ks),
            SummaryStat::new("wasserstein_to_normal", w1),
            SummaryStat::new("qq_slope", slope),
        ],
        checks: vec![
            Check::new(
                "standardized_ks",
                ks,
                CheckOp::LessEq,
                0.05,
                "Monte Carlo calibration; convergence to the Gaussian limit is fast here",
            ),
            Check::new(
                "qq_slope_dev",
                (slope - 1.0).abs(),
                CheckOp::LessEq,
                0.05,
                "least-squares QQ slope band around 1",
            ),
            Check::new(
                "standardization_sanity",
                std_dev,
                CheckOp::LessEq,
                1e-9,
                "mean 0 / variance 1 by construction",
            ),
        ],
        replicate_fields: vec!["replicate".into(), "count".into()],
        replicate_rows: rows,
        hist: histogram(&std, HIST_BINS),
        qq,
    })
}

/// Local-versus-global comparison: almost all local optima clear
/// b_n/sqrt(k) - c_n, and a typical local optimum's average sits near
/// 1/sqrt(2) of the global maximum.
pub fn run_e7(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let (n, k) = (config.n, config.k);
    if n < 3 {
        return Err(Error::Domain("n must be at least 3 (log log n)".into()));
    }
    let budget = config.budget();
    let sc = scaling_constants(n as f64)?;
    let c_n = (n as f64).ln().ln() / sc.a;
    let threshold = sc.b / (k as f64).sqrt() - c_n;
    const RESTARTS: usize = 10;
    const MAX_ROUNDS: usize = 1000;

    let rows = map_replicates(config, config.replicates, |r| {
        let seed = derive_seed(config.master_seed, config.experiment_id.ordinal(), r as u64);
        let w = GaussianMatrix::sample(n, seed)?;
        let census = enumerate_local_optima(&w, k, &budget)?;
        let l = census.count() as f64;
        let l_above = count_local_optima_above(&census, threshold) as f64;
        let (_, m) = global_optimum_exhaustive(&w, k, &budget)?;

        let mut restart_stream = Stream::new(seed ^ 0x9e3779b97f4a7c15);
        let mut avg_sum = 0.0;
        let mut round_sum = 0.0;
        let mut truncated = 0.0;
        for _ in 0..RESTARTS {
            let cols = random_column_set(&mut restart_stream, n, k);
            let las = las_search(&w, k, &cols, MAX_ROUNDS)?;
            avg_sum += las.final_average;
            round_sum += las.iterations as f64;
            if las.truncated {
                truncated += 1.0;
            }
        }
        let rf = RESTARTS as f64;
        Ok(vec![
            r as f64,
            l,
            l_above,
            m,
            avg_sum / rf,
            round_sum / rf,
            truncated / rf,
        ])
    })?;

    let above_frac: Vec<f64> = rows.iter().map(|r| r[2] / r[1].max(1.0)).collect();
    let ratio: Vec<f64> = rows.iter().map(|r| r[4] / r[3]).collect();
    let rounds: Vec<f64> = rows.iter().map(|r| r[5]).collect();
    let (frac_mean, frac_se) = mean_stderr(&above_frac);
    let (ratio_mean, ratio_se) = mean_stderr(&ratio);
    let max_rounds = rounds.iter().cloned().fold(0.0f64, f64::max);

    Ok(ExperimentReport {
        config: config.clone(),
        summary: vec![
            SummaryStat::with_stderr("near_max_fraction", frac_mean, frac_se),
            SummaryStat::with_stderr("local_to_global_ratio", ratio_mean, ratio_se),
            SummaryStat::new("mean_las_rounds", mean(&rounds)),
            SummaryStat::new("max_mean_las_rounds", max_rounds),
            SummaryStat::new("threshold", threshold),
        ],
        checks: vec![
            Check::new(
                "ratio_lower",
                ratio_mean,
                CheckOp::GreaterEq,
                0.60,
                "band bracketing the 1/sqrt(2) asymptotic prediction at desk scale",
            ),
            Check::new(
                "ratio_upper",
                ratio_mean,
                CheckOp::LessEq,
                0.80,
                "band bracketing the 1/sqrt(2) asymptotic prediction at desk scale",
            ),
            Check::new(
                "near_max_fraction",
                frac_mean,
                CheckOp::GreaterEq,
                0.9,
                "almost every local optimum clears b_n/sqrt(k) - c_n, c_n = (log log n)/a_n",
            ),
        ],
        replicate_fields: vec![
            "replicate".into(),
            "count".into(),
            "count_above_threshold".into(),
            "global_max".into(),
            "mean_las_average".into(),
            "mean_las_rounds".into(),
            "las_truncated_fraction".into(),
        ],
        replicate_rows: rows,
        hist: histogram(&ratio, HIST_BINS),
        qq: standardized_normal_qq(&ratio),
    })
}

/// k distinct 1-based column indices, uniform without replacement.
fn random_column_set(stream: &mut Stream, n: usize, k: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (1..=n).collect();
    for i in 0..k {
        let j = i + (stream.next_u64() as usize) % (n - i);
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{run_experiment, ExperimentId};

    fn config(id: ExperimentId, n: usize, k: usize, replicates: usize) -> ExperimentConfig {
        ExperimentConfig {
            experiment_id: id,
            n,
            k,
            tau: None,
            replicates,
            master_seed: 42,
            census_budget: None,
            exhaustive_budget: None,
            threads: None,
        }
    }

    #[test]
    fn e1_smoke_and_determinism() {
        let cfg = config(ExperimentId::E1, 12, 2, 20);
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.replicate_rows, b.replicate_rows);
        assert_eq!(a.replicate_rows.len(), 20);
        // Diagnostic run at k = 2: Gumbel KS recorded, no hard threshold.
        assert!(a.summary.iter().any(|s| s.name == "gumbel_ks"));
        assert!(a.checks.is_empty());
    }

    #[test]
    fn e2_k1_degenerate() {
        let report = run_experiment(&config(ExperimentId::E2, 8, 1, 30)).unwrap();
        assert!(report.all_pass());
        assert!(report.replicate_rows.iter().all(|r| r[1] == 0.0));
    }

    #[test]
    fn e3_requires_tau() {
        let err = run_experiment(&config(ExperimentId::E3, 10, 1, 5)).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn e3_all_ones_fixture_reaches_full_size() {
        // Harness plumbing: on the all-ones matrix every average is 1,
        // so K(tau = 1) equals the horizon cap.
        let n = 6;
        let w = GaussianMatrix::from_values(n, vec![1.0; n * n], 0).unwrap();
        let loc = largest_threshold_submatrix_size(&w, 1.0, n, &crate::search::Budget::default()).unwrap();
        assert_eq!(loc.k_observed, n);
    }

    #[test]
    fn e4_k1_census_mean_matches_exact_probability() {
        let cfg = config(ExperimentId::E4, 40, 1, 200);
        let report = run_experiment(&cfg).unwrap();
        let check = report
            .checks
            .iter()
            .find(|c| c.name == "census_mean_vs_exact")
            .unwrap();
        assert!(check.pass, "measured {} vs {}", check.measured, check.threshold);
    }

    #[test]
    fn e5_k1_exact_formulas_at_small_scale() {
        let cfg = config(ExperimentId::E5, 20, 1, 20_000);
        let report = run_experiment(&cfg).unwrap();
        let mean_check = report.checks.iter().find(|c| c.name == "mean_within_4_stderr_of_exact").unwrap();
        assert!(mean_check.pass, "{mean_check:?}");
        // The quoted variance formula is off (see run_e5); the empirical
        // variance instead matches the corrected closed form.
        let var = report.summary.iter().find(|s| s.name == "var_count").unwrap().value;
        let corrected = report.summary.iter().find(|s| s.name == "corrected_exact_var").unwrap().value;
        assert!((var / corrected - 1.0).abs() < 0.05, "var {var} vs corrected {corrected}");
    }

    #[test]
    fn e6_smoke_standardization() {
        let report = run_experiment(&config(ExperimentId::E6, 30, 1, 200)).unwrap();
        let sanity = report.checks.iter().find(|c| c.name == "standardization_sanity").unwrap();
        assert!(sanity.pass);
        assert_eq!(report.qq.len(), 200);
        assert!(!report.hist.is_empty());
    }

    #[test]
    fn e7_las_terminates_from_every_start_on_fixture() {
        let n = 5;
        let mut stream = Stream::new(7);
        let values: Vec<f64> = (0..n * n).map(|_| stream.normal()).collect();
        let w = GaussianMatrix::from_values(n, values, 0).unwrap();
        for k in 1..=n {
            let mut combos = crate::search::Combinations::new(n, k);
            while let Some(cols) = combos.next() {
                let cols1: Vec<usize> = cols.iter().map(|&c| c + 1).collect();
                let las = las_search(&w, k, &cols1, 25).unwrap();
                assert!(!las.truncated);
                assert!(las.iterations <= 25);
            }
        }
    }

    #[test]
    fn parallel_and_serial_reports_agree() {
        let mut cfg = config(ExperimentId::E1, 10, 1, 16);
        let serial = {
            cfg.threads = Some(1);
            run_experiment(&cfg).unwrap()
        };
        let parallel = {
            cfg.threads = Some(4);
            run_experiment(&cfg).unwrap()
        };
        assert_eq!(serial.replicate_rows, parallel.replicate_rows);
        for (a, b) in serial.summary.iter().zip(&parallel.summary) {
            assert_eq!(a.value, b.value);
        }
    }

    #[test]
    fn outputs_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let report = run_experiment(&config(ExperimentId::E6, 20, 1, 50)).unwrap();
        crate::experiments::write_outputs(&report, dir.path()).unwrap();

        let csv = std::fs::read_to_string(dir.path().join("replicates.csv")).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "replicate,count");
        let counts: Vec<f64> = lines
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        assert_eq!(counts.len(), 50);
        // Summary statistics recompute exactly from the CSV.
        let mean_count = counts.iter().sum::<f64>() / counts.len() as f64;
        let reported = report.summary.iter().find(|s| s.name == "mean_count").unwrap().value;
        assert!((mean_count - reported).abs() < 1e-12);

        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
                .unwrap();
        assert_eq!(json["config"]["n"], 20);
        assert!(json["checks"].as_array().unwrap().len() >= 3);
        assert!(dir.path().join("hist.dat").exists());
        assert!(dir.path().join("qq.dat").exists());
    }
}
