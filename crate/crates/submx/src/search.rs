//! LAS iterative search, local/global optimality predicates and
//! exhaustive desk-scale oracles.

use crate::error::{Error, Result};
use crate::matrix::{top_k_zero_based, GaussianMatrix, SubmatrixIndex};

/// Enumeration budgets for the exhaustive oracles. `census` bounds
/// (n choose k) in the row-set scan, `exhaustive_sq` bounds
/// (n choose k)^2 in the global-optimum oracle.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    pub census: f64,
    pub exhaustive_sq: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { census: 1e7, exhaustive_sq: 1e8 }
    }
}

/// (n choose k) as a float; exact for the desk-scale sizes used here.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Outcome of one LAS run.
#[derive(Debug, Clone)]
pub struct LasResult {
    pub final_index: SubmatrixIndex,
    pub final_average: f64,
    /// Full row+column update rounds that changed the state.
    pub iterations: usize,
    /// True if `max_rounds` was exhausted before an exact repeat.
    pub truncated: bool,
    /// Average after each half-step; never decreasing.
    pub trajectory_averages: Vec<f64>,
}

/// All locally optimal k x k submatrices of a matrix.
#[derive(Debug, Clone)]
pub struct LocalOptimaCensus {
    pub k: usize,
    pub optima: Vec<(SubmatrixIndex, f64)>,
}

impl LocalOptimaCensus {
    pub fn count(&self) -> usize {
        self.optima.len()
    }
}

/// Per-k maxima and the largest k reaching a threshold.
#[derive(Debug, Clone)]
pub struct LocalizationResult {
    pub tau: f64,
    /// Largest k in the horizon with max average >= tau, or 0.
    pub k_observed: usize,
    pub per_k_max_average: Vec<(usize, f64)>,
}

/// Row/column dominance of the indexed submatrix, with ties counting as
/// dominant.
pub fn local_optimality_status(
    matrix: &GaussianMatrix,
    index: &SubmatrixIndex,
) -> Result<(bool, bool)> {
    let (row_sums, col_sums) = crate::matrix::cross_sums(matrix, index)?;
    Ok((
        dominant(&row_sums, index.rows()),
        dominant(&col_sums, index.cols()),
    ))
}

/// min over selected >= max over unselected; `selected` is 1-based sorted.
fn dominant(sums: &[f64], selected: &[usize]) -> bool {
    let mut min_in = f64::INFINITY;
    let mut max_out = f64::NEG_INFINITY;
    let mut sel = selected.iter().peekable();
    for (i0, &s) in sums.iter().enumerate() {
        if sel.peek().is_some_and(|&&v| v == i0 + 1) {
            sel.next();
            min_in = min_in.min(s);
        } else {
            max_out = max_out.max(s);
        }
    }
    min_in >= max_out
}

/// Alternating LAS updates from an initial column set until the (I, J)
/// pair repeats exactly or `max_rounds` is hit.
pub fn las_search(
    matrix: &GaussianMatrix,
    k: usize,
    initial_cols: &[usize],
    max_rounds: usize,
) -> Result<LasResult> {
    let n = matrix.n();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} outside [1, {n}]")));
    }
    if max_rounds == 0 {
        return Err(Error::InvalidArgument("max_rounds must be positive".into()));
    }
    let mut cols: Vec<usize> = initial_cols.iter().map(|&c| c.wrapping_sub(1)).collect();
    cols.sort_unstable();
    if cols.len() != k || cols.last().is_some_and(|&c| c >= n) || cols.windows(2).any(|w| w[0] == w[1])
    {
        return Err(Error::InvalidArgument(format!(
            "initial columns must be {k} distinct indices in [1, {n}]"
        )));
    }

    let kf2 = (k * k) as f64;
    let mut rows: Vec<usize> = Vec::new();
    let mut trajectory = Vec::new();
    let mut iterations = 0usize;
    let mut truncated = true;

    let mut row_sums = vec![0.0; n];
    let mut col_sums = vec![0.0; n];
    for _ in 0..max_rounds {
        // I-update: top-k rows by sum over current columns.
        for i0 in 0..n {
            row_sums[i0] = cols.iter().map(|&j0| matrix.at(i0, j0)).sum();
        }
        let new_rows = top_k_zero_based(&row_sums, k);
        let avg_rows: f64 = new_rows.iter().map(|&i0| row_sums[i0]).sum::<f64>() / kf2;
        trajectory.push(avg_rows);

        // J-update: top-k columns by sum over the new rows.
        for j0 in 0..n {
            col_sums[j0] = new_rows.iter().map(|&i0| matrix.at(i0, j0)).sum();
        }
        let new_cols = top_k_zero_based(&col_sums, k);
        let avg_cols: f64 = new_cols.iter().map(|&j0| col_sums[j0]).sum::<f64>() / kf2;
        trajectory.push(avg_cols);

        if new_rows == rows && new_cols == cols {
            truncated = false;
            break;
        }
        rows = new_rows;
        cols = new_cols;
        iterations += 1;
    }

    let final_index = SubmatrixIndex::new(
        rows.iter().map(|&i| i + 1).collect(),
        cols.iter().map(|&j| j + 1).collect(),
    )?;
    let final_average = *trajectory.last().expect("at least one round ran");
    Ok(LasResult { final_index, final_average, iterations, truncated, trajectory_averages: trajectory })
}

/// Lexicographic k-subsets of 0..n, visited in place.
pub(crate) struct Combinations {
    n: usize,
    idx: Vec<usize>,
    started: bool,
    done: bool,
}

impl Combinations {
    pub(crate) fn new(n: usize, k: usize) -> Self {
        Combinations { n, idx: (0..k).collect(), started: false, done: k > n || k == 0 }
    }

    pub(crate) fn next(&mut self) -> Option<&[usize]> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.idx);
        }
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                return None;
            }
            i -= 1;
            if self.idx[i] < self.n - (k - i) {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                return Some(&self.idx);
            }
        }
    }
}

/// Exhaustive census of locally optimal k x k submatrices via the
/// row-set scan: column dominance forces J to be the top-k column set,
/// so scanning the (n choose k) row sets suffices.
pub fn enumerate_local_optima(
    matrix: &GaussianMatrix,
    k: usize,
    budget: &Budget,
) -> Result<LocalOptimaCensus> {
    let n = matrix.n();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} outside [1, {n}]")));
    }
    let size = binomial(n, k);
    if size > budget.census {
        return Err(Error::BudgetExceeded {
            what: format!("({n} choose {k})"),
            size,
            budget: budget.census,
        });
    }

    let kf2 = (k * k) as f64;
    let mut optima = Vec::new();
    let mut col_sums = vec![0.0; n];
    let mut row_sums = vec![0.0; n];
    let mut combos = Combinations::new(n, k);
    while let Some(rows) = combos.next() {
        for j0 in 0..n {
            col_sums[j0] = rows.iter().map(|&i0| matrix.at(i0, j0)).sum();
        }
        let cols = top_k_zero_based(&col_sums, k);
        for i0 in 0..n {
            row_sums[i0] = cols.iter().map(|&j0| matrix.at(i0, j0)).sum();
        }
        let best_rows = top_k_zero_based(&row_sums, k);
        if best_rows != rows {
            continue;
        }
        debug_assert!(dominant(&row_sums, &rows.iter().map(|&i| i + 1).collect::<Vec<_>>()));
        debug_assert!(dominant(&col_sums, &cols.iter().map(|&j| j + 1).collect::<Vec<_>>()));
        let avg = cols.iter().map(|&j0| col_sums[j0]).sum::<f64>() / kf2;
        let index = SubmatrixIndex::new(
            rows.iter().map(|&i| i + 1).collect(),
            cols.iter().map(|&j| j + 1).collect(),
        )?;
        optima.push((index, avg));
    }
    Ok(LocalOptimaCensus { k, optima })
}

/// Exact argmax/max of the submatrix average over all of S_n(k). For each
/// row set the optimal column set is the top-k by column sums, so the
/// scan is (n choose k) row sets; ties resolve lexicographically on
/// (rows, cols).
pub fn global_optimum_exhaustive(
    matrix: &GaussianMatrix,
    k: usize,
    budget: &Budget,
) -> Result<(SubmatrixIndex, f64)> {
    let n = matrix.n();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} outside [1, {n}]")));
    }
    let size = binomial(n, k);
    if size * size > budget.exhaustive_sq {
        return Err(Error::BudgetExceeded {
            what: format!("({n} choose {k})^2"),
            size: size * size,
            budget: budget.exhaustive_sq,
        });
    }

    let kf2 = (k * k) as f64;
    let mut best: Option<(Vec<usize>, Vec<usize>, f64)> = None;
    let mut col_sums = vec![0.0; n];
    let mut combos = Combinations::new(n, k);
    while let Some(rows) = combos.next() {
        for j0 in 0..n {
            col_sums[j0] = rows.iter().map(|&i0| matrix.at(i0, j0)).sum();
        }
        let cols = top_k_zero_based(&col_sums, k);
        let avg = cols.iter().map(|&j0| col_sums[j0]).sum::<f64>() / kf2;
        let better = match &best {
            None => true,
            // Rows are visited in lexicographic order and top-k breaks
            // column ties toward smaller indices, so strict improvement
            // keeps the lexicographically first argmax.
            Some((_, _, b)) => avg > *b,
        };
        if better {
            best = Some((rows.to_vec(), cols, avg));
        }
    }
    let (rows, cols, avg) = best.expect("k in [1, n] guarantees at least one candidate");
    let index = SubmatrixIndex::new(
        rows.into_iter().map(|i| i + 1).collect(),
        cols.into_iter().map(|j| j + 1).collect(),
    )?;
    Ok((index, avg))
}

/// M_n(k) for k = 1..k_horizon and the largest k with M_n(k) >= tau.
/// The set { k : M_n(k) >= tau } is always an interval starting at 1
/// (dropping the worst row and worst column of a witness cannot lower
/// its average); this is asserted, not assumed.
pub fn largest_threshold_submatrix_size(
    matrix: &GaussianMatrix,
    tau: f64,
    k_horizon: usize,
    budget: &Budget,
) -> Result<LocalizationResult> {
    if tau <= 0.0 {
        return Err(Error::Domain("tau must be positive".into()));
    }
    if k_horizon == 0 || k_horizon > matrix.n() {
        return Err(Error::InvalidArgument(format!(
            "k_horizon = {k_horizon} outside [1, {}]",
            matrix.n()
        )));
    }
    let mut per_k = Vec::with_capacity(k_horizon);
    for k in 1..=k_horizon {
        let (_, max_avg) = global_optimum_exhaustive(matrix, k, budget)?;
        per_k.push((k, max_avg));
    }
    let k_observed = per_k.iter().rev().find(|&&(_, m)| m >= tau).map_or(0, |&(k, _)| k);
    for &(k, m) in &per_k {
        if (k <= k_observed) != (m >= tau) {
            return Err(Error::InvariantViolated(format!(
                "threshold set is not an interval: M({k}) = {m}, K = {k_observed}"
            )));
        }
    }
    Ok(LocalizationResult { tau, k_observed, per_k_max_average: per_k })
}

/// Census entries with average at least `c`.
pub fn count_local_optima_above(census: &LocalOptimaCensus, c: f64) -> usize {
    census.optima.iter().filter(|(_, avg)| *avg >= c).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::GaussianMatrix;

    fn fixture_3x3() -> GaussianMatrix {
        GaussianMatrix::from_values(3, vec![3., 1., 2., 0., 5., 1., 2., 0., 4.], 0).unwrap()
    }

    #[test]
    fn local_optimality_hand_checks() {
        let w = fixture_3x3();
        let idx = SubmatrixIndex::new(vec![2], vec![2]).unwrap();
        assert_eq!(local_optimality_status(&w, &idx).unwrap(), (true, true));
        let idx = SubmatrixIndex::new(vec![1], vec![2]).unwrap();
        let (row_dom, _) = local_optimality_status(&w, &idx).unwrap();
        assert!(!row_dom);
    }

    #[test]
    fn constant_matrix_ties_are_dominant() {
        let w = GaussianMatrix::from_values(3, vec![1.0; 9], 0).unwrap();
        let idx = SubmatrixIndex::new(vec![2], vec![3]).unwrap();
        assert_eq!(local_optimality_status(&w, &idx).unwrap(), (true, true));
    }

    #[test]
    fn las_hand_traces() {
        let w = GaussianMatrix::from_values(2, vec![3., 1., 0., 5.], 0).unwrap();
        let r = las_search(&w, 1, &[2], 1000).unwrap();
        assert_eq!(r.final_index.rows(), &[2]);
        assert_eq!(r.final_index.cols(), &[2]);
        assert_eq!(r.final_average, 5.0);
        assert_eq!(r.iterations, 1);
        assert!(!r.truncated);

        let r = las_search(&w, 1, &[1], 1000).unwrap();
        assert_eq!(r.final_index.rows(), &[1]);
        assert_eq!(r.final_index.cols(), &[1]);
        assert_eq!(r.final_average, 3.0);
    }

    #[test]
    fn las_fixed_points_are_locally_optimal() {
        for seed in 0..20 {
            let w = GaussianMatrix::sample(8, seed).unwrap();
            let r = las_search(&w, 2, &[3, 7], 1000).unwrap();
            assert!(!r.truncated);
            let (rd, cd) = local_optimality_status(&w, &r.final_index).unwrap();
            assert!(rd && cd, "seed {seed}");
            assert!(r
                .trajectory_averages
                .windows(2)
                .all(|p| p[1] >= p[0] - 1e-12), "trajectory must not decrease");
        }
    }

    #[test]
    fn census_3x3_k1() {
        let w = fixture_3x3();
        let census = enumerate_local_optima(&w, 1, &Budget::default()).unwrap();
        assert_eq!(census.count(), 3);
        let mut found: Vec<(usize, usize)> = census
            .optima
            .iter()
            .map(|(idx, _)| (idx.rows()[0], idx.cols()[0]))
            .collect();
        found.sort_unstable();
        assert_eq!(found, vec![(1, 1), (2, 2), (3, 3)]);
    }

    #[test]
    fn census_full_matrix_is_single_optimum() {
        let w = GaussianMatrix::sample(5, 17).unwrap();
        let census = enumerate_local_optima(&w, 5, &Budget::default()).unwrap();
        assert_eq!(census.count(), 1);
    }

    #[test]
    fn census_matches_naive_scan() {
        // Brute-force oracle over every (I, J) pair with the dominance
        // predicate; independent of the row-set scan.
        for seed in 0..50 {
            let w = GaussianMatrix::sample(7, 1000 + seed).unwrap();
            let census = enumerate_local_optima(&w, 2, &Budget::default()).unwrap();
            let mut expected = Vec::new();
            let mut rc = Combinations::new(7, 2);
            let mut row_sets = Vec::new();
            while let Some(c) = rc.next() {
                row_sets.push(c.to_vec());
            }
            for rows in &row_sets {
                for cols in &row_sets {
                    let idx = SubmatrixIndex::new(
                        rows.iter().map(|&i| i + 1).collect(),
                        cols.iter().map(|&j| j + 1).collect(),
                    )
                    .unwrap();
                    let (rd, cd) = local_optimality_status(&w, &idx).unwrap();
                    if rd && cd {
                        expected.push(idx);
                    }
                }
            }
            let mut got: Vec<_> = census.optima.iter().map(|(i, _)| i.clone()).collect();
            got.sort();
            expected.sort();
            assert_eq!(got, expected, "seed {seed}");
        }
    }

    #[test]
    fn global_optimum_examples() {
        let w = GaussianMatrix::from_values(2, vec![1., 2., 3., 4.], 0).unwrap();
        let (idx, m) = global_optimum_exhaustive(&w, 1, &Budget::default()).unwrap();
        assert_eq!((idx.rows(), idx.cols(), m), (&[2][..], &[2][..], 4.0));
        let (idx, m) = global_optimum_exhaustive(&w, 2, &Budget::default()).unwrap();
        assert_eq!((idx.rows(), idx.cols(), m), (&[1, 2][..], &[1, 2][..], 2.5));
    }

    #[test]
    fn global_optimum_dominates_las_restarts() {
        let w = GaussianMatrix::sample(6, 23).unwrap();
        let (_, m) = global_optimum_exhaustive(&w, 2, &Budget::default()).unwrap();
        let mut starts = Combinations::new(6, 2);
        let mut best = f64::NEG_INFINITY;
        while let Some(cols) = starts.next() {
            let start: Vec<usize> = cols.iter().map(|&c| c + 1).collect();
            let r = las_search(&w, 2, &start, 1000).unwrap();
            best = best.max(r.final_average);
        }
        assert!(m >= best - 1e-12);
    }

    #[test]
    fn localization_examples() {
        let ones = GaussianMatrix::from_values(4, vec![1.0; 16], 0).unwrap();
        let r = largest_threshold_submatrix_size(&ones, 1.0, 4, &Budget::default()).unwrap();
        assert_eq!(r.k_observed, 4);

        let w = fixture_3x3();
        let r = largest_threshold_submatrix_size(&w, 3.5, 3, &Budget::default()).unwrap();
        assert_eq!(r.k_observed, 1);
        // Best 2x2: rows {1,3} x cols {1,3} -> (3 + 2 + 2 + 4)/4.
        assert_eq!(r.per_k_max_average[1].1, 2.75);

        let neg = GaussianMatrix::from_values(3, vec![-1.0; 9], 0).unwrap();
        let r = largest_threshold_submatrix_size(&neg, 1.0, 3, &Budget::default()).unwrap();
        assert_eq!(r.k_observed, 0);
    }

    #[test]
    fn count_above_examples() {
        let w = fixture_3x3();
        let census = enumerate_local_optima(&w, 1, &Budget::default()).unwrap();
        assert_eq!(count_local_optima_above(&census, 3.5), 2);
        assert_eq!(count_local_optima_above(&census, f64::NEG_INFINITY), census.count());
        assert_eq!(count_local_optima_above(&census, 6.0), 0);
    }

    #[test]
    fn budget_errors() {
        let w = GaussianMatrix::sample(30, 1).unwrap();
        let tight = Budget { census: 10.0, exhaustive_sq: 10.0 };
        assert!(matches!(
            enumerate_local_optima(&w, 10, &tight),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(matches!(
            global_optimum_exhaustive(&w, 10, &tight),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn locally_optimal_implies_las_fixed_point() {
        for seed in 0..10 {
            let w = GaussianMatrix::sample(8, 77 + seed).unwrap();
            let census = enumerate_local_optima(&w, 2, &Budget::default()).unwrap();
            for (idx, avg) in &census.optima {
                let r = las_search(&w, 2, idx.cols(), 1000).unwrap();
                assert_eq!(&r.final_index, idx);
                assert!(r.iterations <= 1);
                assert!((r.final_average - avg).abs() < 1e-12);
            }
        }
    }
}
