//! Random parity-check matrices with prescribed degree distributions:
//! degree-sequence rejection sampling, greedy initialization and the
//! checkerboard swap chain.

use std::collections::{BTreeMap, HashSet};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVec};
use crate::xorsat::XorSatInstance;

/// Empirical degree distributions: `row` for constraints, `col` for variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeProfile {
    pub row: Vec<(usize, f64)>,
    pub col: Vec<(usize, f64)>,
}

fn histogram(values: impl Iterator<Item = usize>) -> Vec<(usize, f64)> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    let mut total = 0;
    for v in values {
        *counts.entry(v).or_default() += 1;
        total += 1;
    }
    counts
        .into_iter()
        .map(|(d, c)| (d, c as f64 / total as f64))
        .collect()
}

impl DegreeProfile {
    pub fn new(row: Vec<(usize, f64)>, col: Vec<(usize, f64)>) -> Result<Self> {
        for (name, dist) in [("row", &row), ("col", &col)] {
            let sum: f64 = dist.iter().map(|d| d.1).sum();
            if dist.is_empty() || dist.iter().any(|d| d.1 < 0.0) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidInput(format!(
                    "{name} degree probabilities must be nonnegative and sum to 1"
                )));
            }
        }
        Ok(DegreeProfile { row, col })
    }

    pub fn from_instance(inst: &XorSatInstance) -> Self {
        let b = inst.b_matrix();
        DegreeProfile {
            row: histogram(b.row_weights().into_iter()),
            col: histogram(b.col_weights().into_iter()),
        }
    }

    /// Point masses at `row_degree` and `col_degree`.
    pub fn regular(row_degree: usize, col_degree: usize) -> Self {
        DegreeProfile {
            row: vec![(row_degree, 1.0)],
            col: vec![(col_degree, 1.0)],
        }
    }
}

pub const DEFAULT_ATTEMPTS: usize = 1_000_000;

/// Draws row and column degree sequences until their sums agree.
pub fn sample_degree_sequences(
    profile: &DegreeProfile,
    m: usize,
    n: usize,
    rng: &mut impl Rng,
    max_attempts: usize,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let rows = WeightedIndex::new(profile.row.iter().map(|d| d.1))
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let cols = WeightedIndex::new(profile.col.iter().map(|d| d.1))
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    for _ in 0..max_attempts {
        let r: Vec<usize> = (0..m).map(|_| profile.row[rows.sample(rng)].0).collect();
        let c: Vec<usize> = (0..n).map(|_| profile.col[cols.sample(rng)].0).collect();
        if r.iter().sum::<usize>() == c.iter().sum::<usize>() {
            return Ok((r, c));
        }
    }
    Err(Error::BudgetExhausted(max_attempts))
}

fn descending(sums: &[usize]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..sums.len()).collect();
    idx.sort_by(|&a, &b| sums[b].cmp(&sums[a]));
    idx
}

/// Greedy fill: rows by decreasing degree, each placing its ones in the
/// columns with the largest remaining demand.
pub fn greedy_init_matrix(row_sums: &[usize], col_sums: &[usize]) -> Result<BitMatrix> {
    let n = col_sums.len();
    let mut row_sums = row_sums.to_vec();
    let mut col_sums = col_sums.to_vec();
    let mut rows = vec![Vec::new(); row_sums.len()];
    for i in descending(&row_sums) {
        let mut r = row_sums[i];
        let possible: Vec<(usize, usize)> = descending(&col_sums)
            .into_iter()
            .map(|j| (j, col_sums[j]))
            .collect();
        for (j, c) in possible {
            if r > 0 && c > 0 && !rows[i].contains(&j) {
                rows[i].push(j);
                row_sums[i] -= 1;
                col_sums[j] -= 1;
                r -= 1;
                if row_sums[i] == 0 {
                    break;
                }
            }
        }
    }
    if row_sums.iter().any(|&r| r > 0) || col_sums.iter().any(|&c| c > 0) {
        return Err(Error::Infeasible(
            "greedy construction could not place every one".into(),
        ));
    }
    rows.iter_mut().for_each(|r| r.sort_unstable());
    BitMatrix::new(n, rows)
}

/// `steps` proposals of the checkerboard swap `[[1,0],[0,1]] → [[0,1],[1,0]]`
/// on uniformly drawn row and column pairs.
pub fn swap_chain(b0: &BitMatrix, steps: usize, rng: &mut impl Rng) -> BitMatrix {
    let (m, n) = (b0.rows(), b0.cols());
    let mut b = b0.clone();
    if m < 2 || n < 2 {
        return b;
    }
    let pair = |rng: &mut dyn rand::RngCore, k: usize| {
        let a = rng.random_range(0..k);
        let mut c = rng.random_range(0..k - 1);
        if c >= a {
            c += 1;
        }
        (a, c)
    };
    for _ in 0..steps {
        let (i1, i2) = pair(rng, m);
        let (j1, j2) = pair(rng, n);
        if b.get(i1, j1) && !b.get(i1, j2) && !b.get(i2, j1) && b.get(i2, j2) {
            b.set(i1, j1, false);
            b.set(i2, j2, false);
            b.set(i1, j2, true);
            b.set(i2, j1, true);
        }
    }
    b
}

/// Default chain length, ten proposals per one.
pub fn default_swap_steps(b: &BitMatrix) -> usize {
    10 * b.nnz()
}

pub const RESAMPLE_LIMIT: usize = 200;

/// Proposal budget of [`separate_duplicate_rows`].
pub const DEDUP_STEPS: usize = 200_000;

fn first_duplicate(rows: &[Vec<usize>]) -> Option<usize> {
    let mut seen = HashSet::new();
    rows.iter().position(|r| !seen.insert(r))
}

/// Checkerboard swaps between a repeated row and a random partner until all
/// rows differ; marginals are untouched. Returns false if the budget runs out.
pub fn separate_duplicate_rows(b: &mut BitMatrix, rng: &mut impl Rng, max_steps: usize) -> bool {
    let (m, n) = (b.rows(), b.cols());
    for _ in 0..max_steps {
        let Some(i1) = first_duplicate(b.row_lists()) else {
            return true;
        };
        if m < 2 || n < 2 || b.row(i1).is_empty() || b.row(i1).len() == n {
            return false;
        }
        let i2 = (i1 + rng.random_range(1..m)) % m;
        let j1 = b.row(i1)[rng.random_range(0..b.row(i1).len())];
        let j2 = rng.random_range(0..n);
        if !b.get(i1, j2) && b.get(i2, j2) && !b.get(i2, j1) {
            b.set(i1, j1, false);
            b.set(i1, j2, true);
            b.set(i2, j2, false);
            b.set(i2, j1, true);
        }
    }
    first_duplicate(b.row_lists()).is_none()
}

/// Random instance at `(m, n)` whose degree statistics follow `profile`, with
/// distinct nonempty rows and uniform `v`. Degree sequences the greedy fill
/// cannot realize are redrawn.
pub fn sample_instance(
    profile: &DegreeProfile,
    m: usize,
    n: usize,
    seed: u64,
) -> Result<XorSatInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RESAMPLE_LIMIT {
        let (r, c) = sample_degree_sequences(profile, m, n, &mut rng, DEFAULT_ATTEMPTS)?;
        if r.iter().any(|&d| d == 0 || d > n) || c.iter().any(|&d| d > m) {
            continue;
        }
        let Ok(b0) = greedy_init_matrix(&r, &c) else {
            continue;
        };
        let mut b = swap_chain(&b0, default_swap_steps(&b0), &mut rng);
        if !separate_duplicate_rows(&mut b, &mut rng, DEDUP_STEPS) {
            continue;
        }
        let v = BitVec::from_bools(&(0..m).map(|_| rng.random::<bool>()).collect::<Vec<_>>());
        return XorSatInstance::new(n, b.row_lists().to_vec(), v);
    }
    Err(Error::BudgetExhausted(RESAMPLE_LIMIT))
}

/// Instance at `(m, n)` resembling `full` in its degree distributions.
pub fn downscale_profile(
    full: &XorSatInstance,
    m: usize,
    n: usize,
    seed: u64,
) -> Result<XorSatInstance> {
    sample_instance(&DegreeProfile::from_instance(full), m, n, seed)
}

/// `(m, n)` sizes of the downscaled study, `m·n` from 276 to 10296.
pub const DOWNSCALE_GRID: [(usize, usize); 6] =
    [(23, 12), (41, 17), (62, 26), (86, 36), (115, 48), (156, 66)];

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn regular_profiles_accept_immediately() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (r, c) =
            sample_degree_sequences(&DegreeProfile::regular(3, 2), 4, 6, &mut rng, 1).unwrap();
        assert_eq!(r, vec![3; 4]);
        assert_eq!(c, vec![2; 6]);
        assert!(matches!(
            sample_degree_sequences(&DegreeProfile::regular(3, 2), 4, 5, &mut rng, 10),
            Err(Error::BudgetExhausted(10))
        ));
    }

    #[test]
    fn sequences_have_equal_sums_and_follow_the_profile() {
        let profile =
            DegreeProfile::new(vec![(1, 0.2), (2, 0.5), (3, 0.3)], vec![(2, 0.5), (5, 0.5)])
                .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut counts = [0usize; 4];
        let draws = 1000;
        for _ in 0..draws {
            let (r, c) =
                sample_degree_sequences(&profile, 10, 6, &mut rng, DEFAULT_ATTEMPTS).unwrap();
            assert_eq!(r.iter().sum::<usize>(), c.iter().sum::<usize>());
            for d in r {
                counts[d] += 1;
            }
        }
        // means match, so conditioning on equal sums barely tilts the histogram
        let total = (draws * 10) as f64;
        let chi2: f64 = [(1, 0.2), (2, 0.5), (3, 0.3)]
            .iter()
            .map(|&(d, p)| (counts[d] as f64 - p * total).powi(2) / (p * total))
            .sum();
        assert!(chi2 < 20.0, "chi2 = {chi2}, counts {counts:?}");
    }

    #[test]
    fn greedy_examples() {
        let b = greedy_init_matrix(&[1, 1], &[2]).unwrap();
        assert_eq!(b.to_dense(), vec![vec![1], vec![1]]);
        let z = greedy_init_matrix(&[0, 0], &[0, 0, 0]).unwrap();
        assert_eq!(z.nnz(), 0);
        assert!(greedy_init_matrix(&[3], &[1, 1]).is_err());
    }

    #[test]
    fn swap_chain_zero_steps_and_frequency() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b0 = BitMatrix::from_dense(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 0]]).unwrap();
        assert_eq!(swap_chain(&b0, 0, &mut rng), b0);
        // one step: the only matching ordered draws are (rows 0,1; cols 0,1) and (rows 1,0; cols 1,0)
        let trials = 10_000;
        let p = 2.0 / 36.0;
        let swaps = (0..trials)
            .filter(|_| swap_chain(&b0, 1, &mut rng) != b0)
            .count() as f64;
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        assert!(
            (swaps - trials as f64 * p).abs() < 5.0 * sigma,
            "{swaps} swaps"
        );
    }

    #[test]
    fn duplicate_rows_are_separated_without_touching_marginals() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let b0 =
            BitMatrix::new(4, vec![vec![0], vec![0], vec![1, 2], vec![1, 2], vec![3]]).unwrap();
        let mut b = b0.clone();
        assert!(separate_duplicate_rows(&mut b, &mut rng, 10_000));
        let distinct: HashSet<&Vec<usize>> = b.row_lists().iter().collect();
        assert_eq!(distinct.len(), 5);
        assert_eq!(b.row_weights(), b0.row_weights());
        assert_eq!(b.col_weights(), b0.col_weights());
        // two identical rows over one column cannot be separated
        let mut stuck = BitMatrix::new(1, vec![vec![0], vec![0]]).unwrap();
        assert!(!separate_duplicate_rows(&mut stuck, &mut rng, 100));
    }

    #[test]
    fn downscaled_grid_is_reproducible() {
        let full = crate::instances::random_small_instance(40, 20, 1).unwrap();
        for &(m, n) in &DOWNSCALE_GRID[..2] {
            let a = downscale_profile(&full, m, n, 9).unwrap();
            assert_eq!(a, downscale_profile(&full, m, n, 9).unwrap());
            assert!(a.duplicate_rows().is_none());
            assert_eq!((a.m, a.n), (m, n));
        }
        assert_eq!(DOWNSCALE_GRID.first().map(|(m, n)| m * n), Some(276));
        assert_eq!(DOWNSCALE_GRID.last().map(|(m, n)| m * n), Some(10296));
    }

    proptest! {
        #[test]
        fn swaps_preserve_marginals(seed in 0u64..1000, steps in 0usize..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rows: Vec<Vec<usize>> = (0..6).map(|_| (0..5).filter(|_| rng.random_bool(0.4)).collect()).collect();
            let b0 = BitMatrix::new(5, rows).unwrap();
            let b = swap_chain(&b0, steps, &mut rng);
            prop_assert_eq!(b.row_weights(), b0.row_weights());
            prop_assert_eq!(b.col_weights(), b0.col_weights());
        }

        #[test]
        fn greedy_conserves_marginals(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rows: Vec<Vec<usize>> = (0..7).map(|_| (0..5).filter(|_| rng.random_bool(0.5)).collect()).collect();
            let b = BitMatrix::new(5, rows).unwrap();
            if let Ok(g) = greedy_init_matrix(&b.row_weights(), &b.col_weights()) {
                prop_assert_eq!(g.row_weights(), b.row_weights());
                prop_assert_eq!(g.col_weights(), b.col_weights());
            }
        }
    }
}
