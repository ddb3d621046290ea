//! Fixed example instances and random generators.

mod bundling;
mod sampler;

pub use bundling::{
    bundling_to_ilp, generate_bundling_model, take_rate_migration, BundlingIlp, BundlingModel,
    BundlingParams, OptionSpec, SubsetRate,
};
pub use sampler::{
    default_swap_steps, downscale_profile, greedy_init_matrix, sample_degree_sequences,
    sample_instance, separate_duplicate_rows, swap_chain, DegreeProfile, DEFAULT_ATTEMPTS,
    DOWNSCALE_GRID,
};

use std::collections::HashSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::xorsat::XorSatInstance;

/// The 8×6 instance of the small-scale study; its optimum satisfies 7 rows.
pub fn example_8x6_instance() -> XorSatInstance {
    let rows = vec![
        vec![0, 1],
        vec![0, 4],
        vec![1, 2],
        vec![2, 3],
        vec![3, 5],
        vec![4, 5],
        vec![2, 5],
        vec![0, 5],
    ];
    let v = BitVec::from_bits(&[0, 0, 1, 1, 0, 0, 1, 1]);
    XorSatInstance::new(6, rows, v).expect("fixed instance is valid")
}

/// The 3×2 instance used to walk through the decoder circuit, with `v = 0`.
pub fn small_example_instance() -> XorSatInstance {
    XorSatInstance::new(2, vec![vec![0], vec![0, 1], vec![1]], BitVec::zeros(3))
        .expect("fixed instance is valid")
}

/// Random instance with `m` distinct rows of weight 1..=3 and uniform `v`.
pub fn random_small_instance(m: usize, n: usize, seed: u64) -> Result<XorSatInstance> {
    let max_w = n.min(3);
    let capacity: usize = (1..=max_w).map(|w| binomial(n, w)).sum();
    if n == 0 || m > capacity {
        return Err(Error::InvalidInput(format!(
            "cannot draw {m} distinct rows of weight 1..=3 over {n} columns"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut rows = Vec::with_capacity(m);
    while rows.len() < m {
        let w = rng.random_range(1..=max_w);
        let mut row = sample(&mut rng, n, w).into_vec();
        row.sort_unstable();
        if seen.insert(row.clone()) {
            rows.push(row);
        }
    }
    let v = BitVec::from_bools(&(0..m).map(|_| rng.random::<bool>()).collect::<Vec<_>>());
    XorSatInstance::new(n, rows, v)
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_instances_have_expected_shape() {
        let ex = example_8x6_instance();
        assert_eq!((ex.m, ex.n), (8, 6));
        assert_eq!(ex.max_row_weight(), 2);
        let small = small_example_instance();
        assert_eq!((small.m, small.n), (3, 2));
    }

    #[test]
    fn random_rows_are_distinct_and_light() {
        for seed in 0..20 {
            let inst = random_small_instance(8, 6, seed).unwrap();
            assert!(inst.duplicate_rows().is_none());
            assert!(inst.b_rows.iter().all(|r| (1..=3).contains(&r.len())));
        }
        assert_eq!(
            random_small_instance(5, 3, 7).unwrap(),
            random_small_instance(5, 3, 7).unwrap()
        );
    }

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(8, 2), 28);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 4), 0);
    }
}
