//! Syndrome decoders for the zero code word: hard-decision BP1, soft-decision
//! BP2 and Gauss–Jordan, plus the Monte-Carlo success-rate harness.
//!
//! All decoders take the parity-check matrix `Bᵀ` (n checks × m bits) and a
//! damaged word `y` of length m, and succeed only when they return all zeros.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{matvec_mod2, BitMatrix, BitVec};
use crate::Scalar;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeOutcome {
    pub success: bool,
    pub bits: BitVec,
    pub iterations_used: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderKind {
    Bp1,
    Bp2,
    Gj,
}

impl std::str::FromStr for DecoderKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bp1" => Ok(DecoderKind::Bp1),
            "bp2" => Ok(DecoderKind::Bp2),
            "gj" => Ok(DecoderKind::Gj),
            other => Err(Error::InvalidInput(format!(
                "unknown decoder {other:?}, expected bp1, bp2 or gj"
            ))),
        }
    }
}

impl std::fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DecoderKind::Bp1 => "bp1",
            DecoderKind::Bp2 => "bp2",
            DecoderKind::Gj => "gj",
        })
    }
}

fn check_dims(bt: &BitMatrix, y: &BitVec) -> Result<()> {
    if bt.cols() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: bt.cols(),
            found: y.len(),
        });
    }
    Ok(())
}

/// Adjacency of `Bᵀ` by bit: the checks each bit participates in.
pub(crate) fn bit_checks(bt: &BitMatrix) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); bt.cols()];
    for (i, row) in bt.row_lists().iter().enumerate() {
        for &j in row {
            adj[j].push(i);
        }
    }
    adj
}

/// One BP1 step: flip bit j iff every check touching it is unsatisfied.
/// Bits in no check never flip.
pub fn bp1_flip_candidates(adj: &[Vec<usize>], syndrome: &BitVec) -> BitVec {
    let mut flips = BitVec::zeros(adj.len());
    for (j, checks) in adj.iter().enumerate() {
        if !checks.is_empty() && checks.iter().all(|&i| syndrome.get(i)) {
            flips.set(j, true);
        }
    }
    flips
}

/// Per-iteration flip patterns of BP1 over all `t` iterations, without early exit.
pub fn bp1_flip_trace(bt: &BitMatrix, y: &BitVec, t: usize) -> Result<Vec<BitVec>> {
    check_dims(bt, y)?;
    let adj = bit_checks(bt);
    let mut bits = y.clone();
    let mut trace = Vec::with_capacity(t);
    for _ in 0..t {
        let syndrome = matvec_mod2(bt, &bits)?;
        let flips = bp1_flip_candidates(&adj, &syndrome);
        bits.xor_assign(&flips);
        trace.push(flips);
    }
    Ok(trace)
}

pub fn bp1_decode(bt: &BitMatrix, y: &BitVec, t: usize) -> Result<DecodeOutcome> {
    check_dims(bt, y)?;
    let adj = bit_checks(bt);
    let mut bits = y.clone();
    for iter in 0..t {
        let syndrome = matvec_mod2(bt, &bits)?;
        if syndrome.is_zero() {
            return Ok(DecodeOutcome {
                success: bits.is_zero(),
                bits,
                iterations_used: iter + 1,
            });
        }
        let flips = bp1_flip_candidates(&adj, &syndrome);
        bits.xor_assign(&flips);
    }
    Ok(DecodeOutcome {
        success: bits.is_zero(),
        bits,
        iterations_used: t,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bp2Config<T> {
    pub p: T,
    pub max_iterations: usize,
    pub eps: T,
}

impl<T: Scalar> Bp2Config<T> {
    pub fn new(p: T, max_iterations: usize) -> Result<Self> {
        let eps = T::from(1e-12).unwrap().max(T::epsilon());
        let cfg = Bp2Config {
            p,
            max_iterations,
            eps,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let half = T::from(0.5).unwrap();
        if !(self.p > T::zero() && self.p < half) {
            return Err(Error::InvalidInput("field p must lie in (0, 0.5)".into()));
        }
        if !(self.eps > T::zero()) {
            return Err(Error::InvalidInput("field eps must be positive".into()));
        }
        Ok(())
    }

    /// Magnitude of the channel log-likelihood ratio, `log((1−p)/p)`.
    pub fn llr_magnitude(&self) -> T {
        ((T::one() - self.p) / self.p).ln()
    }
}

impl<T: Scalar> Default for Bp2Config<T> {
    fn default() -> Self {
        Bp2Config::new(T::from(0.001).unwrap(), 5).expect("default configuration is valid")
    }
}

/// Sum-product decoding with tanh/atanh check updates.
pub fn bp2_decode<T: Scalar>(
    bt: &BitMatrix,
    y: &BitVec,
    cfg: &Bp2Config<T>,
) -> Result<DecodeOutcome> {
    check_dims(bt, y)?;
    cfg.validate()?;
    let m = bt.cols();
    let half = T::from(0.5).unwrap();
    let two = T::from(2.0).unwrap();
    let lim = T::one() - cfg.eps;
    let mag = cfg.llr_magnitude();
    let received: Vec<T> = y.iter().map(|b| if b { -mag } else { mag }).collect();

    // edges grouped by check; edge e = (check i, bit j)
    let checks = bt.row_lists();
    let mut offsets = Vec::with_capacity(checks.len() + 1);
    offsets.push(0);
    for row in checks {
        offsets.push(offsets.last().unwrap() + row.len());
    }
    let edge_bit: Vec<usize> = checks.iter().flatten().copied().collect();
    let mut bit_edges = vec![Vec::new(); m];
    for (e, &j) in edge_bit.iter().enumerate() {
        bit_edges[j].push(e);
    }
    let mut v2c: Vec<T> = edge_bit.iter().map(|&j| received[j]).collect();
    let mut c2v = vec![T::zero(); edge_bit.len()];
    let mut tanhs = Vec::new();
    let mut decoded = BitVec::zeros(m);

    for iter in 0..cfg.max_iterations {
        for i in 0..checks.len() {
            let (lo, hi) = (offsets[i], offsets[i + 1]);
            tanhs.clear();
            tanhs.extend(v2c[lo..hi].iter().map(|&x| (half * x).tanh()));
            for k in 0..hi - lo {
                let mut prod = T::one();
                for (q, &t) in tanhs.iter().enumerate() {
                    if q != k {
                        prod = prod * t;
                    }
                }
                let prod = prod.max(-lim).min(lim);
                c2v[lo + k] = two * prod.atanh();
            }
        }
        for (j, edges) in bit_edges.iter().enumerate() {
            let total = edges.iter().fold(received[j], |acc, &e| acc + c2v[e]);
            for &e in edges {
                v2c[e] = total - c2v[e];
            }
            decoded.set(j, total < T::zero());
        }
        if matvec_mod2(bt, &decoded)?.is_zero() {
            return Ok(DecodeOutcome {
                success: decoded.is_zero(),
                bits: decoded,
                iterations_used: iter + 1,
            });
        }
    }
    Ok(DecodeOutcome {
        success: decoded.is_zero(),
        bits: decoded,
        iterations_used: cfg.max_iterations,
    })
}

/// Gauss–Jordan reduction of `[H | Hy]`; the error vector is read off the
/// pivot columns and `decoded = y ⊕ e`.
pub fn gj_decode(h: &BitMatrix, y: &BitVec) -> Result<DecodeOutcome> {
    check_dims(h, y)?;
    let n = h.cols();
    let syndrome = matvec_mod2(h, y)?;
    let words = (n + 1).div_ceil(64);
    let mut aug: Vec<Vec<u64>> = (0..h.rows())
        .map(|i| {
            let mut w = vec![0u64; words];
            for &j in h.row(i) {
                w[j / 64] |= 1 << (j % 64);
            }
            if syndrome.get(i) {
                w[n / 64] |= 1 << (n % 64);
            }
            w
        })
        .collect();
    let get = |row: &[u64], j: usize| (row[j / 64] >> (j % 64)) & 1 == 1;
    let mut row = 0;
    let mut pivots = Vec::new();
    for col in 0..n {
        if row == aug.len() {
            break;
        }
        let Some(pivot) = (row..aug.len()).find(|&i| get(&aug[i], col)) else {
            continue;
        };
        aug.swap(row, pivot);
        pivots.push(col);
        let pivot_row = aug[row].clone();
        for (i, r) in aug.iter_mut().enumerate() {
            if i != row && get(r, col) {
                for (a, b) in r.iter_mut().zip(&pivot_row) {
                    *a ^= b;
                }
            }
        }
        row += 1;
    }
    let mut e = BitVec::zeros(n);
    for (i, &col) in pivots.iter().enumerate() {
        e.set(col, get(&aug[i], n));
    }
    let decoded = y.xor(&e);
    Ok(DecodeOutcome {
        success: decoded.is_zero(),
        bits: decoded,
        iterations_used: 1,
    })
}

/// Runs `kind` with `iterations` (BP2 uses `p = 0.001`).
pub fn decode(
    kind: DecoderKind,
    bt: &BitMatrix,
    y: &BitVec,
    iterations: usize,
) -> Result<DecodeOutcome> {
    match kind {
        DecoderKind::Bp1 => bp1_decode(bt, y, iterations),
        DecoderKind::Bp2 => bp2_decode(bt, y, &Bp2Config::<f64>::new(0.001, iterations)?),
        DecoderKind::Gj => gj_decode(bt, y),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessCell {
    pub ell: usize,
    pub size: usize,
    pub decoder: DecoderKind,
    pub trials: usize,
    pub successes: usize,
    pub rate: f64,
}

impl SuccessCell {
    /// Binomial standard error of `rate`.
    pub fn std_error(&self) -> f64 {
        (self.rate * (1.0 - self.rate) / self.trials as f64).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessRateGrid {
    pub cells: Vec<SuccessCell>,
    pub trials: usize,
    pub iterations: usize,
    pub seed: u64,
}

/// Seed for one Monte-Carlo trial, independent of scheduling.
pub(crate) fn trial_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z =
        seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Success fraction for uniformly random weight-ℓ flips of the zero word.
pub fn benchmark_success_rate(
    bt: &BitMatrix,
    ells: &[usize],
    trials: usize,
    decoder: DecoderKind,
    iterations: usize,
    seed: u64,
) -> Result<SuccessRateGrid> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let m = bt.cols();
    let mut cells = Vec::with_capacity(ells.len());
    for &ell in ells {
        if ell > m {
            return Err(Error::InvalidInput(format!(
                "cannot flip {ell} of {m} bits"
            )));
        }
        let successes = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, ell as u64, trial as u64));
                let y = BitVec::from_support(m, &sample(&mut rng, m, ell).into_vec());
                decode(decoder, bt, &y, iterations).map(|o| o.success as usize)
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .sum();
        cells.push(SuccessCell {
            ell,
            size: bt.rows() * bt.cols(),
            decoder,
            trials,
            successes,
            rate: successes as f64 / trials as f64,
        });
    }
    Ok(SuccessRateGrid {
        cells,
        trials,
        iterations,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{random_small_instance, small_example_instance};
    use proptest::prelude::*;
    use rand::Rng;

    fn small_bt() -> BitMatrix {
        small_example_instance().bt()
    }

    #[test]
    fn bp1_small_example_trace() {
        let bt = small_bt();
        let y = BitVec::from_bits(&[1, 0, 0]);
        let out = bp1_decode(&bt, &y, 5).unwrap();
        assert!(out.success);
        assert_eq!(out.iterations_used, 2);
        let trace = bp1_flip_trace(&bt, &y, 2).unwrap();
        assert_eq!(trace[0], BitVec::from_bits(&[1, 0, 0]));
        assert!(trace[1].is_zero());
    }

    #[test]
    fn zero_word_decodes_immediately() {
        let bt = small_bt();
        let y = BitVec::zeros(3);
        for kind in [DecoderKind::Bp1, DecoderKind::Bp2, DecoderKind::Gj] {
            let out = decode(kind, &bt, &y, 5).unwrap();
            assert!(out.success);
            assert!(out.bits.is_zero());
        }
        assert_eq!(bp1_decode(&bt, &y, 5).unwrap().iterations_used, 1);
        assert_eq!(
            bp2_decode(&bt, &y, &Bp2Config::<f64>::default())
                .unwrap()
                .iterations_used,
            1
        );
    }

    #[test]
    fn bp1_flip_rule_is_threshold_equality() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for seed in 0..50 {
            let inst = random_small_instance(8, 6, seed).unwrap();
            let bt = inst.bt();
            let adj = bit_checks(&bt);
            let s = BitVec::from_bools(
                &(0..bt.rows())
                    .map(|_| rng.random::<bool>())
                    .collect::<Vec<_>>(),
            );
            let flips = bp1_flip_candidates(&adj, &s);
            for (j, checks) in adj.iter().enumerate() {
                let unsat = checks.iter().filter(|&&i| s.get(i)).count();
                assert_eq!(flips.get(j), !checks.is_empty() && unsat >= checks.len());
            }
        }
    }

    #[test]
    fn degree_zero_bits_never_flip() {
        let bt = BitMatrix::new(3, vec![vec![0, 1]]).unwrap();
        let y = BitVec::from_bits(&[0, 0, 1]);
        let out = bp1_decode(&bt, &y, 4).unwrap();
        assert!(!out.success);
        assert_eq!(out.bits, y);
    }

    #[test]
    fn bp1_success_means_zero_bits_and_syndrome() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for trial in 0..1000 {
            let inst = random_small_instance(8, 6, trial).unwrap();
            let bt = inst.bt();
            let y = BitVec::from_bools(&(0..8).map(|_| rng.random_bool(0.25)).collect::<Vec<_>>());
            let out = bp1_decode(&bt, &y, 3).unwrap();
            if out.success {
                assert!(out.bits.is_zero());
                assert!(matvec_mod2(&bt, &out.bits).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn bp1_is_idempotent_after_success() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for trial in 0..300 {
            let inst = random_small_instance(8, 6, trial).unwrap();
            let bt = inst.bt();
            let y = BitVec::from_support(8, &sample(&mut rng, 8, 2).into_vec());
            let short = bp1_decode(&bt, &y, 3).unwrap();
            if short.success {
                for extra in 1..3 {
                    let trace = bp1_flip_trace(&bt, &y, 3 + extra).unwrap();
                    let mut bits = y.clone();
                    for f in &trace {
                        bits.xor_assign(f);
                    }
                    assert_eq!(bits, short.bits);
                }
            }
        }
    }

    #[test]
    fn bp2_llr_magnitude() {
        let cfg = Bp2Config::<f64>::default();
        assert!((cfg.llr_magnitude() - 999f64.ln()).abs() < 1e-12);
        assert!((cfg.llr_magnitude() - 6.9068).abs() < 1e-4);
        assert!(Bp2Config::<f64>::new(0.6, 5).is_err());
        let cfg32 = Bp2Config::<f32>::default();
        assert!(cfg32.eps >= f32::EPSILON);
    }

    #[test]
    fn bp2_messages_stay_finite() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for trial in 0..2000 {
            let inst = random_small_instance(10, 6, trial).unwrap();
            let bt = inst.bt();
            let y = BitVec::from_bools(&(0..10).map(|_| rng.random_bool(0.3)).collect::<Vec<_>>());
            let out64 = bp2_decode(&bt, &y, &Bp2Config::<f64>::new(0.001, 8).unwrap()).unwrap();
            let out32 = bp2_decode(&bt, &y, &Bp2Config::<f32>::new(0.001, 8).unwrap()).unwrap();
            assert_eq!(out64.bits.len(), 10);
            assert_eq!(out32.bits.len(), 10);
        }
    }

    #[test]
    fn gj_square_full_rank_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for n in [4usize, 8, 12] {
            let h = loop {
                let rows: Vec<Vec<usize>> = (0..n)
                    .map(|_| (0..n).filter(|_| rng.random_bool(0.4)).collect())
                    .collect();
                let h = BitMatrix::new(n, rows).unwrap();
                if h.rank() == n {
                    break h;
                }
            };
            for w in 0..(1u64 << n) {
                let y = BitVec::from_u64(w, n);
                assert!(gj_decode(&h, &y).unwrap().success);
            }
        }
        assert!(
            gj_decode(&BitMatrix::identity(5), &BitVec::zeros(5))
                .unwrap()
                .success
        );
    }

    #[test]
    fn gj_rectangular_recovers_a_syndrome_preimage() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for trial in 0..200 {
            let inst = random_small_instance(8, 5, trial).unwrap();
            let bt = inst.bt();
            let y = BitVec::from_bools(&(0..8).map(|_| rng.random_bool(0.3)).collect::<Vec<_>>());
            let out = gj_decode(&bt, &y).unwrap();
            assert!(matvec_mod2(&bt, &out.bits).unwrap().is_zero());
        }
    }

    #[test]
    fn benchmark_grid_is_reproducible() {
        let bt = random_small_instance(12, 8, 3).unwrap().bt();
        let a = benchmark_success_rate(&bt, &[0, 1, 2], 200, DecoderKind::Bp1, 3, 42).unwrap();
        let b = benchmark_success_rate(&bt, &[0, 1, 2], 200, DecoderKind::Bp1, 3, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.cells[0].rate, 1.0);
        for kind in [DecoderKind::Bp2, DecoderKind::Gj] {
            let g = benchmark_success_rate(&bt, &[0], 10, kind, 3, 1).unwrap();
            assert_eq!(g.cells[0].rate, 1.0);
        }
    }

    #[test]
    fn decoder_kind_parses() {
        assert_eq!("bp2".parse::<DecoderKind>().unwrap(), DecoderKind::Bp2);
        assert!("bp3".parse::<DecoderKind>().is_err());
        assert_eq!(DecoderKind::Gj.to_string(), "gj");
    }

    proptest! {
        #[test]
        fn bp1_matches_reference_transcript(seed in 0u64..500, word in 0u64..256, t in 1usize..5) {
            let inst = random_small_instance(8, 6, seed).unwrap();
            let bt = inst.bt();
            let y = BitVec::from_u64(word, 8);
            let out = bp1_decode(&bt, &y, t).unwrap();
            // reference: literal loop over dense rows
            let dense = bt.to_dense();
            let mut bits: Vec<u8> = y.to_bits();
            let mut used = t;
            let mut early = false;
            for it in 0..t {
                let syn: Vec<u8> = dense.iter().map(|r| r.iter().zip(&bits).map(|(a, b)| a & b).sum::<u8>() % 2).collect();
                if syn.iter().all(|&s| s == 0) { used = it + 1; early = true; break; }
                let mut flips = vec![0u8; 8];
                for j in 0..8 {
                    let conn: Vec<usize> = (0..dense.len()).filter(|&i| dense[i][j] == 1).collect();
                    if !conn.is_empty() && conn.iter().all(|&i| syn[i] == 1) { flips[j] = 1; }
                }
                for j in 0..8 { bits[j] ^= flips[j]; }
            }
            let _ = early;
            prop_assert_eq!(out.bits.to_bits(), bits.clone());
            prop_assert_eq!(out.iterations_used, used);
            prop_assert_eq!(out.success, bits.iter().all(|&b| b == 0));
        }
    }
}
