//! Dicke weights, decoder-failure classification and the postselected
//! expectation estimator for imperfect decoding.

use std::collections::HashMap;

use itertools::Itertools;
use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoders::{decode, DecoderKind};
use crate::error::{Error, Result};
use crate::gf2::{matvec_mod2, BitVec};
use crate::instances::binomial;
use crate::xorsat::XorSatInstance;

/// Largest `C(m, k)` summed over `k ≤ ℓ` that classification will enumerate.
pub const ENUMERATION_LIMIT: usize = 20_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DickeWeights {
    pub m: usize,
    pub ell: usize,
    pub w: Vec<f64>,
}

impl DickeWeights {
    /// `wᵀAw` for the tridiagonal matrix `A`.
    pub fn rayleigh(&self) -> f64 {
        rayleigh(self.m, &self.w)
    }
}

fn a_k(m: usize, k: usize) -> f64 {
    ((k * (m + 1 - k)) as f64).sqrt()
}

pub(crate) fn rayleigh(m: usize, w: &[f64]) -> f64 {
    (1..w.len())
        .map(|k| 2.0 * a_k(m, k) * w[k - 1] * w[k])
        .sum::<f64>()
        / w.iter().map(|x| x * x).sum::<f64>()
}

/// Principal eigenvector of the `(ℓ+1)×(ℓ+1)` tridiagonal matrix with zero
/// diagonal and off-diagonals `a_k = √(k(m−k+1))`.
pub fn compute_dicke_weights(m: usize, ell: usize) -> Result<DickeWeights> {
    if ell == 0 || ell >= m {
        return Err(Error::InvalidInput(format!(
            "Dicke weights need 1 <= ell < m, got ell = {ell}, m = {m}"
        )));
    }
    let d = ell + 1;
    let a = DMatrix::from_fn(d, d, |i, j| {
        if i.abs_diff(j) == 1 {
            a_k(m, i.max(j))
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(a);
    let top = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .map(|(i, _)| i)
        .unwrap();
    let mut w: Vec<f64> = eig.eigenvectors.column(top).iter().copied().collect();
    if w.iter().sum::<f64>() < 0.0 {
        w.iter_mut().for_each(|x| *x = -*x);
    }
    let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    w.iter_mut().for_each(|x| *x = (*x / norm).max(0.0));
    Ok(DickeWeights { m, ell, w })
}

/// Decoding outcome of every word of weight `k ≤ ℓ`, in lexicographic
/// combination order per weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub ell: usize,
    pub decoder: DecoderKind,
    pub iterations: usize,
    pub eps: Vec<f64>,
    pub failures: Vec<usize>,
    #[serde(skip)]
    pub decoded: Vec<Vec<bool>>,
}

impl Classification {
    pub fn all_failed(&self) -> bool {
        self.decoded.iter().all(|d| d.iter().all(|ok| !ok))
    }

    /// The same classification restricted to weights `0..=ell`.
    pub fn truncated(&self, ell: usize) -> Classification {
        let keep = ell.min(self.ell) + 1;
        Classification {
            ell: keep - 1,
            decoder: self.decoder,
            iterations: self.iterations,
            eps: self.eps[..keep].to_vec(),
            failures: self.failures[..keep].to_vec(),
            decoded: self.decoded[..keep.min(self.decoded.len())].to_vec(),
        }
    }
}

pub fn classify_decodable(
    inst: &XorSatInstance,
    ell: usize,
    decoder: DecoderKind,
    iterations: usize,
) -> Result<Classification> {
    inst.validate()?;
    inst.ensure_distinct_rows()?;
    let total: usize = (0..=ell).map(|k| binomial(inst.m, k)).sum();
    if ell > inst.m || total > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            what: "decoder classification words",
            size: total,
            limit: ENUMERATION_LIMIT,
        });
    }
    let bt = inst.bt();
    let mut decoded = Vec::with_capacity(ell + 1);
    for k in 0..=ell {
        let words: Vec<Vec<usize>> = (0..inst.m).combinations(k).collect();
        let ok = words
            .par_iter()
            .map(|ones| {
                decode(
                    decoder,
                    &bt,
                    &BitVec::from_support(inst.m, ones),
                    iterations,
                )
                .map(|o| o.success)
            })
            .collect::<Result<Vec<bool>>>()?;
        decoded.push(ok);
    }
    let failures: Vec<usize> = decoded
        .iter()
        .map(|d| d.iter().filter(|ok| !**ok).count())
        .collect();
    let eps = failures
        .iter()
        .zip(&decoded)
        .map(|(&f, d)| f as f64 / d.len() as f64)
        .collect();
    Ok(Classification {
        ell,
        decoder,
        iterations,
        eps,
        failures,
        decoded,
    })
}

/// Unnormalized postselected syndrome state `Σ_k w_k/√C(m,k) Σ_{y∈D_k} (−1)^{v·y} |Bᵀy⟩`.
pub fn postselected_state(
    inst: &XorSatInstance,
    weights: &DickeWeights,
    cls: &Classification,
) -> Result<HashMap<BitVec, f64>> {
    check_compatible(inst, weights, cls)?;
    let bt = inst.bt();
    let mut state: HashMap<BitVec, f64> = HashMap::new();
    for k in 0..=cls.ell {
        let scale = weights.w[k] / (binomial(inst.m, k) as f64).sqrt();
        let words: Vec<Vec<usize>> = (0..inst.m).combinations(k).collect();
        let terms = words
            .par_iter()
            .zip(cls.decoded[k].par_iter())
            .filter(|(_, ok)| **ok)
            .map(|(ones, _)| {
                let y = BitVec::from_support(inst.m, ones);
                let sign = if y.dot(&inst.v) { -scale } else { scale };
                matvec_mod2(&bt, &y).map(|s| (s, sign))
            })
            .collect::<Result<Vec<_>>>()?;
        for (s, a) in terms {
            *state.entry(s).or_insert(0.0) += a;
        }
    }
    Ok(state)
}

fn check_compatible(
    inst: &XorSatInstance,
    weights: &DickeWeights,
    cls: &Classification,
) -> Result<()> {
    if weights.m != inst.m || weights.ell != cls.ell || cls.decoded.len() != cls.ell + 1 {
        return Err(Error::InvalidInput(format!(
            "weights (m = {}, ell = {}) do not match instance m = {} and classification ell = {}",
            weights.m, weights.ell, inst.m, cls.ell
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PaperFormula {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "expected_O")]
    pub expected_o: f64,
    #[serde(rename = "expected_S")]
    pub expected_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DqiPrediction {
    pub eps: Vec<f64>,
    /// Probability that the message register is measured all-zero.
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "expected_O")]
    pub expected_o: f64,
    #[serde(rename = "expected_S")]
    pub expected_s: f64,
    pub method: String,
    pub paper_formula: PaperFormula,
}

/// Expected objective of the postselected state.
///
/// The primary value normalizes the accumulated syndrome state by its squared
/// norm. `paper_formula` evaluates the double sum over `D_k × D_k′` with the
/// `1/R²` prefactor and `R = Σ w_k²(1−ε_k)`; the two agree only when `R = 1`.
pub fn predict_expectation(
    inst: &XorSatInstance,
    weights: &DickeWeights,
    cls: &Classification,
) -> Result<DqiPrediction> {
    let state = postselected_state(inst, weights, cls)?;
    let r: f64 = state.values().map(|a| a * a).sum();
    if r <= 0.0 || cls.all_failed() {
        return Err(Error::Undefined(
            "every word of weight <= ell fails to decode, R = 0".into(),
        ));
    }
    let mut overlap = 0.0;
    for i in 0..inst.m {
        let col = BitVec::from_support(inst.n, &inst.b_rows[i]);
        let sign = if inst.v.get(i) { -1.0 } else { 1.0 };
        let mut acc = 0.0;
        for (s, a) in &state {
            if let Some(a2) = state.get(&s.xor(&col)) {
                acc += a * a2;
            }
        }
        overlap += sign * acc;
    }
    let expected_o = overlap / r;
    let r_paper: f64 = weights
        .w
        .iter()
        .zip(&cls.eps)
        .map(|(w, e)| w * w * (1.0 - e))
        .sum();
    let paper_o = overlap / (r_paper * r_paper);
    Ok(DqiPrediction {
        eps: cls.eps.clone(),
        r,
        expected_o,
        expected_s: (expected_o + inst.m as f64) / 2.0,
        method: "exact_state".into(),
        paper_formula: PaperFormula {
            r: r_paper,
            expected_o: paper_o,
            expected_s: (paper_o + inst.m as f64) / 2.0,
        },
    })
}

/// `|⟨x|DQI⟩|²` over all `x ∈ {0,1}^n` from the normalized postselected state.
pub fn dqi_distribution(
    inst: &XorSatInstance,
    weights: &DickeWeights,
    cls: &Classification,
) -> Result<Vec<f64>> {
    if inst.n > 20 {
        return Err(Error::TooLarge {
            what: "distribution variables",
            size: inst.n,
            limit: 20,
        });
    }
    let state = postselected_state(inst, weights, cls)?;
    let r: f64 = state.values().map(|a| a * a).sum();
    if r <= 0.0 {
        return Err(Error::Undefined("R = 0".into()));
    }
    let scale = 1.0 / (r * (1u64 << inst.n) as f64).sqrt();
    Ok((0..1u64 << inst.n)
        .map(|x| {
            let xv = BitVec::from_u64(x, inst.n);
            let amp: f64 = state
                .iter()
                .map(|(s, a)| if s.dot(&xv) { -a } else { *a })
                .sum();
            (amp * scale).powi(2)
        })
        .collect())
}
