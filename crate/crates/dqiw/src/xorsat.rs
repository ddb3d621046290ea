//! max-XORSAT instances, scoring and classical baselines.

use std::collections::HashMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVec};

/// Largest `n` accepted by [`brute_force_optimum`].
pub const BRUTE_FORCE_MAX_VARS: usize = 26;

/// Rows of `B` as column lists together with the target vector `v`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct XorSatInstance {
    pub m: usize,
    pub n: usize,
    pub b_rows: Vec<Vec<usize>>,
    pub v: BitVec,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub satisfied: usize,
    pub objective: i64,
    pub fraction: f64,
}

impl ScoreSummary {
    pub fn new(satisfied: usize, m: usize) -> Self {
        let fraction = if m == 0 {
            1.0
        } else {
            satisfied as f64 / m as f64
        };
        ScoreSummary {
            satisfied,
            objective: 2 * satisfied as i64 - m as i64,
            fraction,
        }
    }
}

impl XorSatInstance {
    pub fn new(n: usize, b_rows: Vec<Vec<usize>>, v: BitVec) -> Result<Self> {
        let inst = XorSatInstance {
            m: b_rows.len(),
            n,
            b_rows,
            v,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if self.b_rows.len() != self.m {
            return Err(Error::InvalidInput(format!(
                "field b_rows has {} rows but m = {}",
                self.b_rows.len(),
                self.m
            )));
        }
        if self.v.len() != self.m {
            return Err(Error::InvalidInput(format!(
                "field v has length {} but m = {}",
                self.v.len(),
                self.m
            )));
        }
        for (i, row) in self.b_rows.iter().enumerate() {
            let mut sorted = row.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidInput(format!(
                    "field b_rows[{i}] repeats a column"
                )));
            }
            if let Some(&c) = sorted.last() {
                if c >= self.n {
                    return Err(Error::InvalidInput(format!(
                        "field b_rows[{i}] has column {c} >= n = {}",
                        self.n
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let inst: XorSatInstance = serde_json::from_str(text)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    /// `B` as an m×n matrix.
    pub fn b_matrix(&self) -> BitMatrix {
        BitMatrix::new(self.n, self.b_rows.clone()).expect("validated instance")
    }

    /// `Bᵀ` as an n×m parity-check matrix.
    pub fn bt(&self) -> BitMatrix {
        self.b_matrix().transpose()
    }

    pub fn max_row_weight(&self) -> usize {
        self.b_rows.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// First pair of equal rows, if any.
    pub fn duplicate_rows(&self) -> Option<(usize, usize)> {
        let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
        for (i, row) in self.b_rows.iter().enumerate() {
            let mut key = row.clone();
            key.sort_unstable();
            if let Some(&first) = seen.get(&key) {
                return Some((first, i));
            }
            seen.insert(key, i);
        }
        None
    }

    pub fn ensure_distinct_rows(&self) -> Result<()> {
        match self.duplicate_rows() {
            Some((first, second)) => Err(Error::DuplicateRows { first, second }),
            None => Ok(()),
        }
    }

    pub fn row_satisfied(&self, i: usize, x: &BitVec) -> bool {
        let parity = self.b_rows[i].iter().filter(|&&j| x.get(j)).count() % 2 == 1;
        parity == self.v.get(i)
    }
}

pub fn count_satisfied(inst: &XorSatInstance, x: &BitVec) -> Result<ScoreSummary> {
    if x.len() != inst.n {
        return Err(Error::DimensionMismatch {
            expected: inst.n,
            found: x.len(),
        });
    }
    let satisfied = (0..inst.m).filter(|&i| inst.row_satisfied(i, x)).count();
    Ok(ScoreSummary::new(satisfied, inst.m))
}

/// Exhaustive optimum; ties go to the smallest assignment read as an integer.
pub fn brute_force_optimum(inst: &XorSatInstance) -> Result<(BitVec, ScoreSummary)> {
    if inst.n > BRUTE_FORCE_MAX_VARS {
        return Err(Error::TooLarge {
            what: "variable count for brute force (use exact_optimum or random_baseline)",
            size: inst.n,
            limit: BRUTE_FORCE_MAX_VARS,
        });
    }
    let words = inst.m.div_ceil(64).max(1);
    let mut col_masks = vec![vec![0u64; words]; inst.n];
    for (i, row) in inst.b_rows.iter().enumerate() {
        for &j in row {
            col_masks[j][i / 64] ^= 1 << (i % 64);
        }
    }
    let mut target = vec![0u64; words];
    for i in inst.v.ones() {
        target[i / 64] |= 1 << (i % 64);
    }
    let mut valid = vec![0u64; words];
    for i in 0..inst.m {
        valid[i / 64] |= 1 << (i % 64);
    }
    // parity tracks B x along a Gray-code walk
    let mut parity = vec![0u64; words];
    let count = |parity: &[u64]| -> usize {
        parity
            .iter()
            .zip(&target)
            .zip(&valid)
            .map(|((p, t), v)| (!(p ^ t) & v).count_ones() as usize)
            .sum()
    };
    let mut best = (count(&parity), 0u64);
    let mut gray = 0u64;
    for step in 1..(1u64 << inst.n) {
        let j = step.trailing_zeros() as usize;
        gray ^= 1 << j;
        for (p, c) in parity.iter_mut().zip(&col_masks[j]) {
            *p ^= c;
        }
        let s = count(&parity);
        if s > best.0 || (s == best.0 && gray < best.1) {
            best = (s, gray);
        }
    }
    Ok((
        BitVec::from_u64(best.1, inst.n),
        ScoreSummary::new(best.0, inst.m),
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineDistribution {
    pub shots: usize,
    /// `histogram[s]` counts samples with exactly `s` satisfied equations.
    pub histogram: Vec<usize>,
    pub mean: f64,
}

/// Uniformly random assignments.
pub fn random_baseline(
    inst: &XorSatInstance,
    shots: usize,
    seed: u64,
) -> Result<BaselineDistribution> {
    if shots == 0 {
        return Err(Error::InvalidInput("shots must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut histogram = vec![0usize; inst.m + 1];
    let mut total = 0usize;
    for _ in 0..shots {
        let bits: Vec<bool> = (0..inst.n).map(|_| rng.random::<bool>()).collect();
        let s = count_satisfied(inst, &BitVec::from_bools(&bits))?.satisfied;
        histogram[s] += 1;
        total += s;
    }
    Ok(BaselineDistribution {
        shots,
        histogram,
        mean: total as f64 / shots as f64,
    })
}

/// Scope width beyond which [`exact_optimum`] gives up.
pub const ELIMINATION_MAX_WIDTH: usize = 24;

struct Factor {
    scope: Vec<usize>,
    table: Vec<u32>,
}

impl Factor {
    fn index(&self, values: &[u8]) -> usize {
        self.scope
            .iter()
            .enumerate()
            .map(|(k, &var)| (values[var] as usize) << k)
            .sum()
    }
}

struct Eliminated {
    var: usize,
    scope: Vec<usize>,
    table: Vec<u32>,
}

/// Exact optimum by max-sum variable elimination, optionally with some
/// variables held fixed.
///
/// Unlike [`brute_force_optimum`], ties are broken by the elimination order.
pub fn exact_optimum(
    inst: &XorSatInstance,
    fixed: &[(usize, bool)],
) -> Result<(BitVec, ScoreSummary)> {
    inst.validate()?;
    let mut pinned: Vec<Option<bool>> = vec![None; inst.n];
    for &(var, value) in fixed {
        if var >= inst.n {
            return Err(Error::InvalidInput(format!(
                "fixed variable {var} >= n = {}",
                inst.n
            )));
        }
        pinned[var] = Some(value);
    }

    let mut constant = 0u32;
    let mut by_scope: HashMap<Vec<usize>, Vec<u32>> = HashMap::new();
    for (i, row) in inst.b_rows.iter().enumerate() {
        let mut target = inst.v.get(i);
        let mut scope = Vec::new();
        for &j in row {
            match pinned[j] {
                Some(b) => target ^= b,
                None => scope.push(j),
            }
        }
        scope.sort_unstable();
        if scope.is_empty() {
            constant += u32::from(!target);
            continue;
        }
        let size = 1usize << scope.len();
        let table = by_scope.entry(scope).or_insert_with(|| vec![0; size]);
        for (a, t) in table.iter_mut().enumerate() {
            let parity = a.count_ones() % 2 == 1;
            *t += u32::from(parity == target);
        }
    }
    let mut scopes: Vec<_> = by_scope.into_iter().collect();
    scopes.sort();
    let mut factors: Vec<Option<Factor>> = scopes
        .into_iter()
        .map(|(scope, table)| Some(Factor { scope, table }))
        .collect();

    let mut var_factors: Vec<Vec<usize>> = vec![Vec::new(); inst.n];
    for (f, factor) in factors.iter().enumerate() {
        for &var in &factor.as_ref().unwrap().scope {
            var_factors[var].push(f);
        }
    }

    let mut values = vec![0u8; inst.n];
    for (var, p) in pinned.iter().enumerate() {
        if let Some(b) = p {
            values[var] = u8::from(*b);
        }
    }
    let mut remaining: Vec<usize> = (0..inst.n)
        .filter(|&j| pinned[j].is_none() && !var_factors[j].is_empty())
        .collect();
    let mut trail: Vec<Eliminated> = Vec::new();

    while !remaining.is_empty() {
        let neighbourhood = |var: usize| -> Vec<usize> {
            let mut u: Vec<usize> = var_factors[var]
                .iter()
                .flat_map(|&f| factors[f].as_ref().unwrap().scope.iter().copied())
                .collect();
            u.sort_unstable();
            u.dedup();
            u
        };
        let (pos, _) = remaining
            .iter()
            .enumerate()
            .map(|(pos, &var)| (pos, neighbourhood(var).len()))
            .min_by_key(|&(pos, w)| (w, remaining[pos]))
            .unwrap();
        let var = remaining.swap_remove(pos);
        let scope = neighbourhood(var);
        if scope.len() > ELIMINATION_MAX_WIDTH + 1 {
            return Err(Error::TooLarge {
                what: "elimination width",
                size: scope.len() - 1,
                limit: ELIMINATION_MAX_WIDTH,
            });
        }
        let involved: Vec<usize> = std::mem::take(&mut var_factors[var]);
        let mut table = vec![0u32; 1 << scope.len()];
        let mut assignment = vec![0u8; inst.n];
        for (a, slot) in table.iter_mut().enumerate() {
            for (k, &s) in scope.iter().enumerate() {
                assignment[s] = ((a >> k) & 1) as u8;
            }
            *slot = involved
                .iter()
                .map(|&f| {
                    let factor = factors[f].as_ref().unwrap();
                    factor.table[factor.index(&assignment)]
                })
                .sum();
        }
        for &f in &involved {
            let factor = factors[f].take().unwrap();
            for &s in &factor.scope {
                if s != var {
                    var_factors[s].retain(|&g| g != f);
                }
            }
        }
        let var_pos = scope.iter().position(|&s| s == var).unwrap();
        let reduced_scope: Vec<usize> = scope.iter().copied().filter(|&s| s != var).collect();
        let mut reduced = vec![0u32; 1 << reduced_scope.len()];
        for (r, slot) in reduced.iter_mut().enumerate() {
            let low = r & ((1 << var_pos) - 1);
            let high = (r >> var_pos) << (var_pos + 1);
            let a0 = high | low;
            *slot = table[a0].max(table[a0 | (1 << var_pos)]);
        }
        if reduced_scope.is_empty() {
            constant += reduced[0];
        } else {
            let id = factors.len();
            for &s in &reduced_scope {
                var_factors[s].push(id);
            }
            factors.push(Some(Factor {
                scope: reduced_scope,
                table: reduced,
            }));
        }
        trail.push(Eliminated { var, scope, table });
    }

    for step in trail.iter().rev() {
        let var_pos = step.scope.iter().position(|&s| s == step.var).unwrap();
        values[step.var] = 0;
        let base: usize = step
            .scope
            .iter()
            .enumerate()
            .map(|(k, &s)| (values[s] as usize) << k)
            .sum();
        let with_one = base | (1 << var_pos);
        values[step.var] = u8::from(step.table[with_one] > step.table[base]);
    }
    let x = BitVec::from_bits(&values);
    let score = count_satisfied(inst, &x)?;
    if score.satisfied != constant as usize {
        return Err(Error::Internal(format!(
            "elimination value {constant} != recount {}",
            score.satisfied
        )));
    }
    Ok((x, score))
}

/// Exact optimum, brute force when small enough and elimination otherwise.
pub fn optimum(inst: &XorSatInstance) -> Result<(BitVec, ScoreSummary)> {
    if inst.n <= 20 {
        brute_force_optimum(inst)
    } else {
        exact_optimum(inst, &[])
    }
}
