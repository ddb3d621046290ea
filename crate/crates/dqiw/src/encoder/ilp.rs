use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::arith::{bit_len, AdderTree, CompareMode};
use super::{CarryVariant, Encoder, Tally};
use crate::error::{Error, Result};
use crate::xorsat::{exact_optimum, XorSatInstance};

/// Maximize `cᵀx` subject to `Ax ≤ b`, `A_eq x = b_eq`, `x ∈ {0,1}ⁿ`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ilp01 {
    pub c: Vec<i64>,
    #[serde(rename = "A", default)]
    pub a: Vec<Vec<i64>>,
    #[serde(default)]
    pub b: Vec<i64>,
    #[serde(rename = "A_eq", default)]
    pub a_eq: Vec<Vec<i64>>,
    #[serde(default)]
    pub b_eq: Vec<i64>,
}

impl Ilp01 {
    pub fn new(
        c: Vec<i64>,
        a: Vec<Vec<i64>>,
        b: Vec<i64>,
        a_eq: Vec<Vec<i64>>,
        b_eq: Vec<i64>,
    ) -> Result<Self> {
        let ilp = Ilp01 {
            c,
            a,
            b,
            a_eq,
            b_eq,
        };
        ilp.validate()?;
        Ok(ilp)
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }

    pub fn p(&self) -> usize {
        self.a_eq.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if self.a.len() != self.b.len() {
            return Err(Error::InvalidInput(format!(
                "field b has {} entries but A has {} rows",
                self.b.len(),
                self.a.len()
            )));
        }
        if self.a_eq.len() != self.b_eq.len() {
            return Err(Error::InvalidInput(format!(
                "field b_eq has {} entries but A_eq has {} rows",
                self.b_eq.len(),
                self.a_eq.len()
            )));
        }
        for (name, rows) in [("A", &self.a), ("A_eq", &self.a_eq)] {
            for (i, row) in rows.iter().enumerate() {
                if row.len() != n {
                    return Err(Error::InvalidInput(format!(
                        "field {name}[{i}] has {} entries, expected {n}",
                        row.len()
                    )));
                }
            }
        }
        let limit = 1i64 << 40;
        let all = self
            .c
            .iter()
            .chain(self.a.iter().flatten())
            .chain(&self.b)
            .chain(self.a_eq.iter().flatten())
            .chain(&self.b_eq);
        if all.into_iter().any(|v| v.abs() >= limit) {
            return Err(Error::InvalidInput(format!(
                "coefficients must be below 2^40 in magnitude"
            )));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ilp: Ilp01 = serde_json::from_str(text)?;
        ilp.validate()?;
        Ok(ilp)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ilp serializes")
    }

    pub fn objective(&self, x: &[bool]) -> i64 {
        dot(&self.c, x)
    }

    pub fn is_feasible(&self, x: &[bool]) -> bool {
        self.a.iter().zip(&self.b).all(|(row, &b)| dot(row, x) <= b)
            && self
                .a_eq
                .iter()
                .zip(&self.b_eq)
                .all(|(row, &b)| dot(row, x) == b)
    }

    /// Lowest and highest attainable objective values.
    pub fn objective_range(&self) -> (i64, i64) {
        let lo = self.c.iter().filter(|&&c| c < 0).sum();
        let hi = self.c.iter().filter(|&&c| c > 0).sum();
        (lo, hi)
    }
}

fn dot(row: &[i64], x: &[bool]) -> i64 {
    row.iter()
        .zip(x)
        .filter(|(_, &xi)| xi)
        .map(|(a, _)| a)
        .sum()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockReport {
    pub label: String,
    pub kind: String,
    pub terms: usize,
    pub width: usize,
    pub xi: usize,
    pub eta: usize,
    pub xi_formula: usize,
    pub eta_formula: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingReport {
    pub beta: i64,
    pub variant: CarryVariant,
    pub original_vars: usize,
    pub total_vars: usize,
    pub xi: usize,
    pub eta: usize,
    pub xi_formula: usize,
    pub eta_formula: usize,
    pub complements: usize,
    pub skipped_duplicates: usize,
    pub contradictions: usize,
    pub blocks: Vec<BlockReport>,
    pub breakdown: BTreeMap<String, Tally>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Relation {
    Ge,
    Le,
    Eq,
}

struct Normalized {
    coeffs: Vec<u64>,
    vars: Vec<usize>,
    rhs: i64,
}

fn normalize(enc: &mut Encoder, row: &[i64], inputs: &[usize], rhs: i64) -> Result<Normalized> {
    let mut out = Normalized {
        coeffs: Vec::new(),
        vars: Vec::new(),
        rhs,
    };
    for (j, &a) in row.iter().enumerate() {
        if a > 0 {
            out.coeffs.push(a as u64);
            out.vars.push(inputs[j]);
        } else if a < 0 {
            out.coeffs.push(a.unsigned_abs());
            out.vars.push(enc.complement(inputs[j])?);
            out.rhs += -a;
        }
    }
    Ok(out)
}

fn mia_formula(coeffs: &[u64], variant: CarryVariant) -> (usize, usize) {
    if coeffs.len() == 1 {
        let l = bit_len(coeffs[0]);
        return (l, l);
    }
    let tree = AdderTree::from_alphas(&coeffs.iter().map(|&a| bit_len(a)).collect::<Vec<_>>());
    (tree.xi(coeffs, variant), tree.eta(coeffs, variant))
}

fn encode_row(
    enc: &mut Encoder,
    label: String,
    rel: Relation,
    row: &[i64],
    inputs: &[usize],
    rhs: i64,
) -> Result<BlockReport> {
    enc.set_block(label.clone());
    let rows0 = enc.xi();
    let eta0 = enc.eta();
    let adj0 = (
        enc.skipped_duplicates(),
        enc.conflicts(),
        enc.contradictions(),
    );
    let complements_before = enc.complement_count();
    let norm = normalize(enc, row, inputs, rhs)?;
    let kind = match rel {
        Relation::Ge => "objective_ge",
        Relation::Le => "inequality_lt",
        Relation::Eq => "equality",
    };
    let mut formula = (0usize, 0usize);
    let mut width = 0;
    if norm.coeffs.is_empty() {
        let ok = match rel {
            Relation::Ge => 0 >= norm.rhs,
            Relation::Le => 0 <= norm.rhs,
            Relation::Eq => 0 == norm.rhs,
        };
        if !ok {
            enc.emit_contradiction()?;
        }
    } else {
        let (_, y, _) = enc.emit_mia(&norm.coeffs, &norm.vars)?;
        formula = mia_formula(&norm.coeffs, enc.variant());
        width = y.len();
        match rel {
            Relation::Ge | Relation::Le => {
                let (bound, mode) = match rel {
                    Relation::Ge => (norm.rhs.max(0), CompareMode::Ge),
                    _ => (norm.rhs + 1, CompareMode::Lt),
                };
                if bound <= 0 && mode == CompareMode::Lt {
                    enc.emit_contradiction()?;
                } else {
                    let bound = bound as u64;
                    let w = width.max(bit_len(bound));
                    let y = enc.pad_to(&y, w)?;
                    enc.emit_comparator(&y, bound, mode)?;
                    formula.0 += (w - width) + 5 * w - 2;
                    formula.1 += (w - width) + 4 * w - 1;
                    width = w;
                }
            }
            Relation::Eq => {
                if norm.rhs < 0 || (width < 63 && norm.rhs >= 1i64 << width) {
                    enc.emit_contradiction()?;
                } else {
                    enc.emit_equality(&y, norm.rhs as u64)?;
                    formula.0 += width;
                    formula.1 += width;
                }
            }
        }
    }
    let complements = enc.complement_count() - complements_before;
    formula.0 += complements;
    formula.1 += complements;
    let skipped = enc.skipped_duplicates() - adj0.0;
    let conflicts = enc.conflicts() - adj0.1;
    let contradictions = enc.contradictions() - adj0.2;
    let xi_formula = formula.0 + 3 * contradictions - skipped - conflicts;
    let eta_formula = formula.1 + 3 * contradictions - skipped - conflicts;
    Ok(BlockReport {
        label,
        kind: kind.to_string(),
        terms: norm.coeffs.len(),
        width,
        xi: enc.xi() - rows0,
        eta: enc.eta() - eta0,
        xi_formula,
        eta_formula,
    })
}

/// Encodes `cᵀx ≥ β`, `Ax < b+1`, `A_eq x = b_eq` as one max-XORSAT instance.
///
/// Variables `0..n` of the instance are the ILP variables. The system is
/// feasible iff the instance's optimum satisfies exactly `report.eta` rows.
pub fn encode_ilp_c(
    ilp: &Ilp01,
    beta: i64,
    variant: CarryVariant,
) -> Result<(XorSatInstance, EncodingReport)> {
    ilp.validate()?;
    let (mut enc, inputs) = Encoder::with_inputs(variant, ilp.n());
    let mut blocks = Vec::new();
    let jobs = std::iter::once(("objective".to_string(), Relation::Ge, &ilp.c, beta))
        .chain(
            ilp.a
                .iter()
                .zip(&ilp.b)
                .enumerate()
                .map(|(i, (row, &b))| (format!("A[{i}]"), Relation::Le, row, b)),
        )
        .chain(
            ilp.a_eq
                .iter()
                .zip(&ilp.b_eq)
                .enumerate()
                .map(|(i, (row, &b))| (format!("A_eq[{i}]"), Relation::Eq, row, b)),
        );
    for (label, rel, row, rhs) in jobs {
        blocks.push(encode_row(&mut enc, label, rel, row, &inputs, rhs)?);
    }
    let inst = enc.instance();
    inst.ensure_distinct_rows()?;
    let xi_formula = blocks.iter().map(|b| b.xi_formula).sum();
    let eta_formula = blocks.iter().map(|b| b.eta_formula).sum();
    let report = EncodingReport {
        beta,
        variant,
        original_vars: ilp.n(),
        total_vars: inst.n,
        xi: enc.xi(),
        eta: enc.eta(),
        xi_formula,
        eta_formula,
        complements: enc.complement_count(),
        skipped_duplicates: enc.skipped_duplicates(),
        contradictions: enc.contradictions(),
        blocks,
        breakdown: enc.breakdown().clone(),
    };
    if report.xi != inst.m || report.xi != report.xi_formula || report.eta != report.eta_formula {
        return Err(Error::Internal(format!(
            "row accounting mismatch: emitted {} rows, recorded xi {} (formula {}), eta {} (formula {})",
            inst.m, report.xi, report.xi_formula, report.eta, report.eta_formula
        )));
    }
    Ok((inst, report))
}

/// Largest `β` in the attainable objective range with `oracle(β)` true.
pub fn binary_search_beta<F>(ilp: &Ilp01, mut oracle: F) -> Result<i64>
where
    F: FnMut(i64) -> Result<bool>,
{
    let (mut lo, mut hi) = ilp.objective_range();
    if !oracle(lo)? {
        return Err(Error::Infeasible(format!(
            "constraints infeasible: no assignment reaches objective {lo}"
        )));
    }
    while lo < hi {
        let mid = lo + (hi - lo + 1) / 2;
        if oracle(mid)? {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ok(lo)
}

/// Feasibility of ILP-c at `β` decided on the encoded instance.
pub fn xorsat_feasible(ilp: &Ilp01, beta: i64, variant: CarryVariant) -> Result<bool> {
    let (inst, report) = encode_ilp_c(ilp, beta, variant)?;
    let (_, score) = exact_optimum(&inst, &[])?;
    if score.satisfied > report.eta {
        return Err(Error::Internal(format!(
            "optimum {} exceeds eta {}",
            score.satisfied, report.eta
        )));
    }
    Ok(score.satisfied == report.eta)
}

/// Feasibility of ILP-c at `β` by enumerating the original variables.
pub fn direct_ilp_feasible(ilp: &Ilp01, beta: i64) -> Result<bool> {
    let n = ilp.n();
    if n > 24 {
        return Err(Error::TooLarge {
            what: "ILP variables for enumeration",
            size: n,
            limit: 24,
        });
    }
    let mut x = vec![false; n];
    for word in 0u64..(1u64 << n) {
        for (j, xj) in x.iter_mut().enumerate() {
            *xj = (word >> j) & 1 == 1;
        }
        if ilp.objective(&x) >= beta && ilp.is_feasible(&x) {
            return Ok(true);
        }
    }
    Ok(false)
}

fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Closed-form upper bound on the row count of ILP-c from `(n, m, p, α, α₌, γ)`.
pub fn ilp_c_size_upper_bound(ilp: &Ilp01) -> usize {
    let n = ilp.n();
    let delta = ceil_log2(n);
    let width = |vals: &mut dyn Iterator<Item = &i64>| {
        vals.map(|v| bit_len(v.unsigned_abs())).max().unwrap_or(1)
    };
    let gamma = width(&mut ilp.c.iter());
    let alpha = width(&mut ilp.a.iter().flatten());
    let alpha_eq = width(&mut ilp.a_eq.iter().flatten());
    let block = |w: usize| 14 * (2 * w + 4) * (1usize << delta) + n / 2 + w + 5 * (w + delta);
    block(gamma) + ilp.m() * block(alpha) + ilp.p() * block(alpha_eq)
}
