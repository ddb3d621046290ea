//! ILP to max-XORSAT compilation through XOR gadgets.
//!
//! Every gadget appends rows to an [`Encoder`] and reports how many rows it
//! emitted (`xi`) and how many of them a maximal assignment satisfies (`eta`).
//! Bit vectors are LSB-first throughout.

mod arith;
mod ilp;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::xorsat::XorSatInstance;

pub use arith::{bit_len, wia_row_cost, AdderTree, CompareMode};
pub use ilp::{
    binary_search_beta, direct_ilp_feasible, encode_ilp_c, ilp_c_size_upper_bound, xorsat_feasible,
    BlockReport, EncodingReport, Ilp01,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CarryVariant {
    #[default]
    Classic,
    Majority,
}

impl CarryVariant {
    /// Rows and maximum satisfied rows of one full-adder position.
    pub fn carry_cost(self) -> (usize, usize) {
        match self {
            CarryVariant::Classic => (14, 11),
            CarryVariant::Majority => (6, 5),
        }
    }
}

impl std::str::FromStr for CarryVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classic" => Ok(CarryVariant::Classic),
            "majority" => Ok(CarryVariant::Majority),
            other => Err(Error::InvalidInput(format!(
                "unknown carry variant {other:?}"
            ))),
        }
    }
}

/// One XOR equation: the listed variables sum to `target` mod 2.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Row {
    pub vars: Vec<usize>,
    pub target: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub kind: String,
    pub block: String,
    pub bit: Option<usize>,
}

#[derive(Clone, Debug, Default)]
pub struct VarRegistry {
    provenance: Vec<Provenance>,
}

impl VarRegistry {
    pub fn next_id(&self) -> usize {
        self.provenance.len()
    }

    pub fn get(&self, id: usize) -> Option<&Provenance> {
        self.provenance.get(id)
    }

    pub fn len(&self) -> usize {
        self.provenance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.provenance.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GadgetEmission {
    pub rows: Vec<Row>,
    pub xi: usize,
    pub eta: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub count: usize,
    pub xi: usize,
    pub eta: usize,
}

#[derive(Clone, Copy, Debug)]
struct Mark {
    rows: usize,
    eta: usize,
}

/// Outcome of pinning a single variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Pin {
    Emitted,
    AlreadyPinned,
    Conflict,
}

/// Row sink with sequential variable allocation and duplicate detection.
#[derive(Clone, Debug)]
pub struct Encoder {
    variant: CarryVariant,
    registry: VarRegistry,
    rows: Vec<Row>,
    row_index: HashMap<Vec<usize>, usize>,
    eta: usize,
    block: String,
    breakdown: BTreeMap<String, Tally>,
    complements: HashMap<usize, usize>,
    skipped_duplicates: usize,
    conflicts: usize,
    contradictions: usize,
}

impl Encoder {
    pub fn new(variant: CarryVariant) -> Self {
        Encoder {
            variant,
            registry: VarRegistry::default(),
            rows: Vec::new(),
            row_index: HashMap::new(),
            eta: 0,
            block: String::from("root"),
            breakdown: BTreeMap::new(),
            complements: HashMap::new(),
            skipped_duplicates: 0,
            conflicts: 0,
            contradictions: 0,
        }
    }

    /// Registers `count` free input variables with ids `0..count`.
    pub fn with_inputs(variant: CarryVariant, count: usize) -> (Self, Vec<usize>) {
        let mut enc = Encoder::new(variant);
        let ids = (0..count).map(|i| enc.fresh("input", Some(i))).collect();
        (enc, ids)
    }

    pub fn variant(&self) -> CarryVariant {
        self.variant
    }

    pub fn registry(&self) -> &VarRegistry {
        &self.registry
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn xi(&self) -> usize {
        self.rows.len()
    }

    pub fn eta(&self) -> usize {
        self.eta
    }

    pub fn breakdown(&self) -> &BTreeMap<String, Tally> {
        &self.breakdown
    }

    /// Pins skipped because an identical lone row already existed.
    pub fn skipped_duplicates(&self) -> usize {
        self.skipped_duplicates
    }

    /// Pins dropped because the variable was already pinned the other way.
    pub fn conflicts(&self) -> usize {
        self.conflicts
    }

    pub fn contradictions(&self) -> usize {
        self.contradictions
    }

    pub fn complement_count(&self) -> usize {
        self.complements.len()
    }

    pub fn set_block(&mut self, label: impl Into<String>) {
        self.block = label.into();
    }

    pub fn fresh(&mut self, kind: &str, bit: Option<usize>) -> usize {
        let id = self.registry.provenance.len();
        self.registry.provenance.push(Provenance {
            kind: kind.to_string(),
            block: self.block.clone(),
            bit,
        });
        id
    }

    pub fn instance(&self) -> XorSatInstance {
        let b_rows = self.rows.iter().map(|r| r.vars.clone()).collect();
        let v = BitVec::from_bools(&self.rows.iter().map(|r| r.target).collect::<Vec<_>>());
        XorSatInstance::new(self.registry.len(), b_rows, v)
            .expect("encoder rows reference allocated variables")
    }

    fn push(&mut self, vars: &[usize], target: bool) -> Result<()> {
        let mut key = vars.to_vec();
        key.sort_unstable();
        if key.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Internal(format!("row repeats a variable: {vars:?}")));
        }
        if let Some(&existing) = self.row_index.get(&key) {
            return Err(Error::Internal(format!(
                "row {key:?} duplicates row {existing}"
            )));
        }
        self.row_index.insert(key.clone(), self.rows.len());
        self.rows.push(Row { vars: key, target });
        Ok(())
    }

    /// Pushes a row that a maximal assignment always satisfies.
    fn hard(&mut self, vars: &[usize], target: bool) -> Result<()> {
        self.push(vars, target)?;
        self.eta += 1;
        Ok(())
    }

    fn pin(&mut self, var: usize, target: bool) -> Result<Pin> {
        match self.row_index.get(&vec![var]) {
            Some(&i) if self.rows[i].target == target => {
                self.skipped_duplicates += 1;
                Ok(Pin::AlreadyPinned)
            }
            Some(_) => {
                self.conflicts += 1;
                Ok(Pin::Conflict)
            }
            None => {
                self.hard(&[var], target)?;
                Ok(Pin::Emitted)
            }
        }
    }

    fn mark(&self) -> Mark {
        Mark {
            rows: self.rows.len(),
            eta: self.eta,
        }
    }

    fn finish(&mut self, mark: Mark, kind: &str) -> GadgetEmission {
        let rows = self.rows[mark.rows..].to_vec();
        let emission = GadgetEmission {
            xi: rows.len(),
            eta: self.eta - mark.eta,
            rows,
        };
        let t = self.breakdown.entry(kind.to_string()).or_default();
        t.count += 1;
        t.xi += emission.xi;
        t.eta += emission.eta;
        emission
    }

    fn and_rows(&mut self, x: usize, y: usize, z: usize) -> Result<()> {
        self.push(&[x, y, z], true)?;
        self.push(&[x, z], false)?;
        self.push(&[y, z], false)?;
        self.push(&[z], false)?;
        self.eta += 3;
        Ok(())
    }

    /// `z = x·y` in 4 rows, 3 satisfiable.
    pub fn emit_and(&mut self, x: usize, y: usize, z: usize) -> Result<GadgetEmission> {
        let mark = self.mark();
        self.and_rows(x, y, z)?;
        Ok(self.finish(mark, "and"))
    }

    /// Half adder `s = u+v`, `c = u·v`: AND(u,v→c) plus the sum row.
    fn carry1_rows(&mut self, u: usize, v: usize, bit: usize) -> Result<(usize, usize)> {
        let s = self.fresh("sum", Some(bit));
        let c = self.fresh("carry", Some(bit));
        self.and_rows(u, v, c)?;
        self.hard(&[s, u, v], false)?;
        Ok((s, c))
    }

    fn carry_rows(
        &mut self,
        u: usize,
        v: usize,
        c_prev: usize,
        bit: usize,
    ) -> Result<(usize, usize)> {
        let s = self.fresh("sum", Some(bit));
        let c = self.fresh("carry", Some(bit));
        match self.variant {
            CarryVariant::Classic => {
                let p = self.fresh("and_p", Some(bit));
                let q = self.fresh("and_q", Some(bit));
                let r = self.fresh("and_r", Some(bit));
                self.hard(&[c, p, q, r], false)?;
                self.and_rows(v, u, p)?;
                self.and_rows(v, c_prev, q)?;
                self.and_rows(u, c_prev, r)?;
            }
            CarryVariant::Majority => {
                let t = self.fresh("maj_helper", Some(bit));
                self.push(&[c, u], false)?;
                self.push(&[c, v], false)?;
                self.push(&[c, c_prev], false)?;
                self.push(&[u, t], false)?;
                self.push(&[v, c_prev, c, t], true)?;
                self.eta += 4;
            }
        }
        self.hard(&[s, u, v, c_prev], false)?;
        Ok((s, c))
    }

    /// `c = x OR c_prev`, `z = x + c_prev + 1`: complemented AND plus the sum row.
    fn carry2_rows(&mut self, x: usize, c_prev: usize, bit: usize) -> Result<(usize, usize)> {
        let z = self.fresh("cmp_sum", Some(bit));
        let c = self.fresh("cmp_carry", Some(bit));
        self.push(&[x, c_prev, c], false)?;
        self.push(&[x, c], false)?;
        self.push(&[c_prev, c], false)?;
        self.push(&[c], true)?;
        self.eta += 3;
        self.hard(&[z, x, c_prev], true)?;
        Ok((z, c))
    }

    /// Full adder position; returns the emission and `(s, c)`.
    pub fn emit_carry(
        &mut self,
        u: usize,
        v: usize,
        c_prev: usize,
    ) -> Result<(GadgetEmission, usize, usize)> {
        let mark = self.mark();
        let (s, c) = self.carry_rows(u, v, c_prev, 0)?;
        Ok((self.finish(mark, "carry"), s, c))
    }

    pub fn emit_carry1(&mut self, u: usize, v: usize) -> Result<(GadgetEmission, usize, usize)> {
        let mark = self.mark();
        let (s, c) = self.carry1_rows(u, v, 0)?;
        Ok((self.finish(mark, "carry1"), s, c))
    }

    /// Returns the emission and `(z, c)`.
    pub fn emit_carry2(
        &mut self,
        x: usize,
        c_prev: usize,
    ) -> Result<(GadgetEmission, usize, usize)> {
        let mark = self.mark();
        let (z, c) = self.carry2_rows(x, c_prev, 0)?;
        Ok((self.finish(mark, "carry2"), z, c))
    }

    /// Three rows of which only two can hold: marks a constraint that no
    /// assignment satisfies.
    pub fn emit_contradiction(&mut self) -> Result<GadgetEmission> {
        let mark = self.mark();
        let a = self.fresh("contradiction", Some(0));
        let b = self.fresh("contradiction", Some(1));
        self.push(&[a], false)?;
        self.push(&[b], false)?;
        self.push(&[a, b], true)?;
        self.eta += 3;
        self.contradictions += 1;
        Ok(self.finish(mark, "contradiction"))
    }

    /// Complement literal `x̄` with the hard row `x + x̄ = 1`, shared per variable.
    pub fn complement(&mut self, x: usize) -> Result<usize> {
        if let Some(&c) = self.complements.get(&x) {
            return Ok(c);
        }
        let mark = self.mark();
        let c = self.fresh("complement", None);
        self.hard(&[x, c], true)?;
        self.finish(mark, "complement");
        self.complements.insert(x, c);
        Ok(c)
    }
}

#[cfg(test)]
mod tests;
