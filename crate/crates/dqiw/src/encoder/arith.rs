use serde::{Deserialize, Serialize};

use super::{CarryVariant, Encoder, GadgetEmission, Pin};
use crate::error::{Error, Result};

/// Number of bits needed for `a`, at least 1.
pub fn bit_len(a: u64) -> usize {
    (64 - a.leading_zeros() as usize).max(1)
}

fn bit(a: u64, k: usize) -> bool {
    k < 64 && (a >> k) & 1 == 1
}

/// Rows and maximum satisfied rows for one WIA position.
pub fn wia_row_cost(a1: bool, a2: bool, k: usize, variant: CarryVariant) -> (usize, usize) {
    match (a1, a2) {
        (false, false) => (2, 2),
        (true, false) | (false, true) if k == 0 => (2, 2),
        (true, false) | (false, true) => (5, 4),
        (true, true) if k == 0 => (5, 4),
        (true, true) => variant.carry_cost(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompareMode {
    Lt,
    Ge,
}

/// Shape of the adder tree behind a multiple integer adder.
///
/// `layers[j-1]` is `m_j`; `mu[j-1][k-1]` is the width of node `w_{j,k}`,
/// the last layer holding the single root `y`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdderTree {
    pub alphas: Vec<usize>,
    pub layers: Vec<usize>,
    pub depth: usize,
    pub mu: Vec<Vec<usize>>,
}

impl AdderTree {
    /// Layer counts and widths from the term widths alone.
    pub fn from_alphas(alphas: &[usize]) -> Self {
        let n = alphas.len();
        assert!(n >= 2, "adder tree needs at least two terms");
        let m1 = n.div_ceil(2);
        let mut layers = vec![m1];
        let mut mu = vec![(0..m1)
            .map(|k| {
                if 2 * k + 1 < n {
                    alphas[2 * k].max(alphas[2 * k + 1]) + 1
                } else {
                    alphas[n - 1]
                }
            })
            .collect::<Vec<_>>()];
        while *layers.last().unwrap() > 1 {
            let prev = mu.last().unwrap().clone();
            let count = prev.len().div_ceil(2);
            let next = (0..count)
                .map(|k| {
                    if 2 * k + 1 < prev.len() {
                        prev[2 * k].max(prev[2 * k + 1]) + 1
                    } else {
                        prev[prev.len() - 1]
                    }
                })
                .collect();
            layers.push(count);
            mu.push(next);
        }
        AdderTree {
            alphas: alphas.to_vec(),
            depth: layers.len() - 1,
            layers,
            mu,
        }
    }

    pub fn output_width(&self) -> usize {
        self.mu.last().unwrap()[0]
    }

    /// Widths of the two operands of every IA node, layer by layer.
    pub fn ia_operands(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for layer in &self.mu[..self.mu.len() - 1] {
            for pair in layer.chunks(2) {
                if let [a, b] = pair {
                    out.push((*a, *b));
                }
            }
        }
        out
    }

    /// Rows of the whole adder tree, summed gadget by gadget.
    pub fn xi(&self, coeffs: &[u64], variant: CarryVariant) -> usize {
        self.count(coeffs, variant).0
    }

    pub fn eta(&self, coeffs: &[u64], variant: CarryVariant) -> usize {
        self.count(coeffs, variant).1
    }

    /// Zero-padding rows inserted to align IA operands.
    pub fn padding(&self) -> usize {
        self.ia_operands().iter().map(|(a, b)| a.abs_diff(*b)).sum()
    }

    fn count(&self, coeffs: &[u64], variant: CarryVariant) -> (usize, usize) {
        let n = coeffs.len();
        let (mut xi, mut eta) = (0, 0);
        for pair in coeffs.chunks(2) {
            match pair {
                [a1, a2] => {
                    let ell = bit_len(*a1).max(bit_len(*a2));
                    xi += 1;
                    eta += 1;
                    for k in 0..ell {
                        let (f, g) = wia_row_cost(bit(*a1, k), bit(*a2, k), k, variant);
                        xi += f;
                        eta += g;
                    }
                }
                [a] => {
                    xi += bit_len(*a);
                    eta += bit_len(*a);
                }
                _ => unreachable!(),
            }
        }
        debug_assert_eq!(n.div_ceil(2), self.layers[0]);
        let (f, g) = variant.carry_cost();
        for (a, b) in self.ia_operands() {
            let ell = a.max(b);
            let pad = a.abs_diff(b);
            xi += 5 + f * (ell - 1) + 1 + pad;
            eta += 4 + g * (ell - 1) + 1 + pad;
        }
        (xi, eta)
    }
}

impl Encoder {
    fn zero_padded(&mut self, bits: &[usize], width: usize) -> Result<Vec<usize>> {
        let mut out = bits.to_vec();
        while out.len() < width {
            let pad = self.fresh("pad", Some(out.len()));
            self.hard(&[pad], false)?;
            out.push(pad);
        }
        Ok(out)
    }

    fn ia_rows(&mut self, u: &[usize], v: &[usize]) -> Result<Vec<usize>> {
        if u.len() != v.len() || u.is_empty() {
            return Err(Error::Internal(format!(
                "IA operands of widths {} and {}",
                u.len(),
                v.len()
            )));
        }
        let ell = u.len();
        let (s0, mut carry) = self.carry1_rows(u[0], v[0], 0)?;
        let mut sum = vec![s0];
        for k in 1..ell {
            let (s, c) = self.carry_rows(u[k], v[k], carry, k)?;
            sum.push(s);
            carry = c;
        }
        let top = self.fresh("sum", Some(ell));
        self.hard(&[top, carry], false)?;
        sum.push(top);
        Ok(sum)
    }

    fn wia_rows(&mut self, a1: u64, a2: u64, x1: usize, x2: usize) -> Result<Vec<usize>> {
        let ell = bit_len(a1).max(bit_len(a2));
        let mut y = Vec::with_capacity(ell + 1);
        let mut carry = usize::MAX;
        for k in 0..ell {
            let (yk, ck) = match (bit(a1, k), bit(a2, k), k) {
                (false, false, _) => {
                    let yk = self.fresh("sum", Some(k));
                    let ck = self.fresh("carry", Some(k));
                    self.hard(&[ck], false)?;
                    if k == 0 {
                        self.hard(&[yk], false)?;
                    } else {
                        self.hard(&[yk, carry], false)?;
                    }
                    (yk, ck)
                }
                (true, false, 0) | (false, true, 0) => {
                    let x = if bit(a1, 0) { x1 } else { x2 };
                    let yk = self.fresh("sum", Some(0));
                    let ck = self.fresh("carry", Some(0));
                    self.hard(&[ck], false)?;
                    self.hard(&[yk, x], false)?;
                    (yk, ck)
                }
                (true, false, _) => self.carry1_rows(x1, carry, k)?,
                (false, true, _) => self.carry1_rows(x2, carry, k)?,
                (true, true, 0) => self.carry1_rows(x1, x2, 0)?,
                (true, true, _) => self.carry_rows(x1, x2, carry, k)?,
            };
            y.push(yk);
            carry = ck;
        }
        let top = self.fresh("sum", Some(ell));
        self.hard(&[top, carry], false)?;
        y.push(top);
        Ok(y)
    }

    fn hwa_rows(&mut self, a: u64, x: usize) -> Result<Vec<usize>> {
        let ell = bit_len(a);
        let mut y = Vec::with_capacity(ell);
        for k in 0..ell {
            let yk = self.fresh("sum", Some(k));
            if bit(a, k) {
                self.hard(&[x, yk], false)?;
            } else {
                self.hard(&[yk], false)?;
            }
            y.push(yk);
        }
        Ok(y)
    }

    fn mia_rows(
        &mut self,
        coeffs: &[u64],
        xs: &[usize],
    ) -> Result<(Vec<usize>, Option<AdderTree>)> {
        if coeffs.len() != xs.len() || coeffs.is_empty() {
            return Err(Error::InvalidInput(format!(
                "MIA with {} coefficients and {} variables",
                coeffs.len(),
                xs.len()
            )));
        }
        if coeffs.len() == 1 {
            return Ok((self.hwa_rows(coeffs[0], xs[0])?, None));
        }
        let tree = AdderTree::from_alphas(&coeffs.iter().map(|&a| bit_len(a)).collect::<Vec<_>>());
        let mut nodes = Vec::with_capacity(tree.layers[0]);
        for (pair, vars) in coeffs.chunks(2).zip(xs.chunks(2)) {
            match (pair, vars) {
                ([a1, a2], [x1, x2]) => nodes.push(self.wia_rows(*a1, *a2, *x1, *x2)?),
                ([a], [x]) => nodes.push(self.hwa_rows(*a, *x)?),
                _ => unreachable!(),
            }
        }
        while nodes.len() > 1 {
            let mut next = Vec::with_capacity(nodes.len().div_ceil(2));
            let mut iter = nodes.into_iter();
            while let Some(left) = iter.next() {
                match iter.next() {
                    Some(right) => {
                        let width = left.len().max(right.len());
                        let u = self.zero_padded(&left, width)?;
                        let v = self.zero_padded(&right, width)?;
                        next.push(self.ia_rows(&u, &v)?);
                    }
                    None => next.push(left),
                }
            }
            nodes = next;
        }
        let y = nodes.pop().unwrap();
        if y.len() != tree.output_width() {
            return Err(Error::Internal(format!(
                "MIA output width {} != tree width {}",
                y.len(),
                tree.output_width()
            )));
        }
        Ok((y, Some(tree)))
    }

    fn comparator_rows(&mut self, x: &[usize], b: u64, mode: CompareMode) -> Result<()> {
        let ell = x.len();
        if ell == 0 || ell > 62 || b >= (1u64 << ell) {
            return Err(Error::InvalidInput(format!(
                "comparator bound {b} does not fit in {ell} bits"
            )));
        }
        let b_bar = (1u64 << ell) - b - 1;
        let z0 = self.fresh("cmp_sum", Some(0));
        let mut carry = self.fresh("cmp_carry", Some(0));
        if bit(b_bar, 0) {
            self.hard(&[carry], true)?;
            self.hard(&[x[0], z0], false)?;
        } else {
            self.hard(&[carry, x[0]], false)?;
            self.hard(&[x[0], z0], true)?;
        }
        if ell == 1 {
            if self.pin(carry, mode == CompareMode::Ge)? == Pin::Conflict {
                self.emit_contradiction()?;
            }
            return Ok(());
        }
        for k in 1..ell - 1 {
            let (_, c) = if bit(b_bar, k) {
                self.carry2_rows(x[k], carry, k)?
            } else {
                self.carry1_rows(x[k], carry, k)?
            };
            carry = c;
        }
        let last = ell - 1;
        self.closing_rows(x[last], carry, bit(b_bar, last), mode, last)
    }

    /// Last comparator position with the outgoing carry pinned, merged into
    /// one five-row gadget over `(x, c_prev)` so no lone row lands on a carry
    /// that already owns one.
    fn closing_rows(
        &mut self,
        x: usize,
        c_prev: usize,
        b_bar: bool,
        mode: CompareMode,
        bit: usize,
    ) -> Result<()> {
        let z = self.fresh("cmp_sum", Some(bit));
        let h = self.fresh("cmp_close", Some(0));
        match (b_bar, mode) {
            // x·c' = 1
            (false, CompareMode::Ge) => {
                self.push(&[h], false)?;
                self.push(&[x, c_prev], true)?;
                self.push(&[x, h], true)?;
                self.push(&[c_prev, h], true)?;
                self.push(&[x, c_prev, h], false)?;
            }
            // x·c' = 0
            (false, CompareMode::Lt) => {
                let h2 = self.fresh("cmp_close", Some(1));
                self.push(&[h], false)?;
                self.push(&[h2], false)?;
                self.push(&[x, c_prev], true)?;
                self.push(&[x, h], false)?;
                self.push(&[c_prev, h, h2], false)?;
            }
            // x OR c' = 1
            (true, CompareMode::Ge) => {
                let h2 = self.fresh("cmp_close", Some(1));
                self.push(&[h], false)?;
                self.push(&[h2], false)?;
                self.push(&[x, c_prev], true)?;
                self.push(&[x, h], true)?;
                self.push(&[c_prev, h, h2], true)?;
            }
            // x OR c' = 0
            (true, CompareMode::Lt) => {
                self.push(&[h], false)?;
                self.push(&[x, c_prev], true)?;
                self.push(&[x, h], false)?;
                self.push(&[c_prev, h], false)?;
                self.push(&[x, c_prev, h], false)?;
            }
        }
        self.eta += 4;
        self.hard(&[z, x, c_prev], b_bar)?;
        Ok(())
    }

    /// Pins every bit of `x` to the bits of `b`; returns false when some bit
    /// was already pinned to the opposite value.
    fn equality_rows(&mut self, x: &[usize], b: u64) -> Result<bool> {
        let mut consistent = true;
        for (k, &xk) in x.iter().enumerate() {
            if self.pin(xk, bit(b, k))? == Pin::Conflict {
                consistent = false;
            }
        }
        Ok(consistent)
    }

    /// Integer adder `s = u + v` over equal-width operands.
    pub fn emit_ia(&mut self, u: &[usize], v: &[usize]) -> Result<(GadgetEmission, Vec<usize>)> {
        let mark = self.mark();
        let s = self.ia_rows(u, v)?;
        Ok((self.finish(mark, "ia"), s))
    }

    /// Weighted adder `y = a1·x1 + a2·x2`.
    pub fn emit_wia(
        &mut self,
        a1: u64,
        a2: u64,
        x1: usize,
        x2: usize,
    ) -> Result<(GadgetEmission, Vec<usize>)> {
        let mark = self.mark();
        let y = self.wia_rows(a1, a2, x1, x2)?;
        Ok((self.finish(mark, "wia"), y))
    }

    /// Half weighted adder `y = a·x`.
    pub fn emit_hwa(&mut self, a: u64, x: usize) -> Result<(GadgetEmission, Vec<usize>)> {
        let mark = self.mark();
        let y = self.hwa_rows(a, x)?;
        Ok((self.finish(mark, "hwa"), y))
    }

    /// Multiple integer adder `y = Σ a_k x_k`; a single term becomes an HWA.
    pub fn emit_mia(
        &mut self,
        coeffs: &[u64],
        xs: &[usize],
    ) -> Result<(GadgetEmission, Vec<usize>, Option<AdderTree>)> {
        let mark = self.mark();
        let (y, tree) = self.mia_rows(coeffs, xs)?;
        Ok((self.finish(mark, "mia"), y, tree))
    }

    /// `x < b` (lt) or `x ≥ b` (ge) for `0 ≤ b < 2^ℓ`.
    pub fn emit_comparator(
        &mut self,
        x: &[usize],
        b: u64,
        mode: CompareMode,
    ) -> Result<GadgetEmission> {
        let mark = self.mark();
        self.comparator_rows(x, b, mode)?;
        let kind = match mode {
            CompareMode::Lt => "comparator_lt",
            CompareMode::Ge => "comparator_ge",
        };
        Ok(self.finish(mark, kind))
    }

    /// `x = b` bit by bit.
    pub fn emit_equality(&mut self, x: &[usize], b: u64) -> Result<GadgetEmission> {
        let mark = self.mark();
        if !self.equality_rows(x, b)? {
            self.emit_contradiction()?;
        }
        Ok(self.finish(mark, "equality"))
    }

    pub(super) fn pad_to(&mut self, bits: &[usize], width: usize) -> Result<Vec<usize>> {
        let mark = self.mark();
        let out = self.zero_padded(bits, width)?;
        if out.len() > bits.len() {
            self.finish(mark, "pad");
        }
        Ok(out)
    }
}
