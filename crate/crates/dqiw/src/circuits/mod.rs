//! Gate-level DQI circuits with a coherent BP1 decoder, and block-wise
//! resource estimation.

mod gates;
mod lower;

pub use gates::{inverse_sequence, Control, Gate};
pub(crate) use lower::compare_patterns;
pub use lower::{gate_counts_blockwise, lower_gate, GateCounts, ResourceEstimate};

use serde::{Deserialize, Serialize};

use crate::analytics::{compute_dicke_weights, DickeWeights};
use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::xorsat::XorSatInstance;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub offset: usize,
    pub width: usize,
}

impl Register {
    pub fn qubit(&self, i: usize) -> usize {
        assert!(i < self.width, "qubit {i} outside register {}", self.name);
        self.offset + i
    }

    pub fn qubits(&self) -> Vec<usize> {
        (self.offset..self.offset + self.width).collect()
    }

    /// Value of this register in a basis index, little-endian.
    pub fn read(&self, index: u64) -> u64 {
        if self.width == 0 {
            return 0;
        }
        (index >> self.offset) & (u64::MAX >> (64 - self.width))
    }

    pub fn read_bits(&self, index: u64) -> BitVec {
        BitVec::from_bools(
            &(0..self.width)
                .map(|i| (index >> (self.offset + i)) & 1 == 1)
                .collect::<Vec<_>>(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub label: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QuantumCircuit {
    pub n_qubits: usize,
    pub registers: Vec<Register>,
    pub gates: Vec<Gate>,
    pub blocks: Vec<Block>,
}

impl QuantumCircuit {
    pub fn new() -> Self {
        Self::default()
    }

    /// Plain circuit on `n` anonymous qubits.
    pub fn with_qubits(n: usize) -> Self {
        let mut c = Self::new();
        c.add_register("q", n);
        c
    }

    pub fn add_register(&mut self, name: &str, width: usize) -> Register {
        let reg = Register {
            name: name.to_string(),
            offset: self.n_qubits,
            width,
        };
        self.n_qubits += width;
        self.registers.push(reg.clone());
        reg
    }

    pub fn register(&self, name: &str) -> Option<&Register> {
        self.registers.iter().find(|r| r.name == name)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        let qs = gate.qubits();
        for (k, &q) in qs.iter().enumerate() {
            if q >= self.n_qubits {
                return Err(Error::InvalidInput(format!(
                    "{} acts on qubit {q} of a {}-qubit circuit",
                    gate.name(),
                    self.n_qubits
                )));
            }
            if qs[..k].contains(&q) {
                return Err(Error::InvalidInput(format!(
                    "{} repeats qubit {q}",
                    gate.name()
                )));
            }
        }
        if let Gate::Mcx { controls, .. } = &gate {
            if controls.is_empty() {
                return Err(Error::InvalidInput("MCX needs at least one control".into()));
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<()> {
        gates.into_iter().try_for_each(|g| self.push(g))
    }

    /// Appends `gates` as a labelled block.
    pub fn push_block(&mut self, label: &str, gates: Vec<Gate>) -> Result<()> {
        let start = self.gates.len();
        self.extend(gates)?;
        self.blocks.push(Block {
            label: label.to_string(),
            start,
            end: self.gates.len(),
        });
        Ok(())
    }

    pub fn block(&self, label: &str) -> Option<&[Gate]> {
        self.blocks
            .iter()
            .find(|b| b.label == label)
            .map(|b| &self.gates[b.start..b.end])
    }

    /// Gates after the named block.
    pub fn gates_after(&self, label: &str) -> Option<&[Gate]> {
        self.blocks
            .iter()
            .find(|b| b.label == label)
            .map(|b| &self.gates[b.end..])
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit serializes")
    }
}

/// `⌈log₂(t+1)⌉`, the width of a register holding values `0..=t`.
pub fn register_width(t: usize) -> usize {
    (usize::BITS - t.leading_zeros()) as usize
}

pub fn qubit_count(m: usize, n: usize, t: usize, iterations: usize) -> usize {
    (iterations + 1) * m + iterations * n + 2 * register_width(t)
}

/// Unary amplitude encoding followed by the weight-preserving Dicke network.
/// Acting on |0^m⟩ it prepares `Σ_k w_k |D_{m,k}⟩` on `qubits`.
pub fn build_dicke_prep(qubits: &[usize], weights: &[f64]) -> Result<Vec<Gate>> {
    let m = qubits.len();
    let ell = weights.len().saturating_sub(1);
    let norm: f64 = weights.iter().map(|w| w * w).sum();
    if weights.is_empty() || (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(
            "Dicke weights must have unit norm".into(),
        ));
    }
    if ell >= m.max(1) && ell > 0 {
        return Err(Error::InvalidInput(format!(
            "weight count {} needs ell < m = {m}",
            ell + 1
        )));
    }
    let mut gates = Vec::new();
    if ell == 0 {
        return Ok(gates);
    }
    // qubit i of the network (1-based) is qubits[i-1]; ones enter from the top end
    let q = |i: usize| qubits[i - 1];
    let mut rest = norm.sqrt();
    for k in 1..=ell {
        let tail = (rest * rest - weights[k - 1] * weights[k - 1])
            .max(0.0)
            .sqrt();
        let angle = 2.0 * tail.atan2(weights[k - 1]);
        if k == 1 {
            gates.push(Gate::Ry { qubit: q(m), angle });
        } else {
            gates.push(Gate::Cry {
                control: q(m - k + 2),
                target: q(m - k + 1),
                angle,
            });
        }
        rest = tail;
    }
    for n in (ell + 1..=m).rev() {
        scs(&mut gates, &q, n, ell);
    }
    for n in (2..=ell).rev() {
        scs(&mut gates, &q, n, n - 1);
    }
    Ok(gates)
}

fn scs(gates: &mut Vec<Gate>, q: &impl Fn(usize) -> usize, n: usize, k: usize) {
    let theta = |l: usize| 2.0 * (l as f64 / n as f64).sqrt().acos();
    gates.push(Gate::Cnot {
        control: q(n - 1),
        target: q(n),
    });
    gates.push(Gate::Cry {
        control: q(n),
        target: q(n - 1),
        angle: theta(1),
    });
    gates.push(Gate::Cnot {
        control: q(n - 1),
        target: q(n),
    });
    for l in 2..=k {
        gates.push(Gate::Cnot {
            control: q(n - l),
            target: q(n),
        });
        ccry(gates, q(n), q(n - l + 1), q(n - l), theta(l));
        gates.push(Gate::Cnot {
            control: q(n - l),
            target: q(n),
        });
    }
}

/// Doubly-controlled RY from three CRY and two CNOT.
fn ccry(gates: &mut Vec<Gate>, a: usize, b: usize, target: usize, angle: f64) {
    gates.push(Gate::Cry {
        control: b,
        target,
        angle: angle / 2.0,
    });
    gates.push(Gate::Cnot {
        control: a,
        target: b,
    });
    gates.push(Gate::Cry {
        control: b,
        target,
        angle: -angle / 2.0,
    });
    gates.push(Gate::Cnot {
        control: a,
        target: b,
    });
    gates.push(Gate::Cry {
        control: a,
        target,
        angle: angle / 2.0,
    });
}

pub fn build_phase_encoding(v: &BitVec, message: &[usize]) -> Vec<Gate> {
    v.ones().map(|i| Gate::Z { qubit: message[i] }).collect()
}

/// CNOT `controls[j] → targets[i]` for every one `Bᵀ[i,j]`, row-major over `B`.
pub fn build_syndrome_encoding(
    b_rows: &[Vec<usize>],
    controls: &[usize],
    targets: &[usize],
) -> Vec<Gate> {
    b_rows
        .iter()
        .enumerate()
        .flat_map(|(j, row)| {
            row.iter().map(move |&i| Gate::Cnot {
                control: controls[j],
                target: targets[i],
            })
        })
        .collect()
}

/// `U₊₁` on a little-endian register, optionally controlled.
pub fn build_increment(register: &[usize], control: Option<usize>) -> Vec<Gate> {
    let mut gates = Vec::with_capacity(register.len());
    for (i, &target) in register.iter().enumerate() {
        let mut controls: Vec<Control> = control.into_iter().map(Control::on).collect();
        controls.extend(register[..i].iter().map(|&q| Control::off(q)));
        gates.push(match (controls.len(), control) {
            (0, _) => Gate::X { qubit: target },
            (1, Some(c)) => Gate::Cnot { control: c, target },
            _ => Gate::Mcx { controls, target },
        });
    }
    gates
}

/// Controlled increments of `h` from each selected qubit.
pub fn build_hamming_weight(selected: &[usize], h: &[usize]) -> Vec<Gate> {
    selected
        .iter()
        .flat_map(|&s| build_increment(h, Some(s)))
        .collect()
}

pub fn build_comparator(h: &[usize], threshold: u64, flag: usize) -> Gate {
    Gate::CompareGe {
        register: h.to_vec(),
        threshold,
        flag,
    }
}

/// Qubit layout of a DQI circuit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DqiLayout {
    pub m: usize,
    pub n: usize,
    pub t: usize,
    pub iterations: usize,
    pub y: Register,
    /// `s[0]` holds `Bᵀy`; `s[i]` the syndrome after iteration `i`.
    pub s: Vec<Register>,
    pub h: Register,
    pub c: Register,
    /// `f[i-1]` is the flip register of iteration `i`.
    pub f: Vec<Register>,
}

impl DqiLayout {
    pub fn new(circ: &mut QuantumCircuit, m: usize, n: usize, t: usize, iterations: usize) -> Self {
        let r = register_width(t);
        let y = circ.add_register("y", m);
        let mut s = vec![circ.add_register("s0", n)];
        let h = circ.add_register("h", r);
        let c = circ.add_register("c", r);
        let mut f = Vec::with_capacity(iterations);
        for i in 1..=iterations {
            f.push(circ.add_register(&format!("f{i}"), m));
            if i < iterations {
                s.push(circ.add_register(&format!("s{i}"), n));
            }
        }
        DqiLayout {
            m,
            n,
            t,
            iterations,
            y,
            s,
            h,
            c,
            f,
        }
    }

    /// Registers that must return to zero after the decoder.
    pub fn ancillas(&self) -> Vec<&Register> {
        let mut out: Vec<&Register> = vec![&self.h, &self.c];
        out.extend(self.f.iter());
        out.extend(self.s.iter().skip(1));
        out
    }
}

/// Coherent BP1: `T` iterations of flip computation, copy of the total flips
/// into the message register, then uncomputation of all workspace.
pub fn build_bp1_decoder(inst: &XorSatInstance, layout: &DqiLayout) -> Vec<Gate> {
    let h = layout.h.qubits();
    let flag = layout.c.qubit(0);
    let mut forward = Vec::new();
    for it in 1..=layout.iterations {
        let s_prev = &layout.s[it - 1];
        let f = &layout.f[it - 1];
        for (j, row) in inst.b_rows.iter().enumerate() {
            if row.is_empty() {
                continue;
            }
            let selected: Vec<usize> = row.iter().map(|&k| s_prev.qubit(k)).collect();
            let weight = build_hamming_weight(&selected, &h);
            let compare = build_comparator(&h, row.len() as u64, flag);
            forward.extend(weight.iter().cloned());
            forward.push(compare.clone());
            forward.push(Gate::Cnot {
                control: flag,
                target: f.qubit(j),
            });
            forward.push(compare);
            forward.extend(inverse_sequence(&weight));
        }
        if it < layout.iterations {
            let s_next = &layout.s[it];
            forward.extend((0..layout.n).map(|k| Gate::Cnot {
                control: s_prev.qubit(k),
                target: s_next.qubit(k),
            }));
            forward.extend(build_syndrome_encoding(
                &inst.b_rows,
                &f.qubits(),
                &s_next.qubits(),
            ));
        }
    }
    let mut gates = forward.clone();
    for f in &layout.f {
        gates.extend((0..layout.m).map(|j| Gate::Cnot {
            control: f.qubit(j),
            target: layout.y.qubit(j),
        }));
    }
    gates.extend(inverse_sequence(&forward));
    gates
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DqiCircuit {
    pub circuit: QuantumCircuit,
    pub layout: DqiLayout,
    pub weights: DickeWeights,
}

pub const DQI_BLOCKS: [&str; 5] = ["dicke", "phase", "syndrome", "decoder", "hadamard"];

pub fn build_dqi_circuit(
    inst: &XorSatInstance,
    ell: usize,
    iterations: usize,
) -> Result<DqiCircuit> {
    inst.validate()?;
    if ell == 0 {
        return Err(Error::InvalidInput("ell must be at least 1".into()));
    }
    if iterations == 0 {
        return Err(Error::InvalidInput("iterations must be at least 1".into()));
    }
    let t = inst.max_row_weight();
    if t == 0 {
        return Err(Error::InvalidInput("B has no nonzero rows".into()));
    }
    let weights = compute_dicke_weights(inst.m, ell)?;
    let mut circuit = QuantumCircuit::new();
    let layout = DqiLayout::new(&mut circuit, inst.m, inst.n, t, iterations);
    let y = layout.y.qubits();
    circuit.push_block("dicke", build_dicke_prep(&y, &weights.w)?)?;
    circuit.push_block("phase", build_phase_encoding(&inst.v, &y))?;
    circuit.push_block(
        "syndrome",
        build_syndrome_encoding(&inst.b_rows, &y, &layout.s[0].qubits()),
    )?;
    circuit.push_block("decoder", build_bp1_decoder(inst, &layout))?;
    circuit.push_block(
        "hadamard",
        layout.s[0]
            .qubits()
            .into_iter()
            .map(|qubit| Gate::H { qubit })
            .collect(),
    )?;
    let expected = qubit_count(inst.m, inst.n, t, iterations);
    if circuit.n_qubits != expected {
        return Err(Error::Internal(format!(
            "layout has {} qubits, formula gives {expected}",
            circuit.n_qubits
        )));
    }
    Ok(DqiCircuit {
        circuit,
        layout,
        weights,
    })
}

#[cfg(test)]
mod tests;
