use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Control, Gate, QuantumCircuit};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCounts {
    pub z: u64,
    pub cnot: u64,
    pub rx: u64,
    pub ry: u64,
    pub rz: u64,
    pub swap: u64,
}

impl GateCounts {
    pub fn total(&self) -> u64 {
        self.z + self.cnot + self.rx + self.ry + self.rz + self.swap
    }

    pub fn add(&mut self, other: &GateCounts) {
        self.z += other.z;
        self.cnot += other.cnot;
        self.rx += other.rx;
        self.ry += other.ry;
        self.rz += other.rz;
        self.swap += other.swap;
    }

    fn record(&mut self, g: &Gate) {
        match g {
            Gate::Z { .. } => self.z += 1,
            Gate::Cnot { .. } => self.cnot += 1,
            Gate::Rx { .. } => self.rx += 1,
            Gate::Ry { .. } => self.ry += 1,
            Gate::Rz { .. } => self.rz += 1,
            Gate::Swap { .. } => self.swap += 1,
            other => unreachable!("{} is not a basis gate", other.name()),
        }
    }

    pub fn as_pairs(&self) -> [(&'static str, u64); 6] {
        [
            ("Z", self.z),
            ("CNOT", self.cnot),
            ("RX", self.rx),
            ("RY", self.ry),
            ("RZ", self.rz),
            ("SWAP", self.swap),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceEstimate {
    pub qubits: usize,
    pub totals: GateCounts,
    pub blocks: Vec<(String, GateCounts)>,
}

impl ResourceEstimate {
    pub fn total_gates(&self) -> u64 {
        self.totals.total()
    }

    /// Rows `block,gate,count` including a `total` block.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("block,gate,count\n");
        for (label, counts) in self
            .blocks
            .iter()
            .chain([&("total".to_string(), self.totals)])
        {
            for (name, n) in counts.as_pairs() {
                out.push_str(&format!("{label},{name},{n}\n"));
            }
        }
        out
    }
}

/// Expands a gate into {Z, CNOT, RX, RY, RZ, SWAP}, equal up to global phase.
pub fn lower_gate(g: &Gate) -> Vec<Gate> {
    let mut out = Vec::new();
    lower_into(g, &mut out);
    out
}

fn lower_into(g: &Gate, out: &mut Vec<Gate>) {
    match g {
        Gate::Z { .. }
        | Gate::Cnot { .. }
        | Gate::Rx { .. }
        | Gate::Ry { .. }
        | Gate::Rz { .. }
        | Gate::Swap { .. } => out.push(g.clone()),
        Gate::X { qubit } => out.push(Gate::Rx {
            qubit: *qubit,
            angle: PI,
        }),
        Gate::H { qubit } => {
            out.push(Gate::Rz {
                qubit: *qubit,
                angle: PI / 2.0,
            });
            out.push(Gate::Rx {
                qubit: *qubit,
                angle: PI / 2.0,
            });
            out.push(Gate::Rz {
                qubit: *qubit,
                angle: PI / 2.0,
            });
        }
        Gate::Cry {
            control,
            target,
            angle,
        } => {
            out.push(Gate::Ry {
                qubit: *target,
                angle: angle / 2.0,
            });
            out.push(Gate::Cnot {
                control: *control,
                target: *target,
            });
            out.push(Gate::Ry {
                qubit: *target,
                angle: -angle / 2.0,
            });
            out.push(Gate::Cnot {
                control: *control,
                target: *target,
            });
        }
        Gate::Mcx { controls, target } => lower_mcx(controls, *target, out),
        Gate::CompareGe {
            register,
            threshold,
            flag,
        } => {
            for mcx in compare_patterns(register, *threshold, *flag) {
                lower_into(&mcx, out);
            }
        }
    }
}

/// Disjoint MCX patterns whose XOR is `flag ⊕= [value ≥ threshold]`.
pub(crate) fn compare_patterns(register: &[usize], threshold: u64, flag: usize) -> Vec<Gate> {
    let r = register.len();
    if threshold == 0 {
        return vec![Gate::X { qubit: flag }];
    }
    if r < 64 && threshold >= 1u64 << r {
        return Vec::new();
    }
    let bit = |k: usize| (threshold >> k) & 1 == 1;
    let mut pats = Vec::new();
    // value agrees with threshold above k and has 1 where threshold has 0
    for k in (0..r).rev() {
        if bit(k) {
            continue;
        }
        let mut controls: Vec<Control> = (k + 1..r)
            .map(|i| Control {
                qubit: register[i],
                on: bit(i),
            })
            .collect();
        controls.push(Control::on(register[k]));
        pats.push(Gate::Mcx {
            controls,
            target: flag,
        });
    }
    let controls = (0..r)
        .map(|i| Control {
            qubit: register[i],
            on: bit(i),
        })
        .collect();
    pats.push(Gate::Mcx {
        controls,
        target: flag,
    });
    pats
}

fn lower_mcx(controls: &[Control], target: usize, out: &mut Vec<Gate>) {
    let negated: Vec<usize> = controls.iter().filter(|c| !c.on).map(|c| c.qubit).collect();
    for &q in &negated {
        out.push(Gate::Rx {
            qubit: q,
            angle: PI,
        });
    }
    match controls.len() {
        0 => out.push(Gate::Rx {
            qubit: target,
            angle: PI,
        }),
        1 => out.push(Gate::Cnot {
            control: controls[0].qubit,
            target,
        }),
        _ => {
            lower_into(&Gate::H { qubit: target }, out);
            let mut qs: Vec<usize> = controls.iter().map(|c| c.qubit).collect();
            qs.push(target);
            gray_code_phase(&qs, out);
            lower_into(&Gate::H { qubit: target }, out);
        }
    }
    for &q in &negated {
        out.push(Gate::Rx {
            qubit: q,
            angle: PI,
        });
    }
}

/// Phase −1 on the all-ones state of `qs` via the parity expansion
/// `x₁⋯x_q = 2^{1−q} Σ_S (−1)^{|S|+1} ⊕_S x`, walking subsets in Gray order.
fn gray_code_phase(qs: &[usize], out: &mut Vec<Gate>) {
    let q = qs.len();
    let unit = PI / (1u64 << (q - 1)) as f64;
    for p in 0..q {
        let pivot = qs[p];
        let mut prev = 0usize;
        for step in 0..(1usize << p) {
            let gray = step ^ (step >> 1);
            let changed = gray ^ prev;
            if changed != 0 {
                out.push(Gate::Cnot {
                    control: qs[changed.trailing_zeros() as usize],
                    target: pivot,
                });
            }
            prev = gray;
            let size = gray.count_ones() + 1;
            let sign = if size % 2 == 1 { 1.0 } else { -1.0 };
            out.push(Gate::Rz {
                qubit: pivot,
                angle: sign * unit,
            });
        }
        if prev != 0 {
            out.push(Gate::Cnot {
                control: qs[prev.trailing_zeros() as usize],
                target: pivot,
            });
        }
    }
}

/// Lowers each block independently and sums the per-block counts.
pub fn gate_counts_blockwise(circ: &QuantumCircuit) -> ResourceEstimate {
    let mut groups: Vec<(String, Vec<usize>)> = circ
        .blocks
        .iter()
        .map(|b| (b.label.clone(), (b.start..b.end).collect()))
        .collect();
    let mut covered = vec![false; circ.gates.len()];
    for b in &circ.blocks {
        covered[b.start..b.end].iter_mut().for_each(|c| *c = true);
    }
    let loose: Vec<usize> = (0..circ.gates.len()).filter(|&i| !covered[i]).collect();
    if !loose.is_empty() {
        groups.push(("unlabelled".to_string(), loose));
    }
    let blocks: Vec<(String, GateCounts)> = groups
        .par_iter()
        .map(|(label, idx)| {
            let mut counts = GateCounts::default();
            for &i in idx {
                for low in lower_gate(&circ.gates[i]) {
                    counts.record(&low);
                }
            }
            (label.clone(), counts)
        })
        .collect();
    let mut totals = GateCounts::default();
    for (_, c) in &blocks {
        totals.add(c);
    }
    ResourceEstimate {
        qubits: circ.n_qubits,
        totals,
        blocks,
    }
}
