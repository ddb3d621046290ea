use serde::{Deserialize, Serialize};

/// Control line of a multi-controlled X; `on = false` fires on |0⟩.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Control {
    pub qubit: usize,
    pub on: bool,
}

impl Control {
    pub fn on(qubit: usize) -> Self {
        Control { qubit, on: true }
    }

    pub fn off(qubit: usize) -> Self {
        Control { qubit, on: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Gate {
    X {
        qubit: usize,
    },
    Z {
        qubit: usize,
    },
    H {
        qubit: usize,
    },
    Rx {
        qubit: usize,
        angle: f64,
    },
    Ry {
        qubit: usize,
        angle: f64,
    },
    Rz {
        qubit: usize,
        angle: f64,
    },
    Cnot {
        control: usize,
        target: usize,
    },
    Cry {
        control: usize,
        target: usize,
        angle: f64,
    },
    Swap {
        a: usize,
        b: usize,
    },
    Mcx {
        controls: Vec<Control>,
        target: usize,
    },
    /// `flag ⊕= [value(register) ≥ threshold]`, register little-endian.
    CompareGe {
        register: Vec<usize>,
        threshold: u64,
        flag: usize,
    },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::X { qubit } | Gate::Z { qubit } | Gate::H { qubit } => vec![*qubit],
            Gate::Rx { qubit, .. } | Gate::Ry { qubit, .. } | Gate::Rz { qubit, .. } => {
                vec![*qubit]
            }
            Gate::Cnot { control, target }
            | Gate::Cry {
                control, target, ..
            } => vec![*control, *target],
            Gate::Swap { a, b } => vec![*a, *b],
            Gate::Mcx { controls, target } => {
                controls.iter().map(|c| c.qubit).chain([*target]).collect()
            }
            Gate::CompareGe { register, flag, .. } => {
                register.iter().copied().chain([*flag]).collect()
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::X { .. } => "X",
            Gate::Z { .. } => "Z",
            Gate::H { .. } => "H",
            Gate::Rx { .. } => "RX",
            Gate::Ry { .. } => "RY",
            Gate::Rz { .. } => "RZ",
            Gate::Cnot { .. } => "CNOT",
            Gate::Cry { .. } => "CRY",
            Gate::Swap { .. } => "SWAP",
            Gate::Mcx { .. } => "MCX",
            Gate::CompareGe { .. } => "COMPARE_GE",
        }
    }

    pub fn inverse(&self) -> Gate {
        match self {
            Gate::Rx { qubit, angle } => Gate::Rx {
                qubit: *qubit,
                angle: -angle,
            },
            Gate::Ry { qubit, angle } => Gate::Ry {
                qubit: *qubit,
                angle: -angle,
            },
            Gate::Rz { qubit, angle } => Gate::Rz {
                qubit: *qubit,
                angle: -angle,
            },
            Gate::Cry {
                control,
                target,
                angle,
            } => Gate::Cry {
                control: *control,
                target: *target,
                angle: -angle,
            },
            other => other.clone(),
        }
    }

    /// True for gates that permute computational basis states.
    pub fn is_classical(&self) -> bool {
        matches!(
            self,
            Gate::X { .. }
                | Gate::Cnot { .. }
                | Gate::Swap { .. }
                | Gate::Mcx { .. }
                | Gate::CompareGe { .. }
        )
    }

    /// Image of a basis index under a classical gate.
    pub fn map_basis(&self, index: u64) -> Option<u64> {
        let bit = |q: usize| (index >> q) & 1 == 1;
        let flip = |q: usize| index ^ (1u64 << q);
        Some(match self {
            Gate::X { qubit } => flip(*qubit),
            Gate::Cnot { control, target } => {
                if bit(*control) {
                    flip(*target)
                } else {
                    index
                }
            }
            Gate::Swap { a, b } => {
                if bit(*a) != bit(*b) {
                    index ^ (1u64 << a) ^ (1u64 << b)
                } else {
                    index
                }
            }
            Gate::Mcx { controls, target } => {
                if controls.iter().all(|c| bit(c.qubit) == c.on) {
                    flip(*target)
                } else {
                    index
                }
            }
            Gate::CompareGe {
                register,
                threshold,
                flag,
            } => {
                let value = register
                    .iter()
                    .enumerate()
                    .fold(0u64, |acc, (k, &q)| acc | ((bit(q) as u64) << k));
                if value >= *threshold {
                    flip(*flag)
                } else {
                    index
                }
            }
            _ => return None,
        })
    }
}

/// Gates in reverse order, each inverted.
pub fn inverse_sequence(gates: &[Gate]) -> Vec<Gate> {
    gates.iter().rev().map(Gate::inverse).collect()
}
