//! Statevector execution of [`QuantumCircuit`]s, shot sampling and DQI
//! postselection.
//!
//! Two backends share the gate semantics: a dense amplitude array (up to 30
//! qubits) and a sparse map from basis index to amplitude, which handles the
//! wider decoder circuits whose support stays small.

use std::collections::BTreeMap;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analytics::DickeWeights;
use crate::circuits::{compare_patterns, Control, DqiCircuit, DqiLayout, Gate, QuantumCircuit};
use crate::error::{Error, Result};
use crate::xorsat::{count_satisfied, XorSatInstance};
use crate::Scalar;

pub const DENSE_MAX_QUBITS: usize = 30;
pub const DENSE_DEFAULT_QUBITS: usize = 28;
pub const SPARSE_MAX_QUBITS: usize = 64;

/// Amplitudes below this squared magnitude are dropped by the sparse backend.
const PRUNE: f64 = 1e-26;

type Mat2<T> = [[Complex<T>; 2]; 2];

fn c<T: Scalar>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::from(re).unwrap(), T::from(im).unwrap())
}

fn single_qubit_matrix<T: Scalar>(g: &Gate) -> Option<(usize, Option<usize>, Mat2<T>)> {
    let rot = |angle: f64| ((angle / 2.0).cos(), (angle / 2.0).sin());
    Some(match *g {
        Gate::H { qubit } => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            (
                qubit,
                None,
                [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]],
            )
        }
        Gate::Rx { qubit, angle } => {
            let (co, si) = rot(angle);
            (
                qubit,
                None,
                [[c(co, 0.0), c(0.0, -si)], [c(0.0, -si), c(co, 0.0)]],
            )
        }
        Gate::Ry { qubit, angle } => {
            let (co, si) = rot(angle);
            (
                qubit,
                None,
                [[c(co, 0.0), c(-si, 0.0)], [c(si, 0.0), c(co, 0.0)]],
            )
        }
        Gate::Rz { qubit, angle } => {
            let (co, si) = rot(angle);
            (
                qubit,
                None,
                [[c(co, -si), c(0.0, 0.0)], [c(0.0, 0.0), c(co, si)]],
            )
        }
        Gate::Z { qubit } => (
            qubit,
            None,
            [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]],
        ),
        Gate::Cry {
            control,
            target,
            angle,
        } => {
            let (co, si) = rot(angle);
            (
                target,
                Some(control),
                [[c(co, 0.0), c(-si, 0.0)], [c(si, 0.0), c(co, 0.0)]],
            )
        }
        _ => return None,
    })
}

/// Control mask, required value and target bit of an X-type gate.
fn x_masks(g: &Gate) -> Option<(u64, u64, u64)> {
    let pack = |controls: &[Control], target: usize| {
        let mask = controls.iter().fold(0u64, |m, c| m | 1 << c.qubit);
        let val = controls
            .iter()
            .filter(|c| c.on)
            .fold(0u64, |m, c| m | 1 << c.qubit);
        (mask, val, 1u64 << target)
    };
    match g {
        Gate::X { qubit } => Some((0, 0, 1 << qubit)),
        Gate::Cnot { control, target } => Some(pack(&[Control::on(*control)], *target)),
        Gate::Mcx { controls, target } => Some(pack(controls, *target)),
        _ => None,
    }
}

fn check_qubits(g: &Gate, n: usize) -> Result<()> {
    match g.qubits().into_iter().find(|&q| q >= n) {
        Some(q) => Err(Error::InvalidInput(format!(
            "{} acts on qubit {q} of a {n}-qubit state",
            g.name()
        ))),
        None => Ok(()),
    }
}

/// Common interface of the two backends.
pub trait QuantumState<T: Scalar> {
    fn n_qubits(&self) -> usize;
    fn apply(&mut self, g: &Gate) -> Result<()>;
    /// Nonzero entries in increasing index order.
    fn entries(&self) -> Vec<(u64, Complex<T>)>;
    fn norm_sqr(&self) -> T;

    fn apply_all(&mut self, gates: &[Gate]) -> Result<()> {
        gates.iter().try_for_each(|g| self.apply(g))
    }

    /// Total probability of basis states satisfying `pred`.
    fn probability_where(&self, pred: impl Fn(u64) -> bool) -> T {
        self.entries()
            .into_iter()
            .filter(|(i, _)| pred(*i))
            .fold(T::zero(), |acc, (_, a)| acc + a.norm_sqr())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T> {
    n_qubits: usize,
    amps: Vec<Complex<T>>,
}

impl<T: Scalar> StateVector<T> {
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::zero_with_cap(n_qubits, DENSE_DEFAULT_QUBITS)
    }

    pub fn zero_with_cap(n_qubits: usize, cap: usize) -> Result<Self> {
        let cap = cap.min(DENSE_MAX_QUBITS);
        if n_qubits > cap {
            return Err(Error::TooLarge {
                what: "dense statevector qubits",
                size: n_qubits,
                limit: cap,
            });
        }
        let mut amps = vec![Complex::new(T::zero(), T::zero()); 1usize << n_qubits];
        amps[0] = Complex::new(T::one(), T::zero());
        Ok(StateVector { n_qubits, amps })
    }

    /// State with the given entries and zeros elsewhere.
    pub fn from_entries(
        n_qubits: usize,
        cap: usize,
        entries: &[(u64, Complex<T>)],
    ) -> Result<Self> {
        let mut s = Self::zero_with_cap(n_qubits, cap)?;
        s.amps[0] = Complex::new(T::zero(), T::zero());
        for &(i, a) in entries {
            let slot = s
                .amps
                .get_mut(i as usize)
                .ok_or_else(|| Error::InvalidInput(format!("basis index {i} out of range")))?;
            *slot = a;
        }
        Ok(s)
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn amplitude(&self, index: u64) -> Complex<T> {
        self.amps[index as usize]
    }

    fn apply_matrix(&mut self, q: usize, control: Option<usize>, m: Mat2<T>) {
        let qb = 1usize << q;
        let cb = control.map_or(0, |c| 1usize << c);
        for i in 0..self.amps.len() {
            if i & qb != 0 || i & cb != cb {
                continue;
            }
            let (a0, a1) = (self.amps[i], self.amps[i | qb]);
            self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
            self.amps[i | qb] = m[1][0] * a0 + m[1][1] * a1;
        }
    }

    fn apply_x(&mut self, mask: u64, val: u64, target: u64) {
        let (mask, val, t) = (mask as usize, val as usize, target as usize);
        for i in 0..self.amps.len() {
            if i & t == 0 && i & mask == val {
                self.amps.swap(i, i | t);
            }
        }
    }
}

impl<T: Scalar> QuantumState<T> for StateVector<T> {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn apply(&mut self, g: &Gate) -> Result<()> {
        check_qubits(g, self.n_qubits)?;
        if let Some((mask, val, t)) = x_masks(g) {
            self.apply_x(mask, val, t);
            return Ok(());
        }
        match g {
            Gate::Z { qubit } => {
                let qb = 1usize << qubit;
                self.amps
                    .iter_mut()
                    .enumerate()
                    .filter(|(i, _)| i & qb != 0)
                    .for_each(|(_, a)| *a = -*a);
            }
            Gate::Swap { a, b } => {
                let (ab, bb) = (1usize << a, 1usize << b);
                for i in 0..self.amps.len() {
                    if i & ab != 0 && i & bb == 0 {
                        self.amps.swap(i, i ^ ab ^ bb);
                    }
                }
            }
            Gate::CompareGe {
                register,
                threshold,
                flag,
            } => {
                for p in compare_patterns(register, *threshold, *flag) {
                    let (mask, val, t) = x_masks(&p).expect("comparator patterns are X gates");
                    self.apply_x(mask, val, t);
                }
            }
            other => {
                let (q, control, m) =
                    single_qubit_matrix(other).expect("remaining gates are single-qubit");
                self.apply_matrix(q, control, m);
            }
        }
        Ok(())
    }

    fn entries(&self) -> Vec<(u64, Complex<T>)> {
        let zero = T::zero();
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.re != zero || a.im != zero)
            .map(|(i, a)| (i as u64, *a))
            .collect()
    }

    fn norm_sqr(&self) -> T {
        self.amps
            .iter()
            .fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    fn probability_where(&self, pred: impl Fn(u64) -> bool) -> T {
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| pred(*i as u64))
            .fold(T::zero(), |acc, (_, a)| acc + a.norm_sqr())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparseState<T> {
    n_qubits: usize,
    amps: BTreeMap<u64, Complex<T>>,
}

impl<T: Scalar> SparseState<T> {
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::from_entries(n_qubits, &[(0, Complex::new(T::one(), T::zero()))])
    }

    pub fn from_entries(n_qubits: usize, entries: &[(u64, Complex<T>)]) -> Result<Self> {
        if n_qubits > SPARSE_MAX_QUBITS {
            return Err(Error::TooLarge {
                what: "sparse statevector qubits",
                size: n_qubits,
                limit: SPARSE_MAX_QUBITS,
            });
        }
        let mut amps = BTreeMap::new();
        for &(i, a) in entries {
            if n_qubits < 64 && i >> n_qubits != 0 {
                return Err(Error::InvalidInput(format!("basis index {i} out of range")));
            }
            *amps.entry(i).or_insert(Complex::new(T::zero(), T::zero())) += a;
        }
        Ok(SparseState { n_qubits, amps })
    }

    pub fn support_size(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitude(&self, index: u64) -> Complex<T> {
        self.amps
            .get(&index)
            .copied()
            .unwrap_or(Complex::new(T::zero(), T::zero()))
    }
}

impl<T: Scalar> QuantumState<T> for SparseState<T> {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn apply(&mut self, g: &Gate) -> Result<()> {
        check_qubits(g, self.n_qubits)?;
        if g.is_classical() {
            let old = std::mem::take(&mut self.amps);
            self.amps = old
                .into_iter()
                .map(|(i, a)| (g.map_basis(i).expect("classical gate"), a))
                .collect();
            return Ok(());
        }
        if let Gate::Z { qubit } = g {
            self.amps
                .iter_mut()
                .filter(|(i, _)| (*i >> qubit) & 1 == 1)
                .for_each(|(_, a)| *a = -*a);
            return Ok(());
        }
        let (q, control, m) =
            single_qubit_matrix::<T>(g).expect("remaining gates are single-qubit");
        let qb = 1u64 << q;
        let zero = Complex::new(T::zero(), T::zero());
        let mut next: BTreeMap<u64, Complex<T>> = BTreeMap::new();
        for (&i, &a) in &self.amps {
            if control.is_some_and(|cq| (i >> cq) & 1 == 0) {
                *next.entry(i).or_insert(zero) += a;
                continue;
            }
            let b = ((i & qb) != 0) as usize;
            *next.entry(i & !qb).or_insert(zero) += m[0][b] * a;
            *next.entry(i | qb).or_insert(zero) += m[1][b] * a;
        }
        let tol = T::from(PRUNE).unwrap();
        next.retain(|_, a| a.norm_sqr() > tol);
        self.amps = next;
        Ok(())
    }

    fn entries(&self) -> Vec<(u64, Complex<T>)> {
        self.amps.iter().map(|(&i, &a)| (i, a)).collect()
    }

    fn norm_sqr(&self) -> T {
        self.amps
            .values()
            .fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }
}

/// Starting state of [`run_circuit`].
#[derive(Clone, Debug, PartialEq)]
pub enum Init<T> {
    Zero,
    Amplitudes(Vec<(u64, Complex<T>)>),
}

pub fn run_circuit<T: Scalar>(circ: &QuantumCircuit, init: &Init<T>) -> Result<StateVector<T>> {
    run_gates_dense(circ.n_qubits, DENSE_DEFAULT_QUBITS, &circ.gates, init)
}

pub fn run_gates_dense<T: Scalar>(
    n_qubits: usize,
    cap: usize,
    gates: &[Gate],
    init: &Init<T>,
) -> Result<StateVector<T>> {
    let mut state = match init {
        Init::Zero => StateVector::zero_with_cap(n_qubits, cap)?,
        Init::Amplitudes(e) => StateVector::from_entries(n_qubits, cap, e)?,
    };
    state.apply_all(gates)?;
    Ok(state)
}

pub fn run_gates_sparse<T: Scalar>(
    n_qubits: usize,
    gates: &[Gate],
    init: &Init<T>,
) -> Result<SparseState<T>> {
    let mut state = match init {
        Init::Zero => SparseState::zero(n_qubits)?,
        Init::Amplitudes(e) => SparseState::from_entries(n_qubits, e)?,
    };
    state.apply_all(gates)?;
    Ok(state)
}

/// I.i.d. shots from `|amplitude|²`, normalized by the total weight.
pub fn sample_shots<T: Scalar, S: QuantumState<T>>(state: &S, shots: usize, seed: u64) -> Vec<u64> {
    let entries = state.entries();
    let total: f64 = entries
        .iter()
        .map(|(_, a)| a.norm_sqr().to_f64().unwrap())
        .sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws: Vec<(f64, usize)> = (0..shots)
        .map(|k| (rng.random::<f64>() * total, k))
        .collect();
    draws.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = vec![0u64; shots];
    let mut acc = 0.0;
    let mut it = entries.iter().peekable();
    let last = entries.last().map_or(0, |e| e.0);
    for (u, k) in draws {
        let mut chosen = last;
        while let Some((i, a)) = it.peek() {
            let p = a.norm_sqr().to_f64().unwrap();
            if u < acc + p {
                chosen = *i;
                break;
            }
            acc += p;
            it.next();
        }
        out[k] = chosen;
    }
    out
}

/// Index of `y` with bits `ones` set in the message register.
fn message_index(layout: &DqiLayout, ones: &[usize]) -> u64 {
    ones.iter()
        .fold(0u64, |acc, &j| acc | 1 << layout.y.qubit(j))
}

/// Exact `Σ_k w_k |D_{m,k}⟩` on the message register.
pub fn dicke_entries<T: Scalar>(
    layout: &DqiLayout,
    weights: &DickeWeights,
) -> Vec<(u64, Complex<T>)> {
    use itertools::Itertools;
    let mut out = Vec::new();
    for (k, &w) in weights.w.iter().enumerate() {
        let amp = w / (crate::instances::binomial(layout.m, k) as f64).sqrt();
        for ones in (0..layout.m).combinations(k) {
            out.push((
                message_index(layout, &ones),
                Complex::new(T::from(amp).unwrap(), T::zero()),
            ));
        }
    }
    out.sort_by_key(|e| e.0);
    out
}

/// How the Dicke block is realized during simulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DickeMode {
    Gates,
    Inject,
}

fn dqi_start<'a, T: Scalar>(dqi: &'a DqiCircuit, mode: DickeMode) -> (Init<T>, &'a [Gate]) {
    match mode {
        DickeMode::Gates => (Init::Zero, &dqi.circuit.gates[..]),
        DickeMode::Inject => (
            Init::Amplitudes(dicke_entries(&dqi.layout, &dqi.weights)),
            dqi.circuit
                .gates_after("dicke")
                .expect("DQI circuits have a dicke block"),
        ),
    }
}

pub fn simulate_dqi_sparse<T: Scalar>(dqi: &DqiCircuit, mode: DickeMode) -> Result<SparseState<T>> {
    let (init, gates) = dqi_start(dqi, mode);
    run_gates_sparse(dqi.circuit.n_qubits, gates, &init)
}

pub fn simulate_dqi_dense<T: Scalar>(
    dqi: &DqiCircuit,
    mode: DickeMode,
    cap: usize,
) -> Result<StateVector<T>> {
    let (init, gates) = dqi_start(dqi, mode);
    run_gates_dense(dqi.circuit.n_qubits, cap, gates, &init)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PostselectedSample {
    pub x: crate::gf2::BitVec,
    pub satisfied: usize,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PostselectReport {
    pub shots: usize,
    pub accepted: usize,
    pub acceptance_rate: f64,
    /// `histogram[s]` counts accepted shots with `s` satisfied equations.
    pub histogram: Vec<usize>,
    pub mean_satisfied: f64,
    pub std_error: f64,
}

impl PostselectReport {
    pub fn fraction_with(&self, satisfied: usize) -> f64 {
        if self.accepted == 0 {
            return 0.0;
        }
        self.histogram.get(satisfied).copied().unwrap_or(0) as f64 / self.accepted as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("satisfied,count,accepted_total,shots\n");
        for (s, n) in self.histogram.iter().enumerate() {
            out.push_str(&format!("{s},{n},{},{}\n", self.accepted, self.shots));
        }
        out
    }
}

pub fn classify_sample(
    sample: u64,
    inst: &XorSatInstance,
    layout: &DqiLayout,
) -> Result<PostselectedSample> {
    let x = layout.s[0].read_bits(sample);
    let satisfied = count_satisfied(inst, &x)?.satisfied;
    Ok(PostselectedSample {
        x,
        satisfied,
        accepted: layout.y.read(sample) == 0,
    })
}

pub fn postselect_and_score(
    samples: &[u64],
    inst: &XorSatInstance,
    layout: &DqiLayout,
) -> Result<PostselectReport> {
    let mut histogram = vec![0usize; inst.m + 1];
    let mut accepted = 0usize;
    for &s in samples {
        let p = classify_sample(s, inst, layout)?;
        if p.accepted {
            accepted += 1;
            histogram[p.satisfied] += 1;
        }
    }
    let (mean, se) = if accepted == 0 {
        (f64::NAN, f64::NAN)
    } else {
        let a = accepted as f64;
        let mean = histogram
            .iter()
            .enumerate()
            .map(|(s, &n)| s as f64 * n as f64)
            .sum::<f64>()
            / a;
        let var = histogram
            .iter()
            .enumerate()
            .map(|(s, &n)| n as f64 * (s as f64 - mean).powi(2))
            .sum::<f64>()
            / (a - 1.0).max(1.0);
        (mean, (var / a).sqrt())
    };
    Ok(PostselectReport {
        shots: samples.len(),
        accepted,
        acceptance_rate: if samples.is_empty() {
            0.0
        } else {
            accepted as f64 / samples.len() as f64
        },
        histogram,
        mean_satisfied: mean,
        std_error: se,
    })
}

/// Exact distribution of the syndrome register conditioned on an all-zero
/// message register, keyed by the syndrome value.
pub fn postselected_distribution<T: Scalar, S: QuantumState<T>>(
    state: &S,
    layout: &DqiLayout,
) -> (BTreeMap<u64, f64>, f64) {
    let mut dist = BTreeMap::new();
    let mut accepted = 0.0;
    for (i, a) in state.entries() {
        if layout.y.read(i) == 0 {
            let p = a.norm_sqr().to_f64().unwrap();
            *dist.entry(layout.s[0].read(i)).or_insert(0.0) += p;
            accepted += p;
        }
    }
    if accepted > 0.0 {
        dist.values_mut().for_each(|p| *p /= accepted);
    }
    (dist, accepted)
}
