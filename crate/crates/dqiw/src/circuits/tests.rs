use super::*;
use crate::gf2::matvec_mod2;
use crate::instances::{
    binomial, example_8x6_instance, random_small_instance, small_example_instance,
};
use crate::simulator::{
    run_gates_dense, run_gates_sparse, Init, QuantumState, SparseState, StateVector,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn basis_run(n: usize, gates: &[Gate], index: u64) -> Vec<(u64, Complex64)> {
    let s = run_gates_sparse::<f64>(
        n,
        gates,
        &Init::Amplitudes(vec![(index, Complex64::new(1.0, 0.0))]),
    )
    .unwrap();
    s.entries()
        .into_iter()
        .filter(|(_, a)| a.norm() > 1e-9)
        .collect()
}

/// Classical image of a basis state; panics if the gates are not a permutation there.
fn basis_image(n: usize, gates: &[Gate], index: u64) -> u64 {
    let out = basis_run(n, gates, index);
    assert_eq!(out.len(), 1, "basis state spread into {} terms", out.len());
    assert!((out[0].1.re - 1.0).abs() < 1e-9);
    out[0].0
}

#[test]
fn qubit_count_formula() {
    assert_eq!(qubit_count(8, 6, 2, 1), 26);
    assert_eq!(qubit_count(3, 2, 2, 2), 17);
    assert_eq!(register_width(0), 0);
    assert_eq!(register_width(1), 1);
    assert_eq!(register_width(3), 2);
    assert_eq!(register_width(4), 3);
}

#[test]
fn built_circuits_match_the_formula() {
    let ex = example_8x6_instance();
    for ell in 1..=3 {
        assert_eq!(build_dqi_circuit(&ex, ell, 1).unwrap().circuit.n_qubits, 26);
    }
    assert_eq!(
        build_dqi_circuit(&small_example_instance(), 1, 2)
            .unwrap()
            .circuit
            .n_qubits,
        17
    );
    for seed in 0..20 {
        let inst = random_small_instance(6, 4, seed).unwrap();
        for t in 1..=3 {
            let dqi = build_dqi_circuit(&inst, 2, t).unwrap();
            assert_eq!(
                dqi.circuit.n_qubits,
                qubit_count(6, 4, inst.max_row_weight(), t)
            );
        }
    }
    assert!(build_dqi_circuit(&ex, 0, 1).is_err());
}

#[test]
fn dicke_prep_two_weights_on_three_qubits() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let gates = build_dicke_prep(&[0, 1, 2], &[h, h]).unwrap();
    let s = run_gates_dense::<f64>(3, 28, &gates, &Init::Zero).unwrap();
    assert!((s.amplitude(0).re - 0.7071).abs() < 1e-4);
    for i in [1u64, 2, 4] {
        assert!((s.amplitude(i).re - 0.40825).abs() < 1e-5);
    }
    for i in [3u64, 5, 6, 7] {
        assert!(s.amplitude(i).norm() < 1e-12);
    }
    assert!(build_dicke_prep(&[0, 1, 2], &[1.0]).unwrap().is_empty());
}

#[test]
fn dicke_prep_matches_target_amplitudes() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let m = rng.random_range(2..=8);
        let ell = rng.random_range(1..=3.min(m - 1));
        let mut w: Vec<f64> = (0..=ell).map(|_| rng.random_range(0.05..1.0)).collect();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        w.iter_mut().for_each(|x| *x /= norm);
        let qubits: Vec<usize> = (0..m).collect();
        let s = run_gates_dense::<f64>(m, 28, &build_dicke_prep(&qubits, &w).unwrap(), &Init::Zero)
            .unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
        for i in 0..1u64 << m {
            let k = i.count_ones() as usize;
            let want = if k <= ell {
                w[k] / (binomial(m, k) as f64).sqrt()
            } else {
                0.0
            };
            assert!(
                (s.amplitude(i) - Complex64::new(want, 0.0)).norm() < 1e-10,
                "m={m} ell={ell} i={i}"
            );
        }
    }
}

#[test]
fn phase_encoding() {
    assert!(build_phase_encoding(&BitVec::zeros(4), &[0, 1, 2, 3]).is_empty());
    let v = BitVec::from_bits(&[1, 0, 1, 0]);
    let gates = build_phase_encoding(&v, &[0, 1, 2, 3]);
    assert_eq!(gates.len(), 2);
    for y in 0..16u64 {
        let out = basis_run(4, &gates, y);
        let sign = if BitVec::from_u64(y, 4).dot(&v) {
            -1.0
        } else {
            1.0
        };
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].0, y);
        assert!((out[0].1.re - sign).abs() < 1e-12);
    }
}

#[test]
fn syndrome_encoding_matches_matvec() {
    let small = small_example_instance();
    assert_eq!(
        build_syndrome_encoding(&small.b_rows, &[0, 1, 2], &[3, 4]).len(),
        4
    );
    for seed in 0..5 {
        let inst = random_small_instance(4, 3, seed).unwrap();
        let gates = build_syndrome_encoding(&inst.b_rows, &[0, 1, 2, 3], &[4, 5, 6]);
        let bt = inst.bt();
        for y in 0..16u64 {
            for s in 0..8u64 {
                let out = basis_image(7, &gates, y | s << 4);
                let syn = matvec_mod2(&bt, &BitVec::from_u64(y, 4)).unwrap().to_u64();
                assert_eq!(out, y | (s ^ syn) << 4);
            }
        }
    }
}

#[test]
fn increment_is_modular() {
    let r2 = build_increment(&[0, 1], None);
    assert_eq!(basis_image(2, &r2, 3), 0);
    assert_eq!(basis_image(2, &r2, 0), 1);
    for r in 1..=4usize {
        let reg: Vec<usize> = (0..r).collect();
        let inc = build_increment(&reg, None);
        for a in 0..1u64 << r {
            assert_eq!(basis_image(r, &inc, a), (a + 1) % (1 << r));
            let mut x = a;
            for _ in 0..1u64 << r {
                x = basis_image(r, &inc, x);
            }
            assert_eq!(x, a);
        }
        // controlled form leaves the register alone when the control is off
        let cinc = build_increment(&reg, Some(r));
        for a in 0..1u64 << r {
            assert_eq!(basis_image(r + 1, &cinc, a), a);
            assert_eq!(
                basis_image(r + 1, &cinc, a | 1 << r),
                (a + 1) % (1 << r) | 1 << r
            );
        }
    }
}

#[test]
fn hamming_weight_counts_ones() {
    // three inputs on qubits 0..3, h on 3..5
    let gates = build_hamming_weight(&[0, 1, 2], &[3, 4]);
    assert_eq!(basis_image(5, &gates, 0b011) >> 3, 2);
    assert_eq!(basis_image(5, &gates, 0), 0);
    for x in 0..8u64 {
        assert_eq!(basis_image(5, &gates, x), x | (x.count_ones() as u64) << 3);
    }
}

#[test]
fn comparator_truth_tables() {
    for r in 1..=3usize {
        let reg: Vec<usize> = (0..r).collect();
        for thr in 0..=(1u64 << r) {
            let g = build_comparator(&reg, thr, r);
            let low = compare_patterns(&reg, thr, r);
            for v in 0..1u64 << r {
                let want = v | ((v >= thr) as u64) << r;
                assert_eq!(basis_image(r + 1, &[g.clone()], v), want);
                assert_eq!(basis_image(r + 1, &low, v), want);
            }
        }
    }
}

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> Vec<(u64, Complex64)> {
    let mut e: Vec<(u64, Complex64)> = (0..1u64 << n)
        .map(|i| {
            (
                i,
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            )
        })
        .collect();
    let norm = e.iter().map(|(_, a)| a.norm_sqr()).sum::<f64>().sqrt();
    e.iter_mut().for_each(|(_, a)| *a /= norm);
    e
}

#[test]
fn lowering_preserves_action_up_to_global_phase() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let gates = vec![
        Gate::X { qubit: 2 },
        Gate::H { qubit: 1 },
        Gate::Cry {
            control: 3,
            target: 0,
            angle: 0.7,
        },
        Gate::Mcx {
            controls: vec![Control::on(0), Control::off(4)],
            target: 2,
        },
        Gate::Mcx {
            controls: vec![Control::off(1)],
            target: 3,
        },
        Gate::Mcx {
            controls: vec![Control::on(0), Control::on(1), Control::off(3)],
            target: 4,
        },
        Gate::Mcx {
            controls: vec![
                Control::on(4),
                Control::on(1),
                Control::off(3),
                Control::on(2),
            ],
            target: 0,
        },
        Gate::CompareGe {
            register: vec![0, 1, 2],
            threshold: 5,
            flag: 4,
        },
        Gate::CompareGe {
            register: vec![3, 1],
            threshold: 0,
            flag: 2,
        },
        Gate::Swap { a: 1, b: 3 },
    ];
    for g in &gates {
        let init = Init::Amplitudes(random_state(5, &mut rng));
        let a = run_gates_dense::<f64>(5, 28, &[g.clone()], &init).unwrap();
        let low = lower_gate(g);
        assert!(low.iter().all(|l| matches!(
            l,
            Gate::Z { .. }
                | Gate::Cnot { .. }
                | Gate::Rx { .. }
                | Gate::Ry { .. }
                | Gate::Rz { .. }
                | Gate::Swap { .. }
        )));
        let b = run_gates_dense::<f64>(5, 28, &low, &init).unwrap();
        let overlap: Complex64 = a
            .amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| x.conj() * y)
            .sum();
        assert!(
            (overlap.norm() - 1.0).abs() < 1e-10,
            "{} lowering differs: {}",
            g.name(),
            overlap.norm()
        );
    }
}

#[test]
fn mcx_lowering_counts() {
    let g = Gate::Mcx {
        controls: vec![Control::on(0), Control::on(1)],
        target: 2,
    };
    let low = lower_gate(&g);
    let cnots = low
        .iter()
        .filter(|g| matches!(g, Gate::Cnot { .. }))
        .count();
    let rzs = low.iter().filter(|g| matches!(g, Gate::Rz { .. })).count();
    assert_eq!(cnots, 6);
    assert_eq!(rzs, 7 + 4);
}

#[test]
fn block_counts_sum_and_simple_blocks() {
    let inst = example_8x6_instance();
    let dqi = build_dqi_circuit(&inst, 2, 1).unwrap();
    let est = gate_counts_blockwise(&dqi.circuit);
    assert_eq!(est.qubits, 26);
    let mut sum = GateCounts::default();
    for (_, c) in &est.blocks {
        sum.add(c);
    }
    assert_eq!(sum, est.totals);
    let get = |label: &str| est.blocks.iter().find(|b| b.0 == label).unwrap().1;
    assert_eq!(get("phase").z, inst.v.weight() as u64);
    assert_eq!(get("phase").total(), inst.v.weight() as u64);
    let nnz: usize = inst.b_rows.iter().map(Vec::len).sum();
    assert_eq!(get("syndrome").cnot, nnz as u64);
    assert_eq!(get("syndrome").total(), nnz as u64);
    assert_eq!(get("hadamard").total(), 3 * inst.n as u64);
    assert!(est.to_csv().starts_with("block,gate,count\n"));
}

#[test]
fn circuit_rejects_bad_operands() {
    let mut c = QuantumCircuit::with_qubits(2);
    assert!(c.push(Gate::X { qubit: 2 }).is_err());
    assert!(c
        .push(Gate::Cnot {
            control: 1,
            target: 1
        })
        .is_err());
    assert!(c
        .push(Gate::Mcx {
            controls: vec![],
            target: 0
        })
        .is_err());
    assert!(c.push(Gate::H { qubit: 1 }).is_ok());
    let json = c.to_json();
    assert!(json.contains("\"kind\": \"H\""));
}

/// Runs the decoder block on `|y⟩|Bᵀy⟩|0⟩` and checks it against classical BP1.
fn check_coherent_equivalence(inst: &XorSatInstance, ell: usize, iterations: usize) {
    let findings = crate::experiments::coherent_bp1_findings(inst, ell, iterations).unwrap();
    assert!(findings.is_empty(), "{findings:?}");
}

#[test]
fn coherent_decoder_matches_classical_bp1() {
    check_coherent_equivalence(&small_example_instance(), 2, 2);
    check_coherent_equivalence(&example_8x6_instance(), 2, 2);
    for seed in 0..6 {
        let inst = random_small_instance(6, 4, seed).unwrap();
        check_coherent_equivalence(&inst, 2, 1 + seed as usize % 3);
    }
}

#[test]
fn decoder_block_is_unitary_on_superpositions() {
    let inst = small_example_instance();
    let dqi = build_dqi_circuit(&inst, 1, 2).unwrap();
    let mut s = SparseState::<f64>::zero(dqi.circuit.n_qubits).unwrap();
    for g in &dqi.circuit.gates {
        s.apply(g).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
    }
    let _ = StateVector::<f64>::zero(3).unwrap();
}
