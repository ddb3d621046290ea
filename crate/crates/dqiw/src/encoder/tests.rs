use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::experiments::{distance_ilp, random_tiny_ilp};
use crate::gf2::min_dependent_rows;
use crate::xorsat::exact_optimum;

fn satisfied(rows: &[Row], assignment: &[bool]) -> usize {
    rows.iter()
        .filter(|r| r.vars.iter().fold(false, |acc, &v| acc ^ assignment[v]) == r.target)
        .count()
}

/// Best count over all free variables and every assignment reaching it.
fn best_given(rows: &[Row], nvars: usize, fixed: &[(usize, bool)]) -> (usize, Vec<Vec<bool>>) {
    let free: Vec<usize> = (0..nvars)
        .filter(|v| !fixed.iter().any(|(f, _)| f == v))
        .collect();
    assert!(free.len() <= 22);
    let mut a = vec![false; nvars];
    for &(v, b) in fixed {
        a[v] = b;
    }
    let mut best = 0;
    let mut arg = Vec::new();
    for word in 0u64..(1 << free.len()) {
        for (i, &v) in free.iter().enumerate() {
            a[v] = (word >> i) & 1 == 1;
        }
        let s = satisfied(rows, &a);
        if s > best {
            best = s;
            arg.clear();
        }
        if s == best {
            arg.push(a.clone());
        }
    }
    (best, arg)
}

fn int(a: &[bool], bits: &[usize]) -> u64 {
    bits.iter()
        .enumerate()
        .map(|(k, &b)| (a[b] as u64) << k)
        .sum()
}

fn fixed_int(bits: &[usize], value: u64) -> Vec<(usize, bool)> {
    bits.iter()
        .enumerate()
        .map(|(k, &b)| (b, (value >> k) & 1 == 1))
        .collect()
}

#[test]
fn and_gadget_exhaustive() {
    let (mut enc, ids) = Encoder::with_inputs(CarryVariant::Classic, 3);
    let e = enc.emit_and(ids[0], ids[1], ids[2]).unwrap();
    assert_eq!((e.xi, e.eta), (4, 3));
    for w in 0..8u8 {
        let a = [w & 1 == 1, w & 2 == 2, w & 4 == 4];
        let s = satisfied(&e.rows, &a);
        if a[2] == (a[0] && a[1]) {
            assert_eq!(s, 3);
        } else {
            assert!(s < 3);
        }
    }
    assert_eq!(satisfied(&e.rows, &[true, true, false]), 1);
}

#[test]
fn carry_gadget_exhaustive_both_variants() {
    for variant in [CarryVariant::Classic, CarryVariant::Majority] {
        let (mut enc, ids) = Encoder::with_inputs(variant, 3);
        let (e, s, c) = enc.emit_carry(ids[0], ids[1], ids[2]).unwrap();
        assert_eq!((e.xi, e.eta), variant.carry_cost());
        let nvars = enc.registry().len();
        for w in 0..8u64 {
            let fixed = fixed_int(&ids, w);
            let (best, arg) = best_given(&e.rows, nvars, &fixed);
            assert_eq!(best, e.eta, "{variant:?} input {w}");
            let total = w.count_ones();
            for a in arg {
                assert_eq!(a[s], total % 2 == 1);
                assert_eq!(a[c], total >= 2);
            }
        }
    }
}

#[test]
fn classic_carry_examples() {
    let (mut enc, ids) = Encoder::with_inputs(CarryVariant::Classic, 3);
    let (e, s, c) = enc.emit_carry(ids[0], ids[1], ids[2]).unwrap();
    let n = enc.registry().len();
    assert_eq!(satisfied(&e.rows, &vec![false; n]), 11);
    let mut a = vec![false; n];
    a[ids[0]] = true;
    a[ids[1]] = true;
    a[c] = true;
    let p = (0..n)
        .find(|&v| enc.registry().get(v).unwrap().kind == "and_p")
        .unwrap();
    a[p] = true;
    assert!(!a[s]);
    assert_eq!(satisfied(&e.rows, &a), 11);
    // every one of the 2^8 assignments at 11 satisfies the adder relations
    for w in 0..(1u64 << n) {
        let a: Vec<bool> = (0..n).map(|k| (w >> k) & 1 == 1).collect();
        if satisfied(&e.rows, &a) == 11 {
            let t = a[ids[0]] as u8 + a[ids[1]] as u8 + a[ids[2]] as u8;
            assert_eq!(a[s], t % 2 == 1);
            assert_eq!(a[c], t >= 2);
        }
    }
}

#[test]
fn carry1_gadget_examples() {
    let (mut enc, ids) = Encoder::with_inputs(CarryVariant::Classic, 2);
    let (e, s, c) = enc.emit_carry1(ids[0], ids[1]).unwrap();
    assert_eq!((e.xi, e.eta), (5, 4));
    let n = enc.registry().len();
    let mut a = vec![false; n];
    assert_eq!(satisfied(&e.rows, &a), 4);
    a[ids[0]] = true;
    a[ids[1]] = true;
    a[c] = true;
    assert_eq!(satisfied(&e.rows, &a), 4);
    for w in 0..4u64 {
        let (best, arg) = best_given(&e.rows, n, &fixed_int(&ids, w));
        assert_eq!(best, 4);
        for a in arg {
            assert_eq!(a[s], w.count_ones() == 1);
            assert_eq!(a[c], w == 3);
        }
    }
    let (best, _) = best_given(&e.rows, n, &[(ids[0], true), (ids[1], false), (s, false)]);
    assert!(best <= 3);
}

#[test]
fn carry2_gadget_semantics() {
    let (mut enc, ids) = Encoder::with_inputs(CarryVariant::Classic, 2);
    let (e, z, c) = enc.emit_carry2(ids[0], ids[1]).unwrap();
    assert_eq!((e.xi, e.eta), (5, 4));
    let n = enc.registry().len();
    for (x, cp, want_c, want_z) in [
        (false, false, false, true),
        (true, true, true, true),
        (true, false, true, false),
        (false, true, true, false),
    ] {
        let (best, arg) = best_given(&e.rows, n, &[(ids[0], x), (ids[1], cp)]);
        assert_eq!(best, 4);
        assert!(arg.iter().all(|a| a[c] == want_c && a[z] == want_z));
    }
}

#[test]
fn ia_counts_and_semantics() {
    for variant in [CarryVariant::Classic, CarryVariant::Majority] {
        let (f, g) = variant.carry_cost();
        for ell in 1..=8 {
            let (mut enc, ids) = Encoder::with_inputs(variant, 2 * ell);
            let (e, s) = enc.emit_ia(&ids[..ell], &ids[ell..]).unwrap();
            assert_eq!(s.len(), ell + 1);
            assert_eq!(e.xi, 5 + f * (ell - 1) + 1);
            assert_eq!(e.eta, 4 + g * (ell - 1) + 1);
            if variant == CarryVariant::Classic {
                assert_eq!((e.xi, e.eta), (14 * ell - 8, 11 * ell - 6));
            }
        }
    }
    assert_eq!((14 * 3 - 8, 11 * 3 - 6), (34, 27));
    for variant in [CarryVariant::Classic, CarryVariant::Majority] {
        let (mut enc, ids) = Encoder::with_inputs(variant, 4);
        let (e, s) = enc.emit_ia(&ids[..2], &ids[2..]).unwrap();
        let n = enc.registry().len();
        for u in 0..4 {
            for v in 0..4 {
                let mut fixed = fixed_int(&ids[..2], u);
                fixed.extend(fixed_int(&ids[2..], v));
                let (best, arg) = best_given(&e.rows, n, &fixed);
                assert_eq!(best, e.eta);
                assert!(arg.iter().all(|a| int(a, &s) == u + v));
            }
        }
    }
}

#[test]
fn wia_counts_and_semantics() {
    let (mut enc, ids) = Encoder::with_inputs(CarryVariant::Classic, 2);
    let (e, _) = enc.emit_wia(12, 10, ids[0], ids[1]).unwrap();
    assert_eq!(e.xi, 1 + 2 + 5 + 5 + 14);
    let (mut enc, ids) = Encoder::with_inputs(CarryVariant::Classic, 2);
    let (e, y) = enc.emit_wia(0, 0, ids[0], ids[1]).unwrap();
    assert_eq!(e.xi, 1 + 2);
    let (best, arg) = best_given(&e.rows, enc.registry().len(), &[]);
    assert_eq!(best, e.eta);
    assert!(arg.iter().all(|a| int(a, &y) == 0));
    for variant in [CarryVariant::Classic, CarryVariant::Majority] {
        for (a1, a2) in [(1u64, 2u64), (3, 1), (3, 3), (2, 2), (1, 1), (5, 6)] {
            let (mut enc, ids) = Encoder::with_inputs(variant, 2);
            let (e, y) = enc.emit_wia(a1, a2, ids[0], ids[1]).unwrap();
            let n = enc.registry().len();
            for w in 0..4u64 {
                let (best, arg) = best_given(&e.rows, n, &fixed_int(&ids, w));
                assert_eq!(best, e.eta);
                let want = a1 * (w & 1) + a2 * (w >> 1);
                assert!(arg.iter().all(|a| int(a, &y) == want), "{a1} {a2} {w}");
            }
        }
    }
}

#[test]
fn wia_matches_row_cost_table() {
    for variant in [CarryVariant::Classic, CarryVariant::Majority] {
        for a1 in 0..16u64 {
            for a2 in 0..16u64 {
                let (mut enc, ids) = Encoder::with_inputs(variant, 2);
                let (e, _) = enc.emit_wia(a1, a2, ids[0], ids[1]).unwrap();
                let ell = bit_len(a1).max(bit_len(a2));
                let (xi, eta) = (0..ell).fold((1, 1), |(x, y), k| {
                    let (f, g) = wia_row_cost((a1 >> k) & 1 == 1, (a2 >> k) & 1 == 1, k, variant);
                    (x + f, y + g)
                });
                assert_eq!((e.xi, e.eta), (xi, eta));
            }
        }
    }
}

#[test]
fn hwa_rows_and_counts() {
    let (mut enc, ids) = Encoder::with_inputs(CarryVariant::Classic, 1);
    let (e, y) = enc.emit_hwa(5, ids[0]).unwrap();
    assert_eq!(y.len(), 3);
    let rows: Vec<(Vec<usize>, bool)> = e.rows.iter().map(|r| (r.vars.clone(), r.target)).collect();
    assert_eq!(
        rows,
        vec![
            (vec![0, y[0]], false),
            (vec![y[1]], false),
            (vec![0, y[2]], false)
        ]
    );
    let (best, arg) = best_given(&e.rows, enc.registry().len(), &[(ids[0], true)]);
    assert_eq!(best, 3);
    assert!(arg.iter().all(|a| int(a, &y) == 5));
    for ell in 1..=8 {
        let a = (1u64 << ell) - 1;
        let (mut enc, ids) = Encoder::with_inputs(CarryVariant::Classic, 1);
        let (e, _) = enc.emit_hwa(a, ids[0]).unwrap();
        assert_eq!((e.xi, e.eta), (ell, ell));
    }
    let (mut enc, ids) = Encoder::with_inputs(CarryVariant::Classic, 1);
    let (e, _) = enc.emit_hwa(0, ids[0]).unwrap();
    assert!(e
        .rows
        .iter()
        .all(|r| r.vars.len() == 1 && !r.target && r.vars[0] != ids[0]));
}

#[test]
fn mia_semantics_three_unit_terms() {
    for variant in [CarryVariant::Classic, CarryVariant::Majority] {
        let (mut enc, ids) = Encoder::with_inputs(variant, 3);
        let (e, y, tree) = enc.emit_mia(&[1, 1, 1], &ids).unwrap();
        assert_eq!(tree.as_ref().unwrap().layers, vec![2, 1]);
        let n = enc.registry().len();
        for w in 0..8u64 {
            let (best, arg) = best_given(&e.rows, n, &fixed_int(&ids, w));
            assert_eq!(best, e.eta);
            assert!(arg.iter().all(|a| int(a, &y) == w.count_ones() as u64));
        }
    }
}

#[test]
fn mia_semantics_weighted_terms_by_elimination() {
    let coeffs = [3u64, 5, 2, 7];
    let (mut enc, ids) = Encoder::with_inputs(CarryVariant::Classic, 4);
    let (e, y, _) = enc.emit_mia(&coeffs, &ids).unwrap();
    assert_eq!(e.xi, enc.xi());
    let inst = enc.instance();
    for w in 0..16u64 {
        let want: u64 = (0..4).map(|k| coeffs[k] * ((w >> k) & 1)).sum();
        let mut fixed = fixed_int(&ids, w);
        let (_, best) = exact_optimum(&inst, &fixed).unwrap();
        assert_eq!(best.satisfied, e.eta);
        // pinning the output to any other value loses a row
        fixed.extend(fixed_int(&y, want ^ 1));
        let (_, worse) = exact_optimum(&inst, &fixed).unwrap();
        assert!(worse.satisfied < e.eta);
    }
}

#[test]
fn mia_shapes() {
    let (mut enc, ids) = Encoder::with_inputs(CarryVariant::Classic, 2);
    let (_, _, tree) = enc.emit_mia(&[3, 1], &ids).unwrap();
    let tree = tree.unwrap();
    assert_eq!(tree.layers, vec![1]);
    assert!(tree.ia_operands().is_empty());
    assert_eq!(enc.breakdown().get("ia"), None);

    let tree = AdderTree::from_alphas(&[2; 7]);
    assert_eq!(tree.layers, vec![4, 2, 1]);
    assert_eq!(tree.depth, 2);
    assert_eq!(tree.mu[0], vec![3, 3, 3, 2]);
    assert_eq!(tree.mu[1], vec![4, 4]);
    assert_eq!(tree.output_width(), 5);

    let tree = AdderTree::from_alphas(&[1; 5]);
    assert_eq!(tree.layers, vec![3, 2, 1]);
    assert_eq!(tree.mu, vec![vec![2, 2, 1], vec![3, 1], vec![4]]);

    let (mut enc, ids) = Encoder::with_inputs(CarryVariant::Classic, 1);
    let (e, y, tree) = enc.emit_mia(&[6], &ids).unwrap();
    assert!(tree.is_none());
    assert_eq!((e.xi, y.len()), (3, 3));
}

#[test]
fn mia_recorded_counts_match_tree_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let n = rng.random_range(2..=9);
        let coeffs: Vec<u64> = (0..n).map(|_| rng.random_range(0..40)).collect();
        for variant in [CarryVariant::Classic, CarryVariant::Majority] {
            let (mut enc, ids) = Encoder::with_inputs(variant, n);
            let (e, y, tree) = enc.emit_mia(&coeffs, &ids).unwrap();
            let tree = tree.unwrap();
            assert_eq!(e.xi, tree.xi(&coeffs, variant));
            assert_eq!(e.eta, tree.eta(&coeffs, variant));
            assert_eq!(y.len(), tree.output_width());
            assert_eq!(e.xi, enc.xi());
        }
    }
}

#[test]
fn comparator_counts() {
    for mode in [CompareMode::Lt, CompareMode::Ge] {
        for ell in 1..=8usize {
            for b in [1u64, (1 << ell) - 1, (1 << ell) / 2 + 1, 3] {
                if b == 0 || b >= 1 << ell {
                    continue;
                }
                let (mut enc, ids) = Encoder::with_inputs(CarryVariant::Classic, ell);
                let e = enc.emit_comparator(&ids, b, mode).unwrap();
                assert_eq!(
                    (e.xi, e.eta),
                    (5 * ell - 2, 4 * ell - 1),
                    "ell {ell} b {b} {mode:?}"
                );
            }
        }
    }
    let (mut enc, ids) = Encoder::with_inputs(CarryVariant::Classic, 3);
    let e = enc.emit_comparator(&ids, 5, CompareMode::Lt).unwrap();
    assert_eq!((e.xi, e.eta), (13, 11));
}

#[test]
fn comparator_semantics_exhaustive() {
    for mode in [CompareMode::Lt, CompareMode::Ge] {
        for ell in 1..=3usize {
            for b in 0..(1u64 << ell) {
                let (mut enc, ids) = Encoder::with_inputs(CarryVariant::Classic, ell);
                let e = enc.emit_comparator(&ids, b, mode).unwrap();
                enc.instance().ensure_distinct_rows().unwrap();
                let n = enc.registry().len();
                let (global, _) = best_given(&e.rows, n, &[]);
                for x in 0..(1u64 << ell) {
                    let holds = match mode {
                        CompareMode::Lt => x < b,
                        CompareMode::Ge => x >= b,
                    };
                    let (best, _) = best_given(&e.rows, n, &fixed_int(&ids, x));
                    if holds {
                        assert_eq!(best, e.eta, "x {x} b {b} {mode:?}");
                    } else {
                        assert!(best < e.eta, "x {x} b {b} {mode:?}");
                    }
                }
                assert!(global <= e.eta);
            }
        }
    }
    let (mut enc, ids) = Encoder::with_inputs(CarryVariant::Classic, 3);
    let e = enc.emit_comparator(&ids, 5, CompareMode::Lt).unwrap();
    let n = enc.registry().len();
    assert_eq!(best_given(&e.rows, n, &fixed_int(&ids, 2)).0, 11);
    assert!(best_given(&e.rows, n, &fixed_int(&ids, 6)).0 < 11);
}

#[test]
fn equality_gadget() {
    let (mut enc, ids) = Encoder::with_inputs(CarryVariant::Classic, 3);
    let e = enc.emit_equality(&ids, 6).unwrap();
    assert_eq!((e.xi, e.eta), (3, 3));
    let pins: Vec<(Vec<usize>, bool)> = e.rows.iter().map(|r| (r.vars.clone(), r.target)).collect();
    assert_eq!(
        pins,
        vec![(vec![0], false), (vec![1], true), (vec![2], true)]
    );
    for x in 0..8u64 {
        let a: Vec<bool> = (0..3).map(|k| (x >> k) & 1 == 1).collect();
        assert_eq!(satisfied(&e.rows, &a) == 3, x == 6);
    }
    let (mut enc, ids) = Encoder::with_inputs(CarryVariant::Classic, 2);
    let e = enc.emit_equality(&ids, 0).unwrap();
    assert!(e.rows.iter().all(|r| !r.target));
}

#[test]
fn contradiction_gadget_loses_one_row() {
    let mut enc = Encoder::new(CarryVariant::Classic);
    let e = enc.emit_contradiction().unwrap();
    assert_eq!((e.xi, e.eta), (3, 3));
    assert_eq!(best_given(&e.rows, enc.registry().len(), &[]).0, 2);
}

fn tiny_ilp() -> Ilp01 {
    Ilp01::new(vec![1, 1], vec![vec![1, 1]], vec![1], vec![], vec![]).unwrap()
}

#[test]
fn tiny_ilp_beta_search() {
    let ilp = tiny_ilp();
    assert!(xorsat_feasible(&ilp, 1, CarryVariant::Classic).unwrap());
    assert!(!xorsat_feasible(&ilp, 2, CarryVariant::Classic).unwrap());
    let beta =
        binary_search_beta(&ilp, |b| xorsat_feasible(&ilp, b, CarryVariant::Classic)).unwrap();
    assert_eq!(beta, 1);
    assert_eq!(
        binary_search_beta(&ilp, |b| direct_ilp_feasible(&ilp, b)).unwrap(),
        1
    );
    let zero = Ilp01::new(vec![0, 0], vec![vec![1, 1]], vec![1], vec![], vec![]).unwrap();
    assert_eq!(
        binary_search_beta(&zero, |b| direct_ilp_feasible(&zero, b)).unwrap(),
        0
    );
    let infeasible = Ilp01::new(vec![1], vec![], vec![], vec![vec![1]], vec![2]).unwrap();
    assert!(binary_search_beta(&infeasible, |b| direct_ilp_feasible(&infeasible, b)).is_err());
}

#[test]
fn ilp_json_keys() {
    let ilp =
        Ilp01::from_json(r#"{"c":[1,-2],"A":[[1,1]],"b":[1],"A_eq":[[1,0]],"b_eq":[1]}"#).unwrap();
    assert_eq!(ilp.a_eq, vec![vec![1, 0]]);
    assert_eq!(Ilp01::from_json(&ilp.to_json()).unwrap(), ilp);
    let err = Ilp01::from_json(r#"{"c":[1,2],"A":[[1]],"b":[1]}"#).unwrap_err();
    assert!(err.to_string().contains("A[0]"));
}

#[test]
fn report_matches_structural_recount() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let ilp = random_tiny_ilp(&mut rng, 3, 7);
        let (lo, hi) = ilp.objective_range();
        let beta = rng.random_range(lo..=hi);
        for variant in [CarryVariant::Classic, CarryVariant::Majority] {
            let (inst, report) = encode_ilp_c(&ilp, beta, variant).unwrap();
            assert_eq!(report.xi, inst.m);
            assert_eq!(report.xi, inst.b_rows.len());
            assert_eq!(report.blocks.iter().map(|b| b.xi).sum::<usize>(), inst.m);
            assert_eq!(
                report.breakdown.get("complement").map_or(0, |t| t.xi),
                report.complements
            );
            assert!(inst.duplicate_rows().is_none());
            assert_eq!(report.xi_formula, report.xi);
        }
    }
}

#[test]
fn encoding_soundness_exhaustive_on_tiny_ilps() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for case in 0..30 {
        let n = rng.random_range(1..=3);
        let ilp = random_tiny_ilp(&mut rng, n, 7);
        let (lo, hi) = ilp.objective_range();
        let beta = rng.random_range(lo - 1..=hi + 1);
        let variant = if case % 2 == 0 {
            CarryVariant::Classic
        } else {
            CarryVariant::Majority
        };
        let (inst, report) = encode_ilp_c(&ilp, beta, variant).unwrap();
        for w in 0..(1u64 << n) {
            let x: Vec<bool> = (0..n).map(|k| (w >> k) & 1 == 1).collect();
            let fixed: Vec<(usize, bool)> = x.iter().copied().enumerate().collect();
            let (_, best) = exact_optimum(&inst, &fixed).unwrap();
            let holds = ilp.objective(&x) >= beta && ilp.is_feasible(&x);
            if holds {
                assert_eq!(
                    best.satisfied, report.eta,
                    "case {case} {ilp:?} beta {beta} x {x:?}"
                );
            } else {
                assert!(
                    best.satisfied < report.eta,
                    "case {case} {ilp:?} beta {beta} x {x:?}"
                );
            }
        }
    }
}

#[test]
fn beta_search_oracles_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut checked = 0;
    while checked < 20 {
        let ilp = random_tiny_ilp(&mut rng, 3, 5);
        let direct = binary_search_beta(&ilp, |b| direct_ilp_feasible(&ilp, b));
        let encoded = binary_search_beta(&ilp, |b| xorsat_feasible(&ilp, b, CarryVariant::Classic));
        match (direct, encoded) {
            (Ok(d), Ok(e)) => assert_eq!(d, e, "{ilp:?}"),
            (Err(_), Err(_)) => {}
            (d, e) => panic!("oracles disagree on {ilp:?}: {d:?} vs {e:?}"),
        }
        checked += 1;
    }
}

#[test]
fn size_stays_below_closed_form_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for _ in 0..40 {
        let n = rng.random_range(2..=8);
        let mut ilp = random_tiny_ilp(&mut rng, n, 15);
        for v in ilp
            .c
            .iter_mut()
            .chain(ilp.a.iter_mut().flatten())
            .chain(ilp.a_eq.iter_mut().flatten())
        {
            *v = v.abs();
        }
        let (_, hi) = ilp.objective_range();
        let (inst, _) = encode_ilp_c(&ilp, hi / 2, CarryVariant::Classic).unwrap();
        assert!(
            inst.m <= ilp_c_size_upper_bound(&ilp),
            "{} > {}",
            inst.m,
            ilp_c_size_upper_bound(&ilp)
        );
    }
}

#[test]
fn classic_encoding_has_distance_three_majority_does_not() {
    let (ilp, beta) = distance_ilp();
    let (classic, _) = encode_ilp_c(&ilp, beta, CarryVariant::Classic).unwrap();
    let (majority, _) = encode_ilp_c(&ilp, beta, CarryVariant::Majority).unwrap();
    let d_classic = min_dependent_rows(&classic.b_matrix(), 4).unwrap().unwrap();
    assert_eq!(d_classic.size, 3);
    assert!(min_dependent_rows(&majority.b_matrix(), 3)
        .unwrap()
        .is_none());
}

#[test]
fn any_and_block_gives_dependency_at_most_four() {
    let ilp = tiny_ilp();
    for variant in [CarryVariant::Classic, CarryVariant::Majority] {
        let (inst, _) = encode_ilp_c(&ilp, 1, variant).unwrap();
        let d = min_dependent_rows(&inst.b_matrix(), 4).unwrap().unwrap();
        assert!(d.size <= 4);
    }
}

proptest! {
    #[test]
    fn ia_adds_on_random_operands(u in 0u64..64, v in 0u64..64, majority in any::<bool>()) {
        let variant = if majority { CarryVariant::Majority } else { CarryVariant::Classic };
        let (mut enc, ids) = Encoder::with_inputs(variant, 12);
        let (e, s) = enc.emit_ia(&ids[..6], &ids[6..]).unwrap();
        let inst = enc.instance();
        let mut fixed = fixed_int(&ids[..6], u);
        fixed.extend(fixed_int(&ids[6..], v));
        let (a, best) = exact_optimum(&inst, &fixed).unwrap();
        prop_assert_eq!(best.satisfied, e.eta);
        let bits: Vec<bool> = a.iter().collect();
        prop_assert_eq!(int(&bits, &s), u + v);
    }

    #[test]
    fn comparator_decides_on_random_widths(ell in 1usize..7, b_seed in any::<u64>(), x_seed in any::<u64>(), ge in any::<bool>()) {
        let b = b_seed % (1u64 << ell);
        let x = x_seed % (1u64 << ell);
        let mode = if ge { CompareMode::Ge } else { CompareMode::Lt };
        let (mut enc, ids) = Encoder::with_inputs(CarryVariant::Classic, ell);
        let e = enc.emit_comparator(&ids, b, mode).unwrap();
        let inst = enc.instance();
        let (_, best) = exact_optimum(&inst, &fixed_int(&ids, x)).unwrap();
        let holds = if ge { x >= b } else { x < b };
        prop_assert_eq!(best.satisfied == e.eta, holds);
    }
}
