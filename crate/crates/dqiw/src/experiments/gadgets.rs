use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::encoder::{encode_ilp_c, CarryVariant, CompareMode, Encoder, Ilp01, Row};
use crate::error::Result;

/// Failed checks are collected as messages; an empty list means every check held.
pub type Findings = Vec<String>;

fn satisfied(rows: &[Row], a: &[bool]) -> usize {
    rows.iter()
        .filter(|r| r.vars.iter().fold(false, |acc, &v| acc ^ a[v]) == r.target)
        .count()
}

/// Best satisfied count over the free variables, and every assignment reaching it.
fn best_given(rows: &[Row], nvars: usize, fixed: &[(usize, bool)]) -> (usize, Vec<Vec<bool>>) {
    let free: Vec<usize> = (0..nvars)
        .filter(|v| !fixed.iter().any(|(f, _)| f == v))
        .collect();
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

fn bits_of(ids: &[usize], value: u64) -> Vec<(usize, bool)> {
    ids.iter()
        .enumerate()
        .map(|(k, &b)| (b, (value >> k) & 1 == 1))
        .collect()
}

fn int(a: &[bool], bits: &[usize]) -> u64 {
    bits.iter()
        .enumerate()
        .map(|(k, &b)| (a[b] as u64) << k)
        .sum()
}

fn check(findings: &mut Findings, ok: bool, msg: impl FnOnce() -> String) {
    if !ok {
        findings.push(msg());
    }
}

/// Exhaustive semantics of AND, CARRY (both variants), CARRY1, the comparator
/// and the equality block.
pub fn verify_gadget_semantics() -> Result<Findings> {
    let mut out = Findings::new();

    let (mut enc, ids) = Encoder::with_inputs(CarryVariant::Classic, 3);
    let e = enc.emit_and(ids[0], ids[1], ids[2])?;
    check(&mut out, (e.xi, e.eta) == (4, 3), || {
        format!("AND counts {:?}", (e.xi, e.eta))
    });
    for w in 0..8u8 {
        let a = [w & 1 == 1, w & 2 == 2, w & 4 == 4];
        let s = satisfied(&e.rows, &a);
        let holds = a[2] == (a[0] && a[1]);
        check(&mut out, (s == 3) == holds && s <= 3, || {
            format!("AND at {a:?}: {s}/4")
        });
    }

    for variant in [CarryVariant::Classic, CarryVariant::Majority] {
        let (mut enc, ids) = Encoder::with_inputs(variant, 3);
        let (e, s, c) = enc.emit_carry(ids[0], ids[1], ids[2])?;
        let nvars = enc.registry().len();
        check(&mut out, (e.xi, e.eta) == variant.carry_cost(), || {
            format!("{variant:?} CARRY counts {:?}", (e.xi, e.eta))
        });
        let (global, _) = best_given(&e.rows, nvars, &[]);
        check(&mut out, global == e.eta, || {
            format!("{variant:?} CARRY global max {global}")
        });
        for w in 0..8u64 {
            let (best, arg) = best_given(&e.rows, nvars, &bits_of(&ids, w));
            let total = w.count_ones();
            check(&mut out, best == e.eta, || {
                format!("{variant:?} CARRY input {w}: max {best}")
            });
            let right = arg
                .iter()
                .all(|a| a[s] == (total % 2 == 1) && a[c] == (total >= 2));
            check(&mut out, right, || {
                format!("{variant:?} CARRY input {w}: wrong sum or carry at the maximum")
            });
            // the relation fails whenever s or c is forced to the wrong value
            for (var, want) in [(s, total % 2 == 1), (c, total >= 2)] {
                let mut fixed = bits_of(&ids, w);
                fixed.push((var, !want));
                let (worse, _) = best_given(&e.rows, nvars, &fixed);
                check(&mut out, worse < e.eta, || {
                    format!("{variant:?} CARRY input {w}: wrong output still reaches {worse}")
                });
            }
        }
    }

    let (mut enc, ids) = Encoder::with_inputs(CarryVariant::Classic, 2);
    let (e, s, c) = enc.emit_carry1(ids[0], ids[1])?;
    let nvars = enc.registry().len();
    check(&mut out, (e.xi, e.eta) == (5, 4), || {
        format!("CARRY1 counts {:?}", (e.xi, e.eta))
    });
    for w in 0..4u64 {
        let (best, arg) = best_given(&e.rows, nvars, &bits_of(&ids, w));
        check(&mut out, best == 4, || {
            format!("CARRY1 input {w}: max {best}")
        });
        let right = arg
            .iter()
            .all(|a| a[s] == (w.count_ones() == 1) && a[c] == (w == 3));
        check(&mut out, right, || {
            format!("CARRY1 input {w}: wrong output at the maximum")
        });
    }

    for mode in [CompareMode::Lt, CompareMode::Ge] {
        for ell in 1..=3usize {
            for b in 0..(1u64 << ell) {
                let (mut enc, ids) = Encoder::with_inputs(CarryVariant::Classic, ell);
                let e = enc.emit_comparator(&ids, b, mode)?;
                let nvars = enc.registry().len();
                for x in 0..(1u64 << ell) {
                    let holds = match mode {
                        CompareMode::Lt => x < b,
                        CompareMode::Ge => x >= b,
                    };
                    let (best, _) = best_given(&e.rows, nvars, &bits_of(&ids, x));
                    check(&mut out, (best == e.eta) == holds && best <= e.eta, || {
                        format!(
                            "comparator {mode:?} ell {ell} b {b} x {x}: {best}/{}",
                            e.eta
                        )
                    });
                }
            }
        }
    }

    for ell in 1..=3usize {
        for b in 0..(1u64 << ell) {
            let (mut enc, ids) = Encoder::with_inputs(CarryVariant::Classic, ell);
            let e = enc.emit_equality(&ids, b)?;
            for x in 0..(1u64 << ell) {
                let a: Vec<bool> = (0..ell).map(|k| (x >> k) & 1 == 1).collect();
                let s = satisfied(&e.rows, &a);
                check(&mut out, (s == e.eta) == (x == b), || {
                    format!("equality ell {ell} b {b} x {x}: {s}/{}", e.eta)
                });
            }
        }
    }

    let (mut enc, ids) = Encoder::with_inputs(CarryVariant::Classic, 4);
    let (e, y) = enc.emit_ia(&ids[..2], &ids[2..])?;
    let nvars = enc.registry().len();
    for u in 0..4 {
        for v in 0..4 {
            let mut fixed = bits_of(&ids[..2], u);
            fixed.extend(bits_of(&ids[2..], v));
            let (best, arg) = best_given(&e.rows, nvars, &fixed);
            let right = best == e.eta && arg.iter().all(|a| int(a, &y) == u + v);
            check(&mut out, right, || format!("IA {u}+{v}: max {best}"));
        }
    }
    Ok(out)
}

/// Random 0–1 ILP with `n` variables, up to two inequalities and one equality.
pub fn random_tiny_ilp<R: Rng>(rng: &mut R, n: usize, max_coeff: i64) -> Ilp01 {
    let coeff = |rng: &mut R| rng.random_range(-max_coeff..=max_coeff);
    let c = (0..n).map(|_| coeff(rng)).collect();
    let m = rng.random_range(0..=2);
    let a: Vec<Vec<i64>> = (0..m)
        .map(|_| (0..n).map(|_| coeff(rng)).collect())
        .collect();
    let b = (0..m)
        .map(|_| rng.random_range(-2..=2 * max_coeff))
        .collect();
    let p = rng.random_range(0..=1);
    let a_eq: Vec<Vec<i64>> = (0..p)
        .map(|_| (0..n).map(|_| coeff(rng)).collect())
        .collect();
    let b_eq = (0..p).map(|_| rng.random_range(0..=max_coeff)).collect();
    Ilp01::new(c, a, b, a_eq, b_eq).expect("generated ilp is valid")
}

/// Closed-form counts of IA, comparator and HWA for `ℓ ∈ 1..=8`, and reported
/// totals against a recount of the emitted rows on random tiny ILPs.
pub fn verify_count_formulas(seed: u64, ilps: usize) -> Result<Findings> {
    let mut out = Findings::new();
    for ell in 1..=8usize {
        let (mut enc, ids) = Encoder::with_inputs(CarryVariant::Classic, 2 * ell);
        let (e, _) = enc.emit_ia(&ids[..ell], &ids[ell..])?;
        check(
            &mut out,
            (e.xi, e.eta) == (14 * ell - 8, 11 * ell - 6),
            || format!("IA ell {ell}: {:?}", (e.xi, e.eta)),
        );
        check(&mut out, e.rows.len() == e.xi, || {
            format!("IA ell {ell}: {} rows emitted", e.rows.len())
        });

        for mode in [CompareMode::Lt, CompareMode::Ge] {
            let mut bs = vec![1u64, (1 << ell) - 1, (1 << ell) / 2 + 1];
            bs.retain(|&b| b < 1 << ell);
            bs.dedup();
            for b in bs {
                let (mut enc, ids) = Encoder::with_inputs(CarryVariant::Classic, ell);
                let e = enc.emit_comparator(&ids, b, mode)?;
                check(
                    &mut out,
                    (e.xi, e.eta) == (5 * ell - 2, 4 * ell - 1) && e.rows.len() == e.xi,
                    || format!("comparator {mode:?} ell {ell} b {b}: {:?}", (e.xi, e.eta)),
                );
            }
        }

        let (mut enc, ids) = Encoder::with_inputs(CarryVariant::Classic, 1);
        let (e, _) = enc.emit_hwa((1 << ell) - 1, ids[0])?;
        check(&mut out, e.xi == ell && e.rows.len() == ell, || {
            format!("HWA ell {ell}: {}", e.xi)
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..ilps {
        let n = rng.random_range(2..=4);
        let ilp = random_tiny_ilp(&mut rng, n, 7);
        let (lo, hi) = ilp.objective_range();
        let beta = rng.random_range(lo..=hi);
        for variant in [CarryVariant::Classic, CarryVariant::Majority] {
            let (inst, report) = encode_ilp_c(&ilp, beta, variant)?;
            let block_sum: usize = report.blocks.iter().map(|b| b.xi).sum();
            let ok = report.xi == inst.m
                && block_sum == inst.m
                && report.xi_formula == inst.m
                && report.eta == report.eta_formula;
            check(&mut out, ok, || {
                format!(
                    "ilp {case} {variant:?}: rows {} reported {} blocks {block_sum} formula {}",
                    inst.m, report.xi, report.xi_formula
                )
            });
        }
        let coeffs: Vec<u64> = (0..n + 2).map(|_| rng.random_range(0..40)).collect();
        for variant in [CarryVariant::Classic, CarryVariant::Majority] {
            let (mut enc, ids) = Encoder::with_inputs(variant, coeffs.len());
            let (e, _, tree) = enc.emit_mia(&coeffs, &ids)?;
            let Some(tree) = tree else {
                out.push(format!("MIA {coeffs:?}: no adder tree"));
                continue;
            };
            let ok = e.rows.len() == e.xi
                && e.xi == tree.xi(&coeffs, variant)
                && e.eta == tree.eta(&coeffs, variant);
            check(&mut out, ok, || {
                format!(
                    "MIA {coeffs:?} {variant:?}: {} rows, xi {}",
                    e.rows.len(),
                    e.xi
                )
            });
        }
    }
    Ok(out)
}
