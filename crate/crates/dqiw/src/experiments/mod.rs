//! End-to-end pipelines behind the acceptance suite and `dqiw reproduce`.
//!
//! Every runner returns a [`CriterionOutcome`] carrying a pass flag, a one-line
//! summary and a CSV table of the underlying numbers.

mod gadgets;

pub use gadgets::{random_tiny_ilp, verify_count_formulas, verify_gadget_semantics, Findings};

use std::fmt;
use std::time::{Duration, Instant};

use itertools::Itertools;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analytics::{classify_decodable, compute_dicke_weights, predict_expectation};
use crate::circuits::{build_dqi_circuit, gate_counts_blockwise, qubit_count, DqiCircuit};
use crate::decoders::{
    benchmark_success_rate, bp1_decode, bp1_flip_trace, DecoderKind, SuccessCell,
};
use crate::encoder::{
    binary_search_beta, direct_ilp_feasible, encode_ilp_c, CarryVariant, EncodingReport, Ilp01,
};
use crate::error::{Error, Result};
use crate::gf2::{matvec_mod2, min_dependent_rows, BitMatrix, BitVec};
use crate::instances::{
    bundling_to_ilp, downscale_profile, example_8x6_instance, generate_bundling_model,
    random_small_instance, small_example_instance, BundlingIlp, BundlingParams, DOWNSCALE_GRID,
};
use crate::simulator::{
    postselect_and_score, run_gates_sparse, sample_shots, simulate_dqi_dense, simulate_dqi_sparse,
    DickeMode, Init, QuantumState, DENSE_DEFAULT_QUBITS,
};
use crate::xorsat::{brute_force_optimum, random_baseline, XorSatInstance};

/// Seeds of the five downscaled instances per grid size.
pub const GRID_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
pub const FLAGSHIP_SEED: u64 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub elapsed_secs: f64,
    #[serde(skip)]
    pub csv: String,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2} {:<22} {} ({:.1}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed_secs
        )
    }
}

fn outcome(
    id: u8,
    name: &str,
    passed: bool,
    detail: String,
    csv: String,
    start: Instant,
) -> CriterionOutcome {
    CriterionOutcome {
        id,
        name: name.into(),
        passed,
        detail,
        elapsed_secs: start.elapsed().as_secs_f64(),
        csv,
    }
}

fn within(start: Instant, limit: Duration) -> bool {
    start.elapsed() <= limit
}

/// The bundling ILP behind the downscaled instances, its optimum and Classic encoding.
pub struct Flagship {
    pub bundling: BundlingIlp,
    pub beta: i64,
    pub instance: XorSatInstance,
    pub report: EncodingReport,
}

pub fn flagship(seed: u64) -> Result<Flagship> {
    let model = generate_bundling_model(&BundlingParams::default(), seed)?;
    let bundling = bundling_to_ilp(&model)?;
    let ilp = &bundling.ilp;
    let beta = binary_search_beta(ilp, |b| direct_ilp_feasible(ilp, b))?;
    let (instance, report) = encode_ilp_c(ilp, beta, CarryVariant::Classic)?;
    Ok(Flagship {
        bundling,
        beta,
        instance,
        report,
    })
}

#[derive(Clone, Debug)]
pub struct GridInstance {
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub instance: XorSatInstance,
}

/// One downscaled instance per `(size, seed)`, sizes in ascending order.
pub fn downscaled_grid(full: &XorSatInstance, seeds: &[u64]) -> Result<Vec<GridInstance>> {
    let mut out = Vec::new();
    for &(m, n) in DOWNSCALE_GRID.iter() {
        for &seed in seeds {
            out.push(GridInstance {
                m,
                n,
                seed,
                instance: downscale_profile(full, m, n, seed)?,
            });
        }
    }
    Ok(out)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Result of the 8×6 example run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Example8x6Run {
    pub optimum: usize,
    pub shots: usize,
    pub accepted: usize,
    pub dqi_histogram: Vec<usize>,
    pub baseline_histogram: Vec<usize>,
    pub p_dqi: f64,
    pub p_random: f64,
    pub z: f64,
}

/// DQI with `ℓ = 2`, `T = 1` on the 8×6 instance against uniform sampling.
pub fn example_8x6_run(shots: usize, seed: u64) -> Result<Example8x6Run> {
    let inst = example_8x6_instance();
    let (_, opt) = brute_force_optimum(&inst)?;
    let dqi = build_dqi_circuit(&inst, 2, 1)?;
    let state = simulate_dqi_dense::<f64>(&dqi, DickeMode::Gates, DENSE_DEFAULT_QUBITS)?;
    let samples = sample_shots(&state, shots, seed);
    drop(state);
    let report = postselect_and_score(&samples, &inst, &dqi.layout)?;
    let baseline = random_baseline(&inst, shots, seed ^ 0x5eed)?;
    let best = opt.satisfied;
    let p_dqi = report.fraction_with(best);
    let p_random = baseline.histogram[best] as f64 / shots as f64;
    let var = p_dqi * (1.0 - p_dqi) / report.accepted.max(1) as f64
        + p_random * (1.0 - p_random) / shots as f64;
    Ok(Example8x6Run {
        optimum: best,
        shots,
        accepted: report.accepted,
        dqi_histogram: report.histogram,
        baseline_histogram: baseline.histogram,
        p_dqi,
        p_random,
        z: (p_dqi - p_random) / var.sqrt(),
    })
}

pub fn criterion_example_8x6(shots: usize, seed: u64) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let run = example_8x6_run(shots, seed)?;
    let mut csv = String::from("satisfied,dqi_count,random_count\n");
    for s in 0..run.dqi_histogram.len() {
        csv += &format!(
            "{s},{},{}\n",
            run.dqi_histogram[s], run.baseline_histogram[s]
        );
    }
    let passed = run.optimum == 7 && run.z > 5.0 && within(start, Duration::from_secs(300));
    Ok(outcome(
        1,
        "example-8x6",
        passed,
        format!(
            "optimum {} | P(7): dqi {:.4} ({} of {} shots accepted) vs random {:.4}, z = {:.1}",
            run.optimum, run.p_dqi, run.accepted, run.shots, run.p_random, run.z
        ),
        csv,
        start,
    ))
}

/// One instance of the estimator–simulator comparison.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AgreementPoint {
    pub m: usize,
    pub n: usize,
    pub ell: usize,
    pub iterations: usize,
    pub seed: u64,
    pub predicted: f64,
    pub empirical: f64,
    pub std_error: f64,
    pub accepted: usize,
}

impl AgreementPoint {
    pub fn agrees(&self, sigmas: f64) -> bool {
        (self.empirical - self.predicted).abs() <= sigmas * self.std_error + 1e-9
    }
}

pub const AGREEMENT_REGIMES: [(usize, usize, usize, usize); 3] =
    [(8, 6, 2, 1), (6, 4, 1, 1), (5, 3, 1, 3)];

/// Sparse gate-level simulation against the exact-state prediction with the
/// BP1 classification the circuit implements.
pub fn agreement_point(
    inst: &XorSatInstance,
    ell: usize,
    iterations: usize,
    shots: usize,
    seed: u64,
) -> Result<AgreementPoint> {
    let dqi = build_dqi_circuit(inst, ell, iterations)?;
    let state = simulate_dqi_sparse::<f64>(&dqi, DickeMode::Gates)?;
    let samples = sample_shots(&state, shots, seed);
    let report = postselect_and_score(&samples, inst, &dqi.layout)?;
    let cls = classify_decodable(inst, ell, DecoderKind::Bp1, iterations)?;
    let pred = predict_expectation(inst, &dqi.weights, &cls)?;
    Ok(AgreementPoint {
        m: inst.m,
        n: inst.n,
        ell,
        iterations,
        seed,
        predicted: pred.expected_s,
        empirical: report.mean_satisfied,
        std_error: report.std_error,
        accepted: report.accepted,
    })
}

pub fn small_agreement(per_regime: usize, shots: usize, seed: u64) -> Result<Vec<AgreementPoint>> {
    let mut out = Vec::new();
    for (r, &(m, n, ell, t)) in AGREEMENT_REGIMES.iter().enumerate() {
        for k in 0..per_regime {
            let inst_seed = seed.wrapping_add((r * 1000 + k) as u64);
            let inst = random_small_instance(m, n, inst_seed)?;
            out.push(agreement_point(&inst, ell, t, shots, inst_seed)?);
        }
    }
    Ok(out)
}

pub fn criterion_small_agreement(
    per_regime: usize,
    shots: usize,
    seed: u64,
) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let points = small_agreement(per_regime, shots, seed)?;
    let mut csv = String::from("m,n,ell,T,seed,predicted_S,empirical_S,std_error,accepted\n");
    for p in &points {
        csv += &format!(
            "{},{},{},{},{},{},{},{},{}\n",
            p.m,
            p.n,
            p.ell,
            p.iterations,
            p.seed,
            p.predicted,
            p.empirical,
            p.std_error,
            p.accepted
        );
    }
    let mut parts = Vec::new();
    let mut passed = within(start, Duration::from_secs(1800));
    for &(m, n, ell, t) in &AGREEMENT_REGIMES {
        let group: Vec<&AgreementPoint> = points
            .iter()
            .filter(|p| (p.m, p.n, p.ell, p.iterations) == (m, n, ell, t))
            .collect();
        let ok = group.iter().filter(|p| p.agrees(3.0)).count();
        passed &= ok as f64 >= 0.95 * group.len() as f64;
        parts.push(format!("({m},{n},{ell},{t}) {ok}/{}", group.len()));
    }
    Ok(outcome(
        2,
        "estimator-agreement",
        passed,
        format!("within 3 SE: {}", parts.join(", ")),
        csv,
        start,
    ))
}

fn findings_outcome(
    id: u8,
    name: &str,
    what: &str,
    findings: Findings,
    start: Instant,
) -> CriterionOutcome {
    let csv = std::iter::once("finding".to_string())
        .chain(findings.iter().cloned())
        .join("\n")
        + "\n";
    let detail = if findings.is_empty() {
        format!("{what}: all checks hold")
    } else {
        format!(
            "{what}: {} failures, first: {}",
            findings.len(),
            findings[0]
        )
    };
    outcome(id, name, findings.is_empty(), detail, csv, start)
}

pub fn criterion_gadgets() -> Result<CriterionOutcome> {
    let start = Instant::now();
    let findings = verify_gadget_semantics()?;
    Ok(findings_outcome(
        3,
        "gadget-semantics",
        "AND, CARRY, CARRY1, comparator, equality",
        findings,
        start,
    ))
}

pub fn criterion_counts(seed: u64) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let findings = verify_count_formulas(seed, 20)?;
    Ok(findings_outcome(
        4,
        "count-formulas",
        "IA, comparator, HWA for ell 1..8; 20 ILP recounts",
        findings,
        start,
    ))
}

/// Classical image of a basis state under `gates`; `None` if it does not stay a
/// single basis state with unit amplitude.
fn basis_image(
    n_qubits: usize,
    gates: &[crate::circuits::Gate],
    index: u64,
) -> Result<Option<u64>> {
    let s = run_gates_sparse::<f64>(
        n_qubits,
        gates,
        &Init::Amplitudes(vec![(index, Complex64::new(1.0, 0.0))]),
    )?;
    let support: Vec<(u64, Complex64)> = s
        .entries()
        .into_iter()
        .filter(|(_, a)| a.norm() > 1e-9)
        .collect();
    Ok(match support.as_slice() {
        [(i, a)] if (a - Complex64::new(1.0, 0.0)).norm() < 1e-9 => Some(*i),
        _ => None,
    })
}

/// Runs every weight-`≤ ℓ` basis word through the coherent decoder block and
/// compares with classical BP1.
pub fn coherent_bp1_findings(
    inst: &XorSatInstance,
    ell: usize,
    iterations: usize,
) -> Result<Findings> {
    let dqi = build_dqi_circuit(inst, ell, iterations)?;
    let layout = &dqi.layout;
    let decoder = dqi
        .circuit
        .block("decoder")
        .ok_or_else(|| Error::Internal("decoder block missing".into()))?;
    // forward part: everything before the final CNOT f→y layers and the uncompute
    let forward = &decoder[..(decoder.len() - inst.m * iterations) / 2];
    let bt = inst.bt();
    let n = dqi.circuit.n_qubits;
    let mut out = Findings::new();
    for k in 0..=ell.min(inst.m) {
        for ones in (0..inst.m).combinations(k) {
            let y = BitVec::from_support(inst.m, &ones);
            let syn = matvec_mod2(&bt, &y)?;
            let index = ones.iter().fold(0u64, |a, &j| a | 1 << layout.y.qubit(j))
                | syn.ones().fold(0u64, |a, i| a | 1 << layout.s[0].qubit(i));
            let Some(image) = basis_image(n, decoder, index)? else {
                out.push(format!("y {ones:?}: decoder output is not a basis state"));
                continue;
            };
            let classical = bp1_decode(&bt, &y, iterations)?;
            if layout.y.read_bits(image) != classical.bits {
                out.push(format!(
                    "y {ones:?}: message register differs from bp1_decode"
                ));
            }
            if layout.s[0].read_bits(image) != syn {
                out.push(format!("y {ones:?}: syndrome register changed"));
            }
            for anc in layout.ancillas() {
                if anc.read(image) != 0 {
                    out.push(format!("y {ones:?}: register {} not restored", anc.name));
                }
            }
            let Some(mid) = basis_image(n, forward, index)? else {
                out.push(format!("y {ones:?}: forward pass is not a basis state"));
                continue;
            };
            let trace = bp1_flip_trace(&bt, &y, iterations)?;
            for (i, f) in layout.f.iter().enumerate() {
                if f.read_bits(mid) != trace[i] {
                    out.push(format!(
                        "y {ones:?}: flip register {} differs from the classical trace",
                        f.name
                    ));
                }
            }
        }
    }
    Ok(out)
}

/// Instances with `m ≤ 8`, `n ≤ 6` used by the circuit-level checks.
pub fn small_test_instances() -> Result<Vec<XorSatInstance>> {
    let mut out = vec![small_example_instance(), example_8x6_instance()];
    for (m, n) in [(5, 3), (6, 4), (7, 5), (8, 6)] {
        for seed in 0..3 {
            out.push(random_small_instance(m, n, seed)?);
        }
    }
    Ok(out)
}

pub fn criterion_coherent_bp1() -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut findings = Findings::new();
    let mut cases = 0;
    let mut csv = String::from("m,n,ell,T,words,failures\n");
    for inst in small_test_instances()? {
        let ell = 3.min(inst.m - 1);
        for t in 1..=3 {
            let f = coherent_bp1_findings(&inst, ell, t)?;
            let words: usize = (0..=ell)
                .map(|k| crate::instances::binomial(inst.m, k))
                .sum();
            csv += &format!("{},{},{ell},{t},{words},{}\n", inst.m, inst.n, f.len());
            cases += words;
            findings.extend(f.into_iter().map(|s| format!("m={} T={t} {s}", inst.m)));
        }
    }
    Ok(findings_outcome(
        5,
        "coherent-bp1",
        &format!("{cases} basis words"),
        findings,
        start,
    ))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResourceRow {
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub ell: usize,
    pub iterations: usize,
    pub qubits: usize,
    pub formula_qubits: usize,
    pub register_total: usize,
    pub gates: u64,
}

pub fn resource_row(
    inst: &XorSatInstance,
    seed: u64,
    ell: usize,
    iterations: usize,
) -> Result<ResourceRow> {
    let dqi = build_dqi_circuit(inst, ell, iterations)?;
    Ok(resource_row_of(&dqi, inst, seed))
}

fn resource_row_of(dqi: &DqiCircuit, inst: &XorSatInstance, seed: u64) -> ResourceRow {
    let est = gate_counts_blockwise(&dqi.circuit);
    ResourceRow {
        m: inst.m,
        n: inst.n,
        seed,
        ell: dqi.weights.ell,
        iterations: dqi.layout.iterations,
        qubits: dqi.circuit.n_qubits,
        formula_qubits: qubit_count(inst.m, inst.n, inst.max_row_weight(), dqi.layout.iterations),
        register_total: dqi.circuit.registers.iter().map(|r| r.width).sum(),
        gates: est.total_gates(),
    }
}

/// `ℓ = 3`, `T = 5` resources of every grid instance.
pub fn grid_resources(grid: &[GridInstance]) -> Result<Vec<ResourceRow>> {
    grid.iter()
        .map(|g| resource_row(&g.instance, g.seed, 3, 5))
        .collect()
}

fn resource_csv(rows: &[ResourceRow]) -> String {
    let mut csv = String::from("m,n,seed,ell,T,qubits,formula_qubits,register_total,gates\n");
    for r in rows {
        csv += &format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.m,
            r.n,
            r.seed,
            r.ell,
            r.iterations,
            r.qubits,
            r.formula_qubits,
            r.register_total,
            r.gates
        );
    }
    csv
}

pub fn criterion_qubit_formula(grid_rows: &[ResourceRow]) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut rows = grid_rows.to_vec();
    for (k, inst) in small_test_instances()?.iter().enumerate() {
        for ell in 1..inst.m.min(4) {
            for t in 1..=3 {
                rows.push(resource_row(inst, k as u64, ell, t)?);
            }
        }
    }
    let ex = resource_row(&example_8x6_instance(), 0, 2, 1)?;
    let bad = rows
        .iter()
        .filter(|r| r.qubits != r.formula_qubits || r.qubits != r.register_total)
        .count();
    let passed = bad == 0 && ex.qubits == 26 && ex.formula_qubits == 26;
    rows.push(ex.clone());
    Ok(outcome(
        6,
        "qubit-formula",
        passed,
        format!(
            "{} circuits, {bad} mismatches; 8x6 example at T=1: {} qubits",
            rows.len(),
            ex.qubits
        ),
        resource_csv(&rows),
        start,
    ))
}

pub fn criterion_scaling(rows: &[ResourceRow], build_time: Duration) -> Result<CriterionOutcome> {
    let start = Instant::now();
    if rows.len() < 2 {
        return Err(Error::InvalidInput("need at least two grid rows".into()));
    }
    let size = |r: &ResourceRow| (r.m * r.n) as f64;
    let q = loglog_slope(
        &rows
            .iter()
            .map(|r| (size(r), r.qubits as f64))
            .collect::<Vec<_>>(),
    );
    let g = loglog_slope(
        &rows
            .iter()
            .map(|r| (size(r), r.gates as f64))
            .collect::<Vec<_>>(),
    );
    let passed = (q - 0.5).abs() <= 0.1
        && g < 1.0
        && build_time + start.elapsed() <= Duration::from_secs(1200);
    let mut out = outcome(
        7,
        "resource-scaling",
        passed,
        format!(
            "{} instances: qubit exponent {q:.3}, gate exponent {g:.3}",
            rows.len()
        ),
        resource_csv(rows),
        start,
    );
    out.elapsed_secs += build_time.as_secs_f64();
    Ok(out)
}

/// Random `n×n` matrices of full rank with distinct nonempty rows.
pub fn random_full_rank_square(n: usize, count: usize, seed: u64) -> Vec<BitMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let rows: Vec<Vec<usize>> = (0..n)
            .map(|_| (0..n).filter(|_| rng.random_bool(0.4)).collect())
            .collect();
        if let Ok(b) = BitMatrix::new(n, rows) {
            if b.rank() == n {
                out.push(b);
            }
        }
    }
    out
}

fn diff_sigma(a: &SuccessCell, b: &SuccessCell) -> f64 {
    (a.std_error().powi(2) + b.std_error().powi(2)).sqrt()
}

/// Ordering checks on the first instance of every grid size over `ℓ ∈ 1..=ell_max`.
pub fn criterion_decoder_ordering(
    grid: &[GridInstance],
    ell_max: usize,
    trials: usize,
    seed: u64,
) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let ells: Vec<usize> = (1..=ell_max).collect();
    let mut csv = String::from("m,n,ell,size,decoder,trials,successes,rate\n");
    let mut violations = Vec::new();
    let mut cells = 0;
    for g in grid.iter().unique_by(|g| (g.m, g.n)) {
        let bt = g.instance.bt();
        let run = |d| benchmark_success_rate(&bt, &ells, trials, d, 5, seed);
        let (bp2, bp1, gj) = (
            run(DecoderKind::Bp2)?,
            run(DecoderKind::Bp1)?,
            run(DecoderKind::Gj)?,
        );
        for grid in [&bp2, &bp1, &gj] {
            for c in &grid.cells {
                csv += &format!(
                    "{},{},{},{},{},{},{},{}\n",
                    g.m, g.n, c.ell, c.size, c.decoder, c.trials, c.successes, c.rate
                );
            }
        }
        for k in 0..ells.len() {
            let (c2, c1, cg) = (&bp2.cells[k], &bp1.cells[k], &gj.cells[k]);
            cells += 1;
            if c2.rate < c1.rate - 3.0 * diff_sigma(c2, c1) {
                violations.push(format!(
                    "{}x{} ell {}: bp2 {:.4} < bp1 {:.4}",
                    g.m, g.n, c1.ell, c2.rate, c1.rate
                ));
            }
            if c1.rate < cg.rate - 3.0 * diff_sigma(c1, cg) {
                violations.push(format!(
                    "{}x{} ell {}: bp1 {:.4} < gj {:.4}",
                    g.m, g.n, c1.ell, c1.rate, cg.rate
                ));
            }
            if k > 0 {
                let prev = &bp1.cells[k - 1];
                if c1.rate > prev.rate + 3.0 * diff_sigma(c1, prev) {
                    violations.push(format!(
                        "{}x{}: bp1 rises from ell {} to {}",
                        g.m, g.n, prev.ell, c1.ell
                    ));
                }
            }
        }
    }
    let mut square_failures = 0;
    for (k, h) in random_full_rank_square(10, 10, seed)
        .into_iter()
        .enumerate()
    {
        let ells: Vec<usize> = (1..=10).collect();
        let grid =
            benchmark_success_rate(&h, &ells, trials / 10, DecoderKind::Gj, 1, seed + k as u64)?;
        square_failures += grid
            .cells
            .iter()
            .map(|c| c.trials - c.successes)
            .sum::<usize>();
    }
    if square_failures > 0 {
        violations.push(format!(
            "gj failed {square_failures} times on square full-rank matrices"
        ));
    }
    let detail = if violations.is_empty() {
        format!("{cells} cells (ell 1..={ell_max}, {trials} trials): all orderings hold; gj exact on square full rank")
    } else {
        format!(
            "{cells} cells (ell 1..={ell_max}, {trials} trials): {} violations: {}",
            violations.len(),
            violations.join("; ")
        )
    };
    Ok(outcome(
        8,
        "decoder-ordering",
        violations.is_empty(),
        detail,
        csv,
        start,
    ))
}

/// `max 2x₀ + 2x₁` at `β = 3`: the WIA pins its bit-0 carry, which then feeds
/// the bit-1 CARRY.
pub fn distance_ilp() -> (Ilp01, i64) {
    (
        Ilp01::new(vec![2, 2], vec![], vec![], vec![], vec![]).expect("valid ilp"),
        3,
    )
}

pub fn criterion_distance() -> Result<CriterionOutcome> {
    let start = Instant::now();
    let (ilp, beta) = distance_ilp();
    let (classic, _) = encode_ilp_c(&ilp, beta, CarryVariant::Classic)?;
    let (majority, _) = encode_ilp_c(&ilp, beta, CarryVariant::Majority)?;
    let dc = min_dependent_rows(&classic.b_matrix(), 3)?;
    let dm = min_dependent_rows(&majority.b_matrix(), 3)?;
    let passed = dc.as_ref().map(|d| d.size) == Some(3) && dm.is_none();
    let show = |d: &Option<crate::gf2::Dependency>| match d {
        Some(d) => format!("{} (rows {:?})", d.size, d.rows),
        None => "none up to 3".into(),
    };
    let csv = format!(
        "variant,rows,cols,min_dependent_rows\nclassic,{},{},{}\nmajority,{},{},{}\n",
        classic.m,
        classic.n,
        dc.as_ref().map_or("none".into(), |d| d.size.to_string()),
        majority.m,
        majority.n,
        dm.as_ref().map_or("none".into(), |d| d.size.to_string())
    );
    Ok(outcome(
        9,
        "code-distance",
        passed,
        format!("classic: {}, majority: {}", show(&dc), show(&dm)),
        csv,
        start,
    ))
}

/// Predicted `⟨S⟩/m` for `ℓ = 1..=ell_max` from one BP2 classification.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DownscaledPrediction {
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub eps: Vec<f64>,
    pub ratio: Vec<f64>,
}

pub fn downscaled_prediction(
    g: &GridInstance,
    ell_max: usize,
    iterations: usize,
) -> Result<DownscaledPrediction> {
    let cls = classify_decodable(&g.instance, ell_max, DecoderKind::Bp2, iterations)?;
    let mut ratio = Vec::with_capacity(ell_max);
    for ell in 1..=ell_max {
        let w = compute_dicke_weights(g.m, ell)?;
        let p = predict_expectation(&g.instance, &w, &cls.truncated(ell))?;
        ratio.push(p.expected_s / g.m as f64);
    }
    Ok(DownscaledPrediction {
        m: g.m,
        n: g.n,
        seed: g.seed,
        eps: cls.eps,
        ratio,
    })
}

pub fn criterion_downscaled_dqi(grid: &[GridInstance]) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut csv = String::from("m,n,seed,ell,eps_ell,predicted_S_over_m\n");
    let mut below = Vec::new();
    let mut falls = Vec::new();
    let mut lowest = f64::INFINITY;
    for g in grid {
        let p = downscaled_prediction(g, 3, 5)?;
        for (k, r) in p.ratio.iter().enumerate() {
            csv += &format!(
                "{},{},{},{},{},{}\n",
                p.m,
                p.n,
                p.seed,
                k + 1,
                p.eps[k + 1],
                r
            );
        }
        let top = p.ratio[2];
        lowest = lowest.min(top);
        if top <= 0.5 {
            below.push(format!("{}x{} seed {}", p.m, p.n, p.seed));
        }
        if p.ratio.windows(2).any(|w| w[1] < w[0] - 1e-12) {
            falls.push(format!("{}x{} seed {} {:?}", p.m, p.n, p.seed, p.ratio));
        }
    }
    let passed = below.is_empty() && falls.is_empty() && within(start, Duration::from_secs(3600));
    let mut detail = format!(
        "{} instances: min <S>/m at ell=3 is {lowest:.4}; {} at or below 0.5, {} not monotone in ell",
        grid.len(),
        below.len(),
        falls.len()
    );
    if let Some(f) = below.first().or(falls.first()) {
        detail += &format!(" (first: {f})");
    }
    Ok(outcome(10, "downscaled-dqi", passed, detail, csv, start))
}

/// Names accepted by [`run_criterion`], in criterion order.
pub const CRITERIA: [&str; 10] = [
    "example-8x6",
    "small-agreement",
    "gadget-semantics",
    "count-formulas",
    "coherent-bp1",
    "qubit-formula",
    "resource-scaling",
    "decoder-ordering",
    "code-distance",
    "downscaled-dqi",
];

/// Settings shared by the criterion runners.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AcceptanceConfig {
    pub seed: u64,
    pub example_8x6_shots: usize,
    pub agreement_instances: usize,
    pub agreement_shots: usize,
    pub decoder_trials: usize,
    pub decoder_ell_max: usize,
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        AcceptanceConfig {
            seed: 2024,
            example_8x6_shots: 10_000,
            agreement_instances: 50,
            agreement_shots: 10_000,
            decoder_trials: 10_000,
            decoder_ell_max: 3,
        }
    }
}

/// Lazily built inputs shared between criteria.
#[derive(Default)]
pub struct AcceptanceContext {
    grid: Option<Vec<GridInstance>>,
    resources: Option<(Vec<ResourceRow>, Duration)>,
}

impl AcceptanceContext {
    pub fn grid(&mut self) -> Result<&[GridInstance]> {
        if self.grid.is_none() {
            let full = flagship(FLAGSHIP_SEED)?.instance;
            self.grid = Some(downscaled_grid(&full, &GRID_SEEDS)?);
        }
        Ok(self.grid.as_deref().unwrap())
    }

    pub fn resources(&mut self) -> Result<(&[ResourceRow], Duration)> {
        if self.resources.is_none() {
            let start = Instant::now();
            let rows = grid_resources(self.grid()?)?;
            self.resources = Some((rows, start.elapsed()));
        }
        let (rows, t) = self.resources.as_ref().unwrap();
        Ok((rows, *t))
    }
}

/// Runs one criterion by name or by its number `1..=10`.
pub fn run_criterion(
    name: &str,
    cfg: &AcceptanceConfig,
    ctx: &mut AcceptanceContext,
) -> Result<CriterionOutcome> {
    let id = match name.parse::<usize>() {
        Ok(k) if (1..=CRITERIA.len()).contains(&k) => k,
        _ => CRITERIA
            .iter()
            .position(|c| *c == name)
            .map(|k| k + 1)
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "unknown criterion {name:?}; expected one of {}",
                    CRITERIA.join(", ")
                ))
            })?,
    };
    match id {
        1 => criterion_example_8x6(cfg.example_8x6_shots, cfg.seed),
        2 => criterion_small_agreement(cfg.agreement_instances, cfg.agreement_shots, cfg.seed),
        3 => criterion_gadgets(),
        4 => criterion_counts(cfg.seed),
        5 => criterion_coherent_bp1(),
        6 => {
            let (rows, _) = ctx.resources()?;
            let rows = rows.to_vec();
            criterion_qubit_formula(&rows)
        }
        7 => {
            let (rows, t) = ctx.resources()?;
            let rows = rows.to_vec();
            criterion_scaling(&rows, t)
        }
        8 => {
            let grid = ctx.grid()?.to_vec();
            criterion_decoder_ordering(&grid, cfg.decoder_ell_max, cfg.decoder_trials, cfg.seed)
        }
        9 => criterion_distance(),
        _ => {
            let grid = ctx.grid()?.to_vec();
            criterion_downscaled_dqi(&grid)
        }
    }
}

/// All ten criteria in order; `each` sees every outcome as soon as it is known.
pub fn run_acceptance(
    cfg: &AcceptanceConfig,
    mut each: impl FnMut(&CriterionOutcome),
) -> Result<Vec<CriterionOutcome>> {
    let mut ctx = AcceptanceContext::default();
    let mut out = Vec::new();
    for name in CRITERIA {
        let o = run_criterion(name, cfg, &mut ctx)?;
        each(&o);
        out.push(o);
    }
    Ok(out)
}
