use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use dqiw::analytics::{classify_decodable, predict_expectation};
use dqiw::circuits::{build_dqi_circuit, gate_counts_blockwise};
use dqiw::decoders::{benchmark_success_rate, DecoderKind};
use dqiw::encoder::{
    binary_search_beta, direct_ilp_feasible, encode_ilp_c, xorsat_feasible, CarryVariant, Ilp01,
};
use dqiw::experiments::{run_criterion, AcceptanceConfig, AcceptanceContext, CRITERIA};
use dqiw::instances::{
    bundling_to_ilp, downscale_profile, generate_bundling_model, BundlingModel, BundlingParams,
    DOWNSCALE_GRID,
};
use dqiw::simulator::{
    postselect_and_score, sample_shots, simulate_dqi_dense, simulate_dqi_sparse, DickeMode,
    DENSE_DEFAULT_QUBITS,
};
use dqiw::xorsat::{optimum, XorSatInstance};

#[derive(Parser, Debug)]
#[command(
    name = "dqiw",
    version,
    about = "Decoded Quantum Interferometry workbench"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(clap::Args, Debug, Clone, Serialize)]
struct Opts {
    /// Input file (ILP, instance or bundling model JSON, depending on the command)
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Output directory for artifacts
    #[arg(long, global = true, default_value = "dqiw-out")]
    output: PathBuf,
    /// Maximum number of errors (ℓ)
    #[arg(long, global = true, default_value_t = 2)]
    ell: usize,
    /// Decoder iterations (T)
    #[arg(long, global = true, default_value_t = 1)]
    iters: usize,
    #[arg(long, global = true, value_enum, default_value_t = DecoderArg::Bp1)]
    decoder: DecoderArg,
    /// Measurement shots, or decoding trials for bench-decoder
    #[arg(long, global = true, default_value_t = 10_000)]
    shots: usize,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = CarryArg::Classic)]
    carry: CarryArg,
    /// Sizes as `MxN[,MxN...]`, or `default` for the downscaled grid
    #[arg(long, global = true)]
    grid: Option<String>,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Encode an ILP as a max-XORSAT instance (ILP-c at the optimum β unless --beta is given)
    Encode {
        #[arg(long)]
        beta: Option<i64>,
    },
    /// Exact optimum of an instance, or β* of an ILP through its encodings
    SolveExact,
    /// Decoder success rates for ℓ = 1..=--ell (SuccessRateGrid CSV)
    BenchDecoder,
    /// Simulate the DQI circuit and score postselected shots
    Simulate {
        #[arg(long, value_enum, default_value_t = Backend::Auto)]
        backend: Backend,
    },
    /// Predicted ⟨S⟩ of the postselected DQI state
    Estimate,
    /// Qubit count and per-block gate counts after lowering
    Resources,
    /// Downscaled instances with the degree statistics of --input
    SampleB,
    /// Random bundling model and its ILP, or the ILP of the model in --input
    BundlingGen,
    /// Run an acceptance criterion by name or number, or `all`
    Reproduce { target: String },
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
enum DecoderArg {
    Bp1,
    Bp2,
    Gj,
}

impl From<DecoderArg> for DecoderKind {
    fn from(d: DecoderArg) -> Self {
        match d {
            DecoderArg::Bp1 => DecoderKind::Bp1,
            DecoderArg::Bp2 => DecoderKind::Bp2,
            DecoderArg::Gj => DecoderKind::Gj,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
enum CarryArg {
    Classic,
    Majority,
}

impl From<CarryArg> for CarryVariant {
    fn from(c: CarryArg) -> Self {
        match c {
            CarryArg::Classic => CarryVariant::Classic,
            CarryArg::Majority => CarryVariant::Majority,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
enum Backend {
    Auto,
    Dense,
    Sparse,
}

/// Full run configuration; its canonical JSON is hashed into every artifact.
#[derive(Serialize)]
struct RunConfig<'a> {
    command: &'a Command,
    #[serde(flatten)]
    opts: &'a Opts,
}

struct Run<'a> {
    config: RunConfig<'a>,
    hash: String,
    artifacts: Vec<String>,
}

impl<'a> Run<'a> {
    fn new(command: &'a Command, opts: &'a Opts) -> Result<Self> {
        let config = RunConfig { command, opts };
        let canonical = serde_json::to_string(&config)?;
        let hash = hex::encode(Sha256::digest(canonical.as_bytes()));
        fs::create_dir_all(&opts.output)
            .with_context(|| format!("creating {}", opts.output.display()))?;
        Ok(Run {
            config,
            hash,
            artifacts: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.config.opts.output.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    /// CSV with the seed and config hash as leading comment lines.
    fn write_csv(&mut self, name: &str, body: &str) -> Result<()> {
        let text = format!(
            "# seed={}\n# config_hash={}\n{body}",
            self.config.opts.seed, self.hash
        );
        self.write(name, &text)
    }

    /// JSON object with `seed` and `config_hash` added at the top level.
    fn write_json(&mut self, name: &str, value: impl Serialize) -> Result<()> {
        let mut v = serde_json::to_value(value)?;
        if let Value::Object(map) = &mut v {
            map.insert("seed".into(), json!(self.config.opts.seed));
            map.insert("config_hash".into(), json!(self.hash));
        }
        self.write(name, &(serde_json::to_string_pretty(&v)? + "\n"))
    }

    fn finish(mut self) -> Result<()> {
        let manifest = json!({
            "tool": "dqiw",
            "version": env!("CARGO_PKG_VERSION"),
            "config": &self.config,
            "seed": self.config.opts.seed,
            "config_hash": &self.hash,
            "artifacts": &self.artifacts,
        });
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        self.artifacts.clear();
        self.write("manifest.json", &text)
    }
}

fn input(opts: &Opts) -> Result<&Path> {
    opts.input
        .as_deref()
        .context("missing required flag --input")
}

fn load_instance(opts: &Opts) -> Result<XorSatInstance> {
    let path = input(opts)?;
    XorSatInstance::load(path).with_context(|| format!("reading instance {}", path.display()))
}

fn parse_grid(spec: Option<&str>) -> Result<Vec<(usize, usize)>> {
    match spec {
        None | Some("default") => Ok(DOWNSCALE_GRID.to_vec()),
        Some(s) => s
            .split(',')
            .map(|part| {
                let (m, n) = part
                    .trim()
                    .split_once('x')
                    .with_context(|| format!("field grid: {part:?} is not of the form MxN"))?;
                Ok((
                    m.parse()
                        .with_context(|| format!("field grid: bad row count {m:?}"))?,
                    n.parse()
                        .with_context(|| format!("field grid: bad column count {n:?}"))?,
                ))
            })
            .collect(),
    }
}

fn encode(run: &mut Run, beta: Option<i64>) -> Result<()> {
    let opts = run.config.opts;
    let path = input(opts)?;
    let ilp = Ilp01::load(path).with_context(|| format!("reading ILP {}", path.display()))?;
    let beta = match beta {
        Some(b) => b,
        None => binary_search_beta(&ilp, |b| direct_ilp_feasible(&ilp, b))?,
    };
    let (inst, report) = encode_ilp_c(&ilp, beta, opts.carry.into())?;
    run.write("instance.json", &(inst.to_json() + "\n"))?;
    run.write_json("report.json", &report)?;
    println!(
        "beta={beta} rows={} vars={} eta={}",
        report.xi, report.total_vars, report.eta
    );
    Ok(())
}

fn solve_exact(run: &mut Run) -> Result<()> {
    let opts = run.config.opts;
    let path = input(opts)?;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if value.get("b_rows").is_some() {
        let inst = XorSatInstance::from_json(&text)?;
        let (x, score) = optimum(&inst)?;
        println!("satisfied={} of m={}", score.satisfied, inst.m);
        run.write_json(
            "solution.json",
            json!({ "satisfied": score.satisfied, "m": inst.m, "x": x.to_bits() }),
        )?;
    } else {
        let ilp = Ilp01::from_json(&text)?;
        let variant = opts.carry.into();
        let beta = binary_search_beta(&ilp, |b| xorsat_feasible(&ilp, b, variant))?;
        println!("beta*={beta}");
        run.write_json("solution.json", json!({ "beta": beta, "carry": variant }))?;
    }
    Ok(())
}

fn bench_decoder(run: &mut Run) -> Result<()> {
    let opts = run.config.opts;
    let inst = load_instance(opts)?;
    let ells: Vec<usize> = (1..=opts.ell).collect();
    let grid = benchmark_success_rate(
        &inst.bt(),
        &ells,
        opts.shots,
        opts.decoder.into(),
        opts.iters,
        opts.seed,
    )?;
    let mut csv = String::from("ell,size,decoder,trials,successes,rate\n");
    for c in &grid.cells {
        csv += &format!(
            "{},{},{},{},{},{}\n",
            c.ell, c.size, c.decoder, c.trials, c.successes, c.rate
        );
        println!("ell={} rate={:.4}", c.ell, c.rate);
    }
    run.write_csv("success_rates.csv", &csv)
}

fn simulate(run: &mut Run, backend: Backend) -> Result<()> {
    let opts = run.config.opts;
    let inst = load_instance(opts)?;
    let dqi = build_dqi_circuit(&inst, opts.ell, opts.iters)?;
    let dense = match backend {
        Backend::Dense => true,
        Backend::Sparse => false,
        Backend::Auto => dqi.circuit.n_qubits <= DENSE_DEFAULT_QUBITS,
    };
    let samples = if dense {
        let state =
            simulate_dqi_dense::<f64>(&dqi, DickeMode::Gates, dqiw::simulator::DENSE_MAX_QUBITS)?;
        sample_shots(&state, opts.shots, opts.seed)
    } else {
        let state = simulate_dqi_sparse::<f64>(&dqi, DickeMode::Gates)?;
        sample_shots(&state, opts.shots, opts.seed)
    };
    let report = postselect_and_score(&samples, &inst, &dqi.layout)?;
    println!(
        "qubits={} accepted={}/{} mean_satisfied={:.4}",
        dqi.circuit.n_qubits, report.accepted, report.shots, report.mean_satisfied
    );
    run.write_csv("histogram.csv", &report.to_csv())?;
    run.write_json(
        "acceptance.json",
        json!({
            "qubits": dqi.circuit.n_qubits,
            "backend": if dense { "dense" } else { "sparse" },
            "shots": report.shots,
            "accepted": report.accepted,
            "acceptance_rate": report.acceptance_rate,
            "mean_satisfied": report.mean_satisfied,
            "std_error": report.std_error,
        }),
    )
}

fn estimate(run: &mut Run) -> Result<()> {
    let opts = run.config.opts;
    let inst = load_instance(opts)?;
    let weights = dqiw::analytics::compute_dicke_weights(inst.m, opts.ell)?;
    let cls = classify_decodable(&inst, opts.ell, opts.decoder.into(), opts.iters)?;
    let pred = predict_expectation(&inst, &weights, &cls)?;
    println!("expected_S={:.6} R={:.6}", pred.expected_s, pred.r);
    run.write_json("prediction.json", &pred)
}

fn resources(run: &mut Run) -> Result<()> {
    let opts = run.config.opts;
    let inst = load_instance(opts)?;
    let dqi = build_dqi_circuit(&inst, opts.ell, opts.iters)?;
    let est = gate_counts_blockwise(&dqi.circuit);
    println!("qubits={}", est.qubits);
    println!("gates={}", est.total_gates());
    run.write_csv("gates.csv", &est.to_csv())?;
    run.write_json(
        "resources.json",
        json!({ "qubits": est.qubits, "total_gates": est.total_gates() }),
    )
}

fn sample_b(run: &mut Run) -> Result<()> {
    let opts = run.config.opts;
    let full = load_instance(opts)?;
    for (m, n) in parse_grid(opts.grid.as_deref())? {
        let inst = downscale_profile(&full, m, n, opts.seed)?;
        run.write(&format!("instance_{m}x{n}.json"), &(inst.to_json() + "\n"))?;
        println!("{m}x{n}: t={}", inst.max_row_weight());
    }
    Ok(())
}

fn bundling_gen(run: &mut Run) -> Result<()> {
    let opts = run.config.opts;
    let model = match &opts.input {
        Some(path) => BundlingModel::load(path)
            .with_context(|| format!("reading model {}", path.display()))?,
        None => generate_bundling_model(&BundlingParams::default(), opts.seed)?,
    };
    let b = bundling_to_ilp(&model)?;
    run.write("model.json", &(model.to_json() + "\n"))?;
    run.write("ilp.json", &(b.ilp.to_json() + "\n"))?;
    run.write_json(
        "bundling.json",
        json!({
            "variables": b.ilp.n(),
            "constraints": b.ilp.m(),
            "equalities": b.ilp.p(),
            "nominal_package": b.nominal_package,
            "nominal_take_rate": b.nominal_take_rate,
            "note": b.note,
        }),
    )?;
    println!(
        "variables={} constraints={}",
        b.ilp.n(),
        b.ilp.m() + b.ilp.p()
    );
    Ok(())
}

fn reproduce(run: &mut Run, target: &str) -> Result<bool> {
    let opts = run.config.opts;
    let cfg = AcceptanceConfig {
        seed: opts.seed,
        ..AcceptanceConfig::default()
    };
    let names: Vec<String> = match target {
        "all" => CRITERIA.iter().map(|s| s.to_string()).collect(),
        // alias for the scatter of predicted against simulated ⟨S⟩
        "small-agreement" => vec!["2".into()],
        other => vec![other.to_string()],
    };
    let mut ctx = AcceptanceContext::default();
    let mut summary = String::from("id,name,passed,detail\n");
    let mut all = true;
    for name in names {
        let o = run_criterion(&name, &cfg, &mut ctx)?;
        println!("{o}");
        all &= o.passed;
        summary += &format!(
            "{},{},{},\"{}\"\n",
            o.id,
            o.name,
            o.passed,
            o.detail.replace('"', "'")
        );
        run.write_csv(&format!("criterion_{:02}_{}.csv", o.id, o.name), &o.csv)?;
    }
    run.write_csv("summary.csv", &summary)?;
    Ok(all)
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("DQIW_THREADS") {
        let n: usize = v
            .parse()
            .with_context(|| format!("DQIW_THREADS must be a positive integer, got {v:?}"))?;
        if n == 0 {
            bail!("DQIW_THREADS must be a positive integer, got 0");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<bool> {
    configure_threads()?;
    let mut run = Run::new(&cli.command, &cli.opts)?;
    let mut ok = true;
    match &cli.command {
        Command::Encode { beta } => encode(&mut run, *beta)?,
        Command::SolveExact => solve_exact(&mut run)?,
        Command::BenchDecoder => bench_decoder(&mut run)?,
        Command::Simulate { backend } => simulate(&mut run, *backend)?,
        Command::Estimate => estimate(&mut run)?,
        Command::Resources => resources(&mut run)?,
        Command::SampleB => sample_b(&mut run)?,
        Command::BundlingGen => bundling_gen(&mut run)?,
        Command::Reproduce { target } => ok = reproduce(&mut run, target)?,
    }
    run.finish()?;
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
