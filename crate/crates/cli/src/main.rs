use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use minforge::config::{self, ExperimentConfig, Pipeline};
use minforge::experiment::{self, read_file, write_file, RunError};
use minforge::summary::{self, CsvRow};
use minforge::sweep::{self, SweepPlan};
use minforge::ExitStatus;
use minforge_core::activations::ActivationSpec;
use minforge_core::bundle::{self, CertificateDoc, WitnessDoc};
use minforge_core::certify::{self, BaselineConfig, CertifyConfig};
use minforge_core::data::{self, Distribution, Requirement};
use minforge_core::network::{Architecture, NetworkParams};
use minforge_core::{forge_piecewise, forge_smooth, Error};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

/// Forge training problems whose weights sit at sub-optimal local minima of
/// the squared loss, and check such claims numerically.
///
/// Exit codes: 0 certified local minimum with sub-optimality evidence,
/// 2 refuted, 3 inconclusive, 4 invalid config or unmet assumption,
/// 1 internal error.
#[derive(Parser)]
#[command(name = "minforge", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Draw an input matrix X and write it as {"X": [...]}
    GenData(GenDataArgs),
    /// Build a sub-optimal local minimum, certify it, write the artifacts
    Forge {
        #[command(subcommand)]
        which: ForgeCmd,
    },
    /// Certify a stored network on a stored dataset
    Certify(CertifyArgs),
    /// Construct a lower-loss point next to a smooth-activation network
    Witness(WitnessArgs),
    /// Train the architecture from random starts with momentum gradient descent
    TrainBaseline(BaselineArgs),
    /// Run a grid of forge experiments in parallel
    Sweep(SweepArgs),
    /// Summarise summary CSVs and emit tidy plot data
    Report(ReportArgs),
}

#[derive(Subcommand)]
enum ForgeCmd {
    /// Deep network, smooth activation
    Smooth(ExperimentArgs),
    /// One hidden sigmoid layer, scalar data; --trials runs the perturbation experiment
    Sigmoid(ExperimentArgs),
    /// Activation with an affine piece (ReLU family)
    Piecewise(ExperimentArgs),
}

macro_rules! experiment_flags {
    ($($field:ident => $key:literal: $help:literal),* $(,)?) => {
        /// Every flag doubles as a config-file key of the same name.
        #[derive(Args, Clone, Debug, Default)]
        struct ExperimentArgs {
            /// Flat `key = value` file; flags given on the command line override it
            #[arg(long)]
            config: Option<PathBuf>,
            $(
                #[arg(long = $key, help = $help)]
                $field: Option<String>,
            )*
        }

        impl ExperimentArgs {
            fn overrides(&self) -> Vec<(String, String)> {
                let mut v = Vec::new();
                $(
                    if let Some(x) = &self.$field {
                        v.push(($key.to_string(), x.clone()));
                    }
                )*
                v
            }
        }

        #[cfg(test)]
        const FLAG_KEYS: &[&str] = &[$($key),*];
    };
}

experiment_flags! {
    pipeline => "pipeline": "smooth | sigmoid | piecewise (sweep only; forge takes it from the subcommand)",
    seed => "seed": "Seed for data, construction and certification [default: 0]",
    d0 => "d0": "Input dimension",
    n => "n": "Number of samples N",
    widths => "widths": "Hidden widths, comma separated",
    width => "width": "Single hidden width (alias for a one-entry --widths)",
    d_out => "d-out": "Output dimension [default: 1]",
    act => "act": "Activation: sigmoid, tanh, softplus, swish, elu, selu, relu, leaky-relu, linear",
    anchor => "anchor": "Override the smooth anchor point a",
    segment => "segment": "Piecewise trap region: linear | flat (ReLU zero piece)",
    distribution => "distribution": "Input distribution: normal | uniform",
    x_layout => "x-layout": "Sigmoid inputs: grid (centred integers) | random",
    data => "data": "Dataset JSON; X is read from it (and Y for piecewise)",
    alpha_scale => "alpha-scale": "Scale of the dual-vector mixing coefficients",
    perturb => "perturb": "Data perturbation size for sigmoid trials",
    trials => "trials": "Number of sigmoid perturbation trials (0 certifies the forged point)",
    split => "split": "Neuron split for sigmoid trials: uniform | random",
    samples => "samples": "Random perturbations per radius K",
    r0 => "r0": "Initial certification radius",
    r_min => "r-min": "Smallest certification radius",
    baseline => "baseline": "Run the training baseline: true | false",
    restarts => "restarts": "Baseline restarts R",
    steps => "steps": "Baseline steps per restart",
    step => "step": "Baseline step size",
    momentum => "momentum": "Baseline momentum",
    init_scale => "init-scale": "Baseline initialisation scale",
    early_stop => "early-stop": "Stop a baseline run below this fraction of E(theta); 0 disables",
    out => "out": "Output directory",
    counterexample_out => "counterexample-out": "Where to write a refuting network, if any",
}

#[derive(Args)]
struct GenDataArgs {
    #[arg(long)]
    d0: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// normal | uniform
    #[arg(long, default_value = "normal")]
    distribution: String,
    /// generic (smooth pipeline) | distinct (sigmoid pipeline) | none
    #[arg(long, default_value = "generic")]
    require: String,
    /// Output path; stdout if omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    /// Network JSON or forge bundle
    #[arg(long)]
    network: PathBuf,
    /// Dataset JSON or forge bundle
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 20_000)]
    samples: usize,
    #[arg(long, default_value_t = 1e-2)]
    r0: f64,
    #[arg(long, default_value_t = 1e-7)]
    r_min: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Never search beyond this radius. Smooth and piecewise bundles get
    /// their sign-preservation or segment cap automatically.
    #[arg(long)]
    radius_cap: Option<f64>,
    /// Also run the training baseline as sub-optimality evidence
    #[arg(long)]
    baseline: bool,
    /// Certificate JSON path; stdout if omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the refuting network, if any
    #[arg(long)]
    counterexample_out: Option<PathBuf>,
}

#[derive(Args)]
struct WitnessArgs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Witness JSON path; stdout if omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(long)]
    data: PathBuf,
    /// Take architecture and activation from this network or bundle
    #[arg(long)]
    network: Option<PathBuf>,
    /// Hidden widths, when --network is not given
    #[arg(long, value_delimiter = ',')]
    widths: Vec<usize>,
    /// Activation, when --network is not given
    #[arg(long)]
    act: Option<String>,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, default_value_t = 50_000)]
    steps: usize,
    #[arg(long, default_value_t = 1e-2)]
    step: f64,
    #[arg(long, default_value_t = 0.9)]
    momentum: f64,
    #[arg(long, default_value_t = 0.5)]
    init_scale: f64,
    #[arg(long, default_value_t = 1000)]
    trace_every: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Loss trace CSV (run,step,loss); not written if omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
    /// Seed range a..b (half-open) or a single seed
    #[arg(long, default_value = "0..1")]
    seeds: String,
    /// Activations to sweep, comma separated
    #[arg(long)]
    acts: Option<String>,
    /// Architectures to sweep, e.g. "6;6,5"
    #[arg(long)]
    widths_set: Option<String>,
}

#[derive(Args)]
struct ReportArgs {
    /// Summary CSV files
    #[arg(long, required = true)]
    csv: Vec<PathBuf>,
    /// Tidy CSV (one metric per row); not written if omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), RunError> {
    match path {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn build_config(args: &ExperimentArgs, pipeline: Option<Pipeline>) -> Result<ExperimentConfig, RunError> {
    let mut pairs = match &args.config {
        Some(p) => config::parse_pairs(&read_file(p)?)?,
        None => Vec::new(),
    };
    pairs.extend(args.overrides());
    let cfg = ExperimentConfig::from_pairs(&pairs, pipeline.unwrap_or(Pipeline::Smooth))?;
    if let Some(p) = pipeline {
        if cfg.pipeline != p {
            return Err(config::ConfigError::Invalid(format!("pipeline = {} conflicts with `forge {}`", cfg.pipeline.name(), p.name())).into());
        }
    }
    Ok(cfg)
}

fn forge(args: &ExperimentArgs, pipeline: Pipeline) -> Result<ExitStatus, RunError> {
    let cfg = build_config(args, Some(pipeline))?;
    let out = experiment::run(&cfg)?;
    experiment::write_artifacts(&out)?;
    print!("{}", summary::overview(&out.rows));
    println!("artifacts: {}", cfg.out.display());
    Ok(out.status)
}

fn gen_data(a: &GenDataArgs) -> Result<ExitStatus, RunError> {
    let dist: Distribution = a.distribution.parse()?;
    let req = match a.require.as_str() {
        "generic" => Requirement::Generic,
        "distinct" => Requirement::Distinct,
        "none" => Requirement::None,
        other => return Err(Error::InvalidInput(format!("unknown requirement '{other}'")).into()),
    };
    let x = data::gen_data(a.d0, a.n, a.seed, dist, req)?;
    #[derive(Serialize)]
    struct XDoc {
        #[serde(rename = "X")]
        x: Vec<Vec<f64>>,
    }
    let doc = XDoc { x: x.row_iter().map(|r| r.iter().copied().collect()).collect() };
    emit(a.out.as_deref(), &bundle::to_json(&doc)?)?;
    Ok(ExitStatus::Certified)
}

/// What a bundle file knows beyond the bare network.
struct BundleExtras {
    pipeline: Option<String>,
    witness: Option<(NetworkParams, f64)>,
}

fn bundle_extras(text: &str) -> Result<BundleExtras, RunError> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("malformed JSON: {e}")))?;
    let pipeline = v.get("pipeline").and_then(Value::as_str).map(str::to_string);
    let witness = match v.get("witness") {
        Some(w) => {
            let params: bundle::ParamsDoc = serde_json::from_value(w["params"].clone()).map_err(|e| Error::InvalidInput(format!("bad witness: {e}")))?;
            let gap = w["gap_direct"].as_f64().ok_or_else(|| Error::InvalidInput("witness without gap_direct".into()))?;
            Some((params.params()?, gap))
        }
        None => None,
    };
    Ok(BundleExtras { pipeline, witness })
}

fn certify_cmd(a: &CertifyArgs) -> Result<ExitStatus, RunError> {
    let net_text = read_file(&a.network)?;
    let (params, spec) = bundle::load_network(&net_text)?;
    let data = bundle::load_dataset(&read_file(&a.data)?)?;
    let extras = bundle_extras(&net_text)?;
    let auto_cap = match extras.pipeline.as_deref() {
        Some("smooth") => certify::sign_preservation_cap(&params),
        Some("piecewise") => Some(forge_piecewise::segment_radius_cap(&params, &data.x, &spec)?),
        _ => None,
    };
    let cap = match (a.radius_cap, auto_cap) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    };
    let cfg = CertifyConfig { samples: a.samples, r0: a.r0, r_min: a.r_min, radius_cap: cap, seed: a.seed };
    let search = certify::certify_local_min(&params, &data, &spec, &cfg, extras.witness.as_ref().map(|w| &w.0))?;
    let base = if a.baseline {
        let arch = params.architecture()?;
        let bcfg = BaselineConfig { early_stop: Some(1e-3 * search.loss), ..BaselineConfig::default() };
        Some(certify::train_baseline(&arch, &data, &spec, &bcfg, a.seed)?.best_loss)
    } else {
        None
    };
    let cert = certify::assemble_certificate(search, a.samples, extras.witness.map(|w| w.1), base);
    emit(a.out.as_deref(), &bundle::to_json(&CertificateDoc::new(&cert)?)?)?;
    if let (Some(p), Some(cx)) = (&a.counterexample_out, &cert.counterexample) {
        write_file(p, &bundle::to_json(&bundle::NetworkDoc::new(&cx.params, &spec)?)?)?;
    }
    // verdict only: certify does not demand sub-optimality evidence
    Ok(match cert.verdict {
        certify::Verdict::CertifiedLocalMin => ExitStatus::Certified,
        certify::Verdict::Refuted => ExitStatus::Refuted,
        certify::Verdict::Inconclusive => ExitStatus::Inconclusive,
    })
}

fn witness_cmd(a: &WitnessArgs) -> Result<ExitStatus, RunError> {
    let (params, spec) = bundle::load_network(&read_file(&a.network)?)?;
    let data = bundle::load_dataset(&read_file(&a.data)?)?;
    let w = forge_smooth::suboptimal_witness(&params, &data, &spec, &mut ChaCha8Rng::seed_from_u64(a.seed))?;
    emit(a.out.as_deref(), &bundle::to_json(&WitnessDoc::new(&w)?)?)?;
    Ok(if w.gap_direct > 0.0 { ExitStatus::Certified } else { ExitStatus::Inconclusive })
}

#[derive(Serialize)]
struct TraceRow {
    run: usize,
    step: usize,
    loss: f64,
}

impl CsvRow for TraceRow {
    fn header() -> &'static [&'static str] {
        &["run", "step", "loss"]
    }
}

fn baseline_cmd(a: &BaselineArgs) -> Result<ExitStatus, RunError> {
    let data = bundle::load_dataset(&read_file(&a.data)?)?;
    let (arch, spec) = match &a.network {
        Some(p) => {
            let (params, spec) = bundle::load_network(&read_file(p)?)?;
            (params.architecture()?, spec)
        }
        None => {
            let kind = a.act.as_deref().ok_or_else(|| Error::InvalidInput("need --network or --act".into()))?.parse()?;
            if a.widths.is_empty() {
                return Err(Error::InvalidInput("need --network or --widths".into()).into());
            }
            let spec = minforge_core::activations::select_anchor(kind)
                .or_else(|_| minforge_core::activations::select_segment(kind))
                .unwrap_or_else(|_| ActivationSpec::new(kind, 0.0, minforge_core::activations::DEFAULT_DELTA));
            (Architecture::new(data.x.nrows(), a.widths.clone(), data.y.nrows())?, spec)
        }
    };
    let cfg = BaselineConfig {
        step: a.step,
        momentum: a.momentum,
        steps: a.steps,
        restarts: a.restarts,
        init_scale: a.init_scale,
        early_stop: None,
        trace_every: a.trace_every,
    };
    let res = certify::train_baseline(&arch, &data, &spec, &cfg, a.seed)?;
    let rows: Vec<TraceRow> = res.runs.iter().enumerate().flat_map(|(run, r)| r.trace.iter().map(move |&(step, loss)| TraceRow { run, step, loss })).collect();
    if let Some(p) = &a.out {
        write_file(p, &summary::to_csv(&rows)?)?;
    }
    println!("best_loss = {:e}", res.best_loss);
    Ok(ExitStatus::Certified)
}

fn sweep_cmd(a: &SweepArgs) -> Result<ExitStatus, RunError> {
    let base = build_config(&a.exp, None)?;
    base.validate()?;
    let plan = SweepPlan {
        seeds: sweep::parse_seeds(&a.seeds)?,
        acts: a.acts.as_deref().map(sweep::parse_acts).transpose()?.unwrap_or_default(),
        widths: a.widths_set.as_deref().map(sweep::parse_widths_set).transpose()?.unwrap_or_default(),
        base,
    };
    let res = sweep::run_sweep(&plan);
    write_file(&plan.base.out.join("summary.csv"), &summary::to_csv(&res.rows)?)?;
    print!("{}", summary::overview(&res.rows));
    for (c, e) in &res.failures {
        eprintln!("seed {} act {} widths {:?}: {e}", c.seed, c.activation(), c.widths);
    }
    Ok(res.status)
}

fn report_cmd(a: &ReportArgs) -> Result<ExitStatus, RunError> {
    let mut rows = Vec::new();
    for p in &a.csv {
        rows.extend(summary::read_summary(&read_file(p)?)?);
    }
    if let Some(p) = &a.out {
        write_file(p, &summary::to_csv(&summary::tidy(&rows))?)?;
    }
    print!("{}", summary::overview(&rows));
    Ok(ExitStatus::Certified)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => ExitCode::SUCCESS,
                _ => ExitCode::from(ExitStatus::Precondition.code()),
            };
        }
    };
    let result = match &cli.cmd {
        Cmd::GenData(a) => gen_data(a),
        Cmd::Forge { which: ForgeCmd::Smooth(a) } => forge(a, Pipeline::Smooth),
        Cmd::Forge { which: ForgeCmd::Sigmoid(a) } => forge(a, Pipeline::Sigmoid),
        Cmd::Forge { which: ForgeCmd::Piecewise(a) } => forge(a, Pipeline::Piecewise),
        Cmd::Certify(a) => certify_cmd(a),
        Cmd::Witness(a) => witness_cmd(a),
        Cmd::TrainBaseline(a) => baseline_cmd(a),
        Cmd::Sweep(a) => sweep_cmd(a),
        Cmd::Report(a) => report_cmd(a),
    };
    match result {
        Ok(s) => ExitCode::from(s.code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_status().code())
        }
    }
}
