//! Run one configured experiment: forge, certify, baseline, artifacts.

use std::fs;
use std::path::Path;

use minforge_core::activations::{self, ActivationSpec, DEFAULT_DELTA};
use minforge_core::bundle::{self, Bundle, CertificateDoc, NetworkDoc, ParamsDoc};
use minforge_core::certify::{self, BaselineConfig, Certificate, CertifyConfig, Counterexample, Verdict};
use minforge_core::data::{self, Requirement};
use minforge_core::forge_sigmoid::{self, OneNeuronPoint};
use minforge_core::network::{Architecture, Dataset, NetworkParams};
use minforge_core::{forge_piecewise, forge_smooth, Error};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use crate::config::{ConfigError, ExperimentConfig, Pipeline, Segment, Split, XLayout};
use crate::summary::{self, SummaryRow, TrialRow};
use crate::ExitStatus;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl RunError {
    pub fn exit_status(&self) -> ExitStatus {
        match self {
            Self::Config(_) => ExitStatus::Precondition,
            Self::Core(e) => crate::exit_status_for(e),
            Self::Io { .. } | Self::Csv(_) => ExitStatus::Internal,
        }
    }
}

pub fn read_file(path: &Path) -> Result<String, RunError> {
    fs::read_to_string(path).map_err(|source| RunError::Io { path: path.display().to_string(), source })
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), RunError> {
    let io = |source| RunError::Io { path: path.display().to_string(), source };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    fs::write(path, contents).map_err(io)
}

/// X from a dataset document, a bundle, or a bare {"X": ...} file.
pub fn load_x(text: &str) -> Result<DMatrix<f64>, RunError> {
    let bad = |m: String| RunError::Core(Error::InvalidInput(m));
    let v: Value = serde_json::from_str(text).map_err(|e| bad(format!("malformed JSON: {e}")))?;
    let x = v.get("dataset").unwrap_or(&v).get("X").ok_or_else(|| bad("no \"X\" field".into()))?;
    let rows: Vec<Vec<f64>> = serde_json::from_value(x.clone()).map_err(|e| bad(format!("bad X: {e}")))?;
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(RunError::Core(Error::ShapeMismatch("X rows must be non-empty and of equal length".into())));
    }
    Ok(DMatrix::from_row_iterator(rows.len(), ncols, rows.into_iter().flatten()))
}

/// Everything a run produced, ready to be written.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub config: ExperimentConfig,
    pub bundle: Bundle,
    /// None for perturbation batches, which have one verdict per trial
    pub certificate: Option<Certificate>,
    /// first refuting Θ′, if any
    pub counterexample: Option<Counterexample>,
    pub rows: Vec<SummaryRow>,
    pub trials: Vec<TrialRow>,
    pub status: ExitStatus,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn certify_cfg(cfg: &ExperimentConfig, seed: u64, cap: Option<f64>) -> CertifyConfig {
    CertifyConfig { samples: cfg.samples, r0: cfg.r0, r_min: cfg.r_min, radius_cap: cap, seed }
}

fn baseline_cfg(cfg: &ExperimentConfig, loss: f64) -> BaselineConfig {
    BaselineConfig {
        step: cfg.step,
        momentum: cfg.momentum,
        steps: cfg.steps,
        restarts: cfg.restarts,
        init_scale: cfg.init_scale,
        early_stop: (cfg.early_stop > 0.0).then_some(cfg.early_stop * loss),
        ..BaselineConfig::default()
    }
}

fn baseline(cfg: &ExperimentConfig, params: &NetworkParams, data: &Dataset, spec: &ActivationSpec, loss: f64, seed: u64) -> Result<Option<f64>, RunError> {
    if !cfg.baseline_enabled() {
        return Ok(None);
    }
    let arch = params.architecture()?;
    Ok(Some(certify::train_baseline(&arch, data, spec, &baseline_cfg(cfg, loss), seed)?.best_loss))
}

pub fn smooth_spec(cfg: &ExperimentConfig) -> Result<ActivationSpec, RunError> {
    let kind = cfg.activation();
    let spec = match cfg.anchor {
        Some(a) => ActivationSpec::new(kind, a, DEFAULT_DELTA),
        None => activations::select_anchor(kind)?,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn piecewise_spec(cfg: &ExperimentConfig) -> Result<ActivationSpec, RunError> {
    Ok(match cfg.segment {
        Segment::Flat => activations::degenerate_relu_segment(),
        Segment::Linear => activations::select_segment(cfg.activation())?,
    })
}

/// Scalar inputs for the sigmoid pipeline.
pub fn sigmoid_x(cfg: &ExperimentConfig) -> Result<DVector<f64>, RunError> {
    let x = match (&cfg.data, cfg.x_layout) {
        (Some(p), _) => load_x(&read_file(p)?)?,
        (None, XLayout::Grid) => DMatrix::from_fn(1, cfg.n, |_, k| k as f64 - (cfg.n as f64 - 1.0) / 2.0),
        (None, XLayout::Random) => data::gen_data(1, cfg.n, cfg.seed, cfg.distribution, Requirement::Distinct)?,
    };
    if x.nrows() != 1 {
        return Err(Error::ShapeMismatch(format!("the sigmoid pipeline needs scalar inputs, X has {} rows", x.nrows())).into());
    }
    if !data::distinct_entries(&x) {
        return Err(Error::DistinctEntriesViolated.into());
    }
    Ok(x.row(0).transpose())
}

fn status_of(cert: &Certificate) -> ExitStatus {
    match cert.verdict {
        Verdict::Refuted => ExitStatus::Refuted,
        Verdict::Inconclusive => ExitStatus::Inconclusive,
        Verdict::CertifiedLocalMin if cert.suboptimal() => ExitStatus::Certified,
        Verdict::CertifiedLocalMin => ExitStatus::Inconclusive,
    }
}

/// `dims` is (d₀, N) of the data actually used, which may come from a file.
fn row(cfg: &ExperimentConfig, seed: u64, cert: &Certificate, dims: (usize, usize)) -> SummaryRow {
    SummaryRow {
        seed,
        pipeline: cfg.pipeline.name().into(),
        activation: cfg.activation().name().into(),
        d0: dims.0,
        n: dims.1,
        widths: cfg.widths.iter().map(usize::to_string).collect::<Vec<_>>().join(","),
        loss_at_theta: cert.loss,
        witness_gap: cert.witness_gap,
        grad_residual: cert.gradient_residual,
        certified_radius: cert.certified_radius,
        min_loss_delta: cert.min_loss_delta,
        halfspace_margin: cert.halfspace_min_margin,
        baseline_loss: cert.baseline_loss,
        verdict: cert.verdict.name().into(),
        config_hash: cfg.hash(),
    }
}

fn single(cfg: &ExperimentConfig, bundle: Bundle, cert: Certificate) -> RunOutput {
    RunOutput {
        config: cfg.clone(),
        rows: vec![row(cfg, cfg.seed, &cert, (bundle.dataset.x.len(), bundle.dataset.x.first().map_or(0, Vec::len)))],
        trials: Vec::new(),
        status: status_of(&cert),
        counterexample: cert.counterexample.clone(),
        certificate: Some(cert),
        bundle,
    }
}

fn run_smooth(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let spec = smooth_spec(cfg)?;
    let x = match &cfg.data {
        Some(p) => load_x(&read_file(p)?)?,
        None => data::gen_data(cfg.d0, cfg.n, cfg.seed, cfg.distribution, Requirement::Generic)?,
    };
    let arch = Architecture::new(x.nrows(), cfg.widths.clone(), cfg.d_out)?;
    let c = forge_smooth::forge_theorem1(&x, &arch, &spec, cfg.alpha_scale, &mut rng_for(cfg.seed, 1))?;
    let cap = certify::sign_preservation_cap(&c.params);
    let search = certify::certify_local_min(&c.params, &c.dataset, &spec, &certify_cfg(cfg, cfg.seed, cap), Some(&c.witness.params))?;
    let base = baseline(cfg, &c.params, &c.dataset, &spec, c.loss_at_theta, cfg.seed)?;
    let cert = certify::assemble_certificate(search, cfg.samples, Some(c.witness.gap_direct), base);
    Ok(single(cfg, Bundle::smooth(&c)?, cert))
}

fn run_piecewise(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let spec = piecewise_spec(cfg)?;
    let (x, y) = match &cfg.data {
        Some(p) => {
            let d = bundle::load_dataset(&read_file(p)?)?;
            (d.x, d.y)
        }
        None => {
            let x = data::gen_data(cfg.d0, cfg.n, cfg.seed, cfg.distribution, Requirement::None)?;
            (x, data::standard_normal(cfg.d_out, cfg.n, &mut rng_for(cfg.seed, 2)))
        }
    };
    let arch = Architecture::new(x.nrows(), cfg.widths.clone(), y.nrows())?;
    let c = forge_piecewise::forge_theorem2(&x, &y, &arch, &spec, &mut rng_for(cfg.seed, 1))?;
    let cap = forge_piecewise::segment_radius_cap(&c.params, &x, &spec)?;
    let search = certify::certify_local_min(&c.params, &c.dataset, &spec, &certify_cfg(cfg, cfg.seed, Some(cap)), None)?;
    let base = baseline(cfg, &c.params, &c.dataset, &spec, c.loss_at_theta, cfg.seed)?;
    let cert = certify::assemble_certificate(search, cfg.samples, None, base);
    Ok(single(cfg, Bundle::piecewise(&c)?, cert))
}

/// One perturbation trial: relocate, split, certify, baseline.
pub struct Trial {
    pub seed: u64,
    pub params: NetworkParams,
    pub dataset: Dataset,
    pub point: OneNeuronPoint,
    pub distance: f64,
    pub steps: usize,
    pub certificate: Certificate,
}

pub fn sigmoid_trial(cfg: &ExperimentConfig, point: &OneNeuronPoint, x: &DVector<f64>, y: &DVector<f64>, seed: u64) -> Result<Trial, RunError> {
    let spec = forge_sigmoid::sigmoid_spec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rel = forge_sigmoid::perturb_and_relocate(point, x, y, cfg.perturb, &mut rng)?;
    let d1 = cfg.widths[0];
    let q = match cfg.split {
        Split::Uniform => forge_sigmoid::uniform_split(d1),
        Split::Random => forge_sigmoid::random_split(d1, &mut rng),
    };
    let params = forge_sigmoid::split_neuron(&rel.point, &q)?;
    let n = rel.x.len();
    let dataset = Dataset::new(DMatrix::from_row_slice(1, n, rel.x.as_slice()), DMatrix::from_row_slice(1, n, rel.y.as_slice()))?;
    let search = certify::certify_local_min(&params, &dataset, &spec, &certify_cfg(cfg, seed, None), None)?;
    let base = baseline(cfg, &params, &dataset, &spec, rel.loss, seed)?;
    let certificate = certify::assemble_certificate(search, cfg.samples, None, base);
    Ok(Trial { seed, params, dataset, point: rel.point, distance: rel.distance, steps: rel.steps, certificate })
}

fn run_sigmoid(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let spec = forge_sigmoid::sigmoid_spec();
    let x = sigmoid_x(cfg)?;
    let c = forge_sigmoid::forge_theorem3(&x, cfg.widths[0], cfg.alpha_scale, 1.0, &mut rng_for(cfg.seed, 1))?;
    let bundle = Bundle::sigmoid_construction(&c)?;
    if cfg.trials == 0 {
        let (params, data) = (c.params(), c.dataset());
        let search = certify::certify_local_min(&params, &data, &spec, &certify_cfg(cfg, cfg.seed, None), None)?;
        let base = baseline(cfg, &params, &data, &spec, c.loss(), cfg.seed)?;
        return Ok(single(cfg, bundle, certify::assemble_certificate(search, cfg.samples, None, base)));
    }
    let point = forge_sigmoid::merge_to_one_neuron(&c)?;
    let mut rows = Vec::with_capacity(cfg.trials);
    let mut trials = Vec::with_capacity(cfg.trials);
    let mut status = ExitStatus::Certified;
    let mut counterexample = None;
    for t in 0..cfg.trials as u64 {
        let seed = cfg.seed.wrapping_add(t);
        match sigmoid_trial(cfg, &point, &c.x, &c.y, seed) {
            Ok(tr) => {
                let cert = &tr.certificate;
                status = status.worst(status_of(cert));
                if counterexample.is_none() {
                    counterexample = cert.counterexample.clone();
                }
                rows.push(row(cfg, seed, cert, (1, c.x.len())));
                trials.push(TrialRow::new(cfg, &tr));
            }
            Err(e) => {
                status = status.worst(ExitStatus::Internal);
                trials.push(TrialRow::failed(cfg, seed, &e.to_string()));
            }
        }
    }
    Ok(RunOutput { config: cfg.clone(), bundle, certificate: None, counterexample, rows, trials, status })
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    cfg.validate()?;
    match cfg.pipeline {
        Pipeline::Smooth => run_smooth(cfg),
        Pipeline::Sigmoid => run_sigmoid(cfg),
        Pipeline::Piecewise => run_piecewise(cfg),
    }
}

/// The refuting Θ′ as a network document with the run's activation.
pub fn counterexample_json(out: &RunOutput) -> Result<Option<String>, RunError> {
    let Some(cx) = &out.counterexample else {
        return Ok(None);
    };
    let doc = NetworkDoc { params: ParamsDoc::new(&cx.params)?, activation: out.bundle.network.activation.clone() };
    Ok(Some(bundle::to_json(&doc)?))
}

/// Write config.txt, bundle.json, certificate.json, summary.csv and, for
/// perturbation batches, trials.csv under `cfg.out`.
pub fn write_artifacts(out: &RunOutput) -> Result<(), RunError> {
    let dir = &out.config.out;
    write_file(&dir.join("config.txt"), &out.config.to_text())?;
    write_file(&dir.join("bundle.json"), &bundle::to_json(&out.bundle)?)?;
    if let Some(c) = &out.certificate {
        write_file(&dir.join("certificate.json"), &bundle::to_json(&CertificateDoc::new(c)?)?)?;
    }
    write_file(&dir.join("summary.csv"), &summary::to_csv(&out.rows)?)?;
    if !out.trials.is_empty() {
        write_file(&dir.join("trials.csv"), &summary::to_csv(&out.trials)?)?;
    }
    if let (Some(path), Some(json)) = (&out.config.counterexample_out, counterexample_json(out)?) {
        write_file(path, &json)?;
    }
    Ok(())
}
