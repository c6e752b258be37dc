//! CSV rows and the tidy report derived from them.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::experiment::{RunError, Trial};

/// One certified (or not) point. Column order is part of the file format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub seed: u64,
    pub pipeline: String,
    pub activation: String,
    pub d0: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub widths: String,
    pub loss_at_theta: f64,
    pub witness_gap: Option<f64>,
    pub grad_residual: f64,
    pub certified_radius: f64,
    pub min_loss_delta: f64,
    pub halfspace_margin: f64,
    pub baseline_loss: Option<f64>,
    pub verdict: String,
    pub config_hash: String,
}

impl SummaryRow {
    pub const HEADER: [&'static str; 15] = [
        "seed",
        "pipeline",
        "activation",
        "d0",
        "N",
        "widths",
        "loss_at_theta",
        "witness_gap",
        "grad_residual",
        "certified_radius",
        "min_loss_delta",
        "halfspace_margin",
        "baseline_loss",
        "verdict",
        "config_hash",
    ];

    pub fn suboptimal(&self) -> bool {
        self.witness_gap.is_some_and(|g| g > 0.0) || self.baseline_loss.is_some_and(|b| b < self.loss_at_theta)
    }
}

/// One data-perturbation trial of the sigmoid pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub seed: u64,
    pub delta_data: f64,
    pub relocation_distance: Option<f64>,
    pub relocation_steps: Option<usize>,
    /// of the relocated one-neuron point
    pub gradient_residual: Option<f64>,
    pub h_min_eig: Option<f64>,
    pub verdict: String,
    pub certified_radius: Option<f64>,
    pub loss: Option<f64>,
    pub baseline_loss: Option<f64>,
    pub error: String,
    pub config_hash: String,
}

impl TrialRow {
    pub const HEADER: [&'static str; 12] = [
        "seed",
        "delta_data",
        "relocation_distance",
        "relocation_steps",
        "gradient_residual",
        "h_min_eig",
        "verdict",
        "certified_radius",
        "loss",
        "baseline_loss",
        "error",
        "config_hash",
    ];

    pub fn new(cfg: &ExperimentConfig, t: &Trial) -> Self {
        Self {
            seed: t.seed,
            delta_data: cfg.perturb,
            relocation_distance: Some(t.distance),
            relocation_steps: Some(t.steps),
            gradient_residual: Some(t.point.gradient_residual),
            h_min_eig: Some(minforge_core::forge_sigmoid::eigen2(&t.point.h_matrix).0),
            verdict: t.certificate.verdict.name().into(),
            certified_radius: Some(t.certificate.certified_radius),
            loss: Some(t.certificate.loss),
            baseline_loss: t.certificate.baseline_loss,
            error: String::new(),
            config_hash: cfg.hash(),
        }
    }

    pub fn failed(cfg: &ExperimentConfig, seed: u64, error: &str) -> Self {
        Self {
            seed,
            delta_data: cfg.perturb,
            relocation_distance: None,
            relocation_steps: None,
            gradient_residual: None,
            h_min_eig: None,
            verdict: "error".into(),
            certified_radius: None,
            loss: None,
            baseline_loss: None,
            error: error.into(),
            config_hash: cfg.hash(),
        }
    }
}

pub trait CsvRow: Serialize {
    fn header() -> &'static [&'static str];
}

impl CsvRow for SummaryRow {
    fn header() -> &'static [&'static str] {
        &Self::HEADER
    }
}

impl CsvRow for TrialRow {
    fn header() -> &'static [&'static str] {
        &Self::HEADER
    }
}

/// Header plus rows; the header is written even when there are no rows.
pub fn to_csv<T: CsvRow>(rows: &[T]) -> Result<String, RunError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(T::header())?;
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| RunError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn read_summary(text: &str) -> Result<Vec<SummaryRow>, RunError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    Ok(r.deserialize().collect::<Result<Vec<SummaryRow>, _>>()?)
}

/// One observation per row, for plotting.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TidyRow {
    pub config_hash: String,
    pub seed: u64,
    pub pipeline: String,
    pub activation: String,
    pub widths: String,
    pub metric: &'static str,
    pub value: f64,
}

impl CsvRow for TidyRow {
    fn header() -> &'static [&'static str] {
        &["config_hash", "seed", "pipeline", "activation", "widths", "metric", "value"]
    }
}

pub fn tidy(rows: &[SummaryRow]) -> Vec<TidyRow> {
    rows.iter()
        .flat_map(|r| {
            let metrics = [
                ("loss_at_theta", Some(r.loss_at_theta)),
                ("witness_gap", r.witness_gap),
                ("grad_residual", Some(r.grad_residual)),
                ("certified_radius", Some(r.certified_radius)),
                ("min_loss_delta", Some(r.min_loss_delta)),
                ("halfspace_margin", Some(r.halfspace_margin)),
                ("baseline_loss", r.baseline_loss),
            ];
            metrics.into_iter().filter_map(move |(metric, v)| {
                v.map(|value| TidyRow {
                    config_hash: r.config_hash.clone(),
                    seed: r.seed,
                    pipeline: r.pipeline.clone(),
                    activation: r.activation.clone(),
                    widths: r.widths.clone(),
                    metric,
                    value,
                })
            })
        })
        .collect()
}

#[derive(Default)]
struct Group {
    runs: usize,
    certified: usize,
    refuted: usize,
    inconclusive: usize,
    suboptimal: usize,
    min_radius: f64,
    max_grad: f64,
}

/// Plain-text table of verdict counts per (pipeline, activation, widths).
pub fn overview(rows: &[SummaryRow]) -> String {
    let mut groups: BTreeMap<(String, String, String), Group> = BTreeMap::new();
    for r in rows {
        let g = groups
            .entry((r.pipeline.clone(), r.activation.clone(), r.widths.clone()))
            .or_insert_with(|| Group { min_radius: f64::INFINITY, ..Group::default() });
        g.runs += 1;
        match r.verdict.as_str() {
            "certified-local-min" => g.certified += 1,
            "refuted" => g.refuted += 1,
            _ => g.inconclusive += 1,
        }
        g.suboptimal += usize::from(r.suboptimal());
        g.min_radius = g.min_radius.min(r.certified_radius);
        g.max_grad = g.max_grad.max(r.grad_residual);
    }
    let mut s = format!(
        "{:<10} {:<11} {:<9} {:>5} {:>9} {:>7} {:>12} {:>10} {:>10} {:>9}\n",
        "pipeline", "activation", "widths", "runs", "certified", "refuted", "inconclusive", "suboptimal", "min_radius", "max_grad"
    );
    for ((p, a, w), g) in &groups {
        let _ = writeln!(
            s,
            "{p:<10} {a:<11} {w:<9} {:>5} {:>9} {:>7} {:>12} {:>10} {:>10.1e} {:>9.1e}",
            g.runs, g.certified, g.refuted, g.inconclusive, g.suboptimal, g.min_radius, g.max_grad
        );
    }
    s
}
