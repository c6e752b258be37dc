//! Batches of independent runs over seeds, activations and architectures.

use std::ops::Range;

use minforge_core::activations::ActivationKind;
use rayon::prelude::*;

use crate::config::{ConfigError, ExperimentConfig};
use crate::experiment::{self, RunError};
use crate::summary::SummaryRow;
use crate::ExitStatus;

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPlan {
    pub base: ExperimentConfig,
    pub seeds: Range<u64>,
    /// empty: the base activation only
    pub acts: Vec<ActivationKind>,
    /// empty: the base widths only
    pub widths: Vec<Vec<usize>>,
}

/// `a..b` (half-open) or a single seed.
pub fn parse_seeds(s: &str) -> Result<Range<u64>, ConfigError> {
    let bad = |msg: String| ConfigError::BadValue { key: "seeds".into(), msg };
    let num = |t: &str| t.trim().parse::<u64>().map_err(|e| bad(e.to_string()));
    let r = match s.split_once("..") {
        Some((a, b)) => num(a)?..num(b)?,
        None => {
            let a = num(s)?;
            a..a + 1
        }
    };
    if r.is_empty() {
        return Err(bad(format!("empty range '{s}'")));
    }
    Ok(r)
}

/// `6;6,5` → [[6], [6, 5]]
pub fn parse_widths_set(s: &str) -> Result<Vec<Vec<usize>>, ConfigError> {
    s.split(';')
        .map(|w| {
            w.split(',')
                .map(|t| t.trim().parse().map_err(|e: std::num::ParseIntError| ConfigError::BadValue { key: "widths-set".into(), msg: e.to_string() }))
                .collect()
        })
        .collect()
}

pub fn parse_acts(s: &str) -> Result<Vec<ActivationKind>, ConfigError> {
    s.split(',').map(|a| a.trim().parse().map_err(|e: minforge_core::Error| ConfigError::BadValue { key: "acts".into(), msg: e.to_string() })).collect()
}

impl SweepPlan {
    /// One config per (activation, widths, seed), each writing to its own subdirectory.
    pub fn expand(&self) -> Vec<ExperimentConfig> {
        let acts: Vec<Option<ActivationKind>> = if self.acts.is_empty() { vec![self.base.act] } else { self.acts.iter().copied().map(Some).collect() };
        let widths = if self.widths.is_empty() { vec![self.base.widths.clone()] } else { self.widths.clone() };
        let mut out = Vec::new();
        for act in &acts {
            for w in &widths {
                for seed in self.seeds.clone() {
                    let mut c = ExperimentConfig { act: *act, widths: w.clone(), seed, ..self.base.clone() };
                    let tag = w.iter().map(usize::to_string).collect::<Vec<_>>().join("x");
                    c.out = self.base.out.join(format!("{}-{}-{}-seed{}", c.pipeline.name(), c.activation().name(), tag, seed));
                    c.counterexample_out = None;
                    out.push(c);
                }
            }
        }
        out
    }
}

pub struct SweepResult {
    pub rows: Vec<SummaryRow>,
    /// (config, error) for runs that did not produce a row
    pub failures: Vec<(ExperimentConfig, String)>,
    pub status: ExitStatus,
}

/// Run every expanded config in parallel; rows keep the expansion order.
pub fn run_sweep(plan: &SweepPlan) -> SweepResult {
    let configs = plan.expand();
    let results: Vec<Result<experiment::RunOutput, RunError>> = configs
        .par_iter()
        .map(|c| {
            let out = experiment::run(c)?;
            experiment::write_artifacts(&out)?;
            Ok(out)
        })
        .collect();
    let mut res = SweepResult { rows: Vec::new(), failures: Vec::new(), status: ExitStatus::Certified };
    for (c, r) in configs.into_iter().zip(results) {
        match r {
            Ok(out) => {
                res.status = res.status.worst(out.status);
                res.rows.extend(out.rows);
            }
            Err(e) => {
                res.status = res.status.worst(e.exit_status());
                res.failures.push((c, e.to_string()));
            }
        }
    }
    res
}
