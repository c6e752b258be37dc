//! Flat `key = value` experiment configs. Keys are the long CLI flag names.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use minforge_core::activations::ActivationKind;
use minforge_core::data::Distribution;
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected 'key = value', got '{text}'")]
    Syntax { line: usize, text: String },
    #[error("unknown config key '{0}'")]
    UnknownKey(String),
    #[error("bad value for '{key}': {msg}")]
    BadValue { key: String, msg: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pipeline {
    Smooth,
    Sigmoid,
    Piecewise,
}

impl Pipeline {
    pub fn name(self) -> &'static str {
        match self {
            Self::Smooth => "smooth",
            Self::Sigmoid => "sigmoid",
            Self::Piecewise => "piecewise",
        }
    }

    pub fn default_activation(self) -> ActivationKind {
        match self {
            Self::Smooth => ActivationKind::Softplus,
            Self::Sigmoid => ActivationKind::Sigmoid,
            Self::Piecewise => ActivationKind::Relu,
        }
    }
}

impl FromStr for Pipeline {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "smooth" => Ok(Self::Smooth),
            "sigmoid" => Ok(Self::Sigmoid),
            "piecewise" => Ok(Self::Piecewise),
            _ => Err(format!("unknown pipeline '{s}'")),
        }
    }
}

/// Where the sigmoid pipeline takes its scalar inputs from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum XLayout {
    /// k − (N−1)/2 for k = 0..N−1
    Grid,
    Random,
}

impl FromStr for XLayout {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "grid" => Ok(Self::Grid),
            "random" => Ok(Self::Random),
            _ => Err(format!("unknown x layout '{s}'")),
        }
    }
}

impl fmt::Display for XLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Grid => "grid",
            Self::Random => "random",
        })
    }
}

/// Which affine piece the piecewise forge traps the network on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Segment {
    Linear,
    /// ReLU's zero piece
    Flat,
}

impl FromStr for Segment {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "linear" => Ok(Self::Linear),
            "flat" => Ok(Self::Flat),
            _ => Err(format!("unknown segment '{s}'")),
        }
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Linear => "linear",
            Self::Flat => "flat",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    Uniform,
    Random,
}

impl FromStr for Split {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "random" => Ok(Self::Random),
            _ => Err(format!("unknown split '{s}'")),
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Uniform => "uniform",
            Self::Random => "random",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub pipeline: Pipeline,
    pub seed: u64,
    pub d0: usize,
    pub n: usize,
    pub widths: Vec<usize>,
    pub d_out: usize,
    /// None picks the pipeline default
    pub act: Option<ActivationKind>,
    /// overrides the activation's default smooth anchor
    pub anchor: Option<f64>,
    pub segment: Segment,
    pub distribution: Distribution,
    pub x_layout: XLayout,
    /// dataset file; X is read from it, and Y too for the piecewise forge
    pub data: Option<PathBuf>,
    pub alpha_scale: f64,
    pub perturb: f64,
    /// 0 certifies the forged point itself; T > 0 runs T perturbation trials
    pub trials: usize,
    pub split: Split,
    pub samples: usize,
    pub r0: f64,
    pub r_min: f64,
    /// None: off for smooth (the witness shows sub-optimality), on otherwise
    pub baseline: Option<bool>,
    pub restarts: usize,
    pub steps: usize,
    pub step: f64,
    pub momentum: f64,
    pub init_scale: f64,
    /// stop a baseline run below this fraction of E(Θ)
    pub early_stop: f64,
    pub out: PathBuf,
    pub counterexample_out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            pipeline: Pipeline::Smooth,
            seed: 0,
            d0: 2,
            n: 8,
            widths: vec![5, 4],
            d_out: 1,
            act: None,
            anchor: None,
            segment: Segment::Linear,
            distribution: Distribution::Normal,
            x_layout: XLayout::Grid,
            data: None,
            alpha_scale: 1.0,
            perturb: 1e-3,
            trials: 0,
            split: Split::Uniform,
            samples: 20_000,
            r0: 1e-2,
            r_min: 1e-7,
            baseline: None,
            restarts: 8,
            steps: 50_000,
            step: 1e-2,
            momentum: 0.9,
            init_scale: 0.5,
            early_stop: 1e-3,
            out: PathBuf::from("out"),
            counterexample_out: None,
        }
    }
}

/// Every key the config accepts, in canonical order. `width` is an alias
/// for a single-entry `widths`.
pub const KEYS: &[&str] = &[
    "pipeline",
    "seed",
    "d0",
    "n",
    "widths",
    "width",
    "d-out",
    "act",
    "anchor",
    "segment",
    "distribution",
    "x-layout",
    "data",
    "alpha-scale",
    "perturb",
    "trials",
    "split",
    "samples",
    "r0",
    "r-min",
    "baseline",
    "restarts",
    "steps",
    "step",
    "momentum",
    "init-scale",
    "early-stop",
    "out",
    "counterexample-out",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::BadValue { key: key.into(), msg: e.to_string() })
}

fn parse_list(key: &str, value: &str) -> Result<Vec<usize>, ConfigError> {
    value.split(',').map(|s| parse(key, s.trim())).collect()
}

/// Split config text into (key, value) pairs, checking syntax only.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax { line: i + 1, text: raw.into() })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn join(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    pub fn for_pipeline(pipeline: Pipeline) -> Self {
        let mut c = Self { pipeline, ..Self::default() };
        if pipeline == Pipeline::Sigmoid {
            c.d0 = 1;
            c.n = 6;
            c.widths = vec![8];
        } else if pipeline == Pipeline::Piecewise {
            c.n = 6;
            c.widths = vec![4, 3];
        }
        c
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key {
            "pipeline" => self.pipeline = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "d0" => self.d0 = parse(key, v)?,
            "n" => self.n = parse(key, v)?,
            "widths" => self.widths = parse_list(key, v)?,
            "width" => self.widths = vec![parse(key, v)?],
            "d-out" => self.d_out = parse(key, v)?,
            "act" => self.act = Some(parse(key, v)?),
            "anchor" => self.anchor = Some(parse(key, v)?),
            "segment" => self.segment = parse(key, v)?,
            "distribution" => self.distribution = parse(key, v)?,
            "x-layout" => self.x_layout = parse(key, v)?,
            "data" => self.data = Some(PathBuf::from(v)),
            "alpha-scale" => self.alpha_scale = parse(key, v)?,
            "perturb" => self.perturb = parse(key, v)?,
            "trials" => self.trials = parse(key, v)?,
            "split" => self.split = parse(key, v)?,
            "samples" => self.samples = parse(key, v)?,
            "r0" => self.r0 = parse(key, v)?,
            "r-min" => self.r_min = parse(key, v)?,
            "baseline" => self.baseline = Some(parse(key, v)?),
            "restarts" => self.restarts = parse(key, v)?,
            "steps" => self.steps = parse(key, v)?,
            "step" => self.step = parse(key, v)?,
            "momentum" => self.momentum = parse(key, v)?,
            "init-scale" => self.init_scale = parse(key, v)?,
            "early-stop" => self.early_stop = parse(key, v)?,
            "out" => self.out = PathBuf::from(v),
            "counterexample-out" => self.counterexample_out = Some(PathBuf::from(v)),
            _ => return Err(ConfigError::UnknownKey(key.into())),
        }
        Ok(())
    }

    /// Apply `key = value` lines on top of `base`. Blank lines and `#` comments are ignored.
    pub fn parse_text(text: &str, base: Self) -> Result<Self, ConfigError> {
        let mut cfg = base;
        for (k, v) in parse_pairs(text)? {
            cfg.set(&k, &v)?;
        }
        Ok(cfg)
    }

    /// Build from ordered (key, value) pairs. Pipeline-specific defaults are
    /// taken from the last `pipeline` pair, or from `fallback`.
    pub fn from_pairs(pairs: &[(String, String)], fallback: Pipeline) -> Result<Self, ConfigError> {
        let pipeline = match pairs.iter().rev().find(|(k, _)| k == "pipeline") {
            Some((k, v)) => parse(k, v.trim())?,
            None => fallback,
        };
        let mut cfg = Self::for_pipeline(pipeline);
        for (k, v) in pairs {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn activation(&self) -> ActivationKind {
        self.act.unwrap_or(self.pipeline.default_activation())
    }

    pub fn baseline_enabled(&self) -> bool {
        self.baseline.unwrap_or(self.pipeline != Pipeline::Smooth)
    }

    /// Canonical text form; `parse_text` of it gives back the same config.
    pub fn to_text(&self) -> String {
        let mut m: BTreeMap<usize, (&str, String)> = BTreeMap::new();
        let mut put = |k: &'static str, v: String| {
            let idx = KEYS.iter().position(|x| *x == k).expect("known key");
            m.insert(idx, (k, v));
        };
        put("pipeline", self.pipeline.name().into());
        put("seed", self.seed.to_string());
        put("d0", self.d0.to_string());
        put("n", self.n.to_string());
        put("widths", join(&self.widths));
        put("d-out", self.d_out.to_string());
        if let Some(a) = self.act {
            put("act", a.name().into());
        }
        if let Some(a) = self.anchor {
            put("anchor", a.to_string());
        }
        put("segment", self.segment.to_string());
        put("distribution", self.distribution.to_string());
        put("x-layout", self.x_layout.to_string());
        if let Some(d) = &self.data {
            put("data", d.display().to_string());
        }
        put("alpha-scale", self.alpha_scale.to_string());
        put("perturb", self.perturb.to_string());
        put("trials", self.trials.to_string());
        put("split", self.split.to_string());
        put("samples", self.samples.to_string());
        put("r0", self.r0.to_string());
        put("r-min", self.r_min.to_string());
        if let Some(b) = self.baseline {
            put("baseline", b.to_string());
        }
        put("restarts", self.restarts.to_string());
        put("steps", self.steps.to_string());
        put("step", self.step.to_string());
        put("momentum", self.momentum.to_string());
        put("init-scale", self.init_scale.to_string());
        put("early-stop", self.early_stop.to_string());
        put("out", self.out.display().to_string());
        if let Some(c) = &self.counterexample_out {
            put("counterexample-out", c.display().to_string());
        }
        m.values().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// First 16 hex digits of SHA-256 over the canonical text, excluding
    /// output locations so a moved experiment keeps its hash.
    pub fn hash(&self) -> String {
        let c = Self { out: PathBuf::new(), counterexample_out: None, ..self.clone() };
        let digest = Sha256::digest(c.to_text().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.into()));
        if self.widths.is_empty() || self.widths.contains(&0) {
            return bad("widths must be non-empty and positive");
        }
        if self.n == 0 || self.d0 == 0 || self.d_out == 0 {
            return bad("d0, n and d-out must be positive");
        }
        if self.samples == 0 {
            return bad("samples must be at least 1");
        }
        if !(self.r0 > 0.0 && self.r_min > 0.0 && self.r_min <= self.r0) {
            return bad("need 0 < r-min <= r0");
        }
        if !(self.perturb >= 0.0 && self.alpha_scale > 0.0 && self.step > 0.0 && self.init_scale > 0.0) {
            return bad("perturb must be >= 0; alpha-scale, step and init-scale must be positive");
        }
        if self.restarts == 0 {
            return bad("restarts must be at least 1");
        }
        if self.pipeline == Pipeline::Sigmoid {
            if self.d0 != 1 || self.d_out != 1 || self.widths.len() != 1 {
                return bad("the sigmoid pipeline needs d0 = 1, d-out = 1 and one hidden layer");
            }
            if self.activation() != ActivationKind::Sigmoid {
                return bad("the sigmoid pipeline only supports act = sigmoid");
            }
        }
        if self.pipeline != Pipeline::Sigmoid && self.trials > 0 {
            return bad("trials are only defined for the sigmoid pipeline");
        }
        if self.pipeline == Pipeline::Piecewise && self.segment == Segment::Flat && self.activation() != ActivationKind::Relu {
            return bad("segment = flat is only defined for relu");
        }
        Ok(())
    }
}
