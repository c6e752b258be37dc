//! Activation functions with closed-form first and second derivatives.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower bound on |σ(a)|, |σ′(a)|, |σ″(a)| at a valid smooth anchor.
pub const EPS_ANCHOR: f64 = 1e-6;
/// Default half-width of the neighbourhood around the anchor.
pub const DEFAULT_DELTA: f64 = 0.5;
pub const LEAKY_SLOPE: f64 = 0.01;
pub const SELU_LAMBDA: f64 = 1.050_700_987_355_480_5;
pub const SELU_ALPHA: f64 = 1.673_263_242_354_377_3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActivationKind {
    Sigmoid,
    Tanh,
    Softplus,
    Swish,
    Elu,
    Selu,
    Relu,
    LeakyRelu,
    Linear,
}

impl ActivationKind {
    pub const ALL: [ActivationKind; 9] = [
        Self::Sigmoid,
        Self::Tanh,
        Self::Softplus,
        Self::Swish,
        Self::Elu,
        Self::Selu,
        Self::Relu,
        Self::LeakyRelu,
        Self::Linear,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Sigmoid => "sigmoid",
            Self::Tanh => "tanh",
            Self::Softplus => "softplus",
            Self::Swish => "swish",
            Self::Elu => "elu",
            Self::Selu => "selu",
            Self::Relu => "relu",
            Self::LeakyRelu => "leaky-relu",
            Self::Linear => "linear",
        }
    }

    /// Kinds with a non-differentiable point (always at t = 0).
    pub fn has_kink(self) -> bool {
        matches!(self, Self::Elu | Self::Selu | Self::Relu | Self::LeakyRelu)
    }

    /// Kinds that are affine on some interval and so usable for the piecewise forge.
    pub fn has_linear_piece(self) -> bool {
        self.has_kink() || self == Self::Linear
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ActivationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown activation '{s}'")))
    }
}

/// Value, first and second derivative at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Derivs {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// An activation together with its anchor `a` and smooth radius `delta`.
///
/// For the piecewise pipeline `linear_slope`/`linear_offset` describe the
/// affine piece σ(t) = slope·(t − a) + offset on [a − δ, a + δ].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActivationSpec {
    pub kind: ActivationKind,
    pub anchor: f64,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear_slope: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear_offset: Option<f64>,
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

fn softplus(t: f64) -> f64 {
    // ln(1 + e^t) without overflow
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

impl ActivationSpec {
    pub fn new(kind: ActivationKind, anchor: f64, delta: f64) -> Self {
        Self { kind, anchor, delta, linear_slope: None, linear_offset: None }
    }

    /// σ(t), defined everywhere including kinks.
    pub fn eval(&self, t: f64) -> f64 {
        eval_kind(self.kind, t)
    }

    /// σ(t), σ′(t), σ″(t) in closed form. Errors exactly at a kink.
    pub fn eval_with_derivs(&self, t: f64) -> Result<Derivs> {
        derivs_kind(self.kind, t)
    }

    /// σ′ only; cheaper helper for backpropagation.
    pub fn deriv(&self, t: f64) -> Result<f64> {
        Ok(self.eval_with_derivs(t)?.d1)
    }

    pub fn is_piecewise(&self) -> bool {
        self.linear_slope.is_some()
    }

    /// Check the invariants that make this spec usable by a forge.
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(Error::InvalidActivation(format!("delta must be positive, got {}", self.delta)));
        }
        if !self.anchor.is_finite() {
            return Err(Error::InvalidActivation("anchor must be finite".into()));
        }
        match (self.linear_slope, self.linear_offset) {
            (Some(slope), Some(offset)) => {
                // sample strictly inside plus the endpoints
                for k in 0..=8 {
                    let t = self.anchor - self.delta + self.delta * k as f64 / 4.0;
                    let want = slope * (t - self.anchor) + offset;
                    if (self.eval(t) - want).abs() > 1e-12 {
                        return Err(Error::InvalidActivation(format!(
                            "{} is not affine on [{}, {}]",
                            self.kind,
                            self.anchor - self.delta,
                            self.anchor + self.delta
                        )));
                    }
                }
                Ok(())
            }
            (None, None) => {
                let lo = self.anchor - self.delta;
                let hi = self.anchor + self.delta;
                if self.kind.has_kink() && lo <= 0.0 && hi >= 0.0 {
                    return Err(Error::InvalidActivation(format!(
                        "{} is not twice differentiable on [{lo}, {hi}]",
                        self.kind
                    )));
                }
                let d = self.eval_with_derivs(self.anchor)?;
                if d.value.abs() <= EPS_ANCHOR || d.d1.abs() <= EPS_ANCHOR || d.d2.abs() <= EPS_ANCHOR {
                    return Err(Error::InvalidActivation(format!(
                        "anchor {} of {} has a (near) zero value or derivative",
                        self.anchor, self.kind
                    )));
                }
                Ok(())
            }
            _ => Err(Error::InvalidActivation("slope and offset must be given together".into())),
        }
    }

    /// Largest |σ′| on [a − δ, a + δ], sampled on a fine grid including the endpoints.
    pub fn max_abs_deriv_on_segment(&self) -> Result<f64> {
        const GRID: usize = 4000;
        (0..=GRID)
            .map(|k| self.anchor - self.delta + 2.0 * self.delta * k as f64 / GRID as f64)
            .try_fold(0.0_f64, |m, t| Ok(m.max(self.eval_with_derivs(t)?.d1.abs())))
    }
}

fn eval_kind(kind: ActivationKind, t: f64) -> f64 {
    use ActivationKind::*;
    match kind {
        Sigmoid => sigmoid(t),
        Tanh => t.tanh(),
        Softplus => softplus(t),
        Swish => t * sigmoid(t),
        Elu => {
            if t > 0.0 {
                t
            } else {
                t.exp_m1()
            }
        }
        Selu => {
            if t > 0.0 {
                SELU_LAMBDA * t
            } else {
                SELU_LAMBDA * SELU_ALPHA * t.exp_m1()
            }
        }
        Relu => t.max(0.0),
        LeakyRelu => {
            if t > 0.0 {
                t
            } else {
                LEAKY_SLOPE * t
            }
        }
        Linear => t,
    }
}

fn derivs_kind(kind: ActivationKind, t: f64) -> Result<Derivs> {
    use ActivationKind::*;
    if !t.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite pre-activation {t}")));
    }
    if kind.has_kink() && t == 0.0 {
        return Err(Error::EvaluationAtKink { kind, t });
    }
    let (value, d1, d2) = match kind {
        Sigmoid => {
            let s = sigmoid(t);
            let ds = s * (1.0 - s);
            (s, ds, ds * (1.0 - 2.0 * s))
        }
        Tanh => {
            let th = t.tanh();
            let ds = 1.0 - th * th;
            (th, ds, -2.0 * th * ds)
        }
        Softplus => {
            let s = sigmoid(t);
            (softplus(t), s, s * (1.0 - s))
        }
        Swish => {
            let s = sigmoid(t);
            let ds = s * (1.0 - s);
            (t * s, s + t * ds, ds * (2.0 + t * (1.0 - 2.0 * s)))
        }
        Elu if t > 0.0 => (t, 1.0, 0.0),
        Elu => (t.exp_m1(), t.exp(), t.exp()),
        Selu if t > 0.0 => (SELU_LAMBDA * t, SELU_LAMBDA, 0.0),
        Selu => {
            let c = SELU_LAMBDA * SELU_ALPHA;
            (c * t.exp_m1(), c * t.exp(), c * t.exp())
        }
        Relu if t > 0.0 => (t, 1.0, 0.0),
        Relu => (0.0, 0.0, 0.0),
        LeakyRelu if t > 0.0 => (t, 1.0, 0.0),
        LeakyRelu => (LEAKY_SLOPE * t, LEAKY_SLOPE, 0.0),
        Linear => (t, 1.0, 0.0),
    };
    Ok(Derivs { value, d1, d2 })
}

/// Default smooth anchor for `kind` (Assumption-2 style: σ, σ′, σ″ all nonzero).
pub fn select_anchor(kind: ActivationKind) -> Result<ActivationSpec> {
    use ActivationKind::*;
    let a = match kind {
        Sigmoid => 1.0,
        Tanh => 0.5,
        Softplus => 0.0,
        Swish => 1.0,
        // the nonlinear side; the linear side has σ″ = 0
        Elu | Selu => -1.0,
        Relu | LeakyRelu | Linear => return Err(Error::NoValidAnchor(kind)),
    };
    let spec = ActivationSpec::new(kind, a, DEFAULT_DELTA);
    spec.validate()?;
    Ok(spec)
}

/// Default affine segment for the piecewise pipeline.
pub fn select_segment(kind: ActivationKind) -> Result<ActivationSpec> {
    use ActivationKind::*;
    let (a, slope, offset) = match kind {
        Relu | LeakyRelu | Elu => (1.0, 1.0, 1.0),
        Selu => (1.0, SELU_LAMBDA, SELU_LAMBDA),
        Linear => (0.0, 1.0, 0.0),
        Sigmoid | Tanh | Softplus | Swish => return Err(Error::NoLinearSegment(kind)),
    };
    let spec = ActivationSpec {
        kind,
        anchor: a,
        delta: DEFAULT_DELTA,
        linear_slope: Some(slope),
        linear_offset: Some(offset),
    };
    spec.validate()?;
    Ok(spec)
}

/// The flat piece of ReLU around a = −1, which drives the degenerate branch.
pub fn degenerate_relu_segment() -> ActivationSpec {
    ActivationSpec {
        kind: ActivationKind::Relu,
        anchor: -1.0,
        delta: DEFAULT_DELTA,
        linear_slope: Some(0.0),
        linear_offset: Some(0.0),
    }
}
