//! Numerical evidence that a parameter point is (or is not) a local minimum.
//!
//! Nothing here is a proof. The checks are a gradient residual, a shrinking
//! ∞-ball search over all parameters with structured directions mixed in,
//! a finite-difference Hessian for curvature, the half-space inequality on
//! outputs, and a gradient-descent baseline for sub-optimality.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activations::ActivationSpec;
use crate::data::standard_normal;
use crate::error::{Error, Result};
use crate::network::{self, Architecture, Dataset, NetworkParams};

pub const GRADIENT_TOL: f64 = 1e-8;
/// A sampled decrease beyond this shrinks the radius.
pub const DECREASE_TOL: f64 = 1e-12;
/// A decrease beyond this, with first- or second-order evidence, refutes.
pub const REFUTE_TOL: f64 = 1e-10;
const CURVATURE_RTOL: f64 = 1e-6;
const HESSIAN_STEP: f64 = 1e-5;
const BLOCK: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CertifiedLocalMin,
    Refuted,
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Self::CertifiedLocalMin => "certified-local-min",
            Self::Refuted => "refuted",
            Self::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CertifyConfig {
    /// random samples per radius
    pub samples: usize,
    pub r0: f64,
    pub r_min: f64,
    /// never search beyond this radius (sign preservation, segment margins)
    pub radius_cap: Option<f64>,
    pub seed: u64,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self { samples: 20_000, r0: 1e-2, r_min: 1e-7, radius_cap: None, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Counterexample {
    pub params: NetworkParams,
    pub loss: f64,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub loss: f64,
    pub gradient_residual: f64,
    /// radius of the last clean pass, 0 if none
    pub certified_radius: f64,
    pub samples_tested: usize,
    pub samples_requested: usize,
    pub min_loss_delta: f64,
    pub halfspace_min_margin: f64,
    pub hessian_min_eig: Option<f64>,
    pub radius_cap: Option<f64>,
    pub witness_gap: Option<f64>,
    pub baseline_loss: Option<f64>,
    pub verdict: Verdict,
    pub counterexample: Option<Counterexample>,
}

impl Certificate {
    /// Positive evidence that the minimum is not global.
    pub fn suboptimal(&self) -> bool {
        self.witness_gap.is_some_and(|g| g > 0.0) || self.baseline_loss.is_some_and(|b| b < self.loss)
    }
}

/// Raw output of the radius search, before the verdict rules.
#[derive(Clone, Debug, PartialEq)]
pub struct RadiusSearch {
    pub loss: f64,
    pub gradient_residual: f64,
    pub hessian_min_eig: Option<f64>,
    pub radius: Option<f64>,
    pub samples_tested: usize,
    pub min_loss_delta: f64,
    pub halfspace_min_margin: f64,
    pub radius_cap: Option<f64>,
    pub counterexample: Option<Counterexample>,
}

/// Half the smallest positive weight, the radius that keeps positive weights positive.
pub fn sign_preservation_cap(params: &NetworkParams) -> Option<f64> {
    params
        .weights
        .iter()
        .flat_map(|w| w.iter().copied())
        .filter(|&v| v > 0.0)
        .min_by(f64::total_cmp)
        .map(|v| v / 2.0)
}

fn gradient_or_fd(params: &NetworkParams, data: &Dataset, spec: &ActivationSpec) -> Result<NetworkParams> {
    network::gradient(params, data, spec).or_else(|_| network::fd_gradient(params, data, spec, 1e-7))
}

/// Central differences of the analytic gradient, symmetrised.
pub fn fd_hessian(params: &NetworkParams, data: &Dataset, spec: &ActivationSpec) -> Result<DMatrix<f64>> {
    let base = params.flatten();
    let p = base.len();
    let cols: Vec<Vec<f64>> = (0..p)
        .into_par_iter()
        .map(|k| {
            let mut probe = base.clone();
            probe[k] = base[k] + HESSIAN_STEP;
            let up = network::gradient(&params.unflatten_like(&probe)?, data, spec)?.flatten();
            probe[k] = base[k] - HESSIAN_STEP;
            let dn = network::gradient(&params.unflatten_like(&probe)?, data, spec)?.flatten();
            Ok(up.iter().zip(&dn).map(|(a, b)| (a - b) / (2.0 * HESSIAN_STEP)).collect())
        })
        .collect::<Result<_>>()?;
    let h = DMatrix::from_fn(p, p, |i, j| cols[j][i]);
    Ok((&h + h.transpose()) * 0.5)
}

/// Smallest eigenvalue, its unit eigenvector and the spectral norm.
fn min_eigen(h: &DMatrix<f64>) -> (f64, DVector<f64>, f64) {
    let eig = SymmetricEigen::new(h.clone());
    let (k, &lo) = eig.eigenvalues.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty");
    let norm = eig.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    (lo, eig.eigenvectors.column(k).into_owned(), norm)
}

fn scaled_to_unit_inf(v: &[f64]) -> Option<Vec<f64>> {
    let m = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    (m > 0.0 && m.is_finite()).then(|| v.iter().map(|x| x / m).collect())
}

fn frobenius_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Evaluation of one perturbed point.
#[derive(Clone, Copy, Debug)]
struct Probe {
    delta: f64,
    margin: f64,
}

struct Evaluator<'a> {
    base: Vec<f64>,
    params: &'a NetworkParams,
    data: &'a Dataset,
    spec: &'a ActivationSpec,
    loss: f64,
    /// Ŷ − Y
    residual: DMatrix<f64>,
    out: DMatrix<f64>,
}

impl<'a> Evaluator<'a> {
    fn new(params: &'a NetworkParams, data: &'a Dataset, spec: &'a ActivationSpec) -> Result<Self> {
        let out = network::output(params, &data.x, spec)?;
        let residual = &out - &data.y;
        Ok(Self { base: params.flatten(), params, data, spec, loss: residual.norm_squared(), residual, out })
    }

    fn moved(&self, dir: &[f64], r: f64) -> Vec<f64> {
        self.base.iter().zip(dir).map(|(b, d)| b + r * d).collect()
    }

    fn probe(&self, flat: &[f64]) -> Result<Probe> {
        let p = self.params.unflatten_like(flat)?;
        let out = network::output(&p, &self.data.x, self.spec)?;
        let delta = (&out - &self.data.y).norm_squared() - self.loss;
        Ok(Probe { delta, margin: frobenius_inner(&self.residual, &(out - &self.out)) })
    }

    /// K uniform points in the radius-r ∞-ball; returns (min delta, argmin flat, min margin).
    fn sample_ball(&self, k: usize, r: f64, seed: u64, stream: u64) -> Result<(f64, Option<Vec<f64>>, f64)> {
        let blocks = k.div_ceil(BLOCK);
        let per_block: Vec<(f64, Option<Vec<f64>>, f64)> = (0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream((stream << 32) | b as u64);
                let count = BLOCK.min(k - b * BLOCK);
                let mut best = (f64::INFINITY, None, f64::INFINITY);
                for _ in 0..count {
                    let flat: Vec<f64> = self.base.iter().map(|v| v + rng.gen_range(-r..=r)).collect();
                    let pr = self.probe(&flat)?;
                    best.2 = best.2.min(pr.margin);
                    if pr.delta < best.0 {
                        best.0 = pr.delta;
                        best.1 = Some(flat);
                    }
                }
                Ok(best)
            })
            .collect::<Result<_>>()?;
        // block order keeps the argmin independent of scheduling
        Ok(per_block.into_iter().fold((f64::INFINITY, None, f64::INFINITY), |acc, b| {
            let margin = acc.2.min(b.2);
            if b.0 < acc.0 {
                (b.0, b.1, margin)
            } else {
                (acc.0, acc.1, margin)
            }
        }))
    }
}

/// Radius ladder r₀, r₀/10, … down to r_min. A cap below r_min leaves the
/// cap itself as the only level.
fn ladder(cfg: &CertifyConfig) -> Vec<f64> {
    let mut out = Vec::new();
    let mut r = cfg.r0;
    while r >= cfg.r_min * (1.0 - 1e-9) {
        let capped = cfg.radius_cap.map_or(r, |c| r.min(c));
        if capped >= cfg.r_min * (1.0 - 1e-9) && out.last().map_or(true, |&l: &f64| capped < l) {
            out.push(capped);
        }
        r *= 0.1;
    }
    if out.is_empty() {
        out.extend(cfg.radius_cap.filter(|&c| c > 0.0 && c < cfg.r_min));
    }
    out
}

/// Shrinking-radius search for a loss decrease around Θ.
///
/// `witness` is a point known to have lower loss; the direction towards it is
/// always probed.
pub fn certify_local_min(params: &NetworkParams, data: &Dataset, spec: &ActivationSpec, cfg: &CertifyConfig, witness: Option<&NetworkParams>) -> Result<RadiusSearch> {
    if cfg.samples == 0 || !(cfg.r0 > 0.0) || !(cfg.r_min > 0.0) {
        return Err(Error::InvalidInput("need at least one sample and positive radii".into()));
    }
    let ev = Evaluator::new(params, data, spec)?;
    let grad = gradient_or_fd(params, data, spec)?.flatten();
    let gradient_residual = grad.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let p = ev.base.len();

    let curvature = fd_hessian(params, data, spec).ok().map(|h| min_eigen(&h));
    let hessian_min_eig = curvature.as_ref().map(|c| c.0);
    let negative_curvature = curvature.as_ref().filter(|(lo, _, norm)| *lo < -CURVATURE_RTOL * norm.max(1.0)).map(|(_, v, _)| v.clone());

    let mut structured: Vec<Vec<f64>> = Vec::new();
    if let Some(d) = scaled_to_unit_inf(&grad.iter().map(|g| -g).collect::<Vec<_>>()) {
        structured.push(d);
    }
    let out_len = params.weights.last().map_or(0, |w| w.len());
    for j in p - out_len..p {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; p];
            e[j] = s;
            structured.push(e);
        }
    }
    if let Some(w) = witness {
        let diff: Vec<f64> = w.flatten().iter().zip(&ev.base).map(|(a, b)| a - b).collect();
        structured.extend(scaled_to_unit_inf(&diff));
    }
    let eig_dirs: Vec<Vec<f64>> = curvature
        .as_ref()
        .and_then(|(_, v, _)| scaled_to_unit_inf(v.as_slice()))
        .map(|d| vec![d.clone(), d.iter().map(|x| -x).collect()])
        .unwrap_or_default();

    let mut search = RadiusSearch {
        loss: ev.loss,
        gradient_residual,
        hessian_min_eig,
        radius: None,
        samples_tested: 0,
        min_loss_delta: f64::INFINITY,
        halfspace_min_margin: f64::INFINITY,
        radius_cap: cfg.radius_cap,
        counterexample: None,
    };
    let mut last_decrease = None;
    for (level, r) in ladder(cfg).into_iter().enumerate() {
        let mut min_delta = f64::INFINITY;
        let mut argmin: Option<Vec<f64>> = None;
        let mut margin = f64::INFINITY;
        let mut eig_best = f64::INFINITY;
        let mut eig_arg = None;
        for d in structured.iter().chain(&eig_dirs) {
            let flat = ev.moved(d, r);
            let pr = ev.probe(&flat)?;
            margin = margin.min(pr.margin);
            if pr.delta < min_delta {
                min_delta = pr.delta;
                argmin = Some(flat.clone());
            }
            if eig_dirs.contains(d) && pr.delta < eig_best {
                eig_best = pr.delta;
                eig_arg = Some(flat);
            }
        }
        let (d, arg, m) = ev.sample_ball(cfg.samples, r, cfg.seed, level as u64)?;
        margin = margin.min(m);
        if d < min_delta {
            min_delta = d;
            argmin = arg;
        }
        search.samples_tested = cfg.samples + structured.len() + eig_dirs.len();
        search.min_loss_delta = min_delta;
        search.halfspace_min_margin = margin;

        let refute = |flat: Vec<f64>, delta: f64| -> Result<Counterexample> {
            Ok(Counterexample { params: params.unflatten_like(&flat)?, loss: ev.loss + delta, radius: r })
        };
        if negative_curvature.is_some() && eig_best < -REFUTE_TOL {
            search.counterexample = Some(refute(eig_arg.expect("probed"), eig_best)?);
            search.radius = None;
            return Ok(search);
        }
        if gradient_residual >= GRADIENT_TOL && min_delta < -REFUTE_TOL {
            search.counterexample = Some(refute(argmin.expect("probed"), min_delta)?);
            search.radius = None;
            return Ok(search);
        }
        if min_delta >= -DECREASE_TOL {
            search.radius = Some(r);
            return Ok(search);
        }
        if min_delta < -REFUTE_TOL {
            // kept only if the decrease survives down to the smallest radius
            last_decrease = Some(refute(argmin.expect("probed"), min_delta)?);
        } else {
            last_decrease = None;
        }
    }
    search.counterexample = last_decrease;
    Ok(search)
}

/// Minimum of ⟨Ŷ − Y, Ŷ′ − Ŷ⟩_F over K uniform points of the radius-r ∞-ball.
pub fn halfspace_check(params: &NetworkParams, data: &Dataset, spec: &ActivationSpec, samples: usize, r: f64, seed: u64) -> Result<f64> {
    let ev = Evaluator::new(params, data, spec)?;
    Ok(ev.sample_ball(samples, r, seed, u32::MAX as u64)?.2)
}

/// Apply the verdict rules.
pub fn assemble_certificate(search: RadiusSearch, samples_requested: usize, witness_gap: Option<f64>, baseline_loss: Option<f64>) -> Certificate {
    let verdict = match (&search.counterexample, search.radius) {
        (Some(c), _) if c.loss < search.loss - REFUTE_TOL => Verdict::Refuted,
        (_, Some(_))
            if search.gradient_residual < GRADIENT_TOL
                && search.min_loss_delta >= -DECREASE_TOL
                && search.samples_tested >= samples_requested =>
        {
            Verdict::CertifiedLocalMin
        }
        _ => Verdict::Inconclusive,
    };
    Certificate {
        loss: search.loss,
        gradient_residual: search.gradient_residual,
        certified_radius: search.radius.unwrap_or(0.0),
        samples_tested: search.samples_tested,
        samples_requested,
        min_loss_delta: search.min_loss_delta,
        halfspace_min_margin: search.halfspace_min_margin,
        hessian_min_eig: search.hessian_min_eig,
        radius_cap: search.radius_cap,
        witness_gap,
        baseline_loss,
        verdict,
        counterexample: search.counterexample,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub step: f64,
    pub momentum: f64,
    pub steps: usize,
    pub restarts: usize,
    pub init_scale: f64,
    /// stop a run once its loss drops below this
    pub early_stop: Option<f64>,
    /// record the loss every this many steps
    pub trace_every: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self { step: 1e-2, momentum: 0.9, steps: 50_000, restarts: 8, init_scale: 0.5, early_stop: None, trace_every: 1000 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub final_loss: f64,
    pub steps_taken: usize,
    /// (step, loss)
    pub trace: Vec<(usize, f64)>,
    pub params: NetworkParams,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaselineResult {
    pub best_loss: f64,
    pub runs: Vec<RunTrace>,
}

/// Full-batch gradient descent with heavy-ball momentum from `start`.
/// A non-finite loss ends the run with loss +∞.
pub fn gd_momentum(start: NetworkParams, data: &Dataset, spec: &ActivationSpec, cfg: &BaselineConfig) -> Result<RunTrace> {
    let shape = start.clone();
    let mut theta = start.flatten();
    let mut vel = vec![0.0; theta.len()];
    let mut trace = Vec::new();
    let mut loss = network::loss(&start, data, spec)?;
    let mut steps_taken = 0;
    for step in 0..cfg.steps {
        if cfg.trace_every > 0 && step % cfg.trace_every == 0 {
            trace.push((step, loss));
        }
        if !loss.is_finite() {
            loss = f64::INFINITY;
            break;
        }
        if cfg.early_stop.is_some_and(|t| loss < t) {
            break;
        }
        let p = shape.unflatten_like(&theta)?;
        let g = gradient_or_fd(&p, data, spec)?.flatten();
        for ((t, v), gi) in theta.iter_mut().zip(vel.iter_mut()).zip(&g) {
            *v = cfg.momentum * *v - cfg.step * gi;
            *t += *v;
        }
        loss = network::loss(&shape.unflatten_like(&theta)?, data, spec)?;
        steps_taken = step + 1;
    }
    if !loss.is_finite() {
        loss = f64::INFINITY;
    }
    trace.push((steps_taken, loss));
    Ok(RunTrace { final_loss: loss, steps_taken, trace, params: shape.unflatten_like(&theta)? })
}

/// Best loss over R independent trainings from N(0, scale²) initialisations.
pub fn train_baseline(arch: &Architecture, data: &Dataset, spec: &ActivationSpec, cfg: &BaselineConfig, seed: u64) -> Result<BaselineResult> {
    arch.validate()?;
    let runs: Vec<RunTrace> = (0..cfg.restarts)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let mut init = NetworkParams::zeros(arch);
            for w in &mut init.weights {
                *w = standard_normal(w.nrows(), w.ncols(), &mut rng) * cfg.init_scale;
            }
            for b in &mut init.biases {
                *b = standard_normal(b.len(), 1, &mut rng).column(0) * cfg.init_scale;
            }
            gd_momentum(init, data, spec, cfg)
        })
        .collect::<Result<_>>()?;
    let best_loss = runs.iter().map(|r| r.final_loss).fold(f64::INFINITY, f64::min);
    Ok(BaselineResult { best_loss, runs })
}
