//! Activations with an affine segment (ReLU family): every pre-activation sits
//! inside the segment, so the hidden layers act linearly and the best the
//! output layer can do is project Y onto row([X; 𝟙ᵀ]).

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

use crate::activations::ActivationSpec;
use crate::dualspace;
use crate::error::{Error, Result};
use crate::network::{self, Architecture, Dataset, NetworkParams};

const SEGMENT_RETRIES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// slope 0: hidden layers output a constant
    Degenerate,
    Nondegenerate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assumption3Report {
    pub linear_segment: bool,
    /// hidden layers whose width does not exceed d₀
    pub narrow_layers: Vec<usize>,
    /// rank([X; 𝟙ᵀ; Y])
    pub rank_with_targets: usize,
    /// rank([X; 𝟙ᵀ])
    pub rank_inputs: usize,
}

impl Assumption3Report {
    pub fn ok(&self) -> bool {
        self.linear_segment && self.narrow_layers.is_empty() && self.rank_with_targets > self.rank_inputs
    }

    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        if !self.linear_segment {
            parts.push("activation spec has no affine segment".to_string());
        }
        if !self.narrow_layers.is_empty() {
            parts.push(format!("hidden layers {:?} are not wider than the input", self.narrow_layers));
        }
        if self.rank_with_targets <= self.rank_inputs {
            parts.push(format!("Y lies in row([X; 1]) (rank {} vs {})", self.rank_with_targets, self.rank_inputs));
        }
        if parts.is_empty() {
            "ok".into()
        } else {
            parts.join("; ")
        }
    }
}

pub fn check_assumption3(x: &DMatrix<f64>, y: &DMatrix<f64>, arch: &Architecture, spec: &ActivationSpec) -> Assumption3Report {
    let xi = dualspace::with_ones_row(x);
    let stacked = DMatrix::from_fn(xi.nrows() + y.nrows(), xi.ncols().min(y.ncols()), |r, c| if r < xi.nrows() { xi[(r, c)] } else { y[(r - xi.nrows(), c)] });
    Assumption3Report {
        linear_segment: spec.is_piecewise() && spec.validate().is_ok(),
        narrow_layers: arch.hidden.iter().enumerate().filter(|(_, &d)| d <= x.nrows()).map(|(h, _)| h + 1).collect(),
        rank_with_targets: dualspace::numerical_rank(&stacked),
        rank_inputs: dualspace::numerical_rank(&xi),
    }
}

#[derive(Clone, Debug)]
pub struct PiecewiseConstruction {
    pub spec: ActivationSpec,
    pub params: NetworkParams,
    pub dataset: Dataset,
    pub branch: Branch,
    pub loss_at_theta: f64,
    /// (rank([X; 𝟙ᵀ; Y]), rank([X; 𝟙ᵀ]))
    pub rank_witness: (usize, usize),
    /// ‖Y − proj‖² onto the row space the hidden layers can reach
    pub projection_residual: f64,
    pub segment_margin: f64,
}

fn slope_offset(spec: &ActivationSpec) -> Result<(f64, f64)> {
    match (spec.linear_slope, spec.linear_offset) {
        (Some(s), Some(o)) => Ok((s, o)),
        _ => Err(Error::NoLinearSegment(spec.kind)),
    }
}

/// Distance from the nearest hidden pre-activation to a segment endpoint.
pub fn segment_margin(params: &NetworkParams, x: &DMatrix<f64>, spec: &ActivationSpec) -> Result<f64> {
    let trace = network::forward(params, x, spec)?;
    Ok(trace
        .pre
        .iter()
        .flat_map(|z| z.iter().map(|v| spec.delta - (v - spec.anchor).abs()))
        .fold(f64::INFINITY, f64::min))
}

/// Largest ∞-ball radius over all parameters for which a worst-case bound
/// keeps every hidden pre-activation inside the segment.
///
/// Propagates e_h ≥ max |ΔZ_h| through
/// e_h ≤ r(d_{h−1}(t_{h−1} + |s|e_{h−1}) + 1) + ‖W_h‖_∞|s|e_{h−1},
/// and never exceeds margin / (1 + max_h ‖W_h‖₂).
pub fn segment_radius_cap(params: &NetworkParams, x: &DMatrix<f64>, spec: &ActivationSpec) -> Result<f64> {
    let (slope, _) = slope_offset(spec)?;
    let margin = segment_margin(params, x, spec)?;
    if margin <= 0.0 {
        return Ok(0.0);
    }
    let trace = network::forward(params, x, spec)?;
    let h = params.depth();
    let inputs: Vec<&DMatrix<f64>> = std::iter::once(x).chain(trace.post.iter().take(h - 1)).collect();
    let worst = |r: f64| {
        let mut e_prev = 0.0_f64;
        let mut worst = 0.0_f64;
        for l in 0..h {
            let w = &params.weights[l];
            let t_max = inputs[l].amax();
            let row_sum = w.row_iter().map(|row| row.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
            let d_in = w.ncols() as f64;
            let dz = r * (d_in * (t_max + slope.abs() * e_prev) + 1.0) + row_sum * slope.abs() * e_prev;
            worst = worst.max(dz);
            e_prev = dz;
        }
        worst
    };
    let op = params.weights.iter().map(|w| w.clone().svd(false, false).singular_values.max()).fold(0.0, f64::max);
    let (mut lo, mut hi) = (0.0, margin / (1.0 + op));
    if worst(hi) < margin {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if worst(mid) < margin {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Build the trapped point for data (X, Y).
pub fn forge_theorem2<R: Rng + ?Sized>(x: &DMatrix<f64>, y: &DMatrix<f64>, arch: &Architecture, spec: &ActivationSpec, rng: &mut R) -> Result<PiecewiseConstruction> {
    arch.validate()?;
    if x.nrows() != arch.input_dim || y.nrows() != arch.output_dim || x.ncols() != y.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "X is {}x{}, Y is {}x{}, architecture is {:?}",
            x.nrows(),
            x.ncols(),
            y.nrows(),
            y.ncols(),
            arch.dims()
        )));
    }
    let report = check_assumption3(x, y, arch, spec);
    if !report.ok() {
        return Err(Error::Assumption3Failed(report.describe()));
    }
    let (slope, offset) = slope_offset(spec)?;
    let dataset = Dataset::new(x.clone(), y.clone())?;
    let n = x.ncols();
    let h = arch.depth();
    let dims = arch.dims();

    let (branch, mut params) = if slope == 0.0 {
        let mut p = NetworkParams::zeros(arch);
        for b in &mut p.biases {
            b.fill(spec.anchor);
        }
        (Branch::Degenerate, p)
    } else {
        let mut attempt = 0;
        loop {
            attempt += 1;
            let shrink = 0.5_f64.powi(attempt as i32 - 1);
            let p = nondegenerate_hidden(x, &dims, spec, slope, offset, shrink, rng)?;
            if segment_margin(&p, x, spec)? > 0.0 {
                break (Branch::Nondegenerate, p);
            }
            if attempt >= SEGMENT_RETRIES {
                return Err(Error::SegmentEscape);
            }
        }
    };

    let trace = network::forward(&params, x, spec)?;
    let t_h = &trace.post[h - 1];
    if branch == Branch::Nondegenerate {
        let target = dualspace::numerical_rank(&dualspace::with_ones_row(x));
        for t in &trace.post {
            if dualspace::numerical_rank(&dualspace::with_ones_row(t)) != target {
                return Err(Error::RankRepairFailed);
            }
        }
    }
    params.weights[h] = dualspace::least_squares(t_h, y)?;
    let loss_at_theta = network::loss(&params, &dataset, spec)?;
    let reach = match branch {
        Branch::Nondegenerate => dualspace::with_ones_row(x),
        Branch::Degenerate => DMatrix::from_element(1, n, offset),
    };
    let projection_residual = dualspace::projection_residual(&reach, y)?;
    let segment_margin = segment_margin(&params, x, spec)?;
    Ok(PiecewiseConstruction {
        spec: spec.clone(),
        params,
        dataset,
        branch,
        loss_at_theta,
        rank_witness: (report.rank_with_targets, report.rank_inputs),
        projection_residual,
        segment_margin,
    })
}

/// Hidden layers with pre-activations a𝟙𝟙ᵀ + V_hT_{h−1} + u_h𝟙ᵀ, where
/// [V_h, u_h] keeps row([T_h; 𝟙ᵀ]) = row([X; 𝟙ᵀ]).
fn nondegenerate_hidden<R: Rng + ?Sized>(x: &DMatrix<f64>, dims: &[usize], spec: &ActivationSpec, slope: f64, offset: f64, shrink: f64, rng: &mut R) -> Result<NetworkParams> {
    let h = dims.len() - 2;
    let mut weights = Vec::with_capacity(h + 1);
    let mut biases = Vec::with_capacity(h);
    let mut t = x.clone();
    for l in 0..h {
        let (d_out, d_in) = (dims[l + 1], dims[l]);
        let b = dualspace::with_ones_row(&t) * slope;
        // σ(Z) = slope·(C + A)·[T; 𝟙ᵀ] with A = [0 | (offset/slope)𝟙]
        let a = DMatrix::from_fn(d_out, d_in + 1, |_, c| if c == d_in { offset / slope } else { 0.0 });
        // |(VT + u𝟙ᵀ)_jk| ≤ ‖[V_j, u_j]‖·‖[T_k; 1]‖, so this Frobenius budget
        // keeps every pre-activation strictly inside the segment
        let widest = b.column_iter().map(|c| c.norm()).fold(0.0, f64::max) / slope.abs();
        let frob = shrink * spec.delta / widest.max(1.0);
        // entries up to frob/√(L₁L₂) still give ‖C‖_F < frob
        let eps = frob * ((d_out * (d_in + 1)) as f64).sqrt();
        let mut c = dualspace::rowspace_preserving_perturb(&a, &b, eps, rng)?;
        // The budget is worst case and leaves T_h nearly rank deficient, which
        // inflates W_{H+1} and with it the rounding in the gradient. Stretch C
        // until the pre-activations span half the segment.
        let reach = (&c * dualspace::with_ones_row(&t)).amax();
        if reach > 0.0 {
            c *= (0.5 * shrink * spec.delta / reach).max(1.0);
        }
        let w = c.columns(0, d_in).into_owned();
        let u = c.column(d_in).into_owned();
        let bias = u.map(|v| v + spec.anchor);
        t = &w * &t;
        for mut col in t.column_iter_mut() {
            col += &bias;
        }
        t.apply(|v| *v = spec.eval(*v));
        weights.push(w);
        biases.push(bias);
    }
    weights.push(DMatrix::zeros(dims[h + 1], dims[h]));
    Ok(NetworkParams { weights, biases })
}
