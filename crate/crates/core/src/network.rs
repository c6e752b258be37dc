//! Fully connected network: forward pass, squared Frobenius loss, gradients.
//!
//! Samples are columns. Hidden layer h computes T_h = σ(W_h T_{h−1} + b_h 𝟙ᵀ);
//! the output layer is linear and bias-free.

use nalgebra::{DMatrix, DVector};

use crate::activations::ActivationSpec;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Architecture {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub output_dim: usize,
}

impl Architecture {
    pub fn new(input_dim: usize, hidden: Vec<usize>, output_dim: usize) -> Result<Self> {
        let arch = Self { input_dim, hidden, output_dim };
        arch.validate()?;
        Ok(arch)
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden.is_empty() {
            return Err(Error::ShapeMismatch("need at least one hidden layer".into()));
        }
        if self.input_dim == 0 || self.output_dim == 0 || self.hidden.contains(&0) {
            return Err(Error::ShapeMismatch("all dimensions must be positive".into()));
        }
        Ok(())
    }

    /// Number of hidden layers H.
    pub fn depth(&self) -> usize {
        self.hidden.len()
    }

    /// [d0, d1, …, dH, d_out]
    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(self.input_dim)
            .chain(self.hidden.iter().copied())
            .chain(std::iter::once(self.output_dim))
            .collect()
    }

    pub fn from_dims(dims: &[usize]) -> Result<Self> {
        if dims.len() < 3 {
            return Err(Error::ShapeMismatch(format!("arch needs at least 3 entries, got {}", dims.len())));
        }
        Self::new(dims[0], dims[1..dims.len() - 1].to_vec(), dims[dims.len() - 1])
    }

    pub fn num_params(&self) -> usize {
        let d = self.dims();
        let h = self.depth();
        (1..=h).map(|l| d[l] * d[l - 1] + d[l]).sum::<usize>() + d[h + 1] * d[h]
    }
}

/// Θ = (W₁, b₁, …, W_H, b_H, W_{H+1}).
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkParams {
    pub weights: Vec<DMatrix<f64>>,
    pub biases: Vec<DVector<f64>>,
}

impl NetworkParams {
    pub fn zeros(arch: &Architecture) -> Self {
        let d = arch.dims();
        let h = arch.depth();
        Self {
            weights: (1..=h + 1).map(|l| DMatrix::zeros(d[l], d[l - 1])).collect(),
            biases: (1..=h).map(|l| DVector::zeros(d[l])).collect(),
        }
    }

    pub fn architecture(&self) -> Result<Architecture> {
        if self.weights.len() < 2 || self.biases.len() + 1 != self.weights.len() {
            return Err(Error::ShapeMismatch("need H+1 weight matrices and H bias vectors".into()));
        }
        let mut dims = vec![self.weights[0].ncols()];
        for (l, w) in self.weights.iter().enumerate() {
            if w.ncols() != dims[l] {
                return Err(Error::ShapeMismatch(format!("layer {} expects {} inputs, got {}", l + 1, dims[l], w.ncols())));
            }
            if let Some(b) = self.biases.get(l) {
                if b.len() != w.nrows() {
                    return Err(Error::ShapeMismatch(format!("bias {} has length {}, expected {}", l + 1, b.len(), w.nrows())));
                }
            }
            dims.push(w.nrows());
        }
        Architecture::from_dims(&dims)
    }

    pub fn depth(&self) -> usize {
        self.biases.len()
    }

    pub fn num_params(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>() + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    /// Flat vector: for each hidden layer W_h (row-major) then b_h, finally W_{H+1} (row-major).
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for (l, w) in self.weights.iter().enumerate() {
            for i in 0..w.nrows() {
                out.extend(w.row(i).iter());
            }
            if let Some(b) = self.biases.get(l) {
                out.extend(b.iter());
            }
        }
        out
    }

    /// Inverse of [`flatten`](Self::flatten), using `self` only for shapes.
    pub fn unflatten_like(&self, flat: &[f64]) -> Result<Self> {
        if flat.len() != self.num_params() {
            return Err(Error::ShapeMismatch(format!("expected {} parameters, got {}", self.num_params(), flat.len())));
        }
        let mut out = self.clone();
        let mut it = flat.iter().copied();
        for l in 0..out.weights.len() {
            let w = &mut out.weights[l];
            for i in 0..w.nrows() {
                for j in 0..w.ncols() {
                    w[(i, j)] = it.next().unwrap();
                }
            }
            if let Some(b) = out.biases.get_mut(l) {
                b.iter_mut().for_each(|v| *v = it.next().unwrap());
            }
        }
        Ok(out)
    }

    /// `self + s·other`, shapes assumed equal.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        Self {
            weights: self.weights.iter().zip(&other.weights).map(|(a, b)| a + b * s).collect(),
            biases: self.biases.iter().zip(&other.biases).map(|(a, b)| a + b * s).collect(),
        }
    }

    pub fn inf_norm(&self) -> f64 {
        self.flatten().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.flatten().iter().all(|v| v.is_finite())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: DMatrix<f64>) -> Result<Self> {
        if x.ncols() != y.ncols() {
            return Err(Error::ShapeMismatch(format!("X has {} samples, Y has {}", x.ncols(), y.ncols())));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("dataset has non-finite entries".into()));
        }
        Ok(Self { x, y })
    }

    pub fn n(&self) -> usize {
        self.x.ncols()
    }
}

#[derive(Clone, Debug)]
pub struct ForwardTrace {
    /// Z_h for h = 1..H
    pub pre: Vec<DMatrix<f64>>,
    /// T_h for h = 1..H
    pub post: Vec<DMatrix<f64>>,
    /// T_{H+1}
    pub output: DMatrix<f64>,
    /// (min, max) pre-activation per hidden layer
    pub pre_range: Vec<(f64, f64)>,
}

fn check_input(params: &NetworkParams, x: &DMatrix<f64>) -> Result<Architecture> {
    let arch = params.architecture()?;
    if x.nrows() != arch.input_dim {
        return Err(Error::ShapeMismatch(format!("X has {} rows, network expects {}", x.nrows(), arch.input_dim)));
    }
    Ok(arch)
}

fn affine(w: &DMatrix<f64>, b: &DVector<f64>, t: &DMatrix<f64>) -> DMatrix<f64> {
    let mut z = w * t;
    for mut col in z.column_iter_mut() {
        col += b;
    }
    z
}

pub fn forward(params: &NetworkParams, x: &DMatrix<f64>, spec: &ActivationSpec) -> Result<ForwardTrace> {
    check_input(params, x)?;
    let h = params.depth();
    let mut pre = Vec::with_capacity(h);
    let mut post: Vec<DMatrix<f64>> = Vec::with_capacity(h);
    let mut pre_range = Vec::with_capacity(h);
    for l in 0..h {
        let input = if l == 0 { x } else { &post[l - 1] };
        let z = affine(&params.weights[l], &params.biases[l], input);
        pre_range.push((z.min(), z.max()));
        post.push(z.map(|v| spec.eval(v)));
        pre.push(z);
    }
    let output = &params.weights[h] * &post[h - 1];
    Ok(ForwardTrace { pre, post, output, pre_range })
}

/// Network output T_{H+1} without keeping the trace.
pub fn output(params: &NetworkParams, x: &DMatrix<f64>, spec: &ActivationSpec) -> Result<DMatrix<f64>> {
    check_input(params, x)?;
    let h = params.depth();
    let mut t = x.clone();
    for l in 0..h {
        t = affine(&params.weights[l], &params.biases[l], &t);
        t.apply(|v| *v = spec.eval(*v));
    }
    Ok(&params.weights[h] * t)
}

fn check_targets(params: &NetworkParams, data: &Dataset) -> Result<()> {
    let out_dim = params.weights.last().map_or(0, |w| w.nrows());
    if data.y.nrows() != out_dim || data.y.ncols() != data.x.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "Y is {}x{}, expected {}x{}",
            data.y.nrows(),
            data.y.ncols(),
            out_dim,
            data.x.ncols()
        )));
    }
    Ok(())
}

/// E(Θ) = ‖Y − T_{H+1}(Θ)‖²_F.
pub fn loss(params: &NetworkParams, data: &Dataset, spec: &ActivationSpec) -> Result<f64> {
    check_targets(params, data)?;
    let out = output(params, &data.x, spec)?;
    Ok((out - &data.y).norm_squared())
}

/// Exact reverse-mode gradient of the loss.
pub fn gradient(params: &NetworkParams, data: &Dataset, spec: &ActivationSpec) -> Result<NetworkParams> {
    check_targets(params, data)?;
    let trace = forward(params, &data.x, spec)?;
    let h = params.depth();
    let mut grad = NetworkParams { weights: vec![DMatrix::zeros(0, 0); h + 1], biases: vec![DVector::zeros(0); h] };
    let r = (&trace.output - &data.y) * 2.0;
    grad.weights[h] = &r * trace.post[h - 1].transpose();
    let mut back = params.weights[h].transpose() * r;
    for l in (0..h).rev() {
        let mut delta = back;
        for (d, &z) in delta.iter_mut().zip(trace.pre[l].iter()) {
            *d *= spec.deriv(z)?;
        }
        let input = if l == 0 { &data.x } else { &trace.post[l - 1] };
        grad.weights[l] = &delta * input.transpose();
        grad.biases[l] = delta.column_sum();
        back = params.weights[l].transpose() * delta;
    }
    Ok(grad)
}

/// Central-difference gradient, one parameter at a time.
pub fn fd_gradient(params: &NetworkParams, data: &Dataset, spec: &ActivationSpec, step: f64) -> Result<NetworkParams> {
    if !(step > 0.0) {
        return Err(Error::InvalidInput("finite-difference step must be positive".into()));
    }
    let base = params.flatten();
    let mut probe = base.clone();
    let mut g = Vec::with_capacity(base.len());
    for k in 0..base.len() {
        probe[k] = base[k] + step;
        let up = loss(&params.unflatten_like(&probe)?, data, spec)?;
        probe[k] = base[k] - step;
        let down = loss(&params.unflatten_like(&probe)?, data, spec)?;
        probe[k] = base[k];
        g.push((up - down) / (2.0 * step));
    }
    params.unflatten_like(&g)
}
