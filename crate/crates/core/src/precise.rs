//! Extended-precision forward pass.
//!
//! Loss gaps at deep constructions can sit twenty orders of magnitude below
//! the loss itself, far beneath f64 resolution. This evaluator takes the same
//! f64 parameters and data but carries every intermediate value with
//! [`PRECISION_BITS`] bits, so differences like E(Θ) − E(Θ*) come out with
//! full relative accuracy.

use astro_float::{BigFloat, Consts, RoundingMode};
use nalgebra::DMatrix;

use crate::activations::{ActivationKind, ActivationSpec, LEAKY_SLOPE, SELU_ALPHA, SELU_LAMBDA};
use crate::error::{Error, Result};
use crate::network::NetworkParams;

pub const PRECISION_BITS: usize = 320;
const RM: RoundingMode = RoundingMode::ToEven;

/// Arithmetic context: precision plus the constant cache astro-float needs.
pub struct Ctx {
    p: usize,
    cc: Consts,
}

impl Ctx {
    pub fn new() -> Self {
        Self { p: PRECISION_BITS, cc: Consts::new().expect("astro-float constant cache") }
    }

    pub fn num(&self, v: f64) -> BigFloat {
        BigFloat::from_f64(v, self.p)
    }

    pub fn zero(&self) -> BigFloat {
        self.num(0.0)
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.p, RM)
    }

    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.p, RM)
    }

    pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.p, RM)
    }

    pub fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.p, RM)
    }

    pub fn exp(&mut self, a: &BigFloat) -> BigFloat {
        a.exp(self.p, RM, &mut self.cc)
    }

    pub fn ln(&mut self, a: &BigFloat) -> BigFloat {
        a.ln(self.p, RM, &mut self.cc)
    }

    pub fn sigmoid(&mut self, t: &BigFloat) -> BigFloat {
        let one = self.num(1.0);
        let e = self.exp(&t.neg());
        self.div(&one, &self.add(&one, &e))
    }

    pub fn activation(&mut self, kind: ActivationKind, t: &BigFloat) -> BigFloat {
        use ActivationKind::*;
        let one = self.num(1.0);
        let positive = t.is_positive() && !t.is_zero();
        match kind {
            Sigmoid => self.sigmoid(t),
            Tanh => {
                let e = self.exp(&self.add(t, t));
                self.div(&self.sub(&e, &one), &self.add(&e, &one))
            }
            Softplus => {
                let e = self.exp(t);
                self.ln(&self.add(&one, &e))
            }
            Swish => {
                let s = self.sigmoid(t);
                self.mul(t, &s)
            }
            Elu if positive => t.clone(),
            Elu => {
                let e = self.exp(t);
                self.sub(&e, &one)
            }
            Selu if positive => self.mul(&self.num(SELU_LAMBDA), t),
            Selu => {
                let e = self.exp(t);
                let c = self.mul(&self.num(SELU_LAMBDA), &self.num(SELU_ALPHA));
                self.mul(&c, &self.sub(&e, &one))
            }
            Relu if positive => t.clone(),
            Relu => self.zero(),
            LeakyRelu if positive => t.clone(),
            LeakyRelu => self.mul(&self.num(LEAKY_SLOPE), t),
            Linear => t.clone(),
        }
    }

    /// Round to the nearest f64.
    pub fn to_f64(&self, v: &BigFloat) -> f64 {
        if v.is_zero() {
            return 0.0;
        }
        v.to_string().parse().unwrap_or(f64::NAN)
    }
}

impl Default for Ctx {
    fn default() -> Self {
        Self::new()
    }
}

/// Dense row-major matrix of extended-precision numbers.
#[derive(Clone, Debug)]
pub struct HpMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<BigFloat>,
}

impl HpMatrix {
    pub fn from_f64(ctx: &Ctx, m: &DMatrix<f64>) -> Self {
        let data = (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| (i, j))).map(|(i, j)| ctx.num(m[(i, j)])).collect();
        Self { rows: m.nrows(), cols: m.ncols(), data }
    }

    pub fn get(&self, i: usize, j: usize) -> &BigFloat {
        &self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[BigFloat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_f64(&self, ctx: &Ctx) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| ctx.to_f64(self.get(i, j)))
    }

    pub fn sub(&self, ctx: &Ctx, other: &Self) -> Self {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| ctx.sub(a, b)).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn norm_squared(&self, ctx: &Ctx) -> BigFloat {
        dot(ctx, &self.data, &self.data)
    }
}

pub fn dot(ctx: &Ctx, a: &[BigFloat], b: &[BigFloat]) -> BigFloat {
    a.iter().zip(b).fold(ctx.zero(), |acc, (x, y)| ctx.add(&acc, &ctx.mul(x, y)))
}

/// W·T (+ b) with f64 parameters and an extended-precision input.
fn layer(ctx: &Ctx, w: &DMatrix<f64>, b: Option<&[f64]>, t: &HpMatrix) -> HpMatrix {
    let wb: Vec<BigFloat> = w.iter().map(|v| ctx.num(*v)).collect(); // column-major
    let mut data = Vec::with_capacity(w.nrows() * t.cols);
    for i in 0..w.nrows() {
        for n in 0..t.cols {
            let mut acc = b.map_or_else(|| ctx.zero(), |b| ctx.num(b[i]));
            for j in 0..w.ncols() {
                acc = ctx.add(&acc, &ctx.mul(&wb[j * w.nrows() + i], t.get(j, n)));
            }
            data.push(acc);
        }
    }
    HpMatrix { rows: w.nrows(), cols: t.cols, data }
}

pub struct HpTrace {
    /// T_h for h = 1..H
    pub post: Vec<HpMatrix>,
    pub output: HpMatrix,
}

pub fn forward(ctx: &mut Ctx, params: &NetworkParams, x: &DMatrix<f64>, spec: &ActivationSpec) -> Result<HpTrace> {
    let arch = params.architecture()?;
    if x.nrows() != arch.input_dim {
        return Err(Error::ShapeMismatch(format!("X has {} rows, network expects {}", x.nrows(), arch.input_dim)));
    }
    let mut t = HpMatrix::from_f64(ctx, x);
    let mut post = Vec::with_capacity(params.depth());
    for (w, b) in params.weights.iter().zip(&params.biases) {
        let mut z = layer(ctx, w, Some(b.as_slice()), &t);
        for v in z.data.iter_mut() {
            *v = ctx.activation(spec.kind, v);
        }
        post.push(z.clone());
        t = z;
    }
    let output = layer(ctx, params.weights.last().expect("output layer"), None, &t);
    Ok(HpTrace { post, output })
}

/// Extended-precision loss ‖Y − T_{H+1}‖²_F.
pub fn loss(ctx: &mut Ctx, params: &NetworkParams, x: &DMatrix<f64>, y: &DMatrix<f64>, spec: &ActivationSpec) -> Result<BigFloat> {
    let out = forward(ctx, params, x, spec)?.output;
    if out.rows != y.nrows() || out.cols != y.ncols() {
        return Err(Error::ShapeMismatch("Y does not match the network output".into()));
    }
    let yh = HpMatrix::from_f64(ctx, y);
    Ok(out.sub(ctx, &yh).norm_squared(ctx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activations::select_anchor;
    use crate::network::{self, Architecture, Dataset};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn agrees_with_f64_forward() {
        let mut ctx = Ctx::new();
        for kind in [ActivationKind::Sigmoid, ActivationKind::Tanh, ActivationKind::Softplus, ActivationKind::Swish, ActivationKind::Elu, ActivationKind::Relu] {
            let spec = ActivationSpec::new(kind, 0.5, 0.5);
            let arch = Architecture::new(2, vec![3, 2], 2).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            let p = NetworkParams::zeros(&arch);
            let flat: Vec<f64> = (0..p.num_params()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let p = p.unflatten_like(&flat).unwrap();
            let x = DMatrix::from_fn(2, 4, |_, _| rng.gen_range(-2.0..2.0));
            let y = DMatrix::from_fn(2, 4, |_, _| rng.gen_range(-2.0..2.0));
            let lo = network::loss(&p, &Dataset::new(x.clone(), y.clone()).unwrap(), &spec).unwrap();
            let hi = loss(&mut ctx, &p, &x, &y, &spec).unwrap();
            assert!((ctx.to_f64(&hi) - lo).abs() < 1e-13 * lo.max(1.0), "{kind}");
        }
    }

    #[test]
    fn resolves_differences_below_f64_resolution() {
        let mut ctx = Ctx::new();
        let a = ctx.num(1.0);
        let b = ctx.add(&a, &ctx.num(1e-30));
        assert!((ctx.to_f64(&ctx.sub(&b, &a)) - 1e-30).abs() < 1e-45);
        let spec = select_anchor(ActivationKind::Softplus).unwrap();
        let s = ctx.activation(spec.kind, &ctx.num(0.0));
        assert!((ctx.to_f64(&s) - std::f64::consts::LN_2).abs() < 1e-16);
    }
}
