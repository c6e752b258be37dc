//! Deep networks with a smooth activation: a constant-output stationary point
//! that is a local minimum with strictly positive loss, plus an explicit
//! parameter point with lower loss.

use astro_float::BigFloat;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::activations::ActivationSpec;
use crate::dualspace::{self, DualBasis};
use crate::error::{Error, Result};
use crate::network::{self, Architecture, Dataset, NetworkParams};
use crate::precise::{self, Ctx, HpMatrix};

const WITNESS_EPS_START: f64 = 1e-2;
const WITNESS_EPS_MIN: f64 = 1e-8;
/// Random positive fallback directions tried after the all-ones direction.
const WITNESS_RANDOM_DIRECTIONS: usize = 8;

/// Weight-magnitude bounds that keep the constructed point a local minimum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma2Constants {
    /// M_{i,k} = σ″(a)/4 · ⟨ΔY_i, X_k∘X_k⟩
    pub m: Vec<Vec<f64>>,
    /// min_{i,k} M_{i,k}·σ′(a)^{H−1}
    pub m_min: f64,
    /// L_i = min_k |M_{i,k}| / ‖X_k‖²
    pub l_floor: Vec<f64>,
    /// C⁽ʰ⁾ = (max |σ′| on [a − δ, a + δ])², h = 1..H
    pub lipschitz: Vec<f64>,
    /// γ⁽ʰ⁾, h = 1..H
    pub gamma: Vec<f64>,
    /// w_max⁽ʰ⁾, h = 2..H
    pub w_max: Vec<f64>,
}

/// Zero and sign conditions the residual ΔY must satisfy.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputConditions {
    /// max |⟨ΔY_i, v⟩| / (‖ΔY_i‖‖v‖) over 𝟙, rows of X and cross products
    pub orthogonality: f64,
    /// min s·⟨ΔY_i, X_k∘X_k⟩ / (‖ΔY_i‖‖X_k∘X_k‖)
    pub positivity: f64,
}

impl OutputConditions {
    pub fn hold(&self) -> bool {
        self.orthogonality <= 1e-10 && self.positivity >= 1e-8
    }
}

/// The lower-loss parameter point.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub params: NetworkParams,
    /// The shared first-column output weight.
    pub v: f64,
    /// Size of the first-layer nudge that satisfied the sign precondition.
    pub epsilon: f64,
    /// 0 for the all-ones direction, k ≥ 1 for the k-th random fallback.
    pub direction: usize,
    /// Sign factor σ′(a)^{H−h} at h = H, always 1; recorded for reports.
    pub sign_factor: f64,
    /// S = Σ_i ⟨ΔY_i, m⟩
    pub s: f64,
    /// ‖m‖²
    pub m_norm_sq: f64,
    /// S² / (d_out‖m‖²)
    pub gap_analytic: f64,
    /// E(Θ) − E(Θ*) from two extended-precision forward passes
    pub gap_direct: f64,
    pub loss_at_witness: f64,
}

impl Witness {
    pub fn relative_gap_error(&self) -> f64 {
        (self.gap_direct - self.gap_analytic).abs() / self.gap_analytic.abs()
    }
}

#[derive(Clone, Debug)]
pub struct SmoothConstruction {
    pub spec: ActivationSpec,
    pub arch: Architecture,
    pub params: NetworkParams,
    pub dataset: Dataset,
    /// σ(a)·𝟙 − Y
    pub delta_y: DMatrix<f64>,
    pub dual: DualBasis,
    pub alphas: DMatrix<f64>,
    pub conditions: OutputConditions,
    pub constants: Lemma2Constants,
    pub witness: Witness,
    pub loss_at_theta: f64,
}

/// s = sign(σ′(a)^{H−1}·σ″(a))
pub fn residual_sign(spec: &ActivationSpec, depth: usize) -> Result<f64> {
    let d = spec.eval_with_derivs(spec.anchor)?;
    Ok((d.d1.powi(depth as i32 - 1) * d.d2).signum())
}

fn check_smooth(spec: &ActivationSpec) -> Result<()> {
    if spec.is_piecewise() {
        return Err(Error::InvalidActivation("the smooth forge needs a smooth anchor, not a linear segment".into()));
    }
    spec.validate()
}

/// Θ: W₁ = 0, b₁ = a𝟙, positive capped weights in layers 2..H with biases
/// pinning every pre-activation to a, and W_{H+1} = 𝟙/d_H.
pub fn construct_weights<R: Rng + ?Sized>(arch: &Architecture, spec: &ActivationSpec, constants: &Lemma2Constants, rng: &mut R) -> Result<NetworkParams> {
    check_smooth(spec)?;
    let h = arch.depth();
    let d_h = arch.hidden[h - 1];
    if d_h < 2 {
        return Err(Error::WidthTooSmall(d_h));
    }
    if constants.w_max.len() + 1 != h {
        return Err(Error::InvalidInput(format!("expected {} weight caps, got {}", h - 1, constants.w_max.len())));
    }
    let a = spec.anchor;
    let mut p = NetworkParams::zeros(arch);
    p.biases[0].fill(a);
    let mut ctx = Ctx::new();
    let a_hp = ctx.num(a);
    let sa = ctx.activation(spec.kind, &a_hp);
    let mut t = vec![sa; arch.hidden[0]];
    for l in 1..h {
        let cap = constants.w_max[l - 1];
        let w = &mut p.weights[l];
        // (cap/2, cap]
        w.iter_mut().for_each(|v| *v = cap - rng.gen::<f64>() * cap / 2.0);
        let mut next = Vec::with_capacity(w.nrows());
        for i in 0..w.nrows() {
            let mut row: Vec<f64> = w.row(i).iter().copied().collect();
            let (b, z) = pin_neuron(&ctx, &mut row, &t, &a_hp);
            w.row_mut(i).iter_mut().zip(&row).for_each(|(dst, v)| *dst = *v);
            p.biases[l][i] = b;
            next.push(ctx.activation(spec.kind, &z));
        }
        t = next;
    }
    p.weights[h].fill(1.0 / d_h as f64);
    Ok(p)
}

/// Choose b = a − Σ w_j t_j and then nudge the last (tiny) weight so the
/// pre-activation equals a far beyond f64 resolution of b. Returns the bias
/// and the extended-precision pre-activation.
fn pin_neuron(ctx: &Ctx, w: &mut [f64], t: &[BigFloat], a: &BigFloat) -> (f64, BigFloat) {
    let pre = |ctx: &Ctx, w: &[f64]| w.iter().zip(t).fold(ctx.zero(), |acc, (wj, tj)| ctx.add(&acc, &ctx.mul(&ctx.num(*wj), tj)));
    let b = ctx.to_f64(&ctx.sub(a, &pre(ctx, w)));
    let last = w.len() - 1;
    for _ in 0..2 {
        let z = ctx.add(&pre(ctx, w), &ctx.num(b));
        let miss = ctx.sub(&z, a);
        w[last] -= ctx.to_f64(&ctx.div(&miss, &t[last]));
    }
    let z = ctx.add(&pre(ctx, w), &ctx.num(b));
    (b, z)
}

/// Y = σ(a)𝟙 − ΔY with ΔY_i = Σ_l α_{i,l} u_l and α = s·alpha_scale.
pub fn construct_outputs(
    x: &DMatrix<f64>,
    arch: &Architecture,
    spec: &ActivationSpec,
    dual: &DualBasis,
    alpha_scale: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
    if dual.is_empty() {
        return Err(Error::EmptyDualBasis);
    }
    if !(alpha_scale > 0.0) {
        return Err(Error::InvalidInput("alpha scale must be positive".into()));
    }
    let n = x.ncols();
    let s = residual_sign(spec, arch.depth())?;
    let alphas = DMatrix::from_element(arch.output_dim, dual.len(), s * alpha_scale);
    let mut delta_y = DMatrix::zeros(arch.output_dim, n);
    for i in 0..arch.output_dim {
        let coeffs: Vec<f64> = alphas.row(i).iter().copied().collect();
        delta_y.set_row(i, &dual.combine(&coeffs).transpose());
    }
    let sa = spec.eval(spec.anchor);
    let y = delta_y.map(|d| sa - d);
    Ok((y, delta_y, alphas))
}

pub fn output_conditions(x: &DMatrix<f64>, delta_y: &DMatrix<f64>, sign: f64) -> OutputConditions {
    let fs = dualspace::build_feature_set(x);
    let mut orthogonality = 0.0f64;
    let mut positivity = f64::INFINITY;
    for row in delta_y.row_iter() {
        let r = row.transpose();
        for v in &fs.ortho {
            orthogonality = orthogonality.max(r.dot(v).abs() / (r.norm() * v.norm()));
        }
        for w in &fs.positive {
            positivity = positivity.min(sign * r.dot(w) / (r.norm() * w.norm()));
        }
    }
    OutputConditions { orthogonality, positivity }
}

pub fn lemma2_constants(x: &DMatrix<f64>, arch: &Architecture, spec: &ActivationSpec, delta_y: &DMatrix<f64>) -> Result<Lemma2Constants> {
    let h = arch.depth();
    let d = spec.eval_with_derivs(spec.anchor)?;
    let depth_factor = d.d1.powi(h as i32 - 1);
    let squares: Vec<DVector<f64>> = x.row_iter().map(|r| r.transpose().component_mul(&r.transpose())).collect();
    let m: Vec<Vec<f64>> = delta_y
        .row_iter()
        .map(|row| squares.iter().map(|sq| d.d2 / 4.0 * row.transpose().dot(sq)).collect())
        .collect();
    let mut m_min = f64::INFINITY;
    for (i, row) in m.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            let signed = v * depth_factor;
            if !(signed > 0.0) {
                return Err(Error::ZeroMargin { i, k });
            }
            m_min = m_min.min(signed);
        }
    }
    let l_floor = m
        .iter()
        .map(|row| row.iter().zip(x.row_iter()).map(|(v, xr)| v.abs() / xr.norm_squared()).fold(f64::INFINITY, f64::min))
        .collect();
    let c = spec.max_abs_deriv_on_segment()?.powi(2);
    let lipschitz = vec![c; h];
    let inv_row = delta_y.row_iter().map(|r| 1.0 / r.norm()).fold(f64::INFINITY, f64::min);
    let mut gamma = vec![m_min / (2.0 * x.norm_squared() * c)];
    let mut w_max = Vec::with_capacity(h.saturating_sub(1));
    let dims = arch.dims();
    for layer in 2..=h {
        let prev = gamma[layer - 2];
        let d_prev = dims[layer - 1] as f64;
        let cap = prev / (28.0 * d_prev * d.d2.abs() * d.d1.abs().powi((h - layer) as i32)) * inv_row;
        w_max.push(cap);
        gamma.push(prev / (18.0 * lipschitz[layer - 1] * d_prev * cap));
    }
    Ok(Lemma2Constants { m, m_min, l_floor, lipschitz, gamma, w_max })
}

fn all_pairs_positive(ctx: &Ctx, delta_y: &HpMatrix, t_h: &HpMatrix) -> bool {
    (0..delta_y.rows).all(|i| {
        (0..t_h.rows).all(|j| {
            let ip = precise::dot(ctx, delta_y.row(i), t_h.row(j));
            ip.is_positive() && !ip.is_zero()
        })
    })
}

/// Build Θ* and measure E(Θ) − E(Θ*).
///
/// Θ′ nudges W₁ along a positive direction until every ⟨ΔY_i, (T_H)_j(Θ′)⟩ is
/// positive; Θ* keeps one neuron of the last hidden layer from Θ′, freezes the
/// others at σ(a), and gives the kept neuron output weight v* = −S/(d_out‖m‖²),
/// the minimiser of E(Θ*) as a quadratic in v. All inner products, norms and
/// losses are evaluated in extended precision.
pub fn suboptimal_witness<R: Rng + ?Sized>(params: &NetworkParams, data: &Dataset, spec: &ActivationSpec, rng: &mut R) -> Result<Witness> {
    let arch = params.architecture()?;
    let h = arch.depth();
    let d_h = arch.hidden[h - 1];
    if d_h < 2 {
        return Err(Error::WidthTooSmall(d_h));
    }
    let mut ctx = Ctx::new();
    let loss_theta = precise::loss(&mut ctx, params, &data.x, &data.y, spec)?;

    // output weights of Θ*: column 0 gets v later, the frozen neurons share the rest
    let q = 1.0 / (d_h - 1) as f64;
    let last = 1.0 - q * (d_h - 2) as f64;
    let frozen_row: Vec<f64> = (1..d_h).map(|j| if j + 1 == d_h { last } else { q }).collect();

    // ΔY = σ(a)·(Σ frozen weights) − Y, exactly the part of Θ*'s residual that
    // does not depend on v; the frozen weights sum to one up to rounding.
    let sa = ctx.activation(spec.kind, &ctx.num(spec.anchor));
    let frozen_sum = frozen_row.iter().fold(ctx.zero(), |acc, w| ctx.add(&acc, &ctx.num(*w)));
    let base = ctx.mul(&sa, &frozen_sum);
    let y_hp = HpMatrix::from_f64(&ctx, &data.y);
    let delta_y = HpMatrix {
        rows: y_hp.rows,
        cols: y_hp.cols,
        data: y_hp.data.iter().map(|y| ctx.sub(&base, y)).collect(),
    };

    let (d1, d0) = (arch.hidden[0], arch.input_dim);
    let mut directions = vec![DMatrix::from_element(d1, d0, 1.0)];
    directions.extend((0..WITNESS_RANDOM_DIRECTIONS).map(|_| DMatrix::from_fn(d1, d0, |_, _| rng.gen_range(0.5..1.5))));

    let mut found = None;
    'search: for (k, dir) in directions.iter().enumerate() {
        let mut eps = WITNESS_EPS_START;
        while eps >= WITNESS_EPS_MIN * 0.999 {
            let mut nudged = params.clone();
            nudged.weights[0] = dir * eps;
            let trace = precise::forward(&mut ctx, &nudged, &data.x, spec)?;
            if all_pairs_positive(&ctx, &delta_y, &trace.post[h - 1]) {
                found = Some((k, eps, nudged, trace));
                break 'search;
            }
            eps /= 10.0;
        }
    }
    let (direction, epsilon, nudged, trace) = found.ok_or(Error::EpsilonSearchFailed)?;

    let m = trace.post[h - 1].row(0).to_vec();
    let s = (0..delta_y.rows).fold(ctx.zero(), |acc, i| ctx.add(&acc, &precise::dot(&ctx, delta_y.row(i), &m)));
    let m_norm_sq = precise::dot(&ctx, &m, &m);
    let d_out = ctx.num(arch.output_dim as f64);
    let denom = ctx.mul(&d_out, &m_norm_sq);
    let v = -ctx.to_f64(&ctx.div(&s, &denom));
    let gap_analytic = ctx.div(&ctx.mul(&s, &s), &denom);

    let mut star = nudged;
    let a = spec.anchor;
    for j in 1..d_h {
        star.weights[h - 1].row_mut(j).fill(0.0);
        star.biases[h - 1][j] = a;
    }
    for i in 0..arch.output_dim {
        star.weights[h][(i, 0)] = v;
        for (j, w) in frozen_row.iter().enumerate() {
            star.weights[h][(i, j + 1)] = *w;
        }
    }
    let loss_star = precise::loss(&mut ctx, &star, &data.x, &data.y, spec)?;
    let gap_direct = ctx.sub(&loss_theta, &loss_star);

    Ok(Witness {
        params: star,
        v,
        epsilon,
        direction,
        sign_factor: 1.0,
        s: ctx.to_f64(&s),
        m_norm_sq: ctx.to_f64(&m_norm_sq),
        gap_analytic: ctx.to_f64(&gap_analytic),
        gap_direct: ctx.to_f64(&gap_direct),
        loss_at_witness: ctx.to_f64(&loss_star),
    })
}

/// The full pipeline: features → dual vectors → Y → caps → Θ → Θ*.
pub fn forge_theorem1<R: Rng + ?Sized>(
    x: &DMatrix<f64>,
    arch: &Architecture,
    spec: &ActivationSpec,
    alpha_scale: f64,
    rng: &mut R,
) -> Result<SmoothConstruction> {
    check_smooth(spec)?;
    arch.validate()?;
    if x.nrows() != arch.input_dim {
        return Err(Error::ShapeMismatch(format!("X has {} rows, architecture expects {}", x.nrows(), arch.input_dim)));
    }
    let d_h = arch.hidden[arch.depth() - 1];
    if d_h < 2 {
        return Err(Error::WidthTooSmall(d_h));
    }
    let report = dualspace::check_assumption1(x);
    if !report.ok() {
        return Err(Error::Assumption1Failed(report.describe()));
    }
    let fs = dualspace::build_feature_set(x);
    let dual = dualspace::dual_positive_vectors(&fs.ortho, &fs.positive, fs.n)?;
    let (y, delta_y, alphas) = construct_outputs(x, arch, spec, &dual, alpha_scale)?;
    let conditions = output_conditions(x, &delta_y, residual_sign(spec, arch.depth())?);
    if !conditions.hold() {
        return Err(Error::Assumption1Failed(format!(
            "residual conditions violated (orthogonality {:e}, positivity {:e})",
            conditions.orthogonality, conditions.positivity
        )));
    }
    let constants = lemma2_constants(x, arch, spec, &delta_y)?;
    let params = construct_weights(arch, spec, &constants, rng)?;
    let dataset = Dataset::new(x.clone(), y)?;
    let witness = suboptimal_witness(&params, &dataset, spec, rng)?;
    let loss_at_theta = network::loss(&params, &dataset, spec)?;
    Ok(SmoothConstruction {
        spec: spec.clone(),
        arch: arch.clone(),
        params,
        dataset,
        delta_y,
        dual,
        alphas,
        conditions,
        constants,
        witness,
        loss_at_theta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activations::{select_anchor, ActivationKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use crate::data::standard_normal as normal_matrix;

    fn forge(kind: ActivationKind, widths: Vec<usize>, d_out: usize, seed: u64) -> SmoothConstruction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = normal_matrix(2, 8, &mut rng);
        let arch = Architecture::new(2, widths, d_out).unwrap();
        forge_theorem1(&x, &arch, &select_anchor(kind).unwrap(), 1.0, &mut rng).unwrap()
    }

    #[test]
    fn sign_rule() {
        let soft = select_anchor(ActivationKind::Softplus).unwrap();
        for h in 1..5 {
            assert_eq!(residual_sign(&soft, h).unwrap(), 1.0);
        }
        let sig = select_anchor(ActivationKind::Sigmoid).unwrap();
        assert_eq!(residual_sign(&sig, 1).unwrap(), -1.0);
    }

    #[test]
    fn zero_to_three_residual() {
        let x = DMatrix::from_row_slice(1, 4, &[0.0, 1.0, 2.0, 3.0]);
        let arch = Architecture::new(1, vec![2], 1).unwrap();
        let spec = select_anchor(ActivationKind::Softplus).unwrap();
        let fs = dualspace::build_feature_set(&x);
        let dual = dualspace::dual_positive_vectors(&fs.ortho, &fs.positive, 4).unwrap();
        let (y, dy, _) = construct_outputs(&x, &arch, &spec, &dual, 1.0).unwrap();
        let c = output_conditions(&x, &dy, 1.0);
        assert!(c.hold());
        assert!(((y + &dy).add_scalar(-spec.eval(0.0))).amax() < 1e-15);
    }

    #[test]
    fn weights_pin_preactivations_to_anchor() {
        let c = forge(ActivationKind::Softplus, vec![4, 3], 1, 0);
        let trace = network::forward(&c.params, &c.dataset.x, &c.spec).unwrap();
        for z in &trace.pre {
            assert!(z.amax() < 1e-14);
        }
        let sa = c.spec.eval(0.0);
        assert!(trace.output.iter().all(|v| (v - sa).abs() < 1e-12));
        for (l, cap) in c.constants.w_max.iter().enumerate() {
            let w = &c.params.weights[l + 1];
            assert!(w.iter().all(|&v| v > cap / 2.0 && v <= *cap));
        }
    }

    #[test]
    fn depth_one_has_no_caps() {
        let c = forge(ActivationKind::Softplus, vec![3], 1, 1);
        assert!(c.constants.w_max.is_empty());
        assert_eq!(c.constants.gamma.len(), 1);
    }

    #[test]
    fn constants_positive_and_linear_in_alpha() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = normal_matrix(2, 8, &mut rng);
        let arch = Architecture::new(2, vec![5, 4], 1).unwrap();
        let spec = select_anchor(ActivationKind::Softplus).unwrap();
        let fs = dualspace::build_feature_set(&x);
        let dual = dualspace::dual_positive_vectors(&fs.ortho, &fs.positive, 8).unwrap();
        let (_, dy, _) = construct_outputs(&x, &arch, &spec, &dual, 1.0).unwrap();
        let k1 = lemma2_constants(&x, &arch, &spec, &dy).unwrap();
        assert!(k1.m_min > 0.0 && k1.gamma.iter().all(|g| *g > 0.0) && k1.w_max.iter().all(|w| *w > 0.0));
        let (_, dy2, _) = construct_outputs(&x, &arch, &spec, &dual, 2.0).unwrap();
        let k2 = lemma2_constants(&x, &arch, &spec, &dy2).unwrap();
        for (r1, r2) in k1.m.iter().zip(&k2.m) {
            for (a, b) in r1.iter().zip(r2) {
                assert!((b - 2.0 * a).abs() <= 1e-12 * a.abs());
            }
        }
    }

    #[test]
    fn loss_equals_residual_norm_and_point_is_stationary() {
        let c = forge(ActivationKind::Softplus, vec![4, 3], 2, 3);
        let e = c.delta_y.norm_squared();
        assert!((c.loss_at_theta - e).abs() <= 1e-12 * e);
        let g = network::gradient(&c.params, &c.dataset, &c.spec).unwrap();
        assert!(g.inf_norm() < 1e-8);
    }

    #[test]
    fn witness_gap_is_positive_and_matches() {
        for (kind, widths) in [(ActivationKind::Softplus, vec![4, 3]), (ActivationKind::Sigmoid, vec![3]), (ActivationKind::Tanh, vec![4, 2])] {
            let c = forge(kind, widths, 2, 4);
            let w = &c.witness;
            assert!(w.gap_direct > 0.0, "{kind}");
            assert!(w.v < 0.0, "{kind}: minimiser should be negative, got {}", w.v);
            assert!(w.relative_gap_error() < 1e-9, "{kind}: {}", w.relative_gap_error());
        }
    }

    #[test]
    fn two_neuron_last_layer_uses_unit_weight() {
        let c = forge(ActivationKind::Swish, vec![3, 2], 1, 5);
        let w = &c.witness.params.weights[2];
        assert_eq!(w[(0, 1)], 1.0);
        assert_eq!(w[(0, 0)], c.witness.v);
    }

    #[test]
    fn narrow_last_layer_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = normal_matrix(2, 8, &mut rng);
        let arch = Architecture::new(2, vec![3, 1], 1).unwrap();
        let spec = select_anchor(ActivationKind::Softplus).unwrap();
        assert_eq!(forge_theorem1(&x, &arch, &spec, 1.0, &mut rng).err(), Some(Error::WidthTooSmall(1)));
    }

    #[test]
    fn alpha_scaling_scales_loss_quadratically() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = normal_matrix(2, 8, &mut rng);
        let arch = Architecture::new(2, vec![4], 1).unwrap();
        let spec = select_anchor(ActivationKind::Softplus).unwrap();
        let a = forge_theorem1(&x, &arch, &spec, 1.0, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = forge_theorem1(&x, &arch, &spec, 3.0, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert!((b.loss_at_theta - 9.0 * a.loss_at_theta).abs() < 1e-10 * b.loss_at_theta);
        assert!(network::gradient(&b.params, &b.dataset, &spec).unwrap().inf_norm() < 1e-8);
        assert!(b.witness.gap_direct > 0.0);
    }
}
