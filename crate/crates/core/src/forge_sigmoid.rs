//! One hidden sigmoid layer with scalar input and output.
//!
//! Every hidden neuron shares (w, b), so the wide network behaves like a single
//! neuron with output weight v̄ = Σ v_i. The one-neuron point is a strict local
//! minimum, which survives small data perturbations; splitting it back gives a
//! bad local minimum of the wide network for every nearby dataset.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, Vector3};
use rand::Rng;

use crate::activations::{ActivationKind, ActivationSpec, DEFAULT_DELTA};
use crate::data::distinct_entries;
use crate::dualspace::{self, DualBasis};
use crate::error::{Error, Result};
use crate::network::{self, Dataset, NetworkParams};

const RANK_REDRAWS: usize = 20;
const RELOCATION_MAX_STEPS: usize = 10_000;
const RELOCATION_TOL: f64 = 1e-10;
const PD_THRESHOLD: f64 = 1e-12;

pub fn sigmoid_spec() -> ActivationSpec {
    ActivationSpec::new(ActivationKind::Sigmoid, 0.0, DEFAULT_DELTA)
}

/// σ, σ′ = σ(1 − σ), σ″ = σ′(1 − 2σ)
fn sig(t: f64) -> (f64, f64, f64) {
    let s = sigmoid_spec().eval(t);
    let d1 = s * (1.0 - s);
    (s, d1, d1 * (1.0 - 2.0 * s))
}

/// σ(z), σ′(z), σ″(z) elementwise for z = w·x + b.
fn sigmoid_parts(x: &DVector<f64>, w: f64, b: f64) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
    let n = x.len();
    let mut s = DVector::zeros(n);
    let mut s1 = DVector::zeros(n);
    let mut s2 = DVector::zeros(n);
    for k in 0..n {
        let (a, b1, c) = sig(w * x[k] + b);
        s[k] = a;
        s1[k] = b1;
        s2[k] = c;
    }
    (s, s1, s2)
}

/// {σ(z), σ′(z), σ′(z)∘x, σ″(z), σ″(z)∘x, σ″(z)∘x∘x} and its rank verdict.
#[derive(Clone, Debug)]
pub struct ASet {
    pub vectors: [DVector<f64>; 6],
    pub full_rank: bool,
    pub singular_ratio: f64,
}

impl ASet {
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_columns(&self.vectors)
    }
}

pub fn build_a_set(x: &DVector<f64>, w: f64, b: f64) -> Result<ASet> {
    if x.len() < 6 {
        return Err(Error::SigmoidSizes { n: x.len(), d1: 0 });
    }
    let (s, s1, s2) = sigmoid_parts(x, w, b);
    let vectors = [
        s,
        s1.clone(),
        s1.component_mul(x),
        s2.clone(),
        s2.component_mul(x),
        s2.component_mul(x).component_mul(x),
    ];
    let m = DMatrix::from_columns(&vectors);
    Ok(ASet { full_rank: dualspace::numerical_rank(&m) == 6, singular_ratio: dualspace::singular_ratio(&m), vectors })
}

#[derive(Clone, Debug)]
pub struct SigmoidConstruction {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub v: DVector<f64>,
    pub w: f64,
    pub b: f64,
    pub z: DVector<f64>,
    /// t − y
    pub delta_y: DVector<f64>,
    pub dual: DualBasis,
    pub alphas: Vec<f64>,
    /// (w, b) redraws needed before the six-vector set had full rank
    pub redraws: usize,
}

impl SigmoidConstruction {
    pub fn params(&self) -> NetworkParams {
        let d1 = self.v.len();
        NetworkParams {
            weights: vec![DMatrix::from_element(d1, 1, self.w), DMatrix::from_row_slice(1, d1, self.v.as_slice())],
            biases: vec![DVector::from_element(d1, self.b)],
        }
    }

    pub fn dataset(&self) -> Dataset {
        Dataset { x: DMatrix::from_row_slice(1, self.x.len(), self.x.as_slice()), y: DMatrix::from_row_slice(1, self.y.len(), self.y.as_slice()) }
    }

    pub fn loss(&self) -> f64 {
        self.delta_y.norm_squared()
    }
}

/// Forge a bad local minimum of the wide network for inputs `x`.
pub fn forge_theorem3<R: Rng + ?Sized>(x: &DVector<f64>, d1: usize, alpha_scale: f64, v_sign: f64, rng: &mut R) -> Result<SigmoidConstruction> {
    let n = x.len();
    if n < 6 || d1 < n {
        return Err(Error::SigmoidSizes { n, d1 });
    }
    if !distinct_entries(&DMatrix::from_column_slice(n, 1, x.as_slice())) {
        return Err(Error::DistinctEntriesViolated);
    }
    if !(alpha_scale > 0.0) || v_sign == 0.0 {
        return Err(Error::InvalidInput("alpha scale must be positive and the v sign nonzero".into()));
    }
    let (mut w, mut b) = (1.0, 0.0);
    let mut redraws = 0;
    let set = loop {
        let set = build_a_set(x, w, b)?;
        if set.full_rank {
            break set;
        }
        redraws += 1;
        if redraws > RANK_REDRAWS {
            return Err(Error::RankDeficientA(RANK_REDRAWS));
        }
        w = crate::data::standard_normal(1, 1, rng)[(0, 0)];
        b = crate::data::standard_normal(1, 1, rng)[(0, 0)];
    };
    let [s, s1, s1x, s2, s2x, s2xx] = set.vectors;
    let dual = dualspace::dual_positive_vectors(&[s.clone(), s1, s1x, s2x], &[s2, s2xx], n)?;
    let v_sign = v_sign.signum();
    let v = DVector::from_fn(d1, |_, _| v_sign * rng.gen_range(0.5..=1.5));
    let alphas = vec![alpha_scale; dual.len()];
    let t = &s * v.sum();
    let delta_y = dual.combine(&alphas) * v[0];
    let y = &t - &delta_y;
    let z = x.map(|xi| w * xi + b);
    let c = SigmoidConstruction { x: x.clone(), y, v, w, b, z, delta_y, dual, alphas, redraws };
    let cert = check_lemma3(&c.params(), &c.dataset())?;
    if !cert.holds() {
        return Err(Error::InvalidInput("forged point fails its own local-minimum certificate".into()));
    }
    Ok(c)
}

/// Residuals of the four equalities and values of the two inequalities for one neuron.
#[derive(Clone, Debug, PartialEq)]
pub struct NeuronConditions {
    /// |⟨Δy, g⟩| / (‖Δy‖‖g‖) for g ∈ {σ(z), σ′(z), v σ′(z)∘x, v σ″(z)∘x}
    pub equalities: [f64; 4],
    /// ⟨Δy, v σ″(z)⟩ and ⟨Δy, v σ″(z)∘x∘x⟩
    pub margins: [f64; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lemma3Certificate {
    pub neurons: Vec<NeuronConditions>,
}

impl Lemma3Certificate {
    pub const EQUALITY_TOL: f64 = 1e-9;

    pub fn holds(&self) -> bool {
        !self.neurons.is_empty()
            && self
                .neurons
                .iter()
                .all(|c| c.equalities.iter().all(|r| *r <= Self::EQUALITY_TOL) && c.margins.iter().all(|m| *m > 0.0))
    }

    pub fn max_equality_residual(&self) -> f64 {
        self.neurons.iter().flat_map(|c| c.equalities).fold(0.0, f64::max)
    }

    pub fn min_margin(&self) -> f64 {
        self.neurons.iter().flat_map(|c| c.margins).fold(f64::INFINITY, f64::min)
    }
}

fn rel_inner(a: &DVector<f64>, g: &DVector<f64>) -> f64 {
    let den = a.norm() * g.norm();
    if den == 0.0 {
        0.0
    } else {
        a.dot(g).abs() / den
    }
}

/// Evaluate the six local-minimum conditions for every hidden neuron of a
/// one-hidden-layer sigmoid network with scalar input and output.
pub fn check_lemma3(params: &NetworkParams, data: &Dataset) -> Result<Lemma3Certificate> {
    let arch = params.architecture()?;
    if arch.depth() != 1 || arch.input_dim != 1 || arch.output_dim != 1 {
        return Err(Error::ShapeMismatch("needs one hidden layer with scalar input and output".into()));
    }
    let spec = sigmoid_spec();
    let x = data.x.row(0).transpose();
    let t = network::output(params, &data.x, &spec)?.row(0).transpose();
    let dy = t - data.y.row(0).transpose();
    let neurons = (0..arch.hidden[0])
        .map(|i| {
            let (w, b, v) = (params.weights[0][(i, 0)], params.biases[0][i], params.weights[1][(0, i)]);
            let (s, s1, s2) = sigmoid_parts(&x, w, b);
            let equalities = [
                rel_inner(&dy, &s),
                rel_inner(&dy, &s1),
                rel_inner(&dy, &(s1.component_mul(&x) * v)),
                rel_inner(&dy, &(s2.component_mul(&x) * v)),
            ];
            let margins = [dy.dot(&(&s2 * v)), dy.dot(&(s2.component_mul(&x).component_mul(&x) * v))];
            NeuronConditions { equalities, margins }
        })
        .collect();
    Ok(Lemma3Certificate { neurons })
}

/// (v̄, w̄, b̄) of the single-neuron network ‖y − v̄σ(w̄x + b̄)‖².
#[derive(Clone, Debug, PartialEq)]
pub struct OneNeuronPoint {
    pub v: f64,
    pub w: f64,
    pub b: f64,
    pub h_matrix: Matrix2<f64>,
    pub gradient_residual: f64,
}

impl OneNeuronPoint {
    pub fn theta(&self) -> Vector3<f64> {
        Vector3::new(self.v, self.w, self.b)
    }

    pub fn is_strict_min(&self) -> bool {
        eigen2(&self.h_matrix).0 > PD_THRESHOLD
    }
}

/// Eigenvalues (min, max) of a symmetric 2×2 matrix in closed form.
pub fn eigen2(h: &Matrix2<f64>) -> (f64, f64) {
    let tr = h[(0, 0)] + h[(1, 1)];
    let half_gap = (((h[(0, 0)] - h[(1, 1)]) / 2.0).powi(2) + h[(0, 1)] * h[(1, 0)]).max(0.0).sqrt();
    (tr / 2.0 - half_gap, tr / 2.0 + half_gap)
}

/// Loss, gradient and exact Hessian of the one-neuron loss.
pub fn one_neuron_objective(theta: &Vector3<f64>, x: &DVector<f64>, y: &DVector<f64>) -> (f64, Vector3<f64>, Matrix3<f64>) {
    let (v, w, b) = (theta[0], theta[1], theta[2]);
    let (s, s1, s2) = sigmoid_parts(x, w, b);
    let r = &s * v - y;
    let s1x = s1.component_mul(x);
    let g = Vector3::new(2.0 * r.dot(&s), 2.0 * v * r.dot(&s1x), 2.0 * v * r.dot(&s1));
    let hvw = 2.0 * v * s1x.dot(&s) + 2.0 * r.dot(&s1x);
    let hvb = 2.0 * v * s1.dot(&s) + 2.0 * r.dot(&s1);
    let hww = 2.0 * v * v * s1x.norm_squared() + 2.0 * v * r.dot(&s2.component_mul(x).component_mul(x));
    let hwb = 2.0 * v * v * s1x.dot(&s1) + 2.0 * v * r.dot(&s2.component_mul(x));
    let hbb = 2.0 * v * v * s1.norm_squared() + 2.0 * v * r.dot(&s2);
    let h = Matrix3::new(2.0 * s.norm_squared(), hvw, hvb, hvw, hww, hwb, hvb, hwb, hbb);
    (r.norm_squared(), g, h)
}

/// The 2×2 curvature matrix in (w, b) weighted by the residual.
pub fn h_matrix(v: f64, w: f64, b: f64, x: &DVector<f64>, y: &DVector<f64>) -> Matrix2<f64> {
    let (s, _, s2) = sigmoid_parts(x, w, b);
    let dy = &s * v - y;
    let vs2 = s2 * v;
    let h00 = dy.dot(&vs2.component_mul(x).component_mul(x));
    let h01 = dy.dot(&vs2.component_mul(x));
    let h11 = dy.dot(&vs2);
    Matrix2::new(h00, h01, h01, h11)
}

fn point_at(theta: &Vector3<f64>, x: &DVector<f64>, y: &DVector<f64>) -> OneNeuronPoint {
    let (_, g, _) = one_neuron_objective(theta, x, y);
    OneNeuronPoint { v: theta[0], w: theta[1], b: theta[2], h_matrix: h_matrix(theta[0], theta[1], theta[2], x, y), gradient_residual: g.amax() }
}

/// Collapse the identical-input neurons into one.
pub fn merge_to_one_neuron(c: &SigmoidConstruction) -> Result<OneNeuronPoint> {
    let p = point_at(&Vector3::new(c.v.sum(), c.w, c.b), &c.x, &c.y);
    if p.gradient_residual >= 1e-9 {
        return Err(Error::MergeBreaksStationarity(p.gradient_residual));
    }
    Ok(p)
}

#[derive(Clone, Debug)]
pub struct Relocation {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub point: OneNeuronPoint,
    /// ‖relocated − original‖₂ in (v, w, b)
    pub distance: f64,
    pub steps: usize,
    pub loss: f64,
}

/// Damped Newton descent from `theta` on the one-neuron loss for data (x, y).
pub fn relocate(theta: Vector3<f64>, x: &DVector<f64>, y: &DVector<f64>) -> Result<(Vector3<f64>, usize)> {
    let mut theta = theta;
    let mut lambda = 1e-6;
    let (mut f, mut g, mut h) = one_neuron_objective(&theta, x, y);
    for step in 0..RELOCATION_MAX_STEPS {
        if g.amax() < RELOCATION_TOL {
            return Ok((theta, step));
        }
        let damped = h + Matrix3::identity() * lambda;
        let Some(delta) = damped.lu().solve(&(-g)) else {
            lambda *= 10.0;
            continue;
        };
        let cand = theta + delta;
        let (fc, gc, hc) = one_neuron_objective(&cand, x, y);
        // near the minimum the loss change drowns in rounding; fall back on the gradient
        let flat = (fc - f).abs() <= 1e-13 * f.max(1.0);
        if fc.is_finite() && (fc < f || (flat && gc.amax() < g.amax())) {
            theta = cand;
            (f, g, h) = (fc, gc, hc);
            lambda = (lambda / 10.0).max(1e-15);
        } else {
            lambda *= 10.0;
        }
    }
    Err(Error::RelocationDiverged(RELOCATION_MAX_STEPS))
}

/// Perturb (x, y) uniformly in the ∞-ball of radius `delta_data` and follow
/// the strict minimum to the perturbed objective.
pub fn perturb_and_relocate<R: Rng + ?Sized>(point: &OneNeuronPoint, x: &DVector<f64>, y: &DVector<f64>, delta_data: f64, rng: &mut R) -> Result<Relocation> {
    if !point.is_strict_min() {
        return Err(Error::PdLost);
    }
    if delta_data < 0.0 {
        return Err(Error::InvalidInput("data perturbation must be nonnegative".into()));
    }
    let mut jitter = |v: &DVector<f64>| v.map(|e| if delta_data > 0.0 { e + rng.gen_range(-delta_data..delta_data) } else { e });
    let xt = jitter(x);
    let yt = jitter(y);
    if !distinct_entries(&DMatrix::from_column_slice(xt.len(), 1, xt.as_slice())) {
        return Err(Error::DistinctEntriesViolated);
    }
    let (theta, steps) = relocate(point.theta(), &xt, &yt)?;
    let moved = point_at(&theta, &xt, &yt);
    if !moved.is_strict_min() {
        return Err(Error::PdLost);
    }
    let distance = (theta - point.theta()).norm();
    if delta_data > 0.0 && distance >= 10.0 * delta_data {
        return Err(Error::RelocationDiverged(steps));
    }
    let loss = one_neuron_objective(&theta, &xt, &yt).0;
    Ok(Relocation { x: xt, y: yt, point: moved, distance, steps, loss })
}

/// Spread the single neuron over d₁ copies with output weights v̄·q.
pub fn split_neuron(point: &OneNeuronPoint, q: &DVector<f64>) -> Result<NetworkParams> {
    if q.is_empty() || q.iter().any(|&v| !(v > 0.0 && v < 1.0) && !(q.len() == 1 && v == 1.0)) || (q.sum() - 1.0).abs() > 1e-12 {
        return Err(Error::QOutsideSimplex);
    }
    let d1 = q.len();
    Ok(NetworkParams {
        weights: vec![DMatrix::from_element(d1, 1, point.w), DMatrix::from_fn(1, d1, |_, j| point.v * q[j])],
        biases: vec![DVector::from_element(d1, point.b)],
    })
}

pub fn uniform_split(d1: usize) -> DVector<f64> {
    DVector::from_element(d1, 1.0 / d1 as f64)
}

/// Random interior point of the simplex, bounded away from its faces.
pub fn random_split<R: Rng + ?Sized>(d1: usize, rng: &mut R) -> DVector<f64> {
    let raw = DVector::from_fn(d1, |_, _| rng.gen_range(0.5..1.5));
    let total = raw.sum();
    raw / total
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ramp() -> DVector<f64> {
        DVector::from_vec(vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0])
    }

    fn forged(seed: u64, d1: usize) -> SigmoidConstruction {
        forge_theorem3(&ramp(), d1, 1.0, 1.0, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn ramp_block_is_nonsingular() {
        let set = build_a_set(&ramp(), 1.0, 0.0).unwrap();
        assert!(set.full_rank);
        let det = set.matrix().determinant();
        assert!(det.abs() > 0.0 && det.is_finite());
    }

    #[test]
    fn constant_input_is_rank_deficient() {
        let set = build_a_set(&DVector::from_element(6, 0.3), 1.0, 0.0).unwrap();
        assert!(!set.full_rank);
        assert!(dualspace::numerical_rank(&set.matrix()) <= 3);
    }

    #[test]
    fn forged_point_is_stationary_with_positive_loss() {
        let c = forged(0, 6);
        assert_eq!(c.dual.len(), 2);
        assert!(c.loss() > 0.0);
        let data = c.dataset();
        let e = network::loss(&c.params(), &data, &sigmoid_spec()).unwrap();
        assert!((e - c.loss()).abs() < 1e-12 * e);
        assert!(network::gradient(&c.params(), &data, &sigmoid_spec()).unwrap().inf_norm() < 1e-9);
        let cert = check_lemma3(&c.params(), &data).unwrap();
        assert!(cert.holds());
        assert!(cert.max_equality_residual() < 1e-9);
    }

    #[test]
    fn flipping_one_output_weight_breaks_the_certificate() {
        let c = forged(1, 8);
        let mut p = c.params();
        p.weights[1][(0, 3)] *= -1.0;
        let cert = check_lemma3(&p, &c.dataset()).unwrap();
        assert!(!cert.holds());
        let before = check_lemma3(&c.params(), &c.dataset()).unwrap();
        assert!(before.neurons[3].margins.iter().all(|m| *m > 0.0));
    }

    #[test]
    fn zero_residual_fails_only_the_inequalities() {
        let c = forged(2, 6);
        let mut data = c.dataset();
        data.y = network::output(&c.params(), &data.x, &sigmoid_spec()).unwrap();
        let cert = check_lemma3(&c.params(), &data).unwrap();
        assert_eq!(cert.max_equality_residual(), 0.0);
        assert!(!cert.holds());
    }

    #[test]
    fn merge_keeps_the_loss_and_is_strict() {
        let c = forged(3, 8);
        let p = merge_to_one_neuron(&c).unwrap();
        let (f, _, _) = one_neuron_objective(&p.theta(), &c.x, &c.y);
        assert!((f - c.loss()).abs() < 1e-12 * f);
        assert!(p.h_matrix[(0, 0)] > 0.0 && p.h_matrix[(1, 1)] > 0.0);
        assert!(p.h_matrix[(0, 1)].abs() < 1e-9 * p.h_matrix.amax());
        assert!(p.is_strict_min());
    }

    #[test]
    fn eigenvalues_two_ways() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let (a, b, d) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let h = Matrix2::new(a, b, b, d);
            let (lo, hi) = eigen2(&h);
            // roots of λ² − tr λ + det via the quadratic formula
            let (tr, det) = (a + d, a * d - b * b);
            let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
            assert!((lo - (tr - disc) / 2.0).abs() < 1e-12);
            assert!((hi - (tr + disc) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let c = forged(5, 6);
        let theta = Vector3::new(c.v.sum() * 0.9, 0.8, 0.1);
        let (_, g, h) = one_neuron_objective(&theta, &c.x, &c.y);
        let step = 1e-6;
        for k in 0..3 {
            let mut up = theta;
            up[k] += step;
            let mut dn = theta;
            dn[k] -= step;
            let (fu, gu, _) = one_neuron_objective(&up, &c.x, &c.y);
            let (fd, gd, _) = one_neuron_objective(&dn, &c.x, &c.y);
            assert!(((fu - fd) / (2.0 * step) - g[k]).abs() < 1e-5 * g.amax().max(1.0));
            let col = (gu - gd) / (2.0 * step);
            assert!((col - h.column(k)).amax() < 1e-5 * h.amax());
        }
    }

    #[test]
    fn zero_perturbation_stays_put() {
        let c = forged(6, 8);
        let p = merge_to_one_neuron(&c).unwrap();
        let r = perturb_and_relocate(&p, &c.x, &c.y, 0.0, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(r.distance < 1e-12);
    }

    #[test]
    fn small_perturbation_relocates() {
        let c = forged(7, 8);
        let p = merge_to_one_neuron(&c).unwrap();
        let r = perturb_and_relocate(&p, &c.x, &c.y, 1e-3, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert!(r.point.gradient_residual < 1e-10);
        assert!(r.point.is_strict_min());
    }

    #[test]
    fn relocation_distance_shrinks_with_the_perturbation() {
        let c = forged(8, 6);
        let p = merge_to_one_neuron(&c).unwrap();
        let dist = |d: f64| perturb_and_relocate(&p, &c.x, &c.y, d, &mut ChaCha8Rng::seed_from_u64(9)).unwrap().distance;
        let (a, b, e) = (dist(1e-3), dist(5e-4), dist(2.5e-4));
        assert!(b <= a / 2.0 * 1.01 && e <= b / 2.0 * 1.01, "{a} {b} {e}");
    }

    #[test]
    fn split_rejects_bad_q() {
        let c = forged(0, 6);
        let p = merge_to_one_neuron(&c).unwrap();
        assert_eq!(split_neuron(&p, &DVector::from_vec(vec![0.5, 0.6])).err(), Some(Error::QOutsideSimplex));
        assert_eq!(split_neuron(&p, &DVector::from_vec(vec![0.0, 1.0])).err(), Some(Error::QOutsideSimplex));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn merge_split_round_trip(seed in 0u64..10_000, d1 in 6usize..12) {
            let c = forged(seed, d1);
            let p = merge_to_one_neuron(&c).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let q = random_split(d1, &mut rng);
            let wide = split_neuron(&p, &q).unwrap();
            let data = c.dataset();
            let a = network::output(&wide, &data.x, &sigmoid_spec()).unwrap();
            let b = network::output(&c.params(), &data.x, &sigmoid_spec()).unwrap();
            prop_assert!((a - b).amax() < 1e-12);
            let (f, _, _) = one_neuron_objective(&p.theta(), &c.x, &c.y);
            prop_assert!((network::loss(&wide, &data, &sigmoid_spec()).unwrap() - f).abs() < 1e-12 * f.max(1.0));
            prop_assert!(wide.weights[1].iter().all(|v| v.signum() == p.v.signum()));
        }

        #[test]
        fn lemma3_holds_on_random_inputs(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = crate::data::standard_normal(6, 1, &mut rng).column(0).into_owned();
            let c = forge_theorem3(&x, 7, 1.0, if seed % 2 == 0 { 1.0 } else { -1.0 }, &mut rng).unwrap();
            let cert = check_lemma3(&c.params(), &c.dataset()).unwrap();
            prop_assert!(cert.holds());
        }
    }
}
