//! Linear algebra for the constructions: Hadamard feature sets, dual positive
//! vectors, rank tests, row-space preserving perturbations and least squares.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};

/// Relative singular-value threshold for every rank decision.
pub const RANK_RTOL: f64 = 1e-9;
const MAX_PERTURB_DRAWS: usize = 50;

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let sv = singular_values(m);
    match sv.first() {
        Some(&top) if top > 0.0 => sv.iter().filter(|&&s| s > RANK_RTOL * top).count(),
        _ => 0,
    }
}

/// σ_min / σ_max over the min(rows, cols) singular values; 0 for a zero matrix.
pub fn singular_ratio(m: &DMatrix<f64>) -> f64 {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
        _ => 0.0,
    }
}

fn columns(vs: &[DVector<f64>], n: usize) -> DMatrix<f64> {
    if vs.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(vs)
    }
}

/// The Hadamard feature set of X, split into vectors the residual must be
/// orthogonal to and the squared rows it must correlate positively with.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSet {
    /// 𝟙, the rows of X, and X_i∘X_j for i < j.
    pub ortho: Vec<DVector<f64>>,
    /// X_j∘X_j
    pub positive: Vec<DVector<f64>>,
    pub n: usize,
}

impl FeatureSet {
    pub fn len(&self) -> usize {
        self.ortho.len() + self.positive.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let all: Vec<DVector<f64>> = self.ortho.iter().chain(&self.positive).cloned().collect();
        columns(&all, self.n)
    }
}

pub fn build_feature_set(x: &DMatrix<f64>) -> FeatureSet {
    let n = x.ncols();
    let d0 = x.nrows();
    let row = |i: usize| -> DVector<f64> { x.row(i).transpose() };
    let mut ortho = vec![DVector::from_element(n, 1.0)];
    ortho.extend((0..d0).map(row));
    for i in 0..d0 {
        for j in i + 1..d0 {
            ortho.push(row(i).component_mul(&row(j)));
        }
    }
    let positive = (0..d0).map(|i| row(i).component_mul(&row(i))).collect();
    FeatureSet { ortho, positive, n }
}

/// Outcome of the genericity test on X.
#[derive(Clone, Debug, PartialEq)]
pub struct Assumption1Report {
    pub d0: usize,
    pub n: usize,
    /// d₀²/2 + 3d₀/2 < N
    pub dimension_ok: bool,
    pub rank: usize,
    pub expected_rank: usize,
    pub singular_ratio: f64,
}

impl Assumption1Report {
    pub fn ok(&self) -> bool {
        self.dimension_ok && self.rank == self.expected_rank
    }

    pub fn describe(&self) -> String {
        if !self.dimension_ok {
            format!("d0^2/2 + 3 d0/2 = {} is not below N = {}", (self.d0 * self.d0 + 3 * self.d0) as f64 / 2.0, self.n)
        } else if self.rank != self.expected_rank {
            format!("feature set has rank {} of {}", self.rank, self.expected_rank)
        } else {
            "ok".into()
        }
    }
}

pub fn check_assumption1(x: &DMatrix<f64>) -> Assumption1Report {
    let fs = build_feature_set(x);
    let (d0, n) = (x.nrows(), x.ncols());
    let m = fs.matrix();
    let sv = singular_values(&m);
    let ratio = match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 && fs.len() <= n => lo / hi,
        _ => 0.0,
    };
    Assumption1Report {
        d0,
        n,
        dimension_ok: d0 * d0 + 3 * d0 < 2 * n,
        rank: numerical_rank(&m),
        expected_rank: fs.len(),
        singular_ratio: ratio,
    }
}

/// Vectors orthogonal to every ortho target with positive inner product
/// against every positive target.
#[derive(Clone, Debug, PartialEq)]
pub struct DualBasis {
    pub vectors: Vec<DVector<f64>>,
    /// max |⟨u, v⟩| / (‖u‖‖v‖) over ortho targets
    pub orthogonality: f64,
    /// min ⟨u, w⟩ / (‖u‖‖w‖) over positive targets
    pub positivity: f64,
}

impl DualBasis {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Σ_l c_l u_l
    pub fn combine(&self, coeffs: &[f64]) -> DVector<f64> {
        let n = self.vectors.first().map_or(0, |v| v.len());
        self.vectors.iter().zip(coeffs).fold(DVector::zeros(n), |acc, (u, c)| acc + u * *c)
    }
}

fn cosine(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let den = a.norm() * b.norm();
    if den == 0.0 {
        0.0
    } else {
        a.dot(b) / den
    }
}

/// Basis completion, inversion, then mixing with Q = I + J.
///
/// Returns N − |ortho| vectors.
pub fn dual_positive_vectors(ortho: &[DVector<f64>], positive: &[DVector<f64>], n: usize) -> Result<DualBasis> {
    if positive.is_empty() {
        return Err(Error::DNotLessThanL1);
    }
    if ortho.iter().chain(positive).any(|v| v.len() != n) {
        return Err(Error::ShapeMismatch(format!("all targets must have length {n}")));
    }
    let mut cols: Vec<DVector<f64>> = ortho.iter().chain(positive).cloned().collect();
    if cols.len() > n || numerical_rank(&columns(&cols, n)) < cols.len() {
        return Err(Error::DependentTargets);
    }
    for i in 0..n {
        if cols.len() == n {
            break;
        }
        cols.push(DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 }));
        if numerical_rank(&columns(&cols, n)) < cols.len() {
            cols.pop();
        }
    }
    let basis = columns(&cols, n);
    let inv = basis.lu().try_inverse().ok_or(Error::DependentTargets)?;
    let d = ortho.len();
    let duals: Vec<DVector<f64>> = (d..n).map(|r| inv.row(r).transpose().normalize()).collect();
    let total = duals.iter().fold(DVector::zeros(n), |acc, u| acc + u);

    // orthonormal basis of span(ortho) to scrub rounding out of the zero conditions
    let ortho_q = if d > 0 { Some(columns(ortho, n).qr().q()) } else { None };
    let scrub = |mut u: DVector<f64>| {
        if let Some(q) = &ortho_q {
            for _ in 0..2 {
                u -= q * (q.transpose() * &u);
            }
        }
        u
    };
    let vectors: Vec<DVector<f64>> = duals.iter().map(|dual| scrub(dual + &total)).collect();

    let orthogonality = vectors
        .iter()
        .flat_map(|u| ortho.iter().map(move |v| cosine(u, v).abs()))
        .fold(0.0, f64::max);
    let positivity = vectors
        .iter()
        .flat_map(|u| positive.iter().map(move |w| cosine(u, w)))
        .fold(f64::INFINITY, f64::min);
    Ok(DualBasis { vectors, orthogonality, positivity })
}

/// Draw C with ‖C‖_F < ε so that row((C + A)B) = row(B).
///
/// `a` is L₁×L₂ and `b` is L₂×M. Entries are uniform in ±ε/(L₁L₂); a failed
/// draw is retried, halving ε after every second failure.
pub fn rowspace_preserving_perturb<R: Rng + ?Sized>(a: &DMatrix<f64>, b: &DMatrix<f64>, eps: f64, rng: &mut R) -> Result<DMatrix<f64>> {
    if a.ncols() != b.nrows() {
        return Err(Error::ShapeMismatch(format!("A is {}x{}, B is {}x{}", a.nrows(), a.ncols(), b.nrows(), b.ncols())));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidInput("perturbation size must be positive".into()));
    }
    let target = numerical_rank(b);
    if target == 0 {
        return Ok(DMatrix::zeros(a.nrows(), a.ncols()));
    }
    let (l1, l2) = (a.nrows(), a.ncols());
    let mut bound = eps / (l1 * l2) as f64;
    for draw in 0..MAX_PERTURB_DRAWS {
        let c = DMatrix::from_fn(l1, l2, |_, _| rng.gen_range(-bound..bound));
        if numerical_rank(&((&c + a) * b)) == target {
            return Ok(c);
        }
        if draw % 2 == 1 {
            bound /= 2.0;
        }
    }
    Err(Error::MaxRetriesExhausted(MAX_PERTURB_DRAWS))
}

/// Moore–Penrose pseudo-inverse, discarding singular values below the rank threshold.
pub fn pseudo_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.is_empty() {
        return DMatrix::zeros(m.ncols(), m.nrows());
    }
    let svd = m.clone().svd(true, true);
    let top = svd.singular_values.max();
    let u = svd.u.expect("left singular vectors");
    let vt = svd.v_t.expect("right singular vectors");
    let mut out = DMatrix::zeros(m.ncols(), m.nrows());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if top > 0.0 && s > RANK_RTOL * top {
            out += vt.row(k).transpose() * u.column(k).transpose() / s;
        }
    }
    out
}

/// Minimum-norm V minimising ‖Y − V·M‖²_F.
pub fn least_squares(m: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if m.nrows() == 0 {
        return Err(Error::InvalidInput("design matrix needs at least one row".into()));
    }
    if m.ncols() != y.ncols() {
        return Err(Error::ShapeMismatch(format!("M has {} columns, Y has {}", m.ncols(), y.ncols())));
    }
    Ok(y * pseudo_inverse(m))
}

/// ‖Y − Y·M⁺·M‖²_F, the squared distance of Y's rows from row(M).
pub fn projection_residual(m: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<f64> {
    let v = least_squares(m, y)?;
    Ok((y - v * m).norm_squared())
}

/// [rows of X; 𝟙ᵀ]
pub fn with_ones_row(x: &DMatrix<f64>) -> DMatrix<f64> {
    x.clone().insert_row(x.nrows(), 1.0)
}
