use thiserror::Error;

use crate::activations::ActivationKind;

/// Every failure the library can report.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("{kind} evaluated at its kink t = {t}")]
    EvaluationAtKink { kind: ActivationKind, t: f64 },
    #[error("no valid anchor for {0}: second derivative vanishes everywhere")]
    NoValidAnchor(ActivationKind),
    #[error("{0} has no linear segment")]
    NoLinearSegment(ActivationKind),
    #[error("activation spec invalid: {0}")]
    InvalidActivation(String),
    #[error("target vectors are linearly dependent")]
    DependentTargets,
    #[error("no positive targets: the orthogonal set must be strictly smaller than the target set")]
    DNotLessThanL1,
    #[error("row-space preserving perturbation failed after {0} draws")]
    MaxRetriesExhausted(usize),
    #[error("last hidden layer needs at least two neurons, got {0}")]
    WidthTooSmall(usize),
    #[error("dual basis is empty")]
    EmptyDualBasis,
    #[error("Lemma 2 margin M[{i}][{k}] is zero")]
    ZeroMargin { i: usize, k: usize },
    #[error("witness precondition not met for any epsilon down to 1e-8")]
    EpsilonSearchFailed,
    #[error("input data violates the genericity assumption: {0}")]
    Assumption1Failed(String),
    #[error("partially linear assumption violated: {0}")]
    Assumption3Failed(String),
    #[error("the six-vector set is rank deficient after {0} draws")]
    RankDeficientA(usize),
    #[error("input entries must be pairwise distinct")]
    DistinctEntriesViolated,
    #[error("need N >= 6 and d1 >= N, got N = {n}, d1 = {d1}")]
    SigmoidSizes { n: usize, d1: usize },
    #[error("merged point is not stationary (residual {0:e})")]
    MergeBreaksStationarity(f64),
    #[error("relocation did not converge within {0} steps")]
    RelocationDiverged(usize),
    #[error("relocated point lost positive definiteness")]
    PdLost,
    #[error("split vector must lie strictly inside the simplex")]
    QOutsideSimplex,
    #[error("a pre-activation left the linear segment")]
    SegmentEscape,
    #[error("could not repair the layer rank")]
    RankRepairFailed,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
