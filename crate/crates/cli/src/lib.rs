//! Experiment plumbing behind the `minforge` binary: configs, runs,
//! sweeps and CSV reports.

pub mod config;
pub mod experiment;
pub mod summary;
pub mod sweep;

use minforge_core::Error;

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    /// certified local minimum with positive sub-optimality evidence
    Certified,
    /// a stored counterexample lowers the loss
    Refuted,
    /// search exhausted, or certified without sub-optimality evidence
    Inconclusive,
    /// invalid config, or an assumption the construction needs does not hold
    Precondition,
    Internal,
}

impl ExitStatus {
    pub fn code(self) -> u8 {
        match self {
            Self::Certified => 0,
            Self::Internal => 1,
            Self::Refuted => 2,
            Self::Inconclusive => 3,
            Self::Precondition => 4,
        }
    }

    fn severity(self) -> u8 {
        match self {
            Self::Certified => 0,
            Self::Inconclusive => 1,
            Self::Refuted => 2,
            Self::Precondition => 3,
            Self::Internal => 4,
        }
    }

    /// The more severe of two outcomes, for batches.
    pub fn worst(self, other: Self) -> Self {
        if other.severity() > self.severity() {
            other
        } else {
            self
        }
    }
}

/// Assumption and input-validation errors map to 4; construction failures to 1.
pub fn exit_status_for(e: &Error) -> ExitStatus {
    use Error::*;
    match e {
        ShapeMismatch(_)
        | EvaluationAtKink { .. }
        | NoValidAnchor(_)
        | NoLinearSegment(_)
        | InvalidActivation(_)
        | WidthTooSmall(_)
        | Assumption1Failed(_)
        | Assumption3Failed(_)
        | DistinctEntriesViolated
        | SigmoidSizes { .. }
        | QOutsideSimplex
        | InvalidInput(_) => ExitStatus::Precondition,
        DependentTargets
        | DNotLessThanL1
        | MaxRetriesExhausted(_)
        | EmptyDualBasis
        | ZeroMargin { .. }
        | EpsilonSearchFailed
        | RankDeficientA(_)
        | MergeBreaksStationarity(_)
        | RelocationDiverged(_)
        | PdLost
        | SegmentEscape
        | RankRepairFailed => ExitStatus::Internal,
    }
}
