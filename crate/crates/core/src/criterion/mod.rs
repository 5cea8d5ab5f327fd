//! Real-axis computations and verdicts: the centers `s_n`, the endpoint
//! estimate `x_0`, class-membership margins, the Levin values, the explicit
//! recursion bound, the monotonicity in `C`, and sampling validators for the
//! sector and argument bounds.
//!
//! Every verdict here is bounded by a finite horizon. A positive margin or a
//! positive gap is model-level evidence, never a proof about the limit.

mod bounds;
mod centers;
mod levin;
mod membership;
mod recursion;

pub use bounds::{
    check_arg_inequality, check_disk_preimage, check_sector_bound, lifted_arg, ArgReport, ArgViolation, DiskReport, SectorReport,
    SectorViolation,
};
pub use centers::{centers, estimate_x0, solve_center, X0Estimate};
pub use levin::{check_levin, LevinReport, LevinValue, DEFAULT_LEVIN_DELTA};
pub use membership::{
    check_class_membership, verify_monotonicity, Candidate, CriterionReport, MonotonicityReport, MonotonicityRow,
};
pub use recursion::{theorem_eta, verify_theorem_recursion, RecursionReport, RecursionRow};

use rug::Float;
use serde::Serialize;
use thiserror::Error;

use crate::combinatorics::AddressError;
use crate::model::{Model, ModelError};
use crate::numerics::{ExtReal, NumericError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CriterionError {
    #[error("no sign change: t_{n} is outside the image of the bracket for s_{n}")]
    NoSignChange { n: usize },
    #[error("candidate x = {0} is outside (0,1)")]
    CandidateOutOfRange(String),
    #[error("need 0 < alpha < 1 and 1 < beta < 1/alpha (got alpha = {alpha}, beta = {beta})")]
    InvalidAlphaBeta { alpha: String, beta: String },
    #[error("need 1 < C' <= C (got C = {c}, C' = {c_prime})")]
    InvalidConstantPair { c: String, c_prime: String },
    #[error("horizon {needed} exceeds the {resolved} levels resolved by the model")]
    HorizonTooLarge { needed: usize, resolved: usize },
    #[error("horizon must be at least 1")]
    HorizonTooSmall,
    #[error("empty window [{0}, {1}]")]
    EmptyWindow(usize, usize),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Address(#[from] AddressError),
}

/// Outcome of a finite-horizon test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "level", rename_all = "snake_case")]
pub enum Verdict {
    HoldsToHorizon,
    FailsAt(usize),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::HoldsToHorizon)
    }

    fn from_margins(margins: &[ExtReal]) -> Verdict {
        match margins.iter().position(|m| m.is_neg()) {
            Some(n) => Verdict::FailsAt(n),
            None => Verdict::HoldsToHorizon,
        }
    }
}

/// Relative tolerance `2^-(prec/2)` used by every comparison that must
/// absorb rounding.
pub fn relative_tolerance(prec: u32) -> Float {
    Float::with_val(prec, Float::i_exp(1, -((prec / 2) as i32)))
}

/// `a >= b` up to the relative tolerance of the working precision.
fn at_least(a: &ExtReal, b: &ExtReal) -> bool {
    if a >= b {
        return true;
    }
    let slack = b.abs().mul_float(&relative_tolerance(b.prec().max(a.prec())));
    a >= &b.sub(&slack)
}

fn require_horizon(model: &Model, horizon: usize) -> Result<(), CriterionError> {
    if horizon > model.horizon() {
        return Err(CriterionError::HorizonTooLarge { needed: horizon, resolved: model.horizon() });
    }
    Ok(())
}

fn check_unit_interval(x: &Float) -> Result<(), CriterionError> {
    if *x > 0 && *x < 1 {
        Ok(())
    } else {
        Err(CriterionError::CandidateOutOfRange(crate::numerics::ser::to_text(x)))
    }
}
