//! The model: rotation sequences, Möbius maps `M_n`, level maps
//! `φ_n = M_n^{q_n}`, their compositions `Φ_n`, and escape depths.

mod level;
mod params;

pub use level::Level;
pub use params::{Constant, Denominator, Extension, GrowthRule, ModelParams, RotationNumber, EXACT_BITS_MAX};

use rug::Float;
use serde::Serialize;
use thiserror::Error;

use crate::numerics::{auto_precision, disk_tolerance, ExtReal, LogPolar, NumericError, Rect};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("C must exceed 1 (got {0})")]
    ConstantTooSmall(String),
    #[error("invalid constant {0:?}")]
    InvalidConstant(String),
    #[error("invalid fraction {0:?}, expected p/q")]
    InvalidFraction(String),
    #[error("fraction {0} must lie in (0,1)")]
    FractionOutOfRange(String),
    #[error("fraction {0} is not reduced")]
    NotReduced(String),
    #[error("the rotation sequence is empty")]
    EmptySequence,
    #[error("{needed} rotation numbers needed but only {available} given")]
    SequenceTooShort { needed: usize, available: usize },
    #[error("q_{n} is too large for this growth rule")]
    DenominatorOverflow { n: usize },
    #[error("t_{n} = C*p_{n}/q_{n} = {t} not in (0,1)")]
    TOutOfRange { n: usize, t: f64 },
    #[error("rotation number {n}: {source}")]
    At { n: usize, source: Box<ModelError> },
}

impl ModelError {
    fn at(self, n: usize) -> ModelError {
        ModelError::At { n, source: Box::new(self) }
    }
}

/// Escape depth of a point: the first `n` with `Φ_n(z)` outside the closed
/// disk, or survival through the horizon. A point outside the disk escapes
/// at 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "depth", rename_all = "lowercase")]
pub enum Depth {
    Escaped(usize),
    Survived(usize),
}

impl Depth {
    /// `z ∈ K_n`.
    pub fn in_level(&self, n: usize) -> bool {
        match *self {
            Depth::Escaped(d) => d > n,
            Depth::Survived(h) => n <= h,
        }
    }

    /// Number of sets `K_0, K_1, ...` containing the point.
    pub fn levels_survived(&self) -> usize {
        match *self {
            Depth::Escaped(d) => d,
            Depth::Survived(h) => h + 1,
        }
    }
}

/// In-disk orbit values `z_0 = z, z_{k+1} = φ_k(z_k)`. The escaping value
/// itself is not kept.
#[derive(Clone, Debug)]
pub struct EscapeTrace {
    pub levels: Vec<LogPolar>,
    pub depth: Depth,
}

/// Parameters resolved at a working precision for levels `0..=horizon`.
#[derive(Clone, Debug)]
pub struct Model {
    params: ModelParams,
    prec: u32,
    c: Float,
    eps: ExtReal,
    levels: Vec<Level>,
}

impl Model {
    pub fn new(params: &ModelParams, prec: u32, horizon: usize) -> Result<Model, ModelError> {
        let rotations = params.rotations(horizon + 1)?;
        let c = params.constant().value(prec);
        let eps = disk_tolerance(prec);
        let levels = rotations
            .into_iter()
            .enumerate()
            .map(|(n, r)| {
                let t = params::t_of(params.constant(), &r, n, prec)?;
                Ok(Level::new(n, r, t, &c, &eps))
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        Ok(Model { params: params.clone(), prec, c, eps, levels })
    }

    /// Precision `64 + Σ_{k<horizon} log2 q_k`, capped.
    pub fn auto_precision(params: &ModelParams, horizon: usize) -> Result<u32, ModelError> {
        let r = params.rotations(horizon + 1)?;
        Ok(auto_precision(r[..horizon].iter().map(|r| r.q().log2())))
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn horizon(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn constant(&self) -> &Float {
        &self.c
    }

    /// Membership tolerance on `log_r`.
    pub fn tolerance(&self) -> &ExtReal {
        &self.eps
    }

    pub fn level(&self, n: usize) -> &Level {
        &self.levels[n]
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn t_value(&self, n: usize) -> &ExtReal {
        self.levels[n].t()
    }

    /// Same sequence, different constant.
    pub fn with_constant(&self, c: Constant) -> Result<Model, ModelError> {
        Model::new(&self.params.with_constant(c)?, self.prec, self.horizon())
    }

    pub fn phi_apply(&self, n: usize, z: &LogPolar) -> Result<LogPolar, NumericError> {
        self.levels[n].phi(z)
    }

    /// `Φ_n(x)` for real `x`.
    pub fn phi_real(&self, n: usize, x: &ExtReal) -> ExtReal {
        let mut v = x.clone();
        for level in &self.levels[..=n] {
            v = level.phi_real(&v);
        }
        v
    }

    /// Escape trace through levels `0..=horizon`.
    pub fn orbit(&self, z: &LogPolar, horizon: usize) -> Result<EscapeTrace, NumericError> {
        assert!(horizon <= self.horizon(), "horizon {horizon} beyond the resolved levels");
        if !z.in_closed_disk(&self.eps) {
            return Ok(EscapeTrace { levels: Vec::new(), depth: Depth::Escaped(0) });
        }
        let mut levels = vec![z.clone()];
        for n in 0..=horizon {
            match self.levels[n].phi_bounded(levels.last().unwrap(), &self.eps)? {
                Some(next) => levels.push(next),
                None => return Ok(EscapeTrace { levels, depth: Depth::Escaped(n) }),
            }
        }
        Ok(EscapeTrace { levels, depth: Depth::Survived(horizon) })
    }

    /// Escape depth of a rectangular point without keeping the trace. The
    /// first level runs on the rectangular coordinates, which spares the
    /// initial logarithm and arctangent for points that escape at once.
    pub fn escape_depth(&self, z: &Rect, horizon: usize) -> Result<Depth, NumericError> {
        assert!(horizon <= self.horizon(), "horizon {horizon} beyond the resolved levels");
        let prec = self.prec;
        if z.im.is_zero() {
            return Ok(self.orbit(&crate::numerics::to_log_polar(z), horizon)?.depth);
        }
        let level = &self.levels[0];
        let t = level.t().to_float().expect("t_0 is flat");
        let r2 = z.norm_sqr();
        let two_eps = self.eps.to_float().unwrap() * 2u32;
        if r2.is_zero() || r2 > Float::with_val(prec, two_eps.exp_ref()) {
            return Ok(Depth::Escaped(0));
        }
        // (z - t)·conj(z) = ((x-t)x + y², t·y); |M|² = that over (|z|²(1-t))².
        let dx = Float::with_val(prec, &z.re - &t);
        let re = Float::with_val(prec, &dx * &z.re) + Float::with_val(prec, z.im.square_ref());
        let im = Float::with_val(prec, &t * &z.im);
        let d2 = Float::with_val(prec, dx.square_ref()) + Float::with_val(prec, z.im.square_ref());
        let omt = Float::with_val(prec, 1) - &t;
        let z1 = {
            let ratio = Float::with_val(prec, &d2 / &r2);
            if ratio > *level.escape_sq() {
                return Ok(Depth::Escaped(0));
            }
            let m2 = ratio / Float::with_val(prec, omt.square_ref());
            // log|φ_0| = (q/2)·ln|M|²
            let q = level.q().value(prec);
            let log_r = q.mul(&ExtReal::from_float(m2.ln() / 2u32));
            if &log_r > self.tolerance() {
                return Ok(Depth::Escaped(0));
            }
            let k = level.q().exact().filter(|q| q.significant_bits() <= prec).ok_or(
                NumericError::ArgumentPrecision { level: 0, bits: level.q().log2().ceil() as u64, prec },
            )?;
            let arg = crate::numerics::Angle::from_radians(&Float::with_val(prec, im.atan2_ref(&re))).times(k);
            LogPolar::Finite { log_r, arg }
        };
        let mut cur = z1;
        for n in 1..=horizon {
            match self.levels[n].phi_bounded(&cur, &self.eps)? {
                Some(next) => cur = next,
                None => return Ok(Depth::Escaped(n)),
            }
        }
        Ok(Depth::Survived(horizon))
    }
}

/// `M_t(z) = (1 - t/z)/(1 - t)`, with `M(0) = ∞` and `M(∞) = 1/(1-t)`.
pub fn moebius_apply(t: &ExtReal, z: &LogPolar) -> LogPolar {
    let prec = t.prec();
    let r = RotationNumber::new(1, 2).expect("1/2 is reduced");
    let level = Level::new(0, r, t.clone(), &Float::with_val(prec, 1), &disk_tolerance(prec));
    level.moebius(z)
}

/// Center and radius of `M_t^{-1}(closed disk)`, the disk on the diameter
/// `[t/(2-t), 1]`.
pub fn moebius_preimage_disk(t: &Float) -> (Float, Float) {
    let prec = t.prec();
    let left = Float::with_val(prec, t / Float::with_val(prec, 2 - t.clone()));
    let center = Float::with_val(prec, Float::with_val(prec, 1 + &left) / 2u32);
    let radius = Float::with_val(prec, Float::with_val(prec, 1 - &left) / 2u32);
    (center, radius)
}

#[cfg(test)]
mod tests;
