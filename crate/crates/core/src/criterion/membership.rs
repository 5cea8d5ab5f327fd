use rug::Float;
use serde::Serialize;

use super::recursion::theorem_eta;
use super::{at_least, centers, check_unit_interval, require_horizon, CriterionError, Verdict};
use crate::model::{Constant, Model};
use crate::numerics::{ser, ExtReal};

/// How the tested point `x` is chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum Candidate {
    /// `x = η·t_0` with `η = 1/(1 - βα)`.
    Theorem { alpha: Float, beta: Float },
    /// An explicit point.
    Fixed(Float),
    /// `x = s_N + δ·(1 - s_N)`.
    CenterBased { delta: Float },
}

impl Candidate {
    pub fn describe(&self) -> String {
        let t = ser::to_text;
        match self {
            Candidate::Theorem { alpha, beta } => {
                format!("theorem: x = eta*t_0, eta = 1/(1 - beta*alpha), alpha = {}, beta = {}", t(alpha), t(beta))
            }
            Candidate::Fixed(x) => format!("fixed: x = {}", t(x)),
            Candidate::CenterBased { delta } => format!("center-based: x = s_N + delta*(1 - s_N), delta = {}", t(delta)),
        }
    }
}

/// Centers, endpoint estimate and margins `Φ_n(x) - t_{n+1}` for `n < N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionReport {
    pub horizon: usize,
    pub precision: u32,
    #[serde(serialize_with = "ser::floats")]
    pub centers: Vec<Float>,
    #[serde(serialize_with = "ser::float")]
    pub x0_lower: Float,
    #[serde(serialize_with = "ser::float")]
    pub gap: Float,
    pub candidate_rule: String,
    #[serde(serialize_with = "ser::float")]
    pub candidate: Float,
    pub margins: Vec<ExtReal>,
    pub verdict: Verdict,
}

/// Semi-decision for the class condition `Φ_n(x) ≥ t_{n+1}` up to the
/// horizon. A failure is definitive for this candidate only; success is
/// evidence at the horizon.
pub fn check_class_membership(
    model: &Model,
    candidate: &Candidate,
    horizon: usize,
) -> Result<CriterionReport, CriterionError> {
    if horizon == 0 {
        return Err(CriterionError::HorizonTooSmall);
    }
    require_horizon(model, horizon)?;
    let prec = model.prec();
    let centers = centers(model, horizon)?;
    let x0_lower = centers[horizon].clone();
    let gap = Float::with_val(prec, 1 - &x0_lower);
    let x = match candidate {
        Candidate::Theorem { alpha, beta } => {
            let eta = theorem_eta(alpha, beta)?;
            let t0 = model.t_value(0).to_float().expect("t_0 is flat");
            Float::with_val(prec, eta * t0)
        }
        Candidate::Fixed(x) => Float::with_val(prec, x),
        Candidate::CenterBased { delta } => Float::with_val(prec, &x0_lower + Float::with_val(prec, delta * &gap)),
    };
    check_unit_interval(&x)?;
    let margins = margins(model, &x, horizon);
    let verdict = Verdict::from_margins(&margins);
    Ok(CriterionReport {
        horizon,
        precision: prec,
        centers,
        x0_lower,
        gap,
        candidate_rule: candidate.describe(),
        candidate: x,
        margins,
        verdict,
    })
}

fn margins(model: &Model, x: &Float, horizon: usize) -> Vec<ExtReal> {
    let mut v = ExtReal::from_float(x.clone());
    let mut out = Vec::with_capacity(horizon);
    for n in 0..horizon {
        v = model.level(n).phi_real(&v);
        out.push(v.sub(model.t_value(n + 1)));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotonicityRow {
    pub n: usize,
    pub x: ExtReal,
    pub x_prime: ExtReal,
    /// `x'_n ≥ x_n` up to the working tolerance.
    pub ordered: bool,
}

/// Orbits of the same `x_0` under constants `C` and `C' ≤ C`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub c: String,
    pub c_prime: String,
    #[serde(serialize_with = "ser::float")]
    pub x0: Float,
    pub horizon: usize,
    pub precision: u32,
    pub rows: Vec<MonotonicityRow>,
    pub all_ordered: bool,
    pub verdict: Verdict,
    pub verdict_prime: Verdict,
    /// Holding at `C` implies holding at `C'`.
    pub transfers: bool,
}

pub fn verify_monotonicity(
    model: &Model,
    c_prime: &Constant,
    x0: &Float,
    horizon: usize,
) -> Result<MonotonicityReport, CriterionError> {
    require_horizon(model, horizon)?;
    let prec = model.prec();
    let cp = c_prime.value(prec);
    if !(cp > 1 && cp <= *model.constant()) {
        return Err(CriterionError::InvalidConstantPair {
            c: model.params().constant().to_string(),
            c_prime: c_prime.to_string(),
        });
    }
    check_unit_interval(x0)?;
    let other = model.with_constant(c_prime.clone())?;
    let orbit = |m: &Model| {
        let mut xs = vec![ExtReal::from_float(Float::with_val(prec, x0))];
        for n in 0..horizon {
            let next = m.level(n).phi_real(xs.last().unwrap());
            xs.push(next);
        }
        xs
    };
    let xs = orbit(model);
    let xps = orbit(&other);
    let rows: Vec<MonotonicityRow> = xs
        .iter()
        .zip(&xps)
        .enumerate()
        .map(|(n, (x, xp))| MonotonicityRow { n, x: x.clone(), x_prime: xp.clone(), ordered: at_least(xp, x) })
        .collect();
    let margin_at = |m: &Model, orbit: &[ExtReal]| {
        let margins: Vec<ExtReal> = (0..horizon).map(|n| orbit[n + 1].sub(m.t_value(n + 1))).collect();
        Verdict::from_margins(&margins)
    };
    let verdict = margin_at(model, &xs);
    let verdict_prime = margin_at(&other, &xps);
    Ok(MonotonicityReport {
        c: model.params().constant().to_string(),
        c_prime: c_prime.to_string(),
        x0: Float::with_val(prec, x0),
        horizon,
        precision: prec,
        all_ordered: rows.iter().all(|r| r.ordered),
        rows,
        verdict,
        verdict_prime,
        transfers: !verdict.holds() || verdict_prime.holds(),
    })
}
