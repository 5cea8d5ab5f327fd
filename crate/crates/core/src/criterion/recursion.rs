use rug::Float;
use serde::Serialize;

use super::{at_least, relative_tolerance, require_horizon, CriterionError};
use crate::model::Model;
use crate::numerics::{log_ratio, ser, ExtReal};

/// `η = 1/(1 - βα)` after checking `0 < α < 1` and `1 < β < 1/α`.
pub fn theorem_eta(alpha: &Float, beta: &Float) -> Result<Float, CriterionError> {
    let prec = alpha.prec().max(beta.prec());
    let ab = Float::with_val(prec, alpha * beta);
    if !(*alpha > 0 && *alpha < 1 && *beta > 1 && ab < 1) {
        return Err(CriterionError::InvalidAlphaBeta { alpha: ser::to_text(alpha), beta: ser::to_text(beta) });
    }
    Ok(Float::with_val(prec, 1 - ab).recip())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecursionRow {
    pub n: usize,
    pub x: ExtReal,
    pub eta_t: ExtReal,
    /// `x_n ≥ η·t_n`.
    pub bound_holds: bool,
    /// `q_n·ln(β/(1 - t_n)) - ln(Cη)`; the side condition holds when this is
    /// non-negative.
    pub side_margin: ExtReal,
    pub side_holds: bool,
    /// `p_{n+1}/q_{n+1} ≤ α^{q_n}`, absent at the last level.
    pub hypothesis_holds: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecursionReport {
    #[serde(serialize_with = "ser::float")]
    pub alpha: Float,
    #[serde(serialize_with = "ser::float")]
    pub beta: Float,
    #[serde(serialize_with = "ser::float")]
    pub eta: Float,
    pub horizon: usize,
    pub precision: u32,
    pub rows: Vec<RecursionRow>,
    pub all_bounds_hold: bool,
    pub hypothesis_violations: Vec<usize>,
    pub side_violations: Vec<usize>,
}

impl RecursionReport {
    /// Every bound, side condition and hypothesis holds.
    pub fn passes(&self) -> bool {
        self.all_bounds_hold && self.hypothesis_violations.is_empty() && self.side_violations.is_empty()
    }
}

/// Iterates `x_0 = η·t_0`, `x_{n+1} = ((1 - t_n/x_n)/(1 - t_n))^{q_n}` and
/// checks `x_n ≥ η·t_n`, the side condition `(β/(1 - t_n))^{q_n} ≥ Cη` and
/// the ratio hypothesis at each level. Failed hypotheses are reported, not
/// raised.
pub fn verify_theorem_recursion(
    model: &Model,
    alpha: &Float,
    beta: &Float,
    horizon: usize,
) -> Result<RecursionReport, CriterionError> {
    require_horizon(model, horizon)?;
    let prec = model.prec();
    let eta = theorem_eta(alpha, beta)?;
    let eta_x = ExtReal::from_float(Float::with_val(prec, &eta));
    let ln_beta = ExtReal::from_float(Float::with_val(prec, beta.ln_ref()));
    let ln_alpha = ExtReal::from_float(Float::with_val(prec, alpha.ln_ref()));
    let ln_c_eta = ExtReal::from_float(Float::with_val(prec, model.constant() * &eta).ln());
    let tol = ExtReal::from_float(relative_tolerance(prec));

    let mut rows = Vec::with_capacity(horizon + 1);
    let mut x = eta_x.mul(model.t_value(0));
    for n in 0..=horizon {
        let level = model.level(n);
        let t = level.t();
        let eta_t = eta_x.mul(t);
        // ln(β/(1 - t)) = ln β + t·S(t), accurate for the tiniest t.
        let side_margin = level.q().value(prec).mul(&ln_beta.add(&t.mul(&log_ratio(t)))).sub(&ln_c_eta);
        // Divided by q_n: ln p_{n+1}/q_n - ln q_{n+1}/q_n ≤ ln α.
        let hypothesis_holds = (n < horizon).then(|| {
            let next = model.level(n + 1).rotation();
            let q = level.q();
            let ln_p = ExtReal::from_float(Float::with_val(prec, next.p()).ln());
            let lhs = ln_p.div(&q.value(prec)).sub(&next.q().ln_over(q, prec));
            lhs <= ln_alpha.add(&tol)
        });
        rows.push(RecursionRow {
            n,
            bound_holds: at_least(&x, &eta_t),
            x: x.clone(),
            eta_t,
            side_holds: !side_margin.is_neg(),
            side_margin,
            hypothesis_holds,
        });
        if n < horizon {
            x = level.phi_real(&x);
        }
    }
    Ok(RecursionReport {
        alpha: Float::with_val(prec, alpha),
        beta: Float::with_val(prec, beta),
        eta,
        horizon,
        precision: prec,
        all_bounds_hold: rows.iter().all(|r| r.bound_holds),
        hypothesis_violations: rows.iter().filter(|r| r.hypothesis_holds == Some(false)).map(|r| r.n).collect(),
        side_violations: rows.iter().filter(|r| !r.side_holds).map(|r| r.n).collect(),
        rows,
    })
}
