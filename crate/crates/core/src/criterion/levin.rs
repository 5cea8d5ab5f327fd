use rug::Float;
use serde::Serialize;

use super::CriterionError;
use crate::model::ModelParams;
use crate::numerics::ExtReal;

/// Default margin below 1 for the Levin threshold.
pub const DEFAULT_LEVIN_DELTA: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevinValue {
    pub n: usize,
    /// `(p_{n+1}/q_{n+1})^{1/q_n}`.
    pub v: ExtReal,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevinReport {
    pub window: (usize, usize),
    pub delta: f64,
    pub precision: u32,
    pub values: Vec<LevinValue>,
    pub sup: ExtReal,
    pub argsup: usize,
    /// `sup < 1 - δ` over the window. A finite window cannot certify the
    /// limit superior, hence the margin.
    pub satisfied: bool,
    /// Levels where `q_{n+1} ≤ q_n`: the denominators do not tend to infinity
    /// there, which the explicit recursion bound assumes. Flagged only.
    pub non_growing: Vec<usize>,
}

/// Levin values over `n0..=n1`. The logarithm `ln q_{n+1} / q_n` is taken
/// structurally, so a tower step `q_{n+1} = m^{q_n}` contributes exactly
/// `ln m`.
pub fn check_levin(
    params: &ModelParams,
    n0: usize,
    n1: usize,
    delta: f64,
    prec: u32,
) -> Result<LevinReport, CriterionError> {
    if n0 > n1 {
        return Err(CriterionError::EmptyWindow(n0, n1));
    }
    let rotations = params.rotations(n1 + 2)?;
    let mut values = Vec::with_capacity(n1 - n0 + 1);
    let mut non_growing = Vec::new();
    for n in n0..=n1 {
        let (cur, next) = (&rotations[n], &rotations[n + 1]);
        let ln_p = ExtReal::from_float(Float::with_val(prec, next.p()).ln());
        let exponent = ln_p.div(&cur.q().value(prec)).sub(&next.q().ln_over(cur.q(), prec));
        values.push(LevinValue { n, v: exponent.exp() });
        if next.q().ln(prec) <= cur.q().ln(prec) {
            non_growing.push(n);
        }
    }
    let (argsup, sup) = values
        .iter()
        .map(|lv| (lv.n, lv.v.clone()))
        .reduce(|a, b| if b.1 > a.1 { b } else { a })
        .expect("window is non-empty");
    let threshold = ExtReal::from_f64(1.0 - delta, prec);
    Ok(LevinReport {
        window: (n0, n1),
        delta,
        precision: prec,
        satisfied: sup < threshold,
        sup,
        argsup,
        values,
        non_growing,
    })
}
