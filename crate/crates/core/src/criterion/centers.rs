use rug::Float;
use serde::Serialize;

use super::{require_horizon, CriterionError};
use crate::model::Model;
use crate::numerics::{ser, ExtReal};

/// `s_n`: the point of `(s_{n-1}, 1)` where `Φ_{n-1}` takes the value `t_n`,
/// found by bisection down to adjacent floating-point numbers. `Φ_{n-1}` is
/// increasing on the bracket and its slope spans hundreds of orders of
/// magnitude, so bisection is the robust choice. Returns the upper end of
/// the final bracket, which keeps the centers strictly increasing. When the
/// root is already within one ulp of `s_{n-1}` the next float is returned.
pub fn solve_center(model: &Model, n: usize, prev: &Float) -> Result<Float, CriterionError> {
    assert!(n >= 1, "s_0 = t_0 needs no solve");
    require_horizon(model, n)?;
    let prec = model.prec();
    let target = model.t_value(n);
    let f = |x: &Float| model.phi_real(n - 1, &ExtReal::from_float(x.clone()));
    let mut lo = Float::with_val(prec, prev);
    let mut hi = Float::with_val(prec, 1);
    if &f(&hi) < target {
        return Err(CriterionError::NoSignChange { n });
    }
    if &f(&lo) >= target {
        lo.next_up();
        return Ok(lo);
    }
    loop {
        let mid = Float::with_val(prec, &lo + &hi) / 2u32;
        if mid <= lo || mid >= hi {
            return Ok(hi);
        }
        if &f(&mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// `s_0, …, s_horizon` with `s_0 = t_0`.
pub fn centers(model: &Model, horizon: usize) -> Result<Vec<Float>, CriterionError> {
    require_horizon(model, horizon)?;
    let s0 = model.t_value(0).to_float().expect("t_0 is a flat number in (0,1)");
    let mut out = vec![s0];
    for n in 1..=horizon {
        let s = solve_center(model, n, out.last().unwrap())?;
        out.push(s);
    }
    Ok(out)
}

/// Lower estimate of `x_0 = lim s_n` and the length of the critical segment
/// `[s_N, 1]` at horizon `N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct X0Estimate {
    pub horizon: usize,
    pub precision: u32,
    #[serde(serialize_with = "ser::floats")]
    pub centers: Vec<Float>,
    #[serde(serialize_with = "ser::float")]
    pub x0_lower: Float,
    #[serde(serialize_with = "ser::float")]
    pub gap: Float,
    /// `s_{n+1} - s_n`, for judging convergence.
    #[serde(serialize_with = "ser::floats")]
    pub increments: Vec<Float>,
}

pub fn estimate_x0(model: &Model, horizon: usize) -> Result<X0Estimate, CriterionError> {
    if horizon == 0 {
        return Err(CriterionError::HorizonTooSmall);
    }
    let centers = centers(model, horizon)?;
    let prec = model.prec();
    let x0_lower = centers[horizon].clone();
    let gap = Float::with_val(prec, 1 - &x0_lower);
    let increments = centers.windows(2).map(|w| Float::with_val(prec, &w[1] - &w[0])).collect();
    Ok(X0Estimate { horizon, precision: prec, centers, x0_lower, gap, increments })
}
