use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::float::Constant as FloatConstant;
use rug::ops::Pow;
use rug::Float;
use serde::Serialize;

use super::{relative_tolerance, require_horizon, CriterionError};
use crate::combinatorics::{address_of, AddressError};
use crate::model::{moebius_apply, moebius_preimage_disk, Constant, Model, ModelParams};
use crate::numerics::{ser, to_log_polar, ExtReal, LogPolar, Rect};

/// Uniform point of the closed unit disk as (radius, angle) draws.
fn disk_draw(rng: &mut ChaCha8Rng) -> (f64, f64) {
    (rng.gen::<f64>().sqrt(), rng.gen_range(-std::f64::consts::PI..=std::f64::consts::PI))
}

fn polar_rect(r: &Float, theta: &Float) -> Rect {
    let prec = r.prec();
    let (s, c) = Float::with_val(prec, theta).sin_cos(Float::new(prec));
    Rect::new(Float::with_val(prec, r * &c), Float::with_val(prec, r * &s))
}

/// `M_t^{-1}(v) = t/(1 - v(1 - t))`.
fn moebius_inverse(t: &Float, v: &Rect) -> Option<Rect> {
    let prec = t.prec();
    let omt = Float::with_val(prec, 1 - t);
    let re = Float::with_val(prec, 1 - Float::with_val(prec, &v.re * &omt));
    let im = Float::with_val(prec, -Float::with_val(prec, &v.im * &omt));
    Rect::new(t.clone(), Float::new(prec)).div(&Rect::new(re, im))
}

/// Principal `q`-th root.
fn principal_root(z: &Rect, q: u64) -> Rect {
    let prec = z.prec();
    let r = z.abs();
    if r.is_zero() {
        return Rect::new(Float::new(prec), Float::new(prec));
    }
    let root_r = Float::with_val(prec, r.ln() / q).exp();
    let theta = Float::with_val(prec, z.arg() / q);
    polar_rect(&root_r, &theta)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SectorViolation {
    pub re: String,
    pub im: String,
    pub arg: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SectorReport {
    pub n: usize,
    pub constant: String,
    /// `C < π`, outside the range where the bound is known to hold; the run
    /// only records what it finds.
    pub exploratory: bool,
    #[serde(serialize_with = "ser::float")]
    pub bound: Float,
    pub drawn: usize,
    pub verified: usize,
    /// Largest `|arg z|` over verified points.
    pub max_arg: f64,
    pub violations: Vec<SectorViolation>,
}

/// A candidate of `K_{n,0}` from `v = M_n(z_n)`, pulled back through the
/// principal branches, kept only if its forward address is all zeros.
fn sector_sample(model: &Model, ts: &[Float], qs: &[u64], n: usize, draw: (f64, f64)) -> Option<Rect> {
    let prec = model.prec();
    let v = polar_rect(&Float::with_val(prec, draw.0), &Float::with_val(prec, draw.1));
    let mut z = moebius_inverse(&ts[n], &v)?;
    for j in (0..n).rev() {
        z = moebius_inverse(&ts[j], &principal_root(&z, qs[j]))?;
    }
    let address = address_of(model, &to_log_polar(&z), n).ok()?;
    address.is_zero().then_some(z)
}

/// Samples `K_{n,0}`, the points of `K_n` with address `(0, …, 0)`, and
/// checks `|arg z| ≤ (π/2)(π/C)^n` up to `tolerance`. Draws continue until
/// `samples` points are verified or ten times that many were drawn.
pub fn check_sector_bound(
    model: &Model,
    n: usize,
    samples: usize,
    seed: u64,
    tolerance: &Float,
) -> Result<SectorReport, CriterionError> {
    require_horizon(model, n)?;
    let prec = model.prec();
    let pi = Float::with_val(prec, FloatConstant::Pi);
    let c = model.constant();
    let ratio = Float::with_val(prec, &pi / c);
    let bound = Float::with_val(prec, &pi / 2u32) * Float::with_val(prec, (&ratio).pow(n as u32));
    let limit = Float::with_val(prec, &bound + tolerance);
    let ts: Vec<Float> = (0..=n).map(|j| model.t_value(j).to_float().expect("t_j is flat")).collect();
    let qs: Vec<u64> = (0..n)
        .map(|j| model.level(j).q().to_u64().ok_or(AddressError::ModulusTooLarge { level: j }))
        .collect::<Result<_, _>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut drawn = 0;
    let mut verified = 0;
    let mut max_arg = 0f64;
    let mut violations = Vec::new();
    while verified < samples && drawn < samples.saturating_mul(10) {
        let batch: Vec<(f64, f64)> = (0..samples - verified).map(|_| disk_draw(&mut rng)).collect();
        drawn += batch.len();
        let points: Vec<Option<Rect>> = batch.par_iter().map(|&d| sector_sample(model, &ts, &qs, n, d)).collect();
        for z in points.into_iter().flatten() {
            verified += 1;
            let arg = z.arg().abs();
            max_arg = max_arg.max(arg.to_f64());
            if arg > limit {
                violations.push(SectorViolation {
                    re: ser::to_text(&z.re),
                    im: ser::to_text(&z.im),
                    arg: arg.to_f64(),
                });
            }
        }
    }
    Ok(SectorReport {
        n,
        constant: model.params().constant().to_string(),
        exploratory: *c < pi,
        bound,
        drawn,
        verified,
        max_arg,
        violations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArgViolation {
    pub inequality: &'static str,
    pub re: f64,
    pub im: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArgReport {
    pub constant: String,
    pub q: u64,
    #[serde(serialize_with = "ser::float")]
    pub t: Float,
    pub samples: usize,
    /// Smallest `|arg φ(z)| / (C|Im z|/(2|z|²))`; above 1 when the lower
    /// bound holds everywhere.
    pub min_lower_ratio: f64,
    /// Largest `|arg z| / ((π/C)|arg φ(z)||z|)`; at most 1 when the upper
    /// bound holds everywhere.
    pub max_upper_ratio: f64,
    pub violations: Vec<ArgViolation>,
}

/// `arg φ(z) = q·(Arg(z - t) - Arg z)`: the argument of the power followed
/// continuously from the real axis rather than reduced mod 2π. For
/// `Re z ≥ t` the difference lies in `(-π/2, π/2)`.
pub fn lifted_arg(z: &Rect, t: &Float, q: u64) -> Float {
    let prec = z.prec();
    let shifted = Rect::new(Float::with_val(prec, &z.re - t), z.im.clone());
    Float::with_val(prec, shifted.arg() - z.arg()) * q
}

/// For `t = C/q` and random `z` with `|z| ≤ 1`, `Re z ≥ t`, `Im z ≠ 0`,
/// checks `|arg φ(z)| > C|Im z|/(2|z|²)` and
/// `|arg z| ≤ (π/C)|arg φ(z)||z|` up to the relative tolerance `2^-(P/2)`.
pub fn check_arg_inequality(
    c: &Constant,
    q: u64,
    samples: usize,
    seed: u64,
    prec: u32,
) -> Result<ArgReport, CriterionError> {
    let params = ModelParams::fractions(c.clone(), &[(1, q)])?;
    let t = params.t_value(0, prec)?.to_float().expect("t is flat");
    let cf = c.value(prec);
    let pi = Float::with_val(prec, FloatConstant::Pi);
    let tol = relative_tolerance(prec);
    let t64 = t.to_f64();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws = Vec::with_capacity(samples);
    while draws.len() < samples {
        let x: f64 = rng.gen_range(t64..=1.0);
        let y: f64 = rng.gen_range(-1.0..=1.0);
        if x * x + y * y <= 1.0 && y != 0.0 && x >= t64 {
            draws.push((x, y));
        }
    }
    let rows: Vec<(f64, f64, Vec<ArgViolation>)> = draws
        .par_iter()
        .map(|&(x, y)| {
            let z = Rect::from_f64(x, y, prec);
            let mut found = Vec::new();
            if z.re < t {
                // Rounding of the lower end; the point is not admissible.
                return (f64::INFINITY, 0.0, found);
            }
            let phi_arg = lifted_arg(&z, &t, q).abs();
            let r2 = z.norm_sqr();
            let r = z.abs();
            let lower = Float::with_val(prec, &cf * z.im.clone().abs()) / Float::with_val(prec, &r2 * 2u32);
            let upper = Float::with_val(prec, &pi / &cf) * &phi_arg * &r;
            let arg_z = z.arg().abs();
            if phi_arg < Float::with_val(prec, &lower * Float::with_val(prec, 1 - &tol)) {
                found.push(ArgViolation {
                    inequality: "lower",
                    re: x,
                    im: y,
                    lhs: phi_arg.to_f64(),
                    rhs: lower.to_f64(),
                });
            }
            if arg_z > Float::with_val(prec, &upper * Float::with_val(prec, 1 + &tol)) {
                found.push(ArgViolation { inequality: "upper", re: x, im: y, lhs: arg_z.to_f64(), rhs: upper.to_f64() });
            }
            let lower_ratio = Float::with_val(prec, &phi_arg / &lower).to_f64();
            let upper_ratio = Float::with_val(prec, &arg_z / &upper).to_f64();
            (lower_ratio, upper_ratio, found)
        })
        .collect();
    let mut min_lower_ratio = f64::INFINITY;
    let mut max_upper_ratio = 0f64;
    let mut violations = Vec::new();
    for (lo, up, v) in rows {
        min_lower_ratio = min_lower_ratio.min(lo);
        max_upper_ratio = max_upper_ratio.max(up);
        violations.extend(v);
    }
    Ok(ArgReport { constant: c.to_string(), q, t, samples, min_lower_ratio, max_upper_ratio, violations })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiskReport {
    pub t_samples: usize,
    pub points_per_t: usize,
    pub precision: u32,
    /// Largest `||M_t(z)| - 1|` over all boundary points.
    pub max_deviation: f64,
    pub tolerance: f64,
    pub violations: usize,
}

/// For random `t ∈ (0.01, 0.99)`, maps points of the circle on the diameter
/// `[t/(2-t), 1]` through `M_t` and measures `||M_t(z)| - 1|`.
pub fn check_disk_preimage(
    t_samples: usize,
    points_per_t: usize,
    seed: u64,
    prec: u32,
    tolerance: f64,
) -> DiskReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ts: Vec<f64> = (0..t_samples).map(|_| rng.gen_range(0.01..0.99)).collect();
    let deviations: Vec<f64> = ts
        .par_iter()
        .map(|&tf| {
            let t = Float::with_val(prec, tf);
            let (center, radius) = moebius_preimage_disk(&t);
            let t_ext = ExtReal::from_float(t);
            let two_pi = Float::with_val(prec, FloatConstant::Pi) * 2u32;
            (0..points_per_t)
                .map(|k| {
                    let theta = Float::with_val(prec, &two_pi * k as u32) / points_per_t as u32;
                    let w = polar_rect(&radius, &theta);
                    let z = Rect::new(Float::with_val(prec, &center + &w.re), w.im);
                    match moebius_apply(&t_ext, &to_log_polar(&z)) {
                        LogPolar::Finite { log_r, .. } => {
                            log_r.to_float().map_or(f64::INFINITY, |l| l.exp_m1().abs().to_f64())
                        }
                        _ => f64::INFINITY,
                    }
                })
                .fold(0f64, f64::max)
        })
        .collect();
    let max_deviation = deviations.iter().copied().fold(0f64, f64::max);
    let violations = deviations.iter().filter(|&&d| d > tolerance).count();
    DiskReport { t_samples, points_per_t, precision: prec, max_deviation, tolerance, violations }
}
