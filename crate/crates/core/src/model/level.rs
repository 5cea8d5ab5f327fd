//! One level of the model: the Möbius map `M(z) = (1 - t/z)/(1 - t)` and its
//! power `φ = M^q`, evaluated in log-polar form.

use rug::float::Constant as FloatConstant;
use rug::{Float, Integer};

use super::params::{Denominator, RotationNumber};
use crate::numerics::{log_ratio, Angle, ExtReal, LogPolar, NumericError};

#[derive(Clone, Debug)]
pub struct Level {
    index: usize,
    rotation: RotationNumber,
    prec: u32,
    t: ExtReal,
    ln_t: ExtReal,
    /// `S(t) = -ln(1-t)/t`
    s_t: ExtReal,
    /// `C·p`, equal to `q·t`
    a: ExtReal,
    q: ExtReal,
    /// Squared `|1 - u|` above which `|φ|` certainly exceeds the disk
    /// tolerance; saves transcendental calls for escaping points.
    escape_sq: Float,
}

/// Which power of `M` to take.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Power {
    One,
    Q,
}

impl Level {
    pub(crate) fn new(index: usize, rotation: RotationNumber, t: ExtReal, c: &Float, eps: &ExtReal) -> Level {
        let prec = t.prec();
        let ln_t = t.ln_abs().expect("t > 0");
        let s_t = log_ratio(&t);
        let a = ExtReal::from_float(Float::with_val(prec, c * rotation.p()));
        let q = rotation.q().value(prec);
        // |1-u|^2 ≤ (1-t)^2 exp(2ε/q), widened by 2^-(prec/4).
        let one_minus_t = ExtReal::one(prec).sub(&t);
        let base = one_minus_t.to_float().unwrap_or_else(|| Float::with_val(prec, 1));
        let slack = eps.mul(&ExtReal::from_f64(2.0, prec)).div(&q).to_float_saturating(prec).exp();
        let widen = Float::with_val(prec, 1) + Float::with_val(prec, Float::i_exp(1, -((prec / 4) as i32)));
        let escape_sq = Float::with_val(prec, base.square_ref()) * slack * widen;
        Level { index, rotation, prec, t, ln_t, s_t, a, q, escape_sq }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn rotation(&self) -> &RotationNumber {
        &self.rotation
    }

    pub fn t(&self) -> &ExtReal {
        &self.t
    }

    pub fn q(&self) -> &Denominator {
        self.rotation.q()
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub(crate) fn escape_sq(&self) -> &Float {
        &self.escape_sq
    }

    /// `M(z)`.
    pub fn moebius(&self, z: &LogPolar) -> LogPolar {
        self.image(z, Power::One, None)
            .expect("q = 1 never loses the argument")
            .expect("unbounded image")
    }

    /// `φ(z) = M(z)^q`.
    pub fn phi(&self, z: &LogPolar) -> Result<LogPolar, NumericError> {
        Ok(self.image(z, Power::Q, None)?.expect("unbounded image"))
    }

    /// `φ(z)`, or `None` once `log|φ(z)|` exceeds `bound`. The argument is
    /// never computed for escaping points.
    pub fn phi_bounded(&self, z: &LogPolar, bound: &ExtReal) -> Result<Option<LogPolar>, NumericError> {
        self.image(z, Power::Q, Some(bound))
    }

    /// `φ(x)` on the real line, including points outside the disk. The pole
    /// at 0 is replaced by a huge positive stand-in so that comparisons
    /// against `t` stay meaningful.
    pub fn phi_real(&self, x: &ExtReal) -> ExtReal {
        if x.is_zero() {
            return ExtReal::from_ln(false, ExtReal::from_f64(1e300, self.prec).exp());
        }
        match self.phi(&LogPolar::from_real(x)).expect("real points keep their argument") {
            LogPolar::Zero => ExtReal::zero(self.prec),
            LogPolar::Infinity => unreachable!("only 0 maps to infinity"),
            p => p.to_real().expect("real in, real out"),
        }
    }

    fn k(&self, pw: Power) -> ExtReal {
        match pw {
            Power::One => ExtReal::one(self.prec),
            Power::Q => self.q.clone(),
        }
    }

    /// `k·t`: `t` itself for `M`, `C·p` for `φ`.
    fn kt(&self, pw: Power) -> &ExtReal {
        match pw {
            Power::One => &self.t,
            Power::Q => &self.a,
        }
    }

    fn exact_k(&self, pw: Power) -> Result<Integer, NumericError> {
        let err = |bits| NumericError::ArgumentPrecision { level: self.index, bits, prec: self.prec };
        match pw {
            Power::One => Ok(Integer::from(1)),
            Power::Q => match self.rotation.q() {
                Denominator::Exact(q) if q.significant_bits() <= self.prec => Ok(q.clone()),
                Denominator::Exact(q) => Err(err(q.significant_bits() as u64)),
                Denominator::Power { .. } => Err(err(u64::MAX)),
            },
        }
    }

    fn image(&self, z: &LogPolar, pw: Power, bound: Option<&ExtReal>) -> Result<Option<LogPolar>, NumericError> {
        let prec = self.prec;
        let kt = self.kt(pw);
        let (rho, arg) = match z {
            LogPolar::Zero => return Ok(if bound.is_some() { None } else { Some(LogPolar::Infinity) }),
            LogPolar::Infinity => {
                // M(∞) = 1/(1-t), so log|M^k| = k·t·S(t).
                let log_r = kt.mul(&self.s_t);
                return Ok(within(log_r, Angle::Zero, bound));
            }
            LogPolar::Finite { log_r, arg } => (log_r, arg),
        };
        if rho.is_zero() && *arg == Angle::Zero {
            return Ok(Some(LogPolar::one(prec)));
        }
        let ln_u = self.ln_t.sub(rho);
        let base = kt.mul(&self.s_t);
        let theta = match arg {
            Angle::Turn(theta) => theta,
            real => return Ok(self.real_image(pw, rho, &ln_u, *real == Angle::Pi, &base, bound)),
        };

        let cutoff = ((prec as f64) + 16.0) * std::f64::consts::LN_2;
        let lu = ln_u.to_f64();
        if lu < -cutoff {
            // k·ln(1-u) = -k·u to working precision, and k·|u| = kt/|z|.
            let w = kt.mul(&(-rho).exp()).to_float().ok_or(NumericError::OutOfRange)?;
            let (s, c) = theta.clone().sin_cos(Float::new(prec));
            let log_r = base.sub(&ExtReal::from_float(Float::with_val(prec, &w * &c)));
            if exceeds(&log_r, bound) {
                return Ok(None);
            }
            let arg = Angle::from_radians(&Float::with_val(prec, &w * &s));
            return Ok(Some(LogPolar::Finite { log_r, arg }));
        }
        if lu > cutoff {
            // 1 - u = -u to working precision.
            let log_r = self.k(pw).mul(&ln_u).add(&base);
            if exceeds(&log_r, bound) {
                return Ok(None);
            }
            let k = self.exact_k(pw)?;
            let pi = Float::with_val(prec, FloatConstant::Pi);
            let arg = Angle::from_radians(&Float::with_val(prec, &pi - theta)).times(&k);
            return Ok(Some(LogPolar::Finite { log_r, arg }));
        }

        let u = ln_u.to_float().expect("moderate").exp();
        let c = Float::with_val(prec, theta.cos_ref());
        let uc = Float::with_val(prec, &u * &c);
        let re = Float::with_val(prec, 1) - &uc;
        if bound.is_some() && pw == Power::Q {
            let u2 = Float::with_val(prec, u.square_ref());
            let norm = Float::with_val(prec, &re * &re) + Float::with_val(prec, &u2 - Float::with_val(prec, &uc * &uc));
            if norm > self.escape_sq {
                return Ok(None);
            }
        }
        let s = Float::with_val(prec, theta.sin_ref());
        let im = Float::with_val(prec, &u * &s);
        let ln_w = if u < 0.5 {
            let u2 = Float::with_val(prec, u.square_ref());
            let x = u2 - Float::with_val(prec, &uc * 2u32);
            x.ln_1p() / 2u32
        } else {
            Float::with_val(prec, re.hypot_ref(&im)).ln()
        };
        let log_r = self.k(pw).mul(&ExtReal::from_float(ln_w)).add(&base);
        if exceeds(&log_r, bound) {
            return Ok(None);
        }
        let k = self.exact_k(pw)?;
        let arg = Angle::from_radians(&Float::with_val(prec, im.atan2_ref(&re))).times(&k);
        Ok(Some(LogPolar::Finite { log_r, arg }))
    }

    /// Real inputs, `x = ±exp(ρ)` with `u = t/x`.
    fn real_image(
        &self,
        pw: Power,
        rho: &ExtReal,
        ln_u: &ExtReal,
        neg: bool,
        base: &ExtReal,
        bound: Option<&ExtReal>,
    ) -> Option<LogPolar> {
        let prec = self.prec;
        if !neg && ln_u.is_zero() {
            return Some(LogPolar::Zero);
        }
        let u = ExtReal::from_ln(neg, ln_u.clone());
        if neg || ln_u.is_neg() {
            // u < 1: k·ln(1-u) = -(k·u)·S(u) with k·u = kt/x.
            let ku = self.kt(pw).mul(&ExtReal::from_ln(neg, -rho));
            let log_r = base.sub(&ku.mul(&log_ratio(&u)));
            return within(log_r, Angle::Zero, bound);
        }
        // u > 1, so M(x) < 0.
        let ln_um1 = match u.to_float() {
            Some(uf) => ExtReal::from_float(Float::with_val(prec, uf - 1u32).ln()),
            None => ln_u.clone(),
        };
        let log_r = self.k(pw).mul(&ln_um1).add(base);
        let odd = match pw {
            Power::One => true,
            Power::Q => self.rotation.q().is_odd(),
        };
        within(log_r, if odd { Angle::Pi } else { Angle::Zero }, bound)
    }
}

fn exceeds(log_r: &ExtReal, bound: Option<&ExtReal>) -> bool {
    bound.is_some_and(|b| log_r > b)
}

fn within(log_r: ExtReal, arg: Angle, bound: Option<&ExtReal>) -> Option<LogPolar> {
    if exceeds(&log_r, bound) {
        None
    } else {
        Some(LogPolar::Finite { log_r, arg })
    }
}
