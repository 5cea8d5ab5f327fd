//! Complex values as (log-magnitude, argument) pairs.

use rug::float::Constant;
use rug::{Float, Integer};

use super::{ExtReal, NumericError};

/// An argument in `(-π, π]`. Real values keep an exact tag so that
/// conjugation symmetry and sign parity survive any number of powers.
#[derive(Clone, Debug, PartialEq)]
pub enum Angle {
    Zero,
    Pi,
    /// Strictly inside `(-π, π)` and nonzero.
    Turn(Float),
}

impl Angle {
    /// Reduces `theta` first.
    pub fn from_radians(theta: &Float) -> Angle {
        if theta.is_zero() {
            return Angle::Zero;
        }
        let r = reduce(theta);
        let pi = Float::with_val(r.prec(), Constant::Pi);
        if r.is_zero() {
            Angle::Zero
        } else if r.cmp_abs(&pi) != Some(std::cmp::Ordering::Less) {
            Angle::Pi
        } else {
            Angle::Turn(r)
        }
    }

    pub fn radians(&self, prec: u32) -> Float {
        match self {
            Angle::Zero => Float::new(prec),
            Angle::Pi => Float::with_val(prec, Constant::Pi),
            Angle::Turn(t) => t.clone(),
        }
    }

    pub fn is_real(&self) -> bool {
        !matches!(self, Angle::Turn(_))
    }

    pub fn conj(&self) -> Angle {
        match self {
            Angle::Turn(t) => Angle::Turn(Float::with_val(t.prec(), -t)),
            other => other.clone(),
        }
    }

    /// `q·θ` reduced.
    pub fn times(&self, q: &Integer) -> Angle {
        match self {
            Angle::Zero => Angle::Zero,
            Angle::Pi if q.is_odd() => Angle::Pi,
            Angle::Pi => Angle::Zero,
            Angle::Turn(t) => {
                // Exact product, then reduce at the extra precision it needs.
                let wide = t.prec() + q.significant_bits();
                let prod = Float::with_val(wide, t * q);
                let r = reduce(&prod);
                Angle::from_radians(&Float::with_val(t.prec(), &r))
            }
        }
    }
}

/// Reduce modulo 2π into `(-π, π]`, using π at enough precision to keep the
/// remainder accurate to the input's precision.
pub fn reduce(x: &Float) -> Float {
    let prec = x.prec();
    let pi_out = Float::with_val(prec, Constant::Pi);
    if *x > -pi_out.clone() && *x <= pi_out {
        return x.clone();
    }
    let exp = x.get_exp().unwrap_or(0).max(0) as u32;
    let wp = prec + exp + 64;
    let two_pi = Float::with_val(wp, Constant::Pi) * 2u32;
    let xw = Float::with_val(wp, x);
    let k = Float::with_val(wp, &xw / &two_pi).round();
    let r = Float::with_val(prec, xw - k * &two_pi);
    // Within rounding of ±π both ends name the same point, which is π.
    if r <= -pi_out.clone() || r > pi_out {
        return pi_out;
    }
    r
}

/// A complex number stored as `exp(log_r + iθ)`, with explicit zero and
/// infinity.
#[derive(Clone, Debug, PartialEq)]
pub enum LogPolar {
    Zero,
    Infinity,
    Finite { log_r: ExtReal, arg: Angle },
}

/// Rectangular pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Rect {
    pub re: Float,
    pub im: Float,
}

impl Rect {
    pub fn new(re: Float, im: Float) -> Self {
        Rect { re, im }
    }

    pub fn from_f64(re: f64, im: f64, prec: u32) -> Self {
        Rect { re: Float::with_val(prec, re), im: Float::with_val(prec, im) }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.mul_add_ref(&self.re, &Float::with_val(p, self.im.square_ref())))
    }

    pub fn abs(&self) -> Float {
        Float::with_val(self.prec(), self.re.hypot_ref(&self.im))
    }

    pub fn arg(&self) -> Float {
        Float::with_val(self.prec(), self.im.atan2_ref(&self.re))
    }

    pub fn conj(&self) -> Rect {
        Rect { re: self.re.clone(), im: Float::with_val(self.im.prec(), -&self.im) }
    }

    pub fn mul(&self, o: &Rect) -> Rect {
        let p = self.prec().max(o.prec());
        let re = Float::with_val(p, &self.re * &o.re) - Float::with_val(p, &self.im * &o.im);
        let im = Float::with_val(p, &self.re * &o.im) + Float::with_val(p, &self.im * &o.re);
        Rect { re, im }
    }

    /// `None` when `o` is zero.
    pub fn div(&self, o: &Rect) -> Option<Rect> {
        let n = o.norm_sqr();
        if n.is_zero() {
            return None;
        }
        let p = n.prec();
        let num = self.mul(&o.conj());
        Some(Rect { re: Float::with_val(p, &num.re / &n), im: Float::with_val(p, &num.im / &n) })
    }
}

impl LogPolar {
    pub fn one(prec: u32) -> Self {
        LogPolar::Finite { log_r: ExtReal::zero(prec), arg: Angle::Zero }
    }

    /// Exact for real inputs: the sign lives in the argument tag.
    pub fn from_real(x: &ExtReal) -> Self {
        match x.ln_abs() {
            None => LogPolar::Zero,
            Some(log_r) => {
                let arg = if x.is_neg() { Angle::Pi } else { Angle::Zero };
                LogPolar::Finite { log_r, arg }
            }
        }
    }

    /// The real value, when the point is finite and on the real axis.
    pub fn to_real(&self) -> Option<ExtReal> {
        match self {
            LogPolar::Zero => None,
            LogPolar::Infinity => None,
            LogPolar::Finite { log_r, arg } => match arg {
                Angle::Zero => Some(ExtReal::from_ln(false, log_r.clone())),
                Angle::Pi => Some(ExtReal::from_ln(true, log_r.clone())),
                Angle::Turn(_) => None,
            },
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            LogPolar::Finite { arg, .. } => arg.is_real(),
            _ => true,
        }
    }

    pub fn conj(&self) -> Self {
        match self {
            LogPolar::Finite { log_r, arg } => LogPolar::Finite { log_r: log_r.clone(), arg: arg.conj() },
            other => other.clone(),
        }
    }

    /// Closed unit disk with tolerance `eps` on `log_r`.
    pub fn in_closed_disk(&self, eps: &ExtReal) -> bool {
        match self {
            LogPolar::Zero => true,
            LogPolar::Infinity => false,
            LogPolar::Finite { log_r, .. } => log_r <= eps,
        }
    }

    pub fn log_r(&self) -> Option<&ExtReal> {
        match self {
            LogPolar::Finite { log_r, .. } => Some(log_r),
            _ => None,
        }
    }

    pub fn arg(&self) -> Option<&Angle> {
        match self {
            LogPolar::Finite { arg, .. } => Some(arg),
            _ => None,
        }
    }
}

/// Log-polar form of a rectangular point.
pub fn to_log_polar(z: &Rect) -> LogPolar {
    let prec = z.prec();
    if z.im.is_zero() {
        if z.re.is_zero() {
            return LogPolar::Zero;
        }
        return LogPolar::from_real(&ExtReal::from_float(Float::with_val(prec, &z.re)));
    }
    let log_r = ExtReal::from_float(z.abs().ln());
    LogPolar::Finite { log_r, arg: Angle::from_radians(&z.arg()) }
}

/// Rectangular form; fails at infinity and for magnitudes past the float
/// range.
pub fn from_log_polar(u: &LogPolar, prec: u32) -> Result<Rect, NumericError> {
    match u {
        LogPolar::Zero => Ok(Rect::new(Float::new(prec), Float::new(prec))),
        LogPolar::Infinity => Err(NumericError::PointAtInfinity),
        LogPolar::Finite { log_r, arg } => {
            let r = ExtReal::from_ln(false, log_r.clone())
                .to_float()
                .ok_or(NumericError::OutOfRange)?;
            let r = Float::with_val(prec, &r);
            Ok(match arg {
                Angle::Zero => Rect::new(r, Float::new(prec)),
                Angle::Pi => Rect::new(-r, Float::new(prec)),
                Angle::Turn(t) => {
                    let (s, c) = Float::with_val(prec, t).sin_cos(Float::new(prec));
                    Rect::new(Float::with_val(prec, &r * &c), Float::with_val(prec, &r * &s))
                }
            })
        }
    }
}

/// `u^q` for `q ≥ 1`. The magnitude is one multiplication of `log_r`.
pub fn pow_int(u: &LogPolar, q: &Integer) -> LogPolar {
    assert!(*q >= 1, "pow_int needs q >= 1");
    match u {
        LogPolar::Zero => LogPolar::Zero,
        LogPolar::Infinity => LogPolar::Infinity,
        LogPolar::Finite { log_r, arg } => {
            let qf = ExtReal::from_integer(q, log_r.prec().max(q.significant_bits()));
            let log_r = log_r.mul(&qf).with_prec(log_r.prec());
            LogPolar::Finite { log_r, arg: arg.times(q) }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const P: u32 = 192;

    fn ulp(x: &Float) -> Float {
        // Spacing of floats around x at its precision.
        let e = x.get_exp().unwrap_or(0);
        Float::with_val(x.prec(), Float::i_exp(1, e - x.prec() as i32))
    }

    #[test]
    fn unit_and_negative_axis() {
        let one = to_log_polar(&Rect::from_f64(1.0, 0.0, P));
        assert_eq!(one, LogPolar::one(P));
        let m4 = to_log_polar(&Rect::from_f64(-4.0, 0.0, P));
        let LogPolar::Finite { log_r, arg } = m4 else { panic!() };
        assert_eq!(arg, Angle::Pi);
        let ln4 = Float::with_val(P, 4).ln();
        assert_eq!(log_r.to_float().unwrap(), ln4);
        assert_eq!(to_log_polar(&Rect::from_f64(0.0, 0.0, P)), LogPolar::Zero);
    }

    #[test]
    fn rectangular_forms_of_simple_points() {
        let z = from_log_polar(&LogPolar::one(P), P).unwrap();
        assert_eq!(z, Rect::from_f64(1.0, 0.0, P));
        let half_pi = Float::with_val(P, Constant::Pi) / 2u32;
        let two_i = LogPolar::Finite {
            log_r: ExtReal::from_float(Float::with_val(P, 2).ln()),
            arg: Angle::Turn(half_pi),
        };
        let z = from_log_polar(&two_i, P).unwrap();
        assert!(z.re.clone().abs() < 1e-50);
        assert!((z.im - 2u32).abs() < 1e-50);
        assert_eq!(from_log_polar(&LogPolar::Infinity, P), Err(NumericError::PointAtInfinity));
    }

    #[test]
    fn roundtrip_within_eight_ulp() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let re: f64 = rng.gen_range(-10.0..10.0);
            let im: f64 = rng.gen_range(-10.0..10.0);
            let z = Rect::from_f64(re, im, P);
            let back = from_log_polar(&to_log_polar(&z), P).unwrap();
            let scale = z.abs();
            let tol = ulp(&scale) * 8u32;
            assert!(Float::with_val(P, &back.re - &z.re).abs() <= tol, "{re} {im}");
            assert!(Float::with_val(P, &back.im - &z.im).abs() <= tol, "{re} {im}");
        }
    }

    #[test]
    fn powers_of_simple_points() {
        let one = LogPolar::one(P);
        assert_eq!(pow_int(&one, &Integer::from(7)), one);
        let half_pi = Float::with_val(P, Constant::Pi) / 2u32;
        let ln2 = Float::with_val(P, 2).ln();
        let two_i = LogPolar::Finite { log_r: ExtReal::from_float(ln2), arg: Angle::Turn(half_pi) };
        let sq = pow_int(&two_i, &Integer::from(2));
        let LogPolar::Finite { log_r, arg } = sq else { panic!() };
        assert_eq!(arg, Angle::Pi);
        assert_eq!(log_r.to_float().unwrap(), Float::with_val(P, 4).ln());
        assert_eq!(pow_int(&LogPolar::Zero, &Integer::from(3)), LogPolar::Zero);
        assert_eq!(pow_int(&LogPolar::Infinity, &Integer::from(3)), LogPolar::Infinity);
    }

    #[test]
    fn pow_matches_repeated_multiplication() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..1000 {
            let re: f64 = rng.gen_range(-1.2..1.2);
            let im: f64 = rng.gen_range(-1.2..1.2);
            let q: u32 = rng.gen_range(1..=50);
            let z = Rect::from_f64(re, im, P);
            let mut acc = z.clone();
            for _ in 1..q {
                acc = acc.mul(&z);
            }
            let got = from_log_polar(&pow_int(&to_log_polar(&z), &Integer::from(q)), P).unwrap();
            // Both routes lose about q roundings relative to |z|^q.
            let tol = ulp(&acc.abs()) * 16u32 * q;
            assert!(Float::with_val(P, &got.re - &acc.re).abs() <= tol, "{re} {im} {q}");
            assert!(Float::with_val(P, &got.im - &acc.im).abs() <= tol, "{re} {im} {q}");
        }
    }

    #[test]
    fn pow_log_r_is_a_single_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let z = Rect::from_f64(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), P);
            let q = Integer::from(rng.gen_range(1u64..1_000_000));
            let u = to_log_polar(&z);
            let lr = u.log_r().unwrap().to_float().unwrap();
            let want = Float::with_val(P, &lr * &q);
            assert_eq!(pow_int(&u, &q).log_r().unwrap().to_float().unwrap(), want);
        }
    }

    #[test]
    fn reduction_lands_in_half_open_interval() {
        let pi = Float::with_val(P, Constant::Pi);
        for k in [-7i32, -3, -1, 1, 2, 9] {
            let x = Float::with_val(P, &pi * k);
            let r = reduce(&x);
            assert!(r > -pi.clone() && r <= pi, "{k}");
        }
        let big = Float::with_val(P, 1e40);
        let r = reduce(&big);
        // Cross-check with a much wider computation.
        let wide = Float::with_val(1000, 1e40);
        let tp = Float::with_val(1000, Constant::Pi) * 2u32;
        let k = Float::with_val(1000, &wide / &tp).round();
        let want = Float::with_val(P, wide - k * tp);
        assert!(Float::with_val(P, &r - &want).abs() <= ulp(&pi) * 2u32);
    }
}
