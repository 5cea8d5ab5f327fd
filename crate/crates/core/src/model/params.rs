use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rug::float::Constant as FloatConstant;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::{Serialize, Serializer};

use super::ModelError;
use crate::numerics::ExtReal;

/// Denominators larger than this many bits are kept symbolically.
pub const EXACT_BITS_MAX: u32 = 4096;

/// The constant `C`, either rational or a rational multiple of π.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constant {
    coeff: Rational,
    pi: bool,
}

impl Constant {
    pub fn rational(coeff: Rational) -> Self {
        Constant { coeff, pi: false }
    }

    pub fn pi_times(coeff: Rational) -> Self {
        Constant { coeff, pi: true }
    }

    pub fn has_pi(&self) -> bool {
        self.pi
    }

    pub fn coeff(&self) -> &Rational {
        &self.coeff
    }

    pub fn value(&self, prec: u32) -> Float {
        if self.pi {
            let pi = Float::with_val(prec + 32, FloatConstant::Pi);
            Float::with_val(prec, pi * &self.coeff)
        } else {
            Float::with_val(prec, &self.coeff)
        }
    }

    /// `C > 1`.
    pub fn exceeds_one(&self) -> bool {
        if self.pi {
            self.value(128) > 1
        } else {
            self.coeff > 1
        }
    }

    /// `C·p/q < 1`; π is irrational so the float test at generous precision
    /// is strict.
    fn times_ratio_below_one(&self, p: u64, q: &Denominator) -> bool {
        match q {
            Denominator::Power { .. } => true,
            Denominator::Exact(q) => {
                let r = Rational::from((Integer::from(p), q.clone())) * &self.coeff;
                if self.pi {
                    let prec = 128 + q.significant_bits();
                    Float::with_val(prec, FloatConstant::Pi) * r < 1
                } else {
                    r < 1
                }
            }
        }
    }

    /// `C·p/q` rounded once.
    fn times_ratio(&self, p: u64, q: &Integer, prec: u32) -> Float {
        let r = Rational::from((Integer::from(p), q.clone())) * &self.coeff;
        if self.pi {
            let pi = Float::with_val(prec + 32, FloatConstant::Pi);
            Float::with_val(prec, pi * r)
        } else {
            Float::with_val(prec, &r)
        }
    }

    /// Ratio `other / self`, exact when both share the π factor or both lack it.
    pub fn ratio_to(&self, other: &Constant, prec: u32) -> Float {
        if self.pi == other.pi {
            Float::with_val(prec, &Rational::from(&other.coeff / &self.coeff))
        } else {
            Float::with_val(prec, other.value(prec + 32) / self.value(prec + 32))
        }
    }
}

fn parse_decimal(s: &str) -> Option<Rational> {
    if let Some((n, d)) = s.split_once('/') {
        let n = Integer::from_str(n.trim()).ok()?;
        let d = Integer::from_str(d.trim()).ok()?;
        if d == 0 {
            return None;
        }
        return Some(Rational::from((n, d)));
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    if !(-4000..=4000).contains(&exp) {
        return None;
    }
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let mut num = Integer::from_str(if digits.is_empty() { "0" } else { &digits }).ok()?;
    if neg {
        num = -num;
    }
    let scale = exp - frac.len() as i32;
    let ten = Integer::from(10);
    Some(if scale >= 0 {
        Rational::from(num * ten.pow(scale as u32))
    } else {
        Rational::from((num, ten.pow((-scale) as u32)))
    })
}

impl FromStr for Constant {
    type Err = ModelError;

    /// Accepts `3.2`, `7/2`, `1e1`, `pi`, `2pi`, `2*pi`, `0.5 * pi`.
    fn from_str(s: &str) -> Result<Self, ModelError> {
        let bad = || ModelError::InvalidConstant(s.to_string());
        let t = s.trim().to_ascii_lowercase();
        if let Some(head) = t.strip_suffix("pi") {
            let head = head.trim_end();
            let head = head.strip_suffix('*').unwrap_or(head).trim();
            let coeff = if head.is_empty() { Rational::from(1) } else { parse_decimal(head).ok_or_else(bad)? };
            return Ok(Constant::pi_times(coeff));
        }
        parse_decimal(&t).map(Constant::rational).ok_or_else(bad)
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.coeff;
        let coeff = if c.denom() == &1 {
            c.numer().to_string()
        } else {
            // Terminating decimals print as decimals, everything else as a fraction.
            let mut d = c.denom().clone();
            let twos = d.find_one(0).unwrap_or(0);
            d >>= twos;
            let mut fives = 0u32;
            while d.is_divisible_u(5) {
                d /= 5u32;
                fives += 1;
            }
            if d == 1 {
                let places = twos.max(fives) as usize;
                let scaled = Rational::from(c * Integer::from(10).pow(places as u32));
                let mut digits = scaled.numer().clone().abs().to_string();
                while digits.len() <= places {
                    digits.insert(0, '0');
                }
                let split = digits.len() - places;
                let sign = if *c < 0 { "-" } else { "" };
                format!("{sign}{}.{}", &digits[..split], &digits[split..])
            } else {
                c.to_string()
            }
        };
        match (self.pi, coeff.as_str()) {
            (false, _) => f.write_str(&coeff),
            (true, "1") => f.write_str("pi"),
            (true, _) => write!(f, "{coeff}*pi"),
        }
    }
}

impl Serialize for Constant {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// A denominator `q`. Values past [`EXACT_BITS_MAX`] bits are held as a
/// power `base^exponent` and never materialized.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Denominator {
    Exact(Integer),
    Power { base: u32, exponent: Arc<Denominator> },
}

impl Denominator {
    pub fn exact(&self) -> Option<&Integer> {
        match self {
            Denominator::Exact(q) => Some(q),
            Denominator::Power { .. } => None,
        }
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.exact().and_then(|q| q.to_u64())
    }

    pub fn is_odd(&self) -> bool {
        match self {
            Denominator::Exact(q) => q.is_odd(),
            Denominator::Power { base, .. } => base % 2 == 1,
        }
    }

    /// `base^self`, kept exact while small enough.
    pub fn power_of(base: u32, exponent: &Denominator) -> Denominator {
        if let Denominator::Exact(e) = exponent {
            let bits = (base as f64).log2() * e.to_f64();
            if bits <= EXACT_BITS_MAX as f64 {
                let e = e.to_u32().expect("small exponent");
                return Denominator::Exact(Integer::from(base).pow(e));
            }
        }
        Denominator::Power { base, exponent: Arc::new(exponent.clone()) }
    }

    pub fn gcd_with(&self, p: u64) -> u64 {
        let (a, b) = match self {
            Denominator::Exact(q) => (Integer::from(p), q.clone()),
            Denominator::Power { base, .. } => (Integer::from(p), Integer::from(*base)),
        };
        a.gcd(&b).to_u64().unwrap_or(u64::MAX)
    }

    pub fn exceeds(&self, p: u64) -> bool {
        match self {
            Denominator::Exact(q) => *q > p,
            Denominator::Power { .. } => true,
        }
    }

    pub fn value(&self, prec: u32) -> ExtReal {
        match self {
            Denominator::Exact(q) => ExtReal::from_integer(q, prec),
            Denominator::Power { .. } => self.ln(prec).exp(),
        }
    }

    pub fn ln(&self, prec: u32) -> ExtReal {
        match self {
            Denominator::Exact(q) => ExtReal::from_float(Float::with_val(prec, q).ln()),
            Denominator::Power { base, exponent } => {
                let lb = ExtReal::from_float(Float::with_val(prec, *base).ln());
                exponent.value(prec).mul(&lb)
            }
        }
    }

    /// `ln(self) / divisor`, exact in structure when `self = base^divisor`.
    pub fn ln_over(&self, divisor: &Denominator, prec: u32) -> ExtReal {
        if let Denominator::Power { base, exponent } = self {
            if **exponent == *divisor {
                return ExtReal::from_float(Float::with_val(prec, *base).ln());
            }
        }
        if let (Denominator::Exact(q), Denominator::Exact(d)) = (self, divisor) {
            let wide = prec + 64;
            let v = Float::with_val(wide, q).ln() / Float::with_val(wide, d);
            return ExtReal::from_float(Float::with_val(prec, v));
        }
        self.ln(prec).div(&divisor.value(prec))
    }

    /// `log2 q`, infinite for symbolic powers.
    pub fn log2(&self) -> f64 {
        match self {
            Denominator::Exact(q) => {
                let bits = q.significant_bits();
                if bits < 1000 {
                    q.to_f64().log2()
                } else {
                    bits as f64
                }
            }
            Denominator::Power { .. } => f64::INFINITY,
        }
    }
}

impl fmt::Display for Denominator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Denominator::Exact(q) => write!(f, "{q}"),
            Denominator::Power { base, exponent } => match &**exponent {
                Denominator::Exact(e) if e.significant_bits() > 64 && e.is_power_of_two() => {
                    write!(f, "{base}^(2^{})", e.significant_bits() - 1)
                }
                e => write!(f, "{base}^({e})"),
            },
        }
    }
}

impl From<u64> for Denominator {
    fn from(q: u64) -> Self {
        Denominator::Exact(Integer::from(q))
    }
}

/// A reduced fraction `p/q` in `(0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RotationNumber {
    p: u64,
    q: Denominator,
}

impl RotationNumber {
    pub fn new(p: u64, q: impl Into<Denominator>) -> Result<Self, ModelError> {
        let q = q.into();
        if p == 0 || !q.exceeds(p) {
            return Err(ModelError::FractionOutOfRange(format!("{p}/{q}")));
        }
        if q.gcd_with(p) != 1 {
            return Err(ModelError::NotReduced(format!("{p}/{q}")));
        }
        Ok(RotationNumber { p, q })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> &Denominator {
        &self.q
    }
}

impl fmt::Display for RotationNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl FromStr for RotationNumber {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, ModelError> {
        let bad = || ModelError::InvalidFraction(s.to_string());
        let (p, q) = s.split_once('/').ok_or_else(bad)?;
        let p = p.trim().parse::<u64>().map_err(|_| bad())?;
        let q = q.trim().parse::<u64>().map_err(|_| bad())?;
        RotationNumber::new(p, q)
    }
}

impl Serialize for RotationNumber {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// How the next denominator follows from the previous one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GrowthRule {
    /// `q' = a·q + b`
    Affine { a: u64, b: u64 },
    /// `q' = ratio·q`
    Geometric { ratio: u64 },
    /// `q' = base^q`
    Tower { base: u32 },
}

impl GrowthRule {
    pub fn next(&self, q: &Denominator) -> Option<Denominator> {
        let fits = |v: Integer| (v.significant_bits() <= EXACT_BITS_MAX).then_some(Denominator::Exact(v));
        match (self, q) {
            (GrowthRule::Tower { base }, q) => Some(Denominator::power_of(*base, q)),
            (GrowthRule::Affine { a, b }, Denominator::Exact(q)) => fits(Integer::from(q * *a) + *b),
            (GrowthRule::Geometric { ratio }, Denominator::Exact(q)) => fits(Integer::from(q * *ratio)),
            _ => None,
        }
    }
}

/// Lazily extends a sequence with fixed numerator `p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Extension {
    pub rule: GrowthRule,
    pub p: u64,
}

/// The constant `C` and the rotation numbers `p_n/q_n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModelParams {
    c: Constant,
    prefix: Vec<RotationNumber>,
    extension: Option<Extension>,
}

impl ModelParams {
    pub fn new(c: Constant, prefix: Vec<RotationNumber>, extension: Option<Extension>) -> Result<Self, ModelError> {
        if !c.exceeds_one() {
            return Err(ModelError::ConstantTooSmall(c.to_string()));
        }
        if prefix.is_empty() {
            return Err(ModelError::EmptySequence);
        }
        Ok(ModelParams { c, prefix, extension })
    }

    /// Explicit fractions only.
    pub fn fractions(c: Constant, fractions: &[(u64, u64)]) -> Result<Self, ModelError> {
        let prefix = fractions.iter().map(|&(p, q)| RotationNumber::new(p, q)).collect::<Result<_, _>>()?;
        ModelParams::new(c, prefix, None)
    }

    /// `p/q0` followed by the growth rule.
    pub fn generated(c: Constant, p: u64, q0: u64, rule: GrowthRule) -> Result<Self, ModelError> {
        ModelParams::new(c, vec![RotationNumber::new(p, q0)?], Some(Extension { rule, p }))
    }

    /// Tower `q_{n+1} = 2^{q_n}` with `p = 1`.
    pub fn tower(c: Constant, q0: u64) -> Result<Self, ModelError> {
        ModelParams::generated(c, 1, q0, GrowthRule::Tower { base: 2 })
    }

    pub fn constant(&self) -> &Constant {
        &self.c
    }

    pub fn prefix(&self) -> &[RotationNumber] {
        &self.prefix
    }

    pub fn extension(&self) -> Option<&Extension> {
        self.extension.as_ref()
    }

    pub fn with_constant(&self, c: Constant) -> Result<Self, ModelError> {
        ModelParams::new(c, self.prefix.clone(), self.extension.clone())
    }

    /// `None` means unbounded.
    pub fn available(&self) -> Option<usize> {
        match self.extension {
            Some(_) => None,
            None => Some(self.prefix.len()),
        }
    }

    /// The first `count` rotation numbers.
    pub fn rotations(&self, count: usize) -> Result<Vec<RotationNumber>, ModelError> {
        if count <= self.prefix.len() {
            return Ok(self.prefix[..count].to_vec());
        }
        let ext = self.extension.as_ref().ok_or(ModelError::SequenceTooShort {
            needed: count,
            available: self.prefix.len(),
        })?;
        let mut out = self.prefix.clone();
        while out.len() < count {
            let n = out.len();
            let q = ext
                .rule
                .next(out[n - 1].q())
                .ok_or(ModelError::DenominatorOverflow { n })?;
            out.push(RotationNumber::new(ext.p, q).map_err(|e| e.at(n))?);
        }
        Ok(out)
    }

    /// `t_n = C·p_n/q_n` as an extended real, checked to lie in `(0, 1)`.
    pub fn t_value(&self, n: usize, prec: u32) -> Result<ExtReal, ModelError> {
        let r = self.rotations(n + 1)?.pop().unwrap();
        t_of(&self.c, &r, n, prec)
    }
}

pub(crate) fn t_of(c: &Constant, r: &RotationNumber, n: usize, prec: u32) -> Result<ExtReal, ModelError> {
    if !c.times_ratio_below_one(r.p, &r.q) {
        let approx = match &r.q {
            Denominator::Exact(q) => c.times_ratio(r.p, q, 64).to_f64(),
            Denominator::Power { .. } => 0.0,
        };
        return Err(ModelError::TOutOfRange { n, t: approx });
    }
    Ok(match &r.q {
        Denominator::Exact(q) => ExtReal::from_float(c.times_ratio(r.p, q, prec)),
        Denominator::Power { .. } => {
            let a = ExtReal::from_float(Float::with_val(prec, c.value(prec) * r.p));
            let ln_t = a.ln_abs().unwrap().sub(&r.q.ln(prec));
            ln_t.exp()
        }
    })
}
