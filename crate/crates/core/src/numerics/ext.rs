//! Signed reals with an unbounded exponent.
//!
//! MPFR floats stop at a binary exponent of about 2^30. Denominators such as
//! 2^(2^256) blow straight through that, so magnitudes past a cutoff are kept
//! through their natural logarithm, which is itself an [`ExtReal`]. Nesting is
//! as deep as the data needs.

use std::cmp::Ordering;
use std::fmt;

use rug::float::Round;
use rug::ops::AssignRound;
use rug::{Float, Integer};

/// Largest binary exponent stored as a plain float.
const FLAT_EXP: i32 = 1 << 28;

/// `FLAT_EXP * ln 2`, rounded down; logs beyond this never become flat floats.
const FLAT_LN: f64 = 186_065_279.0;

#[derive(Clone, Debug)]
pub struct ExtReal {
    prec: u32,
    repr: Repr,
}

#[derive(Clone, Debug)]
enum Repr {
    Zero,
    /// Nonzero, binary exponent within `±FLAT_EXP`.
    Flat(Float),
    /// `±exp(ln)` with `|ln|` beyond the flat range.
    Exp { neg: bool, ln: Box<ExtReal> },
}

impl ExtReal {
    pub fn zero(prec: u32) -> Self {
        ExtReal { prec, repr: Repr::Zero }
    }

    pub fn one(prec: u32) -> Self {
        ExtReal::from_float(Float::with_val(prec, 1))
    }

    /// Takes the precision of `f`.
    pub fn from_float(f: Float) -> Self {
        let prec = f.prec();
        assert!(!f.is_nan(), "NaN has no extended-range form");
        if f.is_zero() {
            return ExtReal::zero(prec);
        }
        if f.is_infinite() {
            // Only reachable through an overflow we failed to route around.
            panic!("infinite float passed to ExtReal");
        }
        let exp = f.get_exp().unwrap_or(0);
        if exp.abs() <= FLAT_EXP {
            ExtReal { prec, repr: Repr::Flat(f) }
        } else {
            let neg = f.is_sign_negative();
            let ln = Float::with_val(prec, f.abs_ref()).ln();
            ExtReal { prec, repr: Repr::Exp { neg, ln: Box::new(ExtReal::from_float(ln)) } }
        }
    }

    pub fn from_f64(x: f64, prec: u32) -> Self {
        ExtReal::from_float(Float::with_val(prec, x))
    }

    pub fn from_integer(i: &Integer, prec: u32) -> Self {
        ExtReal::from_float(Float::with_val(prec, i))
    }

    /// `±exp(ln)`.
    pub fn from_ln(neg: bool, ln: ExtReal) -> Self {
        let prec = ln.prec;
        let mag = match &ln.repr {
            Repr::Zero => ExtReal::one(prec),
            Repr::Flat(l) if l.to_f64().abs() <= FLAT_LN => {
                ExtReal::from_float(Float::with_val(prec, l.exp_ref()))
            }
            _ => ExtReal { prec, repr: Repr::Exp { neg: false, ln: Box::new(ln) } },
        };
        if neg {
            -mag
        } else {
            mag
        }
    }

    pub fn exp(&self) -> Self {
        ExtReal::from_ln(false, self.clone())
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero)
    }

    pub fn is_neg(&self) -> bool {
        match &self.repr {
            Repr::Zero => false,
            Repr::Flat(f) => f.is_sign_negative(),
            Repr::Exp { neg, .. } => *neg,
        }
    }

    /// -1, 0 or 1.
    pub fn signum(&self) -> i32 {
        match &self.repr {
            Repr::Zero => 0,
            _ if self.is_neg() => -1,
            _ => 1,
        }
    }

    /// True when the value fits an ordinary float.
    pub fn is_flat(&self) -> bool {
        !matches!(self.repr, Repr::Exp { .. })
    }

    pub fn to_float(&self) -> Option<Float> {
        match &self.repr {
            Repr::Zero => Some(Float::new(self.prec)),
            Repr::Flat(f) => Some(f.clone()),
            Repr::Exp { .. } => None,
        }
    }

    pub fn as_float(&self) -> Option<&Float> {
        match &self.repr {
            Repr::Flat(f) => Some(f),
            _ => None,
        }
    }

    /// Saturates to ±inf or ±0 outside the `f64` range.
    pub fn to_f64(&self) -> f64 {
        match &self.repr {
            Repr::Zero => 0.0,
            Repr::Flat(f) => f.to_f64(),
            Repr::Exp { neg, ln } => {
                let m = if ln.is_neg() { 0.0 } else { f64::INFINITY };
                if *neg {
                    -m
                } else {
                    m
                }
            }
        }
    }

    /// Natural log of the magnitude; `None` for zero.
    pub fn ln_abs(&self) -> Option<ExtReal> {
        match &self.repr {
            Repr::Zero => None,
            Repr::Flat(f) => Some(ExtReal::from_float(Float::with_val(self.prec, f.abs_ref()).ln())),
            Repr::Exp { ln, .. } => Some((**ln).clone()),
        }
    }

    pub fn abs(&self) -> Self {
        if self.is_neg() {
            -self
        } else {
            self.clone()
        }
    }

    /// Round to a new precision.
    pub fn with_prec(&self, prec: u32) -> Self {
        let repr = match &self.repr {
            Repr::Zero => Repr::Zero,
            Repr::Flat(f) => Repr::Flat(Float::with_val(prec, f)),
            Repr::Exp { neg, ln } => Repr::Exp { neg: *neg, ln: Box::new(ln.with_prec(prec)) },
        };
        ExtReal { prec, repr }
    }

    pub fn recip(&self) -> Option<Self> {
        match &self.repr {
            Repr::Zero => None,
            Repr::Flat(f) => Some(ExtReal::from_float(Float::with_val(self.prec, f.recip_ref()))),
            Repr::Exp { neg, ln } => Some(ExtReal::from_ln(*neg, -&**ln)),
        }
    }

    pub fn mul(&self, other: &ExtReal) -> ExtReal {
        let prec = self.prec.max(other.prec);
        match (&self.repr, &other.repr) {
            (Repr::Zero, _) | (_, Repr::Zero) => ExtReal::zero(prec),
            // Exponents add to at most 2^29, inside the MPFR range.
            (Repr::Flat(a), Repr::Flat(b)) => ExtReal::from_float(Float::with_val(prec, a * b)),
            _ => {
                let neg = self.is_neg() != other.is_neg();
                let ln = self.ln_abs().unwrap().add(&other.ln_abs().unwrap());
                ExtReal::from_ln(neg, ln.with_prec(prec))
            }
        }
    }

    /// Panics on a zero divisor; callers rule that out first.
    pub fn div(&self, other: &ExtReal) -> ExtReal {
        let prec = self.prec.max(other.prec);
        match (&self.repr, &other.repr) {
            (_, Repr::Zero) => panic!("ExtReal division by zero"),
            (Repr::Zero, _) => ExtReal::zero(prec),
            (Repr::Flat(a), Repr::Flat(b)) => ExtReal::from_float(Float::with_val(prec, a / b)),
            _ => {
                let neg = self.is_neg() != other.is_neg();
                let ln = self.ln_abs().unwrap().sub(&other.ln_abs().unwrap());
                ExtReal::from_ln(neg, ln.with_prec(prec))
            }
        }
    }

    pub fn add(&self, other: &ExtReal) -> ExtReal {
        let prec = self.prec.max(other.prec);
        match (&self.repr, &other.repr) {
            (Repr::Zero, _) => other.with_prec(prec),
            (_, Repr::Zero) => self.with_prec(prec),
            (Repr::Flat(a), Repr::Flat(b)) => ExtReal::from_float(Float::with_val(prec, a + b)),
            _ => {
                let (big, small) = if self.cmp_abs(other) == Ordering::Less {
                    (other, self)
                } else {
                    (self, other)
                };
                let lb = big.ln_abs().unwrap();
                let d = small.ln_abs().unwrap().sub(&lb);
                // Below 2^-(prec+16) relative, the smaller term cannot move the result.
                if d.to_f64() < -((prec as f64) + 16.0) * std::f64::consts::LN_2 {
                    return big.with_prec(prec);
                }
                let r = match d.to_float() {
                    Some(f) => Float::with_val(prec, f.exp_ref()),
                    None => Float::with_val(prec, 1),
                };
                let corr = if big.is_neg() == small.is_neg() {
                    r.ln_1p()
                } else {
                    if r == 1 {
                        return ExtReal::zero(prec);
                    }
                    (-r).ln_1p()
                };
                let ln = lb.add(&ExtReal::from_float(corr));
                ExtReal::from_ln(big.is_neg(), ln.with_prec(prec))
            }
        }
    }

    pub fn sub(&self, other: &ExtReal) -> ExtReal {
        self.add(&-other)
    }

    /// Scale by a float, which is always flat.
    pub fn mul_float(&self, f: &Float) -> ExtReal {
        self.mul(&ExtReal::from_float(f.clone()))
    }

    pub fn cmp_abs(&self, other: &ExtReal) -> Ordering {
        match (&self.repr, &other.repr) {
            (Repr::Zero, Repr::Zero) => Ordering::Equal,
            (Repr::Zero, _) => Ordering::Less,
            (_, Repr::Zero) => Ordering::Greater,
            (Repr::Flat(a), Repr::Flat(b)) => a.cmp_abs(b).unwrap_or(Ordering::Equal),
            (Repr::Flat(_), Repr::Exp { ln, .. }) => {
                if ln.is_neg() {
                    Ordering::Greater
                } else {
                    Ordering::Less
                }
            }
            (Repr::Exp { .. }, Repr::Flat(_)) => other.cmp_abs(self).reverse(),
            (Repr::Exp { ln: a, .. }, Repr::Exp { ln: b, .. }) => a.cmp(b),
        }
    }

    /// Digits enough to round-trip the working precision.
    pub fn to_string_digits(&self, digits: usize) -> String {
        match &self.repr {
            Repr::Zero => "0".to_string(),
            Repr::Flat(f) => f.to_string_radix(10, Some(digits)),
            Repr::Exp { neg, ln } => {
                format!("{}exp({})", if *neg { "-" } else { "" }, ln.to_string_digits(digits))
            }
        }
    }

    /// Round to nearest float at `prec`, flushing magnitudes past the MPFR
    /// range to ±0 or ±inf.
    pub fn to_float_saturating(&self, prec: u32) -> Float {
        match &self.repr {
            Repr::Zero => Float::new(prec),
            Repr::Flat(f) => {
                let mut out = Float::new(prec);
                out.assign_round(f, Round::Nearest);
                out
            }
            Repr::Exp { neg, ln } => {
                let m = if ln.is_neg() {
                    Float::new(prec)
                } else {
                    Float::with_val(prec, rug::float::Special::Infinity)
                };
                if *neg {
                    -m
                } else {
                    m
                }
            }
        }
    }
}

/// Decimal digits that pin down a float of `prec` bits.
pub fn digits_for(prec: u32) -> usize {
    ((prec as f64) * std::f64::consts::LOG10_2).ceil() as usize + 1
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_digits(digits_for(self.prec)))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (self.signum(), other.signum());
        if a != b {
            return a.cmp(&b);
        }
        match a {
            0 => Ordering::Equal,
            1 => self.cmp_abs(other),
            _ => self.cmp_abs(other).reverse(),
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for ExtReal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ExtReal {}

impl std::ops::Neg for &ExtReal {
    type Output = ExtReal;
    fn neg(self) -> ExtReal {
        let repr = match &self.repr {
            Repr::Zero => Repr::Zero,
            Repr::Flat(f) => Repr::Flat(Float::with_val(self.prec, -f)),
            Repr::Exp { neg, ln } => Repr::Exp { neg: !neg, ln: ln.clone() },
        };
        ExtReal { prec: self.prec, repr }
    }
}

impl std::ops::Neg for ExtReal {
    type Output = ExtReal;
    fn neg(self) -> ExtReal {
        -&self
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl std::ops::$tr<&ExtReal> for &ExtReal {
            type Output = ExtReal;
            fn $m(self, rhs: &ExtReal) -> ExtReal {
                ExtReal::$f(self, rhs)
            }
        }
        impl std::ops::$tr<ExtReal> for ExtReal {
            type Output = ExtReal;
            fn $m(self, rhs: ExtReal) -> ExtReal {
                ExtReal::$f(&self, &rhs)
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 128;

    fn f(x: f64) -> ExtReal {
        ExtReal::from_f64(x, P)
    }

    fn huge(ln: f64) -> ExtReal {
        ExtReal::from_ln(false, f(ln))
    }

    #[test]
    fn flat_arithmetic_matches_floats() {
        assert_eq!((&f(1.5) + &f(2.25)).to_f64(), 3.75);
        assert_eq!((&f(1.5) - &f(2.25)).to_f64(), -0.75);
        assert_eq!((&f(1.5) * &f(-2.0)).to_f64(), -3.0);
        assert_eq!((&f(3.0) / &f(4.0)).to_f64(), 0.75);
        assert!((&f(2.0) - &f(2.0)).is_zero());
    }

    #[test]
    fn leaves_flat_range_and_comes_back() {
        let big = huge(1e12);
        assert!(!big.is_flat());
        assert_eq!(big.to_f64(), f64::INFINITY);
        let small = big.recip().unwrap();
        assert_eq!(small.to_f64(), 0.0);
        let back = &big * &small;
        assert!((back.to_f64() - 1.0).abs() < 1e-20);
    }

    #[test]
    fn product_of_flats_can_overflow_into_exp() {
        let a = ExtReal::from_float(Float::with_val(P, Float::i_exp(1, 200_000_000)));
        assert!(a.is_flat());
        let sq = &a * &a;
        assert!(!sq.is_flat());
        let ln = sq.ln_abs().unwrap().to_f64();
        let want = 2.0 * 200_000_000.0 * std::f64::consts::LN_2;
        assert!((ln - want).abs() / want < 1e-15);
    }

    #[test]
    fn ordering_across_representations() {
        let tiny = huge(-1e12);
        let big = huge(1e12);
        let vals = [-&big, f(-3.0), -&tiny, ExtReal::zero(P), tiny.clone(), f(0.5), big.clone()];
        for (i, a) in vals.iter().enumerate() {
            for (j, b) in vals.iter().enumerate() {
                assert_eq!(a.cmp(b), i.cmp(&j), "{i} vs {j}");
            }
        }
        assert!(huge(1e13) > big);
        assert!(huge(-1e13) < tiny);
    }

    #[test]
    fn addition_absorbs_negligible_terms() {
        let big = huge(1e9);
        assert_eq!(&big + &f(1.0), big);
        let tiny = huge(-1e9);
        assert_eq!((&f(1.0) + &tiny).to_f64(), 1.0);
        // Equal huge magnitudes of opposite sign cancel exactly.
        assert!((&big - &big).is_zero());
        // Doubling a huge value shifts its log by ln 2.
        let twice = &big + &big;
        let d = (&twice.ln_abs().unwrap() - &big.ln_abs().unwrap()).to_f64();
        assert!((d - std::f64::consts::LN_2).abs() < 1e-6);
    }

    #[test]
    fn doubly_exponential_values() {
        // 2^(2^256): its log is itself far outside the float range once nested.
        let e = ExtReal::from_integer(&(Integer::from(1) << 256), P);
        let ln2 = ExtReal::from_float(Float::with_val(P, rug::float::Constant::Log2));
        let q = (&e * &ln2).exp();
        let q2 = (&q * &ln2).exp();
        assert!(q2 > q);
        assert!(q2.recip().unwrap() < q.recip().unwrap());
        assert_eq!(q2.to_string().matches("exp(").count(), 2);
    }
}
