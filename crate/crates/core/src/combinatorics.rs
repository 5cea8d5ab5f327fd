//! Addresses in `∏ ℤ/q_n`, the adding map, and component labels.
//!
//! The components of `K_n` sit in sectors around the `q`-th roots of unity
//! after applying `M_n`. The component whose image contains
//! `exp(2πi·k·p/q)` carries label `k`.

use std::fmt;

use rug::float::Constant as FloatConstant;
use rug::ops::RemRounding;
use rug::{Float, Integer};
use serde::Serialize;
use thiserror::Error;

use crate::model::Model;
use crate::numerics::{Angle, LogPolar, NumericError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AddressError {
    #[error("on sector boundary")]
    SectorBoundary,
    #[error("{p} is not invertible modulo {q}")]
    NotInvertible { p: u64, q: u64 },
    #[error("escaped before depth {needed} (escape depth {depth})")]
    Escaped { depth: usize, needed: usize },
    #[error("hit component center at level {level}")]
    HitCenter { level: usize },
    #[error("q_{level} does not fit in 64 bits")]
    ModulusTooLarge { level: usize },
    #[error("sector of zero or infinity is undefined")]
    Degenerate,
    #[error("address {0} does not fit the odometer scale")]
    InvalidAddress(String),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// Moduli `q_0, q_1, …` with cumulative products `N_0 = 1, N_{n+1} = N_n·q_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OdometerScale {
    moduli: Vec<u64>,
}

impl OdometerScale {
    /// Every modulus must be at least 2.
    pub fn new(moduli: Vec<u64>) -> Option<Self> {
        moduli.iter().all(|&q| q >= 2).then_some(OdometerScale { moduli })
    }

    /// The first `n` denominators of a model.
    pub fn from_model(model: &Model, n: usize) -> Result<Self, AddressError> {
        let moduli = (0..n)
            .map(|j| model.level(j).q().to_u64().ok_or(AddressError::ModulusTooLarge { level: j }))
            .collect::<Result<_, _>>()?;
        Ok(OdometerScale { moduli })
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn len(&self) -> usize {
        self.moduli.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moduli.is_empty()
    }

    /// `N_0, …, N_len`.
    pub fn cumulative(&self) -> Vec<Integer> {
        let mut out = vec![Integer::from(1)];
        for &q in &self.moduli {
            let next = Integer::from(out.last().unwrap() * q);
            out.push(next);
        }
        out
    }
}

/// Digits `(k_0, …, k_{n-1})`, each reduced modulo its level's `q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Address {
    digits: Vec<u64>,
}

impl Address {
    pub fn new(digits: Vec<u64>) -> Self {
        Address { digits }
    }

    pub fn zeros(n: usize) -> Self {
        Address { digits: vec![0; n] }
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    pub fn is_zero(&self) -> bool {
        self.digits.iter().all(|&d| d == 0)
    }

    pub fn fits(&self, scale: &OdometerScale) -> bool {
        self.digits.len() == scale.len() && self.digits.iter().zip(&scale.moduli).all(|(d, q)| d < q)
    }

    /// Adding map in place on an address known to fit `scale`. Returns
    /// whether the carry left the last digit.
    #[inline]
    pub fn increment(&mut self, scale: &OdometerScale) -> bool {
        debug_assert!(self.fits(scale));
        for (d, &q) in self.digits.iter_mut().zip(&scale.moduli) {
            *d += 1;
            if *d < q {
                return false;
            }
            *d = 0;
        }
        true
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, d) in self.digits.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, ")")
    }
}

/// Adding map: increment the first digit and carry. Also reports whether a
/// carry left the last digit, which on an infinite address would bump the
/// next one.
pub fn sigma_succ_carry(a: &Address, scale: &OdometerScale) -> Result<(Address, bool), AddressError> {
    if !a.fits(scale) {
        return Err(AddressError::InvalidAddress(a.to_string()));
    }
    let mut next = a.clone();
    let carry = next.increment(scale);
    Ok((next, carry))
}

pub fn sigma_succ(a: &Address, scale: &OdometerScale) -> Result<Address, AddressError> {
    sigma_succ_carry(a, scale).map(|(a, _)| a)
}

/// Index of the `q`-th root of unity nearest in direction to `u`. Points
/// within `2^-(prec/4)` of a sector boundary are refused.
pub fn sector_index(u: &LogPolar, q: u64) -> Result<u64, AddressError> {
    let (log_r, arg) = match u {
        LogPolar::Finite { log_r, arg } => (log_r, arg),
        _ => return Err(AddressError::Degenerate),
    };
    let prec = match arg {
        Angle::Turn(t) => t.prec(),
        _ => log_r.prec(),
    };
    let wp = prec + 64;
    let theta = Float::with_val(wp, arg.radians(prec));
    let two_pi = Float::with_val(wp, FloatConstant::Pi) * 2u32;
    let x = Float::with_val(wp, &theta * q) / &two_pi;
    let m = Float::with_val(wp, x.round_ref());
    let off = Float::with_val(wp, &x - &m).abs();
    // Angular distance to the nearest boundary at (2k+1)π/q.
    let gap = (Float::with_val(wp, 0.5) - off) * &two_pi / q;
    if gap <= Float::with_val(wp, Float::i_exp(1, -((prec / 4) as i32))) {
        return Err(AddressError::SectorBoundary);
    }
    let m = m.to_integer().expect("finite");
    let q_int = Integer::from(q);
    Ok(Integer::from(m.rem_euc(&q_int)).to_u64().unwrap())
}

/// Inverse of `p` modulo `q` by the extended Euclidean algorithm.
pub fn mod_inverse(p: u64, q: u64) -> Option<u64> {
    let (mut r0, mut r1) = (q as i128, (p % q) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let k = r0 / r1;
        (r0, r1) = (r1, r0 - k * r1);
        (s0, s1) = (s1, s0 - k * s1);
    }
    if r0 != 1 {
        return None;
    }
    Some(s0.rem_euclid(q as i128) as u64)
}

/// `k = m·p^{-1} mod q`.
pub fn component_label(m: u64, p: u64, q: u64) -> Result<u64, AddressError> {
    if q == 1 {
        return Ok(0);
    }
    let inv = mod_inverse(p, q).ok_or(AddressError::NotInvertible { p, q })?;
    Ok(((m as u128 % q as u128) * inv as u128 % q as u128) as u64)
}

/// Address `(k_0, …, k_{n-1})` of a point of `K_n`.
pub fn address_of(model: &Model, z: &LogPolar, n: usize) -> Result<Address, AddressError> {
    let trace = model.orbit(z, n)?;
    if let Some(j) = trace.levels.iter().skip(1).take(n).position(|w| *w == LogPolar::Zero) {
        return Err(AddressError::HitCenter { level: j });
    }
    if !trace.depth.in_level(n) {
        return Err(AddressError::Escaped { depth: trace.depth.levels_survived(), needed: n });
    }
    let mut digits = Vec::with_capacity(n);
    for j in 0..n {
        let level = model.level(j);
        let q = level.q().to_u64().ok_or(AddressError::ModulusTooLarge { level: j })?;
        let m = sector_index(&level.moebius(&trace.levels[j]), q)?;
        digits.push(component_label(m, level.rotation().p(), q)?);
    }
    Ok(Address { digits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Constant, ModelParams};
    use crate::numerics::{to_log_polar, ExtReal, Rect};
    use proptest::prelude::*;

    fn scale(m: &[u64]) -> OdometerScale {
        OdometerScale::new(m.to_vec()).unwrap()
    }

    #[test]
    fn adding_map_examples() {
        let s = scale(&[3, 2]);
        let (next, carry) = sigma_succ_carry(&Address::new(vec![2, 1]), &s).unwrap();
        assert_eq!(next, Address::zeros(2));
        assert!(carry);
        // On the longer scale the carry lands in the third digit.
        let s3 = scale(&[3, 2, 4]);
        assert_eq!(sigma_succ(&Address::new(vec![2, 1, 0]), &s3).unwrap(), Address::new(vec![0, 0, 1]));
        assert_eq!(sigma_succ(&Address::zeros(2), &s).unwrap(), Address::new(vec![1, 0]));
        assert!(sigma_succ(&Address::new(vec![3, 0]), &s).is_err());
        assert!(OdometerScale::new(vec![3, 1]).is_none());
    }

    #[test]
    fn cumulative_products() {
        let n: Vec<u64> = scale(&[3, 2, 5]).cumulative().iter().map(|i| i.to_u64().unwrap()).collect();
        assert_eq!(n, [1, 3, 6, 30]);
    }

    fn angle(theta: Float) -> LogPolar {
        LogPolar::Finite { log_r: ExtReal::zero(theta.prec()), arg: Angle::from_radians(&theta) }
    }

    #[test]
    fn sector_examples() {
        let p = 128;
        let pi = Float::with_val(p, FloatConstant::Pi);
        assert_eq!(sector_index(&LogPolar::one(p), 5).unwrap(), 0);
        let th = Float::with_val(p, &pi * 2u32) * 3u32 / 5u32 + 0.05f64;
        assert_eq!(sector_index(&angle(th), 5).unwrap(), 3);
        let boundary = Float::with_val(p, &pi / 5u32);
        assert_eq!(sector_index(&angle(boundary), 5), Err(AddressError::SectorBoundary));
        // The negative axis is a boundary for odd q and a root for even q.
        let neg = LogPolar::from_real(&ExtReal::from_f64(-2.0, p));
        assert_eq!(sector_index(&neg, 5), Err(AddressError::SectorBoundary));
        assert_eq!(sector_index(&neg, 6).unwrap(), 3);
        assert_eq!(sector_index(&LogPolar::Zero, 5), Err(AddressError::Degenerate));
    }

    #[test]
    fn label_examples() {
        for q in 2..30 {
            for m in 0..q {
                assert_eq!(component_label(m, 1, q).unwrap(), m);
            }
        }
        // Brute force: the k with k·p ≡ m.
        let k = (0..5).find(|k| (k * 2) % 5 == 3).unwrap();
        assert_eq!(component_label(3, 2, 5).unwrap(), k);
        assert_eq!(k, 4);
        assert_eq!(component_label(1, 2, 4), Err(AddressError::NotInvertible { p: 2, q: 4 }));
    }

    #[test]
    fn address_of_one_and_of_a_center() {
        let params = ModelParams::fractions("2".parse().unwrap(), &[(1, 3), (1, 5), (1, 7)]).unwrap();
        let m = Model::new(&params, 192, 2).unwrap();
        assert_eq!(address_of(&m, &LogPolar::one(192), 2).unwrap(), Address::zeros(2));
        // t_0 itself is the level-0 center: M_0(t_0) = 0.
        let t0 = LogPolar::from_real(m.t_value(0));
        assert_eq!(address_of(&m, &t0, 1), Err(AddressError::HitCenter { level: 0 }));
        let out = to_log_polar(&Rect::from_f64(-0.5, 0.0, 192));
        assert!(matches!(address_of(&m, &out, 1), Err(AddressError::Escaped { .. })));
    }

    #[test]
    fn first_digit_follows_the_rotation_label() {
        // Pull a point of M_1^{-1}(D) back into the sector of exp(2πi·p/q) and
        // read off label 1.
        let prec = 192;
        let params = ModelParams::fractions(Constant::rational(2.into()), &[(2, 5), (1, 7)]).unwrap();
        let m = Model::new(&params, prec, 1).unwrap();
        let t0 = m.t_value(0).to_float().unwrap();
        let t1 = m.t_value(1).to_float().unwrap();
        let (center, _) = crate::model::moebius_preimage_disk(&t1);
        let root = Float::with_val(prec, center.ln_ref()) / 5u32;
        let r = root.exp();
        let ang = Float::with_val(prec, FloatConstant::Pi) * 2u32 * 2u32 / 5u32;
        let (s, c) = ang.sin_cos(Float::new(prec));
        let v = Rect::new(Float::with_val(prec, &r * &c), Float::with_val(prec, &r * &s));
        let omt = Float::with_val(prec, 1 - t0.clone());
        let den = Rect::new(
            Float::with_val(prec, 1 - Float::with_val(prec, &v.re * &omt)),
            Float::with_val(prec, -Float::with_val(prec, &v.im * &omt)),
        );
        let z = Rect::new(t0, Float::new(prec)).div(&den).unwrap();
        let a = address_of(&m, &to_log_polar(&z), 1).unwrap();
        assert_eq!(a.digits(), [1]);
    }

    proptest! {
        #[test]
        fn labels_are_bijective(q in 2u64..400, p0 in 1u64..400) {
            let p = p0 % q;
            prop_assume!(p > 0 && Integer::from(p).gcd(&Integer::from(q)) == 1);
            let mut seen = vec![false; q as usize];
            for m in 0..q {
                let k = component_label(m, p, q).unwrap();
                prop_assert!(!seen[k as usize]);
                seen[k as usize] = true;
                prop_assert_eq!(k * p % q, m);
            }
        }

        #[test]
        fn adding_map_cycles(moduli in prop::collection::vec(2u64..6, 1..5)) {
            let s = scale(&moduli);
            let total: u64 = moduli.iter().product();
            let mut a = Address::zeros(moduli.len());
            let mut seen = std::collections::HashSet::new();
            for _ in 0..total {
                prop_assert!(seen.insert(a.clone()));
                a = sigma_succ(&a, &s).unwrap();
            }
            prop_assert_eq!(a, Address::zeros(moduli.len()));
        }
    }
}
