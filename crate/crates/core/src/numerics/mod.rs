//! Arbitrary-precision reals and the log-polar complex representation.

mod ext;
mod polar;

pub use ext::{digits_for, ExtReal};
pub use polar::{from_log_polar, pow_int, reduce, to_log_polar, Angle, LogPolar, Rect};

use rug::Float;
use thiserror::Error;

/// Working precision when nothing else is configured.
pub const DEFAULT_PRECISION: u32 = 256;

/// Ceiling for automatically chosen precision.
pub const AUTO_PRECISION_CAP: u32 = 1024;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericError {
    #[error("point at infinity has no rectangular form")]
    PointAtInfinity,
    #[error("magnitude outside the floating-point range")]
    OutOfRange,
    #[error("argument lost at level {level}: q needs {bits} bits but precision is {prec}")]
    ArgumentPrecision { level: usize, bits: u64, prec: u32 },
}

/// Precision covering the argument growth through levels with the given
/// `log2 q` values: 64 guard bits plus one bit per doubling.
pub fn auto_precision(log2_q: impl IntoIterator<Item = f64>) -> u32 {
    let total: f64 = 64.0 + log2_q.into_iter().sum::<f64>();
    if total.is_finite() {
        (total.ceil() as u32).clamp(64, AUTO_PRECISION_CAP)
    } else {
        AUTO_PRECISION_CAP
    }
}

/// `2^-(prec/2)`, the membership tolerance on `log_r`.
pub fn disk_tolerance(prec: u32) -> ExtReal {
    ExtReal::from_float(Float::with_val(prec, Float::i_exp(1, -((prec / 2) as i32))))
}

/// `S(w) = -ln(1 - w) / w` for `w < 1`, continuous at 0 with `S(0) = 1`.
pub(crate) fn log_ratio(w: &ExtReal) -> ExtReal {
    let prec = w.prec();
    let cutoff = -((prec as f64) + 16.0) * std::f64::consts::LN_2;
    let lw = match w.ln_abs() {
        None => return ExtReal::one(prec),
        Some(l) => l,
    };
    let lw_f = lw.to_f64();
    if lw_f < cutoff {
        // S(w) = 1 + w/2 + ...; the correction is below the working precision.
        return ExtReal::one(prec);
    }
    if w.is_neg() && lw_f > -cutoff {
        // ln(1 + |w|) / |w| with ln(1 + |w|) = ln|w| to working precision.
        return lw.div(&w.abs());
    }
    let wf = w.to_float().expect("moderate w is flat");
    let num = Float::with_val(prec, -&wf).ln_1p();
    ExtReal::from_float(Float::with_val(prec, -num / &wf))
}

/// Serde helpers printing floats with enough digits to round-trip.
pub mod ser {
    use rug::Float;
    use serde::ser::SerializeSeq;
    use serde::Serializer;

    use super::{digits_for, ExtReal};

    pub fn to_text(f: &Float) -> String {
        if f.is_zero() {
            return "0".to_string();
        }
        f.to_string_radix(10, Some(digits_for(f.prec())))
    }

    pub fn float<S: Serializer>(f: &Float, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&to_text(f))
    }

    pub fn floats<S: Serializer>(v: &[Float], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for f in v {
            seq.serialize_element(&to_text(f))?;
        }
        seq.end()
    }

    impl serde::Serialize for ExtReal {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            s.serialize_str(&self.to_string())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auto_precision_adds_bits_per_level() {
        assert_eq!(auto_precision([]), 64);
        assert_eq!(auto_precision([3f64.log2(), 1.0]), 64 + 3);
        assert_eq!(auto_precision([f64::INFINITY]), AUTO_PRECISION_CAP);
        assert_eq!(auto_precision([5000.0]), AUTO_PRECISION_CAP);
    }

    #[test]
    fn log_ratio_limits() {
        let p = 128;
        assert_eq!(log_ratio(&ExtReal::zero(p)).to_f64(), 1.0);
        let tiny = ExtReal::from_ln(false, ExtReal::from_f64(-1e6, p));
        assert_eq!(log_ratio(&tiny).to_f64(), 1.0);
        let half = log_ratio(&ExtReal::from_f64(0.5, p)).to_f64();
        assert!((half - 2.0 * std::f64::consts::LN_2).abs() < 1e-15);
        let neg = log_ratio(&ExtReal::from_f64(-3.0, p)).to_f64();
        assert!((neg - 4f64.ln() / 3.0).abs() < 1e-15);
        let huge_neg = -ExtReal::from_ln(false, ExtReal::from_f64(1e6, p));
        let s = log_ratio(&huge_neg);
        let want = ExtReal::from_f64(1e6, p).div(&huge_neg.abs());
        assert_eq!(s, want);
    }
}
