use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::float::Constant as FloatConstant;
use rug::ops::Pow;
use rug::{Float, Integer};

use super::*;
use crate::numerics::{from_log_polar, to_log_polar, Angle};

const P: u32 = 192;

fn c(s: &str) -> Constant {
    s.parse().unwrap()
}

fn lp(re: f64, im: f64) -> LogPolar {
    to_log_polar(&Rect::from_f64(re, im, P))
}

fn rect(z: &LogPolar) -> Rect {
    from_log_polar(z, P).unwrap()
}

/// Direct rectangular evaluation of `((z - t)/(z(1 - t)))^q`.
fn phi_oracle(t: &Float, q: u32, z: &Rect) -> Rect {
    let prec = 2 * P;
    let t = Float::with_val(prec, t);
    let z = Rect::new(Float::with_val(prec, &z.re), Float::with_val(prec, &z.im));
    let num = Rect::new(Float::with_val(prec, &z.re - &t), z.im.clone());
    let omt = Float::with_val(prec, 1 - t.clone());
    let den = Rect::new(Float::with_val(prec, &z.re * &omt), Float::with_val(prec, &z.im * &omt));
    let m = num.div(&den).unwrap();
    let mut acc = m.clone();
    for _ in 1..q {
        acc = acc.mul(&m);
    }
    acc
}

fn close(a: &Rect, b: &Rect, rel: f64) -> bool {
    let scale = b.abs().to_f64().max(1e-300);
    let dr = Float::with_val(P, &a.re - &b.re).to_f64().abs();
    let di = Float::with_val(P, &a.im - &b.im).to_f64().abs();
    dr <= rel * scale && di <= rel * scale
}

#[test]
fn moebius_fixed_points_and_zero() {
    let t = ExtReal::from_f64(0.3, P);
    assert_eq!(moebius_apply(&t, &LogPolar::from_real(&t)), LogPolar::Zero);
    assert_eq!(moebius_apply(&t, &LogPolar::one(P)), LogPolar::one(P));
    assert_eq!(moebius_apply(&t, &LogPolar::Zero), LogPolar::Infinity);
    let inf = moebius_apply(&t, &LogPolar::Infinity).to_real().unwrap().to_f64();
    assert!((inf - 1.0 / 0.7).abs() < 1e-15);
}

#[test]
fn left_end_of_the_diameter_maps_to_minus_one() {
    for &tf in &[0.1, 0.5, 0.9] {
        let t = Float::with_val(P, tf);
        let left = Float::with_val(P, &t / Float::with_val(P, 2 - t.clone()));
        let m = moebius_apply(&ExtReal::from_float(t), &LogPolar::from_real(&ExtReal::from_float(left)));
        let LogPolar::Finite { log_r, arg } = m else { panic!() };
        assert_eq!(arg, Angle::Pi);
        assert!(log_r.to_f64().abs() < 1e-50);
    }
}

#[test]
fn preimage_disk_for_one_half() {
    let (center, radius) = moebius_preimage_disk(&Float::with_val(P, 0.5));
    let third = Float::with_val(P, 1) / 3u32;
    assert!(Float::with_val(P, &center - Float::with_val(P, &third * 2u32)).abs() < 1e-55);
    assert!(Float::with_val(P, &radius - &third).abs() < 1e-55);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let t = ExtReal::from_f64(0.5, P);
    for _ in 0..1000 {
        let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let z = Rect::new(
            Float::with_val(P, &center + Float::with_val(P, &radius * a.cos())),
            Float::with_val(P, &radius * a.sin()),
        );
        let m = moebius_apply(&t, &to_log_polar(&z));
        assert!(m.log_r().unwrap().to_f64().abs() <= 1e-12);
    }
}

#[test]
fn preimage_disk_shrinks_to_one() {
    let (center, radius) = moebius_preimage_disk(&Float::with_val(P, 1.0 - 1e-12));
    assert!(radius < 1e-12);
    assert!((center.to_f64() - 1.0).abs() < 1e-12);
}

#[test]
fn preimage_disk_matches_membership() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let eps = disk_tolerance(P);
    for _ in 0..10_000 {
        let tf: f64 = rng.gen_range(0.01..0.99);
        let t = Float::with_val(P, tf);
        let (center, radius) = moebius_preimage_disk(&t);
        let z = Rect::from_f64(rng.gen_range(-0.2..1.2), rng.gen_range(-0.7..0.7), P);
        let dx = Float::with_val(P, &z.re - &center);
        let dist = Float::with_val(P, dx.hypot_ref(&z.im));
        let inside = dist <= radius;
        let m = moebius_apply(&ExtReal::from_float(t), &to_log_polar(&z));
        assert_eq!(m.in_closed_disk(&eps), inside, "t={tf} z={:?}", z);
        if dist < radius {
            assert!(m.log_r().map_or(true, |l| l.is_neg()));
        }
    }
}

#[test]
fn phi_special_points() {
    let params = ModelParams::fractions(c("2"), &[(1, 3), (1, 5), (1, 7)]).unwrap();
    let m = Model::new(&params, P, 2).unwrap();
    for n in 0..3 {
        assert_eq!(m.phi_apply(n, &LogPolar::one(P)).unwrap(), LogPolar::one(P));
        let t = LogPolar::from_real(m.t_value(n));
        assert_eq!(m.phi_apply(n, &t).unwrap(), LogPolar::Zero);
        assert_eq!(m.phi_apply(n, &LogPolar::Zero).unwrap(), LogPolar::Infinity);
    }
}

#[test]
fn phi_matches_rectangular_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let q: u64 = rng.gen_range(2..40);
        let p = loop {
            let p = rng.gen_range(1..q);
            if Integer::from(p).gcd(&Integer::from(q)) == 1 {
                break p;
            }
        };
        let cf: f64 = rng.gen_range(1.01..(q as f64 / p as f64).min(20.0) * 0.999);
        let cs = format!("{cf:.6}");
        let params = ModelParams::fractions(c(&cs), &[(p, q)]).unwrap();
        let m = Model::new(&params, P, 0).unwrap();
        let t = m.t_value(0).to_float().unwrap();
        let z = Rect::from_f64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), P);
        let got = m.phi_apply(0, &to_log_polar(&z)).unwrap();
        let want = phi_oracle(&t, q as u32, &z);
        if want.abs() > 1e30 || want.abs() < 1e-30 {
            continue;
        }
        assert!(close(&rect(&got), &want, 1e-40), "q={q} t={t} z={z:?}");
    }
}

#[test]
fn real_points_stay_real_and_match_oracle() {
    let params = ModelParams::fractions(c("1.5"), &[(1, 3), (1, 7)]).unwrap();
    let m = Model::new(&params, P, 1).unwrap();
    for &x in &[-0.9, -0.1, 0.05, 0.3, 0.49, 0.51, 0.8, 0.999, 1.7] {
        for n in 0..2 {
            let t = m.t_value(n).to_float().unwrap();
            let q = [3, 7][n];
            let got = m.phi_apply(n, &lp(x, 0.0)).unwrap();
            assert!(got.is_real());
            let want = phi_oracle(&t, q, &Rect::from_f64(x, 0.0, P));
            assert!(close(&rect(&got), &want, 1e-40), "n={n} x={x}");
        }
    }
}

#[test]
fn huge_denominator_matches_direct_power() {
    // q = 2^256: raise M(x) to the power directly at 700 bits.
    let params = ModelParams::tower(c("2"), 3).unwrap();
    let m = Model::new(&params, 256, 3).unwrap();
    let level = m.level(3);
    let q = Integer::from(1) << 256;
    let t = level.t().to_float().unwrap();
    for &x in &[0.3, 0.6, 0.95, 1.5, -0.4] {
        let got = level.phi_real(&ExtReal::from_f64(x, 256));
        let wide = 700;
        let xw = Float::with_val(wide, x);
        let tw = Float::with_val(wide, &t);
        let den = Float::with_val(wide, &xw * Float::with_val(wide, 1 - &tw));
        let mx = Float::with_val(wide, &xw - &tw) / den;
        let want = Float::with_val(wide, mx.pow(&q)).ln();
        let got_ln = got.ln_abs().unwrap().to_float().unwrap();
        let rel = Float::with_val(wide, &got_ln - &want).abs().to_f64() / want.to_f64().abs();
        assert!(rel < 1e-60, "x={x} rel={rel}");
    }
}

#[test]
fn symbolic_levels_follow_the_limit_exponential() {
    // For astronomically large q, φ(x) = exp(C·p·(1 - 1/x)) up to negligible terms.
    let params = ModelParams::tower(c("2"), 3).unwrap();
    let m = Model::new(&params, 256, 6).unwrap();
    for n in 4..=6 {
        for &x in &[0.25, 0.5, 0.9, 2.0] {
            let got = m.level(n).phi_real(&ExtReal::from_f64(x, 256));
            let want = (2.0 * (1.0 - 1.0 / x)).exp();
            assert!((got.to_f64() - want).abs() < 1e-14 * want, "n={n} x={x}");
        }
    }
}

#[test]
fn orbit_of_one_and_minus_one() {
    let params = ModelParams::tower(c("2"), 3).unwrap();
    let m = Model::new(&params, P, 8).unwrap();
    let tr = m.orbit(&LogPolar::one(P), 8).unwrap();
    assert_eq!(tr.depth, Depth::Survived(8));
    assert!(tr.levels.iter().all(|z| *z == LogPolar::one(P)));
    let tr = m.orbit(&lp(-1.0, 0.0), 8).unwrap();
    assert_eq!(tr.depth, Depth::Escaped(0));
    assert_eq!(tr.levels.len(), 1);
    assert_eq!(m.orbit(&lp(0.0, 1.5), 8).unwrap().depth, Depth::Escaped(0));
}

#[test]
fn orbit_traces_are_nested_and_conjugation_symmetric() {
    let params = ModelParams::fractions(c("1.5"), &[(1, 3), (1, 2), (1, 3)]).unwrap();
    let m = Model::new(&params, P, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut seen = [0usize; 4];
    for _ in 0..3000 {
        let (x, y) = (rng.gen_range(0.2..1.0), rng.gen_range(-0.5..0.5));
        if x * x + y * y > 1.0 {
            continue;
        }
        let z = lp(x, y);
        let tr = m.orbit(&z, 2).unwrap();
        let d = tr.depth.levels_survived();
        seen[d.min(3)] += 1;
        if let Depth::Escaped(d) = tr.depth {
            assert_eq!(tr.levels.len(), d + 1);
        } else {
            assert_eq!(tr.levels.len(), 4);
        }
        for k in 0..3 {
            assert!(!tr.depth.in_level(k + 1) || tr.depth.in_level(k));
        }
        let tc = m.orbit(&z.conj(), 2).unwrap();
        assert_eq!(tc.depth, tr.depth);
        for (a, b) in tr.levels.iter().zip(&tc.levels) {
            assert_eq!(a.conj(), *b);
        }
    }
    assert!(seen.iter().all(|&s| s > 0), "{seen:?}");
}

#[test]
fn fast_escape_depth_agrees_with_orbit() {
    let params = ModelParams::fractions(c("3.2"), &[(1, 28), (1, 39670), (1, 5)]).unwrap();
    let m = Model::new(&params, 96, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..4000 {
        let z = Rect::from_f64(rng.gen_range(-0.1..1.05), rng.gen_range(-0.6..0.6), 96);
        let fast = m.escape_depth(&z, 2).unwrap();
        let slow = m.orbit(&to_log_polar(&z), 2).unwrap().depth;
        assert_eq!(fast, slow, "{z:?}");
    }
}

#[test]
fn argument_precision_is_enforced() {
    // A complex point reaching a level whose q has more bits than the precision.
    let params = ModelParams::tower(c("2"), 3).unwrap();
    let m = Model::new(&params, 128, 4).unwrap();
    let big = m.level(3);
    let z = LogPolar::Finite {
        log_r: ExtReal::from_float(Float::with_val(128, big.t().to_float().unwrap()).ln() + 0.5f64),
        arg: Angle::Turn(Float::with_val(128, 0.25)),
    };
    assert!(matches!(big.phi(&z), Err(NumericError::ArgumentPrecision { level: 3, .. })));
    let _ = FloatConstant::Pi;
}

#[test]
fn auto_precision_sums_level_bits() {
    let params = ModelParams::fractions(c("3.2"), &[(1, 28), (1, 39670)]).unwrap();
    let p = Model::auto_precision(&params, 1).unwrap();
    assert_eq!(p, 64 + 5);
    let p = Model::auto_precision(&params, 2).unwrap_err();
    assert!(matches!(p, ModelError::SequenceTooShort { .. }));
    let tower = ModelParams::tower(c("2"), 3).unwrap();
    assert_eq!(Model::auto_precision(&tower, 10).unwrap(), crate::numerics::AUTO_PRECISION_CAP);
}
