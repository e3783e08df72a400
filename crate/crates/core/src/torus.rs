//! Angles on the torus `R / 2πZ`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Low part of π/2 (Cody-Waite split): `FRAC_PI_2 + PIO2_LO` ≈ π/2 to ~1e-33.
const PIO2_LO: f64 = 6.123_233_995_736_766e-17;
/// Low part of π.
const PI_LO: f64 = 1.224_646_799_147_353_2e-16;

/// Doubles this close to a multiple of π/2 denote that multiple exactly.
pub const QUARTER_TURN_SNAP: f64 = 1.2e-14;

/// Tolerance for [`TorusAngle::same_as`].
pub const ANGLE_EQ_TOL: f64 = 1e-12;

/// A point of the torus, stored as its canonical representative in `[0, 2π)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(from = "f64", into = "f64")]
pub struct TorusAngle(f64);

impl TorusAngle {
    pub const ZERO: TorusAngle = TorusAngle(0.0);
    pub const PI: TorusAngle = TorusAngle(PI);

    pub fn new(value: f64) -> Self {
        let mut v = value.rem_euclid(TAU);
        if v >= TAU {
            v = 0.0;
        }
        TorusAngle(v)
    }

    /// Canonical representative in `[0, 2π)`.
    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Representative in `(-π, π]`.
    pub fn signed(self) -> f64 {
        if self.0 > PI {
            self.0 - TAU
        } else {
            self.0
        }
    }

    /// Geodesic distance on the torus, in `[0, π]`.
    pub fn distance(self, other: TorusAngle) -> f64 {
        (self - other).signed().abs()
    }

    pub fn same_as(self, other: TorusAngle) -> bool {
        self.distance(other) <= ANGLE_EQ_TOL
    }

    /// Index `k` in `0..4` when the angle is (the double nearest to) `k·π/2`.
    pub fn quarter_turns(self) -> Option<u8> {
        let (k, rem) = self.quarter_reduce();
        (rem.abs() <= QUARTER_TURN_SNAP).then_some((k % 4) as u8)
    }

    fn quarter_reduce(self) -> (i64, f64) {
        let k = (self.0 / FRAC_PI_2).round();
        let rem = (-k).mul_add(FRAC_PI_2, self.0) - k * PIO2_LO;
        (k as i64, rem)
    }

    /// `e^{iθ}`, exact at multiples of π/2.
    pub fn cis(self) -> Complex64 {
        let (k, rem) = self.quarter_reduce();
        let (s, c) = if rem.abs() <= QUARTER_TURN_SNAP { (0.0, 1.0) } else { rem.sin_cos() };
        match k.rem_euclid(4) {
            0 => Complex64::new(c, s),
            1 => Complex64::new(-s, c),
            2 => Complex64::new(-c, -s),
            _ => Complex64::new(s, -c),
        }
    }
}

impl From<f64> for TorusAngle {
    fn from(value: f64) -> Self {
        TorusAngle::new(value)
    }
}

impl From<TorusAngle> for f64 {
    fn from(a: TorusAngle) -> f64 {
        a.0
    }
}

impl Add for TorusAngle {
    type Output = TorusAngle;
    fn add(self, rhs: TorusAngle) -> TorusAngle {
        TorusAngle::new(self.0 + rhs.0)
    }
}

impl Sub for TorusAngle {
    type Output = TorusAngle;
    fn sub(self, rhs: TorusAngle) -> TorusAngle {
        TorusAngle::new(self.0 - rhs.0)
    }
}

impl Neg for TorusAngle {
    type Output = TorusAngle;
    fn neg(self) -> TorusAngle {
        TorusAngle::new(-self.0)
    }
}

impl fmt::Display for TorusAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `c·π/d` rounded once, via a double-double product with π.
fn pi_fraction(c: f64, d: f64) -> f64 {
    let p = c * PI;
    let e = c.mul_add(PI, -p) + c * PI_LO;
    let q = p / d;
    let rem = (-q).mul_add(d, p);
    q + (rem + e) / d
}

/// Parses a real angle in radians. Accepts plain numbers (`0.7`, `-1e-3`) and
/// π-literals such as `pi`, `-pi/2`, `2pi/3`, `3*pi/4`.
pub fn parse_angle(text: &str) -> Result<f64> {
    let err = || Error::AngleParse(text.to_string());
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let lower = s.to_ascii_lowercase();
    let Some(pos) = lower.find("pi") else {
        return lower.parse::<f64>().map_err(|_| err());
    };
    let (head, tail) = (&lower[..pos], &lower[pos + 2..]);
    let head = head.strip_suffix('*').unwrap_or(head);
    let coeff = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|_| err())?,
    };
    let denom = match tail {
        "" => 1.0,
        t => t.strip_prefix('/').ok_or_else(err)?.parse::<f64>().map_err(|_| err())?,
    };
    if !coeff.is_finite() || !denom.is_finite() || denom == 0.0 {
        return Err(err());
    }
    Ok(pi_fraction(coeff, denom))
}

impl FromStr for TorusAngle {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_angle(s).map(TorusAngle::new)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonicalizes_into_half_open_interval() {
        assert_eq!(TorusAngle::new(TAU).value(), 0.0);
        assert_eq!(TorusAngle::new(-0.0).value(), 0.0);
        assert!((TorusAngle::new(-0.5).value() - (TAU - 0.5)).abs() < 1e-15);
        assert!(TorusAngle::new(-1e-300).value() < TAU);
    }

    #[test]
    fn cis_is_exact_on_quarter_turns() {
        for (k, expect) in [(0.0, (1.0, 0.0)), (1.0, (0.0, 1.0)), (2.0, (-1.0, 0.0)), (3.0, (0.0, -1.0))] {
            let z = TorusAngle::new(k * FRAC_PI_2).cis();
            assert_eq!((z.re, z.im), expect, "k = {k}");
        }
        // sums that land on π up to an ulp or two
        let a = TorusAngle::new(0.3);
        let b = a + TorusAngle::PI;
        assert_eq!((b - a).cis(), Complex64::new(-1.0, 0.0));
        assert_eq!((a - a).cis(), Complex64::new(1.0, 0.0));
        assert_eq!((b - a).quarter_turns(), Some(2));
        assert_eq!(TorusAngle::new(0.1).quarter_turns(), None);
    }

    #[test]
    fn cis_matches_libm_away_from_quarter_turns() {
        for i in 0..1000 {
            let x = 0.00631 * i as f64 + 1e-3;
            let z = TorusAngle::new(x).cis();
            assert!((z.re - x.cos()).abs() < 1e-15 && (z.im - x.sin()).abs() < 1e-15);
        }
    }

    #[test]
    fn parses_pi_literals() {
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("pi/2").unwrap(), FRAC_PI_2);
        assert_eq!(parse_angle("-pi/4").unwrap(), -std::f64::consts::FRAC_PI_4);
        assert_eq!(parse_angle("2*pi").unwrap(), TAU);
        assert_eq!(parse_angle("pi/3").unwrap(), std::f64::consts::FRAC_PI_3);
        assert_eq!(parse_angle("2pi/3").unwrap(), 2.094_395_102_393_195_5);
        assert_eq!(parse_angle(" 0.7 ").unwrap(), 0.7);
        assert_eq!(parse_angle("1e-3").unwrap(), 1e-3);
        for bad in ["", "pie", "pi/0", "x", "pi/", "2**pi"] {
            assert!(parse_angle(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn signed_and_distance() {
        let a = TorusAngle::new(0.1);
        let b = TorusAngle::new(TAU - 0.1);
        assert!((a.distance(b) - 0.2).abs() < 1e-15);
        assert!((b.signed() + 0.1).abs() < 1e-15);
        assert!(TorusAngle::new(1.0).same_as(TorusAngle::new(1.0 + TAU)));
    }

    proptest! {
        #[test]
        fn canonical_representative_is_unique(x in -100.0f64..100.0, k in -5i32..5) {
            let a = TorusAngle::new(x);
            let b = TorusAngle::new(x + k as f64 * TAU);
            prop_assert!(a.value() >= 0.0 && a.value() < TAU);
            prop_assert!(a.distance(b) < 1e-12);
        }

        #[test]
        fn addition_wraps(x in 0.0f64..TAU, y in 0.0f64..TAU) {
            let s = TorusAngle::new(x) + TorusAngle::new(y);
            prop_assert!((s - TorusAngle::new(y)).distance(TorusAngle::new(x)) < 1e-12);
            prop_assert!(s.value() < TAU);
        }
    }
}
