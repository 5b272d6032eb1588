//! Weierstrass models over Z, their invariants, minimal models and quadratic twists.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::val_or_inf;
use crate::error::{Error, Result};

/// `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6` with integer coefficients
/// and nonzero discriminant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeierstrassModel {
    a: [BigInt; 5],
}

/// The standard `b`/`c` invariants, the discriminant and `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveInvariants {
    pub b2: BigInt,
    pub b4: BigInt,
    pub b6: BigInt,
    pub b8: BigInt,
    pub c4: BigInt,
    pub c6: BigInt,
    pub disc: BigInt,
    pub j: BigRational,
}

fn raw_invariants(a: &[BigInt; 5]) -> (BigInt, BigInt, BigInt, BigInt, BigInt, BigInt, BigInt) {
    let [a1, a2, a3, a4, a6] = a;
    let b2 = a1 * a1 + 4 * a2;
    let b4 = 2 * a4 + a1 * a3;
    let b6 = a3 * a3 + 4 * a6;
    let b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
    let c4 = &b2 * &b2 - 24 * &b4;
    let b2_cubed: BigInt = &b2 * &b2 * &b2;
    let c6 = 36 * &b2 * &b4 - 216 * &b6 - b2_cubed;
    let disc = 9i32 * &b2 * &b4 * &b6 - 8i32 * &b4 * &b4 * &b4 - 27i32 * &b6 * &b6 - &b2 * &b2 * &b8;
    (b2, b4, b6, b8, c4, c6, disc)
}

impl WeierstrassModel {
    pub fn new(a1: BigInt, a2: BigInt, a3: BigInt, a4: BigInt, a6: BigInt) -> Result<Self> {
        let a = [a1, a2, a3, a4, a6];
        if raw_invariants(&a).6.is_zero() {
            return Err(Error::SingularCurve);
        }
        Ok(WeierstrassModel { a })
    }

    pub fn from_ints(a: [i64; 5]) -> Result<Self> {
        let [a1, a2, a3, a4, a6] = a.map(BigInt::from);
        Self::new(a1, a2, a3, a4, a6)
    }

    /// Coefficients in the order `a1, a2, a3, a4, a6`.
    pub fn coeffs(&self) -> &[BigInt; 5] {
        &self.a
    }

    pub fn a1(&self) -> &BigInt {
        &self.a[0]
    }
    pub fn a2(&self) -> &BigInt {
        &self.a[1]
    }
    pub fn a3(&self) -> &BigInt {
        &self.a[2]
    }
    pub fn a4(&self) -> &BigInt {
        &self.a[3]
    }
    pub fn a6(&self) -> &BigInt {
        &self.a[4]
    }

    pub fn invariants(&self) -> CurveInvariants {
        let (b2, b4, b6, b8, c4, c6, disc) = raw_invariants(&self.a);
        debug_assert_eq!(&c4 * &c4 * &c4 - &c6 * &c6, BigInt::from(1728) * &disc);
        debug_assert_eq!(&b2 * &b2 - 24 * &b4, c4);
        let j = BigRational::new(&c4 * &c4 * &c4, disc.clone());
        CurveInvariants { b2, b4, b6, b8, c4, c6, disc, j }
    }

    pub fn discriminant(&self) -> BigInt {
        raw_invariants(&self.a).6
    }

    /// Change of coordinates `x = x' + r`, `y = y' + s x' + t` (u = 1).
    pub fn rst_transform(&self, r: &BigInt, s: &BigInt, t: &BigInt) -> Self {
        let [a1, a2, a3, a4, a6] = &self.a;
        let n1 = a1 + 2 * s;
        let n2 = a2 - s * a1 + 3 * r - s * s;
        let n3 = a3 + r * a1 + 2 * t;
        let n4 = a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t;
        let n6 = a6 + r * a4 + r * r * a2 + r * r * r - t * a3 - t * t - r * t * a1;
        WeierstrassModel { a: [n1, n2, n3, n4, n6] }
    }

    /// The model with `a_i` replaced by `u^i a_i`; invariants scale by `u^4, u^6, u^12`.
    pub fn scale_up(&self, u: &BigInt) -> Self {
        let [a1, a2, a3, a4, a6] = &self.a;
        let u2 = u * u;
        let u3 = &u2 * u;
        let u4 = &u2 * &u2;
        let u6 = &u3 * &u3;
        WeierstrassModel { a: [a1 * u, a2 * u2, a3 * u3, a4 * u4, a6 * u6] }
    }

    /// The reduced integral model with invariants exactly `(c4, c6)`, if one exists.
    ///
    /// `b2` is pinned modulo 12 by `c6 = -b2 (mod 12)`; the remaining
    /// coefficients follow from the invariant relations, and any failure of
    /// integrality means no integral model has these invariants.
    pub fn from_c4_c6(c4: &BigInt, c6: &BigInt) -> Option<Self> {
        let twelve = BigInt::from(12);
        let mut b2 = (-c6).mod_floor(&twelve);
        if b2 > BigInt::from(6) {
            b2 -= &twelve;
        }
        let (b4, r) = (&b2 * &b2 - c4).div_rem(&BigInt::from(24));
        if !r.is_zero() {
            return None;
        }
        let b2_cubed: BigInt = &b2 * &b2 * &b2;
        let (b6, r) = (36i32 * &b2 * &b4 - b2_cubed - c6).div_rem(&BigInt::from(216));
        if !r.is_zero() {
            return None;
        }
        let two = BigInt::from(2);
        let four = BigInt::from(4);
        let a1 = b2.mod_floor(&two);
        let a3 = b6.mod_floor(&two);
        let (a2, r2) = (&b2 - &a1).div_rem(&four);
        let (a4, r4) = (&b4 - &a1 * &a3).div_rem(&two);
        let (a6, r6) = (&b6 - &a3).div_rem(&four);
        if !(r2.is_zero() && r4.is_zero() && r6.is_zero()) {
            return None;
        }
        let model = WeierstrassModel::new(a1, a2, a3, a4, a6).ok()?;
        let inv = model.invariants();
        (inv.c4 == *c4 && inv.c6 == *c6).then_some(model)
    }

    /// A globally minimal model together with the scaling factor `u`.
    pub fn minimal_model(&self) -> (WeierstrassModel, BigInt) {
        let inv = self.invariants();
        let (c4, c6, disc) = (&inv.c4, &inv.c6, &inv.disc);
        let g = if c4.is_zero() {
            c6.abs()
        } else if c6.is_zero() {
            c4.abs()
        } else {
            c4.gcd(c6)
        };
        let mut u_rest = BigInt::one();
        let mut e_max = [0u32; 2];
        for q in candidate_factors(&g) {
            let v4 = big_val(c4, &q) / 4;
            let v6 = big_val(c6, &q) / 6;
            let vd = big_val(disc, &q) / 12;
            let e = v4.min(v6).min(vd);
            if q == BigInt::from(2) {
                e_max[0] = e;
            } else if q == BigInt::from(3) {
                e_max[1] = e;
            } else if e > 0 {
                u_rest *= q.pow(e);
            }
        }
        let mut combos: Vec<BigInt> = Vec::new();
        for e2 in 0..=e_max[0] {
            for e3 in 0..=e_max[1] {
                combos.push(BigInt::from(2).pow(e2) * BigInt::from(3).pow(e3));
            }
        }
        combos.sort_by(|a, b| b.cmp(a));
        for u23 in combos {
            let u = &u_rest * u23;
            let u4 = u.pow(4);
            let u6 = u.pow(6);
            if let Some(m) = WeierstrassModel::from_c4_c6(&(c4 / &u4), &(c6 / &u6)) {
                return (m, u);
            }
        }
        // Unreachable for integral input: u = 1 always reconstructs.
        (self.clone(), BigInt::one())
    }

    /// Whether no prime can be scaled out of the model.
    pub fn is_minimal(&self) -> bool {
        self.minimal_model().1.is_one()
    }

    /// Twist by `d`: invariants become `u^4 d^2 c4`, `u^6 d^3 c6` for the least
    /// `u` in `{1, 2, 3, 6}` giving an integral model.
    pub fn quadratic_twist(&self, d: i64) -> Result<WeierstrassModel> {
        if d == 0 || !is_squarefree(d) {
            return Err(Error::InvalidTwist(d.to_string()));
        }
        let inv = self.invariants();
        let d = BigInt::from(d);
        let c4 = &inv.c4 * &d * &d;
        let c6 = &inv.c6 * &d * &d * &d;
        for u in [1i64, 2, 3, 6] {
            let u = BigInt::from(u);
            if let Some(m) = WeierstrassModel::from_c4_c6(&(&c4 * u.pow(4)), &(&c6 * u.pow(6))) {
                return Ok(m);
            }
        }
        unreachable!("u = 6 always yields the integral short model")
    }

    /// `j` has nonnegative `p`-adic valuation.
    pub fn potentially_good_at(&self, p: u64) -> bool {
        let j = self.invariants().j;
        j.is_zero() || val_or_inf(j.denom(), p) == 0
    }

    /// Stable hex digest of the model, used as a cache key.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let hash = Sha256::digest(self.to_string().as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Coefficients reduced modulo a word-sized prime.
    pub fn reduce_mod(&self, ell: u64) -> [u64; 5] {
        self.a.clone().map(|c| crate::arith::reduce(&c, ell))
    }
}

fn big_val(n: &BigInt, q: &BigInt) -> u32 {
    if n.is_zero() {
        return u32::MAX;
    }
    let mut m = n.clone();
    let mut e = 0;
    loop {
        let (quo, r) = m.div_rem(q);
        if !r.is_zero() {
            return e;
        }
        m = quo;
        e += 1;
    }
}

/// Prime factors of `g` found by trial division up to 10^6, plus any
/// remaining cofactor as a single block.
fn candidate_factors(g: &BigInt) -> Vec<BigInt> {
    let mut out = Vec::new();
    let mut m = g.abs();
    let mut q = 2u64;
    while q <= 1_000_000 {
        let qb = BigInt::from(q);
        if &qb * &qb > m {
            break;
        }
        if (&m % &qb).is_zero() {
            while (&m % &qb).is_zero() {
                m /= &qb;
            }
            out.push(qb);
        }
        q += if q == 2 { 1 } else { 2 };
    }
    if m > BigInt::one() {
        out.push(m);
    }
    out
}

/// Squarefree test by trial division.
pub fn is_squarefree(d: i64) -> bool {
    let mut n = d.unsigned_abs();
    if n == 0 {
        return false;
    }
    let mut q = 2u64;
    while q * q <= n {
        if n % q == 0 {
            n /= q;
            if n % q == 0 {
                return false;
            }
        }
        q += 1;
    }
    true
}

impl fmt::Display for WeierstrassModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a1, a2, a3, a4, a6] = &self.a;
        write!(f, "{a1},{a2},{a3},{a4},{a6}")
    }
}

impl FromStr for WeierstrassModel {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.trim().split(',').map(str::trim).collect();
        if parts.len() != 5 {
            return Err(Error::Parse(format!(
                "expected five comma-separated integers a1,a2,a3,a4,a6, got {text:?}"
            )));
        }
        let mut a = Vec::with_capacity(5);
        for p in parts {
            a.push(
                p.parse::<BigInt>()
                    .map_err(|_| Error::Parse(format!("not an integer: {p:?}")))?,
            );
        }
        let [a1, a2, a3, a4, a6]: [BigInt; 5] = a.try_into().expect("five parts");
        WeierstrassModel::new(a1, a2, a3, a4, a6)
    }
}

/// Parse `"a1,a2,a3,a4,a6"` into a nonsingular model.
pub fn parse_curve(text: &str) -> Result<WeierstrassModel> {
    text.parse()
}

impl Serialize for WeierstrassModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for WeierstrassModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn example_curve_invariants() {
        let e = WeierstrassModel::from_ints([0, 0, 1, -3, -5]).unwrap();
        let inv = e.invariants();
        assert_eq!(inv.c4, big(144));
        assert_eq!(inv.c6, big(4104));
        assert_eq!(inv.disc, big(-8019));
        assert_eq!(inv.j, BigRational::new(big(-144 * 144 * 144), big(8019)));
    }

    #[test]
    fn congruent_number_curve() {
        let inv = WeierstrassModel::from_ints([0, 0, 0, -1, 0]).unwrap().invariants();
        assert_eq!(inv.disc, big(64));
        assert_eq!(inv.c4, big(48));
    }

    #[test]
    fn singular_rejected() {
        assert_eq!(WeierstrassModel::from_ints([0, 0, 0, 0, 0]), Err(Error::SingularCurve));
        assert_eq!(parse_curve("0,0,0,0,0"), Err(Error::SingularCurve));
        assert!(matches!(parse_curve("1,2"), Err(Error::Parse(_))));
        assert!(matches!(parse_curve("a,0,0,0,1"), Err(Error::Parse(_))));
    }

    #[test]
    fn parse_round_trip() {
        let e = parse_curve(" 0, 0,1,-3,-5").unwrap();
        assert_eq!(e, WeierstrassModel::from_ints([0, 0, 1, -3, -5]).unwrap());
        assert_eq!(e.to_string(), "0,0,1,-3,-5");
    }

    #[test]
    fn minimal_model_of_twist() {
        let e = WeierstrassModel::from_ints([0, 0, 1, -3, -5]).unwrap();
        let tw = e.quadratic_twist(-3).unwrap();
        let inv = tw.invariants();
        assert_eq!(inv.c4, big(1296));
        assert_eq!(inv.c6, big(-110808));
        assert_eq!(inv.disc, -BigInt::from(3).pow(12) * 11);
        // the rescaling is legitimate on the input
        assert!(val_or_inf(&inv.c4, 3) >= 4);
        assert!(val_or_inf(&inv.c6, 3) >= 6);
        assert!(val_or_inf(&inv.disc, 3) >= 12);
        let (m, u) = tw.minimal_model();
        let mi = m.invariants();
        assert_eq!(u, big(3));
        assert_eq!((mi.c4, mi.c6, mi.disc), (big(16), big(-152), big(-11)));
        assert_eq!(m, WeierstrassModel::from_ints([0, -1, 1, 0, 0]).unwrap());
    }

    #[test]
    fn already_minimal_is_fixed() {
        let e = WeierstrassModel::from_ints([0, 0, 1, -3, -5]).unwrap();
        assert_eq!(e.minimal_model(), (e.clone(), big(1)));
    }

    #[test]
    fn scaled_model_recovers_original() {
        let e = WeierstrassModel::from_ints([0, 0, 0, -1, 0]).unwrap();
        let scaled = e.scale_up(&big(2));
        assert_eq!(scaled.invariants().disc, big(64) * big(2).pow(12));
        assert_eq!(scaled.minimal_model(), (e, big(2)));
    }

    #[test]
    fn twist_identities() {
        let e = WeierstrassModel::from_ints([0, 0, 1, -3, -5]).unwrap();
        let t1 = e.quadratic_twist(1).unwrap();
        assert_eq!(t1.invariants().c4, e.invariants().c4);
        assert_eq!(t1.invariants().c6, e.invariants().c6);
        for d in [-1i64, 5, -7, 10, -15] {
            let back = e.quadratic_twist(d).unwrap().quadratic_twist(d).unwrap();
            assert_eq!(back.minimal_model().0, e, "d = {d}");
        }
        assert!(matches!(e.quadratic_twist(0), Err(Error::InvalidTwist(_))));
        assert!(matches!(e.quadratic_twist(12), Err(Error::InvalidTwist(_))));
    }

    #[test]
    fn potential_good_reduction() {
        let e = WeierstrassModel::from_ints([0, 0, 1, -3, -5]).unwrap();
        assert!(e.potentially_good_at(3));
        assert!(!e.potentially_good_at(11));
    }

    proptest! {
        #[test]
        fn invariant_identities(a in prop::array::uniform5(-50i64..50)) {
            if let Ok(e) = WeierstrassModel::from_ints(a) {
                let inv = e.invariants();
                prop_assert_eq!(&inv.c4 * &inv.c4 * &inv.c4 - &inv.c6 * &inv.c6, BigInt::from(1728) * &inv.disc);
                prop_assert_eq!(&inv.b2 * &inv.b2 - 24 * &inv.b4, inv.c4.clone());
            }
        }

        #[test]
        fn coordinate_changes_preserve_invariants(a in prop::array::uniform5(-30i64..30), r in -5i64..5, s in -5i64..5, t in -5i64..5) {
            if let Ok(e) = WeierstrassModel::from_ints(a) {
                let f = e.rst_transform(&big(r), &big(s), &big(t));
                let (ie, ifx) = (e.invariants(), f.invariants());
                prop_assert_eq!(ie.c4, ifx.c4);
                prop_assert_eq!(ie.c6, ifx.c6);
                prop_assert_eq!(ie.disc, ifx.disc);
                prop_assert_eq!(e.minimal_model().0, f.minimal_model().0);
            }
        }

        #[test]
        fn scaling_is_undone(a in prop::array::uniform5(-20i64..20), u in prop::sample::select(vec![2i64, 3, 5, 6, 10])) {
            if let Ok(e) = WeierstrassModel::from_ints(a) {
                let (m, u0) = e.minimal_model();
                let (m2, u2) = e.scale_up(&big(u)).minimal_model();
                prop_assert_eq!(m2, m);
                prop_assert_eq!(u2, u0 * big(u));
            }
        }
    }
}
