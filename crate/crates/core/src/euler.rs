//! Euler-characteristic factors for curves with additive, potentially good
//! ordinary reduction at `p`, and the vanishing criterion for `mu` and
//! `lambda` over the cyclotomic Z_p-extension of Q.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::arith::{factor_bigint, is_prime, padic_valuation, sieve_primes};
use crate::curve::WeierstrassModel;
use crate::error::{Error, Result};
use crate::iwasawa::CharSeries;
use crate::points::count_points_naive;
use crate::tate::{reduction_type, ReductionType};

/// A quadratic twist with good ordinary reduction at `p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrdinaryTwist {
    pub d: i64,
    pub model: WeierstrassModel,
    pub a_p: i64,
    /// Points on the reduction of the twist over `F_p`.
    pub frak_f_count: u64,
}

/// The p-part of Sha, either a power of `p` or not known.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShaOrder {
    Known(u64),
    Unknown,
}

impl ShaOrder {
    /// Accepts `n` only when it is a power of `p`.
    pub fn known(n: u64, p: u64) -> Result<Self> {
        let mut m = n;
        while m > 1 && m % p == 0 {
            m /= p;
        }
        if n == 0 || m != 1 {
            return Err(Error::InvalidInput(format!("{n} is not a power of {p}")));
        }
        Ok(ShaOrder::Known(n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PiImageStatus {
    /// The image lies in a group of order prime to `p`, so its order is too.
    PrimeToPImplied,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Vanishing {
    Zero,
    Nonzero,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EulerFactors {
    pub p: u64,
    pub twist: OrdinaryTwist,
    pub sha_p_order: ShaOrder,
    pub frak_f_count: u64,
    pub pi_image_status: PiImageStatus,
    /// `(ell, c_ell)` for every bad prime other than `p`.
    pub tamagawa: Vec<(u64, u32)>,
    pub tamagawa_product: u64,
    pub ordinary: bool,
    pub analytic_rank_zero: Option<bool>,
    pub torsion_free_at_p: bool,
}

fn check_p(p: u64) -> Result<()> {
    if p < 3 || !is_prime(p) {
        return Err(Error::InvalidModulus(p));
    }
    Ok(())
}

/// Discriminant of the quadratic subfield of `Q(mu_p)`.
pub fn quadratic_subfield_disc(p: u64) -> i64 {
    if p % 4 == 1 {
        p as i64
    } else {
        -(p as i64)
    }
}

/// Twists by the discriminant of the quadratic subfield of `Q(mu_p)` and
/// checks that the result is good and ordinary at `p`.
pub fn good_ordinary_twist(model: &WeierstrassModel, p: u64) -> Result<OrdinaryTwist> {
    check_p(p)?;
    let (minimal, _) = model.minimal_model();
    match reduction_type(&minimal, p)?.reduction {
        ReductionType::Additive => {}
        ReductionType::Good => {
            return Err(Error::Precondition(format!("good reduction at {p}; no twist is needed")));
        }
        _ => return Err(Error::Precondition(format!("multiplicative reduction at {p}"))),
    }
    if !minimal.potentially_good_at(p) {
        return Err(Error::Precondition(format!("potentially multiplicative reduction at {p}")));
    }
    let d = quadratic_subfield_disc(p);
    let (twisted, _) = minimal.quadratic_twist(d)?.minimal_model();
    if reduction_type(&twisted, p)?.reduction != ReductionType::Good {
        return Err(Error::AssumptionNotSatisfied(format!(
            "the twist by {d} does not have good reduction at {p}"
        )));
    }
    let frak_f_count = count_points_naive(&twisted, p)?;
    let a_p = p as i64 + 1 - frak_f_count as i64;
    if a_p.rem_euclid(p as i64) == 0 {
        return Err(Error::Supersingular(p));
    }
    Ok(OrdinaryTwist { d, model: twisted, a_p, frak_f_count })
}

/// Whether `E(Q)` has no point of order `p`.
///
/// A good prime `ell != p` with `p` prime to `#E(F_ell)` settles it, since
/// reduction is injective on torsion of order prime to `ell`. Otherwise the
/// rational torsion is listed with the Nagell-Lutz theorem.
pub fn torsion_free_at_p(model: &WeierstrassModel, p: u64) -> Result<bool> {
    check_p(p)?;
    let (minimal, _) = model.minimal_model();
    let disc = minimal.discriminant();
    let mut tried = 0;
    for ell in sieve_primes(5000)?.iter() {
        if ell == p || (&disc % ell).is_zero() {
            continue;
        }
        if count_points_naive(&minimal, ell)? % p != 0 {
            return Ok(true);
        }
        tried += 1;
        if tried >= 100 {
            break;
        }
    }
    if p > 7 {
        // Rational torsion points have order at most 12.
        return Ok(true);
    }
    Ok(!rational_torsion_orders(&minimal)?.iter().any(|&n| n as u64 % p == 0))
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum RatPoint {
    Inf,
    Aff(BigRational, BigRational),
}

/// `y^2 = x^3 + a x + b` over Q.
struct ShortQ {
    a: BigRational,
}

impl ShortQ {
    fn add(&self, u: &RatPoint, v: &RatPoint) -> RatPoint {
        let (x1, y1, x2, y2) = match (u, v) {
            (RatPoint::Inf, _) => return v.clone(),
            (_, RatPoint::Inf) => return u.clone(),
            (RatPoint::Aff(x1, y1), RatPoint::Aff(x2, y2)) => (x1, y1, x2, y2),
        };
        let lambda = if x1 == x2 {
            if (y1 + y2).is_zero() {
                return RatPoint::Inf;
            }
            let three = BigRational::from_integer(3.into());
            let two = BigRational::from_integer(2.into());
            (three * x1 * x1 + &self.a) / (two * y1)
        } else {
            (y2 - y1) / (x2 - x1)
        };
        let x3 = &lambda * &lambda - x1 - x2;
        let y3 = lambda * (x1 - &x3) - y1;
        RatPoint::Aff(x3, y3)
    }
}

/// Orders of the nontrivial rational torsion points of odd order.
fn rational_torsion_orders(model: &WeierstrassModel) -> Result<Vec<u32>> {
    let inv = model.invariants();
    let a: BigInt = -27i32 * &inv.c4;
    let b: BigInt = -54i32 * &inv.c6;
    let d: BigInt = 4 * &a * &a * &a + 27 * &b * &b;
    let curve = ShortQ { a: BigRational::from_integer(a.clone()) };
    let mut orders = Vec::new();
    for y in square_divisor_roots(&d)? {
        let c = &b - &y * &y;
        for x in integer_roots_of_cubic(&a, &c) {
            for y in [y.clone(), -y.clone()] {
                let pt = RatPoint::Aff(BigRational::from_integer(x.clone()), BigRational::from_integer(y));
                if let Some(n) = torsion_order(&curve, &pt) {
                    orders.push(n);
                }
            }
        }
    }
    Ok(orders)
}

/// Order of `pt` if it is at most 12, else `None`.
fn torsion_order(curve: &ShortQ, pt: &RatPoint) -> Option<u32> {
    let mut acc = pt.clone();
    for n in 2..=12u32 {
        acc = curve.add(&acc, pt);
        match &acc {
            RatPoint::Inf => return Some(n),
            RatPoint::Aff(x, y) if !x.is_integer() || !y.is_integer() => return None,
            _ => {}
        }
    }
    None
}

/// All `y > 0` with `y^2 | d`.
fn square_divisor_roots(d: &BigInt) -> Result<Vec<BigInt>> {
    let mut roots = vec![BigInt::one()];
    for (q, e) in factor_bigint(d)? {
        let q = BigInt::from(q);
        let mut next = Vec::new();
        for r in &roots {
            let mut power = BigInt::one();
            for _ in 0..=e / 2 {
                next.push(r * &power);
                power *= &q;
            }
        }
        roots = next;
    }
    roots.sort();
    Ok(roots)
}

/// Integer roots of `x^3 + a x + c`, by bisection on each interval where the
/// cubic is monotone.
fn integer_roots_of_cubic(a: &BigInt, c: &BigInt) -> Vec<BigInt> {
    let h = |x: &BigInt| x * x * x + a * x + c;
    let bound = BigInt::one() + a.abs().max(c.abs());
    let mut intervals = Vec::new();
    if a.is_negative() {
        let t: BigInt = (-a / 3i32).sqrt();
        intervals.push((-&bound, -&t - 1, true));
        intervals.push((-&t, t.clone(), false));
        intervals.push((t + 1, bound, true));
    } else {
        intervals.push((-&bound, bound, true));
    }
    let mut roots = Vec::new();
    for (mut lo, mut hi, increasing) in intervals {
        if lo > hi {
            continue;
        }
        // Least x in [lo, hi] with h(x) >= 0 (increasing) or h(x) <= 0.
        let past = |x: &BigInt| if increasing { !h(x).is_negative() } else { !h(x).is_positive() };
        if !past(&hi) {
            continue;
        }
        while lo < hi {
            let mid = (&lo + &hi).div_floor(&BigInt::from(2));
            if past(&mid) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        if h(&lo).is_zero() && !roots.contains(&lo) {
            roots.push(lo);
        }
    }
    roots
}

/// Collects the factors of the Euler characteristic of the p-Selmer group
/// over the cyclotomic Z_p-extension.
pub fn euler_char_factors(
    model: &WeierstrassModel,
    p: u64,
    sha: ShaOrder,
    analytic_rank_zero: Option<bool>,
) -> Result<EulerFactors> {
    let twist = good_ordinary_twist(model, p)?;
    if analytic_rank_zero == Some(false) {
        return Err(Error::AssumptionNotSatisfied("the analytic rank is not zero".into()));
    }
    if !torsion_free_at_p(model, p)? {
        return Err(Error::AssumptionNotSatisfied(format!("E(Q)[{p}] is nonzero")));
    }
    let (minimal, _) = model.minimal_model();
    let mut tamagawa = Vec::new();
    for (ell, _) in factor_bigint(&minimal.discriminant())? {
        if ell != p {
            tamagawa.push((ell, reduction_type(&minimal, ell)?.tamagawa));
        }
    }
    let tamagawa_product = tamagawa.iter().map(|&(_, c)| c as u64).product();
    let frak_f_count = twist.frak_f_count;
    let pi_image_status =
        if frak_f_count % p != 0 { PiImageStatus::PrimeToPImplied } else { PiImageStatus::Unknown };
    Ok(EulerFactors {
        p,
        twist,
        sha_p_order: sha,
        frak_f_count,
        pi_image_status,
        tamagawa,
        tamagawa_product,
        ordinary: true,
        analytic_rank_zero,
        torsion_free_at_p: true,
    })
}

/// Zero when every factor is prime to `p`, nonzero as soon as one known
/// factor is divisible by `p`, unresolved otherwise.
pub fn mu_lambda_vanish(ef: &EulerFactors) -> Vanishing {
    let p = ef.p;
    let sha_divisible = match ef.sha_p_order {
        ShaOrder::Known(n) => Some(n > 1),
        ShaOrder::Unknown => None,
    };
    let known_bad = ef.frak_f_count % p == 0 || ef.tamagawa_product % p == 0 || sha_divisible == Some(true);
    if known_bad {
        return Vanishing::Nonzero;
    }
    let complete = sha_divisible.is_some()
        && ef.pi_image_status == PiImageStatus::PrimeToPImplied
        && ef.analytic_rank_zero == Some(true);
    if complete {
        Vanishing::Zero
    } else {
        Vanishing::Unresolved
    }
}

/// A constant characteristic series whose constant term has the p-adic
/// valuation of the factor product, when every factor is known.
pub fn induced_series(ef: &EulerFactors) -> Result<Option<CharSeries>> {
    let ShaOrder::Known(sha) = ef.sha_p_order else { return Ok(None) };
    if ef.pi_image_status != PiImageStatus::PrimeToPImplied {
        return Ok(None);
    }
    let a0 = BigInt::from(sha) * ef.frak_f_count * ef.tamagawa_product;
    CharSeries::exact(ef.p, vec![a0]).map(Some)
}

/// `v_p` of the factor product when every factor is known.
pub fn euler_char_valuation(ef: &EulerFactors) -> Result<Option<u32>> {
    Ok(match induced_series(ef)? {
        Some(s) => Some(padic_valuation(&s.coeffs()[0], ef.p)?),
        None => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> WeierstrassModel {
        WeierstrassModel::from_ints([0, 0, 1, -3, -5]).unwrap()
    }

    #[test]
    fn example_twist() {
        let t = good_ordinary_twist(&example(), 3).unwrap();
        assert_eq!(t.d, -3);
        assert_eq!(t.model.discriminant(), BigInt::from(-11));
        assert_eq!(t.a_p, -1);
        assert_eq!(t.frak_f_count, 5);
    }

    #[test]
    fn twist_preconditions() {
        let good_at_3 = WeierstrassModel::from_ints([0, -1, 1, -10, -20]).unwrap();
        assert!(matches!(good_ordinary_twist(&good_at_3, 3), Err(Error::Precondition(_))));
        // A twist of 15a1 is additive at 3 with the same j, whose denominator 3 divides.
        let e15a1 = WeierstrassModel::from_ints([1, 1, 1, -10, -10]).unwrap();
        let pm = e15a1.quadratic_twist(-3).unwrap();
        assert!(!pm.potentially_good_at(3));
        assert_eq!(reduction_type(&pm.minimal_model().0, 3).unwrap().reduction, ReductionType::Additive);
        assert!(matches!(good_ordinary_twist(&pm, 3), Err(Error::Precondition(_))));
    }

    #[test]
    fn example_factors() {
        let ef = euler_char_factors(&example(), 3, ShaOrder::known(1, 3).unwrap(), Some(true)).unwrap();
        assert_eq!(ef.frak_f_count, 5);
        assert_eq!(ef.tamagawa, vec![(11, 1)]);
        assert_eq!(ef.pi_image_status, PiImageStatus::PrimeToPImplied);
        assert_eq!(mu_lambda_vanish(&ef), Vanishing::Zero);
        let s = induced_series(&ef).unwrap().unwrap();
        assert_eq!(s.mu_lambda_zero(), Ok(true));
        assert_eq!(euler_char_valuation(&ef), Ok(Some(0)));

        let unknown = euler_char_factors(&example(), 3, ShaOrder::Unknown, Some(true)).unwrap();
        assert_eq!(mu_lambda_vanish(&unknown), Vanishing::Unresolved);
        assert_eq!(induced_series(&unknown), Ok(None));
    }

    #[test]
    fn criterion_detects_divisible_tamagawa() {
        let mut ef = euler_char_factors(&example(), 3, ShaOrder::Known(1), Some(true)).unwrap();
        ef.tamagawa.push((13, 3));
        ef.tamagawa_product *= 3;
        assert_eq!(mu_lambda_vanish(&ef), Vanishing::Nonzero);
        assert_eq!(induced_series(&ef).unwrap().unwrap().mu_lambda_zero(), Ok(false));
    }

    #[test]
    fn sha_must_be_p_power() {
        assert!(ShaOrder::known(9, 3).is_ok());
        assert!(ShaOrder::known(6, 3).is_err());
        assert!(ShaOrder::known(0, 3).is_err());
    }

    #[test]
    fn torsion_checks() {
        assert_eq!(torsion_free_at_p(&example(), 3), Ok(true));
        // 11a1 has a rational 5-torsion point; 11a3 likewise.
        let e11a1 = WeierstrassModel::from_ints([0, -1, 1, -10, -20]).unwrap();
        assert_eq!(torsion_free_at_p(&e11a1, 5), Ok(false));
        assert_eq!(torsion_free_at_p(&e11a1, 3), Ok(true));
        // 11a2 is 5-isogenous to 11a1 but has trivial torsion.
        let e11a2 = WeierstrassModel::from_ints([0, -1, 1, -7820, -263580]).unwrap();
        assert_eq!(torsion_free_at_p(&e11a2, 5), Ok(true));
        // 14a1 has torsion Z/6.
        let e14a1 = WeierstrassModel::from_ints([1, 0, 1, 4, -6]).unwrap();
        assert_eq!(torsion_free_at_p(&e14a1, 3), Ok(false));
        // y^2 + y = x^3 has torsion Z/3.
        let e27 = WeierstrassModel::from_ints([0, 0, 1, 0, 0]).unwrap();
        assert_eq!(torsion_free_at_p(&e27, 3), Ok(false));
    }

    #[test]
    fn cubic_roots() {
        let r = |a: i64, c: i64| {
            let mut v = integer_roots_of_cubic(&BigInt::from(a), &BigInt::from(c));
            v.sort();
            v
        };
        // (x-1)(x-2)(x+3) = x^3 - 7x + 6
        assert_eq!(r(-7, 6), vec![BigInt::from(-3), BigInt::from(1), BigInt::from(2)]);
        assert_eq!(r(0, -8), vec![BigInt::from(2)]);
        assert!(r(1, 1).is_empty());
        // x^3 - 3x + 2 = (x-1)^2 (x+2)
        assert_eq!(r(-3, 2), vec![BigInt::from(-2), BigInt::from(1)]);
    }
}
