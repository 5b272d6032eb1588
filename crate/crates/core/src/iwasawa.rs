//! Characteristic series of torsion Iwasawa modules and their invariants.
//!
//! A series is a polynomial `a_0 + a_1 T + ... + a_d T^d` with p-adic integer
//! coefficients. Coefficients are either known exactly (built from integers or
//! from elementary factors) or only modulo `p^N`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::arith::{is_prime, padic_valuation};
use crate::error::{Error, Result};

pub const DEFAULT_PRECISION: u32 = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharSeries {
    p: u64,
    precision: u32,
    coeffs: Vec<BigInt>,
    exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IwasawaInvariants {
    pub mu: u32,
    pub lambda: u32,
    pub euler_char_defined: bool,
    pub euler_char_valuation: Option<u32>,
}

fn check_prime(p: u64) -> Result<()> {
    if p < 3 || !is_prime(p) {
        return Err(Error::InvalidModulus(p));
    }
    Ok(())
}

impl CharSeries {
    /// A series whose integer coefficients are exact.
    pub fn exact(p: u64, coeffs: Vec<BigInt>) -> Result<Self> {
        Self::build(p, DEFAULT_PRECISION, coeffs, true)
    }

    /// A series whose coefficients are only known modulo `p^precision`.
    pub fn approximate(p: u64, coeffs: Vec<BigInt>, precision: u32) -> Result<Self> {
        Self::build(p, precision, coeffs, false)
    }

    pub fn from_i64(p: u64, coeffs: &[i64]) -> Result<Self> {
        Self::exact(p, coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    fn build(p: u64, precision: u32, coeffs: Vec<BigInt>, exact: bool) -> Result<Self> {
        check_prime(p)?;
        if precision == 0 {
            return Err(Error::InvalidInput("precision must be at least 1".into()));
        }
        let mut s = CharSeries { p, precision, coeffs, exact };
        if !exact {
            let modulus = s.modulus();
            for c in &mut s.coeffs {
                *c = c.mod_floor(&modulus);
            }
        }
        while s.coeffs.last().is_some_and(|c| c.is_zero()) {
            s.coeffs.pop();
        }
        Ok(s)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    fn modulus(&self) -> BigInt {
        BigInt::from(self.p).pow(self.precision)
    }

    /// `v_p(a_i)`, or `None` when the coefficient is zero (at precision).
    fn coeff_valuation(&self, i: usize) -> Option<u32> {
        let c = self.coeffs.get(i)?;
        padic_valuation(c, self.p).ok()
    }

    pub fn mul(&self, other: &CharSeries) -> Result<CharSeries> {
        if self.p != other.p {
            return Err(Error::InvalidInput(format!("series over p={} and p={}", self.p, other.p)));
        }
        let mut out = vec![BigInt::zero(); (self.coeffs.len() + other.coeffs.len()).saturating_sub(1)];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        let exact = self.exact && other.exact;
        let precision = match (self.exact, other.exact) {
            (true, true) => self.precision.max(other.precision),
            (true, false) => other.precision,
            (false, true) => self.precision,
            (false, false) => self.precision.min(other.precision),
        };
        Self::build(self.p, precision, out, exact)
    }

    /// Whether `a_0 != 0`. An approximate series whose constant term
    /// vanishes modulo `p^N` is reported as indeterminate, not as zero.
    pub fn euler_char_defined(&self) -> Result<bool> {
        match self.coeffs.first() {
            Some(a0) if !a0.is_zero() => Ok(true),
            _ if self.exact => Ok(false),
            _ => Err(Error::Indeterminate(self.precision)),
        }
    }

    /// `p^{v_p(a_0)}`. The Euler characteristic agrees with `a_0` up to a
    /// p-adic unit and is itself a power of p, so this is its exact value.
    pub fn euler_characteristic(&self) -> Result<BigInt> {
        if !self.euler_char_defined()? {
            return Err(Error::EulerCharUndefined);
        }
        let v = self.coeff_valuation(0).expect("nonzero constant term");
        Ok(BigInt::from(self.p).pow(v))
    }

    /// True iff `p` does not divide `a_0`, which is equivalent to both
    /// invariants vanishing and to a trivial Euler characteristic.
    pub fn mu_lambda_zero(&self) -> Result<bool> {
        match self.euler_char_defined() {
            Ok(true) => Ok(self.coeff_valuation(0) == Some(0)),
            Ok(false) => Err(Error::Precondition("constant term is zero".into())),
            Err(e) => Err(e),
        }
    }

    pub fn to_json(&self) -> Value {
        let coeffs: Vec<Value> = self
            .coeffs
            .iter()
            .map(|c| match c.to_i64() {
                Some(v) => json!(v),
                None => json!(c.to_string()),
            })
            .collect();
        json!({ "p": self.p, "precision": self.precision, "exact": self.exact, "coeffs": coeffs })
    }

    /// Reads `{"p", "precision", "coeffs", "exact"?}`. Coefficients may be
    /// JSON integers or decimal strings; `exact` defaults to true.
    pub fn from_json(v: &Value) -> Result<Self> {
        let field = |name: &str, reason: &str| Error::Schema { field: name.into(), reason: reason.into() };
        let p = v.get("p").and_then(Value::as_u64).ok_or_else(|| field("p", "expected an odd prime"))?;
        let precision = v
            .get("precision")
            .and_then(Value::as_u64)
            .and_then(|n| u32::try_from(n).ok())
            .ok_or_else(|| field("precision", "expected a positive integer"))?;
        let exact = match v.get("exact") {
            None => true,
            Some(b) => b.as_bool().ok_or_else(|| field("exact", "expected a boolean"))?,
        };
        let raw = v.get("coeffs").and_then(Value::as_array).ok_or_else(|| field("coeffs", "expected an array"))?;
        let mut coeffs = Vec::with_capacity(raw.len());
        for c in raw {
            let parsed = match c {
                Value::Number(n) => n.as_i64().map(BigInt::from),
                Value::String(s) => s.parse::<BigInt>().ok(),
                _ => None,
            };
            coeffs.push(parsed.ok_or_else(|| field("coeffs", "expected integers"))?);
        }
        if exact {
            Self::build(p, precision, coeffs, true)
        } else {
            Self::approximate(p, coeffs, precision)
        }
    }
}

/// `mu` is the least coefficient valuation, `lambda` the first index
/// attaining it.
pub fn iwasawa_invariants(f: &CharSeries) -> Result<IwasawaInvariants> {
    let vals: Vec<Option<u32>> = (0..f.coeffs.len()).map(|i| f.coeff_valuation(i)).collect();
    let mu = vals.iter().flatten().copied().min().ok_or(Error::Indeterminate(f.precision))?;
    let lambda = vals.iter().position(|&v| v == Some(mu)).expect("minimum is attained") as u32;
    let euler_char_valuation = vals.first().copied().flatten();
    Ok(IwasawaInvariants { mu, lambda, euler_char_defined: euler_char_valuation.is_some(), euler_char_valuation })
}

/// A monic polynomial whose other coefficients are divisible by `p`.
pub fn is_distinguished(p: u64, poly: &[BigInt]) -> bool {
    let Some((lead, rest)) = poly.split_last() else { return false };
    let p = BigInt::from(p);
    lead.is_one() && rest.iter().all(|c| c.is_multiple_of(&p))
}

/// `prod_i p^{m_i} * prod_j f_j(T)^{n_j}`, with each `f_j` given low degree
/// first.
pub fn from_elementary(p: u64, p_powers: &[u32], polys: &[(Vec<BigInt>, u32)]) -> Result<CharSeries> {
    check_prime(p)?;
    let total: u32 = p_powers.iter().sum();
    let mut acc = CharSeries::exact(p, vec![BigInt::from(p).pow(total)])?;
    for (poly, n) in polys {
        if !is_distinguished(p, poly) {
            let shown: Vec<String> = poly.iter().map(|c| c.to_string()).collect();
            return Err(Error::InvalidInput(format!("[{}] is not distinguished at {p}", shown.join(","))));
        }
        let factor = CharSeries::exact(p, poly.clone())?;
        for _ in 0..*n {
            acc = acc.mul(&factor)?;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&c| BigInt::from(c)).collect()
    }

    fn inv(f: &CharSeries) -> (u32, u32) {
        let i = iwasawa_invariants(f).unwrap();
        (i.mu, i.lambda)
    }

    #[test]
    fn elementary_expansions() {
        assert_eq!(from_elementary(3, &[1], &[]).unwrap().coeffs(), big(&[3]).as_slice());
        let f = from_elementary(5, &[], &[(big(&[5, 1]), 2)]).unwrap();
        assert_eq!(f.coeffs(), big(&[25, 10, 1]).as_slice());
        let f = from_elementary(3, &[1], &[(big(&[3, 1]), 1)]).unwrap();
        assert_eq!(f.coeffs(), big(&[9, 3]).as_slice());
        assert!(matches!(from_elementary(3, &[], &[(big(&[1, 1]), 1)]), Err(Error::InvalidInput(_))));
        assert!(matches!(from_elementary(3, &[], &[(big(&[3, 2]), 1)]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn invariants_examples() {
        assert_eq!(inv(&CharSeries::from_i64(3, &[3]).unwrap()), (1, 0));
        assert_eq!(inv(&CharSeries::from_i64(5, &[5, 5, 1]).unwrap()), (0, 2));
        let f = from_elementary(7, &[2], &[(big(&[7, 0, 1]), 1), (big(&[7, 1]), 3)]).unwrap();
        assert_eq!(inv(&f), (2, 5));
    }

    #[test]
    fn zero_series_is_indeterminate() {
        let f = CharSeries::approximate(3, big(&[0, 27]), 3).unwrap();
        assert_eq!(iwasawa_invariants(&f), Err(Error::Indeterminate(3)));
        assert_eq!(iwasawa_invariants(&CharSeries::from_i64(3, &[]).unwrap()), Err(Error::Indeterminate(20)));
    }

    #[test]
    fn euler_characteristic_examples() {
        let f = CharSeries::from_i64(3, &[0, 3, 3, 1]).unwrap();
        assert_eq!(f.euler_char_defined(), Ok(false));
        assert_eq!(f.euler_characteristic(), Err(Error::EulerCharUndefined));
        assert!(matches!(f.mu_lambda_zero(), Err(Error::Precondition(_))));

        let f = CharSeries::from_i64(5, &[5]).unwrap();
        assert_eq!(f.euler_char_defined(), Ok(true));
        assert_eq!(f.euler_characteristic(), Ok(BigInt::from(5)));

        let f = CharSeries::from_i64(5, &[5, 5, 1]).unwrap();
        assert_eq!(iwasawa_invariants(&f).unwrap().euler_char_valuation, Some(1));
        assert_eq!(CharSeries::from_i64(5, &[1, 1]).unwrap().euler_characteristic(), Ok(BigInt::one()));

        let f = from_elementary(3, &[1], &[(big(&[3, 1]), 1)]).unwrap();
        assert_eq!(f.euler_characteristic(), Ok(BigInt::from(9)));
    }

    #[test]
    fn zero_at_precision_is_distinct_from_zero() {
        let f = CharSeries::approximate(3, big(&[81, 1]), 4).unwrap();
        assert_eq!(f.euler_char_defined(), Err(Error::Indeterminate(4)));
        assert_eq!(f.euler_characteristic(), Err(Error::Indeterminate(4)));
        let f = CharSeries::from_i64(3, &[81, 1]).unwrap();
        assert_eq!(f.euler_characteristic(), Ok(BigInt::from(81)));
    }

    #[test]
    fn mu_lambda_zero_examples() {
        assert_eq!(CharSeries::from_i64(3, &[1, 3]).unwrap().mu_lambda_zero(), Ok(true));
        assert_eq!(CharSeries::from_i64(3, &[3]).unwrap().mu_lambda_zero(), Ok(false));
        assert_eq!(CharSeries::from_i64(3, &[3, 1]).unwrap().mu_lambda_zero(), Ok(false));
    }

    #[test]
    fn json_round_trip() {
        let f = from_elementary(5, &[3], &[(big(&[5, 0, 1]), 4)]).unwrap();
        let g = CharSeries::from_json(&f.to_json()).unwrap();
        assert_eq!(f, g);
        let big_coeff = json!({"p": 3, "precision": 20, "coeffs": ["123456789012345678901234567890", 1]});
        assert_eq!(CharSeries::from_json(&big_coeff).unwrap().coeffs()[1], BigInt::one());
        assert!(matches!(CharSeries::from_json(&json!({"p": 3})), Err(Error::Schema { .. })));
        assert!(CharSeries::from_json(&json!({"p": 4, "precision": 2, "coeffs": [1]})).is_err());
    }

    fn series() -> impl Strategy<Value = CharSeries> {
        (prop::sample::select(vec![3u64, 5, 7]), prop::collection::vec(-30i64..30, 1..6))
            .prop_filter_map("nonzero", |(p, c)| {
                let f = CharSeries::from_i64(p, &c).ok()?;
                (!f.coeffs().is_empty()).then_some(f)
            })
    }

    fn elementary() -> impl Strategy<Value = (u64, Vec<u32>, Vec<(Vec<BigInt>, u32)>)> {
        prop::sample::select(vec![3u64, 5, 7]).prop_flat_map(|p| {
            let poly = (prop::collection::vec(-3i64..3, 0..4), 1u32..3).prop_map(move |(low, n)| {
                let mut c: Vec<BigInt> = low.iter().map(|&x| BigInt::from(x * p as i64)).collect();
                c.push(BigInt::one());
                (c, n)
            });
            (Just(p), prop::collection::vec(0u32..3, 0..3), prop::collection::vec(poly, 0..3))
        })
    }

    proptest! {
        #[test]
        fn multiplicativity(f in series(), c in prop::collection::vec(-30i64..30, 1..5)) {
            let g = CharSeries::from_i64(f.p(), &c).unwrap();
            prop_assume!(!g.coeffs().is_empty());
            let fg = f.mul(&g).unwrap();
            let (a, b, ab) = (inv(&f), inv(&g), inv(&fg));
            prop_assert_eq!(ab, (a.0 + b.0, a.1 + b.1));
        }

        #[test]
        fn three_way_equivalence(f in series()) {
            prop_assume!(f.euler_char_defined() == Ok(true));
            let i = iwasawa_invariants(&f).unwrap();
            let zero = f.mu_lambda_zero().unwrap();
            prop_assert_eq!(zero, i.mu == 0 && i.lambda == 0);
            prop_assert_eq!(zero, f.euler_characteristic().unwrap().is_one());
        }

        #[test]
        fn euler_characteristic_is_p_power(f in series()) {
            prop_assume!(f.euler_char_defined() == Ok(true));
            let mut chi = f.euler_characteristic().unwrap();
            let p = BigInt::from(f.p());
            while chi.is_multiple_of(&p) {
                chi /= &p;
            }
            prop_assert!(chi.is_one());
        }

        #[test]
        fn elementary_round_trip((p, ms, fs) in elementary()) {
            let f = from_elementary(p, &ms, &fs).unwrap();
            let i = iwasawa_invariants(&f).unwrap();
            prop_assert_eq!(i.mu, ms.iter().sum::<u32>());
            let lambda: u32 = fs.iter().map(|(c, n)| (c.len() as u32 - 1) * n).sum();
            prop_assert_eq!(i.lambda, lambda);
        }
    }
}
