//! Exact modular arithmetic, valuations and prime sieving.
//!
//! Everything here is a pure function. Residues modulo a word-sized prime are
//! handled in `u64` with `u128` products; anything that can grow (discriminants,
//! invariants, extension-field orders) lives in [`BigInt`].

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Bounds above this are sieved segment by segment.
pub const SEGMENT_THRESHOLD: u64 = 10_000_000;
const SEGMENT_LEN: u64 = 1 << 18;

/// All primes up to `bound`, strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeSieve {
    bound: u64,
    primes: Vec<u64>,
}

impl PrimeSieve {
    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.primes.iter().copied()
    }

    /// Membership by binary search.
    pub fn contains(&self, n: u64) -> bool {
        self.primes.binary_search(&n).is_ok()
    }
}

/// Returns every prime `<= bound`.
pub fn sieve_primes(bound: u64) -> Result<PrimeSieve> {
    if bound < 2 {
        return Err(Error::EmptyRange(bound));
    }
    let primes = if bound <= SEGMENT_THRESHOLD {
        simple_sieve(bound)
    } else {
        segmented_sieve(bound, SEGMENT_LEN)
    };
    Ok(PrimeSieve { bound, primes })
}

fn simple_sieve(bound: u64) -> Vec<u64> {
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        primes.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    primes
}

/// Segmented sieve of Eratosthenes; memory is `O(sqrt(bound) + segment)`.
pub fn segmented_sieve(bound: u64, segment: u64) -> Vec<u64> {
    let root = isqrt(bound);
    let base = simple_sieve(root.max(2));
    let mut primes: Vec<u64> = Vec::new();
    let mut low = 2u64;
    let mut marks = vec![false; segment as usize];
    while low <= bound {
        let high = (low + segment - 1).min(bound);
        let width = (high - low + 1) as usize;
        marks[..width].iter_mut().for_each(|m| *m = false);
        for &q in &base {
            if q * q > high {
                break;
            }
            let mut start = ((low + q - 1) / q) * q;
            if start < q * q {
                start = q * q;
            }
            let mut j = start;
            while j <= high {
                marks[(j - low) as usize] = true;
                j += q;
            }
        }
        primes.extend(
            (0..width)
                .filter(|&i| !marks[i])
                .map(|i| low + i as u64),
        );
        low = high + 1;
    }
    primes
}

/// Floor of the square root.
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x.saturating_mul(x) > n {
        x -= 1;
    }
    while (x + 1).saturating_mul(x + 1) <= n {
        x += 1;
    }
    x
}

/// Floor of the k-th root, exact for all `u64`.
pub fn iroot(n: u64, k: u32) -> u64 {
    if k == 1 || n < 2 {
        return n;
    }
    let mut x = (n as f64).powf(1.0 / k as f64) as u64;
    let pow_le = |b: u64| -> bool {
        let mut acc: u128 = 1;
        for _ in 0..k {
            acc *= b as u128;
            if acc > n as u128 {
                return false;
            }
        }
        true
    };
    while x > 0 && !pow_le(x) {
        x -= 1;
    }
    while pow_le(x + 1) {
        x += 1;
    }
    x
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Square-and-multiply exponentiation.
pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse modulo `m`, if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let e = (a as i128).extended_gcd(&(m as i128));
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m as i128) as u64)
}

/// Deterministic Miller-Rabin for all 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % q == 0 {
            return n == q;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Reduce a big integer into `[0, m)`.
pub fn reduce(a: &BigInt, m: u64) -> u64 {
    a.mod_floor(&BigInt::from(m)).to_u64().expect("residue fits in u64")
}

/// Legendre symbol by Euler's criterion, with an odd-prime check on `ell`.
pub fn legendre(a: &BigInt, ell: u64) -> Result<i8> {
    if ell % 2 == 0 || !is_prime(ell) {
        return Err(Error::InvalidModulus(ell));
    }
    Ok(legendre_unchecked(reduce(a, ell), ell))
}

/// Euler's criterion for a residue already reduced modulo the odd prime `ell`.
#[inline]
pub fn legendre_unchecked(a: u64, ell: u64) -> i8 {
    let a = a % ell;
    if a == 0 {
        return 0;
    }
    if pow_mod(a, (ell - 1) / 2, ell) == 1 {
        1
    } else {
        -1
    }
}

/// Largest `e` with `p^e | n`.
pub fn padic_valuation(n: &BigInt, p: u64) -> Result<u32> {
    if n.is_zero() {
        return Err(Error::InfiniteValuation);
    }
    let p_big = BigInt::from(p);
    let mut e = 0;
    let mut m = n.abs();
    loop {
        let (q, r) = m.div_rem(&p_big);
        if !r.is_zero() {
            return Ok(e);
        }
        m = q;
        e += 1;
    }
}

/// Valuation that maps zero to `u32::MAX`, for use in `min` chains.
pub fn val_or_inf(n: &BigInt, p: u64) -> u32 {
    padic_valuation(n, p).unwrap_or(u32::MAX)
}

/// Trial-division factorization of a word-sized integer.
pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut q = 2u64;
    while q * q <= n {
        if n % q == 0 {
            let mut e = 0;
            while n % q == 0 {
                n /= q;
                e += 1;
            }
            out.push((q, e));
        }
        q += if q == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Prime factorization of a nonzero integer: trial division to 10^6, then
/// Pollard's rho on a word-sized cofactor.
pub fn factor_bigint(n: &BigInt) -> Result<Vec<(u64, u32)>> {
    if n.is_zero() {
        return Err(Error::InfiniteValuation);
    }
    let mut m = n.abs();
    let mut out = Vec::new();
    let mut q = 2u64;
    while q <= 1_000_000 {
        let qb = BigInt::from(q);
        if &qb * &qb > m {
            break;
        }
        let mut e = 0;
        while (&m % &qb).is_zero() {
            m /= &qb;
            e += 1;
        }
        if e > 0 {
            out.push((q, e));
        }
        q += if q == 2 { 1 } else { 2 };
    }
    let rest = m
        .to_u64()
        .ok_or_else(|| Error::Budget(format!("cofactor {m} exceeds 64 bits")))?;
    let mut big = Vec::new();
    split_u64(rest, &mut big);
    big.sort_unstable();
    for f in big {
        match out.last_mut() {
            Some((g, e)) if *g == f => *e += 1,
            _ => out.push((f, 1)),
        }
    }
    out.sort_unstable();
    Ok(out)
}

fn split_u64(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    for q in [2u64, 3, 5, 7, 11, 13] {
        if n % q == 0 {
            out.push(q);
            split_u64(n / q, out);
            return;
        }
    }
    let d = pollard_rho(n);
    split_u64(d, out);
    split_u64(n / d, out);
}

/// A nontrivial factor of an odd composite `n`.
fn pollard_rho(n: u64) -> u64 {
    for c in 1..u64::MAX {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = x.abs_diff(y).gcd(&n);
        }
        if d != n {
            return d;
        }
    }
    unreachable!("rho finds a factor of every odd composite")
}

/// Euler's totient.
pub fn euler_phi(m: u64) -> u64 {
    factor_u64(m)
        .into_iter()
        .fold(m, |acc, (q, _)| acc / q * (q - 1))
}

/// Least `k >= 1` with `a^k = 1 (mod m)`.
pub fn mult_order(a: i64, m: u64) -> Result<u64> {
    if m == 0 {
        return Err(Error::InvalidInput("modulus must be positive".into()));
    }
    let a_red = (a as i128).rem_euclid(m as i128) as u64;
    if m == 1 {
        return Ok(1);
    }
    if a_red.gcd(&m) != 1 {
        return Err(Error::NonUnit { a, m });
    }
    let mut order = euler_phi(m);
    for (q, _) in factor_u64(order) {
        while order % q == 0 && pow_mod(a_red, order / q, m) == 1 {
            order /= q;
        }
    }
    Ok(order)
}

/// A square root of `a` modulo the odd prime `p` (Tonelli-Shanks).
pub fn sqrt_mod(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if legendre_unchecked(a, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(pow_mod(a, (p + 1) / 4, p));
    }
    let mut q = p - 1;
    let mut s = 0;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let z = (2..p).find(|&z| legendre_unchecked(z, p) == -1)?;
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r)
}

/// Smallest primitive root modulo `m` when `(Z/m)*` is cyclic.
pub fn primitive_root(m: u64) -> Option<u64> {
    let phi = euler_phi(m);
    let factors = factor_u64(phi);
    (1..m).find(|&g| {
        g.gcd(&m) == 1 && factors.iter().all(|&(q, _)| pow_mod(g, phi / q, m) != 1)
    })
}

/// Discrete logarithm of `a` to base `g` modulo `m`, by baby-step giant-step.
pub fn discrete_log(a: u64, g: u64, m: u64, group_order: u64) -> Option<u64> {
    let a = a % m;
    let step = isqrt(group_order) + 1;
    let mut table = std::collections::HashMap::with_capacity(step as usize);
    let mut cur = 1u64;
    for j in 0..step {
        table.entry(cur).or_insert(j);
        cur = mul_mod(cur, g, m);
    }
    let giant = inv_mod(pow_mod(g, step, m), m)?;
    let mut gamma = a;
    for i in 0..=step {
        if let Some(&j) = table.get(&gamma) {
            return Some((i * step + j) % group_order);
        }
        gamma = mul_mod(gamma, giant, m);
    }
    None
}

/// A residue class in `Z/mZ` with `m >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Residue {
    value: u64,
    modulus: u64,
}

impl Residue {
    pub fn new(value: i64, modulus: u64) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::InvalidInput(format!("modulus {modulus} < 2")));
        }
        let value = (value as i128).rem_euclid(modulus as i128) as u64;
        Ok(Residue { value, modulus })
    }

    pub fn from_big(value: &BigInt, modulus: u64) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::InvalidInput(format!("modulus {modulus} < 2")));
        }
        Ok(Residue { value: reduce(value, modulus), modulus })
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> u64 {
        self.modulus
    }

    pub fn pow(self, e: u64) -> Self {
        Residue { value: pow_mod(self.value, e, self.modulus), ..self }
    }

    pub fn inverse(self) -> Option<Self> {
        inv_mod(self.value, self.modulus).map(|value| Residue { value, ..self })
    }
}

impl std::ops::Add for Residue {
    type Output = Residue;
    fn add(self, rhs: Residue) -> Residue {
        debug_assert_eq!(self.modulus, rhs.modulus);
        let v = (self.value as u128 + rhs.value as u128) % self.modulus as u128;
        Residue { value: v as u64, ..self }
    }
}

impl std::ops::Sub for Residue {
    type Output = Residue;
    fn sub(self, rhs: Residue) -> Residue {
        debug_assert_eq!(self.modulus, rhs.modulus);
        let v = (self.value as u128 + self.modulus as u128 - rhs.value as u128)
            % self.modulus as u128;
        Residue { value: v as u64, ..self }
    }
}

impl std::ops::Mul for Residue {
    type Output = Residue;
    fn mul(self, rhs: Residue) -> Residue {
        debug_assert_eq!(self.modulus, rhs.modulus);
        Residue { value: mul_mod(self.value, rhs.value, self.modulus), ..self }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trial_prime(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    #[test]
    fn small_sieves() {
        assert_eq!(sieve_primes(10).unwrap().primes(), &[2, 3, 5, 7]);
        assert_eq!(sieve_primes(2).unwrap().primes(), &[2]);
        assert_eq!(sieve_primes(1), Err(Error::EmptyRange(1)));
    }

    #[test]
    fn million_sieve_matches_trial_division() {
        let s = sieve_primes(1_000_000).unwrap();
        assert_eq!(s.len(), 78498);
        let oracle = (2..=1_000_000u64).filter(|&n| trial_prime(n)).count();
        assert_eq!(oracle, 78498);
        assert!(s.primes().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn segmented_agrees_with_simple() {
        assert_eq!(segmented_sieve(2_000_003, 4096), simple_sieve(2_000_003));
        assert_eq!(segmented_sieve(100, 7), simple_sieve(100));
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre(&1.into(), 7), Ok(1));
        assert_eq!(legendre(&10.into(), 11), Ok(-1));
        assert_eq!(legendre(&0.into(), 5), Ok(0));
        assert_eq!(legendre(&3.into(), 9), Err(Error::InvalidModulus(9)));
        assert_eq!(legendre(&3.into(), 2), Err(Error::InvalidModulus(2)));
        // squares mod 11 by exhaustive squaring
        let squares: Vec<u64> = (1..11u64).map(|y| y * y % 11).collect();
        assert!(!squares.contains(&10));
    }

    #[test]
    fn legendre_is_multiplicative_and_balanced() {
        for ell in simple_sieve(100).into_iter().filter(|&q| q > 2) {
            for a in 1..ell {
                for b in 1..ell {
                    let ab = legendre_unchecked(a * b % ell, ell);
                    assert_eq!(ab, legendre_unchecked(a, ell) * legendre_unchecked(b, ell));
                }
            }
            let residues = (1..ell).filter(|&a| legendre_unchecked(a, ell) == 1).count() as u64;
            assert_eq!(residues, (ell - 1) / 2);
        }
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(padic_valuation(&BigInt::from(-8019), 3), Ok(6));
        assert_eq!(padic_valuation(&BigInt::from(7), 3), Ok(0));
        assert_eq!(padic_valuation(&BigInt::from(48), 3), Ok(1));
        assert_eq!(padic_valuation(&BigInt::from(0), 3), Err(Error::InfiniteValuation));
    }

    #[test]
    fn order_examples() {
        assert_eq!(mult_order(7, 9), Ok(3));
        assert_eq!(mult_order(1, 97), Ok(1));
        assert_eq!(mult_order(2, 7), Ok(3));
        assert_eq!(mult_order(3, 9), Err(Error::NonUnit { a: 3, m: 9 }));
    }

    #[test]
    fn order_divides_phi() {
        for m in (2..10_000u64).step_by(37) {
            let phi = euler_phi(m);
            for a in [2i64, 3, 5, 7, 10, -1] {
                if (a.rem_euclid(m as i64) as u64).gcd(&m) == 1 {
                    let k = mult_order(a, m).unwrap();
                    assert_eq!(phi % k, 0, "a={a} m={m}");
                    assert_eq!(pow_mod(a.rem_euclid(m as i64) as u64, k, m), 1);
                }
            }
        }
    }

    #[test]
    fn roots_and_logs() {
        for p in [3u64, 5, 7, 13, 17, 97, 1009, 40009] {
            for a in 1..p.min(300) {
                if let Some(r) = sqrt_mod(a, p) {
                    assert_eq!(mul_mod(r, r, p), a);
                }
            }
        }
        let g = primitive_root(7).unwrap();
        assert_eq!(g, 3);
        assert_eq!(discrete_log(2, 3, 7, 6), Some(2));
        assert_eq!(discrete_log(6, 3, 7, 6), Some(3));
        assert_eq!(iroot(1_000_000, 2), 1000);
        assert_eq!(iroot(999_999, 2), 999);
        assert_eq!(iroot(u64::MAX, 3), 2_642_245);
    }

    #[test]
    fn residue_ops() {
        let a = Residue::new(-3, 7).unwrap();
        assert_eq!(a.value(), 4);
        let b = Residue::new(5, 7).unwrap();
        assert_eq!((a + b).value(), 2);
        assert_eq!((a - b).value(), 6);
        assert_eq!((a * b).value(), 6);
        assert_eq!((a * a.inverse().unwrap()).value(), 1);
        assert!(Residue::new(1, 1).is_err());
    }

    #[test]
    fn bigint_factorization() {
        let n = BigInt::from(2u64.pow(5)) * 3 * 999_983u64 * 999_983u64 * 1_000_003u64 * 999_999_937u64;
        assert_eq!(
            factor_bigint(&n).unwrap(),
            vec![(2, 5), (3, 1), (999_983, 2), (1_000_003, 1), (999_999_937, 1)]
        );
        assert_eq!(factor_bigint(&BigInt::from(-8019)).unwrap(), vec![(3, 6), (11, 1)]);
        assert_eq!(factor_bigint(&BigInt::from(1)).unwrap(), vec![]);
        assert!(factor_bigint(&BigInt::from(0)).is_err());
    }

    proptest! {
        #[test]
        fn valuation_of_scaled_unit(e in 0u32..20, u in 1i64..100_000, p in prop::sample::select(vec![2u64, 3, 5, 7, 11])) {
            prop_assume!(u % p as i64 != 0);
            let n = BigInt::from(p).pow(e) * BigInt::from(u);
            prop_assert_eq!(padic_valuation(&n, p).unwrap(), e);
            prop_assert_eq!(padic_valuation(&-n, p).unwrap(), e);
        }

        #[test]
        fn miller_rabin_agrees_with_trial_division(n in 0u64..200_000) {
            prop_assert_eq!(is_prime(n), trial_prime(n));
        }
    }
}
