//! Cyclic extensions of Q of odd prime degree `p`, modelled by characters.
//!
//! A field ramified at tame primes `ell_1 < ... < ell_k` (each `1 mod p`) and
//! possibly at `p` corresponds to a character
//! `(Z/ell_1)* x ... x (Z/ell_k)* [x (Z/p^2)*] -> Z/p` nontrivial on every
//! factor, taken up to the automorphisms of `Z/p`. Each factor is identified
//! with `Z/p` through the discrete logarithm to the smallest primitive root,
//! and the class is represented by scaling the first exponent to 1 (tame
//! exponents first, then the wild one).

use std::collections::BTreeSet;

use num_bigint::BigInt;
use serde_json::{json, Value};

use crate::arith::{discrete_log, inv_mod, is_prime, mul_mod, pow_mod, primitive_root, sieve_primes};
use crate::classify::cyclotomic_split_count;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CyclicExtension {
    pub p: u64,
    pub tame_ramified: Vec<u64>,
    pub wild_at_p: bool,
    /// One exponent per tame prime, then the wild exponent if ramified at `p`.
    pub exponents: Vec<u64>,
}

/// Decomposition of a rational prime in `L` and in `L_cyc`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplittingRecord {
    pub ell: u64,
    pub e: u64,
    pub f: u64,
    pub g: u64,
    /// Ramification index of each `w | ell` in `L_cyc / Q_cyc`.
    pub e_cyc: u64,
    /// Number of primes of `L_cyc` above `ell`.
    pub w_count: BigInt,
}

fn check_p(p: u64) -> Result<()> {
    if p < 3 || !is_prime(p) {
        return Err(Error::InvalidModulus(p));
    }
    Ok(())
}

/// Splits a ramification set into sorted tame primes and a flag for `p`.
fn validate_ram_set(p: u64, ram_set: &[u64]) -> Result<(Vec<u64>, bool)> {
    check_p(p)?;
    let mut tame = Vec::with_capacity(ram_set.len());
    let mut wild = false;
    for &ell in ram_set {
        if !is_prime(ell) {
            return Err(Error::InvalidInput(format!("{ell} is not prime")));
        }
        if ell == p {
            wild = true;
        } else if ell % p != 1 {
            return Err(Error::ClassFieldObstruction { p, ell });
        } else {
            tame.push(ell);
        }
    }
    tame.sort_unstable();
    let distinct = tame.windows(2).all(|w| w[0] != w[1]);
    if !distinct || ram_set.iter().filter(|&&l| l == p).count() > 1 {
        return Err(Error::InvalidInput("ramified primes must be distinct".into()));
    }
    Ok((tame, wild))
}

/// `(p-1)^{k-1}` fields ramified exactly at the `k` given places.
pub fn count_extensions(p: u64, ram_set: &[u64]) -> Result<u64> {
    validate_ram_set(p, ram_set)?;
    Ok(match ram_set.len() {
        0 => 0,
        k => (p - 1).pow(k as u32 - 1),
    })
}

fn normalize(p: u64, exps: &mut [u64]) {
    if let Some(&first) = exps.iter().find(|&&e| e != 0) {
        let inv = inv_mod(first, p).expect("nonzero mod p");
        for e in exps.iter_mut() {
            *e = mul_mod(*e, inv, p);
        }
    }
}

/// All characters ramified exactly at the given places, one per field.
///
/// Runs over every exponent vector and reduces modulo scaling, rather than
/// writing down normalized vectors directly.
pub fn enumerate_extensions(p: u64, ram_set: &[u64]) -> Result<Vec<CyclicExtension>> {
    let (tame, wild) = validate_ram_set(p, ram_set)?;
    let k = tame.len() + wild as usize;
    if k == 0 {
        return Ok(Vec::new());
    }
    let total = p.checked_pow(k as u32).ok_or_else(|| Error::Budget(format!("{p}^{k} characters")))?;
    if total > 50_000_000 {
        return Err(Error::Budget(format!("{total} characters")));
    }
    let mut seen = BTreeSet::new();
    let mut exps = vec![0u64; k];
    for code in 0..total {
        let mut c = code;
        for e in exps.iter_mut() {
            *e = c % p;
            c /= p;
        }
        if exps.contains(&0) {
            continue;
        }
        normalize(p, &mut exps);
        seen.insert(exps.clone());
    }
    Ok(seen
        .into_iter()
        .map(|exponents| CyclicExtension { p, tame_ramified: tame.clone(), wild_at_p: wild, exponents })
        .collect())
}

/// Exponent of `x` in the order-`p` quotient of `(Z/m)*` for cyclic `(Z/m)*`
/// of order `order`, relative to the smallest primitive root.
fn local_log(x: u64, m: u64, order: u64, p: u64) -> u64 {
    let g = primitive_root(m).expect("cyclic unit group");
    let zeta = pow_mod(g, order / p, m);
    let y = pow_mod(x % m, order / p, m);
    discrete_log(y, zeta, m, p).expect("power of zeta")
}

impl CyclicExtension {
    /// Builds a field from explicit exponents, normalizing them.
    pub fn new(p: u64, ram_set: &[u64], exponents: &[u64]) -> Result<Self> {
        let (tame, wild) = validate_ram_set(p, ram_set)?;
        if exponents.len() != tame.len() + wild as usize {
            return Err(Error::InvalidInput("one exponent per ramified place is required".into()));
        }
        if tame.is_empty() && !wild {
            return Err(Error::InvalidInput("Q has no unramified cyclic extensions".into()));
        }
        let mut exps: Vec<u64> = exponents.iter().map(|e| e % p).collect();
        if exps.contains(&0) {
            return Err(Error::InvalidInput("character must be nontrivial at every ramified place".into()));
        }
        normalize(p, &mut exps);
        Ok(CyclicExtension { p, tame_ramified: tame, wild_at_p: wild, exponents: exps })
    }

    /// The field ramified only at `ell`, i.e. the degree-`p` subfield of `Q(mu_ell)`.
    pub fn prime_conductor(p: u64, ell: u64) -> Result<Self> {
        Self::new(p, &[ell], &[1])
    }

    pub fn conductor(&self) -> BigInt {
        let mut f: BigInt = self.tame_ramified.iter().map(|&l| BigInt::from(l)).product();
        if self.wild_at_p {
            f *= self.p * self.p;
        }
        f
    }

    pub fn is_ramified_at(&self, ell: u64) -> bool {
        (ell == self.p && self.wild_at_p) || self.tame_ramified.binary_search(&ell).is_ok()
    }

    /// Whether this is the first layer of the cyclotomic Z_p-extension.
    pub fn is_cyclotomic_layer(&self) -> bool {
        self.tame_ramified.is_empty() && self.wild_at_p
    }

    /// Value of the character at an unramified prime, in `Z/p`.
    pub fn character_value(&self, ell: u64) -> Result<u64> {
        if self.is_ramified_at(ell) {
            return Err(Error::WrongOperation(format!("{ell} is ramified; use ramified_splitting")));
        }
        let p = self.p;
        let mut v = 0u64;
        for (&q, &e) in self.tame_ramified.iter().zip(&self.exponents) {
            v = (v + e * local_log(ell, q, q - 1, p)) % p;
        }
        if self.wild_at_p {
            let e = *self.exponents.last().expect("wild exponent");
            v = (v + e * local_log(ell, p * p, p * (p - 1), p)) % p;
        }
        Ok(v)
    }

    pub fn to_json(&self) -> Value {
        let disc = discriminant(self);
        let disc_json = match u64::try_from(&disc) {
            Ok(d) => json!(d),
            Err(_) => json!(disc.to_string()),
        };
        json!({
            "p": self.p,
            "tame_ramified": self.tame_ramified,
            "wild_at_p": self.wild_at_p,
            "exponents": self.exponents,
            "discriminant": disc_json,
        })
    }
}

/// `conductor^{p-1}`, with conductor exponent 2 at a wildly ramified `p`.
pub fn discriminant(ext: &CyclicExtension) -> BigInt {
    ext.conductor().pow((ext.p - 1) as u32)
}

/// Decomposition of an unramified prime `ell != p`.
pub fn splitting(ext: &CyclicExtension, ell: u64) -> Result<SplittingRecord> {
    if ell == ext.p {
        return Err(Error::ExcludedPrime(ell));
    }
    let value = ext.character_value(ell)?;
    let p = ext.p;
    let (f, g) = if value == 0 { (1, p) } else { (p, 1) };
    let m = cyclotomic_split_count(ell, p)?.m;
    // Decomposition group of `ell` in Gal(L_cyc/Q) = Z/p x Z_p is the closure
    // of one element whose Z_p-coordinate has valuation m: index p^{m+1}.
    Ok(SplittingRecord { ell, e: 1, f, g, e_cyc: 1, w_count: BigInt::from(p).pow(m + 1) })
}

/// Decomposition of a tamely ramified prime: total ramification, with one
/// prime of `L_cyc` over each of the `p^m` primes of `Q_cyc`.
pub fn ramified_splitting(ext: &CyclicExtension, ell: u64) -> Result<SplittingRecord> {
    if ell == ext.p {
        return Err(Error::ExcludedPrime(ell));
    }
    if !ext.is_ramified_at(ell) {
        return Err(Error::WrongOperation(format!("{ell} is unramified; use splitting")));
    }
    let p = ext.p;
    let m = cyclotomic_split_count(ell, p)?.m;
    Ok(SplittingRecord { ell, e: p, f: 1, g: 1, e_cyc: p, w_count: BigInt::from(p).pow(m) })
}

/// Sums `(p-1)^{k-1}` over squarefree `n = ell_1...ell_k <= bound` built from
/// the given primes (`n >= 2`), by depth-first search.
pub fn g_from_primes(p: u64, primes: &[u64], bound: u64) -> u64 {
    let mut primes = primes.to_vec();
    primes.sort_unstable();
    primes.dedup();
    let mut total = 0u64;
    squarefree_products(&primes, bound, &mut |_, k| total += (p - 1).pow(k - 1));
    total
}

/// Calls `visit(n, k)` for every squarefree product of `k >= 1` of the given
/// sorted primes with `n <= bound`.
fn squarefree_products(primes: &[u64], bound: u64, visit: &mut dyn FnMut(u64, u32)) {
    fn go(primes: &[u64], start: usize, n: u64, k: u32, bound: u64, visit: &mut dyn FnMut(u64, u32)) {
        for i in start..primes.len() {
            let Some(m) = n.checked_mul(primes[i]).filter(|&m| m <= bound) else { break };
            visit(m, k + 1);
            go(primes, i + 1, m, k + 1, bound, visit);
        }
    }
    go(primes, 0, 1, 0, bound, visit);
}

/// The same sum computed by sieving `[1, bound]`.
pub fn g_sieve(p: u64, primes: &[u64], bound: u64) -> u64 {
    g_sieve_weights(p, primes, bound).iter().sum()
}

/// Weight of each `n <= bound` found by sieving: `n` is reduced by every
/// listed prime dividing it and kept with weight `(p-1)^{k-1}` when fully
/// reduced and squarefree, `k` being its number of prime factors.
pub fn g_sieve_weights(p: u64, primes: &[u64], bound: u64) -> Vec<u64> {
    let size = bound as usize + 1;
    let mut rest: Vec<u64> = (0..=bound).collect();
    let mut factors = vec![0u32; size];
    let mut square = vec![false; size];
    for &q in primes.iter().collect::<BTreeSet<_>>() {
        if q > bound {
            continue;
        }
        for n in (q..=bound).step_by(q as usize) {
            rest[n as usize] /= q;
            factors[n as usize] += 1;
        }
        if let Some(q2) = q.checked_mul(q) {
            for n in (q2..=bound).step_by(q2 as usize) {
                square[n as usize] = true;
            }
        }
    }
    (0..size)
        .map(|n| if n >= 2 && rest[n] == 1 && !square[n] { (p - 1).pow(factors[n] - 1) } else { 0 })
        .collect()
}

/// `(n, weight)` for every squarefree product of the given primes up to
/// `bound`, sorted by `n`; prefix sums give `g` at any `X <= bound`.
pub fn g_weights(p: u64, primes: &[u64], bound: u64) -> Vec<(u64, u64)> {
    let mut primes = primes.to_vec();
    primes.sort_unstable();
    primes.dedup();
    let mut out = Vec::new();
    squarefree_products(&primes, bound, &mut |n, k| out.push((n, (p - 1).pow(k - 1))));
    out.sort_unstable();
    out
}

/// Prefix sums of sorted weights evaluated at each grid point.
pub fn cumulative_at(weights: &[(u64, u64)], grid: &[u64]) -> Vec<u64> {
    grid.iter()
        .map(|&x| weights.iter().take_while(|&&(n, _)| n <= x).map(|&(_, w)| w).sum())
        .collect()
}

/// Conductors `f` with `f^{p-1} <= bound`, each with the number of fields of
/// that conductor.
pub fn conductors_up_to(p: u64, bound: &BigInt) -> Result<Vec<(u64, u64)>> {
    check_p(p)?;
    let max_f = conductor_bound(p, bound)?;
    let tame: Vec<u64> = if max_f >= 2 {
        sieve_primes(max_f)?.iter().filter(|&l| l % p == 1).collect()
    } else {
        Vec::new()
    };
    let mut out = Vec::new();
    let p2 = p * p;
    out.extend((p2 <= max_f).then_some((p2, 1)));
    squarefree_products(&tame, max_f, &mut |n, k| {
        out.push((n, (p - 1).pow(k - 1)));
        if let Some(m) = n.checked_mul(p2).filter(|&m| m <= max_f) {
            out.push((m, (p - 1).pow(k)));
        }
    });
    out.sort_unstable();
    Ok(out)
}

/// Largest `f` with `f^{p-1} <= bound`.
fn conductor_bound(p: u64, bound: &BigInt) -> Result<u64> {
    if *bound < BigInt::from(1) {
        return Ok(0);
    }
    let root = bound.nth_root((p - 1) as u32);
    u64::try_from(&root).map_err(|_| Error::Budget(format!("conductor bound {root} too large")))
}

/// Number of degree-`p` cyclic fields with discriminant at most `bound`.
pub fn m_of_x(p: u64, bound: &BigInt) -> Result<u64> {
    Ok(conductors_up_to(p, bound)?.iter().map(|&(_, w)| w).sum())
}

/// The same count from characters: the order-`p` characters modulo `n`
/// number `p^{r(n)}`, where `r(n)` counts the cyclic factors of `(Z/n)*` of
/// order divisible by `p`; Moebius inversion isolates the primitive ones and
/// each field accounts for `p - 1` of them.
pub fn m_of_x_by_characters(p: u64, bound: &BigInt) -> Result<u64> {
    check_p(p)?;
    let max_f = conductor_bound(p, bound)?;
    if max_f < 2 {
        return Ok(0);
    }
    let size = max_f as usize + 1;
    let mut r = vec![0u32; size];
    let mut mobius = vec![1i64; size];
    let mut is_comp = vec![false; size];
    for q in 2..size {
        if is_comp[q] {
            continue;
        }
        for n in (q..size).step_by(q) {
            if n > q {
                is_comp[n] = true;
            }
            mobius[n] = -mobius[n];
            if q as u64 % p == 1 {
                r[n] += 1;
            }
        }
        let q2 = q * q;
        for n in (q2..size).step_by(q2) {
            mobius[n] = 0;
        }
        if q as u64 == p {
            for n in (q2..size).step_by(q2) {
                r[n] += 1;
            }
        }
    }
    let mut primitive = vec![0i64; size];
    for d in 1..size {
        let t = (p as i64).pow(r[d]);
        for (j, n) in (d..size).step_by(d).enumerate() {
            primitive[n] += mobius[j + 1] * t;
        }
    }
    let total: i64 = primitive[2..].iter().sum();
    debug_assert_eq!(total % (p as i64 - 1), 0);
    Ok((total / (p as i64 - 1)) as u64)
}

/// Every degree-`p` cyclic field with discriminant at most `bound`, ordered by
/// conductor and then by character.
pub fn enumerate_by_discriminant(p: u64, bound: &BigInt) -> Result<Vec<CyclicExtension>> {
    let mut out = Vec::new();
    for (f, _) in conductors_up_to(p, bound)? {
        let mut ram = Vec::new();
        let mut rest = f;
        if rest % (p * p) == 0 {
            rest /= p * p;
        }
        for (q, _) in crate::arith::factor_u64(rest) {
            ram.push(q);
        }
        if f % (p * p) == 0 {
            ram.push(p);
        }
        out.extend(enumerate_extensions(p, &ram)?);
    }
    Ok(out)
}
