//! Counting points of reductions over prime fields and their extensions.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{factor_u64, inv_mod, is_prime, isqrt, legendre_unchecked, mul_mod, reduce, sqrt_mod};
use crate::curve::WeierstrassModel;
use crate::error::{Error, Result};

/// Primes at or below this are counted by enumeration.
pub const DEFAULT_CROSSOVER: u64 = 457;

const MAX_BSGS_POINTS: usize = 64;

/// Trace of Frobenius at a good prime and the point counts it determines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrobeniusData {
    pub ell: u64,
    pub a_ell: i64,
    /// `n -> #E(F_{ell^n})`
    pub counts: BTreeMap<u32, BigInt>,
}

impl FrobeniusData {
    /// Builds the data from a trace, filling counts for `1..=max_n`.
    pub fn from_trace(ell: u64, a_ell: i64, max_n: u32) -> Result<Self> {
        if (a_ell as i128).pow(2) > 4 * ell as i128 {
            return Err(Error::InvalidInput(format!("trace {a_ell} violates the Hasse bound at {ell}")));
        }
        let mut fd = FrobeniusData { ell, a_ell, counts: BTreeMap::new() };
        for n in 1..=max_n {
            let c = order_over_extension(&fd, n)?;
            fd.counts.insert(n, c);
        }
        Ok(fd)
    }

    pub fn for_curve(model: &WeierstrassModel, ell: u64, max_n: u32) -> Result<Self> {
        let n = PointCounter::default().count(model, ell)?;
        Self::from_trace(ell, ell as i64 + 1 - n as i64, max_n)
    }
}

/// `#E(F_{ell^n}) = ell^n + 1 - s_n` with `s_0 = 2`, `s_1 = a`,
/// `s_k = a s_{k-1} - ell s_{k-2}`.
pub fn order_over_extension(fd: &FrobeniusData, n: u32) -> Result<BigInt> {
    if n == 0 {
        return Err(Error::InvalidInput("extension degree must be at least 1".into()));
    }
    let ell = BigInt::from(fd.ell);
    let a = BigInt::from(fd.a_ell);
    let mut prev = BigInt::from(2);
    let mut cur = a.clone();
    for _ in 1..n {
        let next = &a * &cur - &ell * &prev;
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(ell.pow(n) + 1 - cur)
}

fn require_good(model: &WeierstrassModel, ell: u64) -> Result<()> {
    if !is_prime(ell) {
        return Err(Error::InvalidInput(format!("{ell} is not prime")));
    }
    if reduce(&model.discriminant(), ell) == 0 {
        return Err(Error::BadReduction(ell));
    }
    Ok(())
}

/// `#E(F_ell)` by enumeration, including the point at infinity.
pub fn count_points_naive(model: &WeierstrassModel, ell: u64) -> Result<u64> {
    require_good(model, ell)?;
    let [a1, a2, a3, a4, a6] = model.reduce_mod(ell);
    if ell == 2 {
        let mut n = 1;
        for x in 0..2u64 {
            for y in 0..2u64 {
                let lhs = y * y + a1 * x * y + a3 * y;
                let rhs = x * x * x + a2 * x * x + a4 * x + a6;
                if (lhs + rhs) % 2 == 0 {
                    n += 1;
                }
            }
        }
        return Ok(n);
    }
    // y^2 + h y = g  <=>  (2y + h)^2 = h^2 + 4g
    let mut chi = vec![-1i8; ell as usize];
    chi[0] = 0;
    for y in 1..=(ell / 2) {
        chi[mul_mod(y, y, ell) as usize] = 1;
    }
    let mut n = 1u64;
    for x in 0..ell {
        let h = (mul_mod(a1, x, ell) + a3) % ell;
        let x2 = mul_mod(x, x, ell);
        let g = (mul_mod(x2, x, ell) + mul_mod(a2, x2, ell) + mul_mod(a4, x, ell) + a6) % ell;
        let d = (mul_mod(h, h, ell) + mul_mod(4, g, ell)) % ell;
        n += (1 + chi[d as usize] as i64) as u64;
    }
    Ok(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pt {
    Inf,
    Aff(u64, u64),
}

/// `y^2 = x^3 + a x + b` over F_p, p >= 5.
struct ShortCurve {
    a: u64,
    b: u64,
    p: u64,
}

impl ShortCurve {
    fn add(&self, u: Pt, v: Pt) -> Pt {
        let p = self.p;
        match (u, v) {
            (Pt::Inf, _) => v,
            (_, Pt::Inf) => u,
            (Pt::Aff(x1, y1), Pt::Aff(x2, y2)) => {
                let lambda = if x1 == x2 {
                    if (y1 + y2) % p == 0 {
                        return Pt::Inf;
                    }
                    let num = (mul_mod(3, mul_mod(x1, x1, p), p) + self.a) % p;
                    mul_mod(num, inv_mod(mul_mod(2, y1, p), p).expect("nonzero"), p)
                } else {
                    let num = (y2 + p - y1) % p;
                    mul_mod(num, inv_mod((x2 + p - x1) % p, p).expect("nonzero"), p)
                };
                let x3 = (mul_mod(lambda, lambda, p) + 2 * p - x1 - x2) % p;
                let y3 = (mul_mod(lambda, (x1 + p - x3) % p, p) + p - y1) % p;
                Pt::Aff(x3, y3)
            }
        }
    }

    fn mul(&self, pt: Pt, mut k: u64) -> Pt {
        let mut acc = Pt::Inf;
        let mut base = pt;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(acc, base);
            }
            base = self.add(base, base);
            k >>= 1;
        }
        acc
    }

    fn random_point(&self, rng: &mut ChaCha8Rng) -> Pt {
        let p = self.p;
        loop {
            let x = rng.gen_range(0..p);
            let rhs = (mul_mod(mul_mod(x, x, p), x, p) + mul_mod(self.a, x, p) + self.b) % p;
            if let Some(y) = sqrt_mod(rhs, p) {
                let y = if rng.gen::<bool>() { y } else { (p - y) % p };
                return Pt::Aff(x, y);
            }
        }
    }

    /// Some `k > 0` in roughly `[lo, hi]` with `kP = O`, by baby-step giant-step.
    fn annihilator(&self, pt: Pt, lo: u64, hi: u64) -> Option<u64> {
        let m = isqrt(hi - lo) + 1;
        let mut baby: HashMap<u64, (u64, u64)> = HashMap::with_capacity(m as usize);
        let mut cur = Pt::Inf;
        for j in 1..=m {
            cur = self.add(cur, pt);
            match cur {
                Pt::Inf => return Some(j),
                Pt::Aff(x, y) => {
                    baby.entry(x).or_insert((j, y));
                }
            }
        }
        let step = self.mul(pt, m);
        let mut giant = self.mul(pt, lo);
        for i in 0..=m + 1 {
            let base = lo + i * m;
            match giant {
                Pt::Inf => return Some(base),
                Pt::Aff(x, y) => {
                    if let Some(&(j, yj)) = baby.get(&x) {
                        let k = if yj == y { base - j } else { base + j };
                        if k > 0 {
                            return Some(k);
                        }
                    }
                }
            }
            giant = self.add(giant, step);
        }
        None
    }

    fn order(&self, pt: Pt, lo: u64, hi: u64) -> Option<u64> {
        let mut k = self.annihilator(pt, lo, hi)?;
        debug_assert_eq!(self.mul(pt, k), Pt::Inf);
        for (q, _) in factor_u64(k) {
            while k % q == 0 && self.mul(pt, k / q) == Pt::Inf {
                k /= q;
            }
        }
        Some(k)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    use num_integer::Integer;
    a.lcm(&b)
}

/// `#E(F_ell)` by baby-step giant-step on point orders of `E` and its
/// quadratic twist, until a single group order in the Hasse interval fits.
pub fn count_points_bsgs(model: &WeierstrassModel, ell: u64) -> Result<u64> {
    require_good(model, ell)?;
    if ell < 5 {
        return Err(Error::InvalidInput(format!("baby-step giant-step needs ell >= 5, got {ell}")));
    }
    let inv = model.invariants();
    let a = reduce(&(-27 * &inv.c4), ell);
    let b = reduce(&(-54 * &inv.c6), ell);
    let curve = ShortCurve { a, b, p: ell };
    let g = (2..ell).find(|&g| legendre_unchecked(g, ell) == -1).expect("non-residue exists");
    let g2 = mul_mod(g, g, ell);
    let twist = ShortCurve { a: mul_mod(a, g2, ell), b: mul_mod(b, mul_mod(g2, g, ell), ell), p: ell };

    let width = isqrt(4 * ell);
    let lo = ell + 1 - width;
    let hi = ell + 1 + width;
    let mut rng = ChaCha8Rng::seed_from_u64(ell ^ 0x9e37_79b9_7f4a_7c15);
    let (mut l_curve, mut l_twist) = (1u64, 1u64);

    for attempt in 0..MAX_BSGS_POINTS {
        let on_twist = attempt % 2 == 1;
        let c = if on_twist { &twist } else { &curve };
        let pt = c.random_point(&mut rng);
        let Some(ord) = c.order(pt, lo, hi) else { continue };
        if on_twist {
            l_twist = lcm(l_twist, ord);
        } else {
            l_curve = lcm(l_curve, ord);
        }
        let mut found = None;
        let mut count = 0;
        let mut n = lo.div_ceil(l_curve) * l_curve;
        while n <= hi {
            if (2 * ell + 2 - n) % l_twist == 0 {
                count += 1;
                found = Some(n);
                if count > 1 {
                    break;
                }
            }
            n += l_curve;
        }
        if count == 1 {
            return Ok(found.expect("one candidate"));
        }
    }
    log::warn!("point orders at {ell} left the group order ambiguous; enumerating");
    count_points_naive(model, ell)
}

/// Dispatches between enumeration and baby-step giant-step.
#[derive(Debug, Clone, Copy)]
pub struct PointCounter {
    pub crossover: u64,
}

impl Default for PointCounter {
    fn default() -> Self {
        PointCounter { crossover: DEFAULT_CROSSOVER }
    }
}

impl PointCounter {
    pub fn count(&self, model: &WeierstrassModel, ell: u64) -> Result<u64> {
        if ell <= self.crossover || ell < 5 {
            count_points_naive(model, ell)
        } else {
            count_points_bsgs(model, ell)
        }
    }

    /// `a_ell = ell + 1 - #E(F_ell)`.
    pub fn trace(&self, model: &WeierstrassModel, ell: u64) -> Result<i64> {
        Ok(ell as i64 + 1 - self.count(model, ell)? as i64)
    }
}
