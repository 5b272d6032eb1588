//! Independent oracles shared by the integration tests and the acceptance
//! runner. Nothing here calls into the library's arithmetic.

#![allow(dead_code)]

use kida_core::WeierstrassModel;
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The conductor-99 curve y^2 + y = x^3 - 3x - 5.
pub fn example() -> WeierstrassModel {
    WeierstrassModel::from_ints([0, 0, 1, -3, -5]).unwrap()
}

pub fn coeffs_i64(model: &WeierstrassModel) -> [i64; 5] {
    let c = model.coeffs();
    std::array::from_fn(|i| i64::try_from(&c[i]).expect("small coefficients"))
}

/// Nonsingular curves with coefficients in `[-bound, bound]`.
pub fn random_curves(seed: u64, count: usize, bound: i64) -> Vec<WeierstrassModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let a: [i64; 5] = std::array::from_fn(|_| rng.gen_range(-bound..=bound));
        if let Ok(m) = WeierstrassModel::from_ints(a) {
            out.push(m);
        }
    }
    out
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    (2..=n).filter(|&k| (2..).take_while(|d| d * d <= k).all(|d| k % d != 0)).collect()
}

/// Discriminant of the integral model, in i128 for small coefficients.
pub fn discriminant(a: [i64; 5]) -> i128 {
    let [a1, a2, a3, a4, a6] = a.map(i128::from);
    let b2 = a1 * a1 + 4 * a2;
    let b4 = 2 * a4 + a1 * a3;
    let b6 = a3 * a3 + 4 * a6;
    let b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
    -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6
}

/// Good reduction of the given (not necessarily minimal) model at `ell`.
pub fn model_is_good(a: [i64; 5], ell: u64) -> bool {
    discriminant(a).rem_euclid(ell as i128) != 0
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u128;
    let mut b128 = (b % m) as u128;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b128 % m as u128;
        }
        b128 = b128 * b128 % m as u128;
        e >>= 1;
    }
    b = r as u64;
    b
}

/// `#E(F_ell)` by Euler's criterion for odd `ell`, direct enumeration at 2.
pub fn count_prime_field(a: [i64; 5], ell: u64) -> u64 {
    let r = |c: i64| c.rem_euclid(ell as i64) as u64;
    let [a1, a2, a3, a4, a6] = a.map(r);
    let mut total = 1u64;
    for x in 0..ell {
        let rhs = (((x * x % ell) * x) + a2 * (x * x % ell) + a4 * x + a6) % ell;
        let b = (a1 * x + a3) % ell;
        if ell == 2 {
            total += (0..2).filter(|&y| (y * y + b * y) % 2 == rhs).count() as u64;
            continue;
        }
        let d = (b * b + 4 * rhs) % ell;
        total += match d {
            0 => 1,
            _ if pow_mod(d, (ell - 1) / 2, ell) == 1 => 2,
            _ => 0,
        };
    }
    total
}

/// `#E(F_{ell^k})` for `k = 0..=kmax` from the trace, via
/// `s_k = a s_{k-1} - ell s_{k-2}`.
pub fn extension_counts(ell: u64, a: i64, kmax: usize) -> Vec<BigInt> {
    let ell_b = BigInt::from(ell);
    let a_b = BigInt::from(a);
    let mut s: Vec<BigInt> = vec![BigInt::from(2), a_b.clone()];
    while s.len() <= kmax {
        let k = s.len();
        let next = &a_b * &s[k - 1] - &ell_b * &s[k - 2];
        s.push(next);
    }
    let mut q = BigInt::from(1);
    let mut out = Vec::with_capacity(kmax + 1);
    for sk in s.iter().take(kmax + 1) {
        out.push(&q + 1 - sk);
        q *= &ell_b;
    }
    out
}

/// The field with `ell^n` elements, encoded as integers whose base-`ell`
/// digits are polynomial coefficients, with log tables for multiplication.
pub struct FiniteField {
    pub ell: u64,
    pub n: u32,
    pub q: usize,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl FiniteField {
    pub fn new(ell: u64, n: u32) -> Self {
        let q = ell.pow(n) as usize;
        // Try monic moduli until some element has order q - 1, which forces
        // the quotient ring to be a field.
        for tail in 0..q {
            let modulus = digits(tail as u64, ell, n as usize);
            for g in 1..q.min(64) {
                let g_digits = digits(g as u64, ell, n as usize);
                let mut exp = Vec::with_capacity(q - 1);
                let mut cur = digits(1, ell, n as usize);
                let mut seen = vec![false; q];
                let mut ok = true;
                for _ in 0..q - 1 {
                    let code = undigits(&cur, ell) as usize;
                    if seen[code] || code == 0 {
                        ok = false;
                        break;
                    }
                    seen[code] = true;
                    exp.push(code as u32);
                    cur = poly_mulmod(&cur, &g_digits, &modulus, ell);
                }
                if ok && undigits(&cur, ell) == 1 {
                    let mut log = vec![0u32; q];
                    for (i, &e) in exp.iter().enumerate() {
                        log[e as usize] = i as u32;
                    }
                    return FiniteField { ell, n, q, exp, log };
                }
            }
        }
        unreachable!("some monic polynomial of each degree is primitive");
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        let (mut a, mut b, mut out, mut place) = (a as u64, b as u64, 0u64, 1u64);
        for _ in 0..self.n {
            out += ((a % self.ell + b % self.ell) % self.ell) * place;
            a /= self.ell;
            b /= self.ell;
            place *= self.ell;
        }
        out as u32
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let l = (self.log[a as usize] as usize + self.log[b as usize] as usize) % (self.q - 1);
        self.exp[l]
    }

    /// Embeds an integer through the prime subfield.
    pub fn constant(&self, c: i64) -> u32 {
        c.rem_euclid(self.ell as i64) as u32
    }

    fn is_square(&self, a: u32) -> bool {
        a == 0 || self.log[a as usize] % 2 == 0
    }

    /// `#E(F_q)` from the general Weierstrass equation. For odd `ell` the
    /// number of `y` over each `x` is read from the square test on the
    /// discriminant of the quadratic in `y`; at 2 every `y` is tried.
    pub fn count_points(&self, a: [i64; 5]) -> u64 {
        let [a1, a2, a3, a4, a6] = a.map(|c| self.constant(c));
        let mut total = 1u64;
        for x in 0..self.q as u32 {
            let x2 = self.mul(x, x);
            let x3 = self.mul(x2, x);
            let rhs = self.add(self.add(x3, self.mul(a2, x2)), self.add(self.mul(a4, x), a6));
            let b = self.add(self.mul(a1, x), a3);
            if self.ell == 2 {
                for y in 0..self.q as u32 {
                    let lhs = self.add(self.mul(y, y), self.mul(b, y));
                    total += (lhs == rhs) as u64;
                }
                continue;
            }
            let four_rhs = self.mul(self.constant(4), rhs);
            let d = self.add(self.mul(b, b), four_rhs);
            total += if d == 0 { 1 } else if self.is_square(d) { 2 } else { 0 };
        }
        total
    }
}

fn digits(mut v: u64, ell: u64, n: usize) -> Vec<u64> {
    (0..n)
        .map(|_| {
            let d = v % ell;
            v /= ell;
            d
        })
        .collect()
}

fn undigits(d: &[u64], ell: u64) -> u64 {
    d.iter().rev().fold(0, |acc, &x| acc * ell + x)
}

/// Product modulo the monic polynomial `x^n + sum tail_i x^i`.
fn poly_mulmod(a: &[u64], b: &[u64], tail: &[u64], ell: u64) -> Vec<u64> {
    let n = tail.len();
    let mut prod = vec![0u64; 2 * n];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % ell;
        }
    }
    for k in (n..2 * n).rev() {
        let c = prod[k];
        if c == 0 {
            continue;
        }
        prod[k] = 0;
        for (i, &t) in tail.iter().enumerate() {
            prod[k - n + i] = (prod[k - n + i] + (ell - t) * c) % ell;
        }
    }
    prod.truncate(n);
    prod
}

/// Per-criterion outcome for the acceptance runner.
pub fn check(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

