//! Tate's algorithm: reduction type, Kodaira symbol, Tamagawa number and
//! conductor exponent of a minimal model at a prime, including 2 and 3.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::arith::{inv_mod, is_prime, legendre_unchecked, mul_mod, reduce, val_or_inf};
use crate::curve::WeierstrassModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionType {
    Good,
    SplitMultiplicative,
    NonsplitMultiplicative,
    Additive,
}

impl ReductionType {
    pub fn is_multiplicative(self) -> bool {
        matches!(self, Self::SplitMultiplicative | Self::NonsplitMultiplicative)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kodaira {
    I0,
    I(u32),
    II,
    III,
    IV,
    I0Star,
    IStar(u32),
    IVStar,
    IIIStar,
    IIStar,
}

impl Kodaira {
    /// Number of irreducible components of the special fibre.
    pub fn components(self) -> u32 {
        match self {
            Kodaira::I0 => 1,
            Kodaira::I(n) => n,
            Kodaira::II => 1,
            Kodaira::III => 2,
            Kodaira::IV => 3,
            Kodaira::I0Star => 5,
            Kodaira::IStar(n) => n + 5,
            Kodaira::IVStar => 7,
            Kodaira::IIIStar => 8,
            Kodaira::IIStar => 9,
        }
    }
}

impl fmt::Display for Kodaira {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kodaira::I0 => write!(f, "I0"),
            Kodaira::I(n) => write!(f, "I{n}"),
            Kodaira::II => write!(f, "II"),
            Kodaira::III => write!(f, "III"),
            Kodaira::IV => write!(f, "IV"),
            Kodaira::I0Star => write!(f, "I0*"),
            Kodaira::IStar(n) => write!(f, "I{n}*"),
            Kodaira::IVStar => write!(f, "IV*"),
            Kodaira::IIIStar => write!(f, "III*"),
            Kodaira::IIStar => write!(f, "II*"),
        }
    }
}

impl Serialize for Kodaira {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Local data of a minimal model at a prime.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalReductionData {
    pub ell: u64,
    pub reduction: ReductionType,
    pub kodaira: Kodaira,
    pub tamagawa: u32,
    pub v_disc: u32,
    /// `None` when `c4 = 0`.
    pub v_c4: Option<u32>,
    pub conductor_exponent: u32,
}

/// Reduction data of `model` at `ell`. The model must be minimal at `ell`.
pub fn reduction_type(model: &WeierstrassModel, ell: u64) -> Result<LocalReductionData> {
    if !is_prime(ell) {
        return Err(Error::InvalidInput(format!("{ell} is not prime")));
    }
    let inv = model.invariants();
    let v_disc = val_or_inf(&inv.disc, ell);
    let v_c4 = (!inv.c4.is_zero()).then(|| val_or_inf(&inv.c4, ell));
    let v_c6 = val_or_inf(&inv.c6, ell);
    if ell >= 5 && v_c4.map_or(true, |v| v >= 4) && v_c6 >= 6 && v_disc >= 12 {
        return Err(Error::NotMinimal(ell));
    }
    let local = |reduction, kodaira, tamagawa, conductor_exponent| LocalReductionData {
        ell,
        reduction,
        kodaira,
        tamagawa,
        v_disc,
        v_c4,
        conductor_exponent,
    };
    if v_disc == 0 {
        return Ok(local(ReductionType::Good, Kodaira::I0, 1, 0));
    }
    if v_c4 == Some(0) && ell >= 3 {
        let split = legendre_unchecked(reduce(&-&inv.c6, ell), ell) == 1;
        return Ok(multiplicative(local, split, v_disc));
    }
    Tate::new(ell).run(model, v_disc, local)
}

fn multiplicative<F>(local: F, split: bool, n: u32) -> LocalReductionData
where
    F: Fn(ReductionType, Kodaira, u32, u32) -> LocalReductionData,
{
    if split {
        local(ReductionType::SplitMultiplicative, Kodaira::I(n), n, 1)
    } else {
        local(ReductionType::NonsplitMultiplicative, Kodaira::I(n), if n % 2 == 0 { 2 } else { 1 }, 1)
    }
}

/// Split test by the tangent slopes at the node, valid for every prime. Used
/// at 2 inside the algorithm and as a cross-check of the `-c6` criterion.
pub fn split_by_tangents(model: &WeierstrassModel, ell: u64) -> Option<bool> {
    let t = Tate::new(ell);
    let e = t.shift_singular_point(model);
    let [a1, a2, ..] = e.coeffs();
    let b2 = a1 * a1 + 4 * a2;
    if t.pdiv(&b2) {
        return None;
    }
    Some(t.quad_has_root(&BigInt::one(), a1, &-a2))
}

struct Tate {
    ell: u64,
    pi: BigInt,
}

impl Tate {
    fn new(ell: u64) -> Self {
        Tate { ell, pi: BigInt::from(ell) }
    }

    fn pdiv(&self, x: &BigInt) -> bool {
        (x % &self.pi).is_zero()
    }

    fn val(&self, x: &BigInt) -> u32 {
        val_or_inf(x, self.ell)
    }

    fn red(&self, x: &BigInt) -> u64 {
        reduce(x, self.ell)
    }

    fn inv(&self, x: &BigInt) -> BigInt {
        BigInt::from(inv_mod(self.red(x), self.ell).expect("unit mod ell"))
    }

    /// Exact division by a power of the uniformizer.
    fn div(&self, x: &BigInt, k: u32) -> BigInt {
        let d = self.pi.pow(k);
        let (q, r) = x.div_rem(&d);
        debug_assert!(r.is_zero(), "{x} not divisible by {}^{k}", self.ell);
        q
    }

    /// Square root mod 2 or cube root mod 3, where Frobenius is the identity.
    fn root(&self, x: &BigInt) -> BigInt {
        BigInt::from(self.red(x))
    }

    fn quad_has_root(&self, a: &BigInt, b: &BigInt, c: &BigInt) -> bool {
        let (a, b, c) = (self.red(a), self.red(b), self.red(c));
        let ell = self.ell;
        if a == 0 {
            return b != 0 || c == 0;
        }
        if ell == 2 {
            return (0..2).any(|x| (a * x * x + b * x + c) % 2 == 0);
        }
        let disc = (mul_mod(b, b, ell) + ell - mul_mod(4 % ell, mul_mod(a, c, ell), ell)) % ell;
        legendre_unchecked(disc, ell) >= 0
    }

    /// Number of roots in F_ell of the monic cubic `X^3 + bX^2 + cX + d`.
    fn cubic_root_count(&self, b: &BigInt, c: &BigInt, d: &BigInt) -> u32 {
        let ell = self.ell;
        let f = [self.red(d), self.red(c), self.red(b), 1];
        if ell < 64 {
            return (0..ell)
                .filter(|&x| {
                    let v = (mul_mod(mul_mod(x, x, ell), x, ell)
                        + mul_mod(f[2], mul_mod(x, x, ell), ell)
                        + mul_mod(f[1], x, ell)
                        + f[0])
                        % ell;
                    v == 0
                })
                .count() as u32;
        }
        // degree of gcd(X^ell - X, f) for a squarefree cubic f
        let xp = poly_pow_x_mod_cubic(ell, &f, ell);
        let mut g = [xp[0], (xp[1] + ell - 1) % ell, xp[2]];
        let deg = poly_gcd_degree(&mut g, &f, ell);
        deg as u32
    }

    /// Shift so that the singular point of the reduction is at (0, 0).
    fn shift_singular_point(&self, e: &WeierstrassModel) -> WeierstrassModel {
        let [a1, a2, a3, a4, a6] = e.coeffs().clone();
        let inv = e.invariants();
        let (b2, b4, b6, c4, c6) = (inv.b2, inv.b4, inv.b6, inv.c4, inv.c6);
        let (r, t) = match self.ell {
            2 => {
                if self.pdiv(&b2) {
                    let r = self.root(&a4);
                    let t = self.root(&(((&r + &a2) * &r + &a4) * &r + &a6));
                    (r, t)
                } else {
                    let temp = self.inv(&a1);
                    let r = &temp * &a3;
                    let t = &temp * (&a4 + &r * &r);
                    (r, t)
                }
            }
            3 => {
                let r = if self.pdiv(&b2) { self.root(&-&b6) } else { -self.inv(&b2) * &b4 };
                let t = &a1 * &r + &a3;
                (r, t)
            }
            _ => {
                let r = if self.pdiv(&c4) {
                    -self.inv(&BigInt::from(12)) * &b2
                } else {
                    -self.inv(&(12 * &c4)) * (&c6 + &b2 * &c4)
                };
                let t = -self.inv(&BigInt::from(2)) * (&a1 * &r + &a3);
                (r, t)
            }
        };
        let r = BigInt::from(self.red(&r));
        let t = BigInt::from(self.red(&t));
        let out = e.rst_transform(&r, &BigInt::zero(), &t);
        debug_assert!(
            self.pdiv(out.a3()) && self.pdiv(out.a4()) && self.pdiv(out.a6()),
            "singular point not moved to origin"
        );
        out
    }

    fn run<F>(&self, model: &WeierstrassModel, v_disc: u32, local: F) -> Result<LocalReductionData>
    where
        F: Fn(ReductionType, Kodaira, u32, u32) -> LocalReductionData,
    {
        let ell = self.ell;
        let pi = &self.pi;
        let zero = BigInt::zero();
        let one = BigInt::one();
        let half = if ell > 2 { self.inv(&BigInt::from(2)) } else { zero.clone() };

        let mut e = self.shift_singular_point(model);
        let b2 = {
            let [a1, a2, ..] = e.coeffs();
            a1 * a1 + 4 * a2
        };
        if !self.pdiv(&b2) {
            let [a1, a2, ..] = e.coeffs();
            let split = self.quad_has_root(&one, a1, &-a2);
            return Ok(multiplicative(local, split, v_disc));
        }

        let additive = |k, c, f| local(ReductionType::Additive, k, c, f);
        let coeffs = |e: &WeierstrassModel| e.coeffs().clone();

        let [_, _, a3, _, a6] = coeffs(&e);
        if self.val(&a6) < 2 {
            return Ok(additive(Kodaira::II, 1, v_disc));
        }
        let b8 = e.invariants().b8;
        if self.val(&b8) < 3 {
            return Ok(additive(Kodaira::III, 2, v_disc - 1));
        }
        let b6 = e.invariants().b6;
        if self.val(&b6) < 3 {
            let c = if self.quad_has_root(&one, &self.div(&a3, 1), &-self.div(&a6, 2)) { 3 } else { 1 };
            return Ok(additive(Kodaira::IV, c, v_disc - 2));
        }

        // now p | a1, a2; p^2 | a3, a4; p^3 | a6
        let [a1, a2, a3, _, a6] = coeffs(&e);
        let (s, t) = match ell {
            2 => (self.root(&a2), pi * self.root(&self.div(&a6, 2))),
            3 => (a1.clone(), a3.clone()),
            _ => (-&a1 * &half, -&a3 * &half),
        };
        e = e.rst_transform(&zero, &s, &t);
        let [_, a2, _, a4, a6] = coeffs(&e);
        let b = self.div(&a2, 1);
        let c = self.div(&a4, 2);
        let d = self.div(&a6, 3);
        let bb = &b * &b;
        let cc = &c * &c;
        let bc = &b * &c;
        let w = 27 * &d * &d - &bb * &cc + 4 * &b * &bb * &d - 18 * &bc * &d + 4 * &c * &cc;
        let x = 3 * &c - &bb;
        let roots_kind = if self.pdiv(&w) {
            if self.pdiv(&x) {
                3
            } else {
                2
            }
        } else {
            1
        };

        match roots_kind {
            1 => {
                let cp = 1 + self.cubic_root_count(&b, &c, &d);
                Ok(additive(Kodaira::I0Star, cp, v_disc - 4))
            }
            2 => {
                // move the double root to T = 0
                let r = match ell {
                    2 => self.root(&c),
                    3 => &c * self.inv(&b),
                    _ => (&bc - 9 * &d) * self.inv(&(2 * &x)),
                };
                let r = pi * BigInt::from(self.red(&r));
                e = e.rst_transform(&r, &zero, &zero);
                let mut ix = 3u32;
                let mut iy = 3u32;
                let mut mx = pi * pi;
                let mut my = mx.clone();
                let cp;
                loop {
                    let [_, _, a3, _, a6] = coeffs(&e);
                    let a3t = exact(&a3, &my);
                    let a6t = exact(&a6, &(&mx * &my));
                    if !self.pdiv(&(&a3t * &a3t + 4 * &a6t)) {
                        cp = if self.quad_has_root(&one, &a3t, &-&a6t) { 4 } else { 2 };
                        break;
                    }
                    let t = if ell == 2 {
                        &my * self.root(&a6t)
                    } else {
                        &my * BigInt::from(self.red(&(-&a3t * &half)))
                    };
                    e = e.rst_transform(&zero, &zero, &t);
                    my = &my * pi;
                    iy += 1;
                    let [_, a2, _, a4, a6] = coeffs(&e);
                    let a2t = self.div(&a2, 1);
                    let a4t = exact(&a4, &(pi * &mx));
                    let a6t = exact(&a6, &(&mx * &my));
                    if !self.pdiv(&(&a4t * &a4t - 4 * &a6t * &a2t)) {
                        cp = if self.quad_has_root(&a2t, &a4t, &a6t) { 4 } else { 2 };
                        break;
                    }
                    let r = if ell == 2 {
                        &mx * self.root(&(&a6t * self.inv(&a2t)))
                    } else {
                        &mx * BigInt::from(self.red(&(-&a4t * self.inv(&(2 * &a2t)))))
                    };
                    e = e.rst_transform(&r, &zero, &zero);
                    mx = &mx * pi;
                    ix += 1;
                }
                let n = ix + iy - 5;
                Ok(additive(Kodaira::IStar(n), cp, v_disc + 1 - ix - iy))
            }
            _ => {
                // triple root: move it to T = 0
                let r = match ell {
                    2 => b.clone(),
                    3 => self.root(&-&d),
                    _ => -&b * self.inv(&BigInt::from(3)),
                };
                let r = pi * BigInt::from(self.red(&r));
                e = e.rst_transform(&r, &zero, &zero);
                let [_, _, a3, _, a6] = coeffs(&e);
                let a3t = self.div(&a3, 2);
                let a6t = self.div(&a6, 4);
                if !self.pdiv(&(&a3t * &a3t + 4 * &a6t)) {
                    let cp = if self.quad_has_root(&one, &a3t, &-&a6t) { 3 } else { 1 };
                    return Ok(additive(Kodaira::IVStar, cp, v_disc - 6));
                }
                let t = if ell == 2 {
                    -(pi * pi) * self.root(&a6t)
                } else {
                    pi * pi * BigInt::from(self.red(&(-&a3t * &half)))
                };
                e = e.rst_transform(&zero, &zero, &t);
                let [_, _, _, a4, a6] = coeffs(&e);
                if self.val(&a4) < 4 {
                    Ok(additive(Kodaira::IIIStar, 2, v_disc - 7))
                } else if self.val(&a6) < 6 {
                    Ok(additive(Kodaira::IIStar, 1, v_disc - 8))
                } else {
                    Err(Error::NotMinimal(ell))
                }
            }
        }
    }
}

fn exact(x: &BigInt, d: &BigInt) -> BigInt {
    let (q, r) = x.div_rem(d);
    debug_assert!(r.is_zero(), "{x} not divisible by {d}");
    q
}

fn poly_mul_mod_cubic(a: &[u64; 3], b: &[u64; 3], f: &[u64; 4], m: u64) -> [u64; 3] {
    let mut prod = [0u64; 5];
    for i in 0..3 {
        for j in 0..3 {
            prod[i + j] = (prod[i + j] + mul_mod(a[i], b[j], m)) % m;
        }
    }
    // reduce by monic f: X^3 = -(f2 X^2 + f1 X + f0)
    for k in (3..5).rev() {
        let c = prod[k];
        if c == 0 {
            continue;
        }
        prod[k] = 0;
        for i in 0..3 {
            let sub = mul_mod(c, f[i], m);
            prod[k - 3 + i] = (prod[k - 3 + i] + m - sub) % m;
        }
    }
    [prod[0], prod[1], prod[2]]
}

fn poly_pow_x_mod_cubic(mut e: u64, f: &[u64; 4], m: u64) -> [u64; 3] {
    let mut base = [0, 1 % m, 0];
    let mut acc = [1 % m, 0, 0];
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mul_mod_cubic(&acc, &base, f, m);
        }
        base = poly_mul_mod_cubic(&base, &base, f, m);
        e >>= 1;
    }
    acc
}

fn trim(p: &mut Vec<u64>) {
    while p.last() == Some(&0) {
        p.pop();
    }
}

/// Degree of `gcd(g, f)` over F_m.
fn poly_gcd_degree(g: &mut [u64; 3], f: &[u64; 4], m: u64) -> usize {
    let mut a: Vec<u64> = f.to_vec();
    let mut b: Vec<u64> = g.to_vec();
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        // a mod b
        let lead_inv = inv_mod(*b.last().unwrap(), m).unwrap();
        while a.len() >= b.len() && !a.is_empty() {
            let shift = a.len() - b.len();
            let c = mul_mod(*a.last().unwrap(), lead_inv, m);
            for (i, &bi) in b.iter().enumerate() {
                a[shift + i] = (a[shift + i] + m - mul_mod(c, bi, m)) % m;
            }
            trim(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}
