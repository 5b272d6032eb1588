//! Classification of rational primes for a curve and an odd prime `p`.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, pow_mod, reduce, sieve_primes};
use crate::cache::TraceCache;
use crate::curve::WeierstrassModel;
use crate::error::{Error, Result};
use crate::points::{order_over_extension, FrobeniusData, PointCounter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QClass {
    /// Bad reduction.
    Q1,
    /// Good reduction with `p | #E(F_ell)`.
    Q2,
    /// Good reduction with `p` prime to `#E(F_ell)`.
    Q3,
}

impl fmt::Display for QClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QClass::Q1 => "Q1",
            QClass::Q2 => "Q2",
            QClass::Q3 => "Q3",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeClass {
    pub ell: u64,
    pub class: QClass,
    /// In `Q3` and `ell = 1 mod p`.
    pub in_script_q: bool,
    pub a_ell: Option<i64>,
}

/// Primes of the cyclotomic Z_p-extension of Q above `ell` number `p^m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclotomicSplitting {
    pub ell: u64,
    pub m: u32,
}

fn check_p(p: u64) -> Result<()> {
    if p < 3 || !is_prime(p) {
        return Err(Error::InvalidModulus(p));
    }
    Ok(())
}

/// Holds a minimal model so repeated classification does not minimalize again.
#[derive(Debug, Clone)]
pub struct Classifier {
    model: WeierstrassModel,
    disc: BigInt,
    p: u64,
    counter: PointCounter,
    cache: Option<Arc<TraceCache>>,
}

impl Classifier {
    pub fn new(model: &WeierstrassModel, p: u64) -> Result<Self> {
        check_p(p)?;
        let (model, _) = model.minimal_model();
        let disc = model.discriminant();
        Ok(Classifier { model, disc, p, counter: PointCounter::default(), cache: None })
    }

    pub fn with_cache(mut self, cache: Arc<TraceCache>) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn with_counter(mut self, counter: PointCounter) -> Self {
        self.counter = counter;
        self
    }

    pub fn minimal_model(&self) -> &WeierstrassModel {
        &self.model
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn is_good(&self, ell: u64) -> bool {
        reduce(&self.disc, ell) != 0
    }

    fn compute_trace(&self, ell: u64) -> Result<i64> {
        if let Some(a) = self.cache.as_ref().and_then(|c| c.get(ell)) {
            return Ok(a);
        }
        self.counter.trace(&self.model, ell)
    }

    /// `a_ell` at a good prime.
    pub fn trace(&self, ell: u64) -> Result<i64> {
        if !self.is_good(ell) {
            return Err(Error::BadReduction(ell));
        }
        self.compute_trace(ell)
    }

    pub fn classify(&self, ell: u64) -> Result<PrimeClass> {
        if ell == self.p {
            return Err(Error::ExcludedPrime(ell));
        }
        if !is_prime(ell) {
            return Err(Error::InvalidInput(format!("{ell} is not prime")));
        }
        if !self.is_good(ell) {
            return Ok(PrimeClass { ell, class: QClass::Q1, in_script_q: false, a_ell: None });
        }
        let a = self.compute_trace(ell)?;
        let count = ell as i128 + 1 - a as i128;
        let class = if count % self.p as i128 == 0 { QClass::Q2 } else { QClass::Q3 };
        let in_script_q = class == QClass::Q3 && ell % self.p == 1;
        Ok(PrimeClass { ell, class, in_script_q, a_ell: Some(a) })
    }

    /// Whether some prime of `L_cyc` above an `L`-prime of residue degree
    /// `f` over `ell` has a point of order `p`; decided as `p | #E(F_{ell^f})`.
    pub fn p2_membership(&self, ell: u64, f: u32) -> Result<bool> {
        if !self.is_good(ell) {
            return Err(Error::Precondition(format!("bad reduction at {ell}")));
        }
        let fd = FrobeniusData::from_trace(ell, self.compute_trace(ell)?, 0)?;
        let n = order_over_extension(&fd, f)?;
        Ok((n % BigInt::from(self.p)) == BigInt::from(0))
    }

    /// Classifies every prime `<= bound` other than `p`, in increasing order.
    pub fn bulk_classify(&self, bound: u64) -> Result<Vec<PrimeClass>> {
        if bound < 2 {
            return Ok(Vec::new());
        }
        let primes: Vec<u64> = sieve_primes(bound)?.iter().filter(|&l| l != self.p).collect();
        self.classify_many(&primes)
    }

    /// Classifies the given primes in parallel, preserving input order.
    pub fn classify_many(&self, primes: &[u64]) -> Result<Vec<PrimeClass>> {
        let out: Vec<PrimeClass> = primes.par_iter().map(|&l| self.classify(l)).collect::<Result<_>>()?;
        if let Some(cache) = &self.cache {
            let fresh: Vec<(u64, i64)> = out.iter().filter_map(|c| c.a_ell.map(|a| (c.ell, a))).collect();
            cache.extend(&fresh)?;
        }
        Ok(out)
    }

    /// The primes `<= bound` lying in the Chebotarev set: good, `ell = 1 mod p`
    /// and `p` prime to `#E(F_ell)`.
    pub fn script_q_primes(&self, bound: u64) -> Result<Vec<u64>> {
        if bound < 2 {
            return Ok(Vec::new());
        }
        let candidates: Vec<u64> = sieve_primes(bound)?.iter().filter(|&l| l % self.p == 1).collect();
        Ok(self.classify_many(&candidates)?.into_iter().filter(|c| c.in_script_q).map(|c| c.ell).collect())
    }
}

pub fn classify_prime(model: &WeierstrassModel, p: u64, ell: u64) -> Result<PrimeClass> {
    Classifier::new(model, p)?.classify(ell)
}

pub fn p2_membership(model: &WeierstrassModel, p: u64, ell: u64, f: u32) -> Result<bool> {
    Classifier::new(model, p)?.p2_membership(ell, f)
}

pub fn bulk_classify(model: &WeierstrassModel, p: u64, bound: u64) -> Result<Vec<PrimeClass>> {
    Classifier::new(model, p)?.bulk_classify(bound)
}

/// `m = v_p(ell^{p-1} - 1) - 1`.
pub fn cyclotomic_split_count(ell: u64, p: u64) -> Result<CyclotomicSplitting> {
    check_p(p)?;
    if ell == p {
        return Err(Error::ExcludedPrime(ell));
    }
    if !is_prime(ell) {
        return Err(Error::InvalidInput(format!("{ell} is not prime")));
    }
    let mut v = 1u32;
    let mut modulus = p as u128 * p as u128;
    while modulus <= u64::MAX as u128 && pow_mod(ell % modulus as u64, p - 1, modulus as u64) == 1 {
        v += 1;
        modulus *= p as u128;
    }
    if modulus > u64::MAX as u128 {
        let big = BigInt::from(ell).pow((p - 1) as u32) - 1;
        v = crate::arith::padic_valuation(&big, p)?;
    }
    Ok(CyclotomicSplitting { ell, m: v - 1 })
}

/// Writes `ell,class,a_ell,in_script_Q` rows; `a_ell` is empty at bad primes.
pub fn write_classification_csv<W: Write>(mut w: W, rows: &[PrimeClass]) -> Result<()> {
    writeln!(w, "ell,class,a_ell,in_script_Q")?;
    for r in rows {
        let a = r.a_ell.map(|a| a.to_string()).unwrap_or_default();
        writeln!(w, "{},{},{},{}", r.ell, r.class, a, r.in_script_q)?;
    }
    Ok(())
}
