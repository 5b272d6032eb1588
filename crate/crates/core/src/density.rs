//! Density of the Chebotarev set of primes, exact counting tables and the
//! asymptotic diagnostics built on them.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::arith::{is_prime, sieve_primes};
use crate::classify::Classifier;
use crate::error::{Error, Result};
use crate::fields::{enumerate_by_discriminant, enumerate_extensions, g_weights, m_of_x, CyclicExtension};

/// Largest `p` accepted by [`alpha_brute_force`].
pub const BRUTE_FORCE_MAX_P: u64 = 31;
/// Largest grid point accepted by [`asymptotic_report`].
pub const GRID_BUDGET: u64 = 10_000_000;

fn check_p(p: u64) -> Result<()> {
    if p < 3 || !is_prime(p) {
        return Err(Error::InvalidModulus(p));
    }
    Ok(())
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Matrices in `SL_2(F_p)` with trace `t`, by running over the entries with
/// that trace and filtering on the determinant.
pub fn sl2_trace_count(p: u64, t: u64) -> Result<u64> {
    check_p(p)?;
    let t = t % p;
    let mut count = 0;
    for a in 0..p {
        let d = (t + p - a) % p;
        let ad = a * d % p;
        for b in 0..p {
            for c in 0..p {
                if (ad + p * p - b * c % p) % p == 1 {
                    count += 1;
                }
            }
        }
    }
    Ok(count)
}

/// `(p^2 - p - 1) / (p^3 - p^2 - p + 1)`.
pub fn alpha_closed_form(p: u64) -> Result<BigRational> {
    check_p(p)?;
    let p = p as i64;
    Ok(ratio(p * p - p - 1, p * p * p - p * p - p + 1))
}

/// `#{A in SL_2(F_p) : tr A != 2} / #GL_2(F_p)`, every count taken by
/// enumerating all of `M_2(F_p)`.
pub fn alpha_brute_force(p: u64) -> Result<BigRational> {
    check_p(p)?;
    if p > BRUTE_FORCE_MAX_P {
        return Err(Error::Budget(format!("p = {p} exceeds the enumeration limit {BRUTE_FORCE_MAX_P}")));
    }
    let (mut gl, mut wanted) = (0i64, 0i64);
    for a in 0..p {
        for b in 0..p {
            for c in 0..p {
                for d in 0..p {
                    let det = (a * d + p * p - b * c) % p;
                    if det != 0 {
                        gl += 1;
                    }
                    if det == 1 && (a + d) % p != 2 % p {
                        wanted += 1;
                    }
                }
            }
        }
    }
    Ok(ratio(wanted, gl))
}

/// Pole location `a = 1` and order `b = (p - 1) alpha` of the Dirichlet
/// series of the weights defining `g`.
pub fn delange_exponents(p: u64, alpha: &BigRational) -> (BigRational, BigRational) {
    (ratio(1, 1), alpha * BigInt::from(p - 1))
}

/// `(p - 1) alpha - 1`, which equals `-p / (p^2 - 1)`.
pub fn predicted_exponent(p: u64) -> Result<BigRational> {
    let alpha = alpha_closed_form(p)?;
    let (_, b) = delange_exponents(p, &alpha);
    Ok(b - ratio(1, 1))
}

/// `(p^2 - p + 2) / (p^3 - p^2 - p + 1)`, the alternative closed form for
/// the negated exponent, which disagrees with `(p - 1) alpha - 1`.
pub fn alternative_beta(p: u64) -> Result<BigRational> {
    check_p(p)?;
    let p = p as i64;
    Ok(ratio(p * p - p + 2, p * p * p - p * p - p + 1))
}

/// Chebotarev-set primes `<= x` computed from traces alone: good,
/// `ell = 1 mod p` and `a_ell != 2 mod p`.
pub fn script_q_by_traces(classifier: &Classifier, x: u64) -> Result<Vec<u64>> {
    use rayon::prelude::*;
    if x < 2 {
        return Ok(Vec::new());
    }
    let p = classifier.p();
    let candidates: Vec<u64> =
        sieve_primes(x)?.iter().filter(|&l| l % p == 1 && classifier.is_good(l)).collect();
    let flags: Vec<bool> = candidates
        .par_iter()
        .map(|&l| classifier.trace(l).map(|a| (a - 2).rem_euclid(p as i64) != 0))
        .collect::<Result<_>>()?;
    Ok(candidates.into_iter().zip(flags).filter(|&(_, keep)| keep).map(|(l, _)| l).collect())
}

/// Fraction of primes `<= x` that lie in the Chebotarev set.
pub fn empirical_density(classifier: &Classifier, x: u64) -> Result<BigRational> {
    if x < 2 {
        return Ok(ratio(0, 1));
    }
    let total = sieve_primes(x)?.len() as i64;
    let hits = classifier.script_q_primes(x)?.len() as i64;
    Ok(ratio(hits, total))
}

/// Least-squares slope of `log g(X) - log X` against `log log X`.
pub fn fit_exponent(table: &[(u64, u64)]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = table
        .iter()
        .filter(|&&(x, g)| x > 2 && g > 0)
        .map(|&(x, g)| {
            let lx = (x as f64).ln();
            (lx.ln(), (g as f64).ln() - lx)
        })
        .collect();
    if pts.len() < 4 {
        return Err(Error::FitUnavailable(format!("{} usable grid points, need at least 4", pts.len())));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::FitUnavailable("grid points share one abscissa".into()));
    }
    Ok(sxy / sxx)
}

/// Fields ramified exactly at squarefree products of the given primes up
/// to `x`, i.e. the objects weighted in `g(x)`.
pub fn g_fields(p: u64, primes: &[u64], x: u64) -> Result<Vec<CyclicExtension>> {
    let mut out = Vec::new();
    for (n, _) in g_weights(p, primes, x) {
        let ram: Vec<u64> = crate::arith::factor_u64(n).into_iter().map(|(q, _)| q).collect();
        out.extend(enumerate_extensions(p, &ram)?);
    }
    Ok(out)
}

/// Whether every field weighted in `g(x)` also appears among the fields of
/// discriminant at most `x^{p-1}`.
pub fn g_fields_within_m(p: u64, primes: &[u64], x: u64) -> Result<bool> {
    let bound = BigInt::from(x).pow((p - 1) as u32);
    let all: std::collections::BTreeSet<CyclicExtension> = enumerate_by_discriminant(p, &bound)?.into_iter().collect();
    Ok(g_fields(p, primes, x)?.iter().all(|f| all.contains(f)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    pub p: u64,
    pub alpha: String,
    pub alpha_brute: Option<String>,
    pub delange_pair: (String, String),
    pub predicted_exponent: String,
    pub predicted_exponent_value: f64,
    /// The alternative closed form, kept for comparison.
    pub alternative_beta: String,
    pub exponent_note: String,
    pub density_bound: u64,
    pub empirical_density: String,
    pub empirical_density_value: f64,
    pub g_table: Vec<(u64, u64)>,
    pub m_table: Vec<(u64, u64)>,
    /// `(X^{p-1}, g(X))`: at least `g(X)` fields of discriminant at most
    /// `X^{p-1}` keep `lambda = 0`.
    pub n_e_lower_bound: Vec<(String, u64)>,
    pub fitted_exponent: f64,
}

fn as_f64(r: &BigRational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

pub fn asymptotic_report(classifier: &Classifier, grid: &[u64]) -> Result<DensityReport> {
    let p = classifier.p();
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] == 0 {
        return Err(Error::InvalidInput("grid must be positive and strictly increasing".into()));
    }
    let max = *grid.last().expect("nonempty");
    if max > GRID_BUDGET {
        return Err(Error::Budget(format!("grid maximum {max} exceeds {GRID_BUDGET}")));
    }
    if grid.len() < 4 {
        return Err(Error::FitUnavailable(format!("{} grid points, need at least 4", grid.len())));
    }
    let alpha = alpha_closed_form(p)?;
    let alpha_brute = if p <= BRUTE_FORCE_MAX_P { Some(alpha_brute_force(p)?) } else { None };
    if let Some(b) = &alpha_brute {
        if *b != alpha {
            return Err(Error::InvalidInput(format!("closed form {alpha} disagrees with enumeration {b}")));
        }
    }
    let (a, b) = delange_exponents(p, &alpha);
    let predicted = predicted_exponent(p)?;
    let beta = alternative_beta(p)?;

    let q = classifier.script_q_primes(max)?;
    let total = sieve_primes(max)?.len() as i64;
    let density = ratio(q.len() as i64, total);
    let weights = g_weights(p, &q, max);
    let mut g_table = Vec::with_capacity(grid.len());
    let mut acc = 0u64;
    let mut it = weights.iter().peekable();
    for &x in grid {
        while let Some(&&(n, w)) = it.peek() {
            if n > x {
                break;
            }
            acc += w;
            it.next();
        }
        g_table.push((x, acc));
    }
    let m_table = grid
        .iter()
        .map(|&x| Ok((x, m_of_x(p, &BigInt::from(x))?)))
        .collect::<Result<Vec<_>>>()?;
    let n_e_lower_bound =
        g_table.iter().map(|&(x, g)| (BigInt::from(x).pow((p - 1) as u32).to_string(), g)).collect();
    let fitted_exponent = fit_exponent(&g_table)?;

    Ok(DensityReport {
        p,
        alpha: alpha.to_string(),
        alpha_brute: alpha_brute.map(|b| b.to_string()),
        delange_pair: (a.to_string(), b.to_string()),
        predicted_exponent: predicted.to_string(),
        predicted_exponent_value: as_f64(&predicted),
        alternative_beta: beta.to_string(),
        exponent_note: format!(
            "exponent uses (p-1)*alpha - 1 = {predicted}; the alternative closed form gives -{beta}, which differs"
        ),
        density_bound: max,
        empirical_density: density.to_string(),
        empirical_density_value: as_f64(&density),
        g_table,
        m_table,
        n_e_lower_bound,
        fitted_exponent,
    })
}
