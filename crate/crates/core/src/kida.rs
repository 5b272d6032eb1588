//! Hypothesis checks and the lambda-transfer formula along cyclic degree-`p`
//! extensions, with its local terms at split multiplicative primes and at
//! good primes acquiring a point of order `p`.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::arith::{inv_mod, is_prime, mul_mod};
use crate::classify::{cyclotomic_split_count, Classifier, QClass};
use crate::curve::{is_squarefree, WeierstrassModel};
use crate::error::{Error, Result};
use crate::euler::{euler_char_factors, mu_lambda_vanish, quadratic_subfield_disc, ShaOrder, Vanishing};
use crate::fields::CyclicExtension;
use crate::points::count_points_naive;
use crate::tate::{reduction_type, ReductionType};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GoodTwist {
    pub d: i64,
    pub model: WeierstrassModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AdditiveStability {
    /// Asserted by the caller.
    Satisfied,
    SatisfiedByPGe5,
    /// `L` is unramified at every prime of additive reduction.
    SatisfiedByUnramified,
    Unresolved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "source", content = "value")]
pub enum BaseStatus {
    Computed(bool),
    External(bool),
    Unresolved,
}

impl BaseStatus {
    pub fn known_zero(self) -> bool {
        matches!(self, BaseStatus::Computed(true) | BaseStatus::External(true))
    }
}

/// Data about the base curve that is not computed here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseInputs {
    /// Overrides the computed answer when present.
    pub mu_lambda_zero_at_base: Option<bool>,
    pub sha: ShaOrder,
    pub analytic_rank_zero: Option<bool>,
    pub acknowledge_additive_stability: bool,
}

impl Default for BaseInputs {
    fn default() -> Self {
        BaseInputs {
            mu_lambda_zero_at_base: None,
            sha: ShaOrder::Unknown,
            analytic_rank_zero: None,
            acknowledge_additive_stability: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HypothesisReport {
    pub p: u64,
    pub reduction_at_p: ReductionType,
    pub additive_at_p: bool,
    pub potentially_good_at_p: bool,
    /// Good reduction at `p` with `a_p = 0 mod p`.
    pub supersingular_at_p: bool,
    pub good_twist: Option<GoodTwist>,
    /// Whether good (or multiplicative) reduction is reached over an
    /// extension of degree prime to `p`; `None` when undecided.
    pub prime_to_p_defect: Option<bool>,
    pub additive_primes: Vec<u64>,
    pub additive_stability: AdditiveStability,
    pub base_mu_lambda_zero: BaseStatus,
    pub notes: Vec<String>,
}

impl HypothesisReport {
    /// The first unmet or undecided hypothesis, if any.
    pub fn blocking_reason(&self) -> Option<String> {
        if self.supersingular_at_p {
            return Some(format!("supersingular reduction at {}", self.p));
        }
        match self.prime_to_p_defect {
            Some(false) => return Some(format!("potentially multiplicative reduction at {}", self.p)),
            None => return Some(format!("no quadratic twist reaches good reduction at {}", self.p)),
            Some(true) => {}
        }
        if self.additive_stability == AdditiveStability::Unresolved {
            return Some("additive primes may acquire better reduction in L".into());
        }
        if !self.base_mu_lambda_zero.known_zero() {
            return Some("mu = lambda = 0 over Q_cyc is not established".into());
        }
        None
    }
}

/// How `lambda_transfer` treats the hypotheses.
#[derive(Debug, Clone, Copy)]
pub enum Gate<'a> {
    Checked(&'a HypothesisReport),
    /// The caller takes responsibility for the hypotheses.
    Acknowledged,
}

/// Per-prime contribution to the transfer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub ell: u64,
    pub reduction: ReductionType,
    pub e: u64,
    pub w_count: u64,
    pub in_p1: bool,
    pub in_p2: bool,
    pub p1_contribution: u64,
    pub p2_contribution: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KidaResult {
    pub lambda_base: u64,
    pub lambda_l: u64,
    pub degree: u64,
    pub p1_term: u64,
    pub p2_term: u64,
    pub witnesses: Vec<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankBound {
    pub bound: u64,
    pub rank_is_zero: bool,
    pub statement: String,
}

fn check_p(p: u64) -> Result<()> {
    if p < 3 || !is_prime(p) {
        return Err(Error::InvalidModulus(p));
    }
    Ok(())
}

/// Twist parameters in search order: the quadratic subfield of `Q(mu_p)`,
/// then squarefree `d` by increasing `|d| <= 163`, negative first.
pub fn twist_candidates(p: u64) -> Vec<i64> {
    let first = quadratic_subfield_disc(p);
    let mut out = vec![first];
    for n in 2..=163i64 {
        for d in [-n, n] {
            if d != first && is_squarefree(d) {
                out.push(d);
            }
        }
    }
    out.push(-1);
    out
}

fn find_good_twist(minimal: &WeierstrassModel, p: u64) -> Result<Option<GoodTwist>> {
    for d in twist_candidates(p) {
        let (twisted, _) = minimal.quadratic_twist(d)?.minimal_model();
        if reduction_type(&twisted, p)?.reduction == ReductionType::Good {
            return Ok(Some(GoodTwist { d, model: twisted }));
        }
    }
    Ok(None)
}

fn additive_primes(minimal: &WeierstrassModel) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for (ell, _) in crate::arith::factor_bigint(&minimal.discriminant())? {
        if reduction_type(minimal, ell)?.reduction == ReductionType::Additive {
            out.push(ell);
        }
    }
    Ok(out)
}

pub fn check_hypotheses(
    model: &WeierstrassModel,
    p: u64,
    ext: &CyclicExtension,
    base: &BaseInputs,
) -> Result<HypothesisReport> {
    check_p(p)?;
    if ext.p != p {
        return Err(Error::InvalidInput(format!("extension has degree {} but p = {p}", ext.p)));
    }
    let (minimal, _) = model.minimal_model();
    let reduction_at_p = reduction_type(&minimal, p)?.reduction;
    let additive_at_p = reduction_at_p == ReductionType::Additive;
    let potentially_good_at_p = minimal.potentially_good_at(p);
    let mut notes = Vec::new();

    let mut supersingular_at_p = false;
    let (good_twist, prime_to_p_defect) = match reduction_at_p {
        ReductionType::Good => {
            let a_p = p as i64 + 1 - count_points_naive(&minimal, p)? as i64;
            supersingular_at_p = a_p.rem_euclid(p as i64) == 0;
            notes.push(format!("good reduction at {p}: no twist is needed and the formula applies directly"));
            (None, Some(true))
        }
        ReductionType::SplitMultiplicative | ReductionType::NonsplitMultiplicative => {
            notes.push(format!("multiplicative reduction at {p}"));
            (None, Some(true))
        }
        ReductionType::Additive if !potentially_good_at_p => (None, Some(false)),
        ReductionType::Additive => match find_good_twist(&minimal, p)? {
            Some(t) => (Some(t), Some(true)),
            None => {
                notes.push(format!("potentially good at {p}, but only after a non-quadratic extension"));
                (None, None)
            }
        },
    };

    let additive_primes = additive_primes(&minimal)?;
    let additive_stability = if base.acknowledge_additive_stability {
        AdditiveStability::Satisfied
    } else if additive_primes.iter().all(|&l| !ext.is_ramified_at(l)) {
        AdditiveStability::SatisfiedByUnramified
    } else if p >= 5 {
        AdditiveStability::SatisfiedByPGe5
    } else {
        AdditiveStability::Unresolved
    };

    let base_mu_lambda_zero = match base.mu_lambda_zero_at_base {
        Some(b) => BaseStatus::External(b),
        None => match euler_char_factors(&minimal, p, base.sha.clone(), base.analytic_rank_zero) {
            Ok(ef) => match mu_lambda_vanish(&ef) {
                Vanishing::Zero => BaseStatus::Computed(true),
                Vanishing::Nonzero => BaseStatus::Computed(false),
                Vanishing::Unresolved => BaseStatus::Unresolved,
            },
            Err(e) => {
                notes.push(format!("base invariants not computed: {e}"));
                BaseStatus::Unresolved
            }
        },
    };

    Ok(HypothesisReport {
        p,
        reduction_at_p,
        additive_at_p,
        potentially_good_at_p,
        supersingular_at_p,
        good_twist,
        prime_to_p_defect,
        additive_primes,
        additive_stability,
        base_mu_lambda_zero,
        notes,
    })
}

/// Characters of the given fields as vectors over `F_p`, on the coordinates
/// `tame primes (sorted) ++ [wild]`, with the character of the first
/// cyclotomic layer appended.
fn character_matrix(fields: &[&CyclicExtension], coords: &[u64]) -> Vec<Vec<u64>> {
    let mut rows = Vec::new();
    for f in fields {
        let mut row = vec![0u64; coords.len() + 1];
        for (q, e) in f.tame_ramified.iter().zip(&f.exponents) {
            row[coords.binary_search(q).expect("coordinate")] = *e;
        }
        if f.wild_at_p {
            row[coords.len()] = *f.exponents.last().expect("wild exponent");
        }
        rows.push(row);
    }
    let mut cyc = vec![0u64; coords.len() + 1];
    cyc[coords.len()] = 1;
    rows.push(cyc);
    rows
}

fn rank_mod_p(mut rows: Vec<Vec<u64>>, p: u64) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][c] % p != 0) else { continue };
        rows.swap(rank, pivot);
        let inv = inv_mod(rows[rank][c], p).expect("nonzero pivot");
        let pivot_row: Vec<u64> = rows[rank].iter().map(|&x| mul_mod(x, inv, p)).collect();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[c] % p != 0 {
                let factor = row[c];
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x = (*x + p - mul_mod(factor, *y, p)) % p;
                }
            }
        }
        rows[rank] = pivot_row;
        rank += 1;
    }
    rank
}

/// `log_p [F_cyc : Q_cyc]` for the compositum `F` of the given fields.
fn cyc_rank(p: u64, fields: &[&CyclicExtension], coords: &[u64]) -> u32 {
    (rank_mod_p(character_matrix(fields, coords), p) - 1) as u32
}

/// Transfer of `lambda` from the compositum of `base` to the compositum of
/// `base` and `top`.
///
/// With `r = log_p [F_cyc : Q_cyc]` for the top field `F`, a tame prime `ell`
/// ramified in `F` has inertia of order `p` and `p^{m(ell) + r - 1}` primes
/// above it in `F_cyc`; those not already ramified in the base contribute.
pub fn lambda_transfer_relative(
    lambda_base: u64,
    p: u64,
    base: &[CyclicExtension],
    top: &[CyclicExtension],
    model: &WeierstrassModel,
    gate: Gate<'_>,
) -> Result<KidaResult> {
    check_p(p)?;
    if let Gate::Checked(report) = gate {
        if let Some(reason) = report.blocking_reason() {
            return Err(Error::Blocked(reason));
        }
    }
    if base.iter().chain(top).any(|f| f.p != p) {
        return Err(Error::InvalidInput("all fields must have degree p".into()));
    }
    let all: Vec<&CyclicExtension> = base.iter().chain(top).collect();
    let base_refs: Vec<&CyclicExtension> = base.iter().collect();
    let coords: Vec<u64> =
        all.iter().flat_map(|f| f.tame_ramified.iter().copied()).collect::<BTreeSet<_>>().into_iter().collect();
    let r_top = cyc_rank(p, &all, &coords);
    let r_base = cyc_rank(p, &base_refs, &coords);
    let degree = p.pow(r_top - r_base);

    let classifier = Classifier::new(model, p)?;
    let minimal = classifier.minimal_model().clone();
    let base_ramified: BTreeSet<u64> = base.iter().flat_map(|f| f.tame_ramified.iter().copied()).collect();
    let mut witnesses = Vec::new();
    let (mut p1_term, mut p2_term) = (0u64, 0u64);
    for &ell in coords.iter().filter(|l| !base_ramified.contains(l)) {
        let m = cyclotomic_split_count(ell, p)?.m;
        let w_count = p
            .checked_pow(m + r_top - 1)
            .ok_or_else(|| Error::Budget(format!("prime count above {ell} overflows")))?;
        let reduction = reduction_type(&minimal, ell)?.reduction;
        // Residue degrees in the tower are powers of the odd prime p, which
        // preserve the square class of -c6 and hence splitness.
        let in_p1 = reduction == ReductionType::SplitMultiplicative;
        let in_p2 = reduction == ReductionType::Good && classifier.p2_membership(ell, 1)?;
        let local = w_count * (p - 1);
        let p1 = if in_p1 { local } else { 0 };
        let p2 = if in_p2 { 2 * local } else { 0 };
        p1_term += p1;
        p2_term += p2;
        witnesses.push(Witness {
            ell,
            reduction,
            e: p,
            w_count,
            in_p1,
            in_p2,
            p1_contribution: p1,
            p2_contribution: p2,
        });
    }
    let lambda_l = degree
        .checked_mul(lambda_base)
        .and_then(|x| x.checked_add(p1_term + p2_term))
        .ok_or_else(|| Error::Budget("lambda overflows".into()))?;
    Ok(KidaResult { lambda_base, lambda_l, degree, p1_term, p2_term, witnesses })
}

/// `lambda_L = [L_cyc : Q_cyc] lambda_Q + sum_{P1} (e - 1) + 2 sum_{P2} (e - 1)`.
pub fn lambda_transfer(
    lambda_k: u64,
    p: u64,
    ext: &CyclicExtension,
    model: &WeierstrassModel,
    gate: Gate<'_>,
) -> Result<KidaResult> {
    lambda_transfer_relative(lambda_k, p, &[], std::slice::from_ref(ext), model, gate)
}

/// `rank E(L) <= lambda_L` once `mu` vanishes at the base.
pub fn rank_bound(kr: &KidaResult) -> RankBound {
    let rank_is_zero = kr.lambda_l == 0;
    let statement = if rank_is_zero {
        "rank E(L) = 0".to_string()
    } else {
        format!("rank E(L) <= {}", kr.lambda_l)
    };
    RankBound { bound: kr.lambda_l, rank_is_zero, statement }
}

/// Whether every prime ramified in `ext` is good with `p` prime to the
/// number of points; `p` itself never qualifies.
pub fn stable_extension_test(model: &WeierstrassModel, p: u64, ext: &CyclicExtension) -> Result<bool> {
    if ext.wild_at_p {
        return Ok(false);
    }
    let classifier = Classifier::new(model, p)?;
    for &ell in &ext.tame_ramified {
        if classifier.classify(ell)?.class != QClass::Q3 {
            return Ok(false);
        }
    }
    Ok(true)
}
