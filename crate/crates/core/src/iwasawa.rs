//! Splitting of primes of `K` in `K_inf`, the invariant `s_inf(R)`, and the
//! lambda-invariant and Selmer-corank reports derived from it.
//!
//! For a prime `w != p` of `K`, let `w^h = (w)` with `iota_p(w) = 1 mod 4`.
//! Then `w` splits into `2^(ord_2(iota_p(w) - 1) - 2)` primes of `K_inf`.
//! Given `s = s_inf(R)` (the total over the primes dividing `sqrt(-q) R`):
//!
//! * `lambda(F_inf) = s - 1` always;
//! * `lambda(F'_inf) = s` and `lambda(J_inf) = 2s - 1` when `q = 7 mod 16`.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::dyadic;
use crate::qfield::{PrimeIdeal, PrimeKind, QuadElem, QuadField};
use crate::twistlab;
use crate::{Config, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplittingEntry {
    pub prime: PrimeIdeal,
    /// Generator of `prime^h` with `iota_p = 1 mod 4`.
    pub generator: QuadElem,
    /// `ord_2(iota_p(generator) - 1)`, at least 2.
    pub ord: u32,
    /// Number of primes of `K_inf` above `prime`: `2^(ord - 2)`.
    #[serde(with = "crate::serde_num::nat")]
    pub count: BigUint,
    /// 2-adic precision (bits) at which `ord` was certified.
    pub precision: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LambdaReport {
    pub q: u64,
    pub r: QuadElem,
    #[serde(with = "crate::serde_num::nat")]
    pub s_inf: BigUint,
    pub entries: Vec<SplittingEntry>,
    #[serde(with = "crate::serde_num::nat")]
    pub lambda_f: BigUint,
    /// Only determined for `q = 7 mod 16`.
    #[serde(with = "crate::serde_num::opt_nat")]
    pub lambda_fprime: Option<BigUint>,
    #[serde(with = "crate::serde_num::opt_nat")]
    pub lambda_j: Option<BigUint>,
    pub q_mod_16: u8,
}

impl LambdaReport {
    pub fn max_precision(&self) -> u32 {
        self.entries.iter().map(|e| e.precision).max().unwrap_or(0)
    }
}

/// Selmer coranks over `F_inf` and `J_inf`. The split into Mordell-Weil rank
/// `g` and Tate-Shafarevich corank `e` is not determined; only the sum is.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SelmerReport {
    #[serde(with = "crate::serde_num::nat")]
    pub corank_f_inf: BigUint,
    #[serde(with = "crate::serde_num::opt_nat")]
    pub corank_j_inf: Option<BigUint>,
    pub identity_f: String,
    pub identity_j: Option<String>,
}

/// Splitting count in `K_inf` of a prime `w != p`.
pub fn primes_above_in_kinf(
    field: &QuadField,
    prime: &PrimeIdeal,
    cfg: &Config,
) -> Result<SplittingEntry> {
    let h = field.class_number() as u32;
    let generator = field.generator_of_power(prime, h, cfg)?;
    let (ord, precision) =
        dyadic::with_adaptive_precision(cfg, |k| dyadic::embed(&generator, k)?.sub_int(1).ord2())?;
    debug_assert!(ord >= 2);
    Ok(SplittingEntry {
        prime: prime.clone(),
        generator,
        ord,
        count: BigUint::one() << (ord - 2),
        precision,
    })
}

/// `s_inf(R)` and one entry per prime of `K` dividing `sqrt(-q) R`.
/// `R` must satisfy the twisting hypothesis.
pub fn s_infinity(
    field: &QuadField,
    r: &QuadElem,
    cfg: &Config,
) -> Result<(BigUint, Vec<SplittingEntry>)> {
    let record = twistlab::validate_twist(field, r, cfg)?;
    if !record.valid {
        return Err(Error::InvalidTwist(record.violations));
    }
    let x = &field.sqrt_minus_q() * r;
    let allowed = [PrimeKind::Split, PrimeKind::Inert, PrimeKind::Ramified];
    let factors = field.factor_ideal(&x, &allowed, cfg)?;
    let entries = factors
        .primes()
        .map(|prime| primes_above_in_kinf(field, prime, cfg))
        .collect::<Result<Vec<_>>>()?;
    let total = entries
        .iter()
        .fold(BigUint::zero(), |acc, e| acc + &e.count);
    Ok((total, entries))
}

pub fn lambda_invariants(field: &QuadField, r: &QuadElem, cfg: &Config) -> Result<LambdaReport> {
    let (s_inf, entries) = s_infinity(field, r, cfg)?;
    Ok(lambda_report_from(field, r, s_inf, entries))
}

fn lambda_report_from(
    field: &QuadField,
    r: &QuadElem,
    s_inf: BigUint,
    entries: Vec<SplittingEntry>,
) -> LambdaReport {
    let q_mod_16 = (field.q() % 16) as u8;
    let one = BigUint::one();
    let (lambda_fprime, lambda_j) = if q_mod_16 == 7 {
        (Some(s_inf.clone()), Some(&s_inf * 2u32 - &one))
    } else {
        (None, None)
    };
    LambdaReport {
        q: field.q(),
        r: r.clone(),
        lambda_f: &s_inf - &one,
        s_inf,
        entries,
        lambda_fprime,
        lambda_j,
        q_mod_16,
    }
}

/// Rank additivity over the three quadratic subextensions of `J/K`:
/// `lambda(J) + 2 lambda(K) = lambda(F) + lambda(F') + lambda(D)`, with
/// `lambda(K) = lambda(D) = 0` when `q = 7 mod 16`.
pub fn rank_identity_check(report: &LambdaReport) -> Result<bool> {
    if report.q_mod_16 != 7 {
        return Err(Error::InapplicableCongruence(report.q));
    }
    let (Some(fp), Some(j)) = (&report.lambda_fprime, &report.lambda_j) else {
        return Err(Error::InapplicableCongruence(report.q));
    };
    let lambda_k = BigUint::zero();
    let lambda_d = BigUint::zero();
    Ok(j + &lambda_k * 2u32 == &report.lambda_f + fp + lambda_d)
}

impl SelmerReport {
    pub fn from_lambda(report: &LambdaReport) -> Self {
        let identity =
            |field: &str, v: &BigUint| format!("g_{{{field}_inf}}(R) + e_{{{field}_inf}}(R) = {v}");
        SelmerReport {
            corank_f_inf: report.lambda_f.clone(),
            corank_j_inf: report.lambda_j.clone(),
            identity_f: identity("F", &report.lambda_f),
            identity_j: report.lambda_j.as_ref().map(|v| identity("J", v)),
        }
    }
}

pub fn selmer_report(field: &QuadField, r: &QuadElem, cfg: &Config) -> Result<SelmerReport> {
    Ok(SelmerReport::from_lambda(&lambda_invariants(
        field, r, cfg,
    )?))
}
