//! Twisting-hypothesis validation, twist scans, the rank-one classifier,
//! the ray class order modulo `(p*)^2` and explicit Kummer witnesses.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer as _;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, Integer, Natural};
use crate::dyadic;
use crate::iwasawa::{self, LambdaReport};
use crate::qfield::{self, IdealFactorization, PrimeIdeal, PrimeKind, QuadElem, QuadField};
use crate::{Config, Error, Result};

/// Ways an element can fail the twisting hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Violation {
    /// `R != 1 mod 4 O_K`.
    #[serde(rename = "not_1_mod_4")]
    Not1Mod4,
    /// `R` lies in `(sqrt(-q))`.
    #[serde(rename = "meets_q")]
    MeetsQ,
    /// Some prime divides `R` to an even power.
    #[serde(rename = "even_ord_at_prime")]
    EvenOrdAtPrime,
    /// `R` shares a prime with 2.
    #[serde(rename = "not_coprime_checks")]
    NotCoprimeChecks,
}

impl Violation {
    pub fn as_str(self) -> &'static str {
        match self {
            Violation::Not1Mod4 => "not_1_mod_4",
            Violation::MeetsQ => "meets_q",
            Violation::EvenOrdAtPrime => "even_ord_at_prime",
            Violation::NotCoprimeChecks => "not_coprime_checks",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TwistRecord {
    pub r: QuadElem,
    pub valid: bool,
    pub violations: Vec<Violation>,
    pub factorization: IdealFactorization,
}

/// `R = 1 mod 4 O_K`: `R - 1 = 4 (c + d sqrt(-q))/2` with `c = d mod 2`.
fn is_one_mod_four(r: &QuadElem) -> bool {
    let a2: Integer = r.a() - 2;
    if !a2.is_multiple_of(&Integer::from(4)) || !r.b().is_multiple_of(&Integer::from(4)) {
        return false;
    }
    let c: Integer = a2 / 4;
    let d: Integer = r.b() / 4;
    c.is_odd() == d.is_odd()
}

/// Checks `R = 1 mod 4 O_K`, `((sqrt(-q)), R) = 1`, and odd valuation of `R`
/// at every other prime dividing it. All violations are recorded.
pub fn validate_twist(field: &QuadField, r: &QuadElem, cfg: &Config) -> Result<TwistRecord> {
    if r.is_zero() {
        return Err(Error::InvalidInput("R must be nonzero".into()));
    }
    if r.q() != field.q() {
        return Err(Error::InvalidInput(format!(
            "R is not an element of Q(sqrt(-{}))",
            field.q()
        )));
    }
    let factorization = field.factor_ideal(r, &PrimeKind::ALL, cfg)?;
    let mut violations = Vec::new();
    if !is_one_mod_four(r) {
        violations.push(Violation::Not1Mod4);
    }
    if factorization
        .primes()
        .any(|p| p.kind == PrimeKind::Ramified)
    {
        violations.push(Violation::MeetsQ);
    }
    // the ramified prime is already reported as meets_q
    let even = |f: &&qfield::IdealPower| {
        f.prime.kind != PrimeKind::Ramified && f.exponent.is_multiple_of(2)
    };
    if factorization.factors.iter().any(|f| even(&f)) {
        violations.push(Violation::EvenOrdAtPrime);
    }
    if factorization.primes().any(|p| p.ell == Natural::from(2u32)) {
        violations.push(Violation::NotCoprimeChecks);
    }
    Ok(TwistRecord {
        r: r.clone(),
        valid: violations.is_empty(),
        violations,
        factorization,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseLabel {
    CaseI,
    CaseIi,
    CaseIii,
    None,
}

impl CaseLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseLabel::CaseI => "case_i",
            CaseLabel::CaseIi => "case_ii",
            CaseLabel::CaseIii => "case_iii",
            CaseLabel::None => "none",
        }
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerCorank {
    /// Corank at most 1 over every layer `K_n`, `n >= 1`.
    AtMostOne,
    /// Corank exactly 1 over every layer `K_n`, `n >= 0`.
    ExactlyOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LValueStatus {
    /// `L(B^(R)/K_n, 1) = 0` exactly when the corank over `K_n` is 1.
    VanishesIffCorankOne,
    /// Forced to vanish over every layer by the sign of the functional equation.
    VanishesForAllLayers,
}

/// What the rank-one case implies for the twisted abelian variety `B^(R)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankOneConsequences {
    /// `Sel(B^(R)/F_inf) = Q_2/Z_2` as an abelian group.
    pub selmer_f_inf_corank: u32,
    pub selmer_base_finite: bool,
    pub layer_corank: LayerCorank,
    pub l_value: LValueStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankOneCase {
    pub case: CaseLabel,
    #[serde(with = "crate::serde_num::opt_nat", default)]
    pub r: Option<Natural>,
    pub consequences: Option<RankOneConsequences>,
    /// Why no case applies, when `case` is `none`.
    pub reason: Option<String>,
}

impl RankOneCase {
    fn none(reason: impl Into<String>) -> Self {
        RankOneCase {
            case: CaseLabel::None,
            r: None,
            consequences: None,
            reason: Some(reason.into()),
        }
    }

    fn with_case(case: CaseLabel, r: Option<Natural>) -> Self {
        let consequences = match case {
            CaseLabel::CaseI | CaseLabel::CaseIi => RankOneConsequences {
                selmer_f_inf_corank: 1,
                selmer_base_finite: true,
                layer_corank: LayerCorank::AtMostOne,
                l_value: LValueStatus::VanishesIffCorankOne,
            },
            CaseLabel::CaseIii => RankOneConsequences {
                selmer_f_inf_corank: 1,
                selmer_base_finite: false,
                layer_corank: LayerCorank::ExactlyOne,
                l_value: LValueStatus::VanishesForAllLayers,
            },
            CaseLabel::None => unreachable!(),
        };
        RankOneCase {
            case,
            r,
            consequences: Some(consequences),
            reason: None,
        }
    }
}

/// The three squarefree rational twists with `s_inf(R) = 2`, decided from
/// congruences on `q` and `R` alone:
///
/// * (i) `q = 15 mod 32`, `R = 1`;
/// * (ii) `q = 7 mod 16`, `R = r` prime, `r = 5 mod 8`, `r` inert in `K`;
/// * (iii) `q = 7 mod 16`, `R = -r`, `r` prime, `r = 3 mod 8`, `r` inert.
pub fn classify_rank_one(field: &QuadField, r: &Integer, cfg: &Config) -> Result<RankOneCase> {
    if r.is_zero() {
        return Err(Error::InvalidInput("R must be nonzero".into()));
    }
    let fact = arith::factorize(r, &cfg.factor)?;
    if !fact.is_squarefree() {
        return Ok(RankOneCase::none("R is not squarefree"));
    }
    let record = validate_twist(field, &field.int(r.clone()), cfg)?;
    if !record.valid {
        let v: Vec<&str> = record.violations.iter().map(|v| v.as_str()).collect();
        return Ok(RankOneCase::none(format!(
            "twisting hypothesis fails: {}",
            v.join(", ")
        )));
    }
    let q = field.q();
    if r.is_one() {
        return Ok(if q % 32 == 15 {
            RankOneCase::with_case(CaseLabel::CaseI, None)
        } else {
            RankOneCase::none("R = 1 needs q = 15 mod 32")
        });
    }
    if q % 16 != 7 {
        return Ok(RankOneCase::none("R != 1 needs q = 7 mod 16"));
    }
    let mag = r.magnitude();
    if fact.factors.len() != 1 {
        return Ok(RankOneCase::none("|R| is not prime"));
    }
    let inert = matches!(field.splitting_type(mag)?, qfield::Splitting::Inert(_));
    if !inert {
        return Ok(RankOneCase::none("|R| is not inert in K"));
    }
    let r8 = (mag % 8u32).to_u32().unwrap();
    Ok(match (r.is_positive(), r8) {
        (true, 5) => RankOneCase::with_case(CaseLabel::CaseIi, Some(mag.clone())),
        (false, 3) => RankOneCase::with_case(CaseLabel::CaseIii, Some(mag.clone())),
        _ => RankOneCase::none("sign and residue of R mod 8 match no case"),
    })
}

/// Rational twists scanned by [`enumerate_twists`]: squarefree, `= 1 mod 4`,
/// prime to `2q`, `|R| <= bound`, ordered by `|R|`.
pub fn twist_candidates(field: &QuadField, bound: u64, cfg: &Config) -> Result<Vec<Integer>> {
    if bound > cfg.scan_cap {
        return Err(Error::InvalidInput(format!(
            "scan bound {bound} exceeds cap {}",
            cfg.scan_cap
        )));
    }
    let q = field.q();
    let mut out = Vec::new();
    for n in (1..=bound).step_by(2) {
        if n % q == 0 {
            continue;
        }
        let fact = arith::factorize(&Integer::from(n), &cfg.factor)?;
        if !fact.is_squarefree() {
            continue;
        }
        // exactly one of n, -n is 1 mod 4
        let r = if n % 4 == 1 {
            Integer::from(n)
        } else {
            -Integer::from(n)
        };
        out.push(r);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanItem {
    #[serde(with = "crate::serde_num::int")]
    pub r: Integer,
    pub record: TwistRecord,
    pub lambda: Option<LambdaReport>,
    pub case: RankOneCase,
}

/// Validation, invariants and rank-one case of one rational twist.
pub fn scan_item(field: &QuadField, r: &Integer, cfg: &Config) -> Result<ScanItem> {
    let elem = field.int(r.clone());
    let record = validate_twist(field, &elem, cfg)?;
    let lambda = if record.valid {
        let report = iwasawa::lambda_invariants(field, &elem, cfg)?;
        debug_assert_eq!(&report.lambda_f + 1u32, report.s_inf);
        Some(report)
    } else {
        None
    };
    let case = classify_rank_one(field, r, cfg)?;
    Ok(ScanItem {
        r: r.clone(),
        record,
        lambda,
        case,
    })
}

/// Every rational twist of [`twist_candidates`] with its record and invariants.
pub fn enumerate_twists<'a>(
    field: &'a QuadField,
    bound: u64,
    cfg: &'a Config,
) -> Result<impl Iterator<Item = Result<ScanItem>> + 'a> {
    let candidates = twist_candidates(field, bound, cfg)?;
    Ok(candidates
        .into_iter()
        .map(move |r| scan_item(field, &r, cfg)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RayClassOrder {
    pub class_number: u64,
    /// `#(O_K / (p*)^2)^x`.
    pub residue_units: u64,
    /// Size of the image of the global units `{1, -1}` in that group.
    pub unit_image: u64,
    pub order: u64,
}

/// Order of the ray class group of `K` modulo `(p*)^2`, from
/// `h * #(O/m)^x / #image(O^x)`. `O/(p*)^2` is `Z/4` through `iota_p*`.
pub fn ray_class_order(field: &QuadField) -> RayClassOrder {
    let residue_units = (0..4u64).filter(|x| x % 2 == 1).count() as u64;
    let image: BTreeSet<u64> = [field.one(), -field.one()]
        .iter()
        .map(|u| dyadic::residue_mod4(u, true))
        .collect();
    let unit_image = image.len() as u64;
    let h = field.class_number();
    RayClassOrder {
        class_number: h,
        residue_units,
        unit_image,
        order: h * residue_units / unit_image,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessSet {
    pub h_prime: u64,
    pub alphas: Vec<QuadElem>,
    pub supports: Vec<PrimeIdeal>,
}

/// Primes dividing `sqrt(-q) R`, those of `R` first and `(sqrt(-q))` last,
/// with their exponents.
fn witness_supports(
    field: &QuadField,
    r: &QuadElem,
    cfg: &Config,
) -> Result<(Vec<PrimeIdeal>, Vec<u32>)> {
    let x = &field.sqrt_minus_q() * r;
    let f = field.factor_ideal(
        &x,
        &[PrimeKind::Split, PrimeKind::Inert, PrimeKind::Ramified],
        cfg,
    )?;
    let mut primes: Vec<_> = f
        .factors
        .iter()
        .filter(|p| p.prime.kind != PrimeKind::Ramified)
        .collect();
    primes.extend(
        f.factors
            .iter()
            .filter(|p| p.prime.kind == PrimeKind::Ramified),
    );
    Ok((
        primes.iter().map(|p| p.prime.clone()).collect(),
        primes.iter().map(|p| p.exponent).collect(),
    ))
}

/// Kummer generators `alpha_i` with `(alpha_i) = a_i^h'` and
/// `iota_p*(alpha_i) = 1 mod 4`, where `sqrt(-q) R = a_1 ... a_s` and `h'` is
/// the ray class order modulo `(p*)^2`. The last one is defined by
/// `alpha_s = (-sqrt(-q) R)^h' / (alpha_1 ... alpha_{s-1})`.
///
/// Only available when every prime dividing `sqrt(-q) R` stays prime in
/// `K_inf`, so that the base field already carries all `s` ideals `a_i`.
pub fn construct_witnesses(field: &QuadField, r: &QuadElem, cfg: &Config) -> Result<WitnessSet> {
    let (_, entries) = iwasawa::s_infinity(field, r, cfg)?;
    if let Some(e) = entries.iter().find(|e| !e.count.is_one()) {
        return Err(Error::NotApplicable(format!(
            "{} splits into {} primes of K_inf",
            e.prime, e.count
        )));
    }
    let h_prime = ray_class_order(field).order;
    let hp =
        u32::try_from(h_prime).map_err(|_| Error::SizeUnsupported("ray class order".into()))?;
    let (supports, exponents) = witness_supports(field, r, cfg)?;
    let s = supports.len();
    let mut alphas = Vec::with_capacity(s);
    for (prime, &e) in supports.iter().zip(&exponents).take(s - 1) {
        let g = field.primitive_generator(prime, hp * e, cfg)?;
        alphas.push(qfield::normalize_sign(g, true));
    }
    let total = (-(&field.sqrt_minus_q() * r)).pow(hp);
    let partial = alphas.iter().fold(field.one(), |acc, a| &acc * a);
    let last = total
        .checked_div(&partial)
        .ok_or_else(|| Error::NotApplicable("quotient generator is not integral".into()))?;
    alphas.push(last);
    Ok(WitnessSet {
        h_prime,
        alphas,
        supports,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessCheck {
    /// `(alpha_i) = a_i^h'` for every `i`.
    pub ideal_equalities: bool,
    /// `iota_p*(alpha_i) = 1 mod 4`, i.e. `alpha_i = 1 mod (p*)^2`.
    pub congruences: bool,
    /// `prod alpha_i = (-sqrt(-q) R)^h'`.
    pub product_relation: bool,
    pub distinct_supports: bool,
    /// Valuation of `alpha_i` at its support is odd.
    pub odd_orders: bool,
    pub failures: Vec<String>,
}

impl WitnessCheck {
    pub fn passed(&self) -> bool {
        self.ideal_equalities
            && self.congruences
            && self.product_relation
            && self.distinct_supports
            && self.odd_orders
    }
}

/// Independent re-check of a [`WitnessSet`]: the factorization of
/// `sqrt(-q) R` is recomputed from scratch.
pub fn verify_witnesses(
    field: &QuadField,
    r: &QuadElem,
    w: &WitnessSet,
    cfg: &Config,
) -> Result<WitnessCheck> {
    let mut failures = Vec::new();
    let x = &field.sqrt_minus_q() * r;
    let target = field.factor_ideal(&x, &PrimeKind::ALL, cfg)?;
    let hp = w.h_prime as u32;

    let mut ideal_equalities = w.alphas.len() == w.supports.len();
    if !ideal_equalities {
        failures.push(format!(
            "{} generators for {} supports",
            w.alphas.len(),
            w.supports.len()
        ));
    }
    let mut congruences = true;
    let mut odd_orders = true;
    for (i, (alpha, prime)) in w.alphas.iter().zip(&w.supports).enumerate() {
        let e = target.exponent_of(prime);
        let f = field.factor_ideal(alpha, &PrimeKind::ALL, cfg)?;
        let expected = qfield::IdealPower {
            prime: prime.clone(),
            exponent: hp * e,
        };
        if e == 0 || f.factors != [expected] {
            ideal_equalities = false;
            failures.push(format!(
                "(alpha_{}) = {f}, expected {prime}^{}",
                i + 1,
                hp * e
            ));
        }
        if dyadic::residue_mod4(alpha, true) != 1 {
            congruences = false;
            failures.push(format!("alpha_{} is not 1 mod (p*)^2", i + 1));
        }
        if field.valuation(alpha, prime).is_multiple_of(2) {
            odd_orders = false;
            failures.push(format!("alpha_{} has even order at {prime}", i + 1));
        }
    }
    let product = w.alphas.iter().fold(field.one(), |acc, a| &acc * a);
    let product_relation = product == (-&x).pow(hp);
    if !product_relation {
        failures.push("product of generators differs from (-sqrt(-q) R)^h'".into());
    }
    let distinct: BTreeSet<_> = w.supports.iter().collect();
    let distinct_supports = distinct.len() == w.supports.len();
    if !distinct_supports {
        failures.push("repeated support prime".into());
    }
    Ok(WitnessCheck {
        ideal_equalities,
        congruences,
        product_relation,
        distinct_supports,
        odd_orders,
        failures,
    })
}
