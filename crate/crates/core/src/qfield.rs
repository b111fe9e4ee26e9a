//! The field `K = Q(sqrt(-q))`, `q` prime with `q = 7 mod 8`, and its maximal
//! order `O_K = Z[(1 + sqrt(-q))/2]`.
//!
//! Elements are stored as `(a + b sqrt(-q))/2` with `a = b mod 2`. Prime
//! ideals are never stored as lattices: every prime of `O_K` is pinned down
//! by its residue characteristic, its splitting kind and, for split odd
//! primes, the residue `u` of `sqrt(-q)` modulo the ideal.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_integer::Integer as _;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize, Serializer};

use crate::arith::{self, Integer, Natural};
use crate::dyadic;
use crate::{Config, Error, Result};

#[derive(Debug)]
pub struct QuadField {
    q: u64,
    class_number: OnceLock<u64>,
}

impl Clone for QuadField {
    fn clone(&self) -> Self {
        let out = QuadField {
            q: self.q,
            class_number: OnceLock::new(),
        };
        if let Some(&h) = self.class_number.get() {
            let _ = out.class_number.set(h);
        }
        out
    }
}

impl PartialEq for QuadField {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q
    }
}

impl Eq for QuadField {}

/// Element `(a + b sqrt(-q))/2` of `O_K`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadElem {
    q: u64,
    a: Integer,
    b: Integer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimeKind {
    /// The prime `p` above 2 with `iota_p(sqrt(-q)) = 1 mod 4`.
    DyadicP,
    DyadicPstar,
    Split,
    Inert,
    Ramified,
}

impl PrimeKind {
    pub const ALL: [PrimeKind; 5] = [
        PrimeKind::DyadicP,
        PrimeKind::DyadicPstar,
        PrimeKind::Split,
        PrimeKind::Inert,
        PrimeKind::Ramified,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PrimeKind::DyadicP => "dyadic_p",
            PrimeKind::DyadicPstar => "dyadic_pstar",
            PrimeKind::Split => "split",
            PrimeKind::Inert => "inert",
            PrimeKind::Ramified => "ramified",
        }
    }
}

impl fmt::Display for PrimeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeIdeal {
    pub q: u64,
    #[serde(with = "crate::serde_num::nat")]
    pub ell: Natural,
    pub kind: PrimeKind,
    /// `u` with `sqrt(-q) = u mod` the ideal, `0 < u < ell`; split primes only.
    #[serde(with = "crate::serde_num::opt_nat", default)]
    pub residue: Option<Natural>,
}

impl Ord for PrimeIdeal {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.ell, self.kind, &self.residue).cmp(&(&other.ell, other.kind, &other.residue))
    }
}

impl PartialOrd for PrimeIdeal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PrimeIdeal {
    /// Residue degree.
    pub fn degree(&self) -> u32 {
        if self.kind == PrimeKind::Inert {
            2
        } else {
            1
        }
    }

    pub fn norm(&self) -> Natural {
        self.ell.pow(self.degree())
    }

    /// The Galois conjugate ideal.
    pub fn conjugate(&self) -> PrimeIdeal {
        let mut out = self.clone();
        match self.kind {
            PrimeKind::DyadicP => out.kind = PrimeKind::DyadicPstar,
            PrimeKind::DyadicPstar => out.kind = PrimeKind::DyadicP,
            PrimeKind::Split => {
                out.residue = self.residue.as_ref().map(|u| &self.ell - u);
            }
            PrimeKind::Inert | PrimeKind::Ramified => {}
        }
        out
    }

    /// Membership of `x` in this prime ideal. For a split prime
    /// `(ell, sqrt(-q) - u)` this is `a + b u = 0 mod ell`.
    pub fn contains(&self, x: &QuadElem) -> bool {
        match self.kind {
            PrimeKind::Split => {
                let u = Integer::from(self.residue.clone().unwrap());
                let ell = Integer::from(self.ell.clone());
                (&x.a + &x.b * u).is_multiple_of(&ell)
            }
            PrimeKind::Inert => {
                let ell = Integer::from(self.ell.clone());
                x.a.is_multiple_of(&ell) && x.b.is_multiple_of(&ell)
            }
            PrimeKind::Ramified => x.a.is_multiple_of(&Integer::from(self.q)),
            // iota(x) even, i.e. a + b s = 0 mod 4 with s = +-1 mod 4
            PrimeKind::DyadicP => (&x.a + &x.b).is_multiple_of(&Integer::from(4)),
            PrimeKind::DyadicPstar => (&x.a - &x.b).is_multiple_of(&Integer::from(4)),
        }
    }
}

impl fmt::Display for PrimeIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            PrimeKind::DyadicP => write!(f, "p"),
            PrimeKind::DyadicPstar => write!(f, "p*"),
            PrimeKind::Ramified => write!(f, "(sqrt(-{}))", self.q),
            PrimeKind::Inert => write!(f, "({})", self.ell),
            PrimeKind::Split => write!(
                f,
                "({}, sqrt(-{}) - {})",
                self.ell,
                self.q,
                self.residue.as_ref().unwrap()
            ),
        }
    }
}

/// How a rational prime decomposes in `O_K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Splitting {
    /// Conjugate pair, smaller residue (or `p` before `p*`) first.
    Split(PrimeIdeal, PrimeIdeal),
    Inert(PrimeIdeal),
    Ramified(PrimeIdeal),
}

impl Splitting {
    pub fn label(&self) -> &'static str {
        match self {
            Splitting::Split(..) => "split",
            Splitting::Inert(_) => "inert",
            Splitting::Ramified(_) => "ramified",
        }
    }

    pub fn primes(&self) -> Vec<PrimeIdeal> {
        match self {
            Splitting::Split(a, b) => vec![a.clone(), b.clone()],
            Splitting::Inert(p) | Splitting::Ramified(p) => vec![p.clone()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdealPower {
    pub prime: PrimeIdeal,
    pub exponent: u32,
}

/// Factorization of a principal ideal into pairwise distinct prime powers,
/// sorted by prime.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IdealFactorization {
    pub factors: Vec<IdealPower>,
}

impl IdealFactorization {
    pub fn norm(&self) -> Natural {
        self.factors.iter().fold(Natural::one(), |acc, f| {
            acc * f.prime.norm().pow(f.exponent)
        })
    }

    pub fn exponent_of(&self, prime: &PrimeIdeal) -> u32 {
        self.factors
            .iter()
            .find(|f| &f.prime == prime)
            .map_or(0, |f| f.exponent)
    }

    pub fn primes(&self) -> impl Iterator<Item = &PrimeIdeal> {
        self.factors.iter().map(|f| &f.prime)
    }
}

impl fmt::Display for IdealFactorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("(1)");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|p| format!("{}^{}", p.prime, p.exponent))
            .collect();
        f.write_str(&parts.join(" * "))
    }
}

impl QuadElem {
    /// `(a + b sqrt(-q))/2`; fails unless `a = b mod 2`.
    pub fn from_halves(q: u64, a: Integer, b: Integer) -> Result<Self> {
        if a.is_odd() != b.is_odd() {
            return Err(Error::InvalidInput(format!(
                "({a} + {b} sqrt(-{q}))/2 is not integral"
            )));
        }
        Ok(QuadElem { q, a, b })
    }

    /// `x + y sqrt(-q)`.
    pub fn from_parts(q: u64, x: Integer, y: Integer) -> Self {
        QuadElem {
            q,
            a: x * 2,
            b: y * 2,
        }
    }

    pub fn from_int(q: u64, n: Integer) -> Self {
        QuadElem {
            q,
            a: n * 2,
            b: Integer::zero(),
        }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// Numerator coordinate `a` of `(a + b sqrt(-q))/2`.
    pub fn a(&self) -> &Integer {
        &self.a
    }

    pub fn b(&self) -> &Integer {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// `Some(n)` when the element is the rational integer `n`.
    pub fn as_integer(&self) -> Option<Integer> {
        (self.b.is_zero() && self.a.is_even()).then(|| &self.a / 2)
    }

    pub fn norm(&self) -> Natural {
        let n: Integer = (&self.a * &self.a + &self.b * &self.b * self.q) / 4;
        n.magnitude().clone()
    }

    pub fn conjugate(&self) -> QuadElem {
        QuadElem {
            q: self.q,
            a: self.a.clone(),
            b: -&self.b,
        }
    }

    pub fn pow(&self, mut e: u32) -> QuadElem {
        let mut base = self.clone();
        let mut acc = QuadElem::from_int(self.q, Integer::one());
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// `self / other` when the quotient lies in `O_K`.
    pub fn checked_div(&self, other: &QuadElem) -> Option<QuadElem> {
        if other.is_zero() {
            return None;
        }
        let num = self * &other.conjugate();
        let n = Integer::from(other.norm());
        let (qa, ra) = num.a.div_rem(&n);
        let (qb, rb) = num.b.div_rem(&n);
        if !ra.is_zero() || !rb.is_zero() {
            return None;
        }
        QuadElem::from_halves(self.q, qa, qb).ok()
    }
}

impl fmt::Display for QuadElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (x, y, half) = if self.a.is_even() {
            (&self.a / 2, &self.b / 2, false)
        } else {
            (self.a.clone(), self.b.clone(), true)
        };
        let root = format!("sqrt(-{})", self.q);
        let body = match (x.is_zero(), y.is_zero()) {
            (_, true) => x.to_string(),
            (true, false) => match y.to_i64() {
                Some(1) => root,
                Some(-1) => format!("-{root}"),
                _ => format!("{y}*{root}"),
            },
            (false, false) => {
                let sign = if y.is_negative() { '-' } else { '+' };
                let ay = y.abs();
                if ay.is_one() {
                    format!("{x} {sign} {root}")
                } else {
                    format!("{x} {sign} {ay}*{root}")
                }
            }
        };
        if half {
            write!(f, "({body})/2")
        } else {
            f.write_str(&body)
        }
    }
}

impl Serialize for QuadElem {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        QuadElemRepr::from(self).serialize(s)
    }
}

/// Wire form of a [`QuadElem`]: `(a + b sqrt(-q))/denominator`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadElemRepr {
    #[serde(with = "crate::serde_num::int")]
    pub a: Integer,
    #[serde(with = "crate::serde_num::int")]
    pub b: Integer,
    pub denominator: u32,
}

impl From<&QuadElem> for QuadElemRepr {
    fn from(x: &QuadElem) -> Self {
        QuadElemRepr {
            a: x.a.clone(),
            b: x.b.clone(),
            denominator: 2,
        }
    }
}

impl QuadElemRepr {
    pub fn into_elem(self, q: u64) -> Result<QuadElem> {
        if self.denominator != 2 {
            return Err(Error::InvalidInput("denominator must be 2".into()));
        }
        QuadElem::from_halves(q, self.a, self.b)
    }
}

impl Mul for &QuadElem {
    type Output = QuadElem;

    fn mul(self, rhs: &QuadElem) -> QuadElem {
        debug_assert_eq!(self.q, rhs.q);
        let a = (&self.a * &rhs.a - &self.b * &rhs.b * self.q) / 2;
        let b = (&self.a * &rhs.b + &self.b * &rhs.a) / 2;
        QuadElem { q: self.q, a, b }
    }
}

impl Add for &QuadElem {
    type Output = QuadElem;

    fn add(self, rhs: &QuadElem) -> QuadElem {
        QuadElem {
            q: self.q,
            a: &self.a + &rhs.a,
            b: &self.b + &rhs.b,
        }
    }
}

impl Sub for &QuadElem {
    type Output = QuadElem;

    fn sub(self, rhs: &QuadElem) -> QuadElem {
        QuadElem {
            q: self.q,
            a: &self.a - &rhs.a,
            b: &self.b - &rhs.b,
        }
    }
}

impl Neg for &QuadElem {
    type Output = QuadElem;

    fn neg(self) -> QuadElem {
        QuadElem {
            q: self.q,
            a: -&self.a,
            b: -&self.b,
        }
    }
}

impl Neg for QuadElem {
    type Output = QuadElem;

    fn neg(self) -> QuadElem {
        -&self
    }
}

/// Number of reduced forms `ax^2 + bxy + cy^2` of discriminant `-q`:
/// `|b| <= a <= c`, with `b >= 0` whenever `|b| = a` or `a = c`.
pub fn class_number(q: u64) -> u64 {
    let q = q as u128;
    let mut h = 0;
    let mut a: u128 = 1;
    while 3 * a * a <= q {
        // b runs over odd values in (-a, a]
        let mut b: i128 = -(a as i128) + 1;
        while b <= a as i128 {
            if b.rem_euclid(2) == 1 {
                let num = (b * b) as u128 + q;
                if num.is_multiple_of(4 * a) {
                    let c = num / (4 * a);
                    if c >= a && !(b < 0 && c == a) {
                        h += 1;
                    }
                }
            }
            b += 1;
        }
        a += 1;
    }
    h
}

impl QuadField {
    pub fn new(q: u64) -> Result<Self> {
        if q % 8 != 7 || !arith::is_prime_u64(q) {
            return Err(Error::InvalidField(q));
        }
        Ok(QuadField {
            q,
            class_number: OnceLock::new(),
        })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn class_number(&self) -> u64 {
        *self.class_number.get_or_init(|| class_number(self.q))
    }

    pub fn one(&self) -> QuadElem {
        QuadElem::from_int(self.q, Integer::one())
    }

    pub fn int(&self, n: impl Into<Integer>) -> QuadElem {
        QuadElem::from_int(self.q, n.into())
    }

    pub fn sqrt_minus_q(&self) -> QuadElem {
        QuadElem::from_parts(self.q, Integer::zero(), Integer::one())
    }

    pub fn elem(&self, a: impl Into<Integer>, b: impl Into<Integer>) -> Result<QuadElem> {
        QuadElem::from_halves(self.q, a.into(), b.into())
    }

    fn check(&self, x: &QuadElem) -> Result<()> {
        if x.q != self.q {
            return Err(Error::InvalidInput(format!(
                "element of Q(sqrt(-{})) used in Q(sqrt(-{}))",
                x.q, self.q
            )));
        }
        Ok(())
    }

    pub fn prime_p(&self) -> PrimeIdeal {
        PrimeIdeal {
            q: self.q,
            ell: Natural::from(2u32),
            kind: PrimeKind::DyadicP,
            residue: None,
        }
    }

    pub fn prime_pstar(&self) -> PrimeIdeal {
        PrimeIdeal {
            kind: PrimeKind::DyadicPstar,
            ..self.prime_p()
        }
    }

    /// The ramified prime `(sqrt(-q))`.
    pub fn prime_q(&self) -> PrimeIdeal {
        PrimeIdeal {
            q: self.q,
            ell: Natural::from(self.q),
            kind: PrimeKind::Ramified,
            residue: None,
        }
    }

    /// Decomposition of a rational prime `ell`.
    pub fn splitting_type(&self, ell: &Natural) -> Result<Splitting> {
        if !arith::is_prime(ell)? {
            return Err(Error::InvalidInput(format!("{ell} is not prime")));
        }
        if ell == &Natural::from(2u32) {
            return Ok(Splitting::Split(self.prime_p(), self.prime_pstar()));
        }
        let minus_q = -Integer::from(self.q);
        let mk = |kind, residue| PrimeIdeal {
            q: self.q,
            ell: ell.clone(),
            kind,
            residue,
        };
        Ok(
            match arith::kronecker(&minus_q, &Integer::from(ell.clone())) {
                0 => Splitting::Ramified(mk(PrimeKind::Ramified, None)),
                -1 => Splitting::Inert(mk(PrimeKind::Inert, None)),
                _ => {
                    let u = arith::sqrt_mod_prime(&minus_q, ell)
                        .expect("residue exists for split prime");
                    let v = ell - &u;
                    Splitting::Split(mk(PrimeKind::Split, Some(u)), mk(PrimeKind::Split, Some(v)))
                }
            },
        )
    }

    /// Valuation of a nonzero `x` at `prime`.
    pub fn valuation(&self, x: &QuadElem, prime: &PrimeIdeal) -> u32 {
        let n = x.norm();
        debug_assert!(!n.is_zero());
        let total = arith::valuation(&n, &prime.ell);
        if total == 0 {
            return 0;
        }
        match prime.kind {
            PrimeKind::Inert => total / 2,
            PrimeKind::Ramified => total,
            PrimeKind::DyadicP | PrimeKind::DyadicPstar => {
                let star = prime.kind == PrimeKind::DyadicPstar;
                let k = total + dyadic::GUARD_BITS + 2;
                let emb = if star {
                    dyadic::embed_star(x, k)
                } else {
                    dyadic::embed(x, k)
                };
                let d = emb.expect("precision above the norm valuation");
                d.residue()
                    .trailing_zeros()
                    .map_or(total, |v| (v as u32).min(total))
            }
            PrimeKind::Split => {
                // x in w^e iff a + b u_e = 0 mod ell^e, u_e the lift of u
                let u = prime.residue.as_ref().unwrap();
                let lifted = arith::hensel_sqrt_lift(&-Integer::from(self.q), &prime.ell, u, total);
                let t = &x.a + &x.b * Integer::from(lifted);
                if t.is_zero() {
                    total
                } else {
                    arith::valuation(t.magnitude(), &prime.ell).min(total)
                }
            }
        }
    }

    /// Prime factorization of the principal ideal `(x)`. Any factor whose
    /// kind is outside `allow` yields [`Error::DisallowedKind`].
    pub fn factor_ideal(
        &self,
        x: &QuadElem,
        allow: &[PrimeKind],
        cfg: &Config,
    ) -> Result<IdealFactorization> {
        self.check(x)?;
        if x.is_zero() {
            return Err(Error::InvalidInput("cannot factor the zero ideal".into()));
        }
        let norm = arith::factorize(&Integer::from(x.norm()), &cfg.factor)?;
        let mut out = IdealFactorization::default();
        for pp in &norm.factors {
            let primes = self.splitting_type(&pp.prime)?.primes();
            for prime in primes {
                let e = self.valuation(x, &prime);
                if e > 0 {
                    if !allow.contains(&prime.kind) {
                        return Err(Error::DisallowedKind(prime.kind));
                    }
                    out.factors.push(IdealPower { prime, exponent: e });
                }
            }
        }
        out.factors.sort_by(|a, b| a.prime.cmp(&b.prime));
        Ok(out)
    }

    /// Generator `w` of `prime^e`, signed so that `iota_p(w) = 1 mod 4`.
    /// The prime `p` itself has no such generator.
    pub fn generator_of_power(&self, prime: &PrimeIdeal, e: u32, cfg: &Config) -> Result<QuadElem> {
        if prime.kind == PrimeKind::DyadicP {
            return Err(Error::DisallowedKind(PrimeKind::DyadicP));
        }
        let w = self.primitive_generator(prime, e, cfg)?;
        Ok(normalize_sign(w, false))
    }

    /// Some generator of `prime^e`, sign unspecified.
    pub(crate) fn primitive_generator(
        &self,
        prime: &PrimeIdeal,
        e: u32,
        cfg: &Config,
    ) -> Result<QuadElem> {
        if prime.q != self.q {
            return Err(Error::InvalidInput("prime ideal of another field".into()));
        }
        match prime.kind {
            PrimeKind::Inert => Ok(self.int(Integer::from(prime.ell.pow(e)))),
            PrimeKind::Ramified => Ok(self.sqrt_minus_q().pow(e)),
            PrimeKind::Split | PrimeKind::DyadicP | PrimeKind::DyadicPstar => {
                if e == 0 {
                    return Ok(self.one());
                }
                if let Some(w) = self.generator_by_cornacchia(prime, e) {
                    return Ok(w);
                }
                self.generator_by_enumeration(prime, e, cfg)
            }
        }
    }

    /// `(a, b)` is accepted when `(a + b sqrt(-q))/2` generates exactly
    /// `prime^e`: right norm, inside `prime`, outside its conjugate.
    fn accepts(
        &self,
        prime: &PrimeIdeal,
        target: &Integer,
        a: &Integer,
        b: &Integer,
    ) -> Option<QuadElem> {
        let x = QuadElem::from_halves(self.q, a.clone(), b.clone()).ok()?;
        let ok = &(a * a) + &(b * b * self.q) == *target
            && prime.contains(&x)
            && !prime.conjugate().contains(&x);
        ok.then_some(x)
    }

    fn generator_by_cornacchia(&self, prime: &PrimeIdeal, e: u32) -> Option<QuadElem> {
        let n = prime.ell.pow(e);
        let target = Integer::from(&n * 4u32);
        let d = Natural::from(self.q);
        // (modulus, root of r^2 = -q mod modulus, scale of the solution)
        let mut attempts: Vec<(Natural, Natural, u32)> = Vec::new();
        match prime.kind {
            PrimeKind::Split => {
                let u = prime.residue.as_ref().unwrap();
                let ue = arith::hensel_sqrt_lift(&-Integer::from(self.q), &prime.ell, u, e);
                let minus_ue = (&n - &ue) % &n;
                // odd solutions: r = -u_e mod ell^e, r odd, modulus 4 ell^e
                let inv4 = arith::mod_inverse(&Integer::from(4), &Integer::from(n.clone()))?;
                let invn = arith::mod_inverse(&Integer::from(n.clone()), &Integer::from(4))?;
                for r4 in [1u32, 3] {
                    let m4 = Integer::from(&n * 4u32);
                    let lhs: Integer = Integer::from(minus_ue.clone()) * 4 * &inv4;
                    let rhs: Integer = Integer::from(r4) * Integer::from(n.clone()) * &invn;
                    let r = (lhs + rhs).mod_floor(&m4);
                    attempts.push((m4.magnitude().clone(), r.magnitude().clone(), 1));
                }
                attempts.push((n.clone(), minus_ue, 2));
            }
            PrimeKind::DyadicP | PrimeKind::DyadicPstar => {
                let s = dyadic::sqrt_minus_q(self.q, e + 2).ok()?;
                let s = if prime.kind == PrimeKind::DyadicP {
                    s.neg()
                } else {
                    s
                };
                let m = Natural::one() << (e + 2);
                let base = s.residue() % (Natural::one() << (e + 1));
                attempts.push((m.clone(), base.clone(), 1));
                attempts.push((m, base + (Natural::one() << (e + 1)), 1));
            }
            _ => return None,
        }
        for (m, r, scale) in attempts {
            let rs = [r.clone(), (&m - &r) % &m];
            for r in rs {
                if let Some((x, y)) = cornacchia(&d, &m, &r) {
                    let (x, y) = (Integer::from(x) * scale, Integer::from(y) * scale);
                    for (sa, sb) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                        if let Some(w) = self.accepts(prime, &target, &(&x * sa), &(&y * sb)) {
                            return Some(w);
                        }
                    }
                }
            }
        }
        None
    }

    /// Brute-force search over `a^2 + q b^2 = 4 ell^e`, `b = 0, 1, ...`.
    /// Used as a fallback and as the independent route in tests.
    pub fn generator_by_enumeration(
        &self,
        prime: &PrimeIdeal,
        e: u32,
        cfg: &Config,
    ) -> Result<QuadElem> {
        let n = prime.ell.pow(e * prime.degree());
        let target = Integer::from(&n * 4u32);
        let b_max = (&n * 4u32 / self.q).sqrt();
        if b_max > Natural::from(cfg.search_bound) {
            return Err(Error::SearchBoundExceeded(cfg.search_bound));
        }
        let b_max = b_max.to_u64().unwrap();
        for b in 0..=b_max {
            let bb = Integer::from(b);
            let rest = &target - &bb * &bb * self.q;
            let Some(a) = arith::sqrt_exact(rest.magnitude()) else {
                continue;
            };
            let a = Integer::from(a);
            for (sa, sb) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                if let Some(w) = self.accepts(prime, &target, &(&a * sa), &(&bb * sb)) {
                    return Ok(w);
                }
            }
        }
        Err(Error::NotPrincipal)
    }
}

/// Cornacchia: a primitive solution of `x^2 + d y^2 = m` attached to the
/// root `r` of `r^2 = -d mod m`, via the Euclidean remainder sequence of
/// `(m, r)` stopped below `sqrt(m)`.
pub fn cornacchia(d: &Natural, m: &Natural, r: &Natural) -> Option<(Natural, Natural)> {
    if m.is_zero() {
        return None;
    }
    let limit = m.sqrt();
    let mut a = m.clone();
    let mut b = r % m;
    while b > limit {
        let t = &a % &b;
        a = b;
        b = t;
    }
    let bb = &b * &b;
    if &bb > m {
        return None;
    }
    let rest = m - &bb;
    if !(&rest % d).is_zero() {
        return None;
    }
    let y = arith::sqrt_exact(&(rest / d))?;
    Some((b, y))
}

/// Flip the sign of `w` so that `iota(w) = 1 mod 4` (`iota_p*` when `star`).
pub(crate) fn normalize_sign(w: QuadElem, star: bool) -> QuadElem {
    if dyadic::residue_mod4(&w, star) == 1 {
        w
    } else {
        -w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn field(q: u64) -> QuadField {
        QuadField::new(q).unwrap()
    }

    fn nat(v: u64) -> Natural {
        Natural::from(v)
    }

    /// `h = -(1/q) sum_{n<q} n (-q|n)`, valid for prime discriminant `-q < -4`.
    fn dirichlet_class_number(q: u64) -> u64 {
        let minus_q = Integer::from(-(q as i64));
        let s: i64 = (1..q as i64)
            .map(|n| n * arith::kronecker(&minus_q, &Integer::from(n)) as i64)
            .sum();
        assert_eq!(s % q as i64, 0);
        (-s / q as i64) as u64
    }

    #[test]
    fn rejects_bad_fields() {
        assert_eq!(QuadField::new(15), Err(Error::InvalidField(15)));
        assert_eq!(QuadField::new(11), Err(Error::InvalidField(11)));
        assert!(QuadField::new(7).is_ok());
    }

    #[test]
    fn splitting_examples() {
        let k = field(7);
        assert!(matches!(
            k.splitting_type(&nat(2)).unwrap(),
            Splitting::Split(..)
        ));
        assert!(matches!(
            k.splitting_type(&nat(7)).unwrap(),
            Splitting::Ramified(_)
        ));
        assert!(matches!(
            k.splitting_type(&nat(3)).unwrap(),
            Splitting::Inert(_)
        ));
        match k.splitting_type(&nat(11)).unwrap() {
            Splitting::Split(w, ws) => {
                assert_eq!(w.residue, Some(nat(2)));
                assert_eq!(ws.residue, Some(nat(9)));
                assert_eq!(w.conjugate(), ws);
            }
            other => panic!("{other:?}"),
        }
        assert!(k.splitting_type(&nat(9)).is_err());
    }

    #[test]
    fn class_number_examples() {
        assert_eq!(class_number(7), 1);
        assert_eq!(class_number(23), 3);
        assert_eq!(class_number(31), 3);
        assert_eq!(class_number(47), 5);
        assert_eq!(class_number(71), 7);
    }

    #[test]
    fn class_number_matches_dirichlet_formula() {
        for q in (7..3000u64).step_by(8).filter(|&q| arith::is_prime_u64(q)) {
            let h = class_number(q);
            assert_eq!(h, dirichlet_class_number(q), "q = {q}");
            assert_eq!(h % 2, 1);
        }
    }

    #[test]
    fn norm_and_conjugate_examples() {
        let k = field(7);
        let x = QuadElem::from_parts(7, 2.into(), 1.into());
        assert_eq!(x.norm(), nat(11));
        assert_eq!(x.conjugate().conjugate(), x);
        assert_eq!(k.elem(1, 1).unwrap().norm(), nat(2));
        assert!(k.elem(1, 2).is_err());
        assert_eq!(x.to_string(), "2 + sqrt(-7)");
        assert_eq!(k.elem(1, -3).unwrap().to_string(), "(1 - 3*sqrt(-7))/2");
        assert_eq!((-k.sqrt_minus_q()).to_string(), "-sqrt(-7)");
    }

    #[test]
    fn factor_ideal_examples() {
        let k = field(7);
        let cfg = Config::default();
        let f = k.factor_ideal(&k.int(741), &PrimeKind::ALL, &cfg).unwrap();
        let got: Vec<(u64, PrimeKind, u32)> = f
            .factors
            .iter()
            .map(|p| (p.prime.ell.to_u64().unwrap(), p.prime.kind, p.exponent))
            .collect();
        assert_eq!(
            got,
            vec![
                (3, PrimeKind::Inert, 1),
                (13, PrimeKind::Inert, 1),
                (19, PrimeKind::Inert, 1)
            ]
        );

        let f = k
            .factor_ideal(&k.sqrt_minus_q(), &PrimeKind::ALL, &cfg)
            .unwrap();
        assert_eq!(
            f.factors,
            vec![IdealPower {
                prime: k.prime_q(),
                exponent: 1
            }]
        );

        let f = k.factor_ideal(&k.int(-11), &PrimeKind::ALL, &cfg).unwrap();
        let residues: Vec<_> = f
            .factors
            .iter()
            .map(|p| (p.prime.residue.clone(), p.exponent))
            .collect();
        assert_eq!(residues, vec![(Some(nat(2)), 1), (Some(nat(9)), 1)]);

        let err = k.factor_ideal(&k.int(6), &[PrimeKind::Inert, PrimeKind::Split], &cfg);
        assert!(matches!(
            err,
            Err(Error::DisallowedKind(PrimeKind::DyadicP))
        ));

        let f = k
            .factor_ideal(&k.elem(1, 1).unwrap(), &PrimeKind::ALL, &cfg)
            .unwrap();
        assert_eq!(
            f.factors,
            vec![IdealPower {
                prime: k.prime_pstar(),
                exponent: 1
            }]
        );
    }

    #[test]
    fn generator_examples() {
        let cfg = Config::default();
        let k = field(7);
        let three = k.splitting_type(&nat(3)).unwrap().primes()[0].clone();
        assert_eq!(k.generator_of_power(&three, 1, &cfg).unwrap(), k.int(-3));

        let ws = k.splitting_type(&nat(11)).unwrap().primes()[1].clone();
        let w = k.generator_of_power(&ws, 1, &cfg).unwrap();
        assert_eq!(w, -QuadElem::from_parts(7, 2.into(), 1.into()));

        let k23 = field(23);
        let w3 = k23.splitting_type(&nat(3)).unwrap().primes()[0].clone();
        let g = k23.generator_of_power(&w3, 3, &cfg).unwrap();
        let base = QuadElem::from_parts(23, 2.into(), 1.into());
        assert!(g == base || g == -base.clone(), "{g}");
        assert!(matches!(
            k23.generator_of_power(&w3, 1, &cfg),
            Err(Error::NotPrincipal)
        ));
        assert!(matches!(
            k.generator_of_power(&k.prime_p(), 1, &cfg),
            Err(Error::DisallowedKind(PrimeKind::DyadicP))
        ));
    }

    #[test]
    fn search_bound_is_enforced() {
        let cfg = Config {
            search_bound: 10,
            ..Config::default()
        };
        let k = field(23);
        let w3 = k.splitting_type(&nat(3)).unwrap().primes()[0].clone();
        assert!(matches!(
            k.generator_by_enumeration(&w3, 20, &cfg),
            Err(Error::SearchBoundExceeded(10))
        ));
    }

    #[test]
    fn generators_round_trip_and_match_enumeration() {
        let cfg = Config::default();
        for q in [7u64, 23, 31, 47, 71, 79, 103] {
            let k = field(q);
            let h = k.class_number() as u32;
            let mut primes = vec![k.prime_pstar(), k.prime_q()];
            for ell in arith::primes_up_to(60).into_iter().skip(1) {
                primes.extend(k.splitting_type(&nat(ell)).unwrap().primes());
            }
            for prime in primes {
                let w = k.generator_of_power(&prime, h, &cfg).unwrap();
                let f = k.factor_ideal(&w, &PrimeKind::ALL, &cfg).unwrap();
                assert_eq!(
                    f.factors,
                    vec![IdealPower {
                        prime: prime.clone(),
                        exponent: h
                    }],
                    "q={q} {prime}"
                );
                assert_eq!(dyadic::residue_mod4(&w, false), 1);
                if matches!(prime.kind, PrimeKind::Split | PrimeKind::DyadicPstar) {
                    let brute = k.generator_by_enumeration(&prime, h, &cfg).unwrap();
                    assert!(brute == w || brute == -w.clone(), "q={q} {prime}");
                }
            }
        }
    }

    #[test]
    fn split_pair_factors_ell() {
        let k = field(31);
        for ell in arith::primes_up_to(400) {
            if let Splitting::Split(w, ws) = k.splitting_type(&nat(ell)).unwrap() {
                if ell != 2 {
                    assert_eq!(
                        w.residue.clone().unwrap() + ws.residue.clone().unwrap(),
                        nat(ell)
                    );
                    assert!(w.residue < ws.residue);
                }
                let f = k
                    .factor_ideal(&k.int(ell), &PrimeKind::ALL, &Config::default())
                    .unwrap();
                assert_eq!(
                    f.factors,
                    vec![
                        IdealPower {
                            prime: w,
                            exponent: 1
                        },
                        IdealPower {
                            prime: ws,
                            exponent: 1
                        }
                    ]
                );
            }
        }
    }

    #[test]
    fn cornacchia_small() {
        // 4 + 7 = 11: r = 2 * 1^-1 is a root of r^2 = -7 mod 11
        assert_eq!(
            cornacchia(&nat(7), &nat(11), &nat(9)),
            Some((nat(2), nat(1)))
        );
    }

    #[test]
    fn exact_division() {
        let k = field(7);
        let x = QuadElem::from_parts(7, 2.into(), 1.into());
        let y = &x * &k.int(5);
        assert_eq!(y.checked_div(&x), Some(k.int(5)));
        assert_eq!(k.int(5).checked_div(&x), None);
        // 2 = ((1 + sqrt(-7))/2)((1 - sqrt(-7))/2)
        let p = k.elem(1, 1).unwrap();
        assert_eq!(k.int(2).checked_div(&p), Some(p.conjugate()));
    }

    fn elem_strategy() -> impl Strategy<Value = QuadElem> {
        (0usize..4, -5000i64..5000, -5000i64..5000).prop_map(|(qi, a, b)| {
            let q = [7u64, 23, 31, 47][qi];
            let b = if (a - b) % 2 != 0 { b + 1 } else { b };
            QuadElem::from_halves(q, a.into(), b.into()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn norm_is_multiplicative(x in elem_strategy(), a in -5000i64..5000, b in -5000i64..5000) {
            let b = if (a - b) % 2 != 0 { b + 1 } else { b };
            let y = QuadElem::from_halves(x.q(), a.into(), b.into()).unwrap();
            prop_assert_eq!((&x * &y).norm(), x.norm() * y.norm());
        }

        #[test]
        fn factorization_norm_matches(x in elem_strategy()) {
            prop_assume!(!x.is_zero());
            let k = field(x.q());
            let f = k.factor_ideal(&x, &PrimeKind::ALL, &Config::default()).unwrap();
            prop_assert_eq!(f.norm(), x.norm());
        }
    }
}
