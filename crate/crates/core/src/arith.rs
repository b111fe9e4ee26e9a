//! Rational-integer kernel: primality, factorization, Kronecker symbol,
//! exact and modular square roots.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer as _;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type Natural = BigUint;
pub type Integer = BigInt;

/// Miller-Rabin with the first 13 prime bases is deterministic below this
/// bound (Sorenson and Webster).
const MR_DETERMINISTIC_LIMIT: &str = "3317044064679887385961981";
const MR_BASES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorConfig {
    /// Trial division runs over all primes up to this bound.
    pub trial_bound: u64,
    /// Iteration cap for each Pollard rho attempt.
    pub rho_iterations: u64,
}

impl Default for FactorConfig {
    fn default() -> Self {
        FactorConfig {
            trial_bound: 1_000_000,
            rho_iterations: 1_000_000,
        }
    }
}

/// `sign * prod(p^e)` with primes strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    /// `1` or `-1`.
    pub sign: i8,
    pub factors: Vec<PrimePower>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimePower {
    #[serde(with = "crate::serde_num::nat")]
    pub prime: Natural,
    pub exponent: u32,
}

impl Factorization {
    pub fn value(&self) -> Integer {
        let mag = self
            .factors
            .iter()
            .fold(Natural::one(), |acc, pp| acc * pp.prime.pow(pp.exponent));
        let v = Integer::from(mag);
        if self.sign < 0 {
            -v
        } else {
            v
        }
    }

    pub fn exponent_of(&self, p: &Natural) -> u32 {
        self.factors
            .iter()
            .find(|pp| &pp.prime == p)
            .map_or(0, |pp| pp.exponent)
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|pp| pp.exponent == 1)
    }

    fn push(&mut self, p: Natural, e: u32) {
        match self.factors.binary_search_by(|pp| pp.prime.cmp(&p)) {
            Ok(i) => self.factors[i].exponent += e,
            Err(i) => self.factors.insert(
                i,
                PrimePower {
                    prime: p,
                    exponent: e,
                },
            ),
        }
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic primality for every `u64`.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let d0 = n - 1;
    let s = d0.trailing_zeros();
    let d = d0 >> s;
    'witness: for &a in &MR_BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn is_prime_big(n: &Natural) -> Result<bool> {
    let limit: Natural = MR_DETERMINISTIC_LIMIT.parse().unwrap();
    if n >= &limit {
        return Err(Error::SizeUnsupported(format!(
            "primality of a {}-bit integer",
            n.bits()
        )));
    }
    let one = Natural::one();
    let n1 = n - &one;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    'witness: for &a in &MR_BASES {
        let a = Natural::from(a);
        if (n % &a).is_zero() {
            return Ok(n == &a);
        }
        let mut x = a.modpow(&d, n);
        if x == one || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n1 {
                continue 'witness;
            }
        }
        return Ok(false);
    }
    Ok(true)
}

/// Exact primality. Inputs above roughly 81 bits are rejected with
/// [`Error::SizeUnsupported`] rather than answered probabilistically.
pub fn is_prime(n: &Natural) -> Result<bool> {
    match n.to_u64() {
        Some(v) => Ok(is_prime_u64(v)),
        None => is_prime_big(n),
    }
}

/// Sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

fn trial_primes(bound: u64) -> &'static [u64] {
    use std::collections::HashMap;
    use std::sync::{Mutex, OnceLock};
    static TABLES: OnceLock<Mutex<HashMap<u64, &'static [u64]>>> = OnceLock::new();
    let mut tables = TABLES.get_or_init(Default::default).lock().unwrap();
    tables
        .entry(bound)
        .or_insert_with(|| Box::leak(primes_up_to(bound).into_boxed_slice()))
}

/// Complete factorization of a nonzero integer: trial division up to
/// `cfg.trial_bound`, then Pollard rho (Brent) on the cofactor.
pub fn factorize(n: &Integer, cfg: &FactorConfig) -> Result<Factorization> {
    if n.is_zero() {
        return Err(Error::InvalidInput("cannot factor zero".into()));
    }
    let mut out = Factorization {
        sign: if n.sign() == Sign::Minus { -1 } else { 1 },
        factors: Vec::new(),
    };
    let mut m = n.magnitude().clone();
    if let Some(mut small) = m.to_u64() {
        for &p in trial_primes(cfg.trial_bound) {
            if p * p > small {
                break;
            }
            let mut e = 0;
            while small % p == 0 {
                small /= p;
                e += 1;
            }
            if e > 0 {
                out.push(Natural::from(p), e);
            }
        }
        m = Natural::from(small);
    } else {
        for &p in trial_primes(cfg.trial_bound) {
            let pb = Natural::from(p);
            if &pb * &pb > m {
                break;
            }
            let mut e = 0;
            loop {
                let (quot, rem) = m.div_rem(&pb);
                if !rem.is_zero() {
                    break;
                }
                m = quot;
                e += 1;
            }
            if e > 0 {
                out.push(pb, e);
            }
        }
    }
    if m.is_one() {
        return Ok(out);
    }
    let b = Natural::from(cfg.trial_bound);
    if m <= &b * &b {
        // no factor up to the trial bound, so m is prime
        out.push(m, 1);
        return Ok(out);
    }
    let mut stack = vec![m];
    while let Some(c) = stack.pop() {
        if c.is_one() {
            continue;
        }
        if is_prime(&c).map_err(|_| Error::FactorizationTooLarge(n.to_string()))? {
            out.push(c, 1);
            continue;
        }
        if let Some(r) = sqrt_exact(&c) {
            stack.push(r.clone());
            stack.push(r);
            continue;
        }
        let d = (1u64..=8)
            .find_map(|k| pollard_brent(&c, k, cfg.rho_iterations))
            .ok_or_else(|| Error::FactorizationTooLarge(n.to_string()))?;
        let rest = &c / &d;
        stack.push(d);
        stack.push(rest);
    }
    Ok(out)
}

/// Brent's variant of Pollard rho with `x -> x^2 + c`. Returns a proper
/// divisor or `None` when the cycle closes or the iteration cap is hit.
fn pollard_brent(n: &Natural, c: u64, max_iter: u64) -> Option<Natural> {
    let c = Natural::from(c);
    let f = |x: &Natural| (x * x + &c) % n;
    let one = Natural::one();
    let mut y = Natural::from(2u32);
    let mut r: u64 = 1;
    let mut q = one.clone();
    let mut g = one.clone();
    let mut x = y.clone();
    let mut ys = y.clone();
    let batch = 64;
    let mut iters = 0u64;
    while g.is_one() {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        let mut k = 0;
        while k < r && g.is_one() {
            ys = y.clone();
            for _ in 0..batch.min(r - k) {
                y = f(&y);
                let diff = if x > y { &x - &y } else { &y - &x };
                q = (q * diff) % n;
            }
            g = q.gcd(n);
            k += batch;
            iters += batch;
            if iters > max_iter {
                return None;
            }
        }
        r *= 2;
    }
    if &g == n {
        loop {
            ys = f(&ys);
            let diff = if x > ys { &x - &ys } else { &ys - &x };
            g = diff.gcd(n);
            if !g.is_one() {
                break;
            }
        }
    }
    (&g != n).then_some(g)
}

/// Jacobi symbol `(a|n)` for odd positive `n`.
fn jacobi(a: &Integer, n: &Natural) -> i8 {
    let mut a = a.mod_floor(&Integer::from(n.clone())).magnitude().clone();
    let mut n = n.clone();
    let mut t = 1i8;
    while !a.is_zero() {
        let z = a.trailing_zeros().unwrap_or(0);
        a >>= z;
        let n8 = (&n % 8u32).to_u32().unwrap();
        if z % 2 == 1 && (n8 == 3 || n8 == 5) {
            t = -t;
        }
        std::mem::swap(&mut a, &mut n);
        if (&a % 4u32).to_u32() == Some(3) && (&n % 4u32).to_u32() == Some(3) {
            t = -t;
        }
        a %= &n;
    }
    if n.is_one() {
        t
    } else {
        0
    }
}

/// Kronecker symbol `(a|n)`.
pub fn kronecker(a: &Integer, n: &Integer) -> i8 {
    if n.is_zero() {
        return if a.abs().is_one() { 1 } else { 0 };
    }
    let mut t = 1i8;
    if n.is_negative() && a.is_negative() {
        t = -t;
    }
    let mut m = n.magnitude().clone();
    let v = m.trailing_zeros().unwrap_or(0);
    if v > 0 {
        if a.is_even() {
            return 0;
        }
        let a8 = a.mod_floor(&Integer::from(8)).to_u8().unwrap();
        if v % 2 == 1 && (a8 == 3 || a8 == 5) {
            t = -t;
        }
        m >>= v;
    }
    t * jacobi(a, &m)
}

/// `Some(m)` with `m^2 = n`, or `None`.
pub fn sqrt_exact(n: &Natural) -> Option<Natural> {
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// 2-adic (or any `p`-adic) valuation of a nonzero natural number.
pub fn valuation(n: &Natural, p: &Natural) -> u32 {
    debug_assert!(!n.is_zero());
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (quot, rem) = n.div_rem(p);
        if !rem.is_zero() {
            return v;
        }
        n = quot;
        v += 1;
    }
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: &Integer, m: &Integer) -> Option<Integer> {
    let e = a.mod_floor(m).extended_gcd(m);
    e.gcd.is_one().then(|| e.x.mod_floor(m))
}

/// Smallest `r` in `[0, p/2]` with `r^2 = a mod p` for an odd prime `p`
/// (Tonelli-Shanks), or `None` when `a` is a non-residue.
pub fn sqrt_mod_prime(a: &Integer, p: &Natural) -> Option<Natural> {
    let pi = Integer::from(p.clone());
    let a = a.mod_floor(&pi).magnitude().clone();
    if a.is_zero() {
        return Some(Natural::zero());
    }
    let one = Natural::one();
    let p1 = p - &one;
    let half = &p1 >> 1;
    if a.modpow(&half, p) != one {
        return None;
    }
    let s = p1.trailing_zeros().unwrap_or(0);
    let qodd = &p1 >> s;
    let mut z = Natural::from(2u32);
    while z.modpow(&half, p) == one {
        z += 1u32;
    }
    let mut m = s;
    let mut c = z.modpow(&qodd, p);
    let mut t = a.modpow(&qodd, p);
    let mut r = a.modpow(&((&qodd + &one) >> 1), p);
    while !t.is_one() {
        let mut i = 0;
        let mut t2 = t.clone();
        while !t2.is_one() {
            t2 = (&t2 * &t2) % p;
            i += 1;
        }
        let b = c.modpow(&(Natural::one() << (m - i - 1)), p);
        r = (r * &b) % p;
        c = (&b * &b) % p;
        t = (t * &c) % p;
        m = i;
    }
    let other = p - &r;
    Some(r.min(other))
}

/// Lift a simple root `r` of `x^2 = a mod p` (odd prime `p`, `p` not
/// dividing `a`) to the unique root modulo `p^e` congruent to `r`.
pub fn hensel_sqrt_lift(a: &Integer, p: &Natural, r: &Natural, e: u32) -> Natural {
    let mut modulus = Integer::from(p.clone());
    let target = Integer::from(p.pow(e));
    let mut x = Integer::from(r.clone());
    while modulus < target {
        modulus = (&modulus * &modulus).min(target.clone());
        let fx = (&x * &x - a).mod_floor(&modulus);
        let inv = mod_inverse(&(Integer::from(2) * &x), &modulus)
            .expect("root must be simple for Hensel lifting");
        x = (x - fx * inv).mod_floor(&modulus);
    }
    x.magnitude().clone()
}
