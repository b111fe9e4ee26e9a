//! 2-adic integers at explicit finite precision.
//!
//! A [`Dyadic`] is a residue modulo `2^k`. The embedding `iota_p` sends
//! `sqrt(-q)` to the 2-adic root `s` of `-q` with `s = 1 mod 4`; the conjugate
//! embedding `iota_p*` sends it to `-s`.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer as _;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::qfield::QuadElem;
use crate::{Config, Error, Result};

/// Bits of headroom required between a reported valuation and the precision.
pub const GUARD_BITS: u32 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dyadic {
    #[serde(with = "crate::serde_num::nat")]
    residue: BigUint,
    precision: u32,
}

fn mask(k: u32) -> BigUint {
    (BigUint::one() << k) - 1u32
}

impl Dyadic {
    /// Reduce an integer modulo `2^precision`.
    pub fn new(value: &BigInt, precision: u32) -> Self {
        let m = BigInt::one() << precision;
        let r = value.mod_floor(&m);
        Dyadic {
            residue: r.magnitude().clone(),
            precision,
        }
    }

    pub fn from_residue(residue: BigUint, precision: u32) -> Self {
        Dyadic {
            residue: residue & mask(precision),
            precision,
        }
    }

    pub fn residue(&self) -> &BigUint {
        &self.residue
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Residue modulo `2^bits` (`bits` at most the precision).
    pub fn low_bits(&self, bits: u32) -> u64 {
        debug_assert!(bits <= 64 && bits <= self.precision);
        let r = &self.residue & mask(bits);
        r.iter_u64_digits().next().unwrap_or(0)
    }

    pub fn truncate(&self, precision: u32) -> Self {
        let k = precision.min(self.precision);
        Dyadic::from_residue(self.residue.clone(), k)
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        let k = self.precision.min(other.precision);
        Dyadic::from_residue(&self.residue + &other.residue, k)
    }

    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        let k = self.precision.min(other.precision);
        let m = BigUint::one() << k;
        let a = &self.residue & mask(k);
        let b = &other.residue & mask(k);
        Dyadic::from_residue(a + &m - b, k)
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        let k = self.precision.min(other.precision);
        Dyadic::from_residue(&self.residue * &other.residue, k)
    }

    pub fn neg(&self) -> Dyadic {
        Dyadic::new(&-BigInt::from(self.residue.clone()), self.precision)
    }

    pub fn sub_int(&self, v: i64) -> Dyadic {
        self.sub(&Dyadic::new(&BigInt::from(v), self.precision))
    }

    /// Exact division by 2; one bit of precision is spent.
    pub fn half(&self) -> Result<Dyadic> {
        if self.precision < 2 || self.residue.is_odd() {
            return Err(Error::PrecisionExhausted(self.precision));
        }
        Ok(Dyadic {
            residue: &self.residue >> 1u32,
            precision: self.precision - 1,
        })
    }

    /// 2-adic valuation, trusted only when it sits at least [`GUARD_BITS`]
    /// below the precision.
    pub fn ord2(&self) -> Result<u32> {
        match self.residue.trailing_zeros() {
            Some(v) if (v as u32) + GUARD_BITS < self.precision => Ok(v as u32),
            _ => Err(Error::PrecisionExhausted(self.precision)),
        }
    }
}

/// The 2-adic square root `s` of `-q` normalized by `s = 1 mod 4`,
/// truncated modulo `2^k`.
///
/// Roots of `x^2 = -q mod 2^j` only pin `s` down modulo `2^(j-1)`, so the
/// lift runs one bit past `k`. From a root `r` mod `2^j` (`j >= 3`) exactly
/// one of `r`, `r + 2^(j-1)` is a root mod `2^(j+1)`.
pub fn sqrt_minus_q(q: u64, k: u32) -> Result<Dyadic> {
    if q % 8 != 7 {
        return Err(Error::InvalidInput(format!(
            "-{q} is not a 2-adic square with q = 7 mod 8"
        )));
    }
    let target = k.max(2) + 1;
    let minus_q = BigInt::from(-(q as i128));
    let mut r = BigUint::one();
    for j in 3..target {
        let modulus = BigInt::one() << (j + 1);
        let sq = BigInt::from(&r * &r);
        if !(sq - &minus_q).mod_floor(&modulus).is_zero() {
            r += BigUint::one() << (j - 1);
        }
    }
    Ok(Dyadic::from_residue(r, k))
}

fn embed_with_root(x: &QuadElem, k: u32, negate_root: bool) -> Result<Dyadic> {
    if k < 2 {
        return Err(Error::PrecisionExhausted(k));
    }
    let s = sqrt_minus_q(x.q(), k)?;
    let s = if negate_root { s.neg() } else { s };
    let a = Dyadic::new(x.a(), k);
    let b = Dyadic::new(x.b(), k);
    a.add(&b.mul(&s)).half()
}

/// `iota_p((a + b sqrt(-q))/2) = (a + b s)/2` with `s` taken at precision `k`;
/// the result has precision `k - 1`.
pub fn embed(x: &QuadElem, k: u32) -> Result<Dyadic> {
    embed_with_root(x, k, false)
}

/// The conjugate embedding `iota_p*`, sending `sqrt(-q)` to `-s`.
pub fn embed_star(x: &QuadElem, k: u32) -> Result<Dyadic> {
    embed_with_root(x, k, true)
}

/// `iota(x) mod 4` for an element that is a unit at the chosen dyadic prime.
pub(crate) fn residue_mod4(x: &QuadElem, star: bool) -> u64 {
    embed_with_root(x, 3, star)
        .expect("precision 3 suffices")
        .low_bits(2)
}

/// Run `f` at precision `cfg.initial_precision`, doubling on
/// [`Error::PrecisionExhausted`] up to `cfg.precision_cap`. Returns the value
/// and the precision that succeeded.
pub fn with_adaptive_precision<T>(
    cfg: &Config,
    mut f: impl FnMut(u32) -> Result<T>,
) -> Result<(T, u32)> {
    let mut k = cfg
        .initial_precision
        .max(GUARD_BITS + 2)
        .min(cfg.precision_cap);
    loop {
        match f(k) {
            Err(Error::PrecisionExhausted(_)) if k < cfg.precision_cap => {
                k = (k * 2).min(cfg.precision_cap);
            }
            Err(Error::PrecisionExhausted(_)) => return Err(Error::PrecisionExhausted(k)),
            other => return other.map(|v| (v, k)),
        }
    }
}

/// Irreducibility over `F_2` of a polynomial given as a bit mask
/// (bit `i` is the coefficient of `x^i`), by trial division with every
/// polynomial of degree at most half its own.
pub fn is_irreducible_mod2(poly: u32) -> bool {
    let deg = 31 - poly.leading_zeros() as i32;
    if poly == 0 || deg < 1 {
        return false;
    }
    let rem = |mut a: u32, b: u32| {
        let db = 31 - b.leading_zeros() as i32;
        while a != 0 && (31 - a.leading_zeros() as i32) >= db {
            let shift = (31 - a.leading_zeros() as i32) - db;
            a ^= b << shift;
        }
        a
    };
    (2u32..(1 << (deg / 2 + 1))).all(|g| rem(poly, g) != 0)
}

/// `Z_2[x]/(f)` modulo `2^k` for a monic `f` irreducible modulo 2, i.e. the
/// ring of integers of the unramified extension of `Q_2` of degree `deg f`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnramifiedExt {
    /// Coefficients of `f` from `x^0` up to the leading 1.
    modulus: Vec<u64>,
    precision: u32,
}

pub const MAX_EXT_DEGREE: usize = 4;

impl UnramifiedExt {
    /// Uses the smallest (as a bit mask) irreducible polynomial of the degree.
    pub fn new(degree: usize, precision: u32) -> Result<Self> {
        if !(1..=MAX_EXT_DEGREE).contains(&degree) {
            return Err(Error::InvalidInput(format!(
                "degree {degree} outside 1..=4"
            )));
        }
        let poly = (1u32 << degree..1u32 << (degree + 1))
            .find(|&p| is_irreducible_mod2(p))
            .expect("irreducible polynomials exist in every degree");
        let coeffs = (0..=degree).map(|i| ((poly >> i) & 1) as u64).collect();
        Self::with_modulus(coeffs, precision)
    }

    pub fn with_modulus(modulus: Vec<u64>, precision: u32) -> Result<Self> {
        let degree = modulus.len().saturating_sub(1);
        if !(1..=MAX_EXT_DEGREE).contains(&degree) || modulus[degree] != 1 {
            return Err(Error::InvalidInput(
                "modulus must be monic of degree 1..=4".into(),
            ));
        }
        if precision == 0 || precision > 63 {
            return Err(Error::InvalidInput(format!(
                "precision {precision} outside 1..=63"
            )));
        }
        let bits = modulus
            .iter()
            .enumerate()
            .fold(0u32, |acc, (i, c)| acc | (((c & 1) as u32) << i));
        if !is_irreducible_mod2(bits) {
            return Err(Error::InvalidInput("modulus is reducible mod 2".into()));
        }
        Ok(UnramifiedExt { modulus, precision })
    }

    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    fn reduce(&self, v: u64) -> u64 {
        v & ((1u64 << self.precision) - 1)
    }

    /// `x * elem` in the power basis.
    fn shift(&self, elem: &[u64]) -> Vec<u64> {
        let d = self.degree();
        let top = elem[d - 1];
        let mut out = vec![0u64; d];
        for i in (1..d).rev() {
            out[i] = elem[i - 1];
        }
        for (i, c) in out.iter_mut().enumerate() {
            *c = self.reduce(c.wrapping_sub(top.wrapping_mul(self.modulus[i])));
        }
        out
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let d = self.degree();
        let mut acc = vec![0u64; d];
        let mut power = a.to_vec();
        for &bj in b {
            for i in 0..d {
                acc[i] = self.reduce(acc[i].wrapping_add(power[i].wrapping_mul(bj)));
            }
            power = self.shift(&power);
        }
        acc
    }

    /// Norm down to `Z_2 / 2^k`: the determinant of multiplication by `elem`
    /// on the power basis, expanded over permutations.
    pub fn norm(&self, elem: &[u64]) -> u64 {
        let d = self.degree();
        let mut cols = Vec::with_capacity(d);
        let mut c = elem.to_vec();
        for _ in 0..d {
            cols.push(c.clone());
            c = self.shift(&c);
        }
        let mut det = 0u64;
        for (perm, sign) in permutations(d) {
            let term = perm
                .iter()
                .enumerate()
                .fold(1u64, |acc, (j, &i)| acc.wrapping_mul(cols[j][i]));
            det = if sign {
                det.wrapping_add(term)
            } else {
                det.wrapping_sub(term)
            };
        }
        self.reduce(det)
    }
}

/// All permutations of `0..n` with their parity (`true` = even).
fn permutations(n: usize) -> Vec<(Vec<usize>, bool)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out.into_iter()
        .map(|p| {
            let inversions = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .filter(|&(i, j)| p[i] > p[j])
                .count();
            (p, inversions % 2 == 0)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormPreimage {
    /// Class `1 + 2^m t` modulo `2^k`, stored as its residue.
    pub target: u64,
    /// Power-basis coordinates of an element of `1 + 2^m O` with that norm.
    pub preimage: Option<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormSurjectivityReport {
    pub degree: usize,
    pub m: u32,
    pub precision: u32,
    pub modulus: Vec<u64>,
    /// Every norm of `1 + 2^m O` landed in `1 + 2^m Z_2`.
    pub image_contained: bool,
    pub surjective: bool,
    pub points_examined: u64,
    pub preimages: Vec<NormPreimage>,
}

/// Checks that the norm from the degree-`d` unramified extension maps
/// `1 + 2^m O` onto `1 + 2^m Z_2` modulo `2^k` by enumerating
/// `1 + 2^m y` for `y` over `O / 2^(k-m)`. Enumeration stops as soon as every
/// target class has a preimage.
pub fn verify_norm_surjectivity(degree: usize, m: u32, k: u32) -> Result<NormSurjectivityReport> {
    if !(1..=MAX_EXT_DEGREE).contains(&degree) || m < 2 || k < m + 2 || k > m + 8 {
        return Err(Error::InvalidInput(format!(
            "need 1 <= d <= 4, m >= 2, m + 2 <= k <= m + 8 (got d = {degree}, m = {m}, k = {k})"
        )));
    }
    let ext = UnramifiedExt::new(degree, k)?;
    let width = k - m;
    let classes = 1usize << width;
    let mut preimages: Vec<Option<Vec<u64>>> = vec![None; classes];
    let mut found = 0usize;
    let mut contained = true;
    let total: u64 = 1u64 << (width as usize * degree);
    let mut examined = 0u64;
    for t in 0..total {
        examined += 1;
        // bit b of coordinate i is bit b*d + i of t, so every coordinate
        // moves at each 2-adic level
        let elem: Vec<u64> = (0..degree)
            .map(|i| {
                let y =
                    (0..width).fold(0u64, |y, b| y | ((t >> (b as usize * degree + i)) & 1) << b);
                let base = if i == 0 { 1 } else { 0 };
                ext.reduce(base + (y << m))
            })
            .collect();
        let n = ext.norm(&elem);
        if n & ((1u64 << m) - 1) != 1 {
            contained = false;
            continue;
        }
        let class = (n >> m) as usize;
        if preimages[class].is_none() {
            preimages[class] = Some(elem);
            found += 1;
            if found == classes {
                break;
            }
        }
    }
    Ok(NormSurjectivityReport {
        degree,
        m,
        precision: k,
        modulus: ext.modulus.clone(),
        image_contained: contained,
        surjective: found == classes && contained,
        points_examined: examined,
        preimages: preimages
            .into_iter()
            .enumerate()
            .map(|(t, preimage)| NormPreimage {
                target: 1 + ((t as u64) << m),
                preimage,
            })
            .collect(),
    })
}
