//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde_json::Value;

use quadtwist::arith::{is_prime_u64, kronecker};
use quadtwist::dyadic::{self, verify_norm_surjectivity};
use quadtwist::iwasawa;
use quadtwist::qfield::{self, QuadField};
use quadtwist::twistlab::{self, CaseLabel};
use quadtwist::{Config, Error};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn primes_in_class(modulus: u64, residue: u64, below: u64) -> impl Iterator<Item = u64> {
    (residue..below)
        .step_by(modulus as usize)
        .filter(|&q| is_prime_u64(q))
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:.2?}, limit {limit:?}"))
}

fn ac1() -> Check {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_quadtwist"))
        .args(["lambda", "--q", "7", "--R", "741", "--json"])
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(out.status.success(), || {
        format!("exit status {}", out.status)
    })?;
    let doc: Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let l = &doc["results"]["lambda"];
    let s = &doc["results"]["selmer"];
    let got = [
        &l["s_inf"],
        &l["lambda_f"],
        &l["lambda_fprime"],
        &l["lambda_j"],
        &s["corank_f_inf"],
        &s["corank_j_inf"],
    ];
    let want = ["4", "3", "4", "7", "3", "7"];
    ensure(
        got.iter().zip(want).all(|(g, w)| g.as_str() == Some(w)),
        || format!("got {got:?}"),
    )?;
    ensure(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:.2?}")
    })?;
    Ok(format!(
        "s_inf=4 lambda=(3,4,7) coranks=(3,7) in {elapsed:.2?}"
    ))
}

fn ac2() -> Check {
    let start = Instant::now();
    let cfg = Config::default();
    let mut n = 0;
    for q in primes_in_class(16, 7, 2000) {
        let k = QuadField::new(q).map_err(|e| e.to_string())?;
        let r =
            iwasawa::lambda_invariants(&k, &k.one(), &cfg).map_err(|e| format!("q={q}: {e}"))?;
        ensure(
            r.lambda_f == 0u32.into() && r.lambda_j == Some(1u32.into()),
            || format!("q={q}: lambda_F={} lambda_J={:?}", r.lambda_f, r.lambda_j),
        )?;
        n += 1;
    }
    within(Duration::from_secs(30), start)?;
    Ok(format!(
        "{n} fields, lambda_F=0 and lambda_J=1, {:.2?}",
        start.elapsed()
    ))
}

fn ac3() -> Check {
    let cfg = Config::default();
    let mut n = 0;
    for q in primes_in_class(32, 15, 2000) {
        let k = QuadField::new(q).map_err(|e| e.to_string())?;
        let (s, _) = iwasawa::s_infinity(&k, &k.one(), &cfg).map_err(|e| format!("q={q}: {e}"))?;
        let c =
            twistlab::classify_rank_one(&k, &BigInt::from(1), &cfg).map_err(|e| e.to_string())?;
        ensure(s == 2u32.into() && c.case == CaseLabel::CaseI, || {
            format!("q={q}: s_inf={s}, {}", c.case)
        })?;
        n += 1;
    }
    Ok(format!("{n} fields with s_inf(1)=2 and case_i"))
}

/// Reduced forms of discriminant `-q` by scanning every `(a, b)` with
/// `a <= sqrt(q/3)` and `|b| <= a`.
fn reduced_forms_oracle(q: i64) -> u64 {
    let mut h = 0;
    let mut a = 1i64;
    while 3 * a * a <= q {
        for b in -a..=a {
            let num = b * b + q;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            let boundary = b.abs() == a || a == c;
            if c >= a && (!boundary || b >= 0) {
                h += 1;
            }
        }
        a += 1;
    }
    h
}

/// `h = -(1/q) sum_{n<q} n (-q|n)`.
fn dirichlet_class_number(q: u64) -> u64 {
    let qi = BigInt::from(q);
    let s: i64 = (1..q)
        .map(|n| n as i64 * kronecker(&BigInt::from(n), &qi) as i64)
        .sum();
    (-s / q as i64) as u64
}

fn ac4() -> Check {
    let mut n = 0;
    for q in primes_in_class(8, 7, 10_000) {
        let h = qfield::class_number(q);
        ensure(h % 2 == 1, || format!("h({q}) = {h} is even"))?;
        ensure(h == dirichlet_class_number(q), || {
            format!("h({q}) = {h} disagrees with Dirichlet")
        })?;
        n += 1;
    }
    for (q, h) in [(7u64, 1u64), (23, 3), (31, 3), (47, 5), (71, 7)] {
        let got = qfield::class_number(q);
        let oracle = reduced_forms_oracle(q as i64);
        ensure(got == h && oracle == h, || {
            format!("h({q}): got {got}, oracle {oracle}, expected {h}")
        })?;
    }
    Ok(format!(
        "{n} odd class numbers; spot values 1,3,3,5,7 match the oracle"
    ))
}

/// Every root of `x^2 = -q mod 2^j` grown one bit at a time; returns the
/// unique one `= 1 mod 4` modulo `2^k`.
fn residue_chain(q: u64, k: u32) -> Option<u64> {
    let m = |j: u32| 1u128 << j;
    let target = |j: u32| (m(j) - (q as u128 % m(j))) % m(j);
    let mut roots: Vec<u128> = (0..8).filter(|x| x * x % 8 == target(3)).collect();
    for j in 3..=k {
        roots = roots
            .iter()
            .flat_map(|&r| [r, r + m(j)])
            .filter(|x| x * x % m(j + 1) == target(j + 1))
            .collect();
    }
    let mut low: Vec<u64> = roots
        .iter()
        .map(|r| (r % m(k)) as u64)
        .filter(|r| r % 4 == 1)
        .collect();
    low.sort_unstable();
    low.dedup();
    (low.len() == 1).then(|| low[0])
}

fn ac5() -> Check {
    let mut n = 0;
    for q in primes_in_class(8, 7, 1000) {
        let s = dyadic::sqrt_minus_q(q, 20).map_err(|e| e.to_string())?;
        let oracle = residue_chain(q, 20).ok_or_else(|| format!("q={q}: chain not unique"))?;
        ensure(s.low_bits(20) == oracle, || {
            format!("q={q}: {} vs oracle {oracle}", s.low_bits(20))
        })?;
        let k = QuadField::new(q).map_err(|e| e.to_string())?;
        let ord = dyadic::embed(&k.sqrt_minus_q(), 64)
            .and_then(|x| x.sub_int(1).ord2())
            .map_err(|e| e.to_string())?;
        let expected = (q + 1).trailing_zeros() - 1;
        ensure(ord == expected, || {
            format!("q={q}: ord {ord}, expected {expected}")
        })?;
        n += 1;
    }
    Ok(format!(
        "{n} fields: root mod 2^20 matches the residue chain; ord_2(s-1) = ord_2(q+1)-1"
    ))
}

fn ac6() -> Check {
    let cfg = Config::default();
    let mut checked = 0;
    let mut skipped = Vec::new();
    for q in [7u64, 23, 31] {
        let k = QuadField::new(q).map_err(|e| e.to_string())?;
        if q % 16 != 7 {
            // the identity only concerns q = 7 mod 16; check it is refused
            let r = iwasawa::lambda_invariants(&k, &k.one(), &cfg).map_err(|e| e.to_string())?;
            ensure(
                iwasawa::rank_identity_check(&r) == Err(Error::InapplicableCongruence(q)),
                || format!("q={q}: rank identity not refused"),
            )?;
            skipped.push(q);
            continue;
        }
        for item in twistlab::enumerate_twists(&k, 500, &cfg).map_err(|e| e.to_string())? {
            let item = item.map_err(|e| e.to_string())?;
            let Some(report) = item.lambda else { continue };
            let ok = iwasawa::rank_identity_check(&report).map_err(|e| e.to_string())?;
            let fp = report.lambda_fprime.clone().unwrap();
            ensure(ok && report.lambda_j == Some(&report.lambda_f + fp), || {
                format!("q={q} R={}", item.r)
            })?;
            checked += 1;
        }
    }
    Ok(format!("{checked} twists satisfy lambda_J = lambda_F + lambda_F'; q in {skipped:?} is 15 mod 16 and refused"))
}

fn ac7() -> Check {
    let mut n = 0;
    for q in primes_in_class(8, 7, 10_000) {
        let k = QuadField::new(q).map_err(|e| e.to_string())?;
        let r = twistlab::ray_class_order(&k);
        ensure(r.order % 2 == 1 && r.order == k.class_number(), || {
            format!("q={q}: {r:?}")
        })?;
        n += 1;
    }
    Ok(format!(
        "{n} fields: ray class order mod (p*)^2 odd and equal to h"
    ))
}

fn ac8() -> Check {
    let start = Instant::now();
    let mut n = 0;
    for d in 1..=4 {
        for m in [2u32, 3, 4] {
            let r = verify_norm_surjectivity(d, m, m + 6).map_err(|e| e.to_string())?;
            ensure(r.surjective && r.image_contained, || {
                format!("d={d} m={m} not surjective")
            })?;
            n += 1;
        }
    }
    within(Duration::from_secs(10), start)?;
    Ok(format!(
        "{n} (d, m) pairs surjective mod 2^(m+6), {:.2?}",
        start.elapsed()
    ))
}

fn ac9() -> Check {
    let cfg = Config::default();
    let mut passed = Vec::new();
    let required = [(7u64, BigInt::from(741)), (7, BigInt::from(1))];
    let mut pairs: Vec<(u64, BigInt)> = required.to_vec();
    for q in [7u64, 23, 71, 103] {
        let k = QuadField::new(q).map_err(|e| e.to_string())?;
        for r in twistlab::twist_candidates(&k, 200, &cfg).map_err(|e| e.to_string())? {
            pairs.push((q, r));
        }
    }
    for (q, r) in &pairs {
        let k = QuadField::new(*q).map_err(|e| e.to_string())?;
        let elem = k.int(r.clone());
        match twistlab::construct_witnesses(&k, &elem, &cfg) {
            Ok(w) => {
                let c =
                    twistlab::verify_witnesses(&k, &elem, &w, &cfg).map_err(|e| e.to_string())?;
                ensure(c.passed(), || format!("q={q} R={r}: {:?}", c.failures))?;
                passed.push((*q, r.clone()));
            }
            Err(Error::NotApplicable(_)) => {}
            Err(e) => return Err(format!("q={q} R={r}: {e}")),
        }
    }
    for (q, r) in &required {
        ensure(passed.contains(&(*q, r.clone())), || {
            format!("({q}, {r}) not constructed")
        })?;
    }
    ensure(passed.len() >= 25, || {
        format!("only {} applicable pairs", passed.len())
    })?;
    let k = QuadField::new(7).unwrap();
    let na = twistlab::construct_witnesses(&k, &k.int(-11), &cfg);
    ensure(matches!(na, Err(Error::NotApplicable(_))), || {
        format!("(7, -11) gave {na:?}")
    })?;
    Ok(format!(
        "{} applicable pairs pass all five checks; (7, -11) not applicable",
        passed.len()
    ))
}

fn ac10() -> Check {
    let cfg = Config::default();
    let mut n = 0;
    for q in [7u64, 23, 31, 47] {
        let k = QuadField::new(q).map_err(|e| e.to_string())?;
        for item in twistlab::enumerate_twists(&k, 500, &cfg).map_err(|e| e.to_string())? {
            let item = item.map_err(|e| e.to_string())?;
            let s = item.lambda.as_ref().map(|l| l.s_inf.to_u64().unwrap());
            ensure(
                (item.case.case != CaseLabel::None) == (s == Some(2)),
                || format!("q={q} R={}: s_inf={s:?} case={}", item.r, item.case.case),
            )?;
            n += 1;
        }
    }
    for (q, r, want) in [
        (47u64, 1i64, CaseLabel::CaseI),
        (23, 5, CaseLabel::CaseIi),
        (7, -3, CaseLabel::CaseIii),
    ] {
        let k = QuadField::new(q).unwrap();
        let got = twistlab::classify_rank_one(&k, &BigInt::from(r), &cfg)
            .map_err(|e| e.to_string())?
            .case;
        ensure(got == want, || {
            format!("({q}, {r}) -> {got}, expected {want}")
        })?;
    }
    Ok(format!(
        "{n} twists: case != none exactly when s_inf = 2; fixtures match"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("worked example R = 741", ac1),
        ("R = 1 has rank one over J_inf, q = 7 mod 16", ac2),
        ("case (i) for q = 15 mod 32", ac3),
        ("class number parity and spot values", ac4),
        ("Hensel root against residue chain", ac5),
        ("rank identity over scans", ac6),
        ("ray class order odd and equal to h", ac7),
        ("local norm surjectivity", ac8),
        ("witness round-trip", ac9),
        ("classifier iff s_inf = 2", ac10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("AC{:<2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("AC{:<2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} acceptance criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
