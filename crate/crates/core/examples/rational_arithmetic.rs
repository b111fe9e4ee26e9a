// Primality, factorization and the Kronecker symbol over Z.
//
// $ cargo run --example rational_arithmetic

use num_bigint::BigInt;
use quadtwist::arith::{self, FactorConfig};

fn main() -> quadtwist::Result<()> {
    let n: BigInt = "147573952589676412927".parse().unwrap(); // 2^67 - 1
    let f = arith::factorize(&n, &FactorConfig::default())?;
    let parts: Vec<String> = f
        .factors
        .iter()
        .map(|p| format!("{}^{}", p.prime, p.exponent))
        .collect();
    println!("{n} = {}", parts.join(" * "));

    for p in [3u64, 5, 11, 13, 19, 29] {
        let k = arith::kronecker(&BigInt::from(-7), &BigInt::from(p));
        println!("(-7 | {p}) = {k:+}");
    }
    println!(
        "is_prime(2^61 - 1) = {}",
        arith::is_prime_u64((1 << 61) - 1)
    );
    Ok(())
}
