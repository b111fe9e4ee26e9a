// How a rational prime decomposes in K and then in the Z_2-extension K_inf.
//
// $ cargo run --example splitting_counts -- 7 11
// 11 is split in Q(sqrt(-7))
//   (11, sqrt(-7) - 2)  ord 2  count 1
//   (11, sqrt(-7) - 9)  ord 3  count 2

use num_bigint::BigUint;
use quadtwist::iwasawa;
use quadtwist::qfield::{PrimeKind, QuadField};
use quadtwist::Config;

fn main() -> quadtwist::Result<()> {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<u64>().expect("usage: splitting_counts [q] [ell]"));
    let q = args.next().unwrap_or(7);
    let ell = args.next().unwrap_or(11);

    let k = QuadField::new(q)?;
    let splitting = k.splitting_type(&BigUint::from(ell))?;
    println!("{ell} is {} in Q(sqrt(-{q}))", splitting.label());
    for prime in splitting.primes() {
        if prime.kind == PrimeKind::DyadicP {
            println!("  {prime}  totally ramified in K_inf");
            continue;
        }
        let e = iwasawa::primes_above_in_kinf(&k, &prime, &Config::default())?;
        println!("  {prime}  ord {}  count {}", e.ord, e.count);
    }
    Ok(())
}
