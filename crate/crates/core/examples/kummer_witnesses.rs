// Kummer generators alpha_i with (alpha_i) = a_i^h' and alpha_i = 1 mod (p*)^2,
// multiplying to (-sqrt(-q) R)^h'.
//
// $ cargo run --example kummer_witnesses
// q = 7, R = 741, h' = 1
//   alpha_1 = -3 ...

use quadtwist::qfield::QuadField;
use quadtwist::twistlab;
use quadtwist::{Config, Error};

fn main() -> quadtwist::Result<()> {
    let cfg = Config::default();
    for (q, r) in [(7, 741), (7, 1), (23, 5), (71, -3), (7, -11)] {
        let k = QuadField::new(q)?;
        let r = k.int(r);
        let w = match twistlab::construct_witnesses(&k, &r, &cfg) {
            Ok(w) => w,
            Err(e @ Error::NotApplicable(_)) => {
                println!("q = {q}, R = {r}: {e}\n");
                continue;
            }
            Err(e) => return Err(e),
        };
        println!("q = {q}, R = {r}, h' = {}", w.h_prime);
        for (i, (alpha, prime)) in w.alphas.iter().zip(&w.supports).enumerate() {
            println!("  alpha_{} = {alpha}   on {prime}", i + 1);
        }
        let check = twistlab::verify_witnesses(&k, &r, &w, &cfg)?;
        println!("  verified: {}\n", check.passed());
    }
    Ok(())
}
