// Prime ideals, factorizations and generators in the maximal order of Q(sqrt(-q)).
//
// $ cargo run --example ideal_factorization

use quadtwist::qfield::{PrimeKind, QuadField};
use quadtwist::Config;

fn main() -> quadtwist::Result<()> {
    let cfg = Config::default();
    let k = QuadField::new(23)?;

    let x = k.elem(6, 4)?; // 3 + 2 sqrt(-23)
    println!("N({x}) = {}", x.norm());
    println!("({x}) = {}", k.factor_ideal(&x, &PrimeKind::ALL, &cfg)?);
    println!(
        "(741) = {}",
        k.factor_ideal(&k.int(741), &PrimeKind::ALL, &cfg)?
    );

    // p* is not principal in Q(sqrt(-23)), but p*^3 is
    let pstar = k.prime_pstar();
    for e in 1..=3 {
        match k.generator_of_power(&pstar, e, &cfg) {
            Ok(g) => println!("{pstar}^{e} = ({g})"),
            Err(err) => println!("{pstar}^{e}: {err}"),
        }
    }
    Ok(())
}
