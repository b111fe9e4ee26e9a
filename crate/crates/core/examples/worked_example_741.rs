// s_inf, lambda-invariants and Selmer coranks for K = Q(sqrt(-7)), R = 741 = 3 * 13 * 19.
//
// $ cargo run --example worked_example_741
// s_inf = 4, lambda_F = 3, lambda_F' = 4, lambda_J = 7

use quadtwist::iwasawa::{self, SelmerReport};
use quadtwist::qfield::QuadField;
use quadtwist::Config;

fn main() -> quadtwist::Result<()> {
    let cfg = Config::default();
    let k = QuadField::new(7)?;
    let report = iwasawa::lambda_invariants(&k, &k.int(741), &cfg)?;

    for e in &report.entries {
        println!(
            "{:<12} generator {:<6} ord {}  -> {} prime(s) of K_inf",
            e.prime.to_string(),
            e.generator.to_string(),
            e.ord,
            e.count
        );
    }
    println!(
        "s_inf = {}, lambda_F = {}, lambda_F' = {}, lambda_J = {}",
        report.s_inf,
        report.lambda_f,
        report.lambda_fprime.as_ref().unwrap(),
        report.lambda_j.as_ref().unwrap()
    );

    let selmer = SelmerReport::from_lambda(&report);
    println!("{}", selmer.identity_f);
    println!("{}", selmer.identity_j.unwrap());
    println!(
        "rank identity holds: {}",
        iwasawa::rank_identity_check(&report)?
    );
    Ok(())
}
