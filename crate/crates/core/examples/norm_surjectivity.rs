// N(1 + 2^m O) = 1 + 2^m Z_2 for unramified extensions of Q_2, checked mod 2^(m+6).
//
// $ cargo run --example norm_surjectivity

use quadtwist::dyadic::verify_norm_surjectivity;

fn main() -> quadtwist::Result<()> {
    for d in 1..=4 {
        for m in 2..=4 {
            let r = verify_norm_surjectivity(d, m, m + 6)?;
            println!(
                "d = {d}  f = {:?}  m = {m}  surjective = {}  ({} points)",
                r.modulus, r.surjective, r.points_examined
            );
        }
    }
    // one explicit preimage
    let r = verify_norm_surjectivity(2, 2, 6)?;
    let p = &r.preimages[3];
    println!(
        "N({:?}) = {} mod 2^6",
        p.preimage.as_ref().unwrap(),
        p.target
    );
    Ok(())
}
