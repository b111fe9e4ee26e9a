// The 2-adic square root s of -q with s = 1 mod 4, and the two embeddings of K into Q_2.
//
// $ cargo run --example hensel_root
// s mod 2^7 = 53
// s mod 2^8 = 181

use quadtwist::dyadic;
use quadtwist::qfield::QuadField;

fn main() -> quadtwist::Result<()> {
    for k in [7, 8, 16, 32] {
        let s = dyadic::sqrt_minus_q(7, k)?;
        println!("s mod 2^{k} = {}", s.residue());
    }

    let field = QuadField::new(7)?;
    let w = field.elem(-4, -2)?; // -(2 + sqrt(-7))
    println!("iota_p({w})  = {} mod 2^7", dyadic::embed(&w, 8)?.residue());
    println!(
        "iota_p*({w}) = {} mod 2^7",
        dyadic::embed_star(&w, 8)?.residue()
    );
    println!(
        "ord_2(iota_p(w) - 1) = {}",
        dyadic::embed(&w, 64)?.sub_int(1).ord2()?
    );
    Ok(())
}
