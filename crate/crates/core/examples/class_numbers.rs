// Class numbers of Q(sqrt(-q)), q = 7 mod 8, and the ray class order mod (p*)^2.
//
// $ cargo run --example class_numbers
// q = 7  h = 1  ray = 1
// q = 23  h = 3  ray = 3
// ...

use quadtwist::arith::is_prime_u64;
use quadtwist::qfield::QuadField;
use quadtwist::twistlab::ray_class_order;

fn main() -> quadtwist::Result<()> {
    for q in (7..400).step_by(8).filter(|&q| is_prime_u64(q)) {
        let k = QuadField::new(q)?;
        let ray = ray_class_order(&k);
        println!("q = {q}  h = {}  ray = {}", k.class_number(), ray.order);
    }
    Ok(())
}
