// Rational twists with s_inf(R) = 2, i.e. Sel over F_inf of corank one,
// together with the congruence case that explains each of them.
//
// $ cargo run --example rank_one_scan -- 23 300

use quadtwist::qfield::QuadField;
use quadtwist::twistlab::{self, CaseLabel};
use quadtwist::Config;

fn main() -> quadtwist::Result<()> {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<u64>().expect("usage: rank_one_scan [q] [rmax]"));
    let q = args.next().unwrap_or(7);
    let rmax = args.next().unwrap_or(200);

    let cfg = Config::default();
    let k = QuadField::new(q)?;
    let mut total = 0;
    let mut hits = 0;
    for item in twistlab::enumerate_twists(&k, rmax, &cfg)? {
        let item = item?;
        total += 1;
        if item.case.case == CaseLabel::None {
            continue;
        }
        hits += 1;
        let l = item.lambda.unwrap();
        println!("R = {:>5}  s_inf = {}  {}", item.r, l.s_inf, item.case.case);
    }
    println!("{hits} of {total} twists with |R| <= {rmax} have rank one");
    Ok(())
}
