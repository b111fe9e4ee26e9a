// The machine-readable envelope the CLI prints with --json, built in-process.
//
// $ cargo run --example json_output

use quadtwist::cli::{self, OutputDocument, TwistArg};
use quadtwist::Config;

fn main() {
    let cfg = Config::default();
    let r: TwistArg = "(1+sqrt(-7))/2".parse().unwrap();
    let bad = cli::cmd_lambda(7, &r, &cfg);
    println!(
        "{}\nexit code {}\n",
        bad.document.to_json(),
        bad.document.exit_code()
    );

    let r: TwistArg = "-3".parse().unwrap();
    let good = cli::cmd_classify(7, &r, &cfg);
    let text = good.document.to_json();
    let back = OutputDocument::from_json(&text).unwrap();
    assert_eq!(back, good.document);
    println!("{text}");
}
