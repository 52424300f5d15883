//! Observational comparison at bounded depth: inequivalent programs are
//! separated by a replayable witness, equivalent encodings pass both ways.
//!
//! Run with: cargo run --release --example observe_compare

use gamepcf::denotation::Fuel;
use gamepcf::game_core::Bounds;
use gamepcf::observation::{obs_compare, Verdict, Witness};
use gamepcf::pcf_lang::parse;

fn compare(left: &str, right: &str, d: u32) -> Verdict {
    let m = parse(left).unwrap();
    let n = parse(right).unwrap();
    obs_compare(&m, &n, d, Fuel::default(), &Bounds::default()).unwrap()
}

fn describe(v: &Verdict) -> String {
    match v {
        Verdict::Leq => "<=".to_string(),
        Verdict::NotLeq {
            witness: Witness::Context { args, .. },
        } => format!("separated by application to ({})", args.join(", ")),
        Verdict::NotLeq {
            witness: Witness::Test { description, .. },
        } => format!("separated by test {description}"),
        Verdict::Inconclusive { reason } => format!("inconclusive: {reason}"),
    }
}

fn main() {
    // The constant-zero function ignores its argument; the strict variant
    // interrogates it first. Feeding divergence tells them apart.
    let v = compare("\\x:N. 0", "\\x:N. if0 x 0 0", 1);
    assert!(v.is_not_leq());
    println!("\\x:N. 0  vs  \\x:N. if0 x 0 0   {}", describe(&v));

    // Distinct numerals separate at ground type, in both directions.
    let v = compare("2", "3", 0);
    assert!(v.is_not_leq());
    println!("2        vs  3                 {}", describe(&v));

    // Divergence is below everything; the converse fails.
    assert!(compare("Omega[N]", "0", 0).is_leq());
    let v = compare("0", "Omega[N]", 0);
    assert!(v.is_not_leq());
    println!("Omega[N] <= 0, and 0 vs Omega[N] {}", describe(&v));

    // case2 and its conditional encoding agree on every bounded test.
    let cased = "\\x:N. case2 x 5 7";
    let encoded = "\\x:N. if0 x 5 (if0 (pred x) 7 Omega[N])";
    assert!(compare(cased, encoded, 2).is_leq());
    assert!(compare(encoded, cased, 2).is_leq());
    println!("case2 x 5 7 == its if0/pred encoding at depth 2");
}
