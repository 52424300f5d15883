//! Ground programs evaluated two ways: head reduction on the term, and a
//! play against the compiled strategy. Adequacy says the two agree.
//!
//! Run with: cargo run --release --example run_programs

use gamepcf::denotation::{run_game, Fuel};
use gamepcf::pcf_lang::{eval_op, parse, typecheck, Outcome, Type};

fn show(src: &str) {
    let t = parse(src).unwrap();
    assert_eq!(typecheck(&[], &t).unwrap(), Type::Nat);
    let op = eval_op(&t, 100_000);
    let den = run_game(&t, Fuel::default());
    let verdict = match (&op, &den) {
        (Outcome::Answer(a), Outcome::Answer(b)) if a == b => format!("both answer {a}"),
        (Outcome::Unresolved(_), Outcome::Unresolved(_)) => "both unresolved".to_string(),
        _ => format!("DISAGREE: op {op:?}, game {den:?}"),
    };
    let shown = if src.len() > 57 {
        format!("{}...", &src[..54])
    } else {
        src.to_string()
    };
    println!("{shown:<60} {verdict}");
}

fn main() {
    show("succ (succ 0)");
    show("pred (succ 7)");
    show("if0 0 3 4");
    show("if0 (succ 0) 3 4");
    show("case3 2 10 11 12");
    show("(\\x:N. succ x) 4");
    show("(\\f:N -> N. f (f 1)) (\\x:N. succ x)");

    // A non-strict constant function discards a diverging argument.
    show("(\\x:N. 3) Omega[N]");

    // Recursion by fixed point: addition, then factorial of 4.
    let add = "Y[N -> N -> N] (\\a:N -> N -> N. \\x:N. \\y:N. if0 x y (succ (a (pred x) y)))";
    show(&format!("({add}) 2 3"));

    let mult = format!(
        "Y[N -> N -> N] (\\m:N -> N -> N. \\x:N. \\y:N. if0 x 0 (({add}) y (m (pred x) y)))"
    );
    let fact = format!(
        "Y[N -> N] (\\f:N -> N. \\n:N. if0 n 1 (({mult}) n (f (pred n))))"
    );
    show(&format!("({fact}) 4"));

    // Divergence is never certified, only reported unresolved on both sides.
    show("Omega[N]");
    show("Y[N] (\\x:N. x)");
}
