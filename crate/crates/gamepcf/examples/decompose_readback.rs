//! A denotation taken apart: the head decomposition, depth-bounded readback
//! to a finite evaluation tree, and compilation back to a strategy.
//!
//! Run with: cargo run --release --example decompose_readback

use gamepcf::decomposition::{apply_via_decomposition, e_k, p_k, phi, s_k, Decomp};
use gamepcf::denotation::{denote_closed, run_game, Fuel};
use gamepcf::game_core::Bounds;
use gamepcf::pcf_lang::{fet_to_term, parse, Outcome};
use gamepcf::strategy::strat_equiv;

fn main() {
    let b = Bounds::default();

    // The head decomposition classifies a strategy by its first move:
    // silent, a constant answer, or a case split on a context variable.
    let silent = denote_closed(&parse("Omega[N]").unwrap(), Fuel::default());
    assert!(matches!(phi(&silent).unwrap(), Decomp::Bottom));

    let konst = denote_closed(&parse("succ 2").unwrap(), Fuel::default());
    assert!(matches!(phi(&konst).unwrap(), Decomp::Const(3)));
    println!("Omega[N] is silent, succ 2 is the constant 3");

    let sigma = denote_closed(&parse("\\x:N. succ x").unwrap(), Fuel::default());
    match phi(&sigma).unwrap() {
        Decomp::Case(cs) => println!(
            "\\x:N. succ x opens by asking variable #{} ({} args)",
            cs.head(),
            cs.arg_count()
        ),
        _ => unreachable!(),
    }

    // Readback truncates at a depth: answers up to k-1 survive, the rest is
    // Omega. The result is an ordinary term again.
    for k in 0..=3 {
        let fet = e_k(k, &sigma, &[]).unwrap();
        println!("  depth {k}: {}", fet_to_term(&fet));
    }

    // Compiling the readback gives back exactly the depth-k truncation of
    // the original strategy.
    for k in 0..=3 {
        let fet = e_k(k, &sigma, &[]).unwrap();
        let back = s_k(k, &[], &fet);
        assert!(strat_equiv(&back, &p_k(k, &sigma).unwrap(), &b));
    }
    println!("s_k . e_k == p_k for k <= 3");

    // Application can run through the decomposition instead of the play:
    // interrogate the head, dispatch on the answer.
    let arg = denote_closed(&parse("4").unwrap(), Fuel::default());
    let via = apply_via_decomposition(&sigma, &[arg], 12).unwrap();
    let direct = run_game(&parse("(\\x:N. succ x) 4").unwrap(), Fuel::default());
    assert_eq!(via.answer(), direct.answer());
    assert_eq!(via, Outcome::Answer(5));
    println!("apply via decomposition agrees with the played application: 5");
}
