//! Strategies composed by the execution formula: the middle game becomes a
//! hidden dialogue and only the outer moves remain visible.
//!
//! Run with: cargo run --example compose_strategies

use gamepcf::combinators::{
    compose, der, numeral, numeral_point, point, pred_strategy, promote, succ_strategy, Wiring,
};
use gamepcf::game_core::GameExpr;
use gamepcf::game_core::{game_of_type, Bounds, Move, Tag};
use gamepcf::pcf_lang::parse_type;
use gamepcf::strategy::{strat_equiv, PlayDriver};

fn main() {
    let b = Bounds::default();
    let nn = game_of_type(&parse_type("N -> N").unwrap());

    // succ then pred: composition hides the middle N and the result is the
    // identity behaviour, here checked move by move.
    let succ = succ_strategy();
    let pred = pred_strategy();
    let round = compose(&promote(&succ), &pred, 10_000);
    println!("composed game: {:?}", round.game());

    let mut driver = PlayDriver::new(round.clone());
    let mut m = Move::q(vec![Tag::R]);
    println!("  O plays {m}");
    while let Some(r) = driver.feed(m.clone()).unwrap() {
        println!("  P plays {r}");
        if r.path.first() != Some(&Tag::L) {
            break;
        }
        // The strategy interrogates its input; answer 5 and see 5 come back.
        m = Move::ans(r.path.clone(), 5);
        println!("  O plays {m}");
    }
    assert!(strat_equiv(&round, &der(GameExpr::Nat), &b));
    println!("succ ; pred == dereliction, the identity on !N -o N\n");

    // Numerals are points of the replicated flat game; composing one with
    // succ evaluates the application.
    let three = numeral_point(3);
    let four = compose(&three, &succ, 10_000);
    assert!(strat_equiv(&four, &point(&numeral(4)), &b));
    println!("3 ; succ == 4 as points of N\n");

    // Wirings are copycat strategies along a tag rewrite; conjugation by a
    // wiring relabels a strategy without changing its behaviour.
    let w = Wiring::from_rules(
        nn.clone(),
        nn.clone(),
        vec![(vec![Tag::L], vec![Tag::L]), (vec![Tag::R], vec![Tag::R])],
    );
    let wired = w.conjugate(&succ, "succ rewired");
    assert!(strat_equiv(&wired, &succ, &b));
    println!("a trivial rewiring leaves succ unchanged");
}
