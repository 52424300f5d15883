//! Games built from types, the moves they admit, and the legality checks
//! every position must pass.
//!
//! Run with: cargo run --example games_and_moves

use gamepcf::game_core::{
    check_position, game_of_type, label, legal_position, position_to_string, well_opened, Move,
    Player, Tag,
};
use gamepcf::pcf_lang::parse_type;

fn main() {
    // The flat natural-number game: one opening question, numeral answers.
    let nat = game_of_type(&parse_type("N").unwrap());
    println!("game for N:        {nat:?}");

    // A first-order function type becomes !N -o N: the output question on
    // the right, repeatable input interrogations on the left.
    let ty = parse_type("N -> N").unwrap();
    let g = game_of_type(&ty);
    println!("game for N -> N:   {g:?}");
    assert!(well_opened(&g));

    // Moves name a path through the connectives, then a base question or
    // answer. The printed form is the trace format: `R.Q`, `L.0!.Ans(2)`.
    let q_out = Move::q(vec![Tag::R]);
    let q_in = Move::q(vec![Tag::L, Tag::Idx(0)]);
    let a_in = Move::ans(vec![Tag::L, Tag::Idx(0)], 2);
    let a_out = Move::ans(vec![Tag::R], 3);
    for m in [&q_out, &q_in, &a_in, &a_out] {
        let (player, qa) = label(&g, m).unwrap();
        println!("  {:<12} is a {player:?} {qa:?}", m.to_string());
    }

    // The play `succ` would produce on input 2. Every prefix is legal: the
    // opening is an output question, players alternate, answers match the
    // most recent open question (the bracketing condition).
    let play = vec![q_out.clone(), q_in, a_in, a_out];
    check_position(&g, &play).unwrap();
    println!("a legal play:      {}", position_to_string(&play));

    // Openers must open: starting inside the argument is rejected.
    let bad = vec![Move::q(vec![Tag::L, Tag::Idx(0)])];
    assert!(!legal_position(&g, &bad));
    println!("rejected opening:  {}", position_to_string(&bad));

    // Two consecutive P moves break alternation.
    let double = vec![
        Move::q(vec![Tag::R]),
        Move::q(vec![Tag::L, Tag::Idx(0)]),
        Move::ans(vec![Tag::R], 3),
    ];
    let err = check_position(&g, &double).unwrap_err();
    println!("rejected play:     {err}");

    // Answering a question that is no longer open breaks bracketing.
    let closed = vec![
        Move::q(vec![Tag::R]),
        Move::q(vec![Tag::L, Tag::Idx(0)]),
        Move::ans(vec![Tag::L, Tag::Idx(0)], 2),
        Move::q(vec![Tag::L, Tag::Idx(1)]),
        Move::ans(vec![Tag::L, Tag::Idx(0)], 5),
    ];
    let err = check_position(&g, &closed).unwrap_err();
    println!("rejected play:     {err}");

    assert_eq!(label(&g, &Move::q(vec![Tag::R])).unwrap().0, Player::O);
}
