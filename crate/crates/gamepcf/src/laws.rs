//! Seeded random populations and the law suites built on them.
//!
//! Every suite is deterministic in its seed. Subjects are drawn from
//! template generators (random types, random finite strategies, random
//! evaluation trees), the stated equations are checked at bounds wide
//! enough to cover the drawn behaviour, and the outcome is a report that
//! counts subjects and checks and keeps one line per failure.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::combinators::{bottom, compose, con, der, identity, promote, tensor, weak, Wiring};
use crate::decomposition::{
    apply_via_decomposition, e_k, flatten, p_k, phi, preceq_k, s_k, Decomp,
};
use crate::denotation::{denote, denote_fet, run_game, Fuel};
use crate::game_core::{
    canonical_position, check_position, check_switching, game_of_type, well_opened, Base, Bounds,
    GameExpr, Move, Position, Tag,
};
use crate::pcf_lang::{fet_check, fet_leq, parse, q_k, typecheck, Fet, Outcome, Type};
use crate::strategy::{
    legal_o_extensions, self_consistent, strat_equiv, strat_subeq, traces, FreshMode, Strategy,
    StrategyCode,
};

/// Outcome of one suite: subjects drawn, equations checked, and a line per
/// failed check.
#[derive(Debug, Clone, Serialize)]
pub struct LawReport {
    pub name: String,
    pub subjects: usize,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl LawReport {
    fn new(name: &str) -> LawReport {
        LawReport {
            name: name.to_string(),
            subjects: 0,
            cases: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, label: String, ok: bool) {
        self.cases += 1;
        if !ok {
            self.failures.push(label);
        }
    }

    /// Whether every check passed.
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Bounds used both to materialize random subjects and to check the suites,
/// so the checks cover everything a subject can do.
pub fn law_bounds() -> Bounds {
    Bounds {
        max_nat: 2,
        max_index: 1,
        max_len: 6,
        max_steps: 50_000,
    }
}

/// A random type with arrow depth at most `depth` and at most two arguments
/// per arrow block.
pub fn random_type(rng: &mut ChaCha8Rng, depth: u32) -> Type {
    if depth == 0 || rng.gen_bool(0.35) {
        return Type::Nat;
    }
    let args = rng.gen_range(1..=2);
    let mut t = Type::Nat;
    for _ in 0..args {
        t = Type::arrow(random_type(rng, depth - 1), t);
    }
    t
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum ShapeTag {
    Fixed(Tag),
    Slot,
}

type MoveShape = (Vec<ShapeTag>, Option<u32>);

fn shape_tags(path: &[Tag]) -> Vec<ShapeTag> {
    path.iter()
        .map(|t| match t {
            Tag::Idx(_) => ShapeTag::Slot,
            other => ShapeTag::Fixed(*other),
        })
        .collect()
}

fn move_shape(m: &Move) -> MoveShape {
    let v = match m.base {
        Base::Q => None,
        Base::Ans(n) => Some(n),
    };
    (shape_tags(&m.path), v)
}

fn question_shapes(g: &GameExpr, prefix: &mut Vec<ShapeTag>, out: &mut Vec<Vec<ShapeTag>>) {
    match g {
        GameExpr::I => {}
        GameExpr::Nat | GameExpr::Sigma => out.push(prefix.clone()),
        GameExpr::Tensor(a, b) | GameExpr::With(a, b) | GameExpr::Lolli(a, b) => {
            prefix.push(ShapeTag::Fixed(Tag::L));
            question_shapes(a, prefix, out);
            prefix.pop();
            prefix.push(ShapeTag::Fixed(Tag::R));
            question_shapes(b, prefix, out);
            prefix.pop();
        }
        GameExpr::WithOmega(a) => {
            prefix.push(ShapeTag::Fixed(Tag::Fam(0)));
            question_shapes(a, prefix, out);
            prefix.pop();
        }
        GameExpr::Bang(a) => {
            prefix.push(ShapeTag::Slot);
            question_shapes(a, prefix, out);
            prefix.pop();
        }
    }
}

fn opening_shape(g: &GameExpr) -> Option<Vec<ShapeTag>> {
    match g {
        GameExpr::Nat | GameExpr::Sigma => Some(Vec::new()),
        GameExpr::Lolli(_, b) => {
            let mut rest = opening_shape(b)?;
            rest.insert(0, ShapeTag::Fixed(Tag::R));
            Some(rest)
        }
        _ => None,
    }
}

#[derive(Clone, Copy, Debug)]
enum IdxFill {
    CopySame,
    Const(u32),
}

#[derive(Clone, Copy, Debug)]
enum ValueRule {
    Const(u32),
    Offset(u32),
}

#[derive(Clone, Debug)]
enum Rule {
    Silent,
    Answer {
        shape: Vec<ShapeTag>,
        fill: Vec<IdxFill>,
        value: ValueRule,
    },
    Ask {
        shape: Vec<ShapeTag>,
        fill: Vec<IdxFill>,
    },
}

/// Index slots either copy the trigger's index at the same position, which
/// keeps the response in the trigger's session, or name a small constant.
fn random_fill(rng: &mut ChaCha8Rng, shape: &[ShapeTag], trigger: &[ShapeTag]) -> Vec<IdxFill> {
    shape
        .iter()
        .enumerate()
        .filter(|(_, st)| matches!(st, ShapeTag::Slot))
        .map(|(p, _)| {
            let shared = p < trigger.len()
                && trigger[..p] == shape[..p]
                && matches!(trigger[p], ShapeTag::Slot);
            if shared && rng.gen_bool(0.8) {
                IdxFill::CopySame
            } else {
                IdxFill::Const(rng.gen_range(0..=1))
            }
        })
        .collect()
}

fn fresh_rule(
    rng: &mut ChaCha8Rng,
    trigger: &MoveShape,
    qshapes: &[Vec<ShapeTag>],
    opening: &Option<Vec<ShapeTag>>,
    max_nat: u32,
    is_start: bool,
) -> Rule {
    let (tpath, tval) = trigger;
    let roll: f64 = rng.gen();
    let silent_p = if is_start { 0.1 } else { 0.3 };
    if roll < silent_p {
        return Rule::Silent;
    }
    if tval.is_none() && roll < silent_p + 0.3 {
        let fill = vec![
            IdxFill::CopySame;
            tpath
                .iter()
                .filter(|t| matches!(t, ShapeTag::Slot))
                .count()
        ];
        return Rule::Answer {
            shape: tpath.clone(),
            fill,
            value: ValueRule::Const(rng.gen_range(0..=max_nat)),
        };
    }
    if tval.is_some() && roll < silent_p + 0.35 {
        if let Some(shape) = opening.clone() {
            return Rule::Answer {
                shape,
                fill: Vec::new(),
                value: ValueRule::Offset(rng.gen_range(0..=max_nat)),
            };
        }
    }
    let shape = qshapes[rng.gen_range(0..qshapes.len())].clone();
    let fill = random_fill(rng, &shape, tpath);
    Rule::Ask { shape, fill }
}

fn build_path(shape: &[ShapeTag], fill: &[IdxFill], trigger: &Move) -> Vec<Tag> {
    let mut slots = fill.iter();
    shape
        .iter()
        .enumerate()
        .map(|(p, st)| match st {
            ShapeTag::Fixed(t) => *t,
            ShapeTag::Slot => match slots.next().copied().unwrap_or(IdxFill::Const(0)) {
                IdxFill::CopySame => trigger.path[p],
                IdxFill::Const(c) => Tag::Idx(c),
            },
        })
        .collect()
}

fn instantiate(rule: &Rule, m: &Move, max_nat: u32) -> Option<Move> {
    match rule {
        Rule::Silent => None,
        Rule::Answer { shape, fill, value } => {
            let v = match (value, &m.base) {
                (ValueRule::Const(c), _) => *c,
                (ValueRule::Offset(d), Base::Ans(n)) => (n + d) % (max_nat + 1),
                (ValueRule::Offset(d), Base::Q) => *d,
            };
            Some(Move::ans(build_path(shape, fill, m), v))
        }
        Rule::Ask { shape, fill } => Some(Move::q(build_path(shape, fill, m))),
    }
}

fn try_table(rng: &mut ChaCha8Rng, game: &GameExpr, b: &Bounds) -> Option<Strategy> {
    let mut qshapes = Vec::new();
    question_shapes(game, &mut Vec::new(), &mut qshapes);
    if qshapes.is_empty() {
        return Some(bottom(game.clone()));
    }
    let opening = opening_shape(game);
    let mut rules: BTreeMap<MoveShape, Rule> = BTreeMap::new();
    let mut set: BTreeSet<Position> = BTreeSet::new();
    set.insert(Vec::new());
    let mut frontier: Vec<Position> = vec![Vec::new()];
    while let Some(s) = frontier.pop() {
        if s.len() + 2 > b.max_len {
            continue;
        }
        for m in legal_o_extensions(game, &s, b, FreshMode::Exhaustive) {
            let shape = move_shape(&m);
            let rule = rules
                .entry(shape.clone())
                .or_insert_with(|| {
                    fresh_rule(rng, &shape, &qshapes, &opening, b.max_nat, s.is_empty())
                })
                .clone();
            let Some(r) = instantiate(&rule, &m, b.max_nat) else {
                continue;
            };
            let mut pos = s.clone();
            pos.push(m);
            pos.push(r);
            if check_position(game, &pos).is_err() || check_switching(game, &pos).is_err() {
                return None;
            }
            if set.insert(pos.clone()) {
                if set.len() > 240 {
                    return None;
                }
                frontier.push(pos);
            }
        }
    }
    let s = Strategy::from_positions(game.clone(), set).ok()?.named("sampled");
    self_consistent(&s, b).then_some(s)
}

/// Draw a random finite strategy on `game`. Responses follow a table of
/// move-shape templates, so they are uniform across sessions, and the table
/// is materialized through exhaustive legal playouts at `b`. Draws whose
/// templates misfire somewhere, or that fail self-consistency, are thrown
/// away; after too many retries the bottom strategy is returned.
pub fn random_finite(rng: &mut ChaCha8Rng, game: &GameExpr, b: &Bounds) -> Strategy {
    for _ in 0..64 {
        if let Some(s) = try_table(rng, game, b) {
            return s;
        }
    }
    bottom(game.clone())
}

/// Identity and associativity of `compose` over random finite strategies
/// between games of random types.
pub fn category_laws(seed: u64, cases: usize) -> LawReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = law_bounds();
    let mut rep = LawReport::new("category");
    for case in 0..cases {
        let ga = game_of_type(&random_type(&mut rng, 2));
        let gb = game_of_type(&random_type(&mut rng, 2));
        let gc = game_of_type(&random_type(&mut rng, 2));
        let gd = game_of_type(&random_type(&mut rng, 2));
        let s = random_finite(&mut rng, &GameExpr::lolli(ga.clone(), gb.clone()), &b);
        let t = random_finite(&mut rng, &GameExpr::lolli(gb.clone(), gc.clone()), &b);
        let u = random_finite(&mut rng, &GameExpr::lolli(gc.clone(), gd.clone()), &b);
        rep.subjects += 3;
        rep.check(
            format!("case {case}: left identity"),
            strat_equiv(&compose(&identity(ga.clone()), &s, b.max_steps), &s, &b),
        );
        rep.check(
            format!("case {case}: right identity"),
            strat_equiv(&compose(&s, &identity(gb.clone()), b.max_steps), &s, &b),
        );
        let st_u = compose(&compose(&s, &t, b.max_steps), &u, b.max_steps);
        let s_tu = compose(&s, &compose(&t, &u, b.max_steps), b.max_steps);
        rep.check(
            format!("case {case}: associativity"),
            strat_equiv(&st_u, &s_tu, &b),
        );
    }
    rep
}

/// The promotion laws: promotion distributes over composition, and
/// dereliction is neutral on either side of it.
pub fn comonad_laws(seed: u64, cases: usize) -> LawReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = law_bounds();
    let mut rep = LawReport::new("comonad");
    for case in 0..cases {
        let ga = game_of_type(&random_type(&mut rng, 2));
        let gb = game_of_type(&random_type(&mut rng, 2));
        let gc = game_of_type(&random_type(&mut rng, 2));
        let s = random_finite(
            &mut rng,
            &GameExpr::lolli(GameExpr::bang(ga.clone()), gb.clone()),
            &b,
        );
        let t = random_finite(
            &mut rng,
            &GameExpr::lolli(GameExpr::bang(gb.clone()), gc.clone()),
            &b,
        );
        rep.subjects += 2;
        let lhs = compose(&promote(&s), &promote(&t), b.max_steps);
        let rhs = promote(&compose(&promote(&s), &t, b.max_steps));
        rep.check(
            format!("case {case}: promotion distributes"),
            strat_equiv(&lhs, &rhs, &b),
        );
        rep.check(
            format!("case {case}: dereliction left-neutral"),
            strat_equiv(
                &compose(&promote(&der(ga.clone())), &s, b.max_steps),
                &s,
                &b,
            ),
        );
        rep.check(
            format!("case {case}: dereliction right-neutral"),
            strat_equiv(&compose(&promote(&s), &der(gb.clone()), b.max_steps), &s, &b),
        );
    }
    rep
}

/// Contraction and weakening form a cocommutative comonoid on each
/// replicated game: the three diagrams checked are cocommutativity,
/// coassociativity, and the counit on both sides.
pub fn comonoid_laws(seed: u64, cases: usize) -> LawReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = law_bounds();
    let mut rep = LawReport::new("comonoid");
    for case in 0..cases {
        let ga = game_of_type(&random_type(&mut rng, 2));
        let bg = GameExpr::bang(ga.clone());
        let c = con(ga.clone());
        rep.subjects += 1;

        let swap = Wiring::from_rules(
            GameExpr::tensor(bg.clone(), bg.clone()),
            GameExpr::tensor(bg.clone(), bg.clone()),
            vec![
                (vec![Tag::L], vec![Tag::R]),
                (vec![Tag::R], vec![Tag::L]),
            ],
        )
        .strategy("swap");
        rep.check(
            format!("case {case}: cocommutativity"),
            strat_equiv(&compose(&c, &swap, b.max_steps), &c, &b),
        );

        let lhs = compose(&c, &tensor(&c, &identity(bg.clone())), b.max_steps);
        let rhs = compose(&c, &tensor(&identity(bg.clone()), &c), b.max_steps);
        let assoc = Wiring::from_rules(
            GameExpr::tensor(bg.clone(), GameExpr::tensor(bg.clone(), bg.clone())),
            GameExpr::tensor(GameExpr::tensor(bg.clone(), bg.clone()), bg.clone()),
            vec![
                (vec![Tag::L], vec![Tag::L, Tag::L]),
                (vec![Tag::R, Tag::L], vec![Tag::L, Tag::R]),
                (vec![Tag::R, Tag::R], vec![Tag::R]),
            ],
        )
        .strategy("assoc");
        rep.check(
            format!("case {case}: coassociativity"),
            strat_equiv(&compose(&rhs, &assoc, b.max_steps), &lhs, &b),
        );

        let lunit = Wiring::from_rules(
            GameExpr::tensor(GameExpr::I, bg.clone()),
            bg.clone(),
            vec![(vec![Tag::R], vec![])],
        )
        .strategy("lunit");
        let dropped_left = compose(
            &compose(&c, &tensor(&weak(ga.clone()), &identity(bg.clone())), b.max_steps),
            &lunit,
            b.max_steps,
        );
        rep.check(
            format!("case {case}: left counit"),
            strat_equiv(&dropped_left, &identity(bg.clone()), &b),
        );

        let runit = Wiring::from_rules(
            GameExpr::tensor(bg.clone(), GameExpr::I),
            bg.clone(),
            vec![(vec![Tag::L], vec![])],
        )
        .strategy("runit");
        let dropped_right = compose(
            &compose(&c, &tensor(&identity(bg.clone()), &weak(ga.clone())), b.max_steps),
            &runit,
            b.max_steps,
        );
        rep.check(
            format!("case {case}: right counit"),
            strat_equiv(&dropped_right, &identity(bg.clone()), &b),
        );
    }
    rep
}

fn parity_wiring(g: &GameExpr) -> Strategy {
    let flip = |m: &Move| {
        let mut path = m.path.clone();
        match path.first_mut() {
            Some(Tag::Idx(i)) => *i ^= 1,
            _ => return None,
        }
        Some(Move { path, base: m.base })
    };
    Wiring::from_fns(g.clone(), g.clone(), flip, flip).strategy("parity")
}

/// Every strategy between replicated well-opened games coincides with the
/// promotion of its own dereliction. Subjects are promotions conjugated by
/// session-permuting copycats, plus the bottom strategy.
pub fn bang_lemma_laws(seed: u64, cases: usize) -> LawReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = law_bounds();
    let mut rep = LawReport::new("bang lemma");
    for case in 0..cases {
        let ga = game_of_type(&random_type(&mut rng, 1));
        let gb = game_of_type(&random_type(&mut rng, 1));
        assert!(well_opened(&ga));
        let bga = GameExpr::bang(ga.clone());
        let bgb = GameExpr::bang(gb.clone());
        let sigma = if case % 7 == 6 {
            bottom(GameExpr::lolli(bga.clone(), bgb.clone()))
        } else {
            let tau = random_finite(
                &mut rng,
                &GameExpr::lolli(bga.clone(), gb.clone()),
                &b,
            );
            let pre = if rng.gen_bool(0.5) {
                identity(bga.clone())
            } else {
                parity_wiring(&bga)
            };
            let post = if rng.gen_bool(0.5) {
                identity(bgb.clone())
            } else {
                parity_wiring(&bgb)
            };
            compose(&compose(&pre, &promote(&tau), b.max_steps), &post, b.max_steps)
        };
        rep.subjects += 1;
        let back = promote(&compose(&sigma, &der(gb.clone()), b.max_steps));
        rep.check(
            format!("case {case}: equal to promoted dereliction"),
            strat_equiv(&sigma, &back, &b),
        );
    }
    rep
}

/// Draw a closed finite evaluation tree of type `ty` with case depth at most
/// `depth`, numerals at most `max_nat`, and answer keys below `support`.
pub fn random_fet(rng: &mut ChaCha8Rng, ty: &Type, depth: u32, max_nat: u32, support: u32) -> Fet {
    let mut counter = 0u32;
    let binders: Vec<(String, Type)> = ty
        .arg_types()
        .iter()
        .map(|t| {
            counter += 1;
            (format!("x{counter}"), (*t).clone())
        })
        .collect();
    let body = random_ground(rng, &binders, depth, max_nat, support, &mut counter);
    Fet::lam(binders, body)
}

fn random_ground(
    rng: &mut ChaCha8Rng,
    env: &[(String, Type)],
    depth: u32,
    max_nat: u32,
    support: u32,
    counter: &mut u32,
) -> Fet {
    let roll: f64 = rng.gen();
    if depth == 0 || env.is_empty() {
        if roll < 0.45 {
            return Fet::Omega;
        }
        return Fet::Num(rng.gen_range(0..=max_nat));
    }
    if roll < 0.2 {
        return Fet::Omega;
    }
    if roll < 0.45 {
        return Fet::Num(rng.gen_range(0..=max_nat));
    }
    let (head, hty) = env[rng.gen_range(0..env.len())].clone();
    let mut args = Vec::new();
    for at in hty.arg_types() {
        let mut binders = Vec::new();
        for bt in at.arg_types() {
            *counter += 1;
            binders.push((format!("x{counter}"), (*bt).clone()));
        }
        let mut inner = env.to_vec();
        inner.extend(binders.iter().cloned());
        let body = random_ground(rng, &inner, depth - 1, max_nat, support, counter);
        args.push(Fet::lam(binders, body));
    }
    let mut answers = BTreeMap::new();
    for v in 0..support {
        if rng.gen_bool(0.55) {
            answers.insert(v, random_ground(rng, env, depth - 1, max_nat, support, counter));
        }
    }
    Fet::case(&head, args, answers)
}

/// Random evaluation trees round-trip through denotation and readback at
/// every depth, tree truncation is monotone and idempotent, and rebuilt
/// case splits match the strategy they came from.
pub fn decomposition_laws(seed: u64, cases: usize) -> LawReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = law_bounds();
    let mut rep = LawReport::new("decomposition");
    for case in 0..cases {
        let ty = random_type(&mut rng, 2);
        let p = random_fet(&mut rng, &ty, 3, 3, 3);
        if let Err(e) = fet_check(&[], &p, &ty) {
            rep.check(format!("case {case}: ill-typed draw: {e}"), false);
            continue;
        }
        rep.subjects += 1;
        for k in 0..=3 {
            match e_k(k, &s_k(k, &[], &p), &[]) {
                Ok(got) => rep.check(
                    format!("case {case}: readback at depth {k}"),
                    got == q_k(k, &p),
                ),
                Err(e) => rep.check(format!("case {case}: readback at depth {k}: {e}"), false),
            }
        }
        let q2 = q_k(2, &p);
        rep.check(
            format!("case {case}: tree truncation idempotent"),
            q_k(2, &q2) == q2,
        );
        rep.check(
            format!("case {case}: tree truncation monotone"),
            fet_leq(&q_k(1, &p), &q2) && fet_leq(&q2, &q_k(3, &p)),
        );
        if case % 8 == 0 {
            let sigma = denote_fet(&[], &p);
            let ok = match flatten(&sigma).and_then(|(flat, _)| Ok((phi(&flat)?, flat))) {
                Ok((Decomp::Case(split), flat)) => strat_equiv(&split.rebuild(), &flat, &b),
                Ok(_) => true,
                Err(e) => {
                    rep.check(format!("case {case}: rebuild: {e}"), false);
                    continue;
                }
            };
            rep.check(format!("case {case}: rebuild matches denotation"), ok);
        }
    }
    rep
}

/// Closed well-typed terms exercised by the heavier suites: ground
/// programs, unary and binary functions, higher-order shapes, and a little
/// recursion.
pub fn law_terms() -> Vec<&'static str> {
    vec![
        "0",
        "1",
        "2",
        "3",
        "succ 0",
        "succ (succ 1)",
        "pred 0",
        "pred (succ 2)",
        "if0 0 1 2",
        "if0 (succ 0) 1 2",
        "case2 (succ 0) 4 5",
        "pred (pred (succ (succ 3)))",
        "if0 (pred 1) 2 3",
        "(\\x:N. succ x) 2",
        "\\x:N. x",
        "\\x:N. succ x",
        "\\x:N. pred x",
        "\\x:N. 5",
        "\\x:N. Omega[N]",
        "\\x:N. if0 x 1 0",
        "\\x:N. case2 x 2 0",
        "\\x:N. case1 x 3",
        "\\x:N. case3 x 1 2 3",
        "\\x:N. succ (succ x)",
        "\\x:N. pred (succ x)",
        "\\x:N. if0 x (succ x) (pred x)",
        "\\x:N. case1 x (succ x)",
        "\\x:N. if0 x 3 (succ (pred x))",
        "\\x:N. case2 x (succ x) 0",
        "\\x:N. succ (pred (succ x))",
        "\\x:N. \\y:N. x",
        "\\x:N. \\y:N. y",
        "\\x:N. \\y:N. 2",
        "\\x:N. \\y:N. Omega[N]",
        "\\x:N. \\y:N. if0 x y (succ y)",
        "\\x:N. \\y:N. case2 x y (succ y)",
        "\\x:N. \\y:N. if0 y x 3",
        "\\x:N. \\y:N. succ y",
        "\\x:N. \\y:N. pred x",
        "\\x:N. \\y:N. if0 x (if0 y 0 1) 2",
        "\\f:N -> N. f 0",
        "\\f:N -> N. f 1",
        "\\f:N -> N. succ (f 2)",
        "\\f:N -> N. f (f 0)",
        "\\f:N -> N. if0 (f 0) 1 0",
        "\\f:N -> N. 4",
        "\\f:N -> N. f (succ (f 1))",
        "\\f:N -> N. Omega[N]",
        "\\f:N -> N. \\x:N. f x",
        "\\f:N -> N. \\x:N. f (f x)",
        "\\f:N -> N. \\x:N. succ (f x)",
        "\\f:N -> N. \\x:N. f (succ x)",
        "\\f:N -> N. \\x:N. if0 x (f 0) (f (pred x))",
        "\\f:N -> N. \\x:N. 0",
        "\\x:N. \\f:N -> N. f x",
        "\\x:N. \\f:N -> N. f (f x)",
        "Y[N -> N] (\\f:N -> N. \\n:N. if0 n 0 (succ (f (pred n))))",
        "Y[N -> N] (\\f:N -> N. \\n:N. if0 n 0 (f (pred n)))",
    ]
}

fn denote_term(src: &str) -> Result<Strategy, String> {
    let t = parse(src).map_err(|e| e.to_string())?;
    typecheck(&[], &t).map_err(|e| e.to_string())?;
    Ok(denote(&[], &t, Fuel { y_depth: 8 }))
}

fn max_answer(s: &[Move]) -> u32 {
    s.iter()
        .filter_map(|m| match m.base {
            Base::Ans(v) => Some(v),
            Base::Q => None,
        })
        .max()
        .unwrap_or(0)
}

/// The truncation ladder on denotations: each level simulates into the full
/// strategy and into the next level, and truncating twice changes nothing.
/// Plays survive truncation at depth `k` when half their length plus their
/// largest answer value fits under `k`; the value part matters because the
/// ladder prunes case branches by answer value as well as by depth.
pub fn approximation_laws(terms: &[&str], k_max: u32) -> LawReport {
    let b = law_bounds();
    let mut rep = LawReport::new("approximation");
    for term in terms {
        let sigma = match denote_term(term) {
            Ok(s) => s,
            Err(e) => {
                rep.check(format!("{term}: {e}"), false);
                continue;
            }
        };
        rep.subjects += 1;
        for k in 0..=k_max {
            let checks = (|| -> Result<Vec<(&'static str, bool)>, String> {
                let pk = p_k(k, &sigma)?;
                let pk1 = p_k(k + 1, &sigma)?;
                let ppk = p_k(k, &pk)?;
                let b2k = Bounds {
                    max_len: 2 * k as usize,
                    ..b
                };
                let surviving = traces(&sigma, &b2k)
                    .into_iter()
                    .filter(|p| {
                        p.len() % 2 == 0 && p.len() as u32 / 2 + max_answer(p) <= k
                    })
                    .map(|p| canonical_position(&p))
                    .collect::<BTreeSet<Position>>();
                let kept = traces(&pk, &b2k)
                    .into_iter()
                    .filter(|p| p.len() % 2 == 0)
                    .map(|p| canonical_position(&p))
                    .collect::<BTreeSet<Position>>();
                Ok(vec![
                    ("below the strategy", strat_subeq(&pk, &sigma, &b)),
                    ("short plays survive", surviving.is_subset(&kept)),
                    ("below the next level", strat_subeq(&pk, &pk1, &b)),
                    ("idempotent", strat_equiv(&ppk, &pk, &b)),
                ])
            })();
            match checks {
                Ok(list) => {
                    for (label, ok) in list {
                        rep.check(format!("{term}: {label} at depth {k}"), ok);
                    }
                }
                Err(e) => rep.check(format!("{term}: truncation at depth {k}: {e}"), false),
            }
        }
    }
    rep
}

/// Reading a denotation back at depth `k` and denoting the result lands on
/// the depth-`k` truncation of the original strategy.
pub fn readback_laws(terms: &[&str], k_max: u32) -> LawReport {
    let b = law_bounds();
    let mut rep = LawReport::new("readback");
    for term in terms {
        let sigma = match denote_term(term) {
            Ok(s) => s,
            Err(e) => {
                rep.check(format!("{term}: {e}"), false);
                continue;
            }
        };
        rep.subjects += 1;
        for k in 0..=k_max {
            let round = (|| -> Result<bool, String> {
                let f = e_k(k, &sigma, &[])?;
                let back = s_k(k, &[], &f);
                Ok(strat_equiv(&back, &p_k(k, &sigma)?, &b))
            })();
            match round {
                Ok(ok) => rep.check(format!("{term}: denoted readback at depth {k}"), ok),
                Err(e) => rep.check(format!("{term}: denoted readback at depth {k}: {e}"), false),
            }
        }
    }
    rep
}

fn arg_terms_for(t: &Type) -> Vec<&'static str> {
    match t {
        Type::Nat => vec!["0", "2"],
        Type::Arrow(a, b) => match (&**a, &**b) {
            (Type::Nat, Type::Nat) => vec!["\\a:N. succ a", "\\a:N. 0"],
            _ => vec![],
        },
    }
}

fn outcomes_agree(a: &Outcome, b: &Outcome) -> bool {
    match (a, b) {
        (Outcome::Answer(x), Outcome::Answer(y)) => x == y,
        (Outcome::Unresolved(x), Outcome::Unresolved(y)) => x.stuck == y.stuck,
        _ => false,
    }
}

/// Evaluating full applications by repeated decomposition agrees with
/// direct game evaluation, and every truncation of a denotation sits below
/// it in the depth-bounded simulation order.
pub fn dispatch_laws(terms: &[&str], k_max: u32) -> LawReport {
    let mut rep = LawReport::new("dispatch");
    for term in terms {
        let t = match parse(term) {
            Ok(t) => t,
            Err(e) => {
                rep.check(format!("{term}: {e}"), false);
                continue;
            }
        };
        let ty = match typecheck(&[], &t) {
            Ok(ty) => ty,
            Err(e) => {
                rep.check(format!("{term}: {e}"), false);
                continue;
            }
        };
        rep.subjects += 1;

        let den = StrategyCode::Denotation {
            term: term.to_string(),
            fuel: 8,
        };
        for k in 0..=k_max {
            let trunc = StrategyCode::comb(format!("p_k:{k}"), vec![den.clone()]);
            match preceq_k(k, &trunc, &den) {
                Ok(ok) => rep.check(format!("{term}: truncation simulates at depth {k}"), ok),
                Err(e) => rep.check(
                    format!("{term}: truncation simulates at depth {k}: {e}"),
                    false,
                ),
            }
        }

        let pools: Vec<Vec<&str>> = ty.arg_types().iter().map(|a| arg_terms_for(a)).collect();
        if pools.is_empty() || pools.iter().any(|p| p.is_empty()) {
            continue;
        }
        for pick in 0..2usize {
            let args: Vec<&str> = pools.iter().map(|p| p[pick % p.len()]).collect();
            let applied = args
                .iter()
                .fold(format!("({term})"), |acc, a| format!("{acc} ({a})"));
            let direct = match parse(&applied) {
                Ok(t) => run_game(&t, Fuel { y_depth: 8 }),
                Err(e) => {
                    rep.check(format!("{applied}: {e}"), false);
                    continue;
                }
            };
            let routed = (|| -> Result<Outcome, String> {
                let sigma = denote_term(term)?;
                let arg_strats = args
                    .iter()
                    .map(|a| denote_term(a))
                    .collect::<Result<Vec<_>, _>>()?;
                apply_via_decomposition(&sigma, &arg_strats, 12)
            })();
            match routed {
                Ok(out) => rep.check(
                    format!("{applied}: decomposition agrees with game run"),
                    outcomes_agree(&out, &direct),
                ),
                Err(e) => rep.check(format!("{applied}: {e}"), false),
            }
        }
    }
    rep
}

/// Run the seeded random suites at a shared case count.
pub fn run_all(seed: u64, cases: usize) -> Vec<LawReport> {
    vec![
        category_laws(seed, cases),
        comonad_laws(seed.wrapping_add(1), cases),
        comonoid_laws(seed.wrapping_add(2), cases),
        bang_lemma_laws(seed.wrapping_add(3), cases),
        decomposition_laws(seed.wrapping_add(4), cases),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn arrow_depth(t: &Type) -> u32 {
        match t {
            Type::Nat => 0,
            Type::Arrow(a, b) => (1 + arrow_depth(a)).max(arrow_depth(b)),
        }
    }

    #[test]
    fn random_types_respect_depth() {
        let mut r = rng(2);
        for _ in 0..60 {
            assert!(arrow_depth(&random_type(&mut r, 2)) <= 2);
        }
    }

    #[test]
    fn sampled_strategies_are_self_consistent_and_often_responsive() {
        let b = law_bounds();
        let g = GameExpr::lolli(GameExpr::bang(GameExpr::Nat), GameExpr::Nat);
        let mut r = rng(5);
        let mut responsive = 0;
        for _ in 0..12 {
            let s = random_finite(&mut r, &g, &b);
            assert!(self_consistent(&s, &b));
            if s.next_move(&Move::q(vec![Tag::R])).is_some() {
                responsive += 1;
            }
        }
        assert!(responsive >= 6, "only {responsive} of 12 drawn tables respond");
    }

    #[test]
    fn sampled_higher_order_strategies_stay_legal() {
        let b = law_bounds();
        let inner = game_of_type(&Type::arrow(Type::Nat, Type::Nat));
        let g = GameExpr::lolli(GameExpr::bang(inner), GameExpr::Nat);
        let mut r = rng(9);
        for _ in 0..8 {
            let s = random_finite(&mut r, &g, &b);
            assert!(self_consistent(&s, &b));
        }
    }

    #[test]
    fn category_suite_passes() {
        let rep = category_laws(7, 6);
        assert!(rep.ok(), "{:?}", rep.failures);
        assert_eq!(rep.subjects, 18);
    }

    #[test]
    fn comonad_suite_passes() {
        let rep = comonad_laws(11, 4);
        assert!(rep.ok(), "{:?}", rep.failures);
    }

    #[test]
    fn comonoid_suite_passes() {
        let rep = comonoid_laws(3, 5);
        assert!(rep.ok(), "{:?}", rep.failures);
    }

    #[test]
    fn bang_lemma_suite_passes() {
        let rep = bang_lemma_laws(5, 8);
        assert!(rep.ok(), "{:?}", rep.failures);
    }

    #[test]
    fn decomposition_suite_passes() {
        let rep = decomposition_laws(13, 10);
        assert!(rep.ok(), "{:?}", rep.failures);
    }

    #[test]
    fn approximation_suite_passes_on_samples() {
        let rep = approximation_laws(&["\\x:N. succ x", "\\f:N -> N. f 0", "2"], 3);
        assert!(rep.ok(), "{:?}", rep.failures);
    }

    #[test]
    fn readback_suite_passes_on_samples() {
        let rep = readback_laws(&["\\x:N. x", "\\x:N. \\y:N. y", "if0 0 1 2"], 2);
        assert!(rep.ok(), "{:?}", rep.failures);
    }

    #[test]
    fn dispatch_suite_passes_on_samples() {
        let rep = dispatch_laws(&["\\x:N. succ x", "\\f:N -> N. f 1"], 2);
        assert!(rep.ok(), "{:?}", rep.failures);
    }

    #[test]
    fn corpus_terms_are_closed_and_well_typed() {
        let terms = law_terms();
        assert!(terms.len() >= 50);
        for src in terms {
            let t = parse(src).unwrap_or_else(|e| panic!("{src}: {e}"));
            typecheck(&[], &t).unwrap_or_else(|e| panic!("{src}: {e}"));
        }
    }

    #[test]
    fn run_all_reports_every_suite() {
        let reports = run_all(1, 2);
        assert_eq!(reports.len(), 5);
        for rep in reports {
            assert!(rep.ok(), "{}: {:?}", rep.name, rep.failures);
        }
    }
}
