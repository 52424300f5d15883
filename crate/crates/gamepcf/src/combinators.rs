//! Strategy constructors: copycat wirings, the execution loop that composes
//! strategies, the multiplicative and exponential structure (tensor,
//! promotion, dereliction, contraction, the product isos), cartesian pairing
//! and projections, the case machinery, and the arithmetic primitives.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::game_core::{index, Base, GameExpr, Move, Tag};
use crate::pcf_lang::Type;
use crate::strategy::{Diagnostics, Strategy};

pub const DEFAULT_STEPS: u64 = 100_000;

static STEP_BUDGET: AtomicU64 = AtomicU64::new(DEFAULT_STEPS);

/// The budget used by every composition a derived combinator builds.
pub fn step_budget() -> u64 {
    STEP_BUDGET.load(Ordering::Relaxed)
}

pub fn set_step_budget(n: u64) {
    STEP_BUDGET.store(n.max(1), Ordering::Relaxed);
}

/// A partial injection between the move alphabets of two games, given by
/// path-prefix rewriting or explicit functions. Yields a copycat strategy
/// or conjugates an existing strategy onto the renamed alphabet.
#[derive(Clone)]
pub struct Wiring {
    left: GameExpr,
    right: GameExpr,
    fwd: Arc<dyn Fn(&Move) -> Option<Move> + Send + Sync>,
    bwd: Arc<dyn Fn(&Move) -> Option<Move> + Send + Sync>,
}

fn rewrite(rules: &[(Vec<Tag>, Vec<Tag>)], m: &Move) -> Option<Move> {
    for (from, to) in rules {
        if m.path.starts_with(from) {
            let mut path = to.clone();
            path.extend_from_slice(&m.path[from.len()..]);
            return Some(Move { path, base: m.base });
        }
    }
    None
}

impl Wiring {
    /// Prefix-rewriting rules, applied first match wins; the inverse applies
    /// them flipped.
    pub fn from_rules(left: GameExpr, right: GameExpr, rules: Vec<(Vec<Tag>, Vec<Tag>)>) -> Wiring {
        let inv: Vec<(Vec<Tag>, Vec<Tag>)> =
            rules.iter().map(|(a, b)| (b.clone(), a.clone())).collect();
        let r1 = rules;
        Wiring {
            left,
            right,
            fwd: Arc::new(move |m| rewrite(&r1, m)),
            bwd: Arc::new(move |m| rewrite(&inv, m)),
        }
    }

    pub fn from_fns(
        left: GameExpr,
        right: GameExpr,
        fwd: impl Fn(&Move) -> Option<Move> + Send + Sync + 'static,
        bwd: impl Fn(&Move) -> Option<Move> + Send + Sync + 'static,
    ) -> Wiring {
        Wiring {
            left,
            right,
            fwd: Arc::new(fwd),
            bwd: Arc::new(bwd),
        }
    }

    /// The copycat strategy on `left -o right` along the wiring.
    pub fn strategy(&self, name: &str) -> Strategy {
        let fwd = self.fwd.clone();
        let bwd = self.bwd.clone();
        let game = GameExpr::lolli(self.left.clone(), self.right.clone());
        Strategy::from_fn(game, name, move |m| match m.strip(Tag::L) {
            Some(inner) => fwd(&inner).map(|r| r.under(&[Tag::R])),
            None => {
                let inner = m.strip(Tag::R)?;
                bwd(&inner).map(|r| r.under(&[Tag::L]))
            }
        })
    }

    /// Transport a strategy on `left` to one on `right` by renaming its
    /// alphabet through the wiring.
    pub fn conjugate(&self, s: &Strategy, name: &str) -> Strategy {
        assert_eq!(
            s.game(),
            &self.left,
            "conjugation wants a strategy on the wiring's left game"
        );
        let fwd = self.fwd.clone();
        let bwd = self.bwd.clone();
        let inner = s.clone();
        Strategy::from_fn(self.right.clone(), name, move |m| {
            let back = bwd(m)?;
            let resp = inner.next_move(&back)?;
            fwd(&resp)
        })
    }
}

/// The copycat identity on `a -o a`.
pub fn identity(a: GameExpr) -> Strategy {
    Wiring::from_rules(a.clone(), a, vec![(vec![], vec![])]).strategy("id")
}

/// The strategy with no responses at all.
pub fn bottom(game: GameExpr) -> Strategy {
    Strategy::from_fn(game, "bot", |_| None)
}

fn lolli_parts(g: &GameExpr) -> (&GameExpr, &GameExpr) {
    match g {
        GameExpr::Lolli(a, b) => (a, b),
        other => panic!("expected an arrow game, got {other}"),
    }
}

/// Composition by the execution loop: a move on either outer game is
/// bounced through the shared middle game until a strategy goes silent, the
/// step budget runs out, or an outer response emerges.
pub fn compose(s: &Strategy, t: &Strategy, max_steps: u64) -> Strategy {
    let (a, b1) = lolli_parts(s.game());
    let (b2, c) = lolli_parts(t.game());
    assert_eq!(
        b1, b2,
        "composition needs matching middle games: {b1} vs {b2}"
    );
    let game = GameExpr::lolli(a.clone(), c.clone());
    let s = s.clone();
    let t = t.clone();
    let name = format!("({};{})", s.name(), t.name());
    let diag = Arc::new(Diagnostics::default());
    let diag_in = diag.clone();
    Strategy::from_fn(game, name, move |m| {
        enum Side {
            S,
            T,
        }
        let (mut side, mut msg) = if m.path.first() == Some(&Tag::L) {
            (Side::S, m.clone())
        } else {
            (Side::T, m.clone())
        };
        let mut steps = 0u64;
        loop {
            let resp = match side {
                Side::S => s.next_move(&msg)?,
                Side::T => t.next_move(&msg)?,
            };
            match (&side, resp.path.first()) {
                (Side::S, Some(Tag::L)) | (Side::T, Some(Tag::R)) => return Some(resp),
                (Side::S, Some(Tag::R)) => {
                    msg = resp.strip(Tag::R).unwrap().under(&[Tag::L]);
                    side = Side::T;
                }
                (Side::T, Some(Tag::L)) => {
                    msg = resp.strip(Tag::L).unwrap().under(&[Tag::R]);
                    side = Side::S;
                }
                _ => {
                    diag_in.escaped_responses.fetch_add(1, Ordering::Relaxed);
                    return None;
                }
            }
            steps += 1;
            if steps >= max_steps {
                diag_in.steps_exhausted.fetch_add(1, Ordering::Relaxed);
                crate::strategy::note_exhaustion();
                return None;
            }
        }
    })
    .with_diag(diag)
}

pub fn compose_checked(s: &Strategy, t: &Strategy, max_steps: u64) -> Result<Strategy, String> {
    match (s.game(), t.game()) {
        (GameExpr::Lolli(_, b1), GameExpr::Lolli(b2, _)) if b1 == b2 => {
            Ok(compose(s, t, max_steps))
        }
        (sg, tg) => Err(format!("cannot compose {sg} with {tg}")),
    }
}

/// Disjoint parallel play of two strategies.
pub fn tensor(s: &Strategy, t: &Strategy) -> Strategy {
    let (a, b) = lolli_parts(s.game());
    let (c, d) = lolli_parts(t.game());
    let game = GameExpr::lolli(
        GameExpr::tensor(a.clone(), c.clone()),
        GameExpr::tensor(b.clone(), d.clone()),
    );
    let s = s.clone();
    let t = t.clone();
    let name = format!("({}x{})", s.name(), t.name());
    Strategy::from_fn(game, name, move |m| {
        let (side, comp) = (*m.path.first()?, *m.path.get(1)?);
        let target = match comp {
            Tag::L => &s,
            Tag::R => &t,
            _ => return None,
        };
        let local = Move {
            path: [&[side], &m.path[2..]].concat(),
            base: m.base,
        };
        let resp = target.next_move(&local)?;
        let resp_side = *resp.path.first()?;
        Some(Move {
            path: [&[resp_side, comp], &resp.path[1..]].concat(),
            base: resp.base,
        })
    })
}

/// The four-way application switch on `((a -o b) * a) -o b`.
pub fn linear_app(a: GameExpr, b: GameExpr) -> Strategy {
    let fun = GameExpr::lolli(a.clone(), b.clone());
    let game = GameExpr::lolli(GameExpr::tensor(fun, a), b);
    Strategy::from_fn(game, "apply", move |m| {
        let p = &m.path;
        let (from, to): (&[Tag], &[Tag]) = if p.first() == Some(&Tag::R) {
            (&[Tag::R], &[Tag::L, Tag::L, Tag::R])
        } else if p.starts_with(&[Tag::L, Tag::L, Tag::R]) {
            (&[Tag::L, Tag::L, Tag::R], &[Tag::R])
        } else if p.starts_with(&[Tag::L, Tag::L, Tag::L]) {
            (&[Tag::L, Tag::L, Tag::L], &[Tag::L, Tag::R])
        } else if p.starts_with(&[Tag::L, Tag::R]) {
            (&[Tag::L, Tag::R], &[Tag::L, Tag::L, Tag::L])
        } else {
            return None;
        };
        Some(Move {
            path: [to, &p[from.len()..]].concat(),
            base: m.base,
        })
    })
}

/// Currying `(a * b) -o c  ~  a -o (b -o c)` as an alphabet renaming.
pub fn linear_curry(s: &Strategy) -> Result<Strategy, String> {
    let (ab, c) = match s.game() {
        GameExpr::Lolli(ab, c) => (ab, c),
        g => return Err(format!("curry wants an arrow game, got {g}")),
    };
    let (a, b) = match ab.as_ref() {
        GameExpr::Tensor(a, b) => (a.clone(), b.clone()),
        g => return Err(format!("curry wants a tensor source, got {g}")),
    };
    let target = GameExpr::lolli(*a, GameExpr::lolli(*b, c.as_ref().clone()));
    let w = Wiring::from_rules(
        s.game().clone(),
        target,
        vec![
            (vec![Tag::L, Tag::L], vec![Tag::L]),
            (vec![Tag::L, Tag::R], vec![Tag::R, Tag::L]),
            (vec![Tag::R], vec![Tag::R, Tag::R]),
        ],
    );
    Ok(w.conjugate(s, &format!("curry({})", s.name())))
}

pub fn linear_uncurry(s: &Strategy) -> Result<Strategy, String> {
    let (a, bc) = match s.game() {
        GameExpr::Lolli(a, bc) => (a.clone(), bc),
        g => return Err(format!("uncurry wants an arrow game, got {g}")),
    };
    let (b, c) = match bc.as_ref() {
        GameExpr::Lolli(b, c) => (b.clone(), c.clone()),
        g => return Err(format!("uncurry wants an arrow target, got {g}")),
    };
    let target = GameExpr::lolli(GameExpr::tensor(*a, *b), *c);
    let w = Wiring::from_rules(
        s.game().clone(),
        target,
        vec![
            (vec![Tag::L], vec![Tag::L, Tag::L]),
            (vec![Tag::R, Tag::L], vec![Tag::L, Tag::R]),
            (vec![Tag::R, Tag::R], vec![Tag::R]),
        ],
    );
    Ok(w.conjugate(s, &format!("uncurry({})", s.name())))
}

/// Dereliction: interrogate the replicated game in one fixed session.
pub fn der(a: GameExpr) -> Strategy {
    der_at(a, 0)
}

pub fn der_at(a: GameExpr, session: u32) -> Strategy {
    let game = GameExpr::lolli(GameExpr::bang(a.clone()), a);
    Strategy::from_fn(game, format!("der@{session}"), move |m| {
        if let Some(inner) = m.strip(Tag::R) {
            return Some(inner.under(&[Tag::L, Tag::Idx(session)]));
        }
        let inner = m.strip(Tag::L)?;
        match inner.path.split_first() {
            Some((Tag::Idx(i), rest)) if *i == session => Some(Move {
                path: [&[Tag::R], rest].concat(),
                base: inner.base,
            }),
            _ => None,
        }
    })
}

/// Weakening: never engage the replicated source.
pub fn weak(a: GameExpr) -> Strategy {
    bottom(GameExpr::lolli(GameExpr::bang(a), GameExpr::I)).named("weak")
}

/// Contraction: split one replicated source between two replicated targets,
/// keeping their sessions apart by two-colour tagging.
pub fn con(a: GameExpr) -> Strategy {
    let bang = GameExpr::bang(a);
    let game = GameExpr::lolli(bang.clone(), GameExpr::tensor(bang.clone(), bang));
    Strategy::from_fn(game, "con", move |m| {
        if let Some(inner) = m.strip(Tag::R) {
            let (side, rest) = match inner.path.split_first() {
                Some((Tag::L, rest)) => (0u8, rest),
                Some((Tag::R, rest)) => (1u8, rest),
                _ => return None,
            };
            let (Tag::Idx(i), tail) = rest.split_first()? else {
                return None;
            };
            return Some(Move {
                path: [&[Tag::L, Tag::Idx(index::tag(side, *i))][..], tail].concat(),
                base: inner.base,
            });
        }
        let inner = m.strip(Tag::L)?;
        let (Tag::Idx(k), tail) = inner.path.split_first()? else {
            return None;
        };
        let (side, i) = index::untag(*k);
        let comp = if side == 0 { Tag::L } else { Tag::R };
        Some(Move {
            path: [&[Tag::R, comp, Tag::Idx(i)][..], tail].concat(),
            base: inner.base,
        })
    })
}

/// Promotion: replicate a strategy with a replicated source, relocating its
/// source sessions through the index pairing so distinct target sessions
/// stay disjoint.
pub fn promote(s: &Strategy) -> Strategy {
    let (bang_a, b) = lolli_parts(s.game());
    assert!(
        matches!(bang_a, GameExpr::Bang(_)),
        "promotion wants a replicated source, got {bang_a}"
    );
    let game = GameExpr::lolli(bang_a.clone(), GameExpr::bang(b.clone()));
    let inner = s.clone();
    let name = format!("({})!", s.name());
    Strategy::from_fn(game, name, move |m| {
        let (target, local) = if let Some(r) = m.strip(Tag::R) {
            let (Tag::Idx(i), rest) = r.path.split_first()? else {
                return None;
            };
            (
                *i,
                Move {
                    path: [&[Tag::R], rest].concat(),
                    base: r.base,
                },
            )
        } else {
            let l = m.strip(Tag::L)?;
            let (Tag::Idx(k), rest) = l.path.split_first()? else {
                return None;
            };
            let (i, j) = index::unpair(*k);
            (
                i,
                Move {
                    path: [&[Tag::L, Tag::Idx(j)][..], rest].concat(),
                    base: l.base,
                },
            )
        };
        let resp = inner.next_move(&local)?;
        if let Some(r) = resp.strip(Tag::R) {
            Some(r.under(&[Tag::R, Tag::Idx(target)]))
        } else {
            let l = resp.strip(Tag::L)?;
            let (Tag::Idx(j), rest) = l.path.split_first()? else {
                return None;
            };
            Some(Move {
                path: [&[Tag::L, Tag::Idx(index::pair(target, *j))][..], rest].concat(),
                base: l.base,
            })
        }
    })
}

pub fn promote_checked(s: &Strategy) -> Result<Strategy, String> {
    match s.game() {
        GameExpr::Lolli(a, _) if matches!(a.as_ref(), GameExpr::Bang(_)) => Ok(promote(s)),
        g => Err(format!("promotion wants `!A -o B`, got {g}")),
    }
}

/// The replication-product iso, forwards: `!(a & b) -o (!a * !b)`. Sessions
/// opened on the right are relocated to colour-tagged sessions on the left,
/// so the two components never share a session there.
pub fn exp_fwd(a: GameExpr, b: GameExpr) -> Strategy {
    let left = GameExpr::bang(GameExpr::with(a.clone(), b.clone()));
    let right = GameExpr::tensor(GameExpr::bang(a), GameExpr::bang(b));
    let game = GameExpr::lolli(left, right);
    Strategy::from_fn(game, "exp_fwd", move |m| {
        if let Some(r) = m.strip(Tag::R) {
            let (comp, rest) = r.path.split_first()?;
            let side = match comp {
                Tag::L => 0u8,
                Tag::R => 1,
                _ => return None,
            };
            let (Tag::Idx(i), tail) = rest.split_first()? else {
                return None;
            };
            return Some(Move {
                path: [&[Tag::L, Tag::Idx(index::tag(side, *i)), *comp][..], tail].concat(),
                base: r.base,
            });
        }
        let l = m.strip(Tag::L)?;
        let (Tag::Idx(k), rest) = l.path.split_first()? else {
            return None;
        };
        let (comp, tail) = rest.split_first()?;
        let (side, i) = index::untag(*k);
        let expect = if side == 0 { Tag::L } else { Tag::R };
        if *comp != expect {
            return None;
        }
        Some(Move {
            path: [&[Tag::R, *comp, Tag::Idx(i)][..], tail].concat(),
            base: l.base,
        })
    })
}

/// The replication-product iso, backwards: `(!a * !b) -o !(a & b)`. Session
/// indices pass through unchanged; the replicated product already keeps one
/// component per session.
pub fn exp_bwd(a: GameExpr, b: GameExpr) -> Strategy {
    let left = GameExpr::tensor(GameExpr::bang(a.clone()), GameExpr::bang(b.clone()));
    let right = GameExpr::bang(GameExpr::with(a, b));
    let game = GameExpr::lolli(left, right);
    Strategy::from_fn(game, "exp_bwd", move |m| {
        if let Some(r) = m.strip(Tag::R) {
            let (Tag::Idx(k), rest) = r.path.split_first()? else {
                return None;
            };
            let (comp, tail) = rest.split_first()?;
            if !matches!(comp, Tag::L | Tag::R) {
                return None;
            }
            return Some(Move {
                path: [&[Tag::L, *comp, Tag::Idx(*k)][..], tail].concat(),
                base: r.base,
            });
        }
        let l = m.strip(Tag::L)?;
        let (comp, rest) = l.path.split_first()?;
        if !matches!(comp, Tag::L | Tag::R) {
            return None;
        }
        let (Tag::Idx(k), tail) = rest.split_first()? else {
            return None;
        };
        Some(Move {
            path: [&[Tag::R, Tag::Idx(*k), *comp][..], tail].concat(),
            base: l.base,
        })
    })
}

/// Cartesian pairing in the replicated category:
/// `con ; (s! * t!) ; exp_bwd ; der`.
pub fn pair(s: &Strategy, t: &Strategy) -> Strategy {
    let (src_s, a) = lolli_parts(s.game());
    let (src_t, b) = lolli_parts(t.game());
    assert_eq!(src_s, src_t, "pairing wants a shared source");
    let c = match src_s {
        GameExpr::Bang(c) => c.as_ref().clone(),
        g => panic!("pairing wants a replicated source, got {g}"),
    };
    let (a, b) = (a.clone(), b.clone());
    let stage1 = compose(&con(c), &tensor(&promote(s), &promote(t)), step_budget());
    let stage2 = compose(&stage1, &exp_bwd(a.clone(), b.clone()), step_budget());
    compose(&stage2, &der(GameExpr::with(a, b)), step_budget()).named("pair")
}

pub fn pair_checked(s: &Strategy, t: &Strategy) -> Result<Strategy, String> {
    match (s.game(), t.game()) {
        (GameExpr::Lolli(c1, _), GameExpr::Lolli(c2, _))
            if c1 == c2 && matches!(c1.as_ref(), GameExpr::Bang(_)) =>
        {
            Ok(pair(s, t))
        }
        (sg, tg) => Err(format!("cannot pair {sg} with {tg}")),
    }
}

/// The component path of variable `i` (1-based) in a context product of
/// `p` components, which grows to the right.
pub fn ctx_selector(i: usize, p: usize) -> Vec<Tag> {
    assert!(1 <= i && i <= p, "variable {i} out of context of size {p}");
    let mut path = vec![Tag::L; p - i];
    path.push(Tag::R);
    path
}

/// The projection of variable `i` out of the replicated context for `types`.
pub fn ctx_proj(types: &[Type], i: usize) -> Strategy {
    let c = crate::game_core::context_game(types);
    let target = crate::game_core::game_of_type(&types[i - 1]);
    let sel = ctx_selector(i, types.len());
    let w = Wiring::from_rules(c.clone(), target, vec![(sel, vec![])]);
    compose(&der(c), &w.strategy("select"), step_budget()).named(format!("proj{i}"))
}

/// Embed a strategy as one that ignores a replicated context.
pub fn weaken_into(ctx: GameExpr, s: &Strategy) -> Strategy {
    let game = GameExpr::lolli(GameExpr::bang(ctx), s.game().clone());
    let inner = s.clone();
    let name = format!("[{}]", s.name());
    Strategy::from_fn(game, name, move |m| {
        let r = m.strip(Tag::R)?;
        inner.next_move(&r).map(|resp| resp.under(&[Tag::R]))
    })
}

/// View a strategy on `g` as a point `I -o g`.
pub fn point(s: &Strategy) -> Strategy {
    let game = GameExpr::lolli(GameExpr::I, s.game().clone());
    let inner = s.clone();
    let name = format!("pt({})", s.name());
    Strategy::from_fn(game, name, move |m| {
        let r = m.strip(Tag::R)?;
        inner.next_move(&r).map(|resp| resp.under(&[Tag::R]))
    })
}

/// View a strategy on `!I -o g` as a strategy on `g`; the replicated unit
/// context is inert.
pub fn strip_unit_context(s: &Strategy) -> Result<Strategy, String> {
    let GameExpr::Lolli(l, r) = s.game() else {
        return Err(format!("not a function strategy: {}", s.game()));
    };
    if **l != GameExpr::bang(GameExpr::I) {
        return Err(format!("the context {l} is not the replicated unit"));
    }
    let game = (**r).clone();
    let inner = s.clone();
    let name = s.name().to_string();
    Ok(Strategy::from_fn(game, name, move |m| {
        inner
            .next_move(&m.under(&[Tag::R]))
            .and_then(|resp| resp.strip(Tag::R))
    }))
}

/// The numeral strategy on the flat game.
pub fn numeral(n: u32) -> Strategy {
    Strategy::from_fn(GameExpr::Nat, format!("num{n}"), move |m| {
        if m.path.is_empty() && m.base == Base::Q {
            Some(Move::ans(vec![], n))
        } else {
            None
        }
    })
}

/// The constant strategy at a type: answer the output question with `n`,
/// never touching the arguments.
pub fn constant_at(ty: &Type, n: u32) -> Strategy {
    let game = crate::game_core::game_of_type(ty);
    let spine = vec![Tag::R; ty.arity()];
    Strategy::from_fn(game, format!("K{n}"), move |m| {
        if m.path == spine && m.base == Base::Q {
            Some(Move::ans(spine.clone(), n))
        } else {
            None
        }
    })
}

/// A point of the replicated flat game, answering `n` in every session.
pub fn numeral_point(n: u32) -> Strategy {
    let game = GameExpr::lolli(GameExpr::I, GameExpr::bang(GameExpr::Nat));
    Strategy::from_fn(game, format!("num{n}!"), move |m| match m.path.as_slice() {
        [Tag::R, Tag::Idx(i)] if m.base == Base::Q => {
            Some(Move::ans(vec![Tag::R, Tag::Idx(*i)], n))
        }
        _ => None,
    })
}

fn lifted_arith(name: &str, f: impl Fn(u32) -> u32 + Send + Sync + 'static) -> Strategy {
    let game = crate::game_core::game_of_type(&Type::arrow(Type::Nat, Type::Nat));
    Strategy::from_fn(game, name, move |m| match (m.path.as_slice(), m.base) {
        ([Tag::R], Base::Q) => Some(Move::q(vec![Tag::L, Tag::Idx(0)])),
        ([Tag::L, Tag::Idx(0)], Base::Ans(n)) => Some(Move::ans(vec![Tag::R], f(n))),
        _ => None,
    })
}

pub fn succ_strategy() -> Strategy {
    lifted_arith("succ", |n| n + 1)
}

pub fn pred_strategy() -> Strategy {
    lifted_arith("pred", |n| n.saturating_sub(1))
}

/// The conditional: ask the condition, then copy the answer of the branch
/// the condition selects.
pub fn if0_strategy() -> Strategy {
    let ty = crate::pcf_lang::parse_type("N -> N -> N -> N").unwrap();
    let game = crate::game_core::game_of_type(&ty);
    let out = vec![Tag::R, Tag::R, Tag::R];
    Strategy::from_fn(game, "if0", move |m| match (m.path.as_slice(), m.base) {
        ([Tag::R, Tag::R, Tag::R], Base::Q) => Some(Move::q(vec![Tag::L, Tag::Idx(0)])),
        ([Tag::L, Tag::Idx(0)], Base::Ans(0)) => Some(Move::q(vec![Tag::R, Tag::L, Tag::Idx(0)])),
        ([Tag::L, Tag::Idx(0)], Base::Ans(_)) => {
            Some(Move::q(vec![Tag::R, Tag::R, Tag::L, Tag::Idx(0)]))
        }
        ([Tag::R, Tag::L, Tag::Idx(0)], Base::Ans(n))
        | ([Tag::R, Tag::R, Tag::L, Tag::Idx(0)], Base::Ans(n)) => Some(Move::ans(out.clone(), n)),
        _ => None,
    })
}

/// The k-branch case primitive: ask the scrutinee; on answer `i < k` copy
/// branch i's answer to the output, on `i >= k` go silent.
pub fn case_k(k: u32) -> Strategy {
    let mut ty = Type::Nat;
    for _ in 0..=k {
        ty = Type::arrow(Type::Nat, ty);
    }
    let game = crate::game_core::game_of_type(&ty);
    let out = vec![Tag::R; k as usize + 1];
    Strategy::from_fn(game, format!("case{k}"), move |m| {
        if m.path == out && m.base == Base::Q {
            return Some(Move::q(vec![Tag::L, Tag::Idx(0)]));
        }
        if m.path.as_slice() == [Tag::L, Tag::Idx(0)] {
            return match m.base {
                Base::Ans(i) if i < k => {
                    let mut path = vec![Tag::R; i as usize + 1];
                    path.push(Tag::L);
                    path.push(Tag::Idx(0));
                    Some(Move::q(path))
                }
                _ => None,
            };
        }
        if let Base::Ans(n) = m.base {
            if m.path.len() >= 3 && m.path.ends_with(&[Tag::L, Tag::Idx(0)]) {
                let lead = &m.path[..m.path.len() - 2];
                if lead.iter().all(|t| *t == Tag::R) && lead.len() <= k as usize {
                    return Some(Move::ans(out.clone(), n));
                }
            }
        }
        None
    })
}

/// The case evaluator over a scrutinee-and-answers product:
/// `(N * Fam(N)) -o N`. Asks the scrutinee, then asks the family member the
/// answer selects, then copies that member's answer out.
pub fn chi_a() -> Strategy {
    let left = GameExpr::tensor(GameExpr::Nat, GameExpr::with_omega(GameExpr::Nat));
    let game = GameExpr::lolli(left, GameExpr::Nat);
    Strategy::from_fn(game, "case_eval", |m| match (m.path.as_slice(), m.base) {
        ([Tag::R], Base::Q) => Some(Move::q(vec![Tag::L, Tag::L])),
        ([Tag::L, Tag::L], Base::Ans(n)) => Some(Move::q(vec![Tag::L, Tag::R, Tag::Fam(n)])),
        ([Tag::L, Tag::R, Tag::Fam(_)], Base::Ans(v)) => Some(Move::ans(vec![Tag::R], v)),
        _ => None,
    })
}

/// The case evaluator lifted to the replicated product:
/// `!(N & Fam(N)) -o N`.
pub fn chi() -> Strategy {
    let fam = GameExpr::with_omega(GameExpr::Nat);
    let stage1 = exp_fwd(GameExpr::Nat, fam.clone());
    let stage2 = tensor(&der(GameExpr::Nat), &der(fam));
    compose(
        &compose(&stage1, &stage2, step_budget()),
        &chi_a(),
        DEFAULT_STEPS,
    )
    .named("case_eval!")
}

/// A countable family of strategies with a shared replicated source, played
/// as one strategy onto the countable product. Component `n` relocates its
/// source sessions through `pair(n, -)`.
pub fn tuple_family(
    ctx: GameExpr,
    family: impl Fn(u32) -> Option<Strategy> + Send + Sync + 'static,
) -> Strategy {
    let game = GameExpr::lolli(GameExpr::bang(ctx), GameExpr::with_omega(GameExpr::Nat));
    let cache: std::sync::Mutex<std::collections::HashMap<u32, Option<Strategy>>> =
        std::sync::Mutex::new(std::collections::HashMap::new());
    let get = move |n: u32| -> Option<Strategy> {
        let mut c = cache.lock().unwrap();
        c.entry(n).or_insert_with(|| family(n)).clone()
    };
    Strategy::from_fn(game, "family", move |m| {
        let (n, local) = if let Some(r) = m.strip(Tag::R) {
            let (Tag::Fam(n), rest) = r.path.split_first()? else {
                return None;
            };
            (
                *n,
                Move {
                    path: [&[Tag::R], rest].concat(),
                    base: r.base,
                },
            )
        } else {
            let l = m.strip(Tag::L)?;
            let (Tag::Idx(k), rest) = l.path.split_first()? else {
                return None;
            };
            let (n, j) = index::unpair(*k);
            (
                n,
                Move {
                    path: [&[Tag::L, Tag::Idx(j)][..], rest].concat(),
                    base: l.base,
                },
            )
        };
        let member = get(n)?;
        let resp = member.next_move(&local)?;
        if let Some(r) = resp.strip(Tag::R) {
            Some(r.under(&[Tag::R, Tag::Fam(n)]))
        } else {
            let l = resp.strip(Tag::L)?;
            let (Tag::Idx(j), rest) = l.path.split_first()? else {
                return None;
            };
            Some(Move {
                path: [&[Tag::L, Tag::Idx(index::pair(n, *j))][..], rest].concat(),
                base: l.base,
            })
        }
    })
}

/// Application against a shared context: `con ; (fun * arg!) ; apply`.
pub fn app_strategy(fun: &Strategy, arg: &Strategy) -> Strategy {
    let (ctx_f, fg) = lolli_parts(fun.game());
    let (ctx_a, _) = lolli_parts(arg.game());
    assert_eq!(ctx_f, ctx_a, "application wants a shared context");
    let c = match ctx_f {
        GameExpr::Bang(c) => c.as_ref().clone(),
        g => panic!("application wants a replicated context, got {g}"),
    };
    let (bang_arg, out) = match fg {
        GameExpr::Lolli(a, b) => (a.as_ref().clone(), b.as_ref().clone()),
        g => panic!("application wants a function strategy, got {g}"),
    };
    assert!(
        matches!(bang_arg, GameExpr::Bang(_)),
        "function source must be replicated, got {bang_arg}"
    );
    let stage1 = compose(&con(c), &tensor(fun, &promote(arg)), step_budget());
    compose(&stage1, &linear_app(bang_arg, out), step_budget()).named("app")
}

/// The lambda step: a strategy against a context extended with one variable
/// becomes a function strategy against the smaller context, by splitting
/// the replicated product and currying.
pub fn emit_arg(s: &Strategy) -> Strategy {
    let (src, _) = lolli_parts(s.game());
    let (c, x) = match src {
        GameExpr::Bang(cx) => match cx.as_ref() {
            GameExpr::With(c, x) => (c.as_ref().clone(), x.as_ref().clone()),
            g => panic!("lambda wants an extended context, got {g}"),
        },
        g => panic!("lambda wants a replicated context, got {g}"),
    };
    let flat = compose(&exp_bwd(c, x), s, step_budget());
    linear_curry(&flat)
        .expect("splitting an extended context always curries")
        .named(format!("lam({})", s.name()))
}

/// Inverse of `emit_arg`: absorb the leftmost argument into the context.
pub fn absorb_arg(s: &Strategy) -> Strategy {
    let (bang_c, fg) = lolli_parts(s.game());
    let c = match bang_c {
        GameExpr::Bang(c) => c.as_ref().clone(),
        g => panic!("absorb wants a replicated context, got {g}"),
    };
    let x = match fg {
        GameExpr::Lolli(bx, _) => match bx.as_ref() {
            GameExpr::Bang(x) => x.as_ref().clone(),
            g => panic!("absorb wants a replicated argument, got {g}"),
        },
        g => panic!("absorb wants a function strategy, got {g}"),
    };
    let flat = linear_uncurry(s).expect("a function strategy always uncurries");
    compose(&exp_fwd(c, x), &flat, step_budget()).named(format!("absorb({})", s.name()))
}

/// The head-spine composite: project variable `i`, apply it to the given
/// argument strategies, pair the result with the answer family, and run the
/// case evaluator over it.
pub fn c_i_flat(
    types: &[Type],
    i: usize,
    args: &[Strategy],
    answers: impl Fn(u32) -> Option<Strategy> + Send + Sync + 'static,
) -> Strategy {
    let c = crate::game_core::context_game(types);
    let head_ty = &types[i - 1];
    assert_eq!(
        args.len(),
        head_ty.arity(),
        "head variable of type {head_ty} takes {} arguments",
        head_ty.arity()
    );
    let mut spine = ctx_proj(types, i);
    for a in args {
        spine = app_strategy(&spine, a);
    }
    let fam = tuple_family(c, answers);
    compose(&promote(&pair(&spine, &fam)), &chi(), step_budget()).named(format!("case_head{i}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game_core::Bounds;
    use crate::strategy::{strat_equiv, traces, PlayDriver};

    fn mv(s: &str) -> Move {
        s.parse().unwrap()
    }

    fn small_bounds() -> Bounds {
        Bounds {
            max_nat: 3,
            max_index: 2,
            max_len: 10,
            max_steps: 10_000,
        }
    }

    #[test]
    fn identity_copies_both_ways() {
        let id = identity(GameExpr::Nat);
        assert_eq!(id.next_move(&mv("R.Q")), Some(mv("L.Q")));
        assert_eq!(id.next_move(&mv("L.Ans(4)")), Some(mv("R.Ans(4)")));
    }

    #[test]
    fn compose_runs_successor_against_a_numeral() {
        let two = numeral_point(2);
        let s = compose(&two, &succ_strategy(), DEFAULT_STEPS);
        assert_eq!(s.next_move(&mv("R.Q")), Some(mv("R.Ans(3)")));
        let double = compose(
            &compose(&two, &promote(&succ_strategy()), DEFAULT_STEPS),
            &succ_strategy(),
            DEFAULT_STEPS,
        );
        assert_eq!(double.next_move(&mv("R.Q")), Some(mv("R.Ans(4)")));
    }

    #[test]
    fn identity_laws_at_small_bounds() {
        let b = small_bounds();
        let s = succ_strategy();
        let left = compose(&identity(GameExpr::bang(GameExpr::Nat)), &s, DEFAULT_STEPS);
        let right = compose(&s, &identity(GameExpr::Nat), DEFAULT_STEPS);
        assert!(strat_equiv(&left, &s, &b));
        assert!(strat_equiv(&right, &s, &b));
    }

    #[test]
    fn der_session_choice_is_equivalent() {
        let b = small_bounds();
        assert!(strat_equiv(
            &der(GameExpr::Nat),
            &der_at(GameExpr::Nat, 1),
            &b
        ));
    }

    #[test]
    fn promote_relocates_sessions_through_pairing() {
        let p = promote(&der(GameExpr::Nat));
        assert_eq!(index::pair(5, 0), 15);
        assert_eq!(p.next_move(&mv("R.5!.Q")), Some(mv("L.15!.Q")));
        assert_eq!(p.next_move(&mv("L.15!.Ans(7)")), Some(mv("R.5!.Ans(7)")));
    }

    #[test]
    fn contraction_splits_by_colour() {
        let c = con(GameExpr::Nat);
        assert_eq!(c.next_move(&mv("R.L.3!.Q")), Some(mv("L.6!.Q")));
        assert_eq!(c.next_move(&mv("R.R.3!.Q")), Some(mv("L.7!.Q")));
        assert_eq!(c.next_move(&mv("L.6!.Ans(2)")), Some(mv("R.L.3!.Ans(2)")));
        assert_eq!(c.next_move(&mv("L.7!.Ans(2)")), Some(mv("R.R.3!.Ans(2)")));
    }

    #[test]
    fn linear_app_is_the_four_way_switch() {
        let app = linear_app(GameExpr::bang(GameExpr::Nat), GameExpr::Nat);
        assert_eq!(app.next_move(&mv("R.Q")), Some(mv("L.L.R.Q")));
        assert_eq!(app.next_move(&mv("L.L.L.3!.Q")), Some(mv("L.R.3!.Q")));
        assert_eq!(
            app.next_move(&mv("L.R.3!.Ans(4)")),
            Some(mv("L.L.L.3!.Ans(4)"))
        );
        assert_eq!(app.next_move(&mv("L.L.R.Ans(9)")), Some(mv("R.Ans(9)")));
    }

    #[test]
    fn curry_uncurry_round_trip() {
        let s = chi_a();
        let c = linear_curry(&s).unwrap();
        assert_eq!(
            c.game(),
            &GameExpr::lolli(
                GameExpr::Nat,
                GameExpr::lolli(GameExpr::with_omega(GameExpr::Nat), GameExpr::Nat)
            )
        );
        let back = linear_uncurry(&c).unwrap();
        for probe in ["R.Q", "L.L.Ans(2)", "L.R.2&.Ans(7)"] {
            assert_eq!(back.next_move(&mv(probe)), s.next_move(&mv(probe)));
        }
    }

    #[test]
    fn if0_chooses_branches() {
        let s = if0_strategy();
        assert_eq!(s.next_move(&mv("R.R.R.Q")), Some(mv("L.0!.Q")));
        assert_eq!(s.next_move(&mv("L.0!.Ans(0)")), Some(mv("R.L.0!.Q")));
        assert_eq!(s.next_move(&mv("L.0!.Ans(2)")), Some(mv("R.R.L.0!.Q")));
        assert_eq!(s.next_move(&mv("R.L.0!.Ans(7)")), Some(mv("R.R.R.Ans(7)")));
    }

    #[test]
    fn case_k_selects_and_goes_silent_out_of_range() {
        let s = case_k(2);
        assert_eq!(s.next_move(&mv("R.R.R.Q")), Some(mv("L.0!.Q")));
        assert_eq!(s.next_move(&mv("L.0!.Ans(0)")), Some(mv("R.L.0!.Q")));
        assert_eq!(s.next_move(&mv("L.0!.Ans(1)")), Some(mv("R.R.L.0!.Q")));
        assert_eq!(s.next_move(&mv("L.0!.Ans(2)")), None);
        assert_eq!(s.next_move(&mv("R.L.0!.Ans(7)")), Some(mv("R.R.R.Ans(7)")));
        assert_eq!(
            s.next_move(&mv("R.R.L.0!.Ans(5)")),
            Some(mv("R.R.R.Ans(5)"))
        );
        assert_eq!(s.next_move(&mv("R.R.R.L.0!.Ans(5)")), None);
    }

    #[test]
    fn exp_isos_compose_to_identities() {
        let b = small_bounds();
        let (n, m) = (GameExpr::Nat, GameExpr::Nat);
        let fwd_bwd = compose(
            &exp_fwd(n.clone(), m.clone()),
            &exp_bwd(n.clone(), m.clone()),
            DEFAULT_STEPS,
        );
        let id_bang = identity(GameExpr::bang(GameExpr::with(n.clone(), m.clone())));
        assert!(strat_equiv(&fwd_bwd, &id_bang, &b));
        let bwd_fwd = compose(
            &exp_bwd(n.clone(), m.clone()),
            &exp_fwd(n.clone(), m.clone()),
            DEFAULT_STEPS,
        );
        let id_tensor = identity(GameExpr::tensor(
            GameExpr::bang(n.clone()),
            GameExpr::bang(m),
        ));
        assert!(strat_equiv(&bwd_fwd, &id_tensor, &b));
    }

    #[test]
    fn pairing_projects_back() {
        let b = small_bounds();
        let types = [Type::Nat];
        let ctx = crate::game_core::context_game(&types);
        let x = ctx_proj(&types, 1);
        let k2 = weaken_into(ctx.clone(), &numeral(2));
        let paired = pair(&x, &k2);
        let with_nn = GameExpr::with(GameExpr::Nat, GameExpr::Nat);
        let fst = compose(
            &der(with_nn.clone()),
            &Wiring::from_rules(with_nn.clone(), GameExpr::Nat, vec![(vec![Tag::L], vec![])])
                .strategy("fst"),
            DEFAULT_STEPS,
        );
        let snd = compose(
            &der(with_nn.clone()),
            &Wiring::from_rules(with_nn, GameExpr::Nat, vec![(vec![Tag::R], vec![])])
                .strategy("snd"),
            DEFAULT_STEPS,
        );
        let p1 = compose(&promote(&paired), &fst, DEFAULT_STEPS);
        let p2 = compose(&promote(&paired), &snd, DEFAULT_STEPS);
        assert!(strat_equiv(&p1, &x, &b));
        assert!(strat_equiv(&p2, &k2, &b));
    }

    #[test]
    fn chi_evaluates_a_case() {
        let scrut = weaken_into(GameExpr::I, &numeral(2));
        let fam = tuple_family(GameExpr::I, |n| {
            Some(weaken_into(GameExpr::I, &numeral(n + 10)))
        });
        let s = compose(&promote(&pair(&scrut, &fam)), &chi(), DEFAULT_STEPS);
        assert_eq!(s.next_move(&mv("R.Q")), Some(mv("R.Ans(12)")));
    }

    #[test]
    fn c_i_flat_builds_a_case_head() {
        let types = [Type::Nat];
        let ctx = crate::game_core::context_game(&types);
        let s = c_i_flat(&types, 1, &[], move |n| {
            Some(weaken_into(ctx.clone(), &numeral(n + 1)))
        });
        let mut d = PlayDriver::new(s);
        let first = d.feed(mv("R.Q")).unwrap().unwrap();
        assert_eq!(first.base, Base::Q);
        assert!(first.path.starts_with(&[Tag::L]));
        assert!(first.path.ends_with(&[Tag::R]));
        let answer = Move::ans(first.path.clone(), 2);
        assert_eq!(d.feed(answer).unwrap(), Some(mv("R.Ans(3)")));
    }

    #[test]
    fn emit_and_absorb_round_trip() {
        let types = [Type::Nat, Type::Nat];
        let s = ctx_proj(&types, 2);
        let split = emit_arg(&s);
        let back = absorb_arg(&split);
        let b = small_bounds();
        assert!(strat_equiv(&s, &back, &b));
        let t = traces(&split, &b);
        assert!(t.iter().any(|p| p.len() == 4));
    }

    #[test]
    fn weaken_never_engages_the_context() {
        let w = weaken_into(GameExpr::Nat, &numeral(7));
        assert_eq!(w.next_move(&mv("R.Q")), Some(mv("R.Ans(7)")));
        assert_eq!(w.next_move(&mv("L.0!.Q")), None);
    }
}
