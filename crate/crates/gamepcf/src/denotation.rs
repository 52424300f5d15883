//! Term denotations: compile typed terms and finite evaluation trees to
//! strategies over their games, and run ground programs by asking the
//! output question.

use crate::combinators as c;
use crate::game_core::{context_game, game_of_type, Base, GameExpr, Move, Tag};
use crate::pcf_lang::{mentions_y, typecheck, unfold_y, BudgetReport, Fet, Outcome, Term, Type};
use crate::strategy::{exhaustion_count, Strategy};

/// Unfolding depth for recursion when a term is compiled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fuel {
    pub y_depth: u32,
}

impl Default for Fuel {
    fn default() -> Fuel {
        Fuel { y_depth: 32 }
    }
}

fn ctx_types(env: &[(String, Type)]) -> Vec<Type> {
    env.iter().map(|(_, t)| t.clone()).collect()
}

fn short(t: &Term) -> String {
    let s = t.to_string();
    if s.len() > 40 {
        format!("{}...", &s[..37])
    } else {
        s
    }
}

/// Compile a term against a named context. Recursion is replaced by its
/// finite unfolding at the fuel's depth first, so deeper fuel yields a
/// larger approximation of the same strategy.
pub fn denote(env: &[(String, Type)], t: &Term, fuel: Fuel) -> Strategy {
    let name = format!("den({})", short(t));
    let unfolded = unfold_y(t, fuel.y_depth);
    denote_unfolded(env, &unfolded).named(name)
}

pub fn denote_closed(t: &Term, fuel: Fuel) -> Strategy {
    denote(&[], t, fuel)
}

fn var_index(env: &[(String, Type)], x: &str) -> usize {
    env.iter()
        .rposition(|(y, _)| y == x)
        .unwrap_or_else(|| panic!("unbound variable `{x}`"))
        + 1
}

fn denote_unfolded(env: &[(String, Type)], t: &Term) -> Strategy {
    let types = ctx_types(env);
    let ctx = context_game(&types);
    match t {
        Term::Var(x) => c::ctx_proj(&types, var_index(env, x)),
        Term::Lam(x, ty, body) => {
            let mut inner = env.to_vec();
            inner.push((x.clone(), ty.clone()));
            c::emit_arg(&denote_unfolded(&inner, body))
        }
        Term::App(f, a) => c::app_strategy(&denote_unfolded(env, f), &denote_unfolded(env, a)),
        Term::Num(n) => c::weaken_into(ctx, &c::numeral(*n)),
        Term::Succ => c::weaken_into(ctx, &c::succ_strategy()),
        Term::Pred => c::weaken_into(ctx, &c::pred_strategy()),
        Term::If0 => c::weaken_into(ctx, &c::if0_strategy()),
        Term::CaseK(k) => c::weaken_into(ctx, &c::case_k(*k)),
        Term::Omega(ty) => c::bottom(GameExpr::lolli(GameExpr::bang(ctx), game_of_type(ty))),
        Term::Y(_) => unreachable!("recursion is unfolded before compilation"),
    }
}

/// Compile a finite evaluation tree against a named context. Branch
/// strategies are built on demand, so infinite-looking answer maps cost
/// nothing until interrogated.
pub fn denote_fet(env: &[(String, Type)], p: &Fet) -> Strategy {
    let types = ctx_types(env);
    let ctx = context_game(&types);
    match p {
        Fet::Omega => c::bottom(GameExpr::lolli(GameExpr::bang(ctx), GameExpr::Nat)),
        Fet::Num(n) => c::weaken_into(ctx, &c::numeral(*n)),
        Fet::Case {
            head,
            args,
            answers,
        } => {
            let i = var_index(env, head);
            let arg_strats: Vec<Strategy> = args.iter().map(|a| denote_fet(env, a)).collect();
            let answers = answers.clone();
            let env_owned = env.to_vec();
            c::c_i_flat(&types, i, &arg_strats, move |n| {
                answers.get(&n).map(|f| denote_fet(&env_owned, f))
            })
        }
        Fet::Lam { binders, body } => {
            let mut inner = env.to_vec();
            inner.extend(binders.iter().cloned());
            let mut s = denote_fet(&inner, body);
            for _ in binders {
                s = c::emit_arg(&s);
            }
            s
        }
    }
}

/// Depth ladder for iterative deepening: 0, 1, 2, 4, ... capped at `max`.
fn depth_ladder(max: u32) -> Vec<u32> {
    let mut out = vec![0];
    let mut d = 1;
    while d < max {
        out.push(d);
        d = d.saturating_mul(2);
    }
    if max > 0 {
        out.push(max);
    }
    out
}

/// Run a closed ground program by compiling it and asking the output
/// question. Recursion is approximated by iterative deepening up to the
/// fuel's depth; an answer at any depth is an answer of the term. Silence
/// without budget exhaustion is definitive for recursion-free terms and
/// inconclusive otherwise.
pub fn run_game(t: &Term, fuel: Fuel) -> Outcome {
    let ty = typecheck(&[], t).expect("run_game wants a well-typed closed term");
    assert_eq!(ty, Type::Nat, "run_game wants a ground program, got {ty}");
    let recursive = mentions_y(t);
    let depths = if recursive {
        depth_ladder(fuel.y_depth)
    } else {
        vec![0]
    };
    let probe = Move::q(vec![Tag::R]);
    let mut tried = Vec::new();
    let mut budget_hit = false;
    for d in depths {
        tried.push(d);
        let strat = denote_closed(t, Fuel { y_depth: d });
        let before = exhaustion_count();
        if let Some(m) = strat.next_move(&probe) {
            if let (&[Tag::R], Base::Ans(n)) = (m.path.as_slice(), m.base) {
                return Outcome::Answer(n);
            }
        }
        if exhaustion_count() > before {
            budget_hit = true;
            break;
        }
    }
    Outcome::Unresolved(BudgetReport {
        steps_taken: if budget_hit { c::step_budget() } else { 0 },
        step_budget: c::step_budget(),
        stuck: !budget_hit && !recursive,
        y_depths_tried: if recursive { tried } else { vec![] },
    })
}
