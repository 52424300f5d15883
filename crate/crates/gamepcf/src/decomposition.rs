//! Taking strategies apart: the head probe `phi` classifies a strategy over
//! a replicated context as silent, constant, or a case dispatch on one
//! context variable, with the component strategies derived lazily from the
//! parent by move re-routing. On top of it sit the depth-k truncations
//! `p_k`, readback `eta_k` to finite evaluation trees, the code-level
//! dispatch tables `dhb`, the bounded simulation `preceq_k`, and
//! `apply_via_decomposition`, which evaluates an application by repeated
//! head dispatch instead of composition.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::combinators as c;
use crate::game_core::{context_game, game_of_type, Base, GameExpr, Move, Tag};
use crate::pcf_lang::{BudgetReport, Fet, Outcome, Type};
use crate::strategy::{decode, exhaustion_count, Strategy, StrategyCode};

pub(crate) fn type_of_game(g: &GameExpr) -> Option<Type> {
    match g {
        GameExpr::Nat => Some(Type::Nat),
        GameExpr::Lolli(l, r) => match l.as_ref() {
            GameExpr::Bang(a) => Some(Type::arrow(type_of_game(a)?, type_of_game(r)?)),
            _ => None,
        },
        _ => None,
    }
}

fn types_of_context(g: &GameExpr) -> Option<Vec<Type>> {
    match g {
        GameExpr::I => Some(Vec::new()),
        GameExpr::With(a, b) => {
            let mut ts = types_of_context(a)?;
            ts.push(type_of_game(b)?);
            Some(ts)
        }
        _ => None,
    }
}

pub(crate) fn split_strategy_game(g: &GameExpr) -> Result<(Vec<Type>, Type), String> {
    let shape_err = || format!("not a strategy over a replicated context: {g}");
    let GameExpr::Lolli(l, r) = g else {
        return Err(shape_err());
    };
    let GameExpr::Bang(ctx) = l.as_ref() else {
        return Err(shape_err());
    };
    let types = types_of_context(ctx).ok_or_else(shape_err)?;
    let result = type_of_game(r).ok_or_else(shape_err)?;
    Ok((types, result))
}

fn arg_types(t: &Type) -> Vec<Type> {
    let mut out = Vec::new();
    let mut cur = t;
    while let Type::Arrow(a, b) = cur {
        out.push(a.as_ref().clone());
        cur = b;
    }
    out
}

/// Absorb every argument of the result type into the context, leaving a
/// ground strategy over the extended context.
pub fn flatten(s: &Strategy) -> Result<(Strategy, Vec<Type>), String> {
    let (mut types, result) = split_strategy_game(s.game())?;
    let mut flat = s.clone();
    for a in arg_types(&result) {
        flat = c::absorb_arg(&flat);
        types.push(a);
    }
    Ok((flat, types))
}

/// What the head probe found: nothing, an immediate answer, or a dispatch
/// on a context variable.
#[derive(Clone)]
pub enum Decomp {
    Bottom,
    Const(u32),
    Case(CaseSplit),
}

/// A strategy that opens by interrogating context variable `head`. The
/// argument strategies and the answer continuations are views of the parent
/// obtained by re-routing moves, so probing them costs one parent probe per
/// move.
#[derive(Clone)]
pub struct CaseSplit {
    head: usize,
    session: u32,
    types: Vec<Type>,
    head_path: Vec<Tag>,
    parent: Strategy,
}

fn parse_head_question(m: &Move, types: &[Type]) -> Result<(usize, u32), String> {
    let fail = || format!("not a head question: {m}");
    if m.base != Base::Q {
        return Err(fail());
    }
    let [Tag::L, Tag::Idx(session), sel @ ..] = m.path.as_slice() else {
        return Err(fail());
    };
    let lefts = sel.iter().take_while(|t| **t == Tag::L).count();
    if lefts >= types.len() {
        return Err(fail());
    }
    let head = types.len() - lefts;
    let arity = types[head - 1].arity();
    let tail = &sel[lefts..];
    if tail.len() != arity + 1 || tail.iter().any(|t| *t != Tag::R) {
        return Err(fail());
    }
    Ok((head, *session))
}

fn phi_flat(flat: &Strategy, types: &[Type]) -> Result<Decomp, String> {
    match flat.next_move(&Move::q(vec![Tag::R])) {
        None => Ok(Decomp::Bottom),
        Some(m) if m.path.as_slice() == [Tag::R] => match m.base {
            Base::Ans(n) => Ok(Decomp::Const(n)),
            Base::Q => Err(format!("malformed opening response {m}")),
        },
        Some(m) => {
            let (head, session) = parse_head_question(&m, types)?;
            Ok(Decomp::Case(CaseSplit {
                head,
                session,
                types: types.to_vec(),
                head_path: m.path,
                parent: flat.clone(),
            }))
        }
    }
}

/// Classify a strategy by its response to the opening question, after
/// flattening the result type into the context. Exactly one variant applies
/// to any strategy of the right shape.
pub fn phi(s: &Strategy) -> Result<Decomp, String> {
    let (flat, types) = flatten(s)?;
    phi_flat(&flat, &types)
}

impl CaseSplit {
    /// The interrogated context variable, 1-based in the flattened context.
    pub fn head(&self) -> usize {
        self.head
    }

    pub fn context(&self) -> &[Type] {
        &self.types
    }

    pub fn arg_count(&self) -> usize {
        self.types[self.head - 1].arity()
    }

    /// The strategy the parent supplies as the head's `j`-th argument
    /// (1-based). Right moves route into the head session's argument slot at
    /// session 0; context moves route around the head session, which stays
    /// reserved for the dispatch.
    pub fn arg(&self, j: usize) -> Strategy {
        assert!(
            1 <= j && j <= self.arg_count(),
            "head variable takes {} arguments, asked for {j}",
            self.arg_count()
        );
        let b_j = arg_types(&self.types[self.head - 1])[j - 1].clone();
        let game = GameExpr::lolli(
            GameExpr::bang(context_game(&self.types)),
            game_of_type(&b_j),
        );
        let mut prefix = vec![Tag::L, Tag::Idx(self.session)];
        prefix.extend(c::ctx_selector(self.head, self.types.len()));
        prefix.extend(std::iter::repeat(Tag::R).take(j - 1));
        prefix.push(Tag::L);
        prefix.push(Tag::Idx(0));
        let session = self.session;
        let parent = self.parent.clone();
        let name = format!("{}[arg{j}]", parent.name());
        Strategy::from_fn(game, name, move |m| {
            let routed = match m.path.split_first()? {
                (Tag::R, rest) => Move {
                    path: prefix.iter().chain(rest).copied().collect(),
                    base: m.base,
                },
                (Tag::L, rest) => {
                    let (Tag::Idx(k), inner) = rest.split_first()? else {
                        return None;
                    };
                    let k = if *k < session { *k } else { *k + 1 };
                    let mut path = vec![Tag::L, Tag::Idx(k)];
                    path.extend_from_slice(inner);
                    Move { path, base: m.base }
                }
                _ => return None,
            };
            let resp = parent.next_move(&routed)?;
            if let Some(rest) = resp.path.strip_prefix(prefix.as_slice()) {
                let mut path = vec![Tag::R];
                path.extend_from_slice(rest);
                return Some(Move {
                    path,
                    base: resp.base,
                });
            }
            match resp.path.as_slice() {
                [Tag::L, Tag::Idx(k), inner @ ..] if *k != session => {
                    let k = if *k < session { *k } else { *k - 1 };
                    let mut path = vec![Tag::L, Tag::Idx(k)];
                    path.extend_from_slice(inner);
                    Some(Move {
                        path,
                        base: resp.base,
                    })
                }
                _ => None,
            }
        })
    }

    pub fn args(&self) -> Vec<Strategy> {
        (1..=self.arg_count()).map(|j| self.arg(j)).collect()
    }

    /// The continuation the parent runs once the head question is answered
    /// with `n`: the parent with its opening response replaced by its
    /// response to that answer.
    pub fn answer(&self, n: u32) -> Strategy {
        let parent = self.parent.clone();
        let head_answer = Move::ans(self.head_path.clone(), n);
        let opening = Move::q(vec![Tag::R]);
        let name = format!("{}[{n}]", parent.name());
        Strategy::from_fn(parent.game().clone(), name, move |m| {
            if *m == opening {
                parent.next_move(&head_answer)
            } else {
                parent.next_move(m)
            }
        })
    }

    /// Reassemble the dispatch from its components; equivalent to the
    /// flattened parent.
    pub fn rebuild(&self) -> Strategy {
        let inner = self.clone();
        c::c_i_flat(&self.types, self.head, &self.args(), move |n| {
            Some(inner.answer(n))
        })
    }
}

fn curry_args(mut s: Strategy, q: usize) -> Strategy {
    for _ in 0..q {
        s = c::emit_arg(&s);
    }
    s
}

/// The depth-k truncation: rebuild the strategy from its dispatch tree,
/// cutting below depth k and keeping only answers below k at each level.
pub fn p_k(k: u32, s: &Strategy) -> Result<Strategy, String> {
    let (_, result) = split_strategy_game(s.game())?;
    let name = format!("p{k}({})", s.name());
    if k == 0 {
        return Ok(c::bottom(s.game().clone()).named(name));
    }
    let (flat, types) = flatten(s)?;
    let rebuilt = match phi_flat(&flat, &types)? {
        Decomp::Bottom => c::bottom(flat.game().clone()),
        Decomp::Const(n) => c::weaken_into(context_game(&types), &c::numeral(n)),
        Decomp::Case(cs) => {
            let args = cs
                .args()
                .iter()
                .map(|a| p_k(k - 1, a))
                .collect::<Result<Vec<_>, _>>()?;
            let inner = cs.clone();
            c::c_i_flat(&types, cs.head(), &args, move |n| {
                if n < k {
                    Some(p_k(k - 1, &inner.answer(n)).expect("branches keep the parent's shape"))
                } else {
                    None
                }
            })
        }
    };
    Ok(curry_args(rebuilt, result.arity()).named(name))
}

fn fresh_binders(taken: usize, result: &Type) -> Vec<(String, Type)> {
    arg_types(result)
        .into_iter()
        .enumerate()
        .map(|(i, t)| (format!("y{}", taken + i + 1), t))
        .collect()
}

/// Read a strategy back as a finite evaluation tree of depth at most k.
/// `env` names the strategy's context; binders for the result's arguments
/// are generated positionally.
pub fn eta_k(k: u32, s: &Strategy, env: &[(String, Type)]) -> Result<Fet, String> {
    let (ctx, result) = split_strategy_game(s.game())?;
    let given: Vec<Type> = env.iter().map(|(_, t)| t.clone()).collect();
    if given != ctx {
        return Err(format!(
            "context names {} variables but the strategy wants {}",
            given.len(),
            ctx.len()
        ));
    }
    let binders = fresh_binders(env.len(), &result);
    if k == 0 {
        return Ok(Fet::lam(binders, Fet::Omega));
    }
    let (flat, types) = flatten(s)?;
    let mut inner_env = env.to_vec();
    inner_env.extend(binders.iter().cloned());
    let body = match phi_flat(&flat, &types)? {
        Decomp::Bottom => Fet::Omega,
        Decomp::Const(n) => Fet::Num(n),
        Decomp::Case(cs) => {
            let head_name = inner_env[cs.head() - 1].0.clone();
            let args = cs
                .args()
                .iter()
                .map(|a| eta_k(k - 1, a, &inner_env))
                .collect::<Result<Vec<_>, _>>()?;
            let mut answers = BTreeMap::new();
            for n in 0..k {
                answers.insert(n, eta_k(k - 1, &cs.answer(n), &inner_env)?);
            }
            Fet::case(&head_name, args, answers)
        }
    };
    Ok(Fet::lam(binders, body))
}

/// The tree-to-strategy half of the bounded isomorphism: compile the
/// depth-k truncation of a tree.
pub fn s_k(k: u32, env: &[(String, Type)], p: &Fet) -> Strategy {
    crate::denotation::denote_fet(env, &crate::pcf_lang::q_k(k, p))
}

/// The strategy-to-tree half of the bounded isomorphism.
pub fn e_k(k: u32, s: &Strategy, env: &[(String, Type)]) -> Result<Fet, String> {
    eta_k(k, s, env)
}

/// The head's `j`-th argument strategy (1-based), for strategies whose head
/// probe is a case dispatch.
pub fn phi_arg_strategy(s: &Strategy, j: u32) -> Result<Strategy, String> {
    match phi(s)? {
        Decomp::Case(cs) if 1 <= j && j as usize <= cs.arg_count() => Ok(cs.arg(j as usize)),
        Decomp::Case(cs) => Err(format!(
            "head variable takes {} arguments, asked for {j}",
            cs.arg_count()
        )),
        _ => Err("the strategy does not dispatch on its context".into()),
    }
}

/// The continuation after the head answers `n`, for strategies whose head
/// probe is a case dispatch.
pub fn phi_ans_strategy(s: &Strategy, n: u32) -> Result<Strategy, String> {
    match phi(s)? {
        Decomp::Case(cs) => Ok(cs.answer(n)),
        _ => Err("the strategy does not dispatch on its context".into()),
    }
}

/// The head-probe verdict of a coded strategy: an answer or a dispatch
/// position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HeadCase {
    Const(u32),
    Case(usize),
}

/// Code-level dispatch table: the head verdict, the argument codes, and the
/// answer continuations, each wrapping the parent code.
#[derive(Clone, Debug)]
pub struct Dhb {
    pub d: Option<HeadCase>,
    pub h: Option<Vec<StrategyCode>>,
    branch_parent: Option<StrategyCode>,
}

impl Dhb {
    /// The code of the continuation after head answer `n`, when the head
    /// probe is a dispatch.
    pub fn b(&self, n: u32) -> Option<StrategyCode> {
        self.branch_parent
            .as_ref()
            .map(|p| StrategyCode::comb(format!("phi_ans:{n}"), vec![p.clone()]))
    }
}

pub fn dhb(code: &StrategyCode) -> Result<Dhb, String> {
    let s = decode(code)?;
    Ok(match phi(&s)? {
        Decomp::Bottom => Dhb {
            d: None,
            h: None,
            branch_parent: None,
        },
        Decomp::Const(n) => Dhb {
            d: Some(HeadCase::Const(n)),
            h: None,
            branch_parent: None,
        },
        Decomp::Case(cs) => Dhb {
            d: Some(HeadCase::Case(cs.head())),
            h: Some(
                (1..=cs.arg_count())
                    .map(|j| StrategyCode::comb(format!("phi_arg:{j}"), vec![code.clone()]))
                    .collect(),
            ),
            branch_parent: Some(code.clone()),
        },
    })
}

/// Depth-k simulation between coded strategies: dispatch tables must agree
/// down to depth k, with answer continuations compared for all answers
/// below k. Everything simulates everything at depth 0.
pub fn preceq_k(k: u32, a: &StrategyCode, b: &StrategyCode) -> Result<bool, String> {
    if k == 0 {
        return Ok(true);
    }
    let da = dhb(a)?;
    match da.d {
        None => Ok(true),
        Some(HeadCase::Const(p)) => Ok(dhb(b)?.d == Some(HeadCase::Const(p))),
        Some(HeadCase::Case(i)) => {
            let db = dhb(b)?;
            if db.d != Some(HeadCase::Case(i)) {
                return Ok(false);
            }
            let ha = da.h.as_ref().expect("case verdicts carry argument codes");
            let hb = db.h.as_ref().expect("case verdicts carry argument codes");
            for (x, y) in ha.iter().zip(hb) {
                if !preceq_k(k - 1, x, y)? {
                    return Ok(false);
                }
            }
            for p in 0..k {
                let ba = da.b(p).expect("case verdicts carry continuations");
                let bb = db.b(p).expect("case verdicts carry continuations");
                if !preceq_k(k - 1, &ba, &bb)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// A depth-bounded dispatch tree, the serializable trace of repeated head
/// probes. Answer branches are explored for answers below the remaining
/// depth.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum DecompTree {
    Bottom,
    Const {
        value: u32,
    },
    Case {
        head: usize,
        args: Vec<DecompTree>,
        answers: BTreeMap<u32, DecompTree>,
    },
}

pub fn decomp_tree(s: &Strategy, depth: u32) -> Result<DecompTree, String> {
    if depth == 0 {
        return Ok(DecompTree::Bottom);
    }
    Ok(match phi(s)? {
        Decomp::Bottom => DecompTree::Bottom,
        Decomp::Const(n) => DecompTree::Const { value: n },
        Decomp::Case(cs) => {
            let args = cs
                .args()
                .iter()
                .map(|a| decomp_tree(a, depth - 1))
                .collect::<Result<_, _>>()?;
            let mut answers = BTreeMap::new();
            for n in 0..depth {
                answers.insert(n, decomp_tree(&cs.answer(n), depth - 1)?);
            }
            DecompTree::Case {
                head: cs.head(),
                args,
                answers,
            }
        }
    })
}

fn close_over(open: &Strategy, delta: &[Strategy]) -> Strategy {
    let unit = GameExpr::lolli(GameExpr::bang(GameExpr::I), GameExpr::I);
    let mut tuple = c::bottom(unit);
    for d in delta {
        tuple = c::pair(&tuple, d);
    }
    c::compose(&c::promote(&tuple), open, c::step_budget())
}

fn unresolved(stuck: bool, budget_hit: bool) -> Outcome {
    Outcome::Unresolved(BudgetReport {
        steps_taken: if budget_hit { c::step_budget() } else { 0 },
        step_budget: c::step_budget(),
        stuck,
        y_depths_tried: Vec::new(),
    })
}

/// Evaluate a closed strategy applied to closed arguments by repeated head
/// dispatch: probe the head, look the dispatched variable up among the
/// arguments, run it against the closed-over argument strategies by
/// composition, and continue with the answer's continuation. `depth` caps
/// the number of dispatches.
pub fn apply_via_decomposition(
    s: &Strategy,
    args: &[Strategy],
    depth: u32,
) -> Result<Outcome, String> {
    let (ctx, _) = split_strategy_game(s.game())?;
    if !ctx.is_empty() {
        return Err("application wants a closed strategy".into());
    }
    let (flat, types) = flatten(s)?;
    if args.len() != types.len() {
        return Err(format!(
            "{} arguments supplied where {} are wanted",
            args.len(),
            types.len()
        ));
    }
    for (a, t) in args.iter().zip(&types) {
        let want = GameExpr::lolli(GameExpr::bang(GameExpr::I), game_of_type(t));
        if *a.game() != want {
            return Err(format!("argument at {t} plays {}", a.game()));
        }
    }
    let opening = Move::q(vec![Tag::R]);
    let mut current = flat;
    for _ in 0..depth {
        let before = exhaustion_count();
        let verdict = phi_flat(&current, &types)?;
        match verdict {
            Decomp::Bottom => {
                return Ok(unresolved(exhaustion_count() == before, exhaustion_count() > before));
            }
            Decomp::Const(n) => return Ok(Outcome::Answer(n)),
            Decomp::Case(cs) => {
                let mut app = args[cs.head() - 1].clone();
                for a in &cs.args() {
                    app = c::app_strategy(&app, &close_over(a, args));
                }
                let before = exhaustion_count();
                match app.next_move(&opening) {
                    Some(m) if m.path.as_slice() == [Tag::R] => {
                        let Base::Ans(n) = m.base else {
                            return Err(format!("malformed head value {m}"));
                        };
                        current = cs.answer(n);
                    }
                    _ => {
                        return Ok(unresolved(
                            exhaustion_count() == before,
                            exhaustion_count() > before,
                        ));
                    }
                }
            }
        }
    }
    Ok(unresolved(false, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::denotation::{denote_closed, run_game, Fuel};
    use crate::game_core::Bounds;
    use crate::pcf_lang::{parse, q_k};
    use crate::strategy::strat_equiv;

    fn den(src: &str) -> Strategy {
        denote_closed(&parse(src).unwrap(), Fuel::default())
    }

    fn small_bounds() -> Bounds {
        Bounds {
            max_nat: 2,
            max_index: 1,
            max_len: 10,
            max_steps: 100_000,
        }
    }

    fn probe_answer(s: &Strategy) -> Option<u32> {
        match s.next_move(&Move::q(vec![Tag::R])) {
            Some(m) if m.path.as_slice() == [Tag::R] => match m.base {
                Base::Ans(n) => Some(n),
                Base::Q => None,
            },
            _ => None,
        }
    }

    #[test]
    fn phi_classifies_the_three_shapes() {
        assert!(matches!(phi(&den("Omega[N]")), Ok(Decomp::Bottom)));
        assert!(matches!(phi(&den("Omega[N -> N]")), Ok(Decomp::Bottom)));
        assert!(matches!(phi(&den("5")), Ok(Decomp::Const(5))));
        assert!(matches!(phi(&den("\\x:N. 7")), Ok(Decomp::Const(7))));
        match phi(&den("\\x:N. x")) {
            Ok(Decomp::Case(cs)) => {
                assert_eq!(cs.head(), 1);
                assert_eq!(cs.arg_count(), 0);
            }
            other => panic!("expected a dispatch, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn phi_rejects_bare_games() {
        assert!(phi(&c::succ_strategy()).is_err());
    }

    #[test]
    fn identity_branches_are_constants() {
        let Ok(Decomp::Case(cs)) = phi(&den("\\x:N. x")) else {
            panic!("expected a dispatch");
        };
        for n in [0, 3, 7] {
            assert_eq!(probe_answer(&cs.answer(n)), Some(n));
        }
    }

    #[test]
    fn successor_branches_shift_by_one() {
        let Ok(Decomp::Case(cs)) = phi(&den("\\x:N. succ x")) else {
            panic!("expected a dispatch");
        };
        assert_eq!(probe_answer(&cs.answer(2)), Some(3));
        assert_eq!(probe_answer(&cs.answer(0)), Some(1));
    }

    #[test]
    fn higher_order_heads_carry_their_arguments() {
        let Ok(Decomp::Case(cs)) = phi(&den("\\f:N -> N. f 1")) else {
            panic!("expected a dispatch");
        };
        assert_eq!(cs.head(), 1);
        assert_eq!(cs.arg_count(), 1);
        assert_eq!(probe_answer(&cs.arg(1)), Some(1));
        assert_eq!(probe_answer(&cs.answer(5)), Some(5));
    }

    #[test]
    fn rebuilt_dispatches_match_the_parent() {
        for src in ["\\x:N. succ x", "\\f:N -> N. f 1"] {
            let s = den(src);
            let (flat, _) = flatten(&s).unwrap();
            let Ok(Decomp::Case(cs)) = phi(&s) else {
                panic!("expected a dispatch for `{src}`");
            };
            assert!(
                strat_equiv(&cs.rebuild(), &flat, &small_bounds()),
                "rebuild differs from the parent on `{src}`"
            );
        }
    }

    #[test]
    fn truncations_grow_toward_the_strategy() {
        let id = den("\\x:N. x");
        let b = small_bounds();
        assert!(strat_equiv(
            &p_k(0, &id).unwrap(),
            &den("Omega[N -> N]"),
            &b
        ));
        assert!(strat_equiv(
            &p_k(1, &id).unwrap(),
            &den("\\x:N. case1 x Omega[N]"),
            &b
        ));
        assert!(strat_equiv(&p_k(2, &id).unwrap(), &den("\\x:N. case2 x 0 1"), &b));
    }

    #[test]
    fn truncation_fixes_constants_and_is_idempotent() {
        let b = small_bounds();
        let k7 = den("\\x:N. 7");
        assert!(strat_equiv(&p_k(1, &k7).unwrap(), &k7, &b));
        let s = den("\\x:N. succ x");
        let once = p_k(2, &s).unwrap();
        let twice = p_k(2, &once).unwrap();
        assert!(strat_equiv(&once, &twice, &b));
        assert!(crate::strategy::strat_subeq(&once, &s, &b));
    }

    #[test]
    fn readback_recovers_finite_trees() {
        let id = den("\\x:N. x");
        assert_eq!(eta_k(0, &id, &[]).unwrap(), Fet::lam(binders_n(), Fet::Omega));
        assert_eq!(
            eta_k(1, &id, &[]).unwrap(),
            Fet::lam(binders_n(), Fet::case("y1", vec![], BTreeMap::new()))
        );
        let expect = Fet::lam(
            binders_n(),
            Fet::case(
                "y1",
                vec![],
                BTreeMap::from([(0, Fet::Num(0)), (1, Fet::Num(1))]),
            ),
        );
        assert_eq!(eta_k(2, &id, &[]).unwrap(), expect);
        assert_eq!(
            eta_k(3, &den("\\x:N. 7"), &[]).unwrap(),
            Fet::lam(binders_n(), Fet::Num(7))
        );
    }

    fn binders_n() -> Vec<(String, Type)> {
        vec![("y1".into(), Type::Nat)]
    }

    #[test]
    fn readback_names_nested_binders_positionally() {
        let s = den("\\f:N -> N. f 1");
        let fet = eta_k(2, &s, &[]).unwrap();
        let Fet::Lam { binders, body } = &fet else {
            panic!("expected a lambda tree");
        };
        assert_eq!(binders[0].0, "y1");
        let Fet::Case { head, args, .. } = body.as_ref() else {
            panic!("expected a case body");
        };
        assert_eq!(head, "y1");
        assert_eq!(args.len(), 1);
    }

    #[test]
    fn bounded_isomorphism_round_trips() {
        let p = Fet::lam(
            vec![("x".into(), Type::Nat)],
            Fet::case(
                "x",
                vec![],
                BTreeMap::from([(0, Fet::Num(3)), (1, Fet::Num(4))]),
            ),
        );
        let k = 2;
        let back = e_k(k, &s_k(k, &[], &p), &[]).unwrap();
        assert_eq!(back, q_k(k, &p));

        let s = den("\\x:N. succ x");
        let rebuilt = s_k(k, &[], &e_k(k, &s, &[]).unwrap());
        assert!(strat_equiv(&rebuilt, &p_k(k, &s).unwrap(), &small_bounds()));
    }

    #[test]
    fn dispatch_tables_follow_the_probe() {
        let code = |src: &str| StrategyCode::Denotation {
            term: src.into(),
            fuel: 8,
        };
        assert_eq!(dhb(&code("5")).unwrap().d, Some(HeadCase::Const(5)));
        assert_eq!(dhb(&code("Omega[N]")).unwrap().d, None);
        let id = dhb(&code("\\x:N. x")).unwrap();
        assert_eq!(id.d, Some(HeadCase::Case(1)));
        assert_eq!(id.h.as_ref().unwrap().len(), 0);
        let tau3 = decode(&id.b(3).unwrap()).unwrap();
        assert_eq!(probe_answer(&tau3), Some(3));
    }

    #[test]
    fn dispatch_trees_serialize_the_probe_history() {
        let tree = decomp_tree(&den("\\x:N. succ x"), 2).unwrap();
        let expect = DecompTree::Case {
            head: 1,
            args: vec![],
            answers: BTreeMap::from([
                (0, DecompTree::Const { value: 1 }),
                (1, DecompTree::Const { value: 2 }),
            ]),
        };
        assert_eq!(tree, expect);
        let json = serde_json::to_value(&tree).unwrap();
        assert_eq!(json["node"], "case");
        assert_eq!(json["answers"]["0"]["value"], 1);
        assert_eq!(decomp_tree(&den("Omega[N]"), 3).unwrap(), DecompTree::Bottom);
        assert_eq!(
            decomp_tree(&den("5"), 1).unwrap(),
            DecompTree::Const { value: 5 }
        );
    }

    #[test]
    fn depth_bounded_simulation_separates_constants() {
        let k2 = StrategyCode::Denotation {
            term: "2".into(),
            fuel: 8,
        };
        let k3 = StrategyCode::Denotation {
            term: "3".into(),
            fuel: 8,
        };
        assert!(preceq_k(0, &k2, &k3).unwrap());
        assert!(!preceq_k(1, &k2, &k3).unwrap());
        assert!(preceq_k(1, &k2, &k2).unwrap());
    }

    #[test]
    fn truncations_simulate_the_original_and_back() {
        let id = StrategyCode::Denotation {
            term: "\\x:N. x".into(),
            fuel: 8,
        };
        let cut = StrategyCode::comb("p_k:2", vec![id.clone()]);
        assert!(preceq_k(2, &cut, &id).unwrap());
        assert!(preceq_k(2, &id, &cut).unwrap());
        assert!(!preceq_k(3, &id, &cut).unwrap());
    }

    #[test]
    fn dispatch_evaluation_matches_composition() {
        let out = apply_via_decomposition(&den("\\x:N. succ x"), &[den("2")], 8).unwrap();
        assert_eq!(out.answer(), Some(3));
        let out = apply_via_decomposition(&den("9"), &[], 8).unwrap();
        assert_eq!(out.answer(), Some(9));
        let out = apply_via_decomposition(&den("\\f:N -> N. f (f 1)"), &[den("\\x:N. succ x")], 8)
            .unwrap();
        assert_eq!(out.answer(), Some(3));
    }

    #[test]
    fn dispatch_evaluation_chains_continuations() {
        let s = den("\\x:N. if0 x 3 (succ x)");
        let out = apply_via_decomposition(&s, &[den("2")], 8).unwrap();
        assert_eq!(out.answer(), Some(3));
        let t = parse("(\\x:N. if0 x 3 (succ x)) 2").unwrap();
        assert_eq!(run_game(&t, Fuel::default()).answer(), out.answer());
        match apply_via_decomposition(&s, &[den("2")], 1).unwrap() {
            Outcome::Unresolved(r) => assert!(!r.stuck),
            other => panic!("expected depth exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn dispatch_evaluation_reports_silence() {
        let out = apply_via_decomposition(&den("Omega[N]"), &[], 4).unwrap();
        match out {
            Outcome::Unresolved(r) => assert!(r.stuck),
            other => panic!("expected silence, got {other:?}"),
        }
        let out =
            apply_via_decomposition(&den("Omega[N -> N]"), &[den("2")], 4).unwrap();
        assert_eq!(out.answer(), None);
    }
}
