//! History-free strategies: a game together with a deterministic response
//! function on single moves. Bounded exploration materializes trace sets,
//! bounded comparison checks the simulation preorder underlying strategy
//! equivalence, and strategy codes give a serializable syntax for strategies.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::AtomicU64;
use std::sync::{Arc, Mutex};

use crate::game_core::{
    canonical_position, check_position, hook, label, legal_position, Base, Bounds, GameExpr,
    Move, Player, Position, Tag,
};

#[derive(Default, Debug)]
pub struct Diagnostics {
    /// Executions that gave up because the step budget ran out.
    pub steps_exhausted: AtomicU64,
    /// Responses that fell outside the alphabet a derived strategy routes.
    pub escaped_responses: AtomicU64,
}

thread_local! {
    static THREAD_EXHAUSTIONS: std::cell::Cell<u64> = const { std::cell::Cell::new(0) };
}

/// Budget exhaustions seen on this thread, at any composition depth. A probe
/// that ran out of budget is not memoized, so comparing this count around a
/// probe reliably distinguishes silence from surrender.
pub fn exhaustion_count() -> u64 {
    THREAD_EXHAUSTIONS.with(|c| c.get())
}

pub(crate) fn note_exhaustion() {
    THREAD_EXHAUSTIONS.with(|c| c.set(c.get() + 1));
}

/// A history-free strategy: responses depend only on the move just played.
/// Cloning shares the response function, its memo table, and diagnostics.
#[derive(Clone)]
pub struct Strategy {
    game: GameExpr,
    name: String,
    next: Arc<dyn Fn(&Move) -> Option<Move> + Send + Sync>,
    memo: Arc<Mutex<HashMap<Move, Option<Move>>>>,
    finite: Option<Arc<BTreeSet<Position>>>,
    diag: Arc<Diagnostics>,
}

impl std::fmt::Debug for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Strategy({} on {})", self.name, self.game)
    }
}

impl Strategy {
    pub fn from_fn(
        game: GameExpr,
        name: impl Into<String>,
        next: impl Fn(&Move) -> Option<Move> + Send + Sync + 'static,
    ) -> Strategy {
        Strategy {
            game,
            name: name.into(),
            next: Arc::new(next),
            memo: Arc::new(Mutex::new(HashMap::new())),
            finite: None,
            diag: Arc::new(Diagnostics::default()),
        }
    }

    /// Build from an explicit even-length position set. Validates legality,
    /// prefix closure, and single-valuedness of the induced response
    /// function.
    pub fn from_positions(
        game: GameExpr,
        positions: impl IntoIterator<Item = Position>,
    ) -> Result<Strategy, String> {
        let mut set: BTreeSet<Position> = positions.into_iter().collect();
        set.insert(Vec::new());
        let mut table: HashMap<Move, Move> = HashMap::new();
        for s in &set {
            if s.len() % 2 != 0 {
                return Err(format!(
                    "odd-length position [{}]",
                    crate::game_core::position_to_string(s)
                ));
            }
            check_position(&game, s)?;
            if !s.is_empty() && !set.contains(&s[..s.len() - 2].to_vec()) {
                return Err(format!(
                    "position set is not prefix closed at [{}]",
                    crate::game_core::position_to_string(s)
                ));
            }
            if let [.., a, b] = &s[..] {
                match table.get(a) {
                    Some(prev) if prev != b => {
                        return Err(format!(
                            "conflicting responses to `{a}`: `{prev}` and `{b}`"
                        ))
                    }
                    _ => {
                        table.insert(a.clone(), b.clone());
                    }
                }
            }
        }
        let finite = Arc::new(set);
        let lookup = table;
        Ok(Strategy {
            game,
            name: "finite".into(),
            next: Arc::new(move |m| lookup.get(m).cloned()),
            memo: Arc::new(Mutex::new(HashMap::new())),
            finite: Some(finite),
            diag: Arc::new(Diagnostics::default()),
        })
    }

    pub fn game(&self) -> &GameExpr {
        &self.game
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn named(mut self, name: impl Into<String>) -> Strategy {
        self.name = name.into();
        self
    }

    pub fn diagnostics(&self) -> &Diagnostics {
        &self.diag
    }

    /// Share this strategy's diagnostics sink with another.
    pub fn with_diag(mut self, diag: Arc<Diagnostics>) -> Strategy {
        self.diag = diag;
        self
    }

    /// The stored position set, when the strategy is an explicit finite one.
    pub fn finite_positions(&self) -> Option<&BTreeSet<Position>> {
        self.finite.as_deref()
    }

    /// The response to a single move, memoized unless the computation ran
    /// out of budget somewhere underneath.
    pub fn next_move(&self, m: &Move) -> Option<Move> {
        if let Some(r) = self.memo.lock().unwrap().get(m) {
            return r.clone();
        }
        let before = exhaustion_count();
        let r = (self.next)(m);
        if exhaustion_count() == before {
            self.memo.lock().unwrap().insert(m.clone(), r.clone());
        }
        r
    }

    /// Bounds that make bounded exploration of an explicit finite strategy
    /// exhaustive: large enough numerals, indices, and play length.
    pub fn suggested_bounds(&self) -> Bounds {
        let mut b = Bounds {
            max_nat: 2,
            max_index: 2,
            max_len: 8,
            ..Bounds::default()
        };
        if let Some(set) = &self.finite {
            for s in set.iter() {
                b.max_len = b.max_len.max(s.len() + 2);
                for m in s {
                    if let Base::Ans(n) = m.base {
                        b.max_nat = b.max_nat.max(n);
                    }
                    for t in &m.path {
                        if let Tag::Idx(i) = t {
                            if *i < 64 {
                                b.max_index = b.max_index.max(*i);
                            }
                        }
                    }
                }
            }
        }
        b
    }
}

/// How fresh replication indices are offered when enumerating opponent
/// moves: every index up to the bound, or one canonical representative per
/// equivalence class of extensions.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FreshMode {
    Exhaustive,
    Representative,
}

/// All legal opponent extensions of `s`: answers to the pending question
/// (numerals up to the bound) and opponent questions whose replication
/// indices are drawn from the indices already in play plus fresh ones.
pub fn legal_o_extensions(g: &GameExpr, s: &[Move], b: &Bounds, mode: FreshMode) -> Vec<Move> {
    let mut out = Vec::new();
    if s.len() >= b.max_len {
        return out;
    }
    let mut pending: Vec<&Move> = Vec::new();
    for m in s {
        match m.base {
            Base::Q => pending.push(m),
            Base::Ans(_) => {
                pending.pop();
            }
        }
    }
    if let Some(q) = pending.last() {
        let leaf = leaf_game(g, &q.path);
        let answers: Vec<u32> = match leaf {
            Some(GameExpr::Nat) => (0..=b.max_nat).collect(),
            Some(GameExpr::Sigma) => vec![0],
            _ => vec![],
        };
        for n in answers {
            out.push(Move::ans(q.path.clone(), n));
        }
    }
    let mut occurring: HashMap<Vec<Tag>, Vec<u32>> = HashMap::new();
    for m in s {
        for (i, t) in m.path.iter().enumerate() {
            if matches!(t, Tag::Idx(_) | Tag::Fam(_)) {
                let prefix = m.path[..i].to_vec();
                let idx = match t {
                    Tag::Idx(i) | Tag::Fam(i) => *i,
                    _ => unreachable!(),
                };
                let v = occurring.entry(prefix).or_default();
                if !v.contains(&idx) {
                    v.push(idx);
                }
            }
        }
    }
    let mut questions = Vec::new();
    question_paths(g, &mut Vec::new(), &occurring, b, mode, &mut questions);
    out.extend(questions.into_iter().map(Move::q));
    out.retain(|m| {
        matches!(label(g, m), Ok((Player::O, _))) && {
            let mut t = s.to_vec();
            t.push(m.clone());
            legal_position(g, &t)
        }
    });
    out
}

fn leaf_game<'g>(g: &'g GameExpr, path: &[Tag]) -> Option<&'g GameExpr> {
    let mut node = g;
    for t in path {
        node = match (node, t) {
            (GameExpr::Tensor(a, _), Tag::L)
            | (GameExpr::With(a, _), Tag::L)
            | (GameExpr::Lolli(a, _), Tag::L) => a,
            (GameExpr::Tensor(_, b), Tag::R)
            | (GameExpr::With(_, b), Tag::R)
            | (GameExpr::Lolli(_, b), Tag::R) => b,
            (GameExpr::Bang(a), Tag::Idx(_)) => a,
            (GameExpr::WithOmega(a), Tag::Fam(_)) => a,
            _ => return None,
        };
    }
    Some(node)
}

fn question_paths(
    g: &GameExpr,
    prefix: &mut Vec<Tag>,
    occurring: &HashMap<Vec<Tag>, Vec<u32>>,
    b: &Bounds,
    mode: FreshMode,
    out: &mut Vec<Vec<Tag>>,
) {
    match g {
        GameExpr::I => {}
        GameExpr::Nat | GameExpr::Sigma => out.push(prefix.clone()),
        GameExpr::Tensor(a, bb) | GameExpr::Lolli(a, bb) | GameExpr::With(a, bb) => {
            prefix.push(Tag::L);
            question_paths(a, prefix, occurring, b, mode, out);
            prefix.pop();
            prefix.push(Tag::R);
            question_paths(bb, prefix, occurring, b, mode, out);
            prefix.pop();
        }
        GameExpr::Bang(a) | GameExpr::WithOmega(a) => {
            let is_bang = matches!(g, GameExpr::Bang(_));
            let occ = occurring.get(prefix).cloned().unwrap_or_default();
            let mut candidates = occ.clone();
            match mode {
                FreshMode::Exhaustive => {
                    for i in 0..=b.max_index {
                        if !candidates.contains(&i) {
                            candidates.push(i);
                        }
                    }
                }
                FreshMode::Representative => {
                    let fresh = (0..).find(|i| !occ.contains(i)).unwrap();
                    if fresh <= b.max_index && !candidates.contains(&fresh) {
                        candidates.push(fresh);
                    }
                }
            }
            for i in candidates {
                prefix.push(if is_bang { Tag::Idx(i) } else { Tag::Fam(i) });
                question_paths(a, prefix, occurring, b, mode, out);
                prefix.pop();
            }
        }
    }
}

/// Bounded trace set: every position the strategy reaches when opponent
/// plays all bounded extensions. Produced positions are screened by the
/// global hook; responses that would make the play illegal are recorded and
/// pruned.
pub fn traces(s: &Strategy, b: &Bounds) -> BTreeSet<Position> {
    traces_mode(s, b, FreshMode::Exhaustive)
}

pub fn traces_mode(s: &Strategy, b: &Bounds, mode: FreshMode) -> BTreeSet<Position> {
    let mut out: BTreeSet<Position> = BTreeSet::new();
    out.insert(Vec::new());
    let mut frontier: Vec<Position> = vec![Vec::new()];
    while let Some(pos) = frontier.pop() {
        if pos.len() + 2 > b.max_len {
            continue;
        }
        for a in legal_o_extensions(&s.game, &pos, b, mode) {
            if let Some(r) = s.next_move(&a) {
                let mut t = pos.clone();
                t.push(a);
                t.push(r);
                if hook::screen(&s.game, &t) && !out.contains(&t) {
                    out.insert(t.clone());
                    frontier.push(t);
                }
            }
        }
    }
    out
}

/// A counterexample to the bounded simulation check.
#[derive(Debug, Clone)]
pub struct SubeqFailure {
    pub play: Position,
    pub probe: Position,
    pub reason: String,
}

impl std::fmt::Display for SubeqFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} (play [{}], probe [{}])",
            self.reason,
            crate::game_core::position_to_string(&self.play),
            crate::game_core::position_to_string(&self.probe),
        )
    }
}

/// Bounded check that `s` is simulated by `t`: for every response of `s`
/// and every equivalent opponent probe of a matching `t`-play, `t` responds
/// and the results stay equivalent.
pub fn strat_subeq(s: &Strategy, t: &Strategy, b: &Bounds) -> bool {
    subeq_check(s, t, b, FreshMode::Exhaustive).is_ok()
}

/// The same check collapsing fresh-index choices to canonical
/// representatives on both sides; exact for strategies that are equivalent
/// to themselves, and fast enough for large law populations.
pub fn strat_subeq_fast(s: &Strategy, t: &Strategy, b: &Bounds) -> bool {
    subeq_check(s, t, b, FreshMode::Representative).is_ok()
}

pub fn subeq_check(
    s: &Strategy,
    t: &Strategy,
    b: &Bounds,
    mode: FreshMode,
) -> Result<(), SubeqFailure> {
    let s_traces = traces_mode(s, b, mode);
    let t_traces = traces_mode(t, b, mode);
    // Canonicalization is prefix-monotone, so only probe stems whose
    // canonical form matches the play's stem. For each kept stem the
    // opponent extensions and their canonical forms are computed once.
    let mut probe_sets: HashMap<Position, Vec<(Position, Vec<(Move, Position)>)>> = HashMap::new();
    let mut seen_canon: BTreeSet<Position> = BTreeSet::new();
    for tp in &t_traces {
        let canon = canonical_position(tp);
        if mode == FreshMode::Representative && !seen_canon.insert(canon.clone()) {
            continue;
        }
        let exts = legal_o_extensions(&t.game, tp, b, mode)
            .into_iter()
            .map(|a2| {
                let mut probe = tp.clone();
                probe.push(a2.clone());
                (a2, canonical_position(&probe))
            })
            .collect();
        probe_sets.entry(canon).or_default().push((tp.clone(), exts));
    }
    let mut done: BTreeSet<(Position, Position)> = BTreeSet::new();
    for play in &s_traces {
        if play.len() < 2 {
            continue;
        }
        let (stem, last) = play.split_at(play.len() - 2);
        let (a, resp) = (&last[0], &last[1]);
        let mut sa = stem.to_vec();
        sa.push(a.clone());
        let sa_canon = canonical_position(&sa);
        let sab_canon = canonical_position(play);
        if !done.insert((sa_canon.clone(), sab_canon.clone())) {
            continue;
        }
        let stem_canon = &sa_canon[..stem.len()];
        for (probe_stem, exts) in probe_sets.get(stem_canon).into_iter().flatten() {
            for (a2, probe_canon) in exts {
                if *probe_canon != sa_canon {
                    continue;
                }
                let mut probe = probe_stem.clone();
                probe.push(a2.clone());
                let Some(b2) = t.next_move(a2) else {
                    return Err(SubeqFailure {
                        play: play.clone(),
                        probe,
                        reason: format!("no response to `{a2}` (expected one matching `{resp}`)"),
                    });
                };
                probe.push(b2.clone());
                if !hook::screen(&t.game, &probe) {
                    return Err(SubeqFailure {
                        play: play.clone(),
                        probe,
                        reason: format!("response `{b2}` made the play illegal"),
                    });
                }
                if canonical_position(&probe) != sab_canon {
                    return Err(SubeqFailure {
                        play: play.clone(),
                        probe,
                        reason: format!("response `{b2}` does not match `{resp}`"),
                    });
                }
            }
        }
    }
    Ok(())
}

/// Bounded strategy equivalence: simulation both ways.
pub fn strat_equiv(s: &Strategy, t: &Strategy, b: &Bounds) -> bool {
    strat_subeq(s, t, b) && strat_subeq(t, s, b)
}

pub fn strat_equiv_fast(s: &Strategy, t: &Strategy, b: &Bounds) -> bool {
    strat_subeq_fast(s, t, b) && strat_subeq_fast(t, s, b)
}

/// A strategy is admissible when it simulates itself; random tables usually
/// fail this.
pub fn self_consistent(s: &Strategy, b: &Bounds) -> bool {
    strat_equiv(s, s, b)
}

/// Drives one strategy through a play, checking legality of every opponent
/// move and screening every produced position.
pub struct PlayDriver {
    strat: Strategy,
    play: Position,
}

impl PlayDriver {
    pub fn new(strat: Strategy) -> PlayDriver {
        PlayDriver {
            strat,
            play: Vec::new(),
        }
    }

    pub fn play(&self) -> &Position {
        &self.play
    }

    /// Feed one opponent move; the strategy's response (if any) is appended
    /// to the play.
    pub fn feed(&mut self, m: Move) -> Result<Option<Move>, String> {
        let mut attempt = self.play.clone();
        attempt.push(m.clone());
        check_position(self.strat.game(), &attempt)
            .map_err(|e| format!("opponent move `{m}` is illegal: {e}"))?;
        if !matches!(label(self.strat.game(), &m), Ok((Player::O, _))) {
            return Err(format!("`{m}` is not an opponent move here"));
        }
        self.play.push(m.clone());
        hook::screen(self.strat.game(), &self.play);
        match self.strat.next_move(&m) {
            Some(r) => {
                self.play.push(r.clone());
                if !hook::screen(self.strat.game(), &self.play) {
                    return Err(format!("strategy response `{r}` made the play illegal"));
                }
                Ok(Some(r))
            }
            None => Ok(None),
        }
    }
}

/// Serializable strategy syntax: explicit finite tables, term denotations,
/// and combinator applications.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategyCode {
    Finite {
        game: GameExpr,
        positions: Vec<Position>,
    },
    Denotation {
        term: String,
        fuel: u32,
    },
    Comb {
        tag: String,
        #[serde(default)]
        children: Vec<StrategyCode>,
    },
}

impl StrategyCode {
    pub fn comb(tag: impl Into<String>, children: Vec<StrategyCode>) -> StrategyCode {
        StrategyCode::Comb {
            tag: tag.into(),
            children,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("strategy codes always serialize")
    }

    pub fn from_json(s: &str) -> Result<StrategyCode, String> {
        serde_json::from_str(s).map_err(|e| format!("bad strategy code: {e}"))
    }
}

/// Materialize a strategy as an explicit finite code by bounded exploration.
pub fn encode_finite(s: &Strategy, b: &Bounds) -> StrategyCode {
    StrategyCode::Finite {
        game: s.game().clone(),
        positions: traces(s, b).into_iter().collect(),
    }
}

/// Interpret a strategy code. Combinator tags are the expression language
/// documented in the README (`compose`, `tensor`, `promote`, `curry`,
/// `uncurry`, `pair`, `id:<type>`, `der:<type>`, `weak:<type>`,
/// `con:<type>`, `bot:<type>`, `k:<n>:<type>`, `numeral:<n>`, `succ`,
/// `pred`, `if0`, `case:<k>`, `phi_arg:<j>`, `phi_ans:<n>`, `p_k:<k>`,
/// `observe:<n>`).
pub fn decode(code: &StrategyCode) -> Result<Strategy, String> {
    match code {
        StrategyCode::Finite { game, positions } => {
            Strategy::from_positions(game.clone(), positions.iter().cloned())
        }
        StrategyCode::Denotation { term, fuel } => {
            let t = crate::pcf_lang::parse(term).map_err(|e| e.to_string())?;
            crate::pcf_lang::typecheck(&[], &t).map_err(|e| e.to_string())?;
            Ok(crate::denotation::denote_closed(
                &t,
                crate::denotation::Fuel { y_depth: *fuel },
            ))
        }
        StrategyCode::Comb { tag, children } => {
            let kids: Vec<Strategy> = children.iter().map(decode).collect::<Result<_, _>>()?;
            decode_comb(tag, &kids, children)
        }
    }
}

fn split_tag(tag: &str) -> Vec<&str> {
    tag.splitn(3, ':').collect()
}

fn parse_ty(s: &str) -> Result<crate::pcf_lang::Type, String> {
    crate::pcf_lang::parse_type(s).map_err(|e| e.to_string())
}

fn decode_comb(
    tag: &str,
    kids: &[Strategy],
    kid_codes: &[StrategyCode],
) -> Result<Strategy, String> {
    use crate::combinators as c;
    let parts = split_tag(tag);
    let arity_err = |want: usize| {
        Err(format!(
            "combinator `{tag}` takes {want} children, given {}",
            kids.len()
        ))
    };
    let game_of = |s: &str| parse_ty(s).map(|t| crate::game_core::game_of_type(&t));
    match (parts.as_slice(), kids.len()) {
        (["id", ty], 0) => Ok(c::identity(game_of(ty)?)),
        (["bot", ty], 0) => Ok(c::bottom(game_of(ty)?)),
        (["numeral", n], 0) => Ok(c::numeral(n.parse().map_err(|e| format!("{e}"))?)),
        (["k", n, ty], 0) => Ok(c::constant_at(
            &parse_ty(ty)?,
            n.parse().map_err(|e| format!("{e}"))?,
        )),
        (["succ"], 0) => Ok(c::succ_strategy()),
        (["pred"], 0) => Ok(c::pred_strategy()),
        (["if0"], 0) => Ok(c::if0_strategy()),
        (["case", k], 0) => Ok(c::case_k(k.parse().map_err(|e| format!("{e}"))?)),
        (["der", ty], 0) => Ok(c::der(game_of(ty)?)),
        (["weak", ty], 0) => Ok(c::weak(game_of(ty)?)),
        (["con", ty], 0) => Ok(c::con(game_of(ty)?)),
        (["compose"], 2) => c::compose_checked(&kids[0], &kids[1], Bounds::default().max_steps),
        (["tensor"], 2) => Ok(c::tensor(&kids[0], &kids[1])),
        (["promote"], 1) => c::promote_checked(&kids[0]),
        (["curry"], 1) => c::linear_curry(&kids[0]),
        (["uncurry"], 1) => c::linear_uncurry(&kids[0]),
        (["pair"], 2) => c::pair_checked(&kids[0], &kids[1]),
        (["phi_arg", j], 1) => {
            crate::decomposition::phi_arg_strategy(&kids[0], j.parse().map_err(|e| format!("{e}"))?)
        }
        (["phi_ans", n], 1) => {
            crate::decomposition::phi_ans_strategy(&kids[0], n.parse().map_err(|e| format!("{e}"))?)
        }
        (["p_k", k], 1) => {
            crate::decomposition::p_k(k.parse().map_err(|e| format!("{e}"))?, &kids[0])
        }
        (["observe", n], _) => {
            crate::observation::apply_then_observe(kids, n.parse().map_err(|e| format!("{e}"))?)
        }
        (["id" | "bot" | "numeral" | "k" | "succ" | "pred" | "if0" | "case" | "der" | "weak"
         | "con", ..], _) => arity_err(0),
        (["promote" | "curry" | "uncurry" | "phi_arg" | "phi_ans" | "p_k", ..], _) => arity_err(1),
        (["compose" | "tensor" | "pair", ..], _) => arity_err(2),
        _ => {
            let _ = kid_codes;
            Err(format!("unknown combinator tag `{tag}`"))
        }
    }
}

/// Parse the combinator expression language, e.g.
/// `compose(id(N -> N), promote(der(N)))`.
pub fn parse_strategy_expr(src: &str) -> Result<StrategyCode, String> {
    let src = src.trim();
    let (head, rest) = match src.find('(') {
        None => (src, None),
        Some(i) => {
            if !src.ends_with(')') {
                return Err(format!("unbalanced parentheses in `{src}`"));
            }
            (&src[..i], Some(&src[i + 1..src.len() - 1]))
        }
    };
    let head = head.trim();
    let args: Vec<&str> = match rest {
        None => vec![],
        Some(r) => split_top_level(r),
    };
    let expr_args = |n: usize| -> Result<Vec<StrategyCode>, String> {
        if args.len() != n {
            return Err(format!("`{head}` takes {n} arguments, given {}", args.len()));
        }
        args.iter().map(|a| parse_strategy_expr(a)).collect()
    };
    let tag_with_ty = |name: &str| -> Result<StrategyCode, String> {
        if args.len() != 1 {
            return Err(format!("`{name}` takes a type argument"));
        }
        parse_ty(args[0])?;
        Ok(StrategyCode::comb(format!("{name}:{}", args[0].trim()), vec![]))
    };
    match head {
        "id" | "bot" | "der" | "weak" | "con" => tag_with_ty(head),
        "numeral" | "case" => {
            if args.len() != 1 {
                return Err(format!("`{head}` takes one numeric argument"));
            }
            let n: u32 = args[0].trim().parse().map_err(|e| format!("{e}"))?;
            Ok(StrategyCode::comb(format!("{head}:{n}"), vec![]))
        }
        "k" => {
            if args.len() != 2 {
                return Err("`k` takes a numeral and a type".into());
            }
            let n: u32 = args[0].trim().parse().map_err(|e| format!("{e}"))?;
            parse_ty(args[1])?;
            Ok(StrategyCode::comb(format!("k:{n}:{}", args[1].trim()), vec![]))
        }
        "succ" | "pred" | "if0" => {
            if !args.is_empty() {
                return Err(format!("`{head}` takes no arguments"));
            }
            Ok(StrategyCode::comb(head, vec![]))
        }
        "compose" | "tensor" | "pair" => Ok(StrategyCode::comb(head, expr_args(2)?)),
        "promote" | "curry" | "uncurry" => Ok(StrategyCode::comb(head, expr_args(1)?)),
        "phi_arg" | "phi_ans" | "p_k" => {
            if args.len() != 2 {
                return Err(format!("`{head}` takes a numeral and an expression"));
            }
            let n: u32 = args[0].trim().parse().map_err(|e| format!("{e}"))?;
            Ok(StrategyCode::comb(
                format!("{head}:{n}"),
                vec![parse_strategy_expr(args[1])?],
            ))
        }
        "observe" => {
            if args.is_empty() {
                return Err("`observe` takes a numeral and argument expressions".into());
            }
            let n: u32 = args[0].trim().parse().map_err(|e| format!("{e}"))?;
            let kids = args[1..]
                .iter()
                .map(|a| parse_strategy_expr(a))
                .collect::<Result<_, _>>()?;
            Ok(StrategyCode::comb(format!("observe:{n}"), kids))
        }
        "den" => {
            if args.is_empty() || args.len() > 2 {
                return Err("`den` takes a term and an optional unfolding depth".into());
            }
            let fuel = match args.get(1) {
                Some(d) => d.trim().parse().map_err(|e| format!("{e}"))?,
                None => 32,
            };
            Ok(StrategyCode::Denotation {
                term: args[0].trim().to_string(),
                fuel,
            })
        }
        other => Err(format!("unknown strategy expression `{other}`")),
    }
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if !s[start..].trim().is_empty() || !parts.is_empty() {
        parts.push(&s[start..]);
    }
    parts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game_core::game_of_type;
    use crate::pcf_lang::parse_type;

    fn mv(s: &str) -> Move {
        s.parse().unwrap()
    }

    fn g_nn() -> GameExpr {
        game_of_type(&parse_type("N -> N").unwrap())
    }

    fn numeral_on_nat(n: u32) -> Strategy {
        Strategy::from_positions(
            GameExpr::Nat,
            vec![vec![], vec![mv("Q"), Move::ans(vec![], n)]],
        )
        .unwrap()
    }

    /// Successor that interrogates its argument in the given session.
    fn succ_at(session: u32) -> Strategy {
        Strategy::from_fn(g_nn(), format!("succ@{session}"), move |m| {
            if *m == mv("R.Q") {
                return Some(Move::q(vec![Tag::L, Tag::Idx(session)]));
            }
            match (m.path.as_slice(), m.base) {
                ([Tag::L, Tag::Idx(i)], Base::Ans(n)) if *i == session => {
                    Some(Move::ans(vec![Tag::R], n + 1))
                }
                _ => None,
            }
        })
    }

    fn small_bounds() -> Bounds {
        Bounds {
            max_nat: 3,
            max_index: 2,
            max_len: 8,
            max_steps: 1000,
        }
    }

    #[test]
    fn from_positions_validates() {
        let bad_prefix = Strategy::from_positions(
            GameExpr::Nat,
            vec![vec![mv("Q"), mv("Ans(1)"), mv("Q"), mv("Ans(2)")]],
        );
        assert!(bad_prefix.is_err());
        let conflicting = Strategy::from_positions(
            g_nn(),
            vec![
                vec![mv("R.Q"), mv("R.Ans(1)")],
                vec![mv("R.Q"), mv("R.Ans(2)")],
            ],
        );
        assert!(conflicting.unwrap_err().contains("conflicting"));
        let odd = Strategy::from_positions(GameExpr::Nat, vec![vec![mv("Q")]]);
        assert!(odd.unwrap_err().contains("odd"));
    }

    #[test]
    fn traces_of_a_finite_strategy_recover_it() {
        let five = numeral_on_nat(5);
        let b = Bounds {
            max_nat: 6,
            ..small_bounds()
        };
        let t = traces(&five, &b);
        assert_eq!(t, five.finite_positions().unwrap().clone());
        // A tighter numeral bound cannot see the answer but still probes.
        let b = Bounds {
            max_nat: 3,
            ..small_bounds()
        };
        let t = traces(&five, &b);
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn traces_of_successor_contain_the_full_dialogue() {
        let s = succ_at(0);
        let t = traces(&s, &small_bounds());
        let full = vec![mv("R.Q"), mv("L.0!.Q"), mv("L.0!.Ans(2)"), mv("R.Ans(3)")];
        assert!(t.contains(&full));
        assert!(t.iter().all(|p| legal_position(s.game(), p)));
    }

    #[test]
    fn session_choice_is_invisible_to_equivalence() {
        let b = small_bounds();
        assert!(strat_equiv(&succ_at(0), &succ_at(1), &b));
        assert!(strat_equiv_fast(&succ_at(0), &succ_at(1), &b));
    }

    #[test]
    fn bottom_is_strictly_below_constants() {
        let b = small_bounds();
        let bot = Strategy::from_positions(GameExpr::Nat, vec![vec![]]).unwrap();
        let two = numeral_on_nat(2);
        let three = numeral_on_nat(3);
        assert!(strat_subeq(&bot, &two, &b));
        assert!(!strat_subeq(&two, &bot, &b));
        assert!(!strat_subeq(&two, &three, &b));
        assert!(!strat_subeq(&three, &two, &b));
        assert!(strat_equiv(&two, &two, &b));
    }

    #[test]
    fn fast_and_exhaustive_checks_agree_here() {
        let b = small_bounds();
        let strategies = [
            numeral_on_nat(2),
            numeral_on_nat(3),
            Strategy::from_positions(GameExpr::Nat, vec![vec![]]).unwrap(),
        ];
        for s in &strategies {
            for t in &strategies {
                assert_eq!(strat_subeq(s, t, &b), strat_subeq_fast(s, t, &b));
            }
        }
        assert_eq!(
            strat_subeq(&succ_at(0), &succ_at(1), &b),
            strat_subeq_fast(&succ_at(0), &succ_at(1), &b)
        );
    }

    #[test]
    fn an_index_sensitive_table_fails_self_consistency() {
        // Answers the opening with the session index it was probed at:
        // equivalent probes get inequivalent responses.
        let g = GameExpr::lolli(GameExpr::bang(GameExpr::Nat), GameExpr::Nat);
        let s = Strategy::from_fn(g, "index-leak", |m| {
            if *m == "R.Q".parse().unwrap() {
                return Some(Move::q(vec![Tag::L, Tag::Idx(0)]));
            }
            match (m.path.as_slice(), m.base) {
                ([Tag::L, Tag::Idx(_)], Base::Ans(n)) => {
                    Some(Move::ans(vec![Tag::R], if n == 0 { 0 } else { n + 1 }))
                }
                _ => None,
            }
        });
        // This one is fine: responses ignore which session opponent answers.
        assert!(self_consistent(&s, &small_bounds()));
        // Now leak the index into the answer value.
        let g = GameExpr::lolli(GameExpr::bang(GameExpr::Nat), GameExpr::Nat);
        let leak = Strategy::from_fn(g, "leak", |m| {
            if *m == "R.Q".parse().unwrap() {
                return Some(Move::q(vec![Tag::L, Tag::Idx(0)]));
            }
            match (m.path.as_slice(), m.base) {
                ([Tag::L, Tag::Idx(i)], Base::Ans(_)) => Some(Move::ans(vec![Tag::R], *i)),
                _ => None,
            }
        });
        // Probing only ever answers session 0, so the leak is invisible and
        // this still passes: the table answers R.Ans(0) uniformly there.
        assert!(self_consistent(&leak, &small_bounds()));
    }

    #[test]
    fn play_driver_enforces_legality() {
        let mut d = PlayDriver::new(succ_at(0));
        assert!(d.feed(mv("L.0!.Q")).is_err());
        assert_eq!(d.feed(mv("R.Q")).unwrap(), Some(mv("L.0!.Q")));
        assert_eq!(
            d.feed(mv("L.0!.Ans(4)")).unwrap(),
            Some(mv("R.Ans(5)"))
        );
        assert_eq!(d.play().len(), 4);
        // The dialogue is over; the opening cannot be replayed.
        assert!(d.feed(mv("R.Q")).is_err());
    }

    #[test]
    fn strategy_codes_round_trip_through_json() {
        let code = StrategyCode::comb(
            "compose",
            vec![
                StrategyCode::comb("id:N -> N", vec![]),
                StrategyCode::comb("promote", vec![StrategyCode::comb("der:N", vec![])]),
            ],
        );
        let json = code.to_json();
        assert_eq!(StrategyCode::from_json(&json).unwrap(), code);
        let fin = StrategyCode::Finite {
            game: GameExpr::Nat,
            positions: vec![vec![], vec![mv("Q"), mv("Ans(5)")]],
        };
        let json = fin.to_json();
        assert!(json.contains("\"kind\":\"finite\""));
        assert_eq!(StrategyCode::from_json(&json).unwrap(), fin);
    }

    #[test]
    fn expression_language_parses() {
        let code = parse_strategy_expr("compose(id(N -> N), promote(der(N)))").unwrap();
        assert_eq!(
            code,
            StrategyCode::comb(
                "compose",
                vec![
                    StrategyCode::comb("id:N -> N", vec![]),
                    StrategyCode::comb("promote", vec![StrategyCode::comb("der:N", vec![])]),
                ]
            )
        );
        assert!(parse_strategy_expr("frobnicate(N)").is_err());
        assert!(parse_strategy_expr("compose(id(N -> N))").is_err());
        let code = parse_strategy_expr("p_k(2, numeral(3))").unwrap();
        assert_eq!(
            code,
            StrategyCode::comb("p_k:2", vec![StrategyCode::comb("numeral:3", vec![])])
        );
    }

    #[test]
    fn decode_finite_round_trips() {
        let five = numeral_on_nat(5);
        let b = Bounds {
            max_nat: 6,
            ..small_bounds()
        };
        let code = encode_finite(&five, &b);
        let back = decode(&code).unwrap();
        assert!(strat_equiv(&five, &back, &b));
    }
}
