//! Games, moves, and the legality and equivalence machinery for positions.
//!
//! A move is an address path into the game tree plus a base (question or
//! numeric answer). Positions are move sequences; legality enforces opponent
//! start, alternation, bracketing, and the per-connective projection rules,
//! recursively at every node. Equivalence renumbers replication indices per
//! node instance, so two positions are equivalent exactly when their
//! canonical forms coincide.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Mutex, OnceLock};

use crate::pcf_lang::Type;

/// One step of a move's address: left/right operand, a replication index
/// (`Idx`, printed `i!`), or a component of a countable product (`Fam`,
/// printed `i&`).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Tag {
    L,
    R,
    Idx(u32),
    Fam(u32),
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Base {
    Q,
    Ans(u32),
}

/// A move: a path into the game tree and the base move at the leaf.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Move {
    pub path: Vec<Tag>,
    pub base: Base,
}

impl Move {
    pub fn q(path: Vec<Tag>) -> Move {
        Move { path, base: Base::Q }
    }

    pub fn ans(path: Vec<Tag>, n: u32) -> Move {
        Move {
            path,
            base: Base::Ans(n),
        }
    }

    pub fn is_question(&self) -> bool {
        matches!(self.base, Base::Q)
    }

    /// The same move with `prefix` prepended to its path.
    pub fn under(&self, prefix: &[Tag]) -> Move {
        let mut path = prefix.to_vec();
        path.extend(self.path.iter().copied());
        Move {
            path,
            base: self.base,
        }
    }

    /// Strip a leading tag, when present.
    pub fn strip(&self, tag: Tag) -> Option<Move> {
        match self.path.split_first() {
            Some((t, rest)) if *t == tag => Some(Move {
                path: rest.to_vec(),
                base: self.base,
            }),
            _ => None,
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.path {
            match t {
                Tag::L => write!(f, "L.")?,
                Tag::R => write!(f, "R.")?,
                Tag::Idx(i) => write!(f, "{i}!.")?,
                Tag::Fam(i) => write!(f, "{i}&.")?,
            }
        }
        match self.base {
            Base::Q => write!(f, "Q"),
            Base::Ans(n) => write!(f, "Ans({n})"),
        }
    }
}

impl std::str::FromStr for Move {
    type Err = String;

    fn from_str(s: &str) -> Result<Move, String> {
        let mut path = Vec::new();
        let parts: Vec<&str> = s.split('.').collect();
        let (base_part, tag_parts) = parts.split_last().ok_or("empty move")?;
        for p in tag_parts {
            let tag = match *p {
                "L" => Tag::L,
                "R" => Tag::R,
                p if p.ends_with('!') => Tag::Idx(
                    p[..p.len() - 1]
                        .parse()
                        .map_err(|_| format!("bad index `{p}`"))?,
                ),
                p if p.ends_with('&') => Tag::Fam(
                    p[..p.len() - 1]
                        .parse()
                        .map_err(|_| format!("bad index `{p}`"))?,
                ),
                p => return Err(format!("bad tag `{p}`")),
            };
            path.push(tag);
        }
        let base = match *base_part {
            "Q" => Base::Q,
            p if p.starts_with("Ans(") && p.ends_with(')') => Base::Ans(
                p[4..p.len() - 1]
                    .parse()
                    .map_err(|_| format!("bad answer `{p}`"))?,
            ),
            p => return Err(format!("bad base move `{p}`")),
        };
        Ok(Move { path, base })
    }
}

pub type Position = Vec<Move>;

pub fn position_to_string(s: &[Move]) -> String {
    s.iter()
        .map(|m| m.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Game trees. `I` is the empty game, `Nat` the flat numeric game (one
/// question, numeric answers), `Sigma` the one-answer convergence game.
/// `WithOmega` is a countable product of copies of its operand, addressed by
/// `Fam` tags.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum GameExpr {
    I,
    Nat,
    Sigma,
    Tensor(Box<GameExpr>, Box<GameExpr>),
    Lolli(Box<GameExpr>, Box<GameExpr>),
    With(Box<GameExpr>, Box<GameExpr>),
    WithOmega(Box<GameExpr>),
    Bang(Box<GameExpr>),
}

impl GameExpr {
    pub fn tensor(a: GameExpr, b: GameExpr) -> GameExpr {
        GameExpr::Tensor(Box::new(a), Box::new(b))
    }

    pub fn lolli(a: GameExpr, b: GameExpr) -> GameExpr {
        GameExpr::Lolli(Box::new(a), Box::new(b))
    }

    pub fn with(a: GameExpr, b: GameExpr) -> GameExpr {
        GameExpr::With(Box::new(a), Box::new(b))
    }

    pub fn with_omega(a: GameExpr) -> GameExpr {
        GameExpr::WithOmega(Box::new(a))
    }

    pub fn bang(a: GameExpr) -> GameExpr {
        GameExpr::Bang(Box::new(a))
    }
}

impl fmt::Display for GameExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GameExpr::I => write!(f, "I"),
            GameExpr::Nat => write!(f, "N"),
            GameExpr::Sigma => write!(f, "Sigma"),
            GameExpr::Tensor(a, b) => write!(f, "({a} * {b})"),
            GameExpr::Lolli(a, b) => write!(f, "({a} -o {b})"),
            GameExpr::With(a, b) => write!(f, "({a} & {b})"),
            GameExpr::WithOmega(a) => write!(f, "Fam({a})"),
            GameExpr::Bang(a) => write!(f, "!{a}"),
        }
    }
}

/// The game a closed term of type `t` plays in.
pub fn game_of_type(t: &Type) -> GameExpr {
    match t {
        Type::Nat => GameExpr::Nat,
        Type::Arrow(a, b) => GameExpr::lolli(GameExpr::bang(game_of_type(a)), game_of_type(b)),
    }
}

/// The context game for a list of variable types: a product growing to the
/// right, `I` when empty.
pub fn context_game(types: &[Type]) -> GameExpr {
    types
        .iter()
        .fold(GameExpr::I, |acc, t| GameExpr::with(acc, game_of_type(t)))
}

/// Whether every opening move can only happen in an opening position.
pub fn well_opened(g: &GameExpr) -> bool {
    match g {
        GameExpr::I | GameExpr::Nat | GameExpr::Sigma => true,
        GameExpr::With(a, b) => well_opened(a) && well_opened(b),
        GameExpr::WithOmega(a) => well_opened(a),
        GameExpr::Lolli(_, b) => well_opened(b),
        GameExpr::Tensor(_, _) | GameExpr::Bang(_) => false,
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Player {
    P,
    O,
}

impl Player {
    pub fn flip(self) -> Player {
        match self {
            Player::P => Player::O,
            Player::O => Player::P,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Qa {
    Q,
    A,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
#[error("move `{mv}` is not in game {game}: {msg}")]
pub struct BadMove {
    pub mv: String,
    pub game: String,
    pub msg: String,
}

/// Who moves and whether it is a question or an answer. Errors when the move
/// does not address the game.
pub fn label(g: &GameExpr, m: &Move) -> Result<(Player, Qa), BadMove> {
    let err = |msg: &str| BadMove {
        mv: m.to_string(),
        game: g.to_string(),
        msg: msg.to_string(),
    };
    let mut node = g;
    let mut flips = 0u32;
    for (i, t) in m.path.iter().enumerate() {
        node = match (node, t) {
            (GameExpr::Tensor(a, _), Tag::L) | (GameExpr::With(a, _), Tag::L) => a,
            (GameExpr::Tensor(_, b), Tag::R) | (GameExpr::With(_, b), Tag::R) => b,
            (GameExpr::Lolli(a, _), Tag::L) => {
                flips += 1;
                a
            }
            (GameExpr::Lolli(_, b), Tag::R) => b,
            (GameExpr::Bang(a), Tag::Idx(_)) => a,
            (GameExpr::WithOmega(a), Tag::Fam(_)) => a,
            _ => return Err(err(&format!("tag {} of the path does not fit", i + 1))),
        };
    }
    let base_player = match (node, m.base) {
        (GameExpr::Nat, Base::Q) => Player::O,
        (GameExpr::Nat, Base::Ans(_)) => Player::P,
        (GameExpr::Sigma, Base::Q) => Player::O,
        (GameExpr::Sigma, Base::Ans(0)) => Player::P,
        (GameExpr::Sigma, Base::Ans(_)) => return Err(err("the one-answer game only answers 0")),
        (GameExpr::I, _) => return Err(err("the empty game has no moves")),
        _ => return Err(err("path stops short of a leaf")),
    };
    let player = if flips % 2 == 0 {
        base_player
    } else {
        base_player.flip()
    };
    let qa = match m.base {
        Base::Q => Qa::Q,
        Base::Ans(_) => Qa::A,
    };
    Ok((player, qa))
}

/// Opponent-start, alternation, and bracketing against `g`'s own labelling.
/// Bracketing: an answer must share its full path with the most recent
/// unanswered question.
fn check_discipline(g: &GameExpr, s: &[Move]) -> Result<(), String> {
    let mut expected = Player::O;
    let mut pending: Vec<&Move> = Vec::new();
    for (i, m) in s.iter().enumerate() {
        let (player, qa) = label(g, m).map_err(|e| e.to_string())?;
        if player != expected {
            return Err(format!(
                "move {} `{m}` breaks alternation in {g}",
                i + 1
            ));
        }
        expected = expected.flip();
        match qa {
            Qa::Q => pending.push(m),
            Qa::A => match pending.pop() {
                Some(q) if q.path == m.path => {}
                Some(q) => {
                    return Err(format!(
                        "move {} `{m}` answers `{q}` at a different address",
                        i + 1
                    ))
                }
                None => return Err(format!("move {} `{m}` answers no pending question", i + 1)),
            },
        }
    }
    Ok(())
}

/// Split off the moves with the given head tag, stripped of it.
fn project(s: &[Move], tag: Tag) -> Vec<Move> {
    s.iter().filter_map(|m| m.strip(tag)).collect()
}

fn head_tag(m: &Move) -> Option<Tag> {
    m.path.first().copied()
}

fn check_node(g: &GameExpr, s: &[Move]) -> Result<(), String> {
    if s.is_empty() {
        return Ok(());
    }
    check_discipline(g, s)?;
    match g {
        GameExpr::I => Err("the empty game has no moves".into()),
        GameExpr::Nat | GameExpr::Sigma => {
            if s.len() > 2 {
                return Err(format!("{} moves in a two-move leaf game", s.len()));
            }
            if !s[0].path.is_empty() || s[0].base != Base::Q {
                return Err(format!("leaf play must open with Q, got `{}`", s[0]));
            }
            if let Some(m) = s.get(1) {
                if !matches!(m.base, Base::Ans(_)) {
                    return Err(format!("leaf play must continue with an answer, got `{m}`"));
                }
            }
            Ok(())
        }
        GameExpr::Tensor(a, b) | GameExpr::Lolli(a, b) => {
            check_node(a, &project(s, Tag::L))?;
            check_node(b, &project(s, Tag::R))
        }
        GameExpr::With(a, b) => {
            let first = head_tag(&s[0]);
            if s.iter().any(|m| head_tag(m) != first) {
                return Err("a product play must stay in one component".into());
            }
            match first {
                Some(Tag::L) => check_node(a, &project(s, Tag::L)),
                Some(Tag::R) => check_node(b, &project(s, Tag::R)),
                _ => Err("bad product address".into()),
            }
        }
        GameExpr::WithOmega(a) => {
            let first = head_tag(&s[0]);
            if s.iter().any(|m| head_tag(m) != first) {
                return Err("a countable-product play must stay in one component".into());
            }
            match first {
                Some(t @ Tag::Fam(_)) => check_node(a, &project(s, t)),
                _ => Err("bad countable-product address".into()),
            }
        }
        GameExpr::Bang(a) => {
            let mut seen = Vec::new();
            for m in s {
                match head_tag(m) {
                    Some(t @ Tag::Idx(_)) => {
                        if !seen.contains(&t) {
                            seen.push(t);
                        }
                    }
                    _ => return Err("bad replication address".into()),
                }
            }
            for t in seen {
                check_node(a, &project(s, t))?;
            }
            Ok(())
        }
    }
}

/// Full legality check with a reason on failure.
pub fn check_position(g: &GameExpr, s: &[Move]) -> Result<(), String> {
    check_node(g, s)
}

pub fn legal_position(g: &GameExpr, s: &[Move]) -> bool {
    check_position(g, s).is_ok()
}

/// The switching discipline: consecutive moves of a play that sit in
/// different components of a tensor (or different replication indices) mean
/// the second was made by opponent; across a function arrow, by player.
/// Checked recursively at every node.
pub fn check_switching(g: &GameExpr, s: &[Move]) -> Result<(), String> {
    match g {
        GameExpr::I | GameExpr::Nat | GameExpr::Sigma => Ok(()),
        GameExpr::With(a, b) => {
            check_switching(a, &project(s, Tag::L))?;
            check_switching(b, &project(s, Tag::R))
        }
        GameExpr::WithOmega(a) => {
            if let Some(t @ Tag::Fam(_)) = s.first().and_then(head_tag) {
                check_switching(a, &project(s, t))?;
            }
            Ok(())
        }
        GameExpr::Tensor(a, b) | GameExpr::Lolli(a, b) => {
            let want = if matches!(g, GameExpr::Tensor(_, _)) {
                Player::O
            } else {
                Player::P
            };
            for w in s.windows(2) {
                if head_tag(&w[0]) != head_tag(&w[1]) {
                    let (player, _) = label(g, &w[1]).map_err(|e| e.to_string())?;
                    if player != want {
                        return Err(format!(
                            "`{}` switches components of {g} as {:?}",
                            w[1], player
                        ));
                    }
                }
            }
            check_switching(a, &project(s, Tag::L))?;
            check_switching(b, &project(s, Tag::R))
        }
        GameExpr::Bang(a) => {
            for w in s.windows(2) {
                if head_tag(&w[0]) != head_tag(&w[1]) {
                    let (player, _) = label(g, &w[1]).map_err(|e| e.to_string())?;
                    if player != Player::O {
                        return Err(format!(
                            "`{}` switches replication indices of {g} as player",
                            w[1]
                        ));
                    }
                }
            }
            let mut seen = Vec::new();
            for m in s {
                if let Some(t @ Tag::Idx(_)) = head_tag(m) {
                    if !seen.contains(&t) {
                        seen.push(t);
                    }
                }
            }
            for t in seen {
                check_switching(a, &project(s, t))?;
            }
            Ok(())
        }
    }
}

/// Canonical form under replication-index renaming: at every `Idx` step the
/// index is renumbered by first occurrence, separately per node instance
/// (the instance is the canonicalized path prefix). `Fam` indices and leaf
/// answers are preserved.
pub fn canonical_position(s: &[Move]) -> Position {
    let mut maps: HashMap<Vec<Tag>, HashMap<u32, u32>> = HashMap::new();
    s.iter()
        .map(|m| {
            let mut path = Vec::with_capacity(m.path.len());
            for t in &m.path {
                match t {
                    Tag::Idx(i) => {
                        let map = maps.entry(path.clone()).or_default();
                        let next = map.len() as u32;
                        let j = *map.entry(*i).or_insert(next);
                        path.push(Tag::Idx(j));
                    }
                    other => path.push(*other),
                }
            }
            Move {
                path,
                base: m.base,
            }
        })
        .collect()
}

/// Position equivalence: equality of canonical forms. Assumes both positions
/// are legal in `g`.
pub fn pos_equiv(_g: &GameExpr, s: &[Move], t: &[Move]) -> bool {
    canonical_position(s) == canonical_position(t)
}

/// Budgets for every bounded exploration: numeral size, fresh replication
/// indices offered to opponent, play length, and execution steps.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Bounds {
    pub max_nat: u32,
    pub max_index: u32,
    pub max_len: usize,
    pub max_steps: u64,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_nat: 8,
            max_index: 8,
            max_len: 64,
            max_steps: 100_000,
        }
    }
}

/// Injective pairing and two-colour tagging of replication indices. Small
/// results are the exact classical codes (diagonal pairing, even/odd); codes
/// that would reach 2^31 fall back to interned handles, which keeps indices
/// machine-sized under arbitrarily nested promotion while staying injective.
pub mod index {
    use super::*;

    const HANDLE_BASE: u64 = 1 << 31;

    #[derive(PartialEq, Eq, Hash, Clone, Copy)]
    enum Key {
        Pair(u32, u32),
        Tagged(u8, u32),
    }

    #[derive(Default)]
    struct Interner {
        fwd: HashMap<Key, u32>,
        bwd: Vec<Key>,
    }

    fn interner() -> &'static Mutex<Interner> {
        static CELL: OnceLock<Mutex<Interner>> = OnceLock::new();
        CELL.get_or_init(|| Mutex::new(Interner::default()))
    }

    fn intern(k: Key) -> u32 {
        let mut i = interner().lock().unwrap();
        if let Some(&v) = i.fwd.get(&k) {
            return v;
        }
        let v = HANDLE_BASE as u32 + i.bwd.len() as u32;
        i.fwd.insert(k, v);
        i.bwd.push(k);
        v
    }

    fn lookup(v: u32) -> Option<Key> {
        let i = interner().lock().unwrap();
        i.bwd.get((v as u64 - HANDLE_BASE) as usize).copied()
    }

    /// Injective pairing of two indices.
    pub fn pair(i: u32, j: u32) -> u32 {
        let (i64, j64) = (i as u64, j as u64);
        if i64 + j64 < 92_000 {
            let c = (i64 + j64) * (i64 + j64 + 1) / 2 + j64;
            if c < HANDLE_BASE {
                return c as u32;
            }
        }
        intern(Key::Pair(i, j))
    }

    pub fn unpair(k: u32) -> (u32, u32) {
        if (k as u64) < HANDLE_BASE {
            let k = k as u64;
            let w = (((8.0 * k as f64 + 1.0).sqrt() - 1.0) / 2.0).floor() as u64;
            // Guard against float rounding at the triangle edges.
            let w = [w.saturating_sub(1), w, w + 1]
                .into_iter()
                .rfind(|w| w * (w + 1) / 2 <= k)
                .unwrap();
            let t = w * (w + 1) / 2;
            let j = k - t;
            ((w - j) as u32, j as u32)
        } else {
            match lookup(k) {
                Some(Key::Pair(i, j)) => (i, j),
                _ => panic!("index {k} is not a pair code"),
            }
        }
    }

    /// Injective two-colour tagging: side 0 or 1.
    pub fn tag(side: u8, i: u32) -> u32 {
        debug_assert!(side < 2);
        let v = 2 * (i as u64) + side as u64;
        if v < HANDLE_BASE {
            v as u32
        } else {
            intern(Key::Tagged(side, i))
        }
    }

    pub fn untag(k: u32) -> (u8, u32) {
        if (k as u64) < HANDLE_BASE {
            ((k & 1) as u8, k >> 1)
        } else {
            match lookup(k) {
                Some(Key::Tagged(s, i)) => (s, i),
                _ => panic!("index {k} is not a tag code"),
            }
        }
    }
}

/// Global screening of produced positions: every play a driver or trace
/// explorer materializes passes through `screen`, which records legality and
/// switching violations for the acceptance gate.
pub mod hook {
    use super::*;

    static CHECKED: AtomicU64 = AtomicU64::new(0);

    fn violations_cell() -> &'static Mutex<Vec<String>> {
        static CELL: OnceLock<Mutex<Vec<String>>> = OnceLock::new();
        CELL.get_or_init(|| Mutex::new(Vec::new()))
    }

    /// Check one produced position, recording any violation. Returns whether
    /// it was clean.
    pub fn screen(g: &GameExpr, s: &[Move]) -> bool {
        CHECKED.fetch_add(1, Ordering::Relaxed);
        let result = check_position(g, s).and_then(|()| check_switching(g, s));
        match result {
            Ok(()) => true,
            Err(msg) => {
                let mut v = violations_cell().lock().unwrap();
                if v.len() < 64 {
                    v.push(format!("{msg} [{}]", position_to_string(s)));
                }
                false
            }
        }
    }

    pub fn checked_count() -> u64 {
        CHECKED.load(Ordering::Relaxed)
    }

    pub fn violations() -> Vec<String> {
        violations_cell().lock().unwrap().clone()
    }

    pub fn reset() {
        CHECKED.store(0, Ordering::Relaxed);
        violations_cell().lock().unwrap().clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pcf_lang::parse_type;

    fn g_nn() -> GameExpr {
        game_of_type(&parse_type("N -> N").unwrap())
    }

    fn mv(s: &str) -> Move {
        s.parse().unwrap()
    }

    fn pos(s: &[&str]) -> Position {
        s.iter().map(|m| mv(m)).collect()
    }

    #[test]
    fn move_display_and_parse_round_trip() {
        for s in ["Q", "Ans(5)", "R.Q", "L.3!.Ans(2)", "L.R.2&.Q"] {
            assert_eq!(mv(s).to_string(), s);
        }
    }

    #[test]
    fn game_of_type_shapes() {
        assert_eq!(game_of_type(&Type::Nat), GameExpr::Nat);
        assert_eq!(
            g_nn(),
            GameExpr::lolli(GameExpr::bang(GameExpr::Nat), GameExpr::Nat)
        );
        let second = game_of_type(&parse_type("(N -> N) -> N").unwrap());
        assert_eq!(
            second,
            GameExpr::lolli(GameExpr::bang(g_nn()), GameExpr::Nat)
        );
    }

    #[test]
    fn labels_flip_across_the_arrow() {
        let g = g_nn();
        assert_eq!(label(&g, &mv("R.Q")).unwrap(), (Player::O, Qa::Q));
        assert_eq!(label(&g, &mv("R.Ans(5)")).unwrap(), (Player::P, Qa::A));
        assert_eq!(label(&g, &mv("L.0!.Q")).unwrap(), (Player::P, Qa::Q));
        assert_eq!(label(&g, &mv("L.3!.Ans(2)")).unwrap(), (Player::O, Qa::A));
        assert!(label(&g, &mv("L.Q")).is_err());
        assert!(label(&g, &mv("R.L.Q")).is_err());
    }

    #[test]
    fn double_flip_restores_polarity() {
        let g = game_of_type(&parse_type("(N -> N) -> N").unwrap());
        // The argument of the argument is back on player's opening side.
        assert_eq!(label(&g, &mv("L.0!.L.1!.Q")).unwrap(), (Player::O, Qa::Q));
        assert_eq!(label(&g, &mv("L.0!.R.Q")).unwrap(), (Player::P, Qa::Q));
    }

    #[test]
    fn legality_basics() {
        let g = g_nn();
        assert!(legal_position(&g, &[]));
        assert!(legal_position(&g, &pos(&["R.Q"])));
        assert!(legal_position(&g, &pos(&["R.Q", "R.Ans(3)"])));
        assert!(legal_position(&g, &pos(&["R.Q", "L.0!.Q"])));
        assert!(legal_position(
            &g,
            &pos(&["R.Q", "L.0!.Q", "L.0!.Ans(7)", "R.Ans(8)"])
        ));
        // Player cannot open.
        assert!(!legal_position(&g, &pos(&["L.0!.Q"])));
        // Answering the opening while an inner question is pending.
        assert!(!legal_position(&g, &pos(&["R.Q", "L.0!.Q", "R.Ans(2)"])));
        // A leaf session is over after its answer.
        assert!(!legal_position(
            &g,
            &pos(&["R.Q", "L.0!.Q", "L.0!.Ans(1)", "L.0!.Q"])
        ));
        // Two opening questions in a row break alternation.
        assert!(!legal_position(&g, &pos(&["R.Q", "R.Q"])));
    }

    #[test]
    fn legality_needs_recursive_projections() {
        // Globally alternating and well bracketed, but the left projection
        // of the tensor breaks alternation inside its own arrow game.
        let nn = GameExpr::lolli(GameExpr::Nat, GameExpr::Nat);
        let g = GameExpr::tensor(nn.clone(), nn);
        let s = pos(&["L.R.Q", "L.R.Ans(1)", "R.R.Q", "L.L.Q"]);
        let mut expected = Player::O;
        for m in &s {
            let (p, _) = label(&g, m).unwrap();
            assert_eq!(p, expected);
            expected = expected.flip();
        }
        assert!(!legal_position(&g, &s));
    }

    #[test]
    fn with_play_stays_in_one_component() {
        let g = GameExpr::with(GameExpr::Nat, GameExpr::Nat);
        assert!(legal_position(&g, &pos(&["L.Q", "L.Ans(0)"])));
        assert!(!legal_position(&g, &pos(&["L.Q", "R.Q"])));
        let f = GameExpr::with_omega(GameExpr::Nat);
        assert!(legal_position(&f, &pos(&["2&.Q", "2&.Ans(1)"])));
        assert!(!legal_position(&f, &pos(&["2&.Q", "3&.Q"])));
    }

    #[test]
    fn sigma_answers_only_zero() {
        let g = GameExpr::lolli(GameExpr::Nat, GameExpr::Sigma);
        assert!(legal_position(&g, &pos(&["R.Q", "R.Ans(0)"])));
        assert!(!legal_position(&g, &pos(&["R.Q", "R.Ans(1)"])));
    }

    #[test]
    fn switching_passes_on_legal_plays() {
        let g = game_of_type(&parse_type("(N -> N) -> N").unwrap());
        let plays = [
            pos(&["R.Q"]),
            pos(&["R.Q", "L.0!.R.Q"]),
            pos(&["R.Q", "L.0!.R.Q", "L.0!.L.1!.Q", "L.0!.L.1!.Ans(4)"]),
            pos(&[
                "R.Q",
                "L.0!.R.Q",
                "L.0!.L.1!.Q",
                "L.0!.L.1!.Ans(4)",
                "L.0!.R.Ans(9)",
                "R.Ans(9)",
            ]),
        ];
        for s in &plays {
            check_position(&g, s).unwrap();
            check_switching(&g, s).unwrap();
        }
    }

    #[test]
    fn switching_flags_player_component_hops() {
        // Not a reachable legal play: player jumps between tensor factors.
        let g = GameExpr::tensor(
            GameExpr::lolli(GameExpr::Nat, GameExpr::Nat),
            GameExpr::lolli(GameExpr::Nat, GameExpr::Nat),
        );
        let s = pos(&["L.R.Q", "R.L.Q"]);
        assert!(check_switching(&g, &s).is_err());
    }

    #[test]
    fn canonical_form_renumbers_per_node_instance() {
        let s = pos(&["R.Q", "L.3!.Q", "L.3!.Ans(2)", "L.5!.Q"]);
        let expect = pos(&["R.Q", "L.0!.Q", "L.0!.Ans(2)", "L.1!.Q"]);
        assert_eq!(canonical_position(&s), expect);
    }

    #[test]
    fn pos_equiv_on_replication_indices() {
        let g = g_nn();
        let s = pos(&["R.Q", "L.3!.Q", "L.3!.Ans(2)"]);
        let t = pos(&["R.Q", "L.5!.Q", "L.5!.Ans(2)"]);
        let u = pos(&["R.Q", "L.5!.Q", "L.5!.Ans(4)"]);
        assert!(pos_equiv(&g, &s, &t));
        assert!(!pos_equiv(&g, &s, &u));
        assert!(!pos_equiv(&g, &s, &s[..2].to_vec()));
    }

    #[test]
    fn pos_equiv_keeps_index_correlations() {
        // Same session twice on one side, two sessions on the other.
        let s = pos(&["R.Q", "L.1!.Q", "L.1!.Ans(0)", "L.1!.Q"]);
        let t = pos(&["R.Q", "L.1!.Q", "L.1!.Ans(0)", "L.2!.Q"]);
        assert_ne!(canonical_position(&s), canonical_position(&t));
    }

    #[test]
    fn pos_equiv_renumbers_nested_nodes_independently() {
        let g = GameExpr::bang(GameExpr::lolli(GameExpr::bang(GameExpr::Nat), GameExpr::Nat));
        let s = pos(&["3!.R.Q", "3!.L.7!.Q", "5!.R.Q", "5!.L.7!.Q"]);
        let t = pos(&["1!.R.Q", "1!.L.2!.Q", "4!.R.Q", "4!.L.9!.Q"]);
        check_position(&g, &s).unwrap();
        check_position(&g, &t).unwrap();
        assert!(pos_equiv(&g, &s, &t));
        // Countable-product components never renumber.
        let f = GameExpr::with_omega(GameExpr::Nat);
        assert!(!pos_equiv(&f, &pos(&["2&.Q"]), &pos(&["3&.Q"])));
    }

    #[test]
    fn well_opened_games() {
        assert!(well_opened(&GameExpr::Nat));
        assert!(well_opened(&g_nn()));
        assert!(well_opened(&GameExpr::with(GameExpr::Nat, g_nn())));
        assert!(!well_opened(&GameExpr::bang(GameExpr::Nat)));
        assert!(!well_opened(&GameExpr::tensor(GameExpr::Nat, GameExpr::Nat)));
        assert!(well_opened(&GameExpr::lolli(
            GameExpr::bang(GameExpr::Nat),
            GameExpr::Nat
        )));
    }

    #[test]
    fn pairing_is_exact_when_small() {
        assert_eq!(index::pair(0, 0), 0);
        assert_eq!(index::pair(1, 0), 1);
        assert_eq!(index::pair(0, 1), 2);
        assert_eq!(index::pair(2, 0), 3);
        assert_eq!(index::pair(1, 1), 4);
        assert_eq!(index::pair(0, 2), 5);
        for i in 0..40 {
            for j in 0..40 {
                assert_eq!(index::unpair(index::pair(i, j)), (i, j));
            }
        }
    }

    #[test]
    fn pairing_stays_injective_past_the_exact_region() {
        let big = index::pair(100_000, 100_000);
        assert_eq!(index::unpair(big), (100_000, 100_000));
        let big2 = index::pair(100_000, 100_001);
        assert_ne!(big, big2);
        assert_eq!(index::unpair(big2), (100_000, 100_001));
        // Interning is stable.
        assert_eq!(index::pair(100_000, 100_000), big);
        // Deep nesting keeps working.
        let mut v = 7;
        for _ in 0..40 {
            v = index::pair(v, 3);
        }
        for _ in 0..40 {
            let (i, j) = index::unpair(v);
            assert_eq!(j, 3);
            v = i;
        }
        assert_eq!(v, 7);
    }

    #[test]
    fn tagging_round_trips() {
        for side in 0..2u8 {
            for i in [0u32, 1, 5, 1 << 20, u32::MAX - 3] {
                assert_eq!(index::untag(index::tag(side, i)), (side, i));
            }
        }
        assert_eq!(index::tag(0, 3), 6);
        assert_eq!(index::tag(1, 3), 7);
    }

    #[test]
    fn hook_records_violations() {
        hook::reset();
        let g = g_nn();
        assert!(hook::screen(&g, &pos(&["R.Q", "L.0!.Q"])));
        assert!(!hook::screen(&g, &pos(&["L.0!.Q"])));
        assert_eq!(hook::checked_count(), 2);
        assert_eq!(hook::violations().len(), 1);
        hook::reset();
    }
}
