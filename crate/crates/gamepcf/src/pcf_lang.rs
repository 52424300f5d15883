//! Syntax, types, and the operational reference semantics of the source
//! language, plus finite evaluation trees (FETs): the normal forms that
//! strategy readback produces and that drive observational testing.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Simple types over a single ground type of natural numbers.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Type {
    Nat,
    Arrow(Box<Type>, Box<Type>),
}

impl Type {
    pub fn arrow(a: Type, b: Type) -> Type {
        Type::Arrow(Box::new(a), Box::new(b))
    }

    /// Argument types in order, so `N -> (N -> N) -> N` yields `[N, N -> N]`.
    pub fn arg_types(&self) -> Vec<&Type> {
        let mut args = Vec::new();
        let mut t = self;
        while let Type::Arrow(a, b) = t {
            args.push(a.as_ref());
            t = b;
        }
        args
    }

    pub fn arity(&self) -> usize {
        self.arg_types().len()
    }

    /// Rebuild an arrow chain ending in the ground type.
    pub fn from_args(args: &[Type]) -> Type {
        args.iter()
            .rev()
            .fold(Type::Nat, |acc, a| Type::arrow(a.clone(), acc))
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, left_of_arrow: bool) -> fmt::Result {
        match self {
            Type::Nat => write!(f, "N"),
            Type::Arrow(a, b) => {
                if left_of_arrow {
                    write!(f, "(")?;
                }
                a.fmt_prec(f, true)?;
                write!(f, " -> ")?;
                b.fmt_prec(f, false)?;
                if left_of_arrow {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, false)
    }
}

/// Terms of the source language. `CaseK(k)` is the k-branch case constant:
/// it evaluates its scrutinee and selects branch i when the value is i < k;
/// values >= k have no rule. `Y(t)` and `Omega(t)` carry the type they
/// recurse or diverge at.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Term {
    Var(String),
    Lam(String, Type, Box<Term>),
    App(Box<Term>, Box<Term>),
    Num(u32),
    Succ,
    Pred,
    If0,
    CaseK(u32),
    Y(Type),
    Omega(Type),
}

impl Term {
    pub fn lam(x: &str, t: Type, body: Term) -> Term {
        Term::Lam(x.to_string(), t, Box::new(body))
    }

    pub fn var(x: &str) -> Term {
        Term::Var(x.to_string())
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn apps(f: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(f, Term::app)
    }

    pub fn free_vars(&self) -> Vec<String> {
        fn go(t: &Term, bound: &mut Vec<String>, out: &mut Vec<String>) {
            match t {
                Term::Var(x) => {
                    if !bound.contains(x) && !out.contains(x) {
                        out.push(x.clone());
                    }
                }
                Term::Lam(x, _, b) => {
                    bound.push(x.clone());
                    go(b, bound, out);
                    bound.pop();
                }
                Term::App(f, a) => {
                    go(f, bound, out);
                    go(a, bound, out);
                }
                _ => {}
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        match self {
            Term::Var(x) => write!(f, "{x}"),
            Term::Num(n) => write!(f, "{n}"),
            Term::Succ => write!(f, "succ"),
            Term::Pred => write!(f, "pred"),
            Term::If0 => write!(f, "if0"),
            Term::CaseK(k) => write!(f, "case{k}"),
            Term::Y(t) => write!(f, "Y[{t}]"),
            Term::Omega(t) => write!(f, "Omega[{t}]"),
            Term::Lam(x, t, b) => {
                if prec > 0 {
                    write!(f, "(")?;
                }
                write!(f, "\\{x}:{t}. ")?;
                b.fmt_prec(f, 0)?;
                if prec > 0 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Term::App(g, a) => {
                if prec > 1 {
                    write!(f, "(")?;
                }
                g.fmt_prec(f, 1)?;
                write!(f, " ")?;
                a.fmt_prec(f, 2)?;
                if prec > 1 {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
#[error("parse error at {line}:{col}: {msg}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(u32),
    Lambda,
    Colon,
    Dot,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Arrow,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Num(n) => write!(f, "numeral `{n}`"),
            Tok::Lambda => write!(f, "`\\`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBracket => write!(f, "`[`"),
            Tok::RBracket => write!(f, "`]`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

struct Lexed {
    toks: Vec<(Tok, u32, u32)>,
}

fn lex(src: &str) -> Result<Lexed, ParseError> {
    let mut toks = Vec::new();
    let mut line = 1u32;
    let mut col = 1u32;
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        if c == '#' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                bump(&mut chars);
            }
            continue;
        }
        let tok = match c {
            '\\' => {
                bump(&mut chars);
                Tok::Lambda
            }
            ':' => {
                bump(&mut chars);
                Tok::Colon
            }
            '.' => {
                bump(&mut chars);
                Tok::Dot
            }
            '(' => {
                bump(&mut chars);
                Tok::LParen
            }
            ')' => {
                bump(&mut chars);
                Tok::RParen
            }
            '[' => {
                bump(&mut chars);
                Tok::LBracket
            }
            ']' => {
                bump(&mut chars);
                Tok::RBracket
            }
            '-' => {
                bump(&mut chars);
                if chars.peek() == Some(&'>') {
                    bump(&mut chars);
                    Tok::Arrow
                } else {
                    return Err(ParseError {
                        line: tl,
                        col: tc,
                        msg: "expected `->`".into(),
                    });
                }
            }
            c if c.is_ascii_digit() => {
                let mut n: u64 = 0;
                while let Some(&d) = chars.peek() {
                    if !d.is_ascii_digit() {
                        break;
                    }
                    bump(&mut chars);
                    n = n * 10 + (d as u64 - '0' as u64);
                    if n > u32::MAX as u64 {
                        return Err(ParseError {
                            line: tl,
                            col: tc,
                            msg: "numeral out of range".into(),
                        });
                    }
                }
                Tok::Num(n as u32)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if !(d.is_ascii_alphanumeric() || d == '_' || d == '\'') {
                        break;
                    }
                    s.push(bump(&mut chars));
                }
                Tok::Ident(s)
            }
            other => {
                return Err(ParseError {
                    line: tl,
                    col: tc,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        };
        toks.push((tok, tl, tc));
    }
    toks.push((Tok::Eof, line, col));
    Ok(Lexed { toks })
}

struct Parser {
    toks: Vec<(Tok, u32, u32)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn here(&self) -> (u32, u32) {
        let (_, l, c) = self.toks[self.pos];
        (l, c)
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.next();
            Ok(())
        } else {
            Err(self.err(format!("expected {want}, found {}", self.peek())))
        }
    }

    fn ty(&mut self) -> Result<Type, ParseError> {
        let lhs = self.ty_atom()?;
        if *self.peek() == Tok::Arrow {
            self.next();
            let rhs = self.ty()?;
            Ok(Type::arrow(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn ty_atom(&mut self) -> Result<Type, ParseError> {
        match self.next() {
            Tok::Ident(s) if s == "N" => Ok(Type::Nat),
            Tok::LParen => {
                let t = self.ty()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            other => {
                self.pos -= 1;
                Err(self.err(format!("expected a type, found {other}")))
            }
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        if *self.peek() == Tok::Lambda {
            self.next();
            let x = match self.next() {
                Tok::Ident(s) if !is_keyword(&s) => s,
                other => {
                    self.pos -= 1;
                    return Err(self.err(format!("expected a binder name, found {other}")));
                }
            };
            self.expect(Tok::Colon)?;
            let t = self.ty()?;
            self.expect(Tok::Dot)?;
            let body = self.term()?;
            return Ok(Term::lam(&x, t, body));
        }
        let mut t = self.atom()?.ok_or_else(|| {
            self.err(format!("expected a term, found {}", self.peek()))
        })?;
        while let Some(arg) = self.atom()? {
            t = Term::app(t, arg);
        }
        Ok(t)
    }

    /// One application atom, or None when the next token cannot start one.
    fn atom(&mut self) -> Result<Option<Term>, ParseError> {
        let t = match self.peek().clone() {
            Tok::Num(n) => {
                self.next();
                Term::Num(n)
            }
            Tok::LParen => {
                self.next();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                t
            }
            Tok::Ident(s) => {
                self.next();
                match s.as_str() {
                    "succ" => Term::Succ,
                    "pred" => Term::Pred,
                    "if0" => Term::If0,
                    "Y" => {
                        self.expect(Tok::LBracket)?;
                        let t = self.ty()?;
                        self.expect(Tok::RBracket)?;
                        Term::Y(t)
                    }
                    "Omega" => {
                        self.expect(Tok::LBracket)?;
                        let t = self.ty()?;
                        self.expect(Tok::RBracket)?;
                        Term::Omega(t)
                    }
                    "case" => {
                        let k = match self.next() {
                            Tok::Num(k) => k,
                            other => {
                                self.pos -= 1;
                                return Err(
                                    self.err(format!("expected a branch count, found {other}"))
                                );
                            }
                        };
                        Term::CaseK(k)
                    }
                    _ => {
                        if let Some(k) = case_suffix(&s) {
                            Term::CaseK(k)
                        } else {
                            Term::Var(s)
                        }
                    }
                }
            }
            _ => return Ok(None),
        };
        Ok(Some(t))
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(s, "succ" | "pred" | "if0" | "Y" | "Omega" | "N" | "case") || case_suffix(s).is_some()
}

fn case_suffix(s: &str) -> Option<u32> {
    let rest = s.strip_prefix("case")?;
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}

/// Parse a term in the surface syntax. `#` starts a line comment.
pub fn parse(src: &str) -> Result<Term, ParseError> {
    let mut p = Parser {
        toks: lex(src)?.toks,
        pos: 0,
    };
    let t = p.term()?;
    if *p.peek() != Tok::Eof {
        return Err(p.err(format!("expected end of input, found {}", p.peek())));
    }
    Ok(t)
}

/// Parse a type in the surface syntax.
pub fn parse_type(src: &str) -> Result<Type, ParseError> {
    let mut p = Parser {
        toks: lex(src)?.toks,
        pos: 0,
    };
    let t = p.ty()?;
    if *p.peek() != Tok::Eof {
        return Err(p.err(format!("expected end of input, found {}", p.peek())));
    }
    Ok(t)
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
#[error("type error: {msg}")]
pub struct TypeError {
    pub msg: String,
}

fn constant_type(t: &Term) -> Option<Type> {
    let n = || Type::Nat;
    Some(match t {
        Term::Num(_) => n(),
        Term::Succ | Term::Pred => Type::arrow(n(), n()),
        Term::If0 => Type::arrow(n(), Type::arrow(n(), Type::arrow(n(), n()))),
        Term::CaseK(k) => {
            let mut ty = n();
            for _ in 0..*k {
                ty = Type::arrow(n(), ty);
            }
            Type::arrow(n(), ty)
        }
        Term::Y(t) => Type::arrow(Type::arrow(t.clone(), t.clone()), t.clone()),
        Term::Omega(t) => t.clone(),
        _ => return None,
    })
}

/// Infer the type of `t` under `env` (innermost binding shadows).
pub fn typecheck(env: &[(String, Type)], t: &Term) -> Result<Type, TypeError> {
    if let Some(ty) = constant_type(t) {
        return Ok(ty);
    }
    match t {
        Term::Var(x) => env
            .iter()
            .rev()
            .find(|(y, _)| y == x)
            .map(|(_, t)| t.clone())
            .ok_or_else(|| TypeError {
                msg: format!("unbound variable `{x}`"),
            }),
        Term::Lam(x, tx, body) => {
            let mut env2 = env.to_vec();
            env2.push((x.clone(), tx.clone()));
            let tb = typecheck(&env2, body)?;
            Ok(Type::arrow(tx.clone(), tb))
        }
        Term::App(f, a) => {
            let tf = typecheck(env, f)?;
            let ta = typecheck(env, a)?;
            match tf {
                Type::Arrow(dom, cod) if *dom == ta => Ok(*cod),
                Type::Arrow(dom, _) => Err(TypeError {
                    msg: format!(
                        "argument `{a}` has type {ta} but `{f}` expects {dom}"
                    ),
                }),
                Type::Nat => Err(TypeError {
                    msg: format!("`{f}` has ground type and cannot be applied"),
                }),
            }
        }
        _ => unreachable!("constants handled above"),
    }
}

/// Capture-avoiding substitution of `s` for `x` in `t`.
pub fn subst(t: &Term, x: &str, s: &Term) -> Term {
    match t {
        Term::Var(y) if y == x => s.clone(),
        Term::Var(_) | Term::Num(_) | Term::Succ | Term::Pred | Term::If0 | Term::CaseK(_)
        | Term::Y(_) | Term::Omega(_) => t.clone(),
        Term::App(f, a) => Term::app(subst(f, x, s), subst(a, x, s)),
        Term::Lam(y, ty, body) => {
            if y == x {
                t.clone()
            } else if s.free_vars().contains(y) {
                let fresh = fresh_name(y, &[s.free_vars(), body.free_vars()].concat());
                let body2 = subst(body, y, &Term::var(&fresh));
                Term::Lam(fresh, ty.clone(), Box::new(subst(&body2, x, s)))
            } else {
                Term::Lam(y.clone(), ty.clone(), Box::new(subst(body, x, s)))
            }
        }
    }
}

fn fresh_name(base: &str, avoid: &[String]) -> String {
    let stem: String = base.chars().take_while(|c| *c != '\'').collect();
    let mut i = 1;
    loop {
        let cand = format!("{stem}{}", "'".repeat(i));
        if !avoid.iter().any(|v| *v == cand) {
            return cand;
        }
        i += 1;
    }
}

/// One deterministic head-reduction step, or None for values and stuck terms.
pub fn step(t: &Term) -> Option<Term> {
    match t {
        Term::App(f, a) => {
            match f.as_ref() {
                Term::Lam(x, _, body) => return Some(subst(body, x, a)),
                Term::Y(_) => {
                    return Some(Term::app(a.as_ref().clone(), t.clone()));
                }
                Term::Succ => match a.as_ref() {
                    Term::Num(n) => return Some(Term::Num(n + 1)),
                    _ => return step(a).map(|a2| Term::app(Term::Succ, a2)),
                },
                Term::Pred => match a.as_ref() {
                    Term::Num(n) => return Some(Term::Num(n.saturating_sub(1))),
                    _ => return step(a).map(|a2| Term::app(Term::Pred, a2)),
                },
                _ => {}
            }
            // Conditionals reduce on the scrutinee once fully applied.
            if let Some((head, args)) = spine(t) {
                match head {
                    Term::If0 if args.len() == 3 => {
                        return match args[0] {
                            Term::Num(0) => Some(args[1].clone()),
                            Term::Num(_) => Some(args[2].clone()),
                            scrut => step(scrut).map(|s2| {
                                Term::apps(Term::If0, [s2, args[1].clone(), args[2].clone()])
                            }),
                        };
                    }
                    Term::CaseK(k) if args.len() == (*k as usize) + 1 => {
                        return match args[0] {
                            Term::Num(i) if (*i as usize) < args.len() - 1 => {
                                Some(args[1 + *i as usize].clone())
                            }
                            Term::Num(_) => None,
                            scrut => step(scrut).map(|s2| {
                                let mut newargs = vec![s2];
                                newargs.extend(args[1..].iter().map(|&a| a.clone()));
                                Term::apps(Term::CaseK(*k), newargs)
                            }),
                        };
                    }
                    _ => {}
                }
            }
            step(f).map(|f2| Term::app(f2, a.as_ref().clone()))
        }
        _ => None,
    }
}

/// Application spine: `f a b c` gives `(f, [a, b, c])` when f is not itself
/// an application.
fn spine(t: &Term) -> Option<(&Term, Vec<&Term>)> {
    let mut args = Vec::new();
    let mut cur = t;
    while let Term::App(f, a) = cur {
        args.push(a.as_ref());
        cur = f;
    }
    args.reverse();
    Some((cur, args))
}

/// Result of running a program, here or on the game side.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Answer(u32),
    Unresolved(BudgetReport),
}

impl Outcome {
    pub fn answer(&self) -> Option<u32> {
        match self {
            Outcome::Answer(n) => Some(*n),
            Outcome::Unresolved(_) => None,
        }
    }
}

/// What was spent before giving up. `stuck` means reduction halted with no
/// applicable rule before the budget ran out; on the game side it means the
/// strategy had no response.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetReport {
    pub steps_taken: u64,
    pub step_budget: u64,
    pub stuck: bool,
    pub y_depths_tried: Vec<u32>,
}

/// Run a closed ground-type term by head reduction for at most `max_steps`.
pub fn eval_op(t: &Term, max_steps: u64) -> Outcome {
    let mut cur = t.clone();
    let mut steps = 0;
    loop {
        if let Term::Num(n) = cur {
            return Outcome::Answer(n);
        }
        if steps >= max_steps {
            return Outcome::Unresolved(BudgetReport {
                steps_taken: steps,
                step_budget: max_steps,
                stuck: false,
                y_depths_tried: vec![],
            });
        }
        match step(&cur) {
            Some(next) => {
                cur = next;
                steps += 1;
            }
            None => {
                return Outcome::Unresolved(BudgetReport {
                    steps_taken: steps,
                    step_budget: max_steps,
                    stuck: true,
                    y_depths_tried: vec![],
                })
            }
        }
    }
}

/// The finite unfolding of recursion: depth 0 is `\f. Omega`, depth k+1 is
/// `\f. f (unfold_k f)`.
pub fn y_approx(t: &Type, depth: u32) -> Term {
    let ft = Type::arrow(t.clone(), t.clone());
    let mut acc = Term::lam("f", ft.clone(), Term::Omega(t.clone()));
    for _ in 0..depth {
        acc = Term::lam(
            "f",
            ft.clone(),
            Term::app(Term::var("f"), Term::app(acc, Term::var("f"))),
        );
    }
    acc
}

/// Replace every `Y` with its finite unfolding at the given depth.
pub fn unfold_y(t: &Term, depth: u32) -> Term {
    match t {
        Term::Y(ty) => y_approx(ty, depth),
        Term::Lam(x, ty, b) => Term::Lam(x.clone(), ty.clone(), Box::new(unfold_y(b, depth))),
        Term::App(f, a) => Term::app(unfold_y(f, depth), unfold_y(a, depth)),
        _ => t.clone(),
    }
}

pub fn mentions_y(t: &Term) -> bool {
    match t {
        Term::Y(_) => true,
        Term::Lam(_, _, b) => mentions_y(b),
        Term::App(f, a) => mentions_y(f) || mentions_y(a),
        _ => false,
    }
}

/// Finite evaluation trees. A tree of function type is a `Lam` whose binder
/// list matches the type's full arity and whose body is ground; ground trees
/// are `Omega`, a numeral, or a `Case` on a head variable applied to exactly
/// as many argument trees as the head's type takes, with finitely many
/// numeric answers mapped to continuation trees (absent answers mean Omega).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Fet {
    Omega,
    Num(u32),
    Case {
        head: String,
        args: Vec<Fet>,
        answers: BTreeMap<u32, Fet>,
    },
    Lam {
        binders: Vec<(String, Type)>,
        body: Box<Fet>,
    },
}

impl Fet {
    /// Case node, dropping answers that are Omega.
    pub fn case(head: &str, args: Vec<Fet>, answers: BTreeMap<u32, Fet>) -> Fet {
        let answers = answers
            .into_iter()
            .filter(|(_, v)| !matches!(v, Fet::Omega))
            .collect();
        Fet::Case {
            head: head.to_string(),
            args,
            answers,
        }
    }

    /// Lambda node, merging nested binder lists and dissolving empty ones.
    pub fn lam(binders: Vec<(String, Type)>, body: Fet) -> Fet {
        if binders.is_empty() {
            return body;
        }
        match body {
            Fet::Lam {
                binders: inner,
                body,
            } => {
                let mut all = binders;
                all.extend(inner);
                Fet::Lam { binders: all, body }
            }
            other => Fet::Lam {
                binders,
                body: Box::new(other),
            },
        }
    }

    fn rename(&self, map: &mut Vec<(String, String)>, counter: &mut u32) -> Fet {
        match self {
            Fet::Omega => Fet::Omega,
            Fet::Num(n) => Fet::Num(*n),
            Fet::Case {
                head,
                args,
                answers,
            } => {
                let head2 = map
                    .iter()
                    .rev()
                    .find(|(a, _)| a == head)
                    .map(|(_, b)| b.clone())
                    .unwrap_or_else(|| head.clone());
                Fet::Case {
                    head: head2,
                    args: args.iter().map(|a| a.rename(map, counter)).collect(),
                    answers: answers
                        .iter()
                        .map(|(n, q)| (*n, q.rename(map, counter)))
                        .collect(),
                }
            }
            Fet::Lam { binders, body } => {
                let mut new_binders = Vec::new();
                for (x, t) in binders {
                    *counter += 1;
                    let nx = format!("b{counter}");
                    map.push((x.clone(), nx.clone()));
                    new_binders.push((nx, t.clone()));
                }
                let body2 = body.rename(map, counter);
                for _ in binders {
                    map.pop();
                }
                Fet::Lam {
                    binders: new_binders,
                    body: Box::new(body2),
                }
            }
        }
    }

    /// Canonical bound-variable names (free names untouched), so trees
    /// compare up to alpha equivalence.
    pub fn alpha_normal(&self) -> Fet {
        self.rename(&mut Vec::new(), &mut 0)
    }

    fn structural_eq(a: &Fet, b: &Fet) -> bool {
        match (a, b) {
            (Fet::Omega, Fet::Omega) => true,
            (Fet::Num(m), Fet::Num(n)) => m == n,
            (
                Fet::Case {
                    head: h1,
                    args: a1,
                    answers: n1,
                },
                Fet::Case {
                    head: h2,
                    args: a2,
                    answers: n2,
                },
            ) => {
                h1 == h2
                    && a1.len() == a2.len()
                    && a1.iter().zip(a2).all(|(x, y)| Fet::structural_eq(x, y))
                    && n1.len() == n2.len()
                    && n1
                        .iter()
                        .zip(n2)
                        .all(|((k1, v1), (k2, v2))| k1 == k2 && Fet::structural_eq(v1, v2))
            }
            (
                Fet::Lam {
                    binders: b1,
                    body: t1,
                },
                Fet::Lam {
                    binders: b2,
                    body: t2,
                },
            ) => {
                b1.len() == b2.len()
                    && b1
                        .iter()
                        .zip(b2)
                        .all(|((x1, t1), (x2, t2))| x1 == x2 && t1 == t2)
                    && Fet::structural_eq(t1, t2)
            }
            _ => false,
        }
    }
}

impl PartialEq for Fet {
    fn eq(&self, other: &Self) -> bool {
        Fet::structural_eq(&self.alpha_normal(), &other.alpha_normal())
    }
}

impl Eq for Fet {}

impl fmt::Display for Fet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fet::Omega => write!(f, "Omega"),
            Fet::Num(n) => write!(f, "{n}"),
            Fet::Case {
                head,
                args,
                answers,
            } => {
                write!(f, "case({head}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, "; ")?;
                let mut first = true;
                for (n, q) in answers {
                    if !first {
                        write!(f, ", ")?;
                    }
                    first = false;
                    write!(f, "{n} -> {q}")?;
                }
                write!(f, ")")
            }
            Fet::Lam { binders, body } => {
                write!(f, "\\")?;
                for (i, (x, t)) in binders.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{x}:{t}")?;
                }
                write!(f, ". {body}")
            }
        }
    }
}

/// The syntactic approximation order: `p` is below `q` when `q` can be
/// obtained by replacing Omega nodes of `p` with trees.
pub fn fet_leq(p: &Fet, q: &Fet) -> bool {
    fn go(p: &Fet, q: &Fet) -> bool {
        match (p, q) {
            (Fet::Omega, _) => true,
            (Fet::Num(m), Fet::Num(n)) => m == n,
            (
                Fet::Case {
                    head: h1,
                    args: a1,
                    answers: n1,
                },
                Fet::Case {
                    head: h2,
                    args: a2,
                    answers: n2,
                },
            ) => {
                h1 == h2
                    && a1.len() == a2.len()
                    && a1.iter().zip(a2).all(|(x, y)| go(x, y))
                    && n1.iter().all(|(k, v)| match n2.get(k) {
                        Some(w) => go(v, w),
                        None => false,
                    })
            }
            (
                Fet::Lam {
                    binders: b1,
                    body: t1,
                },
                Fet::Lam {
                    binders: b2,
                    body: t2,
                },
            ) => {
                b1.len() == b2.len()
                    && b1
                        .iter()
                        .zip(b2)
                        .all(|((x1, t1), (x2, t2))| x1 == x2 && t1 == t2)
                    && go(t1, t2)
            }
            _ => false,
        }
    }
    go(&p.alpha_normal(), &q.alpha_normal())
}

/// Truncate a tree to depth k: at level k+1 the case arguments and the
/// answers 0..=k survive (recursively truncated at level k), everything else
/// collapses to Omega; at level 0 the whole body collapses.
pub fn q_k(k: u32, p: &Fet) -> Fet {
    let (binders, body) = match p {
        Fet::Lam { binders, body } => (binders.clone(), body.as_ref()),
        other => (Vec::new(), other),
    };
    let cut = if k == 0 {
        Fet::Omega
    } else {
        match body {
            Fet::Omega => Fet::Omega,
            Fet::Num(n) => Fet::Num(*n),
            Fet::Case {
                head,
                args,
                answers,
            } => Fet::case(
                head,
                args.iter().map(|a| q_k(k - 1, a)).collect(),
                answers
                    .iter()
                    .filter(|(n, _)| **n < k)
                    .map(|(n, q)| (*n, q_k(k - 1, q)))
                    .collect(),
            ),
            Fet::Lam { .. } => unreachable!("lam under lam is normalized away"),
        }
    };
    Fet::lam(binders, cut)
}

/// Turn a tree into a term: case nodes become the least `case_k` constant
/// that covers the answer support, absent answers become `Omega`.
pub fn fet_to_term(p: &Fet) -> Term {
    match p {
        Fet::Omega => Term::Omega(Type::Nat),
        Fet::Num(n) => Term::Num(*n),
        Fet::Case {
            head,
            args,
            answers,
        } => {
            let l = answers.keys().next_back().map_or(0, |m| m + 1);
            let scrut = Term::apps(Term::var(head), args.iter().map(fet_to_term));
            let branches = (0..l).map(|n| match answers.get(&n) {
                Some(q) => fet_to_term(q),
                None => Term::Omega(Type::Nat),
            });
            Term::apps(Term::CaseK(l), std::iter::once(scrut).chain(branches))
        }
        Fet::Lam { binders, body } => binders.iter().rev().fold(fet_to_term(body), |acc, (x, t)| {
            Term::lam(x, t.clone(), acc)
        }),
    }
}

/// Check that `p` is a well-formed tree of type `ty` under `env`: binder
/// lists match full arities, heads are in scope with fully applied ground
/// result, answers are ground trees.
pub fn fet_check(env: &[(String, Type)], p: &Fet, ty: &Type) -> Result<(), String> {
    match p {
        Fet::Lam { binders, body } => {
            let args = ty.arg_types();
            if binders.len() != args.len() {
                return Err(format!(
                    "binder list of length {} against type {ty}",
                    binders.len()
                ));
            }
            for ((_, bt), at) in binders.iter().zip(&args) {
                if bt != *at {
                    return Err(format!("binder type {bt} against argument type {at}"));
                }
            }
            let mut env2 = env.to_vec();
            env2.extend(binders.iter().cloned());
            fet_check(&env2, body, &Type::Nat)
        }
        _ if *ty != Type::Nat => Err(format!("ground tree `{p}` at function type {ty}")),
        Fet::Omega | Fet::Num(_) => Ok(()),
        Fet::Case {
            head,
            args,
            answers,
        } => {
            let ht = env
                .iter()
                .rev()
                .find(|(x, _)| x == head)
                .map(|(_, t)| t.clone())
                .ok_or_else(|| format!("unbound head `{head}`"))?;
            let expected = ht.arg_types();
            if args.len() != expected.len() {
                return Err(format!(
                    "head `{head}` takes {} arguments, given {}",
                    expected.len(),
                    args.len()
                ));
            }
            for (a, at) in args.iter().zip(&expected) {
                let wrapped: Type = (*at).clone();
                match a {
                    Fet::Lam { .. } => fet_check(env, a, &wrapped)?,
                    _ if wrapped == Type::Nat => fet_check(env, a, &Type::Nat)?,
                    _ => {
                        return Err(format!(
                            "argument `{a}` must be a lambda tree at type {wrapped}"
                        ))
                    }
                }
            }
            for q in answers.values() {
                fet_check(env, q, &Type::Nat)?;
            }
            Ok(())
        }
    }
}

/// Enumerate closed trees of the given type: case depth at most `depth`,
/// numerals and answer keys below `max_nat + 1`, answer maps supported on
/// `0..answer_keys`.
pub fn enumerate_fets(ty: &Type, depth: u32, max_nat: u32, answer_keys: u32) -> Vec<Fet> {
    let args = ty.arg_types();
    let binders: Vec<(String, Type)> = args
        .iter()
        .enumerate()
        .map(|(i, t)| (format!("x{}", i + 1), (*t).clone()))
        .collect();
    let bodies = enumerate_ground(&binders, depth, max_nat, answer_keys);
    bodies
        .into_iter()
        .map(|b| Fet::lam(binders.clone(), b))
        .collect()
}

fn enumerate_ground(
    env: &[(String, Type)],
    depth: u32,
    max_nat: u32,
    answer_keys: u32,
) -> Vec<Fet> {
    let mut out = vec![Fet::Omega];
    for n in 0..=max_nat {
        out.push(Fet::Num(n));
    }
    if depth == 0 {
        return out;
    }
    for (x, tx) in env {
        let arg_tys = tx.arg_types();
        let arg_choices: Vec<Vec<Fet>> = arg_tys
            .iter()
            .map(|at| {
                let inner_args = at.arg_types();
                let inner_binders: Vec<(String, Type)> = inner_args
                    .iter()
                    .enumerate()
                    .map(|(i, t)| (format!("y{}", i + 1), (*t).clone()))
                    .collect();
                let mut env2 = env.to_vec();
                env2.extend(inner_binders.iter().cloned());
                enumerate_ground(&env2, depth - 1, max_nat, answer_keys)
                    .into_iter()
                    .map(|b| Fet::lam(inner_binders.clone(), b))
                    .collect()
            })
            .collect();
        let answer_choices = enumerate_ground(env, depth - 1, max_nat, answer_keys);
        let arg_tuples = cartesian(&arg_choices);
        let answer_maps = answer_functions(answer_keys, &answer_choices);
        for args in &arg_tuples {
            for ans in &answer_maps {
                out.push(Fet::case(x, args.clone(), ans.clone()));
            }
        }
    }
    out
}

fn cartesian(choices: &[Vec<Fet>]) -> Vec<Vec<Fet>> {
    let mut acc: Vec<Vec<Fet>> = vec![Vec::new()];
    for c in choices {
        let mut next = Vec::new();
        for prefix in &acc {
            for item in c {
                let mut row = prefix.clone();
                row.push(item.clone());
                next.push(row);
            }
        }
        acc = next;
    }
    acc
}

fn answer_functions(keys: u32, choices: &[Fet]) -> Vec<BTreeMap<u32, Fet>> {
    let mut acc: Vec<BTreeMap<u32, Fet>> = vec![BTreeMap::new()];
    for k in 0..keys {
        let mut next = Vec::new();
        for prefix in &acc {
            let mut absent = prefix.clone();
            absent.remove(&k);
            next.push(absent);
            for c in choices {
                if matches!(c, Fet::Omega) {
                    continue;
                }
                let mut row = prefix.clone();
                row.insert(k, c.clone());
                next.push(row);
            }
        }
        acc = next;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n() -> Type {
        Type::Nat
    }

    fn nn() -> Type {
        Type::arrow(n(), n())
    }

    #[test]
    fn parse_and_print_round_trip() {
        let srcs = [
            "\\f:(N -> N) -> N. f (\\x:N. succ x)",
            "Y[N -> N] (\\f:N -> N. \\n:N. if0 n 0 (f (pred n)))",
            "case2 (succ 0) 40 41",
            "(\\x:N. x) 5",
            "Omega[N -> N] 3",
        ];
        for src in srcs {
            let t = parse(src).unwrap();
            let printed = t.to_string();
            assert_eq!(parse(&printed).unwrap(), t, "round trip for {src}");
        }
    }

    #[test]
    fn parse_application_is_left_associative() {
        let t = parse("f a b").unwrap();
        assert_eq!(
            t,
            Term::app(Term::app(Term::var("f"), Term::var("a")), Term::var("b"))
        );
    }

    #[test]
    fn parse_arrow_is_right_associative() {
        assert_eq!(
            parse_type("N -> N -> N").unwrap(),
            Type::arrow(n(), Type::arrow(n(), n()))
        );
        assert_eq!(
            parse_type("(N -> N) -> N").unwrap(),
            Type::arrow(nn(), n())
        );
    }

    #[test]
    fn parse_reports_line_and_column() {
        let err = parse("\\x:N\n x").unwrap_err();
        assert_eq!((err.line, err.col), (2, 2));
        let err = parse("succ @").unwrap_err();
        assert_eq!((err.line, err.col), (1, 6));
    }

    #[test]
    fn parse_case_forms() {
        assert_eq!(parse("case2").unwrap(), Term::CaseK(2));
        assert_eq!(parse("case 2").unwrap(), Term::CaseK(2));
        assert_eq!(parse("case0 x").unwrap(), Term::app(Term::CaseK(0), Term::var("x")));
        // `casey` is an ordinary identifier.
        assert_eq!(parse("casey").unwrap(), Term::var("casey"));
    }

    #[test]
    fn typecheck_constants() {
        let e: &[(String, Type)] = &[];
        assert_eq!(typecheck(e, &Term::Succ).unwrap(), nn());
        assert_eq!(
            typecheck(e, &Term::CaseK(2)).unwrap(),
            parse_type("N -> N -> N -> N").unwrap()
        );
        assert_eq!(
            typecheck(e, &Term::Y(nn())).unwrap(),
            parse_type("((N -> N) -> N -> N) -> N -> N").unwrap()
        );
        let loop_to_zero =
            parse("Y[N -> N] (\\f:N -> N. \\n:N. if0 n 0 (f (pred n))) 3").unwrap();
        assert_eq!(typecheck(e, &loop_to_zero).unwrap(), n());
    }

    #[test]
    fn typecheck_rejects_bad_application() {
        let t = parse("succ (\\x:N. x)").unwrap();
        let err = typecheck(&[], &t).unwrap_err();
        assert!(err.msg.contains("succ"), "{}", err.msg);
    }

    #[test]
    fn eval_arithmetic() {
        let run = |s: &str| eval_op(&parse(s).unwrap(), 1000);
        assert_eq!(run("succ (succ 0)"), Outcome::Answer(2));
        assert_eq!(run("pred 0"), Outcome::Answer(0));
        assert_eq!(run("pred (succ 5)"), Outcome::Answer(5));
        assert_eq!(run("if0 0 40 41"), Outcome::Answer(40));
        assert_eq!(run("if0 7 40 41"), Outcome::Answer(41));
        assert_eq!(run("case2 (succ 0) 40 41"), Outcome::Answer(41));
        assert_eq!(run("(\\x:N. succ x) 4"), Outcome::Answer(5));
    }

    #[test]
    fn eval_loop_to_zero() {
        let t = parse("Y[N -> N] (\\f:N -> N. \\n:N. if0 n 0 (f (pred n))) 3").unwrap();
        assert_eq!(eval_op(&t, 10_000), Outcome::Answer(0));
    }

    #[test]
    fn eval_case_out_of_range_is_stuck() {
        let t = parse("case2 5 40 41").unwrap();
        match eval_op(&t, 1000) {
            Outcome::Unresolved(r) => {
                assert!(r.stuck);
                assert!(r.steps_taken < 1000);
            }
            other => panic!("expected stuck, got {other:?}"),
        }
    }

    #[test]
    fn eval_omega_is_stuck_and_y_loop_exhausts_budget() {
        match eval_op(&Term::Omega(n()), 10) {
            Outcome::Unresolved(r) => assert!(r.stuck),
            other => panic!("expected stuck, got {other:?}"),
        }
        let t = parse("Y[N] (\\x:N. x)").unwrap();
        match eval_op(&t, 100) {
            Outcome::Unresolved(r) => {
                assert!(!r.stuck);
                assert_eq!(r.steps_taken, 100);
            }
            other => panic!("expected budget exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn step_preserves_types() {
        let mut t = parse("Y[N -> N] (\\f:N -> N. \\n:N. if0 n 0 (f (pred n))) 2").unwrap();
        for _ in 0..50 {
            assert_eq!(typecheck(&[], &t).unwrap(), n());
            match step(&t) {
                Some(next) => t = next,
                None => break,
            }
        }
        assert_eq!(t, Term::Num(0));
    }

    #[test]
    fn subst_avoids_capture() {
        // (\y. x y) with x := y must not capture.
        let body = Term::lam("y", n(), Term::app(Term::var("x"), Term::var("y")));
        let result = subst(&body, "x", &Term::var("y"));
        match &result {
            Term::Lam(b, _, inner) => {
                assert_ne!(b, "y");
                assert_eq!(**inner, Term::app(Term::var("y"), Term::var(b)));
            }
            other => panic!("unexpected shape {other:?}"),
        }
    }

    #[test]
    fn unfold_y_matches_native_recursion() {
        let src = "Y[N -> N] (\\f:N -> N. \\n:N. if0 n 0 (f (pred n))) 3";
        let t = parse(src).unwrap();
        let unfolded = unfold_y(&t, 5);
        assert!(!mentions_y(&unfolded));
        assert_eq!(typecheck(&[], &unfolded).unwrap(), n());
        assert_eq!(eval_op(&unfolded, 10_000), Outcome::Answer(0));
        // Too shallow an unfolding diverges instead of answering.
        let shallow = unfold_y(&t, 2);
        assert_eq!(eval_op(&shallow, 10_000).answer(), None);
    }

    fn ident_fet() -> Fet {
        // \x. case(x; 0 -> 0, 1 -> 1, 2 -> 2)
        Fet::lam(
            vec![("x".into(), n())],
            Fet::case(
                "x",
                vec![],
                (0..3).map(|i| (i, Fet::Num(i))).collect(),
            ),
        )
    }

    #[test]
    fn q_k_truncates_depth_and_answers() {
        let p = ident_fet();
        let omega = Fet::lam(vec![("x".into(), n())], Fet::Omega);
        let empty_case = Fet::lam(
            vec![("x".into(), n())],
            Fet::case("x", vec![], BTreeMap::new()),
        );
        let two = Fet::lam(
            vec![("x".into(), n())],
            Fet::case("x", vec![], (0..2).map(|i| (i, Fet::Num(i))).collect()),
        );
        assert_eq!(q_k(0, &p), omega);
        assert_eq!(q_k(1, &p), empty_case);
        assert_eq!(q_k(2, &p), two);
        assert_eq!(q_k(3, &p), p);
        assert_eq!(q_k(4, &p), p);
    }

    #[test]
    fn q_k_is_monotone_and_collapsing() {
        let p = ident_fet();
        for k in 0..5 {
            assert!(fet_leq(&q_k(k, &p), &q_k(k + 1, &p)));
            assert!(fet_leq(&q_k(k, &p), &p));
            assert_eq!(q_k(k, &q_k(k, &p)), q_k(k, &p));
            for l in k..5 {
                assert_eq!(q_k(k, &q_k(l, &p)), q_k(k, &p));
            }
        }
    }

    #[test]
    fn fet_equality_is_alpha_insensitive() {
        let a = Fet::lam(
            vec![("x".into(), n())],
            Fet::case("x", vec![], BTreeMap::new()),
        );
        let b = Fet::lam(
            vec![("z".into(), n())],
            Fet::case("z", vec![], BTreeMap::new()),
        );
        assert_eq!(a, b);
        // Free heads are compared by name.
        let fa = Fet::case("u", vec![], BTreeMap::new());
        let fb = Fet::case("v", vec![], BTreeMap::new());
        assert_ne!(fa, fb);
    }

    #[test]
    fn fet_leq_is_a_partial_order_on_samples() {
        let p = ident_fet();
        let samples: Vec<Fet> = (0..4).map(|k| q_k(k, &p)).collect();
        for a in &samples {
            assert!(fet_leq(a, a));
            for b in &samples {
                if fet_leq(a, b) && fet_leq(b, a) {
                    assert_eq!(a, b);
                }
                for c in &samples {
                    if fet_leq(a, b) && fet_leq(b, c) {
                        assert!(fet_leq(a, c));
                    }
                }
            }
        }
    }

    #[test]
    fn fet_to_term_uses_least_covering_case() {
        let p = ident_fet();
        let t = fet_to_term(&p);
        assert_eq!(t, parse("\\x:N. case3 x 0 1 2").unwrap());
        assert_eq!(typecheck(&[], &t).unwrap(), nn());
        assert_eq!(eval_op(&Term::app(t, Term::Num(1)), 100), Outcome::Answer(1));

        let gappy = Fet::lam(
            vec![("x".into(), n())],
            Fet::case("x", vec![], [(2u32, Fet::Num(9))].into_iter().collect()),
        );
        let t = fet_to_term(&gappy);
        assert_eq!(t, parse("\\x:N. case3 x Omega[N] Omega[N] 9").unwrap());

        let empty = q_k(1, &p);
        let t = fet_to_term(&empty);
        assert_eq!(t, parse("\\x:N. case0 x").unwrap());
        assert_eq!(eval_op(&Term::app(t, Term::Num(1)), 100).answer(), None);
    }

    #[test]
    fn fet_check_accepts_generated_trees() {
        let ty = parse_type("(N -> N) -> N").unwrap();
        let trees = enumerate_fets(&ty, 1, 1, 2);
        assert!(!trees.is_empty());
        for p in &trees {
            fet_check(&[], p, &ty).unwrap();
            let t = fet_to_term(p);
            assert_eq!(typecheck(&[], &t).unwrap(), ty);
        }
    }

    #[test]
    fn enumerate_fets_ground_counts() {
        // Ground type, depth irrelevant: Omega plus numerals 0..=2.
        let trees = enumerate_fets(&n(), 3, 2, 2);
        assert_eq!(trees.len(), 4);
        // One N binder, depth 1, numerals 0..=1, keys 0..2:
        // bodies are Omega, 0, 1, or case(x; f) with f: {0,1} -> {absent,0,1}.
        let trees = enumerate_fets(&nn(), 1, 1, 2);
        assert_eq!(trees.len(), 3 + 9);
    }

    #[test]
    fn fet_display_is_readable() {
        assert_eq!(
            ident_fet().to_string(),
            "\\x:N. case(x; 0 -> 0, 1 -> 1, 2 -> 2)"
        );
    }
}
