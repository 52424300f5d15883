//! Observing strategies and terms: convergence probes through the
//! one-answer game, test-suite approximations of the intrinsic preorder,
//! applicative-context comparison of closed terms, and adequacy runs over
//! annotated corpora. Divergence is never certified, only reported as
//! consistent with the configured budgets; separations come with witnesses
//! that replay.

use serde::{Deserialize, Serialize};

use crate::combinators as c;
use crate::decomposition::type_of_game;
use crate::denotation::{run_game, Fuel};
use crate::game_core::{Base, Bounds, GameExpr, Move, Tag};
use crate::pcf_lang::{
    enumerate_fets, eval_op, fet_to_term, parse, typecheck, Outcome, Term, Type,
};
use crate::strategy::{decode, exhaustion_count, Strategy, StrategyCode};

/// A named family of convergence tests, each a strategy on some `A -o Sigma`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TestSuite {
    pub tests: Vec<TestCase>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TestCase {
    pub description: String,
    pub code: StrategyCode,
}

impl TestSuite {
    /// Every test must decode to a strategy into the one-answer game.
    pub fn validate(&self) -> Result<(), String> {
        for tc in &self.tests {
            let alpha = decode(&tc.code).map_err(|e| format!("`{}`: {e}", tc.description))?;
            match alpha.game() {
                GameExpr::Lolli(_, r) if **r == GameExpr::Sigma => {}
                g => {
                    return Err(format!(
                        "`{}` plays on {g}, not into the one-answer game",
                        tc.description
                    ))
                }
            }
        }
        Ok(())
    }
}

/// How a convergence probe ended. A silent probe that did not exhaust the
/// step budget is definitive at these bounds; one that did is not.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Convergence {
    pub converges: bool,
    pub budget_hit: bool,
}

/// What separated two subjects, with the outcomes on both sides. Either a
/// suite test (replay by decoding the code and probing again) or an
/// applicative context (replay by evaluating both applications).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Test {
        description: String,
        code: StrategyCode,
        left: Convergence,
        right: Convergence,
    },
    Context {
        args: Vec<String>,
        left_answer: u32,
        right_answer: Option<u32>,
    },
}

/// Outcome of a bounded comparison.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Leq,
    NotLeq { witness: Witness },
    Inconclusive { reason: String },
}

impl Verdict {
    pub fn is_leq(&self) -> bool {
        matches!(self, Verdict::Leq)
    }

    pub fn is_not_leq(&self) -> bool {
        matches!(self, Verdict::NotLeq { .. })
    }
}

/// Probe `x` through the test `alpha`: compose and ask the one-answer
/// question, with `b.max_steps` bounding the hidden dialogue.
pub fn sierpinski_run(alpha: &Strategy, x: &Strategy, b: &Bounds) -> Convergence {
    match alpha.game() {
        GameExpr::Lolli(l, r) if **l == *x.game() && **r == GameExpr::Sigma => {}
        g => panic!("a convergence test on {} cannot probe {}", g, x.game()),
    }
    let composite = c::compose(&c::point(x), alpha, b.max_steps);
    let before = exhaustion_count();
    let resp = composite.next_move(&Move::q(vec![Tag::R]));
    Convergence {
        converges: resp == Some(Move::ans(vec![Tag::R], 0)),
        budget_hit: exhaustion_count() > before,
    }
}

/// The applicative test `f := does f P1 ... Pk answer n?` on a subject of
/// type `T1 -> ... -> Tk -> N`: interrogate the subject's result, feed every
/// argument session from the supplied closed strategies, and convert the
/// answer `n` into the one-answer token. The `args` play on `!I -o [Tj]`.
pub fn apply_then_observe(args: &[Strategy], n: u32) -> Result<Strategy, String> {
    let mut subject_ty = Type::Nat;
    for a in args.iter().rev() {
        let t = match a.game() {
            GameExpr::Lolli(l, r) if **l == GameExpr::bang(GameExpr::I) => type_of_game(r),
            _ => None,
        };
        let Some(t) = t else {
            return Err(format!("not a closed argument strategy: {}", a.game()));
        };
        subject_ty = Type::arrow(t, subject_ty);
    }
    let k = args.len();
    let game = GameExpr::lolli(
        crate::game_core::game_of_type(&subject_ty),
        GameExpr::Sigma,
    );
    let mut result_q = vec![Tag::L];
    result_q.extend(std::iter::repeat(Tag::R).take(k));
    let args = args.to_vec();
    let name = format!("obs{n}/{k}");
    Ok(Strategy::from_fn(game, name, move |m| {
        if *m == Move::q(vec![Tag::R]) {
            return Some(Move::q(result_q.clone()));
        }
        if m.path == result_q {
            return match m.base {
                Base::Ans(v) if v == n => Some(Move::ans(vec![Tag::R], 0)),
                _ => None,
            };
        }
        let rest = m.strip(Tag::L)?;
        let j = rest.path.iter().take_while(|t| **t == Tag::R).count();
        let tail = &rest.path[j..];
        let (Some(Tag::L), Some(Tag::Idx(session))) = (tail.first(), tail.get(1)) else {
            return None;
        };
        if j >= args.len() {
            return None;
        }
        let inner = Move {
            path: tail[2..].to_vec(),
            base: m.base,
        };
        let resp = args[j].next_move(&inner.under(&[Tag::R]))?;
        let back = resp.strip(Tag::R)?;
        let mut prefix = vec![Tag::L];
        prefix.extend(std::iter::repeat(Tag::R).take(j));
        prefix.push(Tag::L);
        prefix.push(Tag::Idx(*session));
        Some(back.under(&prefix))
    }))
}

fn cartesian<T: Clone>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for c in choices {
        out = out
            .iter()
            .flat_map(|tuple| {
                c.iter().map(move |x| {
                    let mut t = tuple.clone();
                    t.push(x.clone());
                    t
                })
            })
            .collect();
    }
    out
}

fn argument_terms(tys: &[&Type], d: u32, b: &Bounds) -> Vec<Vec<Term>> {
    let per_arg: Vec<Vec<Term>> = tys
        .iter()
        .map(|t| {
            enumerate_fets(t, d, b.max_nat, d)
                .iter()
                .map(fet_to_term)
                .collect()
        })
        .collect();
    cartesian(&per_arg)
}

/// Tests for a subject of type `ty`: every application to tuples of closed
/// tree-generated arguments of depth at most `d`, observed at every answer
/// up to `b.max_nat`.
pub fn default_suite(ty: &Type, d: u32, b: &Bounds) -> TestSuite {
    let fuel = Fuel::default().y_depth;
    let mut tests = Vec::new();
    for tuple in argument_terms(&ty.arg_types(), d, b) {
        let sources: Vec<String> = tuple.iter().map(Term::to_string).collect();
        let codes: Vec<StrategyCode> = sources
            .iter()
            .map(|term| StrategyCode::Denotation {
                term: term.clone(),
                fuel,
            })
            .collect();
        for n in 0..=b.max_nat {
            tests.push(TestCase {
                description: format!("[_] {} = {n}?", sources.join(" ")),
                code: StrategyCode::comb(format!("observe:{n}"), codes.clone()),
            });
        }
    }
    TestSuite { tests }
}

/// Run every suite test against both subjects. A separation needs the left
/// probe to converge and the right to stay silent without running out of
/// budget; budget-limited tests make the verdict inconclusive unless some
/// other test separates definitively.
pub fn intrinsic_leq_approx(x: &Strategy, y: &Strategy, suite: &TestSuite, b: &Bounds) -> Verdict {
    assert_eq!(x.game(), y.game(), "compared strategies play different games");
    let mut limited: Option<String> = None;
    for tc in &suite.tests {
        let alpha = match decode(&tc.code) {
            Ok(a) => a,
            Err(e) => {
                return Verdict::Inconclusive {
                    reason: format!("test `{}` failed to decode: {e}", tc.description),
                }
            }
        };
        let left = sierpinski_run(&alpha, x, b);
        let right = sierpinski_run(&alpha, y, b);
        if left.converges && !right.converges && !right.budget_hit {
            return Verdict::NotLeq {
                witness: Witness::Test {
                    description: tc.description.clone(),
                    code: tc.code.clone(),
                    left,
                    right,
                },
            };
        }
        let settled = right.converges || (!left.converges && !left.budget_hit);
        if !settled {
            limited.get_or_insert_with(|| {
                format!(
                    "`{}` ran out of budget ({} steps)",
                    tc.description, b.max_steps
                )
            });
        }
    }
    match limited {
        Some(reason) => Verdict::Inconclusive { reason },
        None => Verdict::Leq,
    }
}

fn compare_with(
    m: &Term,
    n: &Term,
    d: u32,
    b: &Bounds,
    eval: impl Fn(&Term) -> Outcome,
) -> Result<Verdict, String> {
    let tm = typecheck(&[], m).map_err(|e| e.to_string())?;
    let tn = typecheck(&[], n).map_err(|e| e.to_string())?;
    if tm != tn {
        return Err(format!("compared terms at different types {tm} and {tn}"));
    }
    let mut limited: Option<String> = None;
    for tuple in argument_terms(&tm.arg_types(), d, b) {
        let left = eval(&Term::apps(m.clone(), tuple.clone()));
        let right = eval(&Term::apps(n.clone(), tuple.clone()));
        let args: Vec<String> = tuple.iter().map(Term::to_string).collect();
        match (&left, &right) {
            (Outcome::Answer(a), Outcome::Answer(v)) if a != v => {
                return Ok(Verdict::NotLeq {
                    witness: Witness::Context {
                        args,
                        left_answer: *a,
                        right_answer: Some(*v),
                    },
                });
            }
            (Outcome::Answer(a), Outcome::Unresolved(r)) => {
                if r.stuck {
                    return Ok(Verdict::NotLeq {
                        witness: Witness::Context {
                            args,
                            left_answer: *a,
                            right_answer: None,
                        },
                    });
                }
                limited.get_or_insert_with(|| {
                    format!(
                        "left answers {a} on [{}] and the right ran out of budget",
                        args.join(", ")
                    )
                });
            }
            (Outcome::Unresolved(r), _) if !r.stuck => {
                limited.get_or_insert_with(|| {
                    format!("left ran out of budget on [{}]", args.join(", "))
                });
            }
            _ => {}
        }
    }
    Ok(match limited {
        Some(reason) => Verdict::Inconclusive { reason },
        None => Verdict::Leq,
    })
}

/// Compare closed terms over every applicative context built from closed
/// tree-generated arguments of depth at most `d`, evaluating by head
/// reduction. A separation needs a left answer with a definitive different
/// outcome on the right.
pub fn obs_compare(m: &Term, n: &Term, d: u32, _fuel: Fuel, b: &Bounds) -> Result<Verdict, String> {
    compare_with(m, n, d, b, |t| eval_op(t, b.max_steps))
}

/// The same comparison evaluated through the game model, for cross-checking
/// the operational route.
pub fn obs_compare_game(
    m: &Term,
    n: &Term,
    d: u32,
    fuel: Fuel,
    b: &Bounds,
) -> Result<Verdict, String> {
    compare_with(m, n, d, b, |t| run_game(t, fuel))
}

/// Corpus annotation: what a closed ground program is expected to do.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ExpectWire", into = "ExpectWire")]
pub enum Expect {
    Answer(u32),
    Diverges,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum ExpectWire {
    Answer { answer: u32 },
    Word(String),
}

impl From<Expect> for ExpectWire {
    fn from(e: Expect) -> ExpectWire {
        match e {
            Expect::Answer(n) => ExpectWire::Answer { answer: n },
            Expect::Diverges => ExpectWire::Word("diverges".into()),
        }
    }
}

impl TryFrom<ExpectWire> for Expect {
    type Error = String;

    fn try_from(w: ExpectWire) -> Result<Expect, String> {
        match w {
            ExpectWire::Answer { answer } => Ok(Expect::Answer(answer)),
            ExpectWire::Word(w) if w == "diverges" => Ok(Expect::Diverges),
            ExpectWire::Word(w) => Err(format!("unknown expectation `{w}`")),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorpusCase {
    pub term: String,
    pub expect: Expect,
}

/// Parse a corpus: one JSON object per non-empty line.
pub fn parse_corpus(src: &str) -> Result<Vec<CorpusCase>, String> {
    src.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| format!("corpus line {}: {e}", i + 1)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseStatus {
    Pass,
    Consistent,
    Mismatch,
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseReport {
    pub term: String,
    pub expect: Expect,
    pub status: CaseStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operational: Option<Outcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub denotational: Option<Outcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdequacyReport {
    pub passed: usize,
    pub consistent: usize,
    pub failed: usize,
    pub cases: Vec<CaseReport>,
}

impl AdequacyReport {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

fn check_case(case: &CorpusCase, fuel: Fuel, b: &Bounds) -> CaseReport {
    let mut report = CaseReport {
        term: case.term.clone(),
        expect: case.expect,
        status: CaseStatus::Mismatch,
        operational: None,
        denotational: None,
        detail: None,
    };
    let t = match parse(&case.term) {
        Ok(t) => t,
        Err(e) => {
            report.detail = Some(format!("parse error: {e}"));
            return report;
        }
    };
    match typecheck(&[], &t) {
        Ok(Type::Nat) => {}
        Ok(ty) => {
            report.detail = Some(format!("corpus programs must be ground, got {ty}"));
            return report;
        }
        Err(e) => {
            report.detail = Some(format!("type error: {e}"));
            return report;
        }
    }
    let op = eval_op(&t, b.max_steps);
    let saved = c::step_budget();
    c::set_step_budget(b.max_steps);
    let den = run_game(&t, fuel);
    c::set_step_budget(saved);
    report.operational = Some(op.clone());
    report.denotational = Some(den.clone());
    match case.expect {
        Expect::Answer(n) => {
            if op.answer() == Some(n) && den.answer() == Some(n) {
                report.status = CaseStatus::Pass;
            } else {
                report.detail = Some(format!(
                    "expected {n}, head reduction gave {:?}, the game gave {:?}",
                    op.answer(),
                    den.answer()
                ));
            }
        }
        Expect::Diverges => {
            if op.answer().is_none() && den.answer().is_none() {
                report.status = CaseStatus::Consistent;
            } else {
                report.detail = Some(format!(
                    "expected divergence, head reduction gave {:?}, the game gave {:?}",
                    op.answer(),
                    den.answer()
                ));
            }
        }
    }
    report
}

/// Evaluate every corpus program along the operational and the game route
/// and compare against its annotation. Expected answers must be reproduced
/// by both routes; expected divergence is reported as consistent when both
/// routes stay unresolved at the configured budgets.
pub fn adequacy_check(corpus: &[CorpusCase], fuel: Fuel, b: &Bounds) -> AdequacyReport {
    let cases: Vec<CaseReport> = corpus.iter().map(|c| check_case(c, fuel, b)).collect();
    let passed = cases.iter().filter(|c| c.status == CaseStatus::Pass).count();
    let consistent = cases
        .iter()
        .filter(|c| c.status == CaseStatus::Consistent)
        .count();
    let failed = cases.len() - passed - consistent;
    AdequacyReport {
        passed,
        consistent,
        failed,
        cases,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::denotation::denote_closed;
    use crate::strategy::{strat_equiv, strat_subeq};

    fn bounds() -> Bounds {
        Bounds {
            max_nat: 3,
            max_index: 1,
            max_len: 10,
            max_steps: 100_000,
        }
    }

    fn den(src: &str) -> Strategy {
        denote_closed(&parse(src).unwrap(), Fuel::default())
    }

    fn subject(src: &str) -> Strategy {
        c::strip_unit_context(&den(src)).unwrap()
    }

    fn ground_test(n: u32) -> Strategy {
        apply_then_observe(&[], n).unwrap()
    }

    #[test]
    fn tests_that_ignore_the_subject_converge_on_bottom() {
        let always = Strategy::from_fn(
            GameExpr::lolli(GameExpr::Nat, GameExpr::Sigma),
            "top",
            |m| {
                if *m == Move::q(vec![Tag::R]) {
                    Some(Move::ans(vec![Tag::R], 0))
                } else {
                    None
                }
            },
        );
        let run = sierpinski_run(&always, &c::bottom(GameExpr::Nat), &bounds());
        assert!(run.converges);
        assert!(!run.budget_hit);
    }

    #[test]
    fn probing_tests_stall_on_bottom_definitively() {
        let run = sierpinski_run(&ground_test(0), &c::bottom(GameExpr::Nat), &bounds());
        assert!(!run.converges);
        assert!(!run.budget_hit);
    }

    #[test]
    fn ground_observers_recognize_their_numeral() {
        assert!(sierpinski_run(&ground_test(0), &c::numeral(0), &bounds()).converges);
        assert!(!sierpinski_run(&ground_test(0), &c::numeral(1), &bounds()).converges);
        assert!(sierpinski_run(&ground_test(3), &c::numeral(3), &bounds()).converges);
    }

    #[test]
    fn applicative_tests_run_their_arguments() {
        let alpha = apply_then_observe(&[den("2")], 3).unwrap();
        assert!(sierpinski_run(&alpha, &subject("\\x:N. succ x"), &bounds()).converges);
        assert!(!sierpinski_run(&alpha, &subject("\\x:N. x"), &bounds()).converges);
        assert!(!sierpinski_run(&alpha, &subject("\\x:N. Omega[N]"), &bounds()).converges);
        let twice = apply_then_observe(&[den("\\x:N. succ x"), den("1")], 3).unwrap();
        assert!(sierpinski_run(&twice, &subject("\\f:N -> N. \\x:N. f (f x)"), &bounds()).converges);
    }

    #[test]
    fn default_suites_validate_and_cover_ground_observers() {
        let b = bounds();
        let suite = default_suite(&Type::Nat, 1, &b);
        suite.validate().unwrap();
        assert_eq!(suite.tests.len() as u32, b.max_nat + 1);
        let fun = default_suite(&Type::arrow(Type::Nat, Type::Nat), 1, &b);
        fun.validate().unwrap();
        assert!(fun.tests.len() > suite.tests.len());
    }

    #[test]
    fn bottom_is_below_everything() {
        let b = bounds();
        let suite = default_suite(&Type::Nat, 1, &b);
        let verdict = intrinsic_leq_approx(&c::bottom(GameExpr::Nat), &c::numeral(3), &suite, &b);
        assert!(verdict.is_leq());
    }

    #[test]
    fn distinct_numerals_separate_with_a_replayable_witness() {
        let b = bounds();
        let suite = default_suite(&Type::Nat, 1, &b);
        let x = c::numeral(2);
        let y = c::numeral(3);
        let verdict = intrinsic_leq_approx(&x, &y, &suite, &b);
        let Verdict::NotLeq {
            witness:
                Witness::Test {
                    description, code, ..
                },
        } = verdict
        else {
            panic!("expected a separation");
        };
        assert!(description.contains("= 2?"));
        let alpha = decode(&code).unwrap();
        assert!(sierpinski_run(&alpha, &x, &b).converges);
        assert!(!sierpinski_run(&alpha, &y, &b).converges);
    }

    #[test]
    fn bounded_inclusion_implies_suite_inclusion() {
        let b = bounds();
        let suite = default_suite(&Type::Nat, 1, &b);
        let pairs = [
            (c::bottom(GameExpr::Nat), c::numeral(2)),
            (c::numeral(2), c::numeral(2)),
        ];
        for (x, y) in &pairs {
            assert!(strat_subeq(x, y, &b));
            assert!(intrinsic_leq_approx(x, y, &suite, &b).is_leq());
        }
    }

    #[test]
    fn ground_suite_coincides_with_strategy_inclusion() {
        let b = bounds();
        let suite = default_suite(&Type::Nat, 1, &b);
        let mut points = vec![c::bottom(GameExpr::Nat)];
        for n in 0..=b.max_nat {
            points.push(c::numeral(n));
        }
        for x in &points {
            for y in &points {
                assert_eq!(
                    intrinsic_leq_approx(x, y, &suite, &b).is_leq(),
                    strat_subeq(x, y, &b),
                    "suite and inclusion disagree on {} vs {}",
                    x.name(),
                    y.name()
                );
            }
        }
    }

    #[test]
    fn function_suites_order_truncations() {
        let b = bounds();
        let ty = Type::arrow(Type::Nat, Type::Nat);
        let suite = default_suite(&ty, 1, &b);
        let cut = subject("\\x:N. case2 x 1 2");
        let succ = subject("\\x:N. succ x");
        assert!(intrinsic_leq_approx(&cut, &succ, &suite, &b).is_leq());
        let back = intrinsic_leq_approx(&succ, &cut, &suite, &b);
        assert!(back.is_not_leq(), "succ escapes its truncation at 2");
    }

    #[test]
    fn comparison_is_reflexive() {
        let m = parse("\\x:N. succ x").unwrap();
        let v = obs_compare(&m, &m, 1, Fuel::default(), &bounds()).unwrap();
        assert!(v.is_leq());
    }

    #[test]
    fn strictness_separates_with_an_omega_context() {
        let b = bounds();
        let m = parse("\\x:N. 0").unwrap();
        let n = parse("\\x:N. if0 x 0 0").unwrap();
        let v = obs_compare(&m, &n, 1, Fuel::default(), &b).unwrap();
        let Verdict::NotLeq {
            witness:
                Witness::Context {
                    args,
                    left_answer,
                    right_answer,
                },
        } = v
        else {
            panic!("expected a separating context");
        };
        assert_eq!(args, vec!["Omega[N]".to_string()]);
        assert_eq!(left_answer, 0);
        assert_eq!(right_answer, None);
        let with_args = Term::apps(parse("\\x:N. if0 x 0 0").unwrap(), [parse(&args[0]).unwrap()]);
        assert_eq!(eval_op(&with_args, b.max_steps).answer(), None);
        assert!(obs_compare(&n, &m, 1, Fuel::default(), &b).unwrap().is_leq());
    }

    #[test]
    fn case_reading_matches_its_conditional_encoding() {
        let b = bounds();
        let m = parse("\\x:N. case1 x 5").unwrap();
        let n = parse("\\x:N. if0 x 5 Omega[N]").unwrap();
        assert!(obs_compare(&m, &n, 1, Fuel::default(), &b).unwrap().is_leq());
        assert!(obs_compare(&n, &m, 1, Fuel::default(), &b).unwrap().is_leq());
        let dm = den("\\x:N. case1 x 5");
        let dn = den("\\x:N. if0 x 5 Omega[N]");
        assert!(strat_equiv(&dm, &dn, &b));
    }

    #[test]
    fn game_route_agrees_with_head_reduction() {
        let b = bounds();
        let pairs = [
            ("\\x:N. 0", "\\x:N. if0 x 0 0"),
            ("\\x:N. case1 x 5", "\\x:N. if0 x 5 Omega[N]"),
        ];
        for (ms, ns) in &pairs {
            let m = parse(ms).unwrap();
            let n = parse(ns).unwrap();
            let op = obs_compare(&m, &n, 1, Fuel::default(), &b).unwrap();
            let game = obs_compare_game(&m, &n, 1, Fuel::default(), &b).unwrap();
            assert_eq!(op.is_leq(), game.is_leq(), "routes disagree on {ms} vs {ns}");
            assert_eq!(op.is_not_leq(), game.is_not_leq());
        }
    }

    #[test]
    fn observer_tests_factor_through_application() {
        let b = bounds();
        for (h, p, n) in [
            ("\\x:N. succ x", "2", 3),
            ("\\x:N. succ x", "0", 3),
            ("\\x:N. 1", "Omega[N]", 1),
        ] {
            let gamma = apply_then_observe(&[den(p)], n).unwrap();
            let direct = sierpinski_run(&gamma, &subject(h), &b).converges;
            let applied = Term::apps(parse(h).unwrap(), [parse(p).unwrap()]);
            assert_eq!(
                direct,
                eval_op(&applied, b.max_steps).answer() == Some(n),
                "observer and application disagree on ({h}) {p} = {n}"
            );
        }
    }

    #[test]
    fn corpus_lines_round_trip() {
        let src = r#"{"term": "succ 0", "expect": {"answer": 1}}
{"term": "Omega[N]", "expect": "diverges"}"#;
        let corpus = parse_corpus(src).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus[0].expect, Expect::Answer(1));
        assert_eq!(corpus[1].expect, Expect::Diverges);
        let line = serde_json::to_string(&corpus[1]).unwrap();
        assert!(line.contains("\"diverges\""));
        assert!(parse_corpus("{\"term\": \"0\", \"expect\": \"explodes\"}").is_err());
    }

    #[test]
    fn adequacy_passes_and_stays_consistent() {
        let corpus = parse_corpus(
            r#"{"term": "succ 0", "expect": {"answer": 1}}
{"term": "(\\x:N. 3) Omega[N]", "expect": {"answer": 3}}
{"term": "Omega[N]", "expect": "diverges"}
{"term": "Y[N -> N] (\\f:N -> N. f) 0", "expect": "diverges"}"#,
        )
        .unwrap();
        let report = adequacy_check(&corpus, Fuel { y_depth: 4 }, &bounds());
        assert!(report.ok(), "unexpected failures: {:?}", report.cases);
        assert_eq!(report.passed, 2);
        assert_eq!(report.consistent, 2);
    }

    #[test]
    fn adequacy_reports_annotation_mismatches() {
        let corpus = vec![CorpusCase {
            term: "succ 0".into(),
            expect: Expect::Answer(2),
        }];
        let report = adequacy_check(&corpus, Fuel::default(), &bounds());
        assert_eq!(report.failed, 1);
        assert!(!report.ok());
        assert!(report.cases[0].detail.as_ref().unwrap().contains("expected 2"));
    }
}
