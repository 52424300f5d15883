//! Command-line front end for the gamepcf library.
//!
//! Every subcommand reads UTF-8 PCF surface syntax from a file, does one
//! library call, and prints either human-readable text or, under `--json`,
//! a machine-readable object. Exit codes: 0 for success (a program answered,
//! a comparison found Leq both ways, all laws passed), 1 for a negative
//! verdict (unresolved run, separation found, law failure), 2 for usage,
//! parse, or type errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use gamepcf::combinators::set_step_budget;
use gamepcf::decomposition::{decomp_tree, e_k, Decomp, DecompTree};
use gamepcf::denotation::{denote_closed, run_game, Fuel};
use gamepcf::game_core::{Base, Bounds, Move, Tag};
use gamepcf::laws::{run_all, LawReport};
use gamepcf::observation::{obs_compare, Verdict, Witness};
use gamepcf::pcf_lang::{eval_op, fet_to_term, parse, typecheck, BudgetReport, Outcome, Term, Type};
use gamepcf::strategy::PlayDriver;

#[derive(Parser)]
#[command(name = "gpcf", version, about = "Run, trace, decompose and compare PCF programs through their game semantics")]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Backend {
    /// Head reduction on the term.
    Op,
    /// Compile to a strategy and play it.
    Game,
    /// Compile, then read the answer off the head decomposition.
    Decomp,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a program and echo the term.
    Parse { file: PathBuf },
    /// Typecheck a program and print its type.
    Check { file: PathBuf },
    /// Evaluate a closed ground program.
    Run {
        /// Evaluation route.
        #[arg(long, value_enum, default_value_t = Backend::Game)]
        backend: Backend,
        /// Recursion unfolding depth for the compiled routes.
        #[arg(long, default_value_t = 32)]
        fuel: u32,
        /// Step budget for reduction and for hidden dialogue.
        #[arg(long, default_value_t = 100_000)]
        steps: u64,
        file: PathBuf,
    },
    /// Print the full play of a ground run, one move per line.
    Trace { file: PathBuf },
    /// Print the head decomposition of a denotation as a tree.
    Decompose {
        /// How many head analyses deep to unfold.
        #[arg(long, default_value_t = 3)]
        depth: u32,
        file: PathBuf,
    },
    /// Read a denotation back as a finite evaluation tree term.
    Readback {
        /// Readback depth: case width and nesting both stop here.
        #[arg(long, default_value_t = 3)]
        depth: u32,
        file: PathBuf,
    },
    /// Compare two programs observationally, both directions.
    Compare {
        /// Context depth for the generated tests.
        #[arg(long, default_value_t = 3)]
        depth: u32,
        file1: PathBuf,
        file2: PathBuf,
    },
    /// Run the categorical, comonad, comonoid, bang and decomposition law suites.
    Laws {
        /// Seed for the strategy and tree generators.
        #[arg(long, default_value_t = 2026)]
        seed: u64,
        /// Iterations per suite.
        #[arg(long, default_value_t = 60)]
        cases: usize,
    },
}

/// Print one output line, ending the process quietly if the reader on the
/// other side of a pipe has gone away.
fn emit(text: impl std::fmt::Display) {
    use std::io::Write;
    if writeln!(std::io::stdout(), "{text}").is_err() {
        std::process::exit(0);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = std::thread::Builder::new()
        .stack_size(512 * 1024 * 1024)
        .spawn(move || dispatch(&cli))
        .expect("spawn worker thread")
        .join()
        .expect("worker thread panicked");
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<u8, String> {
    match &cli.cmd {
        Cmd::Parse { file } => cmd_parse(cli.json, file),
        Cmd::Check { file } => cmd_check(cli.json, file),
        Cmd::Run {
            backend,
            fuel,
            steps,
            file,
        } => cmd_run(cli.json, *backend, *fuel, *steps, file),
        Cmd::Trace { file } => cmd_trace(cli.json, file),
        Cmd::Decompose { depth, file } => cmd_decompose(cli.json, *depth, file),
        Cmd::Readback { depth, file } => cmd_readback(cli.json, *depth, file),
        Cmd::Compare {
            depth,
            file1,
            file2,
        } => cmd_compare(cli.json, *depth, file1, file2),
        Cmd::Laws { seed, cases } => cmd_laws(cli.json, *seed, *cases),
    }
}

fn load(file: &PathBuf) -> Result<Term, String> {
    let src = std::fs::read_to_string(file).map_err(|e| format!("{}: {e}", file.display()))?;
    parse(&src).map_err(|e| format!("{}: {e}", file.display()))
}

fn load_typed(file: &PathBuf) -> Result<(Term, Type), String> {
    let t = load(file)?;
    let ty = typecheck(&[], &t).map_err(|e| format!("{}: {e}", file.display()))?;
    Ok((t, ty))
}

fn load_ground(file: &PathBuf) -> Result<Term, String> {
    let (t, ty) = load_typed(file)?;
    if ty != Type::Nat {
        return Err(format!("{}: expected a ground program, got {ty}", file.display()));
    }
    Ok(t)
}

fn cmd_parse(json: bool, file: &PathBuf) -> Result<u8, String> {
    let t = load(file)?;
    if json {
        emit(json!({ "term": t.to_string() }));
    } else {
        emit(t);
    }
    Ok(0)
}

fn cmd_check(json: bool, file: &PathBuf) -> Result<u8, String> {
    let (t, ty) = load_typed(file)?;
    if json {
        emit(json!({ "term": t.to_string(), "type": ty.to_string() }));
    } else {
        emit(ty);
    }
    Ok(0)
}

/// Iterative deepening schedule shared by the compiled backends.
fn ladder(max: u32) -> Vec<u32> {
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

fn run_decomp(t: &Term, fuel: u32, steps: u64) -> Outcome {
    let mut tried = Vec::new();
    for d in ladder(fuel) {
        tried.push(d);
        let s = denote_closed(t, Fuel { y_depth: d });
        if let Ok(Decomp::Const(n)) = gamepcf::decomposition::phi(&s) {
            return Outcome::Answer(n);
        }
    }
    Outcome::Unresolved(BudgetReport {
        steps_taken: 0,
        step_budget: steps,
        stuck: false,
        y_depths_tried: tried,
    })
}

fn cmd_run(json: bool, backend: Backend, fuel: u32, steps: u64, file: &PathBuf) -> Result<u8, String> {
    let t = load_ground(file)?;
    set_step_budget(steps);
    let outcome = match backend {
        Backend::Op => eval_op(&t, steps),
        Backend::Game => run_game(&t, Fuel { y_depth: fuel }),
        Backend::Decomp => run_decomp(&t, fuel, steps),
    };
    match outcome {
        Outcome::Answer(n) => {
            if json {
                emit(json!({ "outcome": "answer", "value": n }));
            } else {
                emit(n);
            }
            Ok(0)
        }
        Outcome::Unresolved(report) => {
            if json {
                emit(json!({ "outcome": "unresolved", "report": report }));
            } else {
                emit(format!(
                    "unresolved (budget {} steps, recursion depths {:?})",
                    report.step_budget, report.y_depths_tried
                ));
            }
            Ok(1)
        }
    }
}

fn cmd_trace(json: bool, file: &PathBuf) -> Result<u8, String> {
    let t = load_ground(file)?;
    let opening = Move::q(vec![Tag::R]);
    let mut last_play = vec![opening.clone()];
    for d in ladder(Fuel::default().y_depth) {
        let mut driver = PlayDriver::new(denote_closed(&t, Fuel { y_depth: d }));
        let response = driver.feed(opening.clone())?;
        last_play = driver.play().clone();
        if let Some(m) = response {
            if matches!((m.path.as_slice(), m.base), (&[Tag::R], Base::Ans(_))) {
                print_play(json, &last_play);
                return Ok(0);
            }
        }
    }
    print_play(json, &last_play);
    if !json {
        eprintln!("no answer at the configured budgets");
    }
    Ok(1)
}

fn print_play(json: bool, play: &[Move]) {
    if json {
        emit(json!({ "play": play }));
    } else {
        for m in play {
            emit(m);
        }
    }
}

fn cmd_decompose(json: bool, depth: u32, file: &PathBuf) -> Result<u8, String> {
    let (t, _) = load_typed(file)?;
    let s = denote_closed(&t, Fuel::default());
    let tree = decomp_tree(&s, depth)?;
    if json {
        emit(serde_json::to_string(&tree).map_err(|e| e.to_string())?);
    } else {
        let mut out = String::new();
        render_tree(&tree, 0, &mut out);
        emit(out.trim_end());
    }
    Ok(0)
}

fn render_tree(t: &DecompTree, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match t {
        DecompTree::Bottom => out.push_str(&format!("{pad}omega\n")),
        DecompTree::Const { value } => out.push_str(&format!("{pad}const {value}\n")),
        DecompTree::Case { head, args, answers } => {
            out.push_str(&format!("{pad}case #{head}\n"));
            for (j, a) in args.iter().enumerate() {
                out.push_str(&format!("{pad}  arg {}:\n", j + 1));
                render_tree(a, indent + 2, out);
            }
            for (n, a) in answers {
                out.push_str(&format!("{pad}  answer {n}:\n"));
                render_tree(a, indent + 2, out);
            }
        }
    }
}

fn cmd_readback(json: bool, depth: u32, file: &PathBuf) -> Result<u8, String> {
    let (t, _) = load_typed(file)?;
    let s = denote_closed(&t, Fuel::default());
    let term = fet_to_term(&e_k(depth, &s, &[])?);
    if json {
        emit(json!({ "depth": depth, "term": term.to_string() }));
    } else {
        emit(term);
    }
    Ok(0)
}

fn describe_witness(w: &Witness) -> String {
    match w {
        Witness::Test {
            description,
            left,
            right,
            ..
        } => format!(
            "test {description}: left {}, right {}",
            convergence(left.converges),
            convergence(right.converges)
        ),
        Witness::Context {
            args,
            left_answer,
            right_answer,
        } => {
            let applied = if args.is_empty() {
                "at ground type".to_string()
            } else {
                format!("applied to {}", args.join(", "))
            };
            match right_answer {
                Some(r) => format!("{applied}: left answers {left_answer}, right answers {r}"),
                None => format!("{applied}: left answers {left_answer}, right diverges"),
            }
        }
    }
}

fn convergence(c: bool) -> &'static str {
    if c {
        "converges"
    } else {
        "diverges"
    }
}

fn describe_verdict(v: &Verdict) -> String {
    match v {
        Verdict::Leq => "yes".to_string(),
        Verdict::NotLeq { witness } => format!("no ({})", describe_witness(witness)),
        Verdict::Inconclusive { reason } => format!("inconclusive ({reason})"),
    }
}

fn cmd_compare(json: bool, depth: u32, file1: &PathBuf, file2: &PathBuf) -> Result<u8, String> {
    let (a, ta) = load_typed(file1)?;
    let (b, tb) = load_typed(file2)?;
    if ta != tb {
        return Err(format!("type mismatch: {ta} vs {tb}"));
    }
    let bounds = Bounds::default();
    let fuel = Fuel::default();
    let lr = obs_compare(&a, &b, depth, fuel, &bounds)?;
    let rl = obs_compare(&b, &a, depth, fuel, &bounds)?;
    let equivalent = lr.is_leq() && rl.is_leq();
    if json {
        emit(json!({
            "type": ta.to_string(),
            "left_leq_right": lr,
            "right_leq_left": rl,
            "equivalent": equivalent,
        }));
    } else {
        emit(format!("left  <= right: {}", describe_verdict(&lr)));
        emit(format!("right <= left : {}", describe_verdict(&rl)));
    }
    Ok(if equivalent { 0 } else { 1 })
}

fn cmd_laws(json: bool, seed: u64, cases: usize) -> Result<u8, String> {
    let reports: Vec<LawReport> = run_all(seed, cases);
    let all_ok = reports.iter().all(|r| r.failures.is_empty());
    if json {
        emit(serde_json::to_string(&reports).map_err(|e| e.to_string())?);
    } else {
        for r in &reports {
            emit(format!(
                "{:<14} subjects {:>4}  cases {:>5}  failures {}",
                r.name,
                r.subjects,
                r.cases,
                r.failures.len()
            ));
            for f in &r.failures {
                emit(format!("  FAIL {f}"));
            }
        }
    }
    Ok(if all_ok { 0 } else { 1 })
}
