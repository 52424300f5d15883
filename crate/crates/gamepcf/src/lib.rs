//! An executable game-semantics model of PCF.
//!
//! Terms of a small call-by-name language with arithmetic, conditionals and
//! general recursion compile to history-free strategies over formal games.
//! Strategies run and compose through an explicit execution loop, denotations
//! decompose back into finite evaluation trees, and the library ships bounded
//! checkers for the structural laws of the model (categorical, comonad,
//! comonoid), computational adequacy of the compilation, and observational
//! comparisons between terms.
//!
//! Entry points:
//! - [`pcf_lang`]: syntax, type checking, the operational reference
//!   interpreter, and finite evaluation trees.
//! - [`game_core`]: games, moves, legality and position equivalence.
//! - [`strategy`]: history-free strategies, bounded trace sets, bounded
//!   (in)equivalence, and serializable strategy codes.
//! - [`combinators`]: the strategy constructors (composition, tensor,
//!   promotion, contraction, pairing, the case machinery).
//! - [`denotation`]: compiling terms to strategies and running them.
//! - [`decomposition`]: head-normal-form decomposition of strategies,
//!   approximants, and readback to evaluation trees.
//! - [`observation`]: convergence testing and observational comparison.
//! - [`laws`]: seeded random populations and the law suites built on them.

pub mod combinators;
pub mod decomposition;
pub mod denotation;
pub mod game_core;
pub mod laws;
pub mod observation;
pub mod pcf_lang;
pub mod strategy;
