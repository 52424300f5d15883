//! The seeded law suites at demonstration scale: categorical laws, the
//! exponential comonad, comonoid diagrams, the bang lemma, and the
//! decomposition round trip.
//!
//! Run with: cargo run --release --example law_suites

use gamepcf::laws::{approximation_laws, dispatch_laws, law_terms, readback_laws, run_all};

fn main() {
    for r in run_all(11, 20) {
        println!(
            "{:<14} subjects {:>3}  cases {:>4}  failures {}",
            r.name,
            r.subjects,
            r.cases,
            r.failures.len()
        );
        assert!(r.failures.is_empty());
        for f in r.failures.iter().take(3) {
            println!("  FAIL {f}");
        }
    }

    // The term-indexed suites run over a fixed corpus of closed terms.
    let terms: Vec<&str> = law_terms().into_iter().take(12).collect();
    for r in [
        approximation_laws(&terms, 2),
        readback_laws(&terms, 2),
        dispatch_laws(&terms, 2),
    ] {
        println!(
            "{:<14} subjects {:>3}  cases {:>4}  failures {}",
            r.name,
            r.subjects,
            r.cases,
            r.failures.len()
        );
        assert!(r.failures.is_empty());
    }
}
