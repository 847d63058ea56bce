//! The thirteen acceptance criteria at their pinned tolerances and runtime
//! limits, one line per criterion. Runs without the libtest harness so the
//! lines are never captured.

use kato_core::experiments::{acceptance_criteria, evaluate};

fn main() {
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut failed = Vec::new();
    for c in acceptance_criteria() {
        let ev = evaluate(&c);
        println!("{}", ev.line());
        println!("    {}", ev.result.detail);
        for n in &ev.outcome.notes {
            println!("    note: {n}");
        }
        if !ev.passed() {
            failed.push(c.id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
