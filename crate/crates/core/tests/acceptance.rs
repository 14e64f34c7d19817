//! Runs every acceptance criterion concurrently and prints one PASS/FAIL line
//! per criterion in order. Exits nonzero if any criterion fails.

use std::process::ExitCode;

use geophase::acceptance::{run_criterion, TITLES};

fn main() -> ExitCode {
    let outcomes: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = (1..=TITLES.len()).map(|id| s.spawn(move || run_criterion(id))).collect();
        handles.into_iter().map(|h| h.join().expect("criterion panicked")).collect()
    });
    for o in &outcomes {
        println!("{o}");
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("acceptance: {} passed, {failed} failed", outcomes.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
