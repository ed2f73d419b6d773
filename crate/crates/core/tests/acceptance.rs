//! Runs every acceptance criterion and prints one line per criterion.
//! Exits nonzero if any criterion fails.

use std::process::ExitCode;

use qdrepeater::acceptance::{run_all, AcceptanceOptions};
use qdrepeater::ParameterSet;

fn main() -> ExitCode {
    let criteria = match run_all(&ParameterSet::default(), &AcceptanceOptions::default()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("acceptance suite could not run: {e}");
            return ExitCode::FAILURE;
        }
    };
    for c in &criteria {
        println!("{}", c.summary());
    }
    for c in criteria.iter().filter(|c| !c.pass()) {
        print!("{c}");
    }
    let failed: Vec<u8> = criteria.iter().filter(|c| !c.pass()).map(|c| c.id).collect();
    if criteria.len() != 10 {
        println!("expected 10 criteria, found {}", criteria.len());
        return ExitCode::FAILURE;
    }
    if failed.is_empty() {
        println!("acceptance: {}/{} criteria passed", criteria.len(), criteria.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
