//! Every acceptance criterion at its stated tolerance, one line per criterion.
//! Positional arguments filter criteria by id (`cargo test --test acceptance -- A3`).

use std::process::ExitCode;

use quasiconv::verify::CRITERIA;
use quasiconv_verify::report;

fn main() -> ExitCode {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let selected: Vec<&str> = CRITERIA
        .iter()
        .copied()
        .filter(|id| filters.is_empty() || filters.iter().any(|f| f == id))
        .collect();
    let results: Vec<bool> = selected.iter().map(|id| report(id).passed()).collect();
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
