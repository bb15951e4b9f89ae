//! The invariant suite behind `hrg selftest`, run from library code.

use hrg::cli::config::RunConfig;
use hrg::cli::selftest::run_selftest;

fn main() -> hrg::Result<()> {
    let checks = run_selftest(&RunConfig::default())?;
    for c in &checks {
        println!("{} {:<24} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if checks.iter().any(|c| !c.passed) {
        std::process::exit(1);
    }
    Ok(())
}
