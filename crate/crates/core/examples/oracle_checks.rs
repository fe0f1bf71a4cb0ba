// The oracle agreement suite, as run by the `validate` subcommand.

use deep_ibp::oracle::validation::{run_suite, ValidationOptions};

pub fn run_example() -> deep_ibp::Result<()> {
    for check in run_suite(&ValidationOptions::default())? {
        println!(
            "{}  {:<52} {:.2e} (tolerance {:.0e})",
            if check.passed { "ok  " } else { "FAIL" },
            check.name,
            check.measured,
            check.tolerance
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> deep_ibp::Result<()> {
    run_example()
}
