//! Acceptance gate: one line per criterion, nonzero exit if any fails.
//! Thresholds live in `carleson_core::verify::suites`; the seed is pinned here.

use std::process::ExitCode;
use std::time::Instant;

use carleson_core::verify::{run_suite, Suite, SuiteParams};

const SEED: u64 = 20_240_611;

fn main() -> ExitCode {
    let params = SuiteParams { seed: SEED, ..SuiteParams::default() };
    let mut failed = 0;
    println!("\nacceptance (seed {SEED})");
    for suite in Suite::ALL {
        let t = Instant::now();
        let (pass, detail) = match run_suite(suite, &params) {
            Ok(log) => {
                let bad: Vec<String> = log
                    .checks()
                    .iter()
                    .filter(|c| !c.pass)
                    .map(|c| format!("{} [{}] {:?}", c.name, c.threshold, c.values))
                    .collect();
                (bad.is_empty(), bad)
            }
            Err(e) => (false, vec![e.to_string()]),
        };
        println!(
            "{} criterion {:>2} {:<17} ({:.1}s)",
            if pass { "PASS" } else { "FAIL" },
            suite.criterion(),
            suite.name(),
            t.elapsed().as_secs_f64()
        );
        for d in detail {
            println!("       {d}");
        }
        failed += usize::from(!pass);
    }
    println!("{} of {} criteria passed\n", Suite::ALL.len() - failed, Suite::ALL.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
