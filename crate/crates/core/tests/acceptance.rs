//! One pass/fail line per acceptance criterion; exits non-zero if any fails.

use capfilm::verify::{run_criterion, VerifyOptions, CRITERIA};
use capfilm::Execution;

fn main() {
    // `cargo test` passes harness flags such as --quiet; only a numeric
    // filter is honoured
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let opts = VerifyOptions {
        quick: false,
        exec: if cfg!(feature = "parallel") { Execution::Parallel } else { Execution::Sequential },
    };
    let mut failed = 0;
    for (id, _) in CRITERIA {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let r = run_criterion(id, &opts).expect("known criterion");
        println!("{} [{:.2} s]", r.line(), r.seconds);
        if !r.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("acceptance: {failed} criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
