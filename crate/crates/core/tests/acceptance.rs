//! One PASS/FAIL line per acceptance criterion.

use std::process::ExitCode;

use wallsim::verify::{run_suites, Suite, VerifyConfig};

fn main() -> ExitCode {
    let cfg = VerifyConfig::default();
    let mut failed = Vec::new();
    for suite in Suite::ALL {
        match run_suites(&[suite], &cfg) {
            Ok(report) => {
                let r = &report.results[0];
                println!("{}", r.summary_line());
                if !r.passed {
                    println!("    detail: {}", r.detail);
                    if r.blocking {
                        failed.push(r.name.clone());
                    }
                }
            }
            Err(e) => {
                println!("FAIL [--] {}: {e}", suite.name());
                failed.push(suite.name().to_string());
            }
        }
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("blocking criteria failed: {failed:?}");
        ExitCode::FAILURE
    }
}
