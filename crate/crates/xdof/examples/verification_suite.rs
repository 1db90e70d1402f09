//! Runs the full numerical verification suite — formula cross-checks,
//! scheme condition checks, entropy slopes, optimizer cross-validation,
//! cross-filter rank property, and Monte Carlo marginals — and prints one
//! status line per record.
//!
//! Run with: `cargo run --release --example verification_suite`

use xdof::verifier::{run_suite, Status};

fn main() {
    let rep = run_suite("all", 0, 20).unwrap();
    for r in &rep.records {
        let tag = match r.status {
            Status::Pass => "PASS",
            Status::Warn => "WARN",
            Status::Fail => "FAIL",
        };
        println!("[{tag}] {:<40} {}", r.name, r.detail);
    }
    println!(
        "\n{} records, {} warnings, suite {}",
        rep.records.len(),
        rep.records.iter().filter(|r| r.status == Status::Warn).count(),
        if rep.failed() { "FAILED" } else { "passed" }
    );
    assert!(!rep.failed());
}
