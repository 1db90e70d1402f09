//! Measures high-power entropy slopes of the received signal, per channel
//! state and conditioning set, and compares them against the closed-form
//! coefficient tables the schemes are designed to achieve.
//!
//! Run with: `cargo run --example entropy_slopes`

use xdof::matrix_core::sample_channel;
use xdof::schemes::{build, Family};
use xdof::verifier::entropy_slopes;

fn main() {
    let cases = [
        (Family::Type2R2Hkia, 3, 2, 1.0),
        (Family::HkiaLbT1, 5, 6, 0.7),
        (Family::HkiaLbT2Blend, 6, 5, 0.7),
    ];
    for (family, m, n, a) in cases {
        let re = sample_channel(m, n, 7);
        let spec = build(family, &re, m, n, a, a).unwrap();
        let rep = entropy_slopes(&spec, &re).unwrap();
        println!("== {} {}x{} (a = {a}) ==", rep.family, m, n);
        for t in &rep.terms {
            println!(
                "  rx{} | given {:<12} | {:<12} measured {:>7.4}  expected {:>7.4}",
                t.rx,
                if t.conditioned.is_empty() { "-".to_string() } else { t.conditioned.join("+") },
                t.class,
                t.measured,
                t.expected
            );
        }
        println!("  max deviation: {:.5}\n", rep.max_dev);
        assert!(rep.max_dev <= 0.02);
    }
}
