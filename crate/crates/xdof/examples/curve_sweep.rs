//! Sweeps the antenna ratio M/N and emits the bound curves as CSV, the same
//! data the `xdof curve` subcommand produces.
//!
//! Run with: `cargo run --example curve_sweep`

use xdof::cli::{rows_to_csv, sweep_rows, Axis};

fn main() {
    // all integer ratios M/N with max(M, N) = 12, normalized per antenna
    let rows = sweep_rows(
        Axis::RatioMOverN,
        None,
        None,
        0.7, // p_d
        0.3, // p_c
        0.5, // p_{d|c}
        None,
        None,
        0,
        12,
    )
    .unwrap();

    print!("{}", rows_to_csv(&rows));

    // two anchor values of the normalized upper bound
    let at = |x: f64| rows.iter().find(|r| (r.x - x).abs() < 1e-12).unwrap();
    assert!((at(1.0).eta_ub - 1.1).abs() < 1e-12, "square-antenna anchor");
    assert!((at(0.5).eta_ub - 0.7).abs() < 1e-12, "half-ratio anchor");
    eprintln!("anchors verified: eta_ub/N = 1.1 at M=N, 0.7 at M/N = 1/2");
}
