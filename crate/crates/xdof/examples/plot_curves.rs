//! Generates a bound-curve CSV and renders it to a standalone SVG, the same
//! pipeline as `xdof curve | xdof plot`.
//!
//! Run with: `cargo run --example plot_curves`

use xdof::cli::{parse_curve_csv, render_svg, rows_to_csv, sweep_rows, Axis};

fn main() {
    // sweep the cross-link probability on a fixed 3x2 channel
    let rows = sweep_rows(
        Axis::PC,
        Some(3),
        Some(2),
        0.7,  // p_d
        0.5,  // p_c (unused on this axis; the grid supplies it)
        0.9,  // p_{d|c}
        Some(0.0),
        Some(0.7),
        29,
        12,
    )
    .unwrap();

    let csv = rows_to_csv(&rows);
    let dir = std::env::temp_dir();
    let csv_path = dir.join("xdof_curve_example.csv");
    let svg_path = dir.join("xdof_curve_example.svg");
    std::fs::write(&csv_path, &csv).unwrap();

    // the renderer accepts exactly what the sweep emitted
    let parsed = parse_curve_csv(&csv).unwrap();
    assert_eq!(parsed.len(), rows.len());
    let svg = render_svg(&parsed);
    std::fs::write(&svg_path, &svg).unwrap();

    println!("wrote {} rows to {}", rows.len(), csv_path.display());
    println!("rendered plot to {}", svg_path.display());
    let loose = rows.iter().filter(|r| !r.tight).count();
    println!(
        "{loose} of {} grid points have a bound gap (lower-bound curve renders dashed)",
        rows.len()
    );
}
