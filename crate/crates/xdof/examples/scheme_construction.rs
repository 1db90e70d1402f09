//! Builds a transmission scheme from a random channel realization and
//! verifies every algebraic condition its construction promises (exact
//! nulls, full-rank effective channels).
//!
//! Run with: `cargo run --example scheme_construction`

use xdof::matrix_core::sample_channel;
use xdof::schemes::{build, check_conditions, Family};

fn main() {
    // the blended exact/partial-nulling scheme on a 6x5 channel at partial
    // private power (exponent a = 0.86)
    let (m, n) = (6, 5);
    let re = sample_channel(m, n, 42);
    let spec = build(Family::HkiaLbT2Blend, &re, m, n, 0.86, 1.0).unwrap();

    println!("family: {}", spec.family.name());
    println!("dims [d_D1, d_C1, d_C2, d_D2] = {:?}", spec.dims);
    println!("exponents a={} b={}", spec.a, spec.b);
    println!("public power fraction: {}", spec.public_power_fraction);
    println!("\nstreams:");
    for s in &spec.streams {
        println!(
            "  {:<4} tx{} rx{:?}  {} column(s), precoder {}x{}",
            s.name,
            s.tx,
            s.rx,
            s.dim(),
            s.precoder.nrows(),
            s.precoder.ncols()
        );
    }

    println!("\ncondition checks:");
    let mut all_pass = true;
    for c in check_conditions(&spec, &re) {
        println!("  {:<40} {:?}  value {:>12.4e}  pass={}", c.name, c.kind, c.value, c.pass);
        all_pass &= c.pass;
    }
    assert!(all_pass, "every construction condition must hold");

    // total transmit power per transmitter stays within the unit budget at
    // full power exponents
    let full = build(Family::HkiaLbT2Blend, &re, m, n, 1.0, 1.0).unwrap();
    for tx in [1usize, 2] {
        let p: f64 =
            full.streams.iter().filter(|s| s.tx == tx).map(|s| s.power(1e6)).sum();
        println!("tx{tx} total power at P=1e6: {:.3e} (budget 1e6)", p);
        assert!(p <= 1e6 * (1.0 + 1e-9));
    }
}
