//! Shows the contracted five-state joint law of the link on/off process and
//! checks, by Monte Carlo sampling, that it reproduces both receivers'
//! marginal link statistics.
//!
//! Run with: `cargo run --example state_sampling`

use xdof::model::{contracted_states, make_params};
use xdof::verifier::empirical_marginals;

fn main() {
    let params = make_params(3, 2, 0.7, 0.5, 0.9).unwrap();

    println!("contracted states (S11 S12 S21 S22 -> probability):");
    for st in contracted_states(&params).unwrap() {
        let bits: String =
            st.mask.iter().map(|&b| if b { '1' } else { '0' }).collect();
        println!("  {:?}  {}  {:.4}", st.label, bits, st.prob);
    }

    let rep = empirical_marginals(&params, 200_000, 1).unwrap();
    println!("\nper-receiver (direct, cross) cell probabilities, analytic vs empirical:");
    let labels = ["(1,1)", "(1,0)", "(0,1)", "(0,0)"];
    for rx in 0..2 {
        for cell in 0..4 {
            println!(
                "  rx{} {}: {:.4} vs {:.4}",
                rx + 1,
                labels[cell],
                rep.analytic[rx][cell],
                rep.empirical[rx][cell]
            );
        }
    }
    println!("max deviation: {:.5}", rep.max_dev);
    assert!(rep.max_dev < 0.01);
}
