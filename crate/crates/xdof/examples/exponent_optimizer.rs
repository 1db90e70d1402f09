//! Cross-validates the closed-form optimal power exponent of the
//! partial-power schemes against a brute-force grid search over the
//! binding sum-rate objective.
//!
//! Run with: `cargo run --example exponent_optimizer`

use xdof::bounds::{prop2, prop3};
use xdof::model::make_params;
use xdof::schemes::Family;
use xdof::verifier::{optimal_b, optimize_exponent};

fn main() {
    // a regime-2 point where partial power strictly helps
    let p65 = make_params(6, 5, 0.7, 0.6, 0.9).unwrap();
    let rep = optimize_exponent(&p65, Family::HkiaLbT2Blend, 1e-3).unwrap();
    println!("blended 6x5:");
    println!("  grid argmax a* = {:.4}, objective {:.6}", rep.a_star, rep.value);
    println!("  closed form    = {:?}", rep.a_closed);
    assert!(rep.agree);
    let closed = prop2(&p65).unwrap();
    println!("  closed-form total = {:.6} (k={}, q={})", closed.eta_total, closed.k, closed.q);

    let b = optimal_b(&p65, 1e-2).unwrap();
    println!("  exact-null exponent optimum b* = {b:.2} (expected 1)");
    assert!((b - 1.0).abs() <= 2e-2);

    let p56 = make_params(5, 6, 0.7, 0.6, 0.9).unwrap();
    let rep = optimize_exponent(&p56, Family::HkiaLbT1, 1e-3).unwrap();
    println!("inversion-based 5x6:");
    println!("  grid argmax a* = {:.4}, objective {:.6}", rep.a_star, rep.value);
    println!("  closed form    = {:?}", rep.a_closed);
    assert!(rep.agree);
    let closed = prop3(&p56).unwrap();
    println!("  closed-form total = {:.6} (k={}, q={})", closed.eta_total, closed.k, closed.q);
}
