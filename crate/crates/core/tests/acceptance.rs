//! The thirteen acceptance criteria, one test each. Every test prints its pass/fail line.

use hardy_henon::harness::verify::criterion;

fn run(id: u8) {
    let rep = criterion(id);
    eprintln!("{rep}");
    println!(
        "criterion {id:>2}: {} ({})",
        if rep.passed() { "PASS" } else { "FAIL" },
        rep.title
    );
    assert!(rep.passed(), "{rep}");
}

#[test]
fn criterion_01_linear_propagator() {
    run(1);
}

#[test]
fn criterion_02_kernel_oracle() {
    run(2);
}

#[test]
fn criterion_03_decay_law_fit() {
    run(3);
}

#[test]
fn criterion_04_lorentz_suite() {
    run(4);
}

#[test]
fn criterion_05_etd_order() {
    run(5);
}

#[test]
fn criterion_06_scheme_equivalence() {
    run(6);
}

#[test]
fn criterion_07_scaling_commutation() {
    run(7);
}

#[test]
fn criterion_08_self_similarity() {
    run(8);
}

#[test]
fn criterion_09_fujita_ordering() {
    run(9);
}

#[test]
fn criterion_10_qualitative_suite() {
    run(10);
}

#[test]
fn criterion_11_smoothing_boundedness() {
    run(11);
}

#[test]
fn criterion_12_weak_form_residual() {
    run(12);
}

#[test]
fn criterion_13_decay_and_stability() {
    run(13);
}
