//! One pass/fail line per acceptance criterion.

use hartogs_core::acceptance::{self, CriterionOutcome, DEFAULT_SEED};

fn report(o: CriterionOutcome) {
    println!("{}", o.line());
    assert!(o.passed, "criterion {} failed: {}", o.id, o.detail);
}

#[test]
fn criterion_01_coefficient_tables() {
    report(acceptance::coefficient_tables());
}

#[test]
fn criterion_02_oracle_equivalence() {
    report(acceptance::oracle_equivalence(DEFAULT_SEED));
}

#[test]
fn criterion_03_threshold_reproduction() {
    report(acceptance::threshold_reproduction());
}

#[test]
fn criterion_04_n1_universality() {
    report(acceptance::n1_universality());
}

#[test]
fn criterion_05_boundary_case() {
    report(acceptance::boundary_case());
}

#[test]
fn criterion_06_witness_validity() {
    report(acceptance::witness_validity());
}

#[test]
fn criterion_07_ball_degeneration() {
    report(acceptance::ball_degeneration(DEFAULT_SEED));
}

#[test]
fn criterion_08_transformation_rule() {
    report(acceptance::transformation_rule(DEFAULT_SEED));
}

#[test]
fn criterion_09_reproducing_property() {
    report(acceptance::reproducing_property(DEFAULT_SEED));
}

#[test]
fn criterion_10_representative_coordinates() {
    report(acceptance::representative_coordinates_check(DEFAULT_SEED));
}

#[test]
fn criterion_11_cartan_hua_membership() {
    report(acceptance::cartan_hua_membership(DEFAULT_SEED));
}
