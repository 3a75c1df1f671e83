//! Acceptance gate: the ten cross-validation criteria, one test each.
//!
//! Every test prints a single `[PASS]`/`[FAIL]` line (visible with
//! `--nocapture`, and on failure), followed by the per-check numbers, then
//! asserts the criterion passed. The bodies live in `rtbp_core::verify`, the
//! same functions the CLI `verify` subcommand runs.

use rtbp_core::verify::{self, CriterionReport};

fn assert_criterion(rep: CriterionReport) {
    let tag = if rep.passed { "[PASS]" } else { "[FAIL]" };
    println!("{tag} criterion {:02} ({}): {}", rep.number, rep.name, rep.summary);
    for c in &rep.checks {
        let mark = if c.passed { "ok " } else { "BAD" };
        println!(
            "    {mark} {}: {:.6e} {} {:.6e}",
            c.name, c.observed, c.relation, c.bound
        );
    }
    assert!(rep.passed, "criterion {:02} failed: {}", rep.number, rep.summary);
}

#[test]
fn criterion_01_frame_identities() {
    assert_criterion(verify::criterion_01_frame_identities());
}

#[test]
fn criterion_02_jacobi_conservation() {
    assert_criterion(verify::criterion_02_jacobi_conservation());
}

#[test]
fn criterion_03_coefficient_pins() {
    assert_criterion(verify::criterion_03_coefficient_pins());
}

#[test]
fn criterion_04_dual_route_integrals() {
    assert_criterion(verify::criterion_04_dual_route_integrals());
}

#[test]
fn criterion_05_tail_asymptotics() {
    assert_criterion(verify::criterion_05_tail_asymptotics());
}

#[test]
fn criterion_06_series_vs_direct() {
    assert_criterion(verify::criterion_06_series_vs_direct());
}

#[test]
fn criterion_07_leading_constant() {
    assert_criterion(verify::criterion_07_leading_constant());
}

#[test]
fn criterion_08_picard_contraction() {
    assert_criterion(verify::criterion_08_picard_contraction());
}

#[test]
fn criterion_09_mass_ratio_limit() {
    assert_criterion(verify::criterion_09_mass_ratio_limit());
}

#[test]
fn criterion_10_homoclinic_transversality() {
    assert_criterion(verify::criterion_10_homoclinic_transversality());
}
