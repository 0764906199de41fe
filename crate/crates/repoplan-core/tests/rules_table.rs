//! Golden tests for the sixteen atomic-change labels: each asserts the
//! classified labels, the exact dependency-graph update delta, and the
//! affected-block set against hand-derived expectations.

mod common;

#[test]
fn golden_mmb() {
    common::golden_mmb();
}

#[test]
fn golden_mms() {
    common::golden_mms();
}

#[test]
fn golden_mf() {
    common::golden_mf();
}

#[test]
fn golden_mc() {
    common::golden_mc();
}

#[test]
fn golden_mcc() {
    common::golden_mcc();
}

#[test]
fn golden_mi() {
    common::golden_mi();
}

#[test]
fn golden_am() {
    common::golden_am();
}

#[test]
fn golden_af() {
    common::golden_af();
}

#[test]
fn golden_ac() {
    common::golden_ac();
}

#[test]
fn golden_acc() {
    common::golden_acc();
}

#[test]
fn golden_ai() {
    common::golden_ai();
}

#[test]
fn golden_dm() {
    common::golden_dm();
}

#[test]
fn golden_df() {
    common::golden_df();
}

#[test]
fn golden_dc() {
    common::golden_dc();
}

#[test]
fn golden_dcc() {
    common::golden_dcc();
}

#[test]
fn golden_di() {
    common::golden_di();
}
