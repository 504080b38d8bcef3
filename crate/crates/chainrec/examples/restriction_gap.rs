//! The headline phenomenon: chain recurrence does not pass to the
//! restriction. On the full comb (or grid) operator every line vector is
//! chain recurrent, but restricting to the closed line span leaves the
//! μ₁-scaled bilateral shift — and there the reachability oracle proves a
//! uniform positive obstruction for e_0.
//!
//!     cargo run --example restriction_gap

use chainrec::classical::{classify_classical, ClassicalShift, ShiftKind, SpaceKind, WeightSeq};
use chainrec::construct::return_chain_e0;
use chainrec::operator::{shift_from_weights, WeightAssignment};
use chainrec::oracle::{bilateral_return_bound, min_delta_reach};
use chainrec::scalar::{rat, rat_int, rat_to_f64};
use chainrec::tree::{build_comb_tree, TruncationParams, VertexId};
use chainrec::vector::SeqVector;
use chainrec::{Mode, NormSpec, Result, Scalar};
use std::sync::Arc;

fn main() -> Result<()> {
    // on the comb, the finger at -m absorbs the orbit: e_0 returns to itself
    let tree = Arc::new(build_comb_tree(TruncationParams::comb(-24, 12, 12))?);
    let weights = WeightAssignment::comb(
        Scalar::Rational(rat_int(2)),
        Scalar::Rational(rat_int(4)),
    )?;
    let op = Arc::new(shift_from_weights(&tree, &weights)?);
    let chain = return_chain_e0(&op, &NormSpec::l2(), &rat(1, 10))?;
    println!(
        "full operator: e_0 -> 0 -> e_0 in {} links at delta = 1/10 (valid: {})",
        chain.len(),
        chain.is_valid()?
    );

    // restricted to the line span the fingers are gone; the oracle shows the
    // orbit mass 2^m at -m can never be cancelled below delta = 1
    let line = Arc::new(chainrec::tree::build_line_tree(
        TruncationParams::line(-70, 8),
        false,
    )?);
    let shift = chainrec::operator::classical_shift(&line, |_| {
        Some(Scalar::Rational(rat_int(2)))
    })?;
    let e0 = SeqVector::basis(VertexId::Line(0), Mode::Exact);
    let zero = Scalar::zero(Mode::Exact);
    println!("\nrestriction to the line span (bilateral shift with lambda = 2):");
    for m in [1u32, 2, 5, 10, 20, 60] {
        let bound = min_delta_reach(&shift, &e0, VertexId::Line(-(m as i64)), &zero, m)?;
        let closed = bilateral_return_bound(&rat_int(2), m)?;
        assert_eq!(bound.infimum, closed);
        println!(
            "  m = {m:>2}: cancelling the orbit at -{m} needs delta > {} ({:.12})",
            bound.infimum,
            rat_to_f64(&bound.infimum)
        );
    }
    println!("  the infimum over m is |mu1| - 1 = 1: e_0 is not chain recurrent there");

    let classical = ClassicalShift::new(
        ShiftKind::Bilateral,
        SpaceKind::Banach,
        WeightSeq::constant(Scalar::Rational(rat_int(2))),
    );
    let report = classify_classical(&classical, -5..=5)?;
    println!(
        "  classifier agrees: {:?}, bound {}",
        report.verdict,
        report.bound.unwrap()
    );
    Ok(())
}
