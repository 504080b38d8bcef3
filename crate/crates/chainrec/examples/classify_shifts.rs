//! Classifies classical weighted shifts on ℓ²(ℕ) and ℓ²(ℤ) by the two
//! weight-product series, including what happens when a weight vanishes.
//!
//!     cargo run --example classify_shifts

use chainrec::classical::{
    classify_classical, criterion_partial_sums, zero_weight_analysis, ClassicalShift, ShiftKind,
    SpaceKind, WeightSeq,
};
use chainrec::scalar::{rat, rat_int};
use chainrec::{Result, Scalar};

fn show(name: &str, shift: &ClassicalShift) -> Result<()> {
    let report = classify_classical(shift, -5..=5)?;
    print!("{name}: {:?}", report.verdict);
    if let Some(bound) = &report.bound {
        print!(" (no return chain below delta = {bound})");
    }
    println!();
    let check = &report.checks[0];
    println!("  forward:  {}", check.forward.reason);
    println!("  backward: {}", check.backward.reason);
    Ok(())
}

fn main() -> Result<()> {
    let two = Scalar::Rational(rat_int(2));

    show(
        "unweighted bilateral",
        &ClassicalShift::new(
            ShiftKind::Bilateral,
            SpaceKind::Banach,
            WeightSeq::constant(Scalar::Rational(rat_int(1))),
        ),
    )?;
    show(
        "doubling unilateral",
        &ClassicalShift::new(ShiftKind::Unilateral, SpaceKind::Banach, WeightSeq::constant(two.clone())),
    )?;
    let doubling_bilateral =
        ClassicalShift::new(ShiftKind::Bilateral, SpaceKind::Banach, WeightSeq::constant(two.clone()));
    show("doubling bilateral", &doubling_bilateral)?;
    show(
        "halving unilateral",
        &ClassicalShift::new(
            ShiftKind::Unilateral,
            SpaceKind::Banach,
            WeightSeq::constant(Scalar::Rational(rat(1, 2))),
        ),
    )?;
    // in the product topology the seminorms vanish eventually, so every
    // series diverges and every shift is chain recurrent
    show(
        "doubling bilateral on the product space",
        &ClassicalShift::new(ShiftKind::Bilateral, SpaceKind::Product, WeightSeq::constant(two.clone())),
    )?;

    // the convergent backward series, numerically: Σ 2^{-n} stays below 1
    let partial = criterion_partial_sums(&doubling_bilateral, 0, true, 40);
    println!("\nbackward partial sums for the doubling bilateral shift:");
    println!("  S(10) = {}, S(40) = {}", partial[9], partial[39]);

    // one zero weight splits the space into a dead half and a live tail span
    println!();
    for (name, lambda) in [("2", two), ("1/2", Scalar::Rational(rat(1, 2)))] {
        let shift = ClassicalShift::new(
            ShiftKind::Bilateral,
            SpaceKind::Banach,
            WeightSeq::single_zero(lambda, 3),
        );
        let report = zero_weight_analysis(&shift)?;
        println!(
            "zero at n = 3, lambda = {name}: CR = {:?}, restriction {:?}",
            report.cr_subspace,
            report.restriction.map(|r| r.verdict)
        );
    }
    Ok(())
}
