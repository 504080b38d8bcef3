//! Builds the branching shift on the comb tree and walks e_0 back to itself
//! through 0 with δ-chains: orbit down to a small line coefficient, one bump
//! onto a finger whose tip falls off the tree, then a fresh start from 0.
//!
//!     cargo run --example comb_return_chain

use chainrec::construct::{chain_e0_to_zero_comb, chain_zero_to_e0, return_chain_e0};
use chainrec::operator::{shift_from_weights, WeightAssignment};
use chainrec::scalar::{rat, rat_int};
use chainrec::tree::{build_comb_tree, TruncationParams};
use chainrec::{NormSpec, Result, Scalar};
use std::sync::Arc;

fn main() -> Result<()> {
    let tree = Arc::new(build_comb_tree(TruncationParams::comb(-24, 12, 12))?);
    let weights = WeightAssignment::comb(
        Scalar::Rational(rat_int(2)),
        Scalar::Rational(rat_int(4)),
    )?;
    let op = Arc::new(shift_from_weights(&tree, &weights)?);
    let norm = NormSpec::l2();

    for delta in [rat(1, 10), rat(1, 100)] {
        println!("delta = {delta}");
        let out = chain_e0_to_zero_comb(&op, &norm, &delta)?;
        let back = chain_zero_to_e0(&op, &norm, &delta)?;
        for (label, chain) in [("e_0 -> 0", &out), ("0 -> e_0", &back)] {
            let report = chain.validate()?;
            println!(
                "  {label}: {} links, max defect {} (valid: {})",
                chain.len(),
                report.max_defect.to_f64(),
                report.valid
            );
        }

        let round = return_chain_e0(&op, &norm, &delta)?;
        assert_eq!(round.first(), round.last());
        println!(
            "  concatenated return chain: {} links, endpoints equal exactly\n",
            round.len()
        );
    }

    // the chain is exact except for one bump onto the finger; find it
    let chain = chain_e0_to_zero_comb(&op, &norm, &rat(1, 10))?;
    let report = chain.validate()?;
    let bump = (1..=chain.len())
        .max_by(|a, b| report.defects[a - 1].cmp_mag(&report.defects[b - 1]))
        .unwrap();
    println!(
        "bump perturbation of the delta = 1/10 chain (link {bump}): {}",
        chain.perturbation(bump)?.to_json()
    );
    Ok(())
}
