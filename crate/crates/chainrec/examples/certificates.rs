//! Non-reachability certificates: exact δ thresholds below which no chain
//! from 0 can produce a finger coordinate, cross-checked two independent
//! ways — the influence oracle (exact minimal δ per chain length) and a
//! seeded random search that tries to beat the bound at δ̄/2 and fails.
//!
//!     cargo run --example certificates

use chainrec::certify::{noncr_bound, random_reach_search};
use chainrec::operator::{shift_from_weights, WeightAssignment};
use chainrec::oracle::min_delta_reach;
use chainrec::scalar::{rat_int, rat_to_f64};
use chainrec::tree::{build_comb_tree, TruncationParams, VertexId};
use chainrec::vector::SeqVector;
use chainrec::{Mode, NormSpec, Rat, Result, Scalar};
use std::sync::Arc;

fn main() -> Result<()> {
    let tree = Arc::new(build_comb_tree(TruncationParams::comb(-16, 8, 6))?);
    let weights = WeightAssignment::comb(
        Scalar::Rational(rat_int(2)),
        Scalar::Rational(rat_int(4)),
    )?;
    let op = Arc::new(shift_from_weights(&tree, &weights)?);
    let norm = NormSpec::l2();

    let target = VertexId::Branch(3, 1);
    let f = SeqVector::basis(target, Mode::Exact);
    let cert = noncr_bound(&op, &f)?;
    println!("certificate for e_{target}:");
    for line in &cert.derivation {
        println!("  {line}");
    }

    // the oracle agrees: no chain length m gets below the bound
    let one = Scalar::one(Mode::Exact);
    let mut infimum: Option<Rat> = None;
    for m in 1..=30 {
        match min_delta_reach(&op, &SeqVector::zero(), target, &one, m) {
            Ok(b) => {
                if infimum.as_ref().map(|i| &b.infimum < i).unwrap_or(true) {
                    infimum = Some(b.infimum);
                }
            }
            Err(_) => continue,
        }
    }
    let infimum = infimum.expect("target reachable for large delta");
    println!(
        "oracle infimum over m <= 30: {infimum} = {} (bound {} holds: {})",
        rat_to_f64(&infimum),
        cert.bound,
        infimum >= cert.bound_rat()
    );

    // 2000 seeded trials at half the bound: the best trial stays short
    let half = cert.bound_rat() / rat_int(2);
    let search = random_reach_search(&op, &norm, &half, target, 1.0, 25, 2000, 42)?;
    println!(
        "search at delta = bound/2: best |f_m({target})| = {} over {} trials, success: {}",
        search.best_reached, search.trials, search.succeeded
    );
    Ok(())
}
