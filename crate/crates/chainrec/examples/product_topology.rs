//! δ-chains under the product topology. The chain metric is the F-norm
//! Σ_k 2^{-k}·min(1, ‖·‖_k) over a seminorm exhaustion of the window, so a
//! perturbation supported far out in the tree is almost free: the same bump
//! that breaks an ℓ² chain passes easily in the product metric.
//!
//!     cargo run --example product_topology

use chainrec::chain::DeltaChain;
use chainrec::norm::{chain_norm, fnorm, Exhaustion};
use chainrec::operator::{shift_from_weights, WeightAssignment};
use chainrec::scalar::{rat, rat_int};
use chainrec::tree::{build_comb_tree, TruncationParams, VertexId};
use chainrec::vector::SeqVector;
use chainrec::{Mode, NormSpec, Result, Scalar};
use std::sync::Arc;

fn main() -> Result<()> {
    let tree = Arc::new(build_comb_tree(TruncationParams::comb(-12, 12, 6))?);
    let weights = WeightAssignment::comb(
        Scalar::Rational(rat_int(2)),
        Scalar::Rational(rat_int(4)),
    )?;
    let op = Arc::new(shift_from_weights(&tree, &weights)?);

    let l2 = NormSpec::l2();
    let product = NormSpec::ProductSeminorms(Arc::new(Exhaustion::breadth_first(&tree, 8)?));

    // a unit bump at line vertex 9, far from the exhaustion's early sets
    let far = SeqVector::basis(VertexId::Line(9), Mode::Exact);
    println!("‖e_9‖ in l2:          {}", chain_norm(&far, &l2)?.to_f64());
    let f = fnorm(&far, &product)?;
    println!("F-norm of e_9:        {} (exact: {})", f.magnitude.to_f64(), f.magnitude.is_exact());

    // chain: ride the orbit of e_0 but sneak the unit bump in at vertex 9
    let f0 = SeqVector::basis(VertexId::Line(0), Mode::Exact);
    let f1 = op.apply(&f0)?.add(&far)?;
    let vectors = vec![f0, f1];
    let delta = rat(1, 100);

    let in_l2 = DeltaChain::new(op.clone(), l2, delta.clone(), vectors.clone())?;
    let in_product = DeltaChain::new(op, product, delta, vectors)?;
    println!(
        "unit bump as a delta = 1/100 link: l2 valid: {}, product valid: {}",
        in_l2.is_valid()?,
        in_product.is_valid()?
    );

    // the F-metric is not homogeneous, so chain scaling is refused there
    assert!(in_l2.scale(&Scalar::Rational(rat_int(3))).is_ok());
    assert!(in_product.scale(&Scalar::Rational(rat_int(3))).is_err());
    println!("chain scaling: allowed in l2, rejected for the product metric");
    Ok(())
}
