//! The grid tree carries an invertible weighted operator: the line is a
//! μ₁-scaled bilateral shift, and each branch path gives the inverse a way
//! back up. This example checks T∘T⁻¹ = T⁻¹∘T = id on the window interior
//! and replays the e_0 return chain, whose two bumps have equal defects.
//!
//!     cargo run --example grid_invertible

use chainrec::construct::return_chain_e0;
use chainrec::operator::{
    build_grid_t, build_grid_t_inverse, compose_is_identity_on, GridWeights, WeightAssignment,
};
use chainrec::scalar::{rat, rat_int};
use chainrec::tree::{build_grid_tree, TruncationParams, VertexId};
use chainrec::{NormSpec, Result, Scalar};
use std::sync::Arc;

fn main() -> Result<()> {
    let params = TruncationParams::grid(-14, 10, 9, -9, 9);
    let tree = Arc::new(build_grid_tree(params)?);
    let weights = WeightAssignment::new(
        Scalar::Rational(rat_int(2)),
        Scalar::Rational(rat_int(4)),
        GridWeights::Standard,
    )?;
    let t = build_grid_t(&tree, &weights)?;
    let t_inv = build_grid_t_inverse(&tree, &weights)?;

    // both compositions fix every vertex whose neighbors stay in the window
    let interior: Vec<VertexId> = tree
        .vertices()
        .filter(|v| !t.leaks_at(v) && !t_inv.leaks_at(v))
        .copied()
        .collect();
    let ok_fwd = compose_is_identity_on(&t, &t_inv, interior.iter())?;
    let ok_bwd = compose_is_identity_on(&t_inv, &t, interior.iter())?;
    println!(
        "T∘T⁻¹ = id on {} vertices: {ok_fwd}; T⁻¹∘T: {ok_bwd}",
        interior.len()
    );

    // the weight matrix satisfies both summability clauses row by row
    let report = weights.grid_report(&params)?;
    println!(
        "weight moduli in [{}, {}], {} rows checked",
        report.inf_abs,
        report.sup_abs,
        report.rows.len()
    );

    let op = Arc::new(t);
    let chain = return_chain_e0(&op, &NormSpec::l2(), &rat(1, 10))?;
    let report = chain.validate()?;
    println!(
        "return chain for e_0 at delta = 1/10: {} links, valid: {}",
        chain.len(),
        report.valid
    );
    let nonzero: Vec<String> = report
        .defects
        .iter()
        .enumerate()
        .filter(|(_, d)| !d.is_zero())
        .map(|(l, d)| format!("link {}: {}", l + 1, d.to_f64()))
        .collect();
    println!("nonzero defects: {}", nonzero.join(", "));
    Ok(())
}
