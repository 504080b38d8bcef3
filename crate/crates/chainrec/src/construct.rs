//! Explicit chain recipes: the two-step constructions that move between 0 and
//! basis vectors with finitely many perturbations, each strictly below δ.
//!
//! Step 1 (0 → e_v on the line): one bump of size |μ₁|^{-(m₁-1)} placed m₁-1
//! positions up the line, then the exact orbit.
//! Step 2 (e_v → 0): ride the orbit onto the line, then one bump onto a comb
//! finger whose descent cancels the line coefficient (branching shift), or a
//! bump up a grid branch followed by a descent below j = 0 and a final drop
//! (invertible grid operator, two equal defects).

use crate::chain::DeltaChain;
use crate::error::{Error, Result};
use crate::norm::NormSpec;
use crate::operator::{LinearOp, OpFamily};
use crate::scalar::{Mode, Rat, Scalar};
use crate::tree::VertexId;
use crate::vector::SeqVector;
use num::{One, Zero};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    FromZero,
    ToZero,
}

/// Smallest integer m > 1 with 1 < δ·|μ₁|^(m-1); the Step-1 chain length.
pub fn m1_for(delta: &Rat, mu1_abs: &Rat) -> Result<u32> {
    if delta <= &Rat::zero() {
        return Err(Error::NonPositiveDelta);
    }
    if mu1_abs <= &Rat::one() {
        return Err(Error::WeightOutOfRange("|mu1| must exceed 1".into()));
    }
    let mut pow = mu1_abs.clone(); // |mu1|^(m-1) at m = 2
    for m in 2..=MAX_RECIPE_LENGTH {
        if &Rat::one() < &(delta * &pow) {
            return Ok(m);
        }
        pow *= mu1_abs;
    }
    Err(Error::NotApplicable(format!("no Step-1 length under {MAX_RECIPE_LENGTH}")))
}

/// Smallest integer m > 1 with c·|μ₁|^m < δ·|μ₂|^(m-1); the Step-2 chain
/// length from a line coefficient of modulus c.
pub fn m2_for(delta: &Rat, mu1_abs: &Rat, mu2_abs: &Rat, coeff_abs: &Rat) -> Result<u32> {
    if delta <= &Rat::zero() {
        return Err(Error::NonPositiveDelta);
    }
    if mu2_abs <= mu1_abs {
        return Err(Error::WeightOutOfRange("|mu2| must exceed |mu1|".into()));
    }
    let mut lhs = coeff_abs * mu1_abs * mu1_abs; // c·|mu1|^m at m = 2
    let mut rhs = delta * mu2_abs; // δ·|mu2|^(m-1) at m = 2
    for m in 2..=MAX_RECIPE_LENGTH {
        if lhs < rhs {
            return Ok(m);
        }
        lhs *= mu1_abs;
        rhs *= mu2_abs;
    }
    Err(Error::NotApplicable(format!("no Step-2 length under {MAX_RECIPE_LENGTH}")))
}

const MAX_RECIPE_LENGTH: u32 = 100_000;

fn require_weights(op: &LinearOp) -> Result<(Scalar, Scalar)> {
    let w = op
        .weights()
        .ok_or_else(|| Error::UnsupportedOperator("recipe needs mu-weighted operator".into()))?;
    Ok((w.mu1().clone(), w.mu2().clone()))
}

fn require_vertex(op: &LinearOp, v: VertexId, need: &str) -> Result<()> {
    if op.tree().contains(&v) {
        Ok(())
    } else {
        Err(Error::UndersizedWindow(format!("{need} (vertex {v} missing)")))
    }
}

/// Step 1: the chain 0 → e_v for a line vertex, valid for every operator in
/// this crate whose line columns are e_n ↦ μ₁·e_{n-1}.
fn from_zero_line(
    op: &Arc<LinearOp>,
    norm: &NormSpec,
    delta: &Rat,
    n: i64,
) -> Result<DeltaChain> {
    let (mu1, _) = require_weights(op)?;
    let m1 = m1_for(delta, &mu1.abs_rat())?;
    let start = VertexId::Line(n + (m1 as i64) - 1);
    require_vertex(op, start, &format!("Step 1 needs the line up to {}", n + (m1 as i64) - 1))?;
    let coeff = mu1.pow_i(-((m1 as i64) - 1))?;
    let f1 = SeqVector::basis(start, mu1.mode()).scale(&coeff)?;
    let mut vectors = vec![SeqVector::zero(), f1];
    for _ in 0..(m1 - 1) {
        vectors.push(op.apply(vectors.last().expect("nonempty"))?);
    }
    debug_assert_eq!(vectors.last(), Some(&SeqVector::basis(VertexId::Line(n), mu1.mode())));
    DeltaChain::new(op.clone(), norm.clone(), delta.clone(), vectors)
}

/// Rides the exact orbit until the vector is a single line entry at position
/// <= 0; returns the traversed vectors (starting with e_v) and the landing
/// (coefficient, position).
fn orbit_to_line(op: &LinearOp, v: VertexId, mode: Mode) -> Result<(Vec<SeqVector>, Scalar, i64)> {
    let mut vectors = vec![SeqVector::basis(v, mode)];
    loop {
        let cur = vectors.last().expect("nonempty");
        let landing = if cur.support_size() == 1 {
            match cur.support().next().copied() {
                Some(VertexId::Line(q)) if q <= 0 => Some((cur.get(&VertexId::Line(q)), q)),
                _ => None,
            }
        } else {
            None
        };
        if let Some((c, q)) = landing {
            return Ok((vectors, c, q));
        }
        if vectors.len() > 4 * MAX_RECIPE_LENGTH as usize {
            return Err(Error::NotApplicable("orbit never lands on the nonpositive line".into()));
        }
        let next = op.apply(cur)?;
        vectors.push(next);
    }
}

/// Step 2 for the branching backward shift: from e_v, ride the orbit onto the
/// line, then bump onto the finger at -(m+|q|) so the descent cancels the
/// line coefficient after m more links. Single defect c·|μ₁|^m/|μ₂|^(m-1).
fn comb_to_zero(
    op: &Arc<LinearOp>,
    norm: &NormSpec,
    delta: &Rat,
    v: VertexId,
) -> Result<DeltaChain> {
    let (mu1, mu2) = require_weights(op)?;
    let (mut vectors, c, q) = orbit_to_line(op, v, mu1.mode())?;
    let m = m2_for(delta, &mu1.abs_rat(), &mu2.abs_rat(), &c.abs_rat())?;
    let row = (m as i64 - q) as u32;
    let bump_at = VertexId::Branch(row, m as i64 - 1);
    require_vertex(op, bump_at, &format!("Step 2 needs finger row {row}"))?;
    require_vertex(op, VertexId::Line(q - m as i64), &format!("Step 2 needs the line down to {}", q - m as i64))?;
    // g = -(c·μ₁^m / μ₂^(m-1)) e_{(-row, m-1)}
    let g_coeff = c
        .mul(&mu1.pow_i(m as i64)?)?
        .mul(&mu2.pow_i(-(m as i64 - 1))?)?
        .neg();
    let bump = SeqVector::basis(bump_at, mu1.mode()).scale(&g_coeff)?;
    let next = op.apply(vectors.last().expect("nonempty"))?.add(&bump)?;
    vectors.push(next);
    for _ in 0..(m - 1) {
        vectors.push(op.apply(vectors.last().expect("nonempty"))?);
    }
    debug_assert!(vectors.last().expect("nonempty").is_zero());
    DeltaChain::new(op.clone(), norm.clone(), delta.clone(), vectors)
}

/// Step 2 for the invertible grid operator: orbit onto the line, one bump up
/// the branch at -(n+|q|) whose descent meets the line after n links, leaving
/// -c·μ₁ⁿ at the branch foot; descend n-1 more links and drop to 0. Two equal
/// defects c·|μ₁|ⁿ/|μ₂|^(n-1); total length |q| + 2n - 1 from a line start.
fn grid_to_zero(
    op: &Arc<LinearOp>,
    norm: &NormSpec,
    delta: &Rat,
    v: VertexId,
) -> Result<DeltaChain> {
    let (mu1, mu2) = require_weights(op)?;
    if !matches!(v, VertexId::Line(_)) {
        return Err(Error::NotApplicable(
            "grid Step 2 starts from line vertices; branch orbits split at the graft".into(),
        ));
    }
    let (mut vectors, c, q) = orbit_to_line(op, v, mu1.mode())?;
    let n = m2_for(delta, &mu1.abs_rat(), &mu2.abs_rat(), &c.abs_rat())?;
    let row = (n as i64 - q) as u32;
    require_vertex(op, VertexId::Branch(row, n as i64 - 1), &format!("grid Step 2 needs row {row} up to j = {}", n - 1))?;
    require_vertex(op, VertexId::Branch(row, -(n as i64 - 1)), &format!("grid Step 2 needs row {row} down to j = {}", -(n as i64 - 1)))?;
    require_vertex(op, VertexId::Line(q - n as i64), &format!("grid Step 2 needs the line down to {}", q - n as i64))?;
    let g_coeff = c
        .mul(&mu1.pow_i(n as i64)?)?
        .mul(&mu2.pow_i(-(n as i64 - 1))?)?
        .neg();
    let bump = SeqVector::basis(VertexId::Branch(row, n as i64 - 1), mu1.mode()).scale(&g_coeff)?;
    let next = op.apply(vectors.last().expect("nonempty"))?.add(&bump)?;
    vectors.push(next);
    // n-1 exact links to -c·μ₁ⁿ e_{(-row,0)}, then n-2 exact descent links
    for _ in 0..(2 * n - 3) {
        vectors.push(op.apply(vectors.last().expect("nonempty"))?);
    }
    // final drop: f = 0, defect ‖T(f_prev)‖ = c·|μ₁|ⁿ/|μ₂|^(n-1)
    vectors.push(SeqVector::zero());
    DeltaChain::new(op.clone(), norm.clone(), delta.clone(), vectors)
}

/// 0 → e_{(-k,j)} on a comb finger: bumps of uniform size 1/S at every link,
/// S = Σ_{i<L} |μ₂|^i, descending from height j+L-1. Feasible once δ·S > 1
/// with the finger height allowing L <= k-j+1 links.
fn comb_from_zero_branch(
    op: &Arc<LinearOp>,
    norm: &NormSpec,
    delta: &Rat,
    k: u32,
    j: i64,
) -> Result<DeltaChain> {
    let (_, mu2) = require_weights(op)?;
    require_vertex(op, VertexId::Branch(k, j), "target finger vertex")?;
    let b = mu2.abs_rat();
    let max_links = (k as i64 - j + 1).max(0) as u32;
    let mut s = Rat::zero();
    let mut pow = Rat::one();
    let mut links = None;
    for l in 1..=max_links {
        s += &pow;
        pow *= &b;
        if &Rat::one() < &(delta * &s) {
            links = Some((l, s.clone()));
            break;
        }
    }
    let Some((links, s)) = links else {
        return Err(Error::NotApplicable(format!(
            "delta {} is at or below the finger reachability bound {}",
            delta,
            s.recip()
        )));
    };
    let mut vectors = vec![SeqVector::zero()];
    for l in 1..=links {
        let height = j + links as i64 - l as i64;
        let t = mu2.pow_i(links as i64 - l as i64)?;
        // c_l = (|t|/S)·t⁻¹, so Σ c_l·t_l = Σ |t_l|/S = 1 exactly
        let share = t.abs_rat() / &s;
        let share = match t.mode() {
            Mode::Exact => Scalar::Rational(share),
            Mode::Float => Scalar::Float(crate::scalar::rat_to_f64(&share)),
        };
        let c = share.mul(&t.recip()?)?;
        let bump = SeqVector::basis(VertexId::Branch(k, height), t.mode()).scale(&c)?;
        let next = op.apply(vectors.last().expect("nonempty"))?.add(&bump)?;
        vectors.push(next);
    }
    debug_assert_eq!(
        vectors.last().map(|f| f.support_size()),
        Some(1)
    );
    DeltaChain::new(op.clone(), norm.clone(), delta.clone(), vectors)
}

/// 0 → e_{(-k,j)} up a grid branch (j >= 1): one bump at height j+t scaled by
/// the inverse of the descent weight product, once that product exceeds 1/δ.
fn grid_from_zero_branch(
    op: &Arc<LinearOp>,
    norm: &NormSpec,
    delta: &Rat,
    k: u32,
    j: i64,
) -> Result<DeltaChain> {
    let weights = op
        .weights()
        .ok_or_else(|| Error::UnsupportedOperator("recipe needs mu-weighted operator".into()))?
        .clone();
    if j < 1 {
        return Err(Error::NotApplicable(
            "grid from-zero recipe covers j >= 1; lower-branch orbits pass the graft".into(),
        ));
    }
    require_vertex(op, VertexId::Branch(k, j), "target branch vertex")?;
    let mut prod = Scalar::one(weights.mu1().mode());
    let mut best = None;
    let mut t = 0i64;
    while op.tree().contains(&VertexId::Branch(k, j + t + 1)) {
        t += 1;
        prod = prod.mul(&weights.grid_weight(k, j + t)?)?;
        if prod.abs_rat() * delta > Rat::one() {
            best = Some((t, prod.clone()));
            break;
        }
    }
    let Some((t, prod)) = best else {
        return Err(Error::NotApplicable(
            "no branch height in the window with weight product above 1/delta".into(),
        ));
    };
    let f1 = SeqVector::basis(VertexId::Branch(k, j + t), prod.mode()).scale(&prod.recip()?)?;
    let mut vectors = vec![SeqVector::zero(), f1];
    for _ in 0..t {
        vectors.push(op.apply(vectors.last().expect("nonempty"))?);
    }
    debug_assert_eq!(
        vectors.last(),
        Some(&SeqVector::basis(VertexId::Branch(k, j), prod.mode()))
    );
    DeltaChain::new(op.clone(), norm.clone(), delta.clone(), vectors)
}

/// A δ-chain between 0 and e_v, in the requested direction, using the recipe
/// matching the operator family.
pub fn chain_for_basis(
    op: &Arc<LinearOp>,
    norm: &NormSpec,
    delta: &Rat,
    v: VertexId,
    direction: Direction,
) -> Result<DeltaChain> {
    match (op.family, direction, v) {
        (_, Direction::FromZero, VertexId::Line(n)) => from_zero_line(op, norm, delta, n),
        (OpFamily::CombShift, Direction::FromZero, VertexId::Branch(k, j)) => {
            comb_from_zero_branch(op, norm, delta, k, j)
        }
        (OpFamily::GridT, Direction::FromZero, VertexId::Branch(k, j)) => {
            grid_from_zero_branch(op, norm, delta, k, j)
        }
        (OpFamily::CombShift, Direction::ToZero, _) => comb_to_zero(op, norm, delta, v),
        (OpFamily::GridT, Direction::ToZero, _) => grid_to_zero(op, norm, delta, v),
        (OpFamily::ClassicalShift, Direction::ToZero, _) => Err(Error::NotApplicable(
            "the line has no finger to cancel against; use the classifier".into(),
        )),
        (family, _, _) => Err(Error::UnsupportedOperator(family.to_string())),
    }
}

/// Step 1 specialization: 0 → e_0.
pub fn chain_zero_to_e0(op: &Arc<LinearOp>, norm: &NormSpec, delta: &Rat) -> Result<DeltaChain> {
    from_zero_line(op, norm, delta, 0)
}

/// Step 2 specialization for the branching shift: e_0 → 0.
pub fn chain_e0_to_zero_comb(
    op: &Arc<LinearOp>,
    norm: &NormSpec,
    delta: &Rat,
) -> Result<DeltaChain> {
    if op.family != OpFamily::CombShift {
        return Err(Error::UnsupportedOperator(op.family.to_string()));
    }
    comb_to_zero(op, norm, delta, VertexId::Line(0))
}

/// Step 2 specialization for the invertible grid operator: e_0 → 0.
pub fn chain_e0_to_zero_grid(
    op: &Arc<LinearOp>,
    norm: &NormSpec,
    delta: &Rat,
) -> Result<DeltaChain> {
    if op.family != OpFamily::GridT {
        return Err(Error::UnsupportedOperator(op.family.to_string()));
    }
    grid_to_zero(op, norm, delta, VertexId::Line(0))
}

/// Round trip e_0 → 0 → e_0 as one chain (the zero vectors may be repeated
/// freely in between).
pub fn return_chain_e0(op: &Arc<LinearOp>, norm: &NormSpec, delta: &Rat) -> Result<DeltaChain> {
    let out = match op.family {
        OpFamily::CombShift => chain_e0_to_zero_comb(op, norm, delta)?,
        OpFamily::GridT => chain_e0_to_zero_grid(op, norm, delta)?,
        other => return Err(Error::UnsupportedOperator(other.to_string())),
    };
    let back = chain_zero_to_e0(op, norm, delta)?;
    out.concat(&back)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norm::Magnitude;
    use crate::operator::{build_grid_t, shift_from_weights, GridWeights, WeightAssignment};
    use crate::scalar::{rat, rat_int};
    use crate::tree::{build_comb_tree, build_grid_tree, TruncationParams};

    fn comb_op(n_min: i64, n_max: i64, k_max: u32) -> Arc<LinearOp> {
        let tree = Arc::new(build_comb_tree(TruncationParams::comb(n_min, n_max, k_max)).unwrap());
        let w = WeightAssignment::comb(
            Scalar::Rational(rat_int(2)),
            Scalar::Rational(rat_int(4)),
        )
        .unwrap();
        Arc::new(shift_from_weights(&tree, &w).unwrap())
    }

    fn grid_op() -> Arc<LinearOp> {
        let tree =
            Arc::new(build_grid_tree(TruncationParams::grid(-14, 8, 8, -7, 7)).unwrap());
        let w = WeightAssignment::new(
            Scalar::Rational(rat_int(2)),
            Scalar::Rational(rat_int(4)),
            GridWeights::Standard,
        )
        .unwrap();
        Arc::new(build_grid_t(&tree, &w).unwrap())
    }

    #[test]
    fn recipe_lengths_match_the_inequalities() {
        // |mu1| = 2, delta = 1/10: smallest m > 1 with 2^(m-1) > 10 is 5
        assert_eq!(m1_for(&rat(1, 10), &rat_int(2)).unwrap(), 5);
        // 2^m < (1/10)·4^(m-1) first at m = 6
        assert_eq!(m2_for(&rat(1, 10), &rat_int(2), &rat_int(4), &Rat::one()).unwrap(), 6);
        assert_eq!(m1_for(&rat_int(1), &rat_int(2)).unwrap(), 2);
        assert!(m1_for(&rat_int(0), &rat_int(2)).is_err());
    }

    #[test]
    fn step1_reaches_e0_with_one_small_defect() {
        let op = comb_op(-10, 8, 7);
        let chain = chain_zero_to_e0(&op, &NormSpec::l2(), &rat(1, 10)).unwrap();
        assert_eq!(chain.len(), 5);
        assert!(chain.first().is_zero());
        assert_eq!(chain.last(), &SeqVector::basis(VertexId::Line(0), Mode::Exact));
        let report = chain.validate().unwrap();
        assert!(report.valid);
        assert_eq!(report.max_defect.exact_value(), Some(&rat(1, 16)));
        // only the first link is perturbed
        assert!(chain.defect(2).unwrap().is_zero());
    }

    #[test]
    fn comb_step2_reaches_zero() {
        let op = comb_op(-10, 8, 7);
        let chain = chain_e0_to_zero_comb(&op, &NormSpec::l2(), &rat(1, 10)).unwrap();
        assert_eq!(chain.len(), 6);
        assert!(chain.last().is_zero());
        let report = chain.validate().unwrap();
        assert!(report.valid);
        assert_eq!(report.max_defect.exact_value(), Some(&rat(1, 16)));
    }

    #[test]
    fn grid_step2_has_two_equal_defects() {
        let op = grid_op();
        let chain = chain_e0_to_zero_grid(&op, &NormSpec::l2(), &rat(1, 10)).unwrap();
        assert_eq!(chain.len(), 11);
        assert!(chain.last().is_zero());
        let report = chain.validate().unwrap();
        assert!(report.valid);
        let nonzero: Vec<&Magnitude> =
            report.defects.iter().filter(|d| !d.is_zero()).collect();
        assert_eq!(nonzero.len(), 2);
        for d in nonzero {
            assert_eq!(d.exact_value(), Some(&rat(1, 16)));
        }
    }

    #[test]
    fn round_trip_returns_to_e0() {
        let op = comb_op(-10, 8, 7);
        let chain = return_chain_e0(&op, &NormSpec::l2(), &rat(1, 10)).unwrap();
        assert_eq!(chain.len(), 11);
        assert_eq!(chain.first(), &SeqVector::basis(VertexId::Line(0), Mode::Exact));
        assert_eq!(chain.last(), &SeqVector::basis(VertexId::Line(0), Mode::Exact));
        assert!(chain.is_valid().unwrap());
    }

    #[test]
    fn basis_chains_land_where_asked() {
        let op = comb_op(-16, 10, 14);
        let norm = NormSpec::l2();
        let d = rat(1, 10);
        for v in [
            VertexId::Line(3),
            VertexId::Line(-2),
            VertexId::Branch(4, 2),
        ] {
            let from = chain_for_basis(&op, &norm, &d, v, Direction::FromZero).unwrap();
            assert!(from.first().is_zero());
            assert_eq!(from.last(), &SeqVector::basis(v, Mode::Exact));
            assert!(from.is_valid().unwrap());

            let to = chain_for_basis(&op, &norm, &d, v, Direction::ToZero).unwrap();
            assert_eq!(to.first(), &SeqVector::basis(v, Mode::Exact));
            assert!(to.last().is_zero());
            assert!(to.is_valid().unwrap());
        }
    }

    #[test]
    fn finger_targets_below_the_reachability_bound_are_rejected() {
        let op = comb_op(-10, 8, 6);
        // reaching e_{(-3,1)} with uniform bumps needs δ·(1+4+4²) > 1
        let err = chain_for_basis(
            &op,
            &NormSpec::l2(),
            &rat(1, 48),
            VertexId::Branch(3, 1),
            Direction::FromZero,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotApplicable(_)));
        let ok = chain_for_basis(
            &op,
            &NormSpec::l2(),
            &rat(1, 20),
            VertexId::Branch(3, 1),
            Direction::FromZero,
        )
        .unwrap();
        assert_eq!(ok.last(), &SeqVector::basis(VertexId::Branch(3, 1), Mode::Exact));
        assert!(ok.is_valid().unwrap());
    }

    #[test]
    fn undersized_windows_are_reported() {
        // Step 2 at δ = 1/10 needs finger row 6
        let op = comb_op(-10, 8, 4);
        let err = chain_e0_to_zero_comb(&op, &NormSpec::l2(), &rat(1, 10)).unwrap_err();
        assert!(matches!(err, Error::UndersizedWindow(_)));
        // Step 1 at δ = 1/10 needs the line up to 4
        let op = comb_op(-10, 2, 7);
        let err = chain_zero_to_e0(&op, &NormSpec::l2(), &rat(1, 10)).unwrap_err();
        assert!(matches!(err, Error::UndersizedWindow(_)));
    }

    #[test]
    fn grid_branch_from_zero() {
        let op = grid_op();
        let chain = chain_for_basis(
            &op,
            &NormSpec::l2(),
            &rat(1, 10),
            VertexId::Branch(3, 1),
            Direction::FromZero,
        )
        .unwrap();
        assert_eq!(chain.last(), &SeqVector::basis(VertexId::Branch(3, 1), Mode::Exact));
        assert!(chain.is_valid().unwrap());
    }
}
