//! Non-reachability certificates: exact δ thresholds below which no chain
//! from 0 can produce a given branch coordinate, plus a seeded random search
//! that tries (and, below the threshold, provably fails) to beat them.
//!
//! The certificate argument: over an m-link chain every bump moves the target
//! coordinate by less than δ times its influence weight, so
//! |f_m(target)| < δ·Σ_d w_d. Bounding the influence series S from above
//! yields the threshold δ̄ = |f(target)|/S.

use crate::chain::DeltaChain;
use crate::error::{Error, Result};
use crate::norm::NormSpec;
use crate::operator::{geometric_tail, LinearOp, OpFamily, WeightAssignment};
use crate::oracle::InfluenceRow;
use crate::scalar::{rat_to_f64, Mode, Rat, Scalar};
use crate::tree::VertexId;
use crate::vector::SeqVector;
use num::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// A non-reachability verdict: for every δ <= `bound`, no δ-chain from 0
/// reaches the recorded coordinate.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Certificate {
    pub target: VertexId,
    pub target_abs: String,
    /// δ̄ as an exact rational string.
    pub bound: String,
    pub bound_f64: f64,
    pub case_label: String,
    pub derivation: Vec<String>,
}

impl Certificate {
    pub fn bound_rat(&self) -> Rat {
        crate::scalar::rat_from_decimal(&self.bound).expect("stored as a rational literal")
    }
}

fn branch_support(f: &SeqVector) -> Vec<(u32, i64, Rat)> {
    f.iter()
        .filter_map(|(v, c)| match v {
            VertexId::Branch(k, j) => Some((*k, *j, c.abs_rat())),
            VertexId::Line(_) => None,
        })
        .collect()
}

/// Comb-tree certificate: a finger coordinate at (-k,j) has influence sum
/// at most (k-j+1)·|μ₂|^(k-j), so f is unreachable from 0 for every
/// δ <= max_k |f(-k,j)| / ((k-j+1)·|μ₂|^(k-j)). The maximizing finger entry
/// is reported.
pub fn noncr_bound_comb(weights: &WeightAssignment, f: &SeqVector) -> Result<Certificate> {
    let entries = branch_support(f);
    if entries.is_empty() {
        return Err(Error::NotApplicable(
            "certificate needs a finger coordinate; line coordinates are reachable".into(),
        ));
    }
    let b = weights.mu2_abs();
    let mut best: Option<(VertexId, Rat, Rat)> = None;
    for (k, j, abs) in entries {
        if j < 1 || j > k as i64 {
            return Err(Error::InvalidTree(format!("(-{k},{j}) is not a comb finger vertex")));
        }
        let depth = (k as i64 - j) as u32;
        let mut denom = Rat::from_integer((depth as i64 + 1).into());
        for _ in 0..depth {
            denom *= &b;
        }
        let bound = &abs / &denom;
        let better = best
            .as_ref()
            .map(|(_, _, cur)| &bound > cur)
            .unwrap_or(true);
        if better {
            best = Some((VertexId::Branch(k, j), abs, bound));
        }
    }
    let (target, abs, bound) = best.expect("nonempty support");
    let VertexId::Branch(k, j) = target else { unreachable!() };
    let depth = k as i64 - j;
    Ok(Certificate {
        target,
        target_abs: abs.to_string(),
        bound: bound.to_string(),
        bound_f64: rat_to_f64(&bound),
        case_label: "comb finger".into(),
        derivation: vec![
            format!("finger entry |f({target})| = {abs}"),
            format!(
                "influence sum over the finger is at most ({depth}+1)·|mu2|^{depth} = {}",
                &abs / &bound
            ),
            format!("delta_bar = {bound}"),
        ],
    })
}

/// Exact influence series S(k,j) = Σ_{d>=0} Π_{i=1..d} |λ_{(-k,j+i)}| for a
/// grid branch coordinate, summing the declared constant tail in closed form.
pub fn grid_influence_series(weights: &WeightAssignment, k: u32, j: i64) -> Result<Rat> {
    let profile = weights
        .row_profile(k)
        .ok_or_else(|| Error::NotApplicable("numeric weights carry no tail information".into()))?;
    let mut sum = Rat::one();
    let mut prod = Rat::one();
    let mut depth_j = j;
    // finite part until the weights turn constant
    while depth_j < profile.j_hi {
        depth_j += 1;
        prod *= weights.grid_weight(k, depth_j)?.abs_rat();
        sum += &prod;
    }
    let r = profile.tail_pos.abs_rat();
    if r >= Rat::one() {
        return Err(Error::WeightCondition(format!(
            "row {k} upward tail has |λ| = {} >= 1; the influence series diverges",
            rat_to_f64(&r)
        )));
    }
    sum += geometric_tail(&prod, &r)?;
    Ok(sum)
}

/// Exact reciprocal series R(k,j) = Σ_{d>=1} |λ_{(-k,j-d+1)}···λ_{(-k,j)}|^{-1}
/// for a grid branch coordinate, summing the declared constant tail in closed
/// form. Requires |tail| > 1 downward and no zero weight on the way.
pub fn grid_reciprocal_series(weights: &WeightAssignment, k: u32, j: i64) -> Result<Rat> {
    let profile = weights
        .row_profile(k)
        .ok_or_else(|| Error::NotApplicable("numeric weights carry no tail information".into()))?;
    let tail = profile.tail_neg.abs_rat();
    if tail <= Rat::one() {
        return Err(Error::WeightCondition(format!(
            "row {k} downward tail has |λ| = {} <= 1; the reciprocal series diverges",
            rat_to_f64(&tail)
        )));
    }
    let mut sum = Rat::zero();
    let mut prod = Rat::one();
    let mut pos = j;
    loop {
        let w = weights.grid_weight(k, pos)?.abs_rat();
        if w.is_zero() {
            return Err(Error::WeightCondition(format!(
                "zero weight at (-{k},{pos}) makes a reciprocal term infinite"
            )));
        }
        prod *= w;
        sum += prod.recip();
        if pos <= profile.j_lo {
            break;
        }
        pos -= 1;
    }
    sum += geometric_tail(&prod.recip(), &tail.recip())?;
    Ok(sum)
}

/// Grid certificate for a branch coordinate at (-k,j). Two admissible
/// denominators, one per summability clause of the weight matrix: case 1
/// divides by the upward influence series 1 + Σ_d |λ_{j+1}···λ_{j+d}| (needs
/// a convergent upward tail), case 2 by the downward reciprocal series
/// Σ_d |λ_{j-d+1}···λ_j|^{-1} (needs a divergent downward tail). Every
/// admissible case yields a valid bound; the certificate keeps the larger
/// one per entry and the maximizing entry overall, recording the alternative.
pub fn noncr_bound_grid(weights: &WeightAssignment, f: &SeqVector) -> Result<Certificate> {
    let entries = branch_support(f);
    if entries.is_empty() {
        return Err(Error::NotApplicable(
            "certificate needs a branch coordinate; line coordinates are reachable".into(),
        ));
    }
    struct Cand {
        target: VertexId,
        abs: Rat,
        bound: Rat,
        label: &'static str,
        series: Rat,
        alt: Option<(&'static str, Rat)>,
    }
    let mut best: Option<Cand> = None;
    for (k, j, abs) in entries {
        let ascending = grid_influence_series(weights, k, j);
        let descending = grid_reciprocal_series(weights, k, j);
        let mut cases: Vec<(&'static str, Rat)> = Vec::new();
        match (ascending, descending) {
            (Ok(s1), Ok(s2)) => {
                cases.push(("case 1 (upward influence series)", s1));
                cases.push(("case 2 (downward reciprocal series)", s2));
            }
            (Ok(s1), Err(_)) => cases.push(("case 1 (upward influence series)", s1)),
            (Err(_), Ok(s2)) => cases.push(("case 2 (downward reciprocal series)", s2)),
            (Err(e), Err(_)) => return Err(e),
        }
        cases.sort_by(|(_, a), (_, b)| (&abs / a).cmp(&(&abs / b)));
        let (label, series) = cases.pop().expect("at least one admissible case");
        let alt = cases.pop().map(|(l, s)| (l, &abs / &s));
        let bound = &abs / &series;
        let better = best
            .as_ref()
            .map(|cur| bound > cur.bound)
            .unwrap_or(true);
        if better {
            best = Some(Cand { target: VertexId::Branch(k, j), abs, bound, label, series, alt });
        }
    }
    let c = best.expect("nonempty support");
    let mut derivation = vec![
        format!("branch entry |f({})| = {}", c.target, c.abs),
        format!("{}: S = {} (geometric tail summed in closed form)", c.label, c.series),
        format!("delta_bar = {}", c.bound),
    ];
    if let Some((label, alt_bound)) = c.alt {
        derivation.push(format!("alternative {label} gives the weaker bound {alt_bound}"));
    }
    Ok(Certificate {
        target: c.target,
        target_abs: c.abs.to_string(),
        bound: c.bound.to_string(),
        bound_f64: rat_to_f64(&c.bound),
        case_label: c.label.into(),
        derivation,
    })
}

/// Certificate dispatch by operator family.
pub fn noncr_bound(op: &LinearOp, f: &SeqVector) -> Result<Certificate> {
    let weights = op
        .weights()
        .ok_or_else(|| Error::UnsupportedOperator("certificate needs mu-weighted operator".into()))?;
    match op.family {
        OpFamily::CombShift => noncr_bound_comb(weights, f),
        OpFamily::GridT => noncr_bound_grid(weights, f),
        other => Err(Error::UnsupportedOperator(other.to_string())),
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SearchReport {
    pub trials: u32,
    pub seed: u64,
    pub delta: f64,
    pub target: VertexId,
    pub target_abs: f64,
    /// Largest |f_m(target)| any trial produced.
    pub best_reached: f64,
    pub succeeded: bool,
}

/// Seeded random search for a chain 0 → (coordinate of modulus
/// `target_abs` at `target`). Each trial picks a random length and places a
/// random influence-aligned bump of size just under δ at every link. Returns
/// the best coordinate modulus reached; succeeds when it matches the target.
/// Deterministic in `seed`.
pub fn random_reach_search(
    op: &Arc<LinearOp>,
    norm: &NormSpec,
    delta: &Rat,
    target: VertexId,
    target_abs: f64,
    max_len: u32,
    trials: u32,
    seed: u64,
) -> Result<SearchReport> {
    if delta <= &Rat::zero() {
        return Err(Error::NonPositiveDelta);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let delta_f = rat_to_f64(delta);

    // influence rows per remaining depth, shared across trials
    let mut rows: Vec<InfluenceRow> = Vec::with_capacity(max_len as usize);
    let mut row = InfluenceRow::at_target(op, target)?;
    for _ in 0..max_len {
        rows.push(row.clone());
        row.step(op)?;
    }

    let mut best = 0.0f64;
    let mut succeeded = false;
    for _ in 0..trials {
        let m = rng.gen_range(2..=max_len.max(2));
        let mut f = SeqVector::zero();
        let mut vectors = vec![f.clone()];
        let mut ok = true;
        for l in 1..=m {
            f = match op.apply(&f) {
                Ok(v) => v,
                Err(_) => {
                    ok = false;
                    break;
                }
            };
            let remaining = (m - l) as usize;
            let row = &rows[remaining.min(rows.len() - 1)];
            let sites: Vec<(VertexId, f64)> = row
                .support()
                .map(|(v, c)| (*v, c.to_f64()))
                .collect();
            if !sites.is_empty() {
                let (site, coeff) = sites[rng.gen_range(0..sites.len())];
                // align the bump with its influence, strictly below δ
                let share = crate::scalar::rat(rng.gen_range(500i64..=999), 1000);
                let mut size = delta * share;
                if coeff < 0.0 {
                    size = -size;
                }
                let bump = SeqVector::basis(site, Mode::Exact)
                    .scale(&Scalar::Rational(size))
                    .expect("same mode");
                f = match f.add(&bump) {
                    Ok(v) => v,
                    Err(_) => {
                        ok = false;
                        break;
                    }
                };
            }
            vectors.push(f.clone());
        }
        if !ok {
            continue;
        }
        let reached = f.get(&target).abs_f64();
        if reached > best {
            best = reached;
        }
        if !succeeded && reached >= target_abs {
            // confirm the witness really is a δ-chain before claiming success
            let chain = DeltaChain::new(op.clone(), norm.clone(), delta.clone(), vectors)?;
            if chain.is_valid()? {
                succeeded = true;
            }
        }
    }
    Ok(SearchReport {
        trials,
        seed,
        delta: delta_f,
        target,
        target_abs,
        best_reached: best,
        succeeded,
    })
}
