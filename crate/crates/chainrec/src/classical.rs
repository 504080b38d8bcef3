//! Classification of classical weighted backward shifts on the line.
//!
//! A shift is chain recurrent exactly when both weight-product series
//! diverge: the forward series Σ_n |λ_{n0+1}···λ_{n0+n}|/‖e_{n0+n}‖_k and the
//! backward series Σ_n 1/(|λ_{n0-(n-1)}···λ_{n0}|·‖e_{n0-n}‖_k), with the
//! convention c/0 = ∞ (a vanishing product or seminorm makes a term, hence
//! the series, infinite). The verdict does not depend on the anchor n0.
//!
//! Weight sequences carry explicit constant tails, so divergence is decided
//! by an exact ratio test rather than truncated numerics; partial sums are
//! still exposed for cross-checking.

use crate::error::{Error, Result};
use crate::operator::{classical_shift, LinearOp};
use crate::scalar::{rat_to_f64, Rat, Scalar};
use crate::tree::{build_line_tree, DirectedTree, TruncationParams};
use num::One;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftKind {
    /// Index set ℕ with a root at 0; weights λ_n for n >= 1.
    Unilateral,
    /// Index set ℤ.
    Bilateral,
}

/// The ambient sequence space, as far as the criterion needs it: on a Banach
/// space every ‖e_n‖_k is 1; in the product topology ‖e_n‖_k vanishes once n
/// leaves the k-th exhaustion set, so both series diverge trivially.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    Banach,
    Product,
}

/// Weight sequence with declared constant tails: λ_n = core[n] when stored,
/// `right_tail` for n above the core, `left_tail` below.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSeq {
    core: BTreeMap<i64, Scalar>,
    left_tail: Scalar,
    right_tail: Scalar,
}

/// The zero set J = {n : λ_n = 0} of a weight sequence.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ZeroSet {
    pub finite: BTreeSet<i64>,
    pub unbounded_above: bool,
    pub unbounded_below: bool,
}

impl ZeroSet {
    pub fn is_empty(&self) -> bool {
        self.finite.is_empty() && !self.unbounded_above && !self.unbounded_below
    }
}

impl WeightSeq {
    pub fn constant(lambda: Scalar) -> WeightSeq {
        WeightSeq { core: BTreeMap::new(), left_tail: lambda.clone(), right_tail: lambda }
    }

    pub fn with_core(
        core: BTreeMap<i64, Scalar>,
        left_tail: Scalar,
        right_tail: Scalar,
    ) -> WeightSeq {
        WeightSeq { core, left_tail, right_tail }
    }

    /// Constant λ except for a single zero at `n0`.
    pub fn single_zero(lambda: Scalar, n0: i64) -> WeightSeq {
        let mode = lambda.mode();
        let core = BTreeMap::from([(n0, Scalar::zero(mode))]);
        WeightSeq { core, left_tail: lambda.clone(), right_tail: lambda }
    }

    pub fn at(&self, n: i64) -> Scalar {
        if let Some(w) = self.core.get(&n) {
            return w.clone();
        }
        let lo = self.core.keys().next().copied();
        let hi = self.core.keys().next_back().copied();
        match (lo, hi) {
            (Some(lo), _) if n < lo => self.left_tail.clone(),
            (_, Some(hi)) if n > hi => self.right_tail.clone(),
            (None, None) => self.right_tail.clone(),
            _ => self.right_tail.clone(), // gap inside the core: treated as tail
        }
    }

    pub fn zero_set(&self) -> ZeroSet {
        ZeroSet {
            finite: self
                .core
                .iter()
                .filter(|(_, w)| w.is_zero())
                .map(|(n, _)| *n)
                .collect(),
            unbounded_above: self.right_tail.is_zero(),
            unbounded_below: self.left_tail.is_zero(),
        }
    }

    pub fn right_tail_abs(&self) -> Rat {
        self.right_tail.abs_rat()
    }

    pub fn left_tail_abs(&self) -> Rat {
        self.left_tail.abs_rat()
    }
}

#[derive(Debug, Clone)]
pub struct ClassicalShift {
    pub kind: ShiftKind,
    pub space: SpaceKind,
    pub weights: WeightSeq,
}

impl ClassicalShift {
    pub fn new(kind: ShiftKind, space: SpaceKind, weights: WeightSeq) -> ClassicalShift {
        ClassicalShift { kind, space, weights }
    }

    /// Windowed operator realization for chain experiments.
    pub fn build_op(&self, n_min: i64, n_max: i64) -> Result<Arc<LinearOp>> {
        let (tree, lo) = self.window_tree(n_min, n_max)?;
        let weights = self.weights.clone();
        let kind = self.kind;
        let op = classical_shift(&Arc::new(tree), move |n| {
            if kind == ShiftKind::Unilateral && n == lo {
                // the root has no parent edge; any value works, use 1
                return Some(Scalar::one(weights.at(1).mode()));
            }
            Some(weights.at(n))
        })?;
        Ok(Arc::new(op))
    }

    fn window_tree(&self, n_min: i64, n_max: i64) -> Result<(DirectedTree, i64)> {
        match self.kind {
            ShiftKind::Unilateral => {
                let lo = n_min.max(0);
                Ok((build_line_tree(TruncationParams::line(lo, n_max), lo == 0)?, lo))
            }
            ShiftKind::Bilateral => {
                Ok((build_line_tree(TruncationParams::line(n_min, n_max), false)?, n_min))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    ChainRecurrent,
    NotChainRecurrent,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SeriesVerdict {
    pub diverges: bool,
    pub reason: String,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SeriesCheck {
    pub n0: i64,
    pub forward: SeriesVerdict,
    pub backward: SeriesVerdict,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ClassificationReport {
    pub verdict: Classification,
    pub checks: Vec<SeriesCheck>,
    pub n0_invariant: bool,
    /// For NotChainRecurrent: a positive δ below which e_0 admits no return
    /// chain, the m → ∞ infimum of the per-horizon reachability bound. A
    /// convergent backward series with tail |λ| > 1 gives |λ| − 1; a
    /// convergent forward series with tail |λ| < 1 gives 1 − |λ|.
    pub bound: Option<String>,
    pub bound_f64: Option<f64>,
}

fn forward_verdict(shift: &ClassicalShift, n0: i64) -> SeriesVerdict {
    if shift.space == SpaceKind::Product {
        return SeriesVerdict {
            diverges: true,
            reason: "‖e_n‖_k vanishes beyond the k-th exhaustion set; c/0 = ∞".into(),
        };
    }
    // a zero weight above n0 kills all later products: finite sum
    let zeros = shift.weights.zero_set();
    if zeros.unbounded_above || zeros.finite.iter().any(|z| *z > n0) {
        return SeriesVerdict {
            diverges: false,
            reason: "a zero weight above n0 truncates the forward products".into(),
        };
    }
    let r = shift.weights.right_tail_abs();
    if r >= Rat::one() {
        SeriesVerdict {
            diverges: true,
            reason: format!("forward tail |λ| = {} >= 1: terms do not decay", rat_to_f64(&r)),
        }
    } else {
        SeriesVerdict {
            diverges: false,
            reason: format!("forward tail |λ| = {} < 1: geometric decay", rat_to_f64(&r)),
        }
    }
}

fn backward_verdict(shift: &ClassicalShift, n0: i64) -> SeriesVerdict {
    if shift.space == SpaceKind::Product {
        return SeriesVerdict {
            diverges: true,
            reason: "‖e_n‖_k vanishes beyond the k-th exhaustion set; c/0 = ∞".into(),
        };
    }
    if shift.kind == ShiftKind::Unilateral {
        return SeriesVerdict {
            diverges: true,
            reason: "backward products leave ℕ; missing weights count as 0 and c/0 = ∞".into(),
        };
    }
    let zeros = shift.weights.zero_set();
    if zeros.unbounded_below || zeros.finite.iter().any(|z| *z <= n0) {
        return SeriesVerdict {
            diverges: true,
            reason: "a zero weight at or below n0 makes a term infinite (c/0 = ∞)".into(),
        };
    }
    let l = shift.weights.left_tail_abs();
    if l <= Rat::one() {
        SeriesVerdict {
            diverges: true,
            reason: format!("backward tail |λ| = {} <= 1: reciprocal terms do not decay", rat_to_f64(&l)),
        }
    } else {
        SeriesVerdict {
            diverges: false,
            reason: format!("backward tail |λ| = {} > 1: reciprocal geometric decay", rat_to_f64(&l)),
        }
    }
}

/// Chain recurrence classification: the shift is chain recurrent iff both
/// series diverge. Swept over every anchor in `n0_range` (clamped to valid
/// indices for unilateral shifts); the verdict must agree across the sweep.
/// Shifts with zero weights are routed to [`zero_weight_analysis`].
pub fn classify_classical(
    shift: &ClassicalShift,
    n0_range: std::ops::RangeInclusive<i64>,
) -> Result<ClassificationReport> {
    let zeros = shift.weights.zero_set();
    if shift.space == SpaceKind::Banach && !zeros.is_empty() {
        let witness = zeros
            .finite
            .iter()
            .next()
            .copied()
            .unwrap_or(if zeros.unbounded_above { i64::MAX } else { i64::MIN });
        return Err(Error::ZeroWeight(witness));
    }
    let mut checks = Vec::new();
    let mut verdicts = BTreeSet::new();
    for n0 in n0_range {
        let n0 = if shift.kind == ShiftKind::Unilateral { n0.max(0) } else { n0 };
        let fwd = forward_verdict(shift, n0);
        let bwd = backward_verdict(shift, n0);
        let v = fwd.diverges && bwd.diverges;
        verdicts.insert(v);
        checks.push(SeriesCheck { n0, forward: fwd, backward: bwd });
    }
    if checks.is_empty() {
        return Err(Error::NotApplicable("empty n0 range".into()));
    }
    let n0_invariant = verdicts.len() == 1;
    if !n0_invariant {
        return Err(Error::NotApplicable(
            "series verdicts disagree across n0; the tail declaration is inconsistent".into(),
        ));
    }
    let verdict = if verdicts.contains(&true) {
        Classification::ChainRecurrent
    } else {
        Classification::NotChainRecurrent
    };
    let bound = match verdict {
        Classification::ChainRecurrent => None,
        Classification::NotChainRecurrent => {
            let mut cands: Vec<Rat> = Vec::new();
            let r = shift.weights.right_tail_abs();
            if r < Rat::one() {
                cands.push(Rat::one() - r);
            }
            let l = shift.weights.left_tail_abs();
            if shift.kind == ShiftKind::Bilateral && l > Rat::one() {
                cands.push(l - Rat::one());
            }
            cands.into_iter().max()
        }
    };
    Ok(ClassificationReport {
        verdict,
        checks,
        n0_invariant,
        bound_f64: bound.as_ref().map(rat_to_f64),
        bound: bound.map(|b| b.to_string()),
    })
}

/// Partial sums of one criterion series, for numeric cross-checks against the
/// exact ratio-test verdicts. Infinite terms saturate to f64::INFINITY.
pub fn criterion_partial_sums(
    shift: &ClassicalShift,
    n0: i64,
    backward: bool,
    terms: u32,
) -> Vec<f64> {
    let mut sums = Vec::with_capacity(terms as usize);
    let mut acc = 0.0f64;
    let mut prod = 1.0f64;
    for n in 1..=terms as i64 {
        let term = if backward {
            let idx = n0 - (n - 1);
            let lam = if shift.kind == ShiftKind::Unilateral && idx < 1 {
                0.0
            } else {
                shift.weights.at(idx).abs_f64()
            };
            prod *= lam;
            if prod == 0.0 {
                f64::INFINITY
            } else {
                1.0 / prod
            }
        } else {
            prod *= shift.weights.at(n0 + n).abs_f64();
            prod
        };
        acc += term;
        sums.push(acc);
    }
    sums
}

/// Span descriptor for the chain recurrent set of a shift with zero weights.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CrSubspace {
    ZeroOnly,
    Whole,
    /// The closed span of {e_n : n >= from}.
    TailSpan { from: i64 },
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ZeroWeightReport {
    pub zero_set: ZeroSet,
    pub cr_subspace: CrSubspace,
    /// Verdict for T restricted to the invariant tail span, when one exists.
    pub restriction: Option<RestrictionVerdict>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct RestrictionVerdict {
    pub from: i64,
    pub verdict: Classification,
}

/// Chain recurrent set of a shift whose zero set J is nonempty. A zero at n
/// makes span{e_m : m >= n} invariant; the restriction there is a unilateral
/// shift with the remaining weights. With J unbounded above every tail span
/// is chopped again, leaving {0}.
pub fn zero_weight_analysis(shift: &ClassicalShift) -> Result<ZeroWeightReport> {
    let zeros = shift.weights.zero_set();
    if zeros.is_empty() {
        return Err(Error::NotApplicable("no zero weights; use the classifier".into()));
    }
    if shift.space == SpaceKind::Product {
        return Ok(ZeroWeightReport {
            zero_set: zeros,
            cr_subspace: CrSubspace::Whole,
            restriction: None,
        });
    }
    if zeros.unbounded_above {
        return Ok(ZeroWeightReport {
            zero_set: zeros,
            cr_subspace: CrSubspace::ZeroOnly,
            restriction: None,
        });
    }
    let from = *zeros.finite.iter().next_back().expect("nonempty without unbounded_above");
    // restriction to span{e_n : n >= from} is unilateral rooted at `from`
    let restricted = ClassicalShift::new(
        ShiftKind::Unilateral,
        shift.space,
        shift.weights.clone(),
    );
    let fwd = forward_verdict(&restricted, from);
    let verdict = if fwd.diverges {
        Classification::ChainRecurrent
    } else {
        Classification::NotChainRecurrent
    };
    let cr_subspace = match verdict {
        Classification::ChainRecurrent => CrSubspace::TailSpan { from },
        Classification::NotChainRecurrent => CrSubspace::ZeroOnly,
    };
    Ok(ZeroWeightReport {
        zero_set: zeros,
        cr_subspace,
        restriction: Some(RestrictionVerdict { from, verdict }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int, Mode};

    fn two() -> Scalar {
        Scalar::Rational(rat_int(2))
    }

    #[test]
    fn unweighted_bilateral_is_chain_recurrent() {
        let s = ClassicalShift::new(
            ShiftKind::Bilateral,
            SpaceKind::Banach,
            WeightSeq::constant(Scalar::Rational(rat_int(1))),
        );
        let r = classify_classical(&s, -5..=5).unwrap();
        assert_eq!(r.verdict, Classification::ChainRecurrent);
        assert!(r.n0_invariant);
    }

    #[test]
    fn doubling_unilateral_recurrent_bilateral_not() {
        let uni = ClassicalShift::new(ShiftKind::Unilateral, SpaceKind::Banach, WeightSeq::constant(two()));
        assert_eq!(classify_classical(&uni, -5..=5).unwrap().verdict, Classification::ChainRecurrent);

        let bi = ClassicalShift::new(ShiftKind::Bilateral, SpaceKind::Banach, WeightSeq::constant(two()));
        let r = classify_classical(&bi, -5..=5).unwrap();
        assert_eq!(r.verdict, Classification::NotChainRecurrent);
        // forward diverges, backward converges
        assert!(r.checks[0].forward.diverges);
        assert!(!r.checks[0].backward.diverges);
        // infimum of the return bound: |λ| − 1 = 1
        assert_eq!(r.bound.as_deref(), Some("1"));
    }

    #[test]
    fn small_weights_fail_the_forward_series() {
        let s = ClassicalShift::new(
            ShiftKind::Unilateral,
            SpaceKind::Banach,
            WeightSeq::constant(Scalar::Rational(rat(1, 2))),
        );
        assert_eq!(classify_classical(&s, 0..=5).unwrap().verdict, Classification::NotChainRecurrent);
    }

    #[test]
    fn product_space_makes_everything_recurrent() {
        let s = ClassicalShift::new(ShiftKind::Bilateral, SpaceKind::Product, WeightSeq::constant(two()));
        assert_eq!(classify_classical(&s, -5..=5).unwrap().verdict, Classification::ChainRecurrent);
    }

    #[test]
    fn zero_weights_are_routed_to_the_analyzer() {
        let s = ClassicalShift::new(
            ShiftKind::Bilateral,
            SpaceKind::Banach,
            WeightSeq::single_zero(two(), 3),
        );
        assert!(matches!(classify_classical(&s, -5..=5), Err(Error::ZeroWeight(3))));

        let r = zero_weight_analysis(&s).unwrap();
        assert_eq!(r.cr_subspace, CrSubspace::TailSpan { from: 3 });
        assert_eq!(r.restriction.unwrap().verdict, Classification::ChainRecurrent);
    }

    #[test]
    fn single_zero_with_small_tail_collapses_to_zero() {
        let s = ClassicalShift::new(
            ShiftKind::Bilateral,
            SpaceKind::Banach,
            WeightSeq::single_zero(Scalar::Rational(rat(1, 2)), 3),
        );
        let r = zero_weight_analysis(&s).unwrap();
        assert_eq!(r.cr_subspace, CrSubspace::ZeroOnly);
        assert_eq!(r.restriction.unwrap().verdict, Classification::NotChainRecurrent);
    }

    #[test]
    fn unbounded_zero_set_collapses_to_zero() {
        let s = ClassicalShift::new(
            ShiftKind::Bilateral,
            SpaceKind::Banach,
            WeightSeq::with_core(BTreeMap::new(), two(), Scalar::zero(Mode::Exact)),
        );
        let r = zero_weight_analysis(&s).unwrap();
        assert!(r.zero_set.unbounded_above);
        assert_eq!(r.cr_subspace, CrSubspace::ZeroOnly);
    }

    #[test]
    fn partial_sums_track_the_exact_verdicts() {
        let bi = ClassicalShift::new(ShiftKind::Bilateral, SpaceKind::Banach, WeightSeq::constant(two()));
        let fwd = criterion_partial_sums(&bi, 0, false, 30);
        assert!(fwd.last().unwrap() > &1e8); // diverging
        let bwd = criterion_partial_sums(&bi, 0, true, 60);
        assert!((bwd.last().unwrap() - 1.0).abs() < 1e-9); // Σ 2^{-n} → 1

        let uni = ClassicalShift::new(ShiftKind::Unilateral, SpaceKind::Banach, WeightSeq::constant(two()));
        let bwd = criterion_partial_sums(&uni, 2, true, 10);
        assert!(bwd.last().unwrap().is_infinite());
    }

    #[test]
    fn operator_realization_uses_the_sequence() {
        use crate::tree::VertexId;
        use crate::vector::SeqVector;
        let s = ClassicalShift::new(ShiftKind::Bilateral, SpaceKind::Banach, WeightSeq::constant(two()));
        let op = s.build_op(-6, 6).unwrap();
        let img = op
            .apply(&SeqVector::basis(VertexId::Line(2), Mode::Exact))
            .unwrap();
        assert_eq!(img.get(&VertexId::Line(1)), two());
    }
}
