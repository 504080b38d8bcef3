//! Weighted backward shifts on directed trees and the invertible grid
//! operator pair, behind one column-sparse linear-operator interface.
//!
//! Operators are stored column-wise: the image of each basis vector, exactly
//! as the recipes and certificates consume them. Columns whose target
//! vertices fall outside the truncation window are flagged; applying the
//! operator to a vector supported on such a vertex is a leakage error rather
//! than a silently wrong result.

use crate::error::{Error, Result};
use crate::scalar::{rat_to_f64, Rat, Scalar};
use crate::tree::{DirectedTree, TreeKind, VertexId};
use crate::vector::SeqVector;
use num::{One, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

/// One row of a custom grid weight matrix: explicit core values with
/// eventually-constant tails, so the summability conditions stay decidable.
#[derive(Debug, Clone, PartialEq)]
pub struct CustomRow {
    pub core: BTreeMap<i64, Scalar>,
    /// Weight for every j above the stored core.
    pub tail_pos: Scalar,
    /// Weight for every j below the stored core.
    pub tail_neg: Scalar,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridWeights {
    /// The default generator: μ₂ on 1 <= j <= k and on j < -k,
    /// 1/μ₂ on -k <= j <= 0 and on j > k.
    Standard,
    /// Per-branch rows with declared eventually-constant tails; branches
    /// without a stored row follow the default generator.
    Custom(BTreeMap<u32, CustomRow>),
    /// A bare numeric window with no declared tails. Summability is then
    /// undecidable from finitely many terms; checks come back inconclusive.
    Numeric(BTreeMap<(u32, i64), Scalar>),
}

/// The line weight μ₁, the branch weight μ₂ and the grid weight matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightAssignment {
    mu1: Scalar,
    mu2: Scalar,
    grid: GridWeights,
}

/// Constant-tail profile of one grid row: weights equal `tail_neg` for
/// j < j_lo and `tail_pos` for j > j_hi.
#[derive(Debug, Clone)]
pub struct RowProfile {
    pub j_lo: i64,
    pub j_hi: i64,
    pub tail_pos: Scalar,
    pub tail_neg: Scalar,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ClauseStatus {
    /// Convergence decided from the declared constant tail.
    HoldsAnalytic { tail_ratio: f64 },
    FailsAnalytic { tail_ratio: f64 },
    /// Numeric window only: partial sum plus no tail information.
    Inconclusive { partial_sum: f64, terms: u32 },
}

impl ClauseStatus {
    pub fn holds(&self) -> bool {
        matches!(self, ClauseStatus::HoldsAnalytic { .. })
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct RowCondition {
    pub k: u32,
    /// Σ_j |λ_{(-k,1)}···λ_{(-k,j)}| < ∞
    pub clause_forward: ClauseStatus,
    /// Σ_j |λ_{(-k,-(j-1))}···λ_{(-k,0)}|^{-1} < ∞
    pub clause_backward: ClauseStatus,
}

/// Verification record for conditions (continuity bounds and per-branch
/// summability) of a grid weight matrix over a window.
#[derive(Debug, Clone, serde::Serialize)]
pub struct GridWeightReport {
    pub inf_abs: f64,
    pub sup_abs: f64,
    /// Whether inf/sup were derived analytically from the generator rather
    /// than scanned over the window.
    pub analytic_bounds: bool,
    pub rows: Vec<RowCondition>,
}

impl WeightAssignment {
    /// Requires 1 < |μ₁| < |μ₂| (compared exactly through squared moduli).
    pub fn new(mu1: Scalar, mu2: Scalar, grid: GridWeights) -> Result<WeightAssignment> {
        let one = Scalar::one(mu1.mode());
        if !mu1.abs_gt(&one) {
            return Err(Error::WeightOutOfRange(format!("|mu1| = {} must exceed 1", mu1.abs_f64())));
        }
        if !mu2.abs_gt(&mu1) {
            return Err(Error::WeightOutOfRange(format!(
                "need |mu1| < |mu2|, got |mu1| = {}, |mu2| = {}",
                mu1.abs_f64(),
                mu2.abs_f64()
            )));
        }
        Ok(WeightAssignment { mu1, mu2, grid })
    }

    pub fn comb(mu1: Scalar, mu2: Scalar) -> Result<WeightAssignment> {
        WeightAssignment::new(mu1, mu2, GridWeights::Standard)
    }

    pub fn mu1(&self) -> &Scalar {
        &self.mu1
    }

    pub fn mu2(&self) -> &Scalar {
        &self.mu2
    }

    pub fn grid(&self) -> &GridWeights {
        &self.grid
    }

    /// |μ₁| as a rational (exact for exact scalars).
    pub fn mu1_abs(&self) -> Rat {
        self.mu1.abs_rat()
    }

    pub fn mu2_abs(&self) -> Rat {
        self.mu2.abs_rat()
    }

    fn standard_weight(&self, k: u32, j: i64) -> Scalar {
        let k = k as i64;
        if (1 <= j && j <= k) || j < -k {
            self.mu2.clone()
        } else {
            // -k <= j <= 0 or j > k
            self.mu2.recip().expect("mu2 nonzero")
        }
    }

    /// λ_{(-k,j)} of the grid matrix.
    pub fn grid_weight(&self, k: u32, j: i64) -> Result<Scalar> {
        match &self.grid {
            GridWeights::Standard => Ok(self.standard_weight(k, j)),
            GridWeights::Custom(rows) => match rows.get(&k) {
                None => Ok(self.standard_weight(k, j)),
                Some(row) => {
                    if let Some(w) = row.core.get(&j) {
                        return Ok(w.clone());
                    }
                    let lo = row.core.keys().next().copied().unwrap_or(0);
                    let hi = row.core.keys().next_back().copied().unwrap_or(0);
                    if j > hi {
                        Ok(row.tail_pos.clone())
                    } else if j < lo {
                        Ok(row.tail_neg.clone())
                    } else {
                        // gap inside the core
                        Err(Error::MissingWeight(VertexId::Branch(k, j)))
                    }
                }
            },
            GridWeights::Numeric(entries) => entries
                .get(&(k, j))
                .cloned()
                .ok_or(Error::MissingWeight(VertexId::Branch(k, j))),
        }
    }

    /// Tail profile of row k, when the generator declares one.
    pub fn row_profile(&self, k: u32) -> Option<RowProfile> {
        match &self.grid {
            GridWeights::Standard => Some(RowProfile {
                j_lo: -(k as i64),
                j_hi: k as i64,
                tail_pos: self.mu2.recip().expect("mu2 nonzero"),
                tail_neg: self.mu2.clone(),
            }),
            GridWeights::Custom(rows) => match rows.get(&k) {
                None => self.clone_profile_default(k),
                Some(row) => {
                    let lo = row.core.keys().next().copied().unwrap_or(0);
                    let hi = row.core.keys().next_back().copied().unwrap_or(0);
                    Some(RowProfile {
                        j_lo: lo,
                        j_hi: hi,
                        tail_pos: row.tail_pos.clone(),
                        tail_neg: row.tail_neg.clone(),
                    })
                }
            },
            GridWeights::Numeric(_) => None,
        }
    }

    fn clone_profile_default(&self, k: u32) -> Option<RowProfile> {
        Some(RowProfile {
            j_lo: -(k as i64),
            j_hi: k as i64,
            tail_pos: self.mu2.recip().expect("mu2 nonzero"),
            tail_neg: self.mu2.clone(),
        })
    }

    fn clause_from_tail(ratio: f64) -> ClauseStatus {
        if ratio < 1.0 {
            ClauseStatus::HoldsAnalytic { tail_ratio: ratio }
        } else {
            ClauseStatus::FailsAnalytic { tail_ratio: ratio }
        }
    }

    /// Checks the continuity bounds and, per branch, the two summability
    /// clauses over the given window.
    pub fn grid_report(&self, params: &crate::tree::TruncationParams) -> Result<GridWeightReport> {
        let mut inf = f64::INFINITY;
        let mut sup: f64 = 0.0;
        let analytic = !matches!(self.grid, GridWeights::Numeric(_));
        let mut rows = Vec::new();
        for k in 1..=params.k_max {
            for j in params.j_min..=params.j_max {
                let w = self.grid_weight(k, j)?;
                if w.is_zero() {
                    return Err(Error::WeightCondition(format!(
                        "zero weight at (-{k},{j}) violates the positivity bound"
                    )));
                }
                let a = w.abs_f64();
                inf = inf.min(a);
                sup = sup.max(a);
            }
            let condition = match self.row_profile(k) {
                Some(profile) => {
                    if profile.tail_pos.is_zero() || profile.tail_neg.is_zero() {
                        return Err(Error::WeightCondition(format!(
                            "zero tail weight in row {k} violates the positivity bound"
                        )));
                    }
                    let forward = Self::clause_from_tail(profile.tail_pos.abs_f64());
                    let backward = Self::clause_from_tail(1.0 / profile.tail_neg.abs_f64());
                    RowCondition { k, clause_forward: forward, clause_backward: backward }
                }
                None => {
                    // numeric window: partial sums only
                    let mut prod = 1.0f64;
                    let mut s_fwd = 0.0f64;
                    let mut terms = 0u32;
                    for j in 1..=params.j_max {
                        prod *= self.grid_weight(k, j)?.abs_f64();
                        s_fwd += prod;
                        terms += 1;
                    }
                    let mut prod = 1.0f64;
                    let mut s_bwd = 0.0f64;
                    for j in 1..=(-params.j_min) {
                        prod *= self.grid_weight(k, -(j - 1))?.abs_f64();
                        s_bwd += 1.0 / prod;
                    }
                    RowCondition {
                        k,
                        clause_forward: ClauseStatus::Inconclusive { partial_sum: s_fwd, terms },
                        clause_backward: ClauseStatus::Inconclusive { partial_sum: s_bwd, terms },
                    }
                }
            };
            if matches!(condition.clause_forward, ClauseStatus::FailsAnalytic { .. })
                && matches!(condition.clause_backward, ClauseStatus::FailsAnalytic { .. })
            {
                return Err(Error::WeightCondition(format!(
                    "branch {k}: both summability clauses fail (forward tail ratio {:?}, backward {:?})",
                    condition.clause_forward, condition.clause_backward
                )));
            }
            rows.push(condition);
        }
        if params.k_max == 0 {
            inf = self.mu1.abs_f64();
            sup = self.mu1.abs_f64();
        }
        Ok(GridWeightReport { inf_abs: inf, sup_abs: sup, analytic_bounds: analytic, rows })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OpFamily {
    CombShift,
    GridT,
    GridTInverse,
    ClassicalShift,
    Custom,
}

impl std::fmt::Display for OpFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            OpFamily::CombShift => "comb_shift",
            OpFamily::GridT => "grid_t",
            OpFamily::GridTInverse => "grid_t_inverse",
            OpFamily::ClassicalShift => "classical_shift",
            OpFamily::Custom => "custom",
        };
        write!(f, "{s}")
    }
}

type Column = Vec<(VertexId, Scalar)>;

#[derive(Debug, Clone)]
pub struct LinearOp {
    pub family: OpFamily,
    tree: Arc<DirectedTree>,
    weights: Option<WeightAssignment>,
    columns: BTreeMap<VertexId, Column>,
    /// Vertices whose column has a target outside the window.
    leaking: BTreeSet<VertexId>,
}

impl LinearOp {
    pub fn tree(&self) -> &Arc<DirectedTree> {
        &self.tree
    }

    pub fn weights(&self) -> Option<&WeightAssignment> {
        self.weights.as_ref()
    }

    /// The image of e_v as a (vertex, coefficient) list.
    pub fn column(&self, v: &VertexId) -> Result<&[(VertexId, Scalar)]> {
        self.columns
            .get(v)
            .map(|c| c.as_slice())
            .ok_or(Error::UnknownVertex(*v))
    }

    pub fn leaks_at(&self, v: &VertexId) -> bool {
        self.leaking.contains(v)
    }

    fn apply_step(&self, f: &SeqVector, step: usize) -> Result<SeqVector> {
        let mut out: Vec<(VertexId, Scalar)> = Vec::new();
        for (u, c) in f.iter() {
            if self.leaking.contains(u) {
                return Err(Error::LeakageOutOfWindow { vertex: *u, step });
            }
            for (target, w) in self.column(u)? {
                out.push((*target, w.mul(c)?));
            }
        }
        SeqVector::from_entries(out)
    }

    /// Linear extension of the columns; canonical output.
    pub fn apply(&self, f: &SeqVector) -> Result<SeqVector> {
        self.apply_step(f, 0)
    }

    /// n-fold application; n = 0 is the identity. Leakage errors carry the
    /// failing step index.
    pub fn apply_power(&self, f: &SeqVector, n: u32) -> Result<SeqVector> {
        let mut cur = f.clone();
        for step in 0..n {
            cur = self.apply_step(&cur, step as usize)?;
        }
        Ok(cur)
    }

    /// Largest column absolute sum, an operator-norm bound for the ℓ¹-type
    /// pairing on bounded-weight shifts.
    pub fn max_column_abs_sum(&self) -> f64 {
        self.columns
            .values()
            .map(|col| col.iter().map(|(_, w)| w.abs_f64()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Serializable description (family tag, parameters, window).
    pub fn describe(&self) -> serde_json::Value {
        serde_json::json!({
            "family": self.family,
            "window": self.tree.params,
            "mu1": self.weights.as_ref().map(|w| w.mu1().to_string()),
            "mu2": self.weights.as_ref().map(|w| w.mu2().to_string()),
        })
    }
}

/// The weighted backward shift e_u ↦ λ_u · e_{par(u)} with line weight μ₁ and
/// branch weight μ₂.
pub fn shift_from_weights(tree: &Arc<DirectedTree>, weights: &WeightAssignment) -> Result<LinearOp> {
    let violations = tree.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidTree(format!("{violations:?}")));
    }
    let mut columns = BTreeMap::new();
    let mut leaking = BTreeSet::new();
    for v in tree.vertices() {
        let lambda = match v {
            VertexId::Line(_) => weights.mu1().clone(),
            VertexId::Branch(_, _) => weights.mu2().clone(),
        };
        match tree.parent(v) {
            Some(p) => {
                columns.insert(*v, vec![(*p, lambda)]);
            }
            None => {
                // a genuine root maps to 0; a window-cut vertex leaks
                columns.insert(*v, Vec::new());
                if tree.is_cut_parent(v) {
                    leaking.insert(*v);
                }
            }
        }
    }
    let family = match tree.kind {
        TreeKind::Comb => OpFamily::CombShift,
        TreeKind::Line => OpFamily::ClassicalShift,
        TreeKind::Grid => OpFamily::Custom,
    };
    Ok(LinearOp { family, tree: tree.clone(), weights: Some(weights.clone()), columns, leaking })
}

/// A classical shift on a line tree with per-vertex weights λ_n (the column
/// of e_n is λ_n · e_{n-1}).
pub fn classical_shift(
    tree: &Arc<DirectedTree>,
    weight_of: impl Fn(i64) -> Option<Scalar>,
) -> Result<LinearOp> {
    if tree.kind != TreeKind::Line {
        return Err(Error::UnsupportedOperator("classical shift needs a line tree".into()));
    }
    let mut columns = BTreeMap::new();
    let mut leaking = BTreeSet::new();
    for v in tree.vertices() {
        let VertexId::Line(n) = v else { unreachable!() };
        let lambda = weight_of(*n).ok_or(Error::MissingWeight(*v))?;
        match tree.parent(v) {
            Some(p) => {
                if lambda.is_zero() {
                    columns.insert(*v, Vec::new());
                } else {
                    columns.insert(*v, vec![(*p, lambda)]);
                }
            }
            None => {
                columns.insert(*v, Vec::new());
                if tree.is_cut_parent(v) {
                    leaking.insert(*v);
                }
            }
        }
    }
    Ok(LinearOp {
        family: OpFamily::ClassicalShift,
        tree: tree.clone(),
        weights: None,
        columns,
        leaking,
    })
}

/// The invertible operator T on the grid tree:
/// e_n ↦ μ₁·e_{n-1}; e_{(-k,j)} ↦ λ_{(-k,j)}·e_{(-k,j-1)} for j ≠ 1;
/// e_{(-k,1)} ↦ μ₂·(e_{(-k,0)} + e_{-k}).
pub fn build_grid_t(tree: &Arc<DirectedTree>, weights: &WeightAssignment) -> Result<LinearOp> {
    check_grid_tree(tree)?;
    weights.grid_report(&tree.params)?;
    let mut columns = BTreeMap::new();
    let mut leaking = BTreeSet::new();
    for v in tree.vertices() {
        let (column, leaks) = match v {
            VertexId::Line(n) => {
                let target = VertexId::Line(n - 1);
                (vec![(target, weights.mu1().clone())], !tree.contains(&target))
            }
            VertexId::Branch(k, 1) => {
                let b = VertexId::Branch(*k, 0);
                let l = VertexId::Line(-(*k as i64));
                let col = vec![(b, weights.mu2().clone()), (l, weights.mu2().clone())];
                (col, !tree.contains(&b) || !tree.contains(&l))
            }
            VertexId::Branch(k, j) => {
                let target = VertexId::Branch(*k, j - 1);
                let w = weights.grid_weight(*k, *j)?;
                (vec![(target, w)], !tree.contains(&target))
            }
        };
        if leaks {
            leaking.insert(*v);
        }
        columns.insert(*v, column);
    }
    Ok(LinearOp {
        family: OpFamily::GridT,
        tree: tree.clone(),
        weights: Some(weights.clone()),
        columns,
        leaking,
    })
}

/// The explicit inverse of [`build_grid_t`]:
/// e_n ↦ (1/μ₁)·e_{n+1}; e_{(-k,j)} ↦ (1/λ_{(-k,j+1)})·e_{(-k,j+1)} for j ≠ 0;
/// e_{(-k,0)} ↦ (1/μ₂)·e_{(-k,1)} − (1/μ₁)·e_{-k+1}.
pub fn build_grid_t_inverse(
    tree: &Arc<DirectedTree>,
    weights: &WeightAssignment,
) -> Result<LinearOp> {
    check_grid_tree(tree)?;
    weights.grid_report(&tree.params)?;
    let mu1_inv = weights.mu1().recip()?;
    let mu2_inv = weights.mu2().recip()?;
    let mut columns = BTreeMap::new();
    let mut leaking = BTreeSet::new();
    for v in tree.vertices() {
        let (column, leaks) = match v {
            VertexId::Line(n) => {
                let target = VertexId::Line(n + 1);
                (vec![(target, mu1_inv.clone())], !tree.contains(&target))
            }
            VertexId::Branch(k, 0) => {
                let b = VertexId::Branch(*k, 1);
                let l = VertexId::Line(-(*k as i64) + 1);
                let col = vec![(b, mu2_inv.clone()), (l, mu1_inv.neg())];
                (col, !tree.contains(&b) || !tree.contains(&l))
            }
            VertexId::Branch(k, j) => {
                let target = VertexId::Branch(*k, j + 1);
                let w = weights.grid_weight(*k, j + 1)?.recip()?;
                (vec![(target, w)], !tree.contains(&target))
            }
        };
        if leaks {
            leaking.insert(*v);
        }
        columns.insert(*v, column);
    }
    Ok(LinearOp {
        family: OpFamily::GridTInverse,
        tree: tree.clone(),
        weights: Some(weights.clone()),
        columns,
        leaking,
    })
}

fn check_grid_tree(tree: &DirectedTree) -> Result<()> {
    if tree.kind != TreeKind::Grid {
        return Err(Error::UnsupportedOperator("grid operator needs a grid tree".into()));
    }
    Ok(())
}

/// Exact-mode check that `first ∘ second` fixes e_v for every given vertex.
pub fn compose_is_identity_on<'a>(
    first: &LinearOp,
    second: &LinearOp,
    vertices: impl IntoIterator<Item = &'a VertexId>,
) -> Result<bool> {
    for v in vertices {
        let e = SeqVector::basis(*v, crate::scalar::Mode::Exact);
        let image = first.apply(&second.apply(&e)?)?;
        if image != e {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Geometric series helper used by the certificate tail bounds:
/// Σ_{i>=1} a·r^i = a·r/(1-r), requiring 0 <= r < 1.
pub fn geometric_tail(a: &Rat, r: &Rat) -> Result<Rat> {
    if r < &Rat::zero() || r >= &Rat::one() {
        return Err(Error::WeightCondition(format!(
            "geometric tail ratio {} not in [0,1)",
            rat_to_f64(r)
        )));
    }
    Ok(a * r / (Rat::one() - r))
}
