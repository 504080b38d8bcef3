//! Norms, seminorm exhaustions and the F-norm.
//!
//! Norm values are [`Magnitude`]s: exact rationals where the arithmetic
//! allows it (sup norms, single-support vectors, the dyadic F-norm series)
//! and exact p-th powers for integer-p sums, so that strict chain-validity
//! comparisons against a rational tolerance never round.

use crate::error::{Error, Result};
use crate::scalar::{rat_to_f64, Rat};
use crate::tree::{DirectedTree, VertexId};
use crate::vector::SeqVector;
use num::{One, ToPrimitive, Zero};
use std::collections::BTreeSet;
use std::sync::Arc;

/// A nonnegative real norm value.
#[derive(Debug, Clone, PartialEq)]
pub enum Magnitude {
    /// The value itself, exactly.
    Exact(Rat),
    /// The value is sum^(1/p), with the p-th power held exactly.
    ExactPow { sum: Rat, p: u32 },
    Approx(f64),
}

impl Magnitude {
    pub fn zero() -> Magnitude {
        Magnitude::Exact(Rat::zero())
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Magnitude::Exact(r) => rat_to_f64(r),
            Magnitude::ExactPow { sum, p } => rat_to_f64(sum).powf(1.0 / *p as f64),
            Magnitude::Approx(x) => *x,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Magnitude::Exact(r) => r.is_zero(),
            Magnitude::ExactPow { sum, .. } => sum.is_zero(),
            Magnitude::Approx(x) => *x == 0.0,
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, Magnitude::Approx(_))
    }

    /// As an exact rational, when the value itself (not just a power) is held.
    pub fn exact_value(&self) -> Option<&Rat> {
        match self {
            Magnitude::Exact(r) => Some(r),
            _ => None,
        }
    }

    fn pow_rat(r: &Rat, p: u32) -> Rat {
        let mut acc = Rat::one();
        for _ in 0..p {
            acc *= r;
        }
        acc
    }

    /// Strict comparison against a nonnegative rational threshold. Exact when
    /// the magnitude is exact; f64 otherwise.
    pub fn lt_rat(&self, threshold: &Rat) -> bool {
        match self {
            Magnitude::Exact(r) => r < threshold,
            Magnitude::ExactPow { sum, p } => {
                if threshold < &Rat::zero() {
                    false
                } else {
                    sum < &Magnitude::pow_rat(threshold, *p)
                }
            }
            Magnitude::Approx(x) => *x < rat_to_f64(threshold),
        }
    }

    pub fn ge_rat(&self, threshold: &Rat) -> bool {
        !self.lt_rat(threshold)
    }

    /// Total order for picking a maximum; exact between compatible exact
    /// representations, f64 fallback otherwise.
    pub fn cmp_mag(&self, other: &Magnitude) -> std::cmp::Ordering {
        use Magnitude::*;
        match (self, other) {
            (Exact(a), Exact(b)) => a.cmp(b),
            (ExactPow { sum: a, p: pa }, ExactPow { sum: b, p: pb }) if pa == pb => a.cmp(b),
            (Exact(a), ExactPow { sum: b, p }) => Magnitude::pow_rat(a, *p).cmp(b),
            (ExactPow { sum: a, p }, Exact(b)) => a.cmp(&Magnitude::pow_rat(b, *p)),
            _ => self
                .to_f64()
                .partial_cmp(&other.to_f64())
                .unwrap_or(std::cmp::Ordering::Equal),
        }
    }

    pub fn max(self, other: Magnitude) -> Magnitude {
        if self.cmp_mag(&other) == std::cmp::Ordering::Less {
            other
        } else {
            self
        }
    }
}

/// Increasing finite vertex sets F_1 ⊆ F_2 ⊆ ... exhausting the window; the
/// seminorms of the product topology are max |f(v)| over F_k. Beyond the
/// stored sets the family is taken to have already exhausted the window.
#[derive(Debug, Clone, PartialEq)]
pub struct Exhaustion {
    sets: Vec<BTreeSet<VertexId>>,
}

impl Exhaustion {
    pub fn new(sets: Vec<BTreeSet<VertexId>>) -> Result<Exhaustion> {
        if sets.is_empty() {
            return Err(Error::EmptySeminormList);
        }
        for w in sets.windows(2) {
            if !w[0].is_subset(&w[1]) {
                return Err(Error::InvalidNormSpec(
                    "exhaustion sets must be increasing".into(),
                ));
            }
        }
        Ok(Exhaustion { sets })
    }

    /// Breadth-first exhaustion: F_k is the set of vertices at undirected
    /// distance < k from the base vertex (the root if there is one, else
    /// line vertex 0), with the final set forced to the whole window.
    pub fn breadth_first(tree: &DirectedTree, levels: usize) -> Result<Exhaustion> {
        let base = tree
            .root()
            .copied()
            .or_else(|| tree.contains(&VertexId::Line(0)).then_some(VertexId::Line(0)))
            .or_else(|| tree.vertices().next().copied())
            .ok_or_else(|| Error::InvalidTree("empty tree".into()))?;
        let mut sets = Vec::new();
        let mut frontier = vec![base];
        let mut seen: BTreeSet<VertexId> = BTreeSet::from([base]);
        for _ in 0..levels.max(1) {
            sets.push(seen.clone());
            let mut next = Vec::new();
            for v in frontier.drain(..) {
                let mut neighbors: Vec<VertexId> = tree.children(&v).to_vec();
                if let Some(p) = tree.parent(&v) {
                    neighbors.push(*p);
                }
                for n in neighbors {
                    if seen.insert(n) {
                        next.push(n);
                    }
                }
            }
            frontier = next;
        }
        let all: BTreeSet<VertexId> = tree.vertices().copied().collect();
        sets.push(all);
        Exhaustion::new(sets)
    }

    /// An exhaustion by growing symmetric line segments plus whole branches,
    /// used to test exhaustion-independence of verdicts.
    pub fn by_line_segments(tree: &DirectedTree, levels: usize) -> Result<Exhaustion> {
        let mut sets = Vec::new();
        for k in 1..=levels.max(1) as i64 {
            let set: BTreeSet<VertexId> = tree
                .vertices()
                .filter(|v| match v {
                    VertexId::Line(n) => -2 * k <= *n && *n <= 2 * k,
                    VertexId::Branch(b, j) => (*b as i64) <= k && j.abs() <= k,
                })
                .copied()
                .collect();
            sets.push(set);
        }
        sets.push(tree.vertices().copied().collect());
        Exhaustion::new(sets)
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// F_k for 1-indexed k; saturates at the last stored set.
    pub fn set(&self, k: usize) -> &BTreeSet<VertexId> {
        let idx = k.clamp(1, self.sets.len()) - 1;
        &self.sets[idx]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NormSpec {
    /// ℓ^p norm, 1 <= p < ∞.
    Lp(f64),
    /// The c_0 / sup norm.
    Sup,
    /// Product-topology seminorms with the F-norm as the chain metric.
    ProductSeminorms(Arc<Exhaustion>),
}

impl NormSpec {
    pub fn l2() -> NormSpec {
        NormSpec::Lp(2.0)
    }

    fn check(&self) -> Result<()> {
        if let NormSpec::Lp(p) = self {
            if !(*p >= 1.0) || !p.is_finite() {
                return Err(Error::InvalidNormSpec(format!("p = {p} must satisfy 1 <= p < inf")));
            }
        }
        Ok(())
    }
}

impl std::fmt::Display for NormSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NormSpec::Lp(p) => write!(f, "l{p}"),
            NormSpec::Sup => write!(f, "sup"),
            NormSpec::ProductSeminorms(e) => write!(f, "product({} seminorms)", e.len()),
        }
    }
}

fn sup_magnitude(f: &SeqVector, restrict: Option<&BTreeSet<VertexId>>) -> Magnitude {
    let mut exact_max = Rat::zero();
    let mut float_max = 0.0f64;
    let mut all_exact = true;
    for (v, c) in f.iter() {
        if let Some(set) = restrict {
            if !set.contains(v) {
                continue;
            }
        }
        match c.abs_exact() {
            Some(a) => {
                if a > exact_max {
                    exact_max = a;
                }
            }
            None => {
                all_exact = false;
            }
        }
        let a = c.abs_f64();
        if a > float_max {
            float_max = a;
        }
    }
    if all_exact {
        Magnitude::Exact(exact_max)
    } else {
        Magnitude::Approx(float_max)
    }
}

/// ‖f‖ under the given spec. For `ProductSeminorms` this is the sup over the
/// exhausted window (the k-th seminorm is [`seminorm`]; the chain metric is
/// [`fnorm`]).
pub fn norm(f: &SeqVector, spec: &NormSpec) -> Result<Magnitude> {
    spec.check()?;
    match spec {
        NormSpec::Sup | NormSpec::ProductSeminorms(_) => Ok(sup_magnitude(f, None)),
        NormSpec::Lp(p) => {
            if f.support_size() <= 1 {
                // (|c|^p)^(1/p) = |c| for any p
                return Ok(sup_magnitude(f, None));
            }
            let p_int = (p.fract() == 0.0).then(|| *p as u32);
            if let Some(pi) = p_int {
                let mut sum = Rat::zero();
                let mut all_exact = true;
                for (_, c) in f.iter() {
                    match c.abs_exact() {
                        Some(a) => sum += Magnitude::pow_rat(&a, pi),
                        None => {
                            all_exact = false;
                            break;
                        }
                    }
                }
                if all_exact {
                    return Ok(Magnitude::ExactPow { sum, p: pi });
                }
            }
            let mut sum = 0.0f64;
            for (_, c) in f.iter() {
                sum += c.abs_f64().powf(*p);
            }
            Ok(Magnitude::Approx(sum.powf(1.0 / p)))
        }
    }
}

/// The k-th seminorm (1-indexed). For Banach specs every seminorm is the norm
/// itself; for product seminorms it is max over F_k.
pub fn seminorm(f: &SeqVector, spec: &NormSpec, k: usize) -> Result<Magnitude> {
    match spec {
        NormSpec::ProductSeminorms(exh) => Ok(sup_magnitude(f, Some(exh.set(k)))),
        _ => norm(f, spec),
    }
}

/// The F-norm value together with the bound on the truncated tail.
#[derive(Debug, Clone)]
pub struct FNorm {
    pub magnitude: Magnitude,
    /// Upper bound on the part of the series not covered analytically;
    /// zero when the seminorm family stabilized inside the window.
    pub tail_bound: Rat,
}

fn min_one(m: Magnitude) -> Magnitude {
    match m {
        Magnitude::Exact(r) => {
            if r > Rat::one() {
                Magnitude::Exact(Rat::one())
            } else {
                Magnitude::Exact(r)
            }
        }
        other => {
            let x = other.to_f64();
            if x > 1.0 {
                Magnitude::Exact(Rat::one())
            } else {
                other
            }
        }
    }
}

/// Σ_k 2^{-k} min(1, ‖f‖_k) over the supplied seminorm family. The finitely
/// many stored seminorms are summed term by term; once the family has
/// exhausted the window every later seminorm equals the last one, so the
/// remaining tail is the closed-form geometric sum.
pub fn fnorm(f: &SeqVector, spec: &NormSpec) -> Result<FNorm> {
    let exh = match spec {
        NormSpec::ProductSeminorms(exh) => exh.clone(),
        // Banach case: every seminorm is the norm, so the series collapses.
        _ => {
            let m = min_one(norm(f, spec)?);
            return Ok(FNorm { magnitude: m, tail_bound: Rat::zero() });
        }
    };
    if exh.is_empty() {
        return Err(Error::EmptySeminormList);
    }
    let mut exact_sum = Rat::zero();
    let mut float_sum = 0.0f64;
    let mut all_exact = true;
    let mut weight = Rat::new(1.into(), 2.into());
    let mut last = Magnitude::zero();
    for k in 1..=exh.len() {
        let s = min_one(sup_magnitude(f, Some(exh.set(k))));
        match &s {
            Magnitude::Exact(r) => exact_sum += &weight * r,
            other => {
                all_exact = false;
                float_sum += rat_to_f64(&weight) * other.to_f64();
            }
        }
        if !all_exact {
            float_sum += 0.0;
        }
        last = s;
        weight /= Rat::from_integer(2.into());
    }
    // tail: Σ_{k > K} 2^{-k} min(1, s_last) = 2^{-K} min(1, s_last)
    let tail_weight = &weight * Rat::from_integer(2.into());
    match (&last, all_exact) {
        (Magnitude::Exact(r), true) => {
            let total = exact_sum + &tail_weight * r;
            Ok(FNorm { magnitude: Magnitude::Exact(total), tail_bound: Rat::zero() })
        }
        _ => {
            let total = exact_sum.to_f64().unwrap_or(0.0)
                + float_sum
                + rat_to_f64(&tail_weight) * last.to_f64();
            Ok(FNorm { magnitude: Magnitude::Approx(total), tail_bound: Rat::zero() })
        }
    }
}

/// The metric used by chain-validity checks: the norm for Banach specs, the
/// F-norm for product seminorms.
pub fn chain_norm(f: &SeqVector, spec: &NormSpec) -> Result<Magnitude> {
    match spec {
        NormSpec::ProductSeminorms(_) => Ok(fnorm(f, spec)?.magnitude),
        _ => norm(f, spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int, Mode, Scalar};
    use crate::tree::{build_line_tree, TruncationParams};

    fn e(n: i64) -> SeqVector {
        SeqVector::basis(VertexId::Line(n), Mode::Exact)
    }

    #[test]
    fn unit_basis_vector_has_norm_one() {
        let m = norm(&e(4), &NormSpec::l2()).unwrap();
        assert_eq!(m.exact_value(), Some(&rat_int(1)));
        assert_eq!(norm(&SeqVector::zero(), &NormSpec::Sup).unwrap(), Magnitude::zero());
    }

    #[test]
    fn three_four_five_in_l2() {
        // ‖3 e_a + 4 e_b‖_2 = 5
        let f = SeqVector::from_entries([
            (VertexId::Line(0), Scalar::Rational(rat_int(3))),
            (VertexId::Line(1), Scalar::Rational(rat_int(4))),
        ])
        .unwrap();
        let m = norm(&f, &NormSpec::l2()).unwrap();
        assert_eq!(m, Magnitude::ExactPow { sum: rat_int(25), p: 2 });
        assert!((m.to_f64() - 5.0).abs() < 1e-12);
        assert!(m.lt_rat(&rat(51, 10)));
        assert!(!m.lt_rat(&rat_int(5)));
    }

    #[test]
    fn invalid_p_rejected() {
        assert!(norm(&e(0), &NormSpec::Lp(0.5)).is_err());
    }

    #[test]
    fn fnorm_of_zero_and_constant_seminorms() {
        let tree = build_line_tree(TruncationParams::line(-4, 4), false).unwrap();
        let exh = Arc::new(Exhaustion::breadth_first(&tree, 3).unwrap());
        let spec = NormSpec::ProductSeminorms(exh);
        assert_eq!(fnorm(&SeqVector::zero(), &spec).unwrap().magnitude, Magnitude::zero());

        // ‖f‖_k = 3 for every k (entry at the base vertex): F-norm is exactly 1
        let f = e(0).scale(&Scalar::Rational(rat_int(3))).unwrap();
        let v = fnorm(&f, &spec).unwrap();
        assert_eq!(v.magnitude.exact_value(), Some(&rat_int(1)));
        assert_eq!(v.tail_bound, Rat::zero());

        // ‖f‖_k = 1/2 for every k: F-norm is exactly 1/2
        let g = e(0).scale(&Scalar::Rational(rat(1, 2))).unwrap();
        let v = fnorm(&g, &spec).unwrap();
        assert_eq!(v.magnitude.exact_value(), Some(&rat(1, 2)));
    }

    #[test]
    fn fnorm_never_exceeds_one() {
        let tree = build_line_tree(TruncationParams::line(-4, 4), false).unwrap();
        let exh = Arc::new(Exhaustion::breadth_first(&tree, 4).unwrap());
        let spec = NormSpec::ProductSeminorms(exh);
        let f = SeqVector::from_entries(
            (-4..=4).map(|n| (VertexId::Line(n), Scalar::Rational(rat_int(100 + n)))),
        )
        .unwrap();
        let v = fnorm(&f, &spec).unwrap();
        assert_eq!(v.magnitude.exact_value(), Some(&rat_int(1)));
    }

    #[test]
    fn seminorms_increase_along_the_exhaustion() {
        let tree = build_line_tree(TruncationParams::line(-4, 4), false).unwrap();
        let exh = Arc::new(Exhaustion::breadth_first(&tree, 5).unwrap());
        let spec = NormSpec::ProductSeminorms(exh.clone());
        let f = SeqVector::from_entries([
            (VertexId::Line(3), Scalar::Rational(rat_int(7))),
            (VertexId::Line(0), Scalar::Rational(rat_int(2))),
        ])
        .unwrap();
        let mut prev = Magnitude::zero();
        for k in 1..=exh.len() {
            let s = seminorm(&f, &spec, k).unwrap();
            assert_ne!(prev.cmp_mag(&s), std::cmp::Ordering::Greater);
            prev = s;
        }
        assert_eq!(prev.exact_value(), Some(&rat_int(7)));
    }
}
