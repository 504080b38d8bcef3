//! Finite δ-chains for a fixed operator and norm.
//!
//! A chain is the full list f_0, ..., f_m; the link defects are the vectors
//! g_l = f_l − T(f_{l-1}), and validity means every defect has chain-metric
//! size strictly below δ. The reconstruction identity
//! f_m = T^m(f_0) + Σ_l T^{m-l}(g_l) is exact by construction and is exposed
//! both directions (chain → perturbations → chain).

use crate::error::{Error, Result};
use crate::norm::{chain_norm, Magnitude, NormSpec};
use crate::operator::LinearOp;
use crate::scalar::{rat_from_f64, rat_to_f64, Mode, Rat, Scalar};
use crate::vector::SeqVector;
use num::{One, Zero};
use std::sync::Arc;

/// Junction tolerance when concatenating float-mode chains: endpoints may
/// differ by at most this much coordinatewise.
pub fn junction_tolerance() -> Rat {
    Rat::one() / Rat::from_integer(num::BigInt::from(2).pow(40))
}

#[derive(Debug, Clone)]
pub struct DeltaChain {
    op: Arc<LinearOp>,
    norm: NormSpec,
    delta: Rat,
    vectors: Vec<SeqVector>,
}

/// Per-link defect record produced by [`DeltaChain::validate`].
#[derive(Debug, Clone)]
pub struct ChainReport {
    pub defects: Vec<Magnitude>,
    pub max_defect: Magnitude,
    pub valid: bool,
}

impl DeltaChain {
    /// At least two vectors (one link) and δ > 0.
    pub fn new(
        op: Arc<LinearOp>,
        norm: NormSpec,
        delta: Rat,
        vectors: Vec<SeqVector>,
    ) -> Result<DeltaChain> {
        if vectors.len() < 2 {
            return Err(Error::ChainTooShort);
        }
        if delta <= Rat::zero() {
            return Err(Error::NonPositiveDelta);
        }
        Ok(DeltaChain { op, norm, delta, vectors })
    }

    /// The chain 0 → T^m-orbit of f_0 has every defect zero; useful as a
    /// building block and in tests.
    pub fn exact_orbit(
        op: Arc<LinearOp>,
        norm: NormSpec,
        delta: Rat,
        f0: SeqVector,
        length: usize,
    ) -> Result<DeltaChain> {
        let mut vectors = vec![f0];
        for step in 0..length {
            let next = op.apply_power(vectors.last().expect("nonempty"), 1).map_err(|e| match e {
                Error::LeakageOutOfWindow { vertex, .. } => {
                    Error::LeakageOutOfWindow { vertex, step }
                }
                other => other,
            })?;
            vectors.push(next);
        }
        DeltaChain::new(op, norm, delta, vectors)
    }

    /// Number of links m (one less than the number of vectors).
    pub fn len(&self) -> usize {
        self.vectors.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn delta(&self) -> &Rat {
        &self.delta
    }

    pub fn op(&self) -> &Arc<LinearOp> {
        &self.op
    }

    pub fn norm_spec(&self) -> &NormSpec {
        &self.norm
    }

    pub fn vectors(&self) -> &[SeqVector] {
        &self.vectors
    }

    pub fn first(&self) -> &SeqVector {
        &self.vectors[0]
    }

    pub fn last(&self) -> &SeqVector {
        self.vectors.last().expect("nonempty")
    }

    /// g_l = f_l − T(f_{l-1}) for 1 <= l <= m.
    pub fn perturbation(&self, l: usize) -> Result<SeqVector> {
        if l == 0 || l > self.len() {
            return Err(Error::NotApplicable(format!("link index {l} out of 1..={}", self.len())));
        }
        let image = self.op.apply(&self.vectors[l - 1])?;
        self.vectors[l].sub(&image)
    }

    pub fn to_perturbations(&self) -> Result<Vec<SeqVector>> {
        (1..=self.len()).map(|l| self.perturbation(l)).collect()
    }

    /// Chain-metric size of g_l.
    pub fn defect(&self, l: usize) -> Result<Magnitude> {
        chain_norm(&self.perturbation(l)?, &self.norm)
    }

    pub fn validate(&self) -> Result<ChainReport> {
        let mut defects = Vec::with_capacity(self.len());
        let mut max = Magnitude::zero();
        let mut valid = true;
        for l in 1..=self.len() {
            let d = self.defect(l)?;
            if !d.lt_rat(&self.delta) {
                valid = false;
            }
            max = max.max(d.clone());
            defects.push(d);
        }
        Ok(ChainReport { defects, max_defect: max, valid })
    }

    pub fn is_valid(&self) -> Result<bool> {
        Ok(self.validate()?.valid)
    }

    /// Rebuilds f_0, ..., f_m from f_0 and the perturbations via
    /// f_l = T(f_{l-1}) + g_l. Inverse of [`Self::to_perturbations`].
    pub fn reconstruct(
        op: Arc<LinearOp>,
        norm: NormSpec,
        delta: Rat,
        f0: SeqVector,
        perturbations: &[SeqVector],
    ) -> Result<DeltaChain> {
        let mut vectors = vec![f0];
        for g in perturbations {
            let image = op.apply(vectors.last().expect("nonempty"))?;
            vectors.push(image.add(g)?);
        }
        DeltaChain::new(op, norm, delta, vectors)
    }

    fn endpoints_match(a: &SeqVector, b: &SeqVector) -> Result<bool> {
        if a == b {
            return Ok(true);
        }
        let exact = a.mode().unwrap_or(Mode::Exact) == Mode::Exact
            && b.mode().unwrap_or(Mode::Exact) == Mode::Exact;
        if exact {
            return Ok(false);
        }
        let diff = a.sub(b)?;
        let tol = junction_tolerance();
        let ok = diff
            .iter()
            .all(|(_, c)| rat_from_f64(c.abs_f64()).is_some_and(|r| r < tol));
        Ok(ok)
    }

    /// Joins two chains sharing an endpoint (exactly in exact mode, within
    /// the junction tolerance in float mode); the joint vector is kept once.
    /// δ of the result is the larger of the two.
    pub fn concat(&self, other: &DeltaChain) -> Result<DeltaChain> {
        if !Self::endpoints_match(self.last(), other.first())? {
            return Err(Error::EndpointMismatch);
        }
        let mut vectors = self.vectors.clone();
        vectors.extend_from_slice(&other.vectors[1..]);
        let delta = if self.delta >= other.delta { self.delta.clone() } else { other.delta.clone() };
        DeltaChain::new(self.op.clone(), self.norm.clone(), delta, vectors)
    }

    /// Extends the chain by `count` zero vectors; T(0) = 0, so this keeps
    /// every defect. Requires the chain to end at 0.
    pub fn hold_at_zero(&self, count: usize) -> Result<DeltaChain> {
        if !self.last().is_zero() {
            return Err(Error::EndpointMismatch);
        }
        let mut vectors = self.vectors.clone();
        vectors.extend(std::iter::repeat(SeqVector::zero()).take(count));
        DeltaChain::new(self.op.clone(), self.norm.clone(), self.delta.clone(), vectors)
    }

    /// α·chain: every vector scaled by α, δ scaled by |α| — defects scale the
    /// same way under homogeneous norms. Rejected for product-seminorm specs,
    /// whose F-metric is not homogeneous, and for α = 0.
    pub fn scale(&self, alpha: &Scalar) -> Result<DeltaChain> {
        if alpha.is_zero() {
            return Err(Error::ZeroScale);
        }
        if matches!(self.norm, NormSpec::ProductSeminorms(_)) {
            return Err(Error::NotApplicable(
                "chain scaling needs a homogeneous norm; the F-metric is not".into(),
            ));
        }
        let vectors = self
            .vectors
            .iter()
            .map(|f| f.scale(alpha))
            .collect::<Result<Vec<_>>>()?;
        let delta = alpha.abs_rat() * &self.delta;
        DeltaChain::new(self.op.clone(), self.norm.clone(), delta, vectors)
    }

    /// Serializable record: vectors, per-link defects, δ, verdict.
    pub fn to_json(&self) -> Result<serde_json::Value> {
        let report = self.validate()?;
        Ok(serde_json::json!({
            "delta": self.delta.to_string(),
            "length": self.len(),
            "valid": report.valid,
            "max_defect": report.max_defect.to_f64(),
            "margin": rat_to_f64(&self.delta) - report.max_defect.to_f64(),
            "defects": report.defects.iter().map(|d| d.to_f64()).collect::<Vec<_>>(),
            "vectors": self.vectors.iter().map(|f| f.to_json()).collect::<Vec<_>>(),
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{shift_from_weights, WeightAssignment};
    use crate::scalar::{rat, rat_int};
    use crate::tree::{build_comb_tree, TruncationParams, VertexId};

    fn setup() -> (Arc<LinearOp>, NormSpec) {
        let tree = Arc::new(build_comb_tree(TruncationParams::comb(-10, 8, 5)).unwrap());
        let w = WeightAssignment::comb(
            Scalar::Rational(rat_int(2)),
            Scalar::Rational(rat_int(4)),
        )
        .unwrap();
        (Arc::new(shift_from_weights(&tree, &w).unwrap()), NormSpec::l2())
    }

    fn e(n: i64) -> SeqVector {
        SeqVector::basis(VertexId::Line(n), Mode::Exact)
    }

    #[test]
    fn exact_orbit_has_zero_defects() {
        let (op, norm) = setup();
        let chain = DeltaChain::exact_orbit(op, norm, rat(1, 100), e(4), 4).unwrap();
        let report = chain.validate().unwrap();
        assert!(report.valid);
        assert!(report.max_defect.is_zero());
        // orbit ends at μ₁^4 e_0
        assert_eq!(chain.last().get(&VertexId::Line(0)), Scalar::Rational(rat_int(16)));
    }

    #[test]
    fn defect_equals_perturbation_norm() {
        let (op, norm) = setup();
        // f_1 = T(f_0) + (1/3) e_2
        let f0 = e(3);
        let f1 = op
            .apply(&f0)
            .unwrap()
            .add(&e(2).scale(&Scalar::Rational(rat(1, 3))).unwrap())
            .unwrap();
        let chain = DeltaChain::new(op, norm, rat(1, 2), vec![f0, f1]).unwrap();
        let d = chain.defect(1).unwrap();
        assert_eq!(d.exact_value(), Some(&rat(1, 3)));
        assert!(chain.is_valid().unwrap());
        // a tolerance equal to the defect is not enough: the bound is strict
        let tight = DeltaChain::new(
            chain.op().clone(),
            chain.norm_spec().clone(),
            rat(1, 3),
            chain.vectors().to_vec(),
        )
        .unwrap();
        assert!(!tight.is_valid().unwrap());
    }

    #[test]
    fn perturbation_roundtrip_is_bit_exact() {
        let (op, norm) = setup();
        let f0 = e(5).add(&e(2).scale(&Scalar::Rational(rat(7, 3))).unwrap()).unwrap();
        let mut vectors = vec![f0.clone()];
        // a chain wandering off the exact orbit
        for l in 1..=5usize {
            let bump = e(l as i64).scale(&Scalar::Rational(rat(1, 1 + l as i64))).unwrap();
            let next = op.apply(vectors.last().unwrap()).unwrap().add(&bump).unwrap();
            vectors.push(next);
        }
        let chain = DeltaChain::new(op.clone(), norm.clone(), rat_int(1), vectors).unwrap();
        let gs = chain.to_perturbations().unwrap();
        let rebuilt = DeltaChain::reconstruct(op, norm, rat_int(1), f0, &gs).unwrap();
        assert_eq!(rebuilt.vectors(), chain.vectors());
    }

    #[test]
    fn concat_requires_matching_endpoints() {
        let (op, norm) = setup();
        let a = DeltaChain::exact_orbit(op.clone(), norm.clone(), rat(1, 10), e(2), 2).unwrap();
        let b = DeltaChain::exact_orbit(op.clone(), norm.clone(), rat(1, 10), e(7), 2).unwrap();
        assert!(matches!(a.concat(&b), Err(Error::EndpointMismatch)));

        let c = DeltaChain::exact_orbit(op, norm, rat(1, 10), a.last().clone(), 3).unwrap();
        let joined = a.concat(&c).unwrap();
        assert_eq!(joined.len(), 5);
        assert!(joined.is_valid().unwrap());
    }

    #[test]
    fn holding_at_zero_preserves_validity() {
        let (op, norm) = setup();
        // 0 → 0 → ... stays a chain for any δ
        let chain = DeltaChain::new(
            op,
            norm,
            rat(1, 1000),
            vec![SeqVector::zero(), SeqVector::zero()],
        )
        .unwrap();
        let held = chain.hold_at_zero(7).unwrap();
        assert_eq!(held.len(), 8);
        assert!(held.is_valid().unwrap());
    }

    #[test]
    fn scaling_scales_defects_and_delta() {
        let (op, norm) = setup();
        let f0 = e(3);
        let f1 = op
            .apply(&f0)
            .unwrap()
            .add(&e(1).scale(&Scalar::Rational(rat(1, 5))).unwrap())
            .unwrap();
        let chain = DeltaChain::new(op, norm, rat(1, 4), vec![f0, f1]).unwrap();
        let scaled = chain.scale(&Scalar::Rational(rat_int(-3))).unwrap();
        assert_eq!(scaled.delta(), &rat(3, 4));
        assert_eq!(scaled.defect(1).unwrap().exact_value(), Some(&rat(3, 5)));
        assert!(matches!(
            chain.scale(&Scalar::zero(Mode::Exact)),
            Err(Error::ZeroScale)
        ));
    }

    #[test]
    fn short_chains_and_bad_delta_rejected() {
        let (op, norm) = setup();
        assert!(matches!(
            DeltaChain::new(op.clone(), norm.clone(), rat_int(1), vec![e(0)]),
            Err(Error::ChainTooShort)
        ));
        assert!(matches!(
            DeltaChain::new(op, norm, rat_int(0), vec![e(0), e(1)]),
            Err(Error::NonPositiveDelta)
        ));
    }
}
