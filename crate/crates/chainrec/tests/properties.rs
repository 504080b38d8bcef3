//! Property-based invariants: exact identities that must hold for arbitrary
//! chains and parameters, not just the pinned examples.

use chainrec::chain::DeltaChain;
use chainrec::construct::{m1_for, m2_for};
use chainrec::operator::{shift_from_weights, WeightAssignment};
use chainrec::oracle::min_delta_reach;
use chainrec::scalar::{rat, rat_int};
use chainrec::tree::{build_comb_tree, TruncationParams, VertexId};
use chainrec::vector::SeqVector;
use chainrec::{Mode, NormSpec, Rat, Scalar};
use proptest::prelude::*;
use std::sync::Arc;

fn comb_op() -> Arc<chainrec::LinearOp> {
    let tree = Arc::new(build_comb_tree(TruncationParams::comb(-30, 10, 6)).unwrap());
    let weights = WeightAssignment::comb(
        Scalar::Rational(rat_int(2)),
        Scalar::Rational(rat_int(4)),
    )
    .unwrap();
    Arc::new(shift_from_weights(&tree, &weights).unwrap())
}

fn sparse_vector() -> impl Strategy<Value = SeqVector> {
    prop::collection::vec(
        (
            prop_oneof![
                (-8i64..=8).prop_map(VertexId::Line),
                (1u32..=6).prop_flat_map(|k| (Just(k), 1..=k as i64))
                    .prop_map(|(k, j)| VertexId::Branch(k, j)),
            ],
            -50i64..=50,
            1i64..=9,
        ),
        0..=3,
    )
    .prop_map(|entries| {
        let mut f = SeqVector::zero();
        for (v, num, den) in entries {
            let c = Scalar::Rational(rat(num, den));
            f = f.add(&SeqVector::basis(v, Mode::Exact).scale(&c).unwrap()).unwrap();
        }
        f
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn perturbations_invert_reconstruction(
        vectors in prop::collection::vec(sparse_vector(), 2..=10)
    ) {
        let op = comb_op();
        let norm = NormSpec::l2();
        let delta = rat_int(1_000_000);
        let chain = DeltaChain::new(op.clone(), norm.clone(), delta.clone(), vectors).unwrap();
        let gs = chain.to_perturbations().unwrap();
        let rebuilt =
            DeltaChain::reconstruct(op, norm, delta, chain.first().clone(), &gs).unwrap();
        prop_assert_eq!(rebuilt.vectors(), chain.vectors());
    }

    #[test]
    fn scaling_multiplies_every_defect(
        vectors in prop::collection::vec(sparse_vector(), 2..=6),
        num in 1i64..=20,
        den in 1i64..=7,
    ) {
        let op = comb_op();
        let alpha = Scalar::Rational(rat(num, den));
        // sup norm: defects of rational vectors stay plain rationals (the
        // l2 magnitude of a multi-entry vector is exact only as a square)
        let chain =
            DeltaChain::new(op, NormSpec::Sup, rat_int(1_000_000), vectors).unwrap();
        let scaled = chain.scale(&alpha).unwrap();
        prop_assert_eq!(scaled.delta(), &(alpha.abs_rat() * chain.delta()));
        for l in 1..=chain.len() {
            let before = chain.defect(l).unwrap();
            let after = scaled.defect(l).unwrap();
            prop_assert_eq!(
                after.exact_value().unwrap(),
                &(alpha.abs_rat() * before.exact_value().unwrap())
            );
        }
    }

    #[test]
    fn concatenation_keeps_the_larger_delta(len_a in 1usize..=5, len_b in 1usize..=5) {
        let op = comb_op();
        let norm = NormSpec::l2();
        let f0 = SeqVector::basis(VertexId::Line(6), Mode::Exact);
        let a = DeltaChain::exact_orbit(op.clone(), norm.clone(), rat(1, 10), f0, len_a).unwrap();
        let b = DeltaChain::exact_orbit(op, norm, rat(1, 20), a.last().clone(), len_b).unwrap();
        let joined = a.concat(&b).unwrap();
        prop_assert_eq!(joined.len(), len_a + len_b);
        prop_assert_eq!(joined.delta(), &rat(1, 10));
        prop_assert!(joined.is_valid().unwrap());
    }

    #[test]
    fn m1_is_minimal(delta_num in 1i64..=30, delta_den in 1i64..=500, mu_num in 3i64..=9) {
        // |mu1| = mu_num / 2 > 1
        let delta = rat(delta_num, delta_den);
        let mu = rat(mu_num, 2);
        let m1 = m1_for(&delta, &mu).unwrap();
        prop_assert!(m1 > 1);
        let pow = |e: u32| num::pow::pow(mu.clone(), e as usize);
        prop_assert!(&delta * pow(m1 - 1) > Rat::from_integer(1.into()));
        if m1 > 2 {
            prop_assert!(&delta * pow(m1 - 2) <= Rat::from_integer(1.into()));
        }
    }

    #[test]
    fn m2_is_minimal(
        delta_num in 1i64..=10,
        delta_den in 1i64..=200,
        coeff_num in 1i64..=40,
        coeff_den in 1i64..=40,
    ) {
        let delta = rat(delta_num, delta_den);
        let mu1 = rat_int(2);
        let mu2 = rat_int(4);
        let coeff = rat(coeff_num, coeff_den);
        let m2 = m2_for(&delta, &mu1, &mu2, &coeff).unwrap();
        prop_assert!(m2 > 1);
        let check = |m: u32| {
            let p1 = num::pow::pow(mu1.clone(), m as usize);
            let p2 = num::pow::pow(mu2.clone(), (m - 1) as usize);
            &coeff * p1 < &delta * p2
        };
        prop_assert!(check(m2));
        if m2 > 2 {
            prop_assert!(!check(m2 - 1));
        }
    }

    #[test]
    fn min_delta_reach_is_monotone_in_m(k in 2u32..=6, j in 1i64..=2) {
        prop_assume!(j <= k as i64);
        let op = comb_op();
        let target = VertexId::Branch(k, j);
        let one = Scalar::one(Mode::Exact);
        let mut prev: Option<Rat> = None;
        for m in 1..=12u32 {
            let bound = match min_delta_reach(&op, &SeqVector::zero(), target, &one, m) {
                Ok(b) => b.infimum,
                Err(_) => continue, // unreachable horizon: infinite bound
            };
            if let Some(p) = prev {
                // more links can only help (extra denominator terms), until
                // the influence path ends and the bound goes constant
                prop_assert!(bound <= p, "bound grew from {} to {} at m = {}", p, bound, m);
            }
            prev = Some(bound);
        }
        prop_assert!(prev.is_some());
    }
}

#[test]
fn empty_vector_norm_is_zero_in_every_spec() {
    use chainrec::norm::{chain_norm, Exhaustion};
    let op = comb_op();
    for spec in [
        NormSpec::Lp(1.0),
        NormSpec::l2(),
        NormSpec::Sup,
        NormSpec::ProductSeminorms(Arc::new(Exhaustion::breadth_first(op.tree(), 5).unwrap())),
    ] {
        assert!(chain_norm(&SeqVector::zero(), &spec).unwrap().is_zero());
    }
}
