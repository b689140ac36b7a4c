//! Property-based invariants over randomized trees, weights, and
//! sequence specs.

mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

use treeshift::equivalence::{compare_invariants, EquivWitness, ShiftPresentation};
use treeshift::seqclass::{MomentSequenceSpec, PeriodicityKind};
use treeshift::shift::L2Vector;
use treeshift::specfile::{ShiftSpec, TreeSpec, WeightSpec};
use treeshift::tol;
use treeshift::wandering::WanderingDecomposition;

fn random_vector(rng: &mut impl Rng, len: usize) -> L2Vector {
    let coeffs = (0..len)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    L2Vector { coeffs }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// <Sx, y> = <x, S*y> for arbitrary vectors, balanced or not.
    #[test]
    fn shift_and_adjoint_are_a_dual_pair(seed in any::<u64>(), depth in 2usize..6) {
        let mut rng = common::rng(seed);
        let tree = common::random_tree(&mut rng, depth, depth + 1);
        let (s, _) = common::random_balanced(&mut rng, tree);
        let x = random_vector(&mut rng, s.dim());
        let y = random_vector(&mut rng, s.dim());
        let lhs = s.apply(&x).inner(&y);
        let rhs = x.inner(&s.apply_adjoint(&y));
        let scale = 1.0_f64.max(x.norm() * y.norm() * s.norm_bound());
        prop_assert!((lhs - rhs).norm() <= tol::ADJOINT_PAIRING_REL * scale);
    }

    /// Power norms of balanced shifts factor through the generation
    /// constants, measured by actually applying the operator.
    #[test]
    fn power_norms_factor_through_generation_constants(seed in any::<u64>(), depth in 2usize..6) {
        let mut rng = common::rng(seed);
        let tree = common::random_tree(&mut rng, depth, depth + 2);
        let (s, _) = common::random_balanced(&mut rng, tree.clone());
        let table = s.moment_table().expect("generated shift is balanced");
        let v = treeshift::tree::VertexId(rng.random_range(0..s.dim()));
        let d = tree.vertex_depth(v);
        let n = rng.random_range(0..=tree.truncation_depth() - d);
        let measured = s.apply_power(&L2Vector::basis(s.dim(), v), n).norm();
        let predicted = table.moment_product(d, n).expect("feasible order");
        prop_assert!(tol::rel_close(measured, predicted, 1e-12));
    }

    /// The adjoint kernel basis always matches the cardinality
    /// differences, and the residual stays at rounding level.
    #[test]
    fn kernel_dimensions_follow_cardinalities(seed in any::<u64>(), depth in 2usize..6) {
        let mut rng = common::rng(seed);
        let tree = common::random_tree(&mut rng, depth, depth + 1);
        let (s, _) = common::random_balanced(&mut rng, tree.clone());
        let decomp = WanderingDecomposition::kernel_basis(&s);
        let cards = tree.prefix_cards();
        let dims = decomp.dims();
        prop_assert_eq!(dims[0], 1);
        for n in 1..dims.len() {
            prop_assert_eq!(dims[n] as u64, cards[n] - cards[n - 1]);
        }
        prop_assert!(decomp.adjoint_kernel_residual(&s) <= tol::KERNEL_ABS);
    }

    /// A moment sequence built by repeating a pattern k times classifies
    /// with the minimal period, not the inflated one.
    #[test]
    fn repeated_periods_canonicalize(
        pattern in proptest::collection::vec(0.25f64..4.0, 1..4),
        copies in 1usize..4,
    ) {
        let mut period = Vec::new();
        for _ in 0..copies {
            period.extend_from_slice(&pattern);
        }
        let spec = MomentSequenceSpec::EventuallyPeriodic { preperiod: vec![], period };
        let verdict = spec.classify();
        match verdict.kind {
            PeriodicityKind::Periodic { period: p } => prop_assert!(pattern.len() % p == 0),
            other => prop_assert!(false, "unexpected class {other}"),
        }
    }

    /// Comparing a presentation with itself yields no witness; swapping
    /// the sides of a mismatching pair keeps the witness index.
    #[test]
    fn invariant_comparison_is_reflexive_and_symmetric(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let tree_a = common::random_tree(&mut rng, 3, 5);
        let tree_b = common::random_tree(&mut rng, 3, 5);
        let q = rng.random_range(1.3..3.0);
        let pa = ShiftPresentation::with_tree(MomentSequenceSpec::dirichlet(q), &tree_a);
        let pb = ShiftPresentation::with_tree(MomentSequenceSpec::bergman(q), &tree_b);

        prop_assert!(compare_invariants(&pa, &pa).value.is_none());

        let ab = compare_invariants(&pa, &pb).value;
        let ba = compare_invariants(&pb, &pa).value;
        match (&ab, &ba) {
            (Some(x), Some(y)) => prop_assert_eq!(x.index(), y.index()),
            (None, None) => {}
            _ => prop_assert!(false, "asymmetric outcome: {ab:?} vs {ba:?}"),
        }
    }

    /// Shift specs survive a JSON round trip and rebuild the same
    /// operator.
    #[test]
    fn shift_specs_round_trip_through_json(seed in any::<u64>(), depth in 2usize..5) {
        let mut rng = common::rng(seed);
        let tree = common::random_tree(&mut rng, depth, depth + 1);
        let (s, _) = common::random_balanced(&mut rng, tree.clone());
        let mut weights = std::collections::BTreeMap::new();
        for i in 1..s.dim() {
            let v = treeshift::tree::VertexId(i);
            weights.insert(tree.label(v).to_string(), s.weight(v));
        }
        let spec = ShiftSpec {
            tree: TreeSpec::describe(&tree),
            weights: WeightSpec::Explicit { weights },
            sequence: None,
        };
        let json = serde_json::to_string(&spec).unwrap();
        let back: ShiftSpec = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(&back, &spec);
        let rebuilt = back.build().unwrap();
        prop_assert_eq!(rebuilt.shift.dim(), s.dim());
        for i in 1..s.dim() {
            let v = treeshift::tree::VertexId(i);
            // labels are preserved, so weights land on the same vertices
            prop_assert_eq!(rebuilt.shift.weight(v), s.weight(v));
        }
    }
}

/// Swapped-side witnesses also swap their payloads, not just the index.
#[test]
fn generation_witness_swaps_payload_with_sides() {
    let a = treeshift::examples::two_rays_tree(4);
    let b = treeshift::examples::stem_then_two_rays_tree(4);
    let q = 2.0;
    let pa = ShiftPresentation::with_tree(MomentSequenceSpec::dirichlet(q), &a);
    let pb = ShiftPresentation::with_tree(MomentSequenceSpec::dirichlet(q), &b);
    let ab = compare_invariants(&pa, &pb).value.unwrap();
    let ba = compare_invariants(&pb, &pa).value.unwrap();
    match (ab, ba) {
        (
            EquivWitness::Generation { index: i, left: l1, right: r1 },
            EquivWitness::Generation { index: j, left: l2, right: r2 },
        ) => {
            assert_eq!((i, j), (1, 1));
            assert_eq!((l1, r1), (r2, l2));
        }
        other => panic!("expected generation witnesses, got {other:?}"),
    }
}
