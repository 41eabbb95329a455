//! Property tests for the submeasure algebra and the hull kernel.

mod support;

use proptest::prelude::*;
use subdyn_core::measure::{
    default_test_basis, leq, weak_distance, Measure, SetKind, Submeasure, DEFAULT_TOL,
};
use subdyn_core::optim::hull_membership;
use subdyn_core::space::GroundFunction;

fn measure_strategy(n: usize) -> impl Strategy<Value = Measure> {
    prop::collection::vec(0.0..2.0f64, n).prop_map(|w| Measure::new(w).unwrap())
}

fn submeasure_strategy(n: usize, max_gens: usize) -> impl Strategy<Value = Submeasure> {
    prop::collection::vec(measure_strategy(n), 1..=max_gens)
        .prop_map(|gens| Submeasure::new(gens).unwrap())
}

fn ground_strategy(n: usize) -> impl Strategy<Value = GroundFunction> {
    prop::collection::vec(-3.0..3.0f64, n).prop_map(|v| GroundFunction::new(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn evaluation_is_sublinear(
        mu in submeasure_strategy(4, 4),
        phi in ground_strategy(4),
        psi in ground_strategy(4),
        lambda in 0.0..4.0f64,
    ) {
        let sum = phi.add(&psi);
        let lhs = mu.evaluate(&sum).unwrap();
        let rhs = mu.evaluate(&phi).unwrap() + mu.evaluate(&psi).unwrap();
        prop_assert!(lhs <= rhs + 1e-10);
        let scaled = mu.evaluate(&phi.scale(lambda)).unwrap();
        prop_assert!((scaled - lambda * mu.evaluate(&phi).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn evaluation_is_monotone_and_lipschitz(
        mu in submeasure_strategy(4, 4),
        phi in ground_strategy(4),
        bump in prop::collection::vec(0.0..2.0f64, 4),
    ) {
        let higher = phi.add(&GroundFunction::new(bump).unwrap());
        prop_assert!(mu.evaluate(&higher).unwrap() >= mu.evaluate(&phi).unwrap() - 1e-12);
        // |mu(phi1) - mu(phi2)| <= norm(mu) * |phi1 - phi2|_inf
        let diff = higher.add(&phi.scale(-1.0));
        let gap = (mu.evaluate(&higher).unwrap() - mu.evaluate(&phi).unwrap()).abs();
        prop_assert!(gap <= mu.norm() * diff.sup_norm() + 1e-10);
    }

    #[test]
    fn canonicalize_preserves_evaluation(
        mu in submeasure_strategy(3, 5),
        functions in prop::collection::vec(ground_strategy(3), 8),
    ) {
        let canon = mu.canonicalize().unwrap();
        prop_assert!(canon.generator_count() <= mu.generator_count());
        for phi in &functions {
            let a = mu.evaluate(phi).unwrap();
            let b = canon.evaluate(phi).unwrap();
            prop_assert!((a - b).abs() <= 1e-8, "evaluation changed: {a} vs {b}");
        }
    }

    #[test]
    fn sup_and_add_pointwise_contracts(
        mu1 in submeasure_strategy(3, 3),
        mu2 in submeasure_strategy(3, 3),
        phi in ground_strategy(3),
    ) {
        let sup = mu1.sup_combine(&mu2).unwrap();
        let sum = mu1.add(&mu2).unwrap();
        let a = mu1.evaluate(&phi).unwrap();
        let b = mu2.evaluate(&phi).unwrap();
        prop_assert!((sup.evaluate(&phi).unwrap() - a.max(b)).abs() <= 1e-10);
        prop_assert!((sum.evaluate(&phi).unwrap() - (a + b)).abs() <= 1e-10);
    }

    #[test]
    fn leq_is_reflexive_and_transitive(
        mu1 in submeasure_strategy(3, 3),
        mu2 in submeasure_strategy(3, 3),
    ) {
        prop_assert!(leq(&mu1, &mu1, DEFAULT_TOL).unwrap().holds);
        // Transitivity through the sup: mu1 <= sup(mu1, mu2) <= sup(mu1, mu2, extra).
        let mid = mu1.sup_combine(&mu2).unwrap();
        let top = mid.sup_combine(&mu1).unwrap();
        prop_assert!(leq(&mu1, &mid, DEFAULT_TOL).unwrap().holds);
        prop_assert!(leq(&mid, &top, DEFAULT_TOL).unwrap().holds);
        prop_assert!(leq(&mu1, &top, DEFAULT_TOL).unwrap().holds);
    }

    #[test]
    fn order_antisymmetry_gives_weak_equality(
        mu1 in submeasure_strategy(3, 3),
        mu2 in submeasure_strategy(3, 3),
    ) {
        let both = leq(&mu1, &mu2, DEFAULT_TOL).unwrap().holds
            && leq(&mu2, &mu1, DEFAULT_TOL).unwrap().holds;
        if both {
            prop_assert!(weak_distance(&mu1, &mu2, None).unwrap() <= 1e-7);
        }
    }

    #[test]
    fn set_function_is_subadditive(
        mu in submeasure_strategy(4, 4),
        mask1 in prop::collection::vec(prop::bool::ANY, 4),
        mask2 in prop::collection::vec(prop::bool::ANY, 4),
    ) {
        let a1: subdyn_core::space::PointSet =
            (0..4).filter(|&i| mask1[i]).collect();
        let a2: subdyn_core::space::PointSet =
            (0..4).filter(|&i| mask2[i]).collect();
        let union: subdyn_core::space::PointSet = a1.union(&a2).copied().collect();
        for kind in [SetKind::Closed, SetKind::Open] {
            let u = mu.set_value(&union, kind).unwrap();
            let s1 = mu.set_value(&a1, kind).unwrap();
            let s2 = mu.set_value(&a2, kind).unwrap();
            prop_assert!(u <= s1 + s2 + 1e-12);
        }
    }

    #[test]
    fn leq_failures_carry_separating_witnesses(
        mu1 in submeasure_strategy(3, 3),
        mu2 in submeasure_strategy(3, 3),
    ) {
        let report = leq(&mu1, &mu2, DEFAULT_TOL).unwrap();
        if !report.holds {
            let w = report.witness.expect("failing order must produce a witness");
            let lhs = mu1.evaluate(&w).unwrap();
            let rhs = mu2.evaluate(&w).unwrap();
            prop_assert!(lhs > rhs + DEFAULT_TOL / 2.0, "witness too weak: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn hull_certificates_match_the_caratheodory_oracle(
        vertices in prop::collection::vec(prop::collection::vec(0.0..1.0f64, 3), 1..6),
        query in prop::collection::vec(0.0..1.0f64, 3),
    ) {
        let cert = hull_membership(&query, &vertices, DEFAULT_TOL).unwrap();
        prop_assert!(cert.verify(&query, &vertices, DEFAULT_TOL));
        let oracle = support::oracle_hull_member(&query, &vertices, DEFAULT_TOL);
        // Points within tolerance of the boundary may legitimately differ;
        // re-check with a slack band before failing.
        if cert.is_member() != oracle {
            let tight = support::oracle_hull_member(&query, &vertices, 1e-12);
            let loose = support::oracle_hull_member(&query, &vertices, 1e-6);
            prop_assert!(tight != loose, "solver and oracle disagree away from the boundary");
        }
    }
}

#[test]
fn neighborhoods_are_monotone_and_centered() {
    let space = subdyn_core::space::FiniteSpace::new(
        (0..5).map(|i| format!("p{i}")).collect(),
        (0..5)
            .map(|i| (0..5).map(|j| (i as f64 - j as f64).abs()).collect())
            .collect(),
    )
    .unwrap();
    for x in 0..5 {
        let mut previous = subdyn_core::space::PointSet::new();
        for k in 0..=10 {
            let delta = k as f64 * 0.5;
            let nb = space.neighborhood(x, delta);
            assert!(nb.contains(&x), "center must belong to its neighborhood");
            assert!(
                previous.is_subset(&nb),
                "neighborhoods must grow with delta"
            );
            previous = nb;
        }
    }
}

#[test]
fn open_domain_and_indeterminacy_partition_the_source() {
    let space = subdyn_core::space::FiniteSpace::new(
        (0..4).map(|i| format!("p{i}")).collect(),
        (0..4)
            .map(|i| (0..4).map(|j| (i as f64 - j as f64).abs()).collect())
            .collect(),
    )
    .unwrap();
    let f = subdyn_core::multimap::Multimap::new(
        std::sync::Arc::clone(&space),
        std::sync::Arc::clone(&space),
        vec![vec![0, 1], vec![2], vec![1, 2, 3], vec![0]],
    )
    .unwrap();
    let open = f.open_domain();
    let indet = f.indeterminacy();
    assert!(open.is_disjoint(&indet));
    let all: subdyn_core::space::PointSet = open.union(&indet).copied().collect();
    assert_eq!(all, (0..4).collect());
}

#[test]
fn usc_extension_is_subadditive_and_stable_under_domain_shrinking() {
    use subdyn_core::measure::usc_extend;
    // Five points in two metric clusters far apart; functions constant on each
    // cluster are "continuous at resolution delta" for delta below the gap.
    let positions = [0.0_f64, 0.4, 0.8, 10.0, 10.4];
    let space = subdyn_core::space::FiniteSpace::new(
        (0..5).map(|i| format!("p{i}")).collect(),
        (0..5)
            .map(|i| {
                (0..5)
                    .map(|j| (positions[i] - positions[j]).abs())
                    .collect()
            })
            .collect(),
    )
    .unwrap();
    let delta = 1.0;
    let h = GroundFunction::new(vec![2.0, 2.0, 2.0, -1.0, -1.0]).unwrap();
    let full: subdyn_core::space::PointSet = (0..5).collect();
    let shrunk: subdyn_core::space::PointSet = [0, 2, 3].into_iter().collect();
    let from_full = usc_extend(&space, &full, &h, delta).unwrap();
    let from_shrunk = usc_extend(&space, &shrunk, &h, delta).unwrap();
    assert_eq!(
        from_full, from_shrunk,
        "dense subdomain must give the same extension"
    );

    // Subadditivity E(g1 + g2) <= E(g1) + E(g2) on a partial domain.
    let g1 = GroundFunction::new(vec![1.0, 0.0, 3.0, -2.0, 0.5]).unwrap();
    let g2 = GroundFunction::new(vec![-0.5, 0.0, 1.0, 4.0, 0.25]).unwrap();
    let u: subdyn_core::space::PointSet = [0, 2, 3, 4].into_iter().collect();
    let e_sum = usc_extend(&space, &u, &g1.add(&g2), delta).unwrap();
    let e1 = usc_extend(&space, &u, &g1, delta).unwrap();
    let e2 = usc_extend(&space, &u, &g2, delta).unwrap();
    for x in 0..5 {
        assert!(e_sum.get(x) <= e1.get(x) + e2.get(x) + 1e-12);
        if u.contains(&x) {
            assert_eq!(
                e1.get(x),
                g1.get(x),
                "restriction to the domain is the identity"
            );
        }
    }
}

#[test]
fn weak_distance_zero_on_basis_certifies_small_spaces() {
    // On n <= 3 the default family (indicators, complements, constants) pins
    // the evaluation of canonical two-generator submeasures in this battery.
    let a = Submeasure::new(vec![
        Measure::new(vec![1.0, 0.0]).unwrap(),
        Measure::new(vec![0.0, 1.0]).unwrap(),
    ])
    .unwrap();
    let b = Submeasure::new(vec![
        Measure::new(vec![0.0, 1.0]).unwrap(),
        Measure::new(vec![1.0, 0.0]).unwrap(),
    ])
    .unwrap();
    assert_eq!(weak_distance(&a, &b, None).unwrap(), 0.0);
    let basis = default_test_basis(2);
    assert_eq!(basis.len(), 6);
}
