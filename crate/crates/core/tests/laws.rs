mod common;

use std::sync::Arc;

use morita_core::bibundle::{bibundle_isomorphic, from_homomorphism, identity_bibundle, tensor};
use morita_core::gauge::{
    apply_gauge, inverse_law_deviation, max_deviation, rank_map, verify_composition, FieldKind,
    GridSpec, SampledField,
};
use morita_core::groupoid::FiniteGroupoid;
use morita_core::tss::{morita_equivalent_tss, surface_genus, LabeledSurfaceGraph};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

fn groupoid(i: usize) -> Arc<FiniteGroupoid> {
    let all = chain_groupoids();
    all[i % all.len()].clone()
}

fn hom_bibundle(cod: &Arc<FiniteGroupoid>, dom: &Arc<FiniteGroupoid>, pick: usize) -> morita_core::Bibundle {
    let fs = functors(dom, cod);
    from_homomorphism(cod, dom, &fs[pick % fs.len()]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn isomorphism_search_matches_brute_force(
        (a, b) in (0usize..11, 0usize..11),
        (f1, f2) in (0usize..64, 0usize..64),
        seed in any::<u64>(),
    ) {
        let (g1, g2) = (groupoid(a), groupoid(b));
        let s = hom_bibundle(&g1, &g2, f1);
        let t = hom_bibundle(&g1, &g2, f2);
        prop_assume!(s.len() <= 7);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = relabel(&t, &mut rng);
        prop_assert_eq!(bibundle_isomorphic(&s, &t).is_some(), brute_isomorphic(&s, &t));
        prop_assert!(bibundle_isomorphic(&s, &relabel(&s, &mut rng)).is_some());
    }

    #[test]
    fn tensor_unit_laws(a in 0usize..11, b in 0usize..11, f in 0usize..64, seed in any::<u64>()) {
        let (g1, g2) = (groupoid(a), groupoid(b));
        let s = relabel(&hom_bibundle(&g1, &g2, f), &mut ChaCha8Rng::seed_from_u64(seed));
        let left = tensor(&identity_bibundle(&g1), &s).unwrap();
        let right = tensor(&s, &identity_bibundle(&g2)).unwrap();
        prop_assert!(bibundle_isomorphic(&left, &s).is_some());
        prop_assert!(bibundle_isomorphic(&right, &s).is_some());
    }

    #[test]
    fn tensor_is_associative(
        ids in (0usize..11, 0usize..11, 0usize..11, 0usize..11),
        fs in (0usize..64, 0usize..64, 0usize..64),
    ) {
        let (g1, g2, g3, g4) = (groupoid(ids.0), groupoid(ids.1), groupoid(ids.2), groupoid(ids.3));
        let s = hom_bibundle(&g1, &g2, fs.0);
        let t = hom_bibundle(&g2, &g3, fs.1);
        let u = hom_bibundle(&g3, &g4, fs.2);
        let lhs = tensor(&tensor(&s, &t).unwrap(), &u).unwrap();
        let rhs = tensor(&s, &tensor(&t, &u).unwrap()).unwrap();
        prop_assert!(bibundle_isomorphic(&lhs, &rhs).is_some());
    }

    #[test]
    fn tensor_of_homomorphisms_is_composite(
        ids in (0usize..11, 0usize..11, 0usize..11),
        fs in (0usize..64, 0usize..64),
    ) {
        let (g1, g2, g3) = (groupoid(ids.0), groupoid(ids.1), groupoid(ids.2));
        let phis = functors(&g2, &g1);
        let psis = functors(&g3, &g2);
        let (phi, psi) = (&phis[fs.0 % phis.len()], &psis[fs.1 % psis.len()]);
        let composite = tensor(
            &from_homomorphism(&g1, &g2, phi).unwrap(),
            &from_homomorphism(&g2, &g3, psi).unwrap(),
        )
        .unwrap();
        let direct = from_homomorphism(&g1, &g3, &phi.after(psi)).unwrap();
        prop_assert!(bibundle_isomorphic(&composite, &direct).is_some());
    }
}

fn graph_strategy() -> impl Strategy<Value = (u64, usize, usize)> {
    (any::<u64>(), 1usize..=5, 0usize..=3).prop_map(|(seed, v, extra)| (seed, v, (v - 1 + extra).min(7)))
}

fn graph(seed: u64, v: usize, e: usize) -> (LabeledSurfaceGraph, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (random_surface_graph(&mut rng, v, e), rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn shuffled_graphs_are_equivalent((seed, v, e) in graph_strategy()) {
        let (g, mut rng) = graph(seed, v, e);
        let h = shuffled(&g, &mut rng);
        let iso = morita_equivalent_tss(&g, &h, 0.0).unwrap();
        prop_assert!(iso.is_some());
        let iso = iso.unwrap();
        for (i, edge) in g.edges.iter().enumerate() {
            let image = &h.edges[iso.edges[i]];
            prop_assert_eq!(edge.period, image.period);
            prop_assert_eq!(&h.vertices[iso.vertices[g.vertices.iter().position(|x| x.id == edge.tail).unwrap()]].id, &image.tail);
        }
        prop_assert_eq!(surface_genus(&g).unwrap(), surface_genus(&h).unwrap());
    }

    #[test]
    fn decision_matches_brute_force((seed, v, e) in graph_strategy(), seed2 in any::<u64>()) {
        let (g, _) = graph(seed, v, e);
        let (h, _) = graph(seed2, v, e);
        let fast = morita_equivalent_tss(&g, &h, 0.0).unwrap().is_some();
        prop_assert_eq!(fast, brute_tss_equivalent(&g, &h));
    }

    #[test]
    fn perturbed_period_breaks_equivalence((seed, v, e) in graph_strategy(), k in 0usize..8) {
        let (g, _) = graph(seed, v, e);
        prop_assume!(!g.edges.is_empty());
        let mut h = g.clone();
        let k = k % h.edges.len();
        h.edges[k].period *= 1.0 + 1e-3;
        prop_assert!(morita_equivalent_tss(&g, &h, 0.0).unwrap().is_none());
        prop_assert!(morita_equivalent_tss(&g, &h, 1e-2).unwrap().is_some());
    }
}

fn constant_field(d: usize, kind: FieldKind, vals: &[f64]) -> SampledField {
    let grid = GridSpec::cube(d, 0.0, 1.0, 2);
    SampledField::from_fn(grid, kind, |_, i, j| vals[i * d + j])
}

// |entries| < 1 and B scaled by 0.03 keep ‖B̃π̃‖∞ < 1 for d ≤ 4, even for B + B'
fn entries(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, d * d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zero_form_is_identity(d in 2usize..=4, vals in entries(4)) {
        let pi = constant_field(d, FieldKind::Bivector, &vals);
        let zero = SampledField::zeros(pi.grid.clone(), FieldKind::TwoForm);
        prop_assert_eq!(apply_gauge(&pi, &zero, 1e-10).unwrap().field, pi);
    }

    #[test]
    fn gauge_steps_compose(d in 2usize..=4, p in entries(4), b in entries(4), c in entries(4)) {
        let pi = constant_field(d, FieldKind::Bivector, &p);
        let b = constant_field(d, FieldKind::TwoForm, &b).scaled(0.03);
        let c = constant_field(d, FieldKind::TwoForm, &c).scaled(0.03);
        let dev = verify_composition(&pi, &b, &c, 1e-6).unwrap();
        prop_assert!(dev <= 1e-10, "composition deviation {dev}");
        let back = apply_gauge(&apply_gauge(&pi, &b, 1e-6).unwrap().field, &b.scaled(-1.0), 1e-6).unwrap().field;
        prop_assert!(max_deviation(&back, &pi) <= 1e-10);
    }

    #[test]
    fn inverse_law_and_rank(d in prop::sample::select(vec![2usize, 4]), p in entries(4), b in entries(4)) {
        let pi = constant_field(d, FieldKind::Bivector, &p);
        let b = constant_field(d, FieldKind::TwoForm, &b).scaled(0.03);
        let (dev, used) = inverse_law_deviation(&pi, &b, 1e-2).unwrap();
        prop_assert!(dev <= 1e-9 || used == 0, "inverse law deviation {dev}");
        let tau = apply_gauge(&pi, &b, 1e-6).unwrap().field;
        prop_assert_eq!(rank_map(&tau, 1e-8), rank_map(&pi, 1e-8));
    }
}
