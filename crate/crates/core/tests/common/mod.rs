#![allow(dead_code)]

use std::sync::Arc;

use morita_core::bibundle::Bibundle;
use morita_core::group::{permutations, FiniteGroup};
use morita_core::groupoid::{
    action_groupoid, bundle_of_groups, collect_functors, disjoint_union, from_group,
    gauge_groupoid, pair_groupoid, FiniteGroupoid, FunctorKind, GroupoidMap, PrincipalBundleData,
};
use morita_core::tss::{LabeledSurfaceGraph, TssEdge, TssVertex};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

pub fn gauge_over(group: &FiniteGroup, points: usize) -> FiniteGroupoid {
    gauge_groupoid(&PrincipalBundleData::trivial(&names("b", points), group)).unwrap()
}

/// `Z2` acting on `{0, 1, 2, 3}` by the involution `(0 1)`, fixing 2 and 3.
fn partial_swap() -> FiniteGroupoid {
    let z2 = FiniteGroup::cyclic(2);
    let swap = [1, 0, 2, 3];
    let points = names("q", 4);
    let act = vec![vec![0, 1, 2, 3], swap.to_vec()];
    action_groupoid(&z2, &points, &act).unwrap()
}

/// The exact-sequence corpus: named groupoids covering groups, pair
/// groupoids, gauge groupoids, bundles of groups and disjoint unions.
pub fn corpus() -> Vec<(String, Arc<FiniteGroupoid>)> {
    let z = FiniteGroup::cyclic;
    let mut out: Vec<(String, FiniteGroupoid)> = Vec::new();
    for n in 2..=6 {
        out.push((format!("Z{n}"), from_group(&z(n))));
    }
    out.push(("S3".into(), from_group(&FiniteGroup::symmetric(3))));
    out.push(("D4".into(), from_group(&FiniteGroup::dihedral(4))));
    out.push(("Q8".into(), from_group(&FiniteGroup::quaternion())));
    out.push(("Z2xZ2".into(), from_group(&FiniteGroup::direct_product(&z(2), &z(2)))));
    for n in 1..=4 {
        out.push((format!("pair({n})"), pair_groupoid(n)));
    }
    out.push(("gauge Z3 over 2".into(), gauge_over(&z(3), 2)));
    out.push(("gauge S3 over 2".into(), gauge_over(&FiniteGroup::symmetric(3), 2)));
    out.push(("gauge Z2 over 3".into(), gauge_over(&z(2), 3)));
    out.push(("bundle Z2,Z3".into(), bundle_of_groups(&[z(2), z(3)])));
    out.push(("bundle Z2,Z2".into(), bundle_of_groups(&[z(2), z(2)])));
    out.push(("bundle Z2,Z1,Z3".into(), bundle_of_groups(&[z(2), z(1), z(3)])));
    out.push((
        "point + pair(2)".into(),
        disjoint_union(&[&from_group(&z(1)), &pair_groupoid(2)]),
    ));
    out.push((
        "Z2 + gauge Z2 over 2".into(),
        disjoint_union(&[&from_group(&z(2)), &gauge_over(&z(2), 2)]),
    ));
    out.push(("Z2 acting on 4 points".into(), partial_swap()));
    out.into_iter().map(|(n, g)| (n, Arc::new(g))).collect()
}

/// Small groupoids used as vertices of random composable chains.
pub fn chain_groupoids() -> Vec<Arc<FiniteGroupoid>> {
    let z = FiniteGroup::cyclic;
    [
        from_group(&z(1)),
        from_group(&z(2)),
        from_group(&z(3)),
        from_group(&z(4)),
        from_group(&FiniteGroup::symmetric(3)),
        from_group(&FiniteGroup::direct_product(&z(2), &z(2))),
        pair_groupoid(2),
        pair_groupoid(3),
        gauge_over(&z(2), 2),
        bundle_of_groups(&[z(2), z(1)]),
        disjoint_union(&[&from_group(&z(1)), &pair_groupoid(2)]),
    ]
    .into_iter()
    .map(Arc::new)
    .collect()
}

pub fn functors(dom: &FiniteGroupoid, cod: &FiniteGroupoid) -> Vec<GroupoidMap> {
    collect_functors(dom, cod, FunctorKind::All)
}

/// Carrier names replaced by shuffled opaque ids, so that the internal
/// order of the carrier changes.
pub fn relabel(s: &Bibundle, rng: &mut impl Rng) -> Bibundle {
    let mut ids: Vec<usize> = (0..s.len()).collect();
    ids.shuffle(rng);
    let carrier = s.carrier().to_vec();
    s.renamed(|x| {
        let i = carrier.iter().position(|c| c == x).unwrap();
        format!("u{:03}", ids[i])
    })
}

/// Brute-force bibundle isomorphism: every bijection of carriers.
pub fn brute_isomorphic(a: &Bibundle, b: &Bibundle) -> bool {
    if a.left() != b.left() || a.right() != b.right() || a.len() != b.len() {
        return false;
    }
    let (gl, gr) = (a.left(), a.right());
    permutations(a.len()).iter().any(|f| {
        (0..a.len()).all(|x| a.j1(x) == b.j1(f[x]) && a.j2(x) == b.j2(f[x]))
            && (0..gl.arrow_count()).all(|g| {
                (0..a.len()).all(|x| a.act_left(g, x).map(|y| f[y]) == b.act_left(g, f[x]))
            })
            && (0..gr.arrow_count()).all(|g| {
                (0..a.len()).all(|x| a.act_right(x, g).map(|y| f[y]) == b.act_right(f[x], g))
            })
    })
}

pub fn surface_graph(genera: &[i64], edges: &[(usize, usize, f64)]) -> LabeledSurfaceGraph {
    LabeledSurfaceGraph {
        vertices: genera
            .iter()
            .enumerate()
            .map(|(i, &genus)| TssVertex {
                id: format!("v{i}"),
                genus,
            })
            .collect(),
        edges: edges
            .iter()
            .map(|&(t, h, period)| TssEdge {
                tail: format!("v{t}"),
                head: format!("v{h}"),
                period,
            })
            .collect(),
        volume: None,
    }
}

/// A random connected surface graph with `v` vertices and `e ≥ v − 1`
/// edges. Periods come from a small set so that parallel edges collide.
pub fn random_surface_graph(rng: &mut impl Rng, v: usize, e: usize) -> LabeledSurfaceGraph {
    let genera: Vec<i64> = (0..v).map(|_| rng.gen_range(0..2)).collect();
    let period = |rng: &mut dyn rand::RngCore| [1.0, 2.0, 3.5][rng.gen_range(0..3)];
    let mut edges = Vec::new();
    for k in 1..v {
        let other = rng.gen_range(0..k);
        let (t, h) = if rng.gen_bool(0.5) { (k, other) } else { (other, k) };
        edges.push((t, h, period(rng)));
    }
    while edges.len() < e {
        edges.push((rng.gen_range(0..v), rng.gen_range(0..v), period(rng)));
    }
    edges.shuffle(rng);
    surface_graph(&genera, &edges)
}

/// The same graph with vertex and edge order shuffled and vertex ids
/// renamed.
pub fn shuffled(g: &LabeledSurfaceGraph, rng: &mut impl Rng) -> LabeledSurfaceGraph {
    let mut vp: Vec<usize> = (0..g.vertices.len()).collect();
    vp.shuffle(rng);
    let mut ep: Vec<usize> = (0..g.edges.len()).collect();
    ep.shuffle(rng);
    let mut out = g.permuted(&vp, &ep);
    let rename = |id: &str| format!("w{}", &id[1..]);
    for v in &mut out.vertices {
        v.id = rename(&v.id);
    }
    for e in &mut out.edges {
        e.tail = rename(&e.tail);
        e.head = rename(&e.head);
    }
    out
}

/// Brute-force decision: some vertex permutation preserves genera and,
/// for every ordered vertex pair, a permutation of the parallel edges
/// matches periods exactly.
pub fn brute_tss_equivalent(a: &LabeledSurfaceGraph, b: &LabeledSurfaceGraph) -> bool {
    let n = a.vertices.len();
    if n != b.vertices.len() || a.edges.len() != b.edges.len() {
        return false;
    }
    let idx = |g: &LabeledSurfaceGraph, id: &str| g.vertices.iter().position(|v| v.id == id).unwrap();
    let ends = |g: &LabeledSurfaceGraph| -> Vec<(usize, usize, f64)> {
        g.edges
            .iter()
            .map(|e| (idx(g, &e.tail), idx(g, &e.head), e.period))
            .collect()
    };
    let (ea, eb) = (ends(a), ends(b));
    permutations(n).iter().any(|sigma| {
        (0..n).all(|v| a.vertices[v].genus == b.vertices[sigma[v]].genus)
            && (0..n).all(|u| {
                (0..n).all(|v| {
                    let pa: Vec<f64> = ea
                        .iter()
                        .filter(|e| (e.0, e.1) == (u, v))
                        .map(|e| e.2)
                        .collect();
                    let pb: Vec<f64> = eb
                        .iter()
                        .filter(|e| (e.0, e.1) == (sigma[u], sigma[v]))
                        .map(|e| e.2)
                        .collect();
                    pa.len() == pb.len()
                        && permutations(pa.len())
                            .iter()
                            .any(|m| (0..pa.len()).all(|i| pa[i] == pb[m[i]]))
                })
            })
    })
}
