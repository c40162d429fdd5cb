//! Topologically stable Poisson structures on compact oriented surfaces,
//! encoded as labelled oriented graphs.
//!
//! A vertex is a two-dimensional leaf labelled by its genus; an edge is a
//! zero curve, oriented towards the side where the structure is positive,
//! labelled by its modular period. Loops and parallel edges are allowed.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{permutation_group, FiniteGroup, GroupTable};
use crate::report::ValidationReport;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TssVertex {
    pub id: String,
    pub genus: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TssEdge {
    pub tail: String,
    pub head: String,
    pub period: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LabeledSurfaceGraph {
    pub vertices: Vec<TssVertex>,
    pub edges: Vec<TssEdge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume: Option<f64>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TssError {
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("edge {0} refers to unknown vertex `{1}`")]
    UnknownVertex(usize, String),
    #[error("graph fails validation ({} violations)", .0.violations.len())]
    Invalid(ValidationReport),
    #[error("inconsistent topology: Euler characteristic {0}")]
    InconsistentTopology(i64),
    #[error("volume missing on the {0} graph")]
    MissingVolume(&'static str),
}

/// Whether edge orientations must be preserved or reversed by a match.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Orientation {
    #[default]
    Preserving,
    /// Match against the second graph with every edge reversed.
    Reversing,
}

/// A labelled-graph isomorphism: `vertices[v]` and `edges[e]` are the
/// images in the second graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TssIsomorphism {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

#[derive(Clone, Debug)]
struct Indexed {
    genus: Vec<i64>,
    tail: Vec<usize>,
    head: Vec<usize>,
    period: Vec<f64>,
}

impl Indexed {
    fn vertex_count(&self) -> usize {
        self.genus.len()
    }

    fn edge_count(&self) -> usize {
        self.tail.len()
    }

    fn degree(&self, v: usize) -> usize {
        self.tail.iter().filter(|&&t| t == v).count() + self.head.iter().filter(|&&h| h == v).count()
    }

    fn reversed(&self) -> Self {
        Self {
            genus: self.genus.clone(),
            tail: self.head.clone(),
            head: self.tail.clone(),
            period: self.period.clone(),
        }
    }

    /// `edges_between[u * n + v]`: edges from `u` to `v`.
    fn edges_between(&self) -> Vec<Vec<usize>> {
        let n = self.vertex_count();
        let mut out = vec![Vec::new(); n * n];
        for e in 0..self.edge_count() {
            out[self.tail[e] * n + self.head[e]].push(e);
        }
        out
    }

    fn euler_characteristic(&self) -> i64 {
        (0..self.vertex_count())
            .map(|v| 2 - 2 * self.genus[v] - self.degree(v) as i64)
            .sum()
    }

    fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for e in 0..self.edge_count() {
                for (a, b) in [(self.tail[e], self.head[e]), (self.head[e], self.tail[e])] {
                    if a == v && !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
        }
        seen.iter().all(|&s| s)
    }
}

impl LabeledSurfaceGraph {
    fn index(&self) -> Result<Indexed, TssError> {
        let mut ids = HashMap::new();
        for (i, v) in self.vertices.iter().enumerate() {
            if ids.insert(v.id.as_str(), i).is_some() {
                return Err(TssError::DuplicateVertex(v.id.clone()));
            }
        }
        let lookup = |e: usize, id: &str| {
            ids.get(id)
                .copied()
                .ok_or_else(|| TssError::UnknownVertex(e, id.to_string()))
        };
        let mut tail = Vec::with_capacity(self.edges.len());
        let mut head = Vec::with_capacity(self.edges.len());
        for (i, e) in self.edges.iter().enumerate() {
            tail.push(lookup(i, &e.tail)?);
            head.push(lookup(i, &e.head)?);
        }
        Ok(Indexed {
            genus: self.vertices.iter().map(|v| v.genus).collect(),
            tail,
            head,
            period: self.edges.iter().map(|e| e.period).collect(),
        })
    }

    fn valid_index(&self) -> Result<Indexed, TssError> {
        let report = validate_tss(self);
        if !report.is_ok() {
            return Err(TssError::Invalid(report));
        }
        self.index()
    }

    /// The vertex and edge sets relabelled by `vertex_perm` / `edge_perm`
    /// (old index -> new index), keeping the same ids per vertex.
    pub fn permuted(&self, vertex_perm: &[usize], edge_perm: &[usize]) -> Self {
        let mut vertices = self.vertices.clone();
        for (old, &new) in vertex_perm.iter().enumerate() {
            vertices[new] = self.vertices[old].clone();
        }
        let mut edges = self.edges.clone();
        for (old, &new) in edge_perm.iter().enumerate() {
            edges[new] = self.edges[old].clone();
        }
        Self {
            vertices,
            edges,
            volume: self.volume,
        }
    }
}

/// Checks vertex ids, connectivity, positive periods, non-negative genera
/// and the Euler characteristic.
pub fn validate_tss(g: &LabeledSurfaceGraph) -> ValidationReport {
    let mut r = ValidationReport::default();
    let idx = match g.index() {
        Ok(idx) => idx,
        Err(TssError::DuplicateVertex(v)) => {
            r.push("duplicate vertex", [v]);
            return r;
        }
        Err(TssError::UnknownVertex(e, v)) => {
            r.push("unknown vertex", [e.to_string(), v]);
            return r;
        }
        Err(_) => unreachable!("index reports only id errors"),
    };
    if g.vertices.is_empty() {
        r.push("empty graph", Vec::<String>::new());
        return r;
    }
    if !idx.is_connected() {
        r.push("disconnected", Vec::<String>::new());
    }
    for (i, e) in g.edges.iter().enumerate() {
        if !(e.period.is_finite() && e.period > 0.0) {
            r.push("non-positive period", [i.to_string(), e.period.to_string()]);
        }
    }
    for v in &g.vertices {
        if v.genus < 0 {
            r.push("negative genus", [v.id.clone(), v.genus.to_string()]);
        }
    }
    let chi = idx.euler_characteristic();
    if chi % 2 != 0 || chi > 2 {
        r.push("euler characteristic", [chi.to_string()]);
    }
    if let Some(vol) = g.volume {
        if !vol.is_finite() {
            r.push("non-finite volume", [vol.to_string()]);
        }
    }
    r
}

/// `χ = Σ_v (2 − 2·genus(v) − deg(v))`; a loop adds 2 to the degree.
pub fn euler_characteristic(g: &LabeledSurfaceGraph) -> Result<i64, TssError> {
    Ok(g.index()?.euler_characteristic())
}

/// Genus of the closed surface, `(2 − χ)/2`.
pub fn surface_genus(g: &LabeledSurfaceGraph) -> Result<u64, TssError> {
    let chi = g.index()?.euler_characteristic();
    if chi % 2 != 0 || chi > 2 {
        return Err(TssError::InconsistentTopology(chi));
    }
    Ok(((2 - chi) / 2) as u64)
}

/// Perfect matching between two equal-size period lists, `|a − b| ≤ tol`.
/// Returns `m` with `left[i]` matched to `right[m[i]]`.
fn match_periods(left: &[f64], right: &[f64], tol: f64) -> Option<Vec<usize>> {
    if left.len() != right.len() {
        return None;
    }
    let n = left.len();
    let ok = |i: usize, j: usize| (left[i] - right[j]).abs() <= tol;
    let mut owner: Vec<Option<usize>> = vec![None; n];
    fn augment(
        i: usize,
        n: usize,
        ok: &dyn Fn(usize, usize) -> bool,
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for j in 0..n {
            if ok(i, j) && !seen[j] {
                seen[j] = true;
                if owner[j].is_none_or(|k| augment(k, n, ok, seen, owner)) {
                    owner[j] = Some(i);
                    return true;
                }
            }
        }
        false
    }
    for i in 0..n {
        if !augment(i, n, &ok, &mut vec![false; n], &mut owner) {
            return None;
        }
    }
    let mut m = vec![0; n];
    for (j, o) in owner.iter().enumerate() {
        m[o.expect("perfect matching")] = j;
    }
    Some(m)
}

struct IsoSearch<'a> {
    a: &'a Indexed,
    b: &'a Indexed,
    a_between: Vec<Vec<usize>>,
    b_between: Vec<Vec<usize>>,
    order: Vec<usize>,
    map: Vec<usize>,
    used: Vec<bool>,
    tol: f64,
}

impl IsoSearch<'_> {
    fn periods(g: &Indexed, edges: &[usize]) -> Vec<f64> {
        edges.iter().map(|&e| g.period[e]).collect()
    }

    fn pair_ok(&self, u: usize, v: usize) -> bool {
        let (na, nb) = (self.a.vertex_count(), self.b.vertex_count());
        let ea = &self.a_between[u * na + v];
        let eb = &self.b_between[self.map[u] * nb + self.map[v]];
        ea.len() == eb.len()
            && match_periods(&Self::periods(self.a, ea), &Self::periods(self.b, eb), self.tol).is_some()
    }

    fn solve(&mut self, k: usize) -> bool {
        if k == self.order.len() {
            return true;
        }
        let u = self.order[k];
        for w in 0..self.b.vertex_count() {
            if self.used[w]
                || self.a.genus[u] != self.b.genus[w]
                || self.a.degree(u) != self.b.degree(w)
            {
                continue;
            }
            self.map[u] = w;
            let consistent = self.order[..=k]
                .iter()
                .all(|&v| self.pair_ok(u, v) && self.pair_ok(v, u));
            if consistent {
                self.used[w] = true;
                if self.solve(k + 1) {
                    return true;
                }
                self.used[w] = false;
            }
        }
        self.map[u] = usize::MAX;
        false
    }

    fn edge_map(&self) -> Vec<usize> {
        let (na, nb) = (self.a.vertex_count(), self.b.vertex_count());
        let mut edges = vec![0; self.a.edge_count()];
        for u in 0..na {
            for v in 0..na {
                let ea = &self.a_between[u * na + v];
                let eb = &self.b_between[self.map[u] * nb + self.map[v]];
                let m = match_periods(&Self::periods(self.a, ea), &Self::periods(self.b, eb), self.tol)
                    .expect("checked during search");
                for (i, &e) in ea.iter().enumerate() {
                    edges[e] = eb[m[i]];
                }
            }
        }
        edges
    }
}

fn isomorphism(a: &Indexed, b: &Indexed, tol: f64) -> Option<TssIsomorphism> {
    if a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count() {
        return None;
    }
    // most constrained vertices first
    let mut order: Vec<usize> = (0..a.vertex_count()).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(a.degree(v)));
    let mut search = IsoSearch {
        a,
        b,
        a_between: a.edges_between(),
        b_between: b.edges_between(),
        order,
        map: vec![usize::MAX; a.vertex_count()],
        used: vec![false; b.vertex_count()],
        tol,
    };
    if !search.solve(0) {
        return None;
    }
    let edges = search.edge_map();
    Some(TssIsomorphism {
        vertices: search.map,
        edges,
    })
}

/// A labelled-graph isomorphism `g1 -> g2` preserving genus exactly and
/// periods within `tol` (absolute), or `None`.
pub fn find_isomorphism(
    g1: &LabeledSurfaceGraph,
    g2: &LabeledSurfaceGraph,
    tol: f64,
    orientation: Orientation,
) -> Result<Option<TssIsomorphism>, TssError> {
    let a = g1.valid_index()?;
    let mut b = g2.valid_index()?;
    if orientation == Orientation::Reversing {
        b = b.reversed();
    }
    Ok(isomorphism(&a, &b, tol))
}

/// Morita equivalence of the underlying structures: isomorphism of the
/// labelled oriented graphs.
pub fn morita_equivalent_tss(
    g1: &LabeledSurfaceGraph,
    g2: &LabeledSurfaceGraph,
    tol: f64,
) -> Result<Option<TssIsomorphism>, TssError> {
    find_isomorphism(g1, g2, tol, Orientation::Preserving)
}

/// Gauge equivalence; for these structures it coincides with Morita
/// equivalence.
pub fn gauge_equivalent_tss(
    g1: &LabeledSurfaceGraph,
    g2: &LabeledSurfaceGraph,
    tol: f64,
) -> Result<Option<TssIsomorphism>, TssError> {
    morita_equivalent_tss(g1, g2, tol)
}

/// Poisson isomorphism: labelled-graph isomorphism and equal volumes within
/// `tol`.
pub fn poisson_isomorphic_tss(
    g1: &LabeledSurfaceGraph,
    g2: &LabeledSurfaceGraph,
    tol: f64,
) -> Result<Option<TssIsomorphism>, TssError> {
    let v1 = g1.volume.ok_or(TssError::MissingVolume("first"))?;
    let v2 = g2.volume.ok_or(TssError::MissingVolume("second"))?;
    if (v1 - v2).abs() > tol {
        // still validate both inputs
        g1.valid_index()?;
        g2.valid_index()?;
        return Ok(None);
    }
    morita_equivalent_tss(g1, g2, tol)
}

/// All label-preserving automorphisms (exact periods), the identity first.
pub fn graph_automorphism_maps(g: &LabeledSurfaceGraph) -> Result<Vec<TssIsomorphism>, TssError> {
    let a = g.valid_index()?;
    let n = a.vertex_count();
    let between = a.edges_between();
    let mut out = Vec::new();
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    vertex_maps(&a, &between, 0, &mut map, &mut used, &mut out);
    out.sort_by(|x, y| {
        let id = |m: &TssIsomorphism| {
            m.vertices.iter().enumerate().all(|(i, &v)| i == v)
                && m.edges.iter().enumerate().all(|(i, &e)| i == e)
        };
        (!id(x), &x.vertices, &x.edges).cmp(&(!id(y), &y.vertices, &y.edges))
    });
    Ok(out)
}

fn vertex_maps(
    a: &Indexed,
    between: &[Vec<usize>],
    k: usize,
    map: &mut Vec<usize>,
    used: &mut Vec<bool>,
    out: &mut Vec<TssIsomorphism>,
) {
    let n = a.vertex_count();
    if k == n {
        // every bijection of each parallel class onto its image class that
        // preserves periods exactly
        let mut choices: Vec<Vec<Vec<(usize, usize)>>> = Vec::new();
        for u in 0..n {
            for v in 0..n {
                let src = &between[u * n + v];
                let dst = &between[map[u] * n + map[v]];
                let mut options = Vec::new();
                for perm in crate::group::permutations(src.len()) {
                    if perm
                        .iter()
                        .enumerate()
                        .all(|(i, &j)| a.period[src[i]] == a.period[dst[j]])
                    {
                        options.push(perm.iter().enumerate().map(|(i, &j)| (src[i], dst[j])).collect());
                    }
                }
                if options.is_empty() {
                    return;
                }
                choices.push(options);
            }
        }
        let mut edges = vec![0; a.edge_count()];
        product(&choices, 0, &mut edges, &mut |edges| {
            out.push(TssIsomorphism {
                vertices: map.clone(),
                edges: edges.to_vec(),
            })
        });
        return;
    }
    for w in 0..n {
        if !used[w] && a.genus[w] == a.genus[k] && a.degree(w) == a.degree(k) {
            map[k] = w;
            let sizes_match = (0..=k).all(|v| {
                between[k * n + v].len() == between[w * n + map[v]].len()
                    && between[v * n + k].len() == between[map[v] * n + w].len()
            });
            if sizes_match {
                used[w] = true;
                vertex_maps(a, between, k + 1, map, used, out);
                used[w] = false;
            }
            map[k] = usize::MAX;
        }
    }
}

fn product(
    choices: &[Vec<Vec<(usize, usize)>>],
    i: usize,
    edges: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize]),
) {
    if i == choices.len() {
        emit(edges);
        return;
    }
    for option in &choices[i] {
        for &(e, f) in option {
            edges[e] = f;
        }
        product(choices, i + 1, edges, emit);
    }
}

/// The automorphism group of the labelled oriented graph, acting on
/// vertices and edges. Element `i` is `maps[i]`, named `g{i}`.
pub fn graph_automorphisms(g: &LabeledSurfaceGraph) -> Result<(FiniteGroup, Vec<TssIsomorphism>), TssError> {
    let maps = graph_automorphism_maps(g)?;
    let n = g.vertices.len();
    let perms: Vec<Vec<usize>> = maps
        .iter()
        .map(|m| m.vertices.iter().copied().chain(m.edges.iter().map(|&e| e + n)).collect())
        .collect();
    let names = (0..maps.len()).map(|i| format!("g{i}")).collect();
    let group = permutation_group(names, &perms).expect("automorphisms form a group");
    Ok((group, maps))
}

/// `(genus, boundary components)` of one open leaf.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafDescriptor {
    pub vertex: String,
    pub genus: i64,
    pub boundary: usize,
}

/// The three ingredients of the Picard group of the structure. How they
/// combine is not decided here.
#[derive(Clone, Debug)]
pub struct PicardIngredients {
    pub graph_aut: FiniteGroup,
    pub torus_rank: usize,
    pub leaf_descriptors: Vec<LeafDescriptor>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PicardIngredientsWire {
    #[serde(rename = "graphAut")]
    pub graph_aut: GroupTable,
    #[serde(rename = "torusRank")]
    pub torus_rank: usize,
    #[serde(rename = "leafDescriptors")]
    pub leaf_descriptors: Vec<LeafDescriptor>,
}

impl PicardIngredients {
    pub fn to_wire(&self) -> PicardIngredientsWire {
        PicardIngredientsWire {
            graph_aut: self.graph_aut.to_wire(),
            torus_rank: self.torus_rank,
            leaf_descriptors: self.leaf_descriptors.clone(),
        }
    }
}

pub fn picard_ingredients(g: &LabeledSurfaceGraph) -> Result<PicardIngredients, TssError> {
    let (graph_aut, _) = graph_automorphisms(g)?;
    let a = g.index()?;
    Ok(PicardIngredients {
        graph_aut,
        torus_rank: a.edge_count(),
        leaf_descriptors: g
            .vertices
            .iter()
            .enumerate()
            .map(|(v, vert)| LeafDescriptor {
                vertex: vert.id.clone(),
                genus: vert.genus,
                boundary: a.degree(v),
            })
            .collect(),
    })
}
