//! Automorphisms, bisections, inner and outer automorphisms, Picard groups
//! and the exact sequences relating them.
//!
//! Conventions: a bisection `N` is stored by source, `N[x]` an arrow with
//! source `x`, and `t∘N` is a permutation of the objects. Groups of maps are
//! multiplied as composition, `a * b = a after b`.

use std::collections::{BTreeSet, HashMap};
use std::ops::ControlFlow;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bibundle::{bibundle_isomorphic, from_homomorphism, identity_bibundle, tensor, Bibundle};
use crate::group::{permutation_group, FiniteGroup, GroupError, GroupTable};
use crate::groupoid::{automorphisms, enumerate_functors, FiniteGroupoid, FunctorKind, GroupoidMap};
use crate::report::Violation;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PicardError {
    #[error("formula method applies only to transitive groupoids and bundles of groups")]
    FormulaInapplicable,
    #[error("enumeration (order {enumerated}) and formula (order {formula}) disagree")]
    CrossCheckFailed { enumerated: usize, formula: usize },
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// A bisection, `arrows[x]` the arrow leaving `x`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bisection {
    pub arrows: Vec<usize>,
}

impl Bisection {
    pub fn units(g: &FiniteGroupoid) -> Self {
        Self {
            arrows: (0..g.object_count()).map(|x| g.unit(x)).collect(),
        }
    }

    pub fn is_bisection(&self, g: &FiniteGroupoid) -> bool {
        let mut hit = vec![false; g.object_count()];
        self.arrows.len() == g.object_count()
            && self.arrows.iter().enumerate().all(|(x, &a)| {
                a < g.arrow_count() && g.src(a) == x && !std::mem::replace(&mut hit[g.tgt(a)], true)
            })
    }

    /// `(NM)(x) = N(t(M x)) · M(x)`.
    pub fn product(&self, other: &Bisection, g: &FiniteGroupoid) -> Bisection {
        Bisection {
            arrows: other
                .arrows
                .iter()
                .map(|&m| g.mul(self.arrows[g.tgt(m)], m))
                .collect(),
        }
    }

    pub fn inverse(&self, g: &FiniteGroupoid) -> Bisection {
        let mut arrows = vec![0; self.arrows.len()];
        for &a in &self.arrows {
            arrows[g.tgt(a)] = g.inv(a);
        }
        Bisection { arrows }
    }

    /// The induced permutation `t∘N` of objects.
    pub fn object_map(&self, g: &FiniteGroupoid) -> Vec<usize> {
        self.arrows.iter().map(|&a| g.tgt(a)).collect()
    }

    pub fn name(&self, g: &FiniteGroupoid) -> String {
        let parts: Vec<&str> = self.arrows.iter().map(|&a| g.arrow_name(a)).collect();
        format!("<{}>", parts.join("|"))
    }
}

/// All bisections, the unit bisection first, then in lexicographic order.
pub fn bisections(g: &FiniteGroupoid) -> Vec<Bisection> {
    fn rec(
        g: &FiniteGroupoid,
        x: usize,
        used: &mut [bool],
        current: &mut Vec<usize>,
        out: &mut Vec<Bisection>,
    ) {
        if x == g.object_count() {
            out.push(Bisection {
                arrows: current.clone(),
            });
            return;
        }
        for a in g.source_fibre(x) {
            let t = g.tgt(a);
            if !used[t] {
                used[t] = true;
                current.push(a);
                rec(g, x + 1, used, current, out);
                current.pop();
                used[t] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(g, 0, &mut vec![false; g.object_count()], &mut Vec::new(), &mut out);
    let units = Bisection::units(g);
    out.sort_by(|a, b| (a != &units, a).cmp(&(b != &units, b)));
    out
}

/// The group of bisections; element `i` is `bis[i]`.
pub fn bisection_group(g: &FiniteGroupoid, bis: &[Bisection]) -> FiniteGroup {
    let index: HashMap<&Bisection, usize> = bis.iter().enumerate().map(|(i, b)| (b, i)).collect();
    let names = bis.iter().map(|b| b.name(g)).collect();
    FiniteGroup::from_fn(names, |a, b| index[&bis[a].product(&bis[b], g)])
        .expect("bisections form a group")
}

/// `Φ_N(g) = N(t g) · g · N(s g)⁻¹`, on objects `x ↦ t(N x)`.
pub fn inner_automorphism(g: &FiniteGroupoid, n: &Bisection) -> GroupoidMap {
    GroupoidMap {
        objects: n.object_map(g),
        arrows: (0..g.arrow_count())
            .map(|a| {
                let left = g.mul(n.arrows[g.tgt(a)], a);
                g.mul(left, g.inv(n.arrows[g.src(a)]))
            })
            .collect(),
    }
}

/// Aut(G) with its elements as maps; `maps[i]` is element `i`, named `a{i}`,
/// identity first.
#[derive(Clone, Debug)]
pub struct AutomorphismGroup {
    pub maps: Vec<GroupoidMap>,
    pub group: FiniteGroup,
}

impl AutomorphismGroup {
    pub fn new(g: &FiniteGroupoid) -> Self {
        let maps = automorphisms(g);
        let names = (0..maps.len()).map(|i| format!("a{i}")).collect();
        let arrow_maps: Vec<Vec<usize>> = maps.iter().map(|m| m.arrows.clone()).collect();
        let group = if g.arrow_count() == 0 {
            FiniteGroup::trivial()
        } else {
            permutation_group(names, &arrow_maps).expect("automorphisms form a group")
        };
        Self { maps, group }
    }

    pub fn index_of(&self, map: &GroupoidMap) -> Option<usize> {
        self.maps.iter().position(|m| m.arrows == map.arrows)
    }
}

/// Inner automorphisms as a sorted list of indices into `aut`.
pub fn inaut(g: &FiniteGroupoid, aut: &AutomorphismGroup) -> Vec<usize> {
    let set: BTreeSet<usize> = bisections(g)
        .iter()
        .map(|n| {
            aut.index_of(&inner_automorphism(g, n))
                .expect("inner automorphisms are automorphisms")
        })
        .collect();
    set.into_iter().collect()
}

/// Out(G) = Aut(G)/Inaut(G), with coset representatives (indices into
/// `aut`).
pub fn outaut(g: &FiniteGroupoid, aut: &AutomorphismGroup) -> Result<(FiniteGroup, Vec<usize>), PicardError> {
    Ok(aut.group.quotient(&inaut(g, aut))?)
}

/// The kernel of `N ↦ Φ_N`: indices into `bis`.
pub fn ciso_bisections(g: &FiniteGroupoid, bis: &[Bisection]) -> Vec<usize> {
    (0..bis.len())
        .filter(|&i| inner_automorphism(g, &bis[i]).is_identity())
        .collect()
}

/// Bisections with `t∘N = id` and `N(x)` central in the isotropy at `x`.
pub fn central_valued_bisections(g: &FiniteGroupoid, bis: &[Bisection]) -> Vec<usize> {
    let central = |a: usize| {
        let x = g.src(a);
        g.isotropy_arrows(x)
            .iter()
            .all(|&k| g.mul(a, k) == g.mul(k, a))
    };
    (0..bis.len())
        .filter(|&i| {
            bis[i]
                .arrows
                .iter()
                .all(|&a| g.src(a) == g.tgt(a) && central(a))
        })
        .collect()
}

/// Out of a finite group, from its automorphisms modulo conjugations.
pub fn group_outer_automorphisms(grp: &FiniteGroup) -> FiniteGroup {
    let autos = grp.automorphisms();
    let names = (0..autos.len()).map(|i| format!("a{i}")).collect();
    let aut = permutation_group(names, &autos).expect("automorphisms form a group");
    let inner: BTreeSet<usize> = (0..grp.order())
        .map(|h| {
            let c = grp.conjugation(h);
            autos.iter().position(|m| *m == c).expect("conjugation is an automorphism")
        })
        .collect();
    let inner: Vec<usize> = inner.into_iter().collect();
    aut.quotient(&inner).expect("inner automorphisms are normal").0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PicardMethod {
    Enumeration,
    TransitiveFormula,
    BundleOfGroupsFormula,
}

/// Requested computation route.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MethodChoice {
    #[default]
    Auto,
    Enumerate,
    Formula,
}

/// Isomorphism classes of biprincipal self-bibundles under tensor product.
/// Element `i` is named `p{i}`; `p0` is the class of the identity bibundle.
/// `representatives` is empty for the formula methods.
#[derive(Clone, Debug)]
pub struct PicardGroup {
    pub group: FiniteGroup,
    pub method: PicardMethod,
    pub representatives: Vec<Bibundle>,
    /// Set when both methods ran and agreed.
    pub cross_checked: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PicardWire {
    pub elements: Vec<String>,
    pub table: Vec<Vec<String>>,
    pub method: PicardMethod,
}

impl PicardGroup {
    pub fn order(&self) -> usize {
        self.group.order()
    }

    pub fn to_wire(&self) -> PicardWire {
        let GroupTable { elements, table } = self.group.to_wire();
        PicardWire {
            elements,
            table,
            method: self.method,
        }
    }

    /// Index of the class of `s`, when representatives are present.
    pub fn classify(&self, s: &Bibundle) -> Option<usize> {
        self.representatives
            .iter()
            .position(|r| bibundle_isomorphic(r, s).is_some())
    }
}

fn formula_kind(g: &FiniteGroupoid) -> Option<PicardMethod> {
    if g.object_count() == 0 {
        None
    } else if g.is_transitive() {
        Some(PicardMethod::TransitiveFormula)
    } else if g.is_group_bundle() {
        Some(PicardMethod::BundleOfGroupsFormula)
    } else {
        None
    }
}

fn renamed(group: &FiniteGroup) -> FiniteGroup {
    let names = (0..group.order()).map(|i| format!("p{i}")).collect();
    FiniteGroup::from_fn(names, |a, b| group.mul(a, b)).expect("relabelled group")
}

/// Picard group by enumeration. Every left-principal bibundle over a finite
/// discrete base has a section of `J2`, so every biprincipal self-bibundle
/// is isomorphic to `(G)_F` for a self-equivalence `F`; these are
/// enumerated and deduplicated up to bibundle isomorphism.
pub fn picard_enumerate(g: &Arc<FiniteGroupoid>) -> PicardGroup {
    let mut reps = vec![identity_bibundle(g)];
    enumerate_functors(g, g, FunctorKind::Equivalence, |f| {
        let s = from_homomorphism(g, g, f).expect("enumerated maps are functors");
        if !reps.iter().any(|r| bibundle_isomorphic(r, &s).is_some()) {
            reps.push(s);
        }
        ControlFlow::Continue(())
    });
    let n = reps.len();
    let mut table = vec![vec![0; n]; n];
    for a in 0..n {
        for b in 0..n {
            let t = tensor(&reps[a], &reps[b]).expect("biprincipal factors");
            table[a][b] = reps
                .iter()
                .position(|r| bibundle_isomorphic(r, &t).is_some())
                .expect("tensor of biprincipal bibundles is biprincipal");
        }
    }
    let names = (0..n).map(|i| format!("p{i}")).collect();
    let group = FiniteGroup::from_table(names, table).expect("Picard group axioms");
    PicardGroup {
        group,
        method: PicardMethod::Enumeration,
        representatives: reps,
        cross_checked: false,
    }
}

/// Picard group by formula: Out of an isotropy group for transitive
/// groupoids, Aut/Inaut for bundles of groups.
pub fn picard_formula(g: &FiniteGroupoid) -> Result<PicardGroup, PicardError> {
    let method = formula_kind(g).ok_or(PicardError::FormulaInapplicable)?;
    let out = match method {
        PicardMethod::TransitiveFormula => group_outer_automorphisms(&g.isotropy(0)),
        _ => outaut(g, &AutomorphismGroup::new(g))?.0,
    };
    Ok(PicardGroup {
        group: renamed(&out),
        method,
        representatives: Vec::new(),
        cross_checked: false,
    })
}

/// Picard group by the requested method. `Auto` enumerates, and when a
/// formula applies also computes it and checks the two groups are
/// isomorphic.
pub fn picard_group(g: &Arc<FiniteGroupoid>, method: MethodChoice) -> Result<PicardGroup, PicardError> {
    match method {
        MethodChoice::Enumerate => Ok(picard_enumerate(g)),
        MethodChoice::Formula => picard_formula(g),
        MethodChoice::Auto => {
            let mut pic = picard_enumerate(g);
            if formula_kind(g).is_some() {
                let f = picard_formula(g)?;
                if !pic.group.is_isomorphic(&f.group) {
                    return Err(PicardError::CrossCheckFailed {
                        enumerated: pic.order(),
                        formula: f.order(),
                    });
                }
                pic.cross_checked = true;
            }
            Ok(pic)
        }
    }
}

/// `j(Φ) = [(G)_Φ]`, as an element index of `pic`.
pub fn j_homomorphism(g: &Arc<FiniteGroupoid>, pic: &PicardGroup, phi: &GroupoidMap) -> Option<usize> {
    let s = from_homomorphism(g, g, phi).ok()?;
    pic.classify(&s)
}

/// The orbit permutation induced by element `x` of `pic`.
pub fn center_map(pic: &PicardGroup, x: usize) -> Option<Vec<usize>> {
    pic.representatives.get(x)?.induced_orbit_map()
}

/// Kernel of [`center_map`], as element indices.
pub fn static_picard(pic: &PicardGroup) -> Vec<usize> {
    (0..pic.representatives.len())
        .filter(|&x| {
            center_map(pic, x).is_some_and(|p| p.iter().enumerate().all(|(i, &v)| i == v))
        })
        .collect()
}

/// For a biprincipal self-bibundle, a section `σ` of `J2` with `J1∘σ`
/// bijective, and the automorphism `Φ` it determines:
/// `Φ(x) = J1(σ x)` and `Φ(g)` the unique `a` with `a·σ(s g) = σ(t g)·g`.
/// Then `S ≅ (G)_Φ` via `(h, y) ↦ h·σ(y)`.
pub fn lemma_section_check(s: &Bibundle) -> Option<(Vec<usize>, GroupoidMap)> {
    let (l, r) = (s.left(), s.right());
    if l != r || !s.is_left_principal() {
        return None;
    }
    let g = &**l;
    let fibres: Vec<Vec<usize>> = (0..g.object_count())
        .map(|y| (0..s.len()).filter(|&x| s.j2(x) == y).collect())
        .collect();
    fn rec(
        s: &Bibundle,
        fibres: &[Vec<usize>],
        y: usize,
        used: &mut [bool],
        sigma: &mut Vec<usize>,
    ) -> bool {
        if y == fibres.len() {
            return true;
        }
        for &x in &fibres[y] {
            if !used[s.j1(x)] {
                used[s.j1(x)] = true;
                sigma.push(x);
                if rec(s, fibres, y + 1, used, sigma) {
                    return true;
                }
                sigma.pop();
                used[s.j1(x)] = false;
            }
        }
        false
    }
    let mut sigma = Vec::new();
    if !rec(s, &fibres, 0, &mut vec![false; g.object_count()], &mut sigma) {
        return None;
    }
    let objects = sigma.iter().map(|&x| s.j1(x)).collect();
    let mut arrows = Vec::with_capacity(g.arrow_count());
    for a in 0..g.arrow_count() {
        let target = s.act_right(sigma[g.tgt(a)], a)?;
        let base = sigma[g.src(a)];
        let phi = g
            .source_fibre(s.j1(base))
            .into_iter()
            .find(|&b| s.act_left(b, base) == Some(target))?;
        arrows.push(phi);
    }
    Some((sigma, GroupoidMap { objects, arrows }))
}

/// One named check of [`verify_exact_sequences`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactnessCheck {
    pub name: String,
    pub passed: bool,
    pub witnesses: Vec<Violation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactnessReport {
    pub aut_order: usize,
    pub inaut_order: usize,
    pub bisection_count: usize,
    pub ciso_order: usize,
    pub central_valued_count: usize,
    pub picard_order: usize,
    pub static_picard_order: usize,
    pub checks: Vec<ExactnessCheck>,
}

impl ExactnessReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

struct Checks(Vec<ExactnessCheck>);

impl Checks {
    fn add(&mut self, name: &str, witnesses: Vec<Violation>) {
        self.0.push(ExactnessCheck {
            name: name.to_string(),
            passed: witnesses.is_empty(),
            witnesses,
        });
    }
}

fn violation(axiom: &str, witness: impl IntoIterator<Item = String>) -> Violation {
    Violation {
        axiom: axiom.to_string(),
        witness: witness.into_iter().collect(),
    }
}

fn is_identity_perm(p: &[usize]) -> bool {
    p.iter().enumerate().all(|(i, &v)| i == v)
}

/// Checks, with witnesses:
/// - `1 → Inaut → Aut → Pic`: `j` is a homomorphism with kernel exactly
///   Inaut, and a Picard class is in its image exactly when its bibundles
///   admit a section of `J2` with `J1∘σ` bijective;
/// - `1 → CIsoBis → Bis → Inaut → 1`: `N ↦ Φ_N` is a homomorphism onto
///   Inaut whose kernel is the central-valued bisections commuting with
///   every arrow, and `|Bis| = |CIsoBis|·|Inaut|`;
/// - `1 → PicZ → Pic → Aut(Z)`: the orbit map is a homomorphism and the
///   static Picard group is its kernel.
pub fn verify_exact_sequences(g: &Arc<FiniteGroupoid>) -> ExactnessReport {
    let aut = AutomorphismGroup::new(g);
    let inner = inaut(g, &aut);
    let bis = bisections(g);
    let bis_group = bisection_group(g, &bis);
    let ciso = ciso_bisections(g, &bis);
    let central = central_valued_bisections(g, &bis);
    let pic = picard_enumerate(g);
    let mut checks = Checks(Vec::new());
    let aut_name = |i: usize| aut.group.name(i).to_string();

    // j
    let j: Vec<Option<usize>> = aut.maps.iter().map(|phi| j_homomorphism(g, &pic, phi)).collect();
    let mut w = Vec::new();
    for (a, ja) in j.iter().enumerate() {
        if ja.is_none() {
            w.push(violation("j undefined", [aut_name(a)]));
        }
    }
    checks.add("j well defined", w);
    let mut w = Vec::new();
    for a in 0..aut.maps.len() {
        for b in 0..aut.maps.len() {
            let (Some(ja), Some(jb), Some(jab)) = (j[a], j[b], j[aut.group.mul(a, b)]) else {
                continue;
            };
            if pic.group.mul(ja, jb) != jab {
                w.push(violation("j(ab) != j(a)j(b)", [aut_name(a), aut_name(b)]));
            }
        }
    }
    checks.add("j homomorphism", w);
    let kernel: Vec<usize> = (0..aut.maps.len()).filter(|&a| j[a] == Some(0)).collect();
    let mut w = Vec::new();
    for &a in &kernel {
        if inner.binary_search(&a).is_err() {
            w.push(violation("in ker j but not inner", [aut_name(a)]));
        }
    }
    for &a in &inner {
        if j[a] != Some(0) {
            w.push(violation("inner but not in ker j", [aut_name(a)]));
        }
    }
    checks.add("ker j = Inaut", w);
    let mut w = Vec::new();
    if !aut.group.is_normal_subgroup(&inner) {
        w.push(violation("Inaut not normal in Aut", []));
    }
    checks.add("Inaut normal", w);
    // a class lies in the image of j exactly when its bibundles admit a
    // section of J2 with J1∘σ bijective
    let image: BTreeSet<usize> = j.iter().flatten().copied().collect();
    let mut w = Vec::new();
    for (p, rep) in pic.representatives.iter().enumerate() {
        let name = pic.group.name(p).to_string();
        match (image.contains(&p), lemma_section_check(rep)) {
            (true, None) => w.push(violation("in image of j but no section", [name])),
            (false, Some(_)) => w.push(violation("section exists but not in image of j", [name])),
            (true, Some((_, phi))) => {
                if !phi.is_functor(g, g) || j_homomorphism(g, &pic, &phi) != Some(p) {
                    w.push(violation("section automorphism does not map to its class", [name]));
                }
            }
            (false, None) => {}
        }
    }
    checks.add("image of j = classes with sections", w);

    // N ↦ Φ_N
    let phi_index: Vec<usize> = bis
        .iter()
        .map(|n| aut.index_of(&inner_automorphism(g, n)).expect("automorphism"))
        .collect();
    let mut w = Vec::new();
    for a in 0..bis.len() {
        for b in 0..bis.len() {
            if phi_index[bis_group.mul(a, b)] != aut.group.mul(phi_index[a], phi_index[b]) {
                w.push(violation(
                    "Φ_NM != Φ_N Φ_M",
                    [bis_group.name(a).to_string(), bis_group.name(b).to_string()],
                ));
            }
        }
    }
    checks.add("bisections to Inaut homomorphism", w);
    let mut w = Vec::new();
    if !bis_group.is_normal_subgroup(&ciso) {
        w.push(violation("CIsoBis not a normal subgroup", []));
    }
    for &n in &ciso {
        if central.binary_search(&n).is_err() {
            w.push(violation("kernel element not central-valued", [bis_group.name(n).to_string()]));
        }
    }
    if bis.len() != ciso.len() * inner.len() {
        w.push(violation(
            "|Bis| != |CIsoBis|·|Inaut|",
            [bis.len(), ciso.len(), inner.len()].map(|v| v.to_string()),
        ));
    }
    checks.add("CIsoBis sequence exact", w);

    // h
    let h: Vec<Option<Vec<usize>>> = (0..pic.order()).map(|x| center_map(&pic, x)).collect();
    let mut w = Vec::new();
    for (x, hx) in h.iter().enumerate() {
        if hx.is_none() {
            w.push(violation("orbit map undefined", [pic.group.name(x).to_string()]));
        }
    }
    if h[0].as_deref().is_some_and(|p| !is_identity_perm(p)) {
        w.push(violation("identity class moves orbits", [pic.group.name(0).to_string()]));
    }
    for x in 0..pic.order() {
        for y in 0..pic.order() {
            let (Some(hx), Some(hy), Some(hxy)) = (&h[x], &h[y], &h[pic.group.mul(x, y)]) else {
                continue;
            };
            let composed: Vec<usize> = hy.iter().map(|&o| hx[o]).collect();
            if &composed != hxy {
                w.push(violation(
                    "h(xy) != h(x)h(y)",
                    [pic.group.name(x).to_string(), pic.group.name(y).to_string()],
                ));
            }
        }
    }
    checks.add("h homomorphism", w);
    let statics = static_picard(&pic);
    let mut w = Vec::new();
    if !pic.group.is_subgroup(&statics) {
        w.push(violation("static Picard group not a subgroup", []));
    }
    for (x, hx) in h.iter().enumerate() {
        let in_kernel = hx.as_deref().is_some_and(is_identity_perm);
        if in_kernel != statics.contains(&x) {
            w.push(violation("static Picard group != ker h", [pic.group.name(x).to_string()]));
        }
    }
    checks.add("static Picard sequence exact", w);

    ExactnessReport {
        aut_order: aut.maps.len(),
        inaut_order: inner.len(),
        bisection_count: bis.len(),
        ciso_order: ciso.len(),
        central_valued_count: central.len(),
        picard_order: pic.order(),
        static_picard_order: statics.len(),
        checks: checks.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{
        bundle_of_groups, disjoint_union, from_group, gauge_groupoid, pair_groupoid,
        PrincipalBundleData,
    };

    fn arc(g: FiniteGroupoid) -> Arc<FiniteGroupoid> {
        Arc::new(g)
    }

    fn grp(g: &FiniteGroup) -> Arc<FiniteGroupoid> {
        arc(from_group(g))
    }

    fn transitive(group: &FiniteGroup, points: usize) -> Arc<FiniteGroupoid> {
        let base: Vec<String> = (0..points).map(|i| format!("b{i}")).collect();
        arc(gauge_groupoid(&PrincipalBundleData::trivial(&base, group)).unwrap())
    }

    fn v4() -> FiniteGroup {
        FiniteGroup::direct_product(&FiniteGroup::cyclic(2), &FiniteGroup::cyclic(2))
    }

    #[test]
    fn bisection_counts() {
        assert_eq!(bisections(&pair_groupoid(3)).len(), 6);
        assert_eq!(bisections(&pair_groupoid(4)).len(), 24);
        assert_eq!(bisections(&from_group(&FiniteGroup::symmetric(3))).len(), 6);
        let bundle = bundle_of_groups(&[FiniteGroup::cyclic(2), FiniteGroup::cyclic(3)]);
        assert_eq!(bisections(&bundle).len(), 6);
        // 2 object permutations times 3 choices per object
        assert_eq!(bisections(&transitive(&FiniteGroup::cyclic(3), 2)).len(), 18);
    }

    #[test]
    fn bisection_group_laws() {
        let g = transitive(&FiniteGroup::cyclic(3), 2);
        let bis = bisections(&g);
        assert_eq!(bis[0], Bisection::units(&g));
        for b in &bis {
            assert!(b.is_bisection(&g));
            assert_eq!(b.product(&b.inverse(&g), &g), bis[0]);
        }
        bisection_group(&g, &bis);
    }

    #[test]
    fn inner_automorphism_of_unit_bisection_is_identity() {
        let g = pair_groupoid(3);
        assert!(inner_automorphism(&g, &Bisection::units(&g)).is_identity());
    }

    #[test]
    fn inner_automorphism_on_group_is_conjugation() {
        let s3 = FiniteGroup::symmetric(3);
        let g = from_group(&s3);
        for h in 0..s3.order() {
            let n = Bisection { arrows: vec![h] };
            assert_eq!(inner_automorphism(&g, &n).arrows, s3.conjugation(h));
        }
    }

    #[test]
    fn inner_automorphisms_compose() {
        let g = transitive(&FiniteGroup::symmetric(3), 2);
        let bis = bisections(&g);
        for n in bis.iter().step_by(7) {
            for m in bis.iter().step_by(11) {
                let lhs = inner_automorphism(&g, &n.product(m, &g));
                let rhs = inner_automorphism(&g, n).after(&inner_automorphism(&g, m));
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn outer_automorphism_orders() {
        let out = |g: &FiniteGroupoid| outaut(g, &AutomorphismGroup::new(g)).unwrap().0.order();
        assert_eq!(out(&from_group(&FiniteGroup::symmetric(3))), 1);
        assert_eq!(out(&from_group(&FiniteGroup::cyclic(4))), 2);
        for n in 1..=4 {
            assert_eq!(out(&pair_groupoid(n)), 1);
        }
        assert_eq!(out(&from_group(&FiniteGroup::dihedral(4))), 2);
        assert_eq!(out(&from_group(&FiniteGroup::quaternion())), 6);
    }

    #[test]
    fn ciso_examples() {
        let z4 = from_group(&FiniteGroup::cyclic(4));
        assert_eq!(ciso_bisections(&z4, &bisections(&z4)).len(), 4);
        let s3 = from_group(&FiniteGroup::symmetric(3));
        assert_eq!(ciso_bisections(&s3, &bisections(&s3)).len(), 1);
        let p = pair_groupoid(3);
        assert_eq!(ciso_bisections(&p, &bisections(&p)), vec![0]);
    }

    #[test]
    fn ciso_is_smaller_than_central_valued_for_transitive_abelian() {
        // Z3 over 2 points: the kernel forces N(y) = g N(x) g⁻¹ along arrows
        let g = transitive(&FiniteGroup::cyclic(3), 2);
        let bis = bisections(&g);
        assert_eq!(ciso_bisections(&g, &bis).len(), 3);
        assert_eq!(central_valued_bisections(&g, &bis).len(), 9);
    }

    #[test]
    fn picard_examples() {
        let pic = |g: &Arc<FiniteGroupoid>| picard_group(g, MethodChoice::Auto).unwrap();
        let z4 = pic(&grp(&FiniteGroup::cyclic(4)));
        assert_eq!(z4.order(), 2);
        assert!(z4.cross_checked);
        assert_eq!(pic(&grp(&FiniteGroup::symmetric(3))).order(), 1);
        let klein = pic(&grp(&v4()));
        assert!(klein.group.is_isomorphic(&FiniteGroup::symmetric(3)));
        for n in 1..=4 {
            assert_eq!(pic(&arc(pair_groupoid(n))).order(), 1);
        }
        assert_eq!(pic(&transitive(&FiniteGroup::cyclic(3), 2)).order(), 2);
        assert_eq!(pic(&transitive(&FiniteGroup::symmetric(3), 2)).order(), 1);
        let b23 = arc(bundle_of_groups(&[FiniteGroup::cyclic(2), FiniteGroup::cyclic(3)]));
        assert_eq!(pic(&b23).order(), 2);
    }

    #[test]
    fn formula_inapplicable_for_mixed_groupoid() {
        let p2 = pair_groupoid(2);
        let pt = from_group(&FiniteGroup::trivial());
        let g = arc(disjoint_union(&[&pt, &p2]));
        assert_eq!(
            picard_group(&g, MethodChoice::Formula).unwrap_err(),
            PicardError::FormulaInapplicable
        );
        // pt ⊔ pair(2): swapping the two orbits is a Picard element whose
        // carrier (4 points) differs from the arrow count (5)
        let p = picard_group(&g, MethodChoice::Auto).unwrap();
        assert_eq!(p.order(), 2);
        assert_eq!(p.representatives[1].len(), 4);
        assert_eq!(g.arrow_count(), 5);
        assert_eq!(static_picard(&p), vec![0]);
        // no automorphism swaps orbits of different sizes, and the swap has
        // no section of J2 with J1∘σ bijective
        assert!(lemma_section_check(&p.representatives[1]).is_none());
        let r = verify_exact_sequences(&g);
        assert!(r.all_passed(), "{r:#?}");
        assert_eq!(r.aut_order / r.inaut_order, 1);
        assert_eq!(r.picard_order, 2);
    }

    #[test]
    fn static_picard_examples() {
        let b22 = arc(bundle_of_groups(&[FiniteGroup::cyclic(2), FiniteGroup::cyclic(2)]));
        let p = picard_enumerate(&b22);
        assert_eq!(p.order(), 2);
        assert_eq!(static_picard(&p).len(), 1);
        let b23 = arc(bundle_of_groups(&[FiniteGroup::cyclic(2), FiniteGroup::cyclic(3)]));
        let p = picard_enumerate(&b23);
        assert_eq!(static_picard(&p).len(), p.order());
    }

    #[test]
    fn j_on_inversion_is_nontrivial() {
        let g = grp(&FiniteGroup::cyclic(4));
        let pic = picard_enumerate(&g);
        let aut = AutomorphismGroup::new(&g);
        assert_eq!(j_homomorphism(&g, &pic, &aut.maps[0]), Some(0));
        assert_eq!(j_homomorphism(&g, &pic, &aut.maps[1]), Some(1));
    }

    #[test]
    fn lemma_section_recovers_automorphism() {
        let g = transitive(&FiniteGroup::cyclic(3), 2);
        let id = identity_bibundle(&g);
        let (sigma, phi) = lemma_section_check(&id).unwrap();
        assert!(sigma.iter().all(|&x| g.is_unit(g.arrow_index(&id.carrier()[x]).unwrap())));
        assert!(phi.is_identity());
        for psi in automorphisms(&g) {
            let s = from_homomorphism(&g, &g, &psi).unwrap();
            let (_, phi) = lemma_section_check(&s).unwrap();
            assert!(phi.is_functor(&g, &g));
            let back = from_homomorphism(&g, &g, &phi).unwrap();
            assert!(bibundle_isomorphic(&back, &s).is_some());
        }
    }

    #[test]
    fn exact_sequences_on_small_examples() {
        for g in [
            grp(&FiniteGroup::cyclic(4)),
            grp(&FiniteGroup::symmetric(3)),
            arc(pair_groupoid(3)),
            transitive(&FiniteGroup::cyclic(3), 2),
        ] {
            let r = verify_exact_sequences(&g);
            assert!(r.all_passed(), "{r:#?}");
        }
        let r = verify_exact_sequences(&grp(&FiniteGroup::symmetric(3)));
        assert_eq!(r.inaut_order, 6);
        let r = verify_exact_sequences(&arc(pair_groupoid(3)));
        assert_eq!((r.picard_order, r.aut_order, r.inaut_order), (1, 6, 6));
    }

    #[test]
    fn picard_wire_shape() {
        let p = picard_group(&grp(&FiniteGroup::cyclic(4)), MethodChoice::Formula).unwrap();
        let json = serde_json::to_value(p.to_wire()).unwrap();
        assert_eq!(json["method"], "transitive-formula");
        assert_eq!(json["elements"], serde_json::json!(["p0", "p1"]));
    }
}
