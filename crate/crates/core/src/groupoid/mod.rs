//! Finite groupoids given by explicit tables.
//!
//! Composition follows the convention `gh` = "`h` then `g`": the composite
//! `comp(g, h)` is defined exactly when `src(g) == tgt(h)`, and then
//! `src(gh) = src(h)`, `tgt(gh) = tgt(g)`.
//!
//! Object and arrow ids are opaque strings. Internally both are stored in
//! lexicographic order and addressed by index, so iteration order, quotient
//! representatives and search witnesses are all deterministic.

mod construct;
mod functor;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{FiniteGroup, GroupError};
use crate::report::ValidationReport;

pub use construct::{
    action_groupoid, bundle_of_groups, disjoint_union, from_group, gauge_groupoid,
    pair_groupoid, PrincipalBundleData,
};
pub(crate) use construct::gauge_groupoid_with_classes;
pub use functor::{
    automorphisms, collect_functors, enumerate_functors, groupoid_isomorphic, FunctorKind,
    GroupoidMap,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupoidError {
    #[error("duplicate id `{0}`")]
    Duplicate(String),
    #[error("unknown id `{0}`")]
    Unknown(String),
    #[error("object `{0}` has no unit")]
    MissingUnit(String),
    #[error("arrow `{0}` has no inverse")]
    MissingInverse(String),
    #[error("conflicting composite for ({0}, {1})")]
    ConflictingComposite(String, String),
    #[error("invalid group action: {0}")]
    InvalidAction(String),
    #[error("not a principal bundle: {0}")]
    NotPrincipal(String),
    #[error("not a functor: {0}")]
    NotFunctor(String),
    #[error("groupoid has no objects")]
    Empty,
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Wire form of an arrow declaration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrowDecl {
    pub id: String,
    pub src: String,
    pub tgt: String,
}

/// Wire form of a groupoid: the explicit tables, by id.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupoidTables {
    pub objects: Vec<String>,
    pub arrows: Vec<ArrowDecl>,
    /// Triples `[g, h, gh]`.
    pub comp: Vec<[String; 3]>,
    pub units: BTreeMap<String, String>,
    pub inv: BTreeMap<String, String>,
}

/// A finite groupoid. Values may violate the groupoid axioms (so that
/// malformed inputs can be inspected); run [`FiniteGroupoid::validate`]
/// before relying on them. All constructors in this crate produce valid
/// groupoids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroupoid {
    objects: Vec<String>,
    arrows: Vec<String>,
    src: Vec<usize>,
    tgt: Vec<usize>,
    unit: Vec<usize>,
    inv: Vec<usize>,
    comp: Vec<Option<usize>>,
    // arrows grouped by (src, tgt), each list sorted
    homs: Vec<Vec<usize>>,
}

fn index_sorted(ids: &[String]) -> Result<(Vec<String>, HashMap<String, usize>), GroupoidError> {
    let mut sorted = ids.to_vec();
    sorted.sort();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(GroupoidError::Duplicate(w[0].clone()));
        }
    }
    let index = sorted.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    Ok((sorted, index))
}

fn lookup(index: &HashMap<String, usize>, id: &str) -> Result<usize, GroupoidError> {
    index
        .get(id)
        .copied()
        .ok_or_else(|| GroupoidError::Unknown(id.to_string()))
}

impl FiniteGroupoid {
    /// Indexes the tables. Fails only on structural problems (duplicate or
    /// dangling ids, missing units or inverses, two different composites
    /// for one pair); axiom violations are left for [`Self::validate`].
    pub fn from_tables(t: &GroupoidTables) -> Result<Self, GroupoidError> {
        if t.objects.is_empty() {
            return Err(GroupoidError::Empty);
        }
        let (objects, obj_index) = index_sorted(&t.objects)?;
        let arrow_ids: Vec<String> = t.arrows.iter().map(|a| a.id.clone()).collect();
        let (arrows, arr_index) = index_sorted(&arrow_ids)?;
        let n = arrows.len();
        let mut src = vec![0; n];
        let mut tgt = vec![0; n];
        for decl in &t.arrows {
            let a = arr_index[&decl.id];
            src[a] = lookup(&obj_index, &decl.src)?;
            tgt[a] = lookup(&obj_index, &decl.tgt)?;
        }
        let mut unit = vec![usize::MAX; objects.len()];
        for (o, a) in &t.units {
            unit[lookup(&obj_index, o)?] = lookup(&arr_index, a)?;
        }
        if let Some(x) = unit.iter().position(|&u| u == usize::MAX) {
            return Err(GroupoidError::MissingUnit(objects[x].clone()));
        }
        let mut inv = vec![usize::MAX; n];
        for (g, gi) in &t.inv {
            inv[lookup(&arr_index, g)?] = lookup(&arr_index, gi)?;
        }
        if let Some(g) = inv.iter().position(|&u| u == usize::MAX) {
            return Err(GroupoidError::MissingInverse(arrows[g].clone()));
        }
        let mut comp = vec![None; n * n];
        for [g, h, gh] in &t.comp {
            let (g, h, gh) = (
                lookup(&arr_index, g)?,
                lookup(&arr_index, h)?,
                lookup(&arr_index, gh)?,
            );
            match comp[g * n + h] {
                Some(prev) if prev != gh => {
                    return Err(GroupoidError::ConflictingComposite(
                        arrows[g].clone(),
                        arrows[h].clone(),
                    ))
                }
                _ => comp[g * n + h] = Some(gh),
            }
        }
        Ok(Self::assemble(objects, arrows, src, tgt, unit, inv, comp))
    }

    fn assemble(
        objects: Vec<String>,
        arrows: Vec<String>,
        src: Vec<usize>,
        tgt: Vec<usize>,
        unit: Vec<usize>,
        inv: Vec<usize>,
        comp: Vec<Option<usize>>,
    ) -> Self {
        let m = objects.len();
        let mut homs = vec![Vec::new(); m * m];
        for a in 0..arrows.len() {
            homs[src[a] * m + tgt[a]].push(a);
        }
        Self {
            objects,
            arrows,
            src,
            tgt,
            unit,
            inv,
            comp,
            homs,
        }
    }

    /// Builds a groupoid from unsorted index data, reindexing both objects
    /// and arrows into lexicographic order. `compose(g, h)` is consulted
    /// only for pairs with `src(g) == tgt(h)`.
    pub(crate) fn from_indexed(
        object_names: Vec<String>,
        arrow_names: Vec<String>,
        src: Vec<usize>,
        tgt: Vec<usize>,
        unit: Vec<usize>,
        inv: Vec<usize>,
        compose: impl Fn(usize, usize) -> usize,
    ) -> Self {
        let obj_perm = sort_permutation(&object_names);
        let arr_perm = sort_permutation(&arrow_names);
        // obj_perm[new] = old; build old -> new
        let obj_new = invert(&obj_perm);
        let arr_new = invert(&arr_perm);
        let n = arrow_names.len();
        let objects = obj_perm.iter().map(|&o| object_names[o].clone()).collect();
        let arrows = arr_perm.iter().map(|&a| arrow_names[a].clone()).collect();
        let nsrc: Vec<usize> = arr_perm.iter().map(|&a| obj_new[src[a]]).collect();
        let ntgt: Vec<usize> = arr_perm.iter().map(|&a| obj_new[tgt[a]]).collect();
        let nunit = obj_perm.iter().map(|&o| arr_new[unit[o]]).collect();
        let ninv = arr_perm.iter().map(|&a| arr_new[inv[a]]).collect();
        let mut comp = vec![None; n * n];
        for g in 0..n {
            for h in 0..n {
                let (og, oh) = (arr_perm[g], arr_perm[h]);
                if src[og] == tgt[oh] {
                    comp[g * n + h] = Some(arr_new[compose(og, oh)]);
                }
            }
        }
        Self::assemble(objects, arrows, nsrc, ntgt, nunit, ninv, comp)
    }

    pub fn to_tables(&self) -> GroupoidTables {
        let n = self.arrow_count();
        let mut comp = Vec::new();
        for g in 0..n {
            for h in 0..n {
                if let Some(gh) = self.comp[g * n + h] {
                    comp.push([
                        self.arrows[g].clone(),
                        self.arrows[h].clone(),
                        self.arrows[gh].clone(),
                    ]);
                }
            }
        }
        GroupoidTables {
            objects: self.objects.clone(),
            arrows: (0..n)
                .map(|a| ArrowDecl {
                    id: self.arrows[a].clone(),
                    src: self.objects[self.src[a]].clone(),
                    tgt: self.objects[self.tgt[a]].clone(),
                })
                .collect(),
            comp,
            units: (0..self.object_count())
                .map(|x| (self.objects[x].clone(), self.arrows[self.unit[x]].clone()))
                .collect(),
            inv: (0..n)
                .map(|a| (self.arrows[a].clone(), self.arrows[self.inv[a]].clone()))
                .collect(),
        }
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn arrows(&self) -> &[String] {
        &self.arrows
    }

    pub fn object_name(&self, x: usize) -> &str {
        &self.objects[x]
    }

    pub fn arrow_name(&self, g: usize) -> &str {
        &self.arrows[g]
    }

    pub fn object_index(&self, id: &str) -> Option<usize> {
        self.objects.binary_search_by(|o| o.as_str().cmp(id)).ok()
    }

    pub fn arrow_index(&self, id: &str) -> Option<usize> {
        self.arrows.binary_search_by(|a| a.as_str().cmp(id)).ok()
    }

    #[inline]
    pub fn src(&self, g: usize) -> usize {
        self.src[g]
    }

    #[inline]
    pub fn tgt(&self, g: usize) -> usize {
        self.tgt[g]
    }

    #[inline]
    pub fn unit(&self, x: usize) -> usize {
        self.unit[x]
    }

    #[inline]
    pub fn inv(&self, g: usize) -> usize {
        self.inv[g]
    }

    /// `gh`, i.e. `h` followed by `g`, when defined.
    #[inline]
    pub fn comp(&self, g: usize, h: usize) -> Option<usize> {
        self.comp[g * self.arrows.len() + h]
    }

    /// Composite of a composable pair; panics otherwise.
    #[inline]
    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.comp(g, h).unwrap_or_else(|| {
            panic!(
                "arrows `{}` and `{}` are not composable",
                self.arrows[g], self.arrows[h]
            )
        })
    }

    /// Arrows `x -> y`, sorted.
    pub fn hom(&self, x: usize, y: usize) -> &[usize] {
        &self.homs[x * self.objects.len() + y]
    }

    /// Arrows with source `x`.
    pub fn source_fibre(&self, x: usize) -> Vec<usize> {
        (0..self.arrow_count()).filter(|&g| self.src[g] == x).collect()
    }

    pub fn is_unit(&self, g: usize) -> bool {
        self.unit[self.src[g]] == g
    }

    /// Checks every groupoid axiom and returns one witness per failure.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let n = self.arrow_count();
        let a = |g: usize| self.arrows[g].as_str();
        for g in 0..n {
            for h in 0..n {
                let composable = self.src[g] == self.tgt[h];
                match (self.comp(g, h), composable) {
                    (Some(_), false) => report.push("composability", [a(g), a(h)]),
                    (None, true) => report.push("missing composite", [a(g), a(h)]),
                    (Some(gh), true) => {
                        if self.src[gh] != self.src[h] || self.tgt[gh] != self.tgt[g] {
                            report.push("composite endpoints", [a(g), a(h), a(gh)]);
                        }
                    }
                    (None, false) => {}
                }
            }
        }
        for f in 0..n {
            for g in 0..n {
                let Some(fg) = self.comp(f, g) else { continue };
                for h in 0..n {
                    let (Some(gh), Some(fg_h)) = (self.comp(g, h), self.comp(fg, h)) else {
                        continue;
                    };
                    if self.comp(f, gh) != Some(fg_h) {
                        report.push("associativity", [a(f), a(g), a(h)]);
                    }
                }
            }
        }
        for x in 0..self.object_count() {
            let u = self.unit[x];
            if self.src[u] != x || self.tgt[u] != x {
                report.push("unit endpoints", [self.objects[x].as_str(), a(u)]);
            }
        }
        for g in 0..n {
            let left = self.unit[self.tgt[g]];
            let right = self.unit[self.src[g]];
            if self.comp(left, g) != Some(g) || self.comp(g, right) != Some(g) {
                report.push("unit law", [a(g)]);
            }
            let gi = self.inv[g];
            if self.comp(gi, g) != Some(self.unit[self.src[g]])
                || self.comp(g, gi) != Some(self.unit[self.tgt[g]])
            {
                report.push("inverse", [a(g), a(gi)]);
            }
        }
        report
    }

    /// Orbit partition of the objects. Blocks are sorted and ordered by
    /// their smallest member.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut uf = crate::union_find::UnionFind::new(self.object_count());
        for g in 0..self.arrow_count() {
            uf.union(self.src[g], self.tgt[g]);
        }
        let (reps, roots) = uf.classes();
        roots
            .iter()
            .map(|&r| (0..self.object_count()).filter(|&x| reps[x] == r).collect())
            .collect()
    }

    /// Orbit index of every object, consistent with [`Self::orbits`].
    pub fn orbit_of(&self) -> Vec<usize> {
        let mut out = vec![0; self.object_count()];
        for (i, block) in self.orbits().iter().enumerate() {
            for &x in block {
                out[x] = i;
            }
        }
        out
    }

    pub fn is_transitive(&self) -> bool {
        self.orbits().len() == 1
    }

    /// True when every arrow is a loop (`s = t`): a bundle of groups.
    pub fn is_group_bundle(&self) -> bool {
        (0..self.arrow_count()).all(|g| self.src[g] == self.tgt[g])
    }

    /// Arrows `x -> x`, sorted.
    pub fn isotropy_arrows(&self, x: usize) -> &[usize] {
        self.hom(x, x)
    }

    /// The isotropy group at `x`. Element `i` of the result is
    /// `isotropy_arrows(x)[i]`.
    pub fn isotropy(&self, x: usize) -> FiniteGroup {
        let arrows = self.isotropy_arrows(x);
        let pos: HashMap<usize, usize> = arrows.iter().enumerate().map(|(i, &g)| (g, i)).collect();
        let names = arrows.iter().map(|&g| self.arrows[g].clone()).collect();
        FiniteGroup::from_fn(names, |i, j| pos[&self.mul(arrows[i], arrows[j])])
            .expect("isotropy of a valid groupoid is a group")
    }
}

fn sort_permutation(names: &[String]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..names.len()).collect();
    idx.sort_by(|&a, &b| names[a].cmp(&names[b]));
    idx
}

fn invert(perm: &[usize]) -> Vec<usize> {
    let mut out = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        out[old] = new;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_groupoid_is_valid_and_transitive() {
        let g = pair_groupoid(2);
        assert!(g.validate().is_ok());
        assert_eq!(g.arrow_count(), 4);
        let g3 = pair_groupoid(3);
        assert_eq!(g3.arrow_count(), 9);
        assert!(g3.is_transitive());
        assert_eq!(g3.orbits(), vec![vec![0, 1, 2]]);
        for x in 0..3 {
            assert_eq!(g3.isotropy(x).order(), 1);
        }
        let g1 = pair_groupoid(1);
        assert_eq!(g1.arrow_count(), 1);
        assert_eq!(g1.isotropy(0).order(), 1);
    }

    #[test]
    fn cyclic_group_as_groupoid_is_valid() {
        let g = from_group(&FiniteGroup::cyclic(3));
        assert!(g.validate().is_ok());
        let z4 = from_group(&FiniteGroup::cyclic(4));
        assert!(z4.isotropy(0).is_isomorphic(&FiniteGroup::cyclic(4)));
    }

    #[test]
    fn composability_violation_is_witnessed() {
        let mut t = pair_groupoid(2).to_tables();
        // (1,2) has src 2; composing with (1,1) (tgt 1) is not allowed
        t.comp.push(["(1,2)".into(), "(1,1)".into(), "(1,2)".into()]);
        let g = FiniteGroupoid::from_tables(&t).unwrap();
        let report = g.validate();
        assert!(report.violations.iter().any(|v| v.axiom == "composability"
            && v.witness == vec!["(1,2)".to_string(), "(1,1)".to_string()]));
    }

    #[test]
    fn broken_tables_report_missing_composite_and_inverse() {
        let mut t = from_group(&FiniteGroup::cyclic(3)).to_tables();
        t.comp.retain(|c| !(c[0] == "1" && c[1] == "1"));
        t.inv.insert("1".into(), "1".into());
        let g = FiniteGroupoid::from_tables(&t).unwrap();
        let report = g.validate();
        assert!(report.has("missing composite"));
        assert!(report.has("inverse"));
    }

    #[test]
    fn structural_errors() {
        let mut t = pair_groupoid(2).to_tables();
        t.units.remove("1");
        assert!(matches!(
            FiniteGroupoid::from_tables(&t),
            Err(GroupoidError::MissingUnit(_))
        ));
        let mut t = pair_groupoid(2).to_tables();
        t.arrows[0].src = "nowhere".into();
        assert!(matches!(
            FiniteGroupoid::from_tables(&t),
            Err(GroupoidError::Unknown(_))
        ));
    }

    #[test]
    fn disjoint_union_orbits() {
        let a = from_group(&FiniteGroup::cyclic(2));
        let b = from_group(&FiniteGroup::cyclic(3));
        let u = disjoint_union(&[&a, &b]);
        assert!(u.validate().is_ok());
        assert_eq!(u.orbits().len(), 2);
        assert!(!u.is_transitive());
    }

    #[test]
    fn tables_round_trip() {
        let g = pair_groupoid(3);
        let back = FiniteGroupoid::from_tables(&g.to_tables()).unwrap();
        assert_eq!(back, g);
    }
}
