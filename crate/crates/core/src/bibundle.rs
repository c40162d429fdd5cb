//! Bibundles between finite groupoids: generalised morphisms.
//!
//! A `(Γ₁, Γ₂)`-bibundle is a finite set `S` with moments `J1: S -> P₁`,
//! `J2: S -> P₂`, a left `Γ₁`-action defined when `s(g) = J1(x)` and a right
//! `Γ₂`-action defined when `J2(x) = t(g)`, the two actions commuting.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::ops::ControlFlow;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::groupoid::{
    enumerate_functors, from_group, gauge_groupoid_with_classes, FiniteGroupoid, FunctorKind,
    GroupoidError, GroupoidMap, PrincipalBundleData,
};
use crate::report::{ValidationReport, Violation};
use crate::union_find::UnionFind;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BibundleError {
    #[error("duplicate carrier point `{0}`")]
    Duplicate(String),
    #[error("unknown id `{0}`")]
    Unknown(String),
    #[error("carrier point `{0}` has no {1} moment")]
    MissingMoment(String, &'static str),
    #[error("conflicting {0} action entry for ({1}, {2})")]
    ConflictingAction(&'static str, String, String),
    #[error("right groupoid of the first factor differs from left groupoid of the second")]
    MiddleMismatch,
    #[error("{0} factor is not left principal")]
    NotLeftPrincipal(&'static str),
    #[error("not a functor: {0}")]
    NotFunctor(String),
    #[error(transparent)]
    Groupoid(#[from] GroupoidError),
}

/// A bibundle between two finite groupoids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bibundle {
    left: Arc<FiniteGroupoid>,
    right: Arc<FiniteGroupoid>,
    carrier: Vec<String>,
    j1: Vec<usize>,
    j2: Vec<usize>,
    // left_act[g * |S| + x] = g·x
    left_act: Vec<Option<usize>>,
    // right_act[x * |Γ₂| + g] = x·g
    right_act: Vec<Option<usize>>,
}

/// Wire form of the carrier, moments and actions, by id. Action entries are
/// `[g, x, g·x]` (left) and `[x, g, x·g]` (right).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BibundleTables {
    pub carrier: Vec<String>,
    #[serde(rename = "J1")]
    pub j1: BTreeMap<String, String>,
    #[serde(rename = "J2")]
    pub j2: BTreeMap<String, String>,
    #[serde(rename = "leftAct")]
    pub left_act: Vec<[String; 3]>,
    #[serde(rename = "rightAct")]
    pub right_act: Vec<[String; 3]>,
}

/// Outcome of [`Bibundle::principality`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrincipalityReport {
    pub left_principal: bool,
    pub right_principal: bool,
    pub witnesses: Vec<Violation>,
}

impl PrincipalityReport {
    pub fn is_biprincipal(&self) -> bool {
        self.left_principal && self.right_principal
    }
}

/// Appends `#k` to repeated names so that every carrier id is unique.
fn unique_names(names: Vec<String>) -> Vec<String> {
    let mut seen = HashSet::new();
    names
        .into_iter()
        .map(|n| {
            if seen.insert(n.clone()) {
                return n;
            }
            let mut k = 1;
            loop {
                let candidate = format!("{n}#{k}");
                if seen.insert(candidate.clone()) {
                    return candidate;
                }
                k += 1;
            }
        })
        .collect()
}

impl Bibundle {
    /// Builds a bibundle from unsorted index data; the carrier is reindexed
    /// into lexicographic order.
    fn from_indexed(
        left: Arc<FiniteGroupoid>,
        right: Arc<FiniteGroupoid>,
        names: Vec<String>,
        j1: Vec<usize>,
        j2: Vec<usize>,
        left_act: impl Fn(usize, usize) -> Option<usize>,
        right_act: impl Fn(usize, usize) -> Option<usize>,
    ) -> Self {
        let names = unique_names(names);
        let n = names.len();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.sort_by(|&a, &b| names[a].cmp(&names[b]));
        let mut new_of = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            new_of[old] = new;
        }
        let (nl, nr) = (left.arrow_count(), right.arrow_count());
        let mut la = vec![None; nl * n];
        for g in 0..nl {
            for (new, &old) in perm.iter().enumerate() {
                la[g * n + new] = left_act(g, old).map(|y| new_of[y]);
            }
        }
        let mut ra = vec![None; n * nr];
        for (new, &old) in perm.iter().enumerate() {
            for g in 0..nr {
                ra[new * nr + g] = right_act(old, g).map(|y| new_of[y]);
            }
        }
        Self {
            carrier: perm.iter().map(|&o| names[o].clone()).collect(),
            j1: perm.iter().map(|&o| j1[o]).collect(),
            j2: perm.iter().map(|&o| j2[o]).collect(),
            left,
            right,
            left_act: la,
            right_act: ra,
        }
    }

    /// Indexes wire tables against the given groupoids. Only structural
    /// problems are errors; axioms are checked by [`Self::validate`].
    pub fn from_tables(
        left: Arc<FiniteGroupoid>,
        right: Arc<FiniteGroupoid>,
        t: &BibundleTables,
    ) -> Result<Self, BibundleError> {
        let mut carrier = t.carrier.clone();
        carrier.sort();
        if let Some(w) = carrier.windows(2).find(|w| w[0] == w[1]) {
            return Err(BibundleError::Duplicate(w[0].clone()));
        }
        let n = carrier.len();
        let point = |id: &str| {
            carrier
                .binary_search_by(|c| c.as_str().cmp(id))
                .map_err(|_| BibundleError::Unknown(id.to_string()))
        };
        let obj = |g: &FiniteGroupoid, id: &str| {
            g.object_index(id).ok_or_else(|| BibundleError::Unknown(id.to_string()))
        };
        let arr = |g: &FiniteGroupoid, id: &str| {
            g.arrow_index(id).ok_or_else(|| BibundleError::Unknown(id.to_string()))
        };
        let mut j1 = vec![usize::MAX; n];
        for (x, o) in &t.j1 {
            j1[point(x)?] = obj(&left, o)?;
        }
        let mut j2 = vec![usize::MAX; n];
        for (x, o) in &t.j2 {
            j2[point(x)?] = obj(&right, o)?;
        }
        if let Some(x) = j1.iter().position(|&v| v == usize::MAX) {
            return Err(BibundleError::MissingMoment(carrier[x].clone(), "left"));
        }
        if let Some(x) = j2.iter().position(|&v| v == usize::MAX) {
            return Err(BibundleError::MissingMoment(carrier[x].clone(), "right"));
        }
        let (nl, nr) = (left.arrow_count(), right.arrow_count());
        let mut left_act = vec![None; nl * n];
        for [g, x, y] in &t.left_act {
            let (g, x, y) = (arr(&left, g)?, point(x)?, point(y)?);
            match left_act[g * n + x] {
                Some(prev) if prev != y => {
                    return Err(BibundleError::ConflictingAction(
                        "left",
                        left.arrow_name(g).to_string(),
                        carrier[x].clone(),
                    ))
                }
                _ => left_act[g * n + x] = Some(y),
            }
        }
        let mut right_act = vec![None; n * nr];
        for [x, g, y] in &t.right_act {
            let (x, g, y) = (point(x)?, arr(&right, g)?, point(y)?);
            match right_act[x * nr + g] {
                Some(prev) if prev != y => {
                    return Err(BibundleError::ConflictingAction(
                        "right",
                        carrier[x].clone(),
                        right.arrow_name(g).to_string(),
                    ))
                }
                _ => right_act[x * nr + g] = Some(y),
            }
        }
        Ok(Self {
            left,
            right,
            carrier,
            j1,
            j2,
            left_act,
            right_act,
        })
    }

    pub fn to_tables(&self) -> BibundleTables {
        let n = self.carrier.len();
        let mut t = BibundleTables {
            carrier: self.carrier.clone(),
            ..Default::default()
        };
        for x in 0..n {
            t.j1.insert(
                self.carrier[x].clone(),
                self.left.object_name(self.j1[x]).to_string(),
            );
            t.j2.insert(
                self.carrier[x].clone(),
                self.right.object_name(self.j2[x]).to_string(),
            );
        }
        for g in 0..self.left.arrow_count() {
            for x in 0..n {
                if let Some(y) = self.act_left(g, x) {
                    t.left_act.push([
                        self.left.arrow_name(g).to_string(),
                        self.carrier[x].clone(),
                        self.carrier[y].clone(),
                    ]);
                }
            }
        }
        for x in 0..n {
            for g in 0..self.right.arrow_count() {
                if let Some(y) = self.act_right(x, g) {
                    t.right_act.push([
                        self.carrier[x].clone(),
                        self.right.arrow_name(g).to_string(),
                        self.carrier[y].clone(),
                    ]);
                }
            }
        }
        t
    }

    pub fn left(&self) -> &Arc<FiniteGroupoid> {
        &self.left
    }

    pub fn right(&self) -> &Arc<FiniteGroupoid> {
        &self.right
    }

    pub fn carrier(&self) -> &[String] {
        &self.carrier
    }

    pub fn len(&self) -> usize {
        self.carrier.len()
    }

    pub fn is_empty(&self) -> bool {
        self.carrier.is_empty()
    }

    pub fn j1(&self, x: usize) -> usize {
        self.j1[x]
    }

    pub fn j2(&self, x: usize) -> usize {
        self.j2[x]
    }

    /// `g·x`, when defined.
    #[inline]
    pub fn act_left(&self, g: usize, x: usize) -> Option<usize> {
        self.left_act[g * self.carrier.len() + x]
    }

    /// `x·g`, when defined.
    #[inline]
    pub fn act_right(&self, x: usize, g: usize) -> Option<usize> {
        self.right_act[x * self.right.arrow_count() + g]
    }

    /// The same bibundle with carrier points renamed by `rename`.
    pub fn renamed(&self, rename: impl Fn(&str) -> String) -> Self {
        let names = self.carrier.iter().map(|c| rename(c)).collect();
        Self::from_indexed(
            self.left.clone(),
            self.right.clone(),
            names,
            self.j1.clone(),
            self.j2.clone(),
            |g, x| self.act_left(g, x),
            |x, g| self.act_right(x, g),
        )
    }

    /// Checks action domains, moment equivariance, action axioms and
    /// commutation of the two actions.
    pub fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::default();
        let (l, rt) = (&*self.left, &*self.right);
        let n = self.carrier.len();
        let pt = |x: usize| self.carrier[x].as_str();
        for g in 0..l.arrow_count() {
            for x in 0..n {
                let gn = l.arrow_name(g);
                match (self.act_left(g, x), l.src(g) == self.j1[x]) {
                    (Some(_), false) | (None, true) => r.push("left action domain", [gn, pt(x)]),
                    (Some(y), true) => {
                        if self.j1[y] != l.tgt(g) || self.j2[y] != self.j2[x] {
                            r.push("moment equivariance", [gn, pt(x)]);
                        }
                    }
                    (None, false) => {}
                }
            }
        }
        for x in 0..n {
            for g in 0..rt.arrow_count() {
                let gn = rt.arrow_name(g);
                match (self.act_right(x, g), self.j2[x] == rt.tgt(g)) {
                    (Some(_), false) | (None, true) => r.push("right action domain", [pt(x), gn]),
                    (Some(y), true) => {
                        if self.j1[y] != self.j1[x] || self.j2[y] != rt.src(g) {
                            r.push("moment equivariance", [pt(x), gn]);
                        }
                    }
                    (None, false) => {}
                }
            }
        }
        if !r.is_ok() {
            // action axioms below assume well-formed domains
            return r;
        }
        for x in 0..n {
            if self.act_left(l.unit(self.j1[x]), x) != Some(x) {
                r.push("left unit", [pt(x)]);
            }
            if self.act_right(x, rt.unit(self.j2[x])) != Some(x) {
                r.push("right unit", [pt(x)]);
            }
        }
        for g in 0..l.arrow_count() {
            for h in 0..l.arrow_count() {
                let Some(gh) = l.comp(g, h) else { continue };
                for x in (0..n).filter(|&x| self.j1[x] == l.src(h)) {
                    let lhs = self.act_left(gh, x);
                    let rhs = self.act_left(h, x).and_then(|y| self.act_left(g, y));
                    if lhs != rhs {
                        r.push("left associativity", [l.arrow_name(g), l.arrow_name(h), pt(x)]);
                    }
                }
            }
        }
        for g in 0..rt.arrow_count() {
            for h in 0..rt.arrow_count() {
                let Some(gh) = rt.comp(g, h) else { continue };
                for x in (0..n).filter(|&x| self.j2[x] == rt.tgt(g)) {
                    let lhs = self.act_right(x, gh);
                    let rhs = self.act_right(x, g).and_then(|y| self.act_right(y, h));
                    if lhs != rhs {
                        r.push(
                            "right associativity",
                            [pt(x), rt.arrow_name(g), rt.arrow_name(h)],
                        );
                    }
                }
            }
        }
        for x in 0..n {
            for g in (0..l.arrow_count()).filter(|&g| l.src(g) == self.j1[x]) {
                for h in (0..rt.arrow_count()).filter(|&h| rt.tgt(h) == self.j2[x]) {
                    let a = self.act_left(g, x).and_then(|y| self.act_right(y, h));
                    let b = self.act_right(x, h).and_then(|y| self.act_left(g, y));
                    if a != b {
                        r.push("commutation", [l.arrow_name(g), pt(x), rt.arrow_name(h)]);
                    }
                }
            }
        }
        r
    }

    /// Left principality (with respect to `J2`) and right principality
    /// (with respect to `J1`), with witnesses for each failure.
    pub fn principality(&self) -> PrincipalityReport {
        let mut witnesses = Vec::new();
        let left_principal = self.one_side_principal(Side::Left, &mut witnesses);
        let right_principal = self.one_side_principal(Side::Right, &mut witnesses);
        PrincipalityReport {
            left_principal,
            right_principal,
            witnesses,
        }
    }

    pub fn is_left_principal(&self) -> bool {
        self.one_side_principal(Side::Left, &mut Vec::new())
    }

    pub fn is_biprincipal(&self) -> bool {
        self.principality().is_biprincipal()
    }

    fn one_side_principal(&self, side: Side, out: &mut Vec<Violation>) -> bool {
        // the acting groupoid, the moment whose fibres must be orbits, and
        // the other moment (which the acting side moves along)
        let (acting, fibre_moment, fibre_base, tag) = match side {
            Side::Left => (&*self.left, &self.j2, &*self.right, "left"),
            Side::Right => (&*self.right, &self.j1, &*self.left, "right"),
        };
        let act = |g: usize, x: usize| match side {
            Side::Left => self.act_left(g, x),
            Side::Right => self.act_right(x, g),
        };
        let mut ok = true;
        let n = self.carrier.len();
        let mut hit = vec![false; fibre_base.object_count()];
        for &p in fibre_moment {
            hit[p] = true;
        }
        for (p, _) in hit.iter().enumerate().filter(|(_, h)| !**h) {
            ok = false;
            out.push(Violation {
                axiom: format!("{tag} principality: moment not surjective"),
                witness: vec![fibre_base.object_name(p).to_string()],
            });
        }
        for x in 0..n {
            for g in 0..acting.arrow_count() {
                if let Some(y) = act(g, x) {
                    if y == x && !acting.is_unit(g) {
                        ok = false;
                        out.push(Violation {
                            axiom: format!("{tag} principality: not free"),
                            witness: vec![acting.arrow_name(g).to_string(), self.carrier[x].clone()],
                        });
                    }
                }
            }
        }
        // transitivity: orbits of the acting groupoid inside each fibre
        let mut uf = UnionFind::new(n);
        for x in 0..n {
            for g in 0..acting.arrow_count() {
                if let Some(y) = act(g, x) {
                    uf.union(x, y);
                }
            }
        }
        let mut first_in_fibre: HashMap<usize, usize> = HashMap::new();
        for (x, &f) in fibre_moment.iter().enumerate() {
            match first_in_fibre.get(&f) {
                None => {
                    first_in_fibre.insert(f, x);
                }
                Some(&x0) => {
                    if uf.find(x0) != uf.find(x) {
                        ok = false;
                        out.push(Violation {
                            axiom: format!("{tag} principality: fibre not one orbit"),
                            witness: vec![self.carrier[x0].clone(), self.carrier[x].clone()],
                        });
                    }
                }
            }
        }
        ok
    }

    /// Map from orbits of the right groupoid to orbits of the left one,
    /// indexed as in [`FiniteGroupoid::orbits`]. `None` when some right
    /// orbit has no preimage or its preimage meets several left orbits.
    pub fn induced_orbit_map(&self) -> Option<Vec<usize>> {
        let left_orbit = self.left.orbit_of();
        let right_orbit = self.right.orbit_of();
        let mut map: Vec<Option<usize>> = vec![None; self.right.orbits().len()];
        for x in 0..self.carrier.len() {
            let (a, b) = (right_orbit[self.j2[x]], left_orbit[self.j1[x]]);
            match map[a] {
                None => map[a] = Some(b),
                Some(prev) if prev != b => return None,
                _ => {}
            }
        }
        map.into_iter().collect()
    }
}

#[derive(Clone, Copy)]
enum Side {
    Left,
    Right,
}

/// `G` as a `(G, G)`-bibundle: carrier the arrows, `J1 = t`, `J2 = s`,
/// both actions by composition.
pub fn identity_bibundle(g: &Arc<FiniteGroupoid>) -> Bibundle {
    let n = g.arrow_count();
    Bibundle::from_indexed(
        g.clone(),
        g.clone(),
        g.arrows().to_vec(),
        (0..n).map(|a| g.tgt(a)).collect(),
        (0..n).map(|a| g.src(a)).collect(),
        |h, x| g.comp(h, x),
        |x, h| g.comp(x, h),
    )
}

/// The bibundle `(Γ₁)_Φ` of a homomorphism `Φ: Γ₂ -> Γ₁`: pairs `(g, y)`
/// with `s(g) = Φ(y)`, moments `t(g)` and `y`, left action
/// `g₁·(g, y) = (g₁g, y)` and right action `(g, y)·g₂ = (gΦ(g₂), s(g₂))`.
pub fn from_homomorphism(
    target: &Arc<FiniteGroupoid>,
    source: &Arc<FiniteGroupoid>,
    phi: &GroupoidMap,
) -> Result<Bibundle, BibundleError> {
    if !phi.is_functor(source, target) {
        return Err(BibundleError::NotFunctor(
            "map does not preserve endpoints, units and composition".into(),
        ));
    }
    let mut points = Vec::new();
    for y in 0..source.object_count() {
        for g in 0..target.arrow_count() {
            if target.src(g) == phi.objects[y] {
                points.push((g, y));
            }
        }
    }
    let index: HashMap<(usize, usize), usize> =
        points.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let names = points
        .iter()
        .map(|&(g, y)| format!("({},{})", target.arrow_name(g), source.object_name(y)))
        .collect();
    Ok(Bibundle::from_indexed(
        target.clone(),
        source.clone(),
        names,
        points.iter().map(|&(g, _)| target.tgt(g)).collect(),
        points.iter().map(|&(_, y)| y).collect(),
        |g1, i| {
            let (g, y) = points[i];
            target.comp(g1, g).map(|h| index[&(h, y)])
        },
        |i, g2| {
            let (g, y) = points[i];
            if source.tgt(g2) != y {
                return None;
            }
            let h = target.mul(g, phi.arrows[g2]);
            Some(index[&(h, source.src(g2))])
        },
    ))
}

/// The biprincipal `(𝒢(E), G)`-bibundle carried by a principal bundle `E`.
pub fn gauge_bibundle(data: &PrincipalBundleData) -> Result<Bibundle, BibundleError> {
    let (gauge, pair_class) = gauge_groupoid_with_classes(data)?;
    let group = Arc::new(from_group(&data.group));
    let m = data.total.len();
    // [x,z]·z = x
    let mut left = vec![None; gauge.arrow_count() * m];
    for x in 0..m {
        for z in 0..m {
            left[pair_class[x * m + z] * m + z] = Some(x);
        }
    }
    let base_obj: Vec<usize> = data
        .projection
        .iter()
        .map(|&b| gauge.object_index(&data.base[b]).expect("base object"))
        .collect();
    let element_arrow: Vec<usize> = (0..data.group.order())
        .map(|g| group.arrow_index(data.group.name(g)).expect("group arrow"))
        .collect();
    let mut right = vec![None; m * group.arrow_count()];
    for z in 0..m {
        for g in 0..data.group.order() {
            right[z * group.arrow_count() + element_arrow[g]] = Some(data.action[z][g]);
        }
    }
    let nr = group.arrow_count();
    let gauge = Arc::new(gauge);
    Ok(Bibundle::from_indexed(
        gauge,
        group,
        data.total.clone(),
        base_obj,
        vec![0; m],
        |a, z| left[a * m + z],
        |z, g| right[z * nr + g],
    ))
}

/// `S * S' = (S ×_{P₂} S') / Γ₂`, the tensor product of a
/// `(Γ₁, Γ₂)`-bibundle with a `(Γ₂, Γ₃)`-bibundle. Classes are named after
/// their lexicographically smallest pair.
pub fn tensor(s: &Bibundle, t: &Bibundle) -> Result<Bibundle, BibundleError> {
    if s.right != t.left {
        return Err(BibundleError::MiddleMismatch);
    }
    if !s.is_left_principal() {
        return Err(BibundleError::NotLeftPrincipal("first"));
    }
    if !t.is_left_principal() {
        return Err(BibundleError::NotLeftPrincipal("second"));
    }
    let middle = &*s.right;
    let (ns, nt) = (s.len(), t.len());
    let mut pair_id = vec![usize::MAX; ns * nt];
    let mut pairs = Vec::new();
    for x in 0..ns {
        for y in 0..nt {
            if s.j2[x] == t.j1[y] {
                pair_id[x * nt + y] = pairs.len();
                pairs.push((x, y));
            }
        }
    }
    let mut uf = UnionFind::new(pairs.len());
    for (p, &(x, y)) in pairs.iter().enumerate() {
        for g in 0..middle.arrow_count() {
            if middle.tgt(g) != s.j2[x] {
                continue;
            }
            let xg = s.act_right(x, g).expect("right action defined on its domain");
            let gy = t
                .act_left(middle.inv(g), y)
                .expect("left action defined on its domain");
            uf.union(p, pair_id[xg * nt + gy]);
        }
    }
    let (class_of, roots) = uf.classes();
    let class_index: HashMap<usize, usize> = roots.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let class = |x: usize, y: usize| class_index[&class_of[pair_id[x * nt + y]]];
    let names = roots
        .iter()
        .map(|&r| {
            let (x, y) = pairs[r];
            format!("[{}|{}]", s.carrier[x], t.carrier[y])
        })
        .collect();
    Ok(Bibundle::from_indexed(
        s.left.clone(),
        t.right.clone(),
        names,
        roots.iter().map(|&r| s.j1[pairs[r].0]).collect(),
        roots.iter().map(|&r| t.j2[pairs[r].1]).collect(),
        |g, c| {
            let (x, y) = pairs[roots[c]];
            s.act_left(g, x).map(|gx| class(gx, y))
        },
        |c, h| {
            let (x, y) = pairs[roots[c]];
            t.act_right(y, h).map(|yh| class(x, yh))
        },
    ))
}

/// An equivariant bijection `s1 -> s2` (commuting with both moments and
/// both actions), or `None`. Both bibundles must be over the same pair of
/// groupoids.
pub fn bibundle_isomorphic(s1: &Bibundle, s2: &Bibundle) -> Option<Vec<usize>> {
    if s1.left != s2.left || s1.right != s2.right || s1.len() != s2.len() {
        return None;
    }
    let profile = |s: &Bibundle| {
        let mut v: Vec<(usize, usize)> = (0..s.len()).map(|x| (s.j1[x], s.j2[x])).collect();
        v.sort_unstable();
        v
    };
    if profile(s1) != profile(s2) {
        return None;
    }
    let n = s1.len();
    // two-sided orbits of s1; each is fixed by the image of its first point
    let mut uf = UnionFind::new(n);
    for x in 0..n {
        for g in 0..s1.left.arrow_count() {
            if let Some(y) = s1.act_left(g, x) {
                uf.union(x, y);
            }
        }
        for g in 0..s1.right.arrow_count() {
            if let Some(y) = s1.act_right(x, g) {
                uf.union(x, y);
            }
        }
    }
    let (_, roots) = uf.classes();
    let left_from: Vec<Vec<usize>> = (0..s1.left.object_count())
        .map(|o| s1.left.source_fibre(o))
        .collect();
    let right_into: Vec<Vec<usize>> = (0..s1.right.object_count())
        .map(|o| {
            (0..s1.right.arrow_count())
                .filter(|&g| s1.right.tgt(g) == o)
                .collect()
        })
        .collect();
    let mut state = IsoSearch {
        s1,
        s2,
        forward: vec![usize::MAX; n],
        backward: vec![usize::MAX; n],
        trail: Vec::new(),
        left_from,
        right_into,
    };
    state.solve(&roots, 0).then_some(state.forward)
}

struct IsoSearch<'a> {
    s1: &'a Bibundle,
    s2: &'a Bibundle,
    forward: Vec<usize>,
    backward: Vec<usize>,
    trail: Vec<usize>,
    left_from: Vec<Vec<usize>>,
    right_into: Vec<Vec<usize>>,
}

impl IsoSearch<'_> {
    fn solve(&mut self, roots: &[usize], i: usize) -> bool {
        if i == roots.len() {
            return true;
        }
        let x = roots[i];
        for y in 0..self.s2.len() {
            if self.backward[y] != usize::MAX
                || self.s2.j1[y] != self.s1.j1[x]
                || self.s2.j2[y] != self.s1.j2[x]
            {
                continue;
            }
            let mark = self.trail.len();
            if self.propagate(x, y) && self.solve(roots, i + 1) {
                return true;
            }
            while self.trail.len() > mark {
                let u = self.trail.pop().expect("trail entry");
                self.backward[self.forward[u]] = usize::MAX;
                self.forward[u] = usize::MAX;
            }
        }
        false
    }

    fn assign(&mut self, u: usize, v: usize, stack: &mut Vec<usize>) -> bool {
        if self.forward[u] != usize::MAX {
            return self.forward[u] == v;
        }
        if self.backward[v] != usize::MAX
            || self.s1.j1[u] != self.s2.j1[v]
            || self.s1.j2[u] != self.s2.j2[v]
        {
            return false;
        }
        self.forward[u] = v;
        self.backward[v] = u;
        self.trail.push(u);
        stack.push(u);
        true
    }

    fn propagate(&mut self, x: usize, y: usize) -> bool {
        let mut stack = Vec::new();
        if !self.assign(x, y, &mut stack) {
            return false;
        }
        while let Some(u) = stack.pop() {
            let v = self.forward[u];
            for k in 0..self.left_from[self.s1.j1[u]].len() {
                let g = self.left_from[self.s1.j1[u]][k];
                let (Some(gu), Some(gv)) = (self.s1.act_left(g, u), self.s2.act_left(g, v)) else {
                    return false;
                };
                if !self.assign(gu, gv, &mut stack) {
                    return false;
                }
            }
            for k in 0..self.right_into[self.s1.j2[u]].len() {
                let g = self.right_into[self.s1.j2[u]][k];
                let (Some(ug), Some(vg)) = (self.s1.act_right(u, g), self.s2.act_right(v, g)) else {
                    return false;
                };
                if !self.assign(ug, vg, &mut stack) {
                    return false;
                }
            }
        }
        true
    }
}

/// Decides Morita equivalence by matching orbits with isomorphic isotropy
/// groups, and returns a biprincipal `(g1, g2)`-bibundle as witness.
///
/// The witness is `(g1)_F` for the functor `F: g2 -> g1` that sends every
/// orbit of `g2` to the base point of its partner orbit, using an isotropy
/// isomorphism and the connecting arrows from the orbit's base point. Over
/// a transitive `g2` its carrier is the source fibre `s⁻¹(x)` of `g1`.
pub fn morita_equivalent(
    g1: &Arc<FiniteGroupoid>,
    g2: &Arc<FiniteGroupoid>,
) -> Option<Bibundle> {
    let o1 = g1.orbits();
    let o2 = g2.orbits();
    if o1.len() != o2.len() {
        return None;
    }
    let iso1: Vec<_> = o1.iter().map(|o| g1.isotropy(o[0])).collect();
    let mut taken = vec![false; o1.len()];
    let mut functor = GroupoidMap {
        objects: vec![0; g2.object_count()],
        arrows: vec![0; g2.arrow_count()],
    };
    for orbit in &o2 {
        let base2 = orbit[0];
        let iso2 = g2.isotropy(base2);
        let (i, psi) = (0..o1.len())
            .filter(|&i| !taken[i])
            .find_map(|i| iso2.isomorphism(&iso1[i]).map(|psi| (i, psi)))?;
        taken[i] = true;
        let base1 = o1[i][0];
        let arrows1 = g1.isotropy_arrows(base1);
        let arrows2 = g2.isotropy_arrows(base2);
        let pos2: HashMap<usize, usize> = arrows2.iter().enumerate().map(|(k, &a)| (a, k)).collect();
        let connecting = |y: usize| g2.hom(base2, y)[0];
        for &y in orbit {
            functor.objects[y] = base1;
        }
        for g in 0..g2.arrow_count() {
            let (y, y2) = (g2.src(g), g2.tgt(g));
            if !orbit.contains(&y) {
                continue;
            }
            let k = g2.mul(g2.inv(connecting(y2)), g2.mul(g, connecting(y)));
            functor.arrows[g] = arrows1[psi[pos2[&k]]];
        }
    }
    from_homomorphism(g1, g2, &functor).ok()
}

/// Exhaustive variant of [`morita_equivalent`]: searches every functor
/// `g2 -> g1` and tests its bibundle for biprincipality. Every
/// left-principal bibundle over a finite discrete base admits a section of
/// `J2` and is therefore isomorphic to some `(g1)_F`, so this search covers
/// all Morita bibundles up to isomorphism.
pub fn morita_search_exhaustive(
    g1: &Arc<FiniteGroupoid>,
    g2: &Arc<FiniteGroupoid>,
) -> Option<Bibundle> {
    let mut found = None;
    enumerate_functors(g2, g1, FunctorKind::All, |f| {
        let s = from_homomorphism(g1, g2, f).expect("enumerated maps are functors");
        if s.is_biprincipal() {
            found = Some(s);
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    found
}
