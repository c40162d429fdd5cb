//! Groupoid homomorphisms (functors): enumeration, isomorphism search and
//! automorphisms.
//!
//! Every functor out of a finite groupoid is pinned down by a skeleton of
//! the domain: in each orbit a base object `b` (its smallest object), one
//! connecting arrow `c_x: b -> x` per object, and a generating set of the
//! isotropy group at `b`. An arrow `g: x -> y` factors uniquely as
//! `c_y · k · c_x⁻¹` with `k` in the isotropy at `b`, so choosing images of
//! the objects, of the `c_x`, and a homomorphism on isotropy determines the
//! functor, and distinct choices give distinct functors.

use std::ops::ControlFlow;

use super::FiniteGroupoid;
use crate::group::FiniteGroup;

/// A map of objects and arrows between two groupoids, by index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupoidMap {
    pub objects: Vec<usize>,
    pub arrows: Vec<usize>,
}

impl GroupoidMap {
    pub fn identity(g: &FiniteGroupoid) -> Self {
        Self {
            objects: (0..g.object_count()).collect(),
            arrows: (0..g.arrow_count()).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.objects.iter().enumerate().all(|(i, &x)| i == x)
            && self.arrows.iter().enumerate().all(|(i, &a)| i == a)
    }

    /// `self ∘ other` (apply `other` first).
    pub fn after(&self, other: &GroupoidMap) -> GroupoidMap {
        GroupoidMap {
            objects: other.objects.iter().map(|&x| self.objects[x]).collect(),
            arrows: other.arrows.iter().map(|&a| self.arrows[a]).collect(),
        }
    }

    /// Inverse of a bijective map.
    pub fn inverse(&self) -> GroupoidMap {
        let mut objects = vec![0; self.objects.len()];
        for (i, &x) in self.objects.iter().enumerate() {
            objects[x] = i;
        }
        let mut arrows = vec![0; self.arrows.len()];
        for (i, &a) in self.arrows.iter().enumerate() {
            arrows[a] = i;
        }
        GroupoidMap { objects, arrows }
    }

    /// Checks that the map preserves source, target, units and composition.
    pub fn is_functor(&self, dom: &FiniteGroupoid, cod: &FiniteGroupoid) -> bool {
        if self.objects.len() != dom.object_count() || self.arrows.len() != dom.arrow_count() {
            return false;
        }
        if self.objects.iter().any(|&x| x >= cod.object_count())
            || self.arrows.iter().any(|&a| a >= cod.arrow_count())
        {
            return false;
        }
        for g in 0..dom.arrow_count() {
            let fg = self.arrows[g];
            if cod.src(fg) != self.objects[dom.src(g)] || cod.tgt(fg) != self.objects[dom.tgt(g)] {
                return false;
            }
        }
        for x in 0..dom.object_count() {
            if self.arrows[dom.unit(x)] != cod.unit(self.objects[x]) {
                return false;
            }
        }
        for g in 0..dom.arrow_count() {
            for h in 0..dom.arrow_count() {
                if let Some(gh) = dom.comp(g, h) {
                    if cod.comp(self.arrows[g], self.arrows[h]) != Some(self.arrows[gh]) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Which functors to enumerate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FunctorKind {
    /// Every functor.
    All,
    /// Fully faithful and essentially surjective functors.
    Equivalence,
    /// Isomorphisms of groupoids.
    Isomorphism,
}

struct Orbit {
    objects: Vec<usize>,
    /// connecting arrow base -> x for each object of the orbit (unit at base)
    connecting: Vec<usize>,
    isotropy: FiniteGroup,
    /// isotropy element index -> arrow
    iso_arrows: Vec<usize>,
}

struct Skeleton {
    orbits: Vec<Orbit>,
}

impl Skeleton {
    fn new(g: &FiniteGroupoid) -> Self {
        let orbits = g
            .orbits()
            .into_iter()
            .map(|objects| {
                let base = objects[0];
                let connecting = objects
                    .iter()
                    .map(|&x| {
                        if x == base {
                            g.unit(base)
                        } else {
                            g.hom(base, x)[0]
                        }
                    })
                    .collect();
                Orbit {
                    isotropy: g.isotropy(base),
                    iso_arrows: g.isotropy_arrows(base).to_vec(),
                    objects,
                    connecting,
                }
            })
            .collect();
        Self { orbits }
    }
}

struct Search<'a, F> {
    dom: &'a FiniteGroupoid,
    cod: &'a FiniteGroupoid,
    kind: FunctorKind,
    skel: Skeleton,
    cod_orbit_of: Vec<usize>,
    cod_orbits: Vec<Vec<usize>>,
    used: Vec<bool>,
    map: GroupoidMap,
    visit: F,
}

impl<F: FnMut(&GroupoidMap) -> ControlFlow<()>> Search<'_, F> {
    fn orbit(&mut self, o: usize) -> ControlFlow<()> {
        if o == self.skel.orbits.len() {
            if self.kind == FunctorKind::Equivalence {
                let mut hit = vec![false; self.cod_orbits.len()];
                for &x in &self.map.objects {
                    hit[self.cod_orbit_of[x]] = true;
                }
                if hit.iter().any(|h| !h) {
                    return ControlFlow::Continue(());
                }
            }
            debug_assert!(self.map.is_functor(self.dom, self.cod));
            return (self.visit)(&self.map);
        }
        let base = self.skel.orbits[o].objects[0];
        let dom_orbit_size = self.skel.orbits[o].objects.len();
        let dom_iso_order = self.skel.orbits[o].isotropy.order();
        for fb in 0..self.cod.object_count() {
            let cod_iso = self.cod.isotropy_arrows(fb);
            match self.kind {
                FunctorKind::All => {}
                FunctorKind::Equivalence => {
                    if cod_iso.len() != dom_iso_order {
                        continue;
                    }
                }
                FunctorKind::Isomorphism => {
                    if self.used[fb]
                        || cod_iso.len() != dom_iso_order
                        || self.cod_orbits[self.cod_orbit_of[fb]].len() != dom_orbit_size
                    {
                        continue;
                    }
                }
            }
            let cod_group = self.cod.isotropy(fb);
            let cod_iso = cod_iso.to_vec();
            let injective = self.kind != FunctorKind::All;
            let homs = self.skel.orbits[o].isotropy.homomorphisms(&cod_group, injective);
            if homs.is_empty() {
                continue;
            }
            self.used[fb] = true;
            self.map.objects[base] = fb;
            for hom in &homs {
                // isotropy element k -> arrow F(k)
                let hom_arrows: Vec<usize> = hom.iter().map(|&i| cod_iso[i]).collect();
                self.objects_in_orbit(o, 1, &hom_arrows)?;
            }
            self.used[fb] = false;
        }
        ControlFlow::Continue(())
    }

    /// Chooses images for the `i`-th object of orbit `o` and its connecting
    /// arrow, then fills in the orbit's arrows.
    fn objects_in_orbit(&mut self, o: usize, i: usize, hom: &[usize]) -> ControlFlow<()> {
        let orbit_len = self.skel.orbits[o].objects.len();
        if i == orbit_len {
            self.fill_orbit(o, hom);
            return self.orbit(o + 1);
        }
        let x = self.skel.orbits[o].objects[i];
        let fb = self.map.objects[self.skel.orbits[o].objects[0]];
        let candidates = self.cod_orbits[self.cod_orbit_of[fb]].clone();
        for fx in candidates {
            if self.kind == FunctorKind::Isomorphism && self.used[fx] {
                continue;
            }
            self.used[fx] = true;
            self.map.objects[x] = fx;
            let arrows = self.cod.hom(fb, fx).to_vec();
            for fc in arrows {
                let c = self.skel.orbits[o].connecting[i];
                self.map.arrows[c] = fc;
                self.objects_in_orbit(o, i + 1, hom)?;
            }
            self.used[fx] = false;
        }
        ControlFlow::Continue(())
    }

    fn fill_orbit(&mut self, o: usize, hom: &[usize]) {
        let orbit = &self.skel.orbits[o];
        let base = orbit.objects[0];
        let mut pos = vec![usize::MAX; self.dom.object_count()];
        for (i, &x) in orbit.objects.iter().enumerate() {
            pos[x] = i;
        }
        let mut iso_pos = vec![usize::MAX; self.dom.arrow_count()];
        for (i, &k) in orbit.iso_arrows.iter().enumerate() {
            iso_pos[k] = i;
        }
        // images of connecting arrows; the base's is the unit
        let fc: Vec<usize> = orbit
            .connecting
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                if i == 0 {
                    self.cod.unit(self.map.objects[base])
                } else {
                    self.map.arrows[c]
                }
            })
            .collect();
        for g in 0..self.dom.arrow_count() {
            let (x, y) = (self.dom.src(g), self.dom.tgt(g));
            if pos[x] == usize::MAX {
                continue;
            }
            let (cx, cy) = (orbit.connecting[pos[x]], orbit.connecting[pos[y]]);
            // k = c_y⁻¹ g c_x, a loop at base
            let k = self.dom.mul(self.dom.inv(cy), self.dom.mul(g, cx));
            let fk = hom[iso_pos[k]];
            let (fcx, fcy) = (fc[pos[x]], fc[pos[y]]);
            self.map.arrows[g] = self.cod.mul(fcy, self.cod.mul(fk, self.cod.inv(fcx)));
        }
    }
}

/// Calls `visit` on every functor `dom -> cod` of the requested kind, in a
/// fixed deterministic order, until it returns `Break`.
pub fn enumerate_functors(
    dom: &FiniteGroupoid,
    cod: &FiniteGroupoid,
    kind: FunctorKind,
    visit: impl FnMut(&GroupoidMap) -> ControlFlow<()>,
) {
    if kind == FunctorKind::Isomorphism
        && (dom.object_count() != cod.object_count() || dom.arrow_count() != cod.arrow_count())
    {
        return;
    }
    let cod_orbits = cod.orbits();
    let mut search = Search {
        dom,
        cod,
        kind,
        skel: Skeleton::new(dom),
        cod_orbit_of: cod.orbit_of(),
        cod_orbits,
        used: vec![false; cod.object_count()],
        map: GroupoidMap {
            objects: vec![0; dom.object_count()],
            arrows: vec![0; dom.arrow_count()],
        },
        visit,
    };
    let _ = search.orbit(0);
}

/// All functors of the given kind, collected.
pub fn collect_functors(
    dom: &FiniteGroupoid,
    cod: &FiniteGroupoid,
    kind: FunctorKind,
) -> Vec<GroupoidMap> {
    let mut out = Vec::new();
    enumerate_functors(dom, cod, kind, |m| {
        out.push(m.clone());
        ControlFlow::Continue(())
    });
    out
}

/// An isomorphism `g1 -> g2`, or `None`. The first one found in the
/// canonical search order is returned.
pub fn groupoid_isomorphic(g1: &FiniteGroupoid, g2: &FiniteGroupoid) -> Option<GroupoidMap> {
    let mut found = None;
    enumerate_functors(g1, g2, FunctorKind::Isomorphism, |m| {
        found = Some(m.clone());
        ControlFlow::Break(())
    });
    found
}

/// All automorphisms of `g`: the identity first, then the rest in
/// lexicographic order of their arrow maps.
pub fn automorphisms(g: &FiniteGroupoid) -> Vec<GroupoidMap> {
    let mut autos = collect_functors(g, g, FunctorKind::Isomorphism);
    autos.sort_by(|a, b| {
        (!a.is_identity(), &a.arrows).cmp(&(!b.is_identity(), &b.arrows))
    });
    autos
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{bundle_of_groups, from_group, pair_groupoid};

    fn factorial(n: usize) -> usize {
        (1..=n).product()
    }

    /// Brute force over all object bijections and arrow bijections
    /// compatible with endpoints; exponential, for tiny inputs only.
    fn brute_force_automorphism_count(g: &FiniteGroupoid) -> usize {
        use crate::group::permutations;
        let mut count = 0;
        for perm in permutations(g.arrow_count()) {
            let objects: Vec<usize> = (0..g.object_count())
                .map(|x| g.tgt(perm[g.unit(x)]))
                .collect();
            let m = GroupoidMap {
                objects,
                arrows: perm,
            };
            let mut seen = vec![false; g.object_count()];
            let bij = m.objects.iter().all(|&x| !std::mem::replace(&mut seen[x], true));
            if bij && m.is_functor(g, g) {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn automorphism_counts_match_brute_force() {
        let cases = [
            from_group(&FiniteGroup::cyclic(4)),
            from_group(&FiniteGroup::cyclic(5)),
            pair_groupoid(2),
            pair_groupoid(3),
            bundle_of_groups(&[FiniteGroup::cyclic(2), FiniteGroup::cyclic(2)]),
        ];
        for g in &cases {
            assert_eq!(automorphisms(g).len(), brute_force_automorphism_count(g));
        }
    }

    #[test]
    fn aut_of_pair_groupoid_is_symmetric_group() {
        for n in 1..=4 {
            assert_eq!(automorphisms(&pair_groupoid(n)).len(), factorial(n));
        }
    }

    #[test]
    fn identity_comes_first() {
        let autos = automorphisms(&from_group(&FiniteGroup::symmetric(3)));
        assert!(autos[0].is_identity());
        assert_eq!(autos.len(), 6);
    }

    #[test]
    fn z4_not_isomorphic_to_klein() {
        let z4 = from_group(&FiniteGroup::cyclic(4));
        let v4 = from_group(&FiniteGroup::direct_product(
            &FiniteGroup::cyclic(2),
            &FiniteGroup::cyclic(2),
        ));
        assert!(groupoid_isomorphic(&z4, &v4).is_none());
        let id = groupoid_isomorphic(&z4, &z4).unwrap();
        assert!(id.is_identity());
    }

    #[test]
    fn every_functor_is_a_functor() {
        let dom = pair_groupoid(2);
        let cod = bundle_of_groups(&[FiniteGroup::cyclic(2), FiniteGroup::cyclic(3)]);
        let all = collect_functors(&dom, &cod, FunctorKind::All);
        // object map constant into one point (the pair groupoid is connected)
        // and the connecting arrow goes anywhere in that point's group
        assert_eq!(all.len(), 2 + 3);
        assert!(all.iter().all(|m| m.is_functor(&dom, &cod)));
    }
}
