//! Standard groupoids: pair, one-object (group), action, gauge, disjoint
//! unions and bundles of groups.

use std::collections::HashMap;

use super::{FiniteGroupoid, GroupoidError};
use crate::group::FiniteGroup;
use crate::union_find::UnionFind;

/// Pair groupoid on objects `"1".."n"`. The arrow `"(x,y)"` goes from `y` to
/// `x`, so `(x,y)(y,z) = (x,z)`.
pub fn pair_groupoid(n: usize) -> FiniteGroupoid {
    assert!(n >= 1, "pair groupoid needs at least one object");
    let objects: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
    let idx = |x: usize, y: usize| x * n + y;
    let arrows = (0..n * n)
        .map(|a| format!("({},{})", objects[a / n], objects[a % n]))
        .collect();
    let src = (0..n * n).map(|a| a % n).collect();
    let tgt = (0..n * n).map(|a| a / n).collect();
    let unit = (0..n).map(|x| idx(x, x)).collect();
    let inv = (0..n * n).map(|a| idx(a % n, a / n)).collect();
    FiniteGroupoid::from_indexed(objects, arrows, src, tgt, unit, inv, |g, h| {
        idx(g / n, h % n)
    })
}

/// A group as a groupoid over the single object `"*"`.
pub fn from_group(group: &FiniteGroup) -> FiniteGroupoid {
    let n = group.order();
    FiniteGroupoid::from_indexed(
        vec!["*".to_string()],
        group.names().to_vec(),
        vec![0; n],
        vec![0; n],
        vec![group.identity()],
        (0..n).map(|a| group.inv(a)).collect(),
        |g, h| group.mul(g, h),
    )
}

/// Action groupoid `G ⋉ X` of a left action, `act[g][x] = g·x`. The arrow
/// `"(g,x)"` goes from `x` to `g·x`.
pub fn action_groupoid(
    group: &FiniteGroup,
    points: &[String],
    act: &[Vec<usize>],
) -> Result<FiniteGroupoid, GroupoidError> {
    let (n, m) = (group.order(), points.len());
    if m == 0 {
        return Err(GroupoidError::Empty);
    }
    if act.len() != n || act.iter().any(|row| row.len() != m || row.iter().any(|&y| y >= m)) {
        return Err(GroupoidError::InvalidAction("action table has wrong shape".into()));
    }
    let e = group.identity();
    if let Some(x) = (0..m).find(|&x| act[e][x] != x) {
        return Err(GroupoidError::InvalidAction(format!(
            "identity moves `{}`",
            points[x]
        )));
    }
    for g in 0..n {
        for h in 0..n {
            for x in 0..m {
                if act[group.mul(g, h)][x] != act[g][act[h][x]] {
                    return Err(GroupoidError::InvalidAction(format!(
                        "(gh)·x != g·(h·x) for g=`{}`, h=`{}`, x=`{}`",
                        group.name(g),
                        group.name(h),
                        points[x]
                    )));
                }
            }
        }
    }
    let arrow = |g: usize, x: usize| g * m + x;
    let arrows = (0..n * m)
        .map(|a| format!("({},{})", group.name(a / m), points[a % m]))
        .collect();
    let src = (0..n * m).map(|a| a % m).collect();
    let tgt = (0..n * m).map(|a| act[a / m][a % m]).collect();
    let unit = (0..m).map(|x| arrow(e, x)).collect();
    let inv = (0..n * m)
        .map(|a| {
            let (g, x) = (a / m, a % m);
            arrow(group.inv(g), act[g][x])
        })
        .collect();
    Ok(FiniteGroupoid::from_indexed(
        points.to_vec(),
        arrows,
        src,
        tgt,
        unit,
        inv,
        |a, b| arrow(group.mul(a / m, b / m), b % m),
    ))
}

/// A right principal `G`-bundle `p: E -> B` with `action[e][g] = e·g`.
#[derive(Clone, Debug)]
pub struct PrincipalBundleData {
    pub total: Vec<String>,
    pub base: Vec<String>,
    pub projection: Vec<usize>,
    pub group: FiniteGroup,
    pub action: Vec<Vec<usize>>,
}

impl PrincipalBundleData {
    /// `G` acting on itself by right translation over a single point.
    pub fn group_over_point(group: &FiniteGroup) -> Self {
        let n = group.order();
        Self {
            total: group.names().to_vec(),
            base: vec!["*".into()],
            projection: vec![0; n],
            group: group.clone(),
            action: (0..n).map(|e| (0..n).map(|g| group.mul(e, g)).collect()).collect(),
        }
    }

    /// The trivial bundle `B × G -> B`, total-space points named `"b/g"`.
    pub fn trivial(base: &[String], group: &FiniteGroup) -> Self {
        let n = group.order();
        let total = base
            .iter()
            .flat_map(|b| group.names().iter().map(move |g| format!("{b}/{g}")))
            .collect();
        Self {
            total,
            base: base.to_vec(),
            projection: (0..base.len() * n).map(|e| e / n).collect(),
            group: group.clone(),
            action: (0..base.len() * n)
                .map(|e| (0..n).map(|g| (e / n) * n + group.mul(e % n, g)).collect())
                .collect(),
        }
    }

    /// Checks surjectivity of the projection, the right-action axioms, and
    /// that the action is free and transitive on every fibre.
    pub fn check(&self) -> Result<(), GroupoidError> {
        let (ne, nb, ng) = (self.total.len(), self.base.len(), self.group.order());
        let bad = |msg: String| Err(GroupoidError::NotPrincipal(msg));
        if self.projection.len() != ne || self.projection.iter().any(|&b| b >= nb) {
            return bad("projection table has wrong shape".into());
        }
        if self.action.len() != ne
            || self.action.iter().any(|row| row.len() != ng || row.iter().any(|&f| f >= ne))
        {
            return bad("action table has wrong shape".into());
        }
        let mut hit = vec![false; nb];
        for &b in &self.projection {
            hit[b] = true;
        }
        if let Some(b) = hit.iter().position(|h| !h) {
            return bad(format!("projection misses `{}`", self.base[b]));
        }
        let e = self.group.identity();
        for x in 0..ne {
            if self.action[x][e] != x {
                return bad(format!("identity moves `{}`", self.total[x]));
            }
            for g in 0..ng {
                let xg = self.action[x][g];
                if self.projection[xg] != self.projection[x] {
                    return bad(format!("action leaves the fibre of `{}`", self.total[x]));
                }
                if g != e && xg == x {
                    return bad(format!(
                        "`{}` fixes `{}` (not free)",
                        self.group.name(g),
                        self.total[x]
                    ));
                }
                for h in 0..ng {
                    if self.action[xg][h] != self.action[x][self.group.mul(g, h)] {
                        return bad(format!("(x·g)·h != x·(gh) at `{}`", self.total[x]));
                    }
                }
            }
        }
        for x in 0..ne {
            for y in 0..ne {
                if self.projection[x] == self.projection[y]
                    && !(0..ng).any(|g| self.action[x][g] == y)
                {
                    return bad(format!(
                        "`{}` and `{}` lie in one fibre but not one orbit",
                        self.total[x], self.total[y]
                    ));
                }
            }
        }
        Ok(())
    }

    /// The unique `g` with `x·g = y`; both must lie in one fibre.
    pub fn translation(&self, x: usize, y: usize) -> usize {
        (0..self.group.order())
            .find(|&g| self.action[x][g] == y)
            .expect("points in one fibre of a principal bundle")
    }
}

/// Gauge groupoid `(E × E)/G` over `B`: the class `[x,y]` goes from `p(y)`
/// to `p(x)` and `[x1,y1][x2,y2] = [x1,y2]` once representatives are chosen
/// with `y1 = x2`. Class names use the lexicographically smallest pair.
pub fn gauge_groupoid(data: &PrincipalBundleData) -> Result<FiniteGroupoid, GroupoidError> {
    gauge_groupoid_with_classes(data).map(|(g, _)| g)
}

/// The gauge groupoid together with the arrow index of `[x,y]` for every
/// pair, stored at `x * |E| + y` (indices into `data.total`).
pub(crate) fn gauge_groupoid_with_classes(
    data: &PrincipalBundleData,
) -> Result<(FiniteGroupoid, Vec<usize>), GroupoidError> {
    data.check()?;
    let m = data.total.len();
    // rank by name so that union-find roots are lexicographic minima
    let mut by_name: Vec<usize> = (0..m).collect();
    by_name.sort_by(|&a, &b| data.total[a].cmp(&data.total[b]));
    let mut rank = vec![0; m];
    for (r, &e) in by_name.iter().enumerate() {
        rank[e] = r;
    }
    let key = |x: usize, y: usize| rank[x] * m + rank[y];
    let mut uf = UnionFind::new(m * m);
    for x in 0..m {
        for y in 0..m {
            for g in 0..data.group.order() {
                uf.union(key(x, y), key(data.action[x][g], data.action[y][g]));
            }
        }
    }
    let (class_of_key, roots) = uf.classes();
    let class_index: HashMap<usize, usize> = roots.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let class = |x: usize, y: usize| class_index[&class_of_key[key(x, y)]];
    let rep = |k: usize| (by_name[k / m], by_name[k % m]);
    let arrows: Vec<String> = roots
        .iter()
        .map(|&k| {
            let (x, y) = rep(k);
            format!("[{},{}]", data.total[x], data.total[y])
        })
        .collect();
    let src = roots.iter().map(|&k| data.projection[rep(k).1]).collect();
    let tgt = roots.iter().map(|&k| data.projection[rep(k).0]).collect();
    let unit = (0..data.base.len())
        .map(|b| {
            let x = data.projection.iter().position(|&p| p == b).expect("surjective");
            class(x, x)
        })
        .collect();
    let inv = roots
        .iter()
        .map(|&k| {
            let (x, y) = rep(k);
            class(y, x)
        })
        .collect();
    let groupoid = FiniteGroupoid::from_indexed(
        data.base.clone(),
        arrows.clone(),
        src,
        tgt,
        unit,
        inv,
        |a, b| {
            let (x1, y1) = rep(roots[a]);
            let (x2, y2) = rep(roots[b]);
            let g = data.translation(x2, y1);
            class(x1, data.action[y2][g])
        },
    );
    let pair_class = (0..m * m)
        .map(|k| {
            let name = &arrows[class(k / m, k % m)];
            groupoid.arrow_index(name).expect("class arrow present")
        })
        .collect();
    Ok((groupoid, pair_class))
}

/// Disjoint union; ids of part `i` are prefixed with `"{i}:"`.
pub fn disjoint_union(parts: &[&FiniteGroupoid]) -> FiniteGroupoid {
    let mut objects = Vec::new();
    let mut arrows = Vec::new();
    let (mut src, mut tgt, mut unit, mut inv) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut obj_off = Vec::new();
    let mut arr_off = Vec::new();
    let mut owner = Vec::new();
    for (i, part) in parts.iter().enumerate() {
        let (oo, ao) = (objects.len(), arrows.len());
        obj_off.push(oo);
        arr_off.push(ao);
        objects.extend(part.objects().iter().map(|o| format!("{i}:{o}")));
        arrows.extend(part.arrows().iter().map(|a| format!("{i}:{a}")));
        for g in 0..part.arrow_count() {
            src.push(oo + part.src(g));
            tgt.push(oo + part.tgt(g));
            inv.push(ao + part.inv(g));
            owner.push(i);
        }
        unit.extend((0..part.object_count()).map(|x| ao + part.unit(x)));
    }
    FiniteGroupoid::from_indexed(objects, arrows, src, tgt, unit, inv, |g, h| {
        let i = owner[g];
        arr_off[i] + parts[i].mul(g - arr_off[i], h - arr_off[i])
    })
}

/// Bundle of groups over as many points as there are groups.
pub fn bundle_of_groups(groups: &[FiniteGroup]) -> FiniteGroupoid {
    let parts: Vec<FiniteGroupoid> = groups.iter().map(from_group).collect();
    let refs: Vec<&FiniteGroupoid> = parts.iter().collect();
    disjoint_union(&refs)
}
