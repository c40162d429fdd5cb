//! JSON file formats.
//!
//! Groupoids are given either as explicit tables (see [`GroupoidTables`]) or
//! by one of the shorthand keys:
//!
//! - `{"pair": n}`
//! - `{"group": G}` where `G` is `{"elements", "table"}` or a name such as
//!   `"Z4"`, `"S3"`, `"D4"`, `"Q8"`, `"Z2xZ2"`
//! - `{"action": {"group": G, "points": [...], "act": [[g, x, g·x], ...]}}`
//! - `{"gauge": {"group": G, "base": [...]}}` for the trivial bundle, or with
//!   `"total"`, `"projection": {e: b}` and `"act": [[e, g, e·g], ...]`
//! - `{"union": [groupoid, ...]}` and `{"bundle": [G, ...]}`
//! - `{"ref": "path"}`, or a bare string, naming another file relative to
//!   the referring one.
//!
//! Bibundles are `{"left", "right", "carrier", "J1", "J2", "leftAct",
//! "rightAct"}` with `left`/`right` groupoids in any of the forms above.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::bibundle::{Bibundle, BibundleError, BibundleTables};
use crate::group::{FiniteGroup, GroupError, GroupTable};
use crate::groupoid::{
    action_groupoid, bundle_of_groups, disjoint_union, from_group, gauge_groupoid, pair_groupoid,
    FiniteGroupoid, GroupoidError, GroupoidTables, PrincipalBundleData,
};
use crate::tss::LabeledSurfaceGraph;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {message}")]
    Read { path: String, message: String },
    #[error("{path}: invalid JSON: {message}")]
    Json { path: String, message: String },
    #[error("format: {0}")]
    Format(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Groupoid(#[from] GroupoidError),
    #[error(transparent)]
    Bibundle(#[from] BibundleError),
}

fn format_err(msg: impl Into<String>) -> IoError {
    IoError::Format(msg.into())
}

/// Which kind of document a JSON file holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FileKind {
    Groupoid,
    Bibundle,
    Tss,
    FieldSidecar,
    AnalyticField,
}

pub fn detect_kind(v: &Value) -> FileKind {
    let has = |k: &str| v.get(k).is_some();
    if has("vertices") {
        FileKind::Tss
    } else if has("carrier") {
        FileKind::Bibundle
    } else if has("dimension") && has("data") {
        FileKind::FieldSidecar
    } else if has("entries") && has("kind") {
        FileKind::AnalyticField
    } else {
        FileKind::Groupoid
    }
}

pub fn read_json(path: &Path) -> Result<Value, IoError> {
    let text = fs::read_to_string(path).map_err(|e| IoError::Read {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| IoError::Json {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn from_value<T: for<'de> Deserialize<'de>>(v: &Value, what: &str) -> Result<T, IoError> {
    T::deserialize(v).map_err(|e| format_err(format!("{what}: {e}")))
}

/// A group by name: `Z<n>`, `S<n>`, `D<n>` (order `2n`), `Q8`, `V4`, or a
/// product `AxB`.
pub fn named_group(name: &str) -> Result<FiniteGroup, IoError> {
    if let Some((a, b)) = name.split_once('x') {
        return Ok(FiniteGroup::direct_product(&named_group(a)?, &named_group(b)?));
    }
    let bad = || format_err(format!("unknown group name `{name}`"));
    let num = |s: &str| s.parse::<usize>().ok().filter(|&n| n > 0).ok_or_else(bad);
    match name {
        "Q8" => Ok(FiniteGroup::quaternion()),
        "V4" => Ok(FiniteGroup::direct_product(&FiniteGroup::cyclic(2), &FiniteGroup::cyclic(2))),
        "1" | "trivial" => Ok(FiniteGroup::trivial()),
        _ if name.starts_with('Z') => Ok(FiniteGroup::cyclic(num(&name[1..])?)),
        _ if name.starts_with('S') => {
            let n = num(&name[1..])?;
            if n > 6 {
                return Err(format_err(format!("`{name}` is too large")));
            }
            Ok(FiniteGroup::symmetric(n))
        }
        _ if name.starts_with('D') => Ok(FiniteGroup::dihedral(num(&name[1..])?)),
        _ => Err(bad()),
    }
}

fn group_from_value(v: &Value) -> Result<FiniteGroup, IoError> {
    match v {
        Value::String(name) => named_group(name),
        _ => Ok(FiniteGroup::from_wire(&from_value::<GroupTable>(v, "group")?)?),
    }
}

#[derive(Deserialize)]
struct ActionSpec {
    group: Value,
    points: Vec<String>,
    act: Vec<[String; 3]>,
}

#[derive(Deserialize)]
struct GaugeSpec {
    group: Value,
    base: Vec<String>,
    #[serde(default)]
    total: Option<Vec<String>>,
    #[serde(default)]
    projection: Option<BTreeMap<String, String>>,
    #[serde(default)]
    act: Option<Vec<[String; 3]>>,
}

fn index_of(names: &[String], id: &str, what: &str) -> Result<usize, IoError> {
    names
        .iter()
        .position(|n| n == id)
        .ok_or_else(|| format_err(format!("unknown {what} `{id}`")))
}

fn group_index(group: &FiniteGroup, id: &str) -> Result<usize, IoError> {
    group
        .index_of(id)
        .ok_or_else(|| format_err(format!("unknown group element `{id}`")))
}

fn action_from_spec(spec: ActionSpec) -> Result<FiniteGroupoid, IoError> {
    let group = group_from_value(&spec.group)?;
    let n = spec.points.len();
    let mut act = vec![vec![usize::MAX; n]; group.order()];
    for [g, x, y] in &spec.act {
        let (g, x, y) = (
            group_index(&group, g)?,
            index_of(&spec.points, x, "point")?,
            index_of(&spec.points, y, "point")?,
        );
        act[g][x] = y;
    }
    if act.iter().flatten().any(|&v| v == usize::MAX) {
        return Err(format_err("action table is incomplete"));
    }
    Ok(action_groupoid(&group, &spec.points, &act)?)
}

fn bundle_from_spec(spec: GaugeSpec) -> Result<PrincipalBundleData, IoError> {
    let group = group_from_value(&spec.group)?;
    let (total, projection, act) = match (spec.total, spec.projection, spec.act) {
        (None, None, None) => return Ok(PrincipalBundleData::trivial(&spec.base, &group)),
        (Some(t), Some(p), Some(a)) => (t, p, a),
        _ => return Err(format_err("gauge: give all of total, projection, act or none")),
    };
    let mut proj = vec![usize::MAX; total.len()];
    for (e, b) in &projection {
        proj[index_of(&total, e, "total-space point")?] = index_of(&spec.base, b, "base point")?;
    }
    if proj.contains(&usize::MAX) {
        return Err(format_err("gauge: projection is incomplete"));
    }
    let mut action = vec![vec![usize::MAX; group.order()]; total.len()];
    for [e, g, f] in &act {
        action[index_of(&total, e, "total-space point")?][group_index(&group, g)?] =
            index_of(&total, f, "total-space point")?;
    }
    if action.iter().flatten().any(|&v| v == usize::MAX) {
        return Err(format_err("gauge: action table is incomplete"));
    }
    Ok(PrincipalBundleData {
        total,
        base: spec.base,
        projection: proj,
        group,
        action,
    })
}

/// Resolves references relative to a base directory.
pub struct Loader {
    base: PathBuf,
    depth: usize,
}

const MAX_REF_DEPTH: usize = 16;

impl Loader {
    pub fn new(base: impl Into<PathBuf>) -> Self {
        Self {
            base: base.into(),
            depth: 0,
        }
    }

    /// A loader resolving relative to the directory of `file`.
    pub fn for_file(file: &Path) -> Self {
        Self::new(file.parent().map(Path::to_path_buf).unwrap_or_default())
    }

    fn follow(&self, rel: &str) -> Result<(Value, Loader), IoError> {
        if self.depth >= MAX_REF_DEPTH {
            return Err(format_err("reference chain too deep"));
        }
        let path = self.base.join(rel);
        let v = read_json(&path)?;
        let mut next = Loader::for_file(&path);
        next.depth = self.depth + 1;
        Ok((v, next))
    }

    /// A groupoid from any accepted form. Explicit tables are indexed but
    /// not validated; call [`FiniteGroupoid::validate`].
    pub fn groupoid(&self, v: &Value) -> Result<FiniteGroupoid, IoError> {
        if let Value::String(rel) = v {
            let (v, next) = self.follow(rel)?;
            return next.groupoid(&v);
        }
        let obj = v
            .as_object()
            .ok_or_else(|| format_err("groupoid must be an object or a path"))?;
        if let Some(r) = obj.get("ref") {
            let rel = r.as_str().ok_or_else(|| format_err("ref must be a string"))?;
            let (v, next) = self.follow(rel)?;
            return next.groupoid(&v);
        }
        if let Some(n) = obj.get("pair") {
            let n = n
                .as_u64()
                .filter(|&n| n > 0)
                .ok_or_else(|| format_err("pair must be a positive integer"))?;
            return Ok(pair_groupoid(n as usize));
        }
        if let Some(g) = obj.get("group") {
            return Ok(from_group(&group_from_value(g)?));
        }
        if let Some(a) = obj.get("action") {
            return action_from_spec(from_value(a, "action")?);
        }
        if let Some(g) = obj.get("gauge") {
            return Ok(gauge_groupoid(&bundle_from_spec(from_value(g, "gauge")?)?)?);
        }
        if let Some(parts) = obj.get("union") {
            let parts = parts
                .as_array()
                .ok_or_else(|| format_err("union must be a list"))?
                .iter()
                .map(|p| self.groupoid(p))
                .collect::<Result<Vec<_>, _>>()?;
            if parts.is_empty() {
                return Err(format_err("union of nothing"));
            }
            return Ok(disjoint_union(&parts.iter().collect::<Vec<_>>()));
        }
        if let Some(groups) = obj.get("bundle") {
            let groups = groups
                .as_array()
                .ok_or_else(|| format_err("bundle must be a list of groups"))?
                .iter()
                .map(group_from_value)
                .collect::<Result<Vec<_>, _>>()?;
            if groups.is_empty() {
                return Err(format_err("bundle of no groups"));
            }
            return Ok(bundle_of_groups(&groups));
        }
        Ok(FiniteGroupoid::from_tables(&from_value::<GroupoidTables>(v, "groupoid")?)?)
    }

    /// A bibundle file. Returns the bibundle unvalidated.
    pub fn bibundle(&self, v: &Value) -> Result<Bibundle, IoError> {
        let left = v.get("left").ok_or_else(|| format_err("bibundle needs `left`"))?;
        let right = v.get("right").ok_or_else(|| format_err("bibundle needs `right`"))?;
        let left = Arc::new(self.groupoid(left)?);
        // a shared reference yields a single groupoid for both sides
        let right = if v.get("left") == v.get("right") {
            left.clone()
        } else {
            Arc::new(self.groupoid(right)?)
        };
        let tables: BibundleTables = from_value(v, "bibundle")?;
        Ok(Bibundle::from_tables(left, right, &tables)?)
    }
}

pub fn load_groupoid(path: &Path) -> Result<FiniteGroupoid, IoError> {
    Loader::for_file(path).groupoid(&read_json(path)?)
}

pub fn load_bibundle(path: &Path) -> Result<Bibundle, IoError> {
    Loader::for_file(path).bibundle(&read_json(path)?)
}

pub fn load_tss(path: &Path) -> Result<LabeledSurfaceGraph, IoError> {
    from_value(&read_json(path)?, "tss")
}

/// A bibundle document with both groupoids written out as tables.
#[derive(Serialize)]
struct BibundleDocument<'a> {
    left: GroupoidTables,
    right: GroupoidTables,
    #[serde(flatten)]
    tables: &'a BibundleTables,
}

pub fn bibundle_to_json(s: &Bibundle) -> Value {
    let tables = s.to_tables();
    serde_json::to_value(BibundleDocument {
        left: s.left().to_tables(),
        right: s.right().to_tables(),
        tables: &tables,
    })
    .expect("serialisable")
}
