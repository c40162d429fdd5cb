//! `morita`: batch front end over `morita-core`.
//!
//! Every run prints one JSON report on stdout. Exit codes: 0 success,
//! 1 validation failure, 2 precondition failure, 3 numerical singularity,
//! 4 not equivalent.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use morita_core::bibundle::{self, Bibundle, BibundleError};
use morita_core::gauge::{self, AnalyticSpec, GaugeError, GridSpec, SampledField};
use morita_core::groupoid::{FiniteGroupoid, GroupoidMap};
use morita_core::io::{self, FileKind, IoError};
use morita_core::picard::{self, AutomorphismGroup, MethodChoice, PicardError};
use morita_core::report::ValidationReport;
use morita_core::tss::{self, LabeledSurfaceGraph, Orientation, TssError};

const OK: u8 = 0;
const INVALID: u8 = 1;
const PRECONDITION: u8 = 2;
const SINGULAR: u8 = 3;
const NOT_EQUIVALENT: u8 = 4;

#[derive(Parser)]
#[command(name = "morita", version, about = "Morita equivalence, Picard groups, surface graphs and gauge transformations")]
struct Cli {
    /// Suppress the human-readable summary on stderr
    #[arg(long, global = true)]
    quiet: bool,

    /// Seed for randomised search order (all searches are currently exhaustive)
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Report format
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Auto,
    Enumerate,
    Formula,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a groupoid, bibundle, surface graph or field file
    Validate { path: PathBuf },
    /// Orbits of a groupoid
    Orbits { path: PathBuf },
    /// Isotropy groups, one per orbit or at a given object
    Isotropy {
        path: PathBuf,
        #[arg(long)]
        object: Option<String>,
    },
    /// Automorphism group
    Aut { path: PathBuf },
    /// Inner automorphisms
    Inaut { path: PathBuf },
    /// Outer automorphism group
    Out { path: PathBuf },
    /// Bisections and the kernel of the inner-automorphism map
    Bisections { path: PathBuf },
    /// Picard group
    Picard {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
    },
    /// Check the exact sequences relating Aut, Inaut, bisections and Pic
    VerifyExact { path: PathBuf },
    /// Tensor product of two bibundles
    Compose {
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        emit_witness: Option<PathBuf>,
    },
    /// Decide Morita equivalence of two groupoids
    Morita {
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        emit_witness: Option<PathBuf>,
        /// Search every functor instead of matching orbits
        #[arg(long)]
        exhaustive: bool,
    },
    /// Decide equivalence of two surface graphs
    TssIso {
        first: PathBuf,
        second: PathBuf,
        /// Absolute tolerance on periods (and volumes)
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
        /// Also compare volumes (Poisson isomorphism)
        #[arg(long)]
        volume: bool,
        /// Match against the second graph with all edges reversed
        #[arg(long)]
        reverse_orientation: bool,
    },
    /// Picard group ingredients of a surface graph
    TssPicardIngredients { path: PathBuf },
    /// Genus of the surface of a surface graph
    TssGenus { path: PathBuf },
    /// Gauge-transform a bivector field by a 2-form
    GaugeApply {
        pi: PathBuf,
        b: PathBuf,
        /// Sidecar path for the transformed field
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = gauge::DEFAULT_SINGULARITY_THRESHOLD)]
        eps: f64,
    },
    /// Residuals, ranks and invertibility of a bivector field and optional 2-form
    GaugeCheck {
        pi: PathBuf,
        #[arg(long)]
        b: Option<PathBuf>,
        #[arg(long, default_value_t = gauge::DEFAULT_SINGULARITY_THRESHOLD)]
        eps: f64,
        #[arg(long, default_value_t = gauge::DEFAULT_RANK_THRESHOLD)]
        rank_eps: f64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Orbits { .. } => "orbits",
            Command::Isotropy { .. } => "isotropy",
            Command::Aut { .. } => "aut",
            Command::Inaut { .. } => "inaut",
            Command::Out { .. } => "out",
            Command::Bisections { .. } => "bisections",
            Command::Picard { .. } => "picard",
            Command::VerifyExact { .. } => "verify-exact",
            Command::Compose { .. } => "compose",
            Command::Morita { .. } => "morita",
            Command::TssIso { .. } => "tss-iso",
            Command::TssPicardIngredients { .. } => "tss-picard-ingredients",
            Command::TssGenus { .. } => "tss-genus",
            Command::GaugeApply { .. } => "gauge-apply",
            Command::GaugeCheck { .. } => "gauge-check",
        }
    }

    fn inputs(&self) -> Vec<&Path> {
        match self {
            Command::Validate { path }
            | Command::Orbits { path }
            | Command::Isotropy { path, .. }
            | Command::Aut { path }
            | Command::Inaut { path }
            | Command::Out { path }
            | Command::Bisections { path }
            | Command::Picard { path, .. }
            | Command::VerifyExact { path }
            | Command::TssPicardIngredients { path }
            | Command::TssGenus { path } => vec![path],
            Command::Compose { first, second, .. }
            | Command::Morita { first, second, .. }
            | Command::TssIso { first, second, .. } => vec![first, second],
            Command::GaugeApply { pi, b, .. } => vec![pi, b],
            Command::GaugeCheck { pi, b, .. } => std::iter::once(pi.as_path()).chain(b.as_deref()).collect(),
        }
    }
}

struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
    detail: Value,
}

impl Failure {
    fn new(code: u8, kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            kind,
            message: message.into(),
            detail: Value::Null,
        }
    }

    fn with(mut self, detail: Value) -> Self {
        self.detail = detail;
        self
    }
}

struct Outcome {
    code: u8,
    result: Value,
    summary: String,
}

impl Outcome {
    fn ok(result: Value, summary: impl Into<String>) -> Self {
        Self {
            code: OK,
            result,
            summary: summary.into(),
        }
    }
}

type Run = Result<Outcome, Failure>;

fn status(code: u8) -> &'static str {
    match code {
        OK => "ok",
        INVALID => "invalid",
        PRECONDITION => "precondition-failed",
        SINGULAR => "singular",
        NOT_EQUIVALENT => "not-equivalent",
        _ => "error",
    }
}

fn io_failure(e: IoError) -> Failure {
    match e {
        IoError::Read { .. } | IoError::Json { .. } => Failure::new(PRECONDITION, "unreadable-input", e.to_string()),
        _ => Failure::new(INVALID, "malformed-input", e.to_string()),
    }
}

fn tss_failure(e: TssError) -> Failure {
    match e {
        TssError::Invalid(report) => {
            Failure::new(INVALID, "invalid-graph", "surface graph fails validation").with(json!(report.violations))
        }
        TssError::MissingVolume(_) => Failure::new(PRECONDITION, "missing-volume", e.to_string()),
        _ => Failure::new(INVALID, "invalid-graph", e.to_string()),
    }
}

fn gauge_failure(e: GaugeError) -> Failure {
    match &e {
        GaugeError::SingularEndomorphism { point, abs_det } => {
            Failure::new(SINGULAR, "singular-endomorphism", e.to_string())
                .with(json!({"worstPoint": point, "absDet": abs_det}))
        }
        _ => Failure::new(PRECONDITION, "field-precondition", e.to_string()),
    }
}

fn violations_failure(what: &str, report: &ValidationReport) -> Failure {
    Failure::new(INVALID, "validation", format!("{what} fails validation")).with(json!(report.violations))
}

fn load_groupoid(path: &Path) -> Result<Arc<FiniteGroupoid>, Failure> {
    let g = io::load_groupoid(path).map_err(io_failure)?;
    let report = g.validate();
    if !report.is_ok() {
        return Err(violations_failure("groupoid", &report));
    }
    Ok(Arc::new(g))
}

fn load_bibundle(path: &Path) -> Result<Bibundle, Failure> {
    let s = io::load_bibundle(path).map_err(io_failure)?;
    for (side, g) in [("left groupoid", s.left()), ("right groupoid", s.right())] {
        let report = g.validate();
        if !report.is_ok() {
            return Err(violations_failure(side, &report));
        }
    }
    let report = s.validate();
    if !report.is_ok() {
        return Err(violations_failure("bibundle", &report));
    }
    Ok(s)
}

fn load_tss(path: &Path) -> Result<LabeledSurfaceGraph, Failure> {
    io::load_tss(path).map_err(io_failure)
}

enum RawField {
    Sampled(SampledField),
    Analytic(AnalyticSpec),
}

fn load_raw_field(path: &Path) -> Result<RawField, Failure> {
    let v = io::read_json(path).map_err(io_failure)?;
    match io::detect_kind(&v) {
        FileKind::FieldSidecar => gauge::read_field(path).map(RawField::Sampled).map_err(gauge_failure),
        FileKind::AnalyticField => serde_json::from_value(v)
            .map(RawField::Analytic)
            .map_err(|e| Failure::new(INVALID, "malformed-input", format!("{}: {e}", path.display()))),
        _ => Err(Failure::new(
            PRECONDITION,
            "wrong-file-kind",
            format!("{} is not a field file", path.display()),
        )),
    }
}

fn resolve_field(raw: RawField, fallback: Option<&GridSpec>) -> Result<SampledField, Failure> {
    match raw {
        RawField::Sampled(f) => Ok(f),
        RawField::Analytic(spec) => {
            let grid = spec.grid.as_ref().or(fallback).ok_or_else(|| {
                Failure::new(PRECONDITION, "missing-grid", "analytic field spec has no grid")
            })?;
            spec.sample(grid).map_err(gauge_failure)
        }
    }
}

fn raw_grid(raw: &RawField) -> Option<GridSpec> {
    match raw {
        RawField::Sampled(f) => Some(f.grid.clone()),
        RawField::Analytic(spec) => spec.grid.clone(),
    }
}

/// Loads two fields, letting an analytic spec without a grid borrow the
/// other operand's grid.
fn load_field_pair(a: &Path, b: &Path) -> Result<(SampledField, SampledField), Failure> {
    let (ra, rb) = (load_raw_field(a)?, load_raw_field(b)?);
    let (ga, gb) = (raw_grid(&ra), raw_grid(&rb));
    Ok((resolve_field(ra, gb.as_ref())?, resolve_field(rb, ga.as_ref())?))
}

fn map_json(dom: &FiniteGroupoid, cod: &FiniteGroupoid, m: &GroupoidMap) -> Value {
    let objects: BTreeMap<&str, &str> = m
        .objects
        .iter()
        .enumerate()
        .map(|(x, &y)| (dom.object_name(x), cod.object_name(y)))
        .collect();
    let arrows: BTreeMap<&str, &str> = m
        .arrows
        .iter()
        .enumerate()
        .map(|(a, &b)| (dom.arrow_name(a), cod.arrow_name(b)))
        .collect();
    json!({"objects": objects, "arrows": arrows})
}

fn orbit_names(g: &FiniteGroupoid) -> Vec<Vec<&str>> {
    g.orbits()
        .iter()
        .map(|o| o.iter().map(|&x| g.object_name(x)).collect())
        .collect()
}

fn write_json(path: &Path, v: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(v).expect("serialisable") + "\n";
    fs::write(path, text).map_err(|e| Failure::new(PRECONDITION, "write-failed", format!("{}: {e}", path.display())))
}

fn cmd_validate(path: &Path) -> Run {
    let v = io::read_json(path).map_err(io_failure)?;
    let kind = io::detect_kind(&v);
    let loader = io::Loader::for_file(path);
    let (result, ok, what) = match kind {
        FileKind::Groupoid => {
            let g = loader.groupoid(&v).map_err(io_failure)?;
            let report = g.validate();
            let ok = report.is_ok();
            (
                json!({"kind": "groupoid", "objects": g.object_count(), "arrows": g.arrow_count(), "violations": report.violations}),
                ok,
                "groupoid",
            )
        }
        FileKind::Bibundle => {
            let s = loader.bibundle(&v).map_err(io_failure)?;
            let mut violations = Vec::new();
            for (side, g) in [("left", s.left()), ("right", s.right())] {
                for mut viol in g.validate().violations {
                    viol.axiom = format!("{side} groupoid: {}", viol.axiom);
                    violations.push(viol);
                }
            }
            violations.extend(s.validate().violations);
            let ok = violations.is_empty();
            let principality = ok.then(|| s.principality());
            (
                json!({"kind": "bibundle", "carrier": s.len(), "violations": violations, "principality": principality}),
                ok,
                "bibundle",
            )
        }
        FileKind::Tss => {
            let g: LabeledSurfaceGraph = serde_json::from_value(v)
                .map_err(|e| Failure::new(INVALID, "malformed-input", e.to_string()))?;
            let report = tss::validate_tss(&g);
            let ok = report.is_ok();
            let genus = if ok { tss::surface_genus(&g).ok() } else { None };
            (
                json!({"kind": "tss", "vertices": g.vertices.len(), "edges": g.edges.len(), "genus": genus, "violations": report.violations}),
                ok,
                "surface graph",
            )
        }
        FileKind::FieldSidecar | FileKind::AnalyticField => {
            let raw = load_raw_field(path).map_err(|f| Failure { code: INVALID, ..f })?;
            let grid = raw_grid(&raw);
            let checked = match (&raw, &grid) {
                (RawField::Sampled(f), _) => f.check(),
                (RawField::Analytic(spec), Some(g)) => spec.sample(g).map(|_| ()),
                (RawField::Analytic(_), None) => Ok(()),
            };
            let violations: Vec<Value> = checked
                .err()
                .map(|e| json!({"axiom": "field", "witness": [e.to_string()]}))
                .into_iter()
                .collect();
            let ok = violations.is_empty();
            (
                json!({"kind": "field", "grid": grid, "violations": violations}),
                ok,
                "field",
            )
        }
    };
    Ok(Outcome {
        code: if ok { OK } else { INVALID },
        summary: if ok { format!("valid {what}") } else { format!("invalid {what}") },
        result,
    })
}

fn cmd_orbits(path: &Path) -> Run {
    let g = load_groupoid(path)?;
    let orbits = orbit_names(&g);
    Ok(Outcome::ok(
        json!({"orbits": orbits, "transitive": g.is_transitive(), "groupBundle": g.is_group_bundle()}),
        format!("{} orbit(s)", orbits.len()),
    ))
}

fn cmd_isotropy(path: &Path, object: Option<&str>) -> Run {
    let g = load_groupoid(path)?;
    let objects: Vec<usize> = match object {
        Some(id) => vec![g
            .object_index(id)
            .ok_or_else(|| Failure::new(PRECONDITION, "unknown-object", format!("no object `{id}`")))?],
        None => g.orbits().iter().map(|o| o[0]).collect(),
    };
    let groups: Vec<Value> = objects
        .iter()
        .map(|&x| {
            let iso = g.isotropy(x);
            json!({"object": g.object_name(x), "order": iso.order(), "abelian": iso.is_abelian(), "group": iso.to_wire()})
        })
        .collect();
    Ok(Outcome::ok(json!({"isotropy": groups}), format!("{} isotropy group(s)", groups.len())))
}

fn cmd_aut(path: &Path) -> Run {
    let g = load_groupoid(path)?;
    let aut = AutomorphismGroup::new(&g);
    let maps: Vec<Value> = aut
        .maps
        .iter()
        .enumerate()
        .map(|(i, m)| json!({"name": aut.group.name(i), "map": map_json(&g, &g, m)}))
        .collect();
    Ok(Outcome::ok(
        json!({"order": aut.group.order(), "group": aut.group.to_wire(), "automorphisms": maps}),
        format!("|Aut| = {}", aut.group.order()),
    ))
}

fn cmd_inaut(path: &Path) -> Run {
    let g = load_groupoid(path)?;
    let aut = AutomorphismGroup::new(&g);
    let inner = picard::inaut(&g, &aut);
    let names: Vec<&str> = inner.iter().map(|&a| aut.group.name(a)).collect();
    Ok(Outcome::ok(
        json!({"order": inner.len(), "autOrder": aut.group.order(), "elements": names, "normal": aut.group.is_normal_subgroup(&inner)}),
        format!("|Inaut| = {}", inner.len()),
    ))
}

fn cmd_out(path: &Path) -> Run {
    let g = load_groupoid(path)?;
    let aut = AutomorphismGroup::new(&g);
    let (out, reps) = picard::outaut(&g, &aut).map_err(|e| Failure::new(INVALID, "group", e.to_string()))?;
    let reps: Vec<&str> = reps.iter().map(|&a| aut.group.name(a)).collect();
    Ok(Outcome::ok(
        json!({"order": out.order(), "group": out.to_wire(), "representatives": reps}),
        format!("|Out| = {}", out.order()),
    ))
}

fn cmd_bisections(path: &Path) -> Run {
    let g = load_groupoid(path)?;
    let bis = picard::bisections(&g);
    let ciso = picard::ciso_bisections(&g, &bis);
    let central = picard::central_valued_bisections(&g, &bis);
    let names: Vec<String> = bis.iter().map(|b| b.name(&g)).collect();
    let ciso_names: Vec<&str> = ciso.iter().map(|&i| names[i].as_str()).collect();
    Ok(Outcome::ok(
        json!({"count": bis.len(), "bisections": names, "ciso": ciso_names, "centralValuedCount": central.len()}),
        format!("{} bisection(s), kernel of order {}", bis.len(), ciso.len()),
    ))
}

fn cmd_picard(path: &Path, method: Method) -> Run {
    let g = load_groupoid(path)?;
    let choice = match method {
        Method::Auto => MethodChoice::Auto,
        Method::Enumerate => MethodChoice::Enumerate,
        Method::Formula => MethodChoice::Formula,
    };
    let pic = picard::picard_group(&g, choice).map_err(|e| match e {
        PicardError::FormulaInapplicable => Failure::new(PRECONDITION, "FormulaInapplicable", e.to_string()),
        _ => Failure::new(INVALID, "picard", e.to_string()),
    })?;
    let statics: Option<Vec<&str>> = (!pic.representatives.is_empty())
        .then(|| picard::static_picard(&pic).iter().map(|&x| pic.group.name(x)).collect());
    let orbit_maps: Option<Vec<Option<Vec<usize>>>> = (!pic.representatives.is_empty())
        .then(|| (0..pic.order()).map(|x| picard::center_map(&pic, x)).collect());
    Ok(Outcome::ok(
        json!({
            "picard": pic.to_wire(),
            "order": pic.order(),
            "crossChecked": pic.cross_checked,
            "static": statics,
            "orbitMaps": orbit_maps,
        }),
        format!("|Pic| = {}", pic.order()),
    ))
}

fn cmd_verify_exact(path: &Path) -> Run {
    let g = load_groupoid(path)?;
    let report = picard::verify_exact_sequences(&g);
    let passed = report.all_passed();
    Ok(Outcome {
        code: if passed { OK } else { INVALID },
        summary: format!(
            "{} of {} checks passed",
            report.checks.iter().filter(|c| c.passed).count(),
            report.checks.len()
        ),
        result: json!(report),
    })
}

fn cmd_compose(first: &Path, second: &Path, emit: Option<&Path>) -> Run {
    let (s, t) = (load_bibundle(first)?, load_bibundle(second)?);
    // files load independent copies; identify the middle groupoid by content
    let t = if s.right() == t.left() && !Arc::ptr_eq(s.right(), t.left()) {
        rebase_left(&t, s.right().clone())
    } else {
        t
    };
    let product = bibundle::tensor(&s, &t).map_err(|e| match e {
        BibundleError::MiddleMismatch | BibundleError::NotLeftPrincipal(_) => {
            Failure::new(PRECONDITION, "tensor-precondition", e.to_string())
        }
        _ => Failure::new(INVALID, "tensor", e.to_string()),
    })?;
    let doc = io::bibundle_to_json(&product);
    if let Some(path) = emit {
        write_json(path, &doc)?;
    }
    let principality = product.principality();
    Ok(Outcome::ok(
        json!({"carrier": product.len(), "principality": principality, "bibundle": doc}),
        format!("tensor product with {} point(s)", product.len()),
    ))
}

fn rebase_left(t: &Bibundle, left: Arc<FiniteGroupoid>) -> Bibundle {
    Bibundle::from_tables(left, t.right().clone(), &t.to_tables()).expect("same groupoid content")
}

fn cmd_morita(first: &Path, second: &Path, emit: Option<&Path>, exhaustive: bool) -> Run {
    let (g1, g2) = (load_groupoid(first)?, load_groupoid(second)?);
    let witness = if exhaustive {
        bibundle::morita_search_exhaustive(&g1, &g2)
    } else {
        bibundle::morita_equivalent(&g1, &g2)
    };
    let invariants = |g: &FiniteGroupoid| {
        let mut orders: Vec<usize> = g.orbits().iter().map(|o| g.isotropy(o[0]).order()).collect();
        orders.sort_unstable();
        json!({"orbits": g.orbits().len(), "isotropyOrders": orders})
    };
    let mut result = json!({
        "equivalent": witness.is_some(),
        "method": if exhaustive { "exhaustive" } else { "orbit-matching" },
        "first": invariants(&g1),
        "second": invariants(&g2),
    });
    let Some(w) = witness else {
        return Ok(Outcome {
            code: NOT_EQUIVALENT,
            result,
            summary: "not Morita equivalent".into(),
        });
    };
    result["witnessCarrier"] = json!(w.len());
    result["witnessBiprincipal"] = json!(w.is_biprincipal());
    if let Some(path) = emit {
        write_json(path, &io::bibundle_to_json(&w))?;
        result["witnessPath"] = json!(path.display().to_string());
    }
    Ok(Outcome::ok(result, format!("Morita equivalent, witness with {} point(s)", w.len())))
}

fn tss_differences(a: &LabeledSurfaceGraph, b: &LabeledSurfaceGraph, tol: f64, volume: bool) -> Vec<Value> {
    let mut out = Vec::new();
    let mut diff = |name: &str, x: Value, y: Value| {
        if x != y {
            out.push(json!({"invariant": name, "first": x, "second": y}));
        }
    };
    diff("vertexCount", json!(a.vertices.len()), json!(b.vertices.len()));
    diff("edgeCount", json!(a.edges.len()), json!(b.edges.len()));
    let genera = |g: &LabeledSurfaceGraph| {
        let mut v: Vec<i64> = g.vertices.iter().map(|v| v.genus).collect();
        v.sort_unstable();
        v
    };
    diff("leafGenera", json!(genera(a)), json!(genera(b)));
    diff("surfaceGenus", json!(tss::surface_genus(a).ok()), json!(tss::surface_genus(b).ok()));
    let periods = |g: &LabeledSurfaceGraph| {
        let mut v: Vec<f64> = g.edges.iter().map(|e| e.period).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let (pa, pb) = (periods(a), periods(b));
    if pa.len() != pb.len() || pa.iter().zip(&pb).any(|(x, y)| (x - y).abs() > tol) {
        out.push(json!({"invariant": "modularPeriods", "first": pa, "second": pb}));
    }
    if volume {
        if let (Some(x), Some(y)) = (a.volume, b.volume) {
            if (x - y).abs() > tol {
                out.push(json!({"invariant": "volume", "first": x, "second": y}));
            }
        }
    }
    out
}

fn cmd_tss_iso(first: &Path, second: &Path, tol: f64, volume: bool, reverse: bool) -> Run {
    let (a, b) = (load_tss(first)?, load_tss(second)?);
    if tol.is_nan() || tol < 0.0 {
        return Err(Failure::new(PRECONDITION, "bad-tolerance", "tolerance must be non-negative"));
    }
    let orientation = if reverse { Orientation::Reversing } else { Orientation::Preserving };
    let iso = if volume {
        let iso = tss::poisson_isomorphic_tss(&a, &b, tol).map_err(tss_failure)?;
        // reversed matching only applies to the graph part
        if reverse {
            iso.and(tss::find_isomorphism(&a, &b, tol, orientation).map_err(tss_failure)?)
        } else {
            iso
        }
    } else {
        tss::find_isomorphism(&a, &b, tol, orientation).map_err(tss_failure)?
    };
    let mode = if volume { "poisson" } else { "morita" };
    let mut result = json!({
        "equivalent": iso.is_some(),
        "mode": mode,
        "orientation": if reverse { "reversed" } else { "preserved" },
        "tolerance": tol,
    });
    match iso {
        Some(iso) => {
            let vertices: BTreeMap<&str, &str> = iso
                .vertices
                .iter()
                .enumerate()
                .map(|(v, &w)| (a.vertices[v].id.as_str(), b.vertices[w].id.as_str()))
                .collect();
            result["isomorphism"] = json!({"vertices": vertices, "edges": iso.edges});
            Ok(Outcome::ok(result, format!("equivalent ({mode})")))
        }
        None => {
            let diffs = tss_differences(&a, &b, tol, volume);
            let named: Vec<String> = diffs
                .iter()
                .filter_map(|d| d["invariant"].as_str().map(str::to_string))
                .collect();
            result["differences"] = json!(diffs);
            Ok(Outcome {
                code: NOT_EQUIVALENT,
                result,
                summary: if named.is_empty() {
                    "not equivalent (graph structure differs)".into()
                } else {
                    format!("not equivalent: {} differ", named.join(", "))
                },
            })
        }
    }
}

fn cmd_tss_ingredients(path: &Path) -> Run {
    let g = load_tss(path)?;
    let p = tss::picard_ingredients(&g).map_err(tss_failure)?;
    Ok(Outcome::ok(
        json!(p.to_wire()),
        format!("|graph Aut| = {}, torus rank {}", p.graph_aut.order(), p.torus_rank),
    ))
}

fn cmd_tss_genus(path: &Path) -> Run {
    let g = load_tss(path)?;
    let report = tss::validate_tss(&g);
    if !report.is_ok() {
        return Err(tss_failure(TssError::Invalid(report)));
    }
    let chi = tss::euler_characteristic(&g).map_err(tss_failure)?;
    let genus = tss::surface_genus(&g).map_err(tss_failure)?;
    Ok(Outcome::ok(
        json!({"eulerCharacteristic": chi, "genus": genus}),
        format!("genus {genus}"),
    ))
}

fn data_digest(f: &SampledField) -> String {
    let mut h = Sha256::new();
    for v in &f.data {
        h.update(v.to_le_bytes());
    }
    hex::encode(h.finalize())
}

fn cmd_gauge_apply(pi: &Path, b: &Path, out: Option<&Path>, eps: f64) -> Run {
    let (pi, b) = load_field_pair(pi, b)?;
    let report = gauge::invertibility_check(&pi, &b, eps).map_err(gauge_failure)?;
    if !report.ok {
        return Err(Failure::new(SINGULAR, "singular-endomorphism", "I + Bπ is singular").with(json!(report)));
    }
    let output = gauge::apply_gauge(&pi, &b, eps).map_err(gauge_failure)?;
    if let Some(path) = out {
        gauge::write_field(path, &output.field).map_err(gauge_failure)?;
    }
    Ok(Outcome::ok(
        json!({
            "invertibility": report,
            "asymmetry": output.asymmetry,
            "points": output.field.grid.point_count(),
            "outputDigest": data_digest(&output.field),
            "output": out.map(|p| p.display().to_string()),
        }),
        format!("gauge transform applied, min |det| = {:e}", report.min_abs_det),
    ))
}

fn rank_histogram(ranks: &[usize]) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for &r in ranks {
        *h.entry(r).or_insert(0) += 1;
    }
    h
}

fn residual_json(r: Result<gauge::Residual, GaugeError>) -> Result<Value, Failure> {
    match r {
        Ok(r) => Ok(json!(r)),
        Err(e @ GaugeError::GridTooSmall { .. }) => Ok(json!({"skipped": e.to_string()})),
        Err(e) => Err(gauge_failure(e)),
    }
}

/// Margin above which ranks must agree before and after a gauge step.
const RANK_MARGIN: f64 = 1e-6;

fn cmd_gauge_check(pi_path: &Path, b_path: Option<&Path>, eps: f64, rank_eps: f64) -> Run {
    let (pi, b) = match b_path {
        Some(b) => {
            let (pi, b) = load_field_pair(pi_path, b)?;
            (pi, Some(b))
        }
        None => (resolve_field(load_raw_field(pi_path)?, None)?, None),
    };
    if pi.kind != gauge::FieldKind::Bivector {
        return Err(Failure::new(PRECONDITION, "field-precondition", "first field must be a bivector"));
    }
    let ranks = gauge::rank_map(&pi, rank_eps);
    let mut result = json!({
        "jacobi": residual_json(gauge::jacobi_residual(&pi))?,
        "ranks": rank_histogram(&ranks),
    });
    let mut summary = String::from("bivector checked");
    if let Some(b) = b {
        result["closedness"] = residual_json(gauge::closedness_residual(&b))?;
        let report = gauge::invertibility_check(&pi, &b, eps).map_err(gauge_failure)?;
        result["invertibility"] = json!(report);
        if !report.ok {
            return Err(Failure::new(SINGULAR, "singular-endomorphism", "I + Bπ is singular").with(result));
        }
        let tau = gauge::apply_gauge(&pi, &b, eps).map_err(gauge_failure)?;
        let after = gauge::rank_map(&tau.field, rank_eps);
        let margins = gauge::margins(&pi, &b).map_err(gauge_failure)?;
        let mismatches = gauge::rank_mismatches(&ranks, &after, |p| margins[p] > RANK_MARGIN);
        let (inverse_dev, inverse_points) = gauge::inverse_law_deviation(&pi, &b, eps).map_err(gauge_failure)?;
        result["gauged"] = json!({
            "jacobi": residual_json(gauge::jacobi_residual(&tau.field))?,
            "asymmetry": tau.asymmetry,
            "rankMismatches": mismatches.len(),
            "inverseLawDeviation": inverse_dev,
            "inverseLawPoints": inverse_points,
        });
        summary = format!(
            "min |det| = {:e}, {} rank mismatch(es)",
            report.min_abs_det,
            mismatches.len()
        );
    }
    Ok(Outcome::ok(result, summary))
}

fn run(cmd: &Command) -> Run {
    match cmd {
        Command::Validate { path } => cmd_validate(path),
        Command::Orbits { path } => cmd_orbits(path),
        Command::Isotropy { path, object } => cmd_isotropy(path, object.as_deref()),
        Command::Aut { path } => cmd_aut(path),
        Command::Inaut { path } => cmd_inaut(path),
        Command::Out { path } => cmd_out(path),
        Command::Bisections { path } => cmd_bisections(path),
        Command::Picard { path, method } => cmd_picard(path, *method),
        Command::VerifyExact { path } => cmd_verify_exact(path),
        Command::Compose {
            first,
            second,
            emit_witness,
        } => cmd_compose(first, second, emit_witness.as_deref()),
        Command::Morita {
            first,
            second,
            emit_witness,
            exhaustive,
        } => cmd_morita(first, second, emit_witness.as_deref(), *exhaustive),
        Command::TssIso {
            first,
            second,
            tol,
            volume,
            reverse_orientation,
        } => cmd_tss_iso(first, second, *tol, *volume, *reverse_orientation),
        Command::TssPicardIngredients { path } => cmd_tss_ingredients(path),
        Command::TssGenus { path } => cmd_tss_genus(path),
        Command::GaugeApply { pi, b, out, eps } => cmd_gauge_apply(pi, b, out.as_deref(), *eps),
        Command::GaugeCheck { pi, b, eps, rank_eps } => cmd_gauge_check(pi, b.as_deref(), *eps, *rank_eps),
    }
}

fn digest(path: &Path) -> Value {
    match fs::read(path) {
        Ok(bytes) => json!({"path": path.display().to_string(), "sha256": hex::encode(Sha256::digest(&bytes))}),
        Err(_) => json!({"path": path.display().to_string(), "sha256": null}),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Format::Json = cli.format;
    let start = Instant::now();
    let outcome = run(&cli.command);
    let elapsed = start.elapsed();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut report = json!({
        "tool": "morita",
        "version": env!("CARGO_PKG_VERSION"),
        "command": {"name": cli.command.name(), "args": args},
        "seed": cli.seed,
        "inputs": cli.command.inputs().into_iter().map(digest).collect::<Vec<_>>(),
    });
    let (code, summary) = match outcome {
        Ok(o) => {
            report["result"] = o.result;
            (o.code, o.summary)
        }
        Err(f) => {
            report["error"] = json!({"kind": f.kind, "message": f.message, "detail": f.detail});
            (f.code, f.message)
        }
    };
    report["status"] = json!(status(code));
    report["exitCode"] = json!(code);
    // a closed pipe must not turn a finished run into a panic
    let _ = writeln!(
        std::io::stdout().lock(),
        "{}",
        serde_json::to_string_pretty(&report).expect("serialisable")
    );
    if !cli.quiet {
        eprintln!("{}: {summary} [{:.3}s]", cli.command.name(), elapsed.as_secs_f64());
    }
    ExitCode::from(code)
}
