//! Gauge transformations of sampled bivector fields by closed 2-forms.
//!
//! With `π̃` and `B̃` the matrices of a bivector and a 2-form at a point,
//! the gauge transform is `τ_B(π)~ = π̃ (I + B̃π̃)⁻¹`, defined where
//! `I + B̃π̃` is invertible. Derivatives use second-order differences:
//! central in the interior, one-sided at the boundary.

mod field;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use field::{
    component_count, component_index, read_field, write_field, AnalyticEntry, AnalyticSpec,
    FieldHeader, FieldKind, GridSpec, SampledField,
};

/// Default `εsing` on `|det(I + B̃π̃)|`.
pub const DEFAULT_SINGULARITY_THRESHOLD: f64 = 1e-10;
/// Default `εrank` on singular values.
pub const DEFAULT_RANK_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaugeError {
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("expected a {expected:?} field, found {found:?}")]
    KindMismatch { expected: FieldKind, found: FieldKind },
    #[error("bad grid: {0}")]
    BadGrid(String),
    #[error("bad analytic spec: {0}")]
    BadSpec(String),
    #[error("grid needs at least 3 points along axis {axis} for differencing")]
    GridTooSmall { axis: usize },
    #[error("I + Bπ is singular at grid point {point:?} (|det| = {abs_det:e})")]
    SingularEndomorphism { point: Vec<usize>, abs_det: f64 },
    #[error("io: {0}")]
    Io(String),
}

fn expect_kind(f: &SampledField, kind: FieldKind) -> Result<(), GaugeError> {
    f.check()?;
    if f.kind != kind {
        return Err(GaugeError::KindMismatch {
            expected: kind,
            found: f.kind,
        });
    }
    Ok(())
}

fn same_grid(a: &SampledField, b: &SampledField) -> Result<(), GaugeError> {
    if a.grid != b.grid {
        return Err(GaugeError::GridMismatch);
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvertibilityReport {
    pub ok: bool,
    #[serde(rename = "minAbsDet")]
    pub min_abs_det: f64,
    #[serde(rename = "worstPoint")]
    pub worst_point: Vec<usize>,
    #[serde(rename = "worstCoords")]
    pub worst_coords: Vec<f64>,
}

fn endomorphism(pi: &SampledField, b: &SampledField, p: usize) -> DMatrix<f64> {
    let d = pi.grid.dimension;
    DMatrix::identity(d, d) + b.matrix(p) * pi.matrix(p)
}

/// Per-point `det(I + B̃π̃)`; ok iff `|det| > eps` everywhere.
pub fn invertibility_check(
    pi: &SampledField,
    b: &SampledField,
    eps: f64,
) -> Result<InvertibilityReport, GaugeError> {
    expect_kind(pi, FieldKind::Bivector)?;
    expect_kind(b, FieldKind::TwoForm)?;
    same_grid(pi, b)?;
    let mut worst = (f64::INFINITY, 0);
    for p in 0..pi.grid.point_count() {
        let det = endomorphism(pi, b, p).determinant().abs();
        // NaN counts as worst
        if det.is_nan() || det < worst.0 {
            worst = (det, p);
        }
    }
    Ok(InvertibilityReport {
        ok: worst.0 > eps,
        min_abs_det: worst.0,
        worst_point: pi.grid.multi_index(worst.1),
        worst_coords: pi.grid.coords(worst.1),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaugeOutput {
    pub field: SampledField,
    /// Largest symmetric part removed before storing.
    pub asymmetry: f64,
    pub min_abs_det: f64,
}

/// `τ_B(π)` pointwise.
pub fn apply_gauge(pi: &SampledField, b: &SampledField, eps: f64) -> Result<GaugeOutput, GaugeError> {
    let report = invertibility_check(pi, b, eps)?;
    if !report.ok {
        return Err(GaugeError::SingularEndomorphism {
            point: report.worst_point,
            abs_det: report.min_abs_det,
        });
    }
    let mut out = SampledField::zeros(pi.grid.clone(), FieldKind::Bivector);
    let mut asymmetry: f64 = 0.0;
    for p in 0..pi.grid.point_count() {
        let inv = endomorphism(pi, b, p)
            .try_inverse()
            .ok_or_else(|| GaugeError::SingularEndomorphism {
                point: pi.grid.multi_index(p),
                abs_det: 0.0,
            })?;
        let tau = pi.matrix(p) * inv;
        asymmetry = asymmetry.max(out.set_matrix(p, &tau));
    }
    Ok(GaugeOutput {
        field: out,
        asymmetry,
        min_abs_det: report.min_abs_det,
    })
}

/// Max deviation of `τ_{B'}(τ_B(π))` from `τ_{B+B'}(π)`.
pub fn verify_composition(
    pi: &SampledField,
    b: &SampledField,
    b2: &SampledField,
    eps: f64,
) -> Result<f64, GaugeError> {
    let step = apply_gauge(&apply_gauge(pi, b, eps)?.field, b2, eps)?.field;
    let direct = apply_gauge(pi, &b.added(b2)?, eps)?.field;
    Ok(max_deviation(&step, &direct))
}

/// Max over points where `π̃` is invertible (`|det π̃| > eps`) of
/// `‖τ̃⁻¹ − (π̃⁻¹ + B̃)‖∞`, together with the number of such points.
pub fn inverse_law_deviation(
    pi: &SampledField,
    b: &SampledField,
    eps: f64,
) -> Result<(f64, usize), GaugeError> {
    let tau = apply_gauge(pi, b, eps)?.field;
    let mut worst: f64 = 0.0;
    let mut used = 0;
    for p in 0..pi.grid.point_count() {
        let m = pi.matrix(p);
        if m.determinant().abs() <= eps {
            continue;
        }
        let (Some(pinv), Some(tinv)) = (m.try_inverse(), tau.matrix(p).try_inverse()) else {
            continue;
        };
        let expected = pinv + b.matrix(p);
        worst = worst.max((tinv - expected).abs().max());
        used += 1;
    }
    Ok((worst, used))
}

pub fn max_deviation(a: &SampledField, b: &SampledField) -> f64 {
    a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Numerical rank per point: singular values above `eps`.
pub fn rank_map(pi: &SampledField, eps: f64) -> Vec<usize> {
    (0..pi.grid.point_count())
        .map(|p| {
            pi.matrix(p)
                .singular_values()
                .iter()
                .filter(|&&s| s > eps)
                .count()
        })
        .collect()
}

/// Points where the ranks of `a` and `b` differ, restricted to points
/// accepted by `mask`.
pub fn rank_mismatches(a: &[usize], b: &[usize], mask: impl Fn(usize) -> bool) -> Vec<usize> {
    (0..a.len()).filter(|&p| mask(p) && a[p] != b[p]).collect()
}

/// Per-point `|det(I + B̃π̃)|`.
pub fn margins(pi: &SampledField, b: &SampledField) -> Result<Vec<f64>, GaugeError> {
    same_grid(pi, b)?;
    Ok((0..pi.grid.point_count())
        .map(|p| endomorphism(pi, b, p).determinant().abs())
        .collect())
}

/// Largest residual and where it occurs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub max: f64,
    pub point: Vec<usize>,
    pub triple: [usize; 3],
}

/// Second-order derivative of entry `(i, j)` along `axis` at `p`.
fn derivative(f: &SampledField, p: usize, i: usize, j: usize, axis: usize, stride: usize) -> f64 {
    let n = f.grid.shape[axis];
    let k = f.grid.multi_index(p)[axis];
    let h = f.grid.spacing;
    let at = |offset: isize| f.get((p as isize + offset * stride as isize) as usize, i, j);
    if k == 0 {
        (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
    } else if k == n - 1 {
        (3.0 * at(0) - 4.0 * at(-1) + at(-2)) / (2.0 * h)
    } else {
        (at(1) - at(-1)) / (2.0 * h)
    }
}

fn check_differencing(f: &SampledField) -> Result<(), GaugeError> {
    f.check()?;
    if f.grid.dimension < 3 {
        return Ok(());
    }
    match f.grid.shape.iter().position(|&n| n < 3) {
        Some(axis) => Err(GaugeError::GridTooSmall { axis }),
        None => Ok(()),
    }
}

fn max_over_triples(
    f: &SampledField,
    cyclic: impl Fn(usize, usize, usize, usize) -> f64,
) -> Residual {
    let d = f.grid.dimension;
    let mut best = Residual {
        max: 0.0,
        point: vec![0; d],
        triple: [0, 0, 0],
    };
    let mut best_p = 0;
    for p in 0..f.grid.point_count() {
        for i in 0..d {
            for j in i + 1..d {
                for k in j + 1..d {
                    let r = cyclic(p, i, j, k).abs();
                    if r > best.max || r.is_nan() {
                        best.max = r;
                        best.triple = [i, j, k];
                        best_p = p;
                    }
                }
            }
        }
    }
    best.point = f.grid.multi_index(best_p);
    best
}

/// `max |∂_i B_jk + ∂_j B_ki + ∂_k B_ij|` over points and triples.
pub fn closedness_residual(b: &SampledField) -> Result<Residual, GaugeError> {
    expect_kind(b, FieldKind::TwoForm)?;
    check_differencing(b)?;
    let strides = b.grid.strides();
    let dv = |p, i, j, a: usize| derivative(b, p, i, j, a, strides[a]);
    Ok(max_over_triples(b, |p, i, j, k| {
        dv(p, j, k, i) + dv(p, k, i, j) + dv(p, i, j, k)
    }))
}

/// `max |π^{il}∂_l π^{jk} + π^{jl}∂_l π^{ki} + π^{kl}∂_l π^{ij}|` over
/// points and triples.
pub fn jacobi_residual(pi: &SampledField) -> Result<Residual, GaugeError> {
    expect_kind(pi, FieldKind::Bivector)?;
    check_differencing(pi)?;
    let d = pi.grid.dimension;
    let strides = pi.grid.strides();
    let term = |p: usize, i: usize, j: usize, k: usize| -> f64 {
        (0..d)
            .map(|l| {
                let c = pi.get(p, i, l);
                if c == 0.0 {
                    0.0
                } else {
                    c * derivative(pi, p, j, k, l, strides[l])
                }
            })
            .sum()
    };
    Ok(max_over_triples(pi, |p, i, j, k| {
        term(p, i, j, k) + term(p, j, k, i) + term(p, k, i, j)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn j_field(scale: f64, kind: FieldKind) -> SampledField {
        SampledField::from_fn(GridSpec::cube(2, 0.0, 1.0, 3), kind, |_, _, _| scale)
    }

    #[test]
    fn zero_form_is_identity() {
        let pi = SampledField::from_fn(GridSpec::cube(3, -1.0, 1.0, 4), FieldKind::Bivector, |x, i, j| {
            x[i] - 2.0 * x[j] + 0.3
        });
        let b = SampledField::zeros(pi.grid.clone(), FieldKind::TwoForm);
        let r = invertibility_check(&pi, &b, DEFAULT_SINGULARITY_THRESHOLD).unwrap();
        assert!(r.ok);
        assert_eq!(r.min_abs_det, 1.0);
        assert_eq!(apply_gauge(&pi, &b, DEFAULT_SINGULARITY_THRESHOLD).unwrap().field, pi);
    }

    #[test]
    fn symplectic_plane_examples() {
        let pi = j_field(1.0, FieldKind::Bivector);
        let singular = j_field(1.0, FieldKind::TwoForm);
        let r = invertibility_check(&pi, &singular, DEFAULT_SINGULARITY_THRESHOLD).unwrap();
        assert!(!r.ok);
        assert!(r.min_abs_det < 1e-15);
        assert!(matches!(
            apply_gauge(&pi, &singular, DEFAULT_SINGULARITY_THRESHOLD),
            Err(GaugeError::SingularEndomorphism { .. })
        ));
        let half = j_field(0.5, FieldKind::TwoForm);
        let r = invertibility_check(&pi, &half, DEFAULT_SINGULARITY_THRESHOLD).unwrap();
        assert!((r.min_abs_det - 0.25).abs() < 1e-15);
        let tau = apply_gauge(&pi, &half, DEFAULT_SINGULARITY_THRESHOLD).unwrap().field;
        for p in 0..tau.grid.point_count() {
            assert!((tau.get(p, 0, 1) - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn kind_and_grid_are_checked() {
        let pi = j_field(1.0, FieldKind::Bivector);
        assert!(matches!(
            invertibility_check(&pi, &pi, 1e-10),
            Err(GaugeError::KindMismatch { .. })
        ));
        let other = SampledField::zeros(GridSpec::cube(2, 0.0, 2.0, 3), FieldKind::TwoForm);
        assert_eq!(invertibility_check(&pi, &other, 1e-10), Err(GaugeError::GridMismatch));
    }

    #[test]
    fn composition_with_negation_recovers_pi() {
        let pi = SampledField::from_fn(GridSpec::cube(4, -1.0, 1.0, 3), FieldKind::Bivector, |x, i, j| {
            0.2 * x[i] + 0.1 * (i + 2 * j) as f64
        });
        let b = SampledField::from_fn(pi.grid.clone(), FieldKind::TwoForm, |_, i, j| 0.05 * (i as f64 - j as f64 + 0.5));
        let back = apply_gauge(
            &apply_gauge(&pi, &b, 1e-10).unwrap().field,
            &b.scaled(-1.0),
            1e-10,
        )
        .unwrap()
        .field;
        assert!(max_deviation(&back, &pi) <= 1e-12);
        let zero = SampledField::zeros(pi.grid.clone(), FieldKind::TwoForm);
        assert_eq!(verify_composition(&pi, &b, &zero, 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn closedness_examples() {
        let grid = GridSpec::cube(3, 0.0, 1.0, 5);
        let c = SampledField::from_fn(grid.clone(), FieldKind::TwoForm, |_, i, j| (i + j) as f64);
        assert!(closedness_residual(&c).unwrap().max < 1e-12);
        let b = SampledField::from_fn(grid, FieldKind::TwoForm, |x, i, j| {
            if (i, j) == (0, 1) {
                x[2]
            } else {
                0.0
            }
        });
        let r = closedness_residual(&b).unwrap();
        assert!((r.max - 1.0).abs() < 1e-12);
        assert_eq!(r.triple, [0, 1, 2]);
    }

    #[test]
    fn jacobi_examples() {
        let grid = GridSpec::cube(3, -1.0, 1.0, 5);
        // so(3)*: π¹² = x₃, π²³ = x₁, π³¹ = x₂
        let lie = SampledField::from_fn(grid.clone(), FieldKind::Bivector, |x, i, j| match (i, j) {
            (0, 1) => x[2],
            (1, 2) => x[0],
            (0, 2) => -x[1],
            _ => 0.0,
        });
        assert!(jacobi_residual(&lie).unwrap().max < 1e-12);
        let block = SampledField::from_fn(grid.clone(), FieldKind::Bivector, |x, i, j| {
            if (i, j) == (0, 1) {
                x[0] * x[1]
            } else {
                0.0
            }
        });
        assert!(jacobi_residual(&block).unwrap().max < 1e-12);
        // π¹² = 1, π²³ = x₂ fails Jacobi: π^{1l}∂_l π^{23} = 1
        let bad = SampledField::from_fn(grid, FieldKind::Bivector, |x, i, j| match (i, j) {
            (0, 1) => 1.0,
            (1, 2) => x[1],
            _ => 0.0,
        });
        assert!((jacobi_residual(&bad).unwrap().max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_grid_is_rejected() {
        let f = SampledField::zeros(
            GridSpec {
                dimension: 3,
                origin: vec![0.0; 3],
                spacing: 0.5,
                shape: vec![3, 2, 3],
            },
            FieldKind::TwoForm,
        );
        assert_eq!(closedness_residual(&f), Err(GaugeError::GridTooSmall { axis: 1 }));
    }

    #[test]
    fn rank_examples() {
        let pi = j_field(1.0, FieldKind::Bivector);
        assert!(rank_map(&pi, DEFAULT_RANK_THRESHOLD).iter().all(|&r| r == 2));
        let zero = SampledField::zeros(pi.grid.clone(), FieldKind::Bivector);
        assert!(rank_map(&zero, DEFAULT_RANK_THRESHOLD).iter().all(|&r| r == 0));
        // π¹² = x₁ vanishes on the line x₁ = 0
        let grid = GridSpec::cube(2, -1.0, 1.0, 5);
        let curve = SampledField::from_fn(grid.clone(), FieldKind::Bivector, |x, _, _| x[0]);
        let ranks = rank_map(&curve, DEFAULT_RANK_THRESHOLD);
        for (p, r) in ranks.iter().enumerate() {
            let expected = if grid.coords(p)[0].abs() < 1e-12 { 0 } else { 2 };
            assert_eq!(*r, expected);
        }
    }
}
