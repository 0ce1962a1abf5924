//! Trivial and virtual variation subspaces.

use nalgebra::{DMatrix, DVector, Matrix2, Vector3};
use serde::Serialize;

use crate::agents::{is_non_degenerate, Framework, MetricSpace};
use crate::error::{Error, Result};
use crate::numeric::{skew, TolerancePolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VariationLabel {
    TranslationX,
    TranslationY,
    TranslationZ,
    Scaling,
    CoordRotationX,
    CoordRotationY,
    CoordRotationZ,
    /// Coordinated rotation about a non-coordinate axis `n`.
    CoordRotationN,
    Virtual,
    Unlabeled,
}

impl VariationLabel {
    fn translation(axis: usize) -> Self {
        [Self::TranslationX, Self::TranslationY, Self::TranslationZ][axis]
    }

    fn rotation(axis: usize) -> Self {
        [Self::CoordRotationX, Self::CoordRotationY, Self::CoordRotationZ][axis]
    }

    fn rotation_about(n: &Vector3<f64>) -> Self {
        (0..3)
            .find(|&a| (n - Vector3::ith(a, 1.0)).norm() < 1e-12)
            .map(Self::rotation)
            .unwrap_or(Self::CoordRotationN)
    }
}

/// Orthonormal basis with one label per column.
#[derive(Debug, Clone)]
pub struct SubspaceBasis {
    pub ambient_dim: usize,
    pub basis: DMatrix<f64>,
    pub labels: Vec<VariationLabel>,
}

impl SubspaceBasis {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn empty(ambient_dim: usize) -> Self {
        Self { ambient_dim, basis: DMatrix::zeros(ambient_dim, 0), labels: vec![] }
    }

    /// Modified Gram-Schmidt (two passes) over labeled generators; generators
    /// that fall inside the span of earlier ones are dropped.
    pub fn from_generators(ambient_dim: usize, generators: &[(VariationLabel, DVector<f64>)], tol: f64) -> Self {
        let mut cols: Vec<DVector<f64>> = Vec::new();
        let mut labels = Vec::new();
        for (label, g) in generators {
            let scale = g.norm();
            if scale == 0.0 {
                continue;
            }
            let mut v = g / scale;
            for _ in 0..2 {
                for q in &cols {
                    let c = q.dot(&v);
                    v -= q * c;
                }
            }
            let norm = v.norm();
            if norm > tol {
                cols.push(v / norm);
                labels.push(*label);
            }
        }
        let basis = if cols.is_empty() { DMatrix::zeros(ambient_dim, 0) } else { DMatrix::from_columns(&cols) };
        Self { ambient_dim, basis, labels }
    }
}

/// Candidate trivial generators in the per-space column layout.
pub fn per_space_generators(space: &MetricSpace, positions: &[Vector3<f64>]) -> Vec<(VariationLabel, DVector<f64>)> {
    let n = positions.len();
    let d = space.position_dim();
    let r = space.rotation_dofs();
    let dim = (d + r) * n;
    let mut out = Vec::new();

    for a in 0..d {
        let mut v = DVector::zeros(dim);
        for i in 0..n {
            v[d * i + a] = 1.0;
        }
        out.push((VariationLabel::translation(a), v));
    }
    let mut s = DVector::zeros(dim);
    for (i, p) in positions.iter().enumerate() {
        for a in 0..d {
            s[d * i + a] = p[a];
        }
    }
    out.push((VariationLabel::Scaling, s));

    match *space {
        MetricSpace::Rd { .. } => {}
        MetricSpace::RdS1 { d: 2, .. } => {
            let quarter = Matrix2::new(0.0, -1.0, 1.0, 0.0);
            let mut v = DVector::zeros(dim);
            for (i, p) in positions.iter().enumerate() {
                let w = quarter * nalgebra::Vector2::new(p.x, p.y);
                v[2 * i] = w.x;
                v[2 * i + 1] = w.y;
                v[2 * n + i] = 1.0;
            }
            out.push((VariationLabel::CoordRotationZ, v));
        }
        MetricSpace::RdS1 { axis, .. } => {
            let k = skew(&axis);
            let mut v = DVector::zeros(dim);
            for (i, p) in positions.iter().enumerate() {
                let w = k * p;
                v.fixed_rows_mut::<3>(3 * i).copy_from(&w);
                v[3 * n + i] = 1.0;
            }
            out.push((VariationLabel::rotation_about(&axis), v));
        }
        MetricSpace::Se3 => {
            for h in 0..3 {
                let e = Vector3::ith(h, 1.0);
                let k = skew(&e);
                let mut v = DVector::zeros(dim);
                for (i, p) in positions.iter().enumerate() {
                    v.fixed_rows_mut::<3>(3 * i).copy_from(&(k * p));
                    v.fixed_rows_mut::<3>(3 * n + 3 * i).copy_from(&e);
                }
                out.push((VariationLabel::rotation(h), v));
            }
        }
    }
    out
}

/// Candidate trivial generators in the unified `6n` layout.
pub fn unified_generators(positions: &[Vector3<f64>]) -> Vec<(VariationLabel, DVector<f64>)> {
    per_space_generators(&MetricSpace::Se3, positions)
}

/// Translations, scaling and coordinated rotations of a homogeneous,
/// non-degenerate framework, in per-space coordinates.
pub fn trivial_variation_basis(fw: &Framework, pol: &TolerancePolicy) -> Result<SubspaceBasis> {
    let space = fw
        .homogeneous_space()
        .ok_or_else(|| Error::InvalidFramework("trivial basis formulas need a homogeneous framework".into()))?;
    if !is_non_degenerate(fw, pol).non_degenerate {
        return Err(Error::DegenerateConfiguration);
    }
    let gens = per_space_generators(&space, &fw.positions());
    let dim = space.controllable_dofs() * fw.n();
    Ok(SubspaceBasis::from_generators(dim, &gens, pol.subspace_tol))
}

/// Labels each candidate generator found inside `subspace` and returns a
/// labeled orthonormal basis of it: matched generators first, leftover
/// directions as `Unlabeled`.
pub fn label_subspace(
    subspace: &DMatrix<f64>,
    candidates: &[(VariationLabel, DVector<f64>)],
    tol: f64,
) -> SubspaceBasis {
    let ambient = subspace.nrows();
    let mut matched: Vec<(VariationLabel, DVector<f64>)> = Vec::new();
    for (label, g) in candidates {
        let norm = g.norm();
        if norm == 0.0 {
            continue;
        }
        let u = g / norm;
        let residual = (&u - subspace * (subspace.transpose() * &u)).norm();
        if residual < tol {
            matched.push((*label, u));
        }
    }
    matched.extend(subspace.column_iter().map(|c| (VariationLabel::Unlabeled, c.into_owned())));
    let mut basis = SubspaceBasis::from_generators(ambient, &matched, tol.max(1e-10));
    // leftover directions can never exceed the computed subspace
    basis.basis = basis.basis.columns(0, basis.basis.ncols().min(subspace.ncols())).into_owned();
    basis.labels.truncate(subspace.ncols());
    basis
}
