//! Projectors, skew maps, rotations, and tolerance-aware rank / null-space
//! and subspace comparisons.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical thresholds for every rank and subspace decision.
///
/// `rank_rtol` is the per-dimension factor: a singular value counts towards
/// the rank when it exceeds `rank_rtol * max(rows, cols) * sigma_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    pub rank_rtol: f64,
    pub subspace_tol: f64,
    pub fd_step: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self { rank_rtol: 1e-10, subspace_tol: 1e-8, fd_step: 1e-6 }
    }
}

impl TolerancePolicy {
    pub fn new(rank_rtol: f64, subspace_tol: f64, fd_step: f64) -> Result<Self> {
        let pol = Self { rank_rtol, subspace_tol, fd_step };
        pol.validate()?;
        Ok(pol)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rank_rtol", self.rank_rtol),
            ("subspace_tol", self.subspace_tol),
            ("fd_step", self.fd_step),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be finite and positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Named presets: `default`, `strict`, `loose`.
    pub fn profile(name: &str) -> Option<Self> {
        match name {
            "default" => Some(Self::default()),
            "strict" => Some(Self { rank_rtol: 1e-12, subspace_tol: 1e-10, fd_step: 1e-7 }),
            "loose" => Some(Self { rank_rtol: 1e-8, subspace_tol: 1e-6, fd_step: 1e-5 }),
            _ => None,
        }
    }

    /// Absolute singular-value cutoff for a matrix of the given shape.
    pub fn rank_threshold(&self, rows: usize, cols: usize, sigma_max: f64) -> f64 {
        self.rank_rtol * rows.max(cols) as f64 * sigma_max
    }
}

/// `I - x x^T / |x|^2`.
pub fn orthogonal_projector(x: &DVector<f64>) -> Result<DMatrix<f64>> {
    let norm = x.norm();
    if !norm.is_finite() {
        return Err(Error::NonFinite("projector argument"));
    }
    if norm == 0.0 {
        return Err(Error::InvalidArgument("projector of the zero vector".into()));
    }
    let u = x / norm;
    Ok(DMatrix::identity(x.len(), x.len()) - &u * u.transpose())
}

/// 3-D projector, optionally restricted to the xy-plane (the 2-D projector
/// of the first two components, zero elsewhere).
pub(crate) fn projector3(x: &Vector3<f64>, planar: bool) -> Matrix3<f64> {
    if planar {
        let v = nalgebra::Vector2::new(x.x, x.y);
        let u = v / v.norm();
        let p2 = nalgebra::Matrix2::identity() - u * u.transpose();
        let mut p = Matrix3::zeros();
        p.fixed_view_mut::<2, 2>(0, 0).copy_from(&p2);
        p
    } else {
        let u = x / x.norm();
        Matrix3::identity() - u * u.transpose()
    }
}

/// `[x]_x`, so that `skew(x) * y == x.cross(y)`.
pub fn skew(x: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -x.z, x.y, x.z, 0.0, -x.x, -x.y, x.x, 0.0)
}

const AXIS_NORM_TOL: f64 = 1e-9;

/// Rodrigues rotation about a unit axis. A zero axis yields the identity,
/// which is how non-rotating agents are encoded.
pub fn rotation_axis_angle(angle: f64, axis: &Vector3<f64>) -> Result<Matrix3<f64>> {
    if !angle.is_finite() || axis.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("axis-angle input"));
    }
    let norm = axis.norm();
    if norm == 0.0 {
        return Ok(Matrix3::identity());
    }
    if (norm - 1.0).abs() > AXIS_NORM_TOL {
        return Err(Error::InvalidArgument(format!("rotation axis must be unit length or zero, |axis| = {norm}")));
    }
    let k = skew(&(axis / norm));
    Ok(Matrix3::identity() + k * angle.sin() + k * k * (1.0 - angle.cos()))
}

/// Matrix exponential of `skew(w)`; used to apply world-frame angular increments.
pub fn exp_so3(w: &Vector3<f64>) -> Matrix3<f64> {
    let theta = w.norm();
    if theta < 1e-300 {
        return Matrix3::identity();
    }
    let k = skew(&(w / theta));
    Matrix3::identity() + k * theta.sin() + k * k * (1.0 - theta.cos())
}

/// Checks `R^T R = I` and `det R = +1` within `tol`.
pub fn is_rotation(r: &Matrix3<f64>, tol: f64) -> bool {
    (r.transpose() * r - Matrix3::identity()).norm() <= tol && (r.determinant() - 1.0).abs() <= tol
}

/// Numerical rank, singular values (descending) and an orthonormal kernel basis.
#[derive(Debug, Clone)]
pub struct RankNullspace {
    pub rank: usize,
    pub singular_values: Vec<f64>,
    pub null_basis: DMatrix<f64>,
}

impl RankNullspace {
    pub fn nullity(&self) -> usize {
        self.null_basis.ncols()
    }

    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }
}

pub fn rank_and_nullspace(m: &DMatrix<f64>, pol: &TolerancePolicy) -> Result<RankNullspace> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix"));
    }
    let (rows, cols) = m.shape();
    if cols == 0 {
        return Ok(RankNullspace { rank: 0, singular_values: vec![], null_basis: DMatrix::zeros(0, 0) });
    }
    // nalgebra returns a thin V^T for wide matrices; zero rows keep the
    // singular values and give us the full right basis.
    let padded;
    let work = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        padded = p;
        &padded
    } else {
        m
    };
    let svd = SVD::new(work.clone(), false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();

    let sigma_max = singular_values.first().copied().unwrap_or(0.0);
    let cutoff = pol.rank_threshold(rows, cols, sigma_max);
    let rank = if sigma_max == 0.0 { 0 } else { singular_values.iter().filter(|&&s| s > cutoff).count() };

    let null_idx = &order[rank..];
    let mut null_basis = DMatrix::zeros(cols, null_idx.len());
    for (c, &i) in null_idx.iter().enumerate() {
        null_basis.set_column(c, &v_t.row(i).transpose());
    }
    Ok(RankNullspace { rank, singular_values, null_basis })
}

pub fn rank(m: &DMatrix<f64>, pol: &TolerancePolicy) -> Result<usize> {
    rank_and_nullspace(m, pol).map(|r| r.rank)
}

/// Orthonormal basis of the column span of `a` (rank decided by `pol`).
pub fn orthonormalize(a: &DMatrix<f64>, pol: &TolerancePolicy) -> DMatrix<f64> {
    if a.ncols() == 0 || a.nrows() == 0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let svd = SVD::new(a.clone(), true, false);
    let u = svd.u.expect("requested U");
    let sigma_max = svd.singular_values.max();
    if sigma_max == 0.0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let cutoff = pol.rank_threshold(a.nrows(), a.ncols(), sigma_max);
    let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > cutoff).collect();
    let mut q = DMatrix::zeros(a.nrows(), keep.len());
    for (c, &i) in keep.iter().enumerate() {
        q.set_column(c, &u.column(i));
    }
    q
}

fn has_orthonormal_columns(a: &DMatrix<f64>) -> bool {
    let n = a.ncols();
    (a.transpose() * a - DMatrix::<f64>::identity(n, n)).norm() <= 1e-10
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubspaceRelation {
    Equal,
    ASubsetB,
    BSubsetA,
    Incomparable,
}

/// `|(I - Q_B Q_B^T) Q_A|_F`: how far span(A) sticks out of span(B).
pub fn inclusion_residual(qa: &DMatrix<f64>, qb: &DMatrix<f64>) -> f64 {
    if qa.ncols() == 0 {
        return 0.0;
    }
    let proj = qb * (qb.transpose() * qa);
    (qa - proj).norm()
}

/// Compares the column spans of `a` and `b` by projector residuals.
pub fn subspace_relation(a: &DMatrix<f64>, b: &DMatrix<f64>, pol: &TolerancePolicy) -> Result<SubspaceRelation> {
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "subspaces live in R^{} and R^{}",
            a.nrows(),
            b.nrows()
        )));
    }
    let qa = if has_orthonormal_columns(a) { a.clone() } else { orthonormalize(a, pol) };
    let qb = if has_orthonormal_columns(b) { b.clone() } else { orthonormalize(b, pol) };
    let a_in_b = inclusion_residual(&qa, &qb) < pol.subspace_tol;
    let b_in_a = inclusion_residual(&qb, &qa) < pol.subspace_tol;
    Ok(match (a_in_b, b_in_a) {
        (true, true) => SubspaceRelation::Equal,
        (true, false) => SubspaceRelation::ASubsetB,
        (false, true) => SubspaceRelation::BSubsetA,
        (false, false) => SubspaceRelation::Incomparable,
    })
}
