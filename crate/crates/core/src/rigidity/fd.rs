//! Finite-difference check of the rigidity matrix against the bearing
//! function it linearizes.
//!
//! Positions move by `h * delta_p`. Headings move by `h * delta_alpha`;
//! rigid-body orientations move as `R <- exp(h [V omega]_x) R`, with `V` the
//! agent's actuated rotation directions in the unified layout.

use nalgebra::{DVector, Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::agents::{raw_bearing, Framework, MetricSpace};
use crate::error::{Error, Result};
use crate::numeric::{exp_so3, rotation_axis_angle, TolerancePolicy};
use crate::rigidity::matrix::{rigidity_matrix_in as build, unified_controllable_columns, Representation};

/// Agent `i`'s rotation after an orientation increment `w` (per-space
/// coordinates: one angle, three angular rates, or nothing).
fn rotate(space: &MetricSpace, r: &Matrix3<f64>, w: &[f64]) -> Result<Matrix3<f64>> {
    Ok(match *space {
        MetricSpace::Rd { .. } => *r,
        MetricSpace::RdS1 { axis, .. } => rotation_axis_angle(w[0], &axis)? * r,
        MetricSpace::Se3 => exp_so3(&Vector3::new(w[0], w[1], w[2])) * r,
    })
}

/// Bearings stacked in the row layout of `rep`.
fn stacked(p: &[Vector3<f64>], r: &[Matrix3<f64>], fw: &Framework, rows: usize) -> Result<DVector<f64>> {
    let edges = fw.measured_edges();
    let k = rows / edges.len().max(1);
    let mut out = DVector::zeros(rows);
    for (e_idx, &e) in edges.iter().enumerate() {
        let b = raw_bearing(p, r, e)?;
        for a in 0..k {
            out[k * e_idx + a] = b[a];
        }
    }
    Ok(out)
}

type RawStates = (Vec<Vector3<f64>>, Vec<Matrix3<f64>>);

/// States displaced by `h * delta`, as raw position and rotation arrays.
fn displaced(fw: &Framework, rep: Representation, delta: &DVector<f64>, h: f64) -> Result<RawStates> {
    let n = fw.n();
    let mut p = fw.positions();
    let mut r = fw.rotations();
    match rep {
        Representation::PerSpace => {
            let space = fw.homogeneous_space().ok_or_else(|| Error::InvalidFramework("per-space layout needs a homogeneous framework".into()))?;
            let d = space.position_dim();
            let c = space.rotation_dofs();
            for i in 0..n {
                for a in 0..d {
                    p[i][a] += h * delta[d * i + a];
                }
                if c > 0 {
                    let w: Vec<f64> = (0..c).map(|a| h * delta[d * n + c * i + a]).collect();
                    r[i] = rotate(&space, &r[i], &w)?;
                }
            }
        }
        Representation::Unified => {
            for i in 0..n {
                for a in 0..3 {
                    p[i][a] += h * delta[3 * i + a];
                }
                let w = Vector3::new(delta[3 * n + 3 * i], delta[3 * n + 3 * i + 1], delta[3 * n + 3 * i + 2]);
                let v = fw.space(i).rotation_directions();
                r[i] = exp_so3(&(v * w * h)) * r[i];
            }
        }
    }
    Ok((p, r))
}

/// Random unit-norm variations in the column layout of `rep`. In the unified
/// layout only actuated columns are perturbed.
pub fn random_variations(fw: &Framework, rep: Representation, trials: usize, seed: u64) -> Result<Vec<DVector<f64>>> {
    let cols = build(fw, rep)?.ncols();
    let mask: Vec<usize> = match rep {
        Representation::PerSpace => (0..cols).collect(),
        Representation::Unified => unified_controllable_columns(fw),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..trials)
        .map(|_| {
            let mut v = DVector::zeros(cols);
            for &c in &mask {
                v[c] = StandardNormal.sample(&mut rng);
            }
            let norm = v.norm();
            if norm > 0.0 {
                v /= norm;
            }
            v
        })
        .collect())
}

/// `|B delta - (g(x + h delta) - g(x)) / h| / (|B|_F |delta|)` per variation.
pub fn fd_jacobian_errors(fw: &Framework, rep: Representation, deltas: &[DVector<f64>], h: f64) -> Result<Vec<f64>> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidArgument(format!("finite-difference step must be positive, got {h}")));
    }
    let b = build(fw, rep)?;
    let rows = b.nrows();
    let base = stacked(&fw.positions(), &fw.rotations(), fw, rows)?;
    let scale = b.matrix.norm();
    deltas
        .iter()
        .map(|delta| {
            if delta.len() != b.ncols() {
                return Err(Error::DimensionMismatch(format!("variation has {} entries, matrix has {} columns", delta.len(), b.ncols())));
            }
            let (p, r) = displaced(fw, rep, delta, h)?;
            let fd = (stacked(&p, &r, fw, rows)? - &base) / h;
            let denom = scale * delta.norm();
            let err = (&b.matrix * delta - fd).norm();
            Ok(if denom > 0.0 { err / denom } else { err })
        })
        .collect()
}

/// Largest relative error over `trials` seeded random variations.
pub fn fd_jacobian_check(fw: &Framework, rep: Representation, trials: usize, pol: &TolerancePolicy, seed: u64) -> Result<f64> {
    let deltas = random_variations(fw, rep, trials, seed)?;
    Ok(fd_jacobian_errors(fw, rep, &deltas, pol.fd_step)?.into_iter().fold(0.0, f64::max))
}
