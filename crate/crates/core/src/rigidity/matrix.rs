//! Per-space and unified bearing rigidity matrices.
//!
//! Both are assembled as `D * E_bar^T` products from the graph's incidence
//! matrices, so every row block touches only the two agents of its edge.

use std::ops::Range;

use nalgebra::{DMatrix, Matrix2, Matrix3, Vector2, Vector3};
use serde::Serialize;

use crate::agents::{Framework, MetricSpace};
use crate::error::{Error, Result};
use crate::graph::{incidence_matrices, Edge, GraphKind, SensingGraph};
use crate::numeric::{projector3, skew};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    /// `(d m) x (c n)`, columns `[delta_p; delta_o]` with per-space sizes.
    PerSpace,
    /// `3m x 6n`, every agent treated as a rigid body in 3-D.
    Unified,
}

/// Column ranges owned by one agent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AgentColumns {
    pub translation: Range<usize>,
    pub rotation: Range<usize>,
}

#[derive(Debug, Clone)]
pub struct RigidityMatrix {
    pub matrix: DMatrix<f64>,
    pub edges: Vec<Edge>,
    pub row_blocks: Vec<Range<usize>>,
    pub col_blocks: Vec<AgentColumns>,
    pub representation: Representation,
}

impl RigidityMatrix {
    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    /// Indices of columns that are identically zero (up to `tol` times the
    /// largest column norm).
    pub fn zero_columns(&self, tol: f64) -> Vec<usize> {
        let norms: Vec<f64> = self.matrix.column_iter().map(|c| c.norm()).collect();
        let max = norms.iter().copied().fold(0.0, f64::max);
        norms.iter().enumerate().filter(|(_, &c)| c <= tol * max).map(|(i, _)| i).collect()
    }
}

/// Column mask of actuated dofs in the unified layout (`6n` entries).
pub fn unified_controllable_columns(fw: &Framework) -> Vec<usize> {
    let n = fw.n();
    let mut cols = Vec::new();
    for i in 0..n {
        let (t, _) = fw.space(i).controllable_mask();
        cols.extend((0..3).filter(|&a| t[a]).map(|a| 3 * i + a));
    }
    for i in 0..n {
        let (_, r) = fw.space(i).controllable_mask();
        cols.extend((0..3).filter(|&a| r[a]).map(|a| 3 * n + 3 * i + a));
    }
    cols
}

fn block_diag(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), b.shape()).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

fn oriented_graph(fw: &Framework) -> Result<SensingGraph> {
    let g = fw.graph();
    match g.kind() {
        GraphKind::Undirected => crate::graph::orient(g),
        _ => Ok(g.clone()),
    }
}

fn stack_columns(left: DMatrix<f64>, right: DMatrix<f64>) -> DMatrix<f64> {
    let rows = left.nrows();
    let mut out = DMatrix::zeros(rows, left.ncols() + right.ncols());
    out.view_mut((0, 0), left.shape()).copy_from(&left);
    out.view_mut((0, left.ncols()), right.shape()).copy_from(&right);
    out
}

fn relative(fw: &Framework, e: Edge) -> Result<(f64, Vector3<f64>)> {
    let q = fw.states()[e.tail].position - fw.states()[e.head].position;
    let norm = q.norm();
    if norm == 0.0 {
        return Err(Error::CoincidentAgents(e.head + 1, e.tail + 1));
    }
    Ok((1.0 / norm, q / norm))
}

fn rotation2(r: &Matrix3<f64>) -> Matrix2<f64> {
    r.fixed_view::<2, 2>(0, 0).into_owned()
}

/// The rigidity matrix in the space's own coordinates.
pub fn rigidity_matrix(fw: &Framework) -> Result<RigidityMatrix> {
    let space = fw
        .homogeneous_space()
        .ok_or_else(|| Error::InvalidFramework("per-space rigidity matrix needs a homogeneous framework; use the unified form".into()))?;
    let g = oriented_graph(fw)?;
    let (n, m) = (fw.n(), g.m());
    let d = space.position_dim();
    let rot_dofs = space.rotation_dofs();
    let rotations = fw.rotations();
    let inc = incidence_matrices(&g, d)?;

    let mut d1 = Vec::with_capacity(m);
    let mut d2 = Vec::with_capacity(m);
    for &e in g.edges() {
        let (dij, pbar) = relative(fw, e)?;
        let r = &rotations[e.head];
        if d == 2 {
            let p2 = Vector2::new(pbar.x, pbar.y);
            let proj = Matrix2::identity() - p2 * p2.transpose();
            let rt = rotation2(r).transpose();
            d1.push(DMatrix::from_iterator(2, 2, (rt * proj * dij).iter().copied()));
            if rot_dofs == 1 {
                // d/d alpha of R(alpha)^T pbar is -R^T pbar_perp; the -1 of E_out supplies the sign
                let perp = Vector2::new(-p2.y, p2.x);
                d2.push(DMatrix::from_iterator(2, 1, (rt * perp).iter().copied()));
            }
        } else {
            let proj = projector3(&pbar, false);
            d1.push(DMatrix::from_iterator(3, 3, (r.transpose() * proj * dij).iter().copied()));
            match space {
                MetricSpace::RdS1 { axis, .. } => {
                    let col = -(r.transpose() * skew(&pbar) * axis);
                    d2.push(DMatrix::from_iterator(3, 1, col.iter().copied()));
                }
                MetricSpace::Se3 => {
                    let blk = -(r.transpose() * skew(&pbar));
                    d2.push(DMatrix::from_iterator(3, 3, blk.iter().copied()));
                }
                MetricSpace::Rd { .. } => {}
            }
        }
    }

    let trans = block_diag(&d1) * inc.e_bar.transpose();
    let matrix = if rot_dofs == 0 {
        trans
    } else {
        let e_out = if rot_dofs == 1 { inc.e_out.clone() } else { inc.e_out_bar.clone() };
        stack_columns(trans, block_diag(&d2) * e_out.transpose())
    };

    let rows_per_edge = d;
    Ok(RigidityMatrix {
        matrix,
        edges: g.edges().to_vec(),
        row_blocks: (0..m).map(|k| k * rows_per_edge..(k + 1) * rows_per_edge).collect(),
        col_blocks: (0..n)
            .map(|i| AgentColumns {
                translation: d * i..d * (i + 1),
                rotation: d * n + rot_dofs * i..d * n + rot_dofs * (i + 1),
            })
            .collect(),
        representation: Representation::PerSpace,
    })
}

/// `[D_p E_bar^T, D_o E_out_bar^T]` with `D_o = -diag(R_i^T [pbar_ij]_x V_i)`.
pub fn unified_rigidity_matrix(fw: &Framework) -> Result<RigidityMatrix> {
    let g = oriented_graph(fw)?;
    let (n, m) = (fw.n(), g.m());
    let planar = fw.uses_planar_projector();
    let rotations = fw.rotations();
    let inc = incidence_matrices(&g, 3)?;

    let mut dp = Vec::with_capacity(m);
    let mut d_o = Vec::with_capacity(m);
    for &e in g.edges() {
        let (dij, pbar) = relative(fw, e)?;
        let rt = rotations[e.head].transpose();
        let v = fw.space(e.head).rotation_directions();
        let blk_p = rt * projector3(&pbar, planar) * dij;
        let blk_o = -(rt * skew(&pbar) * v);
        dp.push(DMatrix::from_iterator(3, 3, blk_p.iter().copied()));
        d_o.push(DMatrix::from_iterator(3, 3, blk_o.iter().copied()));
    }
    let matrix = stack_columns(
        block_diag(&dp) * inc.e_bar.transpose(),
        block_diag(&d_o) * inc.e_out_bar.transpose(),
    );
    Ok(RigidityMatrix {
        matrix,
        edges: g.edges().to_vec(),
        row_blocks: (0..m).map(|k| 3 * k..3 * (k + 1)).collect(),
        col_blocks: (0..n)
            .map(|i| AgentColumns { translation: 3 * i..3 * (i + 1), rotation: 3 * n + 3 * i..3 * n + 3 * (i + 1) })
            .collect(),
        representation: Representation::Unified,
    })
}

pub fn rigidity_matrix_in(fw: &Framework, rep: Representation) -> Result<RigidityMatrix> {
    match rep {
        Representation::PerSpace => rigidity_matrix(fw),
        Representation::Unified => unified_rigidity_matrix(fw),
    }
}

/// Picks the per-space matrix for homogeneous frameworks, unified otherwise.
pub fn natural_rigidity_matrix(fw: &Framework) -> Result<RigidityMatrix> {
    if fw.is_heterogeneous() {
        unified_rigidity_matrix(fw)
    } else {
        rigidity_matrix(fw)
    }
}

/// Rank-equivalent reduced matrix for the complete graph on R^d positions:
/// one scaled row `[-r_ij^T, r_ij^T]` per pair in 2-D, the `d_ij^3` blocks
/// in 3-D. Serves as an independent rank oracle for complete frameworks.
pub fn reduced_complete_matrix(positions: &[Vector3<f64>], d: usize) -> Result<DMatrix<f64>> {
    let n = positions.len();
    if !(2..=3).contains(&d) {
        return Err(Error::InvalidArgument(format!("reduced matrix needs d in {{2, 3}}, got {d}")));
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let rows_per = if d == 2 { 1 } else { 3 };
    let mut b = DMatrix::zeros(rows_per * pairs.len(), d * n);
    for (k, &(i, j)) in pairs.iter().enumerate() {
        let q = positions[j] - positions[i];
        if q.norm() == 0.0 {
            return Err(Error::CoincidentAgents(i + 1, j + 1));
        }
        if d == 2 {
            let r = [q.y, -q.x];
            for a in 0..2 {
                b[(k, 2 * i + a)] = -r[a];
                b[(k, 2 * j + a)] = r[a];
            }
        } else {
            let dij = 1.0 / q.norm();
            let blk = (Matrix3::identity() * q.norm_squared() - q * q.transpose()) * dij.powi(3);
            for r in 0..3 {
                for c in 0..3 {
                    b[(3 * k + r, 3 * i + c)] = -blk[(r, c)];
                    b[(3 * k + r, 3 * j + c)] = blk[(r, c)];
                }
            }
        }
    }
    Ok(b)
}
