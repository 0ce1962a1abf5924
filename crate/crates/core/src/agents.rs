//! Agent state spaces, frameworks and bearing measurements.
//!
//! Every agent is carried as a rigid body in 3-D: positions and bearings are
//! 3-vectors, and planar spaces keep the third coordinate at zero.

use std::f64::consts::TAU;
use std::fmt;

use nalgebra::{DMatrix, Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::graph::{orient, Edge, GraphKind, SensingGraph};
use crate::numeric::{is_rotation, rank_and_nullspace, rotation_axis_angle, TolerancePolicy};

const UNIT_TOL: f64 = 1e-9;
const ROTATION_TOL: f64 = 1e-9;

/// State space of a single agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricSpace {
    /// Point agent in R^d.
    Rd { d: usize },
    /// Position in R^d plus one rotation about `axis`; for d = 2 the axis is e3.
    RdS1 { d: usize, axis: Vector3<f64> },
    /// Full pose, R^3 x SO(3).
    Se3,
}

impl MetricSpace {
    pub fn rd(d: usize) -> Result<Self> {
        let s = MetricSpace::Rd { d };
        s.validate()?;
        Ok(s)
    }

    pub fn rd_s1(d: usize, axis: Option<Vector3<f64>>) -> Result<Self> {
        let axis = match (d, axis) {
            (2, None) => Vector3::z(),
            (2, Some(a)) if (a - Vector3::z()).norm() <= UNIT_TOL => Vector3::z(),
            (2, Some(a)) => {
                return Err(Error::InvalidFramework(format!(
                    "R2xS1 rotates about e3; got axis [{}, {}, {}]",
                    a.x, a.y, a.z
                )))
            }
            (_, Some(a)) => a,
            (_, None) => return Err(Error::InvalidFramework("R3xS1 needs a rotation axis".into())),
        };
        let s = MetricSpace::RdS1 { d, axis };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            MetricSpace::Rd { d } | MetricSpace::RdS1 { d, .. } if !(2..=3).contains(&d) => {
                Err(Error::InvalidFramework(format!("dimension d must be 2 or 3, got {d}")))
            }
            MetricSpace::RdS1 { axis, .. } if (axis.norm() - 1.0).abs() > UNIT_TOL => {
                Err(Error::InvalidFramework(format!("rotation axis must be unit length, |n| = {}", axis.norm())))
            }
            MetricSpace::RdS1 { d: 2, axis } if (axis - Vector3::z()).norm() > UNIT_TOL => {
                Err(Error::InvalidFramework("R2xS1 rotation axis is fixed to e3".into()))
            }
            _ => Ok(()),
        }
    }

    /// Translational dimension d (3 for SE(3)).
    pub fn position_dim(&self) -> usize {
        match *self {
            MetricSpace::Rd { d } | MetricSpace::RdS1 { d, .. } => d,
            MetricSpace::Se3 => 3,
        }
    }

    /// Number of controllable rotational dofs.
    pub fn rotation_dofs(&self) -> usize {
        match self {
            MetricSpace::Rd { .. } => 0,
            MetricSpace::RdS1 { .. } => 1,
            MetricSpace::Se3 => 3,
        }
    }

    /// Controllable dofs per agent, `c`.
    pub fn controllable_dofs(&self) -> usize {
        self.position_dim() + self.rotation_dofs()
    }

    pub fn is_planar(&self) -> bool {
        self.position_dim() == 2
    }

    /// Agents sense in their local frame (and over directed graphs).
    pub fn has_orientation(&self) -> bool {
        !matches!(self, MetricSpace::Rd { .. })
    }

    /// Rotation-direction matrix `V` of the unified rigidity matrix.
    pub fn rotation_directions(&self) -> Matrix3<f64> {
        match *self {
            MetricSpace::Rd { .. } => Matrix3::zeros(),
            MetricSpace::RdS1 { axis, .. } => {
                let mut v = Matrix3::zeros();
                v.set_column(2, &axis);
                v
            }
            MetricSpace::Se3 => Matrix3::identity(),
        }
    }

    /// Which of the 3 translational and 3 rotational unified columns of an
    /// agent are actuated.
    pub fn controllable_mask(&self) -> ([bool; 3], [bool; 3]) {
        let d = self.position_dim();
        let trans = [true, true, d == 3];
        let rot = match self {
            MetricSpace::Rd { .. } => [false; 3],
            MetricSpace::RdS1 { .. } => [false, false, true],
            MetricSpace::Se3 => [true; 3],
        };
        (trans, rot)
    }

    /// Short label used in reports, e.g. `R2`, `R3xS1`, `SE3`.
    pub fn label(&self) -> String {
        match self {
            MetricSpace::Rd { d } => format!("R{d}"),
            MetricSpace::RdS1 { d, .. } => format!("R{d}xS1"),
            MetricSpace::Se3 => "SE3".into(),
        }
    }
}

impl fmt::Display for MetricSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Orientation {
    /// Point agents have no orientation (identity frame).
    Fixed,
    /// Heading angle in [0, 2pi) about the space's axis.
    Angle(f64),
    Matrix(Matrix3<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState {
    pub position: Vector3<f64>,
    pub orientation: Orientation,
}

impl AgentState {
    pub fn point(position: Vector3<f64>) -> Self {
        Self { position, orientation: Orientation::Fixed }
    }

    pub fn with_angle(position: Vector3<f64>, alpha: f64) -> Self {
        Self { position, orientation: Orientation::Angle(alpha.rem_euclid(TAU)) }
    }

    pub fn with_rotation(position: Vector3<f64>, r: Matrix3<f64>) -> Self {
        Self { position, orientation: Orientation::Matrix(r) }
    }

    /// Orientation of the local frame w.r.t. the world frame.
    pub fn rotation(&self, space: &MetricSpace) -> Matrix3<f64> {
        match (self.orientation, space) {
            (Orientation::Angle(alpha), MetricSpace::RdS1 { axis, .. }) => {
                rotation_axis_angle(alpha, axis).expect("axis validated with the space")
            }
            (Orientation::Matrix(r), _) => r,
            _ => Matrix3::identity(),
        }
    }

    fn validate(&self, idx: usize, space: &MetricSpace) -> Result<()> {
        if self.position.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("agent position"));
        }
        if space.is_planar() && self.position.z != 0.0 {
            return Err(Error::InvalidFramework(format!(
                "agent {} lives in a planar space but has z = {}",
                idx + 1,
                self.position.z
            )));
        }
        match (self.orientation, space) {
            (Orientation::Fixed, MetricSpace::Rd { .. }) => Ok(()),
            (Orientation::Angle(a), MetricSpace::RdS1 { .. }) if a.is_finite() && (0.0..TAU).contains(&a) => Ok(()),
            (Orientation::Matrix(r), MetricSpace::Se3) if is_rotation(&r, ROTATION_TOL) => Ok(()),
            (Orientation::Matrix(_), MetricSpace::Se3) => {
                Err(Error::InvalidFramework(format!("agent {}: R is not a proper rotation", idx + 1)))
            }
            (o, s) => Err(Error::InvalidFramework(format!("agent {}: orientation {o:?} does not fit space {s}", idx + 1))),
        }
    }
}

/// Either one space for every agent, or one per agent.
#[derive(Debug, Clone, PartialEq)]
pub enum SpaceAssignment {
    Homogeneous(MetricSpace),
    Heterogeneous(Vec<MetricSpace>),
}

/// A sensing graph together with a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Framework {
    graph: SensingGraph,
    spaces: SpaceAssignment,
    states: Vec<AgentState>,
}

impl Framework {
    pub fn new(graph: SensingGraph, spaces: SpaceAssignment, states: Vec<AgentState>) -> Result<Self> {
        let n = graph.n();
        if states.len() != n {
            return Err(Error::InvalidFramework(format!("graph has {n} vertices but {} agents were given", states.len())));
        }
        match &spaces {
            SpaceAssignment::Homogeneous(s) => {
                s.validate()?;
                let ok = if s.has_orientation() {
                    graph.kind() == GraphKind::Directed
                } else {
                    graph.kind() != GraphKind::Directed
                };
                if !ok {
                    let want = if s.has_orientation() { "directed" } else { "undirected or oriented" };
                    return Err(Error::InvalidFramework(format!("{s} frameworks need a {want} graph, got {}", graph.kind())));
                }
            }
            SpaceAssignment::Heterogeneous(list) => {
                if list.len() != n {
                    return Err(Error::InvalidFramework(format!("{} spaces for {n} agents", list.len())));
                }
                for s in list {
                    s.validate()?;
                }
                if graph.kind() != GraphKind::Directed {
                    return Err(Error::InvalidFramework("heterogeneous frameworks need a directed graph".into()));
                }
            }
        }
        let fw = Self { graph, spaces, states };
        for (i, st) in fw.states.iter().enumerate() {
            st.validate(i, &fw.space(i))?;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if fw.states[i].position == fw.states[j].position {
                    return Err(Error::CoincidentAgents(i + 1, j + 1));
                }
            }
        }
        Ok(fw)
    }

    pub fn homogeneous(graph: SensingGraph, space: MetricSpace, states: Vec<AgentState>) -> Result<Self> {
        Self::new(graph, SpaceAssignment::Homogeneous(space), states)
    }

    pub fn graph(&self) -> &SensingGraph {
        &self.graph
    }

    pub fn spaces(&self) -> &SpaceAssignment {
        &self.spaces
    }

    pub fn states(&self) -> &[AgentState] {
        &self.states
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn space(&self, i: usize) -> MetricSpace {
        match &self.spaces {
            SpaceAssignment::Homogeneous(s) => *s,
            SpaceAssignment::Heterogeneous(list) => list[i],
        }
    }

    pub fn homogeneous_space(&self) -> Option<MetricSpace> {
        match &self.spaces {
            SpaceAssignment::Homogeneous(s) => Some(*s),
            SpaceAssignment::Heterogeneous(_) => None,
        }
    }

    pub fn is_heterogeneous(&self) -> bool {
        matches!(self.spaces, SpaceAssignment::Heterogeneous(_))
    }

    pub fn positions(&self) -> Vec<Vector3<f64>> {
        self.states.iter().map(|s| s.position).collect()
    }

    pub fn rotations(&self) -> Vec<Matrix3<f64>> {
        self.states.iter().enumerate().map(|(i, s)| s.rotation(&self.space(i))).collect()
    }

    /// Edges in the order used for bearing stacks and matrix rows: the graph's
    /// own edges for directed/oriented graphs, the `i < j` orientation otherwise.
    pub fn measured_edges(&self) -> Vec<Edge> {
        match self.graph.kind() {
            GraphKind::Undirected => orient(&self.graph).expect("undirected").edges().to_vec(),
            _ => self.graph.edges().to_vec(),
        }
    }

    /// Same configuration on a different graph.
    pub fn with_graph(&self, graph: SensingGraph) -> Result<Self> {
        Self::new(graph, self.spaces.clone(), self.states.clone())
    }

    /// Same graph and spaces, new states (validated).
    pub fn with_states(&self, states: Vec<AgentState>) -> Result<Self> {
        Self::new(self.graph.clone(), self.spaces.clone(), states)
    }

    /// Whether all agents sit in the xy-plane with planar projectors, the
    /// convention used for homogeneous R2 and R2xS1 frameworks.
    pub fn uses_planar_projector(&self) -> bool {
        matches!(self.spaces, SpaceAssignment::Homogeneous(s) if s.is_planar())
    }
}

/// Stacked unit bearings, one per measured edge in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct BearingStack {
    pub bearings: Vec<Vector3<f64>>,
}

impl BearingStack {
    pub fn len(&self) -> usize {
        self.bearings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bearings.is_empty()
    }

    pub fn max_difference(&self, other: &BearingStack) -> Option<f64> {
        (self.len() == other.len())
            .then(|| self.bearings.iter().zip(&other.bearings).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }
}

/// `R_i^T (p_j - p_i) / |p_j - p_i|` for raw, unvalidated states.
pub(crate) fn raw_bearing(p: &[Vector3<f64>], r: &[Matrix3<f64>], e: Edge) -> Result<Vector3<f64>> {
    let q = p[e.tail] - p[e.head];
    let norm = q.norm();
    if norm == 0.0 {
        return Err(Error::CoincidentAgents(e.head + 1, e.tail + 1));
    }
    Ok(r[e.head].transpose() * (q / norm))
}

pub fn bearing_measurement(fw: &Framework, k: usize) -> Result<Vector3<f64>> {
    let edges = fw.measured_edges();
    let e = *edges
        .get(k)
        .ok_or_else(|| Error::InvalidArgument(format!("edge index {k} out of range (m = {})", edges.len())))?;
    let i = e.head;
    raw_bearing(&[fw.states[i].position, fw.states[e.tail].position], &[fw.states[i].rotation(&fw.space(i))], Edge::new(0, 1))
}

pub fn bearing_rigidity_function(fw: &Framework) -> Result<BearingStack> {
    let p = fw.positions();
    let r = fw.rotations();
    let bearings = fw.measured_edges().into_iter().map(|e| raw_bearing(&p, &r, e)).collect::<Result<_>>()?;
    Ok(BearingStack { bearings })
}

/// Outcome of the collinearity test.
#[derive(Debug, Clone, PartialEq)]
pub struct Degeneracy {
    pub non_degenerate: bool,
    /// Common direction of the agents when they are collinear.
    pub direction: Option<Vector3<f64>>,
}

/// Non-degenerate iff the centered position matrix has rank at least 2.
pub fn is_non_degenerate(fw: &Framework, pol: &TolerancePolicy) -> Degeneracy {
    positions_non_degenerate(&fw.positions(), pol)
}

pub(crate) fn positions_non_degenerate(p: &[Vector3<f64>], pol: &TolerancePolicy) -> Degeneracy {
    let n = p.len();
    let centroid = p.iter().sum::<Vector3<f64>>() / n as f64;
    let centered = DMatrix::from_fn(n, 3, |i, c| p[i][c] - centroid[c]);
    // kernel of the centered matrix has dim 3 - rank; the collinear direction
    // is the orthogonal complement of a 2-D kernel
    let rn = rank_and_nullspace(&centered, pol).expect("finite positions");
    if rn.rank >= 2 {
        return Degeneracy { non_degenerate: true, direction: None };
    }
    let direction = (rn.rank == 1).then(|| {
        let k0: Vector3<f64> = rn.null_basis.column(0).into_owned().fixed_rows::<3>(0).into();
        let k1: Vector3<f64> = rn.null_basis.column(1).into_owned().fixed_rows::<3>(0).into();
        canonical_sign(k0.cross(&k1).normalize())
    });
    Degeneracy { non_degenerate: false, direction }
}

/// Flip so the first clearly non-zero component is positive.
pub(crate) fn canonical_sign(v: Vector3<f64>) -> Vector3<f64> {
    match v.iter().find(|c| c.abs() > 1e-12) {
        Some(c) if *c < 0.0 => -v,
        _ => v,
    }
}

/// True iff every bearing is parallel (or anti-parallel) to one common direction.
pub fn bearings_collinear(bs: &BearingStack, tol: f64) -> bool {
    let Some(first) = bs.bearings.first() else {
        return true;
    };
    bs.bearings.iter().all(|b| b.cross(first).norm() <= tol)
}
