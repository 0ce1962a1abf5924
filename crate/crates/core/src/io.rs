//! File formats: framework JSON, matrix CSV with a block-structure sidecar,
//! and Graphviz DOT.
//!
//! Vertex indices are 1-based in every file format.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::agents::{AgentState, Framework, MetricSpace, Orientation, SpaceAssignment};
use crate::error::{Error, Result};
use crate::graph::{Edge, GraphKind, SensingGraph};
use crate::numeric::rotation_axis_angle;
use crate::rigidity::RigidityMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum SpaceDto {
    Rd { d: usize },
    #[serde(rename = "RdxS1")]
    RdS1 {
        d: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        axis: Option<[f64; 3]>,
    },
    #[serde(rename = "SE3")]
    Se3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpacesDto {
    One(SpaceDto),
    PerAgent(Vec<SpaceDto>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDto {
    pub n: usize,
    pub kind: GraphKind,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisAngleDto {
    pub axis: [f64; 3],
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentDto {
    pub p: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r: Option<[[f64; 3]; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis_angle: Option<AxisAngleDto>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameworkDto {
    pub space: SpacesDto,
    pub graph: GraphDto,
    pub agents: Vec<AgentDto>,
}

impl SpaceDto {
    fn to_space(&self) -> Result<MetricSpace> {
        match *self {
            SpaceDto::Rd { d } => MetricSpace::rd(d),
            SpaceDto::RdS1 { d, axis } => MetricSpace::rd_s1(d, axis.map(Vector3::from)),
            SpaceDto::Se3 => Ok(MetricSpace::Se3),
        }
    }

    fn from_space(s: &MetricSpace) -> Self {
        match *s {
            MetricSpace::Rd { d } => SpaceDto::Rd { d },
            MetricSpace::RdS1 { d: 2, .. } => SpaceDto::RdS1 { d: 2, axis: None },
            MetricSpace::RdS1 { d, axis } => SpaceDto::RdS1 { d, axis: Some(axis.into()) },
            MetricSpace::Se3 => SpaceDto::Se3,
        }
    }
}

fn agent_state(i: usize, a: &AgentDto, space: &MetricSpace) -> Result<AgentState> {
    let dim = space.position_dim();
    let p = match (a.p.len(), dim) {
        (2, 2) => Vector3::new(a.p[0], a.p[1], 0.0),
        (3, _) => Vector3::new(a.p[0], a.p[1], a.p[2]),
        (len, _) => {
            return Err(Error::InvalidFramework(format!("agent {}: position has {len} coordinates, space {space} needs {dim}", i + 1)))
        }
    };
    let set = [a.alpha.is_some(), a.r.is_some(), a.axis_angle.is_some()].iter().filter(|b| **b).count();
    if set > 1 {
        return Err(Error::InvalidFramework(format!("agent {}: give at most one of alpha, R, axis_angle", i + 1)));
    }
    match (space, a) {
        (MetricSpace::Rd { .. }, _) if set == 0 => Ok(AgentState::point(p)),
        (MetricSpace::RdS1 { .. }, AgentDto { alpha: Some(alpha), .. }) => {
            if !alpha.is_finite() {
                return Err(Error::NonFinite("heading angle"));
            }
            Ok(AgentState::with_angle(p, *alpha))
        }
        (MetricSpace::Se3, AgentDto { r: Some(rows), .. }) => Ok(AgentState::with_rotation(
            p,
            Matrix3::from_row_iterator(rows.iter().flat_map(|row| row.iter().copied())),
        )),
        (MetricSpace::Se3, AgentDto { axis_angle: Some(aa), .. }) => {
            let axis = Vector3::from(aa.axis);
            let norm = axis.norm();
            if !(norm.is_finite() && norm > 0.0 && aa.angle.is_finite()) {
                return Err(Error::InvalidFramework(format!("agent {}: axis_angle needs a finite non-zero axis", i + 1)));
            }
            Ok(AgentState::with_rotation(p, rotation_axis_angle(aa.angle, &(axis / norm))?))
        }
        _ => {
            let want = match space {
                MetricSpace::Rd { .. } => "no orientation",
                MetricSpace::RdS1 { .. } => "alpha",
                MetricSpace::Se3 => "R or axis_angle",
            };
            Err(Error::InvalidFramework(format!("agent {}: space {space} needs {want}", i + 1)))
        }
    }
}

impl FrameworkDto {
    pub fn to_framework(&self) -> Result<Framework> {
        let n = self.graph.n;
        let mut edges = Vec::with_capacity(self.graph.edges.len());
        for &[i, j] in &self.graph.edges {
            if i == 0 || j == 0 || i > n || j > n {
                return Err(Error::InvalidGraph(format!("edge [{i}, {j}] out of range 1..={n}")));
            }
            edges.push(Edge::new(i - 1, j - 1));
        }
        let graph = SensingGraph::new(n, edges, self.graph.kind)?;
        let spaces = match &self.space {
            SpacesDto::One(s) => SpaceAssignment::Homogeneous(s.to_space()?),
            SpacesDto::PerAgent(list) => SpaceAssignment::Heterogeneous(list.iter().map(SpaceDto::to_space).collect::<Result<_>>()?),
        };
        if self.agents.len() != n {
            return Err(Error::InvalidFramework(format!("graph has {n} vertices but {} agents were given", self.agents.len())));
        }
        let space_of = |i: usize| match &spaces {
            SpaceAssignment::Homogeneous(s) => *s,
            SpaceAssignment::Heterogeneous(list) => list[i],
        };
        let states = self.agents.iter().enumerate().map(|(i, a)| agent_state(i, a, &space_of(i))).collect::<Result<_>>()?;
        Framework::new(graph, spaces, states)
    }

    pub fn from_framework(fw: &Framework) -> Self {
        let space = match fw.spaces() {
            SpaceAssignment::Homogeneous(s) => SpacesDto::One(SpaceDto::from_space(s)),
            SpaceAssignment::Heterogeneous(list) => SpacesDto::PerAgent(list.iter().map(SpaceDto::from_space).collect()),
        };
        let graph = GraphDto {
            n: fw.n(),
            kind: fw.graph().kind(),
            edges: fw.graph().edges().iter().map(|e| [e.head + 1, e.tail + 1]).collect(),
        };
        let agents = fw
            .states()
            .iter()
            .enumerate()
            .map(|(i, st)| {
                let p = st.position;
                let p = if fw.space(i).position_dim() == 2 { vec![p.x, p.y] } else { vec![p.x, p.y, p.z] };
                let (alpha, r) = match st.orientation {
                    Orientation::Fixed => (None, None),
                    Orientation::Angle(a) => (Some(a), None),
                    Orientation::Matrix(m) => (None, Some([0, 1, 2].map(|row| [0, 1, 2].map(|c| m[(row, c)])))),
                };
                AgentDto { p, alpha, r, axis_angle: None }
            })
            .collect();
        Self { space, graph, agents }
    }
}

pub fn parse_framework(text: &str) -> Result<Framework> {
    serde_json::from_str::<FrameworkDto>(text)?.to_framework()
}

pub fn read_framework(path: &Path) -> Result<Framework> {
    parse_framework(&std::fs::read_to_string(path)?)
}

pub fn framework_to_json(fw: &Framework) -> String {
    serde_json::to_string_pretty(&FrameworkDto::from_framework(fw)).expect("framework DTO serializes")
}

/// Row-major CSV; `{}` formatting of f64 round-trips exactly.
pub fn matrix_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_matrix_csv(text: &str) -> Result<DMatrix<f64>> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split(',')
                .map(|c| c.trim().parse::<f64>().map_err(|e| Error::Parse(format!("bad CSV cell '{c}': {e}"))))
                .collect()
        })
        .collect::<Result<_>>()?;
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Parse("ragged CSV matrix".into()));
    }
    Ok(DMatrix::from_row_iterator(rows.len(), ncols, rows.into_iter().flatten()))
}

#[derive(Debug, Clone, Serialize)]
pub struct RowBlock {
    pub edge: [usize; 2],
    pub rows: [usize; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct ColBlock {
    pub agent: usize,
    pub translation: [usize; 2],
    pub rotation: [usize; 2],
}

/// Row/column block map of an exported matrix; ranges are half-open and
/// 0-based into the CSV, agents and edges are 1-based.
#[derive(Debug, Clone, Serialize)]
pub struct BlockSidecar {
    pub representation: crate::rigidity::Representation,
    pub rows: usize,
    pub cols: usize,
    pub row_blocks: Vec<RowBlock>,
    pub col_blocks: Vec<ColBlock>,
}

pub fn block_sidecar(b: &RigidityMatrix) -> BlockSidecar {
    BlockSidecar {
        representation: b.representation,
        rows: b.nrows(),
        cols: b.ncols(),
        row_blocks: b
            .edges
            .iter()
            .zip(&b.row_blocks)
            .map(|(e, r)| RowBlock { edge: [e.head + 1, e.tail + 1], rows: [r.start, r.end] })
            .collect(),
        col_blocks: b
            .col_blocks
            .iter()
            .enumerate()
            .map(|(i, c)| ColBlock {
                agent: i + 1,
                translation: [c.translation.start, c.translation.end],
                rotation: [c.rotation.start, c.rotation.end],
            })
            .collect(),
    }
}

/// DOT rendering with pinned positions; `added` edges are drawn blue and
/// tagged `class="added"`.
pub fn to_dot(fw: &Framework, added: &[Edge]) -> String {
    let directed = fw.graph().kind().has_direction();
    let (keyword, arrow) = if directed { ("digraph", "->") } else { ("graph", "--") };
    let mut out = format!("{keyword} framework {{\n  node [shape=circle];\n");
    for (i, st) in fw.states().iter().enumerate() {
        let p = st.position;
        let _ = writeln!(out, "  {} [label=\"{}\\n{}\", pos=\"{},{}!\"];", i + 1, i + 1, fw.space(i).label(), p.x, p.y);
    }
    for e in fw.graph().edges() {
        let is_added = added.iter().any(|a| a == e || (!directed && a.reversed() == *e));
        let style = if is_added { " [color=blue, class=\"added\"]" } else { "" };
        let _ = writeln!(out, "  {} {arrow} {}{style};", e.head + 1, e.tail + 1);
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::ErrorKind;
    use crate::scenario::{augment_to_ibr, fixture, FIXTURE_NAMES};
    use crate::TolerancePolicy;

    #[test]
    fn fixtures_round_trip() {
        for name in FIXTURE_NAMES {
            let fw = fixture(name).unwrap();
            let back = parse_framework(&framework_to_json(&fw)).unwrap();
            assert_eq!(back.graph(), fw.graph(), "{name}");
            assert_eq!(back.spaces(), fw.spaces(), "{name}");
            for (a, b) in back.states().iter().zip(fw.states()) {
                assert_eq!(a.position, b.position);
                assert_eq!(a.orientation, b.orientation);
            }
        }
    }

    #[test]
    fn parses_minimal_planar_file() {
        let text = r#"{"space": {"type": "Rd", "d": 2},
            "graph": {"n": 3, "kind": "undirected", "edges": [[1,2],[2,3],[1,3]]},
            "agents": [{"p": [0,0]}, {"p": [1,0]}, {"p": [0,1]}]}"#;
        let fw = parse_framework(text).unwrap();
        assert_eq!(fw.graph().m(), 3);
        assert_eq!(fw.states()[2].position, Vector3::new(0.0, 1.0, 0.0));
    }

    #[test]
    fn axis_angle_agents() {
        let text = r#"{"space": {"type": "SE3"},
            "graph": {"n": 3, "kind": "directed", "edges": [[1,2],[2,3],[3,1]]},
            "agents": [{"p": [0,0,0], "axis_angle": {"axis": [0,0,2], "angle": 1.5707963267948966}},
                       {"p": [1,0,0], "R": [[1,0,0],[0,1,0],[0,0,1]]},
                       {"p": [0,1,1], "R": [[1,0,0],[0,1,0],[0,0,1]]}]}"#;
        let fw = parse_framework(text).unwrap();
        let r = fw.rotations()[0];
        assert!((r * Vector3::x() - Vector3::y()).norm() < 1e-15);
    }

    #[test]
    fn error_kinds() {
        assert_eq!(parse_framework("{not json").unwrap_err().kind(), ErrorKind::Parse);
        let bad_type = r#"{"space": {"type": "S2"}, "graph": {"n": 3, "kind": "undirected", "edges": []}, "agents": []}"#;
        assert_eq!(parse_framework(bad_type).unwrap_err().kind(), ErrorKind::Parse);
        let bad_edge = r#"{"space": {"type": "Rd", "d": 2},
            "graph": {"n": 3, "kind": "undirected", "edges": [[0,2]]},
            "agents": [{"p": [0,0]}, {"p": [1,0]}, {"p": [0,1]}]}"#;
        assert_eq!(parse_framework(bad_edge).unwrap_err().kind(), ErrorKind::Validation);
        let missing_alpha = r#"{"space": {"type": "RdxS1", "d": 2},
            "graph": {"n": 3, "kind": "directed", "edges": [[1,2]]},
            "agents": [{"p": [0,0]}, {"p": [1,0]}, {"p": [0,1]}]}"#;
        assert_eq!(parse_framework(missing_alpha).unwrap_err().kind(), ErrorKind::Validation);
        let bad_rotation = r#"{"space": {"type": "SE3"},
            "graph": {"n": 3, "kind": "directed", "edges": [[1,2]]},
            "agents": [{"p": [0,0,0], "R": [[2,0,0],[0,1,0],[0,0,1]]}, {"p": [1,0,0], "R": [[1,0,0],[0,1,0],[0,0,1]]},
                       {"p": [0,1,0], "R": [[1,0,0],[0,1,0],[0,0,1]]}]}"#;
        assert_eq!(parse_framework(bad_rotation).unwrap_err().kind(), ErrorKind::Validation);
    }

    #[test]
    fn csv_round_trips_exactly() {
        let b = crate::rigidity::rigidity_matrix(&fixture("triangle-se3-complete").unwrap()).unwrap();
        let back = parse_matrix_csv(&matrix_csv(&b.matrix)).unwrap();
        assert_eq!(back, b.matrix);
        let side = block_sidecar(&b);
        assert_eq!(side.row_blocks.len(), 6);
        assert_eq!(side.col_blocks[0].rotation, [9, 12]);
        assert!(parse_matrix_csv("1,2\n3\n").is_err());
    }

    #[test]
    fn dot_output() {
        let tri = to_dot(&fixture("triangle-r2-complete").unwrap(), &[]);
        assert!(tri.starts_with("graph "));
        assert_eq!(tri.matches(" -- ").count(), 3);
        assert_eq!(tri.matches("pos=").count(), 3);
        let se3 = to_dot(&fixture("triangle-se3-complete").unwrap(), &[]);
        assert!(se3.starts_with("digraph "));
        assert_eq!(se3.matches(" -> ").count(), 6);
        let (aug, added) = augment_to_ibr(&fixture("square-cycle-r2").unwrap(), &TolerancePolicy::default()).unwrap();
        let dot = to_dot(&aug, &added);
        assert!(dot.contains("1 -- 3 [color=blue, class=\"added\"]"));
        assert_eq!(dot.matches("class=\"added\"").count(), 1);
    }
}
