//! Seeded framework generators, named fixtures, greedy augmentation to IBR
//! and the UGV/UAV case study.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, TAU};

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::agents::{positions_non_degenerate, AgentState, Framework, MetricSpace, SpaceAssignment};
use crate::error::{Error, Result};
use crate::graph::{complete_graph, Edge, GraphKind, SensingGraph};
use crate::numeric::{rank, rotation_axis_angle, TolerancePolicy};
use crate::rigidity::{natural_rigidity_matrix, natural_representation, rigidity_matrix_in};

/// Smallest pairwise distance accepted for generic placements.
pub const MIN_SEPARATION: f64 = 0.1;
const MAX_ATTEMPTS: usize = 1000;

pub const FIXTURE_NAMES: &[&str] = &[
    "triangle-r2-complete",
    "square-cycle-r2",
    "square-diagonal-r2",
    "star-r2",
    "cube-r3",
    "triangle-se3-complete",
    "hetero-case-study",
];

#[derive(Debug, Clone, PartialEq)]
pub enum EdgeSpec {
    /// Fraction of the complete graph's edges, in (0, 1].
    Density(f64),
    Explicit(SensingGraph),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Placement {
    GenericRandom,
    /// Agents on the line through the origin spanned by the given direction.
    Collinear(Vector3<f64>),
    NamedFixture(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub spaces: SpaceAssignment,
    pub n: usize,
    pub edges: EdgeSpec,
    pub seed: u64,
    pub placement: Placement,
}

impl GeneratorSpec {
    pub fn homogeneous(space: MetricSpace, n: usize, density: f64, seed: u64) -> Self {
        Self {
            spaces: SpaceAssignment::Homogeneous(space),
            n,
            edges: EdgeSpec::Density(density),
            seed,
            placement: Placement::GenericRandom,
        }
    }

    pub fn with_placement(mut self, placement: Placement) -> Self {
        self.placement = placement;
        self
    }

    fn space(&self, i: usize) -> MetricSpace {
        match &self.spaces {
            SpaceAssignment::Homogeneous(s) => *s,
            SpaceAssignment::Heterogeneous(list) => list[i],
        }
    }

    fn graph_kind(&self) -> GraphKind {
        let oriented = match &self.spaces {
            SpaceAssignment::Homogeneous(s) => s.has_orientation(),
            SpaceAssignment::Heterogeneous(_) => true,
        };
        if oriented {
            GraphKind::Directed
        } else {
            GraphKind::Undirected
        }
    }
}

fn all_pairs(n: usize, kind: GraphKind) -> Vec<Edge> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && (kind.has_direction() || i < j) {
                out.push(Edge::new(i, j));
            }
        }
    }
    out
}

/// Random spanning tree first, then uniformly chosen extra edges.
fn random_graph(n: usize, density: f64, kind: GraphKind, rng: &mut ChaCha8Rng) -> Result<SensingGraph> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidArgument(format!("density must lie in (0, 1], got {density}")));
    }
    let pool = all_pairs(n, kind);
    let m = (density * pool.len() as f64).round() as usize;
    if m < n - 1 {
        return Err(Error::Generator(format!("density {density} gives {m} edges, fewer than the {} needed to connect {n} agents", n - 1)));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::with_capacity(m);
    for k in 1..n {
        let a = order[k];
        let b = order[rng.gen_range(0..k)];
        let e = if !kind.has_direction() {
            Edge::new(a.min(b), a.max(b))
        } else if rng.gen_bool(0.5) {
            Edge::new(a, b)
        } else {
            Edge::new(b, a)
        };
        edges.push(e);
    }
    let mut rest: Vec<Edge> = pool.into_iter().filter(|e| !edges.contains(e)).collect();
    rest.shuffle(rng);
    edges.extend(rest.into_iter().take(m - (n - 1)));
    SensingGraph::new(n, edges, kind)
}

fn random_orientation(space: &MetricSpace, position: Vector3<f64>, rng: &mut ChaCha8Rng) -> AgentState {
    match space {
        MetricSpace::Rd { .. } => AgentState::point(position),
        MetricSpace::RdS1 { .. } => AgentState::with_angle(position, rng.gen_range(0.0..TAU)),
        MetricSpace::Se3 => {
            let q = Quaternion::new(
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            );
            AgentState::with_rotation(position, UnitQuaternion::from_quaternion(q).to_rotation_matrix().into_inner())
        }
    }
}

fn well_separated(p: &[Vector3<f64>]) -> bool {
    (0..p.len()).all(|i| (i + 1..p.len()).all(|j| (p[i] - p[j]).norm() >= MIN_SEPARATION))
}

fn generic_positions(spec: &GeneratorSpec, rng: &mut ChaCha8Rng, pol: &TolerancePolicy) -> Result<Vec<Vector3<f64>>> {
    for _ in 0..MAX_ATTEMPTS {
        let p: Vec<Vector3<f64>> = (0..spec.n)
            .map(|i| {
                let (x, y, z) = (rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>());
                Vector3::new(x, y, if spec.space(i).is_planar() { 0.0 } else { z })
            })
            .collect();
        if well_separated(&p) && positions_non_degenerate(&p, pol).non_degenerate {
            return Ok(p);
        }
    }
    Err(Error::Generator(format!("no acceptable placement after {MAX_ATTEMPTS} attempts")))
}

fn collinear_positions(spec: &GeneratorSpec, dir: Vector3<f64>, rng: &mut ChaCha8Rng) -> Result<Vec<Vector3<f64>>> {
    let norm = dir.norm();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::InvalidArgument("collinear placement needs a non-zero direction".into()));
    }
    let u = dir / norm;
    if u.z != 0.0 && (0..spec.n).any(|i| spec.space(i).is_planar()) {
        return Err(Error::InvalidArgument("planar agents need a collinear direction in the xy-plane".into()));
    }
    for _ in 0..MAX_ATTEMPTS {
        let p: Vec<Vector3<f64>> = (0..spec.n).map(|_| u * rng.gen::<f64>()).collect();
        if well_separated(&p) {
            return Ok(p);
        }
    }
    Err(Error::Generator(format!("no separated collinear placement after {MAX_ATTEMPTS} attempts")))
}

/// Deterministic given `spec.seed`.
pub fn random_framework(spec: &GeneratorSpec) -> Result<Framework> {
    if let Placement::NamedFixture(name) = &spec.placement {
        return fixture(name);
    }
    if spec.n < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 agents, got {}", spec.n)));
    }
    if let SpaceAssignment::Heterogeneous(list) = &spec.spaces {
        if list.len() != spec.n {
            return Err(Error::InvalidArgument(format!("{} spaces for {} agents", list.len(), spec.n)));
        }
    }
    let pol = TolerancePolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let kind = spec.graph_kind();
    let graph = match &spec.edges {
        EdgeSpec::Density(d) => random_graph(spec.n, *d, kind, &mut rng)?,
        EdgeSpec::Explicit(g) => g.clone(),
    };
    let positions = match spec.placement {
        Placement::Collinear(dir) => collinear_positions(spec, dir, &mut rng)?,
        _ => generic_positions(spec, &mut rng, &pol)?,
    };
    let states = positions.into_iter().enumerate().map(|(i, p)| random_orientation(&spec.space(i), p, &mut rng)).collect();
    Framework::new(graph, spec.spaces.clone(), states)
}

/// Greedily adds the candidate edge with the largest rank gain (lowest
/// canonical index on ties) until the framework is IBR.
pub fn augment_to_ibr(fw: &Framework, pol: &TolerancePolicy) -> Result<(Framework, Vec<Edge>)> {
    let rep = natural_representation(fw);
    let k = fw.with_graph(complete_graph(fw.graph()))?;
    let target = rank(&rigidity_matrix_in(&k, rep)?.matrix, pol)?;
    let mut current = fw.clone();
    let mut current_rank = rank(&natural_rigidity_matrix(&current)?.matrix, pol)?;
    let mut added = Vec::new();
    while current_rank < target {
        let candidates: Vec<Edge> = k.graph().edges().iter().copied().filter(|e| !current.graph().contains(*e)).collect();
        let ranks = candidates
            .par_iter()
            .map(|&e| {
                let g = current.graph().with_edges(&[e])?;
                rank(&rigidity_matrix_in(&current.with_graph(g)?, rep)?.matrix, pol)
            })
            .collect::<Result<Vec<usize>>>()?;
        let (best, best_rank) = ranks
            .iter()
            .enumerate()
            .fold((0, 0), |acc, (i, &r)| if r > acc.1 { (i, r) } else { acc });
        if best_rank <= current_rank {
            return Err(Error::InvalidArgument("no candidate edge increases the rank; tolerances are inconsistent".into()));
        }
        let e = candidates[best];
        current = current.with_graph(current.graph().with_edges(&[e])?)?;
        current_rank = best_rank;
        added.push(e);
    }
    Ok((current, added))
}

/// Indices of the ground robots and of the aerial robot in the case study.
pub const CASE_STUDY_UGVS: [usize; 3] = [0, 1, 2];
pub const CASE_STUDY_UAV: usize = 3;

/// Three planar robots with heading about `e3` on the ground plus one rigid
/// body above it, sensing over the complete directed graph.
pub fn hetero_case_study(seed: u64) -> Result<Framework> {
    let pol = TolerancePolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ugv = MetricSpace::rd_s1(2, None)?;
    let spaces = vec![ugv, ugv, ugv, MetricSpace::Se3];
    for _ in 0..MAX_ATTEMPTS {
        let mut p: Vec<Vector3<f64>> = (0..3).map(|_| Vector3::new(rng.gen(), rng.gen(), 0.0)).collect();
        p.push(Vector3::new(rng.gen(), rng.gen(), rng.gen_range(0.5..1.0)));
        let ground_ok = positions_non_degenerate(&p[..3], &pol).non_degenerate;
        if !(well_separated(&p) && ground_ok) {
            continue;
        }
        let states = p.into_iter().zip(&spaces).map(|(x, s)| random_orientation(s, x, &mut rng)).collect();
        let g = SensingGraph::new(4, all_pairs(4, GraphKind::Directed), GraphKind::Directed)?;
        return Framework::new(g, SpaceAssignment::Heterogeneous(spaces), states);
    }
    Err(Error::Generator("no acceptable case-study placement".into()))
}

/// The case study's split `K = G1 u G2`: edges among ground robots, and edges
/// touching the aerial robot.
pub fn case_study_subgraphs(fw: &Framework) -> (Framework, Framework) {
    let g1 = fw.graph().filter_edges(|e| e.head != CASE_STUDY_UAV && e.tail != CASE_STUDY_UAV);
    let g2 = fw.graph().filter_edges(|e| e.head == CASE_STUDY_UAV || e.tail == CASE_STUDY_UAV);
    (
        fw.with_graph(g1).expect("same configuration"),
        fw.with_graph(g2).expect("same configuration"),
    )
}

fn planar(points: &[(f64, f64)]) -> Vec<AgentState> {
    points.iter().map(|&(x, y)| AgentState::point(Vector3::new(x, y, 0.0))).collect()
}

fn undirected(n: usize, pairs: &[(usize, usize)]) -> Result<SensingGraph> {
    SensingGraph::from_pairs(n, pairs, GraphKind::Undirected)
}

const UNIT_SQUARE: [(f64, f64); 4] = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
const SQUARE_CYCLE: [(usize, usize); 4] = [(0, 1), (1, 2), (2, 3), (3, 0)];

/// Canonical frameworks addressable by name.
pub fn fixture(name: &str) -> Result<Framework> {
    let r2 = MetricSpace::rd(2)?;
    match name {
        "triangle-r2-complete" => Framework::homogeneous(
            undirected(3, &[(0, 1), (1, 2), (0, 2)])?,
            r2,
            planar(&[(0.0, 0.0), (1.0, 0.0), (0.5, 3f64.sqrt() / 2.0)]),
        ),
        "square-cycle-r2" => Framework::homogeneous(undirected(4, &SQUARE_CYCLE)?, r2, planar(&UNIT_SQUARE)),
        "square-diagonal-r2" => {
            let mut pairs = SQUARE_CYCLE.to_vec();
            pairs.push((0, 2));
            Framework::homogeneous(undirected(4, &pairs)?, r2, planar(&UNIT_SQUARE))
        }
        "star-r2" => Framework::homogeneous(
            undirected(5, &[(0, 1), (0, 2), (0, 3), (0, 4)])?,
            r2,
            planar(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)]),
        ),
        "cube-r3" => {
            let corners: Vec<AgentState> = (0..8)
                .map(|k| AgentState::point(Vector3::new((k & 1) as f64, ((k >> 1) & 1) as f64, ((k >> 2) & 1) as f64)))
                .collect();
            let mut pairs = Vec::new();
            for a in 0..8usize {
                for bit in [1, 2, 4] {
                    if a & bit == 0 {
                        pairs.push((a, a | bit));
                    }
                }
            }
            Framework::homogeneous(undirected(8, &pairs)?, MetricSpace::rd(3)?, corners)
        }
        "triangle-se3-complete" => {
            let diag = Vector3::new(1.0, 1.0, 1.0).normalize();
            let states = vec![
                AgentState::with_rotation(Vector3::new(0.0, 0.0, 0.0), rotation_axis_angle(0.0, &Vector3::z())?),
                AgentState::with_rotation(Vector3::new(1.0, 0.0, 0.0), rotation_axis_angle(FRAC_PI_2, &Vector3::z())?),
                AgentState::with_rotation(Vector3::new(0.5, 3f64.sqrt() / 2.0, 0.0), rotation_axis_angle(FRAC_PI_3, &diag)?),
            ];
            let g = SensingGraph::new(3, all_pairs(3, GraphKind::Directed), GraphKind::Directed)?;
            Framework::homogeneous(g, MetricSpace::Se3, states)
        }
        "hetero-case-study" => hetero_case_study(0),
        other => Err(Error::InvalidArgument(format!("unknown fixture '{other}'; known: {}", FIXTURE_NAMES.join(", ")))),
    }
}

/// Unit square and a 2x1 rectangle on the same 4-cycle: every cycle bearing
/// agrees, the diagonals do not.
pub fn be_not_bc_pair() -> Result<(Framework, Framework)> {
    let r2 = MetricSpace::rd(2)?;
    let g = undirected(4, &SQUARE_CYCLE)?;
    let square = Framework::homogeneous(g.clone(), r2, planar(&UNIT_SQUARE))?;
    let rect = Framework::homogeneous(g, r2, planar(&[(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (0.0, 1.0)]))?;
    Ok((square, rect))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::is_non_degenerate;
    use crate::rigidity::{ibr_verdict, kernel_inclusion_check, Classification};

    fn pol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    #[test]
    fn seeded_generation_is_deterministic() {
        let spec = GeneratorSpec::homogeneous(MetricSpace::Se3, 6, 0.5, 42);
        assert_eq!(random_framework(&spec).unwrap(), random_framework(&spec).unwrap());
        let other = GeneratorSpec { seed: 43, ..spec.clone() };
        assert_ne!(random_framework(&spec).unwrap(), random_framework(&other).unwrap());
    }

    #[test]
    fn full_density_gives_complete_graph() {
        let fw = random_framework(&GeneratorSpec::homogeneous(MetricSpace::rd(3).unwrap(), 5, 1.0, 1)).unwrap();
        assert_eq!(fw.graph(), &complete_graph(fw.graph()));
        let fw = random_framework(&GeneratorSpec::homogeneous(MetricSpace::Se3, 5, 1.0, 1)).unwrap();
        assert_eq!(fw.graph().m(), 20);
    }

    #[test]
    fn low_density_is_rejected() {
        let spec = GeneratorSpec::homogeneous(MetricSpace::rd(2).unwrap(), 8, 0.05, 0);
        assert!(matches!(random_framework(&spec), Err(Error::Generator(_))));
        let spec = GeneratorSpec::homogeneous(MetricSpace::rd(2).unwrap(), 8, 0.0, 0);
        assert!(matches!(random_framework(&spec), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn sparse_graphs_are_connected() {
        for seed in 0..20 {
            let spec = GeneratorSpec::homogeneous(MetricSpace::rd_s1(3, Some(Vector3::z())).unwrap(), 7, 0.15, seed);
            let fw = random_framework(&spec).unwrap();
            assert!(fw.graph().is_connected());
            assert_eq!(fw.graph().m(), (0.15f64 * 42.0).round() as usize);
        }
    }

    #[test]
    fn collinear_placement_is_degenerate() {
        let spec = GeneratorSpec::homogeneous(MetricSpace::rd(3).unwrap(), 5, 1.0, 3).with_placement(Placement::Collinear(Vector3::x()));
        let fw = random_framework(&spec).unwrap();
        assert!(!is_non_degenerate(&fw, &pol()).non_degenerate);
        let planar = GeneratorSpec::homogeneous(MetricSpace::rd(2).unwrap(), 4, 1.0, 3).with_placement(Placement::Collinear(Vector3::z()));
        assert!(random_framework(&planar).is_err());
    }

    #[test]
    fn generic_frameworks_are_non_degenerate_and_nested() {
        let spaces = [MetricSpace::rd(2).unwrap(), MetricSpace::rd_s1(2, None).unwrap(), MetricSpace::Se3];
        for (k, s) in spaces.iter().enumerate() {
            let fw = random_framework(&GeneratorSpec::homogeneous(*s, 5, 0.6, k as u64)).unwrap();
            assert!(is_non_degenerate(&fw, &pol()).non_degenerate);
            assert!(kernel_inclusion_check(&fw, &pol()).unwrap());
        }
    }

    #[test]
    fn square_gets_one_diagonal() {
        let (fw, added) = augment_to_ibr(&fixture("square-cycle-r2").unwrap(), &pol()).unwrap();
        assert_eq!(added, vec![Edge::new(0, 2)]);
        assert!(ibr_verdict(&fw, &pol()).unwrap().is_ibr());
    }

    #[test]
    fn ibr_input_is_left_alone() {
        let fw = fixture("square-diagonal-r2").unwrap();
        let (out, added) = augment_to_ibr(&fw, &pol()).unwrap();
        assert!(added.is_empty());
        assert_eq!(out, fw);
    }

    #[test]
    fn star_reaches_full_rank() {
        let (fw, _) = augment_to_ibr(&fixture("star-r2").unwrap(), &pol()).unwrap();
        let v = ibr_verdict(&fw, &pol()).unwrap();
        assert!(v.is_ibr());
        assert_eq!(v.rank, 7);
    }

    #[test]
    fn cube_augments_to_ibr() {
        let fw = fixture("cube-r3").unwrap();
        assert_eq!(ibr_verdict(&fw, &pol()).unwrap().classification, Classification::Ibf);
        let (aug, added) = augment_to_ibr(&fw, &pol()).unwrap();
        assert!(!added.is_empty());
        assert_eq!(ibr_verdict(&aug, &pol()).unwrap().rank, 3 * 8 - 4);
    }

    #[test]
    fn every_fixture_builds() {
        for name in FIXTURE_NAMES {
            let fw = fixture(name).unwrap();
            assert!(is_non_degenerate(&fw, &pol()).non_degenerate, "{name}");
        }
        assert!(fixture("pentagon").is_err());
    }

    #[test]
    fn case_study_layout() {
        let fw = hetero_case_study(7).unwrap();
        assert_eq!(fw.graph().m(), 12);
        for i in CASE_STUDY_UGVS {
            assert_eq!(fw.states()[i].position.z, 0.0);
        }
        assert!(fw.states()[CASE_STUDY_UAV].position.z >= 0.5);
        let (g1, g2) = case_study_subgraphs(&fw);
        assert_eq!((g1.graph().m(), g2.graph().m()), (6, 6));
    }
}
