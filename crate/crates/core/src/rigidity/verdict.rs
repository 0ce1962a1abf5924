//! Infinitesimal bearing rigidity verdicts and the comparisons built on the
//! kernel of the rigidity matrix.
//!
//! A framework is IBR when `Ker B_G = Ker B_K`, `K` being the complete graph
//! on the same configuration. For non-degenerate homogeneous frameworks this
//! is equivalent to `rank B_G = c n - c - 1`; both tests are run and must
//! agree.
//!
//! Global and plain bearing rigidity are not computed: they quantify over
//! sets of configurations. IBR is equivalent to global bearing rigidity in
//! every space, and global implies plain bearing rigidity. Only in R^d does
//! plain bearing rigidity imply the other two; see [`implied_properties`].

use serde::Serialize;

use crate::agents::{bearing_rigidity_function, is_non_degenerate, Framework, MetricSpace};
use crate::error::{Error, Result};
use crate::graph::complete_graph;
use crate::numeric::{rank_and_nullspace, subspace_relation, RankNullspace, SubspaceRelation, TolerancePolicy};
use crate::rigidity::matrix::{rigidity_matrix_in, Representation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    #[serde(rename = "IBR")]
    Ibr,
    #[serde(rename = "IBF")]
    Ibf,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::Ibr => "IBR",
            Classification::Ibf => "IBF",
        })
    }
}

/// Where `expected_rank` came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectedRankSource {
    /// `c n - c - 1`.
    Formula,
    /// Rank of the complete-graph matrix (heterogeneous frameworks).
    CompleteGraph,
}

#[derive(Debug, Clone, Serialize)]
pub struct RigidityVerdict {
    pub representation: Representation,
    pub rows: usize,
    pub columns: usize,
    pub rank: usize,
    pub nullity: usize,
    pub complete_rank: usize,
    pub complete_nullity: usize,
    pub expected_rank: usize,
    pub expected_rank_source: ExpectedRankSource,
    /// `rank == expected_rank`; not evaluated for degenerate configurations.
    pub rank_test: Option<bool>,
    pub kernel_equal_to_complete: bool,
    pub classification: Classification,
    pub degenerate: bool,
    pub notes: Vec<String>,
}

impl RigidityVerdict {
    pub fn is_ibr(&self) -> bool {
        self.classification == Classification::Ibr
    }
}

/// Rigidity properties that follow from the verdict.
pub fn implied_properties(space: Option<MetricSpace>, c: Classification) -> Vec<&'static str> {
    let euclidean = matches!(space, Some(MetricSpace::Rd { .. }));
    match (c, euclidean) {
        (Classification::Ibr, true) => vec!["IBR", "GBR (equivalent to IBR)", "BR (equivalent to IBR in R^d)"],
        (Classification::Ibr, false) => vec!["IBR", "GBR (equivalent to IBR)", "BR (implied by GBR)"],
        (Classification::Ibf, true) => vec!["IBF", "not GBR", "not BR (BR, GBR and IBR coincide in R^d)"],
        (Classification::Ibf, false) => vec!["IBF", "not GBR", "BR undecided (BR does not imply GBR here)"],
    }
}

pub(crate) struct KernelPair {
    pub graph: RankNullspace,
    pub complete: RankNullspace,
    pub relation: SubspaceRelation,
    pub rows: usize,
    pub columns: usize,
    pub representation: Representation,
}

/// Per-space for homogeneous frameworks, unified for heterogeneous ones.
pub fn natural_representation(fw: &Framework) -> Representation {
    if fw.is_heterogeneous() {
        Representation::Unified
    } else {
        Representation::PerSpace
    }
}

pub(crate) fn kernel_pair(fw: &Framework, pol: &TolerancePolicy, rep: Representation) -> Result<KernelPair> {
    let bg = rigidity_matrix_in(fw, rep)?;
    let k = fw.with_graph(complete_graph(fw.graph()))?;
    let bk = rigidity_matrix_in(&k, rep)?;
    let graph = rank_and_nullspace(&bg.matrix, pol)?;
    let complete = rank_and_nullspace(&bk.matrix, pol)?;
    let relation = subspace_relation(&complete.null_basis, &graph.null_basis, pol)?;
    Ok(KernelPair {
        graph,
        complete,
        relation,
        rows: bg.nrows(),
        columns: bg.ncols(),
        representation: bg.representation,
    })
}

pub fn ibr_verdict(fw: &Framework, pol: &TolerancePolicy) -> Result<RigidityVerdict> {
    ibr_verdict_in(fw, pol, natural_representation(fw))
}

/// Verdict computed on a chosen matrix representation. Zero columns of the
/// unified form do not change the rank, so the `c n - c - 1` target applies
/// to both representations of a homogeneous framework.
pub fn ibr_verdict_in(fw: &Framework, pol: &TolerancePolicy, rep: Representation) -> Result<RigidityVerdict> {
    let kp = kernel_pair(fw, pol, rep)?;
    let degenerate = !is_non_degenerate(fw, pol).non_degenerate;
    let kernel_equal = kp.relation == SubspaceRelation::Equal;
    let mut notes = Vec::new();

    let (expected_rank, source) = match fw.homogeneous_space() {
        Some(space) => {
            let c = space.controllable_dofs();
            (c * fw.n() - c - 1, ExpectedRankSource::Formula)
        }
        None => (kp.complete.rank, ExpectedRankSource::CompleteGraph),
    };
    let rank_test = if degenerate {
        notes.push("degenerate configuration: collinear agents, verdict from kernel equality only".to_string());
        None
    } else {
        Some(kp.graph.rank == expected_rank)
    };
    if let Some(rt) = rank_test {
        if rt != kernel_equal {
            notes.push(format!(
                "rank test ({}) and kernel test ({}) disagree; tolerances may be too tight",
                rt, kernel_equal
            ));
        }
    }
    if !matches!(kp.relation, SubspaceRelation::Equal | SubspaceRelation::ASubsetB) {
        notes.push("complete-graph kernel is not contained in the graph kernel; numerical trouble".into());
    }
    if !fw.graph().is_connected() {
        notes.push("sensing graph is disconnected".into());
    }
    let classification = if kernel_equal { Classification::Ibr } else { Classification::Ibf };
    Ok(RigidityVerdict {
        representation: kp.representation,
        rows: kp.rows,
        columns: kp.columns,
        rank: kp.graph.rank,
        nullity: kp.graph.nullity(),
        complete_rank: kp.complete.rank,
        complete_nullity: kp.complete.nullity(),
        expected_rank,
        expected_rank_source: source,
        rank_test,
        kernel_equal_to_complete: kernel_equal,
        classification,
        degenerate,
        notes,
    })
}

/// `Ker B_K` is contained in `Ker B_G`. This holds for every framework, so a
/// `false` points at a construction or tolerance problem.
pub fn kernel_inclusion_check(fw: &Framework, pol: &TolerancePolicy) -> Result<bool> {
    let kp = kernel_pair(fw, pol, natural_representation(fw))?;
    Ok(matches!(kp.relation, SubspaceRelation::Equal | SubspaceRelation::ASubsetB))
}

fn check_comparable(f1: &Framework, f2: &Framework) -> Result<()> {
    if f1.graph() != f2.graph() {
        return Err(Error::InvalidArgument("frameworks have different graphs".into()));
    }
    if f1.spaces() != f2.spaces() {
        return Err(Error::InvalidArgument("frameworks live in different spaces".into()));
    }
    Ok(())
}

/// Same bearings over the sensing graph.
pub fn bearing_equivalent(f1: &Framework, f2: &Framework, pol: &TolerancePolicy) -> Result<bool> {
    check_comparable(f1, f2)?;
    let diff = bearing_rigidity_function(f1)?.max_difference(&bearing_rigidity_function(f2)?);
    Ok(diff.is_some_and(|d| d <= pol.subspace_tol))
}

/// Same bearings over the complete graph.
pub fn bearing_congruent(f1: &Framework, f2: &Framework, pol: &TolerancePolicy) -> Result<bool> {
    check_comparable(f1, f2)?;
    let k = complete_graph(f1.graph());
    bearing_equivalent(&f1.with_graph(k.clone())?, &f2.with_graph(k)?, pol)
}

/// Dimension of the trivial variation space of a collinear formation.
///
/// `axis_along_line` selects the R^3 x S^1 case where the rotation axis
/// coincides with the line of agents; it is meaningless for other spaces.
pub fn degenerate_trivial_dim(space: &MetricSpace, n: usize, axis_along_line: bool) -> Result<usize> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("need n >= 3, got {n}")));
    }
    space.validate()?;
    match *space {
        MetricSpace::Rd { d } if !axis_along_line => Ok(n + d - 1),
        MetricSpace::RdS1 { d: 3, .. } if axis_along_line => Ok(2 * n + 2),
        MetricSpace::RdS1 { d, .. } if !axis_along_line => Ok(n + d),
        MetricSpace::Se3 if !axis_along_line => Ok(2 * n + 4),
        _ => Err(Error::InvalidArgument(format!("rotation-axis-along-line case does not apply to {space}"))),
    }
}
