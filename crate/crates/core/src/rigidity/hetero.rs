//! Kernel decomposition of the unified rigidity matrix into trivial and
//! virtual variations.
//!
//! Zero columns of the unified matrix correspond to rotations an agent cannot
//! actuate; their coordinate directions sit in every kernel and form the
//! virtual space `S_v`. The trivial space is what remains of `Ker B_K` once
//! those directions are projected out.

use nalgebra::DMatrix;

use crate::agents::Framework;
use crate::error::Result;
use crate::graph::complete_graph;
use crate::numeric::{orthonormalize, rank_and_nullspace, TolerancePolicy};
use crate::rigidity::matrix::{unified_rigidity_matrix, Representation};
use crate::rigidity::subspace::{label_subspace, unified_generators, SubspaceBasis, VariationLabel};
use crate::rigidity::verdict::{ibr_verdict_in, RigidityVerdict};

#[derive(Debug, Clone)]
pub struct HeteroAnalysis {
    pub trivial: SubspaceBasis,
    pub virtual_variations: SubspaceBasis,
    pub zero_columns: Vec<usize>,
    pub verdict: RigidityVerdict,
}

/// Works on the unified representation; intended for heterogeneous
/// frameworks but valid for homogeneous ones too.
pub fn hetero_kernel_analysis(fw: &Framework, pol: &TolerancePolicy) -> Result<HeteroAnalysis> {
    let k = fw.with_graph(complete_graph(fw.graph()))?;
    let bk = unified_rigidity_matrix(&k)?;
    let cols = bk.ncols();
    let zero_cols = bk.zero_columns(pol.rank_rtol);

    let mut sv = DMatrix::zeros(cols, zero_cols.len());
    for (c, &z) in zero_cols.iter().enumerate() {
        sv[(z, c)] = 1.0;
    }
    let virtual_variations = SubspaceBasis {
        ambient_dim: cols,
        basis: sv,
        labels: vec![VariationLabel::Virtual; zero_cols.len()],
    };

    let mut kernel = rank_and_nullspace(&bk.matrix, pol)?.null_basis;
    for &z in &zero_cols {
        kernel.row_mut(z).fill(0.0);
    }
    let st = orthonormalize(&kernel, pol);

    let mut candidates = unified_generators(&fw.positions());
    for (_, g) in candidates.iter_mut() {
        for &z in &zero_cols {
            g[z] = 0.0;
        }
    }
    let trivial = label_subspace(&st, &candidates, pol.subspace_tol);

    let mut verdict = ibr_verdict_in(fw, pol, Representation::Unified)?;
    let nullity_k = verdict.complete_nullity;
    if nullity_k != trivial.dim() + virtual_variations.dim() {
        verdict.notes.push(format!(
            "complete-graph nullity {nullity_k} differs from dim S_t + dim S_v = {} + {}",
            trivial.dim(),
            virtual_variations.dim()
        ));
    }
    Ok(HeteroAnalysis { trivial, virtual_variations, zero_columns: zero_cols, verdict })
}
