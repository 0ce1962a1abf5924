//! Rigidity matrices, their kernels and the verdicts derived from them.

pub mod fd;
pub mod hetero;
pub mod matrix;
pub mod subspace;
pub mod verdict;

pub use fd::{fd_jacobian_check, fd_jacobian_errors, random_variations};
pub use hetero::{hetero_kernel_analysis, HeteroAnalysis};
pub use matrix::{
    natural_rigidity_matrix, reduced_complete_matrix, rigidity_matrix, rigidity_matrix_in, unified_controllable_columns,
    unified_rigidity_matrix, AgentColumns, Representation, RigidityMatrix,
};
pub use subspace::{label_subspace, per_space_generators, trivial_variation_basis, unified_generators, SubspaceBasis, VariationLabel};
pub use verdict::{
    bearing_congruent, bearing_equivalent, degenerate_trivial_dim, ibr_verdict, ibr_verdict_in, implied_properties,
    kernel_inclusion_check, natural_representation, Classification, ExpectedRankSource, RigidityVerdict,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{AgentState, Framework, MetricSpace};
    use crate::graph::{complete_graph, GraphKind, SensingGraph};
    use crate::numeric::{rank, TolerancePolicy};
    use crate::scenario::{case_study_subgraphs, fixture, hetero_case_study, random_framework, GeneratorSpec, CASE_STUDY_UAV};
    use nalgebra::{DVector, Vector3};

    fn pol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    fn spaces() -> Vec<MetricSpace> {
        vec![
            MetricSpace::rd(2).unwrap(),
            MetricSpace::rd(3).unwrap(),
            MetricSpace::rd_s1(2, None).unwrap(),
            MetricSpace::rd_s1(3, Some(Vector3::new(1.0, 2.0, 2.0) / 3.0)).unwrap(),
            MetricSpace::Se3,
        ]
    }

    #[test]
    fn triangle_shape_and_rank() {
        let b = rigidity_matrix(&fixture("triangle-r2-complete").unwrap()).unwrap();
        assert_eq!((b.nrows(), b.ncols()), (6, 6));
        assert_eq!(rank(&b.matrix, &pol()).unwrap(), 3);
    }

    #[test]
    fn se3_complete_shape() {
        let fw = random_framework(&GeneratorSpec::homogeneous(MetricSpace::Se3, 4, 1.0, 5)).unwrap();
        let b = rigidity_matrix(&fw).unwrap();
        assert_eq!((b.nrows(), b.ncols()), (36, 24));
        assert_eq!(rank(&b.matrix, &pol()).unwrap(), 6 * 4 - 7);
    }

    #[test]
    fn rows_touch_only_their_edge() {
        for (k, s) in spaces().into_iter().enumerate() {
            let fw = random_framework(&GeneratorSpec::homogeneous(s, 5, 0.7, k as u64)).unwrap();
            for b in [rigidity_matrix(&fw).unwrap(), unified_rigidity_matrix(&fw).unwrap()] {
                for (e, rows) in b.edges.iter().zip(&b.row_blocks) {
                    for (agent, cols) in b.col_blocks.iter().enumerate() {
                        if agent == e.head || agent == e.tail {
                            continue;
                        }
                        for r in rows.clone() {
                            for c in cols.translation.clone().chain(cols.rotation.clone()) {
                                assert_eq!(b.matrix[(r, c)], 0.0);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn se3_unified_equals_per_space() {
        let fw = random_framework(&GeneratorSpec::homogeneous(MetricSpace::Se3, 5, 0.6, 9)).unwrap();
        let a = rigidity_matrix(&fw).unwrap().matrix;
        let b = unified_rigidity_matrix(&fw).unwrap().matrix;
        assert!((a - b).amax() <= 1e-12);
    }

    #[test]
    fn euclidean_rotation_half_vanishes() {
        let fw = random_framework(&GeneratorSpec::homogeneous(MetricSpace::rd(3).unwrap(), 5, 1.0, 2)).unwrap();
        let b = unified_rigidity_matrix(&fw).unwrap();
        assert_eq!(b.zero_columns(1e-14), (15..30).collect::<Vec<_>>());
    }

    #[test]
    fn square_cycle_versus_diagonal() {
        let cyc = ibr_verdict(&fixture("square-cycle-r2").unwrap(), &pol()).unwrap();
        assert_eq!((cyc.rank, cyc.expected_rank, cyc.classification), (4, 5, Classification::Ibf));
        let diag = ibr_verdict(&fixture("square-diagonal-r2").unwrap(), &pol()).unwrap();
        assert_eq!((diag.rank, diag.classification), (5, Classification::Ibr));
        assert_eq!(diag.rank_test, Some(true));
    }

    #[test]
    fn reduced_matrix_rank_matches() {
        for d in [2, 3] {
            let fw = random_framework(&GeneratorSpec::homogeneous(MetricSpace::rd(d).unwrap(), 6, 1.0, d as u64)).unwrap();
            let full = rank(&rigidity_matrix(&fw).unwrap().matrix, &pol()).unwrap();
            let reduced = rank(&reduced_complete_matrix(&fw.positions(), d).unwrap(), &pol()).unwrap();
            assert_eq!(full, reduced);
            assert_eq!(full, d * 6 - d - 1);
        }
    }

    #[test]
    fn trivial_basis_dimensions() {
        let want = [3, 4, 4, 5, 7];
        for (s, w) in spaces().into_iter().zip(want) {
            let fw = random_framework(&GeneratorSpec::homogeneous(s, 5, 1.0, 11)).unwrap();
            let st = trivial_variation_basis(&fw, &pol()).unwrap();
            assert_eq!(st.dim(), w, "{s}");
            let b = rigidity_matrix(&fw).unwrap().matrix;
            assert!((&b * &st.basis).norm() <= 1e-8 * b.norm());
        }
    }

    #[test]
    fn finite_differences_agree_in_both_layouts() {
        for (k, s) in spaces().into_iter().enumerate() {
            let fw = random_framework(&GeneratorSpec::homogeneous(s, 5, 0.8, 20 + k as u64)).unwrap();
            for rep in [Representation::PerSpace, Representation::Unified] {
                let err = fd_jacobian_check(&fw, rep, 10, &pol(), 1).unwrap();
                assert!(err <= 1e-5, "{s} {rep:?}: {err}");
            }
        }
    }

    #[test]
    fn fd_rejects_wrong_length() {
        let fw = fixture("triangle-r2-complete").unwrap();
        let bad = vec![DVector::zeros(5)];
        assert!(fd_jacobian_errors(&fw, Representation::PerSpace, &bad, 1e-6).is_err());
        assert!(fd_jacobian_errors(&fw, Representation::PerSpace, &[], 0.0).is_err());
    }

    #[test]
    fn degenerate_dimensions_match_formula() {
        use crate::scenario::Placement;
        let axis = Vector3::new(0.0, 0.6, 0.8);
        let cases = [
            (MetricSpace::rd(3).unwrap(), Vector3::x(), false),
            (MetricSpace::rd_s1(2, None).unwrap(), Vector3::x(), false),
            (MetricSpace::rd_s1(3, Some(axis)).unwrap(), axis, true),
            (MetricSpace::rd_s1(3, Some(Vector3::z())).unwrap(), Vector3::x(), false),
            (MetricSpace::Se3, Vector3::y(), false),
        ];
        for (s, dir, along) in cases {
            let spec = GeneratorSpec::homogeneous(s, 4, 1.0, 3).with_placement(Placement::Collinear(dir));
            let fw = random_framework(&spec).unwrap();
            let v = ibr_verdict(&fw, &pol()).unwrap();
            assert!(v.degenerate && v.rank_test.is_none());
            assert_eq!(v.complete_nullity, degenerate_trivial_dim(&s, 4, along).unwrap(), "{s}");
        }
        assert!(degenerate_trivial_dim(&MetricSpace::Se3, 4, true).is_err());
    }

    #[test]
    fn bearing_equivalence_on_rectangle() {
        let (sq, rect) = crate::scenario::be_not_bc_pair().unwrap();
        assert!(bearing_equivalent(&sq, &rect, &pol()).unwrap());
        assert!(!bearing_congruent(&sq, &rect, &pol()).unwrap());
        let g = SensingGraph::from_pairs(4, &[(0, 1), (1, 2), (2, 3), (3, 0)], GraphKind::Oriented).unwrap();
        assert!(bearing_equivalent(&sq, &sq.with_graph(g).unwrap(), &pol()).is_err());
    }

    #[test]
    fn case_study_numbers() {
        let fw = hetero_case_study(0).unwrap();
        let k = fw.with_graph(complete_graph(fw.graph())).unwrap();
        let b = unified_rigidity_matrix(&k).unwrap();
        assert_eq!((b.nrows(), b.ncols()), (36, 24));
        let h = hetero_kernel_analysis(&fw, &pol()).unwrap();
        assert_eq!(h.zero_columns.len(), 6);
        assert_eq!((h.verdict.rank, h.verdict.nullity), (13, 11));
        assert_eq!((h.trivial.dim(), h.virtual_variations.dim()), (5, 6));
        assert!(h.verdict.notes.is_empty(), "{:?}", h.verdict.notes);
        let mut labels = h.trivial.labels.clone();
        labels.sort_by_key(|l| format!("{l:?}"));
        assert_eq!(
            labels,
            vec![
                VariationLabel::CoordRotationZ,
                VariationLabel::Scaling,
                VariationLabel::TranslationX,
                VariationLabel::TranslationY,
                VariationLabel::TranslationZ
            ]
        );
    }

    #[test]
    fn case_study_subgraphs_are_flexible() {
        let fw = hetero_case_study(1).unwrap();
        let (g1, g2) = case_study_subgraphs(&fw);
        assert!(!ibr_verdict(&g1, &pol()).unwrap().is_ibr());
        assert!(!ibr_verdict(&g2, &pol()).unwrap().is_ibr());
        assert!(ibr_verdict(&fw, &pol()).unwrap().is_ibr());
        let b1 = unified_rigidity_matrix(&g1).unwrap().matrix;
        for a in 0..3 {
            let mut w = DVector::zeros(24);
            w[12 + 3 * CASE_STUDY_UAV + a] = 1.0;
            assert_eq!((&b1 * w).norm(), 0.0);
        }
    }

    #[test]
    fn homogeneous_needs_matching_graph() {
        let g = SensingGraph::from_pairs(3, &[(0, 1), (1, 2)], GraphKind::Undirected).unwrap();
        let states: Vec<_> = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]
            .iter()
            .map(|&(x, y)| AgentState::with_angle(Vector3::new(x, y, 0.0), 0.0))
            .collect();
        assert!(Framework::homogeneous(g, MetricSpace::rd_s1(2, None).unwrap(), states).is_err());
    }
}
