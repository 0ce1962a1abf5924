//! Acceptance suite: eleven criteria, one PASS/FAIL line each.

use std::process::ExitCode;

use bearing_rigidity::agents::{AgentState, Framework, MetricSpace, SpaceAssignment};
use bearing_rigidity::graph::complete_graph;
use bearing_rigidity::numeric::{rank, rank_and_nullspace, subspace_relation, SubspaceRelation, TolerancePolicy};
use bearing_rigidity::rigidity::{
    bearing_congruent, bearing_equivalent, degenerate_trivial_dim, fd_jacobian_errors, hetero_kernel_analysis, ibr_verdict,
    natural_representation, random_variations, rigidity_matrix, rigidity_matrix_in, trivial_variation_basis, unified_controllable_columns,
    unified_rigidity_matrix,
};
use bearing_rigidity::scenario::{
    augment_to_ibr, be_not_bc_pair, case_study_subgraphs, fixture, hetero_case_study, random_framework, GeneratorSpec, Placement,
};
use nalgebra::{DMatrix, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pol() -> TolerancePolicy {
    TolerancePolicy::default()
}

fn homogeneous_spaces() -> Vec<MetricSpace> {
    vec![
        MetricSpace::rd(2).unwrap(),
        MetricSpace::rd(3).unwrap(),
        MetricSpace::rd_s1(2, None).unwrap(),
        MetricSpace::rd_s1(3, Some(Vector3::z())).unwrap(),
        MetricSpace::rd_s1(3, Some(Vector3::new(2.0, -1.0, 2.0) / 3.0)).unwrap(),
        MetricSpace::Se3,
    ]
}

fn mixed_spaces(n: usize, rng: &mut ChaCha8Rng) -> SpaceAssignment {
    let pool = [MetricSpace::rd(3).unwrap(), MetricSpace::rd_s1(2, None).unwrap(), MetricSpace::rd_s1(3, Some(Vector3::z())).unwrap(), MetricSpace::Se3];
    SpaceAssignment::Heterogeneous((0..n).map(|_| pool[rng.gen_range(0..pool.len())]).collect())
}

/// Density between the connectivity minimum and 1.
fn density(n: usize, directed: bool, rng: &mut ChaCha8Rng) -> f64 {
    let pool = if directed { n * (n - 1) } else { n * (n - 1) / 2 } as f64;
    let lo = ((n - 1) as f64 + 0.5) / pool;
    rng.gen_range(lo.min(1.0)..=1.0)
}

fn random_homogeneous(space: MetricSpace, n: usize, dens: f64, seed: u64) -> Framework {
    random_framework(&GeneratorSpec::homogeneous(space, n, dens, seed)).unwrap()
}

fn random_mixed(n: usize, seed: u64, rng: &mut ChaCha8Rng) -> Framework {
    let mut spec = GeneratorSpec::homogeneous(MetricSpace::Se3, n, density(n, true, rng), seed);
    spec.spaces = mixed_spaces(n, rng);
    random_framework(&spec).unwrap()
}

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn complete_rank(space: MetricSpace, n: usize, seed: u64) -> usize {
    let fw = random_homogeneous(space, n, 1.0, seed);
    rank(&rigidity_matrix(&fw).unwrap().matrix, &pol()).unwrap()
}

fn criterion_1() -> Outcome {
    let (mut ok, mut total) = (0, 0);
    for d in [2, 3] {
        for n in 3..=8 {
            for t in 0..50 {
                total += 1;
                if complete_rank(MetricSpace::rd(d).unwrap(), n, 1000 * n as u64 + t) == d * n - d - 1 {
                    ok += 1;
                }
            }
        }
    }
    outcome(ok == total, format!("{ok}/{total} complete R^d frameworks with rank dn-d-1"))
}

fn criterion_2() -> Outcome {
    let (mut ok, mut total) = (0, 0);
    let spaces = [MetricSpace::rd_s1(2, None).unwrap(), MetricSpace::rd_s1(3, Some(Vector3::z())).unwrap(), MetricSpace::Se3];
    for s in spaces {
        let c = s.controllable_dofs();
        for n in 3..=8 {
            for t in 0..50 {
                total += 1;
                if complete_rank(s, n, 7000 * n as u64 + t) == c * n - c - 1 {
                    ok += 1;
                }
            }
        }
    }
    outcome(ok == total, format!("{ok}/{total} complete R^dxS1 / SE3 frameworks with kernel dim d+2 / 7"))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let spaces = homogeneous_spaces();
    let (mut agree, mut ibr) = (0, 0);
    for k in 0..200 {
        let s = spaces[k % spaces.len()];
        let n = rng.gen_range(3..=7);
        let fw = random_homogeneous(s, n, density(n, s.has_orientation(), &mut rng), k as u64);
        let v = ibr_verdict(&fw, &pol()).unwrap();
        if v.rank_test == Some(v.kernel_equal_to_complete) {
            agree += 1;
        }
        ibr += v.is_ibr() as usize;
    }
    outcome(agree == 200, format!("rank test agrees with kernel test on {agree}/200 ({ibr} IBR, {} IBF)", 200 - ibr))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let spaces = homogeneous_spaces();
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let s = spaces[k % spaces.len()];
        let n = rng.gen_range(3..=7);
        let fw = random_homogeneous(s, n, density(n, s.has_orientation(), &mut rng), 400 + k as u64);
        let b = rigidity_matrix(&fw).unwrap().matrix;
        let st = trivial_variation_basis(&fw, &pol()).unwrap().basis;
        worst = worst.max((&b * &st).norm() / b.norm());
    }
    outcome(worst <= 1e-8, format!("max |B S_t|_F / |B|_F = {worst:.2e} over 100 frameworks"))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let spaces = homogeneous_spaces();
    let mut ok = 0;
    for k in 0..200 {
        let n = rng.gen_range(3..=7);
        let fw = if k % 4 == 3 {
            random_mixed(n, 500 + k as u64, &mut rng)
        } else {
            let s = spaces[k % spaces.len()];
            random_homogeneous(s, n, density(n, s.has_orientation(), &mut rng), 500 + k as u64)
        };
        let b = rigidity_matrix_in(&fw, natural_representation(&fw)).unwrap().matrix;
        let k_fw = fw.with_graph(complete_graph(fw.graph())).unwrap();
        let bk = rigidity_matrix_in(&k_fw, natural_representation(&fw)).unwrap().matrix;
        let kg = rank_and_nullspace(&b, &pol()).unwrap().null_basis;
        let kk = rank_and_nullspace(&bk, &pol()).unwrap().null_basis;
        let rel = subspace_relation(&kk, &kg, &pol()).unwrap();
        if matches!(rel, SubspaceRelation::Equal | SubspaceRelation::ASubsetB) {
            ok += 1;
        }
    }
    outcome(ok == 200, format!("Ker B_K within Ker B_G on {ok}/200 frameworks (including 50 heterogeneous)"))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut worst, mut ratio_lo, mut ratio_hi) = (0.0f64, f64::INFINITY, 0.0f64);
    let mut spaces: Vec<Option<MetricSpace>> = homogeneous_spaces().into_iter().map(Some).collect();
    spaces.push(None);
    for (count, s) in spaces.iter().enumerate() {
        for t in 0..50 {
            let n = rng.gen_range(3..=6);
            let seed = 600 + 100 * count as u64 + t;
            let fw = match s {
                Some(s) => random_homogeneous(*s, n, density(n, s.has_orientation(), &mut rng), seed),
                None => random_mixed(n, seed, &mut rng),
            };
            let rep = natural_representation(&fw);
            let deltas = random_variations(&fw, rep, 20, seed).unwrap();
            let max = |h: f64| fd_jacobian_errors(&fw, rep, &deltas, h).unwrap().into_iter().fold(0.0, f64::max);
            worst = worst.max(max(1e-6));
            let ratio = max(1e-4) / max(1e-5);
            ratio_lo = ratio_lo.min(ratio);
            ratio_hi = ratio_hi.max(ratio);
        }
    }
    let pass = worst <= 1e-5 && ratio_lo >= 5.0 && ratio_hi <= 20.0;
    outcome(pass, format!("max rel. error {worst:.2e} at h=1e-6; err(1e-4)/err(1e-5) in [{ratio_lo:.2}, {ratio_hi:.2}] over {} frameworks", 50 * spaces.len()))
}

fn criterion_7() -> Outcome {
    let mut failures = Vec::new();
    for seed in 0..20 {
        let fw = hetero_case_study(seed).unwrap();
        let k = fw.with_graph(complete_graph(fw.graph())).unwrap();
        let b = unified_rigidity_matrix(&k).unwrap();
        let h = hetero_kernel_analysis(&fw, &pol()).unwrap();
        let (g1, g2) = case_study_subgraphs(&fw);
        let got = (
            b.nrows(),
            b.ncols(),
            h.zero_columns.len(),
            h.verdict.complete_rank,
            h.verdict.complete_nullity,
            h.trivial.dim(),
            h.virtual_variations.dim(),
            ibr_verdict(&g1, &pol()).unwrap().is_ibr(),
            ibr_verdict(&g2, &pol()).unwrap().is_ibr(),
            h.verdict.is_ibr(),
        );
        if got != (36, 24, 6, 13, 11, 5, 6, false, false, true) {
            failures.push(format!("seed {seed}: {got:?}"));
        }
    }
    let detail = if failures.is_empty() {
        "20/20 placements: 36x24, 6 zero columns, rank 13, nullity 11, dim S_t 5, dim S_v 6, G1/G2 IBF, K IBR".to_string()
    } else {
        failures.join("; ")
    };
    outcome(failures.is_empty(), detail)
}

fn criterion_8() -> Outcome {
    let tilted = Vector3::new(1.0, 2.0, 2.0) / 3.0;
    let cases: Vec<(&str, MetricSpace, Vector3<f64>, bool)> = vec![
        ("R2", MetricSpace::rd(2).unwrap(), Vector3::new(0.6, 0.8, 0.0), false),
        ("R3", MetricSpace::rd(3).unwrap(), tilted, false),
        ("R2xS1 (i)", MetricSpace::rd_s1(2, None).unwrap(), Vector3::x(), false),
        ("R3xS1 (i)", MetricSpace::rd_s1(3, Some(Vector3::z())).unwrap(), Vector3::x(), false),
        ("R3xS1 (ii)", MetricSpace::rd_s1(3, Some(tilted)).unwrap(), tilted, true),
        ("SE3", MetricSpace::Se3, tilted, false),
    ];
    let mut failures = Vec::new();
    for (label, s, dir, along) in &cases {
        for n in 3..=6 {
            let spec = GeneratorSpec::homogeneous(*s, n, 1.0, 800 + n as u64).with_placement(Placement::Collinear(*dir));
            let fw = random_framework(&spec).unwrap();
            let got = ibr_verdict(&fw, &pol()).unwrap().complete_nullity;
            let want = degenerate_trivial_dim(s, n, *along).unwrap();
            if got != want {
                failures.push(format!("{label} n={n}: {got} != {want}"));
            }
        }
    }
    let detail = if failures.is_empty() { format!("{} collinear cases match", cases.len() * 4) } else { failures.join("; ") };
    outcome(failures.is_empty(), detail)
}

fn criterion_9() -> Outcome {
    let cyc = ibr_verdict(&fixture("square-cycle-r2").unwrap(), &pol()).unwrap();
    let diag = ibr_verdict(&fixture("square-diagonal-r2").unwrap(), &pol()).unwrap();
    let (aug, added) = augment_to_ibr(&fixture("square-cycle-r2").unwrap(), &pol()).unwrap();
    let aug_ibr = ibr_verdict(&aug, &pol()).unwrap().is_ibr();
    let pass = cyc.rank == 4 && !cyc.is_ibr() && diag.rank == 5 && diag.is_ibr() && added.len() == 1 && aug_ibr;
    outcome(
        pass,
        format!("4-cycle rank {} ({}), with diagonal rank {} ({}), augmentation added {} edge(s)", cyc.rank, cyc.classification, diag.rank, diag.classification, added.len()),
    )
}

fn transformed(fw: &Framework, shift: Vector3<f64>, scale: f64) -> Framework {
    let states = fw
        .states()
        .iter()
        .enumerate()
        .map(|(i, st)| {
            let mut p = st.position * scale + shift;
            if fw.space(i).is_planar() {
                p.z = 0.0;
            }
            AgentState { position: p, orientation: st.orientation }
        })
        .collect();
    fw.with_states(states).unwrap()
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let spaces = homogeneous_spaces();
    let mut ok = 0;
    let total = 60;
    for k in 0..total {
        let s = spaces[k % spaces.len()];
        let fw = random_homogeneous(s, 5, density(5, s.has_orientation(), &mut rng), 1000 + k as u64);
        let shift = Vector3::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let scale = if matches!(s, MetricSpace::Rd { .. }) { rng.gen_range(0.2..5.0) } else { 1.0 };
        let copy = transformed(&fw, shift, scale);
        if bearing_equivalent(&fw, &copy, &pol()).unwrap() && bearing_congruent(&fw, &copy, &pol()).unwrap() {
            ok += 1;
        }
    }
    let (sq, rect) = be_not_bc_pair().unwrap();
    let be = bearing_equivalent(&sq, &rect, &pol()).unwrap();
    let bc = bearing_congruent(&sq, &rect, &pol()).unwrap();
    outcome(ok == total && be && !bc, format!("{ok}/{total} translated/scaled copies BE and BC; square vs rectangle BE={be} BC={bc}"))
}

fn masked(m: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), cols.len(), |r, c| m[(r, cols[c])])
}

fn criterion_11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let fw = random_homogeneous(MetricSpace::Se3, rng.gen_range(3..=6), density(6, true, &mut rng).max(0.5), 1100 + k);
        let diff = rigidity_matrix(&fw).unwrap().matrix - unified_rigidity_matrix(&fw).unwrap().matrix;
        worst = worst.max(diff.amax());
    }
    let mut mismatches = 0;
    let others: Vec<MetricSpace> = homogeneous_spaces().into_iter().filter(|s| *s != MetricSpace::Se3).collect();
    for (k, s) in others.iter().cycle().take(50).enumerate() {
        let n = rng.gen_range(3..=6);
        let fw = random_homogeneous(*s, n, density(n, s.has_orientation(), &mut rng), 1200 + k as u64);
        let per = rank_and_nullspace(&rigidity_matrix(&fw).unwrap().matrix, &pol()).unwrap();
        let uni = masked(&unified_rigidity_matrix(&fw).unwrap().matrix, &unified_controllable_columns(&fw));
        let un = rank_and_nullspace(&uni, &pol()).unwrap();
        if (per.rank, per.nullity()) != (un.rank, un.nullity()) {
            mismatches += 1;
        }
    }
    outcome(
        worst <= 1e-12 && mismatches == 0,
        format!("SE3 max |unified - per-space| = {worst:.1e}; R^d / R^dxS1 rank+nullity mismatches after masking: {mismatches}/50"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("complete-graph rank, R^d", criterion_1),
        ("complete-graph rank, R^dxS1 and SE3", criterion_2),
        ("rank test equals kernel test", criterion_3),
        ("trivial space annihilated", criterion_4),
        ("kernel inclusion", criterion_5),
        ("finite-difference Jacobian", criterion_6),
        ("heterogeneous case study", criterion_7),
        ("degenerate dimensions", criterion_8),
        ("square-cycle exemplar", criterion_9),
        ("BE/BC semantics", criterion_10),
        ("unified vs per-space", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {:>2}. {name}: {}", i + 1, o.detail);
        failed += (!o.pass) as usize;
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
