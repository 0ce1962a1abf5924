//! Full analysis of one framework, and batch analysis over a directory.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::agents::{is_non_degenerate, Framework, SpaceAssignment};
use crate::error::{Error, Result};
use crate::graph::GraphKind;
use crate::io::read_framework;
use crate::numeric::{rank, TolerancePolicy};
use crate::rigidity::{
    fd_jacobian_check, hetero_kernel_analysis, ibr_verdict, implied_properties, natural_representation, rigidity_matrix,
    unified_rigidity_matrix, Representation, RigidityMatrix, RigidityVerdict, VariationLabel,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions {
    pub tolerance: TolerancePolicy,
    pub seed: u64,
    pub fd_trials: usize,
    /// Adds wall-clock timing, which makes reports non-reproducible.
    pub timing: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self { tolerance: TolerancePolicy::default(), seed: 0, fd_trials: 20, timing: false }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FrameworkSummary {
    /// One label for homogeneous frameworks, one per agent otherwise.
    pub space: Vec<String>,
    pub heterogeneous: bool,
    pub n: usize,
    pub m: usize,
    pub graph_kind: GraphKind,
    pub degenerate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collinear_direction: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixSummary {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub nullity: usize,
    pub zero_columns: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubspaceSummary {
    pub dim: usize,
    pub labels: Vec<VariationLabel>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Subspaces {
    pub trivial: SubspaceSummary,
    #[serde(rename = "virtual")]
    pub virtual_variations: SubspaceSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct FdSummary {
    pub representation: Representation,
    pub trials: usize,
    pub seed: u64,
    pub step: f64,
    pub max_relative_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub framework: FrameworkSummary,
    pub tolerance: TolerancePolicy,
    pub verdict: RigidityVerdict,
    pub implied: Vec<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_space_matrix: Option<MatrixSummary>,
    pub unified_matrix: MatrixSummary,
    /// Computed on the unified matrix of the complete graph.
    pub subspaces: Subspaces,
    pub fd_check: FdSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

/// The report plus the matrices it summarizes, for export.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub report: AnalysisReport,
    pub per_space: Option<RigidityMatrix>,
    pub unified: RigidityMatrix,
}

fn summarize(b: &RigidityMatrix, pol: &TolerancePolicy) -> Result<MatrixSummary> {
    let r = rank(&b.matrix, pol)?;
    Ok(MatrixSummary {
        rows: b.nrows(),
        cols: b.ncols(),
        rank: r,
        nullity: b.ncols() - r,
        zero_columns: b.zero_columns(pol.rank_rtol).len(),
    })
}

pub fn analyze(fw: &Framework, opts: &AnalysisOptions) -> Result<Analysis> {
    let start = Instant::now();
    let pol = &opts.tolerance;
    pol.validate()?;
    let deg = is_non_degenerate(fw, pol);
    let space = match fw.spaces() {
        SpaceAssignment::Homogeneous(s) => vec![s.label()],
        SpaceAssignment::Heterogeneous(list) => list.iter().map(|s| s.label()).collect(),
    };
    let framework = FrameworkSummary {
        space,
        heterogeneous: fw.is_heterogeneous(),
        n: fw.n(),
        m: fw.graph().m(),
        graph_kind: fw.graph().kind(),
        degenerate: !deg.non_degenerate,
        collinear_direction: deg.direction.map(Into::into),
    };

    let per_space = if fw.is_heterogeneous() { None } else { Some(rigidity_matrix(fw)?) };
    let unified = unified_rigidity_matrix(fw)?;
    let per_space_matrix = per_space.as_ref().map(|b| summarize(b, pol)).transpose()?;
    let unified_matrix = summarize(&unified, pol)?;

    let hetero = hetero_kernel_analysis(fw, pol)?;
    let verdict = if fw.is_heterogeneous() { hetero.verdict.clone() } else { ibr_verdict(fw, pol)? };
    let subspaces = Subspaces {
        trivial: SubspaceSummary { dim: hetero.trivial.dim(), labels: hetero.trivial.labels.clone() },
        virtual_variations: SubspaceSummary {
            dim: hetero.virtual_variations.dim(),
            labels: hetero.virtual_variations.labels.clone(),
        },
    };

    let rep = natural_representation(fw);
    let max_err = fd_jacobian_check(fw, rep, opts.fd_trials, pol, opts.seed)?;
    if !max_err.is_finite() {
        return Err(Error::NonFinite("finite-difference check"));
    }
    let fd_check = FdSummary { representation: rep, trials: opts.fd_trials, seed: opts.seed, step: pol.fd_step, max_relative_error: max_err };

    let report = AnalysisReport {
        schema_version: SCHEMA_VERSION,
        framework,
        tolerance: *pol,
        implied: implied_properties(fw.homogeneous_space(), verdict.classification),
        verdict,
        per_space_matrix,
        unified_matrix,
        subspaces,
        fd_check,
        timing_ms: opts.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
    };
    Ok(Analysis { report, per_space, unified })
}

pub fn report_json(report: &AnalysisReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

/// One line of the batch summary table.
#[derive(Debug, Clone, Serialize)]
pub struct BatchRow {
    pub file: String,
    pub space: String,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub rank: Option<usize>,
    pub expected: Option<usize>,
    pub classification: Option<String>,
    pub error: Option<String>,
}

impl BatchRow {
    pub fn is_error(&self) -> bool {
        self.error.is_some()
    }

    pub fn header() -> &'static str {
        "file\tspace\tn\tm\trank\texpected\tclassification"
    }

    pub fn to_tsv(&self) -> String {
        let opt = |v: Option<usize>| v.map_or_else(|| "-".to_string(), |x| x.to_string());
        let class = match (&self.classification, &self.error) {
            (_, Some(e)) => format!("ERROR: {e}"),
            (Some(c), None) => c.clone(),
            (None, None) => "-".into(),
        };
        format!("{}\t{}\t{}\t{}\t{}\t{}\t{}", self.file, self.space, opt(self.n), opt(self.m), opt(self.rank), opt(self.expected), class)
    }
}

fn batch_row(path: &Path, opts: &AnalysisOptions) -> BatchRow {
    let file = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    let result = read_framework(path).and_then(|fw| analyze(&fw, opts));
    match result {
        Ok(a) => {
            let r = a.report;
            BatchRow {
                file,
                space: r.framework.space.join("+"),
                n: Some(r.framework.n),
                m: Some(r.framework.m),
                rank: Some(r.verdict.rank),
                expected: Some(r.verdict.expected_rank),
                classification: Some(r.verdict.classification.to_string()),
                error: None,
            }
        }
        Err(e) => BatchRow { file, space: "-".into(), n: None, m: None, rank: None, expected: None, classification: None, error: Some(e.to_string()) },
    }
}

/// Analyzes every `*.json` file of `dir` in parallel; rows are ordered by
/// file name.
pub fn batch_analyze(dir: &Path, opts: &AnalysisOptions) -> Result<Vec<BatchRow>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files.par_iter().map(|p| batch_row(p, opts)).collect())
}
