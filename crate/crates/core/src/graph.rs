//! Sensing graphs and the incidence matrices that rigidity matrices are
//! assembled from.
//!
//! Vertices are 0-based internally; the JSON boundary uses 1-based indices.
//! An edge `(head, tail)` means agent `head` measures the bearing of agent
//! `tail`. Edge lists are always kept in lexicographic `(head, tail)` order,
//! which fixes the row order of every matrix built from the graph.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Undirected,
    Directed,
    Oriented,
}

impl GraphKind {
    /// Directed and oriented graphs carry a sign per edge; undirected ones do not.
    pub fn has_direction(self) -> bool {
        !matches!(self, GraphKind::Undirected)
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GraphKind::Undirected => "undirected",
            GraphKind::Directed => "directed",
            GraphKind::Oriented => "oriented",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub head: usize,
    pub tail: usize,
}

impl Edge {
    pub const fn new(head: usize, tail: usize) -> Self {
        Self { head, tail }
    }

    pub fn reversed(self) -> Self {
        Self::new(self.tail, self.head)
    }

    fn normalized(self) -> Self {
        if self.head <= self.tail {
            self
        } else {
            self.reversed()
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.head + 1, self.tail + 1)
    }
}

/// Vertex/edge structure of a formation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensingGraph {
    n: usize,
    edges: Vec<Edge>,
    kind: GraphKind,
}

impl SensingGraph {
    /// Builds a graph, normalizing undirected edges to `head < tail` and
    /// sorting into canonical order.
    ///
    /// Rejects self-loops, out-of-range vertices, duplicates (up to reversal
    /// for undirected and oriented graphs) and `n < 3`.
    pub fn new(n: usize, edges: impl IntoIterator<Item = Edge>, kind: GraphKind) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidGraph(format!("need at least 3 vertices, got {n}")));
        }
        let mut out: Vec<Edge> = Vec::new();
        for e in edges {
            if e.head >= n || e.tail >= n {
                return Err(Error::InvalidGraph(format!("edge {e} references a vertex outside 1..={n}")));
            }
            if e.head == e.tail {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {}", e.head + 1)));
            }
            out.push(if kind == GraphKind::Undirected { e.normalized() } else { e });
        }
        out.sort_unstable();

        let mut seen = std::collections::HashSet::with_capacity(out.len());
        for e in &out {
            let key = if kind == GraphKind::Directed { *e } else { e.normalized() };
            if !seen.insert(key) {
                return Err(Error::InvalidGraph(format!("duplicate edge {e}")));
            }
        }
        Ok(Self { n, edges: out, kind })
    }

    /// Convenience constructor from 0-based `(head, tail)` pairs.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)], kind: GraphKind) -> Result<Self> {
        Self::new(n, pairs.iter().map(|&(h, t)| Edge::new(h, t)), kind)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn contains(&self, e: Edge) -> bool {
        let probe = if self.kind == GraphKind::Undirected { e.normalized() } else { e };
        match self.kind {
            GraphKind::Directed | GraphKind::Undirected => self.edges.binary_search(&probe).is_ok(),
            GraphKind::Oriented => {
                self.edges.binary_search(&e).is_ok() || self.edges.binary_search(&e.reversed()).is_ok()
            }
        }
    }

    /// Returns a copy with `extra` appended (then re-sorted).
    pub fn with_edges(&self, extra: &[Edge]) -> Result<Self> {
        Self::new(self.n, self.edges.iter().chain(extra).copied(), self.kind)
    }

    /// Subgraph keeping only the edges accepted by `keep`.
    pub fn filter_edges(&self, mut keep: impl FnMut(&Edge) -> bool) -> Self {
        Self {
            n: self.n,
            edges: self.edges.iter().copied().filter(|e| keep(e)).collect(),
            kind: self.kind,
        }
    }

    /// Number of weakly connected components.
    pub fn component_count(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut components = self.n;
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e.head), find(&mut parent, e.tail));
            if a != b {
                parent[a] = b;
                components -= 1;
            }
        }
        components
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() == 1
    }
}

/// The complete graph on the same vertex set and of the same kind.
///
/// Directed graphs get both directions of every pair; undirected and
/// oriented graphs get one edge per pair, oriented `i < j`.
pub fn complete_graph(g: &SensingGraph) -> SensingGraph {
    let n = g.n;
    let edges: Vec<Edge> = match g.kind {
        GraphKind::Directed => (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| Edge::new(i, j)))
            .collect(),
        GraphKind::Undirected | GraphKind::Oriented => {
            (0..n).flat_map(|i| (i + 1..n).map(move |j| Edge::new(i, j))).collect()
        }
    };
    SensingGraph { n, edges, kind: g.kind }
}

/// Turns an undirected graph into an oriented one using the `i < j` direction.
pub fn orient(g: &SensingGraph) -> Result<SensingGraph> {
    if g.kind != GraphKind::Undirected {
        return Err(Error::InvalidGraph(format!("cannot orient a {} graph", g.kind)));
    }
    // undirected edges are already stored with head < tail
    Ok(SensingGraph { n: g.n, edges: g.edges.clone(), kind: GraphKind::Oriented })
}

/// Incidence matrix `E`, its outgoing-only restriction `E_out`, and their
/// Kronecker expansions with `I_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceMatrices {
    pub d: usize,
    pub e: DMatrix<f64>,
    pub e_out: DMatrix<f64>,
    pub e_bar: DMatrix<f64>,
    pub e_out_bar: DMatrix<f64>,
}

pub fn incidence_matrices(g: &SensingGraph, d: usize) -> Result<IncidenceMatrices> {
    if !g.kind.has_direction() {
        return Err(Error::InvalidGraph("incidence matrices need a directed or oriented graph; orient it first".into()));
    }
    if d == 0 {
        return Err(Error::InvalidArgument("block dimension must be at least 1".into()));
    }
    let (n, m) = (g.n, g.m());
    let mut e = DMatrix::zeros(n, m);
    let mut e_out = DMatrix::zeros(n, m);
    for (k, edge) in g.edges.iter().enumerate() {
        e[(edge.head, k)] = -1.0;
        e[(edge.tail, k)] = 1.0;
        e_out[(edge.head, k)] = -1.0;
    }
    let id = DMatrix::<f64>::identity(d, d);
    let e_bar = e.kronecker(&id);
    let e_out_bar = e_out.kronecker(&id);
    Ok(IncidenceMatrices { d, e, e_out, e_bar, e_out_bar })
}
