//! Finite k-colored multigraphs with factorization squares (finite k-graph skeletons),
//! their structural validation and JSON format.

use crate::degree::Degree;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;

pub type VertexId = usize;
pub type EdgeId = usize;

/// Raw JSON document for a graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub k: usize,
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeSpec>,
    #[serde(default)]
    pub squares: Vec<SquareSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub id: String,
    /// 1-based color.
    pub color: usize,
    pub source: String,
    pub range: String,
}

/// One factorization square. `outer_inner: [f, g]` denotes the path `f∘g`
/// (g traversed first) with `color(f) < color(g)`; it equals
/// `equals_outer_inner: [g2, f2]`, the same morphism written color-descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareSpec {
    pub outer_inner: [String; 2],
    pub equals_outer_inner: [String; 2],
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub id: String,
    pub color: usize,
    pub source: VertexId,
    pub range: VertexId,
}

/// A finite k-graph skeleton: colored edges plus the square bijections that
/// generate the factorization rules.
#[derive(Debug, Clone)]
pub struct KGraph {
    pub k: usize,
    vertices: Vec<String>,
    vindex: HashMap<String, VertexId>,
    edges: Vec<Edge>,
    eindex: HashMap<String, EdgeId>,
    /// `range_edges[v][i-1]` = edges of color i with range v (the set vΛ^{e_i}).
    range_edges: Vec<Vec<Vec<EdgeId>>>,
    /// Ascending pair (f, g) for the path f∘g (color f < color g) -> (g2, f2).
    square_fwd: HashMap<(EdgeId, EdgeId), (EdgeId, EdgeId)>,
    /// Descending pair (g2, f2) -> (f, g).
    square_rev: HashMap<(EdgeId, EdgeId), (EdgeId, EdgeId)>,
    spec: GraphSpec,
}

impl PartialEq for KGraph {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl KGraph {
    pub fn from_spec(spec: GraphSpec) -> Result<KGraph> {
        if spec.k == 0 {
            return Err(Error::Structure("k must be at least 1".into()));
        }
        let mut vindex = HashMap::new();
        for (i, v) in spec.vertices.iter().enumerate() {
            if vindex.insert(v.clone(), i).is_some() {
                return Err(Error::Structure(format!("duplicate vertex id `{v}`")));
            }
        }
        let mut edges = Vec::with_capacity(spec.edges.len());
        let mut eindex = HashMap::new();
        for (i, e) in spec.edges.iter().enumerate() {
            if e.color == 0 || e.color > spec.k {
                return Err(Error::Structure(format!(
                    "edge `{}` has color {} outside 1..={}",
                    e.id, e.color, spec.k
                )));
            }
            let source = *vindex.get(&e.source).ok_or_else(|| {
                Error::Structure(format!("edge `{}` has dangling source `{}`", e.id, e.source))
            })?;
            let range = *vindex.get(&e.range).ok_or_else(|| {
                Error::Structure(format!("edge `{}` has dangling range `{}`", e.id, e.range))
            })?;
            if eindex.insert(e.id.clone(), i).is_some() {
                return Err(Error::Structure(format!("duplicate edge id `{}`", e.id)));
            }
            edges.push(Edge {
                id: e.id.clone(),
                color: e.color,
                source,
                range,
            });
        }
        let mut range_edges = vec![vec![Vec::new(); spec.k]; spec.vertices.len()];
        for (i, e) in edges.iter().enumerate() {
            range_edges[e.range][e.color - 1].push(i);
        }
        let mut square_fwd = HashMap::new();
        let mut square_rev = HashMap::new();
        for sq in &spec.squares {
            let look = |id: &String| -> Result<EdgeId> {
                eindex
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::Structure(format!("square references unknown edge `{id}`")))
            };
            let f = look(&sq.outer_inner[0])?;
            let g = look(&sq.outer_inner[1])?;
            let g2 = look(&sq.equals_outer_inner[0])?;
            let f2 = look(&sq.equals_outer_inner[1])?;
            // Malformed entries (bad colors/endpoints, duplicates) are kept out of the
            // lookup tables; validate_graph reports them.
            if edges[f].color < edges[g].color && edges[g2].color > edges[f2].color {
                square_fwd.entry((f, g)).or_insert((g2, f2));
                square_rev.entry((g2, f2)).or_insert((f, g));
            }
        }
        Ok(KGraph {
            k: spec.k,
            vertices: spec.vertices.clone(),
            vindex,
            edges,
            eindex,
            range_edges,
            square_fwd,
            square_rev,
            spec,
        })
    }

    pub fn spec(&self) -> &GraphSpec {
        &self.spec
    }

    pub fn from_json_str(s: &str) -> Result<KGraph> {
        let spec: GraphSpec = serde_json::from_str(s)?;
        KGraph::from_spec(spec)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.spec).expect("graph spec serializes")
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertices[v]
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertices
    }

    pub fn vertex(&self, name: &str) -> Option<VertexId> {
        self.vindex.get(name).copied()
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn edge_by_id(&self, id: &str) -> Option<EdgeId> {
        self.eindex.get(id).copied()
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> {
        0..self.edges.len()
    }

    /// The set vΛ^{e_i} of color-i edges with range v (1-based color).
    pub fn range_edges(&self, v: VertexId, color: usize) -> &[EdgeId] {
        &self.range_edges[v][color - 1]
    }

    /// All edges with range v (vΛ^1 for a 1-graph; union over colors otherwise).
    pub fn all_range_edges(&self, v: VertexId) -> Vec<EdgeId> {
        (1..=self.k)
            .flat_map(|c| self.range_edges(v, c).iter().copied())
            .collect()
    }

    pub fn square_fwd(&self, f: EdgeId, g: EdgeId) -> Option<(EdgeId, EdgeId)> {
        self.square_fwd.get(&(f, g)).copied()
    }

    pub fn square_rev(&self, g2: EdgeId, f2: EdgeId) -> Option<(EdgeId, EdgeId)> {
        self.square_rev.get(&(g2, f2)).copied()
    }

    pub fn degree_of_color(&self, color: usize) -> Degree {
        Degree::unit(self.k, color)
    }

    /// Axiom validation. An empty report means the graph is a valid k-graph skeleton.
    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        self.check_squares(&mut issues);
        self.check_local_convexity(&mut issues);
        if self.k >= 3 && issues.is_empty() {
            self.check_cubes(&mut issues);
        }
        ValidationReport { issues }
    }

    fn check_squares(&self, issues: &mut Vec<Issue>) {
        // Re-scan the raw entries for malformed ones and duplicates.
        let mut seen_fwd: HashMap<(EdgeId, EdgeId), usize> = HashMap::new();
        for sq in &self.spec.squares {
            let ids: Vec<Option<EdgeId>> = sq
                .outer_inner
                .iter()
                .chain(sq.equals_outer_inner.iter())
                .map(|id| self.edge_by_id(id))
                .collect();
            let (f, g, g2, f2) = match (ids[0], ids[1], ids[2], ids[3]) {
                (Some(a), Some(b), Some(c), Some(d)) => (a, b, c, d),
                _ => continue, // unknown ids are a structural error caught at load
            };
            let (ef, eg, eg2, ef2) = (self.edge(f), self.edge(g), self.edge(g2), self.edge(f2));
            let well_formed = ef.color < eg.color
                && eg2.color == eg.color
                && ef2.color == ef.color
                && ef.source == eg.range
                && eg2.source == ef2.range
                && eg2.range == ef.range
                && ef2.source == eg.source;
            if !well_formed {
                issues.push(Issue::SquareMalformed {
                    entry: format!(
                        "[{},{}] = [{},{}]",
                        ef.id, eg.id, eg2.id, ef2.id
                    ),
                });
                continue;
            }
            *seen_fwd.entry((f, g)).or_insert(0) += 1;
        }
        for ((f, g), n) in &seen_fwd {
            if *n > 1 {
                issues.push(Issue::SquareDuplicate {
                    f: self.edge(*f).id.clone(),
                    g: self.edge(*g).id.clone(),
                });
            }
        }
        // Totality: every composable ascending pair must have an entry.
        for f in self.edge_ids() {
            for g in self.edge_ids() {
                let (ef, eg) = (self.edge(f), self.edge(g));
                if ef.color < eg.color && ef.source == eg.range && !self.square_fwd.contains_key(&(f, g)) {
                    issues.push(Issue::SquareNotTotal {
                        f: ef.id.clone(),
                        g: eg.id.clone(),
                    });
                }
            }
        }
        // Bijectivity: the forward map must be injective and cover every composable
        // descending pair exactly once.
        let mut image_count: HashMap<(EdgeId, EdgeId), usize> = HashMap::new();
        for (_, im) in &self.square_fwd {
            *image_count.entry(*im).or_insert(0) += 1;
        }
        for g2 in self.edge_ids() {
            for f2 in self.edge_ids() {
                let (eg2, ef2) = (self.edge(g2), self.edge(f2));
                if eg2.color > ef2.color && eg2.source == ef2.range {
                    let n = image_count.get(&(g2, f2)).copied().unwrap_or(0);
                    if n != 1 {
                        issues.push(Issue::SquareNotBijective {
                            g2: eg2.id.clone(),
                            f2: ef2.id.clone(),
                            hits: n,
                        });
                    }
                }
            }
        }
    }

    fn check_local_convexity(&self, issues: &mut Vec<Issue>) {
        for v in 0..self.num_vertices() {
            for i in 1..=self.k {
                for j in (i + 1)..=self.k {
                    if self.range_edges(v, i).is_empty() || self.range_edges(v, j).is_empty() {
                        continue;
                    }
                    for &mu in self.range_edges(v, i) {
                        if self.range_edges(self.edge(mu).source, j).is_empty() {
                            issues.push(Issue::NotLocallyConvex {
                                vertex: self.vertex_name(v).into(),
                                edge: self.edge(mu).id.clone(),
                                missing_color: j,
                            });
                        }
                    }
                    for &mu in self.range_edges(v, j) {
                        if self.range_edges(self.edge(mu).source, i).is_empty() {
                            issues.push(Issue::NotLocallyConvex {
                                vertex: self.vertex_name(v).into(),
                                edge: self.edge(mu).id.clone(),
                                missing_color: i,
                            });
                        }
                    }
                }
            }
        }
    }

    /// Sort a composable word into color-ascending order by square moves.
    /// `leftmost` picks which inversion to resolve first; any choice must agree
    /// for the graph to be a k-graph (associativity / cube condition).
    pub(crate) fn sort_word(&self, word: &[EdgeId], leftmost: bool) -> Result<Vec<EdgeId>> {
        let mut w = word.to_vec();
        loop {
            let mut positions: Vec<usize> = (0..w.len().saturating_sub(1))
                .filter(|&i| self.edge(w[i]).color > self.edge(w[i + 1]).color)
                .collect();
            if positions.is_empty() {
                return Ok(w);
            }
            let i = if leftmost {
                positions.remove(0)
            } else {
                positions.pop().unwrap()
            };
            let (g2, f2) = (w[i], w[i + 1]);
            let (f, g) = self.square_rev(g2, f2).ok_or_else(|| {
                Error::MissingSquare(self.edge(g2).id.clone(), self.edge(f2).id.clone())
            })?;
            w[i] = f;
            w[i + 1] = g;
        }
    }

    fn check_cubes(&self, issues: &mut Vec<Issue>) {
        // For every composable 3-letter word with strictly descending colors, the
        // two extremal reduction strategies must give the same ascending word.
        for x in self.edge_ids() {
            for y in self.edge_ids() {
                for z in self.edge_ids() {
                    let (ex, ey, ez) = (self.edge(x), self.edge(y), self.edge(z));
                    if !(ex.color > ey.color && ey.color > ez.color) {
                        continue;
                    }
                    if ex.source != ey.range || ey.source != ez.range {
                        continue;
                    }
                    let a = self.sort_word(&[x, y, z], true).ok();
                    let b = self.sort_word(&[x, y, z], false).ok();
                    if a != b || a.is_none() {
                        issues.push(Issue::CubeInconsistent {
                            word: format!("{}∘{}∘{}", ex.id, ey.id, ez.id),
                        });
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Issue {
    SquareMalformed { entry: String },
    SquareDuplicate { f: String, g: String },
    SquareNotTotal { f: String, g: String },
    SquareNotBijective { g2: String, f2: String, hits: usize },
    NotLocallyConvex { vertex: String, edge: String, missing_color: usize },
    CubeInconsistent { word: String },
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::SquareMalformed { entry } => {
                write!(f, "square table entry malformed: {entry}")
            }
            Issue::SquareDuplicate { f: a, g } => {
                write!(f, "square table has duplicate entries for ({a}, {g})")
            }
            Issue::SquareNotTotal { f: a, g } => {
                write!(f, "square table not total: missing pair ({a}, {g})")
            }
            Issue::SquareNotBijective { g2, f2, hits } => write!(
                f,
                "square table not bijective: descending pair ({g2}, {f2}) hit {hits} times"
            ),
            Issue::NotLocallyConvex { vertex, edge, missing_color } => write!(
                f,
                "not locally convex at `{vertex}`: edge `{edge}` has no color-{missing_color} continuation"
            ),
            Issue::CubeInconsistent { word } => {
                write!(f, "cube consistency fails for word {word}")
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            writeln!(f, "graph is valid")
        } else {
            for issue in &self.issues {
                writeln!(f, "FAIL {issue}")?;
            }
            Ok(())
        }
    }
}
