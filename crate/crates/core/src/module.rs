//! Finite-dimensional matrix modules: one complex matrix per edge, subject to
//! the per-vertex stacked-isometry identity and square compatibility.

use crate::degree::Degree;
use crate::error::{Error, Result};
use crate::graph::{EdgeId, GraphSpec, KGraph, VertexId};
use crate::linalg::{frobenius, random_isometry, CMat, C};
use crate::path::{paths_le, Path};
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// Vertex-indexed dimension vector.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DimensionVector(pub Vec<usize>);

impl DimensionVector {
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn add(&self, other: &DimensionVector) -> DimensionVector {
        assert_eq!(self.0.len(), other.0.len());
        DimensionVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Display for DimensionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, ")")
    }
}

/// A matrix module: for each edge λ a matrix `A_λ : H_{r(λ)} → H_{s(λ)}` of
/// shape `d_{s(λ)} × d_{r(λ)}`.
#[derive(Clone, Debug)]
pub struct MatrixModule {
    graph: Arc<KGraph>,
    dims: DimensionVector,
    mats: Vec<CMat>,
}

impl MatrixModule {
    pub fn new(graph: Arc<KGraph>, dims: DimensionVector, mats: Vec<CMat>) -> Result<MatrixModule> {
        if dims.0.len() != graph.num_vertices() {
            return Err(Error::Shape(format!(
                "dimension vector has {} entries for {} vertices",
                dims.0.len(),
                graph.num_vertices()
            )));
        }
        if mats.len() != graph.num_edges() {
            return Err(Error::Shape(format!(
                "{} matrices for {} edges",
                mats.len(),
                graph.num_edges()
            )));
        }
        for e in graph.edge_ids() {
            let edge = graph.edge(e);
            let want = (dims.0[edge.source], dims.0[edge.range]);
            let got = (mats[e].nrows(), mats[e].ncols());
            if want != got {
                return Err(Error::Shape(format!(
                    "matrix for edge `{}` has shape {}×{}, expected {}×{}",
                    edge.id, got.0, got.1, want.0, want.1
                )));
            }
        }
        Ok(MatrixModule { graph, dims, mats })
    }

    pub fn graph(&self) -> &Arc<KGraph> {
        &self.graph
    }

    pub fn dims(&self) -> &DimensionVector {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.dims.total()
    }

    pub fn mat(&self, e: EdgeId) -> &CMat {
        &self.mats[e]
    }

    /// Offset of the vertex block inside ⊕_v H_v.
    pub fn offset(&self, v: VertexId) -> usize {
        self.dims.0[..v].iter().sum()
    }

    /// `A_p = A_{e_N} ··· A_{e_1}` for `p = e_1∘…∘e_N` (outermost edge applied
    /// first); the identity for a vertex path.
    pub fn path_operator(&self, p: &Path) -> CMat {
        let mut acc = CMat::identity(self.dims.0[p.range()], self.dims.0[p.range()]);
        for &e in p.edges() {
            acc = &self.mats[e] * acc;
        }
        acc
    }

    /// Edge operator embedded as a D×D block matrix on ⊕_v H_v.
    pub fn embedded_edge(&self, e: EdgeId) -> CMat {
        let d = self.total_dim();
        let edge = self.graph.edge(e);
        let mut out = CMat::zeros(d, d);
        let (ro, co) = (self.offset(edge.source), self.offset(edge.range));
        out.view_mut((ro, co), self.mats[e].shape()).copy_from(&self.mats[e]);
        out
    }

    /// Vertex projection P_v embedded as a D×D block matrix.
    pub fn vertex_projection(&self, v: VertexId) -> CMat {
        let d = self.total_dim();
        let mut out = CMat::zeros(d, d);
        let o = self.offset(v);
        for i in 0..self.dims.0[v] {
            out[(o + i, o + i)] = Complex::new(1.0, 0.0);
        }
        out
    }

    /// Verify the module axioms and the derived stacked-isometry identity for
    /// all degrees with 1-norm ≤ 3.
    pub fn check(&self) -> ModuleReport {
        let g = &self.graph;
        let mut report = ModuleReport::default();
        for v in 0..g.num_vertices() {
            let dv = self.dims.0[v];
            for color in 1..=g.k {
                let edges = g.range_edges(v, color);
                if edges.is_empty() {
                    continue;
                }
                let mut acc = CMat::zeros(dv, dv);
                for &e in edges {
                    acc += self.mats[e].adjoint() * &self.mats[e];
                }
                let res = frobenius(&(acc - CMat::identity(dv, dv)));
                report.pythagorean.push(PythagoreanResidual {
                    vertex: g.vertex_name(v).into(),
                    color,
                    residual: res,
                });
            }
        }
        for f in g.edge_ids() {
            for gg in g.edge_ids() {
                if let Some((g2, f2)) = g.square_fwd(f, gg) {
                    // f∘g = g2∘f2 forces A_g A_f = A_{f2} A_{g2}.
                    let lhs = &self.mats[gg] * &self.mats[f];
                    let rhs = &self.mats[f2] * &self.mats[g2];
                    let res = frobenius(&(lhs - rhs));
                    report.squares.push(SquareResidual {
                        square: format!("{}∘{}", g.edge(f).id, g.edge(gg).id),
                        residual: res,
                    });
                }
            }
        }
        let mut degs: Vec<Degree> = Degree(vec![3; g.k])
            .sub_degrees()
            .into_iter()
            .filter(|m| m.norm1() >= 1 && m.norm1() <= 3)
            .collect();
        degs.sort();
        for v in 0..g.num_vertices() {
            let dv = self.dims.0[v];
            for m in &degs {
                let mut acc = CMat::zeros(dv, dv);
                for mu in paths_le(g, v, m) {
                    let a = self.path_operator(&mu);
                    acc += a.adjoint() * a;
                }
                let res = frobenius(&(acc - CMat::identity(dv, dv)));
                report.isometry.push(IsometryResidual {
                    vertex: g.vertex_name(v).into(),
                    degree: m.clone(),
                    residual: res,
                });
            }
        }
        report
    }

    /// Blockwise direct sum over the same graph.
    pub fn direct_sum(&self, other: &MatrixModule) -> Result<MatrixModule> {
        if self.graph.as_ref() != other.graph.as_ref() {
            return Err(Error::GraphMismatch);
        }
        let dims = self.dims.add(&other.dims);
        let mut mats = Vec::with_capacity(self.mats.len());
        for e in self.graph.edge_ids() {
            let (a, b) = (&self.mats[e], &other.mats[e]);
            let mut m = CMat::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
            m.view_mut((0, 0), a.shape()).copy_from(a);
            m.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(b);
            mats.push(m);
        }
        MatrixModule::new(self.graph.clone(), dims, mats)
    }
}

#[derive(Debug, Clone)]
pub struct PythagoreanResidual {
    pub vertex: String,
    pub color: usize,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct SquareResidual {
    pub square: String,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct IsometryResidual {
    pub vertex: String,
    pub degree: Degree,
    pub residual: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ModuleReport {
    pub pythagorean: Vec<PythagoreanResidual>,
    pub squares: Vec<SquareResidual>,
    pub isometry: Vec<IsometryResidual>,
}

impl ModuleReport {
    pub fn max_residual(&self) -> f64 {
        let a = self.pythagorean.iter().map(|r| r.residual);
        let b = self.squares.iter().map(|r| r.residual);
        let c = self.isometry.iter().map(|r| r.residual);
        a.chain(b).chain(c).fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual() < tol
    }
}

impl fmt::Display for ModuleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.pythagorean {
            writeln!(
                f,
                "pythagorean identity at ({}, color {}): residual {:.3e}",
                r.vertex, r.color, r.residual
            )?;
        }
        for r in &self.squares {
            writeln!(f, "square {}: residual {:.3e}", r.square, r.residual)?;
        }
        for r in &self.isometry {
            writeln!(
                f,
                "stacked isometry at ({}, m={}): residual {:.3e}",
                r.vertex, r.degree, r.residual
            )?;
        }
        writeln!(f, "max residual {:.3e}", self.max_residual())
    }
}

/// Compute D(v) = Σ_{λ∈vΛ¹} d_{s(λ)} for a 1-graph.
pub fn capacity(g: &KGraph, d: &DimensionVector, v: VertexId) -> usize {
    g.all_range_edges(v)
        .iter()
        .map(|&e| d.0[g.edge(e).source])
        .sum()
}

/// Random module over a 1-graph: per vertex a column-orthonormalized complex
/// Gaussian D(v)×dv frame sliced into the edge blocks. Deterministic per seed.
pub fn random_module(g: &Arc<KGraph>, d: &DimensionVector, seed: u64) -> Result<MatrixModule> {
    if g.k != 1 {
        return Err(Error::BadParameter(
            "random_module is defined for 1-graphs only".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mats: Vec<CMat> = (0..g.num_edges())
        .map(|e| {
            let edge = g.edge(e);
            CMat::zeros(d.0[edge.source], d.0[edge.range])
        })
        .collect();
    for v in 0..g.num_vertices() {
        let dv = d.0[v];
        if dv == 0 {
            continue;
        }
        let cap = capacity(g, d, v);
        if dv > cap {
            return Err(Error::Infeasible {
                vertex: g.vertex_name(v).into(),
                dv,
                cap,
            });
        }
        let q = random_isometry(cap, dv, &mut rng);
        let mut row = 0;
        for e in g.all_range_edges(v) {
            let h = d.0[g.edge(e).source];
            mats[e] = q.rows(row, h).into_owned();
            row += h;
        }
    }
    MatrixModule::new(g.clone(), d.clone(), mats)
}

/// Tensor module over the one-vertex 2-graph with 4 loops: color-1 loops act
/// as `A_i ⊗ I`, color-2 loops as `I ⊗ B_j`.
pub fn tensor_module(
    target: &Arc<KGraph>,
    m1: &MatrixModule,
    m2: &MatrixModule,
) -> Result<MatrixModule> {
    let is_rose2 = |m: &MatrixModule| {
        m.graph().k == 1 && m.graph().num_vertices() == 1 && m.graph().num_edges() == 2
    };
    if !is_rose2(m1) || !is_rose2(m2) {
        return Err(Error::BadParameter(
            "tensor_module expects two modules over a 2-loop rose".into(),
        ));
    }
    let (d1, d2) = (m1.total_dim(), m2.total_dim());
    let id1 = CMat::identity(d1, d1);
    let id2 = CMat::identity(d2, d2);
    let mut mats = vec![CMat::zeros(0, 0); 4];
    for (i, name) in ["f1", "f2"].iter().enumerate() {
        let e = target
            .edge_by_id(name)
            .ok_or_else(|| Error::BadParameter(format!("target graph lacks edge `{name}`")))?;
        mats[e] = m1.mat(i).kronecker(&id2);
    }
    for (j, name) in ["g1", "g2"].iter().enumerate() {
        let e = target
            .edge_by_id(name)
            .ok_or_else(|| Error::BadParameter(format!("target graph lacks edge `{name}`")))?;
        mats[e] = id1.kronecker(m2.mat(j));
    }
    MatrixModule::new(
        target.clone(),
        DimensionVector(vec![d1 * d2]),
        mats,
    )
}

/// JSON document for a module. `graph` is either a string path (resolved
/// relative to the document) or an inline graph object.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModuleSpec {
    pub graph: serde_json::Value,
    pub dims: BTreeMap<String, usize>,
    pub matrices: BTreeMap<String, Vec<Vec<[f64; 2]>>>,
}

impl MatrixModule {
    pub fn to_spec(&self) -> ModuleSpec {
        let g = &self.graph;
        let dims = g
            .vertex_names()
            .iter()
            .enumerate()
            .map(|(v, name)| (name.clone(), self.dims.0[v]))
            .collect();
        let matrices = g
            .edge_ids()
            .map(|e| {
                let m = &self.mats[e];
                let rows = (0..m.nrows())
                    .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                    .collect();
                (g.edge(e).id.clone(), rows)
            })
            .collect();
        ModuleSpec {
            graph: serde_json::to_value(g.spec()).expect("graph serializes"),
            dims,
            matrices,
        }
    }

    pub fn from_spec(spec: &ModuleSpec, base_dir: Option<&std::path::Path>) -> Result<MatrixModule> {
        let graph = match &spec.graph {
            serde_json::Value::String(path) => {
                let p = std::path::Path::new(path);
                let full = match (p.is_relative(), base_dir) {
                    (true, Some(base)) => base.join(p),
                    _ => p.to_path_buf(),
                };
                let text = std::fs::read_to_string(full)?;
                KGraph::from_json_str(&text)?
            }
            v => {
                let gspec: GraphSpec = serde_json::from_value(v.clone())?;
                KGraph::from_spec(gspec)?
            }
        };
        let graph = Arc::new(graph);
        let mut dims = vec![0usize; graph.num_vertices()];
        for (name, &dv) in &spec.dims {
            let v = graph
                .vertex(name)
                .ok_or_else(|| Error::Structure(format!("dims references unknown vertex `{name}`")))?;
            dims[v] = dv;
        }
        let dims = DimensionVector(dims);
        let mut mats: Vec<CMat> = (0..graph.num_edges())
            .map(|e| {
                let edge = graph.edge(e);
                CMat::zeros(dims.0[edge.source], dims.0[edge.range])
            })
            .collect();
        for (id, rows) in &spec.matrices {
            let e = graph
                .edge_by_id(id)
                .ok_or_else(|| Error::Structure(format!("matrices references unknown edge `{id}`")))?;
            let nrows = rows.len();
            let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
            if rows.iter().any(|r| r.len() != ncols) {
                return Err(Error::Shape(format!("ragged matrix for edge `{id}`")));
            }
            let mut m = CMat::zeros(nrows, ncols);
            for (i, row) in rows.iter().enumerate() {
                for (j, &[re, im]) in row.iter().enumerate() {
                    m[(i, j)] = C::new(re, im);
                }
            }
            mats[e] = m;
        }
        MatrixModule::new(graph, dims, mats)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_spec()).expect("module serializes")
    }

    pub fn from_json_str(s: &str, base_dir: Option<&std::path::Path>) -> Result<MatrixModule> {
        let spec: ModuleSpec = serde_json::from_str(s)?;
        MatrixModule::from_spec(&spec, base_dir)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::linalg::c;

    #[test]
    fn sphere_point_is_a_module() {
        let m = catalog::sphere_module(&[c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        assert!(m.check().passes(1e-10));
    }

    #[test]
    fn broken_module_reports_defect() {
        let g = Arc::new(catalog::rose(2));
        let a1 = CMat::from_element(1, 1, c(0.6, 0.0));
        let a2 = CMat::zeros(1, 1);
        let m = MatrixModule::new(g, DimensionVector(vec![1]), vec![a1, a2]).unwrap();
        let rep = m.check();
        assert!(!rep.passes(1e-9));
        // Residual of the vertex identity is |1 - 0.36| = 0.64.
        let r = rep.pythagorean[0].residual;
        assert!((r - 0.64).abs() < 1e-12);
    }

    #[test]
    fn random_modules_pass_and_are_deterministic() {
        let g = Arc::new(catalog::complete2());
        let d = DimensionVector(vec![2, 3]);
        let m1 = random_module(&g, &d, 42).unwrap();
        let m2 = random_module(&g, &d, 42).unwrap();
        assert!(m1.check().passes(1e-10));
        for e in g.edge_ids() {
            assert_eq!(m1.mat(e), m2.mat(e));
        }
        let m3 = random_module(&g, &d, 43).unwrap();
        assert!(g.edge_ids().any(|e| m1.mat(e) != m3.mat(e)));
    }

    #[test]
    fn infeasible_dimension_vector_rejected() {
        let g = Arc::new(catalog::three_vertex());
        let d = DimensionVector(vec![1, 1, 1]);
        // D(2) = 0 while d_2 = 1.
        assert!(matches!(
            random_module(&g, &d, 1),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn path_operator_functorial() {
        use crate::path::{all_paths_le, compose};
        let g = Arc::new(catalog::rose(2));
        let m = random_module(&g, &DimensionVector(vec![3]), 5).unwrap();
        let paths = all_paths_le(&g, &Degree(vec![2]));
        for p in &paths {
            for q in &paths {
                if p.source() != q.range() {
                    continue;
                }
                let pq = compose(&g, p, q).unwrap();
                let lhs = m.path_operator(&pq);
                let rhs = m.path_operator(q) * m.path_operator(p);
                assert!(frobenius(&(lhs - rhs)) < 1e-12);
            }
        }
    }

    #[test]
    fn operator_norm_bounded_by_one() {
        let g = Arc::new(catalog::complete2());
        let m = random_module(&g, &DimensionVector(vec![2, 2]), 9).unwrap();
        for e in g.edge_ids() {
            let svd = m.mat(e).clone().svd(false, false);
            assert!(svd.singular_values.max() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn direct_sum_shapes_and_axioms() {
        let g = Arc::new(catalog::rose(2));
        let a = random_module(&g, &DimensionVector(vec![2]), 1).unwrap();
        let b = random_module(&g, &DimensionVector(vec![3]), 2).unwrap();
        let s = a.direct_sum(&b).unwrap();
        assert_eq!(s.dims(), &DimensionVector(vec![5]));
        assert!(s.check().passes(1e-10));
    }

    #[test]
    fn tensor_module_is_a_module() {
        let g = Arc::new(catalog::rose(2));
        let t = Arc::new(catalog::two_graph_4loops());
        let a = random_module(&g, &DimensionVector(vec![2]), 3).unwrap();
        let b = random_module(&g, &DimensionVector(vec![2]), 4).unwrap();
        let m = tensor_module(&t, &a, &b).unwrap();
        assert_eq!(m.total_dim(), 4);
        assert!(m.check().passes(1e-10));
    }

    #[test]
    fn json_round_trip() {
        let g = Arc::new(catalog::complete2());
        let m = random_module(&g, &DimensionVector(vec![2, 1]), 11).unwrap();
        let s = m.to_json_string();
        let m2 = MatrixModule::from_json_str(&s, None).unwrap();
        assert_eq!(m2.to_json_string(), s);
        for e in g.edge_ids() {
            assert_eq!(m.mat(e), m2.mat(e));
        }
    }
}
