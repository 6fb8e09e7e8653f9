//! Bundled example graphs and modules, and the Ω/Ψ constructions relating
//! 2-loop-rose modules to complete-graph modules.

use crate::analysis;
use crate::error::{Error, Result};
use crate::graph::{EdgeSpec, GraphSpec, KGraph, SquareSpec};
use crate::linalg::{c, gaussian_complex, gaussian_vector, CMat, CVec, C};
use crate::module::{random_module, tensor_module, DimensionVector, MatrixModule};
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;

fn edge(id: &str, color: usize, source: &str, range: &str) -> EdgeSpec {
    EdgeSpec {
        id: id.into(),
        color,
        source: source.into(),
        range: range.into(),
    }
}

/// One vertex, n loops of color 1.
pub fn rose(n: usize) -> KGraph {
    let edges = (1..=n).map(|i| edge(&format!("e{i}"), 1, "v", "v")).collect();
    KGraph::from_spec(GraphSpec {
        k: 1,
        vertices: vec!["v".into()],
        edges,
        squares: vec![],
    })
    .expect("rose is well-formed")
}

/// Complete directed graph on two vertices: edges a_ij with range i, source j.
pub fn complete2() -> KGraph {
    KGraph::from_spec(GraphSpec {
        k: 1,
        vertices: vec!["1".into(), "2".into()],
        edges: vec![
            edge("a11", 1, "1", "1"),
            edge("a12", 1, "2", "1"),
            edge("a21", 1, "1", "2"),
            edge("a22", 1, "2", "2"),
        ],
        squares: vec![],
    })
    .expect("complete2 is well-formed")
}

/// Three vertices; one loop at vertex 1 plus one edge from each of vertices 2, 3
/// into vertex 1 (so vertex 1 receives three edges and vertices 2, 3 receive none).
pub fn three_vertex() -> KGraph {
    KGraph::from_spec(GraphSpec {
        k: 1,
        vertices: vec!["1".into(), "2".into(), "3".into()],
        edges: vec![
            edge("e11", 1, "1", "1"),
            edge("e21", 1, "2", "1"),
            edge("e31", 1, "3", "1"),
        ],
        squares: vec![],
    })
    .expect("three_vertex is well-formed")
}

/// One vertex, loops f1,f2 of color 1 and g1,g2 of color 2, with f_i∘g_j = g_j∘f_i.
pub fn two_graph_4loops() -> KGraph {
    let mut squares = Vec::new();
    for i in 1..=2 {
        for j in 1..=2 {
            squares.push(SquareSpec {
                outer_inner: [format!("f{i}"), format!("g{j}")],
                equals_outer_inner: [format!("g{j}"), format!("f{i}")],
            });
        }
    }
    KGraph::from_spec(GraphSpec {
        k: 2,
        vertices: vec!["v".into()],
        edges: vec![
            edge("f1", 1, "v", "v"),
            edge("f2", 1, "v", "v"),
            edge("g1", 2, "v", "v"),
            edge("g2", 2, "v", "v"),
        ],
        squares,
    })
    .expect("two_graph_4loops is well-formed")
}

/// One vertex, one color-1 loop ν and two color-2 loops μ1, μ2, with
/// ν∘μ1 = μ2∘ν and ν∘μ2 = μ1∘ν.
pub fn two_graph_example() -> KGraph {
    KGraph::from_spec(GraphSpec {
        k: 2,
        vertices: vec!["v".into()],
        edges: vec![
            edge("nu", 1, "v", "v"),
            edge("mu1", 2, "v", "v"),
            edge("mu2", 2, "v", "v"),
        ],
        squares: vec![
            SquareSpec {
                outer_inner: ["nu".into(), "mu1".into()],
                equals_outer_inner: ["mu2".into(), "nu".into()],
            },
            SquareSpec {
                outer_inner: ["nu".into(), "mu2".into()],
                equals_outer_inner: ["mu1".into(), "nu".into()],
            },
        ],
    })
    .expect("two_graph_example is well-formed")
}

/// Resolve a catalog name like `rose:2`, `complete2`, `three-vertex`,
/// `two-graph-4loops`, `two-graph-example`.
pub fn graph_by_name(name: &str) -> Result<KGraph> {
    if let Some(n) = name.strip_prefix("rose:") {
        let n: usize = n
            .parse()
            .map_err(|_| Error::UnknownCatalog(name.to_string()))?;
        if n == 0 {
            return Err(Error::UnknownCatalog(name.to_string()));
        }
        return Ok(rose(n));
    }
    match name {
        "complete2" => Ok(complete2()),
        "three-vertex" | "three_vertex" => Ok(three_vertex()),
        "two-graph-4loops" | "two_graph_4loops" => Ok(two_graph_4loops()),
        "two-graph-example" | "two_graph_example" => Ok(two_graph_example()),
        _ => Err(Error::UnknownCatalog(name.to_string())),
    }
}

/// One-dimensional module over rose-n from a point of the unit sphere in C^n.
pub fn sphere_module(coords: &[C]) -> Result<MatrixModule> {
    let n = coords.len();
    if n == 0 {
        return Err(Error::BadParameter("sphere point needs at least 1 coordinate".into()));
    }
    let norm: f64 = coords.iter().map(|z| z.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::BadParameter(format!(
            "sphere point has norm² = {norm}, expected 1"
        )));
    }
    let g = Arc::new(rose(n));
    let mats = coords
        .iter()
        .map(|&a| CMat::from_element(1, 1, a))
        .collect();
    MatrixModule::new(g, DimensionVector(vec![1]), mats)
}

/// The reducible 3-dimensional module over rose-2 with two 1-dimensional
/// irreducible submodules and a 1-dimensional residual line.
pub fn reducible_c3() -> MatrixModule {
    let g = Arc::new(rose(2));
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // Basis e0,e1,e2:  A1: e0 ↦ e1/√2, e1 ↦ 0, e2 ↦ e2;  A2: e0 ↦ e2/√2, e1 ↦ e1, e2 ↦ 0.
    let mut a1 = CMat::zeros(3, 3);
    a1[(1, 0)] = c(s, 0.0);
    a1[(2, 2)] = c(1.0, 0.0);
    let mut a2 = CMat::zeros(3, 3);
    a2[(2, 0)] = c(s, 0.0);
    a2[(1, 1)] = c(1.0, 0.0);
    MatrixModule::new(g, DimensionVector(vec![3]), vec![a1, a2]).expect("shapes match")
}

/// The irreducible 3-dimensional rose-2 module whose two generators both have
/// rank 2.
pub fn rank_two_3dim() -> MatrixModule {
    let g = Arc::new(rose(2));
    let r3 = 1.0 / 3f64.sqrt();
    let r6 = 1.0 / 6f64.sqrt();
    let a1 = CMat::from_row_slice(
        3,
        3,
        &[
            c(r3, 0.0), c(1.0 / 3.0, 0.0), c(0.0, 0.0),
            c(r3, 0.0), c(1.0 / 3.0, 0.0), c(0.0, 0.0),
            c(r3, 0.0), c(-2.0 / 3.0, 0.0), c(0.0, 0.0),
        ],
    );
    let a2 = CMat::from_row_slice(
        3,
        3,
        &[
            c(0.0, 0.0), c(1.0 / 3.0, 0.0), c(-2.0 * r6, 0.0),
            c(0.0, 0.0), c(1.0 / 3.0, 0.0), c(r6, 0.0),
            c(0.0, 0.0), c(1.0 / 3.0, 0.0), c(r6, 0.0),
        ],
    );
    MatrixModule::new(g, DimensionVector(vec![3]), vec![a1, a2]).expect("shapes match")
}

fn dft_matrix(q: usize) -> CMat {
    let scale = 1.0 / (q as f64).sqrt();
    CMat::from_fn(q, q, |i, j| {
        let theta = 2.0 * PI * (i as f64) * (j as f64) / (q as f64);
        Complex::from_polar(scale, theta)
    })
}

/// Irreducible complete-graph module of dimension vector (q, q): diagonal
/// unimodular actions on the loops (entries pairwise distinct), the identity
/// on one crossing edge, and a unitary with all entries nonzero (the discrete
/// Fourier matrix) on the other, each scaled by 1/√2.
pub fn complete_module(omega: &[C], eps: &[C]) -> Result<MatrixModule> {
    let q = omega.len();
    if q == 0 || eps.len() != q {
        return Err(Error::BadParameter(
            "need equal, nonzero numbers of ω and ε entries".into(),
        ));
    }
    for list in [omega, eps] {
        for (i, z) in list.iter().enumerate() {
            if (z.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::BadParameter(format!(
                    "entry {z} is not on the unit circle"
                )));
            }
            for w in &list[i + 1..] {
                if (z - w).norm() < 1e-9 {
                    return Err(Error::BadParameter(
                        "repeated diagonal entries; irreducibility needs pairwise distinct values"
                            .into(),
                    ));
                }
            }
        }
    }
    let g = Arc::new(complete2());
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let diag = |zs: &[C]| {
        CMat::from_diagonal(&CVec::from_iterator(q, zs.iter().map(|&z| z * s)))
    };
    let a11 = diag(omega);
    let a22 = diag(eps);
    let a12 = dft_matrix(q) * c(s, 0.0);
    let a21 = CMat::identity(q, q) * c(s, 0.0);
    let mut mats = vec![CMat::zeros(0, 0); 4];
    mats[g.edge_by_id("a11").unwrap()] = a11;
    mats[g.edge_by_id("a12").unwrap()] = a12;
    mats[g.edge_by_id("a21").unwrap()] = a21;
    mats[g.edge_by_id("a22").unwrap()] = a22;
    MatrixModule::new(g, DimensionVector(vec![q, q]), mats)
}

/// Random unimodular q-tuple with pairwise distinct entries.
pub fn random_distinct_circle(q: usize, rng: &mut ChaCha8Rng) -> Vec<C> {
    loop {
        let zs: Vec<C> = (0..q)
            .map(|_| {
                let z = gaussian_complex(rng);
                z / z.norm()
            })
            .collect();
        let distinct = zs
            .iter()
            .enumerate()
            .all(|(i, a)| zs[i + 1..].iter().all(|b| (a - b).norm() > 1e-6));
        if distinct {
            return zs;
        }
    }
}

/// The module M_z over the three-vertex graph: d = (1,0,0) with the loop
/// acting by a unimodular scalar z.
pub fn m_z(z: C) -> Result<MatrixModule> {
    if (z.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::BadParameter(format!("{z} is not on the unit circle")));
    }
    let g = Arc::new(three_vertex());
    let mut mats = vec![CMat::zeros(0, 0); 3];
    mats[g.edge_by_id("e11").unwrap()] = CMat::from_element(1, 1, z);
    mats[g.edge_by_id("e21").unwrap()] = CMat::zeros(0, 1);
    mats[g.edge_by_id("e31").unwrap()] = CMat::zeros(0, 1);
    MatrixModule::new(g, DimensionVector(vec![1, 0, 0]), mats)
}

/// Parameters of the 2-dimensional family over the 4-loop 2-graph. The free
/// parameters (λ1, λ2 in the open ball, μ on the 3-sphere, c11 and c21 on a
/// 3-sphere of radius √(1−|λ1|²) with c21 ≠ 0, and the phase of c12) total
/// 4 + 3 + 3 + 1 = 11 real dimensions; |c12| and c22 are determined.
#[derive(Debug, Clone)]
pub struct TwoDimParams {
    pub lambda1: C,
    pub lambda2: C,
    pub mu: [C; 2],
    pub c11: C,
    pub c21: C,
    pub c12_phase: f64,
}

/// Build the 2-dimensional module from family parameters.
pub fn two_dim_family(p: &TwoDimParams) -> Result<MatrixModule> {
    if p.lambda1.norm() >= 1.0 || p.lambda2.norm() >= 1.0 {
        return Err(Error::BadParameter("λ must lie in the open unit ball".into()));
    }
    if (p.lambda1 - p.lambda2).norm() < 1e-9 {
        return Err(Error::BadParameter("λ1 and λ2 must be distinct".into()));
    }
    let mu_norm = p.mu[0].norm_sqr() + p.mu[1].norm_sqr();
    if (mu_norm - 1.0).abs() > 1e-9 {
        return Err(Error::BadParameter("μ must lie on the unit 3-sphere".into()));
    }
    if p.c21.norm() < 1e-12 {
        return Err(Error::BadParameter("c21 must be nonzero".into()));
    }
    let r1 = p.c11.norm_sqr() + p.c21.norm_sqr();
    if (r1 - (1.0 - p.lambda1.norm_sqr())).abs() > 1e-9 {
        return Err(Error::BadParameter(
            "|c11|² + |c21|² must equal 1 − |λ1|²".into(),
        ));
    }
    let c12_mod =
        ((1.0 - p.lambda2.norm_sqr()) / (1.0 + p.c11.norm_sqr() / p.c21.norm_sqr())).sqrt();
    let c12 = Complex::from_polar(c12_mod, p.c12_phase);
    let c22 = -(p.c11.conj() * c12) / p.c21.conj();
    let g = Arc::new(two_graph_4loops());
    let a1 = CMat::from_diagonal(&CVec::from_vec(vec![p.lambda1, p.lambda2]));
    let a2 = CMat::from_row_slice(2, 2, &[p.c11, c12, p.c21, c22]);
    let b1 = CMat::identity(2, 2) * p.mu[0];
    let b2 = CMat::identity(2, 2) * p.mu[1];
    let mut mats = vec![CMat::zeros(0, 0); 4];
    mats[g.edge_by_id("f1").unwrap()] = a1;
    mats[g.edge_by_id("f2").unwrap()] = a2;
    mats[g.edge_by_id("g1").unwrap()] = b1;
    mats[g.edge_by_id("g2").unwrap()] = b2;
    MatrixModule::new(g, DimensionVector(vec![2]), mats)
}

/// Random draw of valid 2-dimensional family parameters.
pub fn two_dim_family_random(seed: u64) -> MatrixModule {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let ball = |rng: &mut ChaCha8Rng| {
            let z = gaussian_complex(rng);
            z / (1.0 + z.norm())
        };
        let lambda1 = ball(&mut rng);
        let lambda2 = ball(&mut rng);
        if (lambda1 - lambda2).norm() < 1e-3 {
            continue;
        }
        let mu_raw = gaussian_vector(2, &mut rng);
        let mu_n = (mu_raw[0].norm_sqr() + mu_raw[1].norm_sqr()).sqrt();
        let mu = [mu_raw[0] / mu_n, mu_raw[1] / mu_n];
        let cvec = gaussian_vector(2, &mut rng);
        let cn = (cvec[0].norm_sqr() + cvec[1].norm_sqr()).sqrt();
        if cvec[1].norm() / cn < 1e-3 {
            continue;
        }
        let scale = (1.0 - lambda1.norm_sqr()).sqrt() / cn;
        let params = TwoDimParams {
            lambda1,
            lambda2,
            mu,
            c11: cvec[0] * scale,
            c21: cvec[1] * scale,
            c12_phase: 2.0 * PI * rand::Rng::random::<f64>(&mut rng),
        };
        if let Ok(m) = two_dim_family(&params) {
            return m;
        }
    }
}

/// Ω: a rose-2 module π on H becomes a complete-graph module on H⊕H, every
/// edge into vertex j acting by π(a_j).
pub fn omega(pi: &MatrixModule) -> Result<MatrixModule> {
    let g = pi.graph();
    if g.k != 1 || g.num_vertices() != 1 || g.num_edges() != 2 {
        return Err(Error::BadParameter("Ω expects a module over the 2-loop rose".into()));
    }
    let d = pi.total_dim();
    let target = Arc::new(complete2());
    let mut mats = vec![CMat::zeros(0, 0); 4];
    for i in 1..=2 {
        for j in 1..=2 {
            let e = target.edge_by_id(&format!("a{i}{j}")).unwrap();
            mats[e] = pi.mat(j - 1).clone();
        }
    }
    MatrixModule::new(target, DimensionVector(vec![d, d]), mats)
}

/// Ψ: a complete-graph module σ on H₁⊕H₂ becomes a rose-2 module on the same
/// space: A_i = [[B_{i1}, 0], [B_{i2}, 0]] for i = 1 and the mirrored block
/// layout for i = 2.
pub fn psi(sigma: &MatrixModule) -> Result<MatrixModule> {
    let g = sigma.graph();
    if g.as_ref() != &complete2() {
        return Err(Error::BadParameter("Ψ expects a module over complete2".into()));
    }
    let d1 = sigma.dims().0[g.vertex("1").unwrap()];
    let d2 = sigma.dims().0[g.vertex("2").unwrap()];
    let d = d1 + d2;
    let b = |i: usize, j: usize| sigma.mat(g.edge_by_id(&format!("a{i}{j}")).unwrap());
    let mut a1 = CMat::zeros(d, d);
    a1.view_mut((0, 0), (d1, d1)).copy_from(b(1, 1));
    a1.view_mut((d1, 0), (d2, d1)).copy_from(b(1, 2));
    let mut a2 = CMat::zeros(d, d);
    a2.view_mut((0, d1), (d1, d2)).copy_from(b(2, 1));
    a2.view_mut((d1, d1), (d2, d2)).copy_from(b(2, 2));
    let target = Arc::new(rose(2));
    MatrixModule::new(target, DimensionVector(vec![d]), vec![a1, a2])
}

#[derive(Debug, Clone)]
pub struct SandwichReport {
    pub pdim_psi: usize,
    pub pdim_rho: usize,
    pub holds: bool,
}

/// Check Pdim(Ψ(ρ)) ≤ Pdim(ρ) ≤ 2·Pdim(Ψ(ρ)) for a complete-graph module ρ.
pub fn pdim_sandwich_check(rho: &MatrixModule) -> Result<SandwichReport> {
    let psi_rho = psi(rho)?;
    let (_, pdim_psi) = analysis::pdim(&psi_rho)?;
    let (_, pdim_rho) = analysis::pdim(rho)?;
    Ok(SandwichReport {
        pdim_psi,
        pdim_rho,
        holds: pdim_psi <= pdim_rho && pdim_rho <= 2 * pdim_psi,
    })
}

/// The bundled example modules exercised by the verification suites.
pub fn bundled_modules() -> Vec<(String, MatrixModule)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6b726570);
    let mut out: Vec<(String, MatrixModule)> = Vec::new();
    out.push((
        "sphere rose-2 (0.6, 0.8i)".into(),
        sphere_module(&[c(0.6, 0.0), c(0.0, 0.8)]).unwrap(),
    ));
    out.push((
        "sphere rose-3 (1,0,0)".into(),
        sphere_module(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap(),
    ));
    out.push(("reducible C^3".into(), reducible_c3()));
    out.push(("rank-two 3-dim".into(), rank_two_3dim()));
    for q in 1..=2 {
        let omega_t = random_distinct_circle(q, &mut rng);
        let eps_t = random_distinct_circle(q, &mut rng);
        out.push((
            format!("complete-graph q={q}"),
            complete_module(&omega_t, &eps_t).unwrap(),
        ));
    }
    out.push(("M_z at z=1".into(), m_z(c(1.0, 0.0)).unwrap()));
    out.push((
        "Ω of rank-two 3-dim".into(),
        omega(&rank_two_3dim()).unwrap(),
    ));
    let rose2 = Arc::new(rose(2));
    let t = Arc::new(two_graph_4loops());
    let pi1 = random_module(&rose2, &DimensionVector(vec![2]), 101).unwrap();
    let pi2 = random_module(&rose2, &DimensionVector(vec![2]), 202).unwrap();
    out.push((
        "tensor 2⊗2 on the 4-loop 2-graph".into(),
        tensor_module(&t, &pi1, &pi2).unwrap(),
    ));
    out.push(("2-dim 2-graph family sample".into(), two_dim_family_random(7)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_graphs_validate() {
        for name in [
            "rose:1",
            "rose:2",
            "rose:4",
            "complete2",
            "three-vertex",
            "two-graph-4loops",
            "two-graph-example",
        ] {
            let g = graph_by_name(name).unwrap();
            let rep = g.validate();
            assert!(rep.is_valid(), "{name}: {rep}");
        }
    }

    #[test]
    fn corrupted_square_table_detected() {
        let mut spec = two_graph_example().spec().clone();
        spec.squares.pop();
        let g = KGraph::from_spec(spec).unwrap();
        let rep = g.validate();
        assert!(!rep.is_valid());
        assert!(rep.issues.iter().any(|i| matches!(
            i,
            crate::graph::Issue::SquareNotTotal { .. } | crate::graph::Issue::SquareNotBijective { .. }
        )));
    }

    #[test]
    fn single_mutation_corruptions_rejected() {
        // Swap the image pair of one square: breaks bijectivity or malforms it.
        let mut spec = two_graph_4loops().spec().clone();
        spec.squares[0].equals_outer_inner = spec.squares[1].equals_outer_inner.clone();
        let g = KGraph::from_spec(spec).unwrap();
        assert!(!g.validate().is_valid());
    }

    #[test]
    fn bundled_modules_pass_check() {
        for (name, m) in bundled_modules() {
            let rep = m.check();
            assert!(rep.passes(1e-9), "{name}: {rep}");
        }
    }

    #[test]
    fn complete_module_rejects_repeats() {
        let omega_t = vec![c(1.0, 0.0), c(1.0, 0.0)];
        let eps_t = vec![c(1.0, 0.0), c(-1.0, 0.0)];
        assert!(complete_module(&omega_t, &eps_t).is_err());
    }

    #[test]
    fn two_dim_family_draws_are_modules() {
        for seed in 0..5 {
            let m = two_dim_family_random(seed);
            assert!(m.check().passes(1e-9));
        }
    }
}
