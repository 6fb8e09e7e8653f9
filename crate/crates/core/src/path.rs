//! Paths (morphisms of the path category) in color-sorted normal form, and the
//! path arithmetic driven by the factorization squares.

use crate::degree::Degree;
use crate::error::{Error, Result};
use crate::graph::{EdgeId, KGraph, VertexId};
use std::collections::BTreeSet;

/// A path stored in color-ascending normal form: `edges[0]` is the outermost
/// (last traversed) edge, `edges` sorted so all color-1 edges come first.
/// The empty edge list is the identity at `range`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Path {
    range: VertexId,
    source: VertexId,
    edges: Vec<EdgeId>,
    degree: Degree,
}

impl Path {
    pub fn vertex(g: &KGraph, v: VertexId) -> Path {
        assert!(v < g.num_vertices());
        Path {
            range: v,
            source: v,
            edges: Vec::new(),
            degree: Degree::zero(g.k),
        }
    }

    pub fn edge(g: &KGraph, e: EdgeId) -> Path {
        let edge = g.edge(e);
        Path {
            range: edge.range,
            source: edge.source,
            edges: vec![e],
            degree: Degree::unit(g.k, edge.color),
        }
    }

    pub fn range(&self) -> VertexId {
        self.range
    }

    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn degree(&self) -> &Degree {
        &self.degree
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn is_vertex(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn display(&self, g: &KGraph) -> String {
        if self.edges.is_empty() {
            format!("({})", g.vertex_name(self.range))
        } else {
            self.edges
                .iter()
                .map(|&e| g.edge(e).id.as_str())
                .collect::<Vec<_>>()
                .join("∘")
        }
    }

    /// True iff `self = p ∘ tail` for some tail.
    pub fn extends(&self, g: &KGraph, p: &Path) -> bool {
        if !p.degree.le(&self.degree) {
            return false;
        }
        match factorize(g, self, p.degree()) {
            Ok((head, _)) => &head == p,
            Err(_) => false,
        }
    }
}

fn word_degree(g: &KGraph, word: &[EdgeId]) -> Degree {
    let mut d = Degree::zero(g.k);
    for &e in word {
        d.0[g.edge(e).color - 1] += 1;
    }
    d
}

fn check_composable(g: &KGraph, word: &[EdgeId]) -> Result<()> {
    for w in word.windows(2) {
        let (a, b) = (g.edge(w[0]), g.edge(w[1]));
        if a.source != b.range {
            return Err(Error::NotComposable {
                left: a.id.clone(),
                left_source: g.vertex_name(a.source).into(),
                right: b.id.clone(),
                right_range: g.vertex_name(b.range).into(),
            });
        }
    }
    Ok(())
}

/// Normal form of a nonempty composable raw edge word (outermost edge first).
pub fn normalize(g: &KGraph, word: &[EdgeId]) -> Result<Path> {
    if word.is_empty() {
        return Err(Error::Structure(
            "cannot normalize an empty word; use Path::vertex".into(),
        ));
    }
    check_composable(g, word)?;
    let sorted = g.sort_word(word, true)?;
    let range = g.edge(sorted[0]).range;
    let source = g.edge(*sorted.last().unwrap()).source;
    let degree = word_degree(g, &sorted);
    Ok(Path {
        range,
        source,
        edges: sorted,
        degree,
    })
}

/// Normal form of `p ∘ q` (q traversed first); requires s(p) = r(q).
pub fn compose(g: &KGraph, p: &Path, q: &Path) -> Result<Path> {
    if p.source != q.range {
        return Err(Error::VertexMismatch {
            left_source: g.vertex_name(p.source).into(),
            right_range: g.vertex_name(q.range).into(),
        });
    }
    if q.is_vertex() {
        return Ok(p.clone());
    }
    if p.is_vertex() {
        return Ok(q.clone());
    }
    let mut word = p.edges.clone();
    word.extend_from_slice(&q.edges);
    normalize(g, &word)
}

/// Unique factorization `p = head ∘ tail` with `d(head) = m`.
pub fn factorize(g: &KGraph, p: &Path, m: &Degree) -> Result<(Path, Path)> {
    if !m.le(&p.degree) {
        return Err(Error::Degree(format!(
            "cannot factorize: m = {} is not ≤ d(p) = {}",
            m, p.degree
        )));
    }
    let tail_deg = p.degree.checked_sub(m).unwrap();
    // Target color pattern: head colors ascending, then tail colors ascending.
    let mut pattern = Vec::with_capacity(p.edges.len());
    for (i, &c) in m.0.iter().enumerate() {
        pattern.extend(std::iter::repeat(i + 1).take(c));
    }
    for (i, &c) in tail_deg.0.iter().enumerate() {
        pattern.extend(std::iter::repeat(i + 1).take(c));
    }
    let mut seq = p.edges.clone();
    for pos in 0..seq.len() {
        let want = pattern[pos];
        if g.edge(seq[pos]).color == want {
            continue;
        }
        let idx = (pos + 1..seq.len())
            .find(|&i| g.edge(seq[i]).color == want)
            .expect("color counts match the pattern");
        for j in (pos..idx).rev() {
            // Move the mover at j+1 (color `want`) one slot left past seq[j].
            let (a, b) = (seq[j], seq[j + 1]);
            let (left, right) = if g.edge(a).color < want {
                g.square_fwd(a, b).ok_or_else(|| {
                    Error::MissingSquare(g.edge(a).id.clone(), g.edge(b).id.clone())
                })?
            } else {
                g.square_rev(a, b).ok_or_else(|| {
                    Error::MissingSquare(g.edge(a).id.clone(), g.edge(b).id.clone())
                })?
            };
            seq[j] = left;
            seq[j + 1] = right;
        }
    }
    let split = m.norm1();
    let head_edges = seq[..split].to_vec();
    let tail_edges = seq[split..].to_vec();
    let head_source = head_edges
        .last()
        .map(|&e| g.edge(e).source)
        .unwrap_or(p.range);
    let head = Path {
        range: p.range,
        source: head_source,
        edges: head_edges,
        degree: m.clone(),
    };
    let tail = Path {
        range: head_source,
        source: p.source,
        edges: tail_edges,
        degree: tail_deg,
    };
    Ok((head, tail))
}

/// The set vΛ^{≤m}: paths with range v, degree ≤ m, not extendable in any
/// color that is strictly below its budget.
pub fn paths_le(g: &KGraph, v: VertexId, m: &Degree) -> Vec<Path> {
    let mut visited: BTreeSet<Path> = BTreeSet::new();
    let mut stack = vec![Path::vertex(g, v)];
    while let Some(p) = stack.pop() {
        if visited.contains(&p) {
            continue;
        }
        visited.insert(p.clone());
        for color in 1..=g.k {
            if p.degree().0[color - 1] >= m.0[color - 1] {
                continue;
            }
            for &e in g.range_edges(p.source(), color) {
                let ext = compose(g, &p, &Path::edge(g, e)).expect("edge at source composes");
                if !visited.contains(&ext) {
                    stack.push(ext);
                }
            }
        }
    }
    visited
        .into_iter()
        .filter(|p| {
            (1..=g.k).all(|color| {
                p.degree().0[color - 1] >= m.0[color - 1]
                    || g.range_edges(p.source(), color).is_empty()
            })
        })
        .collect()
}

/// Λ^{≤m} over all roots.
pub fn all_paths_le(g: &KGraph, m: &Degree) -> Vec<Path> {
    let mut out = Vec::new();
    for v in 0..g.num_vertices() {
        out.extend(paths_le(g, v, m));
    }
    out
}

/// All pairs (ν, γ) with λ∘ν = μ∘γ ∈ Λ^{≤ d(λ)+d(μ)}.
pub fn common_extensions(g: &KGraph, lambda: &Path, mu: &Path) -> Vec<(Path, Path)> {
    if lambda.range() != mu.range() {
        return Vec::new();
    }
    let bound = lambda.degree().add(mu.degree());
    let mut out = Vec::new();
    for tau in paths_le(g, lambda.range(), &bound) {
        if !lambda.degree().le(tau.degree()) || !mu.degree().le(tau.degree()) {
            continue;
        }
        let (h1, nu) = factorize(g, &tau, lambda.degree()).expect("degree checked");
        if &h1 != lambda {
            continue;
        }
        let (h2, gamma) = factorize(g, &tau, mu.degree()).expect("degree checked");
        if &h2 != mu {
            continue;
        }
        out.push((nu, gamma));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn rose2_free_words() {
        let g = catalog::rose(2);
        let v = 0;
        let m = Degree(vec![2]);
        let paths = paths_le(&g, v, &m);
        assert_eq!(paths.len(), 4);
        for p in &paths {
            assert_eq!(p.degree(), &Degree(vec![2]));
        }
    }

    #[test]
    fn two_graph_square_identification() {
        let g = catalog::two_graph_example();
        let nu = Path::edge(&g, g.edge_by_id("nu").unwrap());
        let mu1 = Path::edge(&g, g.edge_by_id("mu1").unwrap());
        let mu2 = Path::edge(&g, g.edge_by_id("mu2").unwrap());
        // ν∘μ1 = μ2∘ν as morphisms.
        let a = compose(&g, &nu, &mu1).unwrap();
        let b = compose(&g, &mu2, &nu).unwrap();
        assert_eq!(a, b);
        let c = compose(&g, &nu, &mu2).unwrap();
        let d = compose(&g, &mu1, &nu).unwrap();
        assert_eq!(c, d);
        assert_ne!(a, c);
    }

    #[test]
    fn factorize_round_trip() {
        let g = catalog::two_graph_example();
        let m = Degree(vec![2, 2]);
        for p in all_paths_le(&g, &m) {
            for split in p.degree().sub_degrees() {
                let (head, tail) = factorize(&g, &p, &split).unwrap();
                assert_eq!(head.degree(), &split);
                let back = compose(&g, &head, &tail).unwrap();
                assert_eq!(back, p);
            }
        }
    }

    #[test]
    fn normalize_constant_on_square_moves() {
        let g = catalog::two_graph_example();
        // Build νμ1 as raw words in both orders; normal forms agree.
        let nu = g.edge_by_id("nu").unwrap();
        let mu1 = g.edge_by_id("mu1").unwrap();
        let mu2 = g.edge_by_id("mu2").unwrap();
        let p = normalize(&g, &[nu, mu1]).unwrap();
        let q = normalize(&g, &[mu2, nu]).unwrap();
        assert_eq!(p, q);
        // Idempotent: normalizing the normal form is a no-op.
        let r = normalize(&g, p.edges()).unwrap();
        assert_eq!(r, p);
    }

    #[test]
    fn paths_le_concatenation_identity() {
        // |vΛ^{≤m+n}| = Σ_{μ∈vΛ^{≤m}} |s(μ)Λ^{≤n}|
        for g in [
            catalog::rose(2),
            catalog::complete2(),
            catalog::three_vertex(),
            catalog::two_graph_example(),
            catalog::two_graph_4loops(),
        ] {
            let degs: Vec<Degree> = if g.k == 1 {
                vec![Degree(vec![1]), Degree(vec![2])]
            } else {
                vec![Degree(vec![1, 2]), Degree(vec![2, 1])]
            };
            for m in &degs {
                for n in &degs {
                    for v in 0..g.num_vertices() {
                        let lhs = paths_le(&g, v, &m.add(n)).len();
                        let rhs: usize = paths_le(&g, v, m)
                            .iter()
                            .map(|mu| paths_le(&g, mu.source(), n).len())
                            .sum();
                        assert_eq!(lhs, rhs, "graph with k={} vertex {}", g.k, v);
                    }
                }
            }
        }
    }

    #[test]
    fn common_extensions_diagonal_and_disjoint() {
        let g = catalog::rose(2);
        let e0 = Path::edge(&g, 0);
        let e1 = Path::edge(&g, 1);
        // Distinct edges of equal degree: no common extension.
        assert!(common_extensions(&g, &e0, &e1).is_empty());
        // Diagonal: (ν, ν) for ν ∈ s(λ)Λ^{≤d(λ)}.
        let diag = common_extensions(&g, &e0, &e0);
        assert_eq!(diag.len(), 2);
        for (nu, gamma) in diag {
            assert_eq!(nu, gamma);
        }
    }

    #[test]
    fn three_vertex_paths() {
        let g = catalog::three_vertex();
        let m = Degree(vec![1]);
        let v1 = g.vertex("1").unwrap();
        let v2 = g.vertex("2").unwrap();
        assert_eq!(paths_le(&g, v1, &m).len(), 3);
        let at2 = paths_le(&g, v2, &m);
        assert_eq!(at2.len(), 1);
        assert!(at2[0].is_vertex());
    }
}
