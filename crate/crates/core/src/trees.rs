//! Trees at a vertex: finite leaf sets built from carets by gluing, and the
//! cofinal trees t_v^m whose leaves are vΛ^{≤m}.

use crate::degree::Degree;
use crate::error::{Error, Result};
use crate::graph::{KGraph, VertexId};
use crate::path::{compose, Path};
use std::collections::BTreeSet;

/// A tree at a vertex, stored as its leaf set. Equality is leaf-set equality,
/// so different gluing histories of the same tree compare equal.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Tree {
    root: VertexId,
    leaves: BTreeSet<Path>,
}

impl Tree {
    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Path> {
        self.leaves.iter()
    }

    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    pub fn contains(&self, p: &Path) -> bool {
        self.leaves.contains(p)
    }

    pub fn display(&self, g: &KGraph) -> String {
        let items: Vec<String> = self.leaves.iter().map(|p| p.display(g)).collect();
        format!("{{{}}}", items.join(", "))
    }
}

/// The trivial caret {v}.
pub fn trivial_caret(g: &KGraph, v: VertexId) -> Tree {
    let mut leaves = BTreeSet::new();
    leaves.insert(Path::vertex(g, v));
    Tree { root: v, leaves }
}

/// The basic caret vΛ^{≤e_i}: the color-i edges at v, or {v} if there are none.
pub fn basic_caret(g: &KGraph, v: VertexId, color: usize) -> Tree {
    let edges = g.range_edges(v, color);
    if edges.is_empty() {
        return trivial_caret(g, v);
    }
    let leaves = edges.iter().map(|&e| Path::edge(g, e)).collect();
    Tree { root: v, leaves }
}

/// Glue the basic color-i caret at the leaf μ: replace μ by {μ∘α : α ∈ s(μ)Λ^{≤e_i}}.
pub fn glue(g: &KGraph, t: &Tree, mu: &Path, color: usize) -> Result<Tree> {
    if !t.leaves.contains(mu) {
        return Err(Error::Structure(format!(
            "glue target {} is not a leaf",
            mu.display(g)
        )));
    }
    let caret = basic_caret(g, mu.source(), color);
    let mut leaves = t.leaves.clone();
    leaves.remove(mu);
    for alpha in caret.leaves() {
        leaves.insert(compose(g, mu, alpha).expect("caret roots at s(μ)"));
    }
    Ok(Tree {
        root: t.root,
        leaves,
    })
}

/// The cofinal tree t_v^m with leaves vΛ^{≤m}, built by an explicit gluing
/// sequence: grow one color-i caret at a time at every deficient leaf.
pub fn full_tree(g: &KGraph, v: VertexId, m: &Degree) -> Tree {
    let mut t = trivial_caret(g, v);
    loop {
        let target = t.leaves.iter().find_map(|leaf| {
            (1..=g.k).find_map(|color| {
                if leaf.degree().0[color - 1] < m.0[color - 1]
                    && !g.range_edges(leaf.source(), color).is_empty()
                {
                    Some((leaf.clone(), color))
                } else {
                    None
                }
            })
        });
        match target {
            Some((leaf, color)) => {
                t = glue(g, &t, &leaf, color).expect("leaf is in the tree");
            }
            None => return t,
        }
    }
}

/// t ≤ t2 in the refinement order: every leaf of t2 extends some leaf of t.
pub fn is_refinement(g: &KGraph, t: &Tree, t2: &Tree) -> bool {
    t.root == t2.root
        && t2
            .leaves()
            .all(|q| t.leaves().any(|p| q.extends(g, p)))
}
