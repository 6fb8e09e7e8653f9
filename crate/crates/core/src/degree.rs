//! Multi-degrees: elements of the free abelian monoid `N^k`, one coordinate per color.

use serde::{Deserialize, Serialize};
use std::fmt;

/// A multi-degree in `N^k`. Coordinate `i` counts edges of color `i + 1`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Degree(pub Vec<usize>);

impl Degree {
    pub fn zero(k: usize) -> Self {
        Degree(vec![0; k])
    }

    /// The standard generator `e_i` for a 1-based color.
    pub fn unit(k: usize, color: usize) -> Self {
        assert!(color >= 1 && color <= k, "color out of range");
        let mut v = vec![0; k];
        v[color - 1] = 1;
        Degree(v)
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    /// Total number of edges, `|m|_1`.
    pub fn norm1(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn add(&self, other: &Degree) -> Degree {
        assert_eq!(self.k(), other.k());
        Degree(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Componentwise difference, `None` unless `other <= self`.
    pub fn checked_sub(&self, other: &Degree) -> Option<Degree> {
        assert_eq!(self.k(), other.k());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(Degree)
    }

    /// Componentwise partial order `self <= other`.
    pub fn le(&self, other: &Degree) -> bool {
        assert_eq!(self.k(), other.k());
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Componentwise maximum.
    pub fn join(&self, other: &Degree) -> Degree {
        assert_eq!(self.k(), other.k());
        Degree(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| *a.max(b))
                .collect(),
        )
    }

    /// All degrees `n <= self`, in lexicographic order.
    pub fn sub_degrees(&self) -> Vec<Degree> {
        let mut out = vec![Degree::zero(self.k())];
        for (i, &cap) in self.0.iter().enumerate() {
            let mut next = Vec::with_capacity(out.len() * (cap + 1));
            for d in &out {
                for c in 0..=cap {
                    let mut v = d.0.clone();
                    v[i] = c;
                    next.push(Degree(v));
                }
            }
            out = next;
        }
        out
    }
}

impl fmt::Debug for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", x)?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_order_and_arithmetic() {
        let a = Degree(vec![1, 2]);
        let b = Degree(vec![2, 2]);
        assert!(a.le(&b));
        assert!(!b.le(&a));
        assert_eq!(a.add(&b), Degree(vec![3, 4]));
        assert_eq!(b.checked_sub(&a), Some(Degree(vec![1, 0])));
        assert_eq!(a.checked_sub(&b), None);
        assert_eq!(a.join(&Degree(vec![2, 0])), Degree(vec![2, 2]));
        assert_eq!(a.norm1(), 3);
    }

    #[test]
    fn sub_degrees_enumerates_box() {
        let m = Degree(vec![2, 1]);
        let subs = m.sub_degrees();
        assert_eq!(subs.len(), 6);
        assert!(subs.contains(&Degree(vec![0, 0])));
        assert!(subs.contains(&Degree(vec![2, 1])));
    }
}
