//! ℓ¹ simplicial complexes: finitely supported probability vectors, stars,
//! carriers, skeleta and the nerve of a cover.

use std::collections::{BTreeSet, HashMap};

use crate::covers::Cover;
use crate::error::{Error, Result};
use crate::tol::tau;

/// Vertex handle inside a [`Complex`]; ordering of handles is the tie-break
/// order wherever one is needed.
pub type Vertex = u32;

/// A point of Δ(S): nonnegative weights with finite support summing to 1.
/// Only strictly positive weights are stored, sorted by vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint {
    weights: Vec<(Vertex, f64)>,
}

impl SimplexPoint {
    /// Validates and normalizes. Sums within τ of 1 are rescaled to 1;
    /// anything further off is an error.
    pub fn new<I: IntoIterator<Item = (Vertex, f64)>>(weights: I) -> Result<Self> {
        let mut w: Vec<(Vertex, f64)> = weights.into_iter().collect();
        w.sort_by_key(|&(v, _)| v);
        if w.windows(2).any(|p| p[0].0 == p[1].0) {
            return Err(Error::Malformed("repeated vertex in weight vector".into()));
        }
        if let Some(&(_, bad)) = w.iter().find(|(_, x)| !x.is_finite() || *x < 0.0 || *x > 1.0 + tau()) {
            return Err(Error::Malformed(format!("weight {bad} outside [0, 1]")));
        }
        w.retain(|&(_, x)| x > 0.0);
        let sum: f64 = w.iter().map(|&(_, x)| x).sum();
        if (sum - 1.0).abs() > tau() {
            return Err(Error::NotNormalized(sum));
        }
        if sum != 1.0 {
            for (_, x) in &mut w {
                *x /= sum;
            }
        }
        Ok(SimplexPoint { weights: w })
    }

    /// The vertex `v` itself (a Dirac mass).
    pub fn vertex(v: Vertex) -> Self {
        SimplexPoint { weights: vec![(v, 1.0)] }
    }

    /// Caller guarantees: sorted by vertex, strictly positive, sums to 1 up
    /// to rounding. Keeps the weights bit-for-bit.
    pub(crate) fn from_sorted_unchecked(weights: Vec<(Vertex, f64)>) -> Self {
        debug_assert!(weights.windows(2).all(|p| p[0].0 < p[1].0));
        debug_assert!(weights.iter().all(|&(_, x)| x > 0.0));
        SimplexPoint { weights }
    }

    pub fn weights(&self) -> &[(Vertex, f64)] {
        &self.weights
    }

    pub fn weight(&self, v: Vertex) -> f64 {
        self.weights
            .binary_search_by_key(&v, |&(u, _)| u)
            .map_or(0.0, |i| self.weights[i].1)
    }

    /// Support, i.e. the smallest simplex containing the point.
    pub fn carrier(&self) -> Vec<Vertex> {
        self.weights.iter().map(|&(v, _)| v).collect()
    }

    pub fn support_len(&self) -> usize {
        self.weights.len()
    }

    /// `p ∈ st(v)` iff `p(v) > 0`.
    pub fn in_star(&self, v: Vertex) -> bool {
        self.weight(v) > 0.0
    }

    /// `p ∈ K^(n)` iff its carrier has at most `n + 1` vertices.
    pub fn in_skeleton(&self, n: usize) -> bool {
        self.weights.len() <= n + 1
    }

    /// Carrier inclusion `carrier(self) ⊆ carrier(other)`.
    pub fn carried_by(&self, other: &SimplexPoint) -> bool {
        self.weights.iter().all(|&(v, _)| other.in_star(v))
    }
}

/// `Σ_v |p(v) − q(v)|` over the union of supports.
pub fn l1_dist(p: &SimplexPoint, q: &SimplexPoint) -> f64 {
    l1_sparse(&p.weights, &q.weights)
}

/// ℓ¹ distance of two sparse vectors sorted by vertex.
pub fn l1_sparse(a: &[(Vertex, f64)], b: &[(Vertex, f64)]) -> f64 {
    let (mut i, mut j, mut acc) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                acc += a[i].1.abs();
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                acc += b[j].1.abs();
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                acc += (a[i].1 - b[j].1).abs();
                i += 1;
                j += 1;
            }
        }
    }
    acc + a[i..].iter().map(|t| t.1.abs()).sum::<f64>() + b[j..].iter().map(|t| t.1.abs()).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    /// Every finite subset of the vertex set.
    Full,
    Maximal {
        simplices: Vec<Vec<Vertex>>,
        by_vertex: Vec<Vec<usize>>,
    },
}

/// A subcomplex of Δ(S), stored as its maximal simplices.
#[derive(Debug, Clone, PartialEq)]
pub struct Complex {
    labels: Vec<String>,
    shape: Shape,
    ambient: Option<Vec<String>>,
}

impl Complex {
    /// The full simplex Δ(S) on the given vertex labels.
    pub fn full(labels: Vec<String>) -> Self {
        Complex { labels, shape: Shape::Full, ambient: None }
    }

    /// Downward closure of `simplices`. Vertices that appear in no simplex
    /// are added as 0-simplices.
    pub fn from_simplices(labels: Vec<String>, simplices: Vec<Vec<Vertex>>) -> Result<Self> {
        let nv = labels.len();
        let mut sets: BTreeSet<Vec<Vertex>> = BTreeSet::new();
        for mut s in simplices {
            s.sort_unstable();
            s.dedup();
            if let Some(&bad) = s.iter().find(|&&v| v as usize >= nv) {
                return Err(Error::Malformed(format!("simplex uses unknown vertex #{bad}")));
            }
            if !s.is_empty() {
                sets.insert(s);
            }
        }
        let mut ordered: Vec<Vec<Vertex>> = sets.into_iter().collect();
        ordered.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        let mut kept: Vec<Vec<Vertex>> = Vec::new();
        let mut by_vertex: Vec<Vec<usize>> = vec![Vec::new(); nv];
        for s in ordered {
            let covered = by_vertex[s[0] as usize]
                .iter()
                .any(|&k| is_sorted_subset(&s, &kept[k]));
            if !covered {
                for &v in &s {
                    by_vertex[v as usize].push(kept.len());
                }
                kept.push(s);
            }
        }
        for v in 0..nv {
            if by_vertex[v].is_empty() {
                by_vertex[v].push(kept.len());
                kept.push(vec![v as Vertex]);
            }
        }
        Ok(Complex {
            labels,
            shape: Shape::Maximal { simplices: kept, by_vertex },
            ambient: None,
        })
    }

    /// Records a vertex superset `S ⊇ K^(0)`; informational only.
    pub fn with_ambient(mut self, ambient: Vec<String>) -> Self {
        self.ambient = Some(ambient);
        self
    }

    pub fn ambient(&self) -> Option<&[String]> {
        self.ambient.as_deref()
    }

    pub fn is_full(&self) -> bool {
        matches!(self.shape, Shape::Full)
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: Vertex) -> &str {
        &self.labels[v as usize]
    }

    pub fn vertex_of(&self, label: &str) -> Option<Vertex> {
        self.labels.iter().position(|l| l == label).map(|i| i as Vertex)
    }

    /// Whether the sorted vertex set `s` spans a simplex.
    pub fn contains_simplex(&self, s: &[Vertex]) -> bool {
        if s.iter().any(|&v| v as usize >= self.labels.len()) {
            return false;
        }
        match &self.shape {
            Shape::Full => true,
            Shape::Maximal { simplices, by_vertex } => match s.first() {
                None => true,
                Some(&v0) => by_vertex[v0 as usize]
                    .iter()
                    .any(|&k| is_sorted_subset(s, &simplices[k])),
            },
        }
    }

    pub fn maximal_simplices(&self) -> Vec<Vec<Vertex>> {
        match &self.shape {
            Shape::Full => vec![(0..self.labels.len() as Vertex).collect()],
            Shape::Maximal { simplices, .. } => simplices.clone(),
        }
    }

    /// Largest simplex dimension; `None` for the empty complex.
    pub fn dimension(&self) -> Option<usize> {
        match &self.shape {
            Shape::Full => self.labels.len().checked_sub(1),
            Shape::Maximal { simplices, .. } => simplices.iter().map(|s| s.len() - 1).max(),
        }
    }
}

fn is_sorted_subset(small: &[Vertex], big: &[Vertex]) -> bool {
    let mut it = big.iter();
    small.iter().all(|v| it.any(|b| b == v))
}

/// Nerve of a cover: vertices are the cover's elements (same order), and a
/// set of elements spans a simplex iff the elements share a point.
pub fn nerve(cover: &Cover) -> Complex {
    let n = cover.space().len();
    let mut seen: HashMap<&[usize], ()> = HashMap::new();
    let mut sets = Vec::new();
    for x in 0..n {
        let m = cover.memberships(x);
        if seen.insert(m, ()).is_none() {
            sets.push(m.iter().map(|&s| s as Vertex).collect());
        }
    }
    Complex::from_simplices(cover.labels().to_vec(), sets).expect("memberships index the cover")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_space::FiniteMetricSpace;
    use std::sync::Arc;

    fn sp(w: &[(Vertex, f64)]) -> SimplexPoint {
        SimplexPoint::new(w.iter().copied()).unwrap()
    }

    #[test]
    fn l1_examples() {
        let p = sp(&[(0, 0.5), (1, 0.5)]);
        assert_eq!(l1_dist(&p, &p), 0.0);
        assert_eq!(l1_dist(&SimplexPoint::vertex(0), &SimplexPoint::vertex(1)), 2.0);
        assert_eq!(l1_dist(&p, &SimplexPoint::vertex(0)), 1.0);
    }

    #[test]
    fn stars_carriers_skeleta() {
        let dv = SimplexPoint::vertex(3);
        assert!(dv.in_star(3));
        assert!(!dv.in_star(4));
        assert!(sp(&[(0, 0.999), (1, 0.001)]).in_star(1));

        assert_eq!(dv.carrier(), vec![3]);
        assert_eq!(sp(&[(0, 0.5), (1, 0.5)]).carrier(), vec![0, 1]);
        assert_eq!(sp(&[(0, 0.7), (1, 0.3), (2, 0.0)]).carrier(), vec![0, 1]);

        assert!(dv.in_skeleton(0));
        assert!(!sp(&[(0, 0.5), (1, 0.5)]).in_skeleton(0));
        assert!(sp(&[(0, 0.4), (1, 0.3), (2, 0.3)]).in_skeleton(2));
    }

    #[test]
    fn normalization_rules() {
        let p = SimplexPoint::new([(0, 0.5), (1, 0.5 + 1e-12)]).unwrap();
        let s: f64 = p.weights().iter().map(|w| w.1).sum();
        assert!((s - 1.0).abs() < 1e-15);
        assert_eq!(SimplexPoint::new([(0, 0.5)]).unwrap_err().code(), "NOT_NORMALIZED");
        assert!(SimplexPoint::new([(0, -0.1), (1, 1.1)]).is_err());
    }

    fn p10() -> Arc<FiniteMetricSpace> {
        Arc::new(
            FiniteMetricSpace::from_euclidean(
                (0..10).map(|i| i.to_string()).collect(),
                (0..10).map(|i| vec![i as f64]).collect(),
            )
            .unwrap(),
        )
    }

    #[test]
    fn nerve_examples() {
        let c = Cover::new(
            p10(),
            "two",
            vec![("a".into(), (0..=5).collect()), ("b".into(), (4..=9).collect())],
        )
        .unwrap();
        let k = nerve(&c);
        assert_eq!(k.maximal_simplices(), vec![vec![0, 1]]);
        assert_eq!(k.dimension(), Some(1));

        let c = Cover::new(
            p10(),
            "disj",
            vec![("a".into(), (0..5).collect()), ("b".into(), (5..10).collect())],
        )
        .unwrap();
        let k = nerve(&c);
        assert_eq!(k.maximal_simplices(), vec![vec![0], vec![1]]);
        assert!(!k.contains_simplex(&[0, 1]));

        let c = Cover::new(
            p10(),
            "tri",
            vec![
                ("a".into(), (0..=4).collect()),
                ("b".into(), (4..=9).collect()),
                ("c".into(), vec![4]),
            ],
        )
        .unwrap();
        let k = nerve(&c);
        assert!(k.contains_simplex(&[0, 1, 2]));
        assert_eq!(k.dimension(), Some(2));
    }

    #[test]
    fn closure_keeps_singletons() {
        let k = Complex::from_simplices(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![0, 1]],
        )
        .unwrap();
        assert!(k.contains_simplex(&[2]));
        assert!(k.contains_simplex(&[1]));
        assert!(!k.contains_simplex(&[1, 2]));
    }
}
