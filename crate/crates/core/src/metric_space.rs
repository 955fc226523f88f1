//! Finite metric spaces, balls, neighborhoods and R-chain components.
//!
//! Points are addressed by their position in the identifier list; the
//! identifiers themselves are opaque strings used only for I/O and
//! witnesses. Balls are open (`d < r`), chains use a closed step (`d <= R`).

use std::collections::HashMap;

use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};
use rayon::prelude::*;

use crate::error::{require_nonneg, Error, Result};
use crate::tol::tau;

/// How a space was described on input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceFormat {
    Matrix,
    Euclidean,
    Graph,
}

impl SpaceFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            SpaceFormat::Matrix => "matrix",
            SpaceFormat::Euclidean => "euclidean",
            SpaceFormat::Graph => "graph",
        }
    }
}

#[derive(Debug, Clone)]
enum Metric {
    Dense { n: usize, d: Vec<f64> },
    Euclidean { dim: usize, coords: Vec<f64> },
}

/// A validated finite metric space. Immutable after construction.
#[derive(Debug, Clone)]
pub struct FiniteMetricSpace {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    metric: Metric,
    format: SpaceFormat,
}

fn index_ids(ids: &[String]) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::with_capacity(ids.len());
    for (i, id) in ids.iter().enumerate() {
        if index.insert(id.clone(), i).is_some() {
            return Err(Error::DuplicateId(id.clone()));
        }
    }
    Ok(index)
}

impl FiniteMetricSpace {
    /// Explicit distance matrix, row-major. Symmetry and the triangle
    /// inequality are checked within τ.
    pub fn from_matrix(ids: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let index = index_ids(&ids)?;
        let n = ids.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Malformed(format!(
                "distance matrix must be {n}x{n}"
            )));
        }
        let t = tau();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            if !rows[i][i].is_finite() || rows[i][i].abs() > t {
                return Err(Error::Malformed(format!(
                    "d({0},{0}) = {1} is not zero",
                    ids[i], rows[i][i]
                )));
            }
            for j in (i + 1)..n {
                let (a, b) = (rows[i][j], rows[j][i]);
                if !a.is_finite() || a < 0.0 {
                    return Err(Error::Malformed(format!(
                        "d({},{}) = {a} is not a nonnegative real",
                        ids[i], ids[j]
                    )));
                }
                if !b.is_finite() || (a - b).abs() > t {
                    return Err(Error::AsymmetricMatrix {
                        x: ids[i].clone(),
                        y: ids[j].clone(),
                        dxy: a,
                        dyx: b,
                    });
                }
                d[i * n + j] = a;
                d[j * n + i] = a;
            }
        }
        let space = FiniteMetricSpace {
            ids,
            index,
            metric: Metric::Dense { n, d },
            format: SpaceFormat::Matrix,
        };
        space.check_triangle()?;
        Ok(space)
    }

    /// Points in R^dim with the Euclidean norm. The triangle inequality holds
    /// by construction and is not rechecked.
    pub fn from_euclidean(ids: Vec<String>, points: Vec<Vec<f64>>) -> Result<Self> {
        let index = index_ids(&ids)?;
        if points.len() != ids.len() {
            return Err(Error::Malformed(format!(
                "{} ids but {} coordinate rows",
                ids.len(),
                points.len()
            )));
        }
        let dim = points.first().map_or(0, Vec::len);
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (id, p) in ids.iter().zip(&points) {
            if p.len() != dim {
                return Err(Error::Malformed(format!(
                    "point {id} has dimension {} instead of {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::Malformed(format!("point {id} has a non-finite coordinate")));
            }
            coords.extend_from_slice(p);
        }
        Ok(FiniteMetricSpace {
            ids,
            index,
            metric: Metric::Euclidean { dim, coords },
            format: SpaceFormat::Euclidean,
        })
    }

    /// Weighted undirected graph; distances are shortest-path lengths.
    pub fn from_graph(ids: Vec<String>, edges: Vec<(String, String, f64)>) -> Result<Self> {
        let index = index_ids(&ids)?;
        let n = ids.len();
        let mut g: UnGraph<(), f64> = UnGraph::with_capacity(n, edges.len());
        let nodes: Vec<NodeIndex> = (0..n).map(|_| g.add_node(())).collect();
        for (a, b, w) in &edges {
            let ia = *index.get(a).ok_or_else(|| Error::UnknownPoint(a.clone()))?;
            let ib = *index.get(b).ok_or_else(|| Error::UnknownPoint(b.clone()))?;
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::Malformed(format!(
                    "edge ({a},{b}) has weight {w}"
                )));
            }
            g.add_edge(nodes[ia], nodes[ib], *w);
        }
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|s| {
                let found = dijkstra(&g, nodes[s], None, |e| *e.weight());
                let mut row = vec![f64::INFINITY; n];
                for (node, dist) in found {
                    row[node.index()] = dist;
                }
                row
            })
            .collect();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let v = rows[i][j].min(rows[j][i]);
                if v.is_infinite() {
                    return Err(Error::DisconnectedGraph {
                        x: ids[i].clone(),
                        y: ids[j].clone(),
                    });
                }
                d[i * n + j] = v;
            }
        }
        Ok(FiniteMetricSpace {
            ids,
            index,
            metric: Metric::Dense { n, d },
            format: SpaceFormat::Graph,
        })
    }

    fn check_triangle(&self) -> Result<()> {
        let n = self.len();
        let t = tau();
        let bad = (0..n).into_par_iter().find_first(|&x| {
            (0..n).any(|y| (0..n).any(|z| self.dist(x, z) > self.dist(x, y) + self.dist(y, z) + t))
        });
        if let Some(x) = bad {
            for y in 0..n {
                for z in 0..n {
                    let via = self.dist(x, y) + self.dist(y, z);
                    if self.dist(x, z) > via + t {
                        return Err(Error::TriangleViolation {
                            x: self.ids[x].clone(),
                            y: self.ids[y].clone(),
                            z: self.ids[z].clone(),
                            dxz: self.dist(x, z),
                            via,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn format(&self) -> SpaceFormat {
        self.format
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownPoint(id.to_string()))
    }

    pub(crate) fn check_point(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownPoint(format!("#{i}")))
        }
    }

    /// Ambient dimension when the space came from Euclidean coordinates.
    pub fn euclidean_dim(&self) -> Option<usize> {
        match &self.metric {
            Metric::Euclidean { dim, .. } => Some(*dim),
            Metric::Dense { .. } => None,
        }
    }

    pub fn coords(&self, i: usize) -> Option<&[f64]> {
        match &self.metric {
            Metric::Euclidean { dim, coords } => Some(&coords[i * dim..(i + 1) * dim]),
            Metric::Dense { .. } => None,
        }
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match &self.metric {
            Metric::Dense { n, d } => d[i * n + j],
            Metric::Euclidean { dim, coords } => {
                if *dim == 1 {
                    return (coords[i] - coords[j]).abs();
                }
                let a = &coords[i * dim..(i + 1) * dim];
                let b = &coords[j * dim..(j + 1) * dim];
                a.iter()
                    .zip(b)
                    .map(|(p, q)| (p - q) * (p - q))
                    .sum::<f64>()
                    .sqrt()
            }
        }
    }

    /// Open ball `{y : d(center, y) < radius}`.
    pub fn ball(&self, center: usize, radius: f64) -> Result<PointSet> {
        self.check_point(center)?;
        require_nonneg("radius", radius)?;
        Ok(PointSet::from_sorted(
            self.len(),
            (0..self.len())
                .filter(|&y| self.dist(center, y) < radius)
                .collect(),
        ))
    }

    /// `B(A, R)`: union of the open balls of radius `r` around members of `a`.
    pub fn neighborhood(&self, a: &PointSet, r: f64) -> Result<PointSet> {
        require_nonneg("R", r)?;
        if a.is_empty() {
            return Ok(PointSet::empty(self.len()));
        }
        let members: Vec<usize> = (0..self.len())
            .into_par_iter()
            .filter(|&y| a.iter().any(|x| self.dist(x, y) < r))
            .collect();
        Ok(PointSet::from_sorted(self.len(), members))
    }

    /// `dist(x, set)`; +∞ for the empty set.
    pub fn dist_to_set(&self, x: usize, set: &PointSet) -> f64 {
        set.iter()
            .map(|y| self.dist(x, y))
            .fold(f64::INFINITY, f64::min)
    }

    /// Classes of the transitive closure of `d(x, y) <= r`, each sorted,
    /// ordered by smallest member.
    pub fn r_components(&self, r: f64) -> Result<Vec<Vec<usize>>> {
        require_nonneg("R", r)?;
        let n = self.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for x in 0..n {
            for y in (x + 1)..n {
                if self.dist(x, y) <= r {
                    let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
                    if rx != ry {
                        parent[rx.max(ry)] = rx.min(ry);
                    }
                }
            }
        }
        let mut classes: Vec<Vec<usize>> = Vec::new();
        let mut slot: HashMap<usize, usize> = HashMap::new();
        for x in 0..n {
            let root = find(&mut parent, x);
            let k = *slot.entry(root).or_insert_with(|| {
                classes.push(Vec::new());
                classes.len() - 1
            });
            classes[k].push(x);
        }
        Ok(classes)
    }

    /// Largest pairwise distance among `members` (0 for fewer than two).
    pub fn diameter(&self, members: &[usize]) -> f64 {
        let mut best = 0.0f64;
        for (k, &x) in members.iter().enumerate() {
            for &y in &members[k + 1..] {
                best = best.max(self.dist(x, y));
            }
        }
        best
    }

    pub fn full_set(&self) -> PointSet {
        PointSet::full(self.len())
    }

    /// Subset from identifiers.
    pub fn subset<'a, I: IntoIterator<Item = &'a str>>(&self, ids: I) -> Result<PointSet> {
        let mut members = ids
            .into_iter()
            .map(|id| self.index_of(id))
            .collect::<Result<Vec<_>>>()?;
        members.sort_unstable();
        members.dedup();
        Ok(PointSet::from_sorted(self.len(), members))
    }

    /// The subspace on `set`; point `k` of the result is `set.members()[k]`.
    pub fn restrict(&self, set: &PointSet) -> FiniteMetricSpace {
        let ids: Vec<String> = set.iter().map(|i| self.ids[i].clone()).collect();
        let index = ids.iter().enumerate().map(|(k, id)| (id.clone(), k)).collect();
        let metric = match &self.metric {
            Metric::Euclidean { dim, coords } => Metric::Euclidean {
                dim: *dim,
                coords: set
                    .iter()
                    .flat_map(|i| coords[i * dim..(i + 1) * dim].iter().copied())
                    .collect(),
            },
            Metric::Dense { .. } => {
                let m = set.len();
                let mut d = Vec::with_capacity(m * m);
                for i in set.iter() {
                    d.extend(set.iter().map(|j| self.dist(i, j)));
                }
                Metric::Dense { n: m, d }
            }
        };
        FiniteMetricSpace {
            ids,
            index,
            metric,
            format: self.format,
        }
    }
}

/// A subset of a space's points, held as sorted indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointSet {
    universe: usize,
    members: Vec<usize>,
}

impl PointSet {
    pub fn empty(universe: usize) -> Self {
        PointSet { universe, members: Vec::new() }
    }

    pub fn full(universe: usize) -> Self {
        PointSet { universe, members: (0..universe).collect() }
    }

    /// Members are sorted and deduplicated; indices outside the universe are
    /// rejected.
    pub fn new<I: IntoIterator<Item = usize>>(universe: usize, members: I) -> Result<Self> {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        if let Some(&last) = members.last() {
            if last >= universe {
                return Err(Error::UnknownPoint(format!("#{last}")));
            }
        }
        Ok(PointSet { universe, members })
    }

    pub(crate) fn from_sorted(universe: usize, members: Vec<usize>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        PointSet { universe, members }
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    pub fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.universe];
        for &x in &self.members {
            m[x] = true;
        }
        m
    }

    pub fn complement(&self) -> PointSet {
        let mask = self.mask();
        PointSet::from_sorted(
            self.universe,
            (0..self.universe).filter(|&x| !mask[x]).collect(),
        )
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.members.iter().all(|&x| other.contains(x))
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        let mut m = self.members.clone();
        m.extend_from_slice(&other.members);
        m.sort_unstable();
        m.dedup();
        PointSet::from_sorted(self.universe, m)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn line(xs: &[f64]) -> FiniteMetricSpace {
        FiniteMetricSpace::from_euclidean(
            xs.iter().map(|x| format!("{x}")).collect(),
            xs.iter().map(|x| vec![*x]).collect(),
        )
        .unwrap()
    }

    fn p10() -> FiniteMetricSpace {
        line(&(0..10).map(f64::from).collect::<Vec<_>>())
    }

    #[test]
    fn matrix_two_points() {
        let s = FiniteMetricSpace::from_matrix(
            vec!["a".into(), "b".into()],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        )
        .unwrap();
        assert_eq!(s.dist(0, 1), 1.0);
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn euclidean_345() {
        let s = FiniteMetricSpace::from_euclidean(
            vec!["p".into(), "q".into()],
            vec![vec![0.0, 0.0], vec![3.0, 4.0]],
        )
        .unwrap();
        assert_eq!(s.dist(0, 1), 5.0);
    }

    #[test]
    fn path_graph_distance() {
        let ids = vec!["0".to_string(), "1".into(), "2".into()];
        let s = FiniteMetricSpace::from_graph(
            ids,
            vec![("0".into(), "1".into(), 1.0), ("1".into(), "2".into(), 1.0)],
        )
        .unwrap();
        assert_eq!(s.dist(0, 2), 2.0);
    }

    #[test]
    fn load_errors_have_codes() {
        let asym = FiniteMetricSpace::from_matrix(
            vec!["a".into(), "b".into()],
            vec![vec![0.0, 1.0], vec![2.0, 0.0]],
        )
        .unwrap_err();
        assert_eq!(asym.code(), "ASYMMETRIC_MATRIX");

        let tri = FiniteMetricSpace::from_matrix(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                vec![0.0, 1.0, 5.0],
                vec![1.0, 0.0, 1.0],
                vec![5.0, 1.0, 0.0],
            ],
        )
        .unwrap_err();
        match &tri {
            Error::TriangleViolation { x, y, z, .. } => {
                assert_eq!((x.as_str(), y.as_str(), z.as_str()), ("a", "b", "c"))
            }
            other => panic!("unexpected {other:?}"),
        }

        let disc = FiniteMetricSpace::from_graph(
            vec!["a".into(), "b".into(), "c".into()],
            vec![("a".into(), "b".into(), 1.0)],
        )
        .unwrap_err();
        assert_eq!(disc.code(), "DISCONNECTED_GRAPH");

        let dup = FiniteMetricSpace::from_euclidean(
            vec!["a".into(), "a".into()],
            vec![vec![0.0], vec![1.0]],
        )
        .unwrap_err();
        assert_eq!(dup.code(), "DUPLICATE_ID");
    }

    #[test]
    fn balls_are_open() {
        let s = p10();
        assert_eq!(s.ball(0, 3.0).unwrap().members(), &[0, 1, 2]);
        assert!(s.ball(0, 0.0).unwrap().is_empty());
        assert_eq!(s.ball(5, 100.0).unwrap().len(), 10);
        assert_eq!(s.ball(42, 1.0).unwrap_err().code(), "UNKNOWN_POINT");
    }

    #[test]
    fn neighborhoods() {
        let s = p10();
        let a = PointSet::new(10, [0]).unwrap();
        assert_eq!(s.neighborhood(&a, 3.0).unwrap().members(), &[0, 1, 2]);
        assert!(s.neighborhood(&PointSet::empty(10), 5.0).unwrap().is_empty());
        let a = PointSet::new(10, [0, 9]).unwrap();
        assert_eq!(s.neighborhood(&a, 2.0).unwrap().members(), &[0, 1, 8, 9]);
    }

    #[test]
    fn components_use_closed_steps() {
        let s = line(&[0.0, 1.0, 2.0, 10.0, 11.0]);
        assert_eq!(s.r_components(2.0).unwrap(), vec![vec![0, 1, 2], vec![3, 4]]);
        assert_eq!(s.r_components(8.0).unwrap().len(), 1);
        assert_eq!(p10().r_components(1.0).unwrap().len(), 1);
        assert_eq!(p10().r_components(0.5).unwrap().len(), 10);
    }

    #[test]
    fn dist_to_empty_is_infinite() {
        assert_eq!(p10().dist_to_set(3, &PointSet::empty(10)), f64::INFINITY);
    }
}
