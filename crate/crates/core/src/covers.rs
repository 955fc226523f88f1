//! Indexed covers, their Lebesgue/multiplicity/mesh statistics, and two
//! cover generators (shifted bricks and a greedy ball colouring).

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{require_positive, Error, Result};
use crate::metric_space::{FiniteMetricSpace, PointSet};
use crate::tol::tau;

/// An indexed family of nonempty point sets whose union is the space.
///
/// Element `s` is addressed by its position; `labels[s]` is the external
/// name. Every subset of a finite space is open, so no openness is tracked.
#[derive(Debug, Clone)]
pub struct Cover {
    space: Arc<FiniteMetricSpace>,
    label: String,
    labels: Vec<String>,
    elements: Vec<Vec<usize>>,
    memberships: Vec<Vec<usize>>,
}

impl Cover {
    /// Builds a cover, dropping empty elements. Fails if some point lies in
    /// no element.
    pub fn new(
        space: Arc<FiniteMetricSpace>,
        label: impl Into<String>,
        elements: Vec<(String, Vec<usize>)>,
    ) -> Result<Self> {
        let n = space.len();
        let mut labels = Vec::with_capacity(elements.len());
        let mut sets = Vec::with_capacity(elements.len());
        let mut seen = std::collections::HashSet::new();
        for (name, mut members) in elements {
            if !seen.insert(name.clone()) {
                return Err(Error::Malformed(format!("duplicate cover index {name}")));
            }
            members.sort_unstable();
            members.dedup();
            if let Some(&bad) = members.iter().find(|&&x| x >= n) {
                return Err(Error::UnknownPoint(format!("#{bad}")));
            }
            if members.is_empty() {
                continue;
            }
            labels.push(name);
            sets.push(members);
        }
        let mut memberships = vec![Vec::new(); n];
        for (s, members) in sets.iter().enumerate() {
            for &x in members {
                memberships[x].push(s);
            }
        }
        if let Some(x) = memberships.iter().position(Vec::is_empty) {
            return Err(Error::NotACover(space.id(x).to_string()));
        }
        Ok(Cover {
            space,
            label: label.into(),
            labels,
            elements: sets,
            memberships,
        })
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn element(&self, s: usize) -> &[usize] {
        &self.elements[s]
    }

    pub fn elements(&self) -> &[Vec<usize>] {
        &self.elements
    }

    /// Indices of the elements containing `x`, ascending.
    pub fn memberships(&self, x: usize) -> &[usize] {
        &self.memberships[x]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownIndex(label.to_string()))
    }

    pub fn element_set(&self, s: usize) -> PointSet {
        PointSet::from_sorted(self.space.len(), self.elements[s].clone())
    }

    fn contains(&self, s: usize, x: usize) -> bool {
        self.memberships[x].binary_search(&s).is_ok()
    }

    /// `f_s(x) = dist(x, X \ U_s)`, with `dist(x, ∅) = +∞`.
    pub fn member_distance(&self, s: usize, x: usize) -> Result<f64> {
        if s >= self.len() {
            return Err(Error::UnknownIndex(format!("#{s}")));
        }
        self.space.check_point(x)?;
        Ok(self.member_distance_unchecked(s, x))
    }

    pub(crate) fn member_distance_unchecked(&self, s: usize, x: usize) -> f64 {
        if !self.contains(s, x) {
            return 0.0;
        }
        (0..self.space.len())
            .filter(|&y| !self.contains(s, y))
            .map(|y| self.space.dist(x, y))
            .fold(f64::INFINITY, f64::min)
    }

    /// `f_s(x)` for every `s` containing `x`, in membership order, from a
    /// single pass over the space.
    pub(crate) fn member_distances_at(&self, x: usize) -> Vec<f64> {
        let mine = &self.memberships[x];
        let mut out = vec![f64::INFINITY; mine.len()];
        for y in 0..self.space.len() {
            let theirs = &self.memberships[y];
            let mut d = None;
            for (k, s) in mine.iter().enumerate() {
                if theirs.binary_search(s).is_err() {
                    let dy = *d.get_or_insert_with(|| self.space.dist(x, y));
                    if dy < out[k] {
                        out[k] = dy;
                    }
                }
            }
        }
        out
    }

    /// Exact statistics by exhaustive computation.
    pub fn stats(&self) -> CoverStats {
        let n = self.space.len();
        let local_lebesgue: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|x| {
                self.member_distances_at(x)
                    .into_iter()
                    .fold(0.0f64, f64::max)
            })
            .collect();
        let local_multiplicity: Vec<usize> = self.memberships.iter().map(Vec::len).collect();
        let mesh = self
            .elements
            .par_iter()
            .map(|e| self.space.diameter(e))
            .reduce(|| 0.0, f64::max);
        CoverStats {
            lebesgue: local_lebesgue.iter().copied().fold(f64::INFINITY, f64::min),
            multiplicity: local_multiplicity.iter().copied().max().unwrap_or(0),
            mesh,
            local_lebesgue,
            local_multiplicity,
        }
    }

    pub fn mesh(&self) -> f64 {
        self.elements
            .par_iter()
            .map(|e| self.space.diameter(e))
            .reduce(|| 0.0, f64::max)
    }
}

/// Lebesgue number, multiplicity and mesh, plus their per-point versions
/// (indexed like the space's points).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverStats {
    #[serde(with = "crate::real")]
    pub lebesgue: f64,
    pub multiplicity: usize,
    #[serde(with = "crate::real")]
    pub mesh: f64,
    #[serde(serialize_with = "crate::real::vec::serialize")]
    pub local_lebesgue: Vec<f64>,
    pub local_multiplicity: Vec<usize>,
}

/// Output of [`brick_cover`]: the cover and the a-priori mesh bound
/// `S(R) = 2(n+1)R·√n`.
#[derive(Debug, Clone)]
pub struct BrickCover {
    pub cover: Cover,
    pub mesh_bound: f64,
}

/// Mesh bound of the brick construction in ambient dimension `dim`.
pub fn brick_mesh_bound(r: f64, dim: usize) -> f64 {
    2.0 * (dim as f64 + 1.0) * r * (dim as f64).sqrt()
}

/// Shifted-brick cover of a Euclidean space of dimension `dim`.
///
/// There are `dim + 1` tilings by half-open cubes of side `L = 2(dim+1)R`;
/// tiling `i` is shifted by `2Ri` along the diagonal. A point sits in
/// exactly one cube per tiling, so multiplicity is at most `dim + 1`, and in
/// each coordinate at most one tiling puts it within `R` of a face, so some
/// cube contains its `R`-ball. Traces on the point set that coincide are
/// kept once.
pub fn brick_cover(space: &Arc<FiniteMetricSpace>, r: f64, dim: usize) -> Result<BrickCover> {
    require_positive("R", r)?;
    let actual = space.euclidean_dim().ok_or(Error::NotEuclidean)?;
    if actual != dim {
        return Err(Error::Malformed(format!(
            "space has dimension {actual}, brick cover requested for {dim}"
        )));
    }
    let side = 2.0 * (dim as f64 + 1.0) * r;
    let mut boxes: BTreeMap<(usize, Vec<i64>), Vec<usize>> = BTreeMap::new();
    for x in 0..space.len() {
        let c = space.coords(x).expect("euclidean");
        for i in 0..=dim {
            let shift = 2.0 * r * i as f64;
            let key: Vec<i64> = c.iter().map(|v| ((v - shift) / side).floor() as i64).collect();
            boxes.entry((i, key)).or_default().push(x);
        }
    }
    let mut seen = std::collections::HashSet::new();
    let mut elements = Vec::new();
    for ((i, key), members) in boxes {
        if !seen.insert(members.clone()) {
            continue;
        }
        let name = format!(
            "b{i}:{}",
            key.iter().map(i64::to_string).collect::<Vec<_>>().join(",")
        );
        elements.push((name, members));
    }
    let cover = Cover::new(space.clone(), format!("brick(R={r})"), elements)?;
    Ok(BrickCover { cover, mesh_bound: brick_mesh_bound(r, dim) })
}

/// Growth factor of greedy elements: each is an open ball of radius `c·R`.
pub const GREEDY_GROWTH: f64 = 2.0;

#[derive(Debug, Clone)]
pub enum GreedyOutcome {
    Success(Cover),
    /// Lebesgue number `R` was reached but the multiplicity target was not.
    Failure { best_multiplicity: usize, cover: Cover },
}

impl GreedyOutcome {
    pub fn cover(&self) -> &Cover {
        match self {
            GreedyOutcome::Success(c) | GreedyOutcome::Failure { cover: c, .. } => c,
        }
    }

    pub fn is_success(&self) -> bool {
        matches!(self, GreedyOutcome::Success(_))
    }
}

struct GreedyElement {
    class: usize,
    mask: Vec<bool>,
    members: Vec<usize>,
    diameter: f64,
}

/// Greedy witness generator.
///
/// Points are visited in identifier-list order. A point whose `R`-ball is
/// not yet inside an element spawns the ball of radius `2R` around it, which
/// goes to the colour class it overlaps least. Within a class, overlapping
/// elements are merged while the merged diameter stays at most `4·2R`;
/// otherwise the next class is tried, and as a last resort the ball is added
/// unmerged (which is how multiplicity can exceed the target).
pub fn greedy_cover(
    space: &Arc<FiniteMetricSpace>,
    r: f64,
    target_mult: usize,
) -> Result<GreedyOutcome> {
    require_positive("R", r)?;
    if target_mult == 0 {
        return Err(Error::BadParameter { name: "target_mult", value: 0.0 });
    }
    let n = space.len();
    let cap = 4.0 * GREEDY_GROWTH * r;
    let mut elements: Vec<GreedyElement> = Vec::new();
    // per class: how many elements of the class contain each point
    let mut class_count = vec![vec![0u32; n]; target_mult];
    let mut containing: Vec<Vec<usize>> = vec![Vec::new(); n];

    for x in 0..n {
        let small = space.ball(x, r)?;
        let served = containing[x]
            .iter()
            .any(|&e| small.iter().all(|y| elements[e].mask[y]));
        if served {
            continue;
        }
        let ball = space.ball(x, GREEDY_GROWTH * r)?;
        let mut order: Vec<(usize, usize)> = (0..target_mult)
            .map(|c| (ball.iter().filter(|&y| class_count[c][y] > 0).count(), c))
            .collect();
        order.sort_unstable();

        let mut placed = false;
        for &(overlap, c) in &order {
            if overlap == 0 {
                push_element(&mut elements, &mut class_count, &mut containing, c, ball.members().to_vec(), space);
                placed = true;
                break;
            }
            let touching: Vec<usize> = (0..elements.len())
                .filter(|&e| elements[e].class == c && ball.iter().any(|y| elements[e].mask[y]))
                .collect();
            let mut merged: Vec<usize> = ball.members().to_vec();
            let mut diam = space.diameter(&merged);
            for &e in &touching {
                diam = diam.max(elements[e].diameter);
            }
            for (k, &e) in touching.iter().enumerate() {
                for &p in &elements[e].members {
                    for &q in &merged {
                        diam = diam.max(space.dist(p, q));
                    }
                }
                for &e2 in &touching[k + 1..] {
                    for &p in &elements[e].members {
                        for &q in &elements[e2].members {
                            diam = diam.max(space.dist(p, q));
                        }
                    }
                }
                if diam > cap {
                    break;
                }
            }
            if diam > cap {
                continue;
            }
            for &e in &touching {
                merged.extend_from_slice(&elements[e].members);
            }
            merged.sort_unstable();
            merged.dedup();
            // retire the touched elements, then add the merged one
            for &e in touching.iter().rev() {
                let old = elements.remove(e);
                for &p in &old.members {
                    class_count[old.class][p] -= 1;
                }
            }
            containing = vec![Vec::new(); n];
            for (idx, el) in elements.iter().enumerate() {
                for &p in &el.members {
                    containing[p].push(idx);
                }
            }
            push_element(&mut elements, &mut class_count, &mut containing, c, merged, space);
            placed = true;
            break;
        }
        if !placed {
            let c = order[0].1;
            push_element(&mut elements, &mut class_count, &mut containing, c, ball.members().to_vec(), space);
        }
    }

    let named = elements
        .iter()
        .enumerate()
        .map(|(k, e)| (format!("g{}:{k}", e.class), e.members.clone()))
        .collect();
    let cover = Cover::new(space.clone(), format!("greedy(R={r},m={target_mult})"), named)?;
    let stats = cover.stats();
    if stats.multiplicity <= target_mult && stats.lebesgue >= r - tau() {
        Ok(GreedyOutcome::Success(cover))
    } else {
        Ok(GreedyOutcome::Failure { best_multiplicity: stats.multiplicity, cover })
    }
}

fn push_element(
    elements: &mut Vec<GreedyElement>,
    class_count: &mut [Vec<u32>],
    containing: &mut [Vec<usize>],
    class: usize,
    members: Vec<usize>,
    space: &FiniteMetricSpace,
) {
    let mut mask = vec![false; space.len()];
    for &p in &members {
        mask[p] = true;
        class_count[class][p] += 1;
        containing[p].push(elements.len());
    }
    let diameter = space.diameter(&members);
    elements.push(GreedyElement { class, mask, members, diameter });
}
