//! Seeded fixture generators shared by the test suites, the benchmarks and
//! the `oracle` command. Every generator is a pure function of its RNG.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::covers::{brick_cover, brick_mesh_bound, Cover};
use crate::error::Result;
use crate::filler::{find_schedule, FillerSchedule};
use crate::metric_space::{FiniteMetricSpace, PointSet};
use crate::pu_maps::{barycentric_map, check_variation, PUMap};
use crate::skeleton_push::fold_map;

pub type FixtureRng = ChaCha8Rng;

pub fn rng(seed: u64) -> FixtureRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("p{i}")).collect()
}

/// Points `0, 1, …, n−1` on the line.
pub fn path_line(n: usize) -> FiniteMetricSpace {
    FiniteMetricSpace::from_euclidean(ids(n), (0..n).map(|i| vec![i as f64]).collect()).expect("valid")
}

/// Path graph with unit edges.
pub fn path_graph(n: usize) -> FiniteMetricSpace {
    let edges = (1..n).map(|i| (format!("p{}", i - 1), format!("p{i}"), 1.0)).collect();
    FiniteMetricSpace::from_graph(ids(n), edges).expect("connected")
}

/// `w × h` grid with the given spacing.
pub fn grid(w: usize, h: usize, spacing: f64) -> FiniteMetricSpace {
    let pts = (0..h)
        .flat_map(|j| (0..w).map(move |i| vec![i as f64 * spacing, j as f64 * spacing]))
        .collect();
    FiniteMetricSpace::from_euclidean(ids(w * h), pts).expect("valid")
}

/// Points of a line at the given integer positions.
pub fn line_at(positions: &[i64]) -> FiniteMetricSpace {
    FiniteMetricSpace::from_euclidean(
        positions.iter().map(|p| format!("x{p}")).collect(),
        positions.iter().map(|&p| vec![p as f64]).collect(),
    )
    .expect("distinct positions")
}

/// A random space with at most `max_points` points: integer points on a
/// line, points in the plane, or a weighted connected graph.
pub fn random_space(rng: &mut FixtureRng, max_points: usize) -> FiniteMetricSpace {
    let n = rng.gen_range(2..=max_points.max(2));
    match rng.gen_range(0..3) {
        0 => {
            let mut pos = 0i64;
            let positions: Vec<i64> = (0..n)
                .map(|_| {
                    pos += rng.gen_range(1..4);
                    pos
                })
                .collect();
            line_at(&positions)
        }
        1 => {
            let side = (n as f64).sqrt() * 3.0;
            let pts = (0..n).map(|_| vec![rng.gen_range(0.0..side), rng.gen_range(0.0..side)]).collect();
            FiniteMetricSpace::from_euclidean(ids(n), pts).expect("valid")
        }
        _ => random_graph(rng, n).0,
    }
}

/// A connected weighted graph on `n` vertices: a random spanning tree plus
/// about `n/3` extra edges, all with small integer weights. Returns the
/// space and the edge list by vertex index.
pub fn random_graph(rng: &mut FixtureRng, n: usize) -> (FiniteMetricSpace, Vec<(usize, usize, f64)>) {
    let mut edges = Vec::new();
    for i in 1..n {
        edges.push((rng.gen_range(0..i), i, rng.gen_range(1..4) as f64));
    }
    for _ in 0..n / 3 {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            edges.push((a, b, rng.gen_range(1..6) as f64));
        }
    }
    let named = edges.iter().map(|&(a, b, w)| (format!("p{a}"), format!("p{b}"), w)).collect();
    let space = FiniteMetricSpace::from_graph(ids(n), named).expect("spanning tree keeps it connected");
    (space, edges)
}

/// Up to `max_elements` open balls around random centres; points left
/// uncovered join the element of their nearest centre.
pub fn random_cover(rng: &mut FixtureRng, space: &Arc<FiniteMetricSpace>, max_elements: usize) -> Cover {
    let n = space.len();
    let all: Vec<usize> = (0..n).collect();
    let diam = space.diameter(&all).max(1.0);
    let k = rng.gen_range(1..=max_elements.min(n).max(1));
    let mut centres: Vec<usize> = all.clone();
    centres.shuffle(rng);
    centres.truncate(k);
    let mut elements: Vec<Vec<usize>> = centres
        .iter()
        .map(|&c| {
            let r = rng.gen_range(0.5..=diam / 2.0 + 1.0);
            (0..n).filter(|&y| space.dist(c, y) < r).collect()
        })
        .collect();
    for x in 0..n {
        if !elements.iter().any(|e| e.contains(&x)) {
            let nearest = (0..k)
                .min_by(|&a, &b| space.dist(x, centres[a]).total_cmp(&space.dist(x, centres[b])))
                .unwrap();
            elements[nearest].push(x);
        }
    }
    let named = elements.into_iter().enumerate().map(|(i, e)| (format!("u{i:02}"), e)).collect();
    Cover::new(space.clone(), "random", named).expect("every point assigned")
}

/// A random map into the `n`-skeleton: the barycentric map of a random
/// cover, folded.
pub fn random_skeleton_map(rng: &mut FixtureRng, space: &Arc<FiniteMetricSpace>, n: usize) -> PUMap {
    let cover = random_cover(rng, space, 20);
    fold_map(&barycentric_map(&cover).expect("metric space"), n)
}

/// Inputs to the skeleton push with its preconditions already met.
#[derive(Debug, Clone)]
pub struct PushFixture {
    pub f: PUMap,
    pub a: PointSet,
    pub r: f64,
    pub n: usize,
    pub eps: f64,
}

pub fn random_push_fixture(rng: &mut FixtureRng, max_points: usize) -> PushFixture {
    let space = Arc::new(random_space(rng, max_points));
    let cover = random_cover(rng, &space, 12);
    let f = barycentric_map(&cover).expect("metric space");
    let n = rng.gen_range(0..=2);
    let candidates: Vec<usize> = (0..space.len()).filter(|&x| f.value(x).unwrap().in_skeleton(n)).collect();
    let a = PointSet::new(space.len(), candidates.into_iter().filter(|_| rng.gen_bool(0.4))).unwrap();
    let all: Vec<usize> = (0..space.len()).collect();
    let diam = space.diameter(&all).max(1.0);
    let r = rng.gen_range(0.5..=diam);
    let measured = check_variation(&f, r, 2.0 + 1.0).expect("valid parameters").max_l1;
    let eps = if measured > 0.0 { measured * (1.0 + 1e-6) } else { 1e-3 };
    PushFixture { f, a, r, n, eps }
}

/// A one-dimensional fixture for the filler with its schedule.
#[derive(Debug, Clone)]
pub struct FillerLineFixture {
    pub n: usize,
    pub eps: f64,
    pub schedule: FillerSchedule,
    pub space: Arc<FiniteMetricSpace>,
    /// Barycentric map of a coarse interval cover.
    pub f: PUMap,
    pub a: PointSet,
    /// Brick cover at scale `R = k`.
    pub cover: Cover,
    /// How the lattice was thinned out.
    pub notes: Vec<String>,
}

/// Element starts, in units of `1/δ`, of the coarse interval cover behind
/// `f`; every element has length 12. Up to 18 consecutive starts are 6
/// apart (multiplicity two), after that 4 apart (multiplicity three from
/// 22 on).
const INTERVAL_STARTS: [i64; 9] = [0, 6, 12, 18, 22, 26, 30, 34, 38];
const INTERVAL_LEN: i64 = 12;
const TOTAL_LEN: i64 = 48;

/// Builds the filler fixture for `n ∈ {0, 1}` on an integer interval of
/// length `48/δ`, thinned to at most `max_points` points.
///
/// For `n = 1` the lattice keeps every integer in two windows of width `3R`
/// (around the right end of `A`, and around an element boundary inside
/// `C`) and a uniform coarse lattice elsewhere. For `n = 0` the points are
/// clusters of `R` consecutive integers starting at multiples of `2R` and
/// at least `6R` apart, so the brick cover at scale `R` has multiplicity 1.
pub fn filler_line_fixture(n: usize, eps: f64, max_points: usize) -> Result<FillerLineFixture> {
    let schedule = find_schedule(n, eps, |r| brick_mesh_bound(r, 1), 1_000_000)?;
    let k = schedule.k as i64;
    let unit = (schedule.r * schedule.s_of_k).round() as i64; // 1/δ
    let total = TOTAL_LEN * unit;
    let mut notes = vec![format!(
        "interval [0, {total}] = 48/delta with 1/delta = {unit}; 10*k*S(k) = {}",
        10 * unit
    )];
    let (positions, a_end) = if n == 0 {
        let a_end = 6 * unit - 2 * k;
        let budget = (max_points as i64 / k).max(2);
        let slots = total / (2 * k);
        let stride = (slots / budget).max(3);
        let mut pos = Vec::new();
        let mut j = 0;
        while j * 2 * k + k <= total && pos.len() as i64 + k <= max_points as i64 {
            let start = j * 2 * k;
            pos.extend(start..start + k);
            j += stride;
        }
        notes.push(format!(
            "clusters of {k} consecutive integers every {} units; {} points",
            stride * 2 * k,
            pos.len()
        ));
        (pos, a_end)
    } else {
        let a_end = 22 * unit - k / 2;
        let half = 3 * k / 2;
        let windows = [(a_end - half, a_end + half), (30 * unit - half, 30 * unit + half)];
        let mut pos: Vec<i64> = windows.iter().flat_map(|&(lo, hi)| lo..=hi).collect();
        let coarse_budget = (max_points as i64 - pos.len() as i64 - 1).max(1);
        let spacing = (total + coarse_budget - 1) / coarse_budget;
        pos.extend((0..=total / spacing).map(|i| i * spacing));
        pos.push(total);
        pos.sort_unstable();
        pos.dedup();
        notes.push(format!(
            "unit spacing on [{}, {}] and [{}, {}]; spacing {spacing} elsewhere; {} points",
            windows[0].0,
            windows[0].1,
            windows[1].0,
            windows[1].1,
            pos.len()
        ));
        (pos, a_end)
    };
    let space = Arc::new(line_at(&positions));
    let elements = INTERVAL_STARTS
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let (lo, hi) = (s * unit, (s + INTERVAL_LEN) * unit);
            let members = positions
                .iter()
                .enumerate()
                .filter(|&(_, &p)| p >= lo && p < hi)
                .map(|(x, _)| x)
                .collect();
            (format!("e{i}"), members)
        })
        .collect();
    let coarse = Cover::new(space.clone(), "intervals", elements)?;
    let f = barycentric_map(&coarse)?;
    let a = PointSet::new(space.len(), (0..positions.len()).filter(|&x| positions[x] <= a_end))?;
    notes.push(format!("A = points at positions <= {a_end} ({} points)", a.len()));
    let cover = brick_cover(&space, schedule.r, 1)?.cover;
    Ok(FillerLineFixture { n, eps, schedule, space, f, a, cover, notes })
}
