use std::sync::Arc;

use coarsescope::filler::build_alpha;
use coarsescope::fixtures::{self, FixtureRng};
use coarsescope::oracle::{self, Dense};
use coarsescope::property_a::{ball_family, symdiff_ratio};
use coarsescope::pu_maps::{barycentric_map, check_lipschitz, check_variation, map_lebesgue, PUMap};
use coarsescope::skeleton_push::{fold, push_to_skeleton};
use coarsescope::FiniteMetricSpace;
use serde_json::json;

use crate::report::{InputError, RunReport};
use crate::{FixtureSize, OracleArgs};

/// Largest difference tolerated where the two paths sum in different
/// orders. Everything else must agree exactly.
const ROUNDING: f64 = 1e-12;

#[derive(Default)]
struct Diff {
    comparisons: usize,
    max_diff: f64,
    mismatch: Option<String>,
}

impl Diff {
    fn compare(&mut self, what: impl FnOnce() -> String, main: f64, reference: f64, allowed: f64) {
        self.comparisons += 1;
        let d = if main == reference { 0.0 } else { (main - reference).abs() };
        let d = if d.is_nan() { f64::INFINITY } else { d };
        self.max_diff = self.max_diff.max(d);
        if d > allowed && self.mismatch.is_none() {
            self.mismatch = Some(format!("{}: main {main} vs oracle {reference}", what()));
        }
    }

    fn exact_vec(&mut self, what: impl FnOnce() -> String, main: &[f64], reference: &[f64]) {
        self.comparisons += 1;
        let same = main.len() == reference.len()
            && main.iter().zip(reference).all(|(a, b)| a.to_bits() == b.to_bits());
        if !same && self.mismatch.is_none() {
            self.mismatch = Some(format!("{}: main {main:?} vs oracle {reference:?}", what()));
        }
    }

    fn record(self, rep: &mut RunReport, name: &str) {
        let detail = json!({
            "comparisons": self.comparisons,
            "max_diff": self.max_diff,
            "mismatch": self.mismatch,
        });
        rep.certify(name, self.mismatch.is_none(), &detail);
    }
}

fn dense(f: &PUMap) -> Dense {
    let k = f.target().vertex_count();
    f.values()
        .iter()
        .map(|v| {
            let mut row = vec![0.0; k];
            if let Some(p) = v {
                for &(u, w) in p.weights() {
                    row[u as usize] = w;
                }
            }
            row
        })
        .collect()
}

fn diameter(space: &FiniteMetricSpace) -> f64 {
    let all: Vec<usize> = (0..space.len()).collect();
    space.diameter(&all)
}

#[derive(Default)]
struct Checks {
    graph: Diff,
    stats: Diff,
    barycentric: Diff,
    lipschitz: Diff,
    variation: Diff,
    lebesgue: Diff,
    fold: Diff,
    push: Diff,
    alpha: Diff,
    symdiff: Diff,
}

fn trial(rng: &mut FixtureRng, max_points: usize, c: &mut Checks) -> Result<(), InputError> {
    let n = max_points.max(2);
    let (g, edges) = fixtures::random_graph(rng, n);
    let fw = oracle::floyd_warshall(n, &edges);
    for x in 0..n {
        for y in 0..n {
            c.graph.compare(|| format!("d({x},{y})"), g.dist(x, y), fw[x][y], 0.0);
        }
    }

    let space = Arc::new(fixtures::random_space(rng, max_points));
    let d = oracle::distance_matrix(&space);
    let cover = fixtures::random_cover(rng, &space, 20);
    let stats = cover.stats();
    let (l, m, mesh) = oracle::cover_stats(&d, cover.elements());
    c.stats.compare(|| "lebesgue".into(), stats.lebesgue, l, 0.0);
    c.stats.compare(|| "multiplicity".into(), stats.multiplicity as f64, m as f64, 0.0);
    c.stats.compare(|| "mesh".into(), stats.mesh, mesh, 0.0);

    let f = barycentric_map(&cover)?;
    let fd = dense(&f);
    let od = oracle::barycentric(&d, cover.elements());
    for x in 0..space.len() {
        for v in 0..cover.len() {
            c.barycentric.compare(|| format!("phi_{v}({x})"), fd[x][v], od[x][v], ROUNDING);
            c.barycentric.compare(|| format!("support of phi_{v} at {x}"), (fd[x][v] > 0.0) as u8 as f64, (od[x][v] > 0.0) as u8 as f64, 0.0);
        }
    }
    let lam = check_lipschitz(&f, 0.0, 0.0)?.lambda_hat;
    c.lipschitz.compare(|| "lambda_hat".into(), lam, oracle::lipschitz_hat(&d, &fd, 0.0), ROUNDING);
    let r = (diameter(&space) / 3.0).max(1.0);
    let var = check_variation(&f, r, 2.0)?.max_l1;
    c.variation.compare(|| format!("max variation at R={r}"), var, oracle::max_variation(&d, &fd, r), ROUNDING);
    c.lebesgue.compare(|| "map lebesgue".into(), map_lebesgue(&f)?, oracle::map_lebesgue(&d, &fd), 0.0);

    for k in 0..3 {
        for x in 0..space.len() {
            let p = f.value(x).expect("total");
            let mut main = vec![0.0; cover.len()];
            for &(u, w) in fold(p, k).weights() {
                main[u as usize] = w;
            }
            c.fold.exact_vec(|| format!("fold_{k} at {x}"), &main, &oracle::fold(&fd[x], k));
        }
    }

    let px = fixtures::random_push_fixture(rng, max_points);
    let pspace = px.f.space().clone();
    let pd = oracle::distance_matrix(&pspace);
    let push = push_to_skeleton(&px.f, &px.a, px.r, px.n, px.eps)?;
    let rd = dense(&push.r);
    let pf = dense(&px.f);
    for x in push.neighborhood.iter() {
        c.push.exact_vec(|| format!("r at {x}"), &rd[x], &oracle::fold(&pf[x], px.n));
    }
    let members: Vec<usize> = px.a.iter().collect();
    let alpha = build_alpha(&pspace, &px.a, px.r)?;
    let oa = oracle::alpha(&pd, &members, px.r);
    for x in 0..pspace.len() {
        c.alpha.compare(|| format!("alpha at {x}"), alpha.values[x], oa[x], ROUNDING);
    }

    let family = ball_family(&space, r, 2)?;
    for x in 0..space.len() {
        for y in 0..space.len() {
            let o = oracle::symdiff_ratio(family.set(x), family.set(y));
            c.symdiff.compare(|| format!("ratio({x},{y})"), symdiff_ratio(&family, x, y), o, 0.0);
        }
    }
    Ok(())
}

pub fn oracle(a: OracleArgs, seed: u64) -> Result<RunReport, InputError> {
    let mut rep = RunReport::new("oracle", seed);
    let max_points = match a.fixture {
        FixtureSize::Small => 8,
        FixtureSize::Medium => 60,
    };
    rep.param("fixture", if max_points == 8 { "small" } else { "medium" });
    rep.param("max_points", max_points);
    rep.param("trials", a.trials);
    let mut rng = fixtures::rng(seed);
    let mut c = Checks::default();
    for _ in 0..a.trials {
        trial(&mut rng, max_points, &mut c)?;
    }
    c.graph.record(&mut rep, "graph_distances");
    c.stats.record(&mut rep, "cover_stats");
    c.barycentric.record(&mut rep, "barycentric");
    c.lipschitz.record(&mut rep, "lipschitz_constant");
    c.variation.record(&mut rep, "variation");
    c.lebesgue.record(&mut rep, "map_lebesgue");
    c.fold.record(&mut rep, "fold");
    c.push.record(&mut rep, "push");
    c.alpha.record(&mut rep, "alpha");
    c.symdiff.record(&mut rep, "symdiff_ratio");
    Ok(rep)
}
