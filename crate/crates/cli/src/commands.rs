use std::path::Path;
use std::sync::Arc;

use coarsescope::asdim::{certify_from_cover, certify_from_map, estimate_upper_bound, exhaustive_lower_bound, theorem_b_pipeline, EXHAUSTIVE_MAX_POINTS};
use coarsescope::covers::{brick_cover, brick_mesh_bound, greedy_cover, Cover};
use coarsescope::docs;
use coarsescope::filler::{build_filler, find_schedule};
use coarsescope::property_a::{ball_family, property_a_partition, PropertyAInput};
use coarsescope::pu_maps::{barycentric_map, check_barycentric_bound, check_delta_pu, check_variation, map_lebesgue, tight_symmetric_constant, PUMap};
use coarsescope::skeleton_push::push_to_skeleton;
use coarsescope::{nerve, FiniteMetricSpace, PointSet};
use serde_json::json;

use crate::report::{load, to_json, InputError, RunReport};
use crate::{AnalyzeArgs, AsdimArgs, BarycentricArgs, CoverArgs, FillerArgs, Method, PropaArgs, PushArgs};

type Space = Arc<FiniteMetricSpace>;

fn load_space(rep: &mut RunReport, path: &Path) -> Result<Space, InputError> {
    let v = load(rep, "space", path)?;
    Ok(Arc::new(docs::parse_space(&v)?))
}

fn load_cover(rep: &mut RunReport, path: &Path, space: &Space) -> Result<Cover, InputError> {
    let v = load(rep, "cover", path)?;
    Ok(docs::parse_cover(&v, space)?)
}

fn load_map(rep: &mut RunReport, path: &Path, space: &Space) -> Result<PUMap, InputError> {
    let v = load(rep, "map", path)?;
    Ok(docs::parse_pu_map(&v, space)?)
}

fn load_subset(rep: &mut RunReport, path: &Path, space: &Space) -> Result<PointSet, InputError> {
    let v = load(rep, "subset", path)?;
    Ok(docs::parse_subset(&v, space)?)
}

fn space_summary(space: &FiniteMetricSpace) -> serde_json::Value {
    let all: Vec<usize> = (0..space.len()).collect();
    json!({
        "points": space.len(),
        "format": format!("{:?}", space.format()).to_lowercase(),
        "euclidean_dim": space.euclidean_dim(),
        "diameter": space.diameter(&all),
    })
}

fn map_summary(f: &PUMap) -> Result<serde_json::Value, InputError> {
    let (lambda, witness) = tight_symmetric_constant(f);
    Ok(json!({
        "domain": f.domain().len(),
        "max_support": f.max_support(),
        "lebesgue": to_json(&map_lebesgue(f)?),
        "symmetric_constant": lambda,
        "symmetric_witness": witness,
    }))
}

fn cover_summary(rep: &mut RunReport, cover: &Cover) -> Result<(), InputError> {
    let stats = cover.stats();
    let k = nerve(cover);
    rep.certify(
        "cover_stats",
        true,
        &json!({
            "elements": cover.len(),
            "lebesgue": to_json(&stats.lebesgue),
            "multiplicity": stats.multiplicity,
            "mesh": stats.mesh,
            "nerve_dimension": k.dimension(),
        }),
    );
    rep.certify_result("barycentric_bound", check_barycentric_bound(cover), |b| b.ok)?;
    Ok(())
}

pub fn analyze(a: AnalyzeArgs, seed: u64) -> Result<RunReport, InputError> {
    let mut rep = RunReport::new("analyze", seed);
    let space = load_space(&mut rep, &a.space)?;
    rep.certify("space", true, &space_summary(&space));
    rep.param("R", a.r);
    rep.param("eps", a.eps);
    rep.param("delta", a.delta);
    rep.param("M", a.m);
    rep.param("n", a.n);
    if let Some(path) = &a.cover {
        let cover = load_cover(&mut rep, path, &space)?;
        cover_summary(&mut rep, &cover)?;
        if let (Some(r), Some(n)) = (a.r, a.n) {
            let c = certify_from_cover(&cover, r, n);
            rep.certify("asdim_at_scale", c.verdict, &c);
        }
    }
    if let Some(path) = &a.map {
        let f = load_map(&mut rep, path, &space)?;
        rep.certify("map", true, &map_summary(&f)?);
        if let (Some(r), Some(eps)) = (a.r, a.eps) {
            rep.certify_result("variation", check_variation(&f, r, eps), |v| v.ok)?;
        }
        if let Some(delta) = a.delta {
            let m = a.m.unwrap_or(f64::INFINITY);
            rep.certify_result("delta_pu", check_delta_pu(&f, delta, m), |c| c.verdict)?;
            if let Some(n) = a.n {
                rep.certify_result("asdim_from_map", certify_from_map(&f, delta, n, m), |c| c.verdict)?;
            }
        }
    }
    Ok(rep)
}

pub fn cover(a: CoverArgs, seed: u64) -> Result<RunReport, InputError> {
    let mut rep = RunReport::new("cover", seed);
    let space = load_space(&mut rep, &a.space)?;
    rep.param("R", a.r);
    rep.param("n", a.n);
    let method = match (a.method, space.euclidean_dim()) {
        (Method::Auto, Some(_)) | (Method::Brick, _) => Method::Brick,
        _ => Method::Greedy,
    };
    let (cover, generator) = match method {
        Method::Brick => {
            let dim = space.euclidean_dim().ok_or_else(|| InputError("brick cover needs a Euclidean space".into()))?;
            let b = brick_cover(&space, a.r, dim)?;
            (b.cover, json!({ "method": "brick", "mesh_bound": b.mesh_bound }))
        }
        _ => {
            let g = greedy_cover(&space, a.r, a.n + 1)?;
            (g.cover().clone(), json!({ "method": "greedy", "target_reached": g.is_success() }))
        }
    };
    rep.param("generator", generator);
    cover_summary(&mut rep, &cover)?;
    let c = certify_from_cover(&cover, a.r, a.n);
    rep.certify("asdim_at_scale", c.verdict, &c);
    rep.output("cover", docs::cover_to_json(&cover));
    Ok(rep)
}

pub fn barycentric(a: BarycentricArgs, seed: u64) -> Result<RunReport, InputError> {
    let mut rep = RunReport::new("barycentric", seed);
    let space = load_space(&mut rep, &a.space)?;
    let cover = load_cover(&mut rep, &a.cover, &space)?;
    rep.param("delta", a.delta);
    rep.param("M", a.m);
    let f = barycentric_map(&cover)?;
    rep.certify_result("barycentric_bound", check_barycentric_bound(&cover), |b| b.ok)?;
    rep.certify("map", true, &map_summary(&f)?);
    if let Some(delta) = a.delta {
        let m = a.m.unwrap_or(f64::INFINITY);
        rep.certify_result("delta_pu", check_delta_pu(&f, delta, m), |c| c.verdict)?;
    }
    rep.output("map", docs::pu_map_to_json(&f));
    Ok(rep)
}

/// Smallest admissible variation bound: the measured maximum with a little
/// headroom, since the check is strict.
fn measured_eps(f: &PUMap, r: f64) -> Result<f64, InputError> {
    let m = check_variation(f, r, 2.0)?.max_l1;
    Ok(m * (1.0 + 1e-6) + 1e-12)
}

pub fn push(a: PushArgs, seed: u64) -> Result<RunReport, InputError> {
    let mut rep = RunReport::new("push", seed);
    let space = load_space(&mut rep, &a.space)?;
    let f = load_map(&mut rep, &a.map, &space)?;
    let set = load_subset(&mut rep, &a.subset, &space)?;
    let eps = match a.eps {
        Some(e) => e,
        None => measured_eps(&f, a.r)?,
    };
    rep.param("R", a.r);
    rep.param("n", a.n);
    rep.param("eps", eps);
    rep.param("eps_measured", a.eps.is_none());
    if let Some(p) = rep.certify_result("push", push_to_skeleton(&f, &set, a.r, a.n, eps), |p| p.all_verified())? {
        rep.output("r", docs::pu_map_to_json(&p.r));
    }
    Ok(rep)
}

pub fn filler(a: FillerArgs, seed: u64) -> Result<RunReport, InputError> {
    let mut rep = RunReport::new("filler", seed);
    let space = load_space(&mut rep, &a.space)?;
    let f = load_map(&mut rep, &a.map, &space)?;
    let set = load_subset(&mut rep, &a.subset, &space)?;
    rep.param("n", a.n);
    rep.param("eps", a.eps);
    rep.param("k_limit", a.k_limit);
    let supplied = match &a.cover {
        Some(p) => Some(load_cover(&mut rep, p, &space)?),
        None => None,
    };
    let schedule = match &supplied {
        // a fixed cover serves every scale up to its Lebesgue number
        Some(c) => {
            let mesh = c.mesh();
            find_schedule(a.n, a.eps, |r| mesh.max(r), a.k_limit)
        }
        None => {
            let dim = space
                .euclidean_dim()
                .ok_or_else(|| InputError("without --cover the space must be Euclidean".into()))?;
            find_schedule(a.n, a.eps, |r| brick_mesh_bound(r, dim), a.k_limit)
        }
    };
    let Some(schedule) = rep.certify_result("schedule", schedule, |s| s.holds())? else {
        return Ok(rep);
    };
    let cover = match supplied {
        Some(c) => c,
        None => brick_cover(&space, schedule.r, space.euclidean_dim().expect("checked"))?.cover,
    };
    let Some(res) = rep.certify_result("filler", build_filler(&f, &set, &schedule, &cover), |r| r.certificate_ok)? else {
        return Ok(rep);
    };
    rep.certify(
        "filler_intermediate",
        res.intermediate_ok(),
        &json!({ "alpha_r": res.alpha_r, "beta_part": res.beta_part, "h_coarse": res.h_coarse }),
    );
    rep.certify_result("asdim_from_filler", theorem_b_pipeline(&f, &res.h, a.eps, a.n), |p| p.verdict)?;
    rep.output("h", docs::pu_map_to_json(&res.h));
    rep.output("r", docs::pu_map_to_json(&res.push.r));
    rep.output("beta", docs::pu_map_to_json(&res.beta.map));
    let alpha: serde_json::Map<String, serde_json::Value> =
        (0..space.len()).map(|x| (space.id(x).to_string(), json!(res.alpha.values[x]))).collect();
    rep.output("alpha", serde_json::Value::Object(alpha));
    rep.output("schedule", to_json(&schedule));
    if a.cover.is_none() {
        rep.output("cover", docs::cover_to_json(&cover));
    }
    Ok(rep)
}

pub fn propa(a: PropaArgs, seed: u64) -> Result<RunReport, InputError> {
    let mut rep = RunReport::new("propa", seed);
    let space = load_space(&mut rep, &a.space)?;
    let family = match &a.family {
        Some(p) => {
            let v = load(&mut rep, "family", p)?;
            docs::parse_set_family(&v, &space)?
        }
        None => {
            let s = a.s.ok_or_else(|| InputError("either --family or --S is required".into()))?;
            rep.param("depth", a.depth);
            ball_family(&space, s, a.depth)?
        }
    };
    let bound_m = a.bound_m.unwrap_or(4.0 * family.s_radius());
    let input = PropertyAInput { r: a.r, eps: a.eps, m: a.m, delta: a.delta };
    rep.param("input", input);
    rep.param("S", family.s_radius());
    rep.param("bound_m", bound_m);
    if let Some(res) = rep.certify_result("cx_cases", property_a_partition(&family, &input, bound_m), |r| {
        r.cx.case_claims_ok()
    })? {
        rep.certify("chain", res.chain.ok(), &res.chain);
        rep.certify("delta_pu", res.certificate.verdict, &res.certificate);
        rep.output("map", docs::pu_map_to_json(&res.map));
    }
    Ok(rep)
}

pub fn asdim(a: AsdimArgs, seed: u64) -> Result<RunReport, InputError> {
    let mut rep = RunReport::new("asdim", seed);
    let space = load_space(&mut rep, &a.space)?;
    rep.param("scales", &a.scales);
    rep.param("nmax", a.nmax);
    if a.exhaustive && space.len() > EXHAUSTIVE_MAX_POINTS {
        return Err(InputError(format!(
            "--exhaustive needs at most {EXHAUSTIVE_MAX_POINTS} points, the space has {}",
            space.len()
        )));
    }
    let mut certs = Vec::new();
    for &r in &a.scales {
        let up = estimate_upper_bound(&space, r, a.nmax)?;
        rep.certify("upper_bound", up.n_best.is_some(), &up);
        if let Some(c) = &up.certificate {
            certs.push(to_json(c));
        }
        if a.exhaustive {
            if let Some(w) = &up.witness {
                let low = exhaustive_lower_bound(&space, r, w.mesh())?;
                let consistent = matches!((low.n_min, up.n_best), (Some(lo), Some(hi)) if lo <= hi);
                rep.certify("lower_bound", consistent, &low);
            }
        }
    }
    if let Some(path) = &a.map {
        let f = load_map(&mut rep, path, &space)?;
        let delta = a.delta.ok_or_else(|| InputError("--map needs --delta".into()))?;
        let n = a.n.unwrap_or_else(|| f.max_support().saturating_sub(1));
        let m = a.m.unwrap_or(f64::INFINITY);
        if let Some(c) = rep.certify_result("asdim_from_map", certify_from_map(&f, delta, n, m), |c| c.verdict)? {
            certs.push(to_json(&c));
        }
    }
    rep.output("certificates", serde_json::Value::Array(certs));
    Ok(rep)
}
