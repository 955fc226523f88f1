//! Fillers: extend a map that already lands in the n-skeleton on `A` to an
//! ε-partition of unity `h = α·r + (1−α)·β` on all of `X`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::covers::Cover;
use crate::error::{require_positive, Error, Result};
use crate::metric_space::{FiniteMetricSpace, PointSet};
use crate::pu_maps::{
    barycentric_map, check_delta_pu, check_lipschitz, lipschitz_scan, map_lebesgue, tight_symmetric_constant,
    LipschitzReport, PUMap,
};
use crate::simplicial::{SimplexPoint, Vertex};
use crate::skeleton_push::{push_to_skeleton, PushResult};
use crate::tol::tau;

/// `Σ_v |sa·a_v − sb·b_v|` for sparse vectors sorted by vertex; a missing
/// vector counts as zero.
pub(crate) fn scaled_l1(a: Option<&SimplexPoint>, sa: f64, b: Option<&SimplexPoint>, sb: f64) -> f64 {
    let a = a.map_or(&[][..], |p| p.weights());
    let b = b.map_or(&[][..], |p| p.weights());
    let (mut i, mut j, mut acc) = (0, 0, 0.0);
    while i < a.len() || j < b.len() {
        let va = a.get(i).map_or(Vertex::MAX, |t| t.0);
        let vb = b.get(j).map_or(Vertex::MAX, |t| t.0);
        if va < vb || j == b.len() {
            acc += (sa * a[i].1).abs();
            i += 1;
        } else if vb < va || i == a.len() {
            acc += (sb * b[j].1).abs();
            j += 1;
        } else {
            acc += (sa * a[i].1 - sb * b[j].1).abs();
            i += 1;
            j += 1;
        }
    }
    acc
}

/// The pair `(α, 1−α)` of the barycentric partition of unity of
/// `{P, Q}` with `P = B(A,R)`, `Q = B(X∖P, R)`.
#[derive(Debug, Clone, Serialize)]
pub struct Alpha {
    pub values: Vec<f64>,
    #[serde(skip)]
    pub p: PointSet,
    #[serde(skip)]
    pub q: PointSet,
    /// `x ↦ (α(x), 1−α(x))` against `32/R`.
    pub lipschitz: LipschitzReport,
    #[serde(serialize_with = "crate::real::serialize")]
    pub cover_lebesgue: f64,
    pub lebesgue_ok: bool,
}

pub fn build_alpha(space: &Arc<FiniteMetricSpace>, a: &PointSet, radius: f64) -> Result<Alpha> {
    require_positive("R", radius)?;
    let p = space.neighborhood(a, radius)?;
    let c = p.complement();
    let q = space.neighborhood(&c, radius)?;
    let not_q = q.complement();
    let values: Vec<f64> = (0..space.len())
        .into_par_iter()
        .map(|x| {
            if c.is_empty() {
                return 1.0;
            }
            let dp = space.dist_to_set(x, &c);
            let dq = space.dist_to_set(x, &not_q);
            if dq.is_infinite() {
                0.0
            } else {
                dp / (dp + dq)
            }
        })
        .collect();
    let all: Vec<usize> = (0..space.len()).collect();
    let lipschitz = lipschitz_scan(space, &all, 2.0, 32.0 / radius, 0.0, |x, y| {
        2.0 * (values[x] - values[y]).abs()
    });
    let cover = Cover::new(
        space.clone(),
        "PQ",
        vec![("P".into(), p.members().to_vec()), ("Q".into(), q.members().to_vec())],
    )?;
    let cover_lebesgue = cover.stats().lebesgue;
    Ok(Alpha {
        values,
        p,
        q,
        lipschitz,
        lebesgue_ok: cover_lebesgue >= radius / 2.0 - tau(),
        cover_lebesgue,
    })
}

/// `{U_v}`: the union of the elements of a cover assigned to each vertex.
#[derive(Debug, Clone, Serialize)]
pub struct MergedCover {
    #[serde(skip)]
    pub cover: Cover,
    /// Target vertex of each merged element.
    #[serde(skip)]
    pub vertices: Vec<Vertex>,
    /// Vertex label assigned to each source element, in source order.
    pub assignment: Vec<String>,
    pub source_multiplicity: usize,
    pub multiplicity: usize,
    #[serde(serialize_with = "crate::real::serialize")]
    pub source_lebesgue: f64,
    #[serde(serialize_with = "crate::real::serialize")]
    pub lebesgue: f64,
    pub multiplicity_ok: bool,
    pub lebesgue_ok: bool,
    pub star_inclusion_ok: bool,
}

/// Assigns each element `U` the vertex maximizing `min_{x∈U} f(x)(v)` (ties
/// to the smaller vertex) and merges elements with equal vertex. When
/// `delta` is given, `mesh(U) < 1/δ` is checked first.
pub fn merge_cover_by_assignment(u: &Cover, f: &PUMap, delta: Option<f64>) -> Result<MergedCover> {
    if !f.is_total() {
        return Err(Error::Precondition { clause: "total", detail: "f must be defined everywhere".into() });
    }
    if u.space().ids() != f.space().ids() {
        return Err(Error::Precondition { clause: "space", detail: "cover and map live on different spaces".into() });
    }
    if let Some(delta) = delta {
        let mesh = u.mesh();
        if mesh >= 1.0 / delta {
            return Err(Error::Precondition {
                clause: "mesh",
                detail: format!("mesh {mesh} >= 1/delta = {}", 1.0 / delta),
            });
        }
    }
    let assigned: Vec<Result<Vertex>> = (0..u.len())
        .into_par_iter()
        .map(|s| {
            let elem = u.element(s);
            let first = f.value(elem[0]).unwrap();
            let mut best: Option<(Vertex, f64)> = None;
            for &(v, _) in first.weights() {
                let depth = elem.iter().map(|&x| f.value(x).unwrap().weight(v)).fold(f64::INFINITY, f64::min);
                if depth > 0.0 && best.map_or(true, |(_, b)| depth > b) {
                    best = Some((v, depth));
                }
            }
            best.map(|(v, _)| v).ok_or_else(|| Error::NoAssignableVertex { element: u.labels()[s].clone() })
        })
        .collect();
    let assigned = assigned.into_iter().collect::<Result<Vec<_>>>()?;

    let mut groups: std::collections::BTreeMap<Vertex, Vec<usize>> = Default::default();
    for (s, &v) in assigned.iter().enumerate() {
        groups.entry(v).or_default().extend_from_slice(u.element(s));
    }
    let target = f.target();
    let vertices: Vec<Vertex> = groups.keys().copied().collect();
    let elements = groups.into_iter().map(|(v, m)| (target.label(v).to_string(), m)).collect();
    let cover = Cover::new(f.space().clone(), "merged", elements)?;

    let source = u.stats();
    let merged = cover.stats();
    let star_inclusion_ok = vertices
        .iter()
        .enumerate()
        .all(|(s, &v)| cover.element(s).iter().all(|&x| f.value(x).unwrap().in_star(v)));
    Ok(MergedCover {
        assignment: assigned.iter().map(|&v| target.label(v).to_string()).collect(),
        multiplicity_ok: merged.multiplicity <= source.multiplicity,
        lebesgue_ok: merged.lebesgue >= source.lebesgue - tau(),
        source_multiplicity: source.multiplicity,
        multiplicity: merged.multiplicity,
        source_lebesgue: source.lebesgue,
        lebesgue: merged.lebesgue,
        star_inclusion_ok,
        cover,
        vertices,
    })
}

/// Barycentric map of a merged cover, as a map into `f`'s target.
#[derive(Debug, Clone, Serialize)]
pub struct Beta {
    #[serde(skip)]
    pub map: PUMap,
    pub support_ok: bool,
    pub support_witness: Option<String>,
    #[serde(serialize_with = "crate::real::serialize")]
    pub lebesgue: f64,
    pub lebesgue_ok: bool,
}

pub fn build_beta(merged: &MergedCover, f: &PUMap, radius: f64) -> Result<Beta> {
    let phi = barycentric_map(&merged.cover)?;
    let values: Vec<Option<SimplexPoint>> = phi
        .values()
        .iter()
        .map(|p| {
            p.as_ref().map(|p| {
                SimplexPoint::from_sorted_unchecked(
                    p.weights().iter().map(|&(s, w)| (merged.vertices[s as usize], w)).collect(),
                )
            })
        })
        .collect();
    let map = PUMap::new_unchecked(f.space().clone(), f.target().clone(), values);
    let bad = (0..map.space().len()).find(|&x| !map.value(x).unwrap().carried_by(f.value(x).unwrap()));
    let lebesgue = map_lebesgue(&map)?;
    Ok(Beta {
        support_ok: bad.is_none(),
        support_witness: bad.map(|x| f.space().id(x).to_string()),
        lebesgue_ok: lebesgue >= radius - tau(),
        lebesgue,
        map,
    })
}

/// Parameters `R = k`, `δ = 1/(k·S(k))`, `μ = (8n+5)(R+1)δ` and the three
/// inequalities they must satisfy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FillerSchedule {
    pub n: usize,
    pub eps: f64,
    pub k: u64,
    pub r: f64,
    pub delta: f64,
    pub mu: f64,
    pub s_of_k: f64,
    /// `(1−(n+1)μ) / ((n+1)·4(n+5)²/R)`, compared with `1/ε`.
    pub lebesgue_margin: f64,
    /// `4(n+5)²/R`.
    pub lipschitz_h: f64,
    pub ineq1: bool,
    pub ineq2: bool,
    pub ineq3: bool,
}

impl FillerSchedule {
    pub fn holds(&self) -> bool {
        self.ineq1 && self.ineq2 && self.ineq3
    }

    fn blocking(&self) -> String {
        let mut b = Vec::new();
        if !self.ineq1 {
            b.push("(1) Lebesgue");
        }
        if !self.ineq2 {
            b.push("(2) mu < eps");
        }
        if !self.ineq3 {
            b.push("(3) Lipschitz");
        }
        b.join(", ")
    }
}

/// The schedule at a fixed `k`, whether or not it satisfies the
/// inequalities.
pub fn schedule_at(n: usize, eps: f64, k: u64, s_of_k: f64) -> FillerSchedule {
    let m = n as f64;
    let r = k as f64;
    let delta = 1.0 / (r * s_of_k);
    let mu = (8.0 * m + 5.0) * (r + 1.0) * delta;
    let lipschitz_h = 4.0 * (m + 5.0) * (m + 5.0) / r;
    let lebesgue_margin = (1.0 - (m + 1.0) * mu) / ((m + 1.0) * lipschitz_h);
    FillerSchedule {
        n,
        eps,
        k,
        r,
        delta,
        mu,
        s_of_k,
        lebesgue_margin,
        lipschitz_h,
        ineq1: lebesgue_margin >= 1.0 / eps,
        ineq2: mu < eps,
        ineq3: lipschitz_h < eps,
    }
}

/// Smallest integer `k ≤ k_limit` whose schedule satisfies all three
/// inequalities, for the cover mesh function `mesh_fn(R) = S(R)`.
pub fn find_schedule<F: Fn(f64) -> f64>(n: usize, eps: f64, mesh_fn: F, k_limit: u64) -> Result<FillerSchedule> {
    require_positive("eps", eps)?;
    let mut last = None;
    for k in 1..=k_limit {
        let s = schedule_at(n, eps, k, mesh_fn(k as f64));
        if s.holds() {
            return Ok(s);
        }
        last = Some(s);
    }
    Err(Error::ScheduleNotFound {
        k_limit,
        blocking: last.map_or_else(|| "k_limit is 0".into(), |s| s.blocking()),
    })
}

/// `α·r + (1−α)·β` pointwise. `r` is only read where `α > 0`; `α = 1` and
/// `α = 0` return `r(x)` and `β(x)` unchanged.
pub fn combine(alpha: &[f64], r: &PUMap, beta: &PUMap) -> Result<PUMap> {
    let space = beta.space();
    let values: Vec<Result<Option<SimplexPoint>>> = (0..space.len())
        .into_par_iter()
        .map(|x| {
            let a = alpha[x];
            let Some(b) = beta.value(x) else { return Ok(None) };
            if a == 0.0 {
                return Ok(Some(b.clone()));
            }
            let rx = r.value(x).ok_or_else(|| Error::Precondition {
                clause: "r_domain",
                detail: format!("alpha({}) > 0 but r is undefined there", space.id(x)),
            })?;
            if a == 1.0 {
                return Ok(Some(rx.clone()));
            }
            let mut w: Vec<(Vertex, f64)> = Vec::with_capacity(rx.support_len() + b.support_len());
            let (ra, bb) = (rx.weights(), b.weights());
            let (mut i, mut j) = (0, 0);
            while i < ra.len() || j < bb.len() {
                let vr = ra.get(i).map_or(Vertex::MAX, |t| t.0);
                let vb = bb.get(j).map_or(Vertex::MAX, |t| t.0);
                if j == bb.len() || (i < ra.len() && vr < vb) {
                    w.push((vr, a * ra[i].1));
                    i += 1;
                } else if i == ra.len() || vb < vr {
                    w.push((vb, (1.0 - a) * bb[j].1));
                    j += 1;
                } else {
                    w.push((vr, a * ra[i].1 + (1.0 - a) * bb[j].1));
                    i += 1;
                    j += 1;
                }
            }
            w.retain(|&(_, x)| x > 0.0);
            Ok(Some(SimplexPoint::from_sorted_unchecked(w)))
        })
        .collect();
    let values = values.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(PUMap::new_unchecked(space.clone(), beta.target().clone(), values))
}

/// Everything computed by [`build_filler`].
#[derive(Debug, Clone, Serialize)]
pub struct FillerResult {
    pub schedule: FillerSchedule,
    #[serde(serialize_with = "crate::real::serialize")]
    pub delta_f: f64,
    pub eps_push: f64,
    pub alpha: Alpha,
    pub merged: MergedCover,
    pub beta: Beta,
    pub push: PushResult,
    #[serde(skip)]
    pub h: PUMap,
    pub agreement_on_a: bool,
    pub carrier_inclusion: bool,
    pub carrier_witness: Option<String>,
    pub in_skeleton: bool,
    pub lipschitz: LipschitzReport,
    #[serde(serialize_with = "crate::real::serialize")]
    pub lebesgue: f64,
    pub lebesgue_ok: bool,
    /// `α·r` against `(34/R, μ)`.
    pub alpha_r: LipschitzReport,
    /// `(1−α)·β` against `4(n+3)²/R`.
    pub beta_part: LipschitzReport,
    /// `h` against `(4(n+5)²/R, μ)`.
    pub h_coarse: LipschitzReport,
    pub certificate_ok: bool,
}

impl FillerResult {
    pub fn intermediate_ok(&self) -> bool {
        self.alpha.lipschitz.ok
            && self.alpha.lebesgue_ok
            && self.alpha_r.ok
            && self.beta_part.ok
            && self.h_coarse.ok
            && self.beta.support_ok
            && self.beta.lebesgue_ok
            && self.merged.multiplicity_ok
            && self.merged.lebesgue_ok
            && self.merged.star_inclusion_ok
            && self.push.all_verified()
    }

    /// Turns the first failed main clause into an error.
    pub fn verify(&self) -> Result<()> {
        let fail = |clause: &str, witness: String| Err(Error::VerificationFailed { clause: clause.into(), witness });
        if !self.agreement_on_a {
            return fail("agreement_on_A", "h differs from f on A".into());
        }
        if !self.carrier_inclusion {
            return fail("carrier_inclusion", format!("{:?}", self.carrier_witness));
        }
        if !self.lipschitz.ok {
            return fail("lipschitz", format!("{:?}", self.lipschitz.violation));
        }
        if !self.lebesgue_ok {
            return fail("lebesgue", format!("{} < {}", self.lebesgue, 1.0 / self.schedule.eps));
        }
        Ok(())
    }
}

/// Builds the filler `h` of `f` relative to `A` for a schedule and a cover
/// `U^R` with `R = schedule.r`.
pub fn build_filler(f: &PUMap, a: &PointSet, schedule: &FillerSchedule, u_r: &Cover) -> Result<FillerResult> {
    let (n, eps, radius, delta) = (schedule.n, schedule.eps, schedule.r, schedule.delta);
    let t = tau();
    let space = f.space();
    if !f.is_total() {
        return Err(Error::Precondition { clause: "total", detail: "f must be defined everywhere".into() });
    }
    for x in a.iter() {
        let p = f.value(x).unwrap();
        if !p.in_skeleton(n) {
            return Err(Error::ANotInSkeleton { point: space.id(x).to_string(), n, size: p.support_len() });
        }
    }
    let cert = check_delta_pu(f, delta, f64::INFINITY)?;
    if !cert.verdict {
        return Err(Error::Precondition {
            clause: "delta_pu",
            detail: format!(
                "f is not a {delta}-partition of unity (lipschitz {}, lebesgue {} vs {})",
                cert.lipschitz.ok,
                cert.lebesgue,
                1.0 / delta
            ),
        });
    }
    if u_r.space().ids() != space.ids() {
        return Err(Error::Precondition { clause: "space", detail: "cover and map live on different spaces".into() });
    }
    let stats = u_r.stats();
    if stats.multiplicity > n + 1 {
        return Err(Error::Precondition {
            clause: "cover_multiplicity",
            detail: format!("{} > n+1 = {}", stats.multiplicity, n + 1),
        });
    }
    if stats.lebesgue < radius - t {
        return Err(Error::Precondition {
            clause: "cover_lebesgue",
            detail: format!("{} < R = {radius}", stats.lebesgue),
        });
    }
    if stats.mesh > schedule.s_of_k + t || schedule.s_of_k >= 1.0 / delta {
        return Err(Error::Precondition {
            clause: "cover_mesh",
            detail: format!("mesh {} vs S(R) = {} vs 1/delta = {}", stats.mesh, schedule.s_of_k, 1.0 / delta),
        });
    }

    // f has (R, (R+1)δ_f) variation for the measured δ_f ≤ δ.
    let (delta_f, _) = tight_symmetric_constant(f);
    let eps_push = (radius + 1.0) * if delta_f > 0.0 { delta_f } else { delta };
    let push = push_to_skeleton(f, a, radius, n, eps_push)?;
    let alpha = build_alpha(space, a, radius)?;
    let merged = merge_cover_by_assignment(u_r, f, Some(delta))?;
    let beta = build_beta(&merged, f, radius)?;
    let h = combine(&alpha.values, &push.r, &beta.map)?;

    let agreement_on_a = a.iter().all(|x| h.value(x) == f.value(x));
    let carrier_bad = (0..space.len()).find(|&x| !h.value(x).unwrap().carried_by(f.value(x).unwrap()));
    let in_skeleton = h.skeleton_violation(n).is_none();
    let lipschitz = check_lipschitz(&h, eps, eps)?;
    let lebesgue = map_lebesgue(&h)?;

    let all: Vec<usize> = (0..space.len()).collect();
    let m = n as f64;
    let av = &alpha.values;
    let alpha_r = lipschitz_scan(space, &all, 2.0, 34.0 / radius, schedule.mu, |x, y| {
        scaled_l1(push.r.value(x), av[x], push.r.value(y), av[y])
    });
    let bm = &beta.map;
    let beta_part = lipschitz_scan(space, &all, 2.0, 4.0 * (m + 3.0) * (m + 3.0) / radius, 0.0, |x, y| {
        scaled_l1(bm.value(x), 1.0 - av[x], bm.value(y), 1.0 - av[y])
    });
    let h_coarse = check_lipschitz(&h, schedule.lipschitz_h, schedule.mu)?;

    let lebesgue_ok = lebesgue >= 1.0 / eps - t;
    Ok(FillerResult {
        schedule: schedule.clone(),
        delta_f,
        eps_push,
        certificate_ok: agreement_on_a && carrier_bad.is_none() && lipschitz.ok && lebesgue_ok,
        alpha,
        merged,
        beta,
        push,
        h,
        agreement_on_a,
        carrier_inclusion: carrier_bad.is_none(),
        carrier_witness: carrier_bad.map(|x| space.id(x).to_string()),
        in_skeleton,
        lipschitz,
        lebesgue,
        lebesgue_ok,
        alpha_r,
        beta_part,
        h_coarse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_space::tests::line;

    fn p10() -> Arc<FiniteMetricSpace> {
        Arc::new(line(&(0..10).map(f64::from).collect::<Vec<_>>()))
    }

    #[test]
    fn alpha_trivial_cases() {
        let x = p10();
        let all = build_alpha(&x, &x.full_set(), 3.0).unwrap();
        assert!(all.values.iter().all(|&a| a == 1.0));
        let none = build_alpha(&x, &PointSet::empty(10), 3.0).unwrap();
        assert!(none.values.iter().all(|&a| a == 0.0));
    }

    #[test]
    fn alpha_on_p10() {
        let x = p10();
        let a = PointSet::new(10, [0]).unwrap();
        let al = build_alpha(&x, &a, 3.0).unwrap();
        // P = {0,1,2}, C = {3..9}, Q = B(C,3) = {1..9}
        assert_eq!(al.p.members(), &[0, 1, 2]);
        assert_eq!(al.q.members(), &(1..10).collect::<Vec<_>>()[..]);
        assert_eq!(al.values[0], 1.0);
        assert_eq!(al.values[1], 2.0 / 3.0);
        assert_eq!(al.values[5], 0.0);
        assert!(al.lipschitz.ok);
        assert!(al.lebesgue_ok);
    }

    #[test]
    fn scaled_l1_matches_dense() {
        let p = SimplexPoint::new([(0, 0.5), (2, 0.5)]).unwrap();
        let q = SimplexPoint::new([(1, 0.25), (2, 0.75)]).unwrap();
        let d = scaled_l1(Some(&p), 0.4, Some(&q), 0.8);
        let dense = (0.2f64).abs() + (0.2f64).abs() + (0.2f64 - 0.6).abs();
        assert!((d - dense).abs() < 1e-12);
        assert_eq!(scaled_l1(None, 0.0, Some(&q), 1.0), 1.0);
    }

    #[test]
    fn schedule_search_small() {
        let s = find_schedule(0, 1.0, |k| 2.0 * k, 10_000).unwrap();
        assert!(s.holds());
        assert!(s.k > 100);
        assert!(!schedule_at(0, 1.0, s.k - 1, 2.0 * (s.k - 1) as f64).holds());
        let e = find_schedule(1, 1e-3, |k| 2.0 * k, 10).unwrap_err();
        assert_eq!(e.code(), "SCHEDULE_NOT_FOUND");
    }
}
