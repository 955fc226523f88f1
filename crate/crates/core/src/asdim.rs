//! Asymptotic dimension at a fixed scale: certificates from covers and from
//! maps, the push pipeline, an upper-bound search and an exhaustive lower
//! bound for very small spaces.

use std::sync::Arc;

use serde::Serialize;

use crate::covers::{brick_cover, greedy_cover, Cover};
use crate::error::{require_positive, Error, Result};
use crate::metric_space::FiniteMetricSpace;
use crate::pu_maps::{check_delta_pu, check_lipschitz, star_preimage_cover, tight_symmetric_constant, PUMap};
use crate::tol::tau;

/// What a certificate measured.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "witness_kind", rename_all = "snake_case")]
pub enum Measured {
    Cover {
        #[serde(serialize_with = "crate::real::serialize")]
        lebesgue: f64,
        multiplicity: usize,
        #[serde(serialize_with = "crate::real::serialize")]
        mesh: f64,
        /// Smallest δ with `R ≥ max(1/δ, (n+1)²/(4δ))`.
        delta_recipe_stated: f64,
        /// Smallest δ with `R ≥ 1/δ` and `4(n+1)²/R ≤ δ`, which is what the
        /// barycentric Lipschitz bound `4m²/L` supports.
        delta_recipe_rigorous: f64,
    },
    Map {
        delta: f64,
        lambda_hat: f64,
        induced_r: f64,
        #[serde(serialize_with = "crate::real::serialize")]
        induced_lebesgue: f64,
        induced_multiplicity: usize,
        star_mesh: f64,
        bound_m: f64,
        mesh_ok: bool,
        induced_ok: bool,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct AsdimCertificate {
    pub scale_r: f64,
    pub n_claimed: usize,
    pub measured: Measured,
    pub verdict: bool,
}

/// Multiplicity `≤ n+1`, Lebesgue `≥ R` and finite mesh.
pub fn certify_from_cover(cover: &Cover, r: f64, n: usize) -> AsdimCertificate {
    let stats = cover.stats();
    let k = (n + 1) as f64;
    let verdict = stats.multiplicity <= n + 1 && stats.lebesgue >= r - tau() && stats.mesh.is_finite();
    AsdimCertificate {
        scale_r: r,
        n_claimed: n,
        measured: Measured::Cover {
            lebesgue: stats.lebesgue,
            multiplicity: stats.multiplicity,
            mesh: stats.mesh,
            delta_recipe_stated: (1.0 / r).max(k * k / (4.0 * r)),
            delta_recipe_rigorous: (1.0 / r).max(4.0 * k * k / r),
        },
        verdict,
    }
}

/// A `(δ,δ)`-Lipschitz map into `K^(n)` with star preimages of diameter
/// `≤ M` certifies dimension `≤ n` at scale `(1−(n+1)δ)/((n+1)δ)`; the
/// induced cover is measured, not assumed.
pub fn certify_from_map(f: &PUMap, delta: f64, n: usize, bound_m: f64) -> Result<AsdimCertificate> {
    require_positive("delta", delta)?;
    let k = (n + 1) as f64;
    if k * delta >= 1.0 {
        return Err(Error::DeltaTooLarge(k * delta));
    }
    if let Some(x) = f.skeleton_violation(n) {
        return Err(Error::NotInSkeleton {
            point: f.space().id(x).to_string(),
            n,
            size: f.value(x).unwrap().support_len(),
        });
    }
    let lip = check_lipschitz(f, delta, delta)?;
    if let Some(w) = lip.violation {
        return Err(Error::LipschitzFailed { x: w.x, y: w.y, lambda: delta, c: delta });
    }
    let (lambda_hat, _) = tight_symmetric_constant(f);
    let induced_r = (1.0 - k * delta) / (k * delta);
    let stats = star_preimage_cover(&f.on_domain())?.cover.stats();
    let (star_mesh, _) = f.star_mesh();
    let mesh_ok = star_mesh <= bound_m + tau();
    let induced_ok = stats.multiplicity <= n + 1 && stats.lebesgue >= induced_r - tau();
    Ok(AsdimCertificate {
        scale_r: induced_r,
        n_claimed: n,
        measured: Measured::Map {
            delta,
            lambda_hat,
            induced_r,
            induced_lebesgue: stats.lebesgue,
            induced_multiplicity: stats.multiplicity,
            star_mesh,
            bound_m,
            mesh_ok,
            induced_ok,
        },
        verdict: mesh_ok && induced_ok,
    })
}

/// Certificate for an ε-partition of unity `h` into `K^(n)` that is a push
/// of `f`.
#[derive(Debug, Clone, Serialize)]
pub struct PipelineCertificate {
    pub eps: f64,
    pub n: usize,
    pub h_is_eps_pu: bool,
    pub push_condition: bool,
    /// `ε` itself.
    pub delta_nominal: f64,
    /// Tight `δ*` with `h` `(δ*, δ*)`-Lipschitz.
    pub delta_measured: f64,
    /// `min(ε, δ*)`, the constant handed to [`certify_from_map`].
    pub delta_used: f64,
    pub certificate: AsdimCertificate,
    pub provenance: Vec<String>,
    pub verdict: bool,
}

/// Checks that `h` is an ε-partition of unity into `K^(n)` carried by `f`,
/// then certifies it with the smallest Lipschitz constant it actually has
/// (at most `ε`), measured mesh as the bound.
pub fn theorem_b_pipeline(f: &PUMap, h: &PUMap, eps: f64, n: usize) -> Result<PipelineCertificate> {
    require_positive("eps", eps)?;
    if h.space().ids() != f.space().ids() {
        return Err(Error::Precondition { clause: "space", detail: "f and h live on different spaces".into() });
    }
    if let Some(x) = h.skeleton_violation(n) {
        return Err(Error::NotInSkeleton {
            point: h.space().id(x).to_string(),
            n,
            size: h.value(x).unwrap().support_len(),
        });
    }
    let push_condition = h.domain().iter().all(|&x| match (h.value(x), f.value(x)) {
        (Some(p), Some(q)) => p.carried_by(q),
        _ => false,
    });
    let pu = check_delta_pu(h, eps, f64::INFINITY)?;
    let (delta_measured, _) = tight_symmetric_constant(h);
    let delta_used = if delta_measured > 0.0 { eps.min(delta_measured) } else { eps };
    let (mesh, _) = h.star_mesh();
    let certificate = certify_from_map(h, delta_used, n, mesh)?;
    let verdict = pu.verdict && push_condition && certificate.verdict;
    Ok(PipelineCertificate {
        eps,
        n,
        h_is_eps_pu: pu.verdict,
        push_condition,
        delta_nominal: eps,
        delta_measured,
        delta_used,
        provenance: vec![
            format!("h checked as a {eps}-partition of unity"),
            "carrier(h(x)) within carrier(f(x)) at every point".into(),
            format!("certified from map with delta = {delta_used}"),
        ],
        certificate,
        verdict,
    })
}

/// Smallest `n ≤ n_max` for which a generator produced a passing cover.
#[derive(Debug, Clone, Serialize)]
pub struct UpperBound {
    pub scale_r: f64,
    pub n_best: Option<usize>,
    pub generator: Option<String>,
    #[serde(skip)]
    pub witness: Option<Cover>,
    pub certificate: Option<AsdimCertificate>,
}

pub fn estimate_upper_bound(space: &Arc<FiniteMetricSpace>, r: f64, n_max: usize) -> Result<UpperBound> {
    require_positive("R", r)?;
    let brick = match space.euclidean_dim() {
        Some(d) => Some(brick_cover(space, r, d)?.cover),
        None => None,
    };
    for n in 0..=n_max {
        if let Some(b) = &brick {
            let c = certify_from_cover(b, r, n);
            if c.verdict {
                return Ok(UpperBound {
                    scale_r: r,
                    n_best: Some(n),
                    generator: Some("brick".into()),
                    witness: Some(b.clone()),
                    certificate: Some(c),
                });
            }
        }
        if let Ok(g) = greedy_cover(space, r, n + 1) {
            let c = certify_from_cover(g.cover(), r, n);
            if c.verdict {
                return Ok(UpperBound {
                    scale_r: r,
                    n_best: Some(n),
                    generator: Some("greedy".into()),
                    witness: Some(g.cover().clone()),
                    certificate: Some(c),
                });
            }
        }
    }
    Ok(UpperBound { scale_r: r, n_best: None, generator: None, witness: None, certificate: None })
}

/// Largest space accepted by [`exhaustive_lower_bound`].
pub const EXHAUSTIVE_MAX_POINTS: usize = 12;

/// Minimal multiplicity over all covers with Lebesgue number `≥ R` and mesh
/// `≤ D`.
#[derive(Debug, Clone, Serialize)]
pub struct LowerBound {
    pub scale_r: f64,
    pub mesh_bound: f64,
    /// `min multiplicity − 1`; `None` when no cover meets the mesh bound.
    pub n_min: Option<usize>,
    pub min_multiplicity: Option<usize>,
    /// Groups of points whose `R`-balls form an optimal cover.
    pub witness_groups: Option<Vec<Vec<String>>>,
    pub partitions_explored: u64,
}

/// Every cover with Lebesgue number `≥ R` can be shrunk to one of the form
/// `{⋃_{x∈g} ball(x,R)}` for a partition of the points into groups `g`
/// (assign each point to an element containing its `R`-ball), without
/// raising multiplicity or mesh. Enumerating partitions therefore gives the
/// exact minimum.
pub fn exhaustive_lower_bound(space: &FiniteMetricSpace, r: f64, mesh_bound: f64) -> Result<LowerBound> {
    require_positive("R", r)?;
    let n = space.len();
    if n > EXHAUSTIVE_MAX_POINTS {
        return Err(Error::Precondition {
            clause: "size",
            detail: format!("exhaustive search needs at most {EXHAUSTIVE_MAX_POINTS} points, got {n}"),
        });
    }
    let t = tau();
    let ball: Vec<u16> = (0..n)
        .map(|x| (0..n).filter(|&y| space.dist(x, y) < r).fold(0u16, |m, y| m | (1 << y)))
        .collect();
    let far: Vec<u16> = (0..n)
        .map(|x| (0..n).filter(|&y| space.dist(x, y) > mesh_bound + t).fold(0u16, |m, y| m | (1 << y)))
        .collect();
    let fits = |u: u16| (0..n).all(|p| u & (1 << p) == 0 || far[p] & u == 0);

    struct Search<'a> {
        n: usize,
        ball: &'a [u16],
        fits: &'a dyn Fn(u16) -> bool,
        unions: Vec<u16>,
        groups: Vec<Vec<usize>>,
        best: usize,
        best_groups: Option<Vec<Vec<usize>>>,
        explored: u64,
    }

    fn multiplicity(unions: &[u16], n: usize) -> usize {
        (0..n).map(|p| unions.iter().filter(|&&u| u & (1 << p) != 0).count()).max().unwrap_or(0)
    }

    fn go(s: &mut Search, x: usize) {
        if multiplicity(&s.unions, s.n) >= s.best {
            return;
        }
        if x == s.n {
            s.explored += 1;
            s.best = multiplicity(&s.unions, s.n);
            s.best_groups = Some(s.groups.clone());
            return;
        }
        for g in 0..s.unions.len() {
            let u = s.unions[g] | s.ball[x];
            if !(s.fits)(u) {
                continue;
            }
            let old = s.unions[g];
            s.unions[g] = u;
            s.groups[g].push(x);
            go(s, x + 1);
            s.groups[g].pop();
            s.unions[g] = old;
        }
        if (s.fits)(s.ball[x]) {
            s.unions.push(s.ball[x]);
            s.groups.push(vec![x]);
            go(s, x + 1);
            s.groups.pop();
            s.unions.pop();
        }
    }

    let mut s = Search {
        n,
        ball: &ball,
        fits: &fits,
        unions: Vec::new(),
        groups: Vec::new(),
        best: usize::MAX,
        best_groups: None,
        explored: 0,
    };
    go(&mut s, 0);
    let found = s.best_groups.is_some();
    Ok(LowerBound {
        scale_r: r,
        mesh_bound,
        n_min: found.then(|| s.best - 1),
        min_multiplicity: found.then_some(s.best),
        witness_groups: s
            .best_groups
            .map(|gs| gs.iter().map(|g| g.iter().map(|&x| space.id(x).to_string()).collect()).collect()),
        partitions_explored: s.explored,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_space::tests::line;
    use crate::simplicial::{Complex, SimplexPoint};

    fn p10() -> Arc<FiniteMetricSpace> {
        Arc::new(line(&(0..10).map(f64::from).collect::<Vec<_>>()))
    }

    fn two_intervals() -> Cover {
        Cover::new(p10(), "u", vec![("a".into(), (0..6).collect()), ("b".into(), (4..10).collect())]).unwrap()
    }

    #[test]
    fn cover_certificates() {
        assert!(certify_from_cover(&two_intervals(), 2.0, 1).verdict);
        assert!(!certify_from_cover(&two_intervals(), 2.0, 0).verdict);
        let whole = Cover::new(p10(), "x", vec![("x".into(), (0..10).collect())]).unwrap();
        assert!(certify_from_cover(&whole, 1e6, 0).verdict);
    }

    #[test]
    fn constant_map_induced_scale() {
        let x = p10();
        let f = PUMap::total(
            x,
            Arc::new(Complex::full(vec!["v".into()])),
            vec![SimplexPoint::vertex(0); 10],
        )
        .unwrap();
        let c = certify_from_map(&f, 0.4, 0, 100.0).unwrap();
        assert!(c.verdict);
        assert!((c.scale_r - 1.5).abs() < 1e-12);
        assert_eq!(certify_from_map(&f, 1.0, 0, 100.0).unwrap_err().code(), "DELTA_TOO_LARGE");
    }

    #[test]
    fn upper_bounds() {
        assert!(estimate_upper_bound(&p10(), 1.0, 3).unwrap().n_best.unwrap() <= 1);
        let one = Arc::new(line(&[0.0]));
        assert_eq!(estimate_upper_bound(&one, 5.0, 3).unwrap().n_best, Some(0));
    }

    #[test]
    fn exhaustive_on_small_path() {
        let x = line(&(0..6).map(f64::from).collect::<Vec<_>>());
        // Balls of radius 1.5 have three points; with mesh ≤ 3 a group holds
        // at most two consecutive points, forcing overlaps.
        let lb = exhaustive_lower_bound(&x, 1.5, 3.0).unwrap();
        assert_eq!(lb.n_min, Some(1));
        assert_eq!(exhaustive_lower_bound(&x, 1.5, 1.0).unwrap().n_min, None);
        let lb = exhaustive_lower_bound(&x, 1.5, 10.0).unwrap();
        assert_eq!(lb.n_min, Some(0));
    }
}
