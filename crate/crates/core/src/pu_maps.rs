//! Maps into ℓ¹ simplicial complexes ("partitions of unity"): Lipschitz and
//! variation checks, star preimage covers, barycentric maps and pullbacks.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::covers::Cover;
use crate::error::{require_nonneg, require_positive, Error, Result};
use crate::metric_space::{FiniteMetricSpace, PointSet};
use crate::scan::{pair_scan, Hit};
use crate::simplicial::{l1_dist, nerve, Complex, SimplexPoint, Vertex};
use crate::tol::tau;

/// A pair of points together with their distance and the measured value
/// (ℓ¹ gap, score or excess depending on the report).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairWitness {
    pub x: String,
    pub y: String,
    #[serde(serialize_with = "crate::real::serialize")]
    pub dist: f64,
    #[serde(serialize_with = "crate::real::serialize")]
    pub value: f64,
    #[serde(skip)]
    pub pair: (usize, usize),
}

impl PairWitness {
    pub(crate) fn from_hit(space: &FiniteMetricSpace, h: &Hit, value: f64) -> Self {
        PairWitness {
            x: space.id(h.x).to_string(),
            y: space.id(h.y).to_string(),
            dist: h.dist,
            value,
            pair: (h.x, h.y),
        }
    }
}

/// A map from (a subset of) a finite metric space into a complex.
#[derive(Debug, Clone)]
pub struct PUMap {
    space: Arc<FiniteMetricSpace>,
    target: Arc<Complex>,
    values: Vec<Option<SimplexPoint>>,
    domain: Vec<usize>,
}

impl PUMap {
    /// `values[x]` is `None` off the domain. Every carrier must be a
    /// simplex of `target`.
    pub fn new(
        space: Arc<FiniteMetricSpace>,
        target: Arc<Complex>,
        values: Vec<Option<SimplexPoint>>,
    ) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::Malformed(format!(
                "{} values for a space of {} points",
                values.len(),
                space.len()
            )));
        }
        let nv = target.vertex_count();
        for (x, v) in values.iter().enumerate() {
            let Some(p) = v else { continue };
            let carrier = p.carrier();
            if carrier.iter().any(|&u| u as usize >= nv) || !target.contains_simplex(&carrier) {
                return Err(Error::NotASimplex {
                    point: space.id(x).to_string(),
                    carrier: carrier
                        .iter()
                        .map(|&u| {
                            if (u as usize) < nv {
                                target.label(u).to_string()
                            } else {
                                format!("#{u}")
                            }
                        })
                        .collect(),
                });
            }
        }
        Ok(Self::new_unchecked(space, target, values))
    }

    pub fn total(
        space: Arc<FiniteMetricSpace>,
        target: Arc<Complex>,
        values: Vec<SimplexPoint>,
    ) -> Result<Self> {
        Self::new(space, target, values.into_iter().map(Some).collect())
    }

    pub(crate) fn new_unchecked(
        space: Arc<FiniteMetricSpace>,
        target: Arc<Complex>,
        values: Vec<Option<SimplexPoint>>,
    ) -> Self {
        let domain = (0..values.len()).filter(|&x| values[x].is_some()).collect();
        PUMap { space, target, values, domain }
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn target(&self) -> &Arc<Complex> {
        &self.target
    }

    pub fn value(&self, x: usize) -> Option<&SimplexPoint> {
        self.values.get(x).and_then(Option::as_ref)
    }

    pub fn values(&self) -> &[Option<SimplexPoint>] {
        &self.values
    }

    /// Indices where the map is defined, ascending.
    pub fn domain(&self) -> &[usize] {
        &self.domain
    }

    pub fn domain_set(&self) -> PointSet {
        PointSet::new(self.space.len(), self.domain.iter().copied()).expect("domain indexes the space")
    }

    pub fn is_total(&self) -> bool {
        self.domain.len() == self.space.len()
    }

    /// Forgets the values outside `set`.
    pub fn restrict(&self, set: &PointSet) -> PUMap {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(x, v)| if set.contains(x) { v.clone() } else { None })
            .collect();
        Self::new_unchecked(self.space.clone(), self.target.clone(), values)
    }

    /// The same map as a total map on the subspace of its domain.
    pub fn on_domain(&self) -> PUMap {
        if self.is_total() {
            return self.clone();
        }
        let sub = Arc::new(self.space.restrict(&self.domain_set()));
        let values = self.domain.iter().map(|&x| self.values[x].clone()).collect();
        Self::new_unchecked(sub, self.target.clone(), values)
    }

    /// Largest carrier size over the domain.
    pub fn max_support(&self) -> usize {
        self.domain.iter().map(|&x| self.values[x].as_ref().unwrap().support_len()).max().unwrap_or(0)
    }

    /// First domain point whose value lies outside `K^(n)`.
    pub fn skeleton_violation(&self, n: usize) -> Option<usize> {
        self.domain
            .iter()
            .copied()
            .find(|&x| !self.values[x].as_ref().unwrap().in_skeleton(n))
    }

    fn gap(&self, x: usize, y: usize) -> f64 {
        l1_dist(self.values[x].as_ref().unwrap(), self.values[y].as_ref().unwrap())
    }

    /// Domain points in the open star of each vertex.
    pub fn star_preimages(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.target.vertex_count()];
        for &x in &self.domain {
            for &(v, _) in self.values[x].as_ref().unwrap().weights() {
                out[v as usize].push(x);
            }
        }
        out
    }

    /// `max_v diam f⁻¹(st v)` and a vertex attaining it.
    pub fn star_mesh(&self) -> (f64, Option<Vertex>) {
        let pre = self.star_preimages();
        let diams: Vec<f64> = pre.par_iter().map(|p| self.space.diameter(p)).collect();
        let mut best = (0.0, None);
        for (v, &d) in diams.iter().enumerate() {
            if !pre[v].is_empty() && (best.1.is_none() || d > best.0) {
                best = (d, Some(v as Vertex));
            }
        }
        best
    }
}

/// Result of a `(λ, C)`-Lipschitz check, together with the tight constant
/// `λ̂ = max (‖f(x)−f(y)‖ − C)/d(x,y)` for the given `C`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzReport {
    #[serde(serialize_with = "crate::real::serialize")]
    pub lambda: f64,
    pub c: f64,
    #[serde(serialize_with = "crate::real::serialize")]
    pub lambda_hat: f64,
    pub ok: bool,
    pub worst: Option<PairWitness>,
    pub violation: Option<PairWitness>,
}

/// Result of an `(R, ε)` variation check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationReport {
    pub r: f64,
    pub eps: f64,
    pub max_l1: f64,
    pub ok: bool,
    pub worst: Option<PairWitness>,
}

fn lipschitz_score(c: f64) -> impl Fn(f64, f64) -> f64 + Sync {
    move |g, d| {
        if d > 0.0 {
            ((g - c) / d).max(0.0)
        } else if g > c {
            f64::INFINITY
        } else {
            0.0
        }
    }
}

/// Generic Lipschitz scan for any gap function bounded by `ub`.
pub(crate) fn lipschitz_scan<G>(
    space: &FiniteMetricSpace,
    domain: &[usize],
    ub: f64,
    lambda: f64,
    c: f64,
    gap: G,
) -> LipschitzReport
where
    G: Fn(usize, usize) -> f64 + Sync,
{
    let t = tau();
    let scan = pair_scan(
        space,
        domain,
        ub,
        |_| true,
        lipschitz_score(c),
        Some(move |g: f64, d: f64| g - (lambda * d + c + t)),
        gap,
    );
    LipschitzReport {
        lambda,
        c,
        lambda_hat: scan.max_score(),
        ok: scan.violation.is_none(),
        worst: scan.best.map(|h| PairWitness::from_hit(space, &h, h.gap)),
        violation: scan.violation.map(|h| PairWitness::from_hit(space, &h, h.gap)),
    }
}

/// `‖f(x) − f(y)‖ ≤ λ·d(x,y) + C` on all domain pairs, up to τ.
pub fn check_lipschitz(f: &PUMap, lambda: f64, c: f64) -> Result<LipschitzReport> {
    require_nonneg("lambda", lambda)?;
    require_nonneg("C", c)?;
    Ok(lipschitz_scan(&f.space, &f.domain, 2.0, lambda, c, |x, y| f.gap(x, y)))
}

/// `‖f(x) − f(y)‖ < ε` whenever `d(x,y) ≤ R`, up to τ.
pub fn check_variation(f: &PUMap, r: f64, eps: f64) -> Result<VariationReport> {
    require_nonneg("R", r)?;
    require_positive("eps", eps)?;
    Ok(variation_scan(&f.space, &f.domain, r, eps, |x, y| f.gap(x, y)))
}

pub(crate) fn variation_scan<G>(space: &FiniteMetricSpace, domain: &[usize], r: f64, eps: f64, gap: G) -> VariationReport
where
    G: Fn(usize, usize) -> f64 + Sync,
{
    let scan = pair_scan(space, domain, 2.0, |d| d <= r, |g, _| g, None::<fn(f64, f64) -> f64>, gap);
    let max_l1 = scan.max_score();
    VariationReport {
        r,
        eps,
        max_l1,
        ok: max_l1 < eps + tau(),
        worst: scan.best.map(|h| PairWitness::from_hit(space, &h, h.gap)),
    }
}

/// Smallest `ε` for which `f` is `(ε, ε)`-Lipschitz:
/// `max ‖f(x) − f(y)‖ / (d(x,y) + 1)`.
pub fn tight_symmetric_constant(f: &PUMap) -> (f64, Option<PairWitness>) {
    let scan = pair_scan(
        &f.space,
        &f.domain,
        2.0,
        |_| true,
        |g, d| g / (d + 1.0),
        None::<fn(f64, f64) -> f64>,
        |x, y| f.gap(x, y),
    );
    (scan.max_score(), scan.best.map(|h| PairWitness::from_hit(&f.space, &h, h.score)))
}

/// An `(R, ε)`-variation map with values in `[0, 2]` is
/// `((2−ε)/R, ε)`-Lipschitz.
pub fn variation_to_lipschitz(r: f64, eps: f64) -> Result<(f64, f64)> {
    require_positive("R", r)?;
    if !(eps > 0.0 && eps <= 2.0) {
        return Err(Error::EpsOutOfRange(eps));
    }
    Ok(((2.0 - eps) / r, eps))
}

/// The cover `{f⁻¹(st v)}` of the domain, and the vertex of each element.
#[derive(Debug, Clone)]
pub struct StarCover {
    pub cover: Cover,
    pub vertices: Vec<Vertex>,
}

/// Star preimage cover of a total map. Elements are the nonempty star
/// preimages, in vertex order, labelled by vertex.
pub fn star_preimage_cover(f: &PUMap) -> Result<StarCover> {
    if !f.is_total() {
        return Err(Error::Precondition {
            clause: "total",
            detail: "star preimage cover needs a total map; restrict the space to the domain".into(),
        });
    }
    let pre = f.star_preimages();
    let mut vertices = Vec::new();
    let mut elements = Vec::new();
    for (v, members) in pre.into_iter().enumerate() {
        if !members.is_empty() {
            vertices.push(v as Vertex);
            elements.push((f.target.label(v as Vertex).to_string(), members));
        }
    }
    let cover = Cover::new(f.space.clone(), "star-preimages", elements)?;
    Ok(StarCover { cover, vertices })
}

/// Lebesgue number of the star preimage cover of `f` (on its domain).
pub fn map_lebesgue(f: &PUMap) -> Result<f64> {
    Ok(star_preimage_cover(&f.on_domain())?.cover.stats().lebesgue)
}

/// For a `(λ, C)`-Lipschitz map into an `n`-dimensional complex, the star
/// preimage cover has Lebesgue number at least `(1 − (n+1)C)/((n+1)λ)`.
pub fn lebesgue_lower_bound(lambda: f64, c: f64, n: usize) -> Result<f64> {
    require_positive("lambda", lambda)?;
    require_nonneg("C", c)?;
    let k = (n + 1) as f64;
    if k * c >= 1.0 {
        return Err(Error::BoundDegenerate(k * c));
    }
    Ok((1.0 - k * c) / (k * lambda))
}

/// `φ_s(x) = f_s(x) / Σ_t f_t(x)` into the nerve of `cover`, where
/// `f_s(x) = d(x, X∖U_s)`. Where some `f_s(x)` is infinite the weight is
/// spread uniformly over those `s`.
pub fn barycentric_map(cover: &Cover) -> Result<PUMap> {
    let space = cover.space().clone();
    let values: Vec<Result<SimplexPoint>> = (0..space.len())
        .into_par_iter()
        .map(|x| barycentric_value(cover, x))
        .collect();
    let values = values.into_iter().map(|v| v.map(Some)).collect::<Result<Vec<_>>>()?;
    Ok(PUMap::new_unchecked(space, Arc::new(nerve(cover)), values))
}

pub(crate) fn barycentric_value(cover: &Cover, x: usize) -> Result<SimplexPoint> {
    let mine = cover.memberships(x);
    let fs = cover.member_distances_at(x);
    let inf = fs.iter().filter(|d| d.is_infinite()).count();
    let weights: Vec<(Vertex, f64)> = if inf > 0 {
        let w = 1.0 / inf as f64;
        mine.iter()
            .zip(&fs)
            .filter(|(_, d)| d.is_infinite())
            .map(|(&s, _)| (s as Vertex, w))
            .collect()
    } else {
        let total: f64 = fs.iter().sum();
        if total <= 0.0 {
            return Err(Error::UncoveredPoint(cover.space().id(x).to_string()));
        }
        mine.iter()
            .zip(&fs)
            .filter(|(_, &d)| d > 0.0)
            .map(|(&s, &d)| (s as Vertex, d / total))
            .collect()
    };
    Ok(SimplexPoint::from_sorted_unchecked(weights))
}

/// Check of the barycentric map against the bound `4m²/L`.
#[derive(Debug, Clone, Serialize)]
pub struct BarycentricBound {
    #[serde(serialize_with = "crate::real::serialize")]
    pub lebesgue: f64,
    pub multiplicity: usize,
    pub bound: f64,
    pub lipschitz: LipschitzReport,
    pub ok: bool,
}

pub fn check_barycentric_bound(cover: &Cover) -> Result<BarycentricBound> {
    let stats = cover.stats();
    if stats.lebesgue <= 0.0 {
        return Err(Error::ZeroLebesgue);
    }
    let m = stats.multiplicity as f64;
    let bound = if stats.lebesgue.is_infinite() { 0.0 } else { 4.0 * m * m / stats.lebesgue };
    let phi = barycentric_map(cover)?;
    let lipschitz = check_lipschitz(&phi, bound, 0.0)?;
    Ok(BarycentricBound {
        lebesgue: stats.lebesgue,
        multiplicity: stats.multiplicity,
        bound,
        ok: lipschitz.ok,
        lipschitz,
    })
}

/// Certificate for a δ-partition of unity: `(δ, δ)`-Lipschitz, star
/// preimages with Lebesgue number `≥ 1/δ`, star preimages of diameter
/// `≤ M`.
#[derive(Debug, Clone, Serialize)]
pub struct DeltaPUCertificate {
    pub delta: f64,
    pub bound_m: f64,
    pub lipschitz: LipschitzReport,
    #[serde(serialize_with = "crate::real::serialize")]
    pub lebesgue: f64,
    pub lebesgue_ok: bool,
    pub star_mesh: f64,
    pub star_mesh_vertex: Option<String>,
    pub bounded_ok: bool,
    pub verdict: bool,
}

pub fn check_delta_pu(f: &PUMap, delta: f64, bound_m: f64) -> Result<DeltaPUCertificate> {
    require_positive("delta", delta)?;
    require_nonneg("M", bound_m)?;
    let lipschitz = check_lipschitz(f, delta, delta)?;
    let lebesgue = map_lebesgue(f)?;
    let lebesgue_ok = lebesgue >= 1.0 / delta - tau();
    let (star_mesh, v) = f.star_mesh();
    let bounded_ok = star_mesh <= bound_m + tau();
    Ok(DeltaPUCertificate {
        delta,
        bound_m,
        verdict: lipschitz.ok && lebesgue_ok && bounded_ok,
        lipschitz,
        lebesgue,
        lebesgue_ok,
        star_mesh,
        star_mesh_vertex: v.map(|v| f.target.label(v).to_string()),
        bounded_ok,
    })
}

/// A map of point sets `g: X → Y`.
#[derive(Debug, Clone)]
pub struct PointMap {
    pub from: Arc<FiniteMetricSpace>,
    pub to: Arc<FiniteMetricSpace>,
    pub image: Vec<usize>,
}

impl PointMap {
    pub fn new(from: Arc<FiniteMetricSpace>, to: Arc<FiniteMetricSpace>, image: Vec<usize>) -> Result<Self> {
        if image.len() != from.len() {
            return Err(Error::Malformed(format!("{} images for {} points", image.len(), from.len())));
        }
        if let Some(&bad) = image.iter().find(|&&y| y >= to.len()) {
            return Err(Error::UnknownPoint(format!("#{bad}")));
        }
        Ok(PointMap { from, to, image })
    }
}

/// Pullback `f ∘ g` and the variation it inherits.
#[derive(Debug, Clone, Serialize)]
pub struct Pullback {
    #[serde(skip)]
    pub map: PUMap,
    /// Tight `ε` with `f` `(ε, ε)`-Lipschitz.
    pub eps_f: f64,
    pub variation: VariationReport,
}

/// If `d_X(x,x') ≤ R ⇒ d_Y(gx, gx') ≤ S` and `f` is `(ε, ε)`-Lipschitz then
/// `f∘g` has `(R, Sε + ε)` variation. `ε` is measured on `f`.
pub fn pullback_partition(g: &PointMap, f: &PUMap, r: f64, s: f64) -> Result<Pullback> {
    require_nonneg("R", r)?;
    require_nonneg("S", s)?;
    if !Arc::ptr_eq(&g.to, &f.space) && g.to.ids() != f.space.ids() {
        return Err(Error::Precondition {
            clause: "codomain",
            detail: "g does not land in the domain space of f".into(),
        });
    }
    if let Some(x) = (0..g.from.len()).find(|&x| f.value(g.image[x]).is_none()) {
        return Err(Error::Precondition {
            clause: "defined",
            detail: format!("f is undefined at g({})", g.from.id(x)),
        });
    }
    let t = tau();
    let all: Vec<usize> = (0..g.from.len()).collect();
    let distortion = pair_scan(
        &g.from,
        &all,
        f64::INFINITY,
        |d| d <= r,
        |dy, _| dy,
        Some(move |dy: f64, _: f64| dy - s - t),
        |x, y| g.to.dist(g.image[x], g.image[y]),
    );
    if let Some(h) = distortion.violation {
        return Err(Error::DistortionViolated {
            x: g.from.id(h.x).to_string(),
            y: g.from.id(h.y).to_string(),
            dx: h.dist,
            dy: h.gap,
            r,
            s,
        });
    }
    let (eps_f, _) = tight_symmetric_constant(f);
    let values = g.image.iter().map(|&y| f.values[y].clone()).collect();
    let map = PUMap::new_unchecked(g.from.clone(), f.target.clone(), values);
    let eps = s * eps_f + eps_f;
    let variation = if eps > 0.0 {
        check_variation(&map, r, eps)?
    } else {
        // f is constant; so is the pullback.
        VariationReport { r, eps, max_l1: 0.0, ok: true, worst: None }
    };
    Ok(Pullback { map, eps_f, variation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_space::tests::line;

    fn two_intervals() -> Cover {
        let x = Arc::new(line(&(0..10).map(f64::from).collect::<Vec<_>>()));
        Cover::new(x, "u", vec![("a".into(), (0..6).collect()), ("b".into(), (4..10).collect())]).unwrap()
    }

    #[test]
    fn barycentric_on_two_intervals() {
        let cover = two_intervals();
        let phi = barycentric_map(&cover).unwrap();
        // f_a(4) = d(4, {6..9}) = 2, f_b(4) = d(4, {0..3}) = 1
        let v = phi.value(4).unwrap();
        assert!((v.weight(0) - 2.0 / 3.0).abs() < 1e-12);
        assert!((v.weight(1) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(phi.value(0).unwrap(), &SimplexPoint::vertex(0));
        let b = check_barycentric_bound(&cover).unwrap();
        assert!(b.ok);
        assert_eq!(b.bound, 4.0 * 4.0 / 2.0);
    }

    #[test]
    fn whole_space_element_is_infinite() {
        let x = Arc::new(line(&[0.0, 1.0, 2.0]));
        let cover = Cover::new(x, "u", vec![("all".into(), vec![0, 1, 2]), ("left".into(), vec![0])]).unwrap();
        let phi = barycentric_map(&cover).unwrap();
        assert_eq!(phi.value(0).unwrap(), &SimplexPoint::vertex(0));
        let b = check_barycentric_bound(&cover).unwrap();
        assert_eq!(b.lebesgue, f64::INFINITY);
        assert_eq!(b.bound, 0.0);
        assert!(b.ok);
    }

    #[test]
    fn lipschitz_and_variation_reports() {
        let phi = barycentric_map(&two_intervals()).unwrap();
        let rep = check_lipschitz(&phi, 1.0, 0.0).unwrap();
        assert!(rep.ok);
        assert!(rep.lambda_hat > 0.0 && rep.lambda_hat <= 1.0);
        let bad = check_lipschitz(&phi, 0.01, 0.0).unwrap();
        assert!(!bad.ok);
        assert!(bad.violation.is_some());
        let v = check_variation(&phi, 1.0, 2.0).unwrap();
        assert!(v.ok);
        assert!(v.max_l1 <= rep.lambda_hat + 1e-12);
    }

    #[test]
    fn lebesgue_bound_and_degenerate() {
        assert_eq!(lebesgue_lower_bound(0.5, 0.0, 1).unwrap(), 1.0);
        assert_eq!(lebesgue_lower_bound(1.0, 0.5, 1).unwrap_err().code(), "BOUND_DEGENERATE");
        assert_eq!(variation_to_lipschitz(4.0, 1.0).unwrap(), (0.25, 1.0));
        assert_eq!(variation_to_lipschitz(4.0, 3.0).unwrap_err().code(), "EPS_OUT_OF_RANGE");
    }

    #[test]
    fn star_cover_and_mesh() {
        let phi = barycentric_map(&two_intervals()).unwrap();
        let sc = star_preimage_cover(&phi).unwrap();
        assert_eq!(sc.cover.len(), 2);
        assert_eq!(phi.star_mesh().0, 5.0);
        assert!(map_lebesgue(&phi).unwrap() >= 1.0);
    }

    #[test]
    fn pullback_identity() {
        let phi = barycentric_map(&two_intervals()).unwrap();
        let x = phi.space().clone();
        let g = PointMap::new(x.clone(), x.clone(), (0..10).collect()).unwrap();
        let pb = pullback_partition(&g, &phi, 1.0, 1.0).unwrap();
        assert!(pb.variation.ok);
        let shift = PointMap::new(x.clone(), x, (0..10).map(|i| (i * 3) % 10).collect()).unwrap();
        assert_eq!(pullback_partition(&shift, &phi, 1.0, 1.0).unwrap_err().code(), "DISTORTION_VIOLATED");
    }
}
