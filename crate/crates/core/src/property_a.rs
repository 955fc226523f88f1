//! Property A data: set families `{A_x}`, the `C_x` construction and the
//! partitions of unity it induces, plus the translation between Property A
//! and δ-partitions of unity.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{require_positive, Error, Result};
use crate::metric_space::FiniteMetricSpace;
use crate::pu_maps::{check_delta_pu, check_variation, DeltaPUCertificate, PUMap, PairWitness, VariationReport};
use crate::scan::pair_scan;
use crate::simplicial::{Complex, SimplexPoint, Vertex};
use crate::tol::tau;

/// A finite subset of `X × N`, sorted.
pub type Tagged = Vec<(usize, u32)>;

/// `x ↦ A_x ⊂ B(x, S) × N`.
#[derive(Debug, Clone)]
pub struct SetFamily {
    space: Arc<FiniteMetricSpace>,
    s_radius: f64,
    sets: Vec<Tagged>,
}

impl SetFamily {
    pub fn new(space: Arc<FiniteMetricSpace>, s_radius: f64, sets: Vec<Tagged>) -> Result<Self> {
        require_positive("S", s_radius)?;
        if sets.len() != space.len() {
            return Err(Error::Malformed(format!("{} sets for {} points", sets.len(), space.len())));
        }
        let mut out = Vec::with_capacity(sets.len());
        for (x, mut a) in sets.into_iter().enumerate() {
            a.sort_unstable();
            a.dedup();
            if a.is_empty() {
                return Err(Error::EmptyCx(space.id(x).to_string()));
            }
            for &(y, i) in &a {
                if y >= space.len() {
                    return Err(Error::ForeignPoint(format!("#{y} in A_{}", space.id(x))));
                }
                if i == 0 {
                    return Err(Error::Malformed(format!("tag 0 in A_{}; tags start at 1", space.id(x))));
                }
                if space.dist(x, y) >= s_radius {
                    return Err(Error::Precondition {
                        clause: "support",
                        detail: format!("({}, {i}) in A_{} lies outside B(x, S)", space.id(y), space.id(x)),
                    });
                }
            }
            out.push(a);
        }
        Ok(SetFamily { space, s_radius, sets: out })
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn s_radius(&self) -> f64 {
        self.s_radius
    }

    pub fn set(&self, x: usize) -> &Tagged {
        &self.sets[x]
    }

    pub fn sets(&self) -> &[Tagged] {
        &self.sets
    }
}

pub(crate) fn overlap(a: &[(usize, u32)], b: &[(usize, u32)]) -> usize {
    let (mut i, mut j, mut k) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                k += 1;
                i += 1;
                j += 1;
            }
        }
    }
    k
}

fn symdiff_len(a: &[(usize, u32)], b: &[(usize, u32)]) -> usize {
    a.len() + b.len() - 2 * overlap(a, b)
}

fn ratio_of(a: &[(usize, u32)], b: &[(usize, u32)]) -> f64 {
    let k = overlap(a, b);
    if k == 0 {
        return f64::INFINITY;
    }
    (a.len() + b.len() - 2 * k) as f64 / k as f64
}

/// `|A_x Δ A_y| / |A_x ∩ A_y|`; `+∞` for disjoint sets.
pub fn symdiff_ratio(family: &SetFamily, x: usize, y: usize) -> f64 {
    ratio_of(&family.sets[x], &family.sets[y])
}

/// `A_x = ball(x, S) × {1, …, depth}`.
pub fn ball_family(space: &Arc<FiniteMetricSpace>, s_radius: f64, depth: u32) -> Result<SetFamily> {
    require_positive("S", s_radius)?;
    if depth == 0 {
        return Err(Error::BadParameter { name: "depth", value: 0.0 });
    }
    let sets = (0..space.len())
        .into_par_iter()
        .map(|x| {
            let ball = space.ball(x, s_radius).expect("S > 0");
            ball.iter().flat_map(|y| (1..=depth).map(move |i| (y, i))).collect()
        })
        .collect();
    SetFamily::new(space.clone(), s_radius, sets)
}

/// Largest symmetric-difference ratio over pairs with `d ≤ R`.
pub fn worst_ratio(family: &SetFamily, r: f64) -> (f64, Option<PairWitness>) {
    let all: Vec<usize> = (0..family.space.len()).collect();
    let scan = pair_scan(
        &family.space,
        &all,
        f64::INFINITY,
        |d| d <= r,
        |g, _| g,
        None::<fn(f64, f64) -> f64>,
        |x, y| symdiff_ratio(family, x, y),
    );
    (scan.max_score(), scan.best.map(|h| PairWitness::from_hit(&family.space, &h, h.gap)))
}

/// Scale `R`, target `ε`, ball bound `M` and `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropertyAInput {
    pub r: f64,
    pub eps: f64,
    pub m: usize,
    pub delta: f64,
}

/// The sets `C_x` and the case each point fell into, with the case claims
/// checked on the input.
#[derive(Debug, Clone, Serialize)]
pub struct CxFamily {
    #[serde(skip)]
    pub sets: Vec<Tagged>,
    /// `|A_x| ≥ 8M/δ`.
    pub large: Vec<bool>,
    pub large_count: usize,
    pub worst_ratio: f64,
    /// Small-case pairs with `d ≤ R` have `A_x = A_y`.
    pub small_equal_ok: bool,
    /// Small-case components lie in `B(x, 2S)`.
    pub component_ok: bool,
    /// Large-case pairs with `d ≤ R`: `|C_x Δ C_y| / |C_x| < δ/3`.
    pub large_ratio_max: f64,
    pub large_ratio_ok: bool,
    pub witness: Option<PairWitness>,
}

impl CxFamily {
    pub fn case_claims_ok(&self) -> bool {
        self.small_equal_ok && self.component_ok && self.large_ratio_ok
    }
}

/// `C_x = A_x ∪ ball(x,1/δ)×{1}` when `|A_x| ≥ 8M/δ`, else the
/// `R`-component of `x` times `{1}`.
pub fn build_cx(family: &SetFamily, p: &PropertyAInput) -> Result<CxFamily> {
    let space = &family.space;
    let (r, delta, s) = (p.r, p.delta, family.s_radius);
    let m = p.m as f64;
    if p.m < 2 {
        return Err(Error::ParameterConstraintFailed(format!("M = {} >= 2", p.m)));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::ParameterConstraintFailed(format!("delta = {delta} in (0,1)")));
    }
    if r <= (2.0 - delta) / delta + m {
        return Err(Error::ParameterConstraintFailed(format!(
            "R = {r} > (2-delta)/delta + M = {}",
            (2.0 - delta) / delta + m
        )));
    }
    if s <= m + 1.0 / delta {
        return Err(Error::ParameterConstraintFailed(format!("S = {s} > M + 1/delta = {}", m + 1.0 / delta)));
    }
    let balls: Vec<Vec<usize>> = (0..space.len())
        .into_par_iter()
        .map(|x| space.ball(x, 1.0 / delta).expect("radius positive").members().to_vec())
        .collect();
    if let Some(x) = (0..space.len()).find(|&x| balls[x].len() > p.m) {
        return Err(Error::BallTooBig { center: space.id(x).to_string(), size: balls[x].len(), m: p.m });
    }
    let bound = delta / (8.0 * m);
    let (worst, w) = worst_ratio(family, r);
    if worst >= bound {
        let w = w.expect("positive ratio has a witness");
        return Err(Error::RatioPreconditionFailed { x: w.x, y: w.y, ratio: worst, bound });
    }

    let threshold = 8.0 * m / delta;
    let large: Vec<bool> = family.sets.iter().map(|a| a.len() as f64 >= threshold).collect();
    let components = space.r_components(r)?;
    let mut comp_of = vec![0; space.len()];
    for (c, members) in components.iter().enumerate() {
        for &x in members {
            comp_of[x] = c;
        }
    }
    let sets: Vec<Tagged> = (0..space.len())
        .into_par_iter()
        .map(|x| {
            if large[x] {
                let mut c = family.sets[x].clone();
                c.extend(balls[x].iter().map(|&y| (y, 1)));
                c.sort_unstable();
                c.dedup();
                c
            } else {
                components[comp_of[x]].iter().map(|&y| (y, 1)).collect()
            }
        })
        .collect();

    let component_ok = (0..space.len())
        .filter(|&x| !large[x])
        .all(|x| components[comp_of[x]].iter().all(|&y| space.dist(x, y) < 2.0 * s));

    let all: Vec<usize> = (0..space.len()).collect();
    let small_eq = pair_scan(
        space,
        &all,
        1.0,
        |d| d <= r,
        |g, _| g,
        None::<fn(f64, f64) -> f64>,
        |x, y| {
            let differ = !large[x] && !large[y] && family.sets[x] != family.sets[y];
            if differ {
                1.0
            } else {
                0.0
            }
        },
    );
    let large_scan = pair_scan(
        space,
        &all,
        f64::INFINITY,
        |d| d <= r,
        |g, _| g,
        None::<fn(f64, f64) -> f64>,
        |x, y| {
            if large[x] && large[y] {
                symdiff_len(&sets[x], &sets[y]) as f64 / sets[x].len().min(sets[y].len()) as f64
            } else {
                0.0
            }
        },
    );
    let large_ratio_max = large_scan.max_score();
    let witness = small_eq
        .best
        .or(large_scan.best)
        .map(|h| PairWitness::from_hit(space, &h, h.gap));
    Ok(CxFamily {
        large_count: large.iter().filter(|&&b| b).count(),
        large,
        worst_ratio: worst,
        small_equal_ok: small_eq.best.is_none(),
        component_ok,
        large_ratio_ok: large_ratio_max < delta / 3.0,
        large_ratio_max,
        witness,
        sets,
    })
}

/// `x ↦ f_x`, `f_x(z) = |({z}×N) ∩ C_x| / |C_x|`, into the full simplex on
/// the points of the space.
pub fn cx_partition(space: &Arc<FiniteMetricSpace>, sets: &[Tagged]) -> Result<PUMap> {
    if sets.len() != space.len() {
        return Err(Error::Malformed(format!("{} sets for {} points", sets.len(), space.len())));
    }
    let mut values = Vec::with_capacity(sets.len());
    for (x, c) in sets.iter().enumerate() {
        if c.is_empty() {
            return Err(Error::EmptyCx(space.id(x).to_string()));
        }
        if let Some(&(z, _)) = c.iter().find(|&&(z, _)| z >= space.len()) {
            return Err(Error::ForeignPoint(format!("#{z} in C_{}", space.id(x))));
        }
        let total = c.len() as f64;
        let mut w: Vec<(Vertex, f64)> = Vec::new();
        for &(z, _) in c {
            match w.last_mut() {
                Some(last) if last.0 == z as Vertex => last.1 += 1.0,
                _ => w.push((z as Vertex, 1.0)),
            }
        }
        for t in &mut w {
            t.1 /= total;
        }
        values.push(Some(SimplexPoint::from_sorted_unchecked(w)));
    }
    let target = Arc::new(Complex::full(space.ids().to_vec()));
    Ok(PUMap::new_unchecked(space.clone(), target, values))
}

/// One link of the chain of estimates, checked on all pairs with `d ≤ R`.
#[derive(Debug, Clone, Serialize)]
pub struct LinkReport {
    pub bound: String,
    pub max: f64,
    pub ok: bool,
    pub witness: Option<PairWitness>,
}

/// The chain `‖|C_x|f_x − |C_y|f_y‖ ≤ |C_x Δ C_y|`,
/// `|C_x|/|C_y| − 1 ≤ δ/3` (with `|C_x| ≥ |C_y|`), `‖f_x − f_y‖ < δ`,
/// and star localization `ball(y,1/δ) ⊆ f⁻¹(st y) ⊆ ball(y, 2S)`.
#[derive(Debug, Clone, Serialize)]
pub struct ChainReport {
    pub counts: LinkReport,
    pub size_ratio: LinkReport,
    pub variation: LinkReport,
    pub star_inner_ok: bool,
    pub star_outer_ok: bool,
    pub star_witness: Option<String>,
}

impl ChainReport {
    pub fn ok(&self) -> bool {
        self.counts.ok && self.size_ratio.ok && self.variation.ok && self.star_inner_ok && self.star_outer_ok
    }
}

fn link<G: Fn(usize, usize) -> f64 + Sync>(
    space: &FiniteMetricSpace,
    r: f64,
    bound: String,
    gap: G,
    pass: impl Fn(f64) -> bool,
) -> LinkReport {
    let all: Vec<usize> = (0..space.len()).collect();
    let scan = pair_scan(space, &all, f64::INFINITY, |d| d <= r, |g, _| g, None::<fn(f64, f64) -> f64>, gap);
    let max = scan.max_score();
    LinkReport { bound, max, ok: pass(max), witness: scan.best.map(|h| PairWitness::from_hit(space, &h, h.gap)) }
}

pub fn check_cx_chain(cx: &CxFamily, f: &PUMap, p: &PropertyAInput, s_radius: f64) -> ChainReport {
    let space = f.space();
    let (r, delta) = (p.r, p.delta);
    let t = tau();
    let sets = &cx.sets;
    let size = |x: usize| sets[x].len() as f64;
    let val = |x: usize| f.value(x).unwrap();
    // Link 1 as a slack: ‖|C_x|f_x − |C_y|f_y‖ − |C_x Δ C_y|, must be ≤ 0.
    let counts = link(
        space,
        r,
        "||C_x| f_x - |C_y| f_y| <= |C_x ^ C_y|".into(),
        |x, y| {
            let lhs = crate::filler::scaled_l1(Some(val(x)), size(x), Some(val(y)), size(y));
            (lhs - symdiff_len(&sets[x], &sets[y]) as f64).max(0.0)
        },
        |m| m <= t,
    );
    let size_ratio = link(
        space,
        r,
        format!("|C_x|/|C_y| - 1 <= {}", delta / 3.0),
        |x, y| {
            let (a, b) = if size(x) >= size(y) { (size(x), size(y)) } else { (size(y), size(x)) };
            a / b - 1.0
        },
        |m| m <= delta / 3.0 + t,
    );
    let variation = link(
        space,
        r,
        format!("|f_x - f_y| < {delta}"),
        |x, y| crate::simplicial::l1_dist(val(x), val(y)),
        |m| m < delta + t,
    );

    let pre = f.star_preimages();
    let mut star_witness = None;
    let mut star_inner_ok = true;
    let mut star_outer_ok = true;
    for y in 0..space.len() {
        if pre[y].iter().any(|&x| space.dist(x, y) >= 2.0 * s_radius + t) {
            star_outer_ok = false;
            star_witness.get_or_insert_with(|| space.id(y).to_string());
        }
        let inner_missing = (0..space.len())
            .filter(|&x| cx.large[x] && space.dist(x, y) < 1.0 / delta)
            .any(|x| pre[y].binary_search(&x).is_err());
        if inner_missing {
            star_inner_ok = false;
            star_witness.get_or_insert_with(|| space.id(y).to_string());
        }
    }
    ChainReport { counts, size_ratio, variation, star_inner_ok, star_outer_ok, star_witness }
}

/// Full construction: `C_x`, the map `x ↦ f_x`, the chain and the δ-PU
/// certificate with star bound `bound_m`.
#[derive(Debug, Clone, Serialize)]
pub struct PropertyAResult {
    pub input: PropertyAInput,
    pub cx: CxFamily,
    #[serde(skip)]
    pub map: PUMap,
    pub chain: ChainReport,
    pub certificate: DeltaPUCertificate,
}

impl PropertyAResult {
    pub fn ok(&self) -> bool {
        self.cx.case_claims_ok() && self.chain.ok() && self.certificate.verdict
    }
}

pub fn property_a_partition(family: &SetFamily, p: &PropertyAInput, bound_m: f64) -> Result<PropertyAResult> {
    let cx = build_cx(family, p)?;
    let map = cx_partition(&family.space, &cx.sets)?;
    let chain = check_cx_chain(&cx, &map, p, family.s_radius);
    let certificate = check_delta_pu(&map, p.delta, bound_m)?;
    Ok(PropertyAResult { input: *p, cx, map, chain, certificate })
}

/// A family `{φ_s}` given by raw weights; `weights[x]` lists `(s, φ_s(x))`.
#[derive(Debug, Clone)]
pub struct PartitionFamily {
    pub space: Arc<FiniteMetricSpace>,
    pub labels: Vec<String>,
    pub weights: Vec<Vec<(Vertex, f64)>>,
}

/// Forward direction: a partition of unity with `(R, ε)` variation and
/// supports of diameter `≤ M` is a δ-partition of unity for
/// `δ = max(2/R, ε)`.
#[derive(Debug, Clone, Serialize)]
pub struct ForwardCertificate {
    pub r: f64,
    pub eps: f64,
    pub delta: f64,
    pub variation: VariationReport,
    pub support_mesh: f64,
    pub certificate: DeltaPUCertificate,
}

pub fn property_a_to_pu(phi: &PartitionFamily, r: f64, eps: f64, m_support: f64) -> Result<ForwardCertificate> {
    require_positive("R", r)?;
    require_positive("eps", eps)?;
    let space = &phi.space;
    if phi.weights.len() != space.len() {
        return Err(Error::Malformed(format!("{} weight rows for {} points", phi.weights.len(), space.len())));
    }
    let t = tau();
    let mut values = Vec::with_capacity(space.len());
    for (x, w) in phi.weights.iter().enumerate() {
        let sum: f64 = w.iter().map(|&(_, v)| v).sum();
        if (sum - 1.0).abs() > t || w.iter().any(|&(_, v)| v < 0.0 || !v.is_finite()) {
            return Err(Error::NotPartition { point: space.id(x).to_string(), sum });
        }
        values.push(Some(SimplexPoint::new(w.iter().copied())?));
    }
    let target = Arc::new(Complex::full(phi.labels.clone()));
    let f = PUMap::new(space.clone(), target, values)?;
    let pre = f.star_preimages();
    let mut support_mesh: f64 = 0.0;
    for (v, members) in pre.iter().enumerate() {
        let d = space.diameter(members);
        if d > m_support + t {
            return Err(Error::SupportTooBig { vertex: phi.labels[v].clone(), diameter: d, bound: m_support });
        }
        support_mesh = support_mesh.max(d);
    }
    let variation = check_variation(&f, r, eps)?;
    if !variation.ok {
        let w = variation.worst.clone().expect("failed variation has a witness");
        return Err(Error::VariationFailed { x: w.x, y: w.y, l1: w.value, eps });
    }
    let delta = (2.0 / r).max(eps);
    let certificate = check_delta_pu(&f, delta, m_support)?;
    Ok(ForwardCertificate { r, eps, delta, variation, support_mesh, certificate })
}

/// Reverse direction: a δ-partition of unity with `δ = ε/(R+1)` has
/// `(R, ε)` variation (`‖f(x) − f(y)‖ ≤ δ·d + δ ≤ ε`), with supports of
/// diameter `≤ M`.
#[derive(Debug, Clone, Serialize)]
pub struct ReverseCertificate {
    pub r: f64,
    pub eps: f64,
    pub delta: f64,
    pub certificate: DeltaPUCertificate,
    pub max_l1: f64,
    pub variation_ok: bool,
    pub witness: Option<PairWitness>,
    pub ok: bool,
}

pub fn pu_to_property_a(f: &PUMap, r: f64, eps: f64, bound_m: f64) -> Result<ReverseCertificate> {
    require_positive("R", r)?;
    require_positive("eps", eps)?;
    let delta = eps / (r + 1.0);
    let certificate = check_delta_pu(f, delta, bound_m)?;
    let v = check_variation(f, r, eps)?;
    let variation_ok = v.max_l1 <= eps + tau();
    Ok(ReverseCertificate {
        r,
        eps,
        delta,
        ok: certificate.verdict && variation_ok,
        certificate,
        max_l1: v.max_l1,
        variation_ok,
        witness: v.worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Arc<FiniteMetricSpace> {
        Arc::new(crate::metric_space::tests::line(&(0..n).map(|i| i as f64).collect::<Vec<_>>()))
    }

    #[test]
    fn ratio_examples() {
        let x = path(40);
        let fam = ball_family(&x, 3.5, 1).unwrap();
        assert_eq!(symdiff_ratio(&fam, 20, 21), 2.0 / 6.0);
        assert_eq!(symdiff_ratio(&fam, 20, 20), 0.0);
        assert_eq!(symdiff_ratio(&fam, 0, 30), f64::INFINITY);
        let deep = ball_family(&x, 3.5, 4).unwrap();
        assert_eq!(symdiff_ratio(&deep, 20, 21), 2.0 / 6.0);
        let a = vec![(0, 1), (1, 1), (2, 1)];
        let b = vec![(1, 1), (2, 1), (3, 1)];
        assert_eq!(ratio_of(&a, &b), 1.0);
    }

    #[test]
    fn cx_singletons_and_balls() {
        let x = path(10);
        let singles: Vec<Tagged> = (0..10).map(|y| vec![(y, 1)]).collect();
        let f = cx_partition(&x, &singles).unwrap();
        assert_eq!(crate::simplicial::l1_dist(f.value(2).unwrap(), f.value(3).unwrap()), 2.0);
        let balls: Vec<Tagged> = (0..10).map(|y| x.ball(y, 2.0).unwrap().iter().map(|z| (z, 1)).collect()).collect();
        let g = cx_partition(&x, &balls).unwrap();
        assert_eq!(g.value(5).unwrap().weight(4), 1.0 / 3.0);
        assert_eq!(cx_partition(&x, &vec![Vec::new(); 10]).unwrap_err().code(), "EMPTY_CX");
    }

    #[test]
    fn constraint_errors() {
        let x = path(50);
        let fam = ball_family(&x, 6.0, 1).unwrap();
        let p = PropertyAInput { r: 3.0, eps: 1.0, m: 3, delta: 0.5 };
        assert_eq!(build_cx(&fam, &p).unwrap_err().code(), "PARAMETER_CONSTRAINT_FAILED");
        let p = PropertyAInput { r: 7.0, eps: 1.0, m: 3, delta: 0.5 };
        assert_eq!(build_cx(&fam, &p).unwrap_err().code(), "RATIO_PRECONDITION_FAILED");
        let p = PropertyAInput { r: 7.0, eps: 1.0, m: 2, delta: 0.4 };
        let fam = ball_family(&x, 9.0, 1).unwrap();
        assert_eq!(build_cx(&fam, &p).unwrap_err().code(), "BALL_TOO_BIG");
    }
}
