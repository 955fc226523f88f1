//! Pushing a map into the n-skeleton by folding tail mass onto the heaviest
//! vertex.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{require_positive, Error, Result};
use crate::metric_space::PointSet;
use crate::pu_maps::{check_variation, PUMap, VariationReport};
use crate::simplicial::{l1_dist, SimplexPoint, Vertex};
use crate::tol::tau;

/// Weights in fold order: descending weight, ties by ascending vertex.
fn fold_order(p: &SimplexPoint) -> Vec<(Vertex, f64)> {
    let mut w = p.weights().to_vec();
    w.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    w
}

/// Mass beyond the first `n + 1` vertices in fold order, summed in that
/// order starting from 0.
pub fn tail_mass(p: &SimplexPoint, n: usize) -> f64 {
    fold_order(p).iter().skip(n + 1).fold(0.0, |acc, &(_, w)| acc + w)
}

/// Folds `p` into `K^(n)`: keeps the `n + 1` heaviest vertices and moves the
/// tail onto the heaviest one. Identity on `K^(n)`.
pub fn fold(p: &SimplexPoint, n: usize) -> SimplexPoint {
    if p.in_skeleton(n) {
        return p.clone();
    }
    let order = fold_order(p);
    let tail = order[n + 1..].iter().fold(0.0, |acc, &(_, w)| acc + w);
    let mut kept: Vec<(Vertex, f64)> = order[..n + 1].to_vec();
    kept[0].1 += tail;
    kept.sort_by_key(|&(v, _)| v);
    SimplexPoint::from_sorted_unchecked(kept)
}

/// The fold applied at every point of `f`'s domain.
pub fn fold_map(f: &PUMap, n: usize) -> PUMap {
    let values = f
        .values()
        .par_iter()
        .map(|v| v.as_ref().map(|p| fold(p, n)))
        .collect();
    PUMap::new_unchecked(f.space().clone(), f.target().clone(), values)
}

/// Output of [`push_to_skeleton`] with every verified clause.
#[derive(Debug, Clone, Serialize)]
pub struct PushResult {
    /// The fold restricted to `B(A, R)`.
    #[serde(skip)]
    pub r: PUMap,
    /// The same fold on all of `f`'s domain.
    #[serde(skip)]
    pub extended: PUMap,
    #[serde(skip)]
    pub neighborhood: PointSet,
    pub n: usize,
    pub radius: f64,
    pub eps: f64,
    pub input_variation: VariationReport,
    pub mu_claimed: f64,
    pub variation: VariationReport,
    pub variation_verified: bool,
    pub agreement_on_a: bool,
    pub carrier_inclusion: bool,
    pub in_skeleton: bool,
    pub max_displacement: f64,
    pub displacement_bound: f64,
    pub displacement_witness: Option<String>,
    pub displacement_ok: bool,
}

impl PushResult {
    pub fn all_verified(&self) -> bool {
        self.variation_verified
            && self.agreement_on_a
            && self.carrier_inclusion
            && self.in_skeleton
            && self.displacement_ok
    }

    /// Turns the first failed clause into an error.
    pub fn verify(&self) -> Result<()> {
        let fail = |clause: &str, witness: String| {
            Err(Error::VerificationFailed { clause: clause.into(), witness })
        };
        if !self.agreement_on_a {
            return fail("agreement_on_A", "r differs from f on A".into());
        }
        if !self.carrier_inclusion {
            return fail("carrier_inclusion", "carrier(r(x)) not in carrier(f(x))".into());
        }
        if !self.in_skeleton {
            return fail("skeleton", format!("r leaves the {}-skeleton", self.n));
        }
        if !self.displacement_ok {
            return fail(
                "pointwise",
                format!(
                    "|f - r| = {} at {:?}, bound {}",
                    self.max_displacement, self.displacement_witness, self.displacement_bound
                ),
            );
        }
        if !self.variation_verified {
            return fail("variation", format!("{:?}", self.variation.worst));
        }
        Ok(())
    }
}

/// Pushes `f` into the `n`-skeleton over `B(A, R)`.
///
/// Requires `f` to have `(R, ε)` variation and to send `A` into `K^(n)`.
/// The result has `(R, (8n+5)ε)` variation on `B(A, R)`, agrees with `f` on
/// `A` and satisfies `‖f(x) − r(x)‖ < 2(2n+1)ε` there.
pub fn push_to_skeleton(f: &PUMap, a: &PointSet, radius: f64, n: usize, eps: f64) -> Result<PushResult> {
    require_positive("R", radius)?;
    require_positive("eps", eps)?;
    let space = f.space();
    let input_variation = check_variation(f, radius, eps)?;
    if !input_variation.ok {
        let w = input_variation.worst.clone().expect("failed variation has a witness");
        return Err(Error::PreconditionVariation { x: w.x, y: w.y, r: radius, eps, l1: w.value });
    }
    let neighborhood = space.neighborhood(a, radius)?;
    if let Some(x) = neighborhood.iter().find(|&x| f.value(x).is_none()) {
        return Err(Error::Precondition {
            clause: "domain",
            detail: format!("f is undefined at {} in B(A,R)", space.id(x)),
        });
    }
    for x in a.iter() {
        let p = f.value(x).unwrap();
        if !p.in_skeleton(n) {
            return Err(Error::ANotInSkeleton {
                point: space.id(x).to_string(),
                n,
                size: p.support_len(),
            });
        }
    }

    let extended = fold_map(f, n);
    let r = extended.restrict(&neighborhood);

    let agreement_on_a = a.iter().all(|x| r.value(x) == f.value(x));
    let carrier_inclusion = extended
        .domain()
        .iter()
        .all(|&x| extended.value(x).unwrap().carried_by(f.value(x).unwrap()));
    let in_skeleton = r.skeleton_violation(n).is_none();

    let k = n as f64;
    let displacement_bound = 2.0 * (2.0 * k + 1.0) * eps;
    let mut max_displacement = 0.0;
    let mut displacement_witness = None;
    for x in neighborhood.iter() {
        let d = l1_dist(f.value(x).unwrap(), r.value(x).unwrap());
        if d > max_displacement {
            max_displacement = d;
            displacement_witness = Some(space.id(x).to_string());
        }
    }
    let displacement_ok = max_displacement < displacement_bound + tau();

    let mu_claimed = (8.0 * k + 5.0) * eps;
    let variation = check_variation(&r, radius, mu_claimed)?;
    Ok(PushResult {
        r,
        extended,
        neighborhood,
        n,
        radius,
        eps,
        input_variation,
        mu_claimed,
        variation_verified: variation.ok,
        variation,
        agreement_on_a,
        carrier_inclusion,
        in_skeleton,
        max_displacement,
        displacement_bound,
        displacement_witness,
        displacement_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(w: &[(Vertex, f64)]) -> SimplexPoint {
        SimplexPoint::new(w.iter().copied()).unwrap()
    }

    #[test]
    fn folding_rule() {
        let p = sp(&[(1, 0.4), (2, 0.3), (3, 0.2), (4, 0.1)]);
        let r = fold(&p, 1);
        assert!((r.weight(1) - 0.7).abs() < 1e-12);
        assert!((r.weight(2) - 0.3).abs() < 1e-12);
        assert_eq!(r.support_len(), 2);
        assert!((tail_mass(&p, 1) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn ties_break_by_vertex() {
        let p = sp(&[(0, 0.25), (1, 0.25), (2, 0.25), (3, 0.25)]);
        let r = fold(&p, 1);
        assert_eq!(r.weights(), &[(0, 0.75), (1, 0.25)]);
    }

    #[test]
    fn identity_on_skeleton() {
        let p = sp(&[(0, 0.5), (5, 0.5)]);
        assert_eq!(fold(&p, 1), p);
        assert_eq!(tail_mass(&p, 3), 0.0);
        let u = sp(&[(0, 0.2), (1, 0.2), (2, 0.2), (3, 0.2), (4, 0.2)]);
        assert!((tail_mass(&u, 1) - 0.6).abs() < 1e-12);
    }
}
