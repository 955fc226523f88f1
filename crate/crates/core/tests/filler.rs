use std::sync::Arc;

use coarsescope::covers::{brick_cover, brick_mesh_bound};
use coarsescope::filler::{build_filler, find_schedule, schedule_at};
use coarsescope::fixtures::{self, filler_line_fixture};
use coarsescope::pu_maps::{check_delta_pu, PUMap};
use coarsescope::{Complex, PointSet, SimplexPoint};

/// Direct scan of the three inequalities for `R = k`, `δ = 1/(k·S(k))`.
fn first_k(n: usize, eps: f64, s: impl Fn(f64) -> f64, limit: u64) -> Option<u64> {
    let m = n as f64;
    (1..=limit).find(|&k| {
        let r = k as f64;
        let delta = 1.0 / (r * s(r));
        let mu = (8.0 * m + 5.0) * (r + 1.0) * delta;
        let lip = 4.0 * (m + 5.0).powi(2) / r;
        let lebesgue = (1.0 - (m + 1.0) * mu) / ((m + 1.0) * lip);
        lebesgue >= 1.0 / eps && mu < eps && lip < eps
    })
}

#[test]
fn schedule_matches_direct_scan() {
    for (n, eps) in [(0, 1.0), (0, 0.5), (1, 1.0), (1, 0.5), (2, 3.0)] {
        let s = find_schedule(n, eps, |r| 2.0 * (n as f64 + 1.0) * r, 1_000_000).unwrap();
        assert_eq!(Some(s.k), first_k(n, eps, |r| 2.0 * (n as f64 + 1.0) * r, 1_000_000));
        assert!(s.holds());
    }
    let s = find_schedule(0, 1.0, |r| 2.0 * r, 1_000).unwrap();
    assert!(s.k > 100);
    assert!(!schedule_at(0, 1.0, s.k - 1, 2.0 * (s.k - 1) as f64).holds());
}

#[test]
fn schedule_search_reports_blocking_inequality() {
    let e = find_schedule(1, 0.01, |r| 4.0 * r, 10).unwrap_err();
    assert_eq!(e.code(), "SCHEDULE_NOT_FOUND");
    assert!(e.to_string().contains("(3)"));
}

#[test]
fn filler_is_f_when_a_is_everything() {
    let space = Arc::new(fixtures::path_line(12));
    let target = Arc::new(Complex::full(vec!["v".into()]));
    let f = PUMap::total(space.clone(), target, vec![SimplexPoint::vertex(0); 12]).unwrap();
    let sched = find_schedule(0, 1.0, |r| brick_mesh_bound(r, 1), 1_000_000).unwrap();
    let cover = brick_cover(&space, sched.r, 1).unwrap().cover;
    let res = build_filler(&f, &space.full_set(), &sched, &cover).unwrap();
    assert!(res.certificate_ok);
    for x in 0..12 {
        assert_eq!(res.h.value(x), f.value(x));
    }
}

#[test]
fn filler_is_beta_when_a_is_empty() {
    let fx = filler_line_fixture(0, 1.0, 1500).unwrap();
    let empty = PointSet::empty(fx.space.len());
    let res = build_filler(&fx.f, &empty, &fx.schedule, &fx.cover).unwrap();
    assert!(res.alpha.values.iter().all(|&a| a == 0.0));
    for x in 0..fx.space.len() {
        assert_eq!(res.h.value(x), res.beta.map.value(x));
    }
    assert!(res.certificate_ok, "{:?}", res.lipschitz);
}

#[test]
fn line_fixture_end_to_end_at_n0() {
    let fx = filler_line_fixture(0, 1.0, 2000).unwrap();
    assert!(check_delta_pu(&fx.f, fx.schedule.delta, f64::INFINITY).unwrap().verdict);
    let res = build_filler(&fx.f, &fx.a, &fx.schedule, &fx.cover).unwrap();
    assert!(res.agreement_on_a);
    assert!(res.carrier_inclusion);
    assert!(res.in_skeleton);
    assert!(res.lipschitz.ok);
    assert!(res.lebesgue_ok);
    assert!(res.intermediate_ok());
    res.verify().unwrap();
    for x in 0..fx.space.len() {
        let total: f64 = res.h.value(x).unwrap().weights().iter().map(|w| w.1).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn preconditions_are_checked() {
    let fx = filler_line_fixture(0, 1.0, 1000).unwrap();
    // f does not send the whole space into the 0-skeleton
    let e = build_filler(&fx.f, &fx.space.full_set(), &fx.schedule, &fx.cover).unwrap_err();
    assert_eq!(e.code(), "A_NOT_IN_SKELETON");
    // a cover at a smaller scale has too small a Lebesgue number
    let small = brick_cover(&fx.space, 3.0, 1).unwrap().cover;
    assert!(build_filler(&fx.f, &fx.a, &fx.schedule, &small).is_err());
}
