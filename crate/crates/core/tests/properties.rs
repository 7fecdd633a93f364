//! Property tests of the library's invariants.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use triopoly::bounds::{bound_extremum, enclose, BoundConfig, Component, Extremum, IntervalBox};
use triopoly::certificate::{check_hypotheses, ConditionId, Engine, Status};
use triopoly::dynamics::{logistic_sap_demo, lyapunov_at_fixed_point};
use triopoly::horseshoe::{build_k_enclosures, locate_fixed_point_in, OrientedBox};
use triopoly::symbolic::{find_periodic_orbit, PeriodicOptions, SymbolWord};
use triopoly::{certify_box, CertifyOptions, Cuboid, EngineChoice, Params, State};

fn params() -> impl Strategy<Value = Params> {
    (0.05f64..2.0, 0.05f64..2.0, 0.05f64..2.0, 0.1f64..30.0)
        .prop_map(|(c1, c2, c3, a)| Params::new(c1, c2, c3, a).unwrap())
}

/// Boxes within 10% of the example box.
fn near_reference_box() -> impl Strategy<Value = Cuboid> {
    let b = Cuboid::reference();
    (
        -0.1f64..0.1,
        0.9f64..1.1,
        -0.1f64..0.1,
        0.9f64..1.1,
        0.9f64..1.1,
    )
        .prop_filter_map("box invariants", move |(dx, sx, dy, sy, sz)| {
            let xl = b.x_l * (1.0 + dx);
            let yl = b.y_l * (1.0 + dy);
            Cuboid::new(
                xl,
                xl + (b.x_r - b.x_l) * sx,
                yl,
                yl + (b.y_r - b.y_l) * sy,
                0.0,
                b.z_r * sz,
            )
            .ok()
        })
}

fn passes_h(p: &Params, b: &Cuboid) -> bool {
    check_hypotheses(p, b, 1e-12)
        .iter()
        .all(|r| r.status == Status::Pass)
}

/// Boxes near the example box that satisfy every hypothesis, by seeded
/// rejection sampling.
fn h_passing_box() -> impl Strategy<Value = Cuboid> {
    any::<u64>().prop_map(|seed| {
        let p = Params::reference();
        let b = Cuboid::reference();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let mut r = |w: f64| 1.0 + rng.gen_range(-w..w);
            let xl = b.x_l * r(0.05);
            let yl = b.y_l * r(0.05);
            let c = Cuboid::new(
                xl,
                xl + (b.x_r - b.x_l) * r(0.1),
                yl,
                yl + (b.y_r - b.y_l) * r(0.1),
                0.0,
                b.z_r * r(0.1),
            );
            if let Ok(c) = c {
                if passes_h(&p, &c) {
                    return c;
                }
            }
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn interior_fixed_point_balances(p in params()) {
        let fp = p.fixed_points()[0];
        prop_assume!(fp.positive);
        let s = fp.state;
        let q2 = (s.x + s.y + s.z).powi(2);
        prop_assert!((s.y + s.z - p.c1 * q2).abs() < 1e-12);
        prop_assert!((s.x + s.z - p.c2 * q2).abs() < 1e-12);
        prop_assert!((s.x + s.y - p.c3 * q2).abs() < 1e-12);
    }

    #[test]
    fn jacobian_matches_central_differences(
        p in params(), x in 1e-3f64..2.0, y in 1e-3f64..2.0, z in 1e-3f64..2.0
    ) {
        let s = [x, y, z];
        let j = p.jacobian(State::from_array(s)).unwrap();
        let h = 1e-6;
        let mut diff = 0.0f64;
        for col in 0..3 {
            let (mut a, mut c) = (s, s);
            a[col] += h;
            c[col] -= h;
            let fa = p.eval(State::from_array(a)).unwrap().to_array();
            let fc = p.eval(State::from_array(c)).unwrap().to_array();
            for row in 0..3 {
                diff = diff.max((j[(row, col)] - (fa[row] - fc[row]) / (2.0 * h)).abs());
            }
        }
        prop_assert!(diff / j.abs().max() < 1e-6, "{diff}");
    }

    #[test]
    fn enclosures_contain_sampled_values(
        b in near_reference_box(), u in prop::array::uniform3(0.0f64..1.0), frac in 0.01f64..1.0
    ) {
        let p = Params::reference();
        let lo = [b.x_l, b.y_l, b.z_l];
        let hi = [b.x_l + frac * (b.x_r - b.x_l), b.y_l + frac * (b.y_r - b.y_l), b.z_l + frac * (b.z_r - b.z_l)];
        let region = Cuboid::new(lo[0], hi[0], lo[1], hi[1], lo[2], hi[2]).unwrap().to_interval_box();
        let s = State::new(lo[0] + u[0] * (hi[0] - lo[0]), lo[1] + u[1] * (hi[1] - lo[1]), lo[2] + u[2] * (hi[2] - lo[2]));
        let v = p.eval(s).unwrap().to_array();
        for c in Component::ALL {
            let iv = enclose(&p, c, &region).unwrap();
            prop_assert!(iv.lo <= v[c.index()] && v[c.index()] <= iv.hi);
        }
    }

    #[test]
    fn margins_carry_the_verdict(b in near_reference_box()) {
        let p = Params::reference();
        for r in check_hypotheses(&p, &b, 1e-12) {
            prop_assert_eq!(r.status == Status::Pass, r.margin > 0.0 || r.id == ConditionId::H1);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn engines_agree_on_passing_boxes(b in h_passing_box()) {
        let p = Params::reference();
        let cert = certify_box(&p, &b, &CertifyOptions::with_engine(EngineChoice::Both));
        for id in ConditionId::CONDITIONS {
            let r = cert.record(id).unwrap();
            let a = r.evidence_from(Engine::Analytic).unwrap();
            let i = r.evidence_from(Engine::Interval).unwrap();
            let m = a.binding().map_or(0.0, |c| c.margin);
            prop_assert!(a.status == i.status || m.abs() < 1e-8, "{id}: {:?} vs {:?}", a.status, i.status);
            prop_assert_eq!(a.extrema.len(), i.extrema.len());
            for (x, y) in a.extrema.iter().zip(&i.extrema) {
                let enc = y.enclosure.unwrap();
                let gap = (x.value - enc.lo).abs().max((x.value - enc.hi).abs());
                prop_assert!(gap <= 1e-8, "{id} {}: {} vs [{}, {}]", x.label, x.value, enc.lo, enc.hi);
            }
        }
    }

    #[test]
    fn c2_reduction_is_decreasing(b in h_passing_box(), t in 0.0f64..1.0) {
        let p = Params::reference();
        let (lo, hi) = (b.x_l + b.y_l, b.x_r + b.y_r);
        let a = lo + t * (hi - lo);
        let zr = b.z_r;
        let dphi = zr * p.alpha * (zr - a) / (a + zr).powi(3);
        prop_assert!(dphi < 0.0);
    }

    #[test]
    fn smaller_tolerance_nests(b in near_reference_box()) {
        let p = Params::reference();
        let r = b.to_interval_box();
        let coarse = bound_extremum(&p, &r, "R", Component::F2, Extremum::Min, &BoundConfig { tol: 1e-6, ..BoundConfig::default() }).unwrap();
        let fine = bound_extremum(&p, &r, "R", Component::F2, Extremum::Min, &BoundConfig { tol: 1e-7, ..BoundConfig::default() }).unwrap();
        prop_assert!(coarse.enclosure.lo <= fine.enclosure.lo && fine.enclosure.hi <= coarse.enclosure.hi);
    }

    #[test]
    fn logistic_claims_survive_resampling(mu in 3.6f64..5.0) {
        let r = logistic_sap_demo(mu);
        let f = |n: u32, x: f64| (0..n).fold(x, |v, _| mu * v * (1.0 - v));
        for c in [r.first_iterate, r.second_iterate].into_iter().flatten() {
            prop_assert!(c.verified);
            prop_assert!(c.i0[1] < c.i1[0]);
            for iv in [c.i0, c.i1] {
                let (a, b) = (f(c.iterate, iv[0]), f(c.iterate, iv[1]));
                prop_assert!(a.min(b) <= c.target[0] && a.max(b) >= c.target[1]);
                prop_assert!(c.target[0] <= iv[0] && iv[1] <= c.target[1]);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn covers_stay_disjoint(res in 8usize..40) {
        let ob = OrientedBox::new(Cuboid::reference());
        let (k0, k1) = build_k_enclosures(&Params::reference(), &ob, res).unwrap();
        prop_assert!(!k0.is_empty() && !k1.is_empty());
        prop_assert!(!k0.intersects(&k1));
    }

    #[test]
    fn periodic_points_close_up(bits in prop::collection::vec(0u8..2, 1..=4)) {
        let p = Params::reference();
        let ob = OrientedBox::new(Cuboid::reference());
        let w = SymbolWord::new(bits).unwrap();
        let opts = PeriodicOptions::default();
        let r = find_periodic_orbit(&p, &ob, &w, &opts).unwrap();
        prop_assert!(r.converged);
        let (img, _) = p.iterate_with_jacobian(r.point, w.len()).unwrap();
        prop_assert!(img.sub(r.point).max_abs() < opts.tol);
        prop_assert!(ob.halves().get(usize::from(w.symbols()[0])).contains(r.point));
    }
}

#[test]
fn fixed_points_lie_in_their_k_covers() {
    let p = Params::reference();
    let ob = OrientedBox::new(Cuboid::reference());
    let (k0, k1) = build_k_enclosures(&p, &ob, 64).unwrap();
    for (i, k) in [k0, k1].iter().enumerate() {
        let fp = locate_fixed_point_in(&p, &ob, i).unwrap();
        assert!(ob.halves().get(i).contains(fp.state));
        assert!(k.contains(fp.state), "R{i}");
    }
}

#[test]
fn lyapunov_at_fixed_points_matches_eigenvalues() {
    for alpha in [2.0, 6.0, 17.0] {
        let p = Params::reference().with_alpha(alpha).unwrap();
        for fp in p.fixed_points().into_iter().filter(|f| f.state.in_domain()) {
            let rep = lyapunov_at_fixed_point(&p, fp.state, 4000).unwrap();
            let mut logs: Vec<f64> = p
                .jacobian(fp.state)
                .unwrap()
                .complex_eigenvalues()
                .iter()
                .map(|c| c.norm().ln())
                .collect();
            logs.sort_by(|a, b| b.total_cmp(a));
            for (e, l) in rep.exponents.iter().zip(&logs) {
                assert!(
                    (e - l).abs() < 1e-6,
                    "alpha {alpha}: {:?} vs {logs:?}",
                    rep.exponents
                );
            }
        }
    }
}

#[test]
fn interval_box_helpers_agree_with_cuboid() {
    let b = Cuboid::reference();
    let ib: IntervalBox = b.to_interval_box();
    assert!(ib.midpoint().sub(b.center()).max_abs() < 1e-15);
}
