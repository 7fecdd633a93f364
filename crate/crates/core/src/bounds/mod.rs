//! Rigorous enclosures of the map components over boxes.
//!
//! [`interval_eval`] is the natural interval extension of the map. The
//! branch-and-bound search in [`bound_extremum`] tightens it with a
//! mean-value (centred) form and with monotonicity reductions driven by
//! interval enclosures of the partial derivatives.

mod branch;
mod interval;

pub use branch::{bound_extremum, BoundConfig, BoundReport, BoundStatus, Extremum, DEFAULT_BUDGET};
pub use interval::{Interval, IntervalBox, ROUNDING_STRATEGY};

use serde::{Deserialize, Serialize};

use crate::certificate::{Cuboid, Engine, Evidence, Extremal, Inequality, Relation, Status};
use crate::error::{Error, Result};
use crate::model::Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Component {
    F1,
    F2,
    F3,
}

impl Component {
    pub const ALL: [Component; 3] = [Component::F1, Component::F2, Component::F3];

    pub fn index(self) -> usize {
        self as usize
    }
}

fn check_domain(ib: &IntervalBox) -> Result<()> {
    let d = ib.ix + ib.iz;
    let q = ib.ix + ib.iy + ib.iz;
    if d.lo <= 0.0 {
        return Err(Error::Domain(format!(
            "x + z may be non-positive on {ib:?} (lower bound {})",
            d.lo
        )));
    }
    if q.lo <= 0.0 {
        return Err(Error::Domain(format!(
            "x + y + z may be non-positive on {ib:?} (lower bound {})",
            q.lo
        )));
    }
    Ok(())
}

fn f1(p: &Params, ib: &IntervalBox) -> Interval {
    let q = ib.ix + ib.iy + ib.iz;
    let num = ib.ix.scale_pow2(2.0) + ib.iy + ib.iz - q.sqr() * p.c1;
    num.scale_pow2(0.5)
}

fn f2(p: &Params, ib: &IntervalBox) -> Interval {
    let d = ib.ix + ib.iz;
    (d / p.c2).sqrt().expect("positive by domain check") - d
}

fn one_minus_alpha_c3(p: &Params) -> Interval {
    Interval::point(1.0) - Interval::point(p.alpha) * p.c3
}

fn f3(p: &Params, ib: &IntervalBox) -> Interval {
    let a = ib.ix + ib.iy;
    let q = a + ib.iz;
    let frac = (a * p.alpha)
        .checked_div(q.sqr())
        .expect("positive by domain check");
    ib.iz * (one_minus_alpha_c3(p) + frac)
}

fn natural(p: &Params, c: Component, ib: &IntervalBox) -> Interval {
    match c {
        Component::F1 => f1(p, ib),
        Component::F2 => f2(p, ib),
        Component::F3 => f3(p, ib),
    }
}

/// Natural interval extension of the three components.
///
/// Inclusion-isotone: a sub-box yields sub-enclosures.
pub fn interval_eval(p: &Params, ib: &IntervalBox) -> Result<[Interval; 3]> {
    check_domain(ib)?;
    Ok([f1(p, ib), f2(p, ib), f3(p, ib)])
}

/// Interval enclosure of the gradient of one component.
pub fn gradient(p: &Params, c: Component, ib: &IntervalBox) -> Result<[Interval; 3]> {
    check_domain(ib)?;
    Ok(gradient_unchecked(p, c, ib))
}

fn gradient_unchecked(p: &Params, c: Component, ib: &IntervalBox) -> [Interval; 3] {
    match c {
        Component::F1 => {
            let cq = (ib.ix + ib.iy + ib.iz) * p.c1;
            let dx = Interval::point(1.0) - cq;
            let dyz = Interval::point(0.5) - cq;
            [dx, dyz, dyz]
        }
        Component::F2 => {
            let root = ((ib.ix + ib.iz) * p.c2).sqrt().expect("positive");
            let dxz = Interval::point(1.0)
                .checked_div(root.scale_pow2(2.0))
                .expect("positive")
                - 1.0;
            [dxz, Interval::point(0.0), dxz]
        }
        Component::F3 => {
            let a = ib.ix + ib.iy;
            let q = a + ib.iz;
            let q3 = q.sqr() * q;
            let dxy = (ib.iz * (ib.iz - a) * p.alpha)
                .checked_div(q3)
                .expect("positive");
            let dz = one_minus_alpha_c3(p)
                + (a * (a - ib.iz) * p.alpha)
                    .checked_div(q3)
                    .expect("positive");
            [dxy, dxy, dz]
        }
    }
}

/// Enclosure of one component: the natural extension intersected with the
/// mean-value form `F(m) + sum_i dF/dx_i(X) (X_i - m_i)` around the midpoint.
pub fn enclose(p: &Params, c: Component, ib: &IntervalBox) -> Result<Interval> {
    check_domain(ib)?;
    Ok(enclose_unchecked(p, c, ib))
}

fn enclose_unchecked(p: &Params, c: Component, ib: &IntervalBox) -> Interval {
    let nat = natural(p, c, ib);
    if ib.is_point() {
        return nat;
    }
    let m = ib.midpoint();
    let mut centred = natural(p, c, &IntervalBox::point(m));
    let g = gradient_unchecked(p, c, ib);
    for (i, gi) in g.iter().enumerate() {
        let dev = ib.axis(i) - m.get(i);
        centred = centred + *gi * dev;
    }
    nat.intersect(centred).unwrap_or(nat)
}

/// Rigorous check of the five conditions on a box, each phrased as a sign or
/// containment claim about an extremum enclosure:
///
/// * `C1`: max of `F3` on the bottom face `<= z_l`
/// * `C2`: max of `F3` on the top face `<= z_l`
/// * `C3'`: min of `F3` on the midplane `> z_r`
/// * `C4`: `[min F1, max F1] ⊆ [x_l, x_r]` over the box
/// * `C5`: `[min F2, max F2] ⊆ [y_l, y_r]` over the box
///
/// A condition passes when the conservative end of the enclosure satisfies
/// it, fails when the certified-achieved end violates it, and is
/// inconclusive otherwise.
pub fn verify_conditions(
    p: &Params,
    b: &Cuboid,
    cfg: &BoundConfig,
    min_margin: f64,
) -> Vec<Evidence> {
    let full = b.to_interval_box();
    let bottom = b.slice(2, b.z_l);
    let top = b.slice(2, b.z_r);
    let mid = b.slice(2, b.mid(2));

    let single = |label: &str,
                  region: &IntervalBox,
                  region_name: &str,
                  c: Component,
                  which: Extremum,
                  rel: Relation,
                  threshold: f64| {
        match bound_extremum(p, region, region_name, c, which, cfg) {
            Ok(rep) => evidence_for(&[(label, rep, rel, threshold)], min_margin),
            Err(e) => domain_evidence(e),
        }
    };
    let pair = |c: Component, lo: f64, hi: f64, name: &str| {
        let max = bound_extremum(p, &full, "box", c, Extremum::Max, cfg);
        let min = bound_extremum(p, &full, "box", c, Extremum::Min, cfg);
        match (max, min) {
            (Ok(max), Ok(min)) => evidence_for(
                &[
                    (&format!("max {name} <= upper edge"), max, Relation::Le, hi),
                    (&format!("min {name} >= lower edge"), min, Relation::Ge, lo),
                ],
                min_margin,
            ),
            (Err(e), _) | (_, Err(e)) => domain_evidence(e),
        }
    };

    vec![
        single(
            "max F3 on bottom face <= z_l",
            &bottom,
            "bottom face",
            Component::F3,
            Extremum::Max,
            Relation::Le,
            b.z_l,
        ),
        single(
            "max F3 on top face <= z_l",
            &top,
            "top face",
            Component::F3,
            Extremum::Max,
            Relation::Le,
            b.z_l,
        ),
        single(
            "min F3 on midplane > z_r",
            &mid,
            "midplane",
            Component::F3,
            Extremum::Min,
            Relation::Gt,
            b.z_r,
        ),
        pair(Component::F1, b.x_l, b.x_r, "F1"),
        pair(Component::F2, b.y_l, b.y_r, "F2"),
    ]
}

fn domain_evidence(e: Error) -> Evidence {
    Evidence {
        engine: Engine::Interval,
        status: Status::Inapplicable,
        checks: Vec::new(),
        extrema: Vec::new(),
        note: Some(e.to_string()),
    }
}

fn evidence_for(parts: &[(&str, BoundReport, Relation, f64)], min_margin: f64) -> Evidence {
    let mut checks = Vec::new();
    let mut extrema = Vec::new();
    let mut any_fail = false;
    let mut all_pass = true;
    for (label, rep, rel, threshold) in parts {
        let enc = rep.enclosure;
        // conservative end for passing, achieved end for failing
        let (pass_side, fail_side) = match rel {
            Relation::Le | Relation::Lt => (enc.hi, enc.lo),
            Relation::Ge | Relation::Gt | Relation::Eq => (enc.lo, enc.hi),
        };
        debug_assert!(rep.which == Extremum::Max || !matches!(rel, Relation::Le | Relation::Lt));
        let check = Inequality::new(*label, pass_side, *rel, *threshold, min_margin);
        // the true extremum lies in the enclosure, so a violation at the
        // other end is a violation everywhere
        let refuted = match rel {
            Relation::Le => fail_side > *threshold,
            Relation::Lt => fail_side >= *threshold,
            Relation::Ge => fail_side < *threshold,
            Relation::Gt => fail_side <= *threshold,
            Relation::Eq => !enc.contains(*threshold),
        };
        all_pass &= check.holds;
        any_fail |= refuted;
        checks.push(check);
        extrema.push(Extremal {
            label: format!("{:?} {:?} on {}", rep.which, rep.component, rep.region).to_lowercase(),
            value: rep.best_value,
            at: Some(rep.best_point),
            enclosure: Some(enc),
        });
    }
    let status = if all_pass {
        Status::Pass
    } else if any_fail {
        Status::Fail
    } else {
        Status::Inconclusive
    };
    Evidence {
        engine: Engine::Interval,
        status,
        checks,
        extrema,
        note: None,
    }
}
