use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::interval::{Interval, IntervalBox, ROUNDING_STRATEGY};
use super::{check_domain, enclose_unchecked, gradient_unchecked, natural, Component};
use crate::error::{Error, Result};
use crate::model::{Params, State};

pub const DEFAULT_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extremum {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConfig {
    /// Target width of the extremum enclosure.
    pub tol: f64,
    /// Maximum number of processed boxes.
    pub budget: usize,
}

impl Default for BoundConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundStatus {
    Converged,
    /// Budget exhausted; the enclosure is valid but wider than requested.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub schema_version: u32,
    pub component: Component,
    pub which: Extremum,
    pub region: String,
    pub region_box: IntervalBox,
    /// Contains the true extremum.
    pub enclosure: Interval,
    pub subdivisions: usize,
    pub achieved_width: f64,
    pub tol: f64,
    pub status: BoundStatus,
    /// Sampled point whose value bounds the extremum from the inside.
    pub best_point: State,
    pub best_value: f64,
    pub rounding: String,
}

struct Node {
    ub: f64,
    id: u64,
    bx: IntervalBox,
}

impl PartialEq for Node {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Node {
    fn cmp(&self, o: &Self) -> Ordering {
        // highest bound first, older nodes first on ties
        self.ub.total_cmp(&o.ub).then_with(|| o.id.cmp(&self.id))
    }
}

struct Search<'a> {
    p: &'a Params,
    comp: Component,
    sign: f64,
    best_lb: f64,
    best_point: State,
}

impl Search<'_> {
    /// Enclosure of `sign * F` on a box.
    fn score(&self, bx: &IntervalBox) -> Interval {
        let e = enclose_unchecked(self.p, self.comp, bx);
        if self.sign > 0.0 {
            e
        } else {
            -e
        }
    }

    fn sample(&mut self, bx: &IntervalBox) {
        let m = bx.midpoint();
        let e = natural(self.p, self.comp, &IntervalBox::point(m));
        let lb = if self.sign > 0.0 { e.lo } else { -e.hi };
        if lb > self.best_lb {
            self.best_lb = lb;
            self.best_point = m;
        }
    }

    /// Collapses coordinates along which `sign * F` is monotone on the box.
    fn reduce(&self, bx: &IntervalBox) -> IntervalBox {
        let g = gradient_unchecked(self.p, self.comp, bx);
        let mut out = *bx;
        for (i, gi) in g.iter().enumerate() {
            let axis = bx.axis(i);
            if axis.is_point() {
                continue;
            }
            let gs = if self.sign > 0.0 { *gi } else { -*gi };
            let v = if gi.is_zero() {
                axis.mid()
            } else if gs.lo > 0.0 {
                axis.hi
            } else if gs.hi < 0.0 {
                axis.lo
            } else {
                continue;
            };
            out = out.with_axis(i, Interval::point(v));
        }
        out
    }
}

/// Encloses the minimum or maximum of one component over `region` by
/// best-first branch and bound.
///
/// Boxes are processed in order of their bound; each is first reduced along
/// coordinates of proven monotonicity, then bisected along its widest
/// coordinate (ties: x, y, z). Lower bounds for a maximum come from interval
/// evaluations at box midpoints, so both ends of the reported enclosure are
/// rigorous. Processing order does not depend on `tol`: a run with a smaller
/// tolerance continues the same sequence and reports a sub-enclosure.
pub fn bound_extremum(
    p: &Params,
    region: &IntervalBox,
    region_name: &str,
    component: Component,
    which: Extremum,
    cfg: &BoundConfig,
) -> Result<BoundReport> {
    if !(cfg.tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tol must be positive, got {}",
            cfg.tol
        )));
    }
    check_domain(region)?;
    let sign = match which {
        Extremum::Max => 1.0,
        Extremum::Min => -1.0,
    };
    let mut s = Search {
        p,
        comp: component,
        sign,
        best_lb: f64::NEG_INFINITY,
        best_point: region.midpoint(),
    };
    let mut heap = BinaryHeap::new();
    let mut next_id = 0u64;
    let mut finals_ub = f64::NEG_INFINITY;

    let root = s.score(region);
    s.sample(region);
    if region.is_point() {
        finals_ub = root.hi;
    } else {
        heap.push(Node {
            ub: root.hi,
            id: next_id,
            bx: *region,
        });
        next_id += 1;
    }

    let mut subdivisions = 0usize;
    let status = loop {
        let top = heap
            .peek()
            .map_or(f64::NEG_INFINITY, |n| n.ub)
            .max(finals_ub);
        if top - s.best_lb <= cfg.tol {
            break BoundStatus::Converged;
        }
        if subdivisions >= cfg.budget {
            break BoundStatus::Inconclusive;
        }
        let Some(node) = heap.pop() else {
            break BoundStatus::Inconclusive;
        };
        if node.ub < s.best_lb {
            continue;
        }
        subdivisions += 1;
        let reduced = s.reduce(&node.bx);
        if reduced.is_point() {
            let e = s.score(&reduced);
            s.sample(&reduced);
            finals_ub = finals_ub.max(e.hi.min(node.ub));
            continue;
        }
        let axis = reduced.widest_axis();
        let (a, b) = reduced.bisect(axis);
        if a == reduced || b == reduced {
            // no representable midpoint left
            let e = s.score(&reduced);
            finals_ub = finals_ub.max(e.hi.min(node.ub));
            continue;
        }
        for child in [a, b] {
            let ub = s.score(&child).hi.min(node.ub);
            s.sample(&child);
            if ub >= s.best_lb {
                heap.push(Node {
                    ub,
                    id: next_id,
                    bx: child,
                });
                next_id += 1;
            }
        }
    };

    let top = heap
        .peek()
        .map_or(f64::NEG_INFINITY, |n| n.ub)
        .max(finals_ub);
    let top = top.max(s.best_lb);
    let enclosure = match which {
        Extremum::Max => Interval::new(s.best_lb, top),
        Extremum::Min => Interval::new(-top, -s.best_lb),
    };
    let best_value = match component {
        Component::F1 => p.f1(s.best_point),
        Component::F2 => p.f2(s.best_point),
        Component::F3 => p.f3(s.best_point),
    };
    Ok(BoundReport {
        schema_version: crate::certificate::SCHEMA_VERSION,
        component,
        which,
        region: region_name.to_string(),
        region_box: *region,
        enclosure,
        subdivisions,
        achieved_width: enclosure.width(),
        tol: cfg.tol,
        status,
        best_point: s.best_point,
        best_value,
        rounding: ROUNDING_STRATEGY.to_string(),
    })
}
