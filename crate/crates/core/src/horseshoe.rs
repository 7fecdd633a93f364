//! Oriented boxes with their compact sets `K0`, `K1`, and stretching along
//! sampled paths.
//!
//! The box `R` is oriented along one axis (default `z`): its left face is the
//! slice at the lower bound, its right face the slice at the upper bound. The
//! midplane `S` splits `R` into the half-boxes `R0` (lower) and `R1` (upper).
//! `K_i` is the set of points of `R_i` whose image lies in `R`.

use std::io::Write;

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    bound_extremum, enclose, BoundConfig, BoundReport, Component, Extremum, Interval, IntervalBox,
};
use crate::certificate::{certify_box, CertifyOptions, Cuboid, EngineChoice, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::export::{num, write_row};
use crate::model::{Params, State};

/// A box with a distinguished pair of opposite faces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedBox {
    #[serde(rename = "box")]
    pub cuboid: Cuboid,
    /// 0, 1 or 2 for x, y, z.
    pub axis: usize,
}

impl OrientedBox {
    /// Oriented along `z`.
    pub fn new(cuboid: Cuboid) -> Self {
        Self { cuboid, axis: 2 }
    }

    pub fn with_axis(cuboid: Cuboid, axis: usize) -> Result<Self> {
        if axis > 2 {
            return Err(Error::InvalidArgument(format!(
                "axis must be 0, 1 or 2, got {axis}"
            )));
        }
        Ok(Self { cuboid, axis })
    }

    pub fn left_face(&self) -> IntervalBox {
        self.cuboid.slice(self.axis, self.cuboid.lower(self.axis))
    }

    pub fn right_face(&self) -> IntervalBox {
        self.cuboid.slice(self.axis, self.cuboid.upper(self.axis))
    }

    /// Coordinate of the midplane `S` along the orientation axis.
    pub fn midplane(&self) -> f64 {
        self.cuboid.mid(self.axis)
    }

    pub fn halves(&self) -> HalfBoxes {
        let (lo, hi, m) = (
            self.cuboid.lower(self.axis),
            self.cuboid.upper(self.axis),
            self.midplane(),
        );
        HalfBoxes {
            r0: self
                .cuboid
                .with_axis(self.axis, lo, m)
                .expect("lower half is non-degenerate"),
            r1: self
                .cuboid
                .with_axis(self.axis, m, hi)
                .expect("upper half is non-degenerate"),
            s: self.cuboid.slice(self.axis, m),
        }
    }

    /// Half-box index of a point of `R`: 0 below the midplane, 1 on or above
    /// it. `None` outside `R`.
    pub fn symbol(&self, s: State) -> Option<u8> {
        if !self.cuboid.contains(s) {
            return None;
        }
        Some(u8::from(s.get(self.axis) >= self.midplane()))
    }
}

/// `R0 ∪ R1 = R`, `R0 ∩ R1 = S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfBoxes {
    pub r0: Cuboid,
    pub r1: Cuboid,
    pub s: IntervalBox,
}

impl HalfBoxes {
    pub fn get(&self, index: usize) -> &Cuboid {
        if index == 0 {
            &self.r0
        } else {
            &self.r1
        }
    }
}

fn require_certified(p: &Params, ob: &OrientedBox) -> Result<()> {
    let cert = certify_box(
        p,
        &ob.cuboid,
        &CertifyOptions::with_engine(EngineChoice::Analytic),
    );
    if !cert.is_certified() {
        let failed: Vec<String> = cert
            .records
            .iter()
            .filter(|r| r.status != crate::certificate::Status::Pass)
            .map(|r| r.id.to_string())
            .collect();
        return Err(Error::Precondition(format!(
            "box is not certified (verdict {:?}; not passed: {})",
            cert.verdict,
            failed.join(", ")
        )));
    }
    Ok(())
}

fn check_index(index: usize) -> Result<()> {
    if index > 1 {
        return Err(Error::InvalidArgument(format!(
            "half-box index must be 0 or 1, got {index}"
        )));
    }
    Ok(())
}

/// Grid cells of `R_index` that may contain points mapped into `R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSetEnclosure {
    pub schema_version: u32,
    pub index: usize,
    pub resolution: usize,
    /// Ordered by grid index (axis layer outermost, then x, y, z).
    pub cells: Vec<IntervalBox>,
}

impl KSetEnclosure {
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn contains(&self, s: State) -> bool {
        self.cells.iter().any(|c| c.contains(s))
    }

    pub fn hull(&self) -> Option<IntervalBox> {
        self.cells.iter().copied().reduce(|a, b| a.hull(&b))
    }

    /// Whether any cell of `self` meets any cell of `other`.
    pub fn intersects(&self, other: &KSetEnclosure) -> bool {
        let (Some(ha), Some(hb)) = (self.hull(), other.hull()) else {
            return false;
        };
        let a: Vec<&IntervalBox> = self.cells.iter().filter(|c| c.intersects(&hb)).collect();
        let b: Vec<&IntervalBox> = other.cells.iter().filter(|c| c.intersects(&ha)).collect();
        a.par_iter().any(|ca| b.iter().any(|cb| ca.intersects(cb)))
    }

    pub fn write_csv<W: Write + ?Sized>(&self, w: &mut W, header: bool) -> Result<()> {
        if header {
            writeln!(w, "index,cell,x_lo,x_hi,y_lo,y_hi,z_lo,z_hi")?;
        }
        for (k, c) in self.cells.iter().enumerate() {
            let mut row = vec![self.index.to_string(), k.to_string()];
            for iv in c.axes() {
                row.push(num(iv.lo));
                row.push(num(iv.hi));
            }
            write_row(w, &row)?;
        }
        Ok(())
    }
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| {
            if i == n {
                hi
            } else {
                lo + (hi - lo) * (i as f64) / (n as f64)
            }
        })
        .collect()
}

/// Bisection depth used to decide whether a grid cell's image may meet `R`.
pub const CELL_REFINE_DEPTH: u32 = 12;

/// Whether the image of some part of `cell` may meet `target`: false only if
/// every sub-box down to `depth` bisections has an image enclosure missing it.
fn image_meets(p: &Params, cell: &IntervalBox, target: &IntervalBox, depth: u32) -> bool {
    let mut inside = true;
    for c in Component::ALL {
        let Ok(e) = enclose(p, c, cell) else {
            inside = false;
            continue;
        };
        let t = target.axis(c.index());
        if !e.intersects(t) {
            return false;
        }
        inside &= e.subset_of(t);
    }
    if inside || depth == 0 {
        return true;
    }
    let (a, b) = cell.bisect(cell.widest_axis());
    if a == *cell || b == *cell {
        return true;
    }
    image_meets(p, &a, target, depth - 1) || image_meets(p, &b, target, depth - 1)
}

/// Covers of `K0` and `K1`.
///
/// Each half-box is split into `resolution` cells along the two free axes and
/// `ceil(resolution / 2)` layers along the orientation axis; a cell is kept
/// unless bisecting it [`CELL_REFINE_DEPTH`] times proves its image misses
/// `R`. Every point of `K_i` lies in a
/// kept cell.
pub fn build_k_enclosures(
    p: &Params,
    ob: &OrientedBox,
    resolution: usize,
) -> Result<(KSetEnclosure, KSetEnclosure)> {
    if resolution < 2 {
        return Err(Error::InvalidArgument(format!(
            "resolution must be at least 2, got {resolution}"
        )));
    }
    require_certified(p, ob)?;
    let halves = ob.halves();
    let target = ob.cuboid.to_interval_box();
    let layers = resolution.div_ceil(2);
    let build = |index: usize| -> KSetEnclosure {
        let half = halves.get(index);
        let ticks: Vec<Vec<f64>> = (0..3)
            .map(|a| {
                let n = if a == ob.axis { layers } else { resolution };
                grid(half.lower(a), half.upper(a), n)
            })
            .collect();
        let free: Vec<usize> = (0..3).filter(|&a| a != ob.axis).collect();
        let mut order = vec![ob.axis];
        order.extend(&free);
        let counts: Vec<usize> = order.iter().map(|&a| ticks[a].len() - 1).collect();
        let total = counts.iter().product::<usize>();
        let cells: Vec<IntervalBox> = (0..total)
            .into_par_iter()
            .filter_map(|k| {
                let i2 = k % counts[2];
                let i1 = (k / counts[2]) % counts[1];
                let i0 = k / (counts[1] * counts[2]);
                let mut ax = [Interval::point(0.0); 3];
                for (slot, &a) in [i0, i1, i2].iter().zip(&order) {
                    ax[a] = Interval::new(ticks[a][*slot], ticks[a][*slot + 1]);
                }
                let cell = IntervalBox::from_axes(ax);
                image_meets(p, &cell, &target, CELL_REFINE_DEPTH).then_some(cell)
            })
            .collect();
        KSetEnclosure {
            schema_version: SCHEMA_VERSION,
            index,
            resolution,
            cells,
        }
    };
    Ok((build(0), build(1)))
}

/// Rigorous evidence that `F(S)` misses `R`: one component of `F` is
/// bounded away from the box over the whole midplane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MidplaneCheck {
    pub schema_version: u32,
    pub misses: bool,
    /// Bound separating the image from `R`, or the last bound tried.
    pub bound: Option<BoundReport>,
}

/// Bounds each component of `F` over the midplane, orientation component
/// first, and stops at the first one whose enclosure clears `R`.
pub fn midplane_image_misses(
    p: &Params,
    ob: &OrientedBox,
    cfg: &BoundConfig,
) -> Result<MidplaneCheck> {
    let s = ob.halves().s;
    let b = &ob.cuboid;
    let mut order = vec![Component::ALL[ob.axis]];
    order.extend(Component::ALL.into_iter().filter(|c| c.index() != ob.axis));
    let mut last = None;
    for c in order {
        let i = c.index();
        let lo = bound_extremum(p, &s, "S", c, Extremum::Min, cfg)?;
        if lo.enclosure.lo > b.upper(i) {
            return Ok(MidplaneCheck {
                schema_version: SCHEMA_VERSION,
                misses: true,
                bound: Some(lo),
            });
        }
        let hi = bound_extremum(p, &s, "S", c, Extremum::Max, cfg)?;
        if hi.enclosure.hi < b.lower(i) {
            return Ok(MidplaneCheck {
                schema_version: SCHEMA_VERSION,
                misses: true,
                bound: Some(hi),
            });
        }
        last = Some(lo);
    }
    Ok(MidplaneCheck {
        schema_version: SCHEMA_VERSION,
        misses: false,
        bound: last,
    })
}

/// Piecewise-linear path `t ↦ γ(t)` through the samples `(t_i, γ(t_i))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub ts: Vec<f64>,
    pub points: Vec<State>,
}

impl PathSample {
    pub fn new(ts: Vec<f64>, points: Vec<State>) -> Result<Self> {
        if ts.len() != points.len() || ts.len() < 2 {
            return Err(Error::InvalidArgument(
                "a path needs at least two samples and one parameter per sample".into(),
            ));
        }
        if ts[0] != 0.0 || ts[ts.len() - 1] != 1.0 || ts.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument(
                "path parameters must increase strictly from 0 to 1".into(),
            ));
        }
        Ok(Self { ts, points })
    }

    /// Vertices at equally spaced parameters.
    pub fn polyline(points: Vec<State>) -> Result<Self> {
        let n = points.len().saturating_sub(1).max(1);
        let ts = grid(0.0, 1.0, n);
        Self::new(ts, points)
    }

    pub fn segment(a: State, b: State) -> Self {
        Self::polyline(vec![a, b]).expect("two samples")
    }

    /// Polyline from a uniform point of the left face through `interior`
    /// uniform points of `R` to a uniform point of the right face.
    pub fn random_joining<G: Rng + ?Sized>(ob: &OrientedBox, interior: usize, rng: &mut G) -> Self {
        let b = &ob.cuboid;
        let mut draw = |pin: Option<f64>| {
            let mut v: [f64; 3] = std::array::from_fn(|i| rng.gen_range(b.lower(i)..=b.upper(i)));
            if let Some(c) = pin {
                v[ob.axis] = c;
            }
            State::from_array(v)
        };
        let mut pts = vec![draw(Some(b.lower(ob.axis)))];
        pts.extend((0..interior).map(|_| draw(None)));
        pts.push(draw(Some(b.upper(ob.axis))));
        Self::polyline(pts).expect("at least two samples")
    }

    pub fn at(&self, t: f64) -> State {
        let j = self
            .ts
            .partition_point(|&u| u <= t)
            .clamp(1, self.ts.len() - 1);
        let (t0, t1) = (self.ts[j - 1], self.ts[j]);
        let (a, b) = (self.points[j - 1], self.points[j]);
        let u = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        State::new(
            a.x + u * (b.x - a.x),
            a.y + u * (b.y - a.y),
            a.z + u * (b.z - a.z),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StretchOptions {
    /// Largest allowed max-norm distance between images of consecutive
    /// samples after refinement.
    pub max_step: f64,
    pub max_samples: usize,
    /// Width at which crossing bisection stops.
    pub bisect_tol: f64,
}

impl Default for StretchOptions {
    fn default() -> Self {
        Self {
            max_step: 1e-3,
            max_samples: 1 << 20,
            bisect_tol: 1e-13,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceKind {
    /// Observed on the sampled path only.
    SampledWitness,
}

/// A parameter interval on which the image's axis coordinate runs from one
/// face of the target to the other.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub t_start: f64,
    pub t_end: f64,
    pub image_start: State,
    pub image_end: State,
    /// Whether all sampled images on `[t_start, t_end]` lie in `R`.
    pub images_in_box: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StretchReport {
    pub schema_version: u32,
    pub axis: usize,
    pub samples: usize,
    /// First and last parameters at which the path meets the midplane.
    pub midplane_hits: (f64, f64),
    pub crossings: Vec<Crossing>,
    pub disjoint: bool,
    pub evidence: EvidenceKind,
    /// The box passed the analytic certificate, which makes the stretching
    /// hold for every path joining the faces.
    pub certified_for_all_paths: bool,
}

impl StretchReport {
    /// Two disjoint crossings with images inside `R`.
    pub fn stretches(&self) -> bool {
        self.crossings.len() == 2 && self.disjoint && self.crossings.iter().all(|c| c.images_in_box)
    }
}

struct Walker<'a> {
    p: &'a Params,
    path: &'a PathSample,
    axis: usize,
}

impl Walker<'_> {
    fn image(&self, t: f64) -> Result<State> {
        self.p.eval(self.path.at(t))
    }

    fn g(&self, t: f64) -> Result<f64> {
        Ok(self.image(t)?.get(self.axis))
    }

    /// Bisects `[lo, hi]` where `pred(lo)` is false and `pred(hi)` is true;
    /// returns the final bracket.
    fn bisect(
        &self,
        mut lo: f64,
        mut hi: f64,
        tol: f64,
        pred: impl Fn(f64) -> Result<bool>,
    ) -> Result<(f64, f64)> {
        while hi - lo > tol {
            let m = 0.5 * (lo + hi);
            if m <= lo || m >= hi {
                break;
            }
            if pred(m)? {
                hi = m;
            } else {
                lo = m;
            }
        }
        Ok((lo, hi))
    }
}

fn refine(p: &Params, path: &PathSample, opts: &StretchOptions) -> Result<(Vec<f64>, Vec<State>)> {
    let mut ts = vec![0.0];
    let mut imgs = vec![p.eval(path.at(0.0))?];
    let mut stack: Vec<(f64, State)> = path.ts[1..]
        .iter()
        .rev()
        .map(|&t| Ok((t, p.eval(path.at(t))?)))
        .collect::<Result<_>>()?;
    while let Some((t, img)) = stack.pop() {
        let (t0, img0) = (*ts.last().unwrap(), *imgs.last().unwrap());
        if img.sub(img0).max_abs() <= opts.max_step {
            ts.push(t);
            imgs.push(img);
            continue;
        }
        let m = 0.5 * (t0 + t);
        if m <= t0 || m >= t || ts.len() + stack.len() >= opts.max_samples {
            return Err(Error::Refinement(format!(
                "images at t = {t0} and t = {t} are {} apart; use a finer path or a larger step",
                img.sub(img0).max_abs()
            )));
        }
        stack.push((t, img));
        stack.push((m, p.eval(path.at(m))?));
    }
    Ok((ts, imgs))
}

/// Finds two disjoint parameter intervals, one before the first and one
/// after the last midplane hit, on which the image crosses `R` between its
/// oriented faces.
///
/// The path must join the left and right faces of `ob` inside `R`.
pub fn check_path_stretching(
    p: &Params,
    ob: &OrientedBox,
    path: &PathSample,
    opts: &StretchOptions,
) -> Result<StretchReport> {
    let b = &ob.cuboid;
    let axis = ob.axis;
    let (lo, hi, m) = (b.lower(axis), b.upper(axis), ob.midplane());
    if let Some(s) = path.points.iter().find(|s| !b.contains(**s)) {
        return Err(Error::Precondition(format!("path leaves the box at {s:?}")));
    }
    let start = path.points[0].get(axis);
    let end = path.points[path.points.len() - 1].get(axis);
    let joins = (start == lo && end == hi) || (start == hi && end == lo);
    if !joins {
        return Err(Error::Precondition(format!(
            "path endpoints must lie on opposite faces (axis coordinates {start} and {end})"
        )));
    }
    require_certified(p, ob)?;

    let (ts, imgs) = refine(p, path, opts)?;
    let w = Walker { p, path, axis };
    let side = |t: f64| path.at(t).get(axis) >= m;
    let start_side = side(0.0);
    let n = ts.len();
    let first_cross = (1..n)
        .find(|&j| side(ts[j]) != start_side)
        .expect("endpoints straddle S");
    let last_cross = (1..n)
        .rev()
        .find(|&j| side(ts[j - 1]) != side(ts[n - 1]))
        .expect("endpoints straddle S");
    let t_star = w
        .bisect(ts[first_cross - 1], ts[first_cross], opts.bisect_tol, |t| {
            Ok(side(t) != start_side)
        })?
        .1;
    let t_star2 = w
        .bisect(ts[last_cross - 1], ts[last_cross], opts.bisect_tol, |t| {
            Ok(side(t) == side(1.0))
        })?
        .1;

    let above = |t: f64| -> Result<bool> { Ok(w.g(t)? >= hi) };
    let below = |t: f64| -> Result<bool> { Ok(w.g(t)? <= lo) };
    let in_box = |img: &State| {
        (0..3)
            .filter(|&a| a != axis)
            .all(|a| b.lower(a) <= img.get(a) && img.get(a) <= b.upper(a))
    };
    let mut crossings = Vec::new();
    let mut push = |t_start: f64, t_end: f64, seg: &[(f64, State)]| -> Result<()> {
        crossings.push(Crossing {
            t_start,
            t_end,
            image_start: w.image(t_start)?,
            image_end: w.image(t_end)?,
            images_in_box: seg.iter().all(|(_, img)| in_box(img)),
        });
        Ok(())
    };

    // before t*: last image below the box preceding the first one above it
    let mut pre: Vec<(f64, State)> = (0..n)
        .filter(|&j| ts[j] < t_star)
        .map(|j| (ts[j], imgs[j]))
        .collect();
    pre.push((t_star, w.image(t_star)?));
    if let Some(k_hi) = pre.iter().position(|(_, img)| img.get(axis) >= hi) {
        if let Some(k_lo) = pre[..k_hi].iter().rposition(|(_, img)| img.get(axis) <= lo) {
            let t_start = w
                .bisect(pre[k_lo].0, pre[k_lo + 1].0, opts.bisect_tol, |t| {
                    Ok(!below(t)?)
                })?
                .0;
            let t_end = w
                .bisect(pre[k_hi - 1].0, pre[k_hi].0, opts.bisect_tol, above)?
                .1;
            push(t_start, t_end, &pre[k_lo..=k_hi])?;
        }
    }

    // after t**: last image above the box preceding the first one below it
    let mut post: Vec<(f64, State)> = vec![(t_star2, w.image(t_star2)?)];
    post.extend(
        (0..n)
            .filter(|&j| ts[j] > t_star2)
            .map(|j| (ts[j], imgs[j])),
    );
    if let Some(k_lo) = post.iter().position(|(_, img)| img.get(axis) <= lo) {
        if let Some(k_hi) = post[..k_lo]
            .iter()
            .rposition(|(_, img)| img.get(axis) >= hi)
        {
            let t_start = w
                .bisect(post[k_hi].0, post[k_hi + 1].0, opts.bisect_tol, |t| {
                    Ok(!above(t)?)
                })?
                .0;
            let t_end = w
                .bisect(post[k_lo - 1].0, post[k_lo].0, opts.bisect_tol, below)?
                .1;
            push(t_start, t_end, &post[k_hi..=k_lo])?;
        }
    }

    let disjoint = crossings.len() == 2 && crossings[0].t_end < crossings[1].t_start;
    Ok(StretchReport {
        schema_version: SCHEMA_VERSION,
        axis,
        samples: n,
        midplane_hits: (t_star, t_star2),
        crossings,
        disjoint,
        evidence: EvidenceKind::SampledWitness,
        certified_for_all_paths: axis == 2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointSearch {
    pub index: usize,
    pub state: State,
    /// `max_i |F_i(s) - s_i|`.
    pub residual: f64,
    pub converged: bool,
    pub starts: usize,
}

fn newton_fixed_point(p: &Params, s0: State, max_iter: usize) -> Option<(State, f64)> {
    let resid = |s: State| p.eval(s).ok().map(|f| f.sub(s));
    let mut s = s0;
    let mut r = resid(s)?;
    for _ in 0..max_iter {
        if r.max_abs() < 1e-14 {
            break;
        }
        let j = p.jacobian(s).ok()? - Matrix3::identity();
        let step = j.lu().solve(&-Vector3::new(r.x, r.y, r.z))?;
        let mut lambda = 1.0;
        loop {
            let cand = State::new(
                s.x + lambda * step[0],
                s.y + lambda * step[1],
                s.z + lambda * step[2],
            );
            if let Some(rc) = resid(cand) {
                if rc.max_abs() < r.max_abs() || lambda < 1e-6 {
                    s = cand;
                    r = rc;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-6 {
                return Some((s, r.max_abs()));
            }
        }
    }
    Some((s, r.max_abs()))
}

/// A fixed point of the map in `R_index`, by damped Newton from a grid of
/// starts in the half-box.
pub fn locate_fixed_point_in(
    p: &Params,
    ob: &OrientedBox,
    index: usize,
) -> Result<FixedPointSearch> {
    check_index(index)?;
    require_certified(p, ob)?;
    let half = *ob.halves().get(index);
    let counts = [4usize, 4, 8];
    let mut best: Option<FixedPointSearch> = None;
    let mut starts = 0;
    for i in 0..counts[0] {
        for j in 0..counts[1] {
            for k in 0..counts[2] {
                let frac = |a: usize, n: usize| (a as f64 + 0.5) / n as f64;
                let s0 = State::new(
                    half.x_l + frac(i, counts[0]) * (half.x_r - half.x_l),
                    half.y_l + frac(j, counts[1]) * (half.y_r - half.y_l),
                    half.z_l + frac(k, counts[2]) * (half.z_r - half.z_l),
                );
                starts += 1;
                let Some((s, _)) = newton_fixed_point(p, s0, 60) else {
                    continue;
                };
                // roundoff may leave a converged point just outside a face
                let s = half.snap(s, 1e-12);
                let Ok(img) = p.eval(s) else {
                    continue;
                };
                let res = img.sub(s).max_abs();
                let inside = half.contains(s);
                let cand = FixedPointSearch {
                    index,
                    state: s,
                    residual: res,
                    converged: inside && res < 1e-10,
                    starts,
                };
                if cand.converged {
                    return Ok(cand);
                }
                if inside && best.is_none_or(|b| res < b.residual) {
                    best = Some(cand);
                }
            }
        }
    }
    Ok(best.map_or(
        FixedPointSearch {
            index,
            state: half.center(),
            residual: f64::INFINITY,
            converged: false,
            starts,
        },
        |b| FixedPointSearch { starts, ..b },
    ))
}
