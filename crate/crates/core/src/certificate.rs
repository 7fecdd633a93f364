//! Parameter hypotheses on a box and the expansion/contraction conditions
//! they imply, checked either through one- and two-dimensional reductions of
//! the map components (the `analytic` engine) or through interval
//! branch-and-bound (the `interval` engine, see [`crate::bounds`]).
//!
//! Hypotheses (for the box `[x_l,x_r] x [y_l,y_r] x [z_l,z_r]`):
//!
//! * `H1`: `z_l = 0`
//! * `H2`: `x_l+y_l > z_r >= sqrt(alpha/(alpha c3 - 1) (x_l+y_l)) - (x_l+y_l) > 0`
//! * `H3`: `2 (sqrt(alpha/(alpha c3 + 1) (x_r+y_r)) - (x_r+y_r)) > z_r`
//! * `H4`: the bounds on `x` that keep `F1` inside `[x_l, x_r]`
//! * `H5`: the bounds on `y` that keep `F2` inside `[y_l, y_r]`
//!
//! Conditions:
//!
//! * `C1`: `F3 <= z_l` on the bottom face
//! * `C2`: `F3 <= z_l` on the top face
//! * `C3'`: `F3 > z_r` on the midplane `z = (z_l+z_r)/2`
//! * `C4`: `F1(R) ⊆ [x_l, x_r]`
//! * `C5`: `F2(R) ⊆ [y_l, y_r]`

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bounds::{self, BoundConfig, Interval, IntervalBox};
use crate::error::{Error, Result};
use crate::model::{Params, State};

pub const SCHEMA_VERSION: u32 = 1;

/// Default slack demanded of strict inequalities before they count as passed.
pub const DEFAULT_MIN_MARGIN: f64 = 1e-12;

/// Example box with the second coordinate's upper edge corrected to
/// `0.4516666668`.
pub const REFERENCE_BOX: [f64; 6] = [
    0.5766666668,
    0.6316666668,
    0.3366666668,
    0.4516666668,
    0.0,
    0.3951779684,
];

/// The example box exactly as originally printed; `y_r < y_l`, so it is not
/// a valid box.
pub const REFERENCE_BOX_MISPRINT: [f64; 6] = [
    0.5766666668,
    0.6316666668,
    0.3366666668,
    0.04516666668,
    0.0,
    0.3951779684,
];

/// Axis-aligned box `[x_l,x_r] x [y_l,y_r] x [z_l,z_r]` with non-degenerate
/// sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCuboid")]
pub struct Cuboid {
    pub x_l: f64,
    pub x_r: f64,
    pub y_l: f64,
    pub y_r: f64,
    pub z_l: f64,
    pub z_r: f64,
}

#[derive(Deserialize)]
struct RawCuboid {
    x_l: f64,
    x_r: f64,
    y_l: f64,
    y_r: f64,
    z_l: f64,
    z_r: f64,
}

impl TryFrom<RawCuboid> for Cuboid {
    type Error = Error;
    fn try_from(r: RawCuboid) -> Result<Self> {
        Cuboid::new(r.x_l, r.x_r, r.y_l, r.y_r, r.z_l, r.z_r)
    }
}

impl Cuboid {
    pub fn new(x_l: f64, x_r: f64, y_l: f64, y_r: f64, z_l: f64, z_r: f64) -> Result<Self> {
        for (name, lo, hi) in [("x", x_l, x_r), ("y", y_l, y_r), ("z", z_l, z_r)] {
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(Error::InvalidBox(format!("{name} bounds must be finite")));
            }
            if lo >= hi {
                return Err(Error::InvalidBox(format!(
                    "{name}_l = {lo} must be strictly below {name}_r = {hi}"
                )));
            }
        }
        Ok(Self {
            x_l,
            x_r,
            y_l,
            y_r,
            z_l,
            z_r,
        })
    }

    pub fn from_array(a: [f64; 6]) -> Result<Self> {
        Self::new(a[0], a[1], a[2], a[3], a[4], a[5])
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.x_l, self.x_r, self.y_l, self.y_r, self.z_l, self.z_r]
    }

    pub fn reference() -> Self {
        Self::from_array(REFERENCE_BOX).expect("corrected example box is valid")
    }

    pub fn with_z_r(&self, z_r: f64) -> Result<Self> {
        Self::new(self.x_l, self.x_r, self.y_l, self.y_r, self.z_l, z_r)
    }

    /// The same box with the bounds along `axis` replaced.
    pub fn with_axis(&self, axis: usize, lo: f64, hi: f64) -> Result<Self> {
        let mut a = self.to_array();
        a[2 * axis] = lo;
        a[2 * axis + 1] = hi;
        Self::from_array(a)
    }

    pub fn lower(&self, axis: usize) -> f64 {
        [self.x_l, self.y_l, self.z_l][axis]
    }

    pub fn upper(&self, axis: usize) -> f64 {
        [self.x_r, self.y_r, self.z_r][axis]
    }

    pub fn mid(&self, axis: usize) -> f64 {
        0.5 * (self.lower(axis) + self.upper(axis))
    }

    pub fn center(&self) -> State {
        State::new(self.mid(0), self.mid(1), self.mid(2))
    }

    pub fn contains(&self, s: State) -> bool {
        (0..3).all(|i| self.lower(i) <= s.get(i) && s.get(i) <= self.upper(i))
    }

    /// Moves coordinates lying less than `rel` times the side length outside
    /// a face onto that face.
    pub fn snap(&self, s: State, rel: f64) -> State {
        let mut c = s.to_array();
        for (i, v) in c.iter_mut().enumerate() {
            let (lo, hi) = (self.lower(i), self.upper(i));
            let slack = rel * (hi - lo);
            if *v < lo && *v > lo - slack {
                *v = lo;
            } else if *v > hi && *v < hi + slack {
                *v = hi;
            }
        }
        State::from_array(c)
    }

    pub fn to_interval_box(&self) -> IntervalBox {
        IntervalBox::new(
            Interval::new(self.x_l, self.x_r),
            Interval::new(self.y_l, self.y_r),
            Interval::new(self.z_l, self.z_r),
        )
    }

    /// The slice of the box at `value` along `axis`.
    pub fn slice(&self, axis: usize, value: f64) -> IntervalBox {
        self.to_interval_box()
            .with_axis(axis, Interval::point(value))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConditionId {
    H1,
    H2,
    H3,
    H4,
    H5,
    C1,
    C2,
    #[serde(rename = "C3'")]
    C3Prime,
    C4,
    C5,
}

impl ConditionId {
    pub const HYPOTHESES: [ConditionId; 5] = [Self::H1, Self::H2, Self::H3, Self::H4, Self::H5];
    pub const CONDITIONS: [ConditionId; 5] =
        [Self::C1, Self::C2, Self::C3Prime, Self::C4, Self::C5];

    pub fn is_hypothesis(self) -> bool {
        Self::HYPOTHESES.contains(&self)
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::H1 => "H1",
            Self::H2 => "H2",
            Self::H3 => "H3",
            Self::H4 => "H4",
            Self::H5 => "H5",
            Self::C1 => "C1",
            Self::C2 => "C2",
            Self::C3Prime => "C3'",
            Self::C4 => "C4",
            Self::C5 => "C5",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl Relation {
    pub fn is_strict(self) -> bool {
        matches!(self, Self::Lt | Self::Gt)
    }
}

/// One atomic inequality `lhs REL rhs`, evaluated.
///
/// `margin` is the signed distance to violation: `lhs - rhs` for `>`/`>=`,
/// `rhs - lhs` for `<`/`<=`, and `-|lhs - rhs|` for `=`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub label: String,
    pub lhs: f64,
    pub relation: Relation,
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
}

impl Inequality {
    pub fn new(
        label: impl Into<String>,
        lhs: f64,
        relation: Relation,
        rhs: f64,
        min_margin: f64,
    ) -> Self {
        let margin = match relation {
            Relation::Gt | Relation::Ge => lhs - rhs,
            Relation::Lt | Relation::Le => rhs - lhs,
            Relation::Eq => -(lhs - rhs).abs(),
        };
        let holds = match relation {
            Relation::Gt | Relation::Lt => margin > min_margin,
            Relation::Ge | Relation::Le | Relation::Eq => margin >= 0.0,
        };
        Self {
            label: label.into(),
            lhs,
            relation,
            rhs,
            margin,
            holds,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// The evidence could not decide (enclosure straddles the threshold).
    Inconclusive,
    /// The check does not apply: the parameter regime is outside the hypotheses
    /// or a reduction's monotonicity precondition is violated.
    Inapplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    /// Literal evaluation of the hypothesis inequalities.
    Hypothesis,
    Analytic,
    Interval,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Hypothesis => "hypothesis",
            Engine::Analytic => "analytic",
            Engine::Interval => "interval",
        })
    }
}

/// A named extremal value found while establishing a condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extremal {
    pub label: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub at: Option<State>,
    /// Rigorous enclosure of the extremum (interval engine only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub enclosure: Option<Interval>,
}

/// What one engine established about one condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub engine: Engine,
    pub status: Status,
    pub checks: Vec<Inequality>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extrema: Vec<Extremal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Evidence {
    fn from_checks(engine: Engine, checks: Vec<Inequality>) -> Self {
        let status = if checks.iter().all(|c| c.holds) {
            Status::Pass
        } else {
            Status::Fail
        };
        Self {
            engine,
            status,
            checks,
            extrema: Vec::new(),
            note: None,
        }
    }

    fn inapplicable(engine: Engine, note: String) -> Self {
        Self {
            engine,
            status: Status::Inapplicable,
            checks: Vec::new(),
            extrema: Vec::new(),
            note: Some(note),
        }
    }

    /// The check with the smallest margin.
    pub fn binding(&self) -> Option<&Inequality> {
        self.checks
            .iter()
            .min_by(|a, b| a.margin.total_cmp(&b.margin))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionRecord {
    pub id: ConditionId,
    pub status: Status,
    /// Binding inequality of the primary evidence.
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    /// Engines that contributed evidence, joined with `+`.
    pub engine: String,
    pub evidence: Vec<Evidence>,
}

impl ConditionRecord {
    pub fn from_evidence(id: ConditionId, evidence: Vec<Evidence>) -> Self {
        assert!(!evidence.is_empty());
        let statuses: Vec<Status> = evidence.iter().map(|e| e.status).collect();
        let status = if statuses.contains(&Status::Fail) {
            Status::Fail
        } else if statuses.iter().all(|s| *s == Status::Pass) {
            Status::Pass
        } else if statuses.iter().all(|s| *s == Status::Inapplicable) {
            Status::Inapplicable
        } else {
            Status::Inconclusive
        };
        let (lhs, rhs, margin) = evidence
            .iter()
            .find_map(|e| e.binding())
            .map(|b| (b.lhs, b.rhs, b.margin))
            .unwrap_or((f64::NAN, f64::NAN, f64::NAN));
        let engine = evidence
            .iter()
            .map(|e| e.engine.to_string())
            .collect::<Vec<_>>()
            .join("+");
        Self {
            id,
            status,
            lhs,
            rhs,
            margin,
            engine,
            evidence,
        }
    }

    pub fn evidence_from(&self, engine: Engine) -> Option<&Evidence> {
        self.evidence.iter().find(|e| e.engine == engine)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Every hypothesis and condition passed: chaos on two symbols.
    Certified,
    /// At least one hypothesis or condition is violated.
    Falsified,
    Inconclusive,
    /// `alpha c3 <= 1`: the hypotheses do not cover this regime.
    Inapplicable,
}

impl Verdict {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Certified => 0,
            Verdict::Falsified => 1,
            Verdict::Inconclusive | Verdict::Inapplicable => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EngineChoice {
    #[default]
    Analytic,
    Interval,
    Both,
}

impl EngineChoice {
    pub fn analytic(self) -> bool {
        matches!(self, Self::Analytic | Self::Both)
    }
    pub fn interval(self) -> bool {
        matches!(self, Self::Interval | Self::Both)
    }
}

impl std::str::FromStr for EngineChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Self::Analytic),
            "interval" => Ok(Self::Interval),
            "both" => Ok(Self::Both),
            other => Err(Error::InvalidArgument(format!(
                "unknown engine `{other}` (expected analytic|interval|both)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    pub engine: EngineChoice,
    /// Width target for interval extremum enclosures.
    pub tol: f64,
    /// Subdivision budget per extremum query.
    pub budget: usize,
    pub min_margin: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            engine: EngineChoice::Analytic,
            tol: 1e-8,
            budget: bounds::DEFAULT_BUDGET,
            min_margin: DEFAULT_MIN_MARGIN,
        }
    }
}

impl CertifyOptions {
    pub fn with_engine(engine: EngineChoice) -> Self {
        Self {
            engine,
            ..Self::default()
        }
    }

    pub fn bound_config(&self) -> BoundConfig {
        BoundConfig {
            tol: self.tol,
            budget: self.budget,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema_version: u32,
    pub params: Params,
    #[serde(rename = "box")]
    pub cuboid: Cuboid,
    pub options: CertifyOptions,
    pub records: Vec<ConditionRecord>,
    pub verdict: Verdict,
}

impl Certificate {
    pub fn record(&self, id: ConditionId) -> Option<&ConditionRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn verdict_of(records: &[ConditionRecord]) -> Verdict {
    let h2_inapplicable = records
        .iter()
        .any(|r| r.id == ConditionId::H2 && r.status == Status::Inapplicable);
    if h2_inapplicable {
        Verdict::Inapplicable
    } else if records.iter().any(|r| r.status == Status::Fail) {
        Verdict::Falsified
    } else if records.iter().all(|r| r.status == Status::Pass) {
        Verdict::Certified
    } else {
        Verdict::Inconclusive
    }
}

fn psi(c: f64, d: f64) -> f64 {
    (d / c).sqrt() - d
}

/// Evaluates every inequality of the five hypotheses literally.
pub fn check_hypotheses(p: &Params, b: &Cuboid, min_margin: f64) -> Vec<ConditionRecord> {
    use Relation::*;
    let ineq = |label: &str, lhs: f64, rel: Relation, rhs: f64| {
        Inequality::new(label, lhs, rel, rhs, min_margin)
    };
    let h = |id, checks| {
        ConditionRecord::from_evidence(id, vec![Evidence::from_checks(Engine::Hypothesis, checks)])
    };
    let (a, c1, c2, c3) = (p.alpha, p.c1, p.c2, p.c3);
    let s_l = b.x_l + b.y_l;
    let s_r = b.x_r + b.y_r;

    let h1 = h(ConditionId::H1, vec![ineq("z_l = 0", b.z_l, Eq, 0.0)]);

    let h2 = if p.top_face_regime() {
        let g = (a / (a * c3 - 1.0) * s_l).sqrt() - s_l;
        h(
            ConditionId::H2,
            vec![
                ineq("x_l + y_l > z_r", s_l, Gt, b.z_r),
                ineq(
                    "z_r >= sqrt(alpha/(alpha c3 - 1) (x_l+y_l)) - (x_l+y_l)",
                    b.z_r,
                    Ge,
                    g,
                ),
                ineq(
                    "sqrt(alpha/(alpha c3 - 1) (x_l+y_l)) - (x_l+y_l) > 0",
                    g,
                    Gt,
                    0.0,
                ),
            ],
        )
    } else {
        ConditionRecord::from_evidence(
            ConditionId::H2,
            vec![Evidence::inapplicable(
                Engine::Hypothesis,
                format!("alpha c3 = {} <= 1: top-face bound undefined", a * c3),
            )],
        )
    };

    let g3 = 2.0 * ((a / (a * c3 + 1.0) * s_r).sqrt() - s_r);
    let h3 = h(
        ConditionId::H3,
        vec![ineq(
            "2 (sqrt(alpha/(alpha c3 + 1) (x_r+y_r)) - (x_r+y_r)) > z_r",
            g3,
            Gt,
            b.z_r,
        )],
    );

    let bl = b.y_l + b.z_l;
    let br = b.y_r + b.z_r;
    let h4 = h(
        ConditionId::H4,
        vec![
            ineq("1/c1 - x_r > y_r + z_r", 1.0 / c1 - b.x_r, Gt, br),
            ineq(
                "y_r + z_r > 1/(2 c1) - x_l",
                br,
                Gt,
                1.0 / (2.0 * c1) - b.x_l,
            ),
            ineq("1/(2 c1) - x_l > 0", 1.0 / (2.0 * c1) - b.x_l, Gt, 0.0),
            ineq(
                "1/(2 c1) - x_r > y_l + z_l",
                1.0 / (2.0 * c1) - b.x_r,
                Gt,
                bl,
            ),
            ineq("x_r >= 1/(4 c1)", b.x_r, Ge, 1.0 / (4.0 * c1)),
            ineq(
                "(1 - c1 (y_l + y_r + z_l + z_r)) / (2 c1) >= x_l",
                (1.0 - c1 * (bl + br)) / (2.0 * c1),
                Ge,
                b.x_l,
            ),
            ineq("x_l > 0", b.x_l, Gt, 0.0),
            ineq(
                "sqrt((y_l+z_l)/c1) - (y_l+z_l) >= x_l",
                psi(c1, bl),
                Ge,
                b.x_l,
            ),
        ],
    );

    let dl = b.x_l + b.z_l;
    let dr = b.x_r + b.z_r;
    let h5 = h(
        ConditionId::H5,
        vec![
            ineq("x_l + z_l > 1/(4 c2)", dl, Gt, 1.0 / (4.0 * c2)),
            ineq(
                "y_r >= sqrt((x_l+z_l)/c2) - (x_l+z_l)",
                b.y_r,
                Ge,
                psi(c2, dl),
            ),
            ineq("sqrt((x_l+z_l)/c2) - (x_l+z_l) > 0", psi(c2, dl), Gt, 0.0),
            ineq(
                "sqrt((x_r+z_r)/c2) - (x_r+z_r) >= y_l",
                psi(c2, dr),
                Ge,
                b.y_l,
            ),
            ineq("y_l > 0", b.y_l, Gt, 0.0),
        ],
    );

    vec![h1, h2, h3, h4, h5]
}

/// Establishes `C1, C2, C3', C4, C5` through monotonicity reductions.
///
/// `F3` restricted to a horizontal slice `z = c` depends on `A = x + y` only,
/// and `phi(A) = c (1 - alpha c3 + alpha A / (A + c)^2)` decreases on
/// `A > c`; `F1` depends on `(x, B = y + z)` and is handled on the boundary of
/// its domain; `F2` depends on `D = x + z` and `psi(D) = sqrt(D/c2) - D`
/// decreases once `D > 1/(4 c2)`. A violated monotonicity precondition yields
/// an `Inapplicable` record naming it, distinct from a failed condition.
pub fn check_conditions_analytic(p: &Params, b: &Cuboid, min_margin: f64) -> Vec<Evidence> {
    use Relation::*;
    let ineq = |label: &str, lhs: f64, rel: Relation, rhs: f64| {
        Inequality::new(label, lhs, rel, rhs, min_margin)
    };
    let inapplicable = |pre: &str| {
        Evidence::inapplicable(
            Engine::Analytic,
            format!("reduction inapplicable: precondition `{pre}` violated"),
        )
    };
    let with_extrema = |mut e: Evidence, ex: Vec<Extremal>| {
        e.extrema = ex;
        e
    };
    let f3 = |x, y, z| p.f3(State::new(x, y, z));
    let s_l = b.x_l + b.y_l;

    let c1 = if b.z_l == 0.0 {
        // F3 carries a factor z, so the bottom face maps to z = 0 exactly.
        with_extrema(
            Evidence::from_checks(
                Engine::Analytic,
                vec![ineq("max F3 on bottom face <= z_l", 0.0, Le, b.z_l)],
            ),
            vec![Extremal {
                label: "max F3 on bottom face".into(),
                value: 0.0,
                at: None,
                enclosure: None,
            }],
        )
    } else if s_l > b.z_l && b.z_l > 0.0 {
        let at = State::new(b.x_l, b.y_l, b.z_l);
        let v = f3(b.x_l, b.y_l, b.z_l);
        with_extrema(
            Evidence::from_checks(
                Engine::Analytic,
                vec![ineq("F3(x_l, y_l, z_l) <= z_l", v, Le, b.z_l)],
            ),
            vec![Extremal {
                label: "max F3 on bottom face".into(),
                value: v,
                at: Some(at),
                enclosure: None,
            }],
        )
    } else {
        inapplicable("z_l = 0, or x_l + y_l > z_l > 0")
    };

    let c2 = if s_l > b.z_r && b.z_r > 0.0 {
        let v = f3(b.x_l, b.y_l, b.z_r);
        with_extrema(
            Evidence::from_checks(
                Engine::Analytic,
                vec![ineq("F3(x_l, y_l, z_r) <= z_l", v, Le, b.z_l)],
            ),
            vec![Extremal {
                label: "max F3 on top face".into(),
                value: v,
                at: Some(State::new(b.x_l, b.y_l, b.z_r)),
                enclosure: None,
            }],
        )
    } else {
        inapplicable("x_l + y_l > z_r > 0")
    };

    let z_m = b.mid(2);
    let c3 = if s_l > z_m && z_m > 0.0 {
        let v = f3(b.x_r, b.y_r, z_m);
        with_extrema(
            Evidence::from_checks(
                Engine::Analytic,
                vec![ineq("F3(x_r, y_r, (z_l+z_r)/2) > z_r", v, Gt, b.z_r)],
            ),
            vec![Extremal {
                label: "min F3 on midplane".into(),
                value: v,
                at: Some(State::new(b.x_r, b.y_r, z_m)),
                enclosure: None,
            }],
        )
    } else {
        inapplicable("x_l + y_l > (z_l+z_r)/2 > 0")
    };

    let c4 = analytic_c4(p, b, min_margin);
    let c5 = analytic_c5(p, b, min_margin);
    vec![c1, c2, c3, c4, c5]
}

fn analytic_c4(p: &Params, b: &Cuboid, min_margin: f64) -> Evidence {
    use Relation::*;
    let c1 = p.c1;
    let phi = |x: f64, bb: f64| (2.0 * x + bb - c1 * (x + bb) * (x + bb)) / 2.0;
    let (bl, br) = (b.y_l + b.z_l, b.y_r + b.z_r);
    let b_bar = 1.0 / (2.0 * c1) - b.x_l;
    let b_hat = 1.0 / (2.0 * c1) - b.x_r;
    let preconditions = [
        (
            "1/(2 c1) - x_l in [y_l+z_l, y_r+z_r]",
            bl <= b_bar && b_bar <= br,
        ),
        (
            "1/(2 c1) - x_r in [y_l+z_l, y_r+z_r]",
            bl <= b_hat && b_hat <= br,
        ),
        ("1/c1 - (y_l+z_l) > x_r", 1.0 / c1 - bl > b.x_r),
        ("1/c1 - (y_r+z_r) > x_r", 1.0 / c1 - br > b.x_r),
        (
            "x_l <= (1 - c1 (y_l+y_r+z_l+z_r)) / (2 c1)",
            b.x_l <= (1.0 - c1 * (bl + br)) / (2.0 * c1),
        ),
    ];
    if let Some((pre, _)) = preconditions.iter().find(|(_, ok)| !ok) {
        return Evidence::inapplicable(
            Engine::Analytic,
            format!("reduction inapplicable: precondition `{pre}` violated"),
        );
    }
    // Along B = 1/(2 c1) - x the value is (x + 1/(4 c1)) / 2, increasing in x.
    let max = (b.x_r + 1.0 / (4.0 * c1)) / 2.0;
    let min = phi(b.x_l, bl);
    let mut e = Evidence::from_checks(
        Engine::Analytic,
        vec![
            Inequality::new("max F1 <= x_r", max, Le, b.x_r, min_margin),
            Inequality::new("min F1 >= x_l", min, Ge, b.x_l, min_margin),
        ],
    );
    e.extrema = vec![
        Extremal {
            label: "max F1".into(),
            value: max,
            at: Some(State::new(b.x_r, b_hat - b.z_l, b.z_l)),
            enclosure: None,
        },
        Extremal {
            label: "min F1".into(),
            value: min,
            at: Some(State::new(b.x_l, b.y_l, b.z_l)),
            enclosure: None,
        },
    ];
    e
}

fn analytic_c5(p: &Params, b: &Cuboid, min_margin: f64) -> Evidence {
    use Relation::*;
    let (dl, dr) = (b.x_l + b.z_l, b.x_r + b.z_r);
    if !(1.0 / (4.0 * p.c2) < dl) {
        return Evidence::inapplicable(
            Engine::Analytic,
            "reduction inapplicable: precondition `1/(4 c2) < x_l + z_l` violated".into(),
        );
    }
    let max = psi(p.c2, dl);
    let min = psi(p.c2, dr);
    let mut e = Evidence::from_checks(
        Engine::Analytic,
        vec![
            Inequality::new("max F2 <= y_r", max, Le, b.y_r, min_margin),
            Inequality::new("min F2 >= y_l", min, Ge, b.y_l, min_margin),
        ],
    );
    e.extrema = vec![
        Extremal {
            label: "max F2".into(),
            value: max,
            at: Some(State::new(b.x_l, b.y_l, b.z_l)),
            enclosure: None,
        },
        Extremal {
            label: "min F2".into(),
            value: min,
            at: Some(State::new(b.x_r, b.y_l, b.z_r)),
            enclosure: None,
        },
    ];
    e
}

/// Runs the hypothesis checks, then the requested condition engines, and
/// assembles the overall verdict.
pub fn certify_box(p: &Params, b: &Cuboid, opts: &CertifyOptions) -> Certificate {
    let mut records = check_hypotheses(p, b, opts.min_margin);

    let analytic = opts
        .engine
        .analytic()
        .then(|| check_conditions_analytic(p, b, opts.min_margin));
    let interval = opts
        .engine
        .interval()
        .then(|| bounds::verify_conditions(p, b, &opts.bound_config(), opts.min_margin));

    for (k, id) in ConditionId::CONDITIONS.into_iter().enumerate() {
        let mut ev = Vec::new();
        if let Some(a) = &analytic {
            ev.push(a[k].clone());
        }
        if let Some(i) = &interval {
            ev.push(i[k].clone());
        }
        records.push(ConditionRecord::from_evidence(id, ev));
    }
    let verdict = verdict_of(&records);
    Certificate {
        schema_version: SCHEMA_VERSION,
        params: *p,
        cuboid: *b,
        options: *opts,
        records,
        verdict,
    }
}
