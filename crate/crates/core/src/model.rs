//! The triopoly map with its Jacobian and closed-form fixed points.
//!
//! Three firms produce a homogeneous good under the isoelastic inverse demand
//! `p = 1 / (x + y + z)`. Firm 1 uses a local linear approximation of demand,
//! firm 2 plays a best response, and firm 3 adjusts its output along the sign
//! of its marginal profit with speed `alpha`. Under naive expectations the
//! outputs evolve by `s_{t+1} = F(s_t)` with
//!
//! ```text
//! F1 = (2x + y + z - c1 (x+y+z)^2) / 2
//! F2 = sqrt((x+z) / c2) - x - z
//! F3 = z (1 - alpha c3 + alpha (x+y) / (x+y+z)^2)
//! ```

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Jacobian = Matrix3<f64>;

/// Model constants: marginal costs of the three firms and the adjustment
/// speed of firm 3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub alpha: f64,
}

impl Params {
    pub fn new(c1: f64, c2: f64, c3: f64, alpha: f64) -> Result<Self> {
        let p = Self { c1, c2, c3, alpha };
        p.validate()?;
        Ok(p)
    }

    /// `c1 = 0.4, c2 = 0.55, c3 = 0.6, alpha = 17`.
    pub fn reference() -> Self {
        Self {
            c1: 0.4,
            c2: 0.55,
            c3: 0.6,
            alpha: 17.0,
        }
    }

    pub fn with_alpha(self, alpha: f64) -> Result<Self> {
        Self::new(self.c1, self.c2, self.c3, alpha)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c1", self.c1),
            ("c2", self.c2),
            ("c3", self.c3),
            ("alpha", self.alpha),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite and strictly positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Whether `alpha * c3 > 1`, which the top-face hypothesis needs for its
    /// square root to be real.
    pub fn top_face_regime(&self) -> bool {
        self.alpha * self.c3 > 1.0
    }

    pub fn eval(&self, s: State) -> Result<State> {
        check_domain(s)?;
        Ok(State::new(self.f1(s), self.f2(s), self.f3(s)))
    }

    /// Unchecked component evaluations; callers guarantee the domain.
    pub fn f1(&self, s: State) -> f64 {
        let q = s.x + s.y + s.z;
        (2.0 * s.x + s.y + s.z - self.c1 * q * q) / 2.0
    }

    pub fn f2(&self, s: State) -> f64 {
        let d = s.x + s.z;
        (d / self.c2).sqrt() - d
    }

    /// Factored form: a zero third coordinate maps to exactly zero.
    pub fn f3(&self, s: State) -> f64 {
        let a = s.x + s.y;
        let q = a + s.z;
        s.z * (1.0 - self.alpha * self.c3 + self.alpha * a / (q * q))
    }

    pub fn jacobian(&self, s: State) -> Result<Jacobian> {
        check_domain(s)?;
        let (x, y, z) = (s.x, s.y, s.z);
        let a = x + y;
        let q = a + z;
        let q3 = q * q * q;
        let d1 = 1.0 - self.c1 * q;
        let d1yz = 0.5 - self.c1 * q;
        let d2 = 1.0 / (2.0 * (self.c2 * (x + z)).sqrt()) - 1.0;
        // Q - 2(x+y) = z - a and Q - 2z = a - z
        let d3xy = self.alpha * z * (z - a) / q3;
        let d3z = 1.0 - self.alpha * self.c3 + self.alpha * a * (a - z) / q3;
        Ok(Matrix3::new(
            d1, d1yz, d1yz, //
            d2, 0.0, d2, //
            d3xy, d3xy, d3z,
        ))
    }

    /// The interior Nash equilibrium and the `z = 0` boundary equilibrium.
    ///
    /// With `Q = 2 / (c1 + c2 + c3)` the interior point is
    /// `(Q - c1 Q^2, Q - c2 Q^2, Q - c3 Q^2)`; on the invariant plane `z = 0`
    /// the duopoly equilibrium is `(c2, c1, 0) / (c1 + c2)^2`.
    pub fn fixed_points(&self) -> Vec<FixedPoint> {
        let q = 2.0 / (self.c1 + self.c2 + self.c3);
        let interior = State::new(
            q - self.c1 * q * q,
            q - self.c2 * q * q,
            q - self.c3 * q * q,
        );
        let qb = 1.0 / (self.c1 + self.c2);
        let boundary = State::new(self.c2 * qb * qb, self.c1 * qb * qb, 0.0);
        [
            (interior, FixedPointKind::Interior),
            (boundary, FixedPointKind::Boundary),
        ]
        .into_iter()
        .map(|(state, kind)| {
            let residual = self
                .eval(state)
                .map(|img| img.sub(state).max_abs())
                .unwrap_or(f64::INFINITY);
            let positive = match kind {
                FixedPointKind::Interior => state.x > 0.0 && state.y > 0.0 && state.z > 0.0,
                _ => state.x > 0.0 && state.y > 0.0 && state.z >= 0.0,
            };
            FixedPoint {
                state,
                kind,
                residual,
                positive,
            }
        })
        .collect()
    }

    pub fn nash(&self) -> State {
        self.fixed_points()[0].state
    }

    /// `F^k(s)` together with the chained Jacobian `DF^k(s)`.
    pub fn iterate_with_jacobian(&self, s: State, k: usize) -> Result<(State, Jacobian)> {
        let mut cur = s;
        let mut jac = Jacobian::identity();
        for _ in 0..k {
            jac = self.jacobian(cur)? * jac;
            cur = self.eval(cur)?;
        }
        Ok((cur, jac))
    }
}

fn check_domain(s: State) -> Result<()> {
    if !(s.x.is_finite() && s.y.is_finite() && s.z.is_finite()) {
        return Err(Error::Domain(format!("non-finite state {s:?}")));
    }
    if s.x + s.z <= 0.0 {
        return Err(Error::Domain(format!(
            "x + z = {} must be positive",
            s.x + s.z
        )));
    }
    if s.x + s.y + s.z <= 0.0 {
        return Err(Error::Domain(format!(
            "x + y + z = {} must be positive",
            s.x + s.y + s.z
        )));
    }
    Ok(())
}

/// Outputs of the three firms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl State {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn get(self, axis: usize) -> f64 {
        self.to_array()[axis]
    }

    /// Componentwise difference.
    #[allow(clippy::should_implement_trait)]
    pub fn sub(self, o: State) -> State {
        State::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }

    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn in_domain(self) -> bool {
        check_domain(self).is_ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointKind {
    Interior,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub state: State,
    pub kind: FixedPointKind,
    /// `max_i |F_i(s) - s_i|`.
    pub residual: f64,
    pub positive: bool,
}
