//! Exploratory, non-rigorous dynamics: orbits, Lyapunov exponents,
//! equilibrium stability, parameter scans and the logistic-map
//! demonstration of stretching along paths in one dimension.

mod bifurcation;
mod logistic;
mod stability;

pub use bifurcation::{
    bifurcation_scan, BifurcationRow, BifurcationTable, ScanOptions, StartPolicy,
};
pub use logistic::{logistic_sap_demo, LogisticReport, SapCertificate};
pub use stability::{
    classify_eigenvalues, classify_equilibrium, stability_boundary, Classification,
    StabilityReport, DEFAULT_STABILITY_TOL,
};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::certificate::SCHEMA_VERSION;
use crate::error::{Error, Result};
use crate::export::{num, write_row};
use crate::model::{Jacobian, Params, State};

pub const DEFAULT_TRANSIENT: usize = 1_000;
pub const DEFAULT_RECORD: usize = 10_000;

/// Cube `[lo, hi]^3` outside which an orbit counts as escaped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafetyBox {
    pub lo: f64,
    pub hi: f64,
}

impl Default for SafetyBox {
    fn default() -> Self {
        Self {
            lo: -10.0,
            hi: 10.0,
        }
    }
}

impl SafetyBox {
    pub fn contains(&self, s: State) -> bool {
        s.to_array().iter().all(|&v| self.lo <= v && v <= self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EscapeReason {
    SafetyBox,
    Domain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Escape {
    /// Iteration count at which the orbit escaped.
    pub step: usize,
    pub reason: EscapeReason,
    /// Last state before the escape.
    pub last: State,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub schema_version: u32,
    pub params: Params,
    pub initial: State,
    pub transient: usize,
    /// Iterates `transient + 1 ..= transient + n`, truncated at an escape.
    pub states: Vec<State>,
    pub escape: Option<Escape>,
}

impl OrbitRecord {
    pub fn escaped(&self) -> bool {
        self.escape.is_some()
    }

    /// `step,x,y,z` rows, `step` counting from the initial state.
    pub fn write_csv<W: Write + ?Sized>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "step,x,y,z")?;
        for (i, s) in self.states.iter().enumerate() {
            write_row(
                w,
                &[
                    (self.transient + 1 + i).to_string(),
                    num(s.x),
                    num(s.y),
                    num(s.z),
                ],
            )?;
        }
        Ok(())
    }
}

/// Iterates `n + transient` times and keeps the last `n` iterates. Leaving
/// the safety box or the map's domain ends the orbit with an escape record.
pub fn simulate(
    p: &Params,
    s0: State,
    n: usize,
    transient: usize,
    safety: &SafetyBox,
) -> Result<OrbitRecord> {
    p.validate()?;
    if !(s0.x.is_finite() && s0.y.is_finite() && s0.z.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "initial state {s0:?} is not finite"
        )));
    }
    let mut rec = OrbitRecord {
        schema_version: SCHEMA_VERSION,
        params: *p,
        initial: s0,
        transient,
        states: Vec::with_capacity(n),
        escape: None,
    };
    let mut s = s0;
    for step in 1..=transient + n {
        let next = match p.eval(s) {
            Ok(v) => v,
            Err(_) => {
                rec.escape = Some(Escape {
                    step,
                    reason: EscapeReason::Domain,
                    last: s,
                });
                break;
            }
        };
        if !safety.contains(next) {
            rec.escape = Some(Escape {
                step,
                reason: EscapeReason::SafetyBox,
                last: s,
            });
            break;
        }
        s = next;
        if step > transient {
            rec.states.push(s);
        }
    }
    Ok(rec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovReport {
    pub schema_version: u32,
    /// Descending.
    pub exponents: [f64; 3],
    /// Jacobian factors accumulated.
    pub steps: usize,
    /// Set when the orbit escaped before `n` steps; the exponents then
    /// average over the steps taken.
    pub escape: Option<Escape>,
}

impl LyapunovReport {
    pub fn partial(&self) -> bool {
        self.escape.is_some()
    }
}

/// Exponents of the product of a sequence of Jacobians, by repeated QR
/// re-orthonormalization. The first `warmup` factors only align the frame
/// and are not averaged.
pub fn lyapunov_from_jacobians(
    jacs: impl IntoIterator<Item = Jacobian>,
    warmup: usize,
) -> ([f64; 3], usize) {
    let mut q = Jacobian::identity();
    let mut sums = [0.0; 3];
    let mut steps = 0;
    for (i, j) in jacs.into_iter().enumerate() {
        let qr = (j * q).qr();
        let r = qr.r();
        q = qr.q();
        if i < warmup {
            continue;
        }
        for (k, sum) in sums.iter_mut().enumerate() {
            *sum += r[(k, k)].abs().ln();
        }
        steps += 1;
    }
    if steps == 0 {
        return ([f64::NAN; 3], 0);
    }
    let mut ex = sums.map(|v| v / steps as f64);
    ex.sort_by(|a, b| b.total_cmp(a));
    (ex, steps)
}

/// Exponents along the orbit of `s0` over `n` steps after `transient`; the
/// transient steps align the QR frame.
pub fn lyapunov_spectrum(
    p: &Params,
    s0: State,
    n: usize,
    transient: usize,
    safety: &SafetyBox,
) -> Result<LyapunovReport> {
    let mut s = s0;
    let mut escape = None;
    let mut jacs = Vec::with_capacity(transient + n);
    for step in 1..=transient + n {
        let (Ok(j), Ok(next)) = (p.jacobian(s), p.eval(s)) else {
            escape = Some(Escape {
                step,
                reason: EscapeReason::Domain,
                last: s,
            });
            break;
        };
        jacs.push(j);
        if !safety.contains(next) {
            escape = Some(Escape {
                step,
                reason: EscapeReason::SafetyBox,
                last: s,
            });
            break;
        }
        s = next;
    }
    let (exponents, steps) = lyapunov_from_jacobians(jacs, transient);
    Ok(LyapunovReport {
        schema_version: SCHEMA_VERSION,
        exponents,
        steps,
        escape,
    })
}

/// Exponents of the fixed point `s`, with the Jacobian held at `s` so that
/// roundoff cannot push an unstable orbit away.
pub fn lyapunov_at_fixed_point(p: &Params, s: State, n: usize) -> Result<LyapunovReport> {
    let j = p.jacobian(s)?;
    let warmup = 100;
    let (exponents, steps) = lyapunov_from_jacobians(std::iter::repeat_n(j, warmup + n), warmup);
    Ok(LyapunovReport {
        schema_version: SCHEMA_VERSION,
        exponents,
        steps,
        escape: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificate::Cuboid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn nash_orbit_is_constant() {
        let p = Params::reference().with_alpha(1.0).unwrap();
        let nash = p.nash();
        let rec = simulate(&p, nash, 100, 0, &SafetyBox::default()).unwrap();
        assert!(!rec.escaped());
        assert!(rec.states.iter().all(|s| s.sub(nash).max_abs() < 1e-12));
    }

    #[test]
    fn simulate_is_deterministic() {
        let p = Params::reference();
        let s0 = State::new(0.6, 0.4, 0.1);
        let a = simulate(&p, s0, 500, 10, &SafetyBox::default()).unwrap();
        let b = simulate(&p, s0, 500, 10, &SafetyBox::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn escapes_are_recorded() {
        let p = Params::reference();
        let b = Cuboid::reference();
        let rec = simulate(
            &p,
            State::new(b.x_r, b.y_r, b.z_r),
            10_000,
            0,
            &SafetyBox::default(),
        )
        .unwrap();
        let e = rec.escape.expect("corner orbit escapes");
        assert!(e.step >= 1);
        assert_eq!(rec.states.len(), e.step - 1);
        let rec = simulate(&p, State::new(-1.0, 0.0, 0.5), 10, 0, &SafetyBox::default()).unwrap();
        assert_eq!(rec.escape.unwrap().reason, EscapeReason::Domain);
    }

    #[test]
    fn most_reference_orbits_escape() {
        let p = Params::reference();
        let b = Cuboid::reference();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let escaped = (0..100)
            .filter(|_| {
                let s0 = State::new(
                    rng.gen_range(b.x_l..=b.x_r),
                    rng.gen_range(b.y_l..=b.y_r),
                    rng.gen_range(b.z_l..=b.z_r),
                );
                simulate(&p, s0, 10_000, 0, &SafetyBox::default())
                    .unwrap()
                    .escaped()
            })
            .count();
        assert!(escaped > 50, "{escaped}");
    }

    #[test]
    fn fixed_point_exponents_match_eigenvalues() {
        let p = Params::reference();
        let nash = p.nash();
        let rep = lyapunov_at_fixed_point(&p, nash, 2000).unwrap();
        let mut logs: Vec<f64> = p
            .jacobian(nash)
            .unwrap()
            .complex_eigenvalues()
            .iter()
            .map(|c| c.norm().ln())
            .collect();
        logs.sort_by(|a, b| b.total_cmp(a));
        for i in 0..3 {
            assert!(
                (rep.exponents[i] - logs[i]).abs() < 1e-6,
                "{:?} vs {logs:?}",
                rep.exponents
            );
        }
    }

    #[test]
    fn lyapunov_flags_escape() {
        let p = Params::reference();
        let b = Cuboid::reference();
        let rep = lyapunov_spectrum(
            &p,
            State::new(b.x_r, b.y_r, b.z_r),
            10_000,
            0,
            &SafetyBox::default(),
        )
        .unwrap();
        assert!(rep.partial());
        assert!(rep.steps < 10_000);
    }

    #[test]
    fn exploratory_moderate_speeds() {
        // soft: bounded at alpha = 8, chaotic by alpha = 9 for these costs
        let base = Params::reference();
        let p = base.with_alpha(8.0).unwrap();
        let n = p.nash();
        let s0 = State::new(n.x + 1e-3, n.y, n.z);
        assert!(!simulate(&p, s0, 100_000, 0, &SafetyBox::default())
            .unwrap()
            .escaped());
        let p = base.with_alpha(9.0).unwrap();
        let n = p.nash();
        let s0 = State::new(n.x + 1e-3, n.y, n.z);
        let a = lyapunov_spectrum(&p, s0, 20_000, 1000, &SafetyBox::default()).unwrap();
        let b = lyapunov_spectrum(&p, s0, 40_000, 1000, &SafetyBox::default()).unwrap();
        assert!(!a.partial() && a.exponents[0] > 0.0, "{:?}", a.exponents);
        assert!((a.exponents[0] - b.exponents[0]).abs() < 0.1 * b.exponents[0].abs());
    }

    #[test]
    fn orbit_csv_has_header_and_rows() {
        let p = Params::reference().with_alpha(1.0).unwrap();
        let rec = simulate(&p, State::new(0.6, 0.4, 0.1), 3, 2, &SafetyBox::default()).unwrap();
        let mut buf = Vec::new();
        rec.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "step,x,y,z");
        assert!(lines[1].starts_with("3,"));
    }
}
