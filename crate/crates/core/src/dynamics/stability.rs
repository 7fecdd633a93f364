use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Params, State};

/// Half-width of the window around modulus 1 in which an eigenvalue counts
/// as critical.
pub const DEFAULT_STABILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Stable,
    /// A real eigenvalue at -1.
    FlipCritical,
    /// A complex pair on the unit circle.
    NeimarkSackerCritical,
    /// A real eigenvalue at +1.
    FoldCritical,
    Unstable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub params: Params,
    pub fixed_point: State,
    /// `(re, im)` pairs.
    pub eigenvalues: Vec<(f64, f64)>,
    pub moduli: [f64; 3],
    pub classification: Classification,
    pub tol: f64,
}

pub fn classify_eigenvalues(eigs: &[Complex<f64>], tol: f64) -> Classification {
    let is_real = |c: &Complex<f64>| c.im.abs() <= tol;
    if eigs.iter().any(|c| is_real(c) && (c.re + 1.0).abs() <= tol) {
        return Classification::FlipCritical;
    }
    if eigs
        .iter()
        .any(|c| !is_real(c) && (c.norm() - 1.0).abs() <= tol)
    {
        return Classification::NeimarkSackerCritical;
    }
    if eigs.iter().any(|c| is_real(c) && (c.re - 1.0).abs() <= tol) {
        return Classification::FoldCritical;
    }
    if eigs.iter().all(|c| c.norm() < 1.0) {
        Classification::Stable
    } else {
        Classification::Unstable
    }
}

/// Eigenvalues of the Jacobian at the interior equilibrium.
pub fn classify_equilibrium(p: &Params, tol: f64) -> Result<StabilityReport> {
    let fp = p.fixed_points()[0];
    if !fp.positive {
        return Err(Error::Precondition(format!(
            "interior equilibrium {:?} has a non-positive coordinate",
            fp.state
        )));
    }
    let eigs = p.jacobian(fp.state)?.complex_eigenvalues();
    let mut moduli = [0.0; 3];
    for (m, c) in moduli.iter_mut().zip(eigs.iter()) {
        *m = c.norm();
    }
    Ok(StabilityReport {
        params: *p,
        fixed_point: fp.state,
        eigenvalues: eigs.iter().map(|c| (c.re, c.im)).collect(),
        moduli,
        classification: classify_eigenvalues(eigs.as_slice(), tol),
        tol,
    })
}

/// Speed `alpha` in `[lo, hi]` at which the interior equilibrium loses
/// stability, located by bisection to width `tol`. `None` unless the
/// equilibrium is stable at `lo` and not at `hi`.
pub fn stability_boundary(p: &Params, lo: f64, hi: f64, tol: f64) -> Result<Option<f64>> {
    let stable = |a: f64| -> Result<bool> {
        let r = classify_equilibrium(&p.with_alpha(a)?, 0.0)?;
        Ok(r.moduli.iter().all(|&m| m < 1.0))
    };
    if !(stable(lo)? && !stable(hi)?) {
        return Ok(None);
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let m = 0.5 * (a + b);
        if stable(m)? {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(Some(0.5 * (a + b)))
}
