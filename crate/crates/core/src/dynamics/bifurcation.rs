use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{lyapunov_spectrum, simulate, SafetyBox};
use crate::certificate::{Cuboid, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::export::{num, write_row};
use crate::model::{Params, State};

/// How each scanned speed picks its initial state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartPolicy {
    Fixed(State),
    /// The interior equilibrium at that speed, shifted by `delta` in every
    /// coordinate.
    NashOffset(f64),
    /// Uniform in the box; draw `i` uses the stream `seed + i`.
    RandomInBox {
        cuboid: Cuboid,
        seed: u64,
    },
}

impl StartPolicy {
    fn start(&self, p: &Params, index: usize) -> State {
        match *self {
            StartPolicy::Fixed(s) => s,
            StartPolicy::NashOffset(d) => {
                let n = p.nash();
                State::new(n.x + d, n.y + d, n.z + d)
            }
            StartPolicy::RandomInBox { cuboid: b, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64));
                State::new(
                    rng.gen_range(b.x_l..=b.x_r),
                    rng.gen_range(b.y_l..=b.y_r),
                    rng.gen_range(b.z_l..=b.z_r),
                )
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub transient: usize,
    /// Asymptotic states kept per speed.
    pub record: usize,
    /// Steps used for the largest Lyapunov exponent.
    pub lyapunov_steps: usize,
    pub safety: SafetyBox,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            transient: super::DEFAULT_TRANSIENT,
            record: 200,
            lyapunov_steps: 2_000,
            safety: SafetyBox::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationRow {
    pub alpha: f64,
    pub start: State,
    pub escape_step: Option<usize>,
    /// `None` when the orbit escaped.
    pub lyap1: Option<f64>,
    pub z: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationTable {
    pub schema_version: u32,
    pub base: Params,
    pub policy: StartPolicy,
    pub options: ScanOptions,
    pub rows: Vec<BifurcationRow>,
}

impl BifurcationTable {
    /// `alpha,escape_step,lyap1,z0..z{record-1}`; missing values are empty.
    pub fn write_csv<W: Write + ?Sized>(&self, w: &mut W) -> Result<()> {
        let mut header = vec!["alpha".to_string(), "escape_step".into(), "lyap1".into()];
        header.extend((0..self.options.record).map(|i| format!("z{i}")));
        write_row(w, &header)?;
        for r in &self.rows {
            let mut row = vec![
                num(r.alpha),
                r.escape_step.map(|s| s.to_string()).unwrap_or_default(),
                r.lyap1.map(num).unwrap_or_default(),
            ];
            row.extend(
                (0..self.options.record).map(|i| r.z.get(i).map(|&v| num(v)).unwrap_or_default()),
            );
            write_row(w, &row)?;
        }
        Ok(())
    }
}

/// Asymptotic third coordinates and the largest Lyapunov exponent for
/// `samples` equally spaced speeds in `[alpha_lo, alpha_hi]`.
pub fn bifurcation_scan(
    base: &Params,
    alpha_lo: f64,
    alpha_hi: f64,
    samples: usize,
    policy: &StartPolicy,
    opts: &ScanOptions,
) -> Result<BifurcationTable> {
    if !(alpha_lo > 0.0 && alpha_lo <= alpha_hi && alpha_hi <= 20.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha range [{alpha_lo}, {alpha_hi}] must lie in (0, 20]"
        )));
    }
    let n = if alpha_lo == alpha_hi { 1 } else { samples };
    if n < 2 && alpha_lo != alpha_hi {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    let alphas: Vec<f64> = (0..n)
        .map(|i| {
            if n == 1 {
                alpha_lo
            } else if i == n - 1 {
                alpha_hi
            } else {
                alpha_lo + (alpha_hi - alpha_lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect();
    let rows = alphas
        .par_iter()
        .enumerate()
        .map(|(i, &alpha)| -> Result<BifurcationRow> {
            let p = base.with_alpha(alpha)?;
            let s0 = policy.start(&p, i);
            let rec = simulate(&p, s0, opts.record, opts.transient, &opts.safety)?;
            let lyap1 = if rec.escaped() {
                None
            } else {
                let rep =
                    lyapunov_spectrum(&p, s0, opts.lyapunov_steps, opts.transient, &opts.safety)?;
                (!rep.partial()).then_some(rep.exponents[0])
            };
            Ok(BifurcationRow {
                alpha,
                start: s0,
                escape_step: rec.escape.map(|e| e.step),
                lyap1,
                z: rec.states.iter().map(|s| s.z).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BifurcationTable {
        schema_version: SCHEMA_VERSION,
        base: *base,
        policy: *policy,
        options: *opts,
        rows,
    })
}
