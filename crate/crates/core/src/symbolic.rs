//! Symbolic dynamics over the two half-boxes. Periodic points are located
//! for prescribed symbol words; a certified box yields an entropy bound.
//!
//! The symbol of a point of `R` is the index of the half-box containing it
//! (0 below the midplane, 1 on or above it). Points on the midplane get
//! symbol 1 and are flagged.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certificate::{certify_box, CertifyOptions, EngineChoice, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::export::{num, write_row};
use crate::horseshoe::OrientedBox;
use crate::model::{Params, State};

/// Largest word length accepted by [`count_periodic_words`].
pub const MAX_WORD_LEN: usize = 6;

/// Nonempty word over `{0, 1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SymbolWord(Vec<u8>);

impl SymbolWord {
    pub fn new(symbols: Vec<u8>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::InvalidArgument(
                "symbol word must be nonempty".into(),
            ));
        }
        if let Some(s) = symbols.iter().find(|&&s| s > 1) {
            return Err(Error::InvalidArgument(format!(
                "symbol {s} is not in {{0, 1}}"
            )));
        }
        Ok(Self(symbols))
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Left rotation by `n` places.
    pub fn rotate(&self, n: usize) -> Self {
        let mut v = self.0.clone();
        let k = v.len();
        v.rotate_left(n % k);
        Self(v)
    }

    /// Lexicographically least rotation.
    pub fn canonical(&self) -> Self {
        (0..self.len())
            .map(|n| self.rotate(n))
            .min()
            .expect("nonempty")
    }

    /// All `2^k` words of length `k`, in binary order.
    pub fn all(k: usize) -> Vec<Self> {
        (0..1usize << k)
            .map(|bits| Self((0..k).map(|i| ((bits >> (k - 1 - i)) & 1) as u8).collect()))
            .collect()
    }
}

impl fmt::Display for SymbolWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl FromStr for SymbolWord {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let symbols = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::InvalidArgument(format!(
                    "'{c}' is not a symbol; words use 0 and 1"
                ))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::new(symbols)
    }
}

impl TryFrom<String> for SymbolWord {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SymbolWord> for String {
    fn from(w: SymbolWord) -> String {
        w.to_string()
    }
}

/// Half-box symbols of the first `horizon` iterates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Itinerary {
    pub initial: State,
    pub horizon: usize,
    /// Symbol of `F^i(s0)` for each recorded `i`.
    pub symbols: Vec<u8>,
    /// First step whose iterate lies outside `R`.
    pub exit_step: Option<usize>,
    /// Steps whose iterate lies exactly on the midplane.
    pub ties: Vec<usize>,
}

impl Itinerary {
    pub fn exited(&self) -> bool {
        self.exit_step.is_some()
    }
}

/// Follows `s0` for up to `n` iterates, stopping at the first one outside
/// `R`.
pub fn itinerary(p: &Params, ob: &OrientedBox, s0: State, n: usize) -> Result<Itinerary> {
    if !ob.cuboid.contains(s0) {
        return Err(Error::Precondition(format!(
            "initial state {s0:?} is outside the box"
        )));
    }
    let m = ob.midplane();
    let mut it = Itinerary {
        initial: s0,
        horizon: n,
        symbols: Vec::with_capacity(n),
        exit_step: None,
        ties: Vec::new(),
    };
    let mut s = s0;
    for step in 0..n {
        if step > 0 {
            s = p
                .eval(s)
                .map_err(|e| Error::Domain(format!("at step {step}: {e}")))?;
        }
        let Some(sym) = ob.symbol(s) else {
            it.exit_step = Some(step);
            break;
        };
        if s.get(ob.axis) == m {
            it.ties.push(step);
        }
        it.symbols.push(sym);
    }
    Ok(it)
}

/// Symbols of the first `n` iterates, or `None` if the orbit leaves `R`.
fn quick_symbols(p: &Params, ob: &OrientedBox, s0: State, n: usize) -> Option<Vec<u8>> {
    let mut s = s0;
    let mut out = Vec::with_capacity(n);
    for step in 0..n {
        if step > 0 {
            s = p.eval(s).ok()?;
        }
        out.push(ob.symbol(s)?);
    }
    Some(out)
}

/// Whether the itinerary of `F(s)` is the left shift of that of `s`, over
/// `depth` symbols.
pub fn shift_commutes(p: &Params, ob: &OrientedBox, s: State, depth: usize) -> Result<bool> {
    let a = itinerary(p, ob, s, depth + 1)?;
    if a.exited() {
        return Ok(false);
    }
    let b = itinerary(p, ob, p.eval(s)?, depth)?;
    Ok(!b.exited() && a.symbols[1..] == b.symbols[..])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOptions {
    /// Required `max_i |F^k(s) - s|_i`.
    pub tol: f64,
    /// Newton starts tried per word.
    pub max_starts: usize,
    /// Samples along the orientation axis per transverse grid point, scaled
    /// by `2^k`.
    pub axis_samples: usize,
    /// Transverse grid points per free axis.
    pub transverse_samples: usize,
    pub newton_iter: usize,
}

impl Default for PeriodicOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_starts: 24,
            axis_samples: 256,
            transverse_samples: 3,
            newton_iter: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbitResult {
    pub word: SymbolWord,
    pub point: State,
    /// The `k` points of the cycle, starting at `point`.
    pub orbit: Vec<State>,
    /// `max_i |F^k(s) - s|_i` at `point`.
    pub residual: f64,
    pub itinerary: Vec<u8>,
    pub converged: bool,
    pub starts_tried: usize,
    pub note: Option<String>,
}

/// Grid points of `R` grouped by their first `k` symbols, each group sorted by
/// how nearly it closes up after `k` steps.
fn start_pool(
    p: &Params,
    ob: &OrientedBox,
    k: usize,
    opts: &PeriodicOptions,
) -> BTreeMap<Vec<u8>, Vec<State>> {
    let b = ob.cuboid;
    let nt = opts.transverse_samples.max(1);
    let na = opts.axis_samples.max(2) << k.min(MAX_WORD_LEN);
    let free: Vec<usize> = (0..3).filter(|&a| a != ob.axis).collect();
    let frac = |i: usize, n: usize| (i as f64 + 0.5) / n as f64;
    let mut pts = Vec::with_capacity(nt * nt * na);
    for i in 0..nt {
        for j in 0..nt {
            for l in 0..na {
                let mut c = [0.0; 3];
                c[free[0]] = b.lower(free[0]) + frac(i, nt) * (b.upper(free[0]) - b.lower(free[0]));
                c[free[1]] = b.lower(free[1]) + frac(j, nt) * (b.upper(free[1]) - b.lower(free[1]));
                c[ob.axis] = b.lower(ob.axis) + frac(l, na) * (b.upper(ob.axis) - b.lower(ob.axis));
                pts.push(State::from_array(c));
            }
        }
    }
    let tagged: Vec<(Vec<u8>, f64, State)> = pts
        .par_iter()
        .filter_map(|&s| {
            let syms = quick_symbols(p, ob, s, k)?;
            let mut cur = s;
            for _ in 0..k {
                cur = p.eval(cur).ok()?;
            }
            Some((syms, cur.sub(s).max_abs(), s))
        })
        .collect();
    let mut pool: BTreeMap<Vec<u8>, Vec<(f64, State)>> = BTreeMap::new();
    for (syms, gap, s) in tagged {
        pool.entry(syms).or_default().push((gap, s));
    }
    pool.into_iter()
        .map(|(w, mut v)| {
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            (w, v.into_iter().map(|(_, s)| s).collect())
        })
        .collect()
}

/// Newton on `F(s_i) = s_{i+1 mod k}` for the whole cycle at once.
fn multiple_shooting(p: &Params, start: State, k: usize, iters: usize) -> Option<Vec<State>> {
    let mut xs = Vec::with_capacity(k);
    let mut cur = start;
    for _ in 0..k {
        xs.push(cur);
        cur = p.eval(cur).ok()?;
    }
    let residual = |xs: &[State]| -> Option<DVector<f64>> {
        let mut r = DVector::zeros(3 * k);
        for i in 0..k {
            let f = p.eval(xs[i]).ok()?.sub(xs[(i + 1) % k]).to_array();
            for c in 0..3 {
                r[3 * i + c] = f[c];
            }
        }
        Some(r)
    };
    let mut r = residual(&xs)?;
    for _ in 0..iters {
        let norm = r.amax();
        if norm < 1e-15 {
            break;
        }
        let mut jac = DMatrix::zeros(3 * k, 3 * k);
        for i in 0..k {
            let d = p.jacobian(xs[i]).ok()?;
            let nxt = (i + 1) % k;
            for row in 0..3 {
                for col in 0..3 {
                    jac[(3 * i + row, 3 * i + col)] += d[(row, col)];
                }
                jac[(3 * i + row, 3 * nxt + row)] -= 1.0;
            }
        }
        let step = jac.lu().solve(&(-&r))?;
        let mut lambda = 1.0;
        loop {
            let cand: Vec<State> = (0..k)
                .map(|i| {
                    State::new(
                        xs[i].x + lambda * step[3 * i],
                        xs[i].y + lambda * step[3 * i + 1],
                        xs[i].z + lambda * step[3 * i + 2],
                    )
                })
                .collect();
            if let Some(rc) = residual(&cand) {
                if rc.amax() < norm {
                    xs = cand;
                    r = rc;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-8 {
                return Some(xs);
            }
        }
    }
    Some(xs)
}

fn closure_residual(p: &Params, s: State, k: usize) -> f64 {
    let mut cur = s;
    for _ in 0..k {
        match p.eval(cur) {
            Ok(n) => cur = n,
            Err(_) => return f64::INFINITY,
        }
    }
    cur.sub(s).max_abs()
}

fn require_certified(p: &Params, ob: &OrientedBox) -> Result<()> {
    let cert = certify_box(
        p,
        &ob.cuboid,
        &CertifyOptions::with_engine(EngineChoice::Analytic),
    );
    if !cert.is_certified() {
        return Err(Error::Precondition(format!(
            "box is not certified (verdict {:?})",
            cert.verdict
        )));
    }
    Ok(())
}

fn solve_word(
    p: &Params,
    ob: &OrientedBox,
    w: &SymbolWord,
    starts: &[State],
    opts: &PeriodicOptions,
) -> PeriodicOrbitResult {
    let k = w.len();
    let mut best: Option<PeriodicOrbitResult> = None;
    let mut tried = 0;
    for &s0 in starts.iter().take(opts.max_starts) {
        tried += 1;
        let Some(orbit) = multiple_shooting(p, s0, k, opts.newton_iter) else {
            continue;
        };
        // roundoff may leave a cycle point just outside a face
        let orbit: Vec<State> = orbit
            .into_iter()
            .map(|s| ob.cuboid.snap(s, 1e-12))
            .collect();
        let s = orbit[0];
        let residual = closure_residual(p, s, k);
        let syms = quick_symbols(p, ob, s, k).unwrap_or_default();
        let converged = residual < opts.tol && syms == w.symbols();
        let cand = PeriodicOrbitResult {
            word: w.clone(),
            point: s,
            orbit,
            residual,
            itinerary: syms,
            converged,
            starts_tried: tried,
            note: None,
        };
        if converged {
            return cand;
        }
        if best.as_ref().is_none_or(|b| residual < b.residual) {
            best = Some(cand);
        }
    }
    let note = Some(if starts.is_empty() {
        "no grid point follows this word; increase the sampling density".to_string()
    } else {
        "Newton did not converge to a point with this itinerary; a periodic point exists on \
         certified boxes, so this is a numerical failure"
            .to_string()
    });
    match best {
        Some(b) => PeriodicOrbitResult {
            starts_tried: tried,
            note,
            ..b
        },
        None => PeriodicOrbitResult {
            word: w.clone(),
            point: ob.cuboid.center(),
            orbit: Vec::new(),
            residual: f64::INFINITY,
            itinerary: Vec::new(),
            converged: false,
            starts_tried: tried,
            note,
        },
    }
}

/// A periodic point whose itinerary is `w` repeated.
///
/// Starts are grid points of `R` whose first `k` symbols spell `w`; each is
/// polished by damped Newton on the cycle equations.
pub fn find_periodic_orbit(
    p: &Params,
    ob: &OrientedBox,
    w: &SymbolWord,
    opts: &PeriodicOptions,
) -> Result<PeriodicOrbitResult> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tol must be positive, got {}",
            opts.tol
        )));
    }
    require_certified(p, ob)?;
    let pool = start_pool(p, ob, w.len(), opts);
    let starts = pool.get(w.symbols()).map(Vec::as_slice).unwrap_or(&[]);
    Ok(solve_word(p, ob, w, starts, opts))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordTable {
    pub schema_version: u32,
    pub k: usize,
    /// Whether only the least rotation of each word was searched.
    pub rotations_deduplicated: bool,
    pub results: Vec<PeriodicOrbitResult>,
}

impl WordTable {
    pub fn realized(&self) -> usize {
        self.results.iter().filter(|r| r.converged).count()
    }

    pub fn write_csv<W: Write + ?Sized>(&self, w: &mut W, header: bool) -> Result<()> {
        write_orbit_csv(&self.results, w, header)
    }
}

/// Searches every word of length `k`.
pub fn count_periodic_words(
    p: &Params,
    ob: &OrientedBox,
    k: usize,
    opts: &PeriodicOptions,
    dedup_rotations: bool,
) -> Result<WordTable> {
    if k == 0 || k > MAX_WORD_LEN {
        return Err(Error::InvalidArgument(format!(
            "word length must be in 1..={MAX_WORD_LEN}, got {k}"
        )));
    }
    require_certified(p, ob)?;
    let pool = start_pool(p, ob, k, opts);
    let words: Vec<SymbolWord> = SymbolWord::all(k)
        .into_iter()
        .filter(|w| !dedup_rotations || w.canonical() == *w)
        .collect();
    let results = words
        .par_iter()
        .map(|w| {
            let starts = pool.get(w.symbols()).map(Vec::as_slice).unwrap_or(&[]);
            solve_word(p, ob, w, starts, opts)
        })
        .collect();
    Ok(WordTable {
        schema_version: SCHEMA_VERSION,
        k,
        rotations_deduplicated: dedup_rotations,
        results,
    })
}

/// `word,x,y,z,residual,converged` rows.
pub fn write_orbit_csv<W: Write + ?Sized>(
    results: &[PeriodicOrbitResult],
    w: &mut W,
    header: bool,
) -> Result<()> {
    if header {
        writeln!(w, "word,x,y,z,residual,converged")?;
    }
    for r in results {
        write_row(
            w,
            &[
                r.word.to_string(),
                num(r.point.x),
                num(r.point.y),
                num(r.point.z),
                num(r.residual),
                r.converged.to_string(),
            ],
        )?;
    }
    Ok(())
}

/// `log m` for a certified configuration on `m` symbols, else 0.
pub fn entropy_lower_bound_symbols(certified: bool, m: usize) -> f64 {
    if certified && m >= 1 {
        (m as f64).ln()
    } else {
        0.0
    }
}

/// Lower bound on topological entropy from a two-symbol certificate.
pub fn entropy_lower_bound(certified: bool) -> f64 {
    entropy_lower_bound_symbols(certified, 2)
}
