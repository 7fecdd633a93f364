//! Search for boxes satisfying the hypotheses at fixed parameters.
//!
//! Boxes are parameterized by `(x_l, w_x, y_l, w_y, z_r)` with `z_l = 0`.
//! Candidates are scored by their smallest hypothesis margin (the equality
//! `z_l = 0` holds by construction and is left out) and ranked by score, then
//! lexicographically by box.

use std::cmp::Ordering;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certificate::{
    certify_box, check_hypotheses, Certificate, CertifyOptions, ConditionId, Cuboid, EngineChoice,
    Relation, Status, DEFAULT_MIN_MARGIN, SCHEMA_VERSION,
};
use crate::error::{Error, Result};
use crate::model::Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Grid,
    Random,
    /// Random sampling for a quarter of the budget, then adaptive local
    /// search from the best samples.
    Refine,
}

impl std::str::FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(Strategy::Grid),
            "random" => Ok(Strategy::Random),
            "refine" => Ok(Strategy::Refine),
            _ => Err(Error::InvalidArgument(format!(
                "unknown strategy '{s}' (grid, random, refine)"
            ))),
        }
    }
}

/// Ranges of `(x_l, w_x, y_l, w_y, z_r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub ranges: [[f64; 2]; 5],
}

impl SearchSpace {
    /// A wide region of the positive octant.
    pub fn broad() -> Self {
        Self {
            ranges: [
                [0.3, 1.0],
                [1e-3, 0.3],
                [0.05, 1.0],
                [1e-3, 0.4],
                [1e-3, 0.8],
            ],
        }
    }

    /// Each parameter of `b` within a relative distance `rel`.
    pub fn around(b: &Cuboid, rel: f64) -> Self {
        let v = encode(b);
        let mut ranges = [[0.0; 2]; 5];
        for (r, x) in ranges.iter_mut().zip(v) {
            *r = [x * (1.0 - rel), x * (1.0 + rel)];
        }
        Self { ranges }
    }

    fn lerp(&self, u: [f64; 5]) -> [f64; 5] {
        std::array::from_fn(|i| {
            let [lo, hi] = self.ranges[i];
            lo + u[i] * (hi - lo)
        })
    }

    fn clamp(&self, mut v: [f64; 5]) -> [f64; 5] {
        for (x, [lo, hi]) in v.iter_mut().zip(self.ranges) {
            *x = x.clamp(lo, hi);
        }
        v
    }
}

fn encode(b: &Cuboid) -> [f64; 5] {
    [b.x_l, b.x_r - b.x_l, b.y_l, b.y_r - b.y_l, b.z_r]
}

fn decode(v: [f64; 5]) -> Option<Cuboid> {
    Cuboid::new(v[0], v[0] + v[1], v[2], v[2] + v[3], 0.0, v[4]).ok()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub strategy: Strategy,
    /// Candidate boxes evaluated at most.
    pub budget: usize,
    pub seed: u64,
    pub space: SearchSpace,
    /// Passing boxes kept.
    pub keep: usize,
    pub min_margin: f64,
}

impl SearchOptions {
    pub fn new(strategy: Strategy, budget: usize, seed: u64, space: SearchSpace) -> Self {
        Self {
            strategy,
            budget,
            seed,
            space,
            keep: 20,
            min_margin: DEFAULT_MIN_MARGIN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    #[serde(rename = "box")]
    pub cuboid: Cuboid,
    /// Smallest margin over all hypothesis inequalities except `z_l = 0`.
    pub score: f64,
    pub passes: bool,
    /// Hypothesis holding the smallest margin.
    pub binding: ConditionId,
    pub binding_check: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Found {
    pub candidate: Candidate,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub schema_version: u32,
    pub params: Params,
    pub options: SearchOptions,
    pub evaluated: usize,
    /// Passing boxes whose analytic certificate is certified, best first.
    pub found: Vec<Found>,
    /// Best candidate overall when nothing passed.
    pub near_miss: Option<Candidate>,
}

impl SearchResult {
    /// One JSON object per found box, then a summary line.
    pub fn write_jsonl<W: Write + ?Sized>(&self, w: &mut W) -> Result<()> {
        for f in &self.found {
            let line = serde_json::json!({
                "schema_version": SCHEMA_VERSION,
                "kind": "box",
                "strategy": self.options.strategy,
                "seed": self.options.seed,
                "box": f.candidate.cuboid,
                "score": f.candidate.score,
                "binding": f.candidate.binding,
                "verdict": f.certificate.verdict,
            });
            writeln!(w, "{line}")?;
        }
        let summary = serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "kind": "summary",
            "strategy": self.options.strategy,
            "seed": self.options.seed,
            "budget": self.options.budget,
            "evaluated": self.evaluated,
            "found": self.found.len(),
            "near_miss": self.near_miss,
        });
        writeln!(w, "{summary}")?;
        Ok(())
    }
}

/// Scores one box.
pub fn evaluate(p: &Params, b: &Cuboid, min_margin: f64) -> Candidate {
    let records = check_hypotheses(p, b, min_margin);
    let passes = records.iter().all(|r| r.status == Status::Pass);
    let mut score = f64::INFINITY;
    let mut binding = (ConditionId::H2, String::from("hypotheses inapplicable"));
    for r in &records {
        if r.status == Status::Inapplicable {
            score = f64::NEG_INFINITY;
            binding = (r.id, "inapplicable".into());
            break;
        }
        for e in &r.evidence {
            for c in e.checks.iter().filter(|c| c.relation != Relation::Eq) {
                if c.margin < score {
                    score = c.margin;
                    binding = (r.id, c.label.clone());
                }
            }
        }
    }
    Candidate {
        cuboid: *b,
        score,
        passes,
        binding: binding.0,
        binding_check: binding.1,
    }
}

fn rank(a: &Candidate, b: &Candidate) -> Ordering {
    b.score.total_cmp(&a.score).then_with(|| {
        a.cuboid
            .to_array()
            .iter()
            .zip(b.cuboid.to_array())
            .map(|(x, y)| x.total_cmp(&y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

fn grid_points(n_total: usize) -> Vec<[f64; 5]> {
    let mut n = 1;
    while (n + 1usize).pow(5) <= n_total {
        n += 1;
    }
    let c = |i: usize| (i as f64 + 0.5) / n as f64;
    let mut out = Vec::with_capacity(n.pow(5));
    for a in 0..n {
        for b in 0..n {
            for d in 0..n {
                for e in 0..n {
                    for f in 0..n {
                        out.push([c(a), c(b), c(d), c(e), c(f)]);
                    }
                }
            }
        }
    }
    out
}

struct Tally<'a> {
    p: &'a Params,
    min_margin: f64,
    evaluated: usize,
    budget: usize,
    all: Vec<Candidate>,
}

impl Tally<'_> {
    fn run(&mut self, vs: Vec<[f64; 5]>) -> Vec<Candidate> {
        let room = self.budget - self.evaluated;
        let vs: Vec<[f64; 5]> = vs.into_iter().take(room).collect();
        self.evaluated += vs.len();
        let p = self.p;
        let mm = self.min_margin;
        let out: Vec<Candidate> = vs
            .par_iter()
            .filter_map(|&v| decode(v).map(|b| evaluate(p, &b, mm)))
            .collect();
        self.all.extend(out.iter().cloned());
        out
    }
}

/// Proposals evaluated per local-search generation.
const BATCH: usize = 16;
/// Starting points for local search, taken from the best random samples.
const STARTS: usize = 8;

/// Step-size-adaptive random local search from `start`: each generation
/// perturbs the incumbent by uniform steps of scale `sigma` per coordinate,
/// widening `sigma` after an improvement and narrowing it otherwise.
fn local_search(
    t: &mut Tally<'_>,
    space: &SearchSpace,
    start: Candidate,
    rng: &mut ChaCha8Rng,
    evals: usize,
) {
    let stop = (t.evaluated + evals).min(t.budget);
    let mut best = start;
    let mut sigma: [f64; 5] =
        std::array::from_fn(|i| 0.1 * (space.ranges[i][1] - space.ranges[i][0]));
    while t.evaluated < stop
        && sigma
            .iter()
            .zip(space.ranges)
            .any(|(s, r)| *s > 1e-9 * (r[1] - r[0]))
    {
        let x = encode(&best.cuboid);
        let n = BATCH.min(stop - t.evaluated);
        let proposals = (0..n)
            .map(|_| {
                space.clamp(std::array::from_fn(|i| {
                    x[i] + sigma[i] * rng.gen_range(-1.0..=1.0)
                }))
            })
            .collect();
        let top = t.run(proposals).into_iter().min_by(rank);
        match top {
            Some(c) if c.score > best.score => {
                best = c;
                sigma = sigma.map(|s| s * 1.5);
            }
            _ => sigma = sigma.map(|s| s * 0.6),
        }
    }
}

/// Samples candidate boxes within `opts.space` and keeps those satisfying
/// every hypothesis.
pub fn search_boxes(p: &Params, opts: &SearchOptions) -> Result<SearchResult> {
    if opts.budget == 0 {
        return Err(Error::InvalidArgument("budget must be positive".into()));
    }
    p.validate()?;
    let mut t = Tally {
        p,
        min_margin: opts.min_margin,
        evaluated: 0,
        budget: opts.budget,
        all: Vec::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let random = |rng: &mut ChaCha8Rng, n: usize| -> Vec<[f64; 5]> {
        (0..n)
            .map(|_| opts.space.lerp(std::array::from_fn(|_| rng.gen::<f64>())))
            .collect()
    };
    match opts.strategy {
        Strategy::Grid => {
            let pts = grid_points(opts.budget)
                .into_iter()
                .map(|u| opts.space.lerp(u))
                .collect();
            t.run(pts);
        }
        Strategy::Random => {
            t.run(random(&mut rng, opts.budget));
        }
        Strategy::Refine => {
            let first = random(&mut rng, opts.budget.div_ceil(4));
            let mut seen = t.run(first);
            seen.sort_by(rank);
            seen.truncate(STARTS);
            let share = (opts.budget - t.evaluated).div_ceil(seen.len().max(1));
            for c in seen {
                local_search(&mut t, &opts.space, c, &mut rng, share);
            }
        }
    }
    let mut all = std::mem::take(&mut t.all);
    all.sort_by(rank);
    let near_miss = all.iter().find(|c| !c.passes).cloned();
    let mut found = Vec::new();
    for c in all.into_iter().filter(|c| c.passes) {
        if found.len() >= opts.keep {
            break;
        }
        let cert = certify_box(
            p,
            &c.cuboid,
            &CertifyOptions::with_engine(EngineChoice::Analytic),
        );
        if cert.is_certified() {
            found.push(Found {
                candidate: c,
                certificate: cert,
            });
        }
    }
    Ok(SearchResult {
        schema_version: SCHEMA_VERSION,
        params: *p,
        options: *opts,
        evaluated: t.evaluated,
        near_miss: if found.is_empty() { near_miss } else { None },
        found,
    })
}
