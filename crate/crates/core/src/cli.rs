//! Command-line front end.
//!
//! Exit codes: 0 certified or success, 1 falsified, 2 inconclusive or
//! inapplicable, 3 usage or input error, 4 failure while running.
//!
//! Settings come from flags and from an optional flat `key = value` config
//! file (`--config`); flags override the file. Keys are the long flag names
//! with `-` or `_`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::BoundConfig;
use crate::certificate::{
    certify_box, Certificate, CertifyOptions, Cuboid, EngineChoice, REFERENCE_BOX,
    REFERENCE_BOX_MISPRINT, SCHEMA_VERSION,
};
use crate::dynamics::{
    bifurcation_scan, logistic_sap_demo, lyapunov_spectrum, simulate, SafetyBox, ScanOptions,
    StartPolicy, DEFAULT_RECORD, DEFAULT_TRANSIENT,
};
use crate::error::{Error, Result};
use crate::export::{num, write_row};
use crate::horseshoe::{
    build_k_enclosures, check_path_stretching, locate_fixed_point_in, midplane_image_misses,
    FixedPointSearch, MidplaneCheck, OrientedBox, PathSample, StretchOptions, StretchReport,
};
use crate::model::{Params, State};
use crate::search::{search_boxes, SearchOptions, SearchSpace, Strategy};
use crate::symbolic::{
    count_periodic_words, entropy_lower_bound, find_periodic_orbit, write_orbit_csv,
    PeriodicOptions, SymbolWord,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FALSIFIED: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 3;
pub const EXIT_FAILURE: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "triopoly",
    version,
    about = "Chaos certification and dynamics for a triopoly map"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// c1,c2,c3,alpha
    #[arg(long, global = true)]
    params: Option<String>,
    /// xl,xr,yl,yr,zl,zr
    #[arg(long = "box", global = true)]
    cuboid: Option<String>,
    /// Built-in parameters and box; explicit --params/--box win.
    #[arg(long, global = true)]
    preset: Option<Preset>,
    /// Interval width target (certify) or Newton residual (periodic).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Subdivisions per extremum (certify) or candidate boxes (search).
    #[arg(long, global = true)]
    budget: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    engine: Option<String>,
    /// Output file; a directory for `horseshoe`. Standard output if absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Flat `key = value` settings file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Preset {
    /// Reference parameters and box.
    #[value(name = "paper")]
    Reference,
    /// Reference parameters and the box as misprinted.
    #[value(name = "paper-raw")]
    Misprint,
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        <Preset as ValueEnum>::from_str(s, false)
            .map_err(|_| Error::InvalidArgument(format!("unknown preset '{s}'")))
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check every hypothesis and condition on a box; prints a certificate.
    Certify,
    /// Sample boxes satisfying the hypotheses; prints JSON lines.
    Search {
        /// grid, random or refine
        #[arg(long)]
        strategy: Option<String>,
        /// Search within this relative distance of --box instead of a broad region.
        #[arg(long)]
        around: Option<f64>,
        /// Passing boxes reported.
        #[arg(long)]
        keep: Option<usize>,
    },
    /// K-set covers, midplane check, fixed points and stretching along random paths.
    Horseshoe {
        /// x, y or z
        #[arg(long)]
        axis: Option<String>,
        #[arg(long)]
        resolution: Option<usize>,
        /// Random face-joining paths checked.
        #[arg(long)]
        paths: Option<usize>,
    },
    /// Periodic points with prescribed itineraries; prints orbit CSV.
    Periodic {
        /// Symbol word such as 011.
        #[arg(long)]
        word: Option<String>,
        /// All words of length 1..=max-k.
        #[arg(long = "max-k")]
        max_k: Option<usize>,
        /// Search only the least rotation of each word.
        #[arg(long)]
        dedup: bool,
    },
    /// Orbit CSV.
    Simulate {
        /// x,y,z; the interior equilibrium shifted by 1e-3 if absent.
        #[arg(long)]
        start: Option<String>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        transient: Option<usize>,
    },
    /// Lyapunov spectrum CSV.
    Lyapunov {
        #[arg(long)]
        start: Option<String>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        transient: Option<usize>,
    },
    /// Scan over alpha; bifurcation CSV.
    Bifurcate {
        /// lo,hi
        #[arg(long = "alpha-range")]
        alpha_range: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
        /// x,y,z for every speed. Otherwise random in --box if given, else
        /// the interior equilibrium shifted by 1e-3.
        #[arg(long)]
        start: Option<String>,
        #[arg(long)]
        record: Option<usize>,
        #[arg(long)]
        transient: Option<usize>,
    },
    /// Stretching certificates for the logistic map; prints JSON.
    DemoLogistic {
        #[arg(long)]
        mu: Option<f64>,
    },
}

const CONFIG_KEYS: &[&str] = &[
    "params",
    "box",
    "preset",
    "tol",
    "budget",
    "seed",
    "engine",
    "out",
    "threads",
    "strategy",
    "around",
    "keep",
    "axis",
    "resolution",
    "paths",
    "word",
    "max_k",
    "dedup",
    "start",
    "steps",
    "transient",
    "alpha_range",
    "samples",
    "record",
    "mu",
];

/// Flags layered over config-file values.
struct Settings {
    file: BTreeMap<String, String>,
}

impl Settings {
    fn load(path: Option<&Path>) -> Result<Self> {
        let mut file = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::InvalidArgument(format!("cannot read config {}: {e}", path.display()))
            })?;
            for (n, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((k, v)) = line.split_once('=') else {
                    return Err(Error::InvalidArgument(format!(
                        "config line {}: expected key = value",
                        n + 1
                    )));
                };
                let k = k.trim().replace('-', "_");
                if !CONFIG_KEYS.contains(&k.as_str()) {
                    return Err(Error::InvalidArgument(format!(
                        "config line {}: unknown key '{k}'",
                        n + 1
                    )));
                }
                file.insert(k, v.trim().to_string());
            }
        }
        Ok(Self { file })
    }

    fn get<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.file
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::InvalidArgument(format!("config key '{key}': {e}")))
            })
            .transpose()
    }

    fn or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(flag, key)?.unwrap_or(default))
    }
}

fn floats<const N: usize>(s: &str, what: &str) -> Result<[f64; N]> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::InvalidArgument(format!("{what}: {e}")))?;
    v.try_into().map_err(|v: Vec<f64>| {
        Error::InvalidArgument(format!(
            "{what}: expected {N} comma-separated numbers, got {}",
            v.len()
        ))
    })
}

/// A failure mapped to its exit code.
struct Failure {
    code: i32,
    message: String,
}

/// The reader closed standard output; stop without reporting.
fn broken_pipe(e: &Error) -> bool {
    let kind = match e {
        Error::Io(e) => Some(e.kind()),
        Error::Json(e) => e.io_error_kind(),
        _ => None,
    };
    kind == Some(std::io::ErrorKind::BrokenPipe)
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if broken_pipe(&e) {
            return Failure {
                code: EXIT_OK,
                message: String::new(),
            };
        }
        let code = match e {
            Error::InvalidParams(_) | Error::InvalidBox(_) | Error::InvalidArgument(_) => {
                EXIT_USAGE
            }
            _ => EXIT_FAILURE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Error::from(e).into()
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

struct Ctx<'a> {
    g: &'a Global,
    cfg: Settings,
    stdout: &'a mut (dyn Write + Send),
}

impl Ctx<'_> {
    fn preset(&self) -> Result<Option<Preset>> {
        self.cfg.get(self.g.preset, "preset")
    }

    fn params(&self) -> std::result::Result<Params, Failure> {
        if let Some(s) = self.cfg.get(self.g.params.clone(), "params")? {
            let [c1, c2, c3, alpha] = floats::<4>(&s, "--params")?;
            return Ok(Params::new(c1, c2, c3, alpha)?);
        }
        match self.preset()? {
            Some(_) => Ok(Params::reference()),
            None => Err(usage("missing --params (or --preset, or a config file)\n\nUsage: triopoly [OPTIONS] --params c1,c2,c3,alpha <COMMAND>")),
        }
    }

    fn cuboid_opt(&self) -> Result<Option<Cuboid>> {
        if let Some(s) = self.cfg.get(self.g.cuboid.clone(), "box")? {
            return Ok(Some(Cuboid::from_array(floats::<6>(&s, "--box")?)?));
        }
        match self.preset()? {
            Some(Preset::Reference) => Ok(Some(Cuboid::from_array(REFERENCE_BOX)?)),
            Some(Preset::Misprint) => Ok(Some(Cuboid::from_array(REFERENCE_BOX_MISPRINT)?)),
            None => Ok(None),
        }
    }

    fn cuboid(&self) -> std::result::Result<Cuboid, Failure> {
        self.cuboid_opt()?.ok_or_else(|| {
            usage("missing --box (or --preset, or a config file)\n\nUsage: triopoly [OPTIONS] --box xl,xr,yl,yr,zl,zr <COMMAND>")
        })
    }

    fn start(&self, flag: Option<String>, p: &Params) -> Result<State> {
        match self.cfg.get(flag, "start")? {
            Some(s) => Ok(State::from_array(floats::<3>(&s, "--start")?)),
            None => {
                let n = p.nash();
                Ok(State::new(n.x + 1e-3, n.y, n.z))
            }
        }
    }

    /// Writes to `--out` if set, else to standard output.
    fn emit(&mut self, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
        match self.cfg.get(self.g.out.clone(), "out")? {
            Some(path) => {
                let mut w = BufWriter::new(File::create(&path)?);
                f(&mut w)?;
                w.flush()?;
                Ok(())
            }
            None => f(self.stdout),
        }
    }

    fn emit_json<T: Serialize>(&mut self, v: &T) -> Result<()> {
        self.emit(|w| {
            serde_json::to_writer_pretty(&mut *w, v)?;
            writeln!(w)?;
            Ok(())
        })
    }
}

#[derive(Serialize)]
struct HorseshoeReport {
    schema_version: u32,
    certificate: Certificate,
    entropy_lower_bound: f64,
    axis: usize,
    resolution: usize,
    k0_cells: usize,
    k1_cells: usize,
    k_covers_disjoint: bool,
    midplane: MidplaneCheck,
    fixed_points: Vec<FixedPointSearch>,
    seed: u64,
    paths_stretched: usize,
    stretch: Vec<StretchReport>,
}

fn parse_axis(s: &str) -> Result<usize> {
    match s {
        "x" | "0" => Ok(0),
        "y" | "1" => Ok(1),
        "z" | "2" => Ok(2),
        _ => Err(Error::InvalidArgument(format!(
            "unknown axis '{s}' (x, y, z)"
        ))),
    }
}

fn dispatch(cmd: Command, ctx: &mut Ctx<'_>) -> std::result::Result<i32, Failure> {
    let g = ctx.g;
    match cmd {
        Command::Certify => {
            let (p, b) = (ctx.params()?, ctx.cuboid()?);
            let engine: EngineChoice = ctx
                .cfg
                .or(g.engine.clone(), "engine", "both".into())?
                .parse::<EngineChoice>()?;
            let mut opts = CertifyOptions::with_engine(engine);
            opts.tol = ctx.cfg.or(g.tol, "tol", opts.tol)?;
            opts.budget = ctx.cfg.or(g.budget, "budget", opts.budget)?;
            let cert = certify_box(&p, &b, &opts);
            ctx.emit_json(&cert)?;
            Ok(cert.verdict.exit_code())
        }
        Command::Search {
            strategy,
            around,
            keep,
        } => {
            let p = ctx.params()?;
            let strategy: Strategy = ctx.cfg.or(strategy, "strategy", "random".into())?.parse()?;
            let space = match ctx.cfg.get(around, "around")? {
                Some(rel) => SearchSpace::around(&ctx.cuboid()?, rel),
                None => SearchSpace::broad(),
            };
            let budget = ctx.cfg.or(g.budget, "budget", 10_000)?;
            let seed = ctx.cfg.or(g.seed, "seed", 0)?;
            let mut opts = SearchOptions::new(strategy, budget, seed, space);
            opts.keep = ctx.cfg.or(keep, "keep", opts.keep)?;
            let r = search_boxes(&p, &opts)?;
            ctx.emit(|w| r.write_jsonl(w))?;
            Ok(EXIT_OK)
        }
        Command::Horseshoe {
            axis,
            resolution,
            paths,
        } => {
            let (p, b) = (ctx.params()?, ctx.cuboid()?);
            let axis = parse_axis(&ctx.cfg.or(axis, "axis", "z".into())?)?;
            let resolution = ctx.cfg.or(resolution, "resolution", 64)?;
            let n_paths = ctx.cfg.or(paths, "paths", 10)?;
            let seed = ctx.cfg.or(g.seed, "seed", 0)?;
            let ob = OrientedBox::with_axis(b, axis)?;
            let cert = certify_box(&p, &b, &CertifyOptions::with_engine(EngineChoice::Analytic));
            let (k0, k1) = build_k_enclosures(&p, &ob, resolution)?;
            let mut bc = BoundConfig::default();
            bc.tol = ctx.cfg.or(g.tol, "tol", bc.tol)?;
            let midplane = midplane_image_misses(&p, &ob, &bc)?;
            let fixed_points = (0..2)
                .map(|i| locate_fixed_point_in(&p, &ob, i))
                .collect::<Result<Vec<_>>>()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let stretch = (0..n_paths)
                .map(|_| {
                    let path = PathSample::random_joining(&ob, 3, &mut rng);
                    check_path_stretching(&p, &ob, &path, &StretchOptions::default())
                })
                .collect::<Result<Vec<_>>>()?;
            let report = HorseshoeReport {
                schema_version: SCHEMA_VERSION,
                entropy_lower_bound: entropy_lower_bound(cert.is_certified()),
                certificate: cert,
                axis,
                resolution,
                k0_cells: k0.len(),
                k1_cells: k1.len(),
                k_covers_disjoint: !k0.intersects(&k1),
                midplane,
                fixed_points,
                seed,
                paths_stretched: stretch.iter().filter(|r| r.stretches()).count(),
                stretch,
            };
            match ctx.cfg.get(g.out.clone(), "out")? {
                Some(dir) => {
                    std::fs::create_dir_all(&dir)?;
                    let mut w = BufWriter::new(File::create(dir.join("k_covers.csv"))?);
                    k0.write_csv(&mut w, true)?;
                    k1.write_csv(&mut w, false)?;
                    w.flush()?;
                    let mut w = BufWriter::new(File::create(dir.join("horseshoe.json"))?);
                    serde_json::to_writer_pretty(&mut w, &report)?;
                    writeln!(w)?;
                    w.flush()?;
                }
                None => {
                    serde_json::to_writer_pretty(&mut *ctx.stdout, &report)?;
                    writeln!(ctx.stdout)?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Periodic { word, max_k, dedup } => {
            let (p, b) = (ctx.params()?, ctx.cuboid()?);
            let ob = OrientedBox::new(b);
            let mut opts = PeriodicOptions::default();
            opts.tol = ctx.cfg.or(g.tol, "tol", opts.tol)?;
            let dedup = dedup || ctx.cfg.or(None, "dedup", false)?;
            let results = match (ctx.cfg.get(word, "word")?, ctx.cfg.get(max_k, "max_k")?) {
                (Some(_), Some(_)) => return Err(usage("give either --word or --max-k, not both")),
                (Some(w), None) => vec![find_periodic_orbit(
                    &p,
                    &ob,
                    &w.parse::<SymbolWord>()?,
                    &opts,
                )?],
                (None, k) => {
                    let mut all = Vec::new();
                    for k in 1..=k.unwrap_or(3) {
                        all.extend(count_periodic_words(&p, &ob, k, &opts, dedup)?.results);
                    }
                    all
                }
            };
            ctx.emit(|w| write_orbit_csv(&results, w, true))?;
            Ok(EXIT_OK)
        }
        Command::Simulate {
            start,
            steps,
            transient,
        } => {
            let p = ctx.params()?;
            let s0 = ctx.start(start, &p)?;
            let n = ctx.cfg.or(steps, "steps", DEFAULT_RECORD)?;
            let transient = ctx.cfg.or(transient, "transient", DEFAULT_TRANSIENT)?;
            let rec = simulate(&p, s0, n, transient, &SafetyBox::default())?;
            ctx.emit(|w| rec.write_csv(w))?;
            Ok(EXIT_OK)
        }
        Command::Lyapunov {
            start,
            steps,
            transient,
        } => {
            let p = ctx.params()?;
            let s0 = ctx.start(start, &p)?;
            let n = ctx.cfg.or(steps, "steps", DEFAULT_RECORD)?;
            let transient = ctx.cfg.or(transient, "transient", DEFAULT_TRANSIENT)?;
            let rep = lyapunov_spectrum(&p, s0, n, transient, &SafetyBox::default())?;
            ctx.emit(|w| {
                writeln!(w, "lambda1,lambda2,lambda3,steps,escape_step")?;
                write_row(
                    w,
                    &[
                        num(rep.exponents[0]),
                        num(rep.exponents[1]),
                        num(rep.exponents[2]),
                        rep.steps.to_string(),
                        rep.escape.map(|e| e.step.to_string()).unwrap_or_default(),
                    ],
                )
            })?;
            Ok(EXIT_OK)
        }
        Command::Bifurcate {
            alpha_range,
            samples,
            start,
            record,
            transient,
        } => {
            let p = ctx.params()?;
            let [lo, hi] = floats::<2>(
                &ctx.cfg.or(alpha_range, "alpha_range", "1,17".into())?,
                "--alpha-range",
            )?;
            let samples = ctx.cfg.or(samples, "samples", 200)?;
            let policy = match (ctx.cfg.get(start, "start")?, ctx.cuboid_opt()?) {
                (Some(s), _) => StartPolicy::Fixed(State::from_array(floats::<3>(&s, "--start")?)),
                (None, Some(b)) => StartPolicy::RandomInBox {
                    cuboid: b,
                    seed: ctx.cfg.or(g.seed, "seed", 0)?,
                },
                (None, None) => StartPolicy::NashOffset(1e-3),
            };
            let mut opts = ScanOptions::default();
            opts.record = ctx.cfg.or(record, "record", opts.record)?;
            opts.transient = ctx.cfg.or(transient, "transient", opts.transient)?;
            let table = bifurcation_scan(&p, lo, hi, samples, &policy, &opts)?;
            ctx.emit(|w| table.write_csv(w))?;
            Ok(EXIT_OK)
        }
        Command::DemoLogistic { mu } => {
            let mu = ctx.cfg.or(mu, "mu", 3.88)?;
            let rep = logistic_sap_demo(mu);
            ctx.emit_json(&rep)?;
            Ok(EXIT_OK)
        }
    }
}

/// Runs the command line `args` (program name first). Data goes to `--out`
/// or `stdout`; diagnostics go to `stderr`. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut (dyn Write + Send), stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    EXIT_OK
                }
                _ => EXIT_USAGE,
            };
        }
    };
    let result = (|| -> std::result::Result<i32, Failure> {
        let cfg = Settings::load(cli.global.config.as_deref())?;
        let threads = cfg.get(cli.global.threads, "threads")?;
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads {
            if n == 0 {
                return Err(usage("--threads must be positive"));
            }
            builder = builder.num_threads(n);
        }
        let pool = builder.build().map_err(|e| Failure {
            code: EXIT_FAILURE,
            message: e.to_string(),
        })?;
        let mut ctx = Ctx {
            g: &cli.global,
            cfg,
            stdout,
        };
        pool.install(|| dispatch(cli.command, &mut ctx))
    })();
    match result {
        Ok(code) => code,
        Err(f) => {
            if !f.message.is_empty() {
                let _ = writeln!(stderr, "error: {}", f.message);
            }
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(
            std::iter::once("triopoly").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn closed_output_is_not_an_error() {
        struct Closed;
        impl Write for Closed {
            fn write(&mut self, _: &[u8]) -> std::io::Result<usize> {
                Err(std::io::ErrorKind::BrokenPipe.into())
            }
            fn flush(&mut self) -> std::io::Result<()> {
                Ok(())
            }
        }
        let mut err = Vec::new();
        let args = [
            "triopoly",
            "lyapunov",
            "--params",
            "0.4,0.55,0.6,9",
            "--steps",
            "10",
        ];
        assert_eq!(run(args, &mut Closed, &mut err), EXIT_OK);
        assert!(err.is_empty());
    }

    #[test]
    fn certify_preset_passes() {
        let (code, out, _) = run_capture(&["certify", "--preset", "paper", "--engine", "analytic"]);
        assert_eq!(code, EXIT_OK);
        let cert: Certificate = serde_json::from_str(&out).unwrap();
        assert_eq!(cert.records.len(), 10);
    }

    #[test]
    fn certify_thin_box_is_falsified() {
        let (code, out, _) = run_capture(&[
            "certify",
            "--params",
            "0.4,0.55,0.6,17",
            "--box",
            "0.5766666668,0.6316666668,0.3366666668,0.4516666668,0,0.38",
            "--engine",
            "analytic",
        ]);
        assert_eq!(code, EXIT_FALSIFIED);
        assert!(out.contains("\"falsified\""));
    }

    #[test]
    fn missing_box_is_a_usage_error() {
        let (code, out, err) = run_capture(&["certify", "--params", "0.4,0.55,0.6,17"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(out.is_empty());
        assert!(err.contains("Usage"), "{err}");
        let (code, _, _) = run_capture(&["certify", "--preset", "paper-raw"]);
        assert_eq!(code, EXIT_USAGE);
        let (code, _, _) = run_capture(&["frobnicate"]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn slow_regime_is_inapplicable() {
        let (code, _, _) = run_capture(&[
            "certify",
            "--preset",
            "paper",
            "--params",
            "0.4,0.55,0.6,1",
            "--engine",
            "analytic",
        ]);
        assert_eq!(code, EXIT_INCONCLUSIVE);
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.conf");
        std::fs::write(&cfg, "# reference setup\nparams = 0.4,0.55,0.6,17\nbox = 0.5766666668,0.6316666668,0.3366666668,0.4516666668,0,0.38\nengine = analytic\n").unwrap();
        let c = cfg.to_str().unwrap();
        assert_eq!(run_capture(&["certify", "--config", c]).0, EXIT_FALSIFIED);
        assert_eq!(
            run_capture(&[
                "certify",
                "--config",
                c,
                "--preset",
                "paper",
                "--box",
                "0.5766666668,0.6316666668,0.3366666668,0.4516666668,0,0.3951779684"
            ])
            .0,
            EXIT_OK
        );
        std::fs::write(&cfg, "colour = blue\n").unwrap();
        assert_eq!(run_capture(&["certify", "--config", c]).0, EXIT_USAGE);
    }

    #[test]
    fn seeded_runs_are_byte_identical() {
        let args = [
            "search",
            "--preset",
            "paper",
            "--around",
            "0.05",
            "--budget",
            "500",
            "--seed",
            "4",
            "--threads",
            "2",
        ];
        let (c1, a, _) = run_capture(&args);
        let (c2, b, _) = run_capture(&args);
        assert_eq!((c1, c2), (EXIT_OK, EXIT_OK));
        assert_eq!(a, b);
        assert!(a.lines().last().unwrap().contains("\"summary\""));
    }

    #[test]
    fn dynamics_commands_emit_csv() {
        let (code, out, _) = run_capture(&[
            "simulate",
            "--params",
            "0.4,0.55,0.6,1",
            "--steps",
            "5",
            "--transient",
            "0",
        ]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(out.lines().count(), 6);
        let (code, out, _) =
            run_capture(&["lyapunov", "--params", "0.4,0.55,0.6,9", "--steps", "2000"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.starts_with("lambda1,"));
        let (code, out, _) = run_capture(&[
            "bifurcate",
            "--params",
            "0.4,0.55,0.6,17",
            "--alpha-range",
            "2,8",
            "--samples",
            "4",
            "--record",
            "3",
            "--transient",
            "100",
        ]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(out.lines().count(), 5);
        assert!(out.starts_with("alpha,escape_step,lyap1,z0,z1,z2"));
    }

    #[test]
    fn logistic_demo_prints_json() {
        let (code, out, _) = run_capture(&["demo-logistic", "--mu", "4.5"]);
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(v["first_iterate"]["verified"].as_bool().unwrap());
    }

    #[test]
    fn periodic_word_and_conflicting_flags() {
        let (code, out, _) = run_capture(&["periodic", "--preset", "paper", "--word", "01"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.lines().nth(1).unwrap().starts_with("01,"));
        let (code, _, _) = run_capture(&[
            "periodic", "--preset", "paper", "--word", "01", "--max-k", "2",
        ]);
        assert_eq!(code, EXIT_USAGE);
    }
}
