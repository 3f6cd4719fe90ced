//! The `bathkit` command-line front end.
//!
//! Every subcommand writes CSV to stdout (or to files for `eta --output-dir`),
//! diagnostics to stderr, and returns an exit code: 0 on success, 2 for usage
//! errors, 3 when an input fails validation and 4 when a computation fails.

pub mod spec;
pub mod table;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::bcf::{
    alpha_powerlaw_closed_form, alpha_series, converge_series, default_grid, relative_sup_error, sample_quadrature,
    spectral_density_from_series, uniform_grid, AlphaSamples,
};
use crate::error::{Error, Result};
use crate::fit::{incremental_fit, FitConfig, FitResult};
use crate::influence::{eta_strang, eta_trotter, quapi_correct, reorganization_energy, EtaGrid, Splitting};
use crate::model::{ExponentialSeries, SpectralDensity, ThermalContext};
use crate::pade::{pade_parameters, Statistics};

use spec::{parse_splitting, ProblemSpec};
use table::{num, read_complex_columns, read_file, read_rows, read_series, series_rows, write_table, SERIES_HEADER};

/// Convergence tolerance for analytic series when none is given.
const DEFAULT_SERIES_TOL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "bathkit", version, about = "Bath response functions as sums of exponentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StatArg {
    Be,
    Fd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Series,
    Quadrature,
    Closed,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SplittingArg {
    Trotter,
    Strang,
}

#[derive(Debug, clap::Args)]
struct ThermalArgs {
    /// Inverse temperature.
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Padé poles and residues of the Bose or Fermi function.
    Pade {
        #[arg(long, value_enum)]
        stat: StatArg,
        #[arg(long)]
        order: usize,
        #[command(flatten)]
        thermal: ThermalArgs,
    },
    /// Samples α(t) on a uniform grid.
    Alpha {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        tmax: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long, value_enum)]
        method: Option<Method>,
        /// Fixed Padé order instead of converging to the tolerance.
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Fits a sum of exponentials to α(t).
    Fit {
        #[arg(long, conflicts_with = "alpha_file", required_unless_present = "alpha_file")]
        spec: Option<PathBuf>,
        #[arg(long)]
        alpha_file: Option<PathBuf>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        kmax: Option<usize>,
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tmax: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Spectral density implied by an exponential series.
    Jw {
        #[arg(long)]
        series: PathBuf,
        #[arg(long)]
        wmax: f64,
        #[arg(long)]
        points: usize,
        #[command(flatten)]
        thermal: ThermalArgs,
    },
    /// Discretized influence functional coefficients.
    Eta {
        #[arg(long)]
        series: PathBuf,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        /// Default: the spec's `task.splitting`, else trotter.
        #[arg(long, value_enum)]
        splitting: Option<SplittingArg>,
        /// Add the QUAPI diagonal counter term; needs `--spec` or `--lambda`.
        #[arg(long)]
        quapi: bool,
        /// Supplies `dt`, `steps` and `splitting` from `[task]`, and λ for `--quapi`.
        #[arg(long, conflicts_with = "lambda")]
        spec: Option<PathBuf>,
        #[arg(long, requires = "quapi")]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
        /// Write diag.csv, lag.csv and boundary.csv here instead of stdout.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Reorganization energy.
    Lambda {
        #[arg(long)]
        spec: PathBuf,
    },
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let outcome = match thread_pool() {
        Ok(Some(pool)) => {
            let (mut o, mut e) = (Vec::new(), Vec::new());
            let r = pool.install(|| dispatch(cli.command, &mut o, &mut e));
            let _ = stdout.write_all(&o);
            let _ = stderr.write_all(&e);
            r
        }
        Ok(None) => dispatch(cli.command, stdout, stderr),
        Err(e) => Err(e),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            match e {
                Error::InvalidInput { .. } => 3,
                _ => 4,
            }
        }
    }
}

fn thread_pool() -> Result<Option<rayon::ThreadPool>> {
    let Ok(v) = std::env::var("BATHKIT_THREADS") else {
        return Ok(None);
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::invalid("BATHKIT_THREADS", "must be a positive integer"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map(Some)
        .map_err(|e| Error::invalid("BATHKIT_THREADS", e.to_string()))
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Pade { stat, order, thermal } => cmd_pade(stat, order, &thermal, out),
        Command::Alpha {
            spec,
            tmax,
            points,
            method,
            order,
            tol,
        } => {
            let spec = ProblemSpec::from_path(&spec)?;
            let t = grid_for(&spec, tmax, points)?;
            let density = spec.require_density()?;
            let opts = SeriesChoice {
                order: order.or(spec.task.pade_order),
                tol: positive("tol", tol.or(spec.task.tolerance).unwrap_or(DEFAULT_SERIES_TOL))?,
            };
            let alpha = sample_alpha(density, &spec.thermal, &t, method, &opts, err)?;
            let rows = t.iter().zip(&alpha).map(|(t, a)| vec![num(*t), num(a.re), num(a.im)]);
            write_table(out, "output", &[], &["t [time]", "Re alpha", "Im alpha"], rows)
        }
        Command::Fit {
            spec,
            alpha_file,
            k,
            kmax,
            weights,
            seed,
            tmax,
            points,
        } => cmd_fit(spec, alpha_file, k, kmax, weights, seed, tmax, points, out, err),
        Command::Jw {
            series,
            wmax,
            points,
            thermal,
        } => {
            let ctx = ThermalContext::new(thermal.beta, thermal.hbar)?;
            let series = load_series(&series)?;
            let w = uniform_grid(wmax, points).map_err(|e| rename(e, "tmax", "wmax"))?;
            let j = w
                .iter()
                .map(|&w| spectral_density_from_series(&series, &ctx, w))
                .collect::<Result<Vec<_>>>()?;
            let rows = w.iter().zip(&j).map(|(w, j)| vec![num(*w), num(*j)]);
            write_table(out, "output", &[], &["omega [1/time]", "J [energy]"], rows)
        }
        Command::Eta {
            series,
            dt,
            steps,
            splitting,
            quapi,
            spec,
            lambda,
            hbar,
            output_dir,
        } => {
            let series = load_series(&series)?;
            let spec = spec.map(|p| ProblemSpec::from_path(&p)).transpose()?;
            let task = spec.as_ref().map(|s| s.task.clone()).unwrap_or_default();
            let dt = dt.or(task.dt).ok_or_else(|| Error::invalid("dt", "missing"))?;
            let steps = steps.or(task.steps).ok_or_else(|| Error::invalid("steps", "missing"))?;
            let splitting = match (splitting, &task.splitting) {
                (Some(SplittingArg::Trotter), _) => Splitting::Trotter,
                (Some(SplittingArg::Strang), _) => Splitting::Strang,
                (None, Some(s)) => parse_splitting(s)?,
                (None, None) => Splitting::Trotter,
            };
            let mut grid = match splitting {
                Splitting::Trotter => eta_trotter(&series, dt, steps)?,
                Splitting::Strang => eta_strang(&series, dt, steps)?,
            };
            if quapi {
                let (lambda, ctx) = match (spec, lambda) {
                    (Some(spec), _) => (reorganization_energy(spec.require_density()?)?, spec.thermal),
                    (None, Some(l)) => (l, ThermalContext::new(1.0, hbar)?),
                    (None, None) => return Err(Error::invalid("quapi", "needs --spec or --lambda")),
                };
                if !lambda.is_finite() {
                    return Err(Error::invalid("lambda", "must be finite"));
                }
                grid = quapi_correct(&grid, lambda, &ctx);
            }
            write_eta(&grid, output_dir.as_deref(), out)
        }
        Command::Lambda { spec } => {
            let spec = ProblemSpec::from_path(&spec)?;
            let l = reorganization_energy(spec.require_density()?)?;
            writeln!(out, "{}", num(l)).map_err(|e| Error::invalid("output", e.to_string()))
        }
    }
}

fn rename(e: Error, from: &str, to: &str) -> Error {
    match e {
        Error::InvalidInput { field, reason } if field == from => Error::invalid(to, reason),
        other => other,
    }
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::invalid(field, "must be positive"))
    }
}

fn load_series(path: &Path) -> Result<ExponentialSeries> {
    let s = read_series(&read_file(path, "series")?, "series")?;
    if s.is_empty() {
        return Err(Error::invalid("series", "no terms"));
    }
    Ok(s)
}

fn cmd_pade(stat: StatArg, order: usize, thermal: &ThermalArgs, out: &mut dyn Write) -> Result<()> {
    let ctx = ThermalContext::new(thermal.beta, thermal.hbar)?;
    let stat = match stat {
        StatArg::Be => Statistics::BoseEinstein,
        StatArg::Fd => Statistics::FermiDirac,
    };
    let p = pade_parameters(order, stat, &ctx)?;
    let rows = (0..p.order).map(|j| {
        vec![
            num(p.xi[j]),
            num(p.weights[j]),
            p.zeta.get(j).map(|&z| num(z)).unwrap_or_default(),
        ]
    });
    let comments = vec![format!("{stat:?} order {order}, beta*hbar = {}", num(p.beta_hbar))];
    write_table(out, "output", &comments, &["xi [1/time]", "Xi", "zeta [1/time]"], rows)
}

fn grid_for(spec: &ProblemSpec, tmax: Option<f64>, points: Option<usize>) -> Result<Vec<f64>> {
    let tmax = tmax.or(spec.task.t_max).unwrap_or(5.0 * spec.thermal.beta_hbar());
    uniform_grid(tmax, points.or(spec.task.points).unwrap_or(201))
}

struct SeriesChoice {
    order: Option<usize>,
    tol: f64,
}

/// `α(t)` by the requested method. Without one, Lorentzian families use a
/// Padé series, integer-exponent power laws the closed form and everything
/// else quadrature.
fn sample_alpha(
    density: &SpectralDensity,
    ctx: &ThermalContext,
    t: &[f64],
    method: Option<Method>,
    opts: &SeriesChoice,
    err: &mut dyn Write,
) -> Result<Vec<Complex64>> {
    let method = method.unwrap_or(match density {
        SpectralDensity::PowerLaw(pl) if pl.stretch() == 1.0 && pl.exponent().fract() == 0.0 => Method::Closed,
        d if d.lorentzian_terms().is_some() => Method::Series,
        _ => Method::Quadrature,
    });
    match method {
        Method::Quadrature => sample_quadrature(density, ctx, t),
        Method::Closed => match density {
            SpectralDensity::PowerLaw(pl) => t.iter().map(|&t| alpha_powerlaw_closed_form(pl, ctx, t)).collect(),
            _ => Err(Error::invalid("method", "the closed form needs a power_law density")),
        },
        Method::Series => {
            if density.lorentzian_terms().is_none() {
                return Err(Error::invalid("method", "series need a gldd, tgldd or mt density"));
            }
            match validated_series(density, ctx, opts) {
                Ok(s) => Ok(t.iter().map(|&t| s.eval(t)).collect()),
                Err(Fallback(e)) => {
                    let _ = writeln!(err, "warning: {e}; using quadrature");
                    sample_quadrature(density, ctx, t)
                }
            }
        }
    }
}

struct Fallback(Error);

/// The Padé series, checked against quadrature on the default grid. Meier-Tannor
/// series are always checked; a fixed order for the other families is
/// trusted. Errors that quadrature can recover from come back as
/// [`Fallback`].
fn validated_series(
    density: &SpectralDensity,
    ctx: &ThermalContext,
    opts: &SeriesChoice,
) -> std::result::Result<ExponentialSeries, Fallback> {
    let mut grid = default_grid(ctx);
    // α(0) diverges for gLDD.
    if matches!(density, SpectralDensity::Gldd(_)) {
        grid.remove(0);
    }
    let mt = matches!(density, SpectralDensity::MeierTannor(_));
    match opts.order {
        Some(n) => {
            let s = alpha_series(density, ctx, n).map_err(Fallback)?;
            if mt {
                let reference = sample_quadrature(density, ctx, &grid).map_err(Fallback)?;
                let e = relative_sup_error(&s, &grid, &reference);
                if !(e <= opts.tol) {
                    return Err(Fallback(Error::Accuracy {
                        achieved: e,
                        requested: opts.tol,
                    }));
                }
            }
            Ok(s)
        }
        None => converge_series(density, ctx, opts.tol, Some(&grid))
            .map(|(s, _)| s)
            .map_err(Fallback),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_fit(
    spec: Option<PathBuf>,
    alpha_file: Option<PathBuf>,
    k: Option<usize>,
    kmax: Option<usize>,
    weights: Option<PathBuf>,
    seed: Option<u64>,
    tmax: Option<f64>,
    points: Option<usize>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<()> {
    let spec = spec.map(|p| ProblemSpec::from_path(&p)).transpose()?;
    let task = spec.as_ref().map(|s| s.task.clone()).unwrap_or_default();
    let k = k.or(task.k).unwrap_or(1);
    let kmax = kmax.or(task.k_max).unwrap_or(k);
    if k == 0 {
        return Err(Error::invalid("k", "must be at least 1"));
    }
    if kmax < k {
        return Err(Error::invalid("kmax", "must be at least k"));
    }

    let alpha_file = alpha_file.or(task.alpha_file.clone());
    let samples = match (&spec, alpha_file) {
        (_, Some(path)) => {
            let (t, a) = read_complex_columns(&read_file(&path, "alpha_file")?, "alpha_file")?;
            AlphaSamples::new(t, a, None).map_err(|e| rename(rename(e, "t", "alpha_file"), "alpha", "alpha_file"))?
        }
        (Some(spec), None) => {
            let density = spec.require_density()?;
            let mut t = grid_for(spec, tmax, points)?;
            if matches!(density, SpectralDensity::Gldd(_)) {
                t.remove(0);
            }
            let opts = SeriesChoice {
                order: task.pade_order,
                tol: task.tolerance.unwrap_or(DEFAULT_SERIES_TOL),
            };
            let a = sample_alpha(density, &spec.thermal, &t, None, &opts, err)?;
            AlphaSamples::new(t, a, None)?
        }
        (None, None) => return Err(Error::invalid("alpha_file", "need --spec or --alpha-file")),
    };

    let samples = match weights.or(task.weights_file) {
        None => samples,
        Some(path) => {
            let rows = read_rows(&read_file(&path, "weights")?, "weights")?;
            let w = rows
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    r.last()
                        .copied()
                        .flatten()
                        .ok_or_else(|| Error::invalid("weights", format!("row {}: missing weight", i + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            samples.with_weights(w)?
        }
    };

    let config = FitConfig {
        k,
        rng_seed: seed.or(task.seed).unwrap_or(0),
        ..FitConfig::default()
    };
    let ladder = incremental_fit(&samples, kmax, &config)?;
    let chosen: &FitResult = ladder.get(k - 1).unwrap_or_else(|| ladder.last().unwrap());
    let mut comments = vec![
        format!("K = {}", chosen.series.len()),
        format!("rms = {}", num(chosen.rms_residual)),
        format!("converged = {}", chosen.converged),
    ];
    for r in &ladder {
        comments.push(format!(
            "ladder K = {} rms = {} iterations = {}",
            r.series.len(),
            num(r.rms_residual),
            r.iterations
        ));
    }
    write_table(out, "output", &comments, &SERIES_HEADER, series_rows(&chosen.series))
}

fn eta_rows(grid: &EtaGrid) -> [(&'static str, Vec<Vec<String>>); 3] {
    let c = |v: Complex64| [num(v.re), num(v.im)];
    let diag = grid
        .diagonal()
        .into_iter()
        .enumerate()
        .map(|(k, v)| [vec![k.to_string(), k.to_string()], c(v).to_vec()].concat())
        .collect();
    let lag = grid
        .lag_kernel()
        .iter()
        .enumerate()
        .map(|(m, &v)| [vec![(m + 1).to_string(), "0".into()], c(v).to_vec()].concat())
        .collect();
    let mut boundary = Vec::new();
    if let Some(b) = grid.boundary() {
        let n = grid.steps();
        boundary.push([vec![n.to_string(), "0".into()], c(b.eta_n0).to_vec()].concat());
        for (i, &v) in b.eta_k0.iter().enumerate() {
            boundary.push([vec![(i + 1).to_string(), "0".into()], c(v).to_vec()].concat());
        }
        for (i, &v) in b.eta_nk.iter().enumerate() {
            boundary.push([vec![n.to_string(), (i + 1).to_string()], c(v).to_vec()].concat());
        }
    }
    [("diag", diag), ("lag", lag), ("boundary", boundary)]
}

/// Tables of `(k, k′, Re η, Im η)`. The lag table lists `(m, 0)`, the
/// interior coefficient for lag `m`.
fn write_eta(grid: &EtaGrid, dir: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    const HEADER: [&str; 4] = ["k", "kp", "Re eta", "Im eta"];
    let strang = grid.boundary().is_some();
    for (name, rows) in eta_rows(grid) {
        if name == "boundary" && !strang {
            continue;
        }
        match dir {
            Some(dir) => {
                let path = dir.join(format!("{name}.csv"));
                let mut f = std::fs::File::create(&path)
                    .map_err(|e| Error::invalid("output_dir", format!("{}: {e}", path.display())))?;
                write_table(&mut f, "output_dir", &[], &HEADER, rows)?;
            }
            None => write_table(out, "output", &[name.to_string()], &HEADER, rows)?,
        }
    }
    Ok(())
}
