//! Command-line front end for `sl2approx`.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 hypothesis violation
//! (`det != 1`, `delta = 0`, rational `beta/delta`), 3 run failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::json;

use sl2approx::arith::ApproxReal;
use sl2approx::boxdet::{solve, Backend, BoxDetProblem};
use sl2approx::cf::{expand, ExpandMode};
use sl2approx::config::{load_matrix, parse_exponent, parse_horizon, parse_rational, RunConfig};
use sl2approx::rate::{bound_constant, fit_slope, RateSample, XAxis};
use sl2approx::theorem1::{approximate, ApproxResult, NuOutcome, PipelineOptions, TargetSpec};
use sl2approx::theorem2::{approximate_uniform, PsiFunction};
use sl2approx::{Error, RealSpec};

const SOLVE_BOX_BITS: u32 = 256;

#[derive(Parser, Debug)]
#[command(name = "sl2approx", version, about = "Integer points of SL2(R) orbits near a target")]
struct Cli {
    /// Starting working precision in bits.
    #[arg(long, global = true)]
    precision_bits: Option<u32>,
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convergents of beta/delta, one `nu p q` per line.
    Cf {
        #[arg(long, allow_hyphen_values = true)]
        beta: String,
        #[arg(long, allow_hyphen_values = true)]
        delta: String,
        #[arg(long)]
        count: usize,
        /// Accept a rational ratio (finite expansion).
        #[arg(long)]
        allow_rational: bool,
    },
    /// Solve xy - zw = 1 in the box around (A1, -rho A1, B1, -rho B1).
    SolveBox {
        #[arg(long, allow_hyphen_values = true)]
        a1: String,
        #[arg(long, allow_hyphen_values = true)]
        b1: String,
        #[arg(long)]
        rho: String,
        #[arg(long)]
        q: String,
        #[arg(long)]
        r: String,
        #[arg(long)]
        backend: Option<String>,
    },
    /// Sweep over a range of convergent indices (CSV).
    Approximate(SweepArgs),
    /// One solution with 1 <= |t| <= T under a psi lower bound (JSON).
    ApproximateUniform {
        #[command(flatten)]
        io: MatrixArgs,
        #[arg(long)]
        psi: Option<String>,
        #[arg(long = "T")]
        horizon: Option<String>,
        #[arg(long)]
        r: Option<String>,
        #[arg(long)]
        backend: Option<String>,
    },
    /// Sweep plus a log-log slope fit and the recorded constant.
    RateScan {
        #[command(flatten)]
        sweep: SweepArgs,
        /// x axis of the fit: `t` (|t|) or `q` (q_{nu+1}).
        #[arg(long, default_value = "t")]
        axis: String,
    },
}

#[derive(Args, Debug)]
struct MatrixArgs {
    #[arg(long)]
    source: Option<PathBuf>,
    #[arg(long)]
    target: Option<PathBuf>,
    /// Write the primary output here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    io: MatrixArgs,
    #[arg(long)]
    nu_from: Option<usize>,
    #[arg(long)]
    nu_to: Option<usize>,
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    backend: Option<String>,
}

/// A failure with its exit code and message.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = if e.is_hypothesis_violation() {
            2
        } else {
            match e {
                Error::InvalidSpec(..) | Error::InvalidParameter(_) | Error::Io { .. } => 1,
                _ => 3,
            }
        };
        let message = match e {
            Error::DeltaZero | Error::RationalRatio | Error::NotUnimodular { .. } => {
                format!("hypothesis violated: {e}")
            }
            _ => e.to_string(),
        };
        Failure { code, message }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Run the command line `args` (including the program name), writing the
/// primary output to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut buf = Vec::new();
    let res = dispatch(&cli, &mut buf, err);
    let written = match (&res, output_path(&cli)) {
        (Ok(()), Some(path)) => std::fs::write(&path, &buf)
            .map_err(|e| usage(format!("{}: {e}", path.display()))),
        _ => out.write_all(&buf).map_err(|e| usage(e.to_string())),
    };
    match res.and(written) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn config(cli: &Cli) -> std::result::Result<RunConfig, Failure> {
    match &cli.config {
        Some(p) => Ok(RunConfig::from_file(p)?),
        None => Ok(RunConfig::default()),
    }
}

fn output_path(cli: &Cli) -> Option<PathBuf> {
    let io = match &cli.command {
        Command::Approximate(s) => &s.io,
        Command::RateScan { sweep, .. } => &sweep.io,
        Command::ApproximateUniform { io, .. } => io,
        _ => return None,
    };
    io.output
        .clone()
        .or_else(|| config(cli).ok().and_then(|c| c.output))
}

fn real(s: &str) -> std::result::Result<RealSpec, Failure> {
    if let Ok(spec) = s.parse::<RealSpec>() {
        return Ok(spec);
    }
    Ok(RealSpec::Rational(parse_rational(s)?))
}

fn dispatch(cli: &Cli, out: &mut Vec<u8>, err: &mut dyn Write) -> Outcome {
    let cfg = config(cli)?;
    match &cli.command {
        Command::Cf {
            beta,
            delta,
            count,
            allow_rational,
        } => {
            let mode = if *allow_rational {
                ExpandMode::AllowRational
            } else {
                ExpandMode::Irrational
            };
            let cs = expand(&real(beta)?, &real(delta)?, *count, mode)?;
            for c in cs {
                let _ = writeln!(out, "{} {} {}", c.nu, c.p, c.q);
            }
            Ok(())
        }
        Command::SolveBox {
            a1,
            b1,
            rho,
            q,
            r,
            backend,
        } => {
            let eval = |s: &str| -> std::result::Result<ApproxReal, Failure> { Ok(real(s)?.eval(SOLVE_BOX_BITS)?) };
            let backend: Backend = backend.as_deref().unwrap_or("auto").parse()?;
            let (r, warn) = parse_exponent(r)?;
            if let Some(w) = warn {
                let _ = writeln!(err, "{w}");
            }
            let p = BoxDetProblem::literal(eval(a1)?, eval(b1)?, eval(rho)?, parse_rational(q)?, r)?;
            match solve(&p, backend) {
                Ok(Some(s)) => {
                    let _ = writeln!(out, "{} {} {} {} {}", s.x, s.y, s.z, s.w, s.backend);
                    Ok(())
                }
                Ok(None) => {
                    let _ = writeln!(out, "NOT_FOUND");
                    Ok(())
                }
                Err(e @ Error::NoPrimeInInterval { .. }) => {
                    let _ = writeln!(out, "NOT_FOUND");
                    Err(e.into())
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Approximate(s) => {
            let outcomes = sweep(cli, &cfg, s, err)?;
            write_csv(out, &outcomes);
            finish_sweep(&outcomes)
        }
        Command::RateScan { sweep: s, axis } => {
            let axis: XAxis = axis.parse()?;
            let outcomes = sweep(cli, &cfg, s, err)?;
            write_csv(out, &outcomes);
            finish_sweep(&outcomes)?;
            let samples: Vec<RateSample> = successes(&outcomes).map(RateSample::from_result).collect();
            let fit = fit_slope(&samples, axis)?;
            let r = sweep_r(&cfg, s)?.to_f64().unwrap_or(f64::NAN);
            let exponent = match axis {
                XAxis::TAbs => (r - 1.0) / (r + 1.0),
                XAxis::QNext => r - 1.0,
            };
            let c = bound_constant(&samples, exponent, axis)?;
            let _ = writeln!(out, "slope={:.6} C={:.6} n={}", fit.slope, c, fit.n);
            Ok(())
        }
        Command::ApproximateUniform {
            io,
            psi,
            horizon,
            r,
            backend,
        } => {
            let (a, xi) = matrices(&cfg, io)?;
            let psi: PsiFunction = pick(psi, &cfg.psi, "--psi")?.parse()?;
            let horizon = parse_horizon(&pick(horizon, &cfg.horizon, "--T")?)?;
            let opts = options(cli, &cfg, r, backend, err)?;
            let res = approximate_uniform(&a, &xi, &psi, &horizon, &opts)?;
            for w in &res.warnings {
                let _ = writeln!(err, "warning: {w}");
            }
            let [l11, l12, l21, l22] = res.result.gamma.entries();
            let g = |n: &BigInt| json!(n.to_string());
            let doc = json!({
                "t": res.result.t.to_f64(),
                "gamma": [[g(l11), g(l12)], [g(l21), g(l22)]],
                "error": res.result.error.upper().to_f64(),
                "bound": res.bound.upper().to_f64(),
                "constant_C": res.constant_c.upper().to_f64(),
                "backend": res.result.backend.to_string(),
            });
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json values serialize"));
            Ok(())
        }
    }
}

fn pick(flag: &Option<String>, file: &Option<String>, name: &str) -> std::result::Result<String, Failure> {
    flag.clone()
        .or_else(|| file.clone())
        .ok_or_else(|| usage(format!("missing {name}")))
}

fn matrices(cfg: &RunConfig, io: &MatrixArgs) -> std::result::Result<(sl2approx::lattice::Mat2R, TargetSpec), Failure> {
    let src = io
        .source
        .clone()
        .or_else(|| cfg.source.clone())
        .ok_or_else(|| usage("missing --source"))?;
    let tgt = io
        .target
        .clone()
        .or_else(|| cfg.target.clone())
        .ok_or_else(|| usage("missing --target"))?;
    Ok((load_matrix(&src)?, TargetSpec::new(load_matrix(&tgt)?)))
}

fn options(
    cli: &Cli,
    cfg: &RunConfig,
    r: &Option<String>,
    backend: &Option<String>,
    err: &mut dyn Write,
) -> std::result::Result<PipelineOptions, Failure> {
    let (r, warn) = parse_exponent(&pick(r, &cfg.r, "--r")?)?;
    if let Some(w) = warn {
        let _ = writeln!(err, "{w}");
    }
    let backend: Backend = match backend {
        Some(b) => b.parse()?,
        None => cfg.backend()?,
    };
    let mut opts = PipelineOptions::new(r).with_backend(backend);
    opts.precision_bits = cli.precision_bits.or(cfg.precision_bits);
    Ok(opts)
}

fn sweep_r(cfg: &RunConfig, s: &SweepArgs) -> std::result::Result<BigRational, Failure> {
    Ok(parse_exponent(&pick(&s.r, &cfg.r, "--r")?)?.0)
}

fn sweep(cli: &Cli, cfg: &RunConfig, s: &SweepArgs, err: &mut dyn Write) -> std::result::Result<Vec<NuOutcome>, Failure> {
    let (a, xi) = matrices(cfg, &s.io)?;
    let from = s.nu_from.or(cfg.nu_from).ok_or_else(|| usage("missing --nu-from"))?;
    let to = s.nu_to.or(cfg.nu_to).ok_or_else(|| usage("missing --nu-to"))?;
    if from > to {
        return Err(usage(format!("--nu-from {from} exceeds --nu-to {to}")));
    }
    let opts = options(cli, cfg, &s.r, &s.backend, err)?;
    let outcomes = approximate(&a, &xi, from..=to, &opts)?;
    for o in &outcomes {
        if let Err(e) = &o.result {
            let _ = writeln!(err, "nu={}: {e}", o.nu);
        }
    }
    Ok(outcomes)
}

fn successes(outcomes: &[NuOutcome]) -> impl Iterator<Item = &ApproxResult> {
    outcomes.iter().filter_map(|o| o.result.as_ref().ok())
}

fn write_csv(out: &mut Vec<u8>, outcomes: &[NuOutcome]) {
    let _ = writeln!(out, "nu,q_next,t,error,backend,l11,l12,l21,l22");
    for r in successes(outcomes) {
        let [l11, l12, l21, l22] = r.gamma.entries();
        let _ = writeln!(
            out,
            "{},{},{:e},{:e},{},{l11},{l12},{l21},{l22}",
            r.nu,
            r.q_next,
            r.t.to_f64(),
            r.error.upper().to_f64(),
            r.backend,
        );
    }
}

/// A sweep in which no index succeeded is a run failure.
fn finish_sweep(outcomes: &[NuOutcome]) -> Outcome {
    if successes(outcomes).next().is_none() {
        return Err(Failure {
            code: 3,
            message: "no index in the range produced a solution".into(),
        });
    }
    Ok(())
}
