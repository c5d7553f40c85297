//! Command-line front end: reads JSON parameter files, dispatches to the library
//! and writes JSON or CSV.
//!
//! Exit codes: 0 on success, 2 for bad input (including usage errors and domain
//! violations), 3 for numerical or structural failures. Failures print a JSON
//! diagnostic `{"error": kind, "message": …}` on stderr. Floats are written as
//! C's `%.17g` would, so output is byte-identical across runs and round-trips.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use crate::block_jacobi::{m_from_tail, BlockJacobi, Tail};
use crate::cmv::{discriminant_opuc, PeriodicVerblunsky, VerblunskySeq};
use crate::eigenbounds::{bound_report, random_nevai};
use crate::magic::{apply_poly_jacobi, extract_blocks, magic_residual_cmv, magic_residual_jacobi, thm911_report, JacobiSeq, Sides};
use crate::numerics::herm_eigenvalues;
use crate::periodic_jacobi::{bands, band_integral, discriminant_oprl, floquet_fiber, harmonic_density, periodic_m, PeriodicJacobi};
use crate::sumrules::{c0_terms, default_z_samples, fixture_library, nonlocal_check, p2_sides, step_sum_rules};
use crate::torus::{toda_sample, torus_distances};
use crate::{Error, C64};

#[derive(Debug, Parser)]
#[command(name = "perispec", version, about = "Spectral computations for periodic Jacobi and CMV operators")]
pub struct Cli {
    /// Output format; `bands` and `measure` default to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seed for randomly generated fixtures.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct InArg {
    /// Input JSON file.
    #[arg(long = "in")]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct SeqArgs {
    /// Sequence JSON (Jacobi `{offset,a,b,sides}` or Verblunsky `{offset,alpha,sides}`).
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Periodic background (`{p,a,b}` or `{p,alpha}`).
    #[arg(long)]
    pub j0: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rule {
    P2,
    C0,
    Step,
    Nonlocal,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Discriminant coefficients of a periodic operator.
    Disc(InArg),
    /// Bands of a periodic Jacobi matrix.
    Bands(InArg),
    /// Harmonic-measure density on each band and the band masses.
    Measure {
        #[command(flatten)]
        input: InArg,
        /// Grid points per band.
        #[arg(long, default_value_t = 64)]
        grid: usize,
    },
    /// Eigenvalues of the Floquet fiber at quasimomentum θ.
    Fiber {
        #[command(flatten)]
        input: InArg,
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
    },
    /// Periodic m(E) (input `{p,a,b}`), or M(z) of a block Jacobi matrix (input with `l`).
    M {
        #[command(flatten)]
        input: InArg,
        #[arg(long, allow_hyphen_values = true)]
        re: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        im: f64,
    },
    /// Residual of Δ(J) − (Sᵖ + S⁻ᵖ).
    Magic(SeqArgs),
    /// Upper bounds for the distances d_m and d̃_m to the isospectral torus.
    TorusDist {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long, allow_hyphen_values = true, default_value_t = 1)]
        m: i64,
    },
    /// Toda flow samples of the isospectral torus.
    Toda {
        #[command(flatten)]
        input: InArg,
        #[arg(long, default_value_t = 10.0)]
        t_max: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 10)]
        samples: usize,
    },
    /// Block Jacobi matrix of Δ(J) (consumed by `sumrule` and `bounds`).
    Blocks {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long, value_enum, default_value = "free")]
        tail: TailArg,
    },
    /// Sum-rule sides for a block Jacobi matrix with a free tail.
    Sumrule {
        #[arg(value_enum)]
        rule: Rule,
        /// Block Jacobi JSON; alternatively `--fixture`.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Name from the built-in fixture library.
        #[arg(long)]
        fixture: Option<String>,
    },
    /// Comparison-operator eigenvalue bounds.
    Bounds {
        /// Block Jacobi JSON; without it a random fixture is drawn from `--seed`.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Truncation size in blocks.
        #[arg(long, default_value_t = 80)]
        n: usize,
    },
    /// Partial sums of the six equivalent ℓ² quantities along Δ(J).
    #[command(name = "report-911")]
    Report911 {
        /// Jacobi sequence JSON; alternatively `--beta`.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        j0: Option<PathBuf>,
        /// Use `aₙ = 1 + (−1)ⁿ(n+1)^{−β}`, `bₙ = 0` against the free period-2 background.
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 1024)]
        blocks: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TailArg {
    Free,
    None,
}

enum Output {
    Json(Value),
    Csv(String),
}

fn read_json(path: &Path) -> crate::Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::input(format!("{}: {e}", path.display())))
}

fn parse<T: serde::de::DeserializeOwned>(v: Value, what: &str) -> crate::Result<T> {
    serde_json::from_value(v).map_err(|e| Error::input(format!("not a valid {what}: {e}")))
}

fn to_value(x: &impl Serialize) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn is_opuc(v: &Value) -> bool {
    v.get("alpha").is_some()
}

fn cmat_json(m: &crate::numerics::CMat) -> Value {
    Value::Array(m.to_rows().iter().map(|r| Value::Array(r.iter().map(|z| serde_json::json!([z.re, z.im])).collect())).collect())
}

fn dispatch(cli: &Cli) -> crate::Result<Output> {
    let json_default = |v: Value| Ok(Output::Json(v));
    match &cli.command {
        Command::Disc(a) => {
            let v = read_json(&a.input)?;
            if is_opuc(&v) {
                let d = discriminant_opuc(&parse::<PeriodicVerblunsky>(v, "periodic Verblunsky sequence")?);
                let coeffs: Vec<[f64; 2]> = d.coeffs().iter().map(|z| [z.re, z.im]).collect();
                json_default(serde_json::json!({ "lo": d.lo(), "coeffs": coeffs }))
            } else {
                let d = discriminant_oprl(&parse::<PeriodicJacobi>(v, "periodic Jacobi matrix")?);
                json_default(serde_json::json!({ "coeffs": d.coeffs() }))
            }
        }
        Command::Bands(a) => {
            let j0: PeriodicJacobi = parse(read_json(&a.input)?, "periodic Jacobi matrix")?;
            let bs = bands(&discriminant_oprl(&j0), 1e-12)?;
            match cli.format.unwrap_or(Format::Csv) {
                Format::Json => json_default(to_value(&bs)),
                Format::Csv => {
                    let mut s = String::from("band_lo,band_hi\n");
                    for (lo, hi) in &bs.bands {
                        s += &format!("{},{}\n", fmt_g17(*lo), fmt_g17(*hi));
                    }
                    Ok(Output::Csv(s))
                }
            }
        }
        Command::Measure { input, grid } => {
            let j0: PeriodicJacobi = parse(read_json(&input.input)?, "periodic Jacobi matrix")?;
            if *grid < 1 {
                return Err(Error::input("grid must be positive"));
            }
            let d = discriminant_oprl(&j0);
            let bs = bands(&d, 1e-12)?;
            let mut rows = Vec::new();
            let mut masses = Vec::new();
            for &(lo, hi) in &bs.bands {
                masses.push(band_integral(&d, (lo, hi), |_| 1.0, 1e-12)?);
                for k in 0..*grid {
                    // interior midpoints avoid the inverse-square-root edges
                    let x = lo + (hi - lo) * (k as f64 + 0.5) / *grid as f64;
                    rows.push((x, harmonic_density(&d, x)?));
                }
            }
            match cli.format.unwrap_or(Format::Csv) {
                Format::Json => json_default(serde_json::json!({ "bands": bs.bands, "masses": masses, "density": rows })),
                Format::Csv => {
                    let mut s = String::from("x,density\n");
                    for (x, w) in rows {
                        s += &format!("{},{}\n", fmt_g17(x), fmt_g17(w));
                    }
                    Ok(Output::Csv(s))
                }
            }
        }
        Command::Fiber { input, theta } => {
            let j0: PeriodicJacobi = parse(read_json(&input.input)?, "periodic Jacobi matrix")?;
            let xs = herm_eigenvalues(&floquet_fiber(&j0, *theta))?;
            let d = discriminant_oprl(&j0);
            let defect = xs.iter().map(|&x| (d.eval(x) - 2.0 * theta.cos()).abs()).fold(0.0, f64::max);
            json_default(serde_json::json!({ "theta": theta, "eigenvalues": xs, "disc_defect": defect }))
        }
        Command::M { input, re, im } => {
            let v = read_json(&input.input)?;
            if v.get("l").is_some() {
                let j: BlockJacobi = parse(v, "block Jacobi matrix")?;
                let r = m_from_tail(&j, C64::new(*re, *im))?;
                json_default(serde_json::json!({ "z": [re, im], "e": [r.e.re, r.e.im], "value": cmat_json(&r.value) }))
            } else {
                let j0: PeriodicJacobi = parse(v, "periodic Jacobi matrix")?;
                let m = periodic_m(&j0, C64::new(*re, *im))?;
                json_default(serde_json::json!({ "e": [re, im], "m": [m.re, m.im] }))
            }
        }
        Command::Magic(s) => {
            let (seq, bg) = (read_json(&s.input)?, read_json(&s.j0)?);
            let r = if is_opuc(&seq) {
                magic_residual_cmv(&parse::<VerblunskySeq>(seq, "Verblunsky sequence")?, &parse(bg, "periodic Verblunsky sequence")?)?
            } else {
                magic_residual_jacobi(&parse::<JacobiSeq>(seq, "Jacobi sequence")?, &parse(bg, "periodic Jacobi matrix")?)?
            };
            json_default(to_value(&r))
        }
        Command::TorusDist { seq, m } => {
            let x: JacobiSeq = parse(read_json(&seq.input)?, "Jacobi sequence")?;
            let j0: PeriodicJacobi = parse(read_json(&seq.j0)?, "periodic Jacobi matrix")?;
            let (d, dt) = torus_distances(&x, &j0, *m)?;
            json_default(serde_json::json!({ "m": m, "d": d, "dtilde": dt }))
        }
        Command::Toda { input, t_max, dt, samples } => {
            let j0: PeriodicJacobi = parse(read_json(&input.input)?, "periodic Jacobi matrix")?;
            if *samples == 0 || !(*t_max >= 0.0) {
                return Err(Error::input("need at least one sample and t_max ≥ 0"));
            }
            let times: Vec<f64> = (1..=*samples).map(|k| t_max * k as f64 / *samples as f64).collect();
            json_default(to_value(&toda_sample(&j0, &times, *dt)?))
        }
        Command::Blocks { seq, tail } => {
            let x: JacobiSeq = parse(read_json(&seq.input)?, "Jacobi sequence")?;
            let j0: PeriodicJacobi = parse(read_json(&seq.j0)?, "periodic Jacobi matrix")?;
            let w = apply_poly_jacobi(&x, &discriminant_oprl(&j0).poly)?;
            let tail = if *tail == TailArg::Free { Tail::Free } else { Tail::None };
            let bj = extract_blocks(&w, j0.p(), 1)?.into_block_jacobi(tail)?;
            json_default(to_value(&bj))
        }
        Command::Sumrule { rule, input, fixture } => {
            let j = match (input, fixture) {
                (Some(p), None) => parse::<BlockJacobi>(read_json(p)?, "block Jacobi matrix")?,
                (None, Some(name)) => fixture_library()
                    .into_iter()
                    .find(|(n, _)| n == name)
                    .map(|(_, j)| j)
                    .ok_or_else(|| Error::input(format!("unknown fixture {name}")))?,
                _ => return Err(Error::input("give exactly one of --in and --fixture")),
            };
            match rule {
                Rule::P2 => json_default(to_value(&p2_sides(&j)?)),
                Rule::C0 => json_default(to_value(&c0_terms(&j)?)),
                Rule::Step => json_default(to_value(&step_sum_rules(&j)?)),
                Rule::Nonlocal => json_default(to_value(&nonlocal_check(&j, &default_z_samples())?)),
            }
        }
        Command::Bounds { input, n } => {
            let j = match input {
                Some(p) => parse::<BlockJacobi>(read_json(p)?, "block Jacobi matrix")?,
                None => random_nevai(&mut ChaCha8Rng::seed_from_u64(cli.seed)),
            };
            json_default(serde_json::json!({ "operator": to_value(&j), "report": to_value(&bound_report(&j, *n)?) }))
        }
        Command::Report911 { input, j0, beta, blocks } => {
            let (seq, bg) = match (input, j0, beta) {
                (Some(i), Some(b), None) => (parse::<JacobiSeq>(read_json(i)?, "Jacobi sequence")?, parse(read_json(b)?, "periodic Jacobi matrix")?),
                (None, None, Some(beta)) => (beta_family(*beta, 2 * blocks + 200)?, PeriodicJacobi::free(2)),
                _ => return Err(Error::input("give either --in with --j0, or --beta")),
            };
            json_default(to_value(&thm911_report(&seq, &bg, *blocks)?))
        }
    }
}

/// `aₙ = 1 + (−1)ⁿ(n+1)^{−β}`, `bₙ = 0`, one-sided.
pub fn beta_family(beta: f64, len: usize) -> crate::Result<JacobiSeq> {
    if !(beta > 0.0) {
        return Err(Error::domain(format!("beta must be positive, got {beta}")));
    }
    let a = (1..=len as i64).map(|n| 1.0 + if n % 2 == 0 { 1.0 } else { -1.0 } * ((n + 1) as f64).powf(-beta)).collect();
    JacobiSeq::new(1, a, vec![0.0; len], Sides::One)
}

/// `%.17g`: 17 significant digits with trailing zeros removed.
pub fn fmt_g17(x: f64) -> String {
    if !x.is_finite() {
        return "null".into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.16e}", x);
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let strip = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if (-5..17).contains(&exp) {
        strip(format!("{:.*}", (16 - exp).max(0) as usize, x))
    } else {
        let m = strip(mant.to_string());
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

/// JSON with `%.17g` floats; object keys in sorted order.
pub fn to_json_string(v: &Value) -> String {
    let mut s = String::new();
    write_value(v, &mut s);
    s
}

fn write_value(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => out.push_str(&i.to_string()),
            (_, Some(u)) => out.push_str(&u.to_string()),
            _ => out.push_str(&fmt_g17(n.as_f64().expect("non-integer JSON number is f64"))),
        },
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("strings serialize")),
        Value::Array(a) => {
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(x, out);
            }
            out.push(']');
        }
        Value::Object(m) => {
            out.push('{');
            for (i, (k, x)) in m.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).expect("keys serialize"));
                out.push(':');
                write_value(x, out);
            }
            out.push('}');
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("PERISPEC_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        // a pool built earlier in the process wins; that only happens in tests
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Parses `args` (including the program name), runs the command, and returns
/// the exit code.
pub fn run<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    configure_threads();
    match dispatch(&cli) {
        Ok(Output::Json(v)) => {
            let _ = writeln!(out, "{}", to_json_string(&v));
            0
        }
        Ok(Output::Csv(s)) => {
            let _ = write!(out, "{s}");
            0
        }
        Err(e) => {
            let kind = match e {
                Error::Input(_) => "input",
                Error::Domain(_) => "domain",
                Error::Numeric(_) => "numeric",
                Error::Structural(_) => "structural",
            };
            let diag = serde_json::json!({ "error": kind, "message": e.to_string() });
            let _ = writeln!(err, "{}", to_json_string(&diag));
            if e.is_input() {
                2
            } else {
                3
            }
        }
    }
}
