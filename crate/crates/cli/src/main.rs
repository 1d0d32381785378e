use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use furstenberg::affine::{read_planes, write_planes, Dims};
use furstenberg::experiment::bounds::{bounds_csv, bounds_table, s_grid};
use furstenberg::experiment::{
    build_incidence, build_tuple_nets, generate, verify_lower_chain, verify_upper_chain,
    ExperimentConfig, Generator, IncidenceReport,
};
use furstenberg::greedy::{
    derive_params, greedy_select, lipschitz_constant, neighborhood_constant, witness_simplex,
    MassMap,
};
use furstenberg::net_measure::{box_dimension_estimate, default_fit_range, CubeSet, DyadicCube, FitRange};
use furstenberg::separated_nets::{build_epsilon_net, covering_radius_check, NetRequest, NetSidecar};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "furstenberg", version, about = "Discretized Furstenberg-set experiments")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
struct DimArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
}

impl DimArgs {
    fn dims(self) -> Result<Dims> {
        Ok(Dims::new(self.n, self.k)?)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a sharp example: a cube set and its planes.
    Gen {
        #[command(flatten)]
        dims: DimArgs,
        /// Cantor set inside a flat (needs --alpha).
        #[arg(long, conflicts_with = "product", required_unless_present = "product")]
        flat: bool,
        /// Cube times Cantor set (needs --s).
        #[arg(long)]
        product: bool,
        #[arg(long, required_if_eq("flat", "true"))]
        alpha: Option<f64>,
        #[arg(long, required_if_eq("product", "true"))]
        s: Option<f64>,
        #[arg(long, default_value_t = 1)]
        m_flat: usize,
        #[arg(long)]
        l: u32,
        #[arg(long, default_value_t = 256)]
        max_planes: usize,
        /// Cube set file (stdout if absent).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Plane file.
        #[arg(long)]
        planes: Option<PathBuf>,
    },
    /// Box-dimension fit of a cube set file.
    Dim {
        input: PathBuf,
        /// Levels `lmin:lmax` used in the fit.
        #[arg(long)]
        fit_range: Option<FitRange>,
    },
    /// Build the ε-net for cubes at level --l (or side --delta) around the
    /// given points and measure its covering radius.
    Net {
        #[command(flatten)]
        dims: DimArgs,
        /// Comma-separated point, once per cube.
        #[arg(long = "point", required = true, num_args = 1)]
        points: Vec<String>,
        #[arg(long, conflicts_with = "delta", required_unless_present = "delta")]
        l: Option<u32>,
        /// Cube side; the points are then used as centers.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Plane file for the net members.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Greedy selection on a mass-map file.
    Greedy {
        #[arg(long)]
        mass_file: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        /// Ambient dimension for the Lipschitz constant (default k + 1).
        #[arg(long)]
        n: Option<usize>,
    },
    /// Count the incidence set and write the report as JSON.
    Incidence {
        #[command(flatten)]
        dims: DimArgs,
        #[arg(long, group = "source")]
        flat: bool,
        #[arg(long, group = "source")]
        product: bool,
        /// Use --set and --planes files.
        #[arg(long, group = "source", requires_all = ["set", "planes"])]
        custom: bool,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long, default_value_t = 1)]
        m_flat: usize,
        #[arg(long)]
        l: u32,
        /// Qualifying mass (default 1/l²).
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 256)]
        max_planes: usize,
        #[arg(long)]
        set: Option<PathBuf>,
        #[arg(long)]
        planes: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CSV of the lower bounds f, g and the construction h.
    Bounds {
        #[command(flatten)]
        dims: DimArgs,
        #[arg(long, default_value_t = 0.5)]
        step: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run both counting chains on an incidence report.
    Check { report: PathBuf },
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    ))
}

fn emit(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    writeln!(out, "{text}")?;
    out.flush()?;
    Ok(())
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    emit(&serde_json::to_string_pretty(value)?)
}

/// A closed downstream pipe is not an error for a command-line filter.
fn broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<io::Error>()
            .is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe)
            || matches!(c.downcast_ref::<furstenberg::Error>(), Some(furstenberg::Error::Io(io)) if io.kind() == io::ErrorKind::BrokenPipe)
    })
}

fn parse_point(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|x| x.trim().parse::<f64>().with_context(|| format!("bad coordinate {x:?}")))
        .collect()
}

fn config(
    dims: Dims,
    generator: Generator,
    alpha: Option<f64>,
    s: Option<f64>,
    l: u32,
    seed: u64,
) -> Result<ExperimentConfig> {
    Ok(match generator {
        Generator::SharpFlat => {
            let alpha = alpha.context("--flat needs --alpha")?;
            ExperimentConfig::sharp_flat(dims, alpha, l, seed)?
        }
        Generator::SharpProduct { m_flat } => {
            let s = s.context("--product needs --s")?;
            ExperimentConfig::sharp_product(dims, m_flat, s, l, seed)?
        }
        Generator::Custom => {
            let alpha = alpha.context("--custom needs --alpha")?;
            let s = s.context("--custom needs --s")?;
            ExperimentConfig::new(dims, alpha, s, l, Generator::Custom, seed)?
        }
    })
}

/// Ok(true) on success, Ok(false) when a check fails.
fn run(cli: Cli) -> Result<bool> {
    let seed = cli.seed;
    match cli.command {
        Command::Gen {
            dims,
            flat,
            alpha,
            s,
            m_flat,
            l,
            max_planes,
            out,
            planes,
            ..
        } => {
            let generator = if flat {
                Generator::SharpFlat
            } else {
                Generator::SharpProduct { m_flat }
            };
            let mut cfg = config(dims.dims()?, generator, alpha, s, l, seed)?;
            cfg.max_planes = max_planes;
            let (set, codes) = generate(&cfg)?;
            log::info!("{} cubes at level {l}, {} planes", set.len(), codes.len());
            let mut w = output(out.as_deref())?;
            set.write_to(&mut w)?;
            w.flush()?;
            if let Some(p) = planes {
                let mut pw = output(Some(&p))?;
                write_planes(&mut pw, &codes)?;
                pw.flush()?;
            }
        }
        Command::Dim { input, fit_range } => {
            let set = CubeSet::read_from(open(&input)?)?;
            let fit = fit_range.unwrap_or_else(|| default_fit_range(set.level()));
            let est = box_dimension_estimate(&set.dyadic_counts(), fit)?;
            emit(&format!("{est:.6}"))?;
        }
        Command::Net {
            dims,
            points,
            l,
            delta,
            trials,
            out,
        } => {
            let dims = dims.dims()?;
            let pts = points.iter().map(|p| parse_point(p)).collect::<Result<Vec<_>>>()?;
            let req = match (l, delta) {
                (Some(l), _) => {
                    let per = (1u64 << l) as f64;
                    let cubes: Vec<DyadicCube> = pts
                        .iter()
                        .map(|p| DyadicCube::new(l, p.iter().map(|&x| (x * per).floor().min(per - 1.0) as i64).collect()))
                        .collect();
                    NetRequest::from_cubes(dims, &cubes)?
                }
                (None, Some(d)) => NetRequest::new(dims, d, pts)?,
                (None, None) => bail!("one of --l or --delta is required"),
            };
            let net = build_epsilon_net(&req)?;
            let covering = covering_radius_check(&net, &req, trials, seed)?;
            if let Some(p) = out {
                let mut w = output(Some(&p))?;
                write_planes(&mut w, &net.codes)?;
                w.flush()?;
            }
            print_json(&json!({
                "net": NetSidecar::new(&req, &net),
                "outside_horizontal": net.outside_horizontal(),
                "covering": covering,
            }))?;
            return Ok(covering.holds());
        }
        Command::Greedy {
            mass_file,
            alpha,
            beta,
            n,
        } => {
            let map = MassMap::read_from(open(&mass_file)?)?;
            let k = map.k();
            let params = derive_params(
                k,
                alpha,
                beta,
                lipschitz_constant(n.unwrap_or(k + 1), k),
                neighborhood_constant(k, alpha),
            )?;
            let sel = greedy_select(&map, &params)?;
            print_json(&json!({
                "params": params,
                "selection": sel,
                "witness_volume": witness_simplex(&sel),
                "dichotomy_holds": sel.dichotomy_holds(beta),
            }))?;
        }
        Command::Incidence {
            dims,
            flat,
            custom,
            alpha,
            s,
            m_flat,
            l,
            lambda,
            max_planes,
            set,
            planes,
            out,
            product,
        } => {
            if !(flat || product || custom) {
                bail!("choose one of --flat, --product or --custom");
            }
            let generator = if flat {
                Generator::SharpFlat
            } else if custom {
                Generator::Custom
            } else {
                Generator::SharpProduct { m_flat }
            };
            let mut cfg = config(dims.dims()?, generator, alpha, s, l, seed)?;
            cfg.max_planes = max_planes;
            if let Some(lambda) = lambda {
                cfg = cfg.with_lambda(lambda)?;
            }
            let (cubes, codes) = match generator {
                Generator::Custom => {
                    let set = set.context("--custom needs --set")?;
                    let planes = planes.context("--custom needs --planes")?;
                    (CubeSet::read_from(open(&set)?)?, read_planes(open(&planes)?)?)
                }
                _ => generate(&cfg)?,
            };
            let report = build_incidence(&cfg, &codes, &cubes)?;
            let mut w = output(out.as_deref())?;
            serde_json::to_writer_pretty(&mut w, &report)?;
            writeln!(w)?;
            w.flush()?;
        }
        Command::Bounds { dims, step, out } => {
            let rows = bounds_table(dims.k, dims.n, &s_grid(dims.k, dims.n, step)?)?;
            let mut w = output(out.as_deref())?;
            w.write_all(bounds_csv(&rows).as_bytes())?;
            w.flush()?;
        }
        Command::Check { report } => {
            let report: IncidenceReport = serde_json::from_reader(open(&report)?)
                .context("parsing the incidence report")?;
            let lower = verify_lower_chain(&report);
            let nets = build_tuple_nets(&report)?;
            let upper = verify_upper_chain(&report, &nets);
            let passed = lower.passed && upper.passed;
            print_json(&json!({ "passed": passed, "lower": lower, "upper": upper }))?;
            return Ok(passed);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("FURSTENBERG_LOG")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
