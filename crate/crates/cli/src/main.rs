use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use cnls::diagnostics::write_report;
use cnls::dichotomy::{geometry_for, run_dichotomy, DichotomyConfig};
use cnls::evolve::{evolve, SimConfig};
use cnls::grid::{read_snapshot, write_snapshot};
use cnls::ground_state::{k_data_length, make_k_data, threshold_m};
use cnls::littlewood_paley::{correlation, extract_bubble};
use cnls::variational::verify_variational;

mod schemas;

#[derive(Parser)]
#[command(
    name = "cnls",
    version,
    about = "Radial simulator and variational toolkit for i u_t + Δu = -|u|^4 u + |u|^2 u"
)]
struct Cli {
    /// Print progress to stderr; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Threshold m from the ground state, with its certificate.
    #[command(after_long_help = schemas::GROUND_STATE)]
    GroundState {
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Functional report of a field snapshot.
    #[command(after_long_help = schemas::FUNCTIONALS)]
    Functionals {
        /// Snapshot CSV with columns r,re,im.
        #[arg(long)]
        input: PathBuf,
        /// Output directory; the report goes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cut-off ground-state data on either side of K = 0.
    #[command(after_long_help = schemas::MAKE_DATA)]
    MakeData(MakeDataArgs),
    /// Seeded random-field suite for the variational inequalities.
    #[command(after_long_help = schemas::VERIFY_VARIATIONAL)]
    VerifyVariational {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Number of random fields.
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        count: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evolve one configured initial datum.
    #[command(after_long_help = schemas::EVOLVE)]
    Evolve(EvolveArgs),
    /// Sweep of eps on both sides of the constraint.
    #[command(after_long_help = schemas::DICHOTOMY)]
    Dichotomy(DichotomyArgs),
    /// One bubble-extraction step on a field snapshot.
    #[command(after_long_help = schemas::PROFILES)]
    Profiles {
        #[arg(long)]
        input: PathBuf,
        /// Known bubble snapshot to correlate the extracted profile with.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct MakeDataArgs {
    #[arg(long, allow_hyphen_values = true)]
    eps: f64,
    /// Cut-off radius; the smallest admissible one when omitted.
    #[arg(long = "R")]
    radius: Option<f64>,
    /// Domain radius in units of |eps|^3.
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvolveArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config entry, as do the flags below.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    dt0: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    output_every: Option<usize>,
}

#[derive(Args)]
struct DichotomyArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated eps values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    eps: Option<Vec<f64>>,
    /// Parallel runs; 0 means one per core.
    #[arg(long)]
    workers: Option<usize>,
    /// Base step in units of |eps|^6.
    #[arg(long)]
    dt0: Option<f64>,
}

/// Bad invocation: exit code 2.
#[derive(Debug)]
struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn read_config_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))
}

/// Config errors are the caller's fault, so they map to usage.
fn config_error(e: cnls::Error) -> anyhow::Error {
    match e {
        cnls::Error::Config(_) | cnls::Error::Parse(_) => usage(e.to_string()),
        other => other.into(),
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn create_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

struct Log(u8);

impl Log {
    fn info(&self, msg: impl AsRef<str>) {
        if self.0 > 0 {
            eprintln!("{}", msg.as_ref());
        }
    }
}

#[derive(Serialize)]
struct BubbleSummary {
    nu: f64,
    k_star: Option<u32>,
    r_star: Option<f64>,
    h: f64,
    correlation_if_reference_given: Option<f64>,
    remainder_nu: f64,
}

fn run(cli: Cli) -> Result<()> {
    let log = Log(cli.verbose);
    match cli.command {
        Command::GroundState { out } => {
            create_out(&out)?;
            let cert = threshold_m()?;
            log.info(format!("m = {} (quadrature {})", cert.m_closed_form, cert.m_quadrature));
            write_json(&out.join("threshold.json"), &cert)?;
        }
        Command::Functionals { input, out } => {
            let field = read_snapshot(&input)?;
            let report = cnls::functional_report(&field)?;
            match out {
                Some(dir) => {
                    create_out(&dir)?;
                    write_json(&dir.join("functionals.json"), &report)?;
                }
                None => println!("{}", serde_json::to_string_pretty(&report)?),
            }
        }
        Command::MakeData(a) => {
            if !(a.eps.abs() > 0.0 && a.eps.abs() <= 0.25) {
                return Err(usage(format!("--eps {} outside 0 < |eps| <= 0.25", a.eps)));
            }
            let g = geometry_for(a.eps);
            let lambda = k_data_length(a.eps);
            let grid =
                cnls::make_grid(a.r_max.unwrap_or(g.r_max) * lambda, a.n.unwrap_or(g.n)).map_err(config_error)?;
            let data = make_k_data(a.eps, a.radius, &grid)?;
            log.info(format!("eps = {}: R = {}, {}", data.eps, data.cutoff_radius, data.classification));
            create_out(&a.out)?;
            write_snapshot(&data.field, a.out.join("field.csv"))?;
            write_json(&a.out.join("report.json"), &data)?;
        }
        Command::VerifyVariational { seed, count, out } => {
            let report = verify_variational(seed, count as usize)?;
            create_out(&out)?;
            write_json(&out.join("variational.json"), &report)?;
            if !report.all_hard_pass {
                let failed: Vec<&str> =
                    report.lemmas.iter().filter(|l| l.hard && l.violations() > 0).map(|l| l.name.as_str()).collect();
                return Err(
                    cnls::Error::InternalConsistency(format!("hard checks failed: {}", failed.join(", "))).into()
                );
            }
        }
        Command::Evolve(a) => {
            let text = read_config_text(&a.config)?;
            let mut cfg: SimConfig =
                serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", a.config.display())))?;
            if let Some(s) = a.seed {
                cfg.seed = s;
            }
            if let Some(t) = a.t_end {
                cfg.t_end = t;
            }
            if let Some(d) = a.dt0 {
                cfg.dt0 = d;
            }
            if let Some(r) = a.r_max {
                cfg.grid.r_max = r;
            }
            if let Some(n) = a.n {
                cfg.grid.n = n;
            }
            if let Some(e) = a.output_every {
                cfg.output_every = e;
            }
            cfg.validate().map_err(config_error)?;
            let field = cfg.initial_field()?;
            let (record, verdict) = evolve(&field, &cfg)?;
            log.info(format!("{:?} after {} samples: {}", verdict.kind, record.len(), verdict.reason));
            write_report(&record, &verdict, &a.out)?;
        }
        Command::Dichotomy(a) => {
            let mut cfg = match &a.config {
                Some(p) => DichotomyConfig::from_json(&read_config_text(p)?).map_err(config_error)?,
                None => DichotomyConfig::default(),
            };
            if let Some(e) = a.eps {
                cfg.eps_list = e;
            }
            if let Some(w) = a.workers {
                cfg.workers = w;
            }
            if let Some(d) = a.dt0 {
                cfg.dt0 = d;
            }
            cfg.validate().map_err(config_error)?;
            let summary = run_dichotomy(&cfg, Some(&a.out))?;
            for e in &summary.entries {
                log.info(format!("eps = {:+}: {} -> {:?}", e.eps, e.classification, e.verdict));
            }
        }
        Command::Profiles { input, reference, out } => {
            let field = read_snapshot(&input)?;
            let report = extract_bubble(&field)?;
            let corr = match reference {
                Some(p) => {
                    let r = read_snapshot(&p)?;
                    if r.grid().n() != field.grid().n() || r.grid().r_max() != field.grid().r_max() {
                        return Err(usage("reference is not on the input grid"));
                    }
                    let r = cnls::RadialField::new(field.grid().clone(), r.into_values())?;
                    Some(correlation(&report.bubble, &r))
                }
                None => None,
            };
            create_out(&out)?;
            write_json(
                &out.join("bubble.json"),
                &BubbleSummary {
                    nu: report.besov.value,
                    k_star: report.besov.k_star,
                    r_star: report.besov.r_star,
                    h: report.h,
                    correlation_if_reference_given: corr,
                    remainder_nu: report.remainder_besov.value,
                },
            )?;
            write_snapshot(&report.profile, out.join("profile.csv"))?;
            write_snapshot(&report.remainder, out.join("remainder.csv"))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Some(u) = e.downcast_ref::<Usage>() {
                eprintln!("error: {u}");
                return ExitCode::from(2);
            }
            let kind = e.downcast_ref::<cnls::Error>().map_or("other", |c| c.kind());
            let obj = serde_json::json!({ "error": kind, "message": format!("{e:#}") });
            eprintln!("{obj}");
            ExitCode::from(1)
        }
    }
}
