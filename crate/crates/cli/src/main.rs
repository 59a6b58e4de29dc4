use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use padyn_core::digraph::{self, ErgodicVerdict, MpVerdict};
use padyn_core::global::{self, GlobalAnswer, Goal};
use padyn_core::parse::{self, DomainSpec};
use padyn_core::scaling;
use padyn_core::{AnalysisOptions, CompactDomain, Dynamics, Error, Prime, RationalMap};

mod render;

/// Dynamics of rational maps on compact open subsets of the p-adic numbers.
#[derive(Debug, Parser)]
#[command(name = "padyn", version, allow_negative_numbers = true)]
struct Cli {
    /// The prime p.
    #[arg(short = 'p', long = "prime")]
    prime: u64,

    /// Rational map in x, e.g. "(x^2 - 1)/x".
    #[arg(long)]
    map: String,

    /// Domain: Zp and B(c,t) combined with + and -, or Qp.
    #[arg(long)]
    domain: Option<String>,

    /// Extra levels checked below the intrinsic level.
    #[arg(long, default_value_t = 2)]
    margin: u32,

    /// Depth cap for root-freeness descents.
    #[arg(long, default_value_t = 32)]
    cap: u32,

    /// Largest number of balls in one decomposition.
    #[arg(long, default_value_t = 1_000_000)]
    ball_cap: usize,

    /// Levels scanned when the derivative may vanish on the domain.
    #[arg(long, default_value_t = 8)]
    scan_depth: u32,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GoalArg {
    Minimality,
    Ergodicity,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Local scaling behavior and the scalar profile.
    Classify,
    /// Uniform scaling radius exponent l.
    Radius,
    /// Level digraph G(f, p^t).
    Digraph {
        #[arg(long, allow_negative_numbers = true)]
        level: i64,
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Subsidiary digraph G*(f, p^t) with per-edge bounds.
    Subsidiary {
        #[arg(long, allow_negative_numbers = true)]
        level: i64,
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Largest level where G* = G.
    IntrinsicLevel,
    /// Measure preservation on the domain.
    Mp,
    /// Ergodicity scan down to a depth.
    Ergodic {
        #[arg(long, allow_negative_numbers = true)]
        depth: i64,
    },
    /// Minimal components at a level and their verdicts.
    Components {
        #[arg(long, allow_negative_numbers = true)]
        level: i64,
    },
    /// Invertible local isometry and measure preservation on Qp.
    Global,
    /// Lift a root of the polynomial given by --map.
    Hensel {
        #[arg(long, allow_negative_numbers = true)]
        seed: String,
        #[arg(long, default_value_t = 12)]
        precision: u32,
    },
    /// A region showing f is not minimal or not ergodic on Qp.
    Witness {
        #[arg(long, value_enum)]
        goal: GoalArg,
        /// Sample points are given to this level.
        #[arg(long, default_value_t = -4, allow_negative_numbers = true)]
        depth: i64,
        #[arg(long, default_value_t = 256)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Result of a command: the report text and whether the verdict was decided.
struct Outcome {
    text: String,
    decided: bool,
}

impl Outcome {
    fn decided(text: String) -> Self {
        Outcome {
            text,
            decided: true,
        }
    }
}

fn compact_domain(text: Option<&str>, prime: Prime) -> anyhow::Result<CompactDomain> {
    let Some(text) = text else {
        bail!("this command needs --domain");
    };
    match parse::parse_domain(text, prime).context("invalid --domain")? {
        DomainSpec::Compact(d) => Ok(d),
        DomainSpec::Global => bail!("this command needs a compact domain, not Qp"),
    }
}

/// Writes via a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot write in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path)
        .map_err(|e| e.error)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn export(
    g: &padyn_core::LevelDigraph,
    dot: Option<&Path>,
    json: Option<&Path>,
) -> anyhow::Result<()> {
    if let Some(path) = dot {
        write_atomic(path, &digraph::to_dot(g))?;
    }
    if let Some(path) = json {
        write_atomic(path, &digraph::to_json(g))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let prime = Prime::new(cli.prime)?;
    let opts = AnalysisOptions {
        depth_cap: cli.cap,
        margin: cli.margin,
        ball_cap: cli.ball_cap,
        scan_depth: cli.scan_depth,
    };
    if let Command::Hensel { seed, precision } = &cli.command {
        let f = parse::parse_polynomial(&cli.map).context("invalid --map")?;
        let seed = parse::parse_rational(seed).context("invalid --seed")?;
        let r = padyn_core::padic::hensel_lift(prime, &f, &seed, *precision)?;
        return Ok(Outcome::decided(render::hensel(prime, &f, &r)));
    }
    let f: RationalMap = parse::parse_map(&cli.map, prime).context("invalid --map")?;

    match &cli.command {
        Command::Classify => {
            let x = compact_domain(cli.domain.as_deref(), prime)?;
            let report = scaling::classify(&f, &x, &opts)?;
            Ok(Outcome::decided(render::classification(&report)))
        }
        Command::Radius => {
            let x = compact_domain(cli.domain.as_deref(), prime)?;
            let report = scaling::scaling_radius(&f, &x, &opts)?;
            Ok(Outcome::decided(render::radius(prime, &report)))
        }
        Command::Digraph { level, dot, json } => {
            let dy = Dynamics::new(&f, &compact_domain(cli.domain.as_deref(), prime)?, opts)?;
            let g = dy.digraph(*level)?;
            export(&g, dot.as_deref(), json.as_deref())?;
            Ok(Outcome::decided(render::digraph(&g)))
        }
        Command::Subsidiary { level, dot, json } => {
            let dy = Dynamics::new(&f, &compact_domain(cli.domain.as_deref(), prime)?, opts)?;
            let g = dy.subsidiary(*level)?;
            export(&g, dot.as_deref(), json.as_deref())?;
            Ok(Outcome::decided(render::subsidiary(&g)))
        }
        Command::IntrinsicLevel => {
            let dy = Dynamics::new(&f, &compact_domain(cli.domain.as_deref(), prime)?, opts)?;
            let t0 = dy.intrinsic_level()?;
            Ok(Outcome::decided(format!(
                "intrinsic level {} (G* = G verified down to level {})\n",
                t0.level, t0.verified_down_to
            )))
        }
        Command::Mp => {
            let dy = Dynamics::new(&f, &compact_domain(cli.domain.as_deref(), prime)?, opts)?;
            let v = dy.mp_check()?;
            Ok(Outcome {
                decided: !matches!(v, MpVerdict::Undecided { .. }),
                text: render::mp(&v),
            })
        }
        Command::Ergodic { depth } => {
            let dy = Dynamics::new(&f, &compact_domain(cli.domain.as_deref(), prime)?, opts)?;
            let v = dy.ergodic_check(*depth)?;
            Ok(Outcome {
                decided: matches!(v, ErgodicVerdict::NotErgodic { .. }),
                text: render::ergodic(&v),
            })
        }
        Command::Components { level } => {
            let dy = Dynamics::new(&f, &compact_domain(cli.domain.as_deref(), prime)?, opts)?;
            let parts = dy.components(*level)?;
            let decided = parts
                .iter()
                .all(|c| !matches!(c.verdict, digraph::ComponentVerdict::Undecided { .. }));
            Ok(Outcome {
                decided,
                text: render::components(&parts),
            })
        }
        Command::Global => {
            if let Some(text) = &cli.domain {
                if parse::parse_domain(text, prime).context("invalid --domain")?
                    != DomainSpec::Global
                {
                    bail!("global analysis runs on Qp; pass --domain Qp or omit it");
                }
            }
            let iso = global::global_inv_iso_check(&f, &opts)?;
            let mp = global::global_mp_check(&f, &opts)?;
            let decided =
                iso.answer != GlobalAnswer::Undecided && mp.answer != GlobalAnswer::Undecided;
            Ok(Outcome {
                decided,
                text: render::global(&iso, &mp),
            })
        }
        Command::Witness {
            goal,
            depth,
            samples,
            seed,
        } => {
            let goal = match goal {
                GoalArg::Minimality => Goal::Minimality,
                GoalArg::Ergodicity => Goal::Ergodicity,
            };
            let w = global::global_obstruction(&f, goal, &opts)?;
            let check = global::verify_witness(&f, &w, *depth, *samples, *seed);
            if !check.holds() {
                bail!(
                    "witness {:?} at level {} fails at sampled point {}",
                    w.kind,
                    w.level,
                    padyn_core::padic::fmt_rational(
                        check.counterexample.as_ref().expect("failing sample")
                    )
                );
            }
            Ok(Outcome::decided(render::witness(prime, &w, &check, *depth)))
        }
        Command::Hensel { .. } => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, which would read as "undecided"
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.text);
            if out.decided {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if let Some(hint) = e.downcast_ref::<Error>().and_then(render::hint) {
                eprintln!("note: {hint}");
            }
            ExitCode::FAILURE
        }
    }
}
