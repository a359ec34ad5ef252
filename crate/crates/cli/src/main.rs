use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use lowdeg::bias::{bias_mc, bias_report_exact, disperser_audit, extractor_audit};
use lowdeg::constructions::{build_evasive_h, build_seeded, build_two_source, EvasiveDescriptor};
use lowdeg::experiment::{run, ExperimentConfig};
use lowdeg::oracles::{
    additive_energy, cw_shift_count, disperser_attack, energy_partition, family_of_two_block,
    family_tables, monochromatic_sumset_search, subspace_evasive_exhaustive, sumset_evasive_audit,
    ExplicitSet, Graph,
};
use lowdeg::ranklab::{eval_rank, full_rank_check};
use lowdeg::{stream, BitVector, Polynomial, Source, Verdict};

#[derive(Parser)]
#[command(
    name = "lowdeg",
    version,
    about = "Low-degree GF(2) extractors: constructions, audits and attacks"
)]
struct Cli {
    /// Master seed for every randomized command.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a uniform polynomial of degree at most d.
    SamplePoly {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
    },
    /// Bias of a polynomial under a source, exact or sampled.
    Bias {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long)]
        source: PathBuf,
        /// Estimate from this many samples instead of computing exactly.
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
    },
    /// Rank of eval_d over a point set, or the full-rank check of a sumset.
    Rank {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        d: usize,
        /// Second set: check full eval_d rank of set + other.
        #[arg(long)]
        other: Option<PathBuf>,
    },
    /// Extractor or disperser audit of polynomials over a list of sources.
    Audit {
        #[arg(long = "poly", required = true)]
        polys: Vec<PathBuf>,
        #[arg(long = "source", required = true)]
        sources: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = AuditMode::Extractor)]
        mode: AuditMode,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
    },
    /// Build a construction descriptor.
    #[command(subcommand)]
    Construct(Construct),
    /// Run an adversarial or brute-force oracle.
    #[command(subcommand)]
    Oracle(Oracle),
    /// Run a named batch experiment.
    Experiment {
        name: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        trials: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AuditMode {
    Extractor,
    Disperser,
}

#[derive(Subcommand)]
enum Construct {
    /// Degree-2 two-source extractor with r output bits.
    TwoSource {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: Option<usize>,
    },
    /// Seeded extractor from a Reed-Muller code and a random map.
    Seeded {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        d: usize,
    },
    /// Random polynomial map whose graph is sumset-evasive.
    Evasive {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        r: usize,
    },
}

#[derive(Args)]
struct Pair {
    #[arg(long)]
    x: PathBuf,
    #[arg(long)]
    y: PathBuf,
}

#[derive(Subcommand)]
enum Oracle {
    /// Additive energy of X and Y.
    Energy(Pair),
    /// Split X and Y into 2^t parts with bounded sum fibers.
    Partition {
        #[command(flatten)]
        sets: Pair,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        ell: usize,
        #[arg(long, default_value_t = 100)]
        retries: u64,
    },
    /// Count shifts of f that vanish on a subspace.
    Cw {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long)]
        basis: PathBuf,
    },
    /// Disperser attack on the family f_y = f(., y) of a polynomial over 2n
    /// variables, or on an explicit family file.
    Attack {
        #[arg(long, conflicts_with = "family", required_unless_present = "family")]
        poly: Option<PathBuf>,
        #[arg(long)]
        family: Option<PathBuf>,
        #[arg(long)]
        t: usize,
        #[arg(long, default_value_t = 1000)]
        budget: u64,
    },
    /// Search for a monochromatic sumset A + B.
    SumsetSearch {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
    },
    /// Subspace-evasiveness of a set (exhaustive), or sumset-evasiveness of
    /// a set or an evasive descriptor's image (randomized search).
    EvasiveAudit {
        #[arg(
            long,
            conflicts_with = "descriptor",
            required_unless_present = "descriptor"
        )]
        set: Option<PathBuf>,
        #[arg(long)]
        descriptor: Option<PathBuf>,
        /// Subspace dimension for the subspace audit.
        #[arg(long)]
        ell: Option<usize>,
        #[arg(long, default_value_t = 2)]
        threshold: usize,
        /// Sumset search for A, B of size 2^t.
        #[arg(long)]
        t: Option<usize>,
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_poly(path: &Path) -> Result<Polynomial> {
    Polynomial::from_json(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn read_source(path: &Path) -> Result<Source> {
    Source::from_json(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

/// A JSON array of vector strings, or one vector per line (`#` comments).
fn read_set(path: &Path) -> Result<Vec<BitVector>> {
    let text = read(path)?;
    if text.trim_start().starts_with('[') {
        return serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()));
    }
    text.lines()
        .enumerate()
        .map(|(i, l)| (i, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            l.parse()
                .with_context(|| format!("{} line {}", path.display(), i + 1))
        })
        .collect()
}

struct Output {
    body: String,
    verdict: Option<Verdict>,
}

fn json<T: Serialize>(v: &T) -> Output {
    Output {
        body: serde_json::to_string_pretty(v).expect("serializable"),
        verdict: None,
    }
}

fn json_csv<T: Serialize>(v: &T, format: Format) -> Result<Output> {
    if format == Format::Csv {
        bail!("this command only writes JSON");
    }
    Ok(json(v))
}

fn seed(cli_seed: Option<u64>) -> Result<u64> {
    cli_seed.context("--seed is required for randomized commands")
}

fn dispatch(cli: &Cli) -> Result<Output> {
    let format = cli.format;
    match &cli.command {
        Command::SamplePoly { n, d } => {
            let f = lowdeg::anf::sample_poly(*n, *d, &mut stream(seed(cli.seed)?))?;
            if format == Format::Csv {
                bail!("sample-poly only writes JSON");
            }
            Ok(Output {
                body: f.to_json(),
                verdict: None,
            })
        }
        Command::Bias {
            poly,
            source,
            samples,
            delta,
        } => {
            let (f, s) = (read_poly(poly)?, read_source(source)?);
            let report = match samples {
                Some(n) => bias_mc(&f, &s, *n, *delta, &mut stream(seed(cli.seed)?))?,
                None => bias_report_exact(&f, &s)?,
            };
            if format == Format::Csv {
                let exact = report
                    .exact
                    .as_ref()
                    .map(|e| e.0.to_string())
                    .unwrap_or_default();
                let hw = report.halfwidth.map(|h| h.to_string()).unwrap_or_default();
                return Ok(Output {
                    body: format!(
                        "bias,exact,samples,halfwidth\n{},{exact},{},{hw}\n",
                        report.bias,
                        report.samples.unwrap_or(0)
                    ),
                    verdict: None,
                });
            }
            Ok(json(&report))
        }
        Command::Rank { set, d, other } => {
            let a = read_set(set)?;
            match other {
                None => json_csv(&eval_rank(&a, *d)?, format),
                Some(path) => {
                    let (full, cert) = full_rank_check(&a, &read_set(path)?, *d)?;
                    let mut out = json_csv(
                        &serde_json::json!({"full_rank": full, "certificate": cert}),
                        format,
                    )?;
                    out.verdict = Some(Verdict::from_bool(full));
                    Ok(out)
                }
            }
        }
        Command::Audit {
            polys,
            sources,
            mode,
            epsilon,
        } => {
            let fs: Vec<Polynomial> = polys.iter().map(|p| read_poly(p)).collect::<Result<_>>()?;
            let ss: Vec<Source> = sources
                .iter()
                .map(|p| read_source(p))
                .collect::<Result<_>>()?;
            let report = match mode {
                AuditMode::Extractor => extractor_audit(&fs, &ss, *epsilon)?,
                AuditMode::Disperser => {
                    if fs.len() != 1 {
                        bail!("disperser audits take exactly one polynomial");
                    }
                    disperser_audit(&fs[0], &ss)?
                }
            };
            Ok(Output {
                body: if format == Format::Csv {
                    report.to_csv()
                } else {
                    report.to_json()
                },
                verdict: Some(report.verdict),
            })
        }
        Command::Construct(c) => {
            let s = seed(cli.seed)?;
            match c {
                Construct::TwoSource { n, r } => json_csv(&build_two_source(*n, *r, s)?, format),
                Construct::Seeded { n, t, d } => json_csv(&build_seeded(*n, *t, *d, s)?, format),
                Construct::Evasive { k, d, r } => {
                    json_csv(&build_evasive_h(*k, *d, *r, s)?, format)
                }
            }
        }
        Command::Oracle(o) => oracle(o, cli, format),
        Command::Experiment {
            name,
            config,
            trials,
        } => {
            let mut cfg = match config {
                Some(path) => ExperimentConfig::from_json(&read(path)?)
                    .with_context(|| format!("parsing {}", path.display()))?,
                None => ExperimentConfig::new(name, seed(cli.seed)?),
            };
            if &cfg.experiment != name {
                bail!(
                    "config names experiment `{}` but `{name}` was requested",
                    cfg.experiment
                );
            }
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            if cli.workers.is_some() {
                cfg.workers = cli.workers;
            }
            if trials.is_some() {
                cfg.trials = *trials;
            }
            let report = run(&cfg)?;
            Ok(Output {
                body: if format == Format::Csv {
                    report.to_csv()
                } else {
                    report.to_json()
                },
                verdict: Some(report.verdict),
            })
        }
    }
}

fn oracle(o: &Oracle, cli: &Cli, format: Format) -> Result<Output> {
    match o {
        Oracle::Energy(Pair { x, y }) => {
            let e = additive_energy(&read_set(x)?, &read_set(y)?)?;
            json_csv(&serde_json::json!({"energy": e.to_string()}), format)
        }
        Oracle::Partition {
            sets,
            t,
            ell,
            retries,
        } => {
            let p = energy_partition(
                &read_set(&sets.x)?,
                &read_set(&sets.y)?,
                *t,
                *ell,
                &mut stream(seed(cli.seed)?),
                *retries,
            )?;
            json_csv(&p, format)
        }
        Oracle::Cw { poly, basis } => {
            let r = cw_shift_count(&read_poly(poly)?, &read_set(basis)?)?;
            let mut out = json_csv(&r, format)?;
            out.verdict = Some(r.verdict);
            Ok(out)
        }
        Oracle::Attack {
            poly,
            family,
            t,
            budget,
        } => {
            let fam = match (poly, family) {
                (Some(p), _) => family_of_two_block(&read_poly(p)?)?,
                (None, Some(path)) => {
                    let files: Vec<serde_json::Value> = serde_json::from_str(&read(path)?)
                        .with_context(|| format!("parsing {}", path.display()))?;
                    files
                        .iter()
                        .map(|v| Polynomial::from_json(&v.to_string()))
                        .collect::<lowdeg::Result<_>>()?
                }
                (None, None) => unreachable!("clap requires one"),
            };
            let (n, tables) = family_tables(&fam)?;
            let s = seed(cli.seed)?;
            let mut w = disperser_attack(&tables, n, *t, *budget, &mut stream(s))?;
            w.seed = Some(s);
            let mut out = json_csv(&w, format)?;
            out.verdict = Some(Verdict::from_bool(w.verified));
            Ok(out)
        }
        Oracle::SumsetSearch { poly, size, budget } => {
            let s = seed(cli.seed)?;
            let found =
                monochromatic_sumset_search(&read_poly(poly)?, *size, *budget, &mut stream(s))?
                    .map(|mut w| {
                        w.seed = Some(s);
                        w
                    });
            json_csv(
                &serde_json::json!({"found": found.is_some(), "witness": found}),
                format,
            )
        }
        Oracle::EvasiveAudit {
            set,
            descriptor,
            ell,
            threshold,
            t,
            budget,
        } => {
            let report = match (set, descriptor, ell, t) {
                (Some(path), _, Some(ell), None) => subspace_evasive_exhaustive(&read_set(path)?, *ell, *threshold)?,
                (Some(path), _, None, Some(t)) => {
                    let s = ExplicitSet::new(read_set(path)?)?;
                    sumset_evasive_audit(&s, *t, *budget, &mut stream(seed(cli.seed)?))?
                }
                (None, Some(path), None, Some(t)) => {
                    let h: EvasiveDescriptor = serde_json::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
                    sumset_evasive_audit(&Graph(&h), *t, *budget, &mut stream(seed(cli.seed)?))?
                }
                _ => bail!("give --set with --ell (subspace audit), or --set/--descriptor with --t (sumset audit)"),
            };
            let mut out = json_csv(&report, format)?;
            out.verdict = Some(report.verdict);
            Ok(out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if w == 0
            || rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build_global()
                .is_err()
        {
            eprintln!("error: invalid worker count {w}");
            return ExitCode::from(2);
        }
    }
    let out = match dispatch(&cli) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let mut body = out.body;
    if !body.ends_with('\n') {
        body.push('\n');
    }
    match &cli.out {
        Some(path) => {
            if let Err(e) = fs::write(path, &body) {
                eprintln!("error: writing {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{body}"),
    }
    match out.verdict {
        Some(Verdict::Fail) => ExitCode::from(1),
        _ => ExitCode::SUCCESS,
    }
}
