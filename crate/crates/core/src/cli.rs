//! Command line front end. Every command reads one JSON file and writes one
//! report; exit codes are 0 (all checks pass), 1 (a check failed) and 2
//! (unreadable or malformed input).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::Error;
use crate::json::{
    complex_json, cover_json, pou_json, space_json, BallCoverDoc, BundleDoc, CoverDoc, Loader,
    PouCheckDoc, PouDoc, SelectDoc, SpaceDoc, VectorDoc,
};
use crate::nerve::{canonical_map_check, canonical_map_check_balls, nerve_from_cover, DEFAULT_MAX_DIM};
use crate::pou::{pou_from_metric_cover, subordination_check};
use crate::report::{Checks, InputDigest, RunConfig, VerificationReport};
use crate::scalar::{scalar_from_json, Mode, Rational, Scalar};
use crate::verify;

#[derive(Debug, Parser)]
#[command(name = "unisel", version, about = "Partitions of unity, nerves and selections with checkable certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Arithmetic: exact rationals or f64.
    #[arg(long, global = true, default_value = "exact")]
    pub mode: Mode,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Slack on simplex sums (default 0 exact, 1e-9 float).
    #[arg(long, global = true)]
    pub tol_sum: Option<String>,
    /// Slack on metric axioms.
    #[arg(long, global = true)]
    pub tol_metric: Option<String>,
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_DIM)]
    pub max_dim: usize,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Record wall-clock time in the report (breaks byte-identical output).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a finite space and check the closure axioms.
    SpaceValidate { input: PathBuf },
    /// Semicontinuity classification of a set-valued map.
    MapClassify { input: PathBuf },
    /// Bump partition of unity over a ball cover.
    PouBuild { input: PathBuf },
    /// Validate a partition of unity, optionally against a cover.
    PouVerify { input: PathBuf },
    /// Mather transform of a vector, or of every row of a partition of unity.
    Mather { input: PathBuf },
    /// Witnessed nerve of a cover.
    NerveBuild { input: PathBuf },
    /// Canonical-map conditions of a partition of unity into the nerve.
    CanonicalCheck { input: PathBuf },
    /// ε-selection over grid or listed anchors.
    SelectEps {
        input: PathBuf,
        /// Overrides the document's epsilon.
        #[arg(long)]
        epsilon: Option<String>,
    },
    /// Full invariant suite over an instance bundle.
    VerifyAll { input: PathBuf },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::SpaceValidate { .. } => "space-validate",
            Command::MapClassify { .. } => "map-classify",
            Command::PouBuild { .. } => "pou-build",
            Command::PouVerify { .. } => "pou-verify",
            Command::Mather { .. } => "mather",
            Command::NerveBuild { .. } => "nerve-build",
            Command::CanonicalCheck { .. } => "canonical-check",
            Command::SelectEps { .. } => "select-eps",
            Command::VerifyAll { .. } => "verify-all",
        }
    }

    fn input(&self) -> &Path {
        match self {
            Command::SpaceValidate { input }
            | Command::MapClassify { input }
            | Command::PouBuild { input }
            | Command::PouVerify { input }
            | Command::Mather { input }
            | Command::NerveBuild { input }
            | Command::CanonicalCheck { input }
            | Command::SelectEps { input, .. }
            | Command::VerifyAll { input } => input,
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatherDoc {
    Vector(VectorDoc),
    Pou(PouDoc),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CanonicalDoc {
    Balls(BallCoverDoc),
    Pou(PouCheckDoc),
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Io { .. } => "io",
        Error::Json(_) | Error::Schema(_) | Error::Scalar(_) => "parse",
        _ => "input",
    }
}

/// JSON error detail written to stderr for exit code 2.
pub fn error_json(e: &Error) -> Value {
    json!({ "error": { "kind": error_kind(e), "message": e.to_string() } })
}

fn parse<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, Error> {
    Ok(serde_json::from_slice(bytes)?)
}

fn tolerance<S: Scalar>(arg: &Option<String>) -> Result<S, Error> {
    match arg {
        Some(t) => {
            let v = S::parse(t)?;
            if v.lt_zero() {
                return Err(Error::schema(format!("negative tolerance {t:?}")));
            }
            Ok(v)
        }
        None => Ok(S::default_tolerance()),
    }
}

/// Runs one command on already-read input bytes.
pub fn run<S: Scalar>(cli: &Cli, path: &str, bytes: &[u8]) -> Result<VerificationReport, Error> {
    let cfg = &cli.config;
    let tol_sum: S = tolerance(&cfg.tol_sum)?;
    let tol_metric: S = tolerance(&cfg.tol_metric)?;
    let mut config = RunConfig {
        mode: S::MODE,
        seed: cfg.seed,
        tol_sum: tol_sum.render(),
        tol_metric: tol_metric.render(),
        max_dim: cfg.max_dim,
        epsilon: None,
    };
    let mut checks = Checks::new();
    let mut rng = crate::random::seeded(cfg.seed);
    let bundle: Option<BundleDoc> = match &cli.command {
        Command::VerifyAll { .. } => Some(parse(bytes)?),
        _ => None,
    };
    let loader = Loader::new(bundle.as_ref(), tol_sum.clone(), tol_metric);
    let result = match &cli.command {
        Command::SpaceValidate { .. } => {
            let doc: SpaceDoc = parse(bytes)?;
            match loader.space_doc(&doc) {
                Ok(x) => {
                    checks.pass("space.valid");
                    verify::space_checks("", &x, &mut checks);
                    space_json(&x)
                }
                Err(e) => {
                    checks.fail("space.valid", json!(e.to_string()));
                    Value::Null
                }
            }
        }
        Command::MapClassify { .. } => {
            let m = loader.map(&parse(bytes)?)?;
            let report = verify::map_checks("", &m, &mut checks);
            json!({ "classification": verify::flags_json(&report) })
        }
        Command::PouBuild { .. } => {
            let doc: BallCoverDoc = parse(bytes)?;
            let lc = loader.cover(&CoverDoc::Balls(doc))?;
            let (space, balls) = lc.balls.expect("ball documents load with balls");
            let r = verify::ball_checks("", &space, &balls, &lc.cover, &tol_sum, &mut checks)?;
            json!({ "cover": cover_json(&lc.cover), "pou": r["pou"], "mather": r["mather"] })
        }
        Command::PouVerify { .. } => {
            let doc: PouCheckDoc = parse(bytes)?;
            match loader.pou(&doc.pou) {
                Ok(pou) => {
                    checks.pass("pou.valid");
                    let mut r = json!({ "pou": pou_json(&pou) });
                    if let Some(cd) = &doc.cover {
                        let lc = loader.cover(cd)?;
                        let sub = subordination_check(&pou, &lc.cover, &tol_sum)?;
                        let w = serde_json::to_value(&sub).expect("serializable");
                        checks.record("pou.index_subordinated", sub.index_subordinated, || w.clone());
                        if sub.approximate {
                            checks.skip("pou.strongly_subordinated", "closures on metric samples are approximate");
                        } else {
                            checks.record("pou.strongly_subordinated", sub.strongly_subordinated, || w.clone());
                        }
                        r["subordination"] = w;
                    }
                    r["mather"] = verify::compose_checks("", &pou, &mut checks)?;
                    r
                }
                Err(e) => {
                    checks.fail("pou.valid", json!(e.to_string()));
                    Value::Null
                }
            }
        }
        Command::Mather { .. } => match parse::<MatherDoc>(bytes)? {
            MatherDoc::Vector(doc) => {
                let y = loader.vector(&doc)?;
                verify::vector_checks("", &y, &mut rng, &tol_sum, &mut checks)
            }
            MatherDoc::Pou(doc) => {
                let pou = loader.pou(&doc)?;
                verify::compose_checks("", &pou, &mut checks)?
            }
        },
        Command::NerveBuild { .. } => {
            let lc = loader.cover(&parse(bytes)?)?;
            let nerve = nerve_from_cover(&lc.cover, lc.witnesses.as_ref(), cfg.max_dim);
            verify::nerve_checks("", &lc.cover, lc.witnesses.as_ref(), cfg.max_dim, &mut checks);
            json!({ "cover": cover_json(&lc.cover), "nerve": complex_json(&nerve) })
        }
        Command::CanonicalCheck { .. } => {
            let (report, pou) = match parse::<CanonicalDoc>(bytes)? {
                CanonicalDoc::Balls(doc) => {
                    let space = loader.metric(&doc.metric)?;
                    let balls = loader.balls(&doc.balls)?;
                    let pou = pou_from_metric_cover(&space, &balls)?;
                    (canonical_map_check_balls(&pou, &balls)?, pou)
                }
                CanonicalDoc::Pou(doc) => {
                    let pou = loader.pou(&doc.pou)?;
                    let cd = doc
                        .cover
                        .as_ref()
                        .ok_or_else(|| Error::schema("canonical-check needs a cover"))?;
                    let lc = loader.cover(cd)?;
                    (canonical_map_check(&pou, &lc.cover)?, pou)
                }
            };
            let w = serde_json::to_value(&report).expect("serializable");
            checks.record("nerve.realization", report.realization_violations.is_empty(), || {
                w["realization_violations"].clone()
            });
            checks.record("nerve.star", report.star_violations.is_empty(), || {
                w["star_violations"].clone()
            });
            json!({ "pou": pou_json(&pou), "canonical": w })
        }
        Command::SelectEps { epsilon, .. } => {
            let doc: SelectDoc = parse(bytes)?;
            let eps: S = match (epsilon, &doc.epsilon) {
                (Some(t), _) => S::parse(t)?,
                (None, Some(v)) => scalar_from_json(v)?,
                (None, None) => return Err(Error::schema("no epsilon given")),
            };
            config.epsilon = Some(eps.render());
            let target = loader.target(&doc.target)?;
            let anchors = loader.anchors(&doc.anchors)?;
            verify::selection_checks("", &target, &eps, &anchors, &mut checks)?
        }
        Command::VerifyAll { .. } => {
            let b = bundle.as_ref().expect("parsed above");
            verify::verify_bundle(b, &loader, cfg.seed, cfg.max_dim, &mut checks)?
        }
    };
    let inputs = vec![InputDigest::of(path, bytes)];
    Ok(VerificationReport::new(cli.command.name(), config, inputs, checks, result))
}

/// Runs in the arithmetic selected by `--mode`.
pub fn dispatch(cli: &Cli, path: &str, bytes: &[u8]) -> Result<VerificationReport, Error> {
    match cli.config.mode {
        Mode::Exact => run::<Rational>(cli, path, bytes),
        Mode::Float => run::<f64>(cli, path, bytes),
    }
}

/// Parses arguments, runs, writes output and returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let start = Instant::now();
    let path = cli.command.input();
    let shown = path.display().to_string();
    let outcome = fs::read(path)
        .map_err(|source| Error::Io { path: shown.clone(), source })
        .and_then(|bytes| dispatch(&cli, &shown, &bytes));
    let mut report = match outcome {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            return 2;
        }
    };
    if cli.config.timing {
        report.timing_ms = Some(start.elapsed().as_millis() as u64);
    }
    let text = report.to_json_string();
    let written = match &cli.config.out {
        Some(out) => fs::write(out, &text).map_err(|source| Error::Io {
            path: out.display().to_string(),
            source,
        }),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|source| Error::Io { path: "<stdout>".into(), source }),
    };
    if let Err(e) = written {
        eprintln!("{}", error_json(&e));
        return 2;
    }
    report.exit_code()
}
