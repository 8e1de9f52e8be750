use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::commands::{CalibrateParams, DynamicsParams, RegressParams, ScoreParams, SelftestParams};
use crate::error::{CliError, CliResult};
use crate::output::VERSION;

pub const OUT_ENV: &str = "SMOOTHCAL_OUT";
const DEFAULT_OUT: &str = "smoothcal-out";

/// Experiment runner for smoothly calibrated forecasting.
///
/// Exit status: 0 when every check passes, 1 when a check fails,
/// 2 for a malformed spec, 3 when a run aborts.
#[derive(Debug, Parser)]
#[command(name = "smoothcal", version = VERSION, about)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (overrides $SMOOTHCAL_OUT and the spec).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Sizing profile.
    #[arg(long, global = true, value_enum)]
    pub profile: Option<ProfileArg>,
    /// TOML experiment spec; flags override its values.
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileArg {
    #[default]
    Desk,
    Theory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Regress,
    Calibrate,
    Score,
    Dynamics,
    Selftest,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Regress => "regress",
            Kind::Calibrate => "calibrate",
            Kind::Score => "score",
            Kind::Dynamics => "dynamics",
            Kind::Selftest => "selftest",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Windowed discounted forward regression with regret tracking.
    Regress(RegressParams),
    /// Play a forecaster against an adversary and score the transcript.
    Calibrate(CalibrateParams),
    /// Score a transcript CSV.
    Score(ScoreParams),
    /// Calibrated learning in a game.
    Dynamics(DynamicsParams),
    /// Run the built-in invariant suite.
    Selftest(SelftestParams),
}

/// Contents of a `--spec` file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    kind: Kind,
    seed: Option<u64>,
    profile: Option<ProfileArg>,
    out: Option<PathBuf>,
    regress: Option<RegressParams>,
    calibrate: Option<CalibrateParams>,
    score: Option<ScoreParams>,
    dynamics: Option<DynamicsParams>,
    selftest: Option<SelftestParams>,
}

impl SpecFile {
    fn tables(&self) -> [(Kind, bool); 5] {
        [
            (Kind::Regress, self.regress.is_some()),
            (Kind::Calibrate, self.calibrate.is_some()),
            (Kind::Score, self.score.is_some()),
            (Kind::Dynamics, self.dynamics.is_some()),
            (Kind::Selftest, self.selftest.is_some()),
        ]
    }
}

/// Settings shared by every command.
#[derive(Debug, Clone, Serialize)]
pub struct Context {
    pub seed: u64,
    pub profile: ProfileArg,
    pub out: PathBuf,
}

#[derive(Debug)]
pub enum Job {
    Regress(RegressParams),
    Calibrate(CalibrateParams),
    Score(ScoreParams),
    Dynamics(DynamicsParams),
    Selftest(SelftestParams),
}

/// Merges flags over the spec file over defaults.
pub fn resolve(cli: Cli) -> CliResult<(Context, Job)> {
    let spec = match &cli.global.spec {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::spec(format!("{}: {e}", path.display())))?;
            let spec: SpecFile = toml::from_str(&text).map_err(|e| CliError::spec(format!("{}: {e}", path.display())))?;
            for (kind, present) in spec.tables() {
                if present && kind != spec.kind {
                    return Err(CliError::spec(format!("table [{}] does not match kind = \"{}\"", kind.name(), spec.kind.name())));
                }
            }
            Some(spec)
        }
        None => None,
    };
    if let (Some(cmd), Some(s)) = (&cli.command, &spec) {
        let kind = command_kind(cmd);
        if kind != s.kind {
            return Err(CliError::spec(format!("subcommand {} conflicts with spec kind {}", kind.name(), s.kind.name())));
        }
    }
    let g = &cli.global;
    let env_out = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
    let context = Context {
        seed: g.seed.or(spec.as_ref().and_then(|s| s.seed)).unwrap_or(0),
        profile: g.profile.or(spec.as_ref().and_then(|s| s.profile)).unwrap_or_default(),
        out: g
            .out
            .clone()
            .or(env_out)
            .or(spec.as_ref().and_then(|s| s.out.clone()))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
    };
    let job = match (cli.command, spec) {
        (Some(Command::Regress(p)), s) => Job::Regress(overlay(s.and_then(|s| s.regress), p)?),
        (Some(Command::Calibrate(p)), s) => Job::Calibrate(overlay(s.and_then(|s| s.calibrate), p)?),
        (Some(Command::Score(p)), s) => Job::Score(overlay(s.and_then(|s| s.score), p)?),
        (Some(Command::Dynamics(p)), s) => Job::Dynamics(overlay(s.and_then(|s| s.dynamics), p)?),
        (Some(Command::Selftest(p)), s) => Job::Selftest(overlay(s.and_then(|s| s.selftest), p)?),
        (None, Some(s)) => match s.kind {
            Kind::Regress => Job::Regress(s.regress.unwrap_or_default()),
            Kind::Calibrate => Job::Calibrate(s.calibrate.unwrap_or_default()),
            Kind::Score => Job::Score(s.score.unwrap_or_default()),
            Kind::Dynamics => Job::Dynamics(s.dynamics.unwrap_or_default()),
            Kind::Selftest => Job::Selftest(s.selftest.unwrap_or_default()),
        },
        (None, None) => return Err(CliError::spec("no subcommand and no --spec given")),
    };
    Ok((context, job))
}

fn command_kind(cmd: &Command) -> Kind {
    match cmd {
        Command::Regress(_) => Kind::Regress,
        Command::Calibrate(_) => Kind::Calibrate,
        Command::Score(_) => Kind::Score,
        Command::Dynamics(_) => Kind::Dynamics,
        Command::Selftest(_) => Kind::Selftest,
    }
}

/// Fields set in `top` replace those of `base`.
fn overlay<T: Serialize + DeserializeOwned>(base: Option<T>, top: T) -> CliResult<T> {
    let Some(base) = base else {
        return Ok(top);
    };
    let to_value = |t: &T| serde_json::to_value(t).map_err(|e| CliError::spec(e.to_string()));
    let (mut merged, top) = (to_value(&base)?, to_value(&top)?);
    if let (Value::Object(m), Value::Object(t)) = (&mut merged, top) {
        for (k, v) in t {
            if !v.is_null() {
                m.insert(k, v);
            }
        }
    }
    serde_json::from_value(merged).map_err(|e| CliError::spec(e.to_string()))
}
