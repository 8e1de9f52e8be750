use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use smoothcal::dynamics::{
    run_continuous_dynamic, run_exhaustive_search, run_smooth_calibrated_learning, tune_dynamic_parameters,
    ContinuousConfig, ContinuousGame, DynamicConfig, FiniteGame,
};
use smoothcal::forecaster::ForecasterSettings;
use smoothcal::Error;

use super::calibrate::theory_sizing;
use super::config_block;
use crate::cli::{Context, ProfileArg};
use crate::error::{abort, setup, CliError, CliResult};
use crate::output::{columns, num, nums, Check, OutDir};

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsParams {
    /// Preset: matching_pennies, coordination, prisoners_dilemma, shapley or dominant.
    #[arg(long)]
    pub game: Option<String>,
    /// JSON payoff file {name, players, actions, payoffs}.
    #[arg(long)]
    pub game_file: Option<PathBuf>,
    /// Continuous-action game instead of a finite one.
    #[arg(long, value_enum)]
    pub continuous: Option<ContinuousArg>,
    /// Target of the quadratic game.
    #[arg(long)]
    pub target: Option<f64>,
    /// Number of periods T.
    #[arg(long, visible_alias = "T")]
    pub periods: Option<usize>,
    /// Equilibrium levels reported per period.
    #[arg(long, visible_alias = "eps", value_delimiter = ',')]
    pub ne_eps: Option<Vec<f64>>,
    /// Target of the reported theory schedule.
    #[arg(long)]
    pub schedule_eps: Option<f64>,
    #[arg(long)]
    pub net_radius: Option<f64>,
    #[arg(long)]
    pub grid_radius: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub recall: Option<usize>,
    /// Net radius behind the smoothed best replies.
    #[arg(long)]
    pub reply_net_radius: Option<f64>,
    /// Tent width of the diagnostics.
    #[arg(long)]
    pub kernel_delta: Option<f64>,
    /// Spacing of the shared-forecast replay check.
    #[arg(long)]
    pub replay_every: Option<usize>,
    /// Run the exhaustive-search baseline instead.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub exhaustive: Option<bool>,
    /// Divisions per simplex of the exhaustive-search grid.
    #[arg(long)]
    pub divisions: Option<usize>,
    /// Best-reply slack of the exhaustive search.
    #[arg(long)]
    pub search_eps: Option<f64>,
    /// Required fraction of periods in NE(expect_eps) (or PNE for continuous games).
    #[arg(long)]
    pub min_fraction: Option<f64>,
    /// Level of the fraction check (default: largest ne_eps).
    #[arg(long)]
    pub expect_eps: Option<f64>,
    /// Periods skipped before the fraction check.
    #[arg(long)]
    pub burn_in: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ContinuousArg {
    Quadratic,
    Team,
    Zero,
}

#[derive(Debug, Clone, Serialize)]
struct Common {
    ne_eps: Vec<f64>,
    expect_eps: f64,
    min_fraction: Option<f64>,
    burn_in: usize,
}

fn common(p: &DynamicsParams, default_burn_in: usize) -> CliResult<Common> {
    let ne_eps = p.ne_eps.clone().unwrap_or(vec![0.05, 0.1, 0.2, 0.3]);
    if ne_eps.is_empty() || ne_eps.iter().any(|e| !(*e >= 0.0)) {
        return Err(CliError::spec("ne_eps must be a nonempty list of nonnegative levels"));
    }
    let largest = ne_eps.iter().copied().fold(0.0, f64::max);
    Ok(Common { expect_eps: p.expect_eps.unwrap_or(largest), ne_eps, min_fraction: p.min_fraction, burn_in: p.burn_in.unwrap_or(default_burn_in) })
}

fn apply_forecaster(s: &mut ForecasterSettings, p: &DynamicsParams) {
    s.net_radius = p.net_radius.unwrap_or(s.net_radius);
    s.grid_radius = p.grid_radius.or(s.grid_radius);
    s.lambda = p.lambda.unwrap_or(s.lambda);
    s.recall = p.recall.unwrap_or(s.recall);
}

fn load_game(p: &DynamicsParams) -> CliResult<FiniteGame> {
    match (&p.game, &p.game_file) {
        (Some(_), Some(_)) => Err(CliError::spec("give either game or game_file, not both")),
        (_, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::spec(format!("{}: {e}", path.display())))?;
            FiniteGame::from_json(&text).map_err(|e| CliError::spec(format!("{}: {e}", path.display())))
        }
        (name, None) => {
            let name = name.as_deref().unwrap_or("matching_pennies");
            FiniteGame::preset(name).ok_or_else(|| CliError::spec(format!("unknown game preset '{name}'")))
        }
    }
}

pub fn run(ctx: &Context, p: DynamicsParams) -> CliResult<bool> {
    if let Some(kind) = p.continuous {
        if p.game.is_some() || p.game_file.is_some() || p.exhaustive == Some(true) {
            return Err(CliError::spec("continuous games take no game, game_file or exhaustive"));
        }
        return continuous(ctx, &p, kind);
    }
    let game = load_game(&p)?;
    if p.exhaustive == Some(true) {
        exhaustive(ctx, &p, &game)
    } else {
        learning(ctx, &p, &game)
    }
}

fn learning(ctx: &Context, p: &DynamicsParams, game: &FiniteGame) -> CliResult<bool> {
    let mut config = DynamicConfig::desk(game, p.periods.unwrap_or(20_000), ctx.seed);
    apply_forecaster(&mut config.forecaster, p);
    config.reply_net_radius = p.reply_net_radius.unwrap_or(config.reply_net_radius);
    config.kernel_delta = p.kernel_delta.unwrap_or(config.kernel_delta);
    config.replay_every = p.replay_every.unwrap_or(config.replay_every);
    let com = common(p, 0)?;
    config.ne_eps = com.ne_eps.clone();
    let schedule = tune_dynamic_parameters(p.schedule_eps.unwrap_or(0.1), game.players, game.dim(), game.payoff_bound());
    config.schedule = Some(schedule);
    if ctx.profile == ProfileArg::Theory {
        config.profile = smoothcal::forecaster::Profile::Theory;
        config.forecaster.eps = schedule.eps_c.min(1.0);
        config.forecaster.lipschitz = schedule.l_c.max(1.0);
        let domain = config.forecaster.domain.clone();
        theory_sizing(&mut config.forecaster, &domain, p.lambda.is_none() && p.recall.is_none())?;
    }
    if config.periods == 0 {
        return Err(CliError::spec("periods must be >= 1"));
    }
    let run = run_smooth_calibrated_learning(game, &config).map_err(|e| match e {
        Error::AtPeriod { .. } => abort(e),
        other => setup(other),
    })?;

    let m = game.dim();
    let out = OutDir::create(&ctx.out)?;
    let mut header = vec!["t".to_string()];
    header.extend(columns("c", m));
    header.extend(columns("x", m));
    header.extend(columns("a", m));
    header.extend(com.ne_eps.iter().map(|e| format!("in_ne_{e}")));
    header.extend(["ne_gap".to_string(), "fixed_gap".to_string()]);
    let mut csv = out.csv("dynamics.csv", &header)?;
    for s in &run.steps {
        let mut row = vec![s.t.to_string()];
        row.extend(nums(&s.c));
        row.extend(nums(&s.x));
        row.extend(nums(&s.a));
        row.extend(com.ne_eps.iter().map(|e| u8::from(s.ne_gap <= *e).to_string()));
        row.push(num(s.ne_gap));
        row.push(num(s.fixed_gap));
        csv.write_record(&row)?;
    }
    csv.flush()?;

    let solver = &run.solver;
    let d = &run.diagnostics;
    let mut checks = vec![
        Check::at_least(
            "fraction of periods with residual <= 1e-8",
            solver.fine as f64 / solver.periods.max(1) as f64,
            0.999,
        ),
        Check::at_most("largest fixed-point residual", solver.max_residual, 1e-3),
        Check::at_most("mean ||x - c|| against its measured bound", d.behavior_forecast_gap, d.behavior_forecast_bound + 1e-12),
        Check::holds("ne_fraction nondecreasing in eps", {
            let mut sorted = run.ne_fraction.clone();
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
            sorted.windows(2).all(|w| w[0].1 <= w[1].1)
        }),
    ];
    for (threshold, above, ratio) in &d.markov {
        checks.push(Check::at_most(format!("Markov bound at {threshold}"), *above, *ratio));
    }
    if let Some(min) = com.min_fraction {
        let f = run.fraction_in_ne(com.expect_eps, com.burn_in);
        checks.push(Check::at_least(format!("fraction in NE({}) after {} periods", com.expect_eps, com.burn_in), f, min));
    }
    let n = run.steps.len();
    let q = (n / 4).max(1);
    let results = json!({
        "game": game,
        "ne_fraction": run.ne_fraction.iter().map(|(e, f)| json!({ "eps": e, "fraction": f })).collect::<Vec<Value>>(),
        "diagnostics": d,
        "solver": solver,
        "replay_checks": run.replay_checks,
        "mean_forecast": run.mean_forecast(0),
        "mean_fixed_gap": { "first_quarter": run.mean_fixed_gap(0, q), "last_quarter": run.mean_fixed_gap(n.saturating_sub(q), n) },
        "schedule": schedule,
    });
    let mut cfg = json!(config);
    cfg["check"] = json!(com);
    out.summary("dynamics", config_block(ctx, cfg), results, &checks)
}

fn exhaustive(ctx: &Context, p: &DynamicsParams, game: &FiniteGame) -> CliResult<bool> {
    let divisions = p.divisions.unwrap_or(6);
    let eps = p.search_eps.unwrap_or(0.1);
    if divisions == 0 {
        return Err(CliError::spec("divisions must be >= 1"));
    }
    let grid = game.profile_grid(divisions);
    let periods = p.periods.unwrap_or(grid.len() + 2);
    let cfg = json!({ "game": game, "divisions": divisions, "search_eps": eps, "periods": periods, "grid_size": grid.len() });
    let out = OutDir::create(&ctx.out)?;
    let run = match run_exhaustive_search(game, &grid, eps, periods, ctx.seed) {
        Ok(run) => run,
        Err(Error::NoGridEquilibrium { scanned }) => {
            let checks = [Check::holds("search locks onto a grid equilibrium", false)];
            let results = json!({ "locked_at": null, "profile": null, "scanned": scanned });
            return out.summary("dynamics", config_block(ctx, cfg), results, &checks);
        }
        Err(e) => return Err(setup(e)),
    };
    let m = game.dim();
    let mut header = vec!["t".to_string()];
    header.extend(columns("profile", m));
    header.extend(columns("action", game.players));
    header.push("locked".into());
    let mut csv = out.csv("dynamics.csv", &header)?;
    for s in &run.steps {
        let mut row = vec![s.t.to_string()];
        row.extend(nums(&s.profile));
        row.extend(s.actions.iter().map(|a| a.to_string()));
        row.push(u8::from(s.locked).to_string());
        csv.write_record(&row)?;
    }
    csv.flush()?;
    let checks = [Check::holds("search locks onto a grid equilibrium", run.locked_at.is_some())];
    let results = json!({ "locked_at": run.locked_at, "profile": run.profile });
    out.summary("dynamics", config_block(ctx, cfg), results, &checks)
}

fn continuous(ctx: &Context, p: &DynamicsParams, kind: ContinuousArg) -> CliResult<bool> {
    let target = p.target.unwrap_or(0.3);
    let game = match kind {
        ContinuousArg::Quadratic => ContinuousGame::quadratic(target),
        ContinuousArg::Team => ContinuousGame::team(),
        ContinuousArg::Zero => ContinuousGame::zero(2),
    };
    let mut config = ContinuousConfig::desk(&game, p.periods.unwrap_or(2000));
    apply_forecaster(&mut config.forecaster, p);
    config.reply_net_radius = p.reply_net_radius.unwrap_or(config.reply_net_radius);
    let com = common(p, config.forecaster.recall)?;
    config.pne_eps = com.expect_eps;
    if config.periods == 0 {
        return Err(CliError::spec("periods must be >= 1"));
    }
    let run = run_continuous_dynamic(&game, &config).map_err(|e| match e {
        Error::AtPeriod { .. } => abort(e),
        other => setup(other),
    })?;

    let n = game.players();
    let out = OutDir::create(&ctx.out)?;
    let mut header = vec!["t".to_string()];
    header.extend(columns("c", n));
    header.extend(columns("a", n));
    header.extend(com.ne_eps.iter().map(|e| format!("in_pne_{e}")));
    header.push("pne_gap".into());
    let mut csv = out.csv("dynamics.csv", &header)?;
    for (i, ((c, a), g)) in run.forecasts.iter().zip(&run.actions).zip(&run.pne_gaps).enumerate() {
        let mut row = vec![(i + 1).to_string()];
        row.extend(nums(c));
        row.extend(nums(a));
        row.extend(com.ne_eps.iter().map(|e| u8::from(*g <= *e).to_string()));
        row.push(num(*g));
        csv.write_record(&row)?;
    }
    csv.flush()?;

    let mut checks = vec![Check::at_most("largest fixed-point residual", run.solver.max_residual, 1e-3)];
    if let Some(min) = com.min_fraction {
        let f = run.pne_fraction(com.expect_eps, com.burn_in);
        checks.push(Check::at_least(format!("fraction in PNE({}) after {} periods", com.expect_eps, com.burn_in), f, min));
    }
    let results = json!({
        "game": format!("{kind:?}").to_lowercase(),
        "pne_fraction": com.ne_eps.iter().map(|e| json!({ "eps": e, "fraction": run.pne_fraction(*e, com.burn_in) })).collect::<Vec<Value>>(),
        "warnings": run.warnings,
        "solver": run.solver,
    });
    let mut cfg = json!(config);
    cfg["target"] = json!(target);
    cfg["check"] = json!(com);
    out.summary("dynamics", config_block(ctx, cfg), results, &checks)
}
