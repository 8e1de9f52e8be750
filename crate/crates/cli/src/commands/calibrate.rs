use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;
use smoothcal::forecaster::{theory_constants, ActionSet, ForecasterSettings, Profile, WeakForecaster};
use smoothcal::game::{fixed_point_fraction, play, Adversary, AdversaryKind, Forecaster, Mode, ReactionMap};
use smoothcal::geometry::{ConvexDomain, DEFAULT_MAX_BASIS};

use super::common::{broadcast, kernel, score_block, test_weights, KernelArg};
use super::config_block;
use crate::cli::{Context, ProfileArg};
use crate::error::{abort, setup, CliError, CliResult};
use crate::output::{columns, num, nums, Check, OutDir};

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateParams {
    #[arg(long, value_enum)]
    pub forecaster: Option<ForecasterArg>,
    #[arg(long, value_enum)]
    pub adversary: Option<AdversaryArg>,
    /// Whether the adversary sees the forecast before acting.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Number of periods T (default 50R).
    #[arg(long, visible_alias = "T")]
    pub periods: Option<usize>,
    /// Dimension m of C = [0,1]^m.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Admissible actions (default: domain for reaction adversaries, binary otherwise).
    #[arg(long, value_enum)]
    pub actions: Option<ActionsArg>,
    /// Forecast of odd periods (alternating forecaster).
    #[arg(long, value_delimiter = ',')]
    pub first: Option<Vec<f64>>,
    /// Forecast of even periods (alternating forecaster).
    #[arg(long, value_delimiter = ',')]
    pub second: Option<Vec<f64>>,
    /// Forecast of the constant forecaster.
    #[arg(long, value_delimiter = ',')]
    pub forecast: Option<Vec<f64>>,
    /// Cut of the threshold adversary.
    #[arg(long)]
    pub cut: Option<f64>,
    /// Action of the constant adversary.
    #[arg(long, value_delimiter = ',')]
    pub action: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub reaction: Option<ReactionArg>,
    /// Target of the constant reaction map.
    #[arg(long)]
    pub reaction_value: Option<f64>,
    /// Salt of the seeded random adversary.
    #[arg(long)]
    pub salt: Option<u64>,
    /// Target accuracy of the weak forecaster.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Lipschitz bound of the tested weights.
    #[arg(long)]
    pub lipschitz: Option<f64>,
    #[arg(long)]
    pub net_radius: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub recall: Option<usize>,
    /// Covering radius of the forecast grid.
    #[arg(long)]
    pub grid_radius: Option<f64>,
    #[arg(long, value_enum)]
    pub kernel: Option<KernelArg>,
    #[arg(long)]
    pub kernel_delta: Option<f64>,
    /// Bound on the weak scores of the weak forecaster.
    #[arg(long)]
    pub eps_test: Option<f64>,
    /// Number of seeded random test weights.
    #[arg(long)]
    pub weights: Option<usize>,
    /// Lipschitz constant of the random test weights.
    #[arg(long)]
    pub weight_lipschitz: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ForecasterArg {
    Weak,
    Alternating,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum AdversaryArg {
    Threshold,
    Constant,
    Random,
    Reaction,
    BestResponse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ModeArg {
    Standard,
    Leaky,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ActionsArg {
    Binary,
    Domain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ReactionArg {
    Identity,
    Flip,
    Constant,
}

#[derive(Debug, Clone, Serialize)]
struct Resolved {
    forecaster: ForecasterArg,
    adversary: AdversaryArg,
    mode: ModeArg,
    periods: usize,
    dim: usize,
    actions: ActionsArg,
    first: Vec<f64>,
    second: Vec<f64>,
    forecast: Vec<f64>,
    cut: f64,
    action: Vec<f64>,
    reaction: ReactionArg,
    reaction_value: f64,
    salt: u64,
    kernel: KernelArg,
    kernel_delta: f64,
    eps_test: f64,
    weights: usize,
    weight_lipschitz: f64,
    settings: Option<ForecasterSettings>,
}

fn resolve(ctx: &Context, p: CalibrateParams) -> CliResult<Resolved> {
    let m = p.dim.unwrap_or(1);
    if m == 0 {
        return Err(CliError::spec("dim must be >= 1"));
    }
    let forecaster = p.forecaster.unwrap_or(ForecasterArg::Weak);
    let adversary = p.adversary.unwrap_or(AdversaryArg::Threshold);
    let default_actions = if adversary == AdversaryArg::Reaction { ActionsArg::Domain } else { ActionsArg::Binary };
    let actions = p.actions.unwrap_or(default_actions);
    let domain = ConvexDomain::unit_box(m);
    let settings = if forecaster == ForecasterArg::Weak {
        let mut s = ForecasterSettings::desk(domain.clone(), action_set(actions, &domain));
        s.eps = p.eps.unwrap_or(s.eps);
        s.lipschitz = p.lipschitz.unwrap_or(s.lipschitz);
        s.net_radius = p.net_radius.unwrap_or(s.net_radius);
        s.lambda = p.lambda.unwrap_or(s.lambda);
        s.recall = p.recall.unwrap_or(s.recall);
        s.grid_radius = p.grid_radius.or(s.grid_radius);
        if ctx.profile == ProfileArg::Theory {
            theory_sizing(&mut s, &domain, p.lambda.is_none() && p.recall.is_none())?;
        }
        Some(s)
    } else {
        None
    };
    let recall = settings.as_ref().map_or(1000, |s| s.recall);
    let r = Resolved {
        forecaster,
        adversary,
        mode: p.mode.unwrap_or(ModeArg::Leaky),
        periods: p.periods.unwrap_or(50 * recall),
        dim: m,
        actions,
        first: broadcast("first", p.first.unwrap_or(vec![0.5001]), m)?,
        second: broadcast("second", p.second.unwrap_or(vec![0.4999]), m)?,
        forecast: broadcast("forecast", p.forecast.unwrap_or(vec![0.5]), m)?,
        cut: p.cut.unwrap_or(0.5),
        action: broadcast("action", p.action.unwrap_or(vec![1.0]), m)?,
        reaction: p.reaction.unwrap_or(ReactionArg::Flip),
        reaction_value: p.reaction_value.unwrap_or(0.7),
        salt: p.salt.unwrap_or(1),
        kernel: p.kernel.unwrap_or(KernelArg::Tent),
        kernel_delta: p.kernel_delta.unwrap_or(0.05),
        eps_test: p.eps_test.unwrap_or(0.05),
        weights: p.weights.unwrap_or(20),
        weight_lipschitz: p.weight_lipschitz.unwrap_or(4.0),
        settings,
    };
    if r.periods == 0 {
        return Err(CliError::spec("periods must be >= 1"));
    }
    Ok(r)
}

/// Switches `s` to the theory basis and, unless overridden, the tuned discount and recall.
pub(super) fn theory_sizing(s: &mut ForecasterSettings, domain: &ConvexDomain, tune: bool) -> CliResult<()> {
    s.profile = Profile::Theory;
    let tc = theory_constants(domain, s.eps, s.lipschitz, DEFAULT_MAX_BASIS)
        .map_err(|e| CliError::spec(format!("theory profile cannot be sized ({e}); use --profile desk")))?;
    if tune {
        let recall = tc.tuned.recall_usize().filter(|r| *r <= 1 << 24).ok_or_else(|| {
            CliError::spec(format!("theory recall R = {:e} does not fit in memory; use --profile desk", tc.tuned.recall))
        })?;
        s.lambda = tc.tuned.lambda;
        s.recall = recall;
    }
    Ok(())
}

fn action_set(a: ActionsArg, domain: &ConvexDomain) -> ActionSet {
    match a {
        ActionsArg::Binary => ActionSet::Finite { points: domain.vertices() },
        ActionsArg::Domain => ActionSet::Domain,
    }
}

fn reaction_map(r: &Resolved) -> ReactionMap {
    match r.reaction {
        ReactionArg::Identity => ReactionMap::identity(),
        ReactionArg::Flip => ReactionMap::flip(),
        ReactionArg::Constant => ReactionMap::constant(vec![r.reaction_value; r.dim]),
    }
}

pub fn run(ctx: &Context, p: CalibrateParams) -> CliResult<bool> {
    let r = resolve(ctx, p)?;
    let domain = ConvexDomain::unit_box(r.dim);
    let actions = action_set(r.actions, &domain);
    let smoothing = kernel(r.kernel, r.kernel_delta)?;
    let (forecaster, basis_weights) = match r.forecaster {
        ForecasterArg::Weak => {
            let f = WeakForecaster::from_settings(r.settings.clone().expect("weak settings")).map_err(setup)?;
            let w = f.config().basis_weights();
            (Forecaster::weak(f), w)
        }
        ForecasterArg::Alternating => (Forecaster::alternating(domain.clone(), r.first.clone(), r.second.clone()), vec![]),
        ForecasterArg::Constant => (Forecaster::constant(domain.clone(), r.forecast.clone()), vec![]),
    };
    let mut weights = test_weights(r.dim, r.weights, r.weight_lipschitz);
    let kind = match r.adversary {
        AdversaryArg::Threshold => AdversaryKind::Threshold { cut: r.cut },
        AdversaryArg::Constant => AdversaryKind::Constant { a: r.action.clone() },
        AdversaryArg::Random => AdversaryKind::SeededRandom { salt: r.salt },
        AdversaryArg::Reaction => AdversaryKind::Reaction { g: reaction_map(&r) },
        AdversaryArg::BestResponse => {
            let mut targets = basis_weights.clone();
            targets.extend(weights.iter().cloned());
            AdversaryKind::SimulatingBestResponse { targets }
        }
    };
    weights.extend(basis_weights);
    let mode = match r.mode {
        ModeArg::Standard => Mode::Standard,
        ModeArg::Leaky => Mode::Leaky,
    };
    let run = play(&forecaster, &Adversary::new(kind, mode), &actions, r.periods, ctx.seed).map_err(abort)?;
    let t = &run.transcript;

    let out = OutDir::create(&ctx.out)?;
    let mut header = vec!["t".to_string()];
    header.extend(columns("c", r.dim));
    header.extend(columns("a", r.dim));
    header.push("residual".into());
    let mut csv = out.csv("transcript.csv", &header)?;
    for (i, ((c, a), res)) in t.iter().zip(&run.residuals).enumerate() {
        let mut row = vec![(i + 1).to_string()];
        row.extend(nums(c));
        row.extend(nums(a));
        row.push(num(*res));
        csv.write_record(&row)?;
    }
    csv.flush()?;

    let (mut results, mut checks) = score_block(t, smoothing, &weights)?;
    if let ForecasterArg::Weak = r.forecaster {
        let stats = run.stats.clone().unwrap_or_default();
        let fine = stats.fine as f64 / stats.periods.max(1) as f64;
        let max_weak = results["max_weak_score"].as_f64().unwrap_or(f64::INFINITY);
        checks.push(Check::at_most("max weak score over tested weights", max_weak, r.eps_test));
        checks.push(Check::at_least("fraction of periods with residual <= 1e-8", fine, 0.999));
        checks.push(Check::at_most("largest fixed-point residual", stats.max_residual, 1e-3));
        results["solver"] = json!(stats);
        if let Forecaster::WeakCalibrated(f) = &forecaster {
            let mut f = (**f).clone();
            for (c, a) in t.iter() {
                f.observe(c, a).map_err(abort)?;
            }
            out.write("forecaster_state.json", &(f.to_json() + "\n"))?;
        }
    }
    if r.adversary == AdversaryArg::Reaction {
        let g = reaction_map(&r);
        results["fixed_point_fraction"] = json!(fixed_point_fraction(t, &|c: &[f64]| g.eval(c), 0.1));
    }
    out.summary("calibrate", config_block(ctx, json!(r)), results, &checks)
}
