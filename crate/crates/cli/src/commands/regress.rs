use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;
use smoothcal::regression::{
    default_maintenance, loss, theta_grid, tune_parameters, DataGenerator, DataKind, Observation, RegressorParams,
    RegretTracker, Regressor, TunedParameters, Variant,
};

use super::config_block;
use crate::cli::Context;
use crate::error::{abort_at, setup, CliError, CliResult};
use crate::output::{columns, num, nums, Check, OutDir};

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressParams {
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
    /// Regret target; sets the tuned a, lambda and R.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Feature dimension.
    #[arg(long)]
    pub d: Option<usize>,
    /// Ridge coefficient.
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Recall R of the windowed variant.
    #[arg(long)]
    pub recall: Option<usize>,
    /// Number of periods T (default 2R).
    #[arg(long, visible_alias = "T")]
    pub periods: Option<usize>,
    #[arg(long, value_enum)]
    pub data: Option<DataArg>,
    /// Write every n-th period to the CSV (the last period is always written).
    #[arg(long)]
    pub every: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum VariantArg {
    Forward,
    Discounted,
    Windowed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum DataArg {
    Random,
    Linear,
    SignFlip,
    Adversarial,
}

impl From<DataArg> for DataKind {
    fn from(d: DataArg) -> Self {
        match d {
            DataArg::Random => DataKind::Random,
            DataArg::Linear => DataKind::Linear,
            DataArg::SignFlip => DataKind::SignFlip,
            DataArg::Adversarial => DataKind::Adversarial,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct Resolved {
    variant: VariantArg,
    eps: f64,
    d: usize,
    a: f64,
    lambda: f64,
    recall: usize,
    periods: usize,
    data: DataArg,
    every: usize,
    tuned: TunedParameters,
}

fn resolve(p: RegressParams) -> CliResult<Resolved> {
    let eps = p.eps.unwrap_or(0.1);
    let d = p.d.unwrap_or(1);
    if !(eps > 0.0) || d == 0 {
        return Err(CliError::spec(format!("need eps > 0 and d >= 1, got {eps} and {d}")));
    }
    let tuned = tune_parameters(eps, 1.0, 1.0, d);
    let recall = match p.recall {
        Some(r) => r,
        None => tuned
            .recall_usize()
            .filter(|r| *r <= 1 << 26)
            .ok_or_else(|| CliError::spec(format!("tuned recall {} is too large; pass --recall", tuned.recall)))?,
    };
    let r = Resolved {
        variant: p.variant.unwrap_or(VariantArg::Windowed),
        eps,
        d,
        a: p.a.unwrap_or(tuned.a),
        lambda: p.lambda.unwrap_or(tuned.lambda),
        recall,
        periods: p.periods.unwrap_or(2 * recall),
        data: p.data.unwrap_or(DataArg::Random),
        every: p.every.unwrap_or(1),
        tuned,
    };
    if r.periods == 0 || r.every == 0 {
        return Err(CliError::spec("periods and every must be >= 1"));
    }
    Ok(r)
}

pub fn run(ctx: &Context, p: RegressParams) -> CliResult<bool> {
    let r = resolve(p)?;
    let variant = match r.variant {
        VariantArg::Forward => Variant::Forward,
        VariantArg::Discounted => Variant::Discounted { lambda: r.lambda },
        VariantArg::Windowed => Variant::Windowed { lambda: r.lambda, recall: r.recall },
    };
    let params = RegressorParams::new(variant, r.a, r.d).with_bounds(1.0, 1.0);
    params.validate().map_err(setup)?;
    let window = variant.recall().unwrap_or(r.periods).min(r.periods);
    let mut reg = Regressor::with_maintenance(params.clone(), default_maintenance(&params)).map_err(setup)?;
    let mut tracker = RegretTracker::new(r.d, window, theta_grid(r.d), r.eps).map_err(setup)?;
    let gen = DataGenerator::new(r.data.into(), r.d, ctx.seed);

    let out = OutDir::create(&ctx.out)?;
    let mut header = vec!["t".to_string()];
    header.extend(columns("theta", r.d));
    header.extend(["loss".to_string(), "window_regret".to_string()]);
    let mut csv = out.csv("regress.csv", &header)?;
    let mut theta = vec![0.0; r.d];
    for t in 1..=r.periods {
        let x = gen.features(t as u64);
        let pred = reg.predict(&x).map_err(|e| abort_at(e, t))?;
        let y = gen.target(t as u64, &x, pred.y_hat);
        let obs = Observation::new(x, y);
        let l = loss(&pred.theta, &obs);
        reg.update(obs.clone()).map_err(|e| abort_at(e, t))?;
        tracker.push(obs, l);
        if t % r.every == 0 || t == r.periods {
            let mut row = vec![t.to_string()];
            row.extend(nums(&pred.theta));
            row.push(num(l));
            row.push(num(tracker.window_regret()));
            csv.write_record(&row)?;
        }
        theta = pred.theta;
    }
    csv.flush()?;

    let report = tracker.report();
    let checks = vec![
        Check::holds("tuned parameters meet their conditions", r.tuned.satisfied()),
        Check::at_most("windowed regret violations", report.violations.0 as f64, 0.0),
        Check::at_most("cumulative regret violations", report.violations.1 as f64, 0.0),
    ];
    let results = json!({ "final_theta": theta, "regret": report });
    out.summary("regress", config_block(ctx, json!(r)), results, &checks)
}
