use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;
use smoothcal::geometry::ConvexDomain;
use smoothcal::scores::{smoothed_averages, Transcript};

use super::common::{kernel, score_block, test_weights, KernelArg};
use super::config_block;
use crate::cli::Context;
use crate::error::{setup, CliError, CliResult};
use crate::output::{columns, nums, OutDir};

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreParams {
    /// Transcript CSV with columns t, c_1..c_m, a_1..a_m (extra columns are ignored).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub kernel: Option<KernelArg>,
    #[arg(long)]
    pub kernel_delta: Option<f64>,
    /// Number of seeded random test weights.
    #[arg(long)]
    pub weights: Option<usize>,
    #[arg(long)]
    pub weight_lipschitz: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
struct Resolved {
    input: PathBuf,
    kernel: KernelArg,
    kernel_delta: f64,
    weights: usize,
    weight_lipschitz: f64,
}

/// Reads the `c_*` and `a_*` columns of a transcript CSV.
pub fn read_transcript(path: &PathBuf) -> CliResult<Transcript> {
    let bad = |msg: String| CliError::spec(format!("{}: {msg}", path.display()));
    let mut rd = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let headers = rd.headers().map_err(|e| bad(e.to_string()))?.clone();
    let find = |name: &str| headers.iter().position(|h| h.trim() == name);
    let m = (1..).take_while(|i| find(&format!("c_{i}")).is_some()).count();
    if m == 0 {
        return Err(bad("no c_1 column".into()));
    }
    let mut idx = Vec::with_capacity(2 * m);
    for name in columns("c", m).iter().chain(&columns("a", m)) {
        idx.push(find(name).ok_or_else(|| bad(format!("missing column {name}")))?);
    }
    let mut t = Transcript::new(ConvexDomain::unit_box(m));
    for (line, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let vals = idx
            .iter()
            .map(|&i| rec.get(i).unwrap_or("").trim().parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| bad(format!("row {}: {e}", line + 1)))?;
        t.push(&vals[..m], &vals[m..]).map_err(|e| bad(format!("row {}: {e}", line + 1)))?;
    }
    if t.is_empty() {
        return Err(bad("empty transcript".into()));
    }
    Ok(t)
}

pub fn run(ctx: &Context, p: ScoreParams) -> CliResult<bool> {
    let r = Resolved {
        input: p.input.ok_or_else(|| CliError::spec("score needs an input transcript"))?,
        kernel: p.kernel.unwrap_or(KernelArg::Tent),
        kernel_delta: p.kernel_delta.unwrap_or(0.05),
        weights: p.weights.unwrap_or(20),
        weight_lipschitz: p.weight_lipschitz.unwrap_or(4.0),
    };
    let t = read_transcript(&r.input)?;
    let m = t.dim();
    let smoothing = kernel(r.kernel, r.kernel_delta)?;
    let (results, checks) = score_block(&t, smoothing, &test_weights(m, r.weights, r.weight_lipschitz))?;

    let out = OutDir::create(&ctx.out)?;
    let mut header = columns("c", m);
    header.extend(["count".to_string(), "weight".to_string()]);
    header.extend(columns("a_bar", m));
    header.extend(columns("c_bar", m));
    let mut csv = out.csv("smoothed.csv", &header)?;
    for pt in smoothed_averages(&t, smoothing).map_err(setup)? {
        let mut row: Vec<String> = nums(&pt.c).collect();
        row.push(pt.count.to_string());
        row.push(crate::output::num(pt.weight));
        row.extend(nums(&pt.a_bar));
        row.extend(nums(&pt.c_bar));
        csv.write_record(&row)?;
    }
    csv.flush()?;
    out.summary("score", config_block(ctx, json!(r)), results, &checks)
}
