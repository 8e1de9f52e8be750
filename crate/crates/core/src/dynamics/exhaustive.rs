use serde::{Deserialize, Serialize};

use super::finite::{nash_gaps, FiniteGame};
use crate::error::{check_dim, Error, Result};
use crate::rng::CounterRng;

/// One period of exhaustive search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchStep {
    pub t: usize,
    /// Profile checked (before locking) or played (after).
    pub profile: Vec<f64>,
    /// Realized pure actions.
    pub actions: Vec<usize>,
    pub locked: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRun {
    pub steps: Vec<SearchStep>,
    /// Period at which every player signalled and the profile locked.
    pub locked_at: Option<usize>,
    pub profile: Option<Vec<f64>>,
}

/// Per-player memory: the last checked profile and the last joint action.
#[derive(Debug, Clone)]
struct Memory {
    checked: usize,
    last: Vec<usize>,
    locked: Option<usize>,
}

/// Players walk `grid` in order; each plays its signal action `0` exactly when
/// its own part of the current profile is an `ε`-best reply. Once all
/// players signal together the profile is played forever.
pub fn run_exhaustive_search(game: &FiniteGame, grid: &[Vec<f64>], eps: f64, periods: usize, seed: u64) -> Result<SearchRun> {
    game.validate()?;
    for d in grid {
        check_dim(game.dim(), d.len())?;
        game.check_profile(d)?;
    }
    if !grid.iter().any(|d| nash_gaps(game, d, eps).is_member) {
        return Err(Error::NoGridEquilibrium { scanned: grid.len() });
    }
    let rng = CounterRng::new(seed);
    let n = game.players;
    let mut mem = Memory { checked: 0, last: vec![0; n], locked: None };
    let mut steps = Vec::with_capacity(periods);
    let mut locked_at = None;
    for t in 0..periods {
        if t > 0 && mem.locked.is_none() {
            if mem.last.iter().all(|&a| a == 0) {
                mem.locked = Some(mem.checked);
                locked_at = Some(t);
            } else {
                mem.checked = (mem.checked + 1) % grid.len();
            }
        }
        let d = &grid[mem.checked];
        let actions: Vec<usize> = match mem.locked {
            Some(_) => (0..n).map(|i| rng.categorical(t as u64, i as u64, &d[game.block(i)])).collect(),
            None => (0..n)
                .map(|i| {
                    let dev = game.deviation_payoffs(i, d);
                    let own: f64 = dev.iter().zip(&d[game.block(i)]).map(|(u, p)| u * p).sum();
                    let best = dev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    if best - own <= eps {
                        0
                    } else {
                        1 % game.actions[i]
                    }
                })
                .collect(),
        };
        steps.push(SearchStep { t: t + 1, profile: d.clone(), actions: actions.clone(), locked: mem.locked.is_some() });
        mem.last = actions;
    }
    Ok(SearchRun { steps, locked_at, profile: mem.locked.map(|k| grid[k].clone()) })
}
