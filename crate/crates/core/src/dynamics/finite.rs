use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{BestReplyOracle, ConvexDomain, Lattice, LatticeFactor};

/// A finite game in normal form.
///
/// `payoffs[i]` lists `u^i` over joint pure profiles in row-major order,
/// the first player's action varying slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteGame {
    #[serde(default)]
    pub name: String,
    pub players: usize,
    pub actions: Vec<usize>,
    pub payoffs: Vec<Vec<f64>>,
}

/// Outcome of an `ε`-equilibrium check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NashCheck {
    pub is_member: bool,
    pub worst_gap: f64,
    pub gaps: Vec<f64>,
}

impl FiniteGame {
    pub fn new(name: impl Into<String>, actions: Vec<usize>, payoffs: Vec<Vec<f64>>) -> Result<Self> {
        let g = Self { name: name.into(), players: actions.len(), actions, payoffs };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.players == 0 || self.actions.len() != self.players || self.payoffs.len() != self.players {
            return Err(Error::InvalidParameter("players, actions and payoffs must agree".into()));
        }
        if self.actions.contains(&0) {
            return Err(Error::InvalidParameter("every player needs an action".into()));
        }
        let n = self.profiles();
        for p in &self.payoffs {
            check_dim(n, p.len())?;
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("payoffs must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: FiniteGame =
            serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("bad game file: {e}")))?;
        g.validate()?;
        Ok(g)
    }

    /// Number of joint pure profiles.
    pub fn profiles(&self) -> usize {
        self.actions.iter().product()
    }

    /// `m = Σ m^i`.
    pub fn dim(&self) -> usize {
        self.actions.iter().sum()
    }

    /// `U = max |u^i(a)|`.
    pub fn payoff_bound(&self) -> f64 {
        self.payoffs.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Coordinates of player `i` inside a joint mixed profile.
    pub fn block(&self, i: usize) -> Range<usize> {
        let start: usize = self.actions[..i].iter().sum();
        start..start + self.actions[i]
    }

    /// `X = Π Δ(A^i)`.
    pub fn mixed_domain(&self) -> ConvexDomain {
        let f: Vec<ConvexDomain> = self.actions.iter().map(|&k| ConvexDomain::Simplex { dim: k }).collect();
        if f.len() == 1 {
            f.into_iter().next().unwrap()
        } else {
            ConvexDomain::Product { factors: f }
        }
    }

    /// Joint profiles on the grid with step `1/divisions` in every simplex, lexicographic.
    pub fn profile_grid(&self, divisions: usize) -> Vec<Vec<f64>> {
        let factors = self.actions.iter().map(|&k| LatticeFactor::Simplex { dim: k, divisions }).collect();
        Lattice { factors }.points()
    }

    /// Embeds pure actions as unit vectors.
    pub fn embed(&self, pure: &[usize]) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        for (i, &b) in pure.iter().enumerate() {
            x[self.block(i).start + b] = 1.0;
        }
        x
    }

    pub fn check_profile(&self, x: &[f64]) -> Result<()> {
        check_dim(self.dim(), x.len())?;
        for i in 0..self.players {
            let xi = &x[self.block(i)];
            let s: f64 = xi.iter().sum();
            if xi.iter().any(|v| *v < -1e-12) || (s - 1.0).abs() > 1e-12 {
                return Err(Error::OutsideDomain);
            }
        }
        Ok(())
    }

    /// `u^i(b, x^{−i})` for every pure `b` of player `i`.
    pub fn deviation_payoffs(&self, i: usize, x: &[f64]) -> Vec<f64> {
        payoffs_against(&self.actions, &self.payoffs[i], i, x)
    }

    /// `u^i(x)`.
    pub fn expected_payoff(&self, i: usize, x: &[f64]) -> f64 {
        let dev = self.deviation_payoffs(i, x);
        dev.iter().zip(&x[self.block(i)]).map(|(d, p)| d * p).sum()
    }

    /// The oracle of player `i`; it carries `u^i` only.
    pub fn player(&self, i: usize) -> FinitePlayer {
        FinitePlayer { actions: self.actions.clone(), payoff: self.payoffs[i].clone(), index: i }
    }

    pub fn matching_pennies() -> Self {
        Self::new("matching_pennies", vec![2, 2], vec![vec![1.0, -1.0, -1.0, 1.0], vec![-1.0, 1.0, 1.0, -1.0]]).unwrap()
    }

    pub fn coordination() -> Self {
        Self::new("coordination", vec![2, 2], vec![vec![1.0, 0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0, 1.0]]).unwrap()
    }

    /// Actions `(C, D)`.
    pub fn prisoners_dilemma() -> Self {
        Self::new("prisoners_dilemma", vec![2, 2], vec![vec![3.0, 0.0, 5.0, 1.0], vec![3.0, 5.0, 0.0, 1.0]]).unwrap()
    }

    pub fn shapley() -> Self {
        let a = [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]];
        let b = [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let flat = |m: [[f64; 3]; 3]| m.iter().flatten().copied().collect::<Vec<f64>>();
        Self::new("shapley", vec![3, 3], vec![flat(a), flat(b)]).unwrap()
    }

    /// One player whose first action pays 1 and the other 0.
    pub fn dominant(actions: usize) -> Self {
        let mut u = vec![0.0; actions];
        u[0] = 1.0;
        Self::new("dominant", vec![actions], vec![u]).unwrap()
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "matching_pennies" => Some(Self::matching_pennies()),
            "coordination" => Some(Self::coordination()),
            "prisoners_dilemma" => Some(Self::prisoners_dilemma()),
            "shapley" => Some(Self::shapley()),
            "dominant" => Some(Self::dominant(2)),
            _ => None,
        }
    }

    pub const PRESETS: [&'static str; 4] = ["matching_pennies", "coordination", "prisoners_dilemma", "shapley"];
}

fn payoffs_against(actions: &[usize], u: &[f64], i: usize, x: &[f64]) -> Vec<f64> {
    let n = actions.len();
    let offsets: Vec<usize> = (0..n).map(|j| actions[..j].iter().sum()).collect();
    let mut dev = vec![0.0; actions[i]];
    let mut idx = vec![0usize; n];
    for &payoff in u {
        let mut p = 1.0;
        for j in 0..n {
            if j != i {
                p *= x[offsets[j] + idx[j]];
            }
        }
        dev[idx[i]] += p * payoff;
        for j in (0..n).rev() {
            idx[j] += 1;
            if idx[j] < actions[j] {
                break;
            }
            idx[j] = 0;
        }
    }
    dev
}

/// Whether `x` is a Nash `ε`-equilibrium, by pure deviations.
pub fn eps_nash_check(game: &FiniteGame, x: &[f64], eps: f64) -> Result<NashCheck> {
    game.check_profile(x)?;
    Ok(nash_gaps(game, x, eps))
}

pub(crate) fn nash_gaps(game: &FiniteGame, x: &[f64], eps: f64) -> NashCheck {
    let gaps: Vec<f64> = (0..game.players)
        .map(|i| {
            let dev = game.deviation_payoffs(i, x);
            let own: f64 = dev.iter().zip(&x[game.block(i)]).map(|(d, p)| d * p).sum();
            let best = dev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (best - own).max(0.0)
        })
        .collect();
    let worst_gap = gaps.iter().copied().fold(0.0, f64::max);
    NashCheck { is_member: worst_gap <= eps, worst_gap, gaps }
}

/// One player's view of a finite game.
#[derive(Debug, Clone)]
pub struct FinitePlayer {
    actions: Vec<usize>,
    payoff: Vec<f64>,
    index: usize,
}

impl BestReplyOracle for FinitePlayer {
    fn block(&self) -> Range<usize> {
        let start: usize = self.actions[..self.index].iter().sum();
        start..start + self.actions[self.index]
    }

    fn best_reply(&self, z: &[f64]) -> Vec<f64> {
        let dev = payoffs_against(&self.actions, &self.payoff, self.index, z);
        let mut best = 0;
        for (b, v) in dev.iter().enumerate() {
            if *v > dev[best] {
                best = b;
            }
        }
        let mut e = vec![0.0; dev.len()];
        e[best] = 1.0;
        e
    }

    fn payoff(&self, own: &[f64], z: &[f64]) -> f64 {
        let dev = payoffs_against(&self.actions, &self.payoff, self.index, z);
        dev.iter().zip(own).map(|(d, p)| d * p).sum()
    }

    fn best_value(&self, z: &[f64]) -> f64 {
        payoffs_against(&self.actions, &self.payoff, self.index, z).into_iter().fold(f64::NEG_INFINITY, f64::max)
    }
}
