use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{lipschitz_basis_capped, maximal_net_default, BasisFamily, ConvexDomain, Lattice, PartitionOfUnity};
use crate::regression::{tune_parameters, TunedParameters};

/// Which constants size the forecaster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// Constants exactly as in the existence proof.
    Theory,
    /// Small net, explicit discount and recall.
    Desk,
}

/// Admissible actions `A ⊆ C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActionSet {
    Domain,
    Finite { points: Vec<Vec<f64>> },
}

impl ActionSet {
    /// `{0, 1}`.
    pub fn binary() -> Self {
        ActionSet::Finite { points: vec![vec![0.0], vec![1.0]] }
    }

    pub fn contains(&self, domain: &ConvexDomain, a: &[f64]) -> bool {
        match self {
            ActionSet::Domain => domain.contains(a, 1e-12),
            ActionSet::Finite { points } => points
                .iter()
                .any(|p| p.len() == a.len() && p.iter().zip(a).all(|(x, y)| (x - y).abs() <= 1e-12)),
        }
    }
}

/// Fixed-point solver tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOptions {
    pub tol: f64,
    pub tol_coarse: f64,
    pub max_iter: usize,
    pub eta: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-8, tol_coarse: 1e-3, max_iter: 10_000, eta: 0.5 }
    }
}

/// Everything needed to rebuild a [`ForecasterConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForecasterSettings {
    pub profile: Profile,
    pub domain: ConvexDomain,
    pub actions: ActionSet,
    pub eps: f64,
    pub lipschitz: f64,
    /// Radius of the net behind the partition basis (desk only).
    pub net_radius: f64,
    /// Discount and recall (desk only; the theory profile tunes them).
    pub lambda: f64,
    pub recall: usize,
    /// Covering radius of the forecast grid; `None` means `ε_4`.
    pub grid_radius: Option<f64>,
    #[serde(default)]
    pub solver: SolverOptions,
}

impl ForecasterSettings {
    /// Desk instance on `C = [0,1]`, `A = {0,1}`.
    pub fn desk_unit_interval() -> Self {
        Self {
            profile: Profile::Desk,
            domain: ConvexDomain::unit_box(1),
            actions: ActionSet::binary(),
            eps: 0.01,
            lipschitz: 1.0,
            net_radius: 1.0 / 16.0,
            lambda: 0.995,
            recall: 1000,
            grid_radius: None,
            solver: SolverOptions::default(),
        }
    }

    pub fn desk(domain: ConvexDomain, actions: ActionSet) -> Self {
        Self { domain, actions, ..Self::desk_unit_interval() }
    }

    /// FNV-1a hash of a canonical description, used to tag saved state.
    pub fn fingerprint(&self) -> u64 {
        let text = format!("{self:?}");
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in text.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        h
    }
}

/// Constants derived from `(ε, L, m, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub eps1: f64,
    pub eps2: f64,
    pub eps3: f64,
    pub eps4: f64,
    /// Box bound `K = dλ/(1−λ)` on `|H_j|`.
    pub k_bound: f64,
}

impl DerivedConstants {
    pub fn compute(eps: f64, lipschitz: f64, m: usize, d: usize, lambda: f64) -> Self {
        let (mf, df) = (m as f64, d as f64);
        let eps2 = eps / (mf + mf * (1.0 + df).powi(2) + df * df);
        Self {
            eps1: eps / (2.0 * mf.sqrt()),
            eps2,
            eps3: eps2 * eps2,
            eps4: eps / (lipschitz * mf.sqrt() + 1.0),
            k_bound: df * lambda / (1.0 - lambda),
        }
    }
}

/// Constants of the theory profile; the recall is usually far beyond memory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryConstants {
    pub d: usize,
    pub derived: DerivedConstants,
    pub tuned: TunedParameters,
}

/// Theory-profile sizing for `(domain, ε, L)`; `cap` bounds the basis size.
pub fn theory_constants(domain: &ConvexDomain, eps: f64, lipschitz: f64, cap: usize) -> Result<TheoryConstants> {
    let m = domain.dim();
    let eps1 = eps / (2.0 * (m as f64).sqrt());
    let basis = lipschitz_basis_capped(domain, lipschitz, eps1, cap)?;
    let d = basis.len();
    let d0 = DerivedConstants::compute(eps, lipschitz, m, d, 0.5);
    let tuned = tune_parameters(d0.eps3, (d as f64).sqrt(), 1.0, d);
    Ok(TheoryConstants { d, derived: DerivedConstants::compute(eps, lipschitz, m, d, tuned.lambda), tuned })
}

/// Uniform affine map of a box into `[0,1]^m`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Normalization {
    shift: Vec<f64>,
    scale: f64,
}

impl Normalization {
    fn for_domain(domain: &ConvexDomain) -> Result<(Self, ConvexDomain)> {
        let m = domain.dim();
        let identity = Self { shift: vec![0.0; m], scale: 1.0 };
        match domain {
            ConvexDomain::Box { lower, upper } if lower.iter().any(|l| *l < 0.0) || upper.iter().any(|u| *u > 1.0) => {
                let scale = lower.iter().zip(upper).map(|(l, u)| u - l).fold(0.0, f64::max);
                if scale <= 0.0 {
                    return Ok((identity, domain.clone()));
                }
                let lo = vec![0.0; m];
                let hi: Vec<f64> = lower.iter().zip(upper).map(|(l, u)| (u - l) / scale).collect();
                Ok((Self { shift: lower.clone(), scale }, ConvexDomain::new_box(lo, hi)?))
            }
            ConvexDomain::Box { .. } | ConvexDomain::Simplex { .. } => Ok((identity, domain.clone())),
            ConvexDomain::Product { .. } => {
                let inside = domain.factors().iter().all(|f| match f {
                    ConvexDomain::Box { lower, upper } => {
                        lower.iter().all(|l| *l >= 0.0) && upper.iter().all(|u| *u <= 1.0)
                    }
                    _ => true,
                });
                if inside {
                    Ok((identity, domain.clone()))
                } else {
                    Err(Error::InvalidParameter("product domains must lie in the unit cube".into()))
                }
            }
        }
    }

    pub(crate) fn scale(&self) -> f64 {
        self.scale
    }

    pub(crate) fn is_identity(&self) -> bool {
        self.scale == 1.0 && self.shift.iter().all(|s| *s == 0.0)
    }

    pub(crate) fn forward(&self, x: &[f64]) -> Vec<f64> {
        if self.is_identity() {
            return x.to_vec();
        }
        x.iter().zip(&self.shift).map(|(v, s)| (v - s) / self.scale).collect()
    }

    pub(crate) fn backward(&self, x: &[f64]) -> Vec<f64> {
        if self.is_identity() {
            return x.to_vec();
        }
        x.iter().zip(&self.shift).map(|(v, s)| v * self.scale + s).collect()
    }
}

/// A built forecaster configuration: basis `F`, regression constants and forecast grid.
#[derive(Debug, Clone)]
pub struct ForecasterConfig {
    settings: ForecasterSettings,
    pub(crate) normalization: Normalization,
    /// Domain after normalization into the unit cube.
    pub(crate) domain: ConvexDomain,
    pub(crate) basis: BasisFamily,
    pub(crate) grid: Lattice,
    derived: DerivedConstants,
}

impl ForecasterConfig {
    pub fn build(settings: ForecasterSettings) -> Result<Self> {
        settings.domain.validate()?;
        let s = &settings;
        if !(s.eps > 0.0 && s.eps <= 1.0) || !(s.lipschitz >= 1.0) {
            return Err(Error::InvalidParameter(format!("need 0 < eps <= 1 and L >= 1, got {} and {}", s.eps, s.lipschitz)));
        }
        if !(s.lambda > 0.0 && s.lambda < 1.0) || s.recall < 1 {
            return Err(Error::InvalidParameter(format!("need 0 < lambda < 1 and R >= 1, got {} and {}", s.lambda, s.recall)));
        }
        if let ActionSet::Finite { points } = &s.actions {
            for p in points {
                check_dim(s.domain.dim(), p.len())?;
                if !s.domain.contains(p, 1e-12) {
                    return Err(Error::ActionOutsideSet);
                }
            }
        }
        let (normalization, domain) = Normalization::for_domain(&s.domain)?;
        let basis = match s.profile {
            Profile::Desk => {
                let net = maximal_net_default(&domain, s.net_radius)?;
                BasisFamily::partition_basis(PartitionOfUnity::new(net))?
            }
            Profile::Theory => {
                let eps1 = s.eps / (2.0 * (domain.dim() as f64).sqrt());
                lipschitz_basis_capped(&domain, s.lipschitz, eps1, crate::geometry::DEFAULT_MAX_BASIS)?
            }
        };
        let derived = DerivedConstants::compute(s.eps, s.lipschitz, domain.dim(), basis.len(), s.lambda);
        let grid = domain.lattice(s.grid_radius.unwrap_or(derived.eps4))?;
        Ok(Self { settings, normalization, domain, basis, grid, derived })
    }

    pub fn settings(&self) -> &ForecasterSettings {
        &self.settings
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Number of basis members `d`.
    pub fn basis_len(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &BasisFamily {
        &self.basis
    }

    pub fn lambda(&self) -> f64 {
        self.settings.lambda
    }

    pub fn recall(&self) -> usize {
        self.settings.recall
    }

    pub fn derived(&self) -> &DerivedConstants {
        &self.derived
    }

    pub fn grid(&self) -> &Lattice {
        &self.grid
    }

    /// Forecast grid in the caller's coordinates.
    pub fn grid_points(&self) -> Vec<Vec<f64>> {
        self.grid.points().iter().map(|p| self.normalization.backward(p)).collect()
    }

    /// Basis members as weight functions on the caller's domain.
    pub fn basis_weights(&self) -> Vec<crate::scores::WeightFunction> {
        let d = self.basis_len();
        let beta_l = self.basis.partition().lipschitz_bound();
        let m = self.dim();
        (0..d)
            .map(|i| {
                let basis = self.basis.clone();
                let norm = self.normalization.clone();
                let l = if i < m { 1.0 / norm.scale() } else { beta_l / norm.scale() };
                crate::scores::WeightFunction::new(format!("basis[{i}]"), l, move |c| {
                    let mut sc = Vec::new();
                    let mut sp = Vec::new();
                    basis.eval_sparse(&norm.forward(c), &mut sc, &mut sp);
                    sp.iter().find(|(j, _)| *j == i).map_or(0.0, |(_, v)| *v)
                })
            })
            .collect()
    }

    /// Recomputes the derived constants and compares them bit for bit.
    pub fn constants_consistent(&self) -> bool {
        let s = &self.settings;
        DerivedConstants::compute(s.eps, s.lipschitz, self.dim(), self.basis_len(), s.lambda) == self.derived
    }
}
