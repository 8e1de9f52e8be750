use serde::{Deserialize, Serialize};

/// `D_1 = 4 (ln d! + d ln 4 + d ln(1 + 1/(a(1−λ))))`.
pub fn d1(d: usize, a: f64, lambda: f64) -> f64 {
    d1_from_gap(d, a, 1.0 - lambda)
}

fn d1_from_gap(d: usize, a: f64, gap: f64) -> f64 {
    let df = d as f64;
    let ln_fact: f64 = (2..=d).map(|k| (k as f64).ln()).sum();
    4.0 * (ln_fact + df * 4f64.ln() + df * (1.0 / (a * gap)).ln_1p())
}

/// `D_2 = 2 (a + d)(a(1−λ) + 1) / (a³ (1−λ)²)`.
pub fn d2(d: usize, a: f64, lambda: f64) -> f64 {
    d2_from_gap(d, a, 1.0 - lambda)
}

fn d2_from_gap(d: usize, a: f64, gap: f64) -> f64 {
    2.0 * (a + d as f64) * (a * gap + 1.0) / (a * a * a * gap * gap)
}

/// Right side of the windowed regret estimate for a reference `θ` with
/// `||θ||² = theta_sq`:
/// `(a||θ||² + D_1)(1 − λ + λ/R) + (||θ|| + 1)²/(R(1−λ)) + D_2 λ^R`.
pub fn windowed_regret_rhs(d: usize, a: f64, lambda: f64, recall: f64, theta_sq: f64) -> f64 {
    let gap = 1.0 - lambda;
    (a * theta_sq + d1(d, a, lambda)) * (gap + lambda / recall)
        + (theta_sq.sqrt() + 1.0).powi(2) / (recall * gap)
        + d2(d, a, lambda) * lambda.powf(recall)
}

/// Tuned constants in units where `X = Y = 1`, plus the ridge in original units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunedParameters {
    /// Ridge in original units, `a_norm X²`.
    pub a: f64,
    /// Ridge in rescaled units (always 1).
    pub a_normalized: f64,
    pub lambda: f64,
    /// `λ = 1 − 2^{−k}`.
    pub k: u32,
    /// `1 − λ`, exact.
    pub gap: f64,
    /// Smallest admissible recall; integer valued, may exceed `usize`.
    pub recall: f64,
    pub d1: f64,
    pub d2: f64,
    /// Rescaled target `ε / Y²`.
    pub eps_normalized: f64,
}

impl TunedParameters {
    pub fn recall_usize(&self) -> Option<usize> {
        if self.recall <= usize::MAX as f64 / 2.0 {
            Some(self.recall as usize)
        } else {
            None
        }
    }

    /// The four recall conditions and two discount conditions, each as `value ≤ ε/4`.
    pub fn conditions(&self) -> [(&'static str, f64); 6] {
        let a = self.a_normalized;
        let r = self.recall;
        [
            ("a(1-lambda)", a * self.gap),
            ("D1(1-lambda)", self.d1 * self.gap),
            ("a/R", a / r),
            ("D1/R", self.d1 / r),
            ("2/(R(1-lambda))", 2.0 / (r * self.gap)),
            ("D2 lambda^R", self.d2 * (r * (-self.gap).ln_1p()).exp()),
        ]
    }

    pub fn satisfied(&self) -> bool {
        let q = self.eps_normalized / 4.0;
        self.conditions().iter().all(|(_, v)| *v <= q)
    }
}

/// Smallest `λ ∈ {1 − 2^{−k}}` and then smallest `R` such that
/// `a(1−λ)`, `D_1(1−λ)`, `a/R`, `D_1/R`, `2/(R(1−λ))` and `D_2 λ^R` are all at most `ε/4`,
/// with `a = 1` after rescaling to `X = Y = 1`.
pub fn tune_parameters(eps: f64, x_bound: f64, y_bound: f64, d: usize) -> TunedParameters {
    let a = 1.0;
    let e = eps / (y_bound * y_bound);
    let q = e / 4.0;
    let mut k = 1u32;
    let gap = loop {
        let gap = 0.5f64.powi(k as i32);
        if a * gap <= q && d1_from_gap(d, a, gap) * gap <= q {
            break gap;
        }
        k += 1;
    };
    let dd1 = d1_from_gap(d, a, gap);
    let dd2 = d2_from_gap(d, a, gap);
    let ln_lambda = (-gap).ln_1p();
    let candidates = [
        (a / q).ceil(),
        (dd1 / q).ceil(),
        (2.0 / (q * gap)).ceil(),
        ((q / dd2).ln() / ln_lambda).ceil(),
    ];
    let recall = candidates.iter().copied().fold(1.0, f64::max);
    let mut out = TunedParameters {
        a: a * x_bound * x_bound,
        a_normalized: a,
        lambda: 1.0 - gap,
        k,
        gap,
        recall,
        d1: dd1,
        d2: dd2,
        eps_normalized: e,
    };
    while !out.satisfied() {
        out.recall += 1.0;
    }
    while out.recall > 1.0 {
        let mut fewer = out.clone();
        fewer.recall -= 1.0;
        if fewer.satisfied() {
            out = fewer;
        } else {
            break;
        }
    }
    out
}
