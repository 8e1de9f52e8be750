use super::config::ForecasterConfig;
use super::window::RecallWindow;
use crate::error::{check_dim, Result};
use crate::linalg::{add_outer, Cholesky};

/// `H_t(c)` by direct construction: one SPD solve per coordinate.
/// `c` is any point of `R^m` in normalized coordinates; it is projected first.
pub fn eval_h(config: &ForecasterConfig, window: &RecallWindow, c: &[f64]) -> Result<Vec<f64>> {
    let m = config.dim();
    check_dim(m, c.len())?;
    let d = config.basis_len();
    let p = config.domain.project(c)?;
    let f = config.basis.eval(&p)?;
    let mut z = vec![0.0; d * d];
    for i in 0..d {
        z[i * d + i] = 1.0;
    }
    let mut v = vec![vec![0.0; d]; m];
    for (w, e) in window.weighted(config.lambda()) {
        add_outer(&mut z, &e.x, w);
        for j in 0..m {
            for (vi, xi) in v[j].iter_mut().zip(&e.x) {
                *vi += w * e.a[j] * xi;
            }
        }
    }
    add_outer(&mut z, &f, 1.0);
    let chol = Cholesky::factor(&z, d).expect("Z is positive definite");
    Ok(v.iter()
        .map(|vj| {
            let theta = chol.solve(vj);
            theta.iter().zip(&f).map(|(t, x)| t * x).sum()
        })
        .collect())
}

/// `H_t` prepared for repeated evaluation within one period.
///
/// With `S = I + Σ λ^{age} x_q x_q'` and `w_j = S^{-1} v^{(j)}`,
/// `H_j(c) = F(c)'w_j / (1 + F(c)'S^{-1}F(c))`. `S` is assembled from the
/// window grouped by distinct forecast, so the map depends on the window only.
#[derive(Debug, Clone)]
pub struct HMap<'a> {
    config: &'a ForecasterConfig,
    s_inv: Vec<f64>,
    w: Vec<Vec<f64>>,
    empty: bool,
    scratch: Vec<(usize, f64)>,
    sparse: Vec<(usize, f64)>,
    point: Vec<f64>,
}

impl<'a> HMap<'a> {
    pub fn new(config: &'a ForecasterConfig, window: &RecallWindow) -> Self {
        let m = config.dim();
        let d = config.basis_len();
        let mut slot = vec![u32::MAX; window.id_count()];
        let mut groups: Vec<(&[f64], f64, Vec<f64>)> = Vec::new();
        for (w, e) in window.weighted(config.lambda()) {
            let sl = &mut slot[e.id as usize];
            if *sl == u32::MAX {
                *sl = groups.len() as u32;
                groups.push((e.x.as_slice(), 0.0, vec![0.0; m]));
            }
            let g = &mut groups[*sl as usize];
            g.1 += w;
            for (s, a) in g.2.iter_mut().zip(&e.a) {
                *s += w * a;
            }
        }
        let mut s = vec![0.0; d * d];
        for i in 0..d {
            s[i * d + i] = 1.0;
        }
        let mut v = vec![vec![0.0; d]; m];
        for (x, w, wa) in &groups {
            add_outer(&mut s, x, *w);
            for j in 0..m {
                for (vi, xi) in v[j].iter_mut().zip(x.iter()) {
                    *vi += wa[j] * xi;
                }
            }
        }
        let chol = Cholesky::factor(&s, d).expect("S is positive definite");
        let mut s_inv = vec![0.0; d * d];
        let mut col = vec![0.0; d];
        for i in 0..d {
            col.iter_mut().for_each(|c| *c = 0.0);
            col[i] = 1.0;
            chol.solve_in_place(&mut col);
            for r in 0..d {
                s_inv[r * d + i] = col[r];
            }
        }
        let w = v.iter().map(|vj| chol.solve(vj)).collect();
        Self {
            config,
            s_inv,
            w,
            empty: groups.is_empty(),
            scratch: Vec::new(),
            sparse: Vec::new(),
            point: vec![0.0; m],
        }
    }

    pub fn dim(&self) -> usize {
        self.config.dim()
    }

    /// Writes `H(γ(b))` into `out`.
    pub fn eval_into(&mut self, b: &[f64], out: &mut [f64]) {
        if self.empty {
            out.iter_mut().for_each(|o| *o = 0.0);
            return;
        }
        self.point.copy_from_slice(b);
        self.config.domain.project_in_place(&mut self.point);
        self.config.basis.eval_sparse(&self.point, &mut self.scratch, &mut self.sparse);
        let d = self.config.basis_len();
        let mut q = 0.0;
        for &(i, fi) in &self.sparse {
            let row = &self.s_inv[i * d..(i + 1) * d];
            for &(k, fk) in &self.sparse {
                q += fi * row[k] * fk;
            }
        }
        let denom = 1.0 + q;
        for (o, wj) in out.iter_mut().zip(&self.w) {
            let num: f64 = self.sparse.iter().map(|&(i, fi)| fi * wj[i]).sum();
            *o = num / denom;
        }
    }

    pub fn eval(&mut self, b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(b, &mut out);
        out
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.empty
    }
}
