//! Dense symmetric positive-definite factorization on row-major buffers.
//!
//! The matrices met in this crate are small (a few dozen rows at most), so
//! a plain Cholesky factor with in-place triangular solves is enough.

/// Lower-triangular Cholesky factor `L` with `A = L L'`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factors the `n x n` row-major matrix `a`; only the lower triangle is read.
    /// Returns `None` when a pivot is not strictly positive.
    pub fn factor(a: &[f64], n: usize) -> Option<Self> {
        let mut ch = Self { n, l: vec![0.0; n * n] };
        ch.refactor(a).then_some(ch)
    }

    /// Factors `a` into the existing buffer; `false` when a pivot is not
    /// strictly positive, leaving the factor unusable.
    pub fn refactor(&mut self, a: &[f64]) -> bool {
        let n = self.n;
        assert_eq!(a.len(), n * n);
        let l = &mut self.l;
        for i in 0..n {
            for j in 0..=i {
                let mut s = a[i * n + j];
                let (ri, rj) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
                for k in 0..j {
                    s -= ri[k] * rj[k];
                }
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return false;
                    }
                    l[i * n + i] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        true
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `L y = b` in place.
    pub fn forward(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            let mut s = b[i];
            for (k, lk) in row.iter().enumerate() {
                s -= lk * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
    }

    /// Solves `L' x = y` in place.
    pub fn backward(&self, b: &mut [f64]) {
        let n = self.n;
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        self.forward(b);
        self.backward(b);
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// `ln det A`.
    pub fn log_det(&self) -> f64 {
        (0..self.n).map(|i| 2.0 * self.l[i * self.n + i].ln()).sum()
    }
}

/// Whether the symmetric matrix `a` has every eigenvalue at least `floor`,
/// decided by factoring `a - floor (1 - 1e-9) I`.
pub fn min_eigenvalue_at_least(a: &[f64], n: usize, floor: f64) -> bool {
    let mut shifted = a.to_vec();
    let shift = floor * (1.0 - 1e-9);
    for i in 0..n {
        shifted[i * n + i] -= shift;
    }
    Cholesky::factor(&shifted, n).is_some()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `m += w x x'` on the full row-major square.
pub fn add_outer(m: &mut [f64], x: &[f64], w: f64) {
    let n = x.len();
    for i in 0..n {
        let wi = w * x[i];
        if wi == 0.0 {
            continue;
        }
        let row = &mut m[i * n..(i + 1) * n];
        for (r, xj) in row.iter_mut().zip(x) {
            *r += wi * xj;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let a = [4.0, 2.0, 2.0, 3.0];
        let ch = Cholesky::factor(&a, 2).unwrap();
        let x = ch.solve(&[2.0, 1.0]);
        assert!((4.0 * x[0] + 2.0 * x[1] - 2.0).abs() < 1e-14);
        assert!((2.0 * x[0] + 3.0 * x[1] - 1.0).abs() < 1e-14);
        assert!((ch.log_det() - 8f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn rejects_indefinite() {
        assert!(Cholesky::factor(&[1.0, 2.0, 2.0, 1.0], 2).is_none());
        assert!(min_eigenvalue_at_least(&[2.0, 0.0, 0.0, 3.0], 2, 2.0));
        assert!(!min_eigenvalue_at_least(&[2.0, 0.0, 0.0, 3.0], 2, 2.5));
    }
}
