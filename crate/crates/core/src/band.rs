//! Banded Cholesky factorization for symmetric positive definite matrices.

use crate::error::{Error, Result};

/// Lower factor L with `l[k * (b + 1) + d] = L[k][k - d]`.
#[derive(Clone, Debug)]
pub struct BandCholesky {
    n: usize,
    b: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    /// Factors the matrix given by `entry(k, d) = A[k][k - d]` for d in 0..=b.
    pub fn factor<F: Fn(usize, usize) -> f64>(n: usize, b: usize, entry: F) -> Result<Self> {
        let w = b + 1;
        let mut l = vec![0.0; n * w];
        for k in 0..n {
            for d in 0..w {
                if d <= k {
                    l[k * w + d] = entry(k, d);
                }
            }
        }
        for k in 0..n {
            let lo = k.saturating_sub(b);
            for c in lo..k {
                let d = k - c;
                let mut s = l[k * w + d];
                // Overlap of rows k and c left of column c.
                let m_lo = lo.max(c.saturating_sub(b));
                for m in m_lo..c {
                    s -= l[k * w + (k - m)] * l[c * w + (c - m)];
                }
                l[k * w + d] = s / l[c * w];
            }
            let mut s = l[k * w];
            for m in lo..k {
                let v = l[k * w + (k - m)];
                s -= v * v;
            }
            if s <= 0.0 || !s.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "band matrix not positive definite at row {k}"
                )));
            }
            l[k * w] = s.sqrt();
        }
        Ok(BandCholesky { n, b, l })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let (n, b, w) = (self.n, self.b, self.b + 1);
        let mut y = rhs.to_vec();
        for k in 0..n {
            let mut s = y[k];
            for m in k.saturating_sub(b)..k {
                s -= self.l[k * w + (k - m)] * y[m];
            }
            y[k] = s / self.l[k * w];
        }
        for k in (0..n).rev() {
            let mut s = y[k];
            for m in k + 1..(k + b + 1).min(n) {
                s -= self.l[m * w + (m - k)] * y[m];
            }
            y[k] = s / self.l[k * w];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_tridiagonal_system() {
        let n = 50;
        let entry = |k: usize, d: usize| match d {
            0 => 2.0 + 0.01 * k as f64,
            1 => -1.0,
            _ => 0.0,
        };
        let f = BandCholesky::factor(n, 2, entry).unwrap();
        let x0: Vec<f64> = (0..n).map(|k| (k as f64 * 0.3).sin()).collect();
        let mut b = vec![0.0; n];
        for k in 0..n {
            b[k] = entry(k, 0) * x0[k];
            if k > 0 {
                b[k] -= x0[k - 1];
            }
            if k + 1 < n {
                b[k] -= x0[k + 1];
            }
        }
        let x = f.solve(&b);
        for k in 0..n {
            assert!((x[k] - x0[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_indefinite() {
        assert!(BandCholesky::factor(3, 1, |_, d| if d == 0 { 1.0 } else { 2.0 }).is_err());
    }
}
