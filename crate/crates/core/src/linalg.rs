//! Dense LU factorization with partial pivoting for the small square
//! collocation systems.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Lu {
    n: usize,
    // Row-major; strictly lower part holds L (unit diagonal), the rest U.
    factors: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    pub(crate) fn factor(matrix: &[f64], n: usize) -> Result<Self> {
        debug_assert_eq!(matrix.len(), n * n);
        let mut a = matrix.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = matrix.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tiny = scale * f64::EPSILON * n as f64;
        for k in 0..n {
            let (pivot_row, pivot) = (k..n)
                .map(|r| (r, a[r * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pivot > tiny) {
                return Err(Error::Singular(alloc::format!(
                    "zero pivot in column {k} of a {n}x{n} collocation matrix"
                )));
            }
            if pivot_row != k {
                for c in 0..n {
                    a.swap(k * n + c, pivot_row * n + c);
                }
                perm.swap(k, pivot_row);
            }
            let d = a[k * n + k];
            for r in k + 1..n {
                let l = a[r * n + k] / d;
                a[r * n + k] = l;
                if l != 0.0 {
                    for c in k + 1..n {
                        a[r * n + c] -= l * a[k * n + c];
                    }
                }
            }
        }
        Ok(Self {
            n,
            factors: a,
            perm,
        })
    }

    pub(crate) fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` in place.
    pub(crate) fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        // n <= MAX_DEGREE + 1
        let mut y = [0.0f64; 64];
        let y = &mut y[..n];
        for i in 0..n {
            let mut s = b[self.perm[i]];
            for j in 0..i {
                s -= self.factors[i * n + j] * y[j];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.factors[i * n + j] * b[j];
            }
            b[i] = s / self.factors[i * n + i];
        }
    }

    /// Explicit inverse, row-major. Only used for diagnostics.
    pub(crate) fn inverse(&self) -> Vec<f64> {
        let n = self.n;
        let mut inv = vec![0.0; n * n];
        let mut col = vec![0.0; n];
        for c in 0..n {
            col.iter_mut().for_each(|v| *v = 0.0);
            col[c] = 1.0;
            self.solve_in_place(&mut col);
            for r in 0..n {
                inv[r * n + c] = col[r];
            }
        }
        inv
    }
}

/// Induced infinity norm (max absolute row sum) of a row-major matrix.
pub(crate) fn norm_inf(matrix: &[f64], n: usize) -> f64 {
    matrix
        .chunks(n)
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
