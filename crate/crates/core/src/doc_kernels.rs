//! Discrete orthogonal convolution (DOC) kernels.
//!
//! For a fixed mesh the kernels `θ^{(n)}_{n-j}`, `3 <= j <= n`, are the rows
//! of the inverse of the lower-triangular BDF3 kernel matrix:
//!
//! ```text
//! θ^{(n)}_0 = 1 / d^{(n)}_0
//! θ^{(n)}_{n-j} = -(1 / d^{(j)}_0) Σ_{i=j+1}^{n} θ^{(n)}_{n-i} d^{(i)}_{i-j},   3 <= j <= n-1
//! ```
//!
//! Only `d_0, d_1, d_2` are nonzero, so each entry costs O(1) and a row O(n).

use crate::bdf3_kernels::{check_index, d_raw, Bdf3Coefficients};
use crate::time_mesh::TimeMesh;
use crate::util::compensated_sum;
use crate::{Error, Result};

/// Lower-triangular table of DOC kernels for `3 <= j <= n <= n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct DocKernelTable {
    n_max: usize,
    /// `kernels[n - 3]` holds `d^{(n)}`.
    kernels: Vec<Bdf3Coefficients>,
    /// `rows[n - 3][j - 3]` holds `θ^{(n)}_{n-j}`.
    rows: Vec<Vec<f64>>,
}

/// Absolute row and column sums of a DOC table.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsSums {
    /// `row_sums[n - 3] = Σ_j |θ^{(n)}_{n-j}|`.
    pub row_sums: Vec<f64>,
    /// `col_sums[i - 3] = Σ_{n=i}^{n_max} |θ^{(n)}_{n-i}|`.
    pub col_sums: Vec<f64>,
    /// Largest row or column sum, the numerical estimate of `K_3`.
    pub k3_hat: f64,
}

impl DocKernelTable {
    /// Builds rows `3..=n_max` on `mesh` (`n_max <= N`).
    pub fn build(mesh: &TimeMesh, n_max: usize) -> Result<Self> {
        check_index(n_max, 3, mesh.len())?;
        let kernels: Vec<Bdf3Coefficients> = (3..=n_max)
            .map(|n| d_raw(mesh.ratio(n), mesh.ratio(n - 1)))
            .collect();
        let d = |i: usize, j: usize| kernels[i - 3].get(i - j);

        let mut rows = Vec::with_capacity(n_max - 2);
        for n in 3..=n_max {
            let mut row = vec![0.0; n - 2];
            row[n - 3] = 1.0 / d(n, n);
            for j in (3..n).rev() {
                let upper = (j + 2).min(n);
                let acc: f64 = (j + 1..=upper).map(|i| row[i - 3] * d(i, j)).sum();
                row[j - 3] = -acc / d(j, j);
            }
            rows.push(row);
        }
        Ok(Self {
            n_max,
            kernels,
            rows,
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `θ^{(n)}_{n-j}` for `3 <= j <= n <= n_max`.
    pub fn theta(&self, n: usize, j: usize) -> f64 {
        self.rows[n - 3][j - 3]
    }

    /// Row `n`, indexed by `j - 3`.
    pub fn row(&self, n: usize) -> &[f64] {
        &self.rows[n - 3]
    }

    /// BDF3 kernel `d^{(i)}_{i-j}` (zero unless `i - 2 <= j <= i`).
    pub fn d(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.kernels[i - 3].get(i - j)
        }
    }

    fn check_row(&self, n: usize) -> Result<()> {
        check_index(n, 3, self.n_max)
    }

    /// `max_j |Σ_{i=j}^n θ^{(n)}_{n-i} d^{(i)}_{i-j} - δ_{nj}|`.
    pub fn orthogonality_residual(&self, n: usize) -> Result<f64> {
        self.check_row(n)?;
        let mut worst = 0.0_f64;
        for j in 3..=n {
            let upper = (j + 2).min(n);
            let s = compensated_sum((j..=upper).map(|i| self.theta(n, i) * self.d(i, j)));
            let delta = if j == n { 1.0 } else { 0.0 };
            worst = worst.max((s - delta).abs());
        }
        Ok(worst)
    }

    /// `max_j |Σ_{i=j}^n d^{(n)}_{n-i} θ^{(i)}_{i-j} - δ_{nj}|`.
    pub fn mutual_orthogonality_residual(&self, n: usize) -> Result<f64> {
        self.check_row(n)?;
        let mut worst = 0.0_f64;
        for j in 3..=n {
            let lower = j.max(n.saturating_sub(2));
            let s = compensated_sum((lower..=n).map(|i| self.d(n, i) * self.theta(i, j)));
            let delta = if j == n { 1.0 } else { 0.0 };
            worst = worst.max((s - delta).abs());
        }
        Ok(worst)
    }

    pub fn abs_sums(&self) -> AbsSums {
        let m = self.n_max - 2;
        let mut row_sums = Vec::with_capacity(m);
        let mut col_sums = vec![0.0; m];
        for row in &self.rows {
            let mut s = 0.0;
            for (c, theta) in row.iter().enumerate() {
                s += theta.abs();
                col_sums[c] += theta.abs();
            }
            row_sums.push(s);
        }
        let k3_hat = row_sums
            .iter()
            .chain(col_sums.iter())
            .copied()
            .fold(0.0, f64::max);
        AbsSums {
            row_sums,
            col_sums,
            k3_hat,
        }
    }

    /// Starting effect
    /// `I^n[v] = ∂v² Σ_{i=3}^n θ^{(n)}_{n-i} d^{(i)}_{i-2} + θ^{(n)}_{n-3} d^{(3)}_2 ∂v¹`.
    pub fn initial_effect(&self, dtau_v1: f64, dtau_v2: f64, n: usize) -> Result<f64> {
        self.check_row(n)?;
        let upper = n.min(4);
        let weight2: f64 = (3..=upper).map(|i| self.theta(n, i) * self.d(i, 2)).sum();
        Ok(dtau_v2 * weight2 + self.theta(n, 3) * self.d(3, 1) * dtau_v1)
    }

    /// `|Σ_{i=3}^n θ^{(n)}_{n-i} D3 v^i - I^n[v] - ∂v^n|` for nodal values
    /// `v^0..v^n`.
    pub fn doc_transform_residual(&self, mesh: &TimeMesh, values: &[f64], n: usize) -> Result<f64> {
        self.check_row(n)?;
        if values.len() < n + 1 {
            return Err(Error::NotEnoughValues {
                need: n + 1,
                got: values.len(),
            });
        }
        let dq = |j: usize| (values[j] - values[j - 1]) / mesh.tau(j);
        let d3 = |i: usize| {
            let d = &self.kernels[i - 3];
            d.d0 * dq(i) + d.d1 * dq(i - 1) + d.d2 * dq(i - 2)
        };
        let lhs = compensated_sum((3..=n).map(|i| self.theta(n, i) * d3(i)));
        let start = self.initial_effect(dq(1), dq(2), n)?;
        Ok(compensated_sum([lhs, -start, -dq(n)]).abs())
    }
}
