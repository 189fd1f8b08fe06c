//! Positivity of the BDF3 and DOC quadratic forms.
//!
//! The BDF3 form `2 Σ_k ξ_k Σ_j τ_k d^{(k)}_{k-j} ξ_j` is `ξᵀ B ξ` with a
//! symmetric pentadiagonal `B`. Rescaling by `diag(√τ_k)` leaves a matrix
//! that only depends on the step ratios, which is what [`rescaled_matrix`]
//! builds and [`eigscan`] probes with random ratios.

use crate::bdf3_kernels::{check_index, d_raw};
use crate::doc_kernels::DocKernelTable;
use crate::rng::SeededRng;
use crate::time_mesh::TimeMesh;
use crate::util::compensated_sum;
use crate::{Error, Result};

/// Sweep cap for [`min_eigenvalue`].
pub const MAX_SWEEPS: usize = 100;

/// Default relative tolerance for the eigenvalue routines.
pub const EIG_TOL: f64 = 1e-14;

/// Symmetric matrix with two nonzero sub-diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricBandMatrix {
    diag: Vec<f64>,
    /// `sub1[i]` is entry `(i + 1, i)`.
    sub1: Vec<f64>,
    /// `sub2[i]` is entry `(i + 2, i)`.
    sub2: Vec<f64>,
}

impl SymmetricBandMatrix {
    pub fn new(diag: Vec<f64>, sub1: Vec<f64>, sub2: Vec<f64>) -> Result<Self> {
        let m = diag.len();
        if m == 0 {
            return Err(Error::NotEnoughValues { need: 1, got: 0 });
        }
        if sub1.len() != m.saturating_sub(1) {
            return Err(Error::NotEnoughValues {
                need: m - 1,
                got: sub1.len(),
            });
        }
        if sub2.len() != m.saturating_sub(2) {
            return Err(Error::NotEnoughValues {
                need: m.saturating_sub(2),
                got: sub2.len(),
            });
        }
        Ok(Self { diag, sub1, sub2 })
    }

    pub fn order(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn sub1(&self) -> &[f64] {
        &self.sub1
    }

    pub fn sub2(&self) -> &[f64] {
        &self.sub2
    }

    /// Entry `(i, j)`, zero-based.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        match hi - lo {
            0 => self.diag[lo],
            1 => self.sub1[lo],
            2 => self.sub2[lo],
            _ => 0.0,
        }
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let m = self.order();
        (0..m).map(|i| (0..m).map(|j| self.get(i, j)).collect()).collect()
    }

    fn gershgorin(&self) -> (f64, f64) {
        let m = self.order();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..m {
            let lower = i.saturating_sub(2);
            let upper = (i + 2).min(m - 1);
            let radius: f64 = (lower..=upper)
                .filter(|&j| j != i)
                .map(|j| self.get(i, j).abs())
                .sum();
            lo = lo.min(self.diag[i] - radius);
            hi = hi.max(self.diag[i] + radius);
        }
        (lo, hi)
    }

    /// Number of eigenvalues below `shift`, from the signs of the `LDLᵀ`
    /// pivots of `A - shift I` (Sylvester's law of inertia).
    pub fn count_below(&self, shift: f64) -> usize {
        let m = self.order();
        let scale = self.diag.iter().fold(1.0_f64, |a, d| a.max(d.abs()));
        let pivmin = f64::MIN_POSITIVE.max(f64::EPSILON * f64::EPSILON * scale);
        // pivots d and the two previous columns of L
        let mut d = vec![0.0; m];
        let mut l1 = vec![0.0; m]; // l1[i] = L(i, i-1)
        let mut l2 = vec![0.0; m]; // l2[i] = L(i, i-2)
        let mut negatives = 0;
        for i in 0..m {
            if i >= 2 {
                l2[i] = self.sub2[i - 2] / d[i - 2];
            }
            if i >= 1 {
                let mut a = self.sub1[i - 1];
                if i >= 2 {
                    a -= l2[i] * l1[i - 1] * d[i - 2];
                }
                l1[i] = a / d[i - 1];
            }
            let mut piv = self.diag[i] - shift;
            if i >= 1 {
                piv -= l1[i] * l1[i] * d[i - 1];
            }
            if i >= 2 {
                piv -= l2[i] * l2[i] * d[i - 2];
            }
            if piv.abs() < pivmin {
                piv = -pivmin;
            }
            if piv < 0.0 {
                negatives += 1;
            }
            d[i] = piv;
        }
        negatives
    }
}

/// `B̃₃` for ratios `r_2..r_n`: row `k = 3..n` has diagonal `2 d0(r_k, r_{k-1})`,
/// first sub-diagonal `√r_k d1(r_k, r_{k-1})` and second sub-diagonal
/// `√(r_k r_{k-1}) d2(r_k, r_{k-1})`. The order is `n - 2`.
pub fn rescaled_matrix(ratios: &[f64]) -> Result<SymmetricBandMatrix> {
    if ratios.len() < 3 {
        return Err(Error::TooFewSteps(ratios.len() + 1));
    }
    for &r in ratios {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidParameter {
                name: "step ratio",
                value: r,
            });
        }
    }
    // ratios[k - 2] = r_k
    let r = |k: usize| ratios[k - 2];
    let n = ratios.len() + 1;
    let m = n - 2;
    let mut diag = Vec::with_capacity(m);
    let mut sub1 = Vec::with_capacity(m - 1);
    let mut sub2 = Vec::with_capacity(m.saturating_sub(2));
    for k in 3..=n {
        let d = d_raw(r(k), r(k - 1));
        diag.push(2.0 * d.d0);
        if k >= 4 {
            sub1.push(r(k).sqrt() * d.d1);
        }
        if k >= 5 {
            sub2.push((r(k) * r(k - 1)).sqrt() * d.d2);
        }
    }
    SymmetricBandMatrix::new(diag, sub1, sub2)
}

/// Smallest eigenvalue by cyclic Jacobi rotations on the dense matrix,
/// sweeping until the off-diagonal Frobenius norm drops below `tol ‖A‖_F`.
pub fn min_eigenvalue(matrix: &SymmetricBandMatrix, tol: f64) -> Result<f64> {
    let m = matrix.order();
    let mut a = matrix.to_dense();
    let frob = a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    let off = |a: &Vec<Vec<f64>>| {
        let mut s = 0.0;
        for (i, row) in a.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if i != j {
                    s += v * v;
                }
            }
        }
        s.sqrt()
    };
    let mut sweeps = 0;
    while off(&a) >= tol * frob && frob > 0.0 {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence(MAX_SWEEPS));
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
        sweeps += 1;
    }
    Ok((0..m).map(|i| a[i][i]).fold(f64::INFINITY, f64::min))
}

/// Smallest eigenvalue by bisection on the inertia count
/// [`SymmetricBandMatrix::count_below`]; O(m) per bisection step.
pub fn min_eigenvalue_banded(matrix: &SymmetricBandMatrix, tol: f64) -> f64 {
    let (mut lo, mut hi) = matrix.gershgorin();
    let width = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    while hi - lo > tol * width {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if matrix.count_below(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Result of a random-ratio eigenvalue scan.
#[derive(Debug, Clone, PartialEq)]
pub struct EigScan {
    pub min_over_runs: f64,
    pub per_run: Vec<f64>,
}

/// Minimum eigenvalue of `B̃₃` for `runs` draws of `r_2..r_n` uniform on
/// `(0, limit)`. Run `i` uses the stream `SeededRng::stream(seed, i)`.
pub fn eigscan(limit: f64, n: usize, runs: usize, seed: u64) -> Result<EigScan> {
    if !(limit > 0.0) || !limit.is_finite() {
        return Err(Error::InvalidParameter {
            name: "ratio limit",
            value: limit,
        });
    }
    if runs == 0 {
        return Err(Error::InvalidParameter {
            name: "runs",
            value: 0.0,
        });
    }
    let mut per_run = Vec::with_capacity(runs);
    for run in 0..runs {
        let mut rng = SeededRng::stream(seed, run as u64);
        let ratios: Vec<f64> = (2..=n).map(|_| rng.uniform_in(0.0, limit)).collect();
        let matrix = rescaled_matrix(&ratios)?;
        per_run.push(min_eigenvalue_banded(&matrix, EIG_TOL));
    }
    let min_over_runs = per_run.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(EigScan {
        min_over_runs,
        per_run,
    })
}

fn check_xi(mesh: &TimeMesh, xi: &[f64]) -> Result<usize> {
    if xi.is_empty() {
        return Err(Error::NotEnoughValues { need: 1, got: 0 });
    }
    let n = xi.len() + 2;
    check_index(n, 3, mesh.len())?;
    Ok(n)
}

/// `(2 Σ_k ξ_k Σ_j τ_k d^{(k)}_{k-j} ξ_j, (1/50) Σ_k τ_k ξ_k²)` with `xi[k - 3] = ξ_k`.
pub fn bdf3_quadratic_form(mesh: &TimeMesh, xi: &[f64]) -> Result<(f64, f64)> {
    let n = check_xi(mesh, xi)?;
    let x = |k: usize| xi[k - 3];
    let mut terms = Vec::with_capacity(3 * xi.len());
    for k in 3..=n {
        let d = d_raw(mesh.ratio(k), mesh.ratio(k - 1));
        let tau = mesh.tau(k);
        terms.push(2.0 * tau * d.d0 * x(k) * x(k));
        if k >= 4 {
            terms.push(2.0 * tau * d.d1 * x(k) * x(k - 1));
        }
        if k >= 5 {
            terms.push(2.0 * tau * d.d2 * x(k) * x(k - 2));
        }
    }
    let value = compensated_sum(terms);
    let bound = (3..=n).map(|k| mesh.tau(k) * x(k) * x(k)).sum::<f64>() / 50.0;
    Ok((value, bound))
}

/// `2 Σ_k ξ_k Σ_j τ_k θ^{(k)}_{k-j} ξ_j` with `xi[k - 3] = ξ_k`.
pub fn doc_quadratic_form(mesh: &TimeMesh, table: &DocKernelTable, xi: &[f64]) -> Result<f64> {
    let n = check_xi(mesh, xi)?;
    check_index(n, 3, table.n_max())?;
    let mut terms = Vec::with_capacity(xi.len());
    for k in 3..=n {
        let inner = compensated_sum(table.row(k).iter().zip(xi).map(|(t, x)| t * x));
        terms.push(2.0 * mesh.tau(k) * xi[k - 3] * inner);
    }
    Ok(compensated_sum(terms))
}
