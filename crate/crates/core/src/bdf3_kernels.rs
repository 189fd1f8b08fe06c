//! Coefficient-level mathematics of the variable-step BDF3 formula.
//!
//! With step ratios `x = r_n`, `y = r_{n-1}` the BDF3 difference quotient is
//!
//! ```text
//! D3 v^n = d0(x, y) ∂v^n + d1(x, y) ∂v^{n-1} + d2(x, y) ∂v^{n-2},  ∂v^j = (v^j - v^{j-1}) / τ_j
//! ```
//!
//! This module also provides the discrete gradient structure
//! `2 v_n τ_n Σ d v = G[v_n, v_{n-1}] - G[v_{n-1}, v_{n-2}] + F[v_n, v_{n-1}, v_{n-2}]`
//! obtained with the fixed splitting parameter `γ = 7/10`, which is valid
//! for all step ratios below [`re`].

use std::sync::OnceLock;

use crate::time_mesh::TimeMesh;
use crate::util::compensated_sum;
use crate::{Error, Result};

pub mod appendix;

pub use appendix::{
    eta, monotone_violations, monotonicity_check, scan_lemma_positivity, zeta, LemmaScan, MonotonicityReport,
    ScanCheck,
};

/// Splitting parameter of the gradient structure.
pub const GAMMA: f64 = 0.7;

/// Bisection tolerance for the cached step-ratio limit.
pub const RE_TOL: f64 = 1e-12;

/// The three nonzero BDF3 kernels `d0, d1, d2` of one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bdf3Coefficients {
    pub d0: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Bdf3Coefficients {
    /// Kernel `d_j`; zero for `j >= 3`.
    pub fn get(&self, j: usize) -> f64 {
        match j {
            0 => self.d0,
            1 => self.d1,
            2 => self.d2,
            _ => 0.0,
        }
    }
}

/// Coefficients of the gradient-structure decomposition at step `n`:
/// `a_n, b_n, c_n, p_{n+1}, q_{n+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DgsCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub p: f64,
    pub q: f64,
    pub gamma: f64,
}

pub(crate) fn d_raw(x: f64, y: f64) -> Bdf3Coefficients {
    let s = 1.0 + y + x * y;
    let tail = x * y * y / s * (1.0 + x) / (1.0 + y);
    Bdf3Coefficients {
        d0: (1.0 + 2.0 * x) / (1.0 + x) + x * y / s,
        d1: -x / (1.0 + x) - x * y / s - tail,
        d2: tail,
    }
}

/// `(d0, d1, d2)` at ratio arguments `x, y >= 0`.
pub fn d_coeffs(x: f64, y: f64) -> Result<Bdf3Coefficients> {
    for (name, v) in [("x", x), ("y", y)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter { name, value: v });
        }
    }
    Ok(d_raw(x, y))
}

/// Kernels `d^{(n)}_j = d_j(r_n, r_{n-1})` of step `n`, `3 <= n <= N`.
pub fn step_coefficients(mesh: &TimeMesh, n: usize) -> Result<Bdf3Coefficients> {
    check_index(n, 3, mesh.len())?;
    Ok(d_raw(mesh.ratio(n), mesh.ratio(n - 1)))
}

pub(crate) fn check_index(index: usize, lo: usize, hi: usize) -> Result<()> {
    if index < lo || index > hi {
        Err(Error::IndexOutOfRange { index, lo, hi })
    } else {
        Ok(())
    }
}

fn check_len(values: &[f64], need: usize) -> Result<()> {
    if values.len() < need {
        Err(Error::NotEnoughValues {
            need,
            got: values.len(),
        })
    } else {
        Ok(())
    }
}

/// `D3 v^n` from nodal values `v^0..v^n` on `mesh`.
pub fn bdf3_apply(mesh: &TimeMesh, values: &[f64], n: usize) -> Result<f64> {
    let d = step_coefficients(mesh, n)?;
    check_len(values, n + 1)?;
    let dq = |j: usize| (values[j] - values[j - 1]) / mesh.tau(j);
    Ok(d.d0 * dq(n) + d.d1 * dq(n - 1) + d.d2 * dq(n - 2))
}

/// Residuals of the three consistency identities
///
/// ```text
/// d0 + d1 + d2 = 1
/// d0 + (1+2x)/x d1 + (1+2y+2xy)/(xy) d2 = 0
/// d0 + (1+3x+3x²)/x² d1 + (1+3y+3xy+3y²+6xy²+3x²y²)/(x²y²) d2 = 0
/// ```
pub fn consistency_identities(x: f64, y: f64) -> Result<[f64; 3]> {
    for (name, v) in [("x", x), ("y", y)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter { name, value: v });
        }
    }
    let d = d_raw(x, y);
    let res1 = compensated_sum([d.d0, d.d1, d.d2, -1.0]);
    let res2 = compensated_sum([
        d.d0,
        (1.0 + 2.0 * x) / x * d.d1,
        (1.0 + 2.0 * y + 2.0 * x * y) / (x * y) * d.d2,
    ]);
    let c2 = 1.0 + 3.0 * y + 3.0 * x * y + 3.0 * y * y + 6.0 * x * y * y + 3.0 * x * x * y * y;
    let res3 = compensated_sum([
        d.d0,
        (1.0 + 3.0 * x + 3.0 * x * x) / (x * x) * d.d1,
        c2 / (x * x * y * y) * d.d2,
    ]);
    Ok([res1, res2, res3])
}

/// `10 / (7 (R + 1)) - R² √R / (R² + R + 1)`, whose positive root is `R_e`.
pub fn re_equation(r: f64) -> f64 {
    10.0 / (7.0 * (r + 1.0)) - r * r * r.sqrt() / (r * r + r + 1.0)
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let (mut f_lo, f_hi) = (f(lo), f(hi));
    if !(f_lo * f_hi < 0.0) {
        return Err(Error::NoRoot { lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 || (hi - lo < tol && f_mid.abs() < tol) {
            return Ok(mid);
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Step-ratio limit `R_e ≈ 1.4877` by bisection on `[1, 2]`.
pub fn compute_re(tol: f64) -> f64 {
    // the equation is positive at 1 and negative at 2
    bisect(re_equation, 1.0, 2.0, tol).expect("R_e bracket [1, 2] is valid")
}

/// Cached `R_e` (tolerance [`RE_TOL`]).
pub fn re() -> f64 {
    static RE: OnceLock<f64> = OnceLock::new();
    *RE.get_or_init(|| compute_re(RE_TOL))
}

fn gamma_bar_of(r: f64) -> f64 {
    -d_raw(r, 0.0).d1 / (r.sqrt() * d_raw(r, r).d2)
}

/// `p_{n+1}` on a constant-ratio mesh `r` with splitting parameter `γ̄(r)`.
pub fn gamma_bar_equation(r: f64) -> f64 {
    let g = gamma_bar_of(r);
    let d = d_raw(r, r);
    let s = r.sqrt();
    2.0 * d.d0 - r * d.d2 + g * g * (s * d.d1 / g + r * d.d2) + s * d.d1 / g + r * d.d2
}

/// Solves for the optimal-parameter pair, returning `(γ̄, R̄_e)`.
pub fn compute_gamma_bar(tol: f64) -> Result<(f64, f64)> {
    let r = bisect(gamma_bar_equation, 1.0, 2.0, tol)?;
    Ok((gamma_bar_of(r), r))
}

/// `d★(x, y) = -(10/7) √x d1(x, y) - √(xy) d2(x, y)`.
pub fn d_star(x: f64, y: f64) -> f64 {
    let d = d_raw(x, y);
    -x.sqrt() * d.d1 / GAMMA - (x * y).sqrt() * d.d2
}

/// `p(x, y, z) = 2 d0(y, z) - √(yz) d2(y, z) - (49/100) d★(y, z) - d★(x, y)`.
pub fn p_fun(x: f64, y: f64, z: f64) -> f64 {
    let d = d_raw(y, z);
    compensated_sum([
        2.0 * d.d0,
        -(y * z).sqrt() * d.d2,
        -GAMMA * GAMMA * d_star(y, z),
        -d_star(x, y),
    ])
}

/// `q(x, y, z) = d★(y, z) - √(xy) d2(x, y)`.
pub fn q_fun(x: f64, y: f64, z: f64) -> f64 {
    d_star(y, z) - (x * y).sqrt() * d_raw(x, y).d2
}

/// Step-rescaled kernels `d̃_j^{(n)} = √(τ_n / τ_{n-j}) d_j^{(n)}`.
fn rescaled_kernels(mesh: &TimeMesh, n: usize) -> [f64; 3] {
    let d = d_raw(mesh.ratio(n), mesh.ratio(n - 1));
    let tau_n = mesh.tau(n);
    [
        d.d0,
        (tau_n / mesh.tau(n - 1)).sqrt() * d.d1,
        (tau_n / mesh.tau(n - 2)).sqrt() * d.d2,
    ]
}

/// Decomposition coefficients at step `n`, `3 <= n <= N - 1`.
///
/// Computed from the step-rescaled kernels directly; they coincide with
/// `q_fun(r_{n+1}, r_n, r_{n-1})` and `p_fun(r_{n+1}, r_n, r_{n-1})`.
pub fn dgs_coefficients(mesh: &TimeMesh, n: usize) -> Result<DgsCoefficients> {
    check_index(n, 3, mesh.len() - 1)?;
    let [t0, t1, t2] = rescaled_kernels(mesh, n);
    let [_, u1, u2] = rescaled_kernels(mesh, n + 1);
    let g = GAMMA;
    let a = -t1 / g - t2;
    let p = compensated_sum([2.0 * t0, g * t1, (g * g - 1.0) * t2, u1 / g, u2]);
    Ok(DgsCoefficients {
        a,
        b: t2,
        c: t2,
        p,
        q: a - u2,
        gamma: g,
    })
}

/// Lyapunov functional `G[v_n, v_{n-1}]`, `2 <= n <= N - 1`.
pub fn g_functional(mesh: &TimeMesh, n: usize, v_n: f64, v_prev: f64) -> Result<f64> {
    check_index(n, 2, mesh.len() - 1)?;
    let (r_next, r_n) = (mesh.ratio(n + 1), mesh.ratio(n));
    let w_n = mesh.tau(n).sqrt() * v_n;
    let w_prev = mesh.tau(n - 1).sqrt() * v_prev;
    let b = (r_next * r_n).sqrt() * d_raw(r_next, r_n).d2;
    let lag = GAMMA * w_n - w_prev;
    Ok(d_star(r_next, r_n) * w_n * w_n + b * lag * lag)
}

/// Remainder functional `F[v_n, v_{n-1}, v_{n-2}] >= τ_n v_n² / 50`,
/// `3 <= n <= N - 1`.
pub fn f_functional(mesh: &TimeMesh, n: usize, v_n: f64, v_prev: f64, v_prev2: f64) -> Result<f64> {
    check_index(n, 3, mesh.len() - 1)?;
    let (x, y, z) = (mesh.ratio(n + 1), mesh.ratio(n), mesh.ratio(n - 1));
    let w_n = mesh.tau(n).sqrt() * v_n;
    let w_prev = mesh.tau(n - 1).sqrt() * v_prev;
    let w_prev2 = mesh.tau(n - 2).sqrt() * v_prev2;
    let c = (y * z).sqrt() * d_raw(y, z).d2;
    let lag = GAMMA * w_n - w_prev;
    let curv = w_n - GAMMA * w_prev + w_prev2;
    Ok(p_fun(x, y, z) * w_n * w_n + q_fun(x, y, z) * lag * lag + c * curv * curv)
}

/// `|2 v_n τ_n Σ_{j=3}^n d^{(n)}_{n-j} v_j - (G[v_n, v_{n-1}] - G[v_{n-1}, v_{n-2}] + F)|`.
///
/// `values` holds `v_0..v_n`; the sum starts at `j = 3`, so the identity
/// requires `v_1 = v_2 = 0` when `n <= 4`.
pub fn dgs_residual(mesh: &TimeMesh, values: &[f64], n: usize) -> Result<f64> {
    check_index(n, 3, mesh.len() - 1)?;
    check_len(values, n + 1)?;
    let d = step_coefficients(mesh, n)?;
    let conv = compensated_sum((3.max(n - 2)..=n).map(|j| d.get(n - j) * values[j]));
    let lhs = 2.0 * values[n] * mesh.tau(n) * conv;
    let g_now = g_functional(mesh, n, values[n], values[n - 1])?;
    let g_before = g_functional(mesh, n - 1, values[n - 1], values[n - 2])?;
    let f = f_functional(mesh, n, values[n], values[n - 1], values[n - 2])?;
    Ok(compensated_sum([lhs, -g_now, g_before, -f]).abs())
}
