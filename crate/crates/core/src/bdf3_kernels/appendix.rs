//! Numerical verification of the positivity lemmas behind the gradient
//! structure: `q > 0` and `p > 1/50` on `(0, R_e)³`, through the auxiliary
//! functions `η` and `ζ` on `(0, √R_e)³`.

use std::fmt::Write as _;

use super::{d_raw, p_fun, q_fun, re};
use crate::rng::SeededRng;

/// Smallest grid coordinate, standing in for the open boundary `0⁺`.
pub const BOUNDARY_EPS: f64 = 1e-6;

/// Tolerance for the identities `q(x², y², z²) = y³ η` and `p(x², y², z²) = (1 + y²) ζ`.
pub const BRIDGE_TOL: f64 = 1e-12;

/// `η(x, y, z) = q(x², y², z²) / y³`, evaluated from its expanded rational form.
pub fn eta(x: f64, y: f64, z: f64) -> f64 {
    let (x2, y2, z2) = (x * x, y * y, z * z);
    let zs = (z2 + 1.0) * (y2 * z2 + z2 + 1.0);
    10.0 / (7.0 * (y2 + 1.0)) - x2 * x * (x2 + 1.0) * y2 / ((y2 + 1.0) * (x2 * y2 + y2 + 1.0))
        + 10.0 * z2 * (y2 * z2 + 2.0 * z2 + 1.0) / (7.0 * zs)
        - (y2 + 1.0) * z2 * z2 * z / zs
}

fn zeta1(y: f64, z: f64) -> f64 {
    let d = d_raw(y * y, z * z);
    2.0 * d.d0 + 0.7 * y * d.d1 - 0.51 * y * z * d.d2
}

/// `ζ2(x, y) = -d★(x², y²)` in expanded form.
fn zeta2(x: f64, y: f64) -> f64 {
    let (x2, y2) = (x * x, y * y);
    let x3 = x2 * x;
    -10.0 * x3 / (7.0 * (x2 + 1.0))
        - x3 * y2 * (10.0 - 7.0 * y) / (7.0 * (y2 + 1.0))
        - (10.0 * y + 7.0) * y2 * y / (7.0 * (y2 + 1.0)) * x3 / (1.0 + y2 + y2 * x2)
}

/// `ζ(x, y, z) = (ζ1(y, z) + ζ2(x, y)) / (1 + y²)`.
pub fn zeta(x: f64, y: f64, z: f64) -> f64 {
    (zeta1(y, z) + zeta2(x, y)) / (1.0 + y * y)
}

/// One line of the positivity scan report.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanCheck {
    pub check: &'static str,
    pub grid: usize,
    /// Minimum over the grid for bound checks; maximum residual for identity checks.
    pub min_value: f64,
    pub argmin: [f64; 3],
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaScan {
    pub checks: Vec<ScanCheck>,
}

impl LemmaScan {
    pub fn total_violations(&self) -> usize {
        self.checks.iter().map(|c| c.violations).sum()
    }

    pub fn get(&self, check: &str) -> Option<&ScanCheck> {
        self.checks.iter().find(|c| c.check == check)
    }

    /// CSV `check,grid,min_value,argmin_x,argmin_y,argmin_z,violations`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,grid,min_value,argmin_x,argmin_y,argmin_z,violations\n");
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{},{},{:e},{:e},{:e},{:e},{}",
                c.check, c.grid, c.min_value, c.argmin[0], c.argmin[1], c.argmin[2], c.violations
            );
        }
        out
    }
}

struct Tracker {
    check: &'static str,
    grid: usize,
    extreme: f64,
    at: [f64; 3],
    violations: usize,
    minimize: bool,
}

impl Tracker {
    fn new(check: &'static str, grid: usize, minimize: bool) -> Self {
        Self {
            check,
            grid,
            extreme: if minimize { f64::INFINITY } else { 0.0 },
            at: [0.0; 3],
            violations: 0,
            minimize,
        }
    }

    fn push(&mut self, value: f64, at: [f64; 3], ok: bool) {
        let better = if self.minimize {
            value < self.extreme
        } else {
            value > self.extreme
        };
        if better || value.is_nan() {
            self.extreme = value;
            self.at = at;
        }
        if !ok || value.is_nan() {
            self.violations += 1;
        }
    }

    fn finish(self) -> ScanCheck {
        ScanCheck {
            check: self.check,
            grid: self.grid,
            min_value: self.extreme,
            argmin: self.at,
            violations: self.violations,
        }
    }
}

fn axis(grid: usize, upper: f64) -> Vec<f64> {
    let h = (upper - BOUNDARY_EPS) / grid as f64;
    (0..grid).map(|i| BOUNDARY_EPS + i as f64 * h).collect()
}

/// Scans `q > 0`, `p > 1/50` over `(0, R_e)³` and `η > 0`, `ζ > 1/50` over
/// `(0, √R_e)³` with `grid` points per axis (upper endpoint excluded), and
/// checks both bridging identities at every `(η, ζ)` grid point.
pub fn scan_lemma_positivity(grid: usize) -> LemmaScan {
    let grid = grid.max(1);
    let re = re();
    let ratio_axis = axis(grid, re);
    let root_axis = axis(grid, re.sqrt());

    let mut q_check = Tracker::new("q_positive", grid, true);
    let mut p_check = Tracker::new("p_above_1_50", grid, true);
    for &x in &ratio_axis {
        for &y in &ratio_axis {
            for &z in &ratio_axis {
                let q = q_fun(x, y, z);
                q_check.push(q, [x, y, z], q > 0.0);
                let p = p_fun(x, y, z);
                p_check.push(p, [x, y, z], p > 1.0 / 50.0);
            }
        }
    }

    let mut eta_check = Tracker::new("eta_positive", grid, true);
    let mut zeta_check = Tracker::new("zeta_above_1_50", grid, true);
    let mut q_bridge = Tracker::new("q_bridge", grid, false);
    let mut p_bridge = Tracker::new("p_bridge", grid, false);
    for &x in &root_axis {
        for &y in &root_axis {
            for &z in &root_axis {
                let e = eta(x, y, z);
                eta_check.push(e, [x, y, z], e > 0.0);
                let zt = zeta(x, y, z);
                zeta_check.push(zt, [x, y, z], zt > 1.0 / 50.0);

                let (x2, y2, z2) = (x * x, y * y, z * z);
                let rq = (q_fun(x2, y2, z2) - y2 * y * e).abs();
                q_bridge.push(rq, [x, y, z], rq < BRIDGE_TOL);
                let rp = (p_fun(x2, y2, z2) - (1.0 + y2) * zt).abs();
                p_bridge.push(rp, [x, y, z], rp < BRIDGE_TOL);
            }
        }
    }

    LemmaScan {
        checks: vec![
            q_check.finish(),
            p_check.finish(),
            eta_check.finish(),
            zeta_check.finish(),
            q_bridge.finish(),
            p_bridge.finish(),
        ],
    }
}

/// Outcome of the monotonicity sampling of `d0`, `-d1`, `d2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub samples: usize,
    pub violations: usize,
    /// Largest `|d2(x, y)|` seen on the samples.
    pub max_abs_d2: f64,
    /// `d2(R_e, R_e)`, the supremum of `d2` over `(0, R_e)²`.
    pub d2_at_limit: f64,
}

/// Number of monotonicity violations for one pair of ordered arguments
/// `x <= x2`, `y <= y2`: `d0`, `d2` must not decrease and `d1` must not
/// increase in either argument. Equal arguments give equal values.
pub fn monotone_violations(x: f64, x2: f64, y: f64, y2: f64) -> usize {
    let base = d_raw(x, y);
    let mut bad = 0;
    for moved in [d_raw(x2, y), d_raw(x, y2)] {
        bad += usize::from(moved.d0 < base.d0);
        bad += usize::from(moved.d1 > base.d1);
        bad += usize::from(moved.d2 < base.d2);
    }
    bad
}

pub fn monotonicity_check(samples: usize, seed: u64) -> MonotonicityReport {
    let re = re();
    let mut rng = SeededRng::new(seed);
    let mut violations = 0;
    let mut max_abs_d2 = 0.0_f64;
    for _ in 0..samples {
        let (a, b) = (rng.uniform_in(0.0, re), rng.uniform_in(0.0, re));
        let (c, d) = (rng.uniform_in(0.0, re), rng.uniform_in(0.0, re));
        let (x, x2) = (a.min(b), a.max(b));
        let (y, y2) = (c.min(d), c.max(d));
        violations += monotone_violations(x, x2, y, y2);
        max_abs_d2 = max_abs_d2.max(d_raw(x, y).d2.abs()).max(d_raw(x2, y2).d2.abs());
    }
    MonotonicityReport {
        samples,
        violations,
        max_abs_d2,
        d2_at_limit: d_raw(re, re).d2,
    }
}

#[cfg(test)]
fn zeta2_from_definition(x: f64, y: f64) -> f64 {
    -super::d_star(x * x, y * y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_at_corner_is_tiny_and_positive() {
        let s = re().sqrt();
        let v = eta(s, s, BOUNDARY_EPS);
        assert!(v > 0.0 && v < 1e-5, "{v}");
    }

    #[test]
    fn zeta_on_y_boundary() {
        let re = re();
        let s = re.sqrt();
        let expect = 2.0 - 10.0 * re * s / (7.0 + 7.0 * re);
        assert!((expect - 0.9579).abs() < 1e-3);
        for z in [0.1, 0.5, 1.0] {
            assert!((zeta(s, BOUNDARY_EPS, z) - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn zeta_on_z_boundary_corner() {
        let s = re().sqrt();
        assert!((zeta(s, s, BOUNDARY_EPS) - 0.259131).abs() < 1e-5);
    }

    #[test]
    fn expanded_zeta2_matches_definition() {
        for &(x, y) in &[(0.3, 0.7), (1.2, 1.1), (0.01, 1.2)] {
            assert!((zeta2(x, y) - zeta2_from_definition(x, y)).abs() < 1e-14);
        }
    }

    #[test]
    fn degenerate_pair_has_no_violation() {
        assert_eq!(monotone_violations(0.7, 0.7, 1.1, 1.1), 0);
    }

    #[test]
    fn monotone_on_samples() {
        let report = monotonicity_check(10_000, 0);
        assert_eq!(report.violations, 0);
        assert!(report.max_abs_d2 <= report.d2_at_limit);
    }

    #[test]
    fn small_scan_is_clean() {
        let scan = scan_lemma_positivity(12);
        assert_eq!(scan.total_violations(), 0, "{}", scan.to_csv());
        assert_eq!(scan.checks.len(), 6);
    }
}
