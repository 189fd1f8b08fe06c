//! Variable time grids on `[0, T]`.
//!
//! Steps and ratios use the 1-based indices of the analysis: `tau(k)` is
//! `t_k - t_{k-1}` for `1 <= k <= N` and `ratio(k)` is `tau(k) / tau(k-1)`
//! for `2 <= k <= N`.

use std::fmt::Write as _;

use crate::rng::SeededRng;
use crate::util::check_positive;
use crate::{Error, Result};

/// Smallest number of steps accepted by any constructor.
pub const MIN_STEPS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct TimeMesh {
    nodes: Vec<f64>,
    steps: Vec<f64>,
    horizon: f64,
}

/// Step-ratio diagnostics of a mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioStats {
    pub r_max: f64,
    /// Number of ratios `r_k >= threshold`.
    pub count_ge: usize,
    /// `sum_{k=3}^N |r_k - r_{k-1}|`.
    pub gamma_n: f64,
}

impl TimeMesh {
    /// Builds a mesh from explicit step sizes; the horizon is their sum.
    pub fn from_steps(steps: Vec<f64>) -> Result<Self> {
        if steps.len() < MIN_STEPS {
            return Err(Error::TooFewSteps(steps.len()));
        }
        for &tau in &steps {
            check_positive("step size", tau)?;
        }
        let mut nodes = Vec::with_capacity(steps.len() + 1);
        nodes.push(0.0);
        let mut t = 0.0;
        for &tau in &steps {
            t += tau;
            nodes.push(t);
        }
        Ok(Self {
            horizon: t,
            nodes,
            steps,
        })
    }

    pub fn uniform(horizon: f64, n: usize) -> Result<Self> {
        check_positive("horizon", horizon)?;
        if n < MIN_STEPS {
            return Err(Error::TooFewSteps(n));
        }
        let tau = horizon / n as f64;
        let mut mesh = Self::from_steps(vec![tau; n])?;
        mesh.pin_horizon(horizon);
        Ok(mesh)
    }

    /// Steps alternating `tau_1, mu * tau_1, tau_1, ...` with
    /// `tau_1 = 2T / (N (1 + mu))`.
    pub fn periodic_ratio(horizon: f64, n: usize, mu: f64) -> Result<Self> {
        check_positive("horizon", horizon)?;
        check_positive("mu", mu)?;
        if !n.is_multiple_of(2) {
            return Err(Error::OddStepCount(n));
        }
        if n < MIN_STEPS {
            return Err(Error::TooFewSteps(n));
        }
        let tau1 = 2.0 * horizon / (n as f64 * (1.0 + mu));
        let steps = (0..n)
            .map(|k| if k % 2 == 0 { tau1 } else { mu * tau1 })
            .collect();
        let mut mesh = Self::from_steps(steps)?;
        mesh.pin_horizon(horizon);
        Ok(mesh)
    }

    /// `tau_k = T * eps_k / sum(eps)` with `eps_k` i.i.d. uniform on (0, 1).
    pub fn random(horizon: f64, n: usize, seed: u64) -> Result<Self> {
        check_positive("horizon", horizon)?;
        if n < MIN_STEPS {
            return Err(Error::TooFewSteps(n));
        }
        let mut rng = SeededRng::new(seed);
        let eps: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
        let total: f64 = eps.iter().sum();
        let mut mesh = Self::from_steps(eps.iter().map(|e| horizon * e / total).collect())?;
        mesh.pin_horizon(horizon);
        Ok(mesh)
    }

    /// Mesh whose ratios `r_2..r_N` are drawn uniformly on `(r_lo, r_hi)`,
    /// rescaled so the steps sum to `horizon`.
    pub fn random_ratios(horizon: f64, n: usize, r_lo: f64, r_hi: f64, seed: u64) -> Result<Self> {
        check_positive("horizon", horizon)?;
        check_positive("r_lo", r_lo)?;
        if !(r_hi > r_lo) || !r_hi.is_finite() {
            return Err(Error::InvalidParameter {
                name: "r_hi",
                value: r_hi,
            });
        }
        if n < MIN_STEPS {
            return Err(Error::TooFewSteps(n));
        }
        let mut rng = SeededRng::new(seed);
        let mut raw = Vec::with_capacity(n);
        raw.push(1.0_f64);
        for _ in 1..n {
            let prev = *raw.last().unwrap();
            raw.push(prev * rng.uniform_in(r_lo, r_hi));
        }
        let total: f64 = raw.iter().sum();
        let mut mesh = Self::from_steps(raw.iter().map(|s| horizon * s / total).collect())?;
        mesh.pin_horizon(horizon);
        Ok(mesh)
    }

    fn pin_horizon(&mut self, horizon: f64) {
        self.horizon = horizon;
    }

    /// Number of steps `N`.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, k: usize) -> f64 {
        self.nodes[k]
    }

    /// All steps; index `k - 1` holds `tau_k`.
    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    /// `tau_k`, `1 <= k <= N`.
    pub fn tau(&self, k: usize) -> f64 {
        self.steps[k - 1]
    }

    /// `r_k = tau_k / tau_{k-1}`, `2 <= k <= N`.
    pub fn ratio(&self, k: usize) -> f64 {
        self.steps[k - 1] / self.steps[k - 2]
    }

    /// `r_2, ..., r_N`.
    pub fn ratios(&self) -> Vec<f64> {
        (2..=self.len()).map(|k| self.ratio(k)).collect()
    }

    pub fn max_step(&self) -> f64 {
        self.steps.iter().copied().fold(0.0, f64::max)
    }

    pub fn ratio_stats(&self, threshold: f64) -> RatioStats {
        let ratios = self.ratios();
        let r_max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let count_ge = ratios.iter().filter(|&&r| r >= threshold).count();
        let gamma_n = ratios.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
        RatioStats {
            r_max,
            count_ge,
            gamma_n,
        }
    }

    /// CSV dump `k,t_k,tau_k,r_k`; `tau` is empty at `k = 0` and `r` for `k <= 1`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,t_k,tau_k,r_k\n");
        for (k, t) in self.nodes.iter().enumerate() {
            let tau = if k >= 1 {
                format!("{:e}", self.tau(k))
            } else {
                String::new()
            };
            let r = if k >= 2 {
                format!("{:e}", self.ratio(k))
            } else {
                String::new()
            };
            let _ = writeln!(out, "{k},{t:e},{tau},{r}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_four_steps() {
        let mesh = TimeMesh::uniform(1.0, 4).unwrap();
        assert_eq!(mesh.steps(), &[0.25; 4]);
        assert_eq!(mesh.ratios(), vec![1.0; 3]);
    }

    #[test]
    fn uniform_sums_to_horizon() {
        let mesh = TimeMesh::uniform(2.0, 8).unwrap();
        assert_eq!(mesh.max_step(), 0.25);
        assert!((mesh.steps().iter().sum::<f64>() - 2.0).abs() < 1e-12 * 2.0);
    }

    #[test]
    fn rejects_short_meshes() {
        assert_eq!(TimeMesh::uniform(1.0, 3), Err(Error::TooFewSteps(3)));
        assert_eq!(TimeMesh::random(1.0, 2, 0), Err(Error::TooFewSteps(2)));
        assert!(TimeMesh::from_steps(vec![0.1, 0.1, -0.1, 0.1]).is_err());
    }

    #[test]
    fn periodic_closed_form() {
        let mesh = TimeMesh::periodic_ratio(1.0, 4, 2.0).unwrap();
        let expect = [1.0 / 6.0, 1.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0];
        for (a, b) in mesh.steps().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(TimeMesh::periodic_ratio(1.0, 5, 2.0), Err(Error::OddStepCount(5)));
    }

    #[test]
    fn periodic_ratios_alternate() {
        let mu = 2.7;
        let mesh = TimeMesh::periodic_ratio(1.0, 20, mu).unwrap();
        for k in 2..=20 {
            let expect = if k % 2 == 0 { mu } else { 1.0 / mu };
            assert!((mesh.ratio(k) - expect).abs() < 1e-14 * expect);
        }
    }

    #[test]
    fn periodic_gamma_matches_direct_summation() {
        let (n, mu) = (30, 1.8);
        let mesh = TimeMesh::periodic_ratio(1.0, n, mu).unwrap();
        // oracle: alternating sequence mu, 1/mu, mu, ... summed term by term
        let seq: Vec<f64> = (2..=n).map(|k| if k % 2 == 0 { mu } else { 1.0 / mu }).collect();
        let mut oracle = 0.0;
        for i in 1..seq.len() {
            oracle += (seq[i] - seq[i - 1]).abs();
        }
        let stats = mesh.ratio_stats(1.5);
        assert!((stats.gamma_n - oracle).abs() < 1e-12);
        assert!((stats.gamma_n - (n as f64 - 2.0) * (mu - 1.0 / mu).abs()).abs() < 1e-12);
        assert_eq!(stats.count_ge, n / 2);
    }

    #[test]
    fn uniform_ratio_stats() {
        let stats = TimeMesh::uniform(1.0, 16).unwrap().ratio_stats(1.4877);
        assert_eq!(stats.r_max, 1.0);
        assert_eq!(stats.count_ge, 0);
        assert_eq!(stats.gamma_n, 0.0);
    }

    #[test]
    fn random_mesh_is_reproducible_and_normalized() {
        let a = TimeMesh::random(1.0, 100, 7).unwrap();
        let b = TimeMesh::random(1.0, 100, 7).unwrap();
        assert_eq!(a, b);
        assert!((a.steps().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_ne!(a, TimeMesh::random(1.0, 100, 8).unwrap());
    }

    #[test]
    fn random_ratio_mesh_respects_bounds() {
        let mesh = TimeMesh::random_ratios(1.0, 60, 0.05, 1.48, 3).unwrap();
        for r in mesh.ratios() {
            assert!(r > 0.05 * (1.0 - 1e-12) && r < 1.48 * (1.0 + 1e-12));
        }
        assert!((mesh.nodes()[60] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let csv = TimeMesh::uniform(1.0, 4).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "k,t_k,tau_k,r_k");
        assert_eq!(lines.len(), 6);
        assert!(lines[1].ends_with(",,"));
        assert!(lines[2].ends_with(','));
        assert!(!lines[3].ends_with(','));
    }
}
