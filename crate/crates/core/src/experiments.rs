//! Convergence studies with the manufactured solution and their report formats.

use std::fmt::Write as _;

use crate::bdf3_kernels::re;
use crate::heat_solver::{HeatSolver, Problem, SolverConfig, Starter};
use crate::time_mesh::TimeMesh;
use crate::{Error, Result};

/// Grid family of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshKind {
    /// Steps alternating with ratio `mu`.
    Periodic { mu: f64 },
    /// Normalized i.i.d. uniform steps; level `N` uses seed `seed + N`.
    Random { seed: u64 },
}

impl MeshKind {
    pub fn build(&self, horizon: f64, n: usize) -> Result<TimeMesh> {
        match *self {
            MeshKind::Periodic { mu } => TimeMesh::periodic_ratio(horizon, n, mu),
            MeshKind::Random { seed } => TimeMesh::random(horizon, n, seed.wrapping_add(n as u64)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceSetup {
    pub mesh: MeshKind,
    pub starter: Starter,
    pub levels: Vec<usize>,
    pub horizon: f64,
    pub eps: f64,
    pub kappa: f64,
    pub grid: usize,
}

impl ConvergenceSetup {
    /// `T = 1`, `ε = 0.1`, `κ = 0`, `M = 32` and levels `80, 160, ..., 1280`.
    pub fn new(mesh: MeshKind, starter: Starter) -> Self {
        Self {
            mesh,
            starter,
            levels: vec![80, 160, 320, 640, 1280],
            horizon: 1.0,
            eps: 0.1,
            kappa: 0.0,
            grid: 32,
        }
    }
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    /// Largest step of the mesh.
    pub tau: f64,
    pub e_n: f64,
    /// Order against the previous row.
    pub order: Option<f64>,
    pub r_max: f64,
    /// Number of ratios `r_k >= R_e`.
    pub n1: usize,
}

/// `log(e_coarse / e_fine) / log(tau_coarse / tau_fine)`.
pub fn order_of(e_coarse: f64, e_fine: f64, tau_coarse: f64, tau_fine: f64) -> Result<f64> {
    for (name, v) in [
        ("e_coarse", e_coarse),
        ("e_fine", e_fine),
        ("tau_coarse", tau_coarse),
        ("tau_fine", tau_fine),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter { name, value: v });
        }
    }
    if !(tau_coarse > tau_fine) {
        return Err(Error::InvalidParameter {
            name: "tau_coarse",
            value: tau_coarse,
        });
    }
    Ok((e_coarse / e_fine).ln() / (tau_coarse / tau_fine).ln())
}

/// Runs one level per entry of `setup.levels`.
pub fn converge_table(setup: &ConvergenceSetup) -> Result<Vec<ConvergenceRow>> {
    if setup.levels.is_empty() {
        return Err(Error::NotEnoughValues { need: 1, got: 0 });
    }
    for w in setup.levels.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidParameter {
                name: "levels",
                value: w[1] as f64,
            });
        }
    }
    let limit = re();
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(setup.levels.len());
    for &n in &setup.levels {
        if n < 8 {
            return Err(Error::TooFewSteps(n));
        }
        let mesh = setup.mesh.build(setup.horizon, n)?;
        let stats = mesh.ratio_stats(limit);
        let tau = mesh.max_step();
        let solver = HeatSolver::new(SolverConfig {
            eps: setup.eps,
            kappa: setup.kappa,
            starter: setup.starter,
            mesh,
            grid: setup.grid,
        })?;
        let e_n = solver
            .run(&Problem::Manufactured, false)?
            .e_n
            .unwrap_or(f64::NAN);
        let order = match rows.last() {
            Some(prev) => Some(order_of(prev.e_n, e_n, prev.tau, tau)?),
            None => None,
        };
        log::info!("level N = {n}: e = {e_n:e}");
        rows.push(ConvergenceRow {
            n,
            tau,
            e_n,
            order,
            r_max: stats.r_max,
            n1: stats.count_ge,
        });
    }
    Ok(rows)
}

/// Least-squares slope of `log e(N)` against `log τ(N)`.
pub fn regression_slope(rows: &[ConvergenceRow]) -> Result<f64> {
    if rows.len() < 2 {
        return Err(Error::NotEnoughValues {
            need: 2,
            got: rows.len(),
        });
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.tau.ln(), r.e_n.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Markdown,
}

pub const CSV_HEADER: &str = "N,tau,eN,order,rmax,N1";

/// CSV at full precision or a Markdown table with three significant digits.
pub fn emit(rows: &[ConvergenceRow], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str(CSV_HEADER);
            out.push('\n');
            for r in rows {
                let order = r.order.map(|o| o.to_string()).unwrap_or_default();
                let _ = writeln!(out, "{},{},{},{},{},{}", r.n, r.tau, r.e_n, order, r.r_max, r.n1);
            }
        }
        Format::Markdown => {
            out.push_str("| N | τ(N) | e(N) | Order | r_max | N₁ |\n");
            out.push_str("|---:|---:|---:|---:|---:|---:|\n");
            for r in rows {
                let order = r.order.map(|o| format!("{o:.2}")).unwrap_or_else(|| "–".into());
                let _ = writeln!(
                    out,
                    "| {} | {:.2e} | {:.2e} | {} | {:.2e} | {} |",
                    r.n, r.tau, r.e_n, order, r.r_max, r.n1
                );
            }
        }
    }
    out
}

/// Parses the CSV produced by [`emit`].
pub fn parse_csv(text: &str) -> Result<Vec<ConvergenceRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        other => return Err(Error::Parse(format!("unexpected header {other:?}"))),
    }
    let bad = |line: &str| Error::Parse(format!("bad row '{line}'"));
    let mut rows = Vec::new();
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(bad(line));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(line));
        rows.push(ConvergenceRow {
            n: f[0].parse().map_err(|_| bad(line))?,
            tau: num(f[1])?,
            e_n: num(f[2])?,
            order: if f[3].is_empty() { None } else { Some(num(f[3])?) },
            r_max: num(f[4])?,
            n1: f[5].parse().map_err(|_| bad(line))?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: usize, order: Option<f64>) -> ConvergenceRow {
        ConvergenceRow {
            n,
            tau: 1.0 / 3.0 / n as f64,
            e_n: 1.7800000000000003e-8,
            order,
            r_max: 2.9754,
            n1: n / 2,
        }
    }

    #[test]
    fn order_examples() {
        assert!((order_of(8e-6, 1e-6, 2e-2, 1e-2).unwrap() - 3.0).abs() < 1e-12);
        assert!((order_of(1.12e-6, 1.42e-7, 1.87e-2, 9.36e-3).unwrap() - 2.98).abs() < 5e-3);
        assert_eq!(order_of(1e-6, 1e-6, 2e-2, 1e-2).unwrap(), 0.0);
        assert!(order_of(0.0, 1e-6, 2e-2, 1e-2).is_err());
        assert!(order_of(1e-6, 1e-6, 1e-2, 2e-2).is_err());
    }

    #[test]
    fn one_row_csv() {
        let text = emit(&[row(80, None)], Format::Csv);
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().next(), Some(CSV_HEADER));
    }

    #[test]
    fn csv_round_trip_is_bitwise() {
        let rows = vec![row(80, None), row(160, Some(2.9812345678901234))];
        assert_eq!(parse_csv(&emit(&rows, Format::Csv)).unwrap(), rows);
    }

    #[test]
    fn markdown_has_one_line_per_row() {
        let rows: Vec<_> = [80, 160, 320, 640, 1280].iter().map(|&n| row(n, Some(3.0))).collect();
        let md = emit(&rows, Format::Markdown);
        assert_eq!(md.lines().count(), 7);
        assert!(md.contains("1.78e-8"));
    }

    #[test]
    fn slope_of_exact_cubic_data() {
        let rows: Vec<_> = [10.0_f64, 20.0, 40.0]
            .iter()
            .map(|&n| ConvergenceRow {
                n: n as usize,
                tau: 1.0 / n,
                e_n: 5.0 / (n * n * n),
                order: None,
                r_max: 1.0,
                n1: 0,
            })
            .collect();
        assert!((regression_slope(&rows).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_levels() {
        let mut setup = ConvergenceSetup::new(MeshKind::Periodic { mu: 2.0 }, Starter::Sdirk3);
        setup.levels = vec![160, 80];
        assert!(converge_table(&setup).is_err());
        setup.levels = vec![4];
        assert!(converge_table(&setup).is_err());
    }
}
