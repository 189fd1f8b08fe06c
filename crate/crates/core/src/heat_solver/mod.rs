//! Periodic heat/reaction equation `u_t = εΔu + κu + f` on `(0, 2π)²`,
//! discretized by Fourier collocation in space and variable-step BDF3 in
//! time. Each Fourier mode evolves independently, so every implicit solve
//! is a scalar division.

pub mod spectral;
pub mod truncation;

use log::warn;
use num_complex::Complex64;

use crate::bdf3_kernels::{check_index, d_raw, g_functional};
use crate::doc_kernels::DocKernelTable;
use crate::rng::SeededRng;
use crate::time_mesh::TimeMesh;
use crate::util::check_positive;
use crate::{Error, Result};

pub use spectral::{wavenumber, SpectralField, SpectralGrid};
pub use truncation::{truncation_error_direct, truncation_error_integral};

/// Diagonal coefficient of the two-stage SDIRK starter, `(3 + √3) / 6`.
pub fn sdirk_gamma() -> f64 {
    (3.0 + 3.0_f64.sqrt()) / 6.0
}

/// Random trigonometric polynomial `Σ (a_k cos(k·x) + b_k sin(k·x)) / (1 + |k|²)`
/// over `|k1|, |k2| <= 3` with `a_k, b_k` uniform on (-1, 1), sampled on `grid`.
pub fn smooth_random_field(grid: &SpectralGrid, seed: u64) -> Vec<f64> {
    let mut rng = SeededRng::new(seed);
    let mut terms = Vec::new();
    for k1 in 0..=3i32 {
        for k2 in -3..=3i32 {
            let w = 1.0 / (1.0 + (k1 * k1 + k2 * k2) as f64);
            terms.push((k1 as f64, k2 as f64, w * rng.uniform_in(-1.0, 1.0), w * rng.uniform_in(-1.0, 1.0)));
        }
    }
    grid.sample(|x, y| {
        terms
            .iter()
            .map(|&(k1, k2, a, b)| {
                let phase = k1 * x + k2 * y;
                a * phase.cos() + b * phase.sin()
            })
            .sum()
    })
}

/// Scheme producing `u¹, u²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Starter {
    /// Two-stage third-order SDIRK.
    Sdirk3,
    /// Trapezoidal step for `u¹`, variable-step BDF2 for `u²`.
    Bdf2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub eps: f64,
    pub kappa: f64,
    pub starter: Starter,
    pub mesh: TimeMesh,
    pub grid: usize,
}

/// Right-hand side and initial data of a run.
#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    /// `u = cos t sin x sin y` with the matching forcing.
    Manufactured,
    /// `f ≡ 0` and the given physical initial field.
    Unforced { initial: Vec<f64> },
}

/// Components of the discrete energy at one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRecord {
    pub n: usize,
    pub energy: f64,
    /// `ε ‖∇uⁿ‖²`
    pub grad_term: f64,
    /// `-κ ‖uⁿ‖²`
    pub reaction_term: f64,
    /// `⟨1, G[∂uⁿ, ∂uⁿ⁻¹]⟩`
    pub g_term: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyTrace {
    pub records: Vec<EnergyRecord>,
}

impl EnergyTrace {
    /// Largest `Eⁿ - Eⁿ⁻¹` over consecutive records.
    pub fn max_increase(&self) -> f64 {
        self.records
            .windows(2)
            .map(|w| w[1].energy - w[0].energy)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    /// `errors[n - 1] = ‖u(t_n) - uⁿ‖`; empty without an exact solution.
    pub errors: Vec<f64>,
    /// `max_n errors[n]`.
    pub e_n: Option<f64>,
    pub energy: Option<EnergyTrace>,
    /// Largest imaginary part of the physical field seen during the run.
    pub max_imag: f64,
    pub final_state: SpectralField,
}

#[derive(Debug, Clone)]
pub struct HeatSolver {
    config: SolverConfig,
    grid: SpectralGrid,
    /// `λ_k = -ε|k|² + κ` per stored mode.
    lambda: Vec<f64>,
    /// Signed wavenumbers per stored mode.
    modes: Vec<(i64, i64)>,
}

impl HeatSolver {
    pub fn new(config: SolverConfig) -> Result<Self> {
        check_positive("eps", config.eps)?;
        if !config.kappa.is_finite() {
            return Err(Error::InvalidParameter {
                name: "kappa",
                value: config.kappa,
            });
        }
        let grid = SpectralGrid::new(config.grid)?;
        let m = config.grid;
        let mut lambda = Vec::with_capacity(m * m);
        let mut modes = Vec::with_capacity(m * m);
        for i in 0..m {
            let k1 = wavenumber(i, m);
            for j in 0..m {
                let k2 = wavenumber(j, m);
                lambda.push(-config.eps * (k1 * k1 + k2 * k2) as f64 + config.kappa);
                modes.push((k1, k2));
            }
        }
        Ok(Self {
            config,
            grid,
            lambda,
            modes,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    fn mesh(&self) -> &TimeMesh {
        &self.config.mesh
    }

    /// `u(t) = cos t sin x sin y` on the grid.
    pub fn exact_solution(&self, t: f64) -> Vec<f64> {
        let c = t.cos();
        self.grid.sample(|x, y| c * x.sin() * y.sin())
    }

    /// `f = u_t - εΔu - κu = (-sin t + 2ε cos t - κ cos t) sin x sin y`.
    pub fn forcing(&self, t: f64) -> Vec<f64> {
        let g = -t.sin() + (2.0 * self.config.eps - self.config.kappa) * t.cos();
        self.grid.sample(|x, y| g * x.sin() * y.sin())
    }

    fn forcing_hat(&self, problem: &Problem, t: f64) -> Result<Option<SpectralField>> {
        match problem {
            Problem::Manufactured => Ok(Some(self.grid.forward(&self.forcing(t))?)),
            Problem::Unforced { .. } => Ok(None),
        }
    }

    fn check_multiplier(&self, step: usize, idx: usize, value: f64) -> Result<()> {
        if value > 0.0 {
            Ok(())
        } else {
            let (k1, k2) = self.modes[idx];
            Err(Error::NonpositiveMultiplier {
                step,
                k1,
                k2,
                value,
            })
        }
    }

    /// BDF3 step `n >= 3` from `history = [uⁿ⁻³, uⁿ⁻², uⁿ⁻¹]`:
    /// `(d0/τ_n - λ) ûⁿ = (d0/τ_n) ûⁿ⁻¹ - d1 ∂ûⁿ⁻¹ - d2 ∂ûⁿ⁻² + f̂ⁿ`.
    pub fn bdf3_step(
        &self,
        history: [&SpectralField; 3],
        forcing: Option<&SpectralField>,
        n: usize,
    ) -> Result<SpectralField> {
        let mesh = self.mesh();
        check_index(n, 3, mesh.len())?;
        let d = d_raw(mesh.ratio(n), mesh.ratio(n - 1));
        let (tau, tau1, tau2) = (mesh.tau(n), mesh.tau(n - 1), mesh.tau(n - 2));
        let a = d.d0 / tau;
        let [u3, u2, u1] = history.map(|h| h.coeffs());
        let mut out = SpectralField::zeros(self.grid.size());
        for (idx, slot) in out.coeffs_mut().iter_mut().enumerate() {
            let mult = a - self.lambda[idx];
            self.check_multiplier(n, idx, mult)?;
            let dq1 = (u1[idx] - u2[idx]) / tau1;
            let dq2 = (u2[idx] - u3[idx]) / tau2;
            let mut rhs = a * u1[idx] - d.d1 * dq1 - d.d2 * dq2;
            if let Some(f) = forcing {
                rhs += f.coeffs()[idx];
            }
            *slot = rhs / mult;
        }
        Ok(out)
    }

    /// One SDIRK step over `[t_{k-1}, t_k]`.
    fn sdirk_step(&self, problem: &Problem, u: &SpectralField, k: usize) -> Result<SpectralField> {
        let g = sdirk_gamma();
        let tau = self.mesh().tau(k);
        let t0 = self.mesh().node(k - 1);
        let f1 = self.forcing_hat(problem, t0 + g * tau)?;
        let f2 = self.forcing_hat(problem, t0 + (1.0 - g) * tau)?;
        let zero = Complex64::new(0.0, 0.0);
        let mut out = SpectralField::zeros(self.grid.size());
        for (idx, slot) in out.coeffs_mut().iter_mut().enumerate() {
            let lam = self.lambda[idx];
            let mult = 1.0 - tau * g * lam;
            self.check_multiplier(k, idx, mult)?;
            let u0 = u.coeffs()[idx];
            let s1 = f1.as_ref().map_or(zero, |f| f.coeffs()[idx]);
            let s2 = f2.as_ref().map_or(zero, |f| f.coeffs()[idx]);
            let k1 = (lam * u0 + s1) / mult;
            let k2 = (lam * (u0 + tau * (1.0 - 2.0 * g) * k1) + s2) / mult;
            *slot = u0 + 0.5 * tau * (k1 + k2);
        }
        Ok(out)
    }

    /// `(u¹, u²)` by two SDIRK steps.
    pub fn sdirk3_start(&self, problem: &Problem, u0: &SpectralField) -> Result<(SpectralField, SpectralField)> {
        let u1 = self.sdirk_step(problem, u0, 1)?;
        let u2 = self.sdirk_step(problem, &u1, 2)?;
        Ok((u1, u2))
    }

    /// `u¹` by the trapezoidal rule, `u²` by variable-step BDF2
    /// `D2 u² = (1+2r)/(1+r) ∂u² - r/(1+r) ∂u¹`.
    pub fn bdf2_start(&self, problem: &Problem, u0: &SpectralField) -> Result<(SpectralField, SpectralField)> {
        let mesh = self.mesh();
        let (tau1, tau2, r) = (mesh.tau(1), mesh.tau(2), mesh.ratio(2));
        let f0 = self.forcing_hat(problem, mesh.node(0))?;
        let f1 = self.forcing_hat(problem, mesh.node(1))?;
        let f2 = self.forcing_hat(problem, mesh.node(2))?;
        let zero = Complex64::new(0.0, 0.0);
        let at = |f: &Option<SpectralField>, idx: usize| f.as_ref().map_or(zero, |f| f.coeffs()[idx]);

        let mut u1 = SpectralField::zeros(self.grid.size());
        for (idx, slot) in u1.coeffs_mut().iter_mut().enumerate() {
            let lam = self.lambda[idx];
            let mult = 1.0 - 0.5 * tau1 * lam;
            self.check_multiplier(1, idx, mult)?;
            let rhs = (1.0 + 0.5 * tau1 * lam) * u0.coeffs()[idx] + 0.5 * tau1 * (at(&f0, idx) + at(&f1, idx));
            *slot = rhs / mult;
        }

        let b0 = (1.0 + 2.0 * r) / ((1.0 + r) * tau2);
        let b1 = r / (1.0 + r);
        let mut u2 = SpectralField::zeros(self.grid.size());
        for (idx, slot) in u2.coeffs_mut().iter_mut().enumerate() {
            let mult = b0 - self.lambda[idx];
            self.check_multiplier(2, idx, mult)?;
            let dq1 = (u1.coeffs()[idx] - u0.coeffs()[idx]) / tau1;
            let rhs = b0 * u1.coeffs()[idx] + b1 * dq1 + at(&f2, idx);
            *slot = rhs / mult;
        }
        Ok((u1, u2))
    }

    /// Energy terms at step `n` (`2 <= n <= N - 1`) from `uⁿ, uⁿ⁻¹, uⁿ⁻²`.
    pub fn energy_terms(
        &self,
        u_n: &SpectralField,
        u_prev: &SpectralField,
        u_prev2: &SpectralField,
        n: usize,
    ) -> Result<EnergyRecord> {
        let mesh = self.mesh();
        check_index(n, 2, mesh.len() - 1)?;
        let grad_term = self.config.eps * u_n.grad_norm_sq();
        let reaction_term = -self.config.kappa * u_n.l2_norm_sq();
        let dq_n = self.grid.inverse(&u_n.combine(1.0, u_prev, -1.0));
        let dq_prev = self.grid.inverse(&u_prev.combine(1.0, u_prev2, -1.0));
        let (tau_n, tau_prev) = (mesh.tau(n), mesh.tau(n - 1));
        let mut g = Vec::with_capacity(dq_n.len());
        for (a, b) in dq_n.iter().zip(&dq_prev) {
            g.push(g_functional(mesh, n, a / tau_n, b / tau_prev)?);
        }
        let g_term = self.grid.integrate(&g);
        Ok(EnergyRecord {
            n,
            energy: grad_term + reaction_term + g_term,
            grad_term,
            reaction_term,
            g_term,
        })
    }

    /// `Eⁿ` for a stored trajectory `states[k] = uᵏ`.
    pub fn energy(&self, states: &[SpectralField], n: usize) -> Result<f64> {
        if states.len() < n + 1 {
            return Err(Error::NotEnoughValues {
                need: n + 1,
                got: states.len(),
            });
        }
        check_index(n, 2, self.mesh().len() - 1)?;
        Ok(self.energy_terms(&states[n], &states[n - 1], &states[n - 2], n)?.energy)
    }

    fn warn_step_restriction(&self) {
        let kappa = self.config.kappa;
        if kappa <= 0.0 {
            return;
        }
        let mesh = self.mesh();
        if let Ok(table) = DocKernelTable::build(mesh, mesh.len()) {
            let k3 = table.abs_sums().k3_hat;
            let limit = 1.0 / (4.0 * k3 * kappa);
            if mesh.max_step() > limit {
                warn!(
                    "max step {:e} exceeds the stability restriction 1/(4 K3 kappa) = {:e}",
                    mesh.max_step(),
                    limit
                );
            }
        }
    }

    /// Integrates to the mesh horizon.
    pub fn run(&self, problem: &Problem, record_energy: bool) -> Result<RunOutput> {
        self.warn_step_restriction();
        let mesh = self.mesh();
        let n_steps = mesh.len();
        let initial = match problem {
            Problem::Manufactured => self.exact_solution(0.0),
            Problem::Unforced { initial } => initial.clone(),
        };
        let u0 = self.grid.forward(&initial)?;
        let (u1, u2) = match self.config.starter {
            Starter::Sdirk3 => self.sdirk3_start(problem, &u0)?,
            Starter::Bdf2 => self.bdf2_start(problem, &u0)?,
        };

        let exact = matches!(problem, Problem::Manufactured);
        let mut errors = Vec::with_capacity(if exact { n_steps } else { 0 });
        let mut max_imag = 0.0_f64;
        let mut observe = |k: usize, u: &SpectralField, errors: &mut Vec<f64>| {
            let values = self.grid.inverse_complex(u);
            max_imag = values.iter().fold(max_imag, |a, c| a.max(c.im.abs()));
            if exact {
                let diff = self.exact_solution(mesh.node(k));
                let sq: Vec<f64> = diff.iter().zip(&values).map(|(e, c)| (e - c.re).powi(2)).collect();
                errors.push(self.grid.integrate(&sq).sqrt());
            }
        };
        observe(1, &u1, &mut errors);
        observe(2, &u2, &mut errors);

        let mut trace = record_energy.then(EnergyTrace::default);
        if let Some(trace) = trace.as_mut() {
            if n_steps >= 3 {
                trace.records.push(self.energy_terms(&u2, &u1, &u0, 2)?);
            }
        }

        let mut window = [u0, u1, u2];
        for n in 3..=n_steps {
            let f = self.forcing_hat(problem, mesh.node(n))?;
            let next = self.bdf3_step([&window[0], &window[1], &window[2]], f.as_ref(), n)?;
            observe(n, &next, &mut errors);
            if let Some(trace) = trace.as_mut() {
                if n < n_steps {
                    trace.records.push(self.energy_terms(&next, &window[2], &window[1], n)?);
                }
            }
            window.rotate_left(1);
            window[2] = next;
        }

        let e_n = exact.then(|| errors.iter().copied().fold(0.0, f64::max));
        let [_, _, final_state] = window;
        Ok(RunOutput {
            errors,
            e_n,
            energy: trace,
            max_imag,
            final_state,
        })
    }
}
