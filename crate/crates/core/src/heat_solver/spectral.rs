//! Fourier pseudo-spectral transforms on the periodic square `(0, 2π)²`.
//!
//! Normalization: the forward transform divides by `M²`,
//!
//! ```text
//! û(k) = M⁻² Σ_{i,j} u(x_i, y_j) e^{-i(k1 x_i + k2 y_j)},   u(x, y) = Σ_k û(k) e^{i(k1 x + k2 y)}
//! ```
//!
//! so `û` are the Fourier-series coefficients, `sin x sin y` has the four
//! modes `(±1, ±1)` of magnitude `1/4`, and Parseval reads
//! `‖u‖² = (2π)² Σ |û(k)|²`, `‖∇u‖² = (2π)² Σ |k|² |û(k)|²`.
//! Storage is row-major with the first index along `x`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::{Error, Result};

/// Fourier coefficients of a real field on an `M × M` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    m: usize,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(m: usize) -> Self {
        Self {
            m,
            coeffs: vec![Complex64::new(0.0, 0.0); m * m],
        }
    }

    pub fn grid_size(&self) -> usize {
        self.m
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of the wavenumber pair `(k1, k2)`, `-M/2 <= k < M/2`.
    pub fn coeff(&self, k1: i64, k2: i64) -> Complex64 {
        self.coeffs[self.index_of(k1) * self.m + self.index_of(k2)]
    }

    fn index_of(&self, k: i64) -> usize {
        k.rem_euclid(self.m as i64) as usize
    }

    /// `‖u‖²` over `(0, 2π)²`.
    pub fn l2_norm_sq(&self) -> f64 {
        4.0 * PI * PI * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// `‖∇u‖²` over `(0, 2π)²`.
    pub fn grad_norm_sq(&self) -> f64 {
        let m = self.m;
        let mut s = 0.0;
        for i in 0..m {
            let k1 = wavenumber(i, m) as f64;
            for j in 0..m {
                let k2 = wavenumber(j, m) as f64;
                s += (k1 * k1 + k2 * k2) * self.coeffs[i * m + j].norm_sqr();
            }
        }
        4.0 * PI * PI * s
    }

    /// Replaces `û(k)` by `(û(k) + conj(û(-k))) / 2`.
    pub fn enforce_hermitian(&mut self) {
        let m = self.m;
        let old = self.coeffs.clone();
        for i in 0..m {
            let ni = (m - i) % m;
            for j in 0..m {
                let nj = (m - j) % m;
                self.coeffs[i * m + j] = 0.5 * (old[i * m + j] + old[ni * m + nj].conj());
            }
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &SpectralField, b: f64) -> SpectralField {
        SpectralField {
            m: self.m,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }
}

/// Signed wavenumber of FFT index `i` on a grid of size `m`.
pub fn wavenumber(i: usize, m: usize) -> i64 {
    if i < m / 2 {
        i as i64
    } else {
        i as i64 - m as i64
    }
}

/// Planned forward and inverse 2D transforms for one grid size.
#[derive(Clone)]
pub struct SpectralGrid {
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralGrid").field("m", &self.m).finish()
    }
}

impl SpectralGrid {
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 || !m.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(m));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            m,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
        })
    }

    pub fn size(&self) -> usize {
        self.m
    }

    /// Grid coordinate `2π i / M`.
    pub fn coord(&self, i: usize) -> f64 {
        2.0 * PI * i as f64 / self.m as f64
    }

    /// Samples `f(x, y)` on the grid.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let m = self.m;
        let mut out = Vec::with_capacity(m * m);
        for i in 0..m {
            let x = self.coord(i);
            for j in 0..m {
                out.push(f(x, self.coord(j)));
            }
        }
        out
    }

    /// Periodic trapezoidal rule `(2π/M)² Σ u_ij`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        let h = 2.0 * PI / self.m as f64;
        h * h * values.iter().sum::<f64>()
    }

    fn transform_2d(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let m = self.m;
        for row in data.chunks_exact_mut(m) {
            fft.process(row);
        }
        let mut column = vec![Complex64::new(0.0, 0.0); m];
        for j in 0..m {
            for i in 0..m {
                column[i] = data[i * m + j];
            }
            fft.process(&mut column);
            for i in 0..m {
                data[i * m + j] = column[i];
            }
        }
    }

    /// Forward transform of a real field, made exactly Hermitian.
    pub fn forward(&self, values: &[f64]) -> Result<SpectralField> {
        let m = self.m;
        if values.len() != m * m {
            return Err(Error::NotEnoughValues {
                need: m * m,
                got: values.len(),
            });
        }
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform_2d(&mut data, &self.forward);
        let scale = 1.0 / (m * m) as f64;
        for c in &mut data {
            *c *= scale;
        }
        let mut field = SpectralField { m, coeffs: data };
        field.enforce_hermitian();
        Ok(field)
    }

    /// Inverse transform keeping the imaginary parts.
    pub fn inverse_complex(&self, field: &SpectralField) -> Vec<Complex64> {
        let mut data = field.coeffs.clone();
        self.transform_2d(&mut data, &self.inverse);
        data
    }

    /// Inverse transform to physical values (real part).
    pub fn inverse(&self, field: &SpectralField) -> Vec<f64> {
        self.inverse_complex(field).into_iter().map(|c| c.re).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    #[test]
    fn rejects_bad_sizes() {
        assert_eq!(SpectralGrid::new(12).unwrap_err(), Error::NotPowerOfTwo(12));
        assert!(SpectralGrid::new(0).is_err());
    }

    #[test]
    fn delta_has_flat_spectrum() {
        let grid = SpectralGrid::new(8).unwrap();
        let mut v = vec![0.0; 64];
        v[0] = 1.0;
        let f = grid.forward(&v).unwrap();
        for c in f.coeffs() {
            assert!((c - Complex64::new(1.0 / 64.0, 0.0)).norm() < 1e-16);
        }
    }

    #[test]
    fn sin_sin_has_four_modes() {
        let grid = SpectralGrid::new(16).unwrap();
        let f = grid.forward(&grid.sample(|x, y| x.sin() * y.sin())).unwrap();
        for k1 in -8..8 {
            for k2 in -8..8 {
                let c = f.coeff(k1, k2);
                if k1.abs() == 1 && k2.abs() == 1 {
                    assert!((c.norm() - 0.25).abs() < 1e-15);
                    assert!((c.re + 0.25 * (k1 * k2) as f64).abs() < 1e-15);
                } else {
                    assert!(c.norm() < 1e-15);
                }
            }
        }
        // ∫∫ sin²x sin²y = π², ∫∫ |∇(sin x sin y)|² = 2π²
        assert!((f.l2_norm_sq() - PI * PI).abs() < 1e-12);
        assert!((f.grad_norm_sq() - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn round_trip_and_parseval() {
        let grid = SpectralGrid::new(32).unwrap();
        let mut rng = SeededRng::new(9);
        let v: Vec<f64> = (0..1024).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let f = grid.forward(&v).unwrap();
        let back = grid.inverse_complex(&f);
        for (a, b) in v.iter().zip(&back) {
            assert!((a - b.re).abs() < 1e-13);
            assert!(b.im.abs() < 1e-13);
        }
        let quad = grid.integrate(&v.iter().map(|x| x * x).collect::<Vec<_>>());
        assert!((f.l2_norm_sq() - quad).abs() < 1e-12 * quad);
    }

    #[test]
    fn wavenumbers_are_centered() {
        assert_eq!(wavenumber(0, 8), 0);
        assert_eq!(wavenumber(3, 8), 3);
        assert_eq!(wavenumber(4, 8), -4);
        assert_eq!(wavenumber(7, 8), -1);
    }
}
