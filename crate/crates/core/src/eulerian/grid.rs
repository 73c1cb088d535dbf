//! Grid fields on the torus and their Fourier coefficients.

use crate::error::{LabError, Result};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;
use std::sync::Arc;

/// Samples at the cell centres `((i+½)/N, (j+½)/N)`, row-major with row `j`
/// holding `x₂ = (j+½)/N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarField {
    pub n: usize,
    pub values: Vec<f64>,
    pub time: f64,
}

pub fn node(i: usize, n: usize) -> f64 {
    (i as f64 + 0.5) / n as f64
}

/// Signed frequency of FFT index `i`; the Nyquist index maps to `−N/2`.
pub fn freq(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(LabError::Contract(format!("grid size {n} is not a power of two")));
    }
    Ok(())
}

impl ScalarField {
    pub fn from_values(n: usize, values: Vec<f64>, time: f64) -> Result<Self> {
        check_n(n)?;
        if values.len() != n * n {
            return Err(LabError::Contract(format!("{} values for an {n}x{n} grid", values.len())));
        }
        Ok(ScalarField { n, values, time })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::from_values(n, vec![0.0; n * n], 0.0)
    }

    pub fn from_fn(n: usize, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        check_n(n)?;
        let mut values = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                values.push(f([node(i, n), node(j, n)]));
            }
        }
        Self::from_values(n, values, 0.0)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.n + i]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// ∫ϑ² by the grid rule.
    pub fn l2_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn to_spectral(&self) -> SpectralField {
        let plan = Plans::new(self.n);
        let mut c: Vec<Complex64> = self.values.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        plan.forward_2d(&mut c);
        let s = 1.0 / (self.n * self.n) as f64;
        c.iter_mut().for_each(|z| *z *= s);
        SpectralField { n: self.n, coeffs: c }
    }
}

/// Normalised coefficients `c_k = N⁻² Σ ϑ_j e^{−2πi k·j/N}`, row index `k₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub n: usize,
    pub coeffs: Vec<Complex64>,
}

impl SpectralField {
    /// Σ|c_k|², equal to the grid L² norm squared by Parseval.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn get(&self, k1: i64, k2: i64) -> Complex64 {
        let n = self.n as i64;
        self.coeffs[(k2.rem_euclid(n) * n + k1.rem_euclid(n)) as usize]
    }

    pub fn to_scalar(&self, time: f64) -> ScalarField {
        let plan = Plans::new(self.n);
        let mut c = self.coeffs.clone();
        plan.inverse_2d(&mut c);
        ScalarField { n: self.n, values: c.iter().map(|z| z.re).collect(), time }
    }
}

/// FFT plans for one grid size.
#[derive(Clone)]
pub struct Plans {
    pub n: usize,
    pub fwd: Arc<dyn Fft<f64>>,
    pub inv: Arc<dyn Fft<f64>>,
}

impl Plans {
    pub fn new(n: usize) -> Self {
        let mut p = FftPlanner::new();
        Plans { n, fwd: p.plan_fft_forward(n), inv: p.plan_fft_inverse(n) }
    }

    pub fn rows_forward(&self, data: &mut [Complex64]) {
        self.fwd.process(data);
    }

    pub fn rows_inverse(&self, data: &mut [Complex64]) {
        self.inv.process(data);
    }

    /// Unnormalised 2D forward transform.
    pub fn forward_2d(&self, data: &mut [Complex64]) {
        self.fwd.process(data);
        transpose(data, self.n);
        self.fwd.process(data);
        transpose(data, self.n);
    }

    /// Unnormalised 2D inverse transform.
    pub fn inverse_2d(&self, data: &mut [Complex64]) {
        self.inv.process(data);
        transpose(data, self.n);
        self.inv.process(data);
        transpose(data, self.n);
    }
}

/// In-place blocked transpose of an `n × n` matrix.
pub fn transpose(data: &mut [Complex64], n: usize) {
    const B: usize = 32;
    for bi in (0..n).step_by(B) {
        for bj in (bi..n).step_by(B) {
            for i in bi..(bi + B).min(n) {
                let start = if bi == bj { i + 1 } else { bj };
                for j in start..(bj + B).min(n) {
                    data.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}
