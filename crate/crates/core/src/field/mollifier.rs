//! The spatial bump ψ̃(z) = c·exp(−1/(1 − (z/2)²)) on (−2, 2), its CDF and its
//! Fourier transform, plus the scaled one-dimensional mollifier built on it.

use gauss_quad::legendre::GaussLegendre;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Intervals in the CDF table over (−2, 2).
const CDF_INTERVALS: usize = 8192;
const GL_ORDER: usize = 12;

fn raw(z: f64) -> f64 {
    let s = 0.5 * z;
    let d = 1.0 - s * s;
    if d <= 0.0 {
        0.0
    } else {
        (-1.0 / d).exp()
    }
}

fn raw_derivative(z: f64) -> f64 {
    let s = 0.5 * z;
    let d = 1.0 - s * s;
    if d <= 0.0 {
        0.0
    } else {
        -(-1.0 / d).exp() * s / (d * d)
    }
}

pub struct Bump {
    norm: f64,
    h: f64,
    cdf: Vec<f64>,
}

static BUMP: OnceLock<Bump> = OnceLock::new();

/// Shared instance; the CDF table is built on first use.
pub fn bump() -> &'static Bump {
    BUMP.get_or_init(Bump::build)
}

impl Bump {
    fn build() -> Bump {
        let gl = GaussLegendre::new(GL_ORDER.try_into().expect("nonzero order"));
        let h = 4.0 / CDF_INTERVALS as f64;
        let mut cdf = Vec::with_capacity(CDF_INTERVALS + 1);
        let mut acc = 0.0;
        cdf.push(0.0);
        for i in 0..CDF_INTERVALS {
            let lo = -2.0 + i as f64 * h;
            acc += gl.integrate(lo, lo + h, raw);
            cdf.push(acc);
        }
        let norm = 1.0 / acc;
        for v in &mut cdf {
            *v *= norm;
        }
        // Pin the ends so the step response is exactly 0 and 1 outside.
        cdf[0] = 0.0;
        cdf[CDF_INTERVALS] = 1.0;
        Bump { norm, h, cdf }
    }

    /// Normalising constant c.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn density(&self, z: f64) -> f64 {
        self.norm * raw(z)
    }

    pub fn derivative(&self, z: f64) -> f64 {
        self.norm * raw_derivative(z)
    }

    /// Ψ(z) = ∫_{−2}^{z} ψ̃, by cubic Hermite interpolation with the exact
    /// density as the slope.
    pub fn cdf(&self, z: f64) -> f64 {
        if z <= -2.0 {
            return 0.0;
        }
        if z >= 2.0 {
            return 1.0;
        }
        let u = (z + 2.0) / self.h;
        let i = (u as usize).min(CDF_INTERVALS - 1);
        let s = u - i as f64;
        let z0 = -2.0 + i as f64 * self.h;
        let (y0, y1) = (self.cdf[i], self.cdf[i + 1]);
        let (m0, m1) = (self.density(z0) * self.h, self.density(z0 + self.h) * self.h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * m1
    }

    /// ψ̂(ξ) = ∫ ψ̃(z) e^{−2πiξz} dz (real, since ψ̃ is even); zero beyond
    /// the table, where it is below 1e−15.
    pub fn transform(&self, xi: f64) -> f64 {
        let t = TRANSFORM.get_or_init(|| TransformTable::build(self));
        t.eval(xi.abs())
    }
}

/// ψ̂ on ξ ∈ [0, XI_MAX] with spacing 1/L, from one FFT of samples of ψ̃ on
/// [−L/2, L/2). The trapezoid rule is spectrally accurate for a smooth
/// compactly supported integrand.
struct TransformTable {
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

const TRANSFORM_PERIOD: f64 = 256.0;
const TRANSFORM_SAMPLES: usize = 1 << 18;
const XI_MAX: f64 = 64.0;

static TRANSFORM: OnceLock<TransformTable> = OnceLock::new();

impl TransformTable {
    fn build(b: &Bump) -> Self {
        use num_complex::Complex64;
        let n = TRANSFORM_SAMPLES;
        let h = TRANSFORM_PERIOD / n as f64;
        // Index j holds z = j·h for j < n/2 and z = (j − n)·h above.
        let z_of = |j: usize| if j < n / 2 { j as f64 * h } else { (j as f64 - n as f64) * h };
        let mut v: Vec<Complex64> = (0..n).map(|j| Complex64::new(b.density(z_of(j)) * h, 0.0)).collect();
        let mut d: Vec<Complex64> =
            (0..n).map(|j| Complex64::new(0.0, -2.0 * PI * z_of(j) * b.density(z_of(j)) * h)).collect();
        let mut planner = rustfft::FftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(n);
        fft.process(&mut v);
        fft.process(&mut d);
        let count = (XI_MAX * TRANSFORM_PERIOD) as usize + 1;
        TransformTable {
            step: 1.0 / TRANSFORM_PERIOD,
            values: v[..count].iter().map(|c| c.re).collect(),
            slopes: d[..count].iter().map(|c| c.re).collect(),
        }
    }

    fn eval(&self, xi: f64) -> f64 {
        let u = xi / self.step;
        let last = self.values.len() - 1;
        if u >= last as f64 {
            return 0.0;
        }
        let i = u as usize;
        let s = u - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * self.step, self.slopes[i + 1] * self.step);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * m1
    }
}

/// ψ_ℓ(x) = ψ̃(x/ℓ)/ℓ, supported in (−2ℓ, 2ℓ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mollifier {
    pub ell: f64,
}

impl Mollifier {
    pub fn new(ell: f64) -> Self {
        Mollifier { ell }
    }

    pub fn radius(&self) -> f64 {
        2.0 * self.ell
    }

    pub fn kernel(&self, x: f64) -> f64 {
        bump().density(x / self.ell) / self.ell
    }

    /// Response at signed distance `d` past an upward unit jump.
    pub fn step(&self, d: f64) -> f64 {
        bump().cdf(d / self.ell)
    }

    /// Slope of the step response.
    pub fn step_slope(&self, d: f64) -> f64 {
        self.kernel(d)
    }

    /// Fourier multiplier at frequency `k` (cycles per unit length).
    pub fn transform(&self, k: f64) -> f64 {
        bump().transform(k * self.ell)
    }
}
