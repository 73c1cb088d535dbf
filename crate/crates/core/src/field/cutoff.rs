//! Time cutoffs: a plateau built from the degree-7 smoothstep, and tabulated
//! cutoffs for time-convolved fields.

use serde::Serialize;

/// S(s) = 35s⁴ − 84s⁵ + 70s⁶ − 20s⁷ and its first two derivatives.
fn smoothstep(s: f64) -> (f64, f64, f64) {
    let s2 = s * s;
    let s3 = s2 * s;
    let v = s2 * s2 * (35.0 - 84.0 * s + 70.0 * s2 - 20.0 * s3);
    let om = 1.0 - s;
    let d1 = 140.0 * s3 * om * om * om;
    let d2 = 420.0 * s2 * om * om * (1.0 - 2.0 * s);
    (v, d1, d2)
}

/// ∫₀ˢ S.
fn smoothstep_integral(s: f64) -> f64 {
    let s2 = s * s;
    let s4 = s2 * s2;
    s4 * s * (7.0 - 14.0 * s + 10.0 * s2 - 2.5 * s2 * s)
}

/// Nonnegative bump on `[lo, hi]`: smoothstep ramps over the outer quarters
/// and a flat top in between. Its integral is `3/4 · peak · (hi − lo)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlateauCutoff {
    pub lo: f64,
    pub hi: f64,
    pub peak: f64,
}

impl PlateauCutoff {
    /// Cutoff supported in the slot `[slot_lo, slot_lo + len]` shrunk by
    /// `len/6` on each side, with total mass `len/2`.
    pub fn for_slot(slot_lo: f64, len: f64) -> Self {
        let lo = slot_lo + len / 6.0;
        let hi = slot_lo + len - len / 6.0;
        let w = hi - lo;
        PlateauCutoff { lo, hi, peak: (0.5 * len) / (0.75 * w) }
    }

    fn ramp(&self) -> f64 {
        0.25 * (self.hi - self.lo)
    }

    pub fn mass(&self) -> f64 {
        0.75 * self.peak * (self.hi - self.lo)
    }

    /// (η, η′, η″) at `t`.
    pub fn derivatives(&self, t: f64) -> (f64, f64, f64) {
        if t <= self.lo || t >= self.hi {
            return (0.0, 0.0, 0.0);
        }
        let r = self.ramp();
        if t < self.lo + r {
            let (v, d1, d2) = smoothstep((t - self.lo) / r);
            (self.peak * v, self.peak * d1 / r, self.peak * d2 / (r * r))
        } else if t > self.hi - r {
            let (v, d1, d2) = smoothstep((self.hi - t) / r);
            (self.peak * v, -self.peak * d1 / r, self.peak * d2 / (r * r))
        } else {
            (self.peak, 0.0, 0.0)
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.derivatives(t).0
    }

    /// ∫_{lo}^{t} η.
    pub fn cumulative(&self, t: f64) -> f64 {
        let r = self.ramp();
        if t <= self.lo {
            0.0
        } else if t >= self.hi {
            self.mass()
        } else if t < self.lo + r {
            self.peak * r * smoothstep_integral((t - self.lo) / r)
        } else if t > self.hi - r {
            self.mass() - self.peak * r * smoothstep_integral((self.hi - t) / r)
        } else {
            self.peak * (0.5 * r + (t - self.lo - r))
        }
    }
}

/// Cutoff given by samples on a uniform grid with exact slopes; cumulative
/// mass is the Hermite integral of the samples.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedCutoff {
    pub lo: f64,
    pub hi: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
    cumulative: Vec<f64>,
}

impl TabulatedCutoff {
    /// Samples at `lo + j·(hi − lo)/(n − 1)`, zero outside.
    pub fn new(lo: f64, hi: f64, values: Vec<f64>, slopes: Vec<f64>) -> Self {
        let n = values.len();
        assert!(n >= 2 && slopes.len() == n);
        let h = (hi - lo) / (n - 1) as f64;
        let mut cumulative = vec![0.0; n];
        for j in 1..n {
            // Exact integral of the cubic Hermite interpolant.
            let seg = h * 0.5 * (values[j - 1] + values[j]) + h * h / 12.0 * (slopes[j - 1] - slopes[j]);
            cumulative[j] = cumulative[j - 1] + seg;
        }
        TabulatedCutoff { lo, hi, values, slopes, cumulative }
    }

    /// Table spacing.
    pub fn h(&self) -> f64 {
        (self.hi - self.lo) / (self.values.len() - 1) as f64
    }

    fn locate(&self, t: f64) -> Option<(usize, f64)> {
        if t <= self.lo || t >= self.hi {
            return None;
        }
        let u = (t - self.lo) / self.h();
        let i = (u as usize).min(self.values.len() - 2);
        Some((i, u - i as f64))
    }

    pub fn value(&self, t: f64) -> f64 {
        let Some((i, s)) = self.locate(t) else { return 0.0 };
        let h = self.h();
        let (y0, y1, m0, m1) = (self.values[i], self.values[i + 1], self.slopes[i] * h, self.slopes[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * m1
    }

    pub fn mass(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn cumulative(&self, t: f64) -> f64 {
        if t <= self.lo {
            return 0.0;
        }
        let Some((i, s)) = self.locate(t) else { return self.mass() };
        let h = self.h();
        let (y0, y1, m0, m1) = (self.values[i], self.values[i + 1], self.slopes[i] * h, self.slopes[i + 1] * h);
        // ∫₀ˢ of the Hermite basis polynomials.
        let s2 = s * s;
        let s3 = s2 * s;
        let s4 = s2 * s2;
        let part = y0 * (0.5 * s4 - s3 + s) + m0 * (0.25 * s4 - 2.0 / 3.0 * s3 + 0.5 * s2) + y1 * (-0.5 * s4 + s3) + m1 * (0.25 * s4 - s3 / 3.0);
        self.cumulative[i] + h * part
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cutoff {
    Plateau(PlateauCutoff),
    Table(TabulatedCutoff),
}

impl Cutoff {
    pub fn support(&self) -> (f64, f64) {
        match self {
            Cutoff::Plateau(c) => (c.lo, c.hi),
            Cutoff::Table(c) => (c.lo, c.hi),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Cutoff::Plateau(c) => c.value(t),
            Cutoff::Table(c) => c.value(t),
        }
    }

    pub fn cumulative(&self, t: f64) -> f64 {
        match self {
            Cutoff::Plateau(c) => c.cumulative(t),
            Cutoff::Table(c) => c.cumulative(t),
        }
    }

    pub fn mass(&self) -> f64 {
        match self {
            Cutoff::Plateau(c) => c.mass(),
            Cutoff::Table(c) => c.mass(),
        }
    }

    pub fn peak(&self) -> f64 {
        match self {
            Cutoff::Plateau(c) => c.peak,
            Cutoff::Table(c) => c.max_value(),
        }
    }

    /// Time step that resolves the cutoff for explicit integration.
    pub fn resolution(&self) -> f64 {
        match self {
            Cutoff::Plateau(c) => c.ramp() / 16.0,
            // Tables hold 32 samples per smoothing scale; RK4 needs far fewer.
            Cutoff::Table(c) => 4.0 * c.h(),
        }
    }

    /// Bound on |η′| used by the substep rule.
    pub fn max_slope(&self) -> f64 {
        match self {
            Cutoff::Plateau(c) => c.peak * 2.1875 / c.ramp(),
            Cutoff::Table(c) => c.slopes.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    /// ‖η‖_{C^k} = max_{j ≤ k} sup|η^{(j)}|, sampled on a fine grid (k ≤ 2).
    pub fn ck_norm(&self, k: usize, samples: usize) -> f64 {
        let (lo, hi) = self.support();
        let mut best: f64 = 0.0;
        for j in 0..=samples {
            let t = lo + (hi - lo) * j as f64 / samples as f64;
            let d = match self {
                Cutoff::Plateau(c) => c.derivatives(t),
                Cutoff::Table(c) => {
                    let e = 1e-6 * (hi - lo);
                    let v = c.value(t);
                    let vp = c.value(t + e);
                    let vm = c.value(t - e);
                    (v, (vp - vm) / (2.0 * e), (vp - 2.0 * v + vm) / (e * e))
                }
            };
            let parts = [d.0.abs(), d.1.abs(), d.2.abs()];
            for p in parts.iter().take(k.min(2) + 1) {
                best = best.max(*p);
            }
        }
        best
    }
}
