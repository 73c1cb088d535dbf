//! One-dimensional shear profiles: piecewise constant on cells of the fine
//! scale, mollified in closed form through the bump CDF.

use super::mollifier::Mollifier;
use crate::error::{LabError, Result};
use serde::Serialize;

/// Which coordinate the velocity points along. A horizontal shear is
/// `(f(x₂), 0)`; a vertical one is `(0, f(x₁))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Horizontal,
    Vertical,
}

impl Direction {
    /// Index of the coordinate the velocity points along.
    pub fn parallel(self) -> usize {
        match self {
            Direction::Horizontal => 0,
            Direction::Vertical => 1,
        }
    }

    /// Index of the coordinate the profile depends on.
    pub fn transverse(self) -> usize {
        1 - self.parallel()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    MixH,
    MixV,
    Swap,
    Chessboard,
}

/// Periodic step function, constant on cells `[k·w, (k+1)·w)`, convolved with
/// a mollifier whose support (4ℓ) fits inside one cell, so that at most one
/// jump contributes at any point.
#[derive(Debug, Clone)]
pub struct StepProfile {
    cell: f64,
    values: Vec<f64>,
    moll: Mollifier,
}

impl StepProfile {
    pub fn new(cell: f64, values: Vec<f64>, ell: f64) -> Result<Self> {
        if values.is_empty() || !(cell > 0.0) {
            return Err(LabError::Contract("step profile needs cells".into()));
        }
        if 4.0 * ell > cell {
            return Err(LabError::Resolution(format!(
                "mollifier support 4*ell = {:.3e} exceeds the profile cell {:.3e}",
                4.0 * ell,
                cell
            )));
        }
        Ok(StepProfile { cell, values, moll: Mollifier::new(ell) })
    }

    pub fn cell(&self) -> f64 {
        self.cell
    }

    pub fn period(&self) -> f64 {
        self.cell * self.values.len() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mollifier(&self) -> Mollifier {
        self.moll
    }

    fn cell_value(&self, k: isize) -> f64 {
        self.values[k.rem_euclid(self.values.len() as isize) as usize]
    }

    /// Cell index and offset inside the cell.
    fn locate(&self, x: f64) -> (isize, f64) {
        let u = x / self.cell;
        let k = u.floor();
        let s = (x - k * self.cell).clamp(0.0, self.cell);
        (k as isize, s)
    }

    /// Unmollified value (half-open cells).
    pub fn raw(&self, x: f64) -> f64 {
        self.cell_value(self.locate(x).0)
    }

    /// The nearby jump, if `x` lies within its collar: (signed distance past
    /// the jump, left value, right value).
    fn near_jump(&self, x: f64) -> Option<(f64, f64, f64)> {
        let (k, s) = self.locate(x);
        let r = self.moll.radius();
        if s < r {
            Some((s, self.cell_value(k - 1), self.cell_value(k)))
        } else if self.cell - s < r {
            Some((s - self.cell, self.cell_value(k), self.cell_value(k + 1)))
        } else {
            None
        }
    }

    /// Mollified value.
    pub fn value(&self, x: f64) -> f64 {
        match self.near_jump(x) {
            Some((d, l, r)) => l + (r - l) * self.moll.step(d),
            None => self.raw(x),
        }
    }

    /// Derivative of the mollified value.
    pub fn slope(&self, x: f64) -> f64 {
        match self.near_jump(x) {
            Some((d, l, r)) => (r - l) * self.moll.step_slope(d),
            None => 0.0,
        }
    }

    /// Whether `x` sits inside the collar of a nonzero jump.
    pub fn in_collar(&self, x: f64) -> bool {
        matches!(self.near_jump(x), Some((_, l, r)) if l != r)
    }

    /// Distance from `x` to the nearest nonzero jump.
    pub fn jump_distance(&self, x: f64) -> f64 {
        let (k, s) = self.locate(x);
        let n = self.values.len() as isize;
        let mut best = f64::INFINITY;
        for j in 0..=n {
            let b = k - j;
            if self.cell_value(b - 1) != self.cell_value(b) {
                best = best.min(s + j as f64 * self.cell);
                break;
            }
        }
        for j in 1..=n + 1 {
            let b = k + j;
            if self.cell_value(b - 1) != self.cell_value(b) {
                best = best.min(j as f64 * self.cell - s);
                break;
            }
        }
        best
    }

    /// Number of nonzero jumps per period.
    pub fn jumps_per_period(&self) -> usize {
        let n = self.values.len() as isize;
        (0..n).filter(|&k| self.cell_value(k - 1) != self.cell_value(k)).count()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_jump(&self) -> f64 {
        let n = self.values.len() as isize;
        (0..n).fold(0.0, |m, k| m.max((self.cell_value(k) - self.cell_value(k - 1)).abs()))
    }

    /// Mean over one period (mollification preserves it).
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Samples at the cell-centred nodes `(j + ½)/n` of the unit circle.
    pub fn sample(&self, n: usize) -> Vec<f64> {
        (0..n).map(|j| self.value((j as f64 + 0.5) / n as f64)).collect()
    }
}

/// Periodic table with exact slopes, evaluated by cubic Hermite interpolation.
#[derive(Debug, Clone)]
pub struct PeriodicTable {
    period: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl PeriodicTable {
    pub fn new(period: f64, values: Vec<f64>, slopes: Vec<f64>) -> Self {
        assert_eq!(values.len(), slopes.len());
        PeriodicTable { period, values, slopes }
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    fn interp(&self, x: f64) -> (f64, f64) {
        let n = self.values.len();
        let h = self.period / n as f64;
        let u = (x / h).rem_euclid(n as f64);
        let i = (u as usize).min(n - 1);
        let s = u - i as f64;
        let j = (i + 1) % n;
        let (y0, y1) = (self.values[i], self.values[j]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[j] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let v = (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * m1;
        let d = ((6.0 * s2 - 6.0 * s) * y0 + (3.0 * s2 - 4.0 * s + 1.0) * m0 + (-6.0 * s2 + 6.0 * s) * y1 + (3.0 * s2 - 2.0 * s) * m1) / h;
        (v, d)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.interp(x).0
    }

    pub fn slope(&self, x: f64) -> f64 {
        self.interp(x).1
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_slope(&self) -> f64 {
        self.slopes.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone)]
pub enum Shape {
    Step(StepProfile),
    Table(PeriodicTable),
}

impl Shape {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            Shape::Step(s) => s.value(x),
            Shape::Table(t) => t.value(x),
        }
    }

    pub fn slope(&self, x: f64) -> f64 {
        match self {
            Shape::Step(s) => s.slope(x),
            Shape::Table(t) => t.slope(x),
        }
    }

    pub fn period(&self) -> f64 {
        match self {
            Shape::Step(s) => s.period(),
            Shape::Table(t) => t.period(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            Shape::Step(s) => s.max_abs(),
            Shape::Table(t) => t.max_abs(),
        }
    }

    /// Upper bound for |slope|.
    pub fn max_slope(&self) -> f64 {
        match self {
            Shape::Step(s) => s.max_jump() * super::mollifier::bump().density(0.0) / s.mollifier().ell,
            Shape::Table(t) => t.max_slope(),
        }
    }

    pub fn as_step(&self) -> Option<&StepProfile> {
        match self {
            Shape::Step(s) => Some(s),
            Shape::Table(_) => None,
        }
    }
}

/// A scaled shear profile: velocity `amplitude · shape(x_transverse)` along
/// `direction`.
#[derive(Debug, Clone)]
pub struct Profile1D {
    pub kind: ProfileKind,
    /// Coarse level q (the profile lives at scale a_{q+1}).
    pub q: usize,
    pub direction: Direction,
    pub amplitude: f64,
    pub shape: Shape,
}

fn sign(even: bool) -> f64 {
    if even {
        1.0
    } else {
        -1.0
    }
}

/// Unit cell values over one coarse period `2a_q`, on cells of width `a_{q+1}`;
/// `r = a_q / a_{q+1}` must be a multiple of 4.
pub fn cell_values(kind: ProfileKind, r: usize) -> Vec<f64> {
    let n = 2 * r;
    (0..n)
        .map(|k| {
            let fine = sign(k % 2 == 0);
            match kind {
                ProfileKind::MixH => sign((k / r).is_multiple_of(2)) * fine,
                ProfileKind::MixV => {
                    let shifted = sign(((k + r / 2) / r).is_multiple_of(2));
                    0.5 * (1.0 + shifted * fine)
                }
                ProfileKind::Swap => fine,
                ProfileKind::Chessboard => sign(k < r),
            }
        })
        .collect()
}

impl Profile1D {
    /// Profile of the given kind between coarse scale `a_q` and fine scale
    /// `a_{q+1} = a_q / r`, mollified at length `ell`.
    pub fn new(kind: ProfileKind, q: usize, a_q: f64, r: usize, gamma: f64, ell: f64) -> Result<Self> {
        if r == 0 || !r.is_multiple_of(4) {
            return Err(LabError::Contract(format!("scale ratio {r} is not a multiple of 4")));
        }
        let a_next = a_q / r as f64;
        let at = a_q.powf(-gamma);
        let (direction, amplitude) = match kind {
            ProfileKind::MixH => (Direction::Horizontal, a_q * at),
            ProfileKind::MixV => (Direction::Vertical, 2.0 * a_next * at),
            ProfileKind::Swap => (Direction::Horizontal, 2.0 * a_q * at),
            ProfileKind::Chessboard => {
                return Err(LabError::Contract("use Profile1D::chessboard for the datum profile".into()))
            }
        };
        let shape = Shape::Step(StepProfile::new(a_next, cell_values(kind, r), ell)?);
        Ok(Profile1D { kind, q, direction, amplitude, shape })
    }

    /// W(λx) mollified, for the chessboard of side `side`.
    pub fn chessboard(side: f64, ell: f64) -> Result<Self> {
        Ok(Profile1D {
            kind: ProfileKind::Chessboard,
            q: 0,
            direction: Direction::Horizontal,
            amplitude: 1.0,
            shape: Shape::Step(StepProfile::new(side, vec![1.0, -1.0], ell)?),
        })
    }

    pub fn value(&self, x: f64) -> f64 {
        self.amplitude * self.shape.value(x)
    }

    pub fn slope(&self, x: f64) -> f64 {
        self.amplitude * self.shape.slope(x)
    }

    pub fn sup(&self) -> f64 {
        self.amplitude * self.shape.max_abs()
    }

    pub fn lip(&self) -> f64 {
        self.amplitude * self.shape.max_slope()
    }
}
