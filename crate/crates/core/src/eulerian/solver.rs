//! Split-step advection-diffusion: exact shear transport by per-row Fourier
//! phase shifts, exact heat semigroup, Strang composition within slots.

use super::grid::{freq, node, transpose, Plans, ScalarField, SpectralField};
use crate::error::{LabError, Result};
use crate::field::{Direction, Profile1D, ProfileKind, ShearSegment, VelocityField};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Minimum grid for a level: at least `collar_points` nodes per mollifier
/// length of the profiles it switches on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissionRule {
    pub collar_points: f64,
}

impl Default for AdmissionRule {
    /// Eight nodes per collar keep spectral overshoot near rounding.
    fn default() -> Self {
        AdmissionRule { collar_points: 8.0 }
    }
}

impl AdmissionRule {
    pub fn required(&self, ell: f64) -> f64 {
        self.collar_points / ell
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepPolicy {
    /// Substeps satisfy `max|η′|·Δt ≤ tol·max η`.
    pub tol: f64,
    /// Upper bound on substeps per slot.
    pub max_substeps: usize,
    /// Fixed number of substeps per stretch between checkpoints, overriding
    /// the tolerance rule (convergence studies).
    pub fixed_substeps: Option<usize>,
    /// Extra times at which to record the ledger and keep snapshots.
    pub extra_checkpoints: Vec<f64>,
    /// Keep field snapshots at checkpoints.
    pub keep_snapshots: bool,
    pub admission: AdmissionRule,
}

impl Default for StepPolicy {
    fn default() -> Self {
        StepPolicy {
            tol: 0.1,
            max_substeps: 100_000,
            fixed_substeps: None,
            extra_checkpoints: Vec::new(),
            keep_snapshots: false,
            admission: AdmissionRule::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EnergyLedger {
    pub times: Vec<f64>,
    pub l2_sq: Vec<f64>,
    /// Energy removed by the heat sub-steps so far (exact per mode).
    pub diss_cum: Vec<f64>,
    pub grad_l2_sq: Vec<f64>,
    /// Whether the entry closes a substep inside an active slot.
    #[serde(skip)]
    pub in_slot: Vec<bool>,
}

impl EnergyLedger {
    fn push(&mut self, t: f64, l2: f64, diss: f64, grad: f64, in_slot: bool) {
        self.times.push(t);
        self.l2_sq.push(l2);
        self.diss_cum.push(diss);
        self.grad_l2_sq.push(grad);
        self.in_slot.push(in_slot);
    }

    /// max_t |‖ϑ(t)‖² + diss_cum(t) − ‖ϑ(0)‖²|.
    pub fn balance_defect(&self) -> f64 {
        let e0 = self.l2_sq[0];
        self.l2_sq
            .iter()
            .zip(&self.diss_cum)
            .fold(0.0, |m, (l, d)| m.max((l + d - e0).abs()))
    }

    /// Gap between the exact dissipation in active slots and the trapezoid
    /// rule for `2κ∫‖∇ϑ‖²` over the substep samples there.
    pub fn splitting_defect(&self, kappa: f64) -> f64 {
        let mut defect = 0.0;
        for k in 1..self.times.len() {
            if self.in_slot[k] {
                let dt = self.times[k] - self.times[k - 1];
                let trap = kappa * dt * (self.grad_l2_sq[k] + self.grad_l2_sq[k - 1]);
                defect += (self.diss_cum[k] - self.diss_cum[k - 1]) - trap;
            }
        }
        defect.abs()
    }

    /// Energy at the ledger entry nearest to `t`.
    pub fn at(&self, t: f64) -> (f64, f64) {
        let mut best = 0;
        for (k, s) in self.times.iter().enumerate() {
            if (s - t).abs() < (self.times[best] - t).abs() {
                best = k;
            }
        }
        (self.l2_sq[best], self.diss_cum[best])
    }

    /// CSV with columns `t,l2_sq,diss_cum,grad_l2_sq`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,l2_sq,diss_cum,grad_l2_sq\n");
        for k in 0..self.times.len() {
            s.push_str(&format!(
                "{:.17e},{:.17e},{:.17e},{:.17e}\n",
                self.times[k], self.l2_sq[k], self.diss_cum[k], self.grad_l2_sq[k]
            ));
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub final_field: ScalarField,
    pub snapshots: Vec<ScalarField>,
    pub ledger: EnergyLedger,
    pub substeps: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Layout {
    /// Rows indexed by k₂, columns by k₁.
    Normal,
    /// Rows indexed by k₁, columns by k₂.
    Transposed,
}

/// Spectral state of one run.
pub struct SpectralSolver {
    n: usize,
    plans: Plans,
    c: Vec<Complex64>,
    layout: Layout,
    kappa: f64,
    k2pi: Vec<f64>,
    phase: Vec<Complex64>,
    step: Vec<Complex64>,
}

impl SpectralSolver {
    pub fn new(theta: &ScalarField, kappa: f64) -> Result<Self> {
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(LabError::Contract(format!("diffusivity {kappa} must be finite and >= 0")));
        }
        let n = theta.n;
        let s = theta.to_spectral();
        Ok(SpectralSolver {
            n,
            plans: Plans::new(n),
            c: s.coeffs,
            layout: Layout::Normal,
            kappa,
            k2pi: (0..n).map(|i| 2.0 * PI * freq(i, n) as f64).collect(),
            phase: vec![Complex64::new(0.0, 0.0); n],
            step: vec![Complex64::new(0.0, 0.0); n],
        })
    }

    fn set_layout(&mut self, l: Layout) {
        if self.layout != l {
            transpose(&mut self.c, self.n);
            self.layout = l;
        }
    }

    pub fn spectral(&mut self) -> SpectralField {
        self.set_layout(Layout::Normal);
        SpectralField { n: self.n, coeffs: self.c.clone() }
    }

    pub fn field(&mut self, time: f64) -> ScalarField {
        self.spectral().to_scalar(time)
    }

    /// (‖ϑ‖², ‖∇ϑ‖²).
    pub fn energies(&self) -> (f64, f64) {
        let n = self.n;
        let (mut e, mut g) = (0.0, 0.0);
        for r in 0..n {
            let kr = self.k2pi[r] * self.k2pi[r];
            for col in 0..n {
                let z = self.c[r * n + col].norm_sqr();
                e += z;
                g += z * (kr + self.k2pi[col] * self.k2pi[col]);
            }
        }
        (e, g)
    }

    /// Heat semigroup over `dt`; returns (energy removed, ‖ϑ‖², ‖∇ϑ‖²) after.
    pub fn heat(&mut self, dt: f64) -> (f64, f64, f64) {
        let n = self.n;
        if self.kappa == 0.0 || dt == 0.0 {
            let (e, g) = self.energies();
            return (0.0, e, g);
        }
        let f: Vec<f64> = self.k2pi.iter().map(|k| (-self.kappa * k * k * dt).exp()).collect();
        let (mut diss, mut e, mut g) = (0.0, 0.0, 0.0);
        for r in 0..n {
            let kr = self.k2pi[r] * self.k2pi[r];
            for col in 0..n {
                let idx = r * n + col;
                let fac = f[r] * f[col];
                let before = self.c[idx].norm_sqr();
                self.c[idx] *= fac;
                let after = before * fac * fac;
                diss += before - after;
                e += after;
                g += after * (kr + self.k2pi[col] * self.k2pi[col]);
            }
        }
        (diss, e, g)
    }

    /// Translates along the shear direction by `disp[i]`, where `i` indexes
    /// the transverse grid coordinate.
    pub fn shear(&mut self, direction: Direction, disp: &[f64]) {
        let n = self.n;
        assert_eq!(disp.len(), n, "one displacement per transverse grid line");
        // Rows must be indexed by the frequency along the shift direction.
        self.set_layout(match direction {
            Direction::Vertical => Layout::Normal,
            Direction::Horizontal => Layout::Transposed,
        });
        let inv_n = 1.0 / n as f64;
        self.phase.fill(Complex64::new(inv_n, 0.0));
        for (s, d) in self.step.iter_mut().zip(disp) {
            let a = -2.0 * PI * d;
            *s = Complex64::new(a.cos(), a.sin());
        }
        self.plans.rows_inverse(&mut self.c);
        let half = n / 2;
        for k in 0..=half {
            if k > 0 {
                for (p, s) in self.phase.iter_mut().zip(&self.step) {
                    *p *= s;
                }
                if k % 64 == 0 {
                    for (p, d) in self.phase.iter_mut().zip(disp) {
                        let a = -2.0 * PI * k as f64 * d;
                        *p = Complex64::new(a.cos(), a.sin()) * inv_n;
                    }
                }
            }
            if k == 0 {
                for v in &mut self.c[..n] {
                    *v *= inv_n;
                }
            } else if k == half {
                let row = &mut self.c[half * n..(half + 1) * n];
                // A real field keeps a real Nyquist line, so its phase is
                // rounded to the nearest of ±1: unitary, exact on whole cells.
                for (v, p) in row.iter_mut().zip(&self.phase) {
                    *v *= if p.re < 0.0 { -inv_n } else { inv_n };
                }
            } else {
                let (lo, hi) = self.c.split_at_mut((n - k) * n);
                let pos = &mut lo[k * n..(k + 1) * n];
                let neg = &mut hi[..n];
                for ((a, b), p) in pos.iter_mut().zip(neg.iter_mut()).zip(&self.phase) {
                    *a *= p;
                    *b *= p.conj();
                }
            }
        }
        self.plans.rows_forward(&mut self.c);
    }
}

/// Translates `field` along `profile`'s direction by `mass · profile(x_⊥)`.
pub fn step_shear_exact(field: &ScalarField, profile: &Profile1D, mass: f64) -> Result<ScalarField> {
    if !matches!(profile.kind, ProfileKind::MixH | ProfileKind::MixV | ProfileKind::Swap) {
        return Err(LabError::Contract(format!("{:?} is not a shear profile", profile.kind)));
    }
    let n = field.n;
    let disp: Vec<f64> = (0..n).map(|i| mass * profile.value(node(i, n))).collect();
    if let Some(cells) = whole_cells(&disp, n) {
        return Ok(roll(field, profile.direction, &cells));
    }
    let mut s = SpectralSolver::new(field, 0.0)?;
    s.shear(profile.direction, &disp);
    Ok(s.field(field.time))
}

/// Displacements as whole numbers of cells, when every one of them is.
fn whole_cells(disp: &[f64], n: usize) -> Option<Vec<i64>> {
    disp.iter()
        .map(|d| {
            let c = d * n as f64;
            (c == c.round()).then_some(c as i64)
        })
        .collect()
}

/// Exact periodic roll of each grid line by its own number of cells.
fn roll(field: &ScalarField, direction: Direction, cells: &[i64]) -> ScalarField {
    let n = field.n;
    let mut out = field.clone();
    for (perp, &c) in cells.iter().enumerate() {
        let c = c.rem_euclid(n as i64) as usize;
        for par in 0..n {
            let dst = (par + c) % n;
            match direction {
                Direction::Horizontal => out.values[perp * n + dst] = field.values[perp * n + par],
                Direction::Vertical => out.values[dst * n + perp] = field.values[par * n + perp],
            }
        }
    }
    out
}

/// Heat semigroup `exp(κΔ dt)`.
pub fn step_heat_exact(field: &ScalarField, kappa: f64, dt: f64) -> Result<ScalarField> {
    if !(dt >= 0.0) {
        return Err(LabError::Contract(format!("time step {dt} must be >= 0")));
    }
    let mut s = SpectralSolver::new(field, kappa)?;
    s.heat(dt);
    Ok(s.field(field.time + dt))
}

/// Active window of one segment inside the run.
struct Window<'a> {
    seg: &'a ShearSegment,
    lo: f64,
    hi: f64,
}

/// Grid check for every segment that acts inside `[t0, t1]`.
pub fn check_admission(f: &VelocityField, n: usize, t0: f64, t1: f64, rule: &AdmissionRule) -> Result<()> {
    for s in &f.segments {
        let (lo, hi) = s.support();
        if hi <= t0 || lo >= t1 {
            continue;
        }
        let ell = f.schedule.levels[s.q + 1].ell;
        let need = rule.required(ell);
        if (n as f64) < need {
            return Err(LabError::Resolution(format!(
                "grid N = {n} gives fewer than {} nodes per collar for level {} (ell = {ell:.3e}, needs N >= {need:.0})",
                rule.collar_points, s.q
            )));
        }
    }
    Ok(())
}

/// Number of substeps for a window of length `len` of segment `seg`.
pub(crate) fn substeps(seg: &ShearSegment, len: f64, kappa: f64, policy: &StepPolicy) -> Result<usize> {
    // Without diffusion the shears of one slot commute: one exact step.
    if kappa == 0.0 {
        return Ok(1);
    }
    if let Some(k) = policy.fixed_substeps {
        return Ok(k.max(1));
    }
    let slope = seg.cutoff.max_slope();
    let peak = seg.cutoff.peak();
    let k = ((slope * len) / (policy.tol * peak)).ceil().max(1.0) as usize;
    if k > policy.max_substeps {
        return Err(LabError::Contract(format!(
            "{} needs {k} substeps, above the cap {}",
            seg.label, policy.max_substeps
        )));
    }
    Ok(k)
}

/// Evolves `theta0` from `t0` to `t1` under `f` with diffusivity `kappa`.
pub fn evolve(theta0: &ScalarField, f: &VelocityField, kappa: f64, t0: f64, t1: f64, policy: &StepPolicy) -> Result<Evolution> {
    if f.has_overlaps() {
        return Err(LabError::Contract(
            "segments overlap in time; the split-step solver needs one shear at a time".into(),
        ));
    }
    if !(t1 >= t0) {
        return Err(LabError::Contract(format!("end time {t1} before start time {t0}")));
    }
    let n = theta0.n;
    check_admission(f, n, t0, t1, &policy.admission)?;
    let mut solver = SpectralSolver::new(theta0, kappa)?;
    let mut checkpoints = f.schedule.checkpoint_times(t0, t1);
    checkpoints.extend(policy.extra_checkpoints.iter().copied().filter(|t| *t >= t0 && *t <= t1));
    checkpoints.sort_by(f64::total_cmp);
    checkpoints.dedup();

    let windows: Vec<Window> = f
        .segments
        .iter()
        .filter_map(|s| {
            let (lo, hi) = s.support();
            let (lo, hi) = (lo.max(t0), hi.min(t1));
            (hi > lo).then_some(Window { seg: s, lo, hi })
        })
        .collect();

    let mut ledger = EnergyLedger::default();
    let (e0, g0) = solver.energies();
    ledger.push(t0, e0, 0.0, g0, false);
    let mut diss = 0.0;
    let mut snapshots = Vec::new();
    let mut total_sub = 0;
    let mut t = t0;
    let mut ci = 0;
    let mut wi = 0;
    let xs: Vec<f64> = (0..n).map(|i| node(i, n)).collect();
    let keep = |solver: &mut SpectralSolver, t: f64, snaps: &mut Vec<ScalarField>| {
        if policy.keep_snapshots {
            snaps.push(solver.field(t));
        }
    };
    if checkpoints.first() == Some(&t0) {
        keep(&mut solver, t0, &mut snapshots);
        ci = 1;
    }
    while t < t1 {
        let next_window = windows.get(wi).map(|w| w.lo).unwrap_or(f64::INFINITY);
        if next_window <= t {
            // Active slot: Strang substeps between checkpoints inside it.
            let w = &windows[wi];
            let profile: Vec<f64> = xs.iter().map(|x| w.seg.profile.value(*x)).collect();
            let mut stops: Vec<f64> = checkpoints.iter().copied().filter(|c| *c > w.lo && *c < w.hi).collect();
            stops.push(w.hi);
            let mut a = w.lo;
            for b in stops {
                let k = substeps(w.seg, b - a, kappa, policy)?;
                let dt = (b - a) / k as f64;
                for j in 0..k {
                    let s0 = a + j as f64 * dt;
                    let s1 = if j + 1 == k { b } else { a + (j + 1) as f64 * dt };
                    let (d1, _, _) = solver.heat(0.5 * (s1 - s0));
                    let m = w.seg.mass_between(s0, s1);
                    let disp: Vec<f64> = profile.iter().map(|p| m * p).collect();
                    solver.shear(w.seg.direction(), &disp);
                    let (d2, e, g) = solver.heat(0.5 * (s1 - s0));
                    diss += d1 + d2;
                    ledger.push(s1, e, diss, g, true);
                }
                total_sub += k;
                a = b;
                while ci < checkpoints.len() && checkpoints[ci] <= b {
                    if checkpoints[ci] == b {
                        keep(&mut solver, b, &mut snapshots);
                    }
                    ci += 1;
                }
            }
            t = w.hi;
            wi += 1;
        } else {
            // Idle stretch: exact heat to the next event.
            let next_cp = checkpoints.get(ci).copied().unwrap_or(f64::INFINITY);
            let target = next_window.min(next_cp).min(t1);
            if target > t {
                let (d, e, g) = solver.heat(target - t);
                diss += d;
                ledger.push(target, e, diss, g, false);
            }
            if ci < checkpoints.len() && checkpoints[ci] <= target {
                keep(&mut solver, target, &mut snapshots);
                ci += 1;
            }
            t = target;
        }
    }
    let final_field = solver.field(t1);
    Ok(Evolution { final_field, snapshots, ledger, substeps: total_sub })
}
