//! Chessboard functions, restricted chessboard sets and the smoothed initial
//! datum.

use crate::error::{LabError, Result};
use crate::eulerian::ScalarField;
use crate::field::Profile1D;
use crate::params::rational::{qi, Q};
use num_traits::{Signed, Zero};
use serde::Serialize;

/// Good-set restriction in units of the strict mollifier length.
pub const RESTRICTION_CONSTANT: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

/// Chessboard `±ϑ₀(λx)` of side `1/(2λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChessboardSpec {
    pub side: f64,
    pub parity: Parity,
}

impl ChessboardSpec {
    pub fn new(side: f64, parity: Parity) -> Self {
        ChessboardSpec { side, parity }
    }

    /// Board with frequency λ (side 1/(2λ)).
    pub fn with_lambda(lambda: f64, parity: Parity) -> Self {
        ChessboardSpec { side: 0.5 / lambda, parity }
    }

    fn cell(&self, x: f64) -> i64 {
        (x / self.side).floor() as i64
    }

    /// Colour of the cell containing `x`: true on even cells.
    fn even_cell(&self, x: [f64; 2]) -> bool {
        (self.cell(x[0]) + self.cell(x[1])).rem_euclid(2) == 0
    }
}

/// ±1 with half-open cells `[k·side, (k+1)·side)`.
pub fn chessboard_value(spec: &ChessboardSpec, x: [f64; 2]) -> f64 {
    let v = if spec.even_cell([x[0].rem_euclid(1.0), x[1].rem_euclid(1.0)]) { 1.0 } else { -1.0 };
    match spec.parity {
        Parity::Even => v,
        Parity::Odd => -v,
    }
}

/// Which chessboard set: `A = supp{1 + ϑ⁽¹⁾}` (even cells) or
/// `B = supp{1 + ϑ⁽²⁾}` (odd cells).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Selector {
    A,
    B,
}

/// The restriction `S[ε]` of a chessboard set: points of the set at distance
/// more than ε from its complement. `G` is `A[ε] ∪ B[ε]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SetDescriptor {
    pub side: f64,
    pub selector: Option<Selector>,
    pub restriction: f64,
}

impl SetDescriptor {
    pub fn a(side: f64, restriction: f64) -> Self {
        SetDescriptor { side, selector: Some(Selector::A), restriction }
    }

    pub fn b(side: f64, restriction: f64) -> Self {
        SetDescriptor { side, selector: Some(Selector::B), restriction }
    }

    /// Good set `A[ε] ∪ B[ε]`.
    pub fn good(side: f64, restriction: f64) -> Self {
        SetDescriptor { side, selector: None, restriction }
    }

    /// The whole torus (side 1/2, no restriction, both colours).
    pub fn torus() -> Self {
        SetDescriptor { side: 0.5, selector: None, restriction: 0.0 }
    }

    pub fn contains(&self, x: [f64; 2]) -> bool {
        let x = [x[0].rem_euclid(1.0), x[1].rem_euclid(1.0)];
        let board = ChessboardSpec::new(self.side, Parity::Even);
        let colour_ok = match self.selector {
            None => true,
            Some(Selector::A) => board.even_cell(x),
            Some(Selector::B) => !board.even_cell(x),
        };
        if !colour_ok {
            return false;
        }
        if self.restriction <= 0.0 {
            return true;
        }
        // Distance to the complement is the distance to the cell edges,
        // because diagonal neighbours have the same colour.
        let s = self.side;
        let d = [x[0], x[1]]
            .iter()
            .map(|&c| {
                let o = c - (c / s).floor() * s;
                o.min(s - o)
            })
            .fold(f64::INFINITY, f64::min);
        d > self.restriction
    }

    /// Area: each selected cell keeps a square of side `(side − 2ε)⁺`.
    pub fn measure(&self) -> f64 {
        let keep = (1.0 - 2.0 * self.restriction / self.side).max(0.0);
        let colours = if self.selector.is_some() { 0.5 } else { 1.0 };
        colours * keep * keep
    }
}

/// Exact area of `A[ε]` (or `B[ε]`) for rational side and restriction.
pub fn measure_exact(side: &Q, restriction: &Q, both_colours: bool) -> Q {
    let keep = qi(1) - qi(2) * restriction / side;
    let keep = if keep.is_negative() { Q::zero() } else { keep };
    let sq = &keep * &keep;
    if both_colours {
        sq
    } else {
        sq / qi(2)
    }
}

/// Area of a set restricted by a fraction `rel = ε/side`.
pub fn relative_measure(rel: f64, both_colours: bool) -> f64 {
    let keep = (1.0 - 2.0 * rel).max(0.0);
    let colours = if both_colours { 1.0 } else { 0.5 };
    colours * keep * keep
}

/// Mollified even chessboard of side `side` with mollifier length `ell`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InitialDatumSpec {
    pub side: f64,
    pub ell: f64,
}

impl InitialDatumSpec {
    /// The mollified board factorises: ϑ_in(x) = w(x₁)·w(x₂), w = W(λ·) ⋆ ψ_ℓ.
    pub fn profile(&self) -> Result<Profile1D> {
        Profile1D::chessboard(self.side, self.ell)
    }

    pub fn value(&self, x: [f64; 2]) -> Result<f64> {
        let w = self.profile()?;
        Ok(w.value(x[0]) * w.value(x[1]))
    }
}

/// Samples the datum at the cell-centred nodes `((i+½)/N, (j+½)/N)`; row `j`
/// holds `x₂ = (j+½)/N`. Requires at least four nodes per mollifier length.
pub fn sample_initial_datum(spec: &InitialDatumSpec, n: usize) -> Result<ScalarField> {
    let needed = 4.0 / spec.ell;
    if (n as f64) < needed {
        return Err(LabError::Resolution(format!(
            "grid N = {n} does not resolve the collar (needs N >= 4/ell = {needed:.0})"
        )));
    }
    let w = spec.profile()?;
    let line: Vec<f64> = (0..n).map(|j| w.value((j as f64 + 0.5) / n as f64)).collect();
    let mut data = vec![0.0; n * n];
    for (j, row) in data.chunks_mut(n).enumerate() {
        for (i, v) in row.iter_mut().enumerate() {
            *v = line[i] * line[j];
        }
    }
    ScalarField::from_values(n, data, 0.0)
}
