//! Classical period, revival and super-revival times from the local Taylor
//! coefficients of a discrete spectrum.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::spectrum::EnergySpectrum;

/// Finite-difference estimates of `E'`, `E''`, `E'''` at a level index.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Derivatives {
    pub first: f64,
    pub second: f64,
    pub third: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimescaleSet {
    pub k0: usize,
    pub t_cl: f64,
    pub t_r: f64,
    pub t_sr: f64,
    pub derivatives: Derivatives,
}

impl TimescaleSet {
    pub fn from_derivatives(k0: usize, d: Derivatives) -> Self {
        Self {
            k0,
            t_cl: period(2.0, d.first),
            t_r: period(4.0, d.second),
            t_sr: period(12.0, d.third),
            derivatives: d,
        }
    }
}

/// `factor·π/|d|`, infinite for a vanishing derivative.
fn period(factor: f64, d: f64) -> f64 {
    if d == 0.0 {
        f64::INFINITY
    } else {
        factor * PI / d.abs()
    }
}

/// How `E'` is estimated for a packet centred on the ground state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlopeRule {
    /// `E_1 − E_0`, so that `T_Cl = 2π/Δ`.
    #[default]
    Gap,
    /// Slope of the parabola through the lowest three levels taken at its
    /// midpoint, `(E_2 − E_0)/2`.
    ParabolaMidpoint,
}

pub fn derivatives_at(
    spectrum: &EnergySpectrum,
    k0: usize,
    rule: SlopeRule,
) -> Result<Derivatives> {
    let n = spectrum.len();
    if n < 4 {
        return Err(invalid(format!("need at least 4 levels, spectrum has {n}")));
    }
    if k0 >= n {
        return Err(invalid(format!("k0 = {k0} outside 0..{n}")));
    }
    let e = spectrum.levels();

    let first = if k0 == 0 {
        match rule {
            SlopeRule::Gap => e[1] - e[0],
            SlopeRule::ParabolaMidpoint => (e[2] - e[0]) / 2.0,
        }
    } else if k0 == n - 1 {
        e[n - 1] - e[n - 2]
    } else {
        (e[k0 + 1] - e[k0 - 1]) / 2.0
    };

    // Parabola through three consecutive levels; its curvature is the
    // plain second difference wherever it is centred.
    let c2 = k0.clamp(1, n - 2);
    let second = e[c2 + 1] + e[c2 - 1] - 2.0 * e[c2];

    let third = if (2..=n - 3).contains(&k0) {
        (e[k0 + 2] - 2.0 * e[k0 + 1] + 2.0 * e[k0 - 1] - e[k0 - 2]) / 2.0
    } else {
        // Cubic through the four nearest levels.
        let s = k0.saturating_sub(1).min(n - 4);
        e[s + 3] - 3.0 * e[s + 2] + 3.0 * e[s + 1] - e[s]
    };

    Ok(Derivatives {
        first,
        second,
        third,
    })
}

pub fn timescales_at(spectrum: &EnergySpectrum, k0: usize) -> Result<TimescaleSet> {
    timescales_at_with(spectrum, k0, SlopeRule::Gap)
}

pub fn timescales_at_with(
    spectrum: &EnergySpectrum,
    k0: usize,
    rule: SlopeRule,
) -> Result<TimescaleSet> {
    let d = derivatives_at(spectrum, k0, rule)?;
    Ok(TimescaleSet::from_derivatives(k0, d))
}

/// Evaluates timescales at `k0 = round(x0·N)` for each system size.
pub fn timescale_ratio_vs_n<F>(
    family: F,
    x0: f64,
    sizes: &[usize],
) -> Result<Vec<(usize, TimescaleSet)>>
where
    F: Fn(usize) -> Result<EnergySpectrum>,
{
    if !(x0 > 0.0 && x0 < 0.5) {
        return Err(invalid(format!("x0 must lie in (0, 1/2), got {x0}")));
    }
    if sizes.len() < 2 {
        return Err(invalid("need at least two system sizes"));
    }
    sizes
        .iter()
        .map(|&n| {
            let k0 = (x0 * n as f64).round() as usize;
            let spectrum = family(n)?;
            Ok((n, timescales_at(&spectrum, k0)?))
        })
        .collect()
}
