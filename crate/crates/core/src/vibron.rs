//! Zero-angular-momentum sector of the U(3) vibron Hamiltonian
//! `H = (1 − χ) n + χ/(N − 1) · P`, with `P = N(N + 1) − W²` the pairing
//! operator, written in the U(2) basis `|n, l = 0⟩` (only even `n`).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::spectral::{eig_sym_tridiagonal, SymTridiagonal};
use crate::spectrum::EnergySpectrum;
use crate::timescales::{Derivatives, TimescaleSet};

/// Location of the quantum phase transition in the thermodynamic limit.
pub const CHI_CRITICAL: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VibronParams {
    /// Total number of bound states.
    pub n: usize,
    pub chi: f64,
}

impl VibronParams {
    pub fn new(n: usize, chi: f64) -> Result<Self> {
        let p = Self { n, chi };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(invalid(format!("vibron N must be >= 2, got {}", self.n)));
        }
        if !(0.0..=1.0).contains(&self.chi) {
            return Err(invalid(format!("chi must lie in [0, 1], got {}", self.chi)));
        }
        Ok(())
    }

    /// Number of `l = 0` states, `floor(N/2) + 1`.
    pub fn dim(&self) -> usize {
        self.n / 2 + 1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VibronSpectrum {
    pub params: VibronParams,
    pub spectrum: EnergySpectrum,
}

/// Diagonal `⟨n, 0|W²|n, 0⟩`.
fn w2_diagonal(n_total: f64, n: f64) -> f64 {
    (n_total - n) * (n + 2.0) + (n_total - n + 1.0) * n
}

/// `⟨n + 2, 0|W²|n, 0⟩` from the raising rule.
pub(crate) fn w2_raise(n_total: f64, n: f64) -> f64 {
    -((n_total - n) * (n_total - n - 1.0) * (n + 2.0) * (n + 2.0)).sqrt()
}

/// `⟨n − 2, 0|W²|n, 0⟩` from the lowering rule.
#[cfg(test)]
fn w2_lower(n_total: f64, n: f64) -> f64 {
    -((n_total - n + 2.0) * (n_total - n + 1.0) * n * n).sqrt()
}

pub fn build_vibron(params: &VibronParams) -> Result<SymTridiagonal> {
    params.validate()?;
    let nt = params.n as f64;
    let chi = params.chi;
    let pair = chi / (nt - 1.0);
    let dim = params.dim();
    let diag = (0..dim)
        .map(|i| {
            let n = 2.0 * i as f64;
            (1.0 - chi) * n + pair * (nt * (nt + 1.0) - w2_diagonal(nt, n))
        })
        .collect();
    let offdiag = (0..dim - 1)
        .map(|i| -pair * w2_raise(nt, 2.0 * i as f64))
        .collect();
    SymTridiagonal::new(diag, offdiag)
}

pub fn vibron_spectrum(params: &VibronParams) -> Result<VibronSpectrum> {
    let m = build_vibron(params)?;
    let sys = eig_sym_tridiagonal(&m, false)?;
    Ok(VibronSpectrum {
        params: *params,
        spectrum: EnergySpectrum::new(sys.values)?,
    })
}

/// Closed-form spectra of the two dynamical-symmetry limits, indexed by
/// ascending level. `None` for `0 < χ < 1`.
pub fn vibron_exact_spectrum(params: &VibronParams) -> Option<Vec<f64>> {
    let nt = params.n as f64;
    let dim = params.dim();
    if params.chi == 0.0 {
        Some((0..dim).map(|k| 2.0 * k as f64).collect())
    } else if params.chi == 1.0 {
        Some(
            (0..dim)
                .map(|k| {
                    let k = k as f64;
                    4.0 / (nt - 1.0) * ((nt + 0.5) * k - k * k)
                })
                .collect(),
        )
    } else {
        None
    }
}

/// Thermodynamic-limit gap `√((5χ − 1)(1 + 3χ))` of the bent phase.
pub fn vibron_gap_thermodynamic(chi: f64) -> Result<f64> {
    if chi.is_nan() || chi <= CHI_CRITICAL {
        return Err(invalid(format!(
            "gap formula holds only for chi > 0.2, got {chi}"
        )));
    }
    Ok(((5.0 * chi - 1.0) * (1.0 + 3.0 * chi)).sqrt())
}

/// The analytic factor `√(1 + 3χ)` that multiplies the singular
/// `√(5χ − 1)` in [`vibron_gap_thermodynamic`].
pub fn vibron_gap_regular_factor(chi: f64) -> f64 {
    (1.0 + 3.0 * chi).sqrt()
}

/// Exact timescales in the `χ = 0` and `χ = 1` limits.
///
/// At `χ = 1` and `k0 > 0` this is `T_Cl = (N − 1)π/(2N + 1 − 4k0)`; for a
/// ground-state packet the classical period is taken from the exact gap
/// `E_1 − E_0 = 4(N − ½)/(N − 1)`, matching [`crate::timescales::timescales_at`].
pub fn vibron_exact_times(params: &VibronParams, k0: usize) -> Result<TimescaleSet> {
    params.validate()?;
    if k0 >= params.dim() {
        return Err(invalid(format!("k0 = {k0} outside 0..{}", params.dim())));
    }
    let nt = params.n as f64;
    let kf = k0 as f64;
    let derivs = if params.chi == 0.0 {
        Derivatives {
            first: 2.0,
            second: 0.0,
            third: 0.0,
        }
    } else if params.chi == 1.0 {
        let first = if k0 == 0 {
            4.0 * (nt - 0.5) / (nt - 1.0)
        } else {
            4.0 * (nt + 0.5 - 2.0 * kf) / (nt - 1.0)
        };
        Derivatives {
            first,
            second: -8.0 / (nt - 1.0),
            third: 0.0,
        }
    } else {
        return Err(invalid(format!(
            "no closed form for chi = {} (only 0 or 1)",
            params.chi
        )));
    };
    let mut set = TimescaleSet::from_derivatives(k0, derivs);
    // Keep the textbook forms bit-exact rather than going through 2π/|E'|.
    if params.chi == 0.0 {
        set.t_cl = PI;
    } else {
        set.t_r = (nt - 1.0) * PI / 2.0;
        if k0 > 0 {
            set.t_cl = (nt - 1.0) * PI / (2.0 * nt + 1.0 - 4.0 * kf);
        }
    }
    Ok(set)
}
