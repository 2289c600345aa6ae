//! Wave-packet revival times across quantum phase transitions.
//!
//! The crate builds the zero-angular-momentum U(3) vibron Hamiltonian and the
//! parity blocks of the Dicke Hamiltonian, diagonalizes them, and derives the
//! classical period `T_Cl = 2π/|E'|`, the revival time `T_R = 4π/|E''|` and
//! the super-revival time `T_SR = 12π/|E'''|` at a chosen level. On top of
//! that sit Gaussian-packet autocorrelation traces, divergence location and
//! power-law fits across the critical point, and system-size scaling.

pub mod config;
pub mod criticality;
pub mod dicke;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod output;
pub mod spectral;
pub mod spectrum;
pub mod timescales;
pub mod vibron;

pub use criticality::{
    fit_powerlaw, fit_powerlaw_free, locate_classical_peak, locate_divergence, scaling_with_n,
    scan, semiclassical_check, Column, ControlledSpectrum, DerivativeOrder, FitWindow, K0Rule,
    ModelSpec, PowerLawFit, ScanResult, Side,
};
pub use dicke::{
    build_dicke_block, converge_truncation, dicke_lambda_c, dicke_spectrum, DickeParams,
    DickeSpectrum, Parity,
};
pub use dynamics::{
    autocorrelation, detect_recurrences, detect_revivals, gaussian_packet, TimeGrid, WavePacket,
};
pub use error::{Error, Result};
pub use spectral::{eig_sym_dense, eig_sym_tridiagonal, EigenSystem, SymDense, SymTridiagonal};
pub use spectrum::EnergySpectrum;
pub use timescales::{timescales_at, SlopeRule, TimescaleSet};
pub use vibron::{
    build_vibron, vibron_exact_times, vibron_gap_thermodynamic, vibron_spectrum, VibronParams,
};
