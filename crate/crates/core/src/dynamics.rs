//! Gaussian packets over energy eigenstates and their autocorrelation
//! `A(t) = Σ c_k² exp(−i E_k t)`.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::output::fmt_f64;
use crate::spectrum::EnergySpectrum;

/// Default relative weight below which packet coefficients are dropped.
pub const DEFAULT_CUTOFF: f64 = 1e-8;

/// Default `|A|` level for a recurrence to count.
pub const DEFAULT_THRESHOLD: f64 = 0.9;

/// Samples closer than this are treated as one plateau.
const PLATEAU_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct WavePacket {
    /// `(k, c_k)` in ascending `k`, all `c_k > 0`, `Σ c_k² = 1`.
    pub coefficients: Vec<(usize, f64)>,
    pub k0: usize,
    pub sigma: f64,
}

impl WavePacket {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Populated level indices.
    pub fn levels(&self) -> impl Iterator<Item = usize> + '_ {
        self.coefficients.iter().map(|&(k, _)| k)
    }
}

/// `c_k ∝ exp[−(k − k0)²/σ]` over `0..spectrum_size`, keeping levels whose
/// weight relative to the centre exceeds `cutoff`.
pub fn gaussian_packet(
    spectrum_size: usize,
    k0: usize,
    sigma: f64,
    cutoff: f64,
) -> Result<WavePacket> {
    if k0 >= spectrum_size {
        return Err(invalid(format!("k0 = {k0} outside 0..{spectrum_size}")));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(invalid(format!("sigma must be positive, got {sigma}")));
    }
    if !(0.0..1.0).contains(&cutoff) {
        return Err(invalid(format!("cutoff must lie in [0, 1), got {cutoff}")));
    }
    let mut coefficients: Vec<(usize, f64)> = (0..spectrum_size)
        .filter_map(|k| {
            let d = k as f64 - k0 as f64;
            let w = (-d * d / sigma).exp();
            (w > cutoff && w > 0.0).then_some((k, w))
        })
        .collect();
    if coefficients.is_empty() {
        return Err(invalid("every packet weight fell below the cutoff"));
    }
    let norm = coefficients.iter().map(|(_, c)| c * c).sum::<f64>().sqrt();
    for (_, c) in &mut coefficients {
        *c /= norm;
    }
    Ok(WavePacket {
        coefficients,
        k0,
        sigma,
    })
}

/// Uniform grid `t_i = i·dt`, `i = 0..count`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub dt: f64,
    pub count: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, count: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid(format!("dt must be positive, got {dt}")));
        }
        if count == 0 {
            return Err(invalid("time grid must be non-empty"));
        }
        Ok(Self { dt, count })
    }

    /// Grid with step `dt` covering `[0, horizon]`.
    pub fn covering(dt: f64, horizon: f64) -> Result<Self> {
        if !(horizon >= 0.0 && horizon.is_finite()) {
            return Err(invalid(format!(
                "horizon must be finite and >= 0, got {horizon}"
            )));
        }
        Self::new(dt, (horizon / dt).floor() as usize + 1)
    }

    /// `dt = T_Cl/50`, horizon `2.5·T_R`.
    pub fn for_timescales(t_cl: f64, t_r: f64) -> Result<Self> {
        if !t_cl.is_finite() || !t_r.is_finite() {
            return Err(invalid(
                "default grid needs finite T_Cl and T_R; set dt and t_max explicitly",
            ));
        }
        Self::covering(t_cl / 50.0, 2.5 * t_r)
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AutocorrelationTrace {
    pub grid: TimeGrid,
    pub values: Vec<Complex64>,
    pub modulus: Vec<f64>,
}

impl AutocorrelationTrace {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.grid.count).map(|i| self.grid.time(i))
    }

    /// Writes `t,absA,reA,imA` rows. `preamble` lines are emitted first as
    /// `# ...` comments.
    pub fn write_csv<W: Write>(&self, mut out: W, preamble: &[String]) -> std::io::Result<()> {
        for line in preamble {
            writeln!(out, "# {line}")?;
        }
        writeln!(out, "t,absA,reA,imA")?;
        for (i, (a, m)) in self.values.iter().zip(&self.modulus).enumerate() {
            writeln!(
                out,
                "{},{},{},{}",
                fmt_f64(self.grid.time(i)),
                fmt_f64(*m),
                fmt_f64(a.re),
                fmt_f64(a.im)
            )?;
        }
        Ok(())
    }
}

/// Evaluates `A(t)` on `grid`. Samples are independent and computed in
/// parallel; the result is in grid order.
pub fn autocorrelation(
    spectrum: &EnergySpectrum,
    packet: &WavePacket,
    grid: &TimeGrid,
) -> Result<AutocorrelationTrace> {
    if grid.count == 0 || !(grid.dt > 0.0) {
        return Err(invalid("time grid must be non-empty with dt > 0"));
    }
    if let Some(k) = packet.levels().find(|&k| k >= spectrum.len()) {
        return Err(invalid(format!(
            "packet populates level {k} but spectrum has {} levels",
            spectrum.len()
        )));
    }
    // Phases relative to the first populated level.
    let reference = spectrum[packet.coefficients[0].0];
    let terms: Vec<(f64, f64)> = packet
        .coefficients
        .iter()
        .map(|&(k, c)| (c * c, spectrum[k] - reference))
        .collect();

    let values: Vec<Complex64> = (0..grid.count)
        .into_par_iter()
        .map(|i| {
            let t = grid.time(i);
            let (mut re, mut im) = (0.0, 0.0);
            for &(w, e) in &terms {
                let (s, c) = (e * t).sin_cos();
                re += w * c;
                im -= w * s;
            }
            Complex64::new(re, im) * Complex64::from_polar(1.0, -reference * t)
        })
        .collect();
    let modulus = values.iter().map(|a| a.norm()).collect();
    Ok(AutocorrelationTrace {
        grid: *grid,
        values,
        modulus,
    })
}

/// A refined local maximum of `|A|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Recurrence {
    pub time: f64,
    pub modulus: f64,
}

/// Strict interior local maxima of `|A|`, refined by a parabola through the
/// three surrounding samples. Flat runs never count.
fn local_maxima(trace: &AutocorrelationTrace) -> Vec<Recurrence> {
    let m = &trace.modulus;
    let dt = trace.grid.dt;
    let mut out = Vec::new();
    for i in 1..m.len().saturating_sub(1) {
        let (a, b, c) = (m[i - 1], m[i], m[i + 1]);
        if !(b - a > PLATEAU_TOL && b - c > PLATEAU_TOL) {
            continue;
        }
        let denom = a - 2.0 * b + c;
        let (offset, peak) = if denom < 0.0 {
            let delta = 0.5 * (a - c) / denom;
            (delta, b - 0.25 * (a - c) * delta)
        } else {
            (0.0, b)
        };
        out.push(Recurrence {
            time: (i as f64 + offset) * dt,
            modulus: peak,
        });
    }
    out
}

/// Local maxima of `|A(t)|` at or above `threshold`, excluding `t = 0`.
pub fn detect_recurrences(trace: &AutocorrelationTrace, threshold: f64) -> Result<Vec<Recurrence>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(invalid(format!(
            "threshold must lie in (0, 1), got {threshold}"
        )));
    }
    Ok(local_maxima(trace)
        .into_iter()
        .filter(|r| r.modulus >= threshold)
        .collect())
}

/// Revivals: maxima of the envelope traced by the classical-period peaks of
/// `|A|`.
///
/// The envelope is the highest refined maximum in each window of
/// `1.25·classical_period`. It must first fall and then climb back by at least
/// half of its total depth `1 − min(envelope)`; the highest point of each such
/// climb is reported if it reaches `threshold`. A climb still rising at the
/// end of the trace is not reported.
pub fn detect_revivals(
    trace: &AutocorrelationTrace,
    threshold: f64,
    classical_period: f64,
) -> Result<Vec<Recurrence>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(invalid(format!(
            "threshold must lie in (0, 1), got {threshold}"
        )));
    }
    if !(classical_period > 0.0 && classical_period.is_finite()) {
        return Err(invalid(format!(
            "classical period must be positive and finite, got {classical_period}"
        )));
    }
    let width = 1.25 * classical_period;
    let mut envelope: Vec<Recurrence> = Vec::new();
    let mut current_bin = None;
    for p in local_maxima(trace) {
        let bin = (p.time / width).floor() as u64;
        if current_bin == Some(bin) {
            let last = envelope.last_mut().unwrap();
            if p.modulus > last.modulus {
                *last = p;
            }
        } else {
            envelope.push(p);
            current_bin = Some(bin);
        }
    }

    let floor = envelope
        .iter()
        .map(|p| p.modulus)
        .fold(f64::INFINITY, f64::min);
    if envelope.is_empty() || !(1.0 - floor > 1e-9) {
        return Ok(Vec::new());
    }
    let hysteresis = 0.5 * (1.0 - floor);

    let mut revivals = Vec::new();
    let mut low = 1.0f64;
    let mut hump: Option<Recurrence> = None;
    for p in envelope {
        match hump {
            None => {
                low = low.min(p.modulus);
                if p.modulus - low >= hysteresis {
                    hump = Some(p);
                }
            }
            Some(best) => {
                if p.modulus > best.modulus {
                    hump = Some(p);
                } else if best.modulus - p.modulus >= hysteresis {
                    if best.modulus >= threshold {
                        revivals.push(best);
                    }
                    hump = None;
                    low = p.modulus;
                }
            }
        }
    }
    Ok(revivals)
}
