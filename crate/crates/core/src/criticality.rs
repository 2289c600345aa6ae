//! Parameter scans across the transition, divergence location and power-law
//! fits of the timescales.

use std::fmt;
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dicke::{converge_truncation, dicke_lambda_c, dicke_spectrum, DickeParams, Parity};
use crate::error::{invalid, Error, Result};
use crate::output::{fmt_f64, parse_f64, write_table};
use crate::spectrum::EnergySpectrum;
use crate::timescales::{derivatives_at, timescales_at_with, SlopeRule, TimescaleSet};
use crate::vibron::{vibron_spectrum, VibronParams};

/// Absolute width at which bisection and golden-section searches stop.
pub const LOCATE_TOL: f64 = 1e-9;

/// A family of spectra indexed by one control parameter.
pub trait ControlledSpectrum: Sync {
    fn spectrum_at(&self, control: f64) -> Result<EnergySpectrum>;

    fn tag(&self) -> String;
}

/// The two physical models; the control parameter is `χ` or `λ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelSpec {
    Vibron {
        n: usize,
    },
    Dicke {
        two_j: u32,
        w0: f64,
        w: f64,
        n_max: usize,
        parity: Parity,
    },
}

impl ModelSpec {
    pub fn dicke(params: &DickeParams) -> Self {
        ModelSpec::Dicke {
            two_j: params.two_j,
            w0: params.w0,
            w: params.w,
            n_max: params.n_max,
            parity: params.parity,
        }
    }

    pub fn dicke_params(&self, lambda: f64) -> Option<DickeParams> {
        match *self {
            ModelSpec::Dicke {
                two_j,
                w0,
                w,
                n_max,
                parity,
            } => Some(DickeParams {
                two_j,
                w0,
                w,
                lambda,
                n_max,
                parity,
            }),
            ModelSpec::Vibron { .. } => None,
        }
    }
}

impl ControlledSpectrum for ModelSpec {
    fn spectrum_at(&self, control: f64) -> Result<EnergySpectrum> {
        match self {
            ModelSpec::Vibron { n } => {
                Ok(vibron_spectrum(&VibronParams::new(*n, control)?)?.spectrum)
            }
            ModelSpec::Dicke { .. } => {
                let p = self.dicke_params(control).unwrap();
                p.validate()?;
                Ok(dicke_spectrum(&p)?.spectrum)
            }
        }
    }

    fn tag(&self) -> String {
        match self {
            ModelSpec::Vibron { n } => format!("vibron N={n}"),
            ModelSpec::Dicke {
                two_j,
                w0,
                w,
                n_max,
                parity,
            } => format!(
                "dicke j={} w0={w0} w={w} n_max={n_max} parity={parity:?}",
                *two_j as f64 / 2.0
            ),
        }
    }
}

/// Wraps a closure as a model, mostly for synthetic spectra.
pub struct FnModel<F> {
    pub name: String,
    pub f: F,
}

impl<F> ControlledSpectrum for FnModel<F>
where
    F: Fn(f64) -> Result<EnergySpectrum> + Sync,
{
    fn spectrum_at(&self, control: f64) -> Result<EnergySpectrum> {
        (self.f)(control)
    }

    fn tag(&self) -> String {
        self.name.clone()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub control: f64,
    pub times: TimescaleSet,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanResult {
    pub model: String,
    pub k0: usize,
    pub rows: Vec<ScanRow>,
}

impl ScanResult {
    pub fn controls(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r.control)
    }

    pub fn column(&self, column: Column) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.rows.iter().map(move |r| (r.control, column.value(r)))
    }

    pub fn write_csv<W: Write>(&self, out: W, preamble: &[String]) -> std::io::Result<()> {
        let k0 = self.k0.to_string();
        write_table(
            out,
            preamble,
            "control,k0,T_cl,T_r,T_sr,gap",
            self.rows.iter().map(|r| {
                vec![
                    fmt_f64(r.control),
                    k0.clone(),
                    fmt_f64(r.times.t_cl),
                    fmt_f64(r.times.t_r),
                    fmt_f64(r.times.t_sr),
                    fmt_f64(r.gap),
                ]
            }),
        )
    }

    /// Reads the CSV written by [`ScanResult::write_csv`]. Derivative values
    /// are not part of that format and come back as zero.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut rows = Vec::new();
        let mut k0 = 0;
        let mut saw_header = false;
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !saw_header {
                if line != "control,k0,T_cl,T_r,T_sr,gap" {
                    return Err(invalid(format!("unexpected scan header {line:?}")));
                }
                saw_header = true;
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            let bad = || invalid(format!("malformed scan row at line {}", lineno + 1));
            if cells.len() != 6 {
                return Err(bad());
            }
            let num = |i: usize| parse_f64(cells[i]).ok_or_else(bad);
            k0 = cells[1].trim().parse().map_err(|_| bad())?;
            rows.push(ScanRow {
                control: num(0)?,
                times: TimescaleSet {
                    k0,
                    t_cl: num(2)?,
                    t_r: num(3)?,
                    t_sr: num(4)?,
                    derivatives: Default::default(),
                },
                gap: num(5)?,
            });
        }
        if !saw_header {
            return Err(invalid("scan file has no header"));
        }
        check_monotone(&rows.iter().map(|r| r.control).collect::<Vec<_>>())?;
        Ok(ScanResult {
            model: "file".into(),
            k0,
            rows,
        })
    }
}

fn check_monotone(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(invalid("control grid has non-finite values"));
    }
    let up = grid.windows(2).all(|w| w[1] > w[0]);
    let down = grid.windows(2).all(|w| w[1] < w[0]);
    if !(up || down) {
        return Err(invalid("control grid must be strictly monotone"));
    }
    Ok(())
}

/// Runs `f` over `items` on a pool of `workers` threads, keeping input order.
pub(crate) fn run_pool<T, U, F>(workers: usize, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool");
    pool.install(|| items.par_iter().map(&f).collect())
}

pub fn scan<M: ControlledSpectrum + ?Sized>(
    model: &M,
    k0: usize,
    grid: &[f64],
    workers: usize,
) -> Result<ScanResult> {
    scan_with(model, k0, grid, workers, SlopeRule::Gap)
}

/// Diagonalizes at every grid point and records timescales at `k0` and the
/// gap `E_1 − E_0`. Rows come back in grid order for any worker count.
pub fn scan_with<M: ControlledSpectrum + ?Sized>(
    model: &M,
    k0: usize,
    grid: &[f64],
    workers: usize,
    rule: SlopeRule,
) -> Result<ScanResult> {
    if grid.is_empty() {
        return Err(invalid("control grid is empty"));
    }
    check_monotone(grid)?;
    let results = run_pool(workers, grid, |&control| -> Result<ScanRow> {
        let s = model.spectrum_at(control)?;
        let times = timescales_at_with(&s, k0, rule)?;
        let gap = s
            .gap()
            .ok_or_else(|| invalid("spectrum has a single level"))?;
        Ok(ScanRow {
            control,
            times,
            gap,
        })
    });
    let rows = results
        .into_iter()
        .zip(grid)
        .map(|(r, &control)| {
            r.map_err(|e| Error::ScanPoint {
                control,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanResult {
        model: model.tag(),
        k0,
        rows,
    })
}

/// Which spectral derivative is tracked through zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DerivativeOrder {
    /// `E''`, whose zero is a divergence of `T_R`.
    Second,
    /// `E'''`, whose zero is a divergence of `T_SR`.
    Third,
}

/// Bisection for a sign change of `f` on `[lo, hi]`, stopping once the
/// bracket is narrower than `tol`.
pub fn bisect(mut f: impl FnMut(f64) -> Result<f64>, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(lo < hi) {
        return Err(invalid(format!("degenerate bracket ({lo}, {hi})")));
    }
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a)?;
    let fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::NoSignChange {
            lo,
            hi,
            sign_lo: fa.signum(),
            sign_hi: fb.signum(),
        });
    }
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Golden-section search for the minimum of a unimodal `f` on `[lo, hi]`.
pub fn golden_min(
    mut f: impl FnMut(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(invalid(format!("degenerate bracket ({lo}, {hi})")));
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
        if c >= d {
            break;
        }
    }
    Ok(0.5 * (a + b))
}

/// Control value inside `bracket` where the chosen derivative at `k0`
/// changes sign, i.e. where `T_R` (or `T_SR`) diverges.
pub fn locate_divergence<M: ControlledSpectrum + ?Sized>(
    model: &M,
    k0: usize,
    bracket: (f64, f64),
    order: DerivativeOrder,
) -> Result<f64> {
    bisect(
        |c| {
            let d = derivatives_at(&model.spectrum_at(c)?, k0, SlopeRule::Gap)?;
            Ok(match order {
                DerivativeOrder::Second => d.second,
                DerivativeOrder::Third => d.third,
            })
        },
        bracket.0,
        bracket.1,
        LOCATE_TOL,
    )
}

/// Adjacent scan points between which the chosen derivative changes sign.
pub fn sign_change_brackets(scan: &ScanResult, order: DerivativeOrder) -> Vec<(f64, f64)> {
    let value = |r: &ScanRow| match order {
        DerivativeOrder::Second => r.times.derivatives.second,
        DerivativeOrder::Third => r.times.derivatives.third,
    };
    scan.rows
        .windows(2)
        .filter(|w| value(&w[0]) * value(&w[1]) <= 0.0 && value(&w[0]) != value(&w[1]))
        .map(|w| (w[0].control, w[1].control))
        .collect()
}

/// Ascending grid `xc ± d` for `per_side` log-spaced offsets `d` in
/// `[min_offset, max_offset]`.
pub fn log_offset_grid(
    xc: f64,
    min_offset: f64,
    max_offset: f64,
    per_side: usize,
) -> Result<Vec<f64>> {
    if !(min_offset > 0.0 && min_offset < max_offset && max_offset.is_finite()) || per_side < 2 {
        return Err(invalid(
            "offsets need 0 < min < max and at least two per side",
        ));
    }
    let (a, b) = (min_offset.ln(), max_offset.ln());
    let offsets: Vec<f64> = (0..per_side)
        .map(|i| (a + (b - a) * i as f64 / (per_side - 1) as f64).exp())
        .collect();
    let mut grid: Vec<f64> = offsets.iter().rev().map(|d| xc - d).collect();
    grid.extend(offsets.iter().map(|d| xc + d));
    Ok(grid)
}

/// Control value inside `bracket` where `T_Cl` at `k0` is largest.
pub fn locate_classical_peak<M: ControlledSpectrum + ?Sized>(
    model: &M,
    k0: usize,
    bracket: (f64, f64),
    rule: SlopeRule,
) -> Result<f64> {
    golden_min(
        |c| {
            Ok(derivatives_at(&model.spectrum_at(c)?, k0, rule)?
                .first
                .abs())
        },
        bracket.0,
        bracket.1,
        LOCATE_TOL,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Column {
    #[serde(rename = "T_cl")]
    TCl,
    #[serde(rename = "T_r")]
    TR,
    #[serde(rename = "T_sr")]
    TSr,
    Gap,
}

impl Column {
    pub fn value(self, row: &ScanRow) -> f64 {
        match self {
            Column::TCl => row.times.t_cl,
            Column::TR => row.times.t_r,
            Column::TSr => row.times.t_sr,
            Column::Gap => row.gap,
        }
    }

    pub fn of_times(self, t: &TimescaleSet, gap: f64) -> f64 {
        match self {
            Column::TCl => t.t_cl,
            Column::TR => t.t_r,
            Column::TSr => t.t_sr,
            Column::Gap => gap,
        }
    }
}

impl std::str::FromStr for Column {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "T_cl" | "t_cl" | "tcl" => Ok(Column::TCl),
            "T_r" | "t_r" | "tr" => Ok(Column::TR),
            "T_sr" | "t_sr" | "tsr" => Ok(Column::TSr),
            "gap" => Ok(Column::Gap),
            other => Err(invalid(format!("unknown column {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Below,
    Above,
    Both,
}

impl Side {
    fn parts(self) -> &'static [Side] {
        match self {
            Side::Below => &[Side::Below],
            Side::Above => &[Side::Above],
            Side::Both => &[Side::Below, Side::Above],
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "below" => Ok(Side::Below),
            "above" => Ok(Side::Above),
            "both" => Ok(Side::Both),
            other => Err(invalid(format!("unknown side {other:?}"))),
        }
    }
}

/// Which scan points enter a fit.
#[derive(Clone, Copy, Debug)]
pub struct FitWindow {
    /// Points closest to `xc` that are dropped.
    pub exclude_nearest: usize,
    /// Largest `|x − xc|` kept.
    pub max_distance: f64,
    /// Smooth factor divided out of the ordinate before fitting.
    pub regular: Option<fn(f64) -> f64>,
}

impl Default for FitWindow {
    fn default() -> Self {
        Self {
            exclude_nearest: 3,
            max_distance: 0.1,
            regular: None,
        }
    }
}

/// Minimum number of points in a divergence fit.
pub const MIN_FIT_POINTS: usize = 5;

/// `T ≈ amplitude · |x − xc|^exponent`, fitted as a line in log–log space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub xc: f64,
    pub exponent: f64,
    pub amplitude: f64,
    pub r2: f64,
    pub side: Side,
    /// Smallest and largest `|x − xc|` used.
    pub window: (f64, f64),
    pub n_points: usize,
}

impl PowerLawFit {
    /// One-line JSON record with the fields
    /// `xc, exponent, amplitude, r2, side, window, n_points`.
    pub fn to_record(&self) -> String {
        serde_json::to_string(self).expect("fit record serializes")
    }

    pub fn from_record(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| invalid(format!("bad fit record: {e}")))
    }

    pub fn predict(&self, x: f64) -> f64 {
        self.amplitude * (x - self.xc).abs().powf(self.exponent)
    }
}

impl fmt::Display for PowerLawFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?}: exponent {:.6} amplitude {:.6e} xc {:.10} r2 {:.8} ({} points)",
            self.side, self.exponent, self.amplitude, self.xc, self.r2, self.n_points
        )
    }
}

struct LineFit {
    slope: f64,
    intercept: f64,
    /// `SSR/SST`, i.e. `1 − r²`.
    unexplained: f64,
}

fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let unexplained = if syy > 0.0 { (ssr / syy).min(1.0) } else { 0.0 };
    LineFit {
        slope,
        intercept,
        unexplained,
    }
}

/// Log–log fit of `(|x − xc|, y)` pairs, all positive. `xc` and `side` are
/// only recorded in the result.
pub fn fit_loglog(points: &[(f64, f64)], xc: f64, side: Side) -> Result<PowerLawFit> {
    if points.len() < 2 {
        return Err(Error::InsufficientPoints {
            needed: 2,
            found: points.len(),
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let line = fit_line(&xs, &ys);
    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(0.0, f64::max);
    Ok(PowerLawFit {
        xc,
        exponent: line.slope,
        amplitude: line.intercept.exp(),
        r2: 1.0 - line.unexplained,
        side,
        window: (lo, hi),
        n_points: points.len(),
    })
}

fn side_points(
    scan: &ScanResult,
    column: Column,
    xc: f64,
    side: Side,
    window: &FitWindow,
) -> Result<Vec<(f64, f64)>> {
    let mut pts: Vec<(f64, f64)> = scan
        .rows
        .iter()
        .filter_map(|r| {
            let x = r.control;
            let on_side = match side {
                Side::Below => x < xc,
                Side::Above => x > xc,
                Side::Both => x != xc,
            };
            let dist = (x - xc).abs();
            let mut y = column.value(r);
            if let Some(g) = window.regular {
                y /= g(x);
            }
            (on_side && dist <= window.max_distance && y.is_finite() && y > 0.0)
                .then_some((dist, y))
        })
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let kept: Vec<(f64, f64)> = pts.into_iter().skip(window.exclude_nearest).collect();
    if kept.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientPoints {
            needed: MIN_FIT_POINTS,
            found: kept.len(),
        });
    }
    Ok(kept)
}

/// Fits `column ~ |x − xc|^p` on one or both sides of a known `xc`.
/// `Side::Both` yields the below fit followed by the above fit.
pub fn fit_powerlaw(
    scan: &ScanResult,
    column: Column,
    xc: f64,
    side: Side,
    window: &FitWindow,
) -> Result<Vec<PowerLawFit>> {
    side.parts()
        .iter()
        .map(|&s| fit_loglog(&side_points(scan, column, xc, s, window)?, xc, s))
        .collect()
}

/// As [`fit_powerlaw`], with `xc` chosen inside `bracket` to maximize the
/// log–log `r²` (averaged over sides for `Side::Both`).
pub fn fit_powerlaw_free(
    scan: &ScanResult,
    column: Column,
    side: Side,
    bracket: (f64, f64),
    window: &FitWindow,
) -> Result<Vec<PowerLawFit>> {
    let (lo, hi) = bracket;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(invalid(format!("degenerate bracket ({lo}, {hi})")));
    }
    let badness = |xc: f64| -> Result<f64> {
        let mut total = 0.0;
        for &s in side.parts() {
            match side_points(scan, column, xc, s, window) {
                Ok(pts) => {
                    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
                    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
                    total += fit_line(&xs, &ys).unexplained;
                }
                Err(Error::InsufficientPoints { .. }) => total += 1.0,
                Err(e) => return Err(e),
            }
        }
        Ok(total)
    };
    let tol = 1e-12 * (hi - lo).max(lo.abs().max(hi.abs()));
    let xc = golden_min(badness, lo, hi, tol)?;
    fit_powerlaw(scan, column, xc, side, window)
}

/// How the packet centre follows the system size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum K0Rule {
    Fixed(usize),
    /// `k0 = round(x0·N)`.
    Fraction(f64),
}

impl K0Rule {
    pub fn k0(self, n: usize) -> usize {
        match self {
            K0Rule::Fixed(k) => k,
            K0Rule::Fraction(x0) => (x0 * n as f64).round() as usize,
        }
    }
}

/// Minimum number of sizes in an N-scaling fit.
pub const MIN_SIZES: usize = 3;

/// Log–log fit of a timescale (or the gap) against system size at a fixed
/// control value. `family` maps `N` to the spectrum.
pub fn scaling_with_n<F>(
    family: F,
    k0_rule: K0Rule,
    sizes: &[usize],
    column: Column,
) -> Result<PowerLawFit>
where
    F: Fn(usize) -> Result<EnergySpectrum>,
{
    if sizes.len() < MIN_SIZES {
        return Err(Error::InsufficientPoints {
            needed: MIN_SIZES,
            found: sizes.len(),
        });
    }
    let mut points = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let s = family(n)?;
        let t = timescales_at_with(&s, k0_rule.k0(n), SlopeRule::Gap)?;
        let gap = s
            .gap()
            .ok_or_else(|| invalid("spectrum has a single level"))?;
        let y = column.of_times(&t, gap);
        if !(y.is_finite() && y > 0.0) {
            return Err(invalid(format!(
                "{column:?} is {y} at N = {n}; cannot take its log"
            )));
        }
        points.push((n as f64, y));
    }
    fit_loglog(&points, 0.0, Side::Above)
}

/// Fits `log(E_k/N − χ_c)` against `log k` over `k_window` (inclusive).
pub fn semiclassical_fit(
    levels: &[f64],
    n: usize,
    chi_c: f64,
    k_window: (usize, usize),
) -> Result<PowerLawFit> {
    let (lo, hi) = k_window;
    if lo == 0 || lo > hi || hi >= levels.len() {
        return Err(invalid(format!(
            "k window ({lo}, {hi}) must lie within 1..={}",
            levels.len().saturating_sub(1)
        )));
    }
    let nf = n as f64;
    let points: Vec<(f64, f64)> = (lo..=hi)
        .map(|k| (k as f64, levels[k] / nf - chi_c))
        .collect();
    let bad: Vec<usize> = (lo..=hi)
        .zip(&points)
        .filter(|(_, p)| !(p.1 > 0.0))
        .map(|(k, _)| k)
        .collect();
    if !bad.is_empty() {
        return Err(Error::NonPositiveOrdinate(bad));
    }
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientPoints {
            needed: MIN_FIT_POINTS,
            found: points.len(),
        });
    }
    fit_loglog(&points, 0.0, Side::Above)
}

/// Semiclassical check of the vibron spectrum at `χ = 0.2`.
pub fn semiclassical_check(n: usize, k_window: (usize, usize)) -> Result<PowerLawFit> {
    let chi_c = crate::vibron::CHI_CRITICAL;
    let s = vibron_spectrum(&VibronParams::new(n, chi_c)?)?;
    semiclassical_fit(s.spectrum.levels(), n, chi_c, k_window)
}

/// Converged boson cutoff for a Dicke scan: [`converge_truncation`] at the
/// grid point closest to `λ_c`.
pub fn dicke_scan_truncation(
    base: &DickeParams,
    grid: &[f64],
    retained: usize,
    tol: f64,
) -> Result<usize> {
    let lc = dicke_lambda_c(base.w0, base.w)?;
    let worst = grid
        .iter()
        .copied()
        .min_by(|a, b| (a - lc).abs().total_cmp(&(b - lc).abs()))
        .ok_or_else(|| invalid("control grid is empty"))?;
    converge_truncation(&base.with_lambda(worst), retained, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic_scan(xs: &[f64], f: impl Fn(f64) -> f64) -> ScanResult {
        ScanResult {
            model: "synthetic".into(),
            k0: 0,
            rows: xs
                .iter()
                .map(|&x| ScanRow {
                    control: x,
                    times: TimescaleSet {
                        k0: 0,
                        t_cl: f(x),
                        t_r: f(x),
                        t_sr: f(x),
                        derivatives: Default::default(),
                    },
                    gap: f(x),
                })
                .collect(),
        }
    }

    #[test]
    fn linear_root() {
        let model = FnModel {
            name: "linear".into(),
            f: |c: f64| EnergySpectrum::from_fn(6, |k| 0.5 * (c - 0.3) * (k * k) as f64 + k as f64),
        };
        let root = locate_divergence(&model, 0, (0.0, 1.0), DerivativeOrder::Second).unwrap();
        assert!((root - 0.3).abs() <= LOCATE_TOL);
    }

    #[test]
    fn no_sign_change_is_rejected() {
        let err = bisect(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-9).unwrap_err();
        assert!(
            matches!(err, Error::NoSignChange { sign_lo, sign_hi, .. } if sign_lo == 1.0 && sign_hi == 1.0)
        );
    }

    #[test]
    fn exact_power_law() {
        let xs: Vec<f64> = (1..=13).map(|i| 0.2 + 0.001 * 1.5f64.powi(i)).collect();
        let scan = synthetic_scan(&xs, |x| 1.0 / (x - 0.2f64).abs());
        let fits =
            fit_powerlaw(&scan, Column::TR, 0.2, Side::Above, &FitWindow::default()).unwrap();
        assert_eq!(fits.len(), 1);
        assert!((fits[0].exponent + 1.0).abs() < 1e-10);
        assert!((fits[0].r2 - 1.0).abs() < 1e-10);
        assert_eq!(fits[0].n_points, 8);
    }

    #[test]
    fn too_few_points() {
        let xs: Vec<f64> = (1..=7).map(|i| 0.2 + 0.01 * i as f64).collect();
        let scan = synthetic_scan(&xs, |x| 1.0 / (x - 0.2));
        let err =
            fit_powerlaw(&scan, Column::TR, 0.2, Side::Above, &FitWindow::default()).unwrap_err();
        assert!(matches!(err, Error::InsufficientPoints { found: 4, .. }));
        assert!(fit_powerlaw(&scan, Column::TR, 0.2, Side::Below, &FitWindow::default()).is_err());
    }

    #[test]
    fn free_fit_finds_xc() {
        let xs: Vec<f64> = (0..40).map(|i| 0.32 + 0.007 * i as f64).collect();
        let scan = synthetic_scan(&xs, |x| 2.0 * (x - 0.31f64).abs().powf(-0.5));
        let window = FitWindow {
            exclude_nearest: 0,
            max_distance: 1.0,
            regular: None,
        };
        let fit =
            fit_powerlaw_free(&scan, Column::TCl, Side::Above, (0.25, 0.318), &window).unwrap();
        assert!((fit[0].xc - 0.31).abs() < 1e-4, "{}", fit[0]);
        assert!((fit[0].exponent + 0.5).abs() < 1e-3);
        assert!(fit_powerlaw_free(&scan, Column::TCl, Side::Above, (0.3, 0.3), &window).is_err());
    }

    #[test]
    fn record_round_trip() {
        let fit = PowerLawFit {
            xc: 0.205907074,
            exponent: -1.0,
            amplitude: 0.3,
            r2: 0.999,
            side: Side::Below,
            window: (1e-5, 1e-3),
            n_points: 9,
        };
        let rec = fit.to_record();
        assert!(rec.contains("\"side\":\"below\""));
        assert_eq!(PowerLawFit::from_record(&rec).unwrap(), fit);
    }

    #[test]
    fn synthetic_semiclassical_slope() {
        let n = 4000;
        let levels: Vec<f64> = (0..2001)
            .map(|k| n as f64 * (0.2 + (k as f64 / n as f64).powf(4.0 / 3.0)))
            .collect();
        let fit = semiclassical_fit(&levels, n, 0.2, (10, 1000)).unwrap();
        assert!((fit.exponent - 4.0 / 3.0).abs() < 1e-9);
        let mut bent = levels.clone();
        bent[3] = 0.1 * n as f64;
        assert!(matches!(
            semiclassical_fit(&bent, n, 0.2, (2, 10)),
            Err(Error::NonPositiveOrdinate(ks)) if ks == vec![3]
        ));
        assert!(semiclassical_fit(&levels, n, 0.2, (0, 10)).is_err());
    }

    #[test]
    fn scan_rejects_non_monotone_grid() {
        let model = ModelSpec::Vibron { n: 20 };
        assert!(scan(&model, 0, &[0.1, 0.3, 0.2], 1).is_err());
        assert!(scan(&model, 0, &[0.1, 0.1], 1).is_err());
        assert!(scan(&model, 0, &[], 1).is_err());
    }

    #[test]
    fn scan_error_names_the_point() {
        let model = ModelSpec::Vibron { n: 20 };
        let err = scan(&model, 0, &[0.5, 1.5], 2).unwrap_err();
        assert!(matches!(err, Error::ScanPoint { control, .. } if control == 1.5));
    }

    #[test]
    fn scan_csv_round_trip() {
        let model = ModelSpec::Vibron { n: 40 };
        let s = scan(&model, 0, &[0.0, 0.5, 1.0], 1).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf, &["test".into()]).unwrap();
        let back = ScanResult::read_csv(&buf[..]).unwrap();
        assert_eq!(back.rows.len(), 3);
        for (a, b) in s.rows.iter().zip(&back.rows) {
            assert_eq!(a.control, b.control);
            assert_eq!(a.times.t_cl, b.times.t_cl);
            assert_eq!(a.times.t_r, b.times.t_r);
            assert_eq!(a.gap, b.gap);
        }
    }
}
