//! Dicke Hamiltonian `H = ω₀J_z + ω a†a + λ/√(2j) (a† + a)(J₊ + J₋)` in the
//! truncated product basis `|n, m⟩`, split by the conserved parity
//! `(−1)^(n + m + j)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::spectral::{eig_sym_dense, SymDense};
use crate::spectrum::EnergySpectrum;

/// Boson cutoffs tried by [`converge_truncation`], each compared with the next.
pub const TRUNCATION_SCHEDULE: [usize; 5] = [20, 40, 80, 160, 320];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn of(n: usize, two_m: i64, two_j: u32) -> Parity {
        // n + m + j is an integer because 2m and 2j share parity.
        let s = 2 * n as i64 + two_m + two_j as i64;
        if (s / 2) % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

impl std::str::FromStr for Parity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "even" => Ok(Parity::Even),
            "odd" => Ok(Parity::Odd),
            other => Err(invalid(format!("unknown parity {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DickeParams {
    /// Twice the collective spin length, so half-integer `j` stays exact.
    pub two_j: u32,
    pub w0: f64,
    pub w: f64,
    pub lambda: f64,
    pub n_max: usize,
    pub parity: Parity,
}

impl DickeParams {
    pub fn new(j: f64, w0: f64, w: f64, lambda: f64, n_max: usize, parity: Parity) -> Result<Self> {
        let two_j = 2.0 * j;
        if !(two_j >= 1.0 && two_j.fract() == 0.0 && two_j <= u32::MAX as f64) {
            return Err(invalid(format!(
                "j must be a positive half-integer, got {j}"
            )));
        }
        let p = Self {
            two_j: two_j as u32,
            w0,
            w,
            lambda,
            n_max,
            parity,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn j(&self) -> f64 {
        self.two_j as f64 / 2.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.two_j == 0 {
            return Err(invalid("j must be positive"));
        }
        if !(self.w0 > 0.0 && self.w0.is_finite()) || !(self.w > 0.0 && self.w.is_finite()) {
            return Err(invalid(format!(
                "w0 and w must be positive, got {} and {}",
                self.w0, self.w
            )));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(invalid(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if self.n_max < 1 {
            return Err(invalid("n_max must be >= 1"));
        }
        Ok(())
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn with_parity(mut self, parity: Parity) -> Self {
        self.parity = parity;
        self
    }
}

/// Basis state `|n, m⟩` with `m` stored as `2m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BasisState {
    pub n: usize,
    pub two_m: i64,
}

/// n-major, then m ascending; `parity = None` keeps every state.
pub fn dicke_basis(two_j: u32, n_max: usize, parity: Option<Parity>) -> Vec<BasisState> {
    let tj = two_j as i64;
    (0..=n_max)
        .flat_map(|n| {
            (-tj..=tj)
                .step_by(2)
                .map(move |two_m| BasisState { n, two_m })
        })
        .filter(|s| parity.map_or(true, |p| Parity::of(s.n, s.two_m, two_j) == p))
        .collect()
}

fn build_matrix(params: &DickeParams, basis: &[BasisState]) -> Result<SymDense> {
    let dim = basis.len();
    if dim == 0 {
        return Err(invalid("empty parity block"));
    }
    let j = params.j();
    let tj = params.two_j as i64;
    let coupling = params.lambda / (2.0 * j).sqrt();
    let m_count = (tj + 1) as usize;
    // Position of each (n, 2m) in `basis`, or usize::MAX if absent.
    let mut lookup = vec![usize::MAX; (params.n_max + 1) * m_count];
    let slot = |n: usize, two_m: i64| n * m_count + ((two_m + tj) / 2) as usize;
    for (i, s) in basis.iter().enumerate() {
        lookup[slot(s.n, s.two_m)] = i;
    }

    let mut h = vec![0.0; dim * dim];
    for (i, s) in basis.iter().enumerate() {
        let m = s.two_m as f64 / 2.0;
        h[i * dim + i] = params.w0 * m + params.w * s.n as f64;
        if coupling == 0.0 {
            continue;
        }
        for dn in [-1i64, 1] {
            let n2 = s.n as i64 + dn;
            if n2 < 0 || n2 as usize > params.n_max {
                continue;
            }
            for dm in [-2i64, 2] {
                let two_m2 = s.two_m + dm;
                if two_m2.abs() > tj {
                    continue;
                }
                let k = lookup[slot(n2 as usize, two_m2)];
                if k == usize::MAX {
                    continue;
                }
                let m2 = two_m2 as f64 / 2.0;
                let n_upper = s.n.max(n2 as usize) as f64;
                h[i * dim + k] = coupling * n_upper.sqrt() * (j * (j + 1.0) - m * m2).sqrt();
            }
        }
    }
    SymDense::new(dim, h)
}

/// Hamiltonian restricted to the parity sector `params.parity`.
pub fn build_dicke_block(params: &DickeParams) -> Result<SymDense> {
    params.validate()?;
    let basis = dicke_basis(params.two_j, params.n_max, Some(params.parity));
    build_matrix(params, &basis)
}

/// Hamiltonian on the whole truncated space, both parities interleaved.
pub fn build_dicke_full(params: &DickeParams) -> Result<SymDense> {
    params.validate()?;
    let basis = dicke_basis(params.two_j, params.n_max, None);
    build_matrix(params, &basis)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DickeSpectrum {
    pub params: DickeParams,
    pub spectrum: EnergySpectrum,
    pub truncation_converged: bool,
}

/// Spectrum at the given cutoff; `truncation_converged` is left false.
pub fn dicke_spectrum(params: &DickeParams) -> Result<DickeSpectrum> {
    let m = build_dicke_block(params)?;
    let sys = eig_sym_dense(&m, false)?;
    Ok(DickeSpectrum {
        params: *params,
        spectrum: EnergySpectrum::new(sys.values)?,
        truncation_converged: false,
    })
}

/// Runs [`converge_truncation`] first and diagonalizes at the cutoff it picks.
pub fn dicke_spectrum_converged(
    params: &DickeParams,
    retained: usize,
    tol: f64,
) -> Result<DickeSpectrum> {
    let n_max = converge_truncation(params, retained, tol)?;
    let mut s = dicke_spectrum(&params.with_n_max(n_max))?;
    s.truncation_converged = true;
    Ok(s)
}

/// Smallest cutoff in [`TRUNCATION_SCHEDULE`] whose lowest `retained` levels
/// shift by less than `tol` when the cutoff doubles.
pub fn converge_truncation(params: &DickeParams, retained: usize, tol: f64) -> Result<usize> {
    if retained < 1 {
        return Err(invalid("retained must be >= 1"));
    }
    if !(tol > 0.0) {
        return Err(invalid(format!("tol must be positive, got {tol}")));
    }
    let levels = |n_max: usize| -> Result<Vec<f64>> {
        let s = dicke_spectrum(&params.with_n_max(n_max))?;
        let l = s.spectrum.into_levels();
        if l.len() < retained {
            return Err(invalid(format!(
                "block at n_max = {n_max} has only {} levels, {retained} requested",
                l.len()
            )));
        }
        Ok(l)
    };

    let mut previous = levels(TRUNCATION_SCHEDULE[0])?;
    let mut last_deviation = f64::INFINITY;
    for pair in TRUNCATION_SCHEDULE.windows(2) {
        let next = levels(pair[1])?;
        last_deviation = previous[..retained]
            .iter()
            .zip(&next[..retained])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if last_deviation < tol {
            return Ok(pair[0]);
        }
        previous = next;
    }
    Err(Error::TruncationNotConverged {
        n_max: *TRUNCATION_SCHEDULE.last().unwrap(),
        last_deviation,
    })
}

/// Thermodynamic critical coupling `√(ω₀ω)/2`.
pub fn dicke_lambda_c(w0: f64, w: f64) -> Result<f64> {
    if !(w0 > 0.0 && w > 0.0) {
        return Err(invalid(format!(
            "w0 and w must be positive, got {w0} and {w}"
        )));
    }
    Ok((w0 * w).sqrt() / 2.0)
}

/// Lowest excitation of the whole system: ground of the odd sector minus
/// ground of the even sector.
pub fn dicke_excitation_gap(params: &DickeParams) -> Result<f64> {
    let even = dicke_spectrum(&params.with_parity(Parity::Even))?;
    let odd = dicke_spectrum(&params.with_parity(Parity::Odd))?;
    Ok(odd.spectrum.ground() - even.spectrum.ground())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(j: f64, lambda: f64, n_max: usize, parity: Parity) -> DickeParams {
        DickeParams::new(j, 1.0, 1.0, lambda, n_max, parity).unwrap()
    }

    #[test]
    fn spin_half_block() {
        let m = build_dicke_block(&params(0.5, 0.3, 1, Parity::Even)).unwrap();
        assert_eq!(m.dim(), 2);
        assert_eq!(m.get(0, 0), -0.5);
        assert_eq!(m.get(1, 1), 1.5);
        assert!((m.get(0, 1) - 0.3).abs() < 1e-15);
        assert_eq!(m.get(0, 1), m.get(1, 0));
    }

    #[test]
    fn spin_half_spectrum() {
        let s = dicke_spectrum(&params(0.5, 0.1, 1, Parity::Even)).unwrap();
        let r = 1.01f64.sqrt();
        let l = s.spectrum.levels();
        assert!((l[0] - (0.5 - r)).abs() < 1e-14);
        assert!((l[1] - (0.5 + r)).abs() < 1e-14);
        assert!(!s.truncation_converged);
    }

    #[test]
    fn uncoupled_block_is_diagonal() {
        let p = params(1.0, 0.0, 2, Parity::Even);
        let m = build_dicke_block(&p).unwrap();
        let basis = dicke_basis(2, 2, Some(Parity::Even));
        assert_eq!(m.dim(), basis.len());
        for (i, s) in basis.iter().enumerate() {
            assert_eq!(m.get(i, i), s.two_m as f64 / 2.0 + s.n as f64);
            for k in 0..m.dim() {
                if k != i {
                    assert_eq!(m.get(i, k), 0.0);
                }
            }
        }
    }

    #[test]
    fn blocks_partition_the_basis() {
        for two_j in 1..6 {
            for n_max in 1..5 {
                let even = dicke_basis(two_j, n_max, Some(Parity::Even)).len();
                let odd = dicke_basis(two_j, n_max, Some(Parity::Odd)).len();
                assert_eq!(even + odd, (n_max + 1) * (two_j as usize + 1));
                assert!(even > 0 && odd > 0);
            }
        }
    }

    #[test]
    fn hermitian_by_construction() {
        let m = build_dicke_full(&params(2.5, 0.7, 6, Parity::Even)).unwrap();
        for i in 0..m.dim() {
            for k in 0..m.dim() {
                assert_eq!(m.get(i, k), m.get(k, i));
            }
        }
    }

    #[test]
    fn lambda_c() {
        assert_eq!(dicke_lambda_c(1.0, 1.0).unwrap(), 0.5);
        assert_eq!(dicke_lambda_c(4.0, 1.0).unwrap(), 1.0);
        assert_eq!(
            dicke_lambda_c(0.3, 2.7).unwrap(),
            dicke_lambda_c(2.7, 0.3).unwrap()
        );
        assert!(dicke_lambda_c(0.0, 1.0).is_err());
    }

    #[test]
    fn truncation_trivial_cases() {
        let p = params(10.0, 0.0, 20, Parity::Even);
        assert_eq!(converge_truncation(&p, 10, 1e-8).unwrap(), 20);
        let p = params(10.0, 0.3, 20, Parity::Even);
        assert_eq!(converge_truncation(&p, 10, f64::INFINITY).unwrap(), 20);
        assert!(converge_truncation(&p, 0, 1e-8).is_err());
        assert!(converge_truncation(&p, 10, 0.0).is_err());
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(DickeParams::new(0.3, 1.0, 1.0, 0.1, 4, Parity::Even).is_err());
        assert!(DickeParams::new(0.0, 1.0, 1.0, 0.1, 4, Parity::Even).is_err());
        assert!(DickeParams::new(1.0, -1.0, 1.0, 0.1, 4, Parity::Even).is_err());
        assert!(DickeParams::new(1.0, 1.0, 1.0, -0.1, 4, Parity::Even).is_err());
        assert!(DickeParams::new(1.0, 1.0, 1.0, 0.1, 0, Parity::Even).is_err());
        assert!("sideways".parse::<Parity>().is_err());
    }
}
