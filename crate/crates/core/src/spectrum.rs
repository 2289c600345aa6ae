use crate::error::{invalid, Result};

/// Ascending eigenvalues of one symmetry sector; the level index `k` is the
/// position in this list.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergySpectrum {
    levels: Vec<f64>,
}

impl EnergySpectrum {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(invalid("spectrum must contain at least one level"));
        }
        if levels.iter().any(|e| !e.is_finite()) {
            return Err(invalid("spectrum contains non-finite levels"));
        }
        if levels.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid("spectrum levels must be ascending"));
        }
        Ok(Self { levels })
    }

    /// Builds a spectrum from `f(k)` for `k = 0..len`, sorting the result.
    pub fn from_fn(len: usize, f: impl Fn(usize) -> f64) -> Result<Self> {
        let mut levels: Vec<f64> = (0..len).map(f).collect();
        levels.sort_by(f64::total_cmp);
        Self::new(levels)
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn ground(&self) -> f64 {
        self.levels[0]
    }

    /// `E_1 − E_0`, or `None` for a single level.
    pub fn gap(&self) -> Option<f64> {
        (self.levels.len() > 1).then(|| self.levels[1] - self.levels[0])
    }

    pub fn into_levels(self) -> Vec<f64> {
        self.levels
    }
}

impl std::ops::Index<usize> for EnergySpectrum {
    type Output = f64;

    fn index(&self, k: usize) -> &f64 {
        &self.levels[k]
    }
}
