//! Real symmetric eigenproblems.
//!
//! Dense matrices are reduced to tridiagonal form by Householder reflections;
//! tridiagonal matrices are diagonalized by the implicit-shift QL iteration.
//! In eigenvalue-only mode no transformation is accumulated.

use crate::error::{invalid, Error, Result};

/// Maximum QL sweeps spent on any one eigenvalue before giving up.
pub const MAX_SWEEPS: usize = 50;

/// Relative asymmetry accepted by [`SymDense::new`].
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(invalid("tridiagonal matrix must have dim >= 1"));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(invalid(format!(
                "offdiag has length {}, expected {}",
                offdiag.len(),
                diag.len() - 1
            )));
        }
        if diag.iter().chain(&offdiag).any(|x| !x.is_finite()) {
            return Err(invalid("tridiagonal matrix has non-finite entries"));
        }
        Ok(Self { diag, offdiag })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.offdiag[i - 1].abs();
                }
                if i + 1 < n {
                    s += self.offdiag[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> SymDense {
        let n = self.dim();
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = self.diag[i];
            if i + 1 < n {
                entries[i * n + i + 1] = self.offdiag[i];
                entries[(i + 1) * n + i] = self.offdiag[i];
            }
        }
        SymDense { dim: n, entries }
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let mut s = self.diag[i] * v[i];
            if i > 0 {
                s += self.offdiag[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                s += self.offdiag[i] * v[i + 1];
            }
            out[i] = s;
        }
    }
}

/// Dense symmetric matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SymDense {
    dim: usize,
    entries: Vec<f64>,
}

impl SymDense {
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dense matrix must have dim >= 1"));
        }
        if entries.len() != dim * dim {
            return Err(invalid(format!(
                "expected {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(invalid("dense matrix has non-finite entries"));
        }
        let scale = entries.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut max_asymmetry = 0.0f64;
        for i in 0..dim {
            for j in (i + 1)..dim {
                max_asymmetry =
                    max_asymmetry.max((entries[i * dim + j] - entries[j * dim + i]).abs());
            }
        }
        if max_asymmetry > SYMMETRY_TOL * scale {
            return Err(Error::Asymmetric { max_asymmetry });
        }
        Ok(Self { dim, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(invalid("rows must form a square matrix"));
        }
        Self::new(n, rows.concat())
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum()
    }

    pub fn norm_inf(&self) -> f64 {
        self.entries
            .chunks(self.dim)
            .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(self.entries.chunks(self.dim)) {
            *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigenSystem {
    /// Eigenvalues, ascending.
    pub values: Vec<f64>,
    /// `vectors[i]` belongs to `values[i]`.
    pub vectors: Option<Vec<Vec<f64>>>,
    /// Largest `‖Mv − λv‖∞` over all pairs when vectors were requested,
    /// otherwise the a priori bound `n·ε·‖M‖∞`.
    pub residual_bound: f64,
}

pub fn eig_sym_tridiagonal(m: &SymTridiagonal, want_vectors: bool) -> Result<EigenSystem> {
    let n = m.dim();
    let mut d = m.diag.clone();
    let mut e = m.offdiag.clone();
    e.push(0.0);
    let mut z = want_vectors.then(|| identity_rows(n));
    ql_implicit(&mut d, &mut e, z.as_mut())?;
    let sys = sorted_system(d, z);
    Ok(with_residual(sys, m.norm_inf(), |v, out| m.apply(v, out)))
}

pub fn eig_sym_dense(m: &SymDense, want_vectors: bool) -> Result<EigenSystem> {
    let n = m.dim();
    let mut a = m.entries.clone();
    let (mut d, mut e) = householder_tridiagonalize(&mut a, n, want_vectors);
    let mut z = want_vectors.then(|| transpose(&a, n));
    ql_implicit(&mut d, &mut e, z.as_mut())?;
    let sys = sorted_system(d, z);
    Ok(with_residual(sys, m.norm_inf(), |v, out| m.apply(v, out)))
}

fn identity_rows(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let mut r = vec![0.0; n];
            r[i] = 1.0;
            r
        })
        .collect()
}

fn transpose(a: &[f64], n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|j| (0..n).map(|i| a[i * n + j]).collect())
        .collect()
}

fn sorted_system(values: Vec<f64>, vectors: Option<Vec<Vec<f64>>>) -> EigenSystem {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let sorted = order.iter().map(|&i| values[i]).collect();
    let vectors = vectors.map(|mut vs| order.iter().map(|&i| std::mem::take(&mut vs[i])).collect());
    EigenSystem {
        values: sorted,
        vectors,
        residual_bound: 0.0,
    }
}

fn with_residual(
    mut sys: EigenSystem,
    norm: f64,
    apply: impl Fn(&[f64], &mut [f64]),
) -> EigenSystem {
    let n = sys.values.len();
    sys.residual_bound = match &sys.vectors {
        Some(vs) => {
            let mut mv = vec![0.0; n];
            let mut worst = 0.0f64;
            for (lambda, v) in sys.values.iter().zip(vs) {
                apply(v, &mut mv);
                for (a, b) in mv.iter().zip(v) {
                    worst = worst.max((a - lambda * b).abs());
                }
            }
            worst
        }
        None => n as f64 * f64::EPSILON * norm,
    };
    sys
}

/// Householder reduction of the row-major symmetric matrix `a` to tridiagonal
/// form. Returns `(diag, sub)` where `sub[i]` couples rows `i` and `i + 1`
/// (`sub[n-1] = 0`). With `accumulate`, `a` is overwritten by the orthogonal
/// transform whose columns map tridiagonal eigenvectors back.
fn householder_tridiagonalize(a: &mut [f64], n: usize, accumulate: bool) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let idx = |i: usize, j: usize| i * n + j;

    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[idx(i, k)].abs()).sum();
            if scale == 0.0 {
                e[i] = a[idx(i, l)];
            } else {
                for k in 0..=l {
                    a[idx(i, k)] /= scale;
                    h += a[idx(i, k)] * a[idx(i, k)];
                }
                let f = a[idx(i, l)];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[idx(i, l)] = f - g;
                let mut f = 0.0;
                for j in 0..=l {
                    if accumulate {
                        a[idx(j, i)] = a[idx(i, j)] / h;
                    }
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[idx(j, k)] * a[idx(i, k)];
                    }
                    for k in (j + 1)..=l {
                        g += a[idx(k, j)] * a[idx(i, k)];
                    }
                    e[j] = g / h;
                    f += e[j] * a[idx(i, j)];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a[idx(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[idx(j, k)] -= f * e[k] + g * a[idx(i, k)];
                    }
                }
            }
        } else {
            e[i] = a[idx(i, l)];
        }
        d[i] = h;
    }

    d[0] = 0.0;
    e[0] = 0.0;
    for i in 0..n {
        if accumulate {
            if d[i] != 0.0 {
                for j in 0..i {
                    let g: f64 = (0..i).map(|k| a[idx(i, k)] * a[idx(k, j)]).sum();
                    for k in 0..i {
                        a[idx(k, j)] -= g * a[idx(k, i)];
                    }
                }
            }
            d[i] = a[idx(i, i)];
            a[idx(i, i)] = 1.0;
            for j in 0..i {
                a[idx(j, i)] = 0.0;
                a[idx(i, j)] = 0.0;
            }
        } else {
            d[i] = a[idx(i, i)];
        }
    }

    // e[i] held the coupling between i-1 and i; shift to (i, i+1).
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    (d, e)
}

/// Implicit-shift QL on the tridiagonal `(d, e)`, `e[i]` coupling `i` and
/// `i + 1`. Rotations are applied to the rows of `z` (row `i` = vector `i`).
fn ql_implicit(d: &mut [f64], e: &mut [f64], mut z: Option<&mut Vec<Vec<f64>>>) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS {
                return Err(Error::NoConvergence {
                    index: l,
                    iterations: MAX_SWEEPS,
                });
            }

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    let (lo, hi) = z.split_at_mut(i + 1);
                    let (zi, zi1) = (&mut lo[i], &mut hi[0]);
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let f = *b;
                        *b = s * *a + c * f;
                        *a = c * *a - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
