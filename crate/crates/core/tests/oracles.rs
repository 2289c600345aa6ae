//! Independent reference implementations checked against the library.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use revivals::criticality::{locate_divergence, DerivativeOrder, ModelSpec};
use revivals::dicke::{build_dicke_full, converge_truncation, dicke_spectrum, DickeParams, Parity};
use revivals::dynamics::{autocorrelation, gaussian_packet, TimeGrid};
use revivals::spectral::{eig_sym_dense, eig_sym_tridiagonal, SymDense, SymTridiagonal};
use revivals::timescales::timescales_at;
use revivals::vibron::{vibron_exact_spectrum, vibron_spectrum, VibronParams};
use revivals::EnergySpectrum;

/// Cyclic Jacobi rotations on a dense row-major matrix; sorted eigenvalues.
fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut d: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    d.sort_by(f64::total_cmp);
    d
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let m = b[0].len();
    let mut c = vec![vec![0.0; m]; n];
    for i in 0..n {
        for k in 0..b.len() {
            if a[i][k] == 0.0 {
                continue;
            }
            for j in 0..m {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

fn add(a: &[Vec<f64>], b: &[Vec<f64>], sb: f64) -> Vec<Vec<f64>> {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + sb * y).collect())
        .collect()
}

fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..a[0].len())
        .map(|j| a.iter().map(|r| r[j]).collect())
        .collect()
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let x = rng.gen_range(-1.0..1.0);
            a[i][j] = x;
            a[j][i] = x;
        }
    }
    a
}

#[test]
fn dense_solver_matches_jacobi() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [1, 2, 3, 5, 8, 13, 21] {
        let a = random_symmetric(&mut rng, n);
        let ours = eig_sym_dense(&SymDense::from_rows(&a).unwrap(), false)
            .unwrap()
            .values;
        let reference = jacobi_eigenvalues(a);
        for (x, y) in ours.iter().zip(&reference) {
            assert!((x - y).abs() < 1e-11, "n={n}: {x} vs {y}");
        }
    }
}

#[test]
fn tridiagonal_solver_matches_jacobi() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [2, 4, 9, 30] {
        let d: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let e: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = d[i];
            if i + 1 < n {
                a[i][i + 1] = e[i];
                a[i + 1][i] = e[i];
            }
        }
        let ours = eig_sym_tridiagonal(&SymTridiagonal::new(d, e).unwrap(), false)
            .unwrap()
            .values;
        let reference = jacobi_eigenvalues(a);
        for (x, y) in ours.iter().zip(&reference) {
            assert!((x - y).abs() < 1e-11, "n={n}: {x} vs {y}");
        }
    }
}

/// Three-mode Fock space `|n_σ, n_+, n_−⟩` with fixed total `N`.
struct Fock3 {
    states: Vec<[usize; 3]>,
}

impl Fock3 {
    fn new(total: usize) -> Self {
        let mut states = Vec::new();
        for a in 0..=total {
            for b in 0..=total - a {
                states.push([total - a - b, a, b]);
            }
        }
        Self { states }
    }

    fn index(&self, s: [usize; 3]) -> usize {
        self.states.iter().position(|&x| x == s).unwrap()
    }

    /// Matrix of `b_to† b_from`.
    fn hop(&self, to: usize, from: usize) -> Vec<Vec<f64>> {
        let d = self.states.len();
        let mut m = vec![vec![0.0; d]; d];
        for (i, s) in self.states.iter().enumerate() {
            if s[from] == 0 {
                continue;
            }
            let mut t = *s;
            let mut amp = (t[from] as f64).sqrt();
            t[from] -= 1;
            amp *= (t[to] as f64 + 1.0).sqrt();
            t[to] += 1;
            m[self.index(t)][i] += amp;
        }
        m
    }
}

/// Vibron Hamiltonian built from boson operators, restricted to `l = 0`.
fn vibron_from_bosons(total: usize, chi: f64) -> Vec<f64> {
    let f = Fock3::new(total);
    let d = f.states.len();
    let (sg, tp, tm) = (0, 1, 2);
    let r2 = 2f64.sqrt();
    // D+ = √2 (τ+† σ − σ† τ−), D− = √2 (−τ−† σ + σ† τ+)
    let d_plus = add(&f.hop(tp, sg), &f.hop(sg, tm), -1.0)
        .iter()
        .map(|r| r.iter().map(|x| r2 * x).collect())
        .collect::<Vec<Vec<f64>>>();
    let d_minus = transpose(&d_plus);
    let l: Vec<f64> = f.states.iter().map(|s| s[1] as f64 - s[2] as f64).collect();
    let n: Vec<f64> = f.states.iter().map(|s| (s[1] + s[2]) as f64).collect();
    let mut w2 = add(&matmul(&d_plus, &d_minus), &matmul(&d_minus, &d_plus), 1.0);
    for i in 0..d {
        for j in 0..d {
            w2[i][j] *= 0.5;
        }
        w2[i][i] += l[i] * l[i];
    }
    let keep: Vec<usize> = (0..d).filter(|&i| l[i] == 0.0).collect();
    let nt = total as f64;
    let h: Vec<Vec<f64>> = keep
        .iter()
        .map(|&i| {
            keep.iter()
                .map(|&j| {
                    let diag = if i == j {
                        (1.0 - chi) * n[i] + chi / (nt - 1.0) * nt * (nt + 1.0)
                    } else {
                        0.0
                    };
                    diag - chi / (nt - 1.0) * w2[i][j]
                })
                .collect()
        })
        .collect();
    jacobi_eigenvalues(h)
}

#[test]
fn vibron_matches_boson_construction() {
    for total in [2, 3, 4, 7, 10] {
        for chi in [0.0, 0.1, 0.2, 0.35, 0.8, 1.0] {
            let ours = vibron_spectrum(&VibronParams::new(total, chi).unwrap())
                .unwrap()
                .spectrum;
            let reference = vibron_from_bosons(total, chi);
            assert_eq!(ours.len(), reference.len());
            for (x, y) in ours.levels().iter().zip(&reference) {
                assert!((x - y).abs() < 1e-10, "N={total} chi={chi}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn vibron_limits_match_closed_forms() {
    for total in [2, 5, 100] {
        for chi in [0.0, 1.0] {
            let p = VibronParams::new(total, chi).unwrap();
            let exact = vibron_exact_spectrum(&p).unwrap();
            let ours = vibron_spectrum(&p).unwrap().spectrum;
            for (x, y) in ours.levels().iter().zip(&exact) {
                assert!((x - y).abs() <= 1e-10 * y.abs().max(1.0));
            }
        }
    }
}

/// Full Dicke Hamiltonian as `ω0 Jz ⊗ 1 + ω 1 ⊗ a†a + λ/√(2j) (J+ + J−) ⊗ (a† + a)`.
fn dicke_from_operators(two_j: usize, n_max: usize, w0: f64, w: f64, lambda: f64) -> Vec<f64> {
    let j = two_j as f64 / 2.0;
    let ms = two_j + 1;
    let nb = n_max + 1;
    let mut jx2 = vec![vec![0.0; ms]; ms];
    for a in 0..ms - 1 {
        let m = -j + a as f64;
        let v = (j * (j + 1.0) - m * (m + 1.0)).sqrt();
        jx2[a + 1][a] = v;
        jx2[a][a + 1] = v;
    }
    let mut x = vec![vec![0.0; nb]; nb];
    for n in 0..n_max {
        let v = ((n + 1) as f64).sqrt();
        x[n + 1][n] = v;
        x[n][n + 1] = v;
    }
    let dim = ms * nb;
    let c = lambda / (2.0 * j).sqrt();
    let mut h = vec![vec![0.0; dim]; dim];
    for a in 0..ms {
        for n in 0..nb {
            let i = a * nb + n;
            h[i][i] = w0 * (-j + a as f64) + w * n as f64;
            for b in 0..ms {
                for k in 0..nb {
                    h[i][b * nb + k] += c * jx2[a][b] * x[n][k];
                }
            }
        }
    }
    jacobi_eigenvalues(h)
}

#[test]
fn dicke_matches_operator_construction() {
    for two_j in 1..=4 {
        for n_max in [1, 4, 8] {
            for lambda in [0.0, 0.3, 0.9] {
                let p = DickeParams::new(two_j as f64 / 2.0, 1.0, 0.7, lambda, n_max, Parity::Even)
                    .unwrap();
                let mut ours: Vec<f64> = [Parity::Even, Parity::Odd]
                    .into_iter()
                    .flat_map(|par| {
                        dicke_spectrum(&p.with_parity(par))
                            .unwrap()
                            .spectrum
                            .into_levels()
                    })
                    .collect();
                ours.sort_by(f64::total_cmp);
                let reference = dicke_from_operators(two_j, n_max, 1.0, 0.7, lambda);
                assert_eq!(ours.len(), reference.len());
                for (x, y) in ours.iter().zip(&reference) {
                    assert!(
                        (x - y).abs() < 1e-9,
                        "2j={two_j} n_max={n_max} λ={lambda}: {x} vs {y}"
                    );
                }
            }
        }
    }
}

#[test]
fn dicke_blocks_cover_full_space() {
    for two_j in 1..=4u32 {
        for n_max in 1..=10 {
            let p =
                DickeParams::new(two_j as f64 / 2.0, 1.0, 1.0, 0.6, n_max, Parity::Even).unwrap();
            let mut union: Vec<f64> = [Parity::Even, Parity::Odd]
                .into_iter()
                .flat_map(|par| {
                    dicke_spectrum(&p.with_parity(par))
                        .unwrap()
                        .spectrum
                        .into_levels()
                })
                .collect();
            union.sort_by(f64::total_cmp);
            let full = eig_sym_dense(&build_dicke_full(&p).unwrap(), false)
                .unwrap()
                .values;
            assert_eq!(union.len(), full.len());
            for (x, y) in union.iter().zip(&full) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn dicke_ground_state_lies_in_even_sector() {
    let p = DickeParams::new(10.0, 1.0, 1.0, 0.3, 20, Parity::Even).unwrap();
    let full = eig_sym_dense(&build_dicke_full(&p).unwrap(), false)
        .unwrap()
        .values;
    let even = dicke_spectrum(&p).unwrap().spectrum;
    let odd = dicke_spectrum(&p.with_parity(Parity::Odd))
        .unwrap()
        .spectrum;
    assert!((full[0] - even.ground()).abs() < 1e-9);
    assert!((full[1] - odd.ground()).abs() < 1e-9);
    assert!(odd.ground() > even.ground());
}

#[test]
fn autocorrelation_matches_direct_sum() {
    let levels: Vec<f64> = (0..40)
        .map(|k| 1.3 * k as f64 - 0.011 * (k * k) as f64 + 0.0002 * (k * k * k) as f64)
        .collect();
    let s = EnergySpectrum::new(levels.clone()).unwrap();
    let packet = gaussian_packet(s.len(), 12, 3.0, 1e-12).unwrap();
    let grid = TimeGrid::new(0.37, 500).unwrap();
    let trace = autocorrelation(&s, &packet, &grid).unwrap();
    for i in [0, 1, 17, 250, 499] {
        let t = grid.time(i);
        let direct: Complex64 = packet
            .coefficients
            .iter()
            .map(|&(k, c)| c * c * Complex64::from_polar(1.0, -levels[k] * t))
            .sum();
        assert!((trace.values[i] - direct).norm() < 1e-10, "t={t}");
    }
}

#[test]
fn finite_differences_by_hand() {
    let s = EnergySpectrum::new(vec![0.0, 1.0, 1.5, 2.5, 4.5, 7.0, 10.0]).unwrap();
    let t = timescales_at(&s, 3).unwrap();
    let first = (4.5 - 1.5) / 2.0;
    let second = 4.5 - 2.0 * 2.5 + 1.5;
    let third = (7.0 - 2.0 * 4.5 + 2.0 * 1.5 - 1.0) / 2.0;
    assert!((t.derivatives.first - first).abs() < 1e-15);
    assert!((t.derivatives.second - second).abs() < 1e-15);
    assert!((t.derivatives.third - third).abs() < 1e-15);
    let g = timescales_at(&s, 0).unwrap();
    assert_eq!(g.derivatives.first, 1.0);
    assert_eq!(g.derivatives.second, 1.5 - 2.0 + 0.0);
    assert_eq!(g.derivatives.third, 2.5 - 3.0 * 1.5 + 3.0 * 1.0 - 0.0);
}

#[test]
fn frozen_truncation_choice() {
    let p = DickeParams::new(10.0, 1.0, 1.0, 0.49, 1, Parity::Even).unwrap();
    assert_eq!(converge_truncation(&p, 10, 1e-8).unwrap(), FROZEN_N_MAX);
}

#[test]
fn frozen_small_vibron_divergence() {
    let x = locate_divergence(
        &ModelSpec::Vibron { n: 10 },
        0,
        (0.15, 0.45),
        DerivativeOrder::Second,
    )
    .unwrap();
    assert!((x - FROZEN_N10_ROOT).abs() < 2e-9, "{x}");
}

const FROZEN_N_MAX: usize = 40;
const FROZEN_N10_ROOT: f64 = 0.338585848454386;
