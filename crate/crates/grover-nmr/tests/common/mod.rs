//! Shared test support: a naive dense-matrix oracle independent of the
//! library's linear-algebra path, frozen reference matrices, and a seeded
//! random-instance generator.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type NMat = Vec<Vec<Complex64>>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn expi(phi: f64) -> Complex64 {
    Complex64::new(phi.cos(), phi.sin())
}

/// Seed for randomized sweeps, overridable through GROVER_GEN_SEED.
pub fn sweep_seed() -> u64 {
    std::env::var("GROVER_GEN_SEED")
        .ok()
        .and_then(|text| text.parse().ok())
        .unwrap_or(0x5EED_CAFE)
}

pub fn seeded_rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(sweep_seed())
}

// ---------------------------------------------------------------------------
// Naive matrix arithmetic (triple loops on Vec<Vec<_>>, no ndarray)
// ---------------------------------------------------------------------------

pub fn nidentity(dim: usize) -> NMat {
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) })
                .collect()
        })
        .collect()
}

pub fn nmul(a: &NMat, b: &NMat) -> NMat {
    let n = a.len();
    let mut out = vec![vec![c(0.0, 0.0); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = c(0.0, 0.0);
            for k in 0..n {
                acc += a[i][k] * b[k][j];
            }
            out[i][j] = acc;
        }
    }
    out
}

pub fn ndagger(a: &NMat) -> NMat {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| a[j][i].conj()).collect())
        .collect()
}

pub fn nmatvec(a: &NMat, v: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(m, x)| m * x).sum())
        .collect()
}

pub fn nscale(a: &NMat, factor: Complex64) -> NMat {
    a.iter()
        .map(|row| row.iter().map(|z| z * factor).collect())
        .collect()
}

pub fn nmax_abs_diff(a: &NMat, b: &NMat) -> f64 {
    let mut worst: f64 = 0.0;
    for (ra, rb) in a.iter().zip(b) {
        for (x, y) in ra.iter().zip(rb) {
            worst = worst.max((x - y).norm());
        }
    }
    worst
}

// ---------------------------------------------------------------------------
// Naive generalized-search oracle
// ---------------------------------------------------------------------------

/// One naive search step: `|v⟩ -> -U I_s^β U† I_t^γ |v⟩`, built from first
/// principles with the naive arithmetic above.
pub struct NaiveSearch {
    step: NMat,
    pub initial: Vec<Complex64>,
}

impl NaiveSearch {
    pub fn new(u: &NMat, s: usize, marked: &[usize], beta: f64, gamma: f64) -> Self {
        let dim = u.len();
        let mut oracle = nidentity(dim);
        for &m in marked {
            oracle[m][m] = expi(gamma);
        }
        let mut reflection = nidentity(dim);
        reflection[s][s] = expi(beta);
        let g = nscale(&nmul(&nmul(u, &reflection), &ndagger(u)), c(-1.0, 0.0));
        let step = nmul(&g, &oracle);
        let initial = (0..dim).map(|i| u[i][s]).collect();
        Self { step, initial }
    }

    pub fn advance(&self, v: &[Complex64]) -> Vec<Complex64> {
        nmatvec(&self.step, v)
    }

    pub fn state_after(&self, n: u32) -> Vec<Complex64> {
        let mut v = self.initial.clone();
        for _ in 0..n {
            v = self.advance(&v);
        }
        v
    }
}

// ---------------------------------------------------------------------------
// Random instances
// ---------------------------------------------------------------------------

/// A Haar-ish random unitary composed of random two-level complex rotations.
pub fn random_unitary(dim: usize, rng: &mut ChaCha8Rng) -> NMat {
    let mut u = nidentity(dim);
    let tau = std::f64::consts::TAU;
    for _ in 0..(4 * dim * dim) {
        let p = rng.random_range(0..dim);
        let mut q = rng.random_range(0..dim);
        while q == p {
            q = rng.random_range(0..dim);
        }
        let theta: f64 = rng.random_range(0.0..tau);
        let phi: f64 = rng.random_range(0.0..tau);
        let (s, cs) = theta.sin_cos();
        let g = expi(phi) * s;
        // Left-multiply a rotation in the (p, q) plane.
        for j in 0..dim {
            let up = u[p][j];
            let uq = u[q][j];
            u[p][j] = cs * up + g * uq;
            u[q][j] = -g.conj() * up + cs * uq;
        }
    }
    // A layer of random diagonal phases for full coverage.
    for (i, row) in u.iter_mut().enumerate() {
        let _ = i;
        let phase = expi(rng.random_range(0.0..tau));
        for z in row.iter_mut() {
            *z *= phase;
        }
    }
    u
}

/// Random unitary whose column `s` has every entry above `floor`.
pub fn random_unitary_with_usable_column(
    dim: usize,
    s: usize,
    floor: f64,
    rng: &mut ChaCha8Rng,
) -> NMat {
    loop {
        let u = random_unitary(dim, rng);
        if (0..dim).all(|i| u[i][s].norm() > floor) {
            return u;
        }
    }
}

/// Random nonempty proper subset of `0..dim`.
pub fn random_marked(dim: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    loop {
        let members: Vec<usize> = (0..dim).filter(|_| rng.random_range(0..2) == 1).collect();
        if !members.is_empty() && members.len() < dim {
            return members;
        }
    }
}

// ---------------------------------------------------------------------------
// Frozen reference matrices (real entries in units of 1/4)
// ---------------------------------------------------------------------------

pub fn quarters(signs: [[f64; 4]; 4]) -> NMat {
    signs
        .iter()
        .map(|row| row.iter().map(|v| c(v / 4.0, 0.0)).collect())
        .collect()
}

/// Post-readout matrices of the four synthesized states under [π/2]_y on
/// spin 2.
pub fn readout_matrix(case_index: usize) -> NMat {
    let signs = match case_index {
        1 => [
            [0.0, -1.0, 1.0, 1.0],
            [-1.0, 0.0, -1.0, -1.0],
            [1.0, -1.0, 0.0, 1.0],
            [1.0, -1.0, 1.0, 0.0],
        ],
        2 => [
            [0.0, -1.0, -1.0, -1.0],
            [-1.0, 0.0, 1.0, 1.0],
            [-1.0, 1.0, 0.0, 1.0],
            [-1.0, 1.0, 1.0, 0.0],
        ],
        3 => [
            [0.0, 1.0, 1.0, -1.0],
            [1.0, 0.0, 1.0, -1.0],
            [1.0, 1.0, 0.0, -1.0],
            [-1.0, -1.0, -1.0, 0.0],
        ],
        4 => [
            [0.0, 1.0, -1.0, 1.0],
            [1.0, 0.0, -1.0, 1.0],
            [-1.0, -1.0, 0.0, -1.0],
            [1.0, 1.0, -1.0, 0.0],
        ],
        other => panic!("no readout matrix for case {other}"),
    };
    quarters(signs)
}

/// Post-readout matrices of the pseudo-pure reference experiments
/// ([π/2]_y on spin 1, then on spin 2).
pub fn reference_readout_matrix(nucleus_index: usize) -> NMat {
    let signs = match nucleus_index {
        1 => [
            [1.0, 0.0, -2.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
            [-2.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
        ],
        2 => [
            [1.0, -2.0, 0.0, 0.0],
            [-2.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, -1.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
        ],
        other => panic!("no reference matrix for nucleus {other}"),
    };
    quarters(signs)
}

/// The pseudo-pure deviation matrix diag(3, -1, -1, -1)/4.
pub fn pseudo_pure_matrix() -> NMat {
    quarters([
        [3.0, 0.0, 0.0, 0.0],
        [0.0, -1.0, 0.0, 0.0],
        [0.0, 0.0, -1.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
    ])
}
