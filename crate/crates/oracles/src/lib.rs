//! Reference computations used to check the engine from the outside.
//!
//! Nothing here calls into `satqkd-core`: each routine recomputes a quantity
//! by a different route (explicit photon-number sums, full symplectic
//! propagation, pseudo-inverses, Monte Carlo) so that agreement is evidence
//! rather than repetition.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Poisson};

/// Thermal-state entropy in bits from the photon-number distribution.
///
/// The state with mean photon number `nbar = (x - 1) / 2` has
/// `p_n = nbar^n / (1 + nbar)^(n + 1)`; the sum is truncated at `n_max`.
pub fn thermal_entropy_fock(x: f64, n_max: usize) -> f64 {
    let nbar = 0.5 * (x - 1.0);
    let q = nbar / (1.0 + nbar);
    let mut p = 1.0 / (1.0 + nbar);
    let mut s = 0.0;
    for _ in 0..=n_max {
        if p > 0.0 {
            s -= p * p.log2();
        }
        p *= q;
    }
    s
}

/// Symmetric beam-splitter symplectic on `n` modes, convention
/// `a' = √η a + √(1-η) b`, `b' = -√(1-η) a + √η b`.
pub fn beamsplitter_matrix(n: usize, a: usize, b: usize, eta: f64) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * n, 2 * n);
    let (t, r) = (eta.sqrt(), (1.0 - eta).sqrt());
    for q in 0..2 {
        let (i, j) = (2 * a + q, 2 * b + q);
        s[(i, i)] = t;
        s[(i, j)] = r;
        s[(j, i)] = -r;
        s[(j, j)] = t;
    }
    s
}

fn place_tmsv(m: &mut DMatrix<f64>, a: usize, b: usize, v: f64) {
    let c = (v * v - 1.0).max(0.0).sqrt();
    for q in 0..2 {
        let sign = if q == 0 { 1.0 } else { -1.0 };
        m[(2 * a + q, 2 * a + q)] = v;
        m[(2 * b + q, 2 * b + q)] = v;
        m[(2 * a + q, 2 * b + q)] = sign * c;
        m[(2 * b + q, 2 * a + q)] = sign * c;
    }
}

/// Parameters of the bypass network.
#[derive(Debug, Clone, Copy)]
pub struct Network {
    pub v: f64,
    pub eta_ae: f64,
    pub eta_e: f64,
    pub v_e: f64,
    pub eta_s: f64,
    pub eta_t: f64,
    pub v_s: f64,
}

/// Propagates the full six-mode state through the bypass network and
/// returns the `A, B, E, E'` block.
///
/// Modes: 0 `A`, 1 `B`, 2 `E`, 3 `E'`, 4 bypass `F0`, 5 bypass noise `F1`.
/// Order of operations: Eve's collection splitter on (`F0`, `B`), the cloner
/// on (`B`, `E'`), the bypass loss on (`F0`, `F1`) and the telescope on
/// (`B`, `F0`).
pub fn propagate_network(p: &Network) -> DMatrix<f64> {
    let n = 6;
    let mut m = DMatrix::identity(2 * n, 2 * n);
    place_tmsv(&mut m, 0, 1, p.v);
    place_tmsv(&mut m, 2, 3, p.v_e);
    m[(10, 10)] = p.v_s;
    m[(11, 11)] = p.v_s;
    for (a, b, eta) in [
        (4, 1, p.eta_ae),
        (1, 3, p.eta_e),
        (4, 5, p.eta_s),
        (1, 4, p.eta_t),
    ] {
        let s = beamsplitter_matrix(n, a, b, eta);
        m = &s * m * s.transpose();
    }
    m.view((0, 0), (8, 8)).into_owned()
}

/// Symplectic eigenvalues of a two-mode matrix from its invariants,
/// `Λ² = (Δ ± sqrt(Δ² - 4 det V)) / 2`, larger first.
pub fn two_mode_spectrum(m: &DMatrix<f64>) -> [f64; 2] {
    let a = m.view((0, 0), (2, 2)).determinant();
    let b = m.view((2, 2), (2, 2)).determinant();
    let c = m.view((0, 2), (2, 2)).determinant();
    let delta = a + b + 2.0 * c;
    let det = m.determinant();
    let root = (delta * delta - 4.0 * det).max(0.0).sqrt();
    [
        (0.5 * (delta + root)).max(0.0).sqrt(),
        (0.5 * (delta - root)).max(0.0).sqrt(),
    ]
}

/// Single-mode symplectic eigenvalue, `sqrt(det V)`.
pub fn one_mode_spectrum(m: &DMatrix<f64>) -> f64 {
    m.determinant().max(0.0).sqrt()
}

/// Thermal entropy with the textbook formula, clamped at the vacuum.
pub fn g_plain(x: f64) -> f64 {
    if x <= 1.0 + 1e-12 {
        return 0.0;
    }
    let a = 0.5 * (x + 1.0);
    let b = 0.5 * (x - 1.0);
    a * a.log2() - b * b.log2()
}

/// Conditions the rows/columns `keep` on a homodyne reading of quadrature
/// index `q` via the Moore-Penrose pseudo-inverse of `Π V_q Π`.
pub fn pinv_condition(m: &DMatrix<f64>, keep: &[usize], measured: [usize; 2], q: usize) -> DMatrix<f64> {
    let k = keep.len();
    let va = DMatrix::from_fn(k, k, |i, j| m[(keep[i], keep[j])]);
    let vb = DMatrix::from_fn(2, 2, |i, j| m[(measured[i], measured[j])]);
    let c = DMatrix::from_fn(k, 2, |i, j| m[(keep[i], measured[j])]);
    let mut pi = DMatrix::zeros(2, 2);
    pi[(q, q)] = 1.0;
    let inner = (&pi * vb * &pi).pseudo_inverse(1e-300).expect("pseudo-inverse");
    &va - &c * inner * c.transpose()
}

/// Unrestricted pure-loss reverse-reconciliation Holevo bound from the
/// two-mode Alice-Bob matrix, using that Eve purifies the state.
pub fn rr_holevo_purification(v: f64, t: f64) -> f64 {
    let c = t.sqrt() * (v * v - 1.0).sqrt();
    let vb = t * (v - 1.0) + 1.0;
    let mut ab = DMatrix::zeros(4, 4);
    ab[(0, 0)] = v;
    ab[(1, 1)] = v;
    ab[(2, 2)] = vb;
    ab[(3, 3)] = vb;
    ab[(0, 2)] = c;
    ab[(2, 0)] = c;
    ab[(1, 3)] = -c;
    ab[(3, 1)] = -c;
    let [l1, l2] = two_mode_spectrum(&ab);
    let a_given_b = pinv_condition(&ab, &[0, 1], [2, 3], 0);
    let l3 = one_mode_spectrum(&a_given_b);
    g_plain(l1) + g_plain(l2) - g_plain(l3)
}

/// Poisson photon-number source split towards Eve: probability that `i`
/// photons are emitted and `j` of them enter Eve's aperture.
pub fn poisson_split(mu: f64, eta_ae: f64, i: u32, j: u32) -> f64 {
    if j > i {
        return 0.0;
    }
    let mut log_fact_i = 0.0;
    for k in 2..=i {
        log_fact_i += (k as f64).ln();
    }
    let emit = (-mu + i as f64 * mu.ln() - log_fact_i).exp();
    let mut binom = 1.0;
    for k in 0..j {
        binom *= (i - k) as f64 / (k + 1) as f64;
    }
    emit * binom * eta_ae.powi(j as i32) * (1.0 - eta_ae).powi((i - j) as i32)
}

/// Tallies from a Monte Carlo run of the weak-coherent-pulse link.
#[derive(Debug, Clone, Copy, Default)]
pub struct McTally {
    pub pulses: u64,
    pub clicks: u64,
    pub errors: u64,
    /// Clicks with no photon in Eve's aperture.
    pub clicks_m0: u64,
    /// Clicks with exactly one photon emitted, and it entered Eve's aperture.
    pub clicks_n1m1: u64,
}

impl McTally {
    fn merge(mut self, o: McTally) -> Self {
        self.pulses += o.pulses;
        self.clicks += o.clicks;
        self.errors += o.errors;
        self.clicks_m0 += o.clicks_m0;
        self.clicks_n1m1 += o.clicks_n1m1;
        self
    }

    /// Fraction and its binomial standard error.
    pub fn rate(&self, count: u64) -> (f64, f64) {
        let n = self.pulses as f64;
        let p = count as f64 / n;
        (p, (p * (1.0 - p) / n).sqrt())
    }
}

/// Link parameters for the Monte Carlo run.
#[derive(Debug, Clone, Copy)]
pub struct McLink {
    pub mu: f64,
    /// Overall detection probability per photon (channel times detector).
    pub eta: f64,
    pub eta_ae: f64,
    pub p_dc: f64,
    pub e_d: f64,
    /// Exactly one photon per pulse instead of a Poisson number with mean `mu`.
    pub single_photon: bool,
}

/// Pulse-by-pulse simulation in `chunks` independently seeded blocks.
///
/// Each photon independently enters Eve's aperture with `eta_ae` and is
/// detected with `eta`. Each of two detectors fires a dark count with
/// `p_dc`. A click caused by a photon is in error with `e_d`; a dark-only
/// click is in error with probability one half.
pub fn simulate_link(link: &McLink, pulses: u64, chunks: u64, seed: u64) -> McTally {
    let per = pulses / chunks;
    let mut total = McTally::default();
    for c in 0..chunks {
        let mut rng = ChaCha20Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(c));
        let poisson = Poisson::new(link.mu).expect("mu > 0");
        let mut t = McTally {
            pulses: per,
            ..McTally::default()
        };
        for _ in 0..per {
            let n: u64 = if link.single_photon {
                1
            } else {
                poisson.sample(&mut rng) as u64
            };
            let mut m = 0u64;
            let mut k = 0u64;
            for _ in 0..n {
                if rng.random::<f64>() < link.eta_ae {
                    m += 1;
                }
                if rng.random::<f64>() < link.eta {
                    k += 1;
                }
            }
            let dark = rng.random::<f64>() < link.p_dc;
            let dark2 = rng.random::<f64>() < link.p_dc;
            let click = k > 0 || dark || dark2;
            if !click {
                continue;
            }
            t.clicks += 1;
            let p_err = if k > 0 { link.e_d } else { 0.5 };
            if rng.random::<f64>() < p_err {
                t.errors += 1;
            }
            if m == 0 {
                t.clicks_m0 += 1;
            }
            if n == 1 && m == 1 {
                t.clicks_n1m1 += 1;
            }
        }
        total = total.merge(t);
    }
    total
}

/// Closed-form expectations for the Monte Carlo tallies, derived
/// independently from the per-photon model in [`simulate_link`].
pub fn link_expectations(link: &McLink) -> (f64, f64, f64, f64) {
    let quiet = (1.0 - link.p_dc).powi(2);
    if link.single_photon {
        let q = 1.0 - quiet * (1.0 - link.eta);
        let eq = link.e_d * link.eta + 0.5 * (q - link.eta);
        let s0 = (1.0 - link.eta_ae) * q;
        let s11 = link.eta_ae * q;
        return (q, eq, s0, s11);
    }
    let ps = 1.0 - (-link.mu * link.eta).exp();
    let q = 1.0 - quiet * (1.0 - ps);
    let eq = link.e_d * ps + 0.5 * (q - ps);
    let s0 = (-link.mu * link.eta_ae).exp()
        - quiet * (-link.mu * (1.0 - (1.0 - link.eta_ae) * (1.0 - link.eta))).exp();
    let s11 = link.mu * (-link.mu).exp() * link.eta_ae * (1.0 - quiet * (1.0 - link.eta));
    (q, eq, s0, s11)
}
