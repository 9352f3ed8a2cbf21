//! Covariance-matrix algebra for zero-mean Gaussian states.
//!
//! Matrices are in shot-noise units with quadratures ordered
//! `(x1, p1, x2, p2, ...)`, so vacuum is the identity. The symplectic form
//! is block diagonal with blocks `[[0, 1], [-1, 0]]`.

use nalgebra::DMatrix;
use thiserror::Error;

/// Lowest symplectic eigenvalue accepted as rounding noise below 1.
pub const PHYSICAL_TOL: f64 = 1e-9;

/// Relative tolerance for the symmetry check.
const SYMMETRY_TOL: f64 = 1e-12;

/// Below this gap from 1, `g` is exactly zero.
const G_ZERO_GAP: f64 = 1e-12;

/// Smallest measured variance accepted by homodyne conditioning.
const MIN_MEASURED_VARIANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaussianError {
    #[error("matrix must be square with even dimension, got {rows}x{cols}")]
    Shape { rows: usize, cols: usize },
    #[error("matrix is not symmetric (max relative asymmetry {0:e})")]
    Asymmetric(f64),
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("unphysical state: symplectic eigenvalue {0} < 1")]
    Unphysical(f64),
    #[error("g(x) undefined for x = {0} < 1")]
    EntropyDomain(f64),
    #[error("mode index {index} out of range for {n_modes} modes")]
    ModeIndex { index: usize, n_modes: usize },
    #[error("beam splitter needs two distinct modes, got {0} twice")]
    SameMode(usize),
    #[error("transmissivity {0} outside [0, 1]")]
    Transmissivity(f64),
    #[error("measured quadrature variance {0:e} is degenerate")]
    Singular(f64),
    #[error("eigensolver failed to converge")]
    Eigensolver,
}

/// Which quadrature a homodyne detector reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    X,
    P,
}

impl Quadrature {
    fn offset(self) -> usize {
        match self {
            Quadrature::X => 0,
            Quadrature::P => 1,
        }
    }
}

/// Covariance matrix of an `n`-mode Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    m: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Wraps a matrix after checking shape, finiteness and symmetry.
    ///
    /// The matrix is re-symmetrised so that downstream algebra sees an
    /// exactly symmetric input.
    pub fn new(m: DMatrix<f64>) -> Result<Self, GaussianError> {
        let (rows, cols) = m.shape();
        if rows != cols || rows == 0 || rows % 2 != 0 {
            return Err(GaussianError::Shape { rows, cols });
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(GaussianError::NonFinite);
        }
        let scale = m.amax().max(1.0);
        let mut worst = 0.0f64;
        for i in 0..rows {
            for j in (i + 1)..rows {
                worst = worst.max((m[(i, j)] - m[(j, i)]).abs() / scale);
            }
        }
        if worst > SYMMETRY_TOL {
            return Err(GaussianError::Asymmetric(worst));
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(Self { m: sym })
    }

    /// Vacuum on `n` modes.
    pub fn vacuum(n_modes: usize) -> Self {
        Self {
            m: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    /// Single-mode thermal state with quadrature variance `v`.
    pub fn thermal(v: f64) -> Self {
        Self {
            m: DMatrix::from_diagonal_element(2, 2, v),
        }
    }

    /// Two-mode squeezed vacuum with variance `v` on each arm.
    pub fn tmsv(v: f64) -> Self {
        let c = (v * v - 1.0).max(0.0).sqrt();
        #[rustfmt::skip]
        let m = DMatrix::from_row_slice(4, 4, &[
            v, 0.0, c, 0.0,
            0.0, v, 0.0, -c,
            c, 0.0, v, 0.0,
            0.0, -c, 0.0, v,
        ]);
        Self { m }
    }

    pub fn n_modes(&self) -> usize {
        self.m.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    /// Tensor product: `self` occupies the first modes.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let a = self.m.nrows();
        let b = other.m.nrows();
        let mut m = DMatrix::zeros(a + b, a + b);
        m.view_mut((0, 0), (a, a)).copy_from(&self.m);
        m.view_mut((a, a), (b, b)).copy_from(&other.m);
        Self { m }
    }

    /// Reduced state on the listed modes, in the listed order.
    pub fn reduce(&self, modes: &[usize]) -> Result<Self, GaussianError> {
        let n = self.n_modes();
        for &k in modes {
            if k >= n {
                return Err(GaussianError::ModeIndex { index: k, n_modes: n });
            }
        }
        let idx: Vec<usize> = modes.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect();
        let d = idx.len();
        let m = DMatrix::from_fn(d, d, |i, j| self.m[(idx[i], idx[j])]);
        Ok(Self { m })
    }
}

/// Block-diagonal symplectic form on `n` modes.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// Entropy in bits of a thermal mode with symplectic eigenvalue `x`.
///
/// Uses `b = (x - 1) / 2` and two algebraically equal forms so that both
/// the `x -> 1` and the `x -> infinity` ends keep full precision.
pub fn g(x: f64) -> Result<f64, GaussianError> {
    if x.is_nan() || x < 1.0 - PHYSICAL_TOL {
        return Err(GaussianError::EntropyDomain(x));
    }
    let gap = x - 1.0;
    if gap < G_ZERO_GAP {
        return Ok(0.0);
    }
    let b = 0.5 * gap;
    let nats = if b < 1.0 {
        (1.0 + b) * b.ln_1p() - b * b.ln()
    } else {
        (b + 1.0) * (1.0 / b).ln_1p() + b.ln()
    };
    Ok(nats / std::f64::consts::LN_2)
}

/// Symplectic spectrum, sorted descending and clamped to at least 1.
///
/// The eigenvalues of `ΩV` come in pairs `±iΛ`. They are computed from the
/// similar matrix `V^{1/2} Ω V^{1/2}`, which is antisymmetric and therefore
/// normal, so the eigensolver error stays at `eps * |V|` instead of being
/// amplified by the non-normality of `ΩV`. Moduli are sorted and averaged
/// pairwise. Values slightly below one are treated as rounding noise.
pub fn symplectic_eigenvalues(cm: &CovarianceMatrix) -> Result<Vec<f64>, GaussianError> {
    let n = cm.n_modes();
    let omega = symplectic_form(n);
    let se = cm.matrix().clone().symmetric_eigen();
    let k = if se.eigenvalues.iter().all(|&d| d > 0.0) {
        let root = DMatrix::from_diagonal(&se.eigenvalues.map(f64::sqrt));
        let half = &se.eigenvectors * root;
        half.transpose() * omega * half
    } else {
        omega * cm.matrix()
    };
    let eig = k
        .try_schur(f64::EPSILON, 10_000)
        .ok_or(GaussianError::Eigensolver)?
        .complex_eigenvalues();
    let mut mods: Vec<f64> = eig.iter().map(|z| z.norm()).collect();
    mods.sort_by(|a, b| b.total_cmp(a));
    let band = clamp_band(cm);
    let mut out = Vec::with_capacity(n);
    for pair in mods.chunks(2) {
        let lam = 0.5 * (pair[0] + pair[1]);
        if lam < 1.0 - band {
            return Err(GaussianError::Unphysical(lam));
        }
        out.push(lam.max(1.0));
    }
    Ok(out)
}

/// Tolerance below 1 accepted for a symplectic eigenvalue of `cm`.
///
/// At least [`PHYSICAL_TOL`]; for large-variance near-pure states the
/// rounding error of the spectrum scales like `eps * |V|^2`.
pub fn clamp_band(cm: &CovarianceMatrix) -> f64 {
    let scale = cm.matrix().amax();
    PHYSICAL_TOL.max(16.0 * f64::EPSILON * scale * scale)
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(cm: &CovarianceMatrix) -> Result<f64, GaussianError> {
    symplectic_eigenvalues(cm)?
        .into_iter()
        .map(g)
        .sum::<Result<f64, _>>()
}

/// Mixes modes `a` and `b` on a beam splitter of transmissivity `eta`.
///
/// Convention: `a' = √η a + √(1-η) b` and `b' = -√(1-η) a + √η b` on both
/// quadratures. At `η = 0` this maps `a' = b`, `b' = -a`.
pub fn apply_beamsplitter(
    cm: &CovarianceMatrix,
    a: usize,
    b: usize,
    eta: f64,
) -> Result<CovarianceMatrix, GaussianError> {
    let n = cm.n_modes();
    for k in [a, b] {
        if k >= n {
            return Err(GaussianError::ModeIndex { index: k, n_modes: n });
        }
    }
    if a == b {
        return Err(GaussianError::SameMode(a));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(GaussianError::Transmissivity(eta));
    }
    let t = eta.sqrt();
    let r = (1.0 - eta).sqrt();
    let mut s = DMatrix::<f64>::identity(2 * n, 2 * n);
    for q in 0..2 {
        let (ia, ib) = (2 * a + q, 2 * b + q);
        s[(ia, ia)] = t;
        s[(ia, ib)] = r;
        s[(ib, ia)] = -r;
        s[(ib, ib)] = t;
    }
    let m = &s * cm.matrix() * s.transpose();
    Ok(CovarianceMatrix {
        m: (&m + m.transpose()) * 0.5,
    })
}

/// State of the other modes after a homodyne measurement on one quadrature
/// of `measured`.
///
/// `V_rest - c cᵀ / V_qq`, where `c` couples the measured quadrature to
/// the rest. Mode order of the remainder is preserved.
pub fn condition_on_homodyne(
    cm: &CovarianceMatrix,
    measured: usize,
    quadrature: Quadrature,
) -> Result<CovarianceMatrix, GaussianError> {
    condition_with_noise(cm, measured, quadrature, 0.0)
}

/// Homodyne conditioning where the detector adds `extra` variance to the
/// measured quadrature (trusted detector noise referred to the input).
pub fn condition_with_noise(
    cm: &CovarianceMatrix,
    measured: usize,
    quadrature: Quadrature,
    extra: f64,
) -> Result<CovarianceMatrix, GaussianError> {
    let n = cm.n_modes();
    if measured >= n {
        return Err(GaussianError::ModeIndex {
            index: measured,
            n_modes: n,
        });
    }
    let q = 2 * measured + quadrature.offset();
    let vq = cm.m[(q, q)] + extra;
    if vq.is_nan() || vq <= MIN_MEASURED_VARIANCE {
        return Err(GaussianError::Singular(vq));
    }
    let rest: Vec<usize> = (0..2 * n)
        .filter(|&i| i / 2 != measured)
        .collect();
    let d = rest.len();
    let m = DMatrix::from_fn(d, d, |i, j| {
        let (ri, rj) = (rest[i], rest[j]);
        cm.m[(ri, rj)] - cm.m[(ri, q)] * cm.m[(q, rj)] / vq
    });
    Ok(CovarianceMatrix {
        m: (&m + m.transpose()) * 0.5,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_exact_points() {
        assert_eq!(g(1.0).unwrap(), 0.0);
        assert!((g(3.0).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(g(1.0 - 5e-10).unwrap(), 0.0);
        assert!(g(0.9).is_err());
    }

    #[test]
    fn g_large_argument_keeps_precision() {
        // g(x) ~ log2(e x / 2) for large x
        let x = 1e20;
        let approx = (std::f64::consts::E * x / 2.0).log2();
        assert!((g(x).unwrap() - approx).abs() < 1e-12);
    }

    #[test]
    fn spectra_of_simple_states() {
        let vac = CovarianceMatrix::vacuum(3);
        assert_eq!(symplectic_eigenvalues(&vac).unwrap(), vec![1.0; 3]);
        let t = CovarianceMatrix::tmsv(5.0);
        for l in symplectic_eigenvalues(&t).unwrap() {
            assert!((l - 1.0).abs() < 1e-12);
        }
        let th = CovarianceMatrix::thermal(7.0);
        assert!((symplectic_eigenvalues(&th).unwrap()[0] - 7.0).abs() < 1e-12);
        assert!((von_neumann_entropy(&CovarianceMatrix::thermal(3.0)).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn beamsplitter_limits() {
        let cm = CovarianceMatrix::thermal(4.0).direct_sum(&CovarianceMatrix::thermal(2.0));
        assert_eq!(apply_beamsplitter(&cm, 0, 1, 1.0).unwrap(), cm);
        let swapped = apply_beamsplitter(&cm, 0, 1, 0.0).unwrap();
        assert_eq!(swapped.matrix()[(0, 0)], 2.0);
        assert_eq!(swapped.matrix()[(2, 2)], 4.0);
        assert!(apply_beamsplitter(&cm, 0, 0, 0.5).is_err());
        assert!(apply_beamsplitter(&cm, 0, 2, 0.5).is_err());
        assert!(apply_beamsplitter(&cm, 0, 1, 1.5).is_err());
    }

    #[test]
    fn loss_formula() {
        let v = 9.0;
        let eta = 0.3;
        let cm = CovarianceMatrix::tmsv(v).direct_sum(&CovarianceMatrix::vacuum(1));
        let out = apply_beamsplitter(&cm, 1, 2, eta).unwrap();
        assert!((out.matrix()[(2, 2)] - (eta * v + 1.0 - eta)).abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(matches!(
            CovarianceMatrix::new(DMatrix::identity(3, 3)),
            Err(GaussianError::Shape { .. })
        ));
        let mut m = DMatrix::identity(2, 2);
        m[(0, 1)] = 0.5;
        assert!(matches!(CovarianceMatrix::new(m), Err(GaussianError::Asymmetric(_))));
        let bad = CovarianceMatrix::new(DMatrix::from_diagonal_element(2, 2, 0.5)).unwrap();
        assert!(matches!(symplectic_eigenvalues(&bad), Err(GaussianError::Unphysical(_))));
    }

    #[test]
    fn conditioning_product_state_is_inert() {
        let cm = CovarianceMatrix::thermal(3.0).direct_sum(&CovarianceMatrix::thermal(5.0));
        let c = condition_on_homodyne(&cm, 0, Quadrature::X).unwrap();
        assert_eq!(c, CovarianceMatrix::thermal(5.0));
        let z = CovarianceMatrix::new(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.0, 1.0, 1.0, 1.0])));
        assert!(matches!(
            condition_on_homodyne(&z.unwrap(), 0, Quadrature::X),
            Err(GaussianError::Singular(_))
        ));
    }
}
