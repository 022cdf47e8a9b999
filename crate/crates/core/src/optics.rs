//! Two-photon linear optics.
//!
//! Conventions: a [`ModeUnitary`] maps input creation operators onto output
//! ones, `a_i = Σ_j U_ij b_j`, so a single photon entering mode `i` leaves
//! mode `j` with amplitude `U_ij`. Under this convention the element that
//! acts first sits on the left of the matrix product.
//!
//! Partial distinguishability is a convex mixture of a fully
//! indistinguishable pair (weight λ) and a fully distinguishable pair
//! (weight 1 − λ), with `λ = 2(1 − ε)/(2 − ε)`. This reproduces exactly the
//! statistics of one photon whose polarization is rotated by a half-wave
//! plate in front of polarization-blind detectors.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance for `U†U = I`, entrywise.
pub const UNITARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ModeUnitary {
    matrix: DMatrix<Complex64>,
}

impl ModeUnitary {
    /// Validates dimension and unitarity.
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch(matrix.nrows(), matrix.ncols()));
        }
        if matrix.nrows() < 2 {
            return Err(Error::TooFewModes(matrix.nrows()));
        }
        let deviation = unitarity_deviation(&matrix);
        if !(deviation <= UNITARY_TOL) {
            return Err(Error::NotUnitary(deviation));
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::TooFewModes(dim));
        }
        Ok(Self {
            matrix: DMatrix::identity(dim, dim),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    #[inline]
    pub fn entry(&self, input: usize, output: usize) -> Complex64 {
        self.matrix[(input, output)]
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    /// Largest entry of `|U†U − I|`.
    pub fn unitarity_deviation(&self) -> f64 {
        unitarity_deviation(&self.matrix)
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        check_mode(mode, self.dim())
    }
}

fn unitarity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let product = m.adjoint() * m;
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            let d = (product[(i, j)] - Complex64::new(target, 0.0)).norm();
            // NaN entries must surface as a failure, so no `max` here.
            if !(d <= worst) {
                worst = d;
            }
        }
    }
    worst
}

fn check_mode(mode: usize, dim: usize) -> Result<()> {
    if mode >= dim {
        Err(Error::ModeOutOfRange { index: mode, dim })
    } else {
        Ok(())
    }
}

/// Real symmetric coupler acting on modes `(i, j)`:
/// `[[√r, √(1−r)], [√(1−r), −√r]]` in the `(i, j)` ordering, identity
/// elsewhere. The orientation matters: swapping `i` and `j` moves the minus
/// sign to the other mode.
pub fn directional_coupler(
    reflectivity: f64,
    modes: (usize, usize),
    dim: usize,
) -> Result<ModeUnitary> {
    if !(0.0..=1.0).contains(&reflectivity) {
        return Err(Error::InvalidReflectivity(reflectivity));
    }
    let (i, j) = modes;
    if dim < 2 {
        return Err(Error::TooFewModes(dim));
    }
    check_mode(i, dim)?;
    check_mode(j, dim)?;
    if i == j {
        return Err(Error::SameModes(i));
    }
    let r = reflectivity.sqrt();
    let t = (1.0 - reflectivity).sqrt();
    let mut m = DMatrix::identity(dim, dim);
    m[(i, i)] = Complex64::new(r, 0.0);
    m[(i, j)] = Complex64::new(t, 0.0);
    m[(j, i)] = Complex64::new(t, 0.0);
    m[(j, j)] = Complex64::new(-r, 0.0);
    Ok(ModeUnitary { matrix: m })
}

pub fn phase_shifter(phase: f64, mode: usize, dim: usize) -> Result<ModeUnitary> {
    if !phase.is_finite() {
        return Err(Error::NonFinite("phase"));
    }
    if dim < 2 {
        return Err(Error::TooFewModes(dim));
    }
    check_mode(mode, dim)?;
    let mut m = DMatrix::identity(dim, dim);
    m[(mode, mode)] = Complex64::from_polar(1.0, phase);
    Ok(ModeUnitary { matrix: m })
}

/// `second` applied after `first`.
pub fn compose(first: &ModeUnitary, second: &ModeUnitary) -> Result<ModeUnitary> {
    if first.dim() != second.dim() {
        return Err(Error::DimensionMismatch(first.dim(), second.dim()));
    }
    Ok(ModeUnitary {
        matrix: &first.matrix * &second.matrix,
    })
}

fn check_noise(epsilon: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::NoiseLevelOutOfRange(epsilon));
    }
    Ok(())
}

/// Weight λ of the indistinguishable component at noise level ε.
///
/// With `sin²(2θ) = ε/(2 − ε)` this is `cos²(2θ) = 2(1 − ε)/(2 − ε)`.
pub fn indistinguishability_weight(epsilon: f64) -> Result<f64> {
    check_noise(epsilon)?;
    Ok(2.0 * (1.0 - epsilon) / (2.0 - epsilon))
}

/// Two photons injected into distinct modes with a common noise level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonPairInput {
    mode_a: usize,
    mode_b: usize,
    noise_level: f64,
}

impl PhotonPairInput {
    pub fn new(mode_a: usize, mode_b: usize, noise_level: f64) -> Result<Self> {
        if mode_a == mode_b {
            return Err(Error::SameModes(mode_a));
        }
        check_noise(noise_level)?;
        Ok(Self {
            mode_a,
            mode_b,
            noise_level,
        })
    }

    pub fn modes(&self) -> (usize, usize) {
        (self.mode_a, self.mode_b)
    }

    pub fn noise_level(&self) -> f64 {
        self.noise_level
    }
}

/// Unordered pair of output modes; `j == k` is a bunched event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OutputPattern {
    j: usize,
    k: usize,
}

impl OutputPattern {
    /// Any order is accepted; the pattern is stored canonically.
    pub fn new(a: usize, b: usize) -> Self {
        Self {
            j: a.min(b),
            k: a.max(b),
        }
    }

    pub fn modes(&self) -> (usize, usize) {
        (self.j, self.k)
    }

    pub fn is_bunched(&self) -> bool {
        self.j == self.k
    }

    fn index(&self, dim: usize) -> usize {
        // Row-major over the upper triangle including the diagonal.
        self.j * dim - self.j * (self.j + 1) / 2 + self.k
    }
}

/// Probabilities over all unordered output pairs (bunched ones included).
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceDistribution {
    dim: usize,
    probs: Vec<f64>,
}

impl CoincidenceDistribution {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, pattern: OutputPattern) -> Result<f64> {
        check_mode(pattern.k, self.dim)?;
        Ok(self.probs[pattern.index(self.dim)])
    }

    pub fn iter(&self) -> impl Iterator<Item = (OutputPattern, f64)> + '_ {
        let dim = self.dim;
        (0..dim)
            .flat_map(move |j| (j..dim).map(move |k| OutputPattern::new(j, k)))
            .zip(self.probs.iter().copied())
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

fn pattern_probability(
    u: &ModeUnitary,
    a: usize,
    b: usize,
    j: usize,
    k: usize,
    lambda: f64,
) -> f64 {
    if j == k {
        let amp = (u.entry(a, j) * u.entry(b, j)).norm_sqr();
        // Indistinguishable photons bunch twice as often as distinguishable ones.
        lambda * 2.0 * amp + (1.0 - lambda) * amp
    } else {
        let direct = u.entry(a, j) * u.entry(b, k);
        let exchange = u.entry(a, k) * u.entry(b, j);
        lambda * (direct + exchange).norm_sqr()
            + (1.0 - lambda) * (direct.norm_sqr() + exchange.norm_sqr())
    }
}

fn check_input(u: &ModeUnitary, input: &PhotonPairInput) -> Result<()> {
    u.check_mode(input.mode_a)?;
    u.check_mode(input.mode_b)?;
    let deviation = u.unitarity_deviation();
    if !(deviation <= UNITARY_TOL) {
        return Err(Error::NotUnitary(deviation));
    }
    Ok(())
}

pub fn output_distribution(
    u: &ModeUnitary,
    input: &PhotonPairInput,
) -> Result<CoincidenceDistribution> {
    check_input(u, input)?;
    let lambda = indistinguishability_weight(input.noise_level)?;
    let dim = u.dim();
    let (a, b) = input.modes();
    let mut probs = Vec::with_capacity(dim * (dim + 1) / 2);
    for j in 0..dim {
        for k in j..dim {
            probs.push(pattern_probability(u, a, b, j, k, lambda));
        }
    }
    Ok(CoincidenceDistribution { dim, probs })
}

pub fn coincidence_probability(
    u: &ModeUnitary,
    input: &PhotonPairInput,
    pattern: OutputPattern,
) -> Result<f64> {
    check_input(u, input)?;
    u.check_mode(pattern.k)?;
    let lambda = indistinguishability_weight(input.noise_level)?;
    let (a, b) = input.modes();
    Ok(pattern_probability(u, a, b, pattern.j, pattern.k, lambda))
}
