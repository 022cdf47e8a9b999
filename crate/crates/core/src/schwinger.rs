//! Two-qubit Schwinger Hamiltonian
//! `H(m) = I + X₁X₂ + Y₁Y₂ − ½Z₁ + ½Z₁Z₂ + (m/2)(Z₂ − Z₁)`.
//!
//! Basis ordering is `|q₁q₂⟩ = |00⟩, |01⟩, |10⟩, |11⟩` with `Z|0⟩ = +|0⟩`,
//! so the diagonal of `H` is `(1, −m, 1 + m, 2)`.

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::processor::{BasisId, OutcomeProbs};

/// Normalization tolerance accepted by [`energy_from_probs`].
pub const PROB_TOL: f64 = 1e-6;

/// Signs of a `σᵏσᵏ` measurement over outcomes `00, 01, 10, 11`.
pub const PARITY_SIGNS: [i8; 4] = [1, -1, -1, 1];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString(pub [Pauli; 2]);

impl PauliString {
    pub fn matrix(&self) -> Matrix4<Complex64> {
        let a = self.0[0].matrix();
        let b = self.0[1].matrix();
        Matrix4::from_fn(|r, c| a[r / 2][c / 2] * b[r % 2][c % 2])
    }

    pub fn label(&self) -> String {
        self.0
            .iter()
            .map(|p| match p {
                Pauli::I => 'I',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchwingerHamiltonian {
    pub m: f64,
    pub terms: Vec<(f64, PauliString)>,
}

impl SchwingerHamiltonian {
    pub fn coefficient(&self, string: PauliString) -> f64 {
        self.terms
            .iter()
            .filter(|(_, s)| *s == string)
            .map(|(h, _)| h)
            .sum()
    }

    pub fn dense(&self) -> Matrix4<Complex64> {
        self.terms.iter().fold(Matrix4::zeros(), |acc, (h, s)| {
            acc + s.matrix() * Complex64::new(*h, 0.0)
        })
    }

    /// `⟨ψ|H|ψ⟩` for a normalized state.
    pub fn expectation(&self, state: &[Complex64; 4]) -> f64 {
        let h = self.dense();
        let mut total = Complex64::new(0.0, 0.0);
        for r in 0..4 {
            for c in 0..4 {
                total += state[r].conj() * h[(r, c)] * state[c];
            }
        }
        total.re
    }
}

pub fn hamiltonian(m: f64) -> SchwingerHamiltonian {
    use Pauli::*;
    SchwingerHamiltonian {
        m,
        terms: vec![
            (1.0, PauliString([I, I])),
            (1.0, PauliString([X, X])),
            (1.0, PauliString([Y, Y])),
            (-(1.0 + m) / 2.0, PauliString([Z, I])),
            (m / 2.0, PauliString([I, Z])),
            (0.5, PauliString([Z, Z])),
        ],
    }
}

/// The three mutually commuting groups, one per measurement basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutingGroups {
    pub groups: [(BasisId, Vec<PauliString>); 3],
}

pub fn commuting_groups() -> CommutingGroups {
    use Pauli::*;
    CommutingGroups {
        groups: [
            (BasisId::X, vec![PauliString([X, X])]),
            (BasisId::Y, vec![PauliString([Y, Y])]),
            (
                BasisId::Z,
                vec![
                    PauliString([I, I]),
                    PauliString([Z, I]),
                    PauliString([I, Z]),
                    PauliString([Z, Z]),
                ],
            ),
        ],
    }
}

fn middle_block_disc(m: f64) -> f64 {
    ((1.0 + 2.0 * m).powi(2) + 16.0).sqrt()
}

/// Closed-form spectrum, ascending.
pub fn eigenvalues(m: f64) -> [f64; 4] {
    let disc = middle_block_disc(m);
    let mut ev = [1.0, 2.0, (1.0 - disc) / 2.0, (1.0 + disc) / 2.0];
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn exact_ground_energy(m: f64) -> f64 {
    eigenvalues(m)[0]
}

/// Ground energy and a real normalized ground state in the
/// `|00⟩, |01⟩, |10⟩, |11⟩` basis.
pub fn ground_state(m: f64) -> (f64, [f64; 4]) {
    let disc = middle_block_disc(m);
    let low = (1.0 - disc) / 2.0;
    // The middle-block minimum is always below 1 since disc ≥ 4.
    // Block [[−m, 2], [2, 1 + m]]: eigenvector (2, low + m).
    let (a, b) = (2.0_f64, low + m);
    let norm = a.hypot(b);
    (low, [0.0, a / norm, b / norm, 0.0])
}

fn z_weights(m: f64) -> [f64; 4] {
    [1.0, -m, 1.0 + m, 2.0]
}

fn parity(p: &[f64; 4]) -> f64 {
    p[0] - p[1] - p[2] + p[3]
}

/// Energy from the three post-selected outcome distributions. Linear in
/// every probability.
pub fn energy_from_probs(
    px: &OutcomeProbs,
    py: &OutcomeProbs,
    pz: &OutcomeProbs,
    m: f64,
) -> Result<f64> {
    for p in [px, py, pz] {
        p.check_normalized(PROB_TOL)?;
    }
    let z: f64 = z_weights(m)
        .iter()
        .zip(pz.0.iter())
        .map(|(w, p)| w * p)
        .sum();
    Ok(parity(&px.0) + parity(&py.0) + z)
}

/// Signed count sum over the total.
pub fn pauli_expectation_from_counts(counts: [u64; 4], signs: [i8; 4]) -> Result<f64> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::ZeroCounts("pauli"));
    }
    let signed: f64 = counts
        .iter()
        .zip(signs)
        .map(|(&n, s)| f64::from(s) * n as f64)
        .sum();
    Ok(signed / total as f64)
}

/// Hamiltonian expectation with a standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EnergyEstimate {
    pub value: f64,
    pub std: f64,
}

impl EnergyEstimate {
    pub fn exact(value: f64) -> Self {
        Self { value, std: 0.0 }
    }

    pub fn variance(&self) -> f64 {
        self.std * self.std
    }
}

/// Mean and first-order Poisson variance of `Σ wᵢ nᵢ / Σ nᵢ`.
fn weighted_ratio(counts: [u64; 4], weights: [f64; 4], basis: &'static str) -> Result<(f64, f64)> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::ZeroCounts(basis));
    }
    let t = total as f64;
    let mean: f64 = counts
        .iter()
        .zip(weights)
        .map(|(&n, w)| w * n as f64)
        .sum::<f64>()
        / t;
    // ∂/∂nᵢ = (wᵢ − mean)/T with Var[nᵢ] = nᵢ.
    let var: f64 = counts
        .iter()
        .zip(weights)
        .map(|(&n, w)| (w - mean).powi(2) * n as f64)
        .sum::<f64>()
        / (t * t);
    Ok((mean, var))
}

pub fn energy_from_counts(
    counts_x: [u64; 4],
    counts_y: [u64; 4],
    counts_z: [u64; 4],
    m: f64,
) -> Result<EnergyEstimate> {
    let parity_weights = PARITY_SIGNS.map(f64::from);
    let (ex, vx) = weighted_ratio(counts_x, parity_weights, "x")?;
    let (ey, vy) = weighted_ratio(counts_y, parity_weights, "y")?;
    let (ez, vz) = weighted_ratio(counts_z, z_weights(m), "z")?;
    Ok(EnergyEstimate {
        value: ex + ey + ez,
        std: (vx + vy + vz).sqrt(),
    })
}
