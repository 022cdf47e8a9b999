//! Six-mode programmable chip with dual-rail qubits and a post-selected CNOT.
//!
//! Mode map (0-based):
//!
//! | mode | role                          |
//! |------|-------------------------------|
//! | 0    | vacuum ancilla                |
//! | 1    | control rail `|0⟩`            |
//! | 2    | control rail `|1⟩`            |
//! | 3    | target rail `|1⟩`             |
//! | 4    | target rail `|0⟩`             |
//! | 5    | vacuum ancilla                |
//!
//! The CNOT is the three-coupler 1/3-reflectivity CZ core, couplers on modes
//! (0,1), (2,3) and (4,5), sandwiched between 50:50 couplers on the target
//! rails. The central (2,3) coupler is where the two photons interfere.
//!
//! Every qubit gets a Mach-Zehnder interferometer for preparation and one for
//! measurement. Odd-numbered shifters are the external (arm) phases,
//! even-numbered ones the internal MZI phases:
//!
//! * φ₁, φ₂: control preparation; φ₃, φ₄: target preparation. A preparation
//!   MZI is in the cross state at zero internal phase.
//! * φ₅, φ₆: control measurement; φ₇, φ₈: target measurement. A measurement
//!   MZI is the identity at zero phases.
//!
//! With φ₄ = π and everything else at zero, the chip is fed `|10⟩` and the
//! coincidence between modes 2 and 4 (outputs 3 and 5 counting from one)
//! vanishes for indistinguishable photons. That pattern is the in-chip HOM
//! probe.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::optics::{self, ModeUnitary, OutputPattern, PhotonPairInput};

pub const DIM: usize = 6;
pub const SHIFTER_COUNT: usize = 8;

pub const ANCILLA_LOW: usize = 0;
pub const CONTROL_0: usize = 1;
pub const CONTROL_1: usize = 2;
pub const TARGET_1: usize = 3;
pub const TARGET_0: usize = 4;
pub const ANCILLA_HIGH: usize = 5;

/// Post-selection below this success probability is reported as an error.
/// Post-selection success probability of the ideal CNOT.
pub const NOMINAL_SUCCESS: f64 = 1.0 / 9.0;

pub const MIN_SUCCESS_PROBABILITY: f64 = 1e-9;

/// Output pair watched during the in-chip HOM measurement.
pub const HOM_PATTERN: (usize, usize) = (CONTROL_1, TARGET_0);

const CNOT_REFLECTIVITY: f64 = 1.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Preparation,
    TargetHadamard,
    CzCore,
    Measurement,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Element {
    Coupler {
        modes: (usize, usize),
        reflectivity: f64,
        stage: Stage,
    },
    /// `shifter` is the 1-based φ index.
    PhaseShifter {
        shifter: usize,
        mode: usize,
        stage: Stage,
    },
}

impl Element {
    pub fn stage(&self) -> Stage {
        match *self {
            Element::Coupler { stage, .. } | Element::PhaseShifter { stage, .. } => stage,
        }
    }
}

/// Which modes carry which logical rail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RailMap {
    pub control: [usize; 2],
    pub target: [usize; 2],
    pub ancillas: [usize; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChipLayout {
    elements: Vec<Element>,
    rails: RailMap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSettings([f64; SHIFTER_COUNT]);

impl PhaseSettings {
    /// Wraps every phase into `[0, 2π)`.
    pub fn new(phases: [f64; SHIFTER_COUNT]) -> Result<Self> {
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("phase setting"));
        }
        Ok(Self(phases.map(wrap_phase)))
    }

    pub fn from_stages(prep: [f64; 4], measurement: [f64; 4]) -> Result<Self> {
        let mut all = [0.0; SHIFTER_COUNT];
        all[..4].copy_from_slice(&prep);
        all[4..].copy_from_slice(&measurement);
        Self::new(all)
    }

    /// φ by its 1-based index.
    pub fn phase(&self, shifter: usize) -> f64 {
        self.0[shifter - 1]
    }

    pub fn as_array(&self) -> &[f64; SHIFTER_COUNT] {
        &self.0
    }
}

pub fn wrap_phase(phase: f64) -> f64 {
    let wrapped = phase.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs.
    if wrapped >= TAU {
        0.0
    } else {
        wrapped
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisId {
    X,
    Y,
    Z,
}

impl BasisId {
    pub const ALL: [BasisId; 3] = [BasisId::X, BasisId::Y, BasisId::Z];

    pub fn name(&self) -> &'static str {
        match self {
            BasisId::X => "x",
            BasisId::Y => "y",
            BasisId::Z => "z",
        }
    }
}

/// Post-selected outcome probabilities `(p00, p01, p10, p11)`; the first
/// bit is the control qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeProbs(pub [f64; 4]);

impl OutcomeProbs {
    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Checks every entry is in `[0, 1]` and the sum is within `tol` of one.
    pub fn check_normalized(&self, tol: f64) -> Result<()> {
        let total = self.total();
        if self.0.iter().any(|p| !(-tol..=1.0 + tol).contains(p)) || !((total - 1.0).abs() <= tol) {
            return Err(Error::Unnormalized(total));
        }
        Ok(())
    }
}

/// Canonical layout. See the module docs for the mode map.
pub fn build_chip() -> ChipLayout {
    use Element::{Coupler, PhaseShifter};
    use Stage::*;
    let half = |modes, stage| Coupler {
        modes,
        reflectivity: 0.5,
        stage,
    };
    let third = |modes| Coupler {
        modes,
        reflectivity: CNOT_REFLECTIVITY,
        stage: CzCore,
    };
    let ps = |shifter, mode, stage| PhaseShifter {
        shifter,
        mode,
        stage,
    };

    let elements = vec![
        // Control preparation: cross at zero internal phase.
        half((CONTROL_0, CONTROL_1), Preparation),
        ps(2, CONTROL_0, Preparation),
        half((CONTROL_1, CONTROL_0), Preparation),
        ps(1, CONTROL_1, Preparation),
        // Target preparation.
        half((TARGET_0, TARGET_1), Preparation),
        ps(4, TARGET_0, Preparation),
        half((TARGET_1, TARGET_0), Preparation),
        ps(3, TARGET_1, Preparation),
        // CNOT = H_t · CZ · H_t.
        half((TARGET_0, TARGET_1), TargetHadamard),
        third((CONTROL_0, ANCILLA_LOW)),
        third((CONTROL_1, TARGET_1)),
        third((ANCILLA_HIGH, TARGET_0)),
        half((TARGET_0, TARGET_1), TargetHadamard),
        // Control measurement: identity at zero phases.
        ps(5, CONTROL_1, Measurement),
        half((CONTROL_0, CONTROL_1), Measurement),
        ps(6, CONTROL_0, Measurement),
        half((CONTROL_0, CONTROL_1), Measurement),
        // Target measurement.
        ps(7, TARGET_1, Measurement),
        half((TARGET_0, TARGET_1), Measurement),
        ps(8, TARGET_0, Measurement),
        half((TARGET_0, TARGET_1), Measurement),
    ];
    ChipLayout {
        elements,
        rails: RailMap {
            control: [CONTROL_0, CONTROL_1],
            target: [TARGET_0, TARGET_1],
            ancillas: [ANCILLA_LOW, ANCILLA_HIGH],
        },
    }
}

impl ChipLayout {
    pub fn dim(&self) -> usize {
        DIM
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn rails(&self) -> RailMap {
        self.rails
    }

    pub fn phase_shifter_count(&self) -> usize {
        self.elements
            .iter()
            .filter(|e| matches!(e, Element::PhaseShifter { .. }))
            .count()
    }

    /// Product of the selected elements in layout order.
    pub fn partial_unitary(
        &self,
        phases: &PhaseSettings,
        include: impl Fn(&Element) -> bool,
    ) -> Result<ModeUnitary> {
        let mut m: DMatrix<Complex64> = DMatrix::identity(DIM, DIM);
        for element in self.elements.iter().filter(|e| include(e)) {
            match *element {
                Element::Coupler {
                    modes: (i, j),
                    reflectivity,
                    ..
                } => {
                    // Right-multiplication only mixes columns i and j.
                    let r = reflectivity.sqrt();
                    let t = (1.0 - reflectivity).sqrt();
                    for row in 0..DIM {
                        let mi = m[(row, i)];
                        let mj = m[(row, j)];
                        m[(row, i)] = mi * r + mj * t;
                        m[(row, j)] = mi * t - mj * r;
                    }
                }
                Element::PhaseShifter { shifter, mode, .. } => {
                    let factor = Complex64::from_polar(1.0, phases.phase(shifter));
                    for row in 0..DIM {
                        m[(row, mode)] *= factor;
                    }
                }
            }
        }
        ModeUnitary::new(m)
    }

    pub fn stage_unitary(&self, phases: &PhaseSettings, stage: Stage) -> Result<ModeUnitary> {
        self.partial_unitary(phases, |e| e.stage() == stage)
    }
}

pub fn chip_unitary(layout: &ChipLayout, phases: &PhaseSettings) -> Result<ModeUnitary> {
    layout.partial_unitary(phases, |_| true)
}

/// Measurement phases `(φ₅, φ₆, φ₇, φ₈)` rotating the eigenbasis of `σᵏ`
/// on each qubit onto the rails; outcome 0 is the +1 eigenvector.
pub fn basis_settings(basis: BasisId) -> [f64; 4] {
    let (external, internal) = match basis {
        BasisId::Z => (0.0, 0.0),
        BasisId::X => (1.5 * PI, 0.5 * PI),
        BasisId::Y => (PI, 0.5 * PI),
    };
    [external, internal, external, internal]
}

/// Preparation phases `(φ₁..φ₄)` that put the control and target photons in
/// the given single-qubit states (up to a global phase each). Amplitudes are
/// `[⟨0|ψ⟩, ⟨1|ψ⟩]` and need not be normalized.
pub fn prep_phases_for(control: [Complex64; 2], target: [Complex64; 2]) -> [f64; 4] {
    let qubit = |state: [Complex64; 2]| {
        let (zero, one) = (state[0], state[1]);
        // The MZI prepares (−i·sin(φ/2), e^{iφ_ext}·cos(φ/2)).
        let internal = 2.0 * zero.norm().atan2(one.norm());
        let external = if zero.norm() > 0.0 && one.norm() > 0.0 {
            one.arg() - zero.arg() - 0.5 * PI
        } else {
            0.0
        };
        (wrap_phase(external), wrap_phase(internal))
    };
    let (c_ext, c_int) = qubit(control);
    let (t_ext, t_int) = qubit(target);
    [c_ext, c_int, t_ext, t_int]
}

fn logical_patterns(rails: &RailMap) -> [OutputPattern; 4] {
    let [c0, c1] = rails.control;
    let [t0, t1] = rails.target;
    [
        OutputPattern::new(c0, t0),
        OutputPattern::new(c0, t1),
        OutputPattern::new(c1, t0),
        OutputPattern::new(c1, t1),
    ]
}

/// Two-photon amplitudes of the four post-selected patterns at ε = 0 for
/// photons injected into the control and target `|0⟩` rails. Their squared
/// norms sum to the success probability.
pub fn post_selected_amplitudes(
    layout: &ChipLayout,
    phases: &PhaseSettings,
) -> Result<[Complex64; 4]> {
    let u = chip_unitary(layout, phases)?;
    let (a, b) = (layout.rails.control[0], layout.rails.target[0]);
    Ok(logical_patterns(&layout.rails).map(|pattern| {
        let (j, k) = pattern.modes();
        u.entry(a, j) * u.entry(b, k) + u.entry(a, k) * u.entry(b, j)
    }))
}

/// Post-selected outcome probabilities for one measurement basis, together
/// with the post-selection success probability.
pub fn outcome_probabilities(
    layout: &ChipLayout,
    prep_phases: [f64; 4],
    basis: BasisId,
    epsilon: f64,
) -> Result<(OutcomeProbs, f64)> {
    let settings = PhaseSettings::from_stages(prep_phases, basis_settings(basis))?;
    outcome_probabilities_with(layout, &settings, epsilon)
}

/// As [`outcome_probabilities`] with all eight phases given explicitly.
pub fn outcome_probabilities_with(
    layout: &ChipLayout,
    settings: &PhaseSettings,
    epsilon: f64,
) -> Result<(OutcomeProbs, f64)> {
    let u = chip_unitary(layout, settings)?;
    let input = PhotonPairInput::new(layout.rails.control[0], layout.rails.target[0], epsilon)?;
    let dist = optics::output_distribution(&u, &input)?;
    let mut raw = [0.0; 4];
    for (slot, pattern) in raw.iter_mut().zip(logical_patterns(&layout.rails)) {
        *slot = dist.get(pattern)?;
    }
    let success: f64 = raw.iter().sum();
    if !(success >= MIN_SUCCESS_PROBABILITY) {
        return Err(Error::DegeneratePostSelection(success));
    }
    Ok((OutcomeProbs(raw.map(|p| p / success)), success))
}

/// Phases used for the in-chip HOM measurement: φ₄ = π, all others zero.
pub fn hom_settings() -> PhaseSettings {
    let mut phases = [0.0; SHIFTER_COUNT];
    phases[3] = PI;
    PhaseSettings(phases)
}

fn hom_coincidence(u: &ModeUnitary, layout: &ChipLayout, epsilon: f64) -> Result<f64> {
    let input = PhotonPairInput::new(layout.rails.control[0], layout.rails.target[0], epsilon)?;
    optics::coincidence_probability(u, &input, OutputPattern::new(HOM_PATTERN.0, HOM_PATTERN.1))
}

/// HOM visibility `V = (p_d − p)/(p_d + p)` where `p_d` is the coincidence
/// probability of fully distinguishable photons.
pub fn hom_visibility(layout: &ChipLayout, epsilon: f64) -> Result<f64> {
    let u = chip_unitary(layout, &hom_settings())?;
    let p = hom_coincidence(&u, layout, epsilon)?;
    let p_dist = hom_coincidence(&u, layout, 1.0)?;
    Ok((p_dist - p) / (p_dist + p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn layout_shape() {
        let chip = build_chip();
        assert_eq!(chip.dim(), 6);
        assert_eq!(chip.phase_shifter_count(), SHIFTER_COUNT);
        let mut seen: Vec<usize> = chip
            .elements()
            .iter()
            .filter_map(|e| match e {
                Element::PhaseShifter { shifter, .. } => Some(*shifter),
                _ => None,
            })
            .collect();
        seen.sort();
        assert_eq!(seen, (1..=8).collect::<Vec<_>>());
        let zero = PhaseSettings::new([0.0; 8]).unwrap();
        assert!(chip_unitary(&chip, &zero).unwrap().unitarity_deviation() < 1e-12);
    }

    #[test]
    fn cz_core_truth_table() {
        let chip = build_chip();
        let zero = PhaseSettings::new([0.0; 8]).unwrap();
        let core = chip.stage_unitary(&zero, Stage::CzCore).unwrap();
        let amp = |c_mode: usize, t_mode: usize| {
            let (a, b) = (c_mode, t_mode);
            core.entry(a, a) * core.entry(b, b) + core.entry(a, b) * core.entry(b, a)
        };
        let third = 1.0 / 3.0;
        assert!((amp(CONTROL_0, TARGET_0) - c(-third)).norm() < 1e-15);
        assert!((amp(CONTROL_0, TARGET_1) - c(-third)).norm() < 1e-15);
        assert!((amp(CONTROL_1, TARGET_0) - c(-third)).norm() < 1e-15);
        assert!((amp(CONTROL_1, TARGET_1) - c(third)).norm() < 1e-15);
    }

    #[test]
    fn phases_wrap() {
        let s = PhaseSettings::new([-0.5, 7.0, TAU, 0.0, 0.0, 0.0, 0.0, -1e-300]).unwrap();
        assert_abs_diff_eq!(s.phase(1), TAU - 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.phase(2), 7.0 - TAU, epsilon = 1e-15);
        assert_eq!(s.phase(3), 0.0);
        assert!(s.as_array().iter().all(|p| (0.0..TAU).contains(p)));
        assert!(PhaseSettings::new([f64::NAN; 8]).is_err());
    }

    #[test]
    fn ground_state_success_and_truth_table() {
        let chip = build_chip();
        let zero = [c(1.0), c(0.0)];
        let one = [c(0.0), c(1.0)];
        let (probs, success) =
            outcome_probabilities(&chip, prep_phases_for(zero, zero), BasisId::Z, 0.0).unwrap();
        assert_abs_diff_eq!(probs.0[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(success, 1.0 / 9.0, epsilon = 1e-12);
        let (probs, _) =
            outcome_probabilities(&chip, prep_phases_for(one, zero), BasisId::Z, 0.0).unwrap();
        assert_abs_diff_eq!(probs.0[3], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn z_basis_is_identity() {
        assert_eq!(basis_settings(BasisId::Z), [0.0; 4]);
        let chip = build_chip();
        let zero = [c(1.0), c(0.0)];
        let one = [c(0.0), c(1.0)];
        // |0⟩|1⟩ passes the CNOT unchanged.
        let (probs, _) =
            outcome_probabilities(&chip, prep_phases_for(zero, one), BasisId::Z, 0.0).unwrap();
        assert_abs_diff_eq!(probs.0[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn y_basis_on_ground_product_state_is_uniform() {
        let chip = build_chip();
        let zero = [c(1.0), c(0.0)];
        let (probs, _) =
            outcome_probabilities(&chip, prep_phases_for(zero, zero), BasisId::Y, 0.0).unwrap();
        for p in probs.0 {
            assert_abs_diff_eq!(p, 0.25, epsilon = 1e-12);
        }
    }

    #[test]
    fn hom_visibility_examples() {
        let chip = build_chip();
        assert_abs_diff_eq!(hom_visibility(&chip, 0.0).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hom_visibility(&chip, 1.0).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hom_visibility(&chip, 0.18).unwrap(), 0.82, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_post_selection_is_an_error() {
        // A fully transmitting coupler sends the control photon into the
        // ancilla, so no logical pattern survives.
        let chip = build_chip();
        let layout = ChipLayout {
            elements: vec![Element::Coupler {
                modes: (CONTROL_0, ANCILLA_LOW),
                reflectivity: 0.0,
                stage: Stage::CzCore,
            }],
            rails: chip.rails(),
        };
        let settings = PhaseSettings::new([0.0; 8]).unwrap();
        assert!(matches!(
            outcome_probabilities_with(&layout, &settings, 0.0),
            Err(Error::DegeneratePostSelection(_))
        ));
    }
}
