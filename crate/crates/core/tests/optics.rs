mod common;

use common::haar_unitary;
use nalgebra::DMatrix;
use photon_zne::optics::{
    coincidence_probability, compose, directional_coupler, indistinguishability_weight,
    output_distribution, phase_shifter, ModeUnitary, OutputPattern, PhotonPairInput,
};
use photon_zne::sampling::seeded_rng;
use photon_zne::{Complex64, Error};
use proptest::prelude::*;

/// First-principles model: each photon carries a two-level internal state,
/// with overlap² = λ. Builds the symmetrized two-photon amplitude over
/// (spatial mode, internal level) and sums detection probabilities over
/// the unobserved internal level.
fn brute_force(u: &ModeUnitary, a: usize, b: usize, lambda: f64, j: usize, k: usize) -> f64 {
    let psi_a = [1.0, 0.0];
    let psi_b = [lambda.sqrt(), (1.0 - lambda).sqrt()];
    let mut total = 0.0;
    for s in 0..2 {
        for t in 0..2 {
            let amp = u.entry(a, j) * psi_a[s] * u.entry(b, k) * psi_b[t]
                + u.entry(a, k) * psi_a[t] * u.entry(b, j) * psi_b[s];
            let same_extended = j == k && s == t;
            let p = if same_extended {
                amp.norm_sqr() / 2.0
            } else {
                amp.norm_sqr()
            };
            // Unordered extended pairs: (j,s),(k,t) and (k,t),(j,s) coincide when j == k.
            total += if j == k && !same_extended { 0.5 * p } else { p };
        }
    }
    total
}

#[test]
fn matches_internal_state_model_on_haar_unitaries() {
    let mut rng = seeded_rng(2024, 0);
    for trial in 0..20 {
        let u = haar_unitary(6, &mut rng);
        let (a, b) = (trial % 6, (trial + 1 + trial / 6) % 6);
        if a == b {
            continue;
        }
        for eps in [0.0, 0.13, 0.5, 0.87, 1.0] {
            let lambda = indistinguishability_weight(eps).unwrap();
            let dist = output_distribution(&u, &PhotonPairInput::new(a, b, eps).unwrap()).unwrap();
            for (pattern, p) in dist.iter() {
                let (j, k) = pattern.modes();
                let oracle = brute_force(&u, a, b, lambda, j, k);
                assert!(
                    (p - oracle).abs() < 1e-12,
                    "trial {trial} eps {eps} ({j},{k}): {p} vs {oracle}"
                );
            }
            assert!((dist.total() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn balanced_coupler_hom_dip() {
    let bs = directional_coupler(0.5, (0, 1), 2).unwrap();
    for eps in [0.0, 0.25, 0.5, 1.0] {
        let input = PhotonPairInput::new(0, 1, eps).unwrap();
        let p = coincidence_probability(&bs, &input, OutputPattern::new(0, 1)).unwrap();
        assert!((p - eps / (2.0 * (2.0 - eps))).abs() < 1e-14);
    }
}

#[test]
fn distinguishable_photons_are_classical() {
    let mut rng = seeded_rng(5, 1);
    let u = haar_unitary(5, &mut rng);
    let dist = output_distribution(&u, &PhotonPairInput::new(1, 3, 1.0).unwrap()).unwrap();
    for (pattern, p) in dist.iter() {
        let (j, k) = pattern.modes();
        let single = |m: usize, o: usize| u.entry(m, o).norm_sqr();
        let expected = if j == k {
            single(1, j) * single(3, j)
        } else {
            single(1, j) * single(3, k) + single(1, k) * single(3, j)
        };
        assert!((p - expected).abs() < 1e-13);
    }
}

#[test]
fn relabeling_modes_permutes_the_distribution() {
    let mut rng = seeded_rng(8, 2);
    let u = haar_unitary(4, &mut rng);
    let perm = [2usize, 0, 3, 1];
    let mut p = DMatrix::zeros(4, 4);
    for (i, &pi) in perm.iter().enumerate() {
        p[(i, pi)] = Complex64::new(1.0, 0.0);
    }
    let pu = compose(&u, &ModeUnitary::new(p).unwrap()).unwrap();
    let input = PhotonPairInput::new(0, 2, 0.3).unwrap();
    let before = output_distribution(&u, &input).unwrap();
    let after = output_distribution(&pu, &input).unwrap();
    for (pattern, prob) in before.iter() {
        let (j, k) = pattern.modes();
        let moved = after.get(OutputPattern::new(perm[j], perm[k])).unwrap();
        assert!((prob - moved).abs() < 1e-13);
    }
}

#[test]
fn rejects_bad_inputs() {
    assert!(matches!(
        PhotonPairInput::new(2, 2, 0.1),
        Err(Error::SameModes(2))
    ));
    assert!(matches!(
        PhotonPairInput::new(0, 1, 1.2),
        Err(Error::NoiseLevelOutOfRange(_))
    ));
    assert!(directional_coupler(1.5, (0, 1), 2).is_err());
    assert!(directional_coupler(0.5, (1, 1), 2).is_err());
    assert!(phase_shifter(0.1, 3, 2).is_err());
    let skew = DMatrix::from_element(2, 2, Complex64::new(1.0, 0.0));
    assert!(matches!(ModeUnitary::new(skew), Err(Error::NotUnitary(_))));
    let u = ModeUnitary::identity(3).unwrap();
    assert!(output_distribution(&u, &PhotonPairInput::new(0, 4, 0.0).unwrap()).is_err());
}

proptest! {
    #[test]
    fn distribution_is_normalized(seed in any::<u64>(), eps in 0.0f64..=1.0, a in 0usize..6, shift in 1usize..6) {
        let mut rng = seeded_rng(seed, 0);
        let u = haar_unitary(6, &mut rng);
        let dist = output_distribution(&u, &PhotonPairInput::new(a, (a + shift) % 6, eps).unwrap()).unwrap();
        prop_assert!((dist.total() - 1.0).abs() < 1e-12);
        prop_assert!(dist.iter().all(|(_, p)| p >= -1e-15));
    }

    #[test]
    fn unbunched_probabilities_are_affine_in_the_weight(seed in any::<u64>(), eps in 0.0f64..=1.0) {
        let mut rng = seeded_rng(seed, 1);
        let u = haar_unitary(6, &mut rng);
        let at = |e: f64| output_distribution(&u, &PhotonPairInput::new(1, 4, e).unwrap()).unwrap();
        let (d0, d1, de) = (at(0.0), at(1.0), at(eps));
        let lambda = indistinguishability_weight(eps).unwrap();
        for ((pattern, p0), ((_, p1), (_, pe))) in d0.iter().zip(d1.iter().zip(de.iter())) {
            let mixed = lambda * p0 + (1.0 - lambda) * p1;
            prop_assert!((pe - mixed).abs() < 1e-13, "{pattern:?}");
        }
    }
}
