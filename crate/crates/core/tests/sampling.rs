use photon_zne::processor::{BasisId, OutcomeProbs, NOMINAL_SUCCESS};
use photon_zne::sampling::{poisson_draw, sample_counts, seeded_rng, stream_id, ShotScale};
use proptest::prelude::*;

fn moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

#[test]
fn counts_have_poisson_moments_and_are_uncorrelated() {
    let probs = OutcomeProbs([0.5, 0.25, 0.15, 0.1]);
    let scale = ShotScale::new(400.0).unwrap();
    let success = 0.08;
    let rate = 400.0 * success / NOMINAL_SUCCESS;
    let mut rng = seeded_rng(1, 0);
    let draws: Vec<[u64; 4]> = (0..20_000)
        .map(|_| sample_counts(BasisId::X, &probs, success, scale, &mut rng).counts)
        .collect();
    let column = |i: usize| draws.iter().map(|d| d[i] as f64).collect::<Vec<_>>();
    for i in 0..4 {
        let (mean, var) = moments(&column(i));
        let expected = rate * probs.0[i];
        assert!(
            (mean / expected - 1.0).abs() < 0.01,
            "outcome {i}: mean {mean} vs {expected}"
        );
        assert!(
            (var / expected - 1.0).abs() < 0.05,
            "outcome {i}: var {var} vs {expected}"
        );
    }
    let (a, b) = (column(0), column(1));
    let (ma, va) = moments(&a);
    let (mb, vb) = moments(&b);
    let cov = a
        .iter()
        .zip(&b)
        .map(|(x, y)| (x - ma) * (y - mb))
        .sum::<f64>()
        / (a.len() as f64 - 1.0);
    let corr = cov / (va * vb).sqrt();
    assert!(corr.abs() < 0.03, "correlation {corr}");
}

#[test]
fn nominal_success_gives_s_coincidences() {
    let probs = OutcomeProbs([0.25; 4]);
    let scale = ShotScale::new(1000.0).unwrap();
    let mut rng = seeded_rng(2, 0);
    let totals: Vec<f64> = (0..5000)
        .map(|_| sample_counts(BasisId::Z, &probs, NOMINAL_SUCCESS, scale, &mut rng).total() as f64)
        .collect();
    let (mean, _) = moments(&totals);
    assert!((mean - 1000.0).abs() < 2.0, "{mean}");
}

#[test]
fn invalid_scales_are_rejected() {
    for s in [0.0, -1.0, f64::NAN, f64::INFINITY] {
        assert!(ShotScale::new(s).is_err());
    }
    assert_eq!(ShotScale::default().get(), 1000.0);
}

#[test]
fn stream_ids_separate_fields() {
    assert_ne!(stream_id(0, 1, 0), stream_id(1, 0, 0));
    assert_ne!(stream_id(0, 0, 1), stream_id(0, 1, 0));
    assert_ne!(stream_id(3, 7, 2), stream_id(3, 7, 1));
}

proptest! {
    #[test]
    fn seeded_draws_repeat(seed in any::<u64>(), stream in any::<u64>(), mean in 0.0f64..1e4) {
        let mut a = seeded_rng(seed, stream);
        let mut b = seeded_rng(seed, stream);
        for _ in 0..5 {
            prop_assert_eq!(poisson_draw(mean, &mut a), poisson_draw(mean, &mut b));
        }
    }

    #[test]
    fn zero_probability_outcomes_never_fire(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed, 0);
        let probs = OutcomeProbs([0.0, 0.7, 0.0, 0.3]);
        let c = sample_counts(BasisId::Y, &probs, 0.1, ShotScale::new(500.0).unwrap(), &mut rng);
        prop_assert_eq!(c.counts[0], 0);
        prop_assert_eq!(c.counts[2], 0);
        prop_assert_eq!(c.basis, BasisId::Y);
    }
}
