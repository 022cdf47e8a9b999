#![allow(dead_code)]

use nalgebra::DMatrix;
use photon_zne::optics::ModeUnitary;
use photon_zne::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Haar-random unitary: QR of a complex Gaussian matrix with the phases of
/// R's diagonal moved into Q.
pub fn haar_unitary<R: Rng>(dim: usize, rng: &mut R) -> ModeUnitary {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        )
    });
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = d / d.norm();
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    ModeUnitary::new(q).expect("QR factor is unitary")
}

pub fn random_qubit<R: Rng>(rng: &mut R) -> [Complex64; 2] {
    let v = [
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)),
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)),
    ];
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / n, v[1] / n]
}

/// Kronecker product in `|q1 q2⟩` order: index = 2·q1 + q2.
pub fn kron(a: [Complex64; 2], b: [Complex64; 2]) -> [Complex64; 4] {
    [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
}

/// CNOT with qubit 1 as control.
pub fn cnot(state: [Complex64; 4]) -> [Complex64; 4] {
    [state[0], state[1], state[3], state[2]]
}

/// Ordinary least-squares line `y = a + b·x`; returns `(a, b, max |residual|)`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let worst = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - a - b * x).abs())
        .fold(0.0, f64::max);
    (a, b, worst)
}
