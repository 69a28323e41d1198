//! Seeded random instances: matrices, unitaries, circle sets and point sets.
//!
//! Used by the property and acceptance tests; every generator takes the RNG
//! explicitly so that runs are reproducible.

use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{ComplexMatrix, C64};

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn complex_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<C64> {
    (0..len).map(|_| complex_normal(rng)).collect()
}

pub fn complex_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::new(rows, cols, complex_vector(rng, rows * cols)).expect("finite entries")
}

/// Haar-distributed unitary: QR of a Gaussian matrix with the phases of
/// `diag(R)` folded back into `Q`.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, k: usize) -> ComplexMatrix {
    let g = complex_matrix(rng, k, k).to_nalgebra();
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut q = ComplexMatrix::from_nalgebra(&q);
    for j in 0..k {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..k {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn unit_phase<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::from_polar(1.0, rng.random_range(0.0..TAU))
}

/// `m` angles in `[0, 2pi)` with circular gaps at least `min_gap`.
pub fn circle_angles<R: Rng + ?Sized>(rng: &mut R, m: usize, min_gap: f64) -> Vec<f64> {
    loop {
        let mut a: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..TAU)).collect();
        a.sort_by(f64::total_cmp);
        let ok = (0..m).all(|i| {
            let next = if i + 1 < m { a[i + 1] } else { a[0] + TAU };
            m == 1 || next - a[i] >= min_gap
        });
        if ok {
            return a;
        }
    }
}

/// Unitary `W diag(e^{i a_j}) W*` with a random `W`, repeating some
/// eigenvalues to exercise multiplicity handling.
pub fn unitary_with_spectrum<R: Rng + ?Sized>(
    rng: &mut R,
    angles: &[f64],
    extra: usize,
) -> ComplexMatrix {
    let mut diag: Vec<C64> = angles.iter().map(|&a| C64::from_polar(1.0, a)).collect();
    for _ in 0..extra {
        let j = rng.random_range(0..angles.len());
        diag.push(C64::from_polar(1.0, angles[j]));
    }
    let k = diag.len();
    let w = unitary(rng, k);
    &(&w * &ComplexMatrix::from_diag(&diag)) * &w.adjoint()
}

/// `m` points in `C^n` with coordinates drawn from a standard complex normal.
pub fn points<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> Vec<Vec<C64>> {
    (0..m).map(|_| complex_vector(rng, n)).collect()
}
