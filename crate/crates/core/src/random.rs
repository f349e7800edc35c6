//! Seeded sampling of states, unitaries and CPTP maps.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{orthonormalize, ComplexMatrix, ComplexVector};
use crate::ops::Operation;
use crate::C64;

/// Complex Gaussian with E|z|^2 = 1.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| complex_gaussian(rng)).collect();
    ComplexMatrix::from_vec(rows, cols, data).expect("shape is consistent")
}

pub fn pure_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexVector {
    loop {
        let v = ComplexVector::new((0..dim).map(|_| complex_gaussian(rng)).collect());
        if let Ok(n) = v.normalized() {
            return n;
        }
    }
}

/// Density matrix G G† / Tr(G G†) with G Ginibre of the given rank.
pub fn density_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> ComplexMatrix {
    let g = ginibre(rng, dim, rank.max(1));
    let p = &g * &g.dagger();
    let t = p.trace().re;
    p.scale_real(1.0 / t)
}

/// Haar unitary from Gram–Schmidt on Ginibre columns.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    loop {
        let g = ginibre(rng, dim, dim);
        let cols: Vec<ComplexVector> = (0..dim).map(|j| g.column(j)).collect();
        let q = orthonormalize(&cols, &[], 1e-10);
        if q.len() == dim {
            return ComplexMatrix::from_columns(&q).expect("square");
        }
    }
}

/// Isometry V: C^d_in -> C^(d_out * k) from orthonormalized Gaussian columns.
/// Kraus operators are the blocks <i|_E V with the environment as the
/// trailing factor.
pub fn cptp_operation<R: Rng + ?Sized>(rng: &mut R, d_in: usize, d_out: usize, kraus_rank: usize) -> Operation {
    let k = kraus_rank.max(1);
    assert!(d_out * k >= d_in, "isometry needs d_out * k >= d_in");
    let v = loop {
        let g = ginibre(rng, d_out * k, d_in);
        let cols: Vec<ComplexVector> = (0..d_in).map(|j| g.column(j)).collect();
        let q = orthonormalize(&cols, &[], 1e-10);
        if q.len() == d_in {
            break ComplexMatrix::from_columns(&q).expect("columns share a length");
        }
    };
    let kraus = (0..k)
        .map(|e| {
            let mut m = ComplexMatrix::zeros(d_out, d_in);
            for o in 0..d_out {
                for i in 0..d_in {
                    m[(o, i)] = v[(o * k + e, i)];
                }
            }
            m
        })
        .collect();
    Operation::new(d_in, d_out, kraus).expect("isometry blocks form a CPTP map")
}

/// CPTP map with a Kraus rank drawn uniformly from the admissible range.
pub fn any_cptp_operation<R: Rng + ?Sized>(rng: &mut R, d_in: usize, d_out: usize) -> Operation {
    let min_rank = d_in.div_ceil(d_out);
    let rank = rng.random_range(min_rank..=d_in * d_out);
    cptp_operation(rng, d_in, d_out, rank)
}

/// Mixture Σ p_k ρ_k ⊗ σ_k of `terms` random pure product states with
/// uniformly drawn weights.
pub fn separable_state<R: Rng + ?Sized>(rng: &mut R, d1: usize, d2: usize, terms: usize) -> ComplexMatrix {
    let weights: Vec<f64> = (0..terms.max(1)).map(|_| rng.random_range(0.01..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut rho = ComplexMatrix::zeros(d1 * d2, d1 * d2);
    for w in weights {
        let v = pure_state(rng, d1).kron(&pure_state(rng, d2));
        rho = &rho + &v.projector().scale_real(w / total);
    }
    rho
}

pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let g = ginibre(rng, dim, dim);
    &g + &g.dagger()
}
