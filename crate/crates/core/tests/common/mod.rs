//! Shared helpers for the integration suites: exact integer operator
//! matrices on the full Fock space (signs are integers, so canonical
//! anticommutation identities must hold with zero residual) and seeded
//! random bipartitions.

use nonfree_core::{Bipartition, ModeCount, Occupation};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Dense integer matrix over the full 2^d occupation basis, indexed by raw
/// bit pattern.
pub type IntMatrix = Vec<Vec<i64>>;

pub fn int_zeros(dim: usize) -> IntMatrix {
    vec![vec![0; dim]; dim]
}

pub fn int_identity(dim: usize) -> IntMatrix {
    let mut m = int_zeros(dim);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1;
    }
    m
}

pub fn int_mul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let dim = a.len();
    let mut out = int_zeros(dim);
    for i in 0..dim {
        for k in 0..dim {
            if a[i][k] == 0 {
                continue;
            }
            for j in 0..dim {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn int_add(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
        .collect()
}

pub fn max_abs(m: &IntMatrix) -> i64 {
    m.iter()
        .flat_map(|row| row.iter().map(|v| v.abs()))
        .max()
        .unwrap_or(0)
}

pub fn max_abs_diff(a: &IntMatrix, b: &IntMatrix) -> i64 {
    a.iter()
        .zip(b)
        .flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y).abs()))
        .max()
        .unwrap_or(0)
}

/// Matrix of the creator for `mode` on the full Fock space over `d` modes.
pub fn creator_matrix(d: ModeCount, mode: usize) -> IntMatrix {
    let dim = d.fock_dim();
    let mut m = int_zeros(dim);
    for bits in 0..dim as u32 {
        let occ = Occupation::new(d, bits).unwrap();
        if let Some((res, sign)) = occ.create(mode) {
            m[res.bits() as usize][bits as usize] = sign as i64;
        }
    }
    m
}

/// Matrix of the annihilator for `mode` on the full Fock space.
pub fn annihilator_matrix(d: ModeCount, mode: usize) -> IntMatrix {
    let dim = d.fock_dim();
    let mut m = int_zeros(dim);
    for bits in 0..dim as u32 {
        let occ = Occupation::new(d, bits).unwrap();
        if let Some((res, sign)) = occ.annihilate(mode) {
            m[res.bits() as usize][bits as usize] = sign as i64;
        }
    }
    m
}

/// Largest residual over all CAR identities at `d` modes:
/// `a†_j a_k + a_k a†_j − δ_jk`, `a_j a_k + a_k a_j` and the creator twin.
/// Exactly zero when the sign bookkeeping is right.
pub fn car_residual(d: ModeCount) -> i64 {
    let dim = d.fock_dim();
    let creators: Vec<IntMatrix> = (0..d.get()).map(|m| creator_matrix(d, m)).collect();
    let annihilators: Vec<IntMatrix> = (0..d.get()).map(|m| annihilator_matrix(d, m)).collect();
    let identity = int_identity(dim);
    let mut worst = 0i64;
    for j in 0..d.get() {
        for k in 0..d.get() {
            let mixed = int_add(
                &int_mul(&creators[j], &annihilators[k]),
                &int_mul(&annihilators[k], &creators[j]),
            );
            worst = worst.max(if j == k {
                max_abs_diff(&mixed, &identity)
            } else {
                max_abs(&mixed)
            });
            let ann = int_add(
                &int_mul(&annihilators[j], &annihilators[k]),
                &int_mul(&annihilators[k], &annihilators[j]),
            );
            worst = worst.max(max_abs(&ann));
            let cre = int_add(
                &int_mul(&creators[j], &creators[k]),
                &int_mul(&creators[k], &creators[j]),
            );
            worst = worst.max(max_abs(&cre));
        }
    }
    worst
}

/// A random proper bipartition of `d` modes.
pub fn random_bipartition(d: ModeCount, rng: &mut ChaCha8Rng) -> Bipartition {
    let size = rng.gen_range(1..d.get());
    let mut modes: Vec<usize> = (0..d.get()).collect();
    for i in (1..modes.len()).rev() {
        let j = rng.gen_range(0..=i);
        modes.swap(i, j);
    }
    let mut part1 = modes[..size].to_vec();
    part1.sort_unstable();
    Bipartition::new(d, &part1).unwrap()
}
