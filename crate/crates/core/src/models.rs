//! Generators for named example states and seeded random test ensembles,
//! including a minimal exact-diagonalization solver for the
//! antiferromagnetic Heisenberg ground state embedded as a fermion state.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{NonfreeError, Result};
use crate::fock::{slater_amplitudes, Bipartition, ModeCount, Occupation, OrbitalMatrix, Sector};
use crate::states::{DensityOperator, Ensemble, PureState};
use crate::{tol, MAX_MODES_PURE};

/// Nearest-neighbor layout of the spin lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    /// Periodic chain.
    Ring,
    /// Open chain.
    Chain,
}

/// An even-site spin-1/2 lattice; each site carries two spin-orbitals in
/// the fermionic embedding.
#[derive(Debug, Clone, Copy)]
pub struct LatticeSpec {
    sites: usize,
    geometry: Geometry,
}

impl LatticeSpec {
    pub fn new(sites: usize, geometry: Geometry) -> Result<Self> {
        if sites < 2 || sites % 2 != 0 {
            return Err(NonfreeError::InvalidParameter(format!(
                "lattice needs an even number of sites >= 2, got {sites}"
            )));
        }
        if 2 * sites > MAX_MODES_PURE {
            return Err(NonfreeError::CapacityExceeded(format!(
                "{sites} sites need {} spin-orbitals, limited to {MAX_MODES_PURE}",
                2 * sites
            )));
        }
        Ok(LatticeSpec { sites, geometry })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    fn bonds(&self) -> Vec<(usize, usize)> {
        let mut bonds: Vec<(usize, usize)> = (0..self.sites - 1).map(|i| (i, i + 1)).collect();
        if self.geometry == Geometry::Ring && self.sites > 2 {
            bonds.push((self.sites - 1, 0));
        }
        bonds
    }
}

/// The Slater determinant over the columns of `u`, as a normalized pure
/// state.
pub fn slater_state(u: &OrbitalMatrix) -> Result<PureState> {
    let (sector, amps) = slater_amplitudes(u);
    PureState::new(u.mode_count(), sector.particles(), amps)
}

/// The even superposition `(Φ + Ψ)/√2` of two Slater determinants over
/// disjoint orbital sets: `Φ` fills modes `0..m`, `Ψ` fills modes `m..2m`.
/// For `m ≥ 2` its nonfreeness is `2m`, the maximum for rank `2m`; for
/// `m = 1` it collapses to a single Slater determinant.
pub fn double_slater(m: usize) -> Result<PureState> {
    if m == 0 {
        return Err(NonfreeError::InvalidParameter(
            "double Slater needs m >= 1".into(),
        ));
    }
    let d = ModeCount::new(2 * m).map_err(|_| {
        NonfreeError::CapacityExceeded(format!(
            "double Slater with m = {m} needs {} modes, limited to {MAX_MODES_PURE}",
            2 * m
        ))
    })?;
    let inv = Complex64::from(std::f64::consts::FRAC_1_SQRT_2);
    let phi = Occupation::new(d, (1 << m) - 1)?;
    let psi = Occupation::new(d, ((1 << m) - 1) << m)?;
    PureState::from_amplitudes(d, &[(phi, inv), (psi, inv)])
}

/// Ground state of the spin-1/2 antiferromagnetic Heisenberg model
/// `H = Σ_{⟨i,j⟩} S_i · S_j` on the given lattice, found by dense
/// diagonalization in the `S_z = 0` sector and embedded as a fermion state
/// with one electron per site. Mode ordering is site-major, up before down:
/// site `j` occupies mode `2j` when up, mode `2j+1` when down.
pub fn heisenberg_ground_fermionic(spec: LatticeSpec) -> Result<PureState> {
    let sites = spec.sites();
    let spin_sector = Sector::new(ModeCount::new(sites)?, sites / 2);
    let dim = spin_sector.dim();
    let bonds = spec.bonds();
    let mut hamiltonian = DMatrix::from_element(dim, dim, Complex64::from(0.0));
    for (i, sigma) in spin_sector.states().iter().enumerate() {
        for &(a, b) in &bonds {
            let aligned = sigma.contains(a) == sigma.contains(b);
            hamiltonian[(i, i)] += Complex64::from(if aligned { 0.25 } else { -0.25 });
            if !aligned {
                let flipped = Occupation::new(
                    spin_sector.mode_count(),
                    sigma.bits() ^ ((1 << a) | (1 << b)),
                )?;
                let j = spin_sector.index_of(flipped).unwrap();
                hamiltonian[(i, j)] += Complex64::from(0.5);
            }
        }
    }
    let eig = crate::eigen::hermitian_eigen(&hamiltonian)?;
    if dim > 1 {
        let gap = eig.values[1] - eig.values[0];
        if gap < tol::DEGENERACY {
            return Err(NonfreeError::DegenerateGroundState(gap));
        }
    }
    let ground = eig.vectors.column(0);

    let d = ModeCount::new(2 * sites)?;
    let fermion_sector = Sector::new(d, sites);
    let mut amps = DVector::from_element(fermion_sector.dim(), Complex64::from(0.0));
    for (i, sigma) in spin_sector.states().iter().enumerate() {
        let mut bits = 0u32;
        for site in 0..sites {
            if sigma.contains(site) {
                bits |= 1 << (2 * site);
            } else {
                bits |= 1 << (2 * site + 1);
            }
        }
        let occ = Occupation::new(d, bits)?;
        amps[fermion_sector.index_of(occ).unwrap()] = ground[i];
    }
    PureState::new(d, sites, amps)
}

/// Families of seeded random states for the verification suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomKind {
    /// A random Slater determinant (zero nonfreeness).
    Slater,
    /// A random unit vector in a random particle-number sector.
    Pure,
    /// A random ensemble of up to four sector-pure states.
    Mixed,
    /// A state with sharp particle number on a random bipartition's part 1,
    /// so its 1-PDM splits as a direct sum across the cut.
    BlockIndependent,
}

/// A random orthonormal frame of `n` orbitals in `d` modes (QR of a
/// complex Ginibre matrix).
pub fn random_orbital_frame(d: ModeCount, n: usize, rng: &mut ChaCha8Rng) -> Result<OrbitalMatrix> {
    let g = DMatrix::from_fn(d.get(), n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    OrbitalMatrix::new(g.qr().q())
}

fn random_sector_vector(dim: usize, rng: &mut ChaCha8Rng) -> DVector<Complex64> {
    let mut v = DVector::from_fn(dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let norm = v.norm();
    v /= Complex64::from(norm);
    v
}

fn random_weights(k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| -rng.gen::<f64>().max(1e-12).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Deterministic random state of the given kind; the same `(kind, d, seed)`
/// always reproduces the same state bit for bit. `BlockIndependent` also
/// returns the bipartition whose part 1 carries the sharp particle number.
pub fn random_state(
    kind: RandomKind,
    d: ModeCount,
    seed: u64,
) -> Result<(DensityOperator, Option<Bipartition>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        RandomKind::Slater => {
            let n = if d.get() == 1 {
                1
            } else {
                rng.gen_range(1..d.get())
            };
            let frame = random_orbital_frame(d, n, &mut rng)?;
            let psi = slater_state(&frame)?;
            Ok((DensityOperator::from_pure(&psi)?, None))
        }
        RandomKind::Pure => {
            let n = if d.get() == 1 {
                1
            } else {
                rng.gen_range(1..d.get())
            };
            let sector = Sector::new(d, n);
            let psi = PureState::new(d, n, random_sector_vector(sector.dim(), &mut rng))?;
            Ok((DensityOperator::from_pure(&psi)?, None))
        }
        RandomKind::Mixed => {
            let k = rng.gen_range(2..=4usize);
            let weights = random_weights(k, &mut rng);
            let mut members = Vec::with_capacity(k);
            for w in weights {
                let n = rng.gen_range(0..=d.get());
                let sector = Sector::new(d, n);
                let psi = PureState::new(d, n, random_sector_vector(sector.dim(), &mut rng))?;
                members.push((w, psi));
            }
            Ok((
                DensityOperator::from_ensemble(&Ensemble::new(members)?)?,
                None,
            ))
        }
        RandomKind::BlockIndependent => {
            if d.get() < 2 {
                return Err(NonfreeError::InvalidParameter(
                    "block-independent states need at least 2 modes".into(),
                ));
            }
            let d1 = rng.gen_range(1..d.get());
            let mut modes: Vec<usize> = (0..d.get()).collect();
            for i in (1..modes.len()).rev() {
                let j = rng.gen_range(0..=i);
                modes.swap(i, j);
            }
            let mut part1: Vec<usize> = modes[..d1].to_vec();
            part1.sort_unstable();
            let bipartition = Bipartition::new(d, &part1)?;
            let mask1: u32 = part1.iter().map(|&m| 1u32 << m).sum();
            let d2 = d.get() - d1;
            let n1 = rng.gen_range(0..=d1);

            let k = rng.gen_range(1..=3usize);
            let weights = random_weights(k, &mut rng);
            let mut members = Vec::with_capacity(k);
            for w in weights {
                let n2 = rng.gen_range(0..=d2);
                let n = n1 + n2;
                let sector = Sector::new(d, n);
                let support: Vec<usize> = sector
                    .states()
                    .iter()
                    .enumerate()
                    .filter(|(_, occ)| (occ.bits() & mask1).count_ones() as usize == n1)
                    .map(|(i, _)| i)
                    .collect();
                let coeffs = random_sector_vector(support.len(), &mut rng);
                let mut amps = DVector::from_element(sector.dim(), Complex64::from(0.0));
                for (slot, &idx) in support.iter().enumerate() {
                    amps[idx] = coeffs[slot];
                }
                members.push((w, PureState::new(d, n, amps)?));
            }
            Ok((
                DensityOperator::from_ensemble(&Ensemble::new(members)?)?,
                Some(bipartition),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonfreeness::{nonfreeness, nonfreeness_pure, NonfreenessOptions};
    use crate::spectra::{one_pdm, one_pdm_pure};

    fn d(n: usize) -> ModeCount {
        ModeCount::new(n).unwrap()
    }

    #[test]
    fn slater_of_basis_frame_is_a_basis_state() {
        let mut m = DMatrix::from_element(3, 2, Complex64::from(0.0));
        m[(0, 0)] = Complex64::from(1.0);
        m[(1, 1)] = Complex64::from(1.0);
        let psi = slater_state(&OrbitalMatrix::new(m).unwrap()).unwrap();
        let occ = Occupation::new(d(3), 0b011).unwrap();
        assert!((psi.amplitude(occ) - Complex64::from(1.0)).norm() < 1e-14);
    }

    #[test]
    fn random_slater_is_free() {
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let frame = random_orbital_frame(d(6), 3, &mut rng).unwrap();
            let psi = slater_state(&frame).unwrap();
            assert!(nonfreeness_pure(&psi).unwrap() < 1e-9);
        }
    }

    #[test]
    fn column_mixing_leaves_the_state_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let frame = random_orbital_frame(d(4), 2, &mut rng).unwrap();
        // Unitary 2x2 mix of the columns.
        let theta: f64 = 0.42;
        let mix = DMatrix::from_column_slice(
            2,
            2,
            &[
                Complex64::from(theta.cos()),
                Complex64::new(0.0, theta.sin()),
                Complex64::new(0.0, theta.sin()),
                Complex64::from(theta.cos()),
            ],
        );
        let mixed = OrbitalMatrix::new(frame.matrix() * mix).unwrap();
        let a = DensityOperator::from_pure(&slater_state(&frame).unwrap()).unwrap();
        let b = DensityOperator::from_pure(&slater_state(&mixed).unwrap()).unwrap();
        assert!(a.frobenius_distance(&b).unwrap() < 1e-12);
    }

    #[test]
    fn double_slater_values() {
        assert!(nonfreeness_pure(&double_slater(1).unwrap()).unwrap() < 1e-12);
        let two = nonfreeness_pure(&double_slater(2).unwrap()).unwrap();
        assert!((two - 4.0).abs() < 1e-12);
        let three = nonfreeness_pure(&double_slater(3).unwrap()).unwrap();
        assert!((three - 6.0).abs() < 1e-12);
    }

    #[test]
    fn heisenberg_two_sites_is_the_singlet() {
        let spec = LatticeSpec::new(2, Geometry::Chain).unwrap();
        let psi = heisenberg_ground_fermionic(spec).unwrap();
        // (up,down) -> modes {0,3}; (down,up) -> modes {1,2}.
        let a = psi.amplitude(Occupation::new(d(4), 0b1001).unwrap());
        let b = psi.amplitude(Occupation::new(d(4), 0b0110).unwrap());
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        assert!((a.norm() - inv).abs() < 1e-12);
        assert!((b.norm() - inv).abs() < 1e-12);
        assert!((a + b).norm() < 1e-12, "singlet amplitudes must cancel");
        assert!((nonfreeness_pure(&psi).unwrap() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn heisenberg_has_one_electron_per_site() {
        let spec = LatticeSpec::new(4, Geometry::Ring).unwrap();
        let psi = heisenberg_ground_fermionic(spec).unwrap();
        let sector = psi.sector();
        for (i, occ) in sector.states().iter().enumerate() {
            if psi.amplitudes()[i].norm() > 1e-12 {
                for site in 0..4 {
                    let per_site = (occ.bits() >> (2 * site)) & 0b11;
                    assert_eq!(per_site.count_ones(), 1, "site {site} of {occ:?}");
                }
            }
        }
    }

    #[test]
    fn heisenberg_ring_gamma_is_half_identity() {
        let spec = LatticeSpec::new(4, Geometry::Ring).unwrap();
        let psi = heisenberg_ground_fermionic(spec).unwrap();
        let gamma = one_pdm_pure(&psi);
        let half = DMatrix::from_diagonal_element(8, 8, Complex64::from(0.5));
        assert!((gamma.matrix() - half).norm() < 1e-9);
        assert!((nonfreeness_pure(&psi).unwrap() - 8.0).abs() < 1e-8);
    }

    #[test]
    fn heisenberg_six_site_ring_scales() {
        let spec = LatticeSpec::new(6, Geometry::Ring).unwrap();
        let psi = heisenberg_ground_fermionic(spec).unwrap();
        let gamma = one_pdm_pure(&psi);
        let half = DMatrix::from_diagonal_element(12, 12, Complex64::from(0.5));
        assert!((gamma.matrix() - half).norm() < 1e-9);
        assert!((nonfreeness_pure(&psi).unwrap() - 12.0).abs() < 1e-8);
    }

    #[test]
    fn single_site_restriction_weights() {
        // One site of the four-site ground state holds (0, 1/2, 1/2, 0)
        // over (empty, up, down, doubly occupied).
        let spec = LatticeSpec::new(4, Geometry::Ring).unwrap();
        let psi = heisenberg_ground_fermionic(spec).unwrap();
        let b = crate::fock::Bipartition::new(d(8), &[0, 1]).unwrap();
        let site = psi.restrict(&b).unwrap();
        assert!(site.block(0).map_or(0.0, |m| m[(0, 0)].norm()) < 1e-12);
        assert!(site.block(2).map_or(0.0, |m| m[(0, 0)].norm()) < 1e-12);
        let one = site.block(1).unwrap();
        assert!((one[(0, 0)] - Complex64::from(0.5)).norm() < 1e-12);
        assert!((one[(1, 1)] - Complex64::from(0.5)).norm() < 1e-12);
        assert!(one[(0, 1)].norm() < 1e-12);
        let report = nonfreeness(&site, NonfreenessOptions::default()).unwrap();
        assert!((report.nonfreeness - 1.0).abs() < 1e-9);
    }

    #[test]
    fn block_independent_gamma_splits() {
        for seed in 0..6 {
            let (op, bipartition) = random_state(RandomKind::BlockIndependent, d(6), seed).unwrap();
            let b = bipartition.unwrap();
            let gamma = one_pdm(&op);
            for &m1 in b.part1() {
                for &m2 in b.part2() {
                    assert!(gamma.matrix()[(m1, m2)].norm() < 1e-12);
                    assert!(gamma.matrix()[(m2, m1)].norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn generators_are_deterministic() {
        for kind in [
            RandomKind::Slater,
            RandomKind::Pure,
            RandomKind::Mixed,
            RandomKind::BlockIndependent,
        ] {
            let (a, _) = random_state(kind, d(5), 99).unwrap();
            let (b, _) = random_state(kind, d(5), 99).unwrap();
            assert_eq!(a.sectors(), b.sectors());
            for (n, block) in a.blocks() {
                assert_eq!(block, b.block(n).unwrap());
            }
        }
    }

    #[test]
    fn random_states_are_valid() {
        for kind in [
            RandomKind::Slater,
            RandomKind::Pure,
            RandomKind::Mixed,
            RandomKind::BlockIndependent,
        ] {
            for seed in 0..4 {
                let (op, _) = random_state(kind, d(5), seed).unwrap();
                op.validate().unwrap();
                let report = nonfreeness(&op, NonfreenessOptions::default()).unwrap();
                assert!(report.nonfreeness.is_finite());
            }
        }
    }

    #[test]
    fn lattice_spec_validation() {
        assert!(LatticeSpec::new(3, Geometry::Ring).is_err());
        assert!(LatticeSpec::new(0, Geometry::Ring).is_err());
        assert!(LatticeSpec::new(10, Geometry::Ring).is_err());
        assert!(LatticeSpec::new(8, Geometry::Chain).is_ok());
    }
}
