//! Pure and mixed fermion states and their algebra.
//!
//! Mixed states are kept number-block-diagonal throughout: a
//! [`DensityOperator`] is a map from particle number to a dense Hermitian
//! positive block on that sector, which encodes commutation with the number
//! operator structurally. Coherences across particle-number sectors are
//! rejected at construction.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{NonfreeError, Result};
use crate::fock::{binomial, relabel_occupation, relabel_sign, Bipartition, ModeCount, Occupation, Sector};
use crate::{tol, MAX_MODES_DENSE};

/// A normalized state vector confined to one particle-number sector,
/// stored dense over the sector basis of [`Sector`].
#[derive(Debug, Clone)]
pub struct PureState {
    d: ModeCount,
    particles: usize,
    amps: DVector<Complex64>,
}

impl PureState {
    /// Wraps an amplitude vector over the `particles`-sector basis; the
    /// vector must already be normalized to within [`tol::NORM`].
    pub fn new(d: ModeCount, particles: usize, amps: DVector<Complex64>) -> Result<Self> {
        let dim = binomial(d.get(), particles);
        if particles > d.get() || amps.len() != dim {
            return Err(NonfreeError::DimensionMismatch(format!(
                "expected {dim} amplitudes for {particles} particles in {d} modes, got {}",
                amps.len()
            )));
        }
        let norm = amps.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > tol::NORM {
            return Err(NonfreeError::NormViolation(format!(
                "pure-state norm {norm} differs from 1"
            )));
        }
        Ok(PureState { d, particles, amps })
    }

    /// Builds a state from sparse (occupation, amplitude) pairs. All
    /// occupations must share one particle number.
    pub fn from_amplitudes(d: ModeCount, pairs: &[(Occupation, Complex64)]) -> Result<Self> {
        let Some(first) = pairs.first() else {
            return Err(NonfreeError::NormViolation("no amplitudes given".into()));
        };
        let particles = first.0.particle_count();
        let sector = Sector::new(d, particles);
        let mut amps = DVector::from_element(sector.dim(), Complex64::from(0.0));
        for &(occ, amp) in pairs {
            if occ.mode_count() != d {
                return Err(NonfreeError::DimensionMismatch(format!(
                    "occupation on {} modes in a {d}-mode state",
                    occ.mode_count()
                )));
            }
            if occ.particle_count() != particles {
                return Err(NonfreeError::NumberSymmetryViolation(format!(
                    "amplitudes span particle numbers {particles} and {}",
                    occ.particle_count()
                )));
            }
            let idx = sector.index_of(occ).expect("occupation is in its sector");
            amps[idx] += amp;
        }
        PureState::new(d, particles, amps)
    }

    /// The basis vector `a†_s Ω` itself.
    pub fn basis_state(occ: Occupation) -> Self {
        let d = occ.mode_count();
        let sector = Sector::new(d, occ.particle_count());
        let mut amps = DVector::from_element(sector.dim(), Complex64::from(0.0));
        amps[sector.index_of(occ).unwrap()] = Complex64::from(1.0);
        PureState {
            d,
            particles: occ.particle_count(),
            amps,
        }
    }

    #[inline]
    pub fn mode_count(&self) -> ModeCount {
        self.d
    }

    #[inline]
    pub fn particles(&self) -> usize {
        self.particles
    }

    #[inline]
    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn sector(&self) -> Sector {
        Sector::new(self.d, self.particles)
    }

    pub fn amplitude(&self, occ: Occupation) -> Complex64 {
        match self.sector().index_of(occ) {
            Some(i) => self.amps[i],
            None => Complex64::from(0.0),
        }
    }

    /// Restriction over the part-1 modes of `b`: the partial trace of
    /// `|ψ⟩⟨ψ|` over the part-2 Fock factor, computed directly from the
    /// amplitudes so the global projector is never materialized.
    pub fn restrict(&self, b: &Bipartition) -> Result<DensityOperator> {
        if b.mode_count() != self.d {
            return Err(NonfreeError::DimensionMismatch(format!(
                "bipartition on {} modes applied to {}-mode state",
                b.mode_count(),
                self.d
            )));
        }
        let d1 = b.part1_modes();
        check_dense_capacity(d1)?;
        let sector = self.sector();
        // Group the support by the part-2 factor; each group contributes a
        // signed outer product to one part-1 block.
        let mut groups: BTreeMap<u32, Vec<(usize, f64, usize)>> = BTreeMap::new();
        let sectors1: Vec<Sector> = (0..=d1.get()).map(|n| Sector::new(d1, n)).collect();
        for (idx, occ) in sector.states().iter().enumerate() {
            let split = b.split(*occ);
            let n1 = split.part1.particle_count();
            let i1 = sectors1[n1].index_of(split.part1).unwrap();
            groups
                .entry(split.part2.bits())
                .or_default()
                .push((i1, split.sign as f64, idx));
        }
        let mut blocks: BTreeMap<usize, DMatrix<Complex64>> = BTreeMap::new();
        for (bits2, members) in groups {
            let n1 = sector.particles() - (bits2.count_ones() as usize);
            let dim = sectors1[n1].dim();
            let block = blocks
                .entry(n1)
                .or_insert_with(|| DMatrix::from_element(dim, dim, Complex64::from(0.0)));
            for &(ia, sa, idxa) in &members {
                for &(ib, sb, idxb) in &members {
                    block[(ia, ib)] += sa * sb * self.amps[idxa] * self.amps[idxb].conj();
                }
            }
        }
        DensityOperator::from_blocks_trusted(d1, blocks)
    }
}

/// A convex mixture of sector-pure states, the input format for mixed
/// states.
#[derive(Debug, Clone)]
pub struct Ensemble {
    members: Vec<(f64, PureState)>,
}

impl Ensemble {
    pub fn new(members: Vec<(f64, PureState)>) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(NonfreeError::NormViolation("empty ensemble".into()));
        };
        let d = first.1.mode_count();
        let mut total = 0.0;
        for (w, psi) in &members {
            if !w.is_finite() || *w < 0.0 {
                return Err(NonfreeError::NormViolation(format!(
                    "bad ensemble weight {w}"
                )));
            }
            if psi.mode_count() != d {
                return Err(NonfreeError::DimensionMismatch(
                    "ensemble members disagree on mode count".into(),
                ));
            }
            total += w;
        }
        if (total - 1.0).abs() > tol::NORM {
            return Err(NonfreeError::NormViolation(format!(
                "ensemble weights sum to {total}"
            )));
        }
        Ok(Ensemble { members })
    }

    pub fn members(&self) -> &[(f64, PureState)] {
        &self.members
    }

    pub fn mode_count(&self) -> ModeCount {
        self.members[0].1.mode_count()
    }
}

/// A number-block-diagonal density operator: one dense Hermitian positive
/// block per particle-number sector, with block traces summing to one.
/// Absent sectors are zero.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    d: ModeCount,
    blocks: BTreeMap<usize, DMatrix<Complex64>>,
}

fn check_dense_capacity(d: ModeCount) -> Result<()> {
    if d.get() > MAX_MODES_DENSE {
        return Err(NonfreeError::CapacityExceeded(format!(
            "dense density-operator blocks are limited to {MAX_MODES_DENSE} modes, got {d}"
        )));
    }
    Ok(())
}

impl DensityOperator {
    /// Builds and fully validates a density operator from sector blocks:
    /// block dimensions, Hermiticity, positive semidefiniteness and unit
    /// total trace are all checked.
    pub fn from_blocks(d: ModeCount, blocks: BTreeMap<usize, DMatrix<Complex64>>) -> Result<Self> {
        let op = DensityOperator::from_blocks_trusted(d, blocks)?;
        op.validate()?;
        Ok(op)
    }

    /// Builds a density operator checking only capacity and block shapes;
    /// for internal constructions whose invariants hold algebraically.
    pub(crate) fn from_blocks_trusted(
        d: ModeCount,
        blocks: BTreeMap<usize, DMatrix<Complex64>>,
    ) -> Result<Self> {
        check_dense_capacity(d)?;
        for (&n, block) in &blocks {
            let dim = binomial(d.get(), n);
            if n > d.get() || block.nrows() != dim || block.ncols() != dim {
                return Err(NonfreeError::DimensionMismatch(format!(
                    "sector {n} of a {d}-mode state must be {dim}x{dim}, got {}x{}",
                    block.nrows(),
                    block.ncols()
                )));
            }
        }
        Ok(DensityOperator { d, blocks })
    }

    /// The vacuum state `|Ω⟩⟨Ω|`.
    pub fn vacuum(d: ModeCount) -> Result<Self> {
        check_dense_capacity(d)?;
        let mut blocks = BTreeMap::new();
        blocks.insert(0, DMatrix::from_element(1, 1, Complex64::from(1.0)));
        Ok(DensityOperator { d, blocks })
    }

    /// Embeds a pure state as the rank-1 projector on its sector.
    pub fn from_pure(psi: &PureState) -> Result<Self> {
        check_dense_capacity(psi.mode_count())?;
        let mut blocks = BTreeMap::new();
        let amps = psi.amplitudes();
        blocks.insert(psi.particles(), amps * amps.adjoint());
        Ok(DensityOperator {
            d: psi.mode_count(),
            blocks,
        })
    }

    /// Weighted sum of member projectors, accumulated per number block.
    pub fn from_ensemble(e: &Ensemble) -> Result<Self> {
        let d = e.mode_count();
        check_dense_capacity(d)?;
        let mut blocks: BTreeMap<usize, DMatrix<Complex64>> = BTreeMap::new();
        for (w, psi) in e.members() {
            let amps = psi.amplitudes();
            let dim = amps.len();
            let block = blocks
                .entry(psi.particles())
                .or_insert_with(|| DMatrix::from_element(dim, dim, Complex64::from(0.0)));
            let proj = amps * amps.adjoint();
            *block += proj * Complex64::from(*w);
        }
        Ok(DensityOperator { d, blocks })
    }

    #[inline]
    pub fn mode_count(&self) -> ModeCount {
        self.d
    }

    pub fn block(&self, particles: usize) -> Option<&DMatrix<Complex64>> {
        self.blocks.get(&particles)
    }

    pub fn blocks(&self) -> impl Iterator<Item = (usize, &DMatrix<Complex64>)> {
        self.blocks.iter().map(|(&n, b)| (n, b))
    }

    /// Particle numbers of the stored (possibly zero-weight) sectors.
    pub fn sectors(&self) -> Vec<usize> {
        self.blocks.keys().copied().collect()
    }

    pub fn trace(&self) -> f64 {
        self.blocks
            .values()
            .map(|b| b.trace().re)
            .sum()
    }

    /// `Tr(Δ N) = Σ_n n · tr(block_n)`.
    pub fn expected_particle_number(&self) -> f64 {
        self.blocks
            .iter()
            .map(|(&n, b)| n as f64 * b.trace().re)
            .sum()
    }

    /// Checks the stored blocks against the density-operator invariants:
    /// Hermitian within [`tol::HERM`], eigenvalues above `-`[`tol::PSD`],
    /// and total trace 1 within [`tol::NORM`].
    pub fn validate(&self) -> Result<()> {
        let mut total = 0.0;
        for block in self.blocks.values() {
            let mut asym = 0.0f64;
            for i in 0..block.nrows() {
                for j in i..block.ncols() {
                    let entry = block[(i, j)];
                    if !entry.re.is_finite() || !entry.im.is_finite() {
                        return Err(NonfreeError::Numerical(
                            "density block contains a non-finite entry".into(),
                        ));
                    }
                    asym = asym.max((entry - block[(j, i)].conj()).norm());
                }
            }
            if asym > tol::HERM {
                return Err(NonfreeError::NotHermitian(asym));
            }
            let eigs = crate::eigen::hermitian_eigenvalues(block)?;
            let min = eigs.first().copied().unwrap_or(0.0);
            if min < -tol::PSD {
                return Err(NonfreeError::NotPositive(min));
            }
            total += block.trace().re;
        }
        if (total - 1.0).abs() > tol::NORM {
            return Err(NonfreeError::NormViolation(format!(
                "block traces sum to {total}"
            )));
        }
        Ok(())
    }

    /// Independent composition: the joint state on `d₁ + d₂` modes whose
    /// restrictions recover the two factors. Factor-1 modes come first.
    pub fn tensor_product(&self, other: &DensityOperator) -> Result<DensityOperator> {
        let d1 = self.d.get();
        let d = ModeCount::new(d1 + other.d.get()).map_err(|_| {
            NonfreeError::CapacityExceeded(format!(
                "tensor product needs {} modes",
                d1 + other.d.get()
            ))
        })?;
        check_dense_capacity(d)?;
        let sectors: Vec<Sector> = (0..=d.get()).map(|n| Sector::new(d, n)).collect();
        let mut blocks: BTreeMap<usize, DMatrix<Complex64>> = BTreeMap::new();
        for (na, a) in self.blocks() {
            let sector_a = Sector::new(self.d, na);
            for (nb, bm) in other.blocks() {
                let sector_b = Sector::new(other.d, nb);
                let n = na + nb;
                let dim = sectors[n].dim();
                let block = blocks
                    .entry(n)
                    .or_insert_with(|| DMatrix::from_element(dim, dim, Complex64::from(0.0)));
                // With factor-1 modes below factor-2 modes the basis map
                // a†_{s∪s'}Ω ↔ a†_sΩ ⊗ a†_{s'}Ω carries no sign.
                for (ia, xa) in sector_a.states().iter().enumerate() {
                    for (ja, ya) in sector_a.states().iter().enumerate() {
                        let ael = a[(ia, ja)];
                        if ael == Complex64::from(0.0) {
                            continue;
                        }
                        for (ib, xb) in sector_b.states().iter().enumerate() {
                            for (jb, yb) in sector_b.states().iter().enumerate() {
                                let x = Occupation::new(d, xa.bits() | (xb.bits() << d1)).unwrap();
                                let y = Occupation::new(d, ya.bits() | (yb.bits() << d1)).unwrap();
                                let ix = sectors[n].index_of(x).unwrap();
                                let iy = sectors[n].index_of(y).unwrap();
                                block[(ix, iy)] += ael * bm[(ib, jb)];
                            }
                        }
                    }
                }
            }
        }
        DensityOperator::from_blocks_trusted(d, blocks)
    }

    /// Restriction over the part-1 modes of `b`: the fermionic partial
    /// trace over the part-2 Fock factor.
    pub fn restrict(&self, b: &Bipartition) -> Result<DensityOperator> {
        if b.mode_count() != self.d {
            return Err(NonfreeError::DimensionMismatch(format!(
                "bipartition on {} modes applied to {}-mode state",
                b.mode_count(),
                self.d
            )));
        }
        let d1 = b.part1_modes();
        let sectors1: Vec<Sector> = (0..=d1.get()).map(|n| Sector::new(d1, n)).collect();
        let mut blocks: BTreeMap<usize, DMatrix<Complex64>> = BTreeMap::new();
        for (n, block) in self.blocks() {
            let sector = Sector::new(self.d, n);
            let mut groups: BTreeMap<u32, Vec<(usize, f64, usize)>> = BTreeMap::new();
            for (idx, occ) in sector.states().iter().enumerate() {
                let split = b.split(*occ);
                let n1 = split.part1.particle_count();
                let i1 = sectors1[n1].index_of(split.part1).unwrap();
                groups
                    .entry(split.part2.bits())
                    .or_default()
                    .push((i1, split.sign as f64, idx));
            }
            for (bits2, members) in groups {
                let n1 = n - bits2.count_ones() as usize;
                let dim = sectors1[n1].dim();
                let out = blocks
                    .entry(n1)
                    .or_insert_with(|| DMatrix::from_element(dim, dim, Complex64::from(0.0)));
                for &(ia, sa, idxa) in &members {
                    for &(ib, sb, idxb) in &members {
                        out[(ia, ib)] += sa * sb * block[(idxa, idxb)];
                    }
                }
            }
        }
        DensityOperator::from_blocks_trusted(d1, blocks)
    }

    /// Relabels modes under `perm[old_mode] = new_mode`, applying the
    /// fermionic reordering signs on both index legs.
    pub fn permuted_modes(&self, perm: &[usize]) -> Result<DensityOperator> {
        let d = self.d.get();
        let mut seen = vec![false; d];
        for &p in perm {
            if p >= d || seen[p] {
                return Err(NonfreeError::InvalidParameter(
                    "mode relabeling is not a permutation".into(),
                ));
            }
            seen[p] = true;
        }
        if perm.len() != d {
            return Err(NonfreeError::InvalidParameter(
                "mode relabeling is not a permutation".into(),
            ));
        }
        let mut blocks: BTreeMap<usize, DMatrix<Complex64>> = BTreeMap::new();
        for (n, block) in self.blocks() {
            let sector = Sector::new(self.d, n);
            let mapped: Vec<(usize, f64)> = sector
                .states()
                .iter()
                .map(|&occ| {
                    let img = relabel_occupation(occ, perm);
                    (
                        sector.index_of(img).unwrap(),
                        relabel_sign(occ, perm) as f64,
                    )
                })
                .collect();
            let mut out = DMatrix::from_element(sector.dim(), sector.dim(), Complex64::from(0.0));
            for (ix, &(px, sx)) in mapped.iter().enumerate() {
                for (iy, &(py, sy)) in mapped.iter().enumerate() {
                    out[(px, py)] = sx * sy * block[(ix, iy)];
                }
            }
            blocks.insert(n, out);
        }
        DensityOperator::from_blocks_trusted(self.d, blocks)
    }

    /// Basis change that moves the part-1 modes of `b` to the front (in
    /// part order), so the result compares directly against
    /// [`DensityOperator::tensor_product`] outputs.
    pub fn relabeled(&self, b: &Bipartition) -> Result<DensityOperator> {
        let mut perm = vec![0usize; self.d.get()];
        for (i, &m) in b.part1().iter().enumerate() {
            perm[m] = i;
        }
        for (j, &m) in b.part2().iter().enumerate() {
            perm[m] = b.part1().len() + j;
        }
        self.permuted_modes(&perm)
    }

    /// Frobenius distance over the union of stored sectors.
    pub fn frobenius_distance(&self, other: &DensityOperator) -> Result<f64> {
        if self.d != other.d {
            return Err(NonfreeError::DimensionMismatch(format!(
                "{} vs {} modes",
                self.d, other.d
            )));
        }
        let mut acc = 0.0f64;
        let sectors: std::collections::BTreeSet<usize> = self
            .blocks
            .keys()
            .chain(other.blocks.keys())
            .copied()
            .collect();
        for n in sectors {
            let dim = binomial(self.d.get(), n);
            for i in 0..dim {
                for j in 0..dim {
                    let a = self
                        .block(n)
                        .map_or(Complex64::from(0.0), |b| b[(i, j)]);
                    let b = other
                        .block(n)
                        .map_or(Complex64::from(0.0), |bl| bl[(i, j)]);
                    acc += (a - b).norm_sqr();
                }
            }
        }
        Ok(acc.sqrt())
    }
}
