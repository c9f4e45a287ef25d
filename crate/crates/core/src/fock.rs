//! Occupation-number basis combinatorics and fermionic sign bookkeeping.
//!
//! A basis vector of the Fock space over `d` modes is a creator product
//! `a†_{s_n} ⋯ a†_{s_2} a†_{s_1} Ω` over an index set `s₁ < s₂ < … < s_n`,
//! encoded here as a bit pattern with mode 0 in the least significant bit.
//! With that ordering, applying a creator or annihilator for mode `j` picks
//! up the phase `(-1)^(number of occupied modes above j)`; all signs are
//! integer arithmetic and therefore exact.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{NonfreeError, Result};
use crate::{tol, MAX_MODES_PURE};

/// Number of 1-particle basis modes (spin-orbitals).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeCount(usize);

impl ModeCount {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 || d > MAX_MODES_PURE {
            return Err(NonfreeError::ModeCount(d, MAX_MODES_PURE));
        }
        Ok(ModeCount(d))
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    /// Dimension 2^d of the full Fock space.
    pub fn fock_dim(self) -> usize {
        1 << self.0
    }
}

impl std::fmt::Display for ModeCount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Binomial coefficient C(n, k).
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc as usize
}

/// A subset of modes encoded as a fixed-width bit pattern; one Fock basis
/// vector `a†_s Ω`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Occupation {
    bits: u32,
    d: u8,
}

impl Occupation {
    pub fn new(d: ModeCount, bits: u32) -> Result<Self> {
        if bits >> d.get() != 0 {
            return Err(NonfreeError::InvalidParameter(format!(
                "occupation pattern {bits:#b} has bits beyond mode count {d}"
            )));
        }
        Ok(Occupation {
            bits,
            d: d.get() as u8,
        })
    }

    pub fn vacuum(d: ModeCount) -> Self {
        Occupation {
            bits: 0,
            d: d.get() as u8,
        }
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn mode_count(self) -> ModeCount {
        ModeCount(self.d as usize)
    }

    /// Particle number of the basis vector.
    #[inline]
    pub fn particle_count(self) -> usize {
        self.bits.count_ones() as usize
    }

    #[inline]
    pub fn contains(self, mode: usize) -> bool {
        debug_assert!(mode < self.d as usize);
        self.bits & (1 << mode) != 0
    }

    /// Occupied mode indices in increasing order.
    pub fn occupied_modes(self) -> impl Iterator<Item = usize> {
        let bits = self.bits;
        (0..self.d as usize).filter(move |m| bits & (1 << m) != 0)
    }

    /// Applies the creator for `mode`. Returns `None` (Pauli exclusion) when
    /// the mode is already occupied, otherwise the new basis vector and the
    /// fermionic phase `(-1)^(occupied modes above `mode`)`.
    pub fn create(self, mode: usize) -> Option<(Occupation, i32)> {
        assert!(
            mode < self.d as usize,
            "mode index {mode} out of range for {} modes",
            self.d
        );
        let bit = 1u32 << mode;
        if self.bits & bit != 0 {
            return None;
        }
        Some((
            Occupation {
                bits: self.bits | bit,
                d: self.d,
            },
            parity_above(self.bits, mode),
        ))
    }

    /// Applies the annihilator for `mode`. Returns `None` when the mode is
    /// empty; the phase convention is the adjoint of [`Occupation::create`].
    pub fn annihilate(self, mode: usize) -> Option<(Occupation, i32)> {
        assert!(
            mode < self.d as usize,
            "mode index {mode} out of range for {} modes",
            self.d
        );
        let bit = 1u32 << mode;
        if self.bits & bit == 0 {
            return None;
        }
        Some((
            Occupation {
                bits: self.bits & !bit,
                d: self.d,
            },
            parity_above(self.bits, mode),
        ))
    }

    /// Bit pattern as a string of `0`/`1` with mode 0 leftmost.
    pub fn bitstring(self) -> String {
        (0..self.d as usize)
            .map(|m| if self.contains(m) { '1' } else { '0' })
            .collect()
    }
}

#[inline]
fn parity_above(bits: u32, mode: usize) -> i32 {
    if (bits >> (mode + 1)).count_ones() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// All `C(d, n)` occupation patterns with `n` particles, sorted ascending by
/// bit pattern. This ordering fixes the basis of every `n`-particle sector.
#[derive(Debug, Clone)]
pub struct Sector {
    d: ModeCount,
    particles: usize,
    states: Vec<Occupation>,
}

impl Sector {
    pub fn new(d: ModeCount, particles: usize) -> Self {
        let states = if particles > d.get() {
            Vec::new()
        } else if particles == 0 {
            vec![Occupation::vacuum(d)]
        } else {
            let mut v = Vec::with_capacity(binomial(d.get(), particles));
            // Gosper's hack walks the n-particle patterns in ascending order.
            let mut x: u32 = (1 << particles) - 1;
            let limit: u32 = 1 << d.get();
            while x < limit {
                v.push(Occupation {
                    bits: x,
                    d: d.get() as u8,
                });
                let c = x & x.wrapping_neg();
                let r = x + c;
                x = (((r ^ x) >> 2) / c) | r;
            }
            v
        };
        Sector {
            d,
            particles,
            states,
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
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    #[inline]
    pub fn states(&self) -> &[Occupation] {
        &self.states
    }

    /// Position of `occ` in the sector basis.
    pub fn index_of(&self, occ: Occupation) -> Option<usize> {
        if occ.mode_count() != self.d || occ.particle_count() != self.particles {
            return None;
        }
        self.states
            .binary_search_by_key(&occ.bits, |s| s.bits)
            .ok()
    }
}

/// A split of the `d` modes into two disjoint, jointly exhaustive parts.
///
/// Part 1 carries the subsystem of interest; both parts must be nonempty.
/// Basis vectors factor as `a†_{s∪s'} Ω ↔ ± a†_s Ω ⊗ a†_{s'} Ω` after
/// relabeling so that all part-1 modes precede all part-2 modes; the sign is
/// the parity of the permutation that sorts the occupied modes into
/// (part 1, part 2) order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    d: ModeCount,
    part1: Vec<usize>,
    part2: Vec<usize>,
    mask1: u32,
    mask2: u32,
}

/// The two factors and the fermionic sign produced by splitting a basis
/// vector across a [`Bipartition`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitOccupation {
    pub part1: Occupation,
    pub part2: Occupation,
    pub sign: i32,
}

impl Bipartition {
    /// Builds the bipartition with the given part-1 modes; the complement
    /// becomes part 2. Both parts must be nonempty.
    pub fn new(d: ModeCount, part1_modes: &[usize]) -> Result<Self> {
        let mut mask1: u32 = 0;
        for &m in part1_modes {
            if m >= d.get() {
                return Err(NonfreeError::InvalidParameter(format!(
                    "mode {m} out of range for {d} modes"
                )));
            }
            if mask1 & (1 << m) != 0 {
                return Err(NonfreeError::InvalidParameter(format!(
                    "mode {m} listed twice in bipartition"
                )));
            }
            mask1 |= 1 << m;
        }
        let full = ((1u64 << d.get()) - 1) as u32;
        let mask2 = full & !mask1;
        if mask1 == 0 || mask2 == 0 {
            return Err(NonfreeError::InvalidParameter(
                "both parts of a bipartition must be nonempty".into(),
            ));
        }
        let part1: Vec<usize> = (0..d.get()).filter(|m| mask1 & (1 << m) != 0).collect();
        let part2: Vec<usize> = (0..d.get()).filter(|m| mask2 & (1 << m) != 0).collect();
        Ok(Bipartition {
            d,
            part1,
            part2,
            mask1,
            mask2,
        })
    }

    #[inline]
    pub fn mode_count(&self) -> ModeCount {
        self.d
    }

    pub fn part1(&self) -> &[usize] {
        &self.part1
    }

    pub fn part2(&self) -> &[usize] {
        &self.part2
    }

    pub fn part1_modes(&self) -> ModeCount {
        ModeCount(self.part1.len())
    }

    pub fn part2_modes(&self) -> ModeCount {
        ModeCount(self.part2.len())
    }

    /// The same split with the roles of the parts exchanged.
    pub fn complement(&self) -> Bipartition {
        Bipartition {
            d: self.d,
            part1: self.part2.clone(),
            part2: self.part1.clone(),
            mask1: self.mask2,
            mask2: self.mask1,
        }
    }

    /// Factors a basis vector into its part-1 and part-2 components, with
    /// modes relabeled to `0..|part|` inside each factor, and the sorting
    /// parity relating `a†_x Ω` to `± a†_{x₁} Ω ⊗ a†_{x₂} Ω`.
    pub fn split(&self, occ: Occupation) -> SplitOccupation {
        assert_eq!(occ.mode_count(), self.d, "occupation/bipartition mismatch");
        let bits = occ.bits();
        let part1 = Occupation {
            bits: compress_bits(bits, &self.part1),
            d: self.part1.len() as u8,
        };
        let part2 = Occupation {
            bits: compress_bits(bits, &self.part2),
            d: self.part2.len() as u8,
        };
        SplitOccupation {
            part1,
            part2,
            sign: self.split_sign(bits),
        }
    }

    /// Reassembles a global basis vector from part components; the sign is
    /// the same one [`Bipartition::split`] reports for the result.
    pub fn join(&self, part1: Occupation, part2: Occupation) -> (Occupation, i32) {
        assert_eq!(part1.mode_count().get(), self.part1.len());
        assert_eq!(part2.mode_count().get(), self.part2.len());
        let bits = scatter_bits(part1.bits(), &self.part1) | scatter_bits(part2.bits(), &self.part2);
        (
            Occupation {
                bits,
                d: self.d.get() as u8,
            },
            self.split_sign(bits),
        )
    }

    /// Parity of pairs (occupied part-2 mode, occupied part-1 mode above it).
    #[inline]
    fn split_sign(&self, bits: u32) -> i32 {
        let mut swaps = 0u32;
        let mut p1 = bits & self.mask1;
        while p1 != 0 {
            let m = p1.trailing_zeros();
            swaps += (bits & self.mask2 & ((1 << m) - 1)).count_ones();
            p1 &= p1 - 1;
        }
        if swaps % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

#[inline]
fn compress_bits(bits: u32, modes: &[usize]) -> u32 {
    let mut out = 0u32;
    for (i, &m) in modes.iter().enumerate() {
        out |= ((bits >> m) & 1) << i;
    }
    out
}

#[inline]
fn scatter_bits(bits: u32, modes: &[usize]) -> u32 {
    let mut out = 0u32;
    for (i, &m) in modes.iter().enumerate() {
        out |= ((bits >> i) & 1) << m;
    }
    out
}

/// Sign of the basis relabeling `a†_x Ω → ± a†_{π(x)} Ω` under a mode
/// permutation `π` (given as `perm[old_mode] = new_mode`): the parity of the
/// inversions of the relabeled occupied list.
pub fn relabel_sign(occ: Occupation, perm: &[usize]) -> i32 {
    let mapped: Vec<usize> = occ.occupied_modes().map(|m| perm[m]).collect();
    let mut inversions = 0usize;
    for i in 0..mapped.len() {
        for j in (i + 1)..mapped.len() {
            if mapped[i] > mapped[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Relabels the modes of a basis vector under `perm[old_mode] = new_mode`.
pub fn relabel_occupation(occ: Occupation, perm: &[usize]) -> Occupation {
    let mut bits = 0u32;
    for m in occ.occupied_modes() {
        bits |= 1 << perm[m];
    }
    Occupation {
        bits,
        d: occ.d,
    }
}

/// A `d × n` complex matrix whose columns are pairwise orthonormal orbitals.
#[derive(Debug, Clone)]
pub struct OrbitalMatrix {
    mat: DMatrix<Complex64>,
}

impl OrbitalMatrix {
    pub fn new(mat: DMatrix<Complex64>) -> Result<Self> {
        let d = ModeCount::new(mat.nrows())?;
        if mat.ncols() > d.get() {
            return Err(NonfreeError::InvalidParameter(format!(
                "{} orbitals cannot be orthonormal in {} modes",
                mat.ncols(),
                d
            )));
        }
        let gram = mat.adjoint() * &mat;
        let mut worst = 0.0f64;
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - Complex64::from(expect)).norm());
            }
        }
        if worst > tol::ORTH {
            return Err(NonfreeError::NotOrthonormal(worst));
        }
        Ok(OrbitalMatrix { mat })
    }

    #[inline]
    pub fn mode_count(&self) -> ModeCount {
        ModeCount(self.mat.nrows())
    }

    #[inline]
    pub fn orbital_count(&self) -> usize {
        self.mat.ncols()
    }

    #[inline]
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    /// New frame made of the columns selected by `cols` (in the given order).
    pub fn select_columns(&self, cols: &[usize]) -> OrbitalMatrix {
        OrbitalMatrix {
            mat: self.mat.select_columns(cols.iter()),
        }
    }
}

/// Expands the creator product `a†_{u_n} ⋯ a†_{u_1} Ω` over the columns of
/// `u` into the occupation basis of the `n`-particle sector. The amplitude
/// of occupation `t` is the `n × n` minor of `u` on the rows of `t` (rows in
/// increasing mode order, columns in the given order); the result is
/// explicitly normalized.
pub fn slater_amplitudes(u: &OrbitalMatrix) -> (Sector, DVector<Complex64>) {
    let d = u.mode_count();
    let n = u.orbital_count();
    let sector = Sector::new(d, n);
    let mut amps = DVector::from_element(sector.dim(), Complex64::from(0.0));
    if n == 0 {
        amps[0] = Complex64::from(1.0);
        return (sector, amps);
    }
    let mut sub = DMatrix::from_element(n, n, Complex64::from(0.0));
    for (idx, occ) in sector.states().iter().enumerate() {
        for (row, mode) in occ.occupied_modes().enumerate() {
            for col in 0..n {
                sub[(row, col)] = u.matrix()[(mode, col)];
            }
        }
        amps[idx] = sub.clone().determinant();
    }
    let norm = amps.norm();
    if norm > 0.0 {
        amps /= Complex64::from(norm);
    }
    (sector, amps)
}
