//! 1-particle density matrices, natural occupations and the entropy
//! toolbox.
//!
//! All entropies are returned in bits. The relative entropy follows the
//! eigenpair double-sum valid when the kernel of the reference state
//! contains the kernel of the state, with `+∞` returned when an eigenvector
//! of the state carries more than [`tol::KERNEL`] weight outside the range
//! of the reference.

use std::collections::BTreeSet;
use std::f64::consts::LN_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::eigen::{hermitian_eigen, hermitian_eigenvalues};
use crate::error::{NonfreeError, Result};
use crate::fock::{ModeCount, OrbitalMatrix, Sector};
use crate::states::{DensityOperator, PureState};
use crate::tol;

/// The 1-particle statistical operator of a state: the `d × d` Hermitian
/// matrix with entries `γ[h][g] = Tr(Δ a†_g a_h)`, spectrum in [0, 1] and
/// trace equal to the expected particle number.
#[derive(Debug, Clone)]
pub struct OnePdm {
    d: ModeCount,
    gamma: DMatrix<Complex64>,
}

impl OnePdm {
    /// Wraps a `d × d` matrix, checking Hermiticity; the spectrum bound is
    /// checked when the eigenvalues are extracted.
    pub fn new(gamma: DMatrix<Complex64>) -> Result<Self> {
        let d = ModeCount::new(gamma.nrows())?;
        if gamma.ncols() != gamma.nrows() {
            return Err(NonfreeError::DimensionMismatch(format!(
                "1-PDM must be square, got {}x{}",
                gamma.nrows(),
                gamma.ncols()
            )));
        }
        let mut asym = 0.0f64;
        for i in 0..gamma.nrows() {
            for j in i..gamma.ncols() {
                let entry = gamma[(i, j)];
                if !entry.re.is_finite() || !entry.im.is_finite() {
                    return Err(NonfreeError::Numerical(
                        "1-PDM contains a non-finite entry".into(),
                    ));
                }
                asym = asym.max((entry - gamma[(j, i)].conj()).norm());
            }
        }
        if asym > tol::HERM {
            return Err(NonfreeError::NotHermitian(asym));
        }
        Ok(OnePdm { d, gamma })
    }

    #[inline]
    pub fn mode_count(&self) -> ModeCount {
        self.d
    }

    #[inline]
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.gamma
    }

    pub fn trace(&self) -> f64 {
        self.gamma.trace().re
    }

    /// Compression to the given modes: the principal submatrix.
    pub fn compress(&self, modes: &[usize]) -> Result<OnePdm> {
        for &m in modes {
            if m >= self.d.get() {
                return Err(NonfreeError::InvalidParameter(format!(
                    "mode {m} out of range for {} modes",
                    self.d
                )));
            }
        }
        let sub = self.gamma.select_rows(modes.iter()).select_columns(modes.iter());
        OnePdm::new(sub)
    }
}

/// Eigenvalues (descending, clipped to [0, 1]) and phase-fixed eigenvectors
/// of a 1-PDM.
#[derive(Debug, Clone)]
pub struct NaturalSpectrum {
    /// Natural occupation probabilities, descending.
    pub occupations: Vec<f64>,
    /// Natural orbitals; column `j` belongs to `occupations[j]`.
    pub orbitals: OrbitalMatrix,
    /// Largest amount any raw eigenvalue was clipped to reach [0, 1].
    pub clip_magnitude: f64,
}

impl NaturalSpectrum {
    /// Number of occupations above [`tol::RANK`].
    pub fn rank(&self) -> usize {
        self.occupations.iter().filter(|&&p| p > tol::RANK).count()
    }
}

/// The 1-particle density matrix of a number-block density operator,
/// contracted blockwise through the creator/annihilator actions and
/// symmetrized.
pub fn one_pdm(delta: &DensityOperator) -> OnePdm {
    let d = delta.mode_count();
    let mut gamma = DMatrix::from_element(d.get(), d.get(), Complex64::from(0.0));
    for (n, block) in delta.blocks() {
        let sector = Sector::new(d, n);
        for (ix, x) in sector.states().iter().enumerate() {
            for h in x.occupied_modes() {
                let (x1, s1) = x.annihilate(h).unwrap();
                for g in 0..d.get() {
                    if x1.contains(g) {
                        continue;
                    }
                    let (y, s2) = x1.create(g).unwrap();
                    let iy = sector.index_of(y).unwrap();
                    gamma[(h, g)] += (s1 * s2) as f64 * block[(ix, iy)];
                }
            }
        }
    }
    symmetrize(&mut gamma);
    OnePdm {
        d,
        gamma,
    }
}

/// The 1-PDM of a pure state, contracted directly from the amplitudes
/// (the sector projector is never formed).
pub fn one_pdm_pure(psi: &PureState) -> OnePdm {
    let d = psi.mode_count();
    let sector = psi.sector();
    let amps = psi.amplitudes();
    let mut gamma = DMatrix::from_element(d.get(), d.get(), Complex64::from(0.0));
    for (ix, x) in sector.states().iter().enumerate() {
        for h in x.occupied_modes() {
            let (x1, s1) = x.annihilate(h).unwrap();
            for g in 0..d.get() {
                if x1.contains(g) {
                    continue;
                }
                let (y, s2) = x1.create(g).unwrap();
                let iy = sector.index_of(y).unwrap();
                gamma[(h, g)] += (s1 * s2) as f64 * amps[ix] * amps[iy].conj();
            }
        }
    }
    symmetrize(&mut gamma);
    OnePdm {
        d,
        gamma,
    }
}

fn symmetrize(m: &mut DMatrix<Complex64>) {
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * Complex64::from(0.5);
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
        m[(i, i)] = Complex64::from(m[(i, i)].re);
    }
}

/// Full eigendecomposition of a 1-PDM: occupations sorted descending and
/// clipped to [0, 1], eigenvector phases fixed so the largest-magnitude
/// component is real positive. Raw eigenvalues leaving [0, 1] by more than
/// [`tol::SPECTRUM`] are an error.
pub fn natural_spectrum(gamma: &OnePdm) -> Result<NaturalSpectrum> {
    let eig = hermitian_eigen(&gamma.gamma)?;
    let d = gamma.d.get();
    let mut occupations = Vec::with_capacity(d);
    let mut orbitals = DMatrix::from_element(d, d, Complex64::from(0.0));
    let mut clip = 0.0f64;
    // Eigenvalues come back ascending; occupations are reported descending.
    for (col, src) in (0..d).rev().enumerate() {
        let raw = eig.values[src];
        let clipped = raw.clamp(0.0, 1.0);
        let excess = (raw - clipped).abs();
        if excess > tol::SPECTRUM {
            return Err(NonfreeError::SpectrumBound(excess));
        }
        clip = clip.max(excess);
        occupations.push(clipped);
        let mut column = eig.vectors.column(src).clone_owned();
        phase_fix(&mut column);
        orbitals.set_column(col, &column);
    }
    Ok(NaturalSpectrum {
        occupations,
        orbitals: OrbitalMatrix::new(orbitals)?,
        clip_magnitude: clip,
    })
}

fn phase_fix(column: &mut DVector<Complex64>) {
    let mut best = 0usize;
    let mut best_mag = 0.0f64;
    for (i, z) in column.iter().enumerate() {
        let mag = z.norm();
        if mag > best_mag {
            best_mag = mag;
            best = i;
        }
    }
    if best_mag > 0.0 {
        let phase = column[best] / Complex64::from(best_mag);
        for z in column.iter_mut() {
            *z /= phase;
        }
    }
}

fn block_entropy_nats(block: &DMatrix<Complex64>) -> f64 {
    hermitian_eigenvalues(block)
        .expect("QL converges on validated Hermitian blocks")
        .iter()
        .map(|&lambda| {
            if lambda > tol::ZERO {
                -lambda * lambda.ln()
            } else {
                0.0
            }
        })
        .sum()
}

/// Von Neumann entropy `-Tr(Δ log₂ Δ)` in bits, summed over the number
/// blocks; eigenvalues below [`tol::ZERO`] contribute nothing.
pub fn von_neumann_entropy_bits(delta: &DensityOperator) -> f64 {
    let nats: f64 = delta.blocks().map(|(_, b)| block_entropy_nats(b)).sum();
    nats / LN_2
}

/// Relative entropy `S(D | G)` in bits between two number-block density
/// operators on the same modes, or `+∞` when the support of `D` leaves the
/// range of `G` by more than [`tol::KERNEL`].
pub fn relative_entropy_bits(d_op: &DensityOperator, g_op: &DensityOperator) -> Result<f64> {
    if d_op.mode_count() != g_op.mode_count() {
        return Err(NonfreeError::DimensionMismatch(format!(
            "{} vs {} modes",
            d_op.mode_count(),
            g_op.mode_count()
        )));
    }
    let sectors: BTreeSet<usize> = d_op
        .sectors()
        .into_iter()
        .chain(g_op.sectors())
        .collect();
    let mut nats = 0.0f64;
    for n in sectors {
        match (d_op.block(n), g_op.block(n)) {
            (None, None) => {}
            (None, Some(g)) => {
                // d_j = 0 across the sector; only the g_k terms survive.
                for &gk in hermitian_eigenvalues(g)?.iter() {
                    if gk > tol::ZERO {
                        nats += gk;
                    }
                }
            }
            (Some(d), None) => {
                if d.trace().re > tol::KERNEL {
                    return Ok(f64::INFINITY);
                }
            }
            (Some(d), Some(g)) => {
                let deig = hermitian_eigen(d)?;
                let geig = hermitian_eigen(g)?;
                let overlap = deig.vectors.adjoint() * &geig.vectors;
                let range: Vec<usize> = (0..geig.values.len())
                    .filter(|&k| geig.values[k] > tol::ZERO)
                    .collect();
                for j in 0..deig.values.len() {
                    let dj = deig.values[j].max(0.0);
                    let weights: Vec<f64> =
                        range.iter().map(|&k| overlap[(j, k)].norm_sqr()).collect();
                    if dj > tol::ZERO {
                        let leak = 1.0 - weights.iter().sum::<f64>();
                        if leak > tol::KERNEL {
                            return Ok(f64::INFINITY);
                        }
                    }
                    for (&k, &w) in range.iter().zip(&weights) {
                        let gk = geig.values[k];
                        let mut term = gk - dj;
                        if dj > tol::ZERO {
                            term += dj * dj.ln() - dj * gk.ln();
                        }
                        nats += w * term;
                    }
                }
            }
        }
    }
    if nats < 0.0 {
        if nats < -tol::CMP * LN_2 {
            return Err(NonfreeError::Numerical(format!(
                "relative entropy evaluated to {nats} nats"
            )));
        }
        nats = 0.0;
    }
    Ok(nats / LN_2)
}

/// Principal square root of a Hermitian positive semidefinite matrix via
/// eigendecomposition; negative eigenvalues within tolerance clip to zero.
pub fn matrix_sqrt(m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let mut asym = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            asym = asym.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    if asym > tol::HERM {
        return Err(NonfreeError::NotHermitian(asym));
    }
    let eig = hermitian_eigen(m)?;
    let mut scaled = eig.vectors.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= Complex64::from(eig.values[k].max(0.0).sqrt());
    }
    Ok(&scaled * eig.vectors.adjoint())
}
