//! The correlation measures: free-state construction, nonfreeness by two
//! independent routes, the pure-state and rank-2 closed forms, and the
//! fidelity-based variant.
//!
//! The primary route computes the nonfreeness of `Δ` as
//! `S(Γ) − S(Δ)` where `S(Γ) = −Σ pⱼ log₂ pⱼ − Σ (1−pⱼ) log₂(1−pⱼ)` over
//! the natural occupation probabilities; the optional cross-check assembles
//! the free state explicitly and evaluates the relative entropy
//! `S(Δ | Γ_{γ_Δ})` directly. The two agree on number-conserving states.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{NonfreeError, Result};
use crate::fock::slater_amplitudes;
use crate::spectra::{
    matrix_sqrt, natural_spectrum, one_pdm, one_pdm_pure, relative_entropy_bits,
    von_neumann_entropy_bits, OnePdm,
};
use crate::states::{DensityOperator, PureState};
use crate::{tol, MAX_MODES_DENSE};

/// Options for [`nonfreeness`] and [`nonfreeness_pure_report`].
#[derive(Debug, Clone, Copy, Default)]
pub struct NonfreenessOptions {
    /// Also assemble the free state and evaluate the relative-entropy route.
    pub cross_check: bool,
    /// Also evaluate the fidelity-based measure.
    pub corr: bool,
}

/// Everything the measures produce for one state. All entropies in bits.
#[derive(Debug, Clone)]
pub struct NonfreenessReport {
    /// Natural occupation probabilities, descending.
    pub occupations: Vec<f64>,
    /// Von Neumann entropy `S(Δ)`.
    pub entropy_state: f64,
    /// Entropy of the free reference, `−Σ pⱼ log₂ pⱼ − Σ (1−pⱼ) log₂(1−pⱼ)`.
    pub entropy_free: f64,
    /// The nonfreeness; `+∞` only when the cross-check route detects a
    /// kernel violation, which valid number-conserving inputs never produce.
    pub nonfreeness: f64,
    /// Relative-entropy route `S(Δ | Γ_{γ_Δ})`, when requested.
    pub cross_check: Option<f64>,
    /// Fidelity-based measure, when requested.
    pub corr_fidelity: Option<f64>,
    /// False when the cross-check found state weight outside the range of
    /// the assembled free state.
    pub kernel_condition_ok: bool,
    /// Largest clip applied to any raw occupation eigenvalue.
    pub clip_magnitude: f64,
    /// Number of occupations above [`tol::RANK`].
    pub rank: usize,
    /// Expected particle number `Tr(γ)`.
    pub expected_particles: f64,
}

/// Entropy of the free state with occupation list `p`, in bits:
/// `−Σ pⱼ log₂ pⱼ − Σ (1−pⱼ) log₂(1−pⱼ)`. Symmetric under `pⱼ ↔ 1−pⱼ`.
pub fn free_state_entropy_bits(occupations: &[f64]) -> f64 {
    fn term(x: f64) -> f64 {
        if x > tol::ZERO {
            -x * x.log2()
        } else {
            0.0
        }
    }
    occupations.iter().map(|&p| term(p) + term(1.0 - p)).sum()
}

/// Assembles the unique free state with 1-particle statistics `γ`:
/// `Γ_γ = Σ_s p(s) |Φ_s⟩⟨Φ_s|` with `p(s) = Π_{i∈s} pᵢ Π_{j∉s} (1−pⱼ)` and
/// `Φ_s` the Slater determinant over the natural orbitals selected by `s`,
/// expanded into the occupation basis.
pub fn build_free_state(gamma: &OnePdm) -> Result<DensityOperator> {
    let d = gamma.mode_count();
    if d.get() > MAX_MODES_DENSE {
        return Err(NonfreeError::CapacityExceeded(format!(
            "free-state assembly materializes dense blocks; limited to {MAX_MODES_DENSE} modes, got {d}"
        )));
    }
    let spectrum = natural_spectrum(gamma)?;
    let p = &spectrum.occupations;
    let mut blocks: BTreeMap<usize, DMatrix<Complex64>> = BTreeMap::new();
    for subset in 0u32..(1 << d.get()) {
        let mut weight = 1.0f64;
        for (j, &pj) in p.iter().enumerate() {
            weight *= if subset & (1 << j) != 0 { pj } else { 1.0 - pj };
        }
        if weight == 0.0 {
            continue;
        }
        let cols: Vec<usize> = (0..d.get()).filter(|j| subset & (1 << j) != 0).collect();
        let frame = spectrum.orbitals.select_columns(&cols);
        let (sector, amps) = slater_amplitudes(&frame);
        let block = blocks.entry(cols.len()).or_insert_with(|| {
            DMatrix::from_element(sector.dim(), sector.dim(), Complex64::from(0.0))
        });
        *block += (&amps * amps.adjoint()) * Complex64::from(weight);
    }
    DensityOperator::from_blocks_trusted(d, blocks)
}

fn assemble_report(
    occupations: Vec<f64>,
    clip_magnitude: f64,
    rank: usize,
    entropy_state: f64,
    gamma: &OnePdm,
    delta: Option<&DensityOperator>,
    options: NonfreenessOptions,
) -> Result<NonfreenessReport> {
    let entropy_free = free_state_entropy_bits(&occupations);
    let mut nonfreeness = entropy_free - entropy_state;
    if nonfreeness < 0.0 {
        if nonfreeness < -tol::CMP {
            return Err(NonfreeError::Numerical(format!(
                "free-state entropy {entropy_free} fell below the state entropy {entropy_state}"
            )));
        }
        nonfreeness = 0.0;
    }
    let mut cross_check = None;
    let mut corr_fidelity = None;
    let mut kernel_condition_ok = true;
    if options.cross_check || options.corr {
        let delta = delta.ok_or_else(|| {
            NonfreeError::Numerical("cross-check requested without a density operator".into())
        })?;
        let free = build_free_state(gamma)?;
        if options.cross_check {
            let direct = relative_entropy_bits(delta, &free)?;
            kernel_condition_ok = direct.is_finite();
            if !kernel_condition_ok {
                nonfreeness = f64::INFINITY;
            }
            cross_check = Some(direct);
        }
        if options.corr {
            corr_fidelity = Some(corr_fidelity_against(delta, &free)?);
        }
    }
    Ok(NonfreenessReport {
        occupations,
        entropy_state,
        entropy_free,
        nonfreeness,
        cross_check,
        corr_fidelity,
        kernel_condition_ok,
        clip_magnitude,
        rank,
        expected_particles: gamma.trace(),
    })
}

/// The nonfreeness of a number-block density operator, with optional
/// cross-check and fidelity measure.
pub fn nonfreeness(
    delta: &DensityOperator,
    options: NonfreenessOptions,
) -> Result<NonfreenessReport> {
    let gamma = one_pdm(delta);
    let spectrum = natural_spectrum(&gamma)?;
    let entropy_state = von_neumann_entropy_bits(delta);
    assemble_report(
        spectrum.occupations.clone(),
        spectrum.clip_magnitude,
        spectrum.rank(),
        entropy_state,
        &gamma,
        Some(delta),
        options,
    )
}

/// The nonfreeness of a pure state: the particle-hole symmetric correlation
/// entropy of its natural occupations.
pub fn nonfreeness_pure(psi: &PureState) -> Result<f64> {
    let gamma = one_pdm_pure(psi);
    let spectrum = natural_spectrum(&gamma)?;
    Ok(free_state_entropy_bits(&spectrum.occupations))
}

/// Full report for a pure state. The primary quantities never materialize
/// density blocks (`S(Δ) = 0` exactly); the cross-check and fidelity
/// options embed the state as a projector and are therefore capacity
/// limited like [`nonfreeness`].
pub fn nonfreeness_pure_report(
    psi: &PureState,
    options: NonfreenessOptions,
) -> Result<NonfreenessReport> {
    let gamma = one_pdm_pure(psi);
    let spectrum = natural_spectrum(&gamma)?;
    let delta = if options.cross_check || options.corr {
        Some(DensityOperator::from_pure(psi)?)
    } else {
        None
    };
    assemble_report(
        spectrum.occupations.clone(),
        spectrum.clip_magnitude,
        spectrum.rank(),
        0.0,
        &gamma,
        delta.as_ref(),
        options,
    )
}

/// Closed-form nonfreeness for a number-conserving state on two modes with
/// natural occupations `p1, p2` and two-particle probability `q`, in bits.
pub fn nonfreeness_rank2(p1: f64, p2: f64, q: f64) -> Result<f64> {
    let weights = [q, p1 - q, p2 - q, 1.0 - p1 - p2 + q];
    let names = ["q", "p1 - q", "p2 - q", "1 - p1 - p2 + q"];
    for (w, name) in weights.iter().zip(names) {
        if *w < -tol::ZERO {
            return Err(NonfreeError::InvalidParameter(format!(
                "sector weight {name} = {w} is negative"
            )));
        }
    }
    for (p, name) in [(p1, "p1"), (p2, "p2")] {
        if !((-tol::ZERO)..=1.0 + tol::ZERO).contains(&p) {
            return Err(NonfreeError::InvalidParameter(format!(
                "occupation {name} = {p} outside [0, 1]"
            )));
        }
    }
    fn xlog2(x: f64) -> f64 {
        if x > tol::ZERO {
            x * x.log2()
        } else {
            0.0
        }
    }
    let free = free_state_entropy_bits(&[p1, p2]);
    let weight_terms: f64 = weights.iter().map(|&w| xlog2(w)).sum();
    Ok((free + weight_terms).max(0.0))
}

fn corr_fidelity_against(delta: &DensityOperator, free: &DensityOperator) -> Result<f64> {
    let mut fidelity = 0.0f64;
    for (n, block) in delta.blocks() {
        let Some(free_block) = free.block(n) else {
            continue;
        };
        let root = matrix_sqrt(block)?;
        let inner = &root * free_block * &root;
        // The product is Hermitian up to floating error; force it before
        // the final square root.
        let inner = (&inner + inner.adjoint()) * Complex64::from(0.5);
        let eigs = crate::eigen::hermitian_eigenvalues(&inner)?;
        fidelity += eigs
            .iter()
            .map(|&e| if e > 0.0 { e.sqrt() } else { 0.0 })
            .sum::<f64>();
    }
    if fidelity <= 0.0 {
        return Err(NonfreeError::Numerical(
            "vanishing fidelity between a state and its free reference".into(),
        ));
    }
    Ok((-2.0 * fidelity.min(1.0).log2()).max(0.0))
}

/// The fidelity-based measure
/// `Corr(Δ) = −2 log₂ Tr ((Δ^{1/2} Γ_{γ_Δ} Δ^{1/2})^{1/2})`, always finite.
pub fn corr_fidelity_bits(delta: &DensityOperator) -> Result<f64> {
    let gamma = one_pdm(delta);
    let free = build_free_state(&gamma)?;
    corr_fidelity_against(delta, &free)
}
