//! Randomized verification suites. Each trial derives its randomness from
//! (seed, trial index), emits one CSV row, and reports a margin that must
//! stay at or above minus the suite tolerance.
//!
//! Margins are oriented so that `margin >= -tolerance` is a pass: ordering
//! suites report the signed slack, equality suites report minus the
//! absolute gap, and the CAR suite reports minus an exact integer
//! residual.

use std::path::Path;

use clap::ValueEnum;
use nonfree_core::{
    nonfreeness, nonfreeness_rank2, von_neumann_entropy_bits, Bipartition, DensityOperator,
    ModeCount, NonfreenessOptions, Occupation, RandomKind,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;
use crate::report::sha256_hex;
use crate::statefile::serialize_blocks;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Suite {
    /// Nonfreeness of a restriction never exceeds the whole.
    Monotonicity,
    /// Nonfreeness is additive over tensor products.
    Additivity,
    /// Whole >= sum of parts when the 1-PDM splits across the cut.
    Superadditivity,
    /// Entropy-difference route equals the relative-entropy route.
    Prop1,
    /// Two-mode closed form equals the general pipeline.
    Rank2,
    /// Rank and free-entropy bounds.
    Bounds,
    /// Canonical anticommutation relations, integer exact.
    Car,
}

struct SuiteRun {
    header: &'static str,
    tolerance: f64,
    rows: Vec<String>,
    margins: Vec<f64>,
}

pub fn run(
    suite: Suite,
    trials: usize,
    seed: u64,
    max_modes: usize,
    csv_path: Option<&Path>,
) -> Result<(), CliError> {
    let max_modes = max_modes.clamp(2, 12);
    let outcome = match suite {
        Suite::Monotonicity => monotonicity(trials, seed, max_modes)?,
        Suite::Additivity => additivity(trials, seed, max_modes)?,
        Suite::Superadditivity => superadditivity(trials, seed, max_modes)?,
        Suite::Prop1 => prop1(trials, seed, max_modes)?,
        Suite::Rank2 => rank2(trials, seed)?,
        Suite::Bounds => bounds(trials, seed, max_modes)?,
        Suite::Car => car(max_modes)?,
    };

    let mut csv = String::from(outcome.header);
    csv.push('\n');
    for row in &outcome.rows {
        csv.push_str(row);
        csv.push('\n');
    }
    let worst = outcome
        .margins
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let failures = outcome
        .margins
        .iter()
        .filter(|&&m| m < -outcome.tolerance)
        .count();
    let summary = format!(
        "suite {}: {} trials, tolerance {:.1e}, worst margin {:.3e}, {}",
        format!("{suite:?}").to_lowercase(),
        outcome.rows.len(),
        outcome.tolerance,
        worst,
        if failures == 0 {
            "PASS".to_string()
        } else {
            format!("FAIL ({failures} violations)")
        }
    );

    match csv_path {
        Some(path) => {
            std::fs::write(path, &csv)
                .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
            println!("{summary}");
        }
        None => {
            print!("{csv}");
            eprintln!("{summary}");
        }
    }
    if failures > 0 {
        return Err(CliError::Numerical(format!(
            "{failures} trials violated the {:.1e} tolerance",
            outcome.tolerance
        )));
    }
    Ok(())
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream for one trial: depends only on (seed, trial, salt), so results
/// are schedule independent.
fn trial_seed(seed: u64, trial: u64, salt: u64) -> u64 {
    splitmix(seed ^ splitmix(trial ^ splitmix(salt)))
}

fn short_digest(state: &DensityOperator) -> String {
    let full = sha256_hex(serialize_blocks(state).as_bytes());
    full[7..23].to_string()
}

fn mode_list(b: &Bipartition) -> String {
    b.part1()
        .iter()
        .map(|m| (m + 1).to_string())
        .collect::<Vec<_>>()
        .join(";")
}

fn random_bipartition(d: ModeCount, rng: &mut ChaCha8Rng) -> Bipartition {
    let size = rng.gen_range(1..d.get());
    let mut modes: Vec<usize> = (0..d.get()).collect();
    for i in (1..modes.len()).rev() {
        let j = rng.gen_range(0..=i);
        modes.swap(i, j);
    }
    let mut part1 = modes[..size].to_vec();
    part1.sort_unstable();
    Bipartition::new(d, &part1).expect("proper bipartition")
}

fn nf(state: &DensityOperator) -> Result<f64, CliError> {
    Ok(nonfreeness(state, NonfreenessOptions::default())?.nonfreeness)
}

fn monotonicity(trials: usize, seed: u64, max_modes: usize) -> Result<SuiteRun, CliError> {
    let mut rows = Vec::with_capacity(trials);
    let mut margins = Vec::with_capacity(trials);
    for trial in 0..trials as u64 {
        let d = ModeCount::new(2 + (trial as usize) % (max_modes - 1))?;
        let kind = if trial % 3 == 0 {
            RandomKind::Pure
        } else {
            RandomKind::Mixed
        };
        let (state, _) = nonfree_core::random_state(kind, d, trial_seed(seed, trial, 1))?;
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, trial, 2));
        let b = random_bipartition(d, &mut rng);
        let whole = nf(&state)?;
        let part = nf(&state.restrict(&b)?)?;
        let margin = whole - part;
        rows.push(format!(
            "{trial},{},{},{},{whole},{part},{margin}",
            short_digest(&state),
            d.get(),
            mode_list(&b)
        ));
        margins.push(margin);
    }
    Ok(SuiteRun {
        header: "trial,digest,d,part1,nonfreeness_whole,nonfreeness_part,margin",
        tolerance: 1e-9,
        rows,
        margins,
    })
}

fn additivity(trials: usize, seed: u64, max_modes: usize) -> Result<SuiteRun, CliError> {
    let mut rows = Vec::with_capacity(trials);
    let mut margins = Vec::with_capacity(trials);
    for trial in 0..trials as u64 {
        let d1 = (2 + (trial as usize) % 2).min(max_modes - 1);
        let d2 = (2 + (trial as usize / 2) % 2).min(max_modes - d1);
        let (left, _) = nonfree_core::random_state(
            RandomKind::Mixed,
            ModeCount::new(d1)?,
            trial_seed(seed, trial, 3),
        )?;
        let (right, _) = nonfree_core::random_state(
            RandomKind::Mixed,
            ModeCount::new(d2)?,
            trial_seed(seed, trial, 4),
        )?;
        let product = left.tensor_product(&right)?;
        let whole = nf(&product)?;
        let parts = nf(&left)? + nf(&right)?;
        let margin = -(whole - parts).abs();
        rows.push(format!(
            "{trial},{},{d1},{d2},{whole},{parts},{margin}",
            short_digest(&product)
        ));
        margins.push(margin);
    }
    Ok(SuiteRun {
        header: "trial,digest,d1,d2,nonfreeness_product,nonfreeness_sum,margin",
        tolerance: 1e-9,
        rows,
        margins,
    })
}

fn superadditivity(trials: usize, seed: u64, max_modes: usize) -> Result<SuiteRun, CliError> {
    let mut rows = Vec::with_capacity(trials);
    let mut margins = Vec::with_capacity(trials);
    for trial in 0..trials as u64 {
        let d = ModeCount::new(2 + (trial as usize) % (max_modes - 1))?;
        let (state, bipartition) = nonfree_core::random_state(
            RandomKind::BlockIndependent,
            d,
            trial_seed(seed, trial, 5),
        )?;
        let b = bipartition.expect("block-independent states carry their cut");
        let whole = nf(&state)?;
        let parts = nf(&state.restrict(&b)?)? + nf(&state.restrict(&b.complement())?)?;
        let margin = whole - parts;
        rows.push(format!(
            "{trial},{},{},{},{whole},{parts},{margin}",
            short_digest(&state),
            d.get(),
            mode_list(&b)
        ));
        margins.push(margin);
    }
    Ok(SuiteRun {
        header: "trial,digest,d,part1,nonfreeness_whole,nonfreeness_parts_sum,margin",
        tolerance: 1e-9,
        rows,
        margins,
    })
}

fn prop1(trials: usize, seed: u64, max_modes: usize) -> Result<SuiteRun, CliError> {
    let cap = max_modes.min(5);
    let mut rows = Vec::with_capacity(trials);
    let mut margins = Vec::with_capacity(trials);
    for trial in 0..trials as u64 {
        let d = ModeCount::new(2 + (trial as usize) % (cap - 1))?;
        let (state, _) = nonfree_core::random_state(
            RandomKind::Mixed,
            d,
            trial_seed(seed, trial, 6),
        )?;
        let report = nonfreeness(
            &state,
            NonfreenessOptions {
                cross_check: true,
                corr: false,
            },
        )?;
        let direct = report.cross_check.expect("cross-check requested");
        let margin = -(direct - report.nonfreeness).abs();
        rows.push(format!(
            "{trial},{},{},{},{direct},{margin}",
            short_digest(&state),
            d.get(),
            report.nonfreeness
        ));
        margins.push(margin);
    }
    Ok(SuiteRun {
        header: "trial,digest,d,entropy_route,relative_entropy_route,margin",
        tolerance: 1e-8,
        rows,
        margins,
    })
}

fn rank2(trials: usize, seed: u64) -> Result<SuiteRun, CliError> {
    let mut rows = Vec::with_capacity(trials);
    let mut margins = Vec::with_capacity(trials);
    for trial in 0..trials as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, trial, 7));
        let p1: f64 = rng.gen();
        let p2: f64 = rng.gen();
        let lo = (p1 + p2 - 1.0).max(0.0);
        let hi = p1.min(p2);
        let q = lo + rng.gen::<f64>() * (hi - lo);
        let closed = nonfreeness_rank2(p1, p2, q)?;
        let mut blocks = std::collections::BTreeMap::new();
        blocks.insert(
            0,
            DMatrix::from_element(1, 1, Complex64::from(1.0 - p1 - p2 + q)),
        );
        blocks.insert(
            1,
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                Complex64::from(p1 - q),
                Complex64::from(p2 - q),
            ])),
        );
        blocks.insert(2, DMatrix::from_element(1, 1, Complex64::from(q)));
        let state = DensityOperator::from_blocks(ModeCount::new(2)?, blocks)?;
        let pipeline = nf(&state)?;
        let margin = -(closed - pipeline).abs();
        let digest = sha256_hex(format!("{p1} {p2} {q}").as_bytes())[7..23].to_string();
        rows.push(format!(
            "{trial},{digest},{p1},{p2},{q},{closed},{pipeline},{margin}"
        ));
        margins.push(margin);
    }
    Ok(SuiteRun {
        header: "trial,digest,p1,p2,q,closed_form,pipeline,margin",
        tolerance: 1e-10,
        rows,
        margins,
    })
}

fn bounds(trials: usize, seed: u64, max_modes: usize) -> Result<SuiteRun, CliError> {
    let kinds = [
        (RandomKind::Slater, "slater"),
        (RandomKind::Pure, "pure"),
        (RandomKind::Mixed, "mixed"),
        (RandomKind::BlockIndependent, "block_independent"),
    ];
    let mut rows = Vec::with_capacity(trials);
    let mut margins = Vec::with_capacity(trials);
    for trial in 0..trials as u64 {
        let (kind, label) = kinds[(trial as usize) % kinds.len()];
        let d = ModeCount::new(2 + (trial as usize) % (max_modes - 1))?;
        let (state, _) = nonfree_core::random_state(kind, d, trial_seed(seed, trial, 8))?;
        let report = nonfreeness(&state, NonfreenessOptions::default())?;
        let entropy_state = von_neumann_entropy_bits(&state);
        let rank_margin = report.rank as f64 - report.nonfreeness;
        let entropy_margin = report.entropy_free - entropy_state;
        let margin = rank_margin.min(entropy_margin);
        rows.push(format!(
            "{trial},{},{},{label},{},{},{entropy_state},{},{margin}",
            short_digest(&state),
            d.get(),
            report.nonfreeness,
            report.rank,
            report.entropy_free
        ));
        margins.push(margin);
    }
    Ok(SuiteRun {
        header: "trial,digest,d,kind,nonfreeness,rank,entropy_state,entropy_free,margin",
        tolerance: 1e-9,
        rows,
        margins,
    })
}

type IntMatrix = Vec<Vec<i64>>;

fn int_zeros(dim: usize) -> IntMatrix {
    vec![vec![0; dim]; dim]
}

fn int_mul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
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

fn ladder_matrices(d: ModeCount, mode: usize) -> (IntMatrix, IntMatrix) {
    let dim = d.fock_dim();
    let mut creator = int_zeros(dim);
    let mut annihilator = int_zeros(dim);
    for bits in 0..dim as u32 {
        let occ = Occupation::new(d, bits).expect("bits in range");
        if let Some((res, sign)) = occ.create(mode) {
            creator[res.bits() as usize][bits as usize] = sign as i64;
        }
        if let Some((res, sign)) = occ.annihilate(mode) {
            annihilator[res.bits() as usize][bits as usize] = sign as i64;
        }
    }
    (creator, annihilator)
}

/// CAR residuals are exact integers; the suite runs `d` from 1 to at most
/// 6 regardless of `--max-modes` (the operator matrices grow as 4^d).
fn car(max_modes: usize) -> Result<SuiteRun, CliError> {
    let mut rows = Vec::new();
    let mut margins = Vec::new();
    for modes in 1..=max_modes.min(6) {
        let d = ModeCount::new(modes)?;
        let dim = d.fock_dim();
        let ladders: Vec<(IntMatrix, IntMatrix)> =
            (0..modes).map(|m| ladder_matrices(d, m)).collect();
        let mut residual: i64 = 0;
        for j in 0..modes {
            for k in 0..modes {
                let mixed = int_mul(&ladders[j].0, &ladders[k].1);
                let swapped = int_mul(&ladders[k].1, &ladders[j].0);
                for r in 0..dim {
                    for c in 0..dim {
                        let expect = i64::from(j == k && r == c);
                        residual = residual.max((mixed[r][c] + swapped[r][c] - expect).abs());
                    }
                }
                let ann = int_mul(&ladders[j].1, &ladders[k].1);
                let ann_swapped = int_mul(&ladders[k].1, &ladders[j].1);
                let cre = int_mul(&ladders[j].0, &ladders[k].0);
                let cre_swapped = int_mul(&ladders[k].0, &ladders[j].0);
                for r in 0..dim {
                    for c in 0..dim {
                        residual = residual.max((ann[r][c] + ann_swapped[r][c]).abs());
                        residual = residual.max((cre[r][c] + cre_swapped[r][c]).abs());
                    }
                }
            }
        }
        let margin = if residual == 0 { 0.0 } else { -(residual as f64) };
        rows.push(format!("{modes},-,{modes},{residual},{margin}"));
        margins.push(margin);
    }
    Ok(SuiteRun {
        header: "trial,digest,d,max_residual,margin",
        tolerance: 0.0,
        rows,
        margins,
    })
}
