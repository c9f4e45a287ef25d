//! The versioned state-file format.
//!
//! Line-oriented text; `#` starts a comment line, blank lines are ignored.
//! Occupation bitstrings have one character per mode, `0`/`1`, with the
//! leftmost character being mode 1. Repeated `amplitude:`/`entry:` lines
//! for the same slot accumulate. See FORMATS.md for the full grammar.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use nonfree_core::{
    binomial, DensityOperator, Ensemble, ModeCount, Occupation, PureState, Sector,
};
use num_complex::Complex64;

use crate::error::CliError;

pub const STATE_HEADER: &str = "format: nonfree-state v1";

/// A parsed state file: either a single sector-pure vector or a
/// number-block density operator.
#[derive(Debug)]
pub enum ParsedState {
    Pure(PureState),
    Density(DensityOperator),
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate().peekable(),
        }
    }

    /// Next meaningful line as (1-based line number, key, value).
    fn next_entry(&mut self) -> Result<Option<(usize, &'a str, &'a str)>, CliError> {
        for (idx, raw) in self.inner.by_ref() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once(':') else {
                return Err(CliError::Validation(format!(
                    "line {}: expected `key: value`, got `{line}`",
                    idx + 1
                )));
            };
            return Ok(Some((idx + 1, key.trim(), value.trim())));
        }
        Ok(None)
    }
}

fn parse_occupation(d: ModeCount, token: &str, line: usize) -> Result<Occupation, CliError> {
    if token.len() != d.get() {
        return Err(CliError::Validation(format!(
            "line {line}: bitstring `{token}` has {} characters, expected {}",
            token.len(),
            d.get()
        )));
    }
    let mut bits = 0u32;
    for (i, c) in token.chars().enumerate() {
        match c {
            '1' => bits |= 1 << i,
            '0' => {}
            _ => {
                return Err(CliError::Validation(format!(
                    "line {line}: bitstring `{token}` contains `{c}`"
                )))
            }
        }
    }
    Ok(Occupation::new(d, bits)?)
}

fn parse_f64(token: &str, line: usize) -> Result<f64, CliError> {
    token.parse::<f64>().map_err(|_| {
        CliError::Validation(format!("line {line}: `{token}` is not a number"))
    })
}

fn occupation_string(occ: Occupation) -> String {
    occ.bitstring()
}

/// Parses a state file.
pub fn parse_state(bytes: &[u8]) -> Result<ParsedState, CliError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| CliError::Validation("state file is not valid UTF-8".into()))?;
    let mut lines = Lines::new(text);

    let Some((line, key, value)) = lines.next_entry()? else {
        return Err(CliError::Validation("empty state file".into()));
    };
    if key != "format" || value != "nonfree-state v1" {
        return Err(CliError::Validation(format!(
            "line {line}: expected `{STATE_HEADER}`"
        )));
    }
    let Some((line, key, value)) = lines.next_entry()? else {
        return Err(CliError::Validation("missing `modes:` line".into()));
    };
    if key != "modes" {
        return Err(CliError::Validation(format!(
            "line {line}: expected `modes:`, got `{key}:`"
        )));
    }
    let d_raw: usize = value
        .parse()
        .map_err(|_| CliError::Validation(format!("line {line}: bad mode count `{value}`")))?;
    let d = ModeCount::new(d_raw)?;

    let Some((line, key, value)) = lines.next_entry()? else {
        return Err(CliError::Validation("missing `kind:` line".into()));
    };
    if key != "kind" {
        return Err(CliError::Validation(format!(
            "line {line}: expected `kind:`, got `{key}:`"
        )));
    }
    match value {
        "pure" => parse_pure(d, &mut lines).map(ParsedState::Pure),
        "ensemble" => parse_ensemble(d, &mut lines).map(ParsedState::Density),
        "blocks" => parse_blocks(d, &mut lines).map(ParsedState::Density),
        other => Err(CliError::Validation(format!(
            "line {line}: unknown kind `{other}`"
        ))),
    }
}

fn parse_amplitude_line(
    d: ModeCount,
    value: &str,
    line: usize,
) -> Result<(Occupation, Complex64), CliError> {
    let fields: Vec<&str> = value.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(CliError::Validation(format!(
            "line {line}: expected `amplitude: <bits> <re> <im>`"
        )));
    }
    let occ = parse_occupation(d, fields[0], line)?;
    let re = parse_f64(fields[1], line)?;
    let im = parse_f64(fields[2], line)?;
    Ok((occ, Complex64::new(re, im)))
}

fn parse_pure(d: ModeCount, lines: &mut Lines) -> Result<PureState, CliError> {
    let mut amplitudes = Vec::new();
    while let Some((line, key, value)) = lines.next_entry()? {
        if key != "amplitude" {
            return Err(CliError::Validation(format!(
                "line {line}: unexpected `{key}:` in a pure state"
            )));
        }
        amplitudes.push(parse_amplitude_line(d, value, line)?);
    }
    Ok(PureState::from_amplitudes(d, &amplitudes)?)
}

fn parse_ensemble(d: ModeCount, lines: &mut Lines) -> Result<DensityOperator, CliError> {
    let mut members: Vec<(f64, Vec<(Occupation, Complex64)>)> = Vec::new();
    while let Some((line, key, value)) = lines.next_entry()? {
        match key {
            "member" => {
                members.push((parse_f64(value, line)?, Vec::new()));
            }
            "amplitude" => {
                let Some(current) = members.last_mut() else {
                    return Err(CliError::Validation(format!(
                        "line {line}: amplitude before any `member:`"
                    )));
                };
                current.1.push(parse_amplitude_line(d, value, line)?);
            }
            other => {
                return Err(CliError::Validation(format!(
                    "line {line}: unexpected `{other}:` in an ensemble"
                )))
            }
        }
    }
    let mut built = Vec::with_capacity(members.len());
    for (weight, amplitudes) in members {
        built.push((weight, PureState::from_amplitudes(d, &amplitudes)?));
    }
    Ok(DensityOperator::from_ensemble(&Ensemble::new(built)?)?)
}

fn parse_blocks(d: ModeCount, lines: &mut Lines) -> Result<DensityOperator, CliError> {
    let mut blocks: BTreeMap<usize, DMatrix<Complex64>> = BTreeMap::new();
    let mut sectors: BTreeMap<usize, Sector> = BTreeMap::new();
    let mut current: Option<usize> = None;
    while let Some((line, key, value)) = lines.next_entry()? {
        match key {
            "block" => {
                let n: usize = value.parse().map_err(|_| {
                    CliError::Validation(format!("line {line}: bad particle number `{value}`"))
                })?;
                if n > d.get() {
                    return Err(CliError::Validation(format!(
                        "line {line}: sector {n} exceeds {} modes",
                        d.get()
                    )));
                }
                let dim = binomial(d.get(), n);
                blocks
                    .entry(n)
                    .or_insert_with(|| DMatrix::from_element(dim, dim, Complex64::from(0.0)));
                sectors.entry(n).or_insert_with(|| Sector::new(d, n));
                current = Some(n);
            }
            "entry" => {
                let Some(n) = current else {
                    return Err(CliError::Validation(format!(
                        "line {line}: entry before any `block:`"
                    )));
                };
                let fields: Vec<&str> = value.split_whitespace().collect();
                if fields.len() != 4 {
                    return Err(CliError::Validation(format!(
                        "line {line}: expected `entry: <row bits> <col bits> <re> <im>`"
                    )));
                }
                let row = parse_occupation(d, fields[0], line)?;
                let col = parse_occupation(d, fields[1], line)?;
                let sector = &sectors[&n];
                let (Some(i), Some(j)) = (sector.index_of(row), sector.index_of(col)) else {
                    return Err(CliError::Validation(format!(
                        "line {line}: entry occupations do not have {n} particles"
                    )));
                };
                let re = parse_f64(fields[2], line)?;
                let im = parse_f64(fields[3], line)?;
                blocks.get_mut(&n).expect("block exists")[(i, j)] += Complex64::new(re, im);
            }
            other => {
                return Err(CliError::Validation(format!(
                    "line {line}: unexpected `{other}:` in a blocks state"
                )))
            }
        }
    }
    if blocks.is_empty() {
        return Err(CliError::Validation("blocks state has no blocks".into()));
    }
    Ok(DensityOperator::from_blocks(d, blocks)?)
}

/// Serializes a pure state; exact zeros are omitted.
pub fn serialize_pure(psi: &PureState) -> String {
    let mut out = String::new();
    out.push_str(STATE_HEADER);
    out.push('\n');
    out.push_str(&format!("modes: {}\n", psi.mode_count().get()));
    out.push_str("kind: pure\n");
    let sector = psi.sector();
    for (i, occ) in sector.states().iter().enumerate() {
        let amp = psi.amplitudes()[i];
        if amp != Complex64::from(0.0) {
            out.push_str(&format!(
                "amplitude: {} {} {}\n",
                occupation_string(*occ),
                amp.re,
                amp.im
            ));
        }
    }
    out
}

/// Serializes a density operator in blocks form; exact zeros are omitted
/// but empty sector headers are kept.
pub fn serialize_blocks(op: &DensityOperator) -> String {
    let mut out = String::new();
    out.push_str(STATE_HEADER);
    out.push('\n');
    out.push_str(&format!("modes: {}\n", op.mode_count().get()));
    out.push_str("kind: blocks\n");
    for (n, block) in op.blocks() {
        out.push_str(&format!("block: {n}\n"));
        let sector = Sector::new(op.mode_count(), n);
        for (i, row) in sector.states().iter().enumerate() {
            for (j, col) in sector.states().iter().enumerate() {
                let value = block[(i, j)];
                if value != Complex64::from(0.0) {
                    out.push_str(&format!(
                        "entry: {} {} {} {}\n",
                        occupation_string(*row),
                        occupation_string(*col),
                        value.re,
                        value.im
                    ));
                }
            }
        }
    }
    out
}
