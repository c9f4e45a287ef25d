//! The versioned report-file format and provenance fields.
//!
//! Entropic values are written in the report's log base with 17
//! significant digits, so parsing a report back reproduces every number
//! bit for bit.

use std::f64::consts::LN_2;

use nonfree_core::{NonfreenessOptions, NonfreenessReport};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const REPORT_HEADER: &str = "format: nonfree-report v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogBase {
    Two,
    E,
}

impl LogBase {
    fn label(self) -> &'static str {
        match self {
            LogBase::Two => "2",
            LogBase::E => "e",
        }
    }

    /// Multiplier taking a value in bits to this base.
    fn scale_from_bits(self) -> f64 {
        match self {
            LogBase::Two => 1.0,
            LogBase::E => LN_2,
        }
    }
}

/// Serialized form of a [`NonfreenessReport`] plus provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportFile {
    pub tool: String,
    pub input_digest: Option<String>,
    pub log_base: LogBase,
    pub cross_check_enabled: bool,
    pub corr_enabled: bool,
    pub modes: usize,
    pub expected_particles: f64,
    pub rank: usize,
    pub clip_magnitude: f64,
    pub kernel_condition_ok: bool,
    pub occupations: Vec<f64>,
    pub entropy_state: f64,
    pub entropy_free: f64,
    pub nonfreeness: f64,
    pub cross_check: Option<f64>,
    pub corr_fidelity: Option<f64>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(7 + 64);
    out.push_str("sha256:");
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

fn num(value: f64) -> String {
    format!("{value:.16e}")
}

impl ReportFile {
    pub fn from_report(
        report: &NonfreenessReport,
        modes: usize,
        log_base: LogBase,
        options: NonfreenessOptions,
        input_digest: Option<String>,
    ) -> Self {
        let scale = log_base.scale_from_bits();
        ReportFile {
            tool: format!("nonfree {}", env!("CARGO_PKG_VERSION")),
            input_digest,
            log_base,
            cross_check_enabled: options.cross_check,
            corr_enabled: options.corr,
            modes,
            expected_particles: report.expected_particles,
            rank: report.rank,
            clip_magnitude: report.clip_magnitude,
            kernel_condition_ok: report.kernel_condition_ok,
            occupations: report.occupations.clone(),
            entropy_state: report.entropy_state * scale,
            entropy_free: report.entropy_free * scale,
            nonfreeness: report.nonfreeness * scale,
            cross_check: report.cross_check.map(|v| v * scale),
            corr_fidelity: report.corr_fidelity.map(|v| v * scale),
        }
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str(REPORT_HEADER);
        out.push('\n');
        out.push_str(&format!("tool: {}\n", self.tool));
        if let Some(digest) = &self.input_digest {
            out.push_str(&format!("input-digest: {digest}\n"));
        }
        out.push_str(&format!("log-base: {}\n", self.log_base.label()));
        out.push_str(&format!(
            "options: cross-check={} corr={}\n",
            self.cross_check_enabled, self.corr_enabled
        ));
        out.push_str(&format!("modes: {}\n", self.modes));
        out.push_str(&format!(
            "expected-particles: {}\n",
            num(self.expected_particles)
        ));
        out.push_str(&format!("rank: {}\n", self.rank));
        out.push_str(&format!("clip-magnitude: {}\n", num(self.clip_magnitude)));
        out.push_str(&format!(
            "kernel-condition-ok: {}\n",
            self.kernel_condition_ok
        ));
        for p in &self.occupations {
            out.push_str(&format!("occupation: {}\n", num(*p)));
        }
        out.push_str(&format!("entropy-state: {}\n", num(self.entropy_state)));
        out.push_str(&format!("entropy-free: {}\n", num(self.entropy_free)));
        out.push_str(&format!("nonfreeness: {}\n", num(self.nonfreeness)));
        if let Some(v) = self.cross_check {
            out.push_str(&format!("cross-check: {}\n", num(v)));
        }
        if let Some(v) = self.corr_fidelity {
            out.push_str(&format!("corr-fidelity: {}\n", num(v)));
        }
        out
    }

    pub fn parse(text: &str) -> Result<ReportFile, CliError> {
        let mut fields: Vec<(String, String)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once(':') else {
                return Err(CliError::Validation(format!(
                    "line {}: expected `key: value`",
                    idx + 1
                )));
            };
            fields.push((key.trim().to_string(), value.trim().to_string()));
        }
        let mut iter = fields.into_iter();
        let header = iter.next();
        if header.as_ref().map(|(k, v)| (k.as_str(), v.as_str())) != Some(("format", "nonfree-report v1"))
        {
            return Err(CliError::Validation(format!(
                "expected `{REPORT_HEADER}`"
            )));
        }
        let mut report = ReportFile {
            tool: String::new(),
            input_digest: None,
            log_base: LogBase::Two,
            cross_check_enabled: false,
            corr_enabled: false,
            modes: 0,
            expected_particles: f64::NAN,
            rank: 0,
            clip_magnitude: f64::NAN,
            kernel_condition_ok: true,
            occupations: Vec::new(),
            entropy_state: f64::NAN,
            entropy_free: f64::NAN,
            nonfreeness: f64::NAN,
            cross_check: None,
            corr_fidelity: None,
        };
        let parse_num = |value: &str| -> Result<f64, CliError> {
            value
                .parse::<f64>()
                .map_err(|_| CliError::Validation(format!("bad number `{value}` in report")))
        };
        for (key, value) in iter {
            match key.as_str() {
                "tool" => report.tool = value,
                "input-digest" => report.input_digest = Some(value),
                "log-base" => {
                    report.log_base = match value.as_str() {
                        "2" => LogBase::Two,
                        "e" => LogBase::E,
                        other => {
                            return Err(CliError::Validation(format!(
                                "unknown log base `{other}`"
                            )))
                        }
                    }
                }
                "options" => {
                    report.cross_check_enabled = value.contains("cross-check=true");
                    report.corr_enabled = value.contains("corr=true");
                }
                "modes" => {
                    report.modes = value.parse().map_err(|_| {
                        CliError::Validation(format!("bad mode count `{value}`"))
                    })?
                }
                "expected-particles" => report.expected_particles = parse_num(&value)?,
                "rank" => {
                    report.rank = value
                        .parse()
                        .map_err(|_| CliError::Validation(format!("bad rank `{value}`")))?
                }
                "clip-magnitude" => report.clip_magnitude = parse_num(&value)?,
                "kernel-condition-ok" => report.kernel_condition_ok = value == "true",
                "occupation" => report.occupations.push(parse_num(&value)?),
                "entropy-state" => report.entropy_state = parse_num(&value)?,
                "entropy-free" => report.entropy_free = parse_num(&value)?,
                "nonfreeness" => report.nonfreeness = parse_num(&value)?,
                "cross-check" => report.cross_check = Some(parse_num(&value)?),
                "corr-fidelity" => report.corr_fidelity = Some(parse_num(&value)?),
                other => {
                    return Err(CliError::Validation(format!(
                        "unknown report field `{other}`"
                    )))
                }
            }
        }
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ReportFile {
        ReportFile {
            tool: "nonfree 0.1.0".into(),
            input_digest: Some("sha256:00ff".into()),
            log_base: LogBase::Two,
            cross_check_enabled: true,
            corr_enabled: false,
            modes: 4,
            expected_particles: 2.0,
            rank: 4,
            clip_magnitude: 1.1e-16,
            kernel_condition_ok: true,
            occupations: vec![0.5, 0.5, 0.5, 0.5],
            entropy_state: 0.0,
            entropy_free: 4.0,
            nonfreeness: 4.0,
            cross_check: Some(3.999_999_999_999_73),
            corr_fidelity: None,
        }
    }

    #[test]
    fn report_round_trips_losslessly() {
        let report = sample();
        let text = report.serialize();
        let back = ReportFile::parse(&text).unwrap();
        assert_eq!(report, back);
        // A second pass is byte-identical.
        assert_eq!(text, back.serialize());
    }

    #[test]
    fn digest_is_stable() {
        assert_eq!(
            sha256_hex(b""),
            "sha256:e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn infinities_survive_the_round_trip() {
        let mut report = sample();
        report.nonfreeness = f64::INFINITY;
        report.kernel_condition_ok = false;
        let back = ReportFile::parse(&report.serialize()).unwrap();
        assert!(back.nonfreeness.is_infinite());
        assert!(!back.kernel_condition_ok);
    }
}
