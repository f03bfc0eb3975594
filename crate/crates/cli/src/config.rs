//! Run-configuration parsing, validation, and the reproducibility hash.
//!
//! Configurations are JSON with statically known keys; unknown keys are
//! rejected with the offending key name and line. Phases may be written as
//! plain numbers (radians) or as strings such as "2/3 pi" and "0.351 pi" so
//! exact rational multiples of pi survive the trip through text.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use quditpea::{DetectorModel64, EomDrive64, PhotonicGeometry64};

/// Run mode, matching the command-line subcommand names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Ideal,
    Photonic,
    Fit,
    Iterate,
    Curves,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Ideal => "ideal",
            Mode::Photonic => "photonic",
            Mode::Fit => "fit",
            Mode::Iterate => "iterate",
            Mode::Curves => "curves",
        })
    }
}

/// Measurement backend for the iterative estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Ideal,
    Photonic,
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendKind::Ideal => "ideal",
            BackendKind::Photonic => "photonic",
        })
    }
}

/// Artifact format for the output directory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// One phase value, stored in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase(pub f64);

impl<'de> Deserialize<'de> for Phase {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct PhaseVisitor;

        impl Visitor<'_> for PhaseVisitor {
            type Value = Phase;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number in radians or a string like \"2/3 pi\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Phase, E> {
                Ok(Phase(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Phase, E> {
                Ok(Phase(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Phase, E> {
                Ok(Phase(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Phase, E> {
                parse_phase(v).map(Phase).map_err(E::custom)
            }
        }

        deserializer.deserialize_any(PhaseVisitor)
    }
}

/// Parses a phase literal: a decimal number, optionally followed by "pi",
/// with the coefficient written as a decimal or a fraction. Examples:
/// "0", "1.2", "2/3 pi", "0.351 pi", "pi", "-pi".
pub fn parse_phase(text: &str) -> std::result::Result<f64, String> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err("empty phase literal".to_string());
    }
    let lower = trimmed.to_ascii_lowercase();
    let (raw_coeff, with_pi) = match lower.strip_suffix("pi") {
        Some(rest) => {
            let rest = rest.trim_end();
            (rest.strip_suffix('*').unwrap_or(rest).trim(), true)
        }
        None => (lower.as_str(), false),
    };
    let coeff = if raw_coeff.is_empty() && with_pi {
        1.0
    } else if raw_coeff == "-" && with_pi {
        -1.0
    } else if raw_coeff == "+" && with_pi {
        1.0
    } else if let Some((num, den)) = raw_coeff.split_once('/') {
        let n: f64 = num
            .trim()
            .parse()
            .map_err(|_| format!("bad numerator '{}' in phase literal '{trimmed}'", num.trim()))?;
        let d: f64 = den.trim().parse().map_err(|_| {
            format!("bad denominator '{}' in phase literal '{trimmed}'", den.trim())
        })?;
        if d == 0.0 {
            return Err(format!("zero denominator in phase literal '{trimmed}'"));
        }
        n / d
    } else {
        raw_coeff
            .parse::<f64>()
            .map_err(|_| format!("unparseable phase literal '{trimmed}'"))?
    };
    let value = if with_pi {
        coeff * std::f64::consts::PI
    } else {
        coeff
    };
    if !value.is_finite() {
        return Err(format!("phase literal '{trimmed}' is not finite"));
    }
    Ok(value)
}

/// Device layout block; every field defaults to the stock geometry.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub bin_spacing_freq: f64,
    pub comb_drive_freq: f64,
    pub mix_drive_freq: f64,
    pub daughter_spacing: f64,
    pub time_bin_spacing: f64,
    pub repetition_period: f64,
    pub time_bin_fwhm: f64,
    pub dispersion: f64,
    pub dimension: usize,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        let g = PhotonicGeometry64::default();
        Self {
            bin_spacing_freq: g.bin_spacing_freq,
            comb_drive_freq: g.comb_drive_freq,
            mix_drive_freq: g.mix_drive_freq,
            daughter_spacing: g.daughter_spacing,
            time_bin_spacing: g.time_bin_spacing,
            repetition_period: g.repetition_period,
            time_bin_fwhm: g.time_bin_fwhm,
            dispersion: g.dispersion,
            dimension: g.dimension,
        }
    }
}

impl GeometryConfig {
    pub fn build(&self) -> PhotonicGeometry64 {
        PhotonicGeometry64 {
            bin_spacing_freq: self.bin_spacing_freq,
            comb_drive_freq: self.comb_drive_freq,
            mix_drive_freq: self.mix_drive_freq,
            daughter_spacing: self.daughter_spacing,
            time_bin_spacing: self.time_bin_spacing,
            repetition_period: self.repetition_period,
            time_bin_fwhm: self.time_bin_fwhm,
            dispersion: self.dispersion,
            dimension: self.dimension,
        }
    }
}

/// Modulator drive block; defaults to the stock drive.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriveConfig {
    pub modulation_index: f64,
    pub drive_freq: f64,
    pub delay_phase: Phase,
}

impl Default for DriveConfig {
    fn default() -> Self {
        let d = EomDrive64::default();
        Self {
            modulation_index: d.modulation_index,
            drive_freq: d.drive_freq,
            delay_phase: Phase(d.delay_phase),
        }
    }
}

impl DriveConfig {
    pub fn build(&self) -> EomDrive64 {
        EomDrive64 {
            modulation_index: self.modulation_index,
            drive_freq: self.drive_freq,
            delay_phase: self.delay_phase.0,
        }
    }
}

/// Detection block; defaults to the stock detector.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorConfig {
    pub flux: f64,
    pub integration_time: f64,
    pub dark_rate: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        let d = DetectorModel64::default();
        Self {
            flux: d.flux,
            integration_time: d.integration_time,
            dark_rate: d.dark_rate,
        }
    }
}

impl DetectorConfig {
    pub fn build(&self) -> DetectorModel64 {
        DetectorModel64 {
            flux: self.flux,
            integration_time: self.integration_time,
            dark_rate: self.dark_rate,
        }
    }
}

/// A configuration file as written, before defaults and overrides.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub mode: Option<Mode>,
    pub d: usize,
    #[serde(default)]
    pub phases: Option<Vec<Phase>>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub n_digits: Option<usize>,
    #[serde(default)]
    pub eigenstate: Option<usize>,
    #[serde(default)]
    pub backend: Option<BackendKind>,
    #[serde(default)]
    pub resolution: Option<usize>,
    #[serde(default)]
    pub geometry: Option<GeometryConfig>,
    #[serde(default)]
    pub drive: Option<DriveConfig>,
    #[serde(default)]
    pub detector: Option<DetectorConfig>,
    #[serde(default)]
    pub input: Option<PathBuf>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<OutputFormat>,
}

/// Reads and structurally validates a configuration file. Unknown keys,
/// type mismatches, and missing required keys are reported with the key
/// name and the line in the file.
pub fn parse_config(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let config: FileConfig = serde_json::from_str(&text)
        .with_context(|| format!("invalid config {}", path.display()))?;
    Ok(config)
}

/// Values supplied on the command line that override the file.
#[derive(Debug, Clone, Default)]
pub struct CliOverrides {
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub input: Option<PathBuf>,
    pub true_phase: Option<String>,
}

/// A run with every default applied and every override folded in.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub mode: Mode,
    /// Qudit dimension; 0 for a fit without a config file (taken from the
    /// input table header instead).
    pub d: usize,
    /// Unitary phases in radians; for fit these are the per-row true phases.
    pub phases: Vec<f64>,
    pub seed: u64,
    pub n_digits: usize,
    pub eigenstate: usize,
    pub backend: BackendKind,
    pub resolution: usize,
    pub geometry: PhotonicGeometry64,
    pub drive: EomDrive64,
    pub detector: DetectorModel64,
    pub input: Option<PathBuf>,
    /// Single true phase applied to every fitted row, overriding `phases`.
    pub fit_true_phase: Option<f64>,
    pub output_dir: PathBuf,
    pub format: OutputFormat,
}

/// Environment variable that overrides the output directory when no
/// `--output` flag is given. The only environment input the tool reads.
pub const OUTPUT_DIR_ENV: &str = "QUDITPEA_OUTPUT";

/// Merges the file, command-line overrides, and defaults into a validated
/// run description for the given mode.
pub fn resolve(mode: Mode, file: Option<FileConfig>, overrides: CliOverrides) -> Result<Resolved> {
    if let Some(file_mode) = file.as_ref().and_then(|f| f.mode) {
        if file_mode != mode {
            bail!("config sets mode '{file_mode}' but the command line asked for '{mode}'");
        }
    }

    let d = file.as_ref().map(|f| f.d).unwrap_or(0);
    let phases: Vec<f64> = file
        .as_ref()
        .and_then(|f| f.phases.as_ref())
        .map(|p| p.iter().map(|x| x.0).collect())
        .unwrap_or_default();

    if matches!(mode, Mode::Ideal | Mode::Photonic | Mode::Iterate) {
        if d < 2 {
            bail!("d: must be at least 2, got {d}");
        }
        if phases.is_empty() {
            bail!("phases: required for mode '{mode}'");
        }
        if phases.len() != d {
            bail!("phases: expected {d} entries to match d, got {}", phases.len());
        }
    }
    if mode == Mode::Curves && d < 2 {
        bail!("d: must be at least 2, got {d}");
    }

    let n_digits = file.as_ref().and_then(|f| f.n_digits).unwrap_or(0);
    if mode == Mode::Iterate && n_digits == 0 {
        bail!("n_digits: required for mode 'iterate' and must be at least 1");
    }

    let eigenstate = file.as_ref().and_then(|f| f.eigenstate).unwrap_or(0);
    if mode == Mode::Iterate && eigenstate >= d {
        bail!("eigenstate: {eigenstate} out of range for d = {d}");
    }

    let backend = file
        .as_ref()
        .and_then(|f| f.backend)
        .unwrap_or(BackendKind::Ideal);

    let resolution = file.as_ref().and_then(|f| f.resolution).unwrap_or(201);
    if mode == Mode::Curves && resolution < 2 {
        bail!("resolution: must be at least 2, got {resolution}");
    }

    let geometry = file
        .as_ref()
        .and_then(|f| f.geometry)
        .unwrap_or_default()
        .build();
    let drive = file
        .as_ref()
        .and_then(|f| f.drive)
        .unwrap_or_default()
        .build();
    let detector = file
        .as_ref()
        .and_then(|f| f.detector)
        .unwrap_or_default()
        .build();

    let photonic_involved =
        mode == Mode::Photonic || (mode == Mode::Iterate && backend == BackendKind::Photonic);
    if photonic_involved && geometry.dimension != d {
        bail!(
            "geometry.dimension: {} does not match d = {d}",
            geometry.dimension
        );
    }

    let input = overrides.input.or_else(|| file.as_ref().and_then(|f| f.input.clone()));
    if mode == Mode::Fit && input.is_none() {
        bail!("input: a count-table CSV is required for mode 'fit' (--input or the config's input field)");
    }

    let fit_true_phase = overrides
        .true_phase
        .as_deref()
        .map(|text| parse_phase(text).map_err(|e| anyhow::anyhow!("--true-phase: {e}")))
        .transpose()?;

    let seed = overrides
        .seed
        .or_else(|| file.as_ref().and_then(|f| f.seed))
        .unwrap_or(0);

    let output_dir = overrides
        .output
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
        .or_else(|| file.as_ref().and_then(|f| f.output.clone()))
        .unwrap_or_else(|| PathBuf::from("."));

    let format = overrides
        .format
        .or_else(|| file.as_ref().and_then(|f| f.format))
        .unwrap_or(OutputFormat::Csv);

    Ok(Resolved {
        mode,
        d,
        phases,
        seed,
        n_digits,
        eigenstate,
        backend,
        resolution,
        geometry,
        drive,
        detector,
        input,
        fit_true_phase,
        output_dir,
        format,
    })
}

fn push_field(canon: &mut String, key: &str, value: impl fmt::Display) {
    canon.push_str(key);
    canon.push('=');
    canon.push_str(&value.to_string());
    canon.push('\n');
}

fn push_floats(canon: &mut String, key: &str, values: &[f64]) {
    canon.push_str(key);
    canon.push('=');
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            canon.push(',');
        }
        canon.push_str(&format!("{v:.17e}"));
    }
    canon.push('\n');
}

/// SHA-256 over a canonical rendering of exactly the fields the mode
/// consumes, so the hash changes iff a field that can change the results
/// changes. Output location and format are deliberately excluded; the seed
/// is included only where randomness is drawn.
pub fn config_hash(r: &Resolved) -> String {
    let mut canon = String::new();
    push_field(&mut canon, "mode", r.mode);
    match r.mode {
        Mode::Ideal => {
            push_field(&mut canon, "d", r.d);
            push_floats(&mut canon, "phases", &r.phases);
        }
        Mode::Photonic => {
            push_field(&mut canon, "d", r.d);
            push_floats(&mut canon, "phases", &r.phases);
            push_field(&mut canon, "seed", r.seed);
            push_geometry(&mut canon, &r.geometry);
            push_drive(&mut canon, &r.drive);
            push_detector(&mut canon, &r.detector);
        }
        Mode::Fit => {
            push_field(&mut canon, "d", r.d);
            push_floats(&mut canon, "phases", &r.phases);
            if let Some(input) = &r.input {
                push_field(&mut canon, "input", input.display());
            }
            if let Some(p) = r.fit_true_phase {
                push_floats(&mut canon, "true_phase", &[p]);
            }
        }
        Mode::Iterate => {
            push_field(&mut canon, "d", r.d);
            push_floats(&mut canon, "phases", &r.phases);
            push_field(&mut canon, "eigenstate", r.eigenstate);
            push_field(&mut canon, "n_digits", r.n_digits);
            push_field(&mut canon, "backend", r.backend);
            if r.backend == BackendKind::Photonic {
                push_field(&mut canon, "seed", r.seed);
                push_geometry(&mut canon, &r.geometry);
                push_drive(&mut canon, &r.drive);
                push_detector(&mut canon, &r.detector);
            }
        }
        Mode::Curves => {
            push_field(&mut canon, "d", r.d);
            push_field(&mut canon, "resolution", r.resolution);
        }
    }
    let digest = Sha256::digest(canon.as_bytes());
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

fn push_geometry(canon: &mut String, g: &PhotonicGeometry64) {
    push_floats(
        canon,
        "geometry",
        &[
            g.bin_spacing_freq,
            g.comb_drive_freq,
            g.mix_drive_freq,
            g.daughter_spacing,
            g.time_bin_spacing,
            g.repetition_period,
            g.time_bin_fwhm,
            g.dispersion,
        ],
    );
    push_field(canon, "geometry.dimension", g.dimension);
}

fn push_drive(canon: &mut String, d: &EomDrive64) {
    push_floats(
        canon,
        "drive",
        &[d.modulation_index, d.drive_freq, d.delay_phase],
    );
}

fn push_detector(canon: &mut String, d: &DetectorModel64) {
    push_floats(canon, "detector", &[d.flux, d.integration_time, d.dark_rate]);
}
