//! Experiment-configuration schema (versioned JSON) and its resolution into
//! the library's domain types. Every rejection names the offending field.

use std::path::Path;

use serde::Deserialize;

use qnd::coherent::CoherentPoint;
use qnd::params::{
    OscillatorBathSpec, Sector, SpinBathSpec, SystemParams, Tolerances,
};
use qnd::spin::SignConvention;
use qnd::C64;

use crate::Failure;

pub const SCHEMA_VERSION: u32 = 1;

/// Computation mode; doubles as the `--mode` flag value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Closed-form propagator kernel entries over the time grid.
    Kernel,
    /// Randomized analytic-versus-oracle comparison.
    Verify,
    /// Off-diagonal coherence ratio over the grid, with an oracle column.
    Dephasing,
    /// Structural checks (squeeze/rotation decompositions) as JSON.
    Structure,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Kernel => "kernel",
            Mode::Verify => "verify",
            Mode::Dephasing => "dephasing",
            Mode::Structure => "structure",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub mode: Option<Mode>,
    pub system: SystemParams,
    pub bath: BathSection,
    #[serde(default)]
    pub endpoints: Option<EndpointsSection>,
    #[serde(default)]
    pub time_grid: Option<TimeGridSection>,
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
    #[serde(default)]
    pub verify: Option<VerifySection>,
    #[serde(default)]
    pub convention: Option<ConventionLabel>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BathSection {
    Oscillator { modes: Vec<OscillatorModeSection> },
    Spin { modes: Vec<SpinModeSection> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorModeSection {
    pub omega: f64,
    pub g: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinModeSection {
    pub omega: f64,
    pub c: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointsSection {
    /// Bra-side coherent labels, one `[re, im]` pair per bath mode.
    #[serde(default)]
    pub alpha: Option<Vec<[f64; 2]>>,
    /// Ket-side coherent labels, one `[re, im]` pair per bath mode.
    #[serde(default)]
    pub alpha_prime: Option<Vec<[f64; 2]>>,
    /// Bra-side label of the external driven mode.
    #[serde(default)]
    pub nu: Option<[f64; 2]>,
    /// Ket-side label of the external driven mode.
    #[serde(default)]
    pub nu_prime: Option<[f64; 2]>,
    /// System sector for spin-bath kernels.
    #[serde(default)]
    pub sector: Option<SectorLabel>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SectorLabel {
    Up,
    Down,
}

impl From<SectorLabel> for Sector {
    fn from(label: SectorLabel) -> Sector {
        match label {
            SectorLabel::Up => Sector::Up,
            SectorLabel::Down => Sector::Down,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConventionLabel {
    Plus,
    Minus,
}

impl From<ConventionLabel> for SignConvention {
    fn from(label: ConventionLabel) -> SignConvention {
        match label {
            ConventionLabel::Plus => SignConvention::Plus,
            ConventionLabel::Minus => SignConvention::Minus,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGridSection {
    pub t_start: f64,
    pub t_end: f64,
    pub n_points: usize,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub draws: Option<usize>,
    #[serde(default)]
    pub tolerance: Option<f64>,
}

pub const DEFAULT_VERIFY_DRAWS: usize = 4;
pub const DEFAULT_CHECK_TOLERANCE: f64 = 1e-8;

/// Fully validated experiment, ready to run.
pub struct Resolved {
    pub mode: Mode,
    pub system: SystemParams,
    pub bath: Bath,
    pub endpoints: Endpoints,
    /// Grid times, empty when no grid was configured.
    pub times: Vec<f64>,
    pub tol: Tolerances,
    pub seed: u64,
    pub draws: usize,
    /// Pass threshold for verify/dephasing residuals and structure checks.
    pub check_tolerance: f64,
    pub convention: SignConvention,
}

pub enum Bath {
    Oscillator(OscillatorBathSpec),
    Spin(SpinBathSpec),
}

pub enum Endpoints {
    Oscillator {
        alpha: CoherentPoint,
        alpha_prime: CoherentPoint,
        /// Bra/ket labels of the external mode; `Some` iff the system is driven.
        drive: Option<(C64, C64)>,
    },
    Spin { sector: Sector },
}

/// CLI flag overrides applied on top of the config file.
pub struct Overrides {
    pub mode: Option<Mode>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
}

fn config_error(msg: String) -> Failure {
    Failure::Config(msg)
}

pub fn load(path: &Path, overrides: &Overrides) -> Result<Resolved, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        config_error(format!("cannot read config {}: {e}", path.display()))
    })?;
    let config: ExperimentConfig = serde_json::from_str(&text).map_err(|e| {
        config_error(format!("malformed config {}: {e}", path.display()))
    })?;
    resolve(config, overrides)
}

fn complex(pair: [f64; 2]) -> C64 {
    C64::new(pair[0], pair[1])
}

fn coherent_point(
    field: &str,
    pairs: Option<&Vec<[f64; 2]>>,
    modes: usize,
) -> Result<CoherentPoint, Failure> {
    match pairs {
        None => Ok(CoherentPoint::vacuum(modes)),
        Some(v) => {
            if v.len() != modes {
                return Err(config_error(format!(
                    "{field}: expected one [re, im] pair per bath mode ({modes}), got {}",
                    v.len()
                )));
            }
            CoherentPoint::new(v.iter().copied().map(complex).collect())
                .map_err(|e| config_error(format!("{field}: {e}")))
        }
    }
}

pub fn resolve(config: ExperimentConfig, overrides: &Overrides) -> Result<Resolved, Failure> {
    if config.schema_version != SCHEMA_VERSION {
        return Err(config_error(format!(
            "schema_version: unsupported value {} (expected {SCHEMA_VERSION})",
            config.schema_version
        )));
    }
    let mode = overrides.mode.or(config.mode).ok_or_else(|| {
        config_error("mode: missing (set it in the config or pass --mode)".to_string())
    })?;

    let system = config.system;
    system
        .validate()
        .map_err(|e| config_error(format!("system: {e}")))?;

    let endpoints_section = config.endpoints.unwrap_or_default();
    let bath = match config.bath {
        BathSection::Oscillator { modes } => {
            if modes.is_empty() {
                return Err(config_error(
                    "bath.modes: at least one mode required".to_string(),
                ));
            }
            let spec = OscillatorBathSpec::from_pairs(
                &modes.iter().map(|m| (m.omega, m.g)).collect::<Vec<_>>(),
            );
            spec.validate()
                .map_err(|e| config_error(format!("bath.modes: {e}")))?;
            Bath::Oscillator(spec)
        }
        BathSection::Spin { modes } => {
            if modes.is_empty() {
                return Err(config_error(
                    "bath.modes: at least one mode required".to_string(),
                ));
            }
            let spec = SpinBathSpec::from_pairs(
                &modes.iter().map(|m| (m.omega, m.c)).collect::<Vec<_>>(),
            );
            spec.validate()
                .map_err(|e| config_error(format!("bath.modes: {e}")))?;
            Bath::Spin(spec)
        }
    };

    let endpoints = match &bath {
        Bath::Oscillator(spec) => {
            if endpoints_section.sector.is_some() {
                return Err(config_error(
                    "endpoints.sector: only applies to spin baths".to_string(),
                ));
            }
            let alpha = coherent_point(
                "endpoints.alpha",
                endpoints_section.alpha.as_ref(),
                spec.len(),
            )?;
            let alpha_prime = coherent_point(
                "endpoints.alpha_prime",
                endpoints_section.alpha_prime.as_ref(),
                spec.len(),
            )?;
            let drive = match (system.drive_omega, endpoints_section.nu, endpoints_section.nu_prime)
            {
                (None, Some(_), _) | (None, _, Some(_)) => {
                    return Err(config_error(
                        "endpoints.nu: system.drive_omega is not set".to_string(),
                    ));
                }
                (None, None, None) => None,
                (Some(_), nu, nu_prime) => Some((
                    complex(nu.unwrap_or([0.0, 0.0])),
                    complex(nu_prime.unwrap_or([0.0, 0.0])),
                )),
            };
            Endpoints::Oscillator { alpha, alpha_prime, drive }
        }
        Bath::Spin(_) => {
            if endpoints_section.alpha.is_some()
                || endpoints_section.alpha_prime.is_some()
                || endpoints_section.nu.is_some()
                || endpoints_section.nu_prime.is_some()
            {
                return Err(config_error(
                    "endpoints.alpha: coherent labels only apply to oscillator baths"
                        .to_string(),
                ));
            }
            Endpoints::Spin {
                sector: endpoints_section.sector.map_or(Sector::Up, Sector::from),
            }
        }
    };

    if matches!(bath, Bath::Spin(_)) && system.drive_omega.is_some() {
        return Err(config_error(
            "system.drive_omega: the driven variant applies to oscillator baths only"
                .to_string(),
        ));
    }

    let times = match &config.time_grid {
        None => Vec::new(),
        Some(grid) => {
            if !(grid.t_start.is_finite() && grid.t_start >= 0.0) {
                return Err(config_error(format!(
                    "time_grid.t_start: must be finite and >= 0, got {}",
                    grid.t_start
                )));
            }
            if !(grid.t_end.is_finite() && grid.t_end > grid.t_start) {
                return Err(config_error(format!(
                    "time_grid.t_end: must be finite and exceed t_start, got {}",
                    grid.t_end
                )));
            }
            if grid.n_points < 1 {
                return Err(config_error(
                    "time_grid.n_points: must be at least 1".to_string(),
                ));
            }
            if grid.n_points == 1 {
                vec![grid.t_start]
            } else {
                let step = (grid.t_end - grid.t_start) / (grid.n_points - 1) as f64;
                (0..grid.n_points)
                    .map(|i| grid.t_start + step * i as f64)
                    .collect()
            }
        }
    };
    if times.is_empty() && matches!(mode, Mode::Kernel | Mode::Dephasing) {
        return Err(config_error(format!(
            "time_grid: required for mode {}",
            mode.name()
        )));
    }

    if mode == Mode::Dephasing {
        match (&bath, &endpoints) {
            (Bath::Oscillator(_), Endpoints::Oscillator { alpha, drive, .. }) => {
                if alpha.norm_sq() > 0.0 {
                    return Err(config_error(
                        "endpoints.alpha: the closed-form coherence ratio covers a \
                         ground-state reservoir start; omit it or set it to zeros"
                            .to_string(),
                    ));
                }
                if drive.is_some() {
                    return Err(config_error(
                        "system.drive_omega: dephasing mode covers the undriven kernel"
                            .to_string(),
                    ));
                }
            }
            _ => {
                return Err(config_error(
                    "mode: dephasing requires an oscillator bath".to_string(),
                ));
            }
        }
    }

    if mode == Mode::Structure
        && matches!(bath, Bath::Oscillator(_))
        && system.drive_omega.is_some()
    {
        return Err(config_error(
            "system.drive_omega: structure mode covers the undriven oscillator kernel"
                .to_string(),
        ));
    }

    let tol = config.tolerances.unwrap_or_default();
    tol.validate()
        .map_err(|e| config_error(format!("tolerances: {e}")))?;

    let verify = config.verify.unwrap_or_default();
    let seed = overrides.seed.or(verify.seed).unwrap_or(0);
    let draws = verify.draws.unwrap_or(DEFAULT_VERIFY_DRAWS);
    if draws == 0 {
        return Err(config_error(
            "verify.draws: must be at least 1".to_string(),
        ));
    }
    let check_tolerance = overrides
        .tol
        .or(verify.tolerance)
        .unwrap_or(DEFAULT_CHECK_TOLERANCE);
    if !(check_tolerance.is_finite() && check_tolerance > 0.0) {
        return Err(config_error(format!(
            "verify.tolerance: must be finite and positive, got {check_tolerance}"
        )));
    }

    if config.convention.is_some() && matches!(bath, Bath::Oscillator(_)) {
        return Err(config_error(
            "convention: only applies to spin baths (oscillator kernels use exp(-iHt))"
                .to_string(),
        ));
    }
    let convention = config
        .convention
        .map_or(SignConvention::Plus, SignConvention::from);

    Ok(Resolved {
        mode,
        system,
        bath,
        endpoints,
        times,
        tol,
        seed,
        draws,
        check_tolerance,
        convention,
    })
}
