//! Simulation configuration: a flat `key = value` document.
//!
//! ```text
//! # Γ-M, finite dephasing
//! direction = gm
//! e0_v_per_angstrom = 0.5
//! t2_fs = 1
//! ```
//!
//! Lab-unit keys are converted to atomic units on load. Omitted keys take the
//! defaults of [`SimulationConfig::default`]; unknown keys are rejected.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::bands::{BandModel, Direction};
use crate::units::UnitSystem;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`, found `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{key}`: cannot parse `{value}` ({reason})")]
    Value { key: String, value: String, reason: String },
    #[error("key `{key}`: {reason}")]
    Invariant { key: &'static str, reason: String },
}

impl ConfigError {
    /// Key the diagnostic refers to, if any.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::UnknownKey(k) => Some(k),
            ConfigError::Value { key, .. } => Some(key),
            ConfigError::Invariant { key, .. } => Some(key),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Envelope {
    Gaussian,
}

/// Which envelope the configured cycle count is the FWHM of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FwhmOf {
    Field,
    Intensity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dephasing {
    Infinite,
    /// Dephasing time in atomic units.
    Finite(f64),
}

impl Dephasing {
    pub fn rate(self) -> f64 {
        match self {
            Dephasing::Infinite => 0.0,
            Dephasing::Finite(t2) => 1.0 / t2,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Dephasing::Infinite)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Hann,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub direction: Direction,
    /// Band gap at Γ (a.u.).
    pub band_gap: f64,
    pub kane_x: f64,
    pub kane_z: f64,
    pub wavelength_um: f64,
    /// Peak field (a.u.).
    pub field_amplitude: f64,
    pub n_cycles: f64,
    pub envelope: Envelope,
    pub fwhm_of: FwhmOf,
    /// Carrier-envelope phase (rad).
    pub cep: f64,
    pub dephasing: Dephasing,
    pub n_k: usize,
    pub n_t: usize,
    /// Highest harmonic mode `q_c`.
    pub q_cutoff: usize,
    /// Number of coherently contributing Brillouin zones.
    pub n_z: f64,
    /// Coupling `g(ω_L)` (a.u.).
    pub g0: f64,
    pub window: Window,
    /// RK4 substeps per time-grid interval.
    pub rk_substeps: usize,
    /// Half-width of the time window in units of the field FWHM.
    pub span_fwhm: f64,
}

/// Coupling obtained by `hhgq calibrate` with the default configuration:
/// fundamental-mode linear entropy 0.44 at the reference working point.
pub const DEFAULT_G0: f64 = 2.4002e-12;

impl Default for SimulationConfig {
    fn default() -> Self {
        let u = UnitSystem::CODATA;
        Self {
            direction: Direction::GammaM,
            band_gap: 0.1213,
            kane_x: 0.355,
            kane_z: 0.479,
            wavelength_um: 3.25,
            field_amplitude: u.field_to_au(0.5),
            n_cycles: 9.0,
            envelope: Envelope::Gaussian,
            fwhm_of: FwhmOf::Field,
            cep: 0.0,
            dephasing: Dephasing::Finite(u.fs_to_au(1.0)),
            n_k: 201,
            n_t: 32768,
            q_cutoff: 17,
            n_z: 6.6e6,
            g0: DEFAULT_G0,
            window: Window::Hann,
            rk_substeps: 5,
            span_fwhm: 4.5,
        }
    }
}

/// Every key the document format accepts.
pub const KEYS: &[&str] = &[
    "direction",
    "e_g_au",
    "ep_x_au",
    "ep_z_au",
    "lambda_um",
    "e0_v_per_angstrom",
    "e0_au",
    "n_cycles",
    "envelope",
    "fwhm_of",
    "cep_rad",
    "t2_fs",
    "t2_au",
    "n_k",
    "n_t",
    "q_cutoff",
    "n_z",
    "g0",
    "window",
    "rk_substeps",
    "span_fwhm",
];

pub fn load_config(path: impl AsRef<Path>) -> Result<SimulationConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    SimulationConfig::parse(&text)
}

impl SimulationConfig {
    /// Parses a document on top of the defaults and validates the result.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line: n + 1, text: raw.to_string() })?;
            cfg.set_raw(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one `key=value` override (as passed to `--set`) and revalidates.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax { line: 0, text: assignment.to_string() })?;
        self.set_raw(key.trim(), value.trim())?;
        self.validate()
    }

    /// Sets a single key without validating cross-field invariants.
    pub fn set_raw(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let u = UnitSystem::CODATA;
        let bad = |reason: &str| ConfigError::Value {
            key: key.to_string(),
            value: value.to_string(),
            reason: reason.to_string(),
        };
        let float = || value.parse::<f64>().map_err(|e| bad(&e.to_string()));
        let count = || {
            // allow `6.6e6`-style counts as long as they are integral
            value
                .parse::<usize>()
                .or_else(|_| match value.parse::<f64>() {
                    Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < 1e15 => Ok(x as usize),
                    _ => Err(bad("expected a non-negative integer")),
                })
        };
        match key {
            "direction" => {
                self.direction = match value {
                    "gm" => Direction::GammaM,
                    "ga" => Direction::GammaA,
                    _ => return Err(bad("expected gm or ga")),
                }
            }
            "e_g_au" => self.band_gap = float()?,
            "ep_x_au" => self.kane_x = float()?,
            "ep_z_au" => self.kane_z = float()?,
            "lambda_um" => self.wavelength_um = float()?,
            "e0_v_per_angstrom" => self.field_amplitude = u.field_to_au(float()?),
            "e0_au" => self.field_amplitude = float()?,
            "n_cycles" => self.n_cycles = float()?,
            "envelope" => {
                self.envelope = match value {
                    "gaussian" => Envelope::Gaussian,
                    _ => return Err(bad("only `gaussian` is supported")),
                }
            }
            "fwhm_of" => {
                self.fwhm_of = match value {
                    "field" => FwhmOf::Field,
                    "intensity" => FwhmOf::Intensity,
                    _ => return Err(bad("expected field or intensity")),
                }
            }
            "cep_rad" => self.cep = float()?,
            "t2_fs" | "t2_au" => {
                self.dephasing = if matches!(value, "inf" | "infinite" | "∞") {
                    Dephasing::Infinite
                } else {
                    let x = float()?;
                    if x.is_infinite() && x > 0.0 {
                        Dephasing::Infinite
                    } else if key == "t2_fs" {
                        Dephasing::Finite(u.fs_to_au(x))
                    } else {
                        Dephasing::Finite(x)
                    }
                }
            }
            "n_k" => self.n_k = count()?,
            "n_t" => self.n_t = count()?,
            "q_cutoff" => self.q_cutoff = count()?,
            "n_z" => self.n_z = float()?,
            "g0" => self.g0 = float()?,
            "window" => {
                self.window = match value {
                    "hann" => Window::Hann,
                    "none" => Window::None,
                    _ => return Err(bad("expected hann or none")),
                }
            }
            "rk_substeps" => self.rk_substeps = count()?,
            "span_fwhm" => self.span_fwhm = float()?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn check(ok: bool, key: &'static str, reason: impl Into<String>) -> Result<(), ConfigError> {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::Invariant { key, reason: reason.into() })
            }
        }
        check(self.n_k >= 3 && self.n_k % 2 == 1, "n_k", format!("must be odd and >= 3, got {}", self.n_k))?;
        check(
            self.n_t >= 16 && self.n_t.is_power_of_two(),
            "n_t",
            format!("must be a power of two >= 16, got {}", self.n_t),
        )?;
        check(self.q_cutoff >= 1, "q_cutoff", "must be >= 1")?;
        check(self.n_z > 0.0 && self.n_z.is_finite(), "n_z", "must be positive")?;
        check(self.g0 > 0.0 && self.g0.is_finite(), "g0", "must be positive")?;
        check(self.wavelength_um > 0.0 && self.wavelength_um.is_finite(), "lambda_um", "must be positive")?;
        check(
            self.field_amplitude >= 0.0 && self.field_amplitude.is_finite(),
            "e0_v_per_angstrom",
            "must be non-negative",
        )?;
        check(self.n_cycles > 0.0 && self.n_cycles.is_finite(), "n_cycles", "must be positive")?;
        check(self.cep.is_finite(), "cep_rad", "must be finite")?;
        if let Dephasing::Finite(t2) = self.dephasing {
            check(t2 > 0.0 && t2.is_finite(), "t2_fs", "must be positive or `inf`")?;
        }
        check(self.rk_substeps >= 1, "rk_substeps", "must be >= 1")?;
        check(self.span_fwhm > 0.0 && self.span_fwhm.is_finite(), "span_fwhm", "must be positive")?;
        check(self.kane_x > 0.0, "ep_x_au", "must be positive")?;
        check(self.kane_z > 0.0, "ep_z_au", "must be positive")?;
        if self.band_model().is_none() {
            return Err(ConfigError::Invariant {
                key: "e_g_au",
                reason: format!("band gap closes somewhere in the zone for e_g_au = {}", self.band_gap),
            });
        }
        Ok(())
    }

    /// Laser angular frequency ω_L (a.u.).
    pub fn omega(&self) -> f64 {
        UnitSystem::CODATA.wavelength_to_omega(self.wavelength_um)
    }

    /// Optical period `2π/ω_L` (a.u.).
    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.omega()
    }

    /// Kane parameter of the active axis.
    pub fn kane(&self) -> f64 {
        match self.direction {
            Direction::GammaM => self.kane_x,
            Direction::GammaA => self.kane_z,
        }
    }

    pub fn band_model(&self) -> Option<BandModel> {
        BandModel::for_direction(self.direction, self.band_gap, self.kane_x, self.kane_z)
    }

    pub fn field_v_per_angstrom(&self) -> f64 {
        UnitSystem::CODATA.field_to_lab(self.field_amplitude)
    }

    /// Canonical document that parses back to an identical config. Floats are
    /// written in atomic units with shortest round-trip formatting.
    pub fn to_document(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: &dyn fmt::Display| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("direction", &self.direction.as_str());
        put("e_g_au", &self.band_gap);
        put("ep_x_au", &self.kane_x);
        put("ep_z_au", &self.kane_z);
        put("lambda_um", &self.wavelength_um);
        put("e0_au", &self.field_amplitude);
        put("n_cycles", &self.n_cycles);
        put("envelope", &"gaussian");
        put(
            "fwhm_of",
            &match self.fwhm_of {
                FwhmOf::Field => "field",
                FwhmOf::Intensity => "intensity",
            },
        );
        put("cep_rad", &self.cep);
        match self.dephasing {
            Dephasing::Infinite => put("t2_au", &"inf"),
            Dephasing::Finite(t2) => put("t2_au", &t2),
        }
        put("n_k", &self.n_k);
        put("n_t", &self.n_t);
        put("q_cutoff", &self.q_cutoff);
        put("n_z", &self.n_z);
        put("g0", &self.g0);
        put(
            "window",
            &match self.window {
                Window::Hann => "hann",
                Window::None => "none",
            },
        );
        put("rk_substeps", &self.rk_substeps);
        put("span_fwhm", &self.span_fwhm);
        out
    }
}
