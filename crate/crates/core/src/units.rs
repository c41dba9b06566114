//! Conversions between laboratory units and Hartree atomic units.
//!
//! Everything inside the crate runs in atomic units (ħ = e = mₑ = 1). Lab
//! units (eV, V/Å, µm, fs) only appear at the configuration and report
//! boundary.

use std::f64::consts::TAU;

/// Conversion factors between lab units and atomic units (CODATA 2018).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    /// eV per Hartree.
    pub hartree_ev: f64,
    /// V/Å per atomic unit of field strength.
    pub field_v_per_angstrom: f64,
    /// Å per bohr.
    pub bohr_angstrom: f64,
    /// fs per atomic unit of time.
    pub time_fs: f64,
    /// Speed of light in atomic units.
    pub speed_of_light: f64,
}

impl UnitSystem {
    pub const CODATA: UnitSystem = UnitSystem {
        hartree_ev: 27.211_386_245_988,
        field_v_per_angstrom: 51.422_067_476_326,
        bohr_angstrom: 0.529_177_210_903,
        time_fs: 0.024_188_843_265_857,
        speed_of_light: 137.035_999_084,
    };

    pub fn ev_to_au(&self, ev: f64) -> f64 {
        ev / self.hartree_ev
    }

    pub fn au_to_ev(&self, au: f64) -> f64 {
        au * self.hartree_ev
    }

    pub fn field_to_au(&self, v_per_angstrom: f64) -> f64 {
        v_per_angstrom / self.field_v_per_angstrom
    }

    pub fn field_to_lab(&self, au: f64) -> f64 {
        au * self.field_v_per_angstrom
    }

    pub fn fs_to_au(&self, fs: f64) -> f64 {
        fs / self.time_fs
    }

    pub fn au_to_fs(&self, au: f64) -> f64 {
        au * self.time_fs
    }

    pub fn um_to_au(&self, um: f64) -> f64 {
        um * 1e4 / self.bohr_angstrom
    }

    pub fn au_to_um(&self, au: f64) -> f64 {
        au * self.bohr_angstrom * 1e-4
    }

    /// Angular frequency (a.u.) of light with the given vacuum wavelength in µm.
    pub fn wavelength_to_omega(&self, lambda_um: f64) -> f64 {
        TAU * self.speed_of_light / self.um_to_au(lambda_um)
    }

    pub fn omega_to_wavelength(&self, omega: f64) -> f64 {
        self.au_to_um(TAU * self.speed_of_light / omega)
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::CODATA
    }
}
