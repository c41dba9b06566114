//! Two-band tight-binding dispersion along one crystal axis.
//!
//! Both bands are truncated cosine series in `k a`, so every quantity here is
//! periodic in the Brillouin zone and total on the real line. The interband
//! dipole follows the k·p (Kane) form `d_vc = sqrt(E_p / (2 ε_g²))`.

use std::f64::consts::PI;

/// Crystal direction the field is polarized along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Γ-M, the `x` axis of the ZnO model.
    GammaM,
    /// Γ-A, the `z` axis of the ZnO model.
    GammaA,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::GammaM => "gm",
            Direction::GammaA => "ga",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    Valence,
    Conduction,
}

/// All band quantities at one crystal momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandPoint {
    pub valence: f64,
    pub conduction: f64,
    pub valence_velocity: f64,
    pub conduction_velocity: f64,
    pub dipole: f64,
}

impl BandPoint {
    pub fn gap(&self) -> f64 {
        self.conduction - self.valence
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandModel {
    lattice: f64,
    valence: Vec<f64>,
    conduction: Vec<f64>,
    band_gap: f64,
    kane: f64,
}

// ZnO coefficients (a.u.), j = 0..
const ZNO_X_VALENCE: [f64; 6] = [-0.0928, 0.0705, 0.0200, -0.0012, 0.0029, 0.0006];
const ZNO_X_CONDUCTION: [f64; 6] = [0.0898, -0.0814, -0.0024, -0.0048, -0.0003, -0.0009];
const ZNO_Z_VALENCE: [f64; 2] = [-0.0059, 0.0059];
const ZNO_Z_CONDUCTION: [f64; 2] = [0.0435, -0.0435];
const ZNO_A_X: f64 = 5.32;
const ZNO_A_Z: f64 = 9.83;

/// Number of samples used when scanning the zone for gap extrema.
pub const EXTREMA_SCAN_POINTS: usize = 10_000;

impl BandModel {
    /// Builds a model from raw cosine coefficients.
    ///
    /// Returns `None` when the lattice constant or Kane parameter is not
    /// positive, or when the gap closes somewhere in the zone.
    pub fn new(
        lattice: f64,
        valence: Vec<f64>,
        conduction: Vec<f64>,
        band_gap: f64,
        kane: f64,
    ) -> Option<Self> {
        if !(lattice > 0.0 && kane > 0.0 && band_gap.is_finite()) {
            return None;
        }
        let model = Self { lattice, valence, conduction, band_gap, kane };
        let (min_gap, _) = model.gap_extrema();
        (min_gap > 0.0).then_some(model)
    }

    /// ZnO preset along Γ-M (`x`), the "zno_gm" table.
    pub fn zno_gm(band_gap: f64, kane_x: f64) -> Option<Self> {
        Self::new(ZNO_A_X, ZNO_X_VALENCE.to_vec(), ZNO_X_CONDUCTION.to_vec(), band_gap, kane_x)
    }

    /// ZnO preset along Γ-A (`z`), the "zno_ga" table.
    pub fn zno_ga(band_gap: f64, kane_z: f64) -> Option<Self> {
        Self::new(ZNO_A_Z, ZNO_Z_VALENCE.to_vec(), ZNO_Z_CONDUCTION.to_vec(), band_gap, kane_z)
    }

    /// Looks up a built-in preset by name.
    pub fn preset(name: &str, band_gap: f64, kane: f64) -> Option<Self> {
        match name {
            "zno_gm" => Self::zno_gm(band_gap, kane),
            "zno_ga" => Self::zno_ga(band_gap, kane),
            _ => None,
        }
    }

    pub fn for_direction(direction: Direction, band_gap: f64, kane_x: f64, kane_z: f64) -> Option<Self> {
        match direction {
            Direction::GammaM => Self::zno_gm(band_gap, kane_x),
            Direction::GammaA => Self::zno_ga(band_gap, kane_z),
        }
    }

    pub fn lattice(&self) -> f64 {
        self.lattice
    }

    pub fn band_gap(&self) -> f64 {
        self.band_gap
    }

    pub fn kane(&self) -> f64 {
        self.kane
    }

    /// Edge of the first Brillouin zone, `π / a`.
    pub fn zone_edge(&self) -> f64 {
        PI / self.lattice
    }

    pub fn energy(&self, band: Band, k: f64) -> f64 {
        match band {
            Band::Valence => cosine_series(&self.valence, k * self.lattice),
            Band::Conduction => self.band_gap + cosine_series(&self.conduction, k * self.lattice),
        }
    }

    /// Analytic `dE/dk`.
    pub fn group_velocity(&self, band: Band, k: f64) -> f64 {
        let coeffs = match band {
            Band::Valence => &self.valence,
            Band::Conduction => &self.conduction,
        };
        -self.lattice * sine_derivative_series(coeffs, k * self.lattice)
    }

    pub fn gap(&self, k: f64) -> f64 {
        self.energy(Band::Conduction, k) - self.energy(Band::Valence, k)
    }

    pub fn dipole(&self, k: f64) -> f64 {
        kane_dipole(self.kane, self.gap(k))
    }

    /// Evaluates both bands, both velocities and the dipole with a single
    /// `sin_cos` call. This is the hot path of the time propagation.
    pub fn eval(&self, k: f64) -> BandPoint {
        let (s1, c1) = (k * self.lattice).sin_cos();
        let order = self.valence.len().max(self.conduction.len());
        let (mut ev, mut ec, mut vv, mut vc) = (0.0, self.band_gap, 0.0, 0.0);
        // cos(jx), sin(jx) by angle addition
        let (mut cj, mut sj) = (1.0, 0.0);
        for j in 0..order {
            let av = self.valence.get(j).copied().unwrap_or(0.0);
            let ac = self.conduction.get(j).copied().unwrap_or(0.0);
            let jf = j as f64;
            ev += av * cj;
            ec += ac * cj;
            vv -= jf * av * sj;
            vc -= jf * ac * sj;
            let next_c = cj * c1 - sj * s1;
            sj = sj * c1 + cj * s1;
            cj = next_c;
        }
        let gap = ec - ev;
        BandPoint {
            valence: ev,
            conduction: ec,
            valence_velocity: vv * self.lattice,
            conduction_velocity: vc * self.lattice,
            dipole: kane_dipole(self.kane, gap),
        }
    }

    /// Minimum and maximum of `E_c - E_v` over a dense scan of the zone.
    pub fn gap_extrema(&self) -> (f64, f64) {
        let edge = self.zone_edge();
        (0..=EXTREMA_SCAN_POINTS)
            .map(|i| -edge + 2.0 * edge * i as f64 / EXTREMA_SCAN_POINTS as f64)
            .map(|k| self.gap(k))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), g| (lo.min(g), hi.max(g)))
    }

    /// Gap extrema expressed as harmonic orders of `omega`.
    pub fn gap_extrema_orders(&self, omega: f64) -> (f64, f64) {
        let (lo, hi) = self.gap_extrema();
        (lo / omega, hi / omega)
    }

    /// `E_v(Γ) - E_v(π/a)`, the drop of the valence band from the zone
    /// center to the zone edge.
    pub fn valence_bandwidth(&self) -> f64 {
        self.energy(Band::Valence, 0.0) - self.energy(Band::Valence, self.zone_edge())
    }

    /// `max E_v - min E_v` over the zone. Exceeds [`Self::valence_bandwidth`]
    /// when the band bends back before the edge.
    pub fn valence_extent(&self) -> f64 {
        let edge = self.zone_edge();
        let (lo, hi) = (0..=EXTREMA_SCAN_POINTS)
            .map(|i| self.energy(Band::Valence, -edge + 2.0 * edge * i as f64 / EXTREMA_SCAN_POINTS as f64))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| (lo.min(e), hi.max(e)));
        hi - lo
    }
}

fn kane_dipole(kane: f64, gap: f64) -> f64 {
    (kane / (2.0 * gap * gap)).sqrt()
}

fn cosine_series(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().enumerate().map(|(j, a)| a * (j as f64 * x).cos()).sum()
}

fn sine_derivative_series(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().enumerate().map(|(j, a)| j as f64 * a * (j as f64 * x).sin()).sum()
}
