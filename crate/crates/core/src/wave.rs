//! Linear wave kinematics, energy flux and the sea-state to monochromatic
//! equivalence used throughout the device and park models.

use crate::error::{Error, Result};
use crate::table::{parse_numeric_csv, NumericTable};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

/// Physical constants; defaults are sea water at about 20 °C.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhysicalConstants {
    pub rho: f64,
    pub g: f64,
    pub p_atm: f64,
    pub p_vapor: f64,
    pub nu: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            rho: 1025.0,
            g: 9.81,
            p_atm: 101_325.0,
            p_vapor: 2340.0,
            nu: 1.0e-6,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        let all = [self.rho, self.g, self.p_atm, self.p_vapor, self.nu];
        if all.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(Error::domain("physical constants must be strictly positive"))
        }
    }
}

/// Water depth: either finite or the deep-water limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Depth {
    Deep,
    Finite(f64),
}

impl Depth {
    fn check(self) -> Result<()> {
        match self {
            Depth::Finite(h) if !(h > 0.0) => Err(Error::domain(format!("depth must be positive, got {h}"))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonochromaticWave {
    /// Crest-to-trough height (m).
    pub height: f64,
    /// Period (s).
    pub period: f64,
    /// Propagation direction, counterclockwise from +x (rad).
    pub direction: f64,
    pub depth: Depth,
}

impl MonochromaticWave {
    pub fn new(height: f64, period: f64, direction: f64, depth: Depth) -> Result<Self> {
        let w = Self {
            height,
            period,
            direction,
            depth,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.height >= 0.0) || !self.height.is_finite() {
            return Err(Error::domain(format!("wave height must be non-negative, got {}", self.height)));
        }
        if !(self.period > 0.0) || !self.period.is_finite() {
            return Err(Error::domain(format!("wave period must be positive, got {}", self.period)));
        }
        self.depth.check()
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI / self.period
    }

    pub fn amplitude(&self) -> f64 {
        0.5 * self.height
    }

    pub fn wavenumber(&self, c: &PhysicalConstants) -> Result<f64> {
        dispersion_wavenumber(self.omega(), self.depth, c.g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeaState {
    /// Significant wave height (m).
    pub hs: f64,
    /// Energy period (s).
    pub te: f64,
    /// Relative occurrence in [0, 1].
    #[serde(default)]
    pub occurrence: f64,
}

impl SeaState {
    pub fn new(hs: f64, te: f64, occurrence: f64) -> Result<Self> {
        let s = Self { hs, te, occurrence };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hs >= 0.0) || !(self.te > 0.0) || !self.hs.is_finite() || !self.te.is_finite() {
            return Err(Error::domain(format!(
                "sea state needs Hs >= 0 and Te > 0, got ({}, {})",
                self.hs, self.te
            )));
        }
        if !(0.0..=1.0).contains(&self.occurrence) {
            return Err(Error::domain(format!("occurrence {} outside [0, 1]", self.occurrence)));
        }
        Ok(())
    }
}

/// Relative occurrences of sea states at a site. Missing mass is calm sea.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterDiagram {
    pub cells: Vec<SeaState>,
}

pub const OCCURRENCE_MASS_SLACK: f64 = 1e-9;

impl ScatterDiagram {
    pub fn new(cells: Vec<SeaState>) -> Result<Self> {
        for c in &cells {
            c.validate()?;
        }
        let total: f64 = cells.iter().map(|c| c.occurrence).sum();
        if total > 1.0 + OCCURRENCE_MASS_SLACK {
            return Err(Error::domain(format!("occurrences sum to {total} > 1")));
        }
        for (i, a) in cells.iter().enumerate() {
            if cells[..i].iter().any(|b| b.hs == a.hs && b.te == a.te) {
                return Err(Error::domain(format!("duplicate cell (Hs={}, Te={})", a.hs, a.te)));
            }
        }
        Ok(Self { cells })
    }

    pub fn total_occurrence(&self) -> f64 {
        self.cells.iter().map(|c| c.occurrence).sum()
    }

    /// Parses the `Hs,Te,occurrence` CSV format.
    pub fn from_csv(source_name: &str, text: &str) -> Result<Self> {
        let table = parse_numeric_csv(source_name, text, &["Hs", "Te", "occurrence"])?;
        Self::from_table(source_name, &table)
    }

    fn from_table(source_name: &str, table: &NumericTable) -> Result<Self> {
        let mut cells = Vec::with_capacity(table.rows.len());
        for (line, row) in &table.rows {
            let cell = SeaState::new(row[0], row[1], row[2]).map_err(|e| Error::parse(source_name, *line, e.to_string()))?;
            if cells.iter().any(|c: &SeaState| c.hs == cell.hs && c.te == cell.te) {
                return Err(Error::parse(source_name, *line, "duplicate (Hs, Te) cell"));
            }
            cells.push(cell);
        }
        Self::new(cells).map_err(|e| Error::parse(source_name, table.rows.last().map_or(1, |r| r.0), e.to_string()))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("Hs,Te,occurrence\n");
        for c in &self.cells {
            out.push_str(&format!("{:?},{:?},{:?}\n", c.hs, c.te, c.occurrence));
        }
        out
    }
}

/// Deep water when `tanh(k h)` exceeds this at the deep-water wavenumber.
const DEEP_TANH: f64 = 1.0 - 1e-12;

/// Wavenumber solving `ω² = g k tanh(k h)`.
///
/// Bracketed Newton iteration with bisection fallback, started from the
/// deep-water value `ω²/g`.
pub fn dispersion_wavenumber(omega: f64, depth: Depth, g: f64) -> Result<f64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::domain(format!("angular frequency must be positive, got {omega}")));
    }
    depth.check()?;
    let k_deep = omega * omega / g;
    let h = match depth {
        Depth::Deep => return Ok(k_deep),
        Depth::Finite(h) => h,
    };
    if (k_deep * h).tanh() > DEEP_TANH {
        return Ok(k_deep);
    }

    let w2 = omega * omega;
    let f = |k: f64| g * k * (k * h).tanh() - w2;
    // f is increasing in k; f(k_deep) <= 0 since tanh < 1.
    let mut lo = k_deep;
    let mut hi = k_deep / (k_deep * h).tanh();
    hi = hi.max(omega / (g * h).sqrt());
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    let mut k = omega / (g * h).sqrt();
    if !(k > lo && k < hi) {
        k = 0.5 * (lo + hi);
    }
    for _ in 0..200 {
        let t = (k * h).tanh();
        let fk = g * k * t - w2;
        if fk.abs() <= 1e-15 * w2 {
            return Ok(k);
        }
        if fk < 0.0 {
            lo = k;
        } else {
            hi = k;
        }
        let df = g * t + g * k * h * (1.0 - t * t);
        let mut next = k - fk / df;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - k).abs() <= 1e-16 * k {
            return Ok(next);
        }
        k = next;
    }
    if (f(k) / w2).abs() < 1e-12 {
        Ok(k)
    } else {
        Err(Error::numerical("dispersion relation did not converge"))
    }
}

/// Group velocity `∂ω/∂k` at the given frequency.
pub fn group_velocity(omega: f64, depth: Depth, g: f64) -> Result<f64> {
    let k = dispersion_wavenumber(omega, depth, g)?;
    let phase = omega / k;
    Ok(match depth {
        Depth::Deep => 0.5 * phase,
        Depth::Finite(h) => {
            let kh = k * h;
            if kh > 350.0 {
                0.5 * phase
            } else {
                0.5 * phase * (1.0 + 2.0 * kh / (2.0 * kh).sinh())
            }
        }
    })
}

/// Energy flux per unit crest width of a regular wave, `ρ g² T H² / (32π)`.
pub fn monochromatic_flux(w: &MonochromaticWave, c: &PhysicalConstants) -> f64 {
    c.rho * c.g * c.g * w.period * w.height * w.height / (32.0 * PI)
}

/// Energy flux of an irregular sea, `ρ g² Te Hs² / (64π)`.
pub fn seastate_flux(s: &SeaState, c: &PhysicalConstants) -> f64 {
    c.rho * c.g * c.g * s.te * s.hs * s.hs / (64.0 * PI)
}

/// Regular wave carrying the same energy flux: `H = Hs/√2`, `T = Te`.
pub fn equivalent_monochromatic(s: &SeaState, direction: f64, depth: Depth) -> MonochromaticWave {
    MonochromaticWave {
        height: s.hs / SQRT_2,
        period: s.te,
        direction,
        depth,
    }
}

/// Ratio `cosh(k(z+h)) / cosh(kh)` evaluated without overflow.
pub fn depth_attenuation(k: f64, z: f64, depth: Depth) -> f64 {
    match depth {
        Depth::Deep => (k * z).exp(),
        Depth::Finite(h) => {
            let num = 1.0 + (-2.0 * k * (z + h)).exp();
            let den = 1.0 + (-2.0 * k * h).exp();
            (k * z).exp() * num / den
        }
    }
}

/// Dynamic pressure amplitude `iωρ φ̂_i` of the incident wave at `(0, 0, z)`.
pub fn incident_pressure_amplitude(w: &MonochromaticWave, z: f64, c: &PhysicalConstants) -> Result<Complex64> {
    w.validate()?;
    if z > 0.0 {
        return Err(Error::domain(format!("z = {z} is above the mean free surface")));
    }
    if let Depth::Finite(h) = w.depth {
        if z < -h {
            return Err(Error::domain(format!("z = {z} is below the sea bottom at -{h}")));
        }
    }
    let k = w.wavenumber(c)?;
    let omega = w.omega();
    // φ̂_i = -i (H/2)(g/ω) D(z) at the origin; p̂ = iωρ φ̂_i.
    let phi = Complex64::new(0.0, -w.amplitude() * c.g / omega * depth_attenuation(k, z, w.depth));
    Ok(Complex64::new(0.0, omega * c.rho) * phi)
}

#[cfg(test)]
#[allow(clippy::approx_constant)] // 0.7854 is ω for T = 8 s
mod tests {
    use super::*;

    fn consts() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    fn bisection_oracle(omega: f64, h: f64, g: f64) -> f64 {
        let f = |k: f64| omega * omega - g * k * (k * h).tanh();
        let (mut lo, mut hi) = (1e-12, 10.0 * omega * omega / g + 10.0);
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn deep_water_closed_form() {
        let k = dispersion_wavenumber(0.7854, Depth::Deep, 9.81).unwrap();
        assert!((k - 0.7854f64.powi(2) / 9.81).abs() < 1e-15);
        assert!((k - 0.06288).abs() < 1e-5);
    }

    #[test]
    fn thousand_metres_is_deep() {
        let k = dispersion_wavenumber(0.7854, Depth::Finite(1000.0), 9.81).unwrap();
        let oracle = bisection_oracle(0.7854, 1000.0, 9.81);
        let deep = 0.7854f64.powi(2) / 9.81;
        assert!(((k - deep) / deep).abs() < 1e-12);
        assert!(((k - oracle) / oracle).abs() < 1e-12);
    }

    #[test]
    fn finite_depth_matches_bisection() {
        for &(omega, h) in &[(0.3, 10.0), (0.7854, 20.0), (1.5, 3.0), (0.05, 50.0), (2.0, 0.5)] {
            let k = dispersion_wavenumber(omega, Depth::Finite(h), 9.81).unwrap();
            let oracle = bisection_oracle(omega, h, 9.81);
            assert!(((k - oracle) / oracle).abs() < 1e-12, "omega={omega} h={h}");
            let resid = (omega * omega - 9.81 * k * (k * h).tanh()).abs() / (omega * omega);
            assert!(resid < 1e-12);
        }
    }

    #[test]
    fn shallow_water_limit() {
        let (omega, h) = (1e-3, 5.0);
        let k = dispersion_wavenumber(omega, Depth::Finite(h), 9.81).unwrap();
        let shallow = omega / (9.81 * h).sqrt();
        assert!(((k - shallow) / shallow).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(dispersion_wavenumber(0.0, Depth::Deep, 9.81).is_err());
        assert!(dispersion_wavenumber(1.0, Depth::Finite(-1.0), 9.81).is_err());
    }

    #[test]
    fn flux_values() {
        let w = MonochromaticWave::new(1.0, 8.0, 0.0, Depth::Deep).unwrap();
        let j = monochromatic_flux(&w, &consts());
        // 1025 * 9.81^2 * 8 / (32 π) = 7849.681
        assert!((j - 7849.681).abs() < 0.01, "{j}");
        let w0 = MonochromaticWave::new(0.0, 8.0, 0.0, Depth::Deep).unwrap();
        assert_eq!(monochromatic_flux(&w0, &consts()), 0.0);
        let w2 = MonochromaticWave { height: 2.0, ..w };
        assert!((monochromatic_flux(&w2, &consts()) / j - 4.0).abs() < 1e-14);
    }

    #[test]
    fn seastate_equivalence() {
        let s = SeaState::new(3.0, 8.0, 0.0).unwrap();
        let m = equivalent_monochromatic(&s, 0.0, Depth::Deep);
        assert!((m.height - 2.12132).abs() < 1e-5);
        assert_eq!(m.period, 8.0);
        let js = seastate_flux(&s, &consts());
        let jm = monochromatic_flux(&m, &consts());
        assert!(((js - jm) / js).abs() < 1e-14);
        let mono_same = MonochromaticWave::new(3.0, 8.0, 0.0, Depth::Deep).unwrap();
        assert!((js / monochromatic_flux(&mono_same, &consts()) - 0.5).abs() < 1e-15);
        let small = equivalent_monochromatic(&SeaState::new(0.5, 4.0, 0.0).unwrap(), 0.0, Depth::Deep);
        assert!((small.height - 0.35355).abs() < 1e-5);
    }

    #[test]
    fn incident_pressure_surface_and_decay() {
        let c = consts();
        let w = MonochromaticWave::new(2.0, 8.0, 0.0, Depth::Deep).unwrap();
        let p0 = incident_pressure_amplitude(&w, 0.0, &c).unwrap();
        assert!((p0.norm() - c.rho * c.g).abs() < 1e-9);
        let k = w.wavenumber(&c).unwrap();
        let d = 1.0 / k;
        let pd = incident_pressure_amplitude(&w, -d, &c).unwrap();
        assert!((pd.norm() - c.rho * c.g * (-1.0f64).exp()).abs() < 1e-9);
        let mut last = f64::INFINITY;
        for i in 0..50 {
            let p = incident_pressure_amplitude(&w, -0.5 * i as f64, &c).unwrap().norm();
            assert!(p < last);
            last = p;
        }
        assert!(incident_pressure_amplitude(&w, 0.1, &c).is_err());
        let shallow = MonochromaticWave::new(2.0, 8.0, 0.0, Depth::Finite(10.0)).unwrap();
        assert!(incident_pressure_amplitude(&shallow, -11.0, &c).is_err());
    }

    #[test]
    fn scatter_csv() {
        let d = ScatterDiagram::from_csv("s.csv", "Hs,Te,occurrence\n1,6,0.3\n2,7,0.2\n").unwrap();
        assert_eq!(d.cells.len(), 2);
        assert!(ScatterDiagram::from_csv("s.csv", "Hs,Te,occurrence\n1,6,0.7\n2,7,0.4\n").is_err());
        assert!(ScatterDiagram::from_csv("s.csv", "Hs,Te,occurrence\n1,6,0.1\n1,6,0.1\n").is_err());
        let back = ScatterDiagram::from_csv("s.csv", &d.to_csv()).unwrap();
        assert_eq!(back, d);
    }
}
