//! Wells turbine: characteristic curves, pressure-jump and torque laws,
//! linear damping, mean-power series and the cavitation pressure bound.

use crate::error::{Error, Result};
use crate::table::{parse_numeric_csv, require_strictly_increasing};
use crate::wave::PhysicalConstants;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Default residual tolerance for the even-polynomial torque fit.
pub const FIT_TOLERANCE: f64 = 1e-3;
/// Highest half-degree `d` tried by the torque fit.
pub const MAX_FIT_HALF_DEGREE: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurbineSpec {
    pub tip_radius: f64,
    pub hub_radius: f64,
    pub chord: f64,
    pub blades: u32,
    /// Duct radius at the turbine section.
    pub duct_radius: f64,
    pub omega_min: f64,
    pub omega_max: f64,
}

impl TurbineSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.tip_radius, self.hub_radius, self.chord, self.duct_radius, self.omega_min];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) || self.blades == 0 {
            return Err(Error::domain("turbine dimensions and speed bounds must be positive"));
        }
        if self.hub_radius >= self.tip_radius {
            return Err(Error::domain("hub radius must be smaller than tip radius"));
        }
        if self.tip_radius > self.duct_radius {
            return Err(Error::domain("blade tips extend beyond the duct wall"));
        }
        if !(self.omega_max > self.omega_min) {
            return Err(Error::domain("omega_max must exceed omega_min"));
        }
        Ok(())
    }

    /// Flow-section area between hub and duct wall.
    pub fn flow_area(&self) -> f64 {
        PI * (self.duct_radius.powi(2) - self.hub_radius.powi(2))
    }

    pub fn k_a(&self, rho: f64) -> f64 {
        rho * self.chord * (self.tip_radius - self.hub_radius) * self.blades as f64 / 2.0
    }

    pub fn solidity(&self) -> f64 {
        self.chord * (self.tip_radius - self.hub_radius) * self.blades as f64 / self.flow_area()
    }
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch–Carlson slopes).
#[derive(Debug, Clone, PartialEq)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::domain("interpolation needs at least two points"));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("interpolation abscissae must increase strictly"));
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let del: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = del[0];
            d[1] = del[0];
        } else {
            for i in 1..n - 1 {
                if del[i - 1] * del[i] > 0.0 {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    d[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
                }
            }
            d[0] = end_slope(h[0], h[1], del[0], del[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
        }
        Ok(Self { x, y, d })
    }

    pub fn x_min(&self) -> f64 {
        self.x[0]
    }

    pub fn x_max(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    fn segment(&self, x: f64) -> usize {
        match self.x.partition_point(|&v| v <= x) {
            0 => 0,
            i => (i - 1).min(self.x.len() - 2),
        }
    }

    /// Value at `x`, which must lie inside the data range.
    pub fn eval(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.x[i + 1] - self.x[i];
        let t = (x - self.x[i]) / h;
        let h00 = (1.0 + 2.0 * t) * (1.0 - t).powi(2);
        let h10 = t * (1.0 - t).powi(2);
        let h01 = t * t * (3.0 - 2.0 * t);
        let h11 = t * t * (t - 1.0);
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.x[i + 1] - self.x[i];
        let t = (x - self.x[i]) / h;
        let dh00 = 6.0 * t * t - 6.0 * t;
        let dh10 = 3.0 * t * t - 4.0 * t + 1.0;
        let dh01 = -dh00;
        let dh11 = 3.0 * t * t - 2.0 * t;
        (dh00 * self.y[i] + dh01 * self.y[i + 1]) / h + dh10 * self.d[i] + dh11 * self.d[i + 1]
    }
}

fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d * del0 <= 0.0 {
        0.0
    } else if del0 * del1 < 0.0 && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}

/// Tabulated turbine characteristics plus the even-polynomial torque fit.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicCurves {
    pub phi: Vec<f64>,
    pub ca: Vec<f64>,
    pub ct: Vec<f64>,
    ca_interp: Pchip,
    /// `c_0, c_2, …, c_2d` of `C_t(φ) ≈ Σ c_2k φ^2k`.
    pub torque_poly: Vec<f64>,
    pub fit_residual: f64,
    pub phi_max_model: f64,
    pub phi_opt: f64,
    pub ca_slope0: f64,
}

impl CharacteristicCurves {
    pub fn new(phi: Vec<f64>, ca: Vec<f64>, ct: Vec<f64>, fit_tol: f64) -> Result<Self> {
        if phi.len() < 3 || ca.len() != phi.len() || ct.len() != phi.len() {
            return Err(Error::domain("turbine curves need at least three (phi, Ca, Ct) rows"));
        }
        if phi[0] != 0.0 {
            return Err(Error::domain("turbine curve table must start at phi = 0"));
        }
        if ca[0] < 0.0 {
            return Err(Error::domain("Ca(0) must be non-negative"));
        }
        let ca_interp = Pchip::new(phi.clone(), ca.clone())?;
        let (torque_poly, fit_residual) = fit_even_polynomial(&phi, &ct, fit_tol)?;
        let phi_max_model = phi[phi.len() - 1];
        let phi_opt = polynomial_argmax(&torque_poly, &phi, &ct);
        let ca_slope0 = ca_interp.derivative(0.0);
        Ok(Self {
            phi,
            ca,
            ct,
            ca_interp,
            torque_poly,
            fit_residual,
            phi_max_model,
            phi_opt,
            ca_slope0,
        })
    }

    /// Parses the `phi,Ca,Ct` CSV format.
    pub fn from_csv(source_name: &str, text: &str, fit_tol: f64) -> Result<Self> {
        let t = parse_numeric_csv(source_name, text, &["phi", "Ca", "Ct"])?;
        require_strictly_increasing(source_name, &t, 0)?;
        let col = |j: usize| t.rows.iter().map(|r| r.1[j]).collect::<Vec<_>>();
        Self::new(col(0), col(1), col(2), fit_tol).map_err(|e| Error::parse(source_name, t.rows.first().map_or(1, |r| r.0), e.to_string()))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("phi,Ca,Ct\n");
        for i in 0..self.phi.len() {
            out.push_str(&format!("{:?},{:?},{:?}\n", self.phi[i], self.ca[i], self.ct[i]));
        }
        out
    }

    /// `C_a(|φ|)`, clamped to the table edge.
    pub fn ca(&self, phi: f64) -> f64 {
        let a = phi.abs();
        if a > self.phi_max_model {
            log::trace!("flow coefficient {a} beyond the Ca table; clamped to {}", self.phi_max_model);
            return self.ca_interp.eval(self.phi_max_model);
        }
        self.ca_interp.eval(a)
    }

    /// Polynomial `C_t(|φ|)`, clamped to the validity bound.
    pub fn ct(&self, phi: f64) -> f64 {
        let a = phi.abs();
        if a > self.phi_max_model {
            log::trace!("flow coefficient {a} beyond the torque fit; clamped to {}", self.phi_max_model);
            return eval_even(&self.torque_poly, self.phi_max_model);
        }
        eval_even(&self.torque_poly, a)
    }

    pub fn half_degree(&self) -> usize {
        self.torque_poly.len() - 1
    }
}

fn eval_even(c: &[f64], phi: f64) -> f64 {
    let p2 = phi * phi;
    c.iter().rev().fold(0.0, |acc, &ck| acc * p2 + ck)
}

/// Least-squares fit of `Σ_{k≤d} c_2k φ^2k`, raising `d` until the maximum
/// residual on the table is below `tol`.
fn fit_even_polynomial(phi: &[f64], ct: &[f64], tol: f64) -> Result<(Vec<f64>, f64)> {
    let scale = phi.iter().fold(0.0f64, |m, p| m.max(p.abs()));
    let mut best = None;
    for d in 1..=MAX_FIT_HALF_DEGREE {
        if d + 1 > phi.len() {
            break;
        }
        let a = DMatrix::from_fn(phi.len(), d + 1, |i, k| (phi[i] / scale).powi(2 * k as i32));
        let b = DVector::from_column_slice(ct);
        let svd = a.svd(true, true);
        let sol = svd
            .solve(&b, 1e-14)
            .map_err(|e| Error::numerical(format!("torque fit failed: {e}")))?;
        let coeffs: Vec<f64> = (0..=d).map(|k| sol[k] / scale.powi(2 * k as i32)).collect();
        let residual = phi
            .iter()
            .zip(ct)
            .map(|(&p, &c)| (eval_even(&coeffs, p) - c).abs())
            .fold(0.0, f64::max);
        if residual < tol {
            return Ok((coeffs, residual));
        }
        best = Some(residual);
    }
    Err(Error::domain(format!(
        "even polynomial of degree {} leaves residual {:.3e} above tolerance {tol:e}",
        2 * MAX_FIT_HALF_DEGREE,
        best.unwrap_or(f64::NAN)
    )))
}

/// Maximizer of the fitted torque curve, refined around the best table point.
fn polynomial_argmax(c: &[f64], phi: &[f64], ct: &[f64]) -> f64 {
    let i = (0..ct.len()).max_by(|&a, &b| ct[a].total_cmp(&ct[b])).unwrap_or(0);
    let lo = phi[i.saturating_sub(1)];
    let hi = phi[(i + 1).min(phi.len() - 1)];
    crate::optim::minimize_bounded(|p| -eval_even(c, p), lo, hi, 1e-12, 1e-14, 200).x
}

/// `C_p,min` data for one airfoil, and its global minimum `C̃_p,min`.
#[derive(Debug, Clone, PartialEq)]
pub struct CavitationTable {
    pub phi: Vec<f64>,
    pub cp_min: Vec<f64>,
    pub cp_min_tilde: f64,
}

impl CavitationTable {
    pub fn new(phi: Vec<f64>, cp_min: Vec<f64>) -> Result<Self> {
        if phi.is_empty() || phi.len() != cp_min.len() {
            return Err(Error::domain("cavitation table needs matching non-empty columns"));
        }
        if cp_min.iter().any(|&c| !(c < 0.0)) {
            return Err(Error::domain("all Cpmin entries must be negative"));
        }
        let cp_min_tilde = cp_min.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Self { phi, cp_min, cp_min_tilde })
    }

    /// A table reduced to its single governing value.
    pub fn from_minimum(cp_min_tilde: f64) -> Result<Self> {
        Self::new(vec![0.0], vec![cp_min_tilde])
    }

    /// Parses the `phi,Cpmin` CSV format.
    pub fn from_csv(source_name: &str, text: &str) -> Result<Self> {
        let t = parse_numeric_csv(source_name, text, &["phi", "Cpmin"])?;
        require_strictly_increasing(source_name, &t, 0)?;
        for (line, row) in &t.rows {
            if !(row[1] < 0.0) {
                return Err(Error::parse(source_name, *line, "Cpmin must be negative"));
            }
        }
        let col = |j: usize| t.rows.iter().map(|r| r.1[j]).collect::<Vec<_>>();
        Self::new(col(0), col(1))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("phi,Cpmin\n");
        for (p, c) in self.phi.iter().zip(&self.cp_min) {
            out.push_str(&format!("{p:?},{c:?}\n"));
        }
        out
    }
}

/// A turbine bound to its curves and to a fluid density.
#[derive(Debug, Clone, PartialEq)]
pub struct WellsTurbine {
    pub spec: TurbineSpec,
    pub curves: CharacteristicCurves,
    pub rho: f64,
}

impl WellsTurbine {
    pub fn new(spec: TurbineSpec, curves: CharacteristicCurves, rho: f64) -> Result<Self> {
        spec.validate()?;
        if !(rho > 0.0) {
            return Err(Error::domain("density must be positive"));
        }
        Ok(Self { spec, curves, rho })
    }

    pub fn k_a(&self) -> f64 {
        self.spec.k_a(self.rho)
    }

    pub fn s_t(&self) -> f64 {
        self.spec.flow_area()
    }

    pub fn flow_coefficient(&self, v_t: f64, omega_t: f64) -> Result<f64> {
        flow_coefficient(v_t, omega_t, self.spec.tip_radius)
    }

    /// Pressure drop across the rotor, signed with the flow.
    pub fn pressure_jump(&self, v_t: f64, omega_t: f64) -> f64 {
        let tip = omega_t * self.spec.tip_radius;
        let phi = v_t / tip;
        let mag = self.curves.ca(phi) * self.k_a() / self.s_t() * (v_t * v_t + tip * tip);
        if v_t < 0.0 {
            -mag
        } else {
            mag
        }
    }

    pub fn torque(&self, v_t: f64, omega_t: f64) -> f64 {
        let r = self.spec.tip_radius;
        let tip = omega_t * r;
        self.curves.ct(v_t / tip) * self.k_a() * r * (v_t * v_t + tip * tip)
    }

    /// Linearized damping `Λ = ∂Δp/∂Q` at zero flow.
    pub fn lambda(&self, omega_t: f64) -> f64 {
        self.curves.ca_slope0 * self.k_a() * omega_t * self.spec.tip_radius / self.s_t().powi(2)
    }

    /// Rotational speed giving the damping `lambda`.
    pub fn omega_for_lambda(&self, lambda: f64) -> f64 {
        lambda / self.lambda(1.0)
    }

    /// Coefficients `p_n` of the mean mechanical power `Σ p_n (ω|ζ̂|)^{2n}`.
    pub fn mean_power_coefficients(&self, omega_t: f64, s0: f64) -> Vec<f64> {
        let c = &self.curves.torque_poly;
        let d = c.len() - 1;
        let w = self.spec.tip_radius * omega_t;
        let ratio = s0 / self.s_t();
        (0..=d + 1)
            .map(|n| {
                let lower = if n >= 1 { c[n - 1] } else { 0.0 };
                let upper = if n <= d { c[n] } else { 0.0 };
                in_integral(2 * n as i64).unwrap() * (lower + upper) * self.k_a() * w.powi(3 - 2 * n as i32) * ratio.powi(2 * n as i32)
            })
            .collect()
    }
}

pub fn flow_coefficient(v_t: f64, omega_t: f64, tip_radius: f64) -> Result<f64> {
    if !(omega_t > 0.0) {
        return Err(Error::domain(format!("rotational speed must be positive, got {omega_t}")));
    }
    Ok(v_t / (omega_t * tip_radius))
}

/// `(1/2π) ∫ sinⁿ` over a period: `(n−1)!!/n!!` for even `n`, zero for odd.
pub fn in_integral(n: i64) -> Result<f64> {
    if n < 0 {
        return Err(Error::domain(format!("I_n needs n >= 0, got {n}")));
    }
    if n % 2 == 1 {
        return Ok(0.0);
    }
    let mut v = 1.0;
    let mut k = 2;
    while k <= n {
        v *= (k - 1) as f64 / k as f64;
        k += 2;
    }
    Ok(v)
}

/// Evaluates `Σ p_n x^{2n}`.
pub fn power_series(p: &[f64], x: f64) -> f64 {
    let x2 = x * x;
    p.iter().rev().fold(0.0, |acc, &pn| acc * x2 + pn)
}

/// Derivative of `Σ p_n x^{2n}` with respect to `x`.
pub fn power_series_derivative(p: &[f64], x: f64) -> f64 {
    let x2 = x * x;
    let mut acc = 0.0;
    for n in (1..p.len()).rev() {
        acc = acc * x2 + 2.0 * n as f64 * p[n];
    }
    acc * x
}

/// Ingredients of the cycle-minimum cavitation bound for a sinusoidal column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PressureBound {
    /// Constant part `p_atm − ρ g z_t + ½ρ ω_t² r_t² C̃`.
    pub p_bar: f64,
    /// Hydrostatic fluctuation amplitude `ρ g |ζ̂|`.
    pub hydrostatic: f64,
    /// Suction amplitude `½ρ C̃ (ω|ζ̂| S0/S_t)²` (non-positive).
    pub suction: f64,
}

impl PressureBound {
    pub fn new(
        zeta_amp: f64,
        omega: f64,
        omega_t: f64,
        z_t: f64,
        turbine: &WellsTurbine,
        cp_min_tilde: f64,
        consts: &PhysicalConstants,
        s0: f64,
    ) -> Self {
        let rho = consts.rho;
        let tip = omega_t * turbine.spec.tip_radius;
        let v_amp = omega * zeta_amp * s0 / turbine.s_t();
        Self {
            p_bar: consts.p_atm - rho * consts.g * z_t + 0.5 * rho * tip * tip * cp_min_tilde,
            hydrostatic: rho * consts.g * zeta_amp,
            suction: 0.5 * rho * cp_min_tilde * v_amp * v_amp,
        }
    }

    /// Bound at phase `x = ωt`, with `ζ = |ζ̂| cos x`.
    pub fn at_phase(&self, x: f64) -> f64 {
        self.p_bar + self.hydrostatic * x.cos() + self.suction * x.sin().powi(2)
    }

    /// Interior stationary value, present when `|a/(2b)| ≤ 1`.
    pub fn interior_minimum(&self) -> Option<f64> {
        let (a, b) = (self.hydrostatic, self.suction);
        if b < 0.0 && a <= -2.0 * b {
            Some(self.p_bar + b + a * a / (4.0 * b))
        } else {
            None
        }
    }

    /// Minimum over the cycle.
    pub fn minimum(&self) -> f64 {
        self.interior_minimum().unwrap_or(self.p_bar - self.hydrostatic)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_turbine() -> WellsTurbine {
        let phi: Vec<f64> = (0..=16).map(|i| 0.02 * i as f64).collect();
        let ca: Vec<f64> = phi.iter().map(|p| 8.0 * p + 10.0 * (p - 0.1f64).max(0.0).powi(2)).collect();
        let ct: Vec<f64> = phi.iter().map(|p| -0.02 + 8.0 * p * p - 82.6 * p.powi(4)).collect();
        let curves = CharacteristicCurves::new(phi, ca, ct, FIT_TOLERANCE).unwrap();
        let spec = TurbineSpec {
            tip_radius: 0.74,
            hub_radius: 0.45,
            chord: 0.2,
            blades: 7,
            duct_radius: 0.75,
            omega_min: 0.5,
            omega_max: 60.0,
        };
        WellsTurbine::new(spec, curves, 1025.0).unwrap()
    }

    #[test]
    fn flow_coefficient_cases() {
        assert_eq!(flow_coefficient(0.0, 8.0, 0.25).unwrap(), 0.0);
        assert_eq!(flow_coefficient(2.0, 8.0, 0.25).unwrap(), 1.0);
        assert_eq!(flow_coefficient(-2.0, 8.0, 0.25).unwrap(), -1.0);
        assert!(flow_coefficient(1.0, 0.0, 0.25).is_err());
    }

    #[test]
    fn spec_derived_quantities() {
        let t = toy_turbine();
        assert!((t.k_a() - 1025.0 * 0.2 * 0.29 * 3.5).abs() < 1e-9);
        assert!((t.s_t() - PI * (0.5625 - 0.2025)).abs() < 1e-12);
        assert!((t.spec.solidity() - 0.2 * 0.29 * 7.0 / t.s_t()).abs() < 1e-12);
    }

    #[test]
    fn pchip_reproduces_linear_data_and_slope() {
        let t = toy_turbine();
        assert!((t.curves.ca_slope0 - 8.0).abs() < 1e-9);
        assert!((t.curves.ca(0.05) - 0.4).abs() < 1e-12);
        assert!((t.curves.ca(-0.05) - 0.4).abs() < 1e-12);
        let edge = t.curves.ca(0.32);
        assert_eq!(t.curves.ca(0.5), edge);
    }

    #[test]
    fn torque_fit_and_optimum() {
        let t = toy_turbine();
        assert_eq!(t.curves.half_degree(), 2);
        assert!(t.curves.fit_residual < 1e-10);
        assert!((t.curves.phi_opt - (8.0f64 / (2.0 * 82.6)).sqrt()).abs() < 1e-6);
    }

    #[test]
    fn pressure_jump_and_torque_symmetry() {
        let t = toy_turbine();
        let (v, w) = (0.9, 6.0);
        assert!((t.pressure_jump(-v, w) + t.pressure_jump(v, w)).abs() < 1e-9);
        assert_eq!(t.torque(-v, w), t.torque(v, w));
        assert!(t.torque(0.0, w) < 0.0);
        assert_eq!(t.pressure_jump(0.0, w), 0.0);
    }

    #[test]
    fn lambda_matches_central_difference() {
        let t = toy_turbine();
        for &w in &[0.5, 3.0, 12.0, 60.0] {
            let eps_v = 1e-6 * w * t.spec.tip_radius;
            let fd = (t.pressure_jump(eps_v, w) - t.pressure_jump(-eps_v, w)) / (2.0 * eps_v * t.s_t());
            assert!(((fd - t.lambda(w)) / t.lambda(w)).abs() < 1e-6);
        }
        assert!((t.omega_for_lambda(t.lambda(4.2)) - 4.2).abs() < 1e-12);
    }

    #[test]
    fn in_integral_values() {
        assert_eq!(in_integral(0).unwrap(), 1.0);
        assert_eq!(in_integral(2).unwrap(), 0.5);
        assert_eq!(in_integral(4).unwrap(), 0.375);
        assert_eq!(in_integral(5).unwrap(), 0.0);
        assert!(in_integral(-2).is_err());
    }

    #[test]
    fn series_helpers() {
        let p = [1.0, -2.0, 0.5];
        let x = 1.7;
        assert!((power_series(&p, x) - (1.0 - 2.0 * x * x + 0.5 * x.powi(4))).abs() < 1e-12);
        let h = 1e-6;
        let fd = (power_series(&p, x + h) - power_series(&p, x - h)) / (2.0 * h);
        assert!((power_series_derivative(&p, x) - fd).abs() < 1e-6);
    }

    #[test]
    fn pressure_bound_limits() {
        let t = toy_turbine();
        let c = PhysicalConstants::default();
        let b0 = PressureBound::new(0.0, 0.8, 5.0, -3.0, &t, -1.5, &c, 1.767);
        assert_eq!(b0.minimum(), b0.p_bar);
        let b1 = PressureBound::new(0.4, 0.8, 5.0, -3.0, &t, -1e-12, &c, 1.767);
        assert!((b1.minimum() - (b1.p_bar - b1.hydrostatic)).abs() < 1e-6);
    }

    #[test]
    fn curves_csv_round_trip() {
        let t = toy_turbine();
        let back = CharacteristicCurves::from_csv("c.csv", &t.curves.to_csv(), FIT_TOLERANCE).unwrap();
        assert_eq!(back, t.curves);
        assert!(CharacteristicCurves::from_csv("c.csv", "phi,Ca,Ct\n0,0,0\n0.1,1,x\n", 1e-3).is_err());
        assert!(CavitationTable::from_csv("p.csv", "phi,Cpmin\n0,-1\n0.1,0.2\n").is_err());
        let cav = CavitationTable::from_csv("p.csv", "phi,Cpmin\n0,-1\n0.1,-1.6\n0.2,-1.2\n").unwrap();
        assert_eq!(cav.cp_min_tilde, -1.6);
    }
}
