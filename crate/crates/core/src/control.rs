//! Rotational-speed control: per-sea-state optimization, power matrices,
//! annual power and the constrained dimension study.

use crate::device::{
    mechanical_power, small_body_point, Device, DuctGeometry, DuctProfile, Flags, HydroCoefficients, HydroPoint, SimOptions,
};
use crate::error::{Error, Result};
use crate::optim::minimize_bounded;
use crate::synthetic::scaled_turbine_spec;
use crate::turbine::{CavitationTable, CharacteristicCurves, PressureBound, WellsTurbine};
use crate::wave::{
    dispersion_wavenumber, equivalent_monochromatic, seastate_flux, Depth, MonochromaticWave, PhysicalConstants, ScatterDiagram, SeaState,
};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Linear,
    Nonlinear,
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Model::Linear),
            "nonlinear" => Ok(Model::Nonlinear),
            other => Err(Error::Config(format!("unknown model `{other}` (expected linear|nonlinear)"))),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Linear => "linear",
            Model::Nonlinear => "nonlinear",
        })
    }
}

/// Total linear damping `Λ` maximizing mean hydraulic power at `hp.omega`.
pub fn lambda_max_hydraulic(device: &Device, hp: &HydroPoint) -> f64 {
    let w = hp.omega;
    let x = -w * w * device.mass_eff(hp.added_mass) + device.consts.rho * device.consts.g;
    (hp.damping * hp.damping + x * x / (w * w)).sqrt() / device.s0()
}

/// Rotational speed realizing [`lambda_max_hydraulic`].
pub fn hydraulic_optimal_speed(device: &Device, hp: &HydroPoint) -> f64 {
    device.turbine.omega_for_lambda(lambda_max_hydraulic(device, hp))
}

/// Device response at one rotational speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    pub power: f64,
    pub hydraulic_power: f64,
    pub zeta_min: f64,
    pub zeta_max: f64,
    pub p_min: f64,
    pub phi_amplitude: f64,
    pub flags: Flags,
}

/// Linear model response; `p_min` is the analytic cycle-minimum bound.
pub fn evaluate_linear(device: &Device, hp: &HydroPoint, pe: Complex64, omega_t: f64) -> Result<Evaluation> {
    let lambda = device.turbine.lambda(omega_t);
    let zeta = device.linear_frequency_solve(hp, lambda, pe)?.norm();
    let w = hp.omega;
    let s0 = device.s0();
    let p = device.turbine.mean_power_coefficients(omega_t, s0);
    let bound = pressure_bound(device, w, zeta, omega_t);
    let phi = device.flow_coefficient_amplitude(w, zeta, omega_t);
    let p_min = bound.minimum();
    Ok(Evaluation {
        power: mechanical_power(zeta, w, &p),
        hydraulic_power: crate::device::hydraulic_power(zeta, w, lambda, s0),
        zeta_min: -zeta,
        zeta_max: zeta,
        p_min,
        phi_amplitude: phi,
        flags: Flags {
            cavitation: p_min < device.consts.p_vapor,
            turbine_uncovered: zeta > -device.geometry.z_t,
            overflow: zeta > device.geometry.z_top,
            beyond_model: phi > device.turbine.curves.phi_max_model,
            ..Flags::default()
        },
    })
}

pub fn evaluate_nonlinear(device: &Device, hp: &HydroPoint, pe: Complex64, omega_t: f64, sim: &SimOptions) -> Result<Evaluation> {
    let s = device.integrate_nonlinear(hp, pe, omega_t, sim)?.summary;
    Ok(Evaluation {
        power: s.mean_power,
        hydraulic_power: s.mean_hydraulic_power,
        zeta_min: s.zeta_min,
        zeta_max: s.zeta_max,
        p_min: s.p_min,
        phi_amplitude: s.phi_max,
        flags: s.flags,
    })
}

pub fn evaluate(device: &Device, hp: &HydroPoint, pe: Complex64, omega_t: f64, model: Model, sim: &SimOptions) -> Result<Evaluation> {
    match model {
        Model::Linear => evaluate_linear(device, hp, pe, omega_t),
        Model::Nonlinear => evaluate_nonlinear(device, hp, pe, omega_t, sim),
    }
}

fn pressure_bound(device: &Device, omega: f64, zeta: f64, omega_t: f64) -> PressureBound {
    PressureBound::new(
        zeta,
        omega,
        omega_t,
        device.geometry.z_t,
        &device.turbine,
        device.cavitation.cp_min_tilde,
        &device.consts,
        device.s0(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOptions {
    /// Relative tolerance on the optimal speed.
    pub rel_tol: f64,
    pub max_evaluations: usize,
    pub sim: SimOptions,
}

impl Default for ControlOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-3,
            max_evaluations: 200,
            sim: SimOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControlResult {
    pub hs: f64,
    pub te: f64,
    pub omega_t: f64,
    pub power: f64,
    pub hydraulic_power: f64,
    pub zeta_min: f64,
    pub zeta_max: f64,
    pub p_min: f64,
    pub cwr: f64,
    pub flags: Flags,
    pub evaluations: usize,
}

impl ControlResult {
    fn failed(sea: &SeaState) -> Self {
        Self {
            hs: sea.hs,
            te: sea.te,
            omega_t: f64::NAN,
            power: f64::NAN,
            hydraulic_power: f64::NAN,
            zeta_min: f64::NAN,
            zeta_max: f64::NAN,
            p_min: f64::NAN,
            cwr: f64::NAN,
            flags: Flags {
                numerical_failure: true,
                ..Flags::default()
            },
            evaluations: 0,
        }
    }
}

/// `P / (2 R₁ J)`.
pub fn capture_width_ratio(power: f64, inflow_radius: f64, flux: f64) -> f64 {
    if flux == 0.0 {
        return f64::NAN;
    }
    power / (2.0 * inflow_radius * flux)
}

/// Monochromatic wave standing in for a sea state; deep water, heading 0.
pub fn design_wave(sea: &SeaState) -> MonochromaticWave {
    equivalent_monochromatic(sea, 0.0, Depth::Deep)
}

/// Maximizes mean mechanical power over the turbine speed for one sea state.
pub fn optimize_rotation_speed(
    device: &Device,
    hydro: &HydroCoefficients,
    sea: &SeaState,
    model: Model,
    opts: &ControlOptions,
) -> Result<ControlResult> {
    sea.validate()?;
    let wave = design_wave(sea);
    let hp = hydro.at(wave.omega())?;
    let pe = hp.pe * wave.amplitude();
    let spec = &device.turbine.spec;
    let (lo, hi) = (spec.omega_min, spec.omega_max);

    let objective = |wt: f64| match evaluate(device, &hp, pe, wt, model, &opts.sim) {
        Ok(e) if e.power.is_finite() => -e.power,
        _ => f64::INFINITY,
    };
    let run = |a: f64, b: f64| minimize_bounded(objective, a, b, 0.5 * opts.rel_tol, 1e-9, opts.max_evaluations);
    let at_soft_edge = |x: f64, a: f64, b: f64| {
        let tol = 2.0 * opts.rel_tol * x;
        (a > lo && x - a <= tol) || (b < hi && b - x <= tol)
    };

    let mut evaluations = 0;
    let best = if pe.norm() == 0.0 {
        let m = run(lo, hi);
        evaluations += m.evaluations;
        m
    } else {
        let w_h = hydraulic_optimal_speed(device, &hp).clamp(lo, hi);
        let mut found = None;
        // First the bracket around the hydraulic optimum, then the full range.
        for (a, b) in [((w_h / 2.0).max(lo), (w_h * 2.0).min(hi)), (lo, hi)] {
            let m = run(a, b);
            evaluations += m.evaluations;
            if !at_soft_edge(m.x, a, b) {
                found = Some(m);
                break;
            }
        }
        found.ok_or_else(|| {
            Error::numerical(format!(
                "optimal speed stuck at the bracket edge (Hs = {}, Te = {})",
                sea.hs, sea.te
            ))
        })?
    };
    if !best.fx.is_finite() {
        return Err(Error::numerical("no admissible evaluation during speed optimization"));
    }
    let e = evaluate(device, &hp, pe, best.x, model, &opts.sim)?;
    Ok(ControlResult {
        hs: sea.hs,
        te: sea.te,
        omega_t: best.x,
        power: e.power,
        hydraulic_power: e.hydraulic_power,
        zeta_min: e.zeta_min,
        zeta_max: e.zeta_max,
        p_min: e.p_min,
        cwr: capture_width_ratio(e.power, device.geometry.inflow_radius(), seastate_flux(sea, &device.consts)),
        flags: e.flags,
        evaluations: evaluations + 1,
    })
}

/// Grid of control results over `hs × te`, row-major in `hs`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerMatrix {
    pub hs: Vec<f64>,
    pub te: Vec<f64>,
    pub cells: Vec<ControlResult>,
}

pub const POWER_MATRIX_HEADER: [&str; 10] = ["Hs", "Te", "omega_t", "P", "Phyd", "zeta_min", "zeta_max", "p_min", "CWR", "flags"];

impl PowerMatrix {
    pub fn cell(&self, i: usize, j: usize) -> &ControlResult {
        &self.cells[i * self.te.len() + j]
    }

    pub fn find(&self, hs: f64, te: f64) -> Option<&ControlResult> {
        let i = self.hs.iter().position(|&h| same_axis_value(h, hs))?;
        let j = self.te.iter().position(|&t| same_axis_value(t, te))?;
        Some(self.cell(i, j))
    }

    pub fn to_csv(&self) -> String {
        let mut out = POWER_MATRIX_HEADER.join(",");
        out.push('\n');
        for c in &self.cells {
            out.push_str(&format!(
                "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{}\n",
                c.hs, c.te, c.omega_t, c.power, c.hydraulic_power, c.zeta_min, c.zeta_max, c.p_min, c.cwr, c.flags
            ));
        }
        out
    }

    pub fn from_csv(source_name: &str, text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let header = rdr.headers().map_err(|e| Error::parse(source_name, 1, e.to_string()))?;
        if header.iter().collect::<Vec<_>>() != POWER_MATRIX_HEADER {
            return Err(Error::parse(
                source_name,
                1,
                format!("expected header {}", POWER_MATRIX_HEADER.join(",")),
            ));
        }
        let mut cells = Vec::new();
        for (k, rec) in rdr.records().enumerate() {
            let line = k + 2;
            let rec = rec.map_err(|e| Error::parse(source_name, line, e.to_string()))?;
            if rec.len() != 10 {
                return Err(Error::parse(source_name, line, format!("expected 10 fields, found {}", rec.len())));
            }
            let num = |i: usize| -> Result<f64> {
                rec[i]
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(source_name, line, format!("`{}` is not a number", &rec[i])))
            };
            cells.push(ControlResult {
                hs: num(0)?,
                te: num(1)?,
                omega_t: num(2)?,
                power: num(3)?,
                hydraulic_power: num(4)?,
                zeta_min: num(5)?,
                zeta_max: num(6)?,
                p_min: num(7)?,
                cwr: num(8)?,
                flags: rec[9]
                    .trim()
                    .parse()
                    .map_err(|e: Error| Error::parse(source_name, line, e.to_string()))?,
                evaluations: 0,
            });
        }
        let mut hs: Vec<f64> = Vec::new();
        let mut te: Vec<f64> = Vec::new();
        for c in &cells {
            if !hs.contains(&c.hs) {
                hs.push(c.hs);
            }
            if !te.contains(&c.te) {
                te.push(c.te);
            }
        }
        if hs.len() * te.len() != cells.len() {
            return Err(Error::parse(source_name, 1, "rows do not form a complete Hs × Te grid"));
        }
        Ok(Self { hs, te, cells })
    }
}

fn same_axis_value(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Optimizes every cell; failures are recorded in the cell flags.
pub fn build_power_matrix(
    hs: &[f64],
    te: &[f64],
    device: &Device,
    hydro: &HydroCoefficients,
    model: Model,
    opts: &ControlOptions,
) -> Result<PowerMatrix> {
    if hs.is_empty() || te.is_empty() {
        return Err(Error::domain("power matrix axes must be non-empty"));
    }
    let seas: Vec<SeaState> = hs
        .iter()
        .flat_map(|&h| te.iter().map(move |&t| SeaState::new(h, t, 0.0)))
        .collect::<Result<_>>()?;
    let cells = seas
        .par_iter()
        .map(|s| match optimize_rotation_speed(device, hydro, s, model, opts) {
            Ok(r) => r,
            Err(e) => {
                log::warn!("cell Hs = {}, Te = {}: {e}", s.hs, s.te);
                ControlResult::failed(s)
            }
        })
        .collect();
    Ok(PowerMatrix {
        hs: hs.to_vec(),
        te: te.to_vec(),
        cells,
    })
}

/// `Σ P·occurrence` over the scatter diagram.
pub fn annual_power(matrix: &PowerMatrix, scatter: &ScatterDiagram) -> Result<f64> {
    let mut total = 0.0;
    for s in &scatter.cells {
        let c = matrix
            .find(s.hs, s.te)
            .ok_or_else(|| Error::domain(format!("sea state (Hs = {}, Te = {}) missing from power matrix", s.hs, s.te)))?;
        if s.occurrence == 0.0 {
            continue;
        }
        if !c.power.is_finite() {
            return Err(Error::numerical(format!("power matrix cell (Hs = {}, Te = {}) failed", s.hs, s.te)));
        }
        total += c.power * s.occurrence;
    }
    Ok(total)
}

/// Incipient-stall operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StallSolution {
    pub omega_t: f64,
    pub zeta_abs: f64,
    pub residual: f64,
    pub iterations: usize,
    pub bisection_used: bool,
}

/// Speed at which the peak flow coefficient equals `φ_opt`, by safeguarded
/// Newton iteration from the hydraulic optimum.
pub fn stall_speed_newton(device: &Device, hp: &HydroPoint, pe: Complex64) -> Result<StallSolution> {
    let pe2 = pe.norm_sqr();
    if pe2 == 0.0 {
        return Err(Error::domain("stall speed undefined without excitation"));
    }
    let w = hp.omega;
    let s0 = device.s0();
    let x = -w * w * device.mass_eff(hp.added_mass) + device.consts.rho * device.consts.g;
    let lam1 = device.turbine.lambda(1.0);
    let amp1 = device.turbine.curves.phi_opt * device.turbine.s_t() * device.turbine.spec.tip_radius / (w * s0);
    // F(ω_t) = |Z(ω_t)|² ζ_s(ω_t)² − |p̂_e|², increasing from −|p̂_e|² at 0.
    let f = |wt: f64| {
        let c = hp.damping + s0 * lam1 * wt;
        let z2 = x * x + w * w * c * c;
        let zeta = amp1 * wt;
        let val = z2 * zeta * zeta - pe2;
        let dz2 = 2.0 * w * w * c * s0 * lam1;
        let d = dz2 * zeta * zeta + z2 * 2.0 * zeta * amp1;
        (val, d)
    };
    let tol = 1e-10 * pe2;
    let mut lo = 0.0;
    let mut hi = hydraulic_optimal_speed(device, hp).max(1e-6);
    while f(hi).0 < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::numerical("stall speed bracket diverged"));
        }
    }
    let mut wt = hydraulic_optimal_speed(device, hp).clamp(lo, hi);
    let mut bisection_used = false;
    for it in 1..=200 {
        let (val, d) = f(wt);
        if val.abs() <= tol {
            return Ok(StallSolution {
                omega_t: wt,
                zeta_abs: amp1 * wt,
                residual: val,
                iterations: it,
                bisection_used,
            });
        }
        if val < 0.0 {
            lo = wt;
        } else {
            hi = wt;
        }
        let next = wt - val / d;
        wt = if d > 0.0 && next > lo && next < hi {
            next
        } else {
            bisection_used = true;
            0.5 * (lo + hi)
        };
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            let (val, _) = f(wt);
            if val.abs() <= tol {
                continue;
            }
            return Err(Error::numerical(format!("stall residual stuck at {val:e}")));
        }
    }
    Err(Error::numerical("stall Newton iteration did not converge"))
}

/// Constraint values in natural units (m, Pa, Pa, dimensionless); a
/// constraint holds when its value is ≤ 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constraints {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

/// Linear-model constraints at amplitude `zeta_abs` and speed `omega_t`.
/// `c3` is the interior cycle minimum of the pressure bound; it is zero
/// when that minimum does not exist (the endpoint case is `c2`).
pub fn constraints(device: &Device, omega: f64, zeta_abs: f64, omega_t: f64) -> Constraints {
    let b = pressure_bound(device, omega, zeta_abs, omega_t);
    let pv = device.consts.p_vapor;
    Constraints {
        c1: zeta_abs - device.geometry.z_t.abs(),
        c2: -b.p_bar + b.hydrostatic + pv,
        c3: b.interior_minimum().map_or(0.0, |m| pv - m),
        c4: device.flow_coefficient_amplitude(omega, zeta_abs, omega_t) - device.turbine.curves.phi_max_model,
    }
}

/// The third cavitation constraint in its originally printed form, kept
/// for comparison: zero when the interior stationary point exists, and a
/// closed form otherwise (NaN where its square root is imaginary).
pub fn c3_as_printed(device: &Device, omega: f64, zeta_abs: f64, omega_t: f64) -> f64 {
    let c = &device.consts;
    let (rho, g) = (c.rho, c.g);
    let st = device.turbine.s_t();
    let s = device.s0();
    let cp = device.cavitation.cp_min_tilde;
    let b = pressure_bound(device, omega, zeta_abs, omega_t);
    if cp <= -g * st * st / (s * s * omega * omega * zeta_abs) {
        return 0.0;
    }
    let root = ((omega * omega * zeta_abs * s * s * cp).powi(2) - (g * st * st).powi(2)).sqrt();
    -b.p_bar - rho * g * g * st * st / (omega * omega * s * s * cp) - 0.5 * rho * zeta_abs / (st * st) * root + c.p_vapor
}

/// Quadratic-penalty settings. Constraints are divided by their scale
/// before penalization and before the tolerance test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PenaltyConfig {
    pub mu0: f64,
    pub tolerance: f64,
    pub max_doublings: usize,
    pub scale_c1: f64,
    /// Pa per unit of c2/c3; `None` uses `ρg` (metres of head).
    pub scale_pressure: Option<f64>,
    pub scale_c4: f64,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self {
            mu0: 1.0,
            tolerance: 1e-3,
            max_doublings: 100,
            scale_c1: 1.0,
            scale_pressure: None,
            scale_c4: 1.0,
        }
    }
}

impl PenaltyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu0 > 0.0 && self.tolerance > 0.0 && self.scale_c1 > 0.0 && self.scale_c4 > 0.0) {
            return Err(Error::Config("penalty mu0, tolerance and scales must be positive".into()));
        }
        if matches!(self.scale_pressure, Some(s) if !(s > 0.0)) {
            return Err(Error::Config("penalty pressure scale must be positive".into()));
        }
        Ok(())
    }

    fn scaled(&self, c: &Constraints, consts: &PhysicalConstants) -> [f64; 4] {
        let sp = self.scale_pressure.unwrap_or(consts.rho * consts.g);
        [c.c1 / self.scale_c1, c.c2 / sp, c.c3 / sp, c.c4 / self.scale_c4]
    }
}

fn linear_amplitude(device: &Device, hp: &HydroPoint, pe: Complex64, omega_t: f64) -> Result<f64> {
    Ok(device.linear_frequency_solve(hp, device.turbine.lambda(omega_t), pe)?.norm())
}

/// `Q_μ = −P + μ Σ [c_i]₊²` with scaled constraints.
pub fn penalized_objective(device: &Device, hp: &HydroPoint, pe: Complex64, omega_t: f64, mu: f64, cfg: &PenaltyConfig) -> Result<f64> {
    let zeta = linear_amplitude(device, hp, pe, omega_t)?;
    let p = device.turbine.mean_power_coefficients(omega_t, device.s0());
    let c = constraints(device, hp.omega, zeta, omega_t);
    let pen: f64 = cfg.scaled(&c, &device.consts).iter().map(|v| v.max(0.0).powi(2)).sum();
    Ok(-mechanical_power(zeta, hp.omega, &p) + mu * pen)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PenaltyOutcome {
    pub omega_t: f64,
    pub power: f64,
    pub mu: f64,
    pub max_violation: f64,
    pub constraints: Constraints,
    pub rounds: usize,
    pub converged: bool,
}

/// Penalty continuation over `[lo, hi]`: minimize `Q_μ`, doubling `μ` until
/// the largest scaled violation is below tolerance.
pub fn solve_penalized(device: &Device, hp: &HydroPoint, pe: Complex64, lo: f64, hi: f64, cfg: &PenaltyConfig) -> Result<PenaltyOutcome> {
    cfg.validate()?;
    let mut mu = cfg.mu0;
    let mut last = None;
    for round in 0..=cfg.max_doublings {
        let omega_t = if hi > lo {
            minimize_bounded(
                |wt| penalized_objective(device, hp, pe, wt, mu, cfg).unwrap_or(f64::INFINITY),
                lo,
                hi,
                1e-10,
                1e-12,
                200,
            )
            .x
        } else {
            lo
        };
        let zeta = linear_amplitude(device, hp, pe, omega_t)?;
        let c = constraints(device, hp.omega, zeta, omega_t);
        let max_violation = cfg.scaled(&c, &device.consts).iter().fold(0.0f64, |m, v| m.max(*v));
        let p = device.turbine.mean_power_coefficients(omega_t, device.s0());
        let out = PenaltyOutcome {
            omega_t,
            power: mechanical_power(zeta, hp.omega, &p),
            mu,
            max_violation,
            constraints: c,
            rounds: round + 1,
            converged: max_violation < cfg.tolerance,
        };
        if out.converged {
            return Ok(out);
        }
        last = Some(out);
        mu *= 2.0;
    }
    Ok(last.expect("at least one round"))
}

/// Constant-section cylinder of radius `r` and draft `d` with the turbine at
/// `−fraction·d` and a turbine scaled to the radius.
pub fn cylinder_device(
    radius: f64,
    draft: f64,
    turbine_fraction: f64,
    curves: &CharacteristicCurves,
    cavitation: &CavitationTable,
    consts: &PhysicalConstants,
) -> Result<Device> {
    if !(radius > 0.0 && draft > 0.0 && turbine_fraction > 0.0 && turbine_fraction < 1.0) {
        return Err(Error::domain(
            "cylinder radius, draft and turbine fraction must be positive (fraction < 1)",
        ));
    }
    let profile = DuctProfile::constant(radius, -draft, draft, -turbine_fraction * draft);
    let turbine = WellsTurbine::new(scaled_turbine_spec(radius), curves.clone(), consts.rho)?;
    Device::new(DuctGeometry::new(profile)?, turbine, cavitation.clone(), *consts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionStudyConfig {
    pub radii: Vec<f64>,
    pub drafts: Vec<f64>,
    #[serde(default = "default_turbine_fraction")]
    pub turbine_fraction: f64,
    #[serde(default)]
    pub penalty: PenaltyConfig,
}

fn default_turbine_fraction() -> f64 {
    0.6
}

impl DimensionStudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.radii.is_empty() || self.drafts.is_empty() {
            return Err(Error::Config("dimension study needs radii and drafts".into()));
        }
        if self.radii.iter().chain(&self.drafts).any(|&v| !(v > 0.0)) {
            return Err(Error::Config("radii and drafts must be positive".into()));
        }
        self.penalty.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVariant {
    Unconstrained,
    Constrained,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub radius: f64,
    pub draft: f64,
    pub annual_power: f64,
    pub linear_density: f64,
    pub surface_density: f64,
    pub flags: Flags,
}

pub const SWEEP_HEADER: [&str; 6] = ["r", "d", "annualP", "linear_density", "surface_density", "flags"];

pub fn sweep_to_csv(points: &[SweepPoint]) -> String {
    let mut out = SWEEP_HEADER.join(",");
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{:?},{:?},{:?},{:?},{:?},{}\n",
            p.radius, p.draft, p.annual_power, p.linear_density, p.surface_density, p.flags
        ));
    }
    out
}

fn flags_from_constraints(c: &Constraints) -> Flags {
    Flags {
        turbine_uncovered: c.c1 > 0.0,
        cavitation: c.c2 > 0.0 || c.c3 > 0.0,
        beyond_model: c.c4 > 0.0,
        ..Flags::default()
    }
}

/// Annual power of one cylinder under either control definition.
pub fn sweep_point(
    radius: f64,
    draft: f64,
    config: &DimensionStudyConfig,
    scatter: &ScatterDiagram,
    curves: &CharacteristicCurves,
    cavitation: &CavitationTable,
    consts: &PhysicalConstants,
    variant: SweepVariant,
) -> Result<SweepPoint> {
    let device = cylinder_device(radius, draft, config.turbine_fraction, curves, cavitation, consts)?;
    let mut annual = 0.0;
    let mut flags = Flags::default();
    for s in &scatter.cells {
        let wave = design_wave(s);
        let hp = small_body_point(radius, draft, wave.omega(), consts);
        let pe = hp.pe * wave.amplitude();
        if pe.norm() == 0.0 {
            continue;
        }
        let stall = stall_speed_newton(&device, &hp, pe)?;
        let power = match variant {
            SweepVariant::Unconstrained => {
                let p = device.turbine.mean_power_coefficients(stall.omega_t, device.s0());
                let c = constraints(&device, hp.omega, stall.zeta_abs, stall.omega_t);
                flags = flags.union(flags_from_constraints(&c));
                mechanical_power(stall.zeta_abs, hp.omega, &p)
            }
            SweepVariant::Constrained => {
                let hi = device.turbine.spec.omega_max.max(stall.omega_t);
                let out = solve_penalized(&device, &hp, pe, stall.omega_t, hi, &config.penalty)?;
                if !out.converged {
                    flags.penalty_unconverged = true;
                }
                let scaled = config.penalty.scaled(&out.constraints, consts);
                flags = flags.union(Flags {
                    turbine_uncovered: scaled[0] >= config.penalty.tolerance,
                    cavitation: scaled[1].max(scaled[2]) >= config.penalty.tolerance,
                    beyond_model: scaled[3] >= config.penalty.tolerance,
                    ..Flags::default()
                });
                out.power
            }
        };
        annual += power * s.occurrence;
    }
    Ok(SweepPoint {
        radius,
        draft,
        annual_power: annual,
        linear_density: annual / (2.0 * radius),
        surface_density: annual / (std::f64::consts::PI * radius * radius),
        flags,
    })
}

/// Annual power and densities over the `(radius, draft)` grid, radius-major.
pub fn dimension_sweep(
    config: &DimensionStudyConfig,
    scatter: &ScatterDiagram,
    curves: &CharacteristicCurves,
    cavitation: &CavitationTable,
    consts: &PhysicalConstants,
    variant: SweepVariant,
) -> Result<Vec<SweepPoint>> {
    config.validate()?;
    let grid: Vec<(f64, f64)> = config
        .radii
        .iter()
        .flat_map(|&r| config.drafts.iter().map(move |&d| (r, d)))
        .collect();
    Ok(grid
        .par_iter()
        .map(|&(r, d)| {
            sweep_point(r, d, config, scatter, curves, cavitation, consts, variant).unwrap_or_else(|e| {
                log::warn!("sweep point r = {r}, d = {d}: {e}");
                SweepPoint {
                    radius: r,
                    draft: d,
                    annual_power: f64::NAN,
                    linear_density: f64::NAN,
                    surface_density: f64::NAN,
                    flags: Flags {
                        numerical_failure: true,
                        ..Flags::default()
                    },
                }
            })
        })
        .collect())
}

/// Optimal power of a small heaving cylinder without radiation or
/// diffraction, in deep water.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmallBodyPower {
    pub exact: f64,
    /// First-order expansion in `kd`; present only for `kd < 1`.
    pub expanded: Option<f64>,
    pub c_opt: f64,
}

pub fn small_body_power(radius: f64, draft: f64, wave: &MonochromaticWave, consts: &PhysicalConstants) -> Result<SmallBodyPower> {
    if !(radius > 0.0 && draft >= 0.0) {
        return Err(Error::domain("radius must be positive and draft non-negative"));
    }
    let (rho, g) = (consts.rho, consts.g);
    let w = wave.omega();
    let k = dispersion_wavenumber(w, Depth::Deep, g)?;
    if k * radius > 0.3 {
        log::warn!("kr = {} is not small; small-body power is rough", k * radius);
    }
    let area = std::f64::consts::PI * radius * radius;
    let kd = k * draft;
    if (1.0 - kd).abs() < 1e-12 {
        return Err(Error::domain("undamped resonance (kd = 1): small-body power unbounded"));
    }
    let base = rho * g * w * wave.height * wave.height / 16.0 * area;
    let mass = rho * area * draft;
    let stiffness = rho * g * area;
    Ok(SmallBodyPower {
        exact: base * (-2.0 * kd).exp() / (1.0 - kd).abs(),
        expanded: (kd < 1.0).then_some(base * (1.0 - kd)),
        c_opt: (stiffness - w * w * mass).abs() / w,
    })
}
