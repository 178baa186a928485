//! Single-device models: duct geometry, hydrodynamic coefficients, the
//! nonlinear water-column ODE and its linearized frequency-domain solution.

use crate::error::{Error, Result};
use crate::ode::{self, OdeOptions};
use crate::quad;
use crate::table::{parse_numeric_csv, require_strictly_increasing};
use crate::turbine::{power_series, CavitationTable, WellsTurbine};
use crate::wave::PhysicalConstants;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// Width of the band over which radius jumps are blended.
pub const JUMP_BLEND_WIDTH: f64 = 0.01;

/// Duct profile as `(z, R)` nodes, ascending in `z`. Radius varies linearly
/// between nodes; two nodes at the same `z` describe a jump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuctProfile {
    pub nodes: Vec<[f64; 2]>,
    pub turbine_z: f64,
}

impl DuctProfile {
    /// Uniform tube of radius `r` from `z1` to `z_top`.
    pub fn constant(radius: f64, z1: f64, z_top: f64, turbine_z: f64) -> Self {
        Self {
            nodes: vec![[z1, radius], [z_top, radius]],
            turbine_z,
        }
    }

    /// Converging inlet down to the turbine throat, then a short diffuser to
    /// the upper tube.
    pub fn reference() -> Self {
        Self {
            nodes: vec![[-5.65, 1.4], [-3.65, 0.5], [-3.15, 0.75], [3.0, 0.75]],
            turbine_z: -3.65,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum PieceKind {
    Linear,
    Blend,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Piece {
    z0: f64,
    z1: f64,
    r0: f64,
    r1: f64,
    kind: PieceKind,
}

impl Piece {
    fn t(&self, z: f64) -> f64 {
        (z - self.z0) / (self.z1 - self.z0)
    }

    fn radius(&self, z: f64) -> f64 {
        let t = self.t(z);
        match self.kind {
            PieceKind::Linear => self.r0 + (self.r1 - self.r0) * t,
            PieceKind::Blend => self.r0 + (self.r1 - self.r0) * t * t * (3.0 - 2.0 * t),
        }
    }

    fn radius_slope(&self, z: f64) -> f64 {
        let t = self.t(z);
        let dr = (self.r1 - self.r0) / (self.z1 - self.z0);
        match self.kind {
            PieceKind::Linear => dr,
            PieceKind::Blend => dr * 6.0 * t * (1.0 - t),
        }
    }

    /// `∫_{z0}^{z} dz'/S(z')`.
    fn inertia(&self, z: f64) -> f64 {
        match self.kind {
            PieceKind::Linear => (z - self.z0) / (PI * self.r0 * self.radius(z)),
            PieceKind::Blend => quad::integrate(|s| 1.0 / (PI * self.radius(s).powi(2)), self.z0, z, 1e-15, 1e-13).0,
        }
    }
}

/// Axisymmetric duct with cross-section `S(z)`, inflow at `z1` and turbine
/// at `z_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct DuctGeometry {
    pub profile: DuctProfile,
    pieces: Vec<Piece>,
    cumulative: Vec<f64>,
    pub z1: f64,
    pub z_top: f64,
    pub z_t: f64,
}

impl DuctGeometry {
    pub fn new(profile: DuctProfile) -> Result<Self> {
        let nodes = &profile.nodes;
        if nodes.len() < 2 {
            return Err(Error::domain("duct profile needs at least two nodes"));
        }
        if nodes.iter().any(|n| !(n[1] > 0.0) || !n[0].is_finite() || !n[1].is_finite()) {
            return Err(Error::domain("duct radii must be positive and finite"));
        }
        if nodes.windows(2).any(|w| w[1][0] < w[0][0]) {
            return Err(Error::domain("duct nodes must be ordered by z"));
        }
        let z1 = nodes[0][0];
        let z_top = nodes[nodes.len() - 1][0];
        let z_t = profile.turbine_z;
        if !(z1 < z_t && z_t < 0.0 && z_top > 0.0) {
            return Err(Error::domain("need z1 < z_t < 0 < z_top"));
        }

        // Split into linear segments, collapsing jumps into blend bands.
        let half = 0.5 * JUMP_BLEND_WIDTH;
        let mut raw: Vec<Piece> = Vec::new();
        let mut jumps: Vec<(usize, f64, f64)> = Vec::new();
        for w in nodes.windows(2) {
            let ([za, ra], [zb, rb]) = (w[0], w[1]);
            if zb == za {
                if ra != rb {
                    jumps.push((raw.len(), ra, rb));
                }
            } else {
                raw.push(Piece {
                    z0: za,
                    z1: zb,
                    r0: ra,
                    r1: rb,
                    kind: PieceKind::Linear,
                });
            }
        }
        let mut pieces = Vec::new();
        let mut jump_iter = jumps.into_iter().peekable();
        for (i, p) in raw.iter().enumerate() {
            let mut p = *p;
            // A jump recorded at index i sits at the start of raw[i].
            if let Some(&(j, _, _)) = jump_iter.peek() {
                if j == i && i > 0 {
                    let (_, ra, rb) = jump_iter.next().unwrap();
                    let z = p.z0;
                    let prev: &mut Piece = pieces.last_mut().unwrap();
                    if prev.z1 - prev.z0 <= half || p.z1 - p.z0 <= half {
                        return Err(Error::domain("duct pieces adjacent to a jump must exceed the blend band"));
                    }
                    let r_left = prev.radius(z - half);
                    prev.r1 = r_left;
                    prev.z1 = z - half;
                    let _ = ra;
                    let r_right = p.radius(z + half);
                    pieces.push(Piece {
                        z0: z - half,
                        z1: z + half,
                        r0: r_left,
                        r1: r_right,
                        kind: PieceKind::Blend,
                    });
                    p.z0 = z + half;
                    p.r0 = r_right;
                    let _ = rb;
                }
            }
            pieces.push(p);
        }
        if jump_iter.next().is_some() {
            return Err(Error::domain("duct profile cannot start or end with a jump"));
        }
        let mut cumulative = Vec::with_capacity(pieces.len());
        let mut acc = 0.0;
        for p in &pieces {
            cumulative.push(acc);
            acc += p.inertia(p.z1);
        }
        Ok(Self {
            profile,
            pieces,
            cumulative,
            z1,
            z_top,
            z_t,
        })
    }

    fn piece_index(&self, z: f64) -> usize {
        let i = self.pieces.partition_point(|p| p.z1 < z);
        i.min(self.pieces.len() - 1)
    }

    pub fn radius(&self, z: f64) -> f64 {
        let z = z.clamp(self.z1, self.z_top);
        self.pieces[self.piece_index(z)].radius(z)
    }

    /// Cross-section `S(z)`; constant beyond the profile ends.
    pub fn area(&self, z: f64) -> f64 {
        PI * self.radius(z).powi(2)
    }

    /// `dS/dz`; zero beyond the profile ends.
    pub fn area_slope(&self, z: f64) -> f64 {
        if z < self.z1 || z > self.z_top {
            return 0.0;
        }
        let p = &self.pieces[self.piece_index(z)];
        2.0 * PI * p.radius(z) * p.radius_slope(z)
    }

    /// `C(ζ) = ∫_{z1}^{ζ} dz/S(z)`, extended linearly beyond the profile.
    pub fn inertia(&self, zeta: f64) -> f64 {
        if zeta <= self.z1 {
            return (zeta - self.z1) / self.area(self.z1);
        }
        if zeta > self.z_top {
            return self.inertia(self.z_top) + (zeta - self.z_top) / self.area(self.z_top);
        }
        let i = self.piece_index(zeta);
        self.cumulative[i] + self.pieces[i].inertia(zeta)
    }

    /// `C(ζ)` by direct adaptive quadrature of `1/S`, used as a cross-check.
    pub fn inertia_by_quadrature(&self, zeta: f64) -> f64 {
        let mut total = 0.0;
        for p in &self.pieces {
            if zeta <= p.z0 {
                break;
            }
            let hi = zeta.min(p.z1);
            total += quad::integrate(|z| 1.0 / self.area(z), p.z0, hi, 1e-15, 1e-13).0;
        }
        total
    }

    pub fn s0(&self) -> f64 {
        self.area(0.0)
    }

    pub fn s1(&self) -> f64 {
        self.area(self.z1)
    }

    pub fn inflow_radius(&self) -> f64 {
        self.radius(self.z1)
    }

    /// Largest radius along the profile.
    pub fn max_radius(&self) -> f64 {
        self.profile.nodes.iter().map(|n| n[1]).fold(0.0, f64::max)
    }
}

/// How excitation pressures in a hydro file are normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    PerUnitAmplitude,
    Absolute,
}

/// Added mass, radiation damping and excitation pressure at one frequency,
/// with `pe` per unit incident amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HydroPoint {
    pub omega: f64,
    pub added_mass: f64,
    pub damping: f64,
    pub pe: Complex64,
}

/// Frequency-tabulated hydrodynamic data for one device.
#[derive(Debug, Clone, PartialEq)]
pub struct HydroCoefficients {
    pub omega: Vec<f64>,
    pub added_mass: Vec<f64>,
    pub damping: Vec<f64>,
    /// Excitation pressure per unit incident wave amplitude.
    pub pe: Vec<Complex64>,
}

impl HydroCoefficients {
    pub fn new(omega: Vec<f64>, added_mass: Vec<f64>, damping: Vec<f64>, pe: Vec<Complex64>) -> Result<Self> {
        let n = omega.len();
        if n == 0 || added_mass.len() != n || damping.len() != n || pe.len() != n {
            return Err(Error::domain("hydro columns must be non-empty and equally long"));
        }
        if omega.windows(2).any(|w| w[1] <= w[0]) || !(omega[0] > 0.0) {
            return Err(Error::domain("hydro frequencies must be positive and strictly increasing"));
        }
        if damping.iter().any(|&b| b < 0.0) {
            return Err(Error::domain("radiation damping must be non-negative"));
        }
        Ok(Self {
            omega,
            added_mass,
            damping,
            pe,
        })
    }

    /// Parses `omega,A,B,Re_pe,Im_pe` with a `# normalization:` header. Absolute
    /// files also declare `# amplitude: <m>`, the incident amplitude they
    /// were computed for.
    pub fn from_csv(source_name: &str, text: &str) -> Result<Self> {
        let t = parse_numeric_csv(source_name, text, &["omega", "A", "B", "Re_pe", "Im_pe"])?;
        require_strictly_increasing(source_name, &t, 0)?;
        let norm = match t.meta("normalization") {
            Some("per-unit-amplitude") => Normalization::PerUnitAmplitude,
            Some("absolute") => Normalization::Absolute,
            Some(other) => return Err(Error::parse(source_name, 1, format!("unknown normalization `{other}`"))),
            None => return Err(Error::parse(source_name, 1, "missing `# normalization:` header")),
        };
        let scale = match norm {
            Normalization::PerUnitAmplitude => 1.0,
            Normalization::Absolute => {
                let a: f64 = t
                    .meta("amplitude")
                    .and_then(|v| v.parse().ok())
                    .filter(|a: &f64| *a > 0.0)
                    .ok_or_else(|| Error::parse(source_name, 1, "absolute hydro data needs `# amplitude: <m>`"))?;
                1.0 / a
            }
        };
        for (line, row) in &t.rows {
            if row[0] <= 0.0 {
                return Err(Error::parse(source_name, *line, "omega must be positive"));
            }
            if row[2] < 0.0 {
                return Err(Error::parse(source_name, *line, "radiation damping must be non-negative"));
            }
        }
        let col = |j: usize| t.rows.iter().map(|r| r.1[j]).collect::<Vec<_>>();
        let pe = t.rows.iter().map(|r| Complex64::new(r.1[3], r.1[4]) * scale).collect();
        Self::new(col(0), col(1), col(2), pe)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("# normalization: per-unit-amplitude\nomega,A,B,Re_pe,Im_pe\n");
        for i in 0..self.omega.len() {
            out.push_str(&format!(
                "{:?},{:?},{:?},{:?},{:?}\n",
                self.omega[i], self.added_mass[i], self.damping[i], self.pe[i].re, self.pe[i].im
            ));
        }
        out
    }

    /// Linear interpolation inside the grid; outside is an error.
    pub fn at(&self, omega: f64) -> Result<HydroPoint> {
        let n = self.omega.len();
        let (lo, hi) = (self.omega[0], self.omega[n - 1]);
        if !(omega >= lo && omega <= hi) {
            return Err(Error::domain(format!("omega = {omega} outside hydro grid [{lo}, {hi}]")));
        }
        if n == 1 {
            return Ok(HydroPoint {
                omega,
                added_mass: self.added_mass[0],
                damping: self.damping[0],
                pe: self.pe[0],
            });
        }
        let i = self.omega.partition_point(|&w| w <= omega).clamp(1, n - 1) - 1;
        let t = (omega - self.omega[i]) / (self.omega[i + 1] - self.omega[i]);
        let lerp = |a: f64, b: f64| a + (b - a) * t;
        Ok(HydroPoint {
            omega,
            added_mass: lerp(self.added_mass[i], self.added_mass[i + 1]),
            damping: lerp(self.damping[i], self.damping[i + 1]),
            pe: self.pe[i] + (self.pe[i + 1] - self.pe[i]) * t,
        })
    }
}

/// Small-body approximation for a piston-like inflow section of radius `r`
/// at depth `d` in deep water: pressure is the undisturbed incident value,
/// damping follows from the excitation by reciprocity, added mass is that
/// of a disk radiating into a half space.
pub fn small_body_hydro(radius: f64, draft: f64, omegas: &[f64], consts: &PhysicalConstants) -> Result<HydroCoefficients> {
    let pts: Vec<HydroPoint> = omegas.iter().map(|&w| small_body_point(radius, draft, w, consts)).collect();
    HydroCoefficients::new(
        omegas.to_vec(),
        pts.iter().map(|p| p.added_mass).collect(),
        pts.iter().map(|p| p.damping).collect(),
        pts.iter().map(|p| p.pe).collect(),
    )
}

/// Single-frequency value of [`small_body_hydro`].
pub fn small_body_point(radius: f64, draft: f64, omega: f64, consts: &PhysicalConstants) -> HydroPoint {
    let (rho, g) = (consts.rho, consts.g);
    let s = PI * radius * radius;
    let decay = (-omega * omega / g * draft).exp();
    HydroPoint {
        omega,
        added_mass: SMALL_BODY_ADDED_MASS * rho * radius,
        damping: rho * omega.powi(3) * s * decay * decay / (2.0 * g),
        pe: Complex64::new(rho * g * decay, 0.0),
    }
}

/// Pressure-form added mass of the small-body model, in units of `ρ r`.
pub const SMALL_BODY_ADDED_MASS: f64 = 4.0 / (3.0 * PI);

/// Named constraint and validity flags attached to results.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    pub cavitation: bool,
    pub turbine_uncovered: bool,
    pub overflow: bool,
    pub beyond_model: bool,
    pub numerical_failure: bool,
    pub penalty_unconverged: bool,
}

const FLAG_NAMES: [&str; 6] = [
    "cavitation",
    "turbine_uncovered",
    "overflow",
    "beyond_model",
    "numerical_failure",
    "penalty_unconverged",
];

impl Flags {
    fn as_array(&self) -> [bool; 6] {
        [
            self.cavitation,
            self.turbine_uncovered,
            self.overflow,
            self.beyond_model,
            self.numerical_failure,
            self.penalty_unconverged,
        ]
    }

    pub fn any(&self) -> bool {
        self.as_array().iter().any(|&b| b)
    }

    pub fn union(self, other: Flags) -> Flags {
        Flags {
            cavitation: self.cavitation || other.cavitation,
            turbine_uncovered: self.turbine_uncovered || other.turbine_uncovered,
            overflow: self.overflow || other.overflow,
            beyond_model: self.beyond_model || other.beyond_model,
            numerical_failure: self.numerical_failure || other.numerical_failure,
            penalty_unconverged: self.penalty_unconverged || other.penalty_unconverged,
        }
    }
}

impl fmt::Display for Flags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let set: Vec<&str> = FLAG_NAMES
            .iter()
            .zip(self.as_array())
            .filter_map(|(n, b)| b.then_some(*n))
            .collect();
        if set.is_empty() {
            f.write_str("none")
        } else {
            f.write_str(&set.join(";"))
        }
    }
}

impl FromStr for Flags {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut flags = Flags::default();
        if s == "none" {
            return Ok(flags);
        }
        for part in s.split(';') {
            match part {
                "cavitation" => flags.cavitation = true,
                "turbine_uncovered" => flags.turbine_uncovered = true,
                "overflow" => flags.overflow = true,
                "beyond_model" => flags.beyond_model = true,
                "numerical_failure" => flags.numerical_failure = true,
                "penalty_unconverged" => flags.penalty_unconverged = true,
                other => return Err(Error::domain(format!("unknown flag `{other}`"))),
            }
        }
        Ok(flags)
    }
}

/// Instantaneous column state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviceState {
    pub zeta: f64,
    pub zetadot: f64,
    pub t: f64,
}

/// One OWC device: duct, turbine, cavitation data and fluid constants.
#[derive(Debug, Clone)]
pub struct Device {
    pub geometry: DuctGeometry,
    pub turbine: WellsTurbine,
    pub cavitation: CavitationTable,
    pub consts: PhysicalConstants,
}

impl Device {
    pub fn new(geometry: DuctGeometry, turbine: WellsTurbine, cavitation: CavitationTable, consts: PhysicalConstants) -> Result<Self> {
        consts.validate()?;
        let duct_r = geometry.radius(geometry.z_t);
        if (turbine.spec.duct_radius - duct_r).abs() > 1e-9 * duct_r {
            return Err(Error::domain(format!(
                "turbine duct radius {} differs from the profile radius {duct_r} at z_t",
                turbine.spec.duct_radius
            )));
        }
        Ok(Self {
            geometry,
            turbine,
            cavitation,
            consts,
        })
    }

    pub fn s0(&self) -> f64 {
        self.geometry.s0()
    }

    /// Linear mass term `ρ C(0) S(0) + A`.
    pub fn mass_eff(&self, added_mass: f64) -> f64 {
        self.consts.rho * self.geometry.inertia(0.0) * self.s0() + added_mass
    }

    /// Linear damping term `Λ S(0) + B`.
    pub fn damping_eff(&self, lambda: f64, damping: f64) -> f64 {
        lambda * self.s0() + damping
    }

    pub fn natural_frequency(&self, added_mass: f64) -> f64 {
        (self.consts.rho * self.consts.g / self.mass_eff(added_mass)).sqrt()
    }

    /// Mechanical impedance `−ω²m − iωc + ρg` of the linearized column.
    pub fn impedance(&self, hp: &HydroPoint, lambda: f64) -> Complex64 {
        let w = hp.omega;
        Complex64::new(
            -w * w * self.mass_eff(hp.added_mass) + self.consts.rho * self.consts.g,
            -w * self.damping_eff(lambda, hp.damping),
        )
    }

    /// Complex column amplitude of the linearized model.
    pub fn linear_frequency_solve(&self, hp: &HydroPoint, lambda: f64, pe: Complex64) -> Result<Complex64> {
        let z = self.impedance(hp, lambda);
        if z.norm() == 0.0 {
            return Err(Error::numerical("undamped resonance: frequency-domain system is singular"));
        }
        Ok(pe / z)
    }

    /// Amplitude of the turbine flow coefficient for a column amplitude.
    pub fn flow_coefficient_amplitude(&self, omega: f64, zeta_abs: f64, omega_t: f64) -> f64 {
        omega * zeta_abs * self.s0() / (self.turbine.s_t() * omega_t * self.turbine.spec.tip_radius)
    }

    /// Column acceleration of the nonlinear model. `omega_t = None` removes
    /// the turbine.
    pub fn nonlinear_accel(&self, zeta: f64, zetadot: f64, pe_t: f64, hp: &HydroPoint, omega_t: Option<f64>) -> Result<f64> {
        let rho = self.consts.rho;
        let g = &self.geometry;
        let c = g.inertia(zeta);
        let s = g.area(zeta);
        let mass = rho * c * s + hp.added_mass;
        if !(mass > 0.0) {
            return Err(Error::numerical(format!("degenerate column mass {mass} at zeta = {zeta}")));
        }
        let s1 = g.s1();
        let dp = match omega_t {
            Some(w) => self.turbine.pressure_jump(s * zetadot / self.turbine.s_t(), w),
            None => 0.0,
        };
        let rhs = pe_t
            - rho * c * g.area_slope(zeta) * zetadot * zetadot
            - 0.5 * rho * zetadot * zetadot * (1.0 - (s / s1).powi(2))
            - dp
            - hp.damping * zetadot
            - rho * self.consts.g * zeta;
        Ok(rhs / mass)
    }

    /// Minimum absolute pressure on the blades at an instant.
    pub fn min_pressure(&self, zeta: f64, zetadot: f64, zetaddot: f64, omega_t: f64) -> f64 {
        let rho = self.consts.rho;
        let g = &self.geometry;
        let s = g.area(zeta);
        let st = self.turbine.s_t();
        let v_t = s * zetadot / st;
        let tip = omega_t * self.turbine.spec.tip_radius;
        let phi = v_t / tip;
        let cp = cp_min_at(&self.cavitation, phi.abs());
        let s_zt = g.area(g.z_t);
        let mut p = self.consts.p_atm
            + rho * self.consts.g * (zeta - g.z_t)
            + 0.5 * rho * (v_t * v_t + tip * tip) * cp
            + rho * (g.area_slope(zeta) * zetadot * zetadot + s * zetaddot) * (g.inertia(zeta) - g.inertia(g.z_t))
            + 0.5 * rho * zetadot * zetadot * (1.0 - (s / s_zt).powi(2));
        if zetadot > 0.0 {
            p += self.turbine.pressure_jump(v_t, omega_t);
        }
        p
    }

    /// Integrates the nonlinear model from rest under `p_e(t) = Re[p̂ e^{−iωt}]`.
    pub fn integrate_nonlinear(&self, hp: &HydroPoint, pe_hat: Complex64, omega_t: f64, opts: &SimOptions) -> Result<Simulation> {
        if !(omega_t > 0.0) {
            return Err(Error::domain("rotational speed must be positive"));
        }
        let omega = hp.omega;
        let period = 2.0 * PI / omega;
        let duration = opts.periods * period;
        let n_out = (opts.periods * opts.samples_per_period as f64).round() as usize;
        let dt = duration / n_out as f64;
        let samples: Vec<f64> = (0..=n_out).map(|i| i as f64 * dt).collect();
        let st = self.turbine.s_t();
        let mut failure: Option<Error> = None;

        let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
            let pe_t = (pe_hat * Complex64::new(0.0, -omega * t).exp()).re;
            let acc = self.nonlinear_accel(y[0], y[1], pe_t, hp, Some(omega_t)).unwrap_or(f64::NAN);
            let v_t = self.geometry.area(y[0]) * y[1] / st;
            dy[0] = y[1];
            dy[1] = acc;
            dy[2] = self.turbine.torque(v_t, omega_t) * omega_t;
            dy[3] = v_t * st * self.turbine.pressure_jump(v_t, omega_t);
        };

        let mut series = TimeSeries::default();
        let mut energy = Vec::with_capacity(samples.len());
        let opts_ode = OdeOptions {
            rtol: opts.rtol,
            atol: opts.rtol * 1e-3,
            h_max: period / 20.0,
            ..OdeOptions::default()
        };
        ode::integrate(rhs, 0.0, &[0.0, 0.0, 0.0, 0.0], duration, &samples, &opts_ode, |t, y| {
            let pe_t = (pe_hat * Complex64::new(0.0, -omega * t).exp()).re;
            let acc = match self.nonlinear_accel(y[0], y[1], pe_t, hp, Some(omega_t)) {
                Ok(a) => a,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            };
            let s = self.geometry.area(y[0]);
            let v_t = s * y[1] / st;
            series.t.push(t);
            series.zeta.push(y[0]);
            series.zetadot.push(y[1]);
            series.q.push(s * y[1]);
            series.dp.push(self.turbine.pressure_jump(v_t, omega_t));
            let tq = self.turbine.torque(v_t, omega_t);
            series.torque.push(tq);
            series.power.push(tq * omega_t);
            series.pmin.push(self.min_pressure(y[0], y[1], acc, omega_t));
            series.pe.push(pe_t);
            energy.push((y[2], y[3]));
        })?;
        if let Some(e) = failure {
            return Err(e);
        }

        let start = ((1.0 - opts.window_fraction) * n_out as f64).round() as usize;
        let span = series.t[n_out] - series.t[start];
        let mean_power = (energy[n_out].0 - energy[start].0) / span;
        let mean_hydraulic_power = (energy[n_out].1 - energy[start].1) / span;
        let window = start..=n_out;
        let zeta_min = series.zeta[window.clone()].iter().copied().fold(f64::INFINITY, f64::min);
        let zeta_max = series.zeta[window.clone()].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let p_min = series.pmin[window.clone()].iter().copied().fold(f64::INFINITY, f64::min);
        let tip = omega_t * self.turbine.spec.tip_radius;
        let phi_max = series.q[window.clone()].iter().map(|q| (q / st / tip).abs()).fold(0.0, f64::max);
        let flags = Flags {
            cavitation: p_min < self.consts.p_vapor,
            turbine_uncovered: zeta_min < self.geometry.z_t,
            overflow: zeta_max > self.geometry.z_top,
            beyond_model: phi_max > self.turbine.curves.phi_max_model,
            ..Flags::default()
        };
        Ok(Simulation {
            series,
            summary: SimSummary {
                mean_power,
                mean_hydraulic_power,
                zeta_min,
                zeta_max,
                p_min,
                phi_max,
                flags,
                window_start: start,
            },
        })
    }
}

fn cp_min_at(table: &CavitationTable, phi: f64) -> f64 {
    let (x, y) = (&table.phi, &table.cp_min);
    if x.len() == 1 || phi <= x[0] {
        return y[0];
    }
    if phi >= x[x.len() - 1] {
        return y[y.len() - 1];
    }
    let i = x.partition_point(|&v| v <= phi) - 1;
    let t = (phi - x[i]) / (x[i + 1] - x[i]);
    y[i] + (y[i + 1] - y[i]) * t
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub periods: f64,
    pub samples_per_period: usize,
    /// Trailing fraction of the run used for averages and extremes.
    pub window_fraction: f64,
    pub rtol: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            periods: 20.0,
            samples_per_period: 200,
            window_fraction: 0.5,
            rtol: 1e-8,
        }
    }
}

/// Uniformly sampled outputs of a nonlinear run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub zeta: Vec<f64>,
    pub zetadot: Vec<f64>,
    pub q: Vec<f64>,
    pub dp: Vec<f64>,
    pub torque: Vec<f64>,
    pub power: Vec<f64>,
    pub pmin: Vec<f64>,
    pub pe: Vec<f64>,
}

pub const TIME_SERIES_HEADER: [&str; 8] = ["t", "zeta", "zetadot", "Q", "dp", "torque", "P", "pmin"];

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn row(&self, i: usize) -> [f64; 8] {
        [
            self.t[i],
            self.zeta[i],
            self.zetadot[i],
            self.q[i],
            self.dp[i],
            self.torque[i],
            self.power[i],
            self.pmin[i],
        ]
    }

    /// Complex amplitude of the fundamental of `values[range]` at `omega`,
    /// assuming the range spans whole periods.
    pub fn fundamental(&self, values: &[f64], start: usize, omega: f64) -> Complex64 {
        let end = values.len() - 1;
        let n = end - start;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in start..end {
            acc += values[i] * Complex64::new(0.0, omega * self.t[i]).exp();
        }
        acc * (2.0 / n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimSummary {
    pub mean_power: f64,
    pub mean_hydraulic_power: f64,
    pub zeta_min: f64,
    pub zeta_max: f64,
    pub p_min: f64,
    pub phi_max: f64,
    pub flags: Flags,
    /// Index of the first sample in the averaging window.
    pub window_start: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub series: TimeSeries,
    pub summary: SimSummary,
}

/// Mean hydraulic power of the linearized model, `½ Λ ω² S0² |ζ̂|²`.
pub fn hydraulic_power(zeta_abs: f64, omega: f64, lambda: f64, s0: f64) -> f64 {
    0.5 * lambda * omega * omega * s0 * s0 * zeta_abs * zeta_abs
}

/// Mean mechanical power `Σ p_n (ω|ζ̂|)^{2n}`.
pub fn mechanical_power(zeta_abs: f64, omega: f64, p: &[f64]) -> f64 {
    power_series(p, omega * zeta_abs)
}
