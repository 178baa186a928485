//! Multi-body frequency-domain park model built on cylindrical partial
//! waves (propagating modes only), plus the reduced multi-device
//! time-domain check.

use crate::device::{Device, HydroPoint};
use crate::error::{Error, Result};
use crate::ode::{self, OdeOptions};
use crate::special::{bessel_j_signed, hankel1_signed};
use crate::turbine::power_series;
use crate::wave::{group_velocity, Depth, MonochromaticWave, PhysicalConstants};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

pub const DEFAULT_ORDER: usize = 6;
/// Pile stiffness relative to the device stiffness.
pub const PILE_STIFFNESS_FACTOR: f64 = 1e9;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn i_pow(m: i64) -> Complex64 {
    match m.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => I,
        2 => Complex64::new(-1.0, 0.0),
        _ => -I,
    }
}

/// Plane incident wave as seen by the park.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParkWave {
    pub omega: f64,
    pub k: f64,
    pub direction: f64,
    pub height: f64,
}

impl ParkWave {
    pub fn new(wave: &MonochromaticWave, consts: &PhysicalConstants) -> Result<Self> {
        wave.validate()?;
        Ok(Self {
            omega: wave.omega(),
            k: wave.wavenumber(consts)?,
            direction: wave.direction,
            height: wave.height,
        })
    }
}

/// `a_m = (H/2) e^{ik(x cosθ + y sinθ)} i^m e^{−imθ}`, `m = −M..=M`.
pub fn ambient_incident_coefficients(x: f64, y: f64, wave: &ParkWave, order: usize) -> DVector<Complex64> {
    let th = wave.direction;
    let phase = Complex64::new(0.0, wave.k * (x * th.cos() + y * th.sin())).exp() * (0.5 * wave.height);
    let m = order as i64;
    DVector::from_iterator(
        2 * order + 1,
        (-m..=m).map(|n| phase * i_pow(n) * Complex64::new(0.0, -(n as f64) * th).exp()),
    )
}

/// Graf map from outgoing waves about body `i` to regular waves about body
/// `j`, with derivatives with respect to the coordinates of `j` (those with
/// respect to `i` are their negatives).
#[derive(Debug, Clone, PartialEq)]
pub struct BasisTransform {
    pub t: DMatrix<Complex64>,
    pub dx_j: DMatrix<Complex64>,
    pub dy_j: DMatrix<Complex64>,
}

/// Values `T_ν = H_ν(kL) e^{iνα}` and their `x_j`, `y_j` derivatives for
/// `ν = −2M..=2M`, index `ν + 2M`.
pub(crate) struct ToeplitzEntries {
    pub t: Vec<Complex64>,
    pub dx: Vec<Complex64>,
    pub dy: Vec<Complex64>,
}

pub(crate) fn toeplitz_entries(from: [f64; 2], to: [f64; 2], k: f64, order: usize) -> Result<ToeplitzEntries> {
    let dx = to[0] - from[0];
    let dy = to[1] - from[1];
    let l = dx.hypot(dy);
    if !(l > 0.0) {
        return Err(Error::domain("basis transformation between coincident centres"));
    }
    let alpha = dy.atan2(dx);
    let (sa, ca) = alpha.sin_cos();
    let nmax = 2 * order;
    let h = hankel1_signed(nmax + 1, k * l);
    let n = 2 * nmax + 1;
    let mut t = Vec::with_capacity(n);
    let mut ddx = Vec::with_capacity(n);
    let mut ddy = Vec::with_capacity(n);
    for nu in -(nmax as i64)..=(nmax as i64) {
        let e = Complex64::new(0.0, nu as f64 * alpha).exp();
        let hv = h.get(nu);
        let dh = (h.get(nu - 1) - h.get(nu + 1)) * (0.5 * k);
        let tv = hv * e;
        let dl = dh * e;
        let da = I * (nu as f64) * tv;
        t.push(tv);
        ddx.push(dl * ca - da * (sa / l));
        ddy.push(dl * sa + da * (ca / l));
    }
    Ok(ToeplitzEntries { t, dx: ddx, dy: ddy })
}

pub fn basis_transformation(from: [f64; 2], to: [f64; 2], k: f64, order: usize) -> Result<BasisTransform> {
    let e = toeplitz_entries(from, to, k, order)?;
    let n = 2 * order + 1;
    let off = 2 * order;
    let build = |v: &[Complex64]| DMatrix::from_fn(n, n, |m, nn| v[m + off - nn]);
    Ok(BasisTransform {
        t: build(&e.t),
        dx_j: build(&e.dx),
        dy_j: build(&e.dy),
    })
}

/// Outgoing partial-wave field `Σ γ_m H_m(kr) e^{imθ}` about `centre`.
pub fn outgoing_field(gamma: &DVector<Complex64>, centre: [f64; 2], k: f64, p: [f64; 2]) -> Complex64 {
    let order = (gamma.len() - 1) / 2;
    let (dx, dy) = (p[0] - centre[0], p[1] - centre[1]);
    let h = hankel1_signed(order, k * dx.hypot(dy));
    let th = dy.atan2(dx);
    (0..gamma.len())
        .map(|i| {
            let m = i as i64 - order as i64;
            gamma[i] * h.get(m) * Complex64::new(0.0, m as f64 * th).exp()
        })
        .sum()
}

/// Regular partial-wave field `Σ a_n J_n(kr) e^{inθ}` about `centre`.
pub fn regular_field(a: &DVector<Complex64>, centre: [f64; 2], k: f64, p: [f64; 2]) -> Complex64 {
    let order = (a.len() - 1) / 2;
    let (dx, dy) = (p[0] - centre[0], p[1] - centre[1]);
    let j = bessel_j_signed(order, k * dx.hypot(dy));
    let th = dy.atan2(dx);
    (0..a.len())
        .map(|i| {
            let m = i as i64 - order as i64;
            a[i] * j.get(m) * Complex64::new(0.0, m as f64 * th).exp()
        })
        .sum()
}

/// Per-body hydrodynamic and mechanical data at one frequency, in the
/// pressure form of the column equation.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyHydro {
    pub omega: f64,
    pub order: usize,
    /// Diffraction transfer matrix, incident → scattered coefficients.
    pub dtm: DMatrix<Complex64>,
    /// Radiated-wave coefficients per unit column velocity.
    pub radiation: DVector<Complex64>,
    /// Row mapping incident coefficients to excitation pressure.
    pub excitation: DVector<Complex64>,
    pub added_mass: f64,
    pub damping: f64,
    pub mass: f64,
    pub pto_damping: f64,
    pub stiffness: f64,
}

impl BodyHydro {
    pub fn validate(&self) -> Result<()> {
        let n = 2 * self.order + 1;
        if self.dtm.shape() != (n, n) || self.radiation.len() != n || self.excitation.len() != n {
            return Err(Error::domain(format!("body hydro blocks must match order {}", self.order)));
        }
        if self.damping < 0.0 {
            return Err(Error::domain("self radiation damping must be non-negative"));
        }
        if !(self.stiffness > 0.0) {
            return Err(Error::domain("stiffness must be positive"));
        }
        Ok(())
    }

    /// Axisymmetric surrogate for a column of radius `radius` and draft
    /// `draft`: a diagonal DTM from the bottom-mounted cylinder scaled by the
    /// fraction `1 − e^{−2kd}` of wave energy above the draft, and monopole
    /// excitation and radiation consistent with `hp` by reciprocity.
    #[allow(clippy::too_many_arguments)]
    pub fn surrogate(
        radius: f64,
        draft: f64,
        hp: &HydroPoint,
        mass: f64,
        pto_damping: f64,
        stiffness: f64,
        order: usize,
        consts: &PhysicalConstants,
    ) -> Result<Self> {
        let omega = hp.omega;
        let depth = Depth::Deep;
        let k = crate::wave::dispersion_wavenumber(omega, depth, consts.g)?;
        let cg = group_velocity(omega, depth, consts.g)?;
        let ka = k * radius;
        let jj = bessel_j_signed(order + 1, ka);
        let hh = hankel1_signed(order + 1, ka);
        let frac = 1.0 - (-2.0 * k * draft).exp();
        let n = 2 * order + 1;
        let mut dtm = DMatrix::zeros(n, n);
        for i in 0..n {
            let m = i as i64 - order as i64;
            let dj = 0.5 * (jj.get(m - 1) - jj.get(m + 1));
            let dh = (hh.get(m - 1) - hh.get(m + 1)) * 0.5;
            dtm[(i, i)] = -Complex64::new(dj, 0.0) / dh * frac;
        }
        let area = PI * radius * radius;
        let mut radiation = DVector::zeros(n);
        radiation[order] = -hp.pe * (k * area / (4.0 * consts.rho * consts.g * cg));
        let mut excitation = DVector::zeros(n);
        excitation[order] = hp.pe;
        let b = Self {
            omega,
            order,
            dtm,
            radiation,
            excitation,
            added_mass: hp.added_mass,
            damping: hp.damping,
            mass,
            pto_damping,
            stiffness,
        };
        b.validate()?;
        Ok(b)
    }

    /// Surrogate for a shipped device running with linear damping `lambda`.
    pub fn for_device(device: &Device, hp: &HydroPoint, lambda: f64, order: usize) -> Result<Self> {
        let c = &device.consts;
        Self::surrogate(
            device.geometry.inflow_radius(),
            -device.geometry.z1,
            hp,
            device.mass_eff(0.0),
            lambda * device.s0(),
            c.rho * c.g,
            order,
            c,
        )
    }

    /// Column-free pile: device-class DTM at the pile radius, no turbine,
    /// stiffness scaled by [`PILE_STIFFNESS_FACTOR`].
    pub fn pile(radius: f64, draft: f64, omega: f64, device_stiffness: f64, order: usize, consts: &PhysicalConstants) -> Result<Self> {
        if !(radius > 0.0 && draft > 0.0) {
            return Err(Error::domain("pile radius and draft must be positive"));
        }
        let hp = crate::device::small_body_point(radius, draft, omega, consts);
        Self::surrogate(
            radius,
            draft,
            &hp,
            consts.rho * draft,
            0.0,
            device_stiffness * PILE_STIFFNESS_FACTOR,
            order,
            consts,
        )
    }

    /// Mechanical impedance `−ω²(m + A) − iω(c + B) + k`.
    pub fn impedance(&self) -> Complex64 {
        let w = self.omega;
        Complex64::new(
            -w * w * (self.mass + self.added_mass) + self.stiffness,
            -w * (self.pto_damping + self.damping),
        )
    }
}

type C2 = [f64; 2];

fn c2(z: Complex64) -> C2 {
    [z.re, z.im]
}

fn from_c2(v: &C2) -> Complex64 {
    Complex64::new(v[0], v[1])
}

/// JSON shape of [`BodyHydro`]; complex numbers as `[re, im]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyHydroFile {
    pub omega: f64,
    pub order: usize,
    pub dtm: Vec<Vec<C2>>,
    pub radiation: Vec<C2>,
    pub excitation: Vec<C2>,
    pub added_mass: f64,
    pub damping: f64,
    pub mass: f64,
    pub pto_damping: f64,
    pub stiffness: f64,
}

impl From<&BodyHydro> for BodyHydroFile {
    fn from(b: &BodyHydro) -> Self {
        Self {
            omega: b.omega,
            order: b.order,
            dtm: (0..b.dtm.nrows())
                .map(|i| (0..b.dtm.ncols()).map(|j| c2(b.dtm[(i, j)])).collect())
                .collect(),
            radiation: b.radiation.iter().map(|&z| c2(z)).collect(),
            excitation: b.excitation.iter().map(|&z| c2(z)).collect(),
            added_mass: b.added_mass,
            damping: b.damping,
            mass: b.mass,
            pto_damping: b.pto_damping,
            stiffness: b.stiffness,
        }
    }
}

impl TryFrom<BodyHydroFile> for BodyHydro {
    type Error = Error;

    fn try_from(f: BodyHydroFile) -> Result<Self> {
        let n = 2 * f.order + 1;
        if f.dtm.len() != n || f.dtm.iter().any(|r| r.len() != n) {
            return Err(Error::Config(format!("dtm must be {n} × {n} for order {}", f.order)));
        }
        if f.radiation.len() != n || f.excitation.len() != n {
            return Err(Error::Config(format!("radiation and excitation need {n} entries")));
        }
        let b = BodyHydro {
            omega: f.omega,
            order: f.order,
            dtm: DMatrix::from_fn(n, n, |i, j| from_c2(&f.dtm[i][j])),
            radiation: DVector::from_iterator(n, f.radiation.iter().map(from_c2)),
            excitation: DVector::from_iterator(n, f.excitation.iter().map(from_c2)),
            added_mass: f.added_mass,
            damping: f.damping,
            mass: f.mass,
            pto_damping: f.pto_damping,
            stiffness: f.stiffness,
        };
        b.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(b)
    }
}

impl BodyHydro {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&BodyHydroFile::from(self)).expect("plain data serializes")
    }

    pub fn from_json(source_name: &str, text: &str) -> Result<Self> {
        let f: BodyHydroFile = serde_json::from_str(text).map_err(|e| Error::parse(source_name, e.line(), e.to_string()))?;
        f.try_into()
    }
}

/// Positions, per-body data and incident wave.
#[derive(Debug, Clone)]
pub struct ParkProblem {
    pub positions: Vec<[f64; 2]>,
    pub bodies: Vec<Arc<BodyHydro>>,
    pub is_pile: Vec<bool>,
    pub wave: ParkWave,
}

impl ParkProblem {
    pub fn new(positions: Vec<[f64; 2]>, bodies: Vec<Arc<BodyHydro>>, is_pile: Vec<bool>, wave: ParkWave) -> Result<Self> {
        let n = positions.len();
        if n == 0 || bodies.len() != n || is_pile.len() != n {
            return Err(Error::domain("park needs matching non-empty positions, bodies and pile flags"));
        }
        let order = bodies[0].order;
        for b in &bodies {
            if b.order != order {
                return Err(Error::domain("all bodies must share the truncation order"));
            }
            if (b.omega - wave.omega).abs() > 1e-12 * wave.omega {
                return Err(Error::domain("body hydro frequency differs from the wave frequency"));
            }
        }
        Ok(Self {
            positions,
            bodies,
            is_pile,
            wave,
        })
    }

    pub fn order(&self) -> usize {
        self.bodies[0].order
    }

    pub fn modes(&self) -> usize {
        2 * self.order() + 1
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn with_positions(&self, positions: Vec<[f64; 2]>) -> Self {
        Self { positions, ..self.clone() }
    }

    /// Indices of non-pile bodies.
    pub fn devices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.is_pile[i]).collect()
    }

    fn gamma_offset(&self, j: usize) -> usize {
        j * self.modes()
    }

    fn zeta_index(&self, j: usize) -> usize {
        self.len() * self.modes() + j
    }

    pub fn unknowns(&self) -> usize {
        self.len() * (self.modes() + 1)
    }
}

/// Assembled `[M_γγ M_γζ; M_ζγ M_ζζ]` and `[h₁; h₂]`.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    pub matrix: DMatrix<Complex64>,
    pub rhs: DVector<Complex64>,
}

pub fn assemble_block_system(problem: &ParkProblem) -> Result<BlockSystem> {
    let nb = problem.len();
    let nm = problem.modes();
    let order = problem.order();
    let k = problem.wave.k;
    let n = problem.unknowns();
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    let mut h = DVector::<Complex64>::zeros(n);
    let iw = Complex64::new(0.0, problem.wave.omega);
    for j in 0..nb {
        let body = &problem.bodies[j];
        let gj = problem.gamma_offset(j);
        let zj = problem.zeta_index(j);
        let [x, y] = problem.positions[j];
        let a = ambient_incident_coefficients(x, y, &problem.wave, order);
        let ba = &body.dtm * &a;
        for r in 0..nm {
            m[(gj + r, gj + r)] += Complex64::new(1.0, 0.0);
            m[(gj + r, zj)] = iw * body.radiation[r];
            h[gj + r] = ba[r];
        }
        m[(zj, zj)] = body.impedance();
        h[zj] = body.excitation.dot(&a);
        for i in 0..nb {
            if i == j {
                continue;
            }
            let t = basis_transformation(problem.positions[i], problem.positions[j], k, order)?.t;
            let tt = t.transpose();
            let bt = -(&body.dtm * &tt);
            let ft = -(body.excitation.transpose() * &tt);
            let gi = problem.gamma_offset(i);
            m.view_mut((gj, gi), (nm, nm)).copy_from(&bt);
            m.view_mut((zj, gi), (1, nm)).copy_from(&ft);
        }
    }
    Ok(BlockSystem { matrix: m, rhs: h })
}

/// Solved park: scattered coefficients per body and column amplitudes.
#[derive(Debug, Clone)]
pub struct ParkState {
    pub gamma: Vec<DVector<Complex64>>,
    pub zeta: Vec<Complex64>,
    /// Full unknown vector `[γ̂; ζ̂]`.
    pub x: DVector<Complex64>,
    pub residual: f64,
}

pub(crate) fn dense_solve(m: &DMatrix<Complex64>, h: &DVector<Complex64>, what: &str) -> Result<(DVector<Complex64>, f64)> {
    // Partial-wave orders differ by many decades; equilibrate rows then
    // columns before factoring.
    let n = m.nrows();
    let row: Vec<f64> = (0..n)
        .map(|i| {
            let mx = m.row(i).iter().map(|v| v.norm()).fold(0.0, f64::max);
            if mx > 0.0 {
                1.0 / mx
            } else {
                1.0
            }
        })
        .collect();
    let col: Vec<f64> = (0..n)
        .map(|j| {
            let mx = (0..n).map(|i| m[(i, j)].norm() * row[i]).fold(0.0, f64::max);
            if mx > 0.0 {
                1.0 / mx
            } else {
                1.0
            }
        })
        .collect();
    let scaled = DMatrix::from_fn(n, n, |i, j| m[(i, j)] * (row[i] * col[j]));
    let lu = scaled.lu();
    let solve = |rhs: &DVector<Complex64>| -> Option<DVector<Complex64>> {
        let r = DVector::from_fn(n, |i, _| rhs[i] * row[i]);
        lu.solve(&r).map(|y| DVector::from_fn(n, |j, _| y[j] * col[j]))
    };
    let mut x = solve(h).ok_or_else(|| Error::numerical(format!("{what}: singular system")))?;
    // One step of iterative refinement.
    if let Some(dx) = solve(&(h - m * &x)) {
        x += dx;
    }
    if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::numerical(format!("{what}: non-finite solution")));
    }
    // Measured on the row-equilibrated equations: unscaled, the products
    // of large translation entries and small high-order coefficients put
    // the rounding floor of M x far above 1e-10 ‖h‖.
    let r = m * &x - h;
    let num = (0..n).map(|i| (r[i] * row[i]).norm_sqr()).sum::<f64>().sqrt();
    let den = (0..n).map(|i| (h[i] * row[i]).norm_sqr()).sum::<f64>().sqrt();
    let res = if den > 0.0 { num / den } else { num };
    if res > 1e-10 {
        return Err(Error::numerical(format!("{what}: residual {res:e} above 1e-10 (ill-conditioned)")));
    }
    Ok((x, res))
}

pub fn solve_system(problem: &ParkProblem, system: &BlockSystem) -> Result<ParkState> {
    let (x, residual) = dense_solve(&system.matrix, &system.rhs, "park solve")?;
    let nm = problem.modes();
    let gamma = (0..problem.len())
        .map(|j| x.rows(problem.gamma_offset(j), nm).into_owned())
        .collect();
    let zeta = (0..problem.len()).map(|j| x[problem.zeta_index(j)]).collect();
    Ok(ParkState { gamma, zeta, x, residual })
}

pub fn solve_park(problem: &ParkProblem) -> Result<ParkState> {
    let system = assemble_block_system(problem)?;
    solve_system(problem, &system)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParkPower {
    pub total: f64,
    /// One entry per body; piles report zero.
    pub per_body: Vec<f64>,
}

/// `Σ_ℓ Σ_n p_n (ω|ζ̂_ℓ|)^{2n}` over non-pile bodies.
pub fn park_power(problem: &ParkProblem, state: &ParkState, p: &[f64]) -> ParkPower {
    let w = problem.wave.omega;
    let per_body: Vec<f64> = (0..problem.len())
        .map(|j| {
            if problem.is_pile[j] {
                0.0
            } else {
                power_series(p, w * state.zeta[j].norm())
            }
        })
        .collect();
    ParkPower {
        total: per_body.iter().sum(),
        per_body,
    }
}

/// Park equations reduced to the device columns:
/// `[−ω²(m + A) − iω(c + B) + k] ζ̂ = p̂_eff`, with the full interaction
/// matrices `A`, `B` (self terms on the diagonal).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionMatrices {
    pub omega: f64,
    pub n: usize,
    pub added_mass: Vec<Vec<f64>>,
    pub damping: Vec<Vec<f64>>,
    pub excitation: Vec<C2>,
}

impl InteractionMatrices {
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        let square = |m: &Vec<Vec<f64>>| m.len() == n && m.iter().all(|r| r.len() == n);
        if n == 0 || !square(&self.added_mass) || !square(&self.damping) || self.excitation.len() != n {
            return Err(Error::Config(format!(
                "interaction matrices must be {n} × {n} with {n} excitations"
            )));
        }
        Ok(())
    }

    pub fn from_json(source_name: &str, text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text).map_err(|e| Error::parse(source_name, e.line(), e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn excitation(&self, i: usize) -> Complex64 {
        from_c2(&self.excitation[i])
    }
}

/// Eliminates the scattered coefficients and pile motions.
pub fn reduce_to_devices(problem: &ParkProblem) -> Result<InteractionMatrices> {
    let system = assemble_block_system(problem)?;
    let devices = problem.devices();
    if devices.is_empty() {
        return Err(Error::domain("park has no devices"));
    }
    let n = problem.unknowns();
    let dev_idx: Vec<usize> = devices.iter().map(|&j| problem.zeta_index(j)).collect();
    let other: Vec<usize> = (0..n).filter(|i| !dev_idx.contains(i)).collect();
    let pick = |rows: &[usize], cols: &[usize]| DMatrix::from_fn(rows.len(), cols.len(), |r, c| system.matrix[(rows[r], cols[c])]);
    let m_yy = pick(&other, &other);
    let m_yd = pick(&other, &dev_idx);
    let m_dy = pick(&dev_idx, &other);
    let m_dd = pick(&dev_idx, &dev_idx);
    let h_y = DVector::from_iterator(other.len(), other.iter().map(|&i| system.rhs[i]));
    let h_d = DVector::from_iterator(dev_idx.len(), dev_idx.iter().map(|&i| system.rhs[i]));
    let lu = m_yy.lu();
    let s_yd = lu
        .solve(&m_yd)
        .ok_or_else(|| Error::numerical("reduction: singular scattering block"))?;
    let s_yh = lu
        .solve(&h_y)
        .ok_or_else(|| Error::numerical("reduction: singular scattering block"))?;
    let k_eff = m_dd - &m_dy * s_yd;
    let p_eff = h_d - &m_dy * s_yh;
    let w = problem.wave.omega;
    let nd = devices.len();
    let mut added_mass = vec![vec![0.0; nd]; nd];
    let mut damping = vec![vec![0.0; nd]; nd];
    for (r, &jr) in devices.iter().enumerate() {
        for c in 0..nd {
            let mut h = k_eff[(r, c)];
            if r == c {
                let b = &problem.bodies[jr];
                h -= Complex64::new(-w * w * b.mass + b.stiffness, -w * b.pto_damping);
            }
            added_mass[r][c] = -h.re / (w * w);
            damping[r][c] = -h.im / w;
        }
    }
    Ok(InteractionMatrices {
        omega: w,
        n: nd,
        added_mass,
        damping,
        excitation: p_eff.iter().map(|&z| c2(z)).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeDomainPark {
    pub per_device: Vec<f64>,
    pub total: f64,
}

/// Integrates the coupled nonlinear columns (all identical to `device`)
/// for `periods` wave periods and averages power over the trailing half.
pub fn timedomain_verify(device: &Device, m: &InteractionMatrices, omega_t: f64, periods: f64, rtol: f64) -> Result<TimeDomainPark> {
    m.validate()?;
    if !(omega_t > 0.0 && periods > 0.0) {
        return Err(Error::domain("rotational speed and duration must be positive"));
    }
    let n = m.n;
    let w = m.omega;
    let rho = device.consts.rho;
    let g = &device.geometry;
    let st = device.turbine.s_t();
    let s1 = g.s1();
    let a = DMatrix::from_fn(n, n, |r, c| m.added_mass[r][c]);
    let b = DMatrix::from_fn(n, n, |r, c| m.damping[r][c]);
    let pe: Vec<Complex64> = (0..n).map(|i| m.excitation(i)).collect();
    let period = 2.0 * PI / w;
    let t_end = periods * period;
    let t_avg = 0.5 * t_end;
    let mut singular = false;

    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let rot = Complex64::new(0.0, -w * t).exp();
        let mut mass = a.clone();
        let mut f = DVector::zeros(n);
        let zd = DVector::from_iterator(n, (0..n).map(|i| y[2 * i + 1]));
        let bz = &b * &zd;
        for i in 0..n {
            let (z, v) = (y[2 * i], y[2 * i + 1]);
            let c = g.inertia(z);
            let s = g.area(z);
            mass[(i, i)] += rho * c * s;
            let v_t = s * v / st;
            f[i] = (pe[i] * rot).re
                - rho * c * g.area_slope(z) * v * v
                - 0.5 * rho * v * v * (1.0 - (s / s1).powi(2))
                - device.turbine.pressure_jump(v_t, omega_t)
                - bz[i]
                - rho * device.consts.g * z;
            dy[2 * n + i] = device.turbine.torque(v_t, omega_t) * omega_t;
        }
        match mass.lu().solve(&f) {
            Some(acc) => {
                for i in 0..n {
                    dy[2 * i] = y[2 * i + 1];
                    dy[2 * i + 1] = acc[i];
                }
            }
            None => {
                singular = true;
                dy[..2 * n].iter_mut().for_each(|v| *v = f64::NAN);
            }
        }
    };
    let mut at_avg = vec![0.0; n];
    let mut at_end = vec![0.0; n];
    let opts = OdeOptions {
        rtol,
        atol: rtol * 1e-3,
        h_max: period / 20.0,
        ..OdeOptions::default()
    };
    let result = ode::integrate(rhs, 0.0, &vec![0.0; 3 * n], t_end, &[t_avg, t_end], &opts, |t, y| {
        let dst = if t < t_end { &mut at_avg } else { &mut at_end };
        dst.copy_from_slice(&y[2 * n..]);
    });
    if singular {
        return Err(Error::numerical("multi-body mass matrix became singular"));
    }
    result?;
    let per_device: Vec<f64> = (0..n).map(|i| (at_end[i] - at_avg[i]) / (t_end - t_avg)).collect();
    Ok(TimeDomainPark {
        total: per_device.iter().sum(),
        per_device,
    })
}

/// Frequency-domain power of the reduced system with linear turbine
/// damping `lambda`.
pub fn reduced_linear_power(device: &Device, m: &InteractionMatrices, omega_t: f64) -> Result<TimeDomainPark> {
    m.validate()?;
    let n = m.n;
    let w = m.omega;
    let c = device.turbine.lambda(omega_t) * device.s0();
    let mass = device.mass_eff(0.0);
    let k = device.consts.rho * device.consts.g;
    let z = DMatrix::from_fn(n, n, |r, col| {
        let diag = if r == col {
            Complex64::new(-w * w * mass + k, -w * c)
        } else {
            Complex64::new(0.0, 0.0)
        };
        diag + Complex64::new(-w * w * m.added_mass[r][col], -w * m.damping[r][col])
    });
    let pe = DVector::from_iterator(n, (0..n).map(|i| m.excitation(i)));
    let (zeta, _) = dense_solve(&z, &pe, "reduced solve")?;
    let p = device.turbine.mean_power_coefficients(omega_t, device.s0());
    let per_device: Vec<f64> = zeta.iter().map(|z| power_series(&p, w * z.norm())).collect();
    Ok(TimeDomainPark {
        total: per_device.iter().sum(),
        per_device,
    })
}
