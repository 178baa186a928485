//! Built-in example data. None of this is measured: the turbine curves are a
//! plausible Wells-type shape, and the hydrodynamic coefficients come from
//! the small-body approximation. Good for desk-scale runs and tests only.

use crate::device::{small_body_hydro, Device, DuctGeometry, DuctProfile, HydroCoefficients};
use crate::error::Result;
use crate::turbine::{CavitationTable, CharacteristicCurves, TurbineSpec, WellsTurbine, FIT_TOLERANCE};
use crate::wave::{PhysicalConstants, ScatterDiagram, SeaState};

/// Flow-coefficient grid of the example turbine table.
pub fn phi_grid() -> Vec<f64> {
    (0..=16).map(|i| 0.02 * i as f64).collect()
}

pub fn axial_coefficient(phi: f64) -> f64 {
    8.0 * phi + 10.0 * (phi - 0.1).max(0.0).powi(2)
}

pub fn torque_coefficient(phi: f64) -> f64 {
    -0.02 + 8.0 * phi * phi - 82.6 * phi.powi(4)
}

pub fn turbine_curves() -> Result<CharacteristicCurves> {
    let phi = phi_grid();
    let ca = phi.iter().map(|&p| axial_coefficient(p)).collect();
    let ct = phi.iter().map(|&p| torque_coefficient(p)).collect();
    CharacteristicCurves::new(phi, ca, ct, FIT_TOLERANCE)
}

pub fn cavitation_table() -> Result<CavitationTable> {
    let phi = phi_grid();
    let cp = phi.iter().map(|p| -1.2 - 8.0 * p * p).collect();
    CavitationTable::new(phi, cp)
}

/// Turbine filling a 0.75 m duct.
pub fn constant_section_turbine_spec() -> TurbineSpec {
    TurbineSpec {
        tip_radius: 0.74,
        hub_radius: 0.45,
        chord: 0.2,
        blades: 7,
        duct_radius: 0.75,
        omega_min: 0.5,
        omega_max: 60.0,
    }
}

/// Turbine for the 0.5 m throat of the reference duct.
pub fn reference_turbine_spec() -> TurbineSpec {
    TurbineSpec {
        tip_radius: 0.49,
        hub_radius: 0.3,
        chord: 0.15,
        blades: 7,
        duct_radius: 0.5,
        omega_min: 0.5,
        omega_max: 120.0,
    }
}

/// Turbine for a constant-section duct of radius `r`, scaled from the 0.75 m one.
pub fn scaled_turbine_spec(radius: f64) -> TurbineSpec {
    let base = constant_section_turbine_spec();
    let f = radius / base.duct_radius;
    TurbineSpec {
        tip_radius: base.tip_radius * f,
        hub_radius: base.hub_radius * f,
        chord: base.chord * f,
        duct_radius: radius,
        omega_max: base.omega_max / f,
        ..base
    }
}

pub fn hydro_grid() -> Vec<f64> {
    (0..=116).map(|i| 0.1 + 0.025 * i as f64).collect()
}

pub const CONSTANT_SECTION_RADIUS: f64 = 0.75;
pub const INFLOW_Z: f64 = -5.65;
pub const TURBINE_Z: f64 = -3.65;
pub const TOP_Z: f64 = 3.0;

pub fn constant_section_profile() -> DuctProfile {
    DuctProfile::constant(CONSTANT_SECTION_RADIUS, INFLOW_Z, TOP_Z, TURBINE_Z)
}

pub fn constant_section_hydro(consts: &PhysicalConstants) -> Result<HydroCoefficients> {
    small_body_hydro(CONSTANT_SECTION_RADIUS, -INFLOW_Z, &hydro_grid(), consts)
}

pub fn reference_hydro(consts: &PhysicalConstants) -> Result<HydroCoefficients> {
    let p = DuctProfile::reference();
    small_body_hydro(p.nodes[0][1], -p.nodes[0][0], &hydro_grid(), consts)
}

pub fn constant_section_device(consts: &PhysicalConstants) -> Result<Device> {
    let turbine = WellsTurbine::new(constant_section_turbine_spec(), turbine_curves()?, consts.rho)?;
    Device::new(
        DuctGeometry::new(constant_section_profile())?,
        turbine,
        cavitation_table()?,
        *consts,
    )
}

pub fn reference_device(consts: &PhysicalConstants) -> Result<Device> {
    let turbine = WellsTurbine::new(reference_turbine_spec(), turbine_curves()?, consts.rho)?;
    Device::new(DuctGeometry::new(DuctProfile::reference())?, turbine, cavitation_table()?, *consts)
}

/// Moderate Mediterranean-like climate on a 10 × 9 grid.
pub fn scatter_diagram() -> Result<ScatterDiagram> {
    let mut cells = Vec::new();
    for i in 0..10 {
        for j in 0..9 {
            let hs = 0.5 + 0.5 * i as f64;
            let te = 5.0 + j as f64;
            let w = (-0.5 * ((hs - 1.5) / 1.0).powi(2) - 0.5 * ((te - 8.0) / 1.8).powi(2)).exp();
            cells.push((hs, te, w));
        }
    }
    let total: f64 = cells.iter().map(|c| c.2).sum();
    let cells = cells
        .into_iter()
        .map(|(hs, te, w)| SeaState::new(hs, te, w / total * (1.0 - 1e-12)))
        .collect::<Result<Vec<_>>>()?;
    ScatterDiagram::new(cells)
}

/// Files shipped under `data/`, as `(file name, contents)`.
pub fn data_files() -> Result<Vec<(&'static str, String)>> {
    let consts = PhysicalConstants::default();
    Ok(vec![
        ("turbine_curves.csv", turbine_curves()?.to_csv()),
        ("cavitation.csv", cavitation_table()?.to_csv()),
        ("hydro_constant.csv", constant_section_hydro(&consts)?.to_csv()),
        ("hydro_reference.csv", reference_hydro(&consts)?.to_csv()),
        ("scatter.csv", scatter_diagram()?.to_csv()),
    ])
}
