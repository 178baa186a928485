use num_complex::Complex64;
use owc_core::device::{HydroPoint, SimOptions};
use owc_core::ode::{self, OdeOptions};
use owc_core::synthetic;
use owc_core::wave::PhysicalConstants;
use std::f64::consts::PI;

fn consts() -> PhysicalConstants {
    PhysicalConstants::default()
}

#[test]
fn undamped_column_conserves_energy() {
    let c = consts();
    let dev = synthetic::constant_section_device(&c).unwrap();
    let hp = HydroPoint {
        omega: 1.0,
        added_mass: 0.0,
        damping: 0.0,
        pe: Complex64::new(0.0, 0.0),
    };
    let l = -dev.geometry.z1;
    let s = dev.s0();
    let energy = |z: f64, v: f64| 0.5 * c.rho * l * s * v * v + c.rho * c.g * l * s * (z - l * (1.0 + z / l).ln());
    let period = 2.0 * PI * (l / c.g).sqrt();
    let samples: Vec<f64> = (0..=500).map(|i| i as f64 * 50.0 * period / 500.0).collect();
    let e0 = energy(0.5, 0.0);
    let mut drift: f64 = 0.0;
    let opts = OdeOptions {
        rtol: 1e-11,
        atol: 1e-13,
        ..OdeOptions::default()
    };
    ode::integrate(
        |_, y, dy| {
            dy[0] = y[1];
            dy[1] = dev.nonlinear_accel(y[0], y[1], 0.0, &hp, None).unwrap();
        },
        0.0,
        &[0.5, 0.0],
        50.0 * period,
        &samples,
        &opts,
        |_, y| drift = drift.max(((energy(y[0], y[1]) - e0) / e0).abs()),
    )
    .unwrap();
    assert!(drift < 1e-6, "relative drift {drift:e}");
}

#[test]
fn equilibrium_and_static_balance() {
    let c = consts();
    let dev = synthetic::constant_section_device(&c).unwrap();
    let hp = HydroPoint {
        omega: 1.0,
        added_mass: 100.0,
        damping: 10.0,
        pe: Complex64::new(0.0, 0.0),
    };
    assert_eq!(dev.nonlinear_accel(0.0, 0.0, 0.0, &hp, Some(10.0)).unwrap(), 0.0);
    let pe = 2000.0;
    let z = pe / (c.rho * c.g);
    assert!(dev.nonlinear_accel(z, 0.0, pe, &hp, Some(10.0)).unwrap().abs() < 1e-12);
}

#[test]
fn tiny_wave_matches_linear_solution() {
    let c = consts();
    for dev in [
        synthetic::constant_section_device(&c).unwrap(),
        synthetic::reference_device(&c).unwrap(),
    ] {
        let hydro = if dev.geometry.profile.nodes.len() == 2 {
            synthetic::constant_section_hydro(&c).unwrap()
        } else {
            synthetic::reference_hydro(&c).unwrap()
        };
        let omega = 2.0 * PI / 8.0;
        let hp = hydro.at(omega).unwrap();
        let omega_t = 0.5 * (dev.turbine.spec.omega_min + dev.turbine.spec.omega_max) / 3.0;
        let pe = hp.pe * 0.0005;
        let sim = dev.integrate_nonlinear(&hp, pe, omega_t, &SimOptions::default()).unwrap();
        let lin = dev.linear_frequency_solve(&hp, dev.turbine.lambda(omega_t), pe).unwrap();
        let n = sim.series.len();
        let start = n - 1 - 200;
        let fund = sim.series.fundamental(&sim.series.zeta, start, omega);
        let rel = (fund.norm() - lin.norm()).abs() / lin.norm();
        assert!(rel < 1e-3, "amplitude mismatch {rel:e}");
        assert!((fund - lin).norm() / lin.norm() < 1e-3);
    }
}

#[test]
fn reference_run_is_periodic_with_negative_power_at_extrema() {
    let c = consts();
    let dev = synthetic::reference_device(&c).unwrap();
    let hydro = synthetic::reference_hydro(&c).unwrap();
    let omega = 2.0 * PI / 8.15;
    let hp = hydro.at(omega).unwrap();
    let amp = 3.0 / 2f64.sqrt() / 2.0;
    let omega_t = 12.0;
    let sim = dev.integrate_nonlinear(&hp, hp.pe * amp, omega_t, &SimOptions::default()).unwrap();
    let s = &sim.series;
    let n = s.len();
    let spp = 200;
    let amp_z = s.zeta[n - spp..].iter().fold(0.0f64, |m, z| m.max(z.abs()));
    let rms = ((0..spp).map(|i| (s.zeta[n - 1 - i] - s.zeta[n - 1 - i - spp]).powi(2)).sum::<f64>() / spp as f64).sqrt();
    assert!(rms < 1e-4 * amp_z, "rms {rms:e} vs amplitude {amp_z}");
    // ζ extrema coincide with ζ̇ = 0, where the turbine is motoring.
    for i in n - spp..n - 1 {
        if s.zetadot[i] * s.zetadot[i + 1] <= 0.0 {
            assert!(s.power[i].min(s.power[i + 1]) < 0.0);
        }
    }
    let maxima = (n - spp..n - 1)
        .filter(|&i| i > 0 && s.power[i] > s.power[i - 1] && s.power[i] >= s.power[i + 1] && s.power[i] > 0.0)
        .count();
    assert_eq!(maxima, 2);
    println!("{:?}", sim.summary);
}
