use nalgebra::DVector;
use num_complex::Complex64;
use owc_core::control::hydraulic_optimal_speed;
use owc_core::device::{small_body_point, Device, HydroPoint};
use owc_core::park::{
    ambient_incident_coefficients, basis_transformation, outgoing_field, park_power, reduce_to_devices, reduced_linear_power,
    regular_field, solve_park, BodyHydro, ParkProblem, ParkWave, DEFAULT_ORDER,
};
use owc_core::synthetic;
use owc_core::wave::{group_velocity, Depth, MonochromaticWave, PhysicalConstants};
use std::sync::Arc;

struct Setup {
    device: Device,
    hp: HydroPoint,
    body: Arc<BodyHydro>,
    wave: ParkWave,
    omega_t: f64,
}

fn setup(direction: f64) -> Setup {
    let c = PhysicalConstants::default();
    let device = synthetic::constant_section_device(&c).unwrap();
    let mw = MonochromaticWave::new(3.0 / 2f64.sqrt(), 8.0, direction, Depth::Deep).unwrap();
    let wave = ParkWave::new(&mw, &c).unwrap();
    let hp = small_body_point(0.75, 5.65, wave.omega, &c);
    let omega_t = hydraulic_optimal_speed(&device, &hp);
    let body = BodyHydro::for_device(&device, &hp, device.turbine.lambda(omega_t), DEFAULT_ORDER).unwrap();
    Setup {
        device,
        hp,
        body: Arc::new(body),
        wave,
        omega_t,
    }
}

fn park(s: &Setup, positions: Vec<[f64; 2]>) -> ParkProblem {
    let n = positions.len();
    ParkProblem::new(positions, vec![s.body.clone(); n], vec![false; n], s.wave).unwrap()
}

#[test]
fn graf_transformation_matches_direct_field() {
    let k = 0.07;
    let (from, to) = ([1.0, -2.0], [31.0, 14.0]);
    let inner = 4;
    let order = 28;
    let gamma = DVector::from_fn(2 * inner + 1, |i, _| Complex64::new(0.3 + 0.1 * i as f64, (i as f64 * 1.7).sin()));
    let mut padded = DVector::zeros(2 * order + 1);
    padded.rows_mut(order - inner, 2 * inner + 1).copy_from(&gamma);
    let t = basis_transformation(from, to, k, order).unwrap().t;
    let a = t.transpose() * &padded;
    for s in 0..24 {
        let r = 8.0 * (s as f64 + 1.0) / 24.0;
        let th = 0.9 * s as f64;
        let p = [to[0] + r * th.cos(), to[1] + r * th.sin()];
        let direct = outgoing_field(&gamma, from, k, p);
        let via = regular_field(&a, to, k, p);
        assert!((direct - via).norm() < 1e-10 * direct.norm().max(1.0), "{direct} vs {via}");
    }
}

#[test]
fn transformation_derivatives_match_finite_differences() {
    let k = 0.06;
    let (from, to) = ([0.0, 0.0], [12.0, -7.0]);
    let b = basis_transformation(from, to, k, 3).unwrap();
    let h = 1e-6;
    let fx = (basis_transformation(from, [to[0] + h, to[1]], k, 3).unwrap().t
        - basis_transformation(from, [to[0] - h, to[1]], k, 3).unwrap().t)
        / Complex64::new(2.0 * h, 0.0);
    let fy = (basis_transformation(from, [to[0], to[1] + h], k, 3).unwrap().t
        - basis_transformation(from, [to[0], to[1] - h], k, 3).unwrap().t)
        / Complex64::new(2.0 * h, 0.0);
    assert!((fx - &b.dx_j).norm() < 1e-6 * b.dx_j.norm());
    assert!((fy - &b.dy_j).norm() < 1e-6 * b.dy_j.norm());
    let gx = (basis_transformation([h, 0.0], to, k, 3).unwrap().t - basis_transformation([-h, 0.0], to, k, 3).unwrap().t)
        / Complex64::new(2.0 * h, 0.0);
    assert!((gx + &b.dx_j).norm() < 1e-6 * b.dx_j.norm());
}

#[test]
fn single_body_park_matches_isolated_device() {
    let s = setup(0.3);
    let p = park(&s, vec![[7.0, -4.0]]);
    let st = solve_park(&p).unwrap();
    let phase = ambient_incident_coefficients(7.0, -4.0, &s.wave, 0)[0] / Complex64::new(s.wave.height / 2.0, 0.0);
    let lam = s.device.turbine.lambda(s.omega_t);
    let iso = s
        .device
        .linear_frequency_solve(&s.hp, lam, s.hp.pe * (s.wave.height / 2.0))
        .unwrap()
        * phase;
    assert!((st.zeta[0] - iso).norm() < 1e-12 * iso.norm(), "{} vs {iso}", st.zeta[0]);
    assert!(st.residual < 1e-12);
}

#[test]
fn radiated_flux_equals_radiation_damping_power() {
    let c = PhysicalConstants::default();
    let omega = 0.9;
    let hp = small_body_point(0.75, 5.65, omega, &c);
    let body = BodyHydro::surrogate(0.75, 5.65, &hp, 1.0, 0.0, c.rho * c.g, 2, &c).unwrap();
    let k = omega * omega / c.g;
    let cg = group_velocity(omega, Depth::Deep, c.g).unwrap();
    let gamma0 = omega * body.radiation[2].norm();
    let flux = 2.0 * c.rho * c.g * cg * gamma0 * gamma0 / k;
    let area = std::f64::consts::PI * 0.75 * 0.75;
    let damping_power = 0.5 * hp.damping * area * omega * omega;
    assert!((flux - damping_power).abs() < 1e-12 * damping_power);
}

#[test]
fn diffraction_transfer_is_passive() {
    let s = setup(0.0);
    for i in 0..s.body.dtm.nrows() {
        let d = s.body.dtm[(i, i)];
        assert!((Complex64::new(1.0, 0.0) + d * 2.0).norm() <= 1.0 + 1e-14);
    }
}

#[test]
fn mirror_layout_gives_mirror_response() {
    let s = setup(0.0);
    let p = park(&s, vec![[0.0, 6.0], [0.0, -6.0], [15.0, 0.0]]);
    let st = solve_park(&p).unwrap();
    assert!((st.zeta[0] - st.zeta[1]).norm() < 1e-12 * st.zeta[0].norm());
    let pw = park_power(&p, &st, &s.device.turbine.mean_power_coefficients(s.omega_t, s.device.s0()));
    assert!((pw.per_body[0] - pw.per_body[1]).abs() < 1e-9 * pw.per_body[0].abs());
}

#[test]
fn distant_bodies_decouple() {
    let s = setup(0.0);
    let l = 200.0 / s.wave.k;
    let p = park(&s, vec![[0.0, 0.0], [0.0, l]]);
    let st = solve_park(&p).unwrap();
    let lone = solve_park(&park(&s, vec![[0.0, 0.0]])).unwrap();
    let near = solve_park(&park(&s, vec![[0.0, 0.0], [0.0, 4.0]])).unwrap();
    let far_dev = (st.zeta[0] - lone.zeta[0]).norm();
    let near_dev = (near.zeta[0] - lone.zeta[0]).norm();
    assert!(far_dev < 0.1 * near_dev, "{far_dev} {near_dev}");
    assert!(far_dev < 1e-3 * lone.zeta[0].norm());
}

#[test]
fn piles_barely_move_and_scatter() {
    let s = setup(0.0);
    let c = PhysicalConstants::default();
    let pile = BodyHydro::pile(5.0, 20.0, s.wave.omega, s.body.stiffness, DEFAULT_ORDER, &c).unwrap();
    let p = ParkProblem::new(
        vec![[0.0, 0.0], [-15.0, 3.0], [10.0, 10.0]],
        vec![s.body.clone(), Arc::new(pile), s.body.clone()],
        vec![false, true, false],
        s.wave,
    )
    .unwrap();
    let st = solve_park(&p).unwrap();
    assert!(st.zeta[1].norm() < 1e-6 * st.zeta[0].norm());
    assert!(st.gamma[1].norm() > 1e-3 * s.wave.height);
    let pw = park_power(&p, &st, &s.device.turbine.mean_power_coefficients(s.omega_t, s.device.s0()));
    assert_eq!(pw.per_body[1], 0.0);
}

#[test]
fn reduced_system_reproduces_full_solution() {
    let s = setup(0.2);
    let c = PhysicalConstants::default();
    let pile = BodyHydro::pile(5.0, 20.0, s.wave.omega, s.body.stiffness, DEFAULT_ORDER, &c).unwrap();
    let p = ParkProblem::new(
        vec![[0.0, 0.0], [-9.0, 3.0], [6.0, 8.0], [3.0, -7.0]],
        vec![s.body.clone(), Arc::new(pile), s.body.clone(), s.body.clone()],
        vec![false, true, false, false],
        s.wave,
    )
    .unwrap();
    let st = solve_park(&p).unwrap();
    let full = park_power(&p, &st, &s.device.turbine.mean_power_coefficients(s.omega_t, s.device.s0()));
    let m = reduce_to_devices(&p).unwrap();
    assert_eq!(m.n, 3);
    let red = reduced_linear_power(&s.device, &m, s.omega_t).unwrap();
    assert!(
        (red.total - full.total).abs() < 1e-9 * full.total.abs(),
        "{} {}",
        red.total,
        full.total
    );
    // Self terms sit on the diagonal.
    assert!(m.damping[0][0] > 0.0 && m.added_mass[0][0] > 0.0);
}

#[test]
fn body_hydro_json_round_trip() {
    let s = setup(0.0);
    let text = s.body.to_json();
    let back = BodyHydro::from_json("body.json", &text).unwrap();
    assert_eq!(&back, s.body.as_ref());
    let bad = text.replacen("\"order\": 6", "\"order\": 5", 1);
    assert!(BodyHydro::from_json("body.json", &bad).is_err());
}
