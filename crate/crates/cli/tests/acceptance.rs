//! End-to-end acceptance checks, one line per criterion. Runs without the
//! libtest harness so the lines are always printed.

use nalgebra::DVector;
use num_complex::Complex64;
use owc_core::control::{
    constraints, cylinder_device, design_wave, hydraulic_optimal_speed, lambda_max_hydraulic, optimize_rotation_speed, solve_penalized,
    stall_speed_newton, ControlOptions, Model, PenaltyConfig,
};
use owc_core::device::{hydraulic_power, small_body_point, HydroPoint, SimOptions};
use owc_core::layout::{desk_park, optimize_layout, sample_random_layout, DeskPark, LayoutDomain, OptimizerConfig, Point};
use owc_core::ode::{self, OdeOptions};
use owc_core::park::{
    ambient_incident_coefficients, basis_transformation, outgoing_field, park_power, reduce_to_devices, reduced_linear_power,
    regular_field, solve_park, timedomain_verify, ParkProblem,
};
use owc_core::synthetic;
use owc_core::turbine::{in_integral, power_series, PressureBound};
use owc_core::wave::{equivalent_monochromatic, monochromatic_flux, seastate_flux, Depth, PhysicalConstants, SeaState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::Instant;

type Check = Result<String, String>;

fn verdict(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn consts() -> PhysicalConstants {
    PhysicalConstants::default()
}

fn desk() -> DeskPark {
    let sea = SeaState::new(3.0, 8.0, 1.0).unwrap();
    desk_park(&sea, vec![], 0.0, 6, &consts()).unwrap()
}

fn adjoint_gradient(desk: &DeskPark) -> Check {
    let t = Instant::now();
    let m = &desk.model;
    let dom = LayoutDomain::triangle(50.0, 1.6).unwrap();
    let h = 1e-5;
    let (mut scaled, mut strict) = (0.0f64, 0.0f64);
    for nb in [2, 5, 8] {
        for seed in 0..3 {
            let x = sample_random_layout(&dom, nb, seed).map_err(|e| e.to_string())?;
            let cg = m.cost_and_gradient(&x).map_err(|e| e.to_string())?;
            let gmax = cg.gradient.iter().map(|g| g[0].abs().max(g[1].abs())).fold(0.0, f64::max);
            for l in 0..nb {
                for k in 0..2 {
                    let mut xp = x.clone();
                    xp[l][k] += h;
                    let mut xm = x.clone();
                    xm[l][k] -= h;
                    let fd = (m.power(&xm).unwrap().total - m.power(&xp).unwrap().total) / (2.0 * h);
                    let err = (fd - cg.gradient[l][k]).abs();
                    scaled = scaled.max(err / gmax);
                    strict = strict.max(err / cg.gradient[l][k].abs());
                }
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    verdict(
        scaled < 1e-6 && secs < 120.0,
        format!("max error / max|grad| = {scaled:.2e} (componentwise {strict:.2e}), {secs:.1} s"),
    )
}

fn graf_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let order = 10;
    let src = 2;
    let c = consts();
    let mut worst = 0.0f64;
    let mut worst_d = 0.0f64;
    for _ in 0..100 {
        let period: f64 = rng.gen_range(5.0..12.0);
        let k = (2.0 * PI / period).powi(2) / c.g;
        let from = [rng.gen_range(-30.0..30.0), rng.gen_range(-30.0..30.0)];
        let (dist, dir): (f64, f64) = (rng.gen_range(10.0..60.0), rng.gen_range(0.0..2.0 * PI));
        let to = [from[0] + dist * dir.cos(), from[1] + dist * dir.sin()];
        let gamma = DVector::from_fn(2 * src + 1, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let mut padded = DVector::zeros(2 * order + 1);
        padded.rows_mut(order - src, 2 * src + 1).copy_from(&gamma);
        let b = basis_transformation(from, to, k, order).map_err(|e| e.to_string())?;
        let a = b.t.transpose() * &padded;
        for _ in 0..50 {
            // within two device radii of the receiving centre
            let (r, th): (f64, f64) = (rng.gen_range(0.0..1.5), rng.gen_range(0.0..2.0 * PI));
            let p = [to[0] + r * th.cos(), to[1] + r * th.sin()];
            let direct = outgoing_field(&gamma, from, k, p);
            worst = worst.max((direct - regular_field(&a, to, k, p)).norm() / direct.norm());
        }
        let hstep = 1e-6 * dist;
        for (axis, analytic) in [(0, &b.dx_j), (1, &b.dy_j)] {
            let mut tp = to;
            tp[axis] += hstep;
            let mut tm = to;
            tm[axis] -= hstep;
            let fd = (basis_transformation(from, tp, k, order).unwrap().t - basis_transformation(from, tm, k, order).unwrap().t)
                / Complex64::new(2.0 * hstep, 0.0);
            worst_d = worst_d.max((fd - analytic).norm() / analytic.norm());
        }
    }
    verdict(
        worst < 1e-6 && worst_d < 1e-5,
        format!("field error {worst:.2e}, derivative error {worst_d:.2e} over 100 draws × 50 points"),
    )
}

fn single_body(desk: &DeskPark) -> Check {
    let m = &desk.model;
    let device = &desk.device;
    let pos = [7.0, -4.0];
    let problem = m.problem(&[pos]).map_err(|e| e.to_string())?;
    let st = solve_park(&problem).map_err(|e| e.to_string())?;
    let wave = m.wave;
    let hp = small_body_point(device.geometry.inflow_radius(), -device.geometry.z1, wave.omega, &consts());
    let phase = ambient_incident_coefficients(pos[0], pos[1], &wave, 0)[0] / Complex64::new(wave.height / 2.0, 0.0);
    let iso = device
        .linear_frequency_solve(&hp, device.turbine.lambda(m.omega_t), hp.pe * (wave.height / 2.0))
        .map_err(|e| e.to_string())?
        * phase;
    let rel = (st.zeta[0] - iso).norm() / iso.norm();
    // pile-aware model with no piles against a bare problem of the same bodies
    let x: Vec<Point> = vec![[0.0, 0.0], [6.0, 2.0], [-3.0, 9.0]];
    let aware = m.power(&x).map_err(|e| e.to_string())?;
    let bare = ParkProblem::new(x.clone(), vec![m.body.clone(); 3], vec![false; 3], wave).map_err(|e| e.to_string())?;
    let plain = park_power(&bare, &solve_park(&bare).map_err(|e| e.to_string())?, &m.p);
    verdict(
        rel < 1e-12 && aware.per_body == plain.per_body,
        format!(
            "isolated mismatch {rel:.2e}, pile-free identical: {}",
            aware.per_body == plain.per_body
        ),
    )
}

fn energy_conservation() -> Check {
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
    // kinetic plus potential energy of a constant-section column
    let energy = |z: f64, v: f64| 0.5 * c.rho * l * s * v * v + c.rho * c.g * l * s * (z - l * (1.0 + z / l).ln());
    let period = 2.0 * PI * (l / c.g).sqrt();
    let samples: Vec<f64> = (0..=500).map(|i| i as f64 * 50.0 * period / 500.0).collect();
    let e0 = energy(0.5, 0.0);
    let mut drift = 0.0f64;
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
    .map_err(|e| e.to_string())?;

    let hydro = synthetic::constant_section_hydro(&c).unwrap();
    let omega = 2.0 * PI / 8.0;
    let hp = hydro.at(omega).unwrap();
    let omega_t = 0.5 * (dev.turbine.spec.omega_min + dev.turbine.spec.omega_max) / 3.0;
    let pe = hp.pe * 0.0005;
    let sim = dev
        .integrate_nonlinear(&hp, pe, omega_t, &SimOptions::default())
        .map_err(|e| e.to_string())?;
    let lin = dev.linear_frequency_solve(&hp, dev.turbine.lambda(omega_t), pe).unwrap();
    let start = sim.series.len() - 1 - SimOptions::default().samples_per_period;
    let fund = sim.series.fundamental(&sim.series.zeta, start, omega);
    let amp = (fund.norm() - lin.norm()).abs() / lin.norm();
    verdict(
        drift < 1e-6 && amp < 1e-3,
        format!("energy drift {drift:.2e} over 50 periods, small-wave amplitude mismatch {amp:.2e}"),
    )
}

fn mean_power_series() -> Check {
    let c = consts();
    let dev = synthetic::constant_section_device(&c).unwrap();
    let t = &dev.turbine;
    let phi_max = t.curves.phi_max_model;
    let ratio = dev.s0() / t.s_t();
    let n = 4096;
    let mut worst = 0.0f64;
    for &omega_t in &[4.0, 8.0, 15.0, 30.0] {
        let p = t.mean_power_coefficients(omega_t, dev.s0());
        for frac in [0.1, 0.4, 0.7, 1.0] {
            // velocity amplitude ω|ζ̂| putting the peak flow coefficient at frac·φ_max
            let x = frac * phi_max * omega_t * t.spec.tip_radius / ratio;
            let quad = (0..n)
                .map(|i| {
                    let v_t = ratio * x * (2.0 * PI * i as f64 / n as f64).sin();
                    t.torque(v_t, omega_t) * omega_t
                })
                .sum::<f64>()
                / n as f64;
            let series = power_series(&p, x);
            worst = worst.max((series - quad).abs() / quad.abs());
        }
    }
    let mut worst_i = 0.0f64;
    for k in 0..=10 {
        let m = 64;
        let q = (0..m).map(|i| (2.0 * PI * i as f64 / m as f64).sin().powi(k)).sum::<f64>() / m as f64;
        worst_i = worst_i.max((q - in_integral(k as i64).unwrap()).abs());
    }
    verdict(
        worst < 1e-8 && worst_i < 1e-12,
        format!("series vs quadrature {worst:.2e}, I_n error {worst_i:.2e}"),
    )
}

fn control_structure() -> Check {
    let c = consts();
    let dev = synthetic::constant_section_device(&c).unwrap();
    let hydro = synthetic::constant_section_hydro(&c).unwrap();
    let sea = SeaState::new(3.0, 8.15, 1.0).unwrap();
    let wave = design_wave(&sea);
    let hp = hydro.at(wave.omega()).map_err(|e| e.to_string())?;
    let pe = hp.pe * wave.amplitude();
    let mech = optimize_rotation_speed(&dev, &hydro, &sea, Model::Linear, &ControlOptions::default()).map_err(|e| e.to_string())?;
    let w_hyd = hydraulic_optimal_speed(&dev, &hp);
    let lam = lambda_max_hydraulic(&dev, &hp);
    let (lo, hi) = (
        dev.turbine.lambda(dev.turbine.spec.omega_min),
        dev.turbine.lambda(dev.turbine.spec.omega_max),
    );
    let n = 10_000;
    let dl = (hi - lo) / (n - 1) as f64;
    let scan = (0..n)
        .map(|i| lo + i as f64 * dl)
        .max_by(|a, b| {
            let pa = hydraulic_power(dev.linear_frequency_solve(&hp, *a, pe).unwrap().norm(), hp.omega, *a, dev.s0());
            let pb = hydraulic_power(dev.linear_frequency_solve(&hp, *b, pe).unwrap().norm(), hp.omega, *b, dev.s0());
            pa.total_cmp(&pb)
        })
        .unwrap();
    verdict(
        mech.omega_t > w_hyd && (scan - lam).abs() <= dl,
        format!(
            "mechanical optimum {:.4} rad/s > hydraulic optimum {w_hyd:.4} rad/s; Λ scan {scan:.2} vs analytic {lam:.2} (grid {dl:.2})",
            mech.omega_t
        ),
    )
}

fn constraint_machinery() -> Check {
    let c = consts();
    let curves = synthetic::turbine_curves().unwrap();
    let cav = synthetic::cavitation_table().unwrap();
    let (r, d) = (0.75, 1.0);
    let dev = cylinder_device(r, d, 0.6, &curves, &cav, &c).map_err(|e| e.to_string())?;
    let wave = design_wave(&SeaState::new(3.0, 8.0, 1.0).unwrap());
    let hp = small_body_point(r, d, wave.omega(), &c);
    let pe = hp.pe * wave.amplitude();
    let stall = stall_speed_newton(&dev, &hp, pe).map_err(|e| e.to_string())?;
    let free = constraints(&dev, hp.omega, stall.zeta_abs, stall.omega_t);
    let hi = dev.turbine.spec.omega_max.max(stall.omega_t);
    let out = solve_penalized(&dev, &hp, pe, stall.omega_t, hi, &PenaltyConfig::default()).map_err(|e| e.to_string())?;

    let mut worst = 0.0f64;
    let mut interior = 0;
    for &(zeta, omega, omega_t) in &[
        (0.2, 0.8, 6.0),
        (0.6, 0.7, 4.0),
        (1.5, 0.9, 20.0),
        (0.05, 1.2, 40.0),
        (1.0, 0.5, 2.0),
        (0.3, 2.0, 10.0),
        (0.8, 1.6, 15.0),
    ] {
        let b = PressureBound::new(
            zeta,
            omega,
            omega_t,
            dev.geometry.z_t,
            &dev.turbine,
            dev.cavitation.cp_min_tilde,
            &c,
            dev.s0(),
        );
        let n = 100_000;
        let sampled = (0..n)
            .map(|i| b.at_phase(2.0 * PI * i as f64 / n as f64))
            .fold(f64::INFINITY, f64::min);
        worst = worst.max((b.minimum() - sampled).abs() / sampled.abs());
        interior += b.interior_minimum().is_some() as usize;
    }
    verdict(
        free.c1 > 0.0 && out.converged && out.max_violation < 1e-3 && worst < 1e-9 && interior > 0 && interior < 7,
        format!(
            "c1 at stall {:.3} m, penalty max violation {:.2e} after {} rounds; bound vs sampling {worst:.2e} ({interior} of 7 cases interior)",
            free.c1, out.max_violation, out.rounds
        ),
    )
}

struct DeskRun {
    best: Vec<Point>,
    optimized: Vec<Point>,
}

fn optimizer_behavior(desk: &DeskPark) -> (Check, Option<DeskRun>) {
    let t = Instant::now();
    let m = &desk.model;
    let dom = LayoutDomain::triangle(50.0, 1.6).unwrap();
    let randoms: Vec<(Vec<Point>, f64)> = (0..10)
        .map(|s| {
            let x = sample_random_layout(&dom, 20, s).unwrap();
            let p = m.power(&x).unwrap().total;
            (x, p)
        })
        .collect();
    let best = randoms.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    let lo = randoms.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let spread = best.1 - lo;
    let opt = match optimize_layout(&best.0, m, &dom, &OptimizerConfig::default()) {
        Ok(o) => o,
        Err(e) => return (Err(e.to_string()), None),
    };
    let costs = opt.trace.accepted_costs();
    let monotone = costs.windows(2).all(|w| w[1] <= w[0]);
    let admissible = opt.trace.layouts.iter().all(|l| dom.admissible(l, 1e-9));
    let gain = opt.power.total - best.1;
    let secs = t.elapsed().as_secs_f64();
    let check = verdict(
        monotone && admissible && gain > spread && secs < 600.0,
        format!(
            "optimized {:.1} W vs best random {:.1} W: gain {gain:.1} W > spread {spread:.1} W; monotone {monotone}, admissible {admissible}, {} iterations ({:?}), {secs:.1} s",
            opt.power.total,
            best.1,
            opt.trace.rows.len(),
            opt.trace.stop
        ),
    );
    (
        check,
        Some(DeskRun {
            best: best.0.clone(),
            optimized: opt.positions,
        }),
    )
}

fn park_verification(desk: &DeskPark, run: &DeskRun) -> Check {
    let m = &desk.model;
    let eval = |x: &[Point]| -> Result<(f64, f64), String> {
        let red = reduce_to_devices(&m.problem(x).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let lin = reduced_linear_power(&desk.device, &red, m.omega_t).map_err(|e| e.to_string())?;
        let nl = timedomain_verify(&desk.device, &red, m.omega_t, 8.0, 1e-8).map_err(|e| e.to_string())?;
        Ok((lin.total, nl.total))
    };
    let (bl, bn) = eval(&run.best)?;
    let (ol, on) = eval(&run.optimized)?;
    let ratio_best = bn / bl;
    let ratio_opt = on / ol;
    let same_sign = (ol - bl).signum() == (on - bn).signum();
    let in_band = |r: f64| (0.8..=1.2).contains(&r);
    verdict(
        in_band(ratio_best) && in_band(ratio_opt) && same_sign,
        format!(
            "nonlinear/linear {ratio_best:.3} (best random), {ratio_opt:.3} (optimized); gains {:.1} W linear, {:.1} W nonlinear",
            ol - bl,
            on - bn
        ),
    )
}

fn sea_state_equivalence() -> Check {
    let c = consts();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    let mut worst_j = 0.0f64;
    for _ in 0..100 {
        let s = SeaState::new(rng.gen_range(0.25..8.0), rng.gen_range(3.0..16.0), 0.01).unwrap();
        let w = equivalent_monochromatic(&s, 0.0, Depth::Deep);
        let js = seastate_flux(&s, &c);
        worst = worst.max((monochromatic_flux(&w, &c) - js).abs() / js);
        // energy density times deep-water group velocity
        let e = c.rho * c.g * s.hs * s.hs / 16.0;
        let cg = c.g * s.te / (4.0 * PI);
        worst_j = worst_j.max((e * cg - js).abs() / js);
        let jm = monochromatic_flux(&w, &c);
        let em = c.rho * c.g * w.height * w.height / 8.0;
        worst_j = worst_j.max((em * c.g * w.period / (4.0 * PI) - jm).abs() / jm);
    }
    verdict(
        worst < 1e-14 && worst_j < 1e-14,
        format!("flux mismatch {worst:.2e}, formula mismatch {worst_j:.2e} over 100 cells"),
    )
}

fn determinism() -> Check {
    use std::process::Command;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = "[park]\nedge = 30.0\n\n[park_opt]\ndevices = 5\nrandoms = 4\n\n[park_opt.optimizer]\nmaxit = 10\n";
    std::fs::write(dir.path().join("run.toml"), cfg).map_err(|e| e.to_string())?;
    for out in ["a", "b"] {
        let o = Command::new(env!("CARGO_BIN_EXE_owc"))
            .args(["park-opt", "--config", "run.toml", "--out", out, "--seed", "3,8"])
            .current_dir(dir.path())
            .output()
            .map_err(|e| e.to_string())?;
        if !o.status.success() {
            return Err(String::from_utf8_lossy(&o.stderr).into_owned());
        }
    }
    let mut same = 0;
    let mut differ = Vec::new();
    for seed in ["seed_3", "seed_8"] {
        for f in ["layout_worst.json", "layout_best.json", "layout_optimized.json", "trace.csv"] {
            let a = std::fs::read(dir.path().join("a").join(seed).join(f)).map_err(|e| e.to_string())?;
            let b = std::fs::read(dir.path().join("b").join(seed).join(f)).map_err(|e| e.to_string())?;
            if a == b {
                same += 1;
            } else {
                differ.push(format!("{seed}/{f}"));
            }
        }
    }
    verdict(
        differ.is_empty(),
        format!("{same} of 8 layout/trace files byte-identical across two runs {differ:?}"),
    )
}

fn main() {
    let desk = desk();
    let mut results: Vec<(u32, &str, Check)> = vec![
        (1, "adjoint gradient", adjoint_gradient(&desk)),
        (2, "Graf identity", graf_identity()),
        (3, "single-body embedding", single_body(&desk)),
        (4, "energy conservation", energy_conservation()),
        (5, "mean-power series", mean_power_series()),
        (6, "control optimum structure", control_structure()),
        (7, "constraint machinery", constraint_machinery()),
    ];
    let (c8, run) = optimizer_behavior(&desk);
    results.push((8, "optimizer behavior", c8));
    let c9 = match &run {
        Some(r) => park_verification(&desk, r),
        None => Err("no optimized layout".into()),
    };
    results.push((9, "linear vs nonlinear park", c9));
    results.push((10, "sea-state equivalence", sea_state_equivalence()));
    results.push((11, "determinism", determinism()));

    let mut failed = 0;
    for (n, name, r) in &results {
        match r {
            Ok(d) => println!("criterion {n:>2} PASS  {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {d}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
