use crate::config::{DomainKind, Preset, RunConfig};
use owc_core::control::{
    annual_power, build_power_matrix, dimension_sweep, optimize_rotation_speed, sweep_to_csv, ControlOptions, Model, PowerMatrix,
    SweepVariant,
};
use owc_core::device::{Device, DuctGeometry, DuctProfile, HydroCoefficients, SimOptions, TIME_SERIES_HEADER};
use owc_core::layout::{
    desk_park, optimize_layout, sample_random_layout, truncated_equilateral, DeskPark, LayoutDomain, OptimizerTrace, Point, StopReason,
    TraceRow,
};
use owc_core::park::{reduce_to_devices, reduced_linear_power, timedomain_verify};
use owc_core::synthetic;
use owc_core::table::read_to_string;
use owc_core::turbine::{CavitationTable, CharacteristicCurves, WellsTurbine, FIT_TOLERANCE};
use owc_core::wave::{PhysicalConstants, ScatterDiagram, SeaState};
use owc_core::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Effective inputs of one run, after command-line overrides.
pub struct Run {
    pub config: RunConfig,
    pub out: PathBuf,
    pub model: Model,
    pub seeds: Vec<u64>,
}

pub fn write(out: &Path, name: &str, text: &str) -> Result<()> {
    let path = out.join(name);
    std::fs::write(&path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}

fn csv_row(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(",")
}

struct DeviceData {
    device: Device,
    hydro: HydroCoefficients,
}

fn load_device(run: &Run, consts: &PhysicalConstants) -> Result<DeviceData> {
    let cfg = &run.config.device;
    let curves = match &cfg.turbine_curves {
        Some(p) => CharacteristicCurves::from_csv(&p.display().to_string(), &read_to_string(p)?, FIT_TOLERANCE)?,
        None => synthetic::turbine_curves()?,
    };
    let cavitation = match &cfg.cavitation {
        Some(p) => CavitationTable::from_csv(&p.display().to_string(), &read_to_string(p)?)?,
        None => synthetic::cavitation_table()?,
    };
    let (spec, profile) = match cfg.preset {
        Preset::Constant => (synthetic::constant_section_turbine_spec(), synthetic::constant_section_profile()),
        Preset::Reference => (synthetic::reference_turbine_spec(), DuctProfile::reference()),
    };
    let turbine = WellsTurbine::new(spec, curves, consts.rho)?;
    let device = Device::new(DuctGeometry::new(profile)?, turbine, cavitation, *consts)?;
    let hydro = match &cfg.hydro {
        Some(p) => HydroCoefficients::from_csv(&p.display().to_string(), &read_to_string(p)?)?,
        None => match cfg.preset {
            Preset::Constant => synthetic::constant_section_hydro(consts)?,
            Preset::Reference => synthetic::reference_hydro(consts)?,
        },
    };
    Ok(DeviceData { device, hydro })
}

fn load_scatter(path: &Option<PathBuf>) -> Result<ScatterDiagram> {
    match path {
        Some(p) => ScatterDiagram::from_csv(&p.display().to_string(), &read_to_string(p)?),
        None => synthetic::scatter_diagram(),
    }
}

#[derive(Serialize)]
struct DeviceSimSummary {
    hs: f64,
    te: f64,
    omega_t: f64,
    omega_t_optimized: bool,
    mean_power: f64,
    mean_hydraulic_power: f64,
    zeta_min: f64,
    zeta_max: f64,
    p_min: f64,
    phi_max: f64,
    flags: String,
    power_maxima_per_period: f64,
}

pub fn device_sim(run: &Run) -> Result<()> {
    let consts = run.config.constants.resolve()?;
    let data = load_device(run, &consts)?;
    let cfg = &run.config.device_sim;
    let sea = SeaState::new(cfg.hs, cfg.te, 0.0)?;
    let sim = SimOptions {
        periods: cfg.periods,
        samples_per_period: cfg.samples_per_period,
        rtol: cfg.rtol,
        ..SimOptions::default()
    };
    let (omega_t, optimized) = match cfg.omega_t {
        Some(w) => (w, false),
        None => {
            let opts = ControlOptions {
                sim,
                ..ControlOptions::default()
            };
            (
                optimize_rotation_speed(&data.device, &data.hydro, &sea, run.model, &opts)?.omega_t,
                true,
            )
        }
    };
    let wave = owc_core::control::design_wave(&sea);
    let hp = data.hydro.at(wave.omega())?;
    let result = data.device.integrate_nonlinear(&hp, hp.pe * wave.amplitude(), omega_t, &sim)?;
    let s = &result.series;
    let mut text = TIME_SERIES_HEADER.join(",");
    text.push('\n');
    for i in 0..s.len() {
        text.push_str(&csv_row(&s.row(i)));
        text.push('\n');
    }
    write(&run.out, "timeseries.csv", &text)?;
    let w0 = result.summary.window_start;
    let p = &s.power[w0..];
    let maxima = (1..p.len().saturating_sub(1))
        .filter(|&i| p[i] > p[i - 1] && p[i] >= p[i + 1])
        .count();
    let periods = (s.t[s.len() - 1] - s.t[w0]) / wave.period;
    let sm = &result.summary;
    let summary = DeviceSimSummary {
        hs: cfg.hs,
        te: cfg.te,
        omega_t,
        omega_t_optimized: optimized,
        mean_power: sm.mean_power,
        mean_hydraulic_power: sm.mean_hydraulic_power,
        zeta_min: sm.zeta_min,
        zeta_max: sm.zeta_max,
        p_min: sm.p_min,
        phi_max: sm.phi_max,
        flags: sm.flags.to_string(),
        power_maxima_per_period: maxima as f64 / periods,
    };
    write(&run.out, "summary.json", &json(&summary))
}

fn heatmap_csv(m: &PowerMatrix) -> String {
    let mut s = String::from("Hs");
    for t in &m.te {
        write!(s, ",{t:?}").unwrap();
    }
    s.push('\n');
    for (i, h) in m.hs.iter().enumerate() {
        write!(s, "{h:?}").unwrap();
        for j in 0..m.te.len() {
            write!(s, ",{:?}", m.cell(i, j).power).unwrap();
        }
        s.push('\n');
    }
    s
}

#[derive(Serialize)]
struct MatrixSummary {
    model: String,
    annual_power: Option<f64>,
    failed_cells: usize,
}

pub fn power_matrix(run: &Run, explicit_model: bool) -> Result<()> {
    let consts = run.config.constants.resolve()?;
    let data = load_device(run, &consts)?;
    let cfg = &run.config.power_matrix;
    let models: Vec<Model> = if explicit_model {
        vec![run.model]
    } else {
        cfg.models.iter().map(|m| m.parse()).collect::<Result<_>>()?
    };
    if models.is_empty() {
        return Err(Error::Config("power_matrix.models is empty".into()));
    }
    let scatter = cfg.scatter.as_ref().map(|_| load_scatter(&cfg.scatter)).transpose()?;
    let opts = ControlOptions {
        rel_tol: cfg.rel_tol,
        ..ControlOptions::default()
    };
    let mut summaries = Vec::new();
    for model in models {
        let m = build_power_matrix(&cfg.hs, &cfg.te, &data.device, &data.hydro, model, &opts)?;
        write(&run.out, &format!("power_matrix_{model}.csv"), &m.to_csv())?;
        write(&run.out, &format!("heatmap_{model}.csv"), &heatmap_csv(&m))?;
        let annual = match &scatter {
            Some(s) => Some(annual_power(&m, s)?),
            None => None,
        };
        summaries.push(MatrixSummary {
            model: model.to_string(),
            annual_power: annual,
            failed_cells: m.cells.iter().filter(|c| c.flags.numerical_failure).count(),
        });
    }
    write(&run.out, "summary.json", &json(&summaries))
}

pub fn dim_sweep(run: &Run) -> Result<()> {
    let consts = run.config.constants.resolve()?;
    let cfg = &run.config.dim_sweep;
    let curves = match &run.config.device.turbine_curves {
        Some(p) => CharacteristicCurves::from_csv(&p.display().to_string(), &read_to_string(p)?, FIT_TOLERANCE)?,
        None => synthetic::turbine_curves()?,
    };
    let cavitation = match &run.config.device.cavitation {
        Some(p) => CavitationTable::from_csv(&p.display().to_string(), &read_to_string(p)?)?,
        None => synthetic::cavitation_table()?,
    };
    let scatter = load_scatter(&cfg.scatter)?;
    let study = cfg.study();
    study.validate()?;
    for variant in [SweepVariant::Unconstrained, SweepVariant::Constrained] {
        let pts = dimension_sweep(&study, &scatter, &curves, &cavitation, &consts, variant)?;
        let name = match variant {
            SweepVariant::Unconstrained => "sweep_unconstrained.csv",
            SweepVariant::Constrained => "sweep_constrained.csv",
        };
        write(&run.out, name, &sweep_to_csv(&pts))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Device,
    Pile,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Site {
    pub x: f64,
    pub y: f64,
    pub kind: Kind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub step: f64,
    pub stop: StopReason,
    pub rows: Vec<TraceRow>,
}

/// Layout file: positions of devices and piles plus powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutFile {
    pub seed: u64,
    pub label: String,
    pub domain: Option<LayoutDomain>,
    pub positions: Vec<Site>,
    pub per_device_power: Vec<f64>,
    pub total_power: f64,
    pub trace: Option<TraceSummary>,
}

impl LayoutFile {
    fn devices(&self) -> Vec<Point> {
        self.positions
            .iter()
            .filter(|s| s.kind == Kind::Device)
            .map(|s| [s.x, s.y])
            .collect()
    }

    fn piles(&self) -> Vec<Point> {
        self.positions.iter().filter(|s| s.kind == Kind::Pile).map(|s| [s.x, s.y]).collect()
    }

    fn load(path: &Path) -> Result<Self> {
        let text = read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e.line(), e.to_string()))
    }
}

fn park_domain(run: &Run, device_radius: f64) -> Result<LayoutDomain> {
    let p = &run.config.park;
    match p.domain {
        DomainKind::Triangle => LayoutDomain::triangle(p.edge, p.d_min),
        DomainKind::Truncated => truncated_equilateral(p.edge, p.pile_radius, device_radius, p.d_min),
    }
}

fn park_model(run: &Run, piles: Vec<Point>, consts: &PhysicalConstants) -> Result<DeskPark> {
    let p = &run.config.park;
    let sea = SeaState::new(p.hs, p.te, 0.0)?;
    desk_park(&sea, piles, p.pile_radius, p.order, consts)
}

fn sites(devices: &[Point], piles: &[Point]) -> Vec<Site> {
    devices
        .iter()
        .map(|p| Site {
            x: p[0],
            y: p[1],
            kind: Kind::Device,
        })
        .chain(piles.iter().map(|p| Site {
            x: p[0],
            y: p[1],
            kind: Kind::Pile,
        }))
        .collect()
}

fn histogram_csv(sets: &[(&str, &[f64])], bins: usize) -> String {
    let all = sets.iter().flat_map(|s| s.1.iter().copied());
    let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![vec![0usize; bins]; sets.len()];
    for (k, (_, vals)) in sets.iter().enumerate() {
        for &v in vals.iter() {
            let b = (((v - lo) / width) as usize).min(bins - 1);
            counts[k][b] += 1;
        }
    }
    let mut s = String::from("bin_lo,bin_hi");
    for (name, _) in sets {
        write!(s, ",{name}").unwrap();
    }
    s.push('\n');
    for b in 0..bins {
        let edge_hi = if b + 1 == bins { hi } else { lo + (b + 1) as f64 * width };
        write!(s, "{:?},{:?}", lo + b as f64 * width, edge_hi).unwrap();
        for c in &counts {
            write!(s, ",{}", c[b]).unwrap();
        }
        s.push('\n');
    }
    s
}

/// Seed of the `i`-th random layout of run seed `seed`.
fn sample_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(i as u64)
}

pub fn park_opt(run: &Run) -> Result<()> {
    let consts = run.config.constants.resolve()?;
    let cfg = &run.config.park_opt;
    cfg.optimizer.validate()?;
    if cfg.devices == 0 || cfg.randoms == 0 || cfg.histogram_bins == 0 {
        return Err(Error::Config(
            "park_opt needs at least one device, one random layout and one bin".into(),
        ));
    }
    let device_radius = synthetic::CONSTANT_SECTION_RADIUS;
    let domain = park_domain(run, device_radius)?;
    let piles = domain.meta.piles.clone();
    let desk = park_model(run, piles.clone(), &consts)?;
    let model = &desk.model;
    let mut rows = String::from("seed,sample,sample_seed,total_power\n");
    for &seed in &run.seeds {
        let randoms: Vec<(u64, Vec<Point>, Vec<f64>, f64)> = (0..cfg.randoms)
            .into_par_iter()
            .map(|i| {
                let s = sample_seed(seed, i);
                let x = sample_random_layout(&domain, cfg.devices, s)?;
                let p = model.power(&x)?;
                Ok((s, x, p.per_body, p.total))
            })
            .collect::<Result<_>>()?;
        for (i, r) in randoms.iter().enumerate() {
            writeln!(rows, "{seed},{i},{},{:?}", r.0, r.3).unwrap();
        }
        let by_power = |a: &&(u64, Vec<Point>, Vec<f64>, f64), b: &&(u64, Vec<Point>, Vec<f64>, f64)| a.3.total_cmp(&b.3);
        let best = randoms.iter().max_by(by_power).expect("randoms non-empty");
        let worst = randoms.iter().min_by(by_power).expect("randoms non-empty");
        let opt = optimize_layout(&best.1, model, &domain, &cfg.optimizer)?;
        let dir = run.out.join(format!("seed_{seed}"));
        std::fs::create_dir_all(&dir).map_err(|source| Error::Io {
            path: dir.display().to_string(),
            source,
        })?;
        let file = |label: &str, x: &[Point], per: &[f64], total: f64, trace: Option<&OptimizerTrace>| LayoutFile {
            seed,
            label: label.into(),
            domain: Some(domain.clone()),
            positions: sites(x, &piles),
            per_device_power: per.to_vec(),
            total_power: total,
            trace: trace.map(|t| TraceSummary {
                step: t.step,
                stop: t.stop,
                rows: t.rows.clone(),
            }),
        };
        write(&dir, "layout_worst.json", &json(&file("worst", &worst.1, &worst.2, worst.3, None)))?;
        write(&dir, "layout_best.json", &json(&file("best", &best.1, &best.2, best.3, None)))?;
        write(
            &dir,
            "layout_optimized.json",
            &json(&file(
                "optimized",
                &opt.positions,
                &opt.power.per_body,
                opt.power.total,
                Some(&opt.trace),
            )),
        )?;
        write(&dir, "trace.csv", &opt.trace.to_csv())?;
        let hist = histogram_csv(
            &[("worst", &worst.2), ("best", &best.2), ("optimized", &opt.power.per_body)],
            cfg.histogram_bins,
        );
        write(&dir, "histogram.csv", &hist)?;
        log::info!(
            "seed {seed}: best random {:.1} W, optimized {:.1} W ({:?})",
            best.3,
            opt.power.total,
            opt.trace.stop
        );
    }
    write(&run.out, "random_powers.csv", &rows)
}

pub const VERIFY_HEADER: &str = "layout,devices,linear_power,nonlinear_power,ratio,linear_gain,nonlinear_gain";

pub fn park_verify(run: &Run) -> Result<()> {
    let consts = run.config.constants.resolve()?;
    let cfg = &run.config.park_verify;
    let mut text = String::from(VERIFY_HEADER);
    text.push('\n');
    if cfg.layouts.is_empty() {
        return write(&run.out, "park_verify.csv", &text);
    }
    let evaluate = |path: &Path| -> Result<(usize, f64, f64)> {
        let layout = LayoutFile::load(path)?;
        let devices = layout.devices();
        if devices.is_empty() {
            return Err(Error::Config(format!("{} has no devices", path.display())));
        }
        let desk = park_model(run, layout.piles(), &consts)?;
        let reduced = reduce_to_devices(&desk.model.problem(&devices)?)?;
        let lin = reduced_linear_power(&desk.device, &reduced, desk.model.omega_t)?;
        let nl = timedomain_verify(&desk.device, &reduced, desk.model.omega_t, cfg.periods, cfg.rtol)?;
        Ok((devices.len(), lin.total, nl.total))
    };
    let baseline = cfg.baseline.as_deref().map(evaluate).transpose()?;
    let results: Vec<(usize, f64, f64)> = cfg.layouts.par_iter().map(|p| evaluate(p)).collect::<Result<_>>()?;
    for (path, (n, lin, nl)) in cfg.layouts.iter().zip(results) {
        let (gl, gn) = match baseline {
            Some((_, bl, bn)) => (lin - bl, nl - bn),
            None => (f64::NAN, f64::NAN),
        };
        let name = path.display().to_string().replace(',', "_");
        writeln!(text, "{name},{n},{lin:?},{nl:?},{:?},{gl:?},{gn:?}", nl / lin).unwrap();
    }
    write(&run.out, "park_verify.csv", &text)
}
