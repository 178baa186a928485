//! Adjoint gradient of the park power, convex-domain projection and the
//! projected-gradient layout optimizer with non-overlap backtracking.

use crate::control::{optimize_rotation_speed, ControlOptions, Model};
use crate::device::{small_body_point, Device};
use crate::error::{Error, Result};
use crate::park::{
    ambient_incident_coefficients, assemble_block_system, dense_solve, park_power, solve_system, toeplitz_entries, BodyHydro, ParkPower,
    ParkProblem, ParkState, ParkWave,
};
use crate::synthetic;
use crate::wave::{equivalent_monochromatic, Depth, PhysicalConstants, SeaState};
use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

pub type Point = [f64; 2];

/// Tolerance (m) for treating a point as inside the polygon.
const INSIDE_TOL: f64 = 1e-12;
/// Slack on the pairwise distance test.
pub const OVERLAP_SLACK: f64 = 1e-12;
/// Cap on backtracking reductions of one iteration.
pub const MAX_HALVINGS: usize = 60;

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainMeta {
    pub triangle_edge: Option<f64>,
    pub piles: Vec<Point>,
    pub pile_radius: f64,
    pub device_radius: f64,
}

/// Convex polygon (counter-clockwise) with a minimum centre distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutDomain {
    pub vertices: Vec<Point>,
    pub d_min: f64,
    pub meta: DomainMeta,
}

impl LayoutDomain {
    pub fn new(mut vertices: Vec<Point>, d_min: f64, meta: DomainMeta) -> Result<Self> {
        if !(d_min > 0.0) {
            return Err(Error::domain("minimum distance must be positive"));
        }
        let scale = vertices.iter().map(|v| v[0].abs().max(v[1].abs())).fold(1.0, f64::max);
        // Drop repeated vertices left by clipping.
        vertices.dedup_by(|a, b| dist(*a, *b) <= 1e-12 * scale);
        if vertices.len() > 1 && dist(vertices[0], *vertices.last().unwrap()) <= 1e-12 * scale {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(Error::domain("polygon needs at least three distinct vertices"));
        }
        let area2: f64 = (0..vertices.len())
            .map(|i| cross(vertices[i], vertices[(i + 1) % vertices.len()]))
            .sum();
        if area2.abs() <= 1e-12 * scale * scale {
            return Err(Error::domain("degenerate polygon"));
        }
        if area2 < 0.0 {
            vertices.reverse();
        }
        let n = vertices.len();
        for i in 0..n {
            let e1 = sub(vertices[(i + 1) % n], vertices[i]);
            let e2 = sub(vertices[(i + 2) % n], vertices[(i + 1) % n]);
            if cross(e1, e2) < -1e-12 * scale * scale {
                return Err(Error::domain("polygon is not convex"));
            }
        }
        Ok(Self { vertices, d_min, meta })
    }

    /// Equilateral triangle of side `edge` centred on the origin, one side
    /// facing the negative x direction.
    pub fn triangle(edge: f64, d_min: f64) -> Result<Self> {
        let v = triangle_vertices(edge)?;
        Self::new(
            v.to_vec(),
            d_min,
            DomainMeta {
                triangle_edge: Some(edge),
                piles: Vec::new(),
                pile_radius: 0.0,
                device_radius: 0.0,
            },
        )
    }

    fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Largest distance outside any edge line (≤ 0 inside).
    pub fn violation(&self, p: Point) -> f64 {
        self.edges()
            .map(|(a, b)| {
                let e = sub(b, a);
                -cross(e, sub(p, a)) / e[0].hypot(e[1])
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, p: Point, tol: f64) -> bool {
        self.violation(p) <= tol
    }

    /// Euclidean projection: foot of the perpendicular on a violated edge if
    /// it lies on the polygon, else the nearest vertex.
    pub fn project(&self, p: Point) -> Point {
        if self.contains(p, INSIDE_TOL) {
            return p;
        }
        for (a, b) in self.edges() {
            let e = sub(b, a);
            if cross(e, sub(p, a)) >= 0.0 {
                continue;
            }
            let t = dot(sub(p, a), e) / dot(e, e);
            if (0.0..=1.0).contains(&t) {
                let foot = [a[0] + t * e[0], a[1] + t * e[1]];
                if self.contains(foot, INSIDE_TOL) {
                    return foot;
                }
            }
        }
        *self
            .vertices
            .iter()
            .min_by(|a, b| dist(**a, p).total_cmp(&dist(**b, p)))
            .expect("polygon has vertices")
    }

    pub fn project_all(&self, pts: &[Point]) -> Vec<Point> {
        pts.iter().map(|&p| self.project(p)).collect()
    }

    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        0.5 * (0..n).map(|i| cross(self.vertices[i], self.vertices[(i + 1) % n])).sum::<f64>()
    }

    pub fn centroid(&self) -> Point {
        let n = self.vertices.len();
        let mut c = [0.0, 0.0];
        for i in 0..n {
            let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
            let w = cross(a, b);
            c[0] += (a[0] + b[0]) * w;
            c[1] += (a[1] + b[1]) * w;
        }
        let s = 6.0 * self.area();
        [c[0] / s, c[1] / s]
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }

    /// Inside the polygon (to `tol`) and pairwise separated by `d_min − tol`.
    pub fn admissible(&self, pts: &[Point], tol: f64) -> bool {
        pts.iter().all(|&p| self.contains(p, tol)) && min_pair_distance(pts) >= self.d_min - tol
    }
}

pub fn min_pair_distance(pts: &[Point]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            m = m.min(dist(pts[i], pts[j]));
        }
    }
    m
}

fn triangle_vertices(edge: f64) -> Result<[Point; 3]> {
    if !(edge > 0.0) {
        return Err(Error::domain("triangle edge must be positive"));
    }
    let r = edge / 3f64.sqrt();
    Ok([[r, 0.0], [-0.5 * r, 0.5 * edge], [-0.5 * r, -0.5 * edge]])
}

/// Clips a convex polygon to the half-plane `n·x ≤ c`.
fn clip(poly: &[Point], n: Point, c: f64) -> Vec<Point> {
    let mut out = Vec::new();
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        let (fa, fb) = (dot(n, a) - c, dot(n, b) - c);
        if fa <= 0.0 {
            out.push(a);
        }
        if (fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0) {
            let t = fa / (fa - fb);
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

/// Triangle with piles at its corners: sides moved inward by the device
/// radius, corners cut by the tangents to the pile clearance circles.
pub fn build_truncated_triangle(piles: [Point; 3], pile_radius: f64, device_radius: f64, d_min: f64) -> Result<LayoutDomain> {
    if pile_radius < 0.0 || device_radius < 0.0 {
        return Err(Error::domain("radii must be non-negative"));
    }
    let tri = LayoutDomain::new(
        piles.to_vec(),
        d_min,
        DomainMeta {
            triangle_edge: None,
            piles: piles.to_vec(),
            pile_radius,
            device_radius,
        },
    )?;
    let centre = tri.centroid();
    let mut poly = tri.vertices.clone();
    for (a, b) in tri.edges() {
        let e = sub(b, a);
        let len = e[0].hypot(e[1]);
        // Outward normal of a counter-clockwise edge.
        let n = [e[1] / len, -e[0] / len];
        poly = clip(&poly, n, dot(n, a) - device_radius);
    }
    let clearance = pile_radius + device_radius;
    for &p in &piles {
        let u = sub(centre, p);
        let l = u[0].hypot(u[1]);
        let u = [u[0] / l, u[1] / l];
        poly = clip(&poly, [-u[0], -u[1]], -dot(u, p) - clearance);
    }
    if poly.len() < 3 {
        return Err(Error::domain("device too large for the truncated triangle"));
    }
    let edge = dist(piles[0], piles[1]);
    let equilateral = (dist(piles[1], piles[2]) - edge).abs() < 1e-9 * edge && (dist(piles[2], piles[0]) - edge).abs() < 1e-9 * edge;
    LayoutDomain::new(
        poly,
        d_min,
        DomainMeta {
            triangle_edge: equilateral.then_some(edge),
            piles: piles.to_vec(),
            pile_radius,
            device_radius,
        },
    )
    .map_err(|_| Error::domain("device too large for the truncated triangle"))
}

/// Windfloat-like domain: equilateral triangle with a pile at every corner.
pub fn truncated_equilateral(edge: f64, pile_radius: f64, device_radius: f64, d_min: f64) -> Result<LayoutDomain> {
    build_truncated_triangle(triangle_vertices(edge)?, pile_radius, device_radius, d_min)
}

const MAX_SAMPLE_ATTEMPTS: usize = 1_000_000;

/// Rejection sampling, uniform in the polygon, with the minimum distance.
pub fn sample_random_layout(domain: &LayoutDomain, n: usize, seed: u64) -> Result<Vec<Point>> {
    let disc = std::f64::consts::PI * 0.25 * domain.d_min * domain.d_min;
    if n as f64 * disc > 0.5 * domain.area() {
        return Err(Error::domain(format!(
            "{n} devices with d_min {} do not fit the domain",
            domain.d_min
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = domain.bounding_box();
    let mut pts: Vec<Point> = Vec::with_capacity(n);
    let mut attempts = 0;
    while pts.len() < n {
        attempts += 1;
        if attempts > MAX_SAMPLE_ATTEMPTS {
            return Err(Error::numerical(format!(
                "random layout sampling gave up after {MAX_SAMPLE_ATTEMPTS} attempts"
            )));
        }
        let p = [rng.gen_range(lo[0]..hi[0]), rng.gen_range(lo[1]..hi[1])];
        if domain.contains(p, 0.0) && pts.iter().all(|&q| dist(p, q) >= domain.d_min) {
            pts.push(p);
        }
    }
    Ok(pts)
}

/// Park with movable identical devices and fixed piles.
#[derive(Debug, Clone)]
pub struct ParkModel {
    pub body: Arc<BodyHydro>,
    pub piles: Vec<Point>,
    pub pile_body: Option<Arc<BodyHydro>>,
    pub wave: ParkWave,
    /// Mean-power coefficients `p_n`.
    pub p: Vec<f64>,
    pub omega_t: f64,
}

impl ParkModel {
    pub fn problem(&self, devices: &[Point]) -> Result<ParkProblem> {
        let mut positions = devices.to_vec();
        let mut bodies = vec![self.body.clone(); devices.len()];
        let mut is_pile = vec![false; devices.len()];
        if !self.piles.is_empty() {
            let pb = self
                .pile_body
                .as_ref()
                .ok_or_else(|| Error::domain("piles given without pile hydrodynamics"))?;
            positions.extend_from_slice(&self.piles);
            bodies.extend(std::iter::repeat_n(pb.clone(), self.piles.len()));
            is_pile.extend(std::iter::repeat_n(true, self.piles.len()));
        }
        ParkProblem::new(positions, bodies, is_pile, self.wave)
    }

    pub fn power(&self, devices: &[Point]) -> Result<ParkPower> {
        let problem = self.problem(devices)?;
        let state = crate::park::solve_park(&problem)?;
        let mut pw = park_power(&problem, &state, &self.p);
        pw.per_body.truncate(devices.len());
        Ok(pw)
    }

    /// Cost `J = −P` and its gradient with respect to the device centres.
    pub fn cost_and_gradient(&self, devices: &[Point]) -> Result<CostGradient> {
        let problem = self.problem(devices)?;
        let system = assemble_block_system(&problem)?;
        let state = solve_system(&problem, &system)?;
        let mut power = park_power(&problem, &state, &self.p);
        power.per_body.truncate(devices.len());
        let adj = adjoint_solve(&problem, &system.matrix, &state, &self.p)?;
        let mut grad = gradient(&problem, &state, &adj)?;
        grad.truncate(devices.len());
        Ok(CostGradient {
            cost: -power.total,
            gradient: grad,
            power,
        })
    }
}

#[derive(Debug, Clone)]
pub struct CostGradient {
    pub cost: f64,
    pub gradient: Vec<Point>,
    pub power: ParkPower,
}

/// Solves `Mᴴ λ = [0; h̃₂]` with `h̃₂,ℓ = Σ 2n p_n ω^{2n} |ζ̂_ℓ|^{2n−2} ζ̂_ℓ`
/// on the devices and zero on piles.
pub fn adjoint_solve(
    problem: &ParkProblem,
    matrix: &nalgebra::DMatrix<Complex64>,
    state: &ParkState,
    p: &[f64],
) -> Result<DVector<Complex64>> {
    let n = problem.unknowns();
    let nm = problem.modes();
    let w2 = problem.wave.omega.powi(2);
    let mut rhs = DVector::zeros(n);
    for j in problem.devices() {
        let z = state.zeta[j];
        let s = z.norm_sqr();
        let mut g1 = 0.0;
        let mut sp = 1.0;
        let mut wn = w2;
        for (k, &pk) in p.iter().enumerate().skip(1) {
            g1 += k as f64 * pk * wn * sp;
            sp *= s;
            wn *= w2;
        }
        rhs[problem.len() * nm + j] = z * (2.0 * g1);
    }
    if rhs.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
        return Ok(rhs);
    }
    let (lambda, _) = dense_solve(&matrix.adjoint(), &rhs, "adjoint solve")?;
    Ok(lambda)
}

/// `∂J/∂(x_ℓ, y_ℓ) = Re[λᴴ(∂M x − ∂h)]` for every body.
pub fn gradient(problem: &ParkProblem, state: &ParkState, lambda: &DVector<Complex64>) -> Result<Vec<Point>> {
    let nb = problem.len();
    let nm = problem.modes();
    let order = problem.order();
    let k = problem.wave.k;
    let th = problem.wave.direction;
    // u_jᵀ = λ_γjᴴ B_j + conj(λ_ζj) f_jᵀ
    let u: Vec<DVector<Complex64>> = (0..nb)
        .map(|j| {
            let b = &problem.bodies[j];
            let lg = lambda.rows(j * nm, nm).map(|v| v.conj());
            b.dtm.transpose() * lg + b.excitation.clone() * lambda[nb * nm + j].conj()
        })
        .collect();
    let mut grad = vec![[0.0, 0.0]; nb];
    for j in 0..nb {
        let a = ambient_incident_coefficients(problem.positions[j][0], problem.positions[j][1], &problem.wave, order);
        let ua = u[j].dot(&a) * Complex64::new(0.0, k);
        grad[j][0] -= (ua * th.cos()).re;
        grad[j][1] -= (ua * th.sin()).re;
        for i in 0..nb {
            if i == j {
                continue;
            }
            let e = toeplitz_entries(problem.positions[i], problem.positions[j], k, order)?;
            let g = &state.gamma[i];
            let off = 2 * order;
            let (mut ex, mut ey) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for m in 0..nm {
                for n in 0..nm {
                    let s = g[m] * u[j][n];
                    ex += s * e.dx[m + off - n];
                    ey += s * e.dy[m + off - n];
                }
            }
            grad[j][0] -= ex.re;
            grad[j][1] -= ey.re;
            grad[i][0] += ex.re;
            grad[i][1] += ey.re;
        }
    }
    Ok(grad)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Step size; `None` calibrates it so the first step moves the device
    /// with the largest gradient by `0.1 d_min`.
    pub step: Option<f64>,
    pub armijo: f64,
    pub backtrack: f64,
    pub tol: f64,
    pub maxit: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            step: None,
            armijo: 1e-4,
            backtrack: 0.5,
            tol: 1e-3,
            maxit: 200,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(s) = self.step {
            if !(s > 0.0) {
                return Err(Error::Config("step must be positive".into()));
            }
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) || !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::Config("armijo and backtrack must lie in (0, 1)".into()));
        }
        if self.maxit == 0 || !(self.tol >= 0.0) {
            return Err(Error::Config("maxit must be at least 1 and tol non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub cost: f64,
    pub gradient_norm: f64,
    pub trial_cost: f64,
    pub max_d: f64,
    pub overlap_shrinks: usize,
    pub armijo_backtracks: usize,
    pub accepted: bool,
    pub err: f64,
}

pub const TRACE_HEADER: &str = "iteration,cost,gradient_norm,trial_cost,max_d,overlap_shrinks,armijo_backtracks,accepted,err";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIterations,
    Stagnated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerTrace {
    pub step: f64,
    pub rows: Vec<TraceRow>,
    /// Accepted layouts, starting with the initial one.
    pub layouts: Vec<Vec<Point>>,
    pub stop: StopReason,
}

impl OptimizerTrace {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(TRACE_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&format!(
                "{},{:?},{:?},{:?},{:?},{},{},{},{:?}\n",
                r.iteration, r.cost, r.gradient_norm, r.trial_cost, r.max_d, r.overlap_shrinks, r.armijo_backtracks, r.accepted, r.err
            ));
        }
        s
    }

    /// Costs of the accepted iterates, initial one first.
    pub fn accepted_costs(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.rows.iter().take(1).map(|r| r.cost).collect();
        v.extend(self.rows.iter().filter(|r| r.accepted).map(|r| r.trial_cost));
        v
    }
}

#[derive(Debug, Clone)]
pub struct OptimizedLayout {
    pub positions: Vec<Point>,
    pub power: ParkPower,
    pub trace: OptimizerTrace,
}

fn overlapping(pts: &[Point], d_min: f64) -> Vec<bool> {
    let mut flag = vec![false; pts.len()];
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if dist(pts[i], pts[j]) < d_min - OVERLAP_SLACK {
                flag[i] = true;
                flag[j] = true;
            }
        }
    }
    flag
}

fn trial(x: &[Point], grad: &[Point], d: &[f64], s: f64, domain: &LayoutDomain) -> Vec<Point> {
    x.iter()
        .zip(grad)
        .zip(d)
        .map(|((p, g), &dl)| domain.project([p[0] - s * dl * g[0], p[1] - s * dl * g[1]]))
        .collect()
}

/// Projected gradient descent on `J = −P` with the overlap-shrink and
/// Armijo backtracking loops.
pub fn optimize_layout(initial: &[Point], model: &ParkModel, domain: &LayoutDomain, cfg: &OptimizerConfig) -> Result<OptimizedLayout> {
    cfg.validate()?;
    if !domain.admissible(initial, 1e-9) {
        return Err(Error::domain("initial layout is not admissible"));
    }
    let nb = initial.len();
    let mut x = initial.to_vec();
    let mut rows = Vec::new();
    let mut layouts = vec![x.clone()];
    let mut step = cfg.step;
    let mut err = f64::INFINITY;
    let mut k = 0;
    let mut stop = StopReason::MaxIterations;
    while k < cfg.maxit && err > cfg.tol {
        let cg = model.cost_and_gradient(&x)?;
        let jk = cg.cost;
        let gmax = cg.gradient.iter().map(|g| g[0].hypot(g[1])).fold(0.0, f64::max);
        let gnorm = cg.gradient.iter().map(|g| g[0] * g[0] + g[1] * g[1]).sum::<f64>().sqrt();
        let s = *step.get_or_insert_with(|| if gmax > 0.0 { 0.1 * domain.d_min / gmax } else { 1.0 });
        let mut d = vec![1.0; nb];
        let mut shrinks = 0;
        let mut backtracks = 0;
        let mut stagnated = false;
        let mut xt: Vec<Point>;
        let mut jt = f64::NAN;
        'armijo: loop {
            xt = trial(&x, &cg.gradient, &d, s, domain);
            loop {
                let ov = overlapping(&xt, domain.d_min);
                if !ov.iter().any(|&o| o) {
                    break;
                }
                if shrinks + backtracks >= MAX_HALVINGS {
                    stagnated = true;
                    break 'armijo;
                }
                shrinks += 1;
                for (dl, o) in d.iter_mut().zip(&ov) {
                    if *o {
                        *dl *= cfg.backtrack;
                    }
                }
                xt = trial(&x, &cg.gradient, &d, s, domain);
            }
            jt = -model.power(&xt)?.total;
            let dmax = d.iter().cloned().fold(0.0, f64::max);
            let moved: f64 = xt.iter().zip(&x).map(|(a, b)| dist(*a, *b).powi(2)).sum();
            if !(jt - jk > -cfg.armijo * moved / (dmax * s)) {
                break;
            }
            if shrinks + backtracks >= MAX_HALVINGS {
                stagnated = true;
                break;
            }
            backtracks += 1;
            d.iter_mut().for_each(|dl| *dl *= cfg.backtrack);
        }
        let dmax = d.iter().cloned().fold(0.0, f64::max);
        if stagnated {
            rows.push(TraceRow {
                iteration: k,
                cost: jk,
                gradient_norm: gnorm,
                trial_cost: f64::NAN,
                max_d: dmax,
                overlap_shrinks: shrinks,
                armijo_backtracks: backtracks,
                accepted: false,
                err,
            });
            stop = StopReason::Stagnated;
            break;
        }
        err = (jk - jt).abs();
        rows.push(TraceRow {
            iteration: k,
            cost: jk,
            gradient_norm: gnorm,
            trial_cost: jt,
            max_d: dmax,
            overlap_shrinks: shrinks,
            armijo_backtracks: backtracks,
            accepted: true,
            err,
        });
        x = xt;
        layouts.push(x.clone());
        k += 1;
        if err <= cfg.tol {
            stop = StopReason::Converged;
        }
    }
    let power = model.power(&x)?;
    Ok(OptimizedLayout {
        positions: x,
        power,
        trace: OptimizerTrace {
            step: step.unwrap_or(f64::NAN),
            rows,
            layouts,
            stop,
        },
    })
}

/// Desk-scale park of constant-section devices in the equivalent wave of
/// `sea` (heading along +x), turbine speed set to the isolated linear optimum.
pub struct DeskPark {
    pub device: Device,
    pub model: ParkModel,
}

pub fn desk_park(sea: &SeaState, piles: Vec<Point>, pile_radius: f64, order: usize, consts: &PhysicalConstants) -> Result<DeskPark> {
    let device = synthetic::constant_section_device(consts)?;
    let hydro = synthetic::constant_section_hydro(consts)?;
    let ctrl = optimize_rotation_speed(&device, &hydro, sea, Model::Linear, &ControlOptions::default())?;
    let wave = ParkWave::new(&equivalent_monochromatic(sea, 0.0, Depth::Deep), consts)?;
    let draft = -device.geometry.z1;
    let hp = small_body_point(device.geometry.inflow_radius(), draft, wave.omega, consts);
    let body = Arc::new(BodyHydro::for_device(&device, &hp, device.turbine.lambda(ctrl.omega_t), order)?);
    let pile_body = if piles.is_empty() {
        None
    } else {
        Some(Arc::new(BodyHydro::pile(
            pile_radius,
            PILE_DRAFT,
            wave.omega,
            body.stiffness,
            order,
            consts,
        )?))
    };
    let p = device.turbine.mean_power_coefficients(ctrl.omega_t, device.s0());
    Ok(DeskPark {
        device,
        model: ParkModel {
            body,
            piles,
            pile_body,
            wave,
            p,
            omega_t: ctrl.omega_t,
        },
    })
}

/// Draft of the support piles (m).
pub const PILE_DRAFT: f64 = 20.0;
/// Radius of the support piles (m).
pub const PILE_RADIUS: f64 = 5.0;
