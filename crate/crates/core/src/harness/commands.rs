use std::time::Instant;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::{csv_document, fmt_f64, CommandOutput, CsvFile};
use crate::discrete_gradient::{discrete_gradient, DgKind};
use crate::error::{Error, Result};
use crate::finite_diff::{self, fd_d2_ia, fd_d2_sia, fd_hessian};
use crate::integrators::{
    exact_residual_jacobian, initial_guess, integrate, newton_iteration, reference_solution, residual,
    residual_jacobian, rk4_step, s4_ad, s4_tau, s4_tau_evals, MethodKind, NewtonConfig, Trajectory,
};
use crate::linalg::Mat;
use crate::systems::{eval_energy, AnySystem, EvalCounter, Hamiltonian, NoisyHamiltonian};
use crate::terrain::{build_potential, containment_check, ContainmentReport, TopographicHamiltonian, CONTAINMENT_TOL};

/// Errors at or below this level are left out of slope fits.
pub const FIT_THRESHOLD: f64 = 1e-10;

const DEFAULT_TOL: f64 = 1e-11;
const TERRAIN_TOL: f64 = 1e-7;

type System = NoisyHamiltonian<AnySystem>;

fn build(cfg: &ExperimentConfig) -> Result<(System, Vec<f64>)> {
    cfg.validate()?;
    let base = cfg.build_system()?;
    let x0 = cfg.initial_state(&base)?;
    Ok((NoisyHamiltonian::new(base, cfg.noise, cfg.seed)?, x0))
}

fn steps_for(time: f64, h: f64) -> Result<usize> {
    if !(h > 0.0) {
        return Err(Error::Config(format!("step size must be > 0, got {h}")));
    }
    let n = (time / h).round();
    if n < 1.0 {
        return Err(Error::Config(format!("time {time} is shorter than one step of {h}")));
    }
    Ok(n as usize)
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn max_entry(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

/// Least-squares slope of `log error` against `log h` over points with error
/// above [`FIT_THRESHOLD`]. `None` with fewer than two such points.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    let p: Vec<(f64, f64)> = points
        .iter()
        .filter(|(h, e)| *h > 0.0 && *e > FIT_THRESHOLD && e.is_finite())
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    if p.len() < 2 {
        return None;
    }
    let n = p.len() as f64;
    let mx = p.iter().map(|v| v.0).sum::<f64>() / n;
    let my = p.iter().map(|v| v.1).sum::<f64>() / n;
    let sxx: f64 = p.iter().map(|v| (v.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(p.iter().map(|v| (v.0 - mx) * (v.1 - my)).sum::<f64>() / sxx)
}

fn trajectory_rows(t: &Trajectory) -> Vec<Vec<String>> {
    (0..t.len())
        .map(|k| {
            let mut row = vec![fmt_f64(t.times[k])];
            row.extend(t.states[k].iter().map(|&v| fmt_f64(v)));
            row.push(fmt_f64(t.energies[k]));
            row.push(t.iterations[k].to_string());
            row.push(fmt_f64(t.residuals[k]));
            row.push(t.evals_cum[k].to_string());
            row
        })
        .collect()
}

/// Integrates one trajectory. Columns: `t,x_1..x_n,H,newton_iters,residual,evals_cum`.
pub fn cmd_integrate(cfg: &ExperimentConfig) -> Result<(Trajectory, CommandOutput)> {
    let (sys, x0) = build(cfg)?;
    let method = cfg.methods[0];
    let h = cfg.single_h(0.01);
    let n = match cfg.steps {
        Some(n) => n,
        None => steps_for(cfg.time, h)?,
    };
    let newton = cfg.newton(DEFAULT_TOL)?;
    let t = integrate(&sys, method, &x0, h, n, &newton)?;
    let mut cols = vec!["t".to_string()];
    cols.extend((1..=x0.len()).map(|i| format!("x_{i}")));
    cols.extend(header(&["H", "newton_iters", "residual", "evals_cum"]));
    let csv = csv_document(&cfg.echo("integrate"), &cols, &trajectory_rows(&t))?;
    let summary = vec![
        format!("{method} on {}: {n} steps of h = {h}", sys.base()),
        format!("max energy drift {:e}", t.max_energy_drift()),
        format!("total energy evaluations {}", t.total_evals()),
        format!("steps stopped at the iteration cap {}", t.unconverged_steps()),
    ];
    Ok((t, CommandOutput { files: vec![CsvFile { suffix: None, content: csv }], summary, failure: None }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergeRow {
    pub method: MethodKind,
    pub h: f64,
    pub steps: usize,
    pub global_error: f64,
    pub total_evals: u64,
    pub unconverged_steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergeReport {
    pub rows: Vec<ConvergeRow>,
    pub slopes: Vec<(MethodKind, Option<f64>)>,
}

impl ConvergeReport {
    pub fn slope(&self, method: MethodKind) -> Option<f64> {
        self.slopes.iter().find(|(m, _)| *m == method).and_then(|(_, s)| *s)
    }
}

/// Global error `‖x_N − x(T)‖₂` against an RK4 reference for every
/// (method, h) cell, with fitted log-log slopes.
pub fn cmd_converge(cfg: &ExperimentConfig) -> Result<(ConvergeReport, CommandOutput)> {
    let (sys, x0) = build(cfg)?;
    let hs = cfg.h_levels();
    if hs.len() < 3 {
        return Err(Error::Config(format!("convergence study needs at least 3 step sizes, got {}", hs.len())));
    }
    let reference = reference_solution(sys.base(), &x0, cfg.time)?;
    let base_newton = cfg.newton(DEFAULT_TOL)?;
    let cells: Vec<(MethodKind, f64)> = cfg.methods.iter().flat_map(|&m| hs.iter().map(move |&h| (m, h))).collect();
    let rows: Vec<ConvergeRow> = cells
        .par_iter()
        .enumerate()
        .map(|(idx, &(method, h))| {
            let steps = steps_for(cfg.time, h)?;
            let h_eff = cfg.time / steps as f64;
            let newton = NewtonConfig { seed: base_newton.seed.wrapping_add(idx as u64), ..base_newton };
            let t = integrate(&sys, method, &x0, h_eff, steps, &newton)?;
            Ok(ConvergeRow {
                method,
                h: h_eff,
                steps,
                global_error: dist2(t.last(), &reference),
                total_evals: t.total_evals(),
                unconverged_steps: t.unconverged_steps(),
            })
        })
        .collect::<Result<_>>()?;

    let slopes: Vec<(MethodKind, Option<f64>)> = cfg
        .methods
        .iter()
        .map(|&m| {
            let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.method == m).map(|r| (r.h, r.global_error)).collect();
            (m, fit_slope(&pts))
        })
        .collect();

    let mut table = Vec::new();
    for r in &rows {
        table.push(vec![
            "data".into(),
            r.method.label().into(),
            fmt_f64(r.h),
            r.steps.to_string(),
            fmt_f64(r.global_error),
            String::new(),
            r.total_evals.to_string(),
            r.unconverged_steps.to_string(),
        ]);
    }
    let mut summary = Vec::new();
    for (m, s) in &slopes {
        table.push(vec![
            "slope".into(),
            m.label().into(),
            String::new(),
            String::new(),
            String::new(),
            s.map(fmt_f64).unwrap_or_else(|| "nan".into()),
            String::new(),
            String::new(),
        ]);
        summary.push(match s {
            Some(s) => format!("{m}: slope {s:.3} (expected order {})", m.order()),
            None => format!("{m}: fewer than two points above {FIT_THRESHOLD:e}"),
        });
    }
    let cols = header(&["row", "method", "h", "steps", "global_error", "slope", "total_evals", "unconverged_steps"]);
    let csv = csv_document(&cfg.echo("converge"), &cols, &table)?;
    let report = ConvergeReport { rows, slopes };
    Ok((report, CommandOutput { files: vec![CsvFile { suffix: None, content: csv }], summary, failure: None }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftReport {
    pub h: f64,
    pub steps: usize,
    /// Per method: maximum drift and steps stopped at the iteration cap.
    pub methods: Vec<(MethodKind, f64, usize)>,
}

impl DriftReport {
    pub fn max_drift(&self, method: MethodKind) -> Option<f64> {
        self.methods.iter().find(|m| m.0 == method).map(|m| m.1)
    }
}

/// `|H(xₙ) − H(x₀)|` over time for each configured method.
pub fn cmd_energy_drift(cfg: &ExperimentConfig) -> Result<(DriftReport, CommandOutput)> {
    let (sys, x0) = build(cfg)?;
    let h = cfg.single_h(0.05);
    let steps = match cfg.steps {
        Some(n) => n,
        None => steps_for(cfg.time, h)?,
    };
    let base_newton = cfg.newton(DEFAULT_TOL)?;
    let runs: Vec<Trajectory> = cfg
        .methods
        .par_iter()
        .enumerate()
        .map(|(idx, &m)| {
            let newton = NewtonConfig { seed: base_newton.seed.wrapping_add(idx as u64), ..base_newton };
            integrate(&sys, m, &x0, h, steps, &newton)
        })
        .collect::<Result<_>>()?;
    let mut table = Vec::new();
    let mut methods = Vec::new();
    let mut summary = Vec::new();
    for t in &runs {
        let e0 = t.energies[0];
        for k in 1..t.len() {
            table.push(vec![t.method.label().into(), fmt_f64(t.times[k]), fmt_f64((t.energies[k] - e0).abs())]);
        }
        summary.push(format!(
            "{}: max drift {:e} ({} steps at the iteration cap)",
            t.method,
            t.max_energy_drift(),
            t.unconverged_steps()
        ));
        methods.push((t.method, t.max_energy_drift(), t.unconverged_steps()));
    }
    let csv = csv_document(&cfg.echo("energy-drift"), &header(&["method", "t", "energy_error"]), &table)?;
    let report = DriftReport { h, steps, methods };
    Ok((report, CommandOutput { files: vec![CsvFile { suffix: None, content: csv }], summary, failure: None }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountRow {
    pub item: String,
    pub n: usize,
    pub measured: u64,
    pub formula: u64,
}

impl CountRow {
    pub fn matches(&self) -> bool {
        self.measured == self.formula
    }
}

fn measure(f: impl FnOnce(&mut EvalCounter) -> Result<()>) -> Result<u64> {
    let mut c = EvalCounter::new();
    f(&mut c)?;
    Ok(c.count())
}

/// Measured energy evaluations of one Newton iteration per derivative-free
/// method and of each building block, against the closed-form counts.
pub fn cmd_counts(cfg: &ExperimentConfig) -> Result<(Vec<CountRow>, CommandOutput)> {
    let (sys, x) = build(cfg)?;
    let n = sys.dim();
    let h = cfg.single_h(0.1);
    let newton = cfg.newton(DEFAULT_TOL)?;
    let fd = newton.fd;
    let xhat = initial_guess(0, &x, None, h, cfg.seed)?.into_inner();
    let np = n as u64;
    let mut rows = Vec::new();
    let mut push = |item: &str, measured: u64, formula: u64| {
        rows.push(CountRow { item: item.into(), n, measured, formula });
    };
    for m in [MethodKind::IaDf, MethodKind::SiaDf, MethodKind::Sia4Df] {
        let measured = measure(|c| newton_iteration(&sys, m, &x, &xhat, h, &newton, c).map(|_| ()))?;
        push(&format!("newton_iteration_{}", m.label()), measured, m.evals_per_iteration(n).expect("df method"));
    }
    push("dg_IA", measure(|c| discrete_gradient(DgKind::Ia, &sys, &x, &xhat, fd.tau1, c).map(|_| ()))?, 2 * np);
    push("dg_SIA", measure(|c| discrete_gradient(DgKind::Sia, &sys, &x, &xhat, fd.tau1, c).map(|_| ()))?, 4 * np);
    push("d2_IA", measure(|c| fd_d2_ia(&sys, &x, &xhat, fd.tau1, c).map(|_| ()))?, 2 * (np * np + np));
    push("d2_SIA", measure(|c| fd_d2_sia(&sys, &x, &xhat, fd.tau1, c, true).map(|_| ()))?, 4 * (np * np + np));
    push("d2_SIA_offdiag", measure(|c| fd_d2_sia(&sys, &x, &xhat, fd.tau1, c, false).map(|_| ()))?, 4 * (np * np - np));
    push("hessian", measure(|c| fd_hessian(&sys, &x, fd.tau2, c).map(|_| ()))?, np * np + 3 * np + 1);
    push("s4_tau", measure(|c| s4_tau(&sys, &x, &xhat, h, &fd, c).map(|_| ()))?, 9 * np * np - 5 * np + 1);
    debug_assert_eq!(s4_tau_evals(n), 9 * np * np - 5 * np + 1);
    debug_assert_eq!(finite_diff::hessian_evals(n), np * np + 3 * np + 1);

    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.item.clone(),
                r.n.to_string(),
                r.measured.to_string(),
                r.formula.to_string(),
                r.matches().to_string(),
            ]
        })
        .collect();
    let csv = csv_document(&cfg.echo("counts"), &header(&["item", "n", "measured", "formula", "match"]), &table)?;
    let mismatches: Vec<&str> = rows.iter().filter(|r| !r.matches()).map(|r| r.item.as_str()).collect();
    let failure = (!mismatches.is_empty()).then(|| format!("count mismatch: {}", mismatches.join(", ")));
    let summary = rows.iter().map(|r| format!("{} (n={}): {} / {}", r.item, r.n, r.measured, r.formula)).collect();
    Ok((rows, CommandOutput { files: vec![CsvFile { suffix: None, content: csv }], summary, failure }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct InexactnessRow {
    pub h: f64,
    pub s4_error: f64,
    pub f_error: f64,
    pub jacobian_error: f64,
    pub s4_theory: f64,
    pub f_theory: f64,
    pub jacobian_theory: f64,
}

/// `h = 0` followed by nine logarithmically spaced values in `[10⁻³, 10⁻¹]`.
pub fn inexactness_h_grid() -> Vec<f64> {
    let mut h = vec![0.0];
    h.extend((0..9).map(|k| 10f64.powf(-3.0 + 0.25 * k as f64)));
    h
}

/// Errors of `S₄^τ`, `F_τ` and `F′_τ` against their dual-number counterparts
/// at `x̂ = RK4(x, h)`; max-entry norm.
pub fn cmd_inexactness(cfg: &ExperimentConfig) -> Result<(Vec<InexactnessRow>, CommandOutput)> {
    let (sys, x) = build(cfg)?;
    let newton = cfg.newton(DEFAULT_TOL)?;
    let fd = newton.fd;
    let eps = fd.eps_bar;
    let hs = if cfg.h.is_empty() { inexactness_h_grid() } else { cfg.h.clone() };
    let rows: Vec<InexactnessRow> = hs
        .par_iter()
        .map(|&h| {
            let xhat = if h == 0.0 { x.clone() } else { rk4_step(sys.base(), &x, h)?.into_inner() };
            let mut c = EvalCounter::new();
            let s_tau = s4_tau(&sys, &x, &xhat, h, &fd, &mut c)?;
            let s_ad: Mat<f64> = s4_ad(&sys, &x, &xhat, h)?;
            let (f_tau, sbar) = residual(&sys, MethodKind::Sia4Df, &x, &xhat, h, &newton, &mut c)?;
            let (f_ad, _) = residual(&sys, MethodKind::Sia4Ad, &x, &xhat, h, &newton, &mut c)?;
            let j_tau = residual_jacobian(&sys, MethodKind::Sia4Df, &x, &xhat, h, &sbar, &newton, &mut c)?;
            let j_ad = exact_residual_jacobian(&sys, MethodKind::Sia4Ad, &x, &xhat, h, fd.tau1)?;
            Ok(InexactnessRow {
                h,
                s4_error: s_tau.max_abs_diff(&s_ad),
                f_error: max_entry(&f_tau, &f_ad),
                jacobian_error: j_tau.max_abs_diff(&j_ad),
                s4_theory: eps.powf(2.0 / 3.0) + h * h * eps.sqrt(),
                f_theory: h * eps.powf(2.0 / 3.0) + h.powi(3) * eps.sqrt(),
                jacobian_theory: eps.powf(2.0 / 3.0) + h * h + h.powi(3) * eps.sqrt(),
            })
        })
        .collect::<Result<_>>()?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            [r.h, r.s4_error, r.f_error, r.jacobian_error, r.s4_theory, r.f_theory, r.jacobian_theory]
                .iter()
                .map(|&v| fmt_f64(v))
                .collect()
        })
        .collect();
    let cols = header(&["h", "s4_error", "f_error", "jacobian_error", "s4_theory", "f_theory", "jacobian_theory"]);
    let csv = csv_document(&cfg.echo("inexactness"), &cols, &table)?;
    let summary = rows
        .iter()
        .map(|r| format!("h={:.3e}: S4 {:.2e}, F {:.2e}, F' {:.2e}", r.h, r.s4_error, r.f_error, r.jacobian_error))
        .collect();
    Ok((rows, CommandOutput { files: vec![CsvFile { suffix: None, content: csv }], summary, failure: None }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkRow {
    pub method: MethodKind,
    pub h: f64,
    pub steps: usize,
    pub global_error: f64,
    pub energy_error: f64,
    pub total_evals: u64,
    pub newton_iterations: usize,
    pub unconverged_steps: usize,
    pub wall_seconds: f64,
}

/// Error against cost for every (method, h) cell. Evaluation counts are the
/// portable cost measure; wall time is reported alongside.
pub fn cmd_work_precision(cfg: &ExperimentConfig) -> Result<(Vec<WorkRow>, CommandOutput)> {
    let (sys, x0) = build(cfg)?;
    let hs = cfg.h_levels();
    let reference = reference_solution(sys.base(), &x0, cfg.time)?;
    let base_newton = cfg.newton(DEFAULT_TOL)?;
    let cells: Vec<(MethodKind, f64)> = cfg.methods.iter().flat_map(|&m| hs.iter().map(move |&h| (m, h))).collect();
    let rows: Vec<WorkRow> = cells
        .par_iter()
        .enumerate()
        .map(|(idx, &(method, h))| {
            let steps = steps_for(cfg.time, h)?;
            let h_eff = cfg.time / steps as f64;
            let newton = NewtonConfig { seed: base_newton.seed.wrapping_add(idx as u64), ..base_newton };
            let start = Instant::now();
            let t = integrate(&sys, method, &x0, h_eff, steps, &newton)?;
            let wall_seconds = start.elapsed().as_secs_f64();
            Ok(WorkRow {
                method,
                h: h_eff,
                steps,
                global_error: dist2(t.last(), &reference),
                energy_error: t.max_energy_drift(),
                total_evals: t.total_evals(),
                newton_iterations: t.iterations.iter().sum(),
                unconverged_steps: t.unconverged_steps(),
                wall_seconds,
            })
        })
        .collect::<Result<_>>()?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.method.label().into(),
                fmt_f64(r.h),
                r.steps.to_string(),
                fmt_f64(r.global_error),
                fmt_f64(r.energy_error),
                r.total_evals.to_string(),
                r.newton_iterations.to_string(),
                r.unconverged_steps.to_string(),
                format!("{:.6}", r.wall_seconds),
            ]
        })
        .collect();
    let cols = header(&[
        "method",
        "h",
        "steps",
        "global_error",
        "energy_error",
        "total_evals",
        "newton_iterations",
        "unconverged_steps",
        "wall_seconds",
    ]);
    let csv = csv_document(&cfg.echo("work-precision"), &cols, &table)?;
    let summary = rows
        .iter()
        .map(|r| format!("{} h={}: error {:.2e}, {} evaluations", r.method, r.h, r.global_error, r.total_evals))
        .collect();
    Ok((rows, CommandOutput { files: vec![CsvFile { suffix: None, content: csv }], summary, failure: None }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TerrainReport {
    pub h0: f64,
    pub trajectory: Trajectory,
    pub containment: ContainmentReport,
}

/// Terrain demo: integrates the topographic Hamiltonian (SIA_DF, tolerance
/// `10⁻⁷` unless overridden) and checks that `U(qₙ) ≤ H₀` along the way.
///
/// Files: trajectory (primary), `raster` (`U` sampled on a grid) and
/// `containment` (summary).
pub fn cmd_terrain(cfg: &ExperimentConfig) -> Result<(TerrainReport, CommandOutput)> {
    let mut tcfg = cfg.clone();
    tcfg.system = "terrain".into();
    tcfg.validate()?;
    let grid = tcfg.terrain_grid()?;
    let system = TopographicHamiltonian::new(build_potential(&grid));
    let x0 = match &tcfg.x0 {
        Some(x) if x.len() == 4 => x.clone(),
        Some(x) => return Err(Error::Config(format!("x0 has {} entries, terrain needs 4", x.len()))),
        None => vec![0.0, 0.0, -0.1, 0.2],
    };
    let h = tcfg.single_h(0.02);
    let steps = tcfg.steps.unwrap_or(5000);
    let newton = tcfg.newton(TERRAIN_TOL)?;
    let method = tcfg.methods[0];
    let h0 = eval_energy(&system, &x0, &mut EvalCounter::new())?;
    let trajectory = integrate(&system, method, &x0, h, steps, &newton)?;
    let potential = system.potential();
    let containment = containment_check(&trajectory, h0, potential, CONTAINMENT_TOL)?;

    let echo = tcfg.echo("terrain");
    let traj_rows: Vec<Vec<String>> = trajectory
        .states
        .iter()
        .zip(&containment.rows)
        .enumerate()
        .map(|(k, (x, c))| {
            let mut row = vec![fmt_f64(trajectory.times[k])];
            row.extend(x.iter().map(|&v| fmt_f64(v)));
            row.push(fmt_f64(trajectory.energies[k]));
            row.push(fmt_f64(c.potential));
            row.push(fmt_f64(c.excess));
            row.push(c.violated.to_string());
            row
        })
        .collect();
    let traj_csv =
        csv_document(&echo, &header(&["t", "q_1", "q_2", "p_1", "p_2", "H", "U", "excess", "violated"]), &traj_rows)?;

    let m = tcfg.raster.max(2);
    let mut raster = Vec::with_capacity(m * m);
    for i in 0..m {
        let y = -1.0 + 2.0 * i as f64 / (m - 1) as f64;
        for j in 0..m {
            let x = -1.0 + 2.0 * j as f64 / (m - 1) as f64;
            let u_top = potential.u_top(x, y)?;
            let u = potential.total(x, y)?;
            raster.push(vec![fmt_f64(x), fmt_f64(y), fmt_f64(u_top), fmt_f64(u), (u <= h0).to_string()]);
        }
    }
    let raster_csv = csv_document(&echo, &header(&["x", "y", "u_top", "u", "in_sublevel_set"]), &raster)?;

    let summary_rows = vec![
        vec!["h0".into(), fmt_f64(h0)],
        vec!["steps".into(), steps.to_string()],
        vec!["violations".into(), containment.violations.to_string()],
        vec!["max_excess".into(), fmt_f64(containment.max_excess)],
        vec!["energy_drift".into(), fmt_f64(containment.energy_drift)],
        vec!["unconverged_steps".into(), trajectory.unconverged_steps().to_string()],
    ];
    let summary_csv = csv_document(&echo, &header(&["key", "value"]), &summary_rows)?;
    let summary = vec![
        format!("H0 = {h0:.6}"),
        format!("containment violations: {} (tolerance {CONTAINMENT_TOL:e})", containment.violations),
        format!("max excess U(q) - H0: {:e}", containment.max_excess),
        format!("energy drift: {:e}", containment.energy_drift),
    ];
    let failure =
        (containment.violations > 0).then(|| format!("{} states left the sublevel set of H0", containment.violations));
    let out = CommandOutput {
        files: vec![
            CsvFile { suffix: None, content: traj_csv },
            CsvFile { suffix: Some("raster"), content: raster_csv },
            CsvFile { suffix: Some("containment"), content: summary_csv },
        ],
        summary,
        failure,
    };
    Ok((TerrainReport { h0, trajectory, containment }, out))
}
