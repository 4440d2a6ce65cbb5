use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use geodyn_core::dynamics::{DynSystem, EnergyRecord, SystemKind, Trajectory};
use geodyn_core::flows::{self, FlowSpec};
use geodyn_core::verify::{self, BoundaryValueProblem, CheckResult};
use geodyn_core::Error as CoreError;
use serde::Serialize;

use crate::error::CliError;
use crate::scenario::{self, Run, SeedBox};

/// Console output and exit code of one scenario.
#[derive(Debug, Default)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn from_error(e: CliError, mut partial: Outcome) -> Self {
        let _ = writeln!(partial.stderr, "error: {e}");
        partial.code = e.exit_code();
        partial
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Simulate,
    Verify,
}

#[derive(Debug, Serialize)]
pub struct Timing {
    pub integrate_s: f64,
    pub checks_s: f64,
    pub total_s: f64,
}

/// Diagnostics report written next to the trajectory.
#[derive(Debug, Serialize)]
pub struct Report<'a> {
    pub scenario: String,
    pub system: SystemKind,
    pub checks: &'a [CheckResult],
    pub timing: Timing,
}

fn output_path(run: &Run, out_dir: Option<&Path>, given: Option<&PathBuf>, suffix: &str) -> PathBuf {
    let base = match out_dir {
        Some(d) => d.to_path_buf(),
        None => run.path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    match given {
        Some(p) if p.is_absolute() => p.clone(),
        Some(p) => base.join(p),
        None => {
            let stem = run.path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
            base.join(format!("{stem}{suffix}"))
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| CliError::runtime(path, e.to_string()))?;
        }
    }
    std::fs::write(path, contents).map_err(|e| CliError::runtime(path, e.to_string()))
}

/// Trajectory as CSV with columns `t, x.., v.., H, f, L`.
pub fn trajectory_csv(traj: &Trajectory, rec: &EnergyRecord) -> String {
    let n = traj.dim;
    let mut out = String::from("t");
    for i in 1..=n {
        let _ = write!(out, ",x{i}");
    }
    for i in 1..=n {
        let _ = write!(out, ",v{i}");
    }
    out.push_str(",H,f,L\n");
    let lagrangian = rec.lagrangian_for(traj.kind);
    for (k, s) in traj.samples.iter().enumerate() {
        let _ = write!(out, "{:.16e}", s.t);
        for c in s.x.iter().chain(&s.v) {
            let _ = write!(out, ",{c:.16e}");
        }
        let _ = write!(out, ",{:.16e},{:.16e},", rec.hamiltonian[k], rec.energy[k]);
        if let Some(l) = lagrangian {
            let _ = write!(out, "{:.16e}", l[k]);
        }
        out.push('\n');
    }
    out
}

fn runtime(run: &Run, what: &str, e: CoreError) -> CliError {
    match e {
        CoreError::UnsupportedSystem { .. } | CoreError::InvalidArgument(_) => {
            CliError::validation(&run.path, what, e.to_string())
        }
        _ => CliError::runtime(&run.path, format!("{what}: {e}")),
    }
}

fn run_checks(run: &Run, traj: &Trajectory, rec: &EnergyRecord) -> Result<Vec<CheckResult>, CliError> {
    let geo = &run.flow.geometry;
    let h0 = match run.scenario.h0 {
        Some(h) => h,
        None => rec.hamiltonian.first().copied().unwrap_or(0.0),
    };
    let mut out = Vec::new();
    for name in &run.scenario.checks {
        let field = format!("checks: {name}");
        match name.as_str() {
            "conservation" => out.push(verify::check_conservation(traj, rec)),
            "pregeodesic" => {
                let js = geo.jacobi_structure(h0).map_err(|e| runtime(run, &field, e))?;
                out.push(verify::check_pregeodesic(traj, &js).map_err(|e| runtime(run, &field, e))?);
            }
            "horizontal" => {
                let js = geo.jacobi_structure(h0).map_err(|e| runtime(run, &field, e))?;
                let pair = verify::check_horizontal(traj, &js).map_err(|e| runtime(run, &field, e))?;
                out.extend(pair);
            }
            "euler_lagrange" => {
                out.push(verify::check_euler_lagrange(traj, geo).map_err(|e| runtime(run, &field, e))?)
            }
            "grad_f" => {
                let stride = (traj.len() / 100).max(1);
                let points: Vec<Vec<f64>> = traj.samples.iter().step_by(stride).map(|s| s.x.clone()).collect();
                out.push(verify::check_grad_f_identity(geo, &points).map_err(|e| runtime(run, &field, e))?);
            }
            "three_energy_regimes" => {
                let bvp = BoundaryValueProblem::pendulum_default();
                out.push(verify::check_three_energy_regimes(geo, &bvp).map_err(|e| runtime(run, &field, e))?);
            }
            other => return Err(CliError::validation(&run.path, "checks", format!("unknown check `{other}`"))),
        }
    }
    Ok(out)
}

/// `simulate` and `verify` on one scenario file.
pub fn simulate(path: &Path, mode: Mode, out_dir: Option<&Path>) -> Outcome {
    let mut outcome = Outcome::default();
    match simulate_inner(path, mode, out_dir, &mut outcome) {
        Ok(code) => {
            outcome.code = code;
            outcome
        }
        Err(e) => Outcome::from_error(e, outcome),
    }
}

fn simulate_inner(path: &Path, mode: Mode, out_dir: Option<&Path>, out: &mut Outcome) -> Result<u8, CliError> {
    let start = Instant::now();
    let run = scenario::prepare(path, scenario::load(path)?)?;
    for w in &run.warnings {
        let _ = writeln!(out.stderr, "warning: {}: {w}", path.display());
    }
    let sys = DynSystem::new(run.system, run.flow.geometry.clone());
    let (traj, rec) = sys
        .integrate(&run.x0, &run.v0, run.scenario.t0, run.t1, run.integrator)
        .map_err(|e| runtime(&run, "integration", e))?;
    let integrate_s = start.elapsed().as_secs_f64();
    let checks_start = Instant::now();
    let checks = run_checks(&run, &traj, &rec)?;
    let checks_s = checks_start.elapsed().as_secs_f64();

    let _ = writeln!(
        out.stdout,
        "{}: {} {} on [{}, {}], {} samples ({} accepted, {} rejected steps)",
        path.display(),
        run.flow.name,
        run.system,
        run.scenario.t0,
        run.t1,
        traj.len(),
        traj.stats.accepted,
        traj.stats.rejected
    );
    for c in &checks {
        let _ = writeln!(
            out.stdout,
            "  {:<24} {:<12} max {:.3e}  mean {:.3e}  tol {:.1e}  samples {}",
            c.name,
            format!("{:?}", c.status).to_lowercase(),
            c.max_residual,
            c.mean_residual,
            c.tolerance,
            c.samples_used
        );
        for note in &c.notes {
            let _ = writeln!(out.stdout, "      {note}");
        }
    }

    if mode == Mode::Simulate {
        let csv_path = output_path(&run, out_dir, run.scenario.outputs.trajectory.as_ref(), ".csv");
        write_file(&csv_path, &trajectory_csv(&traj, &rec))?;
        let _ = writeln!(out.stdout, "  trajectory -> {}", csv_path.display());
    }
    let report = Report {
        scenario: path.display().to_string(),
        system: run.system,
        checks: &checks,
        timing: Timing {
            integrate_s,
            checks_s,
            total_s: start.elapsed().as_secs_f64(),
        },
    };
    let report_path = output_path(&run, out_dir, run.scenario.outputs.report.as_ref(), ".report.json");
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    write_file(&report_path, &json)?;
    let _ = writeln!(out.stdout, "  report -> {}", report_path.display());
    Ok(if checks.iter().all(|c| c.pass) { 0 } else { 1 })
}

/// `equilibria` on one scenario file.
pub fn equilibria(path: &Path) -> Outcome {
    let mut outcome = Outcome::default();
    let result = (|| -> Result<(), CliError> {
        let sc = scenario::load(path)?;
        let flow = scenario::resolve_flow(path, &sc.flow)?;
        let grid = sc.equilibria.clone().unwrap_or_default();
        if !(grid.lo < grid.hi) || grid.per_axis == 0 {
            return Err(CliError::validation(path, "equilibria", "need lo < hi and per_axis > 0"));
        }
        let n = flow.geometry.dim();
        let SeedBox { lo, hi, per_axis } = grid;
        let seeds = flows::seed_grid(&vec![lo; n], &vec![hi; n], per_axis);
        let found = flows::find_equilibria(&flow.geometry, &seeds);
        let _ = writeln!(
            outcome.stdout,
            "{}: {} equilibria of {} from {} seeds on [{lo}, {hi}]^{n} ({} did not converge)",
            path.display(),
            found.points.len(),
            flow.name,
            seeds.len(),
            found.dropped
        );
        for p in &found.points {
            let coords: Vec<String> = p.iter().map(|c| format!("{c:.12}")).collect();
            let _ = writeln!(outcome.stdout, "  ({})", coords.join(", "));
        }
        Ok(())
    })();
    match result {
        Ok(()) => outcome,
        Err(e) => Outcome::from_error(e, outcome),
    }
}

fn describe(spec: &FlowSpec, out: &mut String) {
    let n = spec.dim();
    let _ = writeln!(out, "{} (dim {n})", spec.name);
    if spec.params.is_empty() {
        let _ = writeln!(out, "  parameters: none");
    } else {
        let ps: Vec<String> = spec.params.iter().map(|(k, v)| format!("{k} = {v}")).collect();
        let _ = writeln!(out, "  parameters: {}", ps.join(", "));
    }
    let comps: Vec<String> = spec.geometry.field.components().iter().map(ToString::to_string).collect();
    let _ = writeln!(out, "  X = ({})", comps.join(", "));
    let _ = writeln!(out, "  f = {}", spec.energy);
    if n == 3 {
        let curl: Vec<String> = spec.curl.iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "  rot X = ({})", curl.join(", "));
    }
    let _ = writeln!(out, "  div X = {}", spec.divergence);
    for e in &spec.equilibria {
        let _ = writeln!(out, "  equilibrium {e:?}");
    }
    if let Some(s) = &spec.equilibrium_surface {
        let _ = writeln!(out, "  equilibria lie on {s} = 0");
    }
    for fam in &spec.families {
        let _ = writeln!(out, "  closed form for {}: {}", fam.system, fam.name);
    }
    if let Some(t) = &spec.chaos_threshold {
        let _ = writeln!(out, "  chaos threshold {} = {:.6}", t.formula, t.value);
    }
    for note in &spec.notes {
        let _ = writeln!(out, "  note: {note}");
    }
}

/// `flows`: list the built-in flows at their default parameters.
pub fn list_flows() -> Outcome {
    let mut outcome = Outcome::default();
    for name in flows::BUILTIN_NAMES {
        match flows::builtin(name, &Default::default()) {
            Ok(spec) => describe(&spec, &mut outcome.stdout),
            Err(e) => {
                let _ = writeln!(outcome.stderr, "error: {name}: {e}");
                outcome.code = 3;
            }
        }
    }
    outcome
}
