//! Scenarios: a potential, a grid, a field source and an audit plan, run
//! end to end with file artifacts.
//!
//! Each run writes into the output directory:
//!
//! * `<name>.field`: the audited field (unless `output.field = false`);
//! * `<name>.tensor.txt`: residual, solver and tensor summaries;
//! * `<name>.profile.csv`: the radial profiles and their rescalings;
//! * `<name>.energy.csv`: energy change per accepted step (solve only);
//! * `<name>.verdicts.csv`: one summary line per verdict.
//!
//! Every verdict has a role. `pass` and `fail` roles are asserted and decide
//! the exit status; `report` verdicts are recorded only.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::parse_scenario;
use crate::error::{Error, Result};
use crate::field::{load_field, save_field, Field, Grid};
use crate::monotonicity::{
    audit_profile, build_profile, default_radii, write_profile_csv, RadialProfile,
};
use crate::oracle::{embed, solve_vortex, OracleKind};
use crate::potential::PotentialSpec;
use crate::solver::{minimize_energy, seed, SolveConfig, SolveOutcome};
use crate::tensor::{tensor_report, TensorReport};
use crate::verdict::{Location, Property, Verdict};

#[derive(Debug, Clone, PartialEq)]
pub enum OracleSpec {
    Heteroclinic,
    Vortex,
    Linear,
    Constant(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VortexParams {
    pub r_max: f64,
    pub step: f64,
}

impl Default for VortexParams {
    fn default() -> Self {
        VortexParams {
            r_max: 12.0,
            step: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RadiusSpec {
    /// Uniform radii in `[4h, L - 2h]`.
    Count(usize),
    List(Vec<f64>),
}

impl Default for RadiusSpec {
    fn default() -> Self {
        RadiusSpec::Count(crate::monotonicity::DEFAULT_RADIUS_COUNT)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Oracle(OracleSpec),
    Solve {
        boundary: OracleSpec,
        config: SolveConfig,
    },
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expect {
    Pass,
    Fail,
    Report,
}

impl Expect {
    pub fn name(self) -> &'static str {
        match self {
            Expect::Pass => "pass",
            Expect::Fail => "fail",
            Expect::Report => "report",
        }
    }

    pub fn satisfied_by(self, v: &Verdict) -> bool {
        match self {
            Expect::Pass => v.passed,
            Expect::Fail => !v.passed,
            Expect::Report => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub potential: PotentialSpec,
    /// `None` only for file sources, which then take the file's grid.
    pub grid: Option<Grid>,
    pub source: Source,
    pub vortex: VortexParams,
    pub radii: RadiusSpec,
    /// Defaults to `L/4` and `L/2`.
    pub pohozaev_radii: Option<Vec<f64>>,
    pub output_dir: PathBuf,
    pub write_field: bool,
    pub expectations: BTreeMap<Property, Expect>,
}

impl Scenario {
    /// Role of `property`: explicit `expect.*` entries first; otherwise the
    /// Modica bound is report-only for vector fields and everything else is
    /// asserted to pass.
    pub fn expectation(&self, property: Property) -> Expect {
        if let Some(&e) = self.expectations.get(&property) {
            return e;
        }
        if property == Property::ModicaPointwise && self.potential.m() > 1 {
            Expect::Report
        } else {
            Expect::Pass
        }
    }

    pub fn artifact(&self, suffix: &str) -> PathBuf {
        self.output_dir.join(format!("{}.{suffix}", self.name))
    }
}

pub struct Builtin {
    pub name: &'static str,
    pub description: &'static str,
    pub config: &'static str,
}

pub const BUILTINS: [Builtin; 6] = [
    Builtin {
        name: "hetero-n2",
        description: "double-well heteroclinic in the plane, solved from u=0 with tanh boundary data",
        config: "\
name = hetero-n2
potential.kind = double-well
grid.n = 2
grid.L = 4
grid.N = 161
source = solve
solve.boundary = heteroclinic
solve.initial = constant:0
solve.step = backtracking
solve.tolerance = 1e-10
solve.max_iterations = 20000
",
    },
    Builtin {
        name: "hetero-n3",
        description: "double-well heteroclinic embedded on a 3D grid",
        config: "\
name = hetero-n3
potential.kind = double-well
grid.n = 3
grid.L = 4
grid.N = 81
source = oracle
source.oracle = heteroclinic
output.field = false
",
    },
    Builtin {
        name: "gl-vortex-n2",
        description: "degree-one Ginzburg-Landau vortex from the radial shooting profile (Modica bound report-only)",
        config: "\
name = gl-vortex-n2
potential.kind = ginzburg-landau
potential.m = 2
grid.n = 2
grid.L = 6
grid.N = 161
source = oracle
source.oracle = vortex
vortex.rmax = 12
vortex.step = 1e-4
",
    },
    Builtin {
        name: "constant-zero",
        description: "u = 0 with the double well (unstable constant solution)",
        config: "\
name = constant-zero
potential.kind = double-well
grid.n = 2
grid.L = 2
grid.N = 101
source = oracle
source.oracle = constant:0
",
    },
    Builtin {
        name: "constant-minimum",
        description: "u = 1 with the double well (zero energy everywhere)",
        config: "\
name = constant-minimum
potential.kind = double-well
grid.n = 2
grid.L = 2
grid.N = 101
source = oracle
source.oracle = constant:1
",
    },
    Builtin {
        name: "negative-control",
        description: "u = x1 with the double well, not a solution; div T expected to FAIL",
        config: "\
name = negative-control
potential.kind = double-well
grid.n = 2
grid.L = 4
grid.N = 161
source = oracle
source.oracle = linear
expect.DivergenceFree = fail
expect.ModicaPointwise = report
expect.WeakTheorem = report
expect.Weak_e = report
expect.StrongTheorem = report
expect.ModicaStrong_e = report
expect.Smyrnelis_w = report
",
    },
];

pub fn list_builtins() -> String {
    let width = BUILTINS.iter().map(|b| b.name.len()).max().unwrap_or(0);
    BUILTINS
        .iter()
        .map(|b| format!("{:width$}  {}\n", b.name, b.description))
        .collect()
}

pub fn builtin(name: &str) -> Result<Scenario> {
    let b = BUILTINS
        .iter()
        .find(|b| b.name == name)
        .ok_or_else(|| Error::UnknownScenario(name.to_string()))?;
    parse_scenario(b.config, Path::new(&format!("builtin:{}", b.name)), None)
}

fn oracle_kind(spec: &OracleSpec, vortex: VortexParams) -> Result<OracleKind> {
    Ok(match spec {
        OracleSpec::Heteroclinic => OracleKind::Heteroclinic,
        OracleSpec::Vortex => OracleKind::Vortex(solve_vortex(vortex.r_max, vortex.step)?),
        OracleSpec::Linear => OracleKind::Linear,
        OracleSpec::Constant(p) => OracleKind::Constant(p.clone()),
    })
}

fn require_grid(s: &Scenario) -> Result<Grid> {
    s.grid
        .ok_or_else(|| Error::Incompatible(format!("scenario {} needs a grid", s.name)))
}

/// Produces the field to audit, with the solver outcome for solve sources.
pub fn prepare_field(s: &Scenario) -> Result<(Field, Option<SolveOutcome>)> {
    match &s.source {
        Source::Oracle(spec) => {
            let grid = require_grid(s)?;
            Ok((
                embed(&oracle_kind(spec, s.vortex)?, grid, &s.potential)?,
                None,
            ))
        }
        Source::Solve { boundary, config } => {
            let grid = require_grid(s)?;
            let boundary = embed(&oracle_kind(boundary, s.vortex)?, grid, &s.potential)?;
            let start = seed(&boundary, &config.initial_guess)?;
            let out = minimize_energy(start, config)?;
            Ok((out.field.clone(), Some(out)))
        }
        Source::File(path) => {
            let field = load_field(path, Some(s.potential.clone()))?;
            if let Some(g) = s.grid {
                if &g != field.grid() {
                    return Err(Error::Incompatible(format!(
                        "{} does not match the configured grid",
                        path.display()
                    )));
                }
            }
            Ok((field, None))
        }
    }
}

pub fn resolve_radii(spec: &RadiusSpec, grid: &Grid) -> Vec<f64> {
    match spec {
        RadiusSpec::Count(k) => default_radii(grid, *k),
        RadiusSpec::List(list) => list.clone(),
    }
}

pub fn default_pohozaev_radii(grid: &Grid) -> Vec<f64> {
    let l = grid.half_width();
    [0.25 * l, 0.5 * l]
        .into_iter()
        .filter(|&r| r >= grid.min_radius() && r <= grid.max_radius())
        .collect()
}

/// Samples per axis keeping the nonnegativity scan near two million
/// evaluations.
fn nonnegativity_samples(m: usize) -> usize {
    let per_axis = (2.0e6f64).powf(1.0 / m as f64).floor() as usize;
    per_axis.clamp(3, 4001)
}

#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub name: String,
    pub verdicts: Vec<(Verdict, Expect)>,
    pub field: Option<Field>,
    pub solve: Option<SolveOutcome>,
    pub tensor: Option<TensorReport>,
    pub profile: Option<RadialProfile>,
}

impl ScenarioRun {
    /// Asserted verdicts whose outcome contradicts their role.
    pub fn unexpected(&self) -> Vec<&Verdict> {
        self.verdicts
            .iter()
            .filter(|(v, e)| !e.satisfied_by(v))
            .map(|(v, _)| v)
            .collect()
    }

    pub fn exit_code(&self) -> i32 {
        if self.unexpected().is_empty() {
            0
        } else {
            1
        }
    }

    pub fn verdict(&self, property: Property) -> Option<&Verdict> {
        self.verdicts
            .iter()
            .map(|(v, _)| v)
            .find(|v| v.property == property)
    }

    pub fn verdict_lines(&self) -> String {
        self.verdicts
            .iter()
            .map(|(v, _)| format!("{}\n", v.summary_line()))
            .collect()
    }

    fn summary_text(&self) -> String {
        let f = crate::fmt_f64;
        let mut s = format!("scenario {}\n", self.name);
        if let Some(field) = &self.field {
            let r = field.residual_norm();
            let _ = writeln!(s, "residual_max          {}", f(r.max_norm));
            let _ = writeln!(s, "residual_l2           {}", f(r.l2_norm));
        }
        if let Some(out) = &self.solve {
            let _ = writeln!(s, "solve_iterations      {}", out.iterations);
            let _ = writeln!(s, "solve_converged       {}", out.converged);
            let _ = writeln!(s, "solve_tolerance       {}", f(out.tolerance));
            let _ = writeln!(
                s,
                "initial_residual_max  {}",
                f(out.initial_residual.max_norm)
            );
            let _ = writeln!(s, "energy_initial        {}", f(out.energy_initial));
            let _ = writeln!(s, "energy_final          {}", f(out.energy_final));
        }
        if let Some(t) = &self.tensor {
            s.push_str(&t.render());
        }
        s
    }
}

/// Runs every check of `s` without writing anything.
pub fn evaluate(s: &Scenario) -> Result<ScenarioRun> {
    let mut run = ScenarioRun {
        name: s.name.clone(),
        verdicts: Vec::new(),
        field: None,
        solve: None,
        tensor: None,
        profile: None,
    };
    let push = |run: &mut ScenarioRun, v: Verdict| {
        let role = s.expectation(v.property);
        run.verdicts.push((v, role));
    };

    let bounds = s.potential.validity_box();
    let nonneg = s
        .potential
        .check_nonnegativity(&bounds, nonnegativity_samples(s.potential.m()))?;
    let nonneg_ok = nonneg.passed;
    push(&mut run, nonneg);
    if !nonneg_ok {
        return Ok(run);
    }

    let (field, solve) = prepare_field(s)?;
    if let Some(out) = &solve {
        push(
            &mut run,
            Verdict::new(
                Property::Converged,
                out.final_residual.max_norm,
                Location::None,
                out.tolerance,
            ),
        );
    }
    let grid = *field.grid();
    let pohozaev = s
        .pohozaev_radii
        .clone()
        .unwrap_or_else(|| default_pohozaev_radii(&grid));
    let tensor = tensor_report(&field, &pohozaev)?;
    for v in tensor.verdicts() {
        push(&mut run, v);
    }
    let profile = build_profile(&field, &resolve_radii(&s.radii, &grid))?;
    for v in audit_profile(&field, &profile)? {
        push(&mut run, v);
    }
    run.field = Some(field);
    run.solve = solve;
    run.tensor = Some(tensor);
    run.profile = Some(profile);
    Ok(run)
}

/// Evaluates `s` and writes its artifacts; returns the run and the paths
/// written.
pub fn run_scenario(s: &Scenario) -> Result<(ScenarioRun, Vec<PathBuf>)> {
    let run = evaluate(s)?;
    fs::create_dir_all(&s.output_dir).map_err(|e| Error::io(&s.output_dir, e))?;
    let mut written = Vec::new();
    let mut put = |suffix: &str, bytes: Vec<u8>| -> Result<()> {
        let path = s.artifact(suffix);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(())
    };

    if run.field.is_some() {
        put("tensor.txt", run.summary_text().into_bytes())?;
    }
    if let Some(profile) = &run.profile {
        let mut buf = Vec::new();
        write_profile_csv(profile, &mut buf)
            .map_err(|e| Error::io(s.artifact("profile.csv"), e))?;
        put("profile.csv", buf)?;
    }
    if let Some(out) = &run.solve {
        let mut text = String::from("step,energy_change\n");
        for (k, d) in out.energy_deltas.iter().enumerate() {
            let _ = writeln!(text, "{},{}", k + 1, crate::fmt_f64(*d));
        }
        put("energy.csv", text.into_bytes())?;
    }
    put("verdicts.csv", run.verdict_lines().into_bytes())?;
    if s.write_field {
        if let Some(field) = &run.field {
            let path = s.artifact("field");
            save_field(field, &path)?;
            written.push(path);
        }
    }
    Ok((run, written))
}

pub fn artifact_names(dir: &Path) -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .map(|rd| rd.filter_map(|e| e.ok().map(|e| e.path())).collect())
        .unwrap_or_default();
    out.sort();
    out
}
