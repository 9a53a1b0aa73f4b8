//! Line-oriented scenario configuration.
//!
//! ```text
//! # comment
//! name = hetero-n2
//! potential.kind = double-well
//! grid.n = 2
//! grid.L = 4
//! grid.N = 161
//! source = solve
//! solve.boundary = heteroclinic
//! solve.initial = constant:0
//! expect.DivergenceFree = pass
//! ```
//!
//! Keys:
//!
//! | key | value |
//! |---|---|
//! | `name` | identifier made of `[A-Za-z0-9_.-]` |
//! | `potential.kind` | `double-well`, `ginzburg-landau`, `custom-polynomial` |
//! | `potential.m` | target dimension (default 1) |
//! | `potential.coefficients` | comma-separated, graded-lex monomial order |
//! | `grid.n`, `grid.L`, `grid.N` | dimension, half-width, points per axis |
//! | `source` | `oracle`, `solve` or `file` |
//! | `source.oracle` | `heteroclinic`, `vortex`, `linear`, `constant:<csv>` |
//! | `source.file` | field file path |
//! | `vortex.rmax`, `vortex.step` | shooting range and RK4 step |
//! | `solve.boundary` | oracle supplying the boundary values |
//! | `solve.initial` | `oracle`, `constant:<csv>`, `file:<path>` |
//! | `solve.step` | `backtracking` or `fixed:<tau>` |
//! | `solve.tolerance`, `solve.max_iterations` | stopping rule |
//! | `radii.count` or `radii.list` | monotonicity radius grid |
//! | `pohozaev.radii` | comma-separated radii for the balance |
//! | `output.dir` | artifact directory |
//! | `output.field` | `true` / `false`: write the field file |
//! | `expect.<Property>` | `pass`, `fail` or `report` |
//!
//! Relative paths are resolved against the directory of the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::field::Grid;
use crate::potential::{PotentialKind, PotentialSpec};
use crate::scenario::{Expect, OracleSpec, RadiusSpec, Scenario, Source, VortexParams};
use crate::solver::{InitialGuess, SolveConfig, StepRule};
use crate::verdict::Property;

const KEYS: &[&str] = &[
    "name",
    "potential.kind",
    "potential.m",
    "potential.coefficients",
    "grid.n",
    "grid.L",
    "grid.N",
    "source",
    "source.oracle",
    "source.file",
    "vortex.rmax",
    "vortex.step",
    "solve.boundary",
    "solve.initial",
    "solve.step",
    "solve.tolerance",
    "solve.max_iterations",
    "radii.count",
    "radii.list",
    "pohozaev.radii",
    "output.dir",
    "output.field",
];

struct Entries {
    path: PathBuf,
    last_line: usize,
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut last_line = 1;
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            last_line = line;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| Error::Config {
                path: path.to_path_buf(),
                line,
                message,
            };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected 'key = value', got '{content}'")))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) && !key.starts_with("expect.") {
                return Err(err(format!("unknown key '{key}'")));
            }
            if value.is_empty() {
                return Err(err(format!("empty value for '{key}'")));
            }
            if let Some((first, _)) = map.insert(key.to_string(), (line, value.to_string())) {
                return Err(err(format!(
                    "duplicate key '{key}' (first set on line {first})"
                )));
            }
        }
        Ok(Entries {
            path: path.to_path_buf(),
            last_line,
            map,
        })
    }

    fn error(&self, line: usize, message: String) -> Error {
        Error::Config {
            path: self.path.clone(),
            line,
            message,
        }
    }

    fn get(&self, key: &str) -> Option<(usize, &str)> {
        self.map.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn require(&self, key: &str) -> Result<(usize, &str)> {
        self.get(key)
            .ok_or_else(|| self.error(self.last_line, format!("missing required key '{key}'")))
    }

    fn parse_as<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| self.error(line, format!("'{key}' must be {what}, got '{v}'"))),
        }
    }

    fn floats(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some((line, v)) => parse_csv(v)
                .map(Some)
                .map_err(|m| self.error(line, format!("'{key}': {m}"))),
        }
    }
}

fn parse_csv(v: &str) -> std::result::Result<Vec<f64>, String> {
    v.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("bad number '{t}'"))
        })
        .collect()
}

fn parse_oracle(v: &str) -> std::result::Result<OracleSpec, String> {
    match v {
        "heteroclinic" => Ok(OracleSpec::Heteroclinic),
        "vortex" => Ok(OracleSpec::Vortex),
        "linear" => Ok(OracleSpec::Linear),
        _ => match v.strip_prefix("constant:") {
            Some(csv) => parse_csv(csv).map(OracleSpec::Constant),
            None => Err(format!("unknown oracle '{v}'")),
        },
    }
}

fn resolve(base: Option<&Path>, p: &str) -> PathBuf {
    let p = Path::new(p);
    match base {
        Some(b) if p.is_relative() => b.join(p),
        _ => p.to_path_buf(),
    }
}

pub fn is_valid_name(name: &str) -> bool {
    !name.is_empty()
        && name != "."
        && name != ".."
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

/// Parses config text. `origin` is used in error messages and, when
/// `base_dir` is `None`, its parent directory resolves relative paths.
pub fn parse_scenario(text: &str, origin: &Path, base_dir: Option<&Path>) -> Result<Scenario> {
    let e = Entries::parse(text, origin)?;
    let base = base_dir
        .map(Path::to_path_buf)
        .or_else(|| origin.parent().map(Path::to_path_buf));
    let base = base.as_deref().filter(|b| !b.as_os_str().is_empty());

    let (line, name) = e.require("name")?;
    if !is_valid_name(name) {
        return Err(e.error(line, format!("name '{name}' is not filesystem-safe")));
    }

    let (kind_line, kind) = e.require("potential.kind")?;
    let kind: PotentialKind = kind.parse().map_err(|m| e.error(kind_line, m))?;
    let m = e
        .parse_as::<usize>("potential.m", "a positive integer")?
        .unwrap_or(1);
    let coefficients = e.floats("potential.coefficients")?.unwrap_or_default();
    let potential = PotentialSpec::new(kind, m, coefficients)
        .map_err(|err| e.error(kind_line, err.to_string()))?;

    let (src_line, source_kind) = e.require("source")?;
    let oracle_of = |key: &str| -> Result<OracleSpec> {
        let (line, v) = e.require(key)?;
        parse_oracle(v).map_err(|m| e.error(line, m))
    };
    let source = match source_kind {
        "oracle" => Source::Oracle(oracle_of("source.oracle")?),
        "file" => {
            let (_, p) = e.require("source.file")?;
            Source::File(resolve(base, p))
        }
        "solve" => {
            let boundary = oracle_of("solve.boundary")?;
            let mut config = SolveConfig::default();
            if let Some(it) =
                e.parse_as::<usize>("solve.max_iterations", "a nonnegative integer")?
            {
                config.max_iterations = it;
            }
            config.tolerance = e.parse_as::<f64>("solve.tolerance", "a number")?;
            if let Some((line, v)) = e.get("solve.step") {
                config.step_rule = match v {
                    "backtracking" => StepRule::BacktrackingLineSearch,
                    _ => match v.strip_prefix("fixed:").map(str::parse::<f64>) {
                        Some(Ok(tau)) => StepRule::FixedStep(tau),
                        _ => return Err(e.error(line, format!("bad step rule '{v}'"))),
                    },
                };
            }
            if let Some((line, v)) = e.get("solve.initial") {
                config.initial_guess = if v == "oracle" {
                    InitialGuess::OracleEmbedding
                } else if let Some(csv) = v.strip_prefix("constant:") {
                    InitialGuess::Constant(parse_csv(csv).map_err(|m| e.error(line, m))?)
                } else if let Some(p) = v.strip_prefix("file:") {
                    InitialGuess::FileLoad(resolve(base, p))
                } else {
                    return Err(e.error(line, format!("bad initial guess '{v}'")));
                };
            }
            Source::Solve { boundary, config }
        }
        other => return Err(e.error(src_line, format!("unknown source '{other}'"))),
    };

    let grid_keys = ["grid.n", "grid.L", "grid.N"];
    let grid = if matches!(source, Source::File(_)) && grid_keys.iter().all(|k| e.get(k).is_none())
    {
        None
    } else {
        let (n_line, _) = e.require("grid.n")?;
        let (l_line, _) = e.require("grid.L")?;
        let (np_line, _) = e.require("grid.N")?;
        let n = e.parse_as::<usize>("grid.n", "2 or 3")?.unwrap();
        let half = e.parse_as::<f64>("grid.L", "a number")?.unwrap();
        let np = e.parse_as::<usize>("grid.N", "an odd integer")?.unwrap();
        if n != 2 && n != 3 {
            return Err(e.error(n_line, format!("grid.n must be 2 or 3, got {n}")));
        }
        if !(half > 0.0 && half.is_finite()) {
            return Err(e.error(l_line, format!("grid.L must be positive, got {half}")));
        }
        if np < 5 || np.is_multiple_of(2) {
            return Err(e.error(
                np_line,
                format!("grid.N must be odd and at least 5, got {np}"),
            ));
        }
        Some(Grid::new(n, half, np).map_err(|err| e.error(n_line, err.to_string()))?)
    };

    let mut vortex = VortexParams::default();
    if let Some(r) = e.parse_as::<f64>("vortex.rmax", "a number")? {
        vortex.r_max = r;
    }
    if let Some(s) = e.parse_as::<f64>("vortex.step", "a number")? {
        vortex.step = s;
    }

    let radii = match (e.get("radii.count"), e.floats("radii.list")?) {
        (Some((line, _)), Some(_)) => {
            return Err(e.error(
                line,
                "give either radii.count or radii.list, not both".into(),
            ))
        }
        (_, Some(list)) => RadiusSpec::List(list),
        (Some(_), None) => {
            RadiusSpec::Count(e.parse_as::<usize>("radii.count", "an integer")?.unwrap())
        }
        (None, None) => RadiusSpec::default(),
    };

    let output_dir = match e.get("output.dir") {
        Some((_, d)) => resolve(base, d),
        None => resolve(base, "monoflux-output"),
    };
    let write_field = e
        .parse_as::<bool>("output.field", "true or false")?
        .unwrap_or(true);

    let mut expectations = BTreeMap::new();
    for (key, (line, v)) in e.map.range("expect.".to_string()..) {
        let Some(prop) = key.strip_prefix("expect.") else {
            break;
        };
        let prop = Property::from_name(prop)
            .ok_or_else(|| e.error(*line, format!("unknown property '{prop}'")))?;
        let role = match v.as_str() {
            "pass" => Expect::Pass,
            "fail" => Expect::Fail,
            "report" => Expect::Report,
            other => {
                return Err(e.error(
                    *line,
                    format!("expectation must be pass, fail or report, got '{other}'"),
                ))
            }
        };
        expectations.insert(prop, role);
    }

    Ok(Scenario {
        name: name.to_string(),
        potential,
        grid,
        source,
        vortex,
        radii,
        pohozaev_radii: e.floats("pohozaev.radii")?,
        output_dir,
        write_field,
        expectations,
    })
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|err| Error::io(path, err))?;
    parse_scenario(&text, path, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = "\
# a comment
name = demo
potential.kind = double-well   # trailing comment
grid.n = 2
grid.L = 4
grid.N = 81
source = oracle
source.oracle = heteroclinic
expect.DivergenceFree = fail
";

    fn parse(text: &str) -> Result<Scenario> {
        parse_scenario(text, Path::new("cfg/test.conf"), None)
    }

    fn line_of(err: Error) -> usize {
        match err {
            Error::Config { line, .. } => line,
            other => panic!("not a config error: {other}"),
        }
    }

    #[test]
    fn parses_basic_config() {
        let s = parse(BASIC).unwrap();
        assert_eq!(s.name, "demo");
        assert_eq!(s.grid.unwrap().points_per_axis(), 81);
        assert_eq!(s.source, Source::Oracle(OracleSpec::Heteroclinic));
        assert_eq!(
            s.expectations.get(&Property::DivergenceFree),
            Some(&Expect::Fail)
        );
        assert_eq!(s.output_dir, Path::new("cfg/monoflux-output"));
        assert!(s.write_field);
    }

    #[test]
    fn missing_potential_kind_is_reported() {
        let text = BASIC.replace("potential.kind = double-well   # trailing comment\n", "");
        let err = parse(&text).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("potential.kind"));
        assert!(err.to_string().starts_with("cfg/test.conf:"));
    }

    #[test]
    fn errors_point_at_the_line() {
        assert_eq!(
            line_of(parse(&BASIC.replace("grid.N = 81", "grid.N = 80")).unwrap_err()),
            6
        );
        assert_eq!(
            line_of(parse(&BASIC.replace("grid.N = 81", "grid.N 81")).unwrap_err()),
            6
        );
        assert_eq!(
            line_of(parse(&format!("{BASIC}grid.n = 3\n")).unwrap_err()),
            10
        );
        assert_eq!(
            line_of(parse(&format!("{BASIC}colour = red\n")).unwrap_err()),
            10
        );
        assert_eq!(
            line_of(parse(&format!("{BASIC}expect.Bogus = pass\n")).unwrap_err()),
            10
        );
        assert_eq!(
            line_of(parse(&BASIC.replace("heteroclinic", "soliton")).unwrap_err()),
            8
        );
    }

    #[test]
    fn solve_source_options() {
        let text = BASIC.replace(
            "source = oracle\nsource.oracle = heteroclinic\n",
            "source = solve\nsolve.boundary = constant:1\nsolve.initial = file:start.field\nsolve.step = fixed:1e-4\nsolve.tolerance = 1e-9\n",
        );
        let s = parse(&text).unwrap();
        let Source::Solve { boundary, config } = s.source else {
            panic!()
        };
        assert_eq!(boundary, OracleSpec::Constant(vec![1.0]));
        assert_eq!(config.step_rule, StepRule::FixedStep(1e-4));
        assert_eq!(config.tolerance, Some(1e-9));
        assert_eq!(
            config.initial_guess,
            InitialGuess::FileLoad("cfg/start.field".into())
        );
    }

    #[test]
    fn file_source_may_omit_grid() {
        let text = "name = f\npotential.kind = ginzburg-landau\npotential.m = 2\nsource = file\nsource.file = /tmp/x.field\nradii.list = 1,2,3\n";
        let s = parse(text).unwrap();
        assert!(s.grid.is_none());
        assert_eq!(s.radii, RadiusSpec::List(vec![1.0, 2.0, 3.0]));
        assert_eq!(s.source, Source::File("/tmp/x.field".into()));
    }

    #[test]
    fn names_must_be_filesystem_safe() {
        assert!(is_valid_name("hetero-n2"));
        assert!(!is_valid_name("a/b"));
        assert!(!is_valid_name(".."));
        assert!(parse(&BASIC.replace("name = demo", "name = a b")).is_err());
    }
}
