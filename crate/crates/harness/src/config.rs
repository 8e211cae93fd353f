//! Flat `key = value` experiment files.
//!
//! Blank lines and text after `#` are ignored. Keys may appear in any order;
//! later assignments win, which is also how `--override` works.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ddlab::fe::{LoadSpec, MaterialField, MaterialPattern, Physics};
use ddlab::mesh::{GridSpec, Redundancy};
use ddlab::{two_spring_decomposition, Decomposition, NodalLoad, ProblemSpec, RawAssignment, Scaling, SolveOptions, Stopping, Strategies};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub problem: Problem,
    pub options: SolveOptions,
    /// Relative error against the direct oracle accepted by validation.
    pub oracle_tolerance: f64,
    /// Skip the oracle comparison (for problems too large to factor).
    pub validate: bool,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    /// Normalized assignments, used for hashing and echoing.
    entries: BTreeMap<String, String>,
}

/// What the experiment discretizes.
#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Grid(ProblemSpec),
    /// Two springs in a row, node 0 clamped, one spring per subdomain.
    TwoSpring { stiffness: [f64; 2], loads: [f64; 3] },
}

impl Problem {
    pub fn build(&self) -> ddlab::Result<Decomposition> {
        match self {
            Problem::Grid(spec) => spec.build(),
            Problem::TwoSpring { stiffness, loads } => two_spring_decomposition(stiffness[0], stiffness[1], *loads),
        }
    }

    pub fn grid(&self) -> Option<&ProblemSpec> {
        match self {
            Problem::Grid(spec) => Some(spec),
            Problem::TwoSpring { .. } => None,
        }
    }
}

const KEYS: &[&str] = &[
    "name",
    "problem",
    "spring_stiffness",
    "spring_loads",
    "dimension",
    "elements",
    "subdomains",
    "element_size",
    "slant",
    "physics",
    "material",
    "contrast",
    "stiff",
    "soft",
    "poisson",
    "layer_axis",
    "load_axis",
    "pressure",
    "nodal_loads",
    "redundancy",
    "raw_assignment",
    "solver",
    "projector",
    "preconditioner",
    "scaling",
    "splitting",
    "init",
    "epsilon",
    "max_iterations",
    "stopping",
    "seed",
    "oracle_tolerance",
    "validate",
    "csv",
    "svg",
];

/// Keys that only name outputs; they do not change the computation.
const OUTPUT_KEYS: &[&str] = &["name", "csv", "svg"];

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io(path.to_path_buf(), e))?;
        let mut entries = parse_entries(&text).map_err(|msg| HarnessError::Config(format!("{}: {msg}", path.display())))?;
        if !entries.contains_key("name") {
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            entries.insert("name".into(), stem);
        }
        Self::from_entries(entries)
    }

    /// Applies `key=value` assignments on top of this configuration.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self> {
        let mut entries = self.entries.clone();
        for o in overrides {
            let (k, v) = split_assignment(o.as_ref()).map_err(HarnessError::Config)?;
            entries.insert(k, v);
        }
        Self::from_entries(entries)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Short hex digest of every assignment that affects the computation.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for (k, v) in &self.entries {
            if !OUTPUT_KEYS.contains(&k.as_str()) {
                h.update(format!("{k}={v}\n").as_bytes());
            }
        }
        hex::encode(&h.finalize()[..4])
    }

    fn from_entries(entries: BTreeMap<String, String>) -> Result<Self> {
        for k in entries.keys() {
            if !KEYS.contains(&k.as_str()) {
                return Err(HarnessError::Config(format!("unknown key `{k}`; known keys: {}", KEYS.join(", "))));
            }
        }
        let r = Reader(&entries);

        let problem = match r.str_or("problem", "grid") {
            "grid" => Problem::Grid(grid_problem(&r)?),
            "spring2" => {
                let k: Vec<f64> = r.list_or("spring_stiffness", 2, vec![1.0, 1.0])?;
                let f: Vec<f64> = r.list_or("spring_loads", 3, vec![0.0, 0.0, 1.0])?;
                if k.iter().any(|&v| !(v > 0.0)) {
                    return Err(HarnessError::Config("spring_stiffness must be positive".into()));
                }
                Problem::TwoSpring {
                    stiffness: [k[0], k[1]],
                    loads: [f[0], f[1], f[2]],
                }
            }
            other => return Err(HarnessError::Config(format!("problem `{other}`; expected grid or spring2"))),
        };

        let defaults = SolveOptions::default();
        let options = SolveOptions {
            solver: r.str_or("solver", &defaults.solver).into(),
            projector: r.str_or("projector", &defaults.projector).into(),
            preconditioner: r.str_or("preconditioner", &defaults.preconditioner).into(),
            scaling: Scaling::parse(r.str_or("scaling", defaults.scaling.name()))?,
            splitting: r.str_or("splitting", &defaults.splitting).into(),
            initialization: r.str_or("init", &defaults.initialization).into(),
            tol: r.parse_or("epsilon", defaults.tol)?,
            max_iter: r.parse_or("max_iterations", defaults.max_iter)?,
            stopping: Stopping::parse(r.str_or("stopping", "global"))?,
            seed: r.parse_or("seed", defaults.seed)?,
        };
        if !(options.tol > 0.0) {
            return Err(HarnessError::Config(format!("epsilon must be positive, got {}", options.tol)));
        }
        check_strategies(&options)?;

        let oracle_tolerance: f64 = r.parse_or("oracle_tolerance", 1e-4)?;
        if !(oracle_tolerance > 0.0) {
            return Err(HarnessError::Config("oracle_tolerance must be positive".into()));
        }
        Ok(Self {
            name: r.str_or("name", "experiment").into(),
            problem,
            options,
            oracle_tolerance,
            validate: r.parse_or("validate", true)?,
            csv: r.get("csv").filter(|p| !p.is_empty()).map(PathBuf::from),
            svg: r.get("svg").filter(|p| !p.is_empty()).map(PathBuf::from),
            entries,
        })
    }
}

impl FromStr for ExperimentConfig {
    type Err = HarnessError;

    fn from_str(text: &str) -> Result<Self> {
        Self::from_entries(parse_entries(text).map_err(HarnessError::Config)?)
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

fn grid_problem(r: &Reader) -> Result<ProblemSpec> {
    let dimension: usize = r.parse_or("dimension", 2)?;
    if dimension != 2 && dimension != 3 {
        return Err(HarnessError::Config(format!("dimension must be 2 or 3, got {dimension}")));
    }
    let subdomains: Vec<usize> = r.list_or("subdomains", dimension, vec![3; dimension])?;
    let elements: Vec<usize> = r.list_or("elements", dimension, subdomains.iter().map(|s| s * 6).collect())?;
    let element_size: Vec<f64> = r.list_or("element_size", dimension, vec![1.0; dimension])?;
    let grid = GridSpec::new(&elements, &subdomains)
        .with_element_size(&element_size)
        .with_slant(r.parse_or("slant", 0.0)?);
    grid.validate()?;

    let physics = Physics::parse(r.str_or("physics", "scalar"))?;
    let load_axis: usize = r.parse_or("load_axis", dimension - 1)?;
    let pattern = match r.str_or("material", "uniform") {
        "uniform" => MaterialPattern::Uniform,
        "checkerboard" => MaterialPattern::Checkerboard,
        "layers" => MaterialPattern::Layers {
            axis: r.parse_or("layer_axis", dimension - 1)?,
        },
        other => {
            return Err(HarnessError::Config(format!(
                "material `{other}`; expected uniform, checkerboard or layers"
            )))
        }
    };
    let soft: f64 = r.parse_or("soft", 1.0)?;
    let stiff: f64 = match (r.get("stiff"), r.get("contrast")) {
        (Some(_), Some(_)) => return Err(HarnessError::Config("give either `stiff` or `contrast`, not both".into())),
        (Some(_), None) => r.parse_or("stiff", 1.0)?,
        (None, Some(_)) => soft * r.parse_or::<f64>("contrast", 1.0)?,
        (None, None) if pattern == MaterialPattern::Uniform => soft,
        (None, None) => soft * 1e5,
    };
    let material = MaterialField {
        pattern,
        stiff,
        soft,
        poisson: r.parse_or("poisson", 0.3)?,
    };
    material.validate()?;

    Ok(ProblemSpec {
        grid,
        physics,
        material,
        load: LoadSpec {
            axis: load_axis,
            pressure: r.parse_or("pressure", 1.0)?,
        },
        nodal: parse_nodal(r.str_or("nodal_loads", ""))?,
        redundancy: match r.str_or("redundancy", "non-redundant") {
            "non-redundant" => Redundancy::NonRedundant,
            "fully-redundant" => Redundancy::FullyRedundant,
            other => {
                return Err(HarnessError::Config(format!(
                    "redundancy `{other}`; expected non-redundant or fully-redundant"
                )))
            }
        },
        assignment: RawAssignment::parse(r.str_or("raw_assignment", "owner"))?,
    })
}

/// Rejects strategy names the default registry does not know.
fn check_strategies(o: &SolveOptions) -> Result<()> {
    let s = Strategies::default();
    s.solvers.get(&o.solver)?;
    s.projectors.get(&o.projector)?;
    s.preconditioners.get(&o.preconditioner)?;
    s.splittings.get(&o.splitting)?;
    s.initializations.get(&o.initialization)?;
    Ok(())
}

fn parse_entries(text: &str) -> std::result::Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = split_assignment(line).map_err(|e| format!("line {}: {e}", i + 1))?;
        out.insert(k, v);
    }
    Ok(out)
}

fn split_assignment(s: &str) -> std::result::Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key = value, got `{s}`"))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(format!("missing key in `{s}`"));
    }
    Ok((k.to_string(), v.trim().to_string()))
}

/// `node:component:value` triples separated by `;`.
fn parse_nodal(s: &str) -> Result<Vec<NodalLoad>> {
    s.split(';')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let bad = || HarnessError::Config(format!("nodal load `{t}`; expected node:component:value"));
            let parts: Vec<&str> = t.split(':').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(bad());
            }
            Ok(NodalLoad {
                node: parts[0].parse().map_err(|_| bad())?,
                component: parts[1].parse().map_err(|_| bad())?,
                value: parts[2].parse().map_err(|_| bad())?,
            })
        })
        .collect()
}

struct Reader<'a>(&'a BTreeMap<String, String>);

impl Reader<'_> {
    fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn str_or<'s>(&'s self, key: &str, default: &'s str) -> &'s str {
        self.get(key).unwrap_or(default)
    }

    fn parse_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| HarnessError::Config(format!("`{key}`: cannot parse `{v}`"))),
        }
    }

    /// Comma-separated list; a single value is repeated `len` times.
    fn list_or<T: std::str::FromStr + Clone>(&self, key: &str, len: usize, default: Vec<T>) -> Result<Vec<T>> {
        let Some(v) = self.get(key) else { return Ok(default) };
        let items = v
            .split(',')
            .map(|t| t.trim().parse::<T>())
            .collect::<std::result::Result<Vec<T>, _>>()
            .map_err(|_| HarnessError::Config(format!("`{key}`: cannot parse `{v}`")))?;
        match items.len() {
            1 => Ok(vec![items[0].clone(); len]),
            n if n == len => Ok(items),
            n => Err(HarnessError::Config(format!("`{key}` has {n} entries, expected 1 or {len}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_mirror_the_reference_settings() {
        let c = ExperimentConfig::from_str("").unwrap();
        assert_eq!(c.options.tol, 1e-6);
        assert_eq!(c.options.scaling, Scaling::Stiffness);
        assert_eq!(c.options.preconditioner, "dirichlet");
        assert_eq!(c.problem.grid().unwrap().grid.elements_per_axis, vec![18, 18]);
    }

    #[test]
    fn comments_lists_and_overrides() {
        let c = ExperimentConfig::from_str(
            "# heading\ndimension = 3\nsubdomains = 2  # per axis\nelements = 4,4,6\nmaterial = checkerboard\ncontrast = 1e3\n",
        )
        .unwrap();
        assert_eq!(c.problem.grid().unwrap().grid.subdomains_per_axis, vec![2, 2, 2]);
        assert_eq!(c.problem.grid().unwrap().grid.elements_per_axis, vec![4, 4, 6]);
        assert_eq!(c.problem.grid().unwrap().material.stiff, 1e3);
        let d = c.with_overrides(&["init=standard", "epsilon = 1e-8"]).unwrap();
        assert_eq!(d.options.initialization, "standard");
        assert_eq!(d.options.tol, 1e-8);
        assert_ne!(c.hash(), d.hash());
        assert_eq!(c.hash(), c.with_overrides(&["csv=out.csv"]).unwrap().hash());
    }

    #[test]
    fn invalid_settings_are_rejected() {
        for bad in [
            "epsilon = 0",
            "epsilon = -1",
            "projector = nonsense",
            "solver = multigrid",
            "frobnicate = 1",
            "dimension = 4",
            "elements = 5\nsubdomains = 2",
            "material = marble",
            "slant = 90",
            "nodal_loads = 1:2",
            "just words",
        ] {
            assert!(ExperimentConfig::from_str(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn two_spring_problem() {
        let c = ExperimentConfig::from_str("problem = spring2\nspring_stiffness = 10, 1\nspring_loads = 0,1,0").unwrap();
        assert_eq!(
            c.problem,
            Problem::TwoSpring {
                stiffness: [10.0, 1.0],
                loads: [0.0, 1.0, 0.0]
            }
        );
        assert_eq!(c.problem.build().unwrap().len(), 2);
        assert!(ExperimentConfig::from_str("problem = spring2\nspring_stiffness = 0,1").is_err());
        assert!(ExperimentConfig::from_str("problem = torus").is_err());
    }

    #[test]
    fn nodal_loads_parse() {
        let c = ExperimentConfig::from_str("nodal_loads = 3:0:1.5; 7:0:-2").unwrap();
        assert_eq!(c.problem.grid().unwrap().nodal.len(), 2);
        assert_eq!(c.problem.grid().unwrap().nodal[1].value, -2.0);
    }
}
