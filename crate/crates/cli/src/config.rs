//! Effective run configuration: command-line flags over the config file
//! over built-in defaults, with `CAPFILM_OUT` overriding the file and the
//! default output directory.

use std::path::{Path, PathBuf};

use capfilm::foliation::{geometric_grid, SolverKind};
use capfilm::geometry::WireSpec;
use capfilm::mesh::SolveParams;
use serde::{Deserialize, Serialize};

/// Values a config file may set. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub wire: Option<WireSpec>,
    pub delta: Option<f64>,
    pub eps: Option<f64>,
    pub eps_grid: Option<GridSpec>,
    pub solver: Option<SolverKind>,
    pub target_edge: Option<f64>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub mesh: Option<SolveParams>,
}

/// Either `"lo:hi:n"` or an explicit list.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Text(String),
    List(Vec<f64>),
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>, String> {
        match self {
            GridSpec::List(v) => Ok(v.clone()),
            GridSpec::Text(s) => parse_grid(s),
        }
    }
}

/// `lo:hi:n`, geometric and inclusive.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("eps grid '{s}' must look like lo:hi:n"));
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| format!("bad lower bound in '{s}'"))?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| format!("bad upper bound in '{s}'"))?;
    let n: usize = parts[2].trim().parse().map_err(|_| format!("bad point count in '{s}'"))?;
    if n == 1 && lo == hi {
        return Ok(vec![lo]);
    }
    geometric_grid(lo, hi, n).map_err(|e| e.to_string())
}

/// `circle`, `circle:R` or `ellipse:A,B`.
pub fn parse_wire(s: &str) -> Result<WireSpec, String> {
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    let nums = || -> Result<Vec<f64>, String> {
        rest.split(',')
            .filter(|x| !x.trim().is_empty())
            .map(|x| x.trim().parse::<f64>().map_err(|_| format!("bad number '{x}' in wire '{s}'")))
            .collect()
    };
    match kind {
        "circle" => match nums()?.as_slice() {
            [] => Ok(WireSpec::Circle { radius: 1.0 }),
            [r] => Ok(WireSpec::Circle { radius: *r }),
            _ => Err(format!("circle takes one radius, got '{s}'")),
        },
        "ellipse" => match nums()?.as_slice() {
            [a, b] => Ok(WireSpec::Ellipse { a: *a, b: *b }),
            _ => Err(format!("ellipse needs two semi-axes, got '{s}'")),
        },
        _ => Err(format!("unknown wire '{s}' (circle, circle:R, ellipse:A,B; splines via --config)")),
    }
}

/// Flag values; `None` means "not given on the command line".
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub wire: Option<WireSpec>,
    pub delta: Option<f64>,
    pub eps: Option<f64>,
    pub eps_grid: Option<Vec<f64>>,
    pub solver: Option<SolverKind>,
    pub target_edge: Option<f64>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

/// The configuration actually used, echoed into every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub wire: WireSpec,
    pub delta: f64,
    pub eps: f64,
    pub eps_grid: Vec<f64>,
    pub solver: SolverKind,
    pub mesh: SolveParams,
    pub out: PathBuf,
    pub jobs: usize,
}

pub const DEFAULT_OUT: &str = "capfilm-out";

impl RunConfig {
    pub fn resolve(file: Option<&Path>, flags: Overrides, env_out: Option<PathBuf>) -> Result<Self, String> {
        let fc = match file {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| format!("cannot read config {}: {e}", p.display()))?;
                serde_json::from_str::<FileConfig>(&text).map_err(|e| format!("config {}: {e}", p.display()))?
            }
            None => FileConfig::default(),
        };
        let mut mesh = fc.mesh.clone().unwrap_or_default();
        if let Some(h) = flags.target_edge.or(fc.target_edge) {
            mesh.target_edge = h;
        }
        if let Some(t) = flags.tol.or(fc.tol) {
            mesh.tol = t;
        }
        let eps_grid = match (flags.eps_grid, &fc.eps_grid) {
            (Some(g), _) => g,
            (None, Some(g)) => g.values()?,
            (None, None) => geometric_grid(1e-4, 0.05, 8).map_err(|e| e.to_string())?,
        };
        let cfg = RunConfig {
            wire: flags.wire.or(fc.wire).unwrap_or(WireSpec::Circle { radius: 1.0 }),
            delta: flags.delta.or(fc.delta).unwrap_or(0.1),
            eps: flags.eps.or(fc.eps).unwrap_or(0.05),
            eps_grid,
            solver: flags.solver.or(fc.solver).unwrap_or(SolverKind::Cap),
            mesh,
            out: flags
                .out
                .or(env_out)
                .or(fc.out)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
            jobs: flags.jobs.or(fc.jobs).unwrap_or(1),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), String> {
        let finite = |name: &str, x: f64| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(format!("{name} = {x} is not finite"))
            }
        };
        finite("delta", self.delta)?;
        finite("eps", self.eps)?;
        finite("target_edge", self.mesh.target_edge)?;
        finite("tol", self.mesh.tol)?;
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return Err(format!("delta = {} must lie in (0, 0.5)", self.delta));
        }
        if !(self.eps > 0.0) {
            return Err(format!("eps = {} must be positive", self.eps));
        }
        if self.eps_grid.is_empty() {
            return Err("eps grid is empty".into());
        }
        for (k, e) in self.eps_grid.iter().enumerate() {
            finite("eps grid value", *e)?;
            if !(*e > 0.0) {
                return Err(format!("eps grid value {e} must be positive"));
            }
            if k > 0 && !(*e > self.eps_grid[k - 1]) {
                return Err("eps grid must be strictly increasing".into());
            }
        }
        if !(self.mesh.target_edge > 0.0 && self.mesh.tol > 0.0) {
            return Err("target_edge and tol must be positive".into());
        }
        if self.jobs == 0 {
            return Err("jobs must be at least 1".into());
        }
        self.wire.build().map_err(|e| e.to_string())?;
        Ok(())
    }

    /// Creates the output directory and checks that it is writable.
    pub fn prepare_out(&self) -> Result<(), String> {
        std::fs::create_dir_all(&self.out).map_err(|e| format!("output directory {}: {e}", self.out.display()))?;
        tempfile::NamedTempFile::new_in(&self.out)
            .map(drop)
            .map_err(|e| format!("output directory {} is not writable: {e}", self.out.display()))
    }

    pub fn parallel(&self) -> bool {
        self.jobs > 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g = parse_grid("1e-4:0.05:8").unwrap();
        assert_eq!(g.len(), 8);
        assert_eq!(g[0], 1e-4);
        assert_eq!(g[7], 0.05);
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("0.1:0.01:3").is_err());
        assert_eq!(parse_grid("0.01:0.01:1").unwrap(), vec![0.01]);
    }

    #[test]
    fn wire_parsing() {
        assert_eq!(parse_wire("circle").unwrap(), WireSpec::Circle { radius: 1.0 });
        assert_eq!(parse_wire("ellipse:1.3,0.8").unwrap(), WireSpec::Ellipse { a: 1.3, b: 0.8 });
        assert!(parse_wire("square").is_err());
        assert!(parse_wire("ellipse:1").is_err());
    }

    #[test]
    fn precedence() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"delta": 0.05, "eps": 0.01, "out": "from-file", "target_edge": 0.02}"#).unwrap();
        let flags = Overrides {
            eps: Some(0.02),
            ..Default::default()
        };
        let c = RunConfig::resolve(Some(&p), flags.clone(), None).unwrap();
        assert_eq!((c.delta, c.eps, c.mesh.target_edge), (0.05, 0.02, 0.02));
        assert_eq!(c.out, PathBuf::from("from-file"));
        let c = RunConfig::resolve(Some(&p), flags.clone(), Some("from-env".into())).unwrap();
        assert_eq!(c.out, PathBuf::from("from-env"));
        let with_out = Overrides {
            out: Some("from-flag".into()),
            ..flags
        };
        let c = RunConfig::resolve(Some(&p), with_out, Some("from-env".into())).unwrap();
        assert_eq!(c.out, PathBuf::from("from-flag"));
    }

    #[test]
    fn invalid_values_are_rejected() {
        let bad = |o: Overrides| RunConfig::resolve(None, o, None).is_err();
        assert!(bad(Overrides { delta: Some(0.6), ..Default::default() }));
        assert!(bad(Overrides { eps: Some(-1.0), ..Default::default() }));
        assert!(bad(Overrides { delta: Some(f64::NAN), ..Default::default() }));
        assert!(bad(Overrides { eps_grid: Some(vec![0.1, 0.01]), ..Default::default() }));
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"delta": 0.05, "colour": 3}"#).unwrap();
        assert!(RunConfig::resolve(Some(&p), Overrides::default(), None).is_err());
    }
}
