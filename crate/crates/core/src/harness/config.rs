//! Experiment configuration, read from TOML.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::departure::Stage2Params;
use crate::instance::{
    generate_td_parameters, parse_classic_dat, parse_instance, random_base, Instance, InstanceType,
    IntervalPolicy,
};
use crate::memetic::MemeticParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(format!("unknown format `{s}`")),
        }
    }
}

/// Dimensions of a random classic base graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomBaseSpec {
    pub vertices: usize,
    pub edges: usize,
    pub required: usize,
    #[serde(default = "default_max_cost")]
    pub max_cost: u32,
    #[serde(default = "default_max_demand")]
    pub max_demand: u32,
    pub capacity: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_max_cost() -> u32 {
    20
}

fn default_max_demand() -> u32 {
    5
}

/// Where one instance comes from: an extended file, or a classic file or
/// random base graph turned time-dependent by the generator.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InstanceSpec {
    pub name: Option<String>,
    pub path: Option<PathBuf>,
    pub classic: Option<PathBuf>,
    pub random: Option<RandomBaseSpec>,
    #[serde(rename = "type")]
    pub instance_type: Option<InstanceType>,
    pub slope: Option<f64>,
    pub policy: Option<IntervalPolicy>,
    pub gen_seed: u64,
    /// Cost for the time-to-target protocol.
    pub target: Option<f64>,
    /// Reference cost for the degradation rate.
    pub reference: Option<f64>,
}

impl InstanceSpec {
    pub fn label(&self) -> String {
        if let Some(n) = &self.name {
            return n.clone();
        }
        let file = self.path.as_ref().or(self.classic.as_ref());
        match file {
            Some(p) => p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into()),
            None => "random".into(),
        }
    }

    /// Loads or generates the instance; relative paths resolve against `base_dir`.
    pub fn load(&self, base_dir: &Path) -> Result<Instance<f64>, String> {
        let resolve = |p: &PathBuf| if p.is_absolute() { p.clone() } else { base_dir.join(p) };
        if let Some(p) = &self.path {
            let mut inst = parse_instance(&resolve(p)).map_err(|e| format!("{}: {e}", p.display()))?;
            if let Some(n) = &self.name {
                inst.name = n.clone();
            }
            return Ok(inst);
        }
        let base = match (&self.classic, &self.random) {
            (Some(p), None) => {
                let text = std::fs::read_to_string(resolve(p)).map_err(|e| format!("{}: {e}", p.display()))?;
                parse_classic_dat(&text).map_err(|e| format!("{}: {e}", p.display()))?
            }
            (None, Some(r)) => random_base(
                &self.name.clone().unwrap_or_else(|| format!("rnd{}", r.seed)),
                r.vertices,
                r.edges,
                r.required,
                r.max_cost,
                r.max_demand,
                r.capacity,
                r.seed,
            )
            .map_err(|e| e.to_string())?,
            _ => return Err("instance needs exactly one of `path`, `classic`, `random`".into()),
        };
        let itype = self.instance_type.unwrap_or(InstanceType::ThreeLp);
        let policy = self.policy.unwrap_or_default();
        let mut inst = generate_td_parameters(&base, itype, self.slope.unwrap_or(1.0), &policy, self.gen_seed)
            .map_err(|e| e.to_string())?;
        if let Some(n) = &self.name {
            inst.name = n.clone();
        }
        Ok(inst)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub repetitions: usize,
    pub generations: usize,
    pub wallclock_s: Option<f64>,
    /// Generation cap of the time-to-target protocol.
    pub target_generation_cap: usize,
    pub out: PathBuf,
    pub format: OutputFormat,
    /// File of `name value` reference costs.
    pub references: Option<PathBuf>,
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
    pub memetic: MemeticParams<f64>,
    pub stage2: Stage2Params,
    #[serde(rename = "instance")]
    pub instances: Vec<InstanceSpec>,
    /// Directory against which relative instance paths resolve.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 1,
            repetitions: 20,
            generations: 50,
            wallclock_s: None,
            target_generation_cap: 600,
            out: PathBuf::from("results"),
            format: OutputFormat::Csv,
            references: None,
            threads: 0,
            memetic: MemeticParams::default(),
            stage2: Stage2Params::default(),
            instances: Vec::new(),
            base_dir: PathBuf::from("."),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, String> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        if cfg.repetitions == 0 {
            return Err("repetitions must be at least 1".into());
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut cfg = Self::from_toml_str(&text)?;
        cfg.base_dir = path.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf);
        Ok(cfg)
    }

    /// Reference costs from the `references` file plus inline values.
    pub fn reference_costs(&self) -> Result<BTreeMap<String, f64>, String> {
        let mut refs = BTreeMap::new();
        if let Some(p) = &self.references {
            let p = if p.is_absolute() { p.clone() } else { self.base_dir.join(p) };
            let text = std::fs::read_to_string(&p).map_err(|e| format!("{}: {e}", p.display()))?;
            refs = parse_references(&text)?;
        }
        for s in &self.instances {
            if let Some(r) = s.reference {
                refs.insert(s.label(), r);
            }
        }
        Ok(refs)
    }
}

/// Parses `name value` lines; `#` starts a comment.
pub fn parse_references(text: &str) -> Result<BTreeMap<String, f64>, String> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(name), Some(v), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(format!("references line {}: expected `name value`", i + 1));
        };
        let v: f64 = v.parse().map_err(|_| format!("references line {}: bad value `{v}`", i + 1))?;
        out.insert(name.to_string(), v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_config_round_trip() {
        let text = r#"
seed = 7
repetitions = 3
generations = 10
format = "json"

[memetic]
pls = 0.2
operators = "traditional"

[[instance]]
name = "r1"
type = "3LP"
slope = 2.0
random = { vertices = 10, edges = 15, required = 12, capacity = 20.0, seed = 4 }
"#;
        let cfg = ExperimentConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.memetic.pls, 0.2);
        assert_eq!(cfg.memetic.psize, 10);
        assert_eq!(cfg.format, OutputFormat::Json);
        let inst = cfg.instances[0].load(Path::new(".")).unwrap();
        assert_eq!(inst.n_tasks(), 12);
        assert_eq!(inst.name, "r1");
        assert!(ExperimentConfig::from_toml_str("repetitions = 0").is_err());
        assert!(ExperimentConfig::from_toml_str("bogus = 1").is_err());
    }

    #[test]
    fn references_file() {
        let r = parse_references("# lb\n2lp-gdb1 316\n3lp-x 12.5 # note\n").unwrap();
        assert_eq!(r["2lp-gdb1"], 316.0);
        assert_eq!(r["3lp-x"], 12.5);
        assert!(parse_references("a b c").is_err());
    }
}
