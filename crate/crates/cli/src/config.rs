//! Run configuration read from a TOML file.
//!
//! A file holds the `potential` and optional `units` and `output` sections,
//! plus exactly one command section named after the verb on the command
//! line. `selftest` needs no section at all.

use std::path::PathBuf;

use caustica::oracle::Grid;
use caustica::{PotentialConfig, PotentialSpec};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Verb {
    Zsc,
    Inventory,
    Caustics,
    Regions,
    Oracle,
    Compare,
    Selftest,
}

impl Verb {
    pub fn key(self) -> &'static str {
        match self {
            Verb::Zsc => "zsc",
            Verb::Inventory => "inventory",
            Verb::Caustics => "caustics",
            Verb::Regions => "regions",
            Verb::Oracle => "oracle",
            Verb::Compare => "compare",
            Verb::Selftest => "selftest",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Units {
    pub hbar: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZscBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_range: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0_cutoff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InventoryBlock {
    pub x0: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub beta_range: [f64; 2],
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionsBlock {
    pub x0_range: [f64; 2],
    pub beta_range: [f64; 2],
    /// `[n_x0, n_beta]`
    pub resolution: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleBlock {
    pub grid: Grid,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub beta_list: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareBlock {
    pub beta_range: [f64; 2],
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelftestBlock {}

/// Everything a run needs, as written in the configuration file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<Units>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zsc: Option<ZscBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inventory: Option<InventoryBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caustics: Option<SweepBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regions: Option<RegionsBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selftest: Option<SelftestBlock>,
    #[serde(default)]
    pub output: Output,
}

/// A validated command with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    Zsc {
        betas: Vec<f64>,
        x0_cutoff: Option<f64>,
    },
    Inventory {
        x0: f64,
        beta: f64,
    },
    Caustics {
        betas: Vec<f64>,
    },
    Regions {
        x0_range: (f64, f64),
        beta_range: (f64, f64),
        resolution: (usize, usize),
    },
    Oracle {
        grid: Grid,
        betas: Vec<f64>,
    },
    Compare {
        betas: Vec<f64>,
        grid: Option<Grid>,
    },
    Selftest,
}

fn usage(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("`{key}`: {msg}"))
}

fn range(key: &str, r: [f64; 2]) -> Result<(f64, f64), CliError> {
    if !(r[0].is_finite() && r[1].is_finite() && r[0] < r[1]) {
        return Err(usage(key, format!("needs min < max, got [{}, {}]", r[0], r[1])));
    }
    Ok((r[0], r[1]))
}

fn beta_range(key: &str, r: [f64; 2]) -> Result<(f64, f64), CliError> {
    let (lo, hi) = range(key, r)?;
    if lo <= 0.0 {
        return Err(usage(key, format!("beta must be positive, got {lo}")));
    }
    Ok((lo, hi))
}

/// `steps + 1` equally spaced points including both ends.
fn sweep(key: &str, r: (f64, f64), steps: usize) -> Result<Vec<f64>, CliError> {
    if steps < 1 {
        return Err(usage(key, "must be at least 1"));
    }
    Ok((0..=steps)
        .map(|i| r.0 + (r.1 - r.0) * i as f64 / steps as f64)
        .collect())
}

fn betas(key: &str, list: &[f64]) -> Result<Vec<f64>, CliError> {
    if list.is_empty() {
        return Err(usage(key, "must not be empty"));
    }
    if let Some(b) = list.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
        return Err(usage(key, format!("beta must be positive, got {b}")));
    }
    let mut out = list.to_vec();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("configuration: {}", e.message())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises to TOML")
    }

    fn command_keys(&self) -> Vec<&'static str> {
        [
            (self.zsc.is_some(), Verb::Zsc),
            (self.inventory.is_some(), Verb::Inventory),
            (self.caustics.is_some(), Verb::Caustics),
            (self.regions.is_some(), Verb::Regions),
            (self.oracle.is_some(), Verb::Oracle),
            (self.compare.is_some(), Verb::Compare),
            (self.selftest.is_some(), Verb::Selftest),
        ]
        .into_iter()
        .filter_map(|(present, v)| present.then_some(v.key()))
        .collect()
    }

    /// The potential with `units` folded in.
    pub fn spec(&self) -> Result<PotentialSpec, CliError> {
        let mut pot = self
            .potential
            .clone()
            .ok_or_else(|| usage("potential", "section is missing"))?;
        if let Some(u) = self.units {
            for (key, given, value) in [("hbar", pot.hbar, u.hbar), ("mass", pot.mass, u.mass)] {
                if given.is_some_and(|g| g != value) {
                    return Err(usage(&format!("potential.{key}"), format!("conflicts with `units.{key}`")));
                }
            }
            pot.hbar = Some(u.hbar);
            pot.mass = Some(u.mass);
        }
        PotentialSpec::try_from(&pot).map_err(|e| usage("potential", e))
    }

    /// Checks the sections against `verb` and extracts its parameters.
    pub fn job(&self, verb: Verb) -> Result<Job, CliError> {
        let keys = self.command_keys();
        match keys.as_slice() {
            [] if verb == Verb::Selftest => return Ok(Job::Selftest),
            [] => return Err(usage(verb.key(), "section is missing")),
            [k] if *k == verb.key() => {}
            [k] => {
                return Err(usage(k, format!("section does not match the `{}` command", verb.key())));
            }
            _ => {
                return Err(CliError::Usage(format!(
                    "exactly one command section expected, found {}",
                    keys.iter().map(|k| format!("`{k}`")).collect::<Vec<_>>().join(", ")
                )))
            }
        }
        if verb != Verb::Selftest {
            self.spec()?;
        }
        match verb {
            Verb::Zsc => {
                let z = self.zsc.as_ref().expect("checked above");
                let betas = match (&z.beta_list, z.beta_range, z.steps) {
                    (Some(list), None, None) => betas("zsc.beta_list", list)?,
                    (None, Some(r), Some(steps)) => sweep("zsc.steps", beta_range("zsc.beta_range", r)?, steps)?,
                    (None, Some(_), None) => return Err(usage("zsc.steps", "required with `zsc.beta_range`")),
                    (None, None, Some(_)) => return Err(usage("zsc.beta_range", "required with `zsc.steps`")),
                    (None, None, None) => {
                        return Err(usage("zsc.beta_list", "either `beta_list` or `beta_range` with `steps` is required"))
                    }
                    (Some(_), _, _) => {
                        return Err(usage("zsc.beta_list", "cannot be combined with `beta_range` or `steps`"))
                    }
                };
                if let Some(c) = z.x0_cutoff {
                    if !(c > 0.0 && c.is_finite()) {
                        return Err(usage("zsc.x0_cutoff", format!("must be positive, got {c}")));
                    }
                }
                Ok(Job::Zsc {
                    betas,
                    x0_cutoff: z.x0_cutoff,
                })
            }
            Verb::Inventory => {
                let inv = self.inventory.as_ref().expect("checked above");
                if !inv.x0.is_finite() {
                    return Err(usage("inventory.x0", "must be finite"));
                }
                if !(inv.beta > 0.0 && inv.beta.is_finite()) {
                    return Err(usage("inventory.beta", format!("must be positive, got {}", inv.beta)));
                }
                Ok(Job::Inventory {
                    x0: inv.x0,
                    beta: inv.beta,
                })
            }
            Verb::Caustics => {
                let c = self.caustics.as_ref().expect("checked above");
                let r = beta_range("caustics.beta_range", c.beta_range)?;
                Ok(Job::Caustics {
                    betas: sweep("caustics.steps", r, c.steps)?,
                })
            }
            Verb::Regions => {
                let r = self.regions.as_ref().expect("checked above");
                let [nx, nb] = r.resolution;
                if nx < 16 || nb < 16 {
                    return Err(usage("regions.resolution", format!("needs at least 16 per axis, got [{nx}, {nb}]")));
                }
                Ok(Job::Regions {
                    x0_range: range("regions.x0_range", r.x0_range)?,
                    beta_range: beta_range("regions.beta_range", r.beta_range)?,
                    resolution: (nx, nb),
                })
            }
            Verb::Oracle => {
                let o = self.oracle.as_ref().expect("checked above");
                let grid = Grid::new(o.grid.x_min, o.grid.x_max, o.grid.n_points).map_err(|e| usage("oracle.grid", e))?;
                let betas = if o.beta_list.is_empty() {
                    Vec::new()
                } else {
                    betas("oracle.beta_list", &o.beta_list)?
                };
                Ok(Job::Oracle { grid, betas })
            }
            Verb::Compare => {
                let c = self.compare.as_ref().expect("checked above");
                let r = beta_range("compare.beta_range", c.beta_range)?;
                let grid = c
                    .grid
                    .map(|g| Grid::new(g.x_min, g.x_max, g.n_points).map_err(|e| usage("compare.grid", e)))
                    .transpose()?;
                Ok(Job::Compare {
                    betas: sweep("compare.steps", r, c.steps)?,
                    grid,
                })
            }
            Verb::Selftest => Ok(Job::Selftest),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ZSC: &str = r#"
[potential]
family = "harmonic"
omega = 1.0

[zsc]
beta_list = [2.0, 1.0]
"#;

    #[test]
    fn parses_a_minimal_file() {
        let cfg = RunConfig::parse(ZSC).unwrap();
        assert_eq!(
            cfg.job(Verb::Zsc).unwrap(),
            Job::Zsc {
                betas: vec![1.0, 2.0],
                x0_cutoff: None
            }
        );
        assert_eq!(cfg.output.format, Format::Csv);
    }

    #[test]
    fn dump_round_trips() {
        let cfg = RunConfig::parse(ZSC).unwrap();
        let again = RunConfig::parse(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn names_the_offending_key() {
        let cfg = RunConfig::parse(&ZSC.replace("beta_list = [2.0, 1.0]", "beta_range = [1.0, 0.5]\nsteps = 3")).unwrap();
        let msg = cfg.job(Verb::Zsc).unwrap_err().to_string();
        assert!(msg.contains("zsc.beta_range"), "{msg}");
        let err = RunConfig::parse(&format!("{ZSC}\n[output]\nformt = \"csv\"\n")).unwrap_err();
        assert!(err.to_string().contains("formt"), "{err}");
    }

    #[test]
    fn one_command_section() {
        let cfg = RunConfig::parse(ZSC).unwrap();
        assert!(cfg.job(Verb::Regions).unwrap_err().to_string().contains("`zsc`"));
        let both = RunConfig::parse(&format!("{ZSC}\n[inventory]\nx0 = 0.0\nbeta = 1.0\n")).unwrap();
        assert!(both.job(Verb::Zsc).is_err());
        assert_eq!(RunConfig::default().job(Verb::Selftest).unwrap(), Job::Selftest);
    }

    #[test]
    fn sweep_includes_both_ends() {
        assert_eq!(sweep("k", (1.0, 2.0), 2).unwrap(), vec![1.0, 1.5, 2.0]);
        assert!(sweep("k", (1.0, 2.0), 0).is_err());
    }

    #[test]
    fn units_fold_into_the_potential() {
        let cfg = RunConfig::parse(&format!("{ZSC}\n[units]\nhbar = 2.0\nmass = 3.0\n")).unwrap();
        let spec = cfg.spec().unwrap();
        assert_eq!((spec.hbar(), spec.mass()), (2.0, 3.0));
        let text = ZSC.replace("omega = 1.0", "omega = 1.0\nhbar = 1.0") + "\n[units]\nhbar = 2.0\nmass = 1.0\n";
        let clash = RunConfig::parse(&text).unwrap();
        assert!(clash.spec().unwrap_err().to_string().contains("potential.hbar"));
    }
}
