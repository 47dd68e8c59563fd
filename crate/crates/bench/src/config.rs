//! Run settings shared by the TOML files and the command-line flags.
//!
//! A `solve` settings file holds flat keys:
//!
//! ```toml
//! method = "dfg"          # dg | dfg | rdfg | regdfg | hybrid
//! epsilon = 1e-2
//! max_iter = 15000
//! recovery = "both"       # last | avg | both
//! stop_rule = "both"      # both | either | never
//! x0 = 0.0                # scalar fill or full vector
//! inner_tol = 1e-10
//! kappa = 10.0            # rdfg epoch length 2κ/c
//! restart_interval = 54   # rdfg fixed epoch length
//! adaptive_restart = false
//! delta = 1e-3            # regdfg weight
//! hybrid_k = 100
//! ```
//!
//! A `bench` file adds the instance grid:
//!
//! ```toml
//! methods = ["dg", "dfg"]
//! recoveries = ["last", "avg"]
//! seeds = [1, 2, 3]
//! [generator]
//! family = "num"
//! n = 50
//! [solver]
//! epsilon = 1e-2
//! ```

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use conic_dual_core::methods::{Recovery, Restart, StepRule, StopRule};
use conic_dual_core::{InnerOptions, Method, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::generator::GeneratorSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum X0 {
    Fill(f64),
    Vector(Vec<f64>),
}

impl X0 {
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .collect();
        let vals = parts
            .iter()
            .map(|t| {
                t.parse::<f64>()
                    .with_context(|| format!("bad x0 entry '{t}'"))
            })
            .collect::<Result<Vec<_>>>()?;
        match vals.as_slice() {
            [] => bail!("empty x0"),
            [v] if !s.contains(',') => Ok(X0::Fill(*v)),
            _ => Ok(X0::Vector(vals)),
        }
    }

    pub fn resolve(&self, p: usize) -> Result<Vec<f64>> {
        match self {
            X0::Fill(v) => Ok(vec![*v; p]),
            X0::Vector(v) if v.len() == p => Ok(v.clone()),
            X0::Vector(v) => bail!(
                "x0 has {} entries, the problem has {p} constraints",
                v.len()
            ),
        }
    }
}

/// Every field is optional so that files and flags can be layered.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recovery: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_rule: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<X0>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_max_iter: Option<usize>,
    /// Constant dual step for the plain gradient method.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restart_interval: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adaptive_restart: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hybrid_k: Option<usize>,
    /// Compute a reference optimum (needed for envelopes and suboptimality).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report_out: Option<PathBuf>,
}

macro_rules! layer {
    ($dst:ident, $src:ident; $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl SolveSettings {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).context("parsing settings TOML")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overlay(&mut self, other: &SolveSettings) {
        layer!(self, other; method, epsilon, max_iter, recovery, stop_rule, x0, inner_tol, inner_max_iter,
               step, kappa, restart_interval, adaptive_restart, contraction, delta, r_d, hybrid_k, reference,
               trace_out, report_out);
    }

    pub fn method(&self) -> Result<Method> {
        match &self.method {
            Some(m) => Ok(m.parse()?),
            None => Ok(Method::Dg),
        }
    }

    pub fn wants_adaptive_restart(&self) -> bool {
        self.adaptive_restart.unwrap_or(false)
    }

    /// Solver configuration for a problem with `p` constraints. Adaptive
    /// restarts need `f_star`.
    pub fn solver_config(&self, p: usize, f_star: Option<f64>) -> Result<SolverConfig> {
        let method = self.method()?;
        let mut c = SolverConfig::new(method);
        if let Some(e) = self.epsilon {
            c.epsilon = e;
        }
        if let Some(m) = self.max_iter {
            c.max_iter = m;
        }
        if let Some(r) = &self.recovery {
            c.recovery = r.parse::<Recovery>()?;
        }
        if let Some(s) = &self.stop_rule {
            c.stop_rule = s.parse::<StopRule>()?;
        }
        if let Some(x0) = &self.x0 {
            c.x0 = Some(x0.resolve(p)?);
        }
        let defaults = InnerOptions::default();
        c.inner = InnerOptions {
            tol: self.inner_tol.unwrap_or(defaults.tol),
            max_iter: self.inner_max_iter.unwrap_or(defaults.max_iter),
        };
        if let Some(a) = self.step {
            c.step = StepRule::Constant(a);
        }
        if let Some(cn) = self.contraction {
            c.contraction = cn;
        }
        c.delta = self.delta;
        c.r_d = self.r_d;
        c.hybrid_split = self.hybrid_k;
        if method == Method::Rdfg {
            c.restart = Some(if self.wants_adaptive_restart() {
                let Some(f_star) = f_star else {
                    bail!("adaptive restarts need a reference optimum (enable reference)");
                };
                Restart::Adaptive {
                    f_star,
                    kappa: self.kappa,
                }
            } else if let Some(k) = self.restart_interval {
                Restart::Interval(k)
            } else if let Some(kappa) = self.kappa {
                Restart::Kappa(kappa)
            } else {
                bail!("rdfg needs kappa, restart_interval or adaptive_restart");
            });
        }
        Ok(c)
    }
}

fn default_methods() -> Vec<String> {
    vec!["dg".into(), "dfg".into()]
}

fn default_recoveries() -> Vec<String> {
    vec!["last".into(), "avg".into()]
}

/// Batch description for the `bench` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default = "default_methods")]
    pub methods: Vec<String>,
    #[serde(default = "default_recoveries")]
    pub recoveries: Vec<String>,
    /// Seeds for the generator; each seed is one instance.
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
    /// Problem files used in addition to generated instances.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub problems: Vec<PathBuf>,
    #[serde(default)]
    pub solver: SolveSettings,
    /// Directory for per-run trace CSVs; no traces when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_dir: Option<PathBuf>,
    /// Worker threads; the available parallelism when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
}

impl BenchConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: BenchConfig = toml::from_str(text).context("parsing bench TOML")?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            bail!("bench needs at least one method");
        }
        for m in &self.methods {
            m.parse::<Method>()?;
        }
        if self.recoveries.is_empty() {
            bail!("bench needs at least one recovery");
        }
        for r in &self.recoveries {
            if r.parse::<Recovery>()? == Recovery::Both {
                bail!("list recoveries individually (last, avg)");
            }
        }
        if self.generator.is_none() && self.problems.is_empty() {
            bail!("bench needs a [generator] section or problem files");
        }
        if self.generator.is_some() && self.seeds.is_empty() {
            bail!("bench with a generator needs seeds");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn x0_parsing() {
        assert_eq!(X0::parse("0.5").unwrap(), X0::Fill(0.5));
        assert_eq!(X0::parse("1, 2").unwrap(), X0::Vector(vec![1.0, 2.0]));
        assert_eq!(X0::parse("3,").unwrap(), X0::Vector(vec![3.0]));
        assert!(X0::parse("a").is_err());
        assert!(X0::Vector(vec![1.0]).resolve(2).is_err());
    }

    #[test]
    fn settings_layer_and_build() {
        let mut s = SolveSettings::from_toml(
            "method = \"rdfg\"\nkappa = 10.0\nepsilon = 1e-3\nx0 = [0, 1]",
        )
        .unwrap();
        let flags = SolveSettings {
            epsilon: Some(1e-4),
            ..Default::default()
        };
        s.overlay(&flags);
        let c = s.solver_config(2, None).unwrap();
        assert_eq!(c.epsilon, 1e-4);
        assert_eq!(c.x0, Some(vec![0.0, 1.0]));
        assert_eq!(c.restart, Some(Restart::Kappa(10.0)));
        assert_eq!(c.max_iter, 15_000);

        s.adaptive_restart = Some(true);
        assert!(s.solver_config(2, None).is_err());
        assert!(matches!(
            s.solver_config(2, Some(1.0)).unwrap().restart,
            Some(Restart::Adaptive { kappa: Some(_), .. })
        ));
        assert!(SolveSettings::from_toml("methd = \"dg\"").is_err());
        assert!(SolveSettings::from_toml("method = \"rdfg\"")
            .unwrap()
            .solver_config(1, None)
            .is_err());
    }

    #[test]
    fn bench_config_validation() {
        let c = BenchConfig::from_toml("seeds = [1, 2]\n[generator]\nfamily = \"num\"\nn = 10\n")
            .unwrap();
        assert_eq!(c.methods, vec!["dg", "dfg"]);
        assert!(BenchConfig::from_toml("[generator]\nfamily = \"num\"\nn = 10\n").is_err());
        assert!(BenchConfig::from_toml("methods = [\"newton\"]\nproblems = [\"a.json\"]").is_err());
        assert!(
            BenchConfig::from_toml("recoveries = [\"both\"]\nproblems = [\"a.json\"]").is_err()
        );
    }
}
