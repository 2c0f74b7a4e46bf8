use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use pooled_core::{DesignParams, Overrides, Rate};
use serde::Deserialize;

/// Flags shared by every subcommand. Each one can also be given in a JSON file
/// passed with `--config`, under the same kebab-case name; flags win.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunConfig {
    /// JSON file with default values for any of these flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Number of real items.
    #[arg(long)]
    pub n: Option<usize>,
    /// Items per weight 1..=d, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub counts: Option<Vec<usize>>,
    /// Design exponent in (0, 1/4).
    #[arg(long)]
    pub eps_design: Option<f64>,
    /// Rate constant c.
    #[arg(long, conflicts_with = "delta")]
    pub c: Option<f64>,
    /// Slack over the recovery guarantee.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Treat failed diagnostics as a failed run.
    #[arg(long)]
    #[serde(default)]
    pub strict: bool,
    #[arg(long)]
    pub override_ell: Option<usize>,
    #[arg(long)]
    pub override_s: Option<usize>,
    #[arg(long)]
    pub override_m: Option<usize>,
    #[arg(long)]
    pub override_gamma: Option<usize>,
}

pub const DEFAULT_EPS: f64 = 0.05;

impl RunConfig {
    /// Fill unset flags from the config file, if one was given.
    pub fn resolve(self) -> Result<Self> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let file = read_file(&path)?;
        Ok(self.over(file))
    }

    fn over(self, base: RunConfig) -> RunConfig {
        RunConfig {
            config: self.config,
            n: self.n.or(base.n),
            counts: self.counts.or(base.counts),
            eps_design: self.eps_design.or(base.eps_design),
            c: self.c.or(if self.delta.is_some() { None } else { base.c }),
            delta: self.delta.or(if self.c.is_some() { None } else { base.delta }),
            trials: self.trials.or(base.trials),
            seed: self.seed.or(base.seed),
            out: self.out.or(base.out),
            strict: self.strict || base.strict,
            override_ell: self.override_ell.or(base.override_ell),
            override_s: self.override_s.or(base.override_s),
            override_m: self.override_m.or(base.override_m),
            override_gamma: self.override_gamma.or(base.override_gamma),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn trials(&self) -> usize {
        self.trials.unwrap_or(1)
    }

    pub fn params(&self) -> Result<DesignParams> {
        let Some(n) = self.n else { bail!("--n is required") };
        let Some(counts) = self.counts.clone() else { bail!("--counts is required") };
        let rate = match (self.c, self.delta) {
            (Some(c), None) => Rate::C(c),
            (None, Some(d)) => Rate::Delta(d),
            (Some(_), Some(_)) => bail!("--c and --delta are mutually exclusive"),
            (None, None) => bail!("one of --c or --delta is required"),
        };
        let overrides = Overrides {
            ell: self.override_ell,
            s: self.override_s,
            m: self.override_m,
            gamma: self.override_gamma,
        };
        Ok(DesignParams::new(n, counts, self.eps_design.unwrap_or(DEFAULT_EPS), rate, self.seed())
            .with_overrides(overrides))
    }
}

fn read_file(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}
