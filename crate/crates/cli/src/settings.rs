use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Deserializer};

use crate::CliError;

/// Experiment settings. The same names work as `--flags` and as keys of a
/// flat JSON config file; flags win.
#[derive(Args, Deserialize, Debug, Clone, Default, PartialEq)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Settings {
    /// weakclone | sequential
    #[arg(long)]
    pub scheme: Option<String>,

    /// Input state as interleaved re,im pairs: a0re,a0im,a1re,a1im,...
    /// Random (from --seed) when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub state: Option<String>,

    /// Alice's observable: sx | sy | sz | h:<row-major re,im pairs>
    #[arg(long, allow_hyphen_values = true)]
    pub obs_a: Option<String>,

    /// Bob's observable, same syntax as --obs-a
    #[arg(long, allow_hyphen_values = true)]
    pub obs_b: Option<String>,

    /// Coupling strength for both pointers; a comma-separated list for sweep
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "one_or_many")]
    pub gamma: Option<Vec<f64>>,

    /// Alice's strength, overrides --gamma
    #[arg(long, allow_hyphen_values = true)]
    pub gamma_a: Option<f64>,

    /// Bob's strength, overrides --gamma
    #[arg(long, allow_hyphen_values = true)]
    pub gamma_b: Option<f64>,

    /// Pointer width Δ for both pointers
    #[arg(long)]
    pub delta: Option<f64>,

    /// grid | gaussian | both
    #[arg(long)]
    pub repr: Option<String>,

    /// Grid points per pointer (power of two)
    #[arg(long)]
    pub grid_n: Option<usize>,

    /// Grid half-width L; positions span [-L, L)
    #[arg(long)]
    pub grid_l: Option<f64>,

    /// Seed for random states and observables (default 0)
    #[arg(long)]
    pub seed: Option<u64>,

    /// alice-holds-pair | bob-holds-pair
    #[arg(long)]
    pub layout: Option<String>,

    /// JSON file with default values for any of these settings
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Write output here instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// csv | jsonl
    #[arg(long)]
    pub format: Option<String>,

    /// Number of parties (chain)
    #[arg(long)]
    pub parties: Option<usize>,

    /// Qudit dimension (qudit)
    #[arg(long)]
    pub dim: Option<usize>,
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<f64>>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Gamma {
        One(f64),
        Many(Vec<f64>),
    }
    Ok(Option::<Gamma>::deserialize(d)?.map(|g| match g {
        Gamma::One(x) => vec![x],
        Gamma::Many(v) => v,
    }))
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Fields set in `self` override those in `base`.
    pub fn over(self, base: Settings) -> Settings {
        macro_rules! pick {
            ($($f:ident),*) => { Settings { $($f: self.$f.or(base.$f)),* } };
        }
        pick!(
            scheme, state, obs_a, obs_b, gamma, gamma_a, gamma_b, delta, repr, grid_n, grid_l, seed,
            layout, config, out, format, parties, dim
        )
    }

    /// Flags merged over the config file named by `--config`, if any.
    pub fn resolve(self) -> Result<Settings, CliError> {
        match &self.config {
            Some(path) => {
                let file = Settings::from_file(path)?;
                Ok(self.over(file))
            }
            None => Ok(self),
        }
    }

    /// Rejects settings that the subcommand does not use.
    pub fn forbid(&self, command: &str, names: &[&str]) -> Result<(), CliError> {
        for &name in names {
            let set = match name {
                "scheme" => self.scheme.is_some(),
                "parties" => self.parties.is_some(),
                "dim" => self.dim.is_some(),
                "layout" => self.layout.is_some(),
                _ => false,
            };
            if set {
                return Err(CliError::Config(format!("`{name}` does not apply to `{command}`")));
            }
        }
        Ok(())
    }
}
