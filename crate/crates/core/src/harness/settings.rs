use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    FirstOrder,
    Demyanov,
    Codiff,
    SecondOrder,
    Sawtooth,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 6] = ["first-order", "demyanov", "codiff", "second-order", "sawtooth", "all"];

    pub fn name(self) -> &'static str {
        match self {
            Suite::FirstOrder => "first-order",
            Suite::Demyanov => "demyanov",
            Suite::Codiff => "codiff",
            Suite::SecondOrder => "second-order",
            Suite::Sawtooth => "sawtooth",
            Suite::All => "all",
        }
    }

    /// `self` or `All` covers `part`.
    pub fn covers(self, part: Suite) -> bool {
        self == Suite::All || self == part
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "first-order" => Suite::FirstOrder,
            "demyanov" => Suite::Demyanov,
            "codiff" => Suite::Codiff,
            "second-order" => Suite::SecondOrder,
            "sawtooth" => Suite::Sawtooth,
            "all" => Suite::All,
            other => {
                return Err(Error::invalid(format!(
                    "unknown suite `{other}`, expected one of {}",
                    Suite::NAMES.join(", ")
                )))
            }
        })
    }
}

macro_rules! keyed {
    ($(#[$m:meta])* $name:ident : $ty:ty { $($(#[$fm:meta])* $field:ident = $default:expr),* $(,)? }) => {
        $(#[$m])*
        #[derive(Clone, Debug, PartialEq, Serialize)]
        pub struct $name {
            $($(#[$fm])* pub $field: $ty,)*
        }

        impl Default for $name {
            fn default() -> Self {
                Self { $($field: $default,)* }
            }
        }

        impl $name {
            pub const KEYS: &'static [&'static str] = &[$(stringify!($field)),*];

            pub fn set(&mut self, key: &str, value: $ty) -> Result<()> {
                match key {
                    $(stringify!($field) => self.$field = value,)*
                    other => {
                        return Err(Error::invalid(format!(
                            "unknown key `{other}`, expected one of {}",
                            Self::KEYS.join(", ")
                        )))
                    }
                }
                Ok(())
            }
        }
    };
}

keyed!(
    /// Acceptance tolerances, overridable by key.
    Tolerances: f64 {
        demyanov = 1e-6,
        df = 1e-3,
        dc = 1e-3,
        phi = 0.1,
        ph2 = 1e-6,
        psi2 = 0.1,
        subdiff2 = 1e-3,
        a_set = 0.1,
        residual2 = 0.05,
        offset = 1e-9,
        slice = 1e-3,
        residual1 = 0.05,
        hypo_step = 0.05,
        jump = 0.01,
        df_radius = 0.05,
        clarke = 0.9,
    }
);

keyed!(
    /// Problem counts and sample sizes, overridable by key.
    Budgets: usize {
        pairs = 200,
        max_affine = 50,
        dc = 25,
        mc_phi = 100_000,
        mc_psi = 200_000,
        ph2_sets = 10,
        /// How many of the random sets also get the smoothing estimate.
        psi_sets = 10,
        composed = 5,
        codiff_models = 5,
        directions = 360,
        clarke_samples = 4000,
        sawtooth_depth = 12,
    }
);

/// Parses `KEY=VAL`.
pub fn parse_override(text: &str) -> Result<(String, String)> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| Error::invalid(format!("override `{text}` is not of the form KEY=VAL")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

impl Tolerances {
    pub fn apply(&mut self, text: &str) -> Result<()> {
        let (k, v) = parse_override(text)?;
        let value: f64 = v
            .parse()
            .map_err(|_| Error::invalid(format!("tolerance `{k}` needs a number, got `{v}`")))?;
        if !(value >= 0.0) {
            return Err(Error::invalid(format!("tolerance `{k}` must be nonnegative")));
        }
        self.set(&k, value)
    }
}

impl Budgets {
    pub fn apply(&mut self, text: &str) -> Result<()> {
        let (k, v) = parse_override(text)?;
        let value: usize = v
            .parse()
            .map_err(|_| Error::invalid(format!("budget `{k}` needs a nonnegative integer, got `{v}`")))?;
        self.set(&k, value)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    /// Model file; without one the built-in acceptance battery runs.
    pub problem: Option<PathBuf>,
    pub suite: Suite,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub budgets: Budgets,
    pub out: Option<PathBuf>,
    /// Record wall-clock time per row. Reports are reproducible bit for bit
    /// only with timing off.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: None,
            suite: Suite::All,
            seed: 0x00C0_D1FF,
            tolerances: Tolerances::default(),
            budgets: Budgets::default(),
            out: None,
            timing: true,
        }
    }
}
