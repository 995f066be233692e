use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{FiniteGroup, Group};
use crate::error::{Error, Result};

/// Serializable description of a group, e.g. `{"family":"free","rank":2}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupSpec {
    #[serde(alias = "z", alias = "zn")]
    FreeAbelian { rank: usize },
    Free { rank: usize },
    #[serde(alias = "freeprod")]
    FreeProduct { factors: Vec<FactorSpec> },
    #[serde(alias = "heisenberg3")]
    Heisenberg,
}

/// A finite factor: either `{"cyclic": n}` or a row-major multiplication
/// table with its identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FactorSpec {
    Cyclic { cyclic: usize },
    Table {
        table: Vec<Vec<usize>>,
        #[serde(default)]
        identity: usize,
    },
}

impl FactorSpec {
    pub fn build(&self) -> Result<FiniteGroup> {
        match self {
            FactorSpec::Cyclic { cyclic } => FiniteGroup::cyclic(*cyclic),
            FactorSpec::Table { table, identity } => FiniteGroup::from_table(table, *identity),
        }
    }
}

impl GroupSpec {
    pub fn build(&self) -> Result<Group> {
        match self {
            GroupSpec::FreeAbelian { rank } => Group::free_abelian(*rank),
            GroupSpec::Free { rank } => Group::free(*rank),
            GroupSpec::FreeProduct { factors } => {
                Group::free_product(factors.iter().map(FactorSpec::build).collect::<Result<_>>()?)
            }
            GroupSpec::Heisenberg => Ok(Group::heisenberg()),
        }
    }

    /// Canonical JSON text, used as a content key.
    pub fn canonical(&self) -> String {
        serde_json::to_string(self).expect("group specs always serialize")
    }
}

/// Shorthand accepted on the command line: `free:2`, `z:1`, `zn:3`,
/// `heisenberg`, `freeprod:2,3` (cyclic factors).
impl FromStr for GroupSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<GroupSpec> {
        let s = s.trim();
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s, None),
        };
        let bad = || Error::InvalidGroup(format!("cannot parse group '{s}'"));
        let rank = || -> Result<usize> { arg.ok_or_else(bad)?.parse().map_err(|_| bad()) };
        match name.to_ascii_lowercase().as_str() {
            "z" | "zn" | "free_abelian" => Ok(GroupSpec::FreeAbelian { rank: rank()? }),
            "free" | "f" => Ok(GroupSpec::Free { rank: rank()? }),
            "heisenberg" | "heisenberg3" | "h3" if arg.is_none() => Ok(GroupSpec::Heisenberg),
            "freeprod" | "free_product" => {
                let factors = arg
                    .ok_or_else(bad)?
                    .split(',')
                    .map(|t| t.trim().parse().map(|cyclic| FactorSpec::Cyclic { cyclic }).map_err(|_| bad()))
                    .collect::<Result<Vec<_>>>()?;
                Ok(GroupSpec::FreeProduct { factors })
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}
