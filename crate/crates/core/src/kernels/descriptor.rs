use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{KernelFamily, KernelSpec};
use crate::error::{Error, Result};

/// Serializable kernel description, e.g. `{"family": "bspline", "order": 3}`
/// or the compact form `bspline(3)`, `jackson(1,2)`, `averaged(bspline(3))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", deny_unknown_fields)]
pub enum KernelDescriptor {
    #[serde(rename = "bspline")]
    BSpline { order: u32 },
    #[serde(rename = "jackson")]
    Jackson { alpha: f64, n: u32 },
    #[serde(rename = "averaged")]
    Averaged { inner: Box<KernelDescriptor> },
}

impl KernelDescriptor {
    pub fn build(&self) -> Result<KernelSpec> {
        match self {
            Self::BSpline { order } => KernelSpec::bspline(*order),
            Self::Jackson { alpha, n } => KernelSpec::jackson(*alpha, *n),
            Self::Averaged { inner } => Ok(KernelSpec::averaged(inner.build()?)),
        }
    }

    /// The descriptor of a built kernel; `None` for custom kernels.
    pub fn of(k: &KernelSpec) -> Option<Self> {
        Some(match k.family() {
            KernelFamily::BSpline { order } => Self::BSpline { order: *order },
            KernelFamily::Jackson { alpha, n } => Self::Jackson { alpha: *alpha, n: *n },
            KernelFamily::Averaged(inner) => Self::Averaged {
                inner: Box::new(Self::of(inner)?),
            },
            KernelFamily::Custom(_) => return None,
        })
    }
}

impl fmt::Display for KernelDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::BSpline { order } => write!(f, "bspline({order})"),
            Self::Jackson { alpha, n } => write!(f, "jackson({alpha},{n})"),
            Self::Averaged { inner } => write!(f, "averaged({inner})"),
        }
    }
}

impl FromStr for KernelDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidParameter(format!("unrecognized kernel descriptor `{s}`"));
        let open = s.find('(').ok_or_else(bad)?;
        if !s.ends_with(')') {
            return Err(bad());
        }
        let name = s[..open].trim().to_ascii_lowercase();
        let args = &s[open + 1..s.len() - 1];
        let number = |a: &str| a.trim().parse::<f64>().map_err(|_| bad());
        let integer = |a: &str| a.trim().parse::<u32>().map_err(|_| bad());
        match name.as_str() {
            "bspline" => Ok(Self::BSpline { order: integer(args)? }),
            "jackson" => {
                let (a, n) = args.split_once(',').ok_or_else(bad)?;
                Ok(Self::Jackson {
                    alpha: number(a)?,
                    n: integer(n)?,
                })
            }
            "averaged" => Ok(Self::Averaged {
                inner: Box::new(args.parse()?),
            }),
            _ => Err(bad()),
        }
    }
}
