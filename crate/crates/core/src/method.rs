use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::MetricKind;

/// The four learners and three baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "ls")]
    Ls,
    #[serde(rename = "ls-diag")]
    LsDiag,
    #[serde(rename = "oasis")]
    Oasis,
    #[serde(rename = "oasis-diag")]
    OasisDiag,
    #[serde(rename = "uniform")]
    Uniform,
    #[serde(rename = "pmv")]
    Pmv,
    #[serde(rename = "frisch")]
    Frisch,
}

impl Method {
    pub const ALL: [Method; 7] =
        [Method::Ls, Method::LsDiag, Method::Oasis, Method::OasisDiag, Method::Uniform, Method::Pmv, Method::Frisch];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Ls => "ls",
            Method::LsDiag => "ls-diag",
            Method::Oasis => "oasis",
            Method::OasisDiag => "oasis-diag",
            Method::Uniform => "uniform",
            Method::Pmv => "pmv",
            Method::Frisch => "frisch",
        }
    }

    pub fn is_least_squares(self) -> bool {
        matches!(self, Method::Ls | Method::LsDiag)
    }

    pub fn is_oasis(self) -> bool {
        matches!(self, Method::Oasis | Method::OasisDiag)
    }

    pub fn is_baseline(self) -> bool {
        matches!(self, Method::Uniform | Method::Pmv | Method::Frisch)
    }

    /// Weight-matrix shape for learners and the uniform baseline.
    pub fn kind(self) -> Option<MetricKind> {
        match self {
            Method::Ls | Method::Oasis => Some(MetricKind::Full),
            Method::LsDiag | Method::OasisDiag | Method::Uniform => Some(MetricKind::Diagonal),
            Method::Pmv | Method::Frisch => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s || m.as_str().replace('-', "_") == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method '{s}'")))
    }
}
