//! Period-doubling renormalization for reversible area-preserving maps.
//!
//! The crate is organised bottom-up:
//!
//! * [`ivl`]: directed-rounding interval arithmetic.
//! * [`series`] and [`funcball`]: truncated bivariate power series, plain or
//!   with interval coefficients and an ℓ¹ tail bound.
//! * [`apmap`]: the map `(x, -s(y,x)) ↦ (y, s(x,y))` generated by `s`.
//! * [`renorm`]: the doubling operator, its fixed point and spectrum.
//! * [`regions`]: planar regions, certified images, inclusions and norms.
//! * [`stableset`]: presentation-function pieces, the horseshoe hierarchy,
//!   dimension bounds and Lyapunov exponents.
//! * [`cascade`]: the period-doubling cascade of the area-preserving Hénon
//!   family.
//!
//! Float mode is used for Newton iterations and diagnostics; every claim
//! reported as verified is produced in interval mode.

pub mod apmap;
pub mod cascade;
pub mod cert;
pub mod exec;
pub mod funcball;
pub mod ivl;
pub mod regions;
pub mod renorm;
pub mod series;
pub mod stableset;

use serde::{Deserialize, Serialize};

pub use apmap::{GeneratingMap, MapError, ScalingPair};

pub use cert::{Certificate, Verdict};
pub use exec::ExecPolicy;
pub use funcball::FuncBall;
pub use ivl::{IMat2, IVec2, Interval, IntervalError};
pub use series::Series;

/// Arithmetic used for a computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Midpoint floating-point arithmetic; results are observations.
    #[default]
    Float,
    /// Outward-rounded interval arithmetic; results can be certificates.
    Interval,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Float => write!(f, "float"),
            Mode::Interval => write!(f, "interval"),
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "float" => Ok(Mode::Float),
            "interval" => Ok(Mode::Interval),
            other => Err(format!("unknown mode `{other}` (expected float or interval)")),
        }
    }
}
