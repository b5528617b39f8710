//! Security analysis toolkit for three-dimensional semi-quantum key
//! distribution.
//!
//! The crate models Eve's two-stage collective attack on a qutrit travelling
//! Alice → Bob → Alice, turns the resulting observable statistics into the
//! asymptotic key-rate lower bound, and runs a Monte Carlo version of the
//! quantum communication stage so the analytic statistics can be checked
//! against sampled ones.
//!
//! Module map:
//!
//! * [`linalg`]: small dense complex vectors/matrices, the three qutrit bases,
//!   Kronecker products and base-3 entropies.
//! * [`attack`]: forward/reverse isometries, the ternary symmetric channel and
//!   the ancilla vector families `e`, `e^k_{i,j}`, `f`, `g`, `h`.
//! * [`stats`]: the 27-entry probability table, alternative-basis error rates
//!   (direct and term-table expansion) and the sifted joint distribution.
//! * [`keyrate`]: the key-rate bound and its intermediates.
//! * [`sim`]: seeded Monte Carlo execution of the protocol rounds.
//! * [`exact`]: explicit post-attack states and their entropies.
//! * [`verify`]: the invariant suite used by `sqkd3 verify`.

pub mod appendix;
pub mod attack;
pub mod error;
pub mod exact;
pub mod keyrate;
pub mod linalg;
pub mod sim;
pub mod stats;
pub mod verify;

pub use attack::{AttackModel, ChannelModel, ChannelScenario, VectorFamilies};
pub use error::{Error, Result};
pub use keyrate::{
    find_threshold, key_rate, BasisNoiseConvention, Conventions, EigenHandling, KeyRateReport,
    PMode,
};
pub use linalg::{BasisId, BasisSet, CMat, CVec, C64};
pub use sim::{run_protocol, SimulationResult};
pub use stats::{JointDistribution, PTable, StatTable, Variant, Weighting};
