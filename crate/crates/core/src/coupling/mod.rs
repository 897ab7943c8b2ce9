//! Dressed trajectories, pair simulation with meeting detection, good blocks and
//! the empirical coupling inequality.

pub mod check;
pub mod dressed;
pub mod goodness;
pub mod pair;

pub use check::{coupling_bound_check, CouplingConfig, CouplingReport, CouplingRow};
pub use dressed::{dress_flags, dress_path, DressOptions, DressedPath};
pub use goodness::{fixed_blocks, good_blocks};
pub use pair::{detect_meeting, simulate_pair, CouplingResult, MeetKind, PairSimulator};
