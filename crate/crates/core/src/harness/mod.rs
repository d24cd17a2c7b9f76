//! Verification machinery: an exact binomial-tail oracle, a Monte-Carlo
//! check of pattern probabilities, a naive miner and the
//! minimum-observation grid.

mod grid;
mod mc;
mod miner;
mod oracle;

pub use grid::{min_obs_grid, write_grid_csv, GridCell, GridSpec};
pub use mc::{mc_pattern_frequency, Estimate, McOutcome, McSetting};
pub use miner::{greedy_miner, naive_miner, MinerConfig, MAX_SUBSPACES};
pub use oracle::{exact_tail_ln, exact_tail_oracle};
