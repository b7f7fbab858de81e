//! Shared parameter points for the benchmarks.

use cmap_core::combinatorics::binom;
use cmap_core::rational::ratio;
use cmap_core::SystemParams;

/// Parameters with `N = K`, integer access replication `t`, and a unit
/// private cache (`M_p = N/K`).
pub fn unit_params(lambda: u8, r: u8, t: u8) -> SystemParams {
    let n = binom(lambda as i64, r as i64) as u32;
    SystemParams::new(
        lambda,
        r,
        n,
        ratio(t as i128 * n as i128, lambda as i128),
        ratio(1, 1),
    )
}
