//! Monte-Carlo engine for channels whose transfer size is redrawn per transfer.

pub mod channel;
pub mod market;
pub mod sweep;

pub use channel::{
    run_channel, simulate_channel, ChannelSetting, OnChainOutcome, SimChannelConfig, SimOutcome, Transfer,
    TransferSequence,
};
pub use market::{
    activity_no_lightning, activity_with_lightning, demand_curve_sim, equilibrium_on, network_sweep,
    price_curve_sim, MeanActivity, NetworkStats, PairActivity, SimDemandCurve, SimDemandPoint, SimEquilibrium,
    SimPriceCurve,
};
pub use sweep::{
    capacity_study, optimal_capacity_on, radius_sweep, run_all, reset_radius_study, CapacityOptimum, CapacityRange,
    CapacityStudy, ChannelPolicy, MeanOutcome, RadiusSweep, ResetPolicy, ResetRadiusStudy, SimEnv,
    RESET_CALIBRATION_FEE,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "CHANNEL_ECON_THREADS";

/// Replications, horizon and grid resolution of one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimProtocol {
    pub replications: usize,
    pub horizon_days: u32,
    pub grid_points: usize,
}

impl SimProtocol {
    /// Desk scale: small enough for the test suite.
    pub const fn desk() -> Self {
        SimProtocol { replications: 30, horizon_days: 300, grid_points: 20 }
    }

    /// Reset-radius, capacity and demand experiments at full scale.
    pub const fn full_channel() -> Self {
        SimProtocol { replications: 50, horizon_days: 1000, grid_points: 100 }
    }

    /// Price-curve experiment at full scale.
    pub const fn full_price() -> Self {
        SimProtocol { replications: 500, horizon_days: 1000, grid_points: 100 }
    }

    /// Network statistics at full scale.
    pub const fn full_network() -> Self {
        SimProtocol { replications: 1, horizon_days: 100_000, grid_points: 1000 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::invalid("replications", "must be at least 1"));
        }
        if self.horizon_days == 0 {
            return Err(Error::invalid("horizon_days", "must be at least 1"));
        }
        if self.grid_points < 2 {
            return Err(Error::invalid("grid_points", "must be at least 2"));
        }
        Ok(())
    }
}

/// Runs `f` on a pool sized by [`THREADS_ENV`] when set, else on the global pool.
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match std::env::var(THREADS_ENV) {
        Ok(raw) => {
            let threads: usize = raw
                .trim()
                .parse()
                .ok()
                .filter(|&t| t > 0)
                .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        Err(_) => Ok(f()),
    }
}
