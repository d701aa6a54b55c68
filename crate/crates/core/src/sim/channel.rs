//! One symmetric channel operated with a reset radius.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    next_transfer_direction, stream_rng, Direction, MarketParams, PairParams, TransferSizeDist,
    TransferSizeRegime,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transfer {
    pub direction: Direction,
    pub size: f64,
}

/// Transfers arriving over a horizon of whole days.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferSequence {
    pub days: u32,
    pub transfers: Vec<Transfer>,
}

impl TransferSequence {
    /// Draws `Poisson(ell)` transfers for each day of the horizon.
    pub fn generate<R: Rng + ?Sized>(
        pair: &PairParams,
        dist: &TransferSizeDist,
        regime: TransferSizeRegime,
        days: u32,
        rng: &mut R,
    ) -> Self {
        let poisson = Poisson::new(pair.ell()).expect("pair rate validated positive");
        let pair_size = dist.sample(rng);
        let mut transfers = Vec::with_capacity((pair.ell() * days as f64 * 1.05) as usize + 16);
        for _ in 0..days {
            let count = poisson.sample(rng) as u64;
            for _ in 0..count {
                let direction = next_transfer_direction(pair, rng);
                let size = match regime {
                    TransferSizeRegime::PerTransfer => dist.sample(rng),
                    TransferSizeRegime::PerPair => pair_size,
                };
                transfers.push(Transfer { direction, size });
            }
        }
        TransferSequence { days, transfers }
    }

    /// Transfers worth more than their on-chain fee, `beta z > phi`.
    pub fn on_chain_only(&self, market: &MarketParams, phi: f64) -> OnChainOutcome {
        let mut out = OnChainOutcome { days: self.days, ..OnChainOutcome::default() };
        for t in &self.transfers {
            if market.beta * t.size > phi {
                out.count += 1;
                out.volume += t.size;
                out.value += market.beta * t.size;
            } else {
                out.skipped += 1;
            }
        }
        out.cost = phi * out.count as f64;
        out.net_utility = out.value - out.cost;
        out
    }
}

/// Result of running a sequence with the blockchain as the only venue.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct OnChainOutcome {
    pub days: u32,
    pub count: u64,
    pub skipped: u64,
    pub volume: f64,
    pub value: f64,
    pub cost: f64,
    pub net_utility: f64,
}

impl OnChainOutcome {
    pub fn records_per_day(&self) -> f64 {
        self.count as f64 / self.days as f64
    }
}

/// Channel operating point: capacity and reset radius, both in bitcoins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSetting {
    pub capacity: f64,
    pub reset_radius: f64,
}

impl ChannelSetting {
    pub fn new(capacity: f64, reset_radius: f64) -> Result<Self> {
        if !(capacity.is_finite() && capacity > 0.0) {
            return Err(Error::invalid("w", format!("capacity must be positive, got {capacity}")));
        }
        if !(reset_radius >= 0.0 && reset_radius < capacity / 2.0) {
            return Err(Error::invalid(
                "reset_radius",
                format!("must lie in [0, w/2), got {reset_radius} for w = {capacity}"),
            ));
        }
        Ok(ChannelSetting { capacity, reset_radius })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SimOutcome {
    pub days: u32,
    /// On-chain transfer records plus `a` records per reset.
    pub blockchain_hits: f64,
    pub reset_count: u64,
    pub in_channel_count: u64,
    pub on_chain_count: u64,
    pub skipped_count: u64,
    pub lightning_volume: f64,
    pub on_chain_volume: f64,
    /// `beta` times the size of every executed transfer.
    pub total_value: f64,
    pub blockchain_cost: f64,
    /// Simple daily interest on the locked capacity.
    pub economic_cost: f64,
    pub net_utility: f64,
}

impl SimOutcome {
    pub fn transfer_count(&self) -> u64 {
        self.in_channel_count + self.on_chain_count + self.skipped_count
    }

    pub fn records_per_day(&self) -> f64 {
        self.blockchain_hits / self.days as f64
    }

    pub fn channel_cost(&self) -> f64 {
        self.blockchain_cost + self.economic_cost
    }
}

/// Replays `seq` through a channel starting at `w/2`.
///
/// A transfer the payer cannot cover goes on-chain when `beta z > phi` and is
/// dropped otherwise. After each in-channel transfer the channel is reset to
/// `w/2` once the state is within the reset radius of either wall.
pub fn run_channel(seq: &TransferSequence, setting: ChannelSetting, market: &MarketParams, phi: f64) -> SimOutcome {
    let w = setting.capacity;
    let radius = setting.reset_radius;
    let half = w / 2.0;
    let beta = market.beta;
    let mut state = half;
    let mut out = SimOutcome { days: seq.days, ..SimOutcome::default() };
    let mut in_value = 0.0;
    let mut chain_value = 0.0;

    for t in &seq.transfers {
        let z = t.size;
        let payer_balance = match t.direction {
            Direction::AliceToBob => state,
            Direction::BobToAlice => w - state,
        };
        if payer_balance >= z {
            match t.direction {
                Direction::AliceToBob => state -= z,
                Direction::BobToAlice => state += z,
            }
            out.in_channel_count += 1;
            out.lightning_volume += z;
            in_value += z;
            if state <= radius || state >= w - radius {
                out.reset_count += 1;
                state = half;
            }
        } else if beta * z > phi {
            out.on_chain_count += 1;
            out.on_chain_volume += z;
            chain_value += z;
        } else {
            out.skipped_count += 1;
        }
    }

    out.blockchain_hits = out.on_chain_count as f64 + market.a * out.reset_count as f64;
    out.total_value = beta * (in_value + chain_value);
    out.blockchain_cost = phi * out.blockchain_hits;
    out.economic_cost = w * market.r * seq.days as f64;
    out.net_utility = out.total_value - out.blockchain_cost - out.economic_cost;
    out
}

/// Everything needed to simulate one channel from a seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimChannelConfig {
    pub setting: ChannelSetting,
    pub dist: TransferSizeDist,
    pub pair: PairParams,
    pub market: MarketParams,
    pub horizon_days: u32,
    pub phi: f64,
    pub seed: u64,
    #[serde(default)]
    pub regime: TransferSizeRegime,
}

impl SimChannelConfig {
    pub fn validate(&self) -> Result<()> {
        ChannelSetting::new(self.setting.capacity, self.setting.reset_radius)?;
        self.dist.validate()?;
        self.pair.validate()?;
        self.market.validate()?;
        if !self.pair.is_symmetric() {
            return Err(Error::invalid("pair", "the simulator models symmetric pairs only"));
        }
        if self.horizon_days == 0 {
            return Err(Error::invalid("horizon_days", "must be at least one day"));
        }
        if !(self.phi >= 0.0) {
            return Err(Error::invalid("phi", format!("must be nonnegative, got {}", self.phi)));
        }
        Ok(())
    }
}

/// Simulates one channel; identical configs give identical outcomes.
pub fn simulate_channel(cfg: &SimChannelConfig) -> Result<SimOutcome> {
    cfg.validate()?;
    let mut rng = stream_rng(cfg.seed, 0);
    let seq = TransferSequence::generate(&cfg.pair, &cfg.dist, cfg.regime, cfg.horizon_days, &mut rng);
    Ok(run_channel(&seq, cfg.setting, &cfg.market, cfg.phi))
}
