//! Reset-radius and capacity optimization over replicated transfer sequences.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::channel::{run_channel, ChannelSetting, SimOutcome, TransferSequence};
use super::SimProtocol;
use crate::error::{Error, Result};
use crate::model::{stream_rng, MarketParams, PairParams, TransferSizeDist, TransferSizeRegime};
use crate::numerics::{argmax, golden_section_min, linear_fit, log_log_fit, LinearFit, PowerLawFit};

/// Fixed fee at which the reset policy is calibrated.
pub const RESET_CALIBRATION_FEE: f64 = 0.001;

/// Reset radius grid `k w / 100` for `k = 0..50`.
pub const RADIUS_STEPS: usize = 50;

/// Shared inputs of every sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimEnv {
    pub market: MarketParams,
    pub pair: PairParams,
    pub dist: TransferSizeDist,
    pub regime: TransferSizeRegime,
}

impl Default for SimEnv {
    fn default() -> Self {
        SimEnv {
            market: MarketParams::default(),
            pair: PairParams::default(),
            dist: TransferSizeDist::default(),
            regime: TransferSizeRegime::PerTransfer,
        }
    }
}

impl SimEnv {
    pub fn validate(&self) -> Result<()> {
        self.market.validate()?;
        self.pair.validate()?;
        self.dist.validate()?;
        if !self.pair.is_symmetric() {
            return Err(Error::invalid("pair", "the simulator models symmetric pairs only"));
        }
        Ok(())
    }

    /// One transfer sequence per replication; replication `i` uses stream `i`.
    pub fn sequences(&self, protocol: &SimProtocol, seed: u64) -> Vec<TransferSequence> {
        (0..protocol.replications as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(seed, i);
                TransferSequence::generate(&self.pair, &self.dist, self.regime, protocol.horizon_days, &mut rng)
            })
            .collect()
    }
}

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

/// Mean outcome fields over replications, in replication order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct MeanOutcome {
    pub blockchain_hits: f64,
    pub reset_count: f64,
    pub in_channel_count: f64,
    pub on_chain_count: f64,
    pub skipped_count: f64,
    pub total_value: f64,
    pub blockchain_cost: f64,
    pub economic_cost: f64,
    pub net_utility: f64,
}

impl MeanOutcome {
    pub fn of(outcomes: &[SimOutcome]) -> Self {
        let m = |f: fn(&SimOutcome) -> f64| mean(outcomes.iter().map(f));
        MeanOutcome {
            blockchain_hits: m(|o| o.blockchain_hits),
            reset_count: m(|o| o.reset_count as f64),
            in_channel_count: m(|o| o.in_channel_count as f64),
            on_chain_count: m(|o| o.on_chain_count as f64),
            skipped_count: m(|o| o.skipped_count as f64),
            total_value: m(|o| o.total_value),
            blockchain_cost: m(|o| o.blockchain_cost),
            economic_cost: m(|o| o.economic_cost),
            net_utility: m(|o| o.net_utility),
        }
    }
}

/// Runs every sequence through one channel setting.
pub fn run_all(seqs: &[TransferSequence], setting: ChannelSetting, market: &MarketParams, phi: f64) -> Vec<SimOutcome> {
    seqs.par_iter().map(|s| run_channel(s, setting, market, phi)).collect()
}

/// Performance at one reset radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadiusPoint {
    pub reset_radius: f64,
    pub mean: MeanOutcome,
}

/// Radius sweep at one capacity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusSweep {
    pub capacity: f64,
    pub phi: f64,
    pub points: Vec<RadiusPoint>,
    /// Radius maximizing mean net utility.
    pub best_radius: f64,
    /// Radius minimizing mean blockchain hits.
    pub fewest_hits_radius: f64,
}

impl RadiusSweep {
    /// True when the best radius is the smallest one on the grid.
    pub fn at_boundary(&self) -> bool {
        self.best_radius == 0.0
    }
}

pub fn radius_grid(w: f64) -> Vec<f64> {
    (0..RADIUS_STEPS).map(|k| k as f64 * w / 100.0).collect()
}

/// Evaluates every grid radius on the same sequences.
pub fn radius_sweep(seqs: &[TransferSequence], w: f64, phi: f64, market: &MarketParams) -> Result<RadiusSweep> {
    if seqs.is_empty() {
        return Err(Error::invalid("replications", "need at least one replication"));
    }
    let points = radius_grid(w)
        .into_iter()
        .map(|r| {
            let setting = ChannelSetting::new(w, r)?;
            Ok(RadiusPoint { reset_radius: r, mean: MeanOutcome::of(&run_all(seqs, setting, market, phi)) })
        })
        .collect::<Result<Vec<_>>>()?;
    let utility: Vec<f64> = points.iter().map(|p| p.mean.net_utility).collect();
    let neg_hits: Vec<f64> = points.iter().map(|p| -p.mean.blockchain_hits).collect();
    let best = argmax(&utility).ok_or(Error::NoConvergence { iterations: 0 })?;
    let fewest = argmax(&neg_hits).ok_or(Error::NoConvergence { iterations: 0 })?;
    Ok(RadiusSweep {
        capacity: w,
        phi,
        best_radius: points[best].reset_radius,
        fewest_hits_radius: points[fewest].reset_radius,
        points,
    })
}

/// Optimal radius for each capacity and the linear fit through them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResetRadiusStudy {
    pub phi: f64,
    pub capacities: Vec<f64>,
    pub best_radii: Vec<f64>,
    pub fit: LinearFit,
}

pub fn reset_radius_study(env: &SimEnv, w_grid: &[f64], phi: f64, protocol: &SimProtocol, seed: u64) -> Result<ResetRadiusStudy> {
    env.validate()?;
    protocol.validate()?;
    let seqs = env.sequences(protocol, seed);
    let best_radii = w_grid
        .iter()
        .map(|&w| radius_sweep(&seqs, w, phi, &env.market).map(|s| s.best_radius))
        .collect::<Result<Vec<_>>>()?;
    let fit = linear_fit(w_grid, &best_radii)
        .ok_or_else(|| Error::invalid("w_grid", "need at least two distinct capacities"))?;
    Ok(ResetRadiusStudy { phi, capacities: w_grid.to_vec(), best_radii, fit })
}

/// Reset radius as a linear function of capacity, clamped to the grid range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResetPolicy {
    pub slope: f64,
    pub intercept: f64,
}

impl ResetPolicy {
    pub fn radius(&self, w: f64) -> f64 {
        let max = (RADIUS_STEPS - 1) as f64 * w / 100.0;
        (self.intercept + self.slope * w).clamp(0.0, max)
    }

    pub fn setting(&self, w: f64) -> Result<ChannelSetting> {
        ChannelSetting::new(w, self.radius(w))
    }
}

impl From<LinearFit> for ResetPolicy {
    fn from(fit: LinearFit) -> Self {
        ResetPolicy { slope: fit.slope, intercept: fit.intercept }
    }
}

/// Search range for capacities, in bitcoins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityRange {
    pub lo: f64,
    pub hi: f64,
    pub coarse_points: usize,
}

impl Default for CapacityRange {
    fn default() -> Self {
        CapacityRange { lo: 1e-3, hi: 1e3, coarse_points: 43 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityOptimum {
    pub phi: f64,
    pub capacity: f64,
    pub reset_radius: f64,
    pub mean: MeanOutcome,
}

/// Capacity maximizing mean net utility: coarse log grid, then golden section
/// between the neighbours of the best grid point.
pub fn optimal_capacity_on(
    seqs: &[TransferSequence],
    phi: f64,
    market: &MarketParams,
    reset: &ResetPolicy,
    range: &CapacityRange,
) -> Result<CapacityOptimum> {
    if seqs.is_empty() {
        return Err(Error::invalid("replications", "need at least one replication"));
    }
    if !(range.lo > 0.0 && range.hi > range.lo && range.coarse_points >= 3) {
        return Err(Error::invalid("capacity_range", "need 0 < lo < hi and at least 3 points"));
    }
    let eval = |w: f64| -> Result<MeanOutcome> {
        Ok(MeanOutcome::of(&run_all(seqs, reset.setting(w)?, market, phi)))
    };
    let grid = crate::numerics::log_space(range.lo, range.hi, range.coarse_points);
    let utils = grid
        .iter()
        .map(|&w| eval(w).map(|m| m.net_utility))
        .collect::<Result<Vec<_>>>()?;
    let i = argmax(&utils).ok_or(Error::NoConvergence { iterations: 0 })?;
    let lo = grid[i.saturating_sub(1)].ln();
    let hi = grid[(i + 1).min(grid.len() - 1)].ln();
    let (x, neg) = golden_section_min(
        |lw| eval(lw.exp()).map(|m| -m.net_utility).unwrap_or(f64::INFINITY),
        lo,
        hi,
        1e-4,
        100,
    );
    let w = if -neg >= utils[i] { x.exp() } else { grid[i] };
    Ok(CapacityOptimum { phi, capacity: w, reset_radius: reset.radius(w), mean: eval(w)? })
}

/// Optimal capacity per fee and the power-law fit `w* = c phi^k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityStudy {
    pub optima: Vec<CapacityOptimum>,
    pub fit: PowerLawFit,
}

pub fn capacity_study(
    env: &SimEnv,
    phi_grid: &[f64],
    reset: &ResetPolicy,
    range: &CapacityRange,
    protocol: &SimProtocol,
    seed: u64,
) -> Result<CapacityStudy> {
    env.validate()?;
    protocol.validate()?;
    let seqs = env.sequences(protocol, seed);
    let optima = phi_grid
        .iter()
        .map(|&phi| optimal_capacity_on(&seqs, phi, &env.market, reset, range))
        .collect::<Result<Vec<_>>>()?;
    let phis: Vec<f64> = optima.iter().map(|o| o.phi).collect();
    let caps: Vec<f64> = optima.iter().map(|o| o.capacity).collect();
    let fit = log_log_fit(&phis, &caps)
        .ok_or_else(|| Error::invalid("phi_grid", "need at least two positive fees"))?;
    Ok(CapacityStudy { optima, fit })
}

/// How a channel is funded and operated at a given fee.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelPolicy {
    pub reset: ResetPolicy,
    /// `w*(phi) = coefficient * phi^exponent`.
    pub capacity_coefficient: f64,
    pub capacity_exponent: f64,
}

impl ChannelPolicy {
    pub fn capacity(&self, phi: f64) -> f64 {
        self.capacity_coefficient * phi.powf(self.capacity_exponent)
    }

    pub fn setting(&self, phi: f64) -> Result<ChannelSetting> {
        self.reset.setting(self.capacity(phi))
    }

    pub fn from_fits(reset: LinearFit, capacity: PowerLawFit) -> Self {
        ChannelPolicy {
            reset: reset.into(),
            capacity_coefficient: capacity.coefficient,
            capacity_exponent: capacity.exponent,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seqs(reps: usize, days: u32) -> Vec<TransferSequence> {
        SimEnv::default().sequences(&SimProtocol { replications: reps, horizon_days: days, grid_points: 5 }, 9)
    }

    #[test]
    fn radius_grid_spacing() {
        let g = radius_grid(10.0);
        assert_eq!(g.len(), 50);
        assert_eq!(g[0], 0.0);
        assert!((g[5] - 0.5).abs() < 1e-15);
        assert!(*g.last().unwrap() < 5.0);
    }

    #[test]
    fn huge_fee_prefers_no_reset() {
        let s = radius_sweep(&seqs(4, 200), 1.0, 10.0, &MarketParams::default()).unwrap();
        assert!(s.at_boundary());
    }

    #[test]
    fn policy_clamps() {
        let p = ResetPolicy { slope: 0.05, intercept: -0.1 };
        assert_eq!(p.radius(1.0), 0.0);
        assert!((p.radius(10.0) - 0.4).abs() < 1e-12);
        let wide = ResetPolicy { slope: 1.0, intercept: 0.0 };
        assert!(wide.radius(2.0) < 1.0);
        assert!(wide.setting(2.0).is_ok());
    }

    #[test]
    fn capacity_optimum_beats_neighbours() {
        let s = seqs(6, 300);
        let m = MarketParams::default();
        let reset = ResetPolicy { slope: 0.05, intercept: 0.0 };
        let opt = optimal_capacity_on(&s, 0.001, &m, &reset, &CapacityRange::default()).unwrap();
        for factor in [0.5, 2.0] {
            let w = opt.capacity * factor;
            let other = MeanOutcome::of(&run_all(&s, reset.setting(w).unwrap(), &m, 0.001));
            assert!(opt.mean.net_utility >= other.net_utility);
        }
    }

    #[test]
    fn sequences_are_deterministic() {
        assert_eq!(seqs(3, 50), seqs(3, 50));
    }
}
