//! Simulated demand for records, equilibrium fees and network statistics.

use rayon::prelude::*;
use serde::Serialize;

use super::channel::{run_channel, TransferSequence};
use super::sweep::{ChannelPolicy, SimEnv};
use super::SimProtocol;
use crate::error::{Error, Result};
use crate::market::World;
use crate::model::MarketParams;
use crate::numerics::{brent, log_log_fit, polyfit, PowerLawFit, RootOptions};

/// What one pair does over its horizon at a given fee, per day.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PairActivity {
    pub lightning_adopted: bool,
    pub records: f64,
    pub lightning_count: f64,
    pub chain_count: f64,
    pub lightning_volume: f64,
    pub chain_volume: f64,
    pub net_utility: f64,
}

/// Blockchain-only activity: transfers with `beta z > phi` go on-chain.
pub fn activity_no_lightning(seq: &TransferSequence, market: &MarketParams, phi: f64) -> PairActivity {
    let o = seq.on_chain_only(market, phi);
    let days = seq.days as f64;
    PairActivity {
        lightning_adopted: false,
        records: o.count as f64 / days,
        lightning_count: 0.0,
        chain_count: o.count as f64 / days,
        lightning_volume: 0.0,
        chain_volume: o.volume / days,
        net_utility: o.net_utility / days,
    }
}

/// The pair opens a channel iff its total cost does not exceed the total
/// value of the transfers; otherwise it falls back to the blockchain.
pub fn activity_with_lightning(
    seq: &TransferSequence,
    market: &MarketParams,
    policy: &ChannelPolicy,
    phi: f64,
) -> Result<PairActivity> {
    if !(phi > 0.0) {
        return Err(Error::invalid("phi", format!("must be positive, got {phi}")));
    }
    let o = run_channel(seq, policy.setting(phi)?, market, phi);
    if o.channel_cost() > o.total_value {
        return Ok(activity_no_lightning(seq, market, phi));
    }
    let days = seq.days as f64;
    Ok(PairActivity {
        lightning_adopted: true,
        records: o.blockchain_hits / days,
        lightning_count: o.in_channel_count as f64 / days,
        chain_count: o.on_chain_count as f64 / days,
        lightning_volume: o.lightning_volume / days,
        chain_volume: o.on_chain_volume / days,
        net_utility: o.net_utility / days,
    })
}

fn mean_activity(items: &[PairActivity]) -> MeanActivity {
    let n = items.len() as f64;
    let m = |f: fn(&PairActivity) -> f64| items.iter().map(f).sum::<f64>() / n;
    MeanActivity {
        adoption: m(|a| if a.lightning_adopted { 1.0 } else { 0.0 }),
        records: m(|a| a.records),
        lightning_count: m(|a| a.lightning_count),
        chain_count: m(|a| a.chain_count),
        lightning_volume: m(|a| a.lightning_volume),
        chain_volume: m(|a| a.chain_volume),
        net_utility: m(|a| a.net_utility),
    }
}

/// Replication means of [`PairActivity`]; `adoption` is the share of
/// replications that opened a channel.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct MeanActivity {
    pub adoption: f64,
    pub records: f64,
    pub lightning_count: f64,
    pub chain_count: f64,
    pub lightning_volume: f64,
    pub chain_volume: f64,
    pub net_utility: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimDemandPoint {
    pub phi: f64,
    pub with_lightning: MeanActivity,
    pub no_lightning: MeanActivity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimDemandCurve {
    pub points: Vec<SimDemandPoint>,
    pub with_lightning_fit: Option<PowerLawFit>,
    pub no_lightning_fit: Option<PowerLawFit>,
}

/// Records per pair per day over `phi_grid`, with and without channels.
pub fn demand_curve_sim(
    env: &SimEnv,
    policy: &ChannelPolicy,
    phi_grid: &[f64],
    protocol: &SimProtocol,
    seed: u64,
) -> Result<SimDemandCurve> {
    env.validate()?;
    protocol.validate()?;
    let seqs = env.sequences(protocol, seed);
    let points = phi_grid
        .iter()
        .map(|&phi| {
            let with = seqs
                .par_iter()
                .map(|s| activity_with_lightning(s, &env.market, policy, phi))
                .collect::<Result<Vec<_>>>()?;
            let without: Vec<_> = seqs.par_iter().map(|s| activity_no_lightning(s, &env.market, phi)).collect();
            Ok(SimDemandPoint { phi, with_lightning: mean_activity(&with), no_lightning: mean_activity(&without) })
        })
        .collect::<Result<Vec<_>>>()?;
    let phis: Vec<f64> = points.iter().map(|p| p.phi).collect();
    let with: Vec<f64> = points.iter().map(|p| p.with_lightning.records).collect();
    let without: Vec<f64> = points.iter().map(|p| p.no_lightning.records).collect();
    Ok(SimDemandCurve {
        with_lightning_fit: log_log_fit(&phis, &with),
        no_lightning_fit: log_log_fit(&phis, &without),
        points,
    })
}

fn activity(seq: &TransferSequence, market: &MarketParams, policy: &ChannelPolicy, world: World, phi: f64) -> Result<PairActivity> {
    match world {
        World::WithLightning => activity_with_lightning(seq, market, policy, phi),
        World::NoLightning => Ok(activity_no_lightning(seq, market, phi)),
    }
}

/// Smallest fee tried when bracketing the equilibrium.
pub const PHI_FLOOR: f64 = 1e-12;

/// Fee at which `n/2` pairs replaying `seq` demand exactly `tau` records per
/// day. `Ok(None)` when demand cannot reach supply even for free records.
pub fn equilibrium_on(
    seq: &TransferSequence,
    market: &MarketParams,
    policy: &ChannelPolicy,
    world: World,
    n: f64,
) -> Result<Option<f64>> {
    let surplus = |phi: f64| -> Result<f64> {
        Ok(n / 2.0 * activity(seq, market, policy, world, phi)?.records - market.tau)
    };
    if surplus(PHI_FLOOR)? <= 0.0 {
        return Ok(None);
    }
    let mut hi = 1e-3;
    let mut steps = 0;
    while surplus(hi)? > 0.0 {
        hi *= 4.0;
        steps += 1;
        if steps > 60 {
            return Err(Error::BracketFailure { lo: PHI_FLOOR, hi });
        }
    }
    let lo = if steps > 0 { hi / 4.0 } else { PHI_FLOOR };
    let mut failure = None;
    let root = brent(
        |phi| match surplus(phi) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        RootOptions::default(),
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(Some(root)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimEquilibrium {
    pub n: f64,
    pub tau: f64,
    /// Mean over replications; replications that never clear count as 0.
    pub phi: f64,
    pub phi_std_err: f64,
    pub cleared_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimPriceCurve {
    pub world: World,
    pub points: Vec<SimEquilibrium>,
    /// Log–log fit of the mean fee against `n`, over points with a positive fee.
    pub fit: Option<PowerLawFit>,
    /// Degree-2 polynomial in `n`, constant term first.
    pub quadratic: Option<Vec<f64>>,
}

fn equilibria(
    seqs: &[TransferSequence],
    market: &MarketParams,
    policy: &ChannelPolicy,
    world: World,
    n: f64,
) -> Result<Vec<Option<f64>>> {
    seqs.par_iter().map(|s| equilibrium_on(s, market, policy, world, n)).collect()
}

fn summarize(n: f64, tau: f64, roots: &[Option<f64>]) -> SimEquilibrium {
    let phis: Vec<f64> = roots.iter().map(|r| r.unwrap_or(0.0)).collect();
    let s = crate::numerics::Summary::of(&phis);
    SimEquilibrium {
        n,
        tau,
        phi: s.mean,
        phi_std_err: s.std_err,
        cleared_share: roots.iter().filter(|r| r.is_some()).count() as f64 / roots.len() as f64,
    }
}

/// Mean equilibrium fee for each `n`.
pub fn price_curve_sim(
    env: &SimEnv,
    policy: &ChannelPolicy,
    world: World,
    n_grid: &[f64],
    protocol: &SimProtocol,
    seed: u64,
) -> Result<SimPriceCurve> {
    env.validate()?;
    protocol.validate()?;
    let seqs = env.sequences(protocol, seed);
    let points = n_grid
        .iter()
        .map(|&n| Ok(summarize(n, env.market.tau, &equilibria(&seqs, &env.market, policy, world, n)?)))
        .collect::<Result<Vec<_>>>()?;
    let ns: Vec<f64> = points.iter().map(|p| p.n).collect();
    let phis: Vec<f64> = points.iter().map(|p| p.phi).collect();
    Ok(SimPriceCurve { world, fit: log_log_fit(&ns, &phis), quadratic: polyfit(&ns, &phis, 2), points })
}

/// Network-wide daily statistics at the equilibrium fee.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NetworkStats {
    pub n: f64,
    pub tau: f64,
    pub world: World,
    pub phi: f64,
    pub records_used: f64,
    pub lightning_count: f64,
    pub chain_count: f64,
    pub lightning_volume: f64,
    pub chain_volume: f64,
    pub miner_revenue: f64,
    pub utility_per_user: f64,
}

fn network_point(
    seqs: &[TransferSequence],
    market: &MarketParams,
    policy: &ChannelPolicy,
    world: World,
    n: f64,
) -> Result<NetworkStats> {
    let per_rep = seqs
        .par_iter()
        .map(|s| {
            let phi = equilibrium_on(s, market, policy, world, n)?.unwrap_or(0.0);
            let act = if phi > 0.0 {
                activity(s, market, policy, world, phi)?
            } else {
                // Free records: every transfer goes on-chain at no cost.
                activity_no_lightning(s, market, 0.0)
            };
            Ok((phi, act))
        })
        .collect::<Result<Vec<_>>>()?;
    let reps = per_rep.len() as f64;
    let pairs = n / 2.0;
    let m = |f: &dyn Fn(f64, &PairActivity) -> f64| per_rep.iter().map(|(p, a)| f(*p, a)).sum::<f64>() / reps;
    Ok(NetworkStats {
        n,
        tau: market.tau,
        world,
        phi: m(&|p, _| p),
        records_used: m(&|_, a| pairs * a.records),
        lightning_count: m(&|_, a| pairs * a.lightning_count),
        chain_count: m(&|_, a| pairs * a.chain_count),
        lightning_volume: m(&|_, a| pairs * a.lightning_volume),
        chain_volume: m(&|_, a| pairs * a.chain_volume),
        miner_revenue: m(&|p, a| p * pairs * a.records),
        utility_per_user: m(&|_, a| a.net_utility / 2.0),
    })
}

/// Statistics for every `(tau, n, world)` combination, `tau` outermost.
pub fn network_sweep(
    env: &SimEnv,
    policy: &ChannelPolicy,
    n_grid: &[f64],
    tau_values: &[f64],
    protocol: &SimProtocol,
    seed: u64,
) -> Result<Vec<NetworkStats>> {
    env.validate()?;
    protocol.validate()?;
    let seqs = env.sequences(protocol, seed);
    let mut rows = Vec::with_capacity(tau_values.len() * n_grid.len() * 2);
    for &tau in tau_values {
        let market = env.market.with_tau(tau);
        market.validate()?;
        for &n in n_grid {
            for world in [World::WithLightning, World::NoLightning] {
                rows.push(network_point(&seqs, &market, policy, world, n)?);
            }
        }
    }
    Ok(rows)
}
