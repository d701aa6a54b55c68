//! Hub-and-spoke networks: every user keeps one channel with a central bank.
//!
//! A user's channel sees the sum of the flows to and from every other user,
//! so its lifetime and fee follow from the single-channel results with the
//! aggregated rates. A transfer between two users crosses two channels and
//! the bank carries none of the cost, which doubles the fee a user faces.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand_distr::Poisson;
use serde::Serialize;

use crate::channel::{fee_exact, lifetime_days, optimal_initialization, ChannelSpec, Initialization, LifetimeModel};
use crate::error::{Error, Result};
use crate::market::{
    demand_with_lightning_scaled, equilibrium_fee_scaled, DemandMethod, DemandPoint, EquilibriumResult,
    LightningScaling, SolveMethod, World,
};
use crate::model::{stream_rng, MarketParams, PairParams, TransferSizeDist};

/// Cost multipliers of the star relative to pairs: each user pays the full
/// cost of a channel and every user, not every pair, holds one.
pub const STAR_SCALING: LightningScaling = LightningScaling { fee_factor: 2.0, channels_per_pair: 2.0 };

#[derive(Debug, Clone, PartialEq, Serialize)]
enum Flows {
    /// Every user sends `lambda` transfers a day in total, spread evenly
    /// over the other users.
    Uniform { lambda: f64 },
    /// `rates[i][j]` transfers a day from `i` to `j`.
    Matrix { rates: Vec<Vec<f64>>, out_rate: Vec<f64>, in_rate: Vec<f64> },
}

/// Users of a star and the transfer rates between them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StarParams {
    n_users: usize,
    flows: Flows,
}

impl StarParams {
    /// Balanced network where each user sends and receives `lambda` a day.
    pub fn uniform(n_users: usize, lambda: f64) -> Result<Self> {
        if n_users < 2 {
            return Err(Error::invalid("n_users", format!("need at least two users, got {n_users}")));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::invalid("lambda", format!("must be positive, got {lambda}")));
        }
        Ok(StarParams { n_users, flows: Flows::Uniform { lambda } })
    }

    /// Network from a square matrix of rates with a zero diagonal.
    pub fn from_rates(rates: Vec<Vec<f64>>) -> Result<Self> {
        let n = rates.len();
        if n < 2 {
            return Err(Error::invalid("rates", format!("need at least two users, got {n}")));
        }
        let mut out_rate = vec![0.0; n];
        let mut in_rate = vec![0.0; n];
        for (i, row) in rates.iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid("rates", format!("row {i} has {} entries, expected {n}", row.len())));
            }
            for (j, &v) in row.iter().enumerate() {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::invalid("rates", format!("entry ({i}, {j}) must be nonnegative, got {v}")));
                }
                if i == j && v != 0.0 {
                    return Err(Error::invalid("rates", format!("user {i} cannot pay itself")));
                }
                out_rate[i] += v;
                in_rate[j] += v;
            }
        }
        Ok(StarParams { n_users: n, flows: Flows::Matrix { rates, out_rate, in_rate } })
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.flows, Flows::Uniform { .. })
    }

    fn check_user(&self, i: usize) -> Result<()> {
        if i >= self.n_users {
            return Err(Error::invalid("user", format!("{i} out of range for {} users", self.n_users)));
        }
        Ok(())
    }

    /// `lambda_i^+`: transfers a day sent by user `i`.
    pub fn out_rate(&self, i: usize) -> Result<f64> {
        self.check_user(i)?;
        Ok(match &self.flows {
            Flows::Uniform { lambda } => *lambda,
            Flows::Matrix { out_rate, .. } => out_rate[i],
        })
    }

    /// `lambda_i^-`: transfers a day received by user `i`.
    pub fn in_rate(&self, i: usize) -> Result<f64> {
        self.check_user(i)?;
        Ok(match &self.flows {
            Flows::Uniform { lambda } => *lambda,
            Flows::Matrix { in_rate, .. } => in_rate[i],
        })
    }

    /// Rate from `i` to `j`.
    pub fn rate(&self, i: usize, j: usize) -> Result<f64> {
        self.check_user(i)?;
        self.check_user(j)?;
        Ok(match &self.flows {
            _ if i == j => 0.0,
            Flows::Uniform { lambda } => lambda / (self.n_users - 1) as f64,
            Flows::Matrix { rates, .. } => rates[i][j],
        })
    }

    /// `ell_i`: all transfers a day crossing user `i`'s channel.
    pub fn ell(&self, i: usize) -> Result<f64> {
        Ok(self.out_rate(i)? + self.in_rate(i)?)
    }

    /// Share of user `i`'s transfers that user `i` sends.
    pub fn p(&self, i: usize) -> Result<f64> {
        let ell = self.ell(i)?;
        if ell == 0.0 {
            return Err(Error::invalid("user", format!("user {i} has no transfers")));
        }
        Ok(self.out_rate(i)? / ell)
    }

    pub fn q(&self, i: usize) -> Result<f64> {
        Ok(1.0 - self.p(i)?)
    }

    /// The user-to-bank channel as a pair: the user is Alice, the bank Bob.
    pub fn user_pair(&self, i: usize) -> Result<PairParams> {
        PairParams::new(self.out_rate(i)?, self.in_rate(i)?)
    }
}

/// Expected lifetime in days of user `i`'s channel of capacity `w` when the
/// user holds `m` of it.
pub fn star_channel_lifetime(star: &StarParams, i: usize, w: f64, m: f64, model: LifetimeModel) -> Result<f64> {
    let spec = ChannelSpec::new(w, m, 1.0, star.user_pair(i)?)?;
    lifetime_days(&spec, model)
}

/// Lifetime with the exact model for the user's balance of flows.
pub fn star_channel_lifetime_exact(star: &StarParams, i: usize, w: f64, m: f64) -> Result<f64> {
    let pair = star.user_pair(i)?;
    star_channel_lifetime(star, i, w, m, LifetimeModel::exact_for(&pair))
}

/// Optimal starting balance of user `i`; the bank holds the rest.
pub fn star_optimal_initialization(star: &StarParams, i: usize, w: f64) -> Result<Initialization> {
    Ok(optimal_initialization(&star.user_pair(i)?, w))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StarFee {
    /// Cost per transfer crossing the user's channel.
    pub channel_fee: f64,
    /// Fee the user faces per transfer, twice the channel fee.
    pub user_fee: f64,
}

/// Fee of user `i`'s channel of capacity `w` (in transfers of `z` bitcoins).
pub fn star_fee(star: &StarParams, i: usize, market: &MarketParams, z: f64, w: f64, phi: f64) -> Result<StarFee> {
    let channel_fee = fee_exact(market, &star.user_pair(i)?, z, w, phi)?;
    Ok(StarFee { channel_fee, user_fee: STAR_SCALING.fee_factor * channel_fee })
}

/// Cost of one transfer from `i` to `j`: it crosses both users' channels.
#[allow(clippy::too_many_arguments)]
pub fn end_to_end_fee(
    star: &StarParams,
    i: usize,
    j: usize,
    market: &MarketParams,
    z: f64,
    w_i: f64,
    w_j: f64,
    phi: f64,
) -> Result<f64> {
    if i == j {
        return Err(Error::invalid("user", "sender and receiver must differ"));
    }
    Ok(star_fee(star, i, market, z, w_i, phi)?.channel_fee + star_fee(star, j, market, z, w_j, phi)?.channel_fee)
}

/// Bitcoins the bank locks in its channels after optimal initialisation,
/// `sum (w_i - m_i) z`. Nobody is charged for it.
pub fn hub_locked_capital(star: &StarParams, capacities: &[f64], z: f64) -> Result<f64> {
    if capacities.len() != star.n_users() {
        return Err(Error::invalid(
            "capacities",
            format!("expected {} entries, got {}", star.n_users(), capacities.len()),
        ));
    }
    let mut total = 0.0;
    for (i, &w) in capacities.iter().enumerate() {
        if star.ell(i)? == 0.0 {
            continue;
        }
        let init = star_optimal_initialization(star, i, w)?;
        total += (w - init.alice_balance) * z;
    }
    Ok(total)
}

/// Demand curve and equilibrium of a uniform star.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StarMarket {
    pub demand: Vec<DemandPoint>,
    pub equilibrium: EquilibriumResult,
}

/// The pairs market with doubled lightning fees and one channel per user.
///
/// Demand points are per pair of users, as in the pairs market.
pub fn star_market(
    market: &MarketParams,
    star: &StarParams,
    dist: &TransferSizeDist,
    phi_grid: &[f64],
    method: DemandMethod,
) -> Result<StarMarket> {
    let Flows::Uniform { lambda } = star.flows else {
        return Err(Error::invalid("star", "the market needs uniform flows"));
    };
    let pair = PairParams::symmetric(lambda)?;
    let demand = phi_grid
        .iter()
        .map(|&phi| demand_with_lightning_scaled(market, &pair, dist, phi, method, STAR_SCALING))
        .collect::<Result<Vec<_>>>()?;
    let equilibrium = equilibrium_fee_scaled(
        market,
        &pair,
        dist,
        star.n_users() as f64,
        World::WithLightning,
        SolveMethod::Numeric,
        method,
        STAR_SCALING,
    )?;
    Ok(StarMarket { demand, equilibrium })
}

/// Counts from a unit-transfer simulation of a star.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StarSimOutcome {
    pub days: u32,
    pub transfers: u64,
    /// Resets of each user's channel.
    pub resets: Vec<u64>,
    /// Transfers that could not cross one of the two channels.
    pub on_chain: u64,
}

impl StarSimOutcome {
    /// Mean days between resets of user `i`'s channel.
    pub fn mean_lifetime(&self, i: usize) -> f64 {
        self.days as f64 / self.resets[i] as f64
    }
}

/// Routes unit transfers through the bank for `days` days.
///
/// A transfer `i -> j` moves one unit from `i` to the bank on `i`'s channel
/// and one unit from the bank to `j` on `j`'s channel. A channel is reset to
/// its optimal starting balance as soon as either side is empty. Capacities
/// are in transfers.
pub fn simulate_star(star: &StarParams, capacities: &[f64], days: u32, seed: u64) -> Result<StarSimOutcome> {
    let n = star.n_users();
    if capacities.len() != n {
        return Err(Error::invalid("capacities", format!("expected {n} entries, got {}", capacities.len())));
    }
    let mut caps = Vec::with_capacity(n);
    let mut starts = Vec::with_capacity(n);
    for (i, &w) in capacities.iter().enumerate() {
        if !(w >= 1.0 && w.is_finite()) {
            return Err(Error::invalid("capacities", format!("entry {i} must be at least one transfer, got {w}")));
        }
        let w = w.round();
        let start = if star.ell(i)? > 0.0 { star_optimal_initialization(star, i, w)?.alice_balance.round() } else { 0.0 };
        caps.push(w as i64);
        starts.push(start as i64);
    }

    let mut routes = Vec::new();
    let mut weights = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let rate = star.rate(i, j)?;
            if rate > 0.0 {
                routes.push((i, j));
                weights.push(rate);
            }
        }
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::invalid("rates", "no transfers in the network"));
    }
    let pick = WeightedIndex::new(&weights).map_err(|e| Error::invalid("rates", e.to_string()))?;
    let arrivals = Poisson::new(total).map_err(|e| Error::invalid("rates", e.to_string()))?;

    let mut rng = stream_rng(seed, 0);
    let mut balance = starts.clone();
    let mut out = StarSimOutcome { days, transfers: 0, resets: vec![0; n], on_chain: 0 };
    for _ in 0..days {
        let count = arrivals.sample(&mut rng) as u64;
        for _ in 0..count {
            let (i, j) = routes[pick.sample(&mut rng)];
            out.transfers += 1;
            if balance[i] < 1 || caps[j] - balance[j] < 1 {
                out.on_chain += 1;
                continue;
            }
            balance[i] -= 1;
            balance[j] += 1;
            for k in [i, j] {
                if balance[k] == 0 || balance[k] == caps[k] {
                    out.resets[k] += 1;
                    balance[k] = starts[k];
                }
            }
        }
    }
    Ok(out)
}
