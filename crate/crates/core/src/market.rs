//! Pairs-topology fee market: venue thresholds, expected demand for records
//! and the equilibrium record price.
//!
//! Users are grouped in `n / 2` pairs. Each pair transfers a size `z` drawn
//! from a [`TransferSizeDist`] and picks the venue with the highest net
//! utility: nothing (`0`), the blockchain (`beta z - phi`) or an optimally
//! funded channel (`beta z - F_opt(z)`).

use serde::{Deserialize, Serialize};

use crate::channel::optimal_fee;
use crate::error::{Error, Result};
use crate::model::{MarketParams, PairParams, TransferSizeDist};
use crate::numerics::{brent, integrate_range, QuadOptions, RootOptions};

/// Cost of lightning relative to a lone pair.
///
/// `fee_factor` multiplies the per-transfer fee a user faces and
/// `channels_per_pair` counts the channels whose resets a pair of users pays
/// for. Both are 1 for pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LightningScaling {
    pub fee_factor: f64,
    pub channels_per_pair: f64,
}

impl LightningScaling {
    pub const PAIRS: LightningScaling = LightningScaling { fee_factor: 1.0, channels_per_pair: 1.0 };

    pub fn is_pairs(&self) -> bool {
        *self == Self::PAIRS
    }

    fn validate(&self) -> Result<()> {
        if !(self.fee_factor > 0.0 && self.fee_factor.is_finite()) {
            return Err(Error::invalid("fee_factor", "must be positive"));
        }
        if !(self.channels_per_pair >= 0.0 && self.channels_per_pair.is_finite()) {
            return Err(Error::invalid("channels_per_pair", "must be nonnegative"));
        }
        Ok(())
    }
}

/// Transfer-size cutoffs in bitcoins. Each is proportional to `phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    /// Above this, lightning beats not transferring.
    pub t_nl: f64,
    /// Above this, the blockchain beats not transferring.
    pub t_nb: f64,
    /// Above this, the blockchain beats lightning.
    pub t_lb: f64,
}

impl Thresholds {
    /// Lower edge of the blockchain range, `max(t_nb, t_lb)`.
    pub fn blockchain_from(&self) -> f64 {
        self.t_nb.max(self.t_lb)
    }
}

fn check_phi(phi: f64) -> Result<()> {
    if !(phi >= 0.0 && phi.is_finite()) {
        return Err(Error::invalid("phi", format!("must be nonnegative and finite, got {phi}")));
    }
    Ok(())
}

pub fn thresholds(market: &MarketParams, pair: &PairParams, phi: f64) -> Result<Thresholds> {
    thresholds_scaled(market, pair, phi, LightningScaling::PAIRS)
}

/// Thresholds when the lightning fee is multiplied by `scaling.fee_factor`.
pub fn thresholds_scaled(market: &MarketParams, pair: &PairParams, phi: f64, scaling: LightningScaling) -> Result<Thresholds> {
    check_phi(phi)?;
    scaling.validate()?;
    let (a, r, beta, ell) = (market.a, market.r, market.beta, pair.ell());
    let k = scaling.fee_factor;
    let t_nb = phi / beta;
    Ok(if pair.is_symmetric() {
        Thresholds {
            t_nl: 27.0 * k.powi(3) * a * r * r / (ell * ell * beta.powi(3)) * phi,
            t_nb,
            t_lb: ell / (27.0 * k.powi(3) * a * r * r).sqrt() * phi,
        }
    } else {
        let delta = pair.delta();
        Thresholds {
            t_nl: 4.0 * k * k * delta * a * r / (ell * ell * beta * beta) * phi,
            t_nb,
            t_lb: ell * ell / (4.0 * k * k * delta * a * r) * phi,
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Venue {
    None,
    Lightning,
    Blockchain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum World {
    WithLightning,
    NoLightning,
}

/// Net utilities per transfer of `(none, lightning, blockchain)`.
pub fn venue_utilities(market: &MarketParams, pair: &PairParams, z: f64, phi: f64, scaling: LightningScaling) -> (f64, f64, f64) {
    let value = market.beta * z;
    let u_l = value - scaling.fee_factor * optimal_fee(market, pair, z, phi);
    (0.0, u_l, value - phi)
}

/// Venue with the highest net utility. Exact ties go to the blockchain, then
/// to lightning.
pub fn venue_choice(market: &MarketParams, pair: &PairParams, z: f64, phi: f64, world: World) -> Result<Venue> {
    venue_choice_scaled(market, pair, z, phi, world, LightningScaling::PAIRS)
}

pub fn venue_choice_scaled(
    market: &MarketParams,
    pair: &PairParams,
    z: f64,
    phi: f64,
    world: World,
    scaling: LightningScaling,
) -> Result<Venue> {
    check_phi(phi)?;
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::invalid("z", format!("must be positive, got {z}")));
    }
    let (u_n, u_l, u_b) = venue_utilities(market, pair, z, phi, scaling);
    let lightning = world == World::WithLightning;
    Ok(if u_b >= u_n && (!lightning || u_b >= u_l) {
        Venue::Blockchain
    } else if lightning && u_l >= u_n {
        Venue::Lightning
    } else {
        Venue::None
    })
}

/// Expected daily activity of one pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DemandPoint {
    pub phi: f64,
    pub records_per_pair_per_day: f64,
    pub lightning_tx_count: f64,
    pub blockchain_tx_count: f64,
    /// Bitcoins per day.
    pub lightning_volume: f64,
    /// Bitcoins per day; infinite when the size distribution has no mean.
    pub blockchain_volume: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemandMethod {
    /// Closed forms for every built-in distribution.
    #[default]
    ClosedForm,
    /// Adaptive quadrature against the density. A point mass has no density,
    /// so `Constant` always uses the closed form.
    Quadrature,
}

fn quad_opts() -> QuadOptions {
    QuadOptions { abs_tol: 1e-10, ..QuadOptions::default() }
}

/// `int_lo^hi g(z) f(z) dz` clipped to the support of `f`.
fn quad_against(dist: &TransferSizeDist, g: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<f64> {
    let (s_lo, s_hi) = dist.support();
    let (lo, hi) = (lo.max(s_lo), hi.min(s_hi));
    if hi <= lo {
        return Ok(0.0);
    }
    Ok(integrate_range(|z| g(z) * dist.pdf(z), lo, hi, quad_opts())?.value)
}

/// `int_lo^hi z^gamma f(z) dz` in closed form, `0 < gamma < 1`.
fn power_moment(dist: &TransferSizeDist, gamma: f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    match *dist {
        TransferSizeDist::PowerLaw { z_min } => {
            let lo = lo.max(z_min);
            if hi <= lo {
                return 0.0;
            }
            let e = gamma - 1.0;
            let hi_term = if hi.is_infinite() { 0.0 } else { hi.powf(e) };
            z_min * (lo.powf(e) - hi_term) / (1.0 - gamma)
        }
        TransferSizeDist::Uniform { z_max } => {
            let (lo, hi) = (lo.max(0.0), hi.min(z_max));
            if hi <= lo {
                return 0.0;
            }
            (hi.powf(gamma + 1.0) - lo.powf(gamma + 1.0)) / ((gamma + 1.0) * z_max)
        }
        TransferSizeDist::Constant { z } => {
            if z > lo && z < hi {
                z.powf(gamma)
            } else {
                0.0
            }
        }
    }
}

/// Reset records per day of an optimal channel is `coef * z^gamma`.
fn reset_rate_law(market: &MarketParams, pair: &PairParams, phi: f64) -> (f64, f64) {
    let (a, r, ell) = (market.a, market.r, pair.ell());
    if pair.is_symmetric() {
        ((ell * a * r * r / (phi * phi)).cbrt(), 2.0 / 3.0)
    } else {
        ((pair.delta() * a * r / phi).sqrt(), 0.5)
    }
}

fn validate_inputs(market: &MarketParams, pair: &PairParams, dist: &TransferSizeDist) -> Result<()> {
    market.validate()?;
    pair.validate()?;
    dist.validate()
}

/// Demand in a world without channels: every transfer with `beta z > phi`
/// takes one record.
pub fn demand_no_lightning(
    market: &MarketParams,
    pair: &PairParams,
    dist: &TransferSizeDist,
    phi: f64,
    method: DemandMethod,
) -> Result<DemandPoint> {
    validate_inputs(market, pair, dist)?;
    check_phi(phi)?;
    let ell = pair.ell();
    let t_nb = phi / market.beta;
    let (count, volume) = match (method, dist) {
        (DemandMethod::Quadrature, TransferSizeDist::PowerLaw { .. } | TransferSizeDist::Uniform { .. }) => (
            quad_against(dist, |_| 1.0, t_nb, f64::INFINITY)?,
            blockchain_volume_quad(dist, t_nb)?,
        ),
        _ => (dist.survival(t_nb), dist.partial_mean(t_nb, f64::INFINITY)),
    };
    Ok(DemandPoint {
        phi,
        records_per_pair_per_day: ell * count,
        lightning_tx_count: 0.0,
        blockchain_tx_count: ell * count,
        lightning_volume: 0.0,
        blockchain_volume: ell * volume,
    })
}

fn blockchain_volume_quad(dist: &TransferSizeDist, from: f64) -> Result<f64> {
    if dist.support().1.is_infinite() {
        // z f(z) is not integrable on a power-law tail.
        Ok(dist.partial_mean(from, f64::INFINITY))
    } else {
        quad_against(dist, |z| z, from, f64::INFINITY)
    }
}

/// Demand when pairs may open optimally funded channels.
pub fn demand_with_lightning(
    market: &MarketParams,
    pair: &PairParams,
    dist: &TransferSizeDist,
    phi: f64,
    method: DemandMethod,
) -> Result<DemandPoint> {
    demand_with_lightning_scaled(market, pair, dist, phi, method, LightningScaling::PAIRS)
}

pub fn demand_with_lightning_scaled(
    market: &MarketParams,
    pair: &PairParams,
    dist: &TransferSizeDist,
    phi: f64,
    method: DemandMethod,
    scaling: LightningScaling,
) -> Result<DemandPoint> {
    validate_inputs(market, pair, dist)?;
    if !(phi > 0.0 && phi.is_finite()) {
        return Err(Error::invalid("phi", format!("must be positive with lightning, got {phi}")));
    }
    let ell = pair.ell();
    let t = thresholds_scaled(market, pair, phi, scaling)?;
    let (coef, gamma) = reset_rate_law(market, pair, phi);
    let chain_from = t.blockchain_from();
    let quad = method == DemandMethod::Quadrature && !matches!(dist, TransferSizeDist::Constant { .. });

    let (resets, l_share, l_mean, b_share, b_mean) = if quad {
        (
            quad_against(dist, |z| coef * z.powf(gamma), t.t_nl, t.t_lb)?,
            quad_against(dist, |_| 1.0, t.t_nl, t.t_lb)?,
            quad_against(dist, |z| z, t.t_nl, t.t_lb)?,
            quad_against(dist, |_| 1.0, chain_from, f64::INFINITY)?,
            blockchain_volume_quad(dist, chain_from)?,
        )
    } else {
        let l_share = if t.t_lb > t.t_nl { dist.survival(t.t_nl) - dist.survival(t.t_lb) } else { 0.0 };
        (
            coef * power_moment(dist, gamma, t.t_nl, t.t_lb),
            l_share,
            dist.partial_mean(t.t_nl, t.t_lb),
            dist.survival(chain_from),
            dist.partial_mean(chain_from, f64::INFINITY),
        )
    };
    Ok(DemandPoint {
        phi,
        records_per_pair_per_day: scaling.channels_per_pair * resets + ell * b_share,
        lightning_tx_count: ell * l_share,
        blockchain_tx_count: ell * b_share,
        lightning_volume: ell * l_mean,
        blockchain_volume: ell * b_mean,
    })
}

pub fn demand(
    market: &MarketParams,
    pair: &PairParams,
    dist: &TransferSizeDist,
    phi: f64,
    world: World,
    method: DemandMethod,
) -> Result<DemandPoint> {
    match world {
        World::NoLightning => demand_no_lightning(market, pair, dist, phi, method),
        World::WithLightning if phi == 0.0 => demand_no_lightning(market, pair, dist, phi, method),
        World::WithLightning => demand_with_lightning(market, pair, dist, phi, method),
    }
}

/// Symmetric-pair demand for `z ~ Uniform(0, z_max]`, written as the explicit
/// three-piece formula. Valid when `t_nb <= t_lb`.
pub fn uniform_demand_symmetric_piecewise(market: &MarketParams, pair: &PairParams, z_max: f64, phi: f64) -> f64 {
    let (a, r, beta, ell) = (market.a, market.r, market.beta, pair.ell());
    let tail = 729.0 * a * a * phi * r.powi(4) / (5.0 * ell.powi(3) * beta.powi(5) * z_max);
    if phi < 3.0 * z_max / ell * 3f64.sqrt() * a.sqrt() * r {
        -4.0 * 3f64.sqrt() * ell * ell * phi / (45.0 * a.sqrt() * z_max * r) + ell - tail
    } else if phi < ell * ell * beta.powi(3) * z_max / (27.0 * a * r * r) {
        3.0 * ell.cbrt() * a.cbrt() * z_max.powf(2.0 / 3.0) / (5.0 * phi.powf(2.0 / 3.0)) * r.powf(2.0 / 3.0) - tail
    } else {
        0.0
    }
}

/// Asymmetric-pair counterpart of [`uniform_demand_symmetric_piecewise`].
pub fn uniform_demand_asymmetric_piecewise(market: &MarketParams, pair: &PairParams, z_max: f64, phi: f64) -> f64 {
    let (a, r, beta, ell, delta) = (market.a, market.r, market.beta, pair.ell(), pair.delta());
    let tail = 16.0 * delta * delta * a * a * phi * r * r / (3.0 * ell.powi(3) * beta.powi(3) * z_max);
    if phi < 4.0 * delta / (ell * ell) * a * z_max * r {
        -ell.powi(3) * phi / (6.0 * delta * a * z_max * r) + ell - tail
    } else if phi < ell * ell * beta * beta * z_max / (4.0 * delta * a * r) {
        2.0 * delta.sqrt() * a.sqrt() * z_max.sqrt() / (3.0 * phi.sqrt()) * r.sqrt() - tail
    } else {
        0.0
    }
}

/// Which part of the price curve an equilibrium lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriceRegime {
    /// Demand at a zero price does not exceed supply.
    ZeroPrice,
    /// Channels carry enough traffic to lower demand below the no-lightning level.
    LightningDominant,
    /// Demand equals the no-lightning demand at the clearing price.
    CoincidentWithNoLightning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    ClosedForm,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquilibriumResult {
    pub n: f64,
    pub world: World,
    pub phi_eq: f64,
    /// Bitcoins per day, `tau * phi_eq`.
    pub miner_revenue: f64,
    pub demand: DemandPoint,
    pub regime: PriceRegime,
    pub method: SolveMethod,
}

fn check_users(n: f64) -> Result<()> {
    if !(n >= 2.0 && n.is_finite()) {
        return Err(Error::invalid("n", format!("need at least two users, got {n}")));
    }
    Ok(())
}

/// Smallest fee at which `n/2` pairs demand no more than `tau` records a day.
pub fn equilibrium_fee(
    market: &MarketParams,
    pair: &PairParams,
    dist: &TransferSizeDist,
    n: f64,
    world: World,
    solve: SolveMethod,
) -> Result<EquilibriumResult> {
    equilibrium_fee_scaled(market, pair, dist, n, world, solve, DemandMethod::ClosedForm, LightningScaling::PAIRS)
}

#[allow(clippy::too_many_arguments)]
pub fn equilibrium_fee_scaled(
    market: &MarketParams,
    pair: &PairParams,
    dist: &TransferSizeDist,
    n: f64,
    world: World,
    solve: SolveMethod,
    method: DemandMethod,
    scaling: LightningScaling,
) -> Result<EquilibriumResult> {
    validate_inputs(market, pair, dist)?;
    check_users(n)?;
    scaling.validate()?;
    let demand_at = |phi: f64| -> Result<DemandPoint> {
        match world {
            World::WithLightning if phi > 0.0 => demand_with_lightning_scaled(market, pair, dist, phi, method, scaling),
            _ => demand_no_lightning(market, pair, dist, phi, method),
        }
    };
    let pairs = n / 2.0;
    let (phi, used) = if pairs * pair.ell() <= market.tau {
        (0.0, SolveMethod::Numeric)
    } else {
        match (solve, closed_form_equilibrium(market, pair, dist, n, world, scaling)) {
            (SolveMethod::ClosedForm, Some(phi)) => (phi, SolveMethod::ClosedForm),
            _ => (numeric_equilibrium(&demand_at, pairs, market.tau)?, SolveMethod::Numeric),
        }
    };
    let used = if phi == 0.0 { solve } else { used };
    let demand = demand_at(phi)?;
    let regime = if phi == 0.0 {
        PriceRegime::ZeroPrice
    } else if world == World::NoLightning {
        PriceRegime::CoincidentWithNoLightning
    } else {
        let base = demand_no_lightning(market, pair, dist, phi, method)?.records_per_pair_per_day;
        if (base - demand.records_per_pair_per_day).abs() <= 1e-9 * base {
            PriceRegime::CoincidentWithNoLightning
        } else {
            PriceRegime::LightningDominant
        }
    };
    Ok(EquilibriumResult { n, world, phi_eq: phi, miner_revenue: market.tau * phi, demand, regime, method: used })
}

fn numeric_equilibrium(demand_at: &dyn Fn(f64) -> Result<DemandPoint>, pairs: f64, tau: f64) -> Result<f64> {
    let mut failure = None;
    let mut surplus = |phi: f64| match demand_at(phi) {
        Ok(d) => pairs * d.records_per_pair_per_day - tau,
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    };
    let mut hi = 1e-9;
    let mut steps = 0;
    while surplus(hi) > 0.0 {
        hi *= 10.0;
        steps += 1;
        if steps > 40 {
            return Err(Error::BracketFailure { lo: 0.0, hi });
        }
    }
    let lo = if steps == 0 { 0.0 } else { hi / 10.0 };
    let root = brent(&mut surplus, lo, hi, RootOptions::default());
    match failure {
        Some(e) => Err(e),
        None => root,
    }
}

/// Closed-form equilibrium for power-law sizes and lone pairs; `None` where
/// no closed form is implemented. Assumes `n/2 * ell > tau`.
pub fn closed_form_equilibrium(
    market: &MarketParams,
    pair: &PairParams,
    dist: &TransferSizeDist,
    n: f64,
    world: World,
    scaling: LightningScaling,
) -> Option<f64> {
    let (a, r, beta, ell, tau) = (market.a, market.r, market.beta, pair.ell(), market.tau);
    match (*dist, world) {
        (TransferSizeDist::PowerLaw { z_min }, World::NoLightning) => Some(z_min * beta * ell * n / (2.0 * tau)),
        (TransferSizeDist::Uniform { z_max }, World::NoLightning) => Some(beta * z_max * (1.0 - 2.0 * tau / (n * ell))),
        (TransferSizeDist::PowerLaw { z_min }, World::WithLightning) if scaling.is_pairs() => {
            // Once t_nl passes z_min demand equals the no-lightning demand.
            let upper = z_min * beta * ell * n / (2.0 * tau);
            let middle = if pair.is_symmetric() {
                z_min * (27.0 * ell * a).sqrt() * r * (n / (2.0 * tau)).powf(1.5)
            } else {
                z_min * pair.delta() * a * r * (n / tau).powi(2)
            };
            let t_nl_per_phi = thresholds(market, pair, 1.0).ok()?.t_nl;
            Some(if middle * t_nl_per_phi < z_min { middle } else { upper })
        }
        _ => None,
    }
}

/// Equilibria over an ascending grid of user counts.
pub fn price_curve(
    market: &MarketParams,
    pair: &PairParams,
    dist: &TransferSizeDist,
    n_grid: &[f64],
    world: World,
    solve: SolveMethod,
) -> Result<Vec<EquilibriumResult>> {
    if n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("n_grid", "must be strictly increasing"));
    }
    n_grid.iter().map(|&n| equilibrium_fee(market, pair, dist, n, world, solve)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sym() -> PairParams {
        PairParams::default()
    }

    fn asym() -> PairParams {
        PairParams::new(8.0, 2.0).unwrap()
    }

    fn pl() -> TransferSizeDist {
        TransferSizeDist::default()
    }

    #[test]
    fn default_threshold_coefficients() {
        let m = MarketParams::default();
        let t = thresholds(&m, &sym(), 1.0).unwrap();
        assert!((t.t_nl - 0.0036).abs() / 0.0036 < 0.01, "{}", t.t_nl);
        assert_eq!(t.t_nb, 100.0);
        assert!((t.t_lb - 16744.0).abs() / 16744.0 < 0.01, "{}", t.t_lb);
        let t = thresholds(&m, &asym(), 1.0).unwrap();
        assert!((t.t_nl - 0.29).abs() / 0.29 < 0.01, "{}", t.t_nl);
        assert!((t.t_lb - 34564.0).abs() / 34564.0 < 0.01, "{}", t.t_lb);
    }

    #[test]
    fn thresholds_vanish_at_zero_fee() {
        let t = thresholds(&MarketParams::default(), &sym(), 0.0).unwrap();
        assert_eq!((t.t_nl, t.t_nb, t.t_lb), (0.0, 0.0, 0.0));
        assert!(thresholds(&MarketParams::default(), &sym(), -1.0).is_err());
    }

    #[test]
    fn scaled_thresholds_follow_fee_factor() {
        let m = MarketParams::default();
        let k = LightningScaling { fee_factor: 2.0, channels_per_pair: 1.0 };
        for (pair, nl, lb) in [(sym(), 8.0, 8f64.sqrt()), (asym(), 4.0, 4.0)] {
            let base = thresholds(&m, &pair, 0.01).unwrap();
            let s = thresholds_scaled(&m, &pair, 0.01, k).unwrap();
            assert_relative_eq!(s.t_nl, base.t_nl * nl, max_relative = 1e-14);
            assert_relative_eq!(s.t_lb, base.t_lb / lb, max_relative = 1e-14);
            assert_eq!(s.t_nb, base.t_nb);
        }
    }

    #[test]
    fn thresholds_separate_utilities() {
        let m = MarketParams::default();
        for pair in [sym(), asym()] {
            let t = thresholds(&m, &pair, 0.001).unwrap();
            let (_, u_l, u_b) = venue_utilities(&m, &pair, t.t_nl, 0.001, LightningScaling::PAIRS);
            assert!(u_l.abs() < 1e-15);
            let (_, u_l, u_b2) = venue_utilities(&m, &pair, t.t_lb, 0.001, LightningScaling::PAIRS);
            assert!((u_l - u_b2).abs() < 1e-12 * u_b2.abs());
            assert!(u_b < 0.0);
        }
    }

    #[test]
    fn venue_examples() {
        let m = MarketParams::default();
        let v = |z, phi, w| venue_choice(&m, &sym(), z, phi, w).unwrap();
        assert_eq!(v(0.5, 0.001, World::WithLightning), Venue::Lightning);
        assert_eq!(v(1e-6, 0.001, World::WithLightning), Venue::None);
        // t_lb = 0.0167 at this fee, so a 1 BTC transfer goes on-chain either way.
        assert_eq!(v(1.0, 1e-6, World::WithLightning), Venue::Blockchain);
        assert_eq!(v(1.0, 1e-6, World::NoLightning), Venue::Blockchain);
        assert_eq!(v(0.01, 1e-6, World::WithLightning), Venue::Lightning);
        assert_eq!(v(1e-5, 0.001, World::NoLightning), Venue::None);
    }

    #[test]
    fn venue_ties_prefer_blockchain() {
        let m = MarketParams::default();
        // Free records: u_b = beta z equals the best possible value.
        assert_eq!(venue_choice(&m, &sym(), 1.0, 0.0, World::WithLightning).unwrap(), Venue::Blockchain);
    }

    #[test]
    fn power_law_demand_values() {
        let m = MarketParams::default();
        let d = |phi| demand_no_lightning(&m, &sym(), &pl(), phi, DemandMethod::ClosedForm).unwrap();
        assert_eq!(d(5e-6).records_per_pair_per_day, 10.0);
        assert_relative_eq!(d(1e-3).records_per_pair_per_day, 0.1, max_relative = 1e-12);
        assert!(d(1e-3).blockchain_volume.is_infinite());

        let phi = 1e-3;
        let got = demand_with_lightning(&m, &sym(), &pl(), phi, DemandMethod::ClosedForm).unwrap();
        let rounded = 1.5e-5 * (10.0 / phi.powf(2.0 / 3.0) - 0.04 / phi) + 6e-7 / phi;
        assert!((got.records_per_pair_per_day - rounded).abs() / rounded < 0.05);
        let t = thresholds(&m, &sym(), phi).unwrap();
        assert_relative_eq!(got.lightning_tx_count, 10.0 * (1.0 - 0.001 / t.t_lb), max_relative = 1e-12);
        assert_relative_eq!(got.blockchain_tx_count, 10.0 * 0.001 / t.t_lb, max_relative = 1e-12);
        assert_relative_eq!(got.lightning_volume, 10.0 * 0.001 * (t.t_lb / 0.001).ln(), max_relative = 1e-12);
    }

    #[test]
    fn power_law_demand_upper_regime() {
        let m = MarketParams::default();
        let phi = 0.5;
        let t = thresholds(&m, &sym(), phi).unwrap();
        assert!(t.t_nl >= 0.001);
        let d = demand_with_lightning(&m, &sym(), &pl(), phi, DemandMethod::ClosedForm).unwrap();
        assert_relative_eq!(d.lightning_tx_count, 10.0 * (0.001 / t.t_nl - 0.001 / t.t_lb), max_relative = 1e-12);
        assert_relative_eq!(d.blockchain_tx_count, 10.0 * 0.001 / t.t_lb, max_relative = 1e-12);
        let d0 = demand_no_lightning(&m, &sym(), &pl(), phi, DemandMethod::ClosedForm).unwrap();
        assert_relative_eq!(d.records_per_pair_per_day, d0.records_per_pair_per_day, max_relative = 1e-12);
    }

    #[test]
    fn constant_size_above_t_lb_goes_on_chain() {
        let m = MarketParams::default();
        let dist = TransferSizeDist::Constant { z: 1.0 };
        let d = demand_with_lightning(&m, &sym(), &dist, 1e-6, DemandMethod::ClosedForm).unwrap();
        assert_eq!(d.records_per_pair_per_day, 10.0);
        assert_eq!(d.lightning_tx_count, 0.0);
    }

    #[test]
    fn quadrature_matches_closed_forms() {
        let m = MarketParams::default();
        let dists = [pl(), TransferSizeDist::Uniform { z_max: 1.0 }];
        for dist in dists {
            for pair in [sym(), asym()] {
                for phi in crate::numerics::log_space(1e-7, 1.0, 15) {
                    for world in [World::WithLightning, World::NoLightning] {
                        let c = demand(&m, &pair, &dist, phi, world, DemandMethod::ClosedForm).unwrap();
                        let q = demand(&m, &pair, &dist, phi, world, DemandMethod::Quadrature).unwrap();
                        let close = |x: f64, y: f64| x == y || (x - y).abs() <= 1e-6 * x.abs().max(1e-12);
                        assert!(close(c.records_per_pair_per_day, q.records_per_pair_per_day), "{dist:?} {phi} {c:?} {q:?}");
                        assert!(close(c.lightning_tx_count, q.lightning_tx_count));
                        assert!(close(c.blockchain_volume, q.blockchain_volume));
                    }
                }
            }
        }
    }

    #[test]
    fn uniform_piecewise_matches_general_form() {
        let m = MarketParams::default();
        for pair in [sym(), asym()] {
            for phi in crate::numerics::log_space(1e-7, 0.1, 40) {
                let general = demand_with_lightning(&m, &pair, &TransferSizeDist::Uniform { z_max: 1.0 }, phi, DemandMethod::ClosedForm)
                    .unwrap()
                    .records_per_pair_per_day;
                let explicit = if pair.is_symmetric() {
                    uniform_demand_symmetric_piecewise(&m, &pair, 1.0, phi)
                } else {
                    uniform_demand_asymmetric_piecewise(&m, &pair, 1.0, phi)
                };
                assert!((general - explicit).abs() <= 1e-9 * general.max(1e-9), "{phi}: {general} vs {explicit}");
            }
        }
    }

    #[test]
    fn zero_price_for_small_markets() {
        let m = MarketParams::default();
        for world in [World::WithLightning, World::NoLightning] {
            let e = equilibrium_fee(&m, &sym(), &pl(), 50_000.0, world, SolveMethod::Numeric).unwrap();
            assert_eq!(e.phi_eq, 0.0);
            assert_eq!(e.regime, PriceRegime::ZeroPrice);
        }
    }

    #[test]
    fn no_lightning_price_example() {
        let m = MarketParams::default();
        let e = equilibrium_fee(&m, &sym(), &pl(), 1e7, World::NoLightning, SolveMethod::ClosedForm).unwrap();
        assert_relative_eq!(e.phi_eq, 1e-4 * 1e7 / 576_000.0, max_relative = 1e-14);
        assert_relative_eq!(e.demand.records_per_pair_per_day * 5e6, m.tau, max_relative = 1e-12);
        assert_eq!(e.miner_revenue, m.tau * e.phi_eq);
    }

    #[test]
    fn closed_and_numeric_equilibria_agree() {
        let m = MarketParams::default();
        for pair in [sym(), asym()] {
            for world in [World::WithLightning, World::NoLightning] {
                for n in crate::numerics::log_space(6e4, 1e10, 25) {
                    let c = equilibrium_fee(&m, &pair, &pl(), n, world, SolveMethod::ClosedForm).unwrap();
                    let x = equilibrium_fee(&m, &pair, &pl(), n, world, SolveMethod::Numeric).unwrap();
                    assert_eq!(c.method, SolveMethod::ClosedForm);
                    assert!((c.phi_eq - x.phi_eq).abs() <= 1e-6 * c.phi_eq, "{world:?} {n}: {} vs {}", c.phi_eq, x.phi_eq);
                }
            }
        }
    }

    #[test]
    fn uniform_no_lightning_price() {
        let m = MarketParams::default();
        let dist = TransferSizeDist::Uniform { z_max: 1.0 };
        for n in [1e5, 1e6, 1e8] {
            let c = equilibrium_fee(&m, &sym(), &dist, n, World::NoLightning, SolveMethod::ClosedForm).unwrap();
            let x = equilibrium_fee(&m, &sym(), &dist, n, World::NoLightning, SolveMethod::Numeric).unwrap();
            assert!((c.phi_eq - x.phi_eq).abs() <= 1e-7 * c.phi_eq);
            assert!(c.phi_eq < m.beta);
        }
        // Uniform sizes with channels have no closed form here.
        let e = equilibrium_fee(&m, &sym(), &dist, 1e6, World::WithLightning, SolveMethod::ClosedForm).unwrap();
        assert_eq!(e.method, SolveMethod::Numeric);
        let residual = 5e5 * e.demand.records_per_pair_per_day - m.tau;
        assert!(residual.abs() / m.tau < 1e-6);
    }

    #[test]
    fn price_just_above_threshold_is_tiny() {
        let m = MarketParams::default();
        let n = 2.0 * m.tau / 10.0 * 1.0001;
        let e = equilibrium_fee(&m, &sym(), &pl(), n, World::WithLightning, SolveMethod::Numeric).unwrap();
        let jump = 0.001 * (27.0 * m.a * m.r * m.r / 100.0).sqrt();
        assert!(e.phi_eq >= jump && e.phi_eq < 1.01 * jump, "{} vs {jump}", e.phi_eq);
        assert!(e.phi_eq < m.beta * 0.001);
        assert_eq!(e.regime, PriceRegime::LightningDominant);
    }

    #[test]
    fn curves_coincide_for_large_markets() {
        let m = MarketParams::default();
        let grid = [1e10, 1e11];
        let with = price_curve(&m, &sym(), &pl(), &grid, World::WithLightning, SolveMethod::ClosedForm).unwrap();
        let without = price_curve(&m, &sym(), &pl(), &grid, World::NoLightning, SolveMethod::ClosedForm).unwrap();
        for (a, b) in with.iter().zip(&without) {
            assert_relative_eq!(a.phi_eq, b.phi_eq, max_relative = 1e-12);
            assert_eq!(a.regime, PriceRegime::CoincidentWithNoLightning);
        }
        assert!(price_curve(&m, &sym(), &pl(), &[2.0, 1.0], World::NoLightning, SolveMethod::Numeric).is_err());
    }
}
