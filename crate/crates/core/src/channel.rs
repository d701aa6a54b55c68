//! Single-channel mathematics: expected lifetimes, optimal initial balance,
//! the per-transfer fee that amortises interest and resets, and the capacity
//! minimising the first-order fee.
//!
//! Capacities and balances are measured in transfers: a channel of capacity
//! `w` moving transfers of `z` bitcoins locks `w * z` bitcoins.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{MarketParams, PairParams};

/// Half-width of the band around `p = 1/2` handled by the symmetric formula.
pub const SINGULAR_P_BAND: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    /// Capacity in transfers.
    pub w: f64,
    /// Alice's balance in transfers.
    pub m: f64,
    /// Bitcoins per transfer.
    pub z: f64,
    pub pair: PairParams,
}

impl ChannelSpec {
    pub fn new(w: f64, m: f64, z: f64, pair: PairParams) -> Result<Self> {
        if !(w.is_finite() && w >= 0.0) {
            return Err(Error::invalid("w", format!("must be nonnegative, got {w}")));
        }
        if !(0.0..=w).contains(&m) {
            return Err(Error::Domain(format!("balance {m} outside [0, {w}]")));
        }
        Ok(ChannelSpec { w, m, z, pair })
    }

    pub fn capacity_btc(&self) -> f64 {
        self.w * self.z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LifetimeModel {
    ExactSymmetric,
    ExactAsymmetric,
    /// Drift-only approximation `m / delta` for unbalanced flows.
    LinearAsymmetric,
}

impl LifetimeModel {
    /// The exact model matching the pair's symmetry.
    pub fn exact_for(pair: &PairParams) -> Self {
        if pair.is_symmetric() {
            LifetimeModel::ExactSymmetric
        } else {
            LifetimeModel::ExactAsymmetric
        }
    }
}

fn check_balance(w: u64, m: u64) -> Result<()> {
    if m > w {
        return Err(Error::Domain(format!("balance {m} outside [0, {w}]")));
    }
    Ok(())
}

/// Expected number of unit transfers until one side is empty, starting with
/// Alice holding `m` of `w` coins, when Alice sends each transfer with
/// probability `p != 1/2`.
pub fn lifetime_transfers_asymmetric(w: u64, m: u64, p: f64) -> Result<f64> {
    check_balance(w, m)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("p = {p} outside (0, 1)")));
    }
    if (p - 0.5).abs() < SINGULAR_P_BAND {
        return Err(Error::SingularP(p));
    }
    if m == 0 || m == w {
        return Ok(0.0);
    }
    let drift = 2.0 * p - 1.0;
    let log_ratio = (p / (1.0 - p)).ln();
    let (m, w) = (m as f64, w as f64);
    // (1 - rho^m) / (1 - rho^w) without forming rho^w.
    let fraction = if log_ratio < 0.0 {
        (m * log_ratio).exp_m1() / (w * log_ratio).exp_m1()
    } else {
        ((m - w) * log_ratio).exp() * (-m * log_ratio).exp_m1() / (-w * log_ratio).exp_m1()
    };
    Ok(((m - w * fraction) / drift).max(0.0))
}

/// Expected number of transfers for the balanced walk: `w m - m^2`.
pub fn lifetime_transfers_symmetric(w: u64, m: u64) -> Result<f64> {
    check_balance(w, m)?;
    let (w, m) = (w as f64, m as f64);
    Ok(w * m - m * m)
}

/// Dispatches to the symmetric formula inside the singular band.
pub fn lifetime_transfers(w: u64, m: u64, p: f64) -> Result<f64> {
    if (p - 0.5).abs() < SINGULAR_P_BAND {
        lifetime_transfers_symmetric(w, m)
    } else {
        lifetime_transfers_asymmetric(w, m, p)
    }
}

/// Expected lifetime in days.
///
/// Exact models round `w` and `m` to the nearest integer state.
pub fn lifetime_days(spec: &ChannelSpec, model: LifetimeModel) -> Result<f64> {
    let pair = &spec.pair;
    let ell = pair.ell();
    match model {
        LifetimeModel::ExactSymmetric => {
            if !pair.is_symmetric() {
                return Err(Error::Domain("exact symmetric lifetime needs equal rates".into()));
            }
            let (w, m) = rounded_state(spec)?;
            Ok(lifetime_transfers_symmetric(w, m)? / ell)
        }
        LifetimeModel::ExactAsymmetric => {
            if pair.is_symmetric() {
                return Err(Error::SingularP(0.5));
            }
            if pair.lambda_a == 0.0 || pair.lambda_b == 0.0 {
                // Deterministic drift: every transfer moves the same way.
                let (w, m) = rounded_state(spec)?;
                let side = if pair.lambda_a > 0.0 { m } else { w - m };
                return Ok(if side == 0 || side == w { 0.0 } else { side as f64 / ell });
            }
            let (w, m) = rounded_state(spec)?;
            Ok(lifetime_transfers_asymmetric(w, m, pair.p_alice())? / ell)
        }
        LifetimeModel::LinearAsymmetric => {
            let delta = pair.delta();
            if delta == 0.0 {
                return Err(Error::Domain("linear lifetime needs unequal rates".into()));
            }
            let larger_side = if pair.lambda_a > pair.lambda_b { spec.m } else { spec.w - spec.m };
            Ok(larger_side / delta)
        }
    }
}

fn rounded_state(spec: &ChannelSpec) -> Result<(u64, u64)> {
    let w = spec.w.round();
    let m = spec.m.round();
    if w < 0.0 || m < 0.0 || m > w {
        return Err(Error::Domain(format!("balance {m} outside [0, {w}]")));
    }
    Ok((w as u64, m as u64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Initialization {
    /// Alice's starting balance in transfers.
    pub alice_balance: f64,
    /// Expected lifetime in days from that balance.
    pub lifetime_days: f64,
}

/// Balance maximising the lifetime: `w/2` each for balanced flows, all funds
/// to the heavier sender otherwise (linear approximation).
pub fn optimal_initialization(pair: &PairParams, w: f64) -> Initialization {
    if pair.is_symmetric() {
        Initialization {
            alice_balance: w / 2.0,
            lifetime_days: w * w / (4.0 * pair.ell()),
        }
    } else {
        Initialization {
            alice_balance: if pair.lambda_a > pair.lambda_b { w } else { 0.0 },
            lifetime_days: w / pair.delta(),
        }
    }
}

/// Lifetime of an optimally initialised channel of capacity `w`.
pub fn optimal_lifetime_days(pair: &PairParams, w: f64) -> f64 {
    optimal_initialization(pair, w).lifetime_days
}

fn check_fee_inputs(z: f64, w: f64, phi: f64) -> Result<()> {
    if !(w > 0.0) {
        return Err(Error::invalid("w", format!("must be positive, got {w}")));
    }
    if !(phi >= 0.0) {
        return Err(Error::invalid("phi", format!("must be nonnegative, got {phi}")));
    }
    if !(z >= 0.0) {
        return Err(Error::invalid("z", format!("must be nonnegative, got {z}")));
    }
    Ok(())
}

/// Per-transfer fee covering compound interest on `w z` over the lifetime
/// plus one reset of `a` records.
pub fn fee_exact(market: &MarketParams, pair: &PairParams, z: f64, w: f64, phi: f64) -> Result<f64> {
    check_fee_inputs(z, w, phi)?;
    let t = optimal_lifetime_days(pair, w);
    if t <= 0.0 {
        return Err(Error::DegenerateLifetime);
    }
    let growth = (t * market.r.ln_1p()).exp_m1();
    Ok((w * z * growth + market.a * phi) / (t * pair.ell()))
}

/// Fee with interest linearised around `r = 0`: `w z r / ell + a phi / (T ell)`.
pub fn fee_approx(market: &MarketParams, pair: &PairParams, z: f64, w: f64, phi: f64) -> Result<f64> {
    check_fee_inputs(z, w, phi)?;
    let t = optimal_lifetime_days(pair, w);
    if t <= 0.0 {
        return Err(Error::DegenerateLifetime);
    }
    let ell = pair.ell();
    Ok(w * z * market.r / ell + market.a * phi / (t * ell))
}

/// Taylor remainder bound for `fee_exact - fee_approx` when the rate lies in
/// `[0, r_max]`. Diagnostic only.
pub fn fee_approx_error_bound(pair: &PairParams, z: f64, w: f64, r: f64, r_max: f64) -> Result<f64> {
    let t = optimal_lifetime_days(pair, w);
    if t <= 0.0 {
        return Err(Error::DegenerateLifetime);
    }
    // |g''| for g(r) = (1+r)^T peaks at r_max when T >= 2 and at 0 otherwise.
    let m1 = (t * (t - 1.0) * (1.0 + r_max).powf(t - 2.0)).abs();
    let m2 = (t * (t - 1.0)).abs();
    let m = m1.max(m2);
    Ok(w * z / (t * pair.ell()) * m * r * r / 2.0)
}

/// Capacity minimising the first-order fee.
pub fn optimal_capacity(market: &MarketParams, pair: &PairParams, z: f64, phi: f64) -> Result<f64> {
    if !(market.r > 0.0) {
        return Err(Error::Domain("zero interest makes the optimal capacity unbounded".into()));
    }
    if !(z > 0.0) {
        return Err(Error::Domain("zero transfer size makes the optimal capacity unbounded".into()));
    }
    if !(phi > 0.0) {
        return Err(Error::invalid("phi", format!("must be positive, got {phi}")));
    }
    let (a, r, ell) = (market.a, market.r, pair.ell());
    Ok(if pair.is_symmetric() {
        (8.0 * a * phi * ell / (z * r)).cbrt()
    } else {
        (a * phi * pair.delta() / (z * r)).sqrt()
    })
}

/// First-order fee at the optimal capacity, in closed form.
pub fn optimal_fee(market: &MarketParams, pair: &PairParams, z: f64, phi: f64) -> f64 {
    let (a, r, ell) = (market.a, market.r, pair.ell());
    if pair.is_symmetric() {
        3.0 * (a * phi * z * z * r * r / (ell * ell)).cbrt()
    } else {
        2.0 * (a * phi * pair.delta() * z * r / (ell * ell)).sqrt()
    }
}

/// Reset records per day of an optimally funded channel, `a / T(w_opt)`.
pub fn reset_record_rate(market: &MarketParams, pair: &PairParams, z: f64, phi: f64) -> f64 {
    let (a, r, ell) = (market.a, market.r, pair.ell());
    if pair.is_symmetric() {
        (ell * a * r * r * z * z / (phi * phi)).cbrt()
    } else {
        (pair.delta() * a * r * z / phi).sqrt()
    }
}
