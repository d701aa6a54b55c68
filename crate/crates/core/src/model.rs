//! Domain parameters, transfer-size distributions and seeded sampling.
//!
//! Defaults reproduce the reference economy: ten transfers per day per pair,
//! 1% utility, 4% yearly interest, resets costing 1.1 records, a power-law
//! transfer size starting at 0.001 BTC and 288 000 records per day.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Records per day at the current block size.
pub const DEFAULT_TAU: f64 = 288_000.0;
/// Daily rate equivalent to 4% per year.
pub const DEFAULT_DAILY_RATE: f64 = 0.04 / 365.0;
pub const DEFAULT_RESET_RECORDS: f64 = 1.1;
pub const DEFAULT_BETA: f64 = 0.01;
pub const DEFAULT_Z_MIN: f64 = 0.001;
pub const DEFAULT_LAMBDA: f64 = 5.0;

/// The global economy: record supply, interest, reset size and utility fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarketParams {
    /// Supply of records per day.
    pub tau: f64,
    /// Daily interest rate on locked funds.
    pub r: f64,
    /// Records consumed by one channel reset.
    pub a: f64,
    /// Utility of a transfer as a fraction of its size.
    pub beta: f64,
}

impl Default for MarketParams {
    fn default() -> Self {
        MarketParams {
            tau: DEFAULT_TAU,
            r: DEFAULT_DAILY_RATE,
            a: DEFAULT_RESET_RECORDS,
            beta: DEFAULT_BETA,
        }
    }
}

impl MarketParams {
    pub fn new(tau: f64, r: f64, a: f64, beta: f64) -> Result<Self> {
        let m = MarketParams { tau, r, a, beta };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::invalid("tau", format!("must be positive, got {}", self.tau)));
        }
        if !(0.0..1.0).contains(&self.r) {
            return Err(Error::invalid("r", format!("must lie in [0, 1), got {}", self.r)));
        }
        if !(1.0..=2.0).contains(&self.a) {
            return Err(Error::invalid("a", format!("must lie in [1, 2], got {}", self.a)));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::invalid("beta", format!("must lie in (0, 1), got {}", self.beta)));
        }
        Ok(())
    }

    pub fn with_tau(self, tau: f64) -> Self {
        MarketParams { tau, ..self }
    }
}

/// Transfer rates of one trading pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PairParams {
    /// Transfers per day from Alice to Bob.
    pub lambda_a: f64,
    /// Transfers per day from Bob to Alice.
    pub lambda_b: f64,
}

impl Default for PairParams {
    fn default() -> Self {
        PairParams {
            lambda_a: DEFAULT_LAMBDA,
            lambda_b: DEFAULT_LAMBDA,
        }
    }
}

impl PairParams {
    pub fn new(lambda_a: f64, lambda_b: f64) -> Result<Self> {
        let p = PairParams { lambda_a, lambda_b };
        p.validate()?;
        Ok(p)
    }

    pub fn symmetric(lambda: f64) -> Result<Self> {
        Self::new(lambda, lambda)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_a.is_finite() && self.lambda_a >= 0.0) {
            return Err(Error::invalid("lambda_a", format!("must be nonnegative, got {}", self.lambda_a)));
        }
        if !(self.lambda_b.is_finite() && self.lambda_b >= 0.0) {
            return Err(Error::invalid("lambda_b", format!("must be nonnegative, got {}", self.lambda_b)));
        }
        if self.ell() <= 0.0 {
            return Err(Error::invalid("lambda_a + lambda_b", "total rate must be positive"));
        }
        Ok(())
    }

    /// Total transfers per day.
    pub fn ell(&self) -> f64 {
        self.lambda_a + self.lambda_b
    }

    /// Absolute imbalance of the two flows.
    pub fn delta(&self) -> f64 {
        (self.lambda_a - self.lambda_b).abs()
    }

    pub fn is_symmetric(&self) -> bool {
        self.delta() == 0.0
    }

    /// Probability that the next transfer is sent by Alice.
    pub fn p_alice(&self) -> f64 {
        self.lambda_a / self.ell()
    }
}

/// Distribution of the transfer size `z`, in bitcoins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TransferSizeDist {
    /// Density `z_min / z^2` on `[z_min, inf)`. The mean is infinite.
    PowerLaw { z_min: f64 },
    /// Density `1 / z_max` on `(0, z_max]`.
    Uniform { z_max: f64 },
    /// Every transfer has size `z`.
    Constant { z: f64 },
}

impl Default for TransferSizeDist {
    fn default() -> Self {
        TransferSizeDist::PowerLaw { z_min: DEFAULT_Z_MIN }
    }
}

impl TransferSizeDist {
    pub fn validate(&self) -> Result<()> {
        let (field, v) = match *self {
            TransferSizeDist::PowerLaw { z_min } => ("z_min", z_min),
            TransferSizeDist::Uniform { z_max } => ("z_max", z_max),
            TransferSizeDist::Constant { z } => ("z", z),
        };
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::invalid(field, format!("must be positive, got {v}")));
        }
        Ok(())
    }

    /// Density at `z`. A point mass has no density; `Constant` reports 0
    /// everywhere except its atom, where it reports infinity.
    pub fn pdf(&self, z: f64) -> f64 {
        match *self {
            TransferSizeDist::PowerLaw { z_min } => {
                if z < z_min {
                    0.0
                } else {
                    z_min / (z * z)
                }
            }
            TransferSizeDist::Uniform { z_max } => {
                if z > 0.0 && z <= z_max {
                    1.0 / z_max
                } else {
                    0.0
                }
            }
            TransferSizeDist::Constant { z: c } => {
                if z == c {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
        }
    }

    /// `P(Z > t)`.
    pub fn survival(&self, t: f64) -> f64 {
        match *self {
            TransferSizeDist::PowerLaw { z_min } => {
                if t < z_min {
                    1.0
                } else {
                    z_min / t
                }
            }
            TransferSizeDist::Uniform { z_max } => {
                if t <= 0.0 {
                    1.0
                } else if t >= z_max {
                    0.0
                } else {
                    1.0 - t / z_max
                }
            }
            TransferSizeDist::Constant { z } => {
                if z > t {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        1.0 - self.survival(t)
    }

    /// Smallest interval carrying all the mass.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            TransferSizeDist::PowerLaw { z_min } => (z_min, f64::INFINITY),
            TransferSizeDist::Uniform { z_max } => (0.0, z_max),
            TransferSizeDist::Constant { z } => (z, z),
        }
    }

    /// `E[Z; lo < Z < hi]`. Infinite for a power law with `hi = inf`.
    pub fn partial_mean(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        match *self {
            TransferSizeDist::PowerLaw { z_min } => {
                let lo = lo.max(z_min);
                if hi <= lo {
                    0.0
                } else if hi.is_infinite() {
                    f64::INFINITY
                } else {
                    z_min * (hi / lo).ln()
                }
            }
            TransferSizeDist::Uniform { z_max } => {
                let lo = lo.max(0.0);
                let hi = hi.min(z_max);
                if hi <= lo {
                    0.0
                } else {
                    (hi * hi - lo * lo) / (2.0 * z_max)
                }
            }
            TransferSizeDist::Constant { z } => {
                if z > lo && z < hi {
                    z
                } else {
                    0.0
                }
            }
        }
    }

    /// Inverse-CDF transform of `u` in `(0, 1]`.
    pub fn quantile_from_unit(&self, u: f64) -> f64 {
        match *self {
            TransferSizeDist::PowerLaw { z_min } => z_min / u,
            TransferSizeDist::Uniform { z_max } => z_max * u,
            TransferSizeDist::Constant { z } => z,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        sample_transfer_size(self, rng)
    }
}

/// Draws one transfer size by inverse-CDF sampling.
pub fn sample_transfer_size<R: Rng + ?Sized>(dist: &TransferSizeDist, rng: &mut R) -> f64 {
    match dist {
        TransferSizeDist::Constant { z } => *z,
        _ => dist.quantile_from_unit(unit_open_closed(rng)),
    }
}

/// Uniform draw on `(0, 1]`.
pub fn unit_open_closed<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Whether a pair draws its transfer size once or for every transfer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferSizeRegime {
    /// One size per pair, fixed for its lifetime (the analytic model).
    PerPair,
    /// A fresh size for every transfer (the simulated model).
    #[default]
    PerTransfer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    AliceToBob,
    BobToAlice,
}

/// Sender of the next transfer: Alice with probability `lambda_a / ell`.
pub fn next_transfer_direction<R: Rng + ?Sized>(pair: &PairParams, rng: &mut R) -> Direction {
    if rng.random::<f64>() < pair.p_alice() {
        Direction::AliceToBob
    } else {
        Direction::BobToAlice
    }
}

/// Generator used by every simulation: ChaCha with 8 rounds.
pub type SimRng = ChaCha8Rng;

/// Independent stream number `stream` of the generator seeded by `seed`.
///
/// Streams are ChaCha stream ids, so a task's draws do not depend on which
/// thread runs it or in which order tasks are scheduled.
pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        MarketParams::default().validate().unwrap();
        PairParams::default().validate().unwrap();
        TransferSizeDist::default().validate().unwrap();
        assert!((DEFAULT_DAILY_RATE - 0.0001096).abs() < 1e-7);
    }

    #[test]
    fn market_validation_rejects_out_of_range() {
        assert!(MarketParams::new(0.0, 0.0001, 1.1, 0.01).is_err());
        assert!(MarketParams::new(1.0, 1.0, 1.1, 0.01).is_err());
        assert!(MarketParams::new(1.0, 0.0, 0.9, 0.01).is_err());
        assert!(MarketParams::new(1.0, 0.0, 2.1, 0.01).is_err());
        assert!(MarketParams::new(1.0, 0.0, 1.0, 1.0).is_err());
        assert!(MarketParams::new(1.0, 0.0, 2.0, 0.5).is_ok());
    }

    #[test]
    fn pair_derived_quantities() {
        let p = PairParams::new(8.0, 2.0).unwrap();
        assert_eq!(p.ell(), 10.0);
        assert_eq!(p.delta(), 6.0);
        assert!(!p.is_symmetric());
        assert!(PairParams::default().is_symmetric());
        assert!(PairParams::new(0.0, 0.0).is_err());
        assert!(PairParams::new(-1.0, 2.0).is_err());
    }

    #[test]
    fn power_law_inverse_cdf() {
        let d = TransferSizeDist::PowerLaw { z_min: 0.001 };
        assert_eq!(d.quantile_from_unit(1.0), 0.001);
        assert_eq!(d.quantile_from_unit(0.5), 0.002);
        let c = TransferSizeDist::Constant { z: 5.0 };
        let mut rng = stream_rng(1, 0);
        for _ in 0..10 {
            assert_eq!(c.sample(&mut rng), 5.0);
        }
    }

    #[test]
    fn pdf_values() {
        let d = TransferSizeDist::PowerLaw { z_min: 0.001 };
        assert_eq!(d.pdf(0.0005), 0.0);
        assert!((d.pdf(0.001) - 1000.0).abs() < 1e-9);
        let u = TransferSizeDist::Uniform { z_max: 1.0 };
        assert_eq!(u.pdf(0.3), 1.0);
        assert_eq!(u.pdf(1.5), 0.0);
    }

    #[test]
    fn direction_frequencies() {
        let pair = PairParams::new(8.0, 2.0).unwrap();
        let mut rng = stream_rng(42, 0);
        let n = 1_000_000;
        let alice = (0..n)
            .filter(|_| next_transfer_direction(&pair, &mut rng) == Direction::AliceToBob)
            .count();
        assert!((alice as f64 / n as f64 - 0.8).abs() < 0.003);

        let only_bob = PairParams::new(0.0, 1.0).unwrap();
        assert!((0..1000).all(|_| next_transfer_direction(&only_bob, &mut rng) == Direction::BobToAlice));
    }

    #[test]
    fn direction_stream_is_seed_deterministic() {
        let pair = PairParams::default();
        let draw = |seed| {
            let mut rng = stream_rng(seed, 3);
            (0..256).map(|_| next_transfer_direction(&pair, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
        assert_ne!(draw(9), draw(10));
    }

    #[test]
    fn streams_differ() {
        let mut a = stream_rng(7, 0);
        let mut b = stream_rng(7, 1);
        let xa: Vec<u64> = (0..4).map(|_| a.random()).collect();
        let xb: Vec<u64> = (0..4).map(|_| b.random()).collect();
        assert_ne!(xa, xb);
    }

    #[test]
    fn dist_serde_shape() {
        let d: TransferSizeDist = serde_json::from_str(r#"{"kind":"power_law","z_min":0.001}"#).unwrap();
        assert_eq!(d, TransferSizeDist::default());
        assert!(serde_json::from_str::<TransferSizeDist>(r#"{"kind":"power_law","zmin":1}"#).is_err());
    }
}
