//! Run configuration: a versioned JSON document whose every field is optional.
//!
//! A run manifest is also accepted; its embedded `config` is used, so a run
//! can be repeated from its own output.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{DemandMethod, World};
use crate::model::{MarketParams, PairParams, TransferSizeDist, TransferSizeRegime};
use crate::numerics::{lin_space, log_space};
use crate::sim::{SimEnv, SimProtocol};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    #[default]
    Pairs,
    Star,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorldSelection {
    WithLightning,
    NoLightning,
    #[default]
    Both,
}

impl WorldSelection {
    pub fn worlds(self) -> Vec<World> {
        match self {
            WorldSelection::WithLightning => vec![World::WithLightning],
            WorldSelection::NoLightning => vec![World::NoLightning],
            WorldSelection::Both => vec![World::WithLightning, World::NoLightning],
        }
    }
}

/// Which experiment a simulation protocol is for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Channel,
    Price,
    Network,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub market: MarketParams,
    pub pair: PairParams,
    pub dist: TransferSizeDist,
    pub regime: TransferSizeRegime,
    pub topology: Topology,
    pub world: WorldSelection,
    pub demand_method: DemandMethod,
    /// Record prices, BTC per record.
    pub phi_grid: Option<Vec<f64>>,
    /// User counts.
    pub n_grid: Option<Vec<f64>>,
    /// Channel capacities: transfers for the analytic commands, BTC for the
    /// simulator.
    pub w_grid: Option<Vec<f64>>,
    /// Transfer size used by single-channel commands, BTC.
    pub z: f64,
    /// Record supplies compared by the network experiment.
    pub tau_values: Option<Vec<f64>>,
    pub seed: u64,
    pub replications: Option<usize>,
    pub horizon_days: Option<u32>,
    pub scaled_down: bool,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            version: CONFIG_VERSION,
            market: MarketParams::default(),
            pair: PairParams::default(),
            dist: TransferSizeDist::default(),
            regime: TransferSizeRegime::default(),
            topology: Topology::default(),
            world: WorldSelection::default(),
            demand_method: DemandMethod::default(),
            phi_grid: None,
            n_grid: None,
            w_grid: None,
            z: 0.01,
            tau_values: None,
            seed: 1,
            replications: None,
            horizon_days: None,
            scaled_down: false,
            output_dir: PathBuf::from("out"),
        }
    }
}

fn check_grid(field: &'static str, grid: &Option<Vec<f64>>, allow_zero: bool) -> Result<()> {
    let Some(g) = grid else { return Ok(()) };
    if g.is_empty() {
        return Err(Error::invalid(field, "must not be empty"));
    }
    if let Some(v) = g.iter().find(|v| !(v.is_finite() && (**v > 0.0 || allow_zero && **v == 0.0))) {
        return Err(Error::invalid(field, format!("entries must be positive and finite, got {v}")));
    }
    if g.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(field, "must be strictly increasing"));
    }
    Ok(())
}

impl RunConfig {
    /// Reads a config or a run manifest from `path`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let json = |e| Error::Json { path: path.to_path_buf(), source: e };
        let value: serde_json::Value = serde_json::from_str(text).map_err(json)?;
        let value = match value {
            serde_json::Value::Object(mut map) if map.contains_key("manifest_version") => {
                map.remove("config").ok_or_else(|| Error::Config(format!("{}: manifest has no config", path.display())))?
            }
            other => other,
        };
        let cfg: RunConfig = serde_json::from_value(value).map_err(json)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::invalid("version", format!("unsupported version {}, expected {CONFIG_VERSION}", self.version)));
        }
        self.market.validate()?;
        self.pair.validate()?;
        self.dist.validate()?;
        check_grid("phi_grid", &self.phi_grid, true)?;
        check_grid("n_grid", &self.n_grid, false)?;
        check_grid("w_grid", &self.w_grid, false)?;
        check_grid("tau_values", &self.tau_values, false)?;
        if !(self.z.is_finite() && self.z > 0.0) {
            return Err(Error::invalid("z", format!("must be positive, got {}", self.z)));
        }
        if self.replications == Some(0) {
            return Err(Error::invalid("replications", "must be at least 1"));
        }
        if self.horizon_days == Some(0) {
            return Err(Error::invalid("horizon_days", "must be at least 1"));
        }
        if self.output_dir.as_os_str().is_empty() {
            return Err(Error::invalid("output_dir", "must not be empty"));
        }
        Ok(())
    }

    fn points(&self, desk: usize, full: usize) -> usize {
        if self.scaled_down { desk } else { full }
    }

    /// Fees for the analytic demand curves.
    pub fn phi_grid_analytic(&self) -> Vec<f64> {
        self.phi_grid.clone().unwrap_or_else(|| log_space(1e-7, 1.0, self.points(29, 57)))
    }

    /// Fees for the simulated capacity and demand studies.
    pub fn phi_grid_sim(&self) -> Vec<f64> {
        self.phi_grid.clone().unwrap_or_else(|| log_space(1e-5, 1e-1, self.points(20, 100)))
    }

    /// User counts for the analytic price curves.
    pub fn n_grid_analytic(&self) -> Vec<f64> {
        self.n_grid.clone().unwrap_or_else(|| log_space(1e4, 1e10, self.points(25, 121)))
    }

    /// User counts for the simulated price curves.
    pub fn n_grid_sim(&self) -> Vec<f64> {
        self.n_grid.clone().unwrap_or_else(|| log_space(1e6, 1e8, self.points(20, 100)))
    }

    /// User counts for the network statistics.
    pub fn n_grid_network(&self) -> Vec<f64> {
        self.n_grid.clone().unwrap_or_else(|| log_space(1e6, 1e8, self.points(20, 1000)))
    }

    /// Capacities in transfers for the analytic lifetime command.
    pub fn w_grid_transfers(&self) -> Vec<f64> {
        self.w_grid.clone().unwrap_or_else(|| vec![100.0])
    }

    /// Capacities in BTC for the reset-radius study.
    pub fn w_grid_sim(&self) -> Vec<f64> {
        self.w_grid.clone().unwrap_or_else(|| lin_space(1.0, 20.0, self.points(20, 100)))
    }

    pub fn tau_values(&self) -> Vec<f64> {
        self.tau_values.clone().unwrap_or_else(|| vec![self.market.tau, 2.0 * self.market.tau])
    }

    pub fn sim_env(&self) -> SimEnv {
        SimEnv { market: self.market, pair: self.pair, dist: self.dist, regime: self.regime }
    }

    /// Replications and horizon: desk scale when `scaled_down`, else the full
    /// protocol of the experiment, with explicit overrides on top.
    pub fn protocol(&self, experiment: Experiment) -> SimProtocol {
        let base = if self.scaled_down {
            SimProtocol::desk()
        } else {
            match experiment {
                Experiment::Channel => SimProtocol::full_channel(),
                Experiment::Price => SimProtocol::full_price(),
                Experiment::Network => SimProtocol::full_network(),
            }
        };
        SimProtocol {
            replications: self.replications.unwrap_or(base.replications),
            horizon_days: self.horizon_days.unwrap_or(base.horizon_days),
            ..base
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        RunConfig::parse(text, Path::new("cfg.json"))
    }

    #[test]
    fn empty_object_gives_defaults() {
        assert_eq!(parse("{}").unwrap(), RunConfig::default());
    }

    #[test]
    fn partial_sections_fill_in() {
        let cfg = parse(r#"{"market": {"tau": 576000}, "dist": {"kind": "uniform", "z_max": 1.0}, "seed": 9}"#).unwrap();
        assert_eq!(cfg.market.tau, 576000.0);
        assert_eq!(cfg.market.a, MarketParams::default().a);
        assert_eq!(cfg.dist, TransferSizeDist::Uniform { z_max: 1.0 });
        assert_eq!(cfg.seed, 9);
    }

    #[test]
    fn unknown_fields_are_named() {
        let err = parse(r#"{"markt": {}}"#).unwrap_err();
        assert!(err.to_string().contains("markt"), "{err}");
        let err = parse(r#"{"market": {"tua": 1}}"#).unwrap_err();
        assert!(err.to_string().contains("tua"), "{err}");
        assert!(err.is_config_error());
    }

    #[test]
    fn invalid_values_are_named() {
        for (text, field) in [
            (r#"{"phi_grid": [0.1, 0.01]}"#, "phi_grid"),
            (r#"{"replications": 0}"#, "replications"),
            (r#"{"market": {"a": 3}}"#, "`a`"),
            (r#"{"version": 2}"#, "version"),
            (r#"{"n_grid": []}"#, "n_grid"),
        ] {
            let err = parse(text).unwrap_err();
            assert!(err.to_string().contains(field), "{text}: {err}");
            assert!(err.is_config_error());
        }
    }

    #[test]
    fn manifests_are_accepted() {
        let text = r#"{"manifest_version": 1, "config": {"seed": 42}}"#;
        assert_eq!(parse(text).unwrap().seed, 42);
        assert!(parse(r#"{"manifest_version": 1}"#).is_err());
    }

    #[test]
    fn round_trips_through_json() {
        let cfg = RunConfig { phi_grid: Some(vec![1e-4, 1e-3]), scaled_down: true, ..RunConfig::default() };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(parse(&text).unwrap(), cfg);
    }

    #[test]
    fn missing_file_is_config_error() {
        let err = RunConfig::load(Path::new("/nonexistent/cfg.json")).unwrap_err();
        assert!(err.is_config_error());
    }

    #[test]
    fn protocol_overrides() {
        let cfg = RunConfig { scaled_down: true, replications: Some(3), ..RunConfig::default() };
        let p = cfg.protocol(Experiment::Price);
        assert_eq!((p.replications, p.horizon_days), (3, SimProtocol::desk().horizon_days));
        assert_eq!(cfg.w_grid_sim().len(), 20);
    }
}
