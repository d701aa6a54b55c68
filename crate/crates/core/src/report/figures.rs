//! `reproduce <figure-id>`: the data behind each published figure family.

use crate::channel::lifetime_transfers;
use crate::error::{Error, Result};
use crate::io::{RunConfig, Table};
use crate::market::{LightningScaling, World};
use crate::model::{PairParams, TransferSizeDist, DEFAULT_Z_MIN};
use crate::numerics::{lin_space, log_space};

use super::analytic::{demand_point, price_row, solve, PRICE_COLUMNS};
use super::{simulated, world_label, Report};

pub const FIGURE_IDS: [&str; 11] = [
    "channel-lifetime",
    "demand-uniform",
    "price-uniform",
    "txs-uniform",
    "demand-powerlaw",
    "price-powerlaw",
    "sim-reset-radius",
    "sim-capacity",
    "sim-demand",
    "sim-price",
    "sim-network",
];

pub fn reproduce(id: &str, cfg: &RunConfig) -> Result<Report> {
    match id {
        "channel-lifetime" => channel_lifetime(),
        "demand-uniform" => demand_uniform(cfg),
        "price-uniform" => uniform_market(cfg).map(|(price, _)| price),
        "txs-uniform" => uniform_market(cfg).map(|(_, txs)| txs),
        "demand-powerlaw" => demand_powerlaw(cfg),
        "price-powerlaw" => price_powerlaw(cfg),
        "sim-reset-radius" => simulated::reset_radius(&power_law_cfg(cfg)),
        "sim-capacity" => simulated::capacity(&power_law_cfg(cfg)),
        "sim-demand" => simulated::demand(&power_law_cfg(cfg)),
        "sim-price" => simulated::price(&power_law_cfg(cfg)),
        "sim-network" => simulated::network(&power_law_cfg(cfg)),
        other => Err(Error::Config(format!(
            "unknown figure id `{other}`; expected one of: {}",
            FIGURE_IDS.join(", ")
        ))),
    }
}

const UNIFORM_Z_MAX: f64 = 1.0;

fn uniform_dist(cfg: &RunConfig) -> TransferSizeDist {
    match cfg.dist {
        d @ TransferSizeDist::Uniform { .. } => d,
        _ => TransferSizeDist::Uniform { z_max: UNIFORM_Z_MAX },
    }
}

fn power_law_cfg(cfg: &RunConfig) -> RunConfig {
    match cfg.dist {
        TransferSizeDist::PowerLaw { .. } => cfg.clone(),
        _ => RunConfig { dist: TransferSizeDist::PowerLaw { z_min: DEFAULT_Z_MIN }, ..cfg.clone() },
    }
}

/// Symmetric pair from the config and the reference 8/2 asymmetric pair.
fn pairs(cfg: &RunConfig) -> [(&'static str, PairParams); 2] {
    let sym = if cfg.pair.is_symmetric() { cfg.pair } else { PairParams::default() };
    [("symmetric", sym), ("asymmetric", PairParams { lambda_a: 8.0, lambda_b: 2.0 })]
}

fn channel_lifetime() -> Result<Report> {
    let w = 100u64;
    let mut t = Table::new("fig_channel_lifetime", &["p [1]", "m [transfers]", "lifetime [transfers]"]);
    for k in [1, 2, 3, 4, 6, 7, 8, 9] {
        let p = k as f64 / 10.0;
        for m in 0..=w {
            t.push(vec![p.into(), m.into(), lifetime_transfers(w, m, p)?.into()]);
        }
    }
    Ok(Report { tables: vec![t], ..Report::default() })
}

fn demand_uniform(cfg: &RunConfig) -> Result<Report> {
    let dist = uniform_dist(cfg);
    let [(_, sym), (_, asym)] = pairs(cfg);
    let s = LightningScaling::PAIRS;
    let mut tables = Vec::new();
    for (name, grid) in [
        ("fig_demand_uniform_low", lin_space(0.0, 1e-4, 101)),
        ("fig_demand_uniform_high", lin_space(0.0, 0.015, 151)),
    ] {
        let mut t = Table::new(
            name,
            &[
                "phi [BTC/record]",
                "no_lightning [records/pair/day]",
                "symmetric [records/pair/day]",
                "asymmetric [records/pair/day]",
            ],
        );
        for phi in grid {
            let none = demand_point(&cfg.market, &sym, &dist, phi, World::NoLightning, cfg, s)?;
            let ds = demand_point(&cfg.market, &sym, &dist, phi, World::WithLightning, cfg, s)?;
            let da = demand_point(&cfg.market, &asym, &dist, phi, World::WithLightning, cfg, s)?;
            t.push(vec![
                phi.into(),
                none.records_per_pair_per_day.into(),
                ds.records_per_pair_per_day.into(),
                da.records_per_pair_per_day.into(),
            ]);
        }
        tables.push(t);
    }
    Ok(Report { tables, ..Report::default() })
}

/// Price and transaction tables for uniform sizes, plus the largest jump in
/// with-lightning transactions per user for each pair type.
fn uniform_market(cfg: &RunConfig) -> Result<(Report, Report)> {
    let dist = uniform_dist(cfg);
    let n_grid = cfg.n_grid.clone().unwrap_or_else(|| log_space(1e4, 1e9, if cfg.scaled_down { 51 } else { 251 }));
    let mut price = Table::new(
        "fig_price_uniform",
        &["n [users]", "pair", "world", "phi [BTC/record]", "miner_revenue [BTC/day]"],
    );
    let mut txs = Table::new(
        "fig_txs_uniform",
        &["n [users]", "pair", "world", "lightning_txs [transfers/day]", "blockchain_txs [transfers/day]", "total_txs [transfers/day]"],
    );
    let mut txs_report = Report::default();
    for (label, pair) in pairs(cfg) {
        let mut totals = Vec::with_capacity(n_grid.len());
        for &n in &n_grid {
            for world in [World::WithLightning, World::NoLightning] {
                let e = solve(cfg, &pair, &dist, n, world, LightningScaling::PAIRS)?;
                let half = n / 2.0;
                let (l, b) = (half * e.demand.lightning_tx_count, half * e.demand.blockchain_tx_count);
                price.push(vec![n.into(), label.into(), world_label(world).into(), e.phi_eq.into(), e.miner_revenue.into()]);
                txs.push(vec![n.into(), label.into(), world_label(world).into(), l.into(), b.into(), (l + b).into()]);
                if world == World::WithLightning {
                    totals.push((l + b) / n);
                }
            }
        }
        // Largest relative step between neighbouring grid points.
        let (k, jump) = totals
            .windows(2)
            .map(|w| (w[1] - w[0]).abs() / w[0].abs().max(w[1].abs()).max(f64::MIN_POSITIVE))
            .enumerate()
            .fold((0, 0.0), |best, (k, j)| if j > best.1 { (k, j) } else { best });
        if totals.len() >= 2 {
            txs_report.result(format!("largest_jump_{label}_n_lo"), n_grid[k]);
            txs_report.result(format!("largest_jump_{label}_n_hi"), n_grid[k + 1]);
            txs_report.result(format!("largest_jump_{label}_relative"), jump);
        }
    }
    txs_report.tables.push(txs);
    Ok((Report { tables: vec![price], ..Report::default() }, txs_report))
}

fn demand_powerlaw(cfg: &RunConfig) -> Result<Report> {
    let cfg = power_law_cfg(cfg);
    let s = LightningScaling::PAIRS;
    let mut tables = Vec::new();
    for (name, grid) in [
        ("fig_demand_powerlaw", cfg.phi_grid_analytic()),
        ("fig_demand_powerlaw_linear", lin_space(0.0, 1e-3, 101)),
    ] {
        let mut t = Table::new(
            name,
            &[
                "phi [BTC/record]",
                "world",
                "records [records/pair/day]",
                "lightning_txs [transfers/pair/day]",
                "blockchain_txs [transfers/pair/day]",
            ],
        );
        for phi in grid {
            for world in [World::WithLightning, World::NoLightning] {
                let d = demand_point(&cfg.market, &cfg.pair, &cfg.dist, phi, world, &cfg, s)?;
                t.push(vec![
                    phi.into(),
                    world_label(world).into(),
                    d.records_per_pair_per_day.into(),
                    d.lightning_tx_count.into(),
                    d.blockchain_tx_count.into(),
                ]);
            }
        }
        tables.push(t);
    }
    Ok(Report { tables, ..Report::default() })
}

fn price_powerlaw(cfg: &RunConfig) -> Result<Report> {
    let cfg = power_law_cfg(cfg);
    let mut t = Table::new("fig_price_powerlaw", &PRICE_COLUMNS);
    for n in cfg.n_grid_analytic() {
        for world in [World::WithLightning, World::NoLightning] {
            t.push(price_row(&solve(&cfg, &cfg.pair, &cfg.dist, n, world, LightningScaling::PAIRS)?));
        }
    }
    Ok(Report { tables: vec![t], ..Report::default() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> RunConfig {
        RunConfig { scaled_down: true, ..RunConfig::default() }
    }

    #[test]
    fn analytic_figures_build() {
        for id in ["channel-lifetime", "demand-uniform", "price-uniform", "txs-uniform", "demand-powerlaw", "price-powerlaw"] {
            let r = reproduce(id, &cfg()).unwrap();
            assert!(!r.tables.is_empty(), "{id}");
            assert!(r.tables.iter().all(|t| !t.rows.is_empty()), "{id}");
        }
    }

    #[test]
    fn unknown_id_is_config_error() {
        let err = reproduce("nope", &cfg()).unwrap_err();
        assert!(err.is_config_error());
        assert!(err.to_string().contains("demand-powerlaw"));
    }

    #[test]
    fn lightning_price_below_no_lightning() {
        let r = reproduce("price-powerlaw", &cfg()).unwrap();
        let t = &r.tables[0];
        let phi = t.column("phi").unwrap();
        for pair in t.rows.chunks(2) {
            let (crate::io::Cell::Float(a), crate::io::Cell::Float(b)) = (&pair[0][phi], &pair[1][phi]) else {
                panic!("phi must be numeric");
            };
            assert!(a <= b, "{a} > {b}");
        }
    }

    #[test]
    fn uniform_jump_is_located() {
        let r = reproduce("txs-uniform", &cfg()).unwrap();
        let lo = r.results["largest_jump_symmetric_n_lo"];
        let hi = r.results["largest_jump_symmetric_n_hi"];
        assert!(lo < hi);
    }
}
