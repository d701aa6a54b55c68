use crate::channel::{
    fee_approx, fee_exact, lifetime_transfers, optimal_capacity, optimal_fee, optimal_initialization,
    reset_record_rate,
};
use crate::error::{Error, Result};
use crate::io::{Cell, RunConfig, Table, Topology};
use crate::market::{
    closed_form_equilibrium, demand_no_lightning, demand_with_lightning_scaled, equilibrium_fee_scaled,
    thresholds_scaled, DemandPoint, EquilibriumResult, LightningScaling, PriceRegime, SolveMethod, World,
};
use crate::model::{MarketParams, PairParams, TransferSizeDist};
use crate::star::{hub_locked_capital, star_fee, StarParams, STAR_SCALING};

use super::{world_label, Report};

fn scaling(cfg: &RunConfig) -> LightningScaling {
    match cfg.topology {
        Topology::Pairs => LightningScaling::PAIRS,
        Topology::Star => STAR_SCALING,
    }
}

fn regime_label(r: PriceRegime) -> &'static str {
    match r {
        PriceRegime::ZeroPrice => "zero_price",
        PriceRegime::LightningDominant => "lightning_dominant",
        PriceRegime::CoincidentWithNoLightning => "coincident",
    }
}

/// Expected lifetimes over every integer balance, or one balance `m`.
pub fn lifetime(cfg: &RunConfig, m: Option<f64>) -> Result<Report> {
    let pair = cfg.pair;
    let p = pair.p_alice();
    let mut t = Table::new(
        "lifetime",
        &["w [transfers]", "m [transfers]", "p [1]", "lifetime [transfers]", "lifetime [days]", "linear_approx [days]"],
    );
    let mut opt = Table::new("lifetime_optimal", &["w [transfers]", "m_opt [transfers]", "lifetime [days]"]);
    for w in cfg.w_grid_transfers() {
        let wi = w.round();
        if wi != w {
            return Err(Error::invalid("w_grid", format!("lifetimes need integer capacities, got {w}")));
        }
        let balances: Vec<f64> = match m {
            Some(m) => vec![m],
            None => (0..=wi as u64).map(|k| k as f64).collect(),
        };
        for m in balances {
            if !(m >= 0.0 && m <= w && m.fract() == 0.0) {
                return Err(Error::Domain(format!("balance {m} must be an integer in [0, {w}]")));
            }
            let steps = if pair.lambda_a == 0.0 || pair.lambda_b == 0.0 {
                // Every transfer goes one way.
                let side = if pair.lambda_a > 0.0 { m } else { w - m };
                if side == 0.0 || side == w { 0.0 } else { side }
            } else {
                lifetime_transfers(wi as u64, m as u64, p)?
            };
            let linear = if pair.is_symmetric() {
                f64::NAN
            } else {
                let larger = if pair.lambda_a > pair.lambda_b { m } else { w - m };
                larger / pair.delta()
            };
            t.push(vec![w.into(), m.into(), p.into(), steps.into(), (steps / pair.ell()).into(), linear.into()]);
        }
        let init = optimal_initialization(&pair, w);
        opt.push(vec![w.into(), init.alice_balance.into(), init.lifetime_days.into()]);
    }
    Ok(Report { tables: vec![t, opt], ..Report::default() })
}

/// Optimal capacity and the fees it implies over the fee grid.
pub fn capacity(cfg: &RunConfig) -> Result<Report> {
    let (market, pair, z) = (cfg.market, cfg.pair, cfg.z);
    let mut t = Table::new(
        "capacity",
        &[
            "phi [BTC/record]",
            "z [BTC]",
            "w_opt [transfers]",
            "capacity [BTC]",
            "lifetime [days]",
            "fee_opt [BTC/transfer]",
            "fee_approx [BTC/transfer]",
            "fee_exact [BTC/transfer]",
            "resets [records/day]",
        ],
    );
    for phi in cfg.phi_grid_analytic() {
        if phi == 0.0 {
            continue;
        }
        let w = optimal_capacity(&market, &pair, z, phi)?;
        let life = optimal_initialization(&pair, w).lifetime_days;
        t.push(vec![
            phi.into(),
            z.into(),
            w.into(),
            (w * z).into(),
            life.into(),
            optimal_fee(&market, &pair, z, phi).into(),
            fee_approx(&market, &pair, z, w, phi)?.into(),
            fee_exact(&market, &pair, z, w, phi)?.into(),
            reset_record_rate(&market, &pair, z, phi).into(),
        ]);
    }
    Ok(Report { tables: vec![t], ..Report::default() })
}

/// Venue thresholds over the fee grid; the coefficients are reported per unit fee.
pub fn thresholds(cfg: &RunConfig) -> Result<Report> {
    let s = scaling(cfg);
    let mut t = Table::new("thresholds", &["phi [BTC/record]", "t_nl [BTC]", "t_nb [BTC]", "t_lb [BTC]"]);
    for phi in cfg.phi_grid_analytic() {
        let th = thresholds_scaled(&cfg.market, &cfg.pair, phi, s)?;
        t.push(vec![phi.into(), th.t_nl.into(), th.t_nb.into(), th.t_lb.into()]);
    }
    let unit = thresholds_scaled(&cfg.market, &cfg.pair, 1.0, s)?;
    let mut r = Report { tables: vec![t], ..Report::default() };
    r.result("t_nl_per_phi", unit.t_nl);
    r.result("t_nb_per_phi", unit.t_nb);
    r.result("t_lb_per_phi", unit.t_lb);
    Ok(r)
}

const DEMAND_COLUMNS: [&str; 8] = [
    "phi [BTC/record]",
    "world",
    "records [records/pair/day]",
    "lightning_txs [transfers/pair/day]",
    "blockchain_txs [transfers/pair/day]",
    "lightning_volume [BTC/pair/day]",
    "blockchain_volume [BTC/pair/day]",
    "utilization [1]",
];

fn demand_row(world: World, d: &DemandPoint, ell: f64) -> Vec<Cell> {
    vec![
        d.phi.into(),
        world_label(world).into(),
        d.records_per_pair_per_day.into(),
        d.lightning_tx_count.into(),
        d.blockchain_tx_count.into(),
        d.lightning_volume.into(),
        d.blockchain_volume.into(),
        ((d.lightning_tx_count + d.blockchain_tx_count) / ell).into(),
    ]
}

pub(crate) fn demand_point(
    market: &MarketParams,
    pair: &PairParams,
    dist: &TransferSizeDist,
    phi: f64,
    world: World,
    cfg: &RunConfig,
    s: LightningScaling,
) -> Result<DemandPoint> {
    match world {
        World::WithLightning if phi > 0.0 => demand_with_lightning_scaled(market, pair, dist, phi, cfg.demand_method, s),
        _ => demand_no_lightning(market, pair, dist, phi, cfg.demand_method),
    }
}

/// Demand per pair over the fee grid for the selected worlds.
pub fn demand(cfg: &RunConfig) -> Result<Report> {
    let s = scaling(cfg);
    let mut t = Table::new("demand", &DEMAND_COLUMNS);
    for phi in cfg.phi_grid_analytic() {
        for world in cfg.world.worlds() {
            let d = demand_point(&cfg.market, &cfg.pair, &cfg.dist, phi, world, cfg, s)?;
            t.push(demand_row(world, &d, cfg.pair.ell()));
        }
    }
    Ok(Report { tables: vec![t], ..Report::default() })
}

pub(crate) fn solve(
    cfg: &RunConfig,
    pair: &PairParams,
    dist: &TransferSizeDist,
    n: f64,
    world: World,
    s: LightningScaling,
) -> Result<EquilibriumResult> {
    equilibrium_fee_scaled(&cfg.market, pair, dist, n, world, SolveMethod::ClosedForm, cfg.demand_method, s)
}

/// Closed-form and numeric equilibria side by side.
pub fn equilibrium(cfg: &RunConfig) -> Result<Report> {
    let s = scaling(cfg);
    let mut t = Table::new(
        "equilibrium",
        &["n [users]", "world", "phi_closed_form [BTC/record]", "phi_numeric [BTC/record]", "relative_gap [1]", "regime"],
    );
    let mut worst: f64 = 0.0;
    for n in cfg.n_grid_analytic() {
        for world in cfg.world.worlds() {
            let numeric = equilibrium_fee_scaled(
                &cfg.market,
                &cfg.pair,
                &cfg.dist,
                n,
                world,
                SolveMethod::Numeric,
                cfg.demand_method,
                s,
            )?;
            let closed = if n / 2.0 * cfg.pair.ell() <= cfg.market.tau {
                Some(0.0)
            } else {
                closed_form_equilibrium(&cfg.market, &cfg.pair, &cfg.dist, n, world, s)
            };
            let gap = match closed {
                Some(c) if c > 0.0 => (numeric.phi_eq - c).abs() / c,
                Some(_) => numeric.phi_eq.abs(),
                None => f64::NAN,
            };
            if gap.is_finite() {
                worst = worst.max(gap);
            }
            t.push(vec![
                n.into(),
                world_label(world).into(),
                closed.unwrap_or(f64::NAN).into(),
                numeric.phi_eq.into(),
                gap.into(),
                regime_label(numeric.regime).into(),
            ]);
        }
    }
    let mut r = Report { tables: vec![t], ..Report::default() };
    r.result("max_relative_gap", worst);
    Ok(r)
}

pub(crate) const PRICE_COLUMNS: [&str; 11] = [
    "n [users]",
    "world",
    "phi [BTC/record]",
    "miner_revenue [BTC/day]",
    "records [records/day]",
    "lightning_txs [transfers/day]",
    "blockchain_txs [transfers/day]",
    "lightning_volume [BTC/day]",
    "blockchain_volume [BTC/day]",
    "regime",
    "method",
];

pub(crate) fn price_row(e: &EquilibriumResult) -> Vec<Cell> {
    let pairs = e.n / 2.0;
    let d = &e.demand;
    vec![
        e.n.into(),
        world_label(e.world).into(),
        e.phi_eq.into(),
        e.miner_revenue.into(),
        (pairs * d.records_per_pair_per_day).into(),
        (pairs * d.lightning_tx_count).into(),
        (pairs * d.blockchain_tx_count).into(),
        (pairs * d.lightning_volume).into(),
        (pairs * d.blockchain_volume).into(),
        regime_label(e.regime).into(),
        match e.method {
            SolveMethod::ClosedForm => "closed_form",
            SolveMethod::Numeric => "numeric",
        }
        .into(),
    ]
}

/// Equilibrium fee and network activity over the user grid.
pub fn price_curve(cfg: &RunConfig) -> Result<Report> {
    let s = scaling(cfg);
    let mut t = Table::new("price_curve", &PRICE_COLUMNS);
    for n in cfg.n_grid_analytic() {
        for world in cfg.world.worlds() {
            t.push(price_row(&solve(cfg, &cfg.pair, &cfg.dist, n, world, s)?));
        }
    }
    Ok(Report { tables: vec![t], ..Report::default() })
}

/// Star against pairs: per-user fees, demand and equilibria.
pub fn star(cfg: &RunConfig) -> Result<Report> {
    let pair = cfg.pair;
    if !pair.is_symmetric() {
        return Err(Error::invalid("pair", "the star market needs equal rates"));
    }
    let lambda = pair.lambda_a;
    let (market, z) = (cfg.market, cfg.z);
    let probe = StarParams::uniform(2, lambda)?;

    let mut fees = Table::new(
        "star_fee",
        &[
            "phi [BTC/record]",
            "z [BTC]",
            "w [transfers]",
            "pair_fee [BTC/transfer]",
            "star_user_fee [BTC/transfer]",
            "ratio [1]",
            "hub_capital [BTC/user]",
        ],
    );
    let mut demand = Table::new(
        "star_demand",
        &["phi [BTC/record]", "pairs_records [records/pair/day]", "star_records [records/pair/day]"],
    );
    for phi in cfg.phi_grid_analytic() {
        if phi == 0.0 {
            continue;
        }
        let w = optimal_capacity(&market, &pair, z, phi)?;
        let pair_fee = fee_exact(&market, &pair, z, w, phi)?;
        let f = star_fee(&probe, 0, &market, z, w, phi)?;
        let hub = hub_locked_capital(&probe, &[w, w], z)? / 2.0;
        fees.push(vec![
            phi.into(),
            z.into(),
            w.into(),
            pair_fee.into(),
            f.user_fee.into(),
            (f.user_fee / pair_fee).into(),
            hub.into(),
        ]);
        let d_pairs = demand_point(&market, &pair, &cfg.dist, phi, World::WithLightning, cfg, LightningScaling::PAIRS)?;
        let d_star = demand_point(&market, &pair, &cfg.dist, phi, World::WithLightning, cfg, STAR_SCALING)?;
        demand.push(vec![phi.into(), d_pairs.records_per_pair_per_day.into(), d_star.records_per_pair_per_day.into()]);
    }

    let mut eq = Table::new(
        "star_equilibrium",
        &["n [users]", "phi_pairs [BTC/record]", "phi_star [BTC/record]", "ratio [1]"],
    );
    for n in cfg.n_grid_analytic() {
        let p = solve(cfg, &pair, &cfg.dist, n, World::WithLightning, LightningScaling::PAIRS)?;
        let s = solve(cfg, &pair, &cfg.dist, n, World::WithLightning, STAR_SCALING)?;
        let ratio = if p.phi_eq > 0.0 { s.phi_eq / p.phi_eq } else { f64::NAN };
        eq.push(vec![n.into(), p.phi_eq.into(), s.phi_eq.into(), ratio.into()]);
    }
    Ok(Report { tables: vec![fees, demand, eq], ..Report::default() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> RunConfig {
        RunConfig { scaled_down: true, ..RunConfig::default() }
    }

    #[test]
    fn threshold_coefficients_reported() {
        let r = thresholds(&RunConfig { phi_grid: Some(vec![0.001]), ..cfg() }).unwrap();
        assert!((r.results["t_lb_per_phi"] - 16744.0).abs() < 2.0);
        assert_eq!(r.tables[0].rows.len(), 1);
    }

    #[test]
    fn lifetime_table_covers_balances() {
        let r = lifetime(&RunConfig { w_grid: Some(vec![10.0]), ..cfg() }, None).unwrap();
        assert_eq!(r.tables[0].rows.len(), 11);
        assert!(lifetime(&RunConfig { w_grid: Some(vec![10.5]), ..cfg() }, None).is_err());
        assert!(lifetime(&RunConfig { w_grid: Some(vec![10.0]), ..cfg() }, Some(11.0)).is_err());
    }

    #[test]
    fn equilibrium_closed_and_numeric_agree() {
        let r = equilibrium(&cfg()).unwrap();
        assert!(r.results["max_relative_gap"] < 1e-6, "{}", r.results["max_relative_gap"]);
    }

    #[test]
    fn star_tables_show_factor_two() {
        let c = RunConfig { phi_grid: Some(vec![1e-4, 1e-3]), n_grid: Some(vec![1e6, 1e8]), ..cfg() };
        let r = star(&c).unwrap();
        let fees = r.table("star_fee").unwrap();
        for row in &fees.rows {
            assert_eq!(row[5], Cell::Float(2.0));
        }
        assert_eq!(r.table("star_equilibrium").unwrap().rows.len(), 2);
    }

    #[test]
    fn demand_and_price_tables_have_both_worlds() {
        let c = RunConfig { phi_grid: Some(vec![1e-4]), n_grid: Some(vec![1e7]), ..cfg() };
        assert_eq!(demand(&c).unwrap().tables[0].rows.len(), 2);
        assert_eq!(price_curve(&c).unwrap().tables[0].rows.len(), 2);
        assert_eq!(capacity(&c).unwrap().tables[0].rows.len(), 1);
    }
}
