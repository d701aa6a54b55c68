//! Tables behind every command and figure family.
//!
//! Each builder takes a [`RunConfig`] and returns a [`Report`]: the tables to
//! export plus named scalar results such as fitted exponents.

pub mod analytic;
pub mod figures;
pub mod simulated;

use std::collections::BTreeMap;

use crate::io::Table;
use crate::market::World;

pub use figures::{reproduce, FIGURE_IDS};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub tables: Vec<Table>,
    pub results: BTreeMap<String, f64>,
}

impl Report {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn merge(&mut self, other: Report) {
        self.tables.extend(other.tables);
        self.results.extend(other.results);
    }

    fn result(&mut self, key: impl Into<String>, value: f64) {
        self.results.insert(key.into(), value);
    }
}

pub(crate) fn world_label(world: World) -> &'static str {
    match world {
        World::WithLightning => "with_lightning",
        World::NoLightning => "no_lightning",
    }
}
