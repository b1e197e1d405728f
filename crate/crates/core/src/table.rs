//! Residual-load table over horizons and projection directions.

use rayon::prelude::*;

use crate::agg::{value_iteration, SearchOptions};
use crate::approx::{eta_family, projected_value, Route};
use crate::error::Result;
use crate::instance::Instance;

/// Mixing parameters of the projection columns.
pub const ETAS: [f64; 11] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

/// One horizon: the projected value for each entry of [`ETAS`] and the exact optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub horizon: usize,
    pub projected: Vec<f64>,
    pub optimal: f64,
}

/// Rows for horizons `1..=max_horizon`. Columns are computed in parallel.
pub fn residual_load_table(inst: &Instance, max_horizon: usize) -> Result<Vec<TableRow>> {
    let state = inst.state();
    (1..=max_horizon)
        .map(|n| {
            let projected = ETAS
                .par_iter()
                .map(|&eta| {
                    let spec = eta_family(&inst.net, eta)?;
                    projected_value(&inst.net, &state, n, &spec, Route::Line)
                })
                .collect::<Result<Vec<f64>>>()?;
            let optimal = value_iteration(&inst.net, &state, n, &SearchOptions::default())?.value;
            Ok(TableRow {
                horizon: n,
                projected,
                optimal,
            })
        })
        .collect()
}
