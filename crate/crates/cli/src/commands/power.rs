use omnimatch::testing::{run_power_study, TestConfig};
use serde_json::json;

use super::Context;
use crate::config::PowerConfig;
use crate::error::CliResult;
use crate::output::num;

pub fn run(ctx: &Context, cfg: PowerConfig) -> CliResult<()> {
    let test_cfg = TestConfig::from(&cfg);
    test_cfg.validate()?;
    let mut report = ctx.report("power", cfg.seed, &cfg)?;
    let study = run_power_study(&test_cfg)?;

    let rows: Vec<Vec<String>> = study
        .cells
        .iter()
        .map(|c| {
            vec![num(c.err), c.v1.to_string(), c.method.to_string(), num(c.power), c.n_mc.to_string(), cfg.seed.to_string()]
        })
        .collect();
    report.write_csv("power.csv", &["err", "v1", "method", "power", "n_mc", "seed"], &rows)?;

    let mut null_rows = Vec::new();
    for cal in &study.null {
        for (rep, s) in cal.null_sample.iter().enumerate() {
            null_rows.push(vec![cal.method.to_string(), rep.to_string(), num(*s)]);
        }
    }
    report.write_csv("null.csv", &["method", "replicate", "statistic"], &null_rows)?;

    let critical: Vec<_> =
        study.null.iter().map(|c| json!({"method": c.method.to_string(), "critical_value": c.critical_value})).collect();
    report.finish(json!({
        "alpha": cfg.alpha,
        "v0": cfg.v0,
        "critical_values": critical,
        "cells": study.cells.len(),
    }))
}
