//! Instances as JSON documents, parameter sweeps and the wide CSV report.

use std::collections::BTreeMap;

use pmllab::bounds::EvalOptions;
use pmllab::cli::{write_csv, Row};
use pmllab::instance::Instance;
use pmllab::schemes::RunConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = Instance::from_json(include_str!("../instances/channel_list.json"))?;
    let mut rows = Vec::new();
    for l in [2.0, 4.0, 8.0] {
        for j in [1.0, 2.0] {
            let inst = base.with_param("L", l)?.with_param("J", j)?;
            let bounds = inst.bounds(&EvalOptions::default())?;
            let r = inst.simulate(&RunConfig::new(10_000, 0))?;
            rows.push(Row {
                setting: r.setting.name().to_string(),
                params: r.params.clone(),
                bounds: bounds.bounds.clone(),
                empirical: Some(r.estimate),
                ci: Some(r.ci),
                trials: Some(r.trials),
                seed: r.seed,
                wall_ms: None,
            });
        }
    }
    print!("{}", write_csv(&rows)?);

    println!("{}", serde_json::to_string(&base.to_value()?)?);
    let echoed: BTreeMap<String, f64> = base.params()?;
    println!("echoed params: {echoed:?}");
    Ok(())
}
