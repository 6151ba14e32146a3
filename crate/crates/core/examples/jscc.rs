//! One-shot joint source-channel coding and the blocklength condition.

use pmllab::bounds::{channel_table, EvalOptions};
use pmllab::instance::Instance;
use pmllab::model::ChannelModel;
use pmllab::schemes::RunConfig;
use pmllab::second_order::{ba_rd, jscc_blocklength_check, min_blocklength, source_dispersion, DispersionInputs};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inst = Instance::from_json(include_str!("../instances/jscc.json"))?;
    for j in [1.0, 2.0, 4.0, 8.0] {
        let b = inst.with_param("J", j)?.bounds(&EvalOptions::default())?;
        println!("J={j}: thm5 {:.4}  comparison {:.4}  twice comparison {:.4}", b.get("thm5")?, b.get("kostina")?, b.get("two_kostina")?);
    }
    let r = inst.simulate(&RunConfig::new(100_000, 0))?;
    println!("simulated excess distortion {:.4} [{:.4}, {:.4}] vs {} {:.4}", r.estimate, r.ci[0], r.ci[1], r.bound_name, r.bound);

    // binary source over BSC(0.11) at D = 0.11: source and channel rates match
    let Instance::Jscc { model, .. } = Instance::from_json(
        r#"{"setting": "jscc",
            "model": {"p_w": {"weights": [0.5, 0.5]}, "p_x": {"weights": [0.5, 0.5]},
                      "channel": {"rows": [[0.89, 0.11], [0.11, 0.89]]},
                      "p_z": {"weights": [0.5, 0.5]}, "distortion": [[0, 1], [1, 0]]},
            "params": {"D": 0.11}}"#,
    )?
    else {
        unreachable!()
    };
    let rd = ba_rd(&model.p_w, &model.distortion, 0.11)?;
    let (rate, source_v) = source_dispersion(&model.p_w, &rd)?;
    let (c, v) = channel_table(&ChannelModel::new(model.p_x.clone(), model.channel.clone())?)?.moments(0);
    println!("R(D) = {:.4} (source dispersion {source_v:.2e}), C = {c:.4}, V = {v:.4}", rd.rate);
    for k in [100, 300, 500] {
        let x = DispersionInputs { c, v, rate, source_v, eps: 0.1, n: 1000, k, eta: 0.5, alpha: 1.0, beta: 0.0, k0: 0 };
        let chk = jscc_blocklength_check(&x)?;
        println!(
            "k={k}: at n=1000 lhs {:.1} rhs {:.1} satisfied {}; smallest n = {:?}",
            chk.lhs,
            chk.rhs,
            chk.satisfied,
            min_blocklength(&x, 20_000)?
        );
    }
    Ok(())
}
