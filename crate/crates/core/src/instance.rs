//! Self-describing problem instances: `{"setting": ..., "model": ..., "params": ...}`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bounds::{
    bc_common_bounds, channel_bounds, dlsc_bounds, echo, gp_bounds, jscc_bounds, mac_bounds, marton_bounds,
    resolvability_bounds, wiretap_bounds, wz_bounds, BcCommonParams, BoundReport, ChannelParams, DlscParams,
    EvalOptions, GpParams, JsccParams, MacParams, MartonParams, ResolvabilityParams, WiretapParams, WzParams,
};
use crate::error::{invalid, Result};
use crate::model::{
    BcCommonModel, ChannelModel, DlscModel, GpModel, JsccModel, MacModel, MartonModel, Setting, WiretapModel, WzModel,
};
use crate::schemes::{self, EmpiricalResult, RunConfig};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "setting", rename_all = "kebab-case")]
pub enum Instance {
    Channel { model: ChannelModel, params: ChannelParams },
    ChannelRank { model: ChannelModel, params: ChannelParams },
    ChannelList { model: ChannelModel, params: ChannelParams },
    Gp { model: GpModel, params: GpParams },
    Wz { model: WzModel, params: WzParams },
    Jscc { model: JsccModel, params: JsccParams },
    BcMarton { model: MartonModel, params: MartonParams },
    BcCommon { model: BcCommonModel, params: BcCommonParams },
    Dlsc { model: DlscModel, params: DlscParams },
    Mac { model: MacModel, params: MacParams },
    Resolvability { model: ChannelModel, params: ResolvabilityParams },
    Wiretap { model: WiretapModel, params: WiretapParams },
}

impl Instance {
    /// Parses and validates.
    pub fn from_value(v: Value) -> Result<Self> {
        let inst: Instance = serde_json::from_value(v)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_value(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_value(&self) -> Result<Value> {
        Ok(serde_json::to_value(self)?)
    }

    pub fn setting(&self) -> Setting {
        match self {
            Instance::Channel { .. } => Setting::Channel,
            Instance::ChannelRank { .. } => Setting::ChannelRank,
            Instance::ChannelList { .. } => Setting::ChannelList,
            Instance::Gp { .. } => Setting::Gp,
            Instance::Wz { .. } => Setting::Wz,
            Instance::Jscc { .. } => Setting::Jscc,
            Instance::BcMarton { .. } => Setting::BcMarton,
            Instance::BcCommon { .. } => Setting::BcCommon,
            Instance::Dlsc { .. } => Setting::Dlsc,
            Instance::Mac { .. } => Setting::Mac,
            Instance::Resolvability { .. } => Setting::Resolvability,
            Instance::Wiretap { .. } => Setting::Wiretap,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Instance::Channel { model, .. }
            | Instance::ChannelRank { model, .. }
            | Instance::ChannelList { model, .. }
            | Instance::Resolvability { model, .. } => model.validate(),
            Instance::Gp { model, .. } => model.validate(),
            Instance::Wz { model, .. } => model.validate(),
            Instance::Jscc { model, .. } => model.validate(),
            Instance::BcMarton { model, .. } => model.validate(),
            Instance::BcCommon { model, .. } => model.validate(),
            Instance::Dlsc { model, .. } => model.validate(),
            Instance::Mac { model, .. } => model.validate(),
            Instance::Wiretap { model, .. } => model.validate(),
        }
    }

    /// Parameters as echoed into reports.
    pub fn params(&self) -> Result<BTreeMap<String, f64>> {
        match self {
            Instance::Channel { params, .. }
            | Instance::ChannelRank { params, .. }
            | Instance::ChannelList { params, .. } => echo(params),
            Instance::Gp { params, .. } => echo(params),
            Instance::Wz { params, .. } => echo(params),
            Instance::Jscc { params, .. } => echo(params),
            Instance::BcMarton { params, .. } => echo(params),
            Instance::BcCommon { params, .. } => echo(params),
            Instance::Dlsc { params, .. } => echo(params),
            Instance::Mac { params, .. } => echo(params),
            Instance::Resolvability { params, .. } => echo(params),
            Instance::Wiretap { params, .. } => echo(params),
        }
    }

    pub fn bounds(&self, opts: &EvalOptions) -> Result<BoundReport> {
        match self {
            Instance::Channel { model, params }
            | Instance::ChannelRank { model, params }
            | Instance::ChannelList { model, params } => {
                let mut r = channel_bounds(model, params, opts)?;
                r.setting = self.setting();
                Ok(r)
            }
            Instance::Gp { model, params } => gp_bounds(model, params, opts),
            Instance::Wz { model, params } => wz_bounds(model, params, opts),
            Instance::Jscc { model, params } => jscc_bounds(model, params, opts),
            Instance::BcMarton { model, params } => marton_bounds(model, params, opts),
            Instance::BcCommon { model, params } => bc_common_bounds(model, params, opts),
            Instance::Dlsc { model, params } => dlsc_bounds(model, params, opts),
            Instance::Mac { model, params } => mac_bounds(model, params, opts),
            Instance::Resolvability { model, params } => resolvability_bounds(model, params, opts),
            Instance::Wiretap { model, params } => wiretap_bounds(model, params, opts),
        }
    }

    pub fn simulate(&self, cfg: &RunConfig) -> Result<EmpiricalResult> {
        match self {
            Instance::Channel { model, params } => schemes::simulate_channel(model, params, cfg),
            Instance::ChannelRank { model, params } => schemes::simulate_channel_rank(model, params, cfg),
            Instance::ChannelList { model, params } => schemes::simulate_channel_list(model, params, cfg),
            Instance::Gp { model, params } => schemes::simulate_gp(model, params, cfg),
            Instance::Wz { model, params } => schemes::simulate_wz(model, params, cfg),
            Instance::Jscc { model, params } => schemes::simulate_jscc(model, params, cfg),
            Instance::BcMarton { model, params } => schemes::simulate_bc_marton(model, params, cfg),
            Instance::BcCommon { model, params } => schemes::simulate_bc_common(model, params, cfg),
            Instance::Dlsc { model, params } => schemes::simulate_dlsc(model, params, cfg),
            Instance::Mac { model, params } => schemes::simulate_mac(model, params, cfg),
            Instance::Resolvability { model, params } => schemes::simulate_resolvability(model, params, cfg),
            Instance::Wiretap { model, params } => schemes::simulate_wiretap(model, params, cfg),
        }
    }

    /// Copy with `params.<key>` replaced.
    pub fn with_param(&self, key: &str, value: f64) -> Result<Self> {
        let mut v = self.to_value()?;
        set_param(&mut v, key, value)?;
        Self::from_value(v)
    }
}

/// Sets `doc.params.<key>`, as an integer when `value` is integral.
pub fn set_param(doc: &mut Value, key: &str, value: f64) -> Result<()> {
    let params = doc
        .get_mut("params")
        .and_then(Value::as_object_mut)
        .ok_or_else(|| invalid("instance has no 'params' object"))?;
    let v = if value.fract() == 0.0 && value.abs() < 9.0e15 {
        Value::from(value as i64)
    } else {
        serde_json::Number::from_f64(value).map(Value::Number).ok_or_else(|| invalid("non-finite parameter"))?
    };
    params.insert(key.to_string(), v);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{Kernel, Pmf};

    fn noiseless() -> Instance {
        Instance::Channel {
            model: ChannelModel::new(Pmf::uniform(2).unwrap(), Kernel::identity(2).unwrap()).unwrap(),
            params: ChannelParams::new(2),
        }
    }

    #[test]
    fn json_round_trip() {
        let inst = noiseless();
        let s = serde_json::to_string(&inst.to_value().unwrap()).unwrap();
        assert!(s.contains("\"setting\":\"channel\""));
        let back = Instance::from_json(&s).unwrap();
        assert_eq!(back.params().unwrap(), inst.params().unwrap());
    }

    #[test]
    fn parses_hand_written_instance() {
        let s = r#"{"setting": "channel-list",
                    "model": {"p_x": {"weights": [0.5, 0.5]}, "channel": {"rows": [[0.9, 0.1], [0.1, 0.9]]}},
                    "params": {"L": 4, "J": 2}}"#;
        let inst = Instance::from_json(s).unwrap();
        assert_eq!(inst.setting(), Setting::ChannelList);
        assert_eq!(inst.params().unwrap()["J"], 2.0);
    }

    #[test]
    fn rejects_bad_instances() {
        let unknown = r#"{"setting": "channel", "model": {"p_x": {"weights": [1.0]}, "channel": {"rows": [[1.0]]}},
                          "params": {"L": 2, "bogus": 1}}"#;
        assert!(Instance::from_json(unknown).is_err());
        let mismatch = r#"{"setting": "channel", "model": {"p_x": {"weights": [0.5, 0.5]}, "channel": {"rows": [[1.0]]}},
                           "params": {"L": 2}}"#;
        assert!(Instance::from_json(mismatch).is_err());
        assert!(noiseless().with_param("L", 2.5).is_err());
    }

    #[test]
    fn sweep_matches_closed_form() {
        for (l, want) in [(2.0, 0.5), (4.0, 2.0 / 3.0), (8.0, 0.8)] {
            let r = noiseless().with_param("L", l).unwrap().bounds(&EvalOptions::default()).unwrap();
            assert!((r.get("prop1").unwrap() - want).abs() < 1e-12);
        }
    }
}
