use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DesignSpaceModel;

/// Parameters of the ICEE loop. Counts, probabilities and budgets; see
/// [`derive_params`] for how they scale with the model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IceeParams {
    /// Design vs. fabrication exploration knob in `[0, 1]`.
    pub alpha: f64,
    /// Designs in the initial e-graph.
    pub k_d: usize,
    /// Arrangements generated per design.
    pub k_f: usize,
    /// New designs added per expansion, in `[0, k_d]`.
    pub k_nd: usize,
    /// Rounds of the design GA per expansion.
    pub k_m: usize,
    /// Population of the extraction GA.
    pub n_pop: usize,
    /// Cut orders tried per atomic packing.
    pub p: usize,
    pub t_d: usize,
    pub mt_d: usize,
    pub mc_d: f64,
    pub mm_d: f64,
    pub t_p: usize,
    pub mt_p: usize,
    pub mc_p: f64,
    pub mm_p: f64,
    /// Weight of impact against exploration in the pruning score.
    pub w: f64,
    pub p_rate: f64,
    /// Wall-clock seconds after which the e-graph is frozen.
    pub timeout_secs: f64,
}

/// `β = ⌊44·α⁷ + 2⌋`.
pub fn beta(alpha: f64) -> usize {
    (44.0 * alpha.powi(7) + 2.0).floor() as usize
}

/// Parameters for a model with `n_p` parts and `d_size` designs:
/// `K_d = 2^⌈log10 |D|⌉`, `N_pop = 4·K_d`, `K_f = β·n_p`,
/// `K_nd = ⌊(1−α)·K_d⌋`, `P = 2·(β−2)`, the remaining constants fixed.
pub fn derive_params(alpha: f64, n_p: usize, d_size: u64) -> IceeParams {
    let exp = (d_size.max(1) as f64).log10().ceil().max(0.0) as u32;
    let k_d = 1usize << exp;
    let b = beta(alpha);
    IceeParams {
        alpha,
        k_d,
        k_f: b * n_p.max(1),
        k_nd: ((1.0 - alpha) * k_d as f64).floor() as usize,
        k_m: 10,
        n_pop: 4 * k_d,
        p: (2 * b.saturating_sub(2)).max(1),
        t_d: 10,
        mt_d: 200,
        mc_d: 0.95,
        mm_d: 0.80,
        t_p: 20,
        mt_p: 200,
        mc_p: 0.95,
        mm_p: 0.80,
        w: 0.7,
        p_rate: 0.3,
        timeout_secs: 4.0 * 3600.0,
    }
}

impl IceeParams {
    /// [`derive_params`] with `|D|` the number of distinct bags, sampled from
    /// [`super::INIT_SAMPLES`] designs when the space is larger.
    pub fn for_model(model: &DesignSpaceModel, alpha: f64) -> Self {
        let size = model.design_space_size(super::INIT_SAMPLES);
        derive_params(alpha, model.n_parts(), size.unique_bops.max(1) as u64)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = [
            ("alpha", self.alpha),
            ("mc_d", self.mc_d),
            ("mm_d", self.mm_d),
            ("mc_p", self.mc_p),
            ("mm_p", self.mm_p),
            ("w", self.w),
            ("p_rate", self.p_rate),
        ];
        for (name, v) in unit {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Param(format!("{name} = {v} is outside [0, 1]")));
            }
        }
        if self.k_nd > self.k_d {
            return Err(Error::Param(format!("k_nd = {} exceeds k_d = {}", self.k_nd, self.k_d)));
        }
        if self.k_d == 0 || self.n_pop == 0 || self.p == 0 {
            return Err(Error::Param("k_d, n_pop and p must be at least 1".into()));
        }
        if self.timeout_secs.is_nan() || self.timeout_secs < 0.0 {
            return Err(Error::Param("timeout_secs must be >= 0".into()));
        }
        Ok(())
    }

    /// Sets one field by name from its textual value, e.g. `("t_d", "5")`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let parsed: serde_json::Value = serde_json::from_str(value)
            .map_err(|_| Error::Param(format!("`{key}`: `{value}` is not a number")))?;
        let mut one = serde_json::Map::new();
        one.insert(key.to_string(), parsed);
        self.merge_json(&one)
    }

    /// Applies every field present in a JSON object, then validates the result.
    /// On error `self` is unchanged.
    pub fn merge_json(&mut self, overrides: &serde_json::Map<String, serde_json::Value>) -> Result<()> {
        let mut json = serde_json::to_value(&*self)?;
        let obj = json.as_object_mut().expect("struct serializes to an object");
        for (key, value) in overrides {
            let Some(slot) = obj.get_mut(key) else {
                return Err(Error::Param(format!("unknown parameter `{key}`")));
            };
            if !value.is_number() {
                return Err(Error::Param(format!("`{key}`: `{value}` is not a number")));
            }
            *slot = value.clone();
        }
        let next: IceeParams = serde_json::from_value(json).map_err(|e| Error::Param(e.to_string()))?;
        next.validate()?;
        *self = next;
        Ok(())
    }
}
