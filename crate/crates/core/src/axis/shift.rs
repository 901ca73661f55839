use serde::{Deserialize, Serialize};

use super::AxisError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftCategory {
    Amplification,
    Preservation,
    Flip,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftAssessment {
    pub category: ShiftCategory,
    pub significant: bool,
    /// `s_gen − s_orig`.
    pub delta: f64,
    pub sigma: f64,
}

impl ShiftAssessment {
    pub fn is_significant(&self, category: ShiftCategory) -> bool {
        self.significant && self.category == category
    }
}

/// Significance and neutrality thresholds for [`assess_shift`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftParams {
    pub z: f64,
    pub neutral_eps: f64,
}

impl Default for ShiftParams {
    fn default() -> Self {
        Self {
            z: 1.96,
            neutral_eps: 0.05,
        }
    }
}

/// Classify the change from an original headline score to a generated one.
pub fn assess_shift(
    s_orig: f64,
    s_gen: f64,
    sigma: f64,
    z: f64,
    neutral_eps: f64,
) -> Result<ShiftAssessment, AxisError> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(AxisError::InvalidParameter(format!(
            "sigma {sigma} must be a finite non-negative number"
        )));
    }
    if !(z > 0.0 && z.is_finite()) {
        return Err(AxisError::InvalidParameter(format!("z {z} must be positive")));
    }
    if neutral_eps.is_nan() || neutral_eps < 0.0 {
        return Err(AxisError::InvalidParameter(format!(
            "neutral_eps {neutral_eps} must be non-negative"
        )));
    }
    if !(s_orig.is_finite() && s_gen.is_finite()) {
        return Err(AxisError::InvalidParameter("scores must be finite".into()));
    }
    let delta = s_gen - s_orig;
    let orig_slanted = s_orig.abs() > neutral_eps;
    let gen_slanted = s_gen.abs() > neutral_eps;
    let signs_differ = s_orig.signum() != s_gen.signum();
    let category = if orig_slanted && gen_slanted && signs_differ {
        ShiftCategory::Flip
    } else if (!orig_slanted || !signs_differ) && s_gen.abs() > s_orig.abs() {
        ShiftCategory::Amplification
    } else {
        ShiftCategory::Preservation
    };
    Ok(ShiftAssessment {
        category,
        significant: delta.abs() > z * sigma,
        delta,
        sigma,
    })
}

/// Pooled within-group standard deviation:
/// `sqrt(Σ_g Σ_i (x_gi − mean_g)² / Σ_g (n_g − 1))`.
///
/// Groups with fewer than two scores contribute nothing.
pub fn estimate_sigma(groups: &[Vec<f64>]) -> Result<f64, AxisError> {
    let mut ss = 0.0;
    let mut dof = 0usize;
    for g in groups.iter().filter(|g| g.len() >= 2) {
        let mean = g.iter().sum::<f64>() / g.len() as f64;
        ss += g.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
        dof += g.len() - 1;
    }
    if dof == 0 {
        return Err(AxisError::InsufficientData);
    }
    Ok((ss / dof as f64).sqrt())
}
