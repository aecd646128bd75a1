use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FrontEndKind, SimError};

/// A point reflector. Negative velocity means approaching.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointTarget {
    pub range_m: f64,
    #[serde(default)]
    pub velocity_mps: f64,
    /// Beat-signal amplitude at the mixer output, V.
    pub amplitude: f64,
    /// Degrees off boresight; used by the two-channel front end only.
    #[serde(default)]
    pub bearing_deg: f64,
}

impl PointTarget {
    pub fn new(range_m: f64, velocity_mps: f64, amplitude: f64) -> Self {
        Self { range_m, velocity_mps, amplitude, bearing_deg: 0.0 }
    }

    pub fn with_bearing(mut self, deg: f64) -> Self {
        self.bearing_deg = deg;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let ok = self.range_m > 0.0
            && self.range_m.is_finite()
            && self.velocity_mps.is_finite()
            && self.amplitude >= 0.0
            && self.amplitude.is_finite()
            && self.bearing_deg.abs() < 90.0;
        if ok {
            Ok(())
        } else {
            Err(SimError::InvalidScene(format!("target {self:?} violates range > 0, amplitude >= 0, |bearing| < 90")))
        }
    }
}

/// The simulated radar channel.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scene {
    pub targets: Vec<PointTarget>,
    /// White Gaussian noise per ADC channel, V RMS.
    pub noise_std: f64,
    /// Direct Tx→Rx leakage appearing at zero range, V.
    pub coupling_amplitude: f64,
}

impl Scene {
    pub fn new(targets: Vec<PointTarget>, noise_std: f64) -> Result<Self, SimError> {
        let scene = Self { targets, noise_std, coupling_amplitude: 0.0 };
        scene.validate()?;
        Ok(scene)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(SimError::InvalidScene(format!("noise_std {} must be >= 0", self.noise_std)));
        }
        if !self.coupling_amplitude.is_finite() {
            return Err(SimError::InvalidScene("coupling_amplitude must be finite".into()));
        }
        self.targets.iter().try_for_each(PointTarget::validate)
    }
}

/// On-disk scene description (JSON).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub targets: Vec<PointTarget>,
    pub noise_std: f64,
    pub front_end: FrontEndKind,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub coupling_amplitude: f64,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

impl SceneFile {
    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let file: Self = serde_json::from_str(text).map_err(|e| SimError::SceneFile(e.to_string()))?;
        file.scene().validate()?;
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| SimError::SceneFile(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serializes")
    }

    pub fn scene(&self) -> Scene {
        Scene { targets: self.targets.clone(), noise_std: self.noise_std, coupling_amplitude: self.coupling_amplitude }
    }
}
