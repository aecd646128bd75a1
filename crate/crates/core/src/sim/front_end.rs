use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::SPEED_OF_LIGHT;

/// Supported 24 GHz front-end modules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FrontEndKind {
    /// Single receive channel with IQ mixer, integrated LNA, ÷8192 prescaler output.
    #[serde(rename = "IVS947")]
    Ivs947,
    /// Two receive antennas, one real mixer each, no LNA.
    #[serde(rename = "IVS565")]
    Ivs565,
}

impl FrontEndKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ivs947 => "IVS947",
            Self::Ivs565 => "IVS565",
        }
    }
}

impl fmt::Display for FrontEndKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FrontEndKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().replace(['-', '_'], "").as_str() {
            "IVS947" => Ok(Self::Ivs947),
            "IVS565" => Ok(Self::Ivs565),
            _ => Err(SimError::UnknownFrontEnd(s.to_string())),
        }
    }
}

/// Division ratio of the IVS-947 prescaler output.
pub const PRESCALER_RATIO: u32 = 8192;

/// Tuning voltage at which the VCO sits at `f_base`.
pub const TUNE_ANCHOR_V: f64 = 0.7;

/// Nominal VCO sensitivity, Hz/V.
pub const K_VCO: f64 = 720e6;

/// RF frequency at the tuning anchor, Hz.
pub const F_BASE: f64 = 24.0e9;

/// Behavioral model of a front end's VCO and receive architecture.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontEndModel {
    pub kind: FrontEndKind,
    /// RF output at `tune_anchor_v`, Hz.
    pub f_base: f64,
    pub tune_anchor_v: f64,
    /// Linear VCO sensitivity, Hz/V.
    pub k_vco: f64,
    /// Cubic tuning term, Hz/V³, applied to the offset from the anchor.
    pub vco_cubic: f64,
    pub prescaler_ratio: Option<u32>,
    /// Receive antenna spacing, m. Only meaningful for the IVS-565.
    pub rx_spacing: Option<f64>,
    pub has_lna: bool,
}

impl FrontEndModel {
    pub fn ivs947() -> Self {
        Self {
            kind: FrontEndKind::Ivs947,
            f_base: F_BASE,
            tune_anchor_v: TUNE_ANCHOR_V,
            k_vco: K_VCO,
            vco_cubic: 0.0,
            prescaler_ratio: Some(PRESCALER_RATIO),
            rx_spacing: None,
            has_lna: true,
        }
    }

    /// Antenna spacing defaults to half a wavelength at 24.108 GHz.
    pub fn ivs565() -> Self {
        Self {
            kind: FrontEndKind::Ivs565,
            f_base: F_BASE,
            tune_anchor_v: TUNE_ANCHOR_V,
            k_vco: K_VCO,
            vco_cubic: 0.0,
            prescaler_ratio: None,
            rx_spacing: Some(SPEED_OF_LIGHT / 24.108e9 / 2.0),
            has_lna: false,
        }
    }

    pub fn for_kind(kind: FrontEndKind) -> Self {
        match kind {
            FrontEndKind::Ivs947 => Self::ivs947(),
            FrontEndKind::Ivs565 => Self::ivs565(),
        }
    }

    pub fn with_vco_cubic(mut self, hz_per_v3: f64) -> Self {
        self.vco_cubic = hz_per_v3;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |why: &str| Err(SimError::InvalidFrontEnd(why.to_string()));
        if !(self.k_vco > 0.0 && self.k_vco.is_finite()) {
            return bad("k_vco must be positive");
        }
        if !(self.f_base > 0.0 && self.f_base.is_finite() && self.vco_cubic.is_finite()) {
            return bad("f_base must be positive and finite");
        }
        match self.kind {
            FrontEndKind::Ivs947 => {
                if self.prescaler_ratio != Some(PRESCALER_RATIO) {
                    return bad("IVS947 prescaler ratio must be 8192");
                }
            }
            FrontEndKind::Ivs565 => match self.rx_spacing {
                Some(d) if d > 0.0 && d.is_finite() => {}
                _ => return bad("IVS565 needs a positive rx_spacing"),
            },
        }
        Ok(())
    }

    /// Number of receive ADC channels the module drives.
    pub fn rx_channels(&self) -> usize {
        match self.kind {
            FrontEndKind::Ivs947 => 1,
            FrontEndKind::Ivs565 => 2,
        }
    }

    pub fn is_iq(&self) -> bool {
        self.kind == FrontEndKind::Ivs947
    }

    /// Offset of the RF output from `f_base` at tuning voltage `v`.
    pub fn frequency_offset(&self, v: f64) -> f64 {
        let dv = v - self.tune_anchor_v;
        self.k_vco * dv + self.vco_cubic * dv * dv * dv
    }

    pub fn rf_frequency(&self, v: f64) -> f64 {
        self.f_base + self.frequency_offset(v)
    }

    /// d f / d v at tuning voltage `v`.
    pub fn sensitivity(&self, v: f64) -> f64 {
        let dv = v - self.tune_anchor_v;
        self.k_vco + 3.0 * self.vco_cubic * dv * dv
    }
}
