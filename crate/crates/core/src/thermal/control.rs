//! Exterior louvered blind operation programmes SC0–SC6.

use serde::{Deserialize, Serialize};

pub const RADIATION_THRESHOLD_W_M2: f64 = 200.0;
pub const TEMPERATURE_THRESHOLD_C: f64 = 27.0;
pub const BLOCK_SUN_MULTIPLIER: f64 = 0.10;
pub const HORIZONTAL_MULTIPLIER: f64 = 0.35;
pub const MIN_MULTIPLIER: f64 = 0.05;
/// Largest change of the multiplier across the slat reflectance range.
pub const REFLECTANCE_SWING: f64 = 0.03;
pub const MIN_SLAT_REFLECTANCE: f64 = 0.29;
pub const MAX_SLAT_REFLECTANCE: f64 = 0.85;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlindSchedule {
    None,
    AnnualWindowShading1,
    AnnualWindowShading2,
    Always,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trigger {
    SolarRadiation,
    SolarAndTemperature,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlatMode {
    BlockSun,
    Horizontal,
}

/// Which months the first annual schedule may deploy blinds in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule1Reading {
    /// June to August only; winter and inter-seasonal months retract.
    #[default]
    Summer,
    /// April to October, winter retracts.
    InterSeasonal,
}

impl Schedule1Reading {
    fn allows(self, month: u32) -> bool {
        match self {
            Self::Summer => (6..=8).contains(&month),
            Self::InterSeasonal => (4..=10).contains(&month),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShadingControlProgram {
    pub id: u8,
    pub schedule: BlindSchedule,
    pub trigger: Trigger,
    pub slat_mode: SlatMode,
}

impl ShadingControlProgram {
    pub const COUNT: u8 = 7;

    /// Programme `SC<id>`; ids above 6 saturate to SC6.
    pub fn from_id(id: u8) -> Self {
        use BlindSchedule::*;
        let (schedule, trigger, slat_mode) = match id {
            0 => (None, Trigger::SolarRadiation, SlatMode::BlockSun),
            1 => (AnnualWindowShading1, Trigger::SolarRadiation, SlatMode::BlockSun),
            2 => (AnnualWindowShading1, Trigger::SolarRadiation, SlatMode::Horizontal),
            3 => (AnnualWindowShading2, Trigger::SolarRadiation, SlatMode::BlockSun),
            4 => (AnnualWindowShading2, Trigger::SolarRadiation, SlatMode::Horizontal),
            5 => (Always, Trigger::SolarAndTemperature, SlatMode::BlockSun),
            _ => (Always, Trigger::SolarAndTemperature, SlatMode::Horizontal),
        };
        Self { id: id.min(6), schedule, trigger, slat_mode }
    }

    pub fn label(&self) -> String {
        format!("SC{}", self.id)
    }

    fn month_allows(&self, month: u32, reading: Schedule1Reading) -> bool {
        match self.schedule {
            BlindSchedule::None => false,
            BlindSchedule::AnnualWindowShading1 => reading.allows(month),
            BlindSchedule::AnnualWindowShading2 => (4..=10).contains(&month),
            BlindSchedule::Always => true,
        }
    }
}

/// Conditions seen by the controller in one time step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlindInputs {
    pub month: u32,
    pub sun_up: bool,
    /// Total irradiance on the window plane, W/m².
    pub incident_w_m2: f64,
    /// Zone temperature the thermostat saw last step, °C.
    pub zone_temp_c: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlindState {
    pub active: bool,
    /// Fraction of solar gain that passes the blind.
    pub multiplier: f64,
}

impl BlindState {
    pub const RETRACTED: Self = Self { active: false, multiplier: 1.0 };
}

/// Transmission multiplier of a deployed blind. Lighter slats pass slightly
/// more reflected light than darker ones.
pub fn blind_multiplier(mode: SlatMode, slat_reflectance: f64) -> f64 {
    let base = match mode {
        SlatMode::BlockSun => BLOCK_SUN_MULTIPLIER,
        SlatMode::Horizontal => HORIZONTAL_MULTIPLIER,
    };
    let t = ((slat_reflectance - MIN_SLAT_REFLECTANCE) / (MAX_SLAT_REFLECTANCE - MIN_SLAT_REFLECTANCE))
        .clamp(0.0, 1.0);
    (base + REFLECTANCE_SWING * (2.0 * t - 1.0)).max(MIN_MULTIPLIER)
}

pub fn blind_state(
    sc: &ShadingControlProgram,
    inputs: &BlindInputs,
    slat_reflectance: f64,
    reading: Schedule1Reading,
) -> BlindState {
    if !inputs.sun_up || !sc.month_allows(inputs.month, reading) {
        return BlindState::RETRACTED;
    }
    let sunny = inputs.incident_w_m2 > RADIATION_THRESHOLD_W_M2;
    let triggered = match sc.trigger {
        Trigger::SolarRadiation => sunny,
        Trigger::SolarAndTemperature => sunny && inputs.zone_temp_c > TEMPERATURE_THRESHOLD_C,
    };
    if triggered {
        BlindState { active: true, multiplier: blind_multiplier(sc.slat_mode, slat_reflectance) }
    } else {
        BlindState::RETRACTED
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn at(month: u32, incident: f64, temp: f64) -> BlindInputs {
        BlindInputs { month, sun_up: true, incident_w_m2: incident, zone_temp_c: temp }
    }

    #[test]
    fn sc0_never_deploys() {
        let sc = ShadingControlProgram::from_id(0);
        for m in 1..=12 {
            let s = blind_state(&sc, &at(m, 1000.0, 40.0), 0.5, Schedule1Reading::InterSeasonal);
            assert_eq!(s, BlindState::RETRACTED);
        }
    }

    #[test]
    fn schedule_one_retracts_in_january() {
        let sc = ShadingControlProgram::from_id(1);
        for reading in [Schedule1Reading::Summer, Schedule1Reading::InterSeasonal] {
            assert!(!blind_state(&sc, &at(1, 500.0, 20.0), 0.5, reading).active);
        }
        assert!(blind_state(&sc, &at(7, 500.0, 20.0), 0.5, Schedule1Reading::Summer).active);
        assert!(!blind_state(&sc, &at(4, 500.0, 20.0), 0.5, Schedule1Reading::Summer).active);
        assert!(blind_state(&sc, &at(4, 500.0, 20.0), 0.5, Schedule1Reading::InterSeasonal).active);
    }

    #[test]
    fn schedule_two_covers_april_to_october() {
        let sc = ShadingControlProgram::from_id(4);
        let active: Vec<u32> = (1..=12)
            .filter(|&m| blind_state(&sc, &at(m, 500.0, 20.0), 0.5, Schedule1Reading::Summer).active)
            .collect();
        assert_eq!(active, (4..=10).collect::<Vec<_>>());
    }

    #[test]
    fn sc5_needs_heat_and_sun() {
        let sc = ShadingControlProgram::from_id(5);
        let s = blind_state(&sc, &at(7, 300.0, 28.0), MIN_SLAT_REFLECTANCE, Schedule1Reading::Summer);
        assert!(s.active);
        assert!((s.multiplier - (BLOCK_SUN_MULTIPLIER - REFLECTANCE_SWING)).abs() < 1e-12);
        assert!(!blind_state(&sc, &at(7, 300.0, 26.0), 0.5, Schedule1Reading::Summer).active);
        assert!(!blind_state(&sc, &at(7, 150.0, 30.0), 0.5, Schedule1Reading::Summer).active);
    }

    #[test]
    fn night_always_retracts() {
        for id in 0..7 {
            let sc = ShadingControlProgram::from_id(id);
            let mut i = at(7, 900.0, 35.0);
            i.sun_up = false;
            assert_eq!(blind_state(&sc, &i, 0.5, Schedule1Reading::Summer), BlindState::RETRACTED);
        }
    }

    #[test]
    fn multiplier_ends() {
        assert!((blind_multiplier(SlatMode::Horizontal, MAX_SLAT_REFLECTANCE) - 0.38).abs() < 1e-12);
        assert!((blind_multiplier(SlatMode::Horizontal, MIN_SLAT_REFLECTANCE) - 0.32).abs() < 1e-12);
        assert!((blind_multiplier(SlatMode::BlockSun, 0.57) - 0.10).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn multiplier_in_range(id in 0u8..7, m in 1u32..13, inc in 0.0f64..1200.0, t in 10.0f64..40.0, r in 0.0f64..1.0) {
            let s = blind_state(&ShadingControlProgram::from_id(id), &at(m, inc, t), r, Schedule1Reading::Summer);
            prop_assert!(s.multiplier >= MIN_MULTIPLIER && s.multiplier <= 1.0);
            prop_assert_eq!(s.active, s.multiplier < 1.0);
        }
    }
}
