//! Case-study dwelling: one thermal zone, exterior façades and the window
//! slots on them, with window sizing and attached-shading rules.

mod shading;

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::Orientation;

pub use shading::{validate_shading, ShadingGeometry, CLIPPED_EXTENSION_M, MAX_DEPTH_M, MAX_EXTENSION_M, MIN_DEPTH_M};

/// Smallest window allowed anywhere.
pub const MIN_WINDOW_WIDTH_M: f64 = 0.6;
pub const MIN_WINDOW_HEIGHT_M: f64 = 1.0;
/// Width of kitchen and bathroom windows.
pub const FIXED_WINDOW_WIDTH_M: f64 = 0.6;
/// Minimum glazing to floor ratio in habitable rooms.
pub const MIN_WINDOW_FLOOR_RATIO: f64 = 0.12;

#[derive(Debug, Error)]
pub enum BuildingError {
    #[error("failed to read geometry {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed geometry: {0}")]
    Parse(String),
    #[error("invalid geometry: {0}")]
    Validation(String),
    #[error("geometry error: {0}")]
    Geometry(String),
}

/// Length in metres to whole decimetres, truncating towards the grid floor.
/// The small bias keeps values like `0.3` (stored as 0.29999…) on their cell.
pub fn truncate_dm(x: f64) -> i64 {
    (x * 10.0 + 1e-9).floor() as i64
}

pub(crate) fn dm(x: f64) -> i64 {
    (x * 10.0).round() as i64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Room {
    Kitchen,
    Living,
    Bath,
    SingleBed,
    DoubleBed,
}

impl Room {
    /// Living rooms and bedrooms must meet the minimum glazing ratio.
    pub fn is_habitable(self) -> bool {
        matches!(self, Room::Living | Room::SingleBed | Room::DoubleBed)
    }
}

impl fmt::Display for Room {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A designated wall area that receives exactly one window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSlot {
    pub id: String,
    pub room: Room,
    pub room_floor_area_m2: f64,
    /// Designated area the window must fit in; the top edges are aligned.
    pub box_width_m: f64,
    pub box_height_m: f64,
    #[serde(default)]
    pub width_fixed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Facade {
    pub name: String,
    /// 0 = north, clockwise.
    pub azimuth_deg: f64,
    pub width_m: f64,
    pub height_m: f64,
    pub slots: Vec<WindowSlot>,
}

impl Facade {
    pub fn gross_area_m2(&self) -> f64 {
        self.width_m * self.height_m
    }

    pub fn orientation(&self) -> Orientation {
        Orientation::from_azimuth(self.azimuth_deg)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildingModel {
    pub zone_floor_area_m2: f64,
    pub storey_height_m: f64,
    pub wall_u: f64,
    /// Areal heat capacity of the internal partitions, kJ/m²K.
    pub internal_heat_capacity_kj_m2k: f64,
    pub internal_mass_area_m2: f64,
    pub n50: f64,
    pub compactness_m3_m2: f64,
    /// Floor area not belonging to any windowed room (hall, corridor).
    #[serde(default)]
    pub circulation_floor_area_m2: f64,
    pub facades: Vec<Facade>,
}

/// Outcome of fitting a requested window size to a slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WindowSize {
    pub width_dm: i64,
    pub height_dm: i64,
    pub width_clamped: bool,
    pub height_clamped: bool,
}

impl WindowSize {
    pub fn width_m(&self) -> f64 {
        self.width_dm as f64 / 10.0
    }

    pub fn height_m(&self) -> f64 {
        self.height_dm as f64 / 10.0
    }

    pub fn area_m2(&self) -> f64 {
        (self.width_dm * self.height_dm) as f64 / 100.0
    }

    pub fn clamped(&self) -> bool {
        self.width_clamped || self.height_clamped
    }
}

/// Truncates a requested size to the 0.1 m grid and forces it into the
/// slot: minimum 0.60 × 1.00 m, fixed width where required, never larger
/// than the designated area.
pub fn validate_window(slot: &WindowSlot, width_m: f64, height_m: f64) -> WindowSize {
    let min_w = dm(MIN_WINDOW_WIDTH_M);
    let min_h = dm(MIN_WINDOW_HEIGHT_M);
    let max_w = truncate_dm(slot.box_width_m).max(min_w);
    let max_h = truncate_dm(slot.box_height_m).max(min_h);

    let (w, width_clamped) = if slot.width_fixed {
        let fixed = dm(FIXED_WINDOW_WIDTH_M);
        (fixed, truncate_dm(width_m) != fixed)
    } else {
        let t = truncate_dm(width_m);
        let c = t.clamp(min_w, max_w);
        (c, c != t)
    };
    let t = truncate_dm(height_m);
    let h = t.clamp(min_h, max_h);
    WindowSize {
        width_dm: w,
        height_dm: h,
        width_clamped,
        height_clamped: h != t,
    }
}

/// Glazing to floor area ratio, rounded to 1e-9 so that exact grid areas
/// such as 2.1 m² over 17.5 m² land on 0.12 rather than just below it.
pub fn window_to_floor_ratio(window_area_m2: f64, floor_area_m2: f64) -> f64 {
    let r = window_area_m2 / floor_area_m2;
    (r * 1e9).round() / 1e9
}

impl BuildingModel {
    pub fn from_json_str(text: &str) -> Result<Self, BuildingError> {
        let model: BuildingModel =
            serde_json::from_str(text).map_err(|e| BuildingError::Parse(e.to_string()))?;
        model.validate()?;
        Ok(model)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, BuildingError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| BuildingError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<(), BuildingError> {
        let bad = |m: String| Err(BuildingError::Validation(m));
        for (name, v) in [
            ("zone_floor_area_m2", self.zone_floor_area_m2),
            ("storey_height_m", self.storey_height_m),
            ("wall_u", self.wall_u),
            ("internal_heat_capacity_kj_m2k", self.internal_heat_capacity_kj_m2k),
            ("internal_mass_area_m2", self.internal_mass_area_m2),
            ("n50", self.n50),
            ("compactness_m3_m2", self.compactness_m3_m2),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if self.facades.is_empty() {
            return bad("at least one façade is required".into());
        }
        let mut ids = HashSet::new();
        for f in &self.facades {
            if !(f.width_m > 0.0 && f.height_m > 0.0) {
                return bad(format!("façade {} has no area", f.name));
            }
            let mut box_width = 0.0;
            for s in &f.slots {
                if !ids.insert(s.id.as_str()) {
                    return bad(format!("duplicate slot id {}", s.id));
                }
                if !(s.room_floor_area_m2 > 0.0) {
                    return bad(format!("slot {} has no room floor area", s.id));
                }
                if s.box_width_m < MIN_WINDOW_WIDTH_M - 1e-9 || s.box_height_m < MIN_WINDOW_HEIGHT_M - 1e-9 {
                    return bad(format!(
                        "slot {} cannot hold the minimum {MIN_WINDOW_WIDTH_M} x {MIN_WINDOW_HEIGHT_M} m window",
                        s.id
                    ));
                }
                if s.box_height_m > f.height_m + 1e-9 {
                    return bad(format!("slot {} is taller than façade {}", s.id, f.name));
                }
                box_width += s.box_width_m;
            }
            if box_width > f.width_m + 1e-9 {
                return bad(format!("slots on façade {} are wider than the façade", f.name));
            }
        }
        let ci = self.volume_m3() / self.envelope_area_m2();
        if (ci - self.compactness_m3_m2).abs() > 0.02 * self.compactness_m3_m2 {
            return bad(format!(
                "compactness {} does not match volume/envelope = {ci:.3}",
                self.compactness_m3_m2
            ));
        }
        Ok(())
    }

    pub fn volume_m3(&self) -> f64 {
        self.zone_floor_area_m2 * self.storey_height_m
    }

    /// Exposed envelope: the façades only. Floors, ceilings and party walls
    /// are adiabatic.
    pub fn envelope_area_m2(&self) -> f64 {
        self.facades.iter().map(Facade::gross_area_m2).sum()
    }

    /// Heat capacity of the zone (internal mass plus air), J/K.
    pub fn capacitance_j_k(&self) -> f64 {
        self.internal_heat_capacity_kj_m2k * 1e3 * self.internal_mass_area_m2
            + 1.2 * 1005.0 * self.volume_m3()
    }

    /// All slots in façade order, with the index of their façade.
    pub fn slots(&self) -> impl Iterator<Item = (usize, &WindowSlot)> {
        self.facades
            .iter()
            .enumerate()
            .flat_map(|(i, f)| f.slots.iter().map(move |s| (i, s)))
    }

    pub fn slot_count(&self) -> usize {
        self.facades.iter().map(|f| f.slots.len()).sum()
    }

    /// Per-slot glazing ratio for habitable rooms, given window areas in
    /// slot order.
    pub fn room_ratios(&self, window_areas_m2: &[f64]) -> Vec<(String, f64)> {
        self.slots()
            .zip(window_areas_m2)
            .filter(|((_, s), _)| s.room.is_habitable())
            .map(|((_, s), &a)| (s.id.clone(), window_to_floor_ratio(a, s.room_floor_area_m2)))
            .collect()
    }

    /// Area-weighted mean U of the exposed envelope. `windows` holds
    /// `(area, U_w)` per slot, in slot order.
    pub fn heat_transfer_k(&self, windows: &[(f64, f64)]) -> Result<f64, BuildingError> {
        if windows.len() != self.slot_count() {
            return Err(BuildingError::Geometry(format!(
                "expected {} windows, got {}",
                self.slot_count(),
                windows.len()
            )));
        }
        let mut ua = 0.0;
        let mut area = 0.0;
        let mut k = 0;
        for f in &self.facades {
            let gross = f.gross_area_m2();
            let mut glazed = 0.0;
            for _ in &f.slots {
                let (a, u) = windows[k];
                k += 1;
                glazed += a;
                ua += a * u;
            }
            if glazed > gross + 1e-9 {
                return Err(BuildingError::Geometry(format!(
                    "windows on façade {} cover {glazed:.2} m² of {gross:.2} m²",
                    f.name
                )));
            }
            ua += (gross - glazed) * self.wall_u;
            area += gross;
        }
        Ok(ua / area)
    }
}
