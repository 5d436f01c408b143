//! Window product catalog: glass panes, gas gaps and frames, plus the
//! double-glazing compositions that can be legally assembled from them.

mod code;
mod physics;
mod rules;

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use code::{pane_token, parse_code, CompositionCode};
pub use physics::{
    center_of_glass_u, composition_optics, glazing_u, window_u, window_u_value, WindowAssembly,
    FRAME_WIDTH_M, GLASS_CONDUCTIVITY, MEAN_GAP_TEMPERATURE_K, R_SE, R_SI, STEFAN_BOLTZMANN,
};
pub use rules::{enumerate_compositions, enumerate_all};

/// Panes below this emissivity on a face count as low-e coated.
pub const LOW_E_THRESHOLD: f64 = 0.5;
/// Solar transmittance below which a pane is a solar-control glass.
pub const SOLAR_CONTROL_TSOL: f64 = 0.54;
/// Allowed nominal glass thicknesses, in class order.
pub const THICKNESS_CLASSES_MM: [u32; 4] = [4, 6, 8, 10];
/// Allowed gap widths.
pub const GAP_WIDTHS_MM: [u32; 5] = [6, 8, 10, 12, 16];

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("failed to read catalog {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed catalog: {0}")]
    Parse(String),
    #[error("invalid catalog entry `{id}`: {reason}")]
    Validation { id: String, reason: String },
    #[error("gap width must be positive")]
    DegenerateGap,
    #[error("window geometry: {0}")]
    Geometry(String),
    #[error("cannot decode composition code `{code}`: {reason}")]
    Code { code: String, reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GlassCategory {
    Clear,
    LowTsol,
    SpectrallySelective,
    HighTsolLowE,
    LowTsolBackLowE,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlassPane {
    pub id: String,
    pub thickness_mm: u32,
    pub tsol: f64,
    pub tvis: f64,
    pub emis_front: f64,
    pub emis_back: f64,
    pub category: GlassCategory,
}

/// Where a pane sits in the double glazing unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PanePosition {
    Outer,
    Inner,
}

impl GlassPane {
    pub fn is_solar_control(&self) -> bool {
        self.tsol < SOLAR_CONTROL_TSOL
    }

    /// True when exactly one side carries a low-e coating.
    pub fn is_coated(&self) -> bool {
        (self.emis_front < LOW_E_THRESHOLD) != (self.emis_back < LOW_E_THRESHOLD)
    }

    /// Both sides coated: such a pane can never be installed with only
    /// cavity-facing coatings.
    pub fn is_double_coated(&self) -> bool {
        self.emis_front < LOW_E_THRESHOLD && self.emis_back < LOW_E_THRESHOLD
    }

    /// Emissivity of the face that looks into the cavity. Coated panes are
    /// always installed with the coating towards the gap.
    pub fn cavity_emissivity(&self, position: PanePosition) -> f64 {
        if self.is_coated() {
            self.emis_front.min(self.emis_back)
        } else {
            match position {
                PanePosition::Outer => self.emis_back,
                PanePosition::Inner => self.emis_front,
            }
        }
    }

    pub fn thickness_class(&self) -> Option<usize> {
        THICKNESS_CLASSES_MM
            .iter()
            .position(|&t| t == self.thickness_mm)
    }

    fn validate(&self) -> Result<(), CatalogError> {
        let fail = |reason: String| {
            Err(CatalogError::Validation {
                id: self.id.clone(),
                reason,
            })
        };
        if self.id.is_empty() || self.id.contains(['#', ',']) {
            return fail("glass ids must be non-empty and free of '#' and ','".into());
        }
        if self.thickness_class().is_none() {
            return fail(format!(
                "thickness {} mm is not one of {:?}",
                self.thickness_mm, THICKNESS_CLASSES_MM
            ));
        }
        for (name, v) in [("tsol", self.tsol), ("tvis", self.tvis)] {
            if !(v > 0.0 && v <= 1.0) {
                return fail(format!("{name} = {v} outside (0, 1]"));
            }
        }
        for (name, v) in [("emis_front", self.emis_front), ("emis_back", self.emis_back)] {
            if !(v > 0.0 && v <= 1.0) {
                return fail(format!("{name} = {v} outside (0, 1]"));
            }
        }
        let within = |v: f64, lo: f64, hi: f64| v >= lo - 1e-9 && v <= hi + 1e-9;
        let ok = match self.category {
            GlassCategory::Clear => !self.is_coated() && !self.is_double_coated() && !self.is_solar_control(),
            GlassCategory::LowTsol => {
                !self.is_coated() && !self.is_double_coated() && within(self.tsol, 0.23, 0.54)
            }
            GlassCategory::SpectrallySelective => {
                !self.is_coated()
                    && !self.is_double_coated()
                    && within(self.tvis, 0.56, 0.68)
                    && within(self.tsol, 0.25, 0.54)
            }
            GlassCategory::HighTsolLowE => self.is_coated() && within(self.tsol, 0.60, 0.82),
            GlassCategory::LowTsolBackLowE => {
                self.is_coated() && self.emis_back < LOW_E_THRESHOLD && within(self.tsol, 0.26, 0.55)
            }
        };
        if !ok {
            return fail(format!(
                "properties (tsol {}, tvis {}, emis {}/{}) do not fit category {:?}",
                self.tsol, self.tvis, self.emis_front, self.emis_back, self.category
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gas {
    Air,
    Argon,
}

impl Gas {
    /// Thermal conductivity at the mean gap temperature, W/mK.
    pub fn conductivity(self) -> f64 {
        match self {
            Gas::Air => 0.025,
            Gas::Argon => 0.017,
        }
    }
}

impl fmt::Display for Gas {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gas::Air => f.write_str("Air"),
            Gas::Argon => f.write_str("Argon"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GapSpec {
    pub gas: Gas,
    pub width_mm: u32,
}

impl GapSpec {
    pub fn id(&self) -> String {
        format!("{}_{}", self.gas, self.width_mm)
    }

    pub fn conductivity(&self) -> f64 {
        self.gas.conductivity()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FrameMaterial {
    WoodHigh,
    WoodLow,
    WoodAlum,
    Alu1,
    Alu2,
    Alu3,
    Alu4,
    Vinyl1,
    Vinyl2,
    Vinyl3,
}

fn default_frame_width() -> f64 {
    FRAME_WIDTH_M
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameSpec {
    pub id: String,
    pub material: FrameMaterial,
    pub u_value: f64,
    #[serde(default = "default_frame_width")]
    pub width_m: f64,
}

impl FrameSpec {
    fn validate(&self) -> Result<(), CatalogError> {
        if !(0.5..=5.0).contains(&self.u_value) {
            return Err(CatalogError::Validation {
                id: self.id.clone(),
                reason: format!("frame U {} outside [0.5, 5.0]", self.u_value),
            });
        }
        if self.width_m != FRAME_WIDTH_M {
            return Err(CatalogError::Validation {
                id: self.id.clone(),
                reason: format!("frame width must be {FRAME_WIDTH_M} m, got {}", self.width_m),
            });
        }
        Ok(())
    }
}

/// Measured optics for a specific composition, taking precedence over the
/// built-in estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpticsOverride {
    pub code: String,
    pub shgc: f64,
    pub vt: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    pub glasses: Vec<GlassPane>,
    pub gaps: Vec<GapSpec>,
    pub frames: Vec<FrameSpec>,
    #[serde(default, rename = "compositions")]
    pub overrides: Vec<OpticsOverride>,
}

impl Catalog {
    pub fn from_json_str(text: &str) -> Result<Self, CatalogError> {
        let catalog: Catalog =
            serde_json::from_str(text).map_err(|e| CatalogError::Parse(e.to_string()))?;
        catalog.validate()?;
        Ok(catalog)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CatalogError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| CatalogError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<(), CatalogError> {
        let mut seen = HashSet::new();
        for g in &self.glasses {
            g.validate()?;
            if !seen.insert(g.id.as_str()) {
                return Err(dup(&g.id));
            }
        }
        let mut gap_ids = HashSet::new();
        for gap in &self.gaps {
            let id = gap.id();
            if !GAP_WIDTHS_MM.contains(&gap.width_mm) {
                return Err(CatalogError::Validation {
                    id,
                    reason: format!("gap width not one of {GAP_WIDTHS_MM:?}"),
                });
            }
            if !gap_ids.insert(id.clone()) {
                return Err(dup(&id));
            }
        }
        let mut frame_ids = HashSet::new();
        for f in &self.frames {
            f.validate()?;
            if !frame_ids.insert(f.id.as_str()) {
                return Err(dup(&f.id));
            }
        }
        for o in &self.overrides {
            for (name, v) in [("shgc", o.shgc), ("vt", o.vt)] {
                if !(v > 0.0 && v <= 1.0) {
                    return Err(CatalogError::Validation {
                        id: o.code.clone(),
                        reason: format!("{name} = {v} outside (0, 1]"),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn glass(&self, id: &str) -> Option<&GlassPane> {
        self.glasses.iter().find(|g| g.id == id)
    }

    pub fn frame(&self, id: &str) -> Option<&FrameSpec> {
        self.frames.iter().find(|f| f.id == id)
    }

    pub fn gap(&self, gas: Gas, width_mm: u32) -> Option<&GapSpec> {
        self.gaps
            .iter()
            .find(|g| g.gas == gas && g.width_mm == width_mm)
    }

    fn optics_override(&self, code: &str) -> Option<&OpticsOverride> {
        self.overrides.iter().find(|o| o.code == code)
    }
}

fn dup(id: &str) -> CatalogError {
    CatalogError::Validation {
        id: id.to_string(),
        reason: "duplicate id".into(),
    }
}

/// Compass sector of a façade.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Orientation {
    N,
    E,
    W,
    S,
    SE,
    SW,
}

/// Which glazing rule family governs an orientation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleFamily {
    North,
    EastWest,
    South,
}

impl Orientation {
    pub const ALL: [Orientation; 6] = [
        Orientation::N,
        Orientation::E,
        Orientation::W,
        Orientation::S,
        Orientation::SE,
        Orientation::SW,
    ];

    /// Azimuth in degrees, 0 = north, clockwise.
    pub fn from_azimuth(azimuth_deg: f64) -> Self {
        let a = azimuth_deg.rem_euclid(360.0);
        match a {
            a if !(60.0..300.0).contains(&a) => Orientation::N,
            a if a < 120.0 => Orientation::E,
            a if a < 157.5 => Orientation::SE,
            a if a < 202.5 => Orientation::S,
            a if a < 240.0 => Orientation::SW,
            _ => Orientation::W,
        }
    }

    pub fn family(self) -> RuleFamily {
        match self {
            Orientation::N => RuleFamily::North,
            Orientation::E | Orientation::W => RuleFamily::EastWest,
            Orientation::S | Orientation::SE | Orientation::SW => RuleFamily::South,
        }
    }
}

impl std::str::FromStr for Orientation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "N" => Ok(Orientation::N),
            "E" => Ok(Orientation::E),
            "W" => Ok(Orientation::W),
            "S" => Ok(Orientation::S),
            "SE" => Ok(Orientation::SE),
            "SW" => Ok(Orientation::SW),
            other => Err(format!("unknown orientation `{other}`")),
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A legal double-glazing unit with its centre-of-glass properties.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlazingComposition {
    pub outer: GlassPane,
    pub gap: GapSpec,
    pub inner: GlassPane,
    pub u_g: f64,
    pub shgc: f64,
    pub vt: f64,
    pub code: String,
}

impl GlazingComposition {
    /// Assembles a composition, computing U and optics. Catalog overrides
    /// win over the optics estimate.
    pub fn assemble(
        catalog: &Catalog,
        outer: &GlassPane,
        gap: &GapSpec,
        inner: &GlassPane,
    ) -> Result<Self, CatalogError> {
        let code = CompositionCode::new(outer, gap, inner).to_string();
        let u_g = center_of_glass_u(outer, gap, inner)?;
        let (shgc, vt) = match catalog.optics_override(&code) {
            Some(o) => (o.shgc, o.vt),
            None => composition_optics(outer, inner),
        };
        Ok(Self {
            outer: outer.clone(),
            gap: *gap,
            inner: inner.clone(),
            u_g,
            shgc,
            vt,
            code,
        })
    }

    /// Cavity face carrying the low-e coating (2 or 3), if any.
    pub fn low_e_face(&self) -> Option<u8> {
        if self.outer.is_coated() {
            Some(2)
        } else if self.inner.is_coated() {
            Some(3)
        } else {
            None
        }
    }

    pub fn triple(&self) -> [f64; 3] {
        [self.u_g, self.shgc, self.vt]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn pane(id: &str, t: u32, tsol: f64, ef: f64, eb: f64) -> GlassPane {
        let category = if ef < LOW_E_THRESHOLD || eb < LOW_E_THRESHOLD {
            if tsol < 0.56 {
                GlassCategory::LowTsolBackLowE
            } else {
                GlassCategory::HighTsolLowE
            }
        } else if tsol < SOLAR_CONTROL_TSOL {
            GlassCategory::LowTsol
        } else {
            GlassCategory::Clear
        };
        GlassPane {
            id: id.into(),
            thickness_mm: t,
            tsol,
            tvis: 0.8,
            emis_front: ef,
            emis_back: eb,
            category,
        }
    }

    fn bundled() -> Catalog {
        Catalog::load(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/catalog.json")).unwrap()
    }

    #[test]
    fn bundled_catalog_counts() {
        let c = bundled();
        assert_eq!(c.glasses.len(), 12);
        assert_eq!(c.gaps.len(), 10);
        assert_eq!(c.frames.len(), 10);
    }

    #[test]
    fn bundled_frames_match_published_list() {
        let c = bundled();
        let mut us: Vec<f64> = c.frames.iter().map(|f| f.u_value).collect();
        us.sort_by(f64::total_cmp);
        let mut want = vec![1.9, 1.5, 1.19, 4.0, 3.2, 0.9, 0.71, 2.2, 1.8, 0.66];
        want.sort_by(f64::total_cmp);
        assert_eq!(us, want);
        assert!(c.frames.iter().all(|f| f.width_m == 0.07));
    }

    #[test]
    fn five_mm_glass_is_rejected() {
        let mut c = bundled();
        c.glasses[0].thickness_mm = 5;
        let err = c.validate().unwrap_err();
        match err {
            CatalogError::Validation { id, .. } => assert_eq!(id, c.glasses[0].id),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let mut c = bundled();
        let g = c.glasses[0].clone();
        c.glasses.push(g);
        assert!(matches!(c.validate(), Err(CatalogError::Validation { .. })));
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        assert!(matches!(
            Catalog::from_json_str("{\"glasses\": [1, 2"),
            Err(CatalogError::Parse(_))
        ));
    }

    #[test]
    fn category_bands_are_enforced() {
        let mut g = pane("sel", 6, 0.40, 0.84, 0.84);
        g.category = GlassCategory::SpectrallySelective;
        g.tvis = 0.80;
        assert!(g.validate().is_err());
        g.tvis = 0.60;
        assert!(g.validate().is_ok());
    }

    #[test]
    fn explicit_optics_override_wins() {
        let mut c = bundled();
        let outer = c.glass("clear6").unwrap().clone();
        let inner = c.glass("clear4").unwrap().clone();
        let gap = *c.gap(Gas::Argon, 12).unwrap();
        let code = CompositionCode::new(&outer, &gap, &inner).to_string();
        c.overrides.push(OpticsOverride {
            code,
            shgc: 0.42,
            vt: 0.7,
        });
        let comp = GlazingComposition::assemble(&c, &outer, &gap, &inner).unwrap();
        assert_eq!(comp.shgc, 0.42);
        assert_eq!(comp.vt, 0.7);
    }

    #[test]
    fn orientation_sectors() {
        assert_eq!(Orientation::from_azimuth(0.0), Orientation::N);
        assert_eq!(Orientation::from_azimuth(59.9), Orientation::N);
        assert_eq!(Orientation::from_azimuth(301.0), Orientation::N);
        assert_eq!(Orientation::from_azimuth(90.0), Orientation::E);
        assert_eq!(Orientation::from_azimuth(135.0), Orientation::SE);
        assert_eq!(Orientation::from_azimuth(180.0), Orientation::S);
        assert_eq!(Orientation::from_azimuth(225.0), Orientation::SW);
        assert_eq!(Orientation::from_azimuth(270.0), Orientation::W);
    }
}
