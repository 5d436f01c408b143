//! Decision vector ⇄ buildable design.
//!
//! A genome is a flat vector of reals. Canonicalization snaps it to the
//! nearest design that can actually be built from the catalog and fitted to
//! the building; that design's key identifies it in the evaluation cache.

mod cache;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::building::{
    validate_shading, validate_window, BuildingError, BuildingModel, ShadingGeometry, WindowSize,
    MIN_WINDOW_HEIGHT_M, MIN_WINDOW_WIDTH_M,
};
use crate::building::{CLIPPED_EXTENSION_M, MAX_DEPTH_M, MAX_EXTENSION_M};
use crate::catalog::{
    enumerate_compositions, Catalog, CatalogError, FrameSpec, GlazingComposition, Orientation,
    WindowAssembly,
};
use crate::fitness::FitnessInputs;
use crate::thermal::control::{MAX_SLAT_REFLECTANCE, MIN_SLAT_REFLECTANCE};
use crate::thermal::{
    simulate_zone, ShadingControlProgram, SimError, SimOptions, SimWindow, SimulationResult,
    WeatherSeries, ZoneParams,
};
pub use cache::{CacheStats, EvalCache, Evaluation};

/// Headroom above a grid value that still truncates onto it.
const CELL: f64 = 0.099;
pub const REFLECTANCE_STEP: f64 = 0.04;
pub const REFLECTANCE_LEVELS: usize = 15;
/// Per-façade shading parameters in genome order.
pub const SHADING_FIELDS: [&str; 6] =
    ["overhang.depth", "overhang.ext_left", "overhang.ext_right", "fin.left_depth", "fin.right_depth", "fin.ext_top"];

#[derive(Debug, Error)]
pub enum EncodingError {
    #[error("no legal glazing composition for façade {facade} ({orientation})")]
    EmptyNeighborhood { facade: String, orientation: Orientation },
    #[error("catalog has no frames")]
    NoFrames,
    #[error("genome has {got} values, layout expects {expected}")]
    Length { expected: usize, got: usize },
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Building(#[from] BuildingError),
}

/// Design scenarios: S1 may deploy movable blinds as well as fixed devices,
/// S2 only fixed devices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    #[default]
    S1,
    S2,
}

impl std::str::FromStr for Scenario {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "S1" => Ok(Self::S1),
            "S2" => Ok(Self::S2),
            _ => Err(format!("unknown scenario `{s}` (expected S1 or S2)")),
        }
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::S1 => "S1",
            Self::S2 => "S2",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DimKind {
    Width { slot: usize },
    Height { slot: usize },
    FrameU,
    Reflectance,
    /// Component 0 = U, 1 = SHGC, 2 = VT.
    Glazing { facade: usize, component: usize },
    Control { facade: usize },
    /// Index into [`ShadingGeometry::as_array`].
    Shading { facade: usize, index: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dim {
    pub name: String,
    pub kind: DimKind,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenomeLayout {
    pub scenario: Scenario,
    pub dims: Vec<Dim>,
}

impl GenomeLayout {
    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.dims.iter().map(|d| (d.lo, d.hi)).collect()
    }

    pub fn clamp(&self, x: &[f64]) -> Vec<f64> {
        self.dims
            .iter()
            .zip(x)
            .map(|(d, &v)| if v.is_finite() { v.clamp(d.lo, d.hi) } else { d.lo })
            .collect()
    }
}

/// Euclidean distance of range-normalized differences.
pub fn normalized_distance(a: [f64; 3], b: [f64; 3], ranges: [f64; 3]) -> f64 {
    (0..3)
        .map(|i| ((a[i] - b[i]) / ranges[i]).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn reflectance_level(x: f64) -> usize {
    let k = ((x - MIN_SLAT_REFLECTANCE) / REFLECTANCE_STEP).round();
    k.clamp(0.0, (REFLECTANCE_LEVELS - 1) as f64) as usize
}

pub fn reflectance_value(level: usize) -> f64 {
    MIN_SLAT_REFLECTANCE + REFLECTANCE_STEP * level.min(REFLECTANCE_LEVELS - 1) as f64
}

/// Precomputed snapping tables for one building, catalog and scenario.
#[derive(Clone, Debug)]
pub struct Encoder {
    pub building: BuildingModel,
    pub layout: GenomeLayout,
    /// Legal compositions per façade, one per distinct (U, SHGC, VT).
    pub pools: Vec<Vec<GlazingComposition>>,
    pub ranges: Vec<[f64; 3]>,
    /// Frames with distinct U, catalog order.
    pub frames: Vec<FrameSpec>,
}

impl Encoder {
    pub fn new(catalog: &Catalog, building: &BuildingModel, scenario: Scenario) -> Result<Self, EncodingError> {
        let mut frames: Vec<FrameSpec> = Vec::new();
        for f in &catalog.frames {
            if !frames.iter().any(|g| g.u_value == f.u_value) {
                frames.push(f.clone());
            }
        }
        if frames.is_empty() {
            return Err(EncodingError::NoFrames);
        }
        let mut pools = Vec::new();
        let mut ranges = Vec::new();
        for f in &building.facades {
            let orientation = f.orientation();
            let mut pool: Vec<GlazingComposition> = Vec::new();
            for c in enumerate_compositions(catalog, orientation) {
                if !pool.iter().any(|p| p.triple() == c.triple()) {
                    pool.push(c);
                }
            }
            if pool.is_empty() {
                return Err(EncodingError::EmptyNeighborhood { facade: f.name.clone(), orientation });
            }
            let mut lo = [f64::INFINITY; 3];
            let mut hi = [f64::NEG_INFINITY; 3];
            for c in &pool {
                for (i, v) in c.triple().into_iter().enumerate() {
                    lo[i] = lo[i].min(v);
                    hi[i] = hi[i].max(v);
                }
            }
            ranges.push([0, 1, 2].map(|i| if hi[i] > lo[i] { hi[i] - lo[i] } else { 1.0 }));
            pools.push(pool);
        }

        let mut dims = Vec::new();
        let mut push = |name: String, kind: DimKind, lo: f64, hi: f64| dims.push(Dim { name, kind, lo, hi });
        for (slot, (_, s)) in building.slots().enumerate() {
            if !s.width_fixed {
                push(format!("{}.width", s.id), DimKind::Width { slot }, MIN_WINDOW_WIDTH_M, s.box_width_m + CELL);
            }
            push(format!("{}.height", s.id), DimKind::Height { slot }, MIN_WINDOW_HEIGHT_M, s.box_height_m + CELL);
        }
        let (ulo, uhi) = frames.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), f| {
            (a.min(f.u_value), b.max(f.u_value))
        });
        push("frame.u".into(), DimKind::FrameU, ulo, uhi);
        push("reflectance".into(), DimKind::Reflectance, MIN_SLAT_REFLECTANCE, MAX_SLAT_REFLECTANCE);
        for (fi, f) in building.facades.iter().enumerate() {
            for (component, label) in ["u_g", "shgc", "vt"].into_iter().enumerate() {
                let (lo, hi) = pools[fi].iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), c| {
                    (a.min(c.triple()[component]), b.max(c.triple()[component]))
                });
                push(format!("{}.glazing.{label}", f.name), DimKind::Glazing { facade: fi, component }, lo, hi);
            }
        }
        let sc_hi = match scenario {
            Scenario::S1 => (ShadingControlProgram::COUNT - 1) as f64 + 0.999,
            Scenario::S2 => 0.0,
        };
        for (fi, f) in building.facades.iter().enumerate() {
            push(format!("{}.control", f.name), DimKind::Control { facade: fi }, 0.0, sc_hi);
        }
        for (fi, f) in building.facades.iter().enumerate() {
            for (index, label) in SHADING_FIELDS.into_iter().enumerate() {
                let hi = if matches!(index, 0 | 3 | 4) { MAX_DEPTH_M + CELL } else { MAX_EXTENSION_M + CELL };
                push(format!("{}.{label}", f.name), DimKind::Shading { facade: fi, index }, 0.0, hi);
            }
        }
        Ok(Self {
            building: building.clone(),
            layout: GenomeLayout { scenario, dims },
            pools,
            ranges,
            frames,
        })
    }

    pub fn scenario(&self) -> Scenario {
        self.layout.scenario
    }

    fn nearest_glazing(&self, facade: usize, triple: [f64; 3]) -> &GlazingComposition {
        let mut best = &self.pools[facade][0];
        let mut best_d = f64::INFINITY;
        for c in &self.pools[facade] {
            let d = normalized_distance(c.triple(), triple, self.ranges[facade]);
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        best
    }

    fn nearest_frame(&self, u: f64) -> &FrameSpec {
        let mut best = &self.frames[0];
        for f in &self.frames {
            if (f.u_value - u).abs() < (best.u_value - u).abs() {
                best = f;
            }
        }
        best
    }

    /// Snaps a genome to the nearest buildable design.
    pub fn canonicalize(&self, genome: &[f64]) -> Result<CanonicalDesign, EncodingError> {
        let n = self.layout.len();
        if genome.len() != n {
            return Err(EncodingError::Length { expected: n, got: genome.len() });
        }
        let x = self.layout.clamp(genome);
        let nf = self.building.facades.len();
        let nslots = self.building.slot_count();
        let mut raw_w = vec![f64::NAN; nslots];
        let mut raw_h = vec![f64::NAN; nslots];
        let mut frame_u = 0.0;
        let mut refl = MIN_SLAT_REFLECTANCE;
        let mut triples = vec![[0.0; 3]; nf];
        let mut controls = vec![0.0; nf];
        let mut shading = vec![[0.0; 6]; nf];
        for (d, &v) in self.layout.dims.iter().zip(&x) {
            match d.kind {
                DimKind::Width { slot } => raw_w[slot] = v,
                DimKind::Height { slot } => raw_h[slot] = v,
                DimKind::FrameU => frame_u = v,
                DimKind::Reflectance => refl = v,
                DimKind::Glazing { facade, component } => triples[facade][component] = v,
                DimKind::Control { facade } => controls[facade] = v,
                DimKind::Shading { facade, index } => shading[facade][index] = v,
            }
        }
        let frame = self.nearest_frame(frame_u).clone();
        let facades: Vec<CanonicalFacade> = self
            .building
            .facades
            .iter()
            .enumerate()
            .map(|(fi, f)| {
                let orientation = f.orientation();
                let control = match self.scenario() {
                    Scenario::S1 => controls[fi].round().clamp(0.0, (ShadingControlProgram::COUNT - 1) as f64) as u8,
                    Scenario::S2 => 0,
                };
                CanonicalFacade {
                    name: f.name.clone(),
                    orientation,
                    azimuth_deg: f.azimuth_deg,
                    glazing: self.nearest_glazing(fi, triples[fi]).clone(),
                    control,
                    shading: validate_shading(&ShadingGeometry::from_array(shading[fi]), orientation),
                }
            })
            .collect();
        let mut windows = Vec::with_capacity(nslots);
        for (slot, (fi, s)) in self.building.slots().enumerate() {
            let w = if s.width_fixed { s.box_width_m } else { raw_w[slot] };
            let size = validate_window(s, w, raw_h[slot]);
            let assembly = WindowAssembly::new(facades[fi].glazing.clone(), frame.clone(), size.width_m(), size.height_m())?;
            windows.push(CanonicalWindow { slot_id: s.id.clone(), facade: fi, size, assembly });
        }
        let mut design = CanonicalDesign {
            scenario: self.scenario(),
            frame,
            reflectance: reflectance_value(reflectance_level(refl)),
            facades,
            windows,
            key: String::new(),
        };
        design.key = design.compute_key();
        Ok(design)
    }

    /// A genome that canonicalizes back to `design`.
    pub fn genome_from_design(&self, design: &CanonicalDesign) -> Vec<f64> {
        // Grid values are emitted at the centre of their truncation cell;
        // a clipped corner extension is re-emitted inside the 0.1 cell so
        // that clipping reproduces it.
        let centre = |v: f64| {
            if (v - CLIPPED_EXTENSION_M).abs() < 1e-12 {
                0.15
            } else {
                (v * 10.0).round() / 10.0 + 0.05
            }
        };
        let x: Vec<f64> = self
            .layout
            .dims
            .iter()
            .map(|d| match d.kind {
                DimKind::Width { slot } => design.windows[slot].size.width_dm as f64 / 10.0 + 0.05,
                DimKind::Height { slot } => design.windows[slot].size.height_dm as f64 / 10.0 + 0.05,
                DimKind::FrameU => design.frame.u_value,
                DimKind::Reflectance => design.reflectance,
                DimKind::Glazing { facade, component } => design.facades[facade].glazing.triple()[component],
                DimKind::Control { facade } => design.facades[facade].control as f64,
                DimKind::Shading { facade, index } => centre(design.facades[facade].shading.as_array()[index]),
            })
            .collect();
        self.layout.clamp(&x)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalFacade {
    pub name: String,
    pub orientation: Orientation,
    pub azimuth_deg: f64,
    pub glazing: GlazingComposition,
    /// Blind programme SC0–SC6.
    pub control: u8,
    pub shading: ShadingGeometry,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalWindow {
    pub slot_id: String,
    pub facade: usize,
    pub size: WindowSize,
    pub assembly: WindowAssembly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalDesign {
    pub scenario: Scenario,
    pub frame: FrameSpec,
    /// Shared by frames and blind slats.
    pub reflectance: f64,
    pub facades: Vec<CanonicalFacade>,
    pub windows: Vec<CanonicalWindow>,
    pub key: String,
}

impl CanonicalDesign {
    fn compute_key(&self) -> String {
        let mut k = String::new();
        let _ = write!(k, "{}|frame={}|refl={:.2}", self.scenario, self.frame.id, self.reflectance);
        for f in &self.facades {
            let s = f.shading.as_array();
            let _ = write!(
                k,
                "|{}:{}:SC{}:{:.2},{:.2},{:.2},{:.2},{:.2},{:.2}",
                f.name, f.glazing.code, f.control, s[0], s[1], s[2], s[3], s[4], s[5]
            );
        }
        for w in &self.windows {
            let _ = write!(k, "|{}:{}x{}", w.slot_id, w.size.width_dm, w.size.height_dm);
        }
        k
    }

    /// Short stable identifier derived from the key.
    pub fn id(&self) -> String {
        let digest = Sha256::digest(self.key.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn window_areas(&self) -> Vec<f64> {
        self.windows.iter().map(|w| w.size.area_m2()).collect()
    }

    pub fn window_area_m2(&self) -> f64 {
        self.window_areas().iter().sum()
    }

    /// Surface of all fixed devices; every window of a façade carries that
    /// façade's devices.
    pub fn shading_area_m2(&self) -> f64 {
        self.windows
            .iter()
            .map(|w| self.facades[w.facade].shading.area_m2(w.size.width_m(), w.size.height_m()))
            .sum()
    }

    pub fn k(&self, building: &BuildingModel) -> Result<f64, BuildingError> {
        let pairs: Vec<(f64, f64)> = self.windows.iter().map(|w| (w.size.area_m2(), w.assembly.u_w)).collect();
        building.heat_transfer_k(&pairs)
    }

    pub fn sim_windows(&self) -> Vec<SimWindow> {
        self.windows
            .iter()
            .map(|w| {
                let f = &self.facades[w.facade];
                SimWindow {
                    facade_azimuth_deg: f.azimuth_deg,
                    width_m: w.size.width_m(),
                    height_m: w.size.height_m(),
                    glazed_area_m2: w.assembly.a_g,
                    shgc: f.glazing.shgc,
                    shading: f.shading,
                    control: ShadingControlProgram::from_id(f.control),
                    slat_reflectance: self.reflectance,
                }
            })
            .collect()
    }

    /// Runs the built-in zone model on this design.
    pub fn simulate(
        &self,
        building: &BuildingModel,
        weather: &WeatherSeries,
        opts: &SimOptions,
    ) -> Result<SimulationResult, SimError> {
        let k = self.k(building).map_err(|e| SimError::Geometry(e.to_string()))?;
        simulate_zone(&ZoneParams::for_building(building, k), &self.sim_windows(), weather, opts)
    }

    pub fn fitness_inputs(&self, building: &BuildingModel, sim: &SimulationResult) -> Result<FitnessInputs, BuildingError> {
        Ok(FitnessInputs {
            edh: sim.edh,
            edc: sim.edc,
            nct: sim.nct,
            q_sol_jul: sim.q_sol_jul,
            window_u: self.windows.iter().map(|w| w.assembly.u_w).collect(),
            k: self.k(building)?,
            room_ratios: building.room_ratios(&self.window_areas()).into_iter().map(|(_, r)| r).collect(),
            window_area_m2: self.window_area_m2(),
            shading_area_m2: self.shading_area_m2(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn encoder(scenario: Scenario) -> Encoder {
        let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data");
        let cat = Catalog::load(format!("{root}/catalog.json")).unwrap();
        let b = BuildingModel::load(format!("{root}/building.json")).unwrap();
        Encoder::new(&cat, &b, scenario).unwrap()
    }

    fn random_genome(e: &Encoder, rng: &mut impl Rng) -> Vec<f64> {
        e.layout.dims.iter().map(|d| if d.hi > d.lo { rng.random_range(d.lo..=d.hi) } else { d.lo }).collect()
    }

    #[test]
    fn layout_size() {
        let e = encoder(Scenario::S1);
        // 8 window sizes, frame, reflectance, 3 triples, 3 controls, 3 × 6 shading values
        assert_eq!(e.layout.len(), 40);
        assert!(e.layout.dims.iter().all(|d| d.lo <= d.hi));
    }

    #[test]
    fn distance_examples() {
        let r = [2.5, 1.0, 1.0];
        assert_eq!(normalized_distance([1.1, 0.5, 0.7], [1.1, 0.5, 0.7], r), 0.0);
        assert!((normalized_distance([1.1, 0.5, 0.7], [1.6, 0.5, 0.7], r) - 0.2).abs() < 1e-12);
        assert!((normalized_distance([0.0, 0.0, 0.0], [2.5, 0.0, 0.0], r) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn control_rounds_to_nearest_programme() {
        let e = encoder(Scenario::S1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut g = random_genome(&e, &mut rng);
        let i = e.layout.dims.iter().position(|d| d.kind == DimKind::Control { facade: 0 }).unwrap();
        g[i] = 3.4;
        assert_eq!(e.canonicalize(&g).unwrap().facades[0].control, 3);
    }

    #[test]
    fn exact_triple_snaps_to_itself() {
        let e = encoder(Scenario::S1);
        for (fi, pool) in e.pools.iter().enumerate() {
            for c in pool {
                assert_eq!(e.nearest_glazing(fi, c.triple()).code, c.code);
            }
        }
    }

    #[test]
    fn truncation_collision() {
        let e = encoder(Scenario::S1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let g = random_genome(&e, &mut rng);
        let i = e.layout.dims.iter().position(|d| d.name == "W2.width").unwrap();
        let (mut a, mut b) = (g.clone(), g);
        a[i] = 1.51;
        b[i] = 1.54;
        assert_eq!(e.canonicalize(&a).unwrap().key, e.canonicalize(&b).unwrap().key);
    }

    #[test]
    fn s2_ignores_control_dims() {
        let e = encoder(Scenario::S2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut g = random_genome(&e, &mut rng);
        let base = e.canonicalize(&g).unwrap();
        for (i, d) in e.layout.dims.iter().enumerate() {
            if matches!(d.kind, DimKind::Control { .. }) {
                g[i] = 5.0;
            }
        }
        let d = e.canonicalize(&g).unwrap();
        assert_eq!(d.key, base.key);
        assert!(d.facades.iter().all(|f| f.control == 0));
    }

    #[test]
    fn wrong_length_is_rejected() {
        let e = encoder(Scenario::S1);
        assert!(matches!(e.canonicalize(&[0.0; 3]), Err(EncodingError::Length { .. })));
    }

    proptest! {
        #[test]
        fn canonicalization_is_idempotent(seed in any::<u64>(), s2 in any::<bool>()) {
            let e = encoder(if s2 { Scenario::S2 } else { Scenario::S1 });
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let d = e.canonicalize(&random_genome(&e, &mut rng)).unwrap();
            let again = e.canonicalize(&e.genome_from_design(&d)).unwrap();
            prop_assert_eq!(&again, &d);
            for f in &d.facades {
                prop_assert!(f.shading.is_canonical());
                let mini = Catalog {
                    glasses: vec![f.glazing.outer.clone(), f.glazing.inner.clone()],
                    gaps: vec![f.glazing.gap],
                    ..Default::default()
                };
                let legal = enumerate_compositions(&mini, f.orientation).iter().any(|c| c.code == f.glazing.code);
                prop_assert!(legal);
            }
        }
    }
}
