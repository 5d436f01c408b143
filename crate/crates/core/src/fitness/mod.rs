//! Scalar fitness: weighted, normalised quality terms with satisfaction
//! regions, plus heavily weighted regulatory penalties.
//!
//! `F = Σ w_i · N(α_i · f_i) + α_p · Σ p_j`, where `α_i` drops to `α_s` once
//! a quality value reaches its satisfaction threshold.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Thermal zone floor area used to express real-world weights.
pub const ZONE_AREA_M2: f64 = 60.0;
/// Normalisation range shared by heating and cooling demand, kWh/m².
pub const ENERGY_RANGE: f64 = 50.0;

#[derive(Debug, Error, PartialEq)]
pub enum FitnessError {
    #[error("incomplete result: {0}")]
    IncompleteResult(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Location {
    Leon,
    Madrid,
    Sevilla,
}

impl Location {
    pub const ALL: [Location; 3] = [Location::Leon, Location::Madrid, Location::Sevilla];

    /// Heating demand satisfaction threshold, kWh/m²·year.
    pub fn edh_limit(self) -> f64 {
        match self {
            Location::Leon => 46.0,
            Location::Madrid => 30.0,
            Location::Sevilla => 12.0,
        }
    }

    /// Cooling demand satisfaction threshold, kWh/m²·year.
    pub fn edc_limit(self) -> f64 {
        match self {
            Location::Leon => 10.0,
            Location::Madrid => 15.0,
            Location::Sevilla => 20.0,
        }
    }

    pub fn window_u_limit(self) -> f64 {
        match self {
            Location::Leon | Location::Madrid => 1.8,
            Location::Sevilla => 2.3,
        }
    }

    pub fn k_max(self) -> f64 {
        match self {
            Location::Leon => 0.54,
            Location::Madrid => 0.59,
            Location::Sevilla => 0.69,
        }
    }
}

impl FromStr for Location {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "leon" | "león" => Ok(Location::Leon),
            "madrid" => Ok(Location::Madrid),
            "sevilla" | "seville" => Ok(Location::Sevilla),
            other => Err(format!("unknown location `{other}`")),
        }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    EDh,
    EDc,
    NCT,
    FixedShadingCost,
    WindowCost,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualitySpec {
    pub metric: Metric,
    pub min: f64,
    pub max: f64,
    /// `None` means the metric is never satisfied.
    pub satisfaction: Option<f64>,
    pub weight: f64,
    /// Real-world units per kWh, when the weight was derived from it.
    #[serde(default)]
    pub alpha_v: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PenaltyKind {
    SolarControl,
    WindowU,
    GlobalK,
    MinGlazing,
}

/// Linear penalty that is zero up to `limit` and grows by one per
/// `denominator` beyond it. `MinGlazing` is a lower limit, the rest upper.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltySpec {
    pub kind: PenaltyKind,
    pub limit: f64,
    pub denominator: f64,
}

impl PenaltySpec {
    pub fn eval(&self, x: f64) -> f64 {
        let excess = match self.kind {
            PenaltyKind::MinGlazing => self.limit - x,
            _ => x - self.limit,
        };
        (excess / self.denominator).max(0.0)
    }
}

pub fn penalty_solar(q_sol_jul: f64) -> f64 {
    solar_spec().eval(q_sol_jul)
}

pub fn penalty_window_u(u_w: f64, location: Location) -> f64 {
    window_u_spec(location).eval(u_w)
}

pub fn penalty_k(k: f64, location: Location) -> f64 {
    k_spec(location).eval(k)
}

pub fn penalty_min_glazing(r_wf: f64) -> f64 {
    min_glazing_spec().eval(r_wf)
}

fn solar_spec() -> PenaltySpec {
    PenaltySpec { kind: PenaltyKind::SolarControl, limit: 2.0, denominator: 3.5 - 2.0 }
}

fn window_u_spec(location: Location) -> PenaltySpec {
    let lim = location.window_u_limit();
    PenaltySpec { kind: PenaltyKind::WindowU, limit: lim, denominator: 5.5 - lim }
}

fn k_spec(location: Location) -> PenaltySpec {
    let lim = location.k_max();
    PenaltySpec { kind: PenaltyKind::GlobalK, limit: lim, denominator: 0.9 - lim }
}

fn min_glazing_spec() -> PenaltySpec {
    PenaltySpec { kind: PenaltyKind::MinGlazing, limit: 0.12, denominator: 0.12 }
}

/// Weight of a metric from its real-world equivalence with energy:
/// `α_v · R_v / (A · R_E)`.
pub fn weight_from_real_world(alpha_v: f64, range_v: f64, area: f64, range_e: f64) -> f64 {
    alpha_v * range_v / (area * range_e)
}

pub fn normalize(value: f64, spec: &QualitySpec) -> f64 {
    ((value - spec.min) / (spec.max - spec.min)).clamp(0.0, 1.0)
}

pub fn satisfaction_multiplier(value: f64, spec: &QualitySpec, alpha_s: f64) -> f64 {
    match spec.satisfaction {
        Some(s) if value <= s => alpha_s,
        _ => 1.0,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitnessConfig {
    pub location: Location,
    pub alpha_p: f64,
    pub alpha_s: f64,
    pub qualities: Vec<QualitySpec>,
    pub penalties: Vec<PenaltySpec>,
}

impl FitnessConfig {
    pub fn preset(location: Location) -> Self {
        let energy = |metric, sat: f64| QualitySpec {
            metric,
            min: sat - 5.0,
            max: sat + ENERGY_RANGE,
            satisfaction: Some(sat),
            weight: 1.0,
            alpha_v: None,
        };
        let nct_alpha = 6.0;
        let shading_alpha = 20.0;
        let window_alpha = 60.0;
        let qualities = vec![
            energy(Metric::EDh, location.edh_limit()),
            energy(Metric::EDc, location.edc_limit()),
            QualitySpec {
                metric: Metric::NCT,
                min: 388.0,
                max: 938.0,
                satisfaction: Some(438.0),
                // the weight uses a nominal 500 h range, not max − min
                weight: weight_from_real_world(nct_alpha, 500.0, ZONE_AREA_M2, ENERGY_RANGE),
                alpha_v: Some(nct_alpha),
            },
            QualitySpec {
                metric: Metric::FixedShadingCost,
                min: 0.0,
                max: 44.27,
                satisfaction: None,
                weight: weight_from_real_world(shading_alpha, 44.27, ZONE_AREA_M2, ENERGY_RANGE),
                alpha_v: Some(shading_alpha),
            },
            QualitySpec {
                metric: Metric::WindowCost,
                min: 3.0,
                max: 17.57,
                satisfaction: None,
                weight: weight_from_real_world(window_alpha, 17.57 - 3.0, ZONE_AREA_M2, ENERGY_RANGE),
                alpha_v: Some(window_alpha),
            },
        ];
        Self {
            location,
            alpha_p: 1000.0,
            alpha_s: 1.0 / 1000.0,
            qualities,
            penalties: vec![solar_spec(), window_u_spec(location), k_spec(location), min_glazing_spec()],
        }
    }

    pub fn quality(&self, metric: Metric) -> Option<&QualitySpec> {
        self.qualities.iter().find(|q| q.metric == metric)
    }
}

/// Everything the fitness needs from a simulated, canonical design.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitnessInputs {
    pub edh: f64,
    pub edc: f64,
    pub nct: f64,
    pub q_sol_jul: f64,
    /// U_w of every window.
    pub window_u: Vec<f64>,
    pub k: f64,
    /// Glazing to floor ratio of every habitable room.
    pub room_ratios: Vec<f64>,
    pub window_area_m2: f64,
    pub shading_area_m2: f64,
}

impl FitnessInputs {
    fn metric(&self, m: Metric) -> f64 {
        match m {
            Metric::EDh => self.edh,
            Metric::EDc => self.edc,
            Metric::NCT => self.nct,
            Metric::FixedShadingCost => self.shading_area_m2,
            Metric::WindowCost => self.window_area_m2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityTerm {
    pub metric: Metric,
    pub raw: f64,
    pub multiplier: f64,
    pub satisfied: bool,
    pub normalized: f64,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltyTerm {
    pub kind: PenaltyKind,
    /// Sum over every element the penalty applies to.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitnessBreakdown {
    pub qualities: Vec<QualityTerm>,
    pub penalties: Vec<PenaltyTerm>,
    pub alpha_p: f64,
    pub total: f64,
}

impl FitnessBreakdown {
    pub fn quality_sum(&self) -> f64 {
        self.qualities.iter().map(|q| q.weight * q.normalized).sum()
    }

    pub fn penalty_sum(&self) -> f64 {
        self.penalties.iter().map(|p| p.value).sum()
    }

    /// Total rebuilt from the stored terms.
    pub fn recompute(&self) -> f64 {
        self.quality_sum() + self.alpha_p * self.penalty_sum()
    }

    pub fn penalty_free(&self) -> bool {
        self.penalties.iter().all(|p| p.value == 0.0)
    }

    pub fn penalty(&self, kind: PenaltyKind) -> f64 {
        self.penalties.iter().filter(|p| p.kind == kind).map(|p| p.value).sum()
    }

    pub fn quality(&self, metric: Metric) -> Option<&QualityTerm> {
        self.qualities.iter().find(|q| q.metric == metric)
    }
}

pub fn total_fitness(inputs: &FitnessInputs, config: &FitnessConfig) -> Result<FitnessBreakdown, FitnessError> {
    let scalars = [
        ("edh", inputs.edh),
        ("edc", inputs.edc),
        ("nct", inputs.nct),
        ("q_sol_jul", inputs.q_sol_jul),
        ("k", inputs.k),
        ("window_area", inputs.window_area_m2),
        ("shading_area", inputs.shading_area_m2),
    ];
    if let Some((name, v)) = scalars.iter().find(|(_, v)| !v.is_finite()) {
        return Err(FitnessError::IncompleteResult(format!("{name} = {v}")));
    }
    if inputs.window_u.is_empty() || inputs.window_u.iter().any(|u| !u.is_finite()) {
        return Err(FitnessError::IncompleteResult("window U-values missing".into()));
    }
    if inputs.room_ratios.iter().any(|r| !r.is_finite()) {
        return Err(FitnessError::IncompleteResult("room ratio is not finite".into()));
    }

    let qualities: Vec<QualityTerm> = config
        .qualities
        .iter()
        .map(|spec| {
            let raw = inputs.metric(spec.metric);
            let multiplier = satisfaction_multiplier(raw, spec, config.alpha_s);
            QualityTerm {
                metric: spec.metric,
                raw,
                multiplier,
                satisfied: multiplier != 1.0,
                normalized: normalize(multiplier * raw, spec),
                weight: spec.weight,
            }
        })
        .collect();
    let penalties: Vec<PenaltyTerm> = config
        .penalties
        .iter()
        .map(|spec| {
            let value = match spec.kind {
                PenaltyKind::SolarControl => spec.eval(inputs.q_sol_jul),
                PenaltyKind::WindowU => inputs.window_u.iter().map(|&u| spec.eval(u)).sum(),
                PenaltyKind::GlobalK => spec.eval(inputs.k),
                PenaltyKind::MinGlazing => inputs.room_ratios.iter().map(|&r| spec.eval(r)).sum(),
            };
            PenaltyTerm { kind: spec.kind, value }
        })
        .collect();
    let mut b = FitnessBreakdown { qualities, penalties, alpha_p: config.alpha_p, total: 0.0 };
    b.total = b.recompute();
    Ok(b)
}
