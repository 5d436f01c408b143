//! Hourly single-zone thermal model.
//!
//! One capacitive node exchanges heat with outdoors through the envelope
//! conductance and ventilation, receives solar and internal gains, and is
//! held between the heating and cooling setpoints by an ideal HVAC system.
//! Free cooling by extra outdoor air is used before mechanical cooling.

pub mod control;
pub mod external;
pub mod solar;
pub mod weather;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::building::ShadingGeometry;
use crate::building::BuildingModel;
pub use control::{blind_state, BlindInputs, BlindState, Schedule1Reading, ShadingControlProgram};
pub use external::{external_evaluate, ExternalCommand, ExternalError};
pub use solar::{incident_irradiance, solar_position, sunlit_fraction, Incident, SunPosition};
pub use weather::{hour_stamp, WeatherError, WeatherSeries, HOURS_PER_YEAR};

pub const HEATING_SETPOINT_C: f64 = 22.0;
pub const COOLING_SETPOINT_C: f64 = 25.0;
/// Mechanical ventilation, m³/s.
pub const VENTILATION_FLOW_M3_S: f64 = 0.024;
/// Volumetric heat capacity of air, J/(m³·K).
pub const AIR_HEAT_CAPACITY_J_M3K: f64 = 1200.0;
pub const FREE_COOLING_MAX_ACH: f64 = 4.0;
pub const OCCUPANTS: f64 = 4.0;
pub const GAIN_PER_PERSON_W: f64 = 117.0;
pub const LIGHTING_GAIN_W_M2: f64 = 4.4;
pub const SUBSTEPS_PER_HOUR: usize = 6;
pub const WARMUP_DAYS: usize = 7;
const TEMPERATURE_GUARD_C: (f64, f64) = (-50.0, 80.0);
const JULY: u32 = 7;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("zone temperature {temperature_c:.1} °C left the stable range at hour {hour}")]
    Numerical { hour: usize, temperature_c: f64 },
    #[error(transparent)]
    Weather(#[from] WeatherError),
    #[error("invalid schedule file: {0}")]
    Schedule(String),
    #[error("design geometry: {0}")]
    Geometry(String),
}

/// Hourly fractions of the nominal internal gains, index 0 = 00:00–01:00.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainSchedules {
    pub occupancy: Vec<f64>,
    pub lighting: Vec<f64>,
}

impl GainSchedules {
    pub fn bundled() -> Self {
        Self::from_json_str(include_str!("../../../../data/schedules.json"))
            .expect("bundled schedule file is valid")
    }

    pub fn from_json_str(text: &str) -> Result<Self, SimError> {
        let s: Self = serde_json::from_str(text).map_err(|e| SimError::Schedule(e.to_string()))?;
        for (name, v) in [("occupancy", &s.occupancy), ("lighting", &s.lighting)] {
            if v.len() != 24 || v.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(SimError::Schedule(format!("{name} needs 24 fractions in [0, 1]")));
            }
        }
        Ok(s)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::Schedule(e.to_string()))?;
        Self::from_json_str(&text)
    }

    pub fn none() -> Self {
        Self { occupancy: vec![0.0; 24], lighting: vec![0.0; 24] }
    }
}

/// Lumped thermal parameters of the zone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZoneParams {
    pub floor_area_m2: f64,
    pub capacitance_j_k: f64,
    /// Envelope conductance (opaque walls plus windows), W/K.
    pub envelope_w_k: f64,
    /// Mechanical ventilation plus infiltration, W/K.
    pub ventilation_w_k: f64,
    /// Extra conductance available for free cooling, W/K.
    pub free_cooling_max_w_k: f64,
    pub heating_setpoint_c: f64,
    pub cooling_setpoint_c: f64,
    /// Nominal internal gains at full schedule, W.
    pub occupant_gain_w: f64,
    pub lighting_gain_w: f64,
}

impl ZoneParams {
    /// Parameters of `building` whose façades have mean transmittance `k`.
    pub fn for_building(building: &BuildingModel, k: f64) -> Self {
        let volume = building.volume_m3();
        let infiltration_ach = building.n50 / 20.0;
        let flow = VENTILATION_FLOW_M3_S + infiltration_ach * volume / 3600.0;
        Self {
            floor_area_m2: building.zone_floor_area_m2,
            capacitance_j_k: building.capacitance_j_k(),
            envelope_w_k: k * building.envelope_area_m2(),
            ventilation_w_k: AIR_HEAT_CAPACITY_J_M3K * flow,
            free_cooling_max_w_k: AIR_HEAT_CAPACITY_J_M3K * FREE_COOLING_MAX_ACH * volume / 3600.0,
            heating_setpoint_c: HEATING_SETPOINT_C,
            cooling_setpoint_c: COOLING_SETPOINT_C,
            occupant_gain_w: OCCUPANTS * GAIN_PER_PERSON_W,
            lighting_gain_w: LIGHTING_GAIN_W_M2 * building.zone_floor_area_m2,
        }
    }
}

/// A window as the solar model sees it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimWindow {
    pub facade_azimuth_deg: f64,
    pub width_m: f64,
    pub height_m: f64,
    pub glazed_area_m2: f64,
    pub shgc: f64,
    pub shading: ShadingGeometry,
    pub control: ShadingControlProgram,
    pub slat_reflectance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub schedule1: Schedule1Reading,
    pub schedules: GainSchedules,
    pub record_traces: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { schedule1: Schedule1Reading::default(), schedules: GainSchedules::bundled(), record_traces: false }
    }
}

/// Energy crossing the zone boundary over the simulated year, J.
/// Losses are positive when heat leaves the zone.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyBalance {
    pub heating: f64,
    pub cooling: f64,
    pub solar: f64,
    pub internal: f64,
    pub envelope_loss: f64,
    pub ventilation_loss: f64,
    pub free_cooling_loss: f64,
    /// C·(T_end − T_start).
    pub stored: f64,
}

impl EnergyBalance {
    /// Net inflow minus stored energy, relative to the largest flow.
    pub fn relative_residual(&self) -> f64 {
        let net = self.heating - self.cooling + self.solar + self.internal
            - self.envelope_loss
            - self.ventilation_loss
            - self.free_cooling_loss
            - self.stored;
        let scale = [
            self.heating,
            self.cooling,
            self.solar,
            self.internal,
            self.envelope_loss.abs(),
            self.ventilation_loss.abs(),
            self.free_cooling_loss,
            self.stored.abs(),
        ]
        .into_iter()
        .fold(1.0, f64::max);
        net.abs() / scale
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HourlyTraces {
    /// Hour-mean zone temperature, °C.
    pub zone_temp_c: Vec<f64>,
    /// Hour-mean powers, W.
    pub heating_w: Vec<f64>,
    pub cooling_w: Vec<f64>,
    pub solar_w: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    /// kWh/m²·year.
    pub edh: f64,
    pub edc: f64,
    /// Hours per year outside the comfort band.
    pub nct: f64,
    /// July solar gain, kWh/m².
    pub q_sol_jul: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub balance: Option<EnergyBalance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traces: Option<HourlyTraces>,
}

impl SimulationResult {
    pub fn is_valid(&self) -> bool {
        [self.edh, self.edc, self.nct, self.q_sol_jul].iter().all(|v| v.is_finite() && *v >= 0.0)
    }
}

/// Comfort band for the hour-mean zone temperature: 1.0 clo from November
/// to April, 0.5 clo from May to October.
pub fn comfort_band(month: u32) -> (f64, f64) {
    if (5..=10).contains(&month) {
        (23.0, 28.0)
    } else {
        (20.5, 25.5)
    }
}

/// Solar gain of each window in one hour, W, with the blind state the
/// controller chose.
struct SolarHour {
    month: u32,
    hour: u32,
    sun_up: bool,
    /// Per window: beam through the devices and diffuse, W/m², plus plane total.
    windows: Vec<(f64, f64, f64)>,
}

fn solar_hours(windows: &[SimWindow], weather: &WeatherSeries) -> Vec<SolarHour> {
    (0..weather.len())
        .map(|i| {
            let st = hour_stamp(i);
            let t = solar::solar_hour(st.day_of_year, st.hour as f64 + 0.5, weather.longitude, weather.utc_offset);
            let sun = solar_position(weather.latitude, st.day_of_year, t);
            let per_window = windows
                .iter()
                .map(|w| {
                    let inc = incident_irradiance(
                        sun,
                        w.facade_azimuth_deg,
                        weather.direct_normal[i],
                        weather.diffuse_horizontal[i],
                        weather.global_horizontal[i],
                    );
                    let beam = if inc.direct > 0.0 {
                        let gamma = solar::relative_azimuth_deg(sun.azimuth_deg, w.facade_azimuth_deg);
                        inc.direct * sunlit_fraction(w.width_m, w.height_m, &w.shading, sun.altitude_deg, gamma)
                    } else {
                        0.0
                    };
                    (beam, inc.diffuse, inc.total())
                })
                .collect();
            SolarHour { month: st.month, hour: st.hour, sun_up: sun.is_up(), windows: per_window }
        })
        .collect()
}

/// Runs one year of the zone model.
pub fn simulate_zone(
    params: &ZoneParams,
    windows: &[SimWindow],
    weather: &WeatherSeries,
    opts: &SimOptions,
) -> Result<SimulationResult, SimError> {
    weather.validate()?;
    let hours = solar_hours(windows, weather);
    let n = weather.len();
    let c = params.capacitance_j_k;
    let dt = 3600.0 / SUBSTEPS_PER_HOUR as f64;
    let (th, tc) = (params.heating_setpoint_c, params.cooling_setpoint_c);

    let mut t = th;
    let mut last_free = th;
    let mut bal = EnergyBalance::default();
    let mut july_solar = 0.0;
    let mut nct = 0usize;
    let mut traces = opts.record_traces.then(HourlyTraces::default);

    // The year is preceded by its own last week so it starts from a
    // realistic state; nothing is accumulated during warm-up.
    let warmup = (WARMUP_DAYS * 24).min(n);
    let order = (n - warmup..n).chain(0..n);
    let mut t_start = t;
    for (step, i) in order.enumerate() {
        let record = step >= warmup;
        if step == warmup {
            t_start = t;
        }
        let sh = &hours[i];
        let t_out = weather.dry_bulb[i];
        let mut q_sol = 0.0;
        for (w, &(beam, diffuse, total)) in windows.iter().zip(&sh.windows) {
            let inputs = BlindInputs { month: sh.month, sun_up: sh.sun_up, incident_w_m2: total, zone_temp_c: last_free };
            let blind = blind_state(&w.control, &inputs, w.slat_reflectance, opts.schedule1);
            q_sol += (beam + diffuse) * blind.multiplier * w.shgc * w.glazed_area_m2;
        }
        let h = sh.hour as usize;
        let q_int = params.occupant_gain_w * opts.schedules.occupancy[h] + params.lighting_gain_w * opts.schedules.lighting[h];

        let mut t_sum = 0.0;
        let (mut heat_j, mut cool_j) = (0.0, 0.0);
        for _ in 0..SUBSTEPS_PER_HOUR {
            let q_env = params.envelope_w_k * (t - t_out);
            let q_vent = params.ventilation_w_k * (t - t_out);
            let t_pred = t + dt / c * (q_sol + q_int - q_env - q_vent);
            let mut q_fc = 0.0;
            if t_pred > tc && t_out < t {
                let h_fc = ((t_pred - tc) * c / (dt * (t - t_out))).min(params.free_cooling_max_w_k);
                q_fc = h_fc * (t - t_out);
            }
            let t_free = t_pred - dt / c * q_fc;
            let (q_heat, q_cool, t_next) = if t_free < th {
                (c * (th - t_free) / dt, 0.0, th)
            } else if t_free > tc {
                (0.0, c * (t_free - tc) / dt, tc)
            } else {
                (0.0, 0.0, t_free)
            };
            if !(TEMPERATURE_GUARD_C.0..=TEMPERATURE_GUARD_C.1).contains(&t_free) || !t_free.is_finite() {
                return Err(SimError::Numerical { hour: i, temperature_c: t_free });
            }
            if record {
                bal.heating += q_heat * dt;
                bal.cooling += q_cool * dt;
                bal.solar += q_sol * dt;
                bal.internal += q_int * dt;
                bal.envelope_loss += q_env * dt;
                bal.ventilation_loss += q_vent * dt;
                bal.free_cooling_loss += q_fc * dt;
                heat_j += q_heat * dt;
                cool_j += q_cool * dt;
            }
            last_free = t_free;
            t = t_next;
            t_sum += t;
        }
        if !record {
            continue;
        }
        let t_mean = t_sum / SUBSTEPS_PER_HOUR as f64;
        let (lo, hi) = comfort_band(sh.month);
        if t_mean < lo || t_mean > hi {
            nct += 1;
        }
        if sh.month == JULY {
            july_solar += q_sol * 3600.0;
        }
        if let Some(tr) = traces.as_mut() {
            tr.zone_temp_c.push(t_mean);
            tr.heating_w.push(heat_j / 3600.0);
            tr.cooling_w.push(cool_j / 3600.0);
            tr.solar_w.push(q_sol);
        }
    }
    bal.stored = c * (t - t_start);
    let per_m2_kwh = |j: f64| j / 3.6e6 / params.floor_area_m2;
    Ok(SimulationResult {
        edh: per_m2_kwh(bal.heating),
        edc: per_m2_kwh(bal.cooling),
        nct: nct as f64,
        q_sol_jul: per_m2_kwh(july_solar),
        balance: Some(bal),
        traces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bare_zone(ua: f64) -> ZoneParams {
        ZoneParams {
            floor_area_m2: 60.0,
            capacitance_j_k: 11.729e3 * 109.65 + 1.2 * 1005.0 * 150.0,
            envelope_w_k: ua,
            ventilation_w_k: 0.0,
            free_cooling_max_w_k: 0.0,
            heating_setpoint_c: 22.0,
            cooling_setpoint_c: 25.0,
            occupant_gain_w: 0.0,
            lighting_gain_w: 0.0,
        }
    }

    fn quiet() -> SimOptions {
        SimOptions { schedules: GainSchedules::none(), ..Default::default() }
    }

    fn south_window(shgc: f64, sc: u8) -> SimWindow {
        SimWindow {
            facade_azimuth_deg: 180.0,
            width_m: 2.0,
            height_m: 1.5,
            glazed_area_m2: 2.5,
            shgc,
            shading: ShadingGeometry::default(),
            control: ShadingControlProgram::from_id(sc),
            slat_reflectance: 0.57,
        }
    }

    #[test]
    fn equilibrium_needs_no_energy() {
        let w = WeatherSeries::constant(40.0, 22.0, 0.0, 0.0, 0.0);
        let r = simulate_zone(&bare_zone(100.0), &[], &w, &quiet()).unwrap();
        assert_eq!((r.edh, r.edc), (0.0, 0.0));
        // 22 °C is below the summer band
        assert_eq!(r.nct, (31 + 30 + 31 + 31 + 30 + 31) as f64 * 24.0);
    }

    #[test]
    fn steady_heating_load() {
        let w = WeatherSeries::constant(40.0, 0.0, 0.0, 0.0, 0.0);
        let r = simulate_zone(&bare_zone(100.0), &[], &w, &quiet()).unwrap();
        let expect = 2200.0 * 8760.0 / 1000.0 / 60.0;
        assert!((r.edh - expect).abs() / expect < 1e-9, "{}", r.edh);
        assert_eq!(r.edc, 0.0);
    }

    #[test]
    fn energy_is_conserved() {
        let mut w = WeatherSeries::constant(40.0, 10.0, 0.0, 0.0, 0.0);
        for i in 0..HOURS_PER_YEAR {
            let st = hour_stamp(i);
            let season = -((st.day_of_year as f64 - 15.0) / 365.0 * std::f64::consts::TAU).cos();
            let day = ((st.hour as f64 - 14.0) / 24.0 * std::f64::consts::TAU).cos();
            w.dry_bulb[i] = 15.0 + 10.0 * season + 6.0 * day;
            let up = (6..=18).contains(&st.hour);
            w.direct_normal[i] = if up { 600.0 } else { 0.0 };
            w.diffuse_horizontal[i] = if up { 100.0 } else { 0.0 };
            w.global_horizontal[i] = if up { 400.0 } else { 0.0 };
        }
        let b = BuildingModel::load(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/building.json")).unwrap();
        let p = ZoneParams::for_building(&b, 0.4);
        let r = simulate_zone(&p, &[south_window(0.6, 5)], &w, &SimOptions::default()).unwrap();
        let bal = r.balance.unwrap();
        assert!(bal.relative_residual() < 1e-9, "{bal:?}");
        assert!(r.edh > 0.0 && r.edc > 0.0 && bal.free_cooling_loss > 0.0);
    }

    #[test]
    fn more_solar_transmittance_more_cooling() {
        let mut w = WeatherSeries::constant(40.0, 26.0, 700.0, 120.0, 500.0);
        w.latitude = 40.0;
        let p = bare_zone(60.0);
        let a = simulate_zone(&p, &[south_window(0.3, 0)], &w, &quiet()).unwrap();
        let b = simulate_zone(&p, &[south_window(0.6, 0)], &w, &quiet()).unwrap();
        assert!(b.edc > a.edc);
        assert!(b.q_sol_jul > a.q_sol_jul);
    }

    #[test]
    fn blinds_cut_july_gain() {
        let w = WeatherSeries::constant(40.0, 20.0, 700.0, 120.0, 500.0);
        let p = bare_zone(60.0);
        let open = simulate_zone(&p, &[south_window(0.6, 0)], &w, &quiet()).unwrap();
        let shaded = simulate_zone(&p, &[south_window(0.6, 1)], &w, &quiet()).unwrap();
        assert!(shaded.q_sol_jul < open.q_sol_jul);
    }

    #[test]
    fn july_gain_matches_traces() {
        let w = WeatherSeries::constant(40.0, 20.0, 700.0, 120.0, 500.0);
        let opts = SimOptions { record_traces: true, ..quiet() };
        let r = simulate_zone(&bare_zone(60.0), &[south_window(0.6, 3)], &w, &opts).unwrap();
        let tr = r.traces.unwrap();
        let july: f64 = (0..HOURS_PER_YEAR).filter(|&i| hour_stamp(i).month == 7).map(|i| tr.solar_w[i]).sum();
        assert!((july / 1000.0 / 60.0 - r.q_sol_jul).abs() < 1e-9);
        let heat: f64 = tr.heating_w.iter().sum::<f64>() / 1000.0 / 60.0;
        assert!((heat - r.edh).abs() <= 1e-6 * r.edh.max(1.0));
    }

    #[test]
    fn unstable_parameters_are_reported() {
        let mut p = bare_zone(1e7);
        p.capacitance_j_k = 1.0;
        let w = WeatherSeries::constant(40.0, 0.0, 0.0, 0.0, 0.0);
        assert!(matches!(simulate_zone(&p, &[], &w, &quiet()), Err(SimError::Numerical { .. })));
    }

    #[test]
    fn schedule_file_validation() {
        assert!(GainSchedules::from_json_str(r#"{"occupancy":[1.0],"lighting":[]}"#).is_err());
        let s = GainSchedules::bundled();
        assert_eq!(s.occupancy[0], 1.0);
        assert_eq!(s.occupancy[10], 0.25);
        assert_eq!(s.occupancy[16], 0.5);
    }
}
