//! Generates the bundled synthetic typical-year weather files.
//!
//! ```text
//! cargo run -p fenopt --example make_weather -- data/weather
//! ```
//!
//! Each city gets monthly mean temperatures and clearness close to its
//! climate normals; day-to-day variation comes from a seeded AR(1) process
//! so the files are reproducible.

use std::path::PathBuf;

use fenopt::thermal::solar::{solar_hour, solar_position};
use fenopt::thermal::{hour_stamp, WeatherSeries, HOURS_PER_YEAR};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

struct Climate {
    file: &'static str,
    name: &'static str,
    latitude: f64,
    longitude: f64,
    elevation_m: f64,
    /// Monthly mean dry-bulb, °C.
    mean_temp: [f64; 12],
    /// Half of the mean daily temperature swing, °C.
    half_swing: [f64; 12],
    /// Monthly mean clearness, 0–1.
    clearness: [f64; 12],
    seed: u64,
}

const CLIMATES: [Climate; 3] = [
    Climate {
        file: "leon.epw",
        name: "Leon",
        latitude: 42.59,
        longitude: -5.65,
        elevation_m: 916.0,
        mean_temp: [3.2, 4.6, 7.6, 9.3, 12.9, 17.5, 20.3, 20.0, 16.8, 11.8, 6.8, 4.0],
        half_swing: [4.5, 5.5, 6.5, 6.5, 7.0, 7.5, 8.0, 8.0, 7.5, 6.0, 5.0, 4.5],
        clearness: [0.52, 0.56, 0.60, 0.60, 0.64, 0.72, 0.80, 0.78, 0.70, 0.58, 0.52, 0.50],
        seed: 0x1e07,
    },
    Climate {
        file: "madrid.epw",
        name: "Madrid",
        latitude: 40.45,
        longitude: -3.55,
        elevation_m: 582.0,
        mean_temp: [6.3, 7.9, 11.2, 12.9, 16.9, 22.4, 25.9, 25.4, 21.0, 15.3, 9.7, 6.9],
        half_swing: [4.5, 5.5, 6.5, 6.5, 7.0, 7.5, 8.0, 8.0, 7.0, 6.0, 5.0, 4.5],
        clearness: [0.56, 0.60, 0.64, 0.64, 0.68, 0.76, 0.82, 0.80, 0.72, 0.62, 0.56, 0.54],
        seed: 0x3ad,
    },
    Climate {
        file: "sevilla.epw",
        name: "Sevilla",
        latitude: 37.42,
        longitude: -5.9,
        elevation_m: 34.0,
        mean_temp: [10.9, 12.6, 15.6, 17.4, 20.9, 25.1, 28.2, 28.0, 25.1, 20.5, 15.3, 12.1],
        half_swing: [5.0, 5.5, 6.5, 6.5, 7.0, 7.5, 8.0, 8.0, 7.0, 6.0, 5.5, 5.0],
        clearness: [0.60, 0.62, 0.66, 0.68, 0.72, 0.78, 0.84, 0.82, 0.74, 0.66, 0.60, 0.58],
        seed: 0x5e7,
    },
];

/// Smooth interpolation of a monthly table at fractional day-of-year.
fn monthly(table: &[f64; 12], day: f64) -> f64 {
    let m = (day / 365.0 * 12.0 - 0.5).rem_euclid(12.0);
    let i = m.floor() as usize % 12;
    let t = m - m.floor();
    let w = 0.5 - 0.5 * (std::f64::consts::PI * t).cos();
    table[i] * (1.0 - w) + table[(i + 1) % 12] * w
}

fn generate(c: &Climate) -> WeatherSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    let mut w = WeatherSeries::constant(c.latitude, 0.0, 0.0, 0.0, 0.0);
    w.location = c.name.into();
    w.longitude = c.longitude;
    w.utc_offset = 1.0;
    w.elevation_m = c.elevation_m;

    let mut temp_anomaly = 0.0;
    let mut cloud_anomaly = 0.0;
    for day in 0..365usize {
        temp_anomaly = 0.7 * temp_anomaly + 1.6 * unit.sample(&mut rng);
        cloud_anomaly = 0.5 * cloud_anomaly + 0.18 * unit.sample(&mut rng);
        let d = day as f64 + 0.5;
        let k = (monthly(&c.clearness, d) + cloud_anomaly).clamp(0.15, 0.95);
        // Clear days swing more than overcast ones.
        let swing = monthly(&c.half_swing, d) * (0.6 + 0.6 * k);
        let mean = monthly(&c.mean_temp, d) + temp_anomaly;
        for hour in 0..24usize {
            let i = day * 24 + hour;
            let st = hour_stamp(i);
            let clock = hour as f64 + 0.5;
            // Minimum around sunrise, maximum mid-afternoon.
            let phase = (clock - 15.0) / 24.0 * std::f64::consts::TAU;
            w.dry_bulb[i] = mean + swing * phase.cos();

            let t = solar_hour(st.day_of_year, clock, c.longitude, 1.0);
            let sun = solar_position(c.latitude, st.day_of_year, t);
            if !sun.is_up() {
                continue;
            }
            let sin_alt = sun.altitude_deg.to_radians().sin();
            let e0 = 1367.0 * (1.0 + 0.033 * (360.0 * st.day_of_year as f64 / 365.0).to_radians().cos());
            let air_mass = 1.0 / (sin_alt + 0.50572 * (sun.altitude_deg + 6.07995).powf(-1.6364));
            let dni_clear = e0 * 0.7f64.powf(air_mass.powf(0.678));
            let dni = dni_clear * k.powf(1.5);
            let dhi = e0 * sin_alt * (0.06 + 0.22 * (1.0 - k)) * (0.4 + 0.6 * k);
            w.direct_normal[i] = dni.round();
            w.diffuse_horizontal[i] = dhi.round();
            w.global_horizontal[i] = (dni * sin_alt + dhi).round();
        }
    }
    debug_assert_eq!(w.len(), HOURS_PER_YEAR);
    w
}

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data/weather".into()));
    std::fs::create_dir_all(&dir)?;
    for c in &CLIMATES {
        let w = generate(c);
        let mean = w.dry_bulb.iter().sum::<f64>() / w.len() as f64;
        let ghi_kwh = w.global_horizontal.iter().sum::<f64>() / 1000.0;
        w.write_epw(dir.join(c.file))?;
        println!("{}: mean {mean:.1} °C, GHI {ghi_kwh:.0} kWh/m²·year", c.file);
    }
    Ok(())
}
